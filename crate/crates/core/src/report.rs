//! Plot-ready tables with a provenance header.
//!
//! CSV tables start with `#` comment lines naming the tool version, seed and
//! command-line flags. JSON documents carry the same data in a `provenance`
//! field next to the payload.

use std::io::Write;

use serde::Serialize;

use crate::error::Result;
use crate::load_metrics::{MetricSeries, PhaseSlopes, SlopeEstimate};
use crate::moments::Trajectory;
use crate::pearson::{
    classify_region, metric1, metric2, to_pearson, LandmarkSet, Region, DEFAULT_REGION_TOL,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub seed: Option<u64>,
    pub flags: Vec<String>,
}

impl Provenance {
    pub fn new(seed: Option<u64>, flags: Vec<String>) -> Self {
        Self {
            tool: "hrload",
            version: crate::VERSION,
            seed,
            flags,
        }
    }

    pub fn write_comment<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "# {} {}", self.tool, self.version)?;
        if let Some(seed) = self.seed {
            writeln!(out, "# seed: {seed}")?;
        }
        writeln!(out, "# flags: {}", self.flags.join(" "))?;
        Ok(())
    }
}

#[derive(Serialize)]
struct Document<'a, T: Serialize> {
    provenance: &'a Provenance,
    #[serde(flatten)]
    payload: T,
}

/// Writes `rows` as one table. In JSON the rows sit under `key`.
pub fn write_table<W: Write, T: Serialize>(
    mut out: W,
    format: Format,
    provenance: &Provenance,
    key: &str,
    rows: &[T],
) -> Result<()> {
    match format {
        Format::Csv => {
            provenance.write_comment(&mut out)?;
            let mut w = csv::Writer::from_writer(out);
            for r in rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        Format::Json => {
            let payload =
                serde_json::Map::from_iter([(key.to_string(), serde_json::to_value(rows)?)]);
            write_document(out, provenance, &payload)?;
        }
    }
    Ok(())
}

/// Writes an arbitrary JSON payload with provenance merged in.
pub fn write_document<W: Write, T: Serialize>(
    mut out: W,
    provenance: &Provenance,
    payload: &T,
) -> Result<()> {
    serde_json::to_writer_pretty(
        &mut out,
        &Document {
            provenance,
            payload,
        },
    )?;
    writeln!(out)?;
    Ok(())
}

/// One ensemble summary placed on the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub n: usize,
    pub mean: f64,
    pub std: f64,
    pub skew: f64,
    pub kurt: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub metric1: f64,
    pub metric2: f64,
    pub region: Region,
}

pub fn trajectory_rows(trajectory: &Trajectory) -> Vec<TrajectoryRow> {
    trajectory
        .points
        .iter()
        .filter_map(|p| {
            let s = p.summary;
            let q = to_pearson(&s).ok()?;
            Some(TrajectoryRow {
                t: p.t,
                n: s.n,
                mean: s.mean,
                std: s.std,
                skew: s.skewness,
                kurt: s.kurtosis,
                beta1: q.beta1,
                beta2: q.beta2,
                metric1: metric1(q),
                metric2: metric2(q),
                region: classify_region(q, DEFAULT_REGION_TOL).region,
            })
        })
        .collect()
}

/// Accumulated and window metrics side by side, joined on timestamp.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PanelRow {
    pub t: f64,
    pub accumulated_metric1: Option<f64>,
    pub accumulated_metric2: Option<f64>,
    pub window_metric1: Option<f64>,
    pub window_metric2: Option<f64>,
}

pub fn panel_rows(accumulated: &MetricSeries, window: &MetricSeries) -> Vec<PanelRow> {
    let (a, w) = (&accumulated.entries, &window.entries);
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::with_capacity(a.len().max(w.len()));
    while i < a.len() || j < w.len() {
        let ta = a.get(i).map_or(f64::INFINITY, |e| e.t);
        let tw = w.get(j).map_or(f64::INFINITY, |e| e.t);
        let t = ta.min(tw);
        let mut row = PanelRow {
            t,
            accumulated_metric1: None,
            accumulated_metric2: None,
            window_metric1: None,
            window_metric2: None,
        };
        if ta == t {
            row.accumulated_metric1 = Some(a[i].metric1);
            row.accumulated_metric2 = Some(a[i].metric2);
            i += 1;
        }
        if tw == t {
            row.window_metric1 = Some(w[j].metric1);
            row.window_metric2 = Some(w[j].metric2);
            j += 1;
        }
        out.push(row);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopeRow {
    pub mode: &'static str,
    pub segment: &'static str,
    pub t0: f64,
    pub t1: f64,
    pub n: usize,
    pub slope: f64,
    pub intercept: f64,
    pub residual_std: f64,
}

impl SlopeRow {
    pub fn new(mode: &'static str, segment: &'static str, s: SlopeEstimate) -> Self {
        Self {
            mode,
            segment,
            t0: s.t0,
            t1: s.t1,
            n: s.n,
            slope: s.slope,
            intercept: s.intercept,
            residual_std: s.residual_std,
        }
    }
}

pub fn slope_rows(mode: &'static str, slopes: &PhaseSlopes) -> Vec<SlopeRow> {
    [
        ("accommodation", slopes.accommodation),
        ("recovery", slopes.recovery),
    ]
    .into_iter()
    .filter_map(|(segment, s)| s.map(|s| SlopeRow::new(mode, segment, s)))
    .collect()
}

/// Landmarks as points and boundary lines as two-point segments, all in one
/// flat table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LandmarkRow {
    pub kind: &'static str,
    pub name: String,
    pub beta1: f64,
    pub beta2: f64,
}

pub fn landmark_rows(set: &LandmarkSet, beta1_max: f64) -> Vec<LandmarkRow> {
    let mut rows: Vec<LandmarkRow> = set
        .landmarks
        .iter()
        .map(|l| LandmarkRow {
            kind: "landmark",
            name: serde_json::to_value(l.name)
                .ok()
                .and_then(|v| v.as_str().map(str::to_string))
                .unwrap_or_default(),
            beta1: l.point.beta1,
            beta2: l.point.beta2,
        })
        .collect();
    for b in &set.boundaries {
        for x in [0.0, beta1_max] {
            rows.push(LandmarkRow {
                kind: "boundary",
                name: b.name.to_string(),
                beta1: x,
                beta2: b.at(x),
            });
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::load_metrics::MetricEntry;
    use crate::pearson::landmarks;

    #[test]
    fn csv_has_provenance_header() {
        let prov = Provenance::new(
            Some(7),
            vec!["synth".into(), "--out".into(), "x.csv".into()],
        );
        let mut buf = Vec::new();
        write_table(
            &mut buf,
            Format::Csv,
            &prov,
            "rows",
            &[LandmarkRow {
                kind: "landmark",
                name: "normal".into(),
                beta1: 0.0,
                beta2: 3.0,
            }],
        )
        .unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# hrload "));
        assert_eq!(lines[1], "# seed: 7");
        assert_eq!(lines[2], "# flags: synth --out x.csv");
        assert_eq!(lines[3], "kind,name,beta1,beta2");
        assert_eq!(lines[4], "landmark,normal,0.0,3.0");
    }

    #[test]
    fn json_embeds_provenance() {
        let prov = Provenance::new(None, vec![]);
        let mut buf = Vec::new();
        write_table(
            &mut buf,
            Format::Json,
            &prov,
            "landmarks",
            &landmark_rows(&landmarks(), 4.0),
        )
        .unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["provenance"]["tool"], "hrload");
        assert!(v["provenance"]["seed"].is_null());
        assert_eq!(v["landmarks"].as_array().unwrap().len(), 8);
        assert_eq!(v["landmarks"][3]["name"], "logistic");
        assert_eq!(v["landmarks"][7]["beta2"], 9.0);
    }

    #[test]
    fn panels_join_on_time() {
        let e = |t| MetricEntry {
            t,
            metric1: t,
            metric2: -t,
            beta1: 0.0,
            beta2: 3.0,
        };
        let a = MetricSeries {
            entries: vec![e(1.0), e(2.0), e(3.0)],
        };
        let w = MetricSeries {
            entries: vec![e(2.0), e(3.0), e(4.0)],
        };
        let rows = panel_rows(&a, &w);
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[0].window_metric1, None);
        assert_eq!(rows[1].accumulated_metric1, Some(2.0));
        assert_eq!(rows[1].window_metric2, Some(-2.0));
        assert_eq!(rows[3].accumulated_metric1, None);
    }
}
