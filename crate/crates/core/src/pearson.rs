//! The Pearson plane: squared skewness on the horizontal axis, kurtosis on the
//! vertical one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moments::{MomentSummary, MIN_SAMPLES};

/// Slack on the `beta2 >= beta1 + 1` bound for floating-point error.
pub const FEASIBILITY_SLACK: f64 = 1e-9;
/// Default radius of the `near_*` landmark labels.
pub const DEFAULT_REGION_TOL: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PearsonPoint {
    /// Squared skewness.
    pub beta1: f64,
    /// Non-excess kurtosis.
    pub beta2: f64,
}

impl PearsonPoint {
    pub const fn new(beta1: f64, beta2: f64) -> Self {
        Self { beta1, beta2 }
    }

    pub fn is_feasible(&self) -> bool {
        self.beta1 >= 0.0 && self.beta2 >= self.beta1 + 1.0 - FEASIBILITY_SLACK
    }
}

pub const NORMAL: PearsonPoint = PearsonPoint::new(0.0, 3.0);
pub const UNIFORM: PearsonPoint = PearsonPoint::new(0.0, 1.8);
pub const EXPONENTIAL: PearsonPoint = PearsonPoint::new(4.0, 9.0);
pub const LOGISTIC: PearsonPoint = PearsonPoint::new(0.0, 4.2);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LandmarkName {
    Normal,
    Uniform,
    Exponential,
    Logistic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Landmark {
    pub name: LandmarkName,
    pub point: PearsonPoint,
}

/// A boundary `beta2 = intercept + slope * beta1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryLine {
    pub name: &'static str,
    pub intercept: f64,
    pub slope: f64,
}

impl BoundaryLine {
    pub fn at(&self, beta1: f64) -> f64 {
        self.intercept + self.slope * beta1
    }
}

/// Lower edge of the feasible plane and of the beta region.
pub const LOWER_BOUND: BoundaryLine = BoundaryLine {
    name: "feasibility_limit",
    intercept: 1.0,
    slope: 1.0,
};
/// Gamma-distribution line, upper edge of the beta region.
pub const GAMMA_LINE: BoundaryLine = BoundaryLine {
    name: "gamma_line",
    intercept: 3.0,
    slope: 1.5,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LandmarkSet {
    pub landmarks: Vec<Landmark>,
    pub boundaries: Vec<BoundaryLine>,
}

pub fn landmarks() -> LandmarkSet {
    use LandmarkName::*;
    LandmarkSet {
        landmarks: vec![
            Landmark {
                name: Normal,
                point: NORMAL,
            },
            Landmark {
                name: Uniform,
                point: UNIFORM,
            },
            Landmark {
                name: Exponential,
                point: EXPONENTIAL,
            },
            Landmark {
                name: Logistic,
                point: LOGISTIC,
            },
        ],
        boundaries: vec![LOWER_BOUND, GAMMA_LINE],
    }
}

pub fn to_pearson(summary: &MomentSummary) -> Result<PearsonPoint> {
    if summary.n < MIN_SAMPLES {
        return Err(Error::InsufficientData {
            needed: MIN_SAMPLES,
            got: summary.n,
        });
    }
    if !(summary.std > 0.0) || !summary.skewness.is_finite() || !summary.kurtosis.is_finite() {
        return Err(Error::Degenerate);
    }
    Ok(PearsonPoint::new(
        summary.skewness * summary.skewness,
        summary.kurtosis,
    ))
}

/// Axis weights for distances on the plane. Identity by default.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneScale {
    pub beta1: f64,
    pub beta2: f64,
}

impl Default for PlaneScale {
    fn default() -> Self {
        Self {
            beta1: 1.0,
            beta2: 1.0,
        }
    }
}

impl PlaneScale {
    pub fn distance(&self, a: PearsonPoint, b: PearsonPoint) -> f64 {
        (self.beta1 * (a.beta1 - b.beta1)).hypot(self.beta2 * (a.beta2 - b.beta2))
    }
}

/// Distance to the normal landmark.
pub fn metric1(p: PearsonPoint) -> f64 {
    PlaneScale::default().distance(p, NORMAL)
}

/// Distance to the uniform landmark.
pub fn metric2(p: PearsonPoint) -> f64 {
    PlaneScale::default().distance(p, UNIFORM)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    Infeasible,
    NearNormal,
    NearUniform,
    BetaRegion,
    Other,
}

impl Region {
    pub fn as_str(self) -> &'static str {
        match self {
            Region::Infeasible => "infeasible",
            Region::NearNormal => "near_normal",
            Region::NearUniform => "near_uniform",
            Region::BetaRegion => "beta_region",
            Region::Other => "other",
        }
    }
}

impl std::fmt::Display for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionLabel {
    pub region: Region,
    pub tol: f64,
}

/// Labels a point. Precedence: infeasible, near_normal, near_uniform,
/// beta_region, other. Both beta-region edges are inclusive.
pub fn classify_region(p: PearsonPoint, tol: f64) -> RegionLabel {
    let region = if !p.is_feasible() {
        Region::Infeasible
    } else if metric1(p) <= tol {
        Region::NearNormal
    } else if metric2(p) <= tol {
        Region::NearUniform
    } else if p.beta2 >= LOWER_BOUND.at(p.beta1) && p.beta2 <= GAMMA_LINE.at(p.beta1) {
        Region::BetaRegion
    } else {
        Region::Other
    };
    RegionLabel { region, tol }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::batch_moments;
    use proptest::prelude::*;

    fn summary(skewness: f64, kurtosis: f64) -> MomentSummary {
        MomentSummary {
            n: 10,
            mean: 0.0,
            std: 1.0,
            skewness,
            kurtosis,
        }
    }

    #[test]
    fn projection() {
        assert_eq!(to_pearson(&summary(0.0, 3.0)).unwrap(), NORMAL);
        assert_eq!(
            to_pearson(&summary(-0.5, 2.5)).unwrap(),
            PearsonPoint::new(0.25, 2.5)
        );
        let s = batch_moments(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        let p = to_pearson(&s).unwrap();
        assert_eq!(p.beta1, 0.0);
        assert!((p.beta2 - 1.7).abs() < 1e-15);
        let flat = MomentSummary {
            std: 0.0,
            ..summary(0.0, 3.0)
        };
        assert!(matches!(to_pearson(&flat), Err(Error::Degenerate)));
    }

    #[test]
    fn metrics() {
        assert_eq!(metric1(NORMAL), 0.0);
        assert!((metric1(PearsonPoint::new(0.0, 1.7)) - 1.3).abs() < 1e-12);
        assert!((metric1(PearsonPoint::new(3.0, 4.0)) - 10f64.sqrt()).abs() < 1e-12);
        assert_eq!(metric2(UNIFORM), 0.0);
        assert!((metric2(PearsonPoint::new(0.0, 1.7)) - 0.1).abs() < 1e-12);
        assert!((metric2(NORMAL) - 1.2).abs() < 1e-12);
    }

    #[test]
    fn anisotropic_scale() {
        let s = PlaneScale {
            beta1: 2.0,
            beta2: 1.0,
        };
        assert!((s.distance(PearsonPoint::new(1.0, 3.0), NORMAL) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn regions() {
        let label = |b1, b2| classify_region(PearsonPoint::new(b1, b2), DEFAULT_REGION_TOL).region;
        assert_eq!(label(1.0, 1.5), Region::Infeasible);
        // symmetric beta with both shapes 2: excess kurtosis -6/7
        assert_eq!(label(0.0, 3.0 - 6.0 / 7.0), Region::BetaRegion);
        assert_eq!(label(4.0, 9.0), Region::BetaRegion);
        assert_eq!(label(0.0, 3.05), Region::NearNormal);
        assert_eq!(label(0.0, 1.75), Region::NearUniform);
        assert_eq!(label(0.0, 4.2), Region::Other);
        assert_eq!(label(1.0, 2.0), Region::BetaRegion);
        // exactly on the lower bound, still feasible
        assert_eq!(label(2.0, 3.0), Region::BetaRegion);
    }

    #[test]
    fn landmark_set() {
        let set = landmarks();
        let find = |n| set.landmarks.iter().find(|l| l.name == n).unwrap().point;
        assert_eq!(find(LandmarkName::Normal), NORMAL);
        assert_eq!(
            find(LandmarkName::Uniform),
            PearsonPoint::new(0.0, 9.0 / 5.0)
        );
        assert_eq!(find(LandmarkName::Exponential), PearsonPoint::new(4.0, 9.0));
        assert_eq!(find(LandmarkName::Logistic), LOGISTIC);
        assert_eq!(GAMMA_LINE.at(4.0), 9.0);
        assert_eq!(set.boundaries.len(), 2);
    }

    proptest! {
        #[test]
        fn metrics_are_point_to_landmark_distances(b1 in 0.0f64..20.0, b2 in 0.0f64..30.0) {
            let p = PearsonPoint::new(b1, b2);
            prop_assert!(metric1(p) >= 0.0 && metric2(p) >= 0.0);
            // triangle inequality through the two landmarks
            prop_assert!(metric1(p) <= metric2(p) + 1.2 + 1e-12);
            prop_assert!(metric2(p) <= metric1(p) + 1.2 + 1e-12);
        }

        #[test]
        fn classification_is_total_and_ordered(b1 in 0.0f64..20.0, b2 in 0.0f64..30.0, tol in 0.0f64..0.5) {
            let p = PearsonPoint::new(b1, b2);
            let label = classify_region(p, tol);
            prop_assert_eq!(label, classify_region(p, tol));
            if !p.is_feasible() {
                prop_assert_eq!(label.region, Region::Infeasible);
            } else if metric1(p) <= tol {
                prop_assert_eq!(label.region, Region::NearNormal);
            }
        }

        #[test]
        fn affine_invariance(
            values in prop::collection::vec(250.0f64..3000.0, 8..200),
            a in prop_oneof![-5.0f64..-0.1, 0.1f64..5.0],
            b in -1000.0f64..1000.0,
        ) {
            let x = batch_moments(&values).map(|s| to_pearson(&s));
            let y = batch_moments(&values.iter().map(|v| a * v + b).collect::<Vec<_>>()).map(|s| to_pearson(&s));
            if let (Ok(Ok(x)), Ok(Ok(y))) = (x, y) {
                prop_assert!((x.beta1 - y.beta1).abs() <= 1e-9 * x.beta1.max(1.0));
                prop_assert!((x.beta2 - y.beta2).abs() <= 1e-9 * x.beta2.max(1.0));
            }
        }
    }
}
