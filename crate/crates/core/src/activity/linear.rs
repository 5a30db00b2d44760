//! Multiple linear regression with intercept, solved by Householder QR.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Column `j` is rank deficient when its diagonal of R falls below this
/// fraction of its original norm.
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    pub fitted: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Diagonal of the hat matrix.
    pub leverage: Vec<f64>,
    /// `sqrt(SSR / (n - p))`, with `p` counting the intercept.
    pub residual_std: f64,
}

impl LinearModel {
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.coefficients.len() {
            return Err(Error::DimensionMismatch {
                expected: self.coefficients.len(),
                got: x.len(),
            });
        }
        Ok(self.intercept
            + x.iter()
                .zip(&self.coefficients)
                .map(|(a, b)| a * b)
                .sum::<f64>())
    }

    pub fn sse(&self) -> f64 {
        self.residuals.iter().map(|r| r * r).sum()
    }
}

/// Thin QR of a column-major `n x p` matrix.
struct Qr {
    n: usize,
    p: usize,
    /// Householder vectors below the diagonal, R on and above it.
    a: Vec<f64>,
    /// Leading entries of the Householder vectors.
    v0: Vec<f64>,
    /// `2 / (v^T v)` per reflector.
    beta: Vec<f64>,
}

impl Qr {
    fn factor(mut a: Vec<f64>, n: usize, p: usize) -> Result<Self> {
        let col_norms: Vec<f64> = (0..p)
            .map(|j| {
                a[j * n..(j + 1) * n]
                    .iter()
                    .map(|v| v * v)
                    .sum::<f64>()
                    .sqrt()
            })
            .collect();
        let mut v0 = vec![0.0; p];
        let mut beta = vec![0.0; p];
        for k in 0..p {
            let col = &mut a[k * n..(k + 1) * n];
            let norm = col[k..].iter().map(|v| v * v).sum::<f64>().sqrt();
            if !(norm > RANK_TOL * col_norms[k]) || col_norms[k] == 0.0 {
                return Err(Error::RankDeficient { column: k });
            }
            let alpha = if col[k] >= 0.0 { -norm } else { norm };
            let lead = col[k] - alpha;
            let vtv = lead * lead + col[k + 1..].iter().map(|v| v * v).sum::<f64>();
            v0[k] = lead;
            beta[k] = 2.0 / vtv;
            col[k] = alpha;
            // apply reflector to the remaining columns
            for j in k + 1..p {
                let (left, right) = a.split_at_mut(j * n);
                let vk = &left[k * n..(k + 1) * n];
                let cj = &mut right[..n];
                let dot = lead * cj[k] + (k + 1..n).map(|i| vk[i] * cj[i]).sum::<f64>();
                let s = beta[k] * dot;
                cj[k] -= s * lead;
                for i in k + 1..n {
                    cj[i] -= s * vk[i];
                }
            }
            let r_kk = a[k * n + k].abs();
            if !(r_kk > RANK_TOL * col_norms[k]) {
                return Err(Error::RankDeficient { column: k });
            }
        }
        Ok(Self { n, p, a, v0, beta })
    }

    fn reflect(&self, k: usize, x: &mut [f64]) {
        let v = &self.a[k * self.n..(k + 1) * self.n];
        let dot = self.v0[k] * x[k] + (k + 1..self.n).map(|i| v[i] * x[i]).sum::<f64>();
        let s = self.beta[k] * dot;
        x[k] -= s * self.v0[k];
        for i in k + 1..self.n {
            x[i] -= s * v[i];
        }
    }

    /// `Q^T y`.
    fn qt(&self, y: &mut [f64]) {
        for k in 0..self.p {
            self.reflect(k, y);
        }
    }

    /// Column `j` of the thin Q.
    fn q_column(&self, j: usize) -> Vec<f64> {
        let mut e = vec![0.0; self.n];
        e[j] = 1.0;
        for k in (0..self.p).rev() {
            self.reflect(k, &mut e);
        }
        e
    }

    fn solve_upper(&self, rhs: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.p];
        for i in (0..self.p).rev() {
            let s = (i + 1..self.p).fold(rhs[i], |s, j| s - self.a[j * self.n + i] * x[j]);
            x[i] = s / self.a[i * self.n + i];
        }
        x
    }
}

/// Least squares of `y` on `rows` plus an intercept column.
pub fn fit_linear(rows: &[Vec<f64>], y: &[f64]) -> Result<LinearModel> {
    let n = rows.len();
    if y.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: y.len(),
        });
    }
    let k = rows.first().map_or(0, Vec::len);
    if let Some(bad) = rows.iter().find(|r| r.len() != k) {
        return Err(Error::DimensionMismatch {
            expected: k,
            got: bad.len(),
        });
    }
    let p = k + 1;
    if n <= p {
        return Err(Error::InsufficientData {
            needed: p + 1,
            got: n,
        });
    }
    if rows.iter().flatten().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::InvalidConfig(
            "design or response contains non-finite values".into(),
        ));
    }

    let mut a = vec![1.0; n * p];
    for (i, r) in rows.iter().enumerate() {
        for (j, &v) in r.iter().enumerate() {
            a[(j + 1) * n + i] = v;
        }
    }
    let qr = Qr::factor(a, n, p).map_err(|e| match e {
        // report feature columns; the intercept is column 0 of the design
        Error::RankDeficient { column } => Error::RankDeficient {
            column: column.saturating_sub(1),
        },
        other => other,
    })?;

    let mut qty = y.to_vec();
    qr.qt(&mut qty);
    let beta = qr.solve_upper(&qty[..p]);

    let fitted: Vec<f64> = rows
        .iter()
        .map(|r| beta[0] + r.iter().zip(&beta[1..]).map(|(a, b)| a * b).sum::<f64>())
        .collect();
    let residuals: Vec<f64> = y.iter().zip(&fitted).map(|(y, f)| y - f).collect();
    let mut leverage = vec![0.0; n];
    for j in 0..p {
        for (h, q) in leverage.iter_mut().zip(qr.q_column(j)) {
            *h += q * q;
        }
    }
    let ssr: f64 = residuals.iter().map(|r| r * r).sum();
    Ok(LinearModel {
        intercept: beta[0],
        coefficients: beta[1..].to_vec(),
        fitted,
        residuals,
        leverage,
        residual_std: (ssr / (n - p) as f64).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiagnosticPoint {
    pub fitted: f64,
    /// Residual over `s * sqrt(1 - h_ii)`.
    pub standardized: f64,
    pub sqrt_abs_standardized: f64,
}

/// Scale-location series: fitted value against internally studentized
/// residual. A perfect fit has no residual scale and is rejected.
pub fn residual_diagnostics(model: &LinearModel) -> Result<Vec<DiagnosticPoint>> {
    let scale = model.fitted.iter().map(|f| f.abs()).fold(1.0, f64::max);
    if !(model.residual_std > 1e-12 * scale) {
        return Err(Error::PerfectFit);
    }
    Ok(model
        .fitted
        .iter()
        .zip(&model.residuals)
        .zip(&model.leverage)
        .map(|((&fitted, &r), &h)| {
            let denom = model.residual_std * (1.0 - h).max(0.0).sqrt();
            let standardized = if denom > 0.0 { r / denom } else { 0.0 };
            DiagnosticPoint {
                fitted,
                standardized,
                sqrt_abs_standardized: standardized.abs().sqrt(),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_line() {
        let rows = vec![vec![1.0], vec![2.0], vec![3.0]];
        let m = fit_linear(&rows, &[2.0, 4.0, 6.0]).unwrap();
        assert!((m.coefficients[0] - 2.0).abs() < 1e-12);
        assert!(m.intercept.abs() < 1e-12);
        assert!(m.residuals.iter().all(|r| r.abs() < 1e-12));
        assert!(matches!(residual_diagnostics(&m), Err(Error::PerfectFit)));
    }

    #[test]
    fn duplicated_column_is_rank_deficient() {
        let rows: Vec<Vec<f64>> = (0..6)
            .map(|i| vec![i as f64, (i * i) as f64, i as f64])
            .collect();
        let y: Vec<f64> = (0..6).map(|i| i as f64 * 0.5 + 1.0).collect();
        assert!(matches!(
            fit_linear(&rows, &y),
            Err(Error::RankDeficient { column: 2 })
        ));
        let constant: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64, 4.0]).collect();
        assert!(matches!(
            fit_linear(&constant, &y),
            Err(Error::RankDeficient { column: 1 })
        ));
    }

    #[test]
    fn too_few_rows() {
        let rows = vec![vec![1.0, 2.0], vec![2.0, 1.0], vec![3.0, 5.0]];
        assert!(matches!(
            fit_linear(&rows, &[1.0, 2.0, 3.0]),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn leverage_sums_to_parameter_count() {
        let rows: Vec<Vec<f64>> = (0..10)
            .map(|i| vec![i as f64, ((i * 7) % 5) as f64])
            .collect();
        let y: Vec<f64> = (0..10).map(|i| ((i * 3) % 7) as f64).collect();
        let m = fit_linear(&rows, &y).unwrap();
        assert!((m.leverage.iter().sum::<f64>() - 3.0).abs() < 1e-12);
        assert!(m.leverage.iter().all(|&h| (0.0..=1.0 + 1e-12).contains(&h)));
    }

    #[test]
    fn standardized_residuals_center_with_constant_leverage() {
        // +-1 design: every row has the same leverage, so studentizing is a
        // common rescaling and keeps the zero mean of OLS residuals.
        let rows: Vec<Vec<f64>> = (0..8)
            .map(|i| vec![if i % 2 == 0 { 1.0 } else { -1.0 }])
            .collect();
        let y = [1.0, 0.2, 1.9, -0.5, 0.7, 0.1, 1.4, -0.3];
        let m = fit_linear(&rows, &y).unwrap();
        let diag = residual_diagnostics(&m).unwrap();
        let mean = diag.iter().map(|d| d.standardized).sum::<f64>() / diag.len() as f64;
        assert!(mean.abs() < 1e-8);
        assert!(m.residuals.iter().sum::<f64>().abs() < 1e-12);
        assert!(diag.iter().all(|d| d.sqrt_abs_standardized >= 0.0));
    }

    fn design() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<f64>)> {
        (6usize..30, 1usize..5).prop_flat_map(|(n, k)| {
            (
                prop::collection::vec(prop::collection::vec(-10.0f64..10.0, k), n),
                prop::collection::vec(-10.0f64..10.0, n),
            )
        })
    }

    proptest! {
        #[test]
        fn residuals_are_orthogonal_to_columns((rows, y) in design()) {
            prop_assume!(rows.len() > rows[0].len() + 2);
            if let Ok(m) = fit_linear(&rows, &y) {
                let scale = y.iter().map(|v| v.abs()).fold(1.0, f64::max);
                prop_assert!(m.residuals.iter().sum::<f64>().abs() <= 1e-8 * scale);
                for j in 0..rows[0].len() {
                    let dot: f64 = rows.iter().zip(&m.residuals).map(|(r, e)| r[j] * e).sum();
                    prop_assert!(dot.abs() <= 1e-8 * scale * 10.0);
                }
                if let Ok(diag) = residual_diagnostics(&m) {
                    prop_assert!(diag.iter().all(|d| d.sqrt_abs_standardized >= 0.0));
                }
            }
        }

        #[test]
        fn predictions_survive_column_rescaling(
            (rows, y) in design(),
            col in 0usize..4,
            a in prop_oneof![-50.0f64..-0.1, 0.1f64..50.0],
            b in -100.0f64..100.0,
        ) {
            let k = rows[0].len();
            prop_assume!(rows.len() > k + 2);
            let col = col % k;
            let scaled: Vec<Vec<f64>> = rows.iter().map(|r| {
                let mut r = r.clone();
                r[col] = a * r[col] + b;
                r
            }).collect();
            if let (Ok(m1), Ok(m2)) = (fit_linear(&rows, &y), fit_linear(&scaled, &y)) {
                for (f1, f2) in m1.fitted.iter().zip(&m2.fitted) {
                    prop_assert!((f1 - f2).abs() <= 1e-8 * f1.abs().max(1.0));
                }
            }
        }
    }
}
