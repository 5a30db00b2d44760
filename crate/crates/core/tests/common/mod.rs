//! Independent reference implementations shared by the integration suites.
#![allow(dead_code)]

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Unevaluated sum `hi + lo` carrying about 106 bits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };
    const LN2: Dd = Dd {
        hi: std::f64::consts::LN_2,
        lo: 2.319_046_813_846_299_6e-17,
    };

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    /// Exact scaling by a power of two.
    fn ldexp(self, k: i32) -> Dd {
        let s = 2f64.powi(k);
        Dd {
            hi: self.hi * s,
            lo: self.lo * s,
        }
    }

    pub fn exp(self) -> Dd {
        if self.hi > 700.0 {
            return Dd {
                hi: f64::INFINITY,
                lo: 0.0,
            };
        }
        if self.hi < -700.0 {
            return Dd::ZERO;
        }
        let k = (self.hi / std::f64::consts::LN_2).round();
        let r = (self - Dd::LN2 * Dd::from(k)).ldexp(-10);
        let mut s = Dd::ONE;
        for i in (1..=22).rev() {
            s = Dd::ONE + r * s / Dd::from(i as f64);
        }
        for _ in 0..10 {
            s = s * s;
        }
        s.ldexp(k as i32)
    }

    pub fn logistic(self) -> Dd {
        Dd::ONE / (Dd::ONE + (-self).exp())
    }
}

impl From<f64> for Dd {
    fn from(v: f64) -> Self {
        Dd { hi: v, lo: 0.0 }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, b: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, b: Dd) -> Dd {
        let p = self.hi * b.hi;
        let e = self.hi.mul_add(b.hi, -p) + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let r = self - b * Dd::from(q1);
        let q2 = r.hi / b.hi;
        let r = r - b * Dd::from(q2);
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::from(q3)
    }
}

/// Batch SSE of a logistic network evaluated in double-double. `params`
/// follows the crate's layout: per layer, row-major weights then biases.
pub fn network_sse_dd(sizes: &[usize], params: &[Dd], xs: &[Vec<f64>], ys: &[f64]) -> Dd {
    let mut total = Dd::ZERO;
    for (x, &y) in xs.iter().zip(ys) {
        let mut act: Vec<Dd> = x.iter().map(|&v| Dd::from(v)).collect();
        let mut at = 0;
        for (l, w) in sizes.windows(2).enumerate() {
            let (nin, nout) = (w[0], w[1]);
            let weights = &params[at..at + nin * nout];
            let biases = &params[at + nin * nout..at + nin * nout + nout];
            at += nin * nout + nout;
            let hidden = l + 2 < sizes.len();
            act = (0..nout)
                .map(|o| {
                    let mut z = biases[o];
                    for k in 0..nin {
                        z = z + weights[o * nin + k] * act[k];
                    }
                    if hidden {
                        z.logistic()
                    } else {
                        z
                    }
                })
                .collect();
        }
        let r = act[0] - Dd::from(y);
        total = total + r * r;
    }
    total
}

/// Central difference of the batch SSE with step `h`, free of f64 roundoff.
pub fn finite_difference_gradient(
    sizes: &[usize],
    params: &[f64],
    xs: &[Vec<f64>],
    ys: &[f64],
    h: f64,
) -> Vec<f64> {
    let base: Vec<Dd> = params.iter().map(|&p| Dd::from(p)).collect();
    (0..params.len())
        .map(|k| {
            let mut up = base.clone();
            up[k] = up[k] + Dd::from(h);
            let mut down = base.clone();
            down[k] = down[k] - Dd::from(h);
            let diff = network_sse_dd(sizes, &up, xs, ys) - network_sse_dd(sizes, &down, xs, ys);
            (diff / Dd::from(2.0 * h)).to_f64()
        })
        .collect()
}

/// Worst relative disagreement over components whose larger magnitude is at
/// least `floor`.
pub fn max_relative_error(a: &[f64], b: &[f64], floor: f64) -> f64 {
    a.iter()
        .zip(b)
        .filter_map(|(x, y)| {
            let scale = x.abs().max(y.abs());
            (scale >= floor).then(|| (x - y).abs() / scale)
        })
        .fold(0.0, f64::max)
}

/// Moments by a plain two-pass sum in double-double. Returns
/// `(mean, population std, skewness, non-excess kurtosis)`.
pub fn two_pass_moments(xs: &[f64]) -> (f64, f64, f64, f64) {
    let n = Dd::from(xs.len() as f64);
    let mean = xs.iter().fold(Dd::ZERO, |s, &x| s + Dd::from(x)) / n;
    let (mut m2, mut m3, mut m4) = (Dd::ZERO, Dd::ZERO, Dd::ZERO);
    for &x in xs {
        let d = Dd::from(x) - mean;
        let d2 = d * d;
        m2 = m2 + d2;
        m3 = m3 + d2 * d;
        m4 = m4 + d2 * d2;
    }
    let (m2, m3, m4) = ((m2 / n).to_f64(), (m3 / n).to_f64(), (m4 / n).to_f64());
    (mean.to_f64(), m2.sqrt(), m3 / m2.powf(1.5), m4 / (m2 * m2))
}

/// Least squares with intercept via the normal equations, solved by
/// Gaussian elimination with partial pivoting. Returns `[b0, b1, ...]`.
pub fn normal_equations(rows: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let p = rows[0].len() + 1;
    let design: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| std::iter::once(1.0).chain(r.iter().copied()).collect())
        .collect();
    let mut a = vec![vec![0.0; p + 1]; p];
    for (r, &yi) in design.iter().zip(y) {
        for i in 0..p {
            for j in 0..p {
                a[i][j] += r[i] * r[j];
            }
            a[i][p] += r[i] * yi;
        }
    }
    for c in 0..p {
        let piv = (c..p)
            .max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))
            .unwrap();
        a.swap(c, piv);
        let pivot = a[c].clone();
        for row in &mut a[c + 1..] {
            let f = row[c] / pivot[c];
            for (v, pv) in row[c..].iter_mut().zip(&pivot[c..]) {
                *v -= f * pv;
            }
        }
    }
    let mut x = vec![0.0; p];
    for i in (0..p).rev() {
        let s: f64 = (i + 1..p).map(|j| a[i][j] * x[j]).sum();
        x[i] = (a[i][p] - s) / a[i][i];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn double_double_exp_matches_reference() {
        // (x, hi, lo) of exp(x) from a 50-digit evaluation
        let cases = [
            (0.3, 1.3498588075760032, -9.447314673432387e-17),
            (-1.7, 0.18268352405273466, -5.430659906894856e-18),
            (2.5, 12.182493960703473, 2.0334002173348147e-16),
            (4.2, 66.68633104092515, -4.65883890440634e-16),
            (-9.25, 9.61116520613947e-05, -1.1725117390794669e-21),
        ];
        for (x, hi, lo) in cases {
            let got = Dd::from(x).exp();
            let err = (got - Dd { hi, lo }).to_f64().abs() / hi;
            assert!(err < 1e-28, "exp({x}): relative error {err:e}");
        }
        let third = Dd::ONE / Dd::from(3.0);
        assert!((third * Dd::from(3.0) - Dd::ONE).to_f64().abs() < 1e-31);
    }
}
