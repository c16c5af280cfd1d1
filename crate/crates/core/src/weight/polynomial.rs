//! The polynomial weight `w = (|x|² − r²)^k` and the radius above which
//! `(Δ+λ₁)(Δ+λ₂)w` is positive on `B_r`.
//!
//! Direct differentiation gives
//! `Δw = 2k(|x|²−r²)^{k−2}(2(k−1)|x|² + d(|x|²−r²))`; note the factor 2 on
//! the `(k−1)|x|²` term, which is easy to drop by hand.

use serde::{Deserialize, Serialize};

use super::{grid_minimum, RadialExpansion};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolynomialWeight {
    pub k: usize,
    pub r: f64,
    pub d: usize,
    pub w: RadialExpansion,
    pub laplacian: RadialExpansion,
    pub bilaplacian: RadialExpansion,
    /// Set when `k` is odd or at most 4.
    pub warning: Option<String>,
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

pub fn polynomial_weight(k: usize, r: f64, d: usize) -> Result<PolynomialWeight> {
    if k == 0 || d == 0 {
        return Err(Error::InvalidParameter("k and d must be at least 1".into()));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidParameter(format!("radius {r} must be positive")));
    }
    let warning = (k % 2 == 1 || k <= 4).then(|| format!("k = {k} is not an even integer above 4"));
    let r2 = r * r;
    let w = RadialExpansion::new(
        d,
        (0..=k).map(|i| (binomial(k, i) * (-r2).powi((k - i) as i32), 2.0 * i as f64)),
    );
    let laplacian = w.laplacian();
    let bilaplacian = laplacian.laplacian();
    Ok(PolynomialWeight { k, r, d, w, laplacian, bilaplacian, warning })
}

impl PolynomialWeight {
    /// Closed form of `Δw`.
    pub fn laplacian_closed_form(&self, rho: f64) -> f64 {
        let (k, d) = (self.k as f64, self.d as f64);
        let u = rho * rho - self.r * self.r;
        let base = if self.k >= 2 { u.powi(self.k as i32 - 2) } else { 1.0 / u };
        2.0 * k * base * (2.0 * (k - 1.0) * rho * rho + d * u)
    }

    /// Largest `|∂_ρ^j w(r)|` over `j < k`, relative to the term magnitudes.
    pub fn boundary_residual(&self) -> f64 {
        (0..self.k)
            .map(|j| {
                let e = self.w.derivative(j);
                e.at(self.r).abs() / e.abs_at(self.r).max(f64::MIN_POSITIVE)
            })
            .fold(0.0, f64::max)
    }
}

/// Polynomial in `u = s² − 1`, ascending powers.
type Poly = Vec<f64>;

/// `ΔP` for `P(s² − 1)` in `ℝ^d`: `4(u+1)P'' + 2dP'`.
fn laplacian_u(p: &Poly, d: usize) -> Poly {
    let n = p.len();
    let mut out = vec![0.0; n];
    for (i, &c) in p.iter().enumerate() {
        if i >= 1 {
            out[i - 1] += 2.0 * d as f64 * i as f64 * c;
        }
        if i >= 2 {
            let second = (i * (i - 1)) as f64 * c;
            out[i - 1] += 4.0 * second;
            out[i - 2] += 4.0 * second;
        }
    }
    out
}

/// `(Δ+a)(Δ+b)u^k / u^{k−4}` as a polynomial in `u`.
fn reduced_operator(k: usize, d: usize, a: f64, b: f64) -> Poly {
    let mut p = vec![0.0; k + 1];
    p[k] = 1.0;
    for shift in [a, b] {
        let mut q = laplacian_u(&p, d);
        for (x, y) in q.iter_mut().zip(&p) {
            *x += shift * y;
        }
        p = q;
    }
    p.split_off(k.saturating_sub(4))
}

fn eval(p: &[f64], u: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, &c| acc * u + c)
}

/// `min_{B_r} (Δ+λ₁)(Δ+λ₂)w / r^{2k−4}`, up to the nonnegative factor
/// `(|x|²/r² − 1)^{k−4}`; positive exactly when the operator is positive on `B_r`.
fn reduced_minimum(k: usize, d: usize, lambda1: f64, lambda2: f64, r: f64) -> f64 {
    let g = reduced_operator(k, d, lambda1 * r * r, lambda2 * r * r);
    grid_minimum(|u| eval(&g, u), -1.0, 0.0, 1024).0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub k: usize,
    pub d: usize,
    pub lambda1: f64,
    pub lambda2: f64,
    pub r_min: f64,
    pub r_star: f64,
    pub ratio: f64,
}

/// Smallest `r` with `(Δ+λ₁)(Δ+λ₂)(|x|²−r²)^k > 0` on `B_r`, found by
/// bisection in `[r*/100, 100 r*]` with `r* = √(1/λ₁ + 1/λ₂)`.
pub fn verify_theorem3_threshold(k: usize, d: usize, lambda1: f64, lambda2: f64) -> Result<ThresholdReport> {
    if k < 4 || k % 2 == 1 || d == 0 {
        return Err(Error::InvalidParameter(format!("need even k >= 4 and d >= 1, got k={k}, d={d}")));
    }
    if !(lambda1 > 0.0 && lambda2 > 0.0) || !lambda1.is_finite() || !lambda2.is_finite() {
        return Err(Error::NonPositiveEigenvalue(lambda1.min(lambda2)));
    }
    let r_star = (1.0 / lambda1 + 1.0 / lambda2).sqrt();
    let positive = |r: f64| reduced_minimum(k, d, lambda1, lambda2, r) > 0.0;
    let (mut lo, mut hi) = (r_star / 100.0, r_star * 100.0);
    if positive(lo) || !positive(hi) {
        return Err(Error::NoSignChange { lo, hi });
    }
    while hi - lo > 1e-13 * hi {
        let mid = 0.5 * (lo + hi);
        if positive(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(ThresholdReport { k, d, lambda1, lambda2, r_min: hi, r_star, ratio: hi / r_star })
}
