//! Sign and size properties of `Δ^q ṽ_r` used in the positivity argument.
//!
//! All of them are scale invariant, so they are evaluated at `r = 1`
//! (outer radius 3).

use serde::{Deserialize, Serialize};

use super::{remainder_expansion, RadialExpansion, LEMMA1_TOLERANCE, OUTER_FACTOR};

const SAMPLES: usize = 2048;
/// Smallest radius sampled on `(0, 3r]`.
const INNER_EDGE: f64 = 1e-2;

/// Measured margins for one `(α, m, d)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantReport {
    /// `min Δ^q ṽ / Σ|terms|` over `[r, 3r]` and `0 ≤ q < m`.
    pub positivity: f64,
    /// `max |Δ^q ṽ| / Δ^q |x|^{-α}` over `(0, 3r]` and `0 ≤ q < m`;
    /// infinite when `Δ^q |x|^{-α}` is not positive.
    pub domination_ratio: f64,
    /// `min Δ^m ṽ / (∏_{j<2m} (α+j) |x|^{-α-2m})` over `[r, 3r]`.
    pub main_term_ratio: f64,
    /// `min ∂^{2(m−q)} Δ^q ṽ / Σ|terms|` over `(0, 3r)` and `0 ≤ q < m`.
    pub cascade: f64,
}

impl InvariantReport {
    /// Positivity, the main-term regime `≥ ½`, and the cascade.
    pub fn holds(&self) -> bool {
        self.positivity >= -LEMMA1_TOLERANCE && self.main_term_ratio >= 0.5 && self.cascade > 0.0
    }
}

fn relative(e: &RadialExpansion, s: f64) -> f64 {
    let scale = e.abs_at(s);
    if scale == 0.0 {
        0.0
    } else {
        e.at(s) / scale
    }
}

fn linspace(a: f64, b: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| a + (b - a) * i as f64 / (n - 1) as f64)
}

/// Radii in `(0, 3)`: geometric near the origin, uniform elsewhere.
fn interior() -> impl Iterator<Item = f64> {
    let geo = (0..SAMPLES / 4).map(|i| INNER_EDGE * (1.0 / INNER_EDGE).powf(i as f64 / (SAMPLES / 4) as f64));
    geo.chain((1..SAMPLES).map(|i| 1.0 + 2.0 * i as f64 / SAMPLES as f64))
}

pub fn lemma4_invariants(alpha: f64, m: usize, d: usize) -> InvariantReport {
    let tilde = remainder_expansion(alpha, m, OUTER_FACTOR, d);
    let power = RadialExpansion::monomial(d, 1.0, -alpha);
    let mut positivity = f64::INFINITY;
    let mut domination_ratio = 0.0f64;
    let mut cascade = f64::INFINITY;
    let mut lq = tilde.clone();
    let mut pq = power;
    for q in 0..m {
        for s in linspace(1.0, OUTER_FACTOR, SAMPLES) {
            positivity = positivity.min(relative(&lq, s));
        }
        let lead = pq.coefficient(-alpha - 2.0 * q as f64);
        for s in interior().chain([OUTER_FACTOR]) {
            let bound = pq.at(s);
            let ratio = if lead > 0.0 && bound > 0.0 { lq.at(s).abs() / bound } else { f64::INFINITY };
            domination_ratio = domination_ratio.max(ratio);
        }
        let top = lq.derivative(2 * (m - q));
        for s in interior() {
            cascade = cascade.min(relative(&top, s));
        }
        lq = lq.laplacian();
        pq = pq.laplacian();
    }
    let main: f64 = (0..2 * m).map(|j| alpha + j as f64).product();
    let main_term_ratio = linspace(1.0, OUTER_FACTOR, SAMPLES)
        .map(|s| lq.at(s) / (main * s.powf(-alpha - 2.0 * m as f64)))
        .fold(f64::INFINITY, f64::min);
    InvariantReport { positivity, domination_ratio, main_term_ratio, cascade }
}

/// `n!!` with `0!! = (−1)!! = 1`.
pub fn semifactorial(n: i64) -> f64 {
    let mut acc = 1.0;
    let mut k = n;
    while k > 1 {
        acc *= k as f64;
        k -= 2;
    }
    acc
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `max |coeff Δ^m |x|^l| / (l!! (l+d−2)!! (2m−1−l)!)` over `m ≤ m_max`,
/// `d ∈ dims`, `0 ≤ l ≤ 2m−1`.
pub fn semifactorial_ratio(m_max: usize, dims: impl IntoIterator<Item = usize> + Clone) -> f64 {
    let mut worst = 0.0f64;
    for d in dims {
        for m in 1..=m_max {
            for l in 0..2 * m {
                let e = RadialExpansion::monomial(d, 1.0, l as f64).power_lm(m);
                let coef = e.coefficient(l as f64 - 2.0 * m as f64).abs();
                let denom = semifactorial(l as i64)
                    * semifactorial(l as i64 + d as i64 - 2)
                    * factorial(2 * m - 1 - l);
                worst = worst.max(coef / denom);
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn semifactorial_values() {
        assert_eq!(semifactorial(-1), 1.0);
        assert_eq!(semifactorial(0), 1.0);
        assert_eq!(semifactorial(5), 15.0);
        assert_eq!(semifactorial(6), 48.0);
    }

    #[test]
    fn semifactorial_ratio_is_finite_and_attained() {
        let r = semifactorial_ratio(5, 1..=5);
        assert!(r.is_finite() && r > 0.0);
        // d = 2, m = 1, l = 1: Δ|x| = |x|^{-1}, bound 1!!·1!!·0! = 1
        assert!(semifactorial_ratio(1, [2]) >= 1.0);
    }

    #[test]
    fn large_alpha_satisfies_everything() {
        let inv = lemma4_invariants(20.0, 2, 3);
        assert!(inv.holds(), "{inv:?}");
        assert!(inv.domination_ratio >= 1.0 && inv.domination_ratio.is_finite());
    }

    #[test]
    fn main_term_needs_large_alpha_in_three_dimensions() {
        // the leading coefficient ratio is (α−1)/(α+2m−1) for d = 3
        let inv = lemma4_invariants(3.0, 2, 3);
        assert!(inv.main_term_ratio < 0.5);
    }

    #[test]
    fn small_alpha_breaks_domination() {
        let inv = lemma4_invariants(0.5, 2, 5);
        assert!(inv.domination_ratio.is_infinite());
    }
}
