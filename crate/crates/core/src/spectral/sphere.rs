//! Real spherical harmonics on the unit sphere S².
//!
//! Basis: `Y_k^0 = p̄_k^0(cos θ)`, `Y_k^q = √2 p̄_k^q(cos θ) cos(qφ)` for `q > 0`
//! and `Y_k^{-q} = √2 p̄_k^q(cos θ) sin(qφ)`, where `p̄_k^q` is the associated
//! Legendre function scaled so that every `Y_k^q` has unit L² norm. No
//! Condon–Shortley phase is applied, so `Y_1^1 = √(3/4π) x`.

use std::f64::consts::PI;

use crate::{Error, Result};

/// Tolerance on `|x| - 1` for a point to count as lying on the sphere.
pub const UNIT_TOLERANCE: f64 = 1e-12;

pub(crate) fn check_unit(p: &[f64]) -> Result<[f64; 3]> {
    if p.len() != 3 {
        return Err(Error::OffManifold(format!(
            "sphere point needs 3 coordinates, got {}",
            p.len()
        )));
    }
    let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
    if !n.is_finite() || (n - 1.0).abs() > UNIT_TOLERANCE {
        return Err(Error::OffManifold(format!("|x| = {n} is not 1")));
    }
    Ok([p[0], p[1], p[2]])
}

/// Normalized associated Legendre function `p̄_k^q` evaluated from
/// `t = cos θ` and `s = sin θ ≥ 0`, by the stable three-term recurrence in `k`.
pub fn normalized_legendre(k: u32, q: u32, t: f64, s: f64) -> f64 {
    if q > k {
        return 0.0;
    }
    // p̄_q^q
    let mut pqq = 1.0 / (4.0 * PI).sqrt();
    for i in 1..=q {
        let i = i as f64;
        pqq *= ((2.0 * i + 1.0) / (2.0 * i)).sqrt() * s;
    }
    if k == q {
        return pqq;
    }
    let qf = q as f64;
    let mut prev = pqq;
    let mut cur = (2.0 * qf + 3.0).sqrt() * t * pqq;
    for l in (q + 2)..=k {
        let lf = l as f64;
        let a = ((4.0 * lf * lf - 1.0) / (lf * lf - qf * qf)).sqrt();
        let b = (((lf - 1.0) * (lf - 1.0) - qf * qf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
        let next = a * (t * cur - b * prev);
        prev = cur;
        cur = next;
    }
    cur
}

/// Real orthonormal spherical harmonic `Y_k^q` at a unit vector.
pub fn real_harmonic(k: u32, q: i32, p: [f64; 3]) -> f64 {
    let s = p[0].hypot(p[1]);
    let t = p[2];
    let aq = q.unsigned_abs();
    let base = normalized_legendre(k, aq, t, s);
    if q == 0 {
        return base;
    }
    let phi = p[1].atan2(p[0]);
    let ang = aq as f64 * phi;
    if q > 0 {
        std::f64::consts::SQRT_2 * base * ang.cos()
    } else {
        std::f64::consts::SQRT_2 * base * ang.sin()
    }
}

/// Legendre polynomial `P_k(t)`.
pub fn legendre(k: u32, t: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = t;
    for n in 1..k {
        let n = n as f64;
        let next = ((2.0 * n + 1.0) * t * cur - n * prev) / (n + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Unit vector from colatitude `theta` and longitude `phi`.
pub fn from_angles(theta: f64, phi: f64) -> [f64; 3] {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    [st * cp, st * sp, ct]
}

/// Great-circle distance between unit vectors.
pub fn great_circle(a: [f64; 3], b: [f64; 3]) -> f64 {
    let cross = [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ];
    let sin = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
    let cos = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    sin.atan2(cos)
}
