//! Product Gauss rules on balls, annuli and cylinders `B × [−a, a]` in
//! dimensions 1 to 3.
//!
//! The radial factor is Gauss–Legendre in `ρ` with the Jacobian `ρ^{d−1}`
//! folded into the weights, so no node sits at the origin. Directions are
//! `±1` on `S⁰`, the trapezoid rule on `S¹` and Gauss–Legendre in `cos θ`
//! times the trapezoid rule in `φ` on `S²`.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Largest supported dimension of the ball factor.
pub const MAX_DIM: usize = 3;
/// Error floor in units of `ε · Σ|w f|`.
const ROUNDOFF_FLOOR: f64 = 64.0;

/// Integration domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Region {
    Ball { center: Vec<f64>, radius: f64 },
    Annulus { center: Vec<f64>, inner: f64, outer: f64 },
    /// `B(center[..d], radius) × [center[d] − half_height, center[d] + half_height]`.
    Cylinder { center: Vec<f64>, radius: f64, half_height: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegionKind {
    Ball,
    Annulus,
    Cylinder,
}

impl Region {
    pub fn ball(center: &[f64], radius: f64) -> Self {
        Self::Ball { center: center.to_vec(), radius }
    }

    pub fn kind(&self) -> RegionKind {
        match self {
            Self::Ball { .. } => RegionKind::Ball,
            Self::Annulus { .. } => RegionKind::Annulus,
            Self::Cylinder { .. } => RegionKind::Cylinder,
        }
    }

    /// Dimension of the ambient space.
    pub fn dim(&self) -> usize {
        match self {
            Self::Ball { center, .. } | Self::Annulus { center, .. } | Self::Cylinder { center, .. } => center.len(),
        }
    }

    /// Dimension of the ball factor.
    pub fn ball_dim(&self) -> usize {
        match self {
            Self::Cylinder { center, .. } => center.len().saturating_sub(1),
            _ => self.dim(),
        }
    }

    fn radial_range(&self) -> (f64, f64) {
        match *self {
            Self::Ball { radius, .. } | Self::Cylinder { radius, .. } => (0.0, radius),
            Self::Annulus { inner, outer, .. } => (inner, outer),
        }
    }

    fn center(&self) -> &[f64] {
        match self {
            Self::Ball { center, .. } | Self::Annulus { center, .. } | Self::Cylinder { center, .. } => center,
        }
    }

    fn validate(&self) -> Result<()> {
        let d = self.ball_dim();
        if d == 0 || d > MAX_DIM {
            return Err(Error::InvalidParameter(format!("ball dimension {d} outside 1..={MAX_DIM}")));
        }
        if self.center().iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("region center must be finite".into()));
        }
        let (a, b) = self.radial_range();
        if !(a >= 0.0 && b > a && b.is_finite()) {
            return Err(Error::InvalidParameter(format!("radial range [{a}, {b}] is empty")));
        }
        if let Self::Cylinder { half_height, .. } = *self {
            if !(half_height > 0.0 && half_height.is_finite()) {
                return Err(Error::InvalidParameter(format!("half height {half_height} must be positive")));
            }
        }
        Ok(())
    }
}

/// `|S^{d−1}| = 2π^{d/2}/Γ(d/2)` for `d = 1, 2, 3`, and the general formula beyond.
pub fn sphere_area(d: usize) -> f64 {
    match d {
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => 2.0 * PI * sphere_area(d - 2) / (d as f64 - 2.0),
    }
}

/// Gauss–Legendre nodes and weights on `[−1, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let n = NonZeroUsize::new(n.max(1)).unwrap_or(NonZeroUsize::MIN);
    GaussLegendre::new(n).as_node_weight_pairs().to_vec()
}

/// Directions on `S^{d−1}` with weights summing to `|S^{d−1}|`, exact for
/// polynomials of degree `< 2n` (`d = 1` is exact for every degree).
pub fn sphere_rule(d: usize, n: usize) -> Result<Vec<(Vec<f64>, f64)>> {
    let n = n.max(1);
    match d {
        1 => Ok(vec![(vec![-1.0], 1.0), (vec![1.0], 1.0)]),
        2 => {
            let k = 2 * n;
            Ok((0..k)
                .map(|j| {
                    let (s, c) = (2.0 * PI * j as f64 / k as f64).sin_cos();
                    (vec![c, s], 2.0 * PI / k as f64)
                })
                .collect())
        }
        3 => {
            let k = 2 * n;
            let mut out = Vec::with_capacity(n * k);
            for (z, w) in gauss_legendre(n) {
                let s = (1.0 - z * z).max(0.0).sqrt();
                for j in 0..k {
                    let (sp, cp) = (2.0 * PI * j as f64 / k as f64).sin_cos();
                    out.push((vec![s * cp, s * sp, z], w * 2.0 * PI / k as f64));
                }
            }
            Ok(out)
        }
        _ => Err(Error::InvalidParameter(format!("sphere rule for dimension {d} not available"))),
    }
}

/// Product rule of order `n` for one region kind.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadratureRule {
    pub kind: RegionKind,
    /// Dimension of the ball factor.
    pub dim: usize,
    pub order: usize,
    /// Gauss–Legendre pairs on `[−1, 1]`, used radially and along the axis.
    pub line: Vec<(f64, f64)>,
    pub directions: Vec<(Vec<f64>, f64)>,
    /// Total degree of polynomials in the ball coordinates integrated exactly
    /// over balls centred at the origin.
    pub exactness: usize,
}

impl QuadratureRule {
    pub fn new(kind: RegionKind, dim: usize, order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidParameter("quadrature order must be positive".into()));
        }
        let directions = sphere_rule(dim, order)?;
        Ok(Self { kind, dim, order, line: gauss_legendre(order), directions, exactness: (2 * order).saturating_sub(dim) })
    }

    /// Nodes and weights mapped onto `region`.
    pub fn nodes(&self, region: &Region) -> Result<Vec<(Vec<f64>, f64)>> {
        region.validate()?;
        if region.kind() != self.kind || region.ball_dim() != self.dim {
            return Err(Error::InvalidParameter("rule does not match the region".into()));
        }
        Ok(self.nodes_on_panels(region, &[region.radial_range()]))
    }

    fn nodes_on_panels(&self, region: &Region, panels: &[(f64, f64)]) -> Vec<(Vec<f64>, f64)> {
        let d = self.dim;
        let center = region.center();
        let axis: Vec<(f64, f64)> = match *region {
            Region::Cylinder { half_height, .. } => {
                self.line.iter().map(|&(t, w)| (center[d] + half_height * t, half_height * w)).collect()
            }
            _ => vec![(0.0, 1.0)],
        };
        let mut out = Vec::new();
        for &(a, b) in panels {
            let half = 0.5 * (b - a);
            for &(x, wr) in &self.line {
                let rho = a + half * (x + 1.0);
                let wr = wr * half * rho.powi(d as i32 - 1);
                for (dir, wa) in &self.directions {
                    for &(t, wt) in &axis {
                        let mut p: Vec<f64> = (0..d).map(|i| center[i] + rho * dir[i]).collect();
                        if region.kind() == RegionKind::Cylinder {
                            p.push(t);
                        }
                        out.push((p, wr * wa * wt));
                    }
                }
            }
        }
        out
    }
}

/// Quadrature value with an error estimate and the range of sampled values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Integral {
    pub value: f64,
    /// `|Q_{2n} − Q_n|`, floored at `64 ε Σ|w f|`.
    pub error: f64,
    /// `Σ |w f|` of the finer rule.
    pub abs_sum: f64,
    pub min_sample: f64,
    pub max_sample: f64,
}

/// Pairwise summation in index order.
pub(crate) fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 32 {
        v.iter().sum()
    } else {
        let (a, b) = v.split_at(v.len() / 2);
        pairwise_sum(a) + pairwise_sum(b)
    }
}

struct Sampled {
    value: f64,
    abs_sum: f64,
    min: f64,
    max: f64,
}

fn apply<F>(nodes: &[(Vec<f64>, f64)], u: &F) -> Sampled
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let vals = crate::par::map_indexed(nodes.len(), rayon::current_num_threads(), |i| u(&nodes[i].0));
    let terms: Vec<f64> = vals.iter().zip(nodes).map(|(v, n)| v * n.1).collect();
    let abs: Vec<f64> = terms.iter().map(|t| t.abs()).collect();
    Sampled {
        value: pairwise_sum(&terms),
        abs_sum: pairwise_sum(&abs),
        min: vals.iter().copied().fold(f64::INFINITY, f64::min),
        max: vals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    }
}

fn combine(coarse: Sampled, fine: Sampled) -> Integral {
    let floor = ROUNDOFF_FLOOR * f64::EPSILON * fine.abs_sum;
    Integral {
        value: fine.value,
        error: (fine.value - coarse.value).abs().max(floor),
        abs_sum: fine.abs_sum,
        min_sample: fine.min.min(coarse.min),
        max_sample: fine.max.max(coarse.max),
    }
}

/// `∫_region u` with rules of order `n` and `2n`.
pub fn integrate<F>(u: F, region: &Region, order: usize) -> Result<Integral>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    region.validate()?;
    let coarse = QuadratureRule::new(region.kind(), region.ball_dim(), order)?.nodes(region)?;
    let fine = QuadratureRule::new(region.kind(), region.ball_dim(), 2 * order)?.nodes(region)?;
    Ok(combine(apply(&coarse, &u), apply(&fine, &u)))
}

/// `∫_{B(center, R)} u(x) g(|x − center|) dx` for a radial factor `g` that is
/// smooth between consecutive `breaks` (radii in `(0, R)`).
///
/// The radial rule is composite Gauss–Legendre of order `n` and `2n` on the
/// panels; the directional rule has fixed order `angular`, exact for
/// polynomial `u` of degree `< 2·angular`, so the error estimate reflects
/// the radial rule only.
pub fn integrate_radial<F, G>(
    u: F,
    g: G,
    center: &[f64],
    radius: f64,
    breaks: &[f64],
    order: usize,
    angular: usize,
) -> Result<Integral>
where
    F: Fn(&[f64]) -> f64 + Sync,
    G: Fn(f64) -> f64 + Sync,
{
    let region = Region::ball(center, radius);
    region.validate()?;
    let mut cuts: Vec<f64> = breaks.iter().copied().filter(|&b| b > 0.0 && b < radius).collect();
    cuts.push(0.0);
    cuts.push(radius);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * radius);
    let panels: Vec<(f64, f64)> = cuts.windows(2).map(|w| (w[0], w[1])).collect();
    let d = center.len();
    let run = |n: usize| -> Result<Sampled> {
        let mut rule = QuadratureRule::new(RegionKind::Ball, d, n)?;
        rule.directions = sphere_rule(d, angular)?;
        let nodes = rule.nodes_on_panels(&region, &panels);
        Ok(apply(&nodes, &|x: &[f64]| {
            let rho = x.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum::<f64>().sqrt();
            u(x) * g(rho)
        }))
    };
    Ok(combine(run(order)?, run(2 * order)?))
}

/// `∫_{B_R ⊂ ℝ^d} f(|x|) dx = |S^{d−1}| ∫_0^R ρ^{d−1} f(ρ) dρ` for a radial
/// integrand in any dimension.
pub fn integrate_profile<F>(f: F, d: usize, radius: f64, order: usize) -> Result<Integral>
where
    F: Fn(f64) -> f64 + Sync,
{
    if d == 0 || !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::InvalidParameter(format!("need d >= 1 and positive radius, got d={d}, R={radius}")));
    }
    let area = sphere_area(d);
    let nodes = |n: usize| -> Vec<(Vec<f64>, f64)> {
        gauss_legendre(n)
            .into_iter()
            .map(|(t, w)| {
                let rho = 0.5 * radius * (1.0 + t);
                (vec![rho], area * rho.powi(d as i32 - 1) * 0.5 * radius * w)
            })
            .collect()
    };
    let g = |x: &[f64]| f(x[0]);
    Ok(combine(apply(&nodes(order), &g), apply(&nodes(2 * order), &g)))
}
