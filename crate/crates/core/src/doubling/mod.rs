//! Doubling ratios `∫_{B_{2r}} u / ∫_{B_r} u` for nonnegative subsolutions,
//! the integration-by-parts identity behind them, and the sharp examples.

pub mod polynomial;
pub mod quadrature;

pub use polynomial::{MultiIndex, Polynomial};
pub use quadrature::{integrate, integrate_profile, integrate_radial, sphere_area, Integral, QuadratureRule, Region, RegionKind};

use serde::{Deserialize, Serialize};

use crate::spectral::{EigenSum, ExtendedFunction, Manifold};
use crate::weight::{assemble_weight, constant_estimate, gamma_of, verify_lemma1, SignCase, WeightConfig};
use crate::{Error, Result};

/// Default Gauss order; the finer comparison rule uses twice this.
pub const DEFAULT_ORDER: usize = 12;
/// Relative slack for sampled sign conditions.
pub const SIGN_TOLERANCE: f64 = 1e-12;
/// An inner integral below this multiple of `ε · Σ|w u|` over the inner ball counts as vanishing.
const VANISHING_FACTOR: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoublingRatio {
    pub ratio: f64,
    pub error: f64,
    pub inner: Integral,
    pub outer: Integral,
}

/// `∫_{B(center, 2r)} u / ∫_{B(center, r)} u`.
pub fn doubling_ratio<F>(u: F, center: &[f64], r: f64, order: usize) -> Result<DoublingRatio>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let outer = integrate(&u, &Region::ball(center, 2.0 * r), order)?;
    let inner = integrate(&u, &Region::ball(center, r), order)?;
    ratio_of(inner, outer)
}

/// Doubling ratio about the origin of the radial function `f(|x|)` in `ℝ^d`.
pub fn radial_doubling_ratio<F>(f: F, d: usize, r: f64, order: usize) -> Result<DoublingRatio>
where
    F: Fn(f64) -> f64 + Sync,
{
    let outer = integrate_profile(&f, d, 2.0 * r, order)?;
    let inner = integrate_profile(&f, d, r, order)?;
    ratio_of(inner, outer)
}

fn ratio_of(inner: Integral, outer: Integral) -> Result<DoublingRatio> {
    let scale = outer.max_sample.abs().max(inner.max_sample.abs());
    let low = outer.min_sample.min(inner.min_sample);
    if low < -SIGN_TOLERANCE * scale {
        return Err(Error::Precondition(format!("u takes the negative value {low} on the ball")));
    }
    let floor = VANISHING_FACTOR * f64::EPSILON * inner.abs_sum;
    if !(inner.value > floor) {
        return Err(Error::VanishingMass { denominator: inner.value, scale: inner.abs_sum });
    }
    let ratio = outer.value / inner.value;
    let error = ratio * (outer.error / outer.value.abs() + inner.error / inner.value);
    Ok(DoublingRatio { ratio, error, inner, outer })
}

/// A nonnegative function annihilated or pushed down by `∏(Δ + γ_k)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Subsolution {
    /// Polynomial with `∏(Δ + γ_k) u ≤ 0`.
    Polynomial { u: Polynomial, gammas: Vec<f64> },
    /// `h(x, t) = f(x) e^{√λ₁ t}` on `T^d × ℝ`, annihilated by
    /// `Δ ∏_{k≥2}(Δ + λ_k − λ₁)`.
    Extended(ExtendedFunction),
}

impl Subsolution {
    pub fn polynomial(u: Polynomial, gammas: Vec<f64>) -> Self {
        Self::Polynomial { u, gammas }
    }

    pub fn extended(f: &EigenSum) -> Result<Self> {
        if !matches!(f.manifold(), Manifold::Torus { .. }) {
            return Err(Error::ManifoldMismatch("extension is supported on the torus".into()));
        }
        Ok(Self::Extended(f.extend()?))
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Self::Polynomial { .. } => "polynomial",
            Self::Extended(_) => "extended",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Polynomial { u, .. } => u.dim(),
            Self::Extended(h) => h.base().manifold().dim() + 1,
        }
    }

    pub fn gammas(&self) -> Vec<f64> {
        match self {
            Self::Polynomial { gammas, .. } => gammas.clone(),
            Self::Extended(h) => std::iter::once(0.0).chain(h.operator_shifts()).collect(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Self::Polynomial { u, .. } => u.eval(x),
            Self::Extended(h) => {
                let d = x.len() - 1;
                h.eval(&x[..d], x[d]).unwrap_or(f64::NAN)
            }
        }
    }

    /// Checks `u ≥ 0` on `B(center, radius)` by sampling and `𝓛u ≤ 0`,
    /// exactly when `𝓛u` is constant or the annihilation is exact.
    pub fn check(&self, center: &[f64], radius: f64) -> Result<()> {
        if center.len() != self.dim() {
            return Err(Error::InvalidParameter(format!(
                "center has dimension {}, function has {}",
                center.len(),
                self.dim()
            )));
        }
        let nodes = check_nonnegative(|x| self.eval(x), center, radius)?;
        match self {
            Self::Polynomial { u, gammas } => {
                let lu = u.script_l(gammas);
                if let Some(c) = lu.as_constant() {
                    return if c <= 0.0 {
                        Ok(())
                    } else {
                        Err(Error::Precondition(format!("operator maps u to the positive constant {c}")))
                    };
                }
                for x in &nodes {
                    let v = lu.eval(x);
                    if v > SIGN_TOLERANCE * lu.abs_eval(x) {
                        return Err(Error::Precondition(format!("operator applied to u is {v} > 0")));
                    }
                }
                Ok(())
            }
            Self::Extended(h) => {
                let res = h.product_residual_exact();
                if res <= SIGN_TOLERANCE * h.residual_scale() {
                    Ok(())
                } else {
                    Err(Error::Precondition(format!("extension is not annihilated: residual {res}")))
                }
            }
        }
    }
}

/// Samples `u` on the quadrature nodes of `B(center, radius)` and fails if
/// it is negative beyond roundoff; returns the nodes.
fn check_nonnegative(u: impl Fn(&[f64]) -> f64, center: &[f64], radius: f64) -> Result<Vec<Vec<f64>>> {
    let region = Region::ball(center, radius);
    let nodes: Vec<Vec<f64>> = QuadratureRule::new(RegionKind::Ball, center.len(), DEFAULT_ORDER)?
        .nodes(&region)?
        .into_iter()
        .map(|n| n.0)
        .chain([center.to_vec()])
        .collect();
    let vals: Vec<f64> = nodes.iter().map(|x| u(x)).collect();
    let max = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if let Some(v) = vals.iter().copied().find(|&v| !(v >= -SIGN_TOLERANCE * max)) {
        return Err(Error::Precondition(format!("function takes the value {v} on the ball")));
    }
    Ok(nodes)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegrationByParts {
    /// `∫ (𝓛u) v_r`.
    pub lhs: f64,
    /// `∫ u 𝓛v_r`.
    pub rhs: f64,
    pub residual: f64,
    /// Sum of the two quadrature error estimates.
    pub error: f64,
}

impl IntegrationByParts {
    /// Residual within ten error estimates.
    pub fn agrees(&self) -> bool {
        self.residual <= 10.0 * self.error
    }
}

/// Both sides of `∫_{B_{3r}} (𝓛u) v_r = ∫_{B_{3r}} u 𝓛v_r` for a polynomial `u`.
pub fn check_integration_by_parts(u: &Polynomial, cfg: &WeightConfig, order: usize) -> Result<IntegrationByParts> {
    if u.dim() != cfg.d {
        return Err(Error::InvalidParameter(format!("u has dimension {}, weight has {}", u.dim(), cfg.d)));
    }
    let w = assemble_weight(cfg)?;
    let lu = u.script_l(&cfg.gammas);
    let center = vec![0.0; cfg.d];
    let outer = 3.0 * cfg.r;
    let breaks = w.breakpoints();
    let angular = (u.degree() as usize) / 2 + 2;
    let lhs = integrate_radial(|x| lu.eval(x), |rho| w.eval(rho), &center, outer, &breaks, order, angular)?;
    let rhs = integrate_radial(|x| u.eval(x), |rho| w.script_l(rho), &center, outer, &breaks, order, angular)?;
    Ok(IntegrationByParts {
        lhs: lhs.value,
        rhs: rhs.value,
        residual: (lhs.value - rhs.value).abs(),
        error: lhs.error + rhs.error,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem2Verdict {
    pub ratio: f64,
    pub error: f64,
    /// Calibrated `C₀ exp(C₁ σ)`.
    pub bound: f64,
    /// `1 + sup_{B_r} |𝓛v_r|` for this configuration.
    pub weight_bound: f64,
    /// `bound − ratio`.
    pub margin: f64,
    pub pass: bool,
}

/// Doubling ratio of a subsolution against the calibrated constant.
pub fn verify_theorem2(u: &Subsolution, cfg: &WeightConfig, center: &[f64]) -> Result<Theorem2Verdict> {
    cfg.validate()?;
    if u.dim() != cfg.d {
        return Err(Error::InvalidParameter(format!("u has dimension {}, weight has {}", u.dim(), cfg.d)));
    }
    if u.gammas() != cfg.gammas {
        return Err(Error::InvalidParameter("subsolution and weight use different operators".into()));
    }
    u.check(center, 3.0 * cfg.r)?;
    let dr = doubling_ratio(|x| u.eval(x), center, cfg.r, DEFAULT_ORDER)?;
    let bound = constant_estimate(cfg.d, cfg.m, cfg.gamma(), cfg.r0, cfg.case)?;
    let lemma = verify_lemma1(cfg)?;
    let weight_bound = 1.0 + lemma.c_measured.unwrap_or(f64::INFINITY);
    Ok(Theorem2Verdict {
        ratio: dr.ratio,
        error: dr.error,
        bound,
        weight_bound,
        margin: bound - dr.ratio,
        pass: dr.ratio + dr.error <= bound,
    })
}

/// `Σ_{|μ|=2m} a_μ ∂^μ + Σ_{|μ|<2m} b_μ ∂^μ` with constant coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralOperator2m {
    pub d: usize,
    pub m: usize,
    pub top: Vec<(MultiIndex, f64)>,
    pub lower: Vec<(MultiIndex, f64)>,
    /// Ellipticity constant: `Σ a_μ ξ^μ ≥ C₁ |ξ|^{2m}`.
    pub c1: f64,
    /// Bound on all coefficients.
    pub c2: f64,
}

/// Unit vectors sampling `S^{d−1}` for the symbol check.
fn symbol_directions(d: usize) -> Vec<Vec<f64>> {
    match d {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..720)
            .map(|j| {
                let (s, c) = (std::f64::consts::PI * j as f64 / 360.0).sin_cos();
                vec![c, s]
            })
            .collect(),
        _ => {
            // Fibonacci lattice on S² for d = 3
            let n = 2000;
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..n)
                .map(|i| {
                    let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
                    let s = (1.0 - z * z).sqrt();
                    let (sp, cp) = (golden * i as f64).sin_cos();
                    vec![s * cp, s * sp, z]
                })
                .collect()
        }
    }
}

fn multinomial_terms(d: usize, m: usize) -> Vec<(MultiIndex, f64)> {
    // coefficients of (Σ ξ_i²)^m
    let mut out = Vec::new();
    fn rec(d: usize, left: usize, i: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i == d - 1 {
            cur.push(left as u32);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for k in 0..=left {
            cur.push(k as u32);
            rec(d, left - k, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut parts = Vec::new();
    rec(d, m, 0, &mut Vec::new(), &mut parts);
    let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
    for nu in parts {
        let coef = fact(m as u32) / nu.iter().map(|&k| fact(k)).product::<f64>();
        out.push((nu.iter().map(|k| 2 * k).collect(), coef));
    }
    out
}

impl GeneralOperator2m {
    /// Validates orders and the ellipticity claim `c1` on sampled directions.
    pub fn new(
        d: usize,
        m: usize,
        top: Vec<(MultiIndex, f64)>,
        lower: Vec<(MultiIndex, f64)>,
        c1: f64,
    ) -> Result<Self> {
        if d == 0 || d > quadrature::MAX_DIM || m == 0 {
            return Err(Error::InvalidParameter(format!("unsupported d={d}, m={m}")));
        }
        let order = |mu: &MultiIndex| mu.iter().sum::<u32>() as usize;
        if top.iter().any(|(mu, _)| mu.len() != d || order(mu) != 2 * m)
            || lower.iter().any(|(mu, _)| mu.len() != d || order(mu) >= 2 * m)
        {
            return Err(Error::InvalidParameter("coefficient multi-indices have the wrong order".into()));
        }
        let c2 = top.iter().chain(&lower).fold(0.0f64, |a, (_, c)| a.max(c.abs()));
        let op = Self { d, m, top, lower, c1, c2 };
        let min = op.symbol_minimum();
        if !(c1 > 0.0) || min < c1 * (1.0 - 1e-12) {
            return Err(Error::NotElliptic { min, required: c1 });
        }
        Ok(op)
    }

    /// `Δ^m + Σ_j β_j Δ^j` over `j < m`.
    pub fn laplacian_power(d: usize, m: usize, betas: &[f64]) -> Result<Self> {
        let mut lower: Vec<(MultiIndex, f64)> = Vec::new();
        for (j, &b) in betas.iter().enumerate().take(m) {
            if b != 0.0 {
                lower.extend(multinomial_terms(d, j).into_iter().map(|(mu, c)| (mu, b * c)));
            }
        }
        Self::new(d, m, multinomial_terms(d, m), lower, 1.0)
    }

    /// `min_{|ξ|=1} Σ a_μ ξ^μ` over the sampled directions.
    pub fn symbol_minimum(&self) -> f64 {
        symbol_directions(self.d)
            .iter()
            .map(|xi| {
                self.top
                    .iter()
                    .map(|(mu, a)| a * mu.iter().zip(xi).map(|(&k, &x)| x.powi(k as i32)).product::<f64>())
                    .sum::<f64>()
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn apply(&self, u: &Polynomial) -> Polynomial {
        u.apply(&self.top).add(&u.apply(&self.lower))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem4Verdict {
    pub ratio: f64,
    pub error: f64,
    pub ceiling: f64,
    pub pass: bool,
}

/// Checks that a polynomial is a nonnegative subsolution of `op` on
/// `B(center, 2R)`.
pub fn check_general_subsolution(op: &GeneralOperator2m, u: &Polynomial, center: &[f64], radius: f64) -> Result<()> {
    let lu = op.apply(u);
    if let Some(c) = lu.as_constant() {
        if c > 0.0 {
            return Err(Error::Precondition(format!("operator maps u to the positive constant {c}")));
        }
    }
    for x in check_nonnegative(|x| u.eval(x), center, radius)? {
        let v = lu.eval(&x);
        if v > SIGN_TOLERANCE * lu.abs_eval(&x) {
            return Err(Error::Precondition(format!("operator applied to u is {v} > 0")));
        }
    }
    Ok(())
}

/// Doubling ratio for a general constant-coefficient operator against the
/// calibrated ceiling for its order.
pub fn verify_theorem4(op: &GeneralOperator2m, u: &Polynomial, center: &[f64], radius: f64) -> Result<Theorem4Verdict> {
    if !(radius > 0.0) || 4.0 * radius > 1.0 {
        return Err(Error::Precondition(format!("radius {radius} must satisfy 0 < 4R <= 1")));
    }
    if u.dim() != op.d || center.len() != op.d {
        return Err(Error::InvalidParameter("dimensions of operator, function and center differ".into()));
    }
    let min = op.symbol_minimum();
    if min < op.c1 * (1.0 - 1e-12) {
        return Err(Error::NotElliptic { min, required: op.c1 });
    }
    check_general_subsolution(op, u, center, 2.0 * radius)?;
    let order = DEFAULT_ORDER.max(u.degree() as usize / 2 + op.d);
    let dr = doubling_ratio(|x| u.eval(x), center, radius, order)?;
    let ceiling = crate::constants::global()?.general(op.m)?.ceiling;
    Ok(Theorem4Verdict { ratio: dr.ratio, error: dr.error, ceiling, pass: dr.ratio <= ceiling })
}

/// Polynomials tried as subsolutions when calibrating general operators.
pub fn general_gallery(d: usize) -> Vec<Polynomial> {
    let mut out = vec![
        Polynomial::constant(d, 1.0),
        Polynomial::coordinate_square(d),
        Polynomial::radius_squared(d),
        Polynomial::radial_power(d, 2),
    ];
    let x1 = Polynomial::coordinate(d, 0);
    out.push(x1.mul(&x1).mul(&x1).mul(&x1));
    if d >= 2 {
        let x2 = Polynomial::coordinate(d, 1);
        let prod = x1.mul(&x2);
        out.push(prod.mul(&prod));
        let h = x1.mul(&x1).add(&x2.mul(&x2).scaled(-1.0));
        out.push(h.mul(&h));
    }
    out
}

/// Largest doubling ratio over `Δ^m + β Δ^{m−1}` (`β ∈ {0, −½, −1}`), the
/// gallery, `d ∈ {1, 2, 3}`, radii `1/4, 1/8` and two centres.
pub fn calibrate_general(m: usize) -> Result<f64> {
    let mut worst = 1.0f64;
    for d in 1..=3 {
        for beta in [0.0, -0.5, -1.0] {
            let mut betas = vec![0.0; m];
            if m >= 2 {
                betas[m - 1] = beta;
            } else if beta != 0.0 {
                continue;
            }
            let op = GeneralOperator2m::laplacian_power(d, m, &betas)?;
            for u in general_gallery(d) {
                for radius in [0.25, 0.125] {
                    for shift in [0.0, 0.1] {
                        let mut center = vec![0.0; d];
                        center[0] = shift;
                        if check_general_subsolution(&op, &u, &center, 2.0 * radius).is_err() {
                            continue;
                        }
                        let order = DEFAULT_ORDER.max(u.degree() as usize / 2 + d);
                        match doubling_ratio(|x| u.eval(x), &center, radius, order) {
                            Ok(dr) => worst = worst.max(dr.ratio),
                            Err(Error::VanishingMass { .. }) => {}
                            Err(e) => return Err(e),
                        }
                    }
                }
            }
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchrodingerCase {
    pub k: u32,
    pub d: usize,
    /// `η = 2k(2k+d−2)` with `V = −η/|x|²`.
    pub eta: f64,
    pub ratio: f64,
    pub log2_ratio: f64,
    /// `exp(C₀ + C₁√η)` when calibrated for `d`.
    pub bound: Option<f64>,
}

/// `u = |x|^{2k}` solves `Δu + Vu = 0` with `V = −2k(2k+d−2)/|x|²`.
pub fn schrodinger_case(k: u32, d: usize, r: f64) -> Result<SchrodingerCase> {
    if d < 3 {
        return Err(Error::Precondition(format!("potential estimate needs d >= 3, got {d}")));
    }
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let eta = 2.0 * k as f64 * (2.0 * k as f64 + d as f64 - 2.0);
    let u = Polynomial::radial_power(d, k);
    let residual = u.laplacian().add(&Polynomial::radial_power(d, k - 1).scaled(-eta));
    if !residual.is_zero() {
        return Err(Error::Precondition("|x|^{2k} does not solve the potential equation".into()));
    }
    let order = k as usize + d + 2;
    let dr = radial_doubling_ratio(|rho| rho.powi(2 * k as i32), d, r, order)?;
    let bound = crate::constants::global()
        .ok()
        .and_then(|c| c.schrodinger(d).ok())
        .map(|e| (e.c0 + e.c1 * eta.sqrt()).exp());
    Ok(SchrodingerCase { k, d, eta, ratio: dr.ratio, log2_ratio: dr.ratio.log2(), bound })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchrodingerScan {
    pub cases: Vec<SchrodingerCase>,
    /// Least-squares fit `ln(ratio) ≈ intercept + slope·√η`.
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn schrodinger_scan(d: usize, ks: impl IntoIterator<Item = u32>, r: f64) -> Result<SchrodingerScan> {
    let cases: Vec<SchrodingerCase> = ks.into_iter().map(|k| schrodinger_case(k, d, r)).collect::<Result<_>>()?;
    let pts: Vec<(f64, f64)> = cases.iter().map(|c| (c.eta.sqrt(), c.ratio.ln())).collect();
    let (slope, intercept, r_squared) = linear_fit(&pts);
    Ok(SchrodingerScan { cases, slope, intercept, r_squared })
}

/// `(slope, intercept, R²)` of the least-squares line.
pub fn linear_fit(pts: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return (0.0, my, 0.0);
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, my - slope * mx, r2)
}

/// `C₀, C₁` with `ln(ratio) ≤ C₀ + C₁√η` on every case: the fitted slope and
/// the intercept raised to the largest residual.
pub fn calibrate_schrodinger(scan: &SchrodingerScan) -> (f64, f64) {
    let c1 = scan.slope;
    let c0 = scan
        .cases
        .iter()
        .map(|c| c.ratio.ln() - c1 * c.eta.sqrt())
        .fold(f64::NEG_INFINITY, f64::max);
    (c0 + 1e-12, c1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContradictionReport {
    pub lambda1: f64,
    pub m: usize,
    pub r: f64,
    /// `∫_{B_{2r}×[−2r,2r]} h / ∫_{B_r×[−r,r]} h`.
    pub cylinder_ratio: f64,
    /// `e^{√λ₁ r}`; at most twice the cylinder ratio since `h` grows in `t`.
    pub lhs_exp: f64,
    /// `2C²` with `C` the calibrated doubling constant on `M × ℝ`.
    pub rhs_bound: f64,
    /// Largest `r` compatible with the inequality: `ln(2C²)/√λ₁`.
    pub max_radius: f64,
    pub holds: bool,
}

/// Compares the growth `e^{√λ₁ r}` of the extension on cylinders with the
/// doubling constant, assuming `f > 0` on `B(p, 3r)`.
///
/// A cylinder `B_r × [−r, r]` contains `B_r` and lies in `B_{2r}`, so two
/// applications of the ball estimate bound the cylinder ratio by `C²`.
pub fn theorem1_contradiction_experiment(f: &EigenSum, p: &[f64], r: f64) -> Result<ContradictionReport> {
    let d = match f.manifold() {
        Manifold::Torus { dim } => dim,
        _ => return Err(Error::ManifoldMismatch("experiment runs on the torus".into())),
    };
    if p.len() != d || !(r > 0.0) {
        return Err(Error::InvalidParameter("point dimension or radius invalid".into()));
    }
    let region = Region::ball(p, 3.0 * r);
    let nodes = QuadratureRule::new(RegionKind::Ball, d, DEFAULT_ORDER)?.nodes(&region)?;
    for x in nodes.iter().map(|n| n.0.as_slice()).chain([p]) {
        let v = f.eval(x)?;
        if !(v > 0.0) {
            return Err(Error::Precondition(format!("f = {v} is not positive on B(p, 3r)")));
        }
    }
    let h = f.extend()?;
    let eval = |x: &[f64]| h.eval(&x[..d], x[d]).unwrap_or(f64::NAN);
    let mut c = p.to_vec();
    c.push(0.0);
    let outer = integrate(eval, &Region::Cylinder { center: c.clone(), radius: 2.0 * r, half_height: 2.0 * r }, DEFAULT_ORDER)?;
    let inner = integrate(eval, &Region::Cylinder { center: c, radius: r, half_height: r }, DEFAULT_ORDER)?;
    let cylinder_ratio = outer.value / inner.value;
    let gammas: Vec<f64> = std::iter::once(0.0).chain(h.operator_shifts()).collect();
    let m = gammas.len();
    let r0 = crate::weight::DEFAULT_R0;
    let c = constant_estimate(d + 1, m, gamma_of(&gammas), r0, SignCase::A)?;
    let rhs_bound = 2.0 * c * c;
    let mu = f.lambda1().sqrt();
    let lhs_exp = (mu * r).exp();
    Ok(ContradictionReport {
        lambda1: f.lambda1(),
        m,
        r,
        cylinder_ratio,
        lhs_exp,
        rhs_bound,
        max_radius: rhs_bound.ln() / mu,
        holds: lhs_exp <= rhs_bound && cylinder_ratio <= c * c,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{Mode, Term};

    #[test]
    fn sharp_ratios() {
        let r = doubling_ratio(|x| x[0] * x[0], &[0.0, 0.0], 0.3, DEFAULT_ORDER).unwrap();
        assert!((r.ratio - 16.0).abs() <= 1e-8 * 16.0);
        let u = Polynomial::radial_power(3, 2);
        let r = doubling_ratio(|x| u.eval(x), &[0.0; 3], 0.7, DEFAULT_ORDER).unwrap();
        assert!((r.ratio - 128.0).abs() <= 1e-8 * 128.0);
        for d in 1..=3 {
            let r = doubling_ratio(|_| 1.0, &vec![0.2; d], 1.0, 4).unwrap();
            assert_eq!(r.ratio, 2f64.powi(d as i32));
        }
    }

    #[test]
    fn homogeneous_ratios() {
        for d in 1..=3 {
            for s in [0u32, 2, 4, 6, 8] {
                let u = Polynomial::radial_power(d, s / 2);
                let r = doubling_ratio(|x| u.eval(x), &vec![0.0; d], 0.4, DEFAULT_ORDER).unwrap();
                let want = 2f64.powi((s as usize + d) as i32);
                assert!((r.ratio - want).abs() <= 1e-8 * want, "d={d} s={s}");
            }
        }
    }

    #[test]
    fn sign_change_is_rejected() {
        let e = doubling_ratio(|x| x[0], &[0.0, 0.0], 0.5, 6).unwrap_err();
        assert!(matches!(e, Error::Precondition(_)));
    }

    #[test]
    fn vanishing_mass_is_reported() {
        let e = doubling_ratio(|x| if x[0] > 0.9 { 1.0 } else { 0.0 }, &[0.0], 0.5, 6).unwrap_err();
        assert!(matches!(e, Error::VanishingMass { .. }));
    }

    #[test]
    fn integration_by_parts_examples() {
        let cfg = WeightConfig::new(3, 1, vec![0.0], 0.1, 0.5, SignCase::A, 4.0).unwrap();
        let one = check_integration_by_parts(&Polynomial::constant(3, 1.0), &cfg, 16).unwrap();
        assert_eq!(one.lhs, 0.0);
        assert!(one.rhs.abs() < 1e-9, "{one:?}");
        assert!(one.agrees());

        let u = Polynomial::radius_squared(3);
        let ibp = check_integration_by_parts(&u, &cfg, 16).unwrap();
        assert!(ibp.agrees(), "{ibp:?}");
        let w = assemble_weight(&cfg).unwrap();
        let mass = integrate_radial(|_| 1.0, |rho| w.eval(rho), &[0.0; 3], 0.3, &w.breakpoints(), 16, 2).unwrap();
        assert!((ibp.lhs - 6.0 * mass.value).abs() <= 1e-12 * ibp.lhs.abs());

        let cfg = WeightConfig::new(3, 2, vec![0.0, 0.0], 0.1, 0.5, SignCase::A, 8.0).unwrap();
        let ibp = check_integration_by_parts(&Polynomial::coordinate_square(3), &cfg, 16).unwrap();
        assert!(ibp.agrees(), "{ibp:?}");
    }

    #[test]
    fn general_operator_checks() {
        let op = GeneralOperator2m::laplacian_power(2, 2, &[0.0, 0.0]).unwrap();
        assert!((op.symbol_minimum() - 1.0).abs() < 1e-12);
        let u = Polynomial::coordinate_square(2);
        assert!(check_general_subsolution(&op, &u, &[0.0, 0.0], 0.5).is_ok());
        let op = GeneralOperator2m::laplacian_power(2, 2, &[0.0, 1.0]).unwrap();
        assert!(op.apply(&u).as_constant() == Some(2.0));
        assert!(matches!(check_general_subsolution(&op, &u, &[0.0, 0.0], 0.5), Err(Error::Precondition(_))));
        let bad = GeneralOperator2m::new(2, 1, vec![(vec![2, 0], 1.0), (vec![0, 2], -1.0)], vec![], 0.5);
        assert!(matches!(bad, Err(Error::NotElliptic { .. })));
    }

    #[test]
    fn bilaplacian_expansion() {
        let op = GeneralOperator2m::laplacian_power(3, 2, &[]).unwrap();
        let u = Polynomial::radial_power(3, 2);
        // Δ²|x|⁴ = 120 in three dimensions
        assert_eq!(op.apply(&u).as_constant(), Some(120.0));
    }

    #[test]
    fn schrodinger_examples() {
        let c = schrodinger_case(2, 3, 0.5).unwrap();
        assert_eq!(c.eta, 20.0);
        assert!((c.ratio - 128.0).abs() < 1e-8 * 128.0);
        let c = schrodinger_case(1, 3, 0.5).unwrap();
        assert_eq!(c.eta, 6.0);
        assert!((c.ratio - 32.0).abs() < 1e-8 * 32.0);
        assert!(schrodinger_case(1, 2, 0.5).is_err());
    }

    #[test]
    fn extended_subsolution_is_exact() {
        let f = EigenSum::torus(1, vec![Term::new(1.0, Mode::cos([1])), Term::new(0.5, Mode::cos([2]))]).unwrap();
        let s = Subsolution::extended(&f).unwrap();
        assert_eq!(s.dim(), 2);
        assert_eq!(s.gammas().len(), 2);
        assert!(s.check(&[0.0, 0.0], 0.05).is_ok());
        assert!(s.check(&[0.25, 0.0], 0.05).is_err());
    }

    #[test]
    fn contradiction_experiment_examples() {
        let f = EigenSum::torus(1, vec![Term::new(1.0, Mode::cos([1])), Term::new(0.5, Mode::cos([2]))]).unwrap();
        let small = theorem1_contradiction_experiment(&f, &[0.0], 0.01).unwrap();
        assert!(small.holds && small.lhs_exp < 1.2 && small.rhs_bound > 10.0);
        assert!(small.lhs_exp <= 2.0 * small.cylinder_ratio);
        // zeros of cos(2πx) + ½cos(4πx) sit near x ≈ 0.18, so 3r must stay below that
        assert!(theorem1_contradiction_experiment(&f, &[0.0], 0.07).is_err());
    }

    #[test]
    fn linear_fit_exact_line() {
        let (s, i, r2) = linear_fit(&[(0.0, 1.0), (1.0, 3.0), (2.0, 5.0)]);
        assert!((s - 2.0).abs() < 1e-15 && (i - 1.0).abs() < 1e-15 && (r2 - 1.0).abs() < 1e-15);
    }
}
