//! Validation and dispatch of experiments to the core library.

use std::f64::consts::PI;

use nodal_lab_core::doubling::{
    check_integration_by_parts, doubling_ratio, general_gallery, schrodinger_scan, verify_theorem2, verify_theorem4,
    GeneralOperator2m, Polynomial, Subsolution, DEFAULT_ORDER,
};
use nodal_lab_core::gap::{
    ko_radius, sharpness_sweep, verify_ko_density, GapPolynomial, GapSearch, Interval, SAMPLES_PER_PERIOD,
};
use nodal_lab_core::nodal::{measure_density_radius, minimum_resolution, scaling_experiment};
use nodal_lab_core::spectral::{isolated_zero_example, zonal_harmonic, EigenSum, Mode, Term};
use nodal_lab_core::weight::{
    assemble_weight, lemma4_invariants, verify_lemma1, verify_theorem3_threshold, Lemma1Property, SignCase,
    WeightConfig, DEFAULT_R0, OUTER_FACTOR,
};
use nodal_lab_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{Command, ExperimentConfig, Params};
use crate::plot::Plot;

const POLE: [f64; 3] = [0.0, 0.0, 1.0];

/// One verdict of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// The statement the check exercises.
    pub anchor: String,
    pub pass: bool,
    /// Distance to the threshold; positive when passing.
    pub margin: Option<f64>,
    pub detail: String,
}

impl Check {
    fn new(name: &str, anchor: &str, pass: bool, margin: Option<f64>, detail: String) -> Self {
        Self { name: name.into(), anchor: anchor.into(), pass, margin, detail }
    }
}

/// A CSV table held in memory until the run completes.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub file: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(file: &str, header: &[&str]) -> Self {
        Self { file: file.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// Everything a command produces.
#[derive(Debug, Default)]
pub struct Outcome {
    pub checks: Vec<Check>,
    pub tables: Vec<Table>,
    pub plots: Vec<Plot>,
    /// Extra JSON documents as `(file name, contents)`.
    pub documents: Vec<(String, String)>,
}

fn num(x: f64) -> String {
    format!("{x}")
}

/// Parameters each command reads; anything else set in `[params]` is ignored
/// with a warning.
pub fn used_params(command: Command) -> &'static [&'static str] {
    match command {
        Command::Density => &["manifold", "m", "n", "samples_per_period", "k"],
        Command::Doubling => &["d", "u", "center", "r", "m", "gammas", "r0"],
        Command::Weight => &["d", "m", "gammas", "r0", "alpha"],
        Command::Theorem3 => &["k", "d", "lambdas"],
        Command::Theorem4 => &["d", "m", "betas", "r", "center"],
        Command::Schrodinger => &["d", "ks", "r"],
        Command::Gap => &["n", "interval", "delta", "random_cases", "spectrum"],
        Command::Ibp => &["ds", "ms"],
    }
}

pub fn unused_params(cfg: &ExperimentConfig) -> Vec<String> {
    let used = used_params(cfg.command);
    let value = serde_json::to_value(&cfg.params).expect("params serialize");
    value
        .as_object()
        .map(|o| {
            o.iter()
                .filter(|(k, v)| !v.is_null() && !used.contains(&k.as_str()))
                .map(|(k, _)| format!("parameter `{k}` is not used by `{}`", cfg.command.name()))
                .collect()
        })
        .unwrap_or_default()
}

/// Lists every violated precondition of the configuration.
pub fn validate(cfg: &ExperimentConfig) -> Vec<String> {
    let p = &cfg.params;
    let mut errs = Vec::new();
    let mut need = |ok: bool, msg: String| {
        if !ok {
            errs.push(msg);
        }
    };
    if let Some(m) = p.m {
        need(m >= 1, format!("m ≥ 1 (got {m})"));
    }
    if let Some(d) = p.d {
        need(d >= 1, format!("d ≥ 1 (got {d})"));
    }
    for &m in p.ms.iter().flatten() {
        need(m >= 1, format!("every entry of ms must satisfy m ≥ 1 (got {m})"));
    }
    for &d in p.ds.iter().flatten() {
        need((1..=3).contains(&d), format!("every entry of ds must satisfy 1 ≤ d ≤ 3 (got {d})"));
    }
    if let Some(r) = p.r {
        need(r > 0.0 && r.is_finite(), format!("r > 0 (got {r})"));
    }
    if let Some(r0) = p.r0 {
        need(r0 > 0.0 && r0.is_finite(), format!("r0 > 0 (got {r0})"));
    }
    if let Some(a) = p.alpha {
        need(a > 0.0 && a.is_finite(), format!("alpha > 0 (got {a})"));
    }
    for g in p.gammas.iter().flatten().chain(p.betas.iter().flatten()) {
        need(g.is_finite(), format!("shifts must be finite (got {g})"));
    }
    for &l in p.lambdas.iter().flatten() {
        need(l > 0.0 && l.is_finite(), format!("every eigenvalue must satisfy λ > 0 (got {l})"));
    }
    if let Some(ns) = &p.n {
        need(!ns.is_empty(), "n must not be empty".into());
        for &n in ns {
            need(n >= 1, format!("every entry of n must satisfy N ≥ 1 (got {n})"));
        }
    }
    let m = p.m.unwrap_or(default_m(cfg.command));
    let d = p.d.unwrap_or(default_d(cfg.command));
    match cfg.command {
        Command::Density => {
            let manifold = p.manifold.as_deref().unwrap_or("torus");
            need(
                manifold == "torus" || manifold == "sphere",
                format!("manifold must be `torus` or `sphere` (got `{manifold}`)"),
            );
            if let Some(s) = p.samples_per_period {
                need(s >= 16, format!("samples_per_period ≥ 16 (got {s})"));
            }
            if manifold == "sphere" {
                need(p.k.unwrap_or(2) >= 1, "k ≥ 1 on the sphere".into());
            }
        }
        Command::Doubling => {
            need(d <= 3, format!("doubling quadrature needs d ≤ 3 (got {d})"));
            if d >= 1 {
                if let Err(e) = parse_polynomial(p.u.as_deref().unwrap_or("x1^2"), d) {
                    need(false, e);
                }
            }
            if let Some(c) = &p.center {
                need(c.len() == d, format!("center must have d = {d} coordinates (got {})", c.len()));
            }
            if let (Some(g), Some(m)) = (&p.gammas, p.m) {
                need(g.len() == m, format!("gammas must have m = {m} entries (got {})", g.len()));
            }
            if p.gammas.is_some() && p.m.is_none() {
                need(false, "gammas require m".into());
            }
        }
        Command::Weight => {
            need(d <= 3, format!("weight verification needs d ≤ 3 (got {d})"));
            if let Some(g) = &p.gammas {
                need(g.len() == m, format!("gammas must have m = {m} entries (got {})", g.len()));
            }
        }
        Command::Theorem3 => {
            let k = p.k.unwrap_or(6);
            need(k >= 4 && k % 2 == 0, format!("k must be even with k ≥ 4 (got {k})"));
            if let Some(l) = &p.lambdas {
                need(!l.is_empty(), "lambdas must not be empty".into());
            }
        }
        Command::Theorem4 => {
            need(d <= 3, format!("general operators need d ≤ 3 (got {d})"));
            let r = p.r.unwrap_or(0.25);
            need(4.0 * r <= 1.0, format!("r ≤ 1/4 (got {r})"));
            if let Some(b) = &p.betas {
                need(b.len() == m, format!("betas must have m = {m} entries (got {})", b.len()));
            }
            if let Some(c) = &p.center {
                need(c.len() == d, format!("center must have d = {d} coordinates (got {})", c.len()));
            }
        }
        Command::Schrodinger => {
            need(d >= 3, format!("potential scan needs d ≥ 3 (got {d})"));
            if let Some(ks) = &p.ks {
                need(!ks.is_empty(), "ks must not be empty".into());
                for &k in ks {
                    need(k >= 1, format!("every entry of ks must satisfy k ≥ 1 (got {k})"));
                }
            }
        }
        Command::Gap => {
            if let Some([lo, hi]) = p.interval {
                need(lo < hi && hi - lo <= 1.0, format!("interval must satisfy lo < hi ≤ lo + 1 (got [{lo}, {hi}])"));
            }
            if let Some(delta) = p.delta {
                need(delta > 0.0 && delta.is_finite(), format!("delta > 0 (got {delta})"));
            }
            for &s in p.spectrum.iter().flatten() {
                need(s != 0, "spectrum frequencies must be nonzero".into());
            }
        }
        Command::Ibp => {}
    }
    errs
}

fn default_m(command: Command) -> usize {
    match command {
        Command::Density => 1,
        _ => 2,
    }
}

fn default_d(command: Command) -> usize {
    match command {
        Command::Schrodinger => 3,
        Command::Density => 1,
        _ => 2,
    }
}

/// Parses `1`, `x<i>^<p>` or `|x|^<2k>` in `d` variables.
pub fn parse_polynomial(s: &str, d: usize) -> Result<Polynomial, String> {
    let s = s.trim();
    if s == "1" {
        return Ok(Polynomial::constant(d, 1.0));
    }
    let (base, exp) = s.split_once('^').unwrap_or((s, "1"));
    let exp: u32 = exp.trim().parse().map_err(|_| format!("u: bad exponent in `{s}`"))?;
    if base.trim() == "|x|" {
        if exp % 2 != 0 {
            return Err(format!("u: |x| needs an even exponent (got {exp})"));
        }
        return Ok(Polynomial::radial_power(d, exp / 2));
    }
    let i: usize = base
        .trim()
        .strip_prefix('x')
        .and_then(|i| i.parse().ok())
        .ok_or_else(|| format!("u must be `1`, `x<i>^<p>` or `|x|^<2k>` (got `{s}`)"))?;
    if i == 0 || i > d {
        return Err(format!("u: coordinate x{i} outside 1..={d}"));
    }
    let mut e = vec![0; d];
    e[i - 1] = exp;
    Ok(Polynomial::monomial(1.0, e))
}

pub fn execute(cfg: &ExperimentConfig) -> Result<Outcome, Error> {
    match cfg.command {
        Command::Density => density(cfg),
        Command::Doubling => doubling(cfg),
        Command::Weight => weight(cfg),
        Command::Theorem3 => theorem3(cfg),
        Command::Theorem4 => theorem4(cfg),
        Command::Schrodinger => schrodinger(cfg),
        Command::Gap => gap(cfg),
        Command::Ibp => ibp(cfg),
    }
}

fn density(cfg: &ExperimentConfig) -> Result<Outcome, Error> {
    let p = &cfg.params;
    let workers = cfg.threads.unwrap_or(1);
    if p.manifold.as_deref() == Some("sphere") {
        return sphere_density(p, cfg, workers);
    }
    let m = p.m.unwrap_or(1);
    let ns: Vec<u64> = p.n.clone().unwrap_or_else(|| (1..=16).collect()).iter().map(|&n| n as u64).collect();
    let spp = p.samples_per_period.unwrap_or(64);
    // Σ_j 2^{1−j} sin(2π jN x): a single sine for m = 1, factorized beyond
    let family = |n: u64| {
        let terms = (1..=m as i64).map(|j| Term::new(0.5f64.powi(j as i32 - 1), Mode::sin([j * n as i64]))).collect();
        EigenSum::torus(1, terms)
    };
    let rows = scaling_experiment(family, &ns, spp, workers)?;
    let mut out = Outcome::default();
    let mut table = Table::new(
        "density.csv",
        &["N", "lambda1", "m", "grid", "density_radius", "grid_error", "product_radius_sqrtlambda"],
    );
    for (&n, r) in ns.iter().zip(&rows) {
        table.push(vec![
            n.to_string(),
            num(r.lambda1),
            r.m.to_string(),
            r.n.to_string(),
            num(r.density_radius),
            num(r.grid_error),
            num(r.product_radius_sqrtlambda),
        ]);
    }
    let products: Vec<(f64, f64)> = ns.iter().zip(&rows).map(|(&n, r)| (n as f64, r.product_radius_sqrtlambda)).collect();
    if m == 1 {
        let tol = cfg.tolerances.density();
        let (worst_n, worst) = ns
            .iter()
            .zip(&rows)
            .map(|(&n, r)| (n, ((r.product_radius_sqrtlambda - PI / 2.0).abs() + r.product_error()) / (PI / 2.0)))
            .fold((0, 0.0f64), |a, b| if b.1 > a.1 { b } else { a });
        out.checks.push(Check::new(
            "density radius times sqrt(lambda1) equals pi/2",
            "density radius bound for single eigenfunctions",
            worst <= tol,
            Some(tol - worst),
            format!("worst relative deviation {worst:.3e} at N={worst_n}, tolerance {tol}"),
        ));
    } else {
        let tol = cfg.tolerances.product_spread();
        let (lo, hi) = products.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &(_, p)| (a.min(p), b.max(p)));
        let spread = hi / lo;
        out.checks.push(Check::new(
            "density radius times sqrt(lambda1) stays bounded",
            "density radius bound for sums of eigenfunctions",
            lo > 0.0 && spread <= tol,
            Some(tol - spread),
            format!("product in [{lo:.6}, {hi:.6}], max/min {spread:.4}, tolerance {tol}"),
        ));
    }
    out.plots.push(Plot {
        file: "density.svg".into(),
        title: format!("density radius · √λ₁, m = {m}"),
        x_label: "N".into(),
        y_label: "radius · √λ₁".into(),
        series: vec![("measured".into(), products)],
        reference: Some(PI / 2.0),
    });
    out.tables.push(table);
    Ok(out)
}

fn sphere_density(p: &Params, cfg: &ExperimentConfig, workers: usize) -> Result<Outcome, Error> {
    let k = p.k.unwrap_or(2);
    let ns: Vec<usize> = p.n.clone().unwrap_or_else(|| vec![5]);
    let tol = cfg.tolerances.isolated_zero();
    let (zonal, _) = zonal_harmonic(k, POLE)?;
    let mut out = Outcome::default();
    let mut table = Table::new("density.csv", &["n", "grid", "value_at_pole", "density_radius", "zonal_radius", "ratio"]);
    let mut worst = 0.0f64;
    let mut worst_pole = 0.0f64;
    for &n in &ns {
        let f = isolated_zero_example(k, n as u32, POLE)?;
        let at_pole = f.eval(&POLE)?;
        let grid = 4 * minimum_resolution(&f);
        let with = measure_density_radius(&f, grid, workers)?;
        let alone = measure_density_radius(&zonal, grid, workers)?;
        let ratio = with.radius / alone.radius;
        worst = worst.max(ratio);
        worst_pole = worst_pole.max(at_pole.abs());
        table.push(vec![
            n.to_string(),
            grid.to_string(),
            num(at_pole),
            num(with.radius),
            num(alone.radius),
            num(ratio),
        ]);
    }
    out.checks.push(Check::new(
        "isolated zero at the pole",
        "isolated-zero example on the sphere",
        worst_pole <= 1e-10,
        Some(1e-10 - worst_pole),
        format!("largest |f(pole)| {worst_pole:.3e}"),
    ));
    out.checks.push(Check::new(
        "coarse-scale zero density kept",
        "isolated-zero example on the sphere",
        worst <= tol,
        Some(tol - worst),
        format!("largest density radius relative to the zonal harmonic {worst:.4}, tolerance {tol}"),
    ));
    out.tables.push(table);
    Ok(out)
}

fn is_homogeneous(u: &Polynomial) -> Option<u32> {
    let mut degrees = u.terms().map(|(mu, _)| mu.iter().sum::<u32>());
    let first = degrees.next()?;
    degrees.all(|g| g == first).then_some(first)
}

fn doubling(cfg: &ExperimentConfig) -> Result<Outcome, Error> {
    let p = &cfg.params;
    let d = p.d.unwrap_or(2);
    let u_text = p.u.clone().unwrap_or_else(|| "x1^2".into());
    let u = parse_polynomial(&u_text, d).map_err(Error::InvalidParameter)?;
    let center = p.center.clone().unwrap_or_else(|| vec![0.0; d]);
    let r = p.r.unwrap_or(0.5);
    let order = DEFAULT_ORDER.max(u.degree() as usize / 2 + d);
    let dr = doubling_ratio(|x| u.eval(x), &center, r, order)?;
    let mut out = Outcome::default();
    let mut table = Table::new("doubling.csv", &["u", "d", "r", "inner", "outer", "ratio", "error"]);
    table.push(vec![u_text.clone(), d.to_string(), num(r), num(dr.inner.value), num(dr.outer.value), num(dr.ratio), num(dr.error)]);
    let at_origin = center.iter().all(|&c| c == 0.0);
    match is_homogeneous(&u) {
        Some(deg) if at_origin => {
            let expected = 2f64.powi((deg as usize + d) as i32);
            let rel = (dr.ratio - expected).abs() / expected;
            let tol = cfg.tolerances.ratio();
            out.checks.push(Check::new(
                "doubling ratio of a homogeneous polynomial",
                "sharp doubling examples",
                rel <= tol,
                Some(tol - rel),
                format!("ratio {} against 2^(deg+d) = {expected}, relative error {rel:.3e}", dr.ratio),
            ));
        }
        _ => out.checks.push(Check::new(
            "doubling ratio recorded",
            "doubling estimate",
            dr.ratio.is_finite() && dr.ratio >= 1.0 - dr.error,
            Some(dr.ratio - 1.0 + dr.error),
            format!("ratio {} ± {}", dr.ratio, dr.error),
        )),
    }
    if let Some(m) = p.m {
        let gammas = p.gammas.clone().unwrap_or_else(|| vec![0.0; m]);
        let case = SignCase::of(&gammas);
        let wcfg = WeightConfig::calibrated(d, m, gammas.clone(), p.r0.unwrap_or(DEFAULT_R0), case)?;
        let v = verify_theorem2(&Subsolution::polynomial(u, gammas), &wcfg, &center)?;
        out.checks.push(Check::new(
            "doubling bound for subsolutions",
            "doubling estimate for higher-order subsolutions",
            v.pass,
            Some(v.margin),
            format!("ratio {} ± {} at r = {}, calibrated bound {}", v.ratio, v.error, wcfg.r, v.bound),
        ));
    }
    out.tables.push(table);
    Ok(out)
}

fn property_label(p: Lemma1Property) -> (&'static str, &'static str) {
    match p {
        Lemma1Property::BoundaryVanishing => ("(i)", "derivatives vanish at 3r"),
        Lemma1Property::AnnulusLowerBound => ("(ii)", "operator at least 1 on [r, 2r]"),
        Lemma1Property::Nonnegative => ("(iii)", "operator nonnegative on [r, 3r]"),
        Lemma1Property::BoundedInside => ("(iv)", "operator bounded inside B_r"),
    }
}

fn weight(cfg: &ExperimentConfig) -> Result<Outcome, Error> {
    let p = &cfg.params;
    let d = p.d.unwrap_or(2);
    let m = p.m.unwrap_or(2);
    let gammas = p.gammas.clone().unwrap_or_else(|| vec![0.0; m]);
    let r0 = p.r0.unwrap_or(DEFAULT_R0);
    let case = SignCase::of(&gammas);
    let wcfg = match p.alpha {
        Some(alpha) => WeightConfig::new(d, m, gammas, r0 / OUTER_FACTOR, r0, case, alpha)?,
        None => WeightConfig::calibrated(d, m, gammas, r0, case)?,
    };
    let report = verify_lemma1(&wcfg)?;
    let mut out = Outcome::default();
    for prop in [
        Lemma1Property::BoundaryVanishing,
        Lemma1Property::AnnulusLowerBound,
        Lemma1Property::Nonnegative,
        Lemma1Property::BoundedInside,
    ] {
        let (tag, what) = property_label(prop);
        let violation = report.violations.iter().find(|v| v.property == prop);
        let (margin, detail) = match (prop, violation) {
            (_, Some(v)) => (None, format!("violated at radius {} with value {}", v.radius, v.value)),
            (Lemma1Property::BoundaryVanishing, None) => {
                (Some(1e-9 - report.boundary_residual), format!("boundary residual {:.3e}", report.boundary_residual))
            }
            (Lemma1Property::AnnulusLowerBound, None) => {
                let a = report.annulus_min.unwrap_or(f64::NAN);
                (Some(a - 1.0), format!("minimum {a} on the annulus"))
            }
            (Lemma1Property::Nonnegative, None) => {
                let o = report.outer_min.unwrap_or(f64::NAN);
                (Some(o), format!("minimum {o} on [r, 3r]"))
            }
            (Lemma1Property::BoundedInside, None) => match report.c_measured {
                Some(c) => (None, format!("sup {c}")),
                None => (None, "not measured: normalization failed".into()),
            },
        };
        let pass = violation.is_none() && (prop != Lemma1Property::BoundedInside || report.c_measured.is_some());
        out.checks.push(Check::new(&format!("weight property {tag}: {what}"), "radial weight construction", pass, margin, detail));
    }
    let inv = lemma4_invariants(wcfg.alpha, m, d);
    out.checks.push(Check::new(
        "power-weight invariants",
        "positivity of iterated Laplacians of the power weight",
        inv.holds(),
        Some((inv.positivity + 1e-9).min(inv.main_term_ratio - 0.5)),
        format!(
            "positivity {}, main term {}, cascade {}, domination {}",
            inv.positivity, inv.main_term_ratio, inv.cascade, inv.domination_ratio
        ),
    ));
    let mut table = Table::new("violations.csv", &["property", "radius", "value"]);
    for v in &report.violations {
        table.push(vec![property_label(v.property).0.into(), num(v.radius), num(v.value)]);
    }
    out.tables.push(table);
    if report.passed() {
        let w = assemble_weight(&wcfg)?;
        let mut profile = Table::new("profile.csv", &["rho", "v", "script_l_v"]);
        let mut series = Vec::new();
        let outer = OUTER_FACTOR * wcfg.r;
        for i in 1..=300 {
            let rho = outer * i as f64 / 300.0;
            let l = w.script_l(rho);
            profile.push(vec![num(rho), num(w.eval(rho)), num(l)]);
            series.push((rho / wcfg.r, l));
        }
        out.tables.push(profile);
        out.plots.push(Plot {
            file: "profile.svg".into(),
            title: format!("operator applied to the weight, d = {d}, m = {m}"),
            x_label: "ρ / r".into(),
            y_label: "𝓛v".into(),
            series: vec![("𝓛v".into(), series)],
            reference: Some(1.0),
        });
    }
    out.documents.push(("lemma.json".into(), serde_json::to_string_pretty(&report).map_err(|e| Error::Serialization(e.to_string()))?));
    Ok(out)
}

fn theorem3(cfg: &ExperimentConfig) -> Result<Outcome, Error> {
    let p = &cfg.params;
    let k = p.k.unwrap_or(6) as usize;
    let d = p.d.unwrap_or(2);
    let lambdas = p.lambdas.clone().unwrap_or_else(|| vec![1e3, 1e4, 1e5, 1e6]);
    let mut out = Outcome::default();
    let mut table = Table::new("threshold.csv", &["lambda", "r_min", "r_star", "ratio", "r_min_sqrt_lambda"]);
    let mut products = Vec::new();
    for &l in &lambdas {
        let t = verify_theorem3_threshold(k, d, l, l)?;
        let prod = t.r_min * l.sqrt();
        products.push((l.log10(), prod));
        table.push(vec![num(l), num(t.r_min), num(t.r_star), num(t.ratio), num(prod)]);
    }
    let (lo, hi) = products.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &(_, p)| (a.min(p), b.max(p)));
    let variation = hi / lo - 1.0;
    let tol = cfg.tolerances.threshold();
    out.checks.push(Check::new(
        "threshold radius scales like 1/sqrt(lambda)",
        "polynomial weight threshold",
        variation < tol,
        Some(tol - variation),
        format!("r_min·√λ in [{lo:.6}, {hi:.6}], variation {variation:.3e}, tolerance {tol}"),
    ));
    out.plots.push(Plot {
        file: "threshold.svg".into(),
        title: format!("threshold radius, k = {k}, d = {d}"),
        x_label: "log10 λ".into(),
        y_label: "r_min · √λ".into(),
        series: vec![("r_min·√λ".into(), products)],
        reference: None,
    });
    out.tables.push(table);
    Ok(out)
}

fn gallery_label(i: usize) -> &'static str {
    ["1", "x1^2", "|x|^2", "|x|^4", "x1^4", "(x1 x2)^2", "(x1^2 - x2^2)^2"].get(i).copied().unwrap_or("?")
}

fn theorem4(cfg: &ExperimentConfig) -> Result<Outcome, Error> {
    let p = &cfg.params;
    let d = p.d.unwrap_or(2);
    let m = p.m.unwrap_or(2);
    let betas = p.betas.clone().unwrap_or_else(|| vec![0.0; m]);
    let r = p.r.unwrap_or(0.25);
    let center = p.center.clone().unwrap_or_else(|| vec![0.0; d]);
    let op = GeneralOperator2m::laplacian_power(d, m, &betas)?;
    let mut out = Outcome::default();
    let mut table = Table::new("gallery.csv", &["u", "subsolution", "ratio", "error", "ceiling", "pass", "note"]);
    let mut accepted = 0;
    let mut worst: Option<(f64, f64)> = None;
    let mut failures = Vec::new();
    for (i, u) in general_gallery(d).iter().enumerate() {
        match verify_theorem4(&op, u, &center, r) {
            Ok(v) => {
                accepted += 1;
                if !v.pass {
                    failures.push(gallery_label(i));
                }
                if worst.map_or(true, |(w, _)| v.ratio > w) {
                    worst = Some((v.ratio, v.ceiling));
                }
                table.push(vec![
                    gallery_label(i).into(),
                    "true".into(),
                    num(v.ratio),
                    num(v.error),
                    num(v.ceiling),
                    v.pass.to_string(),
                    String::new(),
                ]);
            }
            Err(e @ (Error::Precondition(_) | Error::VanishingMass { .. })) => {
                table.push(vec![
                    gallery_label(i).into(),
                    "false".into(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    e.to_string(),
                ]);
            }
            Err(e) => return Err(e),
        }
    }
    let (ratio, ceiling) = worst.unwrap_or((f64::NAN, f64::NAN));
    out.checks.push(Check::new(
        "doubling ratios below the calibrated ceiling",
        "doubling estimate for general elliptic operators",
        accepted > 0 && failures.is_empty(),
        worst.map(|_| ceiling - ratio),
        if accepted == 0 {
            "no gallery polynomial is a subsolution".into()
        } else if failures.is_empty() {
            format!("{accepted} subsolutions, largest ratio {ratio} against ceiling {ceiling}")
        } else {
            format!("ceiling exceeded by {}", failures.join(", "))
        },
    ));
    out.tables.push(table);
    Ok(out)
}

fn schrodinger(cfg: &ExperimentConfig) -> Result<Outcome, Error> {
    let p = &cfg.params;
    let d = p.d.unwrap_or(3);
    let ks = p.ks.clone().unwrap_or_else(|| (1..=20).collect());
    let r = p.r.unwrap_or(0.5);
    let scan = schrodinger_scan(d, ks, r)?;
    let mut out = Outcome::default();
    let mut table = Table::new("scan.csv", &["k", "eta", "sqrt_eta", "ratio", "log2_ratio", "bound"]);
    let mut worst_exact = 0.0f64;
    let mut bound_margin = f64::INFINITY;
    let mut series = Vec::new();
    for c in &scan.cases {
        let expected = 2.0 * c.k as f64 + d as f64;
        worst_exact = worst_exact.max((c.log2_ratio - expected).abs());
        if let Some(b) = c.bound {
            bound_margin = bound_margin.min(b.ln() - c.ratio.ln());
        }
        series.push((c.eta.sqrt(), c.ratio.ln()));
        table.push(vec![
            c.k.to_string(),
            num(c.eta),
            num(c.eta.sqrt()),
            num(c.ratio),
            num(c.log2_ratio),
            c.bound.map(num).unwrap_or_default(),
        ]);
    }
    out.checks.push(Check::new(
        "log2 doubling ratio equals 2k + d",
        "sharpness of the inverse-square potential bound",
        worst_exact <= 1e-9,
        Some(1e-9 - worst_exact),
        format!("largest deviation {worst_exact:.3e}"),
    ));
    let tol = cfg.tolerances.r_squared();
    out.checks.push(Check::new(
        "log ratio grows linearly in sqrt(eta)",
        "sharpness of the inverse-square potential bound",
        scan.cases.len() < 3 || scan.r_squared > tol,
        Some(scan.r_squared - tol),
        format!("slope {}, intercept {}, R^2 {}", scan.slope, scan.intercept, scan.r_squared),
    ));
    if bound_margin.is_finite() {
        out.checks.push(Check::new(
            "ratios below the calibrated potential bound",
            "doubling estimate with inverse-square potential",
            bound_margin >= 0.0,
            Some(bound_margin),
            format!("smallest log margin {bound_margin}"),
        ));
    }
    out.plots.push(Plot {
        file: "scan.svg".into(),
        title: format!("log doubling ratio, d = {d}"),
        x_label: "√η".into(),
        y_label: "ln ratio".into(),
        series: vec![("ln ratio".into(), series)],
        reference: None,
    });
    out.tables.push(table);
    Ok(out)
}

/// Random real gap polynomial with at most 10 frequency pairs up to 40.
fn random_gap_polynomial(rng: &mut ChaCha8Rng) -> Result<GapPolynomial, Error> {
    let pairs = rng.gen_range(1..=10);
    let mut freqs: Vec<i64> = Vec::new();
    while freqs.len() < pairs {
        let n = rng.gen_range(1..=40);
        if !freqs.contains(&n) {
            freqs.push(n);
        }
    }
    freqs.sort_unstable();
    let terms: Vec<(i64, f64, f64)> = freqs
        .iter()
        .map(|&n| {
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            (n, sign * rng.gen_range(0.1..1.0), rng.gen_range(-1.0..1.0))
        })
        .collect();
    GapPolynomial::from_real(&terms)
}

fn gap(cfg: &ExperimentConfig) -> Result<Outcome, Error> {
    let p = &cfg.params;
    let ns = p.n.clone().unwrap_or_else(|| (2..=16).collect());
    let interval = match p.interval {
        Some([lo, hi]) => Interval::new(lo, hi)?,
        None => Interval::centered(0.0, 0.1)?,
    };
    let delta = p.delta.unwrap_or(1e-3);
    let mut out = Outcome::default();

    let rows = sharpness_sweep(&ns, &interval, delta)?;
    let mut sweep = Table::new("sweep.csv", &["N", "interval_length", "delta", "certified", "lp_margin", "margin"]);
    let mut failed = Vec::new();
    let mut shortest = f64::INFINITY;
    let mut series = Vec::new();
    for (row, search) in &rows {
        sweep.push(vec![
            row.n.to_string(),
            num(row.interval_length),
            num(row.delta),
            row.certified.to_string(),
            num(row.lp_margin),
            num(row.margin),
        ]);
        series.push((row.n as f64, row.interval_length));
        match search {
            GapSearch::Feasible(cert) => {
                let json = cert.to_json()?;
                out.documents.push((format!("certificate_N{}.json", row.n), json));
                if row.certified {
                    shortest = shortest.min(row.interval_length);
                } else {
                    failed.push(row.n);
                }
            }
            GapSearch::Infeasible { .. } => failed.push(row.n),
        }
    }
    out.checks.push(Check::new(
        "positive gap polynomial certified for every N",
        "sharpness of the zero-density radius",
        failed.is_empty(),
        None,
        if failed.is_empty() {
            format!("{} certificates, shortest zero-free arc {shortest:.4} around |I| = {}", rows.len(), interval.len())
        } else {
            format!("no certificate for N in {failed:?}")
        },
    ));
    if failed.is_empty() {
        out.checks.push(Check::new(
            "zero-free arc does not shrink with N",
            "sharpness of the zero-density radius",
            shortest >= interval.len(),
            Some(shortest - interval.len()),
            format!("shortest arc {shortest} against |I| = {}", interval.len()),
        ));
    }
    out.tables.push(sweep);
    out.plots.push(Plot {
        file: "sweep.svg".into(),
        title: format!("zero-free arc, δ = {delta}"),
        x_label: "N".into(),
        y_label: "arc length".into(),
        series: vec![("arc".into(), series)],
        reference: Some(interval.len()),
    });

    let mut ko = Table::new("ko.csv", &["case", "frequencies", "zeros", "max_gap", "radius", "margin", "pass"]);
    let mut cases: Vec<(String, GapPolynomial)> = Vec::new();
    if let Some(s) = &p.spectrum {
        let mut freqs: Vec<i64> = s.iter().map(|n| n.abs()).collect();
        freqs.sort_unstable();
        freqs.dedup();
        let terms: Vec<(i64, f64, f64)> = freqs.iter().map(|&n| (n, 1.0, 0.0)).collect();
        cases.push(("spectrum".into(), GapPolynomial::from_real(&terms)?));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for i in 0..p.random_cases.unwrap_or(50) {
        cases.push((format!("random{i}"), random_gap_polynomial(&mut rng)?));
    }
    let mut worst = f64::INFINITY;
    let mut failures = 0;
    for (name, poly) in &cases {
        let grid = 4 * SAMPLES_PER_PERIOD * poly.max_frequency().ceil() as usize;
        let r = verify_ko_density(poly, grid)?;
        let freqs: Vec<String> =
            poly.spectrum().iter().filter(|nu| nu[0] > 0).map(|nu| nu[0].to_string()).collect();
        debug_assert_eq!(r.radius, ko_radius(poly.spectrum()));
        worst = worst.min(r.margin);
        failures += usize::from(!r.passed);
        ko.push(vec![
            name.clone(),
            freqs.join(" "),
            r.zeros.len().to_string(),
            num(r.max_gap),
            num(r.radius),
            num(r.margin),
            r.passed.to_string(),
        ]);
    }
    if !cases.is_empty() {
        out.checks.push(Check::new(
            "every arc of length 2R(S) contains a zero",
            "zero density of gap polynomials",
            failures == 0,
            Some(worst),
            format!("{} polynomials, {failures} failures, smallest margin {worst:.3e}", cases.len()),
        ));
    }
    out.tables.push(ko);
    Ok(out)
}

fn ibp(cfg: &ExperimentConfig) -> Result<Outcome, Error> {
    let p = &cfg.params;
    let ds = p.ds.clone().unwrap_or_else(|| vec![1, 2, 3]);
    let ms = p.ms.clone().unwrap_or_else(|| vec![1, 2, 3]);
    let mut out = Outcome::default();
    let mut table = Table::new("ibp.csv", &["d", "m", "case", "u", "lhs", "rhs", "residual", "error", "agrees"]);
    let mut worst = f64::INFINITY;
    let mut failures = Vec::new();
    let mut count = 0;
    for &d in &ds {
        let gallery = [
            ("1", Polynomial::constant(d, 1.0)),
            ("|x|^2", Polynomial::radius_squared(d)),
            ("x1^2", Polynomial::coordinate_square(d)),
        ];
        for &m in &ms {
            for case in [SignCase::A, SignCase::B] {
                let gamma = if case == SignCase::A { 0.0 } else { nodal_lab_core::weight::CASE_B_GAMMA };
                let wcfg = WeightConfig::calibrated(d, m, vec![gamma; m], DEFAULT_R0, case)?;
                for (label, u) in &gallery {
                    let r = check_integration_by_parts(u, &wcfg, 16)?;
                    count += 1;
                    worst = worst.min(10.0 * r.error - r.residual);
                    if !r.agrees() {
                        failures.push(format!("d={d} m={m} case {} u={label}", case.label()));
                    }
                    table.push(vec![
                        d.to_string(),
                        m.to_string(),
                        case.label().into(),
                        label.to_string(),
                        num(r.lhs),
                        num(r.rhs),
                        num(r.residual),
                        num(r.error),
                        r.agrees().to_string(),
                    ]);
                }
            }
        }
    }
    out.checks.push(Check::new(
        "integration by parts against the weight",
        "integration-by-parts identity",
        failures.is_empty(),
        Some(worst),
        if failures.is_empty() {
            format!("{count} cases within ten quadrature error estimates")
        } else {
            format!("mismatch for {}", failures.join("; "))
        },
    ));
    out.tables.push(table);
    Ok(out)
}
