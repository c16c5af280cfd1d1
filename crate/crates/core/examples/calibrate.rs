//! Regenerates `data/constants.toml`.
//!
//! Usage: `cargo run --release -p nodal-lab-core --example calibrate [OUT]`

use nodal_lab_core::constants::{
    Constants, DoublingConstants, GeneralOperatorEntry, GrowthEntry, SchrodingerEntry, WeightEntry,
};
use nodal_lab_core::doubling::{calibrate_general, calibrate_schrodinger, schrodinger_scan};
use nodal_lab_core::weight::{
    calibrate, constant_exponent, fit_growth, gamma_of, calibration_gammas, semifactorial_ratio, SignCase,
    CASE_B_GAMMA, DEFAULT_R0, OUTER_FACTOR,
};
use rayon::prelude::*;

const DIMS: std::ops::RangeInclusive<usize> = 1..=5;
const ORDERS: std::ops::RangeInclusive<usize> = 1..=5;
const K_PRIME: f64 = 1.0;
/// Ceiling of the general-operator check relative to the worst observed ratio.
const SAFETY: f64 = 2.0;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args().nth(1).unwrap_or_else(|| {
        concat!(env!("CARGO_MANIFEST_DIR"), "/data/constants.toml").to_string()
    });
    let jobs: Vec<(usize, usize, SignCase)> = DIMS
        .flat_map(|d| ORDERS.flat_map(move |m| [SignCase::A, SignCase::B].map(|c| (d, m, c))))
        .collect();
    let weight: Vec<WeightEntry> = jobs
        .par_iter()
        .map(|&(d, m, case)| {
            let c = calibrate(d, m, case, DEFAULT_R0, K_PRIME)?;
            eprintln!("d={d} m={m} case={} K={} alpha={:.3} C={:.3e}", case.label(), c.k, c.alpha, c.c_measured);
            Ok(WeightEntry {
                d,
                m,
                case,
                k: c.k,
                alpha: c.alpha,
                c_measured: c.c_measured,
                domination: c.domination,
                main_term: c.main_term,
            })
        })
        .collect::<nodal_lab_core::Result<_>>()?;

    let mut growth = Vec::new();
    for d in DIMS {
        for case in [SignCase::A, SignCase::B] {
            let pts: Vec<(f64, f64)> = weight
                .iter()
                .filter(|e| e.d == d && e.case == case)
                .map(|e| {
                    let gamma = gamma_of(&calibration_gammas(e.m, case));
                    (constant_exponent(d, e.m, gamma, DEFAULT_R0, case), e.c_measured)
                })
                .collect();
            let (c0, c1) = fit_growth(&pts);
            growth.push(GrowthEntry { d, case, c0, c1 });
        }
    }

    let general = (1..=3)
        .map(|m| {
            let max_ratio = calibrate_general(m)?;
            Ok(GeneralOperatorEntry { m, max_ratio, ceiling: SAFETY * max_ratio })
        })
        .collect::<nodal_lab_core::Result<Vec<_>>>()?;
    let schrodinger = (3..=5)
        .map(|d| {
            let scan = schrodinger_scan(d, 1..=20, 0.5)?;
            let (c0, c1) = calibrate_schrodinger(&scan);
            Ok(SchrodingerEntry { d, c0, c1 })
        })
        .collect::<nodal_lab_core::Result<Vec<_>>>()?;

    let constants = Constants {
        version: 1,
        r0: DEFAULT_R0,
        c: OUTER_FACTOR,
        case_b_gamma: CASE_B_GAMMA,
        k_prime: K_PRIME,
        semifactorial: semifactorial_ratio(*ORDERS.end(), DIMS),
        domination: weight.iter().map(|e| e.domination).fold(0.0, f64::max),
        weight,
        growth,
        doubling: DoublingConstants { safety: SAFETY, general, schrodinger },
    };
    std::fs::write(&out, constants.to_toml()?)?;
    eprintln!("wrote {out}");
    Ok(())
}
