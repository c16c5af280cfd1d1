use nodal_lab_core::gap::{
    certify_positivity, ko_radius, sharpness_sweep, verify_ko_density, GapPolynomial, GapSearch, Interval, SpectrumSet,
    SAMPLES_PER_PERIOD,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random real polynomial with `|S| ≤ 2·max_pairs` and frequencies in `1..=max_freq`.
fn random_gap_polynomial(rng: &mut ChaCha8Rng, max_pairs: usize, max_freq: i64) -> GapPolynomial {
    let pairs = rng.gen_range(1..=max_pairs);
    let mut freqs: Vec<i64> = Vec::new();
    while freqs.len() < pairs {
        let n = rng.gen_range(1..=max_freq);
        if !freqs.contains(&n) {
            freqs.push(n);
        }
    }
    let terms: Vec<(i64, f64, f64)> = freqs
        .iter()
        .map(|&n| {
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            (n, sign * rng.gen_range(0.1..1.0), rng.gen_range(-1.0..1.0))
        })
        .collect();
    GapPolynomial::from_real(&terms).unwrap()
}

#[test]
fn density_holds_on_random_gap_polynomials() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6b6f);
    for i in 0..200 {
        let p = random_gap_polynomial(&mut rng, 10, 40);
        assert!(p.spectrum().len() <= 20);
        let grid = 4 * SAMPLES_PER_PERIOD * p.max_frequency() as usize;
        let r = verify_ko_density(&p, grid).unwrap();
        assert!(r.passed, "case {i}: gap {} > 2R = {}", r.max_gap, 2.0 * r.radius);
    }
}

#[test]
fn density_is_boundary_tight_for_cosines() {
    for n in 1..=32 {
        let p = GapPolynomial::cosine(n).unwrap();
        let r = verify_ko_density(&p, SAMPLES_PER_PERIOD * n as usize).unwrap();
        assert!(r.passed);
        assert!(r.margin.abs() < 1e-12, "N={n}: margin {}", r.margin);
    }
}

#[test]
fn sweep_keeps_a_fixed_interval() {
    let interval = Interval::centered(0.0, 0.1).unwrap();
    let ns: Vec<usize> = (2..=16).collect();
    let rows = sharpness_sweep(&ns, &interval, 1e-3).unwrap();
    for (row, search) in &rows {
        let cert = match search {
            GapSearch::Feasible(c) => c,
            GapSearch::Infeasible { lp_margin } => panic!("N={} infeasible at {lp_margin}", row.n),
        };
        assert!(row.certified, "N={}", row.n);
        let p = cert.polynomial().unwrap();
        assert!(certify_positivity(p.poly(), &interval, cert.step));
        assert!(row.interval_length >= interval.len());
    }
}

fn spectrum_strategy() -> impl Strategy<Value = Vec<i64>> {
    prop::collection::btree_set(1i64..60, 1..12).prop_map(|s| s.into_iter().collect())
}

proptest! {
    #[test]
    fn radius_is_additive_over_disjoint_unions(a in spectrum_strategy(), b in spectrum_strategy()) {
        let b: Vec<i64> = b.into_iter().filter(|n| !a.contains(n)).collect();
        prop_assume!(!b.is_empty());
        let sa = SpectrumSet::symmetric(a).unwrap();
        let sb = SpectrumSet::symmetric(b).unwrap();
        let joint = ko_radius(&sa.union(&sb).unwrap());
        prop_assert!((joint - ko_radius(&sa) - ko_radius(&sb)).abs() <= 1e-14 * joint);
    }

    #[test]
    fn removing_a_frequency_shrinks_the_radius(a in spectrum_strategy(), pick in 0usize..12) {
        prop_assume!(a.len() >= 2);
        let s = SpectrumSet::symmetric(a.clone()).unwrap();
        let smaller = s.without(&[a[pick % a.len()]]).unwrap();
        prop_assert!(ko_radius(&smaller) < ko_radius(&s));
    }
}
