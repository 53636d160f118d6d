//! Acceptance gate: each test pins one required end-to-end behavior with
//! explicit tolerances. These are the checks a release must pass; the unit
//! and property suites cover the same ground at finer grain.

use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use mh_metrics::inference::{
    asymptotic_variance, confidence_interval, variance_oracle_fd, EstimatorChoice, DEFAULT_ALPHA,
    DEFAULT_FD_STEP,
};
use mh_metrics::measures::{
    measure_gamma, measure_psi, power_divergence, sub_measure_gamma, DivergenceDirection,
};
use mh_metrics::simulation::{run_coverage, true_measure, SimulationScenario};
use mh_metrics::table::{
    marginal_summary, parse_prob_table, parse_table, to_probabilities, MarginalSummary,
    SquareTable,
};
use mh_metrics::viz::{build_viz_spec, render_svg, PanelColor, VizStyle};
use mh_metrics::MhError;

const SEED: u64 = 0x6d68_6d65_7472_6963;

fn fixture(name: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn count_summary(name: &str) -> (SquareTable, MarginalSummary) {
    let t = parse_table(&fixture(name)).unwrap();
    let s = marginal_summary(&to_probabilities(&t));
    (t, s)
}

fn random_interior_table(rng: &mut ChaCha12Rng, r: usize) -> SquareTable {
    let rows: Vec<Vec<u64>> = (0..r)
        .map(|i| {
            (0..r)
                .map(|j| if i == j { rng.random_range(0..=60) } else { rng.random_range(1..=60) })
                .collect()
        })
        .collect();
    SquareTable::from_counts(rows).unwrap()
}

/// A known 6x6 probability table must reproduce its reference per-cut
/// coordinates, sizes, and labels to three decimals, in under a second.
#[test]
fn a1_known_probability_table_visualization_values() {
    let started = Instant::now();

    let p = parse_prob_table(&fixture("table2_probs.csv")).unwrap();
    let s = marginal_summary(&p);
    let subs = mh_metrics::measures::sub_measures(&s);
    let spec = build_viz_spec(&s, &subs, VizStyle::default()).unwrap();

    let expected = [
        ("1.000", "0.000", "0.156", "1.000"),
        ("0.750", "0.250", "0.250", "0.341"),
        ("0.500", "0.500", "0.188", "0.000"),
        ("0.250", "0.750", "0.250", "0.341"),
        ("0.000", "1.000", "0.156", "1.000"),
    ];
    assert_eq!(spec.levels.len(), expected.len());
    for (level, (x, y, size, label)) in spec.levels.iter().zip(expected) {
        assert!(level.defined);
        assert_eq!(format!("{:.3}", level.x), x, "x at cut {}", level.level);
        assert_eq!(format!("{:.3}", level.y), y, "y at cut {}", level.level);
        assert_eq!(format!("{:.3}", level.size), size, "size at cut {}", level.level);
        assert_eq!(level.label, label, "label at cut {}", level.level);
    }

    assert!(started.elapsed() < Duration::from_secs(1));
}

/// The directed divergence at the split (0.25, 0.75) takes different values
/// in the two directions: 0.131 forward, 0.144 reversed, to three decimals.
#[test]
fn a2_divergence_direction_values() {
    let forward = power_divergence(0.25, 0.75, 0.0, DivergenceDirection::Forward).unwrap();
    let reversed = power_divergence(0.25, 0.75, 0.0, DivergenceDirection::Reversed).unwrap();
    assert_eq!(format!("{forward:.3}"), "0.131");
    assert_eq!(format!("{reversed:.3}"), "0.144");
}

/// Interval estimates for the two treatment-arm tables: point estimate
/// within 0.001, standard error within 0.002, interval ends within 0.002.
#[test]
fn a3_interval_estimates_for_treatment_tables() {
    let (t, _) = count_summary("table1a.csv");
    let inf = confidence_interval(&t, 0.95, EstimatorChoice::Auto).unwrap();
    assert!((inf.estimate - 0.308).abs() <= 1e-3);
    assert!((inf.se.unwrap() - 0.078).abs() <= 2e-3);
    assert!((inf.ci_low.unwrap() - 0.156).abs() <= 2e-3);
    assert!((inf.ci_high.unwrap() - 0.460).abs() <= 2e-3);

    let (t, _) = count_summary("table1b.csv");
    let inf = confidence_interval(&t, 0.95, EstimatorChoice::Bayes { alpha: DEFAULT_ALPHA }).unwrap();
    assert!((inf.estimate - 0.511).abs() <= 1e-3);
    assert!((inf.se.unwrap() - 0.059).abs() <= 2e-3);
    assert!((inf.ci_low.unwrap() - 0.395).abs() <= 2e-3);
    assert!((inf.ci_high.unwrap() - 0.627).abs() <= 2e-3);
}

/// Artificial tables: the symmetric table measures exactly zero with every
/// cut at the center; the shifted family all measure 0.341 within 0.001,
/// and the uniformly shifted one sits entirely in the red upper-left.
#[test]
fn a4_artificial_tables_measure_and_pattern() {
    let (_, s) = count_summary("table4a.csv");
    let (gamma, _) = measure_gamma(&s).unwrap();
    assert_eq!(gamma, 0.0);
    let subs = mh_metrics::measures::sub_measures(&s);
    let spec = build_viz_spec(&s, &subs, VizStyle::default()).unwrap();
    for level in &spec.levels {
        assert_eq!(level.x, 0.5);
        assert_eq!(level.y, 0.5);
        assert_eq!(level.label, "0.000");
        assert_eq!(level.color, PanelColor::Blue);
    }

    for name in ["table4b.csv", "table6a.csv", "table6b.csv", "table6c.csv", "table6d.csv"] {
        let (_, s) = count_summary(name);
        let (gamma, _) = measure_gamma(&s).unwrap();
        assert!((gamma - 0.341).abs() <= 1e-3, "{name}: {gamma}");
    }

    let (_, s) = count_summary("table4b.csv");
    let subs = mh_metrics::measures::sub_measures(&s);
    let spec = build_viz_spec(&s, &subs, VizStyle::default()).unwrap();
    for level in &spec.levels {
        assert!(level.x < level.y, "upper-left of center");
        assert_eq!(level.color, PanelColor::Red);
        assert_eq!(level.label, "0.341");
    }
}

/// The closed-form variance agrees with the finite-difference oracle to
/// 1e-6 relative on at least 100 random non-degenerate tables, within 30 s.
#[test]
fn a5_variance_matches_finite_difference_oracle() {
    let started = Instant::now();
    let mut rng = ChaCha12Rng::seed_from_u64(SEED);
    let mut checked = 0usize;

    for r in [4usize, 6] {
        let mut done = 0usize;
        while done < 60 {
            let t = random_interior_table(&mut rng, r);
            let p = to_probabilities(&t);
            let closed = match asymptotic_variance(&p) {
                Ok(b) => b.sigma2,
                Err(MhError::DegenerateAtMH { .. }) => continue,
                Err(e) => panic!("variance failed on a random interior table: {e}"),
            };
            let numerical = variance_oracle_fd(&p, DEFAULT_FD_STEP).unwrap();
            let rel = (closed - numerical).abs() / closed.max(f64::MIN_POSITIVE);
            assert!(rel < 1e-6, "r={r}, closed={closed}, fd={numerical}, rel={rel}");
            done += 1;
            checked += 1;
        }
    }

    assert!(checked >= 100);
    assert!(started.elapsed() < Duration::from_secs(30));
}

/// The latent-normal scenario: zero true value at no shift, strictly
/// increasing in the shift, near-nominal interval coverage at n=3600 and
/// visible undercoverage at n=36. Whole test under five minutes.
#[test]
fn a6_simulation_true_values_and_coverage() {
    let started = Instant::now();

    let scenario = |d: f64, n: u64| SimulationScenario::new(d, n);

    assert!(true_measure(&scenario(0.0, 1)).unwrap().abs() < 1e-12);

    let grid = [0.0, 0.25, 0.5, 0.75, 1.0];
    let values: Vec<f64> = grid
        .iter()
        .map(|&d| true_measure(&scenario(d, 1)).unwrap())
        .collect();
    for pair in values.windows(2) {
        assert!(pair[0] < pair[1], "true value not increasing: {values:?}");
    }

    let dense = run_coverage(&scenario(1.0, 3600), 10_000, 0.95, SEED, 0).unwrap();
    assert_eq!(dense.failed_trials, 0);
    assert!(
        (0.94..=0.96).contains(&dense.coverage),
        "coverage at n=3600: {}",
        dense.coverage
    );

    let sparse = run_coverage(&scenario(1.0, 36), 10_000, 0.95, SEED, 0).unwrap();
    assert!(sparse.coverage < 0.94, "coverage at n=36: {}", sparse.coverage);

    assert!(started.elapsed() < Duration::from_secs(300));
}

/// Randomized invariants, re-driven here with a fixed generator: distance
/// postulates on 10^4 triples, measure ranges, diagonal-cell invariance,
/// count-scale invariance, transpose antisymmetry of the direction measure,
/// per-cut conditionals summing to one, and weights summing to one.
#[test]
fn a7_randomized_invariants() {
    let mut rng = ChaCha12Rng::seed_from_u64(SEED ^ 0xa7);

    let matusita = |p: (f64, f64), q: (f64, f64)| -> f64 {
        let d0 = p.0.sqrt() - q.0.sqrt();
        let d1 = p.1.sqrt() - q.1.sqrt();
        (d0 * d0 + d1 * d1).sqrt()
    };

    for _ in 0..10_000 {
        let a = rng.random_range(0.0..=1.0);
        let b = rng.random_range(0.0..=1.0);
        let c = rng.random_range(0.0..=1.0);
        let p = (a, 1.0 - a);
        let q = (b, 1.0 - b);
        let s = (c, 1.0 - c);
        assert_eq!(matusita(p, p), 0.0);
        assert_eq!(matusita(p, q), matusita(q, p));
        assert!(matusita(p, q) <= matusita(p, s) + matusita(s, q) + 1e-12);
        assert_eq!(
            sub_measure_gamma(a, 1.0 - a).unwrap(),
            sub_measure_gamma(1.0 - a, a).unwrap()
        );
    }

    for _ in 0..300 {
        let r = rng.random_range(2usize..=6);
        let t = random_interior_table(&mut rng, r);
        let s = marginal_summary(&to_probabilities(&t));

        let mut weight_sum = 0.0;
        for l in &s.levels {
            assert!((l.gc1.unwrap() + l.gc2.unwrap() - 1.0).abs() <= 1e-12);
            weight_sum += l.weight.unwrap();
        }
        assert!((weight_sum - 1.0).abs() <= 1e-12);

        let (gamma, subs) = measure_gamma(&s).unwrap();
        assert!((0.0..=1.0 + 1e-12).contains(&gamma));
        for sub in &subs {
            assert!((0.0..=1.0 + 1e-12).contains(&sub.gamma));
        }

        // Replacing the diagonal moves nothing.
        let mut rows: Vec<Vec<u64>> = (0..r)
            .map(|i| (0..r).map(|j| t.count(i, j)).collect())
            .collect();
        for (i, row) in rows.iter_mut().enumerate() {
            row[i] = rng.random_range(0..=100);
        }
        let changed = SquareTable::from_counts(rows).unwrap();
        let (gamma_changed, _) =
            measure_gamma(&marginal_summary(&to_probabilities(&changed))).unwrap();
        assert!((gamma - gamma_changed).abs() <= 1e-12);

        // Scaling every count moves nothing.
        let k = rng.random_range(2u64..=50);
        let (gamma_scaled, _) =
            measure_gamma(&marginal_summary(&to_probabilities(&t.scaled(k).unwrap()))).unwrap();
        assert!((gamma - gamma_scaled).abs() <= 1e-12);

        // Transposing flips only the direction measure.
        let st = marginal_summary(&to_probabilities(&t.transposed()));
        let (gamma_t, _) = measure_gamma(&st).unwrap();
        assert!((gamma - gamma_t).abs() <= 1e-12);
        let psi = measure_psi(&s).unwrap();
        let psi_t = measure_psi(&st).unwrap();
        assert!((psi + psi_t).abs() <= 1e-12);
    }
}

/// Rendering and simulation are reproducible byte for byte, and the worker
/// count leaves no trace in the simulation document.
#[test]
fn a8_byte_deterministic_outputs() {
    let (_, s) = count_summary("table1a.csv");
    let subs = mh_metrics::measures::sub_measures(&s);
    let first = render_svg(&build_viz_spec(&s, &subs, VizStyle::default()).unwrap()).unwrap();
    let second = render_svg(&build_viz_spec(&s, &subs, VizStyle::default()).unwrap()).unwrap();
    assert_eq!(first.as_bytes(), second.as_bytes());

    let scenario = SimulationScenario::new(0.5, 36);
    let rows_one = vec![run_coverage(&scenario, 256, 0.95, SEED, 1).unwrap()];
    let rows_eight = vec![run_coverage(&scenario, 256, 0.95, SEED, 8).unwrap()];
    let doc_one = mh_metrics::report::build_simulate_doc(
        scenario.rho, &scenario.cutoffs, 256, SEED, 0.95, &rows_one,
    );
    let doc_eight = mh_metrics::report::build_simulate_doc(
        scenario.rho, &scenario.cutoffs, 256, SEED, 0.95, &rows_eight,
    );
    let one = serde_json::to_string_pretty(&doc_one).unwrap();
    let eight = serde_json::to_string_pretty(&doc_eight).unwrap();
    assert_eq!(one.as_bytes(), eight.as_bytes());
}
