//! Departure-from-MH measures built on the per-cut conditional pair
//! `(Gc1(i), Gc2(i))`.
//!
//! The sub-measure at cut `i` is the Matusita distance between that pair and
//! the MH point `(1/2, 1/2)`, rescaled to `[0, 1]`:
//!
//! ```text
//! upsilon_k(i) = sqrt(Gck(i)) - sqrt(1/2)
//! gamma_i      = sqrt( (2 + sqrt 2)/2 * (upsilon_1(i)^2 + upsilon_2(i)^2) )
//! ```
//!
//! and the summary measure weights cuts by their share of off-diagonal mass:
//! `Gamma = sum_i w_i gamma_i` with `w_i = (G1(i)+G2(i)) / delta`. `Gamma` is
//! 0 exactly under MH and 1 exactly when every cut is one-sided.
//!
//! Two baseline families are provided for comparison: the power-divergence
//! measure `Phi^(lambda)` (degree only) and the angular measure `Psi`
//! (direction only, in `[-1, 1]`), combined as the pair `tau = (Phi^(0), Psi)`.

use crate::error::MhError;
use crate::table::{MarginalSummary, ProbSource};

/// `normalizer^2 = (2 + sqrt 2) / 2`, the constant that maps the Matusita
/// distance to `sqrt((1/normalizer^2) * ...)`... precisely: `gamma_i =
/// sqrt(NORMALIZER_SQ * d^2)` where `d` is the Matusita distance to (1/2, 1/2).
pub(crate) const NORMALIZER_SQ: f64 = (2.0 + std::f64::consts::SQRT_2) / 2.0;

pub(crate) const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Two-point distributions may drift from summing to exactly 1 by this much.
const TWO_POINT_TOLERANCE: f64 = 1e-9;

/// Overshoot beyond a mathematical bound attributable to rounding; anything
/// worse is a bug and is not clamped.
const ROUNDING_SLACK: f64 = 1e-12;

fn check_two_point(gc1: f64, gc2: f64) -> Result<(), MhError> {
    if !gc1.is_finite() || !gc2.is_finite() || gc1 < 0.0 || gc2 < 0.0
        || (gc1 + gc2 - 1.0).abs() > TWO_POINT_TOLERANCE
    {
        return Err(MhError::NotTwoPoint { gc1, gc2 });
    }
    Ok(())
}

fn clamp_rounding(x: f64, lo: f64, hi: f64) -> f64 {
    if x > hi && x <= hi + ROUNDING_SLACK {
        hi
    } else if x < lo && x >= lo - ROUNDING_SLACK {
        lo
    } else {
        x
    }
}

/// Which side of a cut dominates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `Gc1 >= Gc2`: mass sits above the diagonal (ties included).
    Improving,
    /// `Gc1 < Gc2`: mass sits below the diagonal.
    Deteriorating,
}

/// The sub-measure at one cut.
#[derive(Debug, Clone, PartialEq)]
pub struct SubMeasure {
    /// Cut index, 1-based.
    pub level: usize,
    /// `sqrt(Gc1) - sqrt(1/2)`.
    pub upsilon1: f64,
    /// `sqrt(Gc2) - sqrt(1/2)`.
    pub upsilon2: f64,
    /// Normalized Matusita distance to the MH point, in `[0, 1]`.
    pub gamma: f64,
    /// Which side of the cut dominates.
    pub direction: Direction,
}

/// The sub-measure for one conditional pair.
///
/// `(1, 0)` and `(0, 1)` give exactly 1; `(1/2, 1/2)` gives exactly 0; the
/// function is symmetric in its arguments.
pub fn sub_measure_gamma(gc1: f64, gc2: f64) -> Result<f64, MhError> {
    check_two_point(gc1, gc2)?;
    let u1 = gc1.sqrt() - SQRT_HALF;
    let u2 = gc2.sqrt() - SQRT_HALF;
    let g = (NORMALIZER_SQ * (u1 * u1 + u2 * u2)).sqrt();
    Ok(clamp_rounding(g, 0.0, 1.0))
}

/// Per-cut sub-measures; `None` where the cut carries no off-diagonal mass.
pub fn sub_measures(s: &MarginalSummary) -> Vec<Option<SubMeasure>> {
    s.levels
        .iter()
        .map(|l| {
            let (gc1, gc2) = (l.gc1?, l.gc2?);
            let u1 = gc1.sqrt() - SQRT_HALF;
            let u2 = gc2.sqrt() - SQRT_HALF;
            let gamma = clamp_rounding((NORMALIZER_SQ * (u1 * u1 + u2 * u2)).sqrt(), 0.0, 1.0);
            let direction = if gc1 >= gc2 {
                Direction::Improving
            } else {
                Direction::Deteriorating
            };
            Some(SubMeasure {
                level: l.level,
                upsilon1: u1,
                upsilon2: u2,
                gamma,
                direction,
            })
        })
        .collect()
}

fn require_defined(s: &MarginalSummary) -> Result<(), MhError> {
    if s.delta == 0.0 {
        return Err(MhError::MeasureUndefined { level: None });
    }
    if let Some(l) = s.levels.iter().find(|l| l.gc1.is_none()) {
        return Err(MhError::MeasureUndefined { level: Some(l.level) });
    }
    Ok(())
}

/// The summary measure `Gamma = sum_i w_i gamma_i` with its sub-measures.
///
/// Fails with `MeasureUndefined` when the table is fully diagonal or any cut
/// carries no off-diagonal mass (smoothing upstream removes both conditions).
pub fn measure_gamma(s: &MarginalSummary) -> Result<(f64, Vec<SubMeasure>), MhError> {
    require_defined(s)?;
    let subs: Vec<SubMeasure> = sub_measures(s).into_iter().flatten().collect();
    let mut total = 0.0;
    for (l, sub) in s.levels.iter().zip(&subs) {
        total += l.weight.expect("delta > 0") * sub.gamma;
    }
    Ok((clamp_rounding(total, 0.0, 1.0), subs))
}

/// Direction of a power divergence between the conditional pair and (1/2, 1/2).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DivergenceDirection {
    /// `I((gc1, gc2); (1/2, 1/2))`.
    Forward,
    /// `I((1/2, 1/2); (gc1, gc2))`.
    Reversed,
}

/// Orders within this distance of the limit points 0 and -1/2 route to the
/// exact closed forms.
const LAMBDA_EPS: f64 = 1e-8;

fn check_lambda(lambda: f64) -> Result<(), MhError> {
    if !lambda.is_finite() || lambda <= -1.0 {
        return Err(MhError::BadLambda { lambda });
    }
    Ok(())
}

/// Power divergence `I^(lambda)` between a two-point distribution and
/// `(1/2, 1/2)`, in the direction given by `direction`.
///
/// `lambda = 0` (or within 1e-8 of it) is the Kullback-Leibler limit with the
/// `0 log 0 = 0` convention; `lambda = -1/2` uses the closed form
/// `4 (1 - sum_k sqrt(u_k v_k))`, twice the squared Matusita distance.
pub fn power_divergence(
    gc1: f64,
    gc2: f64,
    lambda: f64,
    direction: DivergenceDirection,
) -> Result<f64, MhError> {
    check_two_point(gc1, gc2)?;
    check_lambda(lambda)?;
    let (u, v) = match direction {
        DivergenceDirection::Forward => ([gc1, gc2], [0.5, 0.5]),
        DivergenceDirection::Reversed => ([0.5, 0.5], [gc1, gc2]),
    };
    Ok(power_divergence_raw(u, v, lambda))
}

fn power_divergence_raw(u: [f64; 2], v: [f64; 2], lambda: f64) -> f64 {
    if lambda.abs() < LAMBDA_EPS {
        // KL limit, with 0 log 0 = 0 and u > 0, v = 0 giving +inf.
        let mut acc = 0.0;
        for k in 0..2 {
            if u[k] > 0.0 {
                acc += u[k] * (u[k] / v[k]).ln();
            }
        }
        acc
    } else if (lambda + 0.5).abs() < LAMBDA_EPS {
        // Closed form at -1/2: twice the squared Matusita distance.
        4.0 * (1.0 - (u[0] * v[0]).sqrt() - (u[1] * v[1]).sqrt())
    } else {
        let mut acc = 0.0;
        for k in 0..2 {
            if u[k] > 0.0 {
                acc += u[k] * (u[k] / v[k]).powf(lambda);
            }
        }
        (acc - 1.0) / (lambda * (lambda + 1.0))
    }
}

/// The power-divergence-type measure `Phi^(lambda)` in `[0, 1]`.
///
/// `Phi^(lambda) = lambda (lambda+1) / (2^lambda - 1) * sum_i w_i I^(lambda)_i`
/// for `lambda != 0`, with the `1 / ln 2` limit at `lambda = 0`. Zero exactly
/// under MH, one exactly when every cut is one-sided.
pub fn measure_phi(s: &MarginalSummary, lambda: f64) -> Result<f64, MhError> {
    check_lambda(lambda)?;
    require_defined(s)?;
    let mut acc = 0.0;
    for l in &s.levels {
        let (gc1, gc2) = (l.gc1.expect("defined"), l.gc2.expect("defined"));
        acc += l.weight.expect("delta > 0")
            * power_divergence_raw([gc1, gc2], [0.5, 0.5], lambda);
    }
    let phi = if lambda.abs() < LAMBDA_EPS {
        acc / std::f64::consts::LN_2
    } else {
        acc * lambda * (lambda + 1.0) / ((2.0f64).powf(lambda) - 1.0)
    };
    Ok(clamp_rounding(phi, 0.0, 1.0))
}

/// The directional measure `Psi` in `[-1, 1]`.
///
/// `Psi = (4/pi) sum_i w_i (theta_i - pi/4)` with
/// `theta_i = arccos(G1(i) / sqrt(G1(i)^2 + G2(i)^2))`. It is +1 when all
/// off-diagonal mass sits below the diagonal at every cut, -1 when all sits
/// above, and 0 for any symmetric table.
pub fn measure_psi(s: &MarginalSummary) -> Result<f64, MhError> {
    require_defined(s)?;
    let mut acc = 0.0;
    for l in &s.levels {
        let theta = (l.g1 / l.g1.hypot(l.g2)).acos();
        acc += l.weight.expect("delta > 0") * (theta - std::f64::consts::FRAC_PI_4);
    }
    Ok(clamp_rounding(acc * 4.0 / std::f64::consts::PI, -1.0, 1.0))
}

/// The pair `tau = (Phi^(0), Psi)`: degree and direction together.
/// `(0, 0)` exactly under MH.
pub fn measure_tau(s: &MarginalSummary) -> Result<(f64, f64), MhError> {
    Ok((measure_phi(s, 0.0)?, measure_psi(s)?))
}

/// Everything the measure layer can say about one table.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureReport {
    /// Summary measure `Gamma` in `[0, 1]`.
    pub gamma_total: f64,
    /// Per-cut sub-measures, all defined.
    pub subs: Vec<SubMeasure>,
    /// `Phi^(lambda)` per requested order, sorted by order; always contains
    /// the order 0 entry.
    pub phi: Vec<(f64, f64)>,
    /// Directional measure.
    pub psi: f64,
    /// `(phi[0], psi)`.
    pub tau: (f64, f64),
    /// Provenance of the probabilities the measures were computed from.
    pub estimator: ProbSource,
}

/// Computes [`MeasureReport`] with `Phi` evaluated at `lambdas` (order 0 is
/// always included since `tau` needs it).
pub fn measure_report(s: &MarginalSummary, lambdas: &[f64]) -> Result<MeasureReport, MhError> {
    for &l in lambdas {
        check_lambda(l)?;
    }
    let (gamma_total, subs) = measure_gamma(s)?;
    let mut orders: Vec<f64> = lambdas.iter().map(|&l| if l == 0.0 { 0.0 } else { l }).collect();
    orders.push(0.0);
    orders.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    orders.dedup();
    let mut phi = Vec::with_capacity(orders.len());
    for l in orders {
        phi.push((l, measure_phi(s, l)?));
    }
    let psi = measure_psi(s)?;
    let phi0 = phi
        .iter()
        .find(|(l, _)| *l == 0.0)
        .expect("order 0 always present")
        .1;
    Ok(MeasureReport {
        gamma_total,
        subs,
        phi,
        psi,
        tau: (phi0, psi),
        estimator: s.source,
    })
}

/// `Gamma` evaluated directly on a raw, not necessarily normalized,
/// non-negative grid. `Gamma` is invariant under positive scaling of the
/// grid, which is what makes this evaluation meaningful; the finite-difference
/// variance oracle differentiates through it.
pub(crate) fn gamma_raw(probs: &[f64], r: usize) -> f64 {
    let mut total = 0.0;
    let mut delta = 0.0;
    for idx in 0..r - 1 {
        let mut g1 = 0.0;
        let mut g2 = 0.0;
        for s in 0..=idx {
            for t in idx + 1..r {
                g1 += probs[s * r + t];
                g2 += probs[t * r + s];
            }
        }
        let block = g1 + g2;
        delta += block;
        if block > 0.0 {
            let u1 = (g1 / block).sqrt() - SQRT_HALF;
            let u2 = (g2 / block).sqrt() - SQRT_HALF;
            total += block * (NORMALIZER_SQ * (u1 * u1 + u2 * u2)).sqrt();
        }
    }
    total / delta
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::{
        bayes_smooth, marginal_summary, to_probabilities, ProbTable, SquareTable,
    };
    use approx::assert_abs_diff_eq;

    fn table(rows: &[&[u64]]) -> SquareTable {
        SquareTable::from_counts(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    fn summary_of(rows: &[&[u64]]) -> MarginalSummary {
        marginal_summary(&to_probabilities(&table(rows)))
    }

    fn table2_probs() -> ProbTable {
        let w = |k: u64| k as f64 / 32.0;
        ProbTable::from_probs(vec![
            vec![0.0, w(1), w(7), w(1), w(1), 0.0],
            vec![0.0, 0.0, w(1), w(1), w(1), 0.0],
            vec![0.0, w(1), 0.0, w(1), w(1), 0.0],
            vec![0.0, w(1), w(1), 0.0, w(1), 0.0],
            vec![0.0, w(1), w(1), w(1), 0.0, 0.0],
            vec![0.0, w(1), w(1), w(7), w(1), 0.0],
        ])
        .unwrap()
    }

    #[test]
    fn sub_measure_hits_exact_endpoints() {
        assert_eq!(sub_measure_gamma(1.0, 0.0).unwrap(), 1.0);
        assert_eq!(sub_measure_gamma(0.0, 1.0).unwrap(), 1.0);
        assert_eq!(sub_measure_gamma(0.5, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn sub_measure_quarter_three_quarters() {
        // Value cross-checked by direct evaluation of the closed form.
        let g = sub_measure_gamma(0.25, 0.75).unwrap();
        assert_abs_diff_eq!(g, 0.341081377402109, epsilon = 1e-15);
        // Symmetric in its arguments.
        assert_eq!(g, sub_measure_gamma(0.75, 0.25).unwrap());
    }

    #[test]
    fn sub_measure_rejects_non_distributions() {
        assert!(matches!(
            sub_measure_gamma(0.7, 0.7),
            Err(MhError::NotTwoPoint { .. })
        ));
        assert!(matches!(
            sub_measure_gamma(-0.1, 1.1),
            Err(MhError::NotTwoPoint { .. })
        ));
        assert!(matches!(
            sub_measure_gamma(f64::NAN, 0.5),
            Err(MhError::NotTwoPoint { .. })
        ));
    }

    #[test]
    fn gamma_is_zero_for_mh_table() {
        let s = summary_of(&[
            &[0, 10, 10, 10],
            &[10, 0, 10, 10],
            &[10, 10, 0, 10],
            &[10, 10, 10, 0],
        ]);
        let (g, subs) = measure_gamma(&s).unwrap();
        assert_eq!(g, 0.0);
        assert!(subs.iter().all(|x| x.gamma == 0.0));
        assert!(subs.iter().all(|x| x.direction == Direction::Improving));
    }

    #[test]
    fn gamma_matches_hand_computed_values() {
        // Every cut of this table conditions to (0.25, 0.75).
        let s = summary_of(&[
            &[0, 10, 10, 10],
            &[30, 0, 10, 10],
            &[30, 30, 0, 10],
            &[30, 30, 30, 0],
        ]);
        let (g, subs) = measure_gamma(&s).unwrap();
        assert_abs_diff_eq!(g, 0.341081377402109, epsilon = 1e-15);
        assert!(subs.iter().all(|x| x.direction == Direction::Deteriorating));

        let s = marginal_summary(&table2_probs());
        let (g, _) = measure_gamma(&s).unwrap();
        assert_abs_diff_eq!(g, 0.483040688701054, epsilon = 1e-15);
    }

    #[test]
    fn gamma_equals_weighted_sum_of_sub_measures() {
        let s = summary_of(&[&[1, 9, 2], &[4, 2, 8], &[3, 7, 5]]);
        let (g, subs) = measure_gamma(&s).unwrap();
        let recomputed: f64 = s
            .levels
            .iter()
            .zip(&subs)
            .map(|(l, sub)| l.weight.unwrap() * sub.gamma)
            .sum();
        assert_abs_diff_eq!(g, recomputed, epsilon = 1e-12);
    }

    #[test]
    fn gamma_fails_on_undefined_input() {
        let s = summary_of(&[&[5, 0, 0], &[0, 7, 0], &[0, 0, 3]]);
        assert_eq!(
            measure_gamma(&s).unwrap_err(),
            MhError::MeasureUndefined { level: None }
        );
        let s = summary_of(&[&[1, 0, 0], &[0, 1, 4], &[0, 3, 1]]);
        assert_eq!(
            measure_gamma(&s).unwrap_err(),
            MhError::MeasureUndefined { level: Some(1) }
        );
    }

    #[test]
    fn gamma_is_one_at_maximal_departure() {
        // All off-diagonal mass above the diagonal: every cut is one-sided.
        let s = summary_of(&[&[0, 3, 9], &[0, 0, 4], &[0, 0, 0]]);
        let (g, _) = measure_gamma(&s).unwrap();
        assert_eq!(g, 1.0);
    }

    #[test]
    fn kl_divergence_is_asymmetric_at_quarter_point() {
        let fwd = power_divergence(0.25, 0.75, 0.0, DivergenceDirection::Forward).unwrap();
        let rev = power_divergence(0.25, 0.75, 0.0, DivergenceDirection::Reversed).unwrap();
        assert_abs_diff_eq!(fwd, 0.130812035941137, epsilon = 1e-15);
        assert_abs_diff_eq!(rev, 0.143841036225890, epsilon = 1e-15);
        assert!((fwd - rev).abs() > 1e-3);
    }

    #[test]
    fn power_divergence_vanishes_at_equal_distributions() {
        for lambda in [-0.9, -0.5, -1e-12, 0.0, 0.5, 1.0, 2.0, 7.5] {
            let v = power_divergence(0.5, 0.5, lambda, DivergenceDirection::Forward).unwrap();
            assert_abs_diff_eq!(v, 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn power_divergence_limits_are_continuous() {
        for (a, b) in [(0.25, 0.75), (0.9, 0.1), (0.6, 0.4)] {
            for dir in [DivergenceDirection::Forward, DivergenceDirection::Reversed] {
                let at0 = power_divergence(a, b, 0.0, dir).unwrap();
                let near0 = power_divergence(a, b, 2e-8, dir).unwrap();
                assert_abs_diff_eq!(at0, near0, epsilon = 1e-7);
                let athalf = power_divergence(a, b, -0.5, dir).unwrap();
                let nearhalf = power_divergence(a, b, -0.5 + 2e-8, dir).unwrap();
                assert_abs_diff_eq!(athalf, nearhalf, epsilon = 1e-7);
            }
        }
    }

    #[test]
    fn power_divergence_handles_boundary_pairs() {
        // 0 log 0 = 0: forward KL from (1, 0) is finite.
        let v = power_divergence(1.0, 0.0, 0.0, DivergenceDirection::Forward).unwrap();
        assert_abs_diff_eq!(v, std::f64::consts::LN_2, epsilon = 1e-15);
        // Reversed KL onto a zero cell diverges.
        let v = power_divergence(1.0, 0.0, 0.0, DivergenceDirection::Reversed).unwrap();
        assert!(v.is_infinite() && v > 0.0);
    }

    #[test]
    fn power_divergence_rejects_bad_lambda() {
        assert!(matches!(
            power_divergence(0.5, 0.5, -1.0, DivergenceDirection::Forward),
            Err(MhError::BadLambda { .. })
        ));
        assert!(matches!(
            power_divergence(0.5, 0.5, f64::NAN, DivergenceDirection::Forward),
            Err(MhError::BadLambda { .. })
        ));
    }

    #[test]
    fn phi_zero_for_mh_one_at_maximum() {
        let s = summary_of(&[
            &[0, 10, 10, 10],
            &[10, 0, 10, 10],
            &[10, 10, 0, 10],
            &[10, 10, 10, 0],
        ]);
        assert_eq!(measure_phi(&s, 0.0).unwrap(), 0.0);
        let one_sided = summary_of(&[&[0, 3, 9], &[0, 0, 4], &[0, 0, 0]]);
        for lambda in [-0.5, 0.0, 1.0, 2.0] {
            assert_abs_diff_eq!(measure_phi(&one_sided, lambda).unwrap(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn phi_and_psi_match_hand_computed_values() {
        let s = summary_of(&[
            &[0, 10, 10, 10],
            &[30, 0, 10, 10],
            &[30, 30, 0, 10],
            &[30, 30, 30, 0],
        ]);
        assert_abs_diff_eq!(measure_phi(&s, 0.0).unwrap(), 0.188721875540867, epsilon = 1e-15);
        assert_abs_diff_eq!(measure_psi(&s).unwrap(), 0.590334470601733, epsilon = 1e-15);
        let tau = measure_tau(&s).unwrap();
        assert_eq!(tau.0, measure_phi(&s, 0.0).unwrap());
        assert_eq!(tau.1, measure_psi(&s).unwrap());
    }

    #[test]
    fn psi_hits_signed_extremes() {
        // All mass below the diagonal: maximum lower-marginal inhomogeneity.
        let lower = summary_of(&[&[0, 0, 0], &[3, 0, 0], &[9, 4, 0]]);
        assert_abs_diff_eq!(measure_psi(&lower).unwrap(), 1.0, epsilon = 1e-15);
        // All mass above: tau = (1, -1).
        let upper = summary_of(&[&[0, 3, 9], &[0, 0, 4], &[0, 0, 0]]);
        let tau = measure_tau(&upper).unwrap();
        assert_abs_diff_eq!(tau.0, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(tau.1, -1.0, epsilon = 1e-15);
    }

    #[test]
    fn psi_is_zero_for_symmetric_tables() {
        let s = summary_of(&[&[1, 2, 3], &[2, 5, 4], &[3, 4, 9]]);
        assert_abs_diff_eq!(measure_psi(&s).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn tau_is_origin_under_mh() {
        let s = summary_of(&[
            &[0, 10, 10, 10],
            &[10, 0, 10, 10],
            &[10, 10, 0, 10],
            &[10, 10, 10, 0],
        ]);
        let (phi0, psi) = measure_tau(&s).unwrap();
        // Phi is exact here; Psi picks up one rounding step through acos.
        assert_eq!(phi0, 0.0);
        assert_abs_diff_eq!(psi, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn report_includes_order_zero_and_sorts_orders() {
        let s = summary_of(&[&[1, 9, 2], &[4, 2, 8], &[3, 7, 5]]);
        let rep = measure_report(&s, &[1.0, -0.5]).unwrap();
        let orders: Vec<f64> = rep.phi.iter().map(|(l, _)| *l).collect();
        assert_eq!(orders, vec![-0.5, 0.0, 1.0]);
        assert_eq!(rep.tau.0, rep.phi[1].1);
        assert_eq!(rep.tau.1, rep.psi);
        let (g, _) = measure_gamma(&s).unwrap();
        assert_eq!(rep.gamma_total, g);
    }

    #[test]
    fn report_survives_smoothed_boundary_tables() {
        let t = table(&[
            &[41, 2, 19, 0, 0],
            &[8, 0, 4, 0, 0],
            &[12, 4, 14, 3, 0],
            &[0, 1, 1, 3, 0],
            &[29, 7, 11, 6, 0],
        ]);
        // The raw table has an empty block at the top cut; smoothing fixes it.
        let raw = marginal_summary(&to_probabilities(&t));
        assert!(measure_gamma(&raw).is_ok()); // blocks are nonzero, only Gc1(4) = 0
        let smoothed = marginal_summary(&bayes_smooth(&t, 1e-4).unwrap());
        let rep = measure_report(&smoothed, &[]).unwrap();
        assert_abs_diff_eq!(rep.gamma_total, 0.510556392826019, epsilon = 1e-12);
    }

    #[test]
    fn gamma_raw_is_scale_invariant() {
        let p = [0.0, 0.2, 0.1, 0.15, 0.0, 0.05, 0.3, 0.15, 0.05];
        let scaled: Vec<f64> = p.iter().map(|x| x * 7.25).collect();
        assert_abs_diff_eq!(gamma_raw(&p, 3), gamma_raw(&scaled, 3), epsilon = 1e-14);
    }
}
