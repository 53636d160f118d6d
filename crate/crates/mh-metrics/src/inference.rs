//! Large-sample inference for the summary measure: delta-method variance,
//! Wald confidence intervals, and estimator selection.
//!
//! For a multinomial sample of size `n`, `sqrt(n) (Gamma_hat - Gamma)` is
//! asymptotically normal with variance `sigma^2 = sum_cells p_cell D_cell^2`,
//! where `D_cell` is the partial derivative of `Gamma` with respect to that
//! cell under the zero-degree homogeneous extension (so the centering term
//! `(sum p D)^2` vanishes identically). The derivative of the cut-`i` term
//! with respect to upper and lower block mass reduces to the level
//! coefficients
//!
//! ```text
//! A_i = (2 C_i + upsilon_1 Gc2 / sqrt(Gc1) - upsilon_2 sqrt(Gc2)) / (2 sqrt(C_i))
//! B_i = (2 C_i - upsilon_1 sqrt(Gc1) + upsilon_2 Gc1 / sqrt(Gc2)) / (2 sqrt(C_i))
//! ```
//!
//! with `C_i = upsilon_1^2 + upsilon_2^2`; an upper cell `(k, l)`, `k < l`,
//! sits in the blocks of cuts `k+1 ..= l` and its derivative telescopes to a
//! prefix sum of the `A_i` (lower cells use `B_i`). The same quantity is
//! available from [`variance_oracle_fd`], which knows nothing about the
//! closed form: it differentiates the homogeneous extension numerically and
//! assembles the full multinomial quadratic form. The two routes agree to
//! roughly square-root machine precision on interior tables and are kept
//! separate deliberately.
//!
//! The closed form needs every `Gc` off the boundary (the coefficients divide
//! by `sqrt(Gc)`) and every `C_i` away from zero (at marginal homogeneity the
//! sub-measure has a kink and no derivative exists). Boundary tables are
//! errors; tables at MH yield an estimate with a degeneracy warning instead
//! of an interval.

use crate::error::MhError;
use crate::measures::{gamma_raw, measure_gamma, NORMALIZER_SQ, SQRT_HALF};
use crate::table::{
    bayes_smooth, marginal_summary, to_probabilities, MarginalSummary, ProbSource, ProbTable,
    SquareTable,
};

/// Default Dirichlet smoothing parameter for Bayes estimation: small enough
/// to leave interior tables essentially untouched, large enough to pull
/// boundary conditionals off {0, 1}.
pub const DEFAULT_ALPHA: f64 = 1e-4;

/// Default step for the finite-difference variance oracle.
pub const DEFAULT_FD_STEP: f64 = 1e-6;

/// Below this, `C_i` counts as numerically zero and the cut sits at MH,
/// where the measure has a kink and the delta method breaks down.
pub const DEGENERACY_TOLERANCE: f64 = 1e-14;

/// Finite-difference steps below this would vanish in rounding.
const MIN_FD_STEP: f64 = 1e-12;

/// Per-cut derivative coefficients entering the variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelDerivs {
    /// Cut index, 1-based.
    pub level: usize,
    /// Derivative of the cut's contribution with respect to upper block mass.
    pub a: f64,
    /// Derivative with respect to lower block mass.
    pub b: f64,
    /// Squared Matusita distance `upsilon_1^2 + upsilon_2^2` at the cut.
    pub c: f64,
}

/// The asymptotic variance together with the pieces it was assembled from.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceBreakdown {
    /// Asymptotic variance of `sqrt(n) (Gamma_hat - Gamma)`.
    pub sigma2: f64,
    /// Row-major `r x r` grid of per-cell derivatives `D`; diagonal entries
    /// are zero. `sigma2 == sum p D^2`.
    pub per_cell: Vec<f64>,
    /// The level coefficients behind the grid.
    pub per_level: Vec<LevelDerivs>,
}

/// Checks that the delta-method (and finite-difference) variance is defined,
/// in order of severity: no off-diagonal mass at all, an empty block,
/// a conditional on the boundary, a cut at MH.
fn validate_for_variance(s: &MarginalSummary) -> Result<(), MhError> {
    if s.delta == 0.0 {
        return Err(MhError::MeasureUndefined { level: None });
    }
    if let Some(l) = s.levels.iter().find(|l| l.gc1.is_none()) {
        return Err(MhError::MeasureUndefined { level: Some(l.level) });
    }
    if let Some(l) = s.levels.iter().find(|l| l.g1 == 0.0 || l.g2 == 0.0) {
        return Err(MhError::BoundaryGc { level: l.level });
    }
    for l in &s.levels {
        let u1 = l.gc1.expect("block nonzero").sqrt() - SQRT_HALF;
        let u2 = l.gc2.expect("block nonzero").sqrt() - SQRT_HALF;
        if u1 * u1 + u2 * u2 < DEGENERACY_TOLERANCE {
            return Err(MhError::DegenerateAtMH { level: l.level });
        }
    }
    Ok(())
}

/// Delta-method asymptotic variance of `sqrt(n) (Gamma_hat - Gamma)` from the
/// closed-form gradient.
pub fn asymptotic_variance(p: &ProbTable) -> Result<VarianceBreakdown, MhError> {
    let s = marginal_summary(p);
    validate_for_variance(&s)?;
    let (gamma, _) = measure_gamma(&s).expect("validated");
    let r = p.r();
    let sqrt_norm = NORMALIZER_SQ.sqrt();

    let mut per_level = Vec::with_capacity(r - 1);
    // prefix_a[i] = sum of A over the first i cuts, so a cell spanning cuts
    // k+1 ..= l (0-based rows k < l) picks up prefix_a[l] - prefix_a[k].
    let mut prefix_a = vec![0.0; r];
    let mut prefix_b = vec![0.0; r];
    for (idx, l) in s.levels.iter().enumerate() {
        let gc1 = l.gc1.expect("validated");
        let gc2 = l.gc2.expect("validated");
        let u1 = gc1.sqrt() - SQRT_HALF;
        let u2 = gc2.sqrt() - SQRT_HALF;
        let c = u1 * u1 + u2 * u2;
        let root = 2.0 * c.sqrt();
        let a = (2.0 * c + u1 * gc2 / gc1.sqrt() - u2 * gc2.sqrt()) / root;
        let b = (2.0 * c - u1 * gc1.sqrt() + u2 * gc1 / gc2.sqrt()) / root;
        per_level.push(LevelDerivs { level: l.level, a, b, c });
        prefix_a[idx + 1] = prefix_a[idx] + a;
        prefix_b[idx + 1] = prefix_b[idx] + b;
    }

    let mut per_cell = vec![0.0; r * r];
    let mut sigma2 = 0.0;
    for k in 0..r {
        for l in k + 1..r {
            let span = (l - k) as f64;
            let d_up = (sqrt_norm * (prefix_a[l] - prefix_a[k]) - span * gamma) / s.delta;
            let d_lo = (sqrt_norm * (prefix_b[l] - prefix_b[k]) - span * gamma) / s.delta;
            per_cell[k * r + l] = d_up;
            per_cell[l * r + k] = d_lo;
            sigma2 += p.prob(k, l) * d_up * d_up + p.prob(l, k) * d_lo * d_lo;
        }
    }
    Ok(VarianceBreakdown { sigma2, per_cell, per_level })
}

/// Numerical variance oracle: central differences of the homogeneous
/// extension of `Gamma` (no renormalizing after perturbation), assembled into
/// the full multinomial quadratic form `sum p d^2 - (sum p d)^2`.
///
/// Shares its definedness checks with [`asymptotic_variance`] but none of the
/// derivative algebra. Accuracy is about `1e-10` relative on interior tables
/// and degrades as a block or conditional approaches the boundary.
pub fn variance_oracle_fd(p: &ProbTable, h: f64) -> Result<f64, MhError> {
    if !h.is_finite() || h < MIN_FD_STEP {
        return Err(MhError::BadStep { h });
    }
    let s = marginal_summary(p);
    validate_for_variance(&s)?;
    let r = p.r();
    let mut grid: Vec<f64> = p.probs().to_vec();
    let mut d = vec![0.0; r * r];
    for idx in 0..r * r {
        let orig = grid[idx];
        grid[idx] = orig + h;
        let up = gamma_raw(&grid, r);
        grid[idx] = orig - h;
        let down = gamma_raw(&grid, r);
        grid[idx] = orig;
        d[idx] = (up - down) / (2.0 * h);
    }
    let mut sum_pd2 = 0.0;
    let mut sum_pd = 0.0;
    for idx in 0..r * r {
        sum_pd2 += grid[idx] * d[idx] * d[idx];
        sum_pd += grid[idx] * d[idx];
    }
    Ok(sum_pd2 - sum_pd * sum_pd)
}

/// How to turn counts into the probability table used for both the estimate
/// and its variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EstimatorChoice {
    /// Sample proportions, falling back to Bayes smoothing with
    /// [`DEFAULT_ALPHA`] when any block is one-sided or empty. A fully
    /// diagonal table stays undefined; smoothing is not used to conjure
    /// departure out of a table that shows none.
    Auto,
    /// Sample proportions, no fallback.
    Sample,
    /// Dirichlet posterior-mean smoothing with the given parameter.
    Bayes { alpha: f64 },
}

/// Resolves the estimator choice against a table of counts.
pub fn resolve_estimator(t: &SquareTable, choice: EstimatorChoice) -> Result<ProbTable, MhError> {
    match choice {
        EstimatorChoice::Sample => Ok(to_probabilities(t)),
        EstimatorChoice::Bayes { alpha } => bayes_smooth(t, alpha),
        EstimatorChoice::Auto => {
            let p = to_probabilities(t);
            let s = marginal_summary(&p);
            if s.delta == 0.0 {
                return Err(MhError::MeasureUndefined { level: None });
            }
            if s.levels.iter().any(|l| l.g1 == 0.0 || l.g2 == 0.0) {
                bayes_smooth(t, DEFAULT_ALPHA)
            } else {
                Ok(p)
            }
        }
    }
}

/// A point estimate with its Wald interval, when one exists.
#[derive(Debug, Clone, PartialEq)]
pub struct InferenceResult {
    /// Estimated summary measure.
    pub estimate: f64,
    /// Standard error `sigma_hat / sqrt(n)`; `None` when degenerate.
    pub se: Option<f64>,
    /// Lower Wald bound; `None` when degenerate.
    pub ci_low: Option<f64>,
    /// Upper Wald bound; `None` when degenerate.
    pub ci_high: Option<f64>,
    /// Confidence level the bounds were built for.
    pub level: f64,
    /// Sample size behind the standard error.
    pub n: u64,
    /// Which probability table produced both estimate and variance.
    pub estimator_used: ProbSource,
    /// True when the table sits at MH at some cut: the estimate stands, but
    /// the delta method cannot produce an interval there.
    pub degenerate_warning: bool,
}

/// Wald interval for the summary measure from an already-resolved
/// probability table and the sample size behind it.
pub fn confidence_interval_for(
    p: &ProbTable,
    n: u64,
    level: f64,
) -> Result<InferenceResult, MhError> {
    if !(level > 0.0 && level < 1.0) {
        return Err(MhError::BadLevel { level });
    }
    if n == 0 {
        return Err(MhError::ZeroTotal);
    }
    let s = marginal_summary(p);
    let (estimate, _) = measure_gamma(&s)?;
    match asymptotic_variance(p) {
        Ok(v) => {
            let se = (v.sigma2 / n as f64).sqrt();
            let z = normal_quantile((1.0 + level) / 2.0).expect("level validated");
            Ok(InferenceResult {
                estimate,
                se: Some(se),
                ci_low: Some(estimate - z * se),
                ci_high: Some(estimate + z * se),
                level,
                n,
                estimator_used: p.source(),
                degenerate_warning: false,
            })
        }
        Err(MhError::DegenerateAtMH { .. }) => Ok(InferenceResult {
            estimate,
            se: None,
            ci_low: None,
            ci_high: None,
            level,
            n,
            estimator_used: p.source(),
            degenerate_warning: true,
        }),
        Err(e) => Err(e),
    }
}

/// Wald interval for the summary measure of a table of counts.
pub fn confidence_interval(
    t: &SquareTable,
    level: f64,
    choice: EstimatorChoice,
) -> Result<InferenceResult, MhError> {
    if !(level > 0.0 && level < 1.0) {
        return Err(MhError::BadLevel { level });
    }
    let p = resolve_estimator(t, choice)?;
    confidence_interval_for(&p, t.n(), level)
}

/// Standard normal quantile function, accurate to about `1e-15` relative.
///
/// Rational minimax approximation in three regimes (central, moderate tail,
/// far tail), following the classic PPND16 scheme; coefficients are checked
/// in the tests against an independent bisection of the normal CDF.
pub fn normal_quantile(p: f64) -> Result<f64, MhError> {
    if !(p > 0.0 && p < 1.0) {
        return Err(MhError::BadLevel { level: p });
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return Ok(q * poly(r, &CENTRAL_NUM) / poly(r, &CENTRAL_DEN));
    }
    let r = if q < 0.0 { p } else { 1.0 - p };
    let r = (-r.ln()).sqrt();
    let z = if r <= 5.0 {
        let r = r - 1.6;
        poly(r, &MIDDLE_NUM) / poly(r, &MIDDLE_DEN)
    } else {
        let r = r - 5.0;
        poly(r, &TAIL_NUM) / poly(r, &TAIL_DEN)
    };
    Ok(if q < 0.0 { -z } else { z })
}

fn poly(x: f64, coeffs: &[f64]) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

const CENTRAL_NUM: [f64; 8] = [
    3.387_132_872_796_366_608e0,
    1.331_416_678_917_843_774_5e2,
    1.971_590_950_306_551_442_7e3,
    1.373_169_376_550_946_112_5e4,
    4.592_195_393_154_987_145_7e4,
    6.726_577_092_700_870_085_3e4,
    3.343_057_558_358_812_810_5e4,
    2.509_080_928_730_122_672_7e3,
];
const CENTRAL_DEN: [f64; 8] = [
    1.0,
    4.231_333_070_160_091_125_2e1,
    6.871_870_074_920_579_083e2,
    5.394_196_021_424_751_107_7e3,
    2.121_379_430_158_659_586_7e4,
    3.930_789_580_009_271_061e4,
    2.872_908_573_572_194_267_4e4,
    5.226_495_278_852_854_561e3,
];
const MIDDLE_NUM: [f64; 8] = [
    1.423_437_110_749_683_577_34e0,
    4.630_337_846_156_545_295_9e0,
    5.769_497_221_460_691_405_5e0,
    3.647_848_324_763_204_605_04e0,
    1.270_458_252_452_368_382_58e0,
    2.417_807_251_774_506_117_7e-1,
    2.272_384_498_926_918_458_33e-2,
    7.745_450_142_783_414_076_4e-4,
];
const MIDDLE_DEN: [f64; 8] = [
    1.0,
    2.053_191_626_637_758_821_87e0,
    1.676_384_830_183_803_849_4e0,
    6.897_673_349_851_000_045_5e-1,
    1.481_039_764_274_800_745_9e-1,
    1.519_866_656_361_645_719_66e-2,
    5.475_938_084_995_344_946e-4,
    1.050_750_071_644_416_843_24e-9,
];
const TAIL_NUM: [f64; 8] = [
    6.657_904_643_501_103_777_2e0,
    5.463_784_911_164_114_369_9e0,
    1.784_826_539_917_291_335_8e0,
    2.965_605_718_285_048_912_3e-1,
    2.653_218_952_657_612_309_3e-2,
    1.242_660_947_388_078_438_6e-3,
    2.711_555_568_743_487_578_15e-5,
    2.010_334_399_292_288_132_65e-7,
];
const TAIL_DEN: [f64; 8] = [
    1.0,
    5.998_322_065_558_879_376_9e-1,
    1.369_298_809_227_358_053_1e-1,
    1.487_536_129_085_061_485_25e-2,
    7.868_691_311_456_132_591e-4,
    1.846_318_317_510_054_681_8e-5,
    1.421_511_758_316_445_888_7e-7,
    2.044_263_103_389_939_785_64e-15,
];
