//! Coverage study for the Wald interval under a discretized latent-shift
//! model.
//!
//! A latent pair `(Z1, Z2)` is bivariate normal with unit variances,
//! correlation `rho`, `E Z1 = 0`, and `E Z2 = d`; both coordinates are cut at
//! the same thresholds into `r` ordered categories, giving an `r x r` table
//! whose departure from MH grows with the shift `d` (and is exactly zero at
//! `d = 0`, where the pair is exchangeable). Cell probabilities come from
//! one-dimensional Gauss-Legendre quadrature of
//!
//! ```text
//! p_ij = integral over the i-th band of
//!        phi(u) * (Phi((c_j - d - rho u) / s) - Phi((c_{j-1} - d - rho u) / s)) du
//! ```
//!
//! with `s = sqrt(1 - rho^2)`, the unbounded bands truncated at `|u| = 9`.
//!
//! [`run_coverage`] repeatedly samples a multinomial table from those
//! probabilities, builds the Wald interval with the automatic estimator, and
//! counts how often the interval covers the true measure. Every trial draws
//! from its own ChaCha stream keyed by `(seed, scenario, trial index)`, and
//! per-trial results are reduced in trial order, so the outcome is one exact
//! sequence of bits for a given seed regardless of the worker count.

use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::Binomial;
use rayon::prelude::*;

use crate::error::MhError;
use crate::inference::{confidence_interval, EstimatorChoice};
use crate::measures::measure_gamma;
use crate::table::{marginal_summary, ProbTable, SquareTable};

/// Correlation of the latent pair in the reference design.
pub const DEFAULT_RHO: f64 = 0.2;

/// Thresholds of the reference design: six categories per margin.
pub const DEFAULT_CUTOFFS: [f64; 5] = [-1.2, -0.6, 0.0, 0.6, 1.2];

/// Latent mass beyond this many standard deviations is ignored by the
/// quadrature (about 1e-19 in total).
const TRUNCATION: f64 = 9.0;

/// Quadrature panels never exceed this width.
const MAX_PANEL_WIDTH: f64 = 0.5;

/// One latent-shift design: a shift, a sample size, and the latent geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationScenario {
    /// Mean shift of the second latent coordinate.
    pub d: f64,
    /// Multinomial sample size per trial.
    pub n: u64,
    /// Latent correlation, `|rho| < 1`.
    pub rho: f64,
    /// Strictly increasing thresholds; `k` cutoffs give `k + 1` categories.
    pub cutoffs: Vec<f64>,
}

impl SimulationScenario {
    /// The reference design (`rho = 0.2`, six categories) at the given shift
    /// and sample size.
    pub fn new(d: f64, n: u64) -> Self {
        SimulationScenario {
            d,
            n,
            rho: DEFAULT_RHO,
            cutoffs: DEFAULT_CUTOFFS.to_vec(),
        }
    }

    fn validate(&self) -> Result<(), MhError> {
        if !self.d.is_finite() {
            return Err(MhError::BadScenario {
                reason: format!("shift must be finite, got {}", self.d),
            });
        }
        if !self.rho.is_finite() || self.rho.abs() >= 1.0 {
            return Err(MhError::BadScenario {
                reason: format!("correlation must satisfy |rho| < 1, got {}", self.rho),
            });
        }
        if self.cutoffs.is_empty() {
            return Err(MhError::BadScenario {
                reason: "at least one cutoff is required".to_string(),
            });
        }
        if self.cutoffs.iter().any(|c| !c.is_finite())
            || self.cutoffs.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(MhError::BadScenario {
                reason: "cutoffs must be finite and strictly increasing".to_string(),
            });
        }
        if self.n == 0 {
            return Err(MhError::BadScenario {
                reason: "sample size must be positive".to_string(),
            });
        }
        Ok(())
    }
}

/// Outcome of one coverage run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    /// Shift the tables were sampled under.
    pub d: f64,
    /// Sample size per trial.
    pub n: u64,
    /// Measure of the sampling distribution itself.
    pub true_gamma: f64,
    /// Share of interval-producing trials whose interval covers
    /// [`true_gamma`](Self::true_gamma); NaN if no trial produced one.
    pub coverage: f64,
    /// Mean estimate over trials that produced one; `None` if none did.
    pub mean_estimate: Option<f64>,
    /// Trials that produced no interval (undefined measure or a degenerate
    /// variance).
    pub failed_trials: u64,
}

fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * std::f64::consts::FRAC_1_SQRT_2)
}

fn norm_pdf(u: f64) -> f64 {
    (-0.5 * u * u).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Nodes and weights of 20-point Gauss-Legendre quadrature on `[-1, 1]`,
/// found once by Newton iteration on the Legendre recurrence.
fn gl20() -> &'static [(f64, f64)] {
    static NODES: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    NODES.get_or_init(|| gauss_legendre(20))
}

fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    // Evaluates P_n and its derivative via the three-term recurrence.
    let eval = |x: f64| {
        let mut p0 = 1.0;
        let mut p1 = x;
        for j in 2..=n {
            let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
            p0 = p1;
            p1 = p2;
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        (p1, dp)
    };
    let mut out = vec![(0.0, 0.0); n];
    for k in 0..n / 2 {
        // Tricomi's starting guess puts Newton within its quadratic basin.
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = eval(x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = eval(x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out[k] = (x, w);
        out[n - 1 - k] = (-x, w);
    }
    if n % 2 == 1 {
        let (_, dp) = eval(0.0);
        out[n / 2] = (0.0, 2.0 / (dp * dp));
    }
    out
}

/// Cell probabilities of the discretized latent pair, renormalized after
/// truncation.
pub fn cell_probs(scenario: &SimulationScenario) -> Result<ProbTable, MhError> {
    scenario.validate()?;
    let r = scenario.cutoffs.len() + 1;
    let s = (1.0 - scenario.rho * scenario.rho).sqrt();
    let mut rows = vec![vec![0.0f64; r]; r];
    for (i, row) in rows.iter_mut().enumerate() {
        let lo = if i == 0 { -TRUNCATION } else { scenario.cutoffs[i - 1] };
        let hi = if i == r - 1 { TRUNCATION } else { scenario.cutoffs[i] };
        if hi <= lo {
            continue;
        }
        let panels = ((hi - lo) / MAX_PANEL_WIDTH).ceil().max(1.0) as usize;
        let width = (hi - lo) / panels as f64;
        for panel in 0..panels {
            let a = lo + panel as f64 * width;
            for &(t, w) in gl20() {
                let u = a + (t + 1.0) * 0.5 * width;
                let scale = norm_pdf(u) * w * 0.5 * width;
                // One pass over the cutoffs covers the whole row of columns.
                let mut lower = 0.0;
                for (j, &c) in scenario.cutoffs.iter().enumerate() {
                    let upper = norm_cdf((c - scenario.d - scenario.rho * u) / s);
                    row[j] += scale * (upper - lower);
                    lower = upper;
                }
                row[r - 1] += scale * (1.0 - lower);
            }
        }
    }
    for row in &mut rows {
        for cell in row.iter_mut() {
            *cell = cell.max(0.0);
        }
    }
    ProbTable::from_probs(rows)
}

/// The measure of the sampling distribution itself.
pub fn true_measure(scenario: &SimulationScenario) -> Result<f64, MhError> {
    let p = cell_probs(scenario)?;
    measure_gamma(&marginal_summary(&p)).map(|(g, _)| g)
}

/// Draws multinomial counts by peeling cells off with conditional binomials;
/// the last cell absorbs whatever remains, so the total is exact.
fn sample_multinomial(rng: &mut ChaCha12Rng, n: u64, probs: &[f64]) -> Vec<u64> {
    let mut counts = vec![0u64; probs.len()];
    let mut remaining = n;
    let mut mass_left = 1.0f64;
    for (idx, &p) in probs.iter().enumerate() {
        if idx == probs.len() - 1 || remaining == 0 || mass_left <= 0.0 {
            counts[idx] = remaining;
            break;
        }
        let q = (p / mass_left).clamp(0.0, 1.0);
        let draw = rng.sample(Binomial::new(remaining, q).expect("q clamped to [0, 1]"));
        counts[idx] = draw;
        remaining -= draw;
        mass_left -= p;
    }
    counts
}

/// One ChaCha generator per scenario; trials then select independent streams
/// of it, so results depend only on `(seed, scenario, trial)`.
fn scenario_rng(seed: u64, scenario: &SimulationScenario) -> ChaCha12Rng {
    let key = seed
        ^ scenario.n.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ scenario.d.to_bits().wrapping_mul(0xD1B5_4A32_D192_ED03);
    ChaCha12Rng::seed_from_u64(key)
}

struct TrialOutcome {
    estimate: Option<f64>,
    covered: Option<bool>,
}

/// Estimates the coverage of the Wald interval at `ci_level` under the given
/// scenario.
///
/// `workers == 0` uses the global thread pool; any other value runs on a
/// dedicated pool of that size. The result is bit-identical across worker
/// counts and runs.
pub fn run_coverage(
    scenario: &SimulationScenario,
    trials: u64,
    ci_level: f64,
    seed: u64,
    workers: usize,
) -> Result<SimulationResult, MhError> {
    scenario.validate()?;
    if trials == 0 {
        return Err(MhError::BadScenario {
            reason: "at least one trial is required".to_string(),
        });
    }
    if !(ci_level > 0.0 && ci_level < 1.0) {
        return Err(MhError::BadLevel { level: ci_level });
    }
    let probs = cell_probs(scenario)?;
    let true_gamma = measure_gamma(&marginal_summary(&probs)).map(|(g, _)| g)?;
    let r = probs.r();
    let base_rng = scenario_rng(seed, scenario);

    let run = || {
        (0..trials)
            .into_par_iter()
            .map(|trial| {
                let mut rng = base_rng.clone();
                rng.set_stream(trial);
                let flat = sample_multinomial(&mut rng, scenario.n, probs.probs());
                let rows: Vec<Vec<u64>> =
                    flat.chunks(r).map(|chunk| chunk.to_vec()).collect();
                let t = SquareTable::from_counts(rows).expect("sampled counts are square");
                match confidence_interval(&t, ci_level, EstimatorChoice::Auto) {
                    Ok(res) => TrialOutcome {
                        covered: res.ci_low.zip(res.ci_high).map(|(lo, hi)| {
                            lo <= true_gamma && true_gamma <= hi
                        }),
                        estimate: Some(res.estimate),
                    },
                    Err(_) => TrialOutcome {
                        estimate: None,
                        covered: None,
                    },
                }
            })
            .collect::<Vec<_>>()
    };
    let outcomes = if workers == 0 {
        run()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| MhError::BadScenario {
                reason: format!("cannot build thread pool: {e}"),
            })?
            .install(run)
    };

    // Collected in trial order above; folding sequentially keeps every sum
    // independent of how the trials were scheduled.
    let mut covered = 0u64;
    let mut with_interval = 0u64;
    let mut estimate_sum = 0.0f64;
    let mut estimates = 0u64;
    for o in &outcomes {
        if let Some(c) = o.covered {
            with_interval += 1;
            covered += c as u64;
        }
        if let Some(e) = o.estimate {
            estimate_sum += e;
            estimates += 1;
        }
    }
    Ok(SimulationResult {
        d: scenario.d,
        n: scenario.n,
        true_gamma,
        coverage: covered as f64 / with_interval as f64,
        mean_estimate: (estimates > 0).then(|| estimate_sum / estimates as f64),
        failed_trials: trials - with_interval,
    })
}
