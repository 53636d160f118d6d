//! Stable JSON documents emitted by the command-line front end.
//!
//! Keys are lowerCamelCase and the layout is versioned through
//! `schemaVersion`, currently 1; fields may be added in later versions, never
//! renamed or removed within one. Optional values are omitted rather than
//! serialized as null, so consumers can treat key presence as definedness.

use serde::{Deserialize, Serialize};

use crate::inference::InferenceResult;
use crate::measures::{sub_measures, Direction, MeasureReport};
use crate::simulation::SimulationResult;
use crate::table::{MarginalSummary, ProbSource};

/// Version stamped on every document this module builds.
pub const SCHEMA_VERSION: u32 = 1;

/// What kind of table the input file contained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputKind {
    /// Non-negative integer counts.
    Counts,
    /// Rows of probabilities summing to one.
    Probabilities,
}

impl InputKind {
    fn as_str(self) -> &'static str {
        match self {
            InputKind::Counts => "counts",
            InputKind::Probabilities => "probabilities",
        }
    }
}

/// Full analysis of one table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub input: InputDigest,
    pub marginals: MarginalsDoc,
    pub sub_measures: Vec<SubMeasureDoc>,
    pub gamma_total: f64,
    pub phi: Vec<PhiEntry>,
    pub psi: f64,
    pub tau: [f64; 2],
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub inference: Option<InferenceDoc>,
}

/// Identity of the analyzed input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct InputDigest {
    /// Table dimension.
    pub r: usize,
    /// Total count; absent for probability input.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub n: Option<u64>,
    /// "counts" or "probabilities".
    pub source: String,
}

/// The marginal summary the measures were computed from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MarginalsDoc {
    /// Total off-diagonal block mass.
    pub delta: f64,
    pub levels: Vec<LevelDoc>,
    pub row_marginals: Vec<f64>,
    pub col_marginals: Vec<f64>,
}

/// Cumulative and block quantities at one cut.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LevelDoc {
    /// Cut index, 1-based.
    pub i: usize,
    /// Cumulative row marginal through the cut.
    pub f1: f64,
    /// Cumulative column marginal through the cut.
    pub f2: f64,
    pub g1: f64,
    pub g2: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub gc1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub gc2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub weight: Option<f64>,
}

/// Per-cut sub-measure; every field beyond the index is absent when the cut
/// carries no off-diagonal mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SubMeasureDoc {
    /// Cut index, 1-based.
    pub i: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub gc1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub gc2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub weight: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub gamma: Option<f64>,
    /// "improving" or "deteriorating".
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub direction: Option<String>,
}

/// One power-divergence measure evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PhiEntry {
    pub lambda: f64,
    pub value: f64,
}

/// Estimate and Wald interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct InferenceDoc {
    pub estimate: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub se: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ci_low: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ci_high: Option<f64>,
    /// Confidence level of the bounds.
    pub level: f64,
    /// Sample size behind the standard error.
    pub n: u64,
    /// "sample" or "bayes".
    pub estimator_used: String,
    /// Smoothing parameter; present only for "bayes".
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub alpha: Option<f64>,
    pub degenerate_warning: bool,
    pub warnings: Vec<String>,
}

/// Assembles the analysis document. `inference` is `None` for probability
/// input, where no sample size exists.
pub fn build_analysis_report(
    s: &MarginalSummary,
    measures: &MeasureReport,
    inference: Option<&InferenceResult>,
    input_n: Option<u64>,
    input_kind: InputKind,
) -> AnalysisReport {
    let subs = sub_measures(s);
    let sub_docs = s
        .levels
        .iter()
        .zip(&subs)
        .map(|(l, sub)| SubMeasureDoc {
            i: l.level,
            gc1: l.gc1,
            gc2: l.gc2,
            weight: l.weight,
            gamma: sub.as_ref().map(|x| x.gamma),
            direction: sub.as_ref().map(|x| {
                match x.direction {
                    Direction::Improving => "improving",
                    Direction::Deteriorating => "deteriorating",
                }
                .to_string()
            }),
        })
        .collect();
    AnalysisReport {
        schema_version: SCHEMA_VERSION,
        input: InputDigest {
            r: s.r(),
            n: input_n,
            source: input_kind.as_str().to_string(),
        },
        marginals: MarginalsDoc {
            delta: s.delta,
            levels: s
                .levels
                .iter()
                .map(|l| LevelDoc {
                    i: l.level,
                    f1: l.f1,
                    f2: l.f2,
                    g1: l.g1,
                    g2: l.g2,
                    gc1: l.gc1,
                    gc2: l.gc2,
                    weight: l.weight,
                })
                .collect(),
            row_marginals: s.row_marginals.clone(),
            col_marginals: s.col_marginals.clone(),
        },
        sub_measures: sub_docs,
        gamma_total: measures.gamma_total,
        phi: measures
            .phi
            .iter()
            .map(|&(lambda, value)| PhiEntry { lambda, value })
            .collect(),
        psi: measures.psi,
        tau: [measures.tau.0, measures.tau.1],
        inference: inference.map(|inf| {
            let (estimator_used, alpha) = match inf.estimator_used {
                ProbSource::SampleProportion => ("sample".to_string(), None),
                ProbSource::BayesSmoothed { alpha } => ("bayes".to_string(), Some(alpha)),
            };
            InferenceDoc {
                estimate: inf.estimate,
                se: inf.se,
                ci_low: inf.ci_low,
                ci_high: inf.ci_high,
                level: inf.level,
                n: inf.n,
                estimator_used,
                alpha,
                degenerate_warning: inf.degenerate_warning,
                warnings: if inf.degenerate_warning {
                    vec![
                        "table is at marginal homogeneity at some cut; \
                         interval omitted"
                            .to_string(),
                    ]
                } else {
                    Vec::new()
                },
            }
        }),
    }
}

/// Full output of one simulation invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SimulateDoc {
    pub schema_version: u32,
    pub rho: f64,
    pub cutoffs: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    pub ci_level: f64,
    pub results: Vec<SimRow>,
}

/// One (shift, sample size) cell of the simulation grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SimRow {
    pub d: f64,
    pub n: u64,
    pub true_gamma: f64,
    pub coverage: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mean_estimate: Option<f64>,
    pub failed_trials: u64,
}

/// Assembles the simulation document. The worker count is deliberately not
/// recorded: output is identical for any value, and recording it would break
/// that byte-level contract.
pub fn build_simulate_doc(
    rho: f64,
    cutoffs: &[f64],
    trials: u64,
    seed: u64,
    ci_level: f64,
    results: &[SimulationResult],
) -> SimulateDoc {
    SimulateDoc {
        schema_version: SCHEMA_VERSION,
        rho,
        cutoffs: cutoffs.to_vec(),
        trials,
        seed,
        ci_level,
        results: results
            .iter()
            .map(|r| SimRow {
                d: r.d,
                n: r.n,
                true_gamma: r.true_gamma,
                coverage: r.coverage,
                mean_estimate: r.mean_estimate,
                failed_trials: r.failed_trials,
            })
            .collect(),
    }
}
