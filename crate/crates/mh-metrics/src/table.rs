//! Square contingency tables and their cumulative block summaries.
//!
//! For an r×r table of cell probabilities `p[i][j] = Pr(X = i, Y = j)`, every
//! quantity downstream of this module is built from the off-diagonal block
//! masses at each category cut `i` in `1..r`:
//!
//! * `G1(i) = Pr(X <= i, Y >= i+1)` — mass in the upper-right block,
//! * `G2(i) = Pr(X >= i+1, Y <= i)` — mass in the lower-left block,
//! * `Gc1(i) = G1(i) / (G1(i) + G2(i))` and symmetrically `Gc2(i)`,
//! * `delta = sum_i (G1(i) + G2(i))` with weights `w_i = (G1(i)+G2(i)) / delta`.
//!
//! Marginal homogeneity (equal row and column marginals) holds exactly when
//! `Gc1(i) = Gc2(i) = 1/2` at every cut. All types here are immutable after
//! construction and all functions are pure.

use crate::error::MhError;

/// Raw r×r observed counts. Immutable once built; `n >= 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SquareTable {
    r: usize,
    counts: Vec<u64>,
    n: u64,
}

impl SquareTable {
    /// Validates and builds a table from rows of counts.
    pub fn from_counts(rows: Vec<Vec<u64>>) -> Result<Self, MhError> {
        if rows.is_empty() {
            return Err(MhError::EmptyTable);
        }
        let r = rows.len();
        if r < 2 {
            return Err(MhError::TooSmall { r });
        }
        for (idx, row) in rows.iter().enumerate() {
            if row.len() != r {
                return Err(MhError::NonSquare {
                    rows: r,
                    row: idx + 1,
                    cols: row.len(),
                });
            }
        }
        let mut total: u128 = 0;
        let mut counts = Vec::with_capacity(r * r);
        for row in &rows {
            for &c in row {
                total += u128::from(c);
                counts.push(c);
            }
        }
        if total == 0 {
            return Err(MhError::ZeroTotal);
        }
        let n = u64::try_from(total).map_err(|_| MhError::TotalOverflow)?;
        Ok(SquareTable { r, counts, n })
    }

    /// Table dimension.
    pub fn r(&self) -> usize {
        self.r
    }

    /// Total count.
    pub fn n(&self) -> u64 {
        self.n
    }

    /// Count in cell `(i, j)`, 0-based.
    pub fn count(&self, i: usize, j: usize) -> u64 {
        self.counts[i * self.r + j]
    }

    /// Row-major view of all counts.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// The same table with every count multiplied by `k`.
    pub fn scaled(&self, k: u64) -> Result<SquareTable, MhError> {
        let mut rows = Vec::with_capacity(self.r);
        for i in 0..self.r {
            let mut row = Vec::with_capacity(self.r);
            for j in 0..self.r {
                row.push(
                    self.count(i, j)
                        .checked_mul(k)
                        .ok_or(MhError::TotalOverflow)?,
                );
            }
            rows.push(row);
        }
        SquareTable::from_counts(rows)
    }

    /// The transposed table.
    pub fn transposed(&self) -> SquareTable {
        let mut counts = vec![0u64; self.r * self.r];
        for i in 0..self.r {
            for j in 0..self.r {
                counts[j * self.r + i] = self.count(i, j);
            }
        }
        SquareTable {
            r: self.r,
            counts,
            n: self.n,
        }
    }
}

/// How a probability table was produced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProbSource {
    /// Sample proportions `n_ij / n`, or probabilities supplied directly.
    SampleProportion,
    /// Dirichlet posterior mean `(n_ij + alpha) / (n + r^2 alpha)`.
    BayesSmoothed { alpha: f64 },
}

/// r×r cell probabilities: non-negative, summing to 1 within 1e-12.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbTable {
    r: usize,
    probs: Vec<f64>,
    source: ProbSource,
}

/// Largest deviation of a supplied probability table's sum from 1 that is
/// still accepted (and renormalized away) by [`ProbTable::from_probs`].
pub const PROB_SUM_TOLERANCE: f64 = 1e-6;

impl ProbTable {
    /// Validates and builds a probability table from rows of reals.
    ///
    /// Cells must be finite and non-negative; the total must be within
    /// [`PROB_SUM_TOLERANCE`] of 1 and is renormalized to machine precision.
    pub fn from_probs(rows: Vec<Vec<f64>>) -> Result<Self, MhError> {
        if rows.is_empty() {
            return Err(MhError::EmptyTable);
        }
        let r = rows.len();
        if r < 2 {
            return Err(MhError::TooSmall { r });
        }
        for (idx, row) in rows.iter().enumerate() {
            if row.len() != r {
                return Err(MhError::NonSquare {
                    rows: r,
                    row: idx + 1,
                    cols: row.len(),
                });
            }
        }
        let mut probs = Vec::with_capacity(r * r);
        for (i, row) in rows.iter().enumerate() {
            for (j, &p) in row.iter().enumerate() {
                if !p.is_finite() || p < 0.0 {
                    return Err(MhError::BadProbability {
                        row: i + 1,
                        col: j + 1,
                        value: p,
                    });
                }
                probs.push(p);
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PROB_SUM_TOLERANCE {
            return Err(MhError::NotNormalized { sum });
        }
        if sum == 0.0 {
            return Err(MhError::ZeroTotal);
        }
        for p in &mut probs {
            *p /= sum;
        }
        Ok(ProbTable {
            r,
            probs,
            source: ProbSource::SampleProportion,
        })
    }

    /// Table dimension.
    pub fn r(&self) -> usize {
        self.r
    }

    /// Probability of cell `(i, j)`, 0-based.
    pub fn prob(&self, i: usize, j: usize) -> f64 {
        self.probs[i * self.r + j]
    }

    /// Row-major view of all cell probabilities.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Provenance of the probabilities.
    pub fn source(&self) -> ProbSource {
        self.source
    }

    /// The transposed table.
    pub fn transposed(&self) -> ProbTable {
        let mut probs = vec![0.0; self.r * self.r];
        for i in 0..self.r {
            for j in 0..self.r {
                probs[j * self.r + i] = self.prob(i, j);
            }
        }
        ProbTable {
            r: self.r,
            probs,
            source: self.source,
        }
    }
}

/// Sample proportions `p_ij = n_ij / n`.
pub fn to_probabilities(t: &SquareTable) -> ProbTable {
    let n = t.n() as f64;
    let probs = t.counts().iter().map(|&c| c as f64 / n).collect();
    ProbTable {
        r: t.r(),
        probs,
        source: ProbSource::SampleProportion,
    }
}

/// Dirichlet posterior mean `p_ij = (n_ij + alpha) / (n + r^2 alpha)`.
///
/// With a small `alpha` (default 0.0001, approximating the Haldane prior)
/// this leaves the proportions essentially unchanged while making every cell
/// strictly positive, which the asymptotic variance requires.
pub fn bayes_smooth(t: &SquareTable, alpha: f64) -> Result<ProbTable, MhError> {
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(MhError::BadAlpha { alpha });
    }
    let r = t.r();
    let denom = t.n() as f64 + (r * r) as f64 * alpha;
    let probs = t
        .counts()
        .iter()
        .map(|&c| (c as f64 + alpha) / denom)
        .collect();
    Ok(ProbTable {
        r,
        probs,
        source: ProbSource::BayesSmoothed { alpha },
    })
}

/// Per-cut cumulative quantities for one level `i` in `1..r`.
///
/// `gc1`, `gc2` are `None` exactly when `g1 + g2 = 0` (the cut carries no
/// off-diagonal mass); `weight` is `None` exactly when the whole table is
/// diagonal (`delta = 0`).
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSummary {
    /// Category cut, 1-based: separates `{1..i}` from `{i+1..r}`.
    pub level: usize,
    /// Cumulative row marginal `Pr(X <= i)`.
    pub f1: f64,
    /// Cumulative column marginal `Pr(Y <= i)`.
    pub f2: f64,
    /// Upper-right block mass `Pr(X <= i, Y >= i+1)`.
    pub g1: f64,
    /// Lower-left block mass `Pr(X >= i+1, Y <= i)`.
    pub g2: f64,
    /// `g1 / (g1 + g2)` when the cut carries off-diagonal mass.
    pub gc1: Option<f64>,
    /// `g2 / (g1 + g2)` when the cut carries off-diagonal mass.
    pub gc2: Option<f64>,
    /// `(g1 + g2) / delta` when `delta > 0`.
    pub weight: Option<f64>,
}

/// All per-cut quantities of a probability table.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalSummary {
    r: usize,
    /// Provenance carried over from the summarized table.
    pub source: ProbSource,
    /// One entry per cut, levels `1..r` in order.
    pub levels: Vec<LevelSummary>,
    /// Total off-diagonal block mass `sum_i (G1(i) + G2(i))`.
    pub delta: f64,
    /// Row marginals `p_i.`.
    pub row_marginals: Vec<f64>,
    /// Column marginals `p_.i`.
    pub col_marginals: Vec<f64>,
}

impl MarginalSummary {
    /// Table dimension.
    pub fn r(&self) -> usize {
        self.r
    }

    /// True when some cut has no off-diagonal mass.
    pub fn has_undefined_level(&self) -> bool {
        self.levels.iter().any(|l| l.gc1.is_none())
    }
}

/// Computes every per-cut quantity of `p`.
///
/// This never fails: cuts without off-diagonal mass get `None` conditionals,
/// and a fully diagonal table gets `delta = 0`. Consumers that need those
/// quantities (the measures, the variance) report `MeasureUndefined` then.
pub fn marginal_summary(p: &ProbTable) -> MarginalSummary {
    let r = p.r();
    let mut row_marginals = vec![0.0; r];
    let mut col_marginals = vec![0.0; r];
    for i in 0..r {
        for j in 0..r {
            let v = p.prob(i, j);
            row_marginals[i] += v;
            col_marginals[j] += v;
        }
    }

    let mut g1 = vec![0.0; r - 1];
    let mut g2 = vec![0.0; r - 1];
    for (idx, g) in g1.iter_mut().enumerate() {
        // Level idx+1: rows 0..=idx, columns idx+1..r.
        for s in 0..=idx {
            for t in idx + 1..r {
                *g += p.prob(s, t);
            }
        }
    }
    for (idx, g) in g2.iter_mut().enumerate() {
        for s in idx + 1..r {
            for t in 0..=idx {
                *g += p.prob(s, t);
            }
        }
    }
    let delta: f64 = g1.iter().sum::<f64>() + g2.iter().sum::<f64>();

    let mut levels = Vec::with_capacity(r - 1);
    let mut f1 = 0.0;
    let mut f2 = 0.0;
    for idx in 0..r - 1 {
        f1 += row_marginals[idx];
        f2 += col_marginals[idx];
        let block = g1[idx] + g2[idx];
        let (gc1, gc2) = if block > 0.0 {
            (Some(g1[idx] / block), Some(g2[idx] / block))
        } else {
            (None, None)
        };
        let weight = if delta > 0.0 { Some(block / delta) } else { None };
        levels.push(LevelSummary {
            level: idx + 1,
            f1,
            f2,
            g1: g1[idx],
            g2: g2[idx],
            gc1,
            gc2,
            weight,
        });
    }

    MarginalSummary {
        r,
        source: p.source(),
        levels,
        delta,
        row_marginals,
        col_marginals,
    }
}

/// Splits CSV text into trimmed fields, skipping blank lines and one optional
/// header row (detected by any field that does not parse as a number).
fn csv_rows(text: &str) -> Result<Vec<Vec<&str>>, MhError> {
    let mut rows: Vec<Vec<&str>> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(|l| l.split(',').map(str::trim).collect())
        .collect();
    if let Some(first) = rows.first() {
        let non_numeric = first.iter().any(|f| f.parse::<f64>().is_err());
        if non_numeric {
            rows.remove(0);
        }
    }
    if rows.is_empty() {
        return Err(MhError::EmptyTable);
    }
    Ok(rows)
}

/// Parses a CSV document of non-negative integer counts into a [`SquareTable`].
///
/// Rows are comma-separated; one header row is skipped if its fields are not
/// numeric; the dimension is the number of data rows.
pub fn parse_table(text: &str) -> Result<SquareTable, MhError> {
    let raw = csv_rows(text)?;
    let mut rows = Vec::with_capacity(raw.len());
    for (i, fields) in raw.iter().enumerate() {
        let mut row = Vec::with_capacity(fields.len());
        for (j, tok) in fields.iter().enumerate() {
            let c: u64 = tok.parse().map_err(|_| MhError::BadCell {
                row: i + 1,
                col: j + 1,
                token: (*tok).to_string(),
            })?;
            row.push(c);
        }
        rows.push(row);
    }
    SquareTable::from_counts(rows)
}

/// Parses a CSV document of cell probabilities into a [`ProbTable`].
///
/// Same dialect as [`parse_table`] with real-valued cells; the sum must be
/// within [`PROB_SUM_TOLERANCE`] of 1.
pub fn parse_prob_table(text: &str) -> Result<ProbTable, MhError> {
    let raw = csv_rows(text)?;
    let mut rows = Vec::with_capacity(raw.len());
    for (i, fields) in raw.iter().enumerate() {
        let mut row = Vec::with_capacity(fields.len());
        for (j, tok) in fields.iter().enumerate() {
            let p: f64 = tok.parse().map_err(|_| MhError::BadCell {
                row: i + 1,
                col: j + 1,
                token: (*tok).to_string(),
            })?;
            row.push(p);
        }
        rows.push(row);
    }
    ProbTable::from_probs(rows)
}
