//! Rank-one decompositions `A = sum_k x_k x_k^T` of PSD matrices and their
//! l1 cost `sum_k ||x_k||_1^2`.
//!
//! Two routes: scaled eigenvectors, and greedy peeling of one pivot row at a
//! time (`A <- A - a_i a_i^T / A_ii`). Both stay below `n * tr(A)`.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    self, min_eigenvalue, norm_l1, norm_l2, symmetric_eigen, GramMatrix, DEFAULT_TOL_EIG,
};
use crate::rng::Rng;

/// How the next pivot is chosen while peeling. Indices are 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum PivotRule {
    MaxDiagonal,
    /// Smallest `||a_i||_1^2 / ||a_i||_2^2`, the per-step lossiness factor.
    #[default]
    MinCostPerTrace,
    /// Largest `||a_i||_2^2 / A_ii`.
    MaxTraceRemoval,
    FixedOrder(Vec<usize>),
    RandomOrder(u64),
}

impl PivotRule {
    pub fn validate(&self, n: usize) -> Result<()> {
        if let PivotRule::FixedOrder(order) = self {
            let mut seen = vec![false; n];
            for &i in order {
                if i >= n || seen[i] {
                    return Err(Error::invalid(format!(
                        "fixed pivot order must be distinct indices below {n}, got {order:?}"
                    )));
                }
                seen[i] = true;
            }
        }
        Ok(())
    }

    /// The adaptive rules, plus identity order; what comparison studies sweep.
    pub fn standard_rules() -> Vec<PivotRule> {
        vec![
            PivotRule::MinCostPerTrace,
            PivotRule::MaxDiagonal,
            PivotRule::MaxTraceRemoval,
        ]
    }
}

impl fmt::Display for PivotRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PivotRule::MaxDiagonal => f.write_str("max_diagonal"),
            PivotRule::MinCostPerTrace => f.write_str("min_cost_per_trace"),
            PivotRule::MaxTraceRemoval => f.write_str("max_trace_removal"),
            PivotRule::FixedOrder(order) => {
                let s: Vec<String> = order.iter().map(|i| i.to_string()).collect();
                write!(f, "fixed:{}", s.join(","))
            }
            PivotRule::RandomOrder(seed) => write!(f, "random:{seed}"),
        }
    }
}

impl FromStr for PivotRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().replace('-', "_");
        match norm.as_str() {
            "max_diagonal" => return Ok(PivotRule::MaxDiagonal),
            "min_cost_per_trace" => return Ok(PivotRule::MinCostPerTrace),
            "max_trace_removal" => return Ok(PivotRule::MaxTraceRemoval),
            _ => {}
        }
        if let Some(list) = norm.strip_prefix("fixed:") {
            let order = list
                .split(',')
                .filter(|t| !t.is_empty())
                .map(|t| {
                    t.trim()
                        .parse::<usize>()
                        .map_err(|_| Error::invalid(format!("bad pivot index {t:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            return Ok(PivotRule::FixedOrder(order));
        }
        if let Some(seed) = norm.strip_prefix("random:") {
            let seed = seed
                .parse::<u64>()
                .map_err(|_| Error::invalid(format!("bad seed {seed:?}")))?;
            return Ok(PivotRule::RandomOrder(seed));
        }
        Err(Error::invalid(format!(
            "unknown pivot rule {s:?} (expected max-diagonal, min-cost-per-trace, \
             max-trace-removal, fixed:i,j,.. or random:SEED)"
        )))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Source {
    Eigen,
    Peel(PivotRule),
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Eigen => f.write_str("eigen"),
            Source::Peel(rule) => write!(f, "peel({rule})"),
        }
    }
}

impl FromStr for Source {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "eigen" {
            return Ok(Source::Eigen);
        }
        s.strip_prefix("peel(")
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| Error::invalid(format!("unknown decomposition source {s:?}")))?
            .parse()
            .map(Source::Peel)
    }
}

/// An ordered list of vectors `x_k` with `A = sum_k x_k x_k^T`.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub n: usize,
    pub vectors: Vec<Vec<f64>>,
    /// `||x_k||_1^2` per vector.
    pub costs: Vec<f64>,
    pub total_cost: f64,
    pub source: Source,
}

impl Decomposition {
    pub fn from_vectors(n: usize, vectors: Vec<Vec<f64>>, source: Source) -> Self {
        let costs: Vec<f64> = vectors.iter().map(|x| norm_l1(x).powi(2)).collect();
        let total_cost = costs.iter().sum();
        Self {
            n,
            vectors,
            costs,
            total_cost,
            source,
        }
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn reconstruct(&self) -> GramMatrix {
        linalg::sum_of_outer_products(self.n, &self.vectors)
    }
}

/// Tolerances for the decomposers. Relative ones scale with `tr(A)`.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    /// PSD acceptance: `lambda_min >= -tol_psd * (1 + tr(A))`.
    pub tol_psd: f64,
    /// Eigen route drops `lambda_k <= tol_rank * tr(A)`.
    pub tol_rank: f64,
    /// Peeling treats `A_ii <= tol_pivot * tr(A)` as exhausted.
    pub tol_pivot: f64,
    /// Peeling stops once the residual trace is `<= tol_stop * tr(A)`.
    pub tol_stop: f64,
    pub tol_eig: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            tol_psd: 1e-8,
            tol_rank: 1e-12,
            tol_pivot: 1e-12,
            tol_stop: 1e-12,
            tol_eig: DEFAULT_TOL_EIG,
        }
    }
}

impl Tolerances {
    pub fn psd_threshold(&self, a: &GramMatrix) -> f64 {
        self.tol_psd * (1.0 + a.trace().abs())
    }
}

/// Rejects matrices whose smallest eigenvalue is below `-tol`; returns it otherwise.
pub fn check_psd(a: &GramMatrix, tol: f64) -> Result<f64> {
    let lambda_min = min_eigenvalue(a);
    if lambda_min < -tol {
        return Err(Error::NotPsd { lambda_min, tol });
    }
    Ok(lambda_min)
}

/// `x_k = sqrt(lambda_k) v_k` over the numerically positive spectrum.
pub fn eigen_decomposer(a: &GramMatrix) -> Result<Decomposition> {
    eigen_decomposer_with(a, &Tolerances::default())
}

pub fn eigen_decomposer_with(a: &GramMatrix, tol: &Tolerances) -> Result<Decomposition> {
    let psd_tol = tol.psd_threshold(a);
    let es = symmetric_eigen(a, tol.tol_eig)?;
    let lambda_min = *es.eigenvalues.last().expect("n >= 1");
    if lambda_min < -psd_tol {
        return Err(Error::NotPsd {
            lambda_min,
            tol: psd_tol,
        });
    }
    let cutoff = tol.tol_rank * a.trace();
    let vectors = es
        .eigenvalues
        .iter()
        .zip(&es.eigenvectors)
        .filter(|(&l, _)| l > cutoff)
        .map(|(&l, v)| {
            let s = l.sqrt();
            v.iter().map(|c| s * c).collect()
        })
        .collect();
    Ok(Decomposition::from_vectors(a.n(), vectors, Source::Eigen))
}

/// Bookkeeping for one peel, used as a self-test of the trace identities.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct StepAudit {
    pub pivot: usize,
    /// `||a_i||_2^2 / A_ii`.
    pub removed_trace: f64,
    /// `||x||_1^2`.
    pub cost: f64,
    /// `|tr(A2) - (tr(A) - ||a_i||_2^2 / A_ii)|`, relative to `tr(A)`.
    pub trace_discrepancy: f64,
    /// `|(||x||_1^2) - (||a_i||_1^2 / ||a_i||_2^2)(tr(A) - tr(A2))|`, relative to `||x||_1^2`.
    pub identity_discrepancy: f64,
}

#[derive(Debug, Clone)]
pub struct PeelStep {
    pub x: Vec<f64>,
    pub residual: GramMatrix,
    pub audit: StepAudit,
}

fn relative(diff: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        diff.abs() / scale
    } else {
        diff.abs()
    }
}

/// One peel on pivot `i`: `x = a_i / sqrt(A_ii)` and `A2 = A - x x^T`.
///
/// A pivot with `A_ii <= tol_pivot` is accepted only if its row is negligible
/// (`||a_i||_2 <= tol_pivot * n`); it then yields `x = 0` and clears the row.
/// A tiny diagonal under a non-negligible row cannot occur for PSD input and
/// is reported as [`Error::SingularPivot`].
pub fn peel_step(a: &GramMatrix, i: usize, tol_pivot: f64) -> Result<PeelStep> {
    let n = a.n();
    if i >= n {
        return Err(Error::invalid(format!("pivot {i} out of range for n = {n}")));
    }
    let row = a.row(i).to_vec();
    let diag = row[i];
    let row_l2 = norm_l2(&row);
    let tr = a.trace();

    if diag <= tol_pivot {
        if row_l2 > tol_pivot * n as f64 {
            return Err(Error::SingularPivot {
                index: i,
                diagonal: diag,
                row_norm: row_l2,
            });
        }
        let mut residual = a.clone();
        let data = residual.data_mut();
        for k in 0..n {
            data[i * n + k] = 0.0;
            data[k * n + i] = 0.0;
        }
        let tr2 = residual.trace();
        return Ok(PeelStep {
            x: vec![0.0; n],
            residual,
            audit: StepAudit {
                pivot: i,
                removed_trace: 0.0,
                cost: 0.0,
                trace_discrepancy: relative(tr2 - (tr - diag), tr),
                identity_discrepancy: 0.0,
            },
        });
    }

    let mut data = a.as_slice().to_vec();
    for j in 0..n {
        let fj = row[j] / diag;
        for k in j..n {
            let v = data[j * n + k] - fj * row[k];
            data[j * n + k] = v;
            data[k * n + j] = v;
        }
    }
    // Row and column i vanish exactly in exact arithmetic.
    for k in 0..n {
        data[i * n + k] = 0.0;
        data[k * n + i] = 0.0;
    }
    let residual = GramMatrix::from_symmetric_parts(n, data);

    let root = diag.sqrt();
    let x: Vec<f64> = row.iter().map(|v| v / root).collect();
    let cost = norm_l1(&x).powi(2);
    let removed_trace = row_l2 * row_l2 / diag;
    let tr2 = residual.trace();
    let row_l1 = norm_l1(&row);
    let lossiness = row_l1 * row_l1 / (row_l2 * row_l2);

    Ok(PeelStep {
        x,
        residual,
        audit: StepAudit {
            pivot: i,
            removed_trace,
            cost,
            trace_discrepancy: relative(tr2 - (tr - removed_trace), tr),
            identity_discrepancy: relative(cost - lossiness * (tr - tr2), cost),
        },
    })
}

/// Relative discrepancy of `||x||_1^2 = (||a_i||_1^2 / ||a_i||_2^2)(tr(A) - tr(A2))`
/// for a single peel of `a` at `i`.
pub fn per_step_cost_identity_check(a: &GramMatrix, i: usize) -> Result<f64> {
    let tol_pivot = Tolerances::default().tol_pivot * a.trace().max(0.0);
    Ok(peel_step(a, i, tol_pivot)?.audit.identity_discrepancy)
}

/// Outcome of [`greedy_peel`]: the decomposition, what is left over, and
/// per-step audits.
#[derive(Debug, Clone)]
pub struct PeelRun {
    pub decomposition: Decomposition,
    pub residual: GramMatrix,
    pub audits: Vec<StepAudit>,
    /// `|sum_k removed_trace_k - (tr(A) - tr(residual))|`, relative to `tr(A)`.
    pub telescoping_discrepancy: f64,
}

impl PeelRun {
    pub fn validate(&self, a: &GramMatrix, tol_rec: f64) -> ValidationReport {
        validate_against(
            &self.decomposition,
            a,
            &a.linear_combination(1.0, &self.residual, -1.0),
            tol_rec,
        )
    }
}

/// Peels pivots chosen by `rule` until the residual trace falls below
/// `tol_stop * tr(A)`, the rule runs out of pivots, or `max_steps` is hit.
pub fn greedy_peel(a: &GramMatrix, rule: &PivotRule, max_steps: usize) -> Result<PeelRun> {
    greedy_peel_with(a, rule, max_steps, &Tolerances::default())
}

pub fn greedy_peel_with(
    a: &GramMatrix,
    rule: &PivotRule,
    max_steps: usize,
    tol: &Tolerances,
) -> Result<PeelRun> {
    let n = a.n();
    rule.validate(n)?;
    check_psd(a, tol.psd_threshold(a))?;

    let tr0 = a.trace();
    let tol_pivot = tol.tol_pivot * tr0;
    let stop = tol.tol_stop * tr0;

    let mut queue: Option<std::collections::VecDeque<usize>> = match rule {
        PivotRule::FixedOrder(order) => Some(order.iter().copied().collect()),
        PivotRule::RandomOrder(seed) => Some(Rng::new(*seed).permutation(n).into()),
        _ => None,
    };

    let mut residual = a.clone();
    let mut done = vec![false; n];
    let mut vectors = Vec::new();
    let mut audits = Vec::new();

    while vectors.len() < max_steps && residual.trace() > stop {
        let pivot = match queue.as_mut() {
            Some(q) => match q.pop_front() {
                Some(i) => i,
                None => break,
            },
            None => match pick_adaptive(&residual, rule, &mut done, tol_pivot)? {
                Some(i) => i,
                None => break,
            },
        };
        let step = peel_step(&residual, pivot, tol_pivot)?;
        done[pivot] = true;
        residual = step.residual;
        if step.audit.removed_trace > 0.0 {
            vectors.push(step.x);
            audits.push(step.audit);
        }
    }

    let removed: f64 = audits.iter().map(|s| s.removed_trace).sum();
    let telescoping_discrepancy = relative(removed - (tr0 - residual.trace()), tr0);
    Ok(PeelRun {
        decomposition: Decomposition::from_vectors(n, vectors, Source::Peel(rule.clone())),
        residual,
        audits,
        telescoping_discrepancy,
    })
}

fn pick_adaptive(
    r: &GramMatrix,
    rule: &PivotRule,
    done: &mut [bool],
    tol_pivot: f64,
) -> Result<Option<usize>> {
    let n = r.n();
    let mut best: Option<(usize, f64)> = None;
    for (i, finished) in done.iter_mut().enumerate() {
        if *finished {
            continue;
        }
        let d = r.get(i, i);
        let row = r.row(i);
        let l2 = norm_l2(row);
        if d <= tol_pivot {
            if l2 > tol_pivot * n as f64 {
                return Err(Error::SingularPivot {
                    index: i,
                    diagonal: d,
                    row_norm: l2,
                });
            }
            *finished = true;
            continue;
        }
        // Larger score wins; ties go to the smaller index.
        let score = match rule {
            PivotRule::MaxDiagonal => d,
            PivotRule::MinCostPerTrace => {
                let l1 = norm_l1(row);
                -(l1 * l1) / (l2 * l2)
            }
            PivotRule::MaxTraceRemoval => l2 * l2 / d,
            PivotRule::FixedOrder(_) | PivotRule::RandomOrder(_) => unreachable!(),
        };
        if best.is_none_or(|(_, s)| score > s) {
            best = Some((i, score));
        }
    }
    Ok(best.map(|(i, _)| i))
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub n: usize,
    pub vectors: usize,
    /// Max-entry `|sum_k x_k x_k^T - target|`.
    pub reconstruction_error: f64,
    pub reconstruction_limit: f64,
    pub reconstruction_ok: bool,
    /// `|total_cost - sum_k ||x_k||_1^2|`, relative.
    pub cost_discrepancy: f64,
    pub total_cost: f64,
    /// `n * tr(A)`.
    pub cost_bound: f64,
    pub margin: f64,
    pub entrywise_one_norm: f64,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.reconstruction_ok && self.cost_discrepancy <= 1e-12
    }
}

/// Checks `dec` against `a`: reconstruction within `tol_rec * (1 + ||A||_1)`,
/// recomputed costs, and the margin `n * tr(A) - total_cost`.
pub fn validate(dec: &Decomposition, a: &GramMatrix, tol_rec: f64) -> ValidationReport {
    validate_against(dec, a, a, tol_rec)
}

fn validate_against(
    dec: &Decomposition,
    a: &GramMatrix,
    target: &GramMatrix,
    tol_rec: f64,
) -> ValidationReport {
    let n = a.n();
    let reconstruction_error = if dec.n == n {
        dec.reconstruct().max_abs_diff(target)
    } else {
        f64::INFINITY
    };
    let one_norm = a.entrywise_one_norm();
    let limit = tol_rec * (1.0 + one_norm);
    let recomputed: f64 = dec.vectors.iter().map(|x| norm_l1(x).powi(2)).sum();
    let cost_bound = n as f64 * a.trace();
    ValidationReport {
        n,
        vectors: dec.len(),
        reconstruction_error,
        reconstruction_limit: limit,
        reconstruction_ok: reconstruction_error <= limit,
        cost_discrepancy: relative(dec.total_cost - recomputed, recomputed.abs()),
        total_cost: dec.total_cost,
        cost_bound,
        margin: cost_bound - dec.total_cost,
        entrywise_one_norm: one_norm,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> GramMatrix {
        GramMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn eigen_all_ones() {
        let d = eigen_decomposer(&GramMatrix::all_ones(3)).unwrap();
        assert_eq!(d.len(), 1);
        assert!(close(d.total_cost, 9.0, 1e-12));
        for c in &d.vectors[0] {
            assert!(close(c.abs(), 1.0, 1e-12));
        }
    }

    #[test]
    fn eigen_diagonal() {
        let d = eigen_decomposer(&GramMatrix::diagonal(&[1.0, 2.0])).unwrap();
        assert_eq!(d.len(), 2);
        assert!(close(d.total_cost, 3.0, 1e-14));
        assert!(close(d.vectors[0][1].abs(), 2f64.sqrt(), 1e-14));
        assert!(close(d.vectors[1][0].abs(), 1.0, 1e-14));
    }

    #[test]
    fn eigen_rank_one() {
        let d = eigen_decomposer(&GramMatrix::outer(&[1.0, -2.0])).unwrap();
        assert_eq!(d.len(), 1);
        assert!(close(d.total_cost, 9.0, 1e-12));
        let x = &d.vectors[0];
        assert!(close(x[0] * x[1], -2.0, 1e-12));
    }

    #[test]
    fn eigen_rejects_indefinite() {
        let err = eigen_decomposer(&m(&[&[0.0, 1.0], &[1.0, 0.0]])).unwrap_err();
        match err {
            Error::NotPsd { lambda_min, .. } => assert!(close(lambda_min, -1.0, 1e-12)),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn peel_step_all_ones() {
        let s = peel_step(&GramMatrix::all_ones(3), 0, 1e-12).unwrap();
        assert_eq!(s.x, vec![1.0, 1.0, 1.0]);
        assert_eq!(s.residual, GramMatrix::zeros(3));
    }

    #[test]
    fn peel_step_diagonal() {
        let s = peel_step(&GramMatrix::diagonal(&[1.0, 2.0]), 1, 1e-12).unwrap();
        assert_eq!(s.x[0], 0.0);
        assert!(close(s.x[1], 2f64.sqrt(), 1e-15));
        assert_eq!(s.residual, GramMatrix::diagonal(&[1.0, 0.0]));
    }

    #[test]
    fn peel_step_two_by_two() {
        let s = peel_step(&m(&[&[2.0, 1.0], &[1.0, 1.0]]), 0, 1e-12).unwrap();
        assert!(close(s.x[0], 2f64.sqrt(), 1e-15));
        assert!(close(s.x[1], 1.0 / 2f64.sqrt(), 1e-15));
        let r = s.residual.as_slice();
        assert_eq!(&r[..3], &[0.0, 0.0, 0.0]);
        assert!(close(r[3], 0.5, 1e-15));
    }

    #[test]
    fn singular_pivot_is_an_error() {
        let a = m(&[&[0.0, 1.0], &[1.0, 1.0]]);
        assert!(matches!(
            peel_step(&a, 0, 1e-12),
            Err(Error::SingularPivot { index: 0, .. })
        ));
    }

    #[test]
    fn exhausted_pivot_yields_zero_vector() {
        let a = GramMatrix::diagonal(&[0.0, 1.0]);
        let s = peel_step(&a, 0, 1e-12).unwrap();
        assert_eq!(s.x, vec![0.0, 0.0]);
        assert_eq!(s.residual, a);
    }

    #[test]
    fn identity_check_examples() {
        assert!(per_step_cost_identity_check(&GramMatrix::all_ones(3), 0).unwrap() <= 1e-15);
        assert!(per_step_cost_identity_check(&GramMatrix::diagonal(&[1.0, 2.0]), 1).unwrap() <= 1e-15);
    }

    #[test]
    fn greedy_all_ones_max_diagonal() {
        let run = greedy_peel(&GramMatrix::all_ones(3), &PivotRule::MaxDiagonal, 3).unwrap();
        assert_eq!(run.decomposition.len(), 1);
        assert_eq!(run.decomposition.total_cost, 9.0);
        assert_eq!(run.residual.trace(), 0.0);
    }

    #[test]
    fn greedy_diagonal_every_rule() {
        let a = GramMatrix::diagonal(&[0.5, 2.0, 3.0, 1.5]);
        let rules = [
            PivotRule::MaxDiagonal,
            PivotRule::MinCostPerTrace,
            PivotRule::MaxTraceRemoval,
            PivotRule::FixedOrder(vec![3, 1, 0, 2]),
            PivotRule::RandomOrder(9),
        ];
        for rule in rules {
            let run = greedy_peel(&a, &rule, 4).unwrap();
            assert_eq!(run.decomposition.len(), 4, "{rule}");
            assert!(close(run.decomposition.total_cost, 7.0, 1e-15), "{rule}");
        }
    }

    #[test]
    fn greedy_rank_one() {
        let a = GramMatrix::outer(&[1.0, 2.0, 3.0]);
        for rule in PivotRule::standard_rules() {
            let run = greedy_peel(&a, &rule, 3).unwrap();
            assert_eq!(run.decomposition.len(), 1, "{rule}");
            assert!(close(run.decomposition.total_cost, 36.0, 1e-12), "{rule}");
            assert!(run.residual.max_abs() <= 1e-14, "{rule}");
        }
    }

    #[test]
    fn fixed_order_prefix_stops_early() {
        let a = GramMatrix::diagonal(&[1.0, 2.0, 3.0]);
        let run = greedy_peel(&a, &PivotRule::FixedOrder(vec![2]), 3).unwrap();
        assert_eq!(run.decomposition.len(), 1);
        assert_eq!(run.residual, GramMatrix::diagonal(&[1.0, 2.0, 0.0]));
        assert!(run.validate(&a, 1e-12).reconstruction_ok);
        assert!(greedy_peel(&a, &PivotRule::FixedOrder(vec![0, 0]), 3).is_err());
        assert!(greedy_peel(&a, &PivotRule::FixedOrder(vec![3]), 3).is_err());
    }

    #[test]
    fn greedy_rejects_non_psd() {
        let a = m(&[&[1.0, 2.0], &[2.0, 1.0]]);
        assert!(matches!(
            greedy_peel(&a, &PivotRule::default(), 2),
            Err(Error::NotPsd { .. })
        ));
    }

    #[test]
    fn validate_examples() {
        let i3 = GramMatrix::identity(3);
        let r = validate(&eigen_decomposer(&i3).unwrap(), &i3, 1e-9);
        assert!(r.ok());
        assert!(r.reconstruction_error <= 1e-15);
        assert!(close(r.margin, 6.0, 1e-14));

        let ones = GramMatrix::all_ones(3);
        let run = greedy_peel(&ones, &PivotRule::default(), 3).unwrap();
        let r = validate(&run.decomposition, &ones, 1e-9);
        assert!(r.ok());
        assert_eq!(r.reconstruction_error, 0.0);
        assert_eq!(r.margin, 0.0);

        let mut dec = eigen_decomposer(&i3).unwrap();
        dec.vectors.pop();
        let r = validate(&dec, &i3, 1e-9);
        assert!(!r.reconstruction_ok);
        assert!(!r.ok());
    }

    #[test]
    fn pivot_rule_round_trips_through_text() {
        for rule in [
            PivotRule::MaxDiagonal,
            PivotRule::MinCostPerTrace,
            PivotRule::MaxTraceRemoval,
            PivotRule::FixedOrder(vec![2, 0, 1]),
            PivotRule::RandomOrder(17),
        ] {
            assert_eq!(rule.to_string().parse::<PivotRule>().unwrap(), rule);
            let src = Source::Peel(rule);
            assert_eq!(src.to_string().parse::<Source>().unwrap(), src);
        }
        assert_eq!("min-cost-per-trace".parse::<PivotRule>().unwrap(), PivotRule::MinCostPerTrace);
        assert!("best".parse::<PivotRule>().is_err());
    }
}
