//! Random ensembles and the spectral statistics used by the ratio certificates.
//!
//! `W` is symmetric with independent Rademacher entries above a zero diagonal;
//! `T = -(sqrt(n)/4) I + W`. Restricted norms are maxima of `||W_S||` over
//! principal submatrices with `|S| = k`. Since `||W_S|| <= ||W_U||` for
//! `S ⊆ U`, size exactly `k` covers every `|S| <= k`.

use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{max_eigenvalue, operator_norm, GramMatrix};
use crate::rng::{child_seed, Rng};

/// Largest `C(n, k)` for which exhaustive subset enumeration is attempted.
pub const EXHAUSTIVE_CAP: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub enum EnsembleKind {
    RademacherW,
    ShiftedT,
    /// `G G^T` with `G` an `n x p` standard Gaussian matrix.
    Wishart { p: usize },
    AllOnes,
    /// Independent diagonal entries uniform on `(0, max]`.
    Diagonal { max: f64 },
    /// Unit diagonal with `eps` on the two wrapped neighbouring diagonals;
    /// `None` means `1 / (2n)`.
    Circulant { eps: Option<f64> },
}

impl fmt::Display for EnsembleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnsembleKind::RademacherW => f.write_str("rademacher_w"),
            EnsembleKind::ShiftedT => f.write_str("shifted_t"),
            EnsembleKind::Wishart { p } => write!(f, "wishart:{p}"),
            EnsembleKind::AllOnes => f.write_str("all_ones"),
            EnsembleKind::Diagonal { max } => write!(f, "diagonal:{max}"),
            EnsembleKind::Circulant { eps: None } => f.write_str("circulant"),
            EnsembleKind::Circulant { eps: Some(e) } => write!(f, "circulant:{e}"),
        }
    }
}

impl FromStr for EnsembleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        let (head, arg) = match norm.split_once(':') {
            Some((h, a)) => (h.to_string(), Some(a.to_string())),
            None => (norm.clone(), None),
        };
        let num = |a: &Option<String>| -> Result<Option<f64>> {
            a.as_deref()
                .map(|v| {
                    v.parse::<f64>()
                        .map_err(|_| Error::invalid(format!("bad ensemble parameter {v:?}")))
                })
                .transpose()
        };
        Ok(match head.as_str() {
            "rademacher_w" | "w" => EnsembleKind::RademacherW,
            "shifted_t" | "t" => EnsembleKind::ShiftedT,
            "wishart" => {
                let p = match &arg {
                    Some(v) => v
                        .parse::<usize>()
                        .map_err(|_| Error::invalid(format!("bad wishart p {v:?}")))?,
                    None => 0,
                };
                EnsembleKind::Wishart { p }
            }
            "all_ones" => EnsembleKind::AllOnes,
            "diagonal" => EnsembleKind::Diagonal {
                max: num(&arg)?.unwrap_or(1.0),
            },
            "circulant" => EnsembleKind::Circulant { eps: num(&arg)? },
            _ => {
                return Err(Error::invalid(format!(
                    "unknown ensemble {s:?} (expected rademacher_w, shifted_t, wishart[:p], \
                     all_ones, diagonal[:max], circulant[:eps])"
                )))
            }
        })
    }
}

/// A reproducible random matrix: kind, size and seed.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomEnsembleSpec {
    pub kind: EnsembleKind,
    pub n: usize,
    pub seed: u64,
}

impl RandomEnsembleSpec {
    pub fn new(kind: EnsembleKind, n: usize, seed: u64) -> Self {
        Self { kind, n, seed }
    }

    pub fn sample(&self) -> Result<GramMatrix> {
        let n = self.n;
        if n == 0 {
            return Err(Error::InvalidDimension("n must be at least 1".into()));
        }
        let mut rng = Rng::new(self.seed);
        Ok(match &self.kind {
            EnsembleKind::RademacherW => sample_w(n, &mut rng),
            EnsembleKind::ShiftedT => build_t(n, &mut rng),
            // p = 0 is shorthand for square G.
            EnsembleKind::Wishart { p } => wishart(n, if *p == 0 { n } else { *p }, &mut rng),
            EnsembleKind::AllOnes => GramMatrix::all_ones(n),
            EnsembleKind::Diagonal { max } => {
                if !(*max > 0.0) {
                    return Err(Error::invalid("diagonal ensemble needs max > 0"));
                }
                let d: Vec<f64> = (0..n).map(|_| max * (1.0 - rng.uniform())).collect();
                GramMatrix::diagonal(&d)
            }
            EnsembleKind::Circulant { eps } => {
                circulant_like(n, eps.unwrap_or(1.0 / (2.0 * n as f64)))
            }
        })
    }
}

/// Hollow symmetric matrix with independent ±1 entries above the diagonal.
pub fn sample_w(n: usize, rng: &mut Rng) -> GramMatrix {
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let s = rng.rademacher();
            data[i * n + j] = s;
            data[j * n + i] = s;
        }
    }
    GramMatrix::from_symmetric_parts(n, data)
}

/// Diagonal shift of `T`: `-sqrt(n) / 4`.
pub fn t_shift(n: usize) -> f64 {
    -(n as f64).sqrt() / 4.0
}

/// `T = -(sqrt(n)/4) I + W`.
pub fn t_from_w(w: &GramMatrix) -> GramMatrix {
    w.add_to_diagonal(t_shift(w.n()))
}

/// Samples `W` from `rng` and returns `T = -(sqrt(n)/4) I + W`.
pub fn build_t(n: usize, rng: &mut Rng) -> GramMatrix {
    t_from_w(&sample_w(n, rng))
}

/// Recovers `W = T + (sqrt(n)/4) I`.
pub fn w_from_t(t: &GramMatrix) -> GramMatrix {
    t.add_to_diagonal(-t_shift(t.n()))
}

pub fn wishart(n: usize, p: usize, rng: &mut Rng) -> GramMatrix {
    let g: Vec<f64> = (0..n * p).map(|_| rng.normal()).collect();
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v: f64 = (0..p).map(|k| g[i * p + k] * g[j * p + k]).sum();
            data[i * n + j] = v;
            data[j * n + i] = v;
        }
    }
    GramMatrix::from_symmetric_parts(n, data)
}

pub fn circulant_like(n: usize, eps: f64) -> GramMatrix {
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        data[i * n + i] = 1.0;
        if n > 1 {
            let j = (i + 1) % n;
            if j != i {
                data[i * n + j] = eps;
                data[j * n + i] = eps;
            }
        }
    }
    GramMatrix::from_symmetric_parts(n, data)
}

/// Sample statistics of `lambda_max(W) / sqrt(n)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BaiYinSummary {
    pub n: usize,
    pub trials: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

/// `trials` independent `W` drawn from child streams of `rng`.
pub fn bai_yin_stat(n: usize, trials: usize, rng: &Rng) -> Result<BaiYinSummary> {
    if trials == 0 {
        return Err(Error::invalid("bai_yin_stat needs at least one trial"));
    }
    if n == 0 {
        return Err(Error::InvalidDimension("n must be at least 1".into()));
    }
    let root = (n as f64).sqrt();
    let values: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|t| max_eigenvalue(&sample_w(n, &mut rng.child(t))) / root)
        .collect();
    let mean = values.iter().sum::<f64>() / trials as f64;
    Ok(BaiYinSummary {
        n,
        trials,
        mean,
        min: values.iter().copied().fold(f64::INFINITY, f64::min),
        max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SubsetMode {
    Exhaustive,
    MonteCarlo { samples: usize },
}

/// How [`max_restricted_norm`] should search subsets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormSearch {
    Exhaustive,
    MonteCarlo { samples: usize },
    /// Exhaustive when `C(n, k) <= EXHAUSTIVE_CAP`, Monte Carlo otherwise.
    Auto { samples: usize },
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SubsetNormEstimate {
    pub k: usize,
    pub mode: SubsetMode,
    /// Largest `||W_S||` found.
    pub value: f64,
    /// `value / sqrt(n)`.
    pub normalized: f64,
}

impl SubsetNormEstimate {
    /// True maximum (exhaustive) versus a lower bound on it (sampled).
    pub fn is_exact(&self) -> bool {
        self.mode == SubsetMode::Exhaustive
    }
}

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

fn restricted_norm(w: &GramMatrix, idx: &[usize]) -> f64 {
    match idx {
        [i] => w.get(*i, *i).abs(),
        [i, j] => {
            let (a, b, c) = (w.get(*i, *i), w.get(*i, *j), w.get(*j, *j));
            let mid = 0.5 * (a + c);
            let rad = (0.25 * (a - c) * (a - c) + b * b).sqrt();
            (mid + rad).abs().max((mid - rad).abs())
        }
        _ => operator_norm(&w.principal_submatrix(idx)),
    }
}

/// Largest spectral norm over size-`k` principal submatrices of `w`.
pub fn max_restricted_norm(
    w: &GramMatrix,
    k: usize,
    search: NormSearch,
    rng: &mut Rng,
) -> Result<SubsetNormEstimate> {
    let n = w.n();
    if k == 0 || k > n {
        return Err(Error::invalid(format!("subset size {k} must lie in 1..={n}")));
    }
    let count = binomial(n, k);
    let mode = match search {
        NormSearch::Exhaustive => {
            if count > EXHAUSTIVE_CAP {
                return Err(Error::TooLarge {
                    what: "exhaustive subset enumeration (C(n, k) > 10^6)",
                    n,
                    cap: EXHAUSTIVE_CAP as usize,
                });
            }
            SubsetMode::Exhaustive
        }
        NormSearch::MonteCarlo { samples } => SubsetMode::MonteCarlo { samples },
        NormSearch::Auto { samples } => {
            if count <= EXHAUSTIVE_CAP {
                SubsetMode::Exhaustive
            } else {
                SubsetMode::MonteCarlo { samples }
            }
        }
    };
    let value = match mode {
        SubsetMode::Exhaustive => (0..n)
            .combinations(k)
            .map(|s| restricted_norm(w, &s))
            .fold(0.0f64, f64::max),
        SubsetMode::MonteCarlo { samples } => {
            if samples == 0 {
                return Err(Error::invalid("monte carlo search needs samples >= 1"));
            }
            (0..samples)
                .map(|_| restricted_norm(w, &rng.subset(n, k)))
                .fold(0.0f64, f64::max)
        }
    };
    Ok(SubsetNormEstimate {
        k,
        mode,
        value,
        normalized: value / (n as f64).sqrt(),
    })
}

/// Largest calibrated `kappa = k / n` with restricted norm at most `beta * sqrt(n)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct KappaEstimate {
    pub n: usize,
    pub beta: f64,
    pub k: usize,
    pub kappa: f64,
    /// Restricted norm at size `k` (running maximum over sizes `1..=k`).
    pub norm_at_k: f64,
    /// Every size up to and including the first violation was searched exhaustively.
    pub exact: bool,
    /// `beta * sqrt(n) < 1` with `n >= 2`: even pairs break the bound.
    pub degenerate: bool,
}

/// Samples `W` from `rng` and calibrates `kappa` on it; see [`estimate_kappa_for`].
pub fn estimate_kappa(n: usize, beta: f64, rng: &mut Rng, budget: usize) -> Result<KappaEstimate> {
    if n == 0 {
        return Err(Error::InvalidDimension("n must be at least 1".into()));
    }
    let w = sample_w(n, rng);
    estimate_kappa_for(&w, beta, rng.next_u64(), budget)
}

/// Scans `k = 1, 2, ...` and stops at the first size whose restricted norm
/// exceeds `beta * sqrt(n)`. Sizes use exhaustive search while
/// `C(n, k) <= EXHAUSTIVE_CAP` and `budget` sampled subsets (seeded from
/// `(seed, k)`) beyond that. The per-size norms are a deterministic function
/// of `(w, seed, budget)`, so the estimate is monotone in `beta`.
pub fn estimate_kappa_for(
    w: &GramMatrix,
    beta: f64,
    seed: u64,
    budget: usize,
) -> Result<KappaEstimate> {
    if !(beta > 0.0) {
        return Err(Error::invalid("beta must be positive"));
    }
    let n = w.n();
    let limit = beta * (n as f64).sqrt();
    let mut running = 0.0f64;
    let mut exact = true;
    let mut k_ok = 0;
    let mut norm_ok = 0.0;
    for k in 1..=n {
        let mut rng = Rng::new(child_seed(seed, k as u64));
        let est = max_restricted_norm(w, k, NormSearch::Auto { samples: budget.max(1) }, &mut rng)?;
        exact &= est.is_exact();
        running = running.max(est.value);
        if running > limit {
            break;
        }
        k_ok = k;
        norm_ok = running;
    }
    Ok(KappaEstimate {
        n,
        beta,
        k: k_ok,
        kappa: k_ok as f64 / n as f64,
        norm_at_k: norm_ok,
        exact,
        degenerate: n >= 2 && limit < 1.0,
    })
}

/// Failure-probability bound `4 exp(-alpha log(1/alpha) n)` for the
/// restricted-norm estimate at set size `alpha n`.
pub fn tail_bound_curve(alpha: f64, n: usize) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    Ok(4.0 * (-alpha * (1.0 / alpha).ln() * n as f64).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn w_structure() {
        assert_eq!(sample_w(1, &mut Rng::new(3)), GramMatrix::zeros(1));
        for seed in 0..20 {
            let w = sample_w(6, &mut Rng::new(seed));
            for i in 0..6 {
                assert_eq!(w.get(i, i), 0.0);
                for j in 0..6 {
                    if i != j {
                        assert!(w.get(i, j) == 1.0 || w.get(i, j) == -1.0);
                    }
                }
            }
        }
    }

    #[test]
    fn t_diagonals() {
        let t = build_t(16, &mut Rng::new(1));
        assert!(t.diag().iter().all(|&d| d == -1.0));
        let t = build_t(4, &mut Rng::new(1));
        assert!(t.diag().iter().all(|&d| d == -0.5));
        let w = w_from_t(&t);
        assert!(w.is_hollow());
        assert_eq!(w, sample_w(4, &mut Rng::new(1)));
    }

    #[test]
    fn rademacher_mean_is_zero() {
        let trials = 10_000;
        let s: f64 = (0..trials)
            .map(|seed| sample_w(2, &mut Rng::new(seed)).get(0, 1))
            .sum();
        // 5 standard errors of a ±1 mean over 10^4 draws is 0.05.
        assert!((s / trials as f64).abs() <= 0.05);
    }

    #[test]
    fn bai_yin_small_cases() {
        let s = bai_yin_stat(1, 3, &Rng::new(0)).unwrap();
        assert_eq!((s.mean, s.min, s.max), (0.0, 0.0, 0.0));
        let s = bai_yin_stat(30, 10, &Rng::new(5)).unwrap();
        assert!(s.min >= 0.0 && s.max <= 29.0 / 30f64.sqrt());
        assert!(bai_yin_stat(5, 0, &Rng::new(0)).is_err());
    }

    #[test]
    fn restricted_norm_small_k() {
        let mut rng = Rng::new(8);
        let w = sample_w(9, &mut rng);
        let k1 = max_restricted_norm(&w, 1, NormSearch::Exhaustive, &mut rng).unwrap();
        let k2 = max_restricted_norm(&w, 2, NormSearch::Exhaustive, &mut rng).unwrap();
        let kn = max_restricted_norm(&w, 9, NormSearch::Exhaustive, &mut rng).unwrap();
        assert_eq!(k1.value, 0.0);
        assert_eq!(k2.value, 1.0);
        assert!((kn.value - operator_norm(&w)).abs() < 1e-12);
        assert!(max_restricted_norm(&w, 0, NormSearch::Exhaustive, &mut rng).is_err());
    }

    #[test]
    fn exhaustive_refuses_large_counts() {
        let w = sample_w(40, &mut Rng::new(2));
        let err = max_restricted_norm(&w, 20, NormSearch::Exhaustive, &mut Rng::new(0));
        assert!(matches!(err, Err(Error::TooLarge { .. })));
        let est = max_restricted_norm(&w, 20, NormSearch::Auto { samples: 5 }, &mut Rng::new(0))
            .unwrap();
        assert!(!est.is_exact());
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(14, 7), 3432);
        assert_eq!(binomial(3, 4), 0);
        assert_eq!(binomial(1000, 500), u128::MAX);
    }

    #[test]
    fn kappa_degenerate_at_sixteen() {
        let est = estimate_kappa(16, 0.125, &mut Rng::new(4), 100).unwrap();
        assert!(est.degenerate);
        assert_eq!(est.k, 1);
        assert!(est.kappa < 2.0 / 16.0);
        assert!(est.exact);
    }

    #[test]
    fn kappa_monotone_in_beta() {
        let w = sample_w(24, &mut Rng::new(10));
        let lo = estimate_kappa_for(&w, 0.125, 99, 200).unwrap();
        let hi = estimate_kappa_for(&w, 0.25, 99, 200).unwrap();
        assert!(hi.kappa >= lo.kappa);
    }

    #[test]
    fn tail_bound_values() {
        // 4 exp(-0.1 ln(10) 100) = 4e-10
        let v = tail_bound_curve(0.1, 100).unwrap();
        assert!((v / 4e-10 - 1.0).abs() < 1e-12);
        assert!((tail_bound_curve(1.0 - 1e-12, 50).unwrap() - 4.0).abs() < 1e-8);
        assert!(tail_bound_curve(0.2, 200).unwrap() < tail_bound_curve(0.2, 100).unwrap());
        assert!(tail_bound_curve(1.0, 10).is_err());
        assert!(tail_bound_curve(0.0, 10).is_err());
    }

    #[test]
    fn ensembles_sample() {
        let a = RandomEnsembleSpec::new(EnsembleKind::Wishart { p: 3 }, 5, 1).sample().unwrap();
        assert!(crate::linalg::min_eigenvalue(&a) > -1e-10);
        let c = RandomEnsembleSpec::new(EnsembleKind::Circulant { eps: None }, 4, 0).sample().unwrap();
        assert_eq!(c.get(0, 1), 0.125);
        assert_eq!(c.get(0, 3), 0.125);
        assert_eq!(c.get(0, 2), 0.0);
        for s in ["wishart:4", "all_ones", "diagonal:2", "circulant:0.1", "shifted_t", "rademacher_w"] {
            let k: EnsembleKind = s.parse().unwrap();
            assert_eq!(k.to_string().parse::<EnsembleKind>().unwrap(), k);
        }
    }
}
