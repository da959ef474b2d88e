use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::piplus::{piplus_rank1_lower, piplus_witness};
use super::report::{BoundReport, Certificate, Quantity};
use super::rho1::{rho1_exact, rho1_multistart, MultistartOptions, DEFAULT_N_CAP};
use super::structured::{rho1_structured_upper, NormBounds};
use crate::error::{Error, Result};
use crate::linalg::operator_norm;
use crate::randcert::{estimate_kappa_for, sample_w, t_from_w, KappaEstimate};
use crate::rng::{child_seed, Rng};

/// Where the `rho1` side of the ratio comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RatioMode {
    /// Exact enumeration; small `n` only.
    Exact,
    /// Three-term bound with calibrated restricted norms.
    Structured,
    /// Multistart estimate of `rho1` (a lower estimate, so the ratio is not a bound).
    Heuristic,
}

impl fmt::Display for RatioMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RatioMode::Exact => "exact",
            RatioMode::Structured => "structured",
            RatioMode::Heuristic => "heuristic",
        })
    }
}

impl FromStr for RatioMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(RatioMode::Exact),
            "structured" => Ok(RatioMode::Structured),
            "heuristic" => Ok(RatioMode::Heuristic),
            _ => Err(Error::invalid(format!("unknown mode {s:?} (exact, structured, heuristic)"))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RatioOptions {
    pub n_cap: usize,
    /// Restricted norms must stay below `beta * sqrt(n)` when calibrating kappa.
    pub beta: f64,
    /// Sampled subsets per size once exhaustive search is too large.
    pub kappa_budget: usize,
    pub multistart: MultistartOptions,
}

impl Default for RatioOptions {
    fn default() -> Self {
        Self { n_cap: DEFAULT_N_CAP, beta: 0.125, kappa_budget: 2000, multistart: MultistartOptions::default() }
    }
}

#[derive(Debug, Clone)]
pub struct RatioCertificate {
    pub n: usize,
    pub seed: u64,
    pub c: f64,
    pub mode: RatioMode,
    /// `quantity = ratio`: lower is `max(1, ratio_raw)`, upper is `n`.
    pub report: BoundReport,
    pub ratio_raw: f64,
    pub piplus_lower: f64,
    /// Value of the `a I + b W` witness, when it is PSD and normalized.
    pub witness_value: Option<f64>,
    pub rank1_value: f64,
    pub rho1: BoundReport,
    pub kappa: Option<KappaEstimate>,
}

/// Samples `W` (seeded by `seed`), forms `T = -(sqrt n/4) I + W` and bounds
/// `piplus(T) / rho1(T)` from below. The certificate is the weaker of the two
/// sides.
pub fn certify_ratio(n: usize, seed: u64, c: f64, mode: RatioMode, opts: &RatioOptions) -> Result<RatioCertificate> {
    if n == 0 {
        return Err(Error::InvalidDimension("n must be at least 1".into()));
    }
    if mode == RatioMode::Exact && n > opts.n_cap {
        return Err(Error::TooLarge { what: "exact ratio (use structured or heuristic mode)", n, cap: opts.n_cap });
    }
    let mut rng = Rng::new(seed);
    let w = sample_w(n, &mut rng);
    let t = t_from_w(&w);

    let witness_value = if n >= 2 {
        let wt = piplus_witness(&w, c)?;
        wt.valid.then(|| wt.value())
    } else {
        None
    };

    let mut kappa = None;
    let search = Rng::new(child_seed(seed, 2));
    let (rho1, rank1_source) = match mode {
        RatioMode::Exact => {
            let r = rho1_exact(&t, opts.n_cap)?;
            (r.clone(), r)
        }
        RatioMode::Heuristic => {
            let r = rho1_multistart(&t, opts.multistart, &search)?;
            (r.clone(), r)
        }
        RatioMode::Structured => {
            let est = estimate_kappa_for(&w, opts.beta, child_seed(seed, 1), opts.kappa_budget)?;
            let norms = NormBounds { restricted: est.norm_at_k, full: operator_norm(&w), exact: est.exact };
            kappa = Some(est);
            let r = rho1_structured_upper(&t, est.kappa, norms)?;
            (r, rho1_multistart(&t, opts.multistart, &search)?)
        }
    };
    let rank1 = piplus_rank1_lower(&t, &rank1_source)?;
    let rank1_value = rank1.lower.unwrap_or(0.0);
    let piplus_lower = witness_value.unwrap_or(0.0).max(rank1_value);
    let rho1_value = match mode {
        RatioMode::Heuristic => rho1.lower,
        _ => rho1.upper,
    };

    let ratio_raw = match rho1_value {
        Some(r) if r > 0.0 && piplus_lower > 0.0 => piplus_lower / r,
        _ => f64::NAN,
    };
    let cert = rho1.certificate.min(Certificate::CertifiedBound);
    let lower = if ratio_raw.is_nan() { 1.0 } else { ratio_raw.max(1.0) };
    let mut report = BoundReport::new(Quantity::Ratio, rho1.method, cert)
        .with_lower(lower)
        .with_upper(n as f64);
    if ratio_raw.is_nan() {
        report = report.flag("ratio_undefined");
    }
    for f in &rho1.flags {
        report = report.flag(f.clone());
    }
    Ok(RatioCertificate {
        n,
        seed,
        c,
        mode,
        report,
        ratio_raw,
        piplus_lower,
        witness_value,
        rank1_value,
        rho1,
        kappa,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_mode_at_least_one_and_deterministic() {
        for n in 1..=8 {
            let a = certify_ratio(n, 9, 3.0, RatioMode::Exact, &RatioOptions::default()).unwrap();
            assert!(a.report.lower.unwrap() >= 1.0);
            let b = certify_ratio(n, 9, 3.0, RatioMode::Exact, &RatioOptions::default()).unwrap();
            assert_eq!(a.report.lower.unwrap().to_bits(), b.report.lower.unwrap().to_bits());
            assert_eq!(a.report.certificate, Certificate::CertifiedBound);
        }
    }

    #[test]
    fn exact_mode_refuses_large_n() {
        assert!(certify_ratio(20, 1, 3.0, RatioMode::Exact, &RatioOptions::default()).is_err());
    }

    #[test]
    fn structured_mode_reports() {
        let opts = RatioOptions {
            multistart: MultistartOptions { restarts: 4, steps: 100, polish: true },
            kappa_budget: 200,
            ..Default::default()
        };
        let r = certify_ratio(40, 3, 3.0, RatioMode::Structured, &opts).unwrap();
        assert!(r.report.lower.unwrap() >= 1.0);
        assert!(r.kappa.is_some());
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("structured".parse::<RatioMode>().unwrap(), RatioMode::Structured);
        assert!("nope".parse::<RatioMode>().is_err());
    }
}
