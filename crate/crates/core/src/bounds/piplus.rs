use super::report::{BoundReport, Certificate, Method, Quantity, Witness};
use crate::decompose::{check_psd, eigen_decomposer, greedy_peel, PivotRule, Tolerances};
use crate::error::{Error, Result};
use crate::linalg::{min_eigenvalue, norm_l1, symmetric_eigen, GramMatrix, DEFAULT_TOL_EIG};
use crate::randcert::t_from_w;

/// Lower bound on `piplus(T)` from the rank-1 point `A = x x^T / ||x||_1^2`
/// built out of a `rho1` witness. Without a (nonzero) witness the bound is 0.
pub fn piplus_rank1_lower(t: &GramMatrix, rho1: &BoundReport) -> Result<BoundReport> {
    let base = BoundReport::new(Quantity::Piplus, Method::Rank1Witness, Certificate::CertifiedBound);
    let x = match &rho1.witness {
        Some(Witness::Vector(x)) if norm_l1(x) > 0.0 => x,
        _ => return Ok(base.with_lower(0.0).with_witness(Witness::Matrix(GramMatrix::zeros(t.n())))),
    };
    if x.len() != t.n() {
        return Err(Error::InvalidDimension(format!("witness has length {}, T has n = {}", x.len(), t.n())));
    }
    let l1 = norm_l1(x);
    let a = GramMatrix::outer(x).scaled(1.0 / (l1 * l1));
    let value = t.trace_product(&a);
    Ok(base.with_lower(value.max(0.0)).with_witness(Witness::Matrix(a)))
}

/// Coefficients of the witness `A = a I + b W`: `a = c n^{-3/2}` and `b`
/// chosen so that `a n + b n (n-1) = 1`.
pub fn witness_coefficients(n: usize, c: f64) -> (f64, f64) {
    let nf = n as f64;
    let a = c * nf.powf(-1.5);
    let b = (1.0 - a * nf) / (nf * (nf - 1.0));
    (a, b)
}

/// `Tr(T A) = 1 - a n - a n^{3/2} / 4` for the witness, by formula only.
pub fn witness_closed_form(n: usize, c: f64) -> f64 {
    let nf = n as f64;
    let (a, _) = witness_coefficients(n, c);
    1.0 - a * nf - a * nf.powf(1.5) / 4.0
}

#[derive(Debug, Clone, Copy)]
pub struct WitnessTrace {
    pub n: usize,
    pub c: f64,
    pub a: f64,
    pub b: f64,
    /// `sum_ij T_ij A_ij` with both matrices formed explicitly.
    pub direct: f64,
    pub closed_form: f64,
    pub one_norm: f64,
}

impl WitnessTrace {
    /// `|direct - closed_form|` relative to `1 + a n + a n^{3/2} / 4`, the
    /// magnitude of the summed terms. The value itself crosses zero (near
    /// `n = (4c / (4 - c))^2`), where a plain relative error is meaningless.
    pub fn relative_discrepancy(&self) -> f64 {
        let nf = self.n as f64;
        let scale = 1.0 + self.a * nf + self.a * nf.powf(1.5) / 4.0;
        (self.direct - self.closed_form).abs() / scale
    }
}

#[derive(Debug, Clone)]
pub struct PiPlusWitness {
    pub matrix: GramMatrix,
    pub trace: WitnessTrace,
    pub lambda_min: f64,
    /// `A` is PSD with `||A||_1 = 1`, so `trace.direct` is a valid lower bound.
    pub valid: bool,
}

impl PiPlusWitness {
    pub fn value(&self) -> f64 {
        self.trace.direct
    }
}

fn check_w(w: &GramMatrix) -> Result<()> {
    let n = w.n();
    if n < 2 {
        return Err(Error::InvalidDimension("witness needs n >= 2".into()));
    }
    for i in 0..n {
        for j in 0..n {
            let v = w.get(i, j);
            let ok = if i == j { v == 0.0 } else { v.abs() == 1.0 };
            if !ok {
                return Err(Error::invalid(format!("W must be hollow with +-1 entries; W[{i},{j}] = {v}")));
            }
        }
    }
    Ok(())
}

fn witness_matrix(w: &GramMatrix, a: f64, b: f64) -> GramMatrix {
    w.scaled(b).add_to_diagonal(a)
}

/// Trace of the witness against `T = -(sqrt n/4) I + W`, computed directly and
/// by formula. Skips the eigenvalue check of [`piplus_witness`].
pub fn witness_trace(w: &GramMatrix, c: f64) -> Result<WitnessTrace> {
    check_w(w)?;
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::invalid(format!("c must be positive, got {c}")));
    }
    let n = w.n();
    let (a, b) = witness_coefficients(n, c);
    let am = witness_matrix(w, a, b);
    let t = t_from_w(w);
    Ok(WitnessTrace {
        n,
        c,
        a,
        b,
        direct: t.trace_product(&am),
        closed_form: witness_closed_form(n, c),
        one_norm: am.entrywise_one_norm(),
    })
}

/// The explicit feasible point `A = a I + b W` for `piplus(T)`.
pub fn piplus_witness(w: &GramMatrix, c: f64) -> Result<PiPlusWitness> {
    let trace = witness_trace(w, c)?;
    let matrix = witness_matrix(w, trace.a, trace.b);
    let lambda_min = min_eigenvalue(&matrix);
    let valid = trace.b > 0.0 && lambda_min >= 0.0;
    Ok(PiPlusWitness { matrix, trace, lambda_min, valid })
}

#[derive(Debug, Clone, Copy)]
pub struct DualOptions {
    /// Bisection stops once the bracket is within `tol * max(1, upper)`.
    pub tol: f64,
    /// Alternating-projection iterations per feasibility test.
    pub iter_cap: usize,
    pub max_bisections: usize,
}

impl Default for DualOptions {
    fn default() -> Self {
        Self { tol: 1e-6, iter_cap: 300, max_bisections: 60 }
    }
}

/// Upper bound on `piplus(T)` from weak duality: for any `Y` with `Y - T`
/// PSD and PSD `A` with `||A||_1 <= 1`, `Tr(T A) <= Tr(Y A) <= ||Y||_max`.
pub fn piplus_dual_upper(t: &GramMatrix, tol: f64, iter_cap: usize) -> Result<BoundReport> {
    piplus_dual_upper_with(t, &DualOptions { tol, iter_cap, ..DualOptions::default() })
}

/// `T + (Z - T)_+`: nearest point to `Z` in `{Y : Y - T PSD}`.
fn project_above(t: &GramMatrix, z: &GramMatrix) -> Result<GramMatrix> {
    let es = symmetric_eigen(&z.linear_combination(1.0, t, -1.0), DEFAULT_TOL_EIG)?;
    Ok(t.linear_combination(1.0, &es.reconstruct_with(|l| l.max(0.0)), 1.0))
}

fn clip(z: &GramMatrix, mu: f64) -> GramMatrix {
    let mut out = z.clone();
    for v in out.data_mut() {
        *v = v.clamp(-mu, mu);
    }
    out
}

/// Dykstra between the box `||Y||_max <= mu` and the shifted cone, starting
/// from `T`. Returns whether a cone iterate entered the box (within `slack`)
/// and the smallest max-norm seen over cone iterates.
fn dykstra(t: &GramMatrix, mu: f64, slack: f64, iter_cap: usize) -> Result<(bool, f64, GramMatrix)> {
    let n = t.n();
    let mut x = t.clone();
    let mut p = GramMatrix::zeros(n);
    let mut q = GramMatrix::zeros(n);
    let mut best = (f64::INFINITY, t.clone());
    for _ in 0..iter_cap {
        let xp = x.linear_combination(1.0, &p, 1.0);
        let y = clip(&xp, mu);
        p = xp.linear_combination(1.0, &y, -1.0);
        let yq = y.linear_combination(1.0, &q, 1.0);
        let x_new = project_above(t, &yq)?;
        q = yq.linear_combination(1.0, &x_new, -1.0);
        let m = x_new.max_abs();
        if m < best.0 {
            best = (m, x_new.clone());
        }
        if m <= mu + slack {
            return Ok((true, best.0, best.1));
        }
        let moved = x_new.max_abs_diff(&x);
        x = x_new;
        if moved <= 1e-13 * (1.0 + mu) {
            break;
        }
    }
    Ok((false, best.0, best.1))
}

/// Certified max-norm of `y` as a dual point: `||y||_max` plus whatever
/// diagonal shift repairs rounding in `y - T >= 0`.
fn certified_value(t: &GramMatrix, y: &GramMatrix) -> f64 {
    let deficit = (-min_eigenvalue(&y.linear_combination(1.0, t, -1.0))).max(0.0);
    y.max_abs() + deficit
}

/// [`piplus_dual_upper`] with explicit options.
///
/// The bracket starts at `[max(0, lambda_max) / ||v||_1^2, min(||T||_max,
/// max(0, lambda_max))]` (the lower end from the top eigenvector `v`, the
/// upper from `Y = T` and `Y = lambda_max I`). Each bisection point runs
/// Dykstra; every cone iterate is a valid dual point, so the reported upper
/// bound is certified regardless of convergence. Bisection points the
/// projections could not reach are treated as infeasible; if the bracket does
/// not close the report carries the `inconclusive` flag.
pub fn piplus_dual_upper_with(t: &GramMatrix, opts: &DualOptions) -> Result<BoundReport> {
    let es = symmetric_eigen(t, DEFAULT_TOL_EIG)?;
    let lambda_max = es.eigenvalues[0];
    let lam_plus = lambda_max.max(0.0);
    let v = &es.eigenvectors[0];
    let certified_lower = lam_plus / norm_l1(v).powi(2);

    let mut hi = t.max_abs();
    let mut hi_witness = t.clone();
    if lam_plus < hi {
        hi_witness = GramMatrix::identity(t.n()).scaled(lam_plus);
        hi = certified_value(t, &hi_witness);
    }
    let mut lo = certified_lower;
    let mut rounds = 0;
    while hi - lo > opts.tol * hi.max(1.0) && rounds < opts.max_bisections {
        rounds += 1;
        let mu = 0.5 * (lo + hi);
        let slack = 0.25 * opts.tol * mu.max(1.0);
        let (feasible, _, y) = dykstra(t, mu, slack, opts.iter_cap)?;
        let cert = certified_value(t, &y);
        if cert < hi {
            hi = cert;
            hi_witness = y;
        }
        if !feasible {
            lo = mu;
        }
    }
    let mut report = BoundReport::new(Quantity::Piplus, Method::DualAp, Certificate::CertifiedBound)
        .with_lower(certified_lower.min(hi))
        .with_upper(hi)
        .with_witness(Witness::Matrix(hi_witness));
    if hi - lo > opts.tol * hi.max(1.0) {
        report = report.flag("inconclusive");
    }
    Ok(report)
}

/// `||A||_1 <= gamma_plus(A) <= min(eigen cost, peel cost)` for PSD `A`.
pub fn gamma_plus_bounds(a: &GramMatrix) -> Result<BoundReport> {
    let tol = Tolerances::default();
    check_psd(a, tol.psd_threshold(a))?;
    let lower = a.entrywise_one_norm();
    let eig = eigen_decomposer(a)?.total_cost;
    let peel = greedy_peel(a, &PivotRule::default(), a.n())?.decomposition.total_cost;
    let (upper, method) = if peel <= eig { (peel, Method::Peel) } else { (eig, Method::Eigen) };
    let upper = upper.max(lower);
    let cert = if upper - lower <= 1e-9 * upper.max(1.0) { Certificate::Exact } else { Certificate::CertifiedBound };
    Ok(BoundReport::new(Quantity::GammaPlusUpper, method, cert).with_lower(lower).with_upper(upper))
}
