//! Certified and heuristic values for
//!
//! - `rho1(T) = sup { x^T T x : ||x||_1 <= 1 }`,
//! - `piplus(T) = sup { Tr(T A) : A PSD, ||A||_1 <= 1 }`,
//!
//! and the ratio `piplus / rho1`, which lower-bounds the worst-case
//! decomposition constant. Both suprema include the zero point, so reported
//! values are never negative.

mod piplus;
mod ratio;
mod report;
mod rho1;
mod structured;

pub use piplus::{
    gamma_plus_bounds, piplus_dual_upper, piplus_dual_upper_with, piplus_rank1_lower,
    piplus_witness, witness_closed_form, witness_coefficients, witness_trace, DualOptions,
    PiPlusWitness, WitnessTrace,
};
pub use ratio::{certify_ratio, RatioCertificate, RatioMode, RatioOptions};
pub use report::{BoundReport, Certificate, Method, Quantity, Witness};
pub use rho1::{
    rho1_exact, rho1_exact_parallel, rho1_multistart, MultistartOptions, SignSupportPattern,
    DEFAULT_N_CAP,
};
pub use structured::{quadratic_vertex_bound, rho1_structured_upper, NormBounds};

/// Solves `m x = rhs` in place by Gaussian elimination with partial pivoting.
/// Returns `false` when a pivot falls below `1e-12` times the largest entry.
pub(crate) fn solve_dense(m: &mut [f64], rhs: &mut [f64], dim: usize) -> bool {
    let scale = m.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if scale == 0.0 {
        return false;
    }
    let eps = 1e-12 * scale;
    for col in 0..dim {
        let (piv, pmax) = (col..dim)
            .map(|r| (r, m[r * dim + col].abs()))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pmax <= eps {
            return false;
        }
        if piv != col {
            for c in 0..dim {
                m.swap(piv * dim + c, col * dim + c);
            }
            rhs.swap(piv, col);
        }
        let d = m[col * dim + col];
        for r in (col + 1)..dim {
            let f = m[r * dim + col] / d;
            if f == 0.0 {
                continue;
            }
            for c in col..dim {
                m[r * dim + c] -= f * m[col * dim + c];
            }
            rhs[r] -= f * rhs[col];
        }
    }
    for r in (0..dim).rev() {
        let mut s = rhs[r];
        for c in (r + 1)..dim {
            s -= m[r * dim + c] * rhs[c];
        }
        rhs[r] = s / m[r * dim + r];
    }
    true
}
