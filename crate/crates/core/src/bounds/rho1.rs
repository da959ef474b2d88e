use rayon::prelude::*;

use super::report::{BoundReport, Certificate, Method, Quantity, Witness};
use super::solve_dense;
use crate::error::{Error, Result};
use crate::linalg::{norm_l1, project_l1_sphere, GramMatrix};
use crate::rng::Rng;

pub const DEFAULT_N_CAP: usize = 12;

/// A face of the l1 sphere: the coordinates allowed to be nonzero and the
/// sign each one takes. The first sign is always `+1` since `x` and `-x`
/// give the same quadratic form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignSupportPattern {
    pub support: Vec<usize>,
    pub signs: Vec<i8>,
}

impl SignSupportPattern {
    pub fn new(support: Vec<usize>, signs: Vec<i8>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::invalid("sign/support pattern needs a nonempty support"));
        }
        if support.len() != signs.len() || signs.iter().any(|s| *s != 1 && *s != -1) {
            return Err(Error::invalid("one sign of +1 or -1 per support element"));
        }
        let mut p = Self { support, signs };
        p.canonicalize();
        Ok(p)
    }

    /// Decodes `(mask, sign_bits)`: bit `j` of `sign_bits` flips the sign of
    /// the `(j+1)`-th support element.
    fn from_bits(mask: u32, sign_bits: u32) -> Self {
        let support: Vec<usize> = (0..32).filter(|i| mask >> i & 1 == 1).collect();
        let signs = (0..support.len())
            .map(|j| if j > 0 && sign_bits >> (j - 1) & 1 == 1 { -1 } else { 1 })
            .collect();
        Self { support, signs }
    }

    fn canonicalize(&mut self) {
        let mut order: Vec<usize> = (0..self.support.len()).collect();
        order.sort_by_key(|&j| self.support[j]);
        self.support = order.iter().map(|&j| self.support[j]).collect();
        let signs: Vec<i8> = order.iter().map(|&j| self.signs[j]).collect();
        let flip = signs[0];
        self.signs = signs.into_iter().map(|s| s * flip).collect();
    }

    /// Stationary point of `x^T T x` on the relative interior of this face,
    /// if the KKT system is nonsingular and its solution is strictly inside.
    pub fn stationary_point(&self, t: &GramMatrix) -> Option<Vec<f64>> {
        let k = self.support.len();
        let dim = k + 1;
        let mut m = vec![0.0; dim * dim];
        for (a, &i) in self.support.iter().enumerate() {
            for (b, &j) in self.support.iter().enumerate() {
                m[a * dim + b] = f64::from(self.signs[a] * self.signs[b]) * t.get(i, j);
            }
            m[a * dim + k] = -1.0;
            m[k * dim + a] = 1.0;
        }
        let mut rhs = vec![0.0; dim];
        rhs[k] = 1.0;
        if !solve_dense(&mut m, &mut rhs, dim) {
            return None;
        }
        if rhs[..k].iter().any(|y| !(*y > 0.0)) {
            return None;
        }
        let mut x = vec![0.0; t.n()];
        for (a, &i) in self.support.iter().enumerate() {
            x[i] = f64::from(self.signs[a]) * rhs[a];
        }
        Some(x)
    }
}

#[derive(Clone)]
struct Candidate {
    value: f64,
    key: (u32, u32),
    x: Vec<f64>,
}

fn better(a: Candidate, b: Candidate) -> Candidate {
    if b.value > a.value || (b.value == a.value && b.key < a.key) {
        b
    } else {
        a
    }
}

fn best_on_support(t: &GramMatrix, mask: u32) -> Option<Candidate> {
    let k = mask.count_ones();
    (0..1u32 << (k - 1))
        .filter_map(|sign_bits| {
            let p = SignSupportPattern::from_bits(mask, sign_bits);
            let x = p.stationary_point(t)?;
            let value = t.quadratic_form(&x);
            Some(Candidate { value, key: (mask, sign_bits), x })
        })
        .reduce(better)
}

fn exact_report(t: &GramMatrix, best: Option<Candidate>) -> BoundReport {
    let (value, x) = match best {
        Some(c) if c.value > 0.0 => (c.value, c.x),
        _ => (0.0, vec![0.0; t.n()]),
    };
    BoundReport::new(Quantity::Rho1, Method::ExactEnumeration, Certificate::Exact)
        .with_lower(value)
        .with_upper(value)
        .with_witness(Witness::Vector(x))
}

fn check_cap(t: &GramMatrix, n_cap: usize) -> Result<()> {
    let n = t.n();
    if n > n_cap || n > 20 {
        return Err(Error::TooLarge { what: "exact rho1 enumeration (use rho1_multistart)", n, cap: n_cap.min(20) });
    }
    Ok(())
}

/// Exact `sup { x^T T x : ||x||_1 <= 1 }` by enumerating every sign/support
/// face of the l1 sphere and solving its stationarity system. Vertices are the
/// one-element supports. The result is floored at 0 (attained by `x = 0`).
pub fn rho1_exact(t: &GramMatrix, n_cap: usize) -> Result<BoundReport> {
    check_cap(t, n_cap)?;
    let best = (1..1u32 << t.n())
        .filter_map(|mask| best_on_support(t, mask))
        .reduce(better);
    Ok(exact_report(t, best))
}

/// [`rho1_exact`] with supports split across the rayon pool. Ties are broken
/// by pattern index, so the result equals the serial one.
pub fn rho1_exact_parallel(t: &GramMatrix, n_cap: usize) -> Result<BoundReport> {
    check_cap(t, n_cap)?;
    let best = (1..1u32 << t.n())
        .into_par_iter()
        .filter_map(|mask| best_on_support(t, mask))
        .reduce_with(better);
    Ok(exact_report(t, best))
}

#[derive(Debug, Clone, Copy)]
pub struct MultistartOptions {
    pub restarts: usize,
    pub steps: usize,
    /// Finish each restart by solving the stationarity system on its final face.
    pub polish: bool,
}

impl Default for MultistartOptions {
    fn default() -> Self {
        Self { restarts: 64, steps: 500, polish: true }
    }
}

fn ascend(t: &GramMatrix, mut x: Vec<f64>, steps: usize) -> (Vec<f64>, f64) {
    let t0 = 1.0 / (t.n() as f64).sqrt();
    let mut tx = t.mat_vec(&x);
    let mut f = crate::linalg::dot(&x, &tx);
    for _ in 0..steps {
        let mut step = t0;
        let mut moved = false;
        while step > 1e-12 * t0 {
            let trial: Vec<f64> = x.iter().zip(&tx).map(|(xi, gi)| xi + 2.0 * step * gi).collect();
            let Ok(y) = project_l1_sphere(&trial) else {
                step *= 0.5;
                continue;
            };
            let ty = t.mat_vec(&y);
            let fy = crate::linalg::dot(&y, &ty);
            if fy > f {
                x = y;
                tx = ty;
                f = fy;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if !moved {
            break;
        }
    }
    (x, f)
}

fn polish(t: &GramMatrix, x: &[f64]) -> Option<(Vec<f64>, f64)> {
    let (support, signs): (Vec<usize>, Vec<i8>) = x
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(i, v)| (i, if *v > 0.0 { 1 } else { -1 }))
        .unzip();
    let p = SignSupportPattern::new(support, signs).ok()?;
    let y = p.stationary_point(t)?;
    let fy = t.quadratic_form(&y);
    Some((y, fy))
}

/// Projected gradient ascent on the l1 sphere from several starts; a
/// heuristic lower bound on `rho1`. Restart 0 starts at the vertex with the
/// largest diagonal entry, the others at random directions.
pub fn rho1_multistart(t: &GramMatrix, opts: MultistartOptions, rng: &Rng) -> Result<BoundReport> {
    if opts.restarts == 0 {
        return Err(Error::invalid("rho1_multistart needs at least one restart"));
    }
    let n = t.n();
    let best = (0..opts.restarts)
        .into_par_iter()
        .map(|r| {
            let start = if r == 0 {
                let i = (0..n).fold(0, |b, i| if t.get(i, i) > t.get(b, b) { i } else { b });
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                e
            } else {
                let mut child = rng.child(r as u64);
                loop {
                    let g: Vec<f64> = (0..n).map(|_| child.normal()).collect();
                    if norm_l1(&g) > 0.0 {
                        break project_l1_sphere(&g).expect("nonzero");
                    }
                }
            };
            let (mut x, mut f) = ascend(t, start, opts.steps);
            if opts.polish {
                if let Some((y, fy)) = polish(t, &x) {
                    if fy > f {
                        x = y;
                        f = fy;
                    }
                }
            }
            Candidate { value: f, key: (r as u32, 0), x }
        })
        .reduce_with(better)
        .expect("at least one restart");
    let (value, x) = if best.value > 0.0 { (best.value, best.x) } else { (0.0, vec![0.0; n]) };
    Ok(BoundReport::new(Quantity::Rho1, Method::Multistart, Certificate::Heuristic)
        .with_lower(value)
        .with_witness(Witness::Vector(x)))
}
