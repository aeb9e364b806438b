//! Linear resolvent `(Id + mu (lambda + alpha I) A_h)^{-1}` with `A_h = -Delta_h`.
//!
//! On a Dirichlet box `A_h` is diagonal in the tensor sine basis, with
//! eigenvalue `sum_axis (4/h^2) sin^2(k pi / (2(n+1)))` for `k = 1..n`. In the
//! complex picture `I` is multiplication by `i`, so each mode is divided by
//! the complex scalar `1 + mu (lambda + i alpha) nu_k`.

use std::sync::Arc;

use rustdct::{DctPlanner, Dst1};

use crate::convex::{grad_phi, ProxSolveSettings};
use crate::error::{Error, Result};
use crate::grid::{apply_I, Field, Grid};

/// Cached DST plans and eigenvalues for one grid.
#[derive(Clone)]
pub struct SineSolver {
    grid: Grid,
    plans: Vec<Arc<dyn Dst1<f64>>>,
    eigenvalues: Vec<f64>,
}

impl std::fmt::Debug for SineSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SineSolver")
            .field("grid", &self.grid)
            .finish_non_exhaustive()
    }
}

fn axis_eigenvalues(n: usize, h: f64) -> Vec<f64> {
    (1..=n)
        .map(|k| {
            let s = (k as f64 * std::f64::consts::PI / (2.0 * (n as f64 + 1.0))).sin();
            4.0 / (h * h) * s * s
        })
        .collect()
}

impl SineSolver {
    pub fn new(grid: &Grid) -> Self {
        let mut planner = DctPlanner::new();
        let plans = grid.n().iter().map(|&n| planner.plan_dst1(n)).collect();
        let per_axis: Vec<Vec<f64>> = grid
            .n()
            .iter()
            .zip(grid.h())
            .map(|(&n, &h)| axis_eigenvalues(n, h))
            .collect();
        let eigenvalues = (0..grid.len())
            .map(|idx| {
                let mut rest = idx;
                let mut total = 0.0;
                for axis in (0..grid.dim()).rev() {
                    let n = grid.n()[axis];
                    total += per_axis[axis][rest % n];
                    rest /= n;
                }
                total
            })
            .collect();
        Self {
            grid: grid.clone(),
            plans,
            eigenvalues,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Eigenvalues of `A_h` in flat mode order.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Unnormalized separable DST-I; applying it twice multiplies by
    /// `prod (n+1)/2`.
    fn transform(&self, data: &mut [f64]) {
        let g = &self.grid;
        let mut line = Vec::new();
        for axis in 0..g.dim() {
            let n = g.n()[axis];
            let stride = g.stride(axis);
            let plan = &self.plans[axis];
            line.resize(n, 0.0);
            for start in 0..data.len() {
                // first element of each line: index with axis-coordinate 0
                if !(start / stride).is_multiple_of(n) {
                    continue;
                }
                for (j, v) in line.iter_mut().enumerate() {
                    *v = data[start + j * stride];
                }
                plan.process_dst1(&mut line);
                for (j, v) in line.iter().enumerate() {
                    data[start + j * stride] = *v;
                }
            }
        }
    }

    fn normalization(&self) -> f64 {
        self.grid.n().iter().map(|&n| 2.0 / (n as f64 + 1.0)).product()
    }

    /// Applies a per-mode complex multiplier `c_k` to `u1 + i u2`.
    pub fn apply_multiplier<F>(&self, u: &Field, mut multiplier: F) -> Result<Field>
    where
        F: FnMut(f64) -> (f64, f64),
    {
        self.grid.check(u)?;
        let mut a = u.u1.clone();
        let mut b = u.u2.clone();
        self.transform(&mut a);
        self.transform(&mut b);
        let norm = self.normalization();
        for ((x, y), nu) in a.iter_mut().zip(b.iter_mut()).zip(&self.eigenvalues) {
            let (cr, ci) = multiplier(*nu);
            let (re, im) = (*x * cr - *y * ci, *x * ci + *y * cr);
            *x = re * norm;
            *y = im * norm;
        }
        self.transform(&mut a);
        self.transform(&mut b);
        Ok(Field::from_parts(a, b))
    }

    /// Solves `(Id + mu (lambda + alpha I) A_h) V = U`.
    pub fn resolvent(&self, u: &Field, mu: f64, lambda: f64, alpha: f64) -> Result<Field> {
        if mu == 0.0 {
            self.grid.check(u)?;
            return Ok(u.clone());
        }
        self.apply_multiplier(u, |nu| {
            // 1 / (c + i d)
            let c = 1.0 + mu * lambda * nu;
            let d = mu * alpha * nu;
            let den = c * c + d * d;
            (c / den, -d / den)
        })
    }

    /// Reflected resolvent `2 J - Id`, the implicit-midpoint (Cayley) map.
    pub fn reflected_resolvent(&self, u: &Field, mu: f64, lambda: f64, alpha: f64) -> Result<Field> {
        let j = self.resolvent(u, mu, lambda, alpha)?;
        Ok(j.scaled(2.0).sub(u))
    }
}

fn check_linear_args(mu: f64, lambda: f64, alpha: f64) -> Result<()> {
    if !(mu >= 0.0) || !mu.is_finite() {
        return Err(Error::InvalidArgument(format!("mu must be >= 0, got {mu}")));
    }
    if !(lambda > 0.0) || !lambda.is_finite() || !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "need lambda > 0 and finite alpha, got {lambda}, {alpha}"
        )));
    }
    Ok(())
}

/// Applies `M = Id + mu (lambda + alpha I) A_h`.
pub fn apply_linear_operator(v: &Field, mu: f64, lambda: f64, alpha: f64, g: &Grid) -> Result<Field> {
    let av = grad_phi(v, g)?;
    let rot = apply_I(&av);
    Ok(v.axpy(mu * lambda, &av).axpy(mu * alpha, &rot))
}

/// Sine-basis solve of `(Id + mu (lambda + alpha I) A_h) V = U`.
pub fn resolvent_phi_complex(
    u: &Field,
    mu: f64,
    lambda: f64,
    alpha: f64,
    g: &Grid,
    _s: &ProxSolveSettings,
) -> Result<Field> {
    check_linear_args(mu, lambda, alpha)?;
    SineSolver::new(g).resolvent(u, mu, lambda, alpha)
}

/// Same system solved by conjugate gradients on the normal equations. Grid
/// agnostic; used as an independent route against the sine-basis solve.
pub fn resolvent_phi_complex_cg(
    u: &Field,
    mu: f64,
    lambda: f64,
    alpha: f64,
    g: &Grid,
    s: &ProxSolveSettings,
) -> Result<Field> {
    check_linear_args(mu, lambda, alpha)?;
    g.check(u)?;
    let apply = |v: &Field| apply_linear_operator(v, mu, lambda, alpha, g);
    // M^T = Id + mu (lambda - alpha I) A_h since I^T = -I commutes with A_h
    let apply_t = |v: &Field| apply_linear_operator(v, mu, lambda, -alpha, g);

    let b_norm = u.dot_raw(u).sqrt();
    if b_norm == 0.0 {
        return Ok(g.zeros());
    }
    let mut x = g.zeros();
    let mut r = u.clone();
    let mut z = apply_t(&r)?;
    let mut p = z.clone();
    let mut zz = z.dot_raw(&z);
    let max_iter = 20 * g.len() + 100;
    for _ in 0..max_iter {
        let mp = apply(&p)?;
        let step = zz / mp.dot_raw(&mp);
        x = x.axpy(step, &p);
        r = r.axpy(-step, &mp);
        if r.dot_raw(&r).sqrt() <= s.linear_tol * b_norm {
            return Ok(x);
        }
        z = apply_t(&r)?;
        let zz_next = z.dot_raw(&z);
        p = z.axpy(zz_next / zz, &p);
        zz = zz_next;
    }
    Err(Error::NoConvergence(format!(
        "CGNR did not reach relative residual {} in {max_iter} iterations",
        s.linear_tol
    )))
}
