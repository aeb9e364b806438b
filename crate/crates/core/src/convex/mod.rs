//! Convex functionals on discrete fields and their subdifferentials.
//!
//! * `phi(U) = 1/2 int |grad U|^2`, discretized edgewise with zero ghost
//!   values, so that `grad_phi = -Delta_h` is its exact gradient in the
//!   weighted inner product.
//! * `psi_r(U) = 1/r int |U|^r`, with gradient `|U|^(r-2) U`.
//!
//! Resolvents, Yosida approximations and Moreau envelopes live in [`prox`];
//! the linear resolvent of the rotated Laplacian lives in [`spectral`].

pub mod prox;
pub mod spectral;

pub use prox::{moreau_env_psi, resolvent_psi, yosida_psi, RadialProx};
pub use spectral::{resolvent_phi_complex, resolvent_phi_complex_cg, SineSolver};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{power_mean, Field, Grid};

/// Coefficients of the equation plus the regularization parameters.
///
/// The equation is
/// `u_t - (lambda + i alpha) Delta u - (kappa + i beta) |u|^(q-2) u - gamma u = f`,
/// regularized by `+ epsilon |u|^(r-2) u` and, for the doubly regularized
/// problem, by replacing the `q`-nonlinearity with its Yosida approximation of
/// index `mu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub lambda: f64,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default)]
    pub beta: f64,
    #[serde(default)]
    pub gamma: f64,
    pub kappa: f64,
    pub q: f64,
    pub r: f64,
    #[serde(default)]
    pub epsilon: f64,
    #[serde(default)]
    pub mu: f64,
}

/// Critical Sobolev exponent `2* = 2N/(N-2)`, infinite for `N <= 2`.
pub fn critical_exponent(dim: usize) -> f64 {
    if dim <= 2 {
        f64::INFINITY
    } else {
        2.0 * dim as f64 / (dim as f64 - 2.0)
    }
}

impl Params {
    pub fn validate(&self, dim: usize) -> Result<()> {
        self.check(dim, true)
    }

    /// Like [`validate`](Self::validate) but admits `kappa = 0`, the linear and
    /// purely dissipative regimes used by the stepper oracles.
    pub fn validate_allow_linear(&self, dim: usize) -> Result<()> {
        self.check(dim, false)
    }

    fn check(&self, dim: usize, strict_kappa: bool) -> Result<()> {
        let all = [
            self.lambda,
            self.alpha,
            self.beta,
            self.gamma,
            self.kappa,
            self.q,
            self.r,
            self.epsilon,
            self.mu,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("all coefficients must be finite".into()));
        }
        if !(self.lambda > 0.0) {
            return Err(Error::InvalidParams("lambda must be > 0".into()));
        }
        if strict_kappa && !(self.kappa > 0.0) {
            return Err(Error::InvalidParams("kappa must be > 0".into()));
        }
        if self.kappa < 0.0 {
            return Err(Error::InvalidParams("kappa must be >= 0".into()));
        }
        let crit = critical_exponent(dim);
        if !(self.q > 2.0 && self.q < crit) {
            return Err(Error::InvalidParams(format!(
                "q must satisfy 2 < q < 2* (= {crit}), got q = {}",
                self.q
            )));
        }
        if !(self.r > self.q && self.r < crit) {
            return Err(Error::InvalidParams(format!(
                "r must satisfy q < r < 2* (2 < q < r < 2*), got q = {}, r = {}",
                self.q, self.r
            )));
        }
        if self.epsilon < 0.0 {
            return Err(Error::InvalidParams("epsilon must be >= 0".into()));
        }
        if self.mu < 0.0 {
            return Err(Error::InvalidParams("mu must be >= 0".into()));
        }
        Ok(())
    }
}

/// Tolerances for the scalar prox solves and the linear solves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProxSolveSettings {
    /// Absolute tolerance on the scalar residual, scaled by `max(1, |U(x)|)`.
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    /// Relative residual tolerance for iterative linear solves.
    pub linear_tol: f64,
}

impl Default for ProxSolveSettings {
    fn default() -> Self {
        Self {
            newton_tol: 1e-13,
            newton_max_iter: 50,
            linear_tol: 1e-12,
        }
    }
}

impl ProxSolveSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.newton_tol > 0.0 && self.linear_tol > 0.0) || self.newton_max_iter == 0 {
            return Err(Error::InvalidArgument(
                "solver tolerances must be positive and max_iter >= 1".into(),
            ));
        }
        Ok(())
    }
}

fn apply_along_axes<F>(u: &[f64], g: &Grid, mut edge: F)
where
    F: FnMut(usize, Option<usize>, Option<usize>, f64),
{
    // Visits every point with its predecessor/successor along each axis
    // (None marks the zero ghost value) and the squared inverse spacing.
    for axis in 0..g.dim() {
        let stride = g.stride(axis);
        let n = g.n()[axis];
        let inv_h2 = 1.0 / (g.h()[axis] * g.h()[axis]);
        for idx in 0..u.len() {
            let j = (idx / stride) % n;
            let prev = (j > 0).then(|| idx - stride);
            let next = (j + 1 < n).then(|| idx + stride);
            edge(idx, prev, next, inv_h2);
        }
    }
}

fn neg_laplacian(u: &[f64], g: &Grid) -> Vec<f64> {
    let mut out = vec![0.0; u.len()];
    apply_along_axes(u, g, |idx, prev, next, inv_h2| {
        let left = prev.map_or(0.0, |p| u[p]);
        let right = next.map_or(0.0, |p| u[p]);
        out[idx] += (2.0 * u[idx] - left - right) * inv_h2;
    });
    out
}

fn dirichlet_sum(u: &[f64], g: &Grid) -> f64 {
    // Each point owns the edge to its successor; the first point also owns
    // the edge from the left ghost.
    let mut sum = 0.0;
    apply_along_axes(u, g, |idx, prev, next, inv_h2| {
        let right = next.map_or(0.0, |p| u[p]);
        let d = right - u[idx];
        sum += d * d * inv_h2;
        if prev.is_none() {
            sum += u[idx] * u[idx] * inv_h2;
        }
    });
    sum
}

/// Discrete Dirichlet energy `1/2 sum_edges |forward difference / h|^2 * cell volume`.
pub fn phi(u: &Field, g: &Grid) -> Result<f64> {
    g.check(u)?;
    Ok(0.5 * (dirichlet_sum(&u.u1, g) + dirichlet_sum(&u.u2, g)) * g.cell_volume())
}

/// `1/r int |U(x)|^r dx`.
pub fn psi_r(u: &Field, r: f64, g: &Grid) -> Result<f64> {
    if !(r >= 2.0) {
        return Err(Error::InvalidArgument(format!("psi_r needs r >= 2, got {r}")));
    }
    g.check(u)?;
    Ok(power_mean(u.magnitudes(), r, g.cell_volume()).powf(r) / r)
}

/// `-Delta_h U`, componentwise, with homogeneous Dirichlet ghosts.
pub fn grad_phi(u: &Field, g: &Grid) -> Result<Field> {
    g.check(u)?;
    Ok(Field::from_parts(neg_laplacian(&u.u1, g), neg_laplacian(&u.u2, g)))
}

/// `x^e` for `x >= 0`, taking the integer-power path when `e` is a small integer.
#[inline]
pub(crate) fn real_pow(x: f64, e: f64) -> f64 {
    if e == e.trunc() && e.abs() <= 16.0 {
        x.powi(e as i32)
    } else {
        x.powf(e)
    }
}

#[inline]
pub(crate) fn radial_power(p: [f64; 2], exponent: f64) -> [f64; 2] {
    let m = p[0].hypot(p[1]);
    if m == 0.0 {
        return [0.0, 0.0];
    }
    let w = real_pow(m, exponent);
    [w * p[0], w * p[1]]
}

/// Pointwise `|U(x)|^(r-2) U(x)`.
pub fn grad_psi(u: &Field, r: f64) -> Result<Field> {
    if !(r > 2.0) {
        return Err(Error::InvalidArgument(format!("grad_psi needs r > 2, got {r}")));
    }
    Ok(u.map_points(|p| radial_power(p, r - 2.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{apply_I, l2_inner, l2_norm};
    use std::f64::consts::PI;

    fn sine_mode(g: &Grid, k: usize) -> Field {
        let len = g.lengths()[0];
        g.sample(|x| ((k as f64 * PI * x[0] / len).sin(), 0.0))
    }

    fn lowest_eigenvalue(h: f64, len: f64) -> f64 {
        let s = (PI * h / (2.0 * len)).sin();
        4.0 / (h * h) * s * s
    }

    fn rough(g: &Grid, seed: u64) -> Field {
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut next = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        g.sample(|_| (next(), next()))
    }

    // Oracle: squared differences summed directly over the padded array.
    fn phi_by_padding(u: &[f64], h: f64) -> f64 {
        let mut padded = vec![0.0];
        padded.extend_from_slice(u);
        padded.push(0.0);
        0.5 * padded.windows(2).map(|w| ((w[1] - w[0]) / h).powi(2)).sum::<f64>() * h
    }

    #[test]
    fn phi_of_sine_mode() {
        let g = Grid::line(1.0, 31).unwrap();
        let u = sine_mode(&g, 1);
        let direct = phi_by_padding(u.u1(), g.h()[0]);
        let got = phi(&u, &g).unwrap();
        assert!((got - direct).abs() <= 1e-13 * direct);

        let lam = lowest_eigenvalue(g.h()[0], 1.0);
        let expected = 0.5 * lam * l2_norm(&u, &g).unwrap().powi(2);
        assert!((got - expected).abs() <= 1e-12 * expected);
        assert_eq!(phi(&g.zeros(), &g).unwrap(), 0.0);
    }

    #[test]
    fn phi_is_quadratic() {
        let g = Grid::rect([1.0, 2.0], [6, 9]).unwrap();
        let u = rough(&g, 3);
        let base = phi(&u, &g).unwrap();
        assert!(base > 0.0);
        let s = phi(&u.scaled(-3.0), &g).unwrap();
        assert!((s - 9.0 * base).abs() <= 1e-12 * s);
    }

    #[test]
    fn psi_values() {
        let g = Grid::line(4.0, 3).unwrap();
        let u = Field::new(vec![0.0, 3.0, 0.0], vec![0.0, 4.0, 0.0]).unwrap();
        assert!((psi_r(&u, 3.0, &g).unwrap() - 125.0 / 3.0).abs() < 1e-12);
        assert_eq!(psi_r(&g.zeros(), 3.0, &g).unwrap(), 0.0);
        assert!(psi_r(&u, 1.5, &g).is_err());
        let c = psi_r(&u.scaled(-0.5), 3.5, &g).unwrap();
        let b = psi_r(&u, 3.5, &g).unwrap();
        assert!((c - 0.5f64.powf(3.5) * b).abs() < 1e-12 * b);
    }

    #[test]
    fn grad_phi_sine_mode_is_eigenvector() {
        let g = Grid::line(2.0, 40).unwrap();
        let u = sine_mode(&g, 1);
        let lam = lowest_eigenvalue(g.h()[0], 2.0);
        let au = grad_phi(&u, &g).unwrap();
        // direct stencil with explicit ghosts
        let h = g.h()[0];
        for i in 0..u.len() {
            let l = if i == 0 { 0.0 } else { u.u1()[i - 1] };
            let r = if i + 1 == u.len() { 0.0 } else { u.u1()[i + 1] };
            let stencil = (2.0 * u.u1()[i] - l - r) / (h * h);
            assert!((au.u1()[i] - stencil).abs() < 1e-12);
            assert!((au.u1()[i] - lam * u.u1()[i]).abs() < 1e-10 * lam);
        }
        assert!(grad_phi(&g.zeros(), &g).unwrap().is_zero());
    }

    #[test]
    fn grad_phi_matches_directional_derivative() {
        for g in [Grid::line(1.0, 20).unwrap(), Grid::rect([1.0, 1.3], [7, 6]).unwrap()] {
            let u = rough(&g, 11);
            let w = rough(&g, 12);
            let s = 1e-5;
            let fd = (phi(&u.axpy(s, &w), &g).unwrap() - phi(&u.axpy(-s, &w), &g).unwrap()) / (2.0 * s);
            let exact = l2_inner(&grad_phi(&u, &g).unwrap(), &w, &g).unwrap();
            assert!((fd - exact).abs() <= 1e-6 * exact.abs());
        }
    }

    #[test]
    fn grad_psi_matches_directional_derivative() {
        let g = Grid::rect([1.0, 1.0], [5, 5]).unwrap();
        let u = rough(&g, 5);
        let w = rough(&g, 6);
        for r in [2.5, 3.0, 4.0, 6.0] {
            let s = 1e-5;
            let fd = (psi_r(&u.axpy(s, &w), r, &g).unwrap() - psi_r(&u.axpy(-s, &w), r, &g).unwrap()) / (2.0 * s);
            let exact = l2_inner(&grad_psi(&u, r).unwrap(), &w, &g).unwrap();
            assert!((fd - exact).abs() <= 1e-6 * exact.abs(), "r={r}: {fd} vs {exact}");
        }
    }

    #[test]
    fn grad_phi_is_symmetric_and_commutes_with_rotation() {
        let g = Grid::rect([1.0, 2.0], [8, 11]).unwrap();
        let u = rough(&g, 1);
        let v = rough(&g, 2);
        let a = l2_inner(&grad_phi(&u, &g).unwrap(), &v, &g).unwrap();
        let b = l2_inner(&u, &grad_phi(&v, &g).unwrap(), &g).unwrap();
        assert!((a - b).abs() <= 1e-12 * a.abs());
        assert_eq!(grad_phi(&apply_I(&u), &g).unwrap(), apply_I(&grad_phi(&u, &g).unwrap()));
    }

    #[test]
    fn grad_psi_pointwise() {
        let u = Field::new(vec![3.0, 0.0], vec![4.0, 0.0]).unwrap();
        let v = grad_psi(&u, 3.0).unwrap();
        assert_eq!(v.point(0), [15.0, 20.0]);
        assert_eq!(v.point(1), [0.0, 0.0]);
        assert!(grad_psi(&u, 2.0).is_err());
    }

    #[test]
    fn grad_psi_is_orthogonal_to_rotation() {
        let g = Grid::rect([1.0, 1.0], [9, 9]).unwrap();
        let u = rough(&g, 9).scaled(4.0);
        for q in [2.5, 3.0, 5.0] {
            let gp = grad_psi(&u, q).unwrap();
            let ip = l2_inner(&gp, &apply_I(&u), &g).unwrap();
            let scale = l2_norm(&gp, &g).unwrap() * l2_norm(&u, &g).unwrap();
            assert!(ip.abs() <= 1e-14 * scale);
        }
    }

    fn base_params() -> Params {
        Params {
            lambda: 1.0,
            alpha: 0.0,
            beta: 0.0,
            gamma: 0.0,
            kappa: 1.0,
            q: 3.0,
            r: 4.0,
            epsilon: 0.0,
            mu: 0.0,
        }
    }

    #[test]
    fn params_validation() {
        assert!(base_params().validate(1).is_ok());
        let bad = [
            Params {
                lambda: 0.0,
                ..base_params()
            },
            Params {
                kappa: -1.0,
                ..base_params()
            },
            Params {
                q: 2.0,
                ..base_params()
            },
            Params {
                r: 3.0,
                ..base_params()
            },
            Params {
                epsilon: -1e-3,
                ..base_params()
            },
            Params {
                mu: -1.0,
                ..base_params()
            },
            Params {
                alpha: f64::NAN,
                ..base_params()
            },
        ];
        for p in bad {
            assert!(p.validate(2).is_err(), "{p:?}");
        }
        // 2* = 6 in three dimensions
        assert!(Params {
            r: 6.0,
            ..base_params()
        }
        .validate(3)
        .is_err());
        assert!(Params {
            r: 5.0,
            ..base_params()
        }
        .validate(3)
        .is_ok());
        let msg = Params {
            q: 2.0,
            ..base_params()
        }
        .validate(1)
        .unwrap_err()
        .to_string();
        assert!(msg.contains("2 < q"));
    }
}
