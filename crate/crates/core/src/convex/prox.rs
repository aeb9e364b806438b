//! Resolvent, Yosida approximation and Moreau envelope of `psi_r`.
//!
//! `|U|^(r-2) U` is rotation-equivariant, so `(1 + mu d psi_r)^{-1}` acts on
//! each point radially: the output is `(s/m) U(x)` where `m = |U(x)|` and
//! `s >= 0` solves `s + mu s^(r-1) = m`. The scalar map is strictly
//! increasing and convex on `[0, inf)`, so Newton started from an upper bound
//! decreases monotonically to the root; bisection on the bracket is kept as a
//! safeguard.

use crate::convex::{real_pow, ProxSolveSettings};
use crate::error::{Error, Result};
use crate::grid::{power_mean, Field, Grid};

/// Root of `s + mu s^(r-1) = m` together with the deficit `d = m - s`.
///
/// Both are carried because for small `mu` the deficit is much smaller than
/// `m` and cannot be recovered accurately from `s` by subtraction; the Yosida
/// approximation is `d / mu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialRoot {
    pub s: f64,
    pub d: f64,
}

/// Scalar prox solver for a fixed exponent and index.
#[derive(Debug, Clone, Copy)]
pub struct RadialProx {
    r: f64,
    mu: f64,
    settings: ProxSolveSettings,
}

impl RadialProx {
    pub fn new(r: f64, mu: f64, settings: ProxSolveSettings) -> Result<Self> {
        if !(r > 2.0) || !r.is_finite() {
            return Err(Error::InvalidArgument(format!("resolvent needs r > 2, got {r}")));
        }
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::InvalidArgument(format!("resolvent needs mu > 0, got {mu}")));
        }
        settings.validate()?;
        Ok(Self { r, mu, settings })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    fn residual(&self, s: f64, m: f64) -> f64 {
        s + self.mu * real_pow(s, self.r - 1.0) - m
    }

    fn accepts(&self, s: f64, m: f64) -> bool {
        self.residual(s, m).abs() <= self.settings.newton_tol * m.max(1.0)
    }

    /// Solves `s + mu s^(r-1) = m` for `m >= 0`.
    pub fn solve(&self, m: f64) -> Result<RadialRoot> {
        if m == 0.0 {
            return Ok(RadialRoot { s: 0.0, d: 0.0 });
        }
        if !(m > 0.0) || !m.is_finite() {
            return Err(Error::NoConvergence(format!("radial magnitude {m} is not finite")));
        }
        let (r, mu) = (self.r, self.mu);
        let upper = m.min((m / mu).powf(1.0 / (r - 1.0)));
        let s = match self.newton(m, upper) {
            Some(s) => s,
            None => self.bisect(m).ok_or_else(|| {
                Error::NoConvergence(format!(
                    "s + {mu} s^{} = {m} unresolved after Newton and bisection",
                    r - 1.0
                ))
            })?,
        };
        let d = m - s;
        if d < 0.5 * m {
            // refine in the deficit variable: d = mu (m - d)^(r-1)
            let mut d = mu * real_pow(s, r - 1.0);
            for _ in 0..3 {
                let base = m - d;
                let p = real_pow(base, r - 2.0);
                let h = d - mu * base * p;
                let dh = 1.0 + mu * (r - 1.0) * p;
                let next = d - h / dh;
                if !(next > 0.0 && next < m) || next == d {
                    break;
                }
                d = next;
            }
            return Ok(RadialRoot { s: m - d, d });
        }
        Ok(RadialRoot { s, d })
    }

    fn newton(&self, m: f64, upper: f64) -> Option<f64> {
        let (r, mu) = (self.r, self.mu);
        let (mut lo, mut hi) = (0.0f64, upper);
        let mut s = upper;
        for _ in 0..self.settings.newton_max_iter {
            let p = real_pow(s, r - 2.0);
            let f = s + mu * s * p - m;
            if f == 0.0 {
                return Some(s);
            }
            if f > 0.0 {
                hi = hi.min(s);
            } else {
                lo = lo.max(s);
            }
            let df = 1.0 + mu * (r - 1.0) * p;
            let mut next = s - f / df;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - s).abs() <= 2.0 * f64::EPSILON * s.abs() {
                s = next;
                break;
            }
            s = next;
        }
        self.accepts(s, m).then_some(s)
    }

    fn bisect(&self, m: f64) -> Option<f64> {
        let (mut lo, mut hi) = (0.0f64, m);
        for _ in 0..2000 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.residual(mid, m) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        [lo, hi]
            .into_iter()
            .min_by(|a, b| self.residual(*a, m).abs().total_cmp(&self.residual(*b, m).abs()))
            .filter(|s| self.accepts(*s, m))
    }

    /// Returns `(J_mu U, d psi_{r,mu}(U))`.
    pub fn apply(&self, u: &Field) -> Result<(Field, Field)> {
        let mut resolvent = Vec::with_capacity(u.len());
        let mut yosida = Vec::with_capacity(u.len());
        for p in u.points() {
            let m = p[0].hypot(p[1]);
            if m == 0.0 {
                resolvent.push([0.0, 0.0]);
                yosida.push([0.0, 0.0]);
                continue;
            }
            let root = self.solve(m)?;
            let (a, b) = (root.s / m, root.d / (self.mu * m));
            resolvent.push([a * p[0], a * p[1]]);
            yosida.push([b * p[0], b * p[1]]);
        }
        Ok((Field::from_points(resolvent), Field::from_points(yosida)))
    }

    pub fn resolvent(&self, u: &Field) -> Result<Field> {
        Ok(self.apply(u)?.0)
    }

    pub fn yosida(&self, u: &Field) -> Result<Field> {
        Ok(self.apply(u)?.1)
    }
}

/// `J_mu U = (1 + mu d psi_r)^{-1} U`, solved pointwise.
pub fn resolvent_psi(u: &Field, r: f64, mu: f64, s: &ProxSolveSettings) -> Result<Field> {
    RadialProx::new(r, mu, *s)?.resolvent(u)
}

/// `(U - J_mu U) / mu`.
pub fn yosida_psi(u: &Field, r: f64, mu: f64, s: &ProxSolveSettings) -> Result<Field> {
    RadialProx::new(r, mu, *s)?.yosida(u)
}

/// Moreau envelope `psi_{r,mu}(U) = mu/2 |d psi_{r,mu}(U)|^2 + psi_r(J_mu U)`.
pub fn moreau_env_psi(u: &Field, r: f64, mu: f64, g: &Grid, s: &ProxSolveSettings) -> Result<f64> {
    g.check(u)?;
    let (j, y) = RadialProx::new(r, mu, *s)?.apply(u)?;
    let w = g.cell_volume();
    let quad = 0.5 * mu * y.dot_raw(&y) * w;
    let pow = power_mean(j.magnitudes(), r, w).powf(r) / r;
    Ok(quad + pow)
}
