//! Monitored energies, blow-up detection, and the constants of the
//! small-data and local-existence estimates.

use serde::{Deserialize, Serialize};

use crate::convex::{grad_phi, grad_psi, phi, psi_r, Params};
use crate::error::{Error, Result};
use crate::grid::{l2_norm_unchecked, Field, Grid, TimeSeriesField};
use crate::lawcheck::{estimate_c0, estimate_cb};

pub const DEFAULT_BLOWUP_THRESHOLD: f64 = 1e12;

/// Snapshot of every quantity the a priori estimates bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyRecord {
    pub t: f64,
    pub l2_sq: f64,
    pub phi: f64,
    pub psi_q: f64,
    pub psi_r: f64,
    pub dphi_l2: f64,
    pub dpsi_q_l2: f64,
    /// `l2_sq + 2 phi`, the quantity that diverges at a finite maximal time.
    pub combined: f64,
}

impl EnergyRecord {
    pub const CSV_HEADER: &'static str = "t,l2_sq,phi,psi_q,psi_r,dphi_l2,dpsi_q_l2,combined";

    pub fn values(&self) -> [f64; 8] {
        [
            self.t,
            self.l2_sq,
            self.phi,
            self.psi_q,
            self.psi_r,
            self.dphi_l2,
            self.dpsi_q_l2,
            self.combined,
        ]
    }

    pub fn from_values(v: [f64; 8]) -> Self {
        Self {
            t: v[0],
            l2_sq: v[1],
            phi: v[2],
            psi_q: v[3],
            psi_r: v[4],
            dphi_l2: v[5],
            dpsi_q_l2: v[6],
            combined: v[7],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values().iter().all(|v| v.is_finite())
    }

    /// `1/2 |U|^2 + phi(U)`.
    pub fn half_energy(&self) -> f64 {
        0.5 * self.l2_sq + self.phi
    }

    /// One CSV row, floats in shortest round-trip form.
    pub fn csv_row(&self) -> String {
        self.values()
            .iter()
            .map(|v| format!("{v:?}"))
            .collect::<Vec<_>>()
            .join(",")
    }
}

pub fn record(u: &Field, t: f64, params: &Params, g: &Grid) -> Result<EnergyRecord> {
    g.check(u)?;
    let l2 = l2_norm_unchecked(u, g);
    let l2_sq = l2 * l2;
    let phi_val = phi(u, g)?;
    let dphi = grad_phi(u, g)?;
    let dpsi = grad_psi(u, params.q)?;
    Ok(EnergyRecord {
        t,
        l2_sq,
        phi: phi_val,
        psi_q: psi_r(u, params.q, g)?,
        psi_r: psi_r(u, params.r, g)?,
        dphi_l2: l2_norm_unchecked(&dphi, g),
        dpsi_q_l2: l2_norm_unchecked(&dpsi, g),
        combined: l2_sq + 2.0 * phi_val,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MonitorStatus {
    Ok,
    BlownUp { t_detect: f64 },
}

impl MonitorStatus {
    pub fn is_blown_up(&self) -> bool {
        matches!(self, MonitorStatus::BlownUp { .. })
    }
}

/// First record whose `combined` exceeds `threshold` or which carries a
/// non-finite value.
pub fn blowup_monitor(records: &[EnergyRecord], threshold: f64) -> MonitorStatus {
    records
        .iter()
        .find(|r| !r.is_finite() || r.combined > threshold)
        .map_or(MonitorStatus::Ok, |r| MonitorStatus::BlownUp { t_detect: r.t })
}

/// `sup_{s >= 0} int_s^{s+1} density(t) dt` for a piecewise-constant
/// nonnegative density given as `(start, end, value)` pieces, zero elsewhere.
pub fn unit_window_sup(pieces: &[(f64, f64, f64)]) -> f64 {
    if pieces.is_empty() {
        return 0.0;
    }
    let mut sorted: Vec<_> = pieces.iter().copied().filter(|p| p.1 > p.0).collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    // cumulative integral at each piece start
    let mut cum = Vec::with_capacity(sorted.len() + 1);
    let mut acc = 0.0;
    cum.push(0.0);
    for p in &sorted {
        acc += (p.1 - p.0) * p.2;
        cum.push(acc);
    }
    let integral_to = |x: f64| -> f64 {
        let k = sorted.partition_point(|p| p.0 <= x);
        if k == 0 {
            return 0.0;
        }
        let p = sorted[k - 1];
        cum[k - 1] + (x.min(p.1) - p.0).max(0.0) * p.2
    };
    // the window integral is piecewise linear in s: extremes sit where s or
    // s + 1 meets a breakpoint
    let mut best: f64 = 0.0;
    for p in &sorted {
        for b in [p.0, p.1] {
            for s in [b, b - 1.0] {
                if s >= 0.0 {
                    best = best.max(integral_to(s + 1.0) - integral_to(s));
                }
            }
        }
    }
    best.max(integral_to(1.0))
}

/// `|||F|||_2 = (sup_s int_s^{s+1} |F~(t)|^2_{L^2} dt)^(1/2)` for the
/// zero-extended forcing.
pub fn triple_norm(f: &TimeSeriesField, g: &Grid) -> Result<f64> {
    let b = f.breakpoints();
    let mut pieces = Vec::with_capacity(f.values().len());
    for (k, v) in f.values().iter().enumerate() {
        g.check(v)?;
        let n = l2_norm_unchecked(v, g);
        pieces.push((b[k], b[k + 1], n * n));
    }
    Ok(unit_window_sup(&pieces).sqrt())
}

fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    recurse(f, a, b, fa, fm, fb, whole, tol, 48)
}

/// Time for the comparison ODE `y' = m(y)` to climb from `y0` to `y0 + 1`,
/// `int_{y0}^{y0+1} ds / m(s)`. Infinite when `m(y0) = 0`.
pub fn comparison_time<M: Fn(f64) -> f64>(y0: f64, m: M) -> Result<f64> {
    if !(y0 >= 0.0) || !y0.is_finite() {
        return Err(Error::InvalidArgument(format!("y0 must be >= 0, got {y0}")));
    }
    let m0 = m(y0);
    if !(m0 >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "majorant must be nonnegative, m(y0) = {m0}"
        )));
    }
    if m0 == 0.0 {
        return Ok(f64::INFINITY);
    }
    let inv = |s: f64| 1.0 / m(s);
    let scale = 1.0 / m0;
    Ok(adaptive_simpson(&inv, y0, y0 + 1.0, 1e-13 * scale))
}

/// Exponents and constants of the local estimate for a given dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateExponents {
    pub xi: f64,
    pub theta: f64,
    pub rho: f64,
}

/// `xi` of the Gagliardo-Nirenberg step: `1/2` for `N <= 2`,
/// `(2* - q) / (2(N - 2))` otherwise.
pub fn xi_exponent(dim: usize, q: f64) -> f64 {
    if dim <= 2 {
        0.5
    } else {
        let n = dim as f64;
        (crate::convex::critical_exponent(dim) - q) / (2.0 * (n - 2.0))
    }
}

/// Interpolation exponent `theta` bounding `|d psi_q|^2` by `|Delta U|^(2-theta)`.
pub fn theta_exponent(dim: usize, q: f64) -> f64 {
    let n = dim as f64;
    if dim <= 2 || q <= (2.0 * n - 2.0) / (n - 2.0) {
        2.0
    } else {
        2.0 * q - n * (q - 2.0)
    }
}

pub fn exponents(dim: usize, q: f64) -> EstimateExponents {
    let theta = theta_exponent(dim, q);
    EstimateExponents {
        xi: xi_exponent(dim, q),
        theta,
        rho: 1.0 + 2.0 * (q - 2.0) / theta,
    }
}

/// Non-decreasing majorant `l(s)` of the local energy inequality, read as the
/// sum of its three displayed terms, with the Young constant `C_bar` taken
/// equal to the `C_0` estimate.
pub fn local_majorant(params: &Params, dim: usize, c0: f64) -> impl Fn(f64) -> f64 {
    let q = params.q;
    let gamma_plus = params.gamma.max(0.0);
    let rho = exponents(dim, q).rho;
    let coef = params.kappa * (0.5 * params.lambda + 2.0 * c0).powf(0.5 * q) * 2.0;
    move |s: f64| {
        2.0 * (gamma_plus + 1.0) * s + coef * s.powf(0.5 * q) + c0 * ((2.0 * s).powf(2.0 * (q - 1.0)) + s.powf(rho))
    }
}

/// Local existence time `T_0 = int_{y0}^{y0+1} ds / (2 l(s))`.
pub fn local_time_estimate(y0: f64, params: &Params, dim: usize, c0: f64) -> Result<f64> {
    if !(c0 > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "C_0 estimate must be positive, got {c0}"
        )));
    }
    let l = local_majorant(params, dim, c0);
    comparison_time(y0, |s| 2.0 * l(s))
}

/// Constants of the small-data global bound. `cb_est` and `c0_est` are
/// randomized lower estimates of domain constants, not certified values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmallDataConstants {
    pub delta: f64,
    pub eps0: f64,
    pub l1: f64,
    pub l2: f64,
    pub l: f64,
    pub eps1: f64,
    pub cb_est: f64,
    pub c0_est: f64,
}

/// Settings for the randomized constant estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateSettings {
    pub samples: usize,
    pub seed: u64,
}

impl Default for EstimateSettings {
    fn default() -> Self {
        Self { samples: 2000, seed: 0 }
    }
}

/// Assembles the constants from `delta`, `C_b` and `C_0`.
pub fn small_data_constants_from(params: &Params, cb: f64, c0: f64) -> Result<SmallDataConstants> {
    if !(params.gamma < 0.0) {
        return Err(Error::InvalidParams(format!(
            "small-data constants need gamma < 0, got {}",
            params.gamma
        )));
    }
    if !(cb > 0.0 && c0 > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "C_b and C_0 must be positive, got {cb}, {c0}"
        )));
    }
    let q = params.q;
    let g_abs = params.gamma.abs();
    let delta = params.lambda.min(g_abs);
    let eps0 = (delta / (params.kappa * cb.powf(0.5 * q) * 2f64.powf(0.5 * q))).powf(2.0 / (q - 2.0));
    let l1 = 1.0 + 1.0 / (1.0 - (-0.5 * delta).exp());
    let l2 = (l1 + 0.5 * l1 * l1) / delta;
    let l = 2.0 + l1 * l1 + (1.0 / params.lambda + c0 * (l1 * l1 + l2)) / (1.0 - (-2.0 * g_abs).exp());
    Ok(SmallDataConstants {
        delta,
        eps0,
        l1,
        l2,
        l,
        eps1: eps0 / l,
        cb_est: cb,
        c0_est: c0,
    })
}

pub fn small_data_constants_with(params: &Params, g: &Grid, est: EstimateSettings) -> Result<SmallDataConstants> {
    if !(params.gamma < 0.0) {
        return Err(Error::InvalidParams(format!(
            "small-data constants need gamma < 0, got {}",
            params.gamma
        )));
    }
    let cb = estimate_cb(g, params.q, est.samples, est.seed)?;
    let c0 = estimate_c0(g, params, est.samples, est.seed)?;
    small_data_constants_from(params, cb, c0)
}

pub fn small_data_constants(params: &Params, g: &Grid) -> Result<SmallDataConstants> {
    small_data_constants_with(params, g, EstimateSettings::default())
}

/// `1/2 |U|^2 + phi(U) < L r^2` on every record.
pub fn small_data_check(records: &[EnergyRecord], consts: &SmallDataConstants, r_small: f64) -> bool {
    let bound = consts.l * r_small * r_small;
    records.iter().all(|r| r.half_energy() < bound)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GronwallVerdict {
    Holds,
    /// The differential inequality already fails on `[t_k, t_{k+1}]`.
    HypothesisViolated {
        index: usize,
    },
    /// Hypothesis held but the bound failed at sample `index`.
    ConclusionViolated {
        index: usize,
    },
}

impl GronwallVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, GronwallVerdict::Holds)
    }
}

const GRONWALL_SLACK: f64 = 1e-8;

/// Checks `j(t) <= j(0) e^{-delta t} + K |||f|||_1 / (1 - e^{-delta})` on
/// sampled data, after verifying `j' + delta j <= K |f|` in its integrated
/// per-interval form with `f[k]` held on `[t_k, t_{k+1})`.
pub fn gronwall_check(times: &[f64], j: &[f64], delta: f64, k: f64, f: &[f64]) -> Result<GronwallVerdict> {
    if times.len() != j.len() || times.len() != f.len() || times.is_empty() {
        return Err(Error::InvalidArgument(
            "times, j and f must have one common nonzero length".into(),
        ));
    }
    if times.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidArgument("times must be strictly increasing".into()));
    }
    if !(delta > 0.0 && k > 0.0) {
        return Err(Error::InvalidArgument(format!("need delta, K > 0, got {delta}, {k}")));
    }
    for i in 0..times.len() - 1 {
        let decay = (-delta * (times[i + 1] - times[i])).exp();
        let rhs = decay * j[i] + k * f[i].abs() * (1.0 - decay) / delta;
        let scale = rhs.abs().max(j[i + 1].abs());
        if j[i + 1] - rhs > GRONWALL_SLACK * scale {
            return Ok(GronwallVerdict::HypothesisViolated { index: i });
        }
    }
    let t0 = times[0];
    let pieces: Vec<_> = (0..times.len() - 1)
        .map(|i| (times[i] - t0, times[i + 1] - t0, f[i].abs()))
        .collect();
    let f_norm = unit_window_sup(&pieces);
    let tail = k * f_norm / (1.0 - (-delta).exp());
    for (i, (t, ji)) in times.iter().zip(j).enumerate() {
        let bound = j[0] * (-delta * (t - t0)).exp() + tail;
        if *ji > bound * (1.0 + GRONWALL_SLACK) {
            return Ok(GronwallVerdict::ConclusionViolated { index: i });
        }
    }
    Ok(GronwallVerdict::Holds)
}
