//! Operator-splitting time integration.
//!
//! One step composes three flows: the linear part `(lambda + alpha I) A_h`,
//! the regularizing part `epsilon d psi_r`, and the reaction
//! `(kappa + beta I) N(U) + gamma U + F`. The first two are monotone and are
//! always taken implicitly through resolvents. The reaction is explicit by
//! default.
//!
//! * Lie: backward Euler for the linear and prox flows, then forward Euler
//!   (or backward Euler by fixed-point iteration) for the reaction.
//! * Strang: `L(h/2) P(h/2) R(h) P(h/2) L(h/2)`, where the half flows are
//!   implicit midpoint steps (reflected resolvents) and the reaction uses
//!   Heun's method (or implicit midpoint), so the composition is second order.

use serde::{Deserialize, Serialize};

use crate::convex::{grad_psi, Params, ProxSolveSettings, RadialProx, SineSolver};
use crate::diagnostics::{record, EnergyRecord, MonitorStatus, DEFAULT_BLOWUP_THRESHOLD};
use crate::error::{Error, Result};
use crate::grid::{rotate_scale, Field, Grid, TimeSeriesField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Equation {
    /// The unregularized equation.
    Acgl,
    /// With `+ epsilon d psi_r`.
    AeEps,
    /// With `+ epsilon d psi_r` and the `q`-nonlinearity replaced by its Yosida approximation.
    AeEpsMu,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Splitting {
    #[default]
    Lie,
    Strang,
}

fn default_dt() -> f64 {
    1e-3
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeConfig {
    pub equation: Equation,
    #[serde(default = "default_dt")]
    pub dt: f64,
    pub t_end: f64,
    #[serde(default)]
    pub splitting: Splitting,
    #[serde(default = "default_true")]
    pub explicit_nonmonotone: bool,
}

impl SchemeConfig {
    pub fn new(equation: Equation, dt: f64, t_end: f64) -> Self {
        Self {
            equation,
            dt,
            t_end,
            splitting: Splitting::Lie,
            explicit_nonmonotone: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidParams(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return Err(Error::InvalidParams(format!("t_end must be > 0, got {}", self.t_end)));
        }
        if self.dt > self.t_end {
            return Err(Error::InvalidParams(format!(
                "dt must satisfy dt <= t_end, got dt = {}, t_end = {}",
                self.dt, self.t_end
            )));
        }
        Ok(())
    }

    /// Number of steps; the last one is clipped to land on `t_end`.
    pub fn num_steps(&self) -> usize {
        let k = self.t_end / self.dt;
        let nearest = k.round();
        if (k - nearest).abs() <= 1e-9 * nearest.max(1.0) {
            nearest.max(1.0) as usize
        } else {
            k.ceil() as usize
        }
    }

    /// Time after `steps` steps.
    pub fn time_at(&self, steps: usize) -> f64 {
        if steps >= self.num_steps() {
            self.t_end
        } else {
            steps as f64 * self.dt
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepState {
    pub t: f64,
    pub u: Field,
    pub step_index: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum StepError {
    #[error("field became non-finite after t = {}", last.t)]
    BlowUp { last: StepState },
    #[error(transparent)]
    Solver(#[from] Error),
}

/// Backward-Euler step of the linear flow, `(Id + dt (lambda + alpha I) A_h)^{-1} U`.
pub fn substep_linear(u: &Field, dt: f64, params: &Params, g: &Grid, s: &ProxSolveSettings) -> Result<Field> {
    crate::convex::resolvent_phi_complex(u, dt, params.lambda, params.alpha, g, s)
}

/// Backward-Euler step of `epsilon d psi_r`.
pub fn substep_prox_r(u: &Field, dt: f64, eps: f64, r: f64, s: &ProxSolveSettings) -> Result<Field> {
    if eps < 0.0 {
        return Err(Error::InvalidArgument(format!("epsilon must be >= 0, got {eps}")));
    }
    if eps == 0.0 || dt == 0.0 {
        return Ok(u.clone());
    }
    RadialProx::new(r, dt * eps, *s)?.resolvent(u)
}

fn nonlinearity(u: &Field, params: &Params, equation: Equation, s: &ProxSolveSettings) -> Result<Field> {
    match equation {
        Equation::Acgl | Equation::AeEps => grad_psi(u, params.q),
        Equation::AeEpsMu => RadialProx::new(params.q, params.mu, *s)?.yosida(u),
    }
}

fn reaction_rhs(
    u: &Field,
    params: &Params,
    forcing: Option<&Field>,
    equation: Equation,
    s: &ProxSolveSettings,
) -> Result<Field> {
    let n = nonlinearity(u, params, equation, s)?;
    let mut out = rotate_scale(&n, params.kappa, params.beta).axpy(params.gamma, u);
    if let Some(f) = forcing {
        out = out.add(f);
    }
    Ok(out)
}

const PICARD_TOL: f64 = 1e-14;
const PICARD_MAX_ITER: usize = 200;

/// Solves `y = u + h rhs(u + c (y - u))` by fixed-point iteration; `c = 1`
/// gives backward Euler and `c = 1/2` implicit midpoint.
fn picard<F>(u: &Field, h: f64, c: f64, rhs: F) -> Result<Field>
where
    F: Fn(&Field) -> Result<Field>,
{
    let mut y = u.axpy(h, &rhs(u)?);
    for _ in 0..PICARD_MAX_ITER {
        if !y.is_finite() {
            return Ok(y);
        }
        let arg = u.axpy(c, &y.sub(u));
        let next = u.axpy(h, &rhs(&arg)?);
        let change = next.sub(&y).max_magnitude();
        let size = next.max_magnitude().max(1.0);
        y = next;
        if change <= PICARD_TOL * size {
            return Ok(y);
        }
    }
    if !y.is_finite() {
        return Ok(y);
    }
    Err(Error::NoConvergence(format!(
        "implicit reaction step of size {h} did not converge; reduce dt or use the explicit reaction"
    )))
}

/// One reaction step of size `dt` with the forcing frozen at `f_t`.
///
/// Explicit Euler `U + dt [(kappa + beta I) N(U) + gamma U + F]` when
/// `scheme.explicit_nonmonotone`, backward Euler otherwise.
pub fn substep_reaction(
    u: &Field,
    dt: f64,
    params: &Params,
    f_t: Option<&Field>,
    scheme: &SchemeConfig,
    s: &ProxSolveSettings,
) -> Result<Field> {
    let rhs = |v: &Field| reaction_rhs(v, params, f_t, scheme.equation, s);
    if scheme.explicit_nonmonotone {
        Ok(u.axpy(dt, &rhs(u)?))
    } else {
        picard(u, dt, 1.0, rhs)
    }
}

fn reaction_second_order(
    u: &Field,
    h: f64,
    params: &Params,
    f_t: Option<&Field>,
    scheme: &SchemeConfig,
    s: &ProxSolveSettings,
) -> Result<Field> {
    let rhs = |v: &Field| reaction_rhs(v, params, f_t, scheme.equation, s);
    if scheme.explicit_nonmonotone {
        let k1 = rhs(u)?;
        let k2 = rhs(&u.axpy(h, &k1))?;
        Ok(u.axpy(0.5 * h, &k1.add(&k2)))
    } else {
        picard(u, h, 0.5, rhs)
    }
}

/// Advances `state` by one step. Builds the spectral solver on every call;
/// use [`Stepper`] for repeated stepping.
pub fn step(
    state: &StepState,
    config: &SchemeConfig,
    params: &Params,
    forcing: &TimeSeriesField,
    g: &Grid,
    s: &ProxSolveSettings,
) -> std::result::Result<StepState, StepError> {
    Stepper::new(*config, *params, g.clone(), *s)?.step(state, forcing)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunControl {
    pub record_every: usize,
    pub blowup_threshold: f64,
}

impl Default for RunControl {
    fn default() -> Self {
        Self {
            record_every: 1,
            blowup_threshold: DEFAULT_BLOWUP_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    /// States at the recording cadence; on blow-up, ends with the last finite state.
    pub trajectory: Vec<StepState>,
    /// One record per recorded state, plus the detecting record on blow-up.
    pub records: Vec<EnergyRecord>,
    pub status: MonitorStatus,
}

/// Stepper for a fixed scheme, parameter set and grid.
#[derive(Debug, Clone)]
pub struct Stepper {
    scheme: SchemeConfig,
    params: Params,
    settings: ProxSolveSettings,
    sine: SineSolver,
}

impl Stepper {
    pub fn new(scheme: SchemeConfig, params: Params, grid: Grid, settings: ProxSolveSettings) -> Result<Self> {
        scheme.validate()?;
        params.validate_allow_linear(grid.dim())?;
        settings.validate()?;
        if scheme.equation == Equation::AeEpsMu && !(params.mu > 0.0) {
            return Err(Error::InvalidParams(
                "the Yosida-regularized equation needs mu > 0".into(),
            ));
        }
        Ok(Self {
            scheme,
            params,
            settings,
            sine: SineSolver::new(&grid),
        })
    }

    pub fn scheme(&self) -> &SchemeConfig {
        &self.scheme
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn grid(&self) -> &Grid {
        self.sine.grid()
    }

    fn epsilon(&self) -> f64 {
        match self.scheme.equation {
            Equation::Acgl => 0.0,
            Equation::AeEps | Equation::AeEpsMu => self.params.epsilon,
        }
    }

    fn prox(&self, u: &Field, mu: f64, reflected: bool) -> Result<Field> {
        if self.epsilon() == 0.0 {
            return Ok(u.clone());
        }
        let j = RadialProx::new(self.params.r, mu * self.epsilon(), self.settings)?.resolvent(u)?;
        Ok(if reflected { j.scaled(2.0).sub(u) } else { j })
    }

    fn linear(&self, u: &Field, mu: f64, reflected: bool) -> Result<Field> {
        let (l, a) = (self.params.lambda, self.params.alpha);
        if reflected {
            self.sine.reflected_resolvent(u, mu, l, a)
        } else {
            self.sine.resolvent(u, mu, l, a)
        }
    }

    /// The field after one step of size `h` from `u`, possibly non-finite.
    fn advance(&self, u: &Field, h: f64, f_t: Option<&Field>) -> Result<Field> {
        let (p, sc, s) = (&self.params, &self.scheme, &self.settings);
        match sc.splitting {
            Splitting::Lie => {
                let v = self.linear(u, h, false)?;
                let v = self.prox(&v, h, false)?;
                substep_reaction(&v, h, p, f_t, sc, s)
            }
            Splitting::Strang => {
                // implicit midpoint over h/2 is the reflected resolvent of index h/4
                let q = 0.25 * h;
                let v = self.linear(u, q, true)?;
                let v = self.prox(&v, q, true)?;
                let v = reaction_second_order(&v, h, p, f_t, sc, s)?;
                let v = self.prox(&v, q, true)?;
                self.linear(&v, q, true)
            }
        }
    }

    fn check_inputs(&self, u: &Field, forcing: &TimeSeriesField) -> Result<()> {
        let len = self.grid().len();
        if u.len() != len {
            return Err(Error::GridMismatch {
                expected: len,
                found: u.len(),
            });
        }
        if forcing.field_len() != len {
            return Err(Error::GridMismatch {
                expected: len,
                found: forcing.field_len(),
            });
        }
        Ok(())
    }

    fn next_state(&self, state: &StepState, forcing: &TimeSeriesField) -> Result<StepState> {
        let k = state.step_index;
        let t0 = self.scheme.time_at(k);
        let t1 = self.scheme.time_at(k + 1);
        let u = self.advance(&state.u, t1 - t0, forcing.sample(t0))?;
        Ok(StepState {
            t: t1,
            u,
            step_index: k + 1,
        })
    }

    /// One step; a non-finite result is reported as blow-up with the input state.
    pub fn step(&self, state: &StepState, forcing: &TimeSeriesField) -> std::result::Result<StepState, StepError> {
        self.check_inputs(&state.u, forcing)?;
        if state.step_index >= self.scheme.num_steps() {
            return Err(
                Error::InvalidArgument(format!("state at step {} is already at t_end", state.step_index)).into(),
            );
        }
        let next = self.next_state(state, forcing)?;
        if next.u.is_finite() {
            Ok(next)
        } else {
            Err(StepError::BlowUp { last: state.clone() })
        }
    }

    /// Integrates from `u0` to `t_end` or until blow-up is detected.
    ///
    /// Every step is monitored; records are kept at step 0, every
    /// `record_every` steps, at the final step, and at detection.
    pub fn run(&self, u0: &Field, forcing: &TimeSeriesField, control: &RunControl) -> Result<RunOutput> {
        if control.record_every == 0 {
            return Err(Error::InvalidParams("record_every must be >= 1".into()));
        }
        if !(control.blowup_threshold > 0.0) {
            return Err(Error::InvalidParams("blowup_threshold must be > 0".into()));
        }
        self.check_inputs(u0, forcing)?;
        if !u0.is_finite() {
            return Err(Error::InvalidField("initial data must be finite".into()));
        }
        let g = self.grid();
        let blown = |rec: &EnergyRecord| !rec.is_finite() || rec.combined > control.blowup_threshold;
        let mut state = StepState {
            t: 0.0,
            u: u0.clone(),
            step_index: 0,
        };
        let first = record(&state.u, 0.0, &self.params, g)?;
        let mut records = vec![first];
        let mut trajectory = vec![state.clone()];
        if blown(&first) {
            return Ok(RunOutput {
                trajectory,
                records,
                status: MonitorStatus::BlownUp { t_detect: 0.0 },
            });
        }
        let n = self.scheme.num_steps();
        while state.step_index < n {
            let next = self.next_state(&state, forcing)?;
            let rec = record(&next.u, next.t, &self.params, g)?;
            let due = next.step_index % control.record_every == 0 || next.step_index == n;
            if !next.u.is_finite() {
                records.push(rec);
                if trajectory.last().map(|s| s.step_index) != Some(state.step_index) {
                    trajectory.push(state);
                }
                return Ok(RunOutput {
                    trajectory,
                    records,
                    status: MonitorStatus::BlownUp { t_detect: next.t },
                });
            }
            if due || blown(&rec) {
                records.push(rec);
                trajectory.push(next.clone());
            }
            if blown(&rec) {
                return Ok(RunOutput {
                    trajectory,
                    records,
                    status: MonitorStatus::BlownUp { t_detect: next.t },
                });
            }
            state = next;
        }
        Ok(RunOutput {
            trajectory,
            records,
            status: MonitorStatus::Ok,
        })
    }
}

/// `sup_k |a_k - b_k|_{L^2}` over two trajectories recorded at the same steps.
pub fn sup_l2_difference(a: &[StepState], b: &[StepState], g: &Grid) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::InvalidArgument(format!(
            "trajectories have different lengths ({} and {})",
            a.len(),
            b.len()
        )));
    }
    let mut sup = 0.0f64;
    for (x, y) in a.iter().zip(b) {
        if x.step_index != y.step_index {
            return Err(Error::InvalidArgument(
                "trajectories are recorded at different steps".into(),
            ));
        }
        sup = sup.max(crate::grid::l2_norm(&x.u.sub(&y.u), g)?);
    }
    Ok(sup)
}
