//! Randomized oracles for the standalone inequalities and for the structural
//! properties of the convex building blocks.
//!
//! Every check is deterministic given its seed: sample `i` always comes from
//! the same random stream, work is spread over rayon, and per-law results are
//! folded back in sample order.

pub mod report;
pub mod sampling;

use rayon::prelude::*;

use crate::convex::{
    grad_phi, grad_psi, moreau_env_psi, phi, psi_r, Params, ProxSolveSettings, RadialProx, SineSolver,
};
use crate::error::{Error, Result};
use crate::grid::{apply_I, l2_inner, l2_norm, lr_norm_pointwise, Field, Grid};

pub use report::{reports_to_csv, reports_to_markdown, InequalityReport, Observation, SlackTracker};
pub use sampling::{sample_field, SampleKind};

pub const EXACT_TOL: f64 = 1e-12;
const SOLVER_TOL: f64 = 1e-10;

const MUS: [f64; 3] = [0.01, 1.0, 100.0];
const PROX_MUS: [f64; 4] = [1e-3, 1e-1, 1.0, 10.0];
const PROX_RS: [f64; 3] = [3.0, 4.0, 6.0];
const ACC_QS: [f64; 2] = [3.0, 4.0];
const ACC_RS: [f64; 4] = [2.0, 3.0, 4.0, 6.0];
pub const POINTWISE_RS: [f64; 5] = [2.5, 3.0, 3.5, 4.0, 5.0];
const POINTWISE_BOX: f64 = 5.0;
const POINTWISE_CHUNK: usize = 10_000;

// Stream offsets keep the different families of random draws disjoint.
const PARTNER_STREAM: usize = 1 << 32;
const POINTWISE_STREAM: u64 = 1 << 40;

/// Constant of the pointwise difference bound, by cases in `r`.
pub fn d_r(r: f64) -> Result<f64> {
    if !(r > 2.0) || r.is_nan() {
        return Err(Error::InvalidArgument(format!("d_r needs r > 2, got {r}")));
    }
    Ok(if r >= 4.0 {
        (r - 1.0) / 2.0
    } else if r > 3.0 {
        1.5
    } else {
        1.0
    })
}

fn radial(p: [f64; 2], r: f64) -> (f64, [f64; 2]) {
    let m = p[0].hypot(p[1]);
    let w = if m == 0.0 {
        0.0
    } else {
        crate::convex::real_pow(m, r - 2.0)
    };
    (w, [w * p[0], w * p[1]])
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn pointwise_sides(u: [f64; 2], v: [f64; 2], x: [f64; 2], y: [f64; 2], r: f64, dr: f64) -> ([f64; 2], [f64; 2], f64) {
    let (wu, gu) = radial(u, r);
    let (wv, gv) = radial(v, r);
    let rhs = dr * (wu + wv) * dist(u, v) * dist(x, y);
    ([gu[0] - gv[0], gu[1] - gv[1]], [x[0] - y[0], x[1] - y[1]], rhs)
}

/// Both sides of the pointwise bound for components `i, j` in `{1, 2}`.
pub fn pointwise_diff_bound_check(
    u: [f64; 2],
    v: [f64; 2],
    x: [f64; 2],
    y: [f64; 2],
    r: f64,
    i: usize,
    j: usize,
) -> Result<(f64, f64)> {
    pointwise_diff_bound_with(u, v, x, y, r, i, j, d_r(r)?)
}

/// Same as [`pointwise_diff_bound_check`] with an explicit constant in place of `d_r(r)`.
#[allow(clippy::too_many_arguments)]
pub fn pointwise_diff_bound_with(
    u: [f64; 2],
    v: [f64; 2],
    x: [f64; 2],
    y: [f64; 2],
    r: f64,
    i: usize,
    j: usize,
    dr: f64,
) -> Result<(f64, f64)> {
    if !(r > 2.0) {
        return Err(Error::InvalidArgument(format!("pointwise bound needs r > 2, got {r}")));
    }
    if !(1..=2).contains(&i) || !(1..=2).contains(&j) {
        return Err(Error::InvalidArgument(format!(
            "component indices must be 1 or 2, got ({i}, {j})"
        )));
    }
    let (dg, dx, rhs) = pointwise_sides(u, v, x, y, r, dr);
    Ok(((dg[i - 1] * dx[j - 1]).abs(), rhs))
}

/// Random quadruples in `[-5, 5]^8`, all four component pairs per quadruple.
pub fn pointwise_diff_bound_suite(r: f64, quadruples: usize, seed: u64, dr: Option<f64>) -> Result<InequalityReport> {
    let dr = match dr {
        Some(v) => v,
        None => d_r(r)?,
    };
    let r_slot = POINTWISE_RS.iter().position(|&v| v == r).unwrap_or(POINTWISE_RS.len()) as u64;
    let chunks = quadruples.div_ceil(POINTWISE_CHUNK);
    let name = format!("pointwise_diff_bound_r{r}");
    let partial: Vec<SlackTracker> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = sampling::rng_for(seed, POINTWISE_STREAM + (r_slot << 32) + c as u64);
            let mut t = SlackTracker::new(name.clone(), EXACT_TOL);
            let count = POINTWISE_CHUNK.min(quadruples - c * POINTWISE_CHUNK);
            for _ in 0..count {
                let u = sampling::sample_point(&mut rng, POINTWISE_BOX);
                let v = sampling::sample_point(&mut rng, POINTWISE_BOX);
                let x = sampling::sample_point(&mut rng, POINTWISE_BOX);
                let y = sampling::sample_point(&mut rng, POINTWISE_BOX);
                let (dg, dx, rhs) = pointwise_sides(u, v, x, y, r, dr);
                let lhs = dg
                    .iter()
                    .flat_map(|a| dx.iter().map(move |b| (a * b).abs()))
                    .fold(0.0, f64::max);
                t.push_with(lhs, rhs, rhs, || format!("r={r} U={u:?} V={v:?} X={x:?} Y={y:?}"));
            }
            t
        })
        .collect();
    let mut total = SlackTracker::new(name, EXACT_TOL);
    for t in partial {
        total.merge(t);
    }
    Ok(total.finish())
}

fn accretivity_sides(
    u1: &Field,
    u2: &Field,
    q: f64,
    mu: f64,
    r: f64,
    g: &Grid,
    s: &ProxSolveSettings,
) -> Result<(f64, f64)> {
    if !(r >= 2.0) {
        return Err(Error::InvalidArgument(format!("accretivity needs r >= 2, got {r}")));
    }
    let prox = RadialProx::new(q, mu, *s)?;
    let v1 = prox.resolvent(u1)?;
    let v2 = prox.resolvent(u2)?;
    Ok((
        lr_norm_pointwise(&v1.sub(&v2), r, g)?,
        lr_norm_pointwise(&u1.sub(u2), r, g)?,
    ))
}

/// `|J U1 - J U2|_r <= |U1 - U2|_r` for the resolvent of `d psi_q`.
pub fn accretivity_check(
    u1: &Field,
    u2: &Field,
    q: f64,
    mu: f64,
    r: f64,
    g: &Grid,
    s: &ProxSolveSettings,
) -> Result<InequalityReport> {
    let (lhs, rhs) = accretivity_sides(u1, u2, q, mu, r, g, s)?;
    let mut t = SlackTracker::new("accretivity", EXACT_TOL);
    t.push(Observation::new(lhs, rhs, rhs, format!("q={q} mu={mu} r={r}")));
    Ok(t.finish())
}

fn interpolation_observations(u: &Field, q: f64, r: f64, g: &Grid) -> Result<[Observation; 2]> {
    if !(2.0 < q && q < r) {
        return Err(Error::InvalidArgument(format!(
            "interpolation needs 2 < q < r, got q={q}, r={r}"
        )));
    }
    let theta = (q - 2.0) / (r - 2.0);
    let l2 = l2_norm(u, g)?;
    let lq = lr_norm_pointwise(u, q, g)?;
    let lr = lr_norm_pointwise(u, r, g)?;
    let lhs1 = lq.powf(q);
    let rhs1 = lr.powf(r * theta) * l2.powf(2.0 * (1.0 - theta));
    let lhs2 = lr_norm_pointwise(u, 2.0 * (q - 1.0), g)?.powf(2.0 * (q - 1.0));
    let rhs2 = lr_norm_pointwise(u, 2.0 * (r - 1.0), g)?.powf(2.0 * (r - 1.0) * theta) * l2.powf(2.0 * (1.0 - theta));
    let tag = format!("q={q} r={r} theta={theta}");
    Ok([
        Observation::new(lhs1, rhs1, rhs1, tag.clone()),
        Observation::new(lhs2, rhs2, rhs2, tag),
    ])
}

/// Both lines of the `L^q` / `L^{2(q-1)}` interpolation inequalities.
pub fn interpolation_check(u: &Field, q: f64, r: f64, g: &Grid) -> Result<InequalityReport> {
    let mut t = SlackTracker::new("interpolation", EXACT_TOL);
    t.extend(interpolation_observations(u, q, r, g)?);
    Ok(t.finish())
}

fn check_samples(samples: usize) -> Result<()> {
    if samples < 100 {
        return Err(Error::InvalidArgument(format!(
            "constant estimation needs at least 100 samples, got {samples}"
        )));
    }
    Ok(())
}

fn max_ratio<F>(g: &Grid, samples: usize, seed: u64, ratio: F) -> Result<f64>
where
    F: Fn(&Field) -> Result<f64> + Sync,
{
    let values: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|i| ratio(&sample_field(g, seed, i)))
        .collect::<Result<_>>()?;
    Ok(values.into_iter().filter(|v| v.is_finite()).fold(0.0, f64::max))
}

/// Discrete surrogate for the Gagliardo-Nirenberg constant `C_b`:
/// the sample maximum of `(|U|_q^q / (|grad U|^(q - xi) |U|^xi))^(2/q)`.
pub fn estimate_cb(g: &Grid, q: f64, samples: usize, seed: u64) -> Result<f64> {
    check_samples(samples)?;
    if !(q > 2.0) {
        return Err(Error::InvalidArgument(format!("estimate_cb needs q > 2, got {q}")));
    }
    let xi = crate::diagnostics::xi_exponent(g.dim(), q);
    max_ratio(g, samples, seed, |u| {
        let lq = lr_norm_pointwise(u, q, g)?;
        let grad = (2.0 * phi(u, g)?).sqrt();
        let l2 = l2_norm(u, g)?;
        let den = grad.powf(q - xi) * l2.powf(xi);
        Ok(if den > 0.0 {
            (lq.powf(q) / den).powf(2.0 / q)
        } else {
            0.0
        })
    })
}

/// Estimate of the constant `C_0` in the local energy inequality.
///
/// First the sample maximum `k` of
/// `|U|_{2(q-1)}^{2(q-1)} / (|Delta U|^(2-theta) |grad U|^(2q-4+theta) + |U|^(2(q-1)))`,
/// then `c = k (kappa^2 + beta^2) / lambda` is pushed through the Young step
/// that absorbs the `|Delta U|` factor into `lambda/2 |Delta U|^2`.
pub fn estimate_c0(g: &Grid, params: &Params, samples: usize, seed: u64) -> Result<f64> {
    check_samples(samples)?;
    let q = params.q;
    if !(q > 2.0) || !(params.lambda > 0.0) {
        return Err(Error::InvalidArgument("estimate_c0 needs q > 2 and lambda > 0".into()));
    }
    let ex = crate::diagnostics::exponents(g.dim(), q);
    let theta = ex.theta;
    let p2 = 2.0 * (q - 1.0);
    let k = max_ratio(g, samples, seed, |u| {
        let num = lr_norm_pointwise(u, p2, g)?.powf(p2);
        let lap = l2_norm(&grad_phi(u, g)?, g)?;
        let grad = (2.0 * phi(u, g)?).sqrt();
        let l2 = l2_norm(u, g)?;
        let den = lap.powf(2.0 - theta) * grad.powf(2.0 * q - 4.0 + theta) + l2.powf(p2);
        Ok(if den > 0.0 { num / den } else { 0.0 })
    })?;
    let c = k * (params.kappa * params.kappa + params.beta * params.beta) / params.lambda;
    if theta >= 2.0 {
        return Ok(c * 2f64.powf(q - 1.0));
    }
    let p = 2.0 / (2.0 - theta);
    let pp = 2.0 / theta;
    let eta = (params.lambda * p / (4.0 * c)).powf(1.0 / p);
    let young = c * 2f64.powf(ex.rho) / (pp * eta.powf(pp));
    Ok(c.max(young))
}

/// Magnitude `w` of the Yosida approximation recovered from the conjugate side:
/// `mu w + w^(1/(r-1)) = m`, solved by bisection to the last bit.
fn conjugate_magnitude(m: f64, r: f64, mu: f64) -> f64 {
    if m == 0.0 {
        return 0.0;
    }
    let e = 1.0 / (r - 1.0);
    let f = |w: f64| mu * w + w.powf(e) - m;
    let mut lo = 0.0f64;
    let mut hi = (m / mu).min(m.powf(r - 1.0));
    for _ in 0..4096 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    if f(hi).abs() < f(lo).abs() {
        hi
    } else {
        lo
    }
}

fn conjugate_yosida(u: &Field, r: f64, mu: f64) -> Field {
    u.map_points(|p| {
        let m = p[0].hypot(p[1]);
        if m == 0.0 {
            return [0.0, 0.0];
        }
        let c = conjugate_magnitude(m, r, mu) / m;
        [c * p[0], c * p[1]]
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SuiteOptions {
    /// Replaces `d_r` in the pointwise check (harness sanity testing).
    pub dr_override: Option<f64>,
}

#[derive(Clone, Copy)]
enum Law {
    AnglePhi,
    AnglePsiR,
    AngleYosidaPhi,
    AngleYosidaPsi,
    AnglePsiQPsiR,
    AnglePsiQYosida,
    Positivity,
    SandwichLower,
    SandwichUpper,
    NormBound,
    ResolventIdentity,
    ConjugateYosida,
    EnvelopeIdentity,
    Pairing,
    Nonexpansive,
    InterpolationLq,
    InterpolationL2q,
}

const LAWS: [(Law, &str, f64); 17] = [
    (Law::AnglePhi, "angle_dphi_IU", EXACT_TOL),
    (Law::AnglePsiR, "angle_dpsi_r_IU", EXACT_TOL),
    (Law::AngleYosidaPhi, "angle_yosida_phi_IU", EXACT_TOL),
    (Law::AngleYosidaPsi, "angle_yosida_psi_r_IU", EXACT_TOL),
    (Law::AnglePsiQPsiR, "angle_dpsi_q_I_dpsi_r", EXACT_TOL),
    (Law::AnglePsiQYosida, "angle_dpsi_q_I_yosida_psi_r", EXACT_TOL),
    (Law::Positivity, "positivity_dphi_dpsi_r", EXACT_TOL),
    (Law::SandwichLower, "yosida_sandwich_lower", EXACT_TOL),
    (Law::SandwichUpper, "yosida_sandwich_upper", EXACT_TOL),
    (Law::NormBound, "yosida_norm_bound", EXACT_TOL),
    (Law::ResolventIdentity, "yosida_resolvent_identity", SOLVER_TOL),
    (Law::ConjugateYosida, "moreau_conjugate_decomposition", SOLVER_TOL),
    (Law::EnvelopeIdentity, "moreau_envelope_identity", SOLVER_TOL),
    (Law::Pairing, "yosida_pairing_bound", SOLVER_TOL),
    (Law::Nonexpansive, "resolvent_l2_nonexpansive", EXACT_TOL),
    (Law::InterpolationLq, "interpolation_lq", EXACT_TOL),
    (Law::InterpolationL2q, "interpolation_l2q_minus_2", EXACT_TOL),
];

struct SampleContext<'a> {
    g: &'a Grid,
    q: f64,
    r: f64,
    settings: ProxSolveSettings,
    sine: SineSolver,
}

fn angle(a: &Field, b: &Field, g: &Grid) -> Result<Observation> {
    let ib = apply_I(b);
    let scale = l2_norm(a, g)? * l2_norm(b, g)?;
    Ok(Observation::vanishing(l2_inner(a, &ib, g)?, scale, String::new()))
}

fn prox_pair(i: usize) -> (f64, f64) {
    (PROX_MUS[(i / 4) % PROX_MUS.len()], PROX_RS[(i / 16) % PROX_RS.len()])
}

fn sample_observations(ctx: &SampleContext<'_>, seed: u64, i: usize) -> Result<Vec<(usize, Observation)>> {
    let g = ctx.g;
    let (q, r) = (ctx.q, ctx.r);
    let u = sample_field(g, seed, i);
    let partner = sample_field(g, seed, PARTNER_STREAM + i);
    let mut out = Vec::new();
    let mut push = |law: Law, obs: Observation| out.push((law as usize, obs));

    let dphi = grad_phi(&u, g)?;
    let dpsi_r = grad_psi(&u, r)?;
    let dpsi_q = grad_psi(&u, q)?;
    push(Law::AnglePhi, angle(&dphi, &u, g)?);
    push(Law::AnglePsiR, angle(&dpsi_r, &u, g)?);
    push(Law::AnglePsiQPsiR, angle(&dpsi_q, &dpsi_r, g)?);
    let pos_scale = l2_norm(&dphi, g)? * l2_norm(&dpsi_r, g)?;
    push(
        Law::Positivity,
        Observation::new(0.0, l2_inner(&dphi, &dpsi_r, g)?, pos_scale, String::new()),
    );

    // each sample gets one (mu, r) pair; the cycle is offset from the field kind cycle
    let (mu, r) = prox_pair(i);
    let dpsi_r = grad_psi(&u, r)?;
    let psi_u = psi_r(&u, r, g)?;
    let dpsi_norm = l2_norm(&dpsi_r, g)?;
    {
        let yphi = u.sub(&ctx.sine.resolvent(&u, mu, 1.0, 0.0)?).scaled(1.0 / mu);
        push(Law::AngleYosidaPhi, angle(&yphi, &u, g)?);

        let prox = RadialProx::new(r, mu, ctx.settings)?;
        let (ju, yos) = prox.apply(&u)?;
        push(Law::AngleYosidaPsi, angle(&yos, &u, g)?);
        push(Law::AnglePsiQYosida, angle(&dpsi_q, &yos, g)?);

        let env = moreau_env_psi(&u, r, mu, g, &ctx.settings)?;
        let psi_ju = psi_r(&ju, r, g)?;
        push(Law::SandwichLower, Observation::new(psi_ju, env, env, String::new()));
        push(Law::SandwichUpper, Observation::new(env, psi_u, psi_u, String::new()));

        let yos_norm = l2_norm(&yos, g)?;
        push(
            Law::NormBound,
            Observation::new(yos_norm, dpsi_norm, dpsi_norm, String::new()),
        );

        let identity = l2_norm(&yos.sub(&grad_psi(&ju, r)?), g)?;
        push(
            Law::ResolventIdentity,
            Observation::vanishing(identity, yos_norm, String::new()),
        );

        let w = conjugate_yosida(&u, r, mu);
        let conj = l2_norm(&yos.sub(&w), g)?;
        push(
            Law::ConjugateYosida,
            Observation::vanishing(conj, yos_norm, String::new()),
        );
        let w_norm = l2_norm(&w, g)?;
        let env_conj = 0.5 * mu * w_norm * w_norm + psi_r(&u.axpy(-mu, &w), r, g)?;
        push(
            Law::EnvelopeIdentity,
            Observation::vanishing(env - env_conj, env.max(env_conj), String::new()),
        );

        let pairing_rhs = r * psi_u;
        push(
            Law::Pairing,
            Observation::new(l2_inner(&yos, &u, g)?, pairing_rhs, pairing_rhs.max(1.0), String::new()),
        );

        let jp = prox.resolvent(&partner)?;
        let rhs = l2_norm(&u.sub(&partner), g)?;
        push(
            Law::Nonexpansive,
            Observation::new(l2_norm(&ju.sub(&jp), g)?, rhs, rhs, String::new()),
        );
    }

    let [lq, l2q] = interpolation_observations(&u, q, ctx.r, g)?;
    push(Law::InterpolationLq, lq);
    push(Law::InterpolationL2q, l2q);

    let kind = SampleKind::for_index(i);
    for (_, obs) in out.iter_mut() {
        obs.inputs = format!("sample={i} kind={kind:?} mu={mu} r={r} seed={seed}");
    }
    Ok(out)
}

/// Angle conditions, positivity, Yosida and Moreau properties, L2 nonexpansiveness
/// and interpolation, each over `samples` random fields.
pub fn structural_suite(g: &Grid, params: &Params, samples: usize, seed: u64) -> Result<Vec<InequalityReport>> {
    let ctx = SampleContext {
        g,
        q: params.q,
        r: params.r,
        settings: ProxSolveSettings::default(),
        sine: SineSolver::new(g),
    };
    let per_sample: Vec<Vec<(usize, Observation)>> = (0..samples)
        .into_par_iter()
        .map(|i| sample_observations(&ctx, seed, i))
        .collect::<Result<_>>()?;
    let mut trackers: Vec<SlackTracker> = LAWS
        .iter()
        .map(|(_, name, tol)| SlackTracker::new(*name, *tol))
        .collect();
    for obs in per_sample.into_iter().flatten() {
        trackers[obs.0].push(obs.1);
    }
    Ok(trackers.into_iter().map(SlackTracker::finish).collect())
}

/// Resolvent accretivity in `L^r` over the `q x r x mu` grid. Odd samples pair a
/// field with a small perturbation of itself.
pub fn accretivity_suite(g: &Grid, samples: usize, seed: u64) -> Result<InequalityReport> {
    let settings = ProxSolveSettings::default();
    let per_sample: Vec<Vec<Observation>> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let u1 = sample_field(g, seed, i);
            let other = sample_field(g, seed, PARTNER_STREAM + i);
            let u2 = if i % 2 == 0 { other } else { u1.axpy(0.01, &other) };
            let mut out = Vec::with_capacity(ACC_QS.len() * ACC_RS.len() * MUS.len());
            for &q in &ACC_QS {
                for &r in &ACC_RS {
                    for &mu in &MUS {
                        let (lhs, rhs) = accretivity_sides(&u1, &u2, q, mu, r, g, &settings)?;
                        out.push(Observation::new(
                            lhs,
                            rhs,
                            rhs,
                            format!("sample={i} q={q} r={r} mu={mu} seed={seed}"),
                        ));
                    }
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut t = SlackTracker::new("accretivity", EXACT_TOL);
    t.extend(per_sample.into_iter().flatten());
    Ok(t.finish())
}

pub fn full_suite(g: &Grid, params: &Params, samples: usize, seed: u64) -> Result<Vec<InequalityReport>> {
    full_suite_with(g, params, samples, seed, &SuiteOptions::default())
}

/// All checks; the pointwise bound uses `samples * 1000` quadruples per exponent.
pub fn full_suite_with(
    g: &Grid,
    params: &Params,
    samples: usize,
    seed: u64,
    opts: &SuiteOptions,
) -> Result<Vec<InequalityReport>> {
    if !(2.0 < params.q && params.q < params.r) {
        return Err(Error::InvalidParams(format!(
            "law checks need 2 < q < r, got q={}, r={}",
            params.q, params.r
        )));
    }
    let mut reports = structural_suite(g, params, samples, seed)?;
    reports.push(accretivity_suite(g, samples, seed)?);
    for &r in &POINTWISE_RS {
        reports.push(pointwise_diff_bound_suite(r, samples * 1000, seed, opts.dr_override)?);
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> Params {
        Params {
            lambda: 1.0,
            alpha: 0.5,
            beta: 1.0,
            gamma: -1.0,
            kappa: 1.0,
            q: 3.0,
            r: 4.0,
            epsilon: 0.1,
            mu: 0.0,
        }
    }

    #[test]
    fn d_r_table() {
        assert_eq!(d_r(5.0).unwrap(), 2.0);
        assert_eq!(d_r(3.5).unwrap(), 1.5);
        assert_eq!(d_r(2.5).unwrap(), 1.0);
        assert_eq!(d_r(3.0).unwrap(), 1.0);
        assert_eq!(d_r(4.0).unwrap(), 1.5);
        assert!(d_r(2.0).is_err());
        assert!(d_r(f64::NAN).is_err());
        let mut prev = 0.0;
        for k in 1..400 {
            let v = d_r(2.0 + k as f64 * 0.01).unwrap();
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn pointwise_trivial_cases() {
        let u = [1.0, -2.0];
        let (l, r) = pointwise_diff_bound_check(u, u, [0.3, 1.0], [2.0, -1.0], 3.0, 1, 2).unwrap();
        assert_eq!(l, 0.0);
        assert!(r >= 0.0);
        let (l, r) = pointwise_diff_bound_check(u, [0.5, 0.5], [1.0, 1.0], [1.0, 1.0], 3.0, 2, 1).unwrap();
        assert_eq!((l, r), (0.0, 0.0));
        assert!(pointwise_diff_bound_check(u, u, u, u, 3.0, 0, 1).is_err());
        assert!(pointwise_diff_bound_check(u, u, u, u, 2.0, 1, 1).is_err());
    }

    #[test]
    fn pointwise_suite_passes_and_catches_fault() {
        for &r in &POINTWISE_RS {
            let rep = pointwise_diff_bound_suite(r, 20_000, 3, None).unwrap();
            assert!(rep.passed(), "{rep:?}");
            assert_eq!(rep.samples, 20_000);
        }
        let bad = pointwise_diff_bound_suite(4.0, 20_000, 3, Some(0.5)).unwrap();
        assert!(bad.violations > 0);
        assert!(bad.worst_case_inputs.contains("U="));
    }

    #[test]
    fn accretivity_examples() {
        let g = Grid::line(1.0, 16).unwrap();
        let s = ProxSolveSettings::default();
        let u = sample_field(&g, 1, 5);
        let rep = accretivity_check(&u, &u, 3.0, 1.0, 4.0, &g, &s).unwrap();
        assert_eq!(rep.worst_slack, 0.0);
        let v = sample_field(&g, 1, 6);
        let (lhs, rhs) = accretivity_sides(&u, &v, 3.0, 1e-9, 3.0, &g, &s).unwrap();
        assert!(lhs <= rhs && (rhs - lhs) / rhs < 1e-6);
        let rep = accretivity_suite(&g, 40, 2).unwrap();
        assert!(rep.passed(), "{rep:?}");
        assert_eq!(rep.samples, 40 * 24);
    }

    #[test]
    fn interpolation_examples() {
        let g = Grid::line(1.0, 16).unwrap();
        let rep = interpolation_check(&g.zeros(), 3.0, 4.0, &g).unwrap();
        assert_eq!(rep.worst_slack, 0.0);
        assert!(rep.passed());
        assert!(interpolation_check(&g.zeros(), 4.0, 4.0, &g).is_err());
        let u = sample_field(&g, 0, 1);
        let near = interpolation_check(&u, 4.0 - 1e-9, 4.0, &g).unwrap();
        assert!(near.passed());
        assert!(near.worst_slack.abs() <= 1e-6 * near.worst_scale);
    }

    #[test]
    fn conjugate_magnitude_matches_prox() {
        let s = ProxSolveSettings::default();
        for &(m, r, mu) in &[(1.0, 4.0, 1.0), (7.0, 3.0, 0.01), (1e-3, 5.0, 100.0)] {
            let prox = RadialProx::new(r, mu, s).unwrap();
            let root = prox.solve(m).unwrap();
            let w = conjugate_magnitude(m, r, mu);
            assert!((w - root.d / mu).abs() <= 1e-12 * w.max(1e-300), "{m} {r} {mu}");
        }
    }

    #[test]
    fn constant_estimates_are_deterministic_and_monotone() {
        let g = Grid::line(1.0, 32).unwrap();
        let a = estimate_cb(&g, 3.0, 200, 4).unwrap();
        assert_eq!(a, estimate_cb(&g, 3.0, 200, 4).unwrap());
        assert!(estimate_cb(&g, 3.0, 400, 4).unwrap() >= a);
        assert!(a > 0.0 && a.is_finite());
        assert!(estimate_cb(&g, 3.0, 50, 4).is_err());
        let c = estimate_c0(&g, &params(), 200, 4).unwrap();
        assert!(c > 0.0 && c.is_finite());
        assert!(estimate_c0(&g, &params(), 400, 4).unwrap() >= c);
    }

    #[test]
    fn suite_passes_on_small_grids() {
        let p = params();
        for g in [Grid::line(1.0, 24).unwrap(), Grid::rect([1.0, 1.5], [8, 6]).unwrap()] {
            let reports = full_suite(&g, &p, 24, 11).unwrap();
            assert_eq!(reports.len(), LAWS.len() + 1 + POINTWISE_RS.len());
            for rep in &reports {
                assert!(rep.passed(), "{rep:?}");
                assert!(rep.worst_slack >= -rep.tolerance * rep.worst_scale);
            }
        }
    }

    #[test]
    fn verdicts_stable_under_seed_change() {
        let g = Grid::line(1.0, 16).unwrap();
        let a = full_suite(&g, &params(), 12, 1).unwrap();
        let b = full_suite(&g, &params(), 12, 2).unwrap();
        let va: Vec<bool> = a.iter().map(|r| r.passed()).collect();
        let vb: Vec<bool> = b.iter().map(|r| r.passed()).collect();
        assert_eq!(va, vb);
        assert_eq!(a, full_suite(&g, &params(), 12, 1).unwrap());
    }
}
