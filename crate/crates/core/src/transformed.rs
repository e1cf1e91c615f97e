//! The constant-lag companion system, solved by the method of steps.
//!
//! Under the time map `t = α(s)` the rebased unknowns
//! `z(s) = y(α(s))` and `χ(s) = η(α(s))` satisfy, for `s > s0` and the
//! constant lag `h = 2η̄`,
//!
//! ```text
//! D(s)  = 1 + μ·(χ(s) − η̄) − G(z(s))          (the deviating rate σ'(α(s)))
//! χ'(s) = {−μ·(χ(s) − η̄) + G(z(s))}·α'(s−h)/D(s)
//! z'(s) = f(χ(s) + α(s−h), z(s), z(s−h))·α'(s−h)/D(s)
//! α(s)  = χ(s) + α(s−h),   α'(s) = χ'(s) + α'(s−h)
//! ```
//!
//! with `z = g∘ω` on `[s0 − h, s0]`, `χ(s0) = η0`, and `α = ω` on the
//! seed window. Everything on the right a lag behind is already known,
//! so the system is an explicit delay equation with *constant* lag: each
//! window `[s0 + (k−1)h, s0 + kh]` is an ODE solve. The integrator is
//! the same fixed-step fourth-order Runge-Kutta scheme as the original
//! solver; since the step never exceeds the lag, delayed lookups always
//! land in committed history and no in-step iteration is needed.
//!
//! Under the monotonicity certificate `2μη̄ < 1` the divisor `D` stays
//! inside `(1 − 2μη̄, 1 + 2μη̄) ⊂ (0, 2)`; the integrator aborts if it
//! ever reaches `1e-9`, which would signal a violated certificate
//! upstream rather than a recoverable state.
//!
//! The map is C¹ across the window joints exactly when the seed is
//! compatible (see the construction module); the march keeps one-sided
//! derivatives at the joints so [`TransformedSolution::join_jumps`] can
//! report the actual kinks either way.

use crate::grid;
use crate::monotone::{MonotoneError, MonotoneFn};
use crate::real::Real;
use crate::sdd::{InitialData, Params};
use crate::trajectory::{Trajectory, TrajectoryBuilder, TrajectoryError};
use crate::transform::{self, TimeMap, TimeMapSeed, TransformError};

/// Abort threshold for the divisor `D`; see the module notes.
const DENOMINATOR_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TransformedError {
    #[error("monotone invertibility requires 2*mu*rest_delay < 1, got {product}")]
    CertificateRequired { product: f64 },
    #[error("deviating-rate divisor fell to {value}; the certificate is violated upstream")]
    DenominatorVanished { value: f64 },
    #[error("step must be positive, got {ds}")]
    NonPositiveStep { ds: f64 },
    #[error("step {ds} exceeds the resolution limit rest_delay/4 = {limit}")]
    StepTooLarge { ds: f64, limit: f64 },
    #[error("step {ds} must divide the lag {lag} exactly")]
    StepMismatch { ds: f64, lag: f64 },
    #[error("horizon must be positive, got {horizon}")]
    BadHorizon { horizon: f64 },
    #[error("invalid restart point {s_mid}: {reason}")]
    InvalidRestart { s_mid: f64, reason: &'static str },
    #[error("time {t} outside [{lo}, {hi}]")]
    OutOfDomain { t: f64, lo: f64, hi: f64 },
    #[error("state became non-finite at s = {s}")]
    NonFiniteState { s: f64 },
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
    #[error(transparent)]
    Monotone(#[from] MonotoneError),
}

/// Transformed-clock rate of the delay component:
/// `{−μ(delay − η̄) + G(state)}·lag_rate / (1 + μ(delay − η̄) − G(state))`.
///
/// Errors when the divisor is at or below `1e-9`; under the
/// monotonicity certificate it stays in `(1 − 2μη̄, 1 + 2μη̄)`.
pub fn transformed_delay_rate<T: Real>(
    params: &Params<T>,
    delay: T,
    state: &[T],
    lag_rate: T,
) -> Result<T, TransformedError> {
    let rate = params.delay_rate(delay, state);
    let divisor = T::one() - rate;
    if divisor <= T::of(DENOMINATOR_FLOOR) {
        return Err(TransformedError::DenominatorVanished { value: divisor.as_f64() });
    }
    Ok(rate * lag_rate / divisor)
}

/// One-sided rate gaps at a window joint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JoinJump<T> {
    pub s: T,
    /// `|α'(s⁺) − α'(s⁻)|`.
    pub alpha_rate_gap: T,
    /// Max-norm gap of the state rate.
    pub state_rate_gap: T,
    /// Gap of the delay-component rate; absent at `s0` where the delay
    /// component has no left side.
    pub delay_rate_gap: Option<T>,
}

/// Dense solution of the transformed system, with the reconstructed
/// time map.
#[derive(Debug, Clone)]
pub struct TransformedSolution<T: Real> {
    state: Trajectory<T>,
    delay: Trajectory<T>,
    alpha: TimeMap<T>,
    params: Params<T>,
    deviating_rate_range: (T, T),
    band_excursion: T,
}

impl<T: Real> TransformedSolution<T> {
    /// The rebased state `z` on `[s0 − 2η̄, s_end]`, initial window
    /// included.
    pub fn state(&self) -> &Trajectory<T> {
        &self.state
    }

    /// The rebased delay `χ` on `[s0, s_end]`.
    pub fn delay(&self) -> &Trajectory<T> {
        &self.delay
    }

    /// The time map reconstructed alongside the march
    /// (`α(s) = χ(s) + α(s − 2η̄)`).
    pub fn alpha(&self) -> &TimeMap<T> {
        &self.alpha
    }

    pub fn params(&self) -> &Params<T> {
        &self.params
    }

    pub fn s0(&self) -> T {
        self.alpha.s0()
    }

    pub fn s_end(&self) -> T {
        self.delay.t_max()
    }

    pub fn lag(&self) -> T {
        self.alpha.lag()
    }

    /// Extremes of the divisor `D = 1 + μ(χ − η̄) − G(z)` over the mesh
    /// nodes; the certificate predicts `(1 − 2μη̄, 1 + 2μη̄)`.
    pub fn deviating_rate_range(&self) -> (T, T) {
        self.deviating_rate_range
    }

    /// Largest distance the rebased delay strayed outside `[0, 2η̄]` at
    /// the mesh nodes.
    pub fn delay_band_excursion(&self) -> T {
        self.band_excursion
    }

    /// Original-time unknowns at `t`: `(y, η) = (z(α⁻¹(t)), χ(α⁻¹(t)))`.
    /// `t` must lie in `[α(s0), α(s_end)]`.
    pub fn recover_original(&self, t: T) -> Result<(Vec<T>, T), TransformedError> {
        let lo = self.alpha.t0();
        let hi = self.alpha.to_original(self.s_end())?;
        if t < lo || t > hi {
            return Err(TransformedError::OutOfDomain { t: t.as_f64(), lo: lo.as_f64(), hi: hi.as_f64() });
        }
        let s = self.alpha.to_transformed(t)?;
        let s = s.max(self.s0()).min(self.s_end());
        Ok((self.state.eval(s)?, self.delay.eval_scalar(s)?))
    }

    /// Original-time trajectories over `[α(s0), α(s_end)]`, rebased node
    /// by node (`t_i = α(s_i)`, chain rule for the rates). The division
    /// `z'/α'` cancels the joint kinks, so the single-sided node storage
    /// loses nothing.
    pub fn recover_original_trajectories(&self) -> Result<(Trajectory<T>, Trajectory<T>), TransformedError> {
        let nodes = self.delay.node_times();
        let mut times = Vec::with_capacity(nodes.len());
        let mut y_vals = Vec::with_capacity(nodes.len());
        let mut y_rates = Vec::with_capacity(nodes.len());
        let mut eta_vals = Vec::with_capacity(nodes.len());
        let mut eta_rates = Vec::with_capacity(nodes.len());
        for &s in &nodes {
            let a_rate = self.alpha.rate(s)?;
            times.push(self.alpha.to_original(s)?);
            let z = self.state.eval(s)?;
            let dz = self.state.eval_derivative(s)?;
            y_vals.push(z);
            y_rates.push(dz.iter().map(|&d| d / a_rate).collect());
            eta_vals.push(vec![self.delay.eval_scalar(s)?]);
            eta_rates.push(vec![self.delay.eval_derivative_scalar(s)? / a_rate]);
        }
        let y = Trajectory::from_nodes(&times, &y_vals, &y_rates)?;
        let eta = Trajectory::from_nodes(&times, &eta_vals, &eta_rates)?;
        Ok((y, eta))
    }

    /// Rebuilds the initial history from the seed window:
    /// `g(t) = z(α⁻¹(t))` for `t` in the seed's image
    /// `[α(s0 − 2η̄), α(s0)]` (that is, `[t0 − η0, t0]`).
    pub fn restore_initial_history(&self, t: T) -> Result<Vec<T>, TransformedError> {
        let s_min = self.alpha.s_min();
        let lo = self.alpha.to_original(s_min)?;
        let hi = self.alpha.t0();
        if t < lo || t > hi {
            return Err(TransformedError::OutOfDomain { t: t.as_f64(), lo: lo.as_f64(), hi: hi.as_f64() });
        }
        let s = self.alpha.to_transformed(t)?;
        Ok(self.state.eval(s.min(self.s0()))?)
    }

    /// One-sided rate gaps of `α`, `z` and `χ` at the window joints
    /// `s0 + k·2η̄`. With a compatible seed all gaps beyond the data
    /// kink at `s0` vanish.
    pub fn join_jumps(&self) -> Vec<JoinJump<T>> {
        let s0 = self.s0();
        let lag = self.lag();
        let tol = T::of(1e-9) * (T::one() + lag);
        let joint_index = |s: T| -> Option<T> {
            let k = ((s - s0) / lag).round();
            (k >= -T::of(0.5) && (s - (s0 + k * lag)).abs() <= tol).then_some(k)
        };

        let gaps_of = |traj: &Trajectory<T>| {
            let mut gaps: Vec<(T, T)> = Vec::new();
            for pair in traj.segments().windows(2) {
                let s = pair[1].t_lo;
                if joint_index(s).is_some() {
                    let mut gap = T::zero();
                    for i in 0..traj.dim() {
                        gap = gap.max((pair[0].dy_hi[i] - pair[1].dy_lo[i]).abs());
                    }
                    gaps.push((s, gap));
                }
            }
            gaps
        };

        let alpha_gaps = gaps_of(self.alpha.as_monotone().trajectory());
        let state_gaps = gaps_of(&self.state);
        let delay_gaps = gaps_of(&self.delay);
        let find = |gaps: &[(T, T)], s: T| {
            gaps.iter().find(|(at, _)| (*at - s).abs() <= tol).map(|&(_, g)| g)
        };

        let mut joints: Vec<T> = Vec::new();
        for &(s, _) in alpha_gaps.iter().chain(&state_gaps).chain(&delay_gaps) {
            if !joints.iter().any(|&j| (j - s).abs() <= tol) {
                joints.push(s);
            }
        }
        joints.sort_by(|a, b| a.partial_cmp(b).expect("finite joint times"));

        joints
            .into_iter()
            .map(|s| JoinJump {
                s,
                alpha_rate_gap: find(&alpha_gaps, s).unwrap_or_else(T::zero),
                state_rate_gap: find(&state_gaps, s).unwrap_or_else(T::zero),
                delay_rate_gap: find(&delay_gaps, s),
            })
            .collect()
    }

    /// Sup of `|α(s) − χ(s) − α(s − 2η̄)|` over nodes and interior
    /// sample points: the rearranged defining relation, monitored rather
    /// than enforced.
    pub fn reconstruction_residual(&self) -> Result<T, TransformedError> {
        let lag = self.lag();
        let alpha = self.alpha.as_monotone().trajectory();
        let mut worst = T::zero();
        for seg in self.delay.segments() {
            for frac in [0.0, 0.34, 0.71, 1.0] {
                let s = seg.t_lo + T::of(frac) * seg.width();
                let residual =
                    (alpha.eval_scalar(s)? - self.delay.eval_scalar(s)? - alpha.eval_scalar(s - lag)?).abs();
                worst = worst.max(residual);
            }
        }
        Ok(worst)
    }

    /// Returns a copy whose time map is shifted by `offset`, leaving `z`
    /// and `χ` untouched. This deliberately breaks the correspondence
    /// with the original system and exists to prove that the
    /// verification harness catches a corrupted map; it has no other
    /// use.
    pub fn with_alpha_shifted(&self, offset: T) -> Result<Self, TransformedError> {
        let traj = self.alpha.as_monotone().trajectory();
        let times = traj.node_times();
        let mut values = Vec::with_capacity(times.len());
        let mut rates = Vec::with_capacity(times.len());
        for &s in &times {
            values.push(vec![traj.eval_scalar(s)? + offset]);
            rates.push(vec![traj.eval_derivative_scalar(s)?]);
        }
        let shifted = Trajectory::from_nodes(&times, &values, &rates)?;
        let map = MonotoneFn::new(shifted, self.alpha.as_monotone().slope_floor())?;
        let alpha = TimeMap::from_parts(
            map,
            self.alpha.s0(),
            self.alpha.t0() + offset,
            self.alpha.lag(),
            self.alpha.compatibility_residual(),
        );
        Ok(Self {
            state: self.state.clone(),
            delay: self.delay.clone(),
            alpha,
            params: self.params.clone(),
            deviating_rate_range: self.deviating_rate_range,
            band_excursion: self.band_excursion,
        })
    }
}

/// Integrates the transformed system over `[s0, s0 + horizon]` with
/// fixed step `ds`, which must divide the lag exactly and stay within
/// `rest_delay/4`. The horizon rounds up to a whole number of steps.
/// `z` is initialized as `g∘ω` sampled on the step mesh; `α` starts as
/// the seed itself.
pub fn integrate_transformed<T: Real>(
    params: &Params<T>,
    init: &InitialData<T>,
    seed: &TimeMapSeed<T>,
    horizon: T,
    ds: T,
) -> Result<TransformedSolution<T>, TransformedError> {
    if !params.monotonicity_certificate() {
        return Err(TransformedError::CertificateRequired {
            product: (T::of(2.0) * params.relaxation_rate() * params.rest_delay()).as_f64(),
        });
    }
    let lag = params.lag();
    let t0 = init.t0();
    let eta0 = init.initial_delay();
    transform::validate_seed_against(seed, lag, t0, eta0)?;
    check_step(params, ds)?;
    if !(horizon > T::zero()) {
        return Err(TransformedError::BadHorizon { horizon: horizon.as_f64() });
    }
    let steps = grid::steps_covering(horizon, ds).expect("positive horizon and step");
    let r = grid::steps_covering(lag, ds).expect("positive lag and step");
    let s0 = seed.s0();

    // z on the seed window: the composition g∘ω sampled on the mesh.
    let mesh = grid::uniform(s0 - lag, s0, r);
    let mut values = Vec::with_capacity(mesh.len());
    let mut rates = Vec::with_capacity(mesh.len());
    for &s in &mesh {
        let w = seed.trajectory().eval_scalar(s)?;
        let w_rate = seed.trajectory().eval_derivative_scalar(s)?;
        let g = init.history().eval(w)?;
        let dg = init.history().eval_derivative(w)?;
        values.push(g);
        rates.push(dg.iter().map(|&d| d * w_rate).collect::<Vec<T>>());
    }
    let z_hist = Trajectory::from_nodes(&mesh, &values, &rates)?;

    march(params, &z_hist, eta0, seed.trajectory(), steps, ds)
}

/// Re-seeds a fresh solve from the flow state at `s_mid` (the backward
/// windows of `z` and `α`, plus `χ(s_mid)`), continues it to the same
/// horizon, and reports the sup-distances between the two endings. A
/// two-parameter evolution family must make this distance vanish;
/// `s_mid = s0` degenerates to an exact identity.
pub fn process_restart_check<T: Real>(
    params: &Params<T>,
    init: &InitialData<T>,
    seed: &TimeMapSeed<T>,
    s_mid: T,
    horizon: T,
    ds: T,
) -> Result<RestartReport<T>, TransformedError> {
    let direct = integrate_transformed(params, init, seed, horizon, ds)?;
    let s0 = direct.s0();
    let s_end = direct.s_end();
    let snap = T::of(1e-9) * (T::one() + ds);
    if s_mid < s0 - snap || s_mid >= s_end {
        return Err(TransformedError::InvalidRestart {
            s_mid: s_mid.as_f64(),
            reason: "restart point must lie in [s0, s_end)",
        });
    }
    let offset = (s_mid - s0) / ds;
    if (offset - offset.round()).abs() > T::of(1e-9) * (T::one() + offset.abs()) {
        return Err(TransformedError::InvalidRestart {
            s_mid: s_mid.as_f64(),
            reason: "restart point must sit on the step mesh",
        });
    }

    let lag = direct.lag();
    let z_hist = direct.state().restrict(s_mid - lag, s_mid)?;
    let alpha_hist = direct.alpha().as_monotone().trajectory().restrict(s_mid - lag, s_mid)?;
    let chi_mid = direct.delay().eval_scalar(s_mid)?;
    let steps = grid::steps_covering(s_end - s_mid, ds).expect("positive span");
    let restarted = march(params, &z_hist, chi_mid, &alpha_hist, steps, ds)?;

    let mut state_distance = T::zero();
    let mut delay_distance = T::zero();
    let mut alpha_distance = T::zero();
    let samples = 2 * steps;
    for i in 0..=samples {
        let s = s_mid + (s_end - s_mid) * T::from_usize(i).expect("sample") / T::from_usize(samples).expect("sample");
        let za = direct.state().eval(s)?;
        let zb = restarted.state().eval(s)?;
        for (a, b) in za.iter().zip(&zb) {
            state_distance = state_distance.max((*a - *b).abs());
        }
        delay_distance = delay_distance
            .max((direct.delay().eval_scalar(s)? - restarted.delay().eval_scalar(s)?).abs());
        alpha_distance = alpha_distance
            .max((direct.alpha().to_original(s)? - restarted.alpha().to_original(s)?).abs());
    }
    Ok(RestartReport { s_mid, state_distance, delay_distance, alpha_distance })
}

/// Sup-distances between a direct march and a restarted one; see
/// [`process_restart_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RestartReport<T> {
    pub s_mid: T,
    pub state_distance: T,
    pub delay_distance: T,
    pub alpha_distance: T,
}

impl<T: Real> RestartReport<T> {
    pub fn max_distance(&self) -> T {
        self.state_distance.max(self.delay_distance).max(self.alpha_distance)
    }
}

fn check_step<T: Real>(params: &Params<T>, ds: T) -> Result<(), TransformedError> {
    if !(ds > T::zero()) {
        return Err(TransformedError::NonPositiveStep { ds: ds.as_f64() });
    }
    let limit = params.rest_delay() / T::of(4.0);
    if ds > limit {
        return Err(TransformedError::StepTooLarge { ds: ds.as_f64(), limit: limit.as_f64() });
    }
    if !grid::divides(params.lag(), ds) {
        return Err(TransformedError::StepMismatch { ds: ds.as_f64(), lag: params.lag().as_f64() });
    }
    Ok(())
}

/// Right-hand side of one stage: fills `dz`, returns `(dχ, D)`.
///
/// `lag_rate_override` substitutes the one-sided `α'(s − lag)` at a
/// joint, where the committed evaluation would give the right-sided
/// value but the closing integrand needs the left-sided one.
#[allow(clippy::too_many_arguments)]
fn eval_stage<T: Real>(
    params: &Params<T>,
    zb: &TrajectoryBuilder<T>,
    ab: &TrajectoryBuilder<T>,
    lag: T,
    s: T,
    chi: T,
    z: &[T],
    lag_rate_override: Option<T>,
    z_lag: &mut [T],
    a_buf: &mut [T; 1],
    dz: &mut [T],
) -> Result<(T, T), TransformedError> {
    let q = s - lag;
    zb.eval_committed_into(q, z_lag)?;
    ab.eval_committed_into(q, &mut a_buf[..])?;
    let a_lag = a_buf[0];
    let lag_rate = match lag_rate_override {
        Some(rate) => rate,
        None => {
            ab.eval_committed_derivative_into(q, &mut a_buf[..])?;
            a_buf[0]
        }
    };
    let rate = params.delay_rate(chi, z);
    let divisor = T::one() - rate;
    if divisor <= T::of(DENOMINATOR_FLOOR) {
        return Err(TransformedError::DenominatorVanished { value: divisor.as_f64() });
    }
    params.eval_rhs(chi + a_lag, z, z_lag, dz);
    let scale = lag_rate / divisor;
    for v in dz.iter_mut() {
        *v = *v * scale;
    }
    Ok((rate * scale, divisor))
}

/// The method-of-steps march shared by the fresh solve and restarts.
/// Histories must cover exactly one lag ending at the start time.
fn march<T: Real>(
    params: &Params<T>,
    z_hist: &Trajectory<T>,
    chi0: T,
    alpha_hist: &Trajectory<T>,
    steps: usize,
    ds: T,
) -> Result<TransformedSolution<T>, TransformedError> {
    let lag = params.lag();
    let m = params.dim();
    let s_start = z_hist.t_max();
    let r = grid::steps_covering(lag, ds).expect("positive lag and step");

    let mut zb = TrajectoryBuilder::from_history(z_hist);
    let mut ab = TrajectoryBuilder::from_history(alpha_hist);
    let mut chib = TrajectoryBuilder::new(1);

    // α' left-sided at the most recent joint; seeds the one-sided
    // closing rates each time a window ends.
    let mut left_lag_rate = alpha_hist.segments().last().expect("nonempty history").dy_hi[0];
    let start_lag_rate = alpha_hist.segments()[0].dy_lo[0];

    let mut chi = chi0;
    let mut z = z_hist.eval(s_start)?;
    let divisor0 = T::one() - params.delay_rate(chi, &z);
    let compatibility_residual = (start_lag_rate - divisor0 * left_lag_rate).abs();

    let mut z_lag = vec![T::zero(); m];
    let mut a_buf = [T::zero(); 1];
    let mut dz = vec![T::zero(); m];
    let mut k = vec![vec![T::zero(); m]; 4];
    let mut kd = [T::zero(); 4];
    let mut z_stage = vec![T::zero(); m];
    let mut z_next = vec![T::zero(); m];

    // Opening rates at the start.
    let (dchi0, div0) =
        eval_stage(params, &zb, &ab, lag, s_start, chi, &z, None, &mut z_lag, &mut a_buf, &mut dz)?;
    let t_start = alpha_hist.eval_scalar(s_start)?;
    ab.eval_committed_derivative_into(s_start - lag, &mut a_buf)?;
    let alpha_open_rate = dchi0 + a_buf[0];
    zb.start(s_start, &z, &dz)?;
    chib.start(s_start, &[chi], &[dchi0])?;
    ab.start(s_start, &[t_start], &[alpha_open_rate])?;

    let mut div_min = div0;
    let mut div_max = div0;
    let mut excursion = T::zero().max(-chi).max(chi - lag);

    let half = ds.half();
    let sixth = ds / T::of(6.0);
    let two = T::of(2.0);

    for n in 0..steps {
        let s_n = s_start + T::from_usize(n).expect("step index") * ds;
        let s_next = s_start + T::from_usize(n + 1).expect("step index") * ds;
        let joint = (n + 1) % r == 0;

        let (d1, _) =
            eval_stage(params, &zb, &ab, lag, s_n, chi, &z, None, &mut z_lag, &mut a_buf, &mut k[0])?;
        kd[0] = d1;
        for i in 0..m {
            z_stage[i] = z[i] + half * k[0][i];
        }
        let (d2, _) = eval_stage(
            params, &zb, &ab, lag, s_n + half, chi + half * kd[0], &z_stage, None,
            &mut z_lag, &mut a_buf, &mut k[1],
        )?;
        kd[1] = d2;
        for i in 0..m {
            z_stage[i] = z[i] + half * k[1][i];
        }
        let (d3, _) = eval_stage(
            params, &zb, &ab, lag, s_n + half, chi + half * kd[1], &z_stage, None,
            &mut z_lag, &mut a_buf, &mut k[2],
        )?;
        kd[2] = d3;
        for i in 0..m {
            z_stage[i] = z[i] + ds * k[2][i];
        }
        let override4 = joint.then_some(left_lag_rate);
        let (d4, _) = eval_stage(
            params, &zb, &ab, lag, s_next, chi + ds * kd[2], &z_stage, override4,
            &mut z_lag, &mut a_buf, &mut k[3],
        )?;
        kd[3] = d4;

        for i in 0..m {
            z_next[i] = z[i] + sixth * (k[0][i] + two * k[1][i] + two * k[2][i] + k[3][i]);
        }
        let chi_next = chi + sixth * (kd[0] + two * kd[1] + two * kd[2] + kd[3]);
        if !chi_next.is_finite() || z_next.iter().any(|v| !v.is_finite()) {
            return Err(TransformedError::NonFiniteState { s: s_next.as_f64() });
        }

        // Closing rates at the new node (left-sided across a joint).
        let (dchi_close, div_close) = eval_stage(
            params, &zb, &ab, lag, s_next, chi_next, &z_next, joint.then_some(left_lag_rate),
            &mut z_lag, &mut a_buf, &mut dz,
        )?;
        ab.eval_committed_into(s_next - lag, &mut a_buf)?;
        let alpha_next = chi_next + a_buf[0];
        let lag_rate_close = match joint {
            true => left_lag_rate,
            false => {
                ab.eval_committed_derivative_into(s_next - lag, &mut a_buf)?;
                a_buf[0]
            }
        };
        let alpha_close_rate = dchi_close + lag_rate_close;

        zb.push(s_next, &z_next, &dz)?;
        chib.push(s_next, &[chi_next], &[dchi_close])?;
        ab.push(s_next, &[alpha_next], &[alpha_close_rate])?;

        div_min = div_min.min(div_close);
        div_max = div_max.max(div_close);
        excursion = excursion.max(-chi_next).max(chi_next - lag);

        if joint {
            left_lag_rate = alpha_close_rate;
            if n + 1 < steps {
                // Reopen with right-sided rates.
                let (dchi_open, _) = eval_stage(
                    params, &zb, &ab, lag, s_next, chi_next, &z_next, None,
                    &mut z_lag, &mut a_buf, &mut dz,
                )?;
                ab.eval_committed_derivative_into(s_next - lag, &mut a_buf)?;
                let alpha_open = dchi_open + a_buf[0];
                zb.start(s_next, &z_next, &dz)?;
                chib.start(s_next, &[chi_next], &[dchi_open])?;
                ab.start(s_next, &[alpha_next], &[alpha_open])?;
            }
        }

        z.copy_from_slice(&z_next);
        chi = chi_next;
    }

    let state = zb.finish();
    let delay = chib.finish();
    let alpha_traj = ab.finish();
    let map = MonotoneFn::from_measured_floor(alpha_traj)?;
    let alpha = TimeMap::from_parts(map, s_start, t_start, lag, compatibility_residual);
    Ok(TransformedSolution {
        state,
        delay,
        alpha,
        params: params.clone(),
        deviating_rate_range: (div_min, div_max),
        band_excursion: excursion,
    })
}
