//! Fixed-step integration of the state-dependent-delay system.
//!
//! The unknowns are the state `y ∈ ℝᵐ` and the scalar delay `η`:
//!
//! ```text
//! y'(t) = f(t, y(t), y(t − η(t)))
//! η'(t) = −μ·(η(t) − η̄) + G(y(t))
//! y = g on [t0 − 2η̄, t0],   η(t0) = η0 ∈ [0, 2η̄]
//! ```
//!
//! The coupling budget `sup|G| ≤ μ·η̄` (enforced on [`Params`]) keeps the
//! delay inside the band `[0, 2η̄]`, so the delayed argument never leaves
//! the stored history. The integrator is the classical fourth-order
//! Runge-Kutta scheme on the coupled `(y, η)` state with cubic-Hermite
//! dense output. Delayed values come from the dense solution; when a
//! stage's delayed argument lands inside the step being computed (delay
//! smaller than the step), the step is solved by functional iteration on
//! a predictor segment extrapolated from the previous step.
//!
//! [`picard_reference`] computes the same solution through an entirely
//! different route — fixed-point iteration of the integral form
//!
//! ```text
//! y(t) = g(t0) + ∫ f(s, y(s), y(s − η(s))) ds
//! η(t) = η̄ + e^{−μ(t−t0)}·(η0 − η̄) + ∫ e^{−μ(t−s)}·G(y(s)) ds
//! ```
//!
//! with composite-Simpson quadrature on a four-fold refined mesh. It is
//! deliberately independent of the stepper (no Runge-Kutta stages, no
//! overlap iteration) and serves as a cross-check over one history span.

use std::sync::Arc;

use crate::grid;
use crate::monotone::{MonotoneError, MonotoneFn};
use crate::real::Real;
use crate::trajectory::{Segment, Trajectory, TrajectoryBuilder, TrajectoryError};

/// Right-hand side `f(t, y, y_delayed, out)` of the state equation.
pub type RhsFn<T> = Arc<dyn Fn(T, &[T], &[T], &mut [T]) + Send + Sync>;
/// State-to-delay coupling `G(y)`.
pub type CouplingFn<T> = Arc<dyn Fn(&[T]) -> T + Send + Sync>;

/// Convergence tolerance for the in-step functional iteration.
const OVERLAP_TOLERANCE: f64 = 1e-12;
/// Iteration cap for the in-step functional iteration.
const OVERLAP_MAX_ITERATIONS: usize = 10;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SddError {
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("state dimension must be at least 1")]
    ZeroDimension,
    #[error("coupling bound {coupling_sup} exceeds the delay-preserving budget mu*rest_delay = {budget}")]
    CouplingBoundTooLarge { coupling_sup: f64, budget: f64 },
    #[error("initial delay {initial_delay} outside the admissible band [0, {lag}]")]
    InitialDelayOutOfBand { initial_delay: f64, lag: f64 },
    #[error("history must cover [{expected_lo}, {expected_hi}], got [{got_lo}, {got_hi}]")]
    HistoryDomainMismatch { expected_lo: f64, expected_hi: f64, got_lo: f64, got_hi: f64 },
    #[error("history derivative jumps by {gap} at t = {t}; initial data must be C1")]
    HistoryNotC1 { t: f64, gap: f64 },
    #[error("history dimension {got} does not match the model dimension {expected}")]
    HistoryDimensionMismatch { expected: usize, got: usize },
    #[error("delay floor {h1} must lie in (0, rest_delay = {rest_delay}]")]
    InvalidH1 { h1: f64, rest_delay: f64 },
    #[error("horizon {t_end} does not extend past the initial time {t0}")]
    BadHorizon { t_end: f64, t0: f64 },
    #[error("step {dt} exceeds the resolution limit rest_delay/4 = {limit}")]
    StepTooLarge { dt: f64, limit: f64 },
    #[error("step {dt} must divide the history span {lag} exactly")]
    StepMismatch { dt: f64, lag: f64 },
    #[error("in-step iteration still changing by {change} after {iterations} iterations at t = {t}")]
    IterationDiverged { t: f64, change: f64, iterations: usize },
    #[error("state became non-finite at t = {t}")]
    NonFiniteState { t: f64 },
    #[error("fixed-point reference is limited to one history span: {span} > {lag}")]
    HorizonTooLong { span: f64, lag: f64 },
    #[error("monotone invertibility requires 2*mu*rest_delay < 1, got {product}")]
    CertificateRequired { product: f64 },
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
    #[error(transparent)]
    Monotone(#[from] MonotoneError),
}

/// Analytic bounds the caller declares for the model; they are not
/// estimated. `rhs_lipschitz` bounds `f` in the state arguments,
/// `coupling_lipschitz` bounds `G`, and `coupling_sup` bounds `|G|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelBounds<T> {
    pub rhs_lipschitz: T,
    pub coupling_lipschitz: T,
    pub coupling_sup: T,
}

/// Model definition: relaxation dynamics of the delay plus the state
/// right-hand side, with the declared bounds.
#[derive(Clone)]
pub struct Params<T: Real> {
    relaxation_rate: T,
    rest_delay: T,
    dim: usize,
    rhs: RhsFn<T>,
    coupling: CouplingFn<T>,
    bounds: ModelBounds<T>,
    time_invariant: bool,
}

impl<T: Real> core::fmt::Debug for Params<T> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Params")
            .field("relaxation_rate", &self.relaxation_rate)
            .field("rest_delay", &self.rest_delay)
            .field("dim", &self.dim)
            .field("bounds", &self.bounds)
            .field("time_invariant", &self.time_invariant)
            .finish_non_exhaustive()
    }
}

impl<T: Real> Params<T> {
    /// Validates and stores the model. Rejects a coupling bound above
    /// `mu*rest_delay`: past that budget the delay can leave `[0, 2η̄]`
    /// and the delayed argument would run out of history.
    pub fn new(
        relaxation_rate: T,
        rest_delay: T,
        dim: usize,
        rhs: RhsFn<T>,
        coupling: CouplingFn<T>,
        bounds: ModelBounds<T>,
    ) -> Result<Self, SddError> {
        if !(relaxation_rate > T::zero()) {
            return Err(SddError::NonPositive { name: "relaxation_rate", value: relaxation_rate.as_f64() });
        }
        if !(rest_delay > T::zero()) {
            return Err(SddError::NonPositive { name: "rest_delay", value: rest_delay.as_f64() });
        }
        if dim == 0 {
            return Err(SddError::ZeroDimension);
        }
        if bounds.coupling_sup < T::zero() || bounds.rhs_lipschitz < T::zero() || bounds.coupling_lipschitz < T::zero() {
            return Err(SddError::NonPositive { name: "declared bounds", value: bounds.coupling_sup.as_f64() });
        }
        let budget = relaxation_rate * rest_delay;
        if bounds.coupling_sup > budget {
            return Err(SddError::CouplingBoundTooLarge {
                coupling_sup: bounds.coupling_sup.as_f64(),
                budget: budget.as_f64(),
            });
        }
        Ok(Self { relaxation_rate, rest_delay, dim, rhs, coupling, bounds, time_invariant: false })
    }

    /// Marks the right-hand side as autonomous (no explicit time
    /// dependence); purely informational, used by manifold diagnostics.
    pub fn assume_time_invariant(mut self) -> Self {
        self.time_invariant = true;
        self
    }

    pub fn relaxation_rate(&self) -> T {
        self.relaxation_rate
    }

    pub fn rest_delay(&self) -> T {
        self.rest_delay
    }

    /// History span and admissible delay maximum: exactly `2·rest_delay`.
    pub fn lag(&self) -> T {
        T::of(2.0) * self.rest_delay
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bounds(&self) -> ModelBounds<T> {
        self.bounds
    }

    pub fn time_invariant(&self) -> bool {
        self.time_invariant
    }

    pub fn eval_rhs(&self, t: T, y: &[T], y_delayed: &[T], out: &mut [T]) {
        (self.rhs)(t, y, y_delayed, out)
    }

    pub fn eval_coupling(&self, y: &[T]) -> T {
        (self.coupling)(y)
    }

    /// Time derivative of the delay at state `y`, delay value `delay`.
    pub fn delay_rate(&self, delay: T, y: &[T]) -> T {
        -self.relaxation_rate * (delay - self.rest_delay) + self.eval_coupling(y)
    }

    /// True when `2·mu·rest_delay < 1`, the condition certifying that the
    /// deviating argument `t − η(t)` grows strictly.
    pub fn monotonicity_certificate(&self) -> bool {
        T::of(2.0) * self.relaxation_rate * self.rest_delay < T::one()
    }

    /// Certified slope floor `1 − 2·mu·rest_delay` for the deviating
    /// argument, when the certificate holds.
    pub fn deviating_slope_floor(&self) -> Option<T> {
        self.monotonicity_certificate()
            .then(|| T::one() - T::of(2.0) * self.relaxation_rate * self.rest_delay)
    }

    /// True when the declared coupling bound keeps the delay at or above
    /// `h1`: `sup|G| ≤ mu·(rest_delay − h1)`. `h1` must lie in
    /// `(0, rest_delay]`.
    pub fn delay_floor_certificate(&self, h1: T) -> Result<bool, SddError> {
        if !(h1 > T::zero()) || h1 > self.rest_delay {
            return Err(SddError::InvalidH1 { h1: h1.as_f64(), rest_delay: self.rest_delay.as_f64() });
        }
        Ok(self.bounds.coupling_sup <= self.relaxation_rate * (self.rest_delay - h1))
    }
}

/// Initial data: C¹ history over one full span plus the starting delay.
#[derive(Debug, Clone)]
pub struct InitialData<T: Real> {
    history: Trajectory<T>,
    initial_delay: T,
    t0: T,
}

impl<T: Real> InitialData<T> {
    pub fn new(history: Trajectory<T>, initial_delay: T, t0: T, params: &Params<T>) -> Result<Self, SddError> {
        if history.dim() != params.dim() {
            return Err(SddError::HistoryDimensionMismatch { expected: params.dim(), got: history.dim() });
        }
        let lag = params.lag();
        if initial_delay < T::zero() || initial_delay > lag {
            return Err(SddError::InitialDelayOutOfBand {
                initial_delay: initial_delay.as_f64(),
                lag: lag.as_f64(),
            });
        }
        let expected_lo = t0 - lag;
        let tol = T::of(1e-9) * (T::one() + t0.abs() + lag);
        if (history.t_min() - expected_lo).abs() > tol || (history.t_max() - t0).abs() > tol {
            return Err(SddError::HistoryDomainMismatch {
                expected_lo: expected_lo.as_f64(),
                expected_hi: t0.as_f64(),
                got_lo: history.t_min().as_f64(),
                got_hi: history.t_max().as_f64(),
            });
        }
        // The history must be C¹: derivative jumps at interior joins are
        // initial-data defects, not solution kinks.
        let segs = history.segments();
        for pair in segs.windows(2) {
            for i in 0..history.dim() {
                let gap = (pair[0].dy_hi[i] - pair[1].dy_lo[i]).abs();
                if gap > T::of(1e-9) * (T::one() + pair[0].dy_hi[i].abs()) {
                    return Err(SddError::HistoryNotC1 { t: pair[1].t_lo.as_f64(), gap: gap.as_f64() });
                }
            }
        }
        Ok(Self { history, initial_delay, t0 })
    }

    pub fn history(&self) -> &Trajectory<T> {
        &self.history
    }

    pub fn initial_delay(&self) -> T {
        self.initial_delay
    }

    pub fn t0(&self) -> T {
        self.t0
    }
}

/// Dense solution of the state-dependent-delay system.
#[derive(Debug, Clone)]
pub struct SddSolution<T: Real> {
    state: Trajectory<T>,
    delay: Trajectory<T>,
    deviating: Option<MonotoneFn<T>>,
    params: Params<T>,
    initial: InitialData<T>,
    band_excursion: T,
}

impl<T: Real> SddSolution<T> {
    /// State trajectory `y` on `[t0 − 2η̄, t_end]` (history included).
    pub fn state(&self) -> &Trajectory<T> {
        &self.state
    }

    /// Delay trajectory `η` on `[t0, t_end]`.
    pub fn delay(&self) -> &Trajectory<T> {
        &self.delay
    }

    /// The deviating argument `σ(t) = t − η(t)` as a certified monotone
    /// map; present exactly when the monotonicity certificate holds.
    pub fn deviating_map(&self) -> Option<&MonotoneFn<T>> {
        self.deviating.as_ref()
    }

    pub fn params(&self) -> &Params<T> {
        &self.params
    }

    pub fn initial(&self) -> &InitialData<T> {
        &self.initial
    }

    pub fn t0(&self) -> T {
        self.initial.t0()
    }

    pub fn t_end(&self) -> T {
        self.delay.t_max()
    }

    /// Largest distance the computed delay strayed outside `[0, 2η̄]` at
    /// the mesh nodes. Values are never clamped; this reports the
    /// excursion so callers can check it against their tolerance.
    pub fn delay_band_excursion(&self) -> T {
        self.band_excursion
    }

    /// Deviating argument `σ(t) = t − η(t)` for `t` in the integrated span.
    pub fn deviating_argument(&self, t: T) -> Result<T, SddError> {
        Ok(t - self.delay.eval_scalar(t)?)
    }

    /// Solves `σ(t) = tau`. The root is bracketed by
    /// `[max(t0, tau), min(t_end, tau + 2η̄)]` because the delay stays in
    /// the band. Requires the monotonicity certificate.
    pub fn deviating_argument_inverse(&self, tau: T) -> Result<T, SddError> {
        let map = self.deviating.as_ref().ok_or_else(|| SddError::CertificateRequired {
            product: (T::of(2.0) * self.params.relaxation_rate() * self.params.rest_delay()).as_f64(),
        })?;
        let lo = self.t0().max(tau);
        let hi = self.t_end().min(tau + self.params.lag());
        Ok(map.invert(tau, (lo, hi))?)
    }

    /// Max-norm bound on `|y'|` over the integrated span `[t0, t_end]`,
    /// read off the stored node derivatives (right-hand-side values).
    /// The given history is excluded: this estimates the Lipschitz
    /// constant of the computed continuation.
    pub fn state_lipschitz_estimate(&self) -> T {
        let mut best = T::zero();
        for seg in self.state.segments() {
            if seg.t_lo < self.t0() {
                continue;
            }
            for d in seg.dy_lo.iter().chain(seg.dy_hi.iter()) {
                best = best.max(d.abs());
            }
        }
        best
    }
}

/// Builds the deviating-argument map from delay nodes when the
/// certificate holds. The advertised floor is the certificate value
/// `1 − 2μη̄`, tightened to the measured interpolant minimum if the
/// interpolant dips below it between nodes.
fn build_deviating<T: Real>(params: &Params<T>, delay: &Trajectory<T>) -> Result<Option<MonotoneFn<T>>, SddError> {
    let Some(cert_floor) = params.deviating_slope_floor() else {
        return Ok(None);
    };
    let times = delay.node_times();
    let mut values = Vec::with_capacity(times.len());
    let mut derivs = Vec::with_capacity(times.len());
    for (i, seg) in delay.segments().iter().enumerate() {
        if i == 0 {
            values.push(vec![seg.t_lo - seg.y_lo[0]]);
            derivs.push(vec![T::one() - seg.dy_lo[0]]);
        }
        values.push(vec![seg.t_hi - seg.y_hi[0]]);
        derivs.push(vec![T::one() - seg.dy_hi[0]]);
    }
    let traj = Trajectory::from_nodes(&times, &values, &derivs)?;
    let measured = MonotoneFn::from_measured_floor(traj)?;
    let floor = cert_floor.min(measured.slope_floor());
    let map = MonotoneFn::new(measured.trajectory().clone(), floor)?;
    Ok(Some(map))
}

fn max_band_excursion<T: Real>(delay: &Trajectory<T>, lag: T) -> T {
    let mut worst = T::zero();
    for seg in delay.segments() {
        for v in [seg.y_lo[0], seg.y_hi[0]] {
            worst = worst.max(-v).max(v - lag);
        }
    }
    worst
}

/// Looks up the (possibly in-flight) state at a delayed argument.
///
/// Arguments at or before the committed front come from the committed
/// dense output; later ones from the predictor segment. Queries are
/// clamped to the history's left endpoint to absorb round-off-level
/// excursions of the delay band. Returns whether the predictor was used.
fn delayed_state<T: Real>(
    committed: &TrajectoryBuilder<T>,
    committed_front: T,
    t_min: T,
    predictor: &Segment<T>,
    t_query: T,
    out: &mut [T],
) -> bool {
    let t = t_query.max(t_min);
    if t <= committed_front {
        committed
            .eval_committed_into(t, out)
            .expect("delayed argument stays inside committed history");
        false
    } else {
        predictor.eval_into(t, out);
        true
    }
}

/// Integrates the system to `t_end` with fixed step `dt`.
///
/// `dt` must divide the history span `2η̄` exactly and may not exceed
/// `rest_delay/4`. If `t_end − t0` is not a whole number of steps the
/// horizon rounds up to the next mesh point. When a stage's delayed
/// argument falls inside the current step, the step is re-evaluated on a
/// predictor segment until its increment settles below `1e-12` (at most
/// 10 sweeps).
pub fn integrate<T: Real>(
    params: &Params<T>,
    init: &InitialData<T>,
    t_end: T,
    dt: T,
) -> Result<SddSolution<T>, SddError> {
    let t0 = init.t0();
    let lag = params.lag();
    if !(t_end > t0) {
        return Err(SddError::BadHorizon { t_end: t_end.as_f64(), t0: t0.as_f64() });
    }
    let limit = params.rest_delay() / T::of(4.0);
    if dt > limit {
        return Err(SddError::StepTooLarge { dt: dt.as_f64(), limit: limit.as_f64() });
    }
    if !grid::divides(lag, dt) {
        return Err(SddError::StepMismatch { dt: dt.as_f64(), lag: lag.as_f64() });
    }
    let steps = grid::steps_covering(t_end - t0, dt).ok_or(SddError::BadHorizon {
        t_end: t_end.as_f64(),
        t0: t0.as_f64(),
    })?;

    let m = params.dim();
    let mut y = init.history().eval(t0)?;
    let mut delay = init.initial_delay();

    let mut state_builder = TrajectoryBuilder::from_history(init.history());
    let mut delay_builder = TrajectoryBuilder::new(1);

    // Right-hand derivatives at the start; the state may kink at t0.
    let mut delayed_buf = vec![T::zero(); m];
    let sigma0 = (t0 - delay).max(init.history().t_min());
    init.history().eval_into(sigma0, &mut delayed_buf)?;
    let mut dy = vec![T::zero(); m];
    params.eval_rhs(t0, &y, &delayed_buf, &mut dy);
    let mut ddelay = params.delay_rate(delay, &y);
    state_builder.start(t0, &y, &dy)?;
    delay_builder.start(t0, &[delay], &[ddelay])?;

    let t_min = init.history().t_min();
    let half = dt.half();
    let sixth = dt / T::of(6.0);
    let two = T::of(2.0);
    let tol = T::of(OVERLAP_TOLERANCE);

    // Stage scratch buffers.
    let mut k = vec![vec![T::zero(); m]; 4];
    let mut y_stage = vec![T::zero(); m];
    let mut y_next = vec![T::zero(); m];
    let mut dy_next = vec![T::zero(); m];
    let mut y_inc = vec![T::zero(); m];
    let mut prev_inc: Vec<T> = vec![T::zero(); m];

    for n in 0..steps {
        let t_n = t0 + T::from_usize(n).expect("step index") * dt;
        let t_next = t0 + T::from_usize(n + 1).expect("step index") * dt;
        let committed_front = t_n;
        let mut predictor = state_builder.last_segment().expect("seeded history").clone();

        let mut accepted = false;
        let mut prev_delay_inc = T::zero();
        let mut delay_next = T::zero();
        let mut ddelay_next = T::zero();
        let mut have_prev = false;

        for _sweep in 0..OVERLAP_MAX_ITERATIONS {
            let mut used_predictor = false;
            let mut kd = [T::zero(); 4];

            // Stage 1 at (t_n, y, delay).
            let stage =
                |t_s: T, ys: &[T], ds: T, k_out: &mut [T], used: &mut bool, buf: &mut [T]| {
                    let sigma = t_s - ds;
                    *used |= delayed_state(&state_builder, committed_front, t_min, &predictor, sigma, buf);
                    params.eval_rhs(t_s, ys, buf, k_out);
                    params.delay_rate(ds, ys)
                };

            kd[0] = stage(t_n, &y, delay, &mut k[0], &mut used_predictor, &mut delayed_buf);
            for i in 0..m {
                y_stage[i] = y[i] + half * k[0][i];
            }
            kd[1] = stage(t_n + half, &y_stage, delay + half * kd[0], &mut k[1], &mut used_predictor, &mut delayed_buf);
            for i in 0..m {
                y_stage[i] = y[i] + half * k[1][i];
            }
            kd[2] = stage(t_n + half, &y_stage, delay + half * kd[1], &mut k[2], &mut used_predictor, &mut delayed_buf);
            for i in 0..m {
                y_stage[i] = y[i] + dt * k[2][i];
            }
            kd[3] = stage(t_next, &y_stage, delay + dt * kd[2], &mut k[3], &mut used_predictor, &mut delayed_buf);

            for i in 0..m {
                y_inc[i] = sixth * (k[0][i] + two * k[1][i] + two * k[2][i] + k[3][i]);
                y_next[i] = y[i] + y_inc[i];
            }
            let delay_inc = sixth * (kd[0] + two * kd[1] + two * kd[2] + kd[3]);
            delay_next = delay + delay_inc;

            if !delay_next.is_finite() || y_next.iter().any(|v| !v.is_finite()) {
                return Err(SddError::NonFiniteState { t: t_next.as_f64() });
            }

            // Right-node derivatives close the Hermite segment; their
            // delayed argument may also sit inside the step.
            ddelay_next = stage(t_next, &y_next, delay_next, &mut dy_next, &mut used_predictor, &mut delayed_buf);

            if !used_predictor {
                accepted = true;
                break;
            }
            // The predictor fed at least one stage: iterate until the
            // step increments stop moving.
            if have_prev {
                let mut change = (delay_inc - prev_delay_inc).abs();
                for i in 0..m {
                    change = change.max((y_inc[i] - prev_inc[i]).abs());
                }
                if change <= tol {
                    accepted = true;
                    break;
                }
            }
            prev_inc.copy_from_slice(&y_inc);
            prev_delay_inc = delay_inc;
            have_prev = true;
            predictor = Segment {
                t_lo: t_n,
                t_hi: t_next,
                y_lo: y.clone(),
                y_hi: y_next.clone(),
                dy_lo: dy.clone(),
                dy_hi: dy_next.clone(),
            };
        }

        if !accepted {
            let mut c = T::zero();
            for i in 0..m {
                c = c.max((y_inc[i] - prev_inc[i]).abs());
            }
            return Err(SddError::IterationDiverged {
                t: t_n.as_f64(),
                change: c.as_f64(),
                iterations: OVERLAP_MAX_ITERATIONS,
            });
        }

        y.copy_from_slice(&y_next);
        dy.copy_from_slice(&dy_next);
        delay = delay_next;
        ddelay = ddelay_next;
        state_builder.push(t_next, &y, &dy)?;
        delay_builder.push(t_next, &[delay], &[ddelay])?;
    }

    let state = state_builder.finish();
    let delay_traj = delay_builder.finish();
    let deviating = build_deviating(params, &delay_traj)?;
    let band_excursion = max_band_excursion(&delay_traj, lag);
    Ok(SddSolution {
        state,
        delay: delay_traj,
        deviating,
        params: params.clone(),
        initial: init.clone(),
        band_excursion,
    })
}

/// Outcome of the fixed-point reference solver: the solution after the
/// requested number of sweeps, plus the sup-distance between consecutive
/// iterates (a direct view of the contraction).
#[derive(Debug, Clone)]
pub struct PicardReference<T: Real> {
    pub solution: SddSolution<T>,
    pub sweep_distances: Vec<T>,
}

/// Solves the integral form of the system by fixed-point iteration,
/// starting from the constant extension of the initial data.
///
/// The horizon may not exceed one history span past `t0` (the iteration
/// is used as a short-range cross-check, not a production integrator).
/// Quadrature is cumulative composite Simpson on a mesh of spacing
/// `dt/4`.
pub fn picard_reference<T: Real>(
    params: &Params<T>,
    init: &InitialData<T>,
    t_end: T,
    sweeps: usize,
    dt: T,
) -> Result<PicardReference<T>, SddError> {
    let t0 = init.t0();
    let lag = params.lag();
    if !(t_end > t0) {
        return Err(SddError::BadHorizon { t_end: t_end.as_f64(), t0: t0.as_f64() });
    }
    let span = t_end - t0;
    if span > lag * (T::one() + T::of(1e-9)) {
        return Err(SddError::HorizonTooLong { span: span.as_f64(), lag: lag.as_f64() });
    }
    if !(dt > T::zero()) {
        return Err(SddError::NonPositive { name: "dt", value: dt.as_f64() });
    }
    assert!(sweeps >= 1, "at least one sweep");

    let fine = dt / T::of(4.0);
    let mut n = grid::steps_covering(span, fine).expect("positive span and step");
    if n % 2 == 1 {
        n += 1;
    }
    let mesh = grid::uniform(t0, t0 + span, n);
    let m = params.dim();
    let mu = params.relaxation_rate();
    let rest = params.rest_delay();
    let delay0 = init.initial_delay();

    // Iterate 0: constant extension of the initial data.
    let g_end = init.history().eval(t0)?;
    let mut state_k: Trajectory<T> = {
        let mut b = TrajectoryBuilder::from_history(init.history());
        let zero = vec![T::zero(); m];
        b.start(t0, &g_end, &zero)?;
        b.push(t0 + span, &g_end, &zero)?;
        b.finish()
    };
    let mut delay_k = Trajectory::constant(&[delay0], t0, t0 + span)?;

    let mut sweep_distances = Vec::with_capacity(sweeps);
    let mut integrand = vec![vec![T::zero(); m]; mesh.len()];
    let mut weighted = vec![T::zero(); mesh.len()];
    let mut y_here = vec![T::zero(); m];
    let mut y_lagged = vec![T::zero(); m];

    for _sweep in 0..sweeps {
        // Evaluate the maps' integrands along the current iterate.
        for (i, &t) in mesh.iter().enumerate() {
            state_k.eval_into(t, &mut y_here)?;
            let eta = delay_k.eval_scalar(t)?;
            let sigma = (t - eta).max(state_k.t_min()).min(state_k.t_max());
            state_k.eval_into(sigma, &mut y_lagged)?;
            params.eval_rhs(t, &y_here, &y_lagged, &mut integrand[i]);
            weighted[i] = ((t - t0) * mu).exp() * params.eval_coupling(&y_here);
        }

        // Cumulative Simpson over interval pairs; the midpoint value uses
        // the quadratic through the pair (5f0 + 8f1 − f2)/12.
        let hq = span / T::from_usize(n).expect("mesh size");
        let twelve = T::of(12.0);
        let three = T::of(3.0);
        let mut cum_state = vec![vec![T::zero(); m]; mesh.len()];
        let mut cum_weighted = vec![T::zero(); mesh.len()];
        let mut pair = 0;
        while pair + 2 <= n {
            for i in 0..m {
                let f0 = integrand[pair][i];
                let f1 = integrand[pair + 1][i];
                let f2 = integrand[pair + 2][i];
                cum_state[pair + 1][i] =
                    cum_state[pair][i] + hq * (T::of(5.0) * f0 + T::of(8.0) * f1 - f2) / twelve;
                cum_state[pair + 2][i] = cum_state[pair][i] + hq * (f0 + T::of(4.0) * f1 + f2) / three;
            }
            let w0 = weighted[pair];
            let w1 = weighted[pair + 1];
            let w2 = weighted[pair + 2];
            cum_weighted[pair + 1] = cum_weighted[pair] + hq * (T::of(5.0) * w0 + T::of(8.0) * w1 - w2) / twelve;
            cum_weighted[pair + 2] = cum_weighted[pair] + hq * (w0 + T::of(4.0) * w1 + w2) / three;
            pair += 2;
        }

        // Assemble the next iterate.
        let mut next_state = TrajectoryBuilder::from_history(init.history());
        next_state.start(t0, &g_end, &integrand[0])?;
        let mut delay_times = Vec::with_capacity(mesh.len());
        let mut delay_vals = Vec::with_capacity(mesh.len());
        let mut delay_derivs = Vec::with_capacity(mesh.len());
        let mut dist = T::zero();
        for (i, &t) in mesh.iter().enumerate() {
            let mut y_new = vec![T::zero(); m];
            for c in 0..m {
                y_new[c] = g_end[c] + cum_state[i][c];
            }
            let decay = (-(t - t0) * mu).exp();
            let eta_new = rest + decay * ((delay0 - rest) + cum_weighted[i]);
            state_k.eval_into(t, &mut y_here)?;
            let eta_old = delay_k.eval_scalar(t)?;
            let mut gap = (eta_new - eta_old).abs();
            for c in 0..m {
                gap = gap.max((y_new[c] - y_here[c]).abs());
            }
            dist = dist.max(gap);

            if i > 0 {
                next_state.push(t, &y_new, &integrand[i])?;
            }
            delay_times.push(t);
            delay_vals.push(vec![eta_new]);
            // Differentiating the delay map gives back the delay equation
            // along the previous state iterate.
            let coupling_here = params.eval_coupling(&y_here);
            delay_derivs.push(vec![-mu * (eta_new - rest) + coupling_here]);
        }
        state_k = next_state.finish();
        delay_k = Trajectory::from_nodes(&delay_times, &delay_vals, &delay_derivs)?;
        sweep_distances.push(dist);
    }

    let deviating = build_deviating(params, &delay_k)?;
    let band_excursion = max_band_excursion(&delay_k, lag);
    Ok(PicardReference {
        solution: SddSolution {
            state: state_k,
            delay: delay_k,
            deviating,
            params: params.clone(),
            initial: init.clone(),
            band_excursion,
        },
        sweep_distances,
    })
}
