//! Construction of the time map that rebases the state-dependent-delay
//! system onto a constant lag.
//!
//! Write `σ(t) = t − η(t)` for the deviating argument of a computed
//! solution. When the monotonicity certificate `2μη̄ < 1` holds, `σ` is
//! strictly increasing, and a window-by-window recursion defines an
//! increasing map `α` from a new time scale `s` back to the original:
//!
//! ```text
//! α = ω                    on [s0 − 2η̄, s0]     (the seed)
//! σ(α(s)) = α(s − 2η̄)     for s > s0
//! ```
//!
//! so that `z(s) = y(α(s))` sees its delayed value at the constant lag
//! `2η̄`: `y(σ(α(s))) = y(α(s − 2η̄)) = z(s − 2η̄)`.
//!
//! The seed `ω` is any increasing C¹ bijection of `[s0 − 2η̄, s0]` onto
//! `[t0 − η0, t0]`. Differentiating the recursion gives
//! `α'(s) = α'(s − 2η̄)/σ'(α(s))`; the map is C¹ across `s0` exactly when
//! the seed satisfies the compatibility condition
//! `ω'(s0 − 2η̄) = σ'(t0)·ω'(s0)`. [`TimeMapSeed::compatible`] builds the
//! canonical cubic seed satisfying it; incompatible seeds are accepted
//! and produce a map with derivative jumps at the window joints, whose
//! sizes [`TimeMap::boundary_rate_jumps`] reports.

use crate::grid;
use crate::monotone::{MonotoneError, MonotoneFn};
use crate::real::Real;
use crate::sdd::{InitialData, Params, SddError, SddSolution};
use crate::trajectory::{Trajectory, TrajectoryBuilder, TrajectoryError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TransformError {
    #[error("monotone invertibility requires 2*mu*rest_delay < 1, got {product}")]
    CertificateRequired { product: f64 },
    #[error("initial delay is zero: the seed window would collapse to a point")]
    DegenerateSeedWindow,
    #[error("anchor rate must be positive, got {rate}")]
    NonPositiveAnchorRate { rate: f64 },
    #[error("seed must be strictly increasing; minimal slope {min_slope}")]
    NonMonotoneSeed { min_slope: f64 },
    #[error("seed derivative jumps by {gap} at s = {s}; the seed must be C1 inside its window")]
    SeedNotC1 { s: f64, gap: f64 },
    #[error("seed does not fit the solution: {what} should be {expected}, got {got}")]
    SeedMismatch { what: &'static str, expected: f64, got: f64 },
    #[error("solution too short at s = {s}: the recursion needs deviating values up to {target}, available up to {reachable}")]
    SolutionTooShort { s: f64, target: f64, reachable: f64 },
    #[error("step must be positive, got {ds}")]
    NonPositiveStep { ds: f64 },
    #[error("step {ds} must divide the lag {lag} exactly")]
    StepMismatch { ds: f64, lag: f64 },
    #[error("horizon {s_end} does not extend past the seed endpoint {s0}")]
    BadHorizon { s_end: f64, s0: f64 },
    #[error("delay floor {h1} must lie in (0, rest_delay = {rest_delay}]")]
    InvalidDelayFloor { h1: f64, rest_delay: f64 },
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
    #[error(transparent)]
    Monotone(#[from] MonotoneError),
    #[error(transparent)]
    Sdd(#[from] SddError),
}

/// The seed reparametrization `ω`: an increasing C¹ map of the first
/// transformed window `[s0 − 2η̄, s0]` onto the first original window
/// `[t0 − η0, t0]`.
#[derive(Debug, Clone)]
pub struct TimeMapSeed<T: Real> {
    s0: T,
    trajectory: Trajectory<T>,
}

impl<T: Real> TimeMapSeed<T> {
    /// The canonical compatible seed: a single monotone cubic with end
    /// values `t0 − η0 → t0` and end rates `anchor_rate·σ'(t0)` and
    /// `anchor_rate`, so the resulting map is C¹ across `s0`.
    /// `anchor_rate` becomes the rate of the map at `s0`.
    pub fn compatible(
        params: &Params<T>,
        init: &InitialData<T>,
        s0: T,
        anchor_rate: T,
    ) -> Result<Self, TransformError> {
        if !(anchor_rate > T::zero()) {
            return Err(TransformError::NonPositiveAnchorRate { rate: anchor_rate.as_f64() });
        }
        let eta0 = init.initial_delay();
        if !(eta0 > T::zero()) {
            return Err(TransformError::DegenerateSeedWindow);
        }
        let t0 = init.t0();
        let lag = params.lag();
        let g0 = init.history().eval(t0)?;
        // Rate of the deviating argument at the start, written exactly as
        // the solver stores it so the compatibility defect is zero in
        // floating point as well.
        let relaxation_factor = T::one() - params.delay_rate(eta0, &g0);
        if !(relaxation_factor > T::zero()) {
            return Err(TransformError::NonMonotoneSeed {
                min_slope: (anchor_rate * relaxation_factor).as_f64(),
            });
        }
        let trajectory = Trajectory::from_nodes(
            &[s0 - lag, s0],
            &[vec![t0 - eta0], vec![t0]],
            &[vec![anchor_rate * relaxation_factor], vec![anchor_rate]],
        )?;
        Self::from_parts(s0, trajectory)
    }

    /// Wraps a caller-supplied seed. The trajectory must be scalar,
    /// strictly increasing and C¹ inside its window; compatibility at
    /// the endpoints is *not* required and is only diagnosed later.
    pub fn from_parts(s0: T, trajectory: Trajectory<T>) -> Result<Self, TransformError> {
        for pair in trajectory.segments().windows(2) {
            let gap = (pair[0].dy_hi[0] - pair[1].dy_lo[0]).abs();
            if gap > T::of(1e-9) * (T::one() + pair[0].dy_hi[0].abs()) {
                return Err(TransformError::SeedNotC1 { s: pair[1].t_lo.as_f64(), gap: gap.as_f64() });
            }
        }
        let probe = MonotoneFn::from_measured_floor(trajectory).map_err(|e| match e {
            MonotoneError::NonPositiveFloor { floor } => TransformError::NonMonotoneSeed { min_slope: floor },
            MonotoneError::SlopeBelowFloor { slope, .. } => TransformError::NonMonotoneSeed { min_slope: slope },
            other => TransformError::Monotone(other),
        })?;
        let trajectory = probe.trajectory().clone();
        let tol = T::of(1e-9) * (T::one() + s0.abs());
        if (trajectory.t_max() - s0).abs() > tol {
            return Err(TransformError::SeedMismatch {
                what: "seed window endpoint",
                expected: s0.as_f64(),
                got: trajectory.t_max().as_f64(),
            });
        }
        Ok(Self { s0, trajectory })
    }

    pub fn s0(&self) -> T {
        self.s0
    }

    /// Width of the seed window.
    pub fn lag(&self) -> T {
        self.trajectory.t_max() - self.trajectory.t_min()
    }

    pub fn trajectory(&self) -> &Trajectory<T> {
        &self.trajectory
    }

    /// Value at the left end of the window (maps to `t0 − η0`).
    pub fn start_value(&self) -> T {
        self.trajectory.segments()[0].y_lo[0]
    }

    /// Value at `s0` (maps to `t0`).
    pub fn end_value(&self) -> T {
        self.trajectory.segments().last().expect("nonempty").y_hi[0]
    }

    /// Right-sided rate at the left end of the window.
    pub fn start_rate(&self) -> T {
        self.trajectory.segments()[0].dy_lo[0]
    }

    /// Left-sided rate at `s0`.
    pub fn end_rate(&self) -> T {
        self.trajectory.segments().last().expect("nonempty").dy_hi[0]
    }
}

/// The monotone time map `α` on `[s0 − 2η̄, s_end]`, with its seed part
/// included, plus diagnostics of the construction.
#[derive(Debug, Clone)]
pub struct TimeMap<T: Real> {
    map: MonotoneFn<T>,
    s0: T,
    t0: T,
    lag: T,
    compatibility_residual: T,
}

impl<T: Real> TimeMap<T> {
    pub(crate) fn from_parts(map: MonotoneFn<T>, s0: T, t0: T, lag: T, compatibility_residual: T) -> Self {
        Self { map, s0, t0, lag, compatibility_residual }
    }

    /// Start of the recursion in the transformed scale.
    pub fn s0(&self) -> T {
        self.s0
    }

    /// Image of `s0`: the original initial time.
    pub fn t0(&self) -> T {
        self.t0
    }

    /// The constant lag `2η̄`.
    pub fn lag(&self) -> T {
        self.lag
    }

    pub fn s_min(&self) -> T {
        self.map.t_min()
    }

    pub fn s_end(&self) -> T {
        self.map.t_max()
    }

    /// `|ω'(s0 − 2η̄) − σ'(t0)·ω'(s0)|`; zero for a compatible seed.
    pub fn compatibility_residual(&self) -> T {
        self.compatibility_residual
    }

    /// The underlying certified monotone function.
    pub fn as_monotone(&self) -> &MonotoneFn<T> {
        &self.map
    }

    /// `α(s)`: original time for transformed time `s`.
    pub fn to_original(&self, s: T) -> Result<T, TransformError> {
        Ok(self.map.eval(s)?)
    }

    /// `α'(s)`.
    pub fn rate(&self, s: T) -> Result<T, TransformError> {
        Ok(self.map.eval_derivative(s)?)
    }

    /// `α⁻¹(t)`: transformed time for original time `t`.
    pub fn to_transformed(&self, t: T) -> Result<T, TransformError> {
        Ok(self.map.invert_in_domain(t)?)
    }

    /// One-sided rate jumps of the map at the window joints
    /// `s0 + k·2η̄`, as `(s, |jump|)` pairs. For a compatible seed these
    /// are zero; for an incompatible one they measure how the initial
    /// defect propagates.
    pub fn boundary_rate_jumps(&self) -> Vec<(T, T)> {
        let segs = self.map.trajectory().segments();
        let tol = T::of(1e-9) * (T::one() + self.lag);
        let mut jumps = Vec::new();
        for pair in segs.windows(2) {
            let s = pair[1].t_lo;
            let windows_in = (s - self.s0) / self.lag;
            let k = windows_in.round();
            if k >= -T::of(0.5) && (s - (self.s0 + k * self.lag)).abs() <= tol {
                jumps.push((s, (pair[0].dy_hi[0] - pair[1].dy_lo[0]).abs()));
            }
        }
        jumps
    }

    /// Margins of the two analytic growth envelopes, evaluated at the
    /// node mesh of the map for `s ≥ s0` (nonnegative margins mean the
    /// envelopes hold):
    ///
    /// * upper: `α(s) ≤ α(s0) + 2η̄ + (s − s0)` always;
    /// * lower (needs a certified delay floor `h1`):
    ///   `α(s) ≥ α(s0) − h1 + (h1/2η̄)·(s − s0)`.
    pub fn growth_margins(&self, delay_floor: Option<T>) -> Result<GrowthMargins<T>, TransformError> {
        if let Some(h1) = delay_floor {
            let rest = self.lag.half();
            if !(h1 > T::zero()) || h1 > rest {
                return Err(TransformError::InvalidDelayFloor { h1: h1.as_f64(), rest_delay: rest.as_f64() });
            }
        }
        let alpha0 = self.map.eval(self.s0)?;
        let mut upper = T::infinity();
        let mut lower = delay_floor.map(|_| T::infinity());
        for s in self.map.trajectory().node_times() {
            if s < self.s0 {
                continue;
            }
            let a = self.map.eval(s)?;
            upper = upper.min(alpha0 + self.lag + (s - self.s0) - a);
            if let (Some(h1), Some(acc)) = (delay_floor, lower) {
                let floor_line = alpha0 - h1 + h1 / self.lag * (s - self.s0);
                lower = Some(acc.min(a - floor_line));
            }
        }
        Ok(GrowthMargins { upper, lower })
    }

    /// Two-sided linear comparison of the time scales on `s ≥ s0`,
    /// in the variables `t = α(s)` against `ŝ = s − s0`.
    ///
    /// The growth envelopes give the analytic wedge
    ///
    /// ```text
    /// 1·t − (α(s0) + 2η̄)  ≤  ŝ  ≤  (2η̄/h1)·t − (2η̄/h1)·(α(s0) − h1)
    /// ```
    ///
    /// This fits the tightest parallel band `A·t + B₁ ≤ ŝ ≤ A·t + B₂`
    /// through the node data (least-squares slope, extreme intercepts)
    /// and reports the wedge margins both per data point and for the
    /// fitted band at the extreme `t` values.
    pub fn time_equivalence(&self, delay_floor: T) -> Result<TimeEquivalence<T>, TransformError> {
        let rest = self.lag.half();
        if !(delay_floor > T::zero()) || delay_floor > rest {
            return Err(TransformError::InvalidDelayFloor {
                h1: delay_floor.as_f64(),
                rest_delay: rest.as_f64(),
            });
        }
        let alpha0 = self.map.eval(self.s0)?;
        let mut ts = Vec::new();
        let mut shifted = Vec::new();
        for s in self.map.trajectory().node_times() {
            if s < self.s0 {
                continue;
            }
            ts.push(self.map.eval(s)?);
            shifted.push(s - self.s0);
        }
        let n = T::from_usize(ts.len()).expect("node count");
        let t_mean = ts.iter().fold(T::zero(), |a, &b| a + b) / n;
        let s_mean = shifted.iter().fold(T::zero(), |a, &b| a + b) / n;
        let mut cov = T::zero();
        let mut var = T::zero();
        for (&t, &sh) in ts.iter().zip(&shifted) {
            cov = cov + (t - t_mean) * (sh - s_mean);
            var = var + (t - t_mean) * (t - t_mean);
        }
        let slope = cov / var;
        let mut b_lo = T::infinity();
        let mut b_hi = T::neg_infinity();
        for (&t, &sh) in ts.iter().zip(&shifted) {
            let b = sh - slope * t;
            b_lo = b_lo.min(b);
            b_hi = b_hi.max(b);
        }

        let lower = (T::one(), -(alpha0 + self.lag));
        let ratio = self.lag / delay_floor;
        let upper = (ratio, -ratio * (alpha0 - delay_floor));

        let mut data_lower_margin = T::infinity();
        let mut data_upper_margin = T::infinity();
        for (&t, &sh) in ts.iter().zip(&shifted) {
            data_lower_margin = data_lower_margin.min(sh - (lower.0 * t + lower.1));
            data_upper_margin = data_upper_margin.min(upper.0 * t + upper.1 - sh);
        }
        let t_first = *ts.first().expect("nonempty mesh");
        let t_last = *ts.last().expect("nonempty mesh");
        let mut band_lower_margin = T::infinity();
        let mut band_upper_margin = T::infinity();
        for t in [t_first, t_last] {
            band_lower_margin = band_lower_margin.min(slope * t + b_lo - (lower.0 * t + lower.1));
            band_upper_margin = band_upper_margin.min(upper.0 * t + upper.1 - (slope * t + b_hi));
        }

        Ok(TimeEquivalence {
            fitted_slope: slope,
            fitted_intercept_lo: b_lo,
            fitted_intercept_hi: b_hi,
            analytic_lower: lower,
            analytic_upper: upper,
            data_lower_margin,
            data_upper_margin,
            band_lower_margin,
            band_upper_margin,
        })
    }
}

/// Minimal margins of the growth envelopes; see
/// [`TimeMap::growth_margins`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthMargins<T> {
    pub upper: T,
    pub lower: Option<T>,
}

/// Outcome of [`TimeMap::time_equivalence`]: the fitted parallel band,
/// the analytic wedge `(slope, intercept)` lines, and containment
/// margins (nonnegative = satisfied).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeEquivalence<T> {
    pub fitted_slope: T,
    pub fitted_intercept_lo: T,
    pub fitted_intercept_hi: T,
    pub analytic_lower: (T, T),
    pub analytic_upper: (T, T),
    pub data_lower_margin: T,
    pub data_upper_margin: T,
    pub band_lower_margin: T,
    pub band_upper_margin: T,
}

/// Builds the time map over `[s0, s_end]` (plus the seed window) by the
/// window recursion `α(s) = σ⁻¹(α(s − 2η̄))` on a mesh of spacing `ds`.
///
/// `ds` must divide the lag exactly, so every mesh point's source
/// `s − 2η̄` is again a mesh point and the recursion never interpolates
/// its own output. The horizon rounds up to a whole number of steps.
/// Node values are obtained by certified inversion of the deviating
/// argument; node rates by `α'(s) = α'(s − 2η̄)/σ'(α(s))`, carried
/// one-sidedly across window joints so incompatible seeds stay
/// representable.
/// Shared admissibility check: the seed window must have the model's
/// width and map onto `[t0 − η0, t0]`.
pub(crate) fn validate_seed_against<T: Real>(
    seed: &TimeMapSeed<T>,
    lag: T,
    t0: T,
    eta0: T,
) -> Result<(), TransformError> {
    let tol = T::of(1e-9) * (T::one() + lag + t0.abs());
    if (seed.lag() - lag).abs() > tol {
        return Err(TransformError::SeedMismatch {
            what: "seed window width",
            expected: lag.as_f64(),
            got: seed.lag().as_f64(),
        });
    }
    if (seed.end_value() - t0).abs() > tol {
        return Err(TransformError::SeedMismatch {
            what: "seed value at s0",
            expected: t0.as_f64(),
            got: seed.end_value().as_f64(),
        });
    }
    if (seed.start_value() - (t0 - eta0)).abs() > tol {
        return Err(TransformError::SeedMismatch {
            what: "seed value at s0 - lag",
            expected: (t0 - eta0).as_f64(),
            got: seed.start_value().as_f64(),
        });
    }
    Ok(())
}

pub fn build_time_map<T: Real>(
    sol: &SddSolution<T>,
    seed: &TimeMapSeed<T>,
    s_end: T,
    ds: T,
) -> Result<TimeMap<T>, TransformError> {
    let params = sol.params();
    let dev = sol.deviating_map().ok_or_else(|| TransformError::CertificateRequired {
        product: (T::of(2.0) * params.relaxation_rate() * params.rest_delay()).as_f64(),
    })?;
    let lag = params.lag();
    let t0 = sol.t0();
    let eta0 = sol.initial().initial_delay();
    let s0 = seed.s0();

    validate_seed_against(seed, lag, t0, eta0)?;
    if !(ds > T::zero()) {
        return Err(TransformError::NonPositiveStep { ds: ds.as_f64() });
    }
    if !grid::divides(lag, ds) {
        return Err(TransformError::StepMismatch { ds: ds.as_f64(), lag: lag.as_f64() });
    }
    if !(s_end > s0) {
        return Err(TransformError::BadHorizon { s_end: s_end.as_f64(), s0: s0.as_f64() });
    }
    let r = grid::steps_covering(lag, ds).expect("positive lag and step");
    let n = grid::steps_covering(s_end - s0, ds).expect("positive span and step");

    let sigma_hi = dev.eval(dev.t_max())?;
    let snap = T::of(1e-9) * (T::one() + sigma_hi.abs());

    // Seed window samples; index 0 carries the right-sided rate at the
    // left joint, index r the left-sided rate at s0.
    let mesh0 = grid::uniform(s0 - lag, s0, r);
    let mut prev_v: Vec<T> = Vec::with_capacity(r + 1);
    let mut prev_d: Vec<T> = Vec::with_capacity(r + 1);
    for &s in &mesh0 {
        prev_v.push(seed.trajectory().eval_scalar(s)?);
        prev_d.push(seed.trajectory().eval_derivative_scalar(s)?);
    }

    let relaxation_factor = dev.eval_derivative(t0)?;
    let compatibility_residual = (prev_d[0] - relaxation_factor * prev_d[r]).abs();

    let mut builder = TrajectoryBuilder::from_history(seed.trajectory());
    let mut produced = 0usize;
    let mut window_left = s0;
    while produced < n {
        let take = r.min(n - produced);
        let mut new_v = vec![T::zero(); take + 1];
        let mut new_d = vec![T::zero(); take + 1];
        // The joint value is shared with the previous window; only the
        // rate restarts (right-sided recursion).
        new_v[0] = prev_v[r];
        new_d[0] = prev_d[0] / dev.eval_derivative(new_v[0])?;
        builder.start(window_left, &[new_v[0]], &[new_d[0]])?;
        for j in 1..=take {
            let s = window_left + T::from_usize(j).expect("mesh index") * ds;
            let mut target = prev_v[j];
            if target > sigma_hi {
                if target - sigma_hi <= snap {
                    target = sigma_hi;
                } else {
                    return Err(TransformError::SolutionTooShort {
                        s: s.as_f64(),
                        target: target.as_f64(),
                        reachable: sigma_hi.as_f64(),
                    });
                }
            }
            let v = dev.invert_in_domain(target)?;
            new_v[j] = v;
            new_d[j] = prev_d[j] / dev.eval_derivative(v)?;
            builder.push(s, &[v], &[new_d[j]])?;
        }
        produced += take;
        window_left = window_left + T::from_usize(take).expect("window width") * ds;
        prev_v = new_v;
        prev_d = new_d;
    }

    let map = MonotoneFn::from_measured_floor(builder.finish())?;
    Ok(TimeMap { map, s0, t0, lag, compatibility_residual })
}
