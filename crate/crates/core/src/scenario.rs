//! Declarative scenario descriptions.
//!
//! A [`Scenario`] is a complete, serializable recipe for one model run:
//! right-hand side, delay coupling, delay dynamics constants, initial
//! history, horizons and step sizes. Right-hand sides and couplings come
//! from a closed menu instead of a runtime expression language, and each
//! menu entry declares its exact Lipschitz and sup bounds, so the
//! delay-band budget `sup|G| ≤ μ·η̄` and the monotonicity certificate
//! `2μη̄ < 1` are decidable from the declaration alone — no sampling.
//!
//! [`builtin_catalog`] ships twenty ready-made scenarios covering the
//! admissible parameter space: both band edges for the initial delay,
//! coupling budget used to equality, certificate margins from comfortable
//! to razor-thin, every history profile, and the decaying scenarios used
//! by the stability checks.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid;
use crate::sdd::{CouplingFn, InitialData, ModelBounds, Params, RhsFn, SddError};
use crate::trajectory::{Trajectory, TrajectoryError};
use crate::transform::{TimeMapSeed, TransformError};

/// Rejection of an ill-formed scenario declaration.
#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("scenario name {0:?} is empty or contains characters unsafe for file names")]
    BadName(String),
    #[error("scenario dimension {dim} does not match the {what} dimension {got}")]
    DimensionMismatch { dim: usize, what: &'static str, got: usize },
    #[error("linear right-hand side needs square {dim}x{dim} matrices, got {rows}x{cols}")]
    BadMatrix { dim: usize, rows: usize, cols: usize },
    #[error("initial delay {initial_delay} lies outside the admissible band [0, {band_hi}]")]
    InitialDelayOutsideBand { initial_delay: f64, band_hi: f64 },
    #[error("{name} = {value} must be positive")]
    NonPositive { name: &'static str, value: f64 },
    #[error("step {name} = {step} does not divide the lag {lag}")]
    StepDoesNotDivideLag { name: &'static str, step: f64, lag: f64 },
    #[error("horizon {name} = {end} does not extend past its start {start}")]
    EmptyHorizon { name: &'static str, end: f64, start: f64 },
    #[error("history table must span [{lo}, {hi}], got [{got_lo}, {got_hi}]")]
    TableDomain { lo: f64, hi: f64, got_lo: f64, got_hi: f64 },
    #[error(transparent)]
    Sdd(#[from] SddError),
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
    #[error(transparent)]
    Transform(#[from] TransformError),
}

/// Right-hand-side menu for the state equation `y' = f(y, y_lag)`.
///
/// Every entry is autonomous; [`RhsSpec::lipschitz`] returns an exact
/// Lipschitz constant with respect to the max norm, valid separately in
/// each of the two state arguments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum RhsSpec {
    /// `f ≡ 0`.
    Zero,
    /// `f = A·y + B·y_lag` with square matrices in row-major layout.
    Linear { a: Vec<Vec<f64>>, b: Vec<Vec<f64>> },
    /// Componentwise `f_i = −a·y_i − b·(y_lag)_i`.
    ScalarNegativeFeedback { a: f64, b: f64 },
    /// Componentwise `f_i = −a·y_i + b·tanh(w·(y_lag)_i)`.
    TanhFeedback { a: f64, b: f64, w: f64 },
}

impl RhsSpec {
    /// Exact max-norm Lipschitz constant in either state argument.
    pub fn lipschitz(&self) -> f64 {
        match self {
            RhsSpec::Zero => 0.0,
            RhsSpec::Linear { a, b } => row_sum_norm(a).max(row_sum_norm(b)),
            RhsSpec::ScalarNegativeFeedback { a, b } => a.abs().max(b.abs()),
            RhsSpec::TanhFeedback { a, b, w } => a.abs().max((b * w).abs()),
        }
    }

    fn build(&self) -> RhsFn<f64> {
        match self {
            RhsSpec::Zero => Arc::new(|_t, _y, _yd, out: &mut [f64]| out.fill(0.0)),
            RhsSpec::Linear { a, b } => {
                let (a, b) = (a.clone(), b.clone());
                Arc::new(move |_t, y: &[f64], yd: &[f64], out: &mut [f64]| {
                    for (i, slot) in out.iter_mut().enumerate() {
                        let mut acc = 0.0;
                        for j in 0..y.len() {
                            acc += a[i][j] * y[j] + b[i][j] * yd[j];
                        }
                        *slot = acc;
                    }
                })
            }
            RhsSpec::ScalarNegativeFeedback { a, b } => {
                let (a, b) = (*a, *b);
                Arc::new(move |_t, y: &[f64], yd: &[f64], out: &mut [f64]| {
                    for (i, slot) in out.iter_mut().enumerate() {
                        *slot = -a * y[i] - b * yd[i];
                    }
                })
            }
            RhsSpec::TanhFeedback { a, b, w } => {
                let (a, b, w) = (*a, *b, *w);
                Arc::new(move |_t, y: &[f64], yd: &[f64], out: &mut [f64]| {
                    for (i, slot) in out.iter_mut().enumerate() {
                        *slot = -a * y[i] + b * (w * yd[i]).tanh();
                    }
                })
            }
        }
    }
}

fn row_sum_norm(m: &[Vec<f64>]) -> f64 {
    m.iter().map(|row| row.iter().map(|x| x.abs()).sum()).fold(0.0f64, f64::max)
}

/// Delay-coupling menu `G(y)`, read from the first state component.
///
/// Each entry carries its exact sup (`kappa`) and Lipschitz (`kappa·w`)
/// bounds, so the band budget `sup|G| ≤ μ·η̄` is checked exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum CouplingSpec {
    /// `G ≡ 0`.
    Zero,
    /// `G = κ·tanh(w·y₁)`.
    ScaledTanh { kappa: f64, w: f64 },
    /// `G = κ·sin(w·y₁)`.
    ScaledSin { kappa: f64, w: f64 },
}

impl CouplingSpec {
    /// Exact bound on `|G|`.
    pub fn sup(&self) -> f64 {
        match self {
            CouplingSpec::Zero => 0.0,
            CouplingSpec::ScaledTanh { kappa, .. } | CouplingSpec::ScaledSin { kappa, .. } => kappa.abs(),
        }
    }

    /// Exact Lipschitz constant of `G`.
    pub fn lipschitz(&self) -> f64 {
        match self {
            CouplingSpec::Zero => 0.0,
            CouplingSpec::ScaledTanh { kappa, w } | CouplingSpec::ScaledSin { kappa, w } => (kappa * w).abs(),
        }
    }

    fn build(&self) -> CouplingFn<f64> {
        match self {
            CouplingSpec::Zero => Arc::new(|_y: &[f64]| 0.0),
            CouplingSpec::ScaledTanh { kappa, w } => {
                let (kappa, w) = (*kappa, *w);
                Arc::new(move |y: &[f64]| kappa * (w * y[0]).tanh())
            }
            CouplingSpec::ScaledSin { kappa, w } => {
                let (kappa, w) = (*kappa, *w);
                Arc::new(move |y: &[f64]| kappa * (w * y[0]).sin())
            }
        }
    }
}

/// Initial history profile on `[t0 − 2η̄, t0]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum HistorySpec {
    /// Frozen at `value`.
    Constant { value: Vec<f64> },
    /// `offset_i + amplitude_i·cos(frequency·(t − t0))` per component;
    /// flat (zero rate) at the initial time.
    Cosine { offset: Vec<f64>, amplitude: Vec<f64>, frequency: f64 },
    /// `value_i·exp(rate·(t − t0))` per component; equals `value` at the
    /// initial time.
    Exponential { value: Vec<f64>, rate: f64 },
    /// Sampled nodes with derivatives, interpolated by the usual
    /// piecewise cubic. Node times must span exactly `[t0 − 2η̄, t0]`.
    Table { times: Vec<f64>, values: Vec<Vec<f64>>, derivatives: Vec<Vec<f64>> },
}

impl HistorySpec {
    /// Component count declared by the profile.
    pub fn dim(&self) -> usize {
        match self {
            HistorySpec::Constant { value } => value.len(),
            HistorySpec::Cosine { offset, .. } => offset.len(),
            HistorySpec::Exponential { value, .. } => value.len(),
            HistorySpec::Table { values, .. } => values.first().map_or(0, Vec::len),
        }
    }

    fn build(&self, t_lo: f64, t_hi: f64, segments: usize) -> Result<Trajectory<f64>, ScenarioError> {
        let traj = match self {
            HistorySpec::Constant { value } => Trajectory::constant(value, t_lo, t_hi)?,
            HistorySpec::Cosine { offset, amplitude, frequency } => {
                let freq = *frequency;
                Trajectory::from_fn(t_lo, t_hi, segments, |t| {
                    let phase = freq * (t - t_hi);
                    let value = offset
                        .iter()
                        .zip(amplitude)
                        .map(|(&o, &a)| o + a * phase.cos())
                        .collect();
                    let rate = amplitude.iter().map(|&a| -a * freq * phase.sin()).collect();
                    (value, rate)
                })?
            }
            HistorySpec::Exponential { value, rate } => {
                let rate = *rate;
                Trajectory::from_fn(t_lo, t_hi, segments, |t| {
                    let factor = (rate * (t - t_hi)).exp();
                    let v: Vec<f64> = value.iter().map(|&c| c * factor).collect();
                    let d = v.iter().map(|&x| rate * x).collect();
                    (v, d)
                })?
            }
            HistorySpec::Table { times, values, derivatives } => {
                let traj = Trajectory::from_nodes(times, values, derivatives)?;
                let tol = 1e-9 * (1.0 + t_hi.abs().max(t_lo.abs()));
                if (traj.t_min() - t_lo).abs() > tol || (traj.t_max() - t_hi).abs() > tol {
                    return Err(ScenarioError::TableDomain {
                        lo: t_lo,
                        hi: t_hi,
                        got_lo: traj.t_min(),
                        got_hi: traj.t_max(),
                    });
                }
                traj
            }
        };
        Ok(traj)
    }
}

/// Verification blocks the `verify` pipeline should run for a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RequestedCheck {
    /// Round-trip equivalence between the direct and transformed solves.
    Equivalence,
    /// Rate bounds, chain rule, growth envelope and moduli of the map.
    Regularity,
    /// Decay-rate fits and their transfer across the map.
    Stability,
    /// Mid-course restart must reproduce the direct run.
    Restart,
    /// Residual distance of the datum from the smooth-start manifold.
    Manifold,
}

fn default_history_segments() -> usize {
    256
}

fn default_anchor_rate() -> f64 {
    0.5
}

fn default_checks() -> Vec<RequestedCheck> {
    vec![RequestedCheck::Equivalence]
}

/// A complete declarative description of one run.
///
/// Unknown keys in a config document are hard errors: a typo that was
/// silently dropped would invalidate an experiment without a trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    /// Identifier, also used as the stem of output file names.
    pub name: String,
    /// Relaxation rate `μ` of the delay toward its rest value.
    pub relaxation_rate: f64,
    /// Rest delay `η̄`; the admissible delay band is `[0, 2η̄]` and the
    /// history lag is `2η̄`.
    pub rest_delay: f64,
    /// Delay at the initial time, inside `[0, 2η̄]`.
    pub initial_delay: f64,
    /// Initial time of the original system.
    #[serde(default)]
    pub t0: f64,
    /// Initial time of the transformed system.
    #[serde(default)]
    pub s0: f64,
    /// State dimension.
    pub dim: usize,
    /// Direct-solve end time.
    pub t_end: f64,
    /// Transformed-solve end time.
    pub s_end: f64,
    /// Direct-solve step; must divide the lag `2η̄`.
    pub dt: f64,
    /// Transformed-solve step; must divide the lag and be at most `η̄/4`.
    pub ds: f64,
    /// Mesh pieces used when sampling an analytic history profile.
    #[serde(default = "default_history_segments")]
    pub history_segments: usize,
    /// Map rate at `s0` for the canonical compatible seed window.
    #[serde(default = "default_anchor_rate")]
    pub seed_anchor_rate: f64,
    pub rhs: RhsSpec,
    pub coupling: CouplingSpec,
    pub history: HistorySpec,
    /// Verification blocks to run; defaults to round-trip equivalence
    /// alone. An explicit empty list declares a solve-only scenario
    /// (e.g. a zero initial delay admits no seed window).
    #[serde(default = "default_checks")]
    pub checks: Vec<RequestedCheck>,
}

impl Scenario {
    /// History span and admissible delay maximum, `2η̄`.
    pub fn lag(&self) -> f64 {
        2.0 * self.rest_delay
    }

    /// Checks every declared invariant that does not require running a
    /// solver: name hygiene, dimensions, the delay band, step
    /// divisibility and horizon ordering. The coupling budget is
    /// enforced by [`Scenario::params`].
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let ok_name = !self.name.is_empty()
            && self.name.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'));
        if !ok_name {
            return Err(ScenarioError::BadName(self.name.clone()));
        }
        if self.dim == 0 {
            return Err(ScenarioError::NonPositive { name: "dim", value: 0.0 });
        }
        for (name, value) in [
            ("relaxation_rate", self.relaxation_rate),
            ("rest_delay", self.rest_delay),
            ("dt", self.dt),
            ("ds", self.ds),
            ("seed_anchor_rate", self.seed_anchor_rate),
        ] {
            if !(value > 0.0) {
                return Err(ScenarioError::NonPositive { name, value });
            }
        }
        if self.history_segments == 0 {
            return Err(ScenarioError::NonPositive { name: "history_segments", value: 0.0 });
        }
        if !(self.initial_delay >= 0.0) || self.initial_delay > self.lag() {
            return Err(ScenarioError::InitialDelayOutsideBand {
                initial_delay: self.initial_delay,
                band_hi: self.lag(),
            });
        }
        if let RhsSpec::Linear { a, b } = &self.rhs {
            for m in [a, b] {
                let rows = m.len();
                let cols = m.first().map_or(0, Vec::len);
                if rows != self.dim || m.iter().any(|row| row.len() != self.dim) {
                    return Err(ScenarioError::BadMatrix { dim: self.dim, rows, cols });
                }
            }
        }
        if self.history.dim() != self.dim {
            return Err(ScenarioError::DimensionMismatch {
                dim: self.dim,
                what: "history",
                got: self.history.dim(),
            });
        }
        if let HistorySpec::Cosine { offset, amplitude, .. } = &self.history {
            if amplitude.len() != offset.len() {
                return Err(ScenarioError::DimensionMismatch {
                    dim: offset.len(),
                    what: "cosine amplitude",
                    got: amplitude.len(),
                });
            }
        }
        for (name, step) in [("dt", self.dt), ("ds", self.ds)] {
            if !grid::divides(self.lag(), step) {
                return Err(ScenarioError::StepDoesNotDivideLag { name, step, lag: self.lag() });
            }
        }
        if !(self.t_end > self.t0) {
            return Err(ScenarioError::EmptyHorizon { name: "t_end", end: self.t_end, start: self.t0 });
        }
        if !(self.s_end > self.s0) {
            return Err(ScenarioError::EmptyHorizon { name: "s_end", end: self.s_end, start: self.s0 });
        }
        Ok(())
    }

    /// Compiles the model part: callables plus the exact declared bounds.
    pub fn params(&self) -> Result<Params<f64>, ScenarioError> {
        self.validate()?;
        let bounds = ModelBounds {
            rhs_lipschitz: self.rhs.lipschitz(),
            coupling_lipschitz: self.coupling.lipschitz(),
            coupling_sup: self.coupling.sup(),
        };
        let params = Params::new(
            self.relaxation_rate,
            self.rest_delay,
            self.dim,
            self.rhs.build(),
            self.coupling.build(),
            bounds,
        )?
        .assume_time_invariant();
        Ok(params)
    }

    /// Compiles the initial datum: sampled history plus initial delay.
    pub fn initial_data(&self, params: &Params<f64>) -> Result<InitialData<f64>, ScenarioError> {
        let history = self.history.build(self.t0 - self.lag(), self.t0, self.history_segments)?;
        Ok(InitialData::new(history, self.initial_delay, self.t0, params)?)
    }

    /// The canonical compatible seed window at the declared anchor rate.
    pub fn seed(&self, params: &Params<f64>, init: &InitialData<f64>) -> Result<TimeMapSeed<f64>, ScenarioError> {
        Ok(TimeMapSeed::compatible(params, init, self.s0, self.seed_anchor_rate)?)
    }

    /// Requested verification blocks in declaration order.
    pub fn requested_checks(&self) -> &[RequestedCheck] {
        &self.checks
    }
}

/// The built-in scenario with the given name, if any.
pub fn builtin(name: &str) -> Option<Scenario> {
    builtin_catalog().into_iter().find(|s| s.name == name)
}

/// Twenty ready-made scenarios spanning the admissible parameter space.
///
/// The first entry, `reference-oscillator`, is the default model used
/// throughout the verification suite: delayed negative feedback with a
/// saturating delay coupling, comfortably inside every certificate.
pub fn builtin_catalog() -> Vec<Scenario> {
    fn base(name: &str) -> Scenario {
        Scenario {
            name: name.to_owned(),
            relaxation_rate: 0.4,
            rest_delay: 1.0,
            initial_delay: 1.0,
            t0: 0.0,
            s0: 0.0,
            dim: 1,
            t_end: 8.0,
            s_end: 6.0,
            dt: 1e-2,
            ds: 1e-2,
            history_segments: default_history_segments(),
            seed_anchor_rate: default_anchor_rate(),
            rhs: RhsSpec::Zero,
            coupling: CouplingSpec::Zero,
            history: HistorySpec::Constant { value: vec![1.0] },
            checks: default_checks(),
        }
    }
    // Quadratic profile sampled with exact derivatives; the cubic
    // interpolant reproduces it identically.
    fn quadratic_table(t_lo: f64, t_hi: f64, nodes: usize) -> HistorySpec {
        let mut times = Vec::with_capacity(nodes);
        let mut values = Vec::with_capacity(nodes);
        let mut derivatives = Vec::with_capacity(nodes);
        for i in 0..nodes {
            let frac = i as f64 / (nodes - 1) as f64;
            let t = if i + 1 == nodes { t_hi } else { t_lo + (t_hi - t_lo) * frac };
            times.push(t);
            values.push(vec![0.5 + 0.25 * t * t]);
            derivatives.push(vec![0.5 * t]);
        }
        HistorySpec::Table { times, values, derivatives }
    }

    let mut catalog = Vec::new();

    let mut s = base("reference-oscillator");
    s.rhs = RhsSpec::ScalarNegativeFeedback { a: 0.0, b: 1.0 };
    s.coupling = CouplingSpec::ScaledTanh { kappa: 0.2, w: 1.0 };
    s.t_end = 12.0;
    s.s_end = 10.0;
    s.checks = vec![RequestedCheck::Equivalence, RequestedCheck::Regularity, RequestedCheck::Restart];
    catalog.push(s);

    let mut s = base("constant-delay");
    s.t_end = 12.0;
    s.s_end = 20.0;
    s.checks = vec![RequestedCheck::Equivalence, RequestedCheck::Regularity, RequestedCheck::Restart];
    catalog.push(s);

    // Pure delay relaxation from an empty initial delay: the deviating
    // argument starts exactly at the initial time. Zero initial delay
    // admits no seed window, so these two are solve-only.
    let mut s = base("relaxing-delay");
    s.initial_delay = 0.0;
    s.checks = Vec::new();
    catalog.push(s);

    let mut s = base("band-floor");
    s.rhs = RhsSpec::ScalarNegativeFeedback { a: 1.0, b: 0.5 };
    s.coupling = CouplingSpec::ScaledTanh { kappa: 0.15, w: 1.0 };
    s.initial_delay = 0.0;
    s.checks = Vec::new();
    catalog.push(s);

    let mut s = base("band-ceiling");
    s.rhs = RhsSpec::ScalarNegativeFeedback { a: 1.0, b: 0.5 };
    s.coupling = CouplingSpec::ScaledTanh { kappa: 0.15, w: 1.0 };
    s.initial_delay = 2.0;
    s.history = HistorySpec::Cosine { offset: vec![1.0], amplitude: vec![0.25], frequency: 1.0 };
    catalog.push(s);

    let mut s = base("budget-equality");
    s.rhs = RhsSpec::ScalarNegativeFeedback { a: 0.5, b: 0.2 };
    s.coupling = CouplingSpec::ScaledTanh { kappa: 0.4, w: 1.0 };
    s.initial_delay = 1.5;
    s.history = HistorySpec::Constant { value: vec![0.5] };
    catalog.push(s);

    // `sup|G| = 0.2 ≤ μ(η̄ − 0.5)` certifies the delay floor 0.5, and the
    // initial delay sits above it.
    let mut s = base("delay-floor-certified");
    s.rhs = RhsSpec::ScalarNegativeFeedback { a: 0.0, b: 1.0 };
    s.coupling = CouplingSpec::ScaledTanh { kappa: 0.2, w: 1.0 };
    s.initial_delay = 0.8;
    s.checks = vec![RequestedCheck::Equivalence, RequestedCheck::Restart];
    catalog.push(s);

    let mut s = base("planar-rotation");
    s.dim = 2;
    s.rhs = RhsSpec::Linear {
        a: vec![vec![0.0, 1.0], vec![-1.0, 0.0]],
        b: vec![vec![0.1, 0.0], vec![0.0, 0.1]],
    };
    s.coupling = CouplingSpec::ScaledSin { kappa: 0.1, w: 1.0 };
    s.relaxation_rate = 0.3;
    s.rest_delay = 0.5;
    s.initial_delay = 0.5;
    s.history = HistorySpec::Cosine { offset: vec![1.0, 0.0], amplitude: vec![0.2, 0.2], frequency: 1.0 };
    s.t_end = 6.0;
    s.s_end = 5.0;
    s.dt = 5e-3;
    s.ds = 5e-3;
    catalog.push(s);

    // Plain exponential decay with a frozen delay: the map is exactly
    // `t0 + (s − s0)/2`, which pins the stability-transfer arithmetic.
    let mut s = base("decaying-linear");
    s.rhs = RhsSpec::ScalarNegativeFeedback { a: 0.5, b: 0.0 };
    s.history = HistorySpec::Exponential { value: vec![1.0], rate: -0.5 };
    s.t_end = 16.0;
    s.s_end = 32.0;
    s.checks = vec![
        RequestedCheck::Equivalence,
        RequestedCheck::Regularity,
        RequestedCheck::Stability,
        RequestedCheck::Manifold,
    ];
    catalog.push(s);

    let mut s = base("decaying-delayed");
    s.rhs = RhsSpec::ScalarNegativeFeedback { a: 1.0, b: 0.2 };
    s.relaxation_rate = 0.3;
    s.history = HistorySpec::Constant { value: vec![0.8] };
    catalog.push(s);

    let mut s = base("tanh-saturation");
    s.rhs = RhsSpec::TanhFeedback { a: 0.5, b: 0.3, w: 2.0 };
    s.coupling = CouplingSpec::ScaledTanh { kappa: 0.1, w: 1.0 };
    s.relaxation_rate = 0.25;
    s.rest_delay = 0.8;
    s.initial_delay = 0.6;
    s.history = HistorySpec::Cosine { offset: vec![0.8], amplitude: vec![0.3], frequency: 1.5 };
    s.s_end = 6.4;
    s.dt = 8e-3;
    s.ds = 8e-3;
    catalog.push(s);

    let mut s = base("sin-coupling");
    s.rhs = RhsSpec::ScalarNegativeFeedback { a: 1.0, b: 0.3 };
    s.coupling = CouplingSpec::ScaledSin { kappa: 0.25, w: 2.0 };
    s.relaxation_rate = 0.45;
    s.rest_delay = 0.9;
    s.initial_delay = 1.2;
    s.history = HistorySpec::Constant { value: vec![1.2] };
    s.t_end = 9.0;
    s.s_end = 7.2;
    s.dt = 9e-3;
    s.ds = 9e-3;
    catalog.push(s);

    let mut s = base("slow-relaxation");
    s.rhs = RhsSpec::ScalarNegativeFeedback { a: 0.6, b: 0.1 };
    s.coupling = CouplingSpec::ScaledTanh { kappa: 0.04, w: 1.0 };
    s.relaxation_rate = 0.05;
    s.initial_delay = 1.8;
    s.t_end = 10.0;
    s.s_end = 8.0;
    catalog.push(s);

    // Certificate product 2μη̄ = 0.98: the deviating argument's slope
    // floor is only 0.02.
    let mut s = base("tight-certificate");
    s.rhs = RhsSpec::ScalarNegativeFeedback { a: 0.8, b: 0.2 };
    s.coupling = CouplingSpec::ScaledTanh { kappa: 0.3, w: 1.0 };
    s.relaxation_rate = 0.49;
    s.t_end = 12.0;
    catalog.push(s);

    let mut s = base("wide-band");
    s.rhs = RhsSpec::ScalarNegativeFeedback { a: 0.7, b: 0.2 };
    s.coupling = CouplingSpec::ScaledTanh { kappa: 0.35, w: 1.0 };
    s.relaxation_rate = 0.2;
    s.rest_delay = 2.0;
    s.initial_delay = 3.5;
    s.t_end = 12.0;
    s.s_end = 8.0;
    catalog.push(s);

    let mut s = base("narrow-band");
    s.rhs = RhsSpec::ScalarNegativeFeedback { a: 0.0, b: 1.0 };
    s.coupling = CouplingSpec::ScaledTanh { kappa: 0.15, w: 1.0 };
    s.relaxation_rate = 0.8;
    s.rest_delay = 0.25;
    s.initial_delay = 0.25;
    s.t_end = 6.0;
    s.s_end = 4.0;
    s.dt = 6.25e-3;
    s.ds = 6.25e-3;
    s.checks = vec![RequestedCheck::Equivalence, RequestedCheck::Restart];
    catalog.push(s);

    let mut s = base("exponential-history");
    s.rhs = RhsSpec::ScalarNegativeFeedback { a: 0.8, b: 0.1 };
    s.coupling = CouplingSpec::ScaledTanh { kappa: 0.1, w: 1.0 };
    s.initial_delay = 1.1;
    s.t0 = 1.0;
    s.s0 = 0.5;
    s.history = HistorySpec::Exponential { value: vec![0.9], rate: 0.3 };
    s.t_end = 9.0;
    s.s_end = 6.5;
    catalog.push(s);

    let mut s = base("cosine-history");
    s.rhs = RhsSpec::ScalarNegativeFeedback { a: 0.9, b: 0.25 };
    s.coupling = CouplingSpec::ScaledSin { kappa: 0.2, w: 1.0 };
    s.relaxation_rate = 0.35;
    s.initial_delay = 0.7;
    s.history = HistorySpec::Cosine { offset: vec![1.0], amplitude: vec![0.5], frequency: 2.0 };
    catalog.push(s);

    let mut s = base("table-history");
    s.rhs = RhsSpec::Linear { a: vec![vec![-0.4]], b: vec![vec![0.1]] };
    s.coupling = CouplingSpec::ScaledTanh { kappa: 0.12, w: 1.0 };
    s.initial_delay = 0.9;
    s.history = quadratic_table(-2.0, 0.0, 9);
    catalog.push(s);

    // History exponent solving r = −exp(−r·η0): the datum starts exactly
    // on the smooth-start manifold, giving a C¹ solution from the outset
    // (the profile is the pure exponential mode of the delayed feedback).
    let mut s = base("manifold-compatible");
    s.rhs = RhsSpec::ScalarNegativeFeedback { a: 0.0, b: 1.0 };
    s.rest_delay = 0.25;
    s.initial_delay = 0.25;
    s.history = HistorySpec::Exponential { value: vec![1.0], rate: -1.4296118247255556 };
    s.t_end = 6.0;
    s.s_end = 4.0;
    s.dt = 6.25e-3;
    s.ds = 6.25e-3;
    s.checks = vec![RequestedCheck::Equivalence, RequestedCheck::Stability, RequestedCheck::Manifold];
    catalog.push(s);

    catalog
}
