//! Claim-anchored verification harness.
//!
//! Each theoretical guarantee the crate relies on — the equivalence of
//! the two systems under the time map, the continuous-dependence bound,
//! uniform convergence of the maps, transfer of exponential decay, and
//! the regularity estimates on `α` — is exercised here as a reproducible
//! numerical experiment. Results come back as a [`VerificationReport`]:
//! a list of checks, each tied to a named [`Claim`], with the computed
//! margin, the threshold it was held to, and the verdict. A check
//! cannot be built without a claim, so a report never contains an
//! unanchored pass/fail.
//!
//! Finite-horizon caveat: statements quantified over an infinite ray
//! (rate bounds, uniform continuity) are reported as concrete
//! finite-horizon estimates and modulus tables, never as booleans
//! claiming the asymptotic property itself.

use std::time::Instant;

use crate::grid;
use crate::monotone::MonotoneError;
use crate::real::Real;
use crate::sdd::{self, InitialData, Params, SddError, SddSolution};
use crate::trajectory::{Trajectory, TrajectoryError};
use crate::transform::{build_time_map, TimeMap, TimeMapSeed, TransformError};
use crate::transformed::{TransformedError, TransformedSolution};

/// Shared tolerance for the pointwise equivalence sups.
pub const EQUIVALENCE_TOLERANCE: f64 = 1e-5;
/// Required goodness of fit before a decay rate is trusted.
pub const RATE_FIT_MIN_R2: f64 = 0.99;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VerifyError {
    #[error("map reaches t = {needed} but the direct solution stops at {available}")]
    HorizonMismatch { needed: f64, available: f64 },
    #[error("perturbation sizes must be non-negative and strictly decreasing")]
    BadDeltas,
    #[error("tail norm is not decreasing near t = {at}; no decay rate to fit")]
    NotDecaying { at: f64 },
    #[error("too few samples or degenerate spread for a rate fit")]
    DegenerateFit,
    #[error("the model was not declared time-invariant")]
    NotAutonomous,
    #[error(transparent)]
    Sdd(#[from] SddError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Transformed(#[from] TransformedError),
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
    #[error(transparent)]
    Monotone(#[from] MonotoneError),
}

/// The guarantees a check can be anchored to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Claim {
    /// `z(s) = y(α(s))` on the shared horizon.
    StateRebase,
    /// `χ(s) = η(α(s))` on the shared horizon.
    DelayRebase,
    /// `y(t) = z(α⁻¹(t))` on the image of the map.
    StateRecovery,
    /// `sup|y|` and `sup|z|` agree on matched meshes.
    BoundednessTransfer,
    /// Deviations stay under the Gronwall-type dependence bound.
    DependenceBound,
    /// Deviations scale linearly with the data perturbation.
    DependenceScaling,
    /// Maps built from converging data converge uniformly.
    MapConvergence,
    /// Every perturbed map stays strictly increasing.
    MapSlopePositive,
    /// The transformed decay admits a trusted log-linear fit.
    DecayFitTransformed,
    /// The original decay admits a trusted log-linear fit.
    DecayFitOriginal,
    /// A positive original-time rate is certified from the
    /// transformed one: `claimed·t − fitted·α⁻¹(t) ≤ 0`.
    TransferToOriginal,
    /// The dual direction: `claimed·s − fitted·α(s) ≤ 0`.
    TransferToTransformed,
    /// `sup α'` is stable under mesh refinement (rate-bound evidence).
    ForwardRateBounded,
    /// Likewise for the inverse map's rate.
    InverseRateBounded,
    /// Modulus of continuity of `α` shrinks with the gap.
    ForwardModulus,
    /// Modulus of continuity of `α⁻¹` shrinks with the gap.
    InverseModulus,
    /// Modulus of continuity of `α'` is linearly controlled at fine scales.
    ForwardRateModulus,
    /// Modulus of continuity of `(α⁻¹)'` is linearly controlled at fine scales.
    InverseRateModulus,
    /// `α'(s)·(α⁻¹)'(α(s)) = 1` with the inverse rate measured
    /// independently by central differences.
    ChainRuleReciprocal,
    /// `α(s) ≤ C·s + k` on the mesh with `C = sup α'` and fitted `k`.
    LinearGrowthEnvelope,
    /// Restarting mid-course from stored state reproduces the
    /// uninterrupted march.
    ProcessRestart,
    /// The datum lies on the smooth-start manifold (zero residual).
    ManifoldResidual,
}

impl Claim {
    pub fn id(self) -> &'static str {
        match self {
            Claim::StateRebase => "state-rebase",
            Claim::DelayRebase => "delay-rebase",
            Claim::StateRecovery => "state-recovery",
            Claim::BoundednessTransfer => "boundedness-transfer",
            Claim::DependenceBound => "dependence-bound",
            Claim::DependenceScaling => "dependence-scaling",
            Claim::MapConvergence => "map-convergence",
            Claim::MapSlopePositive => "map-slope-positive",
            Claim::DecayFitTransformed => "decay-fit-transformed",
            Claim::DecayFitOriginal => "decay-fit-original",
            Claim::TransferToOriginal => "transfer-to-original",
            Claim::TransferToTransformed => "transfer-to-transformed",
            Claim::ForwardRateBounded => "forward-rate-bounded",
            Claim::InverseRateBounded => "inverse-rate-bounded",
            Claim::ForwardModulus => "forward-modulus",
            Claim::InverseModulus => "inverse-modulus",
            Claim::ForwardRateModulus => "forward-rate-modulus",
            Claim::InverseRateModulus => "inverse-rate-modulus",
            Claim::ChainRuleReciprocal => "chain-rule-reciprocal",
            Claim::LinearGrowthEnvelope => "linear-growth-envelope",
            Claim::ProcessRestart => "process-restart",
            Claim::ManifoldResidual => "manifold-residual",
        }
    }
}

/// Which side of the threshold counts as passing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    AtMost,
    AtLeast,
}

/// One verified inequality: an observed quantity held to a threshold.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Check {
    pub claim: Claim,
    pub label: String,
    pub observed: f64,
    pub threshold: f64,
    pub bound: BoundKind,
    pub pass: bool,
}

impl Check {
    /// Passes when `observed ≤ threshold`. A non-finite observation
    /// always fails.
    pub fn at_most<T: Real>(claim: Claim, label: impl Into<String>, observed: T, threshold: T) -> Self {
        let observed = observed.as_f64();
        let threshold = threshold.as_f64();
        Check { claim, label: label.into(), observed, threshold, bound: BoundKind::AtMost, pass: observed <= threshold }
    }

    /// Passes when `observed ≥ threshold`. A non-finite observation
    /// always fails.
    pub fn at_least<T: Real>(claim: Claim, label: impl Into<String>, observed: T, threshold: T) -> Self {
        let observed = observed.as_f64();
        let threshold = threshold.as_f64();
        Check { claim, label: label.into(), observed, threshold, bound: BoundKind::AtLeast, pass: observed >= threshold }
    }
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        let relation = match self.bound {
            BoundKind::AtMost => "<=",
            BoundKind::AtLeast => ">=",
        };
        write!(
            f,
            "[{verdict}] {} ({}): {:.6e} {relation} {:.6e}",
            self.claim.id(),
            self.label,
            self.observed,
            self.threshold
        )
    }
}

/// One row of a modulus-of-continuity table: largest variation of each
/// quantity over the given gap.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ModulusRow {
    pub gap: f64,
    pub map: f64,
    pub inverse: f64,
    pub map_rate: f64,
    pub inverse_rate: f64,
}

/// Outcome of one experiment: named checks plus any attached tables.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct VerificationReport {
    pub scenario: String,
    pub experiment: String,
    pub checks: Vec<Check>,
    pub moduli: Vec<ModulusRow>,
    pub runtime_seconds: f64,
}

impl VerificationReport {
    pub fn new(experiment: &str) -> Self {
        VerificationReport {
            scenario: String::new(),
            experiment: experiment.to_string(),
            checks: Vec::new(),
            moduli: Vec::new(),
            runtime_seconds: 0.0,
        }
    }

    pub fn set_scenario(&mut self, id: impl Into<String>) {
        self.scenario = id.into();
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failed(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    /// The checks anchored to one claim.
    pub fn find(&self, claim: Claim) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(move |c| c.claim == claim)
    }
}

impl std::fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "experiment: {}", self.experiment)?;
        if !self.scenario.is_empty() {
            writeln!(f, "scenario: {}", self.scenario)?;
        }
        for check in &self.checks {
            writeln!(f, "{check}")?;
        }
        if !self.moduli.is_empty() {
            writeln!(f, "moduli (gap, map, inverse, map-rate, inverse-rate):")?;
            for row in &self.moduli {
                writeln!(
                    f,
                    "  {:.6e}  {:.6e}  {:.6e}  {:.6e}  {:.6e}",
                    row.gap, row.map, row.inverse, row.map_rate, row.inverse_rate
                )?;
            }
        }
        write!(f, "runtime: {:.3}s", self.runtime_seconds)
    }
}

fn max_abs<T: Real>(values: &[T]) -> T {
    values.iter().fold(T::zero(), |acc, v| acc.max(v.abs()))
}

/// Confronts a direct solution and a transformed one over their shared
/// horizon: the rebased state and delay must match the originals
/// through the map, the originals must be recoverable through its
/// inverse, and suprema must transfer exactly on matched meshes.
pub fn verify_equivalence<T: Real>(
    direct: &SddSolution<T>,
    ts: &TransformedSolution<T>,
    grid_points: usize,
) -> Result<VerificationReport, VerifyError> {
    let clock = Instant::now();
    let n = grid_points.max(2);
    let s0 = ts.s0();
    let s_end = ts.s_end();
    let t_hi = ts.alpha().to_original(s_end)?;
    if t_hi > direct.t_end() + T::of(1e-9) * (T::one() + direct.t_end().abs()) {
        return Err(VerifyError::HorizonMismatch { needed: t_hi.as_f64(), available: direct.t_end().as_f64() });
    }

    let mut state_sup = T::zero();
    let mut delay_sup = T::zero();
    let mut sup_original = T::zero();
    let mut sup_rebased = T::zero();
    for s in grid::uniform(s0, s_end, n) {
        let t = ts.alpha().to_original(s)?;
        let t = t.min(direct.t_end());
        let z = ts.state().eval(s)?;
        let y = direct.state().eval(t)?;
        for (zi, yi) in z.iter().zip(&y) {
            state_sup = state_sup.max((*zi - *yi).abs());
        }
        delay_sup = delay_sup.max((ts.delay().eval_scalar(s)? - direct.delay().eval_scalar(t)?).abs());
        sup_original = sup_original.max(max_abs(&y));
        sup_rebased = sup_rebased.max(max_abs(&z));
    }

    let t0 = ts.alpha().t0();
    let mut recovery_sup = T::zero();
    for t in grid::uniform(t0, t_hi.min(direct.t_end()), n) {
        let (y_rec, _) = ts.recover_original(t)?;
        let y = direct.state().eval(t)?;
        for (ri, yi) in y_rec.iter().zip(&y) {
            recovery_sup = recovery_sup.max((*ri - *yi).abs());
        }
    }

    let tol = T::of(EQUIVALENCE_TOLERANCE);
    let mut report = VerificationReport::new("equivalence");
    report.checks.push(Check::at_most(Claim::StateRebase, "sup |z - y∘α|", state_sup, tol));
    report.checks.push(Check::at_most(Claim::DelayRebase, "sup |χ - η∘α|", delay_sup, tol));
    report.checks.push(Check::at_most(Claim::StateRecovery, "sup |y - z∘α⁻¹|", recovery_sup, tol));
    report.checks.push(Check::at_most(
        Claim::BoundednessTransfer,
        "sup-norm gap on matched meshes",
        (sup_original - sup_rebased).abs(),
        T::of(2.0) * tol,
    ));
    report.runtime_seconds = clock.elapsed().as_secs_f64();
    Ok(report)
}

fn check_deltas<T: Real>(deltas: &[T]) -> Result<(), VerifyError> {
    if deltas.is_empty() || deltas.iter().any(|d| !(*d >= T::zero())) {
        return Err(VerifyError::BadDeltas);
    }
    if deltas.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(VerifyError::BadDeltas);
    }
    Ok(())
}

/// Resamples the base history with the fixed perturbation profile
/// `δ·(1 + cos(t − t0))` added to every component. The profile is C¹
/// with sup-norm `2δ` and derivative norm `δ`.
fn perturbed_data<T: Real>(
    params: &Params<T>,
    base: &InitialData<T>,
    delta: T,
) -> Result<InitialData<T>, VerifyError> {
    let t0 = base.t0();
    let history = base.history();
    let lo = history.t_min();
    let segments = history.segments().len().max(64);
    let n = segments;
    let mesh = grid::uniform(lo, t0, n);
    let mut values = Vec::with_capacity(mesh.len());
    let mut rates = Vec::with_capacity(mesh.len());
    for &t in &mesh {
        let bump = delta * (T::one() + (t - t0).cos());
        let bump_rate = -delta * (t - t0).sin();
        let mut v = history.eval(t)?;
        let mut d = history.eval_derivative(t)?;
        for (vi, di) in v.iter_mut().zip(d.iter_mut()) {
            *vi = *vi + bump;
            *di = *di + bump_rate;
        }
        values.push(v);
        rates.push(d);
    }
    let perturbed = Trajectory::from_nodes(&mesh, &values, &rates)?;
    Ok(InitialData::new(perturbed, base.initial_delay() + delta, t0, params)?)
}

/// Perturbs the initial data by each `δ` (history by a fixed C¹ bump of
/// sup-norm `2δ`, initial delay by `δ`), solves to `t_end`, and holds
/// the observed deviation `sup(|Δy| + |Δη|)` to the dependence bound
///
/// ```text
/// {(1 + L_f)·sup|Δg| + |Δη0|} · exp((t_end − t0)·max{2L_f + L_G, L_y})
/// ```
///
/// with the declared Lipschitz constants and the measured slope bound
/// `L_y` of the base solution. Deviations must also scale linearly in
/// `δ` within a factor of two.
pub fn continuous_dependence_experiment<T: Real>(
    params: &Params<T>,
    base: &InitialData<T>,
    deltas: &[T],
    t_end: T,
    dt: T,
) -> Result<VerificationReport, VerifyError> {
    let clock = Instant::now();
    check_deltas(deltas)?;
    let base_solution = sdd::integrate(params, base, t_end, dt)?;
    let t0 = base.t0();
    let span = t_end - t0;
    let bounds = params.bounds();
    let lipschitz_y = base_solution.state_lipschitz_estimate();
    let growth = (T::of(2.0) * bounds.rhs_lipschitz + bounds.coupling_lipschitz).max(lipschitz_y);
    let amplification = (span * growth).exp();

    let mut report = VerificationReport::new("continuous-dependence");
    let samples = 2 * grid::steps_covering(span.max(dt), dt).expect("positive span");
    let mut observed_all = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let data = perturbed_data(params, base, delta)?;
        let solution = sdd::integrate(params, &data, t_end, dt)?;
        let mut observed = T::zero();
        for t in grid::uniform(t0, t_end, samples) {
            let y_base = base_solution.state().eval(t)?;
            let y_pert = solution.state().eval(t)?;
            let mut dy = T::zero();
            for (a, b) in y_base.iter().zip(&y_pert) {
                dy = dy.max((*a - *b).abs());
            }
            let de = (base_solution.delay().eval_scalar(t)? - solution.delay().eval_scalar(t)?).abs();
            observed = observed.max(dy + de);
        }
        let data_gap = (T::one() + bounds.rhs_lipschitz) * (T::of(2.0) * delta) + delta;
        let bound = data_gap * amplification;
        report.checks.push(Check::at_most(
            Claim::DependenceBound,
            format!("delta = {delta:e}"),
            observed,
            bound,
        ));
        observed_all.push((delta, observed));
    }

    for pair in observed_all.windows(2) {
        let (d_hi, o_hi) = pair[0];
        let (d_lo, o_lo) = pair[1];
        if d_lo == T::zero() {
            // A zero perturbation must leave the solution untouched.
            report.checks.push(Check::at_most(
                Claim::DependenceScaling,
                "delta = 0 leaves the solution unchanged",
                o_lo,
                T::of(1e-12),
            ));
            continue;
        }
        let delta_ratio = d_hi / d_lo;
        let observed_ratio = o_hi / o_lo;
        let factor = observed_ratio / delta_ratio;
        let distortion = factor.max(T::one() / factor);
        report.checks.push(Check::at_most(
            Claim::DependenceScaling,
            format!("linearity across ({d_hi:e}, {d_lo:e})"),
            distortion,
            T::of(2.0),
        ));
    }
    report.runtime_seconds = clock.elapsed().as_secs_f64();
    Ok(report)
}

/// Builds the time map for each perturbed datum (same bump family as
/// the dependence experiment, with a compatible seed at the base anchor
/// rate) and requires the sup-distance to the base map to shrink
/// monotonically while every map's slope stays positive.
pub fn alpha_convergence_experiment<T: Real>(
    params: &Params<T>,
    base: &InitialData<T>,
    base_seed: &TimeMapSeed<T>,
    deltas: &[T],
    s_len: T,
    dt: T,
) -> Result<VerificationReport, VerifyError> {
    let clock = Instant::now();
    check_deltas(deltas)?;
    let s0 = base_seed.s0();
    let anchor = base_seed.end_rate();
    // The map cannot outrun t0 + lag + s_len; solve just past it.
    let t_end = base.t0() + params.lag() + s_len + dt;
    let base_solution = sdd::integrate(params, base, t_end, dt)?;
    let base_map = build_time_map(&base_solution, base_seed, s0 + s_len, dt)?;

    let samples = 2 * grid::steps_covering(s_len, dt).expect("positive horizon");
    let mesh = grid::uniform(s0, s0 + s_len, samples);
    let mut report = VerificationReport::new("map-convergence");
    let mut distances = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let data = perturbed_data(params, base, delta)?;
        let solution = sdd::integrate(params, &data, t_end, dt)?;
        let seed = TimeMapSeed::compatible(params, &data, s0, anchor)?;
        let map = build_time_map(&solution, &seed, s0 + s_len, dt)?;
        let mut distance = T::zero();
        for &s in &mesh {
            distance = distance.max((map.to_original(s)? - base_map.to_original(s)?).abs());
        }
        report.checks.push(Check::at_least(
            Claim::MapSlopePositive,
            format!("min slope, delta = {delta:e}"),
            map.as_monotone().slope_floor(),
            T::of(1e-12),
        ));
        distances.push((delta, distance));
    }

    for pair in distances.windows(2) {
        let (d_hi, dist_hi) = pair[0];
        let (d_lo, dist_lo) = pair[1];
        let label = format!("sup distance shrinks across ({d_hi:e}, {d_lo:e})");
        if dist_hi == T::zero() {
            report.checks.push(Check::at_most(Claim::MapConvergence, label, dist_lo, T::of(1e-12)));
        } else {
            report.checks.push(Check::at_most(Claim::MapConvergence, label, dist_lo / dist_hi, T::one()));
        }
    }
    report.runtime_seconds = clock.elapsed().as_secs_f64();
    Ok(report)
}

/// Least-squares line through `(x, ln y)`; returns `(slope, intercept,
/// r²)`.
fn log_linear_fit<T: Real>(xs: &[T], norms: &[T]) -> Result<(T, T, T), VerifyError> {
    if xs.len() < 3 {
        return Err(VerifyError::DegenerateFit);
    }
    let n = T::from_usize(xs.len()).expect("sample count");
    let mut sx = T::zero();
    let mut sy = T::zero();
    for (&x, &v) in xs.iter().zip(norms) {
        if !(v > T::zero()) {
            return Err(VerifyError::DegenerateFit);
        }
        sx = sx + x;
        sy = sy + v.ln();
    }
    let mx = sx / n;
    let my = sy / n;
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    let mut syy = T::zero();
    for (&x, &v) in xs.iter().zip(norms) {
        let dx = x - mx;
        let dy = v.ln() - my;
        sxx = sxx + dx * dx;
        sxy = sxy + dx * dy;
        syy = syy + dy * dy;
    }
    if !(sxx > T::zero()) {
        return Err(VerifyError::DegenerateFit);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy > T::zero() { (sxy * sxy) / (sxx * syy) } else { T::one() };
    Ok((slope, intercept, r2))
}

/// Samples max-norms of a trajectory on a mesh; errors with
/// [`VerifyError::NotDecaying`] unless they decrease monotonically.
fn decaying_norms<T: Real>(traj: &Trajectory<T>, mesh: &[T]) -> Result<Vec<T>, VerifyError> {
    let mut norms = Vec::with_capacity(mesh.len());
    for &x in mesh {
        norms.push(max_abs(&traj.eval(x)?));
    }
    for (i, w) in norms.windows(2).enumerate() {
        if w[1] > w[0] * (T::one() + T::of(1e-9)) {
            return Err(VerifyError::NotDecaying { at: mesh[i + 1].as_f64() });
        }
    }
    Ok(norms)
}

/// Fits exponential decay rates to the tail halves of both solutions
/// and checks the two transfer inequalities: a rate claimed in one time
/// scale, taken at half the fitted value for margin, must be dominated
/// by the fitted rate of the other composed with the map.
pub fn stability_transfer_check<T: Real>(
    direct: &SddSolution<T>,
    ts: &TransformedSolution<T>,
) -> Result<VerificationReport, VerifyError> {
    let clock = Instant::now();
    let samples = 160;

    let t0 = direct.t0();
    let t_end = direct.t_end();
    let t_mesh = grid::uniform(t0 + (t_end - t0).half(), t_end, samples);
    let y_norms = decaying_norms(direct.state(), &t_mesh)?;
    let (slope_t, _, r2_t) = log_linear_fit(&t_mesh, &y_norms)?;
    let original_rate = -slope_t;

    let s0 = ts.s0();
    let s_end = ts.s_end();
    let s_mesh = grid::uniform(s0 + (s_end - s0).half(), s_end, samples);
    let z_norms = decaying_norms(ts.state(), &s_mesh)?;
    let (slope_s, _, r2_s) = log_linear_fit(&s_mesh, &z_norms)?;
    let transformed_rate = -slope_s;

    let mut report = VerificationReport::new("stability-transfer");
    let r2_floor = T::of(RATE_FIT_MIN_R2);
    report.checks.push(Check::at_least(
        Claim::DecayFitOriginal,
        format!("r² of original fit (rate {:.6e})", original_rate.as_f64()),
        r2_t,
        r2_floor,
    ));
    report.checks.push(Check::at_least(
        Claim::DecayFitTransformed,
        format!("r² of transformed fit (rate {:.6e})", transformed_rate.as_f64()),
        r2_s,
        r2_floor,
    ));

    // Transfer of the transformed decay to the original clock: claim
    // half the fitted original rate and dominate it through α⁻¹. The
    // inversion only exists on the image of the map, so the probe mesh
    // lives on the tail half of [t0, α(s_end)].
    let claimed_original = original_rate.half();
    let t_image_hi = ts.alpha().to_original(s_end)?;
    let mut worst_exponent = T::of(f64::NEG_INFINITY);
    for t in grid::uniform(t0 + (t_image_hi - t0).half(), t_image_hi, samples) {
        let s = ts.alpha().to_transformed(t)?;
        let exponent = claimed_original * (t - t0) - transformed_rate * (s - s0);
        worst_exponent = worst_exponent.max(exponent);
    }
    report.checks.push(Check::at_most(
        Claim::TransferToOriginal,
        "max of claimed·(t−t0) − fitted·(α⁻¹(t)−s0)",
        worst_exponent,
        T::of(1e-6),
    ));

    // Dual direction through α.
    let claimed_transformed = transformed_rate.half();
    let mut worst_dual = T::of(f64::NEG_INFINITY);
    for &s in &s_mesh {
        let t = ts.alpha().to_original(s)?;
        let exponent = claimed_transformed * (s - s0) - original_rate * (t - t0);
        worst_dual = worst_dual.max(exponent);
    }
    report.checks.push(Check::at_most(
        Claim::TransferToTransformed,
        "max of claimed·(s−s0) − fitted·(α(s)−t0)",
        worst_dual,
        T::of(1e-6),
    ));
    report.runtime_seconds = clock.elapsed().as_secs_f64();
    Ok(report)
}

/// Finite-horizon regularity estimates for a time map: refined rate
/// sups, the chain-rule reciprocal identity against an independent
/// central-difference inverse rate, a fitted linear growth envelope,
/// and modulus-of-continuity tables on a dyadic gap ladder.
pub fn regularity_estimates<T: Real>(map: &TimeMap<T>) -> Result<VerificationReport, VerifyError> {
    let clock = Instant::now();
    let s0 = map.s0();
    let s_end = map.s_end();
    let span = s_end - s0;
    let coarse = grid::uniform(s0, s_end, 256);
    let fine = grid::uniform(s0, s_end, 1024);

    let sup_rate_on = |mesh: &[T]| -> Result<T, VerifyError> {
        let mut sup = T::zero();
        for &s in mesh {
            sup = sup.max(map.rate(s)?);
        }
        Ok(sup)
    };
    let coarse_sup = sup_rate_on(&coarse)?;
    let fine_sup = sup_rate_on(&fine)?;

    let inverse_sup_on = |mesh: &[T]| -> Result<T, VerifyError> {
        let mut sup = T::zero();
        for &s in mesh {
            sup = sup.max(T::one() / map.rate(s)?);
        }
        Ok(sup)
    };
    let coarse_inverse = inverse_sup_on(&coarse)?;
    let fine_inverse = inverse_sup_on(&fine)?;

    let mut report = VerificationReport::new("map-regularity");
    report.checks.push(Check::at_most(
        Claim::ForwardRateBounded,
        format!("refined sup α' = {:.6e} vs coarse estimate", fine_sup.as_f64()),
        fine_sup,
        coarse_sup * T::of(1.01) + T::of(1e-12),
    ));
    report.checks.push(Check::at_most(
        Claim::InverseRateBounded,
        format!("refined sup (α⁻¹)' = {:.6e} vs coarse estimate", fine_inverse.as_f64()),
        fine_inverse,
        coarse_inverse * T::of(1.01) + T::of(1e-12),
    ));

    // Chain rule with the inverse rate measured independently.
    let t0 = map.to_original(s0)?;
    let t_hi = map.to_original(s_end)?;
    let eps = (t_hi - t0) * T::of(1e-6);
    let mut min_product = T::of(f64::INFINITY);
    let mut max_product = T::zero();
    for &s in coarse.iter().skip(1).take(coarse.len() - 2) {
        let t = map.to_original(s)?;
        if t - eps <= t0 || t + eps >= t_hi {
            continue;
        }
        let inverse_rate = (map.to_transformed(t + eps)? - map.to_transformed(t - eps)?) / (T::of(2.0) * eps);
        let product = map.rate(s)? * inverse_rate;
        min_product = min_product.min(product);
        max_product = max_product.max(product);
    }
    report.checks.push(Check::at_least(
        Claim::ChainRuleReciprocal,
        "min α'(s)·(α⁻¹)'(α(s))",
        min_product,
        T::one() - T::of(1e-6),
    ));
    // The upper side gets a looser threshold: the central difference
    // occasionally straddles a curvature jump of the piecewise-cubic map,
    // which biases the measured inverse rate by O(eps) in one direction.
    report.checks.push(Check::at_most(
        Claim::ChainRuleReciprocal,
        "max α'(s)·(α⁻¹)'(α(s))",
        max_product,
        T::one() + T::of(1e-5),
    ));

    // Linear growth envelope α(s) ≤ C·s + k: fit the intercept on the
    // coarse mesh, verify on the fine one.
    let envelope_rate = fine_sup;
    let mut intercept = T::of(f64::NEG_INFINITY);
    for &s in &coarse {
        intercept = intercept.max(map.to_original(s)? - envelope_rate * s);
    }
    let mut envelope_excess = T::zero();
    for &s in &fine {
        envelope_excess = envelope_excess.max(map.to_original(s)? - envelope_rate * s - intercept);
    }
    report.checks.push(Check::at_most(
        Claim::LinearGrowthEnvelope,
        format!("excess over α(s) ≤ {:.6e}·s + {:.6e}", envelope_rate.as_f64(), intercept.as_f64()),
        envelope_excess,
        T::of(1e-9) * (T::one() + intercept.abs()),
    ));

    // Modulus tables on the dyadic gap ladder lag/2^k, k = 0..8.
    let mut ladder = Vec::new();
    for k in 0..=8 {
        let gap = map.lag() / T::of(f64::from(1 << k));
        if gap < span {
            ladder.push(gap);
        }
    }
    let probe = grid::uniform(s0, s_end, 512);
    for &gap in &ladder {
        let mut row = ModulusRow { gap: gap.as_f64(), map: 0.0, inverse: 0.0, map_rate: 0.0, inverse_rate: 0.0 };
        for &s in &probe {
            if s + gap > s_end {
                break;
            }
            row.map = row.map.max((map.to_original(s + gap)? - map.to_original(s)?).abs().as_f64());
            row.map_rate = row.map_rate.max((map.rate(s + gap)? - map.rate(s)?).abs().as_f64());
        }
        for &t in &grid::uniform(t0, t_hi, 512) {
            if t + gap > t_hi {
                break;
            }
            let s_right = map.to_transformed(t + gap)?;
            let s_left = map.to_transformed(t)?;
            row.inverse = row.inverse.max((s_right - s_left).abs().as_f64());
            row.inverse_rate = row
                .inverse_rate
                .max((T::one() / map.rate(s_right)? - T::one() / map.rate(s_left)?).abs().as_f64());
        }
        report.moduli.push(row);
    }
    fn monotone_gap(rows: &[ModulusRow], extract: fn(&ModulusRow) -> f64) -> f64 {
        rows.windows(2).map(|w| extract(&w[1]) - extract(&w[0])).fold(0.0f64, f64::max)
    }
    // Exact-gap moduli of the rates are not monotone across coarse gaps —
    // for an oscillating rate the differences can cancel near a resonance of
    // the gap with the oscillation — so the rate columns are checked for
    // fine-scale linear control instead: the finest two rows must stay under
    // twice the steepest modulus-to-gap slope fitted on the coarser rows.  A
    // discontinuity keeps the modulus bounded away from zero as the gap
    // shrinks and escapes any such envelope.
    fn fine_scale_excess(rows: &[ModulusRow], extract: fn(&ModulusRow) -> f64) -> f64 {
        if rows.len() < 3 {
            return 0.0;
        }
        let (coarse, fine) = rows.split_at(rows.len() - 2);
        let slope = coarse.iter().map(|r| extract(r) / r.gap).fold(0.0f64, f64::max);
        fine.iter().map(|r| extract(r) - 2.0 * slope * r.gap).fold(0.0f64, f64::max)
    }
    let modulus_tol = 1e-12 * (1.0 + t_hi.as_f64().abs());
    report.checks.push(Check::at_most(
        Claim::ForwardModulus,
        "modulus of α shrinks with the gap",
        monotone_gap(&report.moduli, |r| r.map),
        modulus_tol,
    ));
    report.checks.push(Check::at_most(
        Claim::InverseModulus,
        "modulus of α⁻¹ shrinks with the gap",
        monotone_gap(&report.moduli, |r| r.inverse),
        modulus_tol,
    ));
    report.checks.push(Check::at_most(
        Claim::ForwardRateModulus,
        "modulus of α' linearly controlled at fine scales",
        fine_scale_excess(&report.moduli, |r| r.map_rate),
        modulus_tol,
    ));
    report.checks.push(Check::at_most(
        Claim::InverseRateModulus,
        "modulus of (α⁻¹)' linearly controlled at fine scales",
        fine_scale_excess(&report.moduli, |r| r.inverse_rate),
        modulus_tol,
    ));
    report.runtime_seconds = clock.elapsed().as_secs_f64();
    Ok(report)
}

/// Distance of an initial datum from the flow-invariant set of data
/// that start smoothly: `‖ġ(t0) − f(g(t0), g(t0 − η0))‖` for a
/// time-invariant right-hand side. Zero means the solution through the
/// datum is C¹ at `t0`.
pub fn manifold_residual<T: Real>(params: &Params<T>, init: &InitialData<T>) -> Result<T, VerifyError> {
    if !params.time_invariant() {
        return Err(VerifyError::NotAutonomous);
    }
    let t0 = init.t0();
    let g0 = init.history().eval(t0)?;
    let g_rate = init.history().eval_derivative(t0)?;
    let g_delayed = init.history().eval(t0 - init.initial_delay())?;
    let mut rhs = vec![T::zero(); params.dim()];
    params.eval_rhs(t0, &g0, &g_delayed, &mut rhs);
    let mut sum = T::zero();
    for (gi, fi) in g_rate.iter().zip(&rhs) {
        sum = sum + (*gi - *fi) * (*gi - *fi);
    }
    Ok(sum.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdd::{CouplingFn, ModelBounds, RhsFn};
    use crate::transformed::integrate_transformed;
    use std::sync::Arc;

    fn lag_feedback() -> RhsFn<f64> {
        Arc::new(|_t, _y, yd: &[f64], out: &mut [f64]| out[0] = -yd[0])
    }

    fn self_decay(a: f64) -> RhsFn<f64> {
        Arc::new(move |_t, y: &[f64], _yd, out: &mut [f64]| out[0] = -a * y[0])
    }

    fn zero_rhs() -> RhsFn<f64> {
        Arc::new(|_t, _y, _yd, out: &mut [f64]| out[0] = 0.0)
    }

    fn tanh_coupling(kappa: f64) -> CouplingFn<f64> {
        Arc::new(move |y: &[f64]| kappa * y[0].tanh())
    }

    fn zero_coupling() -> CouplingFn<f64> {
        Arc::new(|_y: &[f64]| 0.0)
    }

    fn bounds(lf: f64, lg: f64, sup: f64) -> ModelBounds<f64> {
        ModelBounds { rhs_lipschitz: lf, coupling_lipschitz: lg, coupling_sup: sup }
    }

    fn s1_params() -> Params<f64> {
        Params::new(0.4, 1.0, 1, lag_feedback(), tanh_coupling(0.2), bounds(1.0, 0.2, 0.2)).unwrap()
    }

    fn s1_initial(p: &Params<f64>) -> InitialData<f64> {
        let g = Trajectory::constant(&[1.0], -p.lag(), 0.0).unwrap();
        InitialData::new(g, 1.0, 0.0, p).unwrap()
    }

    fn constant_case() -> (Params<f64>, InitialData<f64>, TimeMapSeed<f64>) {
        let p = Params::new(0.4, 1.0, 1, zero_rhs(), zero_coupling(), bounds(0.0, 0.0, 0.0)).unwrap();
        let g = Trajectory::constant(&[1.0], -2.0, 0.0).unwrap();
        let init = InitialData::new(g, 1.0, 0.0, &p).unwrap();
        let seed = TimeMapSeed::compatible(&p, &init, 0.0, 0.5).unwrap();
        (p, init, seed)
    }

    #[test]
    fn checks_carry_their_claims_and_verdicts() {
        let pass = Check::at_most(Claim::StateRebase, "sup", 1e-7, 1e-5);
        assert!(pass.pass);
        let fail = Check::at_most(Claim::StateRebase, "sup", 1e-3, 1e-5);
        assert!(!fail.pass);
        let lower = Check::at_least(Claim::ChainRuleReciprocal, "min", 0.999999, 1.0 - 1e-6);
        assert!(lower.pass);
        assert!(!Check::at_most(Claim::StateRebase, "nan", f64::NAN, 1.0).pass);
        assert!(!Check::at_least(Claim::StateRebase, "nan", f64::NAN, 0.0).pass);

        let mut report = VerificationReport::new("unit");
        report.checks.push(pass.clone());
        assert!(report.all_pass());
        report.checks.push(fail);
        assert!(!report.all_pass());
        assert_eq!(report.failed().count(), 1);
        assert_eq!(report.find(Claim::StateRebase).count(), 2);

        // Serialization round-trips with kebab-case claim tags.
        let json = serde_json::to_string(&report).unwrap();
        assert!(json.contains("state-rebase"));
        let back: VerificationReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, report);
        let line = format!("{pass}");
        assert!(line.starts_with("[PASS] state-rebase"));
    }

    #[test]
    fn equivalence_is_exact_in_the_constant_case() {
        let (p, init, seed) = constant_case();
        let direct = sdd::integrate(&p, &init, 6.0, 0.01).unwrap();
        let ts = integrate_transformed(&p, &init, &seed, 8.0, 0.01).unwrap();
        let report = verify_equivalence(&direct, &ts, 200).unwrap();
        assert!(report.all_pass(), "{report}");
        for check in &report.checks {
            assert!(check.observed <= 1e-12, "{check}");
        }
    }

    #[test]
    fn equivalence_holds_on_the_reference_scenario() {
        let p = s1_params();
        let init = s1_initial(&p);
        let direct = sdd::integrate(&p, &init, 6.0, 0.005).unwrap();
        let seed = TimeMapSeed::compatible(&p, &init, 0.0, 1.0).unwrap();
        let ts = integrate_transformed(&p, &init, &seed, 4.0, 0.005).unwrap();
        let report = verify_equivalence(&direct, &ts, 400).unwrap();
        assert!(report.all_pass(), "{report}");
    }

    #[test]
    fn equivalence_catches_a_corrupted_map() {
        let p = s1_params();
        let init = s1_initial(&p);
        let direct = sdd::integrate(&p, &init, 6.0, 0.01).unwrap();
        let seed = TimeMapSeed::compatible(&p, &init, 0.0, 1.0).unwrap();
        let ts = integrate_transformed(&p, &init, &seed, 4.0, 0.01).unwrap();
        let corrupted = ts.with_alpha_shifted(0.01).unwrap();
        let report = verify_equivalence(&direct, &corrupted, 400).unwrap();
        assert!(!report.all_pass(), "corruption slipped through: {report}");
        let rebase = report.find(Claim::StateRebase).next().unwrap();
        assert!(rebase.observed > 1e-3, "{rebase}");
    }

    #[test]
    fn equivalence_requires_compatible_horizons() {
        let p = s1_params();
        let init = s1_initial(&p);
        let direct = sdd::integrate(&p, &init, 1.0, 0.01).unwrap();
        let seed = TimeMapSeed::compatible(&p, &init, 0.0, 1.0).unwrap();
        let ts = integrate_transformed(&p, &init, &seed, 6.0, 0.01).unwrap();
        assert!(matches!(
            verify_equivalence(&direct, &ts, 100),
            Err(VerifyError::HorizonMismatch { .. })
        ));
    }

    #[test]
    fn dependence_bound_holds_and_scales_linearly() {
        let p = s1_params();
        let init = s1_initial(&p);
        let deltas = [1e-2, 1e-3, 1e-4];
        let report = continuous_dependence_experiment(&p, &init, &deltas, 2.0, 0.01).unwrap();
        assert!(report.all_pass(), "{report}");
        // The bound is computed from the declared formula.
        let l_y = sdd::integrate(&p, &init, 2.0, 0.01).unwrap().state_lipschitz_estimate();
        let expected = (2.0 * 1e-2 * (1.0 + 1.0) + 1e-2) * (2.0 * (2.0f64 + 0.2).max(l_y)).exp();
        let first = report.find(Claim::DependenceBound).next().unwrap();
        assert!((first.threshold - expected).abs() <= 1e-9 * expected, "{first}");
        // Not vacuous: the observed deviation is genuinely of size δ.
        assert!(first.observed >= 1e-3, "{first}");
        // Ratios per decade sit in [5, 20].
        for check in report.find(Claim::DependenceScaling) {
            assert!(check.observed <= 2.0, "{check}");
        }
    }

    #[test]
    fn dependence_accepts_zero_delta_and_rejects_bad_lists() {
        let p = s1_params();
        let init = s1_initial(&p);
        let report = continuous_dependence_experiment(&p, &init, &[1e-3, 0.0], 1.0, 0.01).unwrap();
        assert!(report.all_pass(), "{report}");
        let zero = report.find(Claim::DependenceScaling).next().unwrap();
        assert!(zero.observed <= 1e-12, "{zero}");
        assert!(matches!(
            continuous_dependence_experiment(&p, &init, &[1e-4, 1e-3], 1.0, 0.01),
            Err(VerifyError::BadDeltas)
        ));
        assert!(matches!(
            continuous_dependence_experiment(&p, &init, &[], 1.0, 0.01),
            Err(VerifyError::BadDeltas)
        ));
        assert!(matches!(
            continuous_dependence_experiment(&p, &init, &[-1e-3], 1.0, 0.01),
            Err(VerifyError::BadDeltas)
        ));
    }

    #[test]
    fn maps_converge_as_the_data_converge() {
        let p = s1_params();
        let init = s1_initial(&p);
        let seed = TimeMapSeed::compatible(&p, &init, 0.0, 1.0).unwrap();
        let deltas = [1e-2, 1e-3, 1e-4];
        let report = alpha_convergence_experiment(&p, &init, &seed, &deltas, 4.0, 0.01).unwrap();
        assert!(report.all_pass(), "{report}");
        // Distances shrink by roughly the delta ratio: the recorded
        // ratios should be near 0.1, certainly below 0.2.
        for check in report.find(Claim::MapConvergence) {
            assert!(check.observed <= 0.2, "{check}");
            assert!(check.observed >= 0.05, "{check}");
        }
    }

    #[test]
    fn map_perturbation_is_linear_in_the_initial_delay() {
        // Zero coupling: only the perturbed initial delay moves the
        // map, and the distance must scale linearly with it.
        let (p, init, seed) = constant_case();
        let deltas = [1e-2, 1e-3, 1e-4];
        let report = alpha_convergence_experiment(&p, &init, &seed, &deltas, 4.0, 0.01).unwrap();
        assert!(report.all_pass(), "{report}");
        for check in report.find(Claim::MapConvergence) {
            assert!((check.observed - 0.1).abs() <= 0.025, "{check}");
        }
    }

    #[test]
    fn decay_rates_halve_under_the_affine_map() {
        // f = −y/2 with zero coupling: y(t) = e^{−t/2}, α(s) = s/2, so
        // z(s) = e^{−s/4}; the fitted rates must sit at 0.5 and 0.25.
        let p = Params::new(0.4, 1.0, 1, self_decay(0.5), zero_coupling(), bounds(0.5, 0.0, 0.0)).unwrap();
        let g = Trajectory::constant(&[1.0], -2.0, 0.0).unwrap();
        let init = InitialData::new(g, 1.0, 0.0, &p).unwrap();
        let direct = sdd::integrate(&p, &init, 16.0, 0.01).unwrap();
        let seed = TimeMapSeed::compatible(&p, &init, 0.0, 0.5).unwrap();
        let ts = integrate_transformed(&p, &init, &seed, 8.0, 0.01).unwrap();
        let report = stability_transfer_check(&direct, &ts).unwrap();
        assert!(report.all_pass(), "{report}");
        let fit_rate = |traj: &Trajectory<f64>, lo: f64, hi: f64| -> f64 {
            let mesh = grid::uniform(lo, hi, 100);
            let norms: Vec<f64> = mesh.iter().map(|x| traj.eval_scalar(*x).unwrap().abs()).collect();
            -log_linear_fit(&mesh, &norms).unwrap().0
        };
        let rate_t = fit_rate(direct.state(), 8.0, 16.0);
        let rate_s = fit_rate(ts.state(), 4.0, 8.0);
        assert!((rate_t - 0.5).abs() <= 0.025, "original rate {rate_t}");
        assert!((rate_s / rate_t - 0.5).abs() <= 0.05 * 0.5, "rate ratio {}", rate_s / rate_t);
    }

    #[test]
    fn growth_is_rejected_as_not_decaying() {
        let p = Params::new(0.4, 1.0, 1, self_decay(-0.1), zero_coupling(), bounds(0.1, 0.0, 0.0)).unwrap();
        let g = Trajectory::constant(&[1.0], -2.0, 0.0).unwrap();
        let init = InitialData::new(g, 1.0, 0.0, &p).unwrap();
        let direct = sdd::integrate(&p, &init, 8.0, 0.01).unwrap();
        let seed = TimeMapSeed::compatible(&p, &init, 0.0, 0.5).unwrap();
        let ts = integrate_transformed(&p, &init, &seed, 4.0, 0.01).unwrap();
        assert!(matches!(
            stability_transfer_check(&direct, &ts),
            Err(VerifyError::NotDecaying { .. })
        ));
    }

    #[test]
    fn regularity_of_the_affine_map_is_exact() {
        let (p, init, seed) = constant_case();
        let ts = integrate_transformed(&p, &init, &seed, 16.0, 0.1).unwrap();
        let report = regularity_estimates(ts.alpha()).unwrap();
        assert!(report.all_pass(), "{report}");
        let forward = report.find(Claim::ForwardRateBounded).next().unwrap();
        assert!((forward.observed - 0.5).abs() <= 1e-9, "{forward}");
        let inverse = report.find(Claim::InverseRateBounded).next().unwrap();
        assert!((inverse.observed - 2.0).abs() <= 1e-9, "{inverse}");
        // Moduli of the affine map are exactly linear in the gap.
        for row in &report.moduli {
            assert!((row.map - 0.5 * row.gap).abs() <= 1e-9, "map modulus {row:?}");
            assert!((row.inverse - 2.0 * row.gap).abs() <= 1e-6, "inverse modulus {row:?}");
            assert!(row.map_rate <= 1e-9 && row.inverse_rate <= 1e-6, "rate moduli {row:?}");
        }
    }

    #[test]
    fn regularity_estimates_hold_on_the_reference_scenario() {
        let p = s1_params();
        let init = s1_initial(&p);
        let seed = TimeMapSeed::compatible(&p, &init, 0.0, 1.0).unwrap();
        let ts = integrate_transformed(&p, &init, &seed, 8.0, 0.01).unwrap();
        let report = regularity_estimates(ts.alpha()).unwrap();
        assert!(report.all_pass(), "{report}");
        assert!(!report.moduli.is_empty());
    }

    #[test]
    fn manifold_residual_measures_the_startup_kink() {
        // Constant history with lagged feedback: ġ = 0 but f = −1.
        let p = Params::new(0.4, 1.0, 1, lag_feedback(), tanh_coupling(0.2), bounds(1.0, 0.2, 0.2))
            .unwrap()
            .assume_time_invariant();
        let init = s1_initial(&p);
        let residual = manifold_residual(&p, &init).unwrap();
        assert!((residual - 1.0).abs() <= 1e-12, "residual {residual}");

        // Without the declaration the computation is refused.
        let undeclared = s1_params();
        assert!(matches!(
            manifold_residual(&undeclared, &s1_initial(&undeclared)),
            Err(VerifyError::NotAutonomous)
        ));
    }

    #[test]
    fn exponential_data_on_the_invariant_set_has_zero_residual() {
        // Find λ < 0 with λ = −e^{−λ·η0} for η0 = 1/4 by bisection on
        // x = −λ: ln x = x/4 on [1, e].
        let eta0 = 0.25;
        let (mut lo, mut hi) = (1.0f64, std::f64::consts::E);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid.ln() - eta0 * mid < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let lambda = -0.5 * (lo + hi);
        assert!((lambda + (-lambda * eta0).exp()).abs() <= 1e-12);

        let p = Params::new(0.4, 1.0, 1, lag_feedback(), zero_coupling(), bounds(1.0, 0.0, 0.0))
            .unwrap()
            .assume_time_invariant();
        // 64 segments on [−2, 0] put a node exactly at −0.25, so the
        // delayed lookup is node-exact.
        let g = Trajectory::from_fn(-2.0, 0.0, 64, |t: f64| {
            (vec![(lambda * t).exp()], vec![lambda * (lambda * t).exp()])
        })
        .unwrap();
        let init = InitialData::new(g, eta0, 0.0, &p).unwrap();
        let residual = manifold_residual(&p, &init).unwrap();
        assert!(residual <= 1e-10, "residual {residual}");
    }

    #[test]
    fn the_invariant_set_is_preserved_by_the_flow() {
        let p = s1_params().assume_time_invariant();
        let init = s1_initial(&p);
        let sol = sdd::integrate(&p, &init, 6.0, 0.005).unwrap();
        // Rebase the data to t = lag: the flow has smoothed the kink,
        // so the shifted datum must lie on the invariant set.
        let tau = p.lag();
        let history = sol.state().restrict(tau - p.lag(), tau).unwrap();
        let eta_tau = sol.delay().eval_scalar(tau).unwrap();
        let shifted = InitialData::new(history, eta_tau, tau, &p).unwrap();
        let residual = manifold_residual(&p, &shifted).unwrap();
        assert!(residual <= 1e-6, "residual {residual}");
    }
}
