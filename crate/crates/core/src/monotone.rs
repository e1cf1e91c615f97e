//! Strictly increasing scalar trajectories and their inversion.
//!
//! [`MonotoneFn`] wraps a one-dimensional [`Trajectory`] together with a
//! certified positive lower bound on its derivative (`slope_floor`).
//! Construction verifies the bound against the interpolant itself: on each
//! segment the derivative of a cubic is a quadratic in the local
//! coordinate, so its exact minimum is available in closed form.
//!
//! Inversion runs a safeguarded Newton iteration started from the bracket
//! midpoint: every step first shrinks the bracket using the sign of the
//! residual, then takes the Newton candidate if it stays strictly inside
//! the bracket and the midpoint otherwise. The iteration stops when the
//! absolute residual drops to `1e-12` and gives up after 200 steps.

use crate::real::Real;
use crate::trajectory::{Trajectory, TrajectoryError};

/// Absolute residual tolerance for inversion.
const INVERT_TOLERANCE: f64 = 1e-12;
/// Iteration cap for inversion.
const INVERT_MAX_ITERATIONS: usize = 200;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MonotoneError {
    #[error("monotone functions must be scalar, got dimension {got}")]
    NotScalar { got: usize },
    #[error("slope floor must be positive, got {floor}")]
    NonPositiveFloor { floor: f64 },
    #[error("derivative {slope} at t = {t} falls below the slope floor {floor}")]
    SlopeBelowFloor { t: f64, slope: f64, floor: f64 },
    #[error("target {target} outside bracket values [{lo_value}, {hi_value}]")]
    BracketInvalid { target: f64, lo_value: f64, hi_value: f64 },
    #[error("no convergence after {iterations} iterations (last residual {residual})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
}

/// A strictly increasing scalar function of time with a certified slope floor.
#[derive(Debug, Clone)]
pub struct MonotoneFn<T> {
    traj: Trajectory<T>,
    slope_floor: T,
}

/// Exact minimum of the interpolant derivative over one segment.
///
/// In the local coordinate θ ∈ [0, 1] the derivative is
/// `q(θ) = Aθ² + Bθ + C` (divided by the segment width for the θ² and θ
/// terms already folded in below), so the minimum is attained at an
/// endpoint or at the vertex.
fn segment_min_slope<T: Real>(seg: &crate::trajectory::Segment<T>) -> (T, T) {
    let w = seg.width();
    let six = T::of(6.0);
    let delta = (seg.y_lo[0] - seg.y_hi[0]) / w;
    let a = six * delta + T::of(3.0) * (seg.dy_lo[0] + seg.dy_hi[0]);
    let b = -six * delta - T::of(4.0) * seg.dy_lo[0] - T::of(2.0) * seg.dy_hi[0];
    let c = seg.dy_lo[0];
    let q = |th: T| (a * th + b) * th + c;
    let mut best_th = T::zero();
    let mut best = c;
    if q(T::one()) < best {
        best = q(T::one());
        best_th = T::one();
    }
    if a > T::zero() {
        let vertex = -b / (T::of(2.0) * a);
        if vertex > T::zero() && vertex < T::one() && q(vertex) < best {
            best = q(vertex);
            best_th = vertex;
        }
    }
    (seg.t_lo + best_th * w, best)
}

impl<T: Real> MonotoneFn<T> {
    /// Wraps `traj`, verifying that its derivative never falls below
    /// `slope_floor` anywhere on the domain.
    pub fn new(traj: Trajectory<T>, slope_floor: T) -> Result<Self, MonotoneError> {
        if traj.dim() != 1 {
            return Err(MonotoneError::NotScalar { got: traj.dim() });
        }
        if !(slope_floor > T::zero()) {
            return Err(MonotoneError::NonPositiveFloor { floor: slope_floor.as_f64() });
        }
        for seg in traj.segments() {
            let (t, min_slope) = segment_min_slope(seg);
            if min_slope < slope_floor {
                return Err(MonotoneError::SlopeBelowFloor {
                    t: t.as_f64(),
                    slope: min_slope.as_f64(),
                    floor: slope_floor.as_f64(),
                });
            }
        }
        Ok(Self { traj, slope_floor })
    }

    /// Wraps `traj` using the measured minimum derivative of the
    /// interpolant as the slope floor. Fails if that minimum is not
    /// strictly positive.
    pub fn from_measured_floor(traj: Trajectory<T>) -> Result<Self, MonotoneError> {
        if traj.dim() != 1 {
            return Err(MonotoneError::NotScalar { got: traj.dim() });
        }
        let mut floor = T::infinity();
        let mut at = traj.t_min();
        for seg in traj.segments() {
            let (t, min_slope) = segment_min_slope(seg);
            if min_slope < floor {
                floor = min_slope;
                at = t;
            }
        }
        if !(floor > T::zero()) {
            return Err(MonotoneError::SlopeBelowFloor {
                t: at.as_f64(),
                slope: floor.as_f64(),
                floor: 0.0,
            });
        }
        Ok(Self { traj, slope_floor: floor })
    }

    pub fn trajectory(&self) -> &Trajectory<T> {
        &self.traj
    }

    pub fn slope_floor(&self) -> T {
        self.slope_floor
    }

    pub fn t_min(&self) -> T {
        self.traj.t_min()
    }

    pub fn t_max(&self) -> T {
        self.traj.t_max()
    }

    pub fn eval(&self, t: T) -> Result<T, MonotoneError> {
        Ok(self.traj.eval_scalar(t)?)
    }

    pub fn eval_derivative(&self, t: T) -> Result<T, MonotoneError> {
        Ok(self.traj.eval_derivative_scalar(t)?)
    }

    /// Smallest and largest value taken on the domain.
    pub fn range(&self) -> (T, T) {
        let lo = self.traj.eval_scalar(self.t_min()).expect("domain endpoint");
        let hi = self.traj.eval_scalar(self.t_max()).expect("domain endpoint");
        (lo, hi)
    }

    /// Solves `self(t) = target` for `t` within `bracket`.
    ///
    /// Requires `self(bracket.0) ≤ target ≤ self(bracket.1)`. Uses
    /// safeguarded Newton from the bracket midpoint with bisection
    /// fallback; the result satisfies `|self(t) − target| ≤ 1e-12`.
    pub fn invert(&self, target: T, bracket: (T, T)) -> Result<T, MonotoneError> {
        let (mut lo, mut hi) = bracket;
        let f_lo = self.eval(lo)?;
        let f_hi = self.eval(hi)?;
        if target < f_lo || target > f_hi {
            return Err(MonotoneError::BracketInvalid {
                target: target.as_f64(),
                lo_value: f_lo.as_f64(),
                hi_value: f_hi.as_f64(),
            });
        }
        let tol = T::of(INVERT_TOLERANCE);
        let mut x = (lo + hi).half();
        let mut residual = T::infinity();
        for _ in 0..INVERT_MAX_ITERATIONS {
            residual = self.eval(x)? - target;
            if residual.abs() <= tol {
                return Ok(x);
            }
            if residual > T::zero() {
                hi = x;
            } else {
                lo = x;
            }
            let slope = self.eval_derivative(x)?;
            let candidate = x - residual / slope;
            x = if candidate > lo && candidate < hi { candidate } else { (lo + hi).half() };
        }
        Err(MonotoneError::NoConvergence {
            iterations: INVERT_MAX_ITERATIONS,
            residual: residual.as_f64(),
        })
    }

    /// Inverts using the whole domain as the bracket.
    pub fn invert_in_domain(&self, target: T) -> Result<T, MonotoneError> {
        self.invert(target, (self.t_min(), self.t_max()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Pure bisection, deliberately ignorant of derivatives, used as the
    /// independent reference for the Newton path.
    fn bisect_oracle(f: &MonotoneFn<f64>, target: f64, mut lo: f64, mut hi: f64) -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f.eval(mid).unwrap() < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    fn sampled(f: impl Fn(f64) -> (f64, f64), lo: f64, hi: f64, segments: usize) -> Trajectory<f64> {
        Trajectory::from_fn(lo, hi, segments, |t| {
            let (v, d) = f(t);
            (vec![v], vec![d])
        })
        .unwrap()
    }

    #[test]
    fn construction_checks_the_slope_floor() {
        let line = sampled(|t| (2.0 * t, 2.0), 0.0, 1.0, 4);
        assert!(MonotoneFn::new(line.clone(), 2.0).is_ok());
        let err = MonotoneFn::new(line, 2.0 + 1e-12).unwrap_err();
        assert!(matches!(err, MonotoneError::SlopeBelowFloor { .. }));

        let flat = sampled(|_| (1.0, 0.0), 0.0, 1.0, 2);
        assert!(matches!(MonotoneFn::new(flat, 0.1), Err(MonotoneError::SlopeBelowFloor { .. })));

        let decreasing = sampled(|t| (-t, -1.0), 0.0, 1.0, 2);
        assert!(MonotoneFn::from_measured_floor(decreasing).is_err());

        let line = sampled(|t| (t, 1.0), 0.0, 1.0, 2);
        assert!(matches!(MonotoneFn::new(line, 0.0), Err(MonotoneError::NonPositiveFloor { .. })));
    }

    #[test]
    fn exact_slope_minimum_matches_dense_grid_scan() {
        // Oracle: brute-force scan of the interpolant derivative.
        let traj = sampled(|t| (t + 0.3 * (2.0 * t).sin(), 1.0 + 0.6 * (2.0 * t).cos()), 0.0, 3.0, 6);
        let mut grid_min = f64::INFINITY;
        for k in 0..=3000 {
            let t = 3.0 * k as f64 / 3000.0;
            grid_min = grid_min.min(traj.eval_derivative_scalar(t).unwrap());
        }
        let f = MonotoneFn::from_measured_floor(traj).unwrap();
        assert!((f.slope_floor() - grid_min).abs() <= 1e-6, "exact {} vs grid {grid_min}", f.slope_floor());
        assert!(f.slope_floor() <= grid_min + 1e-12, "floor must lower-bound the grid scan");
    }

    #[test]
    fn newton_matches_bisection_oracle() {
        // f(t) = t − 1 + exp(−0.4 t), increasing with slope ≥ 0.6 on [0, 4].
        let traj = sampled(|t| (t - 1.0 + (-0.4 * t).exp(), 1.0 - 0.4 * (-0.4 * t).exp()), 0.0, 4.0, 64);
        let f = MonotoneFn::new(traj, 0.6).unwrap();
        let target = 1.0;
        let newton = f.invert(target, (0.0, 4.0)).unwrap();
        let oracle = bisect_oracle(&f, target, 0.0, 4.0);
        assert!((newton - oracle).abs() <= 1e-10, "newton {newton} vs bisection {oracle}");
        assert!((f.eval(newton).unwrap() - target).abs() <= 1e-12);
    }

    #[test]
    fn inversion_is_identity_after_eval() {
        let traj = sampled(|t| (0.5 * t + 0.2 * t.sin(), 0.5 + 0.2 * t.cos()), -1.0, 5.0, 48);
        let f = MonotoneFn::new(traj, 0.1).unwrap();
        for k in 0..=60 {
            let t = -1.0 + 6.0 * k as f64 / 60.0;
            let back = f.invert_in_domain(f.eval(t).unwrap()).unwrap();
            assert!((back - t).abs() <= 1e-10, "round trip off by {} at {t}", (back - t).abs());
        }
    }

    #[test]
    fn bracket_must_contain_the_target() {
        let f = MonotoneFn::new(sampled(|t| (t, 1.0), 0.0, 1.0, 2), 0.5).unwrap();
        assert!(matches!(f.invert(2.0, (0.0, 1.0)), Err(MonotoneError::BracketInvalid { .. })));
        assert!(matches!(f.invert(-0.1, (0.0, 1.0)), Err(MonotoneError::BracketInvalid { .. })));
        assert!(matches!(f.invert(0.5, (2.0, 3.0)), Err(MonotoneError::Trajectory(_))));
    }

    #[test]
    fn reports_no_convergence_when_the_tolerance_is_unreachable() {
        // Slope 1e8: hitting |f(x) − target| ≤ 1e-12 needs x resolved to
        // 1e-20, far below f64 spacing near 0.3, so the residual floor sits
        // around 1e-9 and the iteration must give up rather than lie.
        let f = MonotoneFn::new(sampled(|t| (1e8 * t, 1e8), 0.0, 1.0, 2), 1e7).unwrap();
        let target = 0.3141592653589793 * 1e8;
        match f.invert(target, (0.0, 1.0)) {
            Err(MonotoneError::NoConvergence { iterations, .. }) => assert_eq!(iterations, 200),
            other => panic!("expected NoConvergence, got {other:?}"),
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            /// invert ∘ eval = identity within 1e-10 whenever the measured
            /// slope floor is at least 0.1.
            #[test]
            fn invert_after_eval_round_trips(
                base in 0.2f64..2.0, wobble in 0.0f64..0.5, freq in 0.3f64..2.0, probe in 0.0f64..1.0,
            ) {
                let traj = Trajectory::from_fn(0.0, 4.0, 32, |t| {
                    (vec![base * t + wobble * (freq * t).sin()], vec![base + wobble * freq * (freq * t).cos()])
                }).unwrap();
                let f = match MonotoneFn::from_measured_floor(traj) {
                    Ok(f) => f,
                    Err(_) => return Ok(()), // wobble made it non-monotone; out of contract
                };
                prop_assume!(f.slope_floor() >= 0.1);
                let t = 4.0 * probe;
                let back = f.invert_in_domain(f.eval(t).unwrap()).unwrap();
                prop_assert!((back - t).abs() <= 1e-10);
            }
        }
    }
}
