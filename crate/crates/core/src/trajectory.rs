//! Piecewise cubic-Hermite trajectories.
//!
//! A [`Trajectory`] stores a vector-valued function of time as contiguous
//! cubic segments, each determined by its endpoint values and endpoint
//! derivatives:
//!
//! ```text
//! p(θ) = h00(θ)·y_lo + h10(θ)·w·dy_lo + h01(θ)·y_hi + h11(θ)·w·dy_hi
//! θ = (t − t_lo)/w,   w = t_hi − t_lo
//! ```
//!
//! with the usual Hermite basis `h00 = 2θ³−3θ²+1`, `h10 = θ³−2θ²+θ`,
//! `h01 = −2θ³+3θ²`, `h11 = θ³−θ²`. Segments join continuously in value;
//! derivatives may jump at joins (solver output keeps the kink that delay
//! equations propagate from the initial time). Evaluation at a join uses
//! the right-hand segment, so [`Trajectory::eval_derivative`] returns the
//! right-hand derivative there.
//!
//! Evaluation outside the stored domain is an error, never an
//! extrapolation.

use crate::real::Real;

/// Errors for trajectory construction and evaluation.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TrajectoryError {
    #[error("time {t} outside trajectory domain [{t_min}, {t_max}]")]
    OutOfDomain { t: f64, t_min: f64, t_max: f64 },
    #[error("at least two nodes are required, got {got}")]
    TooFewNodes { got: usize },
    #[error("node times must be strictly increasing (violated at index {index})")]
    NonIncreasingTimes { index: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("segment join at t = {t} is discontinuous (value gap {gap})")]
    DiscontinuousJoin { t: f64, gap: f64 },
    #[error("requested window [{lo}, {hi}] is empty or reversed")]
    EmptyWindow { lo: f64, hi: f64 },
}

/// One cubic piece of a trajectory in Hermite (endpoint value/derivative) form.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment<T> {
    pub t_lo: T,
    pub t_hi: T,
    pub y_lo: Vec<T>,
    pub y_hi: Vec<T>,
    pub dy_lo: Vec<T>,
    pub dy_hi: Vec<T>,
}

impl<T: Real> Segment<T> {
    pub fn width(&self) -> T {
        self.t_hi - self.t_lo
    }

    /// Evaluates the cubic at `t` without any domain check.
    ///
    /// For `t` outside `[t_lo, t_hi]` this is the extrapolated cubic; the
    /// solvers use that only as a predictor when a step must look a few
    /// microsteps ahead of the committed trajectory.
    pub fn eval_into(&self, t: T, out: &mut [T]) {
        let w = self.width();
        let th = (t - self.t_lo) / w;
        let th2 = th * th;
        let th3 = th2 * th;
        let two = T::of(2.0);
        let three = T::of(3.0);
        let h00 = two * th3 - three * th2 + T::one();
        let h10 = th3 - two * th2 + th;
        let h01 = -two * th3 + three * th2;
        let h11 = th3 - th2;
        for i in 0..out.len() {
            out[i] = h00 * self.y_lo[i] + h10 * w * self.dy_lo[i] + h01 * self.y_hi[i] + h11 * w * self.dy_hi[i];
        }
    }

    /// Evaluates the cubic's derivative at `t` without any domain check.
    pub fn eval_derivative_into(&self, t: T, out: &mut [T]) {
        let w = self.width();
        let th = (t - self.t_lo) / w;
        let th2 = th * th;
        let two = T::of(2.0);
        let three = T::of(3.0);
        let four = T::of(4.0);
        let six = T::of(6.0);
        let g00 = (six * th2 - six * th) / w;
        let g10 = three * th2 - four * th + T::one();
        let g01 = (-six * th2 + six * th) / w;
        let g11 = three * th2 - two * th;
        for i in 0..out.len() {
            out[i] = g00 * self.y_lo[i] + g10 * self.dy_lo[i] + g01 * self.y_hi[i] + g11 * self.dy_hi[i];
        }
    }

}

/// Piecewise cubic-Hermite function of time with vector values.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    dim: usize,
    segments: Vec<Segment<T>>,
}

impl<T: Real> Trajectory<T> {
    /// Builds a trajectory through the given nodes with prescribed node
    /// derivatives, one segment per consecutive node pair.
    pub fn from_nodes(times: &[T], values: &[Vec<T>], derivatives: &[Vec<T>]) -> Result<Self, TrajectoryError> {
        if times.len() < 2 {
            return Err(TrajectoryError::TooFewNodes { got: times.len() });
        }
        if values.len() != times.len() || derivatives.len() != times.len() {
            return Err(TrajectoryError::DimensionMismatch {
                expected: times.len(),
                got: values.len().min(derivatives.len()),
            });
        }
        let dim = values[0].len();
        if dim == 0 {
            return Err(TrajectoryError::DimensionMismatch { expected: 1, got: 0 });
        }
        for row in values.iter().chain(derivatives.iter()) {
            if row.len() != dim {
                return Err(TrajectoryError::DimensionMismatch { expected: dim, got: row.len() });
            }
        }
        let mut segments = Vec::with_capacity(times.len() - 1);
        for i in 0..times.len() - 1 {
            if !(times[i + 1] > times[i]) {
                return Err(TrajectoryError::NonIncreasingTimes { index: i + 1 });
            }
            segments.push(Segment {
                t_lo: times[i],
                t_hi: times[i + 1],
                y_lo: values[i].clone(),
                y_hi: values[i + 1].clone(),
                dy_lo: derivatives[i].clone(),
                dy_hi: derivatives[i + 1].clone(),
            });
        }
        Ok(Self { dim, segments })
    }

    /// Constant function on `[t_lo, t_hi]`.
    pub fn constant(value: &[T], t_lo: T, t_hi: T) -> Result<Self, TrajectoryError> {
        let zero = vec![T::zero(); value.len()];
        Self::from_nodes(&[t_lo, t_hi], &[value.to_vec(), value.to_vec()], &[zero.clone(), zero])
    }

    /// Samples a C¹ function (value and derivative) on a uniform mesh of
    /// `segments` pieces over `[t_lo, t_hi]`.
    pub fn from_fn(
        t_lo: T,
        t_hi: T,
        segments: usize,
        f: impl Fn(T) -> (Vec<T>, Vec<T>),
    ) -> Result<Self, TrajectoryError> {
        if segments == 0 {
            return Err(TrajectoryError::TooFewNodes { got: 1 });
        }
        let n = segments + 1;
        let mut times = Vec::with_capacity(n);
        let mut values = Vec::with_capacity(n);
        let mut derivs = Vec::with_capacity(n);
        for i in 0..n {
            let frac = T::from_usize(i).expect("mesh index") / T::from_usize(segments).expect("mesh size");
            // Hit the right endpoint exactly rather than by accumulation.
            let t = if i == segments { t_hi } else { t_lo + (t_hi - t_lo) * frac };
            let (v, d) = f(t);
            times.push(t);
            values.push(v);
            derivs.push(d);
        }
        Self::from_nodes(&times, &values, &derivs)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn t_min(&self) -> T {
        self.segments[0].t_lo
    }

    pub fn t_max(&self) -> T {
        self.segments[self.segments.len() - 1].t_hi
    }

    pub fn segments(&self) -> &[Segment<T>] {
        &self.segments
    }

    /// All segment boundary times, in increasing order (the output mesh).
    pub fn node_times(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.segments.len() + 1);
        out.push(self.segments[0].t_lo);
        for seg in &self.segments {
            out.push(seg.t_hi);
        }
        out
    }

    fn check_domain(&self, t: T) -> Result<(), TrajectoryError> {
        if t < self.t_min() || t > self.t_max() || !t.is_finite() {
            return Err(TrajectoryError::OutOfDomain {
                t: t.as_f64(),
                t_min: self.t_min().as_f64(),
                t_max: self.t_max().as_f64(),
            });
        }
        Ok(())
    }

    /// Index of the segment evaluating `t`; the right-hand segment at joins.
    fn segment_index(&self, t: T) -> usize {
        let idx = self.segments.partition_point(|seg| seg.t_hi <= t);
        idx.min(self.segments.len() - 1)
    }

    pub fn eval_into(&self, t: T, out: &mut [T]) -> Result<(), TrajectoryError> {
        self.check_domain(t)?;
        if out.len() != self.dim {
            return Err(TrajectoryError::DimensionMismatch { expected: self.dim, got: out.len() });
        }
        self.segments[self.segment_index(t)].eval_into(t, out);
        Ok(())
    }

    pub fn eval(&self, t: T) -> Result<Vec<T>, TrajectoryError> {
        let mut out = vec![T::zero(); self.dim];
        self.eval_into(t, &mut out)?;
        Ok(out)
    }

    /// Derivative of the interpolant; the right-hand derivative at joins.
    pub fn eval_derivative_into(&self, t: T, out: &mut [T]) -> Result<(), TrajectoryError> {
        self.check_domain(t)?;
        if out.len() != self.dim {
            return Err(TrajectoryError::DimensionMismatch { expected: self.dim, got: out.len() });
        }
        self.segments[self.segment_index(t)].eval_derivative_into(t, out);
        Ok(())
    }

    pub fn eval_derivative(&self, t: T) -> Result<Vec<T>, TrajectoryError> {
        let mut out = vec![T::zero(); self.dim];
        self.eval_derivative_into(t, &mut out)?;
        Ok(out)
    }

    /// Value of a one-dimensional trajectory.
    pub fn eval_scalar(&self, t: T) -> Result<T, TrajectoryError> {
        if self.dim != 1 {
            return Err(TrajectoryError::DimensionMismatch { expected: 1, got: self.dim });
        }
        let mut out = [T::zero()];
        self.check_domain(t)?;
        self.segments[self.segment_index(t)].eval_into(t, &mut out);
        Ok(out[0])
    }

    /// Derivative of a one-dimensional trajectory.
    pub fn eval_derivative_scalar(&self, t: T) -> Result<T, TrajectoryError> {
        if self.dim != 1 {
            return Err(TrajectoryError::DimensionMismatch { expected: 1, got: self.dim });
        }
        let mut out = [T::zero()];
        self.check_domain(t)?;
        self.segments[self.segment_index(t)].eval_derivative_into(t, &mut out);
        Ok(out[0])
    }

    /// Restriction to `[lo, hi]`. Boundary segments are re-expressed in
    /// Hermite form on the clipped interval; a cubic restricted to a
    /// sub-interval is the same cubic, so this is exact up to round-off.
    pub fn restrict(&self, lo: T, hi: T) -> Result<Self, TrajectoryError> {
        if !(hi > lo) {
            return Err(TrajectoryError::EmptyWindow { lo: lo.as_f64(), hi: hi.as_f64() });
        }
        self.check_domain(lo)?;
        self.check_domain(hi)?;
        let mut segments = Vec::new();
        for seg in &self.segments {
            if seg.t_hi <= lo || seg.t_lo >= hi {
                continue;
            }
            let a = seg.t_lo.max(lo);
            let b = seg.t_hi.min(hi);
            if !(b > a) {
                continue;
            }
            if a == seg.t_lo && b == seg.t_hi {
                segments.push(seg.clone());
                continue;
            }
            let mut clipped = Segment {
                t_lo: a,
                t_hi: b,
                y_lo: vec![T::zero(); self.dim],
                y_hi: vec![T::zero(); self.dim],
                dy_lo: vec![T::zero(); self.dim],
                dy_hi: vec![T::zero(); self.dim],
            };
            let (mut y_lo, mut y_hi) = (vec![T::zero(); self.dim], vec![T::zero(); self.dim]);
            let (mut dy_lo, mut dy_hi) = (vec![T::zero(); self.dim], vec![T::zero(); self.dim]);
            seg.eval_into(a, &mut y_lo);
            seg.eval_into(b, &mut y_hi);
            seg.eval_derivative_into(a, &mut dy_lo);
            seg.eval_derivative_into(b, &mut dy_hi);
            clipped.y_lo = y_lo;
            clipped.y_hi = y_hi;
            clipped.dy_lo = dy_lo;
            clipped.dy_hi = dy_hi;
            segments.push(clipped);
        }
        if segments.is_empty() {
            return Err(TrajectoryError::EmptyWindow { lo: lo.as_f64(), hi: hi.as_f64() });
        }
        Ok(Self { dim: self.dim, segments })
    }

    /// Largest absolute one-sided derivative over all segment endpoints,
    /// taken component-wise. For solver output whose node derivatives are
    /// right-hand-side evaluations this estimates the Lipschitz constant
    /// of the stored function.
    pub fn max_abs_node_derivative(&self) -> T {
        let mut best = T::zero();
        for seg in &self.segments {
            for d in seg.dy_lo.iter().chain(seg.dy_hi.iter()) {
                best = best.max(d.abs());
            }
        }
        best
    }
}

/// Incremental constructor used by the steppers: segments are appended
/// node by node, optionally on top of cloned history segments.
#[derive(Debug, Clone)]
pub struct TrajectoryBuilder<T> {
    dim: usize,
    segments: Vec<Segment<T>>,
    pending: Option<(T, Vec<T>, Vec<T>)>,
}

impl<T: Real> TrajectoryBuilder<T> {
    pub fn new(dim: usize) -> Self {
        Self { dim, segments: Vec::new(), pending: None }
    }

    /// Starts from an existing trajectory (cloned), ready to append past
    /// its right endpoint.
    pub fn from_history(history: &Trajectory<T>) -> Self {
        Self { dim: history.dim(), segments: history.segments.clone(), pending: None }
    }

    /// Declares the left node of the next segment.
    ///
    /// When appending after history this introduces a double node at the
    /// join: the value must agree with the history's endpoint, while the
    /// derivative may differ (right-hand derivative of the continuation).
    pub fn start(&mut self, t: T, y: &[T], dy: &[T]) -> Result<(), TrajectoryError> {
        assert_eq!(y.len(), self.dim, "node value dimension");
        assert_eq!(dy.len(), self.dim, "node derivative dimension");
        if let Some(last) = self.segments.last() {
            let dt = (t - last.t_hi).abs();
            let scale = T::one() + t.abs();
            if dt > T::of(1e-12) * scale {
                return Err(TrajectoryError::NonIncreasingTimes { index: self.segments.len() });
            }
            for i in 0..self.dim {
                let gap = (y[i] - last.y_hi[i]).abs();
                if gap > T::of(1e-9) * (T::one() + y[i].abs()) {
                    return Err(TrajectoryError::DiscontinuousJoin { t: t.as_f64(), gap: gap.as_f64() });
                }
            }
        }
        self.pending = Some((t, y.to_vec(), dy.to_vec()));
        Ok(())
    }

    /// Appends the node `(t, y, dy)`, closing a segment from the pending
    /// left node.
    pub fn push(&mut self, t: T, y: &[T], dy: &[T]) -> Result<(), TrajectoryError> {
        assert_eq!(y.len(), self.dim, "node value dimension");
        assert_eq!(dy.len(), self.dim, "node derivative dimension");
        let (t_lo, y_lo, dy_lo) = self.pending.take().expect("start() before push()");
        if !(t > t_lo) {
            return Err(TrajectoryError::NonIncreasingTimes { index: self.segments.len() });
        }
        self.segments.push(Segment {
            t_lo,
            t_hi: t,
            y_lo,
            y_hi: y.to_vec(),
            dy_lo,
            dy_hi: dy.to_vec(),
        });
        self.pending = Some((t, y.to_vec(), dy.to_vec()));
        Ok(())
    }

    pub fn finish(self) -> Trajectory<T> {
        assert!(!self.segments.is_empty(), "builder produced no segments");
        Trajectory { dim: self.dim, segments: self.segments }
    }

    /// Right endpoint of the committed segments (ignores any pending node).
    pub fn committed_t_max(&self) -> Option<T> {
        self.segments.last().map(|seg| seg.t_hi)
    }

    pub fn last_segment(&self) -> Option<&Segment<T>> {
        self.segments.last()
    }

    /// Evaluates over the committed segments only; `t` must lie inside
    /// their span. Mirrors [`Trajectory::eval_into`], including the
    /// right-segment convention at joins.
    pub fn eval_committed_into(&self, t: T, out: &mut [T]) -> Result<(), TrajectoryError> {
        let first = self.segments.first().ok_or(TrajectoryError::TooFewNodes { got: 0 })?;
        let last = self.segments.last().expect("nonempty");
        if t < first.t_lo || t > last.t_hi {
            return Err(TrajectoryError::OutOfDomain {
                t: t.as_f64(),
                t_min: first.t_lo.as_f64(),
                t_max: last.t_hi.as_f64(),
            });
        }
        let idx = self.segments.partition_point(|seg| seg.t_hi <= t);
        self.segments[idx.min(self.segments.len() - 1)].eval_into(t, out);
        Ok(())
    }

    /// Derivative counterpart of [`Self::eval_committed_into`].
    pub fn eval_committed_derivative_into(&self, t: T, out: &mut [T]) -> Result<(), TrajectoryError> {
        let first = self.segments.first().ok_or(TrajectoryError::TooFewNodes { got: 0 })?;
        let last = self.segments.last().expect("nonempty");
        if t < first.t_lo || t > last.t_hi {
            return Err(TrajectoryError::OutOfDomain {
                t: t.as_f64(),
                t_min: first.t_lo.as_f64(),
                t_max: last.t_hi.as_f64(),
            });
        }
        let idx = self.segments.partition_point(|seg| seg.t_hi <= t);
        self.segments[idx.min(self.segments.len() - 1)].eval_derivative_into(t, out);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cubic_nodes(f: impl Fn(f64) -> (f64, f64), ts: &[f64]) -> Trajectory<f64> {
        let values: Vec<Vec<f64>> = ts.iter().map(|&t| vec![f(t).0]).collect();
        let derivs: Vec<Vec<f64>> = ts.iter().map(|&t| vec![f(t).1]).collect();
        Trajectory::from_nodes(ts, &values, &derivs).unwrap()
    }

    #[test]
    fn reproduces_sampled_cubic_between_nodes() {
        // p(t) = t³ − t, sampled at {0, 0.5, 1}.
        let p = |t: f64| (t * t * t - t, 3.0 * t * t - 1.0);
        let traj = cubic_nodes(p, &[0.0, 0.5, 1.0]);
        let v = traj.eval_scalar(0.25).unwrap();
        let d = traj.eval_derivative_scalar(0.25).unwrap();
        assert!((v - (-0.234375)).abs() <= 1e-15, "value {v}");
        assert!((d - (-0.8125)).abs() <= 1e-15, "derivative {d}");
        // Dense sweep: a cubic is reproduced everywhere, not just at 0.25.
        for k in 0..=100 {
            let t = k as f64 / 100.0;
            let (want, dwant) = p(t);
            assert!((traj.eval_scalar(t).unwrap() - want).abs() <= 1e-14);
            assert!((traj.eval_derivative_scalar(t).unwrap() - dwant).abs() <= 1e-13);
        }
    }

    #[test]
    fn nodes_are_exact() {
        let p = |t: f64| (t * t * t - t, 3.0 * t * t - 1.0);
        let traj = cubic_nodes(p, &[0.0, 0.5, 1.0]);
        assert_eq!(traj.eval_scalar(0.5).unwrap(), -0.375);
        assert_eq!(traj.eval_scalar(0.0).unwrap(), 0.0);
        assert_eq!(traj.eval_scalar(1.0).unwrap(), 0.0);
    }

    #[test]
    fn out_of_domain_is_an_error() {
        let traj = Trajectory::<f64>::constant(&[1.0], 0.0, 1.0).unwrap();
        assert!(matches!(traj.eval(1.0 + 1e-9), Err(TrajectoryError::OutOfDomain { .. })));
        assert!(matches!(traj.eval(-1e-9), Err(TrajectoryError::OutOfDomain { .. })));
        assert!(traj.eval(0.0).is_ok());
        assert!(traj.eval(1.0).is_ok());
    }

    #[test]
    fn derivative_at_join_is_right_hand() {
        // Two segments meeting at t = 1 with a derivative kink: slope 1 then slope −1.
        let traj = Trajectory::from_nodes(
            &[0.0, 1.0, 2.0],
            &[vec![0.0], vec![1.0], vec![0.0]],
            &[vec![1.0], vec![-1.0], vec![1.0]],
        )
        .unwrap();
        // Right-hand segment starts with derivative −1 at the join.
        assert_eq!(traj.eval_derivative_scalar(1.0).unwrap(), -1.0);
        assert_eq!(traj.eval_scalar(1.0).unwrap(), 1.0);
    }

    #[test]
    fn builder_keeps_history_and_allows_derivative_jump() {
        let hist = Trajectory::<f64>::constant(&[2.0], -1.0, 0.0).unwrap();
        let mut b = TrajectoryBuilder::from_history(&hist);
        b.start(0.0, &[2.0], &[5.0]).unwrap(); // kink at the join: history slope 0, continuation slope 5
        b.push(1.0, &[7.0], &[5.0]).unwrap();
        let traj = b.finish();
        assert_eq!(traj.t_min(), -1.0);
        assert_eq!(traj.t_max(), 1.0);
        assert_eq!(traj.eval_scalar(-0.5).unwrap(), 2.0);
        assert_eq!(traj.eval_derivative_scalar(0.0).unwrap(), 5.0); // right-hand
        assert!((traj.eval_scalar(0.5).unwrap() - 4.5).abs() <= 1e-15);
    }

    #[test]
    fn builder_rejects_value_gap_at_join() {
        let hist = Trajectory::<f64>::constant(&[2.0], -1.0, 0.0).unwrap();
        let mut b = TrajectoryBuilder::from_history(&hist);
        let err = b.start(0.0, &[2.5], &[0.0]).unwrap_err();
        assert!(matches!(err, TrajectoryError::DiscontinuousJoin { .. }));
    }

    #[test]
    fn restriction_is_exact_on_the_clipped_cubic() {
        let p = |t: f64| (t * t * t - t, 3.0 * t * t - 1.0);
        let traj = cubic_nodes(p, &[0.0, 0.5, 1.0]);
        let cut = traj.restrict(0.2, 0.9).unwrap();
        assert_eq!(cut.t_min(), 0.2);
        assert_eq!(cut.t_max(), 0.9);
        for k in 0..=70 {
            let t = 0.2 + 0.7 * k as f64 / 70.0;
            let diff = (cut.eval_scalar(t).unwrap() - traj.eval_scalar(t).unwrap()).abs();
            assert!(diff <= 1e-15, "restriction differs by {diff} at {t}");
        }
        assert!(cut.eval(0.1).is_err());
    }

    #[test]
    fn from_fn_hits_endpoints_exactly() {
        let traj = Trajectory::from_fn(0.0, 2.0, 7, |t: f64| (vec![t.cos()], vec![-t.sin()])).unwrap();
        assert_eq!(traj.t_min(), 0.0);
        assert_eq!(traj.t_max(), 2.0);
        assert_eq!(traj.eval_scalar(2.0).unwrap(), 2.0f64.cos());
        // Between nodes the sampled cosine is reproduced to interpolation accuracy.
        let err = (traj.eval_scalar(1.05).unwrap() - 1.05f64.cos()).abs();
        assert!(err <= 1e-5, "interpolation error {err}");
    }

    #[test]
    fn rejects_bad_node_input() {
        assert!(matches!(
            Trajectory::from_nodes(&[0.0], &[vec![1.0]], &[vec![0.0]]),
            Err(TrajectoryError::TooFewNodes { .. })
        ));
        assert!(matches!(
            Trajectory::from_nodes(&[0.0, 0.0], &[vec![1.0], vec![1.0]], &[vec![0.0], vec![0.0]]),
            Err(TrajectoryError::NonIncreasingTimes { .. })
        ));
        assert!(matches!(
            Trajectory::from_nodes(&[0.0, 1.0], &[vec![1.0], vec![1.0, 2.0]], &[vec![0.0], vec![0.0]]),
            Err(TrajectoryError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn evaluation_is_deterministic() {
        let traj = Trajectory::from_fn(0.0, 1.0, 11, |t: f64| (vec![(3.1 * t).sin()], vec![3.1 * (3.1 * t).cos()])).unwrap();
        for k in 0..=50 {
            let t = k as f64 / 50.0;
            let a = traj.eval_scalar(t).unwrap();
            let b = traj.eval_scalar(t).unwrap();
            assert!(a.to_bits() == b.to_bits());
        }
    }

    #[test]
    fn generic_instantiation_compiles_for_f32() {
        let traj = Trajectory::<f32>::constant(&[1.5f32], 0.0, 1.0).unwrap();
        assert_eq!(traj.eval_scalar(0.5).unwrap(), 1.5f32);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            /// Any cubic sampled (with exact derivatives) at any node mesh is
            /// reproduced between the nodes.
            #[test]
            fn cubic_reproduction(
                a in -2.0f64..2.0, b in -2.0f64..2.0, c in -2.0f64..2.0, d in -2.0f64..2.0,
                width in 0.1f64..3.0, split in 0.05f64..0.95, probe in 0.0f64..1.0,
            ) {
                let p = |t: f64| (((a * t + b) * t + c) * t + d, (3.0 * a * t + 2.0 * b) * t + c);
                let ts = [0.0, split * width, width];
                let values: Vec<Vec<f64>> = ts.iter().map(|&t| vec![p(t).0]).collect();
                let derivs: Vec<Vec<f64>> = ts.iter().map(|&t| vec![p(t).1]).collect();
                let traj = Trajectory::from_nodes(&ts, &values, &derivs).unwrap();
                let t = probe * width;
                let scale = 1.0 + p(t).0.abs();
                prop_assert!((traj.eval_scalar(t).unwrap() - p(t).0).abs() <= 1e-12 * scale);
            }

            /// invert-free sanity: restriction never changes values.
            #[test]
            fn restriction_agrees(lo in 0.05f64..0.4, hi in 0.6f64..0.95, probe in 0.0f64..1.0) {
                let traj = Trajectory::from_fn(0.0, 1.0, 9, |t: f64| (vec![(2.0 * t).sin()], vec![2.0 * (2.0 * t).cos()])).unwrap();
                let cut = traj.restrict(lo, hi).unwrap();
                let t = lo + (hi - lo) * probe;
                prop_assert!((cut.eval_scalar(t).unwrap() - traj.eval_scalar(t).unwrap()).abs() <= 1e-13);
            }
        }
    }
}
