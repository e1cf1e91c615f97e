//! Small mesh arithmetic helpers shared by the steppers.

use crate::real::Real;

/// Relative slack when snapping a ratio of times to an integer.
const SNAP: f64 = 1e-9;

/// Number of fixed steps of size `step` needed to cover `span`.
///
/// If `span/step` is an integer up to round-off it is taken exactly;
/// otherwise the count rounds up, so the produced mesh always reaches at
/// least `span`. Returns `None` for non-positive inputs.
pub(crate) fn steps_covering<T: Real>(span: T, step: T) -> Option<usize> {
    if !(span > T::zero()) || !(step > T::zero()) {
        return None;
    }
    let ratio = span / step;
    let rounded = ratio.round();
    let snapped = if (ratio - rounded).abs() <= T::of(SNAP) * ratio.max(T::one()) { rounded } else { ratio.ceil() };
    let n = snapped.to_usize()?;
    Some(n.max(1))
}

/// Whether `step` divides `span` exactly (up to round-off).
pub(crate) fn divides<T: Real>(span: T, step: T) -> bool {
    if !(span > T::zero()) || !(step > T::zero()) {
        return false;
    }
    let ratio = span / step;
    (ratio - ratio.round()).abs() <= T::of(SNAP) * ratio.max(T::one()) && ratio.round() >= T::one()
}

/// Uniform grid of `n + 1` points on `[lo, hi]` hitting both endpoints
/// exactly.
pub(crate) fn uniform<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    assert!(n >= 1, "grid needs at least one interval");
    let len = T::from_usize(n).expect("grid size");
    (0..=n)
        .map(|i| {
            if i == n {
                hi
            } else {
                lo + (hi - lo) * T::from_usize(i).expect("grid index") / len
            }
        })
        .collect()
}
