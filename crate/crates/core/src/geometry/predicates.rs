//! Orientation and in-circle tests.
//!
//! Both predicates are evaluated with Shewchuk's adaptive-precision
//! arithmetic, so their signs are exact for every pair of finite `f64`
//! inputs. Callers rely on exact zeros to detect collinear and cocircular
//! configurations.

use std::sync::atomic::{AtomicBool, Ordering};

use robust::Coord;

static FAULT_INCIRCLE: AtomicBool = AtomicBool::new(false);

/// Flips the sign of every in-circle evaluation in this process.
///
/// Only meant for checking that the self-test notices a broken predicate.
#[doc(hidden)]
pub fn inject_incircle_fault(enabled: bool) {
    FAULT_INCIRCLE.store(enabled, Ordering::SeqCst);
}

#[inline]
fn coord(p: [f64; 2]) -> Coord<f64> {
    Coord { x: p[0], y: p[1] }
}

/// Twice the signed area of `(a, b, c)`; positive when counter-clockwise.
#[inline]
pub fn orient2d(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    robust::orient2d(coord(a), coord(b), coord(c))
}

/// Positive when `d` lies strictly inside the circle through the
/// counter-clockwise triangle `(a, b, c)`, zero when cocircular.
#[inline]
pub fn incircle(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> f64 {
    let v = robust::incircle(coord(a), coord(b), coord(c), coord(d));
    if FAULT_INCIRCLE.load(Ordering::Relaxed) {
        -v
    } else {
        v
    }
}

/// Circumcenter of a non-degenerate triangle.
pub fn circumcenter(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> [f64; 2] {
    let bx = b[0] - a[0];
    let by = b[1] - a[1];
    let cx = c[0] - a[0];
    let cy = c[1] - a[1];
    let d = 2.0 * orient2d(a, b, c);
    let b2 = bx * bx + by * by;
    let c2 = cx * cx + cy * cy;
    [a[0] + (cy * b2 - by * c2) / d, a[1] + (bx * c2 - cx * b2) / d]
}
