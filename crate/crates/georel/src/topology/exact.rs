//! Geometric predicates with exact fallbacks.
//!
//! The orientation test runs a floating-point filter first (Shewchuk's
//! stage-A error bound) and falls back to arbitrary-precision integer
//! arithmetic when the filter cannot certify the sign. Event parameters
//! along a segment are exact rationals, so ordering intersection events
//! never depends on rounded constructions. Equals-synthesis produces
//! collinear interpolated vertices that sit exactly on their segments;
//! anything less than exact sign evaluation misclassifies those inputs.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::geometry::Coord;

pub(crate) type Rat = BigRational;

/// Exact conversion; callers guarantee finite input.
pub(crate) fn rat(v: f64) -> Rat {
    BigRational::from_float(v).expect("finite coordinate")
}

const EPSILON: f64 = f64::EPSILON / 2.0;
const CCW_ERRBOUND_A: f64 = (3.0 + 16.0 * EPSILON) * EPSILON;

fn sign(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// Decompose a finite f64 into `mantissa * 2^exp` with integer mantissa.
fn decompose(v: f64) -> (i64, i64) {
    if v == 0.0 {
        return (0, 0);
    }
    let bits = v.to_bits();
    let negative = (bits >> 63) == 1;
    let exp_bits = ((bits >> 52) & 0x7ff) as i64;
    let frac = (bits & ((1u64 << 52) - 1)) as i64;
    let (mut mantissa, exp) = if exp_bits == 0 {
        (frac, -1074)
    } else {
        (frac | (1 << 52), exp_bits - 1075)
    };
    if negative {
        mantissa = -mantissa;
    }
    (mantissa, exp)
}

/// Exact difference `a - b` as `BigInt * 2^exp`.
fn exact_diff(a: f64, b: f64) -> (BigInt, i64) {
    let (ma, ea) = decompose(a);
    let (mb, eb) = decompose(b);
    let e = ea.min(eb);
    let big_a = BigInt::from(ma) << (ea - e) as usize;
    let big_b = BigInt::from(mb) << (eb - e) as usize;
    (big_a - big_b, e)
}

fn exact_orient(a: Coord, b: Coord, c: Coord) -> i8 {
    let (m1, e1) = exact_diff(a.x, c.x);
    let (m2, e2) = exact_diff(b.y, c.y);
    let (m3, e3) = exact_diff(a.y, c.y);
    let (m4, e4) = exact_diff(b.x, c.x);
    let left = m1 * m2;
    let right = m3 * m4;
    let el = e1 + e2;
    let er = e3 + e4;
    let e = el.min(er);
    let det = (left << (el - e) as usize) - (right << (er - e) as usize);
    if det.is_positive() {
        1
    } else if det.is_negative() {
        -1
    } else {
        0
    }
}

/// Sign of the cross product `(b - a) x (c - a)`.
///
/// `1` when `c` lies to the left of the directed line `a -> b`, `-1` to
/// the right, `0` when the three points are exactly collinear. The sign
/// is always the true sign of the real-arithmetic determinant.
pub(crate) fn orient(a: Coord, b: Coord, c: Coord) -> i8 {
    let detleft = (a.x - c.x) * (b.y - c.y);
    let detright = (a.y - c.y) * (b.x - c.x);
    let det = detleft - detright;

    let detsum = if detleft > 0.0 {
        if detright <= 0.0 {
            return sign(det);
        }
        detleft + detright
    } else if detleft < 0.0 {
        if detright >= 0.0 {
            return sign(det);
        }
        -detleft - detright
    } else {
        // detleft is exactly zero, so det == -detright with no cancellation.
        return sign(det);
    };

    let errbound = CCW_ERRBOUND_A * detsum;
    if det >= errbound || -det >= errbound {
        return sign(det);
    }
    exact_orient(a, b, c)
}

fn pts_eq(a: Coord, b: Coord) -> bool {
    a.x == b.x && a.y == b.y
}

/// Is `p` on the closed segment `a..b`? Exact.
pub(crate) fn on_segment(p: Coord, a: Coord, b: Coord) -> bool {
    if pts_eq(a, b) {
        return pts_eq(p, a);
    }
    if orient(a, b, p) != 0 {
        return false;
    }
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Do `a..b` and `c..d` cross at a single point interior to both?
pub(crate) fn proper_cross(a: Coord, b: Coord, c: Coord, d: Coord) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    (o1 as i32) * (o2 as i32) < 0 && (o3 as i32) * (o4 as i32) < 0
}

/// Are the segments on one common line? (`a != b` assumed.)
pub(crate) fn collinear_segments(a: Coord, b: Coord, c: Coord, d: Coord) -> bool {
    orient(a, b, c) == 0 && orient(a, b, d) == 0
}

/// Do the closed segments share at least one point?
pub(crate) fn segments_touch(a: Coord, b: Coord, c: Coord, d: Coord) -> bool {
    proper_cross(a, b, c, d)
        || on_segment(c, a, b)
        || on_segment(d, a, b)
        || on_segment(a, c, d)
        || on_segment(b, c, d)
}

/// Exact parameter of `v` along `p -> q`, where `v` is known to be on the
/// line through `p` and `q`. Measured on the dominant axis so the result
/// is a ratio of exactly representable differences.
pub(crate) fn seg_param(p: Coord, q: Coord, v: Coord) -> Rat {
    let dx = (q.x - p.x).abs();
    let dy = (q.y - p.y).abs();
    if dx >= dy {
        (rat(v.x) - rat(p.x)) / (rat(q.x) - rat(p.x))
    } else {
        (rat(v.y) - rat(p.y)) / (rat(q.y) - rat(p.y))
    }
}

/// Exact parameter on `p -> q` of the intersection with the
/// (non-parallel) line through `a -> b`.
pub(crate) fn cross_param(p: Coord, q: Coord, a: Coord, b: Coord) -> Rat {
    let px = rat(p.x);
    let py = rat(p.y);
    let rx = rat(q.x) - &px;
    let ry = rat(q.y) - &py;
    let ax = rat(a.x);
    let ay = rat(a.y);
    let sx = rat(b.x) - &ax;
    let sy = rat(b.y) - &ay;
    // t = (a - p) x s / (r x s)
    let denom = &rx * &sy - &ry * &sx;
    debug_assert!(!denom.is_zero(), "cross_param on parallel lines");
    let num = (&ax - &px) * &sy - (&ay - &py) * &sx;
    num / denom
}

/// Exact intersection point of segment lines `p->q` and `a->b`.
pub(crate) fn cross_point(p: Coord, q: Coord, a: Coord, b: Coord) -> (Rat, Rat) {
    let t = cross_param(p, q, a, b);
    let x = rat(p.x) + &t * (rat(q.x) - rat(p.x));
    let y = rat(p.y) + &t * (rat(q.y) - rat(p.y));
    (x, y)
}

/// The floating-point midpoint of `a..b` when it happens to land exactly
/// on the segment and strictly between the endpoints. Rounding usually
/// cooperates; callers must treat `None` as "try another construction".
pub(crate) fn exact_midpoint(a: Coord, b: Coord) -> Option<Coord> {
    let m = Coord::new((a.x + b.x) / 2.0, (a.y + b.y) / 2.0);
    if m != a && m != b && orient(a, b, m) == 0 && on_segment(m, a, b) {
        Some(m)
    } else {
        None
    }
}

/// Position of a point relative to a ring given in open form (closing
/// edge implied): `0` on the boundary, `1` strictly inside (even-odd
/// rule), `-1` strictly outside.
pub(crate) fn point_in_ring(pt: Coord, ring: &[Coord]) -> i8 {
    let n = ring.len();
    let mut inside = false;
    for i in 0..n {
        let a = ring[i];
        let b = ring[(i + 1) % n];
        if on_segment(pt, a, b) {
            return 0;
        }
        if a.y <= pt.y {
            if b.y > pt.y && orient(a, b, pt) > 0 {
                inside = !inside;
            }
        } else if b.y <= pt.y && orient(a, b, pt) < 0 {
            inside = !inside;
        }
    }
    if inside {
        1
    } else {
        -1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    fn c(x: f64, y: f64) -> Coord {
        Coord::new(x, y)
    }

    fn orient_reference(a: Coord, b: Coord, c: Coord) -> i8 {
        let det = (rat(a.x) - rat(c.x)) * (rat(b.y) - rat(c.y))
            - (rat(a.y) - rat(c.y)) * (rat(b.x) - rat(c.x));
        if det.is_positive() {
            1
        } else if det.is_negative() {
            -1
        } else {
            0
        }
    }

    #[test]
    fn orient_basic() {
        assert_eq!(orient(c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)), 1);
        assert_eq!(orient(c(0.0, 0.0), c(1.0, 0.0), c(0.0, -1.0)), -1);
        assert_eq!(orient(c(0.0, 0.0), c(1.0, 1.0), c(2.0, 2.0)), 0);
    }

    #[test]
    fn orient_matches_rational_reference_on_near_degenerate_inputs() {
        // Points a hair off the diagonal; naive f64 evaluation flips signs here.
        let base = c(0.5, 0.5);
        let far = c(12.0, 12.0);
        for i in 0..64 {
            for j in 0..64 {
                let p = c(
                    0.5 + (i as f64) * f64::EPSILON,
                    0.5 + (j as f64) * f64::EPSILON,
                );
                assert_eq!(orient(base, far, p), orient_reference(base, far, p));
            }
        }
    }

    #[test]
    fn exact_midpoint_is_collinear() {
        let a = c(-89.3552, 43.124);
        let b = c(-89.355, 43.122);
        let m = c((a.x + b.x) / 2.0, (a.y + b.y) / 2.0);
        // Not guaranteed exactly on the ab line, but the verdict must agree
        // with the rational reference either way.
        assert_eq!(orient(a, b, m), orient_reference(a, b, m));
    }

    #[test]
    fn on_segment_endpoints_and_interior() {
        let a = c(0.0, 0.0);
        let b = c(4.0, 2.0);
        assert!(on_segment(a, a, b));
        assert!(on_segment(b, a, b));
        assert!(on_segment(c(2.0, 1.0), a, b));
        assert!(!on_segment(c(2.0, 1.0000000001), a, b));
        assert!(!on_segment(c(6.0, 3.0), a, b));
    }

    #[test]
    fn proper_cross_cases() {
        assert!(proper_cross(
            c(0.0, 0.0),
            c(2.0, 2.0),
            c(0.0, 2.0),
            c(2.0, 0.0)
        ));
        // Sharing an endpoint is not a proper crossing.
        assert!(!proper_cross(
            c(0.0, 0.0),
            c(2.0, 2.0),
            c(2.0, 2.0),
            c(4.0, 0.0)
        ));
    }

    #[test]
    fn seg_param_is_exact() {
        let p = c(0.0, 0.0);
        let q = c(8.0, 4.0);
        let t = seg_param(p, q, c(2.0, 1.0));
        assert_eq!(t.to_f64().unwrap(), 0.25);
    }

    #[test]
    fn cross_param_midpoint() {
        let t = cross_param(c(0.0, 0.0), c(2.0, 2.0), c(0.0, 2.0), c(2.0, 0.0));
        assert_eq!(t.to_f64().unwrap(), 0.5);
    }

    #[test]
    fn point_in_ring_rule() {
        let ring = [c(0.0, 0.0), c(4.0, 0.0), c(4.0, 4.0), c(0.0, 4.0)];
        assert_eq!(point_in_ring(c(2.0, 2.0), &ring), 1);
        assert_eq!(point_in_ring(c(4.0, 2.0), &ring), 0);
        assert_eq!(point_in_ring(c(0.0, 0.0), &ring), 0);
        assert_eq!(point_in_ring(c(5.0, 2.0), &ring), -1);
        // Ray through a vertex.
        assert_eq!(point_in_ring(c(-1.0, 0.0), &ring), -1);
        assert_eq!(point_in_ring(c(2.0, 0.0), &ring), 0);
    }

    #[test]
    fn point_in_concave_ring() {
        let ring = [
            c(0.0, 0.0),
            c(6.0, 0.0),
            c(6.0, 6.0),
            c(3.0, 2.0),
            c(0.0, 6.0),
        ];
        assert_eq!(point_in_ring(c(3.0, 4.0), &ring), -1);
        assert_eq!(point_in_ring(c(1.0, 1.0), &ring), 1);
        assert_eq!(point_in_ring(c(3.0, 1.0), &ring), 1);
    }
}
