//! Interval classification of one segment against another shape.
//!
//! Events along a segment (vertex contacts, proper crossings, collinear
//! overlap endpoints) are located at exact rational parameters; between
//! consecutive events the segment stays in one region, and the region is
//! decided by local analysis at the event point using only original
//! coordinates. No constructed point is ever classified, which keeps the
//! walk exact for arbitrary f64 input.

use num_traits::{One, Zero};

use super::exact::{
    collinear_segments, cross_param, cross_point, on_segment, orient, proper_cross, rat,
    seg_param, Rat,
};
use super::shape::{AreaRepr, LineRepr, Loc};
use crate::geometry::Coord;

/// Which side of the directed segment the area's interior lies on along
/// a collinear boundary piece.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub(crate) enum Side {
    Left,
    Right,
}

/// An isolated contact point, either an original coordinate or an exact
/// rational construction (proper crossings).
#[derive(Clone, Debug)]
pub(crate) enum ContactPoint {
    Known(Coord),
    Exact(Rat, Rat),
}

impl ContactPoint {
    pub(crate) fn equals_coord(&self, c: Coord) -> bool {
        match self {
            ContactPoint::Known(k) => *k == c,
            ContactPoint::Exact(x, y) => *x == rat(c.x) && *y == rat(c.y),
        }
    }
}

#[derive(Debug)]
enum EventKind {
    /// Contact at an original coordinate.
    At(Coord),
    /// Proper crossing with this directed edge.
    Cross(Coord, Coord),
}

/// Classification of a segment `p -> q` against an area.
pub(crate) struct AreaSpans {
    /// Consecutive open spans covering (0,1), each with its region.
    pub spans: Vec<(Rat, Rat, Loc)>,
    /// Every boundary contact along the segment.
    pub contacts: Vec<(Rat, ContactPoint)>,
    /// Collinear boundary pieces (clipped, unmerged) with the area's
    /// interior side relative to the segment direction.
    pub pieces: Vec<(Rat, Rat, Side)>,
}

/// Classify segment `p -> q` (p != q) against the boundary and interior
/// of `area`.
pub(crate) fn classify_vs_area(p: Coord, q: Coord, area: &AreaRepr) -> AreaSpans {
    let zero = Rat::zero();
    let one = Rat::one();
    let mut events: Vec<(Rat, EventKind)> = Vec::new();
    let mut pieces: Vec<(Rat, Rat, Side)> = Vec::new();

    for (a, b) in area.edges() {
        if collinear_segments(p, q, a, b) {
            let ta = seg_param(p, q, a);
            let tb = seg_param(p, q, b);
            let side = if tb > ta { Side::Left } else { Side::Right };
            let (lo, hi) = if ta <= tb { (ta, tb) } else { (tb, ta) };
            let in_range = lo <= one && hi >= zero;
            let lo_clip = if lo < zero { zero.clone() } else { lo };
            let hi_clip = if hi > one { one.clone() } else { hi };
            if lo_clip < hi_clip {
                events.push((lo_clip.clone(), EventKind::At(param_point(p, q, &lo_clip, a, b))));
                events.push((hi_clip.clone(), EventKind::At(param_point(p, q, &hi_clip, a, b))));
                pieces.push((lo_clip, hi_clip, side));
            } else if lo_clip == hi_clip && in_range {
                events.push((lo_clip.clone(), EventKind::At(param_point(p, q, &lo_clip, a, b))));
            }
        } else {
            if proper_cross(p, q, a, b) {
                events.push((cross_param(p, q, a, b), EventKind::Cross(a, b)));
            }
            if on_segment(a, p, q) {
                events.push((seg_param(p, q, a), EventKind::At(a)));
            }
            if on_segment(b, p, q) {
                events.push((seg_param(p, q, b), EventKind::At(b)));
            }
            if p != a && p != b && on_segment(p, a, b) {
                events.push((zero.clone(), EventKind::At(p)));
            }
            if q != a && q != b && on_segment(q, a, b) {
                events.push((one.clone(), EventKind::At(q)));
            }
        }
    }

    events.sort_by(|(t1, _), (t2, _)| t1.cmp(t2));

    // Merged union of the boundary pieces.
    let mut union: Vec<(Rat, Rat)> = Vec::new();
    {
        let mut sorted: Vec<(Rat, Rat)> = pieces
            .iter()
            .map(|(lo, hi, _)| (lo.clone(), hi.clone()))
            .collect();
        sorted.sort_by(|a, b| a.0.cmp(&b.0));
        for (lo, hi) in sorted {
            match union.last_mut() {
                Some(last) if lo <= last.1 => {
                    if hi > last.1 {
                        last.1 = hi;
                    }
                }
                _ => union.push((lo, hi)),
            }
        }
    }
    let in_union = |t0: &Rat, t1: &Rat| union.iter().any(|(lo, hi)| lo <= t0 && t1 <= hi);

    // Breakpoints: 0, 1 and every event parameter.
    let mut params: Vec<Rat> = vec![zero.clone(), one.clone()];
    params.extend(events.iter().map(|(t, _)| t.clone()));
    params.sort();
    params.dedup();

    let mut contacts: Vec<(Rat, ContactPoint)> = Vec::new();
    for (t, kind) in &events {
        if contacts.last().is_none_or(|(lt, _)| lt != t) {
            let point = match kind {
                EventKind::At(c) => ContactPoint::Known(*c),
                EventKind::Cross(a, b) => {
                    let (x, y) = cross_point(p, q, *a, *b);
                    ContactPoint::Exact(x, y)
                }
            };
            contacts.push((t.clone(), point));
        }
    }

    let mut spans = Vec::new();
    for w in params.windows(2) {
        let (t0, t1) = (&w[0], &w[1]);
        let loc = if in_union(t0, t1) {
            Loc::Boundary
        } else if *t0 == zero && !events.iter().any(|(t, _)| t.is_zero()) {
            // No boundary contact at the start: the whole first gap sits
            // where p sits.
            area.locate(p)
        } else {
            let kinds: Vec<&EventKind> = events
                .iter()
                .filter(|(t, _)| t == t0)
                .map(|(_, k)| k)
                .collect();
            side_after(area, &kinds, q)
        };
        spans.push((t0.clone(), t1.clone(), loc));
    }

    AreaSpans {
        spans,
        contacts,
        pieces,
    }
}

/// Recover the original coordinate sitting at a clipped overlap endpoint.
fn param_point(p: Coord, q: Coord, t: &Rat, a: Coord, b: Coord) -> Coord {
    if t.is_zero() {
        return p;
    }
    if t.is_one() {
        return q;
    }
    if seg_param(p, q, a) == *t {
        a
    } else {
        debug_assert_eq!(seg_param(p, q, b), *t);
        b
    }
}

/// Region of the segment immediately after an event, looking toward `q`.
///
/// A straight segment crosses any fixed line at most once, so the side of
/// `q` relative to a supporting line through the event point is exactly
/// the side of the open gap that follows it.
fn side_after(area: &AreaRepr, kinds: &[&EventKind], q: Coord) -> Loc {
    for kind in kinds {
        match kind {
            EventKind::Cross(a, b) => {
                // Interior of the area is to the left of the directed edge.
                if orient(*a, *b, q) > 0 {
                    return Loc::Interior;
                }
            }
            EventKind::At(x) => {
                let local = area.local_structure(*x);
                for (a, b) in &local.edges_through {
                    if orient(*a, *b, q) > 0 {
                        return Loc::Interior;
                    }
                }
                for (prev, v, next) in &local.corners {
                    if ray_in_corner_interior(*prev, *v, *next, q) {
                        return Loc::Interior;
                    }
                }
            }
        }
    }
    Loc::Exterior
}

/// Is the ray `v -> q` strictly inside the polygon interior wedge at the
/// ring corner `prev -> v -> next` (interior on the left of the directed
/// edges)? The wedge sweeps counterclockwise from the outgoing direction
/// `v -> next` to the reversed incoming direction `v -> prev`.
fn ray_in_corner_interior(prev: Coord, v: Coord, next: Coord, q: Coord) -> bool {
    let turn = orient(v, next, prev);
    let against_out = orient(v, next, q);
    let against_in = orient(v, prev, q);
    if turn > 0 {
        against_out > 0 && against_in < 0
    } else if turn < 0 {
        against_out > 0 || against_in < 0
    } else {
        // Straight pass-through vertex: interior is the left half-plane.
        against_out > 0
    }
}

/// Coverage of a segment by a line set, plus its proper crossings.
pub(crate) struct LineCoverage {
    /// Any positive-length collinear shared piece.
    pub has_on: bool,
    /// The whole segment lies on the line set.
    pub covered: bool,
    /// Proper crossing points (exact).
    pub crossings: Vec<(Rat, Rat)>,
}

/// Coverage of segment `p -> q` (p != q) by the segments of `lines`.
pub(crate) fn cover_vs_lineset(p: Coord, q: Coord, lines: &LineRepr) -> LineCoverage {
    let zero = Rat::zero();
    let one = Rat::one();
    let mut pieces: Vec<(Rat, Rat)> = Vec::new();
    let mut crossings = Vec::new();
    for (a, b) in &lines.segments {
        if collinear_segments(p, q, *a, *b) {
            let ta = seg_param(p, q, *a);
            let tb = seg_param(p, q, *b);
            let (lo, hi) = if ta <= tb { (ta, tb) } else { (tb, ta) };
            let lo = if lo < zero { zero.clone() } else { lo };
            let hi = if hi > one { one.clone() } else { hi };
            if lo < hi {
                pieces.push((lo, hi));
            }
        } else if proper_cross(p, q, *a, *b) {
            crossings.push(cross_point(p, q, *a, *b));
        }
    }
    pieces.sort_by(|a, b| a.0.cmp(&b.0));
    let has_on = !pieces.is_empty();
    let mut covered_to = zero.clone();
    let mut gap = false;
    for (lo, hi) in &pieces {
        if *lo > covered_to {
            gap = true;
            break;
        }
        if *hi > covered_to {
            covered_to = hi.clone();
        }
    }
    let covered = !gap && covered_to >= one;
    LineCoverage {
        has_on,
        covered,
        crossings,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::parse_wkt;
    use crate::topology::shape::Shape;
    use num_traits::ToPrimitive;

    fn area(wkt: &str) -> AreaRepr {
        match Shape::build(&parse_wkt(wkt).unwrap()) {
            Shape::Areas(a) => a,
            _ => panic!(),
        }
    }

    fn lines(wkt: &str) -> LineRepr {
        match Shape::build(&parse_wkt(wkt).unwrap()) {
            Shape::Lines(l) => l,
            _ => panic!(),
        }
    }

    fn c(x: f64, y: f64) -> Coord {
        Coord::new(x, y)
    }

    fn locs(spans: &[(Rat, Rat, Loc)]) -> Vec<(f64, f64, Loc)> {
        spans
            .iter()
            .map(|(a, b, l)| (a.to_f64().unwrap(), b.to_f64().unwrap(), *l))
            .collect()
    }

    #[test]
    fn segment_through_square() {
        let sq = area("POLYGON ((0 0, 4 0, 4 4, 0 4, 0 0))");
        let spans = classify_vs_area(c(-2.0, 2.0), c(6.0, 2.0), &sq);
        assert_eq!(
            locs(&spans.spans),
            vec![
                (0.0, 0.25, Loc::Exterior),
                (0.25, 0.75, Loc::Interior),
                (0.75, 1.0, Loc::Exterior),
            ]
        );
        assert_eq!(spans.contacts.len(), 2);
    }

    #[test]
    fn segment_along_edge() {
        let sq = area("POLYGON ((0 0, 4 0, 4 4, 0 4, 0 0))");
        let spans = classify_vs_area(c(0.0, 0.0), c(4.0, 0.0), &sq);
        assert_eq!(locs(&spans.spans), vec![(0.0, 1.0, Loc::Boundary)]);
        assert_eq!(spans.pieces.len(), 1);
        assert_eq!(spans.pieces[0].2, Side::Left);
    }

    #[test]
    fn segment_grazing_corner_stays_outside() {
        let sq = area("POLYGON ((0 0, 4 0, 4 4, 0 4, 0 0))");
        // Diagonal through the corner (0,0), outside except at the vertex.
        let spans = classify_vs_area(c(-1.0, 1.0), c(1.0, -1.0), &sq);
        assert_eq!(
            locs(&spans.spans),
            vec![(0.0, 0.5, Loc::Exterior), (0.5, 1.0, Loc::Exterior)]
        );
        assert_eq!(spans.contacts.len(), 1);
    }

    #[test]
    fn segment_entering_through_corner() {
        let sq = area("POLYGON ((0 0, 4 0, 4 4, 0 4, 0 0))");
        let spans = classify_vs_area(c(-1.0, -1.0), c(1.0, 1.0), &sq);
        assert_eq!(
            locs(&spans.spans),
            vec![(0.0, 0.5, Loc::Exterior), (0.5, 1.0, Loc::Interior)]
        );
    }

    #[test]
    fn segment_ending_on_boundary() {
        let sq = area("POLYGON ((0 0, 4 0, 4 4, 0 4, 0 0))");
        let spans = classify_vs_area(c(2.0, 2.0), c(2.0, 0.0), &sq);
        assert_eq!(locs(&spans.spans), vec![(0.0, 1.0, Loc::Interior)]);
        assert_eq!(spans.contacts.len(), 1);
    }

    #[test]
    fn hole_side_analysis() {
        let donut = area("POLYGON ((0 0, 6 0, 6 6, 0 6, 0 0), (2 2, 4 2, 4 4, 2 4, 2 2))");
        let spans = classify_vs_area(c(1.0, 3.0), c(5.0, 3.0), &donut);
        assert_eq!(
            locs(&spans.spans),
            vec![
                (0.0, 0.25, Loc::Interior),
                (0.25, 0.75, Loc::Exterior),
                (0.75, 1.0, Loc::Interior),
            ]
        );
    }

    #[test]
    fn collinear_extension_beyond_edge() {
        let sq = area("POLYGON ((0 0, 4 0, 4 4, 0 4, 0 0))");
        // Runs along the bottom edge then continues past the corner.
        let spans = classify_vs_area(c(2.0, 0.0), c(6.0, 0.0), &sq);
        assert_eq!(
            locs(&spans.spans),
            vec![(0.0, 0.5, Loc::Boundary), (0.5, 1.0, Loc::Exterior)]
        );
    }

    #[test]
    fn line_coverage_union() {
        let l = lines("MULTILINESTRING ((0 0, 2 0), (2 0, 5 0))");
        let cov = cover_vs_lineset(c(0.0, 0.0), c(4.0, 0.0), &l);
        assert!(cov.has_on);
        assert!(cov.covered);
        let partial = cover_vs_lineset(c(0.0, 0.0), c(6.0, 0.0), &l);
        assert!(partial.has_on);
        assert!(!partial.covered);
        let cross = cover_vs_lineset(c(1.0, -1.0), c(1.0, 1.0), &l);
        assert_eq!(cross.crossings.len(), 1);
    }
}
