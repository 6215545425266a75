//! Structural validation of geometry values.
//!
//! `validate` returns the full list of rule violations rather than a
//! boolean so ingestion can report precisely why an entity was rejected.
//! An empty list means the geometry satisfies every invariant; empty
//! geometries validate cleanly here and are screened out separately by
//! the relation and dataset operations.

use super::{Coord, Geometry, Polygon};
use crate::topology::exact::{on_segment, point_in_ring, proper_cross, segments_touch};

/// A single validation failure, naming the rule and the offending part.
///
/// `part` is the component index inside a multi-geometry (0 for single
/// geometries); `ring` 0 is the outer ring, holes follow.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Violation {
    NonFiniteCoordinate { part: usize, ring: usize, index: usize },
    TooFewCoordinates { part: usize, ring: usize, found: usize, required: usize },
    RingNotClosed { part: usize, ring: usize },
    ZeroLength { part: usize },
    RingSelfIntersection { part: usize, ring: usize },
    HoleOutsideShell { part: usize, hole: usize },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::NonFiniteCoordinate { part, ring, index } => {
                write!(f, "NonFiniteCoordinate(part {part}, ring {ring}, index {index})")
            }
            Violation::TooFewCoordinates { part, ring, found, required } => write!(
                f,
                "TooFewCoordinates(part {part}, ring {ring}: found {found}, need {required})"
            ),
            Violation::RingNotClosed { part, ring } => {
                write!(f, "RingNotClosed(part {part}, ring {ring})")
            }
            Violation::ZeroLength { part } => write!(f, "ZeroLength(part {part})"),
            Violation::RingSelfIntersection { part, ring } => {
                write!(f, "RingSelfIntersection(part {part}, ring {ring})")
            }
            Violation::HoleOutsideShell { part, hole } => {
                write!(f, "HoleOutsideShell(part {part}, hole {hole})")
            }
        }
    }
}

/// Check every invariant of `g` and return the violations found.
pub fn validate(g: &Geometry) -> Vec<Violation> {
    let mut out = Vec::new();
    match g {
        Geometry::Point(None) => {}
        Geometry::Point(Some(c)) => check_finite(&[*c], 0, 0, &mut out),
        Geometry::MultiPoint(cs) => check_finite(cs, 0, 0, &mut out),
        Geometry::LineString(cs) => check_linestring(cs, 0, &mut out),
        Geometry::MultiLineString(parts) => {
            for (part, cs) in parts.iter().enumerate() {
                check_linestring(cs, part, &mut out);
            }
        }
        Geometry::Polygon(p) => check_polygon(p, 0, &mut out),
        Geometry::MultiPolygon(ps) => {
            for (part, p) in ps.iter().enumerate() {
                check_polygon(p, part, &mut out);
            }
        }
    }
    out
}

fn check_finite(coords: &[Coord], part: usize, ring: usize, out: &mut Vec<Violation>) {
    for (index, c) in coords.iter().enumerate() {
        if !c.is_finite() {
            out.push(Violation::NonFiniteCoordinate { part, ring, index });
        }
    }
}

fn check_linestring(coords: &[Coord], part: usize, out: &mut Vec<Violation>) {
    if coords.is_empty() {
        return;
    }
    check_finite(coords, part, 0, out);
    if coords.len() < 2 {
        out.push(Violation::TooFewCoordinates {
            part,
            ring: 0,
            found: coords.len(),
            required: 2,
        });
        return;
    }
    // Repeated vertices are allowed; a line must still have some extent.
    if coords.windows(2).all(|w| w[0] == w[1]) {
        out.push(Violation::ZeroLength { part });
    }
}

fn check_polygon(p: &Polygon, part: usize, out: &mut Vec<Violation>) {
    if p.outer.is_empty() {
        return;
    }
    let mut rings_ok = Vec::new();
    for (ring_index, ring) in p.rings().enumerate() {
        check_finite(ring, part, ring_index, out);
        if ring.iter().any(|c| !c.is_finite()) {
            rings_ok.push(false);
            continue;
        }
        if ring.len() < 4 {
            out.push(Violation::TooFewCoordinates {
                part,
                ring: ring_index,
                found: ring.len(),
                required: 4,
            });
            rings_ok.push(false);
            continue;
        }
        if ring.first() != ring.last() {
            out.push(Violation::RingNotClosed { part, ring: ring_index });
            rings_ok.push(false);
            continue;
        }
        let open = &ring[..ring.len() - 1];
        if !ring_is_simple(open) {
            out.push(Violation::RingSelfIntersection { part, ring: ring_index });
            rings_ok.push(false);
            continue;
        }
        rings_ok.push(true);
    }
    if !rings_ok[0] {
        return;
    }
    let shell = &p.outer[..p.outer.len() - 1];
    for (hole_index, hole) in p.holes.iter().enumerate() {
        if !rings_ok[hole_index + 1] {
            continue;
        }
        let open = &hole[..hole.len() - 1];
        if !hole_inside_shell(open, shell) {
            out.push(Violation::HoleOutsideShell { part, hole: hole_index });
        }
    }
}

/// A ring (open form) is simple when non-adjacent edges never meet and
/// adjacent edges share exactly their common vertex.
fn ring_is_simple(open: &[Coord]) -> bool {
    let n = open.len();
    for i in 0..n {
        if open[i] == open[(i + 1) % n] {
            return false; // degenerate zero-length edge
        }
    }
    for i in 0..n {
        let (a1, b1) = (open[i], open[(i + 1) % n]);
        for j in (i + 1)..n {
            let (a2, b2) = (open[j], open[(j + 1) % n]);
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                // The edges share one vertex; any other contact folds the ring.
                let (outer1, outer2) = if j == i + 1 { (a1, b2) } else { (b1, a2) };
                if on_segment(outer2, a1, b1) || on_segment(outer1, a2, b2) {
                    return false;
                }
            } else if segments_touch(a1, b1, a2, b2) {
                return false;
            }
        }
    }
    true
}

fn hole_inside_shell(hole_open: &[Coord], shell_open: &[Coord]) -> bool {
    if hole_open.iter().any(|v| point_in_ring(*v, shell_open) == -1) {
        return false;
    }
    let hn = hole_open.len();
    let sn = shell_open.len();
    for i in 0..hn {
        let (a, b) = (hole_open[i], hole_open[(i + 1) % hn]);
        for j in 0..sn {
            let (c, d) = (shell_open[j], shell_open[(j + 1) % sn]);
            if proper_cross(a, b, c, d) {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::parse_wkt;

    #[test]
    fn unit_square_is_valid() {
        let g = parse_wkt("POLYGON ((0 0, 1 0, 1 1, 0 1, 0 0))").unwrap();
        assert!(validate(&g).is_empty());
    }

    #[test]
    fn bow_tie_self_intersects() {
        let g = parse_wkt("POLYGON ((0 0, 2 2, 2 0, 0 2, 0 0))").unwrap();
        assert_eq!(
            validate(&g),
            vec![Violation::RingSelfIntersection { part: 0, ring: 0 }]
        );
    }

    #[test]
    fn hole_outside_outer_ring() {
        let g = parse_wkt(
            "POLYGON ((0 0, 4 0, 4 4, 0 4, 0 0), (10 10, 11 10, 11 11, 10 11, 10 10))",
        )
        .unwrap();
        assert_eq!(
            validate(&g),
            vec![Violation::HoleOutsideShell { part: 0, hole: 0 }]
        );
    }

    #[test]
    fn hole_inside_is_fine() {
        let g = parse_wkt("POLYGON ((0 0, 4 0, 4 4, 0 4, 0 0), (1 1, 2 1, 2 2, 1 2, 1 1))")
            .unwrap();
        assert!(validate(&g).is_empty());
    }

    #[test]
    fn hole_poking_through_shell_edge() {
        let g = parse_wkt("POLYGON ((0 0, 4 0, 4 4, 0 4, 0 0), (2 2, 6 2, 6 3, 2 3, 2 2))")
            .unwrap();
        assert_eq!(
            validate(&g),
            vec![Violation::HoleOutsideShell { part: 0, hole: 0 }]
        );
    }

    #[test]
    fn degenerate_flat_ring_rejected() {
        let g = parse_wkt("POLYGON ((0 0, 2 0, 1 0, 0 0))").unwrap();
        assert_eq!(
            validate(&g),
            vec![Violation::RingSelfIntersection { part: 0, ring: 0 }]
        );
    }

    #[test]
    fn zero_length_linestring() {
        let g = parse_wkt("LINESTRING (1 1, 1 1)").unwrap();
        assert_eq!(validate(&g), vec![Violation::ZeroLength { part: 0 }]);
    }

    #[test]
    fn linestring_with_repeated_interior_vertex_is_valid() {
        let g = parse_wkt("LINESTRING (0 0, 1 1, 1 1, 2 2)").unwrap();
        assert!(validate(&g).is_empty());
    }

    #[test]
    fn empty_geometries_validate() {
        assert!(validate(&parse_wkt("POINT EMPTY").unwrap()).is_empty());
        assert!(validate(&parse_wkt("POLYGON EMPTY").unwrap()).is_empty());
    }
}
