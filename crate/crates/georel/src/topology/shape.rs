//! Normalised internal shapes for the relation engine.
//!
//! Geometries are lowered to one of three point-set representations:
//! finite point sets, segment sets with mod-2 boundary nodes, and ring
//! sets with a uniform "interior on the left" edge orientation. The
//! lowering removes zero-length segments and duplicate points but never
//! moves a coordinate.

use num_traits::Signed;

use super::exact::{on_segment, point_in_ring, rat};
use crate::geometry::{Coord, Geometry};

/// Location of a point relative to a geometry's point set.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub(crate) enum Loc {
    Interior,
    Boundary,
    Exterior,
}

pub(crate) enum Shape {
    Points(PointsRepr),
    Lines(LineRepr),
    Areas(AreaRepr),
}

impl Shape {
    pub(crate) fn build(g: &Geometry) -> Shape {
        match g {
            Geometry::Point(Some(c)) => Shape::Points(PointsRepr::new(vec![*c])),
            Geometry::Point(None) => Shape::Points(PointsRepr::new(Vec::new())),
            Geometry::MultiPoint(cs) => Shape::Points(PointsRepr::new(cs.clone())),
            Geometry::LineString(cs) => Shape::Lines(LineRepr::new(std::slice::from_ref(cs))),
            Geometry::MultiLineString(parts) => Shape::Lines(LineRepr::new(parts)),
            Geometry::Polygon(p) => Shape::Areas(AreaRepr::new(std::slice::from_ref(p))),
            Geometry::MultiPolygon(ps) => Shape::Areas(AreaRepr::new(ps)),
        }
    }
}

/// A finite set of distinct points. Its boundary is empty.
pub(crate) struct PointsRepr {
    pub pts: Vec<Coord>,
}

impl PointsRepr {
    fn new(mut pts: Vec<Coord>) -> Self {
        let mut unique: Vec<Coord> = Vec::with_capacity(pts.len());
        for p in pts.drain(..) {
            if !unique.contains(&p) {
                unique.push(p);
            }
        }
        PointsRepr { pts: unique }
    }

    pub(crate) fn contains(&self, p: Coord) -> bool {
        self.pts.contains(&p)
    }
}

/// A set of line components as raw segments plus the mod-2 boundary.
///
/// A component endpoint is a boundary node when it occurs an odd number
/// of times as an endpoint over all components, so closed components
/// have an empty boundary.
pub(crate) struct LineRepr {
    pub segments: Vec<(Coord, Coord)>,
    pub vertices: Vec<Coord>,
    pub boundary: Vec<Coord>,
}

impl LineRepr {
    fn new(parts: &[Vec<Coord>]) -> Self {
        let mut segments = Vec::new();
        let mut vertices: Vec<Coord> = Vec::new();
        let mut endpoint_counts: Vec<(Coord, usize)> = Vec::new();
        let bump = |p: Coord, counts: &mut Vec<(Coord, usize)>| {
            if let Some(entry) = counts.iter_mut().find(|(c, _)| *c == p) {
                entry.1 += 1;
            } else {
                counts.push((p, 1));
            }
        };
        for part in parts {
            if part.len() < 2 {
                continue;
            }
            for w in part.windows(2) {
                if w[0] != w[1] {
                    segments.push((w[0], w[1]));
                }
            }
            for v in part {
                if !vertices.contains(v) {
                    vertices.push(*v);
                }
            }
            bump(*part.first().unwrap(), &mut endpoint_counts);
            bump(*part.last().unwrap(), &mut endpoint_counts);
        }
        let boundary = endpoint_counts
            .into_iter()
            .filter(|(_, n)| n % 2 == 1)
            .map(|(c, _)| c)
            .collect();
        LineRepr {
            segments,
            vertices,
            boundary,
        }
    }

    pub(crate) fn is_boundary_node(&self, p: Coord) -> bool {
        self.boundary.contains(&p)
    }

    /// Location of a point relative to this line set.
    pub(crate) fn locate(&self, p: Coord) -> Loc {
        if self.is_boundary_node(p) {
            return Loc::Boundary;
        }
        for (a, b) in &self.segments {
            if on_segment(p, *a, *b) {
                return Loc::Interior;
            }
        }
        Loc::Exterior
    }
}

/// A polygon ring in open form, oriented so the polygon interior lies to
/// the left of every directed edge.
pub(crate) struct Ring {
    pub pts: Vec<Coord>,
}

impl Ring {
    /// `closed`: ring as parsed (first == last). `interior_left_when_ccw`:
    /// shells keep CCW order, holes are reversed to CW so the interior of
    /// the polygon is on the left of the directed edges in both cases.
    fn from_closed(closed: &[Coord], is_hole: bool) -> Ring {
        let mut pts: Vec<Coord> = closed[..closed.len() - 1].to_vec();
        let ccw = signed_area_is_positive(&pts);
        let want_ccw = !is_hole;
        if ccw != want_ccw {
            pts.reverse();
        }
        Ring { pts }
    }

    pub(crate) fn edges(&self) -> impl Iterator<Item = (Coord, Coord)> + '_ {
        let n = self.pts.len();
        (0..n).map(move |i| (self.pts[i], self.pts[(i + 1) % n]))
    }
}

/// Exact sign of the shoelace sum; true when the open ring is CCW.
fn signed_area_is_positive(open: &[Coord]) -> bool {
    let n = open.len();
    let mut sum = rat(0.0);
    for i in 0..n {
        let a = open[i];
        let b = open[(i + 1) % n];
        sum += rat(a.x) * rat(b.y) - rat(b.x) * rat(a.y);
    }
    sum.is_positive()
}

pub(crate) struct AreaComponent {
    pub shell: Ring,
    pub holes: Vec<Ring>,
}

/// A set of polygon components with oriented rings.
pub(crate) struct AreaRepr {
    pub components: Vec<AreaComponent>,
}

/// Local boundary structure of an area at one of its boundary points.
#[derive(Default)]
pub(crate) struct LocalStructure {
    /// Directed edges whose relative interior contains the point
    /// (polygon interior on the left).
    pub edges_through: Vec<(Coord, Coord)>,
    /// Ring corners `(prev, v, next)` with `v` equal to the point.
    pub corners: Vec<(Coord, Coord, Coord)>,
}

impl AreaRepr {
    fn new(polys: &[crate::geometry::Polygon]) -> Self {
        let components = polys
            .iter()
            .filter(|p| !p.outer.is_empty())
            .map(|p| AreaComponent {
                shell: Ring::from_closed(&p.outer, false),
                holes: p
                    .holes
                    .iter()
                    .map(|h| Ring::from_closed(h, true))
                    .collect(),
            })
            .collect();
        AreaRepr { components }
    }

    pub(crate) fn rings(&self) -> impl Iterator<Item = &Ring> {
        self.components
            .iter()
            .flat_map(|c| std::iter::once(&c.shell).chain(c.holes.iter()))
    }

    /// All directed boundary edges, polygon interior on the left.
    pub(crate) fn edges(&self) -> impl Iterator<Item = (Coord, Coord)> + '_ {
        self.rings().flat_map(|r| r.edges())
    }

    /// Exact point location against the full component set.
    pub(crate) fn locate(&self, p: Coord) -> Loc {
        let mut inside_any = false;
        for comp in &self.components {
            match point_in_ring(p, &comp.shell.pts) {
                0 => return Loc::Boundary,
                -1 => continue,
                _ => {}
            }
            let mut in_hole = false;
            for hole in &comp.holes {
                match point_in_ring(p, &hole.pts) {
                    0 => return Loc::Boundary,
                    1 => {
                        in_hole = true;
                        break;
                    }
                    _ => {}
                }
            }
            if !in_hole {
                inside_any = true;
            }
        }
        if inside_any {
            Loc::Interior
        } else {
            Loc::Exterior
        }
    }

    /// Collect every edge and corner incident to a boundary point `x`.
    pub(crate) fn local_structure(&self, x: Coord) -> LocalStructure {
        let mut structure = LocalStructure::default();
        for ring in self.rings() {
            let n = ring.pts.len();
            for i in 0..n {
                let v = ring.pts[i];
                if v == x {
                    structure.corners.push((
                        ring.pts[(i + n - 1) % n],
                        v,
                        ring.pts[(i + 1) % n],
                    ));
                }
            }
            for (a, b) in ring.edges() {
                if x != a && x != b && on_segment(x, a, b) {
                    structure.edges_through.push((a, b));
                }
            }
        }
        structure
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::parse_wkt;

    fn area(wkt: &str) -> AreaRepr {
        match Shape::build(&parse_wkt(wkt).unwrap()) {
            Shape::Areas(a) => a,
            _ => panic!("not an area"),
        }
    }

    #[test]
    fn ring_orientation_normalised() {
        // Clockwise input shell gets reversed.
        let a = area("POLYGON ((0 0, 0 4, 4 4, 4 0, 0 0))");
        let shell = &a.components[0].shell;
        assert!(signed_area_is_positive(&shell.pts));
    }

    #[test]
    fn hole_is_clockwise() {
        let a = area("POLYGON ((0 0, 4 0, 4 4, 0 4, 0 0), (1 1, 2 1, 2 2, 1 2, 1 1))");
        let hole = &a.components[0].holes[0];
        assert!(!signed_area_is_positive(&hole.pts));
    }

    #[test]
    fn locate_with_hole() {
        let a = area("POLYGON ((0 0, 4 0, 4 4, 0 4, 0 0), (1 1, 3 1, 3 3, 1 3, 1 1))");
        assert_eq!(a.locate(Coord::new(0.5, 0.5)), Loc::Interior);
        assert_eq!(a.locate(Coord::new(2.0, 2.0)), Loc::Exterior); // inside the hole
        assert_eq!(a.locate(Coord::new(1.0, 2.0)), Loc::Boundary); // on the hole ring
        assert_eq!(a.locate(Coord::new(9.0, 9.0)), Loc::Exterior);
    }

    #[test]
    fn line_boundary_mod2() {
        let open = parse_wkt("LINESTRING (0 0, 1 0, 1 1)").unwrap();
        let closed = parse_wkt("LINESTRING (0 0, 1 0, 1 1, 0 0)").unwrap();
        match (Shape::build(&open), Shape::build(&closed)) {
            (Shape::Lines(o), Shape::Lines(c)) => {
                assert_eq!(o.boundary.len(), 2);
                assert!(c.boundary.is_empty());
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn multiline_shared_endpoint_is_interior() {
        let g = parse_wkt("MULTILINESTRING ((0 0, 1 0), (1 0, 2 0))").unwrap();
        match Shape::build(&g) {
            Shape::Lines(l) => {
                assert_eq!(l.boundary.len(), 2);
                assert!(!l.is_boundary_node(Coord::new(1.0, 0.0)));
                assert_eq!(l.locate(Coord::new(1.0, 0.0)), Loc::Interior);
            }
            _ => unreachable!(),
        }
    }
}
