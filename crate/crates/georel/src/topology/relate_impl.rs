//! Matrix assembly: dimension of every interior/boundary/exterior
//! intersection for each pair of shape classes.
//!
//! Only six direct cases exist; mixed pairs with the higher-dimensional
//! operand first are computed swapped and transposed.

use super::idx::*;
use super::segclass::{classify_vs_area, cover_vs_lineset, ContactPoint, Side};
use super::shape::{AreaRepr, LineRepr, Loc, PointsRepr, Shape};
use super::IntersectionMatrix;
use crate::geometry::Dim;

pub(crate) fn relate_shapes(a: &Shape, b: &Shape) -> IntersectionMatrix {
    use Shape::*;
    match (a, b) {
        (Points(pa), Points(pb)) => points_points(pa, pb),
        (Points(pa), Lines(lb)) => points_lines(pa, lb),
        (Points(pa), Areas(ab)) => points_areas(pa, ab),
        (Lines(la), Lines(lb)) => lines_lines(la, lb),
        (Lines(la), Areas(ab)) => lines_areas(la, ab),
        (Areas(aa), Areas(ab)) => areas_areas(aa, ab),
        (Lines(la), Points(pb)) => points_lines(pb, la).transpose(),
        (Areas(aa), Points(pb)) => points_areas(pb, aa).transpose(),
        (Areas(aa), Lines(lb)) => lines_areas(lb, aa).transpose(),
    }
}

fn cell(row: Loc, col: Loc) -> usize {
    let r = match row {
        Loc::Interior => 0,
        Loc::Boundary => 1,
        Loc::Exterior => 2,
    };
    let c = match col {
        Loc::Interior => 0,
        Loc::Boundary => 1,
        Loc::Exterior => 2,
    };
    r * 3 + c
}

fn points_points(a: &PointsRepr, b: &PointsRepr) -> IntersectionMatrix {
    let mut m = IntersectionMatrix::empty_disjoint();
    for p in &a.pts {
        if b.contains(*p) {
            m.set_at_least(II, Dim::Zero);
        } else {
            m.set_at_least(IE, Dim::Zero);
        }
    }
    for p in &b.pts {
        if !a.contains(*p) {
            m.set_at_least(EI, Dim::Zero);
        }
    }
    m
}

fn points_lines(a: &PointsRepr, b: &LineRepr) -> IntersectionMatrix {
    let mut m = IntersectionMatrix::empty_disjoint();
    for p in &a.pts {
        m.set_at_least(cell(Loc::Interior, b.locate(*p)), Dim::Zero);
    }
    // A finite point set never exhausts a line's interior.
    m.set_at_least(EI, Dim::One);
    if b.boundary.iter().any(|n| !a.contains(*n)) {
        m.set_at_least(EB, Dim::Zero);
    }
    m
}

fn points_areas(a: &PointsRepr, b: &AreaRepr) -> IntersectionMatrix {
    let mut m = IntersectionMatrix::empty_disjoint();
    for p in &a.pts {
        m.set_at_least(cell(Loc::Interior, b.locate(*p)), Dim::Zero);
    }
    m.set_at_least(EI, Dim::Two);
    m.set_at_least(EB, Dim::One);
    m
}

/// Interior/boundary class of a contact point within a line set. Contact
/// points always lie on the set; only the mod-2 boundary nodes are
/// boundary.
fn line_class(lines: &LineRepr, p: &ContactPoint) -> Loc {
    if lines.boundary.iter().any(|n| p.equals_coord(*n)) {
        Loc::Boundary
    } else {
        Loc::Interior
    }
}

fn lines_lines(a: &LineRepr, b: &LineRepr) -> IntersectionMatrix {
    let mut m = IntersectionMatrix::empty_disjoint();

    let mut a_covered = true;
    for (p, q) in &a.segments {
        let cov = cover_vs_lineset(*p, *q, b);
        if cov.has_on {
            m.set_at_least(II, Dim::One);
        }
        a_covered &= cov.covered;
        for (x, y) in cov.crossings {
            let pt = ContactPoint::Exact(x, y);
            m.set_at_least(cell(line_class(a, &pt), line_class(b, &pt)), Dim::Zero);
        }
    }
    if !a_covered {
        m.set_at_least(IE, Dim::One);
    }

    let mut b_covered = true;
    for (p, q) in &b.segments {
        b_covered &= cover_vs_lineset(*p, *q, a).covered;
    }
    if !b_covered {
        m.set_at_least(EI, Dim::One);
    }

    // Vertex contacts, including endpoint-on-endpoint and endpoint-on-interior.
    for v in &a.vertices {
        let ca = if a.is_boundary_node(*v) {
            Loc::Boundary
        } else {
            Loc::Interior
        };
        m.set_at_least(cell(ca, b.locate(*v)), Dim::Zero);
    }
    for v in &b.vertices {
        let cb = if b.is_boundary_node(*v) {
            Loc::Boundary
        } else {
            Loc::Interior
        };
        m.set_at_least(cell(a.locate(*v), cb), Dim::Zero);
    }
    m
}

fn lines_areas(a: &LineRepr, b: &AreaRepr) -> IntersectionMatrix {
    let mut m = IntersectionMatrix::empty_disjoint();

    for (p, q) in &a.segments {
        let spans = classify_vs_area(*p, *q, b);
        for (_, _, loc) in &spans.spans {
            match loc {
                Loc::Interior => m.set_at_least(II, Dim::One),
                Loc::Boundary => m.set_at_least(IB, Dim::One),
                Loc::Exterior => m.set_at_least(IE, Dim::One),
            }
        }
        for (_, contact) in &spans.contacts {
            let ca = if a.boundary.iter().any(|n| contact.equals_coord(*n)) {
                Loc::Boundary
            } else {
                Loc::Interior
            };
            m.set_at_least(cell(ca, Loc::Boundary), Dim::Zero);
        }
    }

    for n in &a.boundary {
        m.set_at_least(cell(Loc::Boundary, b.locate(*n)), Dim::Zero);
    }

    // The area interior always exceeds a line; its boundary only when
    // some ring piece escapes the line set.
    m.set_at_least(EI, Dim::Two);
    let boundary_covered = b
        .rings()
        .flat_map(|r| r.edges())
        .all(|(p, q)| cover_vs_lineset(p, q, a).covered);
    if !boundary_covered {
        m.set_at_least(EB, Dim::One);
    }
    m
}

fn areas_areas(a: &AreaRepr, b: &AreaRepr) -> IntersectionMatrix {
    let mut int_a = false; // some arc of A's boundary inside B's interior
    let mut ext_a = false; // some arc of A's boundary in B's exterior
    let mut int_b = false;
    let mut ext_b = false;
    let mut same_side = false; // shared boundary piece, interiors on one side
    let mut opposite_side = false;
    let mut shared_arc = false;
    let mut isolated_contact = false;

    for (p, q) in a.edges() {
        let spans = classify_vs_area(p, q, b);
        for (_, _, loc) in &spans.spans {
            match loc {
                Loc::Interior => int_a = true,
                Loc::Exterior => ext_a = true,
                Loc::Boundary => {}
            }
        }
        // The classified segment is a directed edge of A, so A's interior
        // is on its left; the piece side reports where B's interior is.
        for (_, _, side) in &spans.pieces {
            shared_arc = true;
            match side {
                Side::Left => same_side = true,
                Side::Right => opposite_side = true,
            }
        }
        if !spans.contacts.is_empty() {
            isolated_contact = true;
        }
    }
    for (p, q) in b.edges() {
        let spans = classify_vs_area(p, q, a);
        for (_, _, loc) in &spans.spans {
            match loc {
                Loc::Interior => int_b = true,
                Loc::Exterior => ext_b = true,
                Loc::Boundary => {}
            }
        }
        if !spans.contacts.is_empty() {
            isolated_contact = true;
        }
    }

    let mut m = IntersectionMatrix::empty_disjoint();
    if int_a || int_b || same_side {
        m.set_at_least(II, Dim::Two);
    }
    if int_b {
        m.set_at_least(IB, Dim::One);
    }
    if ext_a || opposite_side || int_b {
        m.set_at_least(IE, Dim::Two);
    }
    if int_a {
        m.set_at_least(BI, Dim::One);
    }
    if shared_arc {
        m.set_at_least(BB, Dim::One);
    } else if isolated_contact {
        m.set_at_least(BB, Dim::Zero);
    }
    if ext_a {
        m.set_at_least(BE, Dim::One);
    }
    if ext_b || opposite_side || int_a {
        m.set_at_least(EI, Dim::Two);
    }
    if ext_b {
        m.set_at_least(EB, Dim::One);
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::parse_wkt;

    fn rel(a: &str, b: &str) -> String {
        let ga = parse_wkt(a).unwrap();
        let gb = parse_wkt(b).unwrap();
        crate::topology::relate(&ga, &gb).unwrap().to_string()
    }

    #[test]
    fn point_point_matrices() {
        assert_eq!(rel("POINT (1 2)", "POINT (1 2)"), "0FFFFFFF2");
        assert_eq!(rel("POINT (1 2)", "POINT (3 4)"), "FF0FFF0F2");
        assert_eq!(rel("MULTIPOINT (0 0, 1 1)", "POINT (1 1)"), "0F0FFFFF2");
    }

    #[test]
    fn point_on_line_interior_and_endpoint() {
        assert_eq!(rel("POINT (1 0)", "LINESTRING (0 0, 2 0)"), "0FFFFF102");
        assert_eq!(rel("POINT (0 0)", "LINESTRING (0 0, 2 0)"), "F0FFFF102");
        assert_eq!(rel("POINT (5 5)", "LINESTRING (0 0, 2 0)"), "FF0FFF102");
    }

    #[test]
    fn point_on_closed_line_has_no_boundary_column() {
        // A closed line has an empty boundary, so the EB entry stays F.
        assert_eq!(
            rel("POINT (0 0)", "LINESTRING (0 0, 1 0, 1 1, 0 0)"),
            "0FFFFF1F2"
        );
    }

    #[test]
    fn line_line_crossing() {
        assert_eq!(
            rel("LINESTRING (0 0, 2 2)", "LINESTRING (0 2, 2 0)"),
            "0F1FF0102"
        );
    }

    #[test]
    fn line_line_overlap() {
        assert_eq!(
            rel("LINESTRING (0 0, 2 0)", "LINESTRING (1 0, 3 0)"),
            "1010F0102"
        );
    }

    #[test]
    fn line_within_line() {
        assert_eq!(
            rel("LINESTRING (1 0, 2 0)", "LINESTRING (0 0, 3 0)"),
            "1FF0FF102"
        );
    }

    #[test]
    fn line_endpoint_touch() {
        assert_eq!(
            rel("LINESTRING (0 0, 1 1)", "LINESTRING (1 1, 2 0)"),
            "FF1F00102"
        );
    }

    #[test]
    fn line_area_cases() {
        let sq = "POLYGON ((0 0, 4 0, 4 4, 0 4, 0 0))";
        assert_eq!(rel("LINESTRING (-1 2, 5 2)", sq), "101FF0212");
        assert_eq!(rel("LINESTRING (1 1, 3 3)", sq), "1FF0FF212");
        assert_eq!(rel("LINESTRING (0 0, 4 0)", sq), "F1FF0F212");
        assert_eq!(rel("LINESTRING (1 2, 3 2)", sq), "1FF0FF212");
        assert_eq!(rel("LINESTRING (-2 -2, -1 -1)", sq), "FF1FF0212");
    }

    #[test]
    fn area_area_cases() {
        let a = "POLYGON ((0 0, 1 0, 1 1, 0 1, 0 0))";
        assert_eq!(rel(a, a), "2FFF1FFF2");
        assert_eq!(rel(a, "POLYGON ((1 0, 2 0, 2 1, 1 1, 1 0))"), "FF2F11212");
        assert_eq!(
            rel(
                "POLYGON ((0 0, 2 0, 2 2, 0 2, 0 0))",
                "POLYGON ((1 1, 3 1, 3 3, 1 3, 1 1))"
            ),
            "212101212"
        );
        assert_eq!(
            rel(a, "POLYGON ((-1 -1, 2 -1, 2 2, -1 2, -1 -1))"),
            "2FF1FF212"
        );
        assert_eq!(
            rel(a, "POLYGON ((5 5, 6 5, 6 6, 5 6, 5 5))"),
            "FF2FF1212"
        );
    }

    #[test]
    fn polygon_filling_hole_touches() {
        let donut = "POLYGON ((0 0, 6 0, 6 6, 0 6, 0 0), (2 2, 4 2, 4 4, 2 4, 2 2))";
        let plug = "POLYGON ((2 2, 4 2, 4 4, 2 4, 2 2))";
        assert_eq!(rel(plug, donut), "FF2F1F212");
    }

    #[test]
    fn polygon_in_hole_is_disjoint_interiors() {
        let donut = "POLYGON ((0 0, 6 0, 6 6, 0 6, 0 0), (2 2, 4 2, 4 4, 2 4, 2 2))";
        let inner = "POLYGON ((2.5 2.5, 3.5 2.5, 3.5 3.5, 2.5 3.5, 2.5 2.5))";
        assert_eq!(rel(inner, donut), "FF2FF1212");
    }

    #[test]
    fn multipolygon_componentwise_union() {
        let mp = "MULTIPOLYGON (((0 0, 2 0, 2 2, 0 2, 0 0)), ((5 0, 7 0, 7 2, 5 2, 5 0)))";
        assert_eq!(rel("POINT (6 1)", mp), "0FFFFF212");
        // A equals one component: boundary rests on B's boundary, interior
        // inside B's interior, and the other component fills the E row.
        assert_eq!(rel("POLYGON ((0 0, 2 0, 2 2, 0 2, 0 0))", mp), "2FFF1F212");
    }

    #[test]
    fn transpose_laws_hold_on_mixed_pairs() {
        let pairs = [
            ("POINT (1 1)", "POLYGON ((0 0, 4 0, 4 4, 0 4, 0 0))"),
            ("LINESTRING (-1 2, 5 2)", "POLYGON ((0 0, 4 0, 4 4, 0 4, 0 0))"),
            ("LINESTRING (0 0, 2 0)", "LINESTRING (1 0, 3 0)"),
        ];
        for (a, b) in pairs {
            let ga = parse_wkt(a).unwrap();
            let gb = parse_wkt(b).unwrap();
            let ab = crate::topology::relate(&ga, &gb).unwrap();
            let ba = crate::topology::relate(&gb, &ga).unwrap();
            assert_eq!(ab, ba.transpose(), "{a} vs {b}");
        }
    }
}
