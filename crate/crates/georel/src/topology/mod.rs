//! DE-9IM intersection matrices and the seven mutually-exclusive
//! topological predicates.
//!
//! [`relate`] computes the full dimension-valued 3x3 matrix for a pair of
//! geometries; [`classify`] reduces the matrix to exactly one of
//! `{equals, within, contains, overlaps, touches, crosses, disjoint}`.
//! All predicates are evaluated with exact arithmetic, so fixtures with
//! integer or short-decimal coordinates classify deterministically, as do
//! the collinear interpolated vertices produced by equals-synthesis.

pub(crate) mod exact;
mod relate_impl;
mod segclass;
pub(crate) mod shape;

use crate::geometry::{validate, Dim, GeomType, Geometry, Violation};
use serde::{Deserialize, Serialize};

/// Row/column order of the 9 entries: interior, boundary, exterior of A
/// against interior, boundary, exterior of B, row-major.
pub(crate) mod idx {
    pub const II: usize = 0;
    pub const IB: usize = 1;
    pub const IE: usize = 2;
    pub const BI: usize = 3;
    pub const BB: usize = 4;
    pub const BE: usize = 5;
    pub const EI: usize = 6;
    pub const EB: usize = 7;
    pub const EE: usize = 8;
}

/// A DE-9IM matrix: dimensions of the pairwise intersections of the
/// interiors, boundaries and exteriors of two geometries.
///
/// The canonical text form is the 9-character row-major string, e.g.
/// `"0FFFFF212"`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct IntersectionMatrix(pub(crate) [Dim; 9]);

impl IntersectionMatrix {
    pub(crate) fn empty_disjoint() -> Self {
        // Bounded geometries always share exterior in two dimensions.
        let mut m = [Dim::Empty; 9];
        m[idx::EE] = Dim::Two;
        IntersectionMatrix(m)
    }

    pub(crate) fn set_at_least(&mut self, i: usize, d: Dim) {
        if self.0[i] < d {
            self.0[i] = d;
        }
    }

    pub fn entries(&self) -> &[Dim; 9] {
        &self.0
    }

    /// Entry by (row, column) with 0 = interior, 1 = boundary, 2 = exterior.
    pub fn entry(&self, row: usize, col: usize) -> Dim {
        self.0[row * 3 + col]
    }

    /// The matrix of the swapped pair: `relate(a, b).transpose() == relate(b, a)`.
    pub fn transpose(&self) -> Self {
        let m = &self.0;
        IntersectionMatrix([m[0], m[3], m[6], m[1], m[4], m[7], m[2], m[5], m[8]])
    }

    /// Does this matrix satisfy the pattern? See [`MatrixPattern`].
    pub fn matches(&self, pattern: &MatrixPattern) -> bool {
        self.0
            .iter()
            .zip(pattern.cells.iter())
            .all(|(dim, cell)| cell.matches(*dim))
    }

    /// Parse-and-match convenience for literal pattern strings.
    pub fn matches_str(&self, pattern: &str) -> Result<bool, PatternError> {
        Ok(self.matches(&pattern.parse()?))
    }
}

impl std::fmt::Display for IntersectionMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for d in &self.0 {
            write!(f, "{}", d.as_char())?;
        }
        Ok(())
    }
}

impl std::str::FromStr for IntersectionMatrix {
    type Err = PatternError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let chars: Vec<char> = s.chars().collect();
        if chars.len() != 9 {
            return Err(PatternError::WrongLength(chars.len()));
        }
        let mut m = [Dim::Empty; 9];
        for (i, c) in chars.iter().enumerate() {
            m[i] = Dim::from_char(*c).ok_or(PatternError::BadCharacter(*c))?;
        }
        Ok(IntersectionMatrix(m))
    }
}

/// One cell of a 9-character match pattern.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum PatternCell {
    /// `*`: unconstrained.
    Any,
    /// `T`: any non-empty dimension.
    NonEmpty,
    /// `F` or an exact dimension digit.
    Exact(Dim),
}

impl PatternCell {
    fn matches(self, d: Dim) -> bool {
        match self {
            PatternCell::Any => true,
            PatternCell::NonEmpty => d != Dim::Empty,
            PatternCell::Exact(e) => d == e,
        }
    }
}

/// A 9-character DE-9IM pattern over `{T, F, *, 0, 1, 2}`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct MatrixPattern {
    cells: [PatternCell; 9],
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, thiserror::Error)]
pub enum PatternError {
    #[error("pattern must be 9 characters, got {0}")]
    WrongLength(usize),
    #[error("invalid pattern character `{0}`")]
    BadCharacter(char),
}

impl std::str::FromStr for MatrixPattern {
    type Err = PatternError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let chars: Vec<char> = s.chars().collect();
        if chars.len() != 9 {
            return Err(PatternError::WrongLength(chars.len()));
        }
        let mut cells = [PatternCell::Any; 9];
        for (i, c) in chars.iter().enumerate() {
            cells[i] = match c {
                '*' => PatternCell::Any,
                'T' | 't' => PatternCell::NonEmpty,
                other => PatternCell::Exact(
                    Dim::from_char(*other).ok_or(PatternError::BadCharacter(*other))?,
                ),
            };
        }
        Ok(MatrixPattern { cells })
    }
}

/// The seven named topological predicates, in the fixed reporting order
/// used by confusion matrices.
#[derive(
    Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum Predicate {
    Equals,
    Within,
    Contains,
    Overlaps,
    Touches,
    Crosses,
    Disjoint,
}

impl Predicate {
    pub const ALL: [Predicate; 7] = [
        Predicate::Equals,
        Predicate::Within,
        Predicate::Contains,
        Predicate::Overlaps,
        Predicate::Touches,
        Predicate::Crosses,
        Predicate::Disjoint,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Predicate::Equals => "equals",
            Predicate::Within => "within",
            Predicate::Contains => "contains",
            Predicate::Overlaps => "overlaps",
            Predicate::Touches => "touches",
            Predicate::Crosses => "crosses",
            Predicate::Disjoint => "disjoint",
        }
    }

    pub fn parse(name: &str) -> Option<Predicate> {
        match name.trim().to_ascii_lowercase().as_str() {
            "equals" => Some(Predicate::Equals),
            "within" => Some(Predicate::Within),
            "contains" => Some(Predicate::Contains),
            "overlaps" => Some(Predicate::Overlaps),
            "touches" => Some(Predicate::Touches),
            "crosses" => Some(Predicate::Crosses),
            "disjoint" => Some(Predicate::Disjoint),
            _ => None,
        }
    }

    /// The predicate describing the swapped pair: within and contains
    /// exchange, the five symmetric predicates map to themselves.
    /// `inverse(inverse(p)) == p`.
    pub fn inverse(self) -> Predicate {
        match self {
            Predicate::Within => Predicate::Contains,
            Predicate::Contains => Predicate::Within,
            other => other,
        }
    }
}

impl std::fmt::Display for Predicate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Which operand of a binary relation operation failed a precondition.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum OperandSide {
    A,
    B,
}

impl std::fmt::Display for OperandSide {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            OperandSide::A => "A",
            OperandSide::B => "B",
        })
    }
}

#[derive(Clone, PartialEq, Debug, thiserror::Error)]
pub enum RelateError {
    #[error("geometry {side} is invalid: {}", format_violations(violations))]
    InvalidGeometry {
        side: OperandSide,
        violations: Vec<Violation>,
    },
    #[error("geometry {side} is empty")]
    EmptyGeometry { side: OperandSide },
}

fn format_violations(vs: &[Violation]) -> String {
    vs.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

fn check_operand(g: &Geometry, side: OperandSide) -> Result<(), RelateError> {
    let violations = validate(g);
    if !violations.is_empty() {
        return Err(RelateError::InvalidGeometry { side, violations });
    }
    if g.is_empty() {
        return Err(RelateError::EmptyGeometry { side });
    }
    Ok(())
}

/// Compute the DE-9IM matrix for a pair of valid, non-empty geometries.
///
/// Deterministic and exact: `relate(a, b) == relate(b, a).transpose()`
/// for every valid pair. All geometry types including the Multi variants
/// are supported.
pub fn relate(a: &Geometry, b: &Geometry) -> Result<IntersectionMatrix, RelateError> {
    check_operand(a, OperandSide::A)?;
    check_operand(b, OperandSide::B)?;
    let sa = shape::Shape::build(a);
    let sb = shape::Shape::build(b);
    Ok(relate_impl::relate_shapes(&sa, &sb))
}

/// Result of [`classify`]: the single applicable predicate, or the raw
/// matrix when no predicate matched (kept for diagnostics rather than
/// being forced onto a nearest predicate).
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ClassifyOutcome {
    Predicate(Predicate),
    Undetermined(IntersectionMatrix),
}

impl ClassifyOutcome {
    pub fn predicate(self) -> Option<Predicate> {
        match self {
            ClassifyOutcome::Predicate(p) => Some(p),
            ClassifyOutcome::Undetermined(_) => None,
        }
    }
}

impl std::fmt::Display for ClassifyOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ClassifyOutcome::Predicate(p) => write!(f, "{p}"),
            ClassifyOutcome::Undetermined(m) => write!(f, "undetermined({m})"),
        }
    }
}

/// Classify a matrix into exactly one predicate.
///
/// Evaluation order enforces mutual exclusivity: equals is checked before
/// within/contains (so those two mean "but not equals"), and the
/// dimension-sensitive crosses/overlaps split follows the OGC semantics:
/// crossing lines meet in a 0-dimensional interior intersection while
/// overlapping lines share a 1-dimensional one.
pub fn classify_matrix(m: &IntersectionMatrix, dim_a: Dim, dim_b: Dim) -> ClassifyOutcome {
    use idx::*;
    let e = |i: usize| m.0[i] == Dim::Empty;
    let t = |i: usize| m.0[i] != Dim::Empty;

    // equals: T*F**FFF*
    if t(II) && e(IE) && e(BE) && e(EI) && e(EB) {
        return ClassifyOutcome::Predicate(Predicate::Equals);
    }
    // within: T*F**F***
    if t(II) && e(IE) && e(BE) {
        return ClassifyOutcome::Predicate(Predicate::Within);
    }
    // contains: T*****FF*
    if t(II) && e(EI) && e(EB) {
        return ClassifyOutcome::Predicate(Predicate::Contains);
    }
    // crosses: T*T****** (dim a < dim b), T*****T** (dim a > dim b),
    // 0******** (line/line)
    let crosses = match (dim_a, dim_b) {
        (Dim::One, Dim::One) => m.0[II] == Dim::Zero,
        (da, db) if da < db => t(II) && t(IE),
        (da, db) if da > db => t(II) && t(EI),
        _ => false,
    };
    if crosses {
        return ClassifyOutcome::Predicate(Predicate::Crosses);
    }
    // overlaps: 1*T***T** for line/line, T*T***T** for equal dimensions
    let overlaps = match (dim_a, dim_b) {
        (Dim::One, Dim::One) => m.0[II] == Dim::One && t(IE) && t(EI),
        (da, db) if da == db && da != Dim::Empty => t(II) && t(IE) && t(EI),
        _ => false,
    };
    if overlaps {
        return ClassifyOutcome::Predicate(Predicate::Overlaps);
    }
    // touches: FT*******, F**T*****, F***T****
    if e(II) && (t(IB) || t(BI) || t(BB)) {
        return ClassifyOutcome::Predicate(Predicate::Touches);
    }
    // disjoint: FF*FF****
    if e(II) && e(IB) && e(BI) && e(BB) {
        return ClassifyOutcome::Predicate(Predicate::Disjoint);
    }
    ClassifyOutcome::Undetermined(*m)
}

/// Compute the matrix for a pair and classify it.
pub fn classify(a: &Geometry, b: &Geometry) -> Result<ClassifyOutcome, RelateError> {
    let m = relate(a, b)?;
    Ok(classify_matrix(&m, a.dimension(), b.dimension()))
}

/// Relate two prebuilt shapes, skipping validation. Used by the dataset
/// builder, which validates each entity once and then classifies many
/// pairs.
pub(crate) fn relate_prebuilt(a: &shape::Shape, b: &shape::Shape) -> IntersectionMatrix {
    relate_impl::relate_shapes(a, b)
}

/// Convenience wrapper returning the predicate, treating an undetermined
/// matrix as `None`.
pub fn classify_predicate(a: &Geometry, b: &Geometry) -> Result<Option<Predicate>, RelateError> {
    Ok(classify(a, b)?.predicate())
}

use GeomType::{LineString as L, Point as P, Polygon as A};

const EQUALS_COMBOS: [(GeomType, GeomType); 3] = [(P, P), (L, L), (A, A)];
const WITHIN_COMBOS: [(GeomType, GeomType); 5] = [(P, L), (P, A), (L, L), (L, A), (A, A)];
const CONTAINS_COMBOS: [(GeomType, GeomType); 5] = [(L, P), (L, L), (A, P), (A, L), (A, A)];
const OVERLAPS_COMBOS: [(GeomType, GeomType); 2] = [(L, L), (A, A)];
const TOUCHES_COMBOS: [(GeomType, GeomType); 8] = [
    (P, L),
    (P, A),
    (L, P),
    (L, L),
    (L, A),
    (A, P),
    (A, L),
    (A, A),
];
const CROSSES_COMBOS: [(GeomType, GeomType); 3] = [(L, L), (L, A), (A, L)];
const DISJOINT_COMBOS: [(GeomType, GeomType); 9] = [
    (P, P),
    (P, L),
    (P, A),
    (L, P),
    (L, L),
    (L, A),
    (A, P),
    (A, L),
    (A, A),
];

/// The geometry type combinations a predicate can hold between, for the
/// three simple types. Disjoint applies to all nine pairs; the union of
/// the other six predicates covers 26 pairs, 35 entries counted with the
/// predicate.
pub fn valid_combinations(p: Predicate) -> &'static [(GeomType, GeomType)] {
    match p {
        Predicate::Equals => &EQUALS_COMBOS,
        Predicate::Within => &WITHIN_COMBOS,
        Predicate::Contains => &CONTAINS_COMBOS,
        Predicate::Overlaps => &OVERLAPS_COMBOS,
        Predicate::Touches => &TOUCHES_COMBOS,
        Predicate::Crosses => &CROSSES_COMBOS,
        Predicate::Disjoint => &DISJOINT_COMBOS,
    }
}

/// Is `(type_a, predicate, type_b)` one of the 35 valid combinations?
pub fn is_valid_combination(type_a: GeomType, p: Predicate, type_b: GeomType) -> bool {
    valid_combinations(p).contains(&(type_a, type_b))
}

/// All 35 `(type_a, predicate, type_b)` combinations in deterministic
/// order (predicate-major).
pub fn all_combinations() -> Vec<(GeomType, Predicate, GeomType)> {
    let mut out = Vec::with_capacity(35);
    for p in Predicate::ALL {
        for (a, b) in valid_combinations(p) {
            out.push((*a, p, *b));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::parse_wkt;

    fn rel(a: &str, b: &str) -> IntersectionMatrix {
        relate(&parse_wkt(a).unwrap(), &parse_wkt(b).unwrap()).unwrap()
    }

    fn cls(a: &str, b: &str) -> ClassifyOutcome {
        classify(&parse_wkt(a).unwrap(), &parse_wkt(b).unwrap()).unwrap()
    }

    #[test]
    fn matrix_string_round_trip() {
        let m: IntersectionMatrix = "0FFFFF212".parse().unwrap();
        assert_eq!(m.to_string(), "0FFFFF212");
        assert!("0FFFFF21".parse::<IntersectionMatrix>().is_err());
        assert!("0FFFFF21X".parse::<IntersectionMatrix>().is_err());
    }

    #[test]
    fn pattern_matching() {
        let m: IntersectionMatrix = "0FFFFF212".parse().unwrap();
        assert!(m.matches_str("T*F**F***").unwrap()); // within
        let eq: IntersectionMatrix = "2FFF1FFF2".parse().unwrap();
        assert!(eq.matches_str("T*F**FFF*").unwrap()); // equals
        let edge: IntersectionMatrix = "FF2F11212".parse().unwrap();
        assert!(!edge.matches_str("FF*FF****").unwrap()); // BB is 1, not F
        assert!(matches!(
            "T*F**F**X".parse::<MatrixPattern>(),
            Err(PatternError::BadCharacter('X'))
        ));
    }

    #[test]
    fn point_within_polygon_paper_example() {
        let m = rel(
            "POINT (-89.3551 43.123)",
            "POLYGON ((-89.3552 43.124, -89.355 43.124, -89.355 43.122, -89.3552 43.122, -89.3552 43.124))",
        );
        assert_eq!(m.to_string(), "0FFFFF212");
        let c = cls(
            "POINT (-89.3551 43.123)",
            "POLYGON ((-89.3552 43.124, -89.355 43.124, -89.355 43.122, -89.3552 43.122, -89.3552 43.124))",
        );
        assert_eq!(c, ClassifyOutcome::Predicate(Predicate::Within));
    }

    #[test]
    fn identical_squares_equal() {
        let m = rel(
            "POLYGON ((0 0, 1 0, 1 1, 0 1, 0 0))",
            "POLYGON ((0 0, 1 0, 1 1, 0 1, 0 0))",
        );
        assert_eq!(m.to_string(), "2FFF1FFF2");
        assert_eq!(
            cls(
                "POLYGON ((0 0, 1 0, 1 1, 0 1, 0 0))",
                "POLYGON ((0 0, 1 0, 1 1, 0 1, 0 0))",
            ),
            ClassifyOutcome::Predicate(Predicate::Equals)
        );
    }

    #[test]
    fn shared_edge_squares() {
        let m = rel(
            "POLYGON ((0 0, 1 0, 1 1, 0 1, 0 0))",
            "POLYGON ((1 0, 2 0, 2 1, 1 1, 1 0))",
        );
        assert_eq!(m.to_string(), "FF2F11212");
        assert_eq!(
            cls(
                "POLYGON ((0 0, 1 0, 1 1, 0 1, 0 0))",
                "POLYGON ((1 0, 2 0, 2 1, 1 1, 1 0))",
            ),
            ClassifyOutcome::Predicate(Predicate::Touches)
        );
    }

    #[test]
    fn crossing_lines() {
        assert_eq!(
            cls("LINESTRING (0 0, 2 2)", "LINESTRING (0 2, 2 0)"),
            ClassifyOutcome::Predicate(Predicate::Crosses)
        );
    }

    #[test]
    fn overlapping_lines_are_overlaps_not_crosses() {
        assert_eq!(
            cls("LINESTRING (0 0, 2 0)", "LINESTRING (1 0, 3 0)"),
            ClassifyOutcome::Predicate(Predicate::Overlaps)
        );
    }

    #[test]
    fn line_endpoint_on_line_interior_is_touches() {
        // Needs the middle touches pattern F**T*****.
        assert_eq!(
            cls("LINESTRING (0 0, 2 0)", "LINESTRING (1 0, 1 5)"),
            ClassifyOutcome::Predicate(Predicate::Touches)
        );
    }

    #[test]
    fn self_classification_is_equals() {
        for wkt in [
            "POINT (3 4)",
            "LINESTRING (0 0, 1 1, 4 1)",
            "POLYGON ((0 0, 4 0, 4 4, 0 4, 0 0))",
            "MULTIPOLYGON (((0 0, 1 0, 1 1, 0 1, 0 0)), ((5 5, 6 5, 6 6, 5 6, 5 5)))",
        ] {
            assert_eq!(
                cls(wkt, wkt),
                ClassifyOutcome::Predicate(Predicate::Equals),
                "{wkt}"
            );
        }
    }

    #[test]
    fn inverse_involution() {
        for p in Predicate::ALL {
            assert_eq!(p.inverse().inverse(), p);
        }
        assert_eq!(Predicate::Contains.inverse(), Predicate::Within);
        assert_eq!(Predicate::Equals.inverse(), Predicate::Equals);
        assert_eq!(Predicate::Touches.inverse(), Predicate::Touches);
    }

    #[test]
    fn combination_counts() {
        assert_eq!(valid_combinations(Predicate::Disjoint).len(), 9);
        assert_eq!(
            valid_combinations(Predicate::Overlaps),
            &[
                (GeomType::LineString, GeomType::LineString),
                (GeomType::Polygon, GeomType::Polygon)
            ]
        );
        assert_eq!(valid_combinations(Predicate::Equals).len(), 3);
        let non_disjoint: usize = Predicate::ALL
            .iter()
            .filter(|p| **p != Predicate::Disjoint)
            .map(|p| valid_combinations(*p).len())
            .sum();
        assert_eq!(non_disjoint, 26);
        assert_eq!(all_combinations().len(), 35);
    }

    #[test]
    fn empty_and_invalid_inputs_error() {
        let empty = parse_wkt("POINT EMPTY").unwrap();
        let square = parse_wkt("POLYGON ((0 0, 1 0, 1 1, 0 1, 0 0))").unwrap();
        assert!(matches!(
            relate(&empty, &square),
            Err(RelateError::EmptyGeometry {
                side: OperandSide::A
            })
        ));
        let bowtie = parse_wkt("POLYGON ((0 0, 2 2, 2 0, 0 2, 0 0))").unwrap();
        assert!(matches!(
            relate(&square, &bowtie),
            Err(RelateError::InvalidGeometry {
                side: OperandSide::B,
                ..
            })
        ));
    }
}
