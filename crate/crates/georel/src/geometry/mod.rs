//! Geometry value model: points, lines and polygons with WKT and GeoJSON
//! text representations.
//!
//! Coordinates are planar lon/lat pairs; no geodesic computation is
//! performed anywhere in this crate. All values are immutable after
//! construction and every operation here is pure.

mod geojson;
mod validate;
mod wkt;

pub use geojson::{geometry_from_geojson, GeoJsonError};
pub use validate::{validate, Violation};
pub use wkt::{
    parse_wkt, parse_wkt_prefix, scan_wkt, to_wkt, to_wkt_precision, ParseError, WktPrecision,
};

use serde::{Deserialize, Serialize};

/// A single lon/lat position in decimal degrees.
///
/// Both values must be finite; the WKT parser and [`validate`] reject
/// NaN and infinities.
#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
pub struct Coord {
    pub x: f64,
    pub y: f64,
}

impl Coord {
    pub fn new(x: f64, y: f64) -> Self {
        Coord { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl From<(f64, f64)> for Coord {
    fn from((x, y): (f64, f64)) -> Self {
        Coord { x, y }
    }
}

/// A polygon: one outer ring plus zero or more hole rings.
///
/// Rings are stored closed (first coordinate repeated at the end) exactly
/// as they appear in WKT. Ring orientation is not normalised here; the
/// relation engine orients rings internally.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct Polygon {
    pub outer: Vec<Coord>,
    pub holes: Vec<Vec<Coord>>,
}

impl Polygon {
    pub fn new(outer: Vec<Coord>, holes: Vec<Vec<Coord>>) -> Self {
        Polygon { outer, holes }
    }

    pub fn rings(&self) -> impl Iterator<Item = &Vec<Coord>> {
        std::iter::once(&self.outer).chain(self.holes.iter())
    }
}

/// A 2D simple-feature geometry.
///
/// `Point(None)` is the parsed form of `POINT EMPTY`; empty geometries are
/// representable so that model output can be parsed, but they are rejected
/// by the relation and dataset operations.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub enum Geometry {
    Point(Option<Coord>),
    MultiPoint(Vec<Coord>),
    LineString(Vec<Coord>),
    MultiLineString(Vec<Vec<Coord>>),
    Polygon(Polygon),
    MultiPolygon(Vec<Polygon>),
}

/// Geometry type tag, as spelled in WKT keywords and type tuples.
#[derive(
    Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize,
)]
pub enum GeomType {
    Point,
    LineString,
    Polygon,
    MultiPoint,
    MultiLineString,
    MultiPolygon,
}

impl GeomType {
    pub fn name(self) -> &'static str {
        match self {
            GeomType::Point => "Point",
            GeomType::LineString => "LineString",
            GeomType::Polygon => "Polygon",
            GeomType::MultiPoint => "MultiPoint",
            GeomType::MultiLineString => "MultiLineString",
            GeomType::MultiPolygon => "MultiPolygon",
        }
    }

    /// WKT keyword form, e.g. `LINESTRING`.
    pub fn keyword(self) -> &'static str {
        match self {
            GeomType::Point => "POINT",
            GeomType::LineString => "LINESTRING",
            GeomType::Polygon => "POLYGON",
            GeomType::MultiPoint => "MULTIPOINT",
            GeomType::MultiLineString => "MULTILINESTRING",
            GeomType::MultiPolygon => "MULTIPOLYGON",
        }
    }

    /// The three single-part types that relation datasets are built from.
    pub fn is_simple(self) -> bool {
        matches!(
            self,
            GeomType::Point | GeomType::LineString | GeomType::Polygon
        )
    }

    pub const SIMPLE: [GeomType; 3] = [GeomType::Point, GeomType::LineString, GeomType::Polygon];

    /// Case-insensitive parse of a type name ("point", "LineString", "POLYGON").
    pub fn parse(name: &str) -> Option<GeomType> {
        match name.trim().to_ascii_lowercase().as_str() {
            "point" => Some(GeomType::Point),
            "linestring" => Some(GeomType::LineString),
            "polygon" => Some(GeomType::Polygon),
            "multipoint" => Some(GeomType::MultiPoint),
            "multilinestring" => Some(GeomType::MultiLineString),
            "multipolygon" => Some(GeomType::MultiPolygon),
            _ => None,
        }
    }
}

impl std::fmt::Display for GeomType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Topological dimension of a point set: empty, 0, 1 or 2.
///
/// Doubles as the entry type of the DE-9IM intersection matrix, where the
/// character forms are `F`, `0`, `1`, `2`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub enum Dim {
    Empty,
    Zero,
    One,
    Two,
}

impl Dim {
    pub fn as_char(self) -> char {
        match self {
            Dim::Empty => 'F',
            Dim::Zero => '0',
            Dim::One => '1',
            Dim::Two => '2',
        }
    }

    pub fn from_char(c: char) -> Option<Dim> {
        match c {
            'F' | 'f' => Some(Dim::Empty),
            '0' => Some(Dim::Zero),
            '1' => Some(Dim::One),
            '2' => Some(Dim::Two),
            _ => None,
        }
    }
}

impl Geometry {
    pub fn geom_type(&self) -> GeomType {
        match self {
            Geometry::Point(_) => GeomType::Point,
            Geometry::MultiPoint(_) => GeomType::MultiPoint,
            Geometry::LineString(_) => GeomType::LineString,
            Geometry::MultiLineString(_) => GeomType::MultiLineString,
            Geometry::Polygon(_) => GeomType::Polygon,
            Geometry::MultiPolygon(_) => GeomType::MultiPolygon,
        }
    }

    /// Type name string, e.g. `"Point"` or `"MultiPolygon"`.
    pub fn type_name(&self) -> &'static str {
        self.geom_type().name()
    }

    pub fn is_empty(&self) -> bool {
        match self {
            Geometry::Point(c) => c.is_none(),
            Geometry::MultiPoint(cs) => cs.is_empty(),
            Geometry::LineString(cs) => cs.is_empty(),
            Geometry::MultiLineString(parts) => parts.iter().all(|p| p.is_empty()),
            Geometry::Polygon(p) => p.outer.is_empty(),
            Geometry::MultiPolygon(ps) => ps.iter().all(|p| p.outer.is_empty()),
        }
    }

    /// Dimension of the geometry: empty, 0 for points, 1 for lines,
    /// 2 for polygons. Invariant under translation and scaling.
    pub fn dimension(&self) -> Dim {
        if self.is_empty() {
            return Dim::Empty;
        }
        match self {
            Geometry::Point(_) | Geometry::MultiPoint(_) => Dim::Zero,
            Geometry::LineString(_) | Geometry::MultiLineString(_) => Dim::One,
            Geometry::Polygon(_) | Geometry::MultiPolygon(_) => Dim::Two,
        }
    }

    /// Every coordinate of the geometry, rings in outer-then-holes order.
    pub fn coords(&self) -> Vec<Coord> {
        let mut out = Vec::new();
        match self {
            Geometry::Point(c) => out.extend(c.iter().copied()),
            Geometry::MultiPoint(cs) | Geometry::LineString(cs) => out.extend_from_slice(cs),
            Geometry::MultiLineString(parts) => {
                for p in parts {
                    out.extend_from_slice(p);
                }
            }
            Geometry::Polygon(p) => {
                for r in p.rings() {
                    out.extend_from_slice(r);
                }
            }
            Geometry::MultiPolygon(ps) => {
                for p in ps {
                    for r in p.rings() {
                        out.extend_from_slice(r);
                    }
                }
            }
        }
        out
    }

    /// Axis-aligned bounding box `(min, max)`, or `None` when empty.
    pub fn bbox(&self) -> Option<(Coord, Coord)> {
        let coords = self.coords();
        if coords.is_empty() {
            return None;
        }
        let mut min = coords[0];
        let mut max = coords[0];
        for c in &coords[1..] {
            min.x = min.x.min(c.x);
            min.y = min.y.min(c.y);
            max.x = max.x.max(c.x);
            max.y = max.y.max(c.y);
        }
        Some((min, max))
    }
}

impl std::fmt::Display for Geometry {
    /// Canonical WKT at the default precision of 6 decimal places.
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&to_wkt(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Geometry {
        parse_wkt("POLYGON ((0 0, 4 0, 4 4, 0 4, 0 0))").unwrap()
    }

    #[test]
    fn dimension_cases() {
        assert_eq!(
            parse_wkt("POINT (1 2)").unwrap().dimension(),
            Dim::Zero
        );
        assert_eq!(square().dimension(), Dim::Two);
        assert_eq!(parse_wkt("POINT EMPTY").unwrap().dimension(), Dim::Empty);
        assert_eq!(
            parse_wkt("LINESTRING (0 0, 1 1)").unwrap().dimension(),
            Dim::One
        );
    }

    #[test]
    fn dimension_is_scale_invariant() {
        let scaled = parse_wkt("POLYGON ((0 0, 400 0, 400 400, 0 400, 0 0))").unwrap();
        assert_eq!(square().dimension(), scaled.dimension());
    }

    #[test]
    fn type_names() {
        assert_eq!(parse_wkt("POINT (0 0)").unwrap().type_name(), "Point");
        assert_eq!(
            parse_wkt("MULTIPOLYGON (((0 0, 1 0, 1 1, 0 0)), ((5 5, 6 5, 6 6, 5 5)))")
                .unwrap()
                .type_name(),
            "MultiPolygon"
        );
        assert_eq!(square().type_name(), "Polygon");
    }

    #[test]
    fn geom_type_parse_is_case_insensitive() {
        assert_eq!(GeomType::parse("LINESTRING"), Some(GeomType::LineString));
        assert_eq!(GeomType::parse("linestring"), Some(GeomType::LineString));
        assert_eq!(GeomType::parse("granite"), None);
    }
}
