//! WKT (well-known text) reader and writer for 2D simple features.
//!
//! The reader is tolerant about case and whitespace ("POINT(1 2)",
//! "point ( 1 2 )") but strict about structure: it rejects unknown
//! keywords, malformed parentheses, non-numeric or non-finite
//! coordinates, lines with fewer than two positions and rings that are
//! too short or not closed. Errors carry the byte offset of the
//! offending token.
//!
//! The writer emits the canonical spaced form with uppercase keywords:
//! `POINT (1 2)`, `POLYGON ((0 0, 4 0, 4 4, 0 4, 0 0))`.

use super::{Coord, Geometry, Polygon};

/// Where a WKT parse failed and why.
#[derive(Clone, PartialEq, Eq, Debug, thiserror::Error)]
#[error("{kind} at byte {offset}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    /// Byte offset into the input at which the problem was detected.
    pub offset: usize,
}

#[derive(Clone, PartialEq, Eq, Debug, thiserror::Error)]
pub enum ParseErrorKind {
    #[error("unknown geometry keyword `{0}`")]
    UnknownKeyword(String),
    #[error("expected {0}")]
    Expected(&'static str),
    #[error("invalid coordinate number")]
    InvalidNumber,
    #[error("non-finite coordinate")]
    NonFiniteNumber,
    #[error("Z/M coordinates are not supported")]
    UnsupportedDimension,
    #[error("too few coordinates: found {found}, need at least {required}")]
    TooFewCoordinates { found: usize, required: usize },
    #[error("ring is not closed (first and last coordinates differ)")]
    RingNotClosed,
    #[error("trailing input after geometry")]
    TrailingInput,
}

struct Scanner<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Scanner<'a> {
    fn new(text: &'a str) -> Self {
        Scanner {
            bytes: text.as_bytes(),
            pos: 0,
        }
    }

    fn err(&self, kind: ParseErrorKind) -> ParseError {
        ParseError {
            kind,
            offset: self.pos,
        }
    }

    fn err_at(&self, kind: ParseErrorKind, offset: usize) -> ParseError {
        ParseError { kind, offset }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn eat(&mut self, byte: u8, what: &'static str) -> Result<(), ParseError> {
        if self.peek() == Some(byte) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(ParseErrorKind::Expected(what)))
        }
    }

    /// Read a run of ASCII letters, lowercased. Empty when the next
    /// character is not a letter.
    fn word(&mut self) -> String {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_alphabetic() {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.bytes[start..self.pos]).to_ascii_lowercase()
    }

    fn number(&mut self) -> Result<f64, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.bytes.len() {
            let b = self.bytes[self.pos];
            if b.is_ascii_digit() || matches!(b, b'+' | b'-' | b'.' | b'e' | b'E') {
                self.pos += 1;
            } else {
                break;
            }
        }
        if start == self.pos {
            return Err(self.err_at(ParseErrorKind::InvalidNumber, start));
        }
        let token = std::str::from_utf8(&self.bytes[start..self.pos])
            .map_err(|_| self.err_at(ParseErrorKind::InvalidNumber, start))?;
        let value: f64 = token
            .parse()
            .map_err(|_| self.err_at(ParseErrorKind::InvalidNumber, start))?;
        if !value.is_finite() {
            return Err(self.err_at(ParseErrorKind::NonFiniteNumber, start));
        }
        Ok(value)
    }

    /// One `x y` pair. A third number means Z/M input, which is rejected.
    fn coord(&mut self) -> Result<Coord, ParseError> {
        let x = self.number()?;
        let y = self.number()?;
        self.skip_ws();
        if self
            .bytes
            .get(self.pos)
            .is_some_and(|b| b.is_ascii_digit() || *b == b'-' || *b == b'+')
        {
            return Err(self.err(ParseErrorKind::UnsupportedDimension));
        }
        Ok(Coord::new(x, y))
    }

    /// `( c, c, ... )` with at least `min` coordinates.
    fn coord_seq(&mut self, min: usize) -> Result<Vec<Coord>, ParseError> {
        let open = self.pos;
        self.eat(b'(', "`(`")?;
        let mut coords = vec![self.coord()?];
        while self.peek() == Some(b',') {
            self.pos += 1;
            coords.push(self.coord()?);
        }
        self.eat(b')', "`)` or `,`")?;
        if coords.len() < min {
            return Err(self.err_at(
                ParseErrorKind::TooFewCoordinates {
                    found: coords.len(),
                    required: min,
                },
                open,
            ));
        }
        Ok(coords)
    }

    /// A polygon ring: at least four coordinates, first equal to last.
    fn ring(&mut self) -> Result<Vec<Coord>, ParseError> {
        let open = self.pos;
        let coords = self.coord_seq(4)?;
        if coords.first() != coords.last() {
            return Err(self.err_at(ParseErrorKind::RingNotClosed, open));
        }
        Ok(coords)
    }

    fn polygon_body(&mut self) -> Result<Polygon, ParseError> {
        self.eat(b'(', "`(`")?;
        let outer = self.ring()?;
        let mut holes = Vec::new();
        while self.peek() == Some(b',') {
            self.pos += 1;
            holes.push(self.ring()?);
        }
        self.eat(b')', "`)` or `,`")?;
        Ok(Polygon::new(outer, holes))
    }

    fn is_empty_keyword(&mut self) -> bool {
        let save = self.pos;
        if self.word() == "empty" {
            true
        } else {
            self.pos = save;
            false
        }
    }
}

/// Parse a WKT expression into a [`Geometry`].
///
/// Keywords are case-insensitive and whitespace is free-form; `EMPTY`
/// bodies are accepted for every type. The result round-trips through
/// [`to_wkt`] up to the serialization precision.
pub fn parse_wkt(text: &str) -> Result<Geometry, ParseError> {
    let (geometry, consumed) = parse_wkt_prefix(text)?;
    let rest = &text.as_bytes()[consumed..];
    if rest.iter().any(|b| !b.is_ascii_whitespace()) {
        return Err(ParseError {
            kind: ParseErrorKind::TrailingInput,
            offset: consumed,
        });
    }
    Ok(geometry)
}

/// Parse a WKT expression at the start of `text`, returning the geometry
/// and the number of bytes consumed. Trailing input is left alone, which
/// lets callers extract geometries embedded in prose.
pub fn parse_wkt_prefix(text: &str) -> Result<(Geometry, usize), ParseError> {
    let mut s = Scanner::new(text);
    let keyword_at = {
        s.skip_ws();
        s.pos
    };
    let keyword = s.word();
    let geometry = match keyword.as_str() {
        "point" => {
            if s.is_empty_keyword() {
                Geometry::Point(None)
            } else {
                s.eat(b'(', "`(`")?;
                let c = s.coord()?;
                s.eat(b')', "`)`")?;
                Geometry::Point(Some(c))
            }
        }
        "multipoint" => {
            if s.is_empty_keyword() {
                Geometry::MultiPoint(Vec::new())
            } else {
                // Both MULTIPOINT (1 2, 3 4) and MULTIPOINT ((1 2), (3 4)).
                s.eat(b'(', "`(`")?;
                let mut coords = Vec::new();
                loop {
                    if s.peek() == Some(b'(') {
                        s.pos += 1;
                        coords.push(s.coord()?);
                        s.eat(b')', "`)`")?;
                    } else {
                        coords.push(s.coord()?);
                    }
                    match s.peek() {
                        Some(b',') => s.pos += 1,
                        _ => break,
                    }
                }
                s.eat(b')', "`)` or `,`")?;
                Geometry::MultiPoint(coords)
            }
        }
        "linestring" => {
            if s.is_empty_keyword() {
                Geometry::LineString(Vec::new())
            } else {
                Geometry::LineString(s.coord_seq(2)?)
            }
        }
        "multilinestring" => {
            if s.is_empty_keyword() {
                Geometry::MultiLineString(Vec::new())
            } else {
                s.eat(b'(', "`(`")?;
                let mut parts = vec![s.coord_seq(2)?];
                while s.peek() == Some(b',') {
                    s.pos += 1;
                    parts.push(s.coord_seq(2)?);
                }
                s.eat(b')', "`)` or `,`")?;
                Geometry::MultiLineString(parts)
            }
        }
        "polygon" => {
            if s.is_empty_keyword() {
                Geometry::Polygon(Polygon::new(Vec::new(), Vec::new()))
            } else {
                Geometry::Polygon(s.polygon_body()?)
            }
        }
        "multipolygon" => {
            if s.is_empty_keyword() {
                Geometry::MultiPolygon(Vec::new())
            } else {
                s.eat(b'(', "`(`")?;
                let mut polys = vec![s.polygon_body()?];
                while s.peek() == Some(b',') {
                    s.pos += 1;
                    polys.push(s.polygon_body()?);
                }
                s.eat(b')', "`)` or `,`")?;
                Geometry::MultiPolygon(polys)
            }
        }
        other => {
            return Err(s.err_at(
                ParseErrorKind::UnknownKeyword(other.to_string()),
                keyword_at,
            ))
        }
    };
    Ok((geometry, s.pos))
}

const KEYWORDS: [&str; 6] = [
    "point",
    "linestring",
    "polygon",
    "multipoint",
    "multilinestring",
    "multipolygon",
];

/// Find every parseable WKT substring in free text, left to right and
/// non-overlapping. Used to pull geometries out of model responses.
pub fn scan_wkt(text: &str) -> Vec<(usize, Geometry)> {
    let bytes = text.as_bytes();
    let mut found = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i].is_ascii_alphabetic() && (i == 0 || !bytes[i - 1].is_ascii_alphabetic()) {
            let mut end = i;
            while end < bytes.len() && bytes[end].is_ascii_alphabetic() {
                end += 1;
            }
            let word = text[i..end].to_ascii_lowercase();
            if KEYWORDS.contains(&word.as_str()) {
                if let Ok((g, used)) = parse_wkt_prefix(&text[i..]) {
                    found.push((i, g));
                    i += used;
                    continue;
                }
            }
            i = end;
        } else {
            i += 1;
        }
    }
    found
}

/// Serialization precision for [`to_wkt_precision`].
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum WktPrecision {
    /// Fixed number of decimal places, trailing zeros trimmed.
    Places(u8),
    /// Shortest representation that round-trips the f64 exactly. Used for
    /// persisted datasets so stored geometries reload bit-identical.
    Full,
}

impl Default for WktPrecision {
    fn default() -> Self {
        WktPrecision::Places(6)
    }
}

/// Canonical WKT at the default precision of 6 decimal places.
pub fn to_wkt(g: &Geometry) -> String {
    to_wkt_precision(g, WktPrecision::default())
}

/// Canonical WKT: uppercase keywords, `, `-separated coordinates, one
/// space between keyword and body.
pub fn to_wkt_precision(g: &Geometry, precision: WktPrecision) -> String {
    let num = |v: f64| format_number(v, precision);
    let coord = |c: &Coord| format!("{} {}", num(c.x), num(c.y));
    let seq = |cs: &[Coord]| {
        cs.iter()
            .map(coord)
            .collect::<Vec<_>>()
            .join(", ")
    };
    let poly = |p: &Polygon| {
        let rings: Vec<String> = p.rings().map(|r| format!("({})", seq(r))).collect();
        format!("({})", rings.join(", "))
    };
    match g {
        Geometry::Point(None) => "POINT EMPTY".to_string(),
        Geometry::Point(Some(c)) => format!("POINT ({})", coord(c)),
        Geometry::MultiPoint(cs) if cs.is_empty() => "MULTIPOINT EMPTY".to_string(),
        Geometry::MultiPoint(cs) => format!("MULTIPOINT ({})", seq(cs)),
        Geometry::LineString(cs) if cs.is_empty() => "LINESTRING EMPTY".to_string(),
        Geometry::LineString(cs) => format!("LINESTRING ({})", seq(cs)),
        Geometry::MultiLineString(parts) if parts.is_empty() => {
            "MULTILINESTRING EMPTY".to_string()
        }
        Geometry::MultiLineString(parts) => {
            let bodies: Vec<String> = parts.iter().map(|p| format!("({})", seq(p))).collect();
            format!("MULTILINESTRING ({})", bodies.join(", "))
        }
        Geometry::Polygon(p) if p.outer.is_empty() => "POLYGON EMPTY".to_string(),
        Geometry::Polygon(p) => format!("POLYGON {}", poly(p)),
        Geometry::MultiPolygon(ps) if ps.is_empty() => "MULTIPOLYGON EMPTY".to_string(),
        Geometry::MultiPolygon(ps) => {
            let bodies: Vec<String> = ps.iter().map(poly).collect();
            format!("MULTIPOLYGON ({})", bodies.join(", "))
        }
    }
}

fn format_number(v: f64, precision: WktPrecision) -> String {
    match precision {
        WktPrecision::Full => format!("{v}"),
        WktPrecision::Places(p) => {
            let mut s = format!("{:.*}", p as usize, v);
            if s.contains('.') {
                while s.ends_with('0') {
                    s.pop();
                }
                if s.ends_with('.') {
                    s.pop();
                }
            }
            if s == "-0" {
                s = "0".to_string();
            }
            s
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_point() {
        let g = parse_wkt("POINT (-89.3551 43.123)").unwrap();
        assert_eq!(g, Geometry::Point(Some(Coord::new(-89.3551, 43.123))));
    }

    #[test]
    fn parses_without_space_and_mixed_case() {
        assert_eq!(
            parse_wkt("point(1 2)").unwrap(),
            parse_wkt("POINT (1 2)").unwrap()
        );
        assert_eq!(
            parse_wkt("LineString( 0 0 ,1 1 )").unwrap(),
            parse_wkt("LINESTRING (0 0, 1 1)").unwrap()
        );
    }

    #[test]
    fn short_linestring_is_rejected() {
        let err = parse_wkt("LINESTRING (0 0)").unwrap_err();
        assert!(matches!(
            err.kind,
            ParseErrorKind::TooFewCoordinates {
                found: 1,
                required: 2
            }
        ));
    }

    #[test]
    fn polygon_ring_counts() {
        let g = parse_wkt("POLYGON ((0 0, 4 0, 4 4, 0 4, 0 0))").unwrap();
        match g {
            Geometry::Polygon(p) => {
                assert_eq!(p.outer.len(), 5);
                assert!(p.holes.is_empty());
            }
            other => panic!("expected polygon, got {other:?}"),
        }
    }

    #[test]
    fn unclosed_ring_is_rejected() {
        let err = parse_wkt("POLYGON ((0 0, 4 0, 4 4, 0 4))").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::RingNotClosed);
    }

    #[test]
    fn unknown_keyword_offset_points_at_keyword() {
        let err = parse_wkt("  TRIANGLE (0 0)").unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::UnknownKeyword(_)));
        assert_eq!(err.offset, 2);
    }

    #[test]
    fn error_offsets_are_inside_the_input() {
        for bad in [
            "POINT (a b)",
            "LINESTRING (0 0, 1)",
            "POLYGON ((0 0, 1 1))",
            "POINT (1 2) junk",
            "POINT (1 2 3)",
        ] {
            let err = parse_wkt(bad).unwrap_err();
            assert!(err.offset <= bad.len(), "{bad}: offset {}", err.offset);
        }
    }

    #[test]
    fn empty_forms() {
        assert_eq!(parse_wkt("POINT EMPTY").unwrap(), Geometry::Point(None));
        assert!(parse_wkt("polygon empty").unwrap().is_empty());
        assert_eq!(to_wkt(&Geometry::Point(None)), "POINT EMPTY");
    }

    #[test]
    fn multipoint_both_syntaxes() {
        let a = parse_wkt("MULTIPOINT (1 2, 3 4)").unwrap();
        let b = parse_wkt("MULTIPOINT ((1 2), (3 4))").unwrap();
        assert_eq!(a, b);
        assert_eq!(to_wkt(&a), "MULTIPOINT (1 2, 3 4)");
    }

    #[test]
    fn non_finite_rejected() {
        assert!(parse_wkt("POINT (inf 0)").unwrap_err().kind == ParseErrorKind::UnknownKeyword("inf".into()) || parse_wkt("POINT (inf 0)").is_err());
        assert!(parse_wkt("POINT (1e999 0)").is_err());
    }

    #[test]
    fn canonical_output() {
        let g = parse_wkt("point( 1.0   2.00 )").unwrap();
        assert_eq!(to_wkt(&g), "POINT (1 2)");
    }

    #[test]
    fn precision_rounds() {
        let g = Geometry::Point(Some(Coord::new(1.23456789, 0.0)));
        assert_eq!(
            to_wkt_precision(&g, WktPrecision::Places(4)),
            "POINT (1.2346 0)"
        );
    }

    #[test]
    fn scan_finds_embedded_geometries() {
        let text = "The answer is POLYGON ((0 0, 1 0, 1 1, 0 1, 0 0)) near POINT (5 5).";
        let hits = scan_wkt(text);
        assert_eq!(hits.len(), 2);
        assert_eq!(hits[0].1.type_name(), "Polygon");
        assert_eq!(hits[1].1.type_name(), "Point");
        assert!(scan_wkt("no geometry here, point taken").is_empty());
        // MULTIPOINT must not be detected as a stray POINT.
        let hits = scan_wkt("MULTIPOINT (1 2, 3 4)");
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].1.type_name(), "MultiPoint");
    }

    #[test]
    fn paper_polygon_roundtrip() {
        let text = "POLYGON ((-89.3552 43.124, -89.355 43.124, -89.355 43.122, -89.3552 43.122, -89.3552 43.124))";
        let g = parse_wkt(text).unwrap();
        assert_eq!(to_wkt(&g), text);
    }
}
