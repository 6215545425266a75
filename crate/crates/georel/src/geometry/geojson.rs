//! Auxiliary GeoJSON geometry reader (2D positions only).

use serde_json::Value;

use super::{Coord, Geometry, Polygon};

#[derive(Clone, PartialEq, Eq, Debug, thiserror::Error)]
pub enum GeoJsonError {
    #[error("missing `{0}` member")]
    MissingField(&'static str),
    #[error("unsupported geometry type `{0}`")]
    UnsupportedType(String),
    #[error("position must be a 2-element number array")]
    BadPosition,
    #[error("malformed coordinates array")]
    BadCoordinates,
}

fn position(v: &Value) -> Result<Coord, GeoJsonError> {
    let arr = v.as_array().ok_or(GeoJsonError::BadPosition)?;
    if arr.len() != 2 {
        return Err(GeoJsonError::BadPosition);
    }
    let x = arr[0].as_f64().ok_or(GeoJsonError::BadPosition)?;
    let y = arr[1].as_f64().ok_or(GeoJsonError::BadPosition)?;
    if !x.is_finite() || !y.is_finite() {
        return Err(GeoJsonError::BadPosition);
    }
    Ok(Coord::new(x, y))
}

fn positions(v: &Value) -> Result<Vec<Coord>, GeoJsonError> {
    v.as_array()
        .ok_or(GeoJsonError::BadCoordinates)?
        .iter()
        .map(position)
        .collect()
}

fn rings(v: &Value) -> Result<Polygon, GeoJsonError> {
    let arr = v.as_array().ok_or(GeoJsonError::BadCoordinates)?;
    if arr.is_empty() {
        return Err(GeoJsonError::BadCoordinates);
    }
    let outer = positions(&arr[0])?;
    let holes = arr[1..].iter().map(positions).collect::<Result<_, _>>()?;
    Ok(Polygon::new(outer, holes))
}

/// Read a GeoJSON *geometry object* (not Feature) into a [`Geometry`].
pub fn geometry_from_geojson(value: &Value) -> Result<Geometry, GeoJsonError> {
    let ty = value
        .get("type")
        .and_then(Value::as_str)
        .ok_or(GeoJsonError::MissingField("type"))?;
    let coords = value
        .get("coordinates")
        .ok_or(GeoJsonError::MissingField("coordinates"))?;
    match ty {
        "Point" => Ok(Geometry::Point(Some(position(coords)?))),
        "MultiPoint" => Ok(Geometry::MultiPoint(positions(coords)?)),
        "LineString" => Ok(Geometry::LineString(positions(coords)?)),
        "MultiLineString" => {
            let parts = coords
                .as_array()
                .ok_or(GeoJsonError::BadCoordinates)?
                .iter()
                .map(positions)
                .collect::<Result<_, _>>()?;
            Ok(Geometry::MultiLineString(parts))
        }
        "Polygon" => Ok(Geometry::Polygon(rings(coords)?)),
        "MultiPolygon" => {
            let polys = coords
                .as_array()
                .ok_or(GeoJsonError::BadCoordinates)?
                .iter()
                .map(rings)
                .collect::<Result<_, _>>()?;
            Ok(Geometry::MultiPolygon(polys))
        }
        other => Err(GeoJsonError::UnsupportedType(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::to_wkt;

    #[test]
    fn reads_point_and_polygon() {
        let p: Value = serde_json::json!({"type": "Point", "coordinates": [1.0, 2.0]});
        assert_eq!(to_wkt(&geometry_from_geojson(&p).unwrap()), "POINT (1 2)");

        let poly: Value = serde_json::json!({
            "type": "Polygon",
            "coordinates": [[[0.0,0.0],[4.0,0.0],[4.0,4.0],[0.0,4.0],[0.0,0.0]]]
        });
        assert_eq!(
            to_wkt(&geometry_from_geojson(&poly).unwrap()),
            "POLYGON ((0 0, 4 0, 4 4, 0 4, 0 0))"
        );
    }

    #[test]
    fn rejects_3d_positions() {
        let p: Value = serde_json::json!({"type": "Point", "coordinates": [1.0, 2.0, 3.0]});
        assert_eq!(
            geometry_from_geojson(&p).unwrap_err(),
            GeoJsonError::BadPosition
        );
    }

    #[test]
    fn rejects_geometry_collection() {
        let p: Value = serde_json::json!({"type": "GeometryCollection", "coordinates": []});
        assert!(matches!(
            geometry_from_geojson(&p).unwrap_err(),
            GeoJsonError::UnsupportedType(_)
        ));
    }
}
