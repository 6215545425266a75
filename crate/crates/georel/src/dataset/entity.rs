//! Spatial entities and file ingestion.
//!
//! Three interchange formats: `wkt-csv` with header `id,wkt,name,place_type`,
//! JSONL with one entity object per line, and GeoJSON FeatureCollections.
//! Rows with invalid geometry are rejected and reported, not fatal.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::geometry::{
    geometry_from_geojson, parse_wkt, to_wkt_precision, validate, Geometry, WktPrecision,
};

/// One identified spatial object.
#[derive(Clone, Debug, PartialEq)]
pub struct SpatialEntity {
    pub id: String,
    pub geometry: Geometry,
    pub name: Option<String>,
    pub place_type: Option<String>,
    pub source: String,
}

/// An id-indexed set of entities with validated, non-empty geometries.
#[derive(Clone, Debug, Default)]
pub struct Corpus {
    entities: Vec<SpatialEntity>,
    index: HashMap<String, usize>,
}

impl Corpus {
    pub fn new() -> Self {
        Corpus::default()
    }

    /// Insert a validated entity; duplicate ids are an error.
    pub fn insert(&mut self, entity: SpatialEntity) -> Result<(), IngestError> {
        if self.index.contains_key(&entity.id) {
            return Err(IngestError::DuplicateId(entity.id));
        }
        self.index.insert(entity.id.clone(), self.entities.len());
        self.entities.push(entity);
        Ok(())
    }

    pub fn get(&self, id: &str) -> Option<&SpatialEntity> {
        self.index.get(id).map(|i| &self.entities[*i])
    }

    pub fn iter(&self) -> impl Iterator<Item = &SpatialEntity> {
        self.entities.iter()
    }

    pub fn len(&self) -> usize {
        self.entities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty()
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum IngestFormat {
    WktCsv,
    Jsonl,
    GeoJson,
}

impl IngestFormat {
    pub fn parse(name: &str) -> Option<Self> {
        match name.trim().to_ascii_lowercase().as_str() {
            "wkt-csv" | "csv" => Some(IngestFormat::WktCsv),
            "jsonl" => Some(IngestFormat::Jsonl),
            "geojson" => Some(IngestFormat::GeoJson),
            _ => None,
        }
    }

    /// Guess from the file extension.
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()? {
            "csv" => Some(IngestFormat::WktCsv),
            "jsonl" => Some(IngestFormat::Jsonl),
            "geojson" | "json" => Some(IngestFormat::GeoJson),
            _ => None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("duplicate entity id `{0}`")]
    DuplicateId(String),
    #[error("malformed input: {0}")]
    Malformed(String),
}

/// Per-run ingestion accounting: every rejected row is listed with the
/// reason, so data problems are visible instead of silently dropped.
#[derive(Debug, Default)]
pub struct IngestReport {
    pub accepted: usize,
    pub rejected: Vec<(usize, String)>,
}

#[derive(Serialize, Deserialize)]
struct EntityRecord {
    id: String,
    wkt: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    place_type: Option<String>,
    #[serde(default)]
    source: Option<String>,
}

fn accept(
    corpus: &mut Corpus,
    report: &mut IngestReport,
    row: usize,
    entity: SpatialEntity,
) -> Result<(), IngestError> {
    if entity.geometry.is_empty() {
        report.rejected.push((row, "empty geometry".to_string()));
        return Ok(());
    }
    let violations = validate(&entity.geometry);
    if !violations.is_empty() {
        let text = violations
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(", ");
        report.rejected.push((row, text));
        return Ok(());
    }
    corpus.insert(entity)?;
    report.accepted += 1;
    Ok(())
}

/// Load a corpus from a file, rejecting entities with invalid geometry.
pub fn ingest(path: &Path, format: IngestFormat) -> Result<(Corpus, IngestReport), IngestError> {
    let mut corpus = Corpus::new();
    let mut report = IngestReport::default();
    let source = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("file")
        .to_string();
    match format {
        IngestFormat::WktCsv => {
            let mut reader = csv::Reader::from_path(path).map_err(|e| match e.kind() {
                csv::ErrorKind::Io(_) => {
                    IngestError::Io(std::io::Error::other(e.to_string()))
                }
                _ => IngestError::Malformed(e.to_string()),
            })?;
            let headers = reader
                .headers()
                .map_err(|e| IngestError::Malformed(e.to_string()))?
                .clone();
            let want = ["id", "wkt", "name", "place_type"];
            if headers.iter().take(2).collect::<Vec<_>>() != want[..2].to_vec() {
                return Err(IngestError::Malformed(format!(
                    "expected header starting `id,wkt`, found `{}`",
                    headers.iter().collect::<Vec<_>>().join(",")
                )));
            }
            for (row, record) in reader.records().enumerate() {
                let line = row + 2; // header is line 1
                let record = match record {
                    Ok(r) => r,
                    Err(e) => {
                        report.rejected.push((line, e.to_string()));
                        continue;
                    }
                };
                let id = record.get(0).unwrap_or_default().trim().to_string();
                let wkt = record.get(1).unwrap_or_default();
                let geometry = match parse_wkt(wkt) {
                    Ok(g) => g,
                    Err(e) => {
                        report.rejected.push((line, e.to_string()));
                        continue;
                    }
                };
                let opt = |s: Option<&str>| {
                    s.map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(str::to_string)
                };
                accept(
                    &mut corpus,
                    &mut report,
                    line,
                    SpatialEntity {
                        id,
                        geometry,
                        name: opt(record.get(2)),
                        place_type: opt(record.get(3)),
                        source: source.clone(),
                    },
                )?;
            }
        }
        IngestFormat::Jsonl => {
            let text = std::fs::read_to_string(path)?;
            for (i, line) in text.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let record: EntityRecord = match serde_json::from_str(line) {
                    Ok(r) => r,
                    Err(e) => {
                        report.rejected.push((i + 1, e.to_string()));
                        continue;
                    }
                };
                let geometry = match parse_wkt(&record.wkt) {
                    Ok(g) => g,
                    Err(e) => {
                        report.rejected.push((i + 1, e.to_string()));
                        continue;
                    }
                };
                accept(
                    &mut corpus,
                    &mut report,
                    i + 1,
                    SpatialEntity {
                        id: record.id,
                        geometry,
                        name: record.name,
                        place_type: record.place_type,
                        source: record.source.unwrap_or_else(|| source.clone()),
                    },
                )?;
            }
        }
        IngestFormat::GeoJson => {
            let text = std::fs::read_to_string(path)?;
            let value: serde_json::Value = serde_json::from_str(&text)
                .map_err(|e| IngestError::Malformed(e.to_string()))?;
            let features = value
                .get("features")
                .and_then(|f| f.as_array())
                .ok_or_else(|| {
                    IngestError::Malformed("expected a FeatureCollection with features".into())
                })?;
            for (i, feature) in features.iter().enumerate() {
                let geometry = feature
                    .get("geometry")
                    .ok_or(())
                    .and_then(|g| geometry_from_geojson(g).map_err(|_| ()));
                let geometry = match geometry {
                    Ok(g) => g,
                    Err(()) => {
                        report
                            .rejected
                            .push((i + 1, "missing or malformed geometry".to_string()));
                        continue;
                    }
                };
                let props = feature.get("properties").cloned().unwrap_or_default();
                let prop = |k: &str| {
                    props
                        .get(k)
                        .and_then(|v| v.as_str())
                        .map(str::to_string)
                };
                let id = prop("id")
                    .or_else(|| feature.get("id").and_then(|v| v.as_str()).map(str::to_string))
                    .unwrap_or_else(|| format!("feature-{i}"));
                accept(
                    &mut corpus,
                    &mut report,
                    i + 1,
                    SpatialEntity {
                        id,
                        geometry,
                        name: prop("name"),
                        place_type: prop("place_type"),
                        source: source.clone(),
                    },
                )?;
            }
        }
    }
    Ok((corpus, report))
}

/// Write a corpus as JSONL with full-precision WKT so geometries reload
/// bit-identical.
pub fn save_corpus(corpus: &Corpus, path: &Path) -> Result<(), IngestError> {
    let mut body = String::new();
    for e in corpus.iter() {
        let record = EntityRecord {
            id: e.id.clone(),
            wkt: to_wkt_precision(&e.geometry, WktPrecision::Full),
            name: e.name.clone(),
            place_type: e.place_type.clone(),
            source: Some(e.source.clone()),
        };
        body.push_str(&serde_json::to_string(&record).unwrap());
        body.push('\n');
    }
    std::fs::write(path, body)?;
    Ok(())
}

/// Load a JSONL corpus, failing on any rejected row (persisted corpora
/// are expected to be clean).
pub fn load_corpus(path: &Path) -> Result<Corpus, IngestError> {
    let (corpus, report) = ingest(path, IngestFormat::Jsonl)?;
    if let Some((line, reason)) = report.rejected.first() {
        return Err(IngestError::Malformed(format!(
            "{}:{line}: {reason}",
            path.display()
        )));
    }
    Ok(corpus)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pois.csv");
        std::fs::write(
            &path,
            "id,wkt,name,place_type\n\
             a1,POINT (0 0),,poi\n\
             a2,\"POLYGON ((0 0, 2 2, 2 0, 0 2, 0 0))\",bow,parcel\n\
             a3,\"LINESTRING (0 0, 1 1)\",road one,highway\n",
        )
        .unwrap();
        let (corpus, report) = ingest(&path, IngestFormat::WktCsv).unwrap();
        assert_eq!(report.accepted, 2);
        assert_eq!(report.rejected.len(), 1);
        assert!(report.rejected[0].1.contains("RingSelfIntersection"));
        assert_eq!(corpus.get("a1").unwrap().place_type.as_deref(), Some("poi"));
        assert!(corpus.get("a2").is_none());
        assert_eq!(corpus.get("a3").unwrap().name.as_deref(), Some("road one"));
    }

    #[test]
    fn jsonl_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("entities.jsonl");
        let mut corpus = Corpus::new();
        corpus
            .insert(SpatialEntity {
                id: "p1".into(),
                geometry: parse_wkt("POINT (1.5 2.25)").unwrap(),
                name: Some("spot".into()),
                place_type: None,
                source: "test".into(),
            })
            .unwrap();
        save_corpus(&corpus, &path).unwrap();
        let loaded = load_corpus(&path).unwrap();
        assert_eq!(loaded.len(), 1);
        assert_eq!(loaded.get("p1").unwrap().geometry, corpus.get("p1").unwrap().geometry);
    }

    #[test]
    fn geojson_feature_collection() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("places.geojson");
        std::fs::write(
            &path,
            serde_json::json!({
                "type": "FeatureCollection",
                "features": [
                    {"type": "Feature", "properties": {"id": "f1", "name": "one"},
                     "geometry": {"type": "Point", "coordinates": [1.0, 2.0]}},
                    {"type": "Feature", "properties": {},
                     "geometry": {"type": "LineString", "coordinates": [[0.0,0.0],[1.0,1.0]]}},
                    {"type": "Feature", "properties": {}, "geometry": null}
                ]
            })
            .to_string(),
        )
        .unwrap();
        let (corpus, report) = ingest(&path, IngestFormat::GeoJson).unwrap();
        assert_eq!(corpus.len(), 2);
        assert_eq!(report.accepted, 2);
        assert_eq!(report.rejected.len(), 1);
        assert!(corpus.get("f1").is_some());
        assert!(corpus.get("feature-1").is_some());
    }

    #[test]
    fn duplicate_ids_are_fatal() {
        let mut corpus = Corpus::new();
        let entity = SpatialEntity {
            id: "x".into(),
            geometry: parse_wkt("POINT (0 0)").unwrap(),
            name: None,
            place_type: None,
            source: "t".into(),
        };
        corpus.insert(entity.clone()).unwrap();
        assert!(matches!(
            corpus.insert(entity),
            Err(IngestError::DuplicateId(_))
        ));
    }
}
