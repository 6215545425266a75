//! Geometry synthesis: equals pairs, buffered disjoint sampling, and the
//! synthetic scene corpus used to build balanced triplet datasets.
//!
//! Equals synthesis inserts extra vertices that are *exactly* collinear
//! in f64 arithmetic: every interpolated point is verified against the
//! exact orientation predicate before use. When a segment admits no
//! representable interior point, lines fall back to repeating a vertex
//! (point set unchanged) and rings fall back to rotation alone, so the
//! equals postcondition never depends on luck.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::entity::{Corpus, SpatialEntity};
use crate::geometry::{Coord, GeomType, Geometry, Polygon};
use crate::topology::exact::{exact_midpoint, on_segment, orient};
use crate::topology::{classify_predicate, Predicate};

/// Default disjoint-sampling buffer in degrees (about 100 m).
pub const DEFAULT_DISJOINT_BUFFER: f64 = 0.001;

#[derive(Clone, PartialEq, Eq, Debug, thiserror::Error)]
pub enum SynthError {
    #[error("equals synthesis does not support {0} geometries")]
    UnsupportedType(&'static str),
    #[error("no disjoint candidate found within the buffer")]
    NoCandidate,
    #[error("could not construct a {predicate} subject of type {subject_type}")]
    Construction {
        predicate: Predicate,
        subject_type: &'static str,
    },
    #[error("synthesised geometry failed verification: {0}")]
    Postcondition(String),
}

/// A point strictly between `a` and `b` that is exactly collinear with
/// them in f64 arithmetic, at a seeded-random dyadic position. `None`
/// when no tried position is representable.
fn exact_point_between(a: Coord, b: Coord, rng: &mut ChaCha8Rng) -> Option<Coord> {
    for _ in 0..24 {
        let bits = rng.gen_range(1u32..=6);
        let denom = 1u32 << bits;
        let k = rng.gen_range(1..denom);
        let t = k as f64 / denom as f64;
        let p = Coord::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y));
        if p != a && p != b && orient(a, b, p) == 0 && on_segment(p, a, b) {
            return Some(p);
        }
    }
    exact_midpoint(a, b)
}

fn densify_line(vs: &[Coord], extra: usize, rng: &mut ChaCha8Rng) -> Vec<Coord> {
    let mut out = vs.to_vec();
    for _ in 0..extra {
        // Pick a segment with actual extent, insert a verified point, or
        // repeat the segment start when nothing representable exists.
        let segs: Vec<usize> = (0..out.len() - 1).filter(|&i| out[i] != out[i + 1]).collect();
        let at = *segs.choose(rng).unwrap_or(&0);
        match exact_point_between(out[at], out[at + 1], rng) {
            Some(p) => out.insert(at + 1, p),
            None => out.insert(at + 1, out[at]),
        }
    }
    out
}

/// Densify a closed ring with verified collinear points only; the ring
/// stays simple because no vertex is ever duplicated.
fn densify_ring(closed: &[Coord], extra: usize, rng: &mut ChaCha8Rng) -> Vec<Coord> {
    let mut out = closed.to_vec();
    let mut added = 0;
    let mut attempts = 0;
    while added < extra && attempts < extra * 8 {
        attempts += 1;
        let at = rng.gen_range(0..out.len() - 1);
        if let Some(p) = exact_point_between(out[at], out[at + 1], rng) {
            if !out.contains(&p) {
                out.insert(at + 1, p);
                added += 1;
            }
        }
    }
    out
}

/// Build a geometry topologically equal to `g` with a different WKT
/// serialization (except for points, which stay identical).
///
/// Lines gain `ceil(0.10 * vertex count)` extra collinear vertices at
/// seeded positions; polygon rings are rotated to a seeded start vertex
/// and densified the same way. `classify(g, result)` is `equals` in all
/// cases.
pub fn synthesize_equal(g: &Geometry, seed: u64) -> Result<Geometry, SynthError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let result = match g {
        Geometry::Point(Some(c)) => Geometry::Point(Some(*c)),
        Geometry::Point(None) => {
            return Err(SynthError::Postcondition("empty point".to_string()))
        }
        Geometry::LineString(vs) => {
            let extra = (0.10 * vs.len() as f64).ceil() as usize;
            Geometry::LineString(densify_line(vs, extra.max(1), &mut rng))
        }
        Geometry::Polygon(p) => {
            let mut rings = Vec::with_capacity(1 + p.holes.len());
            for ring in p.rings() {
                let open = &ring[..ring.len() - 1];
                let offset = if open.len() > 2 {
                    rng.gen_range(1..=open.len() - 2)
                } else {
                    1
                };
                let mut rotated: Vec<Coord> = Vec::with_capacity(ring.len());
                rotated.extend_from_slice(&open[offset..]);
                rotated.extend_from_slice(&open[..offset]);
                rotated.push(open[offset]);
                let extra = (0.10 * open.len() as f64).ceil() as usize;
                rings.push(densify_ring(&rotated, extra, &mut rng));
            }
            let outer = rings.remove(0);
            Geometry::Polygon(Polygon::new(outer, rings))
        }
        Geometry::MultiPoint(_) => return Err(SynthError::UnsupportedType("MultiPoint")),
        Geometry::MultiLineString(_) => {
            return Err(SynthError::UnsupportedType("MultiLineString"))
        }
        Geometry::MultiPolygon(_) => return Err(SynthError::UnsupportedType("MultiPolygon")),
    };
    match classify_predicate(g, &result) {
        Ok(Some(Predicate::Equals)) => Ok(result),
        other => Err(SynthError::Postcondition(format!(
            "expected equals, got {other:?}"
        ))),
    }
}

fn dist_pp(a: Coord, b: Coord) -> f64 {
    ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt()
}

fn dist_point_segment(p: Coord, a: Coord, b: Coord) -> f64 {
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return dist_pp(p, a);
    }
    let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0);
    dist_pp(p, Coord::new(a.x + t * dx, a.y + t * dy))
}

fn dist_segments(a: (Coord, Coord), b: (Coord, Coord)) -> f64 {
    if crate::topology::exact::segments_touch(a.0, a.1, b.0, b.1) {
        return 0.0;
    }
    dist_point_segment(a.0, b.0, b.1)
        .min(dist_point_segment(a.1, b.0, b.1))
        .min(dist_point_segment(b.0, a.0, a.1))
        .min(dist_point_segment(b.1, a.0, a.1))
}

fn pieces(g: &Geometry) -> (Vec<Coord>, Vec<(Coord, Coord)>) {
    let mut points = Vec::new();
    let mut segments = Vec::new();
    match g {
        Geometry::Point(Some(c)) => points.push(*c),
        Geometry::Point(None) => {}
        Geometry::MultiPoint(cs) => points.extend_from_slice(cs),
        Geometry::LineString(vs) => {
            segments.extend(vs.windows(2).map(|w| (w[0], w[1])));
        }
        Geometry::MultiLineString(parts) => {
            for vs in parts {
                segments.extend(vs.windows(2).map(|w| (w[0], w[1])));
            }
        }
        Geometry::Polygon(p) => {
            for ring in p.rings() {
                segments.extend(ring.windows(2).map(|w| (w[0], w[1])));
            }
        }
        Geometry::MultiPolygon(ps) => {
            for p in ps {
                for ring in p.rings() {
                    segments.extend(ring.windows(2).map(|w| (w[0], w[1])));
                }
            }
        }
    }
    (points, segments)
}

/// Minimum Euclidean distance between the drawn parts of two geometries
/// (plain f64; used as a sampling heuristic, not a predicate).
pub(crate) fn geometry_distance(a: &Geometry, b: &Geometry) -> f64 {
    let (pa, sa) = pieces(a);
    let (pb, sb) = pieces(b);
    let mut best = f64::INFINITY;
    for p in &pa {
        for q in &pb {
            best = best.min(dist_pp(*p, *q));
        }
        for s in &sb {
            best = best.min(dist_point_segment(*p, s.0, s.1));
        }
    }
    for s in &sa {
        for q in &pb {
            best = best.min(dist_point_segment(*q, s.0, s.1));
        }
        for t in &sb {
            best = best.min(dist_segments(*s, *t));
        }
    }
    best
}

/// Pick from `pool` a subject that is disjoint from `object` but lies
/// within `buffer_d` of it — a nearby entity rather than a trivially far
/// one. Pool order decides ties, so the draw is deterministic.
pub fn sample_disjoint<'a, I>(
    pool: I,
    object: &SpatialEntity,
    buffer_d: f64,
) -> Result<&'a SpatialEntity, SynthError>
where
    I: IntoIterator<Item = &'a SpatialEntity>,
{
    let object_bbox = object.geometry.bbox();
    for candidate in pool {
        if candidate.id == object.id {
            continue;
        }
        // Cheap screen: bounding boxes further apart than the buffer
        // cannot produce a nearby pair.
        if let (Some((omin, omax)), Some((cmin, cmax))) = (object_bbox, candidate.geometry.bbox())
        {
            let dx = (cmin.x - omax.x).max(omin.x - cmax.x).max(0.0);
            let dy = (cmin.y - omax.y).max(omin.y - cmax.y).max(0.0);
            if dx.hypot(dy) > buffer_d {
                continue;
            }
        }
        if classify_predicate(&candidate.geometry, &object.geometry)
            != Ok(Some(Predicate::Disjoint))
        {
            continue;
        }
        if geometry_distance(&candidate.geometry, &object.geometry) <= buffer_d {
            return Ok(candidate);
        }
    }
    Err(SynthError::NoCandidate)
}

/// Parameters for the synthetic scene corpus.
#[derive(Clone, Copy, Debug)]
pub struct CorpusSpec {
    /// Scenes (subject, object pairs) generated per type/predicate
    /// combination. Equals pairs are synthesised later from objects, so
    /// no scenes are generated for them.
    pub scenes_per_combo: usize,
    pub seed: u64,
    /// Disjoint scenes keep the pair within this distance.
    pub buffer: f64,
}

impl CorpusSpec {
    pub fn new(scenes_per_combo: usize, seed: u64) -> Self {
        CorpusSpec {
            scenes_per_combo,
            seed,
            buffer: DEFAULT_DISJOINT_BUFFER,
        }
    }
}

fn snap(v: f64) -> f64 {
    (v * 1e6).round() / 1e6
}

fn snapped(x: f64, y: f64) -> Coord {
    Coord::new(snap(x), snap(y))
}

struct SceneRng<'a>(&'a mut ChaCha8Rng);

impl SceneRng<'_> {
    fn jitter(&mut self, scale: f64) -> f64 {
        self.0.gen_range(-scale..scale)
    }

    fn range(&mut self, lo: f64, hi: f64) -> f64 {
        self.0.gen_range(lo..hi)
    }
}

fn base_point(center: Coord, rng: &mut SceneRng) -> Geometry {
    Geometry::Point(Some(snapped(
        center.x + rng.jitter(0.002),
        center.y + rng.jitter(0.002),
    )))
}

fn base_line(center: Coord, rng: &mut SceneRng) -> Geometry {
    let n = rng.0.gen_range(4..=6);
    let mut heading: f64 = rng.range(0.0, std::f64::consts::TAU);
    let mut x = center.x + rng.jitter(0.001);
    let mut y = center.y + rng.jitter(0.001);
    let mut vs = vec![snapped(x, y)];
    for _ in 1..n {
        let step = rng.range(0.001, 0.003);
        heading += rng.jitter(0.9);
        x += step * heading.cos();
        y += step * heading.sin();
        let v = snapped(x, y);
        if *vs.last().unwrap() != v {
            vs.push(v);
        }
    }
    if vs.len() < 2 {
        vs.push(snapped(x + 0.001, y));
    }
    Geometry::LineString(vs)
}

fn base_polygon(center: Coord, rng: &mut SceneRng) -> Geometry {
    let w = rng.range(0.002, 0.005);
    let h = rng.range(0.002, 0.005);
    let cx = center.x + rng.jitter(0.001);
    let cy = center.y + rng.jitter(0.001);
    let ring = if rng.0.gen_bool(0.5) {
        vec![
            snapped(cx - w, cy - h),
            snapped(cx + w, cy - h),
            snapped(cx + w, cy + h),
            snapped(cx - w, cy + h),
            snapped(cx - w, cy - h),
        ]
    } else {
        // Diamond: still simple, breaks the axis-aligned monotony.
        vec![
            snapped(cx - w, cy),
            snapped(cx, cy - h),
            snapped(cx + w, cy),
            snapped(cx, cy + h),
            snapped(cx - w, cy),
        ]
    };
    Geometry::Polygon(Polygon::new(ring, Vec::new()))
}

fn base_shape(ty: GeomType, center: Coord, rng: &mut SceneRng) -> Geometry {
    match ty {
        GeomType::Point => base_point(center, rng),
        GeomType::LineString => base_line(center, rng),
        _ => base_polygon(center, rng),
    }
}

fn rect_between(a: Coord, b: Coord) -> Geometry {
    let (x0, x1) = (a.x.min(b.x), a.x.max(b.x));
    let (y0, y1) = (a.y.min(b.y), a.y.max(b.y));
    Geometry::Polygon(Polygon::new(
        vec![
            Coord::new(x0, y0),
            Coord::new(x1, y0),
            Coord::new(x1, y1),
            Coord::new(x0, y1),
            Coord::new(x0, y0),
        ],
        Vec::new(),
    ))
}

fn ring_vertices(g: &Geometry) -> Vec<Coord> {
    match g {
        Geometry::Polygon(p) => p.outer[..p.outer.len() - 1].to_vec(),
        _ => Vec::new(),
    }
}

fn line_vertices(g: &Geometry) -> Vec<Coord> {
    match g {
        Geometry::LineString(vs) => vs.clone(),
        _ => Vec::new(),
    }
}

/// A point strictly inside a polygon, by seeded rejection sampling
/// against a prebuilt point locator.
fn polygon_interior_point(g: &Geometry, rng: &mut SceneRng) -> Option<Coord> {
    let (min, max) = g.bbox()?;
    let area = match crate::topology::shape::Shape::build(g) {
        crate::topology::shape::Shape::Areas(a) => a,
        _ => return None,
    };
    for _ in 0..64 {
        let p = snapped(rng.range(min.x, max.x), rng.range(min.y, max.y));
        if area.locate(p) == crate::topology::shape::Loc::Interior {
            return Some(p);
        }
    }
    None
}

/// One candidate subject of type `ta` intended to hold `pred` with
/// `object`; the caller verifies and retries.
fn subject_candidate(
    pred: Predicate,
    ta: GeomType,
    object: &Geometry,
    rng: &mut SceneRng,
) -> Option<Geometry> {
    let (min, max) = object.bbox()?;
    let w = (max.x - min.x).max(0.0005);
    let h = (max.y - min.y).max(0.0005);
    let margin = 0.5 * (w + h);
    let center = Coord::new((min.x + max.x) / 2.0, (min.y + max.y) / 2.0);
    match (pred, ta) {
        (Predicate::Within, GeomType::Point) => match object {
            Geometry::LineString(vs) => {
                if vs.len() > 2 && rng.0.gen_bool(0.6) {
                    let i = rng.0.gen_range(1..vs.len() - 1);
                    Some(Geometry::Point(Some(vs[i])))
                } else {
                    let i = rng.0.gen_range(0..vs.len() - 1);
                    exact_point_between(vs[i], vs[i + 1], rng.0)
                        .map(|p| Geometry::Point(Some(p)))
                }
            }
            _ => polygon_interior_point(object, rng).map(|p| Geometry::Point(Some(p))),
        },
        (Predicate::Within, GeomType::LineString) => match object {
            Geometry::LineString(vs) => {
                if vs.len() < 3 {
                    return None;
                }
                let i = rng.0.gen_range(0..vs.len() - 2);
                let j = rng.0.gen_range(i + 1..vs.len() - 1);
                Some(Geometry::LineString(vs[i..=j].to_vec()))
            }
            _ => {
                let p = polygon_interior_point(object, rng)?;
                let d = rng.range(w.min(h) / 32.0, w.min(h) / 8.0);
                let candidate = match rng.0.gen_range(0..3) {
                    0 => Geometry::LineString(vec![p, Coord::new(p.x + d, p.y)]),
                    1 => Geometry::LineString(vec![p, Coord::new(p.x, p.y + d)]),
                    _ => Geometry::LineString(vec![p, Coord::new(p.x + d, p.y + d)]),
                };
                Some(candidate)
            }
        },
        (Predicate::Within, GeomType::Polygon) => {
            let p = polygon_interior_point(object, rng)?;
            let s = rng.range(w.min(h) / 32.0, w.min(h) / 12.0);
            Some(rect_between(p, Coord::new(p.x + s, p.y + s)))
        }
        (Predicate::Touches, GeomType::Point) => match object {
            Geometry::LineString(vs) => {
                let end = if rng.0.gen_bool(0.5) { 0 } else { vs.len() - 1 };
                Some(Geometry::Point(Some(vs[end])))
            }
            _ => {
                let ring = ring_vertices(object);
                if rng.0.gen_bool(0.5) {
                    ring.choose(rng.0).map(|v| Geometry::Point(Some(*v)))
                } else {
                    let i = rng.0.gen_range(0..ring.len());
                    let j = (i + 1) % ring.len();
                    exact_midpoint(ring[i], ring[j]).map(|p| Geometry::Point(Some(p)))
                }
            }
        },
        (Predicate::Touches, GeomType::LineString) => {
            let anchor = match object {
                Geometry::Point(Some(c)) => *c,
                Geometry::LineString(vs) => {
                    *(if rng.0.gen_bool(0.5) { vs.first() } else { vs.last() }).unwrap()
                }
                _ => {
                    let ring = ring_vertices(object);
                    *ring.choose(rng.0)?
                }
            };
            let away_x = if anchor.x >= center.x { 1.0 } else { -1.0 };
            let away_y = if anchor.y >= center.y { 1.0 } else { -1.0 };
            let dx = away_x * rng.range(margin * 0.5, margin);
            let dy = away_y * rng.range(margin * 0.5, margin);
            let far = snapped(anchor.x + dx, anchor.y + dy);
            Some(Geometry::LineString(vec![anchor, far]))
        }
        (Predicate::Touches, GeomType::Polygon) => {
            let anchor = match object {
                Geometry::Point(Some(c)) => *c,
                Geometry::LineString(vs) => {
                    *(if rng.0.gen_bool(0.5) { vs.first() } else { vs.last() }).unwrap()
                }
                Geometry::Polygon(p) => {
                    // Share part of an edge when the shell is a rectangle,
                    // otherwise touch at a vertex.
                    let open = &p.outer[..p.outer.len() - 1];
                    if rng.0.gen_bool(0.5) {
                        let i = rng.0.gen_range(0..open.len());
                        let a = open[i];
                        let b = open[(i + 1) % open.len()];
                        if a.x == b.x {
                            let side = if a.x >= center.x { 1.0 } else { -1.0 };
                            let (y0, y1) = (a.y.min(b.y), a.y.max(b.y));
                            return Some(rect_between(
                                Coord::new(a.x, y0),
                                Coord::new(snap(a.x + side * rng.range(0.001, 0.003)), y1),
                            ));
                        }
                        if a.y == b.y {
                            let side = if a.y >= center.y { 1.0 } else { -1.0 };
                            let (x0, x1) = (a.x.min(b.x), a.x.max(b.x));
                            return Some(rect_between(
                                Coord::new(x0, a.y),
                                Coord::new(x1, snap(a.y + side * rng.range(0.001, 0.003))),
                            ));
                        }
                    }
                    *open.choose(rng.0)?
                }
                _ => return None,
            };
            let sx = if anchor.x >= center.x { 1.0 } else { -1.0 };
            let sy = if anchor.y >= center.y { 1.0 } else { -1.0 };
            let corner = Coord::new(
                snap(anchor.x + sx * rng.range(0.001, 0.003)),
                snap(anchor.y + sy * rng.range(0.001, 0.003)),
            );
            Some(rect_between(anchor, corner))
        }
        (Predicate::Crosses, GeomType::LineString) => match object {
            Geometry::LineString(vs) => {
                let i = rng.0.gen_range(0..vs.len() - 1);
                let a = vs[i];
                let b = vs[i + 1];
                let t = rng.range(0.3, 0.7);
                let m = Coord::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y));
                // Perpendicular-ish chord through the segment.
                let nx = -(b.y - a.y);
                let ny = b.x - a.x;
                let scale = rng.range(1.0, 2.0);
                Some(Geometry::LineString(vec![
                    snapped(m.x - nx * scale, m.y - ny * scale),
                    snapped(m.x + nx * scale, m.y + ny * scale),
                ]))
            }
            _ => {
                let p = polygon_interior_point(object, rng)?;
                Some(if rng.0.gen_bool(0.5) {
                    Geometry::LineString(vec![
                        snapped(min.x - margin, p.y),
                        snapped(max.x + margin, p.y),
                    ])
                } else {
                    Geometry::LineString(vec![
                        snapped(p.x, min.y - margin),
                        snapped(p.x, max.y + margin),
                    ])
                })
            }
        },
        (Predicate::Crosses, GeomType::Polygon) => {
            let vs = line_vertices(object);
            if vs.len() < 2 {
                return None;
            }
            let i = rng.0.gen_range(0..vs.len() - 1);
            let (a, b) = (vs[i], vs[i + 1]);
            let t = rng.range(0.35, 0.65);
            let m = Coord::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y));
            let s = rng.range(0.2, 0.4) * (dist_pp(a, b).max(0.0005));
            Some(rect_between(
                snapped(m.x - s, m.y - s),
                snapped(m.x + s, m.y + s),
            ))
        }
        (Predicate::Overlaps, GeomType::LineString) => {
            let vs = line_vertices(object);
            if vs.len() < 3 {
                return None;
            }
            let off = snapped(
                max.x + rng.range(margin * 0.5, margin),
                max.y + rng.range(margin * 0.5, margin),
            );
            if rng.0.gen_bool(0.5) {
                let start = rng.0.gen_range(1..vs.len() - 1);
                let mut tail: Vec<Coord> = vs[start..].to_vec();
                tail.push(off);
                Some(Geometry::LineString(tail))
            } else {
                let end = rng.0.gen_range(1..vs.len() - 1);
                let mut head = vec![off];
                head.extend_from_slice(&vs[..=end]);
                Some(Geometry::LineString(head))
            }
        }
        (Predicate::Overlaps, GeomType::Polygon) => {
            let p = polygon_interior_point(object, rng)?;
            Some(rect_between(
                p,
                snapped(
                    max.x + rng.range(margin * 0.3, margin),
                    max.y + rng.range(margin * 0.3, margin),
                ),
            ))
        }
        (Predicate::Disjoint, _) => {
            let gap = rng.range(0.0001, 0.0006);
            let candidate = match ta {
                GeomType::Point => {
                    Geometry::Point(Some(snapped(max.x + gap, center.y + rng.jitter(0.0002))))
                }
                GeomType::LineString => {
                    let start = snapped(max.x + gap, center.y + rng.jitter(0.0002));
                    let far = snapped(start.x + 0.002, start.y + rng.jitter(0.001));
                    Geometry::LineString(vec![start, far])
                }
                _ => {
                    let near = snapped(max.x + gap, center.y + rng.jitter(0.0002));
                    rect_between(near, snapped(near.x + 0.002, near.y + 0.002))
                }
            };
            Some(candidate)
        }
        _ => None,
    }
}

/// Build (subject, object) with `classify(subject, object) == pred`,
/// retrying candidate constructions with fresh jitter.
fn build_pair(
    pred: Predicate,
    ta: GeomType,
    tb: GeomType,
    center: Coord,
    rng: &mut ChaCha8Rng,
    buffer: f64,
) -> Result<(Geometry, Geometry), SynthError> {
    for _ in 0..50 {
        let mut scene = SceneRng(rng);
        // Containment pairs are built the other way round: make the
        // subject, then drop the object inside it.
        let (subject, object) = if pred == Predicate::Contains {
            let subject = base_shape(ta, center, &mut scene);
            match subject_candidate(Predicate::Within, tb, &subject, &mut scene) {
                Some(object) => (subject, object),
                None => continue,
            }
        } else {
            let object = base_shape(tb, center, &mut scene);
            match subject_candidate(pred, ta, &object, &mut scene) {
                Some(subject) => (subject, object),
                None => continue,
            }
        };
        if crate::geometry::validate(&subject).is_empty()
            && crate::geometry::validate(&object).is_empty()
            && classify_predicate(&subject, &object) == Ok(Some(pred))
        {
            if pred == Predicate::Disjoint
                && geometry_distance(&subject, &object) > buffer
            {
                continue;
            }
            return Ok((subject, object));
        }
    }
    Err(SynthError::Construction {
        predicate: pred,
        subject_type: ta.name(),
    })
}

fn place_type_for(ty: GeomType) -> &'static str {
    match ty {
        GeomType::Point => "poi",
        GeomType::LineString => "road",
        _ => "parcel",
    }
}

/// Generate a synthetic corpus of scenes: for every type/predicate
/// combination except equals, `scenes_per_combo` verified (subject,
/// object) pairs laid out on a sparse grid so scenes never interact.
/// Equals triplets are synthesised from objects at sampling time.
pub fn generate_corpus(spec: &CorpusSpec) -> Result<Corpus, SynthError> {
    let mut corpus = Corpus::new();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let combos: Vec<(GeomType, Predicate, GeomType)> = crate::topology::all_combinations()
        .into_iter()
        .filter(|(_, p, _)| *p != Predicate::Equals)
        .collect();
    let mut cell = 0usize;
    for (ta, pred, tb) in combos {
        for i in 0..spec.scenes_per_combo {
            let center = Coord::new(
                -98.0 + (cell % 120) as f64 * 0.25,
                38.0 + (cell / 120) as f64 * 0.25,
            );
            cell += 1;
            let (subject, object) = build_pair(pred, ta, tb, center, &mut rng, spec.buffer)?;
            let tag = format!("{}-{}-{}-{i}", ta.name(), pred, tb.name());
            corpus
                .insert(SpatialEntity {
                    id: format!("s-{tag}"),
                    geometry: subject,
                    name: None,
                    place_type: Some(place_type_for(ta).to_string()),
                    source: "synthetic".to_string(),
                })
                .map_err(|e| SynthError::Postcondition(e.to_string()))?;
            corpus
                .insert(SpatialEntity {
                    id: format!("o-{tag}"),
                    geometry: object,
                    name: None,
                    place_type: Some(place_type_for(tb).to_string()),
                    source: "synthetic".to_string(),
                })
                .map_err(|e| SynthError::Postcondition(e.to_string()))?;
        }
    }
    Ok(corpus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{parse_wkt, to_wkt_precision, WktPrecision};

    #[test]
    fn equals_point_is_identity() {
        let p = parse_wkt("POINT (1 2)").unwrap();
        let q = synthesize_equal(&p, 7).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn equals_line_grows_by_ten_percent() {
        let vs: Vec<Coord> = (0..10)
            .map(|i| Coord::new(i as f64 * 0.73 + 0.11, (i as f64 * 0.41).sin()))
            .collect();
        let line = Geometry::LineString(vs);
        let out = synthesize_equal(&line, 3).unwrap();
        match &out {
            Geometry::LineString(vs) => assert_eq!(vs.len(), 11),
            _ => panic!(),
        }
        assert_eq!(
            classify_predicate(&line, &out).unwrap(),
            Some(Predicate::Equals)
        );
        assert_ne!(
            to_wkt_precision(&line, WktPrecision::Full),
            to_wkt_precision(&out, WktPrecision::Full)
        );
    }

    #[test]
    fn equals_polygon_rotates_ring() {
        let square = parse_wkt("POLYGON ((0 0, 4 0, 4 4, 0 4, 0 0))").unwrap();
        let out = synthesize_equal(&square, 11).unwrap();
        assert_eq!(
            classify_predicate(&square, &out).unwrap(),
            Some(Predicate::Equals)
        );
        assert_ne!(
            to_wkt_precision(&square, WktPrecision::Full),
            to_wkt_precision(&out, WktPrecision::Full)
        );
    }

    #[test]
    fn equals_rejects_multi() {
        let mp = parse_wkt("MULTIPOINT (0 0, 1 1)").unwrap();
        assert!(matches!(
            synthesize_equal(&mp, 1),
            Err(SynthError::UnsupportedType("MultiPoint"))
        ));
    }

    fn entity(id: &str, wkt: &str) -> SpatialEntity {
        SpatialEntity {
            id: id.to_string(),
            geometry: parse_wkt(wkt).unwrap(),
            name: None,
            place_type: None,
            source: "test".to_string(),
        }
    }

    #[test]
    fn disjoint_sampling_respects_buffer() {
        let object = entity("obj", "POLYGON ((0 0, 1 0, 1 1, 0 1, 0 0))");
        let near = entity("near", "POINT (1.0005 0.5)");
        let far = entity("far", "POINT (5 5)");
        let inside = entity("inside", "POINT (0.5 0.5)");
        let pool = [far.clone(), inside.clone(), near.clone()];
        let picked = sample_disjoint(pool.iter(), &object, 0.001).unwrap();
        assert_eq!(picked.id, "near");
        let pool_far = [far, inside];
        assert!(matches!(
            sample_disjoint(pool_far.iter(), &object, 0.001),
            Err(SynthError::NoCandidate)
        ));
    }

    #[test]
    fn corpus_scenes_all_verify() {
        let corpus = generate_corpus(&CorpusSpec::new(2, 42)).unwrap();
        // 32 non-equals combos, 2 scenes each, 2 entities per scene.
        assert_eq!(corpus.len(), 32 * 2 * 2);
        for (ta, pred, tb) in crate::topology::all_combinations() {
            if pred == Predicate::Equals {
                continue;
            }
            for i in 0..2 {
                let tag = format!("{}-{}-{}-{i}", ta.name(), pred, tb.name());
                let s = corpus.get(&format!("s-{tag}")).unwrap();
                let o = corpus.get(&format!("o-{tag}")).unwrap();
                assert_eq!(
                    classify_predicate(&s.geometry, &o.geometry).unwrap(),
                    Some(pred),
                    "{tag}"
                );
            }
        }
    }

    #[test]
    fn corpus_generation_is_deterministic() {
        let a = generate_corpus(&CorpusSpec::new(1, 9)).unwrap();
        let b = generate_corpus(&CorpusSpec::new(1, 9)).unwrap();
        let wkts = |c: &Corpus| {
            c.iter()
                .map(|e| to_wkt_precision(&e.geometry, WktPrecision::Full))
                .collect::<Vec<_>>()
        };
        assert_eq!(wkts(&a), wkts(&b));
    }
}
