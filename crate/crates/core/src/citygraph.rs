//! Road network model: an immutable adjacency-list graph loaded from a vertex
//! file and an edge file.
//!
//! Both files are plain text with one whitespace-separated record per line;
//! blank lines and lines starting with `#` are skipped.
//!
//! ```text
//! # vertices: id lat lon
//! 1 6.20 -75.57
//! # edges: from_id to_id weight_meters
//! 1 2 150.0
//! ```
//!
//! Vertices are stored densely in ascending [`VertexId`] order with CSR
//! adjacency, so "lowest dense index" and "lowest id" mean the same thing
//! wherever ties are broken.

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::geo::{GeoPoint, PlanarFrame};

/// Vertex code as it appears in the vertex file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub u64);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("missing file: {}", .0.display())]
    MissingFile(PathBuf),
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{}:{line}: {reason}", file.display())]
    MalformedLine {
        file: PathBuf,
        line: usize,
        reason: String,
    },
    #[error("{}:{line}: edge references unknown vertex {id}", file.display())]
    UnknownEndpoint {
        file: PathBuf,
        line: usize,
        id: VertexId,
    },
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("vertex {0} defined twice with different coordinates")]
    DuplicateVertex(VertexId),
    #[error("invalid weight {weight} on edge {from} -> {to}")]
    InvalidWeight {
        from: VertexId,
        to: VertexId,
        weight: f64,
    },
    #[error("graph has no vertices")]
    EmptyGraph,
}

/// Accumulates vertices and edges, then freezes them into a [`CityGraph`].
///
/// Duplicate edges keep the minimum weight. In undirected mode `a b` and
/// `b a` are the same edge.
#[derive(Debug, Default)]
pub struct GraphBuilder {
    directed: bool,
    vertices: HashMap<VertexId, GeoPoint>,
    edges: HashMap<(VertexId, VertexId), f64>,
}

impl GraphBuilder {
    pub fn new(directed: bool) -> Self {
        Self {
            directed,
            ..Self::default()
        }
    }

    /// Adds a vertex. Re-adding an id with identical coordinates is a no-op.
    pub fn add_vertex(&mut self, id: VertexId, point: GeoPoint) -> Result<(), GraphError> {
        match self.vertices.get(&id) {
            Some(existing) if *existing != point => Err(GraphError::DuplicateVertex(id)),
            Some(_) => Ok(()),
            None => {
                self.vertices.insert(id, point);
                Ok(())
            }
        }
    }

    pub fn add_edge(&mut self, from: VertexId, to: VertexId, weight: f64) -> Result<(), GraphError> {
        if !(weight.is_finite() && weight >= 0.0) {
            return Err(GraphError::InvalidWeight { from, to, weight });
        }
        for id in [from, to] {
            if !self.vertices.contains_key(&id) {
                return Err(GraphError::UnknownVertex(id));
            }
        }
        let key = if self.directed || from <= to {
            (from, to)
        } else {
            (to, from)
        };
        self.edges
            .entry(key)
            .and_modify(|w| *w = w.min(weight))
            .or_insert(weight);
        Ok(())
    }

    pub fn build(self) -> Result<CityGraph, GraphError> {
        if self.vertices.is_empty() {
            return Err(GraphError::EmptyGraph);
        }
        let mut vertices: Vec<(VertexId, GeoPoint)> = self.vertices.into_iter().collect();
        vertices.sort_unstable_by_key(|(id, _)| *id);
        let ids: Vec<VertexId> = vertices.iter().map(|(id, _)| *id).collect();
        let points: Vec<GeoPoint> = vertices.iter().map(|(_, p)| *p).collect();
        let index: HashMap<VertexId, u32> = ids
            .iter()
            .enumerate()
            .map(|(i, id)| (*id, i as u32))
            .collect();

        let edge_count = self.edges.len();
        let mut arcs: Vec<(u32, u32, f64)> = Vec::with_capacity(edge_count * 2);
        for ((a, b), w) in self.edges {
            let (u, v) = (index[&a], index[&b]);
            arcs.push((u, v, w));
            if !self.directed && u != v {
                arcs.push((v, u, w));
            }
        }
        arcs.sort_unstable_by_key(|a| (a.0, a.1));

        let mut offsets = vec![0u32; ids.len() + 1];
        for (u, _, _) in &arcs {
            offsets[*u as usize + 1] += 1;
        }
        for i in 0..ids.len() {
            offsets[i + 1] += offsets[i];
        }
        let targets: Vec<u32> = arcs.iter().map(|a| a.1).collect();
        let weights: Vec<f64> = arcs.iter().map(|a| a.2).collect();

        let frame = PlanarFrame::centered_on(&points).expect("non-empty");
        let planar: Vec<[f64; 2]> = points.iter().map(|p| frame.project(p)).collect();
        let heuristic_scale = admissible_scale(&offsets, &targets, &weights, &planar);

        Ok(CityGraph {
            directed: self.directed,
            ids,
            points,
            index,
            offsets,
            targets,
            weights,
            edge_count,
            planar,
            heuristic_scale,
        })
    }
}

/// Largest factor `s <= 1` such that every arc weight is at least `s` times
/// the planar length of the arc. Scaling straight-line distance by `s` then
/// never overestimates a remaining path length. The small shrink keeps the
/// bound safe against rounding in the projection.
fn admissible_scale(offsets: &[u32], targets: &[u32], weights: &[f64], planar: &[[f64; 2]]) -> f64 {
    let mut scale: f64 = 1.0;
    for u in 0..offsets.len() - 1 {
        for k in offsets[u] as usize..offsets[u + 1] as usize {
            let v = targets[k] as usize;
            let len = planar_distance(planar[u], planar[v]);
            if len > 0.0 {
                scale = scale.min(weights[k] / len);
            }
        }
    }
    scale * (1.0 - 1e-9)
}

pub(crate) fn planar_distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Immutable road network.
#[derive(Debug, Clone)]
pub struct CityGraph {
    directed: bool,
    ids: Vec<VertexId>,
    points: Vec<GeoPoint>,
    index: HashMap<VertexId, u32>,
    offsets: Vec<u32>,
    targets: Vec<u32>,
    weights: Vec<f64>,
    edge_count: usize,
    planar: Vec<[f64; 2]>,
    heuristic_scale: f64,
}

impl PartialEq for CityGraph {
    fn eq(&self, other: &Self) -> bool {
        self.directed == other.directed
            && self.ids == other.ids
            && self.points == other.points
            && self.offsets == other.offsets
            && self.targets == other.targets
            && self.weights == other.weights
    }
}

impl CityGraph {
    pub fn vertex_count(&self) -> usize {
        self.ids.len()
    }

    /// Number of distinct edge records (an undirected edge counts once).
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Number of stored directed arcs.
    pub fn arc_count(&self) -> usize {
        self.targets.len()
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn contains(&self, id: VertexId) -> bool {
        self.index.contains_key(&id)
    }

    pub fn point(&self, id: VertexId) -> Option<GeoPoint> {
        self.index_of(id).map(|i| self.points[i])
    }

    /// All vertices in ascending id order.
    pub fn vertices(&self) -> impl Iterator<Item = (VertexId, GeoPoint)> + '_ {
        self.ids.iter().copied().zip(self.points.iter().copied())
    }

    /// Outgoing arcs of `id`; empty for unknown vertices.
    pub fn neighbors(&self, id: VertexId) -> impl Iterator<Item = (VertexId, f64)> + '_ {
        let range = match self.index_of(id) {
            Some(u) => self.offsets[u] as usize..self.offsets[u + 1] as usize,
            None => 0..0,
        };
        range.map(move |k| (self.ids[self.targets[k] as usize], self.weights[k]))
    }

    /// Weight of the arc `from -> to`, if present.
    pub fn arc_weight(&self, from: VertexId, to: VertexId) -> Option<f64> {
        let u = self.index_of(from)?;
        let v = self.index_of(to)? as u32;
        let lo = self.offsets[u] as usize;
        let hi = self.offsets[u + 1] as usize;
        self.targets[lo..hi]
            .binary_search(&v)
            .ok()
            .map(|k| self.weights[lo + k])
    }

    /// Snaps `query` to the closest vertex under the equirectangular metric.
    /// Ties go to the lowest id.
    pub fn nearest_vertex(&self, query: &GeoPoint) -> Result<(VertexId, GeoPoint), GraphError> {
        let mut best: Option<(usize, f64)> = None;
        for (i, p) in self.points.iter().enumerate() {
            let (dx, dy) = query.projected_offset(p);
            let d2 = dx * dx + dy * dy;
            if best.is_none_or(|(_, b)| d2 < b) {
                best = Some((i, d2));
            }
        }
        best.map(|(i, _)| (self.ids[i], self.points[i]))
            .ok_or(GraphError::EmptyGraph)
    }

    /// Scale applied to straight-line distance by the admissible heuristic.
    pub fn heuristic_scale(&self) -> f64 {
        self.heuristic_scale
    }

    pub(crate) fn index_of(&self, id: VertexId) -> Option<usize> {
        self.index.get(&id).map(|&i| i as usize)
    }

    pub(crate) fn id_at(&self, idx: usize) -> VertexId {
        self.ids[idx]
    }

    pub(crate) fn arcs_of(&self, idx: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let lo = self.offsets[idx] as usize;
        let hi = self.offsets[idx + 1] as usize;
        self.targets[lo..hi]
            .iter()
            .zip(&self.weights[lo..hi])
            .map(|(&t, &w)| (t as usize, w))
    }

    pub(crate) fn planar_at(&self, idx: usize) -> [f64; 2] {
        self.planar[idx]
    }
}

/// Reads a graph from a vertex file and an edge file and reports how long
/// the load took.
pub fn load_city_graph(
    vertices_path: &Path,
    edges_path: &Path,
    directed: bool,
) -> Result<(CityGraph, Duration), GraphError> {
    let started = Instant::now();
    let mut builder = GraphBuilder::new(directed);

    for_each_record(vertices_path, |line, fields| {
        let id = parse_field::<u64>(vertices_path, line, fields[0], "vertex id")?;
        let lat = parse_field::<f64>(vertices_path, line, fields[1], "latitude")?;
        let lon = parse_field::<f64>(vertices_path, line, fields[2], "longitude")?;
        let point = GeoPoint::new(lat, lon).map_err(|e| malformed(vertices_path, line, e.to_string()))?;
        builder
            .add_vertex(VertexId(id), point)
            .map_err(|e| malformed(vertices_path, line, e.to_string()))
    })?;
    if builder.vertices.is_empty() {
        return Err(GraphError::EmptyGraph);
    }

    for_each_record(edges_path, |line, fields| {
        let from = VertexId(parse_field::<u64>(edges_path, line, fields[0], "source id")?);
        let to = VertexId(parse_field::<u64>(edges_path, line, fields[1], "target id")?);
        let weight = parse_field::<f64>(edges_path, line, fields[2], "weight")?;
        builder.add_edge(from, to, weight).map_err(|e| match e {
            GraphError::UnknownVertex(id) => GraphError::UnknownEndpoint {
                file: edges_path.to_path_buf(),
                line,
                id,
            },
            other => malformed(edges_path, line, other.to_string()),
        })
    })?;

    let graph = builder.build()?;
    Ok((graph, started.elapsed()))
}

fn for_each_record(
    path: &Path,
    mut f: impl FnMut(usize, &[&str]) -> Result<(), GraphError>,
) -> Result<(), GraphError> {
    let file = File::open(path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => GraphError::MissingFile(path.to_path_buf()),
        _ => GraphError::Io {
            path: path.to_path_buf(),
            source: e,
        },
    })?;
    let reader = BufReader::new(file);
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| GraphError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_ascii_whitespace().collect();
        if fields.len() != 3 {
            return Err(malformed(
                path,
                line_no,
                format!("expected 3 fields, found {}", fields.len()),
            ));
        }
        f(line_no, &fields)?;
    }
    Ok(())
}

fn parse_field<T: std::str::FromStr>(
    path: &Path,
    line: usize,
    raw: &str,
    what: &str,
) -> Result<T, GraphError> {
    raw.parse()
        .map_err(|_| malformed(path, line, format!("cannot parse {what} from {raw:?}")))
}

fn malformed(path: &Path, line: usize, reason: String) -> GraphError {
    GraphError::MalformedLine {
        file: path.to_path_buf(),
        line,
        reason,
    }
}
