//! Shortest paths on the road network and the complete terminal subgraph.
//!
//! Both searches use a binary heap with lazy deletion: stale entries are
//! skipped when popped instead of being decreased in place. Equal keys pop
//! lowest vertex id first, which keeps results deterministic.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use thiserror::Error;

use crate::citygraph::{planar_distance, CityGraph, GraphError, VertexId};
use crate::geo::GeoPoint;

const NO_PRED: u32 = u32::MAX;

#[derive(Debug, Error)]
pub enum PathError {
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("no path from {from} to {target}")]
    Unreachable { from: VertexId, target: VertexId },
    #[error("need at least 2 distinct terminals, got {0}")]
    TooFewTerminals(usize),
    #[error("terminal {0} appears more than once")]
    DuplicateTerminal(VertexId),
    #[error("{terminals} terminals but {points} origin points")]
    LengthMismatch { terminals: usize, points: usize },
    #[error("distance matrix has {len} entries, expected {n}x{n}")]
    BadMatrix { n: usize, len: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// A* guidance. `Euclidean` and `Zero` are admissible; `Manhattan` is not.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Heuristic {
    #[default]
    Euclidean,
    Manhattan,
    Zero,
}

impl FromStr for Heuristic {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "euclidean" => Ok(Self::Euclidean),
            "manhattan" => Ok(Self::Manhattan),
            "zero" | "none" => Ok(Self::Zero),
            other => Err(format!("unknown heuristic {other:?}")),
        }
    }
}

impl fmt::Display for Heuristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Euclidean => "euclidean",
            Self::Manhattan => "manhattan",
            Self::Zero => "zero",
        })
    }
}

impl Heuristic {
    fn estimate(self, graph: &CityGraph, from: usize, to: usize) -> f64 {
        match self {
            Heuristic::Zero => 0.0,
            Heuristic::Euclidean => {
                graph.heuristic_scale() * planar_distance(graph.planar_at(from), graph.planar_at(to))
            }
            // Plain |dx| + |dy| in projected meters.
            Heuristic::Manhattan => {
                let a = graph.planar_at(from);
                let b = graph.planar_at(to);
                (a[0] - b[0]).abs() + (a[1] - b[1]).abs()
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct QueueEntry {
    key: f64,
    cost: f64,
    vertex: u32,
}

impl PartialEq for QueueEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for QueueEntry {}

impl Ord for QueueEntry {
    // Reversed so `BinaryHeap` behaves as a min-heap on (key, vertex).
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .key
            .total_cmp(&self.key)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for QueueEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single-source shortest-path tree.
#[derive(Debug, Clone)]
pub struct ShortestPaths<'g> {
    graph: &'g CityGraph,
    source: VertexId,
    dist: Vec<f64>,
    pred: Vec<u32>,
}

impl<'g> ShortestPaths<'g> {
    pub fn source(&self) -> VertexId {
        self.source
    }

    /// Shortest distance to `v`; `f64::INFINITY` when unreachable or unknown.
    pub fn distance(&self, v: VertexId) -> f64 {
        self.graph
            .index_of(v)
            .map_or(f64::INFINITY, |i| self.dist[i])
    }

    pub fn predecessor(&self, v: VertexId) -> Option<VertexId> {
        let i = self.graph.index_of(v)?;
        match self.pred[i] {
            NO_PRED => None,
            p => Some(self.graph.id_at(p as usize)),
        }
    }

    /// Vertex sequence from the source to `v`, or `None` if unreachable.
    pub fn path_to(&self, v: VertexId) -> Option<Vec<VertexId>> {
        let i = self.graph.index_of(v)?;
        if self.dist[i].is_infinite() {
            return None;
        }
        Some(walk_back(self.graph, &self.pred, i))
    }
}

fn walk_back(graph: &CityGraph, pred: &[u32], mut at: usize) -> Vec<VertexId> {
    let mut path = vec![graph.id_at(at)];
    while pred[at] != NO_PRED {
        at = pred[at] as usize;
        path.push(graph.id_at(at));
    }
    path.reverse();
    path
}

/// Dijkstra from `source` over the whole graph.
pub fn dijkstra_sssp(graph: &CityGraph, source: VertexId) -> Result<ShortestPaths<'_>, PathError> {
    let s = graph.index_of(source).ok_or(PathError::UnknownVertex(source))?;
    let n = graph.vertex_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut pred = vec![NO_PRED; n];
    let mut heap = BinaryHeap::new();

    dist[s] = 0.0;
    heap.push(QueueEntry {
        key: 0.0,
        cost: 0.0,
        vertex: s as u32,
    });
    while let Some(QueueEntry { cost, vertex, .. }) = heap.pop() {
        let u = vertex as usize;
        if cost > dist[u] {
            continue;
        }
        for (v, w) in graph.arcs_of(u) {
            let candidate = cost + w;
            if candidate < dist[v] {
                dist[v] = candidate;
                pred[v] = vertex;
                heap.push(QueueEntry {
                    key: candidate,
                    cost: candidate,
                    vertex: v as u32,
                });
            }
        }
    }
    Ok(ShortestPaths {
        graph,
        source,
        dist,
        pred,
    })
}

/// Point-to-point A*. Vertices may be re-expanded when a cheaper route to
/// them turns up, so any admissible heuristic yields an optimal answer.
pub fn astar(
    graph: &CityGraph,
    source: VertexId,
    target: VertexId,
    heuristic: Heuristic,
) -> Result<(f64, Vec<VertexId>), PathError> {
    let s = graph.index_of(source).ok_or(PathError::UnknownVertex(source))?;
    let t = graph.index_of(target).ok_or(PathError::UnknownVertex(target))?;
    let n = graph.vertex_count();
    let mut best = vec![f64::INFINITY; n];
    let mut pred = vec![NO_PRED; n];
    let mut heap = BinaryHeap::new();

    best[s] = 0.0;
    heap.push(QueueEntry {
        key: heuristic.estimate(graph, s, t),
        cost: 0.0,
        vertex: s as u32,
    });
    while let Some(QueueEntry { cost, vertex, .. }) = heap.pop() {
        let u = vertex as usize;
        if cost > best[u] {
            continue;
        }
        if u == t {
            return Ok((cost, walk_back(graph, &pred, t)));
        }
        for (v, w) in graph.arcs_of(u) {
            let candidate = cost + w;
            if candidate < best[v] {
                best[v] = candidate;
                pred[v] = vertex;
                heap.push(QueueEntry {
                    key: candidate + heuristic.estimate(graph, v, t),
                    cost: candidate,
                    vertex: v as u32,
                });
            }
        }
    }
    Err(PathError::Unreachable { from: source, target })
}

/// Ordered waypoints snapped to road vertices. Terminal 0 starts and ends
/// the tour.
#[derive(Debug, Clone, PartialEq)]
pub struct TerminalSet {
    terminals: Vec<VertexId>,
    origin_points: Vec<GeoPoint>,
}

/// Result of snapping user points: the terminal set plus the indices of
/// input points that landed on an already-used vertex and were dropped.
#[derive(Debug, Clone)]
pub struct Snapped {
    pub terminals: TerminalSet,
    pub collapsed: Vec<usize>,
}

impl TerminalSet {
    pub fn new(terminals: Vec<VertexId>, origin_points: Vec<GeoPoint>) -> Result<Self, PathError> {
        if terminals.len() != origin_points.len() {
            return Err(PathError::LengthMismatch {
                terminals: terminals.len(),
                points: origin_points.len(),
            });
        }
        if terminals.len() < 2 {
            return Err(PathError::TooFewTerminals(terminals.len()));
        }
        let mut seen = HashSet::with_capacity(terminals.len());
        if let Some(dup) = terminals.iter().find(|t| !seen.insert(**t)) {
            return Err(PathError::DuplicateTerminal(*dup));
        }
        Ok(Self {
            terminals,
            origin_points,
        })
    }

    /// Snaps every point to its nearest vertex. A point whose vertex is
    /// already taken by an earlier point is dropped and reported.
    pub fn snap(graph: &CityGraph, points: &[GeoPoint]) -> Result<Snapped, PathError> {
        let mut terminals = Vec::with_capacity(points.len());
        let mut origins = Vec::with_capacity(points.len());
        let mut collapsed = Vec::new();
        let mut seen = HashSet::new();
        for (i, p) in points.iter().enumerate() {
            let (v, _) = graph.nearest_vertex(p)?;
            if seen.insert(v) {
                terminals.push(v);
                origins.push(*p);
            } else {
                collapsed.push(i);
            }
        }
        Ok(Snapped {
            terminals: Self::new(terminals, origins)?,
            collapsed,
        })
    }

    pub fn len(&self) -> usize {
        self.terminals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terminals.is_empty()
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.terminals
    }

    pub fn origin_points(&self) -> &[GeoPoint] {
        &self.origin_points
    }
}

/// Distances (and road paths) between every ordered pair of terminals.
/// Unreachable pairs hold `f64::INFINITY` and no path.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosureMatrix {
    n: usize,
    dist: Vec<f64>,
    paths: Vec<Option<Vec<VertexId>>>,
}

impl ClosureMatrix {
    /// Matrix without road paths, from a row-major `n*n` distance vector.
    pub fn from_distances(n: usize, dist: Vec<f64>) -> Result<Self, PathError> {
        if dist.len() != n * n {
            return Err(PathError::BadMatrix { n, len: dist.len() });
        }
        Ok(Self {
            n,
            dist,
            paths: vec![None; n * n],
        })
    }

    /// Matrix with per-pair road paths, both row-major.
    pub fn with_paths(
        n: usize,
        dist: Vec<f64>,
        paths: Vec<Option<Vec<VertexId>>>,
    ) -> Result<Self, PathError> {
        if dist.len() != n * n || paths.len() != n * n {
            return Err(PathError::BadMatrix { n, len: dist.len().min(paths.len()) });
        }
        Ok(Self { n, dist, paths })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, PathError> {
        let n = rows.len();
        Self::from_distances(n, rows.iter().flatten().copied().collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    pub fn path(&self, i: usize, j: usize) -> Option<&[VertexId]> {
        self.paths[i * self.n + j].as_deref()
    }

    /// True when every pair of terminals is connected.
    pub fn is_complete(&self) -> bool {
        self.dist.iter().all(|d| d.is_finite())
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.dist(i, j) == self.dist(j, i)))
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.dist.chunks(self.n.max(1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosureOptions {
    /// Up to this many terminals, every ordered pair is solved with A*;
    /// above it, one Dijkstra per terminal.
    pub astar_threshold: usize,
    pub heuristic: Heuristic,
    /// Run the per-terminal Dijkstra searches on the rayon pool.
    pub parallel: bool,
}

impl Default for ClosureOptions {
    fn default() -> Self {
        Self {
            astar_threshold: 5,
            heuristic: Heuristic::Euclidean,
            parallel: true,
        }
    }
}

type Row = Vec<(f64, Option<Vec<VertexId>>)>;

/// Builds the complete terminal subgraph and reports the build time.
pub fn build_closure(
    graph: &CityGraph,
    terminals: &TerminalSet,
    options: &ClosureOptions,
) -> Result<(ClosureMatrix, Duration), PathError> {
    let started = Instant::now();
    let vs = terminals.vertices();
    if let Some(v) = vs.iter().find(|v| !graph.contains(**v)) {
        return Err(PathError::UnknownVertex(*v));
    }
    let n = vs.len();

    let rows: Vec<Row> = if n <= options.astar_threshold {
        (0..n)
            .map(|i| astar_row(graph, vs, i, options.heuristic, !graph.is_directed()))
            .collect::<Result<_, _>>()?
    } else if options.parallel {
        (0..n)
            .into_par_iter()
            .map(|i| dijkstra_row(graph, vs, i))
            .collect::<Result<_, _>>()?
    } else {
        (0..n)
            .map(|i| dijkstra_row(graph, vs, i))
            .collect::<Result<_, _>>()?
    };

    let mut dist = Vec::with_capacity(n * n);
    let mut paths = Vec::with_capacity(n * n);
    for (d, p) in rows.into_iter().flatten() {
        dist.push(d);
        paths.push(p);
    }
    if !graph.is_directed() {
        // Summing a path backwards can differ in the last bit; keep the
        // i < j direction so the matrix is exactly symmetric.
        for i in 0..n {
            for j in 0..i {
                dist[i * n + j] = dist[j * n + i];
                paths[i * n + j] = paths[j * n + i].as_ref().map(|p| p.iter().rev().copied().collect());
            }
        }
    }
    Ok((ClosureMatrix { n, dist, paths }, started.elapsed()))
}

/// With `upper_only`, entries below the diagonal are left for mirroring.
fn astar_row(
    graph: &CityGraph,
    vs: &[VertexId],
    i: usize,
    heuristic: Heuristic,
    upper_only: bool,
) -> Result<Row, PathError> {
    vs.iter()
        .enumerate()
        .map(|(j, &target)| {
            if i == j {
                return Ok((0.0, Some(vec![target])));
            }
            if upper_only && j < i {
                return Ok((f64::INFINITY, None));
            }
            match astar(graph, vs[i], target, heuristic) {
                Ok((d, path)) => Ok((d, Some(path))),
                Err(PathError::Unreachable { .. }) => Ok((f64::INFINITY, None)),
                Err(e) => Err(e),
            }
        })
        .collect()
}

fn dijkstra_row(graph: &CityGraph, vs: &[VertexId], i: usize) -> Result<Row, PathError> {
    let tree = dijkstra_sssp(graph, vs[i])?;
    Ok(vs
        .iter()
        .map(|&target| (tree.distance(target), tree.path_to(target)))
        .collect())
}
