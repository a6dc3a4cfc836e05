//! Synthetic grid cities and the timing / tour-quality benchmark suites.
//!
//! Terminal sets are drawn from a seeded ChaCha8 stream, so every row except
//! the wall-clock column can be regenerated from `(graph, seed)`.

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::citygraph::{CityGraph, GraphBuilder, GraphError, VertexId};
use crate::geo::{GeoPoint, METERS_PER_DEGREE};
use crate::pathfind::{build_closure, ClosureOptions, PathError, TerminalSet};
use crate::solvers::{
    held_karp, solve_best_of_both, solve_natural, solve_nearest_neighbor, NaturalMode, SolveError,
};

/// South-west corner of generated grids (central Medellín).
pub const GRID_ORIGIN: (f64, f64) = (6.2442, -75.5812);

pub const ALGO_BUILD_CLOSURE: &str = "build_closure";
pub const ALGO_EXACT: &str = "exact";
pub const ALGO_NEAREST_NEIGHBOR: &str = "nearest_neighbor";
pub const ALGO_NATURAL_NORMAL: &str = "natural_normal";
pub const ALGO_NATURAL_FAST: &str = "natural_fast";
pub const ALGO_BEST_OF_BOTH: &str = "best_of_both";

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("grid needs at least 2 vertices, got {rows}x{cols}")]
    InvalidDimensions { rows: usize, cols: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("{n} terminals requested but the exact solver is capped at {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Path(#[from] PathError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// A 4-connected grid city. Coordinates are jittered by up to
/// `perturbation * spacing_m` on each axis; edge weights are the projected
/// distance between the jittered endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridCitySpec {
    pub rows: usize,
    pub cols: usize,
    pub spacing_m: f64,
    pub perturbation: f64,
    pub seed: u64,
}

impl GridCitySpec {
    fn validate(&self) -> Result<(), BenchError> {
        if self.rows.saturating_mul(self.cols) < 2 {
            return Err(BenchError::InvalidDimensions {
                rows: self.rows,
                cols: self.cols,
            });
        }
        if !(self.spacing_m.is_finite() && self.spacing_m > 0.0) {
            return Err(BenchError::InvalidParameter(format!("spacing {}", self.spacing_m)));
        }
        if !(0.0..0.5).contains(&self.perturbation) {
            return Err(BenchError::InvalidParameter(format!(
                "perturbation {} outside [0, 0.5)",
                self.perturbation
            )));
        }
        Ok(())
    }

    fn vertex_id(&self, r: usize, c: usize) -> VertexId {
        VertexId((r * self.cols + c + 1) as u64)
    }

    fn points(&self) -> Result<Vec<GeoPoint>, BenchError> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let (lat0, lon0) = GRID_ORIGIN;
        let lon_meters = METERS_PER_DEGREE * lat0.to_radians().cos();
        let mut points = Vec::with_capacity(self.rows * self.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                let jx = (2.0 * rng.gen::<f64>() - 1.0) * self.perturbation * self.spacing_m;
                let jy = (2.0 * rng.gen::<f64>() - 1.0) * self.perturbation * self.spacing_m;
                let lat = lat0 + (r as f64 * self.spacing_m + jy) / METERS_PER_DEGREE;
                let lon = lon0 + (c as f64 * self.spacing_m + jx) / lon_meters;
                points.push(
                    GeoPoint::new(lat, lon)
                        .map_err(|e| BenchError::InvalidParameter(format!("grid too large: {e}")))?,
                );
            }
        }
        Ok(points)
    }

    /// `(from, to, weight)` for every undirected grid edge.
    fn edges<'a>(&'a self, points: &'a [GeoPoint]) -> impl Iterator<Item = (VertexId, VertexId, f64)> + 'a {
        (0..self.rows).flat_map(move |r| {
            (0..self.cols).flat_map(move |c| {
                let here = r * self.cols + c;
                let right = (c + 1 < self.cols).then(|| (r, c + 1));
                let up = (r + 1 < self.rows).then(|| (r + 1, c));
                [right, up].into_iter().flatten().map(move |(r2, c2)| {
                    let there = r2 * self.cols + c2;
                    (
                        self.vertex_id(r, c),
                        self.vertex_id(r2, c2),
                        points[here].projected_distance(&points[there]),
                    )
                })
            })
        })
    }
}

/// Writes the vertex and edge files for `spec`. Same seed, same bytes.
pub fn write_grid_city(
    spec: &GridCitySpec,
    vertices: &mut impl Write,
    edges: &mut impl Write,
) -> Result<(), BenchError> {
    let points = spec.points()?;
    writeln!(vertices, "# id lat lon")?;
    for (i, p) in points.iter().enumerate() {
        writeln!(vertices, "{} {} {}", i + 1, p.lat(), p.lon())?;
    }
    writeln!(edges, "# from to weight_m")?;
    for (a, b, w) in spec.edges(&points) {
        writeln!(edges, "{a} {b} {w}")?;
    }
    Ok(())
}

/// Writes `vertices.txt` and `edges.txt` into `dir` and returns their paths.
pub fn generate_grid_city(spec: &GridCitySpec, dir: &Path) -> Result<(PathBuf, PathBuf), BenchError> {
    let vpath = dir.join("vertices.txt");
    let epath = dir.join("edges.txt");
    let mut v = BufWriter::new(File::create(&vpath)?);
    let mut e = BufWriter::new(File::create(&epath)?);
    write_grid_city(spec, &mut v, &mut e)?;
    v.flush()?;
    e.flush()?;
    Ok((vpath, epath))
}

/// Builds the grid directly in memory; equal to loading the generated files.
pub fn grid_city(spec: &GridCitySpec) -> Result<CityGraph, BenchError> {
    let points = spec.points()?;
    let mut builder = GraphBuilder::new(false);
    for (i, p) in points.iter().enumerate() {
        builder.add_vertex(VertexId(i as u64 + 1), *p)?;
    }
    for (a, b, w) in spec.edges(&points) {
        builder.add_edge(a, b, w)?;
    }
    Ok(builder.build()?)
}

/// Picks `n` distinct vertices uniformly at random, in sampling order.
pub fn sample_terminals(
    vertices: &[(VertexId, GeoPoint)],
    n: usize,
    rng: &mut impl Rng,
) -> Result<TerminalSet, BenchError> {
    if n > vertices.len() {
        return Err(BenchError::InvalidParameter(format!(
            "{n} terminals from {} vertices",
            vertices.len()
        )));
    }
    let picked = index::sample(rng, vertices.len(), n);
    let (ids, points) = picked.iter().map(|i| vertices[i]).unzip();
    Ok(TerminalSet::new(ids, points)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub algorithm: String,
    pub n: usize,
    pub seconds: f64,
    pub meters: Option<f64>,
    pub dp_states: Option<usize>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub environment: String,
    pub seed: u64,
}

impl BenchReport {
    fn new(seed: u64) -> Self {
        Self {
            rows: Vec::new(),
            environment: environment_note(),
            seed,
        }
    }

    /// CSV with header `algorithm,n,seconds,meters,dp_states,seed`; absent
    /// values are empty fields.
    pub fn write_csv(&self, out: impl Write) -> Result<(), BenchError> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv(input: impl Read) -> Result<Vec<BenchRow>, BenchError> {
        let mut r = csv::Reader::from_reader(input);
        Ok(r.deserialize().collect::<Result<_, _>>()?)
    }

    pub fn rows_for<'a>(&'a self, algorithm: &'a str) -> impl Iterator<Item = &'a BenchRow> + 'a {
        self.rows.iter().filter(move |r| r.algorithm == algorithm)
    }
}

/// CPU model and thread count, best effort.
pub fn environment_note() -> String {
    let model = std::fs::read_to_string("/proc/cpuinfo")
        .ok()
        .and_then(|info| {
            info.lines()
                .find(|l| l.starts_with("model name"))
                .and_then(|l| l.split_once(':'))
                .map(|(_, v)| v.trim().to_string())
        })
        .unwrap_or_else(|| std::env::consts::ARCH.to_string());
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    format!("{model} ({threads} threads)")
}

pub(crate) fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    Some(if values.len() % 2 == 1 {
        values[mid]
    } else {
        0.5 * (values[mid - 1] + values[mid])
    })
}

#[derive(Debug, Clone)]
pub struct TimingConfig {
    pub ns: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub exact_cap: usize,
    pub closure: ClosureOptions,
}

#[derive(Default)]
struct Samples {
    seconds: Vec<f64>,
    meters: Vec<f64>,
}

impl Samples {
    fn push(&mut self, seconds: f64, meters: Option<f64>) {
        self.seconds.push(seconds);
        self.meters.extend(meters);
    }

    fn row(mut self, algorithm: &str, n: usize, dp_states: Option<usize>, seed: u64) -> BenchRow {
        BenchRow {
            algorithm: algorithm.to_string(),
            n,
            seconds: median(&mut self.seconds).unwrap_or(0.0),
            meters: median(&mut self.meters),
            dp_states,
            seed,
        }
    }
}

/// Median wall time of the closure build and of every solver, per terminal
/// count. Trials run one after another.
pub fn run_timing_suite(graph: &CityGraph, config: &TimingConfig) -> Result<BenchReport, BenchError> {
    if config.trials == 0 {
        return Err(BenchError::InvalidParameter("trials must be positive".into()));
    }
    if let Some(&n) = config.ns.iter().find(|&&n| n > config.exact_cap) {
        return Err(BenchError::TooLarge {
            n,
            cap: config.exact_cap,
        });
    }
    let vertices: Vec<(VertexId, GeoPoint)> = graph.vertices().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut report = BenchReport::new(config.seed);

    for &n in &config.ns {
        let mut build = Samples::default();
        let mut exact = Samples::default();
        let mut nn = Samples::default();
        let mut normal = Samples::default();
        let mut fast = Samples::default();
        let mut both = Samples::default();
        let mut dp_states = 0;

        for _ in 0..config.trials {
            let terminals = sample_terminals(&vertices, n, &mut rng)?;
            let (closure, elapsed) = build_closure(graph, &terminals, &config.closure)?;
            build.push(elapsed.as_secs_f64(), None);

            let t = Instant::now();
            let solution = held_karp(&closure, config.exact_cap)?;
            exact.push(t.elapsed().as_secs_f64(), solution.tour.total_m());
            dp_states = solution.dp_states;

            let t = Instant::now();
            let tour = solve_nearest_neighbor(&closure)?;
            nn.push(t.elapsed().as_secs_f64(), tour.total_m());

            let t = Instant::now();
            let tour = solve_natural(&terminals, NaturalMode::Normal(&closure))?;
            normal.push(t.elapsed().as_secs_f64(), tour.total_m());

            let t = Instant::now();
            let tour = solve_natural(&terminals, NaturalMode::Fast)?;
            fast.push(t.elapsed().as_secs_f64(), tour.total_m());

            let t = Instant::now();
            let tour = solve_best_of_both(&terminals, &closure)?;
            both.push(t.elapsed().as_secs_f64(), tour.total_m());
        }

        let seed = config.seed;
        report.rows.push(build.row(ALGO_BUILD_CLOSURE, n, None, seed));
        report.rows.push(exact.row(ALGO_EXACT, n, Some(dp_states), seed));
        report.rows.push(nn.row(ALGO_NEAREST_NEIGHBOR, n, None, seed));
        report.rows.push(normal.row(ALGO_NATURAL_NORMAL, n, None, seed));
        report.rows.push(fast.row(ALGO_NATURAL_FAST, n, None, seed));
        report.rows.push(both.row(ALGO_BEST_OF_BOTH, n, None, seed));
    }
    Ok(report)
}

/// Tour lengths of one quality trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityTrial {
    pub exact: f64,
    pub nearest_neighbor: f64,
    pub natural_normal: f64,
    pub best_of_both: f64,
}

impl QualityTrial {
    pub fn ratios(&self) -> [(&'static str, f64); 3] {
        [
            (ALGO_NEAREST_NEIGHBOR, self.nearest_neighbor / self.exact),
            (ALGO_NATURAL_NORMAL, self.natural_normal / self.exact),
            (ALGO_BEST_OF_BOTH, self.best_of_both / self.exact),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioSummary {
    pub algorithm: &'static str,
    pub min: f64,
    pub median: f64,
    pub max: f64,
}

#[derive(Debug, Clone)]
pub struct QualityReport {
    pub report: BenchReport,
    pub trials: Vec<QualityTrial>,
    pub summary: Vec<RatioSummary>,
}

/// Heuristic-to-exact length ratios over `trials` random terminal sets of
/// size `n`.
pub fn run_quality_suite(
    graph: &CityGraph,
    n: usize,
    trials: usize,
    seed: u64,
    exact_cap: usize,
    closure: &ClosureOptions,
) -> Result<QualityReport, BenchError> {
    if n > exact_cap {
        return Err(BenchError::TooLarge { n, cap: exact_cap });
    }
    let vertices: Vec<(VertexId, GeoPoint)> = graph.vertices().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = BenchReport::new(seed);
    let mut results = Vec::with_capacity(trials);

    let length = |tour: crate::solvers::Tour| tour.total_m().expect("measured tour");
    for _ in 0..trials {
        let terminals = sample_terminals(&vertices, n, &mut rng)?;
        let (matrix, _) = build_closure(graph, &terminals, closure)?;
        let mut timed = |name: &str, f: &dyn Fn() -> Result<crate::solvers::Tour, SolveError>| {
            let t = Instant::now();
            let tour = f()?;
            let seconds = t.elapsed().as_secs_f64();
            let meters = length(tour);
            report.rows.push(BenchRow {
                algorithm: name.to_string(),
                n,
                seconds,
                meters: Some(meters),
                dp_states: (name == ALGO_EXACT).then_some(n << n),
                seed,
            });
            Ok::<f64, SolveError>(meters)
        };
        let exact = timed(ALGO_EXACT, &|| held_karp(&matrix, exact_cap).map(|s| s.tour))?;
        let nearest_neighbor = timed(ALGO_NEAREST_NEIGHBOR, &|| solve_nearest_neighbor(&matrix))?;
        let natural_normal = timed(ALGO_NATURAL_NORMAL, &|| {
            solve_natural(&terminals, NaturalMode::Normal(&matrix))
        })?;
        let best_of_both = timed(ALGO_BEST_OF_BOTH, &|| solve_best_of_both(&terminals, &matrix))?;
        results.push(QualityTrial {
            exact,
            nearest_neighbor,
            natural_normal,
            best_of_both,
        });
    }

    let summary = [ALGO_NEAREST_NEIGHBOR, ALGO_NATURAL_NORMAL, ALGO_BEST_OF_BOTH]
        .into_iter()
        .enumerate()
        .filter_map(|(k, algorithm)| {
            let mut ratios: Vec<f64> = results.iter().map(|t| t.ratios()[k].1).collect();
            let median = median(&mut ratios)?;
            Some(RatioSummary {
                algorithm,
                min: ratios[0],
                median,
                max: ratios[ratios.len() - 1],
            })
        })
        .collect();

    Ok(QualityReport {
        report,
        trials: results,
        summary,
    })
}
