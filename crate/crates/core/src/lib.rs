//! Closed delivery-tour planning over a city road graph.
//!
//! The pipeline is: load the road network ([`citygraph`]), snap user
//! waypoints to road vertices, build the complete shortest-path subgraph over
//! those terminals ([`pathfind`]), and order the terminals into a closed tour
//! with one of the strategies in [`solvers`]. Waypoints come in and tours go
//! out as Google-Maps direction links ([`urlcodec`]). The interactive session
//! lives in [`cli`]; [`bench`] reproduces the timing and tour-quality tables
//! on synthetic grid cities.

pub mod bench;
pub mod citygraph;
pub mod cli;
pub mod geo;
pub mod pathfind;
pub mod solvers;
pub mod urlcodec;

pub use citygraph::{load_city_graph, CityGraph, GraphBuilder, GraphError, VertexId};
pub use geo::{GeoPoint, GeoPointError};
pub use pathfind::{
    astar, build_closure, dijkstra_sssp, ClosureMatrix, ClosureOptions, Heuristic, PathError,
    ShortestPaths, TerminalSet,
};
pub use solvers::{
    expand_tour, solve_best_of_both, solve_exact, solve_natural, solve_nearest_neighbor,
    tour_length, NaturalMode, SolveError, Tour, DEFAULT_EXACT_CAP,
};
pub use urlcodec::{emit_gmaps_url, parse_gmaps_url, UrlError, WaypointRequest};
