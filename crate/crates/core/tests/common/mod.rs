//! Independent reference implementations shared by the integration tests.
#![allow(dead_code, clippy::needless_range_loop)]

use rand::Rng;
use tourplan::bench::{grid_city, GridCitySpec};
use tourplan::{CityGraph, ClosureMatrix, GeoPoint, VertexId};

pub fn grid(rows: usize, cols: usize, seed: u64) -> CityGraph {
    grid_city(&GridCitySpec {
        rows,
        cols,
        spacing_m: 80.0,
        perturbation: 0.2,
        seed,
    })
    .expect("valid grid")
}

/// All-pairs distances by Floyd-Warshall over every vertex of `graph`.
pub struct AllPairs {
    pub ids: Vec<VertexId>,
    pub dist: Vec<Vec<f64>>,
}

impl AllPairs {
    pub fn new(graph: &CityGraph) -> Self {
        let ids: Vec<VertexId> = graph.vertices().map(|(id, _)| id).collect();
        let n = ids.len();
        let mut dist = vec![vec![f64::INFINITY; n]; n];
        for (i, &u) in ids.iter().enumerate() {
            dist[i][i] = 0.0;
            for (v, w) in graph.neighbors(u) {
                let j = ids.binary_search(&v).unwrap();
                if w < dist[i][j] {
                    dist[i][j] = w;
                }
            }
        }
        for k in 0..n {
            for i in 0..n {
                let dik = dist[i][k];
                if dik == f64::INFINITY {
                    continue;
                }
                for j in 0..n {
                    let via = dik + dist[k][j];
                    if via < dist[i][j] {
                        dist[i][j] = via;
                    }
                }
            }
        }
        Self { ids, dist }
    }

    pub fn get(&self, u: VertexId, v: VertexId) -> f64 {
        let i = self.ids.binary_search(&u).unwrap();
        let j = self.ids.binary_search(&v).unwrap();
        self.dist[i][j]
    }
}

/// Optimal closed-tour length from terminal 0 by trying all (n-1)!
/// orders, summed front to back.
pub fn brute_force_tour(m: &ClosureMatrix) -> f64 {
    let n = m.n();
    let mut rest: Vec<usize> = (1..n).collect();
    let mut best = f64::INFINITY;
    permute(&mut rest, 0, &mut |order| {
        let mut total = 0.0;
        let mut prev = 0;
        for &k in order {
            total += m.dist(prev, k);
            prev = k;
        }
        total += m.dist(prev, 0);
        if total < best {
            best = total;
        }
    });
    best
}

fn permute(items: &mut [usize], k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, visit);
        items.swap(k, i);
    }
}

/// Symmetric matrix with zero diagonal and weights in [1, 1000).
pub fn random_symmetric(n: usize, rng: &mut impl Rng) -> ClosureMatrix {
    let mut rows = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let w = rng.gen_range(1.0..1000.0);
            rows[i][j] = w;
            rows[j][i] = w;
        }
    }
    ClosureMatrix::from_rows(&rows).unwrap()
}

/// Closest vertex distance by scanning every vertex.
pub fn nearest_distance(graph: &CityGraph, q: &GeoPoint) -> f64 {
    graph
        .vertices()
        .map(|(_, p)| q.projected_distance(&p))
        .fold(f64::INFINITY, f64::min)
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol * a.abs().max(b.abs())
}
