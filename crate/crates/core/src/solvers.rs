//! Closed-tour construction over a [`ClosureMatrix`].
//!
//! Every solver returns a [`Tour`] over terminal indices that starts and ends
//! at terminal 0. Ties are broken toward the lowest index everywhere so the
//! same input always produces the same tour.

use std::cmp::Ordering;

use thiserror::Error;

use crate::citygraph::VertexId;
use crate::geo::{GeoPoint, PlanarFrame};
use crate::pathfind::{ClosureMatrix, TerminalSet};

/// Largest terminal count the exact solver accepts unless raised.
pub const DEFAULT_EXACT_CAP: usize = 24;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("some terminals are not connected to each other")]
    Disconnected,
    #[error("{n} terminals exceed the exact-solver limit of {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("cannot allocate {states} dynamic-programming states")]
    OutOfMemory { states: usize },
    #[error("leg {0} -> {1} is unreachable")]
    UnreachableLeg(usize, usize),
    #[error("no stored road path for leg {0} -> {1}")]
    MissingPath(usize, usize),
    #[error("order is not a closed tour over {n} terminals")]
    InvalidTour { n: usize },
    #[error("need at least 2 terminals, got {0}")]
    TooFewTerminals(usize),
    #[error("matrix covers {matrix} terminals but {terminals} were given")]
    SizeMismatch { matrix: usize, terminals: usize },
}

/// A closed tour: `order[0] == order[n] == 0` and every other terminal
/// appears exactly once. `total_m` is absent when no distances were used.
#[derive(Debug, Clone, PartialEq)]
pub struct Tour {
    order: Vec<usize>,
    total_m: Option<f64>,
}

impl Tour {
    pub fn new(order: Vec<usize>, total_m: Option<f64>) -> Result<Self, SolveError> {
        let n = order.len().saturating_sub(1);
        if !is_closed_tour(&order, n) {
            return Err(SolveError::InvalidTour { n });
        }
        Ok(Self { order, total_m })
    }

    fn measured(m: &ClosureMatrix, order: Vec<usize>) -> Result<Self, SolveError> {
        let total = tour_length(m, &order)?;
        Ok(Self {
            order,
            total_m: Some(total),
        })
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn total_m(&self) -> Option<f64> {
        self.total_m
    }

    /// Number of terminals covered.
    pub fn len(&self) -> usize {
        self.order.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Terminal coordinates in visiting order, start repeated at the end.
    pub fn points(&self, terminals: &TerminalSet) -> Vec<GeoPoint> {
        let origins = terminals.origin_points();
        self.order.iter().map(|&i| origins[i]).collect()
    }
}

fn is_closed_tour(order: &[usize], n: usize) -> bool {
    if n < 1 || order.len() != n + 1 || order[0] != 0 || order[n] != 0 {
        return false;
    }
    let mut seen = vec![false; n];
    seen[0] = true;
    order[1..n].iter().all(|&i| i < n && !std::mem::replace(&mut seen[i], true))
}

/// Sum of matrix entries along `order`, accumulated front to back.
pub fn tour_length(m: &ClosureMatrix, order: &[usize]) -> Result<f64, SolveError> {
    if !is_closed_tour(order, m.n()) {
        return Err(SolveError::InvalidTour { n: m.n() });
    }
    let mut total = 0.0;
    for leg in order.windows(2) {
        let d = m.dist(leg[0], leg[1]);
        if !d.is_finite() {
            return Err(SolveError::UnreachableLeg(leg[0], leg[1]));
        }
        total += d;
    }
    Ok(total)
}

fn require_complete(m: &ClosureMatrix) -> Result<(), SolveError> {
    if m.n() < 2 {
        return Err(SolveError::TooFewTerminals(m.n()));
    }
    if !m.is_complete() {
        return Err(SolveError::Disconnected);
    }
    Ok(())
}

/// Exact solution plus the size of the table that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactSolution {
    pub tour: Tour,
    pub dp_states: usize,
}

/// Held-Karp over `(visited set, current terminal)` states.
///
/// `cost[S][j]` is the cheapest way to finish the tour from terminal `j`
/// having visited exactly the set `S` (which holds 0 and `j`), i.e. visit the
/// rest and return to 0. The table has `n * 2^n` entries; states whose set
/// lacks terminal 0 are never filled. Reconstruction walks forward from 0 and
/// takes the lowest index that attains the optimum at each step.
pub fn held_karp(m: &ClosureMatrix, cap: usize) -> Result<ExactSolution, SolveError> {
    require_complete(m)?;
    let n = m.n();
    if n > cap {
        return Err(SolveError::TooLarge { n, cap });
    }
    let dp_states = u32::try_from(n)
        .ok()
        .and_then(|s| 1usize.checked_shl(s))
        .filter(|&size| size != 0)
        .and_then(|size| size.checked_mul(n))
        .ok_or(SolveError::TooLarge { n, cap: usize::BITS as usize - 2 })?;

    let mut cost: Vec<f64> = Vec::new();
    cost.try_reserve_exact(dp_states)
        .map_err(|_| SolveError::OutOfMemory { states: dp_states })?;
    cost.resize(dp_states, f64::INFINITY);

    let full = (1usize << n) - 1;
    for j in 0..n {
        cost[full * n + j] = m.dist(j, 0);
    }
    // Sets containing terminal 0, largest first; `full` is already done.
    for half in (0..(full >> 1)).rev() {
        let set = (half << 1) | 1;
        for j in bits(set) {
            if j == 0 && set != 1 {
                continue;
            }
            let mut best = f64::INFINITY;
            for k in bits(full & !set) {
                let candidate = m.dist(j, k) + cost[(set | 1 << k) * n + k];
                if candidate < best {
                    best = candidate;
                }
            }
            cost[set * n + j] = best;
        }
    }

    let mut order = Vec::with_capacity(n + 1);
    order.push(0);
    let (mut set, mut at) = (1usize, 0usize);
    while set != full {
        let target = cost[set * n + at];
        let next = bits(full & !set)
            .find(|&k| m.dist(at, k) + cost[(set | 1 << k) * n + k] == target)
            .expect("optimal successor exists");
        order.push(next);
        set |= 1 << next;
        at = next;
    }
    order.push(0);
    drop(cost);

    // Front-to-back summation can differ from the table's back-to-front
    // summation by rounding; pick the shorter direction so exact never reports
    // more than a heuristic that found the same cycle reversed.
    let forward = Tour::measured(m, order)?;
    let mut reversed_order = forward.order.clone();
    reversed_order.reverse();
    let reversed = Tour::measured(m, reversed_order)?;
    let tour = match reversed.total_m.partial_cmp(&forward.total_m) {
        Some(Ordering::Less) => reversed,
        Some(Ordering::Equal) if reversed.order < forward.order => reversed,
        _ => forward,
    };
    Ok(ExactSolution { tour, dp_states })
}

/// Iterates over the set bits of `mask`, lowest first.
fn bits(mut mask: usize) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if mask == 0 {
            return None;
        }
        let i = mask.trailing_zeros() as usize;
        mask &= mask - 1;
        Some(i)
    })
}

/// Minimum-length tour; see [`held_karp`].
pub fn solve_exact(m: &ClosureMatrix, cap: usize) -> Result<Tour, SolveError> {
    held_karp(m, cap).map(|s| s.tour)
}

/// Greedy tour: from 0, always move to the closest unvisited terminal.
pub fn solve_nearest_neighbor(m: &ClosureMatrix) -> Result<Tour, SolveError> {
    require_complete(m)?;
    let n = m.n();
    let mut visited = vec![false; n];
    visited[0] = true;
    let mut order = Vec::with_capacity(n + 1);
    order.push(0);
    let mut at = 0;
    for _ in 1..n {
        let mut next = None;
        for k in (0..n).filter(|&k| !visited[k]) {
            if next.is_none_or(|best| m.dist(at, k) < m.dist(at, best)) {
                next = Some(k);
            }
        }
        let next = next.expect("unvisited terminal remains");
        visited[next] = true;
        order.push(next);
        at = next;
    }
    order.push(0);
    Tour::measured(m, order)
}

#[derive(Debug, Clone, Copy)]
pub enum NaturalMode<'a> {
    /// Radial order only; no distances needed or reported.
    Fast,
    /// Radial order, then the shorter of it and its reverse.
    Normal(&'a ClosureMatrix),
}

/// Projected offsets from the centroid are rounded to micrometers so the
/// angular comparator works on exact integers and is a strict total order.
const RADIAL_UNITS_PER_METER: f64 = 1e6;

/// Radial (counter-clockwise) order of `points` around their centroid,
/// rotated so index 0 comes first. Not closed.
///
/// Angles start at the centroid's positive x axis: points in the upper half
/// (`y > 0`, or `y == 0` and `x >= 0`) come first, then the lower half. Within
/// a half, `a` precedes `b` when `b` lies counter-clockwise of `a`. Points on
/// the same ray go nearest first, exact duplicates by index.
pub fn radial_order(points: &[GeoPoint]) -> Vec<usize> {
    let Some(frame) = PlanarFrame::centered_on(points) else {
        return Vec::new();
    };
    let projected: Vec<[f64; 2]> = points.iter().map(|p| frame.project(p)).collect();
    let n = projected.len() as f64;
    let cx = projected.iter().map(|p| p[0]).sum::<f64>() / n;
    let cy = projected.iter().map(|p| p[1]).sum::<f64>() / n;
    let offsets: Vec<[i64; 2]> = projected
        .iter()
        .map(|p| {
            [
                ((p[0] - cx) * RADIAL_UNITS_PER_METER).round() as i64,
                ((p[1] - cy) * RADIAL_UNITS_PER_METER).round() as i64,
            ]
        })
        .collect();

    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| radial_cmp(offsets[a], offsets[b]).then(a.cmp(&b)));
    let start = order.iter().position(|&i| i == 0).expect("index 0 present");
    order.rotate_left(start);
    order
}

fn radial_cmp(a: [i64; 2], b: [i64; 2]) -> Ordering {
    let half = |p: [i64; 2]| u8::from(!(p[1] > 0 || (p[1] == 0 && p[0] >= 0)));
    let cross = |p: [i64; 2], q: [i64; 2]| p[0] as i128 * q[1] as i128 - p[1] as i128 * q[0] as i128;
    let norm2 = |p: [i64; 2]| p[0] as i128 * p[0] as i128 + p[1] as i128 * p[1] as i128;
    half(a)
        .cmp(&half(b))
        .then_with(|| 0.cmp(&cross(a, b)))
        .then_with(|| norm2(a).cmp(&norm2(b)))
}

/// Radial-sort tour over the terminals' original coordinates.
pub fn solve_natural(terminals: &TerminalSet, mode: NaturalMode<'_>) -> Result<Tour, SolveError> {
    let mut order = radial_order(terminals.origin_points());
    order.push(0);
    match mode {
        NaturalMode::Fast => Tour::new(order, None),
        NaturalMode::Normal(m) => {
            if m.n() != terminals.len() {
                return Err(SolveError::SizeMismatch {
                    matrix: m.n(),
                    terminals: terminals.len(),
                });
            }
            require_complete(m)?;
            let mut reversed_order = order.clone();
            reversed_order.reverse();
            let forward = Tour::measured(m, order)?;
            let reversed = Tour::measured(m, reversed_order)?;
            Ok(if reversed.total_m < forward.total_m {
                reversed
            } else {
                forward
            })
        }
    }
}

/// Shorter of natural-normal and nearest-neighbor; ties keep the natural tour.
pub fn solve_best_of_both(terminals: &TerminalSet, m: &ClosureMatrix) -> Result<Tour, SolveError> {
    let natural = solve_natural(terminals, NaturalMode::Normal(m))?;
    let greedy = solve_nearest_neighbor(m)?;
    Ok(if greedy.total_m < natural.total_m {
        greedy
    } else {
        natural
    })
}

/// Street-level walk: the stored road path of every leg, joined at the
/// shared terminal vertex.
pub fn expand_tour(tour: &Tour, m: &ClosureMatrix) -> Result<Vec<VertexId>, SolveError> {
    if !is_closed_tour(&tour.order, m.n()) {
        return Err(SolveError::InvalidTour { n: m.n() });
    }
    let mut walk: Vec<VertexId> = Vec::new();
    for leg in tour.order.windows(2) {
        let path = m
            .path(leg[0], leg[1])
            .ok_or(SolveError::MissingPath(leg[0], leg[1]))?;
        let skip = usize::from(!walk.is_empty());
        walk.extend_from_slice(&path[skip..]);
    }
    Ok(walk)
}
