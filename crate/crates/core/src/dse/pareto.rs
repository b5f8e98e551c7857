//! Pareto dominance, non-dominated sorting, and crowding distance.
//!
//! All comparisons run over minimization coordinates `[area, delay, energy,
//! -throughput]`. A point dominates another when it is no worse in every
//! objective and strictly better in at least one; equal vectors do not
//! dominate each other.

use alloc::vec;
use alloc::vec::Vec;

use crate::costmodel::CostVector;

pub const OBJECTIVES: usize = 4;

/// Strict Pareto dominance on minimization coordinates.
pub fn dominates_min(a: &[f64; OBJECTIVES], b: &[f64; OBJECTIVES]) -> bool {
    let mut strictly_better = false;
    for i in 0..OBJECTIVES {
        if a[i] > b[i] {
            return false;
        }
        if a[i] < b[i] {
            strictly_better = true;
        }
    }
    strictly_better
}

/// Dominance between cost vectors.
pub fn dominates(a: &CostVector, b: &CostVector) -> bool {
    dominates_min(&a.as_min_objectives(), &b.as_min_objectives())
}

/// Partition indices into non-dominated fronts (front 0 first) by Deb's
/// domination-count algorithm: O(n^2) pairwise comparisons, then peeling
/// fronts off by decrementing the counts of dominated points.
pub fn fast_nondominated_sort(costs: &[CostVector]) -> Vec<Vec<usize>> {
    let n = costs.len();
    let objs: Vec<[f64; OBJECTIVES]> = costs.iter().map(|c| c.as_min_objectives()).collect();
    let mut dominated_by: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut domination_count = vec![0usize; n];

    for p in 0..n {
        for q in (p + 1)..n {
            if dominates_min(&objs[p], &objs[q]) {
                dominated_by[p].push(q);
                domination_count[q] += 1;
            } else if dominates_min(&objs[q], &objs[p]) {
                dominated_by[q].push(p);
                domination_count[p] += 1;
            }
        }
    }

    let mut fronts: Vec<Vec<usize>> = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|i| domination_count[*i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &p in &current {
            for &q in &dominated_by[p] {
                domination_count[q] -= 1;
                if domination_count[q] == 0 {
                    next.push(q);
                }
            }
        }
        fronts.push(core::mem::replace(&mut current, next));
    }
    fronts
}

/// Crowding distance within one front. Boundary points of every objective
/// get infinity; interior points accumulate the span between their
/// neighbors, normalized by the objective's range. Objectives with zero
/// range contribute nothing. Fronts of one or two points are all-infinite.
pub fn crowding_distance(front: &[CostVector]) -> Vec<f64> {
    let n = front.len();
    if n == 0 {
        return Vec::new();
    }
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    let objs: Vec<[f64; OBJECTIVES]> = front.iter().map(|c| c.as_min_objectives()).collect();
    let mut distance = vec![0.0f64; n];
    let mut order: Vec<usize> = (0..n).collect();
    #[allow(clippy::needless_range_loop)] // `m` picks the objective column
    for m in 0..OBJECTIVES {
        order.sort_by(|&a, &b| objs[a][m].total_cmp(&objs[b][m]));
        let lo = objs[order[0]][m];
        let hi = objs[order[n - 1]][m];
        let range = hi - lo;
        distance[order[0]] = f64::INFINITY;
        distance[order[n - 1]] = f64::INFINITY;
        if range <= 0.0 {
            continue;
        }
        for w in 1..n - 1 {
            let spread = objs[order[w + 1]][m] - objs[order[w - 1]][m];
            distance[order[w]] += spread / range;
        }
    }
    distance
}

/// Keep only the non-dominated members, preserving input order. Equal
/// vectors are mutually non-dominating, so duplicates survive.
pub fn nondominated_filter(costs: &[CostVector]) -> Vec<usize> {
    let objs: Vec<[f64; OBJECTIVES]> = costs.iter().map(|c| c.as_min_objectives()).collect();
    (0..costs.len())
        .filter(|&i| !objs.iter().enumerate().any(|(j, o)| j != i && dominates_min(o, &objs[i])))
        .collect()
}
