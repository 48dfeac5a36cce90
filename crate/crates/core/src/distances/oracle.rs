//! Independent EMD oracles used to cross-check the simplex solver.

use itertools::Itertools;

use crate::error::{AuditError, Result};
use crate::probability::Distribution;
use crate::scalar::{approx_eq, Scalar, Total};

use super::metric::{Metric, MetricSupport};

pub const BRUTE_FORCE_MAX: usize = 4;

/// EMD on the real line: `Σ |F_p - F_q| · gap` over consecutive support points.
pub fn emd_1d_oracle<T: Scalar>(p: &Distribution<T>, q: &Distribution<T>, ms: &MetricSupport) -> Result<T> {
    if !matches!(ms.metric(), Metric::NumericAbsolute) {
        return Err(AuditError::InvalidMetric("the 1-D oracle needs the numeric metric".into()));
    }
    let support = ms.support();
    let a = p.extend_to(support)?;
    let b = q.extend_to(support)?;
    let mut fp = T::zero();
    let mut fq = T::zero();
    let mut total = T::zero();
    for i in 0..support.len().saturating_sub(1) {
        fp = fp + a.probs()[i].clone();
        fq = fq + b.probs()[i].clone();
        let gap = support.get(i + 1).as_rational().expect("numeric") - support.get(i).as_rational().expect("numeric");
        total = total + (fp.clone() - fq.clone()).abs() * T::from_ratio(&gap);
    }
    Ok(total)
}

/// Exact EMD by enumerating every basic solution of the transport polytope.
///
/// Each basis is a spanning tree of the complete bipartite graph on
/// sources and targets (`2n - 1` cells); its flow is forced and is found by
/// peeling leaves. The minimum cost over nonnegative tree flows is the optimum.
pub fn emd_bruteforce_oracle<T: Scalar>(p: &Distribution<T>, q: &Distribution<T>, ms: &MetricSupport) -> Result<T> {
    let n = ms.support().len();
    if n > BRUTE_FORCE_MAX {
        return Err(AuditError::SupportTooLarge { got: n, max: BRUTE_FORCE_MAX });
    }
    let a = p.extend_to(ms.support())?;
    let b = q.extend_to(ms.support())?;
    let cost = ms.cost_matrix::<T>();
    let cells: Vec<(usize, usize)> = (0..n).cartesian_product(0..n).collect();
    let mut best: Option<T> = None;
    for tree in cells.iter().copied().combinations(2 * n - 1) {
        if !spans(n, &tree) {
            continue;
        }
        let Some(flow) = tree_flow(n, &tree, a.probs(), b.probs()) else {
            continue;
        };
        let c: T = tree.iter().zip(&flow).map(|(&(i, j), x)| cost[i][j].clone() * x.clone()).total();
        if best.as_ref().is_none_or(|b| c < *b) {
            best = Some(c);
        }
    }
    best.ok_or_else(|| AuditError::Certificate("no feasible basis found".into()))
}

fn spans(n: usize, tree: &[(usize, usize)]) -> bool {
    let mut parent: Vec<usize> = (0..2 * n).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while parent[r] != r {
            r = parent[r];
        }
        parent[x] = r;
        r
    }
    for &(i, j) in tree {
        let (ri, rj) = (find(&mut parent, i), find(&mut parent, n + j));
        if ri == rj {
            return false;
        }
        parent[ri] = rj;
    }
    true
}

/// Forced flow on a spanning tree, or `None` if some cell would be negative.
fn tree_flow<T: Scalar>(n: usize, tree: &[(usize, usize)], a: &[T], b: &[T]) -> Option<Vec<T>> {
    let mut rest: Vec<T> = a.iter().chain(b).cloned().collect();
    let mut flow: Vec<Option<T>> = vec![None; tree.len()];
    let mut degree = vec![0usize; 2 * n];
    for &(i, j) in tree {
        degree[i] += 1;
        degree[n + j] += 1;
    }
    for _ in 0..tree.len() {
        let (k, leaf) = tree.iter().enumerate().find_map(|(k, &(i, j))| {
            if flow[k].is_some() {
                None
            } else if degree[i] == 1 {
                Some((k, i))
            } else if degree[n + j] == 1 {
                Some((k, n + j))
            } else {
                None
            }
        })?;
        let (i, j) = tree[k];
        let other = if leaf == i { n + j } else { i };
        let x = rest[leaf].clone();
        if x < -T::slack(1e-12) {
            return None;
        }
        rest[leaf] = T::zero();
        rest[other] = rest[other].clone() - x.clone();
        degree[i] -= 1;
        degree[n + j] -= 1;
        flow[k] = Some(x);
    }
    if rest.iter().any(|r| !approx_eq(r, &T::zero(), 1e-12)) {
        return None;
    }
    Some(flow.into_iter().map(|x| x.expect("every edge peeled")).collect())
}
