//! Exact earthmover distance on a finite metric space.
//!
//! The discrete Kantorovich problem is a balanced transportation problem. It is
//! solved with the transportation simplex (northwest-corner start, MODI
//! potentials, Bland's rule for both entering and leaving cells so degenerate
//! pivots cannot cycle). The final potentials are returned and re-checked as
//! a dual certificate: primal feasibility, dual feasibility, and equal
//! objectives.

use std::collections::VecDeque;

use crate::error::{AuditError, Result};
use crate::probability::{Distribution, Support};
use crate::scalar::{approx_eq, Scalar, Total};

use super::metric::MetricSupport;

/// Certificate tolerance in float mode.
pub const EMD_TOL: f64 = 1e-9;

const MAX_PIVOTS: usize = 100_000;

/// Optimal coupling of two laws together with its dual certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan<T> {
    pub support: Support,
    /// `plan[u][v]`: mass moved from `u` (source) to `v` (target).
    pub plan: Vec<Vec<T>>,
    pub cost: T,
    pub source_potentials: Vec<T>,
    pub target_potentials: Vec<T>,
}

impl<T: Scalar> TransportPlan<T> {
    /// Re-verifies optimality against `(p, q)` under `cost`.
    pub fn certify(&self, p: &[T], q: &[T], cost: &[Vec<T>]) -> Result<()> {
        certify(p, q, cost, &self.plan, &self.source_potentials, &self.target_potentials)
    }
}

/// Minimum-cost transport plan from `p` to `q` under the metric of `ms`.
pub fn emd<T: Scalar>(p: &Distribution<T>, q: &Distribution<T>, ms: &MetricSupport) -> Result<TransportPlan<T>> {
    let support = ms.support().clone();
    let a = p.extend_to(&support)?;
    let b = q.extend_to(&support)?;
    let cost = ms.cost_matrix::<T>();
    let n = support.len();
    if a.probs() == b.probs() {
        let plan =
            (0..n).map(|i| (0..n).map(|j| if i == j { a.probs()[i].clone() } else { T::zero() }).collect()).collect();
        return Ok(TransportPlan {
            support,
            plan,
            cost: T::zero(),
            source_potentials: vec![T::zero(); n],
            target_potentials: vec![T::zero(); n],
        });
    }
    let (plan, u, v) = solve_transport(a.probs(), b.probs(), &cost)?;
    certify(a.probs(), b.probs(), &cost, &plan, &u, &v)?;
    let total = plan_cost(&plan, &cost);
    Ok(TransportPlan { support, plan, cost: total, source_potentials: u, target_potentials: v })
}

/// Convenience: only the optimal cost.
pub fn emd_cost<T: Scalar>(p: &Distribution<T>, q: &Distribution<T>, ms: &MetricSupport) -> Result<T> {
    emd(p, q, ms).map(|plan| plan.cost)
}

pub(crate) fn plan_cost<T: Scalar>(plan: &[Vec<T>], cost: &[Vec<T>]) -> T {
    plan.iter().zip(cost).flat_map(|(row, crow)| row.iter().zip(crow).map(|(x, c)| x.clone() * c.clone())).total()
}

fn float_scale<T: Scalar>(cost: &[Vec<T>]) -> f64 {
    cost.iter().flatten().map(|c| c.to_f64().abs()).fold(1.0, f64::max)
}

/// Checks a primal/dual pair for the transportation problem.
pub fn certify<T: Scalar>(p: &[T], q: &[T], cost: &[Vec<T>], plan: &[Vec<T>], u: &[T], v: &[T]) -> Result<()> {
    let tol = EMD_TOL * float_scale(cost);
    let fail = |msg: String| Err(AuditError::Certificate(msg));
    for (i, row) in plan.iter().enumerate() {
        if row.iter().any(|x| *x < T::zero()) {
            return fail(format!("negative flow in row {i}"));
        }
        let s: T = row.iter().cloned().total();
        if !approx_eq(&s, &p[i], EMD_TOL) {
            return fail(format!("row {i} ships {} instead of {}", s.render(), p[i].render()));
        }
    }
    for j in 0..q.len() {
        let s: T = plan.iter().map(|row| row[j].clone()).total();
        if !approx_eq(&s, &q[j], EMD_TOL) {
            return fail(format!("column {j} receives {} instead of {}", s.render(), q[j].render()));
        }
    }
    for i in 0..p.len() {
        for j in 0..q.len() {
            let reduced = cost[i][j].clone() - u[i].clone() - v[j].clone();
            if reduced < -T::slack(tol) {
                return fail(format!("dual infeasible at ({i}, {j})"));
            }
            if plan[i][j] > T::slack(tol) && reduced > T::slack(tol) {
                return fail(format!("complementary slackness fails at ({i}, {j})"));
            }
        }
    }
    let primal = plan_cost(plan, cost);
    let dual: T = u.iter().zip(p).map(|(a, b)| a.clone() * b.clone()).total()
        + v.iter().zip(q).map(|(a, b)| a.clone() * b.clone()).total();
    if !approx_eq(&primal, &dual, tol) {
        return fail(format!("primal {} != dual {}", primal.render(), dual.render()));
    }
    Ok(())
}

/// Solves `min Σ c_ij x_ij` s.t. row sums `supply`, column sums `demand`, `x >= 0`.
/// Returns the plan and optimal potentials `(u, v)` with `u_i + v_j <= c_ij`.
pub fn solve_transport<T: Scalar>(
    supply: &[T],
    demand: &[T],
    cost: &[Vec<T>],
) -> Result<(Vec<Vec<T>>, Vec<T>, Vec<T>)> {
    let rows: Vec<usize> = (0..supply.len()).filter(|&i| supply[i] > T::zero()).collect();
    let cols: Vec<usize> = (0..demand.len()).filter(|&j| demand[j] > T::zero()).collect();
    if rows.is_empty() || cols.is_empty() {
        return Err(AuditError::InvalidParameter("transport problem without mass".into()));
    }
    let a: Vec<T> = rows.iter().map(|&i| supply[i].clone()).collect();
    let b: Vec<T> = cols.iter().map(|&j| demand[j].clone()).collect();
    let c: Vec<Vec<T>> = rows.iter().map(|&i| cols.iter().map(|&j| cost[i][j].clone()).collect()).collect();

    let mut tableau = Tableau::northwest(&a, &b);
    let eps = T::slack(1e-12 * float_scale(&c));
    let mut pivots = 0;
    let (u, v) = loop {
        let (u, v) = tableau.potentials(&c);
        match tableau.entering(&c, &u, &v, &eps) {
            None => break (u, v),
            Some(cell) => {
                tableau.pivot(cell);
                pivots += 1;
                if pivots > MAX_PIVOTS {
                    return Err(AuditError::Certificate("pivot limit exceeded".into()));
                }
            }
        }
    };

    let (m, n) = (supply.len(), demand.len());
    let mut plan = vec![vec![T::zero(); n]; m];
    for (k, &(i, j)) in tableau.basis.iter().enumerate() {
        plan[rows[i]][cols[j]] = tableau.flow[k].clone();
    }
    // Potentials for the rows and columns dropped because they carry no mass:
    // the tightest values that keep every reduced cost nonnegative.
    let mut full_v: Vec<Option<T>> = vec![None; n];
    for (jj, &j) in cols.iter().enumerate() {
        full_v[j] = Some(v[jj].clone());
    }
    let mut full_u = vec![T::zero(); m];
    for (ii, &i) in rows.iter().enumerate() {
        full_u[i] = u[ii].clone();
    }
    for i in (0..m).filter(|i| !rows.contains(i)) {
        full_u[i] = cols
            .iter()
            .map(|&j| cost[i][j].clone() - full_v[j].clone().unwrap())
            .reduce(|x, y| if y < x { y } else { x })
            .unwrap();
    }
    let full_v: Vec<T> = (0..n)
        .map(|j| match &full_v[j] {
            Some(x) => x.clone(),
            None => {
                (0..m).map(|i| cost[i][j].clone() - full_u[i].clone()).reduce(|x, y| if y < x { y } else { x }).unwrap()
            }
        })
        .collect();
    Ok((plan, full_u, full_v))
}

/// Basic feasible solution as a spanning tree over `m` row and `n` column nodes.
struct Tableau<T> {
    m: usize,
    n: usize,
    basis: Vec<(usize, usize)>,
    flow: Vec<T>,
}

impl<T: Scalar> Tableau<T> {
    /// Staircase from `(0, 0)` to `(m-1, n-1)`: always `m + n - 1` cells forming a tree.
    fn northwest(a: &[T], b: &[T]) -> Self {
        let (m, n) = (a.len(), b.len());
        let mut ra = a.to_vec();
        let mut rb = b.to_vec();
        let (mut i, mut j) = (0, 0);
        let mut basis = Vec::with_capacity(m + n - 1);
        let mut flow = Vec::with_capacity(m + n - 1);
        loop {
            let x = if ra[i] <= rb[j] { ra[i].clone() } else { rb[j].clone() };
            ra[i] = ra[i].clone() - x.clone();
            rb[j] = rb[j].clone() - x.clone();
            basis.push((i, j));
            flow.push(x);
            if i == m - 1 && j == n - 1 {
                break;
            }
            if j == n - 1 || (i < m - 1 && ra[i].is_zero()) {
                i += 1;
            } else {
                j += 1;
            }
        }
        debug_assert_eq!(basis.len(), m + n - 1);
        Tableau { m, n, basis, flow }
    }

    /// Node ids: rows `0..m`, columns `m..m+n`.
    fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.m + self.n];
        for (k, &(i, j)) in self.basis.iter().enumerate() {
            adj[i].push((self.m + j, k));
            adj[self.m + j].push((i, k));
        }
        adj
    }

    fn potentials(&self, c: &[Vec<T>]) -> (Vec<T>, Vec<T>) {
        let adj = self.adjacency();
        let mut pot: Vec<Option<T>> = vec![None; self.m + self.n];
        pot[0] = Some(T::zero());
        let mut queue = VecDeque::from([0usize]);
        while let Some(node) = queue.pop_front() {
            let here = pot[node].clone().unwrap();
            for &(next, k) in &adj[node] {
                if pot[next].is_none() {
                    let (i, j) = self.basis[k];
                    pot[next] = Some(c[i][j].clone() - here.clone());
                    queue.push_back(next);
                }
            }
        }
        let pot: Vec<T> = pot.into_iter().map(|x| x.expect("basis spans every node")).collect();
        (pot[..self.m].to_vec(), pot[self.m..].to_vec())
    }

    /// Bland's rule: the first cell in row-major order with negative reduced cost.
    fn entering(&self, c: &[Vec<T>], u: &[T], v: &[T], eps: &T) -> Option<(usize, usize)> {
        let mut basic = vec![false; self.m * self.n];
        for &(i, j) in &self.basis {
            basic[i * self.n + j] = true;
        }
        for i in 0..self.m {
            for j in 0..self.n {
                if basic[i * self.n + j] {
                    continue;
                }
                let reduced = c[i][j].clone() - u[i].clone() - v[j].clone();
                if reduced < -eps.clone() {
                    return Some((i, j));
                }
            }
        }
        None
    }

    fn pivot(&mut self, (ei, ej): (usize, usize)) {
        // tree path from column ej back to row ei
        let adj = self.adjacency();
        let target = self.m + ej;
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; self.m + self.n];
        let mut seen = vec![false; self.m + self.n];
        seen[ei] = true;
        let mut queue = VecDeque::from([ei]);
        while let Some(node) = queue.pop_front() {
            if node == target {
                break;
            }
            for &(next, k) in &adj[node] {
                if !seen[next] {
                    seen[next] = true;
                    parent[next] = Some((node, k));
                    queue.push_back(next);
                }
            }
        }
        let mut path = Vec::new();
        let mut node = target;
        while node != ei {
            let (prev, k) = parent[node].expect("tree is connected");
            path.push(k);
            node = prev;
        }
        // path[0] touches column ej and loses flow, then signs alternate
        let losing: Vec<usize> = path.iter().step_by(2).copied().collect();
        let theta = losing
            .iter()
            .map(|&k| self.flow[k].clone())
            .reduce(|x, y| if y < x { y } else { x })
            .expect("cycle has a losing edge");
        let leaving = losing.iter().copied().filter(|&k| self.flow[k] == theta).min_by_key(|&k| self.basis[k]).unwrap();
        for (pos, &k) in path.iter().enumerate() {
            self.flow[k] =
                if pos % 2 == 0 { self.flow[k].clone() - theta.clone() } else { self.flow[k].clone() + theta.clone() };
        }
        self.basis[leaving] = (ei, ej);
        self.flow[leaving] = theta;
    }
}
