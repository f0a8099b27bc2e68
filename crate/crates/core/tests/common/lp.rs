//! Exact discrete transport by the transportation simplex method.
//!
//! Northwest-corner start, potentials `u_i + v_j = c_ij` on the spanning-tree
//! basis, Bland's rule for entering and leaving cells.

use sdot::Point;

#[derive(Debug, Clone)]
pub struct DiscreteProblem {
    pub sources: Vec<(Point, f64)>,
    pub targets: Vec<(Point, f64)>,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub cost: f64,
    /// `(source, target, mass)` for every positive flow.
    pub plan: Vec<(usize, usize, f64)>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    /// Smallest reduced cost `c_ij − u_i − v_j` over all cells.
    pub min_reduced_cost: f64,
}

const REDUCED_EPS: f64 = 1e-12;

pub fn solve_discrete_lp(problem: &DiscreteProblem) -> Result<LpSolution, String> {
    let m = problem.sources.len();
    let n = problem.targets.len();
    if m == 0 || n == 0 {
        return Err("empty problem".into());
    }
    if problem.sources.iter().chain(&problem.targets).any(|s| s.1 < 0.0) {
        return Err("negative mass".into());
    }
    let total_s: f64 = problem.sources.iter().map(|s| s.1).sum();
    let total_t: f64 = problem.targets.iter().map(|t| t.1).sum();
    if (total_s - total_t).abs() > 1e-12 * total_s.max(total_t) {
        return Err(format!("infeasible: supply {total_s} != demand {total_t}"));
    }
    let cost = |i: usize, j: usize| problem.sources[i].0.dist2(problem.targets[j].0);

    // basis cells (i, j) with flows
    let mut basis: Vec<(usize, usize)> = Vec::with_capacity(m + n - 1);
    let mut flow: Vec<f64> = Vec::with_capacity(m + n - 1);
    {
        let mut s: Vec<f64> = problem.sources.iter().map(|s| s.1).collect();
        let mut d: Vec<f64> = problem.targets.iter().map(|t| t.1).collect();
        let (mut i, mut j) = (0, 0);
        loop {
            let q = s[i].min(d[j]);
            s[i] -= q;
            d[j] -= q;
            basis.push((i, j));
            flow.push(q);
            if i == m - 1 && j == n - 1 {
                break;
            }
            if i == m - 1 {
                j += 1;
            } else if j == n - 1 || s[i] <= d[j] {
                i += 1;
            } else {
                j += 1;
            }
        }
    }
    debug_assert_eq!(basis.len(), m + n - 1);

    let max_pivots = 50 * (m + n) * (m + n);
    let mut u = vec![0.0; m];
    let mut v = vec![0.0; n];
    for _ in 0..max_pivots {
        let adj = adjacency(&basis, m, n);
        potentials(&basis, &adj, m, n, &cost, &mut u, &mut v);

        // Bland: first improving cell in row-major order
        let mut entering = None;
        'scan: for (i, ui) in u.iter().enumerate() {
            for (j, vj) in v.iter().enumerate() {
                if cost(i, j) - ui - vj < -REDUCED_EPS && !basis.contains(&(i, j)) {
                    entering = Some((i, j));
                    break 'scan;
                }
            }
        }
        let Some((ei, ej)) = entering else {
            let min_reduced_cost = (0..m)
                .flat_map(|i| (0..n).map(move |j| (i, j)))
                .map(|(i, j)| cost(i, j) - u[i] - v[j])
                .fold(f64::INFINITY, f64::min);
            let plan: Vec<(usize, usize, f64)> = basis
                .iter()
                .zip(&flow)
                .filter(|(_, &f)| f > 0.0)
                .map(|(&(i, j), &f)| (i, j, f))
                .collect();
            let total = plan.iter().map(|&(i, j, f)| f * cost(i, j)).sum();
            return Ok(LpSolution {
                cost: total,
                plan,
                u,
                v,
                min_reduced_cost,
            });
        };

        // tree path from column node ej back to row node ei
        let path = tree_path(&adj, m + ej, ei);
        // path[0] touches the entering column and loses flow; signs alternate
        let mut theta = f64::INFINITY;
        for &b in path.iter().step_by(2) {
            theta = theta.min(flow[b]);
        }
        let leaving = path
            .iter()
            .step_by(2)
            .copied()
            .filter(|&b| flow[b] <= theta)
            .min_by_key(|&b| basis[b].0 * n + basis[b].1)
            .expect("cycle has a decreasing cell");
        for (k, &b) in path.iter().enumerate() {
            if k % 2 == 0 {
                flow[b] -= theta;
            } else {
                flow[b] += theta;
            }
        }
        basis[leaving] = (ei, ej);
        flow[leaving] = theta;
    }
    Err("pivot limit reached".into())
}

// node ids: rows 0..m, columns m..m+n; edges carry the basis index
fn adjacency(basis: &[(usize, usize)], m: usize, n: usize) -> Vec<Vec<(usize, usize)>> {
    let mut adj = vec![Vec::new(); m + n];
    for (b, &(i, j)) in basis.iter().enumerate() {
        adj[i].push((m + j, b));
        adj[m + j].push((i, b));
    }
    adj
}

fn potentials(
    basis: &[(usize, usize)],
    adj: &[Vec<(usize, usize)>],
    m: usize,
    n: usize,
    cost: &dyn Fn(usize, usize) -> f64,
    u: &mut [f64],
    v: &mut [f64],
) {
    let mut seen = vec![false; m + n];
    let mut stack = vec![0];
    seen[0] = true;
    u[0] = 0.0;
    while let Some(node) = stack.pop() {
        for &(next, b) in &adj[node] {
            if seen[next] {
                continue;
            }
            seen[next] = true;
            let (i, j) = basis[b];
            if next >= m {
                v[j] = cost(i, j) - u[i];
            } else {
                u[i] = cost(i, j) - v[j];
            }
            stack.push(next);
        }
    }
    debug_assert!(seen.iter().all(|&s| s), "basis is not a spanning tree");
}

fn tree_path(adj: &[Vec<(usize, usize)>], from: usize, to: usize) -> Vec<usize> {
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; adj.len()];
    let mut seen = vec![false; adj.len()];
    let mut stack = vec![from];
    seen[from] = true;
    while let Some(node) = stack.pop() {
        if node == to {
            break;
        }
        for &(next, b) in &adj[node] {
            if !seen[next] {
                seen[next] = true;
                parent[next] = Some((node, b));
                stack.push(next);
            }
        }
    }
    let mut path = Vec::new();
    let mut node = to;
    while node != from {
        let (prev, b) = parent[node].expect("basis tree is connected");
        path.push(b);
        node = prev;
    }
    path.reverse();
    path
}
