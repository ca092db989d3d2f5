//! Exact earth mover's distance on the dense bipartite transportation
//! problem, via network simplex with Bland's anti-cycling rule. Serves as
//! the unregularized oracle for the entropic solver.

use super::SphericalDistribution;
use crate::error::{Error, Result};
use crate::sphere::CostMatrix;

/// Largest support size (after dropping zero-weight atoms) the oracle accepts.
pub const EMD_SUPPORT_LIMIT: usize = 128;

const PIVOT_LIMIT: usize = 100_000;

#[derive(Debug, Clone)]
pub struct EmdResult {
    pub n: usize,
    pub cost: f64,
    /// Row-major n x n optimal plan.
    pub plan: Vec<f64>,
}

impl EmdResult {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.plan[i * self.n + j]
    }
}

/// Exact optimal transport cost between two distributions. Optimality is
/// certified by complementary slackness before returning.
pub fn exact_emd(
    u: &SphericalDistribution,
    v: &SphericalDistribution,
    c: &CostMatrix,
) -> Result<EmdResult> {
    let n = u.n();
    if v.n() != n || c.n() != n {
        return Err(Error::invalid(format!(
            "size mismatch: U has {n}, V has {}, C has {}",
            v.n(),
            c.n()
        )));
    }
    let iu: Vec<usize> = (0..n).filter(|&i| u.weights()[i] > 0.0).collect();
    let iv: Vec<usize> = (0..n).filter(|&j| v.weights()[j] > 0.0).collect();
    if iu.len().max(iv.len()) > EMD_SUPPORT_LIMIT {
        return Err(Error::UnsupportedSize(format!(
            "exact solver accepts supports up to {EMD_SUPPORT_LIMIT}, got {}x{}",
            iu.len(),
            iv.len()
        )));
    }
    let su: Vec<f64> = iu.iter().map(|&i| u.weights()[i]).collect();
    let sv: Vec<f64> = iv.iter().map(|&j| v.weights()[j]).collect();
    let sc = c.submatrix(&iu, &iv);

    let (cost, sub_plan) = network_simplex(&su, &sv, &sc)?;

    let mut plan = vec![0.0; n * n];
    for (a, &i) in iu.iter().enumerate() {
        for (b, &j) in iv.iter().enumerate() {
            plan[i * n + j] = sub_plan[a * iv.len() + b];
        }
    }
    Ok(EmdResult { n, cost, plan })
}

fn network_simplex(u: &[f64], v: &[f64], c: &[f64]) -> Result<(f64, Vec<f64>)> {
    let nu = u.len();
    let nv = v.len();
    let nodes = nu + nv;
    let mut flow = vec![0.0; nu * nv];
    let mut in_basis = vec![false; nu * nv];
    let mut basis_count = 0usize;

    // northwest-corner start: walk the marginals, exhausting whichever of
    // the current row/column remainder is smaller
    {
        let (mut i, mut j) = (0usize, 0usize);
        let mut a = u[0];
        let mut b = v[0];
        loop {
            let q = a.min(b);
            flow[i * nv + j] = q;
            in_basis[i * nv + j] = true;
            basis_count += 1;
            a -= q;
            b -= q;
            if i == nu - 1 && j == nv - 1 {
                break;
            }
            if i == nu - 1 {
                j += 1;
                b = v[j];
            } else if j == nv - 1 || a <= b {
                i += 1;
                a = u[i];
            } else {
                j += 1;
                b = v[j];
            }
        }
    }

    // a tie in the walk exhausts row and column at once and leaves the
    // basis short; pad with zero-flow arcs that keep the basis a spanning
    // tree, using union-find to reject cycle-creating candidates
    if basis_count < nodes - 1 {
        let mut parent: Vec<usize> = (0..nodes).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for i in 0..nu {
            for j in 0..nv {
                if in_basis[i * nv + j] {
                    let (ra, rb) = (find(&mut parent, i), find(&mut parent, nu + j));
                    if ra != rb {
                        parent[ra] = rb;
                    }
                }
            }
        }
        'pad: while basis_count < nodes - 1 {
            for i in 0..nu {
                for j in 0..nv {
                    if !in_basis[i * nv + j] {
                        let (ra, rb) = (find(&mut parent, i), find(&mut parent, nu + j));
                        if ra != rb {
                            parent[ra] = rb;
                            in_basis[i * nv + j] = true;
                            basis_count += 1;
                            continue 'pad;
                        }
                    }
                }
            }
            return Err(Error::Numerical(
                "transport basis could not be completed to a spanning tree".into(),
            ));
        }
    }

    let mut pot_u = vec![0.0; nu];
    let mut pot_v = vec![0.0; nv];
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nodes];
    let mut pivots = 0usize;
    loop {
        if pivots > PIVOT_LIMIT {
            return Err(Error::Numerical(format!(
                "transport solver exceeded {PIVOT_LIMIT} pivots"
            )));
        }
        pivots += 1;

        for list in &mut adj {
            list.clear();
        }
        for i in 0..nu {
            for j in 0..nv {
                if in_basis[i * nv + j] {
                    adj[i].push(nu + j);
                    adj[nu + j].push(i);
                }
            }
        }

        // potentials from the tree: pot_u[i] + pot_v[j] = C[i][j] on basis arcs
        let mut assigned = vec![false; nodes];
        assigned[0] = true;
        pot_u[0] = 0.0;
        let mut stack = vec![0usize];
        while let Some(x) = stack.pop() {
            for &y in &adj[x] {
                if assigned[y] {
                    continue;
                }
                assigned[y] = true;
                if x < nu {
                    pot_v[y - nu] = c[x * nv + (y - nu)] - pot_u[x];
                } else {
                    pot_u[y] = c[y * nv + (x - nu)] - pot_v[x - nu];
                }
                stack.push(y);
            }
        }
        if assigned.iter().any(|&a| !a) {
            return Err(Error::Numerical("transport basis tree is disconnected".into()));
        }

        // Bland's rule: first arc in (i, j) order with negative reduced cost
        let mut entering = None;
        'scan: for i in 0..nu {
            for j in 0..nv {
                if !in_basis[i * nv + j] && c[i * nv + j] - pot_u[i] - pot_v[j] < -1e-12 {
                    entering = Some((i, j));
                    break 'scan;
                }
            }
        }
        let (ei, ej) = match entering {
            Some(arc) => arc,
            None => break,
        };

        // the entering arc closes a unique cycle with the tree path ei ~> ej
        let mut prev: Vec<Option<usize>> = vec![None; nodes];
        let mut seen = vec![false; nodes];
        seen[ei] = true;
        let mut stack = vec![ei];
        while let Some(x) = stack.pop() {
            if x == nu + ej {
                break;
            }
            for &y in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    prev[y] = Some(x);
                    stack.push(y);
                }
            }
        }
        if !seen[nu + ej] {
            return Err(Error::Numerical("entering arc closes no cycle".into()));
        }
        let mut path = vec![nu + ej];
        while let Some(p) = prev[*path.last().unwrap()] {
            path.push(p);
        }
        path.reverse();

        // alternate signs walking the path backward from the column end;
        // backward arcs lose the pivot flow theta
        let mut cycle: Vec<(usize, f64)> = Vec::with_capacity(path.len());
        let mut sign = -1.0;
        for k in (1..path.len()).rev() {
            let (xa, xb) = (path[k - 1], path[k]);
            let key = if xa < nu {
                xa * nv + (xb - nu)
            } else {
                xb * nv + (xa - nu)
            };
            cycle.push((key, sign));
            sign = -sign;
        }
        let mut theta = f64::INFINITY;
        let mut leave = None;
        for &(key, s) in &cycle {
            if s < 0.0 && (leave.is_none() || flow[key] < theta - 1e-18) {
                theta = flow[key];
                leave = Some(key);
            }
        }
        let leave = leave
            .ok_or_else(|| Error::Numerical("pivot cycle has no backward arc".into()))?;

        let ekey = ei * nv + ej;
        flow[ekey] = 0.0;
        for &(key, s) in &cycle {
            flow[key] += s * theta;
        }
        flow[ekey] += theta;
        in_basis[leave] = false;
        flow[leave] = 0.0;
        in_basis[ekey] = true;
    }

    // complementary slackness certificate over every arc
    for i in 0..nu {
        for j in 0..nv {
            let rc = c[i * nv + j] - pot_u[i] - pot_v[j];
            if rc < -1e-9 {
                return Err(Error::Numerical(format!(
                    "optimality certificate failed: reduced cost {rc} at ({i}, {j})"
                )));
            }
        }
    }
    let mut row = vec![0.0; nu];
    let mut col = vec![0.0; nv];
    let mut cost = 0.0;
    for i in 0..nu {
        for j in 0..nv {
            let q = flow[i * nv + j];
            row[i] += q;
            col[j] += q;
            cost += q * c[i * nv + j];
        }
    }
    for i in 0..nu {
        if (row[i] - u[i]).abs() >= 1e-12 {
            return Err(Error::Numerical(format!(
                "row marginal off by {} at {i}",
                (row[i] - u[i]).abs()
            )));
        }
    }
    for j in 0..nv {
        if (col[j] - v[j]).abs() >= 1e-12 {
            return Err(Error::Numerical(format!(
                "column marginal off by {} at {j}",
                (col[j] - v[j]).abs()
            )));
        }
    }
    Ok((cost, flow))
}
