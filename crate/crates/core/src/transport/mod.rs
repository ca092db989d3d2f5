//! Entropic optimal transport between discrete distributions on the sphere,
//! solved in the log domain, plus the exact unregularized oracle.
//!
//! The regularized problem min <C,T> - eps*H(T) over plans T with marginals
//! (U, V) is solved by alternating dual updates with two accelerations:
//! a cost-halving epsilon schedule, and Newton steps on the log-marginal
//! residuals once alternation slows down. Both leave the fixed point
//! unchanged; they only cut the iteration count.

mod emd;

pub use emd::{exact_emd, EmdResult};

use crate::error::{Error, Result};
use crate::sphere::CostMatrix;

/// Nonnegative weights over anchors summing to 1.
#[derive(Debug, Clone)]
pub struct SphericalDistribution {
    weights: Vec<f64>,
}

impl SphericalDistribution {
    /// Wraps weights that already sum to 1 within 1e-9.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        let sum = check_weights(&weights)?;
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!(
                "weights sum to {sum}, expected 1 within 1e-9"
            )));
        }
        Ok(SphericalDistribution { weights })
    }

    /// Rescales arbitrary nonnegative weights to sum to 1.
    pub fn normalized(weights: Vec<f64>) -> Result<Self> {
        let sum = check_weights(&weights)?;
        if sum <= 0.0 {
            return Err(Error::invalid("cannot normalize all-zero weights"));
        }
        let weights = weights.into_iter().map(|w| w / sum).collect();
        Ok(SphericalDistribution { weights })
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

fn check_weights(weights: &[f64]) -> Result<f64> {
    if weights.is_empty() {
        return Err(Error::invalid("distribution needs at least one weight"));
    }
    let mut sum = 0.0;
    for &w in weights {
        if !w.is_finite() || w < 0.0 {
            return Err(Error::invalid(format!(
                "weights must be finite and nonnegative, got {w}"
            )));
        }
        sum += w;
    }
    Ok(sum)
}

#[derive(Debug, Clone, Copy)]
pub struct SinkhornConfig {
    pub epsilon: f64,
    pub max_iterations: usize,
    /// Max L1 deviation of either marginal.
    pub tolerance: f64,
}

impl Default for SinkhornConfig {
    fn default() -> Self {
        SinkhornConfig {
            epsilon: 1e-4,
            max_iterations: 10_000,
            tolerance: 1e-9,
        }
    }
}

impl SinkhornConfig {
    fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(Error::invalid(format!(
                "epsilon must be positive and finite, got {}",
                self.epsilon
            )));
        }
        if !(self.tolerance > 0.0) || !self.tolerance.is_finite() {
            return Err(Error::invalid(format!(
                "tolerance must be positive and finite, got {}",
                self.tolerance
            )));
        }
        Ok(())
    }
}

/// Entropic transport plan with its dual potentials and solve diagnostics.
#[derive(Debug, Clone)]
pub struct TransportPlan {
    pub n: usize,
    /// Row-major n x n, rows indexed by U atoms.
    pub plan: Vec<f64>,
    pub dual_u: Vec<f64>,
    pub dual_v: Vec<f64>,
    pub iterations: usize,
    pub marginal_error: f64,
}

impl TransportPlan {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.plan[i * self.n + j]
    }

    pub fn transport_cost(&self, c: &CostMatrix) -> f64 {
        self.plan
            .iter()
            .zip(c.values())
            .map(|(&t, &cost)| t * cost)
            .sum()
    }

    /// Plan entropy -sum T log T, with 0 log 0 := 0.
    pub fn entropy(&self) -> f64 {
        -self
            .plan
            .iter()
            .filter(|&&t| t > 0.0)
            .map(|&t| t * t.ln())
            .sum::<f64>()
    }
}

fn check_pair(u: &SphericalDistribution, v: &SphericalDistribution, c: &CostMatrix) -> Result<usize> {
    let n = u.n();
    if v.n() != n || c.n() != n {
        return Err(Error::invalid(format!(
            "size mismatch: U has {n}, V has {}, C has {}",
            v.n(),
            c.n()
        )));
    }
    Ok(n)
}

/// Solves the entropic transport problem. Non-convergence within
/// `max_iterations` is not an error; the achieved marginal error is reported.
pub fn sinkhorn(
    u: &SphericalDistribution,
    v: &SphericalDistribution,
    c: &CostMatrix,
    cfg: &SinkhornConfig,
) -> Result<TransportPlan> {
    cfg.validate()?;
    let n = check_pair(u, v, c)?;

    // zero-weight atoms are dropped so every log stays finite, then
    // reinstated as zero rows/columns of the plan
    let iu: Vec<usize> = (0..n).filter(|&i| u.weights()[i] > 0.0).collect();
    let iv: Vec<usize> = (0..n).filter(|&j| v.weights()[j] > 0.0).collect();
    let su: Vec<f64> = iu.iter().map(|&i| u.weights()[i]).collect();
    let sv: Vec<f64> = iv.iter().map(|&j| v.weights()[j]).collect();
    let sc = c.submatrix(&iu, &iv);

    let solved = solve_reduced(&su, &sv, &sc, cfg);

    let mut plan = vec![0.0; n * n];
    let mut dual_u = vec![0.0; n];
    let mut dual_v = vec![0.0; n];
    for (a, &i) in iu.iter().enumerate() {
        dual_u[i] = solved.f[a];
        for (b, &j) in iv.iter().enumerate() {
            plan[i * n + j] = solved.t[a * iv.len() + b];
        }
    }
    for (b, &j) in iv.iter().enumerate() {
        dual_v[j] = solved.g[b];
    }
    Ok(TransportPlan {
        n,
        plan,
        dual_u,
        dual_v,
        iterations: solved.iterations,
        marginal_error: solved.marginal_error,
    })
}

struct ReducedSolve {
    f: Vec<f64>,
    g: Vec<f64>,
    t: Vec<f64>,
    iterations: usize,
    marginal_error: f64,
}

fn solve_reduced(u: &[f64], v: &[f64], c: &[f64], cfg: &SinkhornConfig) -> ReducedSolve {
    let nu = u.len();
    let nv = v.len();
    let mut f = vec![0.0; nu];
    let mut g = vec![0.0; nv];

    // probe: one sweep at the target epsilon. Near-diagonal problems
    // (matching supports, deltas) finish here with clean dual gauge; the
    // schedule below would reach the same plan but with stale per-atom
    // offsets frozen into the potentials once couplings underflow.
    let mut it = 0usize;
    let mut err;
    let mut t;
    let mut fallback = None;
    if cfg.max_iterations > 0 {
        it = 1;
        sweep(&mut f, &mut g, c, cfg.epsilon, u, v);
        let probe = marginals(&f, &g, c, cfg.epsilon, u, v);
        err = probe.0;
        t = probe.1;
        if err <= cfg.tolerance {
            return ReducedSolve {
                f,
                g,
                t,
                iterations: it,
                marginal_error: err,
            };
        }
        fallback = Some((err, f.clone(), g.clone(), t.clone()));
    }

    let cmax = c.iter().cloned().fold(0.0_f64, f64::max);
    let mut levels = Vec::new();
    if cmax <= cfg.epsilon {
        levels.push(cfg.epsilon);
    } else {
        let mut e = cmax;
        while e > cfg.epsilon * 1.000_000_1 {
            levels.push(e);
            e *= 0.5;
        }
        levels.push(cfg.epsilon);
    }

    let last_level = levels.len() - 1;
    for (li, &e) in levels.iter().enumerate() {
        let lvl_tol = if li == last_level { cfg.tolerance } else { 1e-3 };
        while it < cfg.max_iterations {
            it += 1;
            sweep(&mut f, &mut g, c, e, u, v);
            let m = marginals(&f, &g, c, e, u, v);
            err = m.0;
            t = m.1;
            if err <= lvl_tol {
                break;
            }
            let mut ok = true;
            while ok && err > lvl_tol && it < cfg.max_iterations {
                it += 1;
                ok = newton_step(&mut f, &mut g, c, e, u, v, &mut err, &mut t);
            }
            if err <= lvl_tol {
                break;
            }
        }
    }
    // the schedule may have stopped mid-level; measure what the duals are
    // worth at the target epsilon, and hand back the probe state instead if
    // the schedule never beat it (the float fixed point can be degenerate
    // there, with stale potentials blowing up the rescaled plan)
    let m = marginals(&f, &g, c, cfg.epsilon, u, v);
    err = m.0;
    t = m.1;
    if let Some((perr, pf, pg, pt)) = fallback {
        if perr < err {
            err = perr;
            f = pf;
            g = pg;
            t = pt;
        }
    }
    ReducedSolve {
        f,
        g,
        t,
        iterations: it,
        marginal_error: err,
    }
}

/// One alternating dual update: f from the row constraints, then g from the
/// column constraints, both via log-sum-exp.
fn sweep(f: &mut [f64], g: &mut [f64], c: &[f64], e: f64, u: &[f64], v: &[f64]) {
    let nu = u.len();
    let nv = v.len();
    let mut scratch = vec![0.0; nu.max(nv)];
    for i in 0..nu {
        let mut mx = f64::NEG_INFINITY;
        for j in 0..nv {
            let a = (g[j] - c[i * nv + j]) / e;
            scratch[j] = a;
            if a > mx {
                mx = a;
            }
        }
        let s: f64 = scratch[..nv].iter().map(|&a| (a - mx).exp()).sum();
        f[i] = e * u[i].ln() - e * (mx + s.ln());
    }
    for j in 0..nv {
        let mut mx = f64::NEG_INFINITY;
        for i in 0..nu {
            let a = (f[i] - c[i * nv + j]) / e;
            scratch[i] = a;
            if a > mx {
                mx = a;
            }
        }
        let s: f64 = scratch[..nu].iter().map(|&a| (a - mx).exp()).sum();
        g[j] = e * v[j].ln() - e * (mx + s.ln());
    }
}

fn marginals(f: &[f64], g: &[f64], c: &[f64], e: f64, u: &[f64], v: &[f64]) -> (f64, Vec<f64>) {
    let nu = u.len();
    let nv = v.len();
    let mut t = vec![0.0; nu * nv];
    let mut col = vec![0.0; nv];
    let mut row_dev = 0.0;
    for i in 0..nu {
        let mut rs = 0.0;
        for j in 0..nv {
            let val = ((f[i] + g[j] - c[i * nv + j]) / e).exp();
            t[i * nv + j] = val;
            rs += val;
            col[j] += val;
        }
        row_dev += (rs - u[i]).abs();
    }
    let col_dev: f64 = col.iter().zip(v).map(|(&cj, &vj)| (cj - vj).abs()).sum();
    (row_dev.max(col_dev), t)
}

/// Newton step on the log-marginal residuals in epsilon-scaled dual
/// variables; the Jacobian there is identity plus row/column-stochastic
/// blocks, so its conditioning does not degrade as epsilon shrinks. One
/// column variable is fixed to absorb the additive dual gauge freedom.
fn newton_step(
    f: &mut [f64],
    g: &mut [f64],
    c: &[f64],
    e: f64,
    u: &[f64],
    v: &[f64],
    err: &mut f64,
    t: &mut Vec<f64>,
) -> bool {
    let nu = u.len();
    let nv = v.len();
    let mut row = vec![0.0; nu];
    let mut col = vec![0.0; nv];
    for i in 0..nu {
        for j in 0..nv {
            row[i] += t[i * nv + j];
            col[j] += t[i * nv + j];
        }
    }
    if row.iter().any(|&x| x <= 0.0) || col.iter().any(|&x| x <= 0.0) {
        return false;
    }
    let m = nu + nv - 1;
    let mut jac = vec![0.0; m * m];
    for d in 0..m {
        jac[d * m + d] = 1.0;
    }
    for i in 0..nu {
        for j in 0..nv - 1 {
            jac[i * m + nu + j] = t[i * nv + j] / row[i];
            jac[(nu + j) * m + i] = t[i * nv + j] / col[j];
        }
    }
    let mut step = vec![0.0; m];
    for i in 0..nu {
        step[i] = -(row[i].ln() - u[i].ln());
    }
    for j in 0..nv - 1 {
        step[nu + j] = -(col[j].ln() - v[j].ln());
    }
    if !solve_dense(&mut jac, &mut step, m) || step.iter().any(|x| !x.is_finite()) {
        return false;
    }
    let mut alpha = 1.0_f64;
    for _ in 0..40 {
        let mut f2 = f.to_vec();
        let mut g2 = g.to_vec();
        for i in 0..nu {
            f2[i] += e * alpha * step[i];
        }
        for j in 0..nv - 1 {
            g2[j] += e * alpha * step[nu + j];
        }
        let (err2, t2) = marginals(&f2, &g2, c, e, u, v);
        if err2.is_finite() && err2 < *err * (1.0 - 0.1 * alpha) {
            f.copy_from_slice(&f2);
            g.copy_from_slice(&g2);
            *err = err2;
            *t = t2;
            return true;
        }
        alpha *= 0.5;
    }
    false
}

/// In-place partial-pivot LU solve of a (m x m, row-major) * x = b.
fn solve_dense(a: &mut [f64], b: &mut [f64], m: usize) -> bool {
    for col in 0..m {
        let mut piv = col;
        let mut best = a[col * m + col].abs();
        for r in col + 1..m {
            let val = a[r * m + col].abs();
            if val > best {
                best = val;
                piv = r;
            }
        }
        if !(best > 0.0) || !best.is_finite() {
            return false;
        }
        if piv != col {
            for k in 0..m {
                a.swap(col * m + k, piv * m + k);
            }
            b.swap(col, piv);
        }
        let d = a[col * m + col];
        for r in col + 1..m {
            let factor = a[r * m + col] / d;
            if factor != 0.0 {
                for k in col + 1..m {
                    a[r * m + k] -= factor * a[col * m + k];
                }
                b[r] -= factor * b[col];
            }
        }
    }
    for col in (0..m).rev() {
        let mut s = b[col];
        for k in col + 1..m {
            s -= a[col * m + k] * b[k];
        }
        b[col] = s / a[col * m + col];
    }
    true
}

/// Transport cost and regularized objective of the solved plan.
#[derive(Debug, Clone, Copy)]
pub struct SmlResult {
    pub transport_cost: f64,
    pub regularized_objective: f64,
    pub iterations: usize,
    pub marginal_error: f64,
}

/// Spherical mover's loss: entropic transport cost between two spherical
/// distributions, reported both raw and with the entropy term.
pub fn sml(
    u: &SphericalDistribution,
    v: &SphericalDistribution,
    c: &CostMatrix,
    cfg: &SinkhornConfig,
) -> Result<SmlResult> {
    let plan = sinkhorn(u, v, c, cfg)?;
    let transport_cost = plan.transport_cost(c);
    let regularized_objective = transport_cost - cfg.epsilon * plan.entropy();
    Ok(SmlResult {
        transport_cost,
        regularized_objective,
        iterations: plan.iterations,
        marginal_error: plan.marginal_error,
    })
}

/// Gradient of the regularized objective with respect to U.
#[derive(Debug, Clone)]
pub struct SmlGradient {
    /// Centered row dual potential; components sum to 0.
    pub values: Vec<f64>,
    /// False when the solve stopped above tolerance.
    pub reliable: bool,
}

pub fn sml_gradient(
    u: &SphericalDistribution,
    v: &SphericalDistribution,
    c: &CostMatrix,
    cfg: &SinkhornConfig,
) -> Result<SmlGradient> {
    let plan = sinkhorn(u, v, c, cfg)?;
    let n = plan.n as f64;
    let mean: f64 = plan.dual_u.iter().sum::<f64>() / n;
    let values = plan.dual_u.iter().map(|&x| x - mean).collect();
    Ok(SmlGradient {
        values,
        reliable: plan.marginal_error <= cfg.tolerance,
    })
}

/// Mean per-channel transport cost between two parameter sets.
pub fn sml_rgb(
    pred: &crate::decompose::IlluminationParams,
    truth: &crate::decompose::IlluminationParams,
    c: &CostMatrix,
    cfg: &SinkhornConfig,
) -> Result<f64> {
    if pred.n != truth.n {
        return Err(Error::invalid(format!(
            "parameter sets disagree on n: {} vs {}",
            pred.n, truth.n
        )));
    }
    let mut total = 0.0;
    for ch in 0..3 {
        let u = SphericalDistribution::normalized(pred.distribution[ch].clone())?;
        let v = SphericalDistribution::normalized(truth.distribution[ch].clone())?;
        total += sml(&u, &v, c, cfg)?.transport_cost;
    }
    Ok(total / 3.0)
}
