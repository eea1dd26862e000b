//! Optimal transport between state ensembles.
//!
//! The cost between two pure states is the infidelity `1 − |⟨φ|ψ⟩|`. Couplings
//! come from an entropically regularized problem solved with log-domain
//! Sinkhorn iterations; the reported value is the unregularized objective
//! `⟨P, C⟩` at the Sinkhorn plan. A Hungarian solver gives the exact optimum
//! for square uniform-marginal problems and serves as a reference.

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensemble::PureEnsemble;
use crate::error::{validation, Error, Result};
use crate::statevec::{inner, swap_test_estimate};

#[derive(Clone, Debug, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl CostMatrix {
    /// Row-major entries; each must be finite and lie in `[−1e-10, 1 + 1e-10]`.
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || entries.len() != rows * cols {
            return Err(validation(format!(
                "cost matrix {rows}×{cols} with {} entries",
                entries.len()
            )));
        }
        if let Some((i, v)) = entries
            .iter()
            .enumerate()
            .find(|(_, v)| !(-1e-10..=1.0 + 1e-10).contains(*v))
        {
            return Err(validation(format!(
                "cost entry ({}, {}) = {v} is outside [0, 1]",
                i / cols,
                i % cols
            )));
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.cols + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    fn transposed(&self) -> Vec<f64> {
        let mut t = vec![0.0; self.entries.len()];
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[j * self.rows + i] = self.entries[i * self.cols + j];
            }
        }
        t
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Marginals {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl Marginals {
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        for (name, w) in [("a", &a), ("b", &b)] {
            if w.is_empty() || w.iter().any(|x| !(*x >= 0.0)) {
                return Err(validation(format!("marginal {name} must be nonnegative and nonempty")));
            }
            let total: f64 = w.iter().sum();
            if (total - 1.0).abs() > 1e-10 {
                return Err(validation(format!("marginal {name} sums to {total}")));
            }
        }
        Ok(Self { a, b })
    }

    pub fn uniform(m: usize, n: usize) -> Self {
        Self {
            a: vec![1.0 / m as f64; m],
            b: vec![1.0 / n as f64; n],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SinkhornConfig {
    /// Entropic regularization strength, in cost units.
    pub epsilon: f64,
    pub max_iterations: usize,
    /// Stop once the L1 errors of both plan marginals fall below this.
    pub marginal_tolerance: f64,
}

impl Default for SinkhornConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.01,
            max_iterations: 500,
            marginal_tolerance: 1e-6,
        }
    }
}

impl SinkhornConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Config(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if !(self.marginal_tolerance > 0.0) {
            return Err(Error::Config("marginal_tolerance must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransportPlan {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    /// Dual potentials with `P_ij = exp((f_i + g_j − C_ij)/ε)`.
    pub f: Vec<f64>,
    pub g: Vec<f64>,
}

impl TransportPlan {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.cols + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.entries.chunks(self.cols).map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.cols];
        for row in self.entries.chunks(self.cols) {
            for (acc, v) in s.iter_mut().zip(row) {
                *acc += v;
            }
        }
        s
    }
}

/// `max + ln Σ exp(v − max)` over `(g_j − c_j)·inv_eps`.
#[inline]
fn log_sum_exp(potential: &[f64], costs: &[f64], inv_eps: f64) -> f64 {
    let mut max = f64::NEG_INFINITY;
    for (p, c) in potential.iter().zip(costs) {
        let v = (p - c) * inv_eps;
        if v > max {
            max = v;
        }
    }
    let mut sum = 0.0;
    for (p, c) in potential.iter().zip(costs) {
        sum += ((p - c) * inv_eps - max).exp();
    }
    max + sum.ln()
}

pub fn sinkhorn(
    cost: &CostMatrix,
    marginals: &Marginals,
    config: &SinkhornConfig,
) -> Result<TransportPlan> {
    sinkhorn_warm(cost, marginals, config, None)
}

/// Log-domain Sinkhorn, optionally starting from a previous column potential.
pub fn sinkhorn_warm(
    cost: &CostMatrix,
    marginals: &Marginals,
    config: &SinkhornConfig,
    initial_g: Option<&[f64]>,
) -> Result<TransportPlan> {
    config.validate()?;
    let (m, n) = (cost.rows, cost.cols);
    if marginals.a.len() != m || marginals.b.len() != n {
        return Err(validation(format!(
            "marginals ({}, {}) do not match cost {m}×{n}",
            marginals.a.len(),
            marginals.b.len()
        )));
    }
    if cost.entries.iter().any(|c| !c.is_finite()) {
        return Err(validation("cost matrix has non-finite entries"));
    }
    let eps = config.epsilon;
    let inv_eps = 1.0 / eps;
    let log_a: Vec<f64> = marginals.a.iter().map(|x| x.ln()).collect();
    let log_b: Vec<f64> = marginals.b.iter().map(|x| x.ln()).collect();
    let cost_t = cost.transposed();

    let mut f = vec![0.0; m];
    let mut g = match initial_g {
        Some(g0) if g0.len() == n && g0.iter().all(|v| v.is_finite()) => g0.to_vec(),
        _ => vec![0.0; n],
    };
    let mut f_next = vec![0.0; m];
    let mut converged = false;
    let mut iterations = 0;
    // Scaling iterations run on a kernel relative to the current potentials;
    // u and v are folded back into f and g before they leave this range.
    const LOG_SCALE_BOUND: f64 = 100.0;
    let mut kernel = vec![0.0; m * n];
    let mut u = vec![1.0; m];
    let mut v = vec![1.0; n];
    let mut kv = vec![0.0; m];
    let mut ktu = vec![0.0; n];

    'outer: while iterations < config.max_iterations {
        // Exact log-domain step.
        for i in 0..m {
            let row = &cost.entries[i * n..(i + 1) * n];
            f_next[i] = eps * (log_a[i] - log_sum_exp(&g, row, inv_eps));
        }
        if iterations > 0 {
            // Columns are exact after the previous g update; the row sums of
            // the current plan are a_i·exp((f_i − f_next_i)/ε).
            let row_err: f64 = marginals
                .a
                .iter()
                .zip(f.iter().zip(&f_next))
                .map(|(a, (fo, fnew))| (a - a * ((fo - fnew) * inv_eps).exp()).abs())
                .sum();
            if row_err < config.marginal_tolerance {
                converged = true;
                break;
            }
        }
        std::mem::swap(&mut f, &mut f_next);
        for j in 0..n {
            let col = &cost_t[j * m..(j + 1) * m];
            g[j] = eps * (log_b[j] - log_sum_exp(&f, col, inv_eps));
        }
        iterations += 1;

        for i in 0..m {
            for j in 0..n {
                kernel[i * n + j] = ((f[i] + g[j] - cost.entries[i * n + j]) * inv_eps).exp();
            }
        }
        u.fill(1.0);
        v.fill(1.0);
        while iterations < config.max_iterations {
            for i in 0..m {
                let row = &kernel[i * n..(i + 1) * n];
                kv[i] = row.iter().zip(&v).map(|(k, vj)| k * vj).sum();
            }
            let row_err: f64 = (0..m).map(|i| (u[i] * kv[i] - marginals.a[i]).abs()).sum();
            if row_err < config.marginal_tolerance {
                converged = true;
                absorb(&mut f, &u, eps);
                absorb(&mut g, &v, eps);
                break 'outer;
            }
            let u_ok = (0..m).all(|i| {
                let x = marginals.a[i] / kv[i];
                x.is_finite() && x > 0.0 && x.ln().abs() < LOG_SCALE_BOUND
            });
            if !u_ok {
                absorb(&mut f, &u, eps);
                absorb(&mut g, &v, eps);
                continue 'outer;
            }
            for i in 0..m {
                u[i] = marginals.a[i] / kv[i];
            }
            ktu.fill(0.0);
            for i in 0..m {
                let row = &kernel[i * n..(i + 1) * n];
                for (acc, k) in ktu.iter_mut().zip(row) {
                    *acc += k * u[i];
                }
            }
            let v_ok = (0..n).all(|j| {
                let x = marginals.b[j] / ktu[j];
                x.is_finite() && x > 0.0 && x.ln().abs() < LOG_SCALE_BOUND
            });
            if !v_ok {
                absorb(&mut f, &u, eps);
                absorb(&mut g, &v, eps);
                continue 'outer;
            }
            for j in 0..n {
                v[j] = marginals.b[j] / ktu[j];
            }
            iterations += 1;
        }
        absorb(&mut f, &u, eps);
        absorb(&mut g, &v, eps);
    }

    let mut entries = vec![0.0; m * n];
    for i in 0..m {
        for j in 0..n {
            entries[i * n + j] = ((f[i] + g[j] - cost.entries[i * n + j]) * inv_eps).exp();
        }
    }
    if !converged {
        log::debug!(
            "sinkhorn stopped after {iterations} iterations without reaching tolerance {}",
            config.marginal_tolerance
        );
    }
    Ok(TransportPlan {
        rows: m,
        cols: n,
        entries,
        converged,
        iterations,
        f,
        g,
    })
}

fn absorb(potential: &mut [f64], scaling: &[f64], eps: f64) {
    for (p, s) in potential.iter_mut().zip(scaling) {
        *p += eps * s.ln();
    }
}

fn check_shapes(cost: &CostMatrix, plan: &TransportPlan) -> Result<()> {
    if cost.rows != plan.rows || cost.cols != plan.cols {
        return Err(validation(format!(
            "plan {}×{} does not match cost {}×{}",
            plan.rows, plan.cols, cost.rows, cost.cols
        )));
    }
    Ok(())
}

/// `⟨P, C⟩`.
pub fn transport_value(cost: &CostMatrix, plan: &TransportPlan) -> Result<f64> {
    check_shapes(cost, plan)?;
    Ok(cost
        .entries
        .iter()
        .zip(&plan.entries)
        .map(|(c, p)| c * p)
        .sum())
}

/// Entropic objective `⟨P, C⟩ + ε·KL(P ‖ a bᵀ)` evaluated at `plan`.
///
/// At a converged plan its derivative with respect to `C` is the plan itself.
pub fn regularized_value(
    cost: &CostMatrix,
    plan: &TransportPlan,
    marginals: &Marginals,
    epsilon: f64,
) -> Result<f64> {
    check_shapes(cost, plan)?;
    let mut kl = 1.0;
    for i in 0..plan.rows {
        for j in 0..plan.cols {
            let p = plan.get(i, j);
            kl -= p;
            if p > 0.0 {
                kl += p * (p / (marginals.a[i] * marginals.b[j])).ln();
            }
        }
    }
    Ok(transport_value(cost, plan)? + epsilon * kl)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Assignment {
    /// `permutation[i]` is the column matched to row `i`.
    pub permutation: Vec<usize>,
    /// `(1/N)·Σ_i C_{i, σ(i)}`.
    pub value: f64,
}

pub const MAX_ASSIGNMENT_SIZE: usize = 256;

/// Optimal permutation for a square cost matrix (Hungarian algorithm with
/// row/column potentials, O(N³)).
pub fn exact_assignment(cost: &CostMatrix) -> Result<Assignment> {
    let n = cost.rows;
    if cost.cols != n {
        return Err(validation(format!(
            "assignment needs a square matrix, got {}×{}",
            cost.rows, cost.cols
        )));
    }
    if n > MAX_ASSIGNMENT_SIZE {
        return Err(validation(format!("assignment size {n} exceeds {MAX_ASSIGNMENT_SIZE}")));
    }
    // 1-based arrays; index 0 is the virtual source column.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut matched_row = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        matched_row[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = matched_row[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let reduced = cost.get(i0 - 1, j - 1) - u[i0] - v[j];
                if reduced < minv[j] {
                    minv[j] = reduced;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[matched_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if matched_row[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            matched_row[j0] = matched_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut permutation = vec![0; n];
    for j in 1..=n {
        permutation[matched_row[j] - 1] = j - 1;
    }
    let total: f64 = permutation
        .iter()
        .enumerate()
        .map(|(i, &j)| cost.get(i, j))
        .sum();
    Ok(Assignment {
        permutation,
        value: total / n as f64,
    })
}

/// How pairwise overlaps are obtained when building a cost matrix.
pub enum OverlapMode<'a> {
    Exact,
    /// Simulated SWAP tests with `shots` repetitions per pair.
    Shots {
        shots: u64,
        rng: &'a mut dyn RngCore,
    },
}

/// `C_ij = 1 − |⟨set1_i|set2_j⟩|`, clamped to `[0, 1]`.
pub fn cost_matrix(
    set1: &PureEnsemble,
    set2: &PureEnsemble,
    mode: OverlapMode<'_>,
) -> Result<CostMatrix> {
    if set1.n_qubits() != set2.n_qubits() {
        return Err(validation(format!(
            "ensembles have {} and {} qubits",
            set1.n_qubits(),
            set2.n_qubits()
        )));
    }
    let (m, n) = (set1.len(), set2.len());
    let entries = match mode {
        OverlapMode::Exact => set1
            .states()
            .par_iter()
            .flat_map_iter(|a| {
                set2.iter().map(move |b| {
                    (1.0 - inner(a.amplitudes(), b.amplitudes()).norm()).clamp(0.0, 1.0)
                })
            })
            .collect(),
        OverlapMode::Shots { shots, rng } => {
            let mut e = Vec::with_capacity(m * n);
            for a in set1 {
                for b in set2 {
                    let est = swap_test_estimate(a, b, shots, rng)?;
                    e.push((1.0 - est).clamp(0.0, 1.0));
                }
            }
            e
        }
    };
    CostMatrix::new(m, n, entries)
}

/// Cost matrix, uniform marginals, Sinkhorn plan, then `⟨P, C⟩`.
pub fn wasserstein_distance(
    set1: &PureEnsemble,
    set2: &PureEnsemble,
    config: &SinkhornConfig,
    mode: OverlapMode<'_>,
) -> Result<f64> {
    let cost = cost_matrix(set1, set2, mode)?;
    let marginals = Marginals::uniform(cost.rows, cost.cols);
    let plan = sinkhorn(&cost, &marginals, config)?;
    if !plan.converged {
        log::warn!(
            "sinkhorn did not converge within {} iterations ({}×{})",
            config.max_iterations,
            cost.rows,
            cost.cols
        );
    }
    Ok(transport_value(&cost, &plan)?.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statevec::{hadamard, zero_state, PAULI_X};

    fn ens(states: Vec<crate::StateVector>) -> PureEnsemble {
        PureEnsemble::new(states).unwrap()
    }

    #[test]
    fn cost_matrix_cases() {
        let zero = zero_state(1).unwrap();
        let mut one = zero.clone();
        one.apply_single_qubit(0, &PAULI_X).unwrap();
        let mut plus = zero.clone();
        plus.apply_single_qubit(0, &hadamard()).unwrap();
        let z = ens(vec![zero.clone()]);
        assert_eq!(cost_matrix(&z, &z, OverlapMode::Exact).unwrap().entries(), &[0.0]);
        let c = cost_matrix(&z, &ens(vec![one]), OverlapMode::Exact).unwrap();
        assert_eq!(c.entries(), &[1.0]);
        let c = cost_matrix(&z, &ens(vec![plus]), OverlapMode::Exact).unwrap();
        assert!((c.get(0, 0) - 0.29289).abs() < 1e-5);
        let two = ens(vec![zero_state(2).unwrap()]);
        assert!(cost_matrix(&z, &two, OverlapMode::Exact).is_err());
    }

    #[test]
    fn shot_costs_are_noisy_estimates() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let zero = zero_state(1).unwrap();
        let mut plus = zero.clone();
        plus.apply_single_qubit(0, &hadamard()).unwrap();
        let c = cost_matrix(
            &ens(vec![zero]),
            &ens(vec![plus]),
            OverlapMode::Shots {
                shots: 200_000,
                rng: &mut rng,
            },
        )
        .unwrap();
        assert!((c.get(0, 0) - (1.0 - std::f64::consts::FRAC_1_SQRT_2)).abs() < 0.01);
    }

    #[test]
    fn sinkhorn_small_cases() {
        let cfg = SinkhornConfig::default();
        let c = CostMatrix::new(1, 1, vec![0.3]).unwrap();
        let plan = sinkhorn(&c, &Marginals::uniform(1, 1), &cfg).unwrap();
        assert!((plan.get(0, 0) - 1.0).abs() < 1e-12);
        assert!(plan.converged);
        assert!((transport_value(&c, &plan).unwrap() - 0.3).abs() < 1e-12);

        let c = CostMatrix::new(2, 2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        let tight = SinkhornConfig {
            epsilon: 0.001,
            ..cfg
        };
        let plan = sinkhorn(&c, &Marginals::uniform(2, 2), &tight).unwrap();
        for (p, e) in plan.entries().iter().zip([0.5, 0.0, 0.0, 0.5]) {
            assert!((p - e).abs() < 1e-3);
        }

        let loose = SinkhornConfig {
            epsilon: 100.0,
            ..cfg
        };
        let c = CostMatrix::new(2, 3, vec![0.0, 0.5, 1.0, 0.9, 0.2, 0.4]).unwrap();
        let m = Marginals::new(vec![0.3, 0.7], vec![0.2, 0.5, 0.3]).unwrap();
        let plan = sinkhorn(&c, &m, &loose).unwrap();
        for i in 0..2 {
            for j in 0..3 {
                assert!((plan.get(i, j) - m.a[i] * m.b[j]).abs() < 1e-3);
            }
        }
    }

    #[test]
    fn sinkhorn_validation() {
        let c = CostMatrix::new(2, 2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        assert!(sinkhorn(&c, &Marginals::uniform(3, 2), &SinkhornConfig::default()).is_err());
        let bad = SinkhornConfig {
            epsilon: 0.0,
            ..Default::default()
        };
        assert!(sinkhorn(&c, &Marginals::uniform(2, 2), &bad).is_err());
        assert!(CostMatrix::new(1, 1, vec![f64::NAN]).is_err());
        assert!(CostMatrix::new(1, 2, vec![0.0]).is_err());
        assert!(Marginals::new(vec![0.5, 0.6], vec![1.0]).is_err());
    }

    #[test]
    fn non_convergence_is_reported() {
        let c = CostMatrix::new(2, 2, vec![0.0, 1.0, 0.7, 0.1]).unwrap();
        let cfg = SinkhornConfig {
            epsilon: 0.001,
            max_iterations: 1,
            marginal_tolerance: 1e-14,
        };
        let plan = sinkhorn(&c, &Marginals::uniform(2, 2), &cfg).unwrap();
        assert!(!plan.converged);
        assert_eq!(plan.iterations, 1);
    }

    #[test]
    fn assignment_cases() {
        let c = CostMatrix::new(2, 2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        let a = exact_assignment(&c).unwrap();
        assert_eq!(a.permutation, vec![0, 1]);
        assert_eq!(a.value, 0.0);
        let c = CostMatrix::new(2, 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let a = exact_assignment(&c).unwrap();
        assert_eq!(a.permutation, vec![1, 0]);
        assert_eq!(a.value, 0.0);
        let c = CostMatrix::new(1, 2, vec![0.0, 1.0]).unwrap();
        assert!(exact_assignment(&c).is_err());
    }

    #[test]
    fn forced_coupling_distance() {
        let zero = zero_state(1).unwrap();
        let mut one = zero.clone();
        one.apply_single_qubit(0, &PAULI_X).unwrap();
        let w = wasserstein_distance(
            &ens(vec![zero]),
            &ens(vec![one]),
            &SinkhornConfig::default(),
            OverlapMode::Exact,
        )
        .unwrap();
        assert!((w - 1.0).abs() < 1e-12);
    }

    #[test]
    fn regularized_value_matches_plan_optimality() {
        // Entropic objective at the Sinkhorn plan is below that of the
        // independent coupling.
        let c = CostMatrix::new(2, 2, vec![0.1, 0.8, 0.6, 0.2]).unwrap();
        let m = Marginals::uniform(2, 2);
        let eps = 0.05;
        let cfg = SinkhornConfig {
            epsilon: eps,
            max_iterations: 10_000,
            marginal_tolerance: 1e-13,
        };
        let plan = sinkhorn(&c, &m, &cfg).unwrap();
        let opt = regularized_value(&c, &plan, &m, eps).unwrap();
        let mut indep = plan.clone();
        indep.entries = vec![0.25; 4];
        let other = regularized_value(&c, &indep, &m, eps).unwrap();
        assert!(opt < other);
    }
}
