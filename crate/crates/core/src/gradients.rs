//! Analytic gradients of the training losses with respect to the generator
//! angles.
//!
//! Everything reduces to one adjoint sweep: given a costate vector `χ`, a
//! single backward pass through the circuit yields `⟨χ|∂ψ/∂θ_k⟩` for every
//! trainable angle. The transport loss uses the fixed Sinkhorn plan (its
//! derivative with respect to the cost matrix is the plan itself) and the
//! entropy loss uses `dS = Tr[f(ρ₁) dρ₁]` with `f(λ) = −log₂λ − 1/ln 2`.

use std::f64::consts::{LN_2, PI};

use rayon::prelude::*;

use crate::ensemble::PureEnsemble;
use crate::error::{validation, Error, Result};
use crate::generator::{encoding_gate, run_circuit, GeneratorConfig, NoiseSample, ThetaTensor};
use crate::statevec::{
    apply_entangler, apply_mat2, dagger, entropy_from_eigenvalues, euler_gate, inner, mat_mul,
    reduced_qubit0_entries, rz, ry, DensityMatrix2x2, EulerAngles, Mat2, StateVector, C64,
    PAULI_Y, PAULI_Z,
};
use crate::transport::{
    regularized_value, sinkhorn_warm, transport_value, CostMatrix, Marginals, SinkhornConfig,
    TransportPlan,
};

/// `∂loss/∂θ`, laid out like [`ThetaTensor`].
#[derive(Clone, Debug, PartialEq)]
pub struct GradientTensor {
    reps: usize,
    n_qubits: usize,
    values: Vec<f64>,
}

impl GradientTensor {
    pub fn zeros(reps: usize, n_qubits: usize) -> Self {
        Self {
            reps,
            n_qubits,
            values: vec![0.0; 3 * reps * n_qubits],
        }
    }

    pub fn from_vec(reps: usize, n_qubits: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != 3 * reps * n_qubits {
            return Err(validation(format!(
                "{} gradient entries do not fit {reps}×{n_qubits}×3",
                values.len()
            )));
        }
        Ok(Self {
            reps,
            n_qubits,
            values,
        })
    }

    pub fn like(theta: &ThetaTensor) -> Self {
        Self::zeros(theta.reps(), theta.n_qubits())
    }

    pub fn reps(&self) -> usize {
        self.reps
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn matches(&self, theta: &ThetaTensor) -> bool {
        self.reps == theta.reps() && self.n_qubits == theta.n_qubits()
    }
}

/// `⟨target|ψ(θ, x)⟩` and its complex derivative for every angle.
#[derive(Clone, Debug, PartialEq)]
pub struct OverlapGradient {
    pub overlap: C64,
    pub derivatives: Vec<C64>,
}

fn half_minus_i(p: &Mat2) -> Mat2 {
    let f = C64::new(0.0, -0.5);
    [[p[0][0] * f, p[0][1] * f], [p[1][0] * f, p[1][1] * f]]
}

/// Derivatives of `Rz(φ3)Ry(φ2)Rz(φ1)` with respect to φ1, φ2, φ3.
fn euler_derivatives(a: EulerAngles) -> [Mat2; 3] {
    let gen_z = half_minus_i(&PAULI_Z);
    let gen_y = half_minus_i(&PAULI_Y);
    let r = euler_gate(a);
    let d1 = mat_mul(&r, &gen_z);
    let d3 = mat_mul(&gen_z, &r);
    let d2 = mat_mul(
        &rz(a.phi3),
        &mat_mul(&ry(a.phi2), &mat_mul(&gen_y, &rz(a.phi1))),
    );
    [d1, d2, d3]
}

/// `M_ab = Σ conj(λ_a)·ψ_b` over the amplitude pairs of `qubit`, so that
/// `⟨λ|(D ⊗ I)|ψ⟩ = Σ_ab D_ab M_ab`.
fn pair_contraction(costate: &[C64], state: &[C64], qubit: usize) -> Mat2 {
    let stride = 1usize << qubit;
    let mut m = [[C64::new(0.0, 0.0); 2]; 2];
    let mut base = 0;
    while base < state.len() {
        for i0 in base..base + stride {
            let i1 = i0 + stride;
            let (l0, l1) = (costate[i0].conj(), costate[i1].conj());
            let (s0, s1) = (state[i0], state[i1]);
            m[0][0] += l0 * s0;
            m[0][1] += l0 * s1;
            m[1][0] += l1 * s0;
            m[1][1] += l1 * s1;
        }
        base += 2 * stride;
    }
    m
}

/// Backward pass. Returns `⟨χ|ψ⟩` and writes `⟨χ|∂ψ/∂θ_k⟩` into `out`.
///
/// The costate need not be normalized.
pub(crate) fn adjoint_sweep(
    config: &GeneratorConfig,
    theta: &ThetaTensor,
    x: f64,
    costate: &[C64],
    out: &mut [C64],
) -> C64 {
    let mut psi = run_circuit(config, theta, x);
    let mut lambda = costate.to_vec();
    let value = inner(&lambda, &psi);
    let enc = encoding_gate(x);
    for p in (0..config.reps).rev() {
        if config.entangles() {
            // CZ layers are self-inverse and mutually commuting.
            apply_entangler(&mut psi, config.n_qubits, config.entangler);
            apply_entangler(&mut lambda, config.n_qubits, config.entangler);
        }
        for n in (0..config.n_qubits).rev() {
            let angles = theta.euler(p, n);
            let u = euler_gate(angles);
            let layer_dag = dagger(&mat_mul(&u, &enc));
            apply_mat2(&mut psi, n, &layer_dag);
            // psi now sits before the encoding gate; contract against the
            // state between the two gates via M = M'·encᵀ.
            let mp = pair_contraction(&lambda, &psi, n);
            let mut m = [[C64::new(0.0, 0.0); 2]; 2];
            for a in 0..2 {
                for b in 0..2 {
                    m[a][b] = mp[a][0] * enc[b][0] + mp[a][1] * enc[b][1];
                }
            }
            let base = theta.index(p, n, 0);
            for (k, d) in euler_derivatives(angles).iter().enumerate() {
                out[base + k] =
                    d[0][0] * m[0][0] + d[0][1] * m[0][1] + d[1][0] * m[1][0] + d[1][1] * m[1][1];
            }
            apply_mat2(&mut lambda, n, &layer_dag);
        }
    }
    value
}

fn check_inputs(config: &GeneratorConfig, theta: &ThetaTensor) -> Result<()> {
    config.validate()?;
    theta.check_matches(config)
}

/// Adjoint-mode derivative of `⟨target|ψ(θ, x)⟩`.
pub fn overlap_gradient(
    config: &GeneratorConfig,
    theta: &ThetaTensor,
    noise: NoiseSample,
    target: &StateVector,
) -> Result<OverlapGradient> {
    check_inputs(config, theta)?;
    if target.n_qubits() != config.n_qubits {
        return Err(validation(format!(
            "target has {} qubits, generator {}",
            target.n_qubits(),
            config.n_qubits
        )));
    }
    let mut derivatives = vec![C64::new(0.0, 0.0); theta.len()];
    let overlap = adjoint_sweep(config, theta, noise.0, target.amplitudes(), &mut derivatives);
    Ok(OverlapGradient {
        overlap,
        derivatives,
    })
}

fn shifted(theta: &ThetaTensor, k: usize, delta: f64) -> ThetaTensor {
    let mut t = theta.clone();
    t.as_mut_slice()[k] += delta;
    t
}

/// Parameter-shift derivative of the complex overlap `⟨target|ψ(θ)⟩`.
///
/// Each angle enters through `exp(−iθG/2)`, so amplitudes are trigonometric
/// polynomials of frequency ½ in θ and the exact two-point rule uses a shift
/// of π: `∂f = [f(θ + π) − f(θ − π)]/4`.
pub fn parameter_shift_overlap(
    config: &GeneratorConfig,
    theta: &ThetaTensor,
    noise: NoiseSample,
    target: &StateVector,
) -> Result<Vec<C64>> {
    check_inputs(config, theta)?;
    let f = |t: &ThetaTensor| inner(target.amplitudes(), &run_circuit(config, t, noise.0));
    Ok((0..theta.len())
        .map(|k| (f(&shifted(theta, k, PI)) - f(&shifted(theta, k, -PI))) / 4.0)
        .collect())
}

/// Parameter-shift derivative of the fidelity `|⟨target|ψ(θ)⟩|²`, which has
/// frequency 1 in each angle: `∂F = [F(θ + π/2) − F(θ − π/2)]/2`.
pub fn parameter_shift_fidelity(
    config: &GeneratorConfig,
    theta: &ThetaTensor,
    noise: NoiseSample,
    target: &StateVector,
) -> Result<Vec<f64>> {
    check_inputs(config, theta)?;
    let f = |t: &ThetaTensor| {
        inner(target.amplitudes(), &run_circuit(config, t, noise.0)).norm_sqr()
    };
    Ok((0..theta.len())
        .map(|k| (f(&shifted(theta, k, PI / 2.0)) - f(&shifted(theta, k, -PI / 2.0))) / 2.0)
        .collect())
}

#[derive(Clone, Debug)]
pub struct LossGradient {
    pub loss: f64,
    pub gradient: GradientTensor,
}

/// Full result of one evaluation of the transport loss.
#[derive(Clone, Debug)]
pub struct EnsembleEvaluation {
    /// `⟨P*, C⟩` at the Sinkhorn plan.
    pub loss: f64,
    pub gradient: GradientTensor,
    pub plan: TransportPlan,
    pub cost: CostMatrix,
    pub generated: PureEnsemble,
}

/// Magnitudes below this contribute no gradient through `|o|`.
pub const OVERLAP_FLOOR: f64 = 1e-12;

fn check_batch(
    config: &GeneratorConfig,
    theta: &ThetaTensor,
    noises: &[NoiseSample],
) -> Result<()> {
    check_inputs(config, theta)?;
    if noises.is_empty() {
        return Err(validation("noise batch is empty"));
    }
    if noises.iter().any(|x| !x.0.is_finite()) {
        return Err(validation("noise batch has non-finite samples"));
    }
    Ok(())
}

/// Evaluates the transport loss between the states generated from `noises`
/// and `targets`, with its fixed-plan gradient.
pub fn evaluate_ensemble_loss(
    config: &GeneratorConfig,
    theta: &ThetaTensor,
    noises: &[NoiseSample],
    targets: &PureEnsemble,
    sinkhorn_config: &SinkhornConfig,
    warm_start: Option<&[f64]>,
) -> Result<EnsembleEvaluation> {
    check_batch(config, theta, noises)?;
    if targets.n_qubits() != config.n_qubits {
        return Err(validation(format!(
            "targets have {} qubits, generator {}",
            targets.n_qubits(),
            config.n_qubits
        )));
    }
    let generated: Vec<Vec<C64>> = noises
        .par_iter()
        .map(|x| run_circuit(config, theta, x.0))
        .collect();
    let (m, n) = (generated.len(), targets.len());
    let overlaps: Vec<C64> = generated
        .par_iter()
        .flat_map_iter(|psi| targets.iter().map(move |t| inner(t.amplitudes(), psi)))
        .collect();
    let cost = CostMatrix::new(
        m,
        n,
        overlaps
            .iter()
            .map(|o| (1.0 - o.norm()).clamp(0.0, 1.0))
            .collect(),
    )?;
    let marginals = Marginals::uniform(m, n);
    let plan = sinkhorn_warm(&cost, &marginals, sinkhorn_config, warm_start)?;
    let loss = transport_value(&cost, &plan)?;

    let dim = 1usize << config.n_qubits;
    let per_sample: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|i| {
            let mut chi = vec![C64::new(0.0, 0.0); dim];
            for (j, t) in targets.iter().enumerate() {
                let o = overlaps[i * n + j];
                let mag = o.norm();
                let w = plan.get(i, j);
                if mag < OVERLAP_FLOOR || w == 0.0 {
                    continue;
                }
                let coef = o * (w / mag);
                for (c, a) in chi.iter_mut().zip(t.amplitudes()) {
                    *c += coef * a;
                }
            }
            let mut d = vec![C64::new(0.0, 0.0); theta.len()];
            adjoint_sweep(config, theta, noises[i].0, &chi, &mut d);
            d.iter().map(|z| -z.re).collect()
        })
        .collect();
    let mut gradient = GradientTensor::like(theta);
    for contrib in &per_sample {
        for (g, c) in gradient.values.iter_mut().zip(contrib) {
            *g += c;
        }
    }
    let generated = PureEnsemble::new(
        generated
            .into_iter()
            .map(|a| StateVector::from_raw(config.n_qubits, a))
            .collect(),
    )?;
    Ok(EnsembleEvaluation {
        loss,
        gradient,
        plan,
        cost,
        generated,
    })
}

/// `(⟨P*, C⟩, ∇θ)` for the transport loss with the plan held fixed.
pub fn ensemble_loss_gradient(
    config: &GeneratorConfig,
    theta: &ThetaTensor,
    noises: &[NoiseSample],
    targets: &PureEnsemble,
    sinkhorn_config: &SinkhornConfig,
) -> Result<LossGradient> {
    let eval = evaluate_ensemble_loss(config, theta, noises, targets, sinkhorn_config, None)?;
    Ok(LossGradient {
        loss: eval.loss,
        gradient: eval.gradient,
    })
}

/// The entropic objective `⟨P*, C⟩ + ε·KL(P* ‖ a bᵀ)`, whose exact gradient is
/// what [`ensemble_loss_gradient`] returns once Sinkhorn has converged.
pub fn ensemble_regularized_loss(
    config: &GeneratorConfig,
    theta: &ThetaTensor,
    noises: &[NoiseSample],
    targets: &PureEnsemble,
    sinkhorn_config: &SinkhornConfig,
) -> Result<f64> {
    let eval = evaluate_ensemble_loss(config, theta, noises, targets, sinkhorn_config, None)?;
    let marginals = Marginals::uniform(eval.cost.rows(), eval.cost.cols());
    regularized_value(&eval.cost, &eval.plan, &marginals, sinkhorn_config.epsilon)
}

const LAMBDA_CLAMP: f64 = 1e-12;

/// Entropy of qubit 0 and the Hermitian matrix `f(ρ₁)` with
/// `f(λ) = −log₂λ − 1/ln 2`, so that `dS = Tr[f(ρ₁) dρ₁]`.
fn entropy_and_derivative(amps: &[C64]) -> Result<(f64, Mat2)> {
    let entries = reduced_qubit0_entries(amps);
    let rho = DensityMatrix2x2::new(entries)
        .map_err(|e| Error::Numerical(format!("reduced density matrix: {e}")))?;
    let (lo, hi) = rho.eigenvalues();
    let s = entropy_from_eigenvalues(lo, hi)?;
    let f = |l: f64| -l.clamp(LAMBDA_CLAMP, 1.0 - LAMBDA_CLAMP).log2() - 1.0 / LN_2;
    let gap = hi - lo;
    // f(ρ) = f(λ−)·I + slope·(ρ − λ−·I), slope the divided difference of f.
    let slope = if gap > 1e-9 {
        (f(hi) - f(lo)) / gap
    } else {
        -1.0 / ((lo + hi) / 2.0).clamp(LAMBDA_CLAMP, 1.0) / LN_2
    };
    let mut g = [[C64::new(0.0, 0.0); 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            g[r][c] = entries[r][c] * slope;
        }
        g[r][r] += f(lo) - slope * lo;
    }
    Ok((s, g))
}

/// Entropy of the first qubit of each generated two-qubit state.
pub fn generated_entropies(
    config: &GeneratorConfig,
    theta: &ThetaTensor,
    noises: &[NoiseSample],
) -> Result<Vec<f64>> {
    check_entropy_config(config)?;
    check_batch(config, theta, noises)?;
    noises
        .iter()
        .map(|x| entropy_and_derivative(&run_circuit(config, theta, x.0)).map(|(s, _)| s))
        .collect()
}

fn check_entropy_config(config: &GeneratorConfig) -> Result<()> {
    if config.n_qubits != 2 {
        return Err(validation(format!(
            "entropy loss needs 2 qubits, got {}",
            config.n_qubits
        )));
    }
    Ok(())
}

/// Mean over the batch of `(S(ρ₁) − s_target)²` and its gradient.
pub fn entropy_loss_gradient(
    config: &GeneratorConfig,
    theta: &ThetaTensor,
    noises: &[NoiseSample],
    s_target: f64,
) -> Result<LossGradient> {
    check_entropy_config(config)?;
    check_batch(config, theta, noises)?;
    if !(0.0..=1.0).contains(&s_target) {
        return Err(validation(format!("entropy target {s_target} outside [0, 1]")));
    }
    let per_sample: Vec<(f64, Vec<f64>)> = noises
        .par_iter()
        .map(|x| -> Result<(f64, Vec<f64>)> {
            let psi = run_circuit(config, theta, x.0);
            let (s, g) = entropy_and_derivative(&psi)?;
            let residual = s - s_target;
            let mut chi = psi;
            apply_mat2(&mut chi, 0, &g);
            let mut d = vec![C64::new(0.0, 0.0); theta.len()];
            adjoint_sweep(config, theta, x.0, &chi, &mut d);
            // dS = 2·Re⟨χ|∂ψ⟩, d(residual²) = 2·residual·dS
            Ok((residual * residual, d.iter().map(|z| 4.0 * residual * z.re).collect()))
        })
        .collect::<Result<_>>()?;
    let scale = 1.0 / noises.len() as f64;
    let mut gradient = GradientTensor::like(theta);
    let mut loss = 0.0;
    for (l, g) in &per_sample {
        loss += l;
        for (acc, v) in gradient.values.iter_mut().zip(g) {
            *acc += v;
        }
    }
    gradient.values.iter_mut().for_each(|v| *v *= scale);
    Ok(LossGradient {
        loss: loss * scale,
        gradient,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct FdReport {
    pub max_relative_error: f64,
    pub max_absolute_error: f64,
    /// Coordinates whose relative error reached the tolerance.
    pub failing: Vec<usize>,
    pub analytic: Vec<f64>,
    pub numeric: Vec<f64>,
    pub passed: bool,
}

/// Compares an analytic gradient against central differences.
///
/// `loss_fn` returns the loss and its analytic gradient. The relative error
/// of coordinate k is `|a_k − n_k| / max(|a_k|, |n_k|, 1e-3·‖n‖∞, 1e-12)`;
/// the check passes when every coordinate is strictly below `tolerance`.
pub fn finite_difference_check<F>(
    mut loss_fn: F,
    theta: &ThetaTensor,
    h: f64,
    tolerance: f64,
) -> Result<FdReport>
where
    F: FnMut(&ThetaTensor) -> Result<(f64, GradientTensor)>,
{
    if !(1e-7..=1e-2).contains(&h) {
        return Err(validation(format!("step {h} outside [1e-7, 1e-2]")));
    }
    let (_, analytic) = loss_fn(theta)?;
    if !analytic.matches(theta) {
        return Err(validation("analytic gradient shape does not match theta"));
    }
    let mut numeric = Vec::with_capacity(theta.len());
    for k in 0..theta.len() {
        let (plus, _) = loss_fn(&shifted(theta, k, h))?;
        let (minus, _) = loss_fn(&shifted(theta, k, -h))?;
        numeric.push((plus - minus) / (2.0 * h));
    }
    let scale = numeric.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut max_rel: f64 = 0.0;
    let mut max_abs: f64 = 0.0;
    let mut failing = Vec::new();
    for (k, (a, n)) in analytic.as_slice().iter().zip(&numeric).enumerate() {
        let abs = (a - n).abs();
        let denom = a.abs().max(n.abs()).max(1e-3 * scale).max(1e-12);
        let rel = abs / denom;
        if !(rel < tolerance) {
            failing.push(k);
        }
        max_rel = max_rel.max(rel);
        max_abs = max_abs.max(abs);
    }
    Ok(FdReport {
        max_relative_error: max_rel,
        max_absolute_error: max_abs,
        passed: failing.is_empty(),
        failing,
        analytic: analytic.values,
        numeric,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statevec::zero_state;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_state<R: Rng>(n: usize, rng: &mut R) -> StateVector {
        let mut amps: Vec<C64> = (0..1 << n)
            .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        amps.iter_mut().for_each(|a| *a /= norm);
        StateVector::from_amplitudes(amps).unwrap()
    }

    #[test]
    fn stationary_point_at_zero() {
        let cfg = GeneratorConfig::new(1, 1);
        let theta = ThetaTensor::zeros(1, 1);
        let g = overlap_gradient(&cfg, &theta, NoiseSample(0.0), &zero_state(1).unwrap()).unwrap();
        assert!((g.overlap - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(g.derivatives[1].norm() < 1e-15);
    }

    #[test]
    fn adjoint_matches_parameter_shift() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for (n, p) in [(1, 1), (1, 3), (2, 2), (3, 2)] {
            let cfg = GeneratorConfig::new(n, p);
            let theta = ThetaTensor::random(&cfg, &mut rng);
            let x = NoiseSample(rng.random_range(-0.1..0.1));
            let target = random_state(n, &mut rng);
            let adj = overlap_gradient(&cfg, &theta, x, &target).unwrap();
            let ps = parameter_shift_overlap(&cfg, &theta, x, &target).unwrap();
            for (a, b) in adj.derivatives.iter().zip(&ps) {
                assert!((a - b).norm() <= 1e-8 * b.norm().max(1e-3), "{a} vs {b}");
            }
            let fid = parameter_shift_fidelity(&cfg, &theta, x, &target).unwrap();
            for (d, f) in adj.derivatives.iter().zip(&fid) {
                let from_adj = 2.0 * (adj.overlap.conj() * d).re;
                assert!((from_adj - f).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn quadratic_fd_check() {
        let theta = ThetaTensor::from_vec(1, 2, vec![0.3, -1.2, 0.8, 2.0, 0.0, -0.4]).unwrap();
        let report = finite_difference_check(
            |t| {
                let v = t.as_slice();
                let g = GradientTensor::from_vec(1, 2, v.iter().map(|x| 2.0 * x).collect())?;
                Ok((v.iter().map(|x| x * x).sum(), g))
            },
            &theta,
            1e-5,
            1e-9,
        )
        .unwrap();
        assert!(report.passed, "{report:?}");
        assert!(finite_difference_check(|_| unreachable!(), &theta, 1.0, 1e-3).is_err());
    }

    #[test]
    fn self_matching_loss_is_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let cfg = GeneratorConfig::new(1, 3);
        let theta = ThetaTensor::random(&cfg, &mut rng);
        let noises: Vec<_> = (0..6).map(|_| NoiseSample(rng.random_range(-0.1..0.1))).collect();
        let targets = crate::generate_ensemble(&cfg, &theta, &noises).unwrap();
        let lg =
            ensemble_loss_gradient(&cfg, &theta, &noises, &targets, &SinkhornConfig::default())
                .unwrap();
        assert!(lg.loss < 1e-2);
        assert!(lg.gradient.is_finite());
    }

    #[test]
    fn entropy_edge_cases() {
        let zero_noise = vec![NoiseSample(0.0); 4];
        let cfg = GeneratorConfig::new(2, 1);
        let bell = ThetaTensor::from_vec(1, 2, vec![0.0, PI / 2.0, 0.0, 0.0, PI / 2.0, 0.0]).unwrap();
        let lg = entropy_loss_gradient(&cfg, &bell, &zero_noise, 1.0).unwrap();
        assert!(lg.loss < 1e-10);

        let lg = entropy_loss_gradient(&cfg, &ThetaTensor::zeros(1, 2), &zero_noise, 0.0).unwrap();
        assert_eq!(lg.loss, 0.0);
        assert!(lg.gradient.norm() == 0.0);

        let one = GeneratorConfig::new(1, 1);
        assert!(entropy_loss_gradient(&one, &ThetaTensor::zeros(1, 1), &zero_noise, 0.5).is_err());
        assert!(entropy_loss_gradient(&cfg, &bell, &zero_noise, 1.5).is_err());
    }
}
