//! Target ensembles, noise samplers and file formats.
//!
//! Ensemble files are UTF-8 JSON:
//!
//! ```text
//! {
//!   "n_qubits": 1,
//!   "count": 2,
//!   "states": [
//!     [[1.0000000000000000e0, 0.0000000000000000e0], [0.0000000000000000e0, 0.0000000000000000e0]],
//!     ...
//!   ]
//! }
//! ```
//!
//! Each state is a list of `[re, im]` pairs in basis-index order (qubit 0 is
//! the least significant bit). Numbers carry 17 significant digits so a
//! save/load round trip is bitwise exact. Parameter files hold the generator
//! shape next to the flat `(p, n, k)`-ordered angle list.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::ensemble::PureEnsemble;
use crate::error::{validation, Error, Result};
use crate::generator::{GeneratorConfig, NoiseSample, ThetaTensor};
use crate::rng::{stream_rng, stream_rng_indexed, Stream};
use crate::statevec::{hadamard, ry, rz, zero_state, EntanglerTopology, StateVector, C64};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseKind {
    Uniform { lo: f64, hi: f64 },
    Gaussian { mean: f64, std: f64 },
    /// Picks one of the two intervals with probability ½, then a uniform point
    /// inside it.
    TwoInterval { lo1: f64, hi1: f64, lo2: f64, hi2: f64 },
}

impl NoiseKind {
    pub fn validate(&self) -> Result<()> {
        let ok_interval = |lo: f64, hi: f64| lo.is_finite() && hi.is_finite() && lo < hi;
        match *self {
            NoiseKind::Uniform { lo, hi } if !ok_interval(lo, hi) => {
                Err(validation(format!("invalid uniform interval [{lo}, {hi}]")))
            }
            NoiseKind::Gaussian { mean, std } if !(mean.is_finite() && std > 0.0 && std.is_finite()) => {
                Err(validation(format!("invalid gaussian({mean}, {std})")))
            }
            NoiseKind::TwoInterval { lo1, hi1, lo2, hi2 } => {
                if !ok_interval(lo1, hi1) || !ok_interval(lo2, hi2) {
                    return Err(validation("each noise interval needs lo < hi"));
                }
                if lo1 < hi2 && lo2 < hi1 {
                    return Err(validation(format!(
                        "intervals [{lo1}, {hi1}] and [{lo2}, {hi2}] overlap"
                    )));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Interval `category` (1 or 2) of a two-interval law.
    pub fn interval(&self, category: usize) -> Result<(f64, f64)> {
        match (*self, category) {
            (NoiseKind::TwoInterval { lo1, hi1, .. }, 1) => Ok((lo1, hi1)),
            (NoiseKind::TwoInterval { lo2, hi2, .. }, 2) => Ok((lo2, hi2)),
            (NoiseKind::TwoInterval { .. }, c) => {
                Err(validation(format!("category must be 1 or 2, got {c}")))
            }
            _ => Err(validation("a category needs a two_interval noise spec")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    #[serde(flatten)]
    pub kind: NoiseKind,
    #[serde(default)]
    pub seed: u64,
}

impl NoiseSpec {
    pub fn uniform(lo: f64, hi: f64, seed: u64) -> Self {
        Self {
            kind: NoiseKind::Uniform { lo, hi },
            seed,
        }
    }
}

/// Stateful seeded noise source.
pub struct NoiseSampler {
    kind: NoiseKind,
    rng: ChaCha8Rng,
}

impl NoiseSampler {
    pub fn new(kind: NoiseKind, rng: ChaCha8Rng) -> Result<Self> {
        kind.validate()?;
        Ok(Self { kind, rng })
    }

    pub fn from_spec(spec: &NoiseSpec) -> Result<Self> {
        Self::new(spec.kind, stream_rng(spec.seed, Stream::Generate))
    }

    /// `count` i.i.d. samples; `category` forces one interval of a
    /// two-interval law.
    pub fn sample(&mut self, count: usize, category: Option<usize>) -> Result<Vec<NoiseSample>> {
        if count == 0 {
            return Err(validation("noise count must be at least 1"));
        }
        let rng = &mut self.rng;
        let samples = match (self.kind, category) {
            (kind, Some(c)) => {
                let (lo, hi) = kind.interval(c)?;
                (0..count).map(|_| rng.random_range(lo..hi)).collect()
            }
            (NoiseKind::Uniform { lo, hi }, None) => {
                (0..count).map(|_| rng.random_range(lo..hi)).collect()
            }
            (NoiseKind::Gaussian { mean, std }, None) => {
                let normal = Normal::new(mean, std).map_err(|e| validation(e.to_string()))?;
                (0..count).map(|_| normal.sample(rng)).collect()
            }
            (NoiseKind::TwoInterval { lo1, hi1, lo2, hi2 }, None) => (0..count)
                .map(|_| {
                    if rng.random_bool(0.5) {
                        rng.random_range(lo1..hi1)
                    } else {
                        rng.random_range(lo2..hi2)
                    }
                })
                .collect::<Vec<f64>>(),
        };
        Ok(samples.into_iter().map(NoiseSample).collect())
    }
}

/// Reproducible i.i.d. samples from `spec`.
pub fn sample_noise(spec: &NoiseSpec, count: usize) -> Result<Vec<NoiseSample>> {
    NoiseSampler::from_spec(spec)?.sample(count, None)
}

// Dataset sub-streams: 0 ring_y, 1 TFIM fields, 2 ring_z.
fn ring_angles(count: usize, seed: u64, index: u64) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(validation("ensemble count must be at least 1"));
    }
    let mut rng = stream_rng_indexed(seed, Stream::Dataset, index);
    Ok((0..count).map(|_| rng.random_range(0.0..2.0 * PI)).collect())
}

/// `Ry(φ)|0⟩`, the Bloch-sphere great circle perpendicular to Y.
pub fn ring_y_state(phi: f64) -> StateVector {
    let mut s = zero_state(1).expect("one qubit");
    s.apply_single_qubit(0, &ry(phi)).expect("rotation is unitary");
    s
}

/// `Rz(φ)·H|0⟩`, the equator (perpendicular to Z).
pub fn ring_z_state(phi: f64) -> StateVector {
    let mut s = zero_state(1).expect("one qubit");
    s.apply_single_qubit(0, &hadamard()).expect("unitary");
    s.apply_single_qubit(0, &rz(phi)).expect("unitary");
    s
}

/// `count` states `Ry(φ_i)|0⟩` with `φ_i ~ U[0, 2π)`.
pub fn ring_y_ensemble(count: usize, seed: u64) -> Result<PureEnsemble> {
    PureEnsemble::new(ring_angles(count, seed, 0)?.into_iter().map(ring_y_state).collect())
}

/// `count` states `(|0⟩ + e^{iφ_i}|1⟩)/√2` up to phase, `φ_i ~ U[0, 2π)`.
pub fn ring_z_ensemble(count: usize, seed: u64) -> Result<PureEnsemble> {
    PureEnsemble::new(ring_angles(count, seed, 2)?.into_iter().map(ring_z_state).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TfimConfig {
    pub n_sites: usize,
    pub g_lo: f64,
    pub g_hi: f64,
    pub count: usize,
    pub seed: u64,
}

impl Default for TfimConfig {
    fn default() -> Self {
        Self {
            n_sites: 10,
            g_lo: 1.3,
            g_hi: 1.5,
            count: 100,
            seed: 0,
        }
    }
}

pub const MAX_TFIM_SITES: usize = 14;

/// Open-chain `H = −Σ_{n<N} Z_n Z_{n+1} − g Σ_n X_n`, applied matrix-free.
#[derive(Clone, Debug)]
pub struct TfimHamiltonian {
    n_sites: usize,
    g: f64,
    zz_diagonal: Vec<f64>,
}

impl TfimHamiltonian {
    pub fn new(n_sites: usize, g: f64) -> Result<Self> {
        if !(2..=MAX_TFIM_SITES).contains(&n_sites) {
            return Err(Error::Config(format!(
                "TFIM needs 2..={MAX_TFIM_SITES} sites, got {n_sites}"
            )));
        }
        if !g.is_finite() {
            return Err(Error::Config(format!("field g = {g} is not finite")));
        }
        let zz_diagonal = (0..1usize << n_sites)
            .map(|i| {
                (0..n_sites - 1)
                    .map(|n| {
                        let aligned = ((i >> n) & 1) == ((i >> (n + 1)) & 1);
                        if aligned {
                            -1.0
                        } else {
                            1.0
                        }
                    })
                    .sum()
            })
            .collect();
        Ok(Self {
            n_sites,
            g,
            zz_diagonal,
        })
    }

    pub fn dim(&self) -> usize {
        self.zz_diagonal.len()
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn apply(&self, v: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = self.zz_diagonal[i] * v[i];
            for n in 0..self.n_sites {
                acc -= self.g * v[i ^ (1 << n)];
            }
            *o = acc;
        }
    }

    /// `⟨ψ|H|ψ⟩` for a complex state.
    pub fn energy(&self, state: &StateVector) -> Result<f64> {
        if state.dim() != self.dim() {
            return Err(validation("state dimension does not match the Hamiltonian"));
        }
        let amps = state.amplitudes();
        let mut e = 0.0;
        for (i, a) in amps.iter().enumerate() {
            let mut h = a * self.zz_diagonal[i];
            for n in 0..self.n_sites {
                h -= amps[i ^ (1 << n)] * self.g;
            }
            e += (a.conj() * h).re;
        }
        Ok(e)
    }
}

#[derive(Clone, Debug)]
pub struct GroundState {
    pub energy: f64,
    pub vector: Vec<f64>,
    /// `‖Hψ − Eψ‖`.
    pub residual: f64,
    /// Distance to the next Ritz value, when one was resolved.
    pub gap: Option<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = dot(v, v).sqrt();
    v.iter_mut().for_each(|x| *x /= n);
    n
}

const LANCZOS_KRYLOV: usize = 120;
const LANCZOS_RESTARTS: usize = 30;
const LANCZOS_RESIDUAL: f64 = 1e-11;

/// Lowest eigenpair by restarted Lanczos with full reorthogonalization.
pub fn lanczos_ground_state(h: &TfimHamiltonian, start: Vec<f64>) -> Result<GroundState> {
    let dim = h.dim();
    if start.len() != dim {
        return Err(validation("start vector has the wrong dimension"));
    }
    let kmax = LANCZOS_KRYLOV.min(dim);
    let mut q0 = start;
    if normalize(&mut q0) == 0.0 {
        return Err(validation("start vector is zero"));
    }
    let mut w = vec![0.0; dim];
    let mut best: Option<GroundState> = None;
    for _ in 0..LANCZOS_RESTARTS {
        let mut basis: Vec<Vec<f64>> = vec![q0.clone()];
        let mut alpha = Vec::with_capacity(kmax);
        let mut beta: Vec<f64> = Vec::with_capacity(kmax);
        for j in 0..kmax {
            h.apply(&basis[j], &mut w);
            let a = dot(&basis[j], &w);
            alpha.push(a);
            // Two passes of classical Gram-Schmidt against the whole basis.
            for _ in 0..2 {
                for q in &basis {
                    let c = dot(q, &w);
                    w.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
                }
            }
            let b = dot(&w, &w).sqrt();
            if j + 1 == kmax || b < 1e-12 {
                break;
            }
            beta.push(b);
            basis.push(w.iter().map(|x| x / b).collect());
        }
        let k = alpha.len();
        let mut t = DMatrix::<f64>::zeros(k, k);
        for i in 0..k {
            t[(i, i)] = alpha[i];
            if i + 1 < k {
                t[(i, i + 1)] = beta[i];
                t[(i + 1, i)] = beta[i];
            }
        }
        let eig = SymmetricEigen::new(t);
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let lowest = order[0];
        let energy = eig.eigenvalues[lowest];
        let gap = order.get(1).map(|&i| eig.eigenvalues[i] - energy);
        let mut ritz = vec![0.0; dim];
        for (c, q) in eig.eigenvectors.column(lowest).iter().zip(&basis) {
            ritz.iter_mut().zip(q).for_each(|(r, x)| *r += c * x);
        }
        normalize(&mut ritz);
        h.apply(&ritz, &mut w);
        let energy_rq = dot(&ritz, &w);
        let residual = w
            .iter()
            .zip(&ritz)
            .map(|(hv, v)| (hv - energy_rq * v).powi(2))
            .sum::<f64>()
            .sqrt();
        let done = residual < LANCZOS_RESIDUAL || k == dim;
        q0 = ritz.clone();
        best = Some(GroundState {
            energy: energy_rq,
            vector: ritz,
            residual,
            gap,
        });
        if done {
            break;
        }
    }
    let gs = best.expect("at least one Lanczos cycle");
    if gs.residual > 1e-8 {
        return Err(Error::Numerical(format!(
            "Lanczos did not converge (residual {:e})",
            gs.residual
        )));
    }
    Ok(gs)
}

/// Rescales so the largest-magnitude amplitude is real and positive.
fn fix_sign(v: &mut [f64]) {
    let pivot = v
        .iter()
        .copied()
        .fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
    if pivot < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Ground state of the TFIM chain at field `g`.
pub fn tfim_ground_state(n_sites: usize, g: f64) -> Result<(StateVector, GroundState)> {
    let h = TfimHamiltonian::new(n_sites, g)?;
    // Deterministic start with weight on every basis state.
    let start: Vec<f64> = (0..h.dim())
        .map(|i| 1.0 + 0.1 * ((i as f64) * 0.618_033_988_75).fract())
        .collect();
    let mut gs = lanczos_ground_state(&h, start)?;
    if matches!(gs.gap, Some(gap) if gap < 1e-10) {
        log::warn!("TFIM ground space at g = {g} looks degenerate (gap {:e})", gs.gap.unwrap());
    }
    fix_sign(&mut gs.vector);
    let amps = gs.vector.iter().map(|&x| C64::new(x, 0.0)).collect();
    Ok((StateVector::from_amplitudes(amps)?, gs))
}

#[derive(Clone, Debug)]
pub struct TfimDataset {
    pub ensemble: PureEnsemble,
    pub g_values: Vec<f64>,
    pub energies: Vec<f64>,
    pub residuals: Vec<f64>,
}

/// Ground states for `count` fields drawn uniformly from `[g_lo, g_hi)`.
pub fn tfim_ground_states(config: &TfimConfig) -> Result<TfimDataset> {
    if config.n_sites > MAX_TFIM_SITES || config.n_sites < 2 {
        return Err(Error::Config(format!(
            "TFIM needs 2..={MAX_TFIM_SITES} sites, got {}",
            config.n_sites
        )));
    }
    if !(config.g_lo < config.g_hi) || config.count == 0 {
        return Err(Error::Config("TFIM needs g_lo < g_hi and count ≥ 1".into()));
    }
    let mut rng = stream_rng_indexed(config.seed, Stream::Dataset, 1);
    let g_values: Vec<f64> = (0..config.count)
        .map(|_| rng.random_range(config.g_lo..config.g_hi))
        .collect();
    let mut states = Vec::with_capacity(config.count);
    let mut energies = Vec::with_capacity(config.count);
    let mut residuals = Vec::with_capacity(config.count);
    for &g in &g_values {
        let (state, gs) = tfim_ground_state(config.n_sites, g)?;
        states.push(state);
        energies.push(gs.energy);
        residuals.push(gs.residual);
    }
    Ok(TfimDataset {
        ensemble: PureEnsemble::new(states)?,
        g_values,
        energies,
        residuals,
    })
}

/// Dense eigen-decomposition of the TFIM Hamiltonian, for small chains.
pub fn tfim_dense_spectrum(n_sites: usize, g: f64) -> Result<Vec<f64>> {
    let h = TfimHamiltonian::new(n_sites, g)?;
    if n_sites > 8 {
        return Err(Error::Config("dense spectrum limited to 8 sites".into()));
    }
    let dim = h.dim();
    let mut m = DMatrix::<f64>::zeros(dim, dim);
    let mut e = vec![0.0; dim];
    let mut col = vec![0.0; dim];
    for j in 0..dim {
        e.iter_mut().for_each(|x| *x = 0.0);
        e[j] = 1.0;
        h.apply(&e, &mut col);
        for i in 0..dim {
            m[(i, j)] = col[i];
        }
    }
    let mut vals: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_error(e: serde_json::Error) -> Error {
    Error::Parse {
        location: format!("line {}, column {}", e.line(), e.column()),
        message: e.to_string(),
    }
}

fn semantic_error(location: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Parse {
        location: location.into(),
        message: message.into(),
    }
}

/// Serializes an ensemble in the documented JSON layout.
pub fn ensemble_to_string(ensemble: &PureEnsemble) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{{");
    let _ = writeln!(out, "  \"n_qubits\": {},", ensemble.n_qubits());
    let _ = writeln!(out, "  \"count\": {},", ensemble.len());
    let _ = writeln!(out, "  \"states\": [");
    for (k, state) in ensemble.iter().enumerate() {
        let pairs: Vec<String> = state
            .amplitudes()
            .iter()
            .map(|a| format!("[{}, {}]", sig17(a.re), sig17(a.im)))
            .collect();
        let sep = if k + 1 == ensemble.len() { "" } else { "," };
        let _ = writeln!(out, "    [{}]{sep}", pairs.join(", "));
    }
    let _ = writeln!(out, "  ]");
    let _ = writeln!(out, "}}");
    out
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EnsembleFile {
    n_qubits: usize,
    count: usize,
    states: Vec<Vec<[f64; 2]>>,
}

pub fn ensemble_from_str(text: &str) -> Result<PureEnsemble> {
    let file: EnsembleFile = serde_json::from_str(text).map_err(parse_error)?;
    if file.n_qubits == 0 || file.n_qubits > crate::statevec::MAX_QUBITS {
        return Err(semantic_error("header", format!("invalid n_qubits {}", file.n_qubits)));
    }
    if file.states.len() != file.count {
        return Err(semantic_error(
            "header",
            format!("count {} but {} states present", file.count, file.states.len()),
        ));
    }
    let dim = 1usize << file.n_qubits;
    let mut states = Vec::with_capacity(file.count);
    for (i, amps) in file.states.into_iter().enumerate() {
        if amps.len() != dim {
            return Err(semantic_error(
                format!("state {i}"),
                format!("{} amplitudes, expected {dim}", amps.len()),
            ));
        }
        let amps = amps.into_iter().map(|[re, im]| C64::new(re, im)).collect();
        states.push(
            StateVector::from_amplitudes(amps)
                .map_err(|e| semantic_error(format!("state {i}"), e.to_string()))?,
        );
    }
    PureEnsemble::new(states).map_err(|e| semantic_error("states", e.to_string()))
}

pub fn save_ensemble(path: impl AsRef<Path>, ensemble: &PureEnsemble) -> Result<()> {
    fs::write(path, ensemble_to_string(ensemble))?;
    Ok(())
}

pub fn load_ensemble(path: impl AsRef<Path>) -> Result<PureEnsemble> {
    ensemble_from_str(&fs::read_to_string(path)?)
}

pub fn theta_to_string(theta: &ThetaTensor, config: &GeneratorConfig) -> String {
    let angles: Vec<String> = theta.as_slice().iter().map(|&a| sig17(a)).collect();
    format!(
        "{{\n  \"n_qubits\": {},\n  \"reps\": {},\n  \"entangler\": \"{}\",\n  \"use_entangler\": {},\n  \"angles\": [{}]\n}}\n",
        config.n_qubits,
        config.reps,
        config.entangler,
        config.use_entangler,
        angles.join(", ")
    )
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ThetaFile {
    n_qubits: usize,
    reps: usize,
    entangler: EntanglerTopology,
    use_entangler: bool,
    angles: Vec<f64>,
}

pub fn theta_from_str(text: &str) -> Result<(ThetaTensor, GeneratorConfig)> {
    let file: ThetaFile = serde_json::from_str(text).map_err(parse_error)?;
    let config = GeneratorConfig {
        n_qubits: file.n_qubits,
        reps: file.reps,
        entangler: file.entangler,
        use_entangler: file.use_entangler,
    };
    config
        .validate()
        .map_err(|e| semantic_error("header", e.to_string()))?;
    let theta = ThetaTensor::from_vec(file.reps, file.n_qubits, file.angles)
        .map_err(|e| semantic_error("angles", e.to_string()))?;
    Ok((theta, config))
}

pub fn save_theta(
    path: impl AsRef<Path>,
    theta: &ThetaTensor,
    config: &GeneratorConfig,
) -> Result<()> {
    theta.check_matches(config)?;
    fs::write(path, theta_to_string(theta, config))?;
    Ok(())
}

pub fn load_theta(path: impl AsRef<Path>) -> Result<(ThetaTensor, GeneratorConfig)> {
    theta_from_str(&fs::read_to_string(path)?)
}
