//! Dense statevector kernel.
//!
//! Amplitudes are stored with qubit 0 as the least significant bit of the
//! basis index: basis state `|b_{n-1} … b_1 b_0⟩` lives at index
//! `Σ_k b_k 2^k`. Every module in the crate uses this convention.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{validation, Error, Result};

pub type C64 = Complex64;

/// Row-major 2×2 complex matrix.
pub type Mat2 = [[C64; 2]; 2];

pub const MAX_QUBITS: usize = 20;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

pub const IDENTITY: Mat2 = [[ONE, ZERO], [ZERO, ONE]];
pub const PAULI_X: Mat2 = [[ZERO, ONE], [ONE, ZERO]];
pub const PAULI_Y: Mat2 = [[ZERO, C64::new(0.0, -1.0)], [C64::new(0.0, 1.0), ZERO]];
pub const PAULI_Z: Mat2 = [[ONE, ZERO], [ZERO, C64::new(-1.0, 0.0)]];

pub fn hadamard() -> Mat2 {
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    [[h, h], [h, -h]]
}

pub fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub fn dagger(m: &Mat2) -> Mat2 {
    [
        [m[0][0].conj(), m[1][0].conj()],
        [m[0][1].conj(), m[1][1].conj()],
    ]
}

/// Largest entry-wise deviation of `m·m†` from the identity.
pub fn unitarity_error(m: &Mat2) -> f64 {
    let p = mat_mul(m, &dagger(m));
    let mut err: f64 = 0.0;
    for (i, row) in p.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let target = if i == j { ONE } else { ZERO };
            err = err.max((v - target).norm());
        }
    }
    err
}

pub fn ry(theta: f64) -> Mat2 {
    let (s, c) = (theta / 2.0).sin_cos();
    [
        [C64::new(c, 0.0), C64::new(-s, 0.0)],
        [C64::new(s, 0.0), C64::new(c, 0.0)],
    ]
}

pub fn rz(theta: f64) -> Mat2 {
    let (s, c) = (theta / 2.0).sin_cos();
    [[C64::new(c, -s), ZERO], [ZERO, C64::new(c, s)]]
}

/// Angles of the general single-qubit rotation `Rz(phi3)·Ry(phi2)·Rz(phi1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EulerAngles {
    pub phi1: f64,
    pub phi2: f64,
    pub phi3: f64,
}

impl EulerAngles {
    pub fn new(phi1: f64, phi2: f64, phi3: f64) -> Self {
        Self { phi1, phi2, phi3 }
    }

    /// All three angles set to the same value, as used by the noise encoding gate.
    pub fn uniform(x: f64) -> Self {
        Self::new(x, x, x)
    }
}

/// `Rz(phi3)·Ry(phi2)·Rz(phi1)` in closed form.
pub fn euler_gate(angles: EulerAngles) -> Mat2 {
    let (s, c) = (angles.phi2 / 2.0).sin_cos();
    let sum = (angles.phi1 + angles.phi3) / 2.0;
    let diff = (angles.phi1 - angles.phi3) / 2.0;
    [
        [C64::from_polar(c, -sum), C64::from_polar(-s, diff)],
        [C64::from_polar(s, -diff), C64::from_polar(c, sum)],
    ]
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntanglerTopology {
    /// CZ on (0,1), (1,2), …, (N−2, N−1), applied in that order.
    #[default]
    LinearCz,
}

impl fmt::Display for EntanglerTopology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EntanglerTopology::LinearCz => f.write_str("linear_cz"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<C64>,
}

impl StateVector {
    /// The computational basis state |0…0⟩.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::Config(format!(
                "n_qubits must be in 1..={MAX_QUBITS}, got {n_qubits}"
            )));
        }
        let mut amplitudes = vec![ZERO; 1 << n_qubits];
        amplitudes[0] = ONE;
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    /// Wraps amplitudes after checking the length is a power of two and the
    /// state is normalized within 1e-8.
    pub fn from_amplitudes(amplitudes: Vec<C64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(validation(format!(
                "amplitude count {len} is not a power of two ≥ 2"
            )));
        }
        let n_qubits = len.trailing_zeros() as usize;
        if n_qubits > MAX_QUBITS {
            return Err(Error::Config(format!("{n_qubits} qubits exceeds {MAX_QUBITS}")));
        }
        let state = Self {
            n_qubits,
            amplitudes,
        };
        let norm = state.norm_sqr();
        if !norm.is_finite() || (norm - 1.0).abs() > 1e-8 {
            return Err(validation(format!("state is not normalized (‖ψ‖² = {norm})")));
        }
        Ok(state)
    }

    pub(crate) fn from_raw(n_qubits: usize, amplitudes: Vec<C64>) -> Self {
        debug_assert_eq!(amplitudes.len(), 1 << n_qubits);
        Self {
            n_qubits,
            amplitudes,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Applies a 2×2 unitary to `qubit`. The matrix must be unitary within 1e-8.
    pub fn apply_single_qubit(&mut self, qubit: usize, matrix: &Mat2) -> Result<()> {
        if qubit >= self.n_qubits {
            return Err(Error::Index {
                index: qubit,
                len: self.n_qubits,
            });
        }
        let err = unitarity_error(matrix);
        if !(err <= 1e-8) {
            return Err(validation(format!(
                "matrix is not unitary (max |UU† − I| = {err:e})"
            )));
        }
        apply_mat2(&mut self.amplitudes, qubit, matrix);
        Ok(())
    }

    pub fn apply_cz(&mut self, a: usize, b: usize) -> Result<()> {
        for q in [a, b] {
            if q >= self.n_qubits {
                return Err(Error::Index {
                    index: q,
                    len: self.n_qubits,
                });
            }
        }
        if a == b {
            return Err(validation("CZ needs two distinct qubits"));
        }
        apply_cz(&mut self.amplitudes, a, b);
        Ok(())
    }

    /// Applies the entangling layer. Single-qubit states are left untouched.
    pub fn apply_entangler(&mut self, topology: EntanglerTopology) {
        apply_entangler(&mut self.amplitudes, self.n_qubits, topology);
    }

    pub fn overlap(&self, other: &StateVector) -> Result<C64> {
        overlap(self, other)
    }
}

pub fn zero_state(n_qubits: usize) -> Result<StateVector> {
    StateVector::zero(n_qubits)
}

pub(crate) fn apply_mat2(amps: &mut [C64], qubit: usize, m: &Mat2) {
    let stride = 1usize << qubit;
    let dim = amps.len();
    let mut base = 0;
    while base < dim {
        for i0 in base..base + stride {
            let i1 = i0 + stride;
            let a0 = amps[i0];
            let a1 = amps[i1];
            amps[i0] = m[0][0] * a0 + m[0][1] * a1;
            amps[i1] = m[1][0] * a0 + m[1][1] * a1;
        }
        base += 2 * stride;
    }
}

pub(crate) fn apply_cz(amps: &mut [C64], a: usize, b: usize) {
    let mask = (1usize << a) | (1usize << b);
    for (i, amp) in amps.iter_mut().enumerate() {
        if i & mask == mask {
            *amp = -*amp;
        }
    }
}

pub(crate) fn apply_entangler(amps: &mut [C64], n_qubits: usize, topology: EntanglerTopology) {
    match topology {
        EntanglerTopology::LinearCz => {
            // The chain contributes −1 once per adjacent pair of set bits.
            let valid = (1usize << n_qubits.saturating_sub(1)) - 1;
            for (i, amp) in amps.iter_mut().enumerate() {
                if (i & (i >> 1) & valid).count_ones() % 2 == 1 {
                    *amp = -*amp;
                }
            }
        }
    }
}

pub(crate) fn inner(a: &[C64], b: &[C64]) -> C64 {
    let mut re = 0.0;
    let mut im = 0.0;
    for (x, y) in a.iter().zip(b) {
        // conj(x)·y
        re += x.re * y.re + x.im * y.im;
        im += x.re * y.im - x.im * y.re;
    }
    C64::new(re, im)
}

/// `⟨a|b⟩ = Σ conj(a_k)·b_k`.
pub fn overlap(a: &StateVector, b: &StateVector) -> Result<C64> {
    if a.n_qubits != b.n_qubits {
        return Err(validation(format!(
            "overlap of {}-qubit and {}-qubit states",
            a.n_qubits, b.n_qubits
        )));
    }
    Ok(inner(&a.amplitudes, &b.amplitudes))
}

/// Simulated SWAP test: the ancilla reads 0 with probability
/// `(1 + |⟨a|b⟩|²)/2`; the returned value is `sqrt(max(0, 2·p̂0 − 1))`,
/// an estimate of `|⟨a|b⟩|`.
pub fn swap_test_estimate<R: Rng + ?Sized>(
    a: &StateVector,
    b: &StateVector,
    shots: u64,
    rng: &mut R,
) -> Result<f64> {
    if shots == 0 {
        return Err(validation("swap test needs at least one shot"));
    }
    let fidelity = overlap(a, b)?.norm_sqr().min(1.0);
    let p0 = swap_test_p0(fidelity);
    let zeros = Binomial::new(shots, p0)
        .map_err(|e| Error::Numerical(format!("binomial({shots}, {p0}): {e}")))?
        .sample(rng);
    let p0_hat = zeros as f64 / shots as f64;
    Ok((2.0 * p0_hat - 1.0).max(0.0).sqrt())
}

/// Probability of measuring the SWAP-test ancilla in |0⟩.
pub fn swap_test_p0(fidelity: f64) -> f64 {
    ((1.0 + fidelity) / 2.0).clamp(0.5, 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

/// Pauli string; the k-th letter acts on qubit k.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PauliString(Vec<Pauli>);

impl PauliString {
    pub fn new(letters: Vec<Pauli>) -> Self {
        Self(letters)
    }

    /// `op` on `site`, identity elsewhere.
    pub fn single(n_qubits: usize, site: usize, op: Pauli) -> Self {
        let mut letters = vec![Pauli::I; n_qubits];
        letters[site] = op;
        Self(letters)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.0
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c.to_ascii_uppercase() {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(validation(format!("invalid Pauli letter {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(PauliString)
    }
}

/// Real expectation `⟨ψ|P|ψ⟩` of a Pauli string.
pub fn pauli_expectation(state: &StateVector, op: &PauliString) -> Result<f64> {
    if op.len() != state.n_qubits {
        return Err(validation(format!(
            "Pauli string of length {} for {} qubits",
            op.len(),
            state.n_qubits
        )));
    }
    let mut flip = 0usize;
    let mut y_mask = 0usize;
    let mut z_mask = 0usize;
    for (k, p) in op.0.iter().enumerate() {
        match p {
            Pauli::I => {}
            Pauli::X => flip |= 1 << k,
            Pauli::Y => {
                flip |= 1 << k;
                y_mask |= 1 << k;
            }
            Pauli::Z => z_mask |= 1 << k,
        }
    }
    // Y = i·X·Z, so each Y contributes a factor i times a Z-type sign.
    let base_phase = match y_mask.count_ones() % 4 {
        0 => ONE,
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    };
    let sign_mask = y_mask | z_mask;
    let amps = state.amplitudes();
    let mut acc = ZERO;
    for (i, a) in amps.iter().enumerate() {
        let term = amps[i ^ flip].conj() * a;
        if (i & sign_mask).count_ones() % 2 == 1 {
            acc -= term;
        } else {
            acc += term;
        }
    }
    Ok((base_phase * acc).re)
}

/// One-qubit density matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityMatrix2x2 {
    entries: Mat2,
}

impl DensityMatrix2x2 {
    /// Checks hermiticity and unit trace within 1e-10 and eigenvalues in
    /// `[−1e-10, 1 + 1e-10]`.
    pub fn new(entries: Mat2) -> Result<Self> {
        let herm = (entries[0][1] - entries[1][0].conj())
            .norm()
            .max(entries[0][0].im.abs())
            .max(entries[1][1].im.abs());
        if !(herm <= 1e-10) {
            return Err(validation(format!("density matrix not Hermitian ({herm:e})")));
        }
        let trace = entries[0][0].re + entries[1][1].re;
        if !((trace - 1.0).abs() <= 1e-10) {
            return Err(validation(format!("density matrix trace {trace} ≠ 1")));
        }
        let rho = Self { entries };
        let (lo, hi) = rho.eigenvalues();
        if lo < -1e-10 || hi > 1.0 + 1e-10 {
            return Err(validation(format!(
                "density matrix eigenvalues ({lo}, {hi}) outside [0, 1]"
            )));
        }
        Ok(rho)
    }

    pub fn diag(p0: f64, p1: f64) -> Result<Self> {
        Self::new([[C64::new(p0, 0.0), ZERO], [ZERO, C64::new(p1, 0.0)]])
    }

    pub fn entries(&self) -> &Mat2 {
        &self.entries
    }

    /// Eigenvalues `(λ_min, λ_max)` from trace and determinant.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let m = &self.entries;
        let a = m[0][0].re;
        let d = m[1][1].re;
        let half_tr = (a + d) / 2.0;
        let half_diff = (a - d) / 2.0;
        // sqrt((tr/2)² − det) written without cancellation.
        let disc = (half_diff * half_diff + m[0][1].norm_sqr()).sqrt();
        (half_tr - disc, half_tr + disc)
    }
}

/// Partial trace of a two-qubit state over qubit 1.
pub fn reduced_density_qubit0(state: &StateVector) -> Result<DensityMatrix2x2> {
    if state.n_qubits != 2 {
        return Err(validation(format!(
            "reduced density of qubit 0 needs 2 qubits, got {}",
            state.n_qubits
        )));
    }
    Ok(DensityMatrix2x2 {
        entries: reduced_qubit0_entries(state.amplitudes()),
    })
}

pub(crate) fn reduced_qubit0_entries(amps: &[C64]) -> Mat2 {
    // index = b0 + 2·b1
    let mut rho = [[ZERO; 2]; 2];
    for b1 in 0..2 {
        for r in 0..2 {
            for c in 0..2 {
                rho[r][c] += amps[r + 2 * b1] * amps[c + 2 * b1].conj();
            }
        }
    }
    rho
}

/// `−Σ λ log2 λ` with `0·log2 0 = 0`.
pub fn entropy_from_eigenvalues(lo: f64, hi: f64) -> Result<f64> {
    let mut s = 0.0;
    for lambda in [lo, hi] {
        if !(-1e-8..=1.0 + 1e-8).contains(&lambda) {
            return Err(Error::Numerical(format!("eigenvalue {lambda} outside [0, 1]")));
        }
        let l = lambda.clamp(0.0, 1.0);
        if l > 0.0 {
            s -= l * l.log2();
        }
    }
    Ok(s.clamp(0.0, 1.0))
}

/// Von Neumann entropy (base 2) of a one-qubit density matrix.
pub fn entanglement_entropy(rho: &DensityMatrix2x2) -> Result<f64> {
    let (lo, hi) = rho.eigenvalues();
    entropy_from_eigenvalues(lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn zero_state_basics() {
        let s = zero_state(1).unwrap();
        assert_eq!(s.amplitudes(), &[ONE, ZERO]);
        let s = zero_state(2).unwrap();
        assert_eq!(s.amplitudes(), &[ONE, ZERO, ZERO, ZERO]);
        let s = zero_state(10).unwrap();
        assert_eq!(s.dim(), 1024);
        assert!((s.norm_sqr() - 1.0).abs() < 1e-15);
        assert!(matches!(zero_state(0), Err(Error::Config(_))));
        assert!(matches!(zero_state(21), Err(Error::Config(_))));
    }

    #[test]
    fn single_qubit_gates() {
        let mut s = zero_state(1).unwrap();
        s.apply_single_qubit(0, &PAULI_X).unwrap();
        assert_eq!(s.amplitudes(), &[ZERO, ONE]);

        let mut s = zero_state(3).unwrap();
        s.apply_single_qubit(1, &hadamard()).unwrap();
        let before = s.clone();
        s.apply_single_qubit(2, &IDENTITY).unwrap();
        assert_eq!(s, before);

        let mut s = zero_state(1).unwrap();
        s.apply_single_qubit(0, &hadamard()).unwrap();
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        assert!(close(s.amplitudes()[0], h, 1e-15));
        assert!(close(s.amplitudes()[1], h, 1e-15));
    }

    #[test]
    fn single_qubit_errors() {
        let mut s = zero_state(2).unwrap();
        assert!(matches!(
            s.apply_single_qubit(2, &PAULI_X),
            Err(Error::Index { index: 2, len: 2 })
        ));
        let bad = [[ONE, ONE], [ZERO, ONE]];
        assert!(matches!(s.apply_single_qubit(0, &bad), Err(Error::Validation(_))));
    }

    #[test]
    fn euler_gate_cases() {
        let id = euler_gate(EulerAngles::new(0.0, 0.0, 0.0));
        assert!(unitarity_error(&id) < 1e-15);
        for i in 0..2 {
            for j in 0..2 {
                assert!(close(id[i][j], IDENTITY[i][j], 1e-15));
            }
        }
        let g = euler_gate(EulerAngles::new(0.0, PI, 0.0));
        let mut s = zero_state(1).unwrap();
        s.apply_single_qubit(0, &g).unwrap();
        assert!(s.amplitudes()[0].norm() < 1e-15);
        assert!((s.amplitudes()[1].norm() - 1.0).abs() < 1e-15);

        // Closed form against the explicit product of the three rotations.
        let a = EulerAngles::new(PI / 2.0, PI / 2.0, PI / 2.0);
        let product = mat_mul(&rz(a.phi3), &mat_mul(&ry(a.phi2), &rz(a.phi1)));
        let closed = euler_gate(a);
        for i in 0..2 {
            for j in 0..2 {
                assert!(close(product[i][j], closed[i][j], 1e-14));
            }
        }
        // Hand-evaluated entries: Rz(π/2)Ry(π/2)Rz(π/2) = [[−i, −1], [1, i]]/√2.
        let r = FRAC_1_SQRT_2;
        let expected = [
            [C64::new(0.0, -r), C64::new(-r, 0.0)],
            [C64::new(r, 0.0), C64::new(0.0, r)],
        ];
        for i in 0..2 {
            for j in 0..2 {
                assert!(close(closed[i][j], expected[i][j], 1e-15));
            }
        }
    }

    #[test]
    fn cz_chain() {
        let mut s = zero_state(2).unwrap();
        s.apply_entangler(EntanglerTopology::LinearCz);
        assert_eq!(s.amplitudes(), &[ONE, ZERO, ZERO, ZERO]);

        let mut s = zero_state(2).unwrap();
        s.apply_single_qubit(0, &hadamard()).unwrap();
        s.apply_single_qubit(1, &hadamard()).unwrap();
        s.apply_entangler(EntanglerTopology::LinearCz);
        let expected = [0.5, 0.5, 0.5, -0.5];
        for (a, e) in s.amplitudes().iter().zip(expected) {
            assert!(close(*a, C64::new(e, 0.0), 1e-15));
        }

        let mut single = zero_state(1).unwrap();
        single.apply_single_qubit(0, &hadamard()).unwrap();
        let before = single.clone();
        single.apply_entangler(EntanglerTopology::LinearCz);
        assert_eq!(single, before);
    }

    #[test]
    fn overlaps() {
        let zero = zero_state(1).unwrap();
        let mut one = zero_state(1).unwrap();
        one.apply_single_qubit(0, &PAULI_X).unwrap();
        let mut plus = zero_state(1).unwrap();
        plus.apply_single_qubit(0, &hadamard()).unwrap();
        assert!(close(overlap(&plus, &plus).unwrap(), ONE, 1e-15));
        assert_eq!(overlap(&zero, &one).unwrap(), ZERO);
        assert!((overlap(&zero, &plus).unwrap().re - 0.70711).abs() < 1e-5);
        let two = zero_state(2).unwrap();
        assert!(matches!(overlap(&zero, &two), Err(Error::Validation(_))));
    }

    #[test]
    fn swap_test_cases() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let zero = zero_state(1).unwrap();
        let mut one = zero_state(1).unwrap();
        one.apply_single_qubit(0, &PAULI_X).unwrap();
        for shots in [1, 10, 1000] {
            assert_eq!(swap_test_estimate(&zero, &zero, shots, &mut rng).unwrap(), 1.0);
        }
        let est = swap_test_estimate(&zero, &one, 1_000_000, &mut rng).unwrap();
        assert!(est < 0.05, "{est}");
        assert!(matches!(
            swap_test_estimate(&zero, &one, 0, &mut rng),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn pauli_expectations() {
        let zero = zero_state(1).unwrap();
        assert_eq!(pauli_expectation(&zero, &"Z".parse().unwrap()).unwrap(), 1.0);
        let mut plus = zero_state(1).unwrap();
        plus.apply_single_qubit(0, &hadamard()).unwrap();
        assert!((pauli_expectation(&plus, &"X".parse().unwrap()).unwrap() - 1.0).abs() < 1e-15);
        for phi in [0.0, 0.3, 1.7, PI, 5.9] {
            let mut s = zero_state(1).unwrap();
            s.apply_single_qubit(0, &ry(phi)).unwrap();
            assert!(pauli_expectation(&s, &"Y".parse().unwrap()).unwrap().abs() < 1e-15);
        }
        // |+i⟩ = S|+⟩
        let mut plus_i = plus.clone();
        plus_i.apply_single_qubit(0, &rz(PI / 2.0)).unwrap();
        assert!((pauli_expectation(&plus_i, &"Y".parse().unwrap()).unwrap() - 1.0).abs() < 1e-14);

        assert!(matches!("XQ".parse::<PauliString>(), Err(Error::Validation(_))));
        assert!(matches!(
            pauli_expectation(&zero, &"XX".parse().unwrap()),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn pauli_product_sign() {
        // Bell state (|00⟩+|11⟩)/√2 has ⟨XX⟩ = 1, ⟨YY⟩ = −1, ⟨ZZ⟩ = 1.
        let h = FRAC_1_SQRT_2;
        let bell = StateVector::from_amplitudes(vec![
            C64::new(h, 0.0),
            ZERO,
            ZERO,
            C64::new(h, 0.0),
        ])
        .unwrap();
        let e = |s: &str| pauli_expectation(&bell, &s.parse().unwrap()).unwrap();
        assert!((e("XX") - 1.0).abs() < 1e-15);
        assert!((e("YY") + 1.0).abs() < 1e-15);
        assert!((e("ZZ") - 1.0).abs() < 1e-15);
        assert!(e("XI").abs() < 1e-15);
    }

    #[test]
    fn reduced_density_and_entropy() {
        let s = zero_state(2).unwrap();
        let rho = reduced_density_qubit0(&s).unwrap();
        assert_eq!(rho.eigenvalues(), (0.0, 1.0));
        assert_eq!(entanglement_entropy(&rho).unwrap(), 0.0);

        let h = FRAC_1_SQRT_2;
        let bell = StateVector::from_amplitudes(vec![
            C64::new(h, 0.0),
            ZERO,
            ZERO,
            C64::new(h, 0.0),
        ])
        .unwrap();
        let rho = reduced_density_qubit0(&bell).unwrap();
        assert!(close(rho.entries()[0][0], C64::new(0.5, 0.0), 1e-15));
        assert!(close(rho.entries()[1][1], C64::new(0.5, 0.0), 1e-15));
        assert!(rho.entries()[0][1].norm() < 1e-15);
        assert!((entanglement_entropy(&rho).unwrap() - 1.0).abs() < 1e-15);

        let schmidt = StateVector::from_amplitudes(vec![
            C64::new(0.9f64.sqrt(), 0.0),
            ZERO,
            ZERO,
            C64::new(0.1f64.sqrt(), 0.0),
        ])
        .unwrap();
        let rho = reduced_density_qubit0(&schmidt).unwrap();
        let (lo, hi) = rho.eigenvalues();
        assert!((lo - 0.1).abs() < 1e-15 && (hi - 0.9).abs() < 1e-15);
        let closed_form = -0.9 * 0.9f64.log2() - 0.1 * 0.1f64.log2();
        let s = entanglement_entropy(&rho).unwrap();
        assert!((s - closed_form).abs() < 1e-14);
        assert!((s - 0.46900).abs() < 1e-5);

        assert!(matches!(
            reduced_density_qubit0(&zero_state(3).unwrap()),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix2x2::diag(0.6, 0.6).is_err());
        assert!(DensityMatrix2x2::diag(1.2, -0.2).is_err());
        let non_herm = [[C64::new(0.5, 0.0), ONE], [ZERO, C64::new(0.5, 0.0)]];
        assert!(DensityMatrix2x2::new(non_herm).is_err());
        assert!(entropy_from_eigenvalues(-0.1, 1.1).is_err());
    }
}
