//! Independent oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use qnoisegen::transport::CostMatrix;
use qnoisegen::{GeneratorConfig, ThetaTensor};

pub type C = Complex64;

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

pub fn rz(phi: f64) -> DMatrix<C> {
    DMatrix::from_row_slice(2, 2, &[C::from_polar(1.0, -phi / 2.0), c(0.0, 0.0), c(0.0, 0.0), C::from_polar(1.0, phi / 2.0)])
}

pub fn ry(phi: f64) -> DMatrix<C> {
    let (s, co) = (phi / 2.0).sin_cos();
    DMatrix::from_row_slice(2, 2, &[c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0)])
}

pub fn euler(p1: f64, p2: f64, p3: f64) -> DMatrix<C> {
    rz(p3) * ry(p2) * rz(p1)
}

/// `I ⊗ … ⊗ G ⊗ … ⊗ I` with qubit 0 the least significant index bit.
pub fn embed(gate: &DMatrix<C>, qubit: usize, n: usize) -> DMatrix<C> {
    let high = DMatrix::<C>::identity(1 << (n - 1 - qubit), 1 << (n - 1 - qubit));
    let low = DMatrix::<C>::identity(1 << qubit, 1 << qubit);
    high.kronecker(&gate.kronecker(&low))
}

pub fn cz_chain(n: usize) -> DMatrix<C> {
    let dim = 1 << n;
    let mut m = DMatrix::<C>::identity(dim, dim);
    for i in 0..dim {
        let pairs = (0..n.saturating_sub(1)).filter(|&q| (i >> q) & 1 == 1 && (i >> (q + 1)) & 1 == 1).count();
        if pairs % 2 == 1 {
            m[(i, i)] = c(-1.0, 0.0);
        }
    }
    m
}

pub fn circuit_unitary(config: &GeneratorConfig, theta: &ThetaTensor, x: f64) -> DMatrix<C> {
    let n = config.n_qubits;
    let mut u = DMatrix::<C>::identity(1 << n, 1 << n);
    for p in 0..config.reps {
        for q in 0..n {
            u = embed(&euler(x, x, x), q, n) * u;
            let a = theta.euler(p, q);
            u = embed(&euler(a.phi1, a.phi2, a.phi3), q, n) * u;
        }
        if n > 1 {
            u = cz_chain(n) * u;
        }
    }
    u
}


/// Minimum over all permutations by Heap's algorithm.
pub fn brute_force_assignment(cost: &CostMatrix) -> f64 {
    let n = cost.rows();
    let mut perm: Vec<usize> = (0..n).collect();
    let value = |p: &[usize]| p.iter().enumerate().map(|(i, &j)| cost.get(i, j)).sum::<f64>() / n as f64;
    let mut best = value(&perm);
    let mut c = vec![0usize; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            best = best.min(value(&perm));
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    best
}
