//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use macroent::{Gate, Site, StateVector, C64};
use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn pauli(axis: usize) -> DMatrix<C64> {
    let z = c(0.0, 0.0);
    let o = c(1.0, 0.0);
    match axis {
        0 => DMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        1 => DMatrix::from_row_slice(2, 2, &[z, c(0.0, -1.0), c(0.0, 1.0), z]),
        _ => DMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
    }
}

/// `σ_axis` on site `l` (1-based, site 1 leftmost in the Kronecker product).
pub fn embedded_pauli(n: usize, l: usize, axis: usize) -> DMatrix<C64> {
    let mut m = DMatrix::from_element(1, 1, c(1.0, 0.0));
    for s in 1..=n {
        let f = if s == l { pauli(axis) } else { DMatrix::identity(2, 2) };
        m = m.kronecker(&f);
    }
    m
}

/// VCM from the full density matrix `ρ = |ψ⟩⟨ψ|` and dense operator products.
pub fn density_matrix_vcm(amps: &[C64]) -> DMatrix<C64> {
    let dim = amps.len();
    let n = dim.trailing_zeros() as usize;
    let psi = DMatrix::from_column_slice(dim, 1, amps);
    let rho = &psi * psi.adjoint();
    let ops: Vec<DMatrix<C64>> = (1..=n)
        .flat_map(|l| (0..3).map(move |a| (l, a)))
        .map(|(l, a)| embedded_pauli(n, l, a))
        .collect();
    let mean: Vec<C64> = ops.iter().map(|o| (&rho * o).trace()).collect();
    DMatrix::from_fn(3 * n, 3 * n, |i, j| (&rho * &ops[i] * &ops[j]).trace() - mean[i] * mean[j])
}

/// Eigenvalues of a Hermitian matrix by cyclic Jacobi rotations on the real
/// embedding `[[Re, −Im], [Im, Re]]`; each eigenvalue appears twice there and
/// is returned once, in descending order.
pub fn jacobi_eigenvalues(h: &DMatrix<C64>) -> Vec<f64> {
    let n = h.nrows();
    let mut a = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let v = 0.5 * (h[(i, j)] + h[(j, i)].conj());
            a[(i, j)] = v.re;
            a[(i + n, j + n)] = v.re;
            a[(i, j + n)] = -v.im;
            a[(i + n, j)] = v.im;
        }
    }
    let m = 2 * n;
    for _sweep in 0..100 {
        let off: f64 = (0..m)
            .flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        if off < 1e-26 {
            break;
        }
        for p in 0..m {
            for q in p + 1..m {
                let apq = a[(p, q)];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let tau = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = t * cs;
                for k in 0..m {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = cs * akp - sn * akq;
                    a[(k, q)] = sn * akp + cs * akq;
                }
                for k in 0..m {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = cs * apk - sn * aqk;
                    a[(q, k)] = sn * apk + cs * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..m).map(|i| a[(i, i)]).collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    ev.into_iter().step_by(2).collect()
}

pub fn random_gate(rng: &mut ChaCha8Rng) -> Gate {
    let tau = std::f64::consts::TAU;
    Gate::from_euler(
        rng.random::<f64>() * tau,
        rng.random::<f64>() * tau,
        rng.random::<f64>() * tau,
        rng.random::<f64>() * tau,
    )
}

/// Random single-site rotations interleaved with controlled phases.
pub fn random_circuit(n: usize, depth: usize, rng: &mut ChaCha8Rng) -> StateVector {
    let mut s = StateVector::basis(n, 0).unwrap();
    for _ in 0..depth {
        let a = rng.random_range(1..=n);
        match rng.random_range(0..3) {
            0 => s.apply_gate(Site::new(a), &random_gate(rng)).unwrap(),
            1 => s.apply_gate(Site::new(a), &Gate::hadamard()).unwrap(),
            _ if n > 1 => {
                let mut b = rng.random_range(1..=n);
                while b == a {
                    b = rng.random_range(1..=n);
                }
                let angle = rng.random::<f64>() * std::f64::consts::TAU;
                s.apply_controlled_phase(Site::new(a), Site::new(b), angle).unwrap();
            }
            _ => {}
        }
    }
    s
}

/// `1 − |⟨a|b⟩|²` for normalized states.
pub fn overlap_deficit(a: &StateVector, b: &StateVector) -> f64 {
    1.0 - a.inner(b).unwrap().norm_sqr()
}
