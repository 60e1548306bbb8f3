//! Shared helpers for unit tests. Oracles here stay independent of the
//! implementation paths they check: determinants and solves go through LU
//! with partial pivoting instead of the eigendecomposition.

use crate::linalg::{OrthoBasis, SymMatrix};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random orthonormal basis via Gram-Schmidt of a random frame.
pub fn random_orthobasis(rng: &mut ChaCha8Rng, dim: usize) -> OrthoBasis {
    loop {
        let frame: Vec<f64> = (0..dim * dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        if let Ok(b) = OrthoBasis::orthonormalize(dim, &frame) {
            return b;
        }
    }
}

/// Golden-section search for the minimum of `f` on `[lo, hi]`.
pub fn golden_section_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, rel_tol: f64) -> f64 {
    let phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - phi * (hi - lo);
    let mut d = lo + phi * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    while (hi - lo).abs() > rel_tol * (lo.abs() + hi.abs()).max(1e-300) {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + phi * (hi - lo);
            fd = f(d);
        }
    }
    0.5 * (lo + hi)
}

/// Random symmetric matrix with entries in `[-scale, scale]`.
pub fn random_symmetric(rng: &mut ChaCha8Rng, dim: usize, scale: f64) -> SymMatrix {
    let mut entries = vec![0.0; dim * dim];
    for i in 0..dim {
        for j in i..dim {
            let v = rng.random_range(-scale..scale);
            entries[i * dim + j] = v;
            entries[j * dim + i] = v;
        }
    }
    SymMatrix::new(dim, entries).unwrap()
}

pub fn unit_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-3 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// LU factorization with partial pivoting; returns (packed LU, pivots, sign).
fn lu_factor(entries: &[f64], dim: usize) -> (Vec<f64>, Vec<usize>, f64) {
    let mut a = entries.to_vec();
    let mut piv: Vec<usize> = (0..dim).collect();
    let mut sign = 1.0;
    for col in 0..dim {
        let mut best = col;
        for row in (col + 1)..dim {
            if a[row * dim + col].abs() > a[best * dim + col].abs() {
                best = row;
            }
        }
        if best != col {
            for j in 0..dim {
                a.swap(col * dim + j, best * dim + j);
            }
            piv.swap(col, best);
            sign = -sign;
        }
        let pivot = a[col * dim + col];
        if pivot == 0.0 {
            continue;
        }
        for row in (col + 1)..dim {
            let factor = a[row * dim + col] / pivot;
            a[row * dim + col] = factor;
            for j in (col + 1)..dim {
                a[row * dim + j] -= factor * a[col * dim + j];
            }
        }
    }
    (a, piv, sign)
}

/// `log det` via LU; panics if the determinant is not positive.
pub fn lu_log_det(entries: &[f64], dim: usize) -> f64 {
    let (lu, _, sign) = lu_factor(entries, dim);
    let mut log_abs = 0.0;
    let mut det_sign = sign;
    for i in 0..dim {
        let d = lu[i * dim + i];
        log_abs += d.abs().ln();
        if d < 0.0 {
            det_sign = -det_sign;
        }
    }
    assert!(det_sign > 0.0, "oracle needs a positive determinant");
    log_abs
}

/// Solves `A x = b` via LU with partial pivoting.
pub fn lu_solve(entries: &[f64], dim: usize, b: &[f64]) -> Vec<f64> {
    let (lu, piv, _) = lu_factor(entries, dim);
    let mut x: Vec<f64> = piv.iter().map(|&p| b[p]).collect();
    for i in 1..dim {
        for j in 0..i {
            x[i] -= lu[i * dim + j] * x[j];
        }
    }
    for i in (0..dim).rev() {
        for j in (i + 1)..dim {
            x[i] -= lu[i * dim + j] * x[j];
        }
        x[i] /= lu[i * dim + i];
    }
    x
}
