//! Seeded randomness. All stochastic code in the crate derives from a single
//! 64-bit seed; batch work derives per-trial sub-seeds so results do not
//! depend on execution order.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::matcore::ComplexMatrix;
use crate::tol::Tolerances;

pub type SeededRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derive an independent sub-seed for trial `index` of a batch.
pub fn sub_seed(seed: u64, index: u64) -> u64 {
    // SplitMix64 step; cheap and well-distributed.
    let mut z = seed
        .wrapping_add(0x9e3779b97f4a7c15u64.wrapping_mul(index.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

fn standard_normal(rng: &mut impl Rng) -> f64 {
    // Box-Muller.
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn complex_gaussian(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(standard_normal(rng), standard_normal(rng))
}

/// Complex Ginibre matrix (iid standard complex Gaussian entries).
pub fn random_gaussian_matrix(dim: usize, rng: &mut impl Rng) -> DMatrix<Complex64> {
    DMatrix::from_fn(dim, dim, |_, _| complex_gaussian(rng))
}

/// Haar-like random unitary: orthonormalize the columns of a seeded complex
/// Gaussian matrix by modified Gram-Schmidt.
pub fn random_unitary(dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
    loop {
        let mut m = random_gaussian_matrix(dim, rng);
        if let Some(u) = gram_schmidt(&mut m) {
            return ComplexMatrix::new(u).expect("orthonormalized matrix is valid");
        }
        // Retry on a (measure-zero) near-singular draw.
    }
}

fn gram_schmidt(m: &mut DMatrix<Complex64>) -> Option<DMatrix<Complex64>> {
    let n = m.nrows();
    for j in 0..n {
        for k in 0..j {
            let proj: Complex64 = m.column(k).dotc(&m.column(j));
            let col_k = m.column(k).clone_owned();
            let mut col_j = m.column_mut(j);
            col_j.axpy(-proj, &col_k, Complex64::new(1.0, 0.0));
        }
        // Second orthogonalization pass keeps residuals at rounding level.
        for k in 0..j {
            let proj: Complex64 = m.column(k).dotc(&m.column(j));
            let col_k = m.column(k).clone_owned();
            let mut col_j = m.column_mut(j);
            col_j.axpy(-proj, &col_k, Complex64::new(1.0, 0.0));
        }
        let norm = m.column(j).norm();
        if norm < 1e-12 {
            return None;
        }
        m.column_mut(j).unscale_mut(norm);
    }
    Some(m.clone())
}

/// Random Hermitian matrix with entries of order one.
pub fn random_hermitian(dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let g = random_gaussian_matrix(dim, rng);
    let h = (&g + g.adjoint()).scale(0.5);
    ComplexMatrix::new(h).expect("finite by construction")
}

/// Random density matrix `G G† / tr(G G†)` (Hilbert-Schmidt measure).
pub fn random_density(dim: usize, rng: &mut impl Rng, tol: &Tolerances) -> crate::matcore::DensityMatrix {
    let g = random_gaussian_matrix(dim, rng);
    let p = &g * g.adjoint();
    let tr: Complex64 = p.diagonal().iter().sum();
    let rho = p.unscale(tr.re);
    crate::matcore::DensityMatrix::from_matrix(
        ComplexMatrix::new(rho).expect("finite"),
        tol,
    )
    .expect("normalized Gram matrix is a density matrix")
}

/// Random pure state density matrix `|v><v|`.
pub fn random_pure_state(dim: usize, rng: &mut impl Rng, tol: &Tolerances) -> crate::matcore::DensityMatrix {
    let v = nalgebra::DVector::from_fn(dim, |_, _| complex_gaussian(rng));
    let v = v.clone().unscale(v.norm());
    let rho = &v * v.adjoint();
    crate::matcore::DensityMatrix::from_matrix(ComplexMatrix::new(rho).expect("finite"), tol)
        .expect("rank-one projector is a density matrix")
}

/// Random permutation of `0..n`.
pub fn random_permutation(n: usize, rng: &mut impl Rng) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        perm.swap(i, j);
    }
    perm
}

/// Random probability vector (flat Dirichlet).
pub fn random_weights(count: usize, rng: &mut impl Rng) -> Vec<f64> {
    let mut w: Vec<f64> = (0..count)
        .map(|_| -(rng.gen_range(f64::MIN_POSITIVE..1.0f64)).ln())
        .collect();
    let s: f64 = w.iter().sum();
    for x in &mut w {
        *x /= s;
    }
    w
}
