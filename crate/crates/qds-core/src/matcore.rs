//! Dense complex linear algebra: Hermitian eigendecomposition, spectral
//! calculus, traces and Schatten p-norms. Everything else in the crate is
//! built on these primitives.
//!
//! Matrices are square, dense, `Complex<f64>`, and serialize as
//! `{"dim": n, "entries": [[re, im], ...]}` row-major with exactly `n*n`
//! pairs.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{QdsError, Result};
use crate::tol::Tolerances;

/// Dense square complex matrix, the universal carrier for operators and
/// density matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    mat: DMatrix<Complex64>,
}

impl ComplexMatrix {
    /// Wrap a square nalgebra matrix, rejecting non-square shapes and
    /// non-finite entries.
    pub fn new(mat: DMatrix<Complex64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() || mat.nrows() == 0 {
            return Err(QdsError::InvalidMatrix(format!(
                "expected a non-empty square matrix, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        if mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(QdsError::InvalidMatrix("non-finite entry".into()));
        }
        Ok(Self { mat })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            mat: DMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            mat: DMatrix::zeros(dim, dim),
        }
    }

    /// Diagonal matrix from real entries.
    pub fn from_diagonal(diag: &[f64]) -> Self {
        let v = DVector::from_iterator(diag.len(), diag.iter().map(|&d| Complex64::new(d, 0.0)));
        Self {
            mat: DMatrix::from_diagonal(&v),
        }
    }

    /// Row-major construction from `(re, im)` pairs.
    pub fn from_pairs(dim: usize, pairs: &[(f64, f64)]) -> Result<Self> {
        if pairs.len() != dim * dim {
            return Err(QdsError::InvalidMatrix(format!(
                "expected {} entries, got {}",
                dim * dim,
                pairs.len()
            )));
        }
        let mat = DMatrix::from_iterator(
            dim,
            dim,
            // nalgebra fills column-major; transpose afterwards to honour
            // the row-major wire order.
            pairs.iter().map(|&(re, im)| Complex64::new(re, im)),
        )
        .transpose();
        Self::new(mat)
    }

    /// Row-major construction from real entries.
    pub fn from_real_rows(dim: usize, rows: &[f64]) -> Result<Self> {
        let pairs: Vec<(f64, f64)> = rows.iter().map(|&r| (r, 0.0)).collect();
        Self::from_pairs(dim, &pairs)
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn as_ref(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub fn into_inner(self) -> DMatrix<Complex64> {
        self.mat
    }

    pub fn adjoint(&self) -> Self {
        Self {
            mat: self.mat.adjoint(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self {
            mat: self.mat.transpose(),
        }
    }

    pub fn conjugate(&self) -> Self {
        Self {
            mat: self.mat.conjugate(),
        }
    }

    /// Largest singular value.
    pub fn operator_norm(&self) -> f64 {
        singular_values(&self.mat).first().copied().unwrap_or(0.0)
    }

    /// Frobenius norm.
    pub fn frobenius_norm(&self) -> f64 {
        self.mat.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.mat.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Hermiticity residual `‖a - a†‖_∞`.
    pub fn hermiticity_residual(&self) -> f64 {
        let d = &self.mat - self.mat.adjoint();
        singular_values(&d).first().copied().unwrap_or(0.0)
    }
}

/// Matrix trace, the finite-dimensional specialization of the algebra trace.
pub fn trace(a: &ComplexMatrix) -> Complex64 {
    a.as_ref().diagonal().iter().sum()
}

/// Singular values in non-increasing order.
pub fn singular_values(m: &DMatrix<Complex64>) -> Vec<f64> {
    let svd = m.clone().svd(false, false);
    let mut s: Vec<f64> = svd.singular_values.iter().cloned().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s
}

/// Schatten p-norm `(Σ sᵢᵖ)^{1/p}`; `p = ∞` is the operator norm and is
/// handled as a distinct branch, never as a limit.
pub fn schatten_norm(a: &ComplexMatrix, p: f64) -> Result<f64> {
    schatten_norm_of_singulars(&singular_values(a.as_ref()), p)
}

/// Same norm computed from precomputed singular values.
pub fn schatten_norm_of_singulars(s: &[f64], p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(QdsError::BadExponent(p));
    }
    if p.is_infinite() {
        return Ok(s.first().copied().unwrap_or(0.0));
    }
    if (p - 1.0).abs() < 1e-15 {
        return Ok(s.iter().sum());
    }
    // Scale out the largest singular value so large exponents do not
    // underflow to zero prematurely.
    let top = s.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return Ok(0.0);
    }
    let sum: f64 = s.iter().map(|&x| (x / top).powf(p)).sum();
    Ok(top * sum.powf(1.0 / p))
}

/// A matrix certified Hermitian within `hermitian_tol`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    base: ComplexMatrix,
}

impl HermitianMatrix {
    pub fn new(base: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        let residual = base.hermiticity_residual();
        if residual > tol.hermitian_tol {
            return Err(QdsError::NonHermitianInput {
                residual,
                tol: tol.hermitian_tol,
            });
        }
        Ok(Self { base })
    }

    /// Symmetrize `(a + a†)/2` first, then certify. Useful for results of
    /// long computations whose Hermiticity drifted at rounding level.
    pub fn symmetrized(a: &ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        let m = (a.as_ref() + a.as_ref().adjoint()).scale(0.5);
        Self::new(ComplexMatrix::new(m)?, tol)
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        Self {
            base: ComplexMatrix::from_diagonal(diag),
        }
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn base(&self) -> &ComplexMatrix {
        &self.base
    }

    pub fn into_base(self) -> ComplexMatrix {
        self.base
    }
}

/// A Hermitian matrix that is positive semidefinite within `psd_tol` and has
/// unit trace within `trace_tol`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    base: HermitianMatrix,
}

impl DensityMatrix {
    pub fn new(base: HermitianMatrix, tol: &Tolerances) -> Result<Self> {
        let spec = eig_hermitian(&base)?;
        let min_eig = spec.eigenvalues.last().copied().unwrap_or(0.0);
        if min_eig < -tol.psd_tol {
            return Err(QdsError::NotDensity(format!(
                "smallest eigenvalue {min_eig:e} below -psd_tol"
            )));
        }
        let tr = trace(base.base());
        if (tr.re - 1.0).abs() > tol.trace_tol || tr.im.abs() > tol.trace_tol {
            return Err(QdsError::NotDensity(format!("trace {tr} is not 1")));
        }
        Ok(Self { base })
    }

    pub fn from_matrix(a: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        Self::new(HermitianMatrix::new(a, tol)?, tol)
    }

    /// Diagonal density matrix from a probability vector.
    pub fn from_probabilities(probs: &[f64], tol: &Tolerances) -> Result<Self> {
        Self::new(HermitianMatrix::from_diagonal(probs), tol)
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn hermitian(&self) -> &HermitianMatrix {
        &self.base
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.base.base()
    }
}

/// Eigendecomposition of a Hermitian matrix: real eigenvalues sorted
/// non-increasing, orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl Spectrum {
    /// Rebuild `V diag(λ) V†`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let v = self.eigenvectors.as_ref();
        let d = DMatrix::from_diagonal(&DVector::from_iterator(
            self.eigenvalues.len(),
            self.eigenvalues.iter().map(|&l| Complex64::new(l, 0.0)),
        ));
        ComplexMatrix { mat: v * d * v.adjoint() }
    }
}

/// Hermitian eigendecomposition with eigenvalues sorted non-increasing.
///
/// Eigenvector columns for degenerate eigenvalues are an arbitrary
/// orthonormal basis of the eigenspace; callers must not depend on the
/// particular choice.
pub fn eig_hermitian(a: &HermitianMatrix) -> Result<Spectrum> {
    let eig = nalgebra::linalg::SymmetricEigen::new(a.base().as_ref().clone());
    let (raw_values, raw_vectors) = if eig.eigenvalues.iter().any(|l| !l.is_finite()) {
        // The QR iteration occasionally fails to converge on structured
        // matrices (e.g. Choi matrices of shift-type channels); cyclic
        // Jacobi is slower but unconditionally convergent.
        jacobi_hermitian(a.base().as_ref())
    } else {
        (
            eig.eigenvalues.iter().cloned().collect::<Vec<f64>>(),
            eig.eigenvectors,
        )
    };
    let n = a.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| raw_values[j].partial_cmp(&raw_values[i]).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&i| raw_values[i]).collect();
    let mut vecs = DMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        vecs.set_column(col, &raw_vectors.column(i));
    }
    Ok(Spectrum {
        eigenvalues,
        eigenvectors: ComplexMatrix { mat: vecs },
    })
}

/// Cyclic Jacobi eigendecomposition for Hermitian matrices. Returns
/// unordered eigenvalues and the matching eigenvector columns.
fn jacobi_hermitian(a: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let n = a.nrows();
    let mut m = a.clone();
    let mut v = DMatrix::<Complex64>::identity(n, n);
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
    for _sweep in 0..60 {
        let off: f64 = (0..n)
            .flat_map(|p| (0..p).map(move |q| (p, q)))
            .map(|(p, q)| m[(p, q)].norm_sqr())
            .sum();
        if off.sqrt() <= 1e-15 * scale * n as f64 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq.norm() <= 1e-300 {
                    continue;
                }
                // Unitary 2×2 rotation diagonalizing the (p,q) block:
                // phase e^{iφ} = apq/|apq|, angle from the real symmetric
                // reduction tan(2θ) = 2|apq| / (app − aqq).
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let abs = apq.norm();
                let phase = apq.unscale(abs);
                let theta = 0.5 * (2.0 * abs).atan2(app - aqq);
                let c = Complex64::new(theta.cos(), 0.0);
                let s = phase * theta.sin();
                // Columns: [cp; cq] -> [c·cp + s̄·cq ; −s·cp + c·cq].
                for r in 0..n {
                    let mp = m[(r, p)];
                    let mq = m[(r, q)];
                    m[(r, p)] = mp * c + mq * s.conj();
                    m[(r, q)] = -mp * s + mq * c;
                    let vp = v[(r, p)];
                    let vq = v[(r, q)];
                    v[(r, p)] = vp * c + vq * s.conj();
                    v[(r, q)] = -vp * s + vq * c;
                }
                for r in 0..n {
                    let mp = m[(p, r)];
                    let mq = m[(q, r)];
                    m[(p, r)] = mp * c.conj() + mq * s;
                    m[(q, r)] = -mp * s.conj() + mq * c.conj();
                }
            }
        }
    }
    let values = (0..n).map(|i| m[(i, i)].re).collect();
    (values, v)
}

/// Spectral calculus `f(a) = V diag(f(λ)) V†` for a real scalar function.
///
/// `domain` rejects eigenvalues the function is not defined on; pass
/// `|_| true` for globally defined functions.
pub fn spectral_apply(
    a: &HermitianMatrix,
    f: impl Fn(f64) -> f64,
    domain: impl Fn(f64) -> bool,
    tol: &Tolerances,
) -> Result<HermitianMatrix> {
    let spec = eig_hermitian(a)?;
    for &l in &spec.eigenvalues {
        if !domain(l) {
            return Err(QdsError::DomainError(l));
        }
    }
    let mapped = Spectrum {
        eigenvalues: spec.eigenvalues.iter().map(|&l| f(l)).collect(),
        eigenvectors: spec.eigenvectors,
    };
    HermitianMatrix::symmetrized(&mapped.reconstruct(), tol)
}

// ---------------------------------------------------------------------------
// JSON wire format
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct MatrixWire {
    dim: usize,
    entries: Vec<[f64; 2]>,
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let n = self.dim();
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let z = self.mat[(i, j)];
                entries.push([z.re, z.im]);
            }
        }
        MatrixWire { dim: n, entries }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let wire = MatrixWire::deserialize(deserializer)?;
        let pairs: Vec<(f64, f64)> = wire.entries.iter().map(|e| (e[0], e[1])).collect();
        ComplexMatrix::from_pairs(wire.dim, &pairs).map_err(D::Error::custom)
    }
}

// ---------------------------------------------------------------------------
