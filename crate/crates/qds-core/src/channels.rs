//! Channel representations (Kraus, Choi, superoperator), conversions between
//! them, QDS certification, and the example channel zoo.
//!
//! Conventions, fixed crate-wide:
//! - Kraus action `Φ(x) = Σ Aᵢ x Aᵢ†`; trace-preserving means `Σ Aᵢ†Aᵢ = 1`,
//!   unital means `Σ AᵢAᵢ† = 1`.
//! - Vectorization is column-stacking, so `superop(Ad_u) = conj(u) ⊗ u`.
//! - The Choi matrix is unnormalized: `C = Σᵢⱼ Eᵢⱼ ⊗ Φ(Eᵢⱼ)`, with
//!   `tr C = dim` for trace-preserving maps.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QdsError, Result};
use crate::matcore::{singular_values, ComplexMatrix, HermitianMatrix};
use crate::tol::Tolerances;

/// Column-stacking vectorization.
pub fn vec_matrix(x: &ComplexMatrix) -> DVector<Complex64> {
    let n = x.dim();
    DVector::from_fn(n * n, |idx, _| x.as_ref()[(idx % n, idx / n)])
}

/// Inverse of [`vec_matrix`].
pub fn unvec_matrix(v: &DVector<Complex64>, n: usize) -> ComplexMatrix {
    ComplexMatrix::new(DMatrix::from_fn(n, n, |i, j| v[j * n + i])).expect("finite")
}

/// Kraus representation of a channel.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KrausSet {
    pub dim: usize,
    pub operators: Vec<ComplexMatrix>,
}

impl KrausSet {
    pub fn new(operators: Vec<ComplexMatrix>) -> Result<Self> {
        let dim = operators
            .first()
            .ok_or_else(|| QdsError::BadParameter("empty Kraus set".into()))?
            .dim();
        for op in &operators {
            if op.dim() != dim {
                return Err(QdsError::DimensionMismatch {
                    expected: dim,
                    got: op.dim(),
                });
            }
        }
        Ok(Self { dim, operators })
    }

    /// `‖Σ Aᵢ†Aᵢ − 1‖_∞`, the trace-preservation residual.
    pub fn tp_residual(&self) -> f64 {
        let mut acc = DMatrix::<Complex64>::zeros(self.dim, self.dim);
        for a in &self.operators {
            acc += a.as_ref().adjoint() * a.as_ref();
        }
        acc -= DMatrix::<Complex64>::identity(self.dim, self.dim);
        singular_values(&acc).first().copied().unwrap_or(0.0)
    }

    /// `‖Σ AᵢAᵢ† − 1‖_∞`, the unitality residual.
    pub fn unital_residual(&self) -> f64 {
        let mut acc = DMatrix::<Complex64>::zeros(self.dim, self.dim);
        for a in &self.operators {
            acc += a.as_ref() * a.as_ref().adjoint();
        }
        acc -= DMatrix::<Complex64>::identity(self.dim, self.dim);
        singular_values(&acc).first().copied().unwrap_or(0.0)
    }
}

/// Choi matrix `Σᵢⱼ Eᵢⱼ ⊗ Φ(Eᵢⱼ)` of a channel on `M_dim`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChoiMatrix {
    pub dim: usize,
    pub matrix: ComplexMatrix,
}

impl ChoiMatrix {
    pub fn new(dim: usize, matrix: ComplexMatrix) -> Result<Self> {
        if matrix.dim() != dim * dim {
            return Err(QdsError::DimensionMismatch {
                expected: dim * dim,
                got: matrix.dim(),
            });
        }
        Ok(Self { dim, matrix })
    }

    /// Eigenvalues of the Hermitian part, non-increasing.
    pub fn eigenvalues(&self, tol: &Tolerances) -> Vec<f64> {
        let h = HermitianMatrix::symmetrized(&self.matrix, &loose_hermitian(tol))
            .expect("symmetrized matrix is Hermitian");
        crate::matcore::eig_hermitian(&h)
            .expect("Hermitian input")
            .eigenvalues
    }

    pub fn min_eigenvalue(&self, tol: &Tolerances) -> f64 {
        self.eigenvalues(tol).last().copied().unwrap_or(0.0)
    }
}

fn loose_hermitian(tol: &Tolerances) -> Tolerances {
    // Symmetrization always succeeds; keep the caller's other tolerances.
    let mut t = tol.clone();
    t.hermitian_tol = f64::INFINITY;
    t
}

/// Superoperator matrix acting on column-stacked operators.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuperopMatrix {
    pub dim: usize,
    pub matrix: ComplexMatrix,
}

impl SuperopMatrix {
    pub fn new(dim: usize, matrix: ComplexMatrix) -> Result<Self> {
        if matrix.dim() != dim * dim {
            return Err(QdsError::DimensionMismatch {
                expected: dim * dim,
                got: matrix.dim(),
            });
        }
        Ok(Self { dim, matrix })
    }

    pub fn apply(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if x.dim() != self.dim {
            return Err(QdsError::DimensionMismatch {
                expected: self.dim,
                got: x.dim(),
            });
        }
        let v = self.matrix.as_ref() * vec_matrix(x);
        Ok(unvec_matrix(&v, self.dim))
    }
}

/// Certification record for the QDS axioms.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QdsReport {
    pub tp_residual: f64,
    pub unital_residual: f64,
    pub choi_min_eig: f64,
    pub is_qds: bool,
}

/// Provenance of a channel, carried through JSON round trips.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct ChannelMeta {
    pub name: String,
    #[serde(default)]
    pub params: serde_json::Value,
}

#[derive(Debug, Clone)]
pub enum ChannelRepr {
    Kraus(KrausSet),
    Choi(ChoiMatrix),
    Superop(SuperopMatrix),
}

/// A QDS-candidate map in one of three interconvertible representations.
/// Immutable after construction.
#[derive(Debug, Clone)]
pub struct Channel {
    dim: usize,
    repr: ChannelRepr,
    meta: ChannelMeta,
}

impl Channel {
    pub fn from_kraus(k: KrausSet, meta: ChannelMeta) -> Self {
        Self {
            dim: k.dim,
            repr: ChannelRepr::Kraus(k),
            meta,
        }
    }

    pub fn from_choi(c: ChoiMatrix, meta: ChannelMeta) -> Self {
        Self {
            dim: c.dim,
            repr: ChannelRepr::Choi(c),
            meta,
        }
    }

    pub fn from_superop(s: SuperopMatrix, meta: ChannelMeta) -> Self {
        Self {
            dim: s.dim,
            repr: ChannelRepr::Superop(s),
            meta,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn meta(&self) -> &ChannelMeta {
        &self.meta
    }

    pub fn repr(&self) -> &ChannelRepr {
        &self.repr
    }

    /// Apply the channel to a matrix.
    pub fn apply(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if x.dim() != self.dim {
            return Err(QdsError::DimensionMismatch {
                expected: self.dim,
                got: x.dim(),
            });
        }
        match &self.repr {
            ChannelRepr::Kraus(k) => {
                let mut acc = DMatrix::<Complex64>::zeros(self.dim, self.dim);
                for a in &k.operators {
                    acc += a.as_ref() * x.as_ref() * a.as_ref().adjoint();
                }
                ComplexMatrix::new(acc)
            }
            ChannelRepr::Superop(s) => s.apply(x),
            ChannelRepr::Choi(_) => self.to_superop().apply(x),
        }
    }

    /// Adjoint with respect to the trace pairing `tr(y Φ(x)) = tr(Φ*(y) x)`.
    /// For a Kraus channel with operators `{Aᵢ}` this is the channel with
    /// operators `{Aᵢ†}`; in superoperator form it is the conjugate
    /// transpose.
    pub fn adjoint(&self) -> Channel {
        let meta = ChannelMeta {
            name: format!("adjoint({})", self.meta.name),
            params: self.meta.params.clone(),
        };
        match &self.repr {
            ChannelRepr::Kraus(k) => {
                let ops = k.operators.iter().map(|a| a.adjoint()).collect();
                Channel::from_kraus(KrausSet::new(ops).expect("same dims"), meta)
            }
            _ => {
                let s = self.to_superop();
                Channel::from_superop(
                    SuperopMatrix::new(self.dim, s.matrix.adjoint()).expect("same size"),
                    meta,
                )
            }
        }
    }

    /// Superoperator matrix of the channel.
    pub fn to_superop(&self) -> SuperopMatrix {
        match &self.repr {
            ChannelRepr::Superop(s) => s.clone(),
            ChannelRepr::Kraus(k) => kraus_to_superop(k),
            ChannelRepr::Choi(c) => choi_to_superop(c),
        }
    }

    /// Choi matrix of the channel.
    pub fn to_choi(&self) -> ChoiMatrix {
        match &self.repr {
            ChannelRepr::Choi(c) => c.clone(),
            ChannelRepr::Kraus(k) => kraus_to_choi(k),
            ChannelRepr::Superop(s) => superop_to_choi(s),
        }
    }

    /// Kraus operators, extracted through the Choi eigendecomposition if the
    /// channel is not already in Kraus form.
    pub fn to_kraus(&self, tol: &Tolerances) -> Result<KrausSet> {
        match &self.repr {
            ChannelRepr::Kraus(k) => Ok(k.clone()),
            _ => choi_to_kraus(&self.to_choi(), tol),
        }
    }

    /// Certify the QDS axioms: trace preservation, unitality and complete
    /// positivity. Always produces a report.
    pub fn certify(&self, tol: &Tolerances) -> QdsReport {
        let id = ComplexMatrix::identity(self.dim);
        let unital_residual = {
            let out = self.apply(&id).expect("dims match");
            let diff = ComplexMatrix::new(out.as_ref() - id.as_ref()).expect("finite");
            diff.operator_norm()
        };
        let tp_residual = match &self.repr {
            ChannelRepr::Kraus(k) => k.tp_residual(),
            _ => {
                let adj = self.adjoint();
                let out = adj.apply(&id).expect("dims match");
                let diff = ComplexMatrix::new(out.as_ref() - id.as_ref()).expect("finite");
                diff.operator_norm()
            }
        };
        let choi_min_eig = self.to_choi().min_eigenvalue(tol);
        QdsReport {
            tp_residual,
            unital_residual,
            choi_min_eig,
            is_qds: tp_residual <= tol.tp_tol
                && unital_residual <= tol.un_tol
                && choi_min_eig >= -tol.psd_tol,
        }
    }

    /// Heuristic positivity probe: applies the channel to random pure states
    /// and checks the output spectrum. A pass is evidence, not a proof, of
    /// positivity (unlike the Choi criterion for complete positivity).
    pub fn positivity_probe(&self, trials: usize, seed: u64, tol: &Tolerances) -> bool {
        let mut rng = crate::rng::rng_from_seed(seed);
        for _ in 0..trials {
            let rho = crate::rng::random_pure_state(self.dim, &mut rng, tol);
            let out = self.apply(rho.matrix()).expect("dims match");
            let h = HermitianMatrix::symmetrized(&out, tol).expect("symmetrized");
            let spec = crate::matcore::eig_hermitian(&h).expect("hermitian");
            if spec.eigenvalues.last().copied().unwrap_or(0.0) < -tol.psd_tol {
                return false;
            }
        }
        true
    }
}

// ---------------------------------------------------------------------------
// Representation conversions
// ---------------------------------------------------------------------------

pub fn kraus_to_superop(k: &KrausSet) -> SuperopMatrix {
    let n = k.dim;
    let mut s = DMatrix::<Complex64>::zeros(n * n, n * n);
    for a in &k.operators {
        s += a.conjugate().as_ref().kronecker(a.as_ref());
    }
    SuperopMatrix::new(n, ComplexMatrix::new(s).expect("finite")).expect("size n^2")
}

pub fn kraus_to_choi(k: &KrausSet) -> ChoiMatrix {
    let n = k.dim;
    let mut c = DMatrix::<Complex64>::zeros(n * n, n * n);
    for a in &k.operators {
        let v = vec_matrix(a);
        c += &v * v.adjoint();
    }
    ChoiMatrix::new(n, ComplexMatrix::new(c).expect("finite")).expect("size n^2")
}

/// Reshuffle between Choi and superoperator matrices (an involution).
fn reshuffle(m: &ComplexMatrix, n: usize) -> ComplexMatrix {
    let src = m.as_ref();
    ComplexMatrix::new(DMatrix::from_fn(n * n, n * n, |r, c| {
        src[((c % n) * n + r % n, (c / n) * n + r / n)]
    }))
    .expect("finite")
}

pub fn choi_to_superop(c: &ChoiMatrix) -> SuperopMatrix {
    SuperopMatrix::new(c.dim, reshuffle(&c.matrix, c.dim)).expect("size n^2")
}

pub fn superop_to_choi(s: &SuperopMatrix) -> ChoiMatrix {
    ChoiMatrix::new(s.dim, reshuffle(&s.matrix, s.dim)).expect("size n^2")
}

/// Extract Kraus operators from a PSD Choi matrix via its eigendecomposition,
/// discarding eigenvalues below `psd_tol` and rejecting Choi matrices with an
/// eigenvalue below `-psd_tol`.
pub fn choi_to_kraus(c: &ChoiMatrix, tol: &Tolerances) -> Result<KrausSet> {
    let h = HermitianMatrix::symmetrized(&c.matrix, &loose_hermitian(tol))?;
    let spec = crate::matcore::eig_hermitian(&h)?;
    let min_eig = spec.eigenvalues.last().copied().unwrap_or(0.0);
    if min_eig < -tol.psd_tol {
        return Err(QdsError::NotCompletelyPositive(min_eig));
    }
    let n = c.dim;
    let mut ops = Vec::new();
    for (idx, &lam) in spec.eigenvalues.iter().enumerate() {
        if lam <= tol.psd_tol {
            continue;
        }
        let col = spec.eigenvectors.as_ref().column(idx).clone_owned();
        let a = unvec_matrix(&col.scale(lam.sqrt()), n);
        ops.push(a);
    }
    if ops.is_empty() {
        // Zero map; keep a single zero operator so the set is non-empty.
        ops.push(ComplexMatrix::zeros(n));
    }
    KrausSet::new(ops)
}

// ---------------------------------------------------------------------------
// Channel zoo
// ---------------------------------------------------------------------------

fn meta(name: &str, params: serde_json::Value) -> ChannelMeta {
    ChannelMeta {
        name: name.to_string(),
        params,
    }
}

/// Identity channel on `M_n`.
pub fn identity_channel(n: usize) -> Channel {
    Channel::from_kraus(
        KrausSet::new(vec![ComplexMatrix::identity(n)]).expect("non-empty"),
        meta("identity", serde_json::json!({ "n": n })),
    )
}

/// Depolarizing channel `Φ_t(x) = t x + (1−t) tr(x)/n · 1`.
pub fn depolarizing(t: f64, n: usize) -> Result<Channel> {
    if !(0.0..=1.0).contains(&t) {
        return Err(QdsError::BadParameter(format!(
            "depolarizing parameter t={t} outside [0,1]"
        )));
    }
    let id_vec = vec_matrix(&ComplexMatrix::identity(n));
    let mut s = DMatrix::<Complex64>::identity(n * n, n * n).scale(t);
    let outer = (&id_vec * id_vec.transpose()).scale((1.0 - t) / n as f64);
    s += outer;
    Ok(Channel::from_superop(
        SuperopMatrix::new(n, ComplexMatrix::new(s)?)?,
        meta("depolarizing", serde_json::json!({ "t": t, "n": n })),
    ))
}

/// Pinching channel mapping a matrix to its diagonal in the standard basis.
pub fn pinching(n: usize) -> Channel {
    let ops = (0..n)
        .map(|k| {
            let mut m = DMatrix::<Complex64>::zeros(n, n);
            m[(k, k)] = Complex64::new(1.0, 0.0);
            ComplexMatrix::new(m).expect("finite")
        })
        .collect();
    Channel::from_kraus(
        KrausSet::new(ops).expect("non-empty"),
        meta("pinching", serde_json::json!({ "n": n })),
    )
}

/// Unitary conjugation `x ↦ u x u†`.
pub fn unitary_conjugation(u: ComplexMatrix, tol: &Tolerances) -> Result<Channel> {
    check_unitary(&u, tol)?;
    let n = u.dim();
    Ok(Channel::from_kraus(
        KrausSet::new(vec![u])?,
        meta("unitary_conjugation", serde_json::json!({ "n": n })),
    ))
}

fn check_unitary(u: &ComplexMatrix, tol: &Tolerances) -> Result<()> {
    let prod = u.as_ref().adjoint() * u.as_ref();
    let id = DMatrix::<Complex64>::identity(u.dim(), u.dim());
    let res = singular_values(&(prod - id)).first().copied().unwrap_or(0.0);
    if res > tol.orth_tol {
        return Err(QdsError::BadParameter(format!(
            "matrix is not unitary: residual {res:e}"
        )));
    }
    Ok(())
}

/// Mixed-unitary channel `x ↦ Σ wₖ Uₖ x Uₖ†`.
pub fn mixed_unitary(
    weights: &[f64],
    unitaries: Vec<ComplexMatrix>,
    tol: &Tolerances,
) -> Result<Channel> {
    if weights.len() != unitaries.len() || weights.is_empty() {
        return Err(QdsError::BadParameter(
            "weights and unitaries must be non-empty and of equal length".into(),
        ));
    }
    if weights.iter().any(|&w| w < -1e-12) {
        return Err(QdsError::BadParameter("negative weight".into()));
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(QdsError::BadParameter(format!(
            "weights sum to {sum}, expected 1"
        )));
    }
    for u in &unitaries {
        check_unitary(u, tol)?;
    }
    let ops = weights
        .iter()
        .zip(unitaries)
        .map(|(&w, u)| {
            ComplexMatrix::new(u.as_ref().scale(w.max(0.0).sqrt())).expect("finite")
        })
        .collect();
    Ok(Channel::from_kraus(
        KrausSet::new(ops)?,
        meta("mixed_unitary", serde_json::json!({ "count": weights.len() })),
    ))
}

/// Truncated shift-average `Φ(x) = (x + S x S†)/2` with `S` the N×N
/// truncated unilateral shift. Not exactly trace-preserving: the truncation
/// leaks at the boundary (residual 1/2 at the corner); the certification
/// report carries the exact residual instead of renormalizing.
pub fn shift_average(n: usize) -> Result<Channel> {
    if n < 2 {
        return Err(QdsError::BadParameter(format!(
            "shift_average needs N >= 2, got {n}"
        )));
    }
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let id = ComplexMatrix::new(
        DMatrix::<Complex64>::identity(n, n).scale(inv_sqrt2),
    )?;
    let mut s = DMatrix::<Complex64>::zeros(n, n);
    for k in 0..n - 1 {
        s[(k + 1, k)] = Complex64::new(inv_sqrt2, 0.0);
    }
    Ok(Channel::from_kraus(
        KrausSet::new(vec![id, ComplexMatrix::new(s)?])?,
        meta("shift_average", serde_json::json!({ "N": n })),
    ))
}

/// Damped pinching `Φ(x) = Σₖ cₖ x_{kk} E_{kk}` with damping weights
/// `0 ≤ cₖ ≤ 1`. Intentionally non-unital (and non-trace-preserving) unless
/// every weight is 1.
pub fn damped_pinching(weights: &[f64], n: usize) -> Result<Channel> {
    if weights.len() != n {
        return Err(QdsError::BadParameter(format!(
            "need {n} damping weights, got {}",
            weights.len()
        )));
    }
    if weights.iter().any(|&c| !(0.0..=1.0).contains(&c)) {
        return Err(QdsError::BadParameter(
            "damping weights must lie in [0,1]".into(),
        ));
    }
    let ops = weights
        .iter()
        .enumerate()
        .map(|(k, &c)| {
            let mut m = DMatrix::<Complex64>::zeros(n, n);
            m[(k, k)] = Complex64::new(c.sqrt(), 0.0);
            ComplexMatrix::new(m).expect("finite")
        })
        .collect();
    Ok(Channel::from_kraus(
        KrausSet::new(ops)?,
        meta("damped_pinching", serde_json::json!({ "N": n })),
    ))
}

/// Damped pinching with the geometric weights `c_k = 2^{-k}`, `k = 1..N`.
pub fn damped_pinching_geometric(n: usize) -> Result<Channel> {
    let weights: Vec<f64> = (1..=n as i32).map(|k| 2f64.powi(-k)).collect();
    damped_pinching(&weights, n)
}

/// Permutation unitary with `P e_j = e_{π(j)}`.
pub fn permutation_matrix(perm: &[usize]) -> ComplexMatrix {
    let n = perm.len();
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for (j, &i) in perm.iter().enumerate() {
        m[(i, j)] = Complex64::new(1.0, 0.0);
    }
    ComplexMatrix::new(m).expect("finite")
}

/// Seeded random mixed-unitary QDS channel with `count` unitaries.
pub fn random_mixed_unitary(
    dim: usize,
    count: usize,
    rng: &mut impl rand::Rng,
    tol: &Tolerances,
) -> Channel {
    let weights = crate::rng::random_weights(count, rng);
    let unitaries: Vec<ComplexMatrix> = (0..count)
        .map(|_| crate::rng::random_unitary(dim, rng))
        .collect();
    mixed_unitary(&weights, unitaries, tol).expect("valid by construction")
}

// ---------------------------------------------------------------------------
// JSON wire format
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct ChannelWire {
    dim: usize,
    repr: String,
    data: serde_json::Value,
    #[serde(default)]
    meta: ChannelMeta,
}

impl Serialize for Channel {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::Error;
        let (repr, data) = match &self.repr {
            ChannelRepr::Kraus(k) => (
                "kraus",
                serde_json::to_value(&k.operators).map_err(S::Error::custom)?,
            ),
            ChannelRepr::Choi(c) => (
                "choi",
                serde_json::to_value(&c.matrix).map_err(S::Error::custom)?,
            ),
            ChannelRepr::Superop(s) => (
                "superop",
                serde_json::to_value(&s.matrix).map_err(S::Error::custom)?,
            ),
        };
        ChannelWire {
            dim: self.dim,
            repr: repr.to_string(),
            data,
            meta: self.meta.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Channel {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error;
        let wire = ChannelWire::deserialize(deserializer)?;
        let repr = match wire.repr.as_str() {
            "kraus" => {
                let ops: Vec<ComplexMatrix> =
                    serde_json::from_value(wire.data).map_err(D::Error::custom)?;
                let k = KrausSet::new(ops).map_err(D::Error::custom)?;
                if k.dim != wire.dim {
                    return Err(D::Error::custom("Kraus operator dim differs from header"));
                }
                ChannelRepr::Kraus(k)
            }
            "choi" => {
                let m: ComplexMatrix =
                    serde_json::from_value(wire.data).map_err(D::Error::custom)?;
                ChannelRepr::Choi(ChoiMatrix::new(wire.dim, m).map_err(D::Error::custom)?)
            }
            "superop" => {
                let m: ComplexMatrix =
                    serde_json::from_value(wire.data).map_err(D::Error::custom)?;
                ChannelRepr::Superop(SuperopMatrix::new(wire.dim, m).map_err(D::Error::custom)?)
            }
            other => return Err(D::Error::custom(format!("unknown repr `{other}`"))),
        };
        Ok(Channel {
            dim: wire.dim,
            repr,
            meta: wire.meta,
        })
    }
}

// ---------------------------------------------------------------------------
