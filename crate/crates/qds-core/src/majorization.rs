//! Spectral majorization: decide ρ ≺ σ, synthesize the doubly stochastic
//! matrix linking the spectra, decompose it into permutations, and assemble
//! the mixed-unitary channel realizing ρ = Φ(σ).

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::channels::{permutation_matrix, Channel, ChannelMeta, KrausSet};
use crate::error::{QdsError, Result};
use crate::matcore::{eig_hermitian, ComplexMatrix, DensityMatrix};
use crate::tol::Tolerances;

/// Real square matrix with row and column sums 1 and entries in [0, 1]
/// (all within `ds_tol`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DoublyStochasticMatrix {
    pub dim: usize,
    /// Row-major rows.
    pub rows: Vec<Vec<f64>>,
}

impl DoublyStochasticMatrix {
    pub fn new(rows: Vec<Vec<f64>>, tol: &Tolerances) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return Err(QdsError::InvalidMatrix("rows must form a square matrix".into()));
        }
        for r in &rows {
            for &x in r {
                if !(-tol.ds_tol..=1.0 + tol.ds_tol).contains(&x) {
                    return Err(QdsError::InvalidMatrix(format!(
                        "entry {x} outside [0,1] beyond ds_tol"
                    )));
                }
            }
            let s: f64 = r.iter().sum();
            if (s - 1.0).abs() > tol.ds_tol {
                return Err(QdsError::InvalidMatrix(format!("row sum {s} != 1")));
            }
        }
        for j in 0..dim {
            let s: f64 = rows.iter().map(|r| r[j]).sum();
            if (s - 1.0).abs() > tol.ds_tol {
                return Err(QdsError::InvalidMatrix(format!("column sum {s} != 1")));
            }
        }
        Ok(Self { dim, rows })
    }

    pub fn identity(dim: usize) -> Self {
        let rows = (0..dim)
            .map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Self { dim, rows }
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// Convex combination of permutation matrices reconstructing a doubly
/// stochastic matrix. Permutations are stored as `π` with `P e_j = e_{π(j)}`,
/// i.e. entry `(π(j), j)` of the permutation matrix is 1.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BirkhoffDecomposition {
    pub weights: Vec<f64>,
    pub permutations: Vec<Vec<usize>>,
}

impl BirkhoffDecomposition {
    pub fn reconstruct(&self, dim: usize) -> Vec<Vec<f64>> {
        let mut rows = vec![vec![0.0; dim]; dim];
        for (w, perm) in self.weights.iter().zip(&self.permutations) {
            for (j, &i) in perm.iter().enumerate() {
                rows[i][j] += w;
            }
        }
        rows
    }
}

/// Certification record for ρ ≺ σ.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MajorizationCertificate {
    pub holds: bool,
    /// `slack_k = Σ_{i≤k} λ_i(σ) − Σ_{i≤k} λ_i(ρ)`, with the final entry the
    /// total-trace mismatch.
    pub partial_sum_slack: Vec<f64>,
    pub ds_matrix: Option<DoublyStochasticMatrix>,
    pub decomposition: Option<BirkhoffDecomposition>,
    pub realizing_channel: Option<Channel>,
    /// `(V, W)` with `σ = V diag(λσ) V†` and `ρ = W diag(λρ) W†`.
    pub basis_unitaries: Option<(ComplexMatrix, ComplexMatrix)>,
    /// Set when eigenvalue ties make the eigenbases non-unique. The
    /// certificate remains valid; only the particular unitaries differ.
    pub degenerate_basis: bool,
}

fn sorted_spectrum(rho: &DensityMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    let spec = eig_hermitian(rho.hermitian())?;
    Ok((spec.eigenvalues, spec.eigenvectors))
}

fn slacks(lam_rho: &[f64], lam_sigma: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(lam_rho.len());
    let mut sr = 0.0;
    let mut ss = 0.0;
    for (&r, &s) in lam_rho.iter().zip(lam_sigma) {
        sr += r;
        ss += s;
        out.push(ss - sr);
    }
    out
}

fn holds_from_slacks(slack: &[f64], tol: &Tolerances) -> bool {
    let n = slack.len();
    slack[..n - 1].iter().all(|&s| s >= -tol.maj_tol)
        && slack[n - 1].abs() <= tol.maj_tol
}

/// Partial certificate: decide ρ ≺ σ from the descending partial sums of the
/// spectra.
pub fn check_majorization(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    tol: &Tolerances,
) -> Result<MajorizationCertificate> {
    if rho.dim() != sigma.dim() {
        return Err(QdsError::DimensionMismatch {
            expected: sigma.dim(),
            got: rho.dim(),
        });
    }
    let (lam_rho, _) = sorted_spectrum(rho)?;
    let (lam_sigma, _) = sorted_spectrum(sigma)?;
    let slack = slacks(&lam_rho, &lam_sigma);
    let holds = holds_from_slacks(&slack, tol);
    Ok(MajorizationCertificate {
        holds,
        partial_sum_slack: slack,
        ds_matrix: None,
        decomposition: None,
        realizing_channel: None,
        basis_unitaries: None,
        degenerate_basis: false,
    })
}

/// Doubly stochastic matrix with `D λ(σ) = λ(ρ)`, built as a chain of at
/// most `dim − 1` T-transforms (convex combinations of the identity and a
/// transposition).
pub fn build_ds_matrix(
    lam_rho: &[f64],
    lam_sigma: &[f64],
    tol: &Tolerances,
) -> Result<DoublyStochasticMatrix> {
    let n = lam_rho.len();
    if lam_sigma.len() != n || n == 0 {
        return Err(QdsError::DimensionMismatch {
            expected: n,
            got: lam_sigma.len(),
        });
    }
    for v in [lam_rho, lam_sigma] {
        if v.windows(2).any(|w| w[0] < w[1] - tol.maj_tol) {
            return Err(QdsError::BadParameter(
                "spectra must be sorted non-increasing".into(),
            ));
        }
    }
    let slack = slacks(lam_rho, lam_sigma);
    if !holds_from_slacks(&slack, tol) {
        let worst = slack
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        return Err(QdsError::NotMajorized(worst));
    }

    let x = lam_rho;
    let mut y: Vec<f64> = lam_sigma.to_vec();
    let mut d = DMatrix::<f64>::identity(n, n);
    let eq_tol = 1e-13;
    // Each T-transform fixes at least one coordinate; 2n iterations is a
    // generous cap for rounding effects.
    for _ in 0..2 * n {
        // k: smallest index where y undershoots x; j: largest earlier index
        // where y overshoots. Between them the vectors agree.
        let k = match (0..n).find(|&i| y[i] < x[i] - eq_tol) {
            Some(k) => k,
            None => break,
        };
        let j = (0..k)
            .rev()
            .find(|&i| y[i] > x[i] + eq_tol)
            .ok_or_else(|| QdsError::NotMajorized(x[k] - y[k]))?;
        let delta = (y[j] - x[j]).min(x[k] - y[k]);
        let s = delta / (y[j] - y[k]);
        let (yj, yk) = (y[j], y[k]);
        y[j] = yj - delta;
        y[k] = yk + delta;
        // T = (1-s) I + s (j k); accumulate D = T D.
        let row_j = d.row(j).clone_owned();
        let row_k = d.row(k).clone_owned();
        d.set_row(j, &(row_j.scale(1.0 - s) + row_k.scale(s)));
        let row_j_new = row_j.scale(s) + row_k.scale(1.0 - s);
        d.set_row(k, &row_j_new);
    }

    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| d[(i, j)]).collect())
        .collect();
    let ds = DoublyStochasticMatrix::new(rows, tol)?;
    let mapped = ds.apply(lam_sigma);
    let err = mapped
        .iter()
        .zip(lam_rho)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if err > tol.ds_tol {
        return Err(QdsError::InvalidMatrix(format!(
            "T-transform chain failed to map spectra: residual {err:e}"
        )));
    }
    Ok(ds)
}

// ---------------------------------------------------------------------------
// Birkhoff decomposition
// ---------------------------------------------------------------------------

/// Augmenting-path bipartite matching on the support graph.
/// `support[i]` lists columns available to row i. Returns `row_of_col`.
fn perfect_matching(support: &[Vec<usize>]) -> Option<Vec<usize>> {
    let n = support.len();
    let mut col_to_row = vec![usize::MAX; n];
    fn try_assign(
        row: usize,
        support: &[Vec<usize>],
        seen: &mut [bool],
        col_to_row: &mut [usize],
    ) -> bool {
        for &col in &support[row] {
            if !seen[col] {
                seen[col] = true;
                if col_to_row[col] == usize::MAX
                    || try_assign(col_to_row[col], support, seen, col_to_row)
                {
                    col_to_row[col] = row;
                    return true;
                }
            }
        }
        false
    }
    for row in 0..n {
        let mut seen = vec![false; n];
        if !try_assign(row, support, &mut seen, &mut col_to_row) {
            return None;
        }
    }
    Some(col_to_row)
}

/// Decompose a doubly stochastic matrix into a convex combination of at most
/// `(dim−1)² + 1` permutation matrices by repeatedly matching the support
/// graph and subtracting the minimum matched entry.
pub fn birkhoff_decompose(
    d: &DoublyStochasticMatrix,
    tol: &Tolerances,
) -> Result<BirkhoffDecomposition> {
    let n = d.dim;
    let mut rem: Vec<Vec<f64>> = d.rows.clone();
    let mut weights = Vec::new();
    let mut permutations: Vec<Vec<usize>> = Vec::new();
    let max_terms = (n - 1) * (n - 1) + 1;
    // Support cutoff for the matching. This is deliberately much finer than
    // `ds_tol`: entries between the two scales must stay matchable, otherwise
    // their mass can never be extracted and the greedy loop stalls. Whatever
    // dust remains below the cutoff (at most n² · DUST) is absorbed by the
    // final weight renormalization.
    const DUST: f64 = 1e-13;

    loop {
        let mass: f64 = rem[0].iter().sum();
        // Done when the remaining mass is negligible or only dust entries
        // survive; round-off makes such residues slightly non-stochastic, so
        // asking the matcher to exhaust them exactly would spuriously stall.
        if mass <= tol.ds_tol || rem.iter().flatten().all(|&x| x <= DUST) {
            break;
        }
        let support: Vec<Vec<usize>> = rem
            .iter()
            .map(|row| {
                (0..n)
                    .filter(|&j| row[j] > DUST)
                    .collect()
            })
            .collect();
        let col_to_row = perfect_matching(&support)
            .ok_or(QdsError::DecompositionStalled(mass))?;
        // π: column j -> row, so the permutation matrix has entry (π(j), j).
        let perm: Vec<usize> = (0..n)
            .map(|j| col_to_row[j])
            .collect();
        let w = (0..n)
            .map(|j| rem[perm[j]][j])
            .fold(f64::INFINITY, f64::min);
        for (j, &i) in perm.iter().enumerate() {
            rem[i][j] = (rem[i][j] - w).max(0.0);
        }
        weights.push(w);
        permutations.push(perm);
        if weights.len() > max_terms {
            return Err(QdsError::DecompositionStalled(mass));
        }
    }

    if weights.is_empty() {
        return Err(QdsError::InvalidMatrix("matrix has no mass".into()));
    }
    // Renormalize so the weights sum to exactly 1.
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    Ok(BirkhoffDecomposition {
        weights,
        permutations,
    })
}

// ---------------------------------------------------------------------------
// Realizing channel
// ---------------------------------------------------------------------------

const DEGENERACY_GAP: f64 = 1e-8;

/// Full certificate: when ρ ≺ σ, build the QDS channel
/// `Φ = Ad_W ∘ MixedPerm ∘ Ad_{V†}` with `Φ(σ) = ρ`.
///
/// The mixed-permutation middle stage realizes the spectrum transport
/// `D λ(σ) = λ(ρ)`; the outer conjugations align the eigenbases (the final
/// alignment by `W` is what turns "unitarily conjugate to ρ" into "equals
/// ρ").
pub fn realize_channel(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    tol: &Tolerances,
) -> Result<MajorizationCertificate> {
    let mut cert = check_majorization(rho, sigma, tol)?;
    if !cert.holds {
        let worst = cert
            .partial_sum_slack
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        return Err(QdsError::NotMajorized(worst));
    }
    let (lam_rho, w_basis) = sorted_spectrum(rho)?;
    let (lam_sigma, v_basis) = sorted_spectrum(sigma)?;
    let degenerate = lam_rho
        .windows(2)
        .chain(lam_sigma.windows(2))
        .any(|w| (w[0] - w[1]).abs() < DEGENERACY_GAP);

    let ds = build_ds_matrix(&lam_rho, &lam_sigma, tol)?;
    let decomp = birkhoff_decompose(&ds, tol)?;

    let n = rho.dim();
    let v_dag = v_basis.adjoint();
    let ops: Vec<ComplexMatrix> = decomp
        .weights
        .iter()
        .zip(&decomp.permutations)
        .map(|(&w, perm)| {
            let p = permutation_matrix(perm);
            let m = w_basis.as_ref() * p.as_ref() * v_dag.as_ref();
            ComplexMatrix::new(m.scale(w.sqrt())).expect("finite")
        })
        .collect();
    let channel = Channel::from_kraus(
        KrausSet::new(ops)?,
        ChannelMeta {
            name: "majorization_realization".into(),
            params: serde_json::json!({ "dim": n, "terms": decomp.weights.len() }),
        },
    );

    cert.ds_matrix = Some(ds);
    cert.decomposition = Some(decomp);
    cert.realizing_channel = Some(channel);
    cert.basis_unitaries = Some((v_basis, w_basis));
    cert.degenerate_basis = degenerate;
    Ok(cert)
}

/// Trace-norm residual `‖Φ(σ) − ρ‖₁` of a certificate's realizing channel.
pub fn realization_residual(
    cert: &MajorizationCertificate,
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
) -> Result<f64> {
    let channel = cert
        .realizing_channel
        .as_ref()
        .ok_or_else(|| QdsError::BadParameter("certificate has no channel".into()))?;
    let out = channel.apply(sigma.matrix())?;
    let diff = ComplexMatrix::new(out.as_ref() - rho.matrix().as_ref())?;
    crate::matcore::schatten_norm(&diff, 1.0)
}

// ---------------------------------------------------------------------------
// Convex-function surrogate test
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvexViolation {
    /// "hinge" with threshold `param`, or "power" with exponent `param`.
    pub kind: String,
    pub param: f64,
    pub trace_f_rho: f64,
    pub trace_f_sigma: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvexTestReport {
    pub functions_checked: usize,
    pub violations: Vec<ConvexViolation>,
}

/// Compare `tr f(ρ)` against `tr f(σ)` over the decidable surrogate family
/// of hinge functions `t ↦ max(t−s, 0)` and powers `t ↦ tᵖ`.
///
/// "Every convex function" is not enumerable; hinge functions are the
/// classical extreme rays on spectra, so violations of majorization always
/// show up in this family.
pub fn convex_function_test(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    hinge_grid: &[f64],
    power_grid: &[f64],
) -> Result<ConvexTestReport> {
    if rho.dim() != sigma.dim() {
        return Err(QdsError::DimensionMismatch {
            expected: sigma.dim(),
            got: rho.dim(),
        });
    }
    let (lam_rho, _) = sorted_spectrum(rho)?;
    let (lam_sigma, _) = sorted_spectrum(sigma)?;
    let mut violations = Vec::new();
    let mut checked = 0usize;
    let mut run = |kind: &str, param: f64, f: &dyn Fn(f64) -> f64| {
        checked += 1;
        let a: f64 = lam_rho.iter().map(|&l| f(l.max(0.0))).sum();
        let b: f64 = lam_sigma.iter().map(|&l| f(l.max(0.0))).sum();
        if a > b + 1e-10 {
            violations.push(ConvexViolation {
                kind: kind.into(),
                param,
                trace_f_rho: a,
                trace_f_sigma: b,
            });
        }
    };
    for &s in hinge_grid {
        run("hinge", s, &|t| (t - s).max(0.0));
    }
    for &p in power_grid {
        run("power", p, &|t| t.powf(p));
    }
    Ok(ConvexTestReport {
        functions_checked: checked,
        violations,
    })
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::random_mixed_unitary;
    use crate::rng::{random_density, rng_from_seed};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn density(diag: &[f64]) -> DensityMatrix {
        DensityMatrix::from_probabilities(diag, &tol()).unwrap()
    }

    #[test]
    fn maximally_mixed_is_majorized_by_everything() {
        let mut rng = rng_from_seed(1);
        let rho = density(&[0.25; 4]);
        let sigma = random_density(4, &mut rng, &tol());
        let cert = check_majorization(&rho, &sigma, &tol()).unwrap();
        assert!(cert.holds);
    }

    #[test]
    fn slack_arithmetic_example() {
        let rho = density(&[0.5, 0.3, 0.2]);
        let sigma = density(&[0.7, 0.2, 0.1]);
        let cert = check_majorization(&rho, &sigma, &tol()).unwrap();
        assert!(cert.holds);
        let expect = [0.2, 0.1, 0.0];
        for (s, e) in cert.partial_sum_slack.iter().zip(expect) {
            assert!((s - e).abs() < 1e-12, "slack {s} vs {e}");
        }
    }

    #[test]
    fn non_majorized_pair_detected() {
        let rho = density(&[0.9, 0.1]);
        let sigma = density(&[0.6, 0.4]);
        let cert = check_majorization(&rho, &sigma, &tol()).unwrap();
        assert!(!cert.holds);
        assert!((cert.partial_sum_slack[0] + 0.3).abs() < 1e-12);
    }

    #[test]
    fn ds_identity_when_spectra_equal() {
        let lam = [0.5, 0.3, 0.2];
        let ds = build_ds_matrix(&lam, &lam, &tol()).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((ds.rows[i][j] - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ds_full_mixing() {
        let ds = build_ds_matrix(&[0.5, 0.5], &[1.0, 0.0], &tol()).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((ds.rows[i][j] - 0.5).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ds_three_dim_example() {
        let lam_rho = [0.5, 0.3, 0.2];
        let lam_sigma = [0.7, 0.2, 0.1];
        let ds = build_ds_matrix(&lam_rho, &lam_sigma, &tol()).unwrap();
        let mapped = ds.apply(&lam_sigma);
        for (m, r) in mapped.iter().zip(lam_rho) {
            assert!((m - r).abs() < 1e-12);
        }
    }

    #[test]
    fn ds_rejects_non_majorized() {
        assert!(matches!(
            build_ds_matrix(&[0.9, 0.1], &[0.6, 0.4], &tol()),
            Err(QdsError::NotMajorized(_))
        ));
    }

    #[test]
    fn birkhoff_identity() {
        let d = DoublyStochasticMatrix::identity(3);
        let dec = birkhoff_decompose(&d, &tol()).unwrap();
        assert_eq!(dec.weights.len(), 1);
        assert!((dec.weights[0] - 1.0).abs() < 1e-15);
        assert_eq!(dec.permutations[0], vec![0, 1, 2]);
    }

    #[test]
    fn birkhoff_half_mixing() {
        let d = DoublyStochasticMatrix::new(
            vec![vec![0.5, 0.5], vec![0.5, 0.5]],
            &tol(),
        )
        .unwrap();
        let dec = birkhoff_decompose(&d, &tol()).unwrap();
        assert_eq!(dec.weights.len(), 2);
        for w in &dec.weights {
            assert!((w - 0.5).abs() < 1e-12);
        }
        let recon = dec.reconstruct(2);
        for i in 0..2 {
            for j in 0..2 {
                assert!((recon[i][j] - 0.5).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn birkhoff_round_trip_random_combination() {
        let mut rng = rng_from_seed(5);
        let n = 5;
        let weights = crate::rng::random_weights(6, &mut rng);
        let mut rows = vec![vec![0.0; n]; n];
        for &w in &weights {
            let perm = crate::rng::random_permutation(n, &mut rng);
            for (j, &i) in perm.iter().enumerate() {
                rows[i][j] += w;
            }
        }
        let d = DoublyStochasticMatrix::new(rows.clone(), &tol()).unwrap();
        let dec = birkhoff_decompose(&d, &tol()).unwrap();
        assert!(dec.weights.len() <= 17);
        let recon = dec.reconstruct(n);
        let err = recon
            .iter()
            .flatten()
            .zip(rows.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-10, "reconstruction error {err:e}");
    }

    #[test]
    fn birkhoff_stalls_on_non_ds_input() {
        // Bypass validation with a hand-built struct: a matrix whose support
        // has no perfect matching.
        let d = DoublyStochasticMatrix {
            dim: 2,
            rows: vec![vec![1.0, 0.0], vec![1.0, 0.0]],
        };
        assert!(matches!(
            birkhoff_decompose(&d, &tol()),
            Err(QdsError::DecompositionStalled(_))
        ));
    }

    #[test]
    fn realize_equal_states_is_unitary_conjugation() {
        let mut rng = rng_from_seed(6);
        let rho = random_density(4, &mut rng, &tol());
        let cert = realize_channel(&rho, &rho, &tol()).unwrap();
        let res = realization_residual(&cert, &rho, &rho).unwrap();
        assert!(res < 1e-10, "residual {res:e}");
        assert_eq!(cert.decomposition.as_ref().unwrap().weights.len(), 1);
    }

    #[test]
    fn realize_pure_to_maximally_mixed() {
        let n = 4;
        let mut diag = vec![0.0; n];
        diag[0] = 1.0;
        let sigma = density(&diag);
        let rho = density(&vec![1.0 / n as f64; n]);
        let cert = realize_channel(&rho, &sigma, &tol()).unwrap();
        let ds = cert.ds_matrix.as_ref().unwrap();
        // First column of D is uniform.
        for i in 0..n {
            assert!((ds.rows[i][0] - 1.0 / n as f64).abs() < 1e-10);
        }
        let res = realization_residual(&cert, &rho, &sigma).unwrap();
        assert!(res < 1e-10);
        let report = cert.realizing_channel.as_ref().unwrap().certify(&tol());
        assert!(report.is_qds);
    }

    #[test]
    fn realize_round_trip_random_qds_outputs() {
        let tol = tol();
        for trial in 0..20u64 {
            let mut rng = rng_from_seed(100 + trial);
            let sigma = random_density(5, &mut rng, &tol);
            let phi0 = random_mixed_unitary(5, 3, &mut rng, &tol);
            let rho = DensityMatrix::from_matrix(
                crate::matcore::HermitianMatrix::symmetrized(
                    &phi0.apply(sigma.matrix()).unwrap(),
                    &tol,
                )
                .unwrap()
                .into_base(),
                &tol,
            )
            .unwrap();
            let cert = realize_channel(&rho, &sigma, &tol).unwrap();
            assert!(cert.holds, "trial {trial}");
            let res = realization_residual(&cert, &rho, &sigma).unwrap();
            assert!(res < 1e-8, "trial {trial}: residual {res:e}");
            assert!(cert.realizing_channel.as_ref().unwrap().certify(&tol).is_qds);
        }
    }

    #[test]
    fn convex_test_majorized_pair() {
        let rho = density(&[0.5, 0.3, 0.2]);
        let sigma = density(&[0.7, 0.2, 0.1]);
        // f(t) = t²: 0.38 vs 0.54.
        let report = convex_function_test(&rho, &sigma, &[], &[2.0]).unwrap();
        assert!(report.violations.is_empty());
        let report =
            convex_function_test(&rho, &sigma, &[0.0, 0.15, 0.25, 0.6], &[1.5, 2.0, 3.0])
                .unwrap();
        assert!(report.violations.is_empty());
    }

    #[test]
    fn convex_test_equal_states() {
        let rho = density(&[0.6, 0.4]);
        let report = convex_function_test(&rho, &rho, &[0.0, 0.5], &[2.0, 3.0]).unwrap();
        assert!(report.violations.is_empty());
    }

    #[test]
    fn convex_test_detects_non_majorized_pair() {
        let rho = density(&[0.9, 0.1]);
        let sigma = density(&[0.6, 0.4]);
        // Hinge threshold between the crossing points separates the spectra.
        let report = convex_function_test(&rho, &sigma, &[0.7], &[]).unwrap();
        assert_eq!(report.violations.len(), 1);
    }

    #[test]
    fn p_norm_monotonicity_for_majorized_pairs() {
        let tol = tol();
        for trial in 0..20u64 {
            let mut rng = rng_from_seed(500 + trial);
            let sigma = random_density(4, &mut rng, &tol);
            let phi0 = random_mixed_unitary(4, 2, &mut rng, &tol);
            let rho_m = phi0.apply(sigma.matrix()).unwrap();
            for p in [1.0, 1.5, 2.0, 3.0, 5.0, f64::INFINITY] {
                let a = crate::matcore::schatten_norm(&rho_m, p).unwrap();
                let b = crate::matcore::schatten_norm(sigma.matrix(), p).unwrap();
                assert!(a <= b + 1e-10, "p={p}: {a} > {b}");
            }
        }
    }
}
