//! Von Neumann entropy and the monotonicity of entropy under QDS channels.

use serde::{Deserialize, Serialize};

use crate::channels::Channel;
use crate::error::{QdsError, Result};
use crate::matcore::{eig_hermitian, singular_values, DensityMatrix, HermitianMatrix};
use crate::tol::Tolerances;

/// Entropy comparison for one `(channel, state)` pair. Entropies in nats.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EntropyReport {
    pub s_in: f64,
    pub s_out: f64,
    /// `s_out − s_in`.
    pub delta: f64,
    /// True when the channel is not a unitary conjugation and the state is
    /// not a trivial fixed point, so a strictly positive gain is expected.
    pub strict_expected: bool,
    /// `log(dim)`, the universal upper bound on `delta`.
    pub bound_log_d: f64,
}

/// `S(ρ) = −Σ λᵢ log λᵢ` with `0 log 0 := 0`, natural log.
///
/// Eigenvalues in `[−psd_tol, 0)` are clamped to 0 so PSD rounding slack
/// cannot produce NaN.
pub fn von_neumann_entropy(rho: &DensityMatrix, tol: &Tolerances) -> Result<f64> {
    let spec = eig_hermitian(rho.hermitian())?;
    let mut s = 0.0;
    for &lam in &spec.eigenvalues {
        if lam < -tol.psd_tol {
            return Err(QdsError::NotDensity(format!(
                "eigenvalue {lam} below -psd_tol"
            )));
        }
        let lam = lam.max(0.0);
        if lam > 0.0 {
            s -= lam * lam.ln();
        }
    }
    Ok(s.max(0.0))
}

/// True iff the channel is a unitary conjugation `Ad_u`: every
/// superoperator singular value equals 1 within `unitary_tol` and the Choi
/// matrix has rank 1 within `psd_tol`.
pub fn unitarity_probe(channel: &Channel, tol: &Tolerances) -> Result<bool> {
    let report = channel.certify(tol);
    if !report.is_qds {
        return Err(QdsError::NotQds(format!(
            "tp residual {:e}, unital residual {:e}, choi min eig {:e}",
            report.tp_residual, report.unital_residual, report.choi_min_eig
        )));
    }
    let sv = singular_values(channel.to_superop().matrix.as_ref());
    let all_unit = sv.iter().all(|&s| (s - 1.0).abs() <= tol.unitary_tol);
    if !all_unit {
        return Ok(false);
    }
    let eigs = channel.to_choi().eigenvalues(tol);
    let rank = eigs.iter().filter(|&&e| e > tol.psd_tol).count();
    Ok(rank == 1)
}

/// Verify `S(Φ(ρ)) ≥ S(ρ)` for a certified QDS channel.
pub fn entropy_monotonicity_check(
    channel: &Channel,
    rho: &DensityMatrix,
    tol: &Tolerances,
) -> Result<EntropyReport> {
    let unitary = unitarity_probe(channel, tol)?; // also certifies QDS
    if channel.dim() != rho.dim() {
        return Err(QdsError::DimensionMismatch {
            expected: channel.dim(),
            got: rho.dim(),
        });
    }
    let s_in = von_neumann_entropy(rho, tol)?;
    let out = channel.apply(rho.matrix())?;
    let out = DensityMatrix::from_matrix(
        HermitianMatrix::symmetrized(&out, tol)?.into_base(),
        tol,
    )?;
    let s_out = von_neumann_entropy(&out, tol)?;

    let spec = eig_hermitian(rho.hermitian())?;
    let mut distinct = 1usize;
    for w in spec.eigenvalues.windows(2) {
        if (w[0] - w[1]).abs() > 1e-10 {
            distinct += 1;
        }
    }
    let pure = spec.eigenvalues.first().copied().unwrap_or(0.0) >= 1.0 - 1e-10;
    let strict_expected = !unitary && (distinct >= 2 || !pure);

    Ok(EntropyReport {
        s_in,
        s_out,
        delta: s_out - s_in,
        strict_expected,
        bound_log_d: (channel.dim() as f64).ln(),
    })
}
