//! Deviation metrics δ_tr, δ_un for approximately doubly stochastic maps and
//! an empirical sweep over perturbation families checking the Lipschitz-type
//! stability bound `‖Φ−Ψ‖ ≤ C (δ_tr + δ_un)^α`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channels::{vec_matrix, Channel, ChannelMeta, SuperopMatrix};
use crate::error::{QdsError, Result};
use crate::matcore::{schatten_norm, trace, ComplexMatrix};
use crate::norms::{superop_induced_lower, AscentOptions};
use crate::tol::Tolerances;

/// One sweep point. `distance_p2` is the exact 2→2 operator-norm distance
/// when `p = 2`; for other exponents it is an ascent lower bound and
/// `distance_is_lower_bound` is set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PerturbationReport {
    pub epsilon: f64,
    pub delta_tr: f64,
    pub delta_un: f64,
    pub distance_p2: f64,
    pub distance_is_lower_bound: bool,
    /// `min(1/p, 1/q)` with `1/p + 1/q = 1`.
    pub alpha: f64,
    /// `distance / (δ_tr + δ_un)^α`; 0 when the deviation vanishes.
    pub fitted_cp: f64,
    /// Exact induced 2→2 norm of the perturbed map.
    pub psi_norm_p2: f64,
}

/// Perturbation family over a base QDS channel Φ.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "family")]
pub enum PerturbationFamily {
    /// `Ψ_ε(x) = Φ(x) + ε a tr(x)`.
    Additive { a: ComplexMatrix },
    /// `Ψ_t = t Φ + (1−t) Ad_u`, parametrized by `ε = 1 − t`.
    Mixture { u: ComplexMatrix },
}

fn alpha_of(p: f64) -> f64 {
    if p.is_infinite() {
        return 0.0;
    }
    let q = if (p - 1.0).abs() < 1e-15 {
        f64::INFINITY
    } else {
        p / (p - 1.0)
    };
    (1.0 / p).min(if q.is_infinite() { 0.0 } else { 1.0 / q })
}

/// `(δ_tr, δ_un)` from the definitions.
///
/// δ_un = ‖Ψ(1) − 1‖_∞ directly; δ_tr = sup_{‖x‖₁=1} |tr(Ψ(x) − x)| via the
/// closed form ‖Ψ*(1) − 1‖_∞ (trace duality applied to
/// tr(Ψ(x) − x) = tr((Ψ*(1) − 1) x)).
pub fn deviation_metrics(psi: &Channel) -> Result<(f64, f64)> {
    let id = ComplexMatrix::identity(psi.dim());
    let un = psi.apply(&id)?;
    let delta_un = schatten_norm(
        &ComplexMatrix::new(un.as_ref() - id.as_ref())?,
        f64::INFINITY,
    )?;
    let tr_img = psi.adjoint().apply(&id)?;
    let delta_tr = schatten_norm(
        &ComplexMatrix::new(tr_img.as_ref() - id.as_ref())?,
        f64::INFINITY,
    )?;
    Ok((delta_tr, delta_un))
}

/// Brute-force oracle for δ_tr: maximize |tr(Ψ(x) − x)| over sampled inputs
/// of unit trace norm. Always a lower bound on the closed form.
pub fn sampled_delta_tr(psi: &Channel, trials: usize, seed: u64) -> Result<f64> {
    let n = psi.dim();
    let mut best: f64 = 0.0;
    for t in 0..trials {
        let mut rng = crate::rng::rng_from_seed(crate::rng::sub_seed(seed, t as u64));
        let x = match t % 3 {
            0 => crate::rng::random_hermitian(n, &mut rng).into_inner(),
            1 => {
                // Rank-one |u><v|, the extreme points of the trace-norm ball.
                let u = nalgebra::DVector::from_fn(n, |_, _| {
                    Complex64::new(
                        rand::Rng::gen::<f64>(&mut rng) - 0.5,
                        rand::Rng::gen::<f64>(&mut rng) - 0.5,
                    )
                });
                let v = nalgebra::DVector::from_fn(n, |_, _| {
                    Complex64::new(
                        rand::Rng::gen::<f64>(&mut rng) - 0.5,
                        rand::Rng::gen::<f64>(&mut rng) - 0.5,
                    )
                });
                &u * v.adjoint()
            }
            _ => crate::rng::random_gaussian_matrix(n, &mut rng),
        };
        let xm = ComplexMatrix::new(x)?;
        let norm1 = schatten_norm(&xm, 1.0)?;
        if norm1 < 1e-12 {
            continue;
        }
        let xm = ComplexMatrix::new(xm.as_ref().unscale(norm1))?;
        let out = psi.apply(&xm)?;
        let val = (trace(&out) - trace(&xm)).norm();
        best = best.max(val);
    }
    Ok(best)
}

/// Build `Ψ_ε(x) = Φ(x) + ε a tr(x)` as a superoperator channel.
pub fn additive_perturbation(phi: &Channel, a: &ComplexMatrix, eps: f64) -> Result<Channel> {
    if a.dim() != phi.dim() {
        return Err(QdsError::DimensionMismatch {
            expected: phi.dim(),
            got: a.dim(),
        });
    }
    let n = phi.dim();
    let mut s = phi.to_superop().matrix.into_inner();
    // tr(x) = vec(1)ᵀ vec(x), so the perturbation is the rank-one update
    // ε vec(a) vec(1)ᵀ.
    let va = vec_matrix(a);
    let vid = vec_matrix(&ComplexMatrix::identity(n));
    s += (&va * vid.transpose()).scale(eps);
    Ok(Channel::from_superop(
        SuperopMatrix::new(n, ComplexMatrix::new(s)?)?,
        ChannelMeta {
            name: "additive_perturbation".into(),
            params: serde_json::json!({ "epsilon": eps, "base": phi.meta().name }),
        },
    ))
}

/// Build `Ψ_t = t Φ + (1−t) Ad_u` with `t = 1 − ε`.
pub fn mixture_perturbation(
    phi: &Channel,
    u: &ComplexMatrix,
    eps: f64,
    tol: &Tolerances,
) -> Result<Channel> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(QdsError::BadParameter(format!(
            "mixture parameter eps={eps} outside [0,1]"
        )));
    }
    let ad_u = crate::channels::unitary_conjugation(u.clone(), tol)?;
    let n = phi.dim();
    if u.dim() != n {
        return Err(QdsError::DimensionMismatch {
            expected: n,
            got: u.dim(),
        });
    }
    let s = phi.to_superop().matrix.as_ref().scale(1.0 - eps)
        + ad_u.to_superop().matrix.as_ref().scale(eps);
    Ok(Channel::from_superop(
        SuperopMatrix::new(n, ComplexMatrix::new(s)?)?,
        ChannelMeta {
            name: "mixture_perturbation".into(),
            params: serde_json::json!({ "epsilon": eps, "base": phi.meta().name }),
        },
    ))
}

fn build_member(
    phi: &Channel,
    family: &PerturbationFamily,
    eps: f64,
    tol: &Tolerances,
) -> Result<Channel> {
    match family {
        PerturbationFamily::Additive { a } => additive_perturbation(phi, a, eps),
        PerturbationFamily::Mixture { u } => mixture_perturbation(phi, u, eps, tol),
    }
}

/// Sweep the family over `eps_grid`, reporting deviation metrics, map
/// distance, and the fitted constant at each point.
pub fn perturbation_sweep(
    phi: &Channel,
    family: &PerturbationFamily,
    eps_grid: &[f64],
    p: f64,
    tol: &Tolerances,
    opts: &AscentOptions,
) -> Result<Vec<PerturbationReport>> {
    let report = phi.certify(tol);
    if !report.is_qds {
        return Err(QdsError::NotQds(format!(
            "base channel: tp residual {:e}, unital residual {:e}, choi min eig {:e}",
            report.tp_residual, report.unital_residual, report.choi_min_eig
        )));
    }
    let n = phi.dim();
    let s_phi = phi.to_superop().matrix.into_inner();
    let alpha = alpha_of(p);
    let exact = (p - 2.0).abs() < 1e-15;

    let mut out = Vec::with_capacity(eps_grid.len());
    for &eps in eps_grid {
        let psi = build_member(phi, family, eps, tol)?;
        let (delta_tr, delta_un) = deviation_metrics(&psi)?;
        let s_psi = psi.to_superop().matrix.into_inner();
        let diff = &s_phi - &s_psi;
        let (distance, _) = superop_induced_lower(&diff, n, p, opts)?;
        let (psi_norm_p2, _) = superop_induced_lower(&s_psi, n, 2.0, opts)?;
        let dev = delta_tr + delta_un;
        let fitted_cp = if dev > 1e-14 {
            distance / dev.powf(alpha)
        } else {
            0.0
        };
        out.push(PerturbationReport {
            epsilon: eps,
            delta_tr,
            delta_un,
            distance_p2: distance,
            distance_is_lower_bound: !exact,
            alpha,
            fitted_cp,
            psi_norm_p2,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{depolarizing, random_mixed_unitary};
    use crate::matcore::HermitianMatrix;
    use crate::rng::{random_unitary, rng_from_seed};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn diag_a(n: usize) -> ComplexMatrix {
        let mut d = vec![0.0; n];
        d[0] = 1.0;
        HermitianMatrix::from_diagonal(&d).into_base()
    }

    #[test]
    fn qds_channels_have_zero_deviation() {
        let tol = tol();
        let mut rng = rng_from_seed(21);
        for trial in 0..5u64 {
            let n = 2 + (trial % 4) as usize;
            let phi = random_mixed_unitary(n, 3, &mut rng, &tol);
            let (dt, du) = deviation_metrics(&phi).unwrap();
            assert!(dt < 1e-12, "delta_tr {dt:e}");
            assert!(du < 1e-12, "delta_un {du:e}");
        }
    }

    #[test]
    fn additive_family_closed_forms() {
        // Ψ(x) = Φ(x) + ε a tr(x), a = diag(1, 0, ..., 0):
        // Ψ*(1) − 1 = ε tr(a) 1, so δ_tr = ε|tr(a)| = ε;
        // Ψ(1) − 1 = ε n a, so δ_un = ε n ‖a‖_∞ = ε n.
        let n = 3;
        let eps = 0.01;
        let phi = depolarizing(0.5, n).unwrap();
        let psi = additive_perturbation(&phi, &diag_a(n), eps).unwrap();
        let (dt, du) = deviation_metrics(&psi).unwrap();
        assert!((dt - eps).abs() < 1e-12, "delta_tr {dt}");
        assert!((du - eps * n as f64).abs() < 1e-12, "delta_un {du}");
    }

    #[test]
    fn closed_form_dominates_sampled_oracle() {
        let tol = tol();
        let mut rng = rng_from_seed(22);
        for trial in 0..25u64 {
            let n = 2 + (trial % 3) as usize;
            let phi = random_mixed_unitary(n, 2, &mut rng, &tol);
            let a = crate::rng::random_hermitian(n, &mut rng);
            let psi = additive_perturbation(&phi, &a, 0.05).unwrap();
            let (dt, _) = deviation_metrics(&psi).unwrap();
            let sampled = sampled_delta_tr(&psi, 200, 1000 + trial).unwrap();
            assert!(
                sampled <= dt + 1e-9,
                "trial {trial}: sampled {sampled} exceeds closed form {dt}"
            );
            // The rank-one samples should come close to the supremum.
            assert!(
                sampled >= 0.5 * dt,
                "trial {trial}: sampled {sampled} far below closed form {dt}"
            );
        }
    }

    #[test]
    fn mixture_family_stays_qds() {
        let tol = tol();
        let mut rng = rng_from_seed(23);
        let phi = depolarizing(0.3, 3).unwrap();
        let u = random_unitary(3, &mut rng);
        for eps in [0.0, 0.25, 0.9] {
            let psi = mixture_perturbation(&phi, &u, eps, &tol).unwrap();
            let (dt, du) = deviation_metrics(&psi).unwrap();
            assert!(dt < 1e-12 && du < 1e-12, "eps {eps}: ({dt:e}, {du:e})");
            assert!(psi.certify(&tol).is_qds);
        }
    }

    #[test]
    fn additive_sweep_exact_scaling() {
        // distance_p2 = ε ‖a‖₂ √n exactly for the rank-one superoperator
        // perturbation ε vec(a) vec(1)ᵀ.
        let tol = tol();
        let n = 3;
        let phi = depolarizing(0.5, n).unwrap();
        let family = PerturbationFamily::Additive { a: diag_a(n) };
        let grid = [1e-1, 1e-2, 1e-3, 1e-4];
        let reports = perturbation_sweep(
            &phi,
            &family,
            &grid,
            2.0,
            &tol,
            &AscentOptions::default(),
        )
        .unwrap();
        for (r, &eps) in reports.iter().zip(&grid) {
            let expect = eps * (n as f64).sqrt(); // ‖a‖₂ = 1
            assert!(
                (r.distance_p2 - expect).abs() < 1e-10,
                "eps {eps}: {} vs {expect}",
                r.distance_p2
            );
            assert!(!r.distance_is_lower_bound);
            assert!((r.alpha - 0.5).abs() < 1e-15);
        }
        // Monotone decrease to below 1e-3.
        for w in reports.windows(2) {
            assert!(w[1].distance_p2 < w[0].distance_p2);
        }
        assert!(reports.last().unwrap().distance_p2 < 1e-3);
    }

    #[test]
    fn zero_epsilon_gives_zero_report() {
        let tol = tol();
        let phi = depolarizing(0.5, 2).unwrap();
        let family = PerturbationFamily::Additive { a: diag_a(2) };
        let reports =
            perturbation_sweep(&phi, &family, &[0.0], 2.0, &tol, &AscentOptions::default())
                .unwrap();
        let r = &reports[0];
        assert!(r.distance_p2 < 1e-12);
        assert!(r.delta_tr < 1e-12 && r.delta_un < 1e-12);
        assert_eq!(r.fitted_cp, 0.0);
        assert!((r.psi_norm_p2 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn mixture_sweep_distance_scales_linearly() {
        let tol = tol();
        let mut rng = rng_from_seed(24);
        let phi = depolarizing(0.4, 3).unwrap();
        let u = random_unitary(3, &mut rng);
        let family = PerturbationFamily::Mixture { u: u.clone() };
        let grid = [0.2, 0.1, 0.05];
        let reports = perturbation_sweep(
            &phi,
            &family,
            &grid,
            2.0,
            &tol,
            &AscentOptions::default(),
        )
        .unwrap();
        // ‖S_Φ − S_Ψ‖ = ε ‖S_Φ − S_{Ad_u}‖.
        let ad_u = crate::channels::unitary_conjugation(u, &tol).unwrap();
        let base_diff = crate::matcore::ComplexMatrix::new(
            phi.to_superop().matrix.as_ref() - ad_u.to_superop().matrix.as_ref(),
        )
        .unwrap()
        .operator_norm();
        for (r, &eps) in reports.iter().zip(&grid) {
            assert!((r.distance_p2 - eps * base_diff).abs() < 1e-10);
            assert!(r.delta_tr < 1e-12 && r.delta_un < 1e-12);
        }
    }

    #[test]
    fn distance_is_a_metric_on_random_triples() {
        let tol = tol();
        for trial in 0..10u64 {
            let mut rng = rng_from_seed(600 + trial);
            let n = 3;
            let a = random_mixed_unitary(n, 2, &mut rng, &tol);
            let b = random_mixed_unitary(n, 2, &mut rng, &tol);
            let c = random_mixed_unitary(n, 2, &mut rng, &tol);
            let d = |x: &Channel, y: &Channel| {
                ComplexMatrix::new(
                    x.to_superop().matrix.as_ref() - y.to_superop().matrix.as_ref(),
                )
                .unwrap()
                .operator_norm()
            };
            let (ab, ba) = (d(&a, &b), d(&b, &a));
            assert!((ab - ba).abs() < 1e-10);
            assert!(d(&a, &c) <= ab + d(&b, &c) + 1e-10);
        }
    }

    #[test]
    fn norm_stability_corollary() {
        let tol = tol();
        let n = 3;
        let phi = depolarizing(0.5, n).unwrap();
        let family = PerturbationFamily::Additive { a: diag_a(n) };
        let grid = [1e-1, 1e-2, 1e-3, 1e-4];
        let reports = perturbation_sweep(
            &phi,
            &family,
            &grid,
            2.0,
            &tol,
            &AscentOptions::default(),
        )
        .unwrap();
        for r in &reports {
            let dev = (r.delta_tr + r.delta_un).powf(r.alpha);
            assert!(
                (r.psi_norm_p2 - 1.0).abs() <= r.fitted_cp * dev + 1e-8,
                "eps {}: |{} - 1| vs {}",
                r.epsilon,
                r.psi_norm_p2,
                r.fitted_cp * dev
            );
        }
    }
}
