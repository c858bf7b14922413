//! Finite-rank tail scans: the compactness criterion quantity
//! `sup_{‖x‖_p = 1} ‖Φ((1−e) x (1−e))‖_p` for coordinate projections `e`.

use serde::{Deserialize, Serialize};

use crate::channels::Channel;
use crate::error::{QdsError, Result};
use crate::norms::{superop_induced_lower, AscentOptions};
use crate::tol::Tolerances;

pub const DEFAULT_AMBIENT_DIM: usize = 64;
/// Presentation default separating "compact-like" from "non-compact-like"
/// final tails; not a mathematical claim.
pub const CLASSIFICATION_THRESHOLD: f64 = 0.01;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TailPoint {
    pub rank: usize,
    pub tail_norm: f64,
}

/// Tail-norm scan of one zoo example over increasing projection ranks.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TailScan {
    pub example_name: String,
    pub p: f64,
    pub ambient_dim: usize,
    pub points: Vec<TailPoint>,
    /// "compact-like" when the final tail drops below the classification
    /// threshold, "non-compact-like" otherwise.
    pub classification: String,
}

/// `sup_{‖x‖_p = 1} ‖Φ((1−e) x (1−e))‖_p` with `e` the projection onto the
/// first `rank` standard basis vectors. Exact at p = 2 (largest singular
/// value of the compressed superoperator), ascent lower bound elsewhere.
///
/// Coordinate projections only; the compactness criterion quantifies over
/// all finite-rank projections, but the zoo examples are basis-adapted.
pub fn tail_norm(
    channel: &Channel,
    rank: usize,
    p: f64,
    opts: &AscentOptions,
) -> Result<f64> {
    let n = channel.dim();
    if rank < 1 || rank >= n {
        return Err(QdsError::BadRank { rank, dim: n });
    }
    let mut s = channel.to_superop().matrix.into_inner();
    // Compress_e(x) = (1−e)x(1−e) scales entry x_{ij} by [i ≥ rank][j ≥ rank];
    // in vectorized form, column (j·n + i) of the superoperator survives iff
    // both coordinates lie in the tail.
    for j in 0..n {
        for i in 0..n {
            if i < rank || j < rank {
                s.column_mut(j * n + i).fill(num_complex::Complex64::new(0.0, 0.0));
            }
        }
    }
    let (value, _) = superop_induced_lower(&s, n, p, opts)?;
    Ok(value)
}

fn zoo_example(name: &str, ambient: usize) -> Result<Channel> {
    match name {
        "pinching" => Ok(crate::channels::pinching(ambient)),
        "shift_average" => crate::channels::shift_average(ambient),
        "damped_pinching" => crate::channels::damped_pinching_geometric(ambient),
        "identity" => Ok(crate::channels::identity_channel(ambient)),
        other => Err(QdsError::UnknownExample(other.to_string())),
    }
}

/// Scan a named zoo example over a strictly increasing list of ranks.
pub fn scan(
    example: &str,
    p: f64,
    ranks: &[usize],
    ambient: usize,
    _tol: &Tolerances,
    opts: &AscentOptions,
) -> Result<TailScan> {
    if ranks.is_empty() {
        return Err(QdsError::BadParameter("empty rank list".into()));
    }
    if ranks.windows(2).any(|w| w[1] <= w[0]) {
        return Err(QdsError::BadParameter(
            "ranks must be strictly increasing".into(),
        ));
    }
    let channel = zoo_example(example, ambient)?;
    let mut points = Vec::with_capacity(ranks.len());
    for &rank in ranks {
        points.push(TailPoint {
            rank,
            tail_norm: tail_norm(&channel, rank, p, opts)?,
        });
    }
    let final_tail = points.last().map(|pt| pt.tail_norm).unwrap_or(0.0);
    let classification = if final_tail < CLASSIFICATION_THRESHOLD {
        "compact-like"
    } else {
        "non-compact-like"
    };
    Ok(TailScan {
        example_name: example.to_string(),
        p,
        ambient_dim: ambient,
        points,
        classification: classification.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::induced_norm;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn opts() -> AscentOptions {
        AscentOptions::default()
    }

    #[test]
    fn pinching_tails_are_one() {
        let channel = crate::channels::pinching(16);
        for rank in [1usize, 4, 8, 15] {
            let t = tail_norm(&channel, rank, 2.0, &opts()).unwrap();
            assert!((t - 1.0).abs() < 1e-10, "rank {rank}: {t}");
        }
    }

    #[test]
    fn damped_pinching_closed_form() {
        let channel = crate::channels::damped_pinching_geometric(64).unwrap();
        for rank in [4usize, 8, 16, 32] {
            let t = tail_norm(&channel, rank, 2.0, &opts()).unwrap();
            let expect = 2f64.powi(-(rank as i32 + 1));
            assert!(
                (t - expect).abs() < 1e-10,
                "rank {rank}: {t} vs {expect}"
            );
        }
    }

    #[test]
    fn shift_average_tails_stay_large() {
        let channel = crate::channels::shift_average(32).unwrap();
        for rank in [4usize, 8, 16, 30] {
            let t = tail_norm(&channel, rank, 2.0, &opts()).unwrap();
            assert!(t >= 0.49, "rank {rank}: {t}");
        }
    }

    #[test]
    fn bad_rank_rejected() {
        let channel = crate::channels::pinching(8);
        assert!(matches!(
            tail_norm(&channel, 0, 2.0, &opts()),
            Err(QdsError::BadRank { .. })
        ));
        assert!(matches!(
            tail_norm(&channel, 8, 2.0, &opts()),
            Err(QdsError::BadRank { .. })
        ));
    }

    #[test]
    fn scan_damped_pinching_compact_like() {
        let scan = scan(
            "damped_pinching",
            2.0,
            &[4, 8, 16, 32],
            64,
            &tol(),
            &opts(),
        )
        .unwrap();
        assert_eq!(scan.classification, "compact-like");
        let expected = [2f64.powi(-5), 2f64.powi(-9), 2f64.powi(-17), 2f64.powi(-33)];
        for (pt, e) in scan.points.iter().zip(expected) {
            assert!((pt.tail_norm - e).abs() < 1e-10, "rank {}: {}", pt.rank, pt.tail_norm);
        }
        for w in scan.points.windows(2) {
            assert!(w[1].tail_norm <= w[0].tail_norm + 1e-12);
        }
    }

    #[test]
    fn scan_non_compact_examples() {
        let s = scan("shift_average", 2.0, &[4, 8, 16, 32], 64, &tol(), &opts()).unwrap();
        assert_eq!(s.classification, "non-compact-like");
        for pt in &s.points {
            assert!(pt.tail_norm >= 0.49);
        }
        let s = scan("pinching", 2.0, &[4, 8, 16, 32], 64, &tol(), &opts()).unwrap();
        assert_eq!(s.classification, "non-compact-like");
        for pt in &s.points {
            assert!((pt.tail_norm - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn scan_unknown_example_rejected() {
        assert!(matches!(
            scan("nonsense", 2.0, &[2], 8, &tol(), &opts()),
            Err(QdsError::UnknownExample(_))
        ));
    }

    #[test]
    fn scan_rejects_non_increasing_ranks() {
        assert!(matches!(
            scan("pinching", 2.0, &[4, 4], 8, &tol(), &opts()),
            Err(QdsError::BadParameter(_))
        ));
    }

    #[test]
    fn tail_never_exceeds_induced_norm_upper() {
        let tol = tol();
        for name in ["pinching", "shift_average", "damped_pinching"] {
            let channel = zoo_example(name, 12).unwrap();
            let bound = induced_norm(&channel, 2.0, &tol, &opts())
                .unwrap()
                .upper_bound;
            for rank in [2usize, 6, 10] {
                let t = tail_norm(&channel, rank, 2.0, &opts()).unwrap();
                assert!(t <= bound + 1e-9, "{name} rank {rank}: {t} > {bound}");
            }
        }
    }

    #[test]
    fn ambient_doubling_stable_for_damped_pinching() {
        let a = scan("damped_pinching", 2.0, &[4, 8], 32, &tol(), &opts()).unwrap();
        let b = scan("damped_pinching", 2.0, &[4, 8], 64, &tol(), &opts()).unwrap();
        for (x, y) in a.points.iter().zip(&b.points) {
            assert!((x.tail_norm - y.tail_norm).abs() < 1e-6);
        }
    }

    #[test]
    fn tail_monotone_in_rank_at_p_infinity() {
        // Ascent lower bounds at p = ∞ on a small example are still monotone
        // within tolerance.
        let channel = crate::channels::damped_pinching_geometric(6).unwrap();
        let mut prev = f64::INFINITY;
        for rank in [1usize, 2, 3, 4] {
            let t = tail_norm(&channel, rank, f64::INFINITY, &opts()).unwrap();
            assert!(t <= prev + 1e-6, "rank {rank}: {t} > {prev}");
            prev = t;
        }
    }
}
