use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PinchedKind {
    /// `R_M > C |H⃗_M|²`; parameter is `sup |H⃗_M|²`.
    ScalarPinched { mean_vec_norm_sq: f64, c: f64 },
    /// Convex hypersurface of `ℝ⁴` with `k₃/k₁ < C`.
    ConvexHypersurface { k1: f64, c: f64 },
}

/// Signed threshold value for the pinched families; callers treat `≤ 0` as "none required".
pub fn pinched_threshold(kind: PinchedKind) -> Result<f64> {
    match kind {
        PinchedKind::ScalarPinched { mean_vec_norm_sq, c } => {
            if !(c > 0.0) || !(mean_vec_norm_sq >= 0.0) {
                return Err(Error::InvalidParameter(
                    "scalar pinching needs C > 0 and |H_M|^2 >= 0".into(),
                ));
            }
            Ok(mean_vec_norm_sq * (1.0 - 2.0 * c))
        }
        PinchedKind::ConvexHypersurface { k1, c } => {
            if !(c > 0.0) || !k1.is_finite() {
                return Err(Error::InvalidParameter("convex pinching needs C > 0".into()));
            }
            Ok(3.0 * k1 * k1 * (c * c - 2.0))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let v = pinched_threshold(PinchedKind::ScalarPinched { mean_vec_norm_sq: 10.0, c: 0.6 }).unwrap();
        assert!((v + 2.0).abs() < 1e-12);
        let v = pinched_threshold(PinchedKind::ConvexHypersurface { k1: 1.0, c: 2f64.sqrt() }).unwrap();
        assert!(v.abs() < 1e-12);
        let v = pinched_threshold(PinchedKind::ConvexHypersurface { k1: 1.0, c: 2.0 }).unwrap();
        assert_eq!(v, 6.0);
        assert!(pinched_threshold(PinchedKind::ScalarPinched { mean_vec_norm_sq: 1.0, c: -1.0 }).is_err());
    }
}
