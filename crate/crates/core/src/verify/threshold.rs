use serde::Serialize;
use serde_json::json;

use super::{CheckItem, Verdict};
use crate::ambient::{hexagonal_candidate, pinched_threshold, AmbientSpace, CandidateCheck, PinchedKind, SpaceSpec, TorusEmbeddingData};
use crate::error::Result;

/// What a threshold is asked for.
#[derive(Debug, Clone)]
pub enum ThresholdTarget {
    Space(AmbientSpace),
    /// Hexagonal `T²×ℝ` with the smallest admissible integers, plus the quoted radii.
    Hexagonal,
    Pinched(PinchedKind),
}

#[derive(Debug, Clone, Serialize)]
pub struct ThresholdReport {
    pub target: String,
    pub params: serde_json::Value,
    /// Signed threshold before the "none required" cut.
    pub raw: f64,
    /// `None` when no condition on `H` is needed.
    pub threshold_h2: Option<f64>,
    pub h: Option<f64>,
    /// Whether the genus-linear index bound applies at `h` (at every `h` when
    /// `threshold_h2` is `None`).
    pub applies: Option<bool>,
    /// Embedding dimension in the bound `index ≥ g/d`.
    pub d: Option<usize>,
    pub note: Option<String>,
    pub candidate: Option<CandidateCheck>,
}

impl ThresholdReport {
    pub fn item(&self) -> CheckItem {
        let verdict = match self.applies {
            Some(true) => Verdict::Pass,
            Some(false) => Verdict::NotApplicable,
            None if self.threshold_h2.is_none() => Verdict::Pass,
            None => Verdict::NotApplicable,
        };
        let residual = self.candidate.as_ref().map_or(self.raw, |c| c.residual);
        CheckItem::new("threshold", "mean curvature threshold for the genus bound", residual, self.threshold_h2.unwrap_or(0.0), verdict)
            .with_witness(serde_json::to_value(self).unwrap_or(serde_json::Value::Null))
            .with_note(self.note.clone())
    }
}

fn decide(raw: f64, h: Option<f64>) -> Option<bool> {
    if raw < 0.0 {
        return Some(true);
    }
    h.map(|h| h * h > raw)
}

pub fn threshold_report(target: &ThresholdTarget, h: Option<f64>) -> Result<ThresholdReport> {
    Ok(match target {
        ThresholdTarget::Space(space) => {
            let raw = space.threshold_h2_raw();
            let mut note = None;
            if let SpaceSpec::S2xR { .. } = space.spec() {
                note = Some(
                    "threshold 0: applies whenever H != 0; for H = 0 the closed minimal surfaces are \
                     the slices S^2 x {t} by the maximum principle, so stable ones are spheres"
                        .to_string(),
                );
            }
            if let SpaceSpec::Berger { .. } = space.spec() {
                note = Some("restricted tangent-plane bound; valid for every H when negative".into());
            }
            if raw < 0.0 {
                note = Some(match note {
                    Some(n) => format!("none required; {n}"),
                    None => "none required".into(),
                });
            }
            let d = match space.spec() {
                SpaceSpec::Berger { .. } => None,
                _ => Some(space.d()),
            };
            ThresholdReport {
                target: space.name().into(),
                params: space.spec().params_json(),
                raw,
                threshold_h2: space.threshold_h2(),
                h,
                applies: decide(raw, h),
                d,
                note,
                candidate: None,
            }
        }
        ThresholdTarget::Hexagonal => {
            let t = TorusEmbeddingData::hexagonal()?;
            let raw = t.sff_norm_sq();
            let check = t.check_candidate(hexagonal_candidate());
            ThresholdReport {
                target: "hexagonal".into(),
                params: json!({
                    "alpha": t.alpha, "beta": t.beta,
                    "k1": t.k[0], "l1": t.l[0], "k2": t.k[1], "l2": t.l[1],
                    "radii_sq": t.radii_sq,
                }),
                raw,
                threshold_h2: (raw > 0.0).then_some(raw),
                h,
                applies: decide(raw, h),
                d: Some(t.ambient_dim()),
                note: Some(format!(
                    "quoted radii give isometry residual {:.3e} and sum {:.6e}; threshold uses the solved radii",
                    check.residual, check.sff_norm_sq
                )),
                candidate: Some(check),
            }
        }
        ThresholdTarget::Pinched(kind) => {
            let raw = pinched_threshold(*kind)?;
            ThresholdReport {
                target: "pinched".into(),
                params: serde_json::to_value(kind).unwrap_or(serde_json::Value::Null),
                raw,
                threshold_h2: (raw > 0.0).then_some(raw),
                h,
                applies: decide(raw, h),
                d: None,
                note: (raw <= 0.0).then(|| "none required".to_string()),
                candidate: None,
            }
        }
    })
}
