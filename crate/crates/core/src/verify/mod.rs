//! Numerical checks of the harmonic-field index estimates on a discrete surface.

mod checks;
mod pencil;
mod threshold;

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use checks::{
    check_admissibility, check_coordinate_identity, check_pointwise_identity, coordinate_integrals, coordinate_sides,
    CoordinateSides, ADMISSIBILITY_TOL, COORDINATE_TOL, KEYSTEP_TOL,
};
pub use pencil::{
    check_pencil, concentration_count, hypothesis_pencil, max_generalized_eigenvalue, verify_index_bound,
    zero_boundary_mean_subspace, HypothesisPencil, ZeroMeanSubspace,
};
pub use threshold::{threshold_report, ThresholdReport, ThresholdTarget};

use crate::error::{Error, Result};
use crate::hodge::{harmonic_fields, DiscreteSurface};
use crate::jacobi::{assemble, complete_spectrum, JacobiOptions, SpectrumOptions, TwistedSpectrum};
use crate::surface::Stats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    NotApplicable,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::NotApplicable => "not-applicable",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckItem {
    pub name: String,
    /// The statement being checked.
    pub anchor: String,
    pub residual: f64,
    pub threshold: f64,
    pub verdict: Verdict,
    pub witness: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

impl CheckItem {
    pub fn new(name: &str, anchor: &str, residual: f64, threshold: f64, verdict: Verdict) -> Self {
        CheckItem {
            name: name.into(),
            anchor: anchor.into(),
            residual,
            threshold,
            verdict,
            witness: serde_json::Value::Null,
            note: None,
        }
    }

    pub fn with_witness(mut self, w: serde_json::Value) -> Self {
        self.witness = w;
        self
    }

    pub fn with_note(mut self, note: Option<String>) -> Self {
        self.note = note;
        self
    }
}

/// Selectable checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    Admissible,
    Coordinate,
    Keystep,
    Pencil,
    Bound,
    Concentration,
}

impl CheckKind {
    pub const ALL: [CheckKind; 6] = [
        CheckKind::Admissible,
        CheckKind::Coordinate,
        CheckKind::Keystep,
        CheckKind::Pencil,
        CheckKind::Bound,
        CheckKind::Concentration,
    ];
}

impl FromStr for CheckKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "admissible" => CheckKind::Admissible,
            "coordinate" => CheckKind::Coordinate,
            "keystep" => CheckKind::Keystep,
            "pencil" => CheckKind::Pencil,
            "bound" => CheckKind::Bound,
            "concentration" => CheckKind::Concentration,
            other => return Err(Error::InvalidParameter(format!("unknown check '{other}'"))),
        })
    }
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub checks: Vec<CheckKind>,
    pub spectrum: SpectrumOptions,
    pub jacobi: JacobiOptions,
    /// Values of `η` for the concentration check.
    pub etas: Vec<f64>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            checks: CheckKind::ALL.to_vec(),
            spectrum: SpectrumOptions::default(),
            jacobi: JacobiOptions::default(),
            etas: vec![0.0],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Provenance {
    pub space: String,
    pub space_params: serde_json::Value,
    pub family: String,
    pub family_params: serde_json::Value,
    pub resolution: usize,
    pub seed: u64,
    pub vertices: usize,
    pub faces: usize,
    pub conventions: serde_json::Value,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeometrySummary {
    pub genus: usize,
    pub r: usize,
    #[serde(rename = "H_stats")]
    pub h_stats: Stats,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumSummary {
    pub eigenvalues: Vec<f64>,
    pub index: usize,
    pub nullity: usize,
    pub eps: f64,
    pub complete: bool,
}

impl From<&TwistedSpectrum> for SpectrumSummary {
    fn from(s: &TwistedSpectrum) -> Self {
        SpectrumSummary {
            eigenvalues: s.eigenvalues.clone(),
            index: s.index,
            nullity: s.nullity,
            eps: s.epsilon,
            complete: s.complete,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub provenance: Provenance,
    pub geometry: GeometrySummary,
    pub spectrum: Option<SpectrumSummary>,
    pub checks: Vec<CheckItem>,
    pub thresholds: Option<ThresholdReport>,
    pub summary: Verdict,
}

/// Fail if any item fails, pass if any passes, otherwise not applicable.
pub fn summarize(items: &[CheckItem]) -> Verdict {
    if items.iter().any(|i| i.verdict == Verdict::Fail) {
        Verdict::Fail
    } else if items.iter().any(|i| i.verdict == Verdict::Pass) {
        Verdict::Pass
    } else {
        Verdict::NotApplicable
    }
}

pub fn provenance(s: &DiscreteSurface) -> Provenance {
    Provenance {
        space: s.mesh.space.name().into(),
        space_params: s.mesh.space.spec().params_json(),
        family: s.mesh.tag.family.clone(),
        family_params: s.mesh.tag.params.clone(),
        resolution: s.mesh.tag.resolution,
        seed: s.mesh.tag.seed,
        vertices: s.mesh.n_vertices(),
        faces: s.mesh.n_faces(),
        conventions: serde_json::json!({
            "mean_curvature": "trace",
            "integer_bounds": "ceiling of the real bound",
            "eigenvalue_counts": "strictly below eta minus epsilon",
        }),
    }
}

/// Runs the selected checks on one surface.
pub fn verify_surface(s: &DiscreteSurface, opts: &VerifyOptions) -> Result<VerificationReport> {
    let want = |k: CheckKind| opts.checks.contains(&k);
    let with_boundary = s.has_boundary();
    let basis = harmonic_fields(s)?;
    let needs_spectrum = want(CheckKind::Bound) || want(CheckKind::Concentration);
    let needs_pencil = needs_spectrum || want(CheckKind::Pencil);
    let asm = if want(CheckKind::Coordinate) || needs_spectrum { Some(assemble(s, opts.jacobi)?) } else { None };

    let mut items = Vec::new();
    for kind in CheckKind::ALL {
        if !want(kind) {
            continue;
        }
        match kind {
            CheckKind::Admissible => items.push(check_admissibility(s, &basis)),
            CheckKind::Keystep => items.push(check_pointwise_identity(s, &basis)),
            CheckKind::Coordinate => {
                items.push(check_coordinate_identity(s, asm.as_ref().expect("assembled"), &basis, with_boundary)?)
            }
            _ => {}
        }
    }
    let pencil = if needs_pencil { Some(hypothesis_pencil(s, &basis, with_boundary)?) } else { None };
    let spectrum = match (&asm, needs_spectrum) {
        (Some(a), true) => Some(complete_spectrum(a, &opts.spectrum)?),
        _ => None,
    };
    if let Some(p) = &pencil {
        if want(CheckKind::Pencil) {
            items.push(check_pencil(p));
        }
        if let Some(sp) = &spectrum {
            if want(CheckKind::Bound) {
                items.push(verify_index_bound(s, sp, p));
            }
            if want(CheckKind::Concentration) {
                let sub = with_boundary.then(|| zero_boundary_mean_subspace(s, &basis).fields.len());
                for &eta in &opts.etas {
                    items.push(concentration_count(s, sp, p, eta, sub));
                }
            }
        }
    }

    // The estimates need the whole boundary on the ambient boundary.
    if with_boundary && asm.as_ref().map_or(false, |a| a.free_edges > 0) {
        for it in items.iter_mut().filter(|i| i.name == "bound" || i.name == "concentration") {
            it.verdict = Verdict::NotApplicable;
            it.note = Some(checks::OFF_BOUNDARY.into());
        }
    }
    let (genus, r) = s.genus_and_boundary();
    let h_stats = s.geom.h_stats();
    let thresholds = threshold_report(&ThresholdTarget::Space(s.mesh.space.clone()), Some(h_stats.mean)).ok();
    Ok(VerificationReport {
        provenance: provenance(s),
        geometry: GeometrySummary { genus, r, h_stats },
        spectrum: spectrum.as_ref().map(SpectrumSummary::from),
        summary: summarize(&items),
        checks: items,
        thresholds,
    })
}

impl VerificationReport {
    /// Plain-text table of the checks.
    pub fn table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{} / {} (res {}, g {}, r {})",
            self.provenance.space, self.provenance.family, self.provenance.resolution, self.geometry.genus, self.geometry.r
        );
        let _ = writeln!(out, "{:<14} {:>14} {:>14}  verdict", "check", "residual", "threshold");
        for c in &self.checks {
            let _ = writeln!(out, "{:<14} {:>14.6e} {:>14.6e}  {}", c.name, c.residual, c.threshold, c.verdict.as_str());
        }
        let _ = writeln!(out, "summary: {}", self.summary.as_str());
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn item(v: Verdict) -> CheckItem {
        CheckItem::new("x", "y", 0.0, 0.0, v)
    }

    #[test]
    fn summary_rules() {
        assert_eq!(summarize(&[]), Verdict::NotApplicable);
        assert_eq!(summarize(&[item(Verdict::NotApplicable), item(Verdict::Pass)]), Verdict::Pass);
        assert_eq!(summarize(&[item(Verdict::Fail), item(Verdict::Pass)]), Verdict::Fail);
        assert_eq!(summarize(&[item(Verdict::NotApplicable)]), Verdict::NotApplicable);
    }

    #[test]
    fn verdict_serialization() {
        assert_eq!(serde_json::to_string(&Verdict::NotApplicable).unwrap(), "\"not-applicable\"");
        for k in CheckKind::ALL {
            let s = serde_json::to_value(k).unwrap();
            assert_eq!(s.as_str().unwrap().parse::<CheckKind>().unwrap(), k);
        }
    }
}
