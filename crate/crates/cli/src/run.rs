use std::path::Path;

use cmc_index_lab::ambient::{catalog_space, AmbientSpace, PinchedKind, TorusEmbeddingData};
use cmc_index_lab::hodge::{harmonic_fields, DiscreteSurface};
use cmc_index_lab::imesh::{load_imesh, write_edge_table, write_imesh};
use cmc_index_lab::jacobi::{assemble, complete_spectrum, EpsilonRule, JacobiOptions, SpectrumOptions};
use cmc_index_lab::surface::generate_surface;
use cmc_index_lab::verify::{
    provenance, threshold_report, verify_surface, CheckKind, ThresholdTarget, Verdict, VerifyOptions,
};
use cmc_index_lab::Error;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{MeshArgs, SolverArgs, SpaceArgs, SpectrumArgs, ThresholdArgs, VerifyArgs};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 2;
pub const EXIT_NOT_APPLICABLE: i32 = 3;
pub const EXIT_INPUT: i32 = 4;
pub const EXIT_NUMERICAL: i32 = 5;

/// Error reported as JSON on stderr.
#[derive(Debug, Serialize)]
pub struct CliError {
    pub error: String,
    pub message: String,
    #[serde(skip)]
    pub exit: i32,
}

impl CliError {
    pub fn input(kind: &str, message: impl Into<String>) -> Self {
        CliError { error: kind.into(), message: message.into(), exit: EXIT_INPUT }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let (kind, exit) = match &e {
            Error::InvalidParameter(_) => ("invalid-parameter", EXIT_INPUT),
            Error::WindowViolation(_) => ("window-violation", EXIT_INPUT),
            Error::NoPositiveSolution(_) => ("no-positive-solution", EXIT_INPUT),
            Error::ClosedFormOnly(_) => ("closed-form-only", EXIT_INPUT),
            Error::FamilySpaceMismatch { .. } => ("family-space-mismatch", EXIT_INPUT),
            Error::RadiusTooLarge(_) => ("radius-too-large", EXIT_INPUT),
            Error::DegenerateTriangle { .. } => ("degenerate-triangle", EXIT_INPUT),
            Error::InvalidMesh(_) => ("invalid-mesh", EXIT_INPUT),
            Error::NonManifold(_) => ("non-manifold", EXIT_INPUT),
            Error::Parse { .. } => ("parse", EXIT_INPUT),
            Error::Io(_) => ("io", EXIT_INPUT),
            Error::NormalUndefined(_) => ("normal-undefined", EXIT_NUMERICAL),
            Error::MissingBoundaryForm(_) => ("missing-boundary-form", EXIT_NUMERICAL),
            Error::Singular(_) => ("singular", EXIT_NUMERICAL),
            Error::NoConvergence(_) => ("no-convergence", EXIT_NUMERICAL),
        };
        CliError { error: kind.into(), message: e.to_string(), exit }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// What a command prints, and its exit code.
pub struct Outcome {
    pub body: String,
    pub exit: i32,
}

pub fn exit_code(v: Verdict) -> i32 {
    match v {
        Verdict::Pass => EXIT_PASS,
        Verdict::Fail => EXIT_FAIL,
        Verdict::NotApplicable => EXIT_NOT_APPLICABLE,
    }
}

/// Everything needed to rerun a command.
#[derive(Debug, Serialize)]
pub struct RunConfig {
    pub command: &'static str,
    pub input: Option<String>,
    pub space: Option<String>,
    pub space_params: Option<Value>,
    pub family: Option<String>,
    pub family_params: Option<Value>,
    pub resolution: Option<usize>,
    pub k: Option<usize>,
    pub tolerances: Value,
    pub output: Option<String>,
    pub seed: u64,
}

impl RunConfig {
    fn new(command: &'static str) -> Self {
        RunConfig {
            command,
            input: None,
            space: None,
            space_params: None,
            family: None,
            family_params: None,
            resolution: None,
            k: None,
            tolerances: Value::Null,
            output: None,
            seed: 0,
        }
    }
}

fn path_str(p: Option<&Path>) -> Option<String> {
    p.map(|p| p.display().to_string())
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

fn emit(body: String, output: Option<&Path>) -> CliResult<String> {
    match output {
        Some(p) => {
            std::fs::write(p, &body).map_err(Error::from)?;
            Ok(String::new())
        }
        None => Ok(body),
    }
}

fn default_params(space: &str) -> Value {
    match space {
        "s2xr" => json!({ "r": 1.0 }),
        "t3" => json!({ "r1": 1.0, "r2": 1.0 }),
        "t2xr-rect" => json!({ "beta": 1.0 }),
        _ => json!({}),
    }
}

/// Resolves a space name and CLI parameters, filling defaults; `hexagonal`
/// names the hexagonal lattice with the smallest admissible integers.
pub fn resolve_space(name: &str, args: &SpaceArgs) -> CliResult<(AmbientSpace, Value)> {
    let given = args.to_json().map_err(|m| CliError::input("invalid-parameter", m))?;
    let (name, mut params) = if name == "hexagonal" {
        let t = TorusEmbeddingData::hexagonal()?;
        ("t2xr", json!({"alpha": t.alpha, "beta": t.beta, "k1": t.k[0], "l1": t.l[0], "k2": t.k[1], "l2": t.l[1]}))
    } else {
        (name, default_params(name))
    };
    if let (Value::Object(p), Value::Object(g)) = (&mut params, given) {
        p.extend(g);
    }
    let space = catalog_space(name, &params)?;
    let params = space.spec().params_json();
    Ok((space, params))
}

pub fn cmd_mesh(a: &MeshArgs) -> CliResult<Outcome> {
    let (space, space_params) = resolve_space(&a.space, &a.space_args)?;
    let fp = a.family_json().map_err(|m| CliError::input("invalid-parameter", m))?;
    let mut mesh = generate_surface(&space, &a.family, &fp, a.res)?;
    mesh.tag.seed = a.seed;
    let text = write_imesh(&mesh);
    let body = match &a.output {
        Some(p) => {
            std::fs::write(p, &text).map_err(Error::from)?;
            let (g, r) = mesh.genus_and_boundary()?;
            let mut cfg = RunConfig::new("mesh");
            cfg.space = Some(space.name().into());
            cfg.space_params = Some(space_params);
            cfg.family = Some(mesh.tag.family.clone());
            cfg.family_params = Some(mesh.tag.params.clone());
            cfg.resolution = Some(a.res);
            cfg.output = path_str(Some(p));
            cfg.seed = a.seed;
            to_json(&json!({
                "run": cfg,
                "vertices": mesh.n_vertices(),
                "faces": mesh.n_faces(),
                "genus": g,
                "boundary_components": r,
            }))
        }
        None => text,
    };
    Ok(Outcome { body, exit: EXIT_PASS })
}

fn spectrum_options(s: &SolverArgs) -> CliResult<(SpectrumOptions, JacobiOptions)> {
    if s.k == 0 {
        return Err(CliError::input("invalid-parameter", "--k must be positive"));
    }
    if !(s.eps_rel.is_finite() && s.eps_rel >= 0.0) {
        return Err(CliError::input("invalid-parameter", "--eps-rel must be nonnegative"));
    }
    if !s.potential_offset.is_finite() {
        return Err(CliError::input("invalid-parameter", "--potential-offset must be finite"));
    }
    let spec = SpectrumOptions {
        k: s.k,
        twisted: !s.unconstrained,
        epsilon: EpsilonRule::Discretization(s.eps_rel),
        ..SpectrumOptions::default()
    };
    Ok((spec, JacobiOptions { lumped: s.lumped, potential_offset: s.potential_offset }))
}

fn solver_config(command: &'static str, mesh: &Path, s: &SolverArgs, out: Option<&Path>, surf: &DiscreteSurface) -> RunConfig {
    let mut cfg = RunConfig::new(command);
    cfg.input = path_str(Some(mesh));
    cfg.space = Some(surf.mesh.space.name().into());
    cfg.space_params = Some(surf.mesh.space.spec().params_json());
    cfg.family = Some(surf.mesh.tag.family.clone());
    cfg.family_params = Some(surf.mesh.tag.params.clone());
    cfg.resolution = Some(surf.mesh.tag.resolution);
    cfg.k = Some(s.k);
    cfg.tolerances = json!({
        "eps_rel": s.eps_rel,
        "lumped": s.lumped,
        "potential_offset": s.potential_offset,
        "twisted": !s.unconstrained,
    });
    cfg.output = path_str(out);
    cfg.seed = surf.mesh.tag.seed;
    cfg
}

fn load_surface(p: &Path) -> CliResult<DiscreteSurface> {
    Ok(DiscreteSurface::new(load_imesh(p)?)?)
}

pub fn cmd_spectrum(a: &SpectrumArgs) -> CliResult<Outcome> {
    let (sopts, jopts) = spectrum_options(&a.solver)?;
    let surf = load_surface(&a.mesh)?;
    let asm = assemble(&surf, jopts)?;
    let spec = complete_spectrum(&asm, &sopts)?;
    let report = json!({
        "run": solver_config("spectrum", &a.mesh, &a.solver, a.output.as_deref(), &surf),
        "provenance": provenance(&surf),
        "spectrum": spec.record(),
        "robin_edges": asm.robin_edges,
        "free_edges": asm.free_edges,
    });
    Ok(Outcome { body: emit(to_json(&report), a.output.as_deref())?, exit: EXIT_PASS })
}

pub fn cmd_verify(a: &VerifyArgs) -> CliResult<Outcome> {
    let (spectrum, jacobi) = spectrum_options(&a.solver)?;
    let checks = if a.checks.is_empty() {
        CheckKind::ALL.to_vec()
    } else {
        a.checks.iter().map(|c| c.trim().parse::<CheckKind>()).collect::<Result<Vec<_>, _>>()?
    };
    let etas = if a.eta.is_empty() { vec![0.0] } else { a.eta.clone() };
    if etas.iter().any(|e| !e.is_finite()) {
        return Err(CliError::input("invalid-parameter", "--eta must be finite"));
    }
    let surf = load_surface(&a.mesh)?;
    let opts = VerifyOptions { checks, spectrum, jacobi, etas };
    let report = verify_surface(&surf, &opts)?;
    if let Some(p) = &a.export_harmonic {
        let basis = harmonic_fields(&surf)?;
        std::fs::write(p, write_edge_table(&surf.topo.edges, &basis)).map_err(Error::from)?;
    }
    let body = if a.table {
        report.table()
    } else {
        to_json(&json!({
            "run": solver_config("verify", &a.mesh, &a.solver, a.output.as_deref(), &surf),
            "report": report,
        }))
    };
    let body = if a.table { body } else { emit(body, a.output.as_deref())? };
    Ok(Outcome { body, exit: exit_code(report.summary) })
}

pub fn cmd_threshold(a: &ThresholdArgs) -> CliResult<Outcome> {
    let target = match a.space.as_str() {
        "hexagonal" => ThresholdTarget::Hexagonal,
        "pinched" => {
            let c = a.pinch.ok_or_else(|| CliError::input("invalid-parameter", "pinched needs --C"))?;
            ThresholdTarget::Pinched(match a.pinch_kind.as_str() {
                "scalar" => PinchedKind::ScalarPinched { mean_vec_norm_sq: a.mean_vec_norm_sq, c },
                "convex" => PinchedKind::ConvexHypersurface { k1: a.kmin, c },
                other => return Err(CliError::input("invalid-parameter", format!("unknown pinching '{other}'"))),
            })
        }
        name => ThresholdTarget::Space(resolve_space(name, &a.space_args)?.0),
    };
    if a.mean_curvature.is_some_and(|h| !h.is_finite()) {
        return Err(CliError::input("invalid-parameter", "--H must be finite"));
    }
    let report = threshold_report(&target, a.mean_curvature)?;
    let exit = match report.applies {
        Some(false) => EXIT_NOT_APPLICABLE,
        _ => EXIT_PASS,
    };
    let mut cfg = RunConfig::new("threshold");
    cfg.space = Some(a.space.clone());
    cfg.space_params = Some(report.params.clone());
    cfg.output = path_str(a.output.as_deref());
    let body = to_json(&json!({ "run": cfg, "threshold": report, "check": report.item() }));
    Ok(Outcome { body: emit(body, a.output.as_deref())?, exit })
}
