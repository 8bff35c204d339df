use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

#[derive(Debug, Parser)]
#[command(name = "cmcix", version, about = "Jacobi spectra and harmonic-field index checks for CMC surfaces")]
pub struct Cli {
    /// Worker threads (0 or unset: all cores).
    #[arg(long, global = true, env = "CMCIX_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a model surface and write it as IMESH.
    Mesh(MeshArgs),
    /// Twisted Jacobi spectrum of a mesh file.
    Spectrum(SpectrumArgs),
    /// Run the harmonic-field checks on a mesh file.
    Verify(VerifyArgs),
    /// Mean-curvature threshold of an ambient space.
    Threshold(ThresholdArgs),
}

/// Space parameters; only those the chosen space needs are read.
#[derive(Debug, Args, Clone, Default)]
pub struct SpaceArgs {
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub r1: Option<f64>,
    #[arg(long)]
    pub r2: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub k1: Option<f64>,
    #[arg(long)]
    pub l1: Option<f64>,
    #[arg(long)]
    pub k2: Option<f64>,
    #[arg(long)]
    pub l2: Option<f64>,
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    /// Extra space parameters as a JSON object.
    #[arg(long, value_name = "JSON")]
    pub space_params: Option<String>,
}

#[derive(Debug, Args)]
pub struct MeshArgs {
    #[arg(long)]
    pub space: String,
    #[arg(long)]
    pub family: String,
    #[arg(long, default_value_t = 64)]
    pub res: usize,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Recorded in the header; the generators themselves are deterministic.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub space_args: SpaceArgs,
    #[arg(long)]
    pub radius: Option<f64>,
    /// Height of a slice.
    #[arg(long)]
    pub t: Option<f64>,
    /// Mean curvature of a spherical cap.
    #[arg(long = "H")]
    pub cap_h: Option<f64>,
    #[arg(long)]
    pub inner: Option<f64>,
    #[arg(long)]
    pub outer: Option<f64>,
    #[arg(long)]
    pub major: Option<f64>,
    #[arg(long)]
    pub minor: Option<f64>,
    /// Extra family parameters as a JSON object.
    #[arg(long, value_name = "JSON")]
    pub family_params: Option<String>,
}

#[derive(Debug, Args, Clone)]
pub struct SolverArgs {
    /// Number of eigenpairs requested first; grown until the negative part is complete.
    #[arg(long, default_value_t = 8)]
    pub k: usize,
    /// Relative factor of the null-mode margin.
    #[arg(long, default_value_t = 1e-6)]
    pub eps_rel: f64,
    /// Diagonal mass and potential.
    #[arg(long)]
    pub lumped: bool,
    /// Add a constant to the potential (negative tests).
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub potential_offset: f64,
    /// Drop the volume constraint.
    #[arg(long, hide = true)]
    pub unconstrained: bool,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    pub mesh: PathBuf,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub mesh: PathBuf,
    /// Comma-separated subset of admissible,coordinate,keystep,pencil,bound,concentration.
    #[arg(long, value_delimiter = ',')]
    pub checks: Vec<String>,
    /// Values of eta for the concentration check.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub eta: Vec<f64>,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Print a table instead of JSON.
    #[arg(long)]
    pub table: bool,
    /// Write the per-edge harmonic basis next to the report.
    #[arg(long)]
    pub export_harmonic: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    /// A catalog space, `hexagonal`, or `pinched`.
    #[arg(long)]
    pub space: String,
    #[command(flatten)]
    pub space_args: SpaceArgs,
    #[arg(long = "H", allow_hyphen_values = true)]
    pub mean_curvature: Option<f64>,
    /// Pinching constant.
    #[arg(long = "C")]
    pub pinch: Option<f64>,
    /// `scalar` (R > C|H|^2) or `convex` (hypersurface of R^4).
    #[arg(long, default_value = "scalar")]
    pub pinch_kind: String,
    /// sup |H_M|^2 for the scalar pinching.
    #[arg(long, default_value_t = 1.0)]
    pub mean_vec_norm_sq: f64,
    /// Smallest principal curvature for the convex pinching.
    #[arg(long = "kmin", default_value_t = 1.0)]
    pub kmin: f64,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

fn parse_object(text: &Option<String>, what: &str) -> Result<Map<String, Value>, String> {
    match text {
        None => Ok(Map::new()),
        Some(t) => match serde_json::from_str::<Value>(t) {
            Ok(Value::Object(m)) => Ok(m),
            Ok(_) => Err(format!("{what} must be a JSON object")),
            Err(e) => Err(format!("{what}: {e}")),
        },
    }
}

fn put(m: &mut Map<String, Value>, key: &str, v: Option<f64>) {
    if let Some(v) = v {
        m.insert(key.into(), json!(v));
    }
}

impl SpaceArgs {
    pub fn to_json(&self) -> Result<Value, String> {
        let mut m = parse_object(&self.space_params, "--space-params")?;
        for (k, v) in [
            ("r", self.r),
            ("r1", self.r1),
            ("r2", self.r2),
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("k1", self.k1),
            ("l1", self.l1),
            ("k2", self.k2),
            ("l2", self.l2),
            ("kappa", self.kappa),
            ("tau", self.tau),
        ] {
            put(&mut m, k, v);
        }
        Ok(Value::Object(m))
    }
}

impl MeshArgs {
    pub fn family_json(&self) -> Result<Value, String> {
        let mut m = parse_object(&self.family_params, "--family-params")?;
        for (k, v) in [
            ("radius", self.radius),
            ("t", self.t),
            ("H", self.cap_h),
            ("inner", self.inner),
            ("outer", self.outer),
            ("major", self.major),
            ("minor", self.minor),
        ] {
            put(&mut m, k, v);
        }
        Ok(Value::Object(m))
    }
}
