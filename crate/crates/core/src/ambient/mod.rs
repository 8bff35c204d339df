//! Catalog of ambient 3-manifolds embedded in Euclidean space.
//!
//! Every embedded space is a product of lines, round circles and round
//! spheres centred at the origin, possibly restricted to a linear subtorus
//! (the `T²×ℝ` family). That shape makes `B_M` explicit:
//! `B(X,Y) = -Σ_b ⟨X_b,Y_b⟩ p_b / ρ_b²` over curved blocks `b`.

mod threshold;
mod torus;

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix3};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use threshold::{pinched_threshold, PinchedKind};
pub use torus::{hexagonal_candidate, CandidateCheck, TorusEmbeddingData};

pub type Point = DVector<f64>;

/// Space identifier with its parameters, as stored in mesh headers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "space", content = "params")]
pub enum SpaceSpec {
    #[serde(rename = "r3")]
    R3,
    #[serde(rename = "unit-ball")]
    UnitBall,
    #[serde(rename = "s3")]
    S3,
    #[serde(rename = "s2xr")]
    S2xR { r: f64 },
    #[serde(rename = "t2xr")]
    T2xR {
        alpha: f64,
        beta: f64,
        k1: u32,
        l1: u32,
        k2: u32,
        l2: u32,
    },
    #[serde(rename = "t2xr-rect")]
    RectT2xR { beta: f64 },
    #[serde(rename = "t3")]
    T3 { r1: f64, r2: f64 },
    #[serde(rename = "berger")]
    Berger { kappa: f64, tau: f64 },
}

impl SpaceSpec {
    pub fn name(&self) -> &'static str {
        match self {
            SpaceSpec::R3 => "r3",
            SpaceSpec::UnitBall => "unit-ball",
            SpaceSpec::S3 => "s3",
            SpaceSpec::S2xR { .. } => "s2xr",
            SpaceSpec::T2xR { .. } => "t2xr",
            SpaceSpec::RectT2xR { .. } => "t2xr-rect",
            SpaceSpec::T3 { .. } => "t3",
            SpaceSpec::Berger { .. } => "berger",
        }
    }

    /// Parameters as a JSON object (empty for parameter-free spaces).
    pub fn params_json(&self) -> serde_json::Value {
        match serde_json::to_value(self) {
            Ok(serde_json::Value::Object(mut m)) => {
                m.remove("params").unwrap_or_else(|| serde_json::json!({}))
            }
            _ => serde_json::json!({}),
        }
    }
}

/// Pointwise curvature quantities of `M ⊂ ℝᵈ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureData {
    pub scalar: f64,
    pub sff_norm_sq: f64,
    pub mean_vec_norm_sq: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Block {
    Line,
    Circle(f64),
    Sphere(usize, f64),
}

impl Block {
    fn dim(self) -> usize {
        match self {
            Block::Line => 1,
            Block::Circle(_) => 2,
            Block::Sphere(m, _) => m,
        }
    }

    fn radius(self) -> Option<f64> {
        match self {
            Block::Line => None,
            Block::Circle(r) | Block::Sphere(_, r) => Some(r),
        }
    }
}

/// A catalog ambient space.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbientSpace {
    spec: SpaceSpec,
    blocks: Vec<Block>,
    torus: Option<TorusEmbeddingData>,
}

fn param(params: &serde_json::Value, key: &str) -> Result<f64> {
    params
        .get(key)
        .and_then(|v| v.as_f64())
        .ok_or_else(|| Error::InvalidParameter(format!("missing numeric parameter '{key}'")))
}

fn int_param(params: &serde_json::Value, key: &str) -> Result<u32> {
    let v = param(params, key)?;
    if v.fract() != 0.0 || v < 0.0 || v > u32::MAX as f64 {
        return Err(Error::InvalidParameter(format!("'{key}' must be a nonnegative integer")));
    }
    Ok(v as u32)
}

/// Builds a catalog space from its name and a JSON parameter object.
pub fn catalog_space(name: &str, params: &serde_json::Value) -> Result<AmbientSpace> {
    let spec = match name {
        "r3" => SpaceSpec::R3,
        "unit-ball" => SpaceSpec::UnitBall,
        "s3" => SpaceSpec::S3,
        "s2xr" => SpaceSpec::S2xR { r: param(params, "r")? },
        "t2xr" => SpaceSpec::T2xR {
            alpha: param(params, "alpha")?,
            beta: param(params, "beta")?,
            k1: int_param(params, "k1")?,
            l1: int_param(params, "l1")?,
            k2: int_param(params, "k2")?,
            l2: int_param(params, "l2")?,
        },
        "t2xr-rect" => SpaceSpec::RectT2xR { beta: param(params, "beta")? },
        "t3" => SpaceSpec::T3 { r1: param(params, "r1")?, r2: param(params, "r2")? },
        "berger" => SpaceSpec::Berger { kappa: param(params, "kappa")?, tau: param(params, "tau")? },
        other => return Err(Error::InvalidParameter(format!("unknown space '{other}'"))),
    };
    AmbientSpace::new(spec)
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
    }
}

impl AmbientSpace {
    pub fn new(spec: SpaceSpec) -> Result<Self> {
        let mut torus = None;
        let blocks = match spec {
            SpaceSpec::R3 | SpaceSpec::UnitBall => vec![Block::Line; 3],
            SpaceSpec::S3 => vec![Block::Sphere(4, 1.0)],
            SpaceSpec::S2xR { r } => {
                positive("r", r)?;
                vec![Block::Sphere(3, r), Block::Line]
            }
            SpaceSpec::T3 { r1, r2 } => {
                positive("r1", r1)?;
                positive("r2", r2)?;
                vec![Block::Circle(1.0), Block::Circle(r1), Block::Circle(r2)]
            }
            SpaceSpec::T2xR { alpha, beta, k1, l1, k2, l2 } => {
                let t = TorusEmbeddingData::solve(alpha, beta, k1, l1, k2, l2)?;
                let mut b: Vec<Block> =
                    t.radii()[..t.circles()].iter().map(|&c| Block::Circle(c)).collect();
                b.push(Block::Line);
                torus = Some(t);
                b
            }
            SpaceSpec::RectT2xR { beta } => {
                let t = TorusEmbeddingData::rectangular(beta)?;
                let r = t.radii();
                torus = Some(t);
                vec![Block::Circle(r[0]), Block::Circle(r[1]), Block::Line]
            }
            SpaceSpec::Berger { kappa, tau } => {
                positive("kappa", kappa)?;
                positive("tau", tau)?;
                if kappa - 4.0 * tau * tau <= 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "Berger sphere needs kappa - 4 tau^2 > 0, got {}",
                        kappa - 4.0 * tau * tau
                    )));
                }
                Vec::new()
            }
        };
        Ok(Self { spec, blocks, torus })
    }

    pub fn spec(&self) -> &SpaceSpec {
        &self.spec
    }

    pub fn name(&self) -> &'static str {
        self.spec.name()
    }

    /// Euclidean dimension of the embedding (nominal 8 for Berger spheres).
    pub fn d(&self) -> usize {
        if self.blocks.is_empty() {
            8
        } else {
            self.blocks.iter().map(|b| b.dim()).sum()
        }
    }

    pub fn torus(&self) -> Option<&TorusEmbeddingData> {
        self.torus.as_ref()
    }

    pub fn has_embedding(&self) -> bool {
        !self.blocks.is_empty()
    }

    fn require_embedding(&self) -> Result<()> {
        if self.has_embedding() {
            Ok(())
        } else {
            Err(Error::ClosedFormOnly(self.name().into()))
        }
    }

    pub fn has_boundary(&self) -> bool {
        matches!(self.spec, SpaceSpec::UnitBall)
    }

    /// Characteristic length of the chart, used to scale finite-difference steps.
    pub fn chart_scale(&self) -> f64 {
        match self.spec {
            SpaceSpec::S2xR { r } => r.max(1.0),
            SpaceSpec::T3 { r1, r2 } => 1f64.min(r1).min(r2),
            SpaceSpec::T2xR { .. } | SpaceSpec::RectT2xR { .. } => {
                self.torus.as_ref().map_or(1.0, |t| t.radii()[..t.circles()].iter().cloned().fold(1.0, f64::min))
            }
            _ => 1.0,
        }
    }

    /// Description of the chart and its identifications.
    pub fn chart_description(&self) -> String {
        match &self.spec {
            SpaceSpec::R3 => "(x,y,z) in R^3".into(),
            SpaceSpec::UnitBall => "(x,y,z) with x^2+y^2+z^2 <= 1".into(),
            SpaceSpec::S3 => "(eta, xi1, xi2) in [0,pi/2] x R/2piZ x R/2piZ".into(),
            SpaceSpec::S2xR { .. } => "(theta, phi, t) in [0,pi] x R/2piZ x R".into(),
            SpaceSpec::T3 { r1, r2 } => {
                format!("(x,y,z) in R^3 / (2pi Z x {}Z x {}Z)", 2.0 * PI * r1, 2.0 * PI * r2)
            }
            SpaceSpec::T2xR { .. } | SpaceSpec::RectT2xR { .. } => {
                let l = self.torus.as_ref().expect("torus data").lattice;
                format!("(u,v,t) in R^2/<({}, {}), ({}, {})> x R", l[0][0], l[0][1], l[1][0], l[1][1])
            }
            SpaceSpec::Berger { .. } => "no chart: closed-form curvature only".into(),
        }
    }

    /// Embedding map from chart coordinates.
    pub fn embed(&self, x: [f64; 3]) -> Result<Point> {
        self.require_embedding()?;
        let p = match self.spec {
            SpaceSpec::R3 | SpaceSpec::UnitBall => vec![x[0], x[1], x[2]],
            SpaceSpec::S3 => {
                let (se, ce) = x[0].sin_cos();
                vec![se * x[1].cos(), se * x[1].sin(), ce * x[2].cos(), ce * x[2].sin()]
            }
            SpaceSpec::S2xR { r } => {
                let (st, ct) = x[0].sin_cos();
                vec![r * st * x[1].cos(), r * st * x[1].sin(), r * ct, x[2]]
            }
            SpaceSpec::T3 { r1, r2 } => {
                let mut p = Vec::with_capacity(6);
                for (c, rho) in [(x[0], 1.0), (x[1], r1), (x[2], r2)] {
                    p.push(rho * (c / rho).cos());
                    p.push(rho * (c / rho).sin());
                }
                p
            }
            SpaceSpec::T2xR { .. } | SpaceSpec::RectT2xR { .. } => {
                let t = self.torus.as_ref().expect("torus data");
                let th = t.phases(x[0], x[1]);
                let c = t.radii();
                let mut p = Vec::with_capacity(t.ambient_dim());
                for i in 0..t.circles() {
                    p.push(c[i] * th[i].cos());
                    p.push(c[i] * th[i].sin());
                }
                p.push(x[2]);
                p
            }
            SpaceSpec::Berger { .. } => unreachable!(),
        };
        Ok(DVector::from_vec(p))
    }

    /// Analytic Jacobian `∂f/∂xₐ` (d×3).
    pub fn jacobian(&self, x: [f64; 3]) -> Result<DMatrix<f64>> {
        self.require_embedding()?;
        let d = self.d();
        let mut j = DMatrix::zeros(d, 3);
        match self.spec {
            SpaceSpec::R3 | SpaceSpec::UnitBall => j.fill_with_identity(),
            SpaceSpec::S3 => {
                let (se, ce) = x[0].sin_cos();
                let (s1, c1) = x[1].sin_cos();
                let (s2, c2) = x[2].sin_cos();
                j.set_column(0, &DVector::from_vec(vec![ce * c1, ce * s1, -se * c2, -se * s2]));
                j.set_column(1, &DVector::from_vec(vec![-se * s1, se * c1, 0.0, 0.0]));
                j.set_column(2, &DVector::from_vec(vec![0.0, 0.0, -ce * s2, ce * c2]));
            }
            SpaceSpec::S2xR { r } => {
                let (st, ct) = x[0].sin_cos();
                let (sp, cp) = x[1].sin_cos();
                j.set_column(0, &DVector::from_vec(vec![r * ct * cp, r * ct * sp, -r * st, 0.0]));
                j.set_column(1, &DVector::from_vec(vec![-r * st * sp, r * st * cp, 0.0, 0.0]));
                j[(3, 2)] = 1.0;
            }
            SpaceSpec::T3 { r1, r2 } => {
                for (a, (c, rho)) in [(x[0], 1.0), (x[1], r1), (x[2], r2)].into_iter().enumerate() {
                    j[(2 * a, a)] = -(c / rho).sin();
                    j[(2 * a + 1, a)] = (c / rho).cos();
                }
            }
            SpaceSpec::T2xR { .. } | SpaceSpec::RectT2xR { .. } => {
                let t = self.torus.as_ref().expect("torus data");
                let th = t.phases(x[0], x[1]);
                let c = t.radii();
                for i in 0..t.circles() {
                    let (s, co) = th[i].sin_cos();
                    j[(2 * i, 0)] = -c[i] * t.a[i] * s;
                    j[(2 * i + 1, 0)] = c[i] * t.a[i] * co;
                    j[(2 * i, 1)] = -c[i] * t.b[i] * s;
                    j[(2 * i + 1, 1)] = c[i] * t.b[i] * co;
                }
                j[(d - 1, 2)] = 1.0;
            }
            SpaceSpec::Berger { .. } => unreachable!(),
        }
        Ok(j)
    }

    /// Declared Riemannian metric in chart coordinates.
    pub fn chart_metric(&self, x: [f64; 3]) -> Result<Matrix3<f64>> {
        self.require_embedding()?;
        Ok(match self.spec {
            SpaceSpec::S3 => Matrix3::from_diagonal(&nalgebra::Vector3::new(
                1.0,
                x[0].sin().powi(2),
                x[0].cos().powi(2),
            )),
            SpaceSpec::S2xR { r } => Matrix3::from_diagonal(&nalgebra::Vector3::new(
                r * r,
                (r * x[0].sin()).powi(2),
                1.0,
            )),
            _ => Matrix3::identity(),
        })
    }

    /// Inverse chart: chart coordinates of an ambient point on `M`.
    pub fn chart_of(&self, p: &Point) -> Result<[f64; 3]> {
        self.require_embedding()?;
        if p.len() != self.d() {
            return Err(Error::InvalidParameter(format!(
                "point has dimension {}, space needs {}",
                p.len(),
                self.d()
            )));
        }
        Ok(match self.spec {
            SpaceSpec::R3 | SpaceSpec::UnitBall => [p[0], p[1], p[2]],
            SpaceSpec::S3 => [
                p[0].hypot(p[1]).atan2(p[2].hypot(p[3])),
                p[1].atan2(p[0]),
                p[3].atan2(p[2]),
            ],
            SpaceSpec::S2xR { .. } => [p[0].hypot(p[1]).atan2(p[2]), p[1].atan2(p[0]), p[3]],
            SpaceSpec::T3 { r1, r2 } => {
                let ang = |k: usize| p[2 * k + 1].atan2(p[2 * k]).rem_euclid(2.0 * PI);
                [ang(0), r1 * ang(1), r2 * ang(2)]
            }
            SpaceSpec::T2xR { .. } | SpaceSpec::RectT2xR { .. } => {
                let t = self.torus.as_ref().expect("torus data");
                let ang = |k: usize| p[2 * k + 1].atan2(p[2 * k]);
                let tcoord = p[self.d() - 1];
                if t.rectangular {
                    [ang(0) / t.a[0], ang(1) / t.b[1], tcoord]
                } else {
                    let v = ang(2) / t.b[2];
                    let k1 = t.k[0].max(1);
                    let base = (ang(0) - t.b[0] * v) / t.a[0];
                    let mut best = (f64::INFINITY, base);
                    for jj in 0..k1 {
                        let u = base + jj as f64 / k1 as f64;
                        let th = t.a[1] * u + t.b[1] * v - ang(1);
                        let err = (th - 2.0 * PI * (th / (2.0 * PI)).round()).abs();
                        if err < best.0 {
                            best = (err, u);
                        }
                    }
                    [best.1, v, tcoord]
                }
            }
            SpaceSpec::Berger { .. } => unreachable!(),
        })
    }

    /// Nearest-point projection onto the embedded `M`.
    pub fn project_to_space(&self, p: &Point) -> Result<Point> {
        self.require_embedding()?;
        if self.torus.is_some() {
            return self.embed(self.chart_of(p)?);
        }
        let mut q = p.clone();
        let mut o = 0;
        for b in &self.blocks {
            let m = b.dim();
            if let Some(r) = b.radius() {
                let n = q.rows(o, m).norm();
                if n > 0.0 {
                    q.rows_mut(o, m).scale_mut(r / n);
                }
            }
            o += m;
        }
        Ok(q)
    }

    /// Distance-like defect of `p` from `M`, relative to the chart scale.
    pub fn membership_defect(&self, p: &Point) -> Result<f64> {
        let q = self.project_to_space(p)?;
        let scale = p.norm().max(self.chart_scale());
        Ok((p - q).norm() / scale)
    }

    /// Orthonormal basis of `T_pM` as columns (d×3).
    pub fn tangent_basis(&self, p: &Point) -> Result<DMatrix<f64>> {
        self.require_embedding()?;
        let d = self.d();
        if self.torus.is_some() {
            let j = self.jacobian(self.chart_of(p)?)?;
            let cols: Vec<Point> = (0..3).map(|a| j.column(a).into_owned()).collect();
            return Ok(stack(&gram_schmidt(cols, 1e-12)));
        }
        let mut cols = Vec::with_capacity(3);
        let mut o = 0;
        for b in &self.blocks {
            let m = b.dim();
            match b {
                Block::Line => {
                    let mut e = DVector::zeros(d);
                    e[o] = 1.0;
                    cols.push(e);
                }
                Block::Circle(_) => {
                    let n = p.rows(o, 2).norm();
                    let mut e = DVector::zeros(d);
                    e[o] = -p[o + 1] / n;
                    e[o + 1] = p[o] / n;
                    cols.push(e);
                }
                Block::Sphere(_, _) => {
                    let pb: Point = p.rows(o, m).into_owned();
                    for c in sphere_complement(&pb) {
                        let mut e = DVector::zeros(d);
                        e.rows_mut(o, m).copy_from(&c);
                        cols.push(e);
                    }
                }
            }
            o += m;
        }
        Ok(stack(&cols))
    }

    /// Orthogonal projection of `v` onto `T_pM`.
    pub fn project_tangent(&self, p: &Point, v: &Point) -> Result<Point> {
        let t = self.tangent_basis(p)?;
        Ok(&t * (t.transpose() * v))
    }

    /// Closed-form second fundamental form `B_M(X,Y)` at `p`.
    pub fn sff(&self, p: &Point, x: &Point, y: &Point) -> Result<Point> {
        self.require_embedding()?;
        let mut out = DVector::zeros(self.d());
        let mut o = 0;
        for b in &self.blocks {
            let m = b.dim();
            if let Some(r) = b.radius() {
                let c = -x.rows(o, m).dot(&y.rows(o, m)) / (r * r);
                let pb = p.rows(o, m).into_owned();
                out.rows_mut(o, m).axpy(c, &pb, 0.0);
            }
            o += m;
        }
        Ok(out)
    }

    /// `B_M` from central second differences of the embedding in chart directions
    /// `xc`, `yc`, followed by projection onto the normal space.
    pub fn sff_finite_difference(&self, x: [f64; 3], xc: [f64; 3], yc: [f64; 3]) -> Result<Point> {
        let h = f64::EPSILON.powf(0.25) * self.chart_scale();
        let shift = |s: f64, t: f64| [0, 1, 2].map(|a| x[a] + h * (s * xc[a] + t * yc[a]));
        let d2 = (self.embed(shift(1.0, 1.0))? - self.embed(shift(1.0, -1.0))?
            - self.embed(shift(-1.0, 1.0))?
            + self.embed(shift(-1.0, -1.0))?)
            / (4.0 * h * h);
        let p = self.embed(x)?;
        let t = self.tangent_basis(&p)?;
        Ok(&d2 - &t * (t.transpose() * &d2))
    }

    /// Pullback of the Euclidean metric by central first differences.
    pub fn pullback_metric_fd(&self, x: [f64; 3]) -> Result<Matrix3<f64>> {
        let h = f64::EPSILON.powf(1.0 / 3.0) * self.chart_scale();
        let mut cols = Vec::with_capacity(3);
        for a in 0..3 {
            let mut xp = x;
            let mut xm = x;
            xp[a] += h;
            xm[a] -= h;
            cols.push((self.embed(xp)? - self.embed(xm)?) / (2.0 * h));
        }
        Ok(Matrix3::from_fn(|a, b| cols[a].dot(&cols[b])))
    }

    /// Curvature quantities at `p` from the closed-form `B_M`.
    pub fn curvature_at(&self, p: &Point) -> Result<CurvatureData> {
        let t = self.tangent_basis(p)?;
        let e: Vec<Point> = (0..3).map(|a| t.column(a).into_owned()).collect();
        let mut sff_norm_sq = 0.0;
        let mut hv = DVector::zeros(self.d());
        for a in 0..3 {
            for b in 0..3 {
                let bab = self.sff(p, &e[a], &e[b])?;
                sff_norm_sq += bab.norm_squared();
                if a == b {
                    hv += bab;
                }
            }
        }
        Ok(CurvatureData {
            scalar: self.scalar_curvature(),
            sff_norm_sq,
            mean_vec_norm_sq: hv.norm_squared(),
        })
    }

    /// Closed-form scalar curvature (constant on every catalog space).
    pub fn scalar_curvature(&self) -> f64 {
        match self.spec {
            SpaceSpec::S3 => 6.0,
            SpaceSpec::S2xR { r } => 2.0 / (r * r),
            SpaceSpec::Berger { kappa, tau } => 2.0 * (kappa - tau * tau),
            _ => 0.0,
        }
    }

    /// Closed-form `Ric_M(n,n)` for a unit tangent `n` at `p`.
    pub fn ricci(&self, p: &Point, n: &Point) -> Result<f64> {
        self.require_embedding()?;
        let _ = p;
        Ok(match self.spec {
            SpaceSpec::S3 => 2.0 * n.norm_squared(),
            SpaceSpec::S2xR { r } => n.rows(0, 3).norm_squared() / (r * r),
            _ => 0.0,
        })
    }

    /// `Ric_M(n,n)` from the Gauss equation of `M ⊂ ℝᵈ`.
    pub fn ricci_gauss(&self, p: &Point, n: &Point) -> Result<f64> {
        let t = self.tangent_basis(p)?;
        let bnn = self.sff(p, n, n)?;
        let mut ric = 0.0;
        for a in 0..3 {
            let e = t.column(a).into_owned();
            ric += bnn.dot(&self.sff(p, &e, &e)?) - self.sff(p, n, &e)?.norm_squared();
        }
        Ok(ric)
    }

    /// `sup_M |B_M|²`.
    pub fn sup_sff_norm(&self) -> f64 {
        match self.spec {
            SpaceSpec::R3 | SpaceSpec::UnitBall => 0.0,
            SpaceSpec::S3 => 3.0,
            SpaceSpec::S2xR { r } => 2.0 / (r * r),
            SpaceSpec::T3 { r1, r2 } => 1.0 + 1.0 / (r1 * r1) + 1.0 / (r2 * r2),
            SpaceSpec::T2xR { .. } | SpaceSpec::RectT2xR { .. } => {
                self.torus.as_ref().expect("torus data").sff_norm_sq()
            }
            SpaceSpec::Berger { kappa, tau } => {
                let x = kappa / (4.0 * tau * tau);
                2.0 * kappa - 6.0 * tau * tau + tau * tau * (x - 1.0).powi(2)
            }
        }
    }

    /// Signed threshold value before the "none required" cut.
    pub fn threshold_h2_raw(&self) -> f64 {
        match self.spec {
            SpaceSpec::Berger { kappa, tau } => {
                let x = kappa / (4.0 * tau * tau);
                tau * tau * (x - 3.0) * (x + 1.0)
            }
            _ => self.sup_sff_norm() - self.scalar_curvature(),
        }
    }

    /// Least `H²` beyond which the index estimate applies; `None` when no condition is needed.
    pub fn threshold_h2(&self) -> Option<f64> {
        let t = self.threshold_h2_raw();
        (t > 0.0).then_some(t)
    }

    /// Inward unit normal of `∂M` at a boundary point.
    pub fn boundary_inward_normal(&self, p: &Point) -> Option<Point> {
        match self.spec {
            SpaceSpec::UnitBall => Some(-p / p.norm()),
            _ => None,
        }
    }

    /// Whether `p` lies on `∂M` within `tol`.
    pub fn on_boundary(&self, p: &Point, tol: f64) -> bool {
        match self.spec {
            SpaceSpec::UnitBall => (p.norm() - 1.0).abs() <= tol,
            _ => false,
        }
    }

    /// `h_{∂M}(X,Y)` with respect to the inward normal.
    pub fn boundary_sff(&self, _p: &Point, x: &Point, y: &Point) -> Option<f64> {
        match self.spec {
            SpaceSpec::UnitBall => Some(x.dot(y)),
            _ => None,
        }
    }

    /// Mean curvature of `∂M` (trace) with respect to the inward normal.
    pub fn boundary_mean_curvature(&self) -> Option<f64> {
        match self.spec {
            SpaceSpec::UnitBall => Some(2.0),
            _ => None,
        }
    }

    /// A random chart point away from coordinate singularities.
    pub fn sample_chart<R: Rng>(&self, rng: &mut R) -> [f64; 3] {
        let mut u = || rng.gen::<f64>();
        match self.spec {
            SpaceSpec::R3 => [4.0 * u() - 2.0, 4.0 * u() - 2.0, 4.0 * u() - 2.0],
            SpaceSpec::UnitBall => loop {
                let x = [2.0 * u() - 1.0, 2.0 * u() - 1.0, 2.0 * u() - 1.0];
                if x.iter().map(|c| c * c).sum::<f64>() < 0.81 {
                    break x;
                }
            },
            SpaceSpec::S3 => [0.2 + (PI / 2.0 - 0.4) * u(), 2.0 * PI * u(), 2.0 * PI * u()],
            SpaceSpec::S2xR { .. } => [0.2 + (PI - 0.4) * u(), 2.0 * PI * u(), 4.0 * u() - 2.0],
            SpaceSpec::T3 { r1, r2 } => [2.0 * PI * u(), 2.0 * PI * r1 * u(), 2.0 * PI * r2 * u()],
            _ => [u(), u(), 4.0 * u() - 2.0],
        }
    }
}

/// Modified Gram–Schmidt (two passes), dropping vectors that collapse below `tol`.
pub fn gram_schmidt(vs: Vec<Point>, tol: f64) -> Vec<Point> {
    let mut out: Vec<Point> = Vec::with_capacity(vs.len());
    for mut v in vs {
        let n0 = v.norm();
        for _ in 0..2 {
            for q in &out {
                let c = q.dot(&v);
                v.axpy(-c, q, 1.0);
            }
        }
        let n = v.norm();
        if n > tol * n0.max(f64::MIN_POSITIVE) {
            out.push(v / n);
        }
    }
    out
}

/// Orthonormal basis of `p^⊥` in `ℝᵐ`.
fn sphere_complement(p: &Point) -> Vec<Point> {
    let m = p.len();
    let pn = p / p.norm();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| pn[a].abs().total_cmp(&pn[b].abs()));
    let mut cands = vec![pn.clone()];
    for i in order {
        let mut e = DVector::zeros(m);
        e[i] = 1.0;
        cands.push(e);
    }
    let mut q = gram_schmidt(cands, 0.3);
    q.truncate(m);
    // Orient so that (p̂, q₁, …) is positively oriented in ℝᵐ.
    if DMatrix::from_columns(&q).determinant() < 0.0 {
        let last = q.len() - 1;
        q[last].neg_mut();
    }
    q.remove(0);
    q
}

fn stack(cols: &[Point]) -> DMatrix<f64> {
    DMatrix::from_columns(cols)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn embedded_catalog() -> Vec<AmbientSpace> {
        [
            SpaceSpec::R3,
            SpaceSpec::UnitBall,
            SpaceSpec::S3,
            SpaceSpec::S2xR { r: 1.0 },
            SpaceSpec::S2xR { r: 0.7 },
            SpaceSpec::T3 { r1: 1.0, r2: 1.0 },
            SpaceSpec::T3 { r1: 0.5, r2: 2.0 },
            SpaceSpec::RectT2xR { beta: 1.0 },
            SpaceSpec::RectT2xR { beta: 1.7 },
            SpaceSpec::T2xR { alpha: 0.5, beta: 3f64.sqrt() / 2.0, k1: 1, l1: 1, k2: 2, l2: 1 },
        ]
        .into_iter()
        .map(|s| AmbientSpace::new(s).unwrap())
        .collect()
    }

    #[test]
    fn catalog_examples() {
        let s = catalog_space("s2xr", &serde_json::json!({"r": 1.0})).unwrap();
        assert_eq!(s.d(), 4);
        assert_eq!(s.scalar_curvature(), 2.0);
        let r3 = catalog_space("r3", &serde_json::json!({})).unwrap();
        assert_eq!(r3.d(), 3);
        assert_eq!(r3.sup_sff_norm(), 0.0);
        let t3 = catalog_space("t3", &serde_json::json!({"r1": 1.0, "r2": 1.0})).unwrap();
        assert_eq!(t3.d(), 6);
        assert_eq!(t3.scalar_curvature(), 0.0);
        assert_eq!(t3.threshold_h2(), Some(3.0));
        assert!(catalog_space("s2xr", &serde_json::json!({"r": -1.0})).is_err());
        assert!(catalog_space("berger", &serde_json::json!({"kappa": 4.0, "tau": 1.0})).is_err());
    }

    #[test]
    fn berger_is_closed_form_only() {
        let b = catalog_space("berger", &serde_json::json!({"kappa": 8.0, "tau": 1.0})).unwrap();
        assert_eq!(b.scalar_curvature(), 14.0);
        assert_eq!(b.threshold_h2_raw(), -3.0);
        assert_eq!(b.threshold_h2(), None);
        assert!(matches!(b.embed([0.0; 3]), Err(Error::ClosedFormOnly(_))));
        let p = DVector::zeros(8);
        assert!(matches!(b.sff(&p, &p, &p), Err(Error::ClosedFormOnly(_))));
    }

    #[test]
    fn spec_json_round_trip() {
        for s in embedded_catalog() {
            let js = serde_json::to_string(s.spec()).unwrap();
            let back: SpaceSpec = serde_json::from_str(&js).unwrap();
            assert_eq!(&back, s.spec());
            let rebuilt = catalog_space(back.name(), &back.params_json()).unwrap();
            assert_eq!(rebuilt.spec(), s.spec());
        }
    }

    #[test]
    fn isometry_of_embeddings() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for s in embedded_catalog() {
            for _ in 0..50 {
                let x = s.sample_chart(&mut rng);
                let g = s.pullback_metric_fd(x).unwrap();
                let g0 = s.chart_metric(x).unwrap();
                let rel = (g - g0).abs().max() / g0.abs().max();
                assert!(rel < 1e-8, "{}: rel {rel}", s.name());
                let j = s.jacobian(x).unwrap();
                let ga = j.transpose() * &j;
                assert!((ga - DMatrix::from_fn(3, 3, |a, b| g0[(a, b)])).abs().max() < 1e-9);
            }
        }
    }

    #[test]
    fn sff_closed_form_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for s in embedded_catalog() {
            for _ in 0..30 {
                let x = s.sample_chart(&mut rng);
                let p = s.embed(x).unwrap();
                let j = s.jacobian(x).unwrap();
                let xc = [rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5];
                let yc = [rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5];
                let xv = &j * nalgebra::Vector3::from(xc);
                let yv = &j * nalgebra::Vector3::from(yc);
                let closed = s.sff(&p, &xv, &yv).unwrap();
                let fd = s.sff_finite_difference(x, xc, yc).unwrap();
                let scale = s.sup_sff_norm().sqrt().max(1e-300) * xv.norm() * yv.norm();
                if scale == 0.0 {
                    assert!(fd.norm() < 1e-6);
                    continue;
                }
                let rel = (&closed - &fd).norm() / scale;
                assert!(rel < 1e-6, "{}: rel {rel}", s.name());
            }
        }
    }

    #[test]
    fn gauss_trace_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for s in embedded_catalog() {
            for _ in 0..100 {
                let p = s.embed(s.sample_chart(&mut rng)).unwrap();
                let c = s.curvature_at(&p).unwrap();
                let rhs = c.mean_vec_norm_sq - c.sff_norm_sq;
                let scale = c.mean_vec_norm_sq.max(1.0);
                assert!((c.scalar - rhs).abs() / scale < 1e-8, "{}", s.name());
                assert!(c.sff_norm_sq <= s.sup_sff_norm() * (1.0 + 1e-10) + 1e-12);
            }
        }
    }

    #[test]
    fn ricci_closed_form_matches_gauss() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for s in embedded_catalog() {
            for _ in 0..30 {
                let p = s.embed(s.sample_chart(&mut rng)).unwrap();
                let t = s.tangent_basis(&p).unwrap();
                let w = nalgebra::Vector3::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
                let n = &t * w.normalize();
                let a = s.ricci(&p, &n).unwrap();
                let b = s.ricci_gauss(&p, &n).unwrap();
                assert!((a - b).abs() < 1e-10, "{}: {a} vs {b}", s.name());
            }
        }
    }

    #[test]
    fn s2xr_sff_examples() {
        let r = 0.8;
        let s = AmbientSpace::new(SpaceSpec::S2xR { r }).unwrap();
        let p = s.embed([1.0, 0.3, 0.5]).unwrap();
        let t = s.tangent_basis(&p).unwrap();
        let x = t.column(0).into_owned();
        assert!((s.sff(&p, &x, &x).unwrap().norm() - 1.0 / r).abs() < 1e-12);
        let mut e = DVector::zeros(4);
        e[3] = 1.0;
        assert!(s.sff(&p, &e, &e).unwrap().norm() == 0.0);
    }

    #[test]
    fn chart_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for s in embedded_catalog() {
            for _ in 0..20 {
                let x = s.sample_chart(&mut rng);
                let p = s.embed(x).unwrap();
                let q = s.embed(s.chart_of(&p).unwrap()).unwrap();
                assert!((p - q).norm() < 1e-10, "{}", s.name());
            }
        }
    }

    #[test]
    fn tangent_frames_are_consistently_oriented() {
        // Along a smooth path the frame must not flip orientation.
        for s in embedded_catalog() {
            let mut prev: Option<DMatrix<f64>> = None;
            let x0 = s.sample_chart(&mut ChaCha8Rng::seed_from_u64(9));
            for k in 0..200 {
                let t = k as f64 * 0.01;
                let x = [x0[0] + 0.3 * t.sin(), x0[1] + t, x0[2] + 0.5 * t];
                let p = s.embed(x).unwrap();
                let b = s.tangent_basis(&p).unwrap();
                if let Some(pb) = &prev {
                    let o = (pb.transpose() * &b).determinant();
                    assert!(o > 0.5, "{}: orientation flip {o}", s.name());
                }
                prev = Some(b);
            }
        }
    }

    #[test]
    fn sup_sff_examples() {
        let rect = AmbientSpace::new(SpaceSpec::RectT2xR { beta: 1.0 }).unwrap();
        assert!((rect.sup_sff_norm() - 78.95683520871486).abs() < 1e-4);
        let t3 = AmbientSpace::new(SpaceSpec::T3 { r1: 0.5, r2: 2.0 }).unwrap();
        assert!((t3.sup_sff_norm() - (1.0 + 4.0 + 0.25)).abs() < 1e-12);
    }
}
