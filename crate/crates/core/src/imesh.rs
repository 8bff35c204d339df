//! Text mesh format.
//!
//! ```text
//! IMESH 1
//! {"family":...,"family_params":{...},"params":{...},"resolution":64,"seed":0,"space":"s3"}
//! V n
//! u v x1 ... xd
//! F m
//! i j k
//! B r
//! i0 i1 ...
//! ```
//! Floats carry 17 significant digits, so a save/load/save cycle is byte-identical.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ambient::{catalog_space, Point};
use crate::error::{Error, Result};
use crate::hodge::HarmonicField;
use crate::mesh::{FamilyTag, ImmersedMesh};

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Header {
    space: String,
    params: serde_json::Value,
    family: String,
    #[serde(default)]
    family_params: serde_json::Value,
    resolution: usize,
    seed: u64,
}

fn float(out: &mut String, x: f64) {
    let _ = write!(out, "{x:.16e}");
}

pub fn write_imesh(mesh: &ImmersedMesh) -> String {
    let header = Header {
        space: mesh.space.name().into(),
        params: mesh.space.spec().params_json(),
        family: mesh.tag.family.clone(),
        family_params: mesh.tag.params.clone(),
        resolution: mesh.tag.resolution,
        seed: mesh.tag.seed,
    };
    let mut out = String::with_capacity(64 * mesh.n_vertices());
    out.push_str("IMESH 1\n");
    out.push_str(&serde_json::to_string(&header).expect("header serializes"));
    out.push('\n');
    let _ = writeln!(out, "V {}", mesh.n_vertices());
    for (uv, p) in mesh.surface_params.iter().zip(&mesh.positions) {
        float(&mut out, uv[0]);
        out.push(' ');
        float(&mut out, uv[1]);
        for x in p.iter() {
            out.push(' ');
            float(&mut out, *x);
        }
        out.push('\n');
    }
    let _ = writeln!(out, "F {}", mesh.n_faces());
    for f in &mesh.faces {
        let _ = writeln!(out, "{} {} {}", f[0], f[1], f[2]);
    }
    if !mesh.boundary_loops.is_empty() {
        let _ = writeln!(out, "B {}", mesh.boundary_loops.len());
        for lp in &mesh.boundary_loops {
            let line: Vec<String> = lp.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
    }
    out
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Option<(usize, &'a str)> {
        for (i, l) in self.inner.by_ref() {
            self.last = i + 1;
            if !l.trim().is_empty() {
                return Some((i + 1, l.trim()));
            }
        }
        None
    }

    fn expect(&mut self, what: &str) -> Result<(usize, &'a str)> {
        let line = self.last + 1;
        self.next().ok_or_else(|| Error::Parse { line, msg: format!("unexpected end of file, expected {what}") })
    }
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn section(lines: &mut Lines, tag: &str) -> Result<usize> {
    let (ln, l) = lines.expect(tag)?;
    let mut it = l.split_whitespace();
    if it.next() != Some(tag) {
        return Err(perr(ln, format!("expected '{tag} <count>'")));
    }
    let n = it.next().and_then(|s| s.parse().ok()).ok_or_else(|| perr(ln, format!("bad {tag} count")))?;
    if it.next().is_some() {
        return Err(perr(ln, "trailing tokens"));
    }
    Ok(n)
}

pub fn read_imesh(text: &str) -> Result<ImmersedMesh> {
    let mut lines = Lines { inner: text.lines().enumerate(), last: 0 };
    let (ln, magic) = lines.expect("IMESH header")?;
    if magic != "IMESH 1" {
        return Err(perr(ln, "expected 'IMESH 1'"));
    }
    let (ln, hjson) = lines.expect("JSON header")?;
    let header: Header = serde_json::from_str(hjson).map_err(|e| perr(ln, format!("header: {e}")))?;
    let space = catalog_space(&header.space, &header.params)?;
    if !space.has_embedding() {
        return Err(Error::ClosedFormOnly(space.name().into()));
    }
    let d = space.d();

    let n = section(&mut lines, "V")?;
    let mut surface_params = Vec::with_capacity(n);
    let mut positions = Vec::with_capacity(n);
    let mut chart = Vec::with_capacity(n);
    for _ in 0..n {
        let (ln, l) = lines.expect("vertex")?;
        let vals: Vec<f64> = l
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| perr(ln, format!("bad number '{t}'"))))
            .collect::<Result<_>>()?;
        if vals.len() != 2 + d {
            return Err(perr(ln, format!("vertex needs {} numbers, found {}", 2 + d, vals.len())));
        }
        if vals.iter().any(|x| !x.is_finite()) {
            return Err(perr(ln, "non-finite coordinate"));
        }
        surface_params.push([vals[0], vals[1]]);
        let p = Point::from_column_slice(&vals[2..]);
        chart.push(space.chart_of(&p)?);
        positions.push(p);
    }

    let m = section(&mut lines, "F")?;
    let mut faces = Vec::with_capacity(m);
    for _ in 0..m {
        let (ln, l) = lines.expect("face")?;
        let idx: Vec<usize> = l
            .split_whitespace()
            .map(|t| t.parse::<usize>().map_err(|_| perr(ln, format!("bad index '{t}'"))))
            .collect::<Result<_>>()?;
        if idx.len() != 3 {
            return Err(perr(ln, "face needs three indices"));
        }
        if idx.iter().any(|&i| i >= n) {
            return Err(perr(ln, "face index out of range"));
        }
        faces.push([idx[0], idx[1], idx[2]]);
    }

    let mut boundary_loops = Vec::new();
    let mut has_b = false;
    if let Some((ln, l)) = lines.next() {
        let mut it = l.split_whitespace();
        if it.next() != Some("B") {
            return Err(perr(ln, "expected 'B <count>' or end of file"));
        }
        let r: usize = it.next().and_then(|s| s.parse().ok()).ok_or_else(|| perr(ln, "bad B count"))?;
        has_b = true;
        for _ in 0..r {
            let (ln, l) = lines.expect("boundary loop")?;
            let lp: Vec<usize> = l
                .split_whitespace()
                .map(|t| t.parse::<usize>().map_err(|_| perr(ln, format!("bad index '{t}'"))))
                .collect::<Result<_>>()?;
            if lp.is_empty() || lp.iter().any(|&i| i >= n) {
                return Err(perr(ln, "loop index out of range"));
            }
            boundary_loops.push(lp);
        }
    }
    if let Some((ln, _)) = lines.next() {
        return Err(perr(ln, "trailing content"));
    }

    let mut mesh = ImmersedMesh {
        space,
        surface_params,
        chart,
        positions,
        faces,
        boundary_loops,
        tag: FamilyTag {
            family: header.family,
            params: header.family_params,
            resolution: header.resolution,
            seed: header.seed,
        },
    };
    if !has_b {
        mesh.refresh_boundary()?;
    }
    mesh.validate()?;
    Ok(mesh)
}

pub fn load_imesh(path: &Path) -> Result<ImmersedMesh> {
    read_imesh(&std::fs::read_to_string(path)?)
}

pub fn save_imesh(mesh: &ImmersedMesh, path: &Path) -> Result<()> {
    std::fs::write(path, write_imesh(mesh))?;
    Ok(())
}

/// Per-edge values of harmonic forms: `EDGES m q`, then `a b w_1 … w_q`.
pub fn write_edge_table(edges: &[[usize; 2]], fields: &[HarmonicField]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "EDGES {} {}", edges.len(), fields.len());
    for (e, [a, b]) in edges.iter().enumerate() {
        let _ = write!(out, "{a} {b}");
        for f in fields {
            out.push(' ');
            float(&mut out, f.form[e]);
        }
        out.push('\n');
    }
    out
}
