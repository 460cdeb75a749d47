//! CSV and OBJ writers.

use std::fmt::Write as _;
use std::path::Path;

use ldx_core::minkowski::Vec4;
use ldx_core::surfaces::{SurfaceKind, SurfacePatch};

use crate::config::Projection;
use crate::error::CliError;

/// 17 significant digits, so values round-trip exactly.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x == 0.0 {
        "0.0000000000000000e0".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

#[derive(Debug, Default)]
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Csv { text }
    }

    pub fn row(&mut self, fields: impl IntoIterator<Item = String>) {
        let fields: Vec<String> = fields.into_iter().collect();
        self.text.push_str(&fields.join(","));
        self.text.push('\n');
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

pub fn vec_fields(v: &Vec4) -> impl Iterator<Item = String> + '_ {
    v.0.iter().map(|x| num(*x))
}

pub fn nan_fields(n: usize) -> impl Iterator<Item = String> {
    std::iter::repeat_n("NaN".to_string(), n)
}

pub fn write_or_print(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::io(format!("cannot write {}: {e}", p.display()))),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::io(format!("cannot write to stdout: {e}")))
        }
    }
}

pub fn resolve_projection(p: Option<Projection>, kind: SurfaceKind) -> Projection {
    match (p.unwrap_or(Projection::Auto), kind) {
        (Projection::Auto, SurfaceKind::Hyperbolic) => Projection::Poincare,
        (Projection::Auto, SurfaceKind::DeSitter) => Projection::Orthographic,
        (p, _) => p,
    }
}

fn project(p: &Vec4, proj: Projection) -> Option<[f64; 3]> {
    let [x0, x1, x2, x3] = p.0;
    let out = match proj {
        // Only the future sheet maps into the ball.
        Projection::Poincare if x0 > 0.0 => [x1 / (1.0 + x0), x2 / (1.0 + x0), x3 / (1.0 + x0)],
        Projection::Poincare => return None,
        _ => [x1, x2, x3],
    };
    out.iter().all(|x| x.is_finite()).then_some(out)
}

pub struct Mesh {
    pub text: String,
    pub vertices: usize,
    pub triangles: usize,
}

/// Triangulated grid; samples without a valid projection are dropped along
/// with every triangle touching them.
pub fn obj_mesh(patch: &SurfacePatch, proj: Projection, digest: &str) -> Mesh {
    let proj = resolve_projection(Some(proj), patch.kind);
    let description = match proj {
        Projection::Poincare => "poincare-ball (x1, x2, x3) / (1 + x0)",
        _ => "orthographic (x1, x2, x3), x0 dropped",
    };
    let mut text = String::new();
    writeln!(text, "# ldx surface mesh").unwrap();
    writeln!(text, "# kind: {}", patch.kind.name()).unwrap();
    writeln!(text, "# projection: {description}").unwrap();
    writeln!(text, "# config-sha256: {digest}").unwrap();
    writeln!(text, "# grid: {} x {} (s x theta)", patch.n_s, patch.n_theta).unwrap();

    let mut index = vec![None; patch.samples.len()];
    let mut next = 1usize;
    for (slot, sample) in index.iter_mut().zip(&patch.samples) {
        if let Some([a, b, c]) = sample.data.as_ref().ok().and_then(|d| project(&d.position, proj)) {
            writeln!(text, "v {} {} {}", num(a), num(b), num(c)).unwrap();
            *slot = Some(next);
            next += 1;
        }
    }
    let mut triangles = 0;
    let at = |i: usize, j: usize| index[i * patch.n_theta + j];
    for i in 0..patch.n_s.saturating_sub(1) {
        for j in 0..patch.n_theta.saturating_sub(1) {
            let quad = [at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)];
            for tri in [[quad[0], quad[1], quad[2]], [quad[0], quad[2], quad[3]]] {
                if let [Some(a), Some(b), Some(c)] = tri {
                    writeln!(text, "f {a} {b} {c}").unwrap();
                    triangles += 1;
                }
            }
        }
    }
    Mesh {
        text,
        vertices: next - 1,
        triangles,
    }
}
