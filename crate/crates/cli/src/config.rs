//! TOML run configuration and its resolution against command-line flags.

use std::path::{Path, PathBuf};

use ldx_core::builtins;
use ldx_core::frame::{CurveDef, SystemSpec, Tolerances};
use ldx_core::heights::AK_TOL;
use ldx_core::surfaces::{LocusOptions, SliceTolerances, SurfaceKind};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub curve: CurveConfig,
    #[serde(default)]
    pub tolerances: TolConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Embedded,
    Direct,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveConfig {
    /// Start from a named example; the other fields then override it.
    pub builtin: Option<String>,
    pub mode: Option<Mode>,
    pub hypersurface: Option<Vec<String>>,
    pub curve: Option<Vec<String>>,
    pub normal: Option<Vec<String>>,
    pub param: Option<String>,
    pub interval: Option<[f64; 2]>,
    pub order: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TolConfig {
    pub kg: Option<f64>,
    pub assume: Option<f64>,
    pub lightlike: Option<f64>,
    pub direct_normal: Option<f64>,
    pub regular: Option<f64>,
    pub quadrature: Option<f64>,
    pub ak: Option<f64>,
    pub classify_rel: Option<f64>,
    pub root: Option<f64>,
    pub slice_rho: Option<f64>,
    pub slice_spread: Option<f64>,
    pub slice_plane: Option<f64>,
}

pub const TOL_NAMES: [&str; 12] = [
    "kg",
    "assume",
    "lightlike",
    "direct_normal",
    "regular",
    "quadrature",
    "ak",
    "classify_rel",
    "root",
    "slice_rho",
    "slice_spread",
    "slice_plane",
];

impl TolConfig {
    fn slot(&mut self, name: &str) -> Option<&mut Option<f64>> {
        Some(match name {
            "kg" => &mut self.kg,
            "assume" => &mut self.assume,
            "lightlike" => &mut self.lightlike,
            "direct_normal" => &mut self.direct_normal,
            "regular" => &mut self.regular,
            "quadrature" => &mut self.quadrature,
            "ak" => &mut self.ak,
            "classify_rel" => &mut self.classify_rel,
            "root" => &mut self.root,
            "slice_rho" => &mut self.slice_rho,
            "slice_spread" => &mut self.slice_spread,
            "slice_plane" => &mut self.slice_plane,
            _ => return None,
        })
    }

    /// Applies a `NAME=VALUE` override.
    pub fn set(&mut self, assignment: &str) -> Result<(), CliError> {
        let (name, value) = assignment
            .split_once('=')
            .ok_or_else(|| CliError::config(format!("--tol expects NAME=VALUE, got {assignment:?}")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| CliError::config(format!("bad tolerance value {value:?}")))?;
        let slot = self.slot(name.trim()).ok_or_else(|| {
            CliError::config(format!("unknown tolerance {name:?}; expected one of {}", TOL_NAMES.join(", ")))
        })?;
        *slot = Some(value);
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Arc-length range; defaults to the whole curve.
    pub range: Option<[f64; 2]>,
    pub samples: Option<usize>,
    pub theta_range: Option<[f64; 2]>,
    pub theta_samples: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Projection {
    Auto,
    Poincare,
    Orthographic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KindName {
    Hyperbolic,
    Desitter,
}

impl From<KindName> for SurfaceKind {
    fn from(k: KindName) -> Self {
        match k {
            KindName::Hyperbolic => SurfaceKind::Hyperbolic,
            KindName::Desitter => SurfaceKind::DeSitter,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub kind: Option<KindName>,
    pub csv: Option<PathBuf>,
    pub obj: Option<PathBuf>,
    pub projection: Option<Projection>,
}

impl RunConfig {
    pub fn from_builtin(name: &str) -> Self {
        RunConfig {
            curve: CurveConfig {
                builtin: Some(name.to_string()),
                ..Default::default()
            },
            ..Default::default()
        }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::config(format!("{}: {}", path.display(), e.message)))
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::config(e.message().to_string()))
    }

    /// SHA-256 of the canonical serialization.
    pub fn digest(&self) -> String {
        let text = toml::to_string(self).expect("config serializes");
        Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Explicit configuration reproducing a builtin curve.
    pub fn explicit(spec: &SystemSpec) -> Self {
        let (mode, hypersurface, curve, normal) = match &spec.def {
            CurveDef::Embedded { hypersurface, curve } => (Mode::Embedded, Some(hypersurface.to_vec()), curve.to_vec(), None),
            CurveDef::Direct { curve, normal } => (Mode::Direct, None, curve.to_vec(), Some(normal.to_vec())),
        };
        RunConfig {
            curve: CurveConfig {
                builtin: None,
                mode: Some(mode),
                hypersurface,
                curve: Some(curve),
                normal,
                param: Some(spec.param.clone()),
                interval: Some([spec.interval.0, spec.interval.1]),
                order: Some(spec.order),
            },
            ..Default::default()
        }
    }

    pub fn system_spec(&self) -> Result<SystemSpec, CliError> {
        let c = &self.curve;
        let mut spec = match &c.builtin {
            Some(name) => builtins::by_name(name).ok_or_else(|| {
                CliError::config(format!("unknown builtin {name:?}; available: {}", builtins::NAMES.join(", ")))
            })?,
            None => {
                let mode = c.mode.ok_or_else(|| CliError::config("curve.mode (or curve.builtin) is required"))?;
                let interval = c.interval.ok_or_else(|| CliError::config("curve.interval is required"))?;
                let def = match mode {
                    Mode::Embedded => CurveDef::Embedded {
                        hypersurface: fixed(&c.hypersurface, "curve.hypersurface")?,
                        curve: fixed(&c.curve, "curve.curve")?,
                    },
                    Mode::Direct => CurveDef::Direct {
                        curve: fixed(&c.curve, "curve.curve")?,
                        normal: fixed(&c.normal, "curve.normal")?,
                    },
                };
                SystemSpec::new(def, (interval[0], interval[1]))
            }
        };
        if c.builtin.is_some() && (c.mode.is_some() || c.hypersurface.is_some() || c.curve.is_some() || c.normal.is_some()) {
            return Err(CliError::config("curve.builtin cannot be combined with curve expressions"));
        }
        if let Some(p) = &c.param {
            spec.param = p.clone();
        }
        if let Some([a, b]) = c.interval {
            spec.interval = (a, b);
        }
        if let Some(k) = c.order {
            spec.order = k;
        }
        spec.tol = self.core_tolerances();
        Ok(spec)
    }

    pub fn core_tolerances(&self) -> Tolerances {
        let d = Tolerances::default();
        let t = &self.tolerances;
        Tolerances {
            kg: t.kg.unwrap_or(d.kg),
            assume: t.assume.unwrap_or(d.assume),
            lightlike: t.lightlike.unwrap_or(d.lightlike),
            direct_normal: t.direct_normal.unwrap_or(d.direct_normal),
            regular: t.regular.unwrap_or(d.regular),
            quadrature: t.quadrature.unwrap_or(d.quadrature),
        }
    }

    pub fn ak_tol(&self) -> f64 {
        self.tolerances.ak.unwrap_or(AK_TOL)
    }

    pub fn locus_options(&self) -> LocusOptions {
        let d = LocusOptions::default();
        LocusOptions {
            rel: self.tolerances.classify_rel.unwrap_or(d.rel),
            root_tol: self.tolerances.root.unwrap_or(d.root_tol),
        }
    }

    pub fn slice_tolerances(&self) -> SliceTolerances {
        let d = SliceTolerances::default();
        SliceTolerances {
            rho: self.tolerances.slice_rho.unwrap_or(d.rho),
            spread: self.tolerances.slice_spread.unwrap_or(d.spread),
            plane: self.tolerances.slice_plane.unwrap_or(d.plane),
        }
    }

    pub fn kind(&self) -> SurfaceKind {
        self.output.kind.unwrap_or(KindName::Hyperbolic).into()
    }

    pub fn theta_range(&self) -> (f64, f64) {
        self.grid
            .theta_range
            .map(|[a, b]| (a, b))
            .unwrap_or_else(|| self.kind().default_theta_range())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let t = &self.tolerances;
        for (name, v) in TOL_NAMES.iter().zip([
            t.kg,
            t.assume,
            t.lightlike,
            t.direct_normal,
            t.regular,
            t.quadrature,
            t.ak,
            t.classify_rel,
            t.root,
            t.slice_rho,
            t.slice_spread,
            t.slice_plane,
        ]) {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    return Err(CliError::config(format!("tolerance {name} must be positive, got {v}")));
                }
            }
        }
        for (name, r) in [("grid.range", self.grid.range), ("grid.theta_range", self.grid.theta_range)] {
            if let Some([a, b]) = r {
                if !(a.is_finite() && b.is_finite() && a <= b) {
                    return Err(CliError::config(format!("{name} must be finite and increasing, got [{a}, {b}]")));
                }
            }
        }
        for (name, n) in [("grid.samples", self.grid.samples), ("grid.theta_samples", self.grid.theta_samples)] {
            if n == Some(0) {
                return Err(CliError::config(format!("{name} must be positive")));
            }
        }
        if self.output.projection == Some(Projection::Poincare) && self.kind() == SurfaceKind::DeSitter {
            return Err(CliError::config("the Poincaré ball projection applies to hyperbolic surfaces only"));
        }
        Ok(())
    }
}

fn fixed<const N: usize>(v: &Option<Vec<String>>, name: &str) -> Result<[String; N], CliError> {
    let v = v.as_ref().ok_or_else(|| CliError::config(format!("{name} is required")))?;
    v.clone()
        .try_into()
        .map_err(|v: Vec<String>| CliError::config(format!("{name} needs {N} expressions, got {}", v.len())))
}
