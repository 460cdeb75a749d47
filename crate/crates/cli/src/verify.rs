//! The `verify` check suite.

use ldx_core::frame::{CurveSystem, FrameSample, Regime};
use ldx_core::heights::height_jet;
use ldx_core::minkowski::pseudo_dot;
use ldx_core::surfaces::{grid, jacobian_min_sv, sample_patch, slice_test, theta_singular, SurfaceKind};
use ldx_core::Error;
use rayon::prelude::*;

use crate::commands::{classify, Context};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
    Skip,
}

#[derive(Clone, Debug)]
pub struct Check {
    pub name: String,
    pub outcome: Outcome,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, ok: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            outcome: if ok { Outcome::Pass } else { Outcome::Fail },
            detail: detail.into(),
        }
    }

    fn skip(name: impl Into<String>, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            outcome: Outcome::Skip,
            detail: detail.into(),
        }
    }

    pub fn line(&self) -> String {
        let tag = match self.outcome {
            Outcome::Pass => "PASS",
            Outcome::Fail => "FAIL",
            Outcome::Skip => "SKIP",
        };
        format!("{tag} {}: {}", self.name, self.detail)
    }
}

const GRAM_TOL: f64 = 1e-9;
const FRENET_TOL: f64 = 1e-7;
const DISCRIMINANT_TOL: f64 = 1e-9;
const JACOBIAN_TOL: f64 = 1e-8;

pub fn failed_compile(e: &Error) -> Check {
    Check::new("curve-definition", false, format!("{}: {e}", e.kind()))
}

fn frames(sys: &CurveSystem, s: &[f64]) -> Vec<Result<FrameSample, Error>> {
    s.par_iter().map(|&s| sys.frame_at(s)).collect()
}

fn frame_checks(sys: &CurveSystem, s: &[f64]) -> Vec<Check> {
    let frames = frames(sys, s);
    if let Some(e) = frames.iter().find_map(|f| f.as_ref().err()) {
        let detail = format!("{}: {e}", e.kind());
        return vec![
            Check::new("frame-orthonormality", false, detail.clone()),
            Check::new("frenet-residuals", false, detail),
        ];
    }
    let frames: Vec<&FrameSample> = frames.iter().map(|f| f.as_ref().unwrap()).collect();
    let mut gram_err = 0.0f64;
    let mut frenet = 0.0f64;
    for f in &frames {
        let g = f.gram();
        for (i, row) in g.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                let want = match (i == j, i) {
                    (false, _) => 0.0,
                    (true, 0) => -1.0,
                    (true, _) => 1.0,
                };
                gram_err = gram_err.max((x - want).abs());
            }
        }
        frenet = f.frenet_residuals().iter().fold(frenet, |m, r| m.max(*r));
    }
    vec![
        Check::new(
            "frame-orthonormality",
            gram_err < GRAM_TOL,
            format!("max Gram deviation {gram_err:.3e} over {} samples", frames.len()),
        ),
        Check::new(
            "frenet-residuals",
            frenet < FRENET_TOL,
            format!("max residual {frenet:.3e} over {} samples", frames.len()),
        ),
    ]
}

/// `ρ` reconstructed from a finite-difference third derivative of the
/// height function: `ρ = −h''' D √|Δ| / c(θ)` on the singular locus, with
/// `c = cosh` or `cos`.
pub fn rho_from_height_fd(sys: &CurveSystem, kind: SurfaceKind, s: f64, step: f64) -> Result<f64, Error> {
    let theta = theta_singular(sys, kind, s)?;
    let v = ldx_core::surfaces::surface_point(sys, kind, s, theta)?;
    let h = |x: f64| -> Result<f64, Error> { Ok(pseudo_dot(&sys.unit_speed_jets(x)?.0.derivative(1), &v)) };
    let mut f = [0.0; 7];
    for (k, slot) in f.iter_mut().enumerate() {
        *slot = h(s + (k as f64 - 3.0) * step)?;
    }
    let d3 = (-f[0] + 8.0 * f[1] - 13.0 * f[2] + 13.0 * f[4] - 8.0 * f[5] + f[6]) / (8.0 * step.powi(3));
    let di = sys.derived_invariants_at(s)?;
    let c = match kind {
        SurfaceKind::Hyperbolic => theta.cosh(),
        SurfaceKind::DeSitter => theta.cos(),
    };
    Ok(-d3 * di.d * di.gap.abs().sqrt() / c)
}

fn kind_checks(ctx: &Context, kind: SurfaceKind, s: &[f64]) -> Vec<Check> {
    let sys = &ctx.sys;
    let name = kind.name();
    let wanted = match kind {
        SurfaceKind::Hyperbolic => Regime::Hyperbolic,
        SurfaceKind::DeSitter => Regime::DeSitter,
    };
    let flags = sys.assumption_report(s);
    let in_regime: Vec<f64> = flags.iter().filter(|f| f.regime == wanted).map(|f| f.s).collect();
    if in_regime.is_empty() {
        return vec![Check::skip(format!("{name}-surface"), "regime never holds on the sample grid")];
    }
    let mut out = Vec::new();

    let (a, b) = (in_regime[0], in_regime[in_regime.len() - 1]);
    let patch = sample_patch(sys, kind, (a, b), kind.default_theta_range(), 20, 20);
    let family = kind.family();
    let worst = patch
        .samples
        .par_iter()
        .filter_map(|p| p.data.as_ref().ok().map(|d| (p.s, d.position.clone())))
        .map(|(s, v)| {
            let h = height_jet(sys, family, &v, s, 1)?;
            Ok(h.derivative(0).abs().max(h.derivative(1).abs()))
        })
        .collect::<Result<Vec<f64>, Error>>();
    out.push(match worst {
        Ok(w) => {
            let m = w.iter().fold(0.0f64, |m, x| m.max(*x));
            Check::new(
                format!("discriminant-{name}"),
                m < DISCRIMINANT_TOL,
                format!("max |h|, |h'| = {m:.3e} over {} patch samples", w.len()),
            )
        }
        Err(e) => Check::new(format!("discriminant-{name}"), false, format!("{}: {e}", e.kind())),
    });

    let mut cfg = ctx.config.clone();
    cfg.output.kind = Some(match kind {
        SurfaceKind::Hyperbolic => crate::config::KindName::Hyperbolic,
        SurfaceKind::DeSitter => crate::config::KindName::Desitter,
    });
    let sub = Context {
        config: cfg,
        sys: sys.clone(),
    };
    let on_locus: Vec<f64> = in_regime
        .iter()
        .copied()
        .filter(|&s| theta_singular(sys, kind, s).is_ok())
        .collect();
    if on_locus.is_empty() {
        let reason = theta_singular(sys, kind, in_regime[0]).err().map(|e| e.kind()).unwrap_or("");
        out.push(Check::skip(format!("locus-{name}"), format!("singular locus undefined ({reason})")));
        return out;
    }

    let jac = on_locus
        .par_iter()
        .map(|&s| {
            let th = theta_singular(sys, kind, s)?;
            jacobian_min_sv(sys, kind, s, th)
        })
        .collect::<Result<Vec<f64>, Error>>();
    out.push(match jac {
        Ok(v) => {
            let m = v.iter().fold(0.0f64, |m, x| m.max(*x));
            Check::new(
                format!("singular-criterion-{name}"),
                m < JACOBIAN_TOL,
                format!("max smallest singular value on the locus {m:.3e}"),
            )
        }
        Err(e) => Check::new(format!("singular-criterion-{name}"), false, format!("{}: {e}", e.kind())),
    });

    out.push(match classify(&sub) {
        Ok(r) => {
            let counts: Vec<String> = r.counts.iter().map(|(c, n)| format!("{}={n}", c.name())).collect();
            Check::new(
                format!("classification-oracle-{name}"),
                r.disagreements == 0,
                format!("{} disagreements; {}", r.disagreements, counts.join(" ")),
            )
        }
        Err(e) => Check::new(format!("classification-oracle-{name}"), false, e.to_string()),
    });

    let step = 1e-2;
    let interior: Vec<f64> = on_locus
        .iter()
        .copied()
        .filter(|&s| s - 3.0 * step >= 0.0 && s + 3.0 * step <= sys.length())
        .collect();
    let picks: Vec<f64> = (0..interior.len().min(10))
        .map(|i| interior[i * interior.len() / interior.len().min(10)])
        .collect();
    let fd = picks
        .par_iter()
        .map(|&s| {
            let oracle = rho_from_height_fd(sys, kind, s, step)?;
            let rho = sys.derived_invariants_at(s)?.rho;
            Ok((rho - oracle).abs() / rho.abs().max(1.0))
        })
        .collect::<Result<Vec<f64>, Error>>();
    out.push(match fd {
        Ok(v) => {
            let m = v.iter().fold(0.0f64, |m, x| m.max(*x));
            Check::new(
                format!("rho-oracle-{name}"),
                m < 1e-5,
                format!("max relative deviation from the finite-difference height oracle {m:.3e} at {} points", v.len()),
            )
        }
        Err(e) => Check::new(format!("rho-oracle-{name}"), false, format!("{}: {e}", e.kind())),
    });

    out.push(match slice_test(sys, kind, (a, b), 60, &ctx.config.slice_tolerances()) {
        Ok(r) => Check::new(
            format!("slice-biconditional-{name}"),
            r.conditions_agree(),
            format!(
                "is_slice={} locus_constant={} in_hyperplane={} (max|rho| {:.3e}, spread {:.3e}, plane fit {:.3e})",
                r.is_slice, r.locus_constant, r.in_hyperplane, r.max_rho, r.spread, r.plane_fit
            ),
        ),
        Err(e) => Check::new(format!("slice-biconditional-{name}"), false, format!("{}: {e}", e.kind())),
    });
    out
}

pub fn run(ctx: &Context) -> Vec<Check> {
    let s = grid((0.0, ctx.sys.length()), 200);
    let mut checks = vec![Check::new("curve-definition", true, "expressions parse and the curve validates")];
    checks.extend(frame_checks(&ctx.sys, &s));
    for kind in [SurfaceKind::Hyperbolic, SurfaceKind::DeSitter] {
        checks.extend(kind_checks(ctx, kind, &s));
    }
    checks
}
