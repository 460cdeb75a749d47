//! Subcommand implementations. Each returns the text it produced so that
//! callers decide where it goes.

use ldx_core::builtins;
use ldx_core::frame::{compile_system, AssumptionFlags, CurveSystem, Regime};
use ldx_core::heights::{detect_ak, SingularityOrder};
use ldx_core::surfaces::{grid, sample_patch, singular_locus, Classification, SingularLocusPoint};
use ldx_core::Error;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{nan_fields, num, obj_mesh, vec_fields, Csv, Mesh};

pub struct Context {
    pub config: RunConfig,
    pub sys: CurveSystem,
}

impl Context {
    pub fn new(config: RunConfig) -> Result<Self, CliError> {
        config.validate()?;
        let sys = compile_system(config.system_spec()?)?;
        Ok(Context { config, sys })
    }

    pub fn s_range(&self) -> (f64, f64) {
        self.config.grid.range.map(|[a, b]| (a, b)).unwrap_or((0.0, self.sys.length()))
    }

    pub fn samples(&self, default: usize) -> usize {
        self.config.grid.samples.unwrap_or(default)
    }

    fn s_values(&self, at: &[f64], default: usize) -> Vec<f64> {
        if at.is_empty() {
            grid(self.s_range(), self.samples(default))
        } else {
            at.to_vec()
        }
    }
}

fn status(e: &Error) -> String {
    e.kind().to_string()
}

/// Fails with the first sample error when no sample succeeded.
fn require_some<'a>(errors: impl IntoIterator<Item = Option<&'a Error>>) -> Result<(), CliError> {
    let mut first = None;
    for e in errors {
        match e {
            None => return Ok(()),
            Some(e) if first.is_none() => first = Some(e.clone()),
            Some(_) => {}
        }
    }
    match first {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

pub const FRAME_HEADER: [&str; 32] = [
    "s", "u", "gamma0", "gamma1", "gamma2", "gamma3", "n0", "n1", "n2", "n3", "t0", "t1", "t2", "t3", "n1_0", "n1_1",
    "n1_2", "n1_3", "n2_0", "n2_1", "n2_2", "n2_3", "k_n", "tau1", "tau2", "k_g", "tau_g", "lambda0", "lambda1", "rho",
    "rho_prime", "status",
];

pub fn frame(ctx: &Context, at: &[f64]) -> Result<String, CliError> {
    use rayon::prelude::*;
    let s_values = ctx.s_values(at, 200);
    let rows: Vec<_> = s_values
        .par_iter()
        .map(|&s| {
            ctx.sys
                .frame_at(s)
                .map(|f| (ldx_core::frame::DerivedInvariants::from_frame(&f), f))
        })
        .collect();
    let mut csv = Csv::new(&FRAME_HEADER);
    for (s, r) in s_values.iter().zip(&rows) {
        match r {
            Ok((d, f)) => csv.row(
                [num(*s), num(f.u)]
                    .into_iter()
                    .chain(std::iter::once(&f.gamma).chain(f.vectors()).flat_map(vec_fields))
                    .chain([f.k_n, f.tau1, f.tau2, f.k_g, f.tau_g, d.lambda0, d.lambda1, d.rho, d.rho_prime].map(num))
                    .chain(["ok".to_string()]),
            ),
            Err(e) => csv.row([num(*s)].into_iter().chain(nan_fields(30)).chain([status(e)])),
        }
    }
    require_some(rows.iter().map(|r| r.as_ref().err()))?;
    Ok(csv.into_string())
}

pub const INVARIANTS_HEADER: [&str; 16] = [
    "s", "u", "k_n", "tau1", "tau2", "k_g", "tau_g", "d", "gap", "lambda0", "lambda1", "lambda2", "rho", "rho_prime",
    "regime", "status",
];

pub fn invariants(ctx: &Context, at: &[f64]) -> Result<String, CliError> {
    use rayon::prelude::*;
    let s_values = ctx.s_values(at, 200);
    let rows: Vec<_> = s_values
        .par_iter()
        .map(|&s| {
            let f = ctx.sys.frame_at(s)?;
            let d = ldx_core::frame::DerivedInvariants::from_frame(&f);
            Ok::<_, Error>((f, d))
        })
        .collect();
    let flags = ctx.sys.assumption_report(&s_values);
    let mut csv = Csv::new(&INVARIANTS_HEADER);
    for ((s, r), flag) in s_values.iter().zip(&rows).zip(&flags) {
        match r {
            Ok((f, d)) => csv.row(
                [f.s, f.u, f.k_n, f.tau1, f.tau2, f.k_g, f.tau_g, d.d, d.gap, d.lambda0, d.lambda1, d.lambda2, d.rho, d.rho_prime]
                    .map(num)
                    .into_iter()
                    .chain([regime_name(flag).into(), "ok".into()]),
            ),
            Err(e) => csv.row([num(*s)].into_iter().chain(nan_fields(13)).chain(["none".into(), status(e)])),
        }
    }
    require_some(rows.iter().map(|r| r.as_ref().err()))?;
    Ok(csv.into_string())
}

fn regime_name(f: &AssumptionFlags) -> &'static str {
    match f.regime {
        Regime::Hyperbolic => "hyperbolic",
        Regime::DeSitter => "desitter",
        Regime::Neither => "none",
    }
}

pub const LOCUS_HEADER: [&str; 13] = [
    "s", "theta", "x0", "x1", "x2", "x3", "class", "lambda0", "lambda1", "rho", "rho_prime", "status", "refined",
];

pub fn locus_points(ctx: &Context) -> Vec<SingularLocusPoint> {
    singular_locus(
        &ctx.sys,
        ctx.config.kind(),
        ctx.s_range(),
        ctx.samples(200),
        &ctx.config.locus_options(),
    )
}

/// The CSV is produced even when every sample failed; the error is returned
/// alongside it.
pub fn locus(ctx: &Context) -> (String, Result<(), CliError>) {
    let points = locus_points(ctx);
    let mut csv = Csv::new(&LOCUS_HEADER);
    for p in &points {
        let refined = if p.refined_root { "1" } else { "0" }.to_string();
        match &p.data {
            Ok(d) => csv.row(
                [num(p.s), num(d.theta)]
                    .into_iter()
                    .chain(vec_fields(&d.position))
                    .chain([d.classification.name().to_string()])
                    .chain([d.witness.lambda0, d.witness.lambda1, d.witness.rho, d.witness.rho_prime].map(num))
                    .chain(["ok".to_string(), refined]),
            ),
            Err(e) => csv.row(
                [num(p.s)]
                    .into_iter()
                    .chain(nan_fields(5))
                    .chain(["none".to_string()])
                    .chain(nan_fields(4))
                    .chain([status(e), refined]),
            ),
        }
    }
    let outcome = require_some(points.iter().map(|p| p.data.as_ref().err()));
    (csv.into_string(), outcome)
}

pub const CLASSIFY_HEADER: [&str; 9] = [
    "s", "theta", "class", "oracle_order", "lambda0", "lambda1", "rho", "rho_prime", "agrees",
];

fn expected_order(c: Classification) -> Option<SingularityOrder> {
    match c {
        Classification::CuspidalEdge => Some(SingularityOrder::Finite(2)),
        Classification::Swallowtail | Classification::CuspidalBeaks => Some(SingularityOrder::Finite(3)),
        Classification::SliceDegenerate => Some(SingularityOrder::InfiniteWithinTolerance),
        Classification::Unresolved => None,
    }
}

fn order_name(o: SingularityOrder) -> String {
    match o {
        SingularityOrder::NonZero => "nonzero".into(),
        SingularityOrder::Finite(k) => format!("A{k}"),
        SingularityOrder::InfiniteWithinTolerance => "infinite".into(),
    }
}

pub struct ClassifyReport {
    pub csv: String,
    pub counts: Vec<(Classification, usize)>,
    pub disagreements: usize,
}

/// Locus classification with the height-function order of each point
/// beside it.
pub fn classify(ctx: &Context) -> Result<ClassifyReport, CliError> {
    use rayon::prelude::*;
    let points = locus_points(ctx);
    require_some(points.iter().map(|p| p.data.as_ref().err()))?;
    let family = ctx.config.kind().family();
    let k_max = (ctx.sys.order() - 2).min(4);
    let ok: Vec<_> = points.iter().filter_map(|p| p.data.as_ref().ok().map(|d| (p.s, d))).collect();
    let orders: Vec<_> = ok
        .par_iter()
        .map(|(s, d)| detect_ak(&ctx.sys, family, &d.position, *s, k_max, ctx.config.ak_tol()))
        .collect();
    let mut csv = Csv::new(&CLASSIFY_HEADER);
    let mut counts: Vec<(Classification, usize)> = Vec::new();
    let mut disagreements = 0;
    for ((s, d), order) in ok.iter().zip(&orders) {
        match counts.iter_mut().find(|(c, _)| *c == d.classification) {
            Some((_, n)) => *n += 1,
            None => counts.push((d.classification, 1)),
        }
        let (name, agrees) = match order {
            Ok(r) => (order_name(r.order), expected_order(d.classification).map(|o| o == r.order)),
            Err(e) => (status(e), Some(false)),
        };
        let agrees = match agrees {
            Some(true) => "yes",
            Some(false) => {
                disagreements += 1;
                "no"
            }
            None => "n/a",
        };
        csv.row(
            [num(*s), num(d.theta), d.classification.name().into(), name]
                .into_iter()
                .chain([d.witness.lambda0, d.witness.lambda1, d.witness.rho, d.witness.rho_prime].map(num))
                .chain([agrees.to_string()]),
        );
    }
    counts.sort_by_key(|(c, _)| c.name());
    Ok(ClassifyReport {
        csv: csv.into_string(),
        counts,
        disagreements,
    })
}

pub const SURFACE_HEADER: [&str; 9] = ["s", "theta", "x0", "x1", "x2", "x3", "residual", "min_sv", "status"];

pub struct SurfaceOutput {
    pub csv: String,
    pub mesh: Mesh,
}

pub fn surface(ctx: &Context) -> Result<SurfaceOutput, CliError> {
    let kind = ctx.config.kind();
    let n_s = ctx.samples(50);
    let n_theta = ctx.config.grid.theta_samples.unwrap_or(50);
    let patch = sample_patch(&ctx.sys, kind, ctx.s_range(), ctx.config.theta_range(), n_s, n_theta);
    require_some(patch.samples.iter().map(|p| p.data.as_ref().err()))?;
    let mut csv = Csv::new(&SURFACE_HEADER);
    for p in &patch.samples {
        match &p.data {
            Ok(d) => csv.row(
                [num(p.s), num(p.theta)]
                    .into_iter()
                    .chain(vec_fields(&d.position))
                    .chain([num(d.residual), num(d.min_sv), "ok".into()]),
            ),
            Err(e) => csv.row([num(p.s), num(p.theta)].into_iter().chain(nan_fields(6)).chain([status(e)])),
        }
    }
    let proj = ctx.config.output.projection.unwrap_or(crate::config::Projection::Auto);
    let mesh = obj_mesh(&patch, proj, &ctx.config.digest());
    Ok(SurfaceOutput {
        csv: csv.into_string(),
        mesh,
    })
}

fn describe(name: &str) -> &'static str {
    match name {
        "helix_r3" => "circular helix in the slice x0 = 0 (k_g = tau_g = 1/2)",
        "h3_circle" => "small circle of hyperbolic 3-space (k_n tau_2 + k_g tau_g = 0)",
        "h3_torsion" => "curve of hyperbolic 3-space with k_g^2 < 1 and nonzero torsion",
        "graph_perturbed" => "wobbling helix on x0 = 0.3(u1^2 + u2^2) with four swallowtails",
        "graph_slice" => "helix on x0 = 0.3(u1^2 + u2^2) inside a spacelike slice",
        _ => "",
    }
}

pub fn examples(name: Option<&str>) -> Result<String, CliError> {
    match name {
        None => Ok(builtins::NAMES.iter().map(|n| format!("{n:<16} {}\n", describe(n))).collect()),
        Some(n) => {
            let spec = builtins::by_name(n).ok_or_else(|| {
                CliError::config(format!("unknown builtin {n:?}; available: {}", builtins::NAMES.join(", ")))
            })?;
            let cfg = RunConfig::explicit(&spec);
            Ok(format!("# {}\n{}", describe(n), toml::to_string(&cfg).expect("config serializes")))
        }
    }
}
