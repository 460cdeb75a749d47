//! Hyperbolic and de Sitter surfaces of a curve, their singular loci and
//! the classification of singular points.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::frame::{CurveSystem, DerivedInvariants, FrameSample};
use crate::heights::{direction_jet, HeightFamilyKind};
use crate::minkowski::{causal_character, pseudo_dot, CausalCharacter, PseudoSphere, Vec4};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SurfaceKind {
    /// Surface in hyperbolic 3-space, defined where `k_g² > k_n²`.
    Hyperbolic,
    /// Surface in de Sitter 3-space, defined where `k_n² > k_g²`.
    DeSitter,
}

impl SurfaceKind {
    pub fn family(self) -> HeightFamilyKind {
        match self {
            SurfaceKind::Hyperbolic => HeightFamilyKind::TimelikeTangential,
            SurfaceKind::DeSitter => HeightFamilyKind::SpacelikeTangential,
        }
    }

    pub fn sphere(self) -> PseudoSphere {
        self.family().sphere()
    }

    pub fn default_theta_range(self) -> (f64, f64) {
        match self {
            SurfaceKind::Hyperbolic => (-2.5, 2.5),
            SurfaceKind::DeSitter => (0.0, 2.0 * std::f64::consts::PI),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SurfaceKind::Hyperbolic => "hyperbolic",
            SurfaceKind::DeSitter => "desitter",
        }
    }
}

pub fn surface_point(sys: &CurveSystem, kind: SurfaceKind, s: f64, theta: f64) -> Result<Vec4> {
    let f = sys.frame_at(s)?;
    Ok(direction_jet(&f, kind.family(), theta, sys.tol().assume)?.values())
}

/// θ on the singular locus from precomputed invariants: `tanh θ` (or `tan θ`)
/// equals `λ₀ / (D √|k_g² − k_n²|)` with `D = k_nτ₂ + k_gτ_g`.
pub fn theta_from_invariants(kind: SurfaceKind, di: &DerivedInvariants, eps: f64) -> Result<f64> {
    if di.d.abs() <= eps {
        return Err(Error::DegenerateAssumption { s: di.s, value: di.d });
    }
    let ok = match kind {
        SurfaceKind::Hyperbolic => di.gap > eps,
        SurfaceKind::DeSitter => di.gap < -eps,
    };
    if !ok {
        return Err(Error::WrongRegime { s: di.s, gap: di.gap });
    }
    let ratio = di.lambda0 / (di.d * di.gap.abs().sqrt());
    match kind {
        SurfaceKind::Hyperbolic if ratio.abs() >= 1.0 => Err(Error::NoRealTheta { s: di.s, ratio }),
        SurfaceKind::Hyperbolic => Ok(ratio.atanh()),
        SurfaceKind::DeSitter => Ok(ratio.atan()),
    }
}

pub fn theta_singular(sys: &CurveSystem, kind: SurfaceKind, s: f64) -> Result<f64> {
    let di = sys.derived_invariants_at(s)?;
    theta_from_invariants(kind, &di, sys.tol().assume)
}

/// Position and its partial derivatives in `s` and `θ`.
fn point_and_partials(f: &FrameSample, kind: SurfaceKind, theta: f64, eps: f64) -> Result<(Vec4, Vec4, Vec4)> {
    let v = direction_jet(f, kind.family(), theta, eps)?;
    let ds = v.derivative(1);
    let gap = f.k_g * f.k_g - f.k_n * f.k_n;
    let main = f.n_gamma.scaled(f.k_g) + f.n1.scaled(f.k_n);
    let dtheta = match kind {
        SurfaceKind::Hyperbolic => main.scaled(theta.sinh() / gap.sqrt()) + f.n2.scaled(theta.cosh()),
        SurfaceKind::DeSitter => main.scaled(-theta.sin() / (-gap).sqrt()) + f.n2.scaled(theta.cos()),
    };
    Ok((v.values(), ds, dtheta))
}

/// Smallest singular value of the 4×2 matrix `[p q]`, via
/// `σ_min σ_max = ‖p ∧ q‖` so that it stays accurate near rank one.
pub fn min_singular_value_4x2(p: &Vec4, q: &Vec4) -> f64 {
    let (p, q) = (&p.0, &q.0);
    let a: f64 = p.iter().map(|x| x * x).sum();
    let c: f64 = q.iter().map(|x| x * x).sum();
    let b: f64 = p.iter().zip(q).map(|(x, y)| x * y).sum();
    let mut wedge = 0.0;
    for i in 0..4 {
        for j in i + 1..4 {
            let m = p[i] * q[j] - p[j] * q[i];
            wedge += m * m;
        }
    }
    let s_max_sq = 0.5 * (a + c) + (0.25 * (a - c) * (a - c) + b * b).sqrt();
    if s_max_sq == 0.0 {
        return 0.0;
    }
    wedge.sqrt() / s_max_sq.sqrt()
}

pub fn jacobian_min_sv(sys: &CurveSystem, kind: SurfaceKind, s: f64, theta: f64) -> Result<f64> {
    let f = sys.frame_at(s)?;
    let (_, ds, dt) = point_and_partials(&f, kind, theta, sys.tol().assume)?;
    Ok(min_singular_value_4x2(&ds, &dt))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Classification {
    CuspidalEdge,
    Swallowtail,
    CuspidalBeaks,
    SliceDegenerate,
    Unresolved,
}

impl Classification {
    pub fn name(self) -> &'static str {
        match self {
            Classification::CuspidalEdge => "CuspidalEdge",
            Classification::Swallowtail => "Swallowtail",
            Classification::CuspidalBeaks => "CuspidalBeaks",
            Classification::SliceDegenerate => "SliceDegenerate",
            Classification::Unresolved => "Unresolved",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Witness {
    pub lambda0: f64,
    pub lambda1: f64,
    pub rho: f64,
    pub rho_prime: f64,
}

impl Witness {
    pub fn from_invariants(di: &DerivedInvariants) -> Self {
        Witness {
            lambda0: di.lambda0,
            lambda1: di.lambda1,
            rho: di.rho,
            rho_prime: di.rho_prime,
        }
    }
}

/// Absolute bands below which a witness value counts as zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZeroBands {
    pub lambda0: f64,
    pub lambda1: f64,
    pub rho: f64,
    pub rho_prime: f64,
}

impl ZeroBands {
    pub fn uniform(band: f64) -> Self {
        ZeroBands {
            lambda0: band,
            lambda1: band,
            rho: band,
            rho_prime: band,
        }
    }
}

/// Decision table for a point already on the singular locus.
/// `rho_vanishes_nearby` marks `ρ ≡ 0` on a neighborhood.
pub fn classify_point(w: &Witness, bands: &ZeroBands, rho_vanishes_nearby: bool) -> Classification {
    let zero = |x: f64, band: f64| x.abs() <= band;
    if rho_vanishes_nearby {
        return Classification::SliceDegenerate;
    }
    if !zero(w.rho, bands.rho) {
        return Classification::CuspidalEdge;
    }
    if zero(w.rho_prime, bands.rho_prime) {
        return Classification::Unresolved;
    }
    if !zero(w.lambda0, bands.lambda0) {
        Classification::Swallowtail
    } else if !zero(w.lambda1, bands.lambda1) {
        Classification::CuspidalBeaks
    } else {
        Classification::Unresolved
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LocusData {
    pub theta: f64,
    pub position: Vec4,
    pub classification: Classification,
    pub witness: Witness,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SingularLocusPoint {
    pub s: f64,
    /// Inserted by refining a sign change of `ρ`.
    pub refined_root: bool,
    pub data: Result<LocusData, Error>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocusOptions {
    /// Relative zero band for the classification witnesses.
    pub rel: f64,
    /// Width in `s` to which roots of `ρ` are refined.
    pub root_tol: f64,
}

impl Default for LocusOptions {
    fn default() -> Self {
        LocusOptions {
            rel: 1e-6,
            root_tol: 1e-10,
        }
    }
}

pub fn grid(range: (f64, f64), n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![range.0],
        _ => (0..n)
            .map(|i| range.0 + (range.1 - range.0) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

type Sample = (f64, Result<(DerivedInvariants, f64, Vec4)>);

fn locus_sample(sys: &CurveSystem, kind: SurfaceKind, s: f64) -> Sample {
    let eps = sys.tol().assume;
    let r = sys.frame_at(s).and_then(|f| {
        let di = DerivedInvariants::from_frame(&f);
        let theta = theta_from_invariants(kind, &di, eps)?;
        let pos = direction_jet(&f, kind.family(), theta, eps)?.values();
        Ok((di, theta, pos))
    });
    (s, r)
}

fn rho_at(sys: &CurveSystem, s: f64) -> Result<f64> {
    Ok(sys.derived_invariants_at(s)?.rho)
}

/// Bisection on a sign change of `f` in `[a, b]` down to width `tol`.
pub fn bisect(mut f: impl FnMut(f64) -> Result<f64>, mut a: f64, mut b: f64, tol: f64) -> Result<f64> {
    let mut fa = f(a)?;
    while b - a > tol {
        let m = 0.5 * (a + b);
        let fm = f(m)?;
        if fm == 0.0 {
            return Ok(m);
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Singular locus sampled on a grid over `s_range`, plus the refined roots
/// of `ρ`, in increasing `s`.
pub fn singular_locus(
    sys: &CurveSystem,
    kind: SurfaceKind,
    s_range: (f64, f64),
    n_samples: usize,
    opts: &LocusOptions,
) -> Vec<SingularLocusPoint> {
    let samples: Vec<Sample> = grid(s_range, n_samples)
        .into_par_iter()
        .map(|s| locus_sample(sys, kind, s))
        .collect();

    let brackets: Vec<(f64, f64)> = samples
        .windows(2)
        .filter_map(|w| match (&w[0].1, &w[1].1) {
            (Ok(a), Ok(b)) if a.0.rho * b.0.rho < 0.0 => Some((w[0].0, w[1].0)),
            _ => None,
        })
        .collect();
    let roots: Vec<Sample> = brackets
        .into_par_iter()
        .filter_map(|(a, b)| bisect(|s| rho_at(sys, s), a, b, opts.root_tol).ok())
        .map(|s| locus_sample(sys, kind, s))
        .collect();

    let ok: Vec<&DerivedInvariants> = samples.iter().filter_map(|(_, r)| r.as_ref().ok().map(|x| &x.0)).collect();
    let scale = |g: fn(&DerivedInvariants) -> f64| ok.iter().fold(1.0f64, |m, d| m.max(g(d).abs()));
    let bands = ZeroBands {
        lambda0: opts.rel * scale(|d| d.lambda0),
        lambda1: opts.rel * scale(|d| d.lambda1),
        rho: opts.rel * scale(|d| d.rho),
        rho_prime: opts.rel * scale(|d| d.rho_prime),
    };
    let flat = !ok.is_empty() && ok.iter().all(|d| d.rho.abs() <= bands.rho);

    let to_point = |(s, r): Sample, refined_root: bool| SingularLocusPoint {
        s,
        refined_root,
        data: r.map(|(di, theta, position)| {
            let witness = Witness::from_invariants(&di);
            LocusData {
                theta,
                position,
                classification: classify_point(&witness, &bands, flat),
                witness,
            }
        }),
    };
    let mut points: Vec<SingularLocusPoint> = samples
        .into_iter()
        .map(|x| to_point(x, false))
        .chain(roots.into_iter().map(|x| to_point(x, true)))
        .collect();
    points.sort_by(|a, b| a.s.total_cmp(&b.s).then(a.refined_root.cmp(&b.refined_root)));
    points
}

#[derive(Clone, Debug, PartialEq)]
pub struct SliceReport {
    /// `max |ρ| < tol`.
    pub is_slice: bool,
    pub v: Option<Vec4>,
    pub c: Option<f64>,
    pub max_rho: f64,
    /// Largest Euclidean distance of a locus point from their mean.
    pub spread: f64,
    /// Smallest singular value of the centered curve samples.
    pub plane_fit: f64,
    pub locus_constant: bool,
    pub in_hyperplane: bool,
}

impl SliceReport {
    pub fn conditions_agree(&self) -> bool {
        self.is_slice == self.locus_constant && self.is_slice == self.in_hyperplane
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SliceTolerances {
    pub rho: f64,
    pub spread: f64,
    pub plane: f64,
}

impl Default for SliceTolerances {
    fn default() -> Self {
        SliceTolerances {
            rho: 1e-6,
            spread: 1e-7,
            plane: 1e-7,
        }
    }
}

/// Tests the three equivalent slice conditions independently: vanishing
/// `ρ`, a constant singular locus, and the curve lying in a hyperplane
/// whose pseudo-normal has the causal type of the surface's target.
pub fn slice_test(
    sys: &CurveSystem,
    kind: SurfaceKind,
    s_range: (f64, f64),
    n_samples: usize,
    tol: &SliceTolerances,
) -> Result<SliceReport> {
    let samples: Vec<Sample> = grid(s_range, n_samples)
        .into_par_iter()
        .map(|s| locus_sample(sys, kind, s))
        .collect();
    let defined: Vec<(f64, &DerivedInvariants, Vec4)> = samples
        .iter()
        .filter_map(|(s, r)| r.as_ref().ok().map(|(d, _, p)| (*s, d, p.clone())))
        .collect();
    if defined.is_empty() {
        let err = samples.into_iter().find_map(|(_, r)| r.err());
        return Err(err.unwrap_or(Error::InvalidInput("empty sample range".into())));
    }
    let max_rho = defined.iter().fold(0.0f64, |m, (_, d, _)| m.max(d.rho.abs()));
    let is_slice = max_rho < tol.rho;

    let n = defined.len() as f64;
    let mean = defined.iter().fold(Vec4::ZERO, |m, (_, _, p)| m + p.scaled(1.0 / n));
    let spread = defined.iter().fold(0.0f64, |m, (_, _, p)| m.max((p - &mean).euclid_norm()));
    let locus_constant = spread < tol.spread;

    let points: Vec<Vec4> = defined
        .iter()
        .map(|(s, _, _)| sys.unit_speed_jets(*s).map(|(g, _)| g.values()))
        .collect::<Result<_>>()?;
    let centroid = points.iter().fold(Vec4::ZERO, |m, p| m + p.scaled(1.0 / n));
    let m = DMatrix::from_fn(points.len(), 4, |r, c| points[r].0[c] - centroid.0[c]);
    let svd = m.svd(false, true);
    let (imin, plane_fit) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, x)| if *x < acc.1 { (i, *x) } else { acc });
    let vt = svd.v_t.expect("requested V^T");
    // A Euclidean normal ν gives ν·x = ⟨x, (−ν₀, ν₁, ν₂, ν₃)⟩.
    let pseudo_normal = Vec4::from_array([-vt[(imin, 0)], vt[(imin, 1)], vt[(imin, 2)], vt[(imin, 3)]]);
    let wanted = match kind {
        SurfaceKind::Hyperbolic => CausalCharacter::Timelike,
        SurfaceKind::DeSitter => CausalCharacter::Spacelike,
    };
    let in_hyperplane = plane_fit < tol.plane * n.sqrt()
        && causal_character(&pseudo_normal, sys.tol().lightlike).ok() == Some(wanted);

    let (v, c) = if is_slice {
        let c = pseudo_dot(&points[0], &mean);
        let off = points.iter().fold(0.0f64, |m, p| m.max((pseudo_dot(p, &mean) - c).abs()));
        if off >= tol.spread {
            (None, None)
        } else {
            (Some(mean), Some(c))
        }
    } else {
        (None, None)
    };
    Ok(SliceReport {
        is_slice,
        v,
        c,
        max_rho,
        spread,
        plane_fit,
        locus_constant,
        in_hyperplane,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct PatchSample {
    pub s: f64,
    pub theta: f64,
    pub data: Result<PatchPoint, Error>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PatchPoint {
    pub position: Vec4,
    pub residual: f64,
    pub min_sv: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SurfacePatch {
    pub kind: SurfaceKind,
    pub n_s: usize,
    pub n_theta: usize,
    pub s_range: (f64, f64),
    pub theta_range: (f64, f64),
    /// Row-major: index `i_s · n_theta + i_theta`.
    pub samples: Vec<PatchSample>,
}

impl SurfacePatch {
    pub fn at(&self, i_s: usize, i_theta: usize) -> &PatchSample {
        &self.samples[i_s * self.n_theta + i_theta]
    }
}

pub fn sample_patch(
    sys: &CurveSystem,
    kind: SurfaceKind,
    s_range: (f64, f64),
    theta_range: (f64, f64),
    n_s: usize,
    n_theta: usize,
) -> SurfacePatch {
    let thetas = grid(theta_range, n_theta);
    let eps = sys.tol().assume;
    let rows: Vec<Vec<PatchSample>> = grid(s_range, n_s)
        .into_par_iter()
        .map(|s| {
            let frame = sys.frame_at(s);
            thetas
                .iter()
                .map(|&theta| {
                    let data = frame.as_ref().map_err(Clone::clone).and_then(|f| {
                        let (p, ds, dt) = point_and_partials(f, kind, theta, eps)?;
                        let q = pseudo_dot(&p, &p);
                        let residual = match kind {
                            SurfaceKind::Hyperbolic => q + 1.0,
                            SurfaceKind::DeSitter => q - 1.0,
                        };
                        Ok(PatchPoint {
                            min_sv: min_singular_value_4x2(&ds, &dt),
                            position: p,
                            residual,
                        })
                    });
                    PatchSample { s, theta, data }
                })
                .collect()
        })
        .collect();
    SurfacePatch {
        kind,
        n_s,
        n_theta,
        s_range,
        theta_range,
        samples: rows.into_iter().flatten().collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtins;
    use crate::frame::compile_system;
    use crate::minkowski::pseudo_sphere_residual;
    use nalgebra::Matrix4x2;
    use proptest::prelude::*;

    fn all_ok(points: &[SingularLocusPoint]) -> Vec<&LocusData> {
        points.iter().map(|p| p.data.as_ref().unwrap()).collect()
    }

    #[test]
    fn points_lie_on_their_sphere() {
        let sys = compile_system(builtins::graph_perturbed()).unwrap();
        for (s, th) in [(0.3, -2.0), (2.0, 0.5), (5.0, 1.7)] {
            let p = surface_point(&sys, SurfaceKind::Hyperbolic, s, th).unwrap();
            assert!(pseudo_sphere_residual(&p, PseudoSphere::H3).abs() < 1e-11);
        }
        let sys = compile_system(builtins::h3_torsion()).unwrap();
        for (s, th) in [(-2.0, 0.0), (0.5, 2.5), (2.9, 5.0)] {
            let p = surface_point(&sys, SurfaceKind::DeSitter, s, th).unwrap();
            assert!(pseudo_sphere_residual(&p, PseudoSphere::S31).abs() < 1e-11);
        }
    }

    #[test]
    fn theta_error_order() {
        let circle = compile_system(builtins::h3_circle()).unwrap();
        assert!(matches!(theta_singular(&circle, SurfaceKind::Hyperbolic, 0.0), Err(Error::DegenerateAssumption { .. })));
        assert!(matches!(theta_singular(&circle, SurfaceKind::DeSitter, 0.0), Err(Error::DegenerateAssumption { .. })));
        let torsion = compile_system(builtins::h3_torsion()).unwrap();
        assert!(matches!(theta_singular(&torsion, SurfaceKind::Hyperbolic, 0.0), Err(Error::WrongRegime { .. })));
        assert!(theta_singular(&torsion, SurfaceKind::DeSitter, 0.0).unwrap().abs() < 1e-12);
    }

    #[test]
    fn jacobian_drops_rank_exactly_on_the_locus() {
        let sys = compile_system(builtins::graph_perturbed()).unwrap();
        for s in [0.4, 2.5, 4.4] {
            let th = theta_singular(&sys, SurfaceKind::Hyperbolic, s).unwrap();
            assert!(jacobian_min_sv(&sys, SurfaceKind::Hyperbolic, s, th).unwrap() < 1e-10);
            assert!(jacobian_min_sv(&sys, SurfaceKind::Hyperbolic, s, th + 0.5).unwrap() > 1e-3);
        }
    }

    #[test]
    fn rho_matches_finite_difference_of_height_function() {
        let sys = compile_system(builtins::graph_perturbed()).unwrap();
        for s in [0.4, 1.5, 3.0, 5.5] {
            let th = theta_singular(&sys, SurfaceKind::Hyperbolic, s).unwrap();
            let v = surface_point(&sys, SurfaceKind::Hyperbolic, s, th).unwrap();
            let h = |x: f64| pseudo_dot(&sys.unit_speed_jets(x).unwrap().0.derivative(1), &v);
            let e = 1e-2;
            let f: Vec<f64> = (-3..=3).map(|k| h(s + k as f64 * e)).collect();
            let d3 = (-f[0] + 8.0 * f[1] - 13.0 * f[2] + 13.0 * f[4] - 8.0 * f[5] + f[6]) / (8.0 * e.powi(3));
            let di = sys.derived_invariants_at(s).unwrap();
            let oracle = -d3 * di.d * di.gap.sqrt() / th.cosh();
            assert!((di.rho - oracle).abs() < 1e-6, "{} vs {oracle}", di.rho);
        }
    }

    #[test]
    fn decision_table() {
        let bands = ZeroBands::uniform(1e-6);
        let w = |l0, l1, rho, rp| Witness {
            lambda0: l0,
            lambda1: l1,
            rho,
            rho_prime: rp,
        };
        assert_eq!(classify_point(&w(0.0, 0.0, 0.1, 0.0), &bands, false), Classification::CuspidalEdge);
        assert_eq!(classify_point(&w(0.1, 0.0, 0.0, 0.2), &bands, false), Classification::Swallowtail);
        assert_eq!(classify_point(&w(0.0, 0.1, 0.0, 0.2), &bands, false), Classification::CuspidalBeaks);
        assert_eq!(classify_point(&w(0.0, 0.0, 0.0, 0.2), &bands, false), Classification::Unresolved);
        assert_eq!(classify_point(&w(0.1, 0.1, 0.0, 0.0), &bands, false), Classification::Unresolved);
        assert_eq!(classify_point(&w(0.1, 0.1, 0.0, 0.0), &bands, true), Classification::SliceDegenerate);
    }

    #[test]
    fn perturbed_graph_has_four_swallowtails() {
        let sys = compile_system(builtins::graph_perturbed()).unwrap();
        let pts = singular_locus(&sys, SurfaceKind::Hyperbolic, (0.0, sys.length()), 120, &LocusOptions::default());
        let data = all_ok(&pts);
        let tails: Vec<f64> = pts
            .iter()
            .filter(|p| p.data.as_ref().unwrap().classification == Classification::Swallowtail)
            .map(|p| p.s)
            .collect();
        assert_eq!(tails.len(), 4);
        for (got, want) in tails.iter().zip([1.0756, 1.8907, 4.0419, 4.8569]) {
            assert!((got - want).abs() < 1e-3, "{got}");
        }
        assert_eq!(data.iter().filter(|d| d.classification == Classification::CuspidalEdge).count(), 120);
        assert!(pts.windows(2).all(|w| w[0].s <= w[1].s));
    }

    #[test]
    fn degenerate_and_wrong_regime_samples_carry_errors() {
        let circle = compile_system(builtins::h3_circle()).unwrap();
        let pts = singular_locus(&circle, SurfaceKind::Hyperbolic, (-2.0, 2.0), 21, &LocusOptions::default());
        assert!(pts.iter().all(|p| matches!(p.data, Err(Error::DegenerateAssumption { .. }))));
        let torsion = compile_system(builtins::h3_torsion()).unwrap();
        let pts = singular_locus(&torsion, SurfaceKind::Hyperbolic, (-3.0, 3.0), 21, &LocusOptions::default());
        assert!(pts.iter().all(|p| matches!(p.data, Err(Error::WrongRegime { .. }))));
        let pts = singular_locus(&torsion, SurfaceKind::DeSitter, (-3.0, 3.0), 21, &LocusOptions::default());
        assert!(all_ok(&pts).iter().all(|d| d.classification == Classification::CuspidalEdge));
    }

    #[test]
    fn slice_curves_are_slice_degenerate() {
        for spec in [builtins::helix_r3(), builtins::graph_slice()] {
            let sys = compile_system(spec).unwrap();
            let pts = singular_locus(&sys, SurfaceKind::Hyperbolic, (0.0, sys.length()), 40, &LocusOptions::default());
            assert!(all_ok(&pts).iter().all(|d| d.classification == Classification::SliceDegenerate));
        }
    }

    #[test]
    fn slice_conditions_agree() {
        let tol = SliceTolerances::default();
        let sys = compile_system(builtins::graph_slice()).unwrap();
        let r = slice_test(&sys, SurfaceKind::Hyperbolic, (0.0, sys.length()), 60, &tol).unwrap();
        assert!(r.is_slice && r.conditions_agree());
        let v = r.v.unwrap();
        assert!((&v - &Vec4::E0).euclid_norm() < 1e-9);
        assert!((r.c.unwrap() + 0.192).abs() < 1e-9);

        let sys = compile_system(builtins::graph_perturbed()).unwrap();
        let r = slice_test(&sys, SurfaceKind::Hyperbolic, (0.0, sys.length()), 60, &tol).unwrap();
        assert!(!r.is_slice && r.conditions_agree());
        assert!(r.v.is_none());

        let sys = compile_system(builtins::h3_circle()).unwrap();
        assert!(slice_test(&sys, SurfaceKind::Hyperbolic, (-2.0, 2.0), 10, &tol).is_err());
    }

    #[test]
    fn patch_layout_and_residuals() {
        let sys = compile_system(builtins::graph_perturbed()).unwrap();
        let p = sample_patch(&sys, SurfaceKind::Hyperbolic, (0.0, 1.0), (-1.0, 1.0), 5, 7);
        assert_eq!(p.samples.len(), 35);
        let x = p.at(2, 3);
        assert!((x.s - 0.5).abs() < 1e-15 && x.theta.abs() < 1e-15);
        for sample in &p.samples {
            let d = sample.data.as_ref().unwrap();
            assert!(d.residual.abs() < 1e-11);
            let direct = surface_point(&sys, SurfaceKind::Hyperbolic, sample.s, sample.theta).unwrap();
            assert!((&direct - &d.position).euclid_norm() < 1e-13);
        }
    }

    #[test]
    fn locus_is_deterministic_across_thread_counts() {
        let sys = compile_system(builtins::graph_perturbed()).unwrap();
        let run = |n: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .unwrap()
                .install(|| singular_locus(&sys, SurfaceKind::Hyperbolic, (0.0, sys.length()), 50, &LocusOptions::default()))
        };
        assert_eq!(run(1), run(4));
    }

    proptest! {
        #[test]
        fn min_singular_value_matches_svd(a in prop::array::uniform8(-3.0f64..3.0)) {
            let p = Vec4::from_array([a[0], a[1], a[2], a[3]]);
            let q = Vec4::from_array([a[4], a[5], a[6], a[7]]);
            let m = Matrix4x2::from_columns(&[p.0.into(), q.0.into()]);
            let sv = m.singular_values();
            let want = sv[0].min(sv[1]);
            prop_assert!((min_singular_value_4x2(&p, &q) - want).abs() < 1e-9 * sv[0].max(sv[1]).max(1.0));
        }
    }
}
