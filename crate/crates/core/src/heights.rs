//! Tangential height functions `h_v(s) = ⟨t(s), v⟩` and a brute-force
//! detector for the order of their singularities.

use nalgebra::{Matrix2x3, Matrix3};

use crate::error::{Error, Result};
use crate::frame::{CurveSystem, FrameSample};
use crate::minkowski::{pseudo_dot, pseudo_sphere_residual, JetVec4, PseudoSphere, SpacetimeVector, Vec4};
use crate::smoothcurve::Jet;

/// Default relative band for "this derivative vanishes".
pub const AK_TOL: f64 = 1e-6;
/// Allowed distance of a direction from its pseudo-sphere.
pub const DIRECTION_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum HeightFamilyKind {
    /// Directions on hyperbolic 3-space.
    TimelikeTangential,
    /// Directions on de Sitter 3-space.
    SpacelikeTangential,
}

impl HeightFamilyKind {
    pub fn sphere(self) -> PseudoSphere {
        match self {
            HeightFamilyKind::TimelikeTangential => PseudoSphere::H3,
            HeightFamilyKind::SpacelikeTangential => PseudoSphere::S31,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SingularityOrder {
    /// The function itself does not vanish.
    NonZero,
    /// `g = g' = … = g^(k) = 0` and `g^(k+1) ≠ 0`.
    Finite(usize),
    InfiniteWithinTolerance,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SingularityReport {
    pub s0: f64,
    pub order: SingularityOrder,
    /// `|g|, |g'|, …` up to the first one above the band (or `k_max + 1`).
    pub magnitudes: Vec<f64>,
    pub tol: f64,
    pub scale: f64,
}

/// Order of vanishing from derivative values `g, g', …, g^(k_max+1)`.
pub fn vanishing_order(s0: f64, derivs: &[f64], k_max: usize, tol: f64) -> SingularityReport {
    let considered = &derivs[..(k_max + 2).min(derivs.len())];
    let scale = considered.iter().fold(1.0f64, |m, d| m.max(d.abs()));
    let band = tol * scale;
    let first = considered.iter().position(|d| d.abs() > band);
    let (order, upto) = match first {
        Some(0) => (SingularityOrder::NonZero, 1),
        Some(j) => (SingularityOrder::Finite(j - 1), j + 1),
        None => (SingularityOrder::InfiniteWithinTolerance, considered.len()),
    };
    SingularityReport {
        s0,
        order,
        magnitudes: considered[..upto].iter().map(|d| d.abs()).collect(),
        tol,
        scale,
    }
}

fn check_direction(kind: HeightFamilyKind, v: &Vec4) -> Result<()> {
    let residual = pseudo_sphere_residual(v, kind.sphere());
    if residual.abs() > DIRECTION_TOL || !residual.is_finite() {
        return Err(Error::BadDirection { residual });
    }
    Ok(())
}

/// Jet of `h_v(σ) = ⟨t(σ), v⟩` in arc length at `s`, truncated to `order`.
pub fn height_jet(sys: &CurveSystem, kind: HeightFamilyKind, v: &Vec4, s: f64, order: usize) -> Result<Jet> {
    check_direction(kind, v)?;
    let (gamma, _) = sys.unit_speed_jets(s)?;
    let t = gamma.differentiate().truncate(order);
    Ok(project(&t, v))
}

/// Smallest `k` with `h = h' = … = h^(k) = 0 ≠ h^(k+1)` at `s0`, within
/// `tol · max(1, max |h^(j)|)`.
pub fn detect_ak(
    sys: &CurveSystem,
    kind: HeightFamilyKind,
    v: &Vec4,
    s0: f64,
    k_max: usize,
    tol: f64,
) -> Result<SingularityReport> {
    let available = sys.order() - 1;
    if k_max + 1 > available {
        return Err(Error::InvalidInput(format!(
            "k_max = {k_max} needs jets of order {}, only {available} available",
            k_max + 1
        )));
    }
    let h = height_jet(sys, kind, v, s0, k_max + 1)?;
    Ok(vanishing_order(s0, &h.derivatives(), k_max, tol))
}

fn regime_gap(kind: HeightFamilyKind, f: &FrameSample, eps: f64) -> Result<f64> {
    let gap = f.k_g * f.k_g - f.k_n * f.k_n;
    let ok = match kind {
        HeightFamilyKind::TimelikeTangential => gap > eps,
        HeightFamilyKind::SpacelikeTangential => gap < -eps,
    };
    if !ok {
        return Err(Error::WrongRegime { s: f.s, gap });
    }
    Ok(gap.abs())
}

/// `cosh θ/√(k_g²−k_n²)·(k_g n_γ + k_n n₁) + sinh θ·n₂`, or the de Sitter
/// analogue with `cos`, `sin` and `√(k_n²−k_g²)`, as a jet in `s` at fixed θ.
pub fn direction_jet(f: &FrameSample, kind: HeightFamilyKind, theta: f64, eps: f64) -> Result<JetVec4> {
    regime_gap(kind, f, eps)?;
    let j = &f.jets;
    let gap = &j.k_g * &j.k_g - &j.k_n * &j.k_n;
    let (c, sn, root) = match kind {
        HeightFamilyKind::TimelikeTangential => (theta.cosh(), theta.sinh(), gap.sqrt()?),
        HeightFamilyKind::SpacelikeTangential => (theta.cos(), theta.sin(), (-gap).sqrt()?),
    };
    let coef = root.recip()?.scale(c);
    let n = j.n_gamma.truncate(j.n1.order());
    let main = n.scale(&j.k_g) + j.n1.scale(&j.k_n);
    Ok(main.scale(&coef) + j.n2.map(|x| x.scale(sn)))
}

pub fn closed_form_direction(sys: &CurveSystem, kind: HeightFamilyKind, s: f64, theta: f64) -> Result<Vec4> {
    let f = sys.frame_at(s)?;
    Ok(direction_jet(&f, kind, theta, sys.tol().assume)?.values())
}

#[derive(Clone, Debug, PartialEq)]
pub struct VersalityReport {
    pub rank_b: usize,
    pub singular_values_b: [f64; 2],
    pub det_a: f64,
    /// Product of the row norms of `A`, an upper bound for `|det A|`.
    pub det_scale: f64,
    /// Coordinate of `v0` solved for on the pseudo-sphere.
    pub chart: usize,
}

/// Rank of the 2×3 matrix `B` and determinant of the 3×3 matrix `A` whose
/// rows are the derivatives in the sphere coordinates `v_i` (`i ≠ chart`)
/// of `h, h'` (for `B`) and `h, h', h''` (for `A`) at `s0`.
pub fn versality_check(sys: &CurveSystem, kind: HeightFamilyKind, s0: f64, v0: &Vec4) -> Result<VersalityReport> {
    check_direction(kind, v0)?;
    let (gamma, _) = sys.unit_speed_jets(s0)?;
    let t = gamma.differentiate();
    let chart = match kind {
        HeightFamilyKind::TimelikeTangential => 0,
        HeightFamilyKind::SpacelikeTangential => (0..4)
            .max_by(|a, b| v0.0[*a].abs().total_cmp(&v0.0[*b].abs()))
            .expect("four components"),
    };
    let free: Vec<usize> = (0..4).filter(|i| *i != chart).collect();
    let sign = |i: usize| if i == 0 { -1.0 } else { 1.0 };
    let row = |m: usize| -> [f64; 3] {
        let x = t.derivative(m);
        let mut r = [0.0; 3];
        for (slot, &i) in r.iter_mut().zip(&free) {
            *slot = sign(i) * (x.0[i] - v0.0[i] / v0.0[chart] * x.0[chart]);
        }
        r
    };
    let rows = [row(0), row(1), row(2)];
    let b = Matrix2x3::from_fn(|r, c| rows[r][c]);
    let sv = b.singular_values();
    let (s_max, s_min) = (sv[0].max(sv[1]), sv[0].min(sv[1]));
    let rank_b = if s_max == 0.0 {
        0
    } else if s_min > 1e-8 * s_max {
        2
    } else {
        1
    };
    let a = Matrix3::from_fn(|r, c| rows[r][c]);
    let det_scale = rows.iter().map(|r| r.iter().map(|x| x * x).sum::<f64>().sqrt()).product();
    Ok(VersalityReport {
        rank_b,
        singular_values_b: [s_max, s_min],
        det_a: a.determinant(),
        det_scale,
        chart,
    })
}

/// Order of contact of the curve with the slice `HP(v0, c)` at `s0`, i.e. the
/// vanishing order of `g(s) = ⟨γ(s), v0⟩ − c`.
pub fn contact_order_with_slice(
    sys: &CurveSystem,
    v0: &Vec4,
    c: f64,
    s0: f64,
    k_max: usize,
    tol: f64,
) -> Result<SingularityReport> {
    if k_max + 1 > sys.order() {
        return Err(Error::InvalidInput(format!("k_max = {k_max} exceeds the jet order")));
    }
    let (gamma, _) = sys.unit_speed_jets(s0)?;
    let g = project(&gamma, v0) - c;
    Ok(vanishing_order(s0, &g.derivatives(), k_max, tol))
}

/// `⟨x, v⟩` for a jet vector and a fixed direction.
pub fn project(x: &JetVec4, v: &Vec4) -> Jet {
    let like = &x.0[0];
    pseudo_dot(x, &SpacetimeVector(v.0.map(|c| like.constant_like(c))))
}
