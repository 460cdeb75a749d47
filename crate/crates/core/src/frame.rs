//! Curves on spacelike hypersurfaces, arc length, and the Lorentzian
//! Darboux frame with its invariants.

use quadrature::double_exponential;

use crate::error::{Error, Result};
use crate::minkowski::{
    causal_character, pseudo_dot, pseudo_norm, wedge3, CausalCharacter, JetVec4, SpacetimeVector, Vec4,
};
use crate::smoothcurve::{parse_expr, Arg, Expr, Jet, DEFAULT_ORDER};

pub const SURFACE_VARS: [&str; 3] = ["u1", "u2", "u3"];

#[derive(Clone, Debug, PartialEq)]
pub struct Tolerances {
    /// Smallest accepted geodesic curvature.
    pub kg: f64,
    /// Band around zero for `k_nτ₂ + k_gτ_g` and `k_g² − k_n²`.
    pub assume: f64,
    pub lightlike: f64,
    /// Allowed violation of `⟨n,n⟩ = −1`, `⟨n,γ'⟩ = 0` in direct mode.
    pub direct_normal: f64,
    /// Smallest accepted Euclidean speed.
    pub regular: f64,
    /// Absolute target error of the arc-length quadrature.
    pub quadrature: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            kg: 1e-8,
            assume: 1e-8,
            lightlike: 1e-10,
            direct_normal: 1e-8,
            regular: 1e-10,
            quadrature: 1e-12,
        }
    }
}

/// Source expressions of a curve.
#[derive(Clone, Debug, PartialEq)]
pub enum CurveDef {
    /// `γ = X ∘ γ̄` with `X` in `u1,u2,u3` and `γ̄` in the curve parameter.
    Embedded { hypersurface: [String; 4], curve: [String; 3] },
    /// A curve together with its unit timelike normal, both in the curve parameter.
    Direct { curve: [String; 4], normal: [String; 4] },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SystemSpec {
    pub def: CurveDef,
    /// Name of the curve parameter in the expressions.
    pub param: String,
    /// Working interval in the curve parameter.
    pub interval: (f64, f64),
    pub order: usize,
    pub tol: Tolerances,
}

impl SystemSpec {
    pub fn new(def: CurveDef, interval: (f64, f64)) -> Self {
        SystemSpec {
            def,
            param: "s".into(),
            interval,
            order: DEFAULT_ORDER,
            tol: Tolerances::default(),
        }
    }
}

#[derive(Clone, Debug)]
enum Compiled {
    Embedded {
        x: [Expr; 4],
        dx: [[Expr; 4]; 3],
        curve: [Expr; 3],
    },
    Direct {
        curve: [Expr; 4],
        normal: [Expr; 4],
    },
}

const ARC_PANELS: usize = 64;
const VALIDATION_POINTS: usize = 201;

/// A validated curve system. Arc length `s` is measured from the start of
/// the parameter interval.
#[derive(Clone, Debug)]
pub struct CurveSystem {
    spec: SystemSpec,
    compiled: Compiled,
    panel_u: Vec<f64>,
    panel_s: Vec<f64>,
}

fn parse4(src: &[String; 4], vars: &[&str]) -> Result<[Expr; 4]> {
    Ok([
        parse_expr(&src[0], vars)?,
        parse_expr(&src[1], vars)?,
        parse_expr(&src[2], vars)?,
        parse_expr(&src[3], vars)?,
    ])
}

fn eval4(e: &[Expr; 4], args: &[Arg]) -> Result<JetVec4> {
    Ok(SpacetimeVector([
        e[0].eval_jet(args)?,
        e[1].eval_jet(args)?,
        e[2].eval_jet(args)?,
        e[3].eval_jet(args)?,
    ]))
}

/// Validates the definitions and builds the arc-length table.
pub fn compile_system(spec: SystemSpec) -> Result<CurveSystem> {
    let (a, b) = spec.interval;
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::InvalidInput(format!("bad interval [{a}, {b}]")));
    }
    if spec.order < 6 {
        return Err(Error::InvalidInput(format!("jet order {} is below 6", spec.order)));
    }
    let p = [spec.param.as_str()];
    let compiled = match &spec.def {
        CurveDef::Embedded { hypersurface, curve } => {
            let x = parse4(hypersurface, &SURFACE_VARS)?;
            let dx = SURFACE_VARS.map(|v| x.clone().map(|e| e.diff(v)));
            let curve = [
                parse_expr(&curve[0], &p)?,
                parse_expr(&curve[1], &p)?,
                parse_expr(&curve[2], &p)?,
            ];
            Compiled::Embedded { x, dx, curve }
        }
        CurveDef::Direct { curve, normal } => Compiled::Direct {
            curve: parse4(curve, &p)?,
            normal: parse4(normal, &p)?,
        },
    };
    let mut sys = CurveSystem {
        spec,
        compiled,
        panel_u: Vec::new(),
        panel_s: Vec::new(),
    };
    sys.validate()?;
    sys.build_arc_table()?;
    Ok(sys)
}

impl CurveSystem {
    pub fn spec(&self) -> &SystemSpec {
        &self.spec
    }

    pub fn order(&self) -> usize {
        self.spec.order
    }

    pub fn tol(&self) -> &Tolerances {
        &self.spec.tol
    }

    pub fn is_direct(&self) -> bool {
        matches!(self.compiled, Compiled::Direct { .. })
    }

    /// Total arc length of the working interval.
    pub fn length(&self) -> f64 {
        *self.panel_s.last().expect("arc table is built at compile time")
    }

    fn validate(&self) -> Result<()> {
        let (a, b) = self.spec.interval;
        let tol = &self.spec.tol;
        for i in 0..VALIDATION_POINTS {
            let u = a + (b - a) * i as f64 / (VALIDATION_POINTS - 1) as f64;
            let (gamma, normal) = self.param_jets(u, 1)?;
            let v = gamma.derivative(1);
            if v.euclid_norm() < tol.regular {
                return Err(Error::IrregularCurve { at: u });
            }
            if self.is_direct() {
                let n = normal.values();
                let residual = (pseudo_dot(&n, &n) + 1.0).abs().max(pseudo_dot(&n, &v).abs() / v.euclid_norm());
                if residual > tol.direct_normal {
                    return Err(Error::BadDirectNormal { at: u, residual });
                }
            }
            if pseudo_dot(&v, &v) <= 0.0 {
                return Err(Error::IrregularCurve { at: u });
            }
        }
        Ok(())
    }

    fn curve_jet(&self, u: f64, order: usize) -> Result<JetVec4> {
        let var = Jet::variable(u, order);
        match &self.compiled {
            Compiled::Embedded { x, curve, .. } => {
                let g = self.bar_jets(curve, &var)?;
                eval4(x, &[Arg::Jet(&g[0]), Arg::Jet(&g[1]), Arg::Jet(&g[2])])
            }
            Compiled::Direct { curve, .. } => eval4(curve, &[Arg::Jet(&var)]),
        }
    }

    fn bar_jets(&self, curve: &[Expr; 3], var: &Jet) -> Result<[Jet; 3]> {
        Ok([
            curve[0].eval_jet(&[Arg::Jet(var)])?,
            curve[1].eval_jet(&[Arg::Jet(var)])?,
            curve[2].eval_jet(&[Arg::Jet(var)])?,
        ])
    }

    /// Jets of `γ` and `n_γ` in the definition parameter.
    pub fn param_jets(&self, u: f64, order: usize) -> Result<(JetVec4, JetVec4)> {
        let var = Jet::variable(u, order);
        match &self.compiled {
            Compiled::Embedded { x, dx, curve } => {
                let g = self.bar_jets(curve, &var)?;
                let args = [Arg::Jet(&g[0]), Arg::Jet(&g[1]), Arg::Jet(&g[2])];
                let gamma = eval4(x, &args)?;
                let n = self.unit_normal(dx, &args, u)?;
                Ok((gamma, n))
            }
            Compiled::Direct { curve, normal } => {
                let args = [Arg::Jet(&var)];
                Ok((eval4(curve, &args)?, eval4(normal, &args)?))
            }
        }
    }

    fn unit_normal(&self, dx: &[[Expr; 4]; 3], args: &[Arg], u: f64) -> Result<JetVec4> {
        let xu = [eval4(&dx[0], args)?, eval4(&dx[1], args)?, eval4(&dx[2], args)?];
        let w = wedge3(&xu[0], &xu[1], &xu[2]);
        match causal_character(&w, self.spec.tol.lightlike) {
            Ok(CausalCharacter::Timelike) => {}
            _ => return Err(Error::NotSpacelikeHypersurface { at: u }),
        }
        let norm = pseudo_norm(&w)?;
        let n = w.map(|c| c / &norm);
        // Future directed means ⟨n,e₀⟩ = −n₀ < 0.
        let n0 = n.0[0].value();
        if n0 > 0.0 {
            Ok(n)
        } else if n0 < 0.0 {
            Ok(-n)
        } else {
            Err(Error::Internal(format!("timelike normal with zero time component at {u}")))
        }
    }

    /// Unit timelike future-directed normal of the hypersurface along the
    /// curve, as a jet in the definition parameter.
    pub fn normal_at(&self, u: f64) -> Result<JetVec4> {
        match &self.compiled {
            Compiled::Embedded { dx, curve, .. } => {
                let var = Jet::variable(u, self.spec.order);
                let g = self.bar_jets(curve, &var)?;
                self.unit_normal(dx, &[Arg::Jet(&g[0]), Arg::Jet(&g[1]), Arg::Jet(&g[2])], u)
            }
            Compiled::Direct { .. } => Err(Error::InvalidInput("normal_at needs an embedded system".into())),
        }
    }

    /// `‖γ'(u)‖` in the definition parameter.
    pub fn speed(&self, u: f64) -> Result<f64> {
        let v = self.curve_jet(u, 1)?.derivative(1);
        let q = pseudo_dot(&v, &v);
        if q <= 0.0 {
            return Err(Error::IrregularCurve { at: u });
        }
        Ok(q.sqrt())
    }

    fn integrate_speed(&self, a: f64, b: f64) -> Result<f64> {
        if a == b {
            return Ok(0.0);
        }
        let out = double_exponential::integrate(|u| self.speed(u).unwrap_or(f64::NAN), a, b, self.spec.tol.quadrature);
        if !out.integral.is_finite() {
            return Err(Error::IrregularCurve { at: 0.5 * (a + b) });
        }
        Ok(out.integral)
    }

    fn build_arc_table(&mut self) -> Result<()> {
        let (a, b) = self.spec.interval;
        let us: Vec<f64> = (0..=ARC_PANELS)
            .map(|i| a + (b - a) * i as f64 / ARC_PANELS as f64)
            .collect();
        let mut cum = vec![0.0];
        for w in us.windows(2) {
            let piece = self.integrate_speed(w[0], w[1])?;
            cum.push(cum.last().unwrap() + piece);
        }
        self.panel_u = us;
        self.panel_s = cum;
        Ok(())
    }

    /// Arc length from the start of the interval to parameter `u`.
    pub fn u_to_s(&self, u: f64) -> Result<f64> {
        let i = self.panel_of(&self.panel_u, u);
        Ok(self.panel_s[i] + self.integrate_speed(self.panel_u[i], u)?)
    }

    fn panel_of(&self, table: &[f64], x: f64) -> usize {
        let i = table.partition_point(|t| *t <= x);
        i.saturating_sub(1).min(table.len() - 2)
    }

    /// Definition parameter at arc length `s`. Values outside `[0, length]`
    /// are extrapolated with the end panels.
    pub fn s_to_u(&self, s: f64) -> Result<f64> {
        let i = self.panel_of(&self.panel_s, s);
        let (ua, ub) = (self.panel_u[i], self.panel_u[i + 1]);
        let (sa, sb) = (self.panel_s[i], self.panel_s[i + 1]);
        let inside = (sa..=sb).contains(&s);
        let (mut lo, mut hi) = (ua, ub);
        let mut u = ua + (ub - ua) * (s - sa) / (sb - sa);
        for _ in 0..60 {
            let f = sa + self.integrate_speed(ua, u)? - s;
            if inside {
                if f > 0.0 {
                    hi = u;
                } else {
                    lo = u;
                }
            }
            let mut next = u - f / self.speed(u)?;
            if inside && !(lo..=hi).contains(&next) {
                next = 0.5 * (lo + hi);
            }
            let step = (next - u).abs();
            u = next;
            if step <= 1e-15 * (1.0 + u.abs()) {
                break;
            }
        }
        Ok(u)
    }

    /// Jets of `γ` and `n_γ` in arc length at `s`, of the system order.
    pub fn unit_speed_jets(&self, s: f64) -> Result<(JetVec4, JetVec4)> {
        self.unit_speed_jets_at(s, self.s_to_u(s)?)
    }

    fn unit_speed_jets_at(&self, s: f64, u: f64) -> Result<(JetVec4, JetVec4)> {
        let k = self.spec.order;
        let (gamma, normal) = self.param_jets(u, k)?;
        let v = gamma.differentiate();
        let speed = pseudo_norm(&v)?;
        if speed.value() < self.spec.tol.regular {
            return Err(Error::IrregularCurve { at: u });
        }
        // s(u) = s + ∫ σ, then invert to get u(s).
        let arc = speed.integrate(s);
        let u_of_s = arc.invert()?;
        Ok((gamma.compose(&u_of_s), normal.compose(&u_of_s)))
    }

    pub fn frame_at(&self, s: f64) -> Result<FrameSample> {
        let u = self.s_to_u(s)?;
        let (gamma, n) = self.unit_speed_jets_at(s, u)?;
        build_frame(s, u, gamma, n, self.spec.tol.kg)
    }

    pub fn derived_invariants_at(&self, s: f64) -> Result<DerivedInvariants> {
        Ok(DerivedInvariants::from_frame(&self.frame_at(s)?))
    }

    /// Which standing assumptions hold at each arc-length sample.
    pub fn assumption_report(&self, grid: &[f64]) -> Vec<AssumptionFlags> {
        grid.iter().map(|&s| AssumptionFlags::at(self, s)).collect()
    }
}

/// Jets of the frame and invariants in arc length.
#[derive(Clone, Debug)]
pub struct FrameJets {
    pub gamma: JetVec4,
    pub n_gamma: JetVec4,
    pub t: JetVec4,
    pub n1: JetVec4,
    pub n2: JetVec4,
    pub k_n: Jet,
    pub tau1: Jet,
    pub tau2: Jet,
    pub k_g: Jet,
    pub tau_g: Jet,
}

#[derive(Clone, Debug)]
pub struct FrameSample {
    pub s: f64,
    /// Definition parameter of the same point.
    pub u: f64,
    pub gamma: Vec4,
    pub n_gamma: Vec4,
    pub t: Vec4,
    pub n1: Vec4,
    pub n2: Vec4,
    pub k_n: f64,
    pub tau1: f64,
    pub tau2: f64,
    pub k_g: f64,
    pub tau_g: f64,
    pub jets: FrameJets,
}

impl FrameSample {
    pub fn vectors(&self) -> [&Vec4; 4] {
        [&self.n_gamma, &self.t, &self.n1, &self.n2]
    }

    /// Pseudo-Gram matrix of `(n_γ, t, n₁, n₂)`.
    pub fn gram(&self) -> [[f64; 4]; 4] {
        let v = self.vectors();
        let mut g = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                g[i][j] = pseudo_dot(v[i], v[j]);
            }
        }
        g
    }

    /// Euclidean norms of the four Frenet–Serret residuals, in the order
    /// `n_γ', t', n₁', n₂'`.
    pub fn frenet_residuals(&self) -> [f64; 4] {
        let j = &self.jets;
        let d = |x: &JetVec4| x.derivative(1);
        let (n, t, n1, n2) = (&self.n_gamma, &self.t, &self.n1, &self.n2);
        let (kn, kg, t1, t2, tg) = (self.k_n, self.k_g, self.tau1, self.tau2, self.tau_g);
        let r = [
            d(&j.n_gamma) - (t.scaled(kn) + n1.scaled(t1) + n2.scaled(t2)),
            d(&j.t) - (n.scaled(kn) + n1.scaled(kg)),
            d(&j.n1) - (n.scaled(t1) - t.scaled(kg) + n2.scaled(tg)),
            d(&j.n2) - (n.scaled(t2) - n1.scaled(tg)),
        ];
        r.map(|x| x.euclid_norm())
    }
}

fn dot_jet(a: &JetVec4, b: &JetVec4) -> Jet {
    pseudo_dot(a, b)
}

/// The Darboux frame from arc-length jets of `γ` and `n_γ`.
pub fn build_frame(s: f64, u: f64, gamma: JetVec4, n: JetVec4, eps_kg: f64) -> Result<FrameSample> {
    let t = gamma.differentiate();
    let tp = t.differentiate();
    let n = n.truncate(tp.order());
    let k_n = -dot_jet(&n, &tp);
    let w = tp.clone() - n.scale(&k_n);
    let q = dot_jet(&w, &w);
    if !(q.value() > eps_kg * eps_kg) {
        return Err(Error::FrameDegenerate {
            s,
            reason: format!("k_g = {:e}", q.value().max(0.0).sqrt()),
        });
    }
    let k_g = q.sqrt()?;
    let n1 = w.map(|c| c / &k_g);
    let t_lo = t.truncate(n1.order());
    let n2 = -wedge3(&n, &t_lo, &n1);
    let np = n.differentiate();
    let tau1 = dot_jet(&n1, &np);
    let tau2 = dot_jet(&n2, &np);
    let tau_g = -dot_jet(&n2.differentiate(), &n1);
    let jets = FrameJets {
        gamma,
        n_gamma: n,
        t,
        n1,
        n2,
        k_n,
        tau1,
        tau2,
        k_g,
        tau_g,
    };
    Ok(FrameSample {
        s,
        u,
        gamma: jets.gamma.values(),
        n_gamma: jets.n_gamma.values(),
        t: jets.t.values(),
        n1: jets.n1.values(),
        n2: jets.n2.values(),
        k_n: jets.k_n.value(),
        tau1: jets.tau1.value(),
        tau2: jets.tau2.value(),
        k_g: jets.k_g.value(),
        tau_g: jets.tau_g.value(),
        jets,
    })
}

/// Scalar invariants built from the frame invariants, as jets in arc length.
#[derive(Clone, Debug)]
pub struct DerivedJets {
    /// `k_nτ₂ + k_gτ_g`.
    pub d: Jet,
    /// `k_g² − k_n²`.
    pub gap: Jet,
    pub lambda0: Jet,
    pub lambda1: Jet,
    pub lambda2: Jet,
    pub rho: Jet,
}

#[derive(Clone, Debug)]
pub struct DerivedInvariants {
    pub s: f64,
    pub lambda0: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub rho: f64,
    /// Derivative of the `ρ` jet.
    pub rho_prime: f64,
    pub d: f64,
    pub gap: f64,
    pub jets: DerivedJets,
}

impl DerivedInvariants {
    pub fn from_frame(f: &FrameSample) -> Self {
        let j = &f.jets;
        let d1 = |x: &Jet| x.differentiate();
        let (kn, kg, t1, t2, tg) = (&j.k_n, &j.k_g, &j.tau1, &j.tau2, &j.tau_g);
        let (kn1, kg1, t11, t21, tg1) = (d1(kn), d1(kg), d1(t1), d1(t2), d1(tg));
        let (kn2, kg2, t12) = (d1(&kn1), d1(&kg1), d1(&t11));
        let (kn3, kg3) = (d1(&kn2), d1(&kg2));
        let kn_sq = kn * kn;
        let kg_sq = kg * kg;

        let d = kn * t2 + kg * tg;
        let gap = &kg_sq - &kn_sq;
        let lambda0 = kg * &kn1 + &gap * t1 - kn * &kg1;
        let lambda1 = &kn1 * t2 + kn * &t21 + &kg1 * tg + kg * &tg1;

        let bracket = -(kg * &kn2) - (kg * kn) * (t2 * t2) - (kg * &kg1) * t1 * 2.0 - &kg_sq * &t11
            - &kg_sq * (tg * t2)
            + (kn * &kn1) * t1 * 2.0
            + &kn_sq * &t11
            + &kg2 * kn
            - &kn_sq * (tg * t2)
            - (kg * kn) * (tg * tg);
        let second = &kn1 * t2 * 2.0 + kn * (t1 * tg) + kn * &t21 + &kg1 * tg * 2.0 + kg * (t1 * t2) + kg * &tg1;
        let rho = &bracket * &d + &lambda0 * &second;

        let lambda2 = kg * &kn3 + (&kg2 * kg) * t1 * 3.0 + (&kg1 * &t11) * kg * 3.0 + &kg_sq * &t12
            + &kg_sq * (tg * &t21)
            - &kg_sq * (tg * tg) * t1
            - (kn * t1) * (t2 * &kg_sq)
            + (kn * t1) * (t2 * kg) * tg
            - (kn * &kn2) * t1 * 3.0
            - (kn * &kn1) * &t11 * 3.0
            - &kn_sq * &t12
            + kn * &kg3
            + &kn_sq * t1 * (tg * tg)
            + &kg_sq * t1 * (t2 * t2)
            - &kn_sq * t1 * (t2 * t2)
            + &kn_sq * (t2 * &tg1)
            - &kn_sq * (&t21 * tg)
            - &kg_sq * (&tg1 * t2)
            + (t1 * t1) * (&kn1 * kg) * 2.0
            - (t1 * t1) * (&kg1 * kn) * 2.0;

        let rho_prime = rho.derivative(1);
        DerivedInvariants {
            s: f.s,
            lambda0: lambda0.value(),
            lambda1: lambda1.value(),
            lambda2: lambda2.value(),
            rho: rho.value(),
            rho_prime,
            d: d.value(),
            gap: gap.value(),
            jets: DerivedJets {
                d,
                gap,
                lambda0,
                lambda1,
                lambda2,
                rho,
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    Hyperbolic,
    DeSitter,
    Neither,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AssumptionFlags {
    pub s: f64,
    pub kg_nonzero: bool,
    pub nondegenerate: bool,
    pub gap: f64,
    pub regime: Regime,
    /// Some tested quantity lies within ten times its tolerance band.
    pub near_threshold: bool,
    pub error: Option<String>,
}

impl AssumptionFlags {
    fn at(sys: &CurveSystem, s: f64) -> Self {
        let eps = sys.tol().assume;
        match sys.frame_at(s).map(|f| (f.k_g, DerivedInvariants::from_frame(&f))) {
            Ok((kg, di)) => {
                let regime = if di.gap > eps {
                    Regime::Hyperbolic
                } else if di.gap < -eps {
                    Regime::DeSitter
                } else {
                    Regime::Neither
                };
                let near = di.d.abs() <= 10.0 * eps || di.gap.abs() <= 10.0 * eps || kg <= 10.0 * sys.tol().kg;
                AssumptionFlags {
                    s,
                    kg_nonzero: true,
                    nondegenerate: di.d.abs() > eps,
                    gap: di.gap,
                    regime,
                    near_threshold: near,
                    error: None,
                }
            }
            Err(e) => AssumptionFlags {
                s,
                kg_nonzero: !matches!(e, Error::FrameDegenerate { .. }),
                nondegenerate: false,
                gap: f64::NAN,
                regime: Regime::Neither,
                near_threshold: false,
                error: Some(e.kind().to_string()),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtins;
    use approx::assert_abs_diff_eq;

    fn sys(spec: SystemSpec) -> CurveSystem {
        compile_system(spec).unwrap()
    }

    fn embedded(x: [&str; 4], c: [&str; 3], interval: (f64, f64)) -> SystemSpec {
        SystemSpec::new(
            CurveDef::Embedded {
                hypersurface: x.map(String::from),
                curve: c.map(String::from),
            },
            interval,
        )
    }

    fn direct(c: [&str; 4], n: [&str; 4], interval: (f64, f64)) -> SystemSpec {
        SystemSpec::new(
            CurveDef::Direct {
                curve: c.map(String::from),
                normal: n.map(String::from),
            },
            interval,
        )
    }

    fn assert_vec(a: &Vec4, b: &Vec4, eps: f64) {
        assert!((a - b).euclid_norm() < eps, "{a:?} vs {b:?}");
    }

    #[test]
    fn helix_in_flat_slice() {
        let sys = sys(builtins::helix_r3());
        for s in [0.0, 1.3, 5.0, 11.0] {
            let f = sys.frame_at(s).unwrap();
            assert_abs_diff_eq!(f.k_n, 0.0, epsilon = 1e-10);
            assert_abs_diff_eq!(f.tau1, 0.0, epsilon = 1e-10);
            assert_abs_diff_eq!(f.tau2, 0.0, epsilon = 1e-10);
            assert_abs_diff_eq!(f.k_g, 0.5, epsilon = 1e-12);
            assert_abs_diff_eq!(f.tau_g, 0.5, epsilon = 1e-12);
            assert_vec(&f.n_gamma, &Vec4::E0, 1e-14);
            // n₂ is the classical binormal.
            let a = s / 2f64.sqrt();
            let b = Vec4::from_array([0.0, a.sin(), -a.cos(), 1.0]).scaled(1.0 / 2f64.sqrt());
            assert_vec(&f.n2, &b, 1e-12);
        }
    }

    #[test]
    fn non_unit_helix_matches_classical_curvature_and_torsion() {
        // (a cos u, a sin u, b u) has curvature a/(a²+b²) and torsion b/(a²+b²).
        let sys = sys(embedded(["0", "u1", "u2", "u3"], ["2*cos(s)", "2*sin(s)", "s"], (0.0, 6.0)));
        for s in [0.2, 3.0, 9.0] {
            let f = sys.frame_at(s).unwrap();
            assert_abs_diff_eq!(f.k_g, 0.4, epsilon = 1e-9);
            assert_abs_diff_eq!(f.tau_g, 0.2, epsilon = 1e-9);
            assert_abs_diff_eq!(f.k_n, 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn circle_in_hyperbolic_space() {
        let sys = sys(builtins::h3_circle());
        let f = sys.frame_at(0.0).unwrap();
        assert_abs_diff_eq!(f.k_n, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f.k_g, 1f64.tanh(), epsilon = 1e-12);
        assert_abs_diff_eq!(f.k_g, 0.761594, epsilon = 1e-6);
        for x in [f.tau1, f.tau2, f.tau_g] {
            assert_abs_diff_eq!(x, 0.0, epsilon = 1e-10);
        }
        let d = DerivedInvariants::from_frame(&f);
        assert_abs_diff_eq!(d.d, 0.0, epsilon = 1e-10);
    }

    #[test]
    fn geodesic_has_degenerate_frame() {
        let c = ["cosh(s)", "sinh(s)", "0", "0"];
        let sys = sys(direct(c, c, (-1.0, 1.0)));
        assert!(matches!(sys.frame_at(0.5), Err(Error::FrameDegenerate { .. })));
        let flags = sys.assumption_report(&[0.5]);
        assert!(!flags[0].kg_nonzero);
    }

    #[test]
    fn compile_errors() {
        let r = compile_system(embedded(["0", "u1", "u2", "u3"], ["1", "2", "3"], (0.0, 1.0)));
        assert!(matches!(r, Err(Error::IrregularCurve { .. })));

        let bad = direct(
            ["cosh(s)", "sinh(s)", "0", "0"],
            ["1.1*cosh(s)", "sinh(s)", "0", "0"],
            (0.0, 1.0),
        );
        assert!(matches!(compile_system(bad), Err(Error::BadDirectNormal { .. })));

        let r = compile_system(embedded(["0", "u1", "u2", "u2"], ["cos(s)", "sin(s)", "s"], (0.0, 1.0)));
        assert!(matches!(r, Err(Error::NotSpacelikeHypersurface { .. })));

        let r = compile_system(embedded(["0", "u1", "u2", "u3"], ["cos(s)", "sin(s", "s"], (0.0, 1.0)));
        assert!(matches!(r, Err(Error::Parse(_))));
    }

    #[test]
    fn normals() {
        let flat = sys(embedded(["0", "u1", "u2", "u3"], ["cos(s)", "sin(s)", "s"], (0.0, 1.0)));
        assert_vec(&flat.normal_at(0.3).unwrap().values(), &Vec4::E0, 1e-15);

        let graph = sys(builtins::graph_perturbed());
        for u in [0.0, 1.0, 2.5, 6.0] {
            let n = graph.normal_at(u).unwrap();
            let v = n.values();
            assert_abs_diff_eq!(pseudo_dot(&v, &v), -1.0, epsilon = 1e-10);
            assert!(v.0[0] > 0.0);
            // Orthogonal to the curve's velocity, computed by central differences.
            let h = 1e-5;
            let (p, _) = graph.param_jets(u + h, 0).unwrap();
            let (m, _) = graph.param_jets(u - h, 0).unwrap();
            let vel = (p.values() - m.values()).scaled(0.5 / h);
            assert!(pseudo_dot(&v, &vel).abs() < 1e-8);
        }
        let direct = sys(builtins::h3_circle());
        assert!(direct.normal_at(0.0).is_err());
    }

    #[test]
    fn arc_length_of_a_non_unit_helix() {
        // Speed √2, so s = √2 u.
        let sys = sys(embedded(["0", "u1", "u2", "u3"], ["cos(s)", "sin(s)", "s"], (0.0, 5.0)));
        assert_abs_diff_eq!(sys.length(), 5.0 * 2f64.sqrt(), epsilon = 1e-10);
        for s in [0.0, 0.7, 3.3, 7.0] {
            assert_abs_diff_eq!(sys.s_to_u(s).unwrap(), s / 2f64.sqrt(), epsilon = 1e-12);
            let (g, _) = sys.unit_speed_jets(s).unwrap();
            let t = g.differentiate();
            let tt = pseudo_dot(&t, &t);
            assert_abs_diff_eq!(tt.value(), 1.0, epsilon = 1e-10);
            for k in 1..=tt.order() {
                assert_abs_diff_eq!(tt.coeff(k), 0.0, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn arc_length_against_simpson() {
        let sys = sys(builtins::graph_perturbed());
        let n = 20000;
        let (a, b) = (0.0, 3.0);
        let h = (b - a) / n as f64;
        let mut acc = sys.speed(a).unwrap() + sys.speed(b).unwrap();
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * sys.speed(a + i as f64 * h).unwrap();
        }
        let simpson = acc * h / 3.0;
        assert_abs_diff_eq!(sys.u_to_s(b).unwrap(), simpson, epsilon = 1e-10);
        assert_abs_diff_eq!(sys.s_to_u(simpson).unwrap(), b, epsilon = 1e-10);
    }

    #[test]
    fn unit_speed_definition_is_not_moved() {
        let sys = sys(builtins::helix_r3());
        for s in [0.0, 2.0, 12.0] {
            assert_abs_diff_eq!(sys.s_to_u(s).unwrap(), s, epsilon = 1e-12);
        }
    }

    #[test]
    fn frame_is_pseudo_orthonormal_with_small_frenet_residuals() {
        let expect = [[-1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]];
        for spec in [builtins::graph_perturbed(), builtins::h3_torsion(), builtins::graph_slice()] {
            let sys = sys(spec);
            for i in 0..7 {
                let f = sys.frame_at(sys.length() * i as f64 / 6.0).unwrap();
                let g = f.gram();
                for r in 0..4 {
                    for c in 0..4 {
                        assert_abs_diff_eq!(g[r][c], expect[r][c], epsilon = 1e-9);
                    }
                }
                assert!(f.frenet_residuals().iter().all(|r| *r < 1e-7));
                assert!(f.k_g > 0.0);
            }
        }
    }

    #[test]
    fn lambda0_recombines_from_separate_derivatives() {
        let sys = sys(builtins::graph_perturbed());
        for s in [0.4, 2.2, 4.9] {
            let f = sys.frame_at(s).unwrap();
            let d = DerivedInvariants::from_frame(&f);
            let kn1 = f.jets.k_n.derivative(1);
            let kg1 = f.jets.k_g.derivative(1);
            let recombined = f.k_g * kn1 + f.k_g * f.k_g * f.tau1 - f.k_n * f.k_n * f.tau1 - f.k_n * kg1;
            assert_abs_diff_eq!(d.lambda0, recombined, epsilon = 1e-9);
            let t2 = f.jets.tau2.derivative(1);
            let tg = f.jets.tau_g.derivative(1);
            let l1 = kn1 * f.tau2 + f.k_n * t2 + kg1 * f.tau_g + f.k_g * tg;
            assert_abs_diff_eq!(d.lambda1, l1, epsilon = 1e-9);
        }
    }

    #[test]
    fn torsion_curve_has_closed_form_rho() {
        // Constant curvature in hyperbolic space: λ₀ = 0 and ρ = −k_g² τ_g³.
        let sys = sys(builtins::h3_torsion());
        let f = sys.frame_at(1.0).unwrap();
        let d = DerivedInvariants::from_frame(&f);
        assert_abs_diff_eq!(d.lambda0, 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(d.rho, -f.k_g.powi(2) * f.tau_g.powi(3), epsilon = 1e-10);
        assert_abs_diff_eq!(d.rho_prime, 0.0, epsilon = 1e-8);
    }

    #[test]
    fn assumption_flags() {
        let helix = sys(builtins::helix_r3());
        for f in helix.assumption_report(&[0.0, 3.0]) {
            assert_eq!(f.regime, Regime::Hyperbolic);
            assert!(f.nondegenerate);
            assert_abs_diff_eq!(f.gap, 0.25, epsilon = 1e-12);
        }
        let circle = sys(builtins::h3_circle());
        let f = &circle.assumption_report(&[1.0])[0];
        assert!(!f.nondegenerate);
        assert!(f.near_threshold);
        assert_eq!(f.regime, Regime::DeSitter);
        let torsion = sys(builtins::h3_torsion());
        let f = &torsion.assumption_report(&[0.0])[0];
        assert_eq!(f.regime, Regime::DeSitter);
        assert!(f.nondegenerate);
    }
}
