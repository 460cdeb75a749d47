use ldx_core::builtins;
use ldx_core::frame::{compile_system, CurveDef, CurveSystem, SystemSpec};
use ldx_core::minkowski::{pseudo_dot, wedge3, Vec4};
use ldx_core::surfaces::{surface_point, SurfaceKind};

fn strings<const N: usize>(a: [&str; N]) -> [String; N] {
    a.map(String::from)
}

/// Invariants at the geometric point with original parameter `u0`, given
/// the original system and a reparametrized one with `u0 = phi(u1)`.
fn compare_at(a: &CurveSystem, u0: f64, b: &CurveSystem, u1: f64, tol: f64) {
    let fa = a.frame_at(a.u_to_s(u0).unwrap()).unwrap();
    let fb = b.frame_at(b.u_to_s(u1).unwrap()).unwrap();
    assert!((&fa.gamma - &fb.gamma).euclid_norm() < 1e-10);
    for (x, y) in [(fa.k_n, fb.k_n), (fa.k_g, fb.k_g), (fa.tau_g, fb.tau_g), (fa.tau1, fb.tau1), (fa.tau2, fb.tau2)] {
        assert!((x - y).abs() < tol, "{x} vs {y}");
    }
    let (da, db) = (
        a.derived_invariants_at(fa.s).unwrap(),
        b.derived_invariants_at(fb.s).unwrap(),
    );
    assert!((da.rho - db.rho).abs() < tol, "{} vs {}", da.rho, db.rho);
    assert!((da.lambda0 - db.lambda0).abs() < tol);
}

#[test]
fn embedded_curve_invariants_survive_reparametrization() {
    let base = compile_system(builtins::graph_perturbed()).unwrap();
    // s = phi(u) = u + 0.3 sin u, monotone on the whole line.
    let phi = "(u + 0.3*sin(u))";
    let r = format!("(0.8 + 0.03*cos(2*{phi}))");
    let def = CurveDef::Embedded {
        hypersurface: strings(["0.3*(u1^2 + u2^2)", "u1", "u2", "u3"]),
        curve: [format!("{r}*cos({phi})"), format!("{r}*sin({phi})"), format!("0.5*{phi}")],
    };
    let mut spec = SystemSpec::new(def, (0.0, 2.0 * std::f64::consts::PI));
    spec.param = "u".into();
    let re = compile_system(spec).unwrap();
    assert!((re.length() - base.length()).abs() < 1e-9);
    for u in [0.2, 1.1, 2.9, 4.0, 5.7] {
        compare_at(&base, u + 0.3 * f64::sin(u), &re, u, 1e-7);
    }
}

#[test]
fn direct_curve_invariants_survive_reparametrization() {
    let base = compile_system(builtins::h3_torsion()).unwrap();
    let w = "(sqrt(1 - sinh(0.5)^2)/cosh(0.5))";
    let phi = "(2*u + u^3/3)";
    let c = [
        format!("cosh(0.5)*cosh({w}*{phi})"),
        format!("cosh(0.5)*sinh({w}*{phi})"),
        format!("sinh(0.5)*cos({phi})"),
        format!("sinh(0.5)*sin({phi})"),
    ];
    let mut spec = SystemSpec::new(CurveDef::Direct { curve: c.clone(), normal: c }, (-1.0, 1.0));
    spec.param = "u".into();
    let re = compile_system(spec).unwrap();
    for u in [-0.8, 0.0, 0.3, 0.9] {
        compare_at(&base, 2.0 * u + u * u * u / 3.0, &re, u, 1e-7);
    }
}

#[test]
fn direct_and_embedded_definitions_agree() {
    let embedded = compile_system(builtins::helix_r3()).unwrap();
    let def = CurveDef::Direct {
        curve: strings(["0", "cos(s/sqrt(2))", "sin(s/sqrt(2))", "s/sqrt(2)"]),
        normal: strings(["1", "0", "0", "0"]),
    };
    let direct = compile_system(SystemSpec::new(def, (0.0, 4.0 * std::f64::consts::PI))).unwrap();
    for s in [0.0, 1.7, 6.0, 11.0] {
        let (a, b) = (embedded.frame_at(s).unwrap(), direct.frame_at(s).unwrap());
        for (x, y) in a.vectors().iter().zip(b.vectors()) {
            assert!((*x - y).euclid_norm() < 1e-12);
        }
        assert!((a.tau_g - b.tau_g).abs() < 1e-12 && (a.k_g - b.k_g).abs() < 1e-12);
    }
}

/// Closed-form frame of `(A cosh ωs, A sinh ωs, B cos s, B sin s)` in H³.
fn torsion_frame(s: f64) -> (Vec4, Vec4, Vec4, Vec4, f64) {
    let (a, b) = (0.5f64.cosh(), 0.5f64.sinh());
    let w = (1.0 - b * b).sqrt() / a;
    let (ch, sh, c, sn) = ((w * s).cosh(), (w * s).sinh(), s.cos(), s.sin());
    let gamma = Vec4::from_array([a * ch, a * sh, b * c, b * sn]);
    let t = Vec4::from_array([a * w * sh, a * w * ch, -b * sn, b * c]);
    let acc = Vec4::from_array([a * w * w * ch, a * w * w * sh, -b * c, -b * sn]);
    let geo = &acc - &gamma;
    let k_h = pseudo_dot(&geo, &geo).sqrt();
    let n1 = geo.scaled(1.0 / k_h);
    let n2 = -wedge3(&gamma, &t, &n1);
    (gamma, t, n1, n2, k_h)
}

#[test]
fn hyperbolic_space_de_sitter_surface_formula() {
    let sys = compile_system(builtins::h3_torsion()).unwrap();
    for u in [-2.5, -0.4, 0.0, 1.3, 2.8] {
        let (gamma, t, n1, n2, k_h) = torsion_frame(u);
        let s = sys.u_to_s(u).unwrap();
        let f = sys.frame_at(s).unwrap();
        assert!((&f.t - &t).euclid_norm() < 1e-10);
        assert!((f.k_g - k_h).abs() < 1e-10 && k_h < 1.0);
        for theta in [0.0f64, 0.9, 2.5, 4.4] {
            let want = (&gamma.scaled(k_h) + &n1).scaled(theta.cos() / (1.0 - k_h * k_h).sqrt()) + n2.scaled(theta.sin());
            let got = surface_point(&sys, SurfaceKind::DeSitter, s, theta).unwrap();
            assert!((&got - &want).euclid_norm() < 1e-9, "{got:?} vs {want:?}");
        }
    }
}
