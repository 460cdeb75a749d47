//! Example curves available by name.

use crate::frame::{CurveDef, SystemSpec};

pub const NAMES: [&str; 5] = ["helix_r3", "h3_circle", "h3_torsion", "graph_perturbed", "graph_slice"];

fn strings<const N: usize>(a: [&str; N]) -> [String; N] {
    a.map(String::from)
}

/// Circular helix of curvature and torsion 1/2 in the spacelike slice `x₀ = 0`.
pub fn helix_r3() -> SystemSpec {
    SystemSpec::new(
        CurveDef::Embedded {
            hypersurface: strings(["0", "u1", "u2", "u3"]),
            curve: strings(["cos(s/sqrt(2))", "sin(s/sqrt(2))", "s/sqrt(2)"]),
        },
        (0.0, 4.0 * std::f64::consts::PI),
    )
}

/// Small circle of hyperbolic 3-space at height `sinh 1`, unit speed.
pub fn h3_circle() -> SystemSpec {
    let c = ["cosh(1)*cosh(s/cosh(1))", "cosh(1)*sinh(s/cosh(1))", "sinh(1)", "0"];
    SystemSpec::new(
        CurveDef::Direct {
            curve: strings(c),
            normal: strings(c),
        },
        (-2.0, 2.0),
    )
}

/// Unit-speed curve of hyperbolic 3-space with constant curvature below 1
/// and nonzero torsion:
/// `(A cosh ωs, A sinh ωs, B cos s, B sin s)` with `A = cosh ½`,
/// `B = sinh ½` and `A²ω² + B² = 1`.
pub fn h3_torsion() -> SystemSpec {
    let w = "(sqrt(1 - sinh(0.5)^2)/cosh(0.5))";
    let c = [
        format!("cosh(0.5)*cosh({w}*s)"),
        format!("cosh(0.5)*sinh({w}*s)"),
        "sinh(0.5)*cos(s)".to_string(),
        "sinh(0.5)*sin(s)".to_string(),
    ];
    SystemSpec::new(
        CurveDef::Direct {
            curve: c.clone(),
            normal: c,
        },
        (-3.0, 3.0),
    )
}

const PARABOLOID: [&str; 4] = ["0.3*(u1^2 + u2^2)", "u1", "u2", "u3"];

/// Curve on the graph `x₀ = 0.3(u1² + u2²)` whose radius wobbles, so that
/// `ρ` changes sign four times per turn.
pub fn graph_perturbed() -> SystemSpec {
    SystemSpec::new(
        CurveDef::Embedded {
            hypersurface: strings(PARABOLOID),
            curve: strings([
                "(0.8 + 0.03*cos(2*s))*cos(s)",
                "(0.8 + 0.03*cos(2*s))*sin(s)",
                "0.5*s",
            ]),
        },
        (0.0, 2.0 * std::f64::consts::PI),
    )
}

/// Helix on the same graph, lying in the slice `HP(e₀, −0.3·0.8²)`.
pub fn graph_slice() -> SystemSpec {
    SystemSpec::new(
        CurveDef::Embedded {
            hypersurface: strings(PARABOLOID),
            curve: strings(["0.8*cos(s)", "0.8*sin(s)", "0.5*s"]),
        },
        (0.0, 2.0 * std::f64::consts::PI),
    )
}

pub fn by_name(name: &str) -> Option<SystemSpec> {
    match name {
        "helix_r3" => Some(helix_r3()),
        "h3_circle" => Some(h3_circle()),
        "h3_torsion" => Some(h3_torsion()),
        "graph_perturbed" => Some(graph_perturbed()),
        "graph_slice" => Some(graph_slice()),
        _ => None,
    }
}
