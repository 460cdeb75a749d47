//! Linear algebra of Minkowski space with signature (−,+,+,+).

use std::cmp::Ordering;
use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{DomainError, Error, Result};
use crate::smoothcurve::Jet;

/// Default relative width of the lightlike band.
pub const LIGHTLIKE_TOL: f64 = 1e-10;

/// Scalars the vector operations are generic over: plain reals and jets.
pub trait Scalar:
    Clone + Debug + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    /// A constant with the same shape (base point and order) as `self`.
    fn lift(&self, c: f64) -> Self;
    /// Value at the base point.
    fn value(&self) -> f64;
    fn try_sqrt(&self) -> Result<Self, DomainError>;
    fn try_div(&self, rhs: &Self) -> Result<Self, DomainError>;
    /// A total order, used only to canonicalize argument order.
    fn total_cmp(&self, other: &Self) -> Ordering;
}

impl Scalar for f64 {
    fn lift(&self, c: f64) -> Self {
        c
    }
    fn value(&self) -> f64 {
        *self
    }
    fn try_sqrt(&self) -> Result<Self, DomainError> {
        if *self < 0.0 {
            return Err(DomainError::new("sqrt of a negative value"));
        }
        Ok(self.sqrt())
    }
    fn try_div(&self, rhs: &Self) -> Result<Self, DomainError> {
        if *rhs == 0.0 {
            return Err(DomainError::new("division by zero"));
        }
        Ok(self / rhs)
    }
    fn total_cmp(&self, other: &Self) -> Ordering {
        f64::total_cmp(self, other)
    }
}

impl Scalar for Jet {
    fn lift(&self, c: f64) -> Self {
        self.constant_like(c)
    }
    fn value(&self) -> f64 {
        Jet::value(self)
    }
    fn try_sqrt(&self) -> Result<Self, DomainError> {
        self.sqrt()
    }
    fn try_div(&self, rhs: &Self) -> Result<Self, DomainError> {
        self.checked_div(rhs)
    }
    fn total_cmp(&self, other: &Self) -> Ordering {
        let by_coeffs = self
            .coeffs()
            .iter()
            .zip(other.coeffs())
            .map(|(a, b)| a.total_cmp(b))
            .find(|o| o.is_ne());
        by_coeffs
            .unwrap_or_else(|| self.order().cmp(&other.order()))
            .then_with(|| self.base().total_cmp(&other.base()))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpacetimeVector<S = f64>(pub [S; 4]);

pub type Vec4 = SpacetimeVector<f64>;
pub type JetVec4 = SpacetimeVector<Jet>;

impl<S: Scalar> SpacetimeVector<S> {
    pub fn new(x0: S, x1: S, x2: S, x3: S) -> Self {
        SpacetimeVector([x0, x1, x2, x3])
    }

    pub fn components(&self) -> &[S; 4] {
        &self.0
    }

    pub fn map<T>(&self, f: impl Fn(&S) -> T) -> SpacetimeVector<T> {
        SpacetimeVector([f(&self.0[0]), f(&self.0[1]), f(&self.0[2]), f(&self.0[3])])
    }

    pub fn scale(&self, k: &S) -> Self {
        self.map(|x| x.clone() * k.clone())
    }

    /// Componentwise values at the base point.
    pub fn values(&self) -> Vec4 {
        self.map(|x| x.value())
    }
}

impl Vec4 {
    pub const ZERO: Vec4 = SpacetimeVector([0.0; 4]);
    pub const E0: Vec4 = SpacetimeVector([1.0, 0.0, 0.0, 0.0]);
    pub const E1: Vec4 = SpacetimeVector([0.0, 1.0, 0.0, 0.0]);
    pub const E2: Vec4 = SpacetimeVector([0.0, 0.0, 1.0, 0.0]);
    pub const E3: Vec4 = SpacetimeVector([0.0, 0.0, 0.0, 1.0]);

    pub fn from_array(a: [f64; 4]) -> Self {
        SpacetimeVector(a)
    }

    pub fn euclid_norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, k: f64) -> Vec4 {
        self.map(|x| x * k)
    }

    pub fn dot(&self, other: &Vec4) -> f64 {
        pseudo_dot(self, other)
    }
}

impl JetVec4 {
    pub fn differentiate(&self) -> JetVec4 {
        self.map(Jet::differentiate)
    }

    /// Vector of `k`-th derivatives at the base point.
    pub fn derivative(&self, k: usize) -> Vec4 {
        self.map(|x| x.derivative(k))
    }

    pub fn compose(&self, inner: &Jet) -> JetVec4 {
        self.map(|x| x.compose(inner))
    }

    pub fn truncate(&self, order: usize) -> JetVec4 {
        self.map(|x| x.truncate(order))
    }

    pub fn order(&self) -> usize {
        self.0.iter().map(Jet::order).min().unwrap_or(0)
    }
}

impl<S: Scalar> Add for SpacetimeVector<S> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let [a0, a1, a2, a3] = self.0;
        let [b0, b1, b2, b3] = rhs.0;
        SpacetimeVector([a0 + b0, a1 + b1, a2 + b2, a3 + b3])
    }
}

impl<S: Scalar> Sub for SpacetimeVector<S> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let [a0, a1, a2, a3] = self.0;
        let [b0, b1, b2, b3] = rhs.0;
        SpacetimeVector([a0 - b0, a1 - b1, a2 - b2, a3 - b3])
    }
}

impl<S: Scalar> Neg for SpacetimeVector<S> {
    type Output = Self;
    fn neg(self) -> Self {
        self.map(|x| -x.clone())
    }
}

impl<S: Scalar> Add for &SpacetimeVector<S> {
    type Output = SpacetimeVector<S>;
    fn add(self, rhs: Self) -> SpacetimeVector<S> {
        self.clone() + rhs.clone()
    }
}

impl<S: Scalar> Sub for &SpacetimeVector<S> {
    type Output = SpacetimeVector<S>;
    fn sub(self, rhs: Self) -> SpacetimeVector<S> {
        self.clone() - rhs.clone()
    }
}

/// `⟨x,y⟩ = −x₀y₀ + x₁y₁ + x₂y₂ + x₃y₃`.
pub fn pseudo_dot<S: Scalar>(x: &SpacetimeVector<S>, y: &SpacetimeVector<S>) -> S {
    let [x0, x1, x2, x3] = &x.0;
    let [y0, y1, y2, y3] = &y.0;
    -(x0.clone() * y0.clone()) + x1.clone() * y1.clone() + x2.clone() * y2.clone() + x3.clone() * y3.clone()
}

/// `√|⟨x,x⟩|`. For jets the sign is taken from the base value, and a
/// vanishing base value is a domain error since the root is not smooth there.
pub fn pseudo_norm<S: Scalar>(x: &SpacetimeVector<S>) -> Result<S, DomainError> {
    let q = pseudo_dot(x, x);
    if q.value() < 0.0 {
        (-q).try_sqrt()
    } else {
        q.try_sqrt()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CausalCharacter {
    Spacelike,
    Timelike,
    Lightlike,
}

/// Classifies a nonzero vector; `|⟨x,x⟩| ≤ tol·‖x‖²` counts as lightlike.
pub fn causal_character<S: Scalar>(x: &SpacetimeVector<S>, tol: f64) -> Result<CausalCharacter> {
    let v = x.values();
    let e2 = v.0.iter().map(|c| c * c).sum::<f64>();
    if e2 == 0.0 {
        return Err(Error::ZeroVector);
    }
    let q = pseudo_dot(&v, &v);
    Ok(if q.abs() <= tol * e2 {
        CausalCharacter::Lightlike
    } else if q > 0.0 {
        CausalCharacter::Spacelike
    } else {
        CausalCharacter::Timelike
    })
}

// Laplace expansion along the first row; a repeated pair of later rows
// cancels exactly inside the 2×2 minors.
fn det3<S: Scalar>(a: [&S; 3], b: [&S; 3], c: [&S; 3]) -> S {
    let m = |i: usize, j: usize| b[i].clone() * c[j].clone() - b[j].clone() * c[i].clone();
    a[0].clone() * m(1, 2) - a[1].clone() * m(0, 2) + a[2].clone() * m(0, 1)
}

fn cmp_rows<S: Scalar>(x: &[S; 4], y: &[S; 4]) -> Ordering {
    x.iter()
        .zip(y)
        .map(|(a, b)| a.total_cmp(b))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Pseudo vector product: the formal determinant with first row
/// `(−e₀, e₁, e₂, e₃)` and rows `x`, `y`, `z`. Satisfies
/// `⟨x∧y∧z, w⟩ = det[w; x; y; z]`.
///
/// The rows are put in a canonical order before expanding, so permuting
/// the arguments changes the result by exactly the permutation's sign.
pub fn wedge3<S: Scalar>(x: &SpacetimeVector<S>, y: &SpacetimeVector<S>, z: &SpacetimeVector<S>) -> SpacetimeVector<S> {
    let mut rows = [&x.0, &y.0, &z.0];
    let mut odd = false;
    for i in 0..3 {
        for j in 0..2 - i {
            match cmp_rows(rows[j], rows[j + 1]) {
                Ordering::Greater => {
                    rows.swap(j, j + 1);
                    odd = !odd;
                }
                Ordering::Equal => return x.map(|c| c.lift(0.0)),
                Ordering::Less => {}
            }
        }
    }
    let minor = |skip: usize| {
        let cols: Vec<usize> = (0..4).filter(|c| *c != skip).collect();
        let [r0, r1, r2] = rows;
        det3(
            [&r0[cols[0]], &r0[cols[1]], &r0[cols[2]]],
            [&r1[cols[0]], &r1[cols[1]], &r1[cols[2]]],
            [&r2[cols[0]], &r2[cols[1]], &r2[cols[2]]],
        )
    };
    // Cofactor signs alternate (+,−,+,−); the e₀ slot carries an extra −1.
    let w = SpacetimeVector([-minor(0), -minor(1), minor(2), -minor(3)]);
    if odd {
        -w
    } else {
        w
    }
}

/// `HP(v,c) = {x : ⟨x,v⟩ = c}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Hyperplane {
    pub v: Vec4,
    pub c: f64,
}

impl Hyperplane {
    pub fn new(v: Vec4, c: f64) -> Result<Self> {
        if v.euclid_norm() == 0.0 {
            return Err(Error::ZeroVector);
        }
        Ok(Hyperplane { v, c })
    }

    /// Causal character of the pseudo-normal, which names the slice type.
    pub fn kind(&self, tol: f64) -> CausalCharacter {
        causal_character(&self.v, tol).expect("hyperplane normal is nonzero")
    }
}

/// `⟨x,v⟩ − c`; zero exactly on the hyperplane.
pub fn hyperplane_eval<S: Scalar>(h: &Hyperplane, x: &SpacetimeVector<S>) -> S {
    let v = SpacetimeVector([0, 1, 2, 3].map(|i| x.0[i].lift(h.v.0[i])));
    let p = pseudo_dot(x, &v);
    let c = p.lift(h.c);
    p - c
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PseudoSphere {
    /// Hyperbolic 3-space, `⟨x,x⟩ = −1`.
    H3,
    /// De Sitter 3-space, `⟨x,x⟩ = 1`.
    S31,
}

pub fn pseudo_sphere_residual<S: Scalar>(x: &SpacetimeVector<S>, kind: PseudoSphere) -> S {
    let q = pseudo_dot(x, x);
    let one = q.lift(1.0);
    match kind {
        PseudoSphere::H3 => q + one,
        PseudoSphere::S31 => q - one,
    }
}
