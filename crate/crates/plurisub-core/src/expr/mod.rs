//! Immutable expression DAGs over the coordinates (z1, z2) of C^2.
//!
//! A [`ScalarField`] is a shared, immutable DAG built from complex constants,
//! the variables `z1`/`z2`, conjugation, arithmetic, integer and real powers,
//! `exp` and `sqrt`. The convenience wrappers `re`, `im` and `abs2` are
//! canonicalized into conjugation arithmetic at construction time, so the
//! differentiation engine only ever sees one rule set.
//!
//! Fields are cheap to clone (a single `Arc`) and safe to share across
//! threads; all operations on them are pure.

mod diff;
mod display;
mod eval;
mod fd;
mod parse;

pub use diff::{differentiate, wirtinger, WirtingerIndex, WirtingerOp};
pub use eval::{eval, EvalError, Evaluator, Program};
pub use fd::{fd_check, fd_noise_floor, fd_wirtinger, FdCheck};
pub use parse::{parse, ParseError};

use num_complex::Complex64;
use std::sync::Arc;

/// The two complex coordinates of C^2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    Z1,
    Z2,
}

/// Structural range information propagated bottom-up at construction.
///
/// `NonNeg` implies `Real`. The lattice is deliberately coarse: it only has
/// to certify realness for the fields the library builds itself (defining
/// functions parsed through `re`/`im`/`abs2`, the damping weight sigma, the
/// modified defining functions and the exhaustion functions).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Realness {
    /// Provably real and nonnegative wherever defined.
    NonNeg,
    /// Provably real wherever defined.
    Real,
    /// Provably purely imaginary wherever defined.
    Imag,
    /// No structural information.
    Unknown,
}

impl Realness {
    fn is_real(self) -> bool {
        matches!(self, Realness::Real | Realness::NonNeg)
    }
}

#[derive(Debug)]
pub(crate) enum Kind {
    Const(Complex64),
    Var(Var),
    Conj(Arc<Expr>),
    Add(Arc<Expr>, Arc<Expr>),
    Mul(Arc<Expr>, Arc<Expr>),
    Div(Arc<Expr>, Arc<Expr>),
    /// Integer power, exponent may be negative.
    PowInt(Arc<Expr>, i32),
    /// Real power with the principal branch; evaluation requires the base to
    /// be (numerically) positive real. Used by the exhaustion functions.
    PowReal(Arc<Expr>, f64),
    Exp(Arc<Expr>),
    Sqrt(Arc<Expr>),
}

/// A node of the expression DAG together with its structural realness.
#[derive(Debug)]
pub struct Expr {
    pub(crate) kind: Kind,
    pub(crate) real: Realness,
}

pub(crate) type Node = Arc<Expr>;

/// An immutable scalar field on C^2, represented as a shared expression DAG.
///
/// Construction canonicalizes `re`, `im` and `abs2` into conjugation
/// arithmetic and applies constant folding plus the `x*0`, `x+0`, `x^1`
/// rewrites. No other simplification is performed.
#[derive(Debug, Clone)]
pub struct ScalarField {
    pub(crate) root: Node,
}

impl ScalarField {
    pub(crate) fn new(root: Node) -> Self {
        ScalarField { root }
    }

    /// Whether the field is structurally known to be real-valued.
    pub fn real_valued(&self) -> bool {
        self.root.real.is_real()
    }

    /// Whether the field is structurally known to be real and nonnegative.
    pub fn nonnegative(&self) -> bool {
        matches!(self.root.real, Realness::NonNeg)
    }

    /// Number of distinct nodes in the DAG.
    pub fn node_count(&self) -> usize {
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![&self.root];
        while let Some(e) = stack.pop() {
            if !seen.insert(Arc::as_ptr(e) as usize) {
                continue;
            }
            match &e.kind {
                Kind::Const(_) | Kind::Var(_) => {}
                Kind::Conj(a)
                | Kind::PowInt(a, _)
                | Kind::PowReal(a, _)
                | Kind::Exp(a)
                | Kind::Sqrt(a) => stack.push(a),
                Kind::Add(a, b) | Kind::Mul(a, b) | Kind::Div(a, b) => {
                    stack.push(a);
                    stack.push(b);
                }
            }
        }
        seen.len()
    }
}

fn node(kind: Kind, real: Realness) -> Node {
    Arc::new(Expr { kind, real })
}

fn const_realness(c: Complex64) -> Realness {
    if c.im == 0.0 {
        if c.re >= 0.0 {
            Realness::NonNeg
        } else {
            Realness::Real
        }
    } else if c.re == 0.0 {
        Realness::Imag
    } else {
        Realness::Unknown
    }
}

/// A complex constant.
pub fn konst(c: Complex64) -> ScalarField {
    ScalarField::new(node(Kind::Const(c), const_realness(c)))
}

/// A real constant.
pub fn konst_re(x: f64) -> ScalarField {
    konst(Complex64::new(x, 0.0))
}

/// The coordinate variable `z1` or `z2`.
pub fn var(v: Var) -> ScalarField {
    ScalarField::new(node(Kind::Var(v), Realness::Unknown))
}

fn as_const(e: &Node) -> Option<Complex64> {
    match e.kind {
        Kind::Const(c) => Some(c),
        _ => None,
    }
}

/// Complex conjugate.
pub fn conj(e: &ScalarField) -> ScalarField {
    if let Some(c) = as_const(&e.root) {
        return konst(c.conj());
    }
    if let Kind::Conj(inner) = &e.root.kind {
        return ScalarField::new(inner.clone());
    }
    ScalarField::new(node(Kind::Conj(e.root.clone()), e.root.real))
}

/// Detects `Add(a, Conj(a))` (twice the real part) and
/// `Add(a, (-1)*Conj(a))` (2i times the imaginary part) by pointer identity.
fn add_realness(a: &Node, b: &Node) -> Realness {
    match (a.real, b.real) {
        (Realness::NonNeg, Realness::NonNeg) => return Realness::NonNeg,
        (x, y) if x.is_real() && y.is_real() => return Realness::Real,
        (Realness::Imag, Realness::Imag) => return Realness::Imag,
        _ => {}
    }
    if let Kind::Conj(inner) = &b.kind {
        if Arc::ptr_eq(inner, a) {
            return Realness::Real;
        }
    }
    if let Kind::Conj(inner) = &a.kind {
        if Arc::ptr_eq(inner, b) {
            return Realness::Real;
        }
    }
    if let Kind::Mul(c, rest) = &b.kind {
        if let Some(cv) = as_const(c) {
            if cv == Complex64::new(-1.0, 0.0) {
                if let Kind::Conj(inner) = &rest.kind {
                    if Arc::ptr_eq(inner, a) {
                        return Realness::Imag;
                    }
                }
            }
        }
    }
    Realness::Unknown
}

/// Sum of two fields.
pub fn add(a: &ScalarField, b: &ScalarField) -> ScalarField {
    match (as_const(&a.root), as_const(&b.root)) {
        (Some(x), Some(y)) => return konst(x + y),
        (Some(x), None) if x == Complex64::new(0.0, 0.0) => return b.clone(),
        (None, Some(y)) if y == Complex64::new(0.0, 0.0) => return a.clone(),
        _ => {}
    }
    let real = add_realness(&a.root, &b.root);
    ScalarField::new(node(Kind::Add(a.root.clone(), b.root.clone()), real))
}

fn mul_realness(a: &Node, b: &Node) -> Realness {
    // e * conj(e) in either order; the conj-involution rewrite can put the
    // conjugate on the left
    if let Kind::Conj(inner) = &b.kind {
        if Arc::ptr_eq(inner, a) {
            return Realness::NonNeg;
        }
    }
    if let Kind::Conj(inner) = &a.kind {
        if Arc::ptr_eq(inner, b) {
            return Realness::NonNeg;
        }
    }
    match (a.real, b.real) {
        (Realness::NonNeg, Realness::NonNeg) => Realness::NonNeg,
        (x, y) if x.is_real() && y.is_real() => Realness::Real,
        (Realness::Imag, Realness::Imag) => Realness::Real,
        (x, Realness::Imag) if x.is_real() => Realness::Imag,
        (Realness::Imag, y) if y.is_real() => Realness::Imag,
        _ => Realness::Unknown,
    }
}

/// Product of two fields.
pub fn mul(a: &ScalarField, b: &ScalarField) -> ScalarField {
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    match (as_const(&a.root), as_const(&b.root)) {
        (Some(x), Some(y)) => return konst(x * y),
        (Some(x), None) => {
            if x == zero {
                return konst(zero);
            }
            if x == one {
                return b.clone();
            }
        }
        (None, Some(y)) => {
            if y == zero {
                return konst(zero);
            }
            if y == one {
                return a.clone();
            }
        }
        _ => {}
    }
    let real = mul_realness(&a.root, &b.root);
    ScalarField::new(node(Kind::Mul(a.root.clone(), b.root.clone()), real))
}

/// Quotient of two fields. Division by zero surfaces at evaluation time.
pub fn div(a: &ScalarField, b: &ScalarField) -> ScalarField {
    let zero = Complex64::new(0.0, 0.0);
    match (as_const(&a.root), as_const(&b.root)) {
        (Some(x), Some(y)) if y != zero => return konst(x / y),
        (Some(x), _) if x == zero => return konst(zero),
        (_, Some(y)) if y == Complex64::new(1.0, 0.0) => return a.clone(),
        _ => {}
    }
    let real = match (a.root.real, b.root.real) {
        (Realness::NonNeg, Realness::NonNeg) => Realness::NonNeg,
        (x, y) if x.is_real() && y.is_real() => Realness::Real,
        (Realness::Imag, Realness::Imag) => Realness::Real,
        (x, Realness::Imag) if x.is_real() => Realness::Imag,
        (Realness::Imag, y) if y.is_real() => Realness::Imag,
        _ => Realness::Unknown,
    };
    ScalarField::new(node(Kind::Div(a.root.clone(), b.root.clone()), real))
}

/// Negation, canonicalized as multiplication by -1.
pub fn neg(e: &ScalarField) -> ScalarField {
    mul(&konst_re(-1.0), e)
}

/// Difference, canonicalized as `a + (-1)*b`.
pub fn sub(a: &ScalarField, b: &ScalarField) -> ScalarField {
    add(a, &neg(b))
}

/// Integer power. `k` may be negative; `e^0` folds to 1 and `e^1` to `e`.
pub fn powi(e: &ScalarField, k: i32) -> ScalarField {
    if k == 0 {
        return konst_re(1.0);
    }
    if k == 1 {
        return e.clone();
    }
    if let Some(c) = as_const(&e.root) {
        return konst(c.powi(k));
    }
    let real = match e.root.real {
        Realness::NonNeg => Realness::NonNeg,
        Realness::Real => {
            if k % 2 == 0 {
                Realness::NonNeg
            } else {
                Realness::Real
            }
        }
        Realness::Imag => {
            if k % 2 == 0 {
                Realness::Real
            } else {
                Realness::Imag
            }
        }
        Realness::Unknown => Realness::Unknown,
    };
    ScalarField::new(node(Kind::PowInt(e.root.clone(), k), real))
}

/// Real power with the principal branch.
///
/// Evaluation fails unless the base is numerically positive real, which is
/// how evaluation of an exhaustion function on the wrong side of the
/// boundary fails fast instead of producing a complex power.
pub fn powf(e: &ScalarField, alpha: f64) -> ScalarField {
    if alpha == 0.0 {
        return konst_re(1.0);
    }
    if alpha == 1.0 {
        return e.clone();
    }
    if let Some(c) = as_const(&e.root) {
        if c.im == 0.0 && c.re > 0.0 {
            return konst_re(c.re.powf(alpha));
        }
    }
    let real = match e.root.real {
        Realness::NonNeg | Realness::Real => Realness::NonNeg,
        _ => Realness::Unknown,
    };
    ScalarField::new(node(Kind::PowReal(e.root.clone(), alpha), real))
}

/// Complex exponential.
pub fn exp(e: &ScalarField) -> ScalarField {
    if let Some(c) = as_const(&e.root) {
        return konst(c.exp());
    }
    let real = if e.root.real.is_real() {
        Realness::NonNeg
    } else {
        Realness::Unknown
    };
    ScalarField::new(node(Kind::Exp(e.root.clone()), real))
}

/// Principal square root. Evaluation enforces a nonvanishing floor on the
/// argument modulus, so the field may only be used away from branch points.
pub fn sqrt(e: &ScalarField) -> ScalarField {
    if let Some(c) = as_const(&e.root) {
        if c.norm() > 1e-12 {
            return konst(c.sqrt());
        }
    }
    let real = match e.root.real {
        Realness::NonNeg => Realness::NonNeg,
        _ => Realness::Unknown,
    };
    ScalarField::new(node(Kind::Sqrt(e.root.clone()), real))
}

/// Real part, canonicalized to `(e + conj(e)) / 2`.
pub fn re(e: &ScalarField) -> ScalarField {
    let s = add(e, &conj(e));
    mul(&konst_re(0.5), &s)
}

/// Imaginary part, canonicalized to `(e - conj(e)) / (2i)`.
pub fn im(e: &ScalarField) -> ScalarField {
    let d = sub(e, &conj(e));
    mul(&konst(Complex64::new(0.0, -0.5)), &d)
}

/// Squared modulus, canonicalized to `e * conj(e)`.
pub fn abs2(e: &ScalarField) -> ScalarField {
    mul(e, &conj(e))
}

/// `z1` as a field.
pub fn z1() -> ScalarField {
    var(Var::Z1)
}

/// `z2` as a field.
pub fn z2() -> ScalarField {
    var(Var::Z2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonicalization_folds_constants() {
        let two = konst_re(2.0);
        let three = konst_re(3.0);
        assert_eq!(
            as_const(&add(&two, &three).root),
            Some(Complex64::new(5.0, 0.0))
        );
        assert_eq!(
            as_const(&mul(&two, &three).root),
            Some(Complex64::new(6.0, 0.0))
        );
        assert_eq!(
            as_const(&powi(&two, 3).root),
            Some(Complex64::new(8.0, 0.0))
        );
    }

    #[test]
    fn identity_rewrites() {
        let z = z1();
        assert!(Arc::ptr_eq(&add(&z, &konst_re(0.0)).root, &z.root));
        assert!(Arc::ptr_eq(&mul(&z, &konst_re(1.0)).root, &z.root));
        assert!(Arc::ptr_eq(&powi(&z, 1).root, &z.root));
        assert_eq!(
            as_const(&mul(&z, &konst_re(0.0)).root),
            Some(Complex64::new(0.0, 0.0))
        );
    }

    #[test]
    fn realness_propagates() {
        let z = z1();
        assert!(re(&z).real_valued());
        assert!(im(&z).real_valued());
        assert!(abs2(&z).nonnegative());
        let q = add(&abs2(&z), &abs2(&z2()));
        assert!(q.nonnegative());
        assert!(sqrt(&q).nonnegative());
        assert!(exp(&neg(&q)).nonnegative());
        assert!(!z.real_valued());
    }

    #[test]
    fn conj_involution() {
        let z = z1();
        let c = conj(&conj(&z));
        assert!(Arc::ptr_eq(&c.root, &z.root));
    }
}
