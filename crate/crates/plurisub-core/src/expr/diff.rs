//! Exact symbolic Wirtinger differentiation on expression DAGs.
//!
//! The four first-order operators d/dz1, d/dz2, d/dz1bar, d/dz2bar treat the
//! conjugated coordinates as independent. Higher orders are obtained by
//! iterated application; mixed partials commute, which the tests check by
//! evaluating both application orders.

use super::{Kind, Node, ScalarField};
use std::collections::HashMap;
use std::sync::Arc;

/// A first-order Wirtinger operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WirtingerOp {
    /// d/dz1
    Z1,
    /// d/dz2
    Z2,
    /// d/dz1bar
    Z1Bar,
    /// d/dz2bar
    Z2Bar,
}

impl WirtingerOp {
    /// The operator obtained by swapping barred and unbarred coordinates.
    pub fn conjugate(self) -> WirtingerOp {
        match self {
            WirtingerOp::Z1 => WirtingerOp::Z1Bar,
            WirtingerOp::Z2 => WirtingerOp::Z2Bar,
            WirtingerOp::Z1Bar => WirtingerOp::Z1,
            WirtingerOp::Z2Bar => WirtingerOp::Z2,
        }
    }
}

/// An ordered multiset of Wirtinger operators, applied left to right.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WirtingerIndex(pub Vec<WirtingerOp>);

impl WirtingerIndex {
    pub fn new(ops: impl Into<Vec<WirtingerOp>>) -> Self {
        WirtingerIndex(ops.into())
    }

    /// Total number of derivatives.
    pub fn order(&self) -> usize {
        self.0.len()
    }
}

impl From<Vec<WirtingerOp>> for WirtingerIndex {
    fn from(v: Vec<WirtingerOp>) -> Self {
        WirtingerIndex(v)
    }
}

impl From<&[WirtingerOp]> for WirtingerIndex {
    fn from(v: &[WirtingerOp]) -> Self {
        WirtingerIndex(v.to_vec())
    }
}

struct DiffCtx {
    /// Derivative of each visited node, keyed by node address and operator.
    /// Conjugation nodes flip the operator mid-walk, so the operator must be
    /// part of the key even though a top-level call fixes a single one.
    cache: HashMap<(usize, WirtingerOp), Node>,
}

fn field(n: Node) -> ScalarField {
    ScalarField::new(n)
}

impl DiffCtx {
    fn new() -> Self {
        DiffCtx {
            cache: HashMap::new(),
        }
    }

    fn diff(&mut self, e: &Node, op: WirtingerOp) -> Node {
        let key = (Arc::as_ptr(e) as usize, op);
        if let Some(d) = self.cache.get(&key) {
            return d.clone();
        }
        let result = self.diff_uncached(e, op);
        self.cache.insert(key, result.clone());
        result
    }

    fn diff_uncached(&mut self, e: &Node, op: WirtingerOp) -> Node {
        use super::{add, div, konst_re, mul, powf, powi};
        let zero = || konst_re(0.0).root;
        match &e.kind {
            Kind::Const(_) => zero(),
            Kind::Var(v) => {
                let hit = matches!(
                    (v, op),
                    (super::Var::Z1, WirtingerOp::Z1) | (super::Var::Z2, WirtingerOp::Z2)
                );
                if hit {
                    konst_re(1.0).root
                } else {
                    zero()
                }
            }
            Kind::Conj(inner) => {
                // d/dz conj(f) = conj(d/dzbar f)
                let d = self.diff(inner, op.conjugate());
                super::conj(&field(d)).root
            }
            Kind::Add(a, b) => {
                let da = self.diff(a, op);
                let db = self.diff(b, op);
                add(&field(da), &field(db)).root
            }
            Kind::Mul(a, b) => {
                let da = self.diff(a, op);
                let db = self.diff(b, op);
                let left = mul(&field(da), &field(b.clone()));
                let right = mul(&field(a.clone()), &field(db));
                add(&left, &right).root
            }
            Kind::Div(a, b) => {
                let da = self.diff(a, op);
                let db = self.diff(b, op);
                let num = super::sub(
                    &mul(&field(da), &field(b.clone())),
                    &mul(&field(a.clone()), &field(db)),
                );
                div(&num, &powi(&field(b.clone()), 2)).root
            }
            Kind::PowInt(a, k) => {
                let da = self.diff(a, op);
                let coeff = mul(&konst_re(*k as f64), &powi(&field(a.clone()), k - 1));
                mul(&coeff, &field(da)).root
            }
            Kind::PowReal(a, alpha) => {
                let da = self.diff(a, op);
                let coeff = mul(&konst_re(*alpha), &powf(&field(a.clone()), alpha - 1.0));
                mul(&coeff, &field(da)).root
            }
            Kind::Exp(a) => {
                let da = self.diff(a, op);
                // reuse the existing exp node so the DAG stays shared
                let e_self = ScalarField::new(e.clone());
                mul(&e_self, &field(da)).root
            }
            Kind::Sqrt(a) => {
                let da = self.diff(a, op);
                let denom = mul(&konst_re(2.0), &ScalarField::new(e.clone()));
                div(&field(da), &denom).root
            }
        }
    }
}

/// First-order Wirtinger derivative of `f`.
pub fn differentiate(f: &ScalarField, op: WirtingerOp) -> ScalarField {
    let mut ctx = DiffCtx::new();
    ScalarField::new(ctx.diff(&f.root, op))
}

/// Iterated Wirtinger derivative of `f` along an index, applied left to right.
pub fn wirtinger(f: &ScalarField, idx: &WirtingerIndex) -> ScalarField {
    let mut cur = f.clone();
    for &op in &idx.0 {
        cur = differentiate(&cur, op);
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{abs2, z1, Evaluator};
    use crate::types::ComplexPoint2;
    use num_complex::Complex64;

    #[test]
    fn derivative_of_abs2_is_conjugate() {
        // d/dz1 (z1 * conj(z1)) == conj(z1)
        let f = abs2(&z1());
        let df = differentiate(&f, WirtingerOp::Z1);
        let q = ComplexPoint2::new(Complex64::new(0.7, -0.3), Complex64::new(0.0, 0.0));
        let mut ev = Evaluator::new(q);
        let got = ev.eval(&df).unwrap();
        assert!((got - Complex64::new(0.7, 0.3)).norm() < 1e-15);
    }

    #[test]
    fn mixed_second_derivative_of_abs2_squared() {
        // d2/dz1 dz1bar (|z1|^2)^2 == 4 |z1|^2
        let f = crate::expr::powi(&abs2(&z1()), 2);
        let idx = WirtingerIndex::new(vec![WirtingerOp::Z1, WirtingerOp::Z1Bar]);
        let d = wirtinger(&f, &idx);
        let q = ComplexPoint2::new(Complex64::new(1.0, 2.0), Complex64::new(0.0, 0.0));
        let mut ev = Evaluator::new(q);
        let got = ev.eval(&d).unwrap();
        assert!((got - Complex64::new(20.0, 0.0)).norm() < 1e-12);
    }
}
