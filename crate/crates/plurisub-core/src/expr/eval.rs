//! Pointwise evaluation of expression DAGs.
//!
//! Two evaluators are provided. [`Evaluator`] walks the DAG recursively with
//! per-call memoization keyed on node identity, which matches the shared
//! subterm structure. [`Program`] flattens one or more fields into a single
//! instruction tape so hot loops (Hessian scans over thousands of sample
//! points) run without any hashing.

use super::{Kind, Node, ScalarField, Var};
use crate::types::ComplexPoint2;
use num_complex::Complex64;
use std::collections::HashMap;
use std::sync::Arc;
use thiserror::Error;

/// Modulus floor below which division is rejected.
pub const DIV_FLOOR: f64 = 1e-300;

/// Modulus floor below which a sqrt argument counts as a branch violation.
pub const SQRT_FLOOR: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("division by a value with modulus below {floor:e}")]
    DivisionByZero { floor: f64 },
    #[error("sqrt argument modulus {modulus:e} below the nonvanishing floor {floor:e}")]
    SqrtBranch { modulus: f64, floor: f64 },
    #[error("real power of a non positive-real base {base} (wrong side of the boundary)")]
    PowDomain { base: Complex64 },
    #[error("evaluation produced a non-finite value")]
    NonFinite,
}

fn apply_unary(kind: &Kind, a: Complex64) -> Result<Complex64, EvalError> {
    Ok(match kind {
        Kind::Conj(_) => a.conj(),
        Kind::PowInt(_, k) => a.powi(*k),
        Kind::PowReal(_, alpha) => {
            // principal branch restricted to the positive real axis
            if a.im.abs() > 1e-9 * (1.0 + a.re.abs()) || a.re <= 0.0 {
                return Err(EvalError::PowDomain { base: a });
            }
            Complex64::new(a.re.powf(*alpha), 0.0)
        }
        Kind::Exp(_) => a.exp(),
        Kind::Sqrt(_) => {
            if a.norm() < SQRT_FLOOR {
                return Err(EvalError::SqrtBranch {
                    modulus: a.norm(),
                    floor: SQRT_FLOOR,
                });
            }
            a.sqrt()
        }
        _ => unreachable!(),
    })
}

/// Recursive evaluator with shared-subterm memoization.
///
/// The memo table is per instance, so one evaluator per sample point
/// amortizes across every field evaluated at that point.
pub struct Evaluator {
    z1: Complex64,
    z2: Complex64,
    memo: HashMap<usize, Complex64>,
}

impl Evaluator {
    pub fn new(q: ComplexPoint2) -> Self {
        Evaluator {
            z1: q.z1,
            z2: q.z2,
            memo: HashMap::new(),
        }
    }

    /// Evaluate `f` at the evaluator's point.
    pub fn eval(&mut self, f: &ScalarField) -> Result<Complex64, EvalError> {
        let v = self.eval_node(&f.root)?;
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(EvalError::NonFinite);
        }
        Ok(v)
    }

    fn eval_node(&mut self, e: &Node) -> Result<Complex64, EvalError> {
        let key = Arc::as_ptr(e) as usize;
        if let Some(v) = self.memo.get(&key) {
            return Ok(*v);
        }
        let v = match &e.kind {
            Kind::Const(c) => *c,
            Kind::Var(Var::Z1) => self.z1,
            Kind::Var(Var::Z2) => self.z2,
            Kind::Add(a, b) => self.eval_node(a)? + self.eval_node(b)?,
            Kind::Mul(a, b) => self.eval_node(a)? * self.eval_node(b)?,
            Kind::Div(a, b) => {
                let num = self.eval_node(a)?;
                let den = self.eval_node(b)?;
                if den.norm() < DIV_FLOOR {
                    return Err(EvalError::DivisionByZero { floor: DIV_FLOOR });
                }
                num / den
            }
            unary => {
                let inner = match unary {
                    Kind::Conj(a)
                    | Kind::PowInt(a, _)
                    | Kind::PowReal(a, _)
                    | Kind::Exp(a)
                    | Kind::Sqrt(a) => self.eval_node(a)?,
                    _ => unreachable!(),
                };
                apply_unary(unary, inner)?
            }
        };
        self.memo.insert(key, v);
        Ok(v)
    }
}

/// Convenience single-field evaluation.
pub fn eval(f: &ScalarField, q: ComplexPoint2) -> Result<Complex64, EvalError> {
    Evaluator::new(q).eval(f)
}

#[derive(Debug, Clone, Copy)]
enum Instr {
    Const(Complex64),
    Var(Var),
    Conj(u32),
    Add(u32, u32),
    Mul(u32, u32),
    Div(u32, u32),
    PowInt(u32, i32),
    PowReal(u32, f64),
    Exp(u32),
    Sqrt(u32),
}

/// A flattened evaluation tape for a set of fields sharing one DAG.
///
/// Compile once, then [`Program::run`] per point. Instructions are in
/// topological order; each distinct DAG node appears exactly once.
pub struct Program {
    code: Vec<Instr>,
    outputs: Vec<u32>,
}

impl Program {
    /// Flatten `fields` into a single tape with common subterms deduplicated
    /// by node identity.
    pub fn compile(fields: &[&ScalarField]) -> Program {
        let mut slot: HashMap<usize, u32> = HashMap::new();
        let mut code: Vec<Instr> = Vec::new();
        // iterative post-order so deep derivative DAGs cannot overflow the stack
        enum Task {
            Visit(Node),
            Emit(Node),
        }
        let mut stack: Vec<Task> = Vec::new();
        let mut outputs = Vec::with_capacity(fields.len());
        for f in fields {
            stack.push(Task::Visit(f.root.clone()));
            while let Some(task) = stack.pop() {
                match task {
                    Task::Visit(n) => {
                        let key = Arc::as_ptr(&n) as usize;
                        if slot.contains_key(&key) {
                            continue;
                        }
                        let children: Vec<Node> = match &n.kind {
                            Kind::Const(_) | Kind::Var(_) => vec![],
                            Kind::Conj(a)
                            | Kind::PowInt(a, _)
                            | Kind::PowReal(a, _)
                            | Kind::Exp(a)
                            | Kind::Sqrt(a) => vec![a.clone()],
                            Kind::Add(a, b) | Kind::Mul(a, b) | Kind::Div(a, b) => {
                                vec![a.clone(), b.clone()]
                            }
                        };
                        stack.push(Task::Emit(n));
                        for c in children {
                            stack.push(Task::Visit(c));
                        }
                    }
                    Task::Emit(n) => {
                        let key = Arc::as_ptr(&n) as usize;
                        if slot.contains_key(&key) {
                            continue;
                        }
                        let get = |slot: &HashMap<usize, u32>, m: &Node| -> u32 {
                            slot[&(Arc::as_ptr(m) as usize)]
                        };
                        let instr = match &n.kind {
                            Kind::Const(c) => Instr::Const(*c),
                            Kind::Var(v) => Instr::Var(*v),
                            Kind::Conj(a) => Instr::Conj(get(&slot, a)),
                            Kind::Add(a, b) => Instr::Add(get(&slot, a), get(&slot, b)),
                            Kind::Mul(a, b) => Instr::Mul(get(&slot, a), get(&slot, b)),
                            Kind::Div(a, b) => Instr::Div(get(&slot, a), get(&slot, b)),
                            Kind::PowInt(a, k) => Instr::PowInt(get(&slot, a), *k),
                            Kind::PowReal(a, alpha) => Instr::PowReal(get(&slot, a), *alpha),
                            Kind::Exp(a) => Instr::Exp(get(&slot, a)),
                            Kind::Sqrt(a) => Instr::Sqrt(get(&slot, a)),
                        };
                        let idx = code.len() as u32;
                        code.push(instr);
                        slot.insert(key, idx);
                    }
                }
            }
            outputs.push(slot[&(Arc::as_ptr(&f.root) as usize)]);
        }
        Program { code, outputs }
    }

    /// Number of tape instructions.
    pub fn len(&self) -> usize {
        self.code.len()
    }

    pub fn is_empty(&self) -> bool {
        self.code.is_empty()
    }

    /// Evaluate every compiled field at `q`. `scratch` is reused across calls.
    pub fn run(
        &self,
        q: ComplexPoint2,
        scratch: &mut Vec<Complex64>,
        out: &mut Vec<Complex64>,
    ) -> Result<(), EvalError> {
        scratch.clear();
        scratch.reserve(self.code.len());
        for instr in &self.code {
            let v = match *instr {
                Instr::Const(c) => c,
                Instr::Var(Var::Z1) => q.z1,
                Instr::Var(Var::Z2) => q.z2,
                Instr::Conj(a) => scratch[a as usize].conj(),
                Instr::Add(a, b) => scratch[a as usize] + scratch[b as usize],
                Instr::Mul(a, b) => scratch[a as usize] * scratch[b as usize],
                Instr::Div(a, b) => {
                    let den = scratch[b as usize];
                    if den.norm() < DIV_FLOOR {
                        return Err(EvalError::DivisionByZero { floor: DIV_FLOOR });
                    }
                    scratch[a as usize] / den
                }
                Instr::PowInt(a, k) => scratch[a as usize].powi(k),
                Instr::PowReal(a, alpha) => {
                    let base = scratch[a as usize];
                    if base.im.abs() > 1e-9 * (1.0 + base.re.abs()) || base.re <= 0.0 {
                        return Err(EvalError::PowDomain { base });
                    }
                    Complex64::new(base.re.powf(alpha), 0.0)
                }
                Instr::Exp(a) => scratch[a as usize].exp(),
                Instr::Sqrt(a) => {
                    let arg = scratch[a as usize];
                    if arg.norm() < SQRT_FLOOR {
                        return Err(EvalError::SqrtBranch {
                            modulus: arg.norm(),
                            floor: SQRT_FLOOR,
                        });
                    }
                    arg.sqrt()
                }
            };
            scratch.push(v);
        }
        out.clear();
        for &o in &self.outputs {
            let v = scratch[o as usize];
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(EvalError::NonFinite);
            }
            out.push(v);
        }
        Ok(())
    }

    /// One-shot evaluation allocating fresh buffers.
    pub fn eval_at(&self, q: ComplexPoint2) -> Result<Vec<Complex64>, EvalError> {
        let mut scratch = Vec::new();
        let mut out = Vec::new();
        self.run(q, &mut scratch, &mut out)?;
        Ok(out)
    }
}
