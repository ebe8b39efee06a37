//! Grammar-compatible printing of expression DAGs.
//!
//! The printed form of any field built without real powers parses back to an
//! evaluation-equivalent field. Real powers have no grammar production and
//! print as `powf(base, alpha)` for diagnostics only.

use super::{Kind, Node, ScalarField, Var};
use std::fmt;

fn precedence(kind: &Kind) -> u8 {
    match kind {
        Kind::Add(..) => 1,
        Kind::Mul(..) | Kind::Div(..) => 2,
        Kind::PowInt(..) => 3,
        _ => 4,
    }
}

fn write_node(f: &mut fmt::Formatter<'_>, e: &Node, parent_prec: u8) -> fmt::Result {
    let prec = precedence(&e.kind);
    let needs_paren = prec < parent_prec;
    if needs_paren {
        write!(f, "(")?;
    }
    match &e.kind {
        Kind::Const(c) => {
            if c.im == 0.0 {
                if c.re < 0.0 {
                    write!(f, "(0 - {})", -c.re)?;
                } else {
                    write!(f, "{}", c.re)?;
                }
            } else {
                let (re, im) = (c.re, c.im);
                write!(f, "(")?;
                if re < 0.0 {
                    write!(f, "0 - {}", -re)?;
                } else {
                    write!(f, "{re}")?;
                }
                if im < 0.0 {
                    write!(f, " - {}*i", -im)?;
                } else {
                    write!(f, " + {im}*i")?;
                }
                write!(f, ")")?;
            }
        }
        Kind::Var(Var::Z1) => write!(f, "z1")?,
        Kind::Var(Var::Z2) => write!(f, "z2")?,
        Kind::Conj(a) => {
            write!(f, "conj(")?;
            write_node(f, a, 0)?;
            write!(f, ")")?;
        }
        Kind::Add(a, b) => {
            write_node(f, a, prec)?;
            write!(f, " + ")?;
            write_node(f, b, prec + 1)?;
        }
        Kind::Mul(a, b) => {
            write_node(f, a, prec)?;
            write!(f, "*")?;
            write_node(f, b, prec + 1)?;
        }
        Kind::Div(a, b) => {
            write_node(f, a, prec)?;
            write!(f, "/")?;
            write_node(f, b, prec + 1)?;
        }
        Kind::PowInt(a, k) => {
            write_node(f, a, prec + 1)?;
            write!(f, "^{k}")?;
        }
        Kind::PowReal(a, alpha) => {
            write!(f, "powf(")?;
            write_node(f, a, 0)?;
            write!(f, ", {alpha})")?;
        }
        Kind::Exp(a) => {
            write!(f, "exp(")?;
            write_node(f, a, 0)?;
            write!(f, ")")?;
        }
        Kind::Sqrt(a) => {
            write!(f, "sqrt(")?;
            write_node(f, a, 0)?;
            write!(f, ")")?;
        }
    }
    if needs_paren {
        write!(f, ")")?;
    }
    Ok(())
}

impl fmt::Display for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_node(f, &self.root, 0)
    }
}

#[cfg(test)]
mod tests {
    use crate::expr::{eval, parse};
    use crate::types::ComplexPoint2;
    use num_complex::Complex64;

    #[test]
    fn round_trip_is_evaluation_equivalent() {
        let src =
            "re(z2) + abs2(z2) + re(z2)*abs2(z1) + abs2(z1)*abs2(z2) + abs2(z1)^2 + abs2(z1)^3";
        let f = parse(src).unwrap();
        let g = parse(&f.to_string()).unwrap();
        let q = ComplexPoint2::new(Complex64::new(0.21, -0.43), Complex64::new(-0.05, 0.17));
        let a = eval(&f, q).unwrap();
        let b = eval(&g, q).unwrap();
        assert!((a - b).norm() < 1e-14 * (1.0 + a.norm()));
    }
}
