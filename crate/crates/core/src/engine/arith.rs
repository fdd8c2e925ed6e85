use crate::term::Term;

use super::compile::ArOp;
use super::{EResult, Engine, EngineError};

fn overflow() -> EngineError {
    EngineError::Eval("integer overflow".into())
}

fn zero_div() -> EngineError {
    EngineError::Eval("division by zero".into())
}

/// Applies a binary or unary integer operation.
pub(crate) fn apply(op: ArOp, xs: &[i64]) -> EResult<i64> {
    use ArOp::*;
    let a = xs.first().copied().unwrap_or(0);
    let b = xs.get(1).copied().unwrap_or(0);
    Ok(match op {
        Add => a.checked_add(b).ok_or_else(overflow)?,
        Sub => a.checked_sub(b).ok_or_else(overflow)?,
        Mul => a.checked_mul(b).ok_or_else(overflow)?,
        IntDiv => {
            if b == 0 {
                return Err(zero_div());
            }
            a.checked_div(b).ok_or_else(overflow)?
        }
        ExactDiv => {
            if b == 0 {
                return Err(zero_div());
            }
            if a % b != 0 {
                return Err(EngineError::Eval(format!(
                    "{a}/{b} is not an integer"
                )));
            }
            a / b
        }
        FloorDiv => {
            if b == 0 {
                return Err(zero_div());
            }
            let q = a.checked_div(b).ok_or_else(overflow)?;
            if a % b != 0 && ((a < 0) != (b < 0)) {
                q - 1
            } else {
                q
            }
        }
        Mod => {
            if b == 0 {
                return Err(zero_div());
            }
            let r = a % b;
            if r != 0 && (r < 0) != (b < 0) {
                r + b
            } else {
                r
            }
        }
        Rem => {
            if b == 0 {
                return Err(zero_div());
            }
            a % b
        }
        Neg => a.checked_neg().ok_or_else(overflow)?,
        Pos => a,
        Abs => a.checked_abs().ok_or_else(overflow)?,
        Min2 => a.min(b),
        Max2 => a.max(b),
        MinList => *xs
            .iter()
            .min()
            .ok_or_else(|| EngineError::Eval("min of an empty list".into()))?,
        MaxList => *xs
            .iter()
            .max()
            .ok_or_else(|| EngineError::Eval("max of an empty list".into()))?,
        Sum => xs
            .iter()
            .try_fold(0i64, |s, &x| s.checked_add(x))
            .ok_or_else(overflow)?,
        Pow => {
            if b < 0 {
                match a {
                    1 => 1,
                    -1 => {
                        if b % 2 == 0 {
                            1
                        } else {
                            -1
                        }
                    }
                    _ => return Err(EngineError::Eval(format!("{a}**{b} is not an integer"))),
                }
            } else {
                let e = u32::try_from(b).map_err(|_| overflow())?;
                a.checked_pow(e).ok_or_else(overflow)?
            }
        }
        BitAnd => a & b,
        BitOr => a | b,
        Xor => a ^ b,
        Shl => {
            let s = u32::try_from(b).map_err(|_| overflow())?;
            a.checked_shl(s).ok_or_else(overflow)?
        }
        Shr => {
            let s = u32::try_from(b).map_err(|_| overflow())?;
            a.checked_shr(s).unwrap_or(if a < 0 { -1 } else { 0 })
        }
        BitNot => !a,
        Sign => a.signum(),
    })
}

fn is_list_op(op: ArOp) -> bool {
    matches!(op, ArOp::MinList | ArOp::MaxList | ArOp::Sum)
}

impl Engine {
    /// Evaluates an arithmetic operation; every operand must be an integer.
    pub(crate) fn arith(&self, op: ArOp, args: &[Term]) -> EResult<i64> {
        if is_list_op(op) {
            let items = self.list_vec(args[0])?;
            let mut xs = Vec::with_capacity(items.len());
            for t in items {
                xs.push(self.int_of(t, "operand")?);
            }
            return apply(op, &xs);
        }
        let mut xs = [0i64; 2];
        for (i, &t) in args.iter().enumerate() {
            xs[i] = self.int_of(t, "operand")?;
        }
        apply(op, &xs[..args.len()])
    }

    /// Like [`Engine::arith`], but returns `None` when some operand is not an
    /// integer.
    pub(crate) fn try_arith(&self, op: ArOp, args: &[Term]) -> EResult<Option<i64>> {
        if is_list_op(op) {
            let t = self.deref(args[0]);
            if matches!(t, Term::Var(_)) {
                return Ok(None);
            }
            let Ok(items) = self.list_vec(t) else {
                return Ok(None);
            };
            let mut xs = Vec::with_capacity(items.len());
            for t in items {
                match self.deref(t) {
                    Term::Int(n) => xs.push(n),
                    _ => return Ok(None),
                }
            }
            return apply(op, &xs).map(Some);
        }
        let mut xs = [0i64; 2];
        for (i, &t) in args.iter().enumerate() {
            match self.deref(t) {
                Term::Int(n) => xs[i] = n,
                _ => return Ok(None),
            }
        }
        apply(op, &xs[..args.len()]).map(Some)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn division_family() {
        assert_eq!(apply(ArOp::IntDiv, &[-7, 2]).unwrap(), -3);
        assert_eq!(apply(ArOp::FloorDiv, &[-7, 2]).unwrap(), -4);
        assert_eq!(apply(ArOp::FloorDiv, &[7, -2]).unwrap(), -4);
        assert_eq!(apply(ArOp::FloorDiv, &[-7, -2]).unwrap(), 3);
        assert_eq!(apply(ArOp::Mod, &[-7, 2]).unwrap(), 1);
        assert_eq!(apply(ArOp::Mod, &[7, -2]).unwrap(), -1);
        assert_eq!(apply(ArOp::Rem, &[-7, 2]).unwrap(), -1);
        assert_eq!(apply(ArOp::ExactDiv, &[8, 2]).unwrap(), 4);
        assert!(apply(ArOp::ExactDiv, &[7, 2]).is_err());
        assert!(apply(ArOp::IntDiv, &[1, 0]).is_err());
    }

    #[test]
    fn misc_ops() {
        assert_eq!(apply(ArOp::Pow, &[2, 10]).unwrap(), 1024);
        assert_eq!(apply(ArOp::Sum, &[1, 2, 3]).unwrap(), 6);
        assert_eq!(apply(ArOp::MinList, &[4, 2, 9]).unwrap(), 2);
        assert!(apply(ArOp::Mul, &[i64::MAX, 2]).is_err());
        assert_eq!(apply(ArOp::Sign, &[-5]).unwrap(), -1);
    }
}
