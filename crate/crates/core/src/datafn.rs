//! Problem data as functions of (t, x): constants, parsed expressions or closures.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::{self, Expr, Var};

pub type NativeFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum DataFn {
    Const(f64),
    Expr(Arc<Expr>),
    /// A closure with an optional exact t-derivative.
    Native {
        f: NativeFn,
        dt: Option<NativeFn>,
        dx: Option<NativeFn>,
    },
}

impl fmt::Debug for DataFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Const(c) => write!(f, "Const({c})"),
            Self::Expr(e) => write!(f, "Expr({e})"),
            Self::Native { .. } => f.write_str("Native(..)"),
        }
    }
}

impl From<f64> for DataFn {
    fn from(c: f64) -> Self {
        Self::Const(c)
    }
}

impl DataFn {
    pub fn parse(text: &str) -> Result<Self> {
        let e = expr::parse(text)?;
        Ok(match e.node {
            expr::Node::Num(v) => Self::Const(v),
            _ => Self::Expr(Arc::new(e)),
        })
    }

    pub fn native<F>(f: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        Self::Native { f: Arc::new(f), dt: None, dx: None }
    }

    pub fn eval(&self, t: f64, x: f64) -> Result<f64> {
        match self {
            Self::Const(c) => Ok(*c),
            Self::Expr(e) => Ok(e.eval(t, x)?),
            Self::Native { f, .. } => {
                let v = f(t, x);
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::InvalidData(format!("data function is not finite at (t, x) = ({t}, {x})")))
                }
            }
        }
    }

    pub fn depends_on(&self, v: Var) -> bool {
        match self {
            Self::Const(_) => false,
            Self::Expr(e) => e.depends_on(v),
            Self::Native { .. } => true,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Self::Const(c) if *c == 0.0)
    }

    /// Exact partial derivative when one is available.
    pub fn derivative(&self, v: Var) -> Option<Result<DataFn>> {
        match self {
            Self::Const(_) => Some(Ok(Self::Const(0.0))),
            Self::Expr(e) => Some(
                expr::differentiate(e, v)
                    .map(|d| match d.node {
                        expr::Node::Num(c) => Self::Const(c),
                        _ => Self::Expr(Arc::new(d)),
                    })
                    .map_err(|err| Error::InvalidData(err.to_string())),
            ),
            Self::Native { dt, dx, .. } => {
                let d = if v == Var::T { dt } else { dx };
                d.as_ref().map(|g| Ok(Self::Native { f: g.clone(), dt: None, dx: None }))
            }
        }
    }

    /// `self * s` for scalar s.
    pub fn scaled(&self, s: f64) -> DataFn {
        match self {
            Self::Const(c) => Self::Const(c * s),
            other => {
                let inner = other.clone();
                Self::native(move |t, x| s * inner.eval(t, x).unwrap_or(f64::NAN))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_eval() {
        let f = DataFn::parse("t + 2*x").unwrap();
        assert_eq!(f.eval(1.0, 2.0).unwrap(), 5.0);
        assert!(matches!(DataFn::parse("3.5").unwrap(), DataFn::Const(c) if c == 3.5));
        assert!(f.depends_on(Var::T) && f.depends_on(Var::X));
    }

    #[test]
    fn derivatives() {
        let f = DataFn::parse("t^2*x").unwrap();
        let d = f.derivative(Var::T).unwrap().unwrap();
        assert_eq!(d.eval(3.0, 2.0).unwrap(), 12.0);
        assert!(DataFn::native(|t, _| t).derivative(Var::T).is_none());
        assert!(DataFn::Const(1.0).derivative(Var::T).unwrap().unwrap().is_zero());
    }

    #[test]
    fn native_nonfinite_is_error() {
        assert!(DataFn::native(|t, _| 1.0 / t).eval(0.0, 0.0).is_err());
    }
}
