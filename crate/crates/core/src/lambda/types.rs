//! Syntax-directed type checking. Binders are annotated, so every term
//! synthesizes at most one type and no inference is needed.

use thiserror::Error;

use super::ast::{SimpleType, Term};
use super::prims::PrimitiveTable;

#[derive(Debug, Error, PartialEq)]
pub enum TypeError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("unknown primitive `{0}`")]
    UnknownPrimitive(String),
    #[error("primitive `{name}` expects {expected} arguments, got {got}")]
    PrimArity {
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("argument {index} of primitive `{name}` has type {found}, expected Real")]
    PrimArgNotReal {
        name: String,
        index: usize,
        found: SimpleType,
    },
    #[error("cannot apply a term of type {0}: not a function")]
    NotAFunction(SimpleType),
    #[error("function expects {expected}, argument has type {found}")]
    ArgumentMismatch {
        expected: SimpleType,
        found: SimpleType,
    },
    #[error("cannot project from a term of type {0}: not a pair")]
    NotAPair(SimpleType),
    #[error("typing context declares `{0}` twice")]
    DuplicateName(String),
}

/// An ordered typing context. Entries from user input must be distinct;
/// internal extension by binders may shadow, with lookup preferring the
/// innermost binding.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TypingContext {
    entries: Vec<(String, SimpleType)>,
}

impl TypingContext {
    pub fn empty() -> Self {
        TypingContext::default()
    }

    pub fn new(entries: Vec<(String, SimpleType)>) -> Result<Self, TypeError> {
        for (i, (name, _)) in entries.iter().enumerate() {
            if entries[..i].iter().any(|(n, _)| n == name) {
                return Err(TypeError::DuplicateName(name.clone()));
            }
        }
        Ok(TypingContext { entries })
    }

    pub fn push(&mut self, name: impl Into<String>, ty: SimpleType) {
        self.entries.push((name.into(), ty));
    }

    pub fn extended(&self, name: impl Into<String>, ty: SimpleType) -> Self {
        let mut out = self.clone();
        out.push(name, ty);
        out
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(String, SimpleType)] {
        &self.entries
    }

    pub fn type_at(&self, i: usize) -> &SimpleType {
        &self.entries[i].1
    }

    pub fn name_at(&self, i: usize) -> &str {
        &self.entries[i].0
    }

    /// Innermost binding index for a name.
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.entries.iter().rposition(|(n, _)| n == name)
    }
}

/// Returns the unique type of `t` in `ctx`, or the first failure.
pub fn typecheck(
    ctx: &TypingContext,
    t: &Term,
    prims: &PrimitiveTable,
) -> Result<SimpleType, TypeError> {
    match t {
        Term::Var(x) => ctx
            .index_of(x)
            .map(|i| ctx.type_at(i).clone())
            .ok_or_else(|| TypeError::UnboundVariable(x.clone())),
        Term::Const(_) => Ok(SimpleType::Real),
        Term::Prim(name, args) => {
            let prim = prims
                .get(name)
                .ok_or_else(|| TypeError::UnknownPrimitive(name.clone()))?;
            if args.len() != prim.arity {
                return Err(TypeError::PrimArity {
                    name: name.clone(),
                    expected: prim.arity,
                    got: args.len(),
                });
            }
            for (i, arg) in args.iter().enumerate() {
                let ty = typecheck(ctx, arg, prims)?;
                if ty != SimpleType::Real {
                    return Err(TypeError::PrimArgNotReal {
                        name: name.clone(),
                        index: i,
                        found: ty,
                    });
                }
            }
            Ok(SimpleType::Real)
        }
        Term::App(f, a) => {
            let fty = typecheck(ctx, f, prims)?;
            let aty = typecheck(ctx, a, prims)?;
            match fty {
                SimpleType::Arrow(dom, cod) => {
                    if *dom == aty {
                        Ok(*cod)
                    } else {
                        Err(TypeError::ArgumentMismatch {
                            expected: *dom,
                            found: aty,
                        })
                    }
                }
                other => Err(TypeError::NotAFunction(other)),
            }
        }
        Term::Lam(x, ty, body) => {
            let inner = ctx.extended(x.clone(), ty.clone());
            let bty = typecheck(&inner, body, prims)?;
            Ok(SimpleType::arrow(ty.clone(), bty))
        }
        Term::Pair(l, r) => Ok(SimpleType::prod(
            typecheck(ctx, l, prims)?,
            typecheck(ctx, r, prims)?,
        )),
        Term::Fst(t) => match typecheck(ctx, t, prims)? {
            SimpleType::Prod(l, _) => Ok(*l),
            other => Err(TypeError::NotAPair(other)),
        },
        Term::Snd(t) => match typecheck(ctx, t, prims)? {
            SimpleType::Prod(_, r) => Ok(*r),
            other => Err(TypeError::NotAPair(other)),
        },
        Term::Let(x, bound, body) => {
            let bty = typecheck(ctx, bound, prims)?;
            let inner = ctx.extended(x.clone(), bty);
            typecheck(&inner, body, prims)
        }
    }
}

/// Rewrites every `let x be t in s` into `(\x:A. s) t`, which requires the
/// context to type the bound term.
pub fn desugar_lets(
    ctx: &TypingContext,
    t: &Term,
    prims: &PrimitiveTable,
) -> Result<Term, TypeError> {
    Ok(match t {
        Term::Var(_) | Term::Const(_) => t.clone(),
        Term::Prim(name, args) => Term::Prim(
            name.clone(),
            args.iter()
                .map(|a| desugar_lets(ctx, a, prims))
                .collect::<Result<_, _>>()?,
        ),
        Term::App(f, a) => Term::app(desugar_lets(ctx, f, prims)?, desugar_lets(ctx, a, prims)?),
        Term::Lam(x, ty, body) => {
            let inner = ctx.extended(x.clone(), ty.clone());
            Term::lam(x.clone(), ty.clone(), desugar_lets(&inner, body, prims)?)
        }
        Term::Pair(l, r) => Term::pair(desugar_lets(ctx, l, prims)?, desugar_lets(ctx, r, prims)?),
        Term::Fst(t) => Term::fst(desugar_lets(ctx, t, prims)?),
        Term::Snd(t) => Term::snd(desugar_lets(ctx, t, prims)?),
        Term::Let(x, bound, body) => {
            let bound = desugar_lets(ctx, bound, prims)?;
            let bty = typecheck(ctx, &bound, prims)?;
            let inner = ctx.extended(x.clone(), bty.clone());
            let body = desugar_lets(&inner, body, prims)?;
            Term::app(Term::lam(x.clone(), bty, body), bound)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lambda::parser::parse;

    fn table() -> PrimitiveTable {
        PrimitiveTable::default_with_eps(0.1)
    }

    fn real() -> SimpleType {
        SimpleType::Real
    }

    #[test]
    fn higher_order_example_types() {
        // \f:(Real=>Real)=>Real. f (\x:Real. 1) at ((R->R)->R)->R.
        let t = parse("\\f:(Real -> Real) -> Real. f (\\x:Real. 1.0)", &table()).unwrap();
        let ty = typecheck(&TypingContext::empty(), &t, &table()).unwrap();
        assert_eq!(
            ty,
            SimpleType::arrow(
                SimpleType::arrow(SimpleType::arrow(real(), real()), real()),
                real()
            )
        );
    }

    #[test]
    fn example_with_context_types_to_real() {
        let ctx = TypingContext::new(vec![
            ("f".into(), SimpleType::arrow(real(), real())),
            ("x".into(), real()),
        ])
        .unwrap();
        let t = parse("diff(f (add x), f x)", &table()).unwrap();
        assert_eq!(typecheck(&ctx, &t, &table()).unwrap(), real());
        let t = parse("let y be add(x) in diff(f y, f x)", &table()).unwrap();
        assert_eq!(typecheck(&ctx, &t, &table()).unwrap(), real());
    }

    #[test]
    fn application_type_mismatch_is_reported() {
        let t = parse("(\\x:Real. x) <1.0, 2.0>", &table()).unwrap();
        let err = typecheck(&TypingContext::empty(), &t, &table()).unwrap_err();
        assert_eq!(
            err,
            TypeError::ArgumentMismatch {
                expected: real(),
                found: SimpleType::prod(real(), real()),
            }
        );
    }

    #[test]
    fn error_paths() {
        let tbl = table();
        let ctx = TypingContext::empty();
        assert_eq!(
            typecheck(&ctx, &Term::var("nope"), &tbl),
            Err(TypeError::UnboundVariable("nope".into()))
        );
        assert_eq!(
            typecheck(&ctx, &Term::Prim("sin".into(), vec![]), &tbl),
            Err(TypeError::PrimArity {
                name: "sin".into(),
                expected: 1,
                got: 0
            })
        );
        assert_eq!(
            typecheck(&ctx, &Term::fst(Term::Const(1.0)), &tbl),
            Err(TypeError::NotAPair(real()))
        );
        assert_eq!(
            typecheck(&ctx, &Term::app(Term::Const(1.0), Term::Const(2.0)), &tbl),
            Err(TypeError::NotAFunction(real()))
        );
        assert!(TypingContext::new(vec![("x".into(), real()), ("x".into(), real())]).is_err());
    }

    #[test]
    fn subject_uniqueness_under_shadowing() {
        let t = parse("\\x:Real. \\x:Real * Real. fst(x)", &table()).unwrap();
        let ty = typecheck(&TypingContext::empty(), &t, &table()).unwrap();
        assert_eq!(
            ty,
            SimpleType::arrow(
                real(),
                SimpleType::arrow(SimpleType::prod(real(), real()), real())
            )
        );
    }

    #[test]
    fn desugaring_lets_preserves_the_type() {
        let ctx = TypingContext::new(vec![
            ("f".into(), SimpleType::arrow(real(), real())),
            ("x".into(), real()),
        ])
        .unwrap();
        let t = parse("let y be add(x) in diff(f y, f x)", &table()).unwrap();
        let d = desugar_lets(&ctx, &t, &table()).unwrap();
        assert_eq!(
            d,
            Term::app(
                Term::lam(
                    "y",
                    real(),
                    Term::Prim(
                        "diff".into(),
                        vec![
                            Term::app(Term::var("f"), Term::var("y")),
                            Term::app(Term::var("f"), Term::var("x"))
                        ]
                    )
                ),
                Term::Prim("add".into(), vec![Term::var("x")])
            )
        );
        assert_eq!(typecheck(&ctx, &d, &table()).unwrap(), real());
    }
}
