//! Abstract syntax for the calculus: simple types over `Real` with products
//! and arrows, and terms with explicitly annotated binders.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SimpleType {
    Real,
    Prod(Box<SimpleType>, Box<SimpleType>),
    Arrow(Box<SimpleType>, Box<SimpleType>),
}

impl SimpleType {
    pub fn prod(l: SimpleType, r: SimpleType) -> Self {
        SimpleType::Prod(Box::new(l), Box::new(r))
    }

    pub fn arrow(dom: SimpleType, cod: SimpleType) -> Self {
        SimpleType::Arrow(Box::new(dom), Box::new(cod))
    }

    /// First-order means no arrows anywhere.
    pub fn is_first_order(&self) -> bool {
        match self {
            SimpleType::Real => true,
            SimpleType::Prod(l, r) => l.is_first_order() && r.is_first_order(),
            SimpleType::Arrow(_, _) => false,
        }
    }
}

impl fmt::Display for SimpleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimpleType::Real => write!(f, "Real"),
            SimpleType::Prod(l, r) => {
                let lhs = match **l {
                    SimpleType::Arrow(_, _) | SimpleType::Prod(_, _) => format!("({l})"),
                    _ => l.to_string(),
                };
                let rhs = match **r {
                    SimpleType::Arrow(_, _) => format!("({r})"),
                    _ => r.to_string(),
                };
                write!(f, "{lhs} * {rhs}")
            }
            SimpleType::Arrow(d, c) => {
                let dom = match **d {
                    SimpleType::Arrow(_, _) => format!("({d})"),
                    _ => d.to_string(),
                };
                write!(f, "{dom} -> {c}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Term {
    Var(String),
    Const(f64),
    /// Application of a named primitive at its full arity.
    Prim(String, Vec<Term>),
    App(Box<Term>, Box<Term>),
    Lam(String, SimpleType, Box<Term>),
    Pair(Box<Term>, Box<Term>),
    Fst(Box<Term>),
    Snd(Box<Term>),
    /// `let x be t in s` — semantically identical to `(\x:A. s) t` where `A`
    /// is the type of `t`; kept as a node so parsing needs no annotation.
    Let(String, Box<Term>, Box<Term>),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(name.into())
    }

    pub fn app(f: Term, a: Term) -> Self {
        Term::App(Box::new(f), Box::new(a))
    }

    pub fn lam(name: impl Into<String>, ty: SimpleType, body: Term) -> Self {
        Term::Lam(name.into(), ty, Box::new(body))
    }

    pub fn pair(l: Term, r: Term) -> Self {
        Term::Pair(Box::new(l), Box::new(r))
    }

    pub fn fst(t: Term) -> Self {
        Term::Fst(Box::new(t))
    }

    pub fn snd(t: Term) -> Self {
        Term::Snd(Box::new(t))
    }

    pub fn let_in(name: impl Into<String>, bound: Term, body: Term) -> Self {
        Term::Let(name.into(), Box::new(bound), Box::new(body))
    }

    pub fn free_vars(&self) -> Vec<String> {
        fn go(t: &Term, bound: &mut Vec<String>, out: &mut Vec<String>) {
            match t {
                Term::Var(x) => {
                    if !bound.contains(x) && !out.contains(x) {
                        out.push(x.clone());
                    }
                }
                Term::Const(_) => {}
                Term::Prim(_, args) => args.iter().for_each(|a| go(a, bound, out)),
                Term::App(f, a) => {
                    go(f, bound, out);
                    go(a, bound, out);
                }
                Term::Lam(x, _, body) => {
                    bound.push(x.clone());
                    go(body, bound, out);
                    bound.pop();
                }
                Term::Pair(l, r) => {
                    go(l, bound, out);
                    go(r, bound, out);
                }
                Term::Fst(t) | Term::Snd(t) => go(t, bound, out),
                Term::Let(x, b, body) => {
                    go(b, bound, out);
                    bound.push(x.clone());
                    go(body, bound, out);
                    bound.pop();
                }
            }
        }
        let mut out = Vec::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }
}

/// Minimal-parenthesis pretty printer; `parse . pretty` is identity up to
/// let-nodes, which reprint as `let` syntax.
impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_term(self, f, 0)
    }
}

// Precedence levels: 0 = everything (lambda, let), 1 = application, 2 = atoms.
fn fmt_term(t: &Term, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
    match t {
        Term::Var(x) => write!(f, "{x}"),
        Term::Const(r) => {
            if *r < 0.0 {
                write!(f, "({r})")
            } else if r.fract() == 0.0 && r.is_finite() {
                write!(f, "{r:.1}")
            } else {
                write!(f, "{r}")
            }
        }
        Term::Prim(name, args) => {
            write!(f, "{name}(")?;
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                fmt_term(a, f, 0)?;
            }
            write!(f, ")")
        }
        Term::App(fun, arg) => {
            if prec > 1 {
                write!(f, "(")?;
            }
            fmt_term(fun, f, 1)?;
            write!(f, " ")?;
            fmt_term(arg, f, 2)?;
            if prec > 1 {
                write!(f, ")")?;
            }
            Ok(())
        }
        Term::Lam(x, ty, body) => {
            if prec > 0 {
                write!(f, "(")?;
            }
            write!(f, "\\{x}:{ty}. ")?;
            fmt_term(body, f, 0)?;
            if prec > 0 {
                write!(f, ")")?;
            }
            Ok(())
        }
        Term::Pair(l, r) => {
            write!(f, "<")?;
            fmt_term(l, f, 0)?;
            write!(f, ", ")?;
            fmt_term(r, f, 0)?;
            write!(f, ">")
        }
        Term::Fst(t) => {
            write!(f, "fst(")?;
            fmt_term(t, f, 0)?;
            write!(f, ")")
        }
        Term::Snd(t) => {
            write!(f, "snd(")?;
            fmt_term(t, f, 0)?;
            write!(f, ")")
        }
        Term::Let(x, bound, body) => {
            if prec > 0 {
                write!(f, "(")?;
            }
            write!(f, "let {x} be ")?;
            fmt_term(bound, f, 1)?;
            write!(f, " in ")?;
            fmt_term(body, f, 0)?;
            if prec > 0 {
                write!(f, ")")?;
            }
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_round_trips_structure() {
        let t = Term::lam(
            "f",
            SimpleType::arrow(SimpleType::Real, SimpleType::Real),
            Term::app(Term::var("f"), Term::Const(0.0)),
        );
        assert_eq!(t.to_string(), "\\f:Real -> Real. f 0.0");
    }

    #[test]
    fn free_vars_respect_binders() {
        let t = Term::let_in(
            "y",
            Term::var("x"),
            Term::app(Term::var("f"), Term::var("y")),
        );
        assert_eq!(t.free_vars(), vec!["x".to_string(), "f".to_string()]);
    }
}
