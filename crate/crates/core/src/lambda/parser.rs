//! Recursive-descent parser for the surface syntax.
//!
//! ```text
//! term    := '\' x ':' type '.' term
//!          | 'let' x 'be' term 'in' term
//!          | atom atom*                          (application, left assoc)
//! atom    := NUMBER | x | prim '(' term,* ')' | prim atom*
//!          | 'fst' '(' term ')' | 'snd' '(' term ')'
//!          | '<' term ',' term '>' | '(' term ')'
//! type    := ptype ['->' type]                   (right assoc)
//! ptype   := atype ['*' ptype]
//! atype   := 'Real' | '(' type ')'
//! ```
//!
//! An identifier counts as a primitive head only when it is free (not bound
//! by an enclosing lambda or let) and present in the active primitive table;
//! it then takes either a parenthesized argument list or exactly its arity
//! in juxtaposed atoms, so `diff(f y, f x)` and `add x` both work.

use thiserror::Error;

use super::ast::{SimpleType, Term};
use super::prims::PrimitiveTable;

#[derive(Debug, Error, PartialEq)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub message: String,
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(f64),
    Backslash,
    Dot,
    Colon,
    Comma,
    LParen,
    RParen,
    LAngle,
    RAngle,
    Arrow,
    Star,
    Let,
    Be,
    In,
    Fst,
    Snd,
    RealTy,
    Fn,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0usize;
    while i < chars.len() {
        let (l, c) = (line, col);
        let ch = chars[i];
        let mut push = |tok: Tok| out.push(Spanned { tok, line: l, col: c });
        match ch {
            '\n' => {
                line += 1;
                col = 1;
                i += 1;
                continue;
            }
            ' ' | '\t' | '\r' => {}
            '\\' | 'λ' => push(Tok::Backslash),
            '.' => push(Tok::Dot),
            ':' => push(Tok::Colon),
            ',' => push(Tok::Comma),
            '(' => push(Tok::LParen),
            ')' => push(Tok::RParen),
            '<' => push(Tok::LAngle),
            '>' => push(Tok::RAngle),
            '*' => push(Tok::Star),
            '-' => {
                if chars.get(i + 1) == Some(&'>') {
                    push(Tok::Arrow);
                    i += 1;
                    col += 1;
                } else if chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()) {
                    let (num, len) = lex_number(&chars[i..]).map_err(|m| ParseError {
                        message: m,
                        line: l,
                        col: c,
                    })?;
                    push(Tok::Number(num));
                    i += len - 1;
                    col += len - 1;
                } else {
                    return Err(ParseError {
                        message: "stray `-`".into(),
                        line: l,
                        col: c,
                    });
                }
            }
            d if d.is_ascii_digit() => {
                let (num, len) = lex_number(&chars[i..]).map_err(|m| ParseError {
                    message: m,
                    line: l,
                    col: c,
                })?;
                push(Tok::Number(num));
                i += len - 1;
                col += len - 1;
            }
            a if a.is_alphabetic() || a == '_' => {
                let mut j = i;
                while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                let word: String = chars[i..j].iter().collect();
                let tok = match word.as_str() {
                    "let" => Tok::Let,
                    "be" => Tok::Be,
                    "in" => Tok::In,
                    "fst" => Tok::Fst,
                    "snd" => Tok::Snd,
                    "fn" => Tok::Fn,
                    "Real" => Tok::RealTy,
                    _ => Tok::Ident(word.clone()),
                };
                push(tok);
                col += j - i - 1;
                i = j - 1;
            }
            other => {
                return Err(ParseError {
                    message: format!("unexpected character `{other}`"),
                    line: l,
                    col: c,
                })
            }
        }
        i += 1;
        col += 1;
    }
    Ok(out)
}

fn lex_number(chars: &[char]) -> Result<(f64, usize), String> {
    let mut j = 0usize;
    if chars[0] == '-' {
        j = 1;
    }
    while j < chars.len() && chars[j].is_ascii_digit() {
        j += 1;
    }
    if j < chars.len() && chars[j] == '.' {
        j += 1;
        while j < chars.len() && chars[j].is_ascii_digit() {
            j += 1;
        }
    }
    if j < chars.len() && (chars[j] == 'e' || chars[j] == 'E') {
        let mut k = j + 1;
        if k < chars.len() && (chars[k] == '+' || chars[k] == '-') {
            k += 1;
        }
        if k < chars.len() && chars[k].is_ascii_digit() {
            j = k;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
        }
    }
    let text: String = chars[..j].iter().collect();
    text.parse::<f64>()
        .map(|v| (v, j))
        .map_err(|_| format!("bad numeric literal `{text}`"))
}

struct Parser<'a> {
    toks: Vec<Spanned>,
    pos: usize,
    prims: &'a PrimitiveTable,
    binders: Vec<String>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos.min(self.toks.len().saturating_sub(1)))
            .map(|s| (s.line, s.col))
            .unwrap_or((1, 1))
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        let (line, col) = self.here();
        Err(ParseError {
            message: message.into(),
            line,
            col,
        })
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|s| s.tok.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn parse_type(&mut self) -> Result<SimpleType, ParseError> {
        let lhs = self.parse_prod_type()?;
        if self.peek() == Some(&Tok::Arrow) {
            self.pos += 1;
            let rhs = self.parse_type()?;
            Ok(SimpleType::arrow(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn parse_prod_type(&mut self) -> Result<SimpleType, ParseError> {
        let lhs = self.parse_atom_type()?;
        if self.peek() == Some(&Tok::Star) {
            self.pos += 1;
            let rhs = self.parse_prod_type()?;
            Ok(SimpleType::prod(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn parse_atom_type(&mut self) -> Result<SimpleType, ParseError> {
        match self.bump() {
            Some(Tok::RealTy) => Ok(SimpleType::Real),
            Some(Tok::LParen) => {
                let t = self.parse_type()?;
                self.expect(Tok::RParen, "`)` to close the type")?;
                Ok(t)
            }
            _ => {
                self.pos = self.pos.saturating_sub(1);
                self.err("expected a type")
            }
        }
    }

    fn parse_term(&mut self) -> Result<Term, ParseError> {
        match self.peek() {
            Some(Tok::Backslash) | Some(Tok::Fn) => {
                self.pos += 1;
                let name = match self.bump() {
                    Some(Tok::Ident(x)) => x,
                    _ => {
                        self.pos = self.pos.saturating_sub(1);
                        return self.err("expected a binder name");
                    }
                };
                self.expect(Tok::Colon, "`:` before the binder type")?;
                let ty = self.parse_type()?;
                self.expect(Tok::Dot, "`.` after the binder type")?;
                self.binders.push(name.clone());
                let body = self.parse_term()?;
                self.binders.pop();
                Ok(Term::lam(name, ty, body))
            }
            Some(Tok::Let) => {
                self.pos += 1;
                let name = match self.bump() {
                    Some(Tok::Ident(x)) => x,
                    _ => {
                        self.pos = self.pos.saturating_sub(1);
                        return self.err("expected a name after `let`");
                    }
                };
                self.expect(Tok::Be, "`be` after the let binder")?;
                let bound = self.parse_app()?;
                self.expect(Tok::In, "`in` after the bound term")?;
                self.binders.push(name.clone());
                let body = self.parse_term()?;
                self.binders.pop();
                Ok(Term::let_in(name, bound, body))
            }
            _ => self.parse_app(),
        }
    }

    fn starts_atom(&self) -> bool {
        matches!(
            self.peek(),
            Some(Tok::Ident(_))
                | Some(Tok::Number(_))
                | Some(Tok::LParen)
                | Some(Tok::LAngle)
                | Some(Tok::Fst)
                | Some(Tok::Snd)
        )
    }

    fn parse_app(&mut self) -> Result<Term, ParseError> {
        let mut head = self.parse_atom()?;
        while self.starts_atom() {
            let arg = self.parse_atom()?;
            head = Term::app(head, arg);
        }
        Ok(head)
    }

    /// Is this identifier a primitive head here: free and in the table?
    fn prim_arity(&self, name: &str) -> Option<usize> {
        if self.binders.iter().any(|b| b == name) {
            None
        } else {
            self.prims.get(name).map(|p| p.arity)
        }
    }

    fn parse_atom(&mut self) -> Result<Term, ParseError> {
        match self.bump() {
            Some(Tok::Number(x)) => Ok(Term::Const(x)),
            Some(Tok::Ident(name)) => {
                if let Some(arity) = self.prim_arity(&name) {
                    if self.peek() == Some(&Tok::LParen) {
                        self.pos += 1;
                        let mut args = Vec::new();
                        if self.peek() != Some(&Tok::RParen) {
                            loop {
                                args.push(self.parse_term()?);
                                if self.peek() == Some(&Tok::Comma) {
                                    self.pos += 1;
                                } else {
                                    break;
                                }
                            }
                        }
                        self.expect(Tok::RParen, "`)` to close the argument list")?;
                        if args.len() != arity {
                            return self.err(format!(
                                "primitive `{name}` expects {arity} arguments, got {}",
                                args.len()
                            ));
                        }
                        Ok(Term::Prim(name, args))
                    } else {
                        let mut args = Vec::new();
                        for k in 0..arity {
                            if !self.starts_atom() {
                                return self.err(format!(
                                    "primitive `{name}` expects {arity} arguments, got {k}"
                                ));
                            }
                            args.push(self.parse_atom()?);
                        }
                        Ok(Term::Prim(name, args))
                    }
                } else {
                    Ok(Term::Var(name))
                }
            }
            Some(Tok::Fst) | Some(Tok::Snd) => {
                let was_fst = self.toks[self.pos - 1].tok == Tok::Fst;
                self.expect(
                    Tok::LParen,
                    if was_fst {
                        "`(` after fst (projections are written fst(t))"
                    } else {
                        "`(` after snd (projections are written snd(t))"
                    },
                )?;
                let t = self.parse_term()?;
                self.expect(Tok::RParen, "`)` to close the projection")?;
                Ok(if was_fst { Term::fst(t) } else { Term::snd(t) })
            }
            Some(Tok::LAngle) => {
                let l = self.parse_term()?;
                self.expect(Tok::Comma, "`,` between pair components")?;
                let r = self.parse_term()?;
                self.expect(Tok::RAngle, "`>` to close the pair")?;
                Ok(Term::pair(l, r))
            }
            Some(Tok::LParen) => {
                let t = self.parse_term()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(t)
            }
            _ => {
                self.pos = self.pos.saturating_sub(1);
                self.err("expected a term")
            }
        }
    }
}

/// Parses a complete term. The primitive table decides which free
/// identifiers act as primitive heads.
pub fn parse(source: &str, prims: &PrimitiveTable) -> Result<Term, ParseError> {
    let toks = lex(source)?;
    let mut p = Parser {
        toks,
        pos: 0,
        prims,
        binders: Vec::new(),
    };
    let t = p.parse_term()?;
    if p.pos < p.toks.len() {
        return p.err("trailing input after the term");
    }
    Ok(t)
}

/// Parses a type on its own, for CLI arguments and derivation files.
pub fn parse_type(source: &str) -> Result<SimpleType, ParseError> {
    let empty = PrimitiveTable::empty();
    let toks = lex(source)?;
    let mut p = Parser {
        toks,
        pos: 0,
        prims: &empty,
        binders: Vec::new(),
    };
    let t = p.parse_type()?;
    if p.pos < p.toks.len() {
        return p.err("trailing input after the type");
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> PrimitiveTable {
        PrimitiveTable::default_with_eps(0.1)
    }

    #[test]
    fn parses_lambda_and_application() {
        let t = parse("\\f:Real->Real. f 0.0", &table()).unwrap();
        assert_eq!(
            t,
            Term::lam(
                "f",
                SimpleType::arrow(SimpleType::Real, SimpleType::Real),
                Term::app(Term::var("f"), Term::Const(0.0))
            )
        );
    }

    #[test]
    fn let_is_kept_as_a_node() {
        let t = parse("let y be add(x) in diff(f y, f x)", &table()).unwrap();
        assert_eq!(
            t,
            Term::let_in(
                "y",
                Term::Prim("add".into(), vec![Term::var("x")]),
                Term::Prim(
                    "diff".into(),
                    vec![
                        Term::app(Term::var("f"), Term::var("y")),
                        Term::app(Term::var("f"), Term::var("x"))
                    ]
                )
            )
        );
    }

    #[test]
    fn prims_apply_by_juxtaposition_too() {
        let t = parse("f (add x)", &table()).unwrap();
        assert_eq!(
            t,
            Term::app(
                Term::var("f"),
                Term::Prim("add".into(), vec![Term::var("x")])
            )
        );
        // A bound identifier shadows the primitive table.
        let t = parse("\\add:Real. add", &table()).unwrap();
        assert_eq!(t, Term::lam("add", SimpleType::Real, Term::var("add")));
    }

    #[test]
    fn malformed_projection_is_a_syntax_error() {
        let e = parse("fst 3.0 4.0", &table()).unwrap_err();
        assert!(e.message.contains("fst"), "{e}");
        assert_eq!((e.line, e.col), (1, 5));
    }

    #[test]
    fn pairs_and_projections() {
        let t = parse("fst(<1.0, 2.0>)", &table()).unwrap();
        assert_eq!(t, Term::fst(Term::pair(Term::Const(1.0), Term::Const(2.0))));
    }

    #[test]
    fn negative_literals_and_types() {
        let t = parse("<-2.5, 1e-3>", &table()).unwrap();
        assert_eq!(t, Term::pair(Term::Const(-2.5), Term::Const(0.001)));
        let ty = parse_type("(Real -> Real) * Real -> Real").unwrap();
        assert_eq!(
            ty,
            SimpleType::arrow(
                SimpleType::prod(
                    SimpleType::arrow(SimpleType::Real, SimpleType::Real),
                    SimpleType::Real
                ),
                SimpleType::Real
            )
        );
    }

    #[test]
    fn errors_carry_locations() {
        let e = parse("\\x:Real x", &table()).unwrap_err();
        assert_eq!(e.line, 1);
        assert!(e.col > 1);
        let e = parse("(1.0", &table()).unwrap_err();
        assert!(e.message.contains(")"));
    }

    #[test]
    fn round_trip_through_pretty_printer() {
        let sources = [
            "\\f:(Real -> Real) -> Real. f (\\x:Real. 1.0)",
            "\\x:Real. sin(sin(x))",
            "fst(<1.0, <2.0, 3.0>>)",
            "let y be add(x) in diff(f y, f x)",
            "\\p:Real * Real. mul(fst(p), snd(p))",
        ];
        for src in sources {
            let t1 = parse(src, &table()).unwrap();
            let t2 = parse(&t1.to_string(), &table()).unwrap();
            assert_eq!(t1, t2, "round trip changed `{src}`");
        }
    }
}
