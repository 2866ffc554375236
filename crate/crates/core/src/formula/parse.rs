//! Concrete grammar:
//!
//! ```text
//! formula := or
//! or      := and ( "\/" or )?          (right associative)
//! and     := prim ( "/\" and )?        (right associative, binds tighter)
//! prim    := "true" | "false" | "~" ident | ident
//!          | "<>" prim | "[]" prim
//!          | ("mu" | "nu") ident "." formula
//!          | "(" formula ")"
//! ```
//!
//! Binder scope extends maximally to the right (dot notation). N-ary
//! chains of the same connective desugar right-associatively. Identifiers
//! may carry prime suffixes (`x'3`); names containing `#` are reserved
//! for internal use and rejected.

use super::{Formula, Parity, Var};
use crate::error::{Error, Result};

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
    col: usize,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Neg,
    And,
    Or,
    Dia,
    Box,
    Dot,
    LPar,
    RPar,
    Eof,
}

struct SpannedTok {
    tok: Tok,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src, pos: 0, line: 1, col: 1 }
    }

    fn bump(&mut self, n: usize) {
        for c in self.src[self.pos..self.pos + n].chars() {
            if c == '\n' {
                self.line += 1;
                self.col = 1;
            } else {
                self.col += 1;
            }
        }
        self.pos += n;
    }

    fn next(&mut self) -> Result<SpannedTok> {
        loop {
            let rest = &self.src[self.pos..];
            let ws = rest.len() - rest.trim_start().len();
            if ws > 0 {
                self.bump(ws);
                continue;
            }
            break;
        }
        let (line, col) = (self.line, self.col);
        let rest = &self.src[self.pos..];
        let mk = |tok| SpannedTok { tok, line, col };
        if rest.is_empty() {
            return Ok(mk(Tok::Eof));
        }
        for (pat, tok) in [
            ("/\\", Tok::And),
            ("\\/", Tok::Or),
            ("<>", Tok::Dia),
            ("[]", Tok::Box),
            ("~", Tok::Neg),
            (".", Tok::Dot),
            ("(", Tok::LPar),
            (")", Tok::RPar),
        ] {
            if rest.starts_with(pat) {
                self.bump(pat.len());
                return Ok(mk(tok));
            }
        }
        let c = rest.chars().next().unwrap();
        if c.is_ascii_alphabetic() || c == '_' {
            let end = rest
                .char_indices()
                .find(|(_, c)| !(c.is_ascii_alphanumeric() || *c == '_' || *c == '\''))
                .map(|(i, _)| i)
                .unwrap_or(rest.len());
            let word = rest[..end].to_string();
            self.bump(end);
            return Ok(mk(Tok::Ident(word)));
        }
        Err(Error::Syntax { line, col, msg: format!("unexpected character {:?}", c) })
    }
}

struct Parser {
    toks: Vec<SpannedTok>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &SpannedTok {
        &self.toks[self.at.min(self.toks.len() - 1)]
    }

    fn advance(&mut self) -> &SpannedTok {
        let t = &self.toks[self.at.min(self.toks.len() - 1)];
        if self.at < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn err(&self, msg: &str) -> Error {
        let t = self.peek();
        Error::Syntax { line: t.line, col: t.col, msg: msg.to_string() }
    }

    fn formula(&mut self) -> Result<Formula> {
        self.or_expr()
    }

    fn or_expr(&mut self) -> Result<Formula> {
        let left = self.and_expr()?;
        if self.peek().tok == Tok::Or {
            self.advance();
            let right = self.or_expr()?;
            Ok(Formula::or(left, right))
        } else {
            Ok(left)
        }
    }

    fn and_expr(&mut self) -> Result<Formula> {
        let left = self.prim()?;
        if self.peek().tok == Tok::And {
            self.advance();
            let right = self.and_expr()?;
            Ok(Formula::and(left, right))
        } else {
            Ok(left)
        }
    }

    fn ident(&mut self) -> Result<Var> {
        let (line, col) = (self.peek().line, self.peek().col);
        match self.advance().tok.clone() {
            Tok::Ident(name) => {
                if name.contains('#') {
                    return Err(Error::ReservedVariable(name));
                }
                Ok(Var::new(&name))
            }
            _ => Err(Error::Syntax { line, col, msg: "expected a variable name".into() }),
        }
    }

    fn prim(&mut self) -> Result<Formula> {
        let tok = self.peek().tok.clone();
        match tok {
            Tok::Ident(ref w) if w == "true" => {
                self.advance();
                Ok(Formula::top())
            }
            Tok::Ident(ref w) if w == "false" => {
                self.advance();
                Ok(Formula::bot())
            }
            Tok::Ident(ref w) if w == "mu" || w == "nu" => {
                let eta = if w == "mu" { Parity::Mu } else { Parity::Nu };
                self.advance();
                let x = self.ident()?;
                if self.peek().tok != Tok::Dot {
                    return Err(self.err("expected '.' after binder variable"));
                }
                self.advance();
                let body = self.formula()?;
                Formula::fix(eta, x, body)
            }
            Tok::Ident(_) => {
                let x = self.ident()?;
                Ok(Formula::var(x))
            }
            Tok::Neg => {
                self.advance();
                let x = self.ident()?;
                Ok(Formula::lit(x, false))
            }
            Tok::Dia => {
                self.advance();
                Ok(Formula::dia(self.prim()?))
            }
            Tok::Box => {
                self.advance();
                Ok(Formula::boxm(self.prim()?))
            }
            Tok::LPar => {
                self.advance();
                let f = self.formula()?;
                if self.peek().tok != Tok::RPar {
                    return Err(self.err("expected ')'"));
                }
                self.advance();
                Ok(f)
            }
            _ => Err(self.err("expected a formula")),
        }
    }
}

/// Parses the concrete syntax into a formula; rejects non-positive
/// fixpoint bodies and reserved variable names.
pub fn parse(text: &str) -> Result<Formula> {
    let mut lex = Lexer::new(text);
    let mut toks = Vec::new();
    loop {
        let t = lex.next()?;
        let eof = t.tok == Tok::Eof;
        toks.push(t);
        if eof {
            break;
        }
    }
    let mut p = Parser { toks, at: 0 };
    let f = p.formula()?;
    if p.peek().tok != Tok::Eof {
        return Err(p.err("trailing input after formula"));
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::super::print;
    use super::*;

    #[test]
    fn parses_spec_examples() {
        let f = parse("mu x. ~p \\/ <> x").unwrap();
        let g = Formula::mu(
            Var::new("x"),
            Formula::or(
                Formula::lit(Var::new("p"), false),
                Formula::dia(Formula::var(Var::new("x"))),
            ),
        )
        .unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn binder_scope_is_maximal() {
        let f = parse("mu x. p /\\ <>x").unwrap();
        let (_, _, body) = f.as_fixpoint().unwrap();
        // body is the whole conjunction
        assert!(matches!(body.kind(), super::super::FKind::And(..)));
    }

    #[test]
    fn nary_desugars_right() {
        let f = parse("p \\/ q \\/ r").unwrap();
        let g = parse("p \\/ (q \\/ r)").unwrap();
        let h = parse("(p \\/ q) \\/ r").unwrap();
        assert_eq!(f, g);
        assert_ne!(f, h);
    }

    #[test]
    fn rejects_unpositive_binder() {
        let e = parse("mu x. ~x").unwrap_err();
        assert!(matches!(e, Error::Positivity { .. }));
    }

    #[test]
    fn rejects_reserved_names() {
        assert!(parse("mu x. p").is_ok());
        assert!(matches!(parse("z#1").unwrap_err(), Error::ReservedVariable(_)));
    }

    #[test]
    fn syntax_error_has_position() {
        match parse("mu x <>x").unwrap_err() {
            Error::Syntax { line, col, .. } => {
                assert_eq!(line, 1);
                assert!(col > 1);
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn roundtrip() {
        for s in [
            "true",
            "false",
            "~p",
            "mu x. (~p \\/ <>x)",
            "nu y. (q /\\ [](p \\/ y))",
            "mu x. nu y. mu z. ((x \\/ y \\/ z) /\\ [] (x \\/ y \\/ z))",
        ] {
            let f = parse(s).unwrap();
            assert_eq!(parse(&print(&f)).unwrap(), f);
        }
    }
}
