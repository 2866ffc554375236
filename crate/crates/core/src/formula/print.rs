//! Printing back into the concrete grammar. Binary connectives are
//! always parenthesised so that `parse(print(f))` returns `f` verbatim.

use super::{FKind, Formula};
use std::fmt::Write;

pub fn print(f: &Formula) -> String {
    let mut out = String::new();
    go(f, &mut out);
    out
}

fn go(f: &Formula, out: &mut String) {
    match f.kind() {
        FKind::Top => out.push_str("true"),
        FKind::Bot => out.push_str("false"),
        FKind::Lit(v, true) => out.push_str(v.name()),
        FKind::Lit(v, false) => {
            out.push('~');
            out.push_str(v.name());
        }
        FKind::And(a, b) => {
            out.push('(');
            go(a, out);
            out.push_str(" /\\ ");
            go(b, out);
            out.push(')');
        }
        FKind::Or(a, b) => {
            out.push('(');
            go(a, out);
            out.push_str(" \\/ ");
            go(b, out);
            out.push(')');
        }
        FKind::Dia(a) => {
            out.push_str("<>");
            go(a, out);
        }
        FKind::Box(a) => {
            out.push_str("[]");
            go(a, out);
        }
        FKind::Fix(eta, x, a) => {
            let _ = write!(out, "{} {}. ", eta, x);
            go(a, out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{parse, Formula, Var};
    use super::*;

    #[test]
    fn prints_examples() {
        let f = Formula::mu(
            Var::new("x"),
            Formula::or(
                Formula::lit(Var::new("p"), false),
                Formula::dia(Formula::var(Var::new("x"))),
            ),
        )
        .unwrap();
        assert_eq!(print(&f), "mu x. (~p \\/ <>x)");
        assert_eq!(print(&Formula::top()), "true");
    }

    #[test]
    fn print_parse_identity_on_nested() {
        let s = "mu x. nu y. mu z. ((x \\/ y \\/ z) /\\ [] (x \\/ y \\/ z))";
        let f = parse(s).unwrap();
        assert_eq!(parse(&print(&f)).unwrap(), f);
    }
}
