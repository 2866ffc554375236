//! An independent derivation checker for alpha-equivalence: the axiom
//! `phi = phi` plus congruence rules for the connectives and the binder
//! rule that compares bodies after substituting a fresh variable. Used
//! as the oracle against which the nameless-key decision is validated.

use crate::formula::{substitute_safe, FKind, Formula, Substitution, Var};

fn fresh_for(a: &Formula, b: &Formula, n: u64) -> Var {
    let mut k = n;
    loop {
        let cand = Var::new(&format!("fresh'{}", k));
        let used = |f: &Formula| {
            f.fv().iter().any(|v| *v == cand) || f.bv().iter().any(|v| *v == cand)
        };
        if !used(a) && !used(b) {
            return cand;
        }
        k += 1;
    }
}

/// Derivability of `a = b` in the alpha-equivalence calculus.
pub fn derivable(a: &Formula, b: &Formula) -> bool {
    go(a, b, 0)
}

fn go(a: &Formula, b: &Formula, depth: u64) -> bool {
    if a == b {
        return true; // axiom
    }
    match (a.kind(), b.kind()) {
        (FKind::And(a0, a1), FKind::And(b0, b1))
        | (FKind::Or(a0, a1), FKind::Or(b0, b1)) => {
            go(a0, b0, depth) && go(a1, b1, depth)
        }
        (FKind::Dia(a0), FKind::Dia(b0)) | (FKind::Box(a0), FKind::Box(b0)) => {
            go(a0, b0, depth)
        }
        (FKind::Fix(e0, x0, f0), FKind::Fix(e1, x1, f1)) => {
            if e0 != e1 {
                return false;
            }
            let z = fresh_for(a, b, depth);
            let s0 = substitute_safe(f0, &Substitution::single(x0.clone(), Formula::var(z.clone())));
            let s1 = substitute_safe(f1, &Substitution::single(x1.clone(), Formula::var(z.clone())));
            match (s0, s1) {
                (Ok(s0), Ok(s1)) => go(&s0, &s1, depth + 1),
                _ => false,
            }
        }
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    #[test]
    fn rule_three() {
        assert!(derivable(&parse("mu x. <>x").unwrap(), &parse("mu y. <>y").unwrap()));
        assert!(!derivable(&parse("mu x. <>x").unwrap(), &parse("nu y. <>y").unwrap()));
    }

    #[test]
    fn congruence_rules() {
        let a = parse("(mu x. <>x) /\\ p").unwrap();
        let b = parse("(mu y. <>y) /\\ p").unwrap();
        assert!(derivable(&a, &b));
        assert!(!derivable(&a, &parse("(mu y. <>y) \\/ p").unwrap()));
    }
}
