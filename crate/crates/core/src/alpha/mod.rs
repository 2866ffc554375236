//! Alpha-equivalence: decision via canonical nameless keys, the
//! polishing and skeletal renamings, and the renaming-invariant size
//! measures.

pub mod derive;

use crate::error::{Error, Result};
use crate::formula::{
    closure, substitute_safe, FKind, Formula, Parity, Substitution, Var,
};
use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::sync::OnceLock;

/// Canonical nameless encoding of a formula: free variables appear by
/// name, bound variables by binder distance. Two formulas get equal keys
/// exactly when they are alphabetic variants.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AlphaClassKey(pub String);

/// Computes the nameless key. Shared subtrees are memoized per call on
/// (node, visible bindings restricted to the node's free variables).
pub fn alpha_key(f: &Formula) -> AlphaClassKey {
    let mut memo: HashMap<(usize, Vec<(Var, usize)>), String> = HashMap::new();
    AlphaClassKey(key_rec(f, &mut Vec::new(), &mut memo))
}

fn key_rec(
    f: &Formula,
    env: &mut Vec<Var>,
    memo: &mut HashMap<(usize, Vec<(Var, usize)>), String>,
) -> String {
    // restriction of the environment to the node's free variables:
    // innermost binding position per variable
    let mut scope: Vec<(Var, usize)> = Vec::new();
    for v in f.fv().iter() {
        if let Some(pos) = env.iter().rposition(|x| x == v) {
            scope.push((v.clone(), env.len() - pos));
        }
    }
    let mkey = (f.ptr_id(), scope);
    if let Some(s) = memo.get(&mkey) {
        return s.clone();
    }
    let out = match f.kind() {
        FKind::Top => "T".to_string(),
        FKind::Bot => "F".to_string(),
        FKind::Lit(v, positive) => {
            let sign = if *positive { "" } else { "-" };
            match env.iter().rposition(|x| x == v) {
                Some(pos) => format!("{}b{}", sign, env.len() - pos),
                None => format!("{}f{};", sign, v.name()),
            }
        }
        FKind::And(a, b) => {
            format!("&({})({})", key_rec(a, env, memo), key_rec(b, env, memo))
        }
        FKind::Or(a, b) => {
            format!("|({})({})", key_rec(a, env, memo), key_rec(b, env, memo))
        }
        FKind::Dia(a) => format!("<{}", key_rec(a, env, memo)),
        FKind::Box(a) => format!("[{}", key_rec(a, env, memo)),
        FKind::Fix(eta, x, a) => {
            env.push(x.clone());
            let body = key_rec(a, env, memo);
            env.pop();
            let tag = match eta {
                Parity::Mu => "m",
                Parity::Nu => "n",
            };
            format!("{}.{}", tag, body)
        }
    };
    memo.insert(mkey, out.clone());
    out
}

/// Decides alpha-equivalence through the canonical keys.
pub fn alpha_eq(a: &Formula, b: &Formula) -> bool {
    if a == b {
        return true;
    }
    if a.len() != b.len() || a.fdep() != b.fdep() || a.fv() != b.fv() {
        return false;
    }
    alpha_key(a) == alpha_key(b)
}

/// The global class-variable allocator: maps alpha-class keys to
/// reserved variables, deterministically in first-come order within a
/// process. Class variables live in the `z#` namespace, which never
/// collides with user variables or free variables of any class member.
struct Allocator {
    map: Mutex<HashMap<(String, AlphaClassKey), u64>>,
    next: AtomicU64,
}

static POLISH_ALLOC: OnceLock<Allocator> = OnceLock::new();
static SKEL_ALLOC: OnceLock<Allocator> = OnceLock::new();

fn allocator(which: &'static OnceLock<Allocator>) -> &'static Allocator {
    which.get_or_init(|| Allocator {
        map: Mutex::new(HashMap::new()),
        next: AtomicU64::new(0),
    })
}

fn class_var(
    which: &'static OnceLock<Allocator>,
    prefix: &str,
    key: &AlphaClassKey,
    avoid_fv: &Formula,
) -> Var {
    let alloc = allocator(which);
    let mut map = alloc.map.lock().expect("allocator lock");
    // bucket by free-variable fingerprint so the class variable is never
    // free in any member of the class
    let fv_tag: String = avoid_fv
        .fv()
        .iter()
        .map(|v| v.name())
        .collect::<Vec<_>>()
        .join(",");
    let k = map
        .entry((fv_tag, key.clone()))
        .or_insert_with(|| alloc.next.fetch_add(1, Ordering::SeqCst));
    Var::new(&format!("{}{}", prefix, k))
}

fn ensure_unreserved(xi: &Formula) -> Result<()> {
    for v in xi.fv().iter().chain(xi.bv().iter()) {
        if v.is_reserved() {
            return Err(Error::ReservedVariable(v.name().to_string()));
        }
    }
    Ok(())
}

/// The polishing map: renames every binder to the class variable of its
/// alpha-class. The output is clean, polished, alpha-equivalent to the
/// input, and canonical: two inputs are alpha-equivalent exactly when
/// their polishings are syntactically equal.
pub fn polish(xi: &Formula) -> Result<Formula> {
    ensure_unreserved(xi)?;
    let mut memo: HashMap<usize, Formula> = HashMap::new();
    polish_rec(xi, &mut memo)
}

fn polish_rec(f: &Formula, memo: &mut HashMap<usize, Formula>) -> Result<Formula> {
    if let Some(g) = memo.get(&f.ptr_id()) {
        return Ok(g.clone());
    }
    let out = match f.kind() {
        FKind::Top | FKind::Bot | FKind::Lit(..) => f.clone(),
        FKind::And(a, b) => Formula::and(polish_rec(a, memo)?, polish_rec(b, memo)?),
        FKind::Or(a, b) => Formula::or(polish_rec(a, memo)?, polish_rec(b, memo)?),
        FKind::Dia(a) => Formula::dia(polish_rec(a, memo)?),
        FKind::Box(a) => Formula::boxm(polish_rec(a, memo)?),
        FKind::Fix(eta, x, body) => {
            let key = alpha_key(f);
            let z = class_var(&POLISH_ALLOC, "z#", &key, f);
            let renamed =
                substitute_safe(body, &Substitution::single(x.clone(), Formula::var(z.clone())))?;
            let inner = polish_rec(&renamed, memo)?;
            Formula::fix(*eta, z, inner)?
        }
    };
    memo.insert(f.ptr_id(), out.clone());
    Ok(out)
}

/// A set of formulas is polished when alpha-equivalence is the identity
/// on the union of their subformulas.
pub fn is_polished(fs: &[Formula]) -> bool {
    let mut by_key: HashMap<AlphaClassKey, Formula> = HashMap::new();
    for f in fs {
        for s in f.subformulas().iter() {
            let k = alpha_key(s);
            if let Some(other) = by_key.get(&k) {
                if other != s {
                    return false;
                }
            } else {
                by_key.insert(k, s.clone());
            }
        }
    }
    true
}

/// The placeholder variable of skeletons.
fn placeholder() -> Var {
    Var::new("s#")
}

/// The skeleton of a formula relative to a variable set: subformulas
/// whose free variables avoid the set collapse to the placeholder.
pub fn skeleton(f: &Formula, vars: &[Var]) -> Formula {
    let mut memo: HashMap<(usize, Vec<Var>), Formula> = HashMap::new();
    sk_rec(f, &vars.iter().cloned().collect::<Vec<_>>(), &mut memo)
}

fn sk_rec(f: &Formula, u: &[Var], memo: &mut HashMap<(usize, Vec<Var>), Formula>) -> Formula {
    let relevant: Vec<Var> =
        u.iter().filter(|v| f.fv().iter().any(|w| w == *v)).cloned().collect();
    if relevant.is_empty() {
        return Formula::var(placeholder());
    }
    let key = (f.ptr_id(), relevant.clone());
    if let Some(g) = memo.get(&key) {
        return g.clone();
    }
    let out = match f.kind() {
        FKind::Lit(v, positive) => Formula::lit(v.clone(), *positive),
        FKind::And(a, b) => Formula::and(sk_rec(a, u, memo), sk_rec(b, u, memo)),
        FKind::Or(a, b) => Formula::or(sk_rec(a, u, memo), sk_rec(b, u, memo)),
        FKind::Dia(a) => Formula::dia(sk_rec(a, u, memo)),
        FKind::Box(a) => Formula::boxm(sk_rec(a, u, memo)),
        FKind::Fix(eta, z, a) => {
            let mut u2: Vec<Var> = u.to_vec();
            if !u2.contains(z) {
                u2.push(z.clone());
                u2.sort();
            }
            Formula::fix(*eta, z.clone(), sk_rec(a, &u2, memo))
                .expect("skeleton preserves positivity")
        }
        FKind::Top | FKind::Bot => unreachable!("atoms have no free variables"),
    };
    memo.insert(key, out.clone());
    out
}

/// The skeletal renaming: binders are renamed to the class variable of
/// their skeleton's alpha-class. On the closure of the output,
/// alpha-equivalence coincides with syntactic identity.
pub fn skeletal_rename(xi: &Formula) -> Result<Formula> {
    ensure_unreserved(xi)?;
    let mut memo: HashMap<usize, Formula> = HashMap::new();
    sk_rename_rec(xi, &mut memo)
}

fn sk_rename_rec(f: &Formula, memo: &mut HashMap<usize, Formula>) -> Result<Formula> {
    if let Some(g) = memo.get(&f.ptr_id()) {
        return Ok(g.clone());
    }
    let out = match f.kind() {
        FKind::Top | FKind::Bot | FKind::Lit(..) => f.clone(),
        FKind::And(a, b) => Formula::and(sk_rename_rec(a, memo)?, sk_rename_rec(b, memo)?),
        FKind::Or(a, b) => Formula::or(sk_rename_rec(a, memo)?, sk_rename_rec(b, memo)?),
        FKind::Dia(a) => Formula::dia(sk_rename_rec(a, memo)?),
        FKind::Box(a) => Formula::boxm(sk_rename_rec(a, memo)?),
        FKind::Fix(eta, x, body) => {
            let sk_body = skeleton(body, std::slice::from_ref(x));
            let sk_fix = Formula::fix(*eta, x.clone(), sk_body)?;
            let key = alpha_key(&sk_fix);
            let z = class_var(&SKEL_ALLOC, "w#", &key, &sk_fix);
            let inner = sk_rename_rec(body, memo)?;
            let renamed = substitute_safe(
                &inner,
                &Substitution::single(x.clone(), Formula::var(z.clone())),
            )?;
            Formula::fix(*eta, z, renamed)?
        }
    };
    memo.insert(f.ptr_id(), out.clone());
    Ok(out)
}

/// A set of formulas is skeletal when two binders get the same variable
/// exactly if their skeletonized fixpoints are alpha-equivalent.
pub fn is_skeletal(fs: &[Formula]) -> bool {
    let mut seen: Vec<(Var, AlphaClassKey)> = Vec::new();
    for f in fs {
        for s in f.subformulas().iter() {
            if let FKind::Fix(eta, x, body) = s.kind() {
                let sk = Formula::fix(*eta, x.clone(), skeleton(body, std::slice::from_ref(x)))
                    .expect("skeleton positivity");
                let key = alpha_key(&sk);
                for (y, other) in &seen {
                    let same_var = y == x;
                    let same_key = *other == key;
                    if same_var != same_key {
                        return false;
                    }
                }
                seen.push((x.clone(), key));
            }
        }
    }
    true
}

/// Renaming-invariant sizes: the subformula count of the polishing and
/// the closure size of the skeletal renaming.
pub fn size_alpha(xi: &Formula) -> Result<(usize, usize)> {
    let ssz_a = crate::formula::ssz(&polish(xi)?);
    let csz_a = closure(&skeletal_rename(xi)?)?.len();
    Ok((ssz_a, csz_a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    #[test]
    fn alpha_eq_rename() {
        let a = parse("mu x. <>x").unwrap();
        let b = parse("mu y. <>y").unwrap();
        assert!(alpha_eq(&a, &b));
        assert!(!alpha_eq(&a, &parse("nu y. <>y").unwrap()));
    }

    #[test]
    fn alpha_distinguishes_free_variables() {
        assert!(!alpha_eq(&parse("p").unwrap(), &parse("q").unwrap()));
        // bound vs free occurrences
        let a = parse("mu x. p \\/ x").unwrap();
        let b = parse("mu y. p \\/ y").unwrap();
        let c = parse("mu y. p \\/ p").unwrap();
        assert!(alpha_eq(&a, &b));
        assert!(!alpha_eq(&a, &c));
    }

    #[test]
    fn chains_with_shared_and_distinct_variables_are_alpha_equal() {
        // chi_n doubles a shared nu x. []x; the variant uses distinct vars
        let chi0 = parse("nu x. []x").unwrap();
        let mut chi = chi0.clone();
        let mut distinct = parse("nu y'1. []y'1").unwrap();
        let mut k = 2;
        for _ in 0..3 {
            chi = Formula::and(chi.clone(), chi.clone());
            let left = distinct.clone();
            let right = crate::formula::rename_bound_vars(
                &distinct,
                &distinct
                    .bv()
                    .iter()
                    .map(|x| {
                        let n = {
                            k += 1;
                            k
                        };
                        (x.clone(), Var::with_index("y", n))
                    })
                    .collect(),
            );
            distinct = Formula::and(left, right);
        }
        assert!(alpha_eq(&chi, &distinct));
        assert_eq!(chi.len(), distinct.len());
    }

    #[test]
    fn polish_is_clean_polished_and_canonical() {
        let a = parse("mu x. <>x /\\ mu y. <>y").unwrap();
        let p = polish(&a).unwrap();
        assert!(p.is_clean());
        assert!(is_polished(std::slice::from_ref(&p)));
        assert!(alpha_eq(&a, &p));
        // both binders are in one class: same class variable
        let binders: Vec<Var> = p.bv().iter().cloned().collect();
        assert_eq!(binders.len(), 1);

        let b = parse("mu u. <>u /\\ mu w. <>w").unwrap();
        assert_eq!(p, polish(&b).unwrap());
        let c = parse("mu u. <>u /\\ nu w. <>w").unwrap();
        assert_ne!(p, polish(&c).unwrap());
    }

    #[test]
    fn skeleton_examples() {
        // sk_x(p \/ <>x) = s \/ <>x
        let f = parse("p \\/ <>x").unwrap();
        let sk = skeleton(&f, &[Var::new("x")]);
        assert_eq!(
            sk,
            Formula::or(
                Formula::var(placeholder()),
                Formula::dia(Formula::var(Var::new("x")))
            )
        );
        // sk_x((p \/ mu z.(q /\ []z)) /\ mu y.((q \/ <>y) \/ []x))
        //   = s /\ mu y.((s \/ <>y) \/ []x)
        let g = parse("(p \\/ mu z. (q /\\ []z)) /\\ mu y. ((q \\/ <>y) \\/ []x)").unwrap();
        let skg = skeleton(&g, &[Var::new("x")]);
        let expect = Formula::and(
            Formula::var(placeholder()),
            Formula::mu(
                Var::new("y"),
                Formula::or(
                    Formula::or(
                        Formula::var(placeholder()),
                        Formula::dia(Formula::var(Var::new("y"))),
                    ),
                    Formula::boxm(Formula::var(Var::new("x"))),
                ),
            )
            .unwrap(),
        );
        assert_eq!(skg, expect);
        // adding a variable that is not free changes nothing
        let sk2 = skeleton(&f, &[Var::new("x"), Var::new("w")]);
        assert_eq!(sk, sk2);
    }

    #[test]
    fn skeletal_rename_reuses_class_variables() {
        // nu y. <>((mu x. nu z. <>(x /\ z)) /\ y): both nu-binders share a
        // skeleton class
        let f = parse("nu y. <>((mu x. nu z. <>(x /\\ z)) /\\ y)").unwrap();
        let r = skeletal_rename(&f).unwrap();
        assert!(alpha_eq(&f, &r));
        assert!(r.is_tidy());
        assert!(is_skeletal(std::slice::from_ref(&r)));
        let bound: Vec<Var> = r.bv().iter().cloned().collect();
        // three binders, two distinct variables
        assert_eq!(bound.len(), 2);
        // closure of the renaming has no distinct alpha-equivalent pair
        let g = closure(&r).unwrap();
        for a in g.nodes() {
            for b in g.nodes() {
                if alpha_eq(a, b) {
                    assert_eq!(a, b);
                }
            }
        }
    }

    #[test]
    fn size_alpha_orders() {
        for s in [
            "mu x. <>x",
            "nu y. (q /\\ [](p \\/ y))",
            "<>p /\\ mu p. (q \\/ <>p)",
        ] {
            let f = parse(s).unwrap();
            let (ssz_a, csz_a) = size_alpha(&f).unwrap();
            assert!(csz_a <= ssz_a);
            assert!((ssz_a as u64) <= f.len());
        }
    }
}
