//! Substitution, unfolding, tidying and the Kozen expansion map.

use super::{
    print, varset_contains, FKind, Formula, HashKey, Parity, Var,
};
use crate::error::{Error, Result};
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

/// A simultaneous substitution: a finite map from variables to formulas.
/// Domain variables are pairwise distinct by construction.
#[derive(Debug, Clone, Default)]
pub struct Substitution {
    map: BTreeMap<Var, Formula>,
}

impl Substitution {
    pub fn new() -> Substitution {
        Substitution { map: BTreeMap::new() }
    }

    pub fn single(x: Var, f: Formula) -> Substitution {
        let mut s = Substitution::new();
        s.insert(x, f);
        s
    }

    pub fn insert(&mut self, x: Var, f: Formula) {
        self.map.insert(x, f);
    }

    pub fn get(&self, x: &Var) -> Option<&Formula> {
        self.map.get(x)
    }

    pub fn domain(&self) -> impl Iterator<Item = &Var> {
        self.map.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Formula)> {
        self.map.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// If some free occurrence of `x` in `phi` lies under a binder that
/// captures a free variable of `psi`, returns that binder's variable.
fn capturing_binder(phi: &Formula, x: &Var, psi: &Formula) -> Option<Var> {
    if !varset_contains(phi.fv(), x) {
        return None;
    }
    match phi.kind() {
        FKind::Top | FKind::Bot | FKind::Lit(..) => None,
        FKind::And(a, b) | FKind::Or(a, b) => {
            capturing_binder(a, x, psi).or_else(|| capturing_binder(b, x, psi))
        }
        FKind::Dia(a) | FKind::Box(a) => capturing_binder(a, x, psi),
        FKind::Fix(_, y, a) => {
            // x free in phi, so y != x and x is free in a.
            if varset_contains(psi.fv(), y) {
                Some(y.clone())
            } else {
                capturing_binder(a, x, psi)
            }
        }
    }
}

/// `psi` is free for `x` in `phi`: `phi` is positive in `x` and no free
/// occurrence of `x` sits in the scope of a binder on a free variable
/// of `psi`.
pub fn free_for(psi: &Formula, x: &Var, phi: &Formula) -> bool {
    phi.positive_in(x) && capturing_binder(phi, x, psi).is_none()
}

/// Simultaneous substitution without renaming. Preconditions: `phi` is
/// positive in every domain variable and each image is free for its
/// variable in `phi`; violations are reported as errors.
pub fn substitute_safe(phi: &Formula, sigma: &Substitution) -> Result<Formula> {
    for (z, psi) in sigma.iter() {
        if !phi.positive_in(z) {
            return Err(Error::NotPositive { fml: print(phi), var: z.name().to_string() });
        }
        if let Some(binder) = capturing_binder(phi, z, psi) {
            return Err(Error::FreeFor {
                var: z.name().to_string(),
                binder: binder.name().to_string(),
            });
        }
    }
    let mut memo: HashMap<(usize, Vec<Var>), Formula> = HashMap::new();
    let active: BTreeSet<Var> = sigma.domain().cloned().collect();
    Ok(apply(phi, sigma, &active, &mut memo))
}

fn apply(
    phi: &Formula,
    sigma: &Substitution,
    active: &BTreeSet<Var>,
    memo: &mut HashMap<(usize, Vec<Var>), Formula>,
) -> Formula {
    // Only active variables that actually occur matter.
    let relevant: Vec<Var> =
        active.iter().filter(|z| varset_contains(phi.fv(), z)).cloned().collect();
    if relevant.is_empty() {
        return phi.clone();
    }
    let key = (phi.ptr_id(), relevant.clone());
    if let Some(f) = memo.get(&key) {
        return f.clone();
    }
    let res = match phi.kind() {
        FKind::Top | FKind::Bot => phi.clone(),
        FKind::Lit(v, positive) => {
            if *positive && active.contains(v) {
                if let Some(img) = sigma.get(v) {
                    img.clone()
                } else {
                    phi.clone()
                }
            } else {
                // A negated literal in the domain is excluded by the
                // positivity precondition.
                phi.clone()
            }
        }
        FKind::And(a, b) => Formula::and(apply(a, sigma, active, memo), apply(b, sigma, active, memo)),
        FKind::Or(a, b) => Formula::or(apply(a, sigma, active, memo), apply(b, sigma, active, memo)),
        FKind::Dia(a) => Formula::dia(apply(a, sigma, active, memo)),
        FKind::Box(a) => Formula::boxm(apply(a, sigma, active, memo)),
        FKind::Fix(eta, y, a) => {
            let mut inner = active.clone();
            inner.remove(y);
            let body = apply(a, sigma, &inner, memo);
            Formula::fix(*eta, y.clone(), body).expect("positivity preserved by substitution")
        }
    };
    memo.insert(key, res.clone());
    res
}

/// Largest prime-suffix index occurring among the variables of `f`.
fn max_index(f: &Formula) -> u64 {
    f.fv()
        .iter()
        .chain(f.bv().iter())
        .map(|v| v.index().1)
        .max()
        .unwrap_or(0)
}

/// Renames every binding and bound occurrence in `phi`, shifting each
/// bound name's prime index up by `n`.
fn shift_bound(phi: &Formula, n: u64) -> Formula {
    let renaming: BTreeMap<Var, Var> = phi
        .bv()
        .iter()
        .map(|x| {
            let (base, k) = x.index();
            (x.clone(), Var::with_index(&base, k + n))
        })
        .collect();
    rename_bound(phi, &renaming)
}

/// Applies a bound-variable renaming: every binder on `x` and every
/// occurrence bound by it is renamed to `rho(x)`; free occurrences are
/// untouched.
pub(crate) fn rename_bound(phi: &Formula, rho: &BTreeMap<Var, Var>) -> Formula {
    fn go(phi: &Formula, rho: &BTreeMap<Var, Var>, bound_here: &BTreeSet<Var>) -> Formula {
        match phi.kind() {
            FKind::Top | FKind::Bot => phi.clone(),
            FKind::Lit(v, positive) => {
                if bound_here.contains(v) {
                    Formula::lit(rho[v].clone(), *positive)
                } else {
                    phi.clone()
                }
            }
            FKind::And(a, b) => Formula::and(go(a, rho, bound_here), go(b, rho, bound_here)),
            FKind::Or(a, b) => Formula::or(go(a, rho, bound_here), go(b, rho, bound_here)),
            FKind::Dia(a) => Formula::dia(go(a, rho, bound_here)),
            FKind::Box(a) => Formula::boxm(go(a, rho, bound_here)),
            FKind::Fix(eta, y, a) => {
                if let Some(y2) = rho.get(y) {
                    let mut inner = bound_here.clone();
                    inner.insert(y.clone());
                    Formula::fix(*eta, y2.clone(), go(a, rho, &inner))
                        .expect("renaming preserves positivity")
                } else {
                    let mut inner = bound_here.clone();
                    inner.remove(y);
                    Formula::fix(*eta, y.clone(), go(a, rho, &inner))
                        .expect("renaming preserves positivity")
                }
            }
        }
    }
    go(phi, rho, &BTreeSet::new())
}

/// Capture-avoiding single substitution `phi[psi/x]`.
///
/// When `psi` is free for `x` in `phi` this is `substitute_safe`;
/// otherwise the bound variables of `phi` are first shifted past the
/// largest prime index occurring in `phi` or `psi`, which makes the
/// plain substitution applicable. Only positivity can fail.
pub fn substitute(phi: &Formula, psi: &Formula, x: &Var) -> Result<Formula> {
    if !phi.positive_in(x) {
        return Err(Error::NotPositive { fml: print(phi), var: x.name().to_string() });
    }
    let sigma = Substitution::single(x.clone(), psi.clone());
    if free_for(psi, x, phi) {
        substitute_safe(phi, &sigma)
    } else {
        let n = 1 + max_index(phi).max(max_index(psi));
        let renamed = shift_bound(phi, n);
        substitute_safe(&renamed, &sigma)
    }
}

/// Unfolds a tidy fixpoint formula `eta x. chi` into `chi[eta x. chi/x]`.
pub fn unfold(phi: &Formula) -> Result<Formula> {
    let (_, x, body) = phi
        .as_fixpoint()
        .ok_or_else(|| Error::NotFixpoint(print(phi)))?;
    phi.check_tidy()?;
    substitute_safe(body, &Substitution::single(x.clone(), phi.clone()))
}

/// Produces a tidy variant by consistently renaming each bound variable
/// that also occurs free; length is preserved and the result is an
/// alphabetic variant of the input.
pub fn tidy_variant(phi: &Formula) -> Formula {
    let conflicts: Vec<Var> = phi
        .bv()
        .iter()
        .filter(|x| varset_contains(phi.fv(), x))
        .cloned()
        .collect();
    if conflicts.is_empty() {
        return phi.clone();
    }
    let mut next = 1 + max_index(phi);
    let mut rho = BTreeMap::new();
    for x in conflicts {
        let (base, _) = x.index();
        // Never reuse a name present in the input.
        let mut cand = Var::with_index(&base, next);
        while varset_contains(phi.fv(), &cand) || varset_contains(phi.bv(), &cand) {
            next += 1;
            cand = Var::with_index(&base, next);
        }
        next += 1;
        rho.insert(x, cand);
    }
    rename_bound(phi, &rho)
}

/// The expansion map of a clean formula: substitutes each bound variable
/// by its binding fixpoint formula, in a dependency-compatible order.
pub fn expansion(xi: &Formula, phi: &Formula) -> Result<Formula> {
    let binders = xi.binders()?;
    if !phi.is_subformula_of(xi) {
        return Err(Error::NotSubformula(print(phi)));
    }
    let order = crate::alternation::dependency_order(xi)?.topological();
    let mut cur = phi.clone();
    for x in order {
        let (eta, delta) = binders.get(&x).expect("binder exists for bound variable").clone();
        let fix = Formula::fix(eta, x.clone(), delta)?;
        cur = substitute_safe(&cur, &Substitution::single(x.clone(), fix))?;
    }
    Ok(cur)
}

/// All subformulas of `phi` that are free subformulas: used by tests.
pub(crate) fn occurs_free_subformula(phi: &Formula, psi: &Formula) -> bool {
    let mut seen = HashSet::new();
    occurs_fs(phi, psi, &mut seen)
}

fn occurs_fs(phi: &Formula, psi: &Formula, seen: &mut HashSet<HashKey>) -> bool {
    if phi == psi {
        return true;
    }
    if !seen.insert(HashKey(phi.clone())) {
        return false;
    }
    match phi.kind() {
        FKind::Top | FKind::Bot | FKind::Lit(..) => false,
        FKind::And(a, b) | FKind::Or(a, b) => {
            occurs_fs(a, psi, seen) || occurs_fs(b, psi, seen)
        }
        FKind::Dia(a) | FKind::Box(a) => occurs_fs(a, psi, seen),
        FKind::Fix(_, _, a) => occurs_fs(a, psi, seen),
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    fn v(n: &str) -> Var {
        Var::new(n)
    }

    #[test]
    fn plain_substitution() {
        // (q \/ <>x)[p/q] = p \/ <>x
        let f = parse("q \\/ <>x").unwrap();
        let out = substitute_safe(&f, &Substitution::single(v("q"), parse("p").unwrap())).unwrap();
        assert_eq!(out, parse("p \\/ <>x").unwrap());
    }

    #[test]
    fn unfolding_base() {
        // x[eta x. chi / x] = eta x. chi for tidy eta x. chi
        let fix = parse("mu x. <>x").unwrap();
        let out =
            substitute_safe(&parse("x").unwrap(), &Substitution::single(v("x"), fix.clone()))
                .unwrap();
        assert_eq!(out, fix);
    }

    #[test]
    fn capture_is_rejected() {
        // (mu p. q \/ <>p)[p/q] captures p
        let f = parse("mu p. q \\/ <>p").unwrap();
        let err =
            substitute_safe(&f, &Substitution::single(v("q"), parse("p").unwrap())).unwrap_err();
        assert!(matches!(err, Error::FreeFor { .. }));
    }

    #[test]
    fn capture_avoiding_substitution_renames() {
        // (mu x'1. [](x'1 \/ x'5))[psi / x'5] with x'1 free in psi
        let phi = parse("mu x'1. [](x'1 \\/ x'5)").unwrap();
        let psi = parse("<>x'1").unwrap();
        let out = substitute(&phi, &psi, &v("x'5")).unwrap();
        // bound x'1 was shifted past max index 5
        let expected = parse("mu x'7. [](x'7 \\/ <>x'1)").unwrap();
        assert_eq!(out, expected);
    }

    #[test]
    fn substitute_equals_safe_when_free_for() {
        let phi = parse("mu x. p \\/ <>x").unwrap();
        let psi = parse("q /\\ q").unwrap();
        assert_eq!(
            substitute(&phi, &psi, &v("p")).unwrap(),
            substitute_safe(&phi, &Substitution::single(v("p"), psi)).unwrap()
        );
    }

    #[test]
    fn unfold_simple() {
        let f = parse("mu x. <>x").unwrap();
        assert_eq!(unfold(&f).unwrap(), parse("<>mu x. <>x").unwrap());
    }

    #[test]
    fn unfold_untidy_rejected() {
        // mu x. ~p /\ nu p. [](x \/ p) is untidy (p free and bound)
        let f = Formula::mu(
            v("x"),
            Formula::and(
                Formula::lit(v("p"), false),
                Formula::nu(
                    v("p"),
                    Formula::boxm(Formula::or(Formula::var(v("x")), Formula::var(v("p")))),
                )
                .unwrap(),
            ),
        )
        .unwrap();
        assert!(matches!(unfold(&f).unwrap_err(), Error::NotTidy(_)));
    }

    #[test]
    fn unfold_non_fixpoint_rejected() {
        assert!(matches!(unfold(&parse("p").unwrap()).unwrap_err(), Error::NotFixpoint(_)));
    }

    #[test]
    fn tidy_variant_examples() {
        let f = parse("mu x. <>x").unwrap();
        assert_eq!(tidy_variant(&f), f);

        // <>p /\ mu p.(q \/ <>p) -> <>p /\ mu p'.(q \/ <>p')
        let g = parse("<>p /\\ mu p. (q \\/ <>p)").unwrap();
        let t = tidy_variant(&g);
        assert!(t.is_tidy());
        assert_eq!(t.len(), g.len());
        assert_eq!(t, parse("<>p /\\ mu p'1. (q \\/ <>p'1)").unwrap());
    }

    #[test]
    fn commuting_substitutions() {
        // phi[chi/x][rho/y] = phi[rho/y][(chi[rho/y])/x] under the side
        // conditions: x free in phi, x not free in rho, chi free for x in
        // phi, rho free for y in phi[chi/x].
        let phi = parse("x /\\ []y").unwrap();
        let chi = parse("<>y").unwrap();
        let rho = parse("q \\/ q").unwrap();
        let (x, y) = (v("x"), v("y"));
        let lhs = substitute_safe(
            &substitute_safe(&phi, &Substitution::single(x.clone(), chi.clone())).unwrap(),
            &Substitution::single(y.clone(), rho.clone()),
        )
        .unwrap();
        let chi_rho = substitute_safe(&chi, &Substitution::single(y.clone(), rho.clone())).unwrap();
        let rhs = substitute_safe(
            &substitute_safe(&phi, &Substitution::single(y, rho)).unwrap(),
            &Substitution::single(x, chi_rho),
        )
        .unwrap();
        assert_eq!(lhs, rhs);
    }
}
