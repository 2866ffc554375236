//! The mu-calculus AST in negation normal form, with the syntactic
//! toolbox: variable analysis, substitution, unfolding, subformulas,
//! Fischer-Ladner closure and the Kozen expansion map.

mod closure;
mod parse;
mod print;
mod subst;

pub use closure::{closure, closure_set, is_free_subformula, ClosureGraph};
pub use parse::parse;
pub use print::print;
pub use subst::{
    expansion, free_for, substitute, substitute_safe, tidy_variant, unfold, Substitution,
};

/// Consistently renames bound variables (binders and their occurrences).
pub fn rename_bound_vars(
    f: &Formula,
    rho: &std::collections::BTreeMap<Var, Var>,
) -> Formula {
    subst::rename_bound(f, rho)
}

use crate::error::{Error, Result};
use std::collections::HashSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

/// Fixpoint parity: `Mu` is associated with odd priorities, `Nu` with even.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Mu,
    Nu,
}

impl Parity {
    pub fn opposite(self) -> Parity {
        match self {
            Parity::Mu => Parity::Nu,
            Parity::Nu => Parity::Mu,
        }
    }

    /// True when the number has this parity (odd for mu, even for nu).
    pub fn matches(self, n: u32) -> bool {
        match self {
            Parity::Mu => n % 2 == 1,
            Parity::Nu => n % 2 == 0,
        }
    }

    pub fn of_priority(n: u32) -> Parity {
        if n % 2 == 1 {
            Parity::Mu
        } else {
            Parity::Nu
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Parity::Mu => write!(f, "mu"),
            Parity::Nu => write!(f, "nu"),
        }
    }
}

/// An interned propositional variable name.
///
/// Equality is by name; the `Arc` only avoids repeated allocation.
#[derive(Debug, Clone)]
pub struct Var(Arc<str>);

impl Var {
    pub fn new(name: &str) -> Var {
        Var(Arc::from(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }

    /// Internal namespaces (placeholders, class variables, vertex
    /// variables) carry a `#` which the concrete grammar rejects.
    pub fn is_reserved(&self) -> bool {
        self.0.contains('#')
    }

    /// Splits a name of the form `base'k` into its base and index; a name
    /// without a prime suffix has index 0.
    pub fn index(&self) -> (String, u64) {
        if let Some(pos) = self.0.rfind('\'') {
            let (base, suf) = self.0.split_at(pos);
            if let Ok(k) = suf[1..].parse::<u64>() {
                return (base.to_string(), k);
            }
        }
        (self.0.to_string(), 0)
    }

    pub fn with_index(base: &str, k: u64) -> Var {
        if k == 0 {
            Var::new(base)
        } else {
            Var::new(&format!("{}'{}", base, k))
        }
    }
}

impl PartialEq for Var {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}
impl Eq for Var {}

impl PartialOrd for Var {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Var {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.as_ref().cmp(other.0.as_ref())
    }
}

impl Hash for Var {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.hash(state)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A sorted, deduplicated variable set shared between nodes.
pub type VarSet = Arc<[Var]>;

fn varset_empty() -> VarSet {
    Arc::from(Vec::new().into_boxed_slice())
}

fn varset_single(v: Var) -> VarSet {
    Arc::from(vec![v].into_boxed_slice())
}

pub(crate) fn varset_contains(s: &VarSet, v: &Var) -> bool {
    s.binary_search(v).is_ok()
}

pub(crate) fn varset_union(a: &VarSet, b: &VarSet) -> VarSet {
    if a.is_empty() {
        return b.clone();
    }
    if b.is_empty() {
        return a.clone();
    }
    let mut out: Vec<Var> = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i].clone());
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j].clone());
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push(a[i].clone());
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    Arc::from(out.into_boxed_slice())
}

pub(crate) fn varset_remove(a: &VarSet, v: &Var) -> VarSet {
    if !varset_contains(a, v) {
        return a.clone();
    }
    let out: Vec<Var> = a.iter().filter(|x| *x != v).cloned().collect();
    Arc::from(out.into_boxed_slice())
}

pub(crate) fn varset_disjoint(a: &VarSet, b: &VarSet) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return false,
        }
    }
    true
}

/// Node shapes of the NNF syntax tree.
#[derive(Debug, Clone)]
pub enum FKind {
    Top,
    Bot,
    /// `Lit(p, true)` is the literal `p`, `Lit(p, false)` is `~p`.
    Lit(Var, bool),
    And(Formula, Formula),
    Or(Formula, Formula),
    Dia(Formula),
    Box(Formula),
    Fix(Parity, Var, Formula),
}

#[derive(Debug)]
pub struct FNode {
    kind: FKind,
    hash: u64,
    len: u64,
    fdep: u32,
    /// Variables with a free positive occurrence.
    fv_pos: VarSet,
    /// Variables with a free negated occurrence.
    fv_neg: VarSet,
    /// All free variables (union of the two polarities).
    fv: VarSet,
    /// Bound variables.
    bv: VarSet,
}

/// An immutable mu-calculus formula.
///
/// Nodes are shared (`Arc`) so substitution reuses subtrees instead of
/// copying; every node caches its structural hash, length, fixpoint
/// depth and variable sets.
#[derive(Clone)]
pub struct Formula(Arc<FNode>);

fn mix(tag: u64, parts: &[u64]) -> u64 {
    // FNV-style mixing; collisions are resolved by deep comparison.
    let mut h: u64 = 0xcbf29ce484222325 ^ tag.wrapping_mul(0x9e3779b97f4a7c15);
    for p in parts {
        h ^= *p;
        h = h.wrapping_mul(0x100000001b3);
        h ^= h >> 29;
    }
    h
}

fn str_hash(s: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in s.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

impl Formula {
    fn make(kind: FKind) -> Formula {
        let (hash, len, fdep, fv_pos, fv_neg, bv) = match &kind {
            FKind::Top => (mix(1, &[]), 1, 0, varset_empty(), varset_empty(), varset_empty()),
            FKind::Bot => (mix(2, &[]), 1, 0, varset_empty(), varset_empty(), varset_empty()),
            FKind::Lit(v, true) => (
                mix(3, &[str_hash(v.name())]),
                1,
                0,
                varset_single(v.clone()),
                varset_empty(),
                varset_empty(),
            ),
            FKind::Lit(v, false) => (
                mix(4, &[str_hash(v.name())]),
                1,
                0,
                varset_empty(),
                varset_single(v.clone()),
                varset_empty(),
            ),
            FKind::And(a, b) => (
                mix(5, &[a.hash(), b.hash()]),
                a.len().saturating_add(b.len()),
                a.fdep().max(b.fdep()),
                varset_union(a.fv_pos(), b.fv_pos()),
                varset_union(a.fv_neg(), b.fv_neg()),
                varset_union(a.bv(), b.bv()),
            ),
            FKind::Or(a, b) => (
                mix(6, &[a.hash(), b.hash()]),
                a.len().saturating_add(b.len()),
                a.fdep().max(b.fdep()),
                varset_union(a.fv_pos(), b.fv_pos()),
                varset_union(a.fv_neg(), b.fv_neg()),
                varset_union(a.bv(), b.bv()),
            ),
            FKind::Dia(a) => (
                mix(7, &[a.hash()]),
                a.len().saturating_add(1),
                a.fdep(),
                a.fv_pos().clone(),
                a.fv_neg().clone(),
                a.bv().clone(),
            ),
            FKind::Box(a) => (
                mix(8, &[a.hash()]),
                a.len().saturating_add(1),
                a.fdep(),
                a.fv_pos().clone(),
                a.fv_neg().clone(),
                a.bv().clone(),
            ),
            FKind::Fix(eta, x, a) => {
                let tag = match eta {
                    Parity::Mu => 9,
                    Parity::Nu => 10,
                };
                (
                    mix(tag, &[str_hash(x.name()), a.hash()]),
                    a.len().saturating_add(2),
                    a.fdep() + 1,
                    varset_remove(a.fv_pos(), x),
                    varset_remove(a.fv_neg(), x),
                    varset_union(&varset_single(x.clone()), a.bv()),
                )
            }
        };
        let fv = varset_union(&fv_pos, &fv_neg);
        Formula(Arc::new(FNode { kind, hash, len, fdep, fv_pos, fv_neg, fv, bv }))
    }

    pub fn top() -> Formula {
        Formula::make(FKind::Top)
    }
    pub fn bot() -> Formula {
        Formula::make(FKind::Bot)
    }
    pub fn lit(v: Var, positive: bool) -> Formula {
        Formula::make(FKind::Lit(v, positive))
    }
    pub fn var(v: Var) -> Formula {
        Formula::make(FKind::Lit(v, true))
    }
    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::make(FKind::And(a, b))
    }
    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::make(FKind::Or(a, b))
    }
    pub fn dia(a: Formula) -> Formula {
        Formula::make(FKind::Dia(a))
    }
    pub fn boxm(a: Formula) -> Formula {
        Formula::make(FKind::Box(a))
    }

    /// Builds a fixpoint formula, rejecting bodies with a negated
    /// occurrence of the bound variable.
    pub fn fix(eta: Parity, x: Var, body: Formula) -> Result<Formula> {
        if varset_contains(body.fv_neg(), &x) {
            return Err(Error::Positivity { var: x.name().to_string() });
        }
        Ok(Formula::make(FKind::Fix(eta, x, body)))
    }

    pub fn mu(x: Var, body: Formula) -> Result<Formula> {
        Formula::fix(Parity::Mu, x, body)
    }
    pub fn nu(x: Var, body: Formula) -> Result<Formula> {
        Formula::fix(Parity::Nu, x, body)
    }

    pub fn kind(&self) -> &FKind {
        &self.0.kind
    }
    pub fn hash(&self) -> u64 {
        self.0.hash
    }

    /// Symbol count: atoms 1, modalities 1, binders 2, connectives 0.
    pub fn len(&self) -> u64 {
        self.0.len
    }
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Fixpoint depth: the maximal number of nested fixpoint operators.
    pub fn fdep(&self) -> u32 {
        self.0.fdep
    }

    pub fn fv_pos(&self) -> &VarSet {
        &self.0.fv_pos
    }
    pub fn fv_neg(&self) -> &VarSet {
        &self.0.fv_neg
    }
    pub fn fv(&self) -> &VarSet {
        &self.0.fv
    }
    pub fn bv(&self) -> &VarSet {
        &self.0.bv
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self.kind(), FKind::Top | FKind::Bot | FKind::Lit(..))
    }

    pub fn is_fixpoint(&self) -> bool {
        matches!(self.kind(), FKind::Fix(..))
    }

    pub fn as_fixpoint(&self) -> Option<(Parity, &Var, &Formula)> {
        match self.kind() {
            FKind::Fix(eta, x, body) => Some((*eta, x, body)),
            _ => None,
        }
    }

    /// No negated occurrence of `x` (so `x` may be bound over self).
    pub fn positive_in(&self, x: &Var) -> bool {
        !varset_contains(self.fv_neg(), x)
    }

    /// Free and bound variables do not overlap.
    pub fn is_tidy(&self) -> bool {
        varset_disjoint(self.fv(), self.bv())
    }

    pub fn check_tidy(&self) -> Result<()> {
        if let Some(v) = self.fv().iter().find(|v| varset_contains(self.bv(), v)) {
            Err(Error::NotTidy(v.name().to_string()))
        } else {
            Ok(())
        }
    }

    /// Tidy and every bound variable has exactly one binding subformula.
    pub fn is_clean(&self) -> bool {
        self.binders().is_ok()
    }

    /// For a clean formula, maps every bound variable `x` to its unique
    /// binding subformula `eta_x x. delta_x`, returned as `(eta_x, delta_x)`.
    pub fn binders(&self) -> Result<std::collections::BTreeMap<Var, (Parity, Formula)>> {
        self.check_tidy().map_err(|_| {
            Error::NotClean(format!("{} is not tidy", print(self)))
        })?;
        let mut map = std::collections::BTreeMap::new();
        for phi in self.subformulas().iter() {
            if let FKind::Fix(eta, x, body) = phi.kind() {
                if let Some((_, old)) = map.get(x) {
                    if old != body {
                        return Err(Error::NotClean(format!(
                            "variable {} is bound by more than one subformula",
                            x
                        )));
                    }
                } else {
                    map.insert(x.clone(), (*eta, body.clone()));
                }
            }
        }
        Ok(map)
    }

    /// Variable analysis: free set, bound set, tidy and clean flags.
    pub fn var_analysis(&self) -> VarAnalysis {
        VarAnalysis {
            free: self.fv().iter().cloned().collect(),
            bound: self.bv().iter().cloned().collect(),
            tidy: self.is_tidy(),
            clean: self.is_clean(),
        }
    }

    /// The set of subformulas together with direct-subformula edges.
    pub fn subformulas(&self) -> SubformulaDag {
        let mut dag = SubformulaDag {
            nodes: Vec::new(),
            index: std::collections::HashMap::new(),
            children: Vec::new(),
        };
        dag.insert(self);
        dag
    }

    fn direct_subformulas(&self) -> Vec<Formula> {
        match self.kind() {
            FKind::Top | FKind::Bot | FKind::Lit(..) => Vec::new(),
            FKind::And(a, b) | FKind::Or(a, b) => vec![a.clone(), b.clone()],
            FKind::Dia(a) | FKind::Box(a) => vec![a.clone()],
            FKind::Fix(_, _, a) => vec![a.clone()],
        }
    }

    /// Is `self` a subformula of `other`?
    pub fn is_subformula_of(&self, other: &Formula) -> bool {
        let mut seen = HashSet::new();
        let mut stack = vec![other.clone()];
        while let Some(f) = stack.pop() {
            if !seen.insert(HashKey(f.clone())) {
                continue;
            }
            if &f == self {
                return true;
            }
            // Subtrees that cannot contain self are pruned by size.
            if f.len() < self.len() {
                continue;
            }
            stack.extend(f.direct_subformulas());
        }
        false
    }
}

impl PartialEq for Formula {
    fn eq(&self, other: &Self) -> bool {
        if Arc::ptr_eq(&self.0, &other.0) {
            return true;
        }
        if self.0.hash != other.0.hash || self.0.len != other.0.len {
            return false;
        }
        match (&self.0.kind, &other.0.kind) {
            (FKind::Top, FKind::Top) | (FKind::Bot, FKind::Bot) => true,
            (FKind::Lit(v, s), FKind::Lit(w, t)) => s == t && v == w,
            (FKind::And(a, b), FKind::And(c, d)) | (FKind::Or(a, b), FKind::Or(c, d)) => {
                a == c && b == d
            }
            (FKind::Dia(a), FKind::Dia(b)) | (FKind::Box(a), FKind::Box(b)) => a == b,
            (FKind::Fix(e1, x, a), FKind::Fix(e2, y, b)) => e1 == e2 && x == y && a == b,
            _ => false,
        }
    }
}
impl Eq for Formula {}

impl Hash for Formula {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.0.hash);
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", print(self))
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", print(self))
    }
}

impl Formula {
    pub(crate) fn ptr_id(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }
}

/// Wrapper used for hash sets of formulas.
#[derive(Clone, PartialEq, Eq, Hash)]
pub(crate) struct HashKey(pub Formula);

/// Result of `var_analysis`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarAnalysis {
    pub free: Vec<Var>,
    pub bound: Vec<Var>,
    pub tidy: bool,
    pub clean: bool,
}

/// The subformula dag: deduplicated subformulas with direct-subformula
/// edges, in first-visit (preorder) order. Index 0 is the root.
pub struct SubformulaDag {
    nodes: Vec<Formula>,
    index: std::collections::HashMap<Formula, usize>,
    children: Vec<Vec<usize>>,
}

impl SubformulaDag {
    fn insert(&mut self, f: &Formula) -> usize {
        if let Some(&i) = self.index.get(f) {
            return i;
        }
        let i = self.nodes.len();
        self.nodes.push(f.clone());
        self.index.insert(f.clone(), i);
        self.children.push(Vec::new());
        let kids: Vec<usize> = f.direct_subformulas().iter().map(|c| self.insert(c)).collect();
        self.children[i] = kids;
        i
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
    pub fn iter(&self) -> impl Iterator<Item = &Formula> {
        self.nodes.iter()
    }
    pub fn nodes(&self) -> &[Formula] {
        &self.nodes
    }
    pub fn contains(&self, f: &Formula) -> bool {
        self.index.contains_key(f)
    }
    pub fn index_of(&self, f: &Formula) -> Option<usize> {
        self.index.get(f).copied()
    }
    /// Direct subformula edges as (parent, child) index pairs, in order.
    pub fn children(&self, i: usize) -> &[usize] {
        &self.children[i]
    }
}

/// Subformula size: `|Sfor(xi)|`. Meaningful as a size measure for clean
/// formulas but defined for all.
pub fn ssz(f: &Formula) -> usize {
    f.subformulas().len()
}

/// Closure size: `|Clos(xi)|` for tidy formulas.
pub fn csz(f: &Formula) -> Result<usize> {
    Ok(closure(f)?.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: &str) -> Var {
        Var::new(n)
    }

    #[test]
    fn length_counts_binders_twice() {
        // p -> 1
        assert_eq!(Formula::var(v("p")).len(), 1);
        // mu x. <>x -> 4
        let f = Formula::mu(v("x"), Formula::dia(Formula::var(v("x")))).unwrap();
        assert_eq!(f.len(), 4);
    }

    #[test]
    fn length_doubles_on_conjunction_chain() {
        let mut f = Formula::var(v("p"));
        for _ in 0..3 {
            f = Formula::and(f.clone(), f.clone());
        }
        assert_eq!(f.len(), 8);
        // ssz of the chain is n+1
        assert_eq!(ssz(&f), 4);
    }

    #[test]
    fn sforchain_counts() {
        // chi_0 = nu x. []x, chi_{k+1} = chi_k /\ chi_k: all copies are equal,
        // so |Sfor(chi_n)| = n + 3 on the shared tree.
        let chi0 = Formula::nu(v("x"), Formula::boxm(Formula::var(v("x")))).unwrap();
        let mut f = chi0;
        for _ in 0..4 {
            f = Formula::and(f.clone(), f.clone());
        }
        assert_eq!(ssz(&f), 4 + 3);
    }

    #[test]
    fn positivity_rejected() {
        let body = Formula::lit(v("x"), false);
        assert!(Formula::mu(v("x"), body).is_err());
    }

    #[test]
    fn tidy_and_clean_flags() {
        // mu x. ~p \/ <>x : free {p}, bound {x}, tidy, clean
        let f = Formula::mu(
            v("x"),
            Formula::or(Formula::lit(v("p"), false), Formula::dia(Formula::var(v("x")))),
        )
        .unwrap();
        let a = f.var_analysis();
        assert_eq!(a.free, vec![v("p")]);
        assert_eq!(a.bound, vec![v("x")]);
        assert!(a.tidy && a.clean);

        // <>p /\ (mu p. q \/ <>p) /\ nu p. []<>p : p free and bound
        let f2 = Formula::and(
            Formula::and(
                Formula::dia(Formula::var(v("p"))),
                Formula::mu(
                    v("p"),
                    Formula::or(Formula::var(v("q")), Formula::dia(Formula::var(v("p")))),
                )
                .unwrap(),
            ),
            Formula::nu(v("p"), Formula::boxm(Formula::dia(Formula::var(v("p"))))).unwrap(),
        );
        let a2 = f2.var_analysis();
        assert!(!a2.tidy);
    }

    #[test]
    fn subformula_membership() {
        let p = Formula::var(v("p"));
        let q = Formula::var(v("q"));
        let f = Formula::and(p.clone(), q.clone());
        let dag = f.subformulas();
        assert_eq!(dag.len(), 3);
        assert!(dag.contains(&p));
        assert!(p.is_subformula_of(&f));
        assert!(!f.is_subformula_of(&p));
    }
}
