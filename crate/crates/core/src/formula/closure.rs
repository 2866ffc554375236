//! Fischer-Ladner closure: the least set containing a tidy formula that
//! is closed under direct boolean/modal subformulas and unfoldings of
//! fixpoint formulas, kept as a graph with the trace relation as edges.

use super::{unfold, varset_disjoint, FKind, Formula};
use crate::error::Result;
use std::collections::HashMap;

/// The closure set of a formula with its trace edges.
#[derive(Debug, Clone)]
pub struct ClosureGraph {
    nodes: Vec<Formula>,
    index: HashMap<Formula, usize>,
    /// Trace successors per node, in a fixed order: left/right operand
    /// for booleans, the argument for modalities, the unfolding for
    /// fixpoint formulas.
    succs: Vec<Vec<usize>>,
    root: usize,
}

impl ClosureGraph {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
    pub fn nodes(&self) -> &[Formula] {
        &self.nodes
    }
    pub fn node(&self, i: usize) -> &Formula {
        &self.nodes[i]
    }
    pub fn root(&self) -> usize {
        self.root
    }
    pub fn root_formula(&self) -> &Formula {
        &self.nodes[self.root]
    }
    pub fn succs(&self, i: usize) -> &[usize] {
        &self.succs[i]
    }
    pub fn index_of(&self, f: &Formula) -> Option<usize> {
        self.index.get(f).copied()
    }
    pub fn contains(&self, f: &Formula) -> bool {
        self.index.contains_key(f)
    }

    /// Edge list as (from, to) pairs.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, ss) in self.succs.iter().enumerate() {
            for &j in ss {
                out.push((i, j));
            }
        }
        out
    }
}

/// Trace successors of a single tidy formula.
pub(crate) fn trace_successors(f: &Formula) -> Result<Vec<Formula>> {
    Ok(match f.kind() {
        FKind::Top | FKind::Bot | FKind::Lit(..) => Vec::new(),
        FKind::And(a, b) | FKind::Or(a, b) => vec![a.clone(), b.clone()],
        FKind::Dia(a) | FKind::Box(a) => vec![a.clone()],
        FKind::Fix(..) => vec![unfold(f)?],
    })
}

/// Computes the closure graph of a tidy formula. Untidy inputs are
/// rejected; callers may use `tidy_variant` first.
pub fn closure(f: &Formula) -> Result<ClosureGraph> {
    f.check_tidy()?;
    let mut g = ClosureGraph {
        nodes: vec![f.clone()],
        index: HashMap::from([(f.clone(), 0)]),
        succs: vec![Vec::new()],
        root: 0,
    };
    let mut work = vec![0usize];
    while let Some(i) = work.pop() {
        let here = g.nodes[i].clone();
        let mut ss = Vec::new();
        for succ in trace_successors(&here)? {
            let j = if let Some(&j) = g.index.get(&succ) {
                j
            } else {
                let j = g.nodes.len();
                g.nodes.push(succ.clone());
                g.index.insert(succ, j);
                g.succs.push(Vec::new());
                work.push(j);
                j
            };
            ss.push(j);
        }
        g.succs[i] = ss;
    }
    Ok(g)
}

/// Closure of a set of tidy formulas (union of the individual closures).
pub fn closure_set(fs: &[Formula]) -> Result<Vec<Formula>> {
    let mut out: Vec<Formula> = Vec::new();
    let mut seen: HashMap<Formula, ()> = HashMap::new();
    for f in fs {
        for n in closure(f)?.nodes() {
            if seen.insert(n.clone(), ()).is_none() {
                out.push(n.clone());
            }
        }
    }
    Ok(out)
}

/// Decides whether `phi` is a free subformula of tidy `psi`: `phi` is a
/// subformula of `psi` and no free variable of `phi` is bound in `psi`.
pub fn is_free_subformula(phi: &Formula, psi: &Formula) -> Result<bool> {
    psi.check_tidy()?;
    Ok(free_subformula_unchecked(phi, psi))
}

pub(crate) fn free_subformula_unchecked(phi: &Formula, psi: &Formula) -> bool {
    varset_disjoint(phi.fv(), psi.bv()) && phi.is_subformula_of(psi)
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    #[test]
    fn closure_of_atom() {
        let g = closure(&parse("p").unwrap()).unwrap();
        assert_eq!(g.len(), 1);
        assert!(g.edges().is_empty());
    }

    #[test]
    fn closure_of_nested_fixpoints_has_seven_nodes() {
        let xi1 =
            parse("mu x1. nu x2. mu x3. ((x1 \\/ x2 \\/ x3) /\\ [] (x1 \\/ x2 \\/ x3))").unwrap();
        let g = closure(&xi1).unwrap();
        assert_eq!(g.len(), 7);
        // every node's closure is the same set
        for n in g.nodes() {
            assert_eq!(closure(n).unwrap().len(), 7);
        }
    }

    #[test]
    fn closure_rejects_untidy() {
        let f = parse("<>p /\\ mu p. q \\/ <>p").unwrap();
        assert!(closure(&f).is_err());
    }

    #[test]
    fn clean_closure_at_most_subformulas() {
        for s in [
            "mu x. nu y. (p /\\ <>x) \\/ <>y",
            "mu x. (~p \\/ <>x)",
            "nu y. (q /\\ [](p \\/ y))",
        ] {
            let f = parse(s).unwrap();
            assert!(closure(&f).unwrap().len() <= f.subformulas().len());
        }
    }

    #[test]
    fn literals_are_free_subformulas() {
        let psi = parse("mu x. (~p \\/ <>x)").unwrap();
        assert!(is_free_subformula(&parse("~p").unwrap(), &psi).unwrap());
        // x is bound in psi
        assert!(!is_free_subformula(&parse("x").unwrap(), &psi).unwrap());
    }
}
