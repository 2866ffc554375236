//! Compiling formulas into parity formulas: over the subformula dag of
//! a clean formula (with back edges from bound variables to their
//! binders' bodies) and over the closure graph of a tidy formula (with
//! the global priority assignment).

use crate::alternation::{closure_order, dependency_order, ClosureOrder};
use crate::error::Result;
use crate::formula::{closure, tidy_variant, ClosureGraph, FKind, Formula, Parity, Var};
use crate::parity::{EdgeTagging, Label, ParityFormula, Vertex};
use std::collections::BTreeMap;

fn natural_label(f: &Formula) -> Label {
    match f.kind() {
        FKind::Top => Label::Top,
        FKind::Bot => Label::Bot,
        FKind::Lit(v, s) => Label::Lit(v.clone(), *s),
        FKind::And(..) => Label::And,
        FKind::Or(..) => Label::Or,
        FKind::Dia(_) => Label::Dia,
        FKind::Box(_) => Label::Box,
        FKind::Fix(..) => Label::Eps,
    }
}

/// Compiles a clean formula over its subformula dag. Vertices are the
/// subformulas; downward edges are the converse direct-subformula
/// relation; each occurring bound variable contributes a back edge to
/// its binder's body. Fixpoint and bound-variable vertices are silent.
///
/// The priority of a binder body is the maximal length of an
/// alternating dependency chain of which the variable is the most
/// significant element, corrected by one when that misses the binder's
/// parity. The result has `ssz(xi)` vertices, index `ad(xi)`, and is
/// untwisted.
pub fn compile_sfor(xi: &Formula) -> Result<ParityFormula> {
    let binders = xi.binders()?;
    let deps = dependency_order(xi)?;
    let dag = xi.subformulas();
    let n = dag.len();

    let mut verts: Vec<Vertex> = Vec::with_capacity(n);
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut back_of: Vec<Option<usize>> = vec![None; n];

    for (k, f) in dag.iter().enumerate() {
        let bound_var = match f.kind() {
            FKind::Lit(v, true) if binders.contains_key(v) => Some(v.clone()),
            _ => None,
        };
        let label = if bound_var.is_some() { Label::Eps } else { natural_label(f) };
        verts.push(Vertex { id: format!("n{}", k), label, priority: None });
        if let Some(x) = bound_var {
            let delta = &binders[&x].1;
            let target = dag.index_of(delta).expect("binder body is a subformula");
            succ[k] = vec![target];
            back_of[k] = Some(target);
        } else {
            succ[k] = dag.children(k).to_vec();
        }
    }

    // Priorities on binder bodies. When several binders share a body
    // (possible only when at most one of their variables occurs), the
    // occurring binder's value wins.
    let mut priority_of: BTreeMap<usize, u32> = BTreeMap::new();
    let mut ordered: Vec<&Var> = binders.keys().collect();
    // degenerate binders first, so occurring ones overwrite
    ordered.sort_by_key(|x| {
        let delta = &binders[*x].1;
        delta.fv().iter().any(|v| v == *x)
    });
    for x in ordered {
        let (eta, delta) = &binders[x];
        let Some(target) = dag.index_of(delta) else { continue };
        let d = deps.chain_height_at(x);
        let value = if eta.matches(d) { d } else { d + 1 };
        priority_of.insert(target, value);
    }
    for (k, p) in &priority_of {
        verts[*k].priority = Some(*p);
    }

    let states: std::collections::BTreeSet<usize> = priority_of.keys().copied().collect();
    let companions: std::collections::BTreeSet<usize> =
        back_of.iter().flatten().copied().collect();
    let companions_exact = states == companions;

    Ok(ParityFormula {
        verts,
        succ,
        initial: dag.index_of(xi).unwrap(),
        tagging: Some(EdgeTagging { back_of, companions_exact }),
    })
}

/// The global priority assignment on the fixpoint formulas of a closure
/// graph, induced clusterwise by the closure order: the value is the
/// cluster's closure depth minus the formula's ascending alternation
/// height, corrected by one when that misses the formula's parity.
pub fn global_priority(g: &ClosureGraph, co: &ClosureOrder) -> BTreeMap<usize, u32> {
    let mut out = BTreeMap::new();
    for (a, &node) in co.fix_nodes.iter().enumerate() {
        let cd = co.cd[co.cluster_of[node]];
        let base = cd - co.h_up[a];
        let eta = co.parities[a];
        let value = if eta.matches(base) { base } else { base + 1 };
        out.insert(node, value);
    }
    out
}

/// Compiles a tidy formula over its closure graph with the global
/// priority map. Untidy inputs are first replaced by a tidy variant;
/// the variant is reported alongside the result.
pub fn compile_clos(xi: &Formula) -> Result<(ParityFormula, Option<Formula>)> {
    let (f, tidied) = if xi.is_tidy() {
        (xi.clone(), None)
    } else {
        let t = tidy_variant(xi);
        (t.clone(), Some(t))
    };
    let g = closure(&f)?;
    let co = closure_order(&g);
    let omega = global_priority(&g, &co);
    let verts: Vec<Vertex> = (0..g.len())
        .map(|k| Vertex {
            id: format!("c{}", k),
            label: natural_label(g.node(k)),
            priority: omega.get(&k).copied(),
        })
        .collect();
    let succ: Vec<Vec<usize>> = (0..g.len()).map(|k| g.succs(k).to_vec()).collect();
    Ok((ParityFormula { verts, succ, initial: g.root(), tagging: None }, tidied))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse, ssz};
    use crate::parity::untwisted_decompose;

    #[test]
    fn sfor_compilation_has_subformula_size() {
        for s in [
            "mu x. (~p \\/ <>x) \\/ nu y. (q /\\ [](x \\/ y))",
            "nu x. mu y. (p /\\ <>x) \\/ <>y",
            "mu x. p \\/ x",
        ] {
            let f = parse(s).unwrap();
            let h = compile_sfor(&f).unwrap();
            assert!(h.is_valid(), "{:?}", h.validate());
            assert_eq!(h.size(), ssz(&f));
        }
    }

    #[test]
    fn sfor_compilation_is_untwisted() {
        let f = parse("mu x. (~p \\/ <>x) \\/ nu y. (q /\\ [](x \\/ y))").unwrap();
        let h = compile_sfor(&f).unwrap();
        let t = untwisted_decompose(&h).unwrap();
        assert_eq!(&t, h.tagging.as_ref().unwrap());
    }

    #[test]
    fn sfor_index_matches_ad() {
        for (s, ad) in [
            ("mu x. p \\/ x", 1),
            ("nu x. mu y. (p /\\ <>x) \\/ <>y", 2),
            ("mu x. nu y. ([]y /\\ mu z. (<>x \\/ z))", 2),
        ] {
            let f = parse(s).unwrap();
            let h = compile_sfor(&f).unwrap();
            assert_eq!(h.index(), ad, "{}", s);
        }
    }

    #[test]
    fn clos_compilation_on_atom() {
        let (g, tidied) = compile_clos(&parse("p").unwrap()).unwrap();
        assert!(tidied.is_none());
        assert_eq!(g.size(), 1);
        assert!(g.states().is_empty());
        assert!(g.is_valid());
    }

    #[test]
    fn global_priorities_on_alpha_x() {
        // the cluster where the naive descending assignment would give
        // index three; here it must be exactly two with values 2, 1, 2
        let f = parse("nu x. ((mu y. x /\\ y) \\/ nu z. (z /\\ mu y. x /\\ y))").unwrap();
        let g = closure(&f).unwrap();
        let co = closure_order(&g);
        let omega = global_priority(&g, &co);
        let ax = g.index_of(&f).unwrap();
        let ay = g
            .index_of(
                &parse("mu y. (nu x. ((mu y. x /\\ y) \\/ nu z. (z /\\ mu y. x /\\ y))) /\\ y")
                    .unwrap(),
            )
            .unwrap();
        let az = g
            .index_of(
                &parse(
                    "nu z. (z /\\ mu y. (nu x. ((mu y. x /\\ y) \\/ nu z. (z /\\ mu y. x /\\ y))) /\\ y)",
                )
                .unwrap(),
            )
            .unwrap();
        assert_eq!(omega[&ax], 2);
        assert_eq!(omega[&ay], 1);
        assert_eq!(omega[&az], 2);
        let (pf, _) = compile_clos(&f).unwrap();
        assert_eq!(pf.index(), 2);
    }

    #[test]
    fn clos_index_at_most_ad() {
        for s in [
            "mu x. p \\/ x",
            "nu x. mu y. (p /\\ <>x) \\/ <>y",
            "mu x. nu y. ([]y /\\ mu z. (<>x \\/ z))",
            "nu x. ((mu y. x /\\ y) \\/ nu z. (z /\\ mu y. x /\\ y))",
        ] {
            let f = parse(s).unwrap();
            let (g, _) = compile_clos(&f).unwrap();
            assert!(g.is_valid());
            assert!(g.index() <= crate::alternation::ad_tidy(&f).unwrap());
        }
    }
}
