//! From parity formulas back to formulas: the Gaussian/Bekic elimination
//! translation for arbitrary parity formulas, and the linear clean
//! translation for untwisted ones.

use crate::error::{Error, Result};
use crate::formula::{substitute_safe, Formula, Parity, Substitution, Var};
use crate::parity::{id_order, EdgeTagging, Label, ParityFormula};
use std::collections::{BTreeMap, HashMap};

/// The variable standing for a vertex, in a reserved namespace.
pub fn vertex_var(id: &str) -> Var {
    Var::new(&format!("v#{}", id))
}

/// Canonical key of a parity formula restricted to the part reachable
/// from `v`, used to memoize the translation.
fn canon_key(g: &ParityFormula, v: usize) -> String {
    let mut keep = vec![false; g.size()];
    let mut work = vec![v];
    keep[v] = true;
    while let Some(u) = work.pop() {
        for &w in &g.succ[u] {
            if !keep[w] {
                keep[w] = true;
                work.push(w);
            }
        }
    }
    let mut parts: Vec<String> = Vec::new();
    let mut ids: Vec<usize> = (0..g.size()).filter(|&u| keep[u]).collect();
    ids.sort_by(|&a, &b| id_order(&g.verts[a].id, &g.verts[b].id));
    for u in ids {
        let succs: Vec<&str> = g.succ[u].iter().map(|&w| g.verts[w].id.as_str()).collect();
        parts.push(format!(
            "{}|{}|{:?}|{}",
            g.verts[u].id,
            g.verts[u].label,
            g.verts[u].priority,
            succs.join(",")
        ));
    }
    format!("@{};{}", g.verts[v].id, parts.join(";"))
}

struct Translator {
    memo: HashMap<String, Formula>,
}

impl Translator {
    /// Translation of every vertex of `g`.
    fn translate_all(&mut self, g: &ParityFormula) -> Result<BTreeMap<usize, Formula>> {
        let mut out = BTreeMap::new();
        for v in 0..g.size() {
            out.insert(v, self.translate(g, v)?);
        }
        Ok(out)
    }

    fn translate(&mut self, g: &ParityFormula, v: usize) -> Result<Formula> {
        let key = canon_key(g, v);
        if let Some(f) = self.memo.get(&key) {
            return Ok(f.clone());
        }
        let res = self.translate_uncached(g, v)?;
        self.memo.insert(key, res.clone());
        Ok(res)
    }

    fn translate_uncached(&mut self, g: &ParityFormula, v: usize) -> Result<Formula> {
        let gv = g.generated(v);
        let info = gv.clusters();
        let top = info.comp_of[gv.initial];
        let top_degenerate = info.degenerate[top];

        if top_degenerate {
            // the initial vertex is not on any cycle: translate by label
            let vi = gv.initial;
            let f = match gv.label(vi) {
                Label::Top => Formula::top(),
                Label::Bot => Formula::bot(),
                Label::Lit(p, s) => Formula::lit(p.clone(), *s),
                Label::Dia => {
                    let u = gv.succ[vi][0];
                    Formula::dia(self.translate(&gv, u)?)
                }
                Label::Box => {
                    let u = gv.succ[vi][0];
                    Formula::boxm(self.translate(&gv, u)?)
                }
                Label::Eps => {
                    let u = gv.succ[vi][0];
                    self.translate(&gv, u)?
                }
                op @ (Label::And | Label::Or) => {
                    let args: Vec<Formula> = gv.succ[vi]
                        .iter()
                        .map(|&u| self.translate(&gv, u))
                        .collect::<Result<_>>()?;
                    combine(op, &args)
                }
            };
            return Ok(f);
        }

        // nondegenerate top cluster: eliminate its maximal states
        let cluster = &info.comps[top];
        let m_t = cluster
            .iter()
            .filter_map(|&u| gv.priority(u))
            .max()
            .ok_or_else(|| Error::InvalidParity("cycle without a state".to_string()))?;
        let eta = Parity::of_priority(m_t);
        let mut m: Vec<usize> = cluster
            .iter()
            .copied()
            .filter(|&u| gv.priority(u) == Some(m_t))
            .collect();
        m.sort_by(|&a, &b| id_order(&gv.verts[a].id, &gv.verts[b].id));

        // G-minus: the m-states lose their priority, edges into them are
        // redirected to fresh atomic vertices labelled by their variable
        let mut gm = gv.clone();
        let mut star_of: BTreeMap<usize, usize> = BTreeMap::new();
        for &z in &m {
            gm.verts[z].priority = None;
            let star = gm.size();
            let star_id = gm.fresh_id(&format!("{}*", gm.verts[z].id));
            gm.verts.push(crate::parity::Vertex {
                id: star_id,
                label: Label::Lit(vertex_var(&gv.verts[z].id), true),
                priority: None,
            });
            gm.succ.push(Vec::new());
            star_of.insert(z, star);
        }
        for u in 0..gm.size() {
            for w in gm.succ[u].iter_mut() {
                if let Some(&star) = star_of.get(w) {
                    *w = star;
                }
            }
        }
        gm.tagging = None;

        // stage 0: translate in the reduced formula
        let mut tr: BTreeMap<usize, Formula> = BTreeMap::new();
        for u in 0..gv.size() {
            tr.insert(u, self.translate(&gm, u)?);
        }
        // eliminate z_1 .. z_k in vertex order
        for &z in m.iter() {
            let zvar = vertex_var(&gv.verts[z].id);
            let fixed = Formula::fix(eta, zvar.clone(), tr[&z].clone())?;
            for u in 0..gv.size() {
                let cur = tr[&u].clone();
                let cur = if u == z {
                    fixed.clone()
                } else {
                    substitute_safe(&cur, &Substitution::single(zvar.clone(), fixed.clone()))?
                };
                tr.insert(u, cur);
            }
            // the eliminated variable no longer occurs free anywhere
            debug_assert!(tr.values().all(|f| !f.fv().iter().any(|x| x == &zvar)));
        }
        Ok(tr[&gv.initial].clone())
    }
}

fn combine(op: &Label, args: &[Formula]) -> Formula {
    match args {
        [] => match op {
            Label::And => Formula::top(),
            _ => Formula::bot(),
        },
        [one] => one.clone(),
        [a, b] => match op {
            Label::And => Formula::and(a.clone(), b.clone()),
            _ => Formula::or(a.clone(), b.clone()),
        },
        _ => {
            let rest = combine(op, &args[1..]);
            match op {
                Label::And => Formula::and(args[0].clone(), rest),
                _ => Formula::or(args[0].clone(), rest),
            }
        }
    }
}

/// Translates every vertex of a valid parity formula into an equivalent
/// formula by one-variable-at-a-time elimination of the top cluster's
/// maximal states. Vertex identifiers double as bound variable names
/// (in a reserved namespace).
pub fn decompile(g: &ParityFormula) -> Result<BTreeMap<usize, Formula>> {
    let bad = g.validate();
    if !bad.is_empty() {
        return Err(Error::InvalidParity(bad.join("; ")));
    }
    Translator { memo: HashMap::new() }.translate_all(g)
}

/// Translation of the initial vertex only.
pub fn decompile_initial(g: &ParityFormula) -> Result<Formula> {
    Ok(decompile(g)?[&g.initial].clone())
}

/// Renames the reserved vertex variables of a decompiled formula to
/// plain user-level names (x1, x2, ...), consistently per bound name.
/// The result is an alphabetic variant with the same closure structure.
pub fn externalize_variables(f: &Formula) -> Formula {
    let mut rho = BTreeMap::new();
    let mut k = 0u64;
    for x in f.bv().iter() {
        if x.is_reserved() {
            loop {
                k += 1;
                let cand = Var::with_index("x", k);
                if !f.fv().iter().any(|v| *v == cand) && !f.bv().iter().any(|v| *v == cand) {
                    rho.insert(x.clone(), cand);
                    break;
                }
            }
        }
    }
    if rho.is_empty() {
        f.clone()
    } else {
        crate::formula::rename_bound_vars(f, &rho)
    }
}

/// Result of the untwisted linear translation.
#[derive(Debug, Clone)]
pub struct UntwistedTranslation {
    pub formula: Formula,
    /// Size of the preprocessed graph (silent states and silent
    /// back-edge sources), against which the linear bound holds.
    pub preprocessed_size: usize,
}

/// Linear translation for untwisted parity formulas: builds a clean
/// formula along the downward dag, binding a variable at every state.
/// Preprocessing makes states and back-edge sources silent, at most
/// doubling the vertex count.
pub fn decompile_untwisted(g: &ParityFormula) -> Result<UntwistedTranslation> {
    let bad = g.validate();
    if !bad.is_empty() {
        return Err(Error::InvalidParity(bad.join("; ")));
    }
    let tagging = match &g.tagging {
        Some(t) => t.clone(),
        None => crate::parity::untwisted_decompose(g)?,
    };
    let (h, ht) = preprocess_silent(g, &tagging);

    // topological order over downward edges
    let n = h.size();
    let down: Vec<Vec<usize>> = (0..n).map(|v| ht.down(&h, v)).collect();
    let mut indeg = vec![0usize; n];
    for v in 0..n {
        for &w in &down[v] {
            indeg[w] += 1;
        }
    }
    let mut topo: Vec<usize> = Vec::new();
    let mut queue: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
    while let Some(v) = queue.pop() {
        topo.push(v);
        for &w in &down[v] {
            indeg[w] -= 1;
            if indeg[w] == 0 {
                queue.push(w);
            }
        }
    }
    if topo.len() != n {
        return Err(Error::NotUntwisted {
            condition: 1,
            detail: "downward edges contain a cycle".to_string(),
        });
    }

    let mut xi: Vec<Option<Formula>> = vec![None; n];
    for &v in topo.iter().rev() {
        let f = if down[v].is_empty() {
            match ht.back_of[v] {
                Some(u) => Formula::var(vertex_var(&h.verts[u].id)),
                None => match h.label(v) {
                    Label::Top => Formula::top(),
                    Label::Bot => Formula::bot(),
                    Label::Lit(p, s) => Formula::lit(p.clone(), *s),
                    Label::And => Formula::top(),
                    Label::Or => Formula::bot(),
                    l => {
                        return Err(Error::InvalidParity(format!(
                            "leaf vertex {} with label {}",
                            h.verts[v].id, l
                        )))
                    }
                },
            }
        } else {
            let args: Vec<Formula> =
                down[v].iter().map(|&u| xi[u].clone().unwrap()).collect();
            match h.label(v) {
                Label::Dia => Formula::dia(args[0].clone()),
                Label::Box => Formula::boxm(args[0].clone()),
                Label::And => combine(&Label::And, &args),
                Label::Or => combine(&Label::Or, &args),
                Label::Eps => match h.priority(v) {
                    None => args[0].clone(),
                    Some(p) => Formula::fix(
                        Parity::of_priority(p),
                        vertex_var(&h.verts[v].id),
                        args[0].clone(),
                    )?,
                },
                l => {
                    return Err(Error::InvalidParity(format!(
                        "inner vertex {} with label {}",
                        h.verts[v].id, l
                    )))
                }
            }
        };
        xi[v] = Some(f);
    }
    Ok(UntwistedTranslation {
        formula: xi[h.initial].clone().unwrap(),
        preprocessed_size: n,
    })
}

/// Makes every state and every back-edge source silent: a non-silent or
/// back-sourcing state is split into a fresh silent state above it; a
/// non-silent back-edge source gets a fresh silent vertex carrying its
/// back edge.
fn preprocess_silent(g: &ParityFormula, t: &EdgeTagging) -> (ParityFormula, EdgeTagging) {
    let mut h = g.clone();
    let mut back_of = t.back_of.clone();

    // pass 1: states that are not plain silent vertices get a fresh
    // silent state in front
    for v in 0..g.size() {
        if h.priority(v).is_none() {
            continue;
        }
        let needs_split = !h.label(v).is_silent() || back_of[v].is_some();
        if !needs_split {
            continue;
        }
        let hat = h.size();
        let id = h.fresh_id(&format!("{}^", h.verts[v].id));
        let pr = h.verts[v].priority.take();
        h.verts.push(crate::parity::Vertex { id, label: Label::Eps, priority: pr });
        h.succ.push(vec![v]);
        back_of.push(None);
        for u in 0..h.size() {
            if u == hat {
                continue;
            }
            for w in h.succ[u].iter_mut() {
                if *w == v {
                    *w = hat;
                }
            }
            if back_of[u] == Some(v) {
                back_of[u] = Some(hat);
            }
        }
        if h.initial == v {
            h.initial = hat;
        }
    }

    // pass 2: non-silent back-edge sources move their back edge into a
    // fresh silent vertex below
    for v in 0..back_of.len() {
        let Some(u) = back_of[v] else { continue };
        if h.label(v).is_silent() && h.priority(v).is_none() {
            continue;
        }
        let mid = h.size();
        h.verts.push(crate::parity::Vertex {
            id: h.fresh_id(&format!("{}~", h.verts[v].id)),
            label: Label::Eps,
            priority: None,
        });
        h.succ.push(vec![u]);
        back_of.push(Some(u));
        back_of[v] = None;
        for w in h.succ[v].iter_mut() {
            if *w == u {
                *w = mid;
            }
        }
    }

    let companions: std::collections::BTreeSet<usize> =
        back_of.iter().flatten().copied().collect();
    let states: std::collections::BTreeSet<usize> = (0..h.size())
        .filter(|&v| h.priority(v).is_some())
        .collect();
    let exact = companions == states;
    (h, EdgeTagging { back_of, companions_exact: exact })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compile::compile_sfor;
    use crate::formula::parse;

    #[test]
    fn single_atom() {
        let g = ParityFormula {
            verts: vec![crate::parity::Vertex {
                id: "a".into(),
                label: Label::Lit(Var::new("p"), true),
                priority: None,
            }],
            succ: vec![vec![]],
            initial: 0,
            tagging: None,
        };
        let tr = decompile(&g).unwrap();
        assert_eq!(tr[&0], parse("p").unwrap());
    }

    #[test]
    fn self_loop_mu() {
        // a single odd state looping through a diamond: mu a. <>a
        let g = ParityFormula {
            verts: vec![
                crate::parity::Vertex { id: "a".into(), label: Label::Eps, priority: Some(1) },
                crate::parity::Vertex { id: "d".into(), label: Label::Dia, priority: None },
            ],
            succ: vec![vec![1], vec![0]],
            initial: 0,
            tagging: None,
        };
        let f = decompile_initial(&g).unwrap();
        let expected =
            Formula::mu(vertex_var("a"), Formula::dia(Formula::var(vertex_var("a")))).unwrap();
        assert_eq!(f, expected);
    }

    #[test]
    fn untwisted_roundtrip_small() {
        for s in [
            "mu x. (~p \\/ <>x)",
            "nu y. (q /\\ [](p \\/ y))",
            "mu x. (~p \\/ <>x) \\/ nu y. (q /\\ [](x \\/ y))",
            "nu x. mu y. (p /\\ <>x) \\/ <>y",
            "p /\\ p",
        ] {
            let f = parse(s).unwrap();
            let h = compile_sfor(&f).unwrap();
            let t = decompile_untwisted(&h).unwrap();
            assert!(
                crate::alpha::alpha_eq(&t.formula, &f),
                "{} came back as {}",
                s,
                t.formula
            );
            assert!(crate::formula::ssz(&t.formula) <= 2 * h.size());
        }
    }

    #[test]
    fn acyclic_untwisted_is_fixpoint_free() {
        let f = parse("(p /\\ []q) \\/ <>~p").unwrap();
        let h = compile_sfor(&f).unwrap();
        let t = decompile_untwisted(&h).unwrap();
        assert_eq!(t.formula.fdep(), 0);
        assert_eq!(crate::alternation::ad_tidy(&t.formula).unwrap(), 0);
    }
}
