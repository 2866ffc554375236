//! Morphisms between parity formulas, congruences and quotients.

use super::{id_order, ParityFormula};
use std::collections::{BTreeMap, BTreeSet};

/// Checks the five morphism clauses for a total vertex map `f` from `g`
/// to `h`: labels, forth, back, priorities, initial vertex.
pub fn check_morphism(f: &[usize], g: &ParityFormula, h: &ParityFormula) -> bool {
    if f.len() != g.size() || f.iter().any(|&v| v >= h.size()) {
        return false;
    }
    for u in 0..g.size() {
        if g.label(u) != h.label(f[u]) {
            return false;
        }
        if g.priority(u) != h.priority(f[u]) {
            return false;
        }
        // forth
        for &v in &g.succ_set(u) {
            if !h.succ_set(f[u]).contains(&f[v]) {
                return false;
            }
        }
        // back
        for &w in &h.succ_set(f[u]) {
            if !g.succ_set(u).iter().any(|&v| f[v] == w) {
                return false;
            }
        }
    }
    f[g.initial] == h.initial
}

/// An equivalence partition of the vertex set that respects labels,
/// priorities and successor transfer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Congruence {
    /// Cell id per vertex.
    pub cell_of: Vec<usize>,
    /// Members of each cell, sorted.
    pub cells: Vec<Vec<usize>>,
}

impl Congruence {
    pub fn from_cells(n: usize, raw: Vec<Vec<usize>>) -> Congruence {
        let mut cell_of = vec![usize::MAX; n];
        let mut cells = raw;
        for c in &mut cells {
            c.sort_unstable();
        }
        cells.sort();
        for (i, c) in cells.iter().enumerate() {
            for &v in c {
                cell_of[v] = i;
            }
        }
        Congruence { cell_of, cells }
    }

    pub fn identity(n: usize) -> Congruence {
        Congruence::from_cells(n, (0..n).map(|v| vec![v]).collect())
    }

    /// Checks the congruence conditions over `g`.
    pub fn check(&self, g: &ParityFormula) -> bool {
        for cell in &self.cells {
            for &u in cell {
                for &u2 in cell {
                    if g.label(u) != g.label(u2) || g.priority(u) != g.priority(u2) {
                        return false;
                    }
                    for &v in &g.succ_set(u) {
                        if !g.succ_set(u2).iter().any(|&v2| self.cell_of[v] == self.cell_of[v2]) {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    /// Join: finest common coarsening (transitive closure of the union),
    /// a congruence again whenever both inputs are.
    pub fn join(&self, other: &Congruence) -> Congruence {
        let n = self.cell_of.len();
        // union-find over both partitions
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut Vec<usize>, v: usize) -> usize {
            if parent[v] != v {
                let r = find(parent, parent[v]);
                parent[v] = r;
            }
            parent[v]
        }
        for part in [&self.cells, &other.cells] {
            for cell in part {
                for w in cell.windows(2) {
                    let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
                    if a != b {
                        parent[a] = b;
                    }
                }
            }
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for v in 0..n {
            let r = find(&mut parent, v);
            groups.entry(r).or_default().push(v);
        }
        Congruence::from_cells(n, groups.into_values().collect())
    }
}

/// The coarsest congruence on `g`, by partition refinement seeded on
/// (label, priority).
pub fn largest_congruence(g: &ParityFormula) -> Congruence {
    largest_congruence_below(g, None)
}

/// Partition refinement starting from an optional initial partition
/// (used by tests to produce further congruences); the default seed
/// groups vertices by (label, priority).
pub fn largest_congruence_below(
    g: &ParityFormula,
    start: Option<&Congruence>,
) -> Congruence {
    let n = g.size();
    let mut cell_of: Vec<usize> = match start {
        Some(c) => c.cell_of.clone(),
        None => {
            let mut key_to_cell: BTreeMap<(String, Option<u32>), usize> = BTreeMap::new();
            let mut out = vec![0; n];
            for v in 0..n {
                let key = (format!("{}", g.label(v)), g.priority(v));
                let next = key_to_cell.len();
                let id = *key_to_cell.entry(key).or_insert(next);
                out[v] = id;
            }
            out
        }
    };
    loop {
        // signature: own cell + set of successor cells
        let mut sig_to_cell: BTreeMap<(usize, BTreeSet<usize>), usize> = BTreeMap::new();
        let mut next_cell = vec![0; n];
        for v in 0..n {
            let sig: BTreeSet<usize> = g.succ_set(v).iter().map(|&w| cell_of[w]).collect();
            let key = (cell_of[v], sig);
            let fresh = sig_to_cell.len();
            next_cell[v] = *sig_to_cell.entry(key).or_insert(fresh);
        }
        if next_cell == cell_of {
            break;
        }
        cell_of = next_cell;
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for v in 0..n {
        groups.entry(cell_of[v]).or_default().push(v);
    }
    Congruence::from_cells(n, groups.into_values().collect())
}

/// The quotient of `g` under a congruence. Cell ids are the least member
/// id of each cell in the vertex-id order.
pub fn quotient(g: &ParityFormula, cong: &Congruence) -> ParityFormula {
    let mut verts = Vec::new();
    let mut succ = Vec::new();
    for cell in &cong.cells {
        let rep = *cell
            .iter()
            .min_by(|&&a, &&b| id_order(&g.verts[a].id, &g.verts[b].id))
            .unwrap();
        verts.push(g.verts[rep].clone());
        let ss: Vec<usize> = {
            let mut s: Vec<usize> =
                g.succ_set(rep).iter().map(|&w| cong.cell_of[w]).collect();
            s.sort_unstable();
            s.dedup();
            s
        };
        succ.push(ss);
    }
    ParityFormula { verts, succ, initial: cong.cell_of[g.initial], tagging: None }
}

/// The kernel of a vertex map: cells of equal image.
pub fn kernel(f: &[usize]) -> Congruence {
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (v, &w) in f.iter().enumerate() {
        groups.entry(w).or_default().push(v);
    }
    Congruence::from_cells(f.len(), groups.into_values().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::Var;
    use crate::parity::{Label, Vertex};

    fn twin_loops() -> ParityFormula {
        // initial disjunction over two isomorphic dia-loops
        let v = |id: &str, l: Label, p: Option<u32>| Vertex {
            id: id.into(),
            label: l,
            priority: p,
        };
        ParityFormula {
            verts: vec![
                v("r", Label::Or, None),
                v("a", Label::Dia, Some(2)),
                v("b", Label::Dia, Some(2)),
            ],
            succ: vec![vec![1, 2], vec![1], vec![2]],
            initial: 0,
            tagging: None,
        }
    }

    #[test]
    fn identity_is_morphism() {
        let g = twin_loops();
        let id: Vec<usize> = (0..g.size()).collect();
        assert!(check_morphism(&id, &g, &g));
    }

    #[test]
    fn isomorphic_loops_merge() {
        let g = twin_loops();
        let c = largest_congruence(&g);
        assert_eq!(c.cell_of[1], c.cell_of[2]);
        assert!(c.check(&g));
        let q = quotient(&g, &c);
        assert_eq!(q.size(), 2);
        assert!(q.is_valid());
        // quotient map is a morphism
        let f: Vec<usize> = c.cell_of.clone();
        assert!(check_morphism(&f, &g, &q));
        // kernel of the quotient map is a congruence
        assert!(kernel(&f).check(&g));
    }

    #[test]
    fn distinct_labels_yield_identity() {
        let v = |id: &str, l: Label| Vertex { id: id.into(), label: l, priority: None };
        let g = ParityFormula {
            verts: vec![
                v("r", Label::And),
                v("p", Label::Lit(Var::new("p"), true)),
                v("q", Label::Lit(Var::new("q"), true)),
            ],
            succ: vec![vec![1, 2], vec![], vec![]],
            initial: 0,
            tagging: None,
        };
        let c = largest_congruence(&g);
        assert_eq!(c.cells.len(), 3);
    }

    #[test]
    fn congruence_join_is_congruence() {
        let g = twin_loops();
        let top = largest_congruence(&g);
        let id = Congruence::identity(g.size());
        let j = id.join(&top);
        assert_eq!(j, top);
        assert!(j.check(&g));
    }
}
