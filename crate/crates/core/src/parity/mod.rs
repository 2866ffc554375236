//! Parity formulas: rooted labelled priority graphs with the game
//! semantics of alternating tree automata.

mod json;
mod morphism;
mod priority;
mod untwisted;

pub use json::{from_json, to_dot, to_json};
pub use morphism::{check_morphism, largest_congruence, quotient, Congruence};
pub use priority::{induced_priority, tighten, ParityPreorder};
pub use untwisted::{untwisted_decompose, EdgeTagging};

use crate::alternation::tarjan_scc;
use crate::formula::{Parity, Var};
use std::collections::BTreeSet;
use std::fmt;

/// Vertex labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Label {
    Top,
    Bot,
    /// `Lit(p, true)` is `p`, `Lit(p, false)` is `~p`.
    Lit(Var, bool),
    And,
    Or,
    Dia,
    Box,
    Eps,
}

impl Label {
    pub fn is_atomic(&self) -> bool {
        matches!(self, Label::Top | Label::Bot | Label::Lit(..))
    }
    pub fn is_boolean(&self) -> bool {
        matches!(self, Label::And | Label::Or)
    }
    pub fn is_modal(&self) -> bool {
        matches!(self, Label::Dia | Label::Box)
    }
    pub fn is_silent(&self) -> bool {
        matches!(self, Label::Eps)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Top => write!(f, "true"),
            Label::Bot => write!(f, "false"),
            Label::Lit(v, true) => write!(f, "{}", v),
            Label::Lit(v, false) => write!(f, "~{}", v),
            Label::And => write!(f, "/\\"),
            Label::Or => write!(f, "\\/"),
            Label::Dia => write!(f, "<>"),
            Label::Box => write!(f, "[]"),
            Label::Eps => write!(f, "eps"),
        }
    }
}

/// A vertex of a parity formula.
#[derive(Debug, Clone)]
pub struct Vertex {
    pub id: String,
    pub label: Label,
    pub priority: Option<u32>,
}

/// A parity formula `(V, E, L, Omega, v_I)`.
///
/// Successor lists are ordered and may repeat a target (a conjunction
/// with two equal operands); all relational notions (clusters, validity,
/// morphisms) read them as sets.
#[derive(Debug, Clone)]
pub struct ParityFormula {
    pub verts: Vec<Vertex>,
    pub succ: Vec<Vec<usize>>,
    pub initial: usize,
    /// Optional dag/back-edge decomposition, kept as the set of edges
    /// classified as back edges.
    pub tagging: Option<EdgeTagging>,
}

/// Total order on vertex identifiers: by length, then bytes. This fixes
/// a global enumeration of potential vertices used for tie-breaking.
pub fn id_order(a: &str, b: &str) -> std::cmp::Ordering {
    (a.len(), a.as_bytes()).cmp(&(b.len(), b.as_bytes()))
}

impl ParityFormula {
    pub fn size(&self) -> usize {
        self.verts.len()
    }

    pub fn label(&self, v: usize) -> &Label {
        &self.verts[v].label
    }

    pub fn priority(&self, v: usize) -> Option<u32> {
        self.verts[v].priority
    }

    pub fn is_state(&self, v: usize) -> bool {
        self.verts[v].priority.is_some()
    }

    pub fn states(&self) -> Vec<usize> {
        (0..self.size()).filter(|&v| self.is_state(v)).collect()
    }

    pub fn index_of_id(&self, id: &str) -> Option<usize> {
        self.verts.iter().position(|v| v.id == id)
    }

    /// Deduplicated successor set.
    pub fn succ_set(&self, v: usize) -> Vec<usize> {
        let s: BTreeSet<usize> = self.succ[v].iter().copied().collect();
        s.into_iter().collect()
    }

    /// Checks the arity and cycle conditions; returns all violations.
    pub fn validate(&self) -> Vec<String> {
        let mut bad = Vec::new();
        if self.initial >= self.size() {
            bad.push("initial vertex out of range".to_string());
            return bad;
        }
        for v in 0..self.size() {
            let deg = self.succ[v].len();
            match self.label(v) {
                Label::Top | Label::Bot | Label::Lit(..) => {
                    if deg != 0 {
                        bad.push(format!(
                            "atomic vertex {} has {} successors",
                            self.verts[v].id, deg
                        ));
                    }
                }
                Label::Dia | Label::Box | Label::Eps => {
                    if deg != 1 {
                        bad.push(format!(
                            "vertex {} with label {} has {} successors, wants 1",
                            self.verts[v].id,
                            self.label(v),
                            deg
                        ));
                    }
                }
                Label::And | Label::Or => {
                    if deg > 2 {
                        bad.push(format!(
                            "boolean vertex {} has {} successors, wants at most 2",
                            self.verts[v].id, deg
                        ));
                    }
                }
            }
            for &w in &self.succ[v] {
                if w >= self.size() {
                    bad.push(format!("edge from {} out of range", self.verts[v].id));
                }
            }
        }
        // every cycle must contain a state: remove states, check acyclicity
        let filtered: Vec<Vec<usize>> = (0..self.size())
            .map(|v| {
                if self.is_state(v) {
                    Vec::new()
                } else {
                    self.succ_set(v).into_iter().filter(|&w| !self.is_state(w)).collect()
                }
            })
            .collect();
        let (_, comps) = tarjan_scc(&filtered);
        for comp in comps {
            let cyc = comp.len() > 1
                || (comp.len() == 1 && filtered[comp[0]].contains(&comp[0]));
            if cyc {
                bad.push(format!(
                    "cycle through {{{}}} avoids the priority map",
                    comp.iter().map(|&v| self.verts[v].id.as_str()).collect::<Vec<_>>().join(",")
                ));
            }
        }
        bad
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    /// Clusters: equivalence classes of mutual reachability through at
    /// least one edge. Returns (cluster id per vertex, clusters,
    /// degenerate flags, strict higher-than pairs between cluster ids).
    pub fn clusters(&self) -> ClusterInfo {
        let adj: Vec<Vec<usize>> = (0..self.size()).map(|v| self.succ_set(v)).collect();
        let (comp_of, comps) = tarjan_scc(&adj);
        let degenerate: Vec<bool> = comps
            .iter()
            .map(|c| c.len() == 1 && !adj[c[0]].contains(&c[0]))
            .collect();
        // higher-than: C higher than C' iff C reaches C' in the condensation
        let m = comps.len();
        let mut reach = vec![vec![false; m]; m];
        for v in 0..self.size() {
            for &w in &adj[v] {
                if comp_of[v] != comp_of[w] {
                    reach[comp_of[v]][comp_of[w]] = true;
                }
            }
        }
        for k in 0..m {
            for i in 0..m {
                if reach[i][k] {
                    for j in 0..m {
                        if reach[k][j] {
                            reach[i][j] = true;
                        }
                    }
                }
            }
        }
        let mut higher = Vec::new();
        for i in 0..m {
            for j in 0..m {
                if i != j && reach[i][j] {
                    higher.push((i, j));
                }
            }
        }
        ClusterInfo { comp_of, comps, degenerate, higher }
    }

    /// The index: the maximal length of an alternating priority chain
    /// within a cluster; zero when there are no states.
    pub fn index(&self) -> u32 {
        let info = self.clusters();
        let mut best = 0;
        for (c, comp) in info.comps.iter().enumerate() {
            if info.degenerate[c] {
                continue;
            }
            best = best.max(self.cluster_index(comp));
        }
        best
    }

    fn cluster_index(&self, comp: &[usize]) -> u32 {
        let states: Vec<usize> = comp.iter().copied().filter(|&v| self.is_state(v)).collect();
        let mut order: Vec<usize> = states.clone();
        order.sort_by_key(|&v| self.priority(v).unwrap());
        let mut best = vec![0u32; order.len()];
        let mut out = 0;
        for i in 0..order.len() {
            let pi = self.priority(order[i]).unwrap();
            let mut b = 1;
            for j in 0..i {
                let pj = self.priority(order[j]).unwrap();
                if pj < pi && (pj % 2) != (pi % 2) {
                    b = b.max(best[j] + 1);
                }
            }
            best[i] = b;
            out = out.max(b);
        }
        out
    }

    /// Per-parity index of a cluster: longest alternating chain ending in
    /// a state of the given parity.
    pub fn cluster_index_eta(&self, comp: &[usize], eta: Parity) -> u32 {
        let states: Vec<usize> = comp.iter().copied().filter(|&v| self.is_state(v)).collect();
        let mut order: Vec<usize> = states;
        order.sort_by_key(|&v| self.priority(v).unwrap());
        let mut best = vec![0u32; order.len()];
        let mut out = 0;
        for i in 0..order.len() {
            let pi = self.priority(order[i]).unwrap();
            let mut b = 1;
            for j in 0..i {
                let pj = self.priority(order[j]).unwrap();
                if pj < pi && (pj % 2) != (pi % 2) {
                    b = b.max(best[j] + 1);
                }
            }
            best[i] = b;
            if eta.matches(pi) {
                out = out.max(b);
            }
        }
        out
    }

    /// The subformula generated from `v`: the restriction to vertices
    /// reachable from `v`, with `v` initial.
    pub fn generated(&self, v: usize) -> ParityFormula {
        let mut keep = vec![false; self.size()];
        let mut work = vec![v];
        keep[v] = true;
        while let Some(u) = work.pop() {
            for &w in &self.succ[u] {
                if !keep[w] {
                    keep[w] = true;
                    work.push(w);
                }
            }
        }
        self.restrict(&keep, v)
    }

    /// Restriction to the flagged vertices; `init` must be flagged.
    pub fn restrict(&self, keep: &[bool], init: usize) -> ParityFormula {
        let mut map = vec![usize::MAX; self.size()];
        let mut verts = Vec::new();
        let mut succ = Vec::new();
        for v in 0..self.size() {
            if keep[v] {
                map[v] = verts.len();
                verts.push(self.verts[v].clone());
                succ.push(Vec::new());
            }
        }
        for v in 0..self.size() {
            if keep[v] {
                succ[map[v]] =
                    self.succ[v].iter().filter(|&&w| keep[w]).map(|&w| map[w]).collect();
            }
        }
        let tagging = self.tagging.as_ref().map(|t| t.remap(&map));
        ParityFormula { verts, succ, initial: map[init], tagging }
    }

    /// Drops vertices unreachable from the initial vertex.
    pub fn prune_unreachable(&self) -> ParityFormula {
        self.generated(self.initial)
    }

    /// Re-enumerates priorities injectively while preserving the parity
    /// variant conditions (same parities, same relative order between
    /// states of different parity in a cluster).
    pub fn linearize(&self) -> ParityFormula {
        let mut states = self.states();
        states.sort_by(|&a, &b| {
            self.priority(a)
                .unwrap()
                .cmp(&self.priority(b).unwrap())
                .then_with(|| id_order(&self.verts[a].id, &self.verts[b].id))
        });
        let mut out = self.clone();
        let mut next: i64 = -1;
        for v in states {
            let old = self.priority(v).unwrap() as i64;
            let mut cand = next + 1;
            if (cand - old).rem_euclid(2) != 0 {
                cand += 1;
            }
            out.verts[v].priority = Some(cand as u32);
            next = cand;
        }
        out
    }

    /// Fresh unique id based on `base`.
    pub fn fresh_id(&self, base: &str) -> String {
        let mut k = 0;
        loop {
            let cand = if k == 0 { base.to_string() } else { format!("{}+{}", base, k) };
            if self.verts.iter().all(|v| v.id != cand) {
                return cand;
            }
            k += 1;
        }
    }

    /// Letters occurring in literal labels.
    pub fn letters(&self) -> Vec<Var> {
        let mut s: BTreeSet<Var> = BTreeSet::new();
        for v in &self.verts {
            if let Label::Lit(p, _) = &v.label {
                s.insert(p.clone());
            }
        }
        s.into_iter().collect()
    }
}

/// Cluster decomposition of a parity formula.
#[derive(Debug, Clone)]
pub struct ClusterInfo {
    pub comp_of: Vec<usize>,
    pub comps: Vec<Vec<usize>>,
    pub degenerate: Vec<bool>,
    /// Strict higher-than pairs (higher cluster id, lower cluster id).
    pub higher: Vec<(usize, usize)>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vx(id: &str, label: Label, pr: Option<u32>) -> Vertex {
        Vertex { id: id.to_string(), label, priority: pr }
    }

    #[test]
    fn validate_flags_atom_with_successor() {
        let g = ParityFormula {
            verts: vec![
                vx("a", Label::Top, None),
                vx("b", Label::Or, None),
            ],
            succ: vec![vec![1], vec![]],
            initial: 0,
            tagging: None,
        };
        assert!(!g.is_valid());
    }

    #[test]
    fn validate_flags_eps_cycle_without_state() {
        let g = ParityFormula {
            verts: vec![vx("a", Label::Eps, None), vx("b", Label::Eps, None)],
            succ: vec![vec![1], vec![0]],
            initial: 0,
            tagging: None,
        };
        assert!(!g.is_valid());
        let mut h = g.clone();
        h.verts[0].priority = Some(1);
        assert!(h.is_valid());
    }

    #[test]
    fn index_of_single_state() {
        let g = ParityFormula {
            verts: vec![vx("a", Label::Eps, Some(2))],
            succ: vec![vec![0]],
            initial: 0,
            tagging: None,
        };
        assert!(g.is_valid());
        assert_eq!(g.index(), 1);
    }

    #[test]
    fn acyclic_formula_has_all_degenerate_clusters_and_index_zero() {
        let g = ParityFormula {
            verts: vec![
                vx("a", Label::And, None),
                vx("p", Label::Lit(Var::new("p"), true), None),
                vx("q", Label::Lit(Var::new("q"), true), None),
            ],
            succ: vec![vec![1, 2], vec![], vec![]],
            initial: 0,
            tagging: None,
        };
        let info = g.clusters();
        assert!(info.degenerate.iter().all(|&d| d));
        assert_eq!(g.index(), 0);
    }

    #[test]
    fn linearize_is_injective_and_parity_preserving() {
        let g = ParityFormula {
            verts: vec![
                vx("a", Label::Eps, Some(1)),
                vx("b", Label::Eps, Some(1)),
                vx("c", Label::Eps, Some(2)),
            ],
            succ: vec![vec![1], vec![2], vec![0]],
            initial: 0,
            tagging: None,
        };
        let l = g.linearize();
        let ps: Vec<u32> = (0..3).map(|v| l.priority(v).unwrap()).collect();
        let mut sorted = ps.clone();
        sorted.dedup();
        assert_eq!(sorted.len(), 3);
        for v in 0..3 {
            assert_eq!(l.priority(v).unwrap() % 2, g.priority(v).unwrap() % 2);
        }
        assert_eq!(l.index(), g.index());
    }
}
