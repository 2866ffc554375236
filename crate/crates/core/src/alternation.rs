//! Alternation-depth machinery: the dependency order on bound variables
//! of clean formulas, the closure priority order on tidy formulas, and
//! membership in the Niwinski classes.

use crate::error::{Error, Result};
use crate::formula::{
    closure, print, tidy_variant, ClosureGraph, Formula, Parity, Var,
};
use std::collections::HashSet;

/// The dependency order `x < y` on the bound variables of a clean
/// formula: the least strict partial order with `x < y` whenever
/// `delta_x` is a proper subformula of `delta_y` and `y` is free in
/// `delta_x`.
#[derive(Debug, Clone)]
pub struct DependencyOrder {
    vars: Vec<Var>,
    parity: Vec<Parity>,
    /// `lt[i][j]` iff `vars[i] < vars[j]`, transitively closed.
    lt: Vec<Vec<bool>>,
}

impl DependencyOrder {
    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn parity_of(&self, x: &Var) -> Option<Parity> {
        self.vars.iter().position(|v| v == x).map(|i| self.parity[i])
    }

    pub fn less(&self, x: &Var, y: &Var) -> bool {
        match (self.vars.iter().position(|v| v == x), self.vars.iter().position(|v| v == y)) {
            (Some(i), Some(j)) => self.lt[i][j],
            _ => false,
        }
    }

    /// Variables listed so that smaller ones come first; ties broken by
    /// name for determinism.
    pub fn topological(&self) -> Vec<Var> {
        let n = self.vars.len();
        let mut order: Vec<usize> = (0..n).collect();
        // Kahn over the strict order; `vars` is already name-sorted.
        let mut placed = vec![false; n];
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let next = order
                .iter()
                .copied()
                .find(|&i| {
                    !placed[i]
                        && (0..n).all(|j| placed[j] || !self.lt[j][i])
                })
                .expect("dependency order is acyclic");
            placed[next] = true;
            out.push(self.vars[next].clone());
            order.retain(|&i| i != next);
        }
        out
    }

    /// Longest alternating chain, together with one witness (listed from
    /// least to greatest variable).
    pub fn longest_alternating_chain(&self) -> (u32, Vec<Var>) {
        let n = self.vars.len();
        // best[i]: longest alternating chain with vars[i] as its maximum
        let mut best = vec![1u32; n];
        let mut pred: Vec<Option<usize>> = vec![None; n];
        // process in topological order (indices with no smaller element first)
        let topo: Vec<usize> = {
            let mut placed = vec![false; n];
            let mut out = Vec::new();
            while out.len() < n {
                for i in 0..n {
                    if !placed[i] && (0..n).all(|j| placed[j] || !self.lt[j][i]) {
                        placed[i] = true;
                        out.push(i);
                        break;
                    }
                }
            }
            out
        };
        for &i in &topo {
            for &j in &topo {
                if self.lt[j][i] && self.parity[j] != self.parity[i] && best[j] + 1 > best[i] {
                    best[i] = best[j] + 1;
                    pred[i] = Some(j);
                }
            }
        }
        if n == 0 {
            return (0, Vec::new());
        }
        let (mut at, _) = best
            .iter()
            .enumerate()
            .max_by_key(|(i, b)| (**b, std::cmp::Reverse(*i)))
            .map(|(i, b)| (i, *b))
            .unwrap();
        let depth = best[at];
        let mut chain = vec![self.vars[at].clone()];
        while let Some(p) = pred[at] {
            chain.push(self.vars[p].clone());
            at = p;
        }
        chain.reverse();
        (depth, chain)
    }

    /// Longest alternating chain whose maximum is `x` (at least 1 when
    /// `x` is a bound variable).
    pub fn chain_height_at(&self, x: &Var) -> u32 {
        let n = self.vars.len();
        let Some(target) = self.vars.iter().position(|v| v == x) else { return 0 };
        let mut memo: Vec<Option<u32>> = vec![None; n];
        fn go(i: usize, d: &DependencyOrder, memo: &mut Vec<Option<u32>>) -> u32 {
            if let Some(v) = memo[i] {
                return v;
            }
            let mut best = 1;
            for j in 0..d.vars.len() {
                if d.lt[j][i] && d.parity[j] != d.parity[i] {
                    best = best.max(1 + go(j, d, memo));
                }
            }
            memo[i] = Some(best);
            best
        }
        go(target, self, &mut memo)
    }
}

/// Computes the dependency order of a clean formula.
pub fn dependency_order(xi: &Formula) -> Result<DependencyOrder> {
    let binders = xi.binders()?;
    let vars: Vec<Var> = binders.keys().cloned().collect();
    let parity: Vec<Parity> = vars.iter().map(|x| binders[x].0).collect();
    let n = vars.len();
    let mut lt = vec![vec![false; n]; n];
    for (i, x) in vars.iter().enumerate() {
        for (j, y) in vars.iter().enumerate() {
            if i == j {
                continue;
            }
            let dx = &binders[x].1;
            let dy = &binders[y].1;
            // delta_x a proper subformula of delta_y, with y free in delta_x
            if dx != dy
                && dx.is_subformula_of(dy)
                && dx.fv().iter().any(|v| v == y)
            {
                lt[i][j] = true;
            }
        }
    }
    // transitive closure
    for k in 0..n {
        for i in 0..n {
            if lt[i][k] {
                for j in 0..n {
                    if lt[k][j] {
                        lt[i][j] = true;
                    }
                }
            }
        }
    }
    for (i, row) in lt.iter().enumerate() {
        if row[i] {
            return Err(Error::NotClean(format!(
                "dependency order is cyclic at {}",
                vars[i]
            )));
        }
    }
    Ok(DependencyOrder { vars, parity, lt })
}

/// Alternation depth of a clean formula as the longest alternating
/// dependency chain, with a witness chain.
pub fn ad_clean(xi: &Formula) -> Result<(u32, Vec<Var>)> {
    Ok(dependency_order(xi)?.longest_alternating_chain())
}

/// The closure priority order of a closure graph: clusters, the relation
/// on fixpoint formulas, ascending/descending alternation heights and
/// per-cluster closure depths.
#[derive(Debug, Clone)]
pub struct ClosureOrder {
    /// Cluster id per closure-graph node.
    pub cluster_of: Vec<usize>,
    /// Nodes of each cluster.
    pub clusters: Vec<Vec<usize>>,
    /// Indices (into the closure graph) of fixpoint formulas.
    pub fix_nodes: Vec<usize>,
    /// `leq[a][b]` iff `fix_nodes[a] <= fix_nodes[b]` in the closure order.
    pub leq: Vec<Vec<bool>>,
    /// Max alternating chain starting at each fixpoint node (ascending).
    pub h_up: Vec<u32>,
    /// Max alternating chain leading up to each fixpoint node.
    pub h_down: Vec<u32>,
    /// Closure depth per cluster.
    pub cd: Vec<u32>,
    /// Per-parity closure depth per cluster (mu, nu).
    pub cd_mu: Vec<u32>,
    pub cd_nu: Vec<u32>,
    /// Parity per fixpoint node (parallel to `fix_nodes`).
    pub parities: Vec<Parity>,
}

impl ClosureOrder {
    pub fn fix_pos(&self, node: usize) -> Option<usize> {
        self.fix_nodes.iter().position(|&n| n == node)
    }

    /// Closure depth of the whole graph.
    pub fn cd_max(&self) -> u32 {
        self.cd.iter().copied().max().unwrap_or(0)
    }

    pub fn cd_eta_max(&self, eta: Parity) -> u32 {
        let v = match eta {
            Parity::Mu => &self.cd_mu,
            Parity::Nu => &self.cd_nu,
        };
        v.iter().copied().max().unwrap_or(0)
    }

    /// One longest alternating chain (as closure-graph node indices).
    pub fn witness_chain(&self, g: &ClosureGraph) -> Vec<usize> {
        let _ = g;
        let n = self.fix_nodes.len();
        if n == 0 {
            return Vec::new();
        }
        // reconstruct from h_down by walking predecessors
        let (mut at, _) = (0..n)
            .map(|i| (i, self.h_down[i]))
            .max_by_key(|&(i, h)| (h, std::cmp::Reverse(i)))
            .unwrap();
        let mut chain = vec![self.fix_nodes[at]];
        'outer: while self.h_down[at] > 1 {
            for b in 0..n {
                if b != at
                    && self.leq[b][at]
                    && !self.leq[at][b]
                    && self.parity_at(b) != self.parity_at(at)
                    && self.h_down[b] == self.h_down[at] - 1
                {
                    chain.push(self.fix_nodes[b]);
                    at = b;
                    continue 'outer;
                }
            }
            break;
        }
        chain.reverse();
        chain
    }

    fn parity_at(&self, i: usize) -> Parity {
        self.parities[i]
    }
}

/// Tarjan SCC on an adjacency list, iterative.
pub(crate) fn tarjan_scc(succ: &[Vec<usize>]) -> (Vec<usize>, Vec<Vec<usize>>) {
    let n = succ.len();
    let mut idx = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut comp_of = vec![usize::MAX; n];
    let mut comps: Vec<Vec<usize>> = Vec::new();
    let mut counter = 0usize;

    #[derive(Clone)]
    struct Frame {
        v: usize,
        child: usize,
    }

    for root in 0..n {
        if idx[root] != usize::MAX {
            continue;
        }
        let mut call = vec![Frame { v: root, child: 0 }];
        idx[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(fr) = call.last().cloned() {
            let v = fr.v;
            if fr.child < succ[v].len() {
                let w = succ[v][fr.child];
                call.last_mut().unwrap().child += 1;
                if idx[w] == usize::MAX {
                    idx[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push(Frame { v: w, child: 0 });
                } else if on_stack[w] {
                    low[v] = low[v].min(idx[w]);
                }
            } else {
                call.pop();
                if let Some(parent) = call.last() {
                    let p = parent.v;
                    low[p] = low[p].min(low[v]);
                }
                if low[v] == idx[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("stack underflow");
                        on_stack[w] = false;
                        comp_of[w] = comps.len();
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    comps.push(comp);
                }
            }
        }
    }
    (comp_of, comps)
}

/// Computes the closure order of a closure graph.
pub fn closure_order(g: &ClosureGraph) -> ClosureOrder {
    let n = g.len();
    let succs: Vec<Vec<usize>> = (0..n).map(|i| g.succs(i).to_vec()).collect();
    let (cluster_of, clusters) = tarjan_scc(&succs);

    let fix_nodes: Vec<usize> = (0..n).filter(|&i| g.node(i).is_fixpoint()).collect();
    let k = fix_nodes.len();
    let parities: Vec<Parity> =
        fix_nodes.iter().map(|&i| g.node(i).as_fixpoint().unwrap().0).collect();

    // psi-relative free-subformula cache
    let mut leq = vec![vec![false; k]; k];
    for (b, &psi_node) in fix_nodes.iter().enumerate() {
        let psi = g.node(psi_node).clone();
        // nodes rho with psi a free subformula of rho
        let mut admissible = vec![false; n];
        for i in 0..n {
            admissible[i] =
                crate::formula::is_free_subformula(&psi, g.node(i)).unwrap_or(false);
        }
        if !admissible[psi_node] {
            continue;
        }
        // reachability from psi within admissible nodes
        let mut seen = vec![false; n];
        let mut work = vec![psi_node];
        seen[psi_node] = true;
        while let Some(i) = work.pop() {
            for &j in g.succs(i) {
                if admissible[j] && !seen[j] {
                    seen[j] = true;
                    work.push(j);
                }
            }
        }
        for (a, &phi_node) in fix_nodes.iter().enumerate() {
            if seen[phi_node] {
                // phi <= psi in the closure order
                leq[a][b] = true;
            }
        }
    }

    // strict part, alternating heights
    let strict = |a: usize, b: usize| leq[a][b] && !leq[b][a];
    let mut h_up = vec![0u32; k];
    let mut h_down = vec![0u32; k];
    // longest path DP over the strict order (acyclic), alternating steps
    fn dfs_up(
        a: usize,
        k: usize,
        strict: &dyn Fn(usize, usize) -> bool,
        parities: &[Parity],
        memo: &mut Vec<Option<u32>>,
    ) -> u32 {
        if let Some(v) = memo[a] {
            return v;
        }
        let mut best = 1;
        for b in 0..k {
            if strict(a, b) && parities[a] != parities[b] {
                best = best.max(1 + dfs_up(b, k, strict, parities, memo));
            }
        }
        memo[a] = Some(best);
        best
    }
    fn dfs_down(
        a: usize,
        k: usize,
        strict: &dyn Fn(usize, usize) -> bool,
        parities: &[Parity],
        memo: &mut Vec<Option<u32>>,
    ) -> u32 {
        if let Some(v) = memo[a] {
            return v;
        }
        let mut best = 1;
        for b in 0..k {
            if strict(b, a) && parities[a] != parities[b] {
                best = best.max(1 + dfs_down(b, k, strict, parities, memo));
            }
        }
        memo[a] = Some(best);
        best
    }
    let mut memo_up = vec![None; k];
    let mut memo_down = vec![None; k];
    for a in 0..k {
        h_up[a] = dfs_up(a, k, &strict, &parities, &mut memo_up);
        h_down[a] = dfs_down(a, k, &strict, &parities, &mut memo_down);
    }

    let m = clusters.len();
    let mut cd = vec![0u32; m];
    let mut cd_mu = vec![0u32; m];
    let mut cd_nu = vec![0u32; m];
    for (a, &node) in fix_nodes.iter().enumerate() {
        let c = cluster_of[node];
        cd[c] = cd[c].max(h_up[a]).max(h_down[a]);
        match parities[a] {
            Parity::Mu => cd_mu[c] = cd_mu[c].max(h_down[a]),
            Parity::Nu => cd_nu[c] = cd_nu[c].max(h_down[a]),
        }
    }

    ClosureOrder {
        cluster_of,
        clusters,
        fix_nodes,
        leq,
        h_up,
        h_down,
        cd,
        cd_mu,
        cd_nu,
        parities,
    }
}

/// Alternation depth of a tidy formula, via the closure order. Untidy
/// inputs are tidied first (alternation depth is invariant under
/// renaming of bound variables).
pub fn ad_tidy(xi: &Formula) -> Result<u32> {
    let f = if xi.is_tidy() { xi.clone() } else { tidy_variant(xi) };
    let g = closure(&f)?;
    Ok(closure_order(&g).cd_max())
}

/// Membership of a tidy formula in the Niwinski class `AH^eta_n`,
/// decided by the chain characterisation of the closure order.
pub fn ah_member(xi: &Formula, eta: Parity, n: u32) -> Result<bool> {
    let f = if xi.is_tidy() { xi.clone() } else { tidy_variant(xi) };
    let g = closure(&f)?;
    Ok(closure_order(&g).cd_eta_max(eta) <= n)
}

/// Alternation depth of an arbitrary formula (tidied if necessary).
pub fn ad(xi: &Formula) -> Result<u32> {
    ad_tidy(xi)
}

/// Checks that two variables are related in every cluster sense used by
/// tests: helper exposing the strict closure order on formulas.
pub fn closure_strictly_below(
    g: &ClosureGraph,
    co: &ClosureOrder,
    phi: &Formula,
    psi: &Formula,
) -> Option<bool> {
    let pa = co.fix_pos(g.index_of(phi)?)?;
    let pb = co.fix_pos(g.index_of(psi)?)?;
    Some(co.leq[pa][pb] && !co.leq[pb][pa])
}

/// Soundness checks for the derivation clauses of the Niwinski classes,
/// used by property tests: every clause may only move formulas into
/// classes that the chain characterisation confirms.
pub fn ah_clause_soundness_samples(formulas: &[Formula]) -> Result<()> {
    for f in formulas {
        let f = if f.is_tidy() { f.clone() } else { tidy_variant(f) };
        let depth = ad_tidy(&f)?;
        for eta in [Parity::Mu, Parity::Nu] {
            // monotone in n
            let mut prev = false;
            for n in 0..=depth + 1 {
                let m = ah_member(&f, eta, n)?;
                if prev && !m {
                    return Err(Error::BadInput(format!(
                        "AH membership not monotone for {}",
                        print(&f)
                    )));
                }
                prev = m;
            }
            if !ah_member(&f, eta, depth)? {
                return Err(Error::BadInput(format!(
                    "ad({}) = {} but not in AH^{}_{}",
                    print(&f),
                    depth,
                    eta,
                    depth
                )));
            }
        }
        // ad is the least n with membership for both parities
        if depth > 0 {
            let both =
                ah_member(&f, Parity::Mu, depth - 1)? && ah_member(&f, Parity::Nu, depth - 1)?;
            if both {
                return Err(Error::BadInput(format!(
                    "ad({}) overestimates",
                    print(&f)
                )));
            }
        }
    }
    Ok(())
}

/// Members of `Clos(xi)` have alternation depth at most `ad(xi)`:
/// checked by tests over corpora.
pub fn ad_monotone_under_closure(xi: &Formula) -> Result<bool> {
    let f = if xi.is_tidy() { xi.clone() } else { tidy_variant(xi) };
    let top = ad_tidy(&f)?;
    let g = closure(&f)?;
    for n in g.nodes() {
        if ad_tidy(n)? > top {
            return Ok(false);
        }
    }
    // subformulas too (tidied when needed)
    let mut seen = HashSet::new();
    for s in f.subformulas().iter() {
        if seen.insert(s.clone()) && ad_tidy(s)? > top {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    #[test]
    fn dependency_order_simple() {
        // mu x. nu y. (p /\ <>x) \/ <>y : y < x
        let f = parse("mu x. nu y. (p /\\ <>x) \\/ <>y").unwrap();
        let d = dependency_order(&f).unwrap();
        assert!(d.less(&Var::new("y"), &Var::new("x")));
        assert!(!d.less(&Var::new("x"), &Var::new("y")));
    }

    #[test]
    fn dependency_order_skips_unused_variable() {
        // mu x. nu y. ([]y /\ mu z. (<>x \/ z)): no chain through z above y
        let f = parse("mu x. nu y. ([]y /\\ mu z. (<>x \\/ z))").unwrap();
        let d = dependency_order(&f).unwrap();
        assert!(!d.less(&Var::new("z"), &Var::new("y")));
        assert!(d.less(&Var::new("z"), &Var::new("x")));
        assert!(d.less(&Var::new("y"), &Var::new("x")));
    }

    #[test]
    fn ad_examples() {
        assert_eq!(ad_clean(&parse("mu x. p \\/ x").unwrap()).unwrap().0, 1);
        let xi2 = parse("nu x. mu y. (p /\\ <>x) \\/ <>y").unwrap();
        assert_eq!(ad_clean(&xi2).unwrap().0, 2);
        let xi3 = parse("mu x. nu y. ([]y /\\ mu z. (<>x \\/ z))").unwrap();
        assert_eq!(ad_clean(&xi3).unwrap().0, 2);
        // fixpoint-free
        assert_eq!(ad_tidy(&parse("p /\\ []q").unwrap()).unwrap(), 0);
    }

    #[test]
    fn ad_tidy_agrees_with_clean() {
        for s in [
            "mu x. p \\/ x",
            "nu x. mu y. (p /\\ <>x) \\/ <>y",
            "mu x. nu y. ([]y /\\ mu z. (<>x \\/ z))",
            "mu x. (~p \\/ <>x)",
            "nu x. []x",
        ] {
            let f = parse(s).unwrap();
            assert_eq!(ad_clean(&f).unwrap().0, ad_tidy(&f).unwrap(), "{}", s);
        }
    }

    #[test]
    fn alpha_x_cluster_has_depth_two() {
        // nu x. ((mu y. x /\ y) \/ nu z. (z /\ mu y. x /\ y))
        let f = parse("nu x. ((mu y. x /\\ y) \\/ nu z. (z /\\ mu y. x /\\ y))").unwrap();
        assert_eq!(ad_tidy(&f).unwrap(), 2);

        // and the strict order refuses alpha_z < alpha_y
        let g = closure(&f).unwrap();
        let co = closure_order(&g);
        let ax = f.clone();
        let ay = parse("mu y. (nu x. ((mu y. x /\\ y) \\/ nu z. (z /\\ mu y. x /\\ y))) /\\ y")
            .unwrap();
        let az = parse(
            "nu z. (z /\\ mu y. (nu x. ((mu y. x /\\ y) \\/ nu z. (z /\\ mu y. x /\\ y))) /\\ y)",
        )
        .unwrap();
        assert!(g.contains(&ay), "closure contains alpha_y");
        assert!(g.contains(&az), "closure contains alpha_z");
        assert_eq!(closure_strictly_below(&g, &co, &ay, &ax), Some(true));
        assert_eq!(closure_strictly_below(&g, &co, &az, &ax), Some(true));
        assert_eq!(closure_strictly_below(&g, &co, &az, &ay), Some(false));
    }

    #[test]
    fn ah_membership_examples() {
        let f = parse("mu x. p \\/ x").unwrap();
        assert!(ah_member(&f, Parity::Nu, 0).unwrap());
        assert!(!ah_member(&f, Parity::Mu, 0).unwrap());
        let xi2 = parse("nu x. mu y. (p /\\ <>x) \\/ <>y").unwrap();
        assert!(ah_member(&xi2, Parity::Mu, 1).unwrap());
        assert!(!ah_member(&xi2, Parity::Nu, 1).unwrap());
        // atoms belong to AH^eta_0 for both
        for eta in [Parity::Mu, Parity::Nu] {
            assert!(ah_member(&parse("p").unwrap(), eta, 0).unwrap());
        }
    }
}
