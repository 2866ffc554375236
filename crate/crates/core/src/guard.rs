//! Guardedness analysis, the exponential and quadratic guarded
//! transformations, and the reduction from parity-game solving to
//! guarded transformation.

use crate::error::{Error, Result};
use crate::parity::{EdgeTagging, Label, ParityFormula, Vertex};
use crate::semantics::{ParityGame, Player};
use std::collections::BTreeSet;

/// Guardedness classification of a parity formula.
#[derive(Debug, Clone)]
pub struct GuardReport {
    pub strongly_guarded: bool,
    pub guarded: bool,
    /// For each priority value in the range, whether the formula is
    /// strongly guarded up to that priority.
    pub frontier: Vec<(u32, bool)>,
    /// Witnessing unguarded paths as vertex-id sequences (capped).
    pub witnesses: Vec<Vec<String>>,
}

/// Endpoints of unguarded paths: pairs of state indices (from, to) with
/// one witnessing path each.
fn unguarded_pairs(g: &ParityFormula) -> Vec<(usize, usize, Vec<usize>)> {
    let mut out = Vec::new();
    for u in g.states() {
        // BFS through non-modal vertices, starting from u's successors
        let mut pred: Vec<Option<usize>> = vec![None; g.size()];
        let mut seen = vec![false; g.size()];
        let mut queue: Vec<usize> = Vec::new();
        for &w in &g.succ_set(u) {
            if !seen[w] {
                seen[w] = true;
                pred[w] = Some(u);
                queue.push(w);
            }
        }
        let mut qi = 0;
        while qi < queue.len() {
            let v = queue[qi];
            qi += 1;
            if g.label(v).is_modal() {
                continue; // the path may not continue after a modal node
            }
            for &w in &g.succ_set(v) {
                if !seen[w] {
                    seen[w] = true;
                    pred[w] = Some(v);
                    queue.push(w);
                }
            }
        }
        for v in g.states() {
            if seen[v] && !g.label(v).is_modal() {
                // reconstruct u .. v
                let mut path = vec![v];
                let mut at = v;
                while let Some(p) = pred[at] {
                    path.push(p);
                    if p == u {
                        break;
                    }
                    at = p;
                }
                path.reverse();
                out.push((u, v, path));
            } else if seen[v] && g.label(v).is_modal() {
                // endpoint is modal: such a path is guarded at its end
            }
        }
    }
    out
}

/// Classifies guardedness: a formula is guarded when no state lies on a
/// modality-free cycle, strongly guarded when there is no modality-free
/// state-to-state path at all.
pub fn classify_guardedness(g: &ParityFormula) -> GuardReport {
    let pairs = unguarded_pairs(g);
    let strongly_guarded = pairs.is_empty();
    let guarded = pairs.iter().all(|(u, v, _)| u != v);
    let mut priorities: Vec<u32> = g.states().iter().map(|&v| g.priority(v).unwrap()).collect();
    priorities.sort_unstable();
    priorities.dedup();
    let frontier = priorities
        .iter()
        .map(|&k| {
            (k, pairs.iter().all(|&(_, v, _)| g.priority(v).unwrap() > k))
        })
        .collect();
    let witnesses = pairs
        .iter()
        .take(20)
        .map(|(_, _, path)| path.iter().map(|&v| g.verts[v].id.clone()).collect())
        .collect();
    GuardReport { strongly_guarded, guarded, frontier, witnesses }
}

fn is_silent_state(g: &ParityFormula, v: usize) -> bool {
    g.is_state(v) && g.label(v).is_silent()
}

/// One guarding round: removes unguarded paths ending at the unique
/// state with priority `p`. Expects a linear formula whose states are
/// silent and which is already strongly guarded below `p`.
///
/// The state's incoming edges are diverted into a copy of its
/// modality-free cone; within the copy, re-reaching the state resolves
/// to a constant by the parity of `p`, and exits through a modal node
/// that can see the state again record `p` on a fresh silent state
/// placed after the modal. Exits that cannot return, or that pass a
/// state of higher priority, need no record.
pub fn guard_step(g: &ParityFormula, p: u32) -> Result<ParityFormula> {
    // locate the unique state with priority p
    let zs: Vec<usize> =
        g.states().into_iter().filter(|&v| g.priority(v) == Some(p)).collect();
    if zs.len() > 1 {
        return Err(Error::GuardPrecondition(format!(
            "priority {} is not unique; linearize first",
            p
        )));
    }
    let Some(&z) = zs.first() else {
        return Ok(g.clone()); // nothing to do at this priority
    };
    if !g.label(z).is_silent() {
        return Err(Error::GuardPrecondition(format!(
            "state {} is not silent",
            g.verts[z].id
        )));
    }
    // no-op when every predecessor is modal: no unguarded path can end
    // at z and the modal-predecessor property already holds
    let preds: Vec<usize> = (0..g.size())
        .filter(|&u| g.succ_set(u).contains(&z))
        .collect();
    if preds.iter().all(|&u| g.label(u).is_modal()) {
        return Ok(g.clone());
    }

    // interior cone: vertices reachable from z through boolean and
    // non-state silent vertices
    let mut interior: BTreeSet<usize> = BTreeSet::new();
    let mut frontier_modal: BTreeSet<usize> = BTreeSet::new();
    let mut work: Vec<usize> = g.succ_set(z);
    let mut seen: BTreeSet<usize> = work.iter().copied().collect();
    while let Some(v) = work.pop() {
        if v == z {
            continue;
        }
        let expand = (g.label(v).is_boolean() || g.label(v).is_silent()) && !g.is_state(v);
        if expand {
            interior.insert(v);
            for w in g.succ_set(v) {
                if seen.insert(w) {
                    work.push(w);
                }
            }
        } else if g.label(v).is_modal() {
            frontier_modal.insert(v);
        }
    }
    // modal frontier vertices that can reach z again need the record
    let reaches_z = {
        let mut r = vec![false; g.size()];
        // reverse reachability from z
        let mut preds_all: Vec<Vec<usize>> = vec![Vec::new(); g.size()];
        for u in 0..g.size() {
            for w in g.succ_set(u) {
                preds_all[w].push(u);
            }
        }
        let mut work = vec![z];
        while let Some(v) = work.pop() {
            for &u in &preds_all[v] {
                if !r[u] {
                    r[u] = true;
                    work.push(u);
                }
            }
        }
        r
    };
    let marked: Vec<usize> =
        frontier_modal.iter().copied().filter(|&m| reaches_z[m]).collect();

    // build the new formula: copy 0 without z, then z1, interior copies,
    // marked modal copies with their records, and the loop constant
    let mut verts: Vec<Vertex> = Vec::new();
    let mut succ: Vec<Vec<usize>> = Vec::new();
    let mut map0 = vec![usize::MAX; g.size()];
    for v in 0..g.size() {
        if v == z {
            continue;
        }
        map0[v] = verts.len();
        verts.push(g.verts[v].clone());
        succ.push(Vec::new());
    }
    let z1 = verts.len();
    verts.push(Vertex {
        id: format!("{}'", g.verts[z].id),
        label: Label::Eps,
        priority: None,
    });
    succ.push(Vec::new());
    let z2 = verts.len();
    verts.push(Vertex {
        id: format!("{}!", g.verts[z].id),
        label: if p % 2 == 0 { Label::Top } else { Label::Bot },
        priority: None,
    });
    succ.push(Vec::new());
    let mut map1 = vec![usize::MAX; g.size()];
    for &v in &interior {
        map1[v] = verts.len();
        verts.push(Vertex {
            id: format!("{}'", g.verts[v].id),
            label: g.verts[v].label.clone(),
            priority: None,
        });
        succ.push(Vec::new());
    }
    let mut mcopy = vec![usize::MAX; g.size()];
    let mut mrec = vec![usize::MAX; g.size()];
    for &m in &marked {
        mcopy[m] = verts.len();
        verts.push(Vertex {
            id: format!("{}'", g.verts[m].id),
            label: g.verts[m].label.clone(),
            priority: None,
        });
        succ.push(Vec::new());
        mrec[m] = verts.len();
        verts.push(Vertex {
            id: format!("{}^", g.verts[m].id),
            label: Label::Eps,
            priority: Some(p),
        });
        succ.push(Vec::new());
    }

    // copy-0 edges; edges into z divert to z1
    for v in 0..g.size() {
        if v == z {
            continue;
        }
        succ[map0[v]] = g.succ[v]
            .iter()
            .map(|&w| if w == z { z1 } else { map0[w] })
            .collect();
    }
    // cone edges: from z1 and interior copies
    let cone_target = |w: usize,
                       interior: &BTreeSet<usize>,
                       map1: &[usize],
                       mcopy: &[usize]|
     -> usize {
        if w == z {
            z2
        } else if interior.contains(&w) {
            map1[w]
        } else if mcopy[w] != usize::MAX {
            mcopy[w]
        } else {
            map0[w]
        }
    };
    succ[z1] = g.succ[z]
        .iter()
        .map(|&w| cone_target(w, &interior, &map1, &mcopy))
        .collect();
    for &v in &interior {
        succ[map1[v]] = g.succ[v]
            .iter()
            .map(|&w| cone_target(w, &interior, &map1, &mcopy))
            .collect();
    }
    // marked modal copies: the record sits between the modal and its
    // target; a processed lower state behind the modal is absorbed into
    // the record (its priority is dominated by p on this passage)
    for &m in &marked {
        let w = g.succ[m][0];
        succ[mcopy[m]] = vec![mrec[m]];
        let target = if w == z {
            z1
        } else if g.is_state(w) && g.priority(w).unwrap() < p {
            // w is a silent processed state: skip to its successor
            let w2 = g.succ[w][0];
            if w2 == z {
                z1
            } else {
                map0[w2]
            }
        } else {
            map0[w]
        };
        succ[mrec[m]] = vec![target];
    }

    let initial = if g.initial == z { z1 } else { map0[g.initial] };
    let out = ParityFormula { verts, succ, initial, tagging: None };
    Ok(out.prune_unreachable())
}

/// Preprocessing for the guarding iteration: moves every priority onto
/// a fresh silent vertex in front of its carrier (unless the carrier is
/// already a plain silent state). At most doubles the vertex count.
pub fn silent_states(g: &ParityFormula) -> ParityFormula {
    let mut h = g.clone();
    for v in 0..g.size() {
        if h.priority(v).is_none() || h.label(v).is_silent() {
            continue;
        }
        let hat = h.size();
        let id = h.fresh_id(&format!("{}^", h.verts[v].id));
        let pr = h.verts[v].priority.take();
        h.verts.push(Vertex { id, label: Label::Eps, priority: pr });
        h.succ.push(vec![v]);
        for u in 0..hat {
            for w in h.succ[u].iter_mut() {
                if *w == v {
                    *w = hat;
                }
            }
        }
        if h.initial == v {
            h.initial = hat;
        }
    }
    h
}

/// Full guarding: linearizes, makes states silent, then guards one
/// priority at a time in ascending order. The output is strongly
/// guarded, its index does not exceed the input's, and every
/// predecessor of a state is a modal node.
pub fn guard_full(g: &ParityFormula) -> Result<ParityFormula> {
    let bad = g.validate();
    if !bad.is_empty() {
        return Err(Error::InvalidParity(bad.join("; ")));
    }
    let mut h = silent_states(&g.linearize()).prune_unreachable();
    let mut priorities: Vec<u32> =
        h.states().iter().map(|&v| h.priority(v).unwrap()).collect();
    priorities.sort_unstable();
    for p in priorities {
        h = guard_step(&h, p)?;
    }
    Ok(h)
}

/// Quadratic guarding for untwisted parity formulas: the product of the
/// graph with the set of states, tracking the highest state crossed on
/// the current modality-free stretch. A back edge that closes a loop
/// below the tracked state resolves to a constant by the loop's parity.
pub fn guard_untwisted(g: &ParityFormula) -> Result<ParityFormula> {
    let bad = g.validate();
    if !bad.is_empty() {
        return Err(Error::InvalidParity(bad.join("; ")));
    }
    let tagging = match &g.tagging {
        Some(t) => t.clone(),
        None => crate::parity::untwisted_decompose(g)?,
    };
    for v in 0..g.size() {
        if let Some(u) = tagging.back_of[v] {
            if !g.is_state(u) {
                return Err(Error::NotUntwisted {
                    condition: 5,
                    detail: format!("companion {} carries no priority", g.verts[u].id),
                });
            }
        }
    }
    guard_untwisted_tagged(g, &tagging)
}

fn guard_untwisted_tagged(g: &ParityFormula, t: &EdgeTagging) -> Result<ParityFormula> {
    let n = g.size();
    // D* reachability
    let mut dstar = vec![vec![false; n]; n];
    for v in 0..n {
        let mut work = vec![v];
        dstar[v][v] = true;
        while let Some(u) = work.pop() {
            for w in t.down(g, u) {
                if !dstar[v][w] {
                    dstar[v][w] = true;
                    work.push(w);
                }
            }
        }
    }

    // second components: states, the fresh tracker `z`, and constants
    #[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
    enum Track {
        Fresh,
        State(usize),
        Const(bool),
    }
    type Node = (usize, Track);

    let mut nodes: Vec<Node> = Vec::new();
    let mut index: std::collections::HashMap<Node, usize> = std::collections::HashMap::new();
    let mut succ: Vec<Vec<Node>> = Vec::new();
    let mut queue: Vec<Node> = Vec::new();
    let start: Node = (g.initial, Track::Fresh);
    index.insert(start, 0);
    nodes.push(start);
    succ.push(Vec::new());
    queue.push(start);

    while let Some(node) = queue.pop() {
        let (v, x) = node;
        let i = index[&node];
        let mut outs: Vec<Node> = Vec::new();
        if !matches!(x, Track::Const(_)) && !g.label(v).is_atomic() {
            if g.label(v).is_modal() || x == Track::Fresh {
                for u in g.succ_set(v) {
                    if g.is_state(u) {
                        outs.push((u, Track::State(u)));
                    } else {
                        outs.push((u, Track::Fresh));
                    }
                }
            } else if let Track::State(s) = x {
                // boolean or silent vertex on a tracked stretch
                for u in g.succ_set(v) {
                    if t.is_back(v, u) {
                        if dstar[s][u] {
                            // loop closed below the tracked state
                            outs.push((u, Track::Const(g.priority(u).unwrap() % 2 == 0)));
                        } else {
                            outs.push((u, Track::State(u)));
                        }
                    } else {
                        outs.push((u, Track::State(s)));
                    }
                }
            }
        }
        for o in &outs {
            if !index.contains_key(o) {
                index.insert(*o, nodes.len());
                nodes.push(*o);
                succ.push(Vec::new());
                queue.push(*o);
            }
        }
        succ[i] = outs;
    }

    let verts: Vec<Vertex> = nodes
        .iter()
        .map(|&(v, x)| {
            let (label, priority) = match x {
                Track::Const(b) => (if b { Label::Top } else { Label::Bot }, None),
                Track::Fresh => (
                    g.verts[v].label.clone(),
                    if g.label(v).is_modal() { Some(0) } else { None },
                ),
                Track::State(s) => (
                    g.verts[v].label.clone(),
                    if g.label(v).is_modal() { Some(g.priority(s).unwrap()) } else { None },
                ),
            };
            let tag = match x {
                Track::Fresh => "z".to_string(),
                Track::State(s) => g.verts[s].id.clone(),
                Track::Const(true) => "T".to_string(),
                Track::Const(false) => "F".to_string(),
            };
            Vertex { id: format!("{}@{}", g.verts[v].id, tag), label, priority }
        })
        .collect();
    let succ: Vec<Vec<usize>> =
        succ.into_iter().map(|outs| outs.into_iter().map(|o| index[&o]).collect()).collect();
    Ok(ParityFormula { verts, succ, initial: 0, tagging: None })
}

/// Decision of a parity game through the guarded transformation: build
/// the modality-free, literal-free parity formula of the game, guard it,
/// cut modal edges and literals, and evaluate the remaining dag.
pub fn game_reduction_pipeline(game: &ParityGame, pos: usize) -> Result<Player> {
    // fan-outs above two get auxiliary nodes
    let mut verts: Vec<Vertex> = Vec::new();
    let mut succ: Vec<Vec<usize>> = Vec::new();
    for i in 0..game.size() {
        verts.push(Vertex {
            id: format!("g{}", i),
            label: match game.owner[i] {
                Player::Exists => Label::Or,
                Player::Forall => Label::And,
            },
            priority: Some(game.priority[i]),
        });
        succ.push(Vec::new());
    }
    for i in 0..game.size() {
        let moves: Vec<usize> = {
            let mut m = game.moves[i].clone();
            m.sort_unstable();
            m.dedup();
            m
        };
        let label = verts[i].label.clone();
        let mut hook = i;
        let mut rest = moves.as_slice();
        loop {
            match rest {
                [] => break,
                [a] => {
                    succ[hook].push(*a);
                    break;
                }
                [a, b] if rest.len() == 2 => {
                    succ[hook].push(*a);
                    succ[hook].push(*b);
                    break;
                }
                [a, more @ ..] => {
                    let aux = verts.len();
                    verts.push(Vertex {
                        id: format!("g{}x{}", i, more.len()),
                        label: label.clone(),
                        priority: None,
                    });
                    succ.push(Vec::new());
                    succ[hook].push(*a);
                    succ[hook].push(aux);
                    hook = aux;
                    rest = more;
                }
            }
        }
    }
    let gf = ParityFormula { verts, succ, initial: pos, tagging: None };
    let bad = gf.validate();
    if !bad.is_empty() {
        return Err(Error::InvalidParity(bad.join("; ")));
    }

    let guarded = guard_full(&gf)?;

    // cut modalities and literals (none are produced by our guarding,
    // but the reduction tolerates them)
    let mut f = guarded.clone();
    for v in 0..f.size() {
        let replace = match f.label(v) {
            Label::Dia => Some(Label::Bot),
            Label::Box => Some(Label::Top),
            Label::Lit(_, false) => Some(Label::Bot),
            Label::Lit(_, true) => Some(Label::Top),
            _ => None,
        };
        if let Some(l) = replace {
            f.verts[v].label = l;
            f.succ[v].clear();
        }
    }

    // the result must be a dag
    let adj: Vec<Vec<usize>> = (0..f.size()).map(|v| f.succ_set(v)).collect();
    let (_, comps) = crate::alternation::tarjan_scc(&adj);
    for comp in &comps {
        if comp.len() > 1 || adj[comp[0]].contains(&comp[0]) {
            return Err(Error::InvalidParity(
                "reduction did not produce a dag".to_string(),
            ));
        }
    }

    // evaluate
    fn eval(f: &ParityFormula, v: usize, memo: &mut Vec<Option<bool>>) -> bool {
        if let Some(b) = memo[v] {
            return b;
        }
        let out = match f.label(v) {
            Label::Top => true,
            Label::Bot => false,
            Label::And => f.succ[v].iter().all(|&w| eval(f, w, memo)),
            Label::Or => f.succ[v].iter().any(|&w| eval(f, w, memo)),
            Label::Eps => eval(f, f.succ[v][0], memo),
            Label::Dia | Label::Box | Label::Lit(..) => {
                unreachable!("cut before evaluation")
            }
        };
        memo[v] = Some(out);
        out
    }
    let mut memo = vec![None; f.size()];
    Ok(if eval(&f, f.initial, &mut memo) { Player::Exists } else { Player::Forall })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compile::compile_sfor;
    use crate::formula::parse;
    use crate::semantics::{equiv_oracle, solve, EquivInput};

    fn eps(id: &str, p: Option<u32>) -> Vertex {
        Vertex { id: id.into(), label: Label::Eps, priority: p }
    }

    #[test]
    fn modal_self_loop_is_strongly_guarded() {
        let g = ParityFormula {
            verts: vec![eps("a", Some(2)), Vertex { id: "m".into(), label: Label::Dia, priority: None }],
            succ: vec![vec![1], vec![0]],
            initial: 0,
            tagging: None,
        };
        let r = classify_guardedness(&g);
        assert!(r.strongly_guarded && r.guarded);
    }

    #[test]
    fn silent_cycle_is_unguarded() {
        let g = ParityFormula {
            verts: vec![eps("a", Some(2)), eps("b", None)],
            succ: vec![vec![1], vec![0]],
            initial: 0,
            tagging: None,
        };
        let r = classify_guardedness(&g);
        assert!(!r.guarded && !r.strongly_guarded);
        assert!(!r.witnesses.is_empty());
    }

    #[test]
    fn guard_step_noop_when_predecessors_modal() {
        let g = ParityFormula {
            verts: vec![eps("a", Some(2)), Vertex { id: "m".into(), label: Label::Dia, priority: None }],
            succ: vec![vec![1], vec![0]],
            initial: 0,
            tagging: None,
        };
        let h = guard_step(&g, 2).unwrap();
        assert_eq!(h.size(), g.size());
    }

    #[test]
    fn guard_full_produces_strong_guardedness_and_modal_predecessors() {
        // nu x. x /\ <>x as a parity formula: an unguarded loop
        let f = parse("nu x. (x /\\ <>x)").unwrap();
        let g = compile_sfor(&f).unwrap();
        let r = classify_guardedness(&g);
        assert!(!r.strongly_guarded);
        let h = guard_full(&g).unwrap();
        assert!(h.is_valid(), "{:?}", h.validate());
        assert!(classify_guardedness(&h).strongly_guarded);
        // predecessors of states are modal
        for v in 0..h.size() {
            for w in h.succ_set(v) {
                if h.is_state(w) {
                    assert!(h.label(v).is_modal(), "{} -> {}", h.verts[v].id, h.verts[w].id);
                }
            }
        }
        assert!(h.index() <= g.index());
        // equivalence
        let verdict = equiv_oracle(
            &EquivInput::Formula(f),
            &EquivInput::Parity(h),
            60,
            4,
            5,
        )
        .unwrap();
        assert!(verdict.is_consistent());
    }

    #[test]
    fn guard_untwisted_on_box_loop() {
        let f = parse("nu x. []x").unwrap();
        let g = compile_sfor(&f).unwrap();
        let h = guard_untwisted(&g).unwrap();
        assert!(h.is_valid(), "{:?}", h.validate());
        assert!(classify_guardedness(&h).strongly_guarded);
        assert!(h.size() <= g.size() * g.size());
        assert!(h.index() <= g.index() + 1);
        let verdict = equiv_oracle(
            &EquivInput::Formula(f),
            &EquivInput::Parity(h),
            60,
            3,
            9,
        )
        .unwrap();
        assert!(verdict.is_consistent());
    }

    #[test]
    fn pipeline_agrees_on_tiny_game() {
        // one exists-position with an even self-loop
        let game = ParityGame {
            names: vec!["p0".into()],
            owner: vec![Player::Exists],
            priority: vec![2],
            moves: vec![vec![0]],
            initial: Some(0),
        };
        assert_eq!(game_reduction_pipeline(&game, 0).unwrap(), Player::Exists);
        let sol = solve(&game);
        assert_eq!(sol.winner[0], Player::Exists);
    }
}
