//! Zielonka's recursive attractor decomposition, with positional
//! strategies for both players and an independent strategy checker.

use super::{ParityGame, Player};

/// Winning regions and positional strategies. Strategies are defined on
/// the owner's positions inside their winning region.
#[derive(Debug, Clone)]
pub struct Solution {
    pub winner: Vec<Player>,
    pub strategy_exists: Vec<Option<usize>>,
    pub strategy_forall: Vec<Option<usize>>,
}

impl Solution {
    pub fn region(&self, p: Player) -> Vec<usize> {
        (0..self.winner.len()).filter(|&i| self.winner[i] == p).collect()
    }

    pub fn strategy(&self, p: Player) -> &[Option<usize>] {
        match p {
            Player::Exists => &self.strategy_exists,
            Player::Forall => &self.strategy_forall,
        }
    }
}

/// Attractor of `targets` for `player` within `live`; records one
/// attracting move per owned position.
fn attractor(
    g: &ParityGame,
    live: &[bool],
    player: Player,
    targets: &[usize],
    strategy: &mut [Option<usize>],
) -> Vec<bool> {
    let n = g.size();
    let mut in_attr = vec![false; n];
    let mut out_deg = vec![0usize; n];
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    for v in 0..n {
        if !live[v] {
            continue;
        }
        for &w in &g.moves[v] {
            if live[w] {
                out_deg[v] += 1;
                preds[w].push(v);
            }
        }
    }
    let mut queue: Vec<usize> = Vec::new();
    for &t in targets {
        if live[t] && !in_attr[t] {
            in_attr[t] = true;
            queue.push(t);
        }
    }
    while let Some(w) = queue.pop() {
        for &v in &preds[w] {
            if in_attr[v] || !live[v] {
                continue;
            }
            if g.owner[v] == player {
                in_attr[v] = true;
                if strategy[v].is_none() {
                    strategy[v] = Some(w);
                }
                queue.push(v);
            } else {
                out_deg[v] -= 1;
                if out_deg[v] == 0 {
                    in_attr[v] = true;
                    queue.push(v);
                }
            }
        }
    }
    in_attr
}

fn zielonka(g: &ParityGame, live: Vec<bool>, sol: &mut Solution) {
    let verts: Vec<usize> = (0..g.size()).filter(|&v| live[v]).collect();
    if verts.is_empty() {
        return;
    }
    // dead ends lose for their owner; treat them via the attractor by
    // giving the opponent an empty-move win: handled below by priority
    // recursion plus the base case here.
    let d = verts.iter().map(|&v| g.priority[v]).max().unwrap();
    let player = Player::of_priority(d);
    let opp = player.opponent();

    // positions of maximal priority
    let targets: Vec<usize> = verts.iter().copied().filter(|&v| g.priority[v] == d).collect();
    let mut attr_strat: Vec<Option<usize>> = vec![None; g.size()];
    let a = attractor(g, &live, player, &targets, &mut attr_strat);

    let mut rest = live.clone();
    for v in 0..g.size() {
        if a[v] {
            rest[v] = false;
        }
    }
    let mut sub = Solution {
        winner: sol.winner.clone(),
        strategy_exists: vec![None; g.size()],
        strategy_forall: vec![None; g.size()],
    };
    zielonka(g, rest.clone(), &mut sub);

    let opp_region: Vec<usize> =
        (0..g.size()).filter(|&v| rest[v] && sub.winner[v] == opp).collect();

    if opp_region.is_empty() {
        // player wins everything live
        for v in 0..g.size() {
            if live[v] {
                sol.winner[v] = player;
            }
        }
        // strategies: recursion inside rest, attractor moves in a, and
        // for targets any live move that stays winning (all of live is
        // winning for player, so any live move works)
        let (mine, theirs) = match player {
            Player::Exists => (&mut sol.strategy_exists, &sub.strategy_exists),
            Player::Forall => (&mut sol.strategy_forall, &sub.strategy_forall),
        };
        for v in 0..g.size() {
            if !live[v] || g.owner[v] != player {
                continue;
            }
            if rest[v] {
                mine[v] = theirs[v];
            } else if let Some(w) = attr_strat[v] {
                mine[v] = Some(w);
            } else {
                // a target of maximal priority: any live successor
                mine[v] = g.moves[v].iter().copied().find(|&w| live[w]);
            }
        }
    } else {
        let mut b_strat: Vec<Option<usize>> = vec![None; g.size()];
        let b = attractor(g, &live, opp, &opp_region, &mut b_strat);
        let mut rest2 = live.clone();
        for v in 0..g.size() {
            if b[v] {
                rest2[v] = false;
            }
        }
        let mut sub2 = Solution {
            winner: sol.winner.clone(),
            strategy_exists: vec![None; g.size()],
            strategy_forall: vec![None; g.size()],
        };
        zielonka(g, rest2, &mut sub2);
        for v in 0..g.size() {
            if !live[v] {
                continue;
            }
            if b[v] {
                sol.winner[v] = opp;
            } else {
                sol.winner[v] = sub2.winner[v];
            }
        }
        // opponent strategy on b: inside the opp_region use sub's
        // strategy, on the rest of b the attractor moves
        {
            let (opp_sol, opp_sub, opp_sub2) = match opp {
                Player::Exists => {
                    (&mut sol.strategy_exists, &sub.strategy_exists, &sub2.strategy_exists)
                }
                Player::Forall => {
                    (&mut sol.strategy_forall, &sub.strategy_forall, &sub2.strategy_forall)
                }
            };
            for v in 0..g.size() {
                if !live[v] || g.owner[v] != opp {
                    continue;
                }
                if b[v] {
                    opp_sol[v] = if rest[v] && sub.winner[v] == opp {
                        opp_sub[v]
                    } else {
                        b_strat[v]
                    };
                } else if sol.winner[v] == opp {
                    opp_sol[v] = opp_sub2[v];
                }
            }
        }
        // player strategy comes from the second recursion
        {
            let (pl_sol, pl_sub2) = match player {
                Player::Exists => (&mut sol.strategy_exists, &sub2.strategy_exists),
                Player::Forall => (&mut sol.strategy_forall, &sub2.strategy_forall),
            };
            for v in 0..g.size() {
                if live[v] && !b[v] && g.owner[v] == player && sol.winner[v] == player {
                    pl_sol[v] = pl_sub2[v];
                }
            }
        }
    }
}

/// Solves a finite parity game. Positions with no moves lose for their
/// owner; infinite plays are decided by the parity of the maximal
/// priority seen infinitely often.
pub fn solve(g: &ParityGame) -> Solution {
    let n = g.size();
    let mut sol = Solution {
        winner: vec![Player::Exists; n],
        strategy_exists: vec![None; n],
        strategy_forall: vec![None; n],
    };
    // Dead ends are wins for the opponent of the owner. Zielonka's
    // attractor handles them uniformly if we pre-assign them: a dead end
    // owned by P is a target of the opponent's attractor with "no move".
    // We fold this in by iterating: first compute the sets of positions
    // where someone is stuck, attract for the opponent, and recurse on
    // the remainder.
    let mut live = vec![true; n];
    loop {
        let mut progressed = false;
        for player in [Player::Exists, Player::Forall] {
            let opp = player.opponent();
            let stuck: Vec<usize> = (0..n)
                .filter(|&v| {
                    live[v]
                        && g.owner[v] == player
                        && !g.moves[v].iter().any(|&w| live[w])
                })
                .collect();
            if stuck.is_empty() {
                continue;
            }
            let mut strat: Vec<Option<usize>> = vec![None; n];
            let attr = attractor(g, &live, opp, &stuck, &mut strat);
            for v in 0..n {
                if attr[v] {
                    sol.winner[v] = opp;
                    live[v] = false;
                    if g.owner[v] == opp {
                        let dst = match opp {
                            Player::Exists => &mut sol.strategy_exists,
                            Player::Forall => &mut sol.strategy_forall,
                        };
                        dst[v] = strat[v];
                    }
                    progressed = true;
                }
            }
        }
        if !progressed {
            break;
        }
    }
    zielonka(g, live, &mut sol);
    sol
}

/// Verifies that `strategy` is winning for `player` on `region`: inside
/// the strategy-restricted subgraph reachable from the region, every
/// dead end is an opponent loss and in every cycle the maximal priority
/// has the player's parity.
pub fn verify_strategy(
    g: &ParityGame,
    strategy: &[Option<usize>],
    player: Player,
    region: &[usize],
) -> bool {
    let n = g.size();
    let mut in_region = vec![false; n];
    for &v in region {
        in_region[v] = true;
    }
    // restricted edges, reachability from region
    let mut seen = vec![false; n];
    let mut work: Vec<usize> = region.to_vec();
    for &v in region {
        seen[v] = true;
    }
    let succs = |v: usize| -> Vec<usize> {
        if g.owner[v] == player {
            strategy[v].into_iter().collect()
        } else {
            g.moves[v].clone()
        }
    };
    while let Some(v) = work.pop() {
        // a play may not leave the region
        if !in_region[v] {
            return false;
        }
        if g.owner[v] == player {
            match strategy[v] {
                Some(w) => {
                    if !g.moves[v].contains(&w) {
                        return false; // illegal move
                    }
                    if !seen[w] {
                        seen[w] = true;
                        work.push(w);
                    }
                }
                None => {
                    if !g.moves[v].is_empty() {
                        return false; // player stuck by own strategy
                    }
                    return false; // player stuck: loses
                }
            }
        } else {
            if g.moves[v].is_empty() {
                // opponent stuck: fine
                continue;
            }
            for &w in &g.moves[v] {
                if !seen[w] {
                    seen[w] = true;
                    work.push(w);
                }
            }
        }
    }
    // cycle condition on the reachable restricted subgraph
    let live: Vec<usize> = (0..n).filter(|&v| seen[v]).collect();
    check_cycles(g, &live, &succs, player)
}

fn check_cycles(
    g: &ParityGame,
    live: &[usize],
    succs: &dyn Fn(usize) -> Vec<usize>,
    player: Player,
) -> bool {
    if live.is_empty() {
        return true;
    }
    let alive: std::collections::HashSet<usize> = live.iter().copied().collect();
    let index: std::collections::HashMap<usize, usize> =
        live.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let adj: Vec<Vec<usize>> = live
        .iter()
        .map(|&v| {
            succs(v)
                .into_iter()
                .filter(|w| alive.contains(w))
                .map(|w| index[&w])
                .collect()
        })
        .collect();
    let (comp_of, comps) = crate::alternation::tarjan_scc(&adj);
    for (c, comp) in comps.iter().enumerate() {
        let cyclic = comp.len() > 1 || adj[comp[0]].contains(&comp[0]);
        if !cyclic {
            continue;
        }
        let max_p = comp.iter().map(|&i| g.priority[live[i]]).max().unwrap();
        if Player::of_priority(max_p) != player {
            return false;
        }
        // drop the maximal vertices and re-check the interior
        let inner: Vec<usize> = comp
            .iter()
            .copied()
            .filter(|&i| g.priority[live[i]] < max_p)
            .map(|i| live[i])
            .collect();
        let comp_set: std::collections::HashSet<usize> =
            comp.iter().map(|&i| live[i]).collect();
        let sub_succ = |v: usize| -> Vec<usize> {
            succs(v)
                .into_iter()
                .filter(|w| comp_set.contains(w) && comp_of[index[w]] == c)
                .collect()
        };
        if !check_cycles(g, &inner, &sub_succ, player) {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn game(owner: Vec<Player>, priority: Vec<u32>, moves: Vec<Vec<usize>>) -> ParityGame {
        ParityGame {
            names: (0..owner.len()).map(|i| format!("p{}", i)).collect(),
            owner,
            priority,
            moves,
            initial: Some(0),
        }
    }

    #[test]
    fn even_self_loop_wins_for_exists() {
        let g = game(vec![Player::Exists], vec![2], vec![vec![0]]);
        let sol = solve(&g);
        assert_eq!(sol.winner[0], Player::Exists);
        assert!(verify_strategy(&g, &sol.strategy_exists, Player::Exists, &[0]));
    }

    #[test]
    fn odd_self_loop_without_escape_wins_for_forall() {
        let g = game(vec![Player::Exists], vec![1], vec![vec![0]]);
        let sol = solve(&g);
        assert_eq!(sol.winner[0], Player::Forall);
        assert!(verify_strategy(&g, &sol.strategy_forall, Player::Forall, &[0]));
    }

    #[test]
    fn stuck_player_loses() {
        let g = game(vec![Player::Exists], vec![0], vec![vec![]]);
        let sol = solve(&g);
        assert_eq!(sol.winner[0], Player::Forall);
    }

    #[test]
    fn corrupted_strategy_fails_verification() {
        // exists must loop at 0 (even) and avoid 1 (odd loop)
        let g = game(
            vec![Player::Exists, Player::Exists],
            vec![2, 1],
            vec![vec![0, 1], vec![1]],
        );
        let sol = solve(&g);
        assert_eq!(sol.winner[0], Player::Exists);
        assert!(verify_strategy(&g, &sol.strategy_exists, Player::Exists, &[0]));
        let bad = vec![Some(1), Some(1)];
        assert!(!verify_strategy(&g, &bad, Player::Exists, &[0]));
    }

    #[test]
    fn empty_region_verifies() {
        let g = game(vec![Player::Exists], vec![0], vec![vec![0]]);
        let sol = solve(&g);
        assert!(verify_strategy(&g, &sol.strategy_forall, Player::Forall, &[]));
    }
}
