//! Parity games and the three evaluation-game constructions: for parity
//! formulas, for subformula boards of clean formulas and for closure
//! boards of tidy formulas.

use super::KripkeModel;
use crate::alternation::closure_order;
use crate::compile::{compile_sfor, global_priority};
use crate::error::Result;
use crate::formula::{closure, FKind, Formula, Var};
use crate::parity::{Label, ParityFormula};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Player {
    Exists,
    Forall,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::Exists => Player::Forall,
            Player::Forall => Player::Exists,
        }
    }

    /// The player winning infinite plays whose maximal recurring
    /// priority has this value's parity.
    pub fn of_priority(p: u32) -> Player {
        if p % 2 == 0 {
            Player::Exists
        } else {
            Player::Forall
        }
    }
}

/// A two-player priority-labelled game board. Every position belongs to
/// exactly one player; the priority map is total with finite range.
#[derive(Debug, Clone)]
pub struct ParityGame {
    pub names: Vec<String>,
    pub owner: Vec<Player>,
    pub priority: Vec<u32>,
    pub moves: Vec<Vec<usize>>,
    pub initial: Option<usize>,
}

impl ParityGame {
    pub fn size(&self) -> usize {
        self.names.len()
    }

    pub fn max_priority(&self) -> u32 {
        self.priority.iter().copied().max().unwrap_or(0)
    }

    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct P<'a> {
            id: &'a str,
            owner: Player,
            priority: u32,
        }
        let positions: Vec<P> = (0..self.size())
            .map(|i| P { id: &self.names[i], owner: self.owner[i], priority: self.priority[i] })
            .collect();
        let moves: Vec<[&str; 2]> = (0..self.size())
            .flat_map(|i| {
                self.moves[i]
                    .iter()
                    .map(move |&j| [self.names[i].as_str(), self.names[j].as_str()])
            })
            .collect();
        serde_json::json!({
            "positions": positions,
            "moves": moves,
            "initial": self.initial.map(|i| self.names[i].clone()),
        })
    }

    pub fn from_json(value: &serde_json::Value) -> Result<ParityGame> {
        #[derive(Deserialize)]
        struct P {
            id: String,
            owner: Player,
            priority: u32,
        }
        #[derive(Deserialize)]
        struct Dto {
            positions: Vec<P>,
            #[serde(default)]
            moves: Vec<[String; 2]>,
            #[serde(default)]
            initial: Option<String>,
        }
        let dto: Dto = serde_json::from_value(value.clone())
            .map_err(|e| crate::error::Error::BadInput(format!("game json: {}", e)))?;
        let names: Vec<String> = dto.positions.iter().map(|p| p.id.clone()).collect();
        let idx = |name: &str| -> Result<usize> {
            names
                .iter()
                .position(|p| p == name)
                .ok_or_else(|| crate::error::Error::BadInput(format!("unknown position {}", name)))
        };
        let mut moves = vec![Vec::new(); names.len()];
        for [a, b] in &dto.moves {
            let (i, j) = (idx(a)?, idx(b)?);
            moves[i].push(j);
        }
        let initial = match &dto.initial {
            Some(s) => Some(idx(s)?),
            None => None,
        };
        Ok(ParityGame {
            names,
            owner: dto.positions.iter().map(|p| p.owner).collect(),
            priority: dto.positions.iter().map(|p| p.priority).collect(),
            moves,
            initial,
        })
    }
}

/// A position of an evaluation game: vertex/formula index paired with a
/// model point.
pub type GamePos = (usize, usize);

fn pos_index(n_points: usize, v: usize, s: usize) -> usize {
    v * n_points + s
}

/// The evaluation game of a parity formula over a model: positions are
/// vertex-point pairs, ownership and moves follow the label table, and
/// the priority of a position is the vertex priority (0 when absent).
pub fn build_game(g: &ParityFormula, model: &KripkeModel) -> ParityGame {
    let np = model.size();
    let n = g.size() * np;
    let mut owner = vec![Player::Exists; n];
    let mut priority = vec![0u32; n];
    let mut moves: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut names = vec![String::new(); n];
    for v in 0..g.size() {
        for s in 0..np {
            let i = pos_index(np, v, s);
            names[i] = format!("{}@{}", g.verts[v].id, model.points[s]);
            priority[i] = g.priority(v).unwrap_or(0);
            let (ow, mv): (Player, Vec<usize>) = match g.label(v) {
                Label::Lit(p, positive) => {
                    let truth = model.holds(p, s) == *positive;
                    // a true atom is a dead end for the opponent
                    (if truth { Player::Forall } else { Player::Exists }, Vec::new())
                }
                Label::Bot => (Player::Exists, Vec::new()),
                Label::Top => (Player::Forall, Vec::new()),
                Label::Eps => {
                    (Player::Exists, g.succ[v].iter().map(|&w| pos_index(np, w, s)).collect())
                }
                Label::Or => {
                    (Player::Exists, g.succ[v].iter().map(|&w| pos_index(np, w, s)).collect())
                }
                Label::And => {
                    (Player::Forall, g.succ[v].iter().map(|&w| pos_index(np, w, s)).collect())
                }
                Label::Dia => (
                    Player::Exists,
                    g.succ[v]
                        .iter()
                        .flat_map(|&w| model.succ[s].iter().map(move |&t| pos_index(np, w, t)))
                        .collect(),
                ),
                Label::Box => (
                    Player::Forall,
                    g.succ[v]
                        .iter()
                        .flat_map(|&w| model.succ[s].iter().map(move |&t| pos_index(np, w, t)))
                        .collect(),
                ),
            };
            owner[i] = ow;
            let mut mv = mv;
            mv.sort_unstable();
            mv.dedup();
            moves[i] = mv;
        }
    }
    let initial = model.initial.map(|s| pos_index(np, g.initial, s));
    ParityGame { names, owner, priority, moves, initial }
}

/// The subformula evaluation game of a clean formula: board is
/// `Sfor(xi) x S`; fixpoint positions step into the body, bound
/// variables step to their binder's body. Priorities are those of the
/// subformula-dag compilation.
pub fn build_game_sfor(xi: &Formula, model: &KripkeModel) -> Result<ParityGame> {
    let binders = xi.binders()?;
    let dag = xi.subformulas();
    let np = model.size();
    let nf = dag.len();
    let n = nf * np;
    // priorities from the subformula-dag compilation, by formula
    let hxi = compile_sfor(xi)?;
    let mut prio_of: BTreeMap<usize, u32> = BTreeMap::new();
    for (k, f) in dag.iter().enumerate() {
        if let Some(vi) = hxi.index_of_id(&format!("n{}", k)) {
            if let Some(p) = hxi.priority(vi) {
                prio_of.insert(k, p);
            }
        }
    }

    let mut owner = vec![Player::Exists; n];
    let mut priority = vec![0u32; n];
    let mut moves: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut names = vec![String::new(); n];
    for (k, f) in dag.iter().enumerate() {
        for s in 0..np {
            let i = pos_index(np, k, s);
            names[i] = format!("f{}@{}", k, model.points[s]);
            priority[i] = prio_of.get(&k).copied().unwrap_or(0);
            let bound_var = match f.kind() {
                FKind::Lit(v, true) if binders.contains_key(v) => Some(v.clone()),
                _ => None,
            };
            let (ow, mv): (Player, Vec<usize>) = if let Some(x) = bound_var {
                // (x, s) -> (delta_x, s)
                let delta = &binders[&x].1;
                (
                    Player::Exists,
                    vec![pos_index(np, dag.index_of(delta).expect("body in dag"), s)],
                )
            } else {
                match f.kind() {
                    FKind::Top => (Player::Forall, Vec::new()),
                    FKind::Bot => (Player::Exists, Vec::new()),
                    FKind::Lit(p, positive) => {
                        let truth = model.holds(p, s) == *positive;
                        (if truth { Player::Forall } else { Player::Exists }, Vec::new())
                    }
                    FKind::Or(a, b) => (
                        Player::Exists,
                        vec![
                            pos_index(np, dag.index_of(a).unwrap(), s),
                            pos_index(np, dag.index_of(b).unwrap(), s),
                        ],
                    ),
                    FKind::And(a, b) => (
                        Player::Forall,
                        vec![
                            pos_index(np, dag.index_of(a).unwrap(), s),
                            pos_index(np, dag.index_of(b).unwrap(), s),
                        ],
                    ),
                    FKind::Dia(a) => {
                        let ka = dag.index_of(a).unwrap();
                        (
                            Player::Exists,
                            model.succ[s].iter().map(|&t| pos_index(np, ka, t)).collect(),
                        )
                    }
                    FKind::Box(a) => {
                        let ka = dag.index_of(a).unwrap();
                        (
                            Player::Forall,
                            model.succ[s].iter().map(|&t| pos_index(np, ka, t)).collect(),
                        )
                    }
                    FKind::Fix(_, _, body) => (
                        Player::Exists,
                        vec![pos_index(np, dag.index_of(body).unwrap(), s)],
                    ),
                }
            };
            owner[i] = ow;
            let mut mv = mv;
            mv.sort_unstable();
            mv.dedup();
            moves[i] = mv;
        }
    }
    let root = dag.index_of(xi).unwrap();
    let initial = model.initial.map(|s| pos_index(np, root, s));
    Ok(ParityGame { names, owner, priority, moves, initial })
}

/// The closure evaluation game of a tidy formula: board is
/// `Clos(xi) x S`; fixpoint positions step to their unfolding. The
/// priorities are the global priority assignment.
pub fn build_game_clos(xi: &Formula, model: &KripkeModel) -> Result<ParityGame> {
    xi.check_tidy()?;
    let g = closure(xi)?;
    let co = closure_order(&g);
    let omega = global_priority(&g, &co);
    let np = model.size();
    let nf = g.len();
    let n = nf * np;
    let mut owner = vec![Player::Exists; n];
    let mut priority = vec![0u32; n];
    let mut moves: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut names = vec![String::new(); n];
    for k in 0..nf {
        let f = g.node(k);
        for s in 0..np {
            let i = pos_index(np, k, s);
            names[i] = format!("c{}@{}", k, model.points[s]);
            priority[i] = omega.get(&k).copied().unwrap_or(0);
            let (ow, mv): (Player, Vec<usize>) = match f.kind() {
                FKind::Top => (Player::Forall, Vec::new()),
                FKind::Bot => (Player::Exists, Vec::new()),
                FKind::Lit(p, positive) => {
                    let truth = model.holds(p, s) == *positive;
                    (if truth { Player::Forall } else { Player::Exists }, Vec::new())
                }
                FKind::Or(..) => (
                    Player::Exists,
                    g.succs(k).iter().map(|&w| pos_index(np, w, s)).collect(),
                ),
                FKind::And(..) => (
                    Player::Forall,
                    g.succs(k).iter().map(|&w| pos_index(np, w, s)).collect(),
                ),
                FKind::Dia(_) => (
                    Player::Exists,
                    g.succs(k)
                        .iter()
                        .flat_map(|&w| model.succ[s].iter().map(move |&t| pos_index(np, w, t)))
                        .collect(),
                ),
                FKind::Box(_) => (
                    Player::Forall,
                    g.succs(k)
                        .iter()
                        .flat_map(|&w| model.succ[s].iter().map(move |&t| pos_index(np, w, t)))
                        .collect(),
                ),
                FKind::Fix(..) => (
                    // single move to the unfolding
                    Player::Exists,
                    g.succs(k).iter().map(|&w| pos_index(np, w, s)).collect(),
                ),
            };
            owner[i] = ow;
            let mut mv = mv;
            mv.sort_unstable();
            mv.dedup();
            moves[i] = mv;
        }
    }
    let initial = model.initial.map(|s| pos_index(np, g.root(), s));
    Ok(ParityGame { names, owner, priority, moves, initial })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_point_model() -> KripkeModel {
        KripkeModel {
            points: vec!["s".into()],
            succ: vec![vec![]],
            valuation: BTreeMap::new(),
            initial: Some(0),
        }
    }

    #[test]
    fn top_position_is_forall_dead_end() {
        let g = ParityFormula {
            verts: vec![crate::parity::Vertex {
                id: "t".into(),
                label: Label::Top,
                priority: None,
            }],
            succ: vec![vec![]],
            initial: 0,
            tagging: None,
        };
        let game = build_game(&g, &single_point_model());
        assert_eq!(game.size(), 1);
        assert_eq!(game.owner[0], Player::Forall);
        assert!(game.moves[0].is_empty());
    }

    #[test]
    fn dia_with_no_successors_strands_exists() {
        let g = ParityFormula {
            verts: vec![
                crate::parity::Vertex { id: "d".into(), label: Label::Dia, priority: None },
                crate::parity::Vertex { id: "t".into(), label: Label::Top, priority: None },
            ],
            succ: vec![vec![1], vec![]],
            initial: 0,
            tagging: None,
        };
        let game = build_game(&g, &single_point_model());
        assert_eq!(game.owner[0], Player::Exists);
        assert!(game.moves[0].is_empty());
        // position count |V| * |S|
        assert_eq!(game.size(), 2);
    }
}
