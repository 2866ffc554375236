//! Kripke models, evaluation games, a parity-game solver and the
//! randomized equivalence oracle that validates transformations.

mod game;
mod oracle;
mod solve;

pub use game::{build_game, build_game_clos, build_game_sfor, GamePos, ParityGame, Player};
pub use oracle::{equiv_oracle, fixpoint_mc_oracle, model_check, EquivInput, EquivVerdict};
pub use solve::{solve, verify_strategy, Solution};

use crate::formula::Var;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// A finite pointed Kripke structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KripkeModel {
    /// Point names, indexed densely.
    pub points: Vec<String>,
    /// Accessibility, as sorted successor lists.
    pub succ: Vec<Vec<usize>>,
    /// Valuation: which points satisfy each letter.
    pub valuation: BTreeMap<Var, BTreeSet<usize>>,
    /// Optional distinguished point.
    pub initial: Option<usize>,
}

impl KripkeModel {
    pub fn size(&self) -> usize {
        self.points.len()
    }

    pub fn holds(&self, p: &Var, s: usize) -> bool {
        self.valuation.get(p).map(|set| set.contains(&s)).unwrap_or(false)
    }

    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Dto<'a> {
            points: &'a [String],
            edges: Vec<[&'a str; 2]>,
            valuation: BTreeMap<String, Vec<&'a str>>,
            #[serde(skip_serializing_if = "Option::is_none")]
            initial: Option<&'a str>,
        }
        let edges: Vec<[&str; 2]> = self
            .succ
            .iter()
            .enumerate()
            .flat_map(|(s, ts)| {
                ts.iter().map(move |&t| [self.points[s].as_str(), self.points[t].as_str()])
            })
            .collect();
        let valuation: BTreeMap<String, Vec<&str>> = self
            .valuation
            .iter()
            .map(|(p, set)| {
                (
                    p.name().to_string(),
                    set.iter().map(|&s| self.points[s].as_str()).collect(),
                )
            })
            .collect();
        serde_json::to_value(Dto {
            points: &self.points,
            edges,
            valuation,
            initial: self.initial.map(|i| self.points[i].as_str()),
        })
        .expect("model serialises")
    }

    pub fn from_json(value: &serde_json::Value) -> crate::error::Result<KripkeModel> {
        #[derive(Deserialize)]
        struct Dto {
            points: Vec<String>,
            #[serde(default)]
            edges: Vec<[String; 2]>,
            #[serde(default)]
            valuation: BTreeMap<String, Vec<String>>,
            #[serde(default)]
            initial: Option<String>,
        }
        let dto: Dto = serde_json::from_value(value.clone())
            .map_err(|e| crate::error::Error::BadInput(format!("kripke model json: {}", e)))?;
        let idx = |name: &str| -> crate::error::Result<usize> {
            dto.points
                .iter()
                .position(|p| p == name)
                .ok_or_else(|| crate::error::Error::BadInput(format!("unknown point {}", name)))
        };
        let mut succ = vec![Vec::new(); dto.points.len()];
        for [a, b] in &dto.edges {
            let (i, j) = (idx(a)?, idx(b)?);
            succ[i].push(j);
        }
        for s in &mut succ {
            s.sort_unstable();
            s.dedup();
        }
        let mut valuation = BTreeMap::new();
        for (p, pts) in &dto.valuation {
            let mut set = BTreeSet::new();
            for s in pts {
                set.insert(idx(s)?);
            }
            valuation.insert(Var::new(p), set);
        }
        let initial = match &dto.initial {
            Some(s) => Some(idx(s)?),
            None => None,
        };
        Ok(KripkeModel { points: dto.points, succ, valuation, initial })
    }
}
