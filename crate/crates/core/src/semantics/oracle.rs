//! Model checking through evaluation games, the direct Knaster-Tarski
//! iteration used as an independent oracle, and the randomized
//! equivalence oracle for transformations.

use super::{build_game, solve, KripkeModel, Player};
use crate::compile::compile_clos;
use crate::error::Result;
use crate::formula::{FKind, Formula, Parity, Var};
use crate::parity::ParityFormula;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};

/// Either side of an equivalence check.
#[derive(Debug, Clone)]
pub enum EquivInput {
    Formula(Formula),
    Parity(ParityFormula),
}

impl EquivInput {
    pub fn letters(&self) -> Vec<Var> {
        match self {
            EquivInput::Formula(f) => f.fv().iter().cloned().collect(),
            EquivInput::Parity(g) => g.letters(),
        }
    }

    fn to_parity(&self) -> Result<ParityFormula> {
        match self {
            EquivInput::Formula(f) => Ok(compile_clos(f)?.0),
            EquivInput::Parity(g) => Ok(g.clone()),
        }
    }
}

/// Game-based model checking: true iff the initial position is winning
/// for the verifier. Formula inputs are compiled over their closure
/// graph first.
pub fn model_check(input: &EquivInput, model: &KripkeModel, point: usize) -> Result<bool> {
    let g = input.to_parity()?;
    Ok(model_check_parity(&g, model, point))
}

pub(crate) fn model_check_parity(g: &ParityFormula, model: &KripkeModel, point: usize) -> bool {
    let game = build_game(g, model);
    let sol = solve(&game);
    sol.winner[g.initial * model.size() + point] == Player::Exists
}

/// Direct fixpoint iteration over the powerset lattice, independent of
/// the game machinery; intended for small models.
pub fn fixpoint_mc_oracle(f: &Formula, model: &KripkeModel) -> BTreeSet<usize> {
    let mut env: BTreeMap<Var, BTreeSet<usize>> = BTreeMap::new();
    eval(f, model, &mut env)
}

fn eval(
    f: &Formula,
    model: &KripkeModel,
    env: &mut BTreeMap<Var, BTreeSet<usize>>,
) -> BTreeSet<usize> {
    let all: BTreeSet<usize> = (0..model.size()).collect();
    match f.kind() {
        FKind::Top => all,
        FKind::Bot => BTreeSet::new(),
        FKind::Lit(p, positive) => {
            let base = env
                .get(p)
                .cloned()
                .unwrap_or_else(|| model.valuation.get(p).cloned().unwrap_or_default());
            if *positive {
                base
            } else {
                all.difference(&base).copied().collect()
            }
        }
        FKind::And(a, b) => {
            let x = eval(a, model, env);
            let y = eval(b, model, env);
            x.intersection(&y).copied().collect()
        }
        FKind::Or(a, b) => {
            let x = eval(a, model, env);
            let y = eval(b, model, env);
            x.union(&y).copied().collect()
        }
        FKind::Dia(a) => {
            let x = eval(a, model, env);
            (0..model.size())
                .filter(|&s| model.succ[s].iter().any(|t| x.contains(t)))
                .collect()
        }
        FKind::Box(a) => {
            let x = eval(a, model, env);
            (0..model.size())
                .filter(|&s| model.succ[s].iter().all(|t| x.contains(t)))
                .collect()
        }
        FKind::Fix(eta, x, body) => {
            let mut cur: BTreeSet<usize> = match eta {
                Parity::Mu => BTreeSet::new(),
                Parity::Nu => all,
            };
            loop {
                let saved = env.insert(x.clone(), cur.clone());
                let next = eval(body, model, env);
                match saved {
                    Some(v) => {
                        env.insert(x.clone(), v);
                    }
                    None => {
                        env.remove(x);
                    }
                }
                if next == cur {
                    return cur;
                }
                cur = next;
            }
        }
    }
}

/// Outcome of an equivalence test.
#[derive(Debug, Clone)]
pub enum EquivVerdict {
    Consistent { models_checked: usize },
    Counterexample { model: KripkeModel, point: usize, left: bool, right: bool },
}

impl EquivVerdict {
    pub fn is_consistent(&self) -> bool {
        matches!(self, EquivVerdict::Consistent { .. })
    }
}

/// Generates a pseudo-random pointed model over the letters.
pub fn random_model(letters: &[Var], max_states: usize, rng: &mut ChaCha8Rng) -> KripkeModel {
    let n = rng.gen_range(1..=max_states.max(1));
    let edge_p = rng.gen_range(0.15..0.75);
    let val_p = rng.gen_range(0.2..0.8);
    let mut succ = vec![Vec::new(); n];
    for s in 0..n {
        for t in 0..n {
            if rng.gen_bool(edge_p) {
                succ[s].push(t);
            }
        }
    }
    let mut valuation: BTreeMap<Var, BTreeSet<usize>> = BTreeMap::new();
    for p in letters {
        let set: BTreeSet<usize> = (0..n).filter(|_| rng.gen_bool(val_p)).collect();
        valuation.insert(p.clone(), set);
    }
    KripkeModel {
        points: (0..n).map(|i| format!("s{}", i)).collect(),
        succ,
        valuation,
        initial: Some(rng.gen_range(0..n)),
    }
}

/// All models with at most two points over at most two letters, used as
/// an exhaustive sweep.
pub fn small_model_sweep(letters: &[Var]) -> Vec<(KripkeModel, usize)> {
    let ls: Vec<Var> = letters.iter().take(2).cloned().collect();
    let mut out = Vec::new();
    for n in 1..=2usize {
        let pairs: Vec<(usize, usize)> =
            (0..n).flat_map(|s| (0..n).map(move |t| (s, t))).collect();
        for edge_mask in 0..(1u32 << pairs.len()) {
            let mut succ = vec![Vec::new(); n];
            for (k, &(s, t)) in pairs.iter().enumerate() {
                if edge_mask & (1 << k) != 0 {
                    succ[s].push(t);
                }
            }
            let cells: Vec<(usize, usize)> =
                (0..ls.len()).flat_map(|p| (0..n).map(move |s| (p, s))).collect();
            for val_mask in 0..(1u32 << cells.len()) {
                let mut valuation: BTreeMap<Var, BTreeSet<usize>> = BTreeMap::new();
                for (k, &(p, s)) in cells.iter().enumerate() {
                    if val_mask & (1 << k) != 0 {
                        valuation.entry(ls[p].clone()).or_default().insert(s);
                    }
                }
                for point in 0..n {
                    out.push((
                        KripkeModel {
                            points: (0..n).map(|i| format!("s{}", i)).collect(),
                            succ: succ.clone(),
                            valuation: valuation.clone(),
                            initial: Some(point),
                        },
                        point,
                    ));
                }
            }
        }
    }
    out
}

/// Compares two inputs on `samples` random pointed models plus the
/// exhaustive two-point sweep. Seeded for reproducibility; the failing
/// model is returned on disagreement.
pub fn equiv_oracle(
    a: &EquivInput,
    b: &EquivInput,
    samples: usize,
    max_states: usize,
    seed: u64,
) -> Result<EquivVerdict> {
    let mut letters: Vec<Var> = a.letters();
    for l in b.letters() {
        if !letters.contains(&l) {
            letters.push(l);
        }
    }
    letters.sort();
    let ga = a.to_parity()?;
    let gb = b.to_parity()?;
    let mut checked = 0;
    for (model, point) in small_model_sweep(&letters) {
        let x = model_check_parity(&ga, &model, point);
        let y = model_check_parity(&gb, &model, point);
        checked += 1;
        if x != y {
            return Ok(EquivVerdict::Counterexample { model, point, left: x, right: y });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let model = random_model(&letters, max_states, &mut rng);
        let point = model.initial.unwrap_or(0);
        let x = model_check_parity(&ga, &model, point);
        let y = model_check_parity(&gb, &model, point);
        checked += 1;
        if x != y {
            return Ok(EquivVerdict::Counterexample { model, point, left: x, right: y });
        }
    }
    Ok(EquivVerdict::Consistent { models_checked: checked })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    fn model_chain() -> KripkeModel {
        // s0 -> s1 -> s2, q holds at s2
        KripkeModel {
            points: vec!["s0".into(), "s1".into(), "s2".into()],
            succ: vec![vec![1], vec![2], vec![]],
            valuation: BTreeMap::from([(Var::new("q"), BTreeSet::from([2]))]),
            initial: Some(0),
        }
    }

    #[test]
    fn iteration_oracle_reachability() {
        let f = parse("mu x. q \\/ <>x").unwrap();
        let out = fixpoint_mc_oracle(&f, &model_chain());
        assert_eq!(out, BTreeSet::from([0, 1, 2]));
    }

    #[test]
    fn mu_dia_is_unsatisfiable_on_finite_models() {
        let f = parse("mu x. <>x").unwrap();
        for (model, _) in small_model_sweep(&[]) {
            assert!(fixpoint_mc_oracle(&f, &model).is_empty());
        }
    }

    #[test]
    fn nu_dia_on_cycle() {
        let mut m = model_chain();
        m.succ[2].push(0);
        let f = parse("nu x. <>x").unwrap();
        let out = fixpoint_mc_oracle(&f, &m);
        assert_eq!(out, BTreeSet::from([0, 1, 2]));
    }

    #[test]
    fn p_vs_q_has_counterexample() {
        let a = EquivInput::Formula(parse("p").unwrap());
        let b = EquivInput::Formula(parse("q").unwrap());
        assert!(!equiv_oracle(&a, &b, 10, 3, 7).unwrap().is_consistent());
    }

    #[test]
    fn unfolding_is_equivalent() {
        let f = parse("mu x. q \\/ <>x").unwrap();
        let u = crate::formula::unfold(&f).unwrap();
        let v = equiv_oracle(
            &EquivInput::Formula(f),
            &EquivInput::Formula(u),
            50,
            4,
            11,
        )
        .unwrap();
        assert!(v.is_consistent());
    }
}
