//! Benchmark families and seeded random generators for formulas, parity
//! formulas, models and games.

use crate::decompile::{decompile_initial, externalize_variables};
use crate::error::{Error, Result};
use crate::formula::{Formula, Parity, Var};
use crate::parity::{Label, ParityFormula, Vertex};
use crate::semantics::{ParityGame, Player};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A named generator family with its parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// The ladder of conjunction/diamond vertices with one cluster and
    /// priorities 0..n whose translation blows up exponentially.
    Bfl,
    /// `xi_0 = p`, `xi_{k+1} = xi_k /\ xi_k`: length doubles, few
    /// subformulas.
    SizeChain,
    /// `chi_0 = nu x. []x`, `chi_{k+1} = chi_k /\ chi_k`.
    SforChain,
    /// The translation of the ladder at its initial vertex.
    CleanCost,
}

impl std::str::FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Family> {
        match s {
            "bfl" => Ok(Family::Bfl),
            "sizechain" => Ok(Family::SizeChain),
            "sforchain" => Ok(Family::SforChain),
            "cleancost" => Ok(Family::CleanCost),
            _ => Err(Error::BadInput(format!("unknown family {}", s))),
        }
    }
}

/// The generated artifact: a formula or a parity formula.
#[derive(Debug, Clone)]
pub enum Generated {
    Formula(Formula),
    Parity(ParityFormula),
}

/// The ladder parity formula: vertices `s_0..s_n` (conjunctions) and
/// `v_0..v_n` (diamonds with priorities 0..n), one big cluster.
pub fn bfl(n: usize) -> ParityFormula {
    let mut verts = Vec::new();
    let mut succ: Vec<Vec<usize>> = Vec::new();
    // indices: s_i -> i, v_i -> n+1+i
    for i in 0..=n {
        verts.push(Vertex { id: format!("s{}", i), label: Label::And, priority: None });
        succ.push(Vec::new());
    }
    for i in 0..=n {
        verts.push(Vertex {
            id: format!("v{}", i),
            label: Label::Dia,
            priority: Some(i as u32),
        });
        succ.push(Vec::new());
    }
    let s = |i: usize| i;
    let v = |i: usize| n + 1 + i;
    for i in 0..=n {
        succ[s(i)].push(v(i));
        if i > 0 {
            succ[s(i)].push(s(i - 1));
        }
    }
    succ[v(0)].push(s(n));
    for i in 1..=n {
        succ[v(i)].push(s(i));
    }
    ParityFormula { verts, succ, initial: v(0), tagging: None }
}

/// Generates a family member.
pub fn gen_family(family: Family, n: usize) -> Result<Generated> {
    Ok(match family {
        Family::Bfl => Generated::Parity(bfl(n)),
        Family::SizeChain => {
            let mut f = Formula::var(Var::new("p"));
            for _ in 0..n {
                f = Formula::and(f.clone(), f.clone());
            }
            Generated::Formula(f)
        }
        Family::SforChain => {
            let mut f = Formula::nu(Var::new("x"), Formula::boxm(Formula::var(Var::new("x"))))?;
            for _ in 0..n {
                f = Formula::and(f.clone(), f.clone());
            }
            Generated::Formula(f)
        }
        Family::CleanCost => {
            let g = bfl(n);
            Generated::Formula(externalize_variables(&decompile_initial(&g)?))
        }
    })
}

/// The variable-disjoint variant of the box chain: each doubling uses
/// fresh bound variables, so sharing collapses nothing.
pub fn sforchain_distinct(n: usize) -> Formula {
    fn build(n: usize, path: &mut String) -> Formula {
        if n == 0 {
            let x = Var::new(&format!("x{}", path));
            return Formula::nu(x.clone(), Formula::boxm(Formula::var(x))).unwrap();
        }
        path.push('0');
        let a = build(n - 1, path);
        path.pop();
        path.push('1');
        let b = build(n - 1, path);
        path.pop();
        Formula::and(a, b)
    }
    build(n, &mut String::from("e"))
}

/// Configuration for random formula generation.
#[derive(Debug, Clone)]
pub struct FormulaGen {
    /// Proposition letters for literals.
    pub letters: Vec<Var>,
    /// Pool of bound-variable names; cleanliness is guaranteed when the
    /// generator never reuses one (see `clean`).
    pub clean: bool,
    /// Target length budget.
    pub max_len: u64,
    /// Chance of producing a fixpoint at an inner node.
    pub fix_weight: u32,
}

impl FormulaGen {
    pub fn clean_default(max_len: u64) -> FormulaGen {
        FormulaGen {
            letters: vec![Var::new("p"), Var::new("q"), Var::new("r")],
            clean: true,
            max_len,
            fix_weight: 30,
        }
    }

    pub fn tidy_default(max_len: u64) -> FormulaGen {
        FormulaGen { clean: false, ..FormulaGen::clean_default(max_len) }
    }
}

/// Generates a random positive formula. With `clean` every binder gets a
/// fresh variable (the result is clean); otherwise binder names come
/// from a two-name pool disjoint from the letters (the result is tidy,
/// not necessarily clean).
pub fn random_formula(cfg: &FormulaGen, rng: &mut ChaCha8Rng) -> Formula {
    let mut counter = 0u64;
    gen_rec(cfg, rng, cfg.max_len.max(1), &mut counter, &mut Vec::new())
}

fn gen_rec(
    cfg: &FormulaGen,
    rng: &mut ChaCha8Rng,
    budget: u64,
    counter: &mut u64,
    scope: &mut Vec<Var>,
) -> Formula {
    if budget <= 1 {
        // an atom: letter, negated letter, constant, or a variable in scope
        let roll = rng.gen_range(0..10);
        return if roll < 1 {
            if rng.gen_bool(0.5) {
                Formula::top()
            } else {
                Formula::bot()
            }
        } else if !scope.is_empty() && roll < 5 {
            Formula::var(scope.choose(rng).unwrap().clone())
        } else {
            let p = cfg.letters[rng.gen_range(0..cfg.letters.len())].clone();
            Formula::lit(p, rng.gen_bool(0.75))
        };
    }
    let choice = rng.gen_range(0..100u32);
    if choice < cfg.fix_weight && budget >= 3 {
        let x = if cfg.clean {
            *counter += 1;
            Var::new(&format!("b{}", *counter))
        } else {
            Var::new(if rng.gen_bool(0.5) { "a" } else { "b" })
        };
        scope.push(x.clone());
        let body = gen_rec(cfg, rng, budget - 2, counter, scope);
        scope.pop();
        let eta = if rng.gen_bool(0.5) { Parity::Mu } else { Parity::Nu };
        // the body is positive in x by construction (variables occur
        // positively)
        Formula::fix(eta, x, body).expect("positive body")
    } else if choice < cfg.fix_weight + 25 {
        let inner = gen_rec(cfg, rng, budget - 1, counter, scope);
        if rng.gen_bool(0.5) {
            Formula::dia(inner)
        } else {
            Formula::boxm(inner)
        }
    } else if choice < cfg.fix_weight + 65 && budget >= 2 {
        let lb = budget / 2;
        let a = gen_rec(cfg, rng, lb.max(1), counter, scope);
        let b = gen_rec(cfg, rng, (budget - lb).max(1), counter, scope);
        if rng.gen_bool(0.5) {
            Formula::and(a, b)
        } else {
            Formula::or(a, b)
        }
    } else {
        gen_rec(cfg, rng, 1, counter, scope)
    }
}

/// Random formulas until one is clean and contains at least one binder.
pub fn random_clean_formula(max_len: u64, rng: &mut ChaCha8Rng) -> Formula {
    let cfg = FormulaGen::clean_default(max_len);
    loop {
        let f = random_formula(&cfg, rng);
        if f.is_clean() {
            return f;
        }
    }
}

/// Random tidy formulas; bound names may repeat across binders.
pub fn random_tidy_formula(max_len: u64, rng: &mut ChaCha8Rng) -> Formula {
    let cfg = FormulaGen::tidy_default(max_len);
    loop {
        let f = random_formula(&cfg, rng);
        if f.is_tidy() {
            return f;
        }
    }
}

/// Random formulas over a shared letter/binder pool, so free and bound
/// occurrences may clash (untidy inputs for the renaming machinery).
pub fn random_any_formula(max_len: u64, rng: &mut ChaCha8Rng) -> Formula {
    let cfg = FormulaGen {
        letters: vec![Var::new("p"), Var::new("q"), Var::new("a"), Var::new("b")],
        clean: false,
        max_len,
        fix_weight: 35,
    };
    random_formula(&cfg, rng)
}

/// Generates a random valid parity formula with at most `max_verts`
/// vertices and priorities below `max_prio`. Arities follow the labels;
/// stateless cycles are patched by promoting one vertex per offending
/// component to a state.
pub fn random_parity_formula(
    max_verts: usize,
    max_prio: u32,
    rng: &mut ChaCha8Rng,
) -> ParityFormula {
    let n = rng.gen_range(1..=max_verts.max(1));
    let letters = [Var::new("p"), Var::new("q")];
    let mut verts = Vec::new();
    let mut succ: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        let label = match rng.gen_range(0..10) {
            0 => Label::Top,
            1 => Label::Bot,
            2 => Label::Lit(letters[rng.gen_range(0..2)].clone(), rng.gen_bool(0.7)),
            3 | 4 => Label::Dia,
            5 => Label::Box,
            6 => Label::Eps,
            _ => {
                if rng.gen_bool(0.5) {
                    Label::And
                } else {
                    Label::Or
                }
            }
        };
        let priority = if rng.gen_bool(0.4) && !label.is_atomic() {
            Some(rng.gen_range(0..max_prio.max(1)))
        } else {
            None
        };
        verts.push(Vertex { id: format!("r{}", i), label, priority });
        succ.push(Vec::new());
    }
    for i in 0..n {
        let deg = match verts[i].label {
            Label::Top | Label::Bot | Label::Lit(..) => 0,
            Label::Dia | Label::Box | Label::Eps => 1,
            Label::And | Label::Or => rng.gen_range(0..=2),
        };
        for _ in 0..deg {
            succ[i].push(rng.gen_range(0..n));
        }
    }
    let mut g = ParityFormula { verts, succ, initial: 0, tagging: None };
    // patch stateless cycles
    loop {
        let filtered: Vec<Vec<usize>> = (0..g.size())
            .map(|v| {
                if g.is_state(v) {
                    Vec::new()
                } else {
                    g.succ_set(v).into_iter().filter(|&w| !g.is_state(w)).collect()
                }
            })
            .collect();
        let (_, comps) = crate::alternation::tarjan_scc(&filtered);
        let mut patched = false;
        for comp in comps {
            let cyc =
                comp.len() > 1 || (comp.len() == 1 && filtered[comp[0]].contains(&comp[0]));
            if cyc {
                let v = comp[0];
                g.verts[v].priority = Some(rng.gen_range(0..max_prio.max(1)));
                patched = true;
                break;
            }
        }
        if !patched {
            break;
        }
    }
    debug_assert!(g.is_valid(), "{:?}", g.validate());
    g
}

/// Generates a random untwisted parity formula: a downward tree plus
/// back edges from leaves-or-inner silent vertices to their ancestors,
/// with ancestor-monotone priorities.
pub fn random_untwisted_parity_formula(
    max_verts: usize,
    rng: &mut ChaCha8Rng,
) -> ParityFormula {
    let n = rng.gen_range(2..=max_verts.max(2));
    let letters = [Var::new("p"), Var::new("q")];
    let mut verts: Vec<Vertex> = Vec::new();
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut parent: Vec<usize> = vec![0; n];
    let mut depth: Vec<u32> = vec![0; n];
    for i in 0..n {
        verts.push(Vertex {
            id: format!("u{}", i),
            label: Label::Eps, // fixed up below
            priority: None,
        });
    }
    for i in 1..n {
        let p = rng.gen_range(0..i);
        parent[i] = p;
        depth[i] = depth[p] + 1;
        succ[p].push(i);
    }
    // labels consistent with the tree arity; extra capacity becomes
    // an atomic leaf or a back edge
    let mut back_of: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        let kids = succ[i].len();
        let label = match kids {
            0 => {
                // leaf: atom or a silent vertex with one back edge
                if rng.gen_bool(0.45) && depth[i] > 0 {
                    // back edge to a random ancestor
                    let mut anc = Vec::new();
                    let mut at = i;
                    while at != 0 {
                        at = parent[at];
                        anc.push(at);
                    }
                    let target = *anc.choose(rng).unwrap();
                    back_of[i] = Some(target);
                    succ[i].push(target);
                    Label::Eps
                } else {
                    match rng.gen_range(0..4) {
                        0 => Label::Top,
                        1 => Label::Bot,
                        _ => Label::Lit(
                            letters[rng.gen_range(0..2)].clone(),
                            rng.gen_bool(0.7),
                        ),
                    }
                }
            }
            1 => match rng.gen_range(0..4) {
                0 => Label::Dia,
                1 => Label::Box,
                2 => Label::Eps,
                _ => {
                    if rng.gen_bool(0.5) {
                        Label::And
                    } else {
                        Label::Or
                    }
                }
            },
            _ => {
                if rng.gen_bool(0.5) {
                    Label::And
                } else {
                    Label::Or
                }
            }
        };
        verts[i].label = label;
    }
    // priorities on back-edge targets, deeper targets get smaller values
    let targets: BTreeSetUsize = back_of.iter().flatten().copied().collect();
    let maxd = depth.iter().copied().max().unwrap_or(0);
    for &t in &targets {
        let base = 2 * (maxd - depth[t]) + 2;
        let value = if rng.gen_bool(0.5) { base } else { base + 1 };
        verts[t].priority = Some(value);
    }
    let g = ParityFormula { verts, succ, initial: 0, tagging: None };
    debug_assert!(g.is_valid(), "{:?}", g.validate());
    g
}

type BTreeSetUsize = std::collections::BTreeSet<usize>;

/// Random parity game with dense priorities and arbitrary moves.
pub fn random_game(max_positions: usize, max_prio: u32, rng: &mut ChaCha8Rng) -> ParityGame {
    let n = rng.gen_range(1..=max_positions.max(1));
    let mut moves = vec![Vec::new(); n];
    for (i, m) in moves.iter_mut().enumerate() {
        let deg = rng.gen_range(0..=3usize);
        for _ in 0..deg {
            m.push(rng.gen_range(0..n));
        }
        m.sort_unstable();
        m.dedup();
        let _ = i;
    }
    ParityGame {
        names: (0..n).map(|i| format!("p{}", i)).collect(),
        owner: (0..n)
            .map(|_| if rng.gen_bool(0.5) { Player::Exists } else { Player::Forall })
            .collect(),
        priority: (0..n).map(|_| rng.gen_range(0..max_prio.max(1))).collect(),
        moves,
        initial: Some(0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::rand_core::SeedableRng;

    #[test]
    fn bfl_shape() {
        let g = bfl(4);
        assert_eq!(g.size(), 10);
        assert!(g.is_valid(), "{:?}", g.validate());
        // one nondegenerate cluster containing everything
        let info = g.clusters();
        assert_eq!(info.comps.len(), 1);
        assert!(!info.degenerate[0]);
        assert_eq!(g.index(), 5);
    }

    #[test]
    fn sforchain_zero() {
        let Generated::Formula(f) = gen_family(Family::SforChain, 0).unwrap() else {
            panic!()
        };
        assert_eq!(crate::formula::ssz(&f), 3);
    }

    #[test]
    fn random_generators_are_deterministic() {
        let mut a = ChaCha8Rng::seed_from_u64(1);
        let mut b = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(random_clean_formula(20, &mut a), random_clean_formula(20, &mut b));
    }

    #[test]
    fn random_parity_formulas_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let g = random_parity_formula(12, 4, &mut rng);
            assert!(g.is_valid(), "{:?}", g.validate());
        }
    }

    #[test]
    fn random_untwisted_formulas_decompose() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..40 {
            let g = random_untwisted_parity_formula(10, &mut rng);
            crate::parity::untwisted_decompose(&g).unwrap();
        }
    }
}
