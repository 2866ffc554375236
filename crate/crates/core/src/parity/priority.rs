//! Parity preorders and the priority map they induce: the height-based,
//! parity-corrected assignment with connected range.

use super::ParityFormula;
use crate::error::{Error, Result};

/// A parity preorder: a directed preorder with a two-valued parity map
/// constant on equivalence cells.
#[derive(Debug, Clone)]
pub struct ParityPreorder {
    pub n: usize,
    /// `leq[i][j]` iff element i is below element j.
    pub leq: Vec<Vec<bool>>,
    /// 0 for even (nu), 1 for odd (mu).
    pub parity: Vec<u8>,
}

impl ParityPreorder {
    pub fn check(&self) -> Result<()> {
        let n = self.n;
        for i in 0..n {
            if !self.leq[i][i] {
                return Err(Error::BadInput("preorder is not reflexive".into()));
            }
            for j in 0..n {
                if self.leq[i][j] && self.leq[j][i] && self.parity[i] != self.parity[j] {
                    return Err(Error::BadInput(
                        "equivalent elements with different parity".into(),
                    ));
                }
                for k in 0..n {
                    if self.leq[i][j] && self.leq[j][k] && !self.leq[i][k] {
                        return Err(Error::BadInput("preorder is not transitive".into()));
                    }
                }
            }
        }
        // directedness
        for i in 0..n {
            for j in 0..n {
                if !(0..n).any(|k| self.leq[i][k] && self.leq[j][k]) {
                    return Err(Error::BadInput("preorder is not directed".into()));
                }
            }
        }
        Ok(())
    }

    fn strict(&self, i: usize, j: usize) -> bool {
        self.leq[i][j] && !self.leq[j][i]
    }

    /// Maximal length of an alternating chain starting at `i`.
    pub fn height_up(&self, i: usize) -> u32 {
        fn go(p: &ParityPreorder, i: usize, memo: &mut Vec<Option<u32>>) -> u32 {
            if let Some(v) = memo[i] {
                return v;
            }
            let mut best = 1;
            for j in 0..p.n {
                if p.strict(i, j) && p.parity[i] != p.parity[j] {
                    best = best.max(1 + go(p, j, memo));
                }
            }
            memo[i] = Some(best);
            best
        }
        let mut memo = vec![None; self.n];
        go(self, i, &mut memo)
    }

    /// Maximal length of an alternating chain anywhere.
    pub fn ad(&self) -> u32 {
        (0..self.n).map(|i| self.height_up(i)).max().unwrap_or(0)
    }
}

/// The priority map induced by a parity preorder: `ad - h_up`, bumped by
/// one when that misses the element's parity. The range is connected and
/// has exactly `ad` values.
pub fn induced_priority(p: &ParityPreorder) -> Vec<u32> {
    let ad = p.ad();
    let mut memo = vec![None; p.n];
    fn go(p: &ParityPreorder, i: usize, memo: &mut Vec<Option<u32>>) -> u32 {
        if let Some(v) = memo[i] {
            return v;
        }
        let mut best = 1;
        for j in 0..p.n {
            if p.leq[i][j] && !p.leq[j][i] && p.parity[i] != p.parity[j] {
                best = best.max(1 + go(p, j, memo));
            }
        }
        memo[i] = Some(best);
        best
    }
    (0..p.n)
        .map(|i| {
            let base = ad - go(p, i, &mut memo);
            if base % 2 == p.parity[i] as u32 {
                base
            } else {
                base + 1
            }
        })
        .collect()
}

/// Replaces the priority map clusterwise by the one induced from the
/// order `Omega(u) <= Omega(v)` on states. The result is a tight parity
/// variant with index at most the input's.
pub fn tighten(g: &ParityFormula) -> ParityFormula {
    let info = g.clusters();
    let mut out = g.clone();
    for comp in info.comps.iter() {
        let states: Vec<usize> = comp.iter().copied().filter(|&v| g.is_state(v)).collect();
        if states.is_empty() {
            continue;
        }
        let n = states.len();
        let leq: Vec<Vec<bool>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| g.priority(states[i]).unwrap() <= g.priority(states[j]).unwrap())
                    .collect()
            })
            .collect();
        let parity: Vec<u8> = states.iter().map(|&v| (g.priority(v).unwrap() % 2) as u8).collect();
        let p = ParityPreorder { n, leq, parity };
        let omega = induced_priority(&p);
        for (k, &v) in states.iter().enumerate() {
            out.verts[v].priority = Some(omega[k]);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parity::{Label, Vertex};

    #[test]
    fn two_element_alternating_chain() {
        // u strictly below v, u odd, v even: priorities 1 and 2
        let p = ParityPreorder {
            n: 2,
            leq: vec![vec![true, true], vec![false, true]],
            parity: vec![1, 0],
        };
        p.check().unwrap();
        assert_eq!(p.ad(), 2);
        assert_eq!(induced_priority(&p), vec![1, 2]);
    }

    #[test]
    fn same_parity_collapses() {
        let p = ParityPreorder {
            n: 2,
            leq: vec![vec![true, true], vec![false, true]],
            parity: vec![1, 1],
        };
        let omega = induced_priority(&p);
        assert_eq!(omega[0], omega[1]);
        assert_eq!(p.ad(), 1);
    }

    #[test]
    fn range_is_connected() {
        // chain of four alternating elements
        let n = 4;
        let leq: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| i <= j).collect()).collect();
        let parity = vec![1, 0, 1, 0];
        let p = ParityPreorder { n, leq, parity };
        let omega = induced_priority(&p);
        let mut range: Vec<u32> = omega.clone();
        range.sort_unstable();
        range.dedup();
        assert_eq!(range.len() as u32, p.ad());
        for w in range.windows(2) {
            assert_eq!(w[1], w[0] + 1);
        }
        // top of a chain with ad even and maximum even: range [1, H]
        assert_eq!(range, vec![1, 2, 3, 4]);
    }

    #[test]
    fn tighten_collapses_same_parity_priorities() {
        // one cluster, states with priorities 3 and 7 (same parity)
        let g = ParityFormula {
            verts: vec![
                Vertex { id: "a".into(), label: Label::Eps, priority: Some(3) },
                Vertex { id: "b".into(), label: Label::Eps, priority: Some(7) },
            ],
            succ: vec![vec![1], vec![0]],
            initial: 0,
            tagging: None,
        };
        let t = tighten(&g);
        assert_eq!(t.priority(0), t.priority(1));
        // idempotent
        let tt = tighten(&t);
        for v in 0..2 {
            assert_eq!(t.priority(v), tt.priority(v));
        }
    }
}
