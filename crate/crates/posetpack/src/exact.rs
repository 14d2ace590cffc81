//! Exact cover by backtracking with most-constrained-item branching.

use crate::error::{Error, Result};

/// Items `0..n_items`; each set lists the items it covers.
#[derive(Clone, Debug)]
pub struct ExactCover {
    n_items: usize,
    sets: Vec<Vec<usize>>,
    by_item: Vec<Vec<usize>>,
}

struct State {
    covered: Vec<bool>,
    alive: Vec<bool>,
    count: Vec<usize>,
    killed: Vec<usize>,
    nodes: u64,
    budget: u64,
}

impl ExactCover {
    pub fn new(n_items: usize, sets: Vec<Vec<usize>>) -> ExactCover {
        let mut by_item = vec![Vec::new(); n_items];
        for (s, items) in sets.iter().enumerate() {
            for &i in items {
                by_item[i].push(s);
            }
        }
        ExactCover { n_items, sets, by_item }
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    /// Selection of disjoint sets covering all but at most `skips` items.
    /// `Ok(None)` is an exhaustive proof that no such selection exists.
    pub fn solve(&self, budget: u64, skips: usize) -> Result<Option<Vec<usize>>> {
        let mut st = State {
            covered: vec![false; self.n_items],
            alive: vec![true; self.sets.len()],
            count: self.by_item.iter().map(|v| v.len()).collect(),
            killed: Vec::new(),
            nodes: 0,
            budget,
        };
        let mut chosen = Vec::new();
        if self.rec(&mut st, &mut chosen, skips)? {
            Ok(Some(chosen))
        } else {
            Ok(None)
        }
    }

    fn kill_touching(&self, st: &mut State, item: usize) {
        for &s in &self.by_item[item] {
            if st.alive[s] {
                st.alive[s] = false;
                st.killed.push(s);
                for &j in &self.sets[s] {
                    st.count[j] -= 1;
                }
            }
        }
    }

    fn undo(&self, st: &mut State, mark: usize) {
        while st.killed.len() > mark {
            let s = st.killed.pop().expect("nonempty");
            st.alive[s] = true;
            for &j in &self.sets[s] {
                st.count[j] += 1;
            }
        }
    }

    fn rec(&self, st: &mut State, chosen: &mut Vec<usize>, skips: usize) -> Result<bool> {
        st.nodes += 1;
        if st.nodes > st.budget {
            return Err(Error::Timeout(st.budget));
        }
        let mut best: Option<usize> = None;
        let mut zeros = 0;
        for i in 0..self.n_items {
            if st.covered[i] {
                continue;
            }
            if st.count[i] == 0 {
                zeros += 1;
            }
            if best.is_none_or(|b| st.count[i] < st.count[b]) {
                best = Some(i);
            }
        }
        let Some(item) = best else { return Ok(true) };
        if zeros > skips {
            return Ok(false);
        }
        let cands: Vec<usize> = self.by_item[item].iter().copied().filter(|&s| st.alive[s]).collect();
        for s in cands {
            let mark = st.killed.len();
            for &j in &self.sets[s] {
                st.covered[j] = true;
            }
            for &j in &self.sets[s] {
                self.kill_touching(st, j);
            }
            chosen.push(s);
            if self.rec(st, chosen, skips)? {
                return Ok(true);
            }
            chosen.pop();
            for &j in &self.sets[s] {
                st.covered[j] = false;
            }
            self.undo(st, mark);
        }
        if skips > 0 {
            let mark = st.killed.len();
            st.covered[item] = true;
            self.kill_touching(st, item);
            if self.rec(st, chosen, skips - 1)? {
                return Ok(true);
            }
            st.covered[item] = false;
            self.undo(st, mark);
        }
        Ok(false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn knuth_example() {
        let sets = vec![
            vec![2, 4, 5],
            vec![0, 3, 6],
            vec![1, 2, 5],
            vec![0, 3],
            vec![1, 6],
            vec![3, 4, 6],
        ];
        let mut sol = ExactCover::new(7, sets).solve(1000, 0).unwrap().unwrap();
        sol.sort();
        assert_eq!(sol, vec![0, 3, 4]);
    }

    #[test]
    fn infeasible_and_skip() {
        let ec = ExactCover::new(3, vec![vec![0, 1], vec![1, 2]]);
        assert_eq!(ec.solve(100, 0).unwrap(), None);
        assert!(ec.solve(100, 1).unwrap().is_some());
    }

    #[test]
    fn budget() {
        let sets: Vec<Vec<usize>> = (0..20).map(|i| vec![i]).collect();
        assert_eq!(ExactCover::new(20, sets).solve(5, 0), Err(Error::Timeout(5)));
    }
}
