//! Chain partitions of 2^[n]: symmetric chains, equal-size chains, comparable matchings, Gray order.

use std::collections::HashMap;

use crate::error::{Error, Outcome, Result};
use crate::exact::ExactCover;

/// Default node budget for the exact chain search.
pub const DEFAULT_CHAIN_BUDGET: u64 = 10_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainPartition {
    pub n: u32,
    /// Each chain ascending under inclusion.
    pub chains: Vec<Vec<u64>>,
}

impl ChainPartition {
    /// Chains are strictly increasing and cover 2^[n] exactly once.
    pub fn is_valid(&self) -> bool {
        if self.n > 26 {
            return false;
        }
        let mut seen = vec![false; 1usize << self.n];
        for c in &self.chains {
            if c.windows(2).any(|w| w[0] & !w[1] != 0 || w[0] == w[1]) {
                return false;
            }
            for &x in c {
                if x >> self.n != 0 || std::mem::replace(&mut seen[x as usize], true) {
                    return false;
                }
            }
        }
        seen.iter().all(|&s| s)
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.chains.iter().map(|c| c.len()).collect()
    }
}

/// Symmetric chain decomposition by bracket matching: element `i` is an
/// opening bracket when absent and a closing bracket when present.
pub fn scd(n: u32) -> ChainPartition {
    assert!(n <= 26, "scd is enumerative; n = {n} is too large");
    let mut chains = Vec::new();
    for x in 0..1u64 << n {
        let mut open: Vec<u32> = Vec::new();
        let mut unmatched_close = false;
        for i in 0..n {
            if x >> i & 1 == 1 {
                if open.pop().is_none() {
                    unmatched_close = true;
                    break;
                }
            } else {
                open.push(i);
            }
        }
        if unmatched_close {
            continue;
        }
        let mut chain = vec![x];
        let mut y = x;
        for &i in &open {
            y |= 1 << i;
            chain.push(y);
        }
        chains.push(chain);
    }
    ChainPartition { n, chains }
}

/// Reflected binary Gray order of 2^[s].
pub fn gray_code(s: u32) -> Vec<u64> {
    (0..1u64 << s).map(|i| i ^ (i >> 1)).collect()
}

fn binomial(n: u64, k: u64) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Partition of 2^[n] into chains of exactly `h` elements.
pub fn equal_chain_partition(n: u32, h: usize) -> Result<Outcome<ChainPartition>> {
    equal_chain_partition_budget(n, h, DEFAULT_CHAIN_BUDGET)
}

pub fn equal_chain_partition_budget(n: u32, h: usize, budget: u64) -> Result<Outcome<ChainPartition>> {
    if !h.is_power_of_two() || n > 26 || (h as u64) > 1u64 << n {
        return Err(Error::Parameter(format!("need h a power of 2 with h <= 2^n and n <= 26, got n={n} h={h}")));
    }
    if h == 1 {
        let chains = (0..1u64 << n).map(|x| vec![x]).collect();
        return Ok(Outcome::Found(ChainPartition { n, chains }));
    }
    if h == 2 {
        let chains = (0..1u64 << n).filter(|x| x & 1 == 0).map(|x| vec![x, x | 1]).collect();
        return Ok(Outcome::Found(ChainPartition { n, chains }));
    }
    if let Some(why) = chain_certificate(n, h) {
        return Ok(Outcome::Infeasible(why));
    }
    for base in (1..=n).rev() {
        if chain_certificate(base, h).is_some() {
            break;
        }
        if let Some(chains) = block_partition(base, h, budget) {
            return Ok(Outcome::Found(lift(chains, base, n)));
        }
    }
    let all: Vec<u64> = (0..1u64 << n).collect();
    let mut nodes = 0;
    match chain_cover(&all, h, budget, &mut nodes)? {
        Some(mut chains) => {
            chains.sort();
            Ok(Outcome::Found(ChainPartition { n, chains }))
        }
        None => Ok(Outcome::Infeasible(format!("exhaustive search found no partition of 2^[{n}] into {h}-chains"))),
    }
}

/// Counting reasons that rule out an `h`-chain partition of 2^[n].
pub fn chain_certificate(n: u32, h: usize) -> Option<String> {
    if h as u64 > n as u64 + 1 {
        return Some(format!("a chain in 2^[{n}] has at most {} elements < {h}", n + 1));
    }
    let chains = (1u128 << n) / h as u128;
    let mid = binomial(n as u64, n as u64 / 2);
    if chains < mid {
        return Some(format!("{chains} chains meet the middle level at most once each but it has {mid} elements"));
    }
    None
}

fn lift(chains: Vec<Vec<u64>>, base: u32, n: u32) -> ChainPartition {
    let mut out = Vec::with_capacity(chains.len() << (n - base));
    for y in 0..1u64 << (n - base) {
        for c in &chains {
            out.push(c.iter().map(|&x| x | y << base).collect());
        }
    }
    out.sort();
    ChainPartition { n, chains: out }
}

/// 2^[n] = [2] x 2^[n-1]; each symmetric chain E of 2^[n-1] gives a block
/// [2] x E. Blocks that cannot be split into h-chains are merged with a
/// splittable partner through an augmenting-path matching.
fn block_partition(n: u32, h: usize, budget: u64) -> Option<Vec<Vec<u64>>> {
    if n < 2 {
        return None;
    }
    let top = 1u64 << (n - 1);
    let blocks: Vec<Vec<u64>> = scd(n - 1)
        .chains
        .into_iter()
        .map(|c| {
            let mut b = c.clone();
            b.extend(c.iter().map(|x| x | top));
            b
        })
        .collect();
    let mut nodes = 0u64;
    let mut solo: Vec<Option<Vec<Vec<u64>>>> = Vec::with_capacity(blocks.len());
    for b in &blocks {
        let r = if b.len() % h == 0 { block_cover(b, h, budget).ok()? } else { None };
        solo.push(r);
    }
    let bad: Vec<usize> = (0..blocks.len()).filter(|&i| solo[i].is_none()).collect();
    let good: Vec<usize> = (0..blocks.len()).filter(|&i| solo[i].is_some()).collect();
    let mut memo: HashMap<(usize, usize), Option<Vec<Vec<u64>>>> = HashMap::new();
    let mut partner_of_good: HashMap<usize, usize> = HashMap::new();
    for &b in &bad {
        let mut visited = vec![false; blocks.len()];
        let ok = augment(b, &good, &blocks, h, budget, &mut nodes, &mut memo, &mut partner_of_good, &mut visited);
        if !ok || nodes > budget {
            return None;
        }
    }
    let mut chains = Vec::new();
    for &g in &good {
        match partner_of_good.get(&g) {
            Some(&b) => chains.extend(memo.get(&(b, g))?.clone()?),
            None => chains.extend(solo[g].clone()?),
        }
    }
    Some(chains)
}

#[allow(clippy::too_many_arguments)]
fn augment(
    b: usize,
    good: &[usize],
    blocks: &[Vec<u64>],
    h: usize,
    budget: u64,
    nodes: &mut u64,
    memo: &mut HashMap<(usize, usize), Option<Vec<Vec<u64>>>>,
    partner: &mut HashMap<usize, usize>,
    visited: &mut [bool],
) -> bool {
    for &g in good {
        if visited[g] {
            continue;
        }
        let cover = memo
            .entry((b, g))
            .or_insert_with(|| {
                let mut merged = blocks[b].clone();
                merged.extend(&blocks[g]);
                if !merged.len().is_multiple_of(h) {
                    return None;
                }
                *nodes += 1;
                block_cover(&merged, h, budget).ok().flatten()
            })
            .is_some();
        if !cover {
            continue;
        }
        visited[g] = true;
        let free = match partner.get(&g) {
            None => true,
            Some(&other) => augment(other, good, blocks, h, budget, nodes, memo, partner, visited),
        };
        if free {
            partner.insert(g, b);
            return true;
        }
    }
    false
}

/// Exact cover of a small element set by its enumerated `h`-chains.
fn block_cover(elems: &[u64], h: usize, budget: u64) -> Result<Option<Vec<Vec<u64>>>> {
    if !elems.len().is_multiple_of(h) {
        return Ok(None);
    }
    let mut sorted = elems.to_vec();
    sorted.sort_by_key(|&x| (x.count_ones(), x));
    let mut sets = Vec::new();
    let mut cur = Vec::with_capacity(h);
    fn grow(s: &[u64], h: usize, cur: &mut Vec<usize>, sets: &mut Vec<Vec<usize>>) {
        if cur.len() == h {
            sets.push(cur.clone());
            return;
        }
        let start = cur.last().map_or(0, |&i| i + 1);
        for j in start..s.len() {
            if cur.last().is_none_or(|&i| s[i] != s[j] && s[i] & !s[j] == 0) {
                cur.push(j);
                grow(s, h, cur, sets);
                cur.pop();
            }
        }
    }
    grow(&sorted, h, &mut cur, &mut sets);
    let ec = ExactCover::new(sorted.len(), sets.clone());
    Ok(ec.solve(budget, 0)?.map(|sel| sel.iter().map(|&k| sets[k].iter().map(|&i| sorted[i]).collect()).collect()))
}

/// Exact partition of `elems` into `h`-chains; the lowest-rank uncovered
/// element always starts a new chain.
pub fn chain_cover(elems: &[u64], h: usize, budget: u64, nodes: &mut u64) -> Result<Option<Vec<Vec<u64>>>> {
    if !elems.len().is_multiple_of(h) {
        return Ok(None);
    }
    let mut sorted = elems.to_vec();
    sorted.sort_by_key(|&x| (x.count_ones(), x));
    let mut used = vec![false; sorted.len()];
    let mut out = Vec::new();
    let mut chain = Vec::with_capacity(h);
    if cover_rec(&sorted, h, budget, nodes, &mut used, &mut out, &mut chain)? {
        Ok(Some(out))
    } else {
        Ok(None)
    }
}

fn cover_rec(
    s: &[u64],
    h: usize,
    budget: u64,
    nodes: &mut u64,
    used: &mut [bool],
    out: &mut Vec<Vec<u64>>,
    chain: &mut Vec<usize>,
) -> Result<bool> {
    *nodes += 1;
    if *nodes > budget {
        return Err(Error::Timeout(budget));
    }
    if chain.is_empty() {
        let Some(start) = used.iter().position(|&u| !u) else { return Ok(true) };
        used[start] = true;
        chain.push(start);
        let r = cover_rec(s, h, budget, nodes, used, out, chain)?;
        if !r {
            chain.pop();
            used[start] = false;
        }
        return Ok(r);
    }
    if chain.len() == h {
        let done: Vec<u64> = chain.iter().map(|&i| s[i]).collect();
        let saved = std::mem::take(chain);
        out.push(done);
        if cover_rec(s, h, budget, nodes, used, out, chain)? {
            return Ok(true);
        }
        out.pop();
        *chain = saved;
        return Ok(false);
    }
    let last = s[*chain.last().expect("nonempty chain")];
    for j in *chain.last().expect("nonempty chain") + 1..s.len() {
        let y = s[j];
        if used[j] || y == last || last & !y != 0 {
            continue;
        }
        used[j] = true;
        chain.push(j);
        if cover_rec(s, h, budget, nodes, used, out, chain)? {
            return Ok(true);
        }
        chain.pop();
        used[j] = false;
    }
    Ok(false)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComparableMatching {
    pub m: u32,
    pub d: u32,
    pub pairs: Vec<(u64, u64)>,
}

impl ComparableMatching {
    pub fn is_valid(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        self.pairs.len() as u64 == 1u64 << self.m.saturating_sub(1)
            && self.pairs.iter().all(|&(x, y)| {
                x & !y == 0 && (x ^ y).count_ones() >= self.d && x >> self.m == 0 && y >> self.m == 0
            })
            && self.pairs.iter().all(|&(x, y)| seen.insert(x) && seen.insert(y))
    }
}

/// Perfect matching of 2^[m] into comparable pairs at distance at least `d`,
/// pairing c_i with c_{i+2^k} along chains of size 2^{k+1}.
pub fn comparable_matching(m: u32, d: u32) -> Result<Outcome<ComparableMatching>> {
    comparable_matching_budget(m, d, DEFAULT_CHAIN_BUDGET)
}

pub fn comparable_matching_budget(m: u32, d: u32, budget: u64) -> Result<Outcome<ComparableMatching>> {
    if m == 0 || d == 0 {
        return Err(Error::Parameter("comparable matching needs m >= 1 and d >= 1".into()));
    }
    let step = d.next_power_of_two() as usize;
    let h = 2 * step;
    if h as u64 > 1u64 << m {
        return Ok(Outcome::Infeasible(format!("chains of size {h} do not fit in 2^[{m}]")));
    }
    let chains = match equal_chain_partition_budget(m, h, budget)? {
        Outcome::Found(c) => c,
        Outcome::Infeasible(why) => return Ok(Outcome::Infeasible(why)),
    };
    let pairs = chains.chains.iter().flat_map(|c| (0..step).map(move |i| (c[i], c[i + step]))).collect();
    Ok(Outcome::Found(ComparableMatching { m, d, pairs }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ground::set;

    #[test]
    fn scd_small() {
        assert_eq!(scd(1).chains, vec![vec![0, 1]]);
        assert_eq!(scd(2).chains, vec![vec![0, set(&[1]), set(&[1, 2])], vec![set(&[2])]]);
        let mut sizes = scd(4).sizes();
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        assert_eq!(sizes, vec![5, 3, 3, 3, 1, 1]);
    }

    #[test]
    fn gray_small() {
        assert_eq!(gray_code(2), vec![0, 1, 3, 2]);
    }

    #[test]
    fn pairs_rule() {
        let c = equal_chain_partition(2, 2).unwrap().found().unwrap();
        assert_eq!(c.chains, vec![vec![0, 1], vec![2, 3]]);
    }

    #[test]
    fn infeasible_small() {
        assert!(!equal_chain_partition(3, 4).unwrap().is_found());
        assert!(!equal_chain_partition(4, 4).unwrap().is_found());
        assert!(!comparable_matching(2, 2).unwrap().is_found());
    }

    #[test]
    fn matching_m1() {
        let m = comparable_matching(1, 1).unwrap().found().unwrap();
        assert_eq!(m.pairs, vec![(0, 1)]);
    }

    #[test]
    fn block_of_six_splits() {
        let e: Vec<u64> = (0..6).map(|i| (1u64 << i) - 1).collect();
        let mut b = e.clone();
        b.extend(e.iter().map(|x| x | 1 << 6));
        let mut nodes = 0;
        let cs = chain_cover(&b, 4, 1000, &mut nodes).unwrap().unwrap();
        assert_eq!(cs.len(), 3);
    }
}
