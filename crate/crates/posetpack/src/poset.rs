//! Finite posets stored as bitset relation rows, plus realizer search.

use std::fmt;

use crate::error::{Error, Result};

/// Largest supported pattern size (one `u64` row per element).
pub const MAX_POSET: usize = 64;

/// Default cap on |P| for exhaustive realizer search.
pub const DEFAULT_REALIZER_CAP: usize = 10;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Poset {
    n: usize,
    // up[i] has bit j iff i <= j
    up: Vec<u64>,
    down: Vec<u64>,
}

impl fmt::Debug for Poset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poset({}; {:?})", self.n, self.cover_relations())
    }
}

fn bit(i: usize) -> u64 {
    1u64 << i
}

impl Poset {
    /// Reflexive-transitive closure of `relations` on `0..n`.
    pub fn new(n: usize, relations: &[(usize, usize)]) -> Result<Poset> {
        if n == 0 {
            return Err(Error::Parameter("a poset needs at least one element".into()));
        }
        if n > MAX_POSET {
            return Err(Error::Size { got: n, cap: MAX_POSET });
        }
        let mut up: Vec<u64> = (0..n).map(bit).collect();
        for &(a, b) in relations {
            for i in [a, b] {
                if i >= n {
                    return Err(Error::Index { index: i, size: n });
                }
            }
            up[a] |= bit(b);
        }
        for k in 0..n {
            let row = up[k];
            for r in up.iter_mut() {
                if *r & bit(k) != 0 {
                    *r |= row;
                }
            }
        }
        Self::from_rows(up)
    }

    /// Build from a relation predicate; the predicate must already be a partial order.
    pub fn from_leq(n: usize, leq: impl Fn(usize, usize) -> bool) -> Result<Poset> {
        if n == 0 || n > MAX_POSET {
            return Err(Error::Size { got: n, cap: MAX_POSET });
        }
        let mut up = vec![0u64; n];
        for (i, row) in up.iter_mut().enumerate() {
            for j in 0..n {
                if i == j || leq(i, j) {
                    *row |= bit(j);
                }
            }
        }
        for i in 0..n {
            for k in 0..n {
                if up[i] & bit(k) != 0 && up[k] & !up[i] != 0 {
                    return Err(Error::Precondition(format!("relation is not transitive at {i} <= {k}")));
                }
            }
        }
        Self::from_rows(up)
    }

    fn from_rows(up: Vec<u64>) -> Result<Poset> {
        let n = up.len();
        let mut down = vec![0u64; n];
        for i in 0..n {
            for j in 0..n {
                if up[i] & bit(j) != 0 {
                    if i != j && up[j] & bit(i) != 0 {
                        return Err(Error::Cycle(i.min(j), i.max(j)));
                    }
                    down[j] |= bit(i);
                }
            }
        }
        Ok(Poset { n, up, down })
    }

    pub fn chain(n: usize) -> Poset {
        let rel: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Poset::new(n, &rel).expect("chain")
    }

    pub fn antichain(n: usize) -> Poset {
        Poset::new(n, &[]).expect("antichain")
    }

    /// The Boolean lattice 2^[k]; element index is the subset bitmask.
    pub fn boolean(k: usize) -> Poset {
        let n = 1usize << k;
        Poset::from_leq(n, |a, b| a & b == a).expect("boolean lattice")
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.up[a] & bit(b) != 0
    }

    pub fn lt(&self, a: usize, b: usize) -> bool {
        a != b && self.leq(a, b)
    }

    pub fn comparable(&self, a: usize, b: usize) -> bool {
        self.leq(a, b) || self.leq(b, a)
    }

    /// Bitset of elements `>= a`.
    pub fn up_set(&self, a: usize) -> u64 {
        self.up[a]
    }

    /// Bitset of elements `<= a`.
    pub fn down_set(&self, a: usize) -> u64 {
        self.down[a]
    }

    pub fn minimal(&self) -> Vec<usize> {
        (0..self.n).filter(|&i| self.down[i] == bit(i)).collect()
    }

    pub fn maximal(&self) -> Vec<usize> {
        (0..self.n).filter(|&i| self.up[i] == bit(i)).collect()
    }

    pub fn has_unique_min_max(&self) -> bool {
        self.minimal().len() == 1 && self.maximal().len() == 1
    }

    pub fn is_chain(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| self.comparable(i, j)))
    }

    pub fn dual(&self) -> Poset {
        Poset { n: self.n, up: self.down.clone(), down: self.up.clone() }
    }

    /// Strict pairs `(a, b)` with `b` covering `a`.
    pub fn cover_relations(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for a in 0..self.n {
            for b in 0..self.n {
                if self.lt(a, b) {
                    let between = self.up[a] & self.down[b] & !bit(a) & !bit(b);
                    if between == 0 {
                        out.push((a, b));
                    }
                }
            }
        }
        out
    }

    pub fn is_downset(&self, mask: u64) -> bool {
        (0..self.n).all(|i| mask & bit(i) == 0 || self.down[i] & !mask == 0)
    }

    pub fn is_upset(&self, mask: u64) -> bool {
        (0..self.n).all(|i| mask & bit(i) == 0 || self.up[i] & !mask == 0)
    }

    /// Downsets with exactly `q` elements, as bitmasks, smallest mask first.
    pub fn downsets_of_size(&self, q: usize) -> Vec<u64> {
        self.ideals_of_size(q, true)
    }

    pub fn upsets_of_size(&self, q: usize) -> Vec<u64> {
        self.ideals_of_size(q, false)
    }

    fn ideals_of_size(&self, q: usize, down: bool) -> Vec<u64> {
        let mut out = Vec::new();
        let mut stack = vec![(0u64, 0usize)];
        // grow by one admissible element at a time; dedupe via sort
        while let Some((mask, cnt)) = stack.pop() {
            if cnt == q {
                out.push(mask);
                continue;
            }
            for i in 0..self.n {
                if mask & bit(i) != 0 {
                    continue;
                }
                let need = if down { self.down[i] } else { self.up[i] } & !bit(i);
                if need & !mask == 0 {
                    stack.push((mask | bit(i), cnt + 1));
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// All linear extensions in lexicographic order, stopping after `limit`.
    pub fn linear_extensions(&self, limit: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut cur = Vec::with_capacity(self.n);
        self.extend_rec(0, &mut cur, &mut out, limit);
        out
    }

    fn extend_rec(&self, placed: u64, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>, limit: usize) {
        if out.len() >= limit {
            return;
        }
        if cur.len() == self.n {
            out.push(cur.clone());
            return;
        }
        for i in 0..self.n {
            if placed & bit(i) == 0 && self.down[i] & !bit(i) & !placed == 0 {
                cur.push(i);
                self.extend_rec(placed | bit(i), cur, out, limit);
                cur.pop();
            }
        }
    }

    pub fn is_linear_extension(&self, order: &[usize]) -> bool {
        if order.len() != self.n {
            return false;
        }
        let mut seen = 0u64;
        for &e in order {
            if e >= self.n || seen & bit(e) != 0 || self.down[e] & !bit(e) & !seen != 0 {
                return false;
            }
            seen |= bit(e);
        }
        true
    }

    /// Stable 64-bit FNV-1a fingerprint of the relation.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf29ce484222325;
        let mut eat = |v: u64| {
            for b in v.to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x100000001b3);
            }
        };
        eat(self.n as u64);
        for &r in &self.up {
            eat(r);
        }
        h
    }
}

/// `d` linear extensions whose intersection is the order of `P`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Realizer {
    orders: Vec<Vec<usize>>,
}

impl Realizer {
    pub fn new(orders: Vec<Vec<usize>>) -> Realizer {
        Realizer { orders }
    }

    /// Build from rank vectors: `ranks[i][p]` is the 1-based value of the i-th bijection at p.
    pub fn from_ranks(ranks: &[Vec<usize>]) -> Result<Realizer> {
        let mut orders = Vec::new();
        for r in ranks {
            let n = r.len();
            let mut ord = vec![usize::MAX; n];
            for (p, &v) in r.iter().enumerate() {
                if v == 0 || v > n || ord[v - 1] != usize::MAX {
                    return Err(Error::Parameter(format!("{r:?} is not a bijection onto 1..{n}")));
                }
                ord[v - 1] = p;
            }
            orders.push(ord);
        }
        Ok(Realizer { orders })
    }

    pub fn d(&self) -> usize {
        self.orders.len()
    }

    pub fn orders(&self) -> &[Vec<usize>] {
        &self.orders
    }

    /// 1-based value of the i-th bijection on every element.
    pub fn ranks(&self, i: usize) -> Vec<usize> {
        let ord = &self.orders[i];
        let mut r = vec![0; ord.len()];
        for (pos, &p) in ord.iter().enumerate() {
            r[p] = pos + 1;
        }
        r
    }

    pub fn realizes(&self, p: &Poset) -> bool {
        if self.orders.is_empty() || !self.orders.iter().all(|o| o.len() == p.size()) {
            return false;
        }
        let ranks: Vec<Vec<usize>> = (0..self.d()).map(|i| self.ranks(i)).collect();
        if ranks.iter().any(|r| {
            let mut s = r.clone();
            s.sort_unstable();
            s != (1..=p.size()).collect::<Vec<_>>()
        }) {
            return false;
        }
        for a in 0..p.size() {
            for b in 0..p.size() {
                let all = ranks.iter().all(|r| r[a] <= r[b]);
                if all != p.leq(a, b) {
                    return false;
                }
            }
        }
        true
    }

    /// Repeat the last order until there are `d` of them.
    pub fn padded(&self, d: usize) -> Realizer {
        let mut orders = self.orders.clone();
        while orders.len() < d {
            orders.push(orders.last().expect("nonempty realizer").clone());
        }
        Realizer { orders }
    }
}

pub fn find_realizer(p: &Poset, d_max: usize) -> Result<Option<Realizer>> {
    find_realizer_capped(p, d_max, DEFAULT_REALIZER_CAP)
}

/// Minimal-d realizer; first success over d-subsets of lexicographically ordered extensions.
pub fn find_realizer_capped(p: &Poset, d_max: usize, cap: usize) -> Result<Option<Realizer>> {
    if d_max == 0 {
        return Err(Error::Parameter("d_max must be at least 1".into()));
    }
    if p.size() > cap {
        return Err(Error::Size { got: p.size(), cap });
    }
    let n = p.size();
    if p.is_chain() {
        return Ok(Some(Realizer::new(p.linear_extensions(1))));
    }
    let mut pair_idx = vec![usize::MAX; n * n];
    let mut npairs = 0;
    for a in 0..n {
        for b in 0..n {
            if a != b && !p.comparable(a, b) {
                pair_idx[a * n + b] = npairs;
                npairs += 1;
            }
        }
    }
    let words = npairs.div_ceil(64);
    let exts = p.linear_extensions(usize::MAX);
    let cover: Vec<Vec<u64>> = exts
        .iter()
        .map(|ord| {
            let mut c = vec![0u64; words];
            for (i, &a) in ord.iter().enumerate() {
                for &b in &ord[i + 1..] {
                    let k = pair_idx[a * n + b];
                    if k != usize::MAX {
                        c[k / 64] |= 1 << (k % 64);
                    }
                }
            }
            c
        })
        .collect();
    let mut full = vec![u64::MAX; words];
    if npairs % 64 != 0 {
        full[words - 1] = (1u64 << (npairs % 64)) - 1;
    }
    // suffix unions prune branches that cannot reach full coverage
    let mut suffix = vec![vec![0u64; words]; exts.len() + 1];
    for i in (0..exts.len()).rev() {
        for w in 0..words {
            suffix[i][w] = suffix[i + 1][w] | cover[i][w];
        }
    }
    for d in 2..=d_max {
        let mut chosen = Vec::with_capacity(d);
        if search_combo(&cover, &suffix, &full, d, 0, &vec![0u64; words], &mut chosen) {
            let orders = chosen.iter().map(|&i| exts[i].clone()).collect();
            return Ok(Some(Realizer::new(orders)));
        }
    }
    Ok(None)
}

fn search_combo(
    cover: &[Vec<u64>],
    suffix: &[Vec<u64>],
    full: &[u64],
    left: usize,
    start: usize,
    acc: &[u64],
    chosen: &mut Vec<usize>,
) -> bool {
    if left == 0 {
        return acc == full;
    }
    for i in start..cover.len() {
        if cover.len() - i < left {
            break;
        }
        if acc.iter().zip(&suffix[i]).zip(full).any(|((a, s), f)| a | s != *f) {
            break;
        }
        let next: Vec<u64> = acc.iter().zip(&cover[i]).map(|(a, c)| a | c).collect();
        chosen.push(i);
        if search_combo(cover, suffix, full, left - 1, i + 1, &next, chosen) {
            return true;
        }
        chosen.pop();
    }
    false
}

/// Order-isomorphism from `p` onto the poset given by reflexive rows `rel`
/// (`rel[i]` bit j iff i <= j); `map[x]` is the target of element x.
pub fn find_isomorphism(p: &Poset, rel: &[u64]) -> Option<Vec<usize>> {
    let n = p.size();
    if rel.len() != n {
        return None;
    }
    let mut tdown = vec![0u64; n];
    for i in 0..n {
        for j in 0..n {
            if rel[i] & bit(j) != 0 {
                tdown[j] |= bit(i);
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            if i != j && rel[i] & bit(j) != 0 && rel[j] & bit(i) != 0 {
                return None;
            }
        }
    }
    let sig = |u: u64, d: u64| (u.count_ones(), d.count_ones());
    let psig: Vec<_> = (0..n).map(|i| sig(p.up_set(i), p.down_set(i))).collect();
    let tsig: Vec<_> = (0..n).map(|i| sig(rel[i], tdown[i])).collect();
    let mut a = psig.clone();
    let mut b = tsig.clone();
    a.sort_unstable();
    b.sort_unstable();
    if a != b {
        return None;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| {
        let (u, d) = psig[i];
        std::cmp::Reverse(u + d)
    });
    let mut map = vec![usize::MAX; n];
    if iso_rec(p, rel, &psig, &tsig, &order, 0, 0, &mut map) {
        Some(map)
    } else {
        None
    }
}

#[allow(clippy::too_many_arguments)]
fn iso_rec(
    p: &Poset,
    rel: &[u64],
    psig: &[(u32, u32)],
    tsig: &[(u32, u32)],
    order: &[usize],
    depth: usize,
    used: u64,
    map: &mut [usize],
) -> bool {
    if depth == order.len() {
        return true;
    }
    let x = order[depth];
    for t in 0..rel.len() {
        if used & bit(t) != 0 || tsig[t] != psig[x] {
            continue;
        }
        let ok = order[..depth].iter().all(|&y| {
            let ty = map[y];
            p.leq(x, y) == (rel[t] & bit(ty) != 0) && p.leq(y, x) == (rel[ty] & bit(t) != 0)
        });
        if ok {
            map[x] = t;
            if iso_rec(p, rel, psig, tsig, order, depth + 1, used | bit(t), map) {
                return true;
            }
        }
    }
    map[x] = usize::MAX;
    false
}

/// Small named posets used across tests and the CLI.
pub mod named {
    use super::Poset;

    pub fn diamond() -> Poset {
        Poset::new(4, &[(0, 1), (0, 2), (1, 3), (2, 3)]).expect("diamond")
    }

    /// Five elements, dimension 2, unique bottom and top.
    pub fn five_element() -> Poset {
        Poset::new(5, &[(0, 1), (0, 2), (1, 3), (2, 3), (3, 4)]).expect("five element poset")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closure_adds_transitive_pair() {
        let d = named::diamond();
        assert!(d.leq(0, 3));
        assert!(!d.comparable(1, 2));
    }

    #[test]
    fn cycle_rejected() {
        assert_eq!(Poset::new(3, &[(0, 1), (1, 2), (2, 0)]), Err(Error::Cycle(0, 1)));
    }

    #[test]
    fn chain_realizer_is_itself() {
        let r = find_realizer(&Poset::chain(5), 3).unwrap().unwrap();
        assert_eq!(r.d(), 1);
        assert_eq!(r.orders()[0], vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn antichain_realizer_reverses() {
        let r = find_realizer(&Poset::antichain(2), 3).unwrap().unwrap();
        assert_eq!(r.orders(), &[vec![0, 1], vec![1, 0]]);
    }

    #[test]
    fn size_cap() {
        assert!(matches!(find_realizer(&Poset::antichain(11), 2), Err(Error::Size { .. })));
    }

    #[test]
    fn downsets_of_diamond() {
        let d = named::diamond();
        assert_eq!(d.downsets_of_size(2), vec![0b0011, 0b0101]);
        assert_eq!(d.upsets_of_size(1), vec![0b1000]);
    }
}
