//! Backtracking embedder: finds induced copies of a pattern inside an explicit region.

use std::collections::{HashMap, HashSet};

use crate::ground::{Element, GroundPoset};
use crate::packing::{CopySet, Packing};
use crate::poset::Poset;

const AUTO_CAP: usize = 5040;

/// A finite set of ground elements with precomputed strict relation bitsets.
#[derive(Clone, Debug)]
pub struct Region {
    pub elems: Vec<Element>,
    words: usize,
    up: Vec<u64>,
    down: Vec<u64>,
}

impl Region {
    pub fn new(g: &GroundPoset, elems: Vec<Element>) -> Region {
        let n = elems.len();
        Self::build(elems.clone(), n, |i, j| g.leq(&elems[i], &elems[j]))
    }

    /// Region of subsets under inclusion.
    pub fn from_masks(masks: &[u64]) -> Region {
        let elems = masks.iter().map(|&m| Element::Set(m)).collect();
        Self::build(elems, masks.len(), |i, j| masks[i] & !masks[j] == 0)
    }

    fn build(elems: Vec<Element>, n: usize, leq: impl Fn(usize, usize) -> bool) -> Region {
        let words = n.div_ceil(64).max(1);
        let mut up = vec![0u64; n * words];
        let mut down = vec![0u64; n * words];
        for i in 0..n {
            for j in 0..n {
                if i != j && leq(i, j) {
                    up[i * words + j / 64] |= 1 << (j % 64);
                    down[j * words + i / 64] |= 1 << (i % 64);
                }
            }
        }
        Region { elems, words, up, down }
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn words(&self) -> usize {
        self.words
    }

    pub fn lt(&self, i: usize, j: usize) -> bool {
        self.up[i * self.words + j / 64] >> (j % 64) & 1 == 1
    }

    /// Bitset with every region element.
    pub fn all(&self) -> Vec<u64> {
        let mut v = vec![0u64; self.words];
        for i in 0..self.len() {
            v[i / 64] |= 1 << (i % 64);
        }
        v
    }

    pub fn index_map(&self) -> HashMap<Element, usize> {
        self.elems.iter().cloned().enumerate().map(|(i, e)| (e, i)).collect()
    }

    pub fn to_copy(&self, map: &[usize]) -> CopySet {
        CopySet::new(map.iter().map(|&i| self.elems[i].clone()).collect())
    }
}

pub fn clear_bit(set: &mut [u64], i: usize) {
    set[i / 64] &= !(1 << (i % 64));
}

pub fn has_bit(set: &[u64], i: usize) -> bool {
    set[i / 64] >> (i % 64) & 1 == 1
}

/// Embeddings of `P` into a region, visited in lexicographic order of the
/// image tuple taken along a fixed search order of `P`.
pub struct Embedder<'a> {
    p: &'a Poset,
    r: &'a Region,
    order: Vec<usize>,
    autos: Option<Vec<Vec<usize>>>,
}

impl<'a> Embedder<'a> {
    pub fn new(p: &'a Poset, r: &'a Region) -> Embedder<'a> {
        let n = p.size();
        let mut order = Vec::with_capacity(n);
        let mut placed = vec![false; n];
        while order.len() < n {
            let next = (0..n)
                .find(|&i| !placed[i] && order.iter().any(|&j| p.comparable(i, j)))
                .or_else(|| (0..n).find(|&i| !placed[i]))
                .expect("unplaced element");
            placed[next] = true;
            order.push(next);
        }
        Embedder { p, r, order, autos: automorphisms(p, AUTO_CAP) }
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Calls `visit` on each embedding inside `avail`, one per element set;
    /// stops early when `visit` returns false.
    pub fn for_each(&self, avail: &[u64], mut visit: impl FnMut(&[usize]) -> bool) {
        let n = self.p.size();
        if n > self.r.len() {
            return;
        }
        let mut map = vec![usize::MAX; n];
        let mut seen: HashSet<Vec<usize>> = HashSet::new();
        let mut scratch = vec![vec![0u64; self.r.words]; n];
        self.rec(0, avail, &mut map, &mut scratch, &mut seen, &mut visit);
    }

    fn rec(
        &self,
        depth: usize,
        avail: &[u64],
        map: &mut Vec<usize>,
        scratch: &mut Vec<Vec<u64>>,
        seen: &mut HashSet<Vec<usize>>,
        visit: &mut dyn FnMut(&[usize]) -> bool,
    ) -> bool {
        if depth == self.order.len() {
            if !self.accept(map, seen) {
                return true;
            }
            return visit(map);
        }
        let x = self.order[depth];
        let w = self.r.words;
        let mut cand = avail.to_vec();
        for &y in &self.order[..depth] {
            let t = map[y];
            let up = &self.r.up[t * w..(t + 1) * w];
            let down = &self.r.down[t * w..(t + 1) * w];
            if self.p.lt(y, x) {
                cand.iter_mut().zip(up).for_each(|(c, u)| *c &= u);
            } else if self.p.lt(x, y) {
                cand.iter_mut().zip(down).for_each(|(c, d)| *c &= d);
            } else {
                cand.iter_mut().zip(up.iter().zip(down)).for_each(|(c, (u, d))| *c &= !(u | d));
            }
            clear_bit(&mut cand, t);
        }
        scratch[depth].copy_from_slice(&cand);
        for wi in 0..w {
            let mut bits = scratch[depth][wi];
            while bits != 0 {
                let b = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                map[x] = wi * 64 + b;
                if !self.rec(depth + 1, avail, map, scratch, seen, visit) {
                    return false;
                }
            }
        }
        map[x] = usize::MAX;
        true
    }

    fn accept(&self, map: &[usize], seen: &mut HashSet<Vec<usize>>) -> bool {
        match &self.autos {
            Some(autos) => autos.iter().all(|s| {
                for &x in &self.order {
                    let (a, b) = (map[s[x]], map[x]);
                    if a != b {
                        return a > b;
                    }
                }
                true
            }),
            None => {
                let mut key = map.to_vec();
                key.sort_unstable();
                seen.insert(key)
            }
        }
    }

    pub fn first(&self, avail: &[u64]) -> Option<Vec<usize>> {
        let mut out = None;
        self.for_each(avail, |m| {
            out = Some(m.to_vec());
            false
        });
        out
    }

    pub fn collect(&self, avail: &[u64], limit: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        if limit == 0 {
            return out;
        }
        self.for_each(avail, |m| {
            out.push(m.to_vec());
            out.len() < limit
        });
        out
    }
}

/// Automorphism group of `p`, or `None` if it has more than `cap` members.
pub fn automorphisms(p: &Poset, cap: usize) -> Option<Vec<Vec<usize>>> {
    let n = p.size();
    let mut out = Vec::new();
    let mut map = vec![usize::MAX; n];
    fn rec(p: &Poset, x: usize, used: u64, map: &mut [usize], out: &mut Vec<Vec<usize>>, cap: usize) -> bool {
        let n = p.size();
        if x == n {
            out.push(map.to_vec());
            return out.len() <= cap;
        }
        for t in 0..n {
            if used >> t & 1 == 1 {
                continue;
            }
            if p.up_set(x).count_ones() != p.up_set(t).count_ones()
                || p.down_set(x).count_ones() != p.down_set(t).count_ones()
            {
                continue;
            }
            if (0..x).all(|y| p.leq(x, y) == p.leq(t, map[y]) && p.leq(y, x) == p.leq(map[y], t)) {
                map[x] = t;
                if !rec(p, x + 1, used | 1 << t, map, out, cap) {
                    return false;
                }
            }
        }
        true
    }
    if rec(p, 0, 0, &mut map, &mut out, cap) {
        Some(out)
    } else {
        None
    }
}

/// Copies of `P` inside `region`, in lexicographic embedder order.
pub fn enumerate_copies(g: &GroundPoset, region: &[Element], p: &Poset, limit: usize) -> Vec<CopySet> {
    let r = Region::new(g, region.to_vec());
    let e = Embedder::new(p, &r);
    e.collect(&r.all(), limit).iter().map(|m| r.to_copy(m)).collect()
}

/// Extends `packing` with copies found among still-uncovered elements of
/// `region` until no copy remains.
pub fn greedy_extend(packing: &Packing, region: &[Element], p: &Poset) -> Packing {
    let r = Region::new(&packing.ground, region.to_vec());
    let mut out = packing.clone();
    let mut avail = r.all();
    let idx = r.index_map();
    for e in packing.covered() {
        if let Some(&i) = idx.get(&e) {
            clear_bit(&mut avail, i);
        }
    }
    let emb = Embedder::new(p, &r);
    while let Some(m) = emb.first(&avail) {
        for &i in &m {
            clear_bit(&mut avail, i);
        }
        out.copies.push(r.to_copy(&m));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poset::named;

    #[test]
    fn five_chains_in_square() {
        let g = GroundPoset::Boolean(2);
        let all: Vec<_> = g.elements().collect();
        let cs = enumerate_copies(&g, &all, &Poset::chain(2), usize::MAX);
        assert_eq!(cs.len(), 5);
        assert!(enumerate_copies(&g, &all, &Poset::chain(2), 0).is_empty());
    }

    #[test]
    fn antichain_dedup() {
        let g = GroundPoset::Boolean(3);
        let all: Vec<_> = g.elements().collect();
        // pairs of incomparable sets in 2^[3]
        let cs = enumerate_copies(&g, &all, &Poset::antichain(2), usize::MAX);
        assert_eq!(cs.len(), 9);
    }

    #[test]
    fn diamond_autos() {
        assert_eq!(automorphisms(&named::diamond(), 100).unwrap().len(), 2);
        assert!(automorphisms(&Poset::antichain(8), 100).is_none());
    }

    #[test]
    fn greedy_boolean3() {
        let g = GroundPoset::Boolean(3);
        let all: Vec<_> = g.elements().collect();
        let out = greedy_extend(&Packing::new(g.clone()), &all, &Poset::chain(2));
        assert!(out.covered_count() >= 6);
        assert!(out.is_disjoint());
    }
}
