//! Independent verification of packings and the exact-cover partition oracle.

use std::collections::{HashMap, HashSet};
use std::fmt;

use crate::embed::{Embedder, Region};
use crate::error::{Error, Outcome, Result};
use crate::exact::ExactCover;
use crate::ground::{Element, GroundPoset};
use crate::packing::{relation_rows, CopySet, Packing};
use crate::poset::{find_isomorphism, Poset};

pub use crate::embed::{enumerate_copies, greedy_extend};

/// Default ground-size cap for the exact oracle.
pub const ORACLE_CAP: u64 = 64;

/// Largest ground for which uncovered elements are listed individually.
const LIST_CAP: u64 = 1 << 22;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Packing,
    Partition,
    /// At most this many elements may stay uncovered.
    Almost(u64),
}

impl Mode {
    pub fn parse(s: &str) -> Result<Mode> {
        match s {
            "packing" => Ok(Mode::Packing),
            "partition" => Ok(Mode::Partition),
            _ => match s.strip_prefix("almost:").map(str::parse) {
                Some(Ok(t)) => Ok(Mode::Almost(t)),
                _ => Err(Error::Parameter(format!("unknown mode {s:?}"))),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerificationReport {
    pub copies: usize,
    pub valid_copies: usize,
    pub disjoint: bool,
    pub covered: u64,
    pub uncovered_count: u64,
    /// Uncovered elements; left empty for very large grounds.
    pub uncovered: Vec<Element>,
    pub pass: bool,
    pub reasons: Vec<String>,
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "verdict={} copies={} valid={} disjoint={} covered={} uncovered={}",
            if self.pass { "pass" } else { "fail" },
            self.copies,
            self.valid_copies,
            self.disjoint,
            self.covered,
            self.uncovered_count
        )?;
        for r in &self.reasons {
            write!(f, "\n  {r}")?;
        }
        Ok(())
    }
}

/// Memoized isomorphism test keyed by induced relation pattern.
struct IsoCache<'a> {
    p: &'a Poset,
    memo: HashMap<Vec<u64>, bool>,
}

impl<'a> IsoCache<'a> {
    fn check(&mut self, c: &CopySet, g: &GroundPoset) -> bool {
        if c.len() != self.p.size() {
            return false;
        }
        let rows = relation_rows(&c.image, g);
        let p = self.p;
        *self.memo.entry(rows).or_insert_with_key(|rows| find_isomorphism(p, rows).is_some())
    }
}

/// Verify against the whole ground.
pub fn verify_packing(g: &GroundPoset, p: &Poset, packing: &Packing, mode: Mode) -> VerificationReport {
    verify_inner(g, None, p, &packing.copies, mode)
}

/// Verify copies lying inside an explicit region; coverage is relative to the region.
pub fn verify_region(g: &GroundPoset, region: &[Element], p: &Poset, copies: &[CopySet], mode: Mode) -> VerificationReport {
    verify_inner(g, Some(region), p, copies, mode)
}

fn verify_inner(g: &GroundPoset, region: Option<&[Element]>, p: &Poset, copies: &[CopySet], mode: Mode) -> VerificationReport {
    let mut reasons = Vec::new();
    let mut iso = IsoCache { p, memo: HashMap::new() };
    let region_set: Option<HashSet<&Element>> = region.map(|r| r.iter().collect());
    let mut valid = 0;
    let mut seen: HashSet<&Element> = HashSet::new();
    let mut disjoint = true;
    for (i, c) in copies.iter().enumerate() {
        let inside = c.image.iter().all(|e| g.contains(e) && region_set.as_ref().is_none_or(|r| r.contains(e)));
        let distinct = c.image.iter().collect::<HashSet<_>>().len() == c.len();
        if !inside {
            reasons.push(format!("copy {i} leaves the ground region"));
        } else if !distinct || !iso.check(c, g) {
            reasons.push(format!("copy {i} is not a copy of P"));
        } else {
            valid += 1;
        }
        for e in &c.image {
            if !seen.insert(e) && disjoint {
                disjoint = false;
                reasons.push(format!("copy {i} overlaps an earlier copy at {e}"));
            }
        }
    }
    let total = match region {
        Some(r) => r.iter().collect::<HashSet<_>>().len() as u64,
        None => g.size(),
    };
    let covered = match &region_set {
        Some(r) => seen.iter().filter(|e| r.contains(*e)).count() as u64,
        None => seen.iter().filter(|e| g.contains(e)).count() as u64,
    };
    let uncovered_count = total - covered;
    let uncovered: Vec<Element> = match region {
        Some(r) => r.iter().filter(|e| !seen.contains(e)).cloned().collect(),
        None if total <= LIST_CAP => g.elements().filter(|e| !seen.contains(e)).collect(),
        None => Vec::new(),
    };
    let limit = match mode {
        Mode::Packing => None,
        Mode::Partition => Some(0),
        Mode::Almost(t) => Some(t),
    };
    if let Some(t) = limit {
        if uncovered_count > t {
            reasons.push(format!("{uncovered_count} elements uncovered, at most {t} allowed"));
        }
    }
    let pass = valid == copies.len() && disjoint && limit.is_none_or(|t| uncovered_count <= t);
    VerificationReport { copies: copies.len(), valid_copies: valid, disjoint, covered, uncovered_count, uncovered, pass, reasons }
}

/// Bitmap verifier for copies given as subsets of `[n]`, against `2^[n]`
/// or, with `truncated`, `T(n)`.
pub fn verify_masks(n: u32, truncated: bool, p: &Poset, copies: &[Vec<u64>], mode: Mode) -> VerificationReport {
    let mut reasons = Vec::new();
    if n > 32 {
        reasons.push(format!("ground 2^{n} is too large for the bitmap verifier"));
        return VerificationReport { copies: copies.len(), valid_copies: 0, disjoint: false, covered: 0, uncovered_count: 0, uncovered: Vec::new(), pass: false, reasons };
    }
    let top = (1u64 << n) - 1;
    let inside = |m: u64| m <= top && !(truncated && (m == 0 || m == top));
    let mut seen = vec![0u64; (1usize << n).div_ceil(64)];
    let mut memo: HashMap<Vec<u64>, bool> = HashMap::new();
    let mut valid = 0;
    let mut disjoint = true;
    let mut covered = 0u64;
    for (i, c) in copies.iter().enumerate() {
        if !c.iter().all(|&m| inside(m)) {
            reasons.push(format!("copy {i} leaves the ground region"));
        } else {
            let rows: Vec<u64> = c.iter().map(|&a| c.iter().enumerate().filter(|(_, &b)| a & !b == 0).fold(0, |r, (j, _)| r | 1 << j)).collect();
            let distinct = c.iter().collect::<HashSet<_>>().len() == c.len();
            if distinct && c.len() == p.size() && *memo.entry(rows).or_insert_with_key(|r| find_isomorphism(p, r).is_some()) {
                valid += 1;
            } else {
                reasons.push(format!("copy {i} is not a copy of P"));
            }
        }
        for &m in c {
            if m > top {
                continue;
            }
            let (w, b) = ((m >> 6) as usize, m & 63);
            if seen[w] >> b & 1 == 1 {
                if disjoint {
                    reasons.push(format!("copy {i} overlaps an earlier copy at {m:x}"));
                }
                disjoint = false;
            } else {
                seen[w] |= 1 << b;
                if inside(m) {
                    covered += 1;
                }
            }
        }
    }
    let total = if truncated { (top + 1).saturating_sub(2) } else { top + 1 };
    let uncovered_count = total - covered;
    let uncovered = if uncovered_count <= LIST_CAP {
        (0..=top).filter(|&m| inside(m) && seen[(m >> 6) as usize] >> (m & 63) & 1 == 0).map(Element::Set).collect()
    } else {
        Vec::new()
    };
    let limit = match mode {
        Mode::Packing => None,
        Mode::Partition => Some(0),
        Mode::Almost(t) => Some(t),
    };
    if let Some(t) = limit {
        if uncovered_count > t {
            reasons.push(format!("{uncovered_count} elements uncovered, at most {t} allowed"));
        }
    }
    let pass = valid == copies.len() && disjoint && limit.is_none_or(|t| uncovered_count <= t);
    VerificationReport { copies: copies.len(), valid_copies: valid, disjoint, covered, uncovered_count, uncovered, pass, reasons }
}

/// Exact search for a `P`-partition of the whole ground.
pub fn exact_partition_oracle(g: &GroundPoset, p: &Poset, node_budget: u64) -> Result<Outcome<Packing>> {
    exact_partition_oracle_capped(g, p, node_budget, ORACLE_CAP)
}

pub fn exact_partition_oracle_capped(g: &GroundPoset, p: &Poset, node_budget: u64, cap: u64) -> Result<Outcome<Packing>> {
    let size = g.try_size()?;
    if size > cap {
        return Err(Error::Size { got: size as usize, cap: cap as usize });
    }
    let region: Vec<Element> = g.elements().collect();
    if !region.len().is_multiple_of(p.size()) {
        return Ok(Outcome::Infeasible(format!("{} does not divide {}", p.size(), region.len())));
    }
    match exact_region_cover(g, &region, p, 0, node_budget)? {
        Some(copies) => {
            let packing = Packing::with_copies(g.clone(), copies);
            let rep = verify_packing(g, p, &packing, Mode::Partition);
            if !rep.pass {
                return Err(Error::Verify(rep.to_string()));
            }
            Ok(Outcome::Found(packing))
        }
        None => Ok(Outcome::Infeasible(format!("exhaustive search found no partition of {}", g.descriptor()))),
    }
}

/// Disjoint copies inside `region` leaving at most `skips` elements uncovered.
pub fn exact_region_cover(
    g: &GroundPoset,
    region: &[Element],
    p: &Poset,
    skips: usize,
    node_budget: u64,
) -> Result<Option<Vec<CopySet>>> {
    let r = Region::new(g, region.to_vec());
    exact_cover_in(&r, p, skips, node_budget)
}

pub fn exact_cover_in(r: &Region, p: &Poset, skips: usize, node_budget: u64) -> Result<Option<Vec<CopySet>>> {
    let maps = Embedder::new(p, r).collect(&r.all(), usize::MAX);
    let sets: Vec<Vec<usize>> = maps.clone();
    let ec = ExactCover::new(r.len(), sets);
    Ok(ec.solve(node_budget, skips)?.map(|sel| sel.iter().map(|&s| r.to_copy(&maps[s])).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poset::named;

    #[test]
    fn whole_square_is_diamond() {
        let g = GroundPoset::Boolean(2);
        let out = exact_partition_oracle(&g, &named::diamond(), 1000).unwrap().found().unwrap();
        assert_eq!(out.len(), 1);
    }

    #[test]
    fn four_chain_infeasible_in_b4() {
        let g = GroundPoset::Boolean(4);
        assert!(!exact_partition_oracle(&g, &Poset::chain(4), 1_000_000).unwrap().is_found());
    }

    #[test]
    fn diamond_tiles_b4() {
        let g = GroundPoset::Boolean(4);
        let out = exact_partition_oracle(&g, &named::diamond(), 1_000_000).unwrap().found().unwrap();
        assert_eq!(out.len(), 4);
    }

    #[test]
    fn deleted_copy_fails_partition() {
        let g = GroundPoset::Boolean(4);
        let copies: Vec<CopySet> =
            (0..16u64).filter(|x| x & 1 == 0).map(|x| CopySet::from_masks(&[x, x | 1])).collect();
        let mut pk = Packing::with_copies(g.clone(), copies);
        assert!(verify_packing(&g, &Poset::chain(2), &pk, Mode::Partition).pass);
        pk.copies.pop();
        let rep = verify_packing(&g, &Poset::chain(2), &pk, Mode::Partition);
        assert!(!rep.pass);
        assert_eq!(rep.uncovered_count, 2);
    }

    #[test]
    fn bitmap_verifier_agrees() {
        let copies: Vec<Vec<u64>> = (0..16u64).filter(|x| x & 1 == 0).map(|x| vec![x, x | 1]).collect();
        assert!(verify_masks(4, false, &Poset::chain(2), &copies, Mode::Partition).pass);
        let inner: Vec<Vec<u64>> = copies.iter().filter(|c| c[0] != 0 && c[1] != 15).cloned().collect();
        let rep = verify_masks(4, true, &Poset::chain(2), &inner, Mode::Almost(1));
        assert!(!rep.pass);
        assert_eq!(rep.uncovered_count, 2);
        assert!(!verify_masks(4, true, &Poset::chain(2), &copies, Mode::Packing).pass);
    }

    #[test]
    fn wrong_witness_order_still_verifies() {
        let g = GroundPoset::Boolean(1);
        let pk = Packing::with_copies(g.clone(), vec![CopySet::from_masks(&[1, 0])]);
        assert!(verify_packing(&g, &Poset::chain(2), &pk, Mode::Partition).pass);
    }
}
