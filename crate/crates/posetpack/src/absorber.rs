//! Special copies, the four-subcube absorber, and absorption of small leftovers.

use std::collections::HashSet;

use crate::chains::gray_code;
use crate::embed::{clear_bit, Embedder, Region};
use crate::error::{Error, Result};
use crate::ground::{members, set, Element, GroundPoset};
use crate::oracle::{exact_cover_in, verify_region, Mode};
use crate::packing::CopySet;
use crate::poset::Poset;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Polarity {
    Min,
    Max,
}

/// A copy of `P` (as subsets, `masks[p]` for element `p`) with a minimal or
/// maximal member for which base element `f` is special.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpecialCopy {
    pub masks: Vec<u64>,
    /// Index into `masks` of the special extreme.
    pub element: usize,
    pub f: u32,
    pub polarity: Polarity,
}

impl SpecialCopy {
    pub fn extreme(&self) -> u64 {
        self.masks[self.element]
    }

    pub fn copy(&self) -> CopySet {
        CopySet::from_masks(&self.masks)
    }

    /// Checks the specialness clause against every member.
    pub fn is_special(&self) -> bool {
        let x = self.extreme();
        let fb = 1u64 << (self.f - 1);
        match self.polarity {
            Polarity::Min => {
                x & fb != 0
                    && self.masks.iter().all(|&y| y == x || y & !x != 0)
                    && self.masks.iter().all(|&y| y & fb == 0 || x & !y == 0)
            }
            Polarity::Max => {
                x & fb == 0
                    && self.masks.iter().all(|&y| y == x || x & !y != 0)
                    && self.masks.iter().all(|&y| y & fb != 0 || y & !x == 0)
            }
        }
    }
}

/// Spread the low bits of `x` onto the 1-based positions in `base`.
pub fn spread(x: u64, base: &[u32]) -> u64 {
    base.iter().enumerate().filter(|(i, _)| x >> i & 1 == 1).fold(0, |m, (_, &b)| m | 1u64 << (b - 1))
}

/// Injection `pi` with `pi(p0) = f` for the first minimal (or maximal) `p0`,
/// the rest taking the smallest unused values of `base` in index order.
fn special_injection(p: &Poset, base: &[u32], f: u32, polarity: Polarity) -> (usize, Vec<u32>) {
    let p0 = match polarity {
        Polarity::Min => p.minimal()[0],
        Polarity::Max => p.maximal()[0],
    };
    let mut rest = base.iter().copied().filter(|&b| b != f);
    let pi = (0..p.size()).map(|q| if q == p0 { f } else { rest.next().expect("enough base elements") }).collect();
    (p0, pi)
}

/// Special copy inside the cube `{offset | x : x within base}`.
pub fn cube_special_copy(p: &Poset, base: &[u32], offset: u64, f: u32, polarity: Polarity) -> Result<SpecialCopy> {
    if base.len() < p.size() {
        return Err(Error::Size { got: base.len(), cap: p.size() });
    }
    if !base.contains(&f) {
        return Err(Error::Parameter(format!("{f} is not in the base set")));
    }
    let (p0, pi) = special_injection(p, base, f, polarity);
    let bit = |q: usize| 1u64 << (pi[q] - 1);
    let all = spread(u64::MAX >> (64 - base.len()), base);
    let masks = (0..p.size())
        .map(|x| {
            let m = match polarity {
                Polarity::Min => (0..p.size()).filter(|&q| p.leq(q, x)).fold(0, |m, q| m | bit(q)),
                Polarity::Max => all & !(0..p.size()).filter(|&q| p.leq(x, q)).fold(0, |m, q| m | bit(q)),
            };
            offset | m
        })
        .collect();
    Ok(SpecialCopy { masks, element: p0, f, polarity })
}

pub fn make_special_copy(p: &Poset, n: u32, f: u32, polarity: Polarity) -> Result<SpecialCopy> {
    if (n as usize) < p.size() {
        return Err(Error::Size { got: n as usize, cap: p.size() });
    }
    if f == 0 || f > n {
        return Err(Error::Parameter(format!("base element {f} outside [1, {n}]")));
    }
    let base: Vec<u32> = (1..=n).collect();
    cube_special_copy(p, &base, 0, f, polarity)
}

/// `2^{|base| - |P|}` disjoint special copies in the cube over `base`,
/// built on `f` and the smallest other base elements and shifted by every
/// subset of the remaining ones.
pub fn cube_special_copies(p: &Poset, base: &[u32], offset: u64, f: u32, polarity: Polarity) -> Result<Vec<SpecialCopy>> {
    if base.len() < p.size() {
        return Err(Error::Size { got: base.len(), cap: p.size() });
    }
    let mut core = vec![f];
    core.extend(base.iter().copied().filter(|&b| b != f).take(p.size() - 1));
    core.sort_unstable();
    let free: Vec<u32> = base.iter().copied().filter(|b| !core.contains(b)).collect();
    let q = cube_special_copy(p, &core, offset, f, polarity)?;
    Ok((0..1u64 << free.len())
        .map(|z| {
            let zm = spread(z, &free);
            SpecialCopy { masks: q.masks.iter().map(|m| m | zm).collect(), ..q.clone() }
        })
        .collect())
}

pub fn shifted_special_copies(p: &Poset, n: u32, f: u32, polarity: Polarity) -> Result<Vec<SpecialCopy>> {
    if (n as usize) < p.size() {
        return Err(Error::Size { got: n as usize, cap: p.size() });
    }
    let base: Vec<u32> = (1..=n).collect();
    cube_special_copies(p, &base, 0, f, polarity)
}

/// Swap the special extreme for `target`.
pub fn replace_extreme(sc: &SpecialCopy, target: u64) -> Result<SpecialCopy> {
    let x = sc.extreme();
    let fb = 1u64 << (sc.f - 1);
    match sc.polarity {
        Polarity::Min => {
            if target & fb == 0 {
                return Err(Error::Precondition(format!("f = {} is not in the target", sc.f)));
            }
            if target & !x != 0 {
                return Err(Error::Precondition("target is not a subset of the minimal element".into()));
            }
        }
        Polarity::Max => {
            if target & fb != 0 {
                return Err(Error::Precondition(format!("f = {} is in the target", sc.f)));
            }
            if x & !target != 0 {
                return Err(Error::Precondition("target does not contain the maximal element".into()));
            }
        }
    }
    let mut out = sc.clone();
    out.masks[sc.element] = target;
    Ok(out)
}

/// Four disjoint d-cubes `S_j = {lambda_j | x : x within alpha_j}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Absorber {
    pub n: u32,
    pub d: u32,
    pub alpha: [Vec<u32>; 4],
    pub f: [u32; 4],
    pub gamma: Vec<u32>,
}

impl Absorber {
    pub fn alpha_mask(&self, j: usize) -> u64 {
        set(&self.alpha[j])
    }

    pub fn beta(&self) -> u64 {
        crate::ground::full(self.n) & !(0..4).fold(0, |m, j| m | self.alpha_mask(j))
    }

    pub fn lambda(&self, j: usize) -> u64 {
        let a = |i: usize| self.alpha_mask(i);
        let fb = |i: usize| 1u64 << (self.f[i] - 1);
        let g = set(&self.gamma);
        match j {
            0 => a(1) | a(2) | (a(3) & !fb(3)) | g,
            1 => fb(0) | g,
            2 => a(0) | (a(1) & !fb(1)) | a(3) | g,
            _ => fb(2) | g,
        }
    }

    /// Members of `S_{j+1}` in increasing order of the local subset.
    pub fn subcube(&self, j: usize) -> Vec<u64> {
        let l = self.lambda(j);
        (0..1u64 << self.d).map(|x| l | spread(x, &self.alpha[j])).collect()
    }

    pub fn elements(&self) -> Vec<u64> {
        (0..4).flat_map(|j| self.subcube(j)).collect()
    }

    pub fn which(&self, x: u64) -> Option<usize> {
        (0..4).find(|&j| x & !(self.lambda(j) | self.alpha_mask(j)) == 0 && self.lambda(j) & !x == 0)
    }

    /// The comparability law between consecutive subcubes.
    pub fn law_holds(&self) -> bool {
        let subs: Vec<Vec<u64>> = (0..4).map(|j| self.subcube(j)).collect();
        let le = |a: u64, b: u64| a & !b == 0;
        for j in 0..4 {
            let fb = 1u64 << (self.f[j] - 1);
            let next = &subs[(j + 1) % 4];
            for &x in &subs[j] {
                for &y in next {
                    let ok = if j % 2 == 0 {
                        if x & fb != 0 {
                            le(y, x) && x != y
                        } else {
                            !le(x, y) && !le(y, x)
                        }
                    } else if x & fb == 0 {
                        le(x, y) && x != y
                    } else {
                        !le(x, y) && !le(y, x)
                    };
                    if !ok {
                        return false;
                    }
                }
            }
        }
        true
    }

    pub fn to_text(&self) -> String {
        let list = |v: &[u32]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        let mut s = format!("absorber n={} d={}\n", self.n, self.d);
        for j in 0..4 {
            s += &format!("alpha{} = {}\n", j + 1, list(&self.alpha[j]));
        }
        for j in 0..4 {
            s += &format!("f{} = {}\n", j + 1, self.f[j]);
        }
        s += &format!("gamma = {}\n", list(&self.gamma));
        s
    }
}

pub fn build_absorber(n: u32, d: u32, alpha: [Vec<u32>; 4], f: [u32; 4], gamma: Vec<u32>) -> Result<Absorber> {
    let bad = |m: String| Err(Error::Parameter(m));
    if n > 62 || d == 0 {
        return bad(format!("need 1 <= d and n <= 62, got n={n} d={d}"));
    }
    let mut seen = HashSet::new();
    for (j, a) in alpha.iter().enumerate() {
        if a.len() != d as usize {
            return bad(format!("alpha{} has {} elements, expected {d}", j + 1, a.len()));
        }
        for &x in a {
            if x == 0 || x > n {
                return bad(format!("alpha{} contains {x} outside [1, {n}]", j + 1));
            }
            if !seen.insert(x) {
                return bad(format!("alpha sets overlap at {x}"));
            }
        }
        if !a.contains(&f[j]) {
            return bad(format!("f{} = {} is not in alpha{}", j + 1, f[j], j + 1));
        }
    }
    for &g in &gamma {
        if g == 0 || g > n || seen.contains(&g) {
            return bad(format!("gamma element {g} is not in beta"));
        }
    }
    let mut alpha = alpha;
    alpha.iter_mut().for_each(|a| a.sort_unstable());
    let mut gamma = gamma;
    gamma.sort_unstable();
    gamma.dedup();
    let a = Absorber { n, d, alpha, f, gamma };
    let all: Vec<u64> = a.elements();
    if all.iter().collect::<HashSet<_>>().len() != all.len() {
        return Err(Error::Verify("subcubes are not disjoint".into()));
    }
    if !a.law_holds() {
        return Err(Error::Verify("comparability law fails".into()));
    }
    Ok(a)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Construction,
    ExactSearch,
}

#[derive(Clone, Debug)]
pub struct AbsorbOptions {
    /// Node budget of the exact fallback; 0 disables it.
    pub exact_budget: u64,
}

impl Default for AbsorbOptions {
    fn default() -> Self {
        AbsorbOptions { exact_budget: 2_000_000 }
    }
}

#[derive(Clone, Debug)]
pub struct Absorbed {
    /// Copies as subsets, `copy[p]` for element `p` of `P`.
    pub copies: Vec<Vec<u64>>,
    pub uncovered: Vec<u64>,
    pub method: Method,
}

impl Absorbed {
    pub fn to_copysets(&self) -> Vec<CopySet> {
        self.copies.iter().map(|c| CopySet::from_masks(c)).collect()
    }
}

fn region_check(n: u32, region: &[u64], p: &Poset, copies: &[Vec<u64>]) -> Result<Vec<u64>> {
    let g = GroundPoset::Boolean(n);
    let elems: Vec<Element> = region.iter().map(|&m| Element::Set(m)).collect();
    let cs: Vec<CopySet> = copies.iter().map(|c| CopySet::from_masks(c)).collect();
    let rep = verify_region(&g, &elems, p, &cs, Mode::Almost(p.size() as u64 - 1));
    if !rep.pass {
        return Err(Error::Verify(rep.to_string()));
    }
    Ok(rep.uncovered.iter().map(|e| e.mask().expect("subset")).collect())
}

/// Packing of `A - R` leaving at most `|P| - 1` elements uncovered.
pub fn absorb(a: &Absorber, r: &[u64], p: &Poset, opts: &AbsorbOptions) -> Result<Absorbed> {
    let rset: HashSet<u64> = r.iter().copied().collect();
    let all = a.elements();
    if let Some(x) = r.iter().find(|x| a.which(**x).is_none()) {
        return Err(Error::Precondition(format!("{x:x} is not in the absorber")));
    }
    let region: Vec<u64> = all.iter().copied().filter(|x| !rset.contains(x)).collect();
    let built = construct(a, &rset, p);
    if let Ok(copies) = &built {
        if let Ok(unc) = region_check(a.n, &region, p, copies) {
            return Ok(Absorbed { copies: copies.clone(), uncovered: unc, method: Method::Construction });
        }
    }
    if opts.exact_budget == 0 {
        return Err(built.err().unwrap_or_else(|| Error::Verify("construction output rejected".into())));
    }
    let skips = region.len() % p.size();
    let reg = Region::from_masks(&region);
    match exact_cover_in(&reg, p, skips, opts.exact_budget)? {
        Some(cs) => {
            let copies: Vec<Vec<u64>> = cs.iter().map(|c| c.masks()).collect();
            let unc = region_check(a.n, &region, p, &copies)?;
            Ok(Absorbed { copies, uncovered: unc, method: Method::ExactSearch })
        }
        None => Err(built.err().unwrap_or_else(|| Error::Infeasible("no almost-partition of the absorber remainder".into()))),
    }
}

/// The special-copy, repair, greedy, relocation construction.
fn construct(a: &Absorber, rset: &HashSet<u64>, p: &Poset) -> Result<Vec<Vec<u64>>> {
    let np = p.size();
    let subs: Vec<Vec<u64>> = (0..4).map(|j| a.subcube(j)).collect();
    let sub_of = |x: u64| a.which(x).expect("absorber element");
    // special packings avoiding R
    let mut specials: Vec<Vec<SpecialCopy>> = Vec::new();
    for j in 0..4 {
        let pol = if j % 2 == 0 { Polarity::Min } else { Polarity::Max };
        let cs = if a.d as usize >= np { cube_special_copies(p, &a.alpha[j], a.lambda(j), a.f[j], pol)? } else { Vec::new() };
        specials.push(cs.into_iter().filter(|c| c.masks.iter().all(|m| !rset.contains(m))).collect());
    }
    let mut covered: HashSet<u64> = specials.iter().flatten().flat_map(|c| c.masks.iter().copied()).collect();
    // copies whose extreme was moved out of its subcube
    let mut moved: Vec<Vec<bool>> = specials.iter().map(|v| vec![false; v.len()]).collect();
    for j in 0..3 {
        let uncovered_here = subs[j].iter().filter(|x| !rset.contains(x) && !covered.contains(x)).count();
        let moves = (np - uncovered_here % np) % np;
        for _ in 0..moves {
            let Some(ci) = (0..specials[j].len()).rev().find(|&i| !moved[j][i]) else {
                return Err(Error::Capacity { stage: format!("repair S{}", j + 1), have: 0, need: 1 });
            };
            let Some(&y) = subs[j + 1].iter().find(|x| !rset.contains(x) && !covered.contains(x)) else {
                return Err(Error::Capacity { stage: format!("repair S{}", j + 2), have: 0, need: 1 });
            };
            let c = &mut specials[j][ci];
            covered.remove(&c.extreme());
            covered.insert(y);
            c.masks[c.element] = y;
            moved[j][ci] = true;
        }
    }
    let mut copies: Vec<Vec<u64>> = Vec::new();
    let mut uncovered: Vec<Vec<u64>> = Vec::new();
    let mut extra: Vec<Vec<Vec<u64>>> = Vec::new();
    for j in 0..4 {
        let free: Vec<u64> = subs[j].iter().copied().filter(|x| !rset.contains(x) && !covered.contains(x)).collect();
        let greedy = greedy_masks(&free, p);
        for c in &greedy {
            covered.extend(c.iter().copied());
        }
        extra.push(greedy);
    }
    for j in 0..4 {
        uncovered.push(subs[j].iter().copied().filter(|x| !rset.contains(x) && !covered.contains(x)).collect());
    }
    // relocation: extremes of special copies fill the next subcube's holes
    let mut specials_out: Vec<Vec<Vec<u64>>> = specials.iter().map(|v| v.iter().map(|c| c.masks.clone()).collect()).collect();
    let mut secondary: Vec<Vec<u64>> = Vec::new();
    for j in 0..4 {
        let holes = &uncovered[(j + 1) % 4];
        let want = holes.len() / np;
        if want == 0 {
            continue;
        }
        let m_j: Vec<u64> = specials[j]
            .iter()
            .zip(&moved[j])
            .filter(|(c, mv)| !**mv && sub_of(c.extreme()) == j)
            .map(|(c, _)| c.extreme())
            .collect();
        let q_j = greedy_masks(&m_j, p);
        if q_j.len() < want {
            return Err(Error::Capacity { stage: format!("relocate S{} to S{}", j + 1, (j + 1) % 4 + 1), have: q_j.len() * np, need: holes.len() });
        }
        let chosen = &q_j[..want];
        let mut src: Vec<u64> = chosen.iter().flatten().copied().collect();
        src.sort_unstable();
        for (x, &y) in src.iter().zip(holes.iter()) {
            let ci = specials[j].iter().position(|c| c.extreme() == *x).expect("extreme of a special copy");
            let el = specials[j][ci].element;
            specials_out[j][ci][el] = y;
        }
        secondary.extend(chosen.iter().cloned());
    }
    for j in 0..4 {
        copies.extend(specials_out[j].iter().cloned());
        copies.extend(extra[j].iter().cloned());
    }
    copies.extend(secondary);
    Ok(copies)
}

/// Greedy maximal packing of `P` inside a set of subsets.
pub fn greedy_masks(region: &[u64], p: &Poset) -> Vec<Vec<u64>> {
    let r = Region::from_masks(region);
    let emb = Embedder::new(p, &r);
    let mut avail = r.all();
    let mut out = Vec::new();
    while let Some(m) = emb.first(&avail) {
        for &i in &m {
            clear_bit(&mut avail, i);
        }
        out.push(m.iter().map(|&i| region[i]).collect());
    }
    out
}

#[derive(Clone, Debug)]
pub struct ProductAbsorbed {
    /// Copies as masks `(x << n) | a`.
    pub copies: Vec<Vec<u64>>,
    pub uncovered: Vec<u64>,
    pub bridges: Vec<Vec<u64>>,
}

/// Packing of `(2^[s] x A) - R` leaving at most `|P| - 1` elements, with
/// `r_map[x]` the removed part of slice `x`.
pub fn product_absorb(s: u32, a: &Absorber, r_map: &[Vec<u64>], p: &Poset, opts: &AbsorbOptions) -> Result<ProductAbsorbed> {
    if r_map.len() != 1usize << s || a.n + s > 62 {
        return Err(Error::Parameter(format!("need 2^{s} removal sets and s + n <= 62")));
    }
    let n = a.n;
    let np = p.size();
    let order = gray_code(s);
    let elems = a.elements();
    let region = Region::from_masks(&elems);
    let emb = Embedder::new(p, &region);
    let lift = |x: u64, m: u64| (x << n) | m;
    let mut copies: Vec<Vec<u64>> = Vec::new();
    let mut bridges: Vec<Vec<u64>> = Vec::new();
    let mut uncovered = Vec::new();
    // part of the previous bridge lying in the current slice
    let mut carry: Vec<u64> = Vec::new();
    for (j, &xj) in order.iter().enumerate() {
        let mut removed: Vec<u64> = r_map[xj as usize].clone();
        removed.extend(&carry);
        if j + 1 == order.len() {
            let res = absorb(a, &removed, p, opts).map_err(|e| e.at(&format!("slice {j}")))?;
            copies.extend(res.copies.iter().map(|c| c.iter().map(|&m| lift(xj, m)).collect()));
            uncovered.extend(res.uncovered.iter().map(|&m| lift(xj, m)));
            break;
        }
        let xn = order[j + 1];
        let up = xj & !xn == 0;
        let rem = elems.len() - removed.iter().collect::<HashSet<_>>().len();
        let q = rem % np;
        let forbid_here: HashSet<u64> = removed.iter().copied().collect();
        let forbid_next: HashSet<u64> = r_map[xn as usize].iter().copied().collect();
        let mut avail = region.all();
        for (i, m) in elems.iter().enumerate() {
            if forbid_here.contains(m) || forbid_next.contains(m) {
                clear_bit(&mut avail, i);
            }
        }
        let ideals = if up { p.downsets_of_size(q) } else { p.upsets_of_size(q) };
        let mut found: Option<(Vec<u64>, u64, crate::absorber::Absorbed)> = None;
        emb.for_each(&avail, |map| {
            let qmasks: Vec<u64> = map.iter().map(|&i| elems[i]).collect();
            for &ideal in &ideals {
                let mut here = removed.clone();
                here.extend((0..np).filter(|&k| ideal >> k & 1 == 1).map(|k| qmasks[k]));
                if let Ok(res) = absorb(a, &here, p, opts) {
                    if res.uncovered.is_empty() {
                        found = Some((qmasks.clone(), ideal, res));
                        return false;
                    }
                }
            }
            true
        });
        let Some((qmasks, ideal, res)) = found else { return Err(Error::Bridge(j + 1)) };
        let bridge: Vec<u64> =
            (0..np).map(|k| if ideal >> k & 1 == 1 { lift(xj, qmasks[k]) } else { lift(xn, qmasks[k]) }).collect();
        copies.extend(res.copies.iter().map(|c| c.iter().map(|&m| lift(xj, m)).collect()));
        carry = (0..np).filter(|&k| ideal >> k & 1 == 0).map(|k| qmasks[k]).collect();
        bridges.push(bridge.clone());
        copies.push(bridge);
    }
    let full_region: Vec<u64> = (0..1u64 << s)
        .flat_map(|x| {
            let rx: HashSet<u64> = r_map[x as usize].iter().copied().collect();
            elems.iter().filter(move |m| !rx.contains(m)).map(move |&m| lift(x, m)).collect::<Vec<_>>()
        })
        .collect();
    let unc = region_check(n + s, &full_region, p, &copies)?;
    debug_assert_eq!(unc.len(), uncovered.len());
    Ok(ProductAbsorbed { copies, uncovered: unc, bridges })
}

/// 1-based members, for display.
pub fn show(mask: u64) -> String {
    format!("{{{}}}", members(mask).iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poset::named;

    fn unit() -> Absorber {
        build_absorber(4, 1, [vec![1], vec![2], vec![3], vec![4]], [1, 2, 3, 4], vec![]).unwrap()
    }

    #[test]
    fn unit_absorber_subcubes() {
        let a = unit();
        assert_eq!(a.subcube(0), vec![set(&[2, 3]), set(&[1, 2, 3])]);
        assert_eq!(a.subcube(1), vec![set(&[1]), set(&[1, 2])]);
        assert_eq!(a.subcube(2), vec![set(&[1, 4]), set(&[1, 3, 4])]);
        assert_eq!(a.subcube(3), vec![set(&[3]), set(&[3, 4])]);
    }

    #[test]
    fn overlapping_alpha_rejected() {
        let e = build_absorber(4, 1, [vec![1], vec![1], vec![3], vec![4]], [1, 1, 3, 4], vec![]);
        assert!(matches!(e, Err(Error::Parameter(_))));
    }

    #[test]
    fn special_copies() {
        let c = make_special_copy(&Poset::chain(2), 2, 1, Polarity::Min).unwrap();
        assert_eq!(c.masks, vec![set(&[1]), set(&[1, 2])]);
        assert!(c.is_special());
        let d = make_special_copy(&named::diamond(), 4, 2, Polarity::Min).unwrap();
        assert_eq!(d.masks, vec![set(&[2]), set(&[1, 2]), set(&[2, 3]), set(&[1, 2, 3, 4])]);
        let m = make_special_copy(&Poset::chain(2), 3, 3, Polarity::Max).unwrap();
        assert_eq!(m.extreme(), set(&[1, 2]));
        assert!(m.is_special());
        let sh = shifted_special_copies(&Poset::chain(2), 3, 1, Polarity::Min).unwrap();
        assert_eq!(sh[1].masks, vec![set(&[1, 3]), set(&[1, 2, 3])]);
    }

    #[test]
    fn replace_rules() {
        let sh = shifted_special_copies(&Poset::chain(2), 3, 1, Polarity::Min).unwrap();
        let r = replace_extreme(&sh[1], set(&[1])).unwrap();
        assert_eq!(r.masks, vec![set(&[1]), set(&[1, 2, 3])]);
        assert!(replace_extreme(&sh[1], set(&[2, 3])).is_err());
    }
}

#[cfg(test)]
mod absorb_tests {
    use super::*;

    fn standard(d: u32) -> Absorber {
        let alpha: [Vec<u32>; 4] = std::array::from_fn(|j| (1..=d).map(|i| j as u32 * d + i).collect());
        let f = std::array::from_fn(|j| alpha[j][0]);
        build_absorber(4 * d, d, alpha, f, vec![]).unwrap()
    }

    #[test]
    fn absorb_empty_and_single() {
        let p = Poset::chain(2);
        let a = standard(2);
        let res = absorb(&a, &[], &p, &AbsorbOptions::default()).unwrap();
        assert_eq!((res.copies.len(), res.uncovered.len()), (8, 0));
        let r = [a.elements()[5]];
        let res = absorb(&a, &r, &p, &AbsorbOptions::default()).unwrap();
        assert_eq!((res.copies.len(), res.uncovered.len()), (7, 1));
        let res = absorb(&a, &a.elements(), &p, &AbsorbOptions::default()).unwrap();
        assert!(res.copies.is_empty() && res.uncovered.is_empty());
    }

    #[test]
    fn construction_d3() {
        let p = Poset::chain(2);
        let a = standard(3);
        let els = a.elements();
        let mut cons = 0;
        for i in 0..els.len() {
            for j in i..els.len() {
                let r = if i == j { vec![els[i]] } else { vec![els[i], els[j]] };
                let res = absorb(&a, &r, &p, &AbsorbOptions::default()).unwrap();
                assert_eq!(res.uncovered.len(), (32 - r.len()) % 2);
                cons += (res.method == Method::Construction) as usize;
            }
        }
        eprintln!("construction-only successes: {cons}");
    }

    #[test]
    fn product_absorb_small() {
        let p = Poset::chain(2);
        let a = standard(2);
        for s in 0..=2u32 {
            let r = vec![Vec::new(); 1 << s];
            let res = product_absorb(s, &a, &r, &p, &AbsorbOptions::default()).unwrap();
            assert!(res.uncovered.is_empty());
            assert_eq!(res.copies.len(), 8 << s);
            assert_eq!(res.bridges.len(), (1 << s) - 1);
        }
    }
}
