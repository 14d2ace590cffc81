//! Residue functions mod `|P|` and their realization by multisets of copies.

use std::collections::{BTreeMap, HashMap};

use crate::absorber::{cube_special_copy, Polarity};
use crate::error::{Error, Result};
use crate::ground::{full, members};
use crate::poset::Poset;
use crate::product::BoxLattice;

/// Sparse function into `Z_modulus`; absent keys are 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidueFunction {
    pub modulus: u32,
    values: BTreeMap<u64, u32>,
}

impl ResidueFunction {
    pub fn zero(modulus: u32) -> ResidueFunction {
        ResidueFunction { modulus, values: BTreeMap::new() }
    }

    pub fn get(&self, x: u64) -> u32 {
        self.values.get(&x).copied().unwrap_or(0)
    }

    pub fn set(&mut self, x: u64, v: u32) {
        let v = v % self.modulus;
        if v == 0 {
            self.values.remove(&x);
        } else {
            self.values.insert(x, v);
        }
    }

    pub fn add(&mut self, x: u64, v: u32) {
        let cur = self.get(x);
        self.set(x, cur + v % self.modulus);
    }

    pub fn support(&self) -> impl Iterator<Item = (u64, u32)> + '_ {
        self.values.iter().map(|(&k, &v)| (k, v))
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    pub fn total(&self) -> u32 {
        self.values.values().fold(0, |s, v| (s + v) % self.modulus)
    }

    pub fn to_text(&self) -> String {
        self.values.iter().map(|(k, v)| format!("{k:x} {v}\n")).collect()
    }

    pub fn parse(text: &str, modulus: u32) -> Result<ResidueFunction> {
        let mut f = ResidueFunction::zero(modulus);
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: &str| Error::Parse { line: i + 1, msg: msg.to_string() };
            let mut it = line.split_whitespace();
            let (Some(e), Some(v), None) = (it.next(), it.next(), it.next()) else {
                return Err(err("expected `<element> <value>`"));
            };
            let e = u64::from_str_radix(e, 16).map_err(|_| err("bad element"))?;
            let v: u32 = v.parse().map_err(|_| err("bad value"))?;
            f.add(e, v);
        }
        Ok(f)
    }
}

/// Copies with multiplicities in `[0, modulus)`, kept in canonical order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CopyMultiset {
    pub modulus: u32,
    items: BTreeMap<Vec<u64>, (Vec<u64>, u32)>,
}

impl CopyMultiset {
    pub fn new(modulus: u32) -> CopyMultiset {
        CopyMultiset { modulus, items: BTreeMap::new() }
    }

    /// `copy[p]` is the image of element `p`.
    pub fn add(&mut self, copy: Vec<u64>, mult: u32) {
        let mut key = copy.clone();
        key.sort_unstable();
        let m = self.modulus;
        let e = self.items.entry(key.clone()).or_insert((copy, 0));
        e.1 = (e.1 + mult % m) % m;
        if e.1 == 0 {
            self.items.remove(&key);
        }
    }

    pub fn merge(&mut self, other: &CopyMultiset, scale: u32) {
        for (c, m) in other.iter() {
            self.add(c.to_vec(), m * (scale % self.modulus));
        }
    }

    pub fn negated(&self) -> CopyMultiset {
        let mut out = CopyMultiset::new(self.modulus);
        for (c, m) in self.iter() {
            out.add(c.to_vec(), self.modulus - m);
        }
        out
    }

    pub fn map(&self, f: impl Fn(u64) -> u64) -> CopyMultiset {
        let mut out = CopyMultiset::new(self.modulus);
        for (c, m) in self.iter() {
            out.add(c.iter().map(|&x| f(x)).collect(), m);
        }
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[u64], u32)> + '_ {
        self.items.values().map(|(c, m)| (c.as_slice(), *m))
    }

    /// Distinct copies.
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Copies counted with multiplicity.
    pub fn count(&self) -> usize {
        self.items.values().map(|(_, m)| *m as usize).sum()
    }

    /// Each copy repeated by its multiplicity.
    pub fn expanded(&self) -> Vec<Vec<u64>> {
        self.iter().flat_map(|(c, m)| std::iter::repeat_n(c.to_vec(), m as usize)).collect()
    }
}

pub fn residue_of(ms: &CopyMultiset) -> ResidueFunction {
    let mut f = ResidueFunction::zero(ms.modulus);
    for (c, m) in ms.iter() {
        for &x in c {
            f.add(x, m);
        }
    }
    f
}

fn pair_function(x: u64, y: u64, modulus: u32) -> ResidueFunction {
    let mut f = ResidueFunction::zero(modulus);
    f.add(x, 1);
    f.add(y, modulus - 1);
    f
}

/// Multiset of copies in `T(m)` whose residue is `chi_x - chi_y`. With
/// `good`, no copy contains a set of size 1 or `m - 1`.
pub fn realize_pair(x: u64, y: u64, m: u32, p: &Poset, good: bool) -> Result<CopyMultiset> {
    let np = p.size() as u32;
    if m < 2 * np + 2 || m > 62 {
        return Err(Error::Size { got: m as usize, cap: (2 * np + 2) as usize });
    }
    let top = full(m);
    for v in [x, y] {
        if v == 0 || v == top || v & !top != 0 {
            return Err(Error::Parameter(format!("{v:x} is not in T({m})")));
        }
    }
    let bad = |v: u64| v.count_ones() == 1 || v.count_ones() == m - 1;
    if good && (bad(x) || bad(y)) {
        return Err(Error::Goodness(format!("{x:x} or {y:x} has size 1 or {}", m - 1)));
    }
    let out = pair(x, y, m, p)?;
    if residue_of(&out) != pair_function(x, y, np) {
        return Err(Error::Verify(format!("pair {x:x},{y:x} residue mismatch")));
    }
    if let Some(v) = out.iter().flat_map(|(c, _)| c.iter().copied()).find(|&v| good && bad(v)) {
        return Err(Error::Goodness(format!("copy member {v:x} has size 1 or {}", m - 1)));
    }
    Ok(out)
}

fn pair(x: u64, y: u64, m: u32, p: &Poset) -> Result<CopyMultiset> {
    let np = p.size() as u32;
    let modulus = np;
    if x == y {
        return Ok(CopyMultiset::new(modulus));
    }
    if x & !y == 0 {
        return subset_pair(x, y, m, p);
    }
    if y & !x == 0 {
        return Ok(subset_pair(y, x, m, p)?.negated());
    }
    let via = |z: u64| -> Result<CopyMultiset> {
        let mut out = pair(x, z, m, p)?;
        out.merge(&pair(z, y, m, p)?, 1);
        Ok(out)
    };
    let meet = x & y;
    if meet.count_ones() > 1 {
        return via(meet);
    }
    let join = x | y;
    if join.count_ones() < m - 1 {
        return via(join);
    }
    let direct = |a: u64, b: u64| a & !b == 0 || b & !a == 0 || (a & b).count_ones() > 1 || (a | b).count_ones() < m - 1;
    let z = (1..full(m))
        .find(|&z| {
            let s = z.count_ones();
            s != 1 && s != m - 1 && direct(x, z) && direct(z, y)
        })
        .ok_or_else(|| Error::Infeasible(format!("no routing set between {x:x} and {y:x}")))?;
    via(z)
}

/// `x` strictly inside `y`.
fn subset_pair(x: u64, y: u64, m: u32, p: &Poset) -> Result<CopyMultiset> {
    let np = p.size() as u32;
    let top = full(m);
    if y.count_ones() + np < m {
        // y is the special minimum of a copy built on one element of x
        let i = members(x)[0];
        let mut base: Vec<u32> = members(top & !y).into_iter().take(np as usize - 1).collect();
        base.push(i);
        base.sort_unstable();
        let q = cube_special_copy(p, &base, y & !(1u64 << (i - 1)), i, Polarity::Min)?;
        debug_assert_eq!(q.extreme(), y);
        let mut out = CopyMultiset::new(np);
        let mut q2 = q.masks.clone();
        q2[q.element] = x;
        out.add(q2, 1);
        out.add(q.masks, np - 1);
        return Ok(out);
    }
    if x.count_ones() > np {
        let c = |v: u64| top & !v;
        return Ok(subset_pair(c(y), c(x), m, &p.dual())?.map(c).negated());
    }
    let z = members(y & !x).into_iter().take((np + 1 - x.count_ones()) as usize).fold(x, |z, e| z | 1u64 << (e - 1));
    let mut out = subset_pair(x, z, m, p)?;
    out.merge(&subset_pair(z, y, m, p)?, 1);
    Ok(out)
}

/// Realization of `f` over `B(k)` by copies avoiding problematic and
/// restricted elements.
pub fn strongly_realize(f: &ResidueFunction, b: &BoxLattice, t: u32, p: &Poset) -> Result<CopyMultiset> {
    let np = p.size() as u32;
    if f.modulus != np {
        return Err(Error::Precondition(format!("modulus {} differs from |P| = {np}", f.modulus)));
    }
    if f.is_zero() {
        return Ok(CopyMultiset::new(np));
    }
    if b.n1 < 2 * np + 2 {
        return Err(Error::Size { got: b.n1 as usize, cap: (2 * np + 2) as usize });
    }
    if let Some((x, _)) = f.support().find(|&(x, _)| x & !b.max() != 0 || b.in_pr(x, t)) {
        return Err(Error::Precondition(format!("f is nonzero at {} which is problematic or restricted", b.format(x))));
    }
    if f.total() != 0 {
        return Err(Error::Precondition(format!("values sum to {} mod {np}", f.total())));
    }
    let mut out = CopyMultiset::new(np);
    let ctx = Realizer { b, t, p };
    let b0 = b.from_coords(&vec![0b11; b.k as usize]);
    if b.in_pr(b0, t) {
        return Err(Error::Precondition("no ordinary base point".into()));
    }
    let mut memo: HashMap<u64, CopyMultiset> = HashMap::new();
    for (a, v) in f.support() {
        if a == b0 {
            continue;
        }
        let ms = match memo.get(&a) {
            Some(ms) => ms.clone(),
            None => {
                let ms = ctx.to_base(a, b0)?;
                memo.insert(a, ms.clone());
                ms
            }
        };
        out.merge(&ms, v);
    }
    if residue_of(&out) != *f {
        return Err(Error::Verify("strong realization residue mismatch".into()));
    }
    if let Some((c, _)) = out.iter().find(|(c, _)| c.iter().any(|&y| b.in_pr(y, t))) {
        return Err(Error::Verify(format!("copy {:?} meets a problematic or restricted element", c)));
    }
    Ok(out)
}

struct Realizer<'a> {
    b: &'a BoxLattice,
    t: u32,
    p: &'a Poset,
}

impl Realizer<'_> {
    fn modulus(&self) -> u32 {
        self.p.size() as u32
    }

    /// `f_{a, b0}` along a -> x1 -> y1 -> x2 -> y2 -> b0.
    fn to_base(&self, a: u64, b0: u64) -> Result<CopyMultiset> {
        let b = self.b;
        let two = 0b11u64;
        let co_two = b.coord_full() & !two;
        let empties: Vec<u32> = (0..b.k).filter(|&i| b.coord(a, i) == 0).collect();
        let fulls: Vec<u32> = (0..b.k).filter(|&i| b.coord(a, i) == b.coord_full()).collect();
        let l = b.non_extreme(a)[0];
        let mut out = CopyMultiset::new(self.modulus());
        let mut cur = a;
        if !empties.is_empty() {
            let x1 = b.with_coord(cur, l, two);
            out.merge(&self.same_class(cur, x1)?, 1);
            let y1 = empties.iter().fold(x1, |y, &j| b.with_coord(y, j, two));
            out.merge(&self.bridge(x1, y1, l, Polarity::Min)?, 1);
            cur = y1;
        }
        if !fulls.is_empty() {
            let x2 = b.with_coord(cur, l, co_two);
            out.merge(&self.same_class(cur, x2)?, 1);
            let y2 = fulls.iter().fold(x2, |y, &j| b.with_coord(y, j, co_two));
            out.merge(&self.bridge(x2, y2, l, Polarity::Max)?, 1);
            cur = y2;
        }
        out.merge(&self.same_class(cur, b0)?, 1);
        Ok(out)
    }

    /// `f_{x,y}` for `x, y` with the same empty and full coordinates, one
    /// coordinate at a time, mid-sized targets first.
    fn same_class(&self, x: u64, y: u64) -> Result<CopyMultiset> {
        let b = self.b;
        let mut out = CopyMultiset::new(self.modulus());
        let mut idx: Vec<u32> = (0..b.k).filter(|&i| b.coord(x, i) != b.coord(y, i)).collect();
        idx.sort_by_key(|&i| !b.is_mid(b.coord(y, i)));
        let mut cur = x;
        for l in idx {
            let (u, v) = (b.coord(cur, l), b.coord(y, l));
            if b.is_extreme(u) || b.is_extreme(v) {
                return Err(Error::Precondition("elements lie in different classes".into()));
            }
            let good = b.is_mid(u) && b.is_mid(v);
            let ms = realize_pair(u, v, b.n1, self.p, good)?;
            let base = b.with_coord(cur, l, 0);
            out.merge(&ms.map(|z| base | z << (l * b.n1)), 1);
            cur = b.with_coord(cur, l, v);
        }
        Ok(out)
    }

    /// `f_{x,y}` where `y` is `x` with empty (or full) coordinates filled
    /// (or emptied); `y` is the special extreme of a copy varying coordinate `l`.
    fn bridge(&self, x: u64, y: u64, l: u32, pol: Polarity) -> Result<CopyMultiset> {
        let b = self.b;
        let np = self.p.size();
        let v = b.coord(x, l);
        let q = match pol {
            Polarity::Min => {
                let i = members(v)[0];
                let mut base: Vec<u32> = members(b.coord_full() & !v).into_iter().take(np - 1).collect();
                base.push(i);
                base.sort_unstable();
                cube_special_copy(self.p, &base, v & !(1u64 << (i - 1)), i, pol)?
            }
            Polarity::Max => {
                let i = members(b.coord_full() & !v)[0];
                let mut base: Vec<u32> = members(v).into_iter().take(np - 1).collect();
                base.push(i);
                base.sort_unstable();
                cube_special_copy(self.p, &base, v & !crate::ground::set(&base), i, pol)?
            }
        };
        debug_assert_eq!(q.extreme(), v);
        let lift: Vec<u64> = q.masks.iter().map(|&z| b.with_coord(y, l, z)).collect();
        let mut swapped = lift.clone();
        swapped[q.element] = x;
        let mut out = CopyMultiset::new(self.modulus());
        out.add(swapped, 1);
        out.add(lift, self.modulus() - 1);
        let _ = self.t;
        Ok(out)
    }
}
