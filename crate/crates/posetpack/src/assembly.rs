//! Absorber collections, matchings and boundary covers, composed into an
//! almost-partition of the truncated lattice `2^[n3] x B(k)` minus its ends.

use std::collections::{HashMap, HashSet, VecDeque};
use std::time::Instant;

use rand::Rng;

use crate::absorber::{build_absorber, cube_special_copy, product_absorb, spread, AbsorbOptions, Absorber, Polarity};
use crate::embed::{Embedder, Region};
use crate::error::{Error, Result};
use crate::ground::{full, members};
use crate::oracle::{verify_masks, Mode};
use crate::poset::Poset;
use crate::residues::{strongly_realize, ResidueFunction};
use crate::rng::stream;

pub use crate::product::{default_threshold, BoxLattice, Class};

pub fn classify(b: &BoxLattice, y: u64, t: u32) -> Class {
    b.classify(y, t)
}

/// Copies of `P` inside `f + {x}` that contain `x`, one per element set.
pub fn copies_through(f: &[u64], x: u64, p: &Poset) -> Vec<Vec<u64>> {
    let mut region: Vec<u64> = f.iter().copied().filter(|&m| m != x).collect();
    region.push(x);
    let xi = region.len() - 1;
    let r = Region::from_masks(&region);
    let mut out = Vec::new();
    Embedder::new(p, &r).for_each(&r.all(), |map| {
        if map.contains(&xi) {
            out.push(map.iter().map(|&i| region[i]).collect());
        }
        true
    });
    out
}

/// `f + {x}` holds `|P|` copies through `x` meeting pairwise only in `x`.
pub fn completes(f: &[u64], x: u64, p: &Poset) -> bool {
    if f.contains(&x) {
        return false;
    }
    let cs = copies_through(f, x, p);
    fn pick(cs: &[Vec<u64>], x: u64, from: usize, used: &mut HashSet<u64>, left: usize) -> bool {
        if left == 0 {
            return true;
        }
        for i in from..cs.len() {
            if cs[i].iter().any(|&m| m != x && used.contains(&m)) {
                continue;
            }
            cs[i].iter().filter(|&&m| m != x).for_each(|&m| {
                used.insert(m);
            });
            if pick(cs, x, i + 1, used, left - 1) {
                return true;
            }
            cs[i].iter().for_each(|m| {
                used.remove(m);
            });
        }
        false
    }
    pick(&cs, x, 0, &mut HashSet::new(), p.size())
}

#[derive(Clone, Debug)]
pub struct AbsorberCollection {
    pub n1: u32,
    pub d: u32,
    pub absorbers: Vec<Absorber>,
    pub disjoint: bool,
    pub no_extreme_sizes: bool,
    pub completes_all: bool,
    pub attempts: usize,
}

impl AbsorberCollection {
    pub fn covered(&self) -> HashSet<u64> {
        self.absorbers.iter().flat_map(|a| a.elements()).collect()
    }
}

/// All `d`-dimensional absorbers of `2^[n1]` with no member of size 1 or `n1 - 1`.
pub fn absorber_family(n1: u32, d: u32) -> Result<Vec<Absorber>> {
    absorber_family_avoiding(n1, d, &|m: u64| m.count_ones() == 1 || m.count_ones() + 1 == n1)
}

/// All `d`-dimensional absorbers of `2^[n1]` with no member rejected by `avoid`.
pub fn absorber_family_avoiding(n1: u32, d: u32, avoid: &dyn Fn(u64) -> bool) -> Result<Vec<Absorber>> {
    if n1 < 4 * d || d == 0 || n1 > 16 {
        return Err(Error::Parameter(format!("need 1 <= d, 4d <= n1 <= 16, got n1={n1} d={d}")));
    }
    let mut out = Vec::new();
    let all: Vec<u32> = (1..=n1).collect();
    let mut alphas: Vec<Vec<u32>> = Vec::new();
    type Avoid<'a> = &'a dyn Fn(u64) -> bool;
    fn choose(rest: &[u32], d: usize, depth: usize, alphas: &mut Vec<Vec<u32>>, n1: u32, avoid: Avoid, out: &mut Vec<Absorber>) {
        if depth == 4 {
            let beta: Vec<u32> = rest.to_vec();
            let fs: Vec<[u32; 4]> = (0..(d as u32).pow(4))
                .map(|c| std::array::from_fn(|j| alphas[j][(c / (d as u32).pow(j as u32)) as usize % d]))
                .collect();
            for f in fs {
                for g in 0..1u64 << beta.len() {
                    let gamma: Vec<u32> = members(spread(g, &beta));
                    let alpha: [Vec<u32>; 4] = std::array::from_fn(|j| alphas[j].clone());
                    if let Ok(a) = build_absorber(n1, d as u32, alpha, f, gamma) {
                        if !a.elements().into_iter().any(avoid) {
                            out.push(a);
                        }
                    }
                }
            }
            return;
        }
        for c in 0..1u64 << rest.len() {
            if c.count_ones() as usize != d {
                continue;
            }
            let pick = members(spread(c, rest));
            let left: Vec<u32> = rest.iter().copied().filter(|x| !pick.contains(x)).collect();
            alphas.push(pick);
            choose(&left, d, depth + 1, alphas, n1, avoid, out);
            alphas.pop();
        }
    }
    choose(&all, d as usize, 0, &mut alphas, n1, avoid, &mut out);
    Ok(out)
}

/// Re-checks disjointness, the size restriction, and completion of every
/// uncovered `x` in `T(n1)`. Returns the first uncompleted `x`, if any.
pub fn check_collection(n1: u32, absorbers: &[Absorber], p: &Poset) -> (bool, bool, Option<u64>) {
    let mut seen = HashSet::new();
    let disjoint = absorbers.iter().flat_map(|a| a.elements()).all(|m| seen.insert(m));
    let sizes = absorbers.iter().flat_map(|a| a.elements()).all(|m| m.count_ones() != 1 && m.count_ones() + 1 != n1);
    let elems: Vec<Vec<u64>> = absorbers.iter().map(|a| a.elements()).collect();
    let missing = (1..full(n1)).filter(|x| !seen.contains(x)).find(|&x| !elems.iter().any(|e| completes(e, x, p)));
    (disjoint, sizes, missing)
}

/// Sample-and-verify absorber selection.
pub fn select_absorbers(n1: u32, d: u32, q: f64, max_retries: usize, seed: u64, p: &Poset) -> Result<AbsorberCollection> {
    if n1 < 4 * d {
        return Err(Error::Precondition(format!("n1 = {n1} < 4d = {}", 4 * d)));
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::Parameter(format!("q = {q} is not a probability")));
    }
    let family = absorber_family(n1, d)?;
    let elems: Vec<Vec<u64>> = family.iter().map(|a| a.elements()).collect();
    let mut worst = None;
    let mut max_deg = 0;
    for attempt in 0..max_retries {
        let mut rng = stream(seed, attempt as u64);
        let picked: Vec<usize> = (0..family.len()).filter(|_| rng.gen_bool(q)).collect();
        let mut owners: HashMap<u64, Vec<usize>> = HashMap::new();
        for (slot, &i) in picked.iter().enumerate() {
            for &m in &elems[i] {
                owners.entry(m).or_default().push(slot);
            }
        }
        let mut edges: Vec<(usize, usize)> = owners
            .values()
            .flat_map(|v| v.iter().enumerate().flat_map(move |(a, &x)| v[a + 1..].iter().map(move |&y| (x.min(y), x.max(y)))))
            .collect();
        edges.sort_unstable();
        edges.dedup();
        let mut deg = vec![0usize; picked.len()];
        for &(a, b) in &edges {
            deg[a] += 1;
            deg[b] += 1;
        }
        max_deg = deg.iter().copied().max().unwrap_or(0);
        let mut alive = vec![true; picked.len()];
        for &(a, b) in &edges {
            if alive[a] && alive[b] {
                alive[if rng.gen_bool(0.5) { a } else { b }] = false;
            }
        }
        let chosen: Vec<Absorber> = picked.iter().zip(&alive).filter(|(_, &l)| l).map(|(&i, _)| family[i].clone()).collect();
        let (disjoint, sizes, missing) = check_collection(n1, &chosen, p);
        if disjoint && sizes && missing.is_none() {
            return Ok(AbsorberCollection {
                n1,
                d,
                absorbers: chosen,
                disjoint,
                no_extreme_sizes: sizes,
                completes_all: true,
                attempts: attempt + 1,
            });
        }
        worst = missing;
    }
    Err(Error::RetriesExhausted(format!(
        "{max_retries} attempts; last uncompleted x = {}; conflict graph max degree {max_deg}",
        worst.map(|x| format!("{x:x}")).unwrap_or_else(|| "none".into())
    )))
}

/// Seeded local search for `size` pairwise disjoint absorbers with no member
/// rejected by `avoid`. The sets of `T(n1)` left uncovered must match into
/// the absorbers completing them, each absorber taking at most `capacity`
/// of them. `budget` bounds the number of moves.
#[allow(clippy::too_many_arguments)]
pub fn pack_absorbers(
    n1: u32,
    d: u32,
    size: usize,
    avoid: &dyn Fn(u64) -> bool,
    capacity: usize,
    seed: u64,
    budget: u64,
    p: &Poset,
) -> Result<AbsorberCollection> {
    let mut family = absorber_family_avoiding(n1, d, avoid)?;
    let mut seen = HashSet::new();
    family.retain(|a| {
        let mut e = a.elements();
        e.sort_unstable();
        seen.insert(e)
    });
    let elems: Vec<Vec<u64>> = family.iter().map(|a| a.elements()).collect();
    if elems.is_empty() {
        return Err(Error::Infeasible("no absorbers avoid the reserved sets".into()));
    }
    let mut rng = stream(seed, 0);
    let mut owner: Vec<usize> = vec![usize::MAX; full(n1) as usize + 1];
    let mut chosen: Vec<bool> = vec![false; elems.len()];
    let mut count = 0usize;
    let mut best = 0usize;
    let accept = |chosen: &[bool]| -> bool {
        let ids: Vec<usize> = (0..elems.len()).filter(|&i| chosen[i]).collect();
        let cov: HashSet<u64> = ids.iter().flat_map(|&i| elems[i].iter().copied()).collect();
        let adj: Vec<Vec<usize>> = (1..full(n1))
            .filter(|v| !cov.contains(v))
            .map(|v| {
                (0..ids.len())
                    .filter(|&j| completes(&elems[ids[j]], v, p))
                    .flat_map(|j| (0..capacity).map(move |r| j * capacity + r))
                    .collect()
            })
            .collect();
        matches!(hall_match(ids.len() * capacity, &adj), HallOutcome::Complete(_))
    };
    for step in 0..budget {
        let i = rng.gen_range(0..elems.len());
        if chosen[i] {
            continue;
        }
        let mut clash: Vec<usize> = elems[i].iter().map(|&m| owner[m as usize]).filter(|&o| o != usize::MAX).collect();
        clash.sort_unstable();
        clash.dedup();
        let heat = 0.05 * (1.0 - step as f64 / budget as f64);
        let take = match clash.len() {
            0 => true,
            1 => rng.gen_bool(0.5),
            c => rng.gen_bool(heat.powi(c as i32 - 1)),
        };
        if !take {
            continue;
        }
        for o in clash {
            chosen[o] = false;
            elems[o].iter().for_each(|&m| owner[m as usize] = usize::MAX);
            count -= 1;
        }
        chosen[i] = true;
        elems[i].iter().for_each(|&m| owner[m as usize] = i);
        count += 1;
        best = best.max(count);
        if count >= size && accept(&chosen) {
            let absorbers: Vec<Absorber> = (0..elems.len()).filter(|&j| chosen[j]).map(|j| family[j].clone()).collect();
            let (disjoint, sizes, missing) = check_collection(n1, &absorbers, p);
            return Ok(AbsorberCollection {
                n1,
                d,
                absorbers,
                disjoint,
                no_extreme_sizes: sizes,
                completes_all: missing.is_none(),
                attempts: step as usize + 1,
            });
        }
    }
    Err(Error::RetriesExhausted(format!("{budget} moves; largest disjoint family had {best} absorbers")))
}

/// Problematic elements of `B(k)` other than its bottom and top.
pub fn problematic_elements(b: &BoxLattice, t: u32) -> Vec<u64> {
    let mut out = Vec::new();
    let mid: Vec<u64> = (1..b.coord_full()).collect();
    fn rec(b: &BoxLattice, t: u32, i: u32, cur: u64, used: u32, mid: &[u64], out: &mut Vec<u64>) {
        if i == b.k {
            out.push(cur);
            return;
        }
        for v in [0, b.coord_full()] {
            rec(b, t, i + 1, b.with_coord(cur, i, v), used, mid, out);
        }
        if used < t {
            for &v in mid {
                rec(b, t, i + 1, b.with_coord(cur, i, v), used + 1, mid, out);
            }
        }
    }
    rec(b, t, 0, 0, 0, &mid, &mut out);
    out.retain(|&y| y != 0 && y != b.max());
    out.sort_unstable();
    out
}

/// How a copy through a problematic `x` is laid out: which extreme side is
/// used, which empty coordinates carry the fixed singletons, and `(s, t)`.
#[derive(Clone, Copy, Debug)]
struct Layout {
    dual: bool,
    rot: usize,
    one: u64,
    s: u32,
    t: u64,
}

/// Coordinate values of size 1, then of size `n1 - 1`.
fn restricted_values(b: &BoxLattice) -> Vec<u64> {
    let ones = (0..b.n1).map(|i| 1u64 << i);
    let cos = (0..b.n1).map(|i| b.coord_full() ^ 1 << i).filter(|&v| v.count_ones() != 1);
    ones.chain(cos).collect()
}

fn layouts(b: &BoxLattice, p: &Poset, x: u64, vals: &[u64]) -> Vec<Layout> {
    let np = p.size();
    let empties = (0..b.k).filter(|&i| b.coord(x, i) == 0).count();
    let fulls = (0..b.k).filter(|&i| b.coord(x, i) == b.coord_full()).count();
    let mut sides = vec![fulls > empties];
    if empties == fulls {
        sides.push(true);
    }
    let mut out = Vec::new();
    for &one in vals {
        for &dual in &sides {
            let y = if dual { x ^ b.max() } else { x };
            let alpha = if dual { fulls } else { empties };
            if alpha < np {
                continue;
            }
            for s in (0..b.k).filter(|&i| b.coord(y, i) != 0) {
                for t in members(b.coord(y, s)) {
                    for rot in 0..alpha {
                        out.push(Layout { dual, rot, one, s, t: 1 << (t - 1) });
                    }
                }
            }
        }
    }
    out
}

/// Copy through the problematic `x` with layout `l` indexed by `u`.
fn problematic_member(b: &BoxLattice, p: &Poset, x: u64, l: Layout, u: &[u64]) -> Result<Vec<u64>> {
    if l.dual {
        let c = b.max();
        let m = problematic_member(b, &p.dual(), x ^ c, Layout { dual: false, ..l }, u)?;
        return Ok(m.into_iter().map(|y| y ^ c).collect());
    }
    let np = p.size();
    let mut empties: Vec<u32> = (0..b.k).filter(|&i| b.coord(x, i) == 0).collect();
    empties.rotate_left(l.rot);
    let ones = &empties[..np - 1];
    let ucoords = &empties[np - 1..];
    let base: Vec<u32> = (1..=np as u32).collect();
    let q = cube_special_copy(p, &base, 0, np as u32, Polarity::Min)?;
    let mut out = Vec::with_capacity(np);
    for (idx, &pm) in q.masks.iter().enumerate() {
        if idx == q.element {
            out.push(x);
            continue;
        }
        let mut z = 0u64;
        for i in 0..b.k {
            let v = if let Some(r) = ones.iter().position(|&c| c == i) {
                if pm >> r & 1 == 1 { l.one } else { 0 }
            } else if let Some(j) = ucoords.iter().position(|&c| c == i) {
                u[j]
            } else if i == l.s {
                if pm >> (np - 1) & 1 == 1 { b.coord_full() } else { b.coord_full() & !l.t }
            } else {
                b.coord_full()
            };
            z = b.with_coord(z, i, v);
        }
        out.push(z);
    }
    Ok(out)
}

/// Greedy cover of the given problematic targets, each copy holding one
/// problematic element and otherwise restricted ones with no coordinate
/// value rejected by `avoid`.
pub fn cover_problematic_targets(
    b: &BoxLattice,
    t: u32,
    p: &Poset,
    targets: &[u64],
    avoid: &dyn Fn(u64) -> bool,
) -> Result<Vec<Vec<u64>>> {
    let np = p.size();
    let vals: Vec<u64> = restricted_values(b).into_iter().filter(|&v| !avoid(v)).collect();
    let mut used: HashSet<u64> = HashSet::new();
    let mut out = Vec::new();
    for &x in targets {
        if used.contains(&x) {
            return Err(Error::Precondition(format!("target {} is covered twice", b.format(x))));
        }
        let ls = layouts(b, p, x, &vals);
        if ls.is_empty() {
            return Err(Error::Precondition(format!("{} has fewer than |P| extreme coordinates of one kind", b.format(x))));
        }
        let mut found = None;
        'layouts: for l in ls {
            let y = if l.dual { x ^ b.max() } else { x };
            let w = (0..b.k).filter(|&i| b.coord(y, i) == 0).count() + 1 - np;
            let mut u = vec![0usize; w];
            'search: loop {
                let uv: Vec<u64> = u.iter().map(|&i| vals[i]).collect();
                let m = problematic_member(b, p, x, l, &uv)?;
                let ok = |y: u64| b.classify(y, t) == Class::Restricted && (0..b.k).all(|i| !avoid(b.coord(y, i)));
                if m.iter().all(|&y| y == x || (!used.contains(&y) && ok(y))) {
                    found = Some(m);
                    break 'layouts;
                }
                for j in (0..w).rev() {
                    if u[j] + 1 < vals.len() {
                        u[j] += 1;
                        u[j + 1..].iter_mut().for_each(|v| *v = 0);
                        continue 'search;
                    }
                }
                break;
            }
        }
        let m = found.ok_or_else(|| Error::GreedyExhausted(format!("no free copy through problematic {}", b.format(x))))?;
        used.extend(m.iter().copied());
        out.push(m);
    }
    Ok(out)
}

pub fn cover_problematic(k: u32, n1: u32, t: u32, p: &Poset) -> Result<Vec<Vec<u64>>> {
    let b = BoxLattice::new(k, n1)?;
    cover_problematic_targets(&b, t, p, &problematic_elements(&b, t), &|_| false)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HallOutcome {
    /// `matched[l]` is the right vertex of left vertex `l`.
    Complete(Vec<usize>),
    /// Left vertices whose neighbourhood is smaller than the set.
    Violation(Vec<usize>),
}

/// Hopcroft–Karp maximum matching; `None` marks unmatched left vertices.
pub fn max_matching(n_right: usize, adj: &[Vec<usize>]) -> Vec<Option<usize>> {
    let n_left = adj.len();
    let mut ml: Vec<Option<usize>> = vec![None; n_left];
    let mut mr: Vec<Option<usize>> = vec![None; n_right];
    let mut dist = vec![u32::MAX; n_left];
    loop {
        let mut queue = VecDeque::new();
        for l in 0..n_left {
            if ml[l].is_none() {
                dist[l] = 0;
                queue.push_back(l);
            } else {
                dist[l] = u32::MAX;
            }
        }
        let mut found = false;
        while let Some(l) = queue.pop_front() {
            for &r in &adj[l] {
                match mr[r] {
                    None => found = true,
                    Some(l2) if dist[l2] == u32::MAX => {
                        dist[l2] = dist[l] + 1;
                        queue.push_back(l2);
                    }
                    _ => {}
                }
            }
        }
        if !found {
            break;
        }
        fn dfs(l: usize, adj: &[Vec<usize>], ml: &mut [Option<usize>], mr: &mut [Option<usize>], dist: &mut [u32]) -> bool {
            for &r in &adj[l] {
                let ok = match mr[r] {
                    None => true,
                    Some(l2) => dist[l2] == dist[l] + 1 && dfs(l2, adj, ml, mr, dist),
                };
                if ok {
                    ml[l] = Some(r);
                    mr[r] = Some(l);
                    return true;
                }
            }
            dist[l] = u32::MAX;
            false
        }
        for l in 0..n_left {
            if ml[l].is_none() {
                dfs(l, adj, &mut ml, &mut mr, &mut dist);
            }
        }
    }
    ml
}

pub fn hall_match(n_right: usize, adj: &[Vec<usize>]) -> HallOutcome {
    let ml = max_matching(n_right, adj);
    let Some(start) = ml.iter().position(|m| m.is_none()) else {
        return HallOutcome::Complete(ml.into_iter().map(|m| m.expect("complete")).collect());
    };
    let mut mr: Vec<Option<usize>> = vec![None; n_right];
    for (l, m) in ml.iter().enumerate() {
        if let Some(r) = m {
            mr[*r] = Some(l);
        }
    }
    let mut seen_l = vec![false; adj.len()];
    let mut seen_r = vec![false; n_right];
    let mut queue = VecDeque::from([start]);
    seen_l[start] = true;
    while let Some(l) = queue.pop_front() {
        for &r in &adj[l] {
            if !seen_r[r] {
                seen_r[r] = true;
                if let Some(l2) = mr[r] {
                    if !seen_l[l2] {
                        seen_l[l2] = true;
                        queue.push_back(l2);
                    }
                }
            }
        }
    }
    HallOutcome::Violation((0..adj.len()).filter(|&l| seen_l[l]).collect())
}

/// Members of the family through a small `x`: a copy with minimum `x | a`
/// for each `a` outside `x` and a fixed helper set, minimum swapped for `x`.
fn small_member(x: u64, m: u32, p: &Poset, a_index: u64) -> Result<Option<Vec<u64>>> {
    let np = p.size();
    let i = members(x)[0];
    let helper: Vec<u32> = members(full(m) & !x).into_iter().take(np - 1).collect();
    if helper.len() + 1 < np {
        return Ok(None);
    }
    let mut base = helper.clone();
    base.push(i);
    base.sort_unstable();
    let rest: Vec<u32> = members(full(m) & !x & !crate::ground::set(&helper));
    if a_index >> rest.len() != 0 {
        return Ok(None);
    }
    let a = spread(a_index, &rest);
    let q = cube_special_copy(p, &base, (x & !(1u64 << (i - 1))) | a, i, Polarity::Min)?;
    let mut c = q.masks.clone();
    c[q.element] = x;
    Ok(Some(c))
}

fn boundary_member(x: u64, m: u32, p: &Poset, a_index: u64, high: bool) -> Result<Option<Vec<u64>>> {
    if !high {
        return small_member(x, m, p, a_index);
    }
    let c = full(m);
    Ok(small_member(x ^ c, m, &p.dual(), a_index)?.map(|v| v.into_iter().map(|y| y ^ c).collect()))
}

/// `2 * 2^{H(c) m} < 2^{(1-c) m - |P|}`.
pub fn entropy_condition(m: u32, c: f64, p: &Poset) -> bool {
    let h = -c * c.log2() - (1.0 - c) * (1.0 - c).log2();
    1.0 + h * (m as f64) < (1.0 - c) * (m as f64) - p.size() as f64
}

fn size_thresholds(m: u32, c: f64) -> (u32, u32) {
    let lo = (c * m as f64 + 1e-9).floor() as u32;
    let hi = ((1.0 - c) * m as f64 - 1e-9).ceil() as u32;
    (lo, hi)
}

fn boundary_greedy(m: u32, c: f64, p: &Poset, used: &mut HashSet<u64>) -> Result<Vec<Vec<u64>>> {
    let (lo, hi) = size_thresholds(m, c);
    let top = full(m);
    let mut out = Vec::new();
    for x in 1..top {
        let s = x.count_ones();
        if !(s <= lo || s >= hi) || used.contains(&x) {
            continue;
        }
        let high = s > lo;
        let mut got = None;
        for a in 0u64.. {
            match boundary_member(x, m, p, a, high)? {
                None => break,
                Some(cand) => {
                    if cand.iter().all(|&y| y != 0 && y != top && (y == x || !used.contains(&y))) {
                        got = Some(cand);
                        break;
                    }
                }
            }
        }
        let cand = got.ok_or_else(|| Error::GreedyExhausted(format!("no free copy through {x:x} in T({m})")))?;
        used.extend(cand.iter().copied());
        out.push(cand);
    }
    Ok(out)
}

/// Packing of `T(m)` covering every set of size at most `cm` or at least `(1-c)m`.
pub fn smallsets_cover(m: u32, c: f64, p: &Poset) -> Result<Vec<Vec<u64>>> {
    if m as usize <= 5 * p.size() || m > 30 {
        return Err(Error::Precondition(format!("need 5|P| < m <= 30, got m = {m}")));
    }
    if !(c > 0.0 && c <= 0.1) {
        return Err(Error::Parameter(format!("need 0 < c <= 0.1, got {c}")));
    }
    boundary_greedy(m, c, p, &mut HashSet::new())
}

/// Sparse comparability graph between consecutive middle levels of `2^[m]`.
#[derive(Clone, Debug)]
pub struct LevelGraph {
    pub m: u32,
    pub c: f64,
    pub adj: Vec<Vec<u64>>,
}

impl LevelGraph {
    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(|v| v.len()).max().unwrap_or(0)
    }

    pub fn below(&self, x: u64) -> impl Iterator<Item = u64> + '_ {
        self.adj[x as usize].iter().copied().filter(move |&y| y & !x == 0)
    }

    pub fn above(&self, x: u64) -> impl Iterator<Item = u64> + '_ {
        self.adj[x as usize].iter().copied().filter(move |&y| x & !y == 0)
    }

    /// Levels whose members must have a neighbour on both sides.
    pub fn middle(&self) -> (u32, u32) {
        let lo = (self.c * self.m as f64 - 1e-9).ceil() as u32;
        let hi = ((1.0 - self.c) * self.m as f64 + 1e-9).floor() as u32;
        (lo.max(1), hi.min(self.m.saturating_sub(1)))
    }
}

fn level(m: u32, l: u32) -> Vec<u64> {
    (0..=full(m)).filter(|x| x.count_ones() == l).collect()
}

/// Matching of `lower` into `upper` plus a matching of `upper` into `r`
/// copies of `lower`, with roles swapped when the upper side is smaller.
fn level_pair(m: u32, l: u32, adj: &mut [Vec<u64>]) -> Result<()> {
    let a = level(m, l);
    let b = level(m, l + 1);
    let (small, big, up) = if m - l > l { (&a, &b, true) } else { (&b, &a, false) };
    let index: HashMap<u64, usize> = big.iter().enumerate().map(|(i, &x)| (x, i)).collect();
    let rel = |x: u64, y: u64| if up { x & !y == 0 } else { y & !x == 0 };
    let nbrs = |x: u64| -> Vec<usize> {
        (0..m)
            .map(|e| x ^ (1u64 << e))
            .filter(|&y| rel(x, y) && y != x)
            .filter_map(|y| index.get(&y).copied())
            .collect()
    };
    let adj1: Vec<Vec<usize>> = small.iter().map(|&x| nbrs(x)).collect();
    let m1 = match hall_match(big.len(), &adj1) {
        HallOutcome::Complete(v) => v,
        HallOutcome::Violation(v) => return Err(Error::Infeasible(format!("level {l}: Hall violation of size {}", v.len()))),
    };
    let (ds, db) = (adj1.first().map_or(0, |v| v.len()), if up { l as usize + 1 } else { (m - l) as usize });
    let r = ds.div_ceil(db.max(1)).max(1);
    let sindex: HashMap<u64, usize> = small.iter().enumerate().map(|(i, &x)| (x, i)).collect();
    let adj2: Vec<Vec<usize>> = big
        .iter()
        .map(|&y| {
            (0..m)
                .map(|e| y ^ (1u64 << e))
                .filter(|&x| rel(x, y) && x != y)
                .filter_map(|x| sindex.get(&x).copied())
                .flat_map(|i| (0..r).map(move |c| i * r + c))
                .collect()
        })
        .collect();
    let m2 = match hall_match(small.len() * r, &adj2) {
        HallOutcome::Complete(v) => v,
        HallOutcome::Violation(v) => return Err(Error::Infeasible(format!("level {l}: replicated Hall violation of size {}", v.len()))),
    };
    let mut add = |x: u64, y: u64| {
        if !adj[x as usize].contains(&y) {
            adj[x as usize].push(y);
            adj[y as usize].push(x);
        }
    };
    for (i, &j) in m1.iter().enumerate() {
        add(small[i], big[j]);
    }
    for (j, &slot) in m2.iter().enumerate() {
        add(big[j], small[slot / r]);
    }
    Ok(())
}

pub fn level_graph(m: u32, c: f64) -> Result<LevelGraph> {
    if !(c > 0.0 && c < 0.5) || m == 0 || m > 20 {
        return Err(Error::Parameter(format!("need 0 < c < 1/2 and 1 <= m <= 20, got m={m} c={c}")));
    }
    let mut g = LevelGraph { m, c, adj: vec![Vec::new(); 1usize << m] };
    let (lo, hi) = g.middle();
    if lo <= hi {
        for l in lo - 1..=hi.min(m - 1) {
            level_pair(m, l, &mut g.adj)?;
        }
    }
    g.adj.iter_mut().for_each(|v| v.sort_unstable());
    Ok(g)
}

/// `43|P| + 4 < 2^{k-|P|}`, the count condition for the boundary families.
pub fn minmax_condition(k: u32, p: &Poset) -> bool {
    let np = p.size() as u32;
    k >= np && (k - np) < 60 && (43 * np as u64 + 4) < 1u64 << (k - np)
}

/// Member `alpha` of the family through `(x, bottom)` using the lower slice `xl`.
fn minmax_member(b: &BoxLattice, n3: u32, p: &Poset, x: u64, xl: u64, alpha: u64) -> Result<Option<Vec<u64>>> {
    let np = p.size() as u32;
    if b.k + 1 < np {
        return Ok(None);
    }
    let free = b.k + 1 - np;
    if alpha >> free != 0 {
        return Ok(None);
    }
    let base: Vec<u32> = (1..=np).collect();
    let q = cube_special_copy(p, &base, 0, 1, Polarity::Min)?;
    let shift = b.bits();
    let _ = n3;
    let out = q
        .masks
        .iter()
        .enumerate()
        .map(|(idx, &qm)| {
            if idx == q.element {
                return x << shift;
            }
            let slice = if qm & 1 == 1 { x } else { xl };
            let mut y = 0;
            for i in 0..b.k {
                let on = if i + 1 < np { qm >> (i + 1) & 1 == 1 } else { alpha >> (i + 1 - np) & 1 == 1 };
                if on {
                    y = b.with_coord(y, i, b.coord_full());
                }
            }
            (slice << shift) | y
        })
        .collect();
    Ok(Some(out))
}

fn minmax_member_any(b: &BoxLattice, n3: u32, p: &Poset, x: u64, other: u64, alpha: u64, top: bool) -> Result<Option<Vec<u64>>> {
    if !top {
        return minmax_member(b, n3, p, x, other, alpha);
    }
    let cx = full(n3);
    let all = (cx << b.bits()) | b.max();
    Ok(minmax_member(b, n3, &p.dual(), x ^ cx, other ^ cx, alpha)?.map(|v| v.into_iter().map(|e| e ^ all).collect()))
}

/// Cover of `T(n3) x {bottom, top}` together with `(empty, top)` and
/// `([n3], bottom)`, using only problematic second coordinates.
/// Elements are encoded as `(x << k*n1) | y`.
pub fn minmax_cover(n3: u32, b: &BoxLattice, t: u32, p: &Poset) -> Result<Vec<Vec<u64>>> {
    if n3 == 0 || n3 > 20 {
        return Err(Error::Parameter(format!("need 1 <= n3 <= 20, got {n3}")));
    }
    let c = 0.1;
    let shift = b.bits();
    let top3 = full(n3);
    let (min_c, max_c) = (0u64, (top3 << shift) | b.max());
    let mut used: HashSet<u64> = HashSet::new();
    let mut out: Vec<Vec<u64>> = Vec::new();
    let mut boundary_used = HashSet::new();
    for q in boundary_greedy(n3, c, p, &mut boundary_used)? {
        for y in [0, b.max()] {
            let cp: Vec<u64> = q.iter().map(|&x| (x << shift) | y).collect();
            used.extend(cp.iter().copied());
            out.push(cp);
        }
    }
    let g = level_graph(n3, c)?;
    let mut targets: Vec<(u64, bool)> = Vec::new();
    for x in 1..top3 {
        targets.push((x, false));
        targets.push((x, true));
    }
    targets.push((0, true));
    targets.push((top3, false));
    for (x, top) in targets {
        let e = (x << shift) | if top { b.max() } else { 0 };
        if used.contains(&e) {
            continue;
        }
        let mut partners: Vec<u64> = if top { g.above(x).collect() } else { g.below(x).collect() };
        for i in 0..n3 {
            let o = x ^ (1u64 << i);
            if (top && o & !x != 0 || !top && x & !o != 0) && !partners.contains(&o) {
                partners.push(o);
            }
        }
        let mut got = None;
        'outer: for o in partners {
            for alpha in 0u64.. {
                match minmax_member_any(b, n3, p, x, o, alpha, top)? {
                    None => break,
                    Some(cand) => {
                        if cand.iter().all(|&v| v != min_c && v != max_c && (v == e || !used.contains(&v))) {
                            got = Some(cand);
                            break 'outer;
                        }
                    }
                }
            }
        }
        let cand = got.ok_or_else(|| {
            Error::GreedyExhausted(format!("no free copy through ({x:x}, {})", if top { "max" } else { "min" }))
        })?;
        used.extend(cand.iter().copied());
        out.push(cand);
    }
    if let Some(v) = out.iter().flatten().find(|&&v| b.classify(v & b.max(), t) != Class::Problematic) {
        return Err(Error::Verify(format!("boundary cover uses non-problematic {v:x}")));
    }
    Ok(out)
}

/// How the absorber collection in `2^[n1]` is chosen.
#[derive(Clone, Debug, PartialEq)]
pub enum Selection {
    /// Random sampling with conflict removal, members avoiding sizes 1 and `n1 - 1`.
    Sample { q: f64, max_retries: usize },
    /// Exhaustive packing of `size` absorbers keeping the `reserve` sets uncovered.
    Pack { size: usize, reserve: Vec<u64>, budget: u64 },
}

#[derive(Clone, Debug)]
pub struct AssemblyParams {
    pub n3: u32,
    pub k: u32,
    pub n1: u32,
    pub d: u32,
    /// Problematic threshold; `None` takes `min(2^n1, k/4)`.
    pub t: Option<u32>,
    pub selection: Selection,
    pub seed: u64,
    pub exact_budget: u64,
}

impl Default for AssemblyParams {
    fn default() -> Self {
        AssemblyParams {
            n3: 2,
            k: 3,
            n1: 6,
            d: 1,
            t: None,
            selection: Selection::Sample { q: 0.01, max_retries: 20_000 },
            seed: 1,
            exact_budget: 200_000,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct StageInfo {
    pub name: String,
    pub millis: u128,
    pub detail: String,
}

#[derive(Clone, Debug, Default)]
pub struct AssemblyReport {
    pub stages: Vec<StageInfo>,
    pub absorbers: usize,
    pub lifted_absorbers: usize,
    pub ordinary_matched: usize,
    pub residue_copies: usize,
    pub case1_repairs: usize,
    pub case2_removals: usize,
    pub uncovered: Vec<u64>,
}

impl std::fmt::Display for AssemblyReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for s in &self.stages {
            writeln!(f, "stage {:<12} {:>8} ms  {}", s.name, s.millis, s.detail)?;
        }
        writeln!(f, "absorbers {} lifted {} matched {}", self.absorbers, self.lifted_absorbers, self.ordinary_matched)?;
        writeln!(f, "residue copies {} repairs {} removals {}", self.residue_copies, self.case1_repairs, self.case2_removals)?;
        let u: Vec<String> = self.uncovered.iter().map(|x| format!("{x:x}")).collect();
        write!(f, "uncovered {} [{}]", self.uncovered.len(), u.join(" "))
    }
}

#[derive(Clone, Debug)]
pub struct Assembly {
    /// Bits of the whole lattice, `n3 + k * n1`.
    pub n: u32,
    pub copies: Vec<Vec<u64>>,
    pub report: AssemblyReport,
}

/// `{x(1)} x .. x A0 x .. x {x(k)}` with `A0` placed in coordinate `m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct Lifted {
    m: u32,
    base: u64,
    a0: usize,
}

struct Timer {
    start: Instant,
}

impl Timer {
    fn new() -> Timer {
        Timer { start: Instant::now() }
    }

    fn done(&mut self, report: &mut AssemblyReport, name: &str, detail: String) {
        report.stages.push(StageInfo { name: name.into(), millis: self.start.elapsed().as_millis(), detail });
        self.start = Instant::now();
    }
}

struct Bitmap(Vec<u64>);

impl Bitmap {
    fn new(bits: u32) -> Bitmap {
        Bitmap(vec![0; (1usize << bits).div_ceil(64)])
    }
    fn get(&self, i: u64) -> bool {
        self.0[(i >> 6) as usize] >> (i & 63) & 1 == 1
    }
    fn set(&mut self, i: u64) {
        self.0[(i >> 6) as usize] |= 1 << (i & 63);
    }
}

/// Packing of `2^[n3] x B(k)` minus its bottom and top leaving at most
/// `|P| - 1` elements uncovered.
pub fn assemble_truncated(p: &Poset, params: &AssemblyParams) -> Result<Assembly> {
    let np = p.size();
    let AssemblyParams { n3, k, n1, d, .. } = *params;
    let b = BoxLattice::new(k, n1)?;
    let t = params.t.unwrap_or_else(|| default_threshold(k, n1));
    let shift = b.bits();
    let n = n3 + shift;
    if n > 28 || n3 == 0 {
        return Err(Error::Parameter(format!("need 1 <= n3 and n3 + k*n1 <= 28, got {n}")));
    }
    let slices = 1u64 << n3;
    let enc = |x: u64, y: u64| (x << shift) | y;
    let mut report = AssemblyReport::default();
    let mut clock = Timer::new();

    let coll = match &params.selection {
        Selection::Sample { q, max_retries } => select_absorbers(n1, d, *q, *max_retries, params.seed, p),
        Selection::Pack { size, reserve, budget } => {
            pack_absorbers(n1, d, *size, &|m| reserve.contains(&m), t as usize + 1, params.seed, *budget, p)
        }
    }
    .map_err(|e| e.at("absorbers"))?;
    let covered1 = coll.covered();
    report.absorbers = coll.absorbers.len();
    clock.done(&mut report, "absorbers", format!("{} absorbers after {} attempts", coll.absorbers.len(), coll.attempts));

    let p1 = minmax_cover(n3, &b, t, p).map_err(|e| e.at("minmax"))?;
    let mut cov = Bitmap::new(n);
    for c in &p1 {
        c.iter().for_each(|&e| cov.set(e));
    }
    clock.done(&mut report, "minmax", format!("{} copies", p1.len()));

    let prob = problematic_elements(&b, t);
    let p2_base = cover_problematic_targets(&b, t, p, &prob, &|v| covered1.contains(&v)).map_err(|e| e.at("problematic"))?;
    let mut p2: Vec<Vec<u64>> = Vec::new();
    for x in 0..slices {
        for c in &p2_base {
            let target = c.iter().copied().find(|&y| b.classify(y, t) == Class::Problematic).expect("one problematic member");
            if !cov.get(enc(x, target)) {
                p2.push(c.iter().map(|&y| enc(x, y)).collect());
            }
        }
    }
    for c in &p2 {
        for &e in c {
            if cov.get(e) {
                return Err(Error::Verify(format!("problematic cover overlaps at {e:x}")).at("problematic"));
            }
            cov.set(e);
        }
    }
    clock.done(&mut report, "problematic", format!("{} copies per slice", p2_base.len()));

    // lifted absorbers without problematic members
    let a_star_owner = {
        let uncovered: Vec<u64> = (0..=b.coord_full()).filter(|v| !covered1.contains(v)).collect();
        let mut lifted: Vec<Lifted> = Vec::new();
        for m in 0..k {
            let radices: Vec<usize> = (0..k).map(|i| if i < m { uncovered.len() } else { 1usize << n1 }).collect();
            let total: usize = radices.iter().enumerate().filter(|&(i, _)| i as u32 != m).map(|(_, r)| *r).product();
            for idx in 0..total {
                let mut rem = idx;
                let mut base = 0u64;
                for i in 0..k {
                    if i == m {
                        continue;
                    }
                    let r = radices[i as usize];
                    let digit = rem % r;
                    rem /= r;
                    let v = if i < m { uncovered[digit] } else { digit as u64 };
                    base = b.with_coord(base, i, v);
                }
                if b.non_extreme(base).len() as u32 + 1 > t {
                    for a0 in 0..coll.absorbers.len() {
                        lifted.push(Lifted { m, base, a0 });
                    }
                }
            }
        }
        lifted
    };
    let lifted = a_star_owner;
    let local: Vec<Vec<u64>> = coll.absorbers.iter().map(|a| a.elements()).collect();
    let lift_elems = |l: &Lifted| -> Vec<u64> { local[l.a0].iter().map(|&a| b.with_coord(l.base, l.m, a)).collect() };
    let mut owner: Vec<u32> = vec![u32::MAX; 1usize << shift];
    for (i, l) in lifted.iter().enumerate() {
        for y in lift_elems(l) {
            if owner[y as usize] != u32::MAX {
                return Err(Error::Verify(format!("lifted absorbers overlap at {}", b.format(y))).at("lift"));
            }
            owner[y as usize] = i as u32;
        }
    }
    report.lifted_absorbers = lifted.len();
    clock.done(&mut report, "lift", format!("{} lifted absorbers", lifted.len()));

    // Hall matching of ordinary points outside the absorbers
    let comp: Vec<Vec<bool>> = local.iter().map(|e| (0..=b.coord_full()).map(|v| completes(e, v, p)).collect()).collect();
    let key_index: HashMap<Lifted, usize> = lifted.iter().enumerate().map(|(i, l)| (*l, i)).collect();
    let ordinary: Vec<u64> = (0..=b.max()).filter(|&y| owner[y as usize] == u32::MAX && b.classify(y, t) != Class::Problematic).collect();
    let adj: Vec<Vec<usize>> = ordinary
        .iter()
        .map(|&y| {
            let mut v = Vec::new();
            for m in b.non_extreme(y) {
                let base = b.with_coord(y, m, 0);
                for a0 in 0..local.len() {
                    if comp[a0][b.coord(y, m) as usize] {
                        if let Some(&i) = key_index.get(&Lifted { m, base, a0 }) {
                            v.push(i);
                        }
                    }
                }
            }
            v
        })
        .collect();
    let tau = match hall_match(lifted.len(), &adj) {
        HallOutcome::Complete(v) => v,
        HallOutcome::Violation(v) => {
            return Err(Error::Infeasible(format!("Hall violation: {} ordinary points, first {}", v.len(), b.format(ordinary[v[0]]))).at("matching"));
        }
    };
    report.ordinary_matched = ordinary.len();
    clock.done(&mut report, "matching", format!("{} ordinary points matched", ordinary.len()));

    // one copy through each matched point, reused in every slice
    let through: Vec<Vec<Vec<u64>>> = ordinary.iter().zip(&tau).map(|(&y, &a)| copies_through(&lift_elems(&lifted[a]), y, p)).collect();
    let mut p3: Vec<Vec<Option<Vec<u64>>>> = vec![vec![None; ordinary.len()]; slices as usize];
    for x in 0..slices {
        for (i, &y) in ordinary.iter().enumerate() {
            if cov.get(enc(x, y)) {
                continue;
            }
            let c = through[i].first().ok_or_else(|| Error::Infeasible(format!("no copy through {}", b.format(y))).at("ordinary"))?;
            p3[x as usize][i] = Some(c.clone());
        }
    }
    let ord_index: HashMap<u64, usize> = ordinary.iter().enumerate().map(|(i, &y)| (y, i)).collect();
    let mut matched_to: Vec<Option<usize>> = vec![None; lifted.len()];
    for (i, &a) in tau.iter().enumerate() {
        matched_to[a] = Some(i);
    }
    clock.done(&mut report, "ordinary", String::new());

    // divisibility correction
    let a_zero = 0usize;
    let mut covered_in = vec![0u64; lifted.len()];
    for row in &p3 {
        for c in row.iter().flatten() {
            for &y in c {
                let o = owner[y as usize];
                if o != u32::MAX {
                    covered_in[o as usize] += 1;
                }
            }
        }
    }
    let mut f = ResidueFunction::zero(np as u32);
    for (i, l) in lifted.iter().enumerate().skip(1) {
        let size = local[l.a0].len() as u64;
        let m_a = ((slices * size - covered_in[i]) % np as u64) as u32;
        if m_a != 0 {
            let y = lift_elems(l)[0];
            f.add(y, m_a);
        }
    }
    let y0 = lift_elems(&lifted[a_zero])[0];
    f.add(y0, np as u32 - f.total());
    let qms = strongly_realize(&f, &b, t, p).map_err(|e| e.at("residues"))?;
    let qs = qms.expanded();
    report.residue_copies = qs.len();
    if qs.len() as u64 > slices {
        return Err(Error::Capacity { stage: "residues".into(), have: slices as usize, need: qs.len() }.at("residues"));
    }
    let mut qcopies: Vec<Vec<u64>> = Vec::new();
    let mut case2: HashMap<usize, usize> = HashMap::new();
    for (xi, q) in qs.iter().enumerate() {
        let x = xi as u64;
        let qset: HashSet<u64> = q.iter().copied().collect();
        let mut hit: Vec<usize> = Vec::new();
        for &y in q {
            if let Some(&i) = ord_index.get(&y) {
                hit.push(i);
            }
            let o = owner[y as usize];
            if o != u32::MAX {
                if let Some(i) = matched_to[o as usize] {
                    hit.push(i);
                }
            }
        }
        hit.sort_unstable();
        hit.dedup();
        for i in hit {
            let Some(c) = p3[x as usize][i].clone() else { continue };
            if !c.iter().any(|v| qset.contains(v)) {
                continue;
            }
            let y = ordinary[i];
            if qset.contains(&y) {
                p3[x as usize][i] = None;
                *case2.entry(i).or_default() += 1;
                report.case2_removals += 1;
            } else {
                let alt = through[i].iter().find(|c| !c.iter().any(|v| qset.contains(v))).ok_or_else(|| {
                    Error::Infeasible(format!("no copy through {} avoids the residue copy", b.format(y))).at("repair")
                })?;
                p3[x as usize][i] = Some(alt.clone());
                report.case1_repairs += 1;
            }
        }
        qcopies.push(q.iter().map(|&y| enc(x, y)).collect());
    }
    if let Some((i, s)) = case2.iter().find(|(_, &s)| s % np != 0) {
        return Err(Error::Verify(format!("{s} removals at {} is not a multiple of |P|", b.format(ordinary[*i]))).at("repair"));
    }
    let mut p3_flat: Vec<Vec<u64>> = Vec::new();
    for (x, row) in p3.iter().enumerate() {
        for c in row.iter().flatten() {
            p3_flat.push(c.iter().map(|&y| enc(x as u64, y)).collect());
        }
    }
    for c in p3_flat.iter().chain(&qcopies) {
        for &e in c {
            if cov.get(e) {
                return Err(Error::Verify(format!("copies overlap at {e:x}")).at("repair"));
            }
            cov.set(e);
        }
    }
    clock.done(&mut report, "residues", format!("{} residue copies", qs.len()));

    // the three invariants before the final absorption
    let top_c = (full(n3) << shift) | b.max();
    for e in 1..top_c {
        let y = e & b.max();
        if owner[y as usize] == u32::MAX && !cov.get(e) {
            return Err(Error::Verify(format!("{e:x} outside the absorbers is uncovered")).at("invariants"));
        }
    }
    let mut r_maps: Vec<Vec<Vec<u64>>> = vec![vec![Vec::new(); slices as usize]; lifted.len()];
    for x in 0..slices {
        for (i, l) in lifted.iter().enumerate() {
            for &a in &local[l.a0] {
                if cov.get(enc(x, b.with_coord(l.base, l.m, a))) {
                    r_maps[i][x as usize].push(a);
                }
            }
        }
    }
    for (i, r) in r_maps.iter().enumerate() {
        if let Some(x) = r.iter().position(|v| v.len() > 2 * np) {
            return Err(Error::Verify(format!("{} covered in slice {x} of absorber {i}", r[x].len())).at("invariants"));
        }
        let left: usize = r.iter().map(|v| local[lifted[i].a0].len() - v.len()).sum();
        if i != a_zero && !left.is_multiple_of(np) {
            return Err(Error::Verify(format!("absorber {i} leaves {left} elements, not a multiple of |P|")).at("invariants"));
        }
    }
    clock.done(&mut report, "invariants", String::new());

    let opts = AbsorbOptions { exact_budget: params.exact_budget };
    let mut cache: HashMap<(usize, Vec<Vec<u64>>), Vec<Vec<u64>>> = HashMap::new();
    let mut p4: Vec<Vec<u64>> = Vec::new();
    for (i, l) in lifted.iter().enumerate() {
        let key = (l.a0, r_maps[i].clone());
        let copies = match cache.get(&key) {
            Some(c) => c.clone(),
            None => {
                let res = product_absorb(n3, &coll.absorbers[l.a0], &r_maps[i], p, &opts).map_err(|e| e.at("absorb"))?;
                if i != a_zero && !res.uncovered.is_empty() {
                    return Err(Error::Verify(format!("absorber {i} left {} uncovered", res.uncovered.len())).at("absorb"));
                }
                cache.insert(key, res.copies.clone());
                res.copies
            }
        };
        let lmask = full(n1);
        for c in copies {
            p4.push(c.iter().map(|&v| enc(v >> n1, b.with_coord(l.base, l.m, v & lmask))).collect());
        }
    }
    clock.done(&mut report, "absorb", format!("{} copies, {} distinct absorption problems", p4.len(), cache.len()));

    let mut copies = p1;
    copies.extend(p2);
    copies.extend(p3_flat);
    copies.extend(qcopies);
    copies.extend(p4);
    let rep = verify_masks(n, true, p, &copies, Mode::Almost(np as u64 - 1));
    if !rep.pass {
        return Err(Error::Verify(rep.to_string()).at("verify"));
    }
    let total = (1u64 << n) - 2;
    if rep.uncovered_count % np as u64 != total % np as u64 {
        return Err(Error::Verify("uncovered count has the wrong residue".into()).at("verify"));
    }
    report.uncovered = rep.uncovered.iter().filter_map(|e| e.mask()).collect();
    clock.done(&mut report, "verify", rep.to_string());
    Ok(Assembly { n, copies, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ground::set;

    #[test]
    fn completes_examples() {
        let p = Poset::chain(2);
        let f = [set(&[2, 3]), set(&[1, 2, 3])];
        assert!(completes(&f, set(&[2]), &p));
        assert!(!completes(&f, set(&[1, 3]), &p));
        assert!(!completes(&[], set(&[1]), &p));
    }

    #[test]
    fn hall_examples() {
        assert_eq!(hall_match(1, &[vec![0], vec![0]]), HallOutcome::Violation(vec![0, 1]));
        assert_eq!(hall_match(3, &[]), HallOutcome::Complete(vec![]));
        assert_eq!(hall_match(2, &[vec![0, 1], vec![0]]), HallOutcome::Complete(vec![1, 0]));
    }

    #[test]
    fn classify_examples() {
        let b = BoxLattice::new(3, 4).unwrap();
        assert_eq!(classify(&b, 0, 1), Class::Problematic);
        assert_eq!(classify(&b, b.from_coords(&[1, 2, 4]), 1), Class::Restricted);
        assert_eq!(classify(&b, b.from_coords(&[3, 0, 0]), 0), Class::Ordinary);
    }

    #[test]
    fn level_graph_small() {
        let g = level_graph(2, 0.4).unwrap();
        assert!(g.above(1).any(|y| y == 3));
        for m in 1..=8 {
            let g = level_graph(m, 0.1).unwrap();
            assert!(g.max_degree() <= 20);
            let (lo, hi) = g.middle();
            for x in 0..=full(m) {
                let s = x.count_ones();
                if s >= lo && s <= hi {
                    assert!(g.below(x).next().is_some() && g.above(x).next().is_some(), "m={m} x={x:x}");
                }
            }
        }
    }

    #[test]
    fn problematic_cover_small() {
        let p = Poset::chain(2);
        let b = BoxLattice::new(8, 2).unwrap();
        let cs = cover_problematic(8, 2, 1, &p).unwrap();
        let targets = problematic_elements(&b, 1);
        assert_eq!(cs.len(), targets.len());
        for c in &cs {
            let classes: Vec<Class> = c.iter().map(|&y| b.classify(y, 1)).collect();
            assert_eq!(classes.iter().filter(|&&k| k == Class::Problematic).count(), 1);
            assert_eq!(classes.iter().filter(|&&k| k == Class::Restricted).count(), 1);
        }
        let rep = verify_masks(16, false, &p, &cs, Mode::Packing);
        assert!(rep.pass, "{rep}");
    }

    #[test]
    fn smallsets_example() {
        let p = Poset::chain(2);
        assert!(entropy_condition(200, 0.1, &p));
        let cs = smallsets_cover(11, 0.1, &p).unwrap();
        let covered: HashSet<u64> = cs.iter().flatten().copied().collect();
        for x in 1..full(11) {
            let s = x.count_ones();
            if s <= 1 || s >= 10 {
                assert!(covered.contains(&x), "{x:x}");
            }
        }
        assert!(verify_masks(11, true, &p, &cs, Mode::Packing).pass);
    }

    #[test]
    fn minmax_example() {
        let p = Poset::chain(2);
        let b = BoxLattice::new(8, 2).unwrap();
        let cs = minmax_cover(11, &b, 1, &p).unwrap();
        let covered: HashSet<u64> = cs.iter().flatten().copied().collect();
        for x in 0..=full(11) {
            for y in [0, b.max()] {
                let e = (x << 16) | y;
                if e != 0 && e != (full(11) << 16 | b.max()) {
                    assert!(covered.contains(&e), "{x:x} {y:x}");
                }
            }
        }
        assert!(verify_masks(27, true, &p, &cs, Mode::Packing).pass);
    }
}
