//! Dense grid packings, stacked-grid partitions, and the chain/grid/stack pipeline for 2^[n].

use std::collections::{HashMap, HashSet};

use crate::chains::{comparable_matching_budget, equal_chain_partition_budget, DEFAULT_CHAIN_BUDGET};
use crate::error::{Error, Outcome, Result};
use crate::ground::{Element, GroundPoset};
use crate::oracle::{verify_packing, Mode};
use crate::packing::{CopySet, Packing};
use crate::poset::{find_realizer, Poset, Realizer};

/// Largest base set the pipeline will materialize.
pub const PIPELINE_CAP: u32 = 24;

fn grid_point(e: &Element) -> &[u32] {
    match e {
        Element::Grid(c) => c,
        _ => panic!("expected a grid element"),
    }
}

/// Translates of the realizer embedding of `P`; copies listed in
/// lexicographic order of their offset vector.
pub fn dense_grid_packing(p: &Poset, realizer: &Realizer, dims: &[u32]) -> Result<Packing> {
    let copies = dense_translates(p, realizer, dims)?;
    Ok(Packing::with_copies(GroundPoset::Grid(dims.to_vec()), copies))
}

fn dense_translates(p: &Poset, realizer: &Realizer, dims: &[u32]) -> Result<Vec<CopySet>> {
    if !realizer.realizes(p) {
        return Err(Error::RealizerMismatch);
    }
    if dims.is_empty() || realizer.d() > dims.len() {
        return Err(Error::Parameter(format!("{} dimensions for a realizer of size {}", dims.len(), realizer.d())));
    }
    let r = realizer.padded(dims.len());
    let n = p.size() as u32;
    let ranks: Vec<Vec<usize>> = (0..dims.len()).map(|i| r.ranks(i)).collect();
    let mut counts = vec![dims[0] / n];
    counts.extend(dims[1..].iter().map(|&h| h.saturating_sub(n)));
    let mut copies = Vec::new();
    if counts.contains(&0) {
        return Ok(copies);
    }
    let mut a = vec![0u32; dims.len()];
    loop {
        let image = (0..p.size())
            .map(|q| {
                let mut c = Vec::with_capacity(dims.len());
                c.push(ranks[0][q] as u32 - 1 + a[0] * n);
                for i in 1..dims.len() {
                    c.push(ranks[i][q] as u32 + a[i]);
                }
                Element::Grid(c)
            })
            .collect();
        copies.push(CopySet::new(image));
        let mut i = dims.len();
        loop {
            if i == 0 {
                return Ok(copies);
            }
            i -= 1;
            a[i] += 1;
            if a[i] < counts[i] {
                break;
            }
            a[i] = 0;
        }
    }
}

/// Number of copies the dense packing produces.
pub fn dense_count(n: u32, dims: &[u32]) -> u64 {
    let mut c = (dims[0] / n) as u64;
    for &h in &dims[1..] {
        c *= h.saturating_sub(n) as u64;
    }
    c
}

/// Minimum and maximum points of every copy, for `P` with unique extremes.
pub fn copy_extremes(p: &Poset, copies: &[CopySet]) -> Result<(Vec<Element>, Vec<Element>)> {
    let (lo, hi) = match (p.minimal().as_slice(), p.maximal().as_slice()) {
        ([lo], [hi]) => (*lo, *hi),
        _ => return Err(Error::MinMax),
    };
    Ok((copies.iter().map(|c| c.image[lo].clone()).collect(), copies.iter().map(|c| c.image[hi].clone()).collect()))
}

/// True iff `points` is exactly a product of per-coordinate value sets with the given sizes.
pub fn is_grid(points: &[Element], sizes: &[usize]) -> bool {
    let pts: HashSet<&[u32]> = points.iter().map(grid_point).collect();
    if pts.len() != points.len() || points.is_empty() {
        return sizes.iter().product::<usize>() == 0 && points.is_empty();
    }
    let d = sizes.len();
    let axes: Vec<Vec<u32>> = (0..d)
        .map(|i| {
            let mut v: Vec<u32> = pts.iter().map(|c| c[i]).collect();
            v.sort_unstable();
            v.dedup();
            v
        })
        .collect();
    axes.iter().map(|a| a.len()).collect::<Vec<_>>() == sizes && pts.len() == sizes.iter().product::<usize>()
}

fn check_pair_preconditions(p: &Poset, h: u32) -> Result<()> {
    if h == 0 || !(h as usize).is_multiple_of(p.size()) {
        return Err(Error::Divisibility { p: p.size(), h: h as usize });
    }
    if !p.has_unique_min_max() {
        return Err(Error::MinMax);
    }
    Ok(())
}

/// `P`-partition of the stacked grid `stack(h, d)` with `d` the realizer size.
pub fn stacked_pair_partition(p: &Poset, realizer: &Realizer, h: u32) -> Result<Packing> {
    check_pair_preconditions(p, h)?;
    if !realizer.realizes(p) {
        return Err(Error::RealizerMismatch);
    }
    let d = realizer.d();
    let n = p.size() as u32;
    let (lo, hi) = (p.minimal()[0], p.maximal()[0]);
    let dims = vec![h; d];
    let dense = dense_translates(p, realizer, &dims)?;
    let ground = GroundPoset::Stack { h, d: d as u32 };
    let covered: HashSet<Vec<u32>> = dense.iter().flat_map(|c| c.image.iter().map(|e| grid_point(e).to_vec())).collect();
    // the same uncovered set in both layers
    let mut holes: Vec<Vec<u32>> =
        GroundPoset::Grid(dims.clone()).elements().map(|e| grid_point(&e).to_vec()).filter(|c| !covered.contains(c)).collect();
    holes.sort();
    let need = holes.len();
    let mut m_dims = vec![h / n];
    m_dims.extend(std::iter::repeat_n(h - n.min(h), d - 1));
    // monotone maps from the extreme grids into [h]^d
    let to_max = |c: &[u32]| -> Vec<u32> {
        c.iter().enumerate().map(|(i, &v)| if i == 0 { (v + 1) * n - 1 } else { v + n }).collect()
    };
    let to_min = |c: &[u32]| -> Vec<u32> { c.iter().enumerate().map(|(i, &v)| if i == 0 { v * n } else { v + 1 }).collect() };
    let secondary = if m_dims.iter().all(|&x| x > 0) { dense_translates(p, realizer, &m_dims)? } else { Vec::new() };
    let cap = secondary.len() * p.size();
    if cap < need {
        return Err(Error::Capacity { stage: "relocation".into(), have: cap, need });
    }
    let chosen = &secondary[..need / p.size()];
    let mut out = Vec::new();
    for layer in 0..2u8 {
        let map = |c: &[u32]| if layer == 0 { to_max(c) } else { to_min(c) };
        let mut moved: Vec<Vec<u32>> = chosen.iter().flat_map(|s| s.image.iter().map(|e| map(grid_point(e)))).collect();
        moved.sort();
        let phi: HashMap<Vec<u32>, Vec<u32>> = moved.iter().cloned().zip(holes.iter().cloned()).collect();
        let extreme = if layer == 0 { hi } else { lo };
        for s in &dense {
            let image = s
                .image
                .iter()
                .enumerate()
                .map(|(q, e)| {
                    let c = grid_point(e).to_vec();
                    match phi.get(&c) {
                        Some(t) if q == extreme => Element::Stack(1 - layer, t.clone()),
                        _ => Element::Stack(layer, c),
                    }
                })
                .collect();
            out.push(CopySet::new(image));
        }
        for s in chosen {
            out.push(CopySet::new(s.image.iter().map(|e| Element::Stack(layer, map(grid_point(e)))).collect()));
        }
    }
    let packing = Packing::with_copies(ground.clone(), out);
    let rep = verify_packing(&ground, p, &packing, Mode::Partition);
    if !rep.pass {
        return Err(Error::Verify(rep.to_string()));
    }
    Ok(packing)
}

/// Copies of stack(h, d) tiling [2h]^m; `image[i]` is the grid point playing
/// stack element number `i`.
pub fn grid_stack_partition(h: u32, d: u32, m: u32) -> Result<Outcome<Vec<CopySet>>> {
    grid_stack_partition_budget(h, d, m, DEFAULT_CHAIN_BUDGET)
}

pub fn grid_stack_partition_budget(h: u32, d: u32, m: u32, budget: u64) -> Result<Outcome<Vec<CopySet>>> {
    if d == 0 || m < d || h == 0 || m > 62 {
        return Err(Error::Parameter(format!("need m >= d >= 1 and h >= 1, got h={h} d={d} m={m}")));
    }
    let matching = match comparable_matching_budget(m, d, budget)? {
        Outcome::Found(mm) => mm,
        Outcome::Infeasible(why) => return Ok(Outcome::Infeasible(why)),
    };
    let stack = GroundPoset::Stack { h, d };
    let mut out = Vec::new();
    for &(x, y) in &matching.pairs {
        let diff: Vec<u32> = (0..m).filter(|i| (x ^ y) >> i & 1 == 1).collect();
        let sel = &diff[..d as usize];
        let others: Vec<u32> = (0..m).filter(|i| !sel.contains(i)).collect();
        let zgrid = GroundPoset::Grid(vec![h; others.len()]);
        let zs: Vec<Vec<u32>> = if others.is_empty() {
            vec![Vec::new()]
        } else {
            zgrid.elements().map(|e| grid_point(&e).to_vec()).collect()
        };
        for z in zs {
            let image = stack
                .elements()
                .map(|e| {
                    let Element::Stack(layer, a) = e else { unreachable!() };
                    let base = if layer == 0 { x } else { y };
                    let mut c = vec![0u32; m as usize];
                    for (k, &j) in others.iter().enumerate() {
                        c[j as usize] = z[k] + (base >> j & 1) as u32 * h;
                    }
                    for (k, &j) in sel.iter().enumerate() {
                        c[j as usize] = a[k] + layer as u32 * h;
                    }
                    Element::Grid(c)
                })
                .collect();
            out.push(CopySet::new(image));
        }
    }
    Ok(Outcome::Found(out))
}

/// Witness check: `copy` is an order-isomorphic image of `stack(h, d)` in `g`.
pub fn is_stack_copy(copy: &CopySet, h: u32, d: u32, g: &GroundPoset) -> bool {
    let stack = GroundPoset::Stack { h, d };
    let elems: Vec<Element> = stack.elements().collect();
    if copy.image.len() != elems.len() || copy.image.iter().collect::<HashSet<_>>().len() != elems.len() {
        return false;
    }
    (0..elems.len()).all(|i| {
        (0..elems.len()).all(|j| stack.leq(&elems[i], &elems[j]) == g.leq(&copy.image[i], &copy.image[j]))
    })
}

/// Parameters for the 2^[sm] pipeline.
#[derive(Clone, Debug)]
pub struct Theorem1Params {
    pub h: u32,
    pub s: u32,
    pub m: u32,
    pub budget: u64,
}

/// `P`-partition of 2^[sm] through equal chains, stacked grids, and pair partitions.
pub fn theorem1_partition(p: &Poset, params: &Theorem1Params, realizer: Option<&Realizer>) -> Result<Packing> {
    let Theorem1Params { h, s, m, budget } = *params;
    if !p.size().is_power_of_two() {
        return Err(Error::Parameter(format!("|P| = {} is not a power of 2", p.size())).at("setup"));
    }
    if !h.is_power_of_two() {
        return Err(Error::Parameter(format!("h = {h} is not a power of 2")).at("setup"));
    }
    check_pair_preconditions(p, h).map_err(|e| e.at("setup"))?;
    if s == 0 || m == 0 || s * m > PIPELINE_CAP {
        return Err(Error::Parameter(format!("need 1 <= s*m <= {PIPELINE_CAP}")).at("setup"));
    }
    let realizer = match realizer {
        Some(r) if r.realizes(p) => r.clone(),
        Some(_) => return Err(Error::RealizerMismatch.at("realizer")),
        None => find_realizer(p, p.size().max(1))
            .map_err(|e| e.at("realizer"))?
            .ok_or_else(|| Error::Infeasible("no realizer".into()).at("realizer"))?,
    };
    let d = realizer.d() as u32;
    if (2 * h) as u64 > 1u64 << s {
        return Err(Error::Infeasible(format!("chains of size {} do not fit in 2^[{s}]", 2 * h)).at("chains"));
    }
    let chains = match equal_chain_partition_budget(s, 2 * h as usize, budget).map_err(|e| e.at("chains"))? {
        Outcome::Found(c) => c.chains,
        Outcome::Infeasible(why) => return Err(Error::Infeasible(why).at("chains")),
    };
    if m < d {
        return Err(Error::Parameter(format!("m = {m} is below the dimension {d}")).at("grid"));
    }
    let slabs = match grid_stack_partition_budget(h, d, m, budget).map_err(|e| e.at("grid"))? {
        Outcome::Found(v) => v,
        Outcome::Infeasible(why) => return Err(Error::Infeasible(why).at("grid")),
    };
    let pair = stacked_pair_partition(p, &realizer, h).map_err(|e| e.at("pair"))?;
    let stack = GroundPoset::Stack { h, d };
    let pair_idx: Vec<Vec<usize>> = pair
        .copies
        .iter()
        .map(|c| c.image.iter().map(|e| stack.index_of(e).expect("stack element") as usize).collect())
        .collect();
    let ground = GroundPoset::Boolean(s * m);
    let mut copies = Vec::new();
    let nc = chains.len();
    let mut tuple = vec![0usize; m as usize];
    loop {
        for slab in &slabs {
            let masks: Vec<u64> = slab
                .image
                .iter()
                .map(|e| grid_point(e).iter().enumerate().fold(0u64, |acc, (i, &a)| acc | chains[tuple[i]][a as usize] << (s as usize * i)))
                .collect();
            for idx in &pair_idx {
                copies.push(CopySet::new(idx.iter().map(|&k| Element::Set(masks[k])).collect()));
            }
        }
        let mut i = m as usize;
        loop {
            if i == 0 {
                let packing = Packing::with_copies(ground.clone(), copies);
                let rep = verify_packing(&ground, p, &packing, Mode::Partition);
                if !rep.pass {
                    return Err(Error::Verify(rep.to_string()).at("verify"));
                }
                return Ok(packing);
            }
            i -= 1;
            tuple[i] += 1;
            if tuple[i] < nc {
                break;
            }
            tuple[i] = 0;
        }
    }
}
