use std::collections::{HashMap, HashSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use posetpack::absorber::{absorb, build_absorber, product_absorb, AbsorbOptions, Absorber, Method};
use posetpack::assembly::{assemble_truncated, level_graph, smallsets_cover};
use posetpack::chains::{equal_chain_partition, gray_code};
use posetpack::cli::{assembly_params, Cli};
use posetpack::embed::Region;
use posetpack::grid::{copy_extremes, dense_count, dense_grid_packing, grid_stack_partition, is_grid, stacked_pair_partition};
use posetpack::io;
use posetpack::oracle::{exact_cover_in, exact_partition_oracle, verify_masks, verify_packing, verify_region, Mode};
use posetpack::poset::named;
use posetpack::product::{default_threshold, BoxLattice};
use posetpack::residues::{realize_pair, residue_of, strongly_realize, ResidueFunction};
use posetpack::{find_realizer, CopySet, Element, GroundPoset, Outcome, Poset};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = std::result::Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn data(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn random_poset(rng: &mut ChaCha8Rng, n: usize) -> Poset {
    let density = rng.gen_range(0.1..0.7);
    let rel: Vec<(usize, usize)> =
        (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|_| rng.gen_bool(density)).collect();
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let rel: Vec<_> = rel.iter().map(|&(a, b)| (perm[a], perm[b])).collect();
    Poset::new(n, &rel).expect("acyclic by construction")
}

fn c1_figure() -> Check {
    let t = Instant::now();
    let p = named::five_element();
    let r = find_realizer(&p, 2).map_err(|e| e.to_string())?.ok_or("no 2-realizer")?;
    let pk = dense_grid_packing(&p, &r, &[13, 13]).map_err(|e| e.to_string())?;
    let rep = verify_packing(&pk.ground, &p, &pk, Mode::Packing);
    ensure(rep.pass, || rep.to_string())?;
    ensure(pk.len() == 16 && rep.covered == 80, || format!("copies={} covered={}", pk.len(), rep.covered))?;
    ensure(rep.covered >= 64, || "below (13-5)^2".into())?;
    let (lo, hi) = copy_extremes(&p, &pk.copies).map_err(|e| e.to_string())?;
    ensure(is_grid(&lo, &[2, 8]) && is_grid(&hi, &[2, 8]), || "extremes are not 2x8 grids".into())?;
    let el = t.elapsed();
    ensure(el < Duration::from_secs(1), || format!("took {el:?}"))?;
    Ok(format!("16 copies, 80 covered, extremes 2x8 grids, {el:?}"))
}

fn c2_claim1_sweep() -> Check {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut tried, mut swept) = (0, 0);
    while swept < 200 {
        tried += 1;
        let n = rng.gen_range(1..=5);
        let p = random_poset(&mut rng, n);
        let Some(r) = find_realizer(&p, 3).map_err(|e| e.to_string())? else { continue };
        let dims: Vec<u32> = (0..r.d()).map(|_| rng.gen_range(1..=9)).collect();
        let pk = dense_grid_packing(&p, &r, &dims).map_err(|e| e.to_string())?;
        let rep = verify_packing(&pk.ground, &p, &pk, Mode::Packing);
        ensure(rep.pass, || format!("{p:?} on {dims:?}: {rep}"))?;
        ensure(pk.len() as u64 == dense_count(n as u32, &dims), || format!("{p:?} on {dims:?}: count"))?;
        if dims.iter().all(|&h| h as usize >= n) {
            let bound: u64 = dims.iter().map(|&h| (h as usize - n) as u64).product();
            ensure(rep.covered >= bound, || format!("{p:?} on {dims:?}: covered {} < {bound}", rep.covered))?;
        }
        swept += 1;
    }
    let el = t.elapsed();
    ensure(el < Duration::from_secs(60), || format!("took {el:?}"))?;
    Ok(format!("{swept} posets ({tried} drawn) verified, {el:?}"))
}

fn c3_pair() -> Check {
    let p = Poset::chain(2);
    let r = find_realizer(&p, 1).map_err(|e| e.to_string())?.ok_or("no realizer")?;
    for h in [2, 4, 8] {
        let pk = stacked_pair_partition(&p, &r, h).map_err(|e| format!("h={h}: {e}"))?;
        let rep = verify_packing(&pk.ground, &p, &pk, Mode::Partition);
        ensure(rep.pass && rep.uncovered_count == 0, || format!("h={h}: {rep}"))?;
    }
    Ok("h=2,4,8 full partitions".into())
}

fn c4_chains() -> Check {
    for n in [3, 4] {
        let out = equal_chain_partition(n, 4).map_err(|e| e.to_string())?;
        ensure(!out.is_found(), || format!("n={n}: chains claimed"))?;
        let o = exact_partition_oracle(&GroundPoset::Boolean(n), &Poset::chain(4), 10_000_000).map_err(|e| e.to_string())?;
        ensure(!o.is_found(), || format!("n={n}: oracle found a partition"))?;
    }
    for n in 1..=12 {
        let c = equal_chain_partition(n, 2).map_err(|e| e.to_string())?.found().ok_or(format!("n={n}: no 2-chains"))?;
        ensure(c.is_valid() && c.sizes().iter().all(|&s| s == 2), || format!("n={n}: invalid"))?;
    }
    Ok("(3,4),(4,4) infeasible in both; h=2 valid for n<=12".into())
}

fn c5_gray() -> Check {
    for s in 1..=16 {
        let g = gray_code(s);
        let mut seen = vec![false; 1 << s];
        for &x in &g {
            ensure(x >> s == 0 && !std::mem::replace(&mut seen[x as usize], true), || format!("s={s}: repeat {x:x}"))?;
        }
        ensure(g.len() == 1 << s, || format!("s={s}: length {}", g.len()))?;
        ensure(g.windows(2).all(|w| (w[0] ^ w[1]).count_ones() == 1), || format!("s={s}: step"))?;
    }
    Ok("s=1..16 bijective, unit steps".into())
}

fn random_absorber(rng: &mut ChaCha8Rng, n: u32, d: u32) -> Absorber {
    let mut base: Vec<u32> = (1..=n).collect();
    base.shuffle(rng);
    let alpha: [Vec<u32>; 4] = std::array::from_fn(|j| base[j * d as usize..(j + 1) * d as usize].to_vec());
    let f: [u32; 4] = std::array::from_fn(|j| *alpha[j].choose(rng).unwrap());
    let gamma: Vec<u32> = base[4 * d as usize..].iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
    build_absorber(n, d, alpha, f, gamma).expect("valid parameters")
}

fn c6_absorber_law() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for i in 0..100 {
        let d = rng.gen_range(1..=4);
        let n = rng.gen_range(4 * d..=24);
        let a = random_absorber(&mut rng, n, d);
        ensure(a.law_holds(), || format!("#{i}: law fails for\n{}", a.to_text()))?;
        let e = a.elements();
        ensure(e.iter().collect::<HashSet<_>>().len() == 4 << d, || format!("#{i}: subcubes overlap"))?;
    }
    Ok("100 absorbers, law and disjointness hold".into())
}

fn c7_absorption() -> Check {
    let p = Poset::chain(2);
    let opts = AbsorbOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut notes = Vec::new();
    for d in [2, 3] {
        let (mut ok, mut built) = (0, 0);
        for i in 0..50 {
            let n = rng.gen_range(4 * d..=4 * d + 3);
            let a = random_absorber(&mut rng, n, d);
            let all = a.elements();
            let nr = rng.gen_range(0..=2);
            let r: Vec<u64> = all.choose_multiple(&mut rng, nr).copied().collect();
            let Ok(out) = absorb(&a, &r, &p, &opts) else { continue };
            let region: Vec<Element> = all.iter().filter(|x| !r.contains(x)).map(|&x| Element::Set(x)).collect();
            let cs: Vec<CopySet> = out.copies.iter().map(|c| CopySet::from_masks(c)).collect();
            let rep = verify_region(&GroundPoset::Boolean(a.n), &region, &p, &cs, Mode::Almost(1));
            ensure(rep.pass, || format!("d={d} #{i}: {rep}"))?;
            ensure(rep.uncovered_count as usize % 2 == region.len() % 2, || format!("d={d} #{i}: parity"))?;
            ok += 1;
            built += (out.method == Method::Construction) as usize;
        }
        notes.push(format!("d={d} {ok}/50 ({built} by construction)"));
        if d == 3 {
            ensure(ok == 50, || notes.join(", "))?;
        }
    }
    for s in [1, 2] {
        let a = random_absorber(&mut rng, 9, 2);
        let out = product_absorb(s, &a, &vec![Vec::new(); 1 << s], &p, &opts).map_err(|e| format!("s={s}: {e}"))?;
        let region: Vec<Element> =
            (0..1u64 << s).flat_map(|x| a.elements().into_iter().map(move |y| Element::Set(x << 9 | y))).collect();
        let cs: Vec<CopySet> = out.copies.iter().map(|c| CopySet::from_masks(c)).collect();
        let rep = verify_region(&GroundPoset::Boolean(9 + s), &region, &p, &cs, Mode::Partition);
        ensure(rep.pass, || format!("product s={s}: {rep}"))?;
    }
    notes.push("product s=1,2 full partitions".into());
    Ok(notes.join(", "))
}

fn random_admissible(rng: &mut ChaCha8Rng, b: &BoxLattice, t: u32, modulus: u32) -> ResidueFunction {
    let mut f = ResidueFunction::zero(modulus);
    let ordinary: Vec<u64> = if b.bits() <= 16 {
        (0..=b.max()).filter(|&y| !b.in_pr(y, t)).collect()
    } else {
        (0..4000).map(|_| rng.gen_range(0..=b.max())).filter(|&y| !b.in_pr(y, t)).collect()
    };
    if ordinary.is_empty() {
        return f;
    }
    for _ in 0..rng.gen_range(1..=4) {
        f.add(*ordinary.choose(rng).unwrap(), rng.gen_range(1..modulus));
    }
    let y = *ordinary.choose(rng).unwrap();
    f.add(y, (modulus - f.total()) % modulus);
    f
}

fn realize_checked(f: &ResidueFunction, b: &BoxLattice, t: u32, p: &Poset) -> std::result::Result<(), String> {
    let ms = strongly_realize(f, b, t, p).map_err(|e| format!("k={} n1={} |P|={}: {e}", b.k, b.n1, p.size()))?;
    ensure(residue_of(&ms) == *f, || format!("k={} n1={}: residue mismatch", b.k, b.n1))?;
    let clean = ms.iter().all(|(c, _)| c.iter().all(|&y| !b.in_pr(y, t)));
    ensure(clean, || "copy meets PR".into())
}

fn c8_residues() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut nonzero = 0;
    for i in 0..200 {
        let np = [2, 3, 4][i % 3];
        let p = Poset::chain(np);
        let (k, n1) = (rng.gen_range(1..=6), rng.gen_range(1..=3));
        let b = BoxLattice::new(k, n1).unwrap();
        let t = default_threshold(k, n1);
        let f = random_admissible(&mut rng, &b, t, np as u32);
        nonzero += !f.is_zero() as usize;
        realize_checked(&f, &b, t, &p)?;
    }
    let mut wide = 0;
    for i in 0..60 {
        let np = [2, 3, 4][i % 3];
        let p = if np == 4 && i % 2 == 0 { named::diamond() } else { Poset::chain(np) };
        let n1 = 2 * np as u32 + 2;
        let k = rng.gen_range(1..=(62 / n1).min(6));
        let b = BoxLattice::new(k, n1).unwrap();
        let t = default_threshold(k, n1);
        let f = random_admissible(&mut rng, &b, t, np as u32);
        wide += !f.is_zero() as usize;
        realize_checked(&f, &b, t, &p)?;
    }
    let p = Poset::chain(2);
    for m in [6u32, 8] {
        for _ in 0..50 {
            let x = rng.gen_range(1..(1u64 << m) - 1);
            let y = rng.gen_range(1..(1u64 << m) - 1);
            let ms = realize_pair(x, y, m, &p, false).map_err(|e| format!("T({m}) {x:x},{y:x}: {e}"))?;
            let mut g = ResidueFunction::zero(2);
            g.add(x, 1);
            g.add(y, 1);
            ensure(residue_of(&ms) == g, || format!("T({m}) {x:x},{y:x}: residue"))?;
            let top = (1u64 << m) - 1;
            ensure(ms.iter().all(|(c, _)| c.iter().all(|&z| z != 0 && z != top)), || "copy leaves T(m)".into())?;
        }
    }
    Ok(format!(
        "200 functions with n1<=3 ({nonzero} nonzero), 60 with n1=2|P|+2 ({wide} nonzero), 100 pairs in T(6), T(8)"
    ))
}

fn c9_boundary() -> Check {
    let p = Poset::chain(2);
    let copies = smallsets_cover(11, 0.1, &p).map_err(|e| e.to_string())?;
    let rep = verify_masks(11, true, &p, &copies, Mode::Packing);
    ensure(rep.pass, || rep.to_string())?;
    let cov: HashSet<u64> = copies.iter().flatten().copied().collect();
    let missing = (1..(1u64 << 11) - 1).filter(|x| matches!(x.count_ones(), 1 | 10) && !cov.contains(x)).count();
    ensure(missing == 0, || format!("{missing} boundary sets uncovered"))?;
    for m in 1..=14 {
        let g = level_graph(m, 0.1).map_err(|e| format!("m={m}: {e}"))?;
        ensure(g.max_degree() <= 20, || format!("m={m}: degree {}", g.max_degree()))?;
        for x in 0..1u64 << m {
            for &y in &g.adj[x as usize] {
                ensure(x & !y == 0 || y & !x == 0, || format!("m={m}: {x:x} {y:x} incomparable"))?;
            }
            let s = x.count_ones() as f64;
            if s >= 0.1 * m as f64 && s <= 0.9 * m as f64 && s >= 1.0 && s < m as f64 {
                ensure(g.below(x).next().is_some() && g.above(x).next().is_some(), || format!("m={m}: {x:x} lacks a side"))?;
            }
        }
    }
    Ok(format!("{} copies cover sizes 1 and 10 of T(11); level graphs m<=14 within degree 20", copies.len()))
}

fn c10_assembly() -> Check {
    let t = Instant::now();
    let path = data("assemble.params");
    let map = io::parse_params(&std::fs::read_to_string(&path).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let cli = <Cli as clap::Parser>::try_parse_from(["posetpack", "assemble"]).map_err(|e| e.to_string())?;
    let (p, params) = assembly_params(&map, path.parent().unwrap(), &cli).map_err(|e| e.to_string())?;
    let a = assemble_truncated(&p, &params).map_err(|e| e.to_string())?;
    let rep = verify_masks(a.n, true, &p, &a.copies, Mode::Almost(p.size() as u64 - 1));
    ensure(rep.pass, || rep.to_string())?;
    let again = assemble_truncated(&p, &params).map_err(|e| e.to_string())?;
    ensure(again.copies == a.copies, || "not deterministic".into())?;
    let el = t.elapsed();
    ensure(el < Duration::from_secs(600), || format!("took {el:?}"))?;
    Ok(format!("{} copies, {} uncovered, {el:?}", a.copies.len(), rep.uncovered_count))
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for q in permutations(n - 1) {
        for i in 0..n {
            let mut r = q.clone();
            r.insert(i, n - 1);
            out.push(r);
        }
    }
    out
}

fn all_posets(n: usize) -> Vec<Poset> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).collect();
    let perms = permutations(n);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for bits in 0u32..1 << pairs.len() {
        let rel: Vec<_> = pairs.iter().enumerate().filter(|(i, _)| bits >> i & 1 == 1).map(|(_, &r)| r).collect();
        let Ok(p) = Poset::new(n, &rel) else { continue };
        let canon = perms
            .iter()
            .map(|pi| (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).map(|(a, b)| p.leq(pi[a], pi[b])).collect::<Vec<_>>())
            .min()
            .unwrap();
        if seen.insert(canon) {
            out.push(p);
        }
    }
    out
}

/// Subsets of the ground that induce `p`, by trying every bijection.
fn brute_copies(elems: &[Element], g: &GroundPoset, p: &Poset) -> Vec<u32> {
    let n = p.size();
    let perms = permutations(n);
    let mut out = Vec::new();
    let m = elems.len();
    let mut pick = vec![0usize; n];
    fn rec(i: usize, start: usize, m: usize, pick: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
        if i == pick.len() {
            visit(pick);
            return;
        }
        for s in start..m {
            pick[i] = s;
            rec(i + 1, s + 1, m, pick, visit);
        }
    }
    rec(0, 0, m, &mut pick, &mut |sub: &[usize]| {
        let hit = perms.iter().any(|pi| (0..n).all(|a| (0..n).all(|b| p.leq(a, b) == g.leq(&elems[sub[pi[a]]], &elems[sub[pi[b]]]))));
        if hit {
            out.push(sub.iter().fold(0u32, |mk, &s| mk | 1 << s));
        }
    });
    out
}

fn brute_partition(m: usize, copies: &[u32]) -> bool {
    let full = if m == 32 { u32::MAX } else { (1u32 << m) - 1 };
    let mut by_low: HashMap<u32, Vec<u32>> = HashMap::new();
    for &c in copies {
        by_low.entry(c.trailing_zeros()).or_default().push(c);
    }
    fn go(cov: u32, full: u32, by_low: &HashMap<u32, Vec<u32>>, dead: &mut HashSet<u32>) -> bool {
        if cov == full {
            return true;
        }
        if dead.contains(&cov) {
            return false;
        }
        let low = (!cov).trailing_zeros();
        for &c in by_low.get(&low).map_or(&[][..], |v| v.as_slice()) {
            if c & cov == 0 && go(cov | c, full, by_low, dead) {
                return true;
            }
        }
        dead.insert(cov);
        false
    }
    go(0, full, &by_low, &mut HashSet::new())
}

fn small_grounds() -> Vec<GroundPoset> {
    let mut g: Vec<GroundPoset> = (1..=4).map(GroundPoset::Boolean).collect();
    g.extend((2..=4).map(GroundPoset::Truncated));
    for a in 1..=20u32 {
        g.push(GroundPoset::Grid(vec![a]));
        for b in a..=20 / a {
            if a > 1 {
                g.push(GroundPoset::Grid(vec![a, b]));
            }
            for c in b..=20 / (a * b) {
                if a > 1 {
                    g.push(GroundPoset::Grid(vec![a, b, c]));
                }
            }
        }
    }
    for (h, d) in [(1, 1), (2, 1), (3, 1), (4, 1), (5, 1), (6, 1), (8, 1), (10, 1), (2, 2), (3, 2), (2, 3)] {
        g.push(GroundPoset::Stack { h, d });
    }
    g.push(GroundPoset::Product(vec![GroundPoset::Boolean(1), GroundPoset::Grid(vec![2, 3])]));
    g.retain(|x| x.size() <= 20);
    g
}

fn c11_oracle() -> Check {
    let posets: Vec<Poset> = (1..=4).flat_map(all_posets).collect();
    let grounds = small_grounds();
    let (mut cases, mut found) = (0, 0);
    for g in &grounds {
        let elems: Vec<Element> = g.elements().collect();
        for p in &posets {
            let brute = brute_partition(elems.len(), &brute_copies(&elems, g, p));
            let o = exact_partition_oracle(g, p, 50_000_000).map_err(|e| format!("{} {p:?}: {e}", g.descriptor()))?;
            ensure(o.is_found() == brute, || format!("{} {p:?}: oracle {} brute {brute}", g.descriptor(), o.is_found()))?;
            if let Outcome::Found(pk) = o {
                ensure(verify_packing(g, p, &pk, Mode::Partition).pass, || format!("{} {p:?}: bad partition", g.descriptor()))?;
                found += 1;
            }
            cases += 1;
        }
    }
    let mut confirmed = 0;
    let mut confirm = |g: &GroundPoset, region: Vec<Element>, p: &Poset, copies: &[CopySet], what: &str| {
        let rep = verify_region(g, &region, p, copies, Mode::Partition);
        ensure(rep.pass, || format!("{what}: {rep}"))?;
        let r = Region::new(g, region);
        let o = exact_cover_in(&r, p, 0, 50_000_000).map_err(|e| format!("{what}: {e}"))?;
        ensure(o.is_some(), || format!("{what}: oracle disagrees"))?;
        confirmed += 1;
        Ok::<(), String>(())
    };
    let chain2 = Poset::chain(2);
    let real = |p: &Poset| find_realizer(p, 2).unwrap().unwrap();
    for (p, h) in [(chain2.clone(), 2), (chain2.clone(), 4), (chain2.clone(), 8), (Poset::chain(3), 3), (Poset::chain(4), 4)] {
        let pk = stacked_pair_partition(&p, &real(&p), h).map_err(|e| e.to_string())?;
        confirm(&pk.ground, pk.ground.elements().collect(), &p, &pk.copies, &format!("pair h={h}"))?;
    }
    for n in 1..=6 {
        let c = equal_chain_partition(n, 2).map_err(|e| e.to_string())?.found().ok_or("no chains")?;
        let copies: Vec<CopySet> = c.chains.iter().map(|ch| CopySet::from_masks(ch)).collect();
        let g = GroundPoset::Boolean(n);
        confirm(&g, g.elements().collect(), &chain2, &copies, &format!("2-chains n={n}"))?;
    }
    let stack = Poset::chain(4);
    if let Outcome::Found(copies) = grid_stack_partition(2, 1, 2).map_err(|e| e.to_string())? {
        let g = GroundPoset::Grid(vec![4, 4]);
        confirm(&g, g.elements().collect(), &stack, &copies, "grid stack")?;
    }
    let single = Poset::chain(1);
    let pk = dense_grid_packing(&single, &real(&single), &[3]).map_err(|e| e.to_string())?;
    confirm(&pk.ground, pk.ground.elements().collect(), &single, &pk.copies, "dense singletons")?;
    let a = build_absorber(8, 2, [vec![1, 2], vec![3, 4], vec![5, 6], vec![7, 8]], [1, 3, 5, 7], vec![]).unwrap();
    let out = absorb(&a, &[], &chain2, &AbsorbOptions::default()).map_err(|e| e.to_string())?;
    let region: Vec<Element> = a.elements().into_iter().map(Element::Set).collect();
    let cs: Vec<CopySet> = out.copies.iter().map(|c| CopySet::from_masks(c)).collect();
    confirm(&GroundPoset::Boolean(8), region, &chain2, &cs, "absorb")?;
    Ok(format!(
        "{cases} ground/poset pairs agree ({found} partitions) over {} grounds; {confirmed} module partitions confirmed",
        grounds.len()
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 11] = [
        ("dense packing of [13]x[13]", c1_figure),
        ("grid packing sweep", c2_claim1_sweep),
        ("stacked pair partitions", c3_pair),
        ("equal chains against the oracle", c4_chains),
        ("gray code", c5_gray),
        ("absorber law", c6_absorber_law),
        ("absorption", c7_absorption),
        ("residue realization", c8_residues),
        ("boundary covers and level graphs", c9_boundary),
        ("truncated product assembly", c10_assembly),
        ("oracle against exhaustive enumeration", c11_oracle),
    ];
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        if !only.is_empty() && !only.contains(&(i + 1)) {
            continue;
        }
        let t = Instant::now();
        let res = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or(e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or("panic".into()))
        });
        match res {
            Ok(msg) => println!("criterion {:>2} PASS  {name}: {msg} [{:.1?}]", i + 1, t.elapsed()),
            Err(msg) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {msg} [{:.1?}]", i + 1, t.elapsed())
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
