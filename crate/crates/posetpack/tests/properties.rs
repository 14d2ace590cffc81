use std::collections::HashSet;

use posetpack::absorber::{absorb, build_absorber, replace_extreme, shifted_special_copies, AbsorbOptions, Polarity};
use posetpack::assembly::{classify, completes, hall_match, HallOutcome};
use posetpack::chains::equal_chain_partition;
use posetpack::grid::dense_grid_packing;
use posetpack::io;
use posetpack::oracle::{greedy_extend, enumerate_copies, verify_packing, Mode};
use posetpack::product::{BoxLattice, Class};
use posetpack::residues::{residue_of, CopyMultiset};
use posetpack::{find_realizer, is_copy, Element, GroundPoset, Packing, Poset};
use proptest::prelude::*;

fn poset_strategy(max: usize) -> impl Strategy<Value = Poset> {
    (1..=max).prop_flat_map(|n| {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        (Just(n), proptest::collection::vec(any::<bool>(), pairs.len()), Just(pairs), Just((0..n).collect::<Vec<_>>()).prop_shuffle())
            .prop_map(|(n, keep, pairs, perm)| {
                let rel: Vec<_> = pairs.iter().zip(keep).filter(|(_, k)| *k).map(|(&(a, b), _)| (perm[a], perm[b])).collect();
                Poset::new(n, &rel).unwrap()
            })
    })
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

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn is_copy_matches_bijection_search(p in poset_strategy(6), picks in proptest::collection::hash_set(0u64..32, 6)) {
        let g = GroundPoset::Boolean(5);
        let f: Vec<Element> = picks.into_iter().take(p.size()).map(Element::Set).collect();
        let got = is_copy(&f, &p, &g).unwrap();
        let n = p.size();
        let brute = permutations(n).into_iter().any(|pi| (0..n).all(|a| (0..n).all(|b| p.leq(a, b) == g.leq(&f[pi[a]], &f[pi[b]]))));
        prop_assert_eq!(got.is_some(), brute);
        if let Some(c) = got {
            prop_assert!(c.witness_holds(&p, &g));
        }
    }

    #[test]
    fn realizer_biconditional(p in poset_strategy(6)) {
        let r = find_realizer(&p, p.size()).unwrap().unwrap();
        prop_assert!(r.realizes(&p));
        let ranks: Vec<Vec<usize>> = (0..r.d()).map(|i| r.ranks(i)).collect();
        for a in 0..p.size() {
            for b in 0..p.size() {
                prop_assert_eq!(p.leq(a, b), ranks.iter().all(|rk| rk[a] <= rk[b]));
            }
        }
        if p.size() >= 4 {
            prop_assert!(2 * r.d() <= p.size());
        }
    }

    #[test]
    fn text_formats_roundtrip(p in poset_strategy(5), a in 5u32..10, b in 5u32..10) {
        prop_assert_eq!(io::parse_poset(&io::poset_to_text(&p)).unwrap(), p.clone());
        let r = find_realizer(&p, 2).unwrap();
        prop_assume!(r.is_some());
        let pk = dense_grid_packing(&p, &r.unwrap(), &[a, b]).unwrap();
        let (back, h) = io::parse_packing(&io::packing_to_text(&p, &pk)).unwrap();
        prop_assert_eq!(back, pk);
        prop_assert_eq!(h, p.fingerprint());
    }

    #[test]
    fn replaced_extreme_is_still_a_copy(p in poset_strategy(4), extra in 0u32..3, pick in any::<prop::sample::Index>(), drop in any::<u64>()) {
        let n = p.size() as u32 + extra + 1;
        let g = GroundPoset::Boolean(n);
        for pol in [Polarity::Min, Polarity::Max] {
            let scs = shifted_special_copies(&p, n, 1, pol).unwrap();
            let sc = &scs[pick.index(scs.len())];
            prop_assert!(sc.is_special());
            let x = sc.extreme();
            let target = match pol {
                Polarity::Min => (x & drop) | 1,
                Polarity::Max => (x | (drop & ((1 << n) - 1))) & !1,
            };
            let out = replace_extreme(sc, target).unwrap();
            let f: Vec<Element> = out.masks.iter().map(|&m| Element::Set(m)).collect();
            prop_assert!(is_copy(&f, &p, &g).unwrap().is_some());
        }
    }

    #[test]
    fn completes_is_monotone(f in proptest::collection::hash_set(1u64..31, 0..8), more in proptest::collection::hash_set(1u64..31, 0..4), x in 1u64..31) {
        let p = Poset::chain(2);
        let f: Vec<u64> = f.into_iter().filter(|&y| y != x).collect();
        let mut g = f.clone();
        g.extend(more.into_iter().filter(|y| *y != x && !f.contains(y)));
        if completes(&f, x, &p) {
            prop_assert!(completes(&g, x, &p));
        }
    }

    #[test]
    fn residues_add(a in proptest::collection::vec((proptest::collection::vec(0u64..64, 3), 0u32..3), 0..6),
                    b in proptest::collection::vec((proptest::collection::vec(0u64..64, 3), 0u32..3), 0..6)) {
        let build = |v: &[(Vec<u64>, u32)]| {
            let mut ms = CopyMultiset::new(3);
            v.iter().for_each(|(c, m)| ms.add(c.clone(), *m));
            ms
        };
        let (ma, mb) = (build(&a), build(&b));
        let mut both = ma.clone();
        both.merge(&mb, 1);
        let mut sum = residue_of(&ma);
        residue_of(&mb).support().for_each(|(x, v)| sum.add(x, v));
        prop_assert_eq!(residue_of(&both), sum);
    }

    #[test]
    fn greedy_extend_is_maximal_and_idempotent(p in poset_strategy(3), n in 2u32..5) {
        let g = GroundPoset::Boolean(n);
        let region: Vec<Element> = g.elements().collect();
        let once = greedy_extend(&Packing::new(g.clone()), &region, &p);
        prop_assert!(verify_packing(&g, &p, &once, Mode::Packing).pass);
        let left = once.uncovered();
        prop_assert!(enumerate_copies(&g, &left, &p, 1).is_empty());
        prop_assert_eq!(greedy_extend(&once, &region, &p), once);
    }

    #[test]
    fn absorb_leaves_residue_class(d in 2u32..4, pick in proptest::collection::vec(any::<prop::sample::Index>(), 0..3)) {
        let n = 4 * d + 1;
        let alpha: [Vec<u32>; 4] = std::array::from_fn(|j| (1..=d).map(|i| j as u32 * d + i).collect());
        let f: [u32; 4] = std::array::from_fn(|j| alpha[j][0]);
        let a = build_absorber(n, d, alpha, f, vec![n]).unwrap();
        let all = a.elements();
        let r: Vec<u64> = pick.iter().map(|i| all[i.index(all.len())]).collect::<HashSet<_>>().into_iter().collect();
        let p = Poset::chain(2);
        let out = absorb(&a, &r, &p, &AbsorbOptions::default()).unwrap();
        prop_assert!(out.uncovered.len() <= 1);
        prop_assert_eq!(out.uncovered.len() % 2, (all.len() - r.len()) % 2);
    }

    #[test]
    fn classification_is_consistent(k in 1u32..6, n1 in 1u32..6, t in 0u32..4, y in any::<u64>()) {
        let b = BoxLattice::new(k, n1).unwrap();
        let y = y & b.max();
        let ne = b.non_extreme(y).len() as u32;
        let mid = (0..k).any(|i| b.is_mid(b.coord(y, i)));
        let want = if ne <= t { Class::Problematic } else if !mid { Class::Restricted } else { Class::Ordinary };
        prop_assert_eq!(classify(&b, y, t), want);
    }

    #[test]
    fn hall_complete_under_degree_condition(left in 1usize..12, deg in 1usize..4, seed in any::<u64>()) {
        // d-regular left side into a right side where every vertex has degree <= d
        let right = left;
        let adj: Vec<Vec<usize>> = (0..left).map(|i| (0..deg).map(|j| (i + j * (1 + seed as usize % 3)) % right).collect::<HashSet<_>>().into_iter().collect()).collect();
        let min_left = adj.iter().map(|v| v.len()).min().unwrap();
        let mut rd = vec![0; right];
        adj.iter().flatten().for_each(|&r| rd[r] += 1);
        prop_assume!(min_left >= *rd.iter().max().unwrap());
        prop_assert!(matches!(hall_match(right, &adj), HallOutcome::Complete(_)));
    }

    #[test]
    fn two_chains_always_exist(n in 1u32..13) {
        let c = equal_chain_partition(n, 2).unwrap().found().unwrap();
        prop_assert!(c.is_valid());
        prop_assert!(c.sizes().iter().all(|&s| s == 2));
    }
}
