//! Text formats: posets, chain partitions, packings, absorbers and `key=value` parameter files.

use std::collections::BTreeMap;

use crate::absorber::{build_absorber, Absorber};
use crate::chains::ChainPartition;
use crate::error::{Error, Result};
use crate::ground::GroundPoset;
use crate::packing::{CopySet, Packing};
use crate::poset::Poset;
use crate::residues::CopyMultiset;

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

/// Non-blank lines that are not `#` comments, numbered from 1.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

pub fn poset_to_text(p: &Poset) -> String {
    let mut s = format!("poset {}\n", p.size());
    for (a, b) in p.cover_relations() {
        s += &format!("{a} < {b}\n");
    }
    s
}

pub fn parse_poset(text: &str) -> Result<Poset> {
    let mut lines = content_lines(text);
    let (ln, head) = lines.next().ok_or_else(|| perr(1, "empty poset file"))?;
    let n: usize = match head.split_whitespace().collect::<Vec<_>>().as_slice() {
        ["poset", n] => n.parse().map_err(|_| perr(ln, "bad element count"))?,
        _ => return Err(perr(ln, "expected `poset <n>`")),
    };
    let mut rel = Vec::new();
    for (ln, line) in lines {
        let (a, b) = line.split_once('<').ok_or_else(|| perr(ln, "expected `<i> < <j>`"))?;
        let a = a.trim().parse().map_err(|_| perr(ln, "bad index"))?;
        let b = b.trim().parse().map_err(|_| perr(ln, "bad index"))?;
        rel.push((a, b));
    }
    Poset::new(n, &rel)
}

pub fn chains_to_text(c: &ChainPartition) -> String {
    c.chains
        .iter()
        .map(|ch| ch.iter().map(|x| format!("{x:x}")).collect::<Vec<_>>().join(" ") + "\n")
        .collect()
}

/// `n` is read off the union of all elements, which for a partition is `[n]`.
pub fn parse_chains(text: &str) -> Result<ChainPartition> {
    let mut chains = Vec::new();
    for (ln, line) in content_lines(text) {
        let ch = line
            .split_whitespace()
            .map(|t| u64::from_str_radix(t, 16).map_err(|_| perr(ln, format!("bad subset {t:?}"))))
            .collect::<Result<Vec<_>>>()?;
        chains.push(ch);
    }
    let all = chains.iter().flatten().fold(0u64, |a, &x| a | x);
    Ok(ChainPartition { n: 64 - all.leading_zeros(), chains })
}

pub fn packing_to_text(p: &Poset, packing: &Packing) -> String {
    let mut s = format!("packing {} {:016x}\n", packing.ground.descriptor(), p.fingerprint());
    for c in &packing.copies {
        let row: Vec<String> = c.image.iter().map(|e| packing.ground.format_element(e)).collect();
        s += &row.join(" ");
        s.push('\n');
    }
    s
}

/// The packing and the pattern hash from its header.
pub fn parse_packing(text: &str) -> Result<(Packing, u64)> {
    let mut lines = content_lines(text);
    let (ln, head) = lines.next().ok_or_else(|| perr(1, "empty packing file"))?;
    let (ground, hash) = match head.split_whitespace().collect::<Vec<_>>().as_slice() {
        ["packing", g, h] => (
            GroundPoset::parse_descriptor(g).map_err(|e| perr(ln, e.to_string()))?,
            u64::from_str_radix(h, 16).map_err(|_| perr(ln, "bad pattern hash"))?,
        ),
        _ => return Err(perr(ln, "expected `packing <ground> <hash>`")),
    };
    let mut copies = Vec::new();
    for (ln, line) in lines {
        let image = line
            .split_whitespace()
            .map(|t| ground.parse_element(t).map_err(|e| perr(ln, e.to_string())))
            .collect::<Result<Vec<_>>>()?;
        copies.push(CopySet::new(image));
    }
    Ok((Packing::with_copies(ground, copies), hash))
}

pub fn parse_absorber(text: &str) -> Result<Absorber> {
    let mut lines = content_lines(text);
    let (ln, head) = lines.next().ok_or_else(|| perr(1, "empty absorber file"))?;
    let mut n = None;
    let mut d = None;
    let mut it = head.split_whitespace();
    if it.next() != Some("absorber") {
        return Err(perr(ln, "expected `absorber n=<n> d=<d>`"));
    }
    for kv in it {
        match kv.split_once('=') {
            Some(("n", v)) => n = v.parse().ok(),
            Some(("d", v)) => d = v.parse().ok(),
            _ => return Err(perr(ln, format!("unexpected {kv:?}"))),
        }
    }
    let (Some(n), Some(d)) = (n, d) else {
        return Err(perr(ln, "missing n or d"));
    };
    let list = |ln: usize, v: &str| -> Result<Vec<u32>> {
        v.split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(|t| t.parse().map_err(|_| perr(ln, format!("bad base element {t:?}"))))
            .collect()
    };
    let mut alpha: [Option<Vec<u32>>; 4] = Default::default();
    let mut f = [None; 4];
    let mut gamma = None;
    for (ln, line) in lines {
        let (key, val) = line.split_once('=').ok_or_else(|| perr(ln, "expected `key = value`"))?;
        let (key, val) = (key.trim(), val.trim());
        let slot = |prefix: &str| key.strip_prefix(prefix).and_then(|j| j.parse::<usize>().ok()).filter(|j| (1..=4).contains(j));
        if key == "gamma" {
            gamma = Some(list(ln, val)?);
        } else if let Some(j) = slot("alpha") {
            alpha[j - 1] = Some(list(ln, val)?);
        } else if let Some(j) = slot("f") {
            f[j - 1] = Some(val.parse().map_err(|_| perr(ln, "bad f value"))?);
        } else {
            return Err(perr(ln, format!("unknown key {key:?}")));
        }
    }
    let missing = || perr(0, "absorber file is missing a field");
    let alpha = alpha.map(|a| a.ok_or_else(missing));
    let [a1, a2, a3, a4] = alpha;
    let f = f.map(|x| x.ok_or_else(missing));
    let [f1, f2, f3, f4] = f;
    build_absorber(n, d, [a1?, a2?, a3?, a4?], [f1?, f2?, f3?, f4?], gamma.ok_or_else(missing)?)
}

/// Header `multiset <modulus>`, then `<multiplicity> <hex elements>` per copy.
pub fn multiset_to_text(ms: &CopyMultiset) -> String {
    let mut s = format!("multiset {}\n", ms.modulus);
    for (c, m) in ms.iter() {
        s += &format!("{m} {}\n", c.iter().map(|x| format!("{x:x}")).collect::<Vec<_>>().join(" "));
    }
    s
}

pub fn parse_multiset(text: &str) -> Result<CopyMultiset> {
    let mut lines = content_lines(text);
    let (ln, head) = lines.next().ok_or_else(|| perr(1, "empty multiset file"))?;
    let modulus: u32 = match head.split_whitespace().collect::<Vec<_>>().as_slice() {
        ["multiset", m] => m.parse().ok().filter(|&m| m > 0).ok_or_else(|| perr(ln, "bad modulus"))?,
        _ => return Err(perr(ln, "expected `multiset <modulus>`")),
    };
    let mut ms = CopyMultiset::new(modulus);
    for (ln, line) in lines {
        let mut it = line.split_whitespace();
        let m: u32 = it.next().and_then(|t| t.parse().ok()).ok_or_else(|| perr(ln, "bad multiplicity"))?;
        let copy = it
            .map(|t| u64::from_str_radix(t, 16).map_err(|_| perr(ln, format!("bad element {t:?}"))))
            .collect::<Result<Vec<_>>>()?;
        ms.add(copy, m);
    }
    Ok(ms)
}

/// `key=value` lines; later keys override earlier ones.
pub fn parse_params(text: &str) -> Result<BTreeMap<String, String>> {
    let mut m = BTreeMap::new();
    for (ln, line) in content_lines(text) {
        let (k, v) = line.split_once('=').ok_or_else(|| perr(ln, "expected key=value"))?;
        m.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(m)
}

pub fn params_to_text(m: &BTreeMap<String, String>) -> String {
    m.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chains::scd;
    use crate::ground::Element;
    use crate::poset::named;

    #[test]
    fn poset_roundtrip() {
        for p in [named::diamond(), named::five_element(), Poset::chain(3), Poset::antichain(2)] {
            assert_eq!(parse_poset(&poset_to_text(&p)).unwrap(), p);
        }
        assert!(parse_poset("poset 2\n0 < 1\n1 < 0\n").is_err());
    }

    #[test]
    fn chains_roundtrip() {
        let c = scd(4);
        assert_eq!(parse_chains(&chains_to_text(&c)).unwrap(), c);
    }

    #[test]
    fn packing_roundtrip() {
        let p = Poset::chain(2);
        let g = GroundPoset::Stack { h: 2, d: 1 };
        let pk = Packing::with_copies(
            g,
            vec![
                CopySet::new(vec![Element::Stack(0, vec![0]), Element::Stack(0, vec![1])]),
                CopySet::new(vec![Element::Stack(1, vec![0]), Element::Stack(1, vec![1])]),
            ],
        );
        let text = packing_to_text(&p, &pk);
        assert!(text.lines().nth(1).unwrap().starts_with("0:1 0:2"));
        let (back, h) = parse_packing(&text).unwrap();
        assert_eq!(back, pk);
        assert_eq!(h, p.fingerprint());
    }

    #[test]
    fn absorber_roundtrip() {
        let a = build_absorber(4, 1, [vec![1], vec![2], vec![3], vec![4]], [1, 2, 3, 4], vec![]).unwrap();
        assert_eq!(parse_absorber(&a.to_text()).unwrap(), a);
    }

    #[test]
    fn multiset_roundtrip() {
        let mut ms = CopyMultiset::new(3);
        ms.add(vec![1, 3], 2);
        ms.add(vec![2, 6], 1);
        assert_eq!(parse_multiset(&multiset_to_text(&ms)).unwrap(), ms);
    }

    #[test]
    fn params() {
        let m = parse_params("# run\nk = 3\nn1=6\n").unwrap();
        assert_eq!(m["k"], "3");
        assert_eq!(parse_params(&params_to_text(&m)).unwrap(), m);
    }
}
