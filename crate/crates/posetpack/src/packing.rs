//! Copies of a pattern inside a ground poset, and packings of them.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::ground::{Element, GroundPoset};
use crate::poset::{find_isomorphism, Poset};

/// A copy of `P`; `image[p]` is the ground element playing the role of `p`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CopySet {
    pub image: Vec<Element>,
}

impl CopySet {
    pub fn new(image: Vec<Element>) -> CopySet {
        CopySet { image }
    }

    pub fn from_masks(masks: &[u64]) -> CopySet {
        CopySet { image: masks.iter().map(|&m| Element::Set(m)).collect() }
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    pub fn elements(&self) -> &[Element] {
        &self.image
    }

    pub fn masks(&self) -> Vec<u64> {
        self.image.iter().map(|e| e.mask().expect("subset element")).collect()
    }

    pub fn contains(&self, e: &Element) -> bool {
        self.image.contains(e)
    }

    /// Checks the witness itself is an order-isomorphism onto its image.
    pub fn witness_holds(&self, p: &Poset, g: &GroundPoset) -> bool {
        self.image.len() == p.size()
            && (0..p.size()).all(|a| (0..p.size()).all(|b| p.leq(a, b) == g.leq(&self.image[a], &self.image[b])))
            && self.image.iter().collect::<HashSet<_>>().len() == p.size()
    }
}

/// Witness bijection if the subposet induced on `f` is isomorphic to `p`.
pub fn is_copy(f: &[Element], p: &Poset, g: &GroundPoset) -> Result<Option<CopySet>> {
    if f.len() != p.size() {
        return Err(Error::Precondition(format!("|F| = {} but |P| = {}", f.len(), p.size())));
    }
    if let Some(e) = f.iter().find(|e| !g.contains(e)) {
        return Err(Error::Precondition(format!("{e} is not in {}", g.descriptor())));
    }
    if f.iter().collect::<HashSet<_>>().len() != f.len() {
        return Err(Error::Precondition("F has repeated elements".into()));
    }
    let rel = relation_rows(f, g);
    Ok(find_isomorphism(p, &rel).map(|map| CopySet { image: map.iter().map(|&t| f[t].clone()).collect() }))
}

/// Reflexive relation rows of the subposet induced on `f`.
pub fn relation_rows(f: &[Element], g: &GroundPoset) -> Vec<u64> {
    (0..f.len())
        .map(|i| (0..f.len()).filter(|&j| g.leq(&f[i], &f[j])).fold(0u64, |r, j| r | 1 << j))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Packing {
    pub ground: GroundPoset,
    pub copies: Vec<CopySet>,
}

impl Packing {
    pub fn new(ground: GroundPoset) -> Packing {
        Packing { ground, copies: Vec::new() }
    }

    pub fn with_copies(ground: GroundPoset, copies: Vec<CopySet>) -> Packing {
        Packing { ground, copies }
    }

    pub fn len(&self) -> usize {
        self.copies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.copies.is_empty()
    }

    /// Union of the copies' elements.
    pub fn covered(&self) -> HashSet<Element> {
        self.copies.iter().flat_map(|c| c.image.iter().cloned()).collect()
    }

    pub fn covered_count(&self) -> usize {
        self.covered().len()
    }

    /// Disjointness via cardinality of the union.
    pub fn is_disjoint(&self) -> bool {
        let total: usize = self.copies.iter().map(|c| c.len()).sum();
        total == self.covered_count()
    }

    pub fn uncovered(&self) -> Vec<Element> {
        let cov = self.covered();
        self.ground.elements().filter(|e| !cov.contains(e)).collect()
    }

    pub fn extend(&mut self, other: Packing) {
        self.copies.extend(other.copies);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ground::set;
    use crate::poset::named;

    #[test]
    fn chain_copy_in_boolean() {
        let g = GroundPoset::Boolean(2);
        let p = Poset::chain(2);
        let f = [Element::Set(set(&[1])), Element::Set(0)];
        let c = is_copy(&f, &p, &g).unwrap().unwrap();
        assert_eq!(c.image, vec![Element::Set(0), Element::Set(1)]);
        assert!(c.witness_holds(&p, &g));
        let f = [Element::Set(set(&[1])), Element::Set(set(&[2]))];
        assert!(is_copy(&f, &p, &g).unwrap().is_none());
    }

    #[test]
    fn diamond_identity() {
        let g = GroundPoset::Boolean(2);
        let f: Vec<_> = (0..4).map(Element::Set).collect();
        assert!(is_copy(&f, &named::diamond(), &g).unwrap().is_some());
    }
}
