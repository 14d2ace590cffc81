//! Ground posets (Boolean lattices, grids, stacked grids, products) and their elements.

use std::fmt;

use crate::error::{Error, Result};

/// Largest base set for Boolean grounds.
pub const MAX_BOOLEAN: u32 = 62;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum GroundPoset {
    Boolean(u32),
    /// Boolean lattice without its bottom and top.
    Truncated(u32),
    Grid(Vec<u32>),
    /// Two copies of `[h]^d`, layer 1 entirely above layer 0.
    Stack { h: u32, d: u32 },
    Product(Vec<GroundPoset>),
}

/// A point of a ground poset. Grid coordinates are 0-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Element {
    Set(u64),
    Grid(Vec<u32>),
    Stack(u8, Vec<u32>),
    Tuple(Vec<Element>),
}

impl Element {
    pub fn mask(&self) -> Option<u64> {
        match self {
            Element::Set(m) => Some(*m),
            _ => None,
        }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::Set(m) => write!(f, "{m:x}"),
            Element::Grid(c) => write!(f, "{}", join_coords(c)),
            Element::Stack(l, c) => write!(f, "{l}:{}", join_coords(c)),
            Element::Tuple(parts) => {
                let s: Vec<String> = parts.iter().map(|p| p.to_string()).collect();
                write!(f, "{}", s.join("/"))
            }
        }
    }
}

fn join_coords(c: &[u32]) -> String {
    c.iter().map(|v| (v + 1).to_string()).collect::<Vec<_>>().join(",")
}

fn parse_coords(s: &str) -> Result<Vec<u32>> {
    s.split(',')
        .map(|t| match t.trim().parse::<u32>() {
            Ok(v) if v >= 1 => Ok(v - 1),
            _ => Err(Error::Parse { line: 0, msg: format!("bad coordinate {t:?}") }),
        })
        .collect()
}

fn checked_pow(base: u64, exp: u32) -> Result<u64> {
    base.checked_pow(exp).ok_or(Error::Size { got: usize::MAX, cap: u64::MAX as usize })
}

impl GroundPoset {
    pub fn boolean(n: u32) -> Result<GroundPoset> {
        if n > MAX_BOOLEAN {
            return Err(Error::Size { got: n as usize, cap: MAX_BOOLEAN as usize });
        }
        Ok(GroundPoset::Boolean(n))
    }

    pub fn truncated(n: u32) -> Result<GroundPoset> {
        if n > MAX_BOOLEAN || n == 0 {
            return Err(Error::Parameter(format!("truncated lattice needs 1 <= n <= {MAX_BOOLEAN}")));
        }
        Ok(GroundPoset::Truncated(n))
    }

    pub fn size(&self) -> u64 {
        self.try_size().expect("ground size overflows u64")
    }

    pub fn try_size(&self) -> Result<u64> {
        Ok(match self {
            GroundPoset::Boolean(n) => 1u64 << n,
            GroundPoset::Truncated(n) => (1u64 << n).saturating_sub(2),
            GroundPoset::Grid(a) => {
                a.iter().try_fold(1u64, |acc, &x| acc.checked_mul(x as u64)).ok_or(Error::Size {
                    got: usize::MAX,
                    cap: u64::MAX as usize,
                })?
            }
            GroundPoset::Stack { h, d } => 2 * checked_pow(*h as u64, *d)?,
            GroundPoset::Product(fs) => {
                let mut acc = 1u64;
                for f in fs {
                    acc = acc.checked_mul(f.try_size()?).ok_or(Error::Size {
                        got: usize::MAX,
                        cap: u64::MAX as usize,
                    })?;
                }
                acc
            }
        })
    }

    pub fn contains(&self, e: &Element) -> bool {
        match (self, e) {
            (GroundPoset::Boolean(n), Element::Set(m)) => m >> n == 0,
            (GroundPoset::Truncated(n), Element::Set(m)) => m >> n == 0 && *m != 0 && *m != (1u64 << n) - 1,
            (GroundPoset::Grid(a), Element::Grid(c)) => {
                a.len() == c.len() && c.iter().zip(a).all(|(x, b)| x < b)
            }
            (GroundPoset::Stack { h, d }, Element::Stack(l, c)) => {
                *l <= 1 && c.len() == *d as usize && c.iter().all(|x| x < h)
            }
            (GroundPoset::Product(fs), Element::Tuple(parts)) => {
                fs.len() == parts.len() && fs.iter().zip(parts).all(|(f, p)| f.contains(p))
            }
            _ => false,
        }
    }

    /// Order relation; both arguments must belong to this ground.
    pub fn leq(&self, a: &Element, b: &Element) -> bool {
        match (self, a, b) {
            (GroundPoset::Boolean(_) | GroundPoset::Truncated(_), Element::Set(x), Element::Set(y)) => x & !y == 0,
            (GroundPoset::Grid(_), Element::Grid(x), Element::Grid(y)) => x.iter().zip(y).all(|(p, q)| p <= q),
            (GroundPoset::Stack { .. }, Element::Stack(l, x), Element::Stack(m, y)) => {
                l < m || (l == m && x.iter().zip(y).all(|(p, q)| p <= q))
            }
            (GroundPoset::Product(fs), Element::Tuple(x), Element::Tuple(y)) => {
                fs.iter().zip(x.iter().zip(y)).all(|(f, (p, q))| f.leq(p, q))
            }
            _ => false,
        }
    }

    /// Position of `e` in the canonical enumeration of this ground.
    pub fn index_of(&self, e: &Element) -> Option<u64> {
        if !self.contains(e) {
            return None;
        }
        Some(match (self, e) {
            (GroundPoset::Boolean(_), Element::Set(m)) => *m,
            (GroundPoset::Truncated(_), Element::Set(m)) => m - 1,
            (GroundPoset::Grid(a), Element::Grid(c)) => mixed_radix(a.iter().copied(), c),
            (GroundPoset::Stack { h, d }, Element::Stack(l, c)) => {
                let per = (*h as u64).pow(*d);
                *l as u64 * per + mixed_radix(std::iter::repeat_n(*h, *d as usize), c)
            }
            (GroundPoset::Product(fs), Element::Tuple(parts)) => {
                let mut idx = 0u64;
                for (f, p) in fs.iter().zip(parts) {
                    idx = idx * f.size() + f.index_of(p)?;
                }
                idx
            }
            _ => return None,
        })
    }

    pub fn element_at(&self, idx: u64) -> Option<Element> {
        if idx >= self.try_size().ok()? {
            return None;
        }
        Some(match self {
            GroundPoset::Boolean(_) => Element::Set(idx),
            GroundPoset::Truncated(_) => Element::Set(idx + 1),
            GroundPoset::Grid(a) => Element::Grid(unmix(a, idx)),
            GroundPoset::Stack { h, d } => {
                let per = (*h as u64).pow(*d);
                let dims = vec![*h; *d as usize];
                Element::Stack((idx / per) as u8, unmix(&dims, idx % per))
            }
            GroundPoset::Product(fs) => {
                let mut parts = Vec::with_capacity(fs.len());
                let mut rest = idx;
                for f in fs.iter().rev() {
                    let s = f.size();
                    parts.push(f.element_at(rest % s)?);
                    rest /= s;
                }
                parts.reverse();
                Element::Tuple(parts)
            }
        })
    }

    pub fn elements(&self) -> impl Iterator<Item = Element> + '_ {
        (0..self.size()).map(move |i| self.element_at(i).expect("index in range"))
    }

    pub fn descriptor(&self) -> String {
        match self {
            GroundPoset::Boolean(n) => format!("boolean:{n}"),
            GroundPoset::Truncated(n) => format!("truncated:{n}"),
            GroundPoset::Grid(a) => {
                format!("grid:{}", a.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
            }
            GroundPoset::Stack { h, d } => format!("stack:{h},{d}"),
            GroundPoset::Product(fs) => {
                format!("product:{}", fs.iter().map(|f| f.descriptor()).collect::<Vec<_>>().join("|"))
            }
        }
    }

    pub fn parse_descriptor(s: &str) -> Result<GroundPoset> {
        let bad = |msg: &str| Error::Parse { line: 0, msg: format!("{msg}: {s:?}") };
        let (kind, rest) = s.trim().split_once(':').ok_or_else(|| bad("missing ':'"))?;
        let nums = |r: &str| -> Result<Vec<u32>> {
            r.split(',').map(|t| t.trim().parse::<u32>().map_err(|_| bad("bad number"))).collect()
        };
        match kind {
            "boolean" | "truncated" => {
                let v = nums(rest)?;
                if v.len() != 1 {
                    return Err(bad("expected one number"));
                }
                if kind == "boolean" {
                    GroundPoset::boolean(v[0])
                } else {
                    GroundPoset::truncated(v[0])
                }
            }
            "grid" => {
                let v = nums(rest)?;
                if v.contains(&0) {
                    return Err(bad("grid side must be positive"));
                }
                Ok(GroundPoset::Grid(v))
            }
            "stack" => match nums(rest)?.as_slice() {
                [h, d] if *h > 0 && *d > 0 => Ok(GroundPoset::Stack { h: *h, d: *d }),
                _ => Err(bad("expected stack:h,d")),
            },
            "product" => {
                let fs = rest.split('|').map(GroundPoset::parse_descriptor).collect::<Result<Vec<_>>>()?;
                Ok(GroundPoset::Product(fs))
            }
            _ => Err(bad("unknown ground kind")),
        }
    }

    pub fn format_element(&self, e: &Element) -> String {
        e.to_string()
    }

    pub fn parse_element(&self, s: &str) -> Result<Element> {
        let s = s.trim();
        let bad = || Error::Parse { line: 0, msg: format!("bad element {s:?} for {}", self.descriptor()) };
        let e = match self {
            GroundPoset::Boolean(_) | GroundPoset::Truncated(_) => {
                Element::Set(u64::from_str_radix(s, 16).map_err(|_| bad())?)
            }
            GroundPoset::Grid(_) => Element::Grid(parse_coords(s)?),
            GroundPoset::Stack { .. } => {
                let (l, c) = s.split_once(':').ok_or_else(bad)?;
                Element::Stack(l.parse().map_err(|_| bad())?, parse_coords(c)?)
            }
            GroundPoset::Product(fs) => {
                let parts: Vec<&str> = s.split('/').collect();
                if parts.len() != fs.len() {
                    return Err(bad());
                }
                Element::Tuple(fs.iter().zip(parts).map(|(f, p)| f.parse_element(p)).collect::<Result<_>>()?)
            }
        };
        if !self.contains(&e) {
            return Err(bad());
        }
        Ok(e)
    }
}

fn mixed_radix(dims: impl Iterator<Item = u32>, c: &[u32]) -> u64 {
    dims.zip(c).fold(0u64, |acc, (a, &x)| acc * a as u64 + x as u64)
}

fn unmix(dims: &[u32], mut idx: u64) -> Vec<u32> {
    let mut c = vec![0; dims.len()];
    for i in (0..dims.len()).rev() {
        c[i] = (idx % dims[i] as u64) as u32;
        idx /= dims[i] as u64;
    }
    c
}

/// Bitmask of a 1-based subset.
pub fn set(items: &[u32]) -> u64 {
    items.iter().fold(0, |m, &i| m | 1u64 << (i - 1))
}

/// 1-based members of a bitmask.
pub fn members(mask: u64) -> Vec<u32> {
    (0..64).filter(|i| mask >> i & 1 == 1).map(|i| i + 1).collect()
}

pub fn full(n: u32) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_roundtrip() {
        let gs = [
            GroundPoset::Boolean(3),
            GroundPoset::Truncated(3),
            GroundPoset::Grid(vec![2, 3]),
            GroundPoset::Stack { h: 2, d: 2 },
            GroundPoset::Product(vec![GroundPoset::Boolean(1), GroundPoset::Grid(vec![3])]),
        ];
        for g in gs {
            for i in 0..g.size() {
                let e = g.element_at(i).unwrap();
                assert_eq!(g.index_of(&e), Some(i));
                assert_eq!(g.parse_element(&e.to_string()).unwrap(), e);
            }
            assert_eq!(GroundPoset::parse_descriptor(&g.descriptor()).unwrap(), g);
        }
    }

    #[test]
    fn stack_layers() {
        let g = GroundPoset::Stack { h: 3, d: 2 };
        assert!(g.leq(&Element::Stack(0, vec![2, 2]), &Element::Stack(1, vec![0, 0])));
        assert!(!g.leq(&Element::Stack(0, vec![2, 0]), &Element::Stack(0, vec![0, 2])));
    }

    #[test]
    fn grid_io_is_one_based() {
        let g = GroundPoset::Grid(vec![13, 13]);
        assert_eq!(Element::Grid(vec![0, 12]).to_string(), "1,13");
        assert!(g.parse_element("0,1").is_err());
    }

    #[test]
    fn truncated_excludes_extremes() {
        let g = GroundPoset::Truncated(2);
        assert_eq!(g.elements().collect::<Vec<_>>(), vec![Element::Set(1), Element::Set(2)]);
    }
}
