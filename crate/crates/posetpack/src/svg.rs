//! SVG diagrams of packings of a 2-dimensional grid.

use crate::error::{Error, Result};
use crate::ground::{Element, GroundPoset};
use crate::packing::Packing;

const CELL: u32 = 24;
const MARGIN: u32 = 8;

/// Colour of copy `i`: hues stepped by the golden angle.
pub fn palette(i: usize) -> String {
    let hue = (i as f64 * 137.507_764) % 360.0;
    format!("hsl({hue:.1},65%,55%)")
}

/// Cell ownership: `owner[x][y]` is the copy covering grid point `(x, y)`.
pub fn owners(packing: &Packing) -> Result<Vec<Vec<Option<usize>>>> {
    let (a, b) = match &packing.ground {
        GroundPoset::Grid(d) if d.len() == 2 => (d[0] as usize, d[1] as usize),
        g => return Err(Error::Dimension(g.descriptor())),
    };
    let mut owner = vec![vec![None; b]; a];
    for (i, c) in packing.copies.iter().enumerate() {
        for e in &c.image {
            match e {
                Element::Grid(v) if v.len() == 2 && (v[0] as usize) < a && (v[1] as usize) < b => {
                    owner[v[0] as usize][v[1] as usize] = Some(i)
                }
                _ => return Err(Error::Precondition(format!("{e} is not a point of the grid"))),
            }
        }
    }
    Ok(owner)
}

/// First coordinate runs left to right, second bottom to top.
pub fn render(packing: &Packing) -> Result<String> {
    let owner = owners(packing)?;
    let (a, b) = (owner.len() as u32, owner.first().map_or(0, |r| r.len()) as u32);
    let (w, h) = (a * CELL + 2 * MARGIN, b * CELL + 2 * MARGIN);
    let mut s = String::new();
    s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    s += &format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n"
    );
    s += &format!("<rect x=\"0\" y=\"0\" width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n");
    for (i, c) in packing.copies.iter().enumerate() {
        s += &format!("<g class=\"copy\" id=\"copy{i}\" fill=\"{}\">\n", palette(i));
        for e in &c.image {
            if let Element::Grid(v) = e {
                let (x, y) = cell_origin(v[0], v[1], b);
                s += &format!("<rect x=\"{x}\" y=\"{y}\" width=\"{CELL}\" height=\"{CELL}\"/>\n");
            }
        }
        s += "</g>\n";
    }
    s += "<g class=\"grid\" fill=\"none\" stroke=\"#444\" stroke-width=\"1\">\n";
    for (gx, col) in owner.iter().enumerate() {
        for (gy, o) in col.iter().enumerate() {
            let (x, y) = cell_origin(gx as u32, gy as u32, b);
            let class = if o.is_some() { "cell" } else { "cell empty" };
            s += &format!("<rect class=\"{class}\" x=\"{x}\" y=\"{y}\" width=\"{CELL}\" height=\"{CELL}\"/>\n");
        }
    }
    s += "</g>\n</svg>\n";
    Ok(s)
}

fn cell_origin(gx: u32, gy: u32, rows: u32) -> (u32, u32) {
    (MARGIN + gx * CELL, MARGIN + (rows - 1 - gy) * CELL)
}

pub fn emit_svg(packing: &Packing, path: &std::path::Path) -> Result<()> {
    std::fs::write(path, render(packing)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::packing::CopySet;

    #[test]
    fn empty_and_single() {
        let g = GroundPoset::Grid(vec![3, 2]);
        let s = render(&Packing::new(g.clone())).unwrap();
        assert_eq!(s.matches("cell empty").count(), 6);
        assert_eq!(s.matches("class=\"copy\"").count(), 0);
        let one = Packing::with_copies(g, vec![CopySet::new(vec![Element::Grid(vec![0, 0]), Element::Grid(vec![1, 1])])]);
        let s = render(&one).unwrap();
        assert_eq!(s.matches("class=\"copy\"").count(), 1);
        assert_eq!(s.matches("cell empty").count(), 4);
    }

    #[test]
    fn rejects_other_grounds() {
        assert!(matches!(render(&Packing::new(GroundPoset::Grid(vec![3]))), Err(Error::Dimension(_))));
        assert!(matches!(render(&Packing::new(GroundPoset::Boolean(2))), Err(Error::Dimension(_))));
    }
}
