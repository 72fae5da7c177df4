//! Coordinate symmetry diagrams.
//!
//! One row per ground-set coordinate and one column per fibre point. Cells in
//! a row share a colour iff the points agree in that coordinate. Rows where
//! every point agrees are drawn black, rows where all points differ white.

use std::fmt::Write;

use crate::homotopy::{coordinate_partitions, Fibre};
use crate::simplex::{FaceKey, GroundSet, SimplexError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowKind {
    Constant,
    Distinct,
    Mixed,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiagramRow {
    pub face: FaceKey,
    pub in_basis: bool,
    /// Block id per point, numbered by first appearance.
    pub labels: Vec<usize>,
    pub kind: RowKind,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SymmetryDiagram {
    pub rows: Vec<DiagramRow>,
    pub points: usize,
}

const PALETTE: [&str; 12] = [
    "#e41a1c", "#377eb8", "#4daf4a", "#984ea3", "#ff7f00", "#ffff33", "#a65628", "#f781bf", "#66c2a5", "#8da0cb",
    "#e5c494", "#b3b3b3",
];

/// Builds the diagram of `f`, grouping values within `tol` (relative).
pub fn symmetry_diagram(f: &Fibre, tol: f64) -> Result<SymmetryDiagram, SimplexError> {
    let ground = GroundSet::new(f.basis.n())?;
    let d = f.len();
    let rows = coordinate_partitions(f, tol)
        .into_iter()
        .map(|p| {
            let raw = p.blocks.labels();
            let mut seen: Vec<usize> = Vec::new();
            let labels: Vec<usize> = raw
                .iter()
                .map(|l| {
                    seen.iter().position(|s| s == l).unwrap_or_else(|| {
                        seen.push(*l);
                        seen.len() - 1
                    })
                })
                .collect();
            let kind = if seen.len() <= 1 {
                RowKind::Constant
            } else if seen.len() == d {
                RowKind::Distinct
            } else {
                RowKind::Mixed
            };
            DiagramRow { face: ground.face(p.coordinate), in_basis: f.basis.contains_index(p.coordinate), labels, kind }
        })
        .collect();
    Ok(SymmetryDiagram { rows, points: d })
}

impl SymmetryDiagram {
    /// Plain text: `#` constant, `.` all distinct, letters for blocks.
    /// Basis coordinates are marked with `*`.
    pub fn to_text(&self) -> String {
        let width = self.rows.iter().map(|r| r.face.to_string().len()).max().unwrap_or(0);
        let mut out = String::new();
        for r in &self.rows {
            let cells: Vec<String> = r
                .labels
                .iter()
                .map(|&l| match r.kind {
                    RowKind::Constant => "#".to_string(),
                    RowKind::Distinct => ".".to_string(),
                    RowKind::Mixed => char::from_u32('a' as u32 + (l % 26) as u32).expect("ascii").to_string(),
                })
                .collect();
            let mark = if r.in_basis { '*' } else { ' ' };
            writeln!(out, "{:>width$}{mark} {}", r.face.to_string(), cells.join(" ")).expect("string write");
        }
        out
    }

    /// A standalone SVG document.
    pub fn to_svg(&self) -> String {
        const CELL: usize = 24;
        const LABEL: usize = 64;
        let (w, h) = (LABEL + CELL * self.points.max(1), CELL * self.rows.len());
        let mut out = String::new();
        writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="monospace" font-size="12">"#)
            .expect("string write");
        for (i, r) in self.rows.iter().enumerate() {
            let y = i * CELL;
            let weight = if r.in_basis { "bold" } else { "normal" };
            writeln!(out, r#"  <text x="4" y="{}" font-weight="{weight}">{}</text>"#, y + CELL * 2 / 3, r.face)
                .expect("string write");
            for (j, &l) in r.labels.iter().enumerate() {
                let fill = match r.kind {
                    RowKind::Constant => "#000000",
                    RowKind::Distinct => "#ffffff",
                    RowKind::Mixed => PALETTE[l % PALETTE.len()],
                };
                writeln!(
                    out,
                    r##"  <rect x="{}" y="{y}" width="{CELL}" height="{CELL}" fill="{fill}" stroke="#808080"/>"##,
                    LABEL + j * CELL
                )
                .expect("string write");
            }
        }
        out.push_str("</svg>\n");
        out
    }
}
