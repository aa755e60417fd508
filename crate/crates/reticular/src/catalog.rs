//! The normal-form tables as data: simple germs and the generic
//! caustic/wavefront families, with lookup and enumeration.
//!
//! Families are stored with corrected coefficients where the printed source
//! tables carry typos; `paper_label` keeps the text exactly as printed so the
//! original is recoverable. C-series entries are normalized to `xy ± y^l`
//! (the sign on the pure power), which names two distinct classes for every
//! l; the printed `±xy + y^l` form does not for even l.

use std::sync::OnceLock;

use thiserror::Error;

use crate::local::Mode;
use crate::parse::parse_in;
use crate::poly::{CornerPoly, VarSet};
use crate::unfold::{FamilyKind, GeneratingFamily};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CatalogError {
    #[error("unknown catalog key `{0}` for kind {1:?}")]
    UnknownKey(String, FamilyKind),
}

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub key: String,
    pub germ: CornerPoly,
    pub family: GeneratingFamily,
    pub mode: Mode,
    pub r: usize,
    pub n: usize,
    pub paper_label: String,
}

impl CatalogEntry {
    pub fn kind(&self) -> FamilyKind {
        self.family.kind
    }
}

struct Row {
    key: &'static str,
    r: usize,
    k: usize,
    n: usize,
    germ: &'static str,
    family: &'static str,
    label: &'static str,
}

const LAGRANGIAN_ROWS: &[Row] = &[
    Row { key: "A2", r: 0, k: 1, n: 1, germ: "y1^3", family: "y1^3 + q1*y1", label: "A_2:F(y_1,q_1)=y_1^3+q_1y_1" },
    Row { key: "A3+", r: 0, k: 1, n: 2, germ: "y1^4", family: "y1^4 + q1*y1^2 + q2*y1", label: "A^\\pm_3:F(y_1,q_1,q_2)=\\pm y_1^4+q_1y_1^2+q_2y_1" },
    Row { key: "A3-", r: 0, k: 1, n: 2, germ: "-y1^4", family: "-y1^4 + q1*y1^2 + q2*y1", label: "A^\\pm_3:F(y_1,q_1,q_2)=\\pm y_1^4+q_1y_1^2+q_2y_1" },
    Row { key: "A4", r: 0, k: 1, n: 3, germ: "y1^5", family: "y1^5 + q1*y1^3 + q2*y1^2 + q3*y1", label: "A_4:F(y_1,q_1,q_2,q_3)= y_1^5+q_1y_1^3+q_2y_1^2+q_3y_1" },
    Row { key: "A5+", r: 0, k: 1, n: 4, germ: "y1^6", family: "y1^6 + q1*y1^4 + q2*y1^3 + q3*y1^2 + q4*y1", label: "A^\\pm_5:F(y_1,q_1,q_2,q_3,q_4)= \\pm y_1^6+q_1y_1^4+q_2y_1^3+q_3y_1^2+q_4y_1" },
    Row { key: "A5-", r: 0, k: 1, n: 4, germ: "-y1^6", family: "-y1^6 + q1*y1^4 + q2*y1^3 + q3*y1^2 + q4*y1", label: "A^\\pm_5:F(y_1,q_1,q_2,q_3,q_4)= \\pm y_1^6+q_1y_1^4+q_2y_1^3+q_3y_1^2+q_4y_1" },
    Row { key: "A6", r: 0, k: 1, n: 5, germ: "y1^7", family: "y1^7 + q1*y1^5 + q2*y1^4 + q3*y1^3 + q4*y1^2 + q5*y1", label: "A_6:F(y_1,q_1,q_2,q_3,q_4,q_5)= y_1^7+q_1y_1^5+q_2y_1^4+q_3y_1^3+q_4y_1^2+q_5y_1" },
    Row { key: "D4+", r: 0, k: 2, n: 3, germ: "y1^2*y2 + y2^3", family: "y1^2*y2 + y2^3 + q1*y2^2 + q2*y2 + q3*y1", label: "D^\\pm_4:F(y_1,y_2,q_1,q_2,q_3)=y_1^2y_2\\pm y_2^3+q_1y_2^2+q_2y_2+q_3y_1" },
    Row { key: "D4-", r: 0, k: 2, n: 3, germ: "y1^2*y2 - y2^3", family: "y1^2*y2 - y2^3 + q1*y2^2 + q2*y2 + q3*y1", label: "D^\\pm_4:F(y_1,y_2,q_1,q_2,q_3)=y_1^2y_2\\pm y_2^3+q_1y_2^2+q_2y_2+q_3y_1" },
    Row { key: "D5+", r: 0, k: 2, n: 4, germ: "y1^2*y2 + y2^4", family: "y1^2*y2 + y2^4 + q1*y2^3 + q2*y2^2 + q3*y2 + q4*y1", label: "D^\\pm_5:F(y_1,y_2,q_1,q_2,q_3,q_4)=y_1^2y_2\\pm y_2^4+q_1y_2^3+q_2y_2^2+q_3y_2+q_4y_1" },
    Row { key: "D5-", r: 0, k: 2, n: 4, germ: "y1^2*y2 - y2^4", family: "y1^2*y2 - y2^4 + q1*y2^3 + q2*y2^2 + q3*y2 + q4*y1", label: "D^\\pm_5:F(y_1,y_2,q_1,q_2,q_3,q_4)=y_1^2y_2\\pm y_2^4+q_1y_2^3+q_2y_2^2+q_3y_2+q_4y_1" },
    Row { key: "D6+", r: 0, k: 2, n: 5, germ: "y1^2*y2 + y2^5", family: "y1^2*y2 + y2^5 + q1*y2^4 + q2*y2^3 + q3*y2^2 + q4*y2 + q5*y1", label: "D^\\pm_6:F(y_1,y_2,q_1,q_2,q_3,q_4,q_5)=y_1^2y_2\\pm  y_2^5+q_1y_2^4+q_2y_2^3+q_3y_2^2+q_4y_2+q_5y_1" },
    Row { key: "D6-", r: 0, k: 2, n: 5, germ: "y1^2*y2 - y2^5", family: "y1^2*y2 - y2^5 + q1*y2^4 + q2*y2^3 + q3*y2^2 + q4*y2 + q5*y1", label: "D^\\pm_6:F(y_1,y_2,q_1,q_2,q_3,q_4,q_5)=y_1^2y_2\\pm  y_2^5+q_1y_2^4+q_2y_2^3+q_3y_2^2+q_4y_2+q_5y_1" },
    Row { key: "E6+", r: 0, k: 2, n: 5, germ: "y1^3 + y2^4", family: "y1^3 + y2^4 + q1*y1*y2^2 + q2*y1*y2 + q3*y2^2 + q4*y1 + q5*y2", label: "E^\\pm_6:F(y_1,y_2,q_1,q_2,q_3,q_4,q_5)=y_1^3\\pm  y_2^4+q_1y_1y_2^2+q_2y_1y_2+q_3y_2^2+q_4y_1+q_5y_2" },
    Row { key: "E6-", r: 0, k: 2, n: 5, germ: "y1^3 - y2^4", family: "y1^3 - y2^4 + q1*y1*y2^2 + q2*y1*y2 + q3*y2^2 + q4*y1 + q5*y2", label: "E^\\pm_6:F(y_1,y_2,q_1,q_2,q_3,q_4,q_5)=y_1^3\\pm  y_2^4+q_1y_1y_2^2+q_2y_1y_2+q_3y_2^2+q_4y_1+q_5y_2" },
    Row { key: "B2+", r: 1, k: 0, n: 1, germ: "x1^2", family: "x1^2 + q1*x1", label: "B^\\pm_2:F(x,q_1)=\\pm x^2+q_1x" },
    Row { key: "B2-", r: 1, k: 0, n: 1, germ: "-x1^2", family: "-x1^2 + q1*x1", label: "B^\\pm_2:F(x,q_1)=\\pm x^2+q_1x" },
    Row { key: "B3+", r: 1, k: 0, n: 2, germ: "x1^3", family: "x1^3 + q1*x1^2 + q2*x1", label: "B^\\pm_3:F(x,q_1,q_2)=\\pm x^3+q_1x^2+q_2x" },
    Row { key: "B3-", r: 1, k: 0, n: 2, germ: "-x1^3", family: "-x1^3 + q1*x1^2 + q2*x1", label: "B^\\pm_3:F(x,q_1,q_2)=\\pm x^3+q_1x^2+q_2x" },
    Row { key: "B4+", r: 1, k: 0, n: 3, germ: "x1^4", family: "x1^4 + q1*x1^3 + q2*x1^2 + q3*x1", label: "B^\\pm_4:F(x,q_1,q_2,q_3)=\\pm x^4+q_1x^3+q_2x^2+q_1x" },
    Row { key: "B4-", r: 1, k: 0, n: 3, germ: "-x1^4", family: "-x1^4 + q1*x1^3 + q2*x1^2 + q3*x1", label: "B^\\pm_4:F(x,q_1,q_2,q_3)=\\pm x^4+q_1x^3+q_2x^2+q_1x" },
    Row { key: "C3+", r: 1, k: 1, n: 2, germ: "x1*y1 + y1^3", family: "x1*y1 + y1^3 + q1*y1^2 + q2*y1", label: "C^\\pm_3:F(x,y,q_1,q_2)=\\pm xy+y^3+q_1y^2+q_2y" },
    Row { key: "C3-", r: 1, k: 1, n: 2, germ: "x1*y1 - y1^3", family: "x1*y1 - y1^3 + q1*y1^2 + q2*y1", label: "C^\\pm_3:F(x,y,q_1,q_2)=\\pm xy+y^3+q_1y^2+q_2y" },
    Row { key: "C4+", r: 1, k: 1, n: 3, germ: "x1*y1 + y1^4", family: "x1*y1 + y1^4 + q1*y1^3 + q2*y1^2 + q3*y1", label: "C^\\pm_4:F(x,y,q_1,q_2,q_3)=\\pm xy+y^4+q_1y^3+q_2y^2+q_3y" },
    Row { key: "C4-", r: 1, k: 1, n: 3, germ: "x1*y1 - y1^4", family: "x1*y1 - y1^4 + q1*y1^3 + q2*y1^2 + q3*y1", label: "C^\\pm_4:F(x,y,q_1,q_2,q_3)=\\pm xy+y^4+q_1y^3+q_2y^2+q_3y" },
    Row { key: "F4+", r: 1, k: 1, n: 3, germ: "x1^2 + y1^3", family: "x1^2 + y1^3 + q1*x1*y1 + q2*x1 + q3*y1", label: "F^\\pm_4:F(x,y,q_1,q_2,q_3)=\\pm x^2+y^3+q_1xy+q_2x+q_3y" },
    Row { key: "F4-", r: 1, k: 1, n: 3, germ: "-x1^2 + y1^3", family: "-x1^2 + y1^3 + q1*x1*y1 + q2*x1 + q3*y1", label: "F^\\pm_4:F(x,y,q_1,q_2,q_3)=\\pm x^2+y^3+q_1xy+q_2x+q_3y" },
];

const LEGENDRIAN_ROWS: &[Row] = &[
    Row { key: "A1", r: 0, k: 1, n: 0, germ: "y1^2", family: "y1^2 + z", label: "A_2:F(y_1,z)=y_1^2+z" },
    Row { key: "A2", r: 0, k: 1, n: 1, germ: "y1^3", family: "y1^3 + q1*y1 + z", label: "A_2:F(y_1,q_1,z)=y_1^3+q_1y_1+z" },
    Row { key: "A3", r: 0, k: 1, n: 2, germ: "y1^4", family: "y1^4 + q1*y1^2 + q2*y1 + z", label: "A_3:F(y_1,q_1,q_2,z)= y_1^4+q_1y_1^2+q_2y_1+z" },
    Row { key: "A4", r: 0, k: 1, n: 3, germ: "y1^5", family: "y1^5 + q1*y1^3 + q2*y1^2 + q3*y1 + z", label: "A_4:F(y_1,q_1,q_2,q_3)= y_1^5+q_1y_1^3+q_2y_1^2+q_3y_1+z" },
    Row { key: "A5", r: 0, k: 1, n: 4, germ: "y1^6", family: "y1^6 + q1*y1^4 + q2*y1^3 + q3*y1^2 + q4*y1 + z", label: "A_5:F(y_1,q_1,q_2,q_3,q_4)=  y_1^6+q_1y_1^4+q_2y_1^3+q_3y_1^2+q_4y_1+z" },
    Row { key: "A6", r: 0, k: 1, n: 5, germ: "y1^7", family: "y1^7 + q1*y1^5 + q2*y1^4 + q3*y1^3 + q4*y1^2 + q5*y1 + z", label: "A_6:F(y_1,q_1,q_2,q_3,q_4,q_5,z)= y_1^7+q_1y_1^5+q_2y_1^4+q_3y_1^3+q_4y_1^2+q_5y_1+z" },
    Row { key: "D4+", r: 0, k: 2, n: 3, germ: "y1^2*y2 + y2^3", family: "y1^2*y2 + y2^3 + q1*y2^2 + q2*y2 + q3*y1 + z", label: "D^\\pm_4:F(y_1,y_2,q_1,q_2,q_3,z)=y_1^2y_2\\pm y_2^3+q_1y_2^2+q_2y_2+q_3y_1+z" },
    Row { key: "D4-", r: 0, k: 2, n: 3, germ: "y1^2*y2 - y2^3", family: "y1^2*y2 - y2^3 + q1*y2^2 + q2*y2 + q3*y1 + z", label: "D^\\pm_4:F(y_1,y_2,q_1,q_2,q_3,z)=y_1^2y_2\\pm y_2^3+q_1y_2^2+q_2y_2+q_3y_1+z" },
    Row { key: "D5", r: 0, k: 2, n: 4, germ: "y1^2*y2 + y2^4", family: "y1^2*y2 + y2^4 + q1*y2^3 + q2*y2^2 + q3*y2 + q4*y1 + z", label: "D_5:F(y_1,y_2,q_1,q_2,q_3,q_4,z)=y_1^2y_2+ y_2^4+q_1y_2^3+q_2y_2^2+q_3y_2+q_4y_1+z" },
    Row { key: "D6+", r: 0, k: 2, n: 5, germ: "y1^2*y2 + y2^5", family: "y1^2*y2 + y2^5 + q1*y2^4 + q2*y2^3 + q3*y2^2 + q4*y2 + q5*y1 + z", label: "D^\\pm_6:F(y_1,y_2,q_1,q_2,q_3,q_4,q_5,z)=y_1^2y_2\\pm  y_2^5+q_1y_2^4+q_2y_2^3+q_3y_2^2+q_4y_2+q_5y_1+z" },
    Row { key: "D6-", r: 0, k: 2, n: 5, germ: "y1^2*y2 - y2^5", family: "y1^2*y2 - y2^5 + q1*y2^4 + q2*y2^3 + q3*y2^2 + q4*y2 + q5*y1 + z", label: "D^\\pm_6:F(y_1,y_2,q_1,q_2,q_3,q_4,q_5,z)=y_1^2y_2\\pm  y_2^5+q_1y_2^4+q_2y_2^3+q_3y_2^2+q_4y_2+q_5y_1+z" },
    Row { key: "E6", r: 0, k: 2, n: 5, germ: "y1^3 + y2^4", family: "y1^3 + y2^4 + q1*y1*y2^2 + q2*y1*y2 + q3*y2^2 + q4*y1 + q5*y2 + z", label: "E_6:F(y_1,y_2,q_1,q_2,q_3,q_4,q_5,z)=y_1^3+ y_2^4+q_1y_1y_2^2+q_2y_1y_2+q_3y_2^2+q_4y_1+q_5y_2+z" },
    Row { key: "B2", r: 1, k: 0, n: 1, germ: "x1^2", family: "x1^2 + q1*x1 + z", label: "B_2:F(x,q_1,z)= x^2+q_1x+z" },
    Row { key: "B3", r: 1, k: 0, n: 2, germ: "x1^3", family: "x1^3 + q1*x1^2 + q2*x1 + z", label: "B_3:F(x,q_1,q_2,z)=x^3+q_1x^2+q_2x+z" },
    Row { key: "B4", r: 1, k: 0, n: 3, germ: "x1^4", family: "x1^4 + q1*x1^3 + q2*x1^2 + q3*x1 + z", label: "B_4:F(x,q_1,q_2,q_3,z)=x^4+q_1x^3+q_2x^2+q_1x+z" },
    Row { key: "C3e+", r: 1, k: 1, n: 2, germ: "x1*y1 + y1^3", family: "x1*y1 + y1^3 + q1*y1^2 + q2*y1 + z", label: "C^\\pm_3:F(x,y,q_1,q_2,z)=\\pm xy+y^3+q_1y^2+q_2y+z" },
    Row { key: "C3e-", r: 1, k: 1, n: 2, germ: "x1*y1 - y1^3", family: "x1*y1 - y1^3 + q1*y1^2 + q2*y1 + z", label: "C^\\pm_3:F(x,y,q_1,q_2,z)=\\pm xy+y^3+q_1y^2+q_2y+z" },
    Row { key: "C4", r: 1, k: 1, n: 3, germ: "x1*y1 + y1^4", family: "x1*y1 + y1^4 + q1*y1^3 + q2*y1^2 + q3*y1 + z", label: "C_4:F(x,y,q_1,q_2,q_3,z)=xy+y^4+q_1y^3+q_2y^2+q_3y+z" },
    Row { key: "F4", r: 1, k: 1, n: 3, germ: "x1^2 + y1^3", family: "x1^2 + y1^3 + q1*x1*y1 + q2*x1 + q3*y1 + z", label: "F_4:F(x,y,q_1,q_2,q_3,z)=x^2+y^3+q_1xy+q_2x+q_3y+z" },
];

fn build(rows: &[Row], kind: FamilyKind) -> Vec<CatalogEntry> {
    rows.iter()
        .map(|row| {
            let gvars = VarSet::germ(row.r, row.k);
            let germ = parse_in(row.germ, gvars).expect("catalog germ parses");
            let mut params: Vec<String> = (1..=row.n).map(|i| format!("q{i}")).collect();
            if kind == FamilyKind::Legendrian {
                params.push("z".to_string());
            }
            let fvars = VarSet::new(row.r, row.k, params);
            let poly = parse_in(row.family, fvars).expect("catalog family parses");
            let family = GeneratingFamily::new(poly, kind).expect("catalog family well formed");
            CatalogEntry {
                key: row.key.to_string(),
                germ,
                family,
                mode: match kind {
                    FamilyKind::Lagrangian => Mode::R,
                    FamilyKind::Legendrian => Mode::K,
                },
                r: row.r,
                n: row.n,
                paper_label: row.label.to_string(),
            }
        })
        .collect()
}

fn lagrangian() -> &'static [CatalogEntry] {
    static CELL: OnceLock<Vec<CatalogEntry>> = OnceLock::new();
    CELL.get_or_init(|| build(LAGRANGIAN_ROWS, FamilyKind::Lagrangian))
}

fn legendrian() -> &'static [CatalogEntry] {
    static CELL: OnceLock<Vec<CatalogEntry>> = OnceLock::new();
    CELL.get_or_init(|| build(LEGENDRIAN_ROWS, FamilyKind::Legendrian))
}

pub fn entries(kind: FamilyKind) -> &'static [CatalogEntry] {
    match kind {
        FamilyKind::Lagrangian => lagrangian(),
        FamilyKind::Legendrian => legendrian(),
    }
}

/// Normalize a lookup key: Legendrian odd-C entries accept the sign form
/// without the epsilon tag ("C3+" for "C3e+"), and vice versa.
fn normalize_key(key: &str, kind: FamilyKind) -> String {
    let k = key.trim();
    match kind {
        FamilyKind::Lagrangian => k.replace('e', ""),
        FamilyKind::Legendrian => {
            if !k.contains('e') && (k.ends_with('+') || k.ends_with('-')) && k.starts_with('C') {
                let (head, sgn) = k.split_at(k.len() - 1);
                // only the odd-index C entries carry an epsilon tag
                if entries(kind)
                    .iter()
                    .any(|e| e.key == format!("{head}e{sgn}"))
                {
                    return format!("{head}e{sgn}");
                }
            }
            k.to_string()
        }
    }
}

pub fn get(key: &str, kind: FamilyKind) -> Result<&'static CatalogEntry, CatalogError> {
    let norm = normalize_key(key, kind);
    entries(kind)
        .iter()
        .find(|e| e.key == norm)
        .ok_or_else(|| CatalogError::UnknownKey(key.to_string(), kind))
}

/// All entries with the given corner count and parameter bound.
pub fn list(r: usize, kind: FamilyKind, n_max: usize) -> Vec<&'static CatalogEntry> {
    entries(kind)
        .iter()
        .filter(|e| e.r == r && e.n <= n_max)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::classify;
    use crate::local::{codimension, Codim};
    use crate::unfold::check_versality;

    #[test]
    fn get_examples() {
        let f4 = get("F4+", FamilyKind::Lagrangian).unwrap();
        assert_eq!(
            f4.family.to_string(),
            "y1*q3 + x1*q2 + x1^2 + y1^3 + x1*y1*q1"
        );
        let c3 = get("C3+", FamilyKind::Legendrian).unwrap();
        assert_eq!(c3.key, "C3e+");
        assert_eq!(c3.family.to_string(), "z + y1*q2 + x1*y1 + y1^2*q1 + y1^3");
        let a2 = get("A2", FamilyKind::Lagrangian).unwrap();
        assert_eq!(a2.family.to_string(), "y1*q1 + y1^3");
        assert!(get("Z9", FamilyKind::Lagrangian).is_err());
    }

    #[test]
    fn list_examples() {
        let keys = |r, kind, n| -> Vec<String> {
            list(r, kind, n).iter().map(|e| e.key.clone()).collect()
        };
        assert_eq!(
            keys(1, FamilyKind::Lagrangian, 3),
            vec![
                "B2+", "B2-", "B3+", "B3-", "B4+", "B4-", "C3+", "C3-", "C4+", "C4-", "F4+", "F4-"
            ]
        );
        assert_eq!(
            keys(1, FamilyKind::Legendrian, 4),
            vec!["B2", "B3", "B4", "C3e+", "C3e-", "C4", "F4"]
        );
        assert_eq!(keys(0, FamilyKind::Lagrangian, 1), vec!["A2"]);
    }

    #[test]
    fn entries_have_consistent_base_and_codim() {
        for e in entries(FamilyKind::Lagrangian) {
            assert_eq!(e.family.base(), e.germ, "{}", e.key);
            let rep = codimension(&e.germ, Mode::R).unwrap();
            assert_eq!(rep.codim, Codim::Finite(e.n), "{}", e.key);
        }
        for e in entries(FamilyKind::Legendrian) {
            assert_eq!(e.family.base(), e.germ, "{}", e.key);
            let rep = codimension(&e.germ, Mode::K).unwrap();
            assert_eq!(rep.codim, Codim::Finite(e.n + 1), "{}", e.key);
        }
    }

    #[test]
    fn entries_classify_to_their_keys() {
        for e in entries(FamilyKind::Lagrangian)
            .iter()
            .chain(entries(FamilyKind::Legendrian))
        {
            let out = classify(&e.germ, e.mode).unwrap();
            assert_eq!(out.label(), e.key, "germ {}", e.germ);
        }
    }

    #[test]
    fn entries_are_versal() {
        for e in entries(FamilyKind::Lagrangian)
            .iter()
            .chain(entries(FamilyKind::Legendrian))
        {
            assert!(check_versality(&e.family, e.mode).unwrap(), "{}", e.key);
        }
    }

    #[test]
    fn entries_are_nondegenerate() {
        use crate::geom::{check_c_nondegenerate, check_s_nondegenerate};
        for e in entries(FamilyKind::Lagrangian) {
            assert!(check_s_nondegenerate(&e.family), "{}", e.key);
        }
        for e in entries(FamilyKind::Legendrian) {
            assert!(check_c_nondegenerate(&e.family), "{}", e.key);
        }
    }
}
