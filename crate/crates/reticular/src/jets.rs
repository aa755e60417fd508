//! Finite-dimensional jet spaces: truncated polynomials with an indexed
//! monomial basis in graded-lex order.

use std::collections::HashMap;
use std::sync::Arc;

use crate::linalg::SparseVec;
use crate::poly::{CornerPoly, Mono, VarSet};

#[derive(Clone, Debug)]
pub struct JetSpace {
    pub vars: Arc<VarSet>,
    pub l: usize,
    pub min_degree: usize,
    pub basis: Vec<Mono>,
    pub index: HashMap<Mono, usize>,
}

impl JetSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Coordinates of the degree-window jet of p in this basis. Terms below
    /// min_degree or above l are dropped.
    pub fn jet_of(&self, p: &CornerPoly) -> SparseVec {
        assert_eq!(p.vars(), &self.vars, "variable set mismatch");
        let mut entries = Vec::new();
        for (m, c) in p.terms() {
            let d = m.degree();
            if d < self.min_degree || d > self.l {
                continue;
            }
            entries.push((self.index[m], c.clone()));
        }
        entries.sort_by_key(|(i, _)| *i);
        SparseVec::from_sorted(entries)
    }
}

fn enumerate(nvars: usize, min_degree: usize, l: usize) -> Vec<Mono> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; nvars];
    fn rec(v: usize, remaining: usize, cur: &mut Vec<u32>, out: &mut Vec<Mono>) {
        if v + 1 == cur.len() {
            cur[v] = remaining as u32;
            out.push(Mono(cur.clone()));
            return;
        }
        for e in 0..=remaining {
            cur[v] = e as u32;
            rec(v + 1, remaining - e, cur, out);
        }
        cur[v] = 0;
    }
    if nvars == 0 {
        if min_degree == 0 {
            out.push(Mono(Vec::new()));
        }
        return out;
    }
    for d in min_degree..=l {
        rec(0, d, &mut cur, &mut out);
    }
    out.sort();
    out
}

/// Jet space over an arbitrary variable set.
pub fn jet_space(vars: Arc<VarSet>, l: usize, min_degree: usize) -> JetSpace {
    assert!(min_degree <= l, "empty degree window");
    let basis = enumerate(vars.len(), min_degree, l);
    let index = basis
        .iter()
        .enumerate()
        .map(|(i, m)| (m.clone(), i))
        .collect();
    JetSpace {
        vars,
        l,
        min_degree,
        basis,
        index,
    }
}

/// Jet space of E(r;k): monomials with min_degree <= total degree <= l.
pub fn monomial_basis(r: usize, k: usize, l: usize, min_degree: usize) -> JetSpace {
    jet_space(VarSet::germ(r, k), l, min_degree)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn univariate_count() {
        let js = monomial_basis(1, 0, 3, 1);
        assert_eq!(js.dim(), 3);
        let names: Vec<String> = js.basis.iter().map(|m| m.format(&js.vars)).collect();
        assert_eq!(names, vec!["x1", "x1^2", "x1^3"]);
    }

    #[test]
    fn two_variable_basis() {
        let js = monomial_basis(1, 1, 2, 0);
        assert_eq!(js.dim(), 6);
        let names: Vec<String> = js.basis.iter().map(|m| m.format(&js.vars)).collect();
        // ascending graded-lex: y-block sorts before x within a degree
        assert_eq!(names, vec!["1", "y1", "x1", "y1^2", "x1*y1", "x1^2"]);
    }

    #[test]
    fn pure_linear_basis() {
        let js = monomial_basis(0, 2, 1, 1);
        assert_eq!(js.dim(), 2);
    }
}
