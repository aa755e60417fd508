//! Exact sparse Gaussian elimination over the rationals.
//!
//! `Reducer` keeps a set of pivot rows (pivot coefficient normalized to 1)
//! and reduces incoming rows against them. The pivot column set of a row
//! space does not depend on insertion order, so quotient bases read off the
//! non-pivot columns deterministically.

use std::collections::BTreeMap;

use num::{One, Zero};

use crate::poly::Coef;

/// Sparse vector: (column, coefficient) pairs sorted by column, no zeros.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseVec {
    entries: Vec<(usize, Coef)>,
}

impl SparseVec {
    pub fn from_sorted(entries: Vec<(usize, Coef)>) -> Self {
        debug_assert!(entries.windows(2).all(|w| w[0].0 < w[1].0));
        debug_assert!(entries.iter().all(|(_, c)| !c.is_zero()));
        SparseVec { entries }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn leading(&self) -> Option<(usize, &Coef)> {
        self.entries.first().map(|(i, c)| (*i, c))
    }

    pub fn iter(&self) -> impl Iterator<Item = &(usize, Coef)> {
        self.entries.iter()
    }

    pub fn scale(&mut self, s: &Coef) {
        for (_, c) in self.entries.iter_mut() {
            *c = c.clone() * s;
        }
    }

    /// self += s * other (merged in one pass).
    pub fn axpy(&mut self, s: &Coef, other: &SparseVec) {
        if s.is_zero() || other.is_zero() {
            return;
        }
        let mut out = Vec::with_capacity(self.entries.len() + other.entries.len());
        let mut a = self.entries.iter().peekable();
        let mut b = other.entries.iter().peekable();
        loop {
            match (a.peek(), b.peek()) {
                (Some((ia, _)), Some((ib, _))) if ia == ib => {
                    let (_, ca) = a.next().unwrap();
                    let (_, cb) = b.next().unwrap();
                    let v = ca.clone() + s.clone() * cb;
                    if !v.is_zero() {
                        out.push((*ia, v));
                    }
                }
                (Some((ia, _)), Some((ib, _))) if ia < ib => {
                    let (i, c) = a.next().unwrap();
                    out.push((*i, c.clone()));
                }
                (Some(_), Some(_)) => {
                    let (i, c) = b.next().unwrap();
                    out.push((*i, s.clone() * c));
                }
                (Some(_), None) => {
                    let (i, c) = a.next().unwrap();
                    out.push((*i, c.clone()));
                }
                (None, Some(_)) => {
                    let (i, c) = b.next().unwrap();
                    out.push((*i, s.clone() * c));
                }
                (None, None) => break,
            }
        }
        self.entries = out;
    }
}

/// Incremental row reducer: a triangular basis of the row space.
#[derive(Clone, Debug, Default)]
pub struct Reducer {
    pivots: BTreeMap<usize, SparseVec>,
}

impl Reducer {
    pub fn new() -> Self {
        Reducer::default()
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn pivot_cols(&self) -> impl Iterator<Item = usize> + '_ {
        self.pivots.keys().copied()
    }

    pub fn has_pivot(&self, col: usize) -> bool {
        self.pivots.contains_key(&col)
    }

    /// Reduce a row against the current pivots; returns the remainder.
    pub fn reduce(&self, mut row: SparseVec) -> SparseVec {
        loop {
            let Some((lead, c)) = row.leading().map(|(i, c)| (i, c.clone())) else {
                return row;
            };
            match self.pivots.get(&lead) {
                Some(p) => {
                    let s = -c;
                    row.axpy(&s, p);
                }
                None => return row,
            }
        }
    }

    /// Insert a row; returns the new pivot column if the row enlarged the span.
    pub fn insert(&mut self, row: SparseVec) -> Option<usize> {
        let mut rem = self.reduce(row);
        let (lead, c) = rem.leading().map(|(i, c)| (i, c.clone()))?;
        let inv = Coef::one() / c;
        rem.scale(&inv);
        self.pivots.insert(lead, rem);
        Some(lead)
    }

    /// True iff the row lies in the current span.
    pub fn contains(&self, row: SparseVec) -> bool {
        self.reduce(row).is_zero()
    }
}

/// Rank of a dense rational matrix (used for the small non-degeneracy checks).
pub fn dense_rank(mut m: Vec<Vec<Coef>>) -> usize {
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let mut rank = 0;
    let mut row = 0;
    for col in 0..cols {
        let Some(p) = (row..rows).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(row, p);
        let inv = Coef::one() / m[row][col].clone();
        for c in col..cols {
            m[row][c] = m[row][c].clone() * inv.clone();
        }
        for i in 0..rows {
            if i != row && !m[i][col].is_zero() {
                let f = m[i][col].clone();
                for c in col..cols {
                    m[i][c] = m[i][c].clone() - f.clone() * m[row][c].clone();
                }
            }
        }
        rank += 1;
        row += 1;
        if row == rows {
            break;
        }
    }
    rank
}

/// Solve A x = b for a square exact system; None if A is singular.
pub fn solve_dense(a: &[Vec<Coef>], b: &[Coef]) -> Option<Vec<Coef>> {
    let n = a.len();
    let mut m: Vec<Vec<Coef>> = a
        .iter()
        .zip(b.iter())
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    for col in 0..n {
        let p = (col..n).find(|&i| !m[i][col].is_zero())?;
        m.swap(col, p);
        let inv = Coef::one() / m[col][col].clone();
        for c in col..=n {
            m[col][c] = m[col][c].clone() * inv.clone();
        }
        for i in 0..n {
            if i != col && !m[i][col].is_zero() {
                let f = m[i][col].clone();
                for c in col..=n {
                    m[i][c] = m[i][c].clone() - f.clone() * m[col][c].clone();
                }
            }
        }
    }
    Some(m.into_iter().map(|row| row[n].clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::coef;

    fn sv(pairs: &[(usize, i64)]) -> SparseVec {
        SparseVec::from_sorted(pairs.iter().map(|&(i, c)| (i, coef(c))).collect())
    }

    #[test]
    fn pivot_columns_are_insertion_order_independent() {
        let rows = [
            sv(&[(0, 1), (2, 1)]),
            sv(&[(1, 2)]),
            sv(&[(0, 1), (1, 2), (2, 1)]),
        ];
        let mut fwd = Reducer::new();
        for r in rows.iter() {
            fwd.insert(r.clone());
        }
        let mut rev = Reducer::new();
        for r in rows.iter().rev() {
            rev.insert(r.clone());
        }
        let a: Vec<usize> = fwd.pivot_cols().collect();
        let b: Vec<usize> = rev.pivot_cols().collect();
        assert_eq!(a, b);
        assert_eq!(fwd.rank(), 2);
    }

    #[test]
    fn membership_via_reduce() {
        let mut red = Reducer::new();
        red.insert(sv(&[(0, 2), (1, 4)]));
        red.insert(sv(&[(1, 3)]));
        assert!(red.contains(sv(&[(0, 1), (1, 7)])));
        assert!(!red.contains(sv(&[(2, 1)])));
    }

    #[test]
    fn dense_rank_and_solve() {
        let m = vec![
            vec![coef(1), coef(2)],
            vec![coef(2), coef(4)],
            vec![coef(0), coef(1)],
        ];
        assert_eq!(dense_rank(m), 2);
        let a = vec![vec![coef(2), coef(1)], vec![coef(1), coef(1)]];
        let x = solve_dense(&a, &[coef(3), coef(2)]).unwrap();
        assert_eq!(x, vec![coef(1), coef(1)]);
    }
}
