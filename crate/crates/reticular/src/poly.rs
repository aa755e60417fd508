//! Exact sparse multivariate polynomials over the rationals, used as truncated
//! representatives of smooth germs on an r-corner.
//!
//! A `CornerPoly` lives in a fixed `VarSet`: `r` corner variables `x1..xr`,
//! `k` internal variables `y1..yk`, and an ordered list of extra parameter
//! names (`q1..`, `z`, `u1..`, or free-form names for phase-space work).
//!
//! Invariants:
//! - no stored coefficient is zero,
//! - every exponent vector has length `r + k + #params`,
//! - term maps are keyed by `Mono` in graded-lex order (degree first, then
//!   lexicographic on the exponent tuple with the x-block leftmost).

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num::{BigRational, One, Signed, Zero};

pub type Coef = BigRational;

/// Rational from an integer literal.
pub fn coef(n: i64) -> Coef {
    BigRational::from_integer(n.into())
}

/// Rational from numerator/denominator.
pub fn coef_frac(n: i64, d: i64) -> Coef {
    BigRational::new(n.into(), d.into())
}

/// The variable universe of a polynomial: corner block, internal block, params.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VarSet {
    pub r: usize,
    pub k: usize,
    pub params: Vec<String>,
}

impl VarSet {
    pub fn new(r: usize, k: usize, params: Vec<String>) -> Arc<Self> {
        Arc::new(VarSet { r, k, params })
    }

    /// Variables in x and y only (the germ ring E(r;k)).
    pub fn germ(r: usize, k: usize) -> Arc<Self> {
        Self::new(r, k, Vec::new())
    }

    pub fn len(&self) -> usize {
        self.r + self.k + self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn x(&self, i: usize) -> usize {
        assert!(i < self.r, "x index out of range");
        i
    }

    pub fn y(&self, j: usize) -> usize {
        assert!(j < self.k, "y index out of range");
        self.r + j
    }

    pub fn param(&self, m: usize) -> usize {
        assert!(m < self.params.len(), "param index out of range");
        self.r + self.k + m
    }

    pub fn name(&self, v: usize) -> String {
        if v < self.r {
            format!("x{}", v + 1)
        } else if v < self.r + self.k {
            format!("y{}", v - self.r + 1)
        } else {
            self.params[v - self.r - self.k].clone()
        }
    }

    /// Resolve a variable name to its index, honoring the germ grammar
    /// (`x<i>`, `y<j>` within range, otherwise an exact param-name match).
    pub fn resolve(&self, name: &str) -> Option<usize> {
        if let Some(rest) = name.strip_prefix('x') {
            if let Ok(i) = rest.parse::<usize>() {
                if i >= 1 && i <= self.r {
                    return Some(i - 1);
                }
            }
        }
        if let Some(rest) = name.strip_prefix('y') {
            if let Ok(j) = rest.parse::<usize>() {
                if j >= 1 && j <= self.k {
                    return Some(self.r + j - 1);
                }
            }
        }
        self.params
            .iter()
            .position(|p| p == name)
            .map(|m| self.r + self.k + m)
    }
}

/// Exponent vector, ordered graded-lex (degree, then lex on the tuple).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Mono(pub Vec<u32>);

impl Mono {
    pub fn one(nvars: usize) -> Self {
        Mono(vec![0; nvars])
    }

    pub fn var(nvars: usize, v: usize) -> Self {
        let mut e = vec![0; nvars];
        e[v] = 1;
        Mono(e)
    }

    pub fn degree(&self) -> usize {
        self.0.iter().map(|&e| e as usize).sum()
    }

    pub fn mul(&self, other: &Mono) -> Mono {
        debug_assert_eq!(self.0.len(), other.0.len());
        Mono(
            self.0
                .iter()
                .zip(other.0.iter())
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn exp(&self, v: usize) -> u32 {
        self.0[v]
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    /// Render like `x1^2*y1`; the empty monomial renders as `1`.
    pub fn format(&self, vars: &VarSet) -> String {
        if self.is_one() {
            return "1".to_string();
        }
        let mut parts = Vec::new();
        for (v, &e) in self.0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if e == 1 {
                parts.push(vars.name(v));
            } else {
                parts.push(format!("{}^{}", vars.name(v), e));
            }
        }
        parts.join("*")
    }
}

impl Ord for Mono {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse exact polynomial in a fixed `VarSet`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CornerPoly {
    vars: Arc<VarSet>,
    terms: BTreeMap<Mono, Coef>,
}

impl CornerPoly {
    pub fn zero(vars: Arc<VarSet>) -> Self {
        CornerPoly {
            vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: Arc<VarSet>, c: Coef) -> Self {
        let mut p = Self::zero(vars);
        if !c.is_zero() {
            let n = p.vars.len();
            p.terms.insert(Mono::one(n), c);
        }
        p
    }

    pub fn one(vars: Arc<VarSet>) -> Self {
        Self::constant(vars, Coef::one())
    }

    pub fn var(vars: Arc<VarSet>, v: usize) -> Self {
        let n = vars.len();
        assert!(v < n, "variable index out of range");
        let mut p = Self::zero(vars);
        p.terms.insert(Mono::var(n, v), Coef::one());
        p
    }

    pub fn monomial(vars: Arc<VarSet>, m: Mono, c: Coef) -> Self {
        assert_eq!(m.0.len(), vars.len());
        let mut p = Self::zero(vars);
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    pub fn vars(&self) -> &Arc<VarSet> {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &Coef)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; None for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.terms.keys().map(|m| m.degree()).max()
    }

    /// Lowest total degree among terms; None for zero.
    pub fn order(&self) -> Option<usize> {
        self.terms.keys().map(|m| m.degree()).min()
    }

    pub fn coeff(&self, m: &Mono) -> Coef {
        self.terms.get(m).cloned().unwrap_or_else(Coef::zero)
    }

    pub fn constant_term(&self) -> Coef {
        self.coeff(&Mono::one(self.nvars()))
    }

    fn add_term(&mut self, m: Mono, c: Coef) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                let s = e.get().clone() + c;
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.vars, other.vars, "variable set mismatch");
        let mut out = self.clone();
        for (m, c) in other.terms.iter() {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = -c.clone();
        }
        out
    }

    pub fn scale(&self, c: &Coef) -> Self {
        if c.is_zero() {
            return Self::zero(self.vars.clone());
        }
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            *v = v.clone() * c;
        }
        out
    }

    /// Product truncated to total degree <= l (None: no truncation).
    pub fn mul_trunc(&self, other: &Self, l: Option<usize>) -> Self {
        assert_eq!(self.vars, other.vars, "variable set mismatch");
        let mut out = Self::zero(self.vars.clone());
        for (ma, ca) in self.terms.iter() {
            let da = ma.degree();
            for (mb, cb) in other.terms.iter() {
                if let Some(l) = l {
                    if da + mb.degree() > l {
                        continue;
                    }
                }
                out.add_term(ma.mul(mb), ca.clone() * cb);
            }
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.mul_trunc(other, None)
    }

    pub fn pow_trunc(&self, e: u32, l: Option<usize>) -> Self {
        let mut out = Self::one(self.vars.clone());
        for _ in 0..e {
            out = out.mul_trunc(self, l);
            if out.is_zero() {
                break;
            }
        }
        out
    }

    /// Drop all terms of total degree > l.
    pub fn truncate(&self, l: usize) -> Self {
        let mut out = Self::zero(self.vars.clone());
        for (m, c) in self.terms.iter() {
            if m.degree() <= l {
                out.terms.insert(m.clone(), c.clone());
            }
        }
        out
    }

    /// Exact partial derivative with respect to variable index v.
    pub fn derivative(&self, v: usize) -> Self {
        assert!(v < self.nvars(), "variable index out of range");
        let mut out = Self::zero(self.vars.clone());
        for (m, c) in self.terms.iter() {
            let e = m.exp(v);
            if e == 0 {
                continue;
            }
            let mut exps = m.0.clone();
            exps[v] = e - 1;
            out.add_term(Mono(exps), c.clone() * coef(e as i64));
        }
        out
    }

    /// Simultaneous substitution into a (possibly different) variable set:
    /// `images[v]` replaces variable `v`; result truncated at degree l.
    pub fn substitute_into(&self, target: Arc<VarSet>, images: &[CornerPoly], l: usize) -> Self {
        assert_eq!(images.len(), self.nvars(), "need one image per variable");
        for im in images {
            assert_eq!(im.vars, target, "image in wrong variable set");
        }
        // power cache: powers[v][e] = images[v]^e truncated
        let mut powers: Vec<Vec<CornerPoly>> = images
            .iter()
            .map(|im| vec![CornerPoly::one(target.clone()), im.clone()])
            .collect();
        let mut out = Self::zero(target.clone());
        for (m, c) in self.terms.iter() {
            let mut acc = CornerPoly::constant(target.clone(), c.clone());
            for (v, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while powers[v].len() <= e as usize {
                    let nxt = powers[v].last().unwrap().mul_trunc(&images[v], Some(l));
                    powers[v].push(nxt);
                }
                acc = acc.mul_trunc(&powers[v][e as usize], Some(l));
                if acc.is_zero() {
                    break;
                }
            }
            out = out.add(&acc);
        }
        out.truncate(l)
    }

    /// Partial substitution within the same variable set; unbound variables
    /// map to themselves. Result truncated at degree l.
    pub fn substitute(&self, bindings: &[(usize, CornerPoly)], l: usize) -> Self {
        let images: Vec<CornerPoly> = (0..self.nvars())
            .map(|v| {
                bindings
                    .iter()
                    .find(|(b, _)| *b == v)
                    .map(|(_, p)| p.clone())
                    .unwrap_or_else(|| CornerPoly::var(self.vars.clone(), v))
            })
            .collect();
        self.substitute_into(self.vars.clone(), &images, l)
    }

    /// Reinterpret a poly whose param exponents are all zero as a germ in
    /// E(r;k). Panics if some term still involves a parameter.
    pub fn restrict_to_germ(&self) -> Self {
        let vars = VarSet::germ(self.vars.r, self.vars.k);
        let n = vars.len();
        let mut out = Self::zero(vars);
        for (m, c) in self.terms.iter() {
            assert!(
                m.0[n..].iter().all(|&e| e == 0),
                "term still involves a parameter"
            );
            out.terms.insert(Mono(m.0[..n].to_vec()), c.clone());
        }
        out
    }

    /// The same polynomial viewed in a larger variable set that starts with
    /// this one's variables (extra variables get exponent zero).
    pub fn extend_vars(&self, target: Arc<VarSet>) -> Self {
        assert!(target.len() >= self.nvars());
        assert_eq!(target.r, self.vars.r);
        assert_eq!(target.k, self.vars.k);
        let n = target.len();
        let mut out = Self::zero(target);
        for (m, c) in self.terms.iter() {
            let mut exps = m.0.clone();
            exps.resize(n, 0);
            out.terms.insert(Mono(exps), c.clone());
        }
        out
    }

    /// Coefficient of y_i*y_j in the quadratic part, as the Hessian entry
    /// d²f/dy_i dy_j at 0.
    pub fn y_hessian(&self) -> Vec<Vec<Coef>> {
        let k = self.vars.k;
        let mut h = vec![vec![Coef::zero(); k]; k];
        for (m, c) in self.terms.iter() {
            if m.degree() != 2 {
                continue;
            }
            let ys: Vec<usize> = (0..k)
                .flat_map(|j| std::iter::repeat(j).take(m.exp(self.vars.y(j)) as usize))
                .collect();
            if ys.len() != 2 {
                continue;
            }
            let (i, j) = (ys[0], ys[1]);
            if i == j {
                h[i][i] = c.clone() * coef(2);
            } else {
                h[i][j] = c.clone();
                h[j][i] = c.clone();
            }
        }
        h
    }

    /// Evaluate at a rational point (exact).
    pub fn eval(&self, point: &[Coef]) -> Coef {
        assert_eq!(point.len(), self.nvars());
        let mut acc = Coef::zero();
        for (m, c) in self.terms.iter() {
            let mut t = c.clone();
            for (v, &e) in m.0.iter().enumerate() {
                for _ in 0..e {
                    t *= point[v].clone();
                }
            }
            acc += t;
        }
        acc
    }
}

impl fmt::Display for CornerPoly {
    /// Canonical form: graded-lex term order, lowest degree first.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.terms.iter() {
            let neg = c.is_negative();
            let abs = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
                first = false;
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if m.is_one() {
                write!(f, "{}", abs)?;
            } else if abs.is_one() {
                write!(f, "{}", m.format(&self.vars))?;
            } else {
                write!(f, "{}*{}", abs, m.format(&self.vars))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_poly;

    fn p(text: &str, r: usize, k: usize, params: &[&str]) -> CornerPoly {
        parse_poly(
            text,
            r,
            k,
            &params.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
        )
        .unwrap()
    }

    #[test]
    fn truncate_filters_by_degree() {
        let f = p("x1^2 + x1^5", 1, 0, &[]);
        assert_eq!(f.truncate(3), p("x1^2", 1, 0, &[]));
        let g = p("y1^3 + q1*y1", 0, 1, &["q1"]);
        assert_eq!(g.truncate(4), g);
        let h = p("1 + y1 + y1^2 + y1^3 + y1^6", 0, 1, &[]);
        assert_eq!(h.truncate(0), p("1", 0, 1, &[]));
    }

    #[test]
    fn derivative_examples() {
        let f = p("y1^3 + q1*y1", 0, 1, &["q1"]);
        let fy = f.derivative(f.vars().y(0));
        assert_eq!(fy, p("3*y1^2 + q1", 0, 1, &["q1"]));
        let g = p("x1^2", 1, 0, &[]);
        assert_eq!(g.derivative(0), p("2*x1", 1, 0, &[]));
        let h = p("x1*y1 + y1^3", 1, 1, &[]);
        assert_eq!(h.derivative(h.vars().y(0)), p("x1 + 3*y1^2", 1, 1, &[]));
    }

    #[test]
    fn multiply_truncates() {
        let a = p("x1", 1, 0, &[]);
        let b = p("x1^2", 1, 0, &[]);
        assert_eq!(a.mul_trunc(&b, Some(10)), p("x1^3", 1, 0, &[]));
        assert!(a.mul_trunc(&b, Some(2)).is_zero());
        let u = p("1 + y1", 0, 1, &[]);
        let v = p("1 - y1", 0, 1, &[]);
        assert_eq!(u.mul_trunc(&v, Some(2)), p("1 - y1^2", 0, 1, &[]));
    }

    #[test]
    fn substitute_examples() {
        let f = p("y1^3 + q1*y1", 0, 1, &["q1"]);
        let zero = CornerPoly::zero(f.vars().clone());
        let qi = f.vars().param(0);
        assert_eq!(f.substitute(&[(qi, zero)], 10), p("y1^3", 0, 1, &["q1"]));

        let g = p("x1^2", 1, 0, &[]);
        let img = p("x1 + x1^2", 1, 0, &[]);
        assert_eq!(g.substitute(&[(0, img)], 3), p("x1^2 + 2*x1^3", 1, 0, &[]));

        // H(Q,p) = -Q*p + p^3 restricted to Q=0
        let h = p("-Q1*p1 + p1^3", 0, 0, &["Q1", "p1"]);
        let z = CornerPoly::zero(h.vars().clone());
        let qv = h.vars().param(0);
        assert_eq!(h.substitute(&[(qv, z)], 5), p("p1^3", 0, 0, &["Q1", "p1"]));
    }

    #[test]
    fn identity_substitution_is_identity() {
        let f = p("x1^2*y1 + 3/2*y1^2 - x1^4", 1, 1, &[]);
        assert_eq!(f.substitute(&[], 6), f);
    }

    #[test]
    fn grlex_order_lists_y_before_x() {
        let f = p("x1 + y1 + x1*y1 + y1^2", 1, 1, &[]);
        let monos: Vec<String> = f.terms().map(|(m, _)| m.format(f.vars())).collect();
        assert_eq!(monos, vec!["y1", "x1", "y1^2", "x1*y1"]);
    }

    #[test]
    fn display_round_trip() {
        let f = p("-y1^4 + 3/2*y1*q1", 0, 1, &["q1"]);
        let s = f.to_string();
        assert_eq!(p(&s, 0, 1, &["q1"]), f);
        assert_eq!(CornerPoly::zero(f.vars().clone()).to_string(), "0");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_poly() -> impl Strategy<Value = CornerPoly> {
            let vars = VarSet::germ(1, 1);
            proptest::collection::vec(((0u32..4, 0u32..4), -6i64..=6, 1i64..=3), 0..6).prop_map(
                move |terms| {
                    let mut out = CornerPoly::zero(vars.clone());
                    for ((ex, ey), num, den) in terms {
                        let m = Mono(vec![ex, ey]);
                        out = out.add(&CornerPoly::monomial(vars.clone(), m, coef_frac(num, den)));
                    }
                    out
                },
            )
        }

        proptest! {
            #[test]
            fn truncation_composes(f in arb_poly(), l in 0usize..8, m in 0usize..8) {
                prop_assert_eq!(f.truncate(l).truncate(m), f.truncate(l.min(m)));
            }

            #[test]
            fn leibniz_rule(a in arb_poly(), b in arb_poly(), v in 0usize..2) {
                let lhs = a.mul(&b).derivative(v);
                let rhs = a.derivative(v).mul(&b).add(&a.mul(&b.derivative(v)));
                prop_assert_eq!(lhs, rhs);
            }

            #[test]
            fn identity_substitution(f in arb_poly()) {
                let l = f.degree().unwrap_or(0);
                prop_assert_eq!(f.substitute(&[], l), f);
            }

            #[test]
            fn format_parse_round_trip(f in arb_poly()) {
                let text = f.to_string();
                let back = crate::parse::parse_poly(&text, 1, 1, &[]).unwrap();
                prop_assert_eq!(back, f);
            }
        }
    }
}
