//! Tangent modules of germs on an r-corner, quotient bases, codimension, and
//! the sufficient finite-determinacy tests.
//!
//! Mode R uses the generator set {x_i df/dx_i} ∪ {df/dy_j}; mode K adds the
//! germ f itself. Codimension quotients are taken against the full
//! E(r;k)-module span; the determinacy tests restrict the multiplier ideals
//! (M on the x-block and f, M² on the y-block).

use serde::Serialize;
use thiserror::Error;

use crate::jets::{jet_space, JetSpace};
use crate::linalg::Reducer;
use crate::poly::{CornerPoly, Mono};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Mode {
    R,
    K,
}

impl Mode {
    /// Label used in codimension reports (the R quotient is the R⁺ one).
    pub fn codim_label(self) -> &'static str {
        match self {
            Mode::R => "Rplus",
            Mode::K => "K",
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LocalError {
    #[error("germ has a nonzero constant term")]
    NonzeroConstantTerm,
    #[error("germ is not in M^2: nonzero linear part `{0}`")]
    NotInMSquared(String),
    #[error("germ must live in E(r;k) (no parameters), found parameter variables")]
    HasParameters,
    #[error("truncation too small to certify the answer")]
    Indeterminate,
}

/// Span of an E(r;k)-module of germs inside a jet space of degree <= l.
#[derive(Clone, Debug)]
pub struct TangentModule {
    pub mode: Mode,
    pub germ: CornerPoly,
    pub l: usize,
    pub generators: Vec<CornerPoly>,
    pub jet: JetSpace,
    pub reducer: Reducer,
}

fn check_germ(f: &CornerPoly, mode: Mode) -> Result<(), LocalError> {
    if !f.vars().params.is_empty() {
        return Err(LocalError::HasParameters);
    }
    if f.is_zero() {
        return Ok(());
    }
    let ord = f.order().unwrap();
    if ord == 0 {
        return Err(LocalError::NonzeroConstantTerm);
    }
    let min_order = match mode {
        Mode::R => 2,
        Mode::K => 1,
    };
    if ord < min_order {
        let lin = f.truncate(1);
        return Err(LocalError::NotInMSquared(lin.to_string()));
    }
    Ok(())
}

/// Generators of the tangent module: {x_i df/dx_i} ∪ {df/dy_j}, plus f in K.
pub fn tangent_generators(f: &CornerPoly, mode: Mode) -> Vec<CornerPoly> {
    let vars = f.vars().clone();
    let mut gens = Vec::new();
    if mode == Mode::K {
        gens.push(f.clone());
    }
    for i in 0..vars.r {
        let xi = CornerPoly::var(vars.clone(), vars.x(i));
        gens.push(xi.mul(&f.derivative(vars.x(i))));
    }
    for j in 0..vars.k {
        gens.push(f.derivative(vars.y(j)));
    }
    gens.retain(|g| !g.is_zero());
    gens
}

/// Build the E-module span of the tangent generators in jets of degree <= l.
pub fn tangent_module(f: &CornerPoly, mode: Mode, l: usize) -> Result<TangentModule, LocalError> {
    check_germ(f, mode)?;
    assert!(l >= 1);
    let jet = jet_space(f.vars().clone(), l, 0);
    let gens = tangent_generators(f, mode);
    let mut reducer = Reducer::new();
    for g in &gens {
        let g = g.truncate(l);
        if g.is_zero() {
            continue;
        }
        let ord = g.order().unwrap();
        for m in jet.basis.iter() {
            if m.degree() + ord > l {
                continue;
            }
            let mg = g.mul_trunc(
                &CornerPoly::monomial(f.vars().clone(), m.clone(), crate::poly::coef(1)),
                Some(l),
            );
            reducer.insert(jet.jet_of(&mg));
        }
    }
    Ok(TangentModule {
        mode,
        germ: f.clone(),
        l,
        generators: gens,
        jet,
        reducer,
    })
}

fn quotient_basis(t: &TangentModule) -> Vec<Mono> {
    t.jet
        .basis
        .iter()
        .enumerate()
        .filter(|(i, _)| !t.reducer.has_pivot(*i))
        .map(|(_, m)| m.clone())
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Codim {
    Finite(usize),
    Infinite,
}

impl Serialize for Codim {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Codim::Finite(n) => s.serialize_u64(*n as u64),
            Codim::Infinite => s.serialize_str("INFINITE"),
        }
    }
}

impl Codim {
    pub fn finite(&self) -> Option<usize> {
        match self {
            Codim::Finite(n) => Some(*n),
            Codim::Infinite => None,
        }
    }
}

impl std::fmt::Display for Codim {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Codim::Finite(n) => write!(f, "{n}"),
            Codim::Infinite => write!(f, "INFINITE"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct QuotientReport {
    pub mode: Mode,
    pub codim: Codim,
    /// Monomial representatives of a basis of the quotient; for mode R the
    /// constant direction is excluded (the R⁺ count), for K it is kept.
    pub basis: Vec<Mono>,
    pub l_used: usize,
    pub stabilized: bool,
}

impl QuotientReport {
    pub fn basis_strings(&self, f: &CornerPoly) -> Vec<String> {
        self.basis.iter().map(|m| m.format(f.vars())).collect()
    }

    pub fn to_json(&self, f: &CornerPoly) -> serde_json::Value {
        serde_json::json!({
            "mode": self.mode.codim_label(),
            "codim": match self.codim { Codim::Finite(n) => serde_json::json!(n), Codim::Infinite => serde_json::json!("INFINITE") },
            "basis": self.basis_strings(f),
            "l_used": self.l_used,
            "stabilized": self.stabilized,
        })
    }
}

pub const DEFAULT_CODIM_CAP: usize = 12;

/// Reticular R⁺- or K-codimension of f, with the quotient monomial basis.
///
/// Truncation is raised until the basis agrees at two consecutive levels and
/// every basis monomial has degree <= l-1; INFINITE if the cap is hit first.
pub fn codimension(f: &CornerPoly, mode: Mode) -> Result<QuotientReport, LocalError> {
    codimension_capped(f, mode, DEFAULT_CODIM_CAP)
}

pub fn codimension_capped(
    f: &CornerPoly,
    mode: Mode,
    cap: usize,
) -> Result<QuotientReport, LocalError> {
    check_germ(f, mode)?;
    let mut prev: Option<Vec<Mono>> = None;
    for l in 2..cap {
        let basis = quotient_basis(&tangent_module(f, mode, l)?);
        if let Some(pb) = prev {
            let lo = l - 1;
            let max_deg = pb.iter().map(|m| m.degree()).max().unwrap_or(0);
            if pb == basis && max_deg + 1 <= lo {
                let one = Mono::one(f.nvars());
                debug_assert!(basis.contains(&one));
                let (codim, out_basis) = match mode {
                    Mode::R => (
                        basis.len() - 1,
                        basis.into_iter().filter(|m| !m.is_one()).collect(),
                    ),
                    Mode::K => (basis.len(), basis),
                };
                return Ok(QuotientReport {
                    mode,
                    codim: Codim::Finite(codim),
                    basis: out_basis,
                    l_used: l,
                    stabilized: true,
                });
            }
        }
        prev = Some(basis);
    }
    Ok(QuotientReport {
        mode,
        codim: Codim::Infinite,
        basis: prev.unwrap_or_default(),
        l_used: cap - 1,
        stabilized: false,
    })
}

pub const DEFAULT_DETERMINACY_CAP: usize = 12;

/// Least l <= l_max such that the sufficient determinacy inclusion holds:
/// every degree-(l+1) monomial lies in the span of
///   {m*g : m in M, g in {x_i df/dx_i} (and f for K)} ∪ {m*h : m in M², h = df/dy_j}
/// inside jets modulo degree >= l+2. None = FAIL.
pub fn determinacy_bound(
    f: &CornerPoly,
    mode: Mode,
    l_max: usize,
) -> Result<Option<usize>, LocalError> {
    check_germ(f, mode)?;
    if f.is_zero() {
        return Ok(None);
    }
    let vars = f.vars().clone();
    let mut m_gens: Vec<CornerPoly> = Vec::new(); // multiplier ideal M
    let mut m2_gens: Vec<CornerPoly> = Vec::new(); // multiplier ideal M²
    if mode == Mode::K {
        m_gens.push(f.clone());
    }
    for i in 0..vars.r {
        let xi = CornerPoly::var(vars.clone(), vars.x(i));
        m_gens.push(xi.mul(&f.derivative(vars.x(i))));
    }
    for j in 0..vars.k {
        m2_gens.push(f.derivative(vars.y(j)));
    }
    m_gens.retain(|g| !g.is_zero());
    m2_gens.retain(|g| !g.is_zero());

    for l in 1..=l_max {
        let jl = jet_space(vars.clone(), l + 1, 1);
        let mut reducer = Reducer::new();
        let push = |gens: &[CornerPoly], min_mult: usize, reducer: &mut Reducer| {
            for g in gens {
                let g = g.truncate(l + 1);
                if g.is_zero() {
                    continue;
                }
                let ord = g.order().unwrap();
                for m in jl.basis.iter() {
                    let dm = m.degree();
                    if dm < min_mult || dm + ord > l + 1 {
                        continue;
                    }
                    let mono = CornerPoly::monomial(vars.clone(), m.clone(), crate::poly::coef(1));
                    reducer.insert(jl.jet_of(&g.mul_trunc(&mono, Some(l + 1))));
                }
            }
        };
        push(&m_gens, 1, &mut reducer);
        push(&m2_gens, 2, &mut reducer);
        // Columns are ordered by degree, so pivot tails at the top block stay
        // in the top block: a degree-(l+1) monomial is spanned iff its column
        // is a pivot.
        let covered = jl
            .basis
            .iter()
            .enumerate()
            .filter(|(_, m)| m.degree() == l + 1)
            .all(|(i, _)| reducer.has_pivot(i));
        if covered {
            return Ok(Some(l));
        }
    }
    Ok(None)
}

/// True iff the jet of g lies in span(T ∪ extras) at T's truncation.
pub fn membership(
    g: &CornerPoly,
    t: &TangentModule,
    extras: &[CornerPoly],
) -> Result<bool, LocalError> {
    if g.degree().unwrap_or(0) > t.l || extras.iter().any(|e| e.degree().unwrap_or(0) > t.l) {
        return Err(LocalError::Indeterminate);
    }
    let mut reducer = t.reducer.clone();
    for e in extras {
        reducer.insert(t.jet.jet_of(&e.truncate(t.l)));
    }
    Ok(reducer.contains(t.jet.jet_of(&g.truncate(t.l))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_poly;
    use crate::poly::coef;

    fn germ(text: &str, r: usize, k: usize) -> CornerPoly {
        parse_poly(text, r, k, &[]).unwrap()
    }

    fn basis_names(rep: &QuotientReport, f: &CornerPoly) -> Vec<String> {
        rep.basis_strings(f)
    }

    #[test]
    fn tangent_module_of_b2_is_ideal_x2() {
        for sgn in ["x1^2", "-x1^2"] {
            let f = germ(sgn, 1, 0);
            let t = tangent_module(&f, Mode::R, 3).unwrap();
            // module = jets of <x^2>: spans x^2 and x^3
            assert!(membership(&germ("x1^2", 1, 0), &t, &[]).unwrap());
            assert!(membership(&germ("x1^3", 1, 0), &t, &[]).unwrap());
            assert!(!membership(&germ("x1", 1, 0), &t, &[]).unwrap());
        }
    }

    #[test]
    fn tangent_module_of_c3_reduces_x_to_y2() {
        let f = germ("x1*y1 + y1^3", 1, 1);
        let t = tangent_module(&f, Mode::R, 3).unwrap();
        // x ≡ -3y², y³ ≡ 0 in the quotient
        assert!(membership(&germ("x1 + 3*y1^2", 1, 1), &t, &[]).unwrap());
        assert!(membership(&germ("y1^3", 1, 1), &t, &[]).unwrap());
        assert!(!membership(&germ("y1", 1, 1), &t, &[]).unwrap());
    }

    #[test]
    fn k_module_of_morse_contains_maximal_ideal() {
        let f = germ("y1^2", 0, 1);
        let t = tangent_module(&f, Mode::K, 2).unwrap();
        assert!(membership(&germ("y1", 0, 1), &t, &[]).unwrap());
        assert!(membership(&germ("y1^2", 0, 1), &t, &[]).unwrap());
        assert!(!membership(&CornerPoly::one(f.vars().clone()), &t, &[]).unwrap());
    }

    #[test]
    fn codim_examples() {
        for sgn in ["x1^2", "-x1^2"] {
            let f = germ(sgn, 1, 0);
            let rep = codimension(&f, Mode::R).unwrap();
            assert_eq!(rep.codim, Codim::Finite(1));
            assert_eq!(basis_names(&rep, &f), vec!["x1"]);
        }

        let morse = germ("y1^2", 0, 1);
        let rep = codimension(&morse, Mode::R).unwrap();
        assert_eq!(rep.codim, Codim::Finite(0));
        assert!(rep.basis.is_empty());

        for sgn in ["x1^2 + y1^3", "-x1^2 + y1^3"] {
            let f = germ(sgn, 1, 1);
            let rep = codimension(&f, Mode::R).unwrap();
            assert_eq!(rep.codim, Codim::Finite(3));
            assert_eq!(basis_names(&rep, &f), vec!["y1", "x1", "x1*y1"]);
        }

        let c3 = germ("x1*y1 + y1^3", 1, 1);
        let rep = codimension(&c3, Mode::K).unwrap();
        assert_eq!(rep.codim, Codim::Finite(3));
        assert_eq!(basis_names(&rep, &c3), vec!["1", "y1", "y1^2"]);
    }

    #[test]
    fn codim_of_xy_is_infinite() {
        let f = germ("x1*y1", 1, 1);
        let rep = codimension(&f, Mode::R).unwrap();
        assert_eq!(rep.codim, Codim::Infinite);
        assert!(!rep.stabilized);
    }

    #[test]
    fn determinacy_examples() {
        assert_eq!(
            determinacy_bound(&germ("x1^3", 1, 0), Mode::R, 12).unwrap(),
            Some(3)
        );
        assert_eq!(
            determinacy_bound(&germ("y1^2", 0, 1), Mode::R, 12).unwrap(),
            Some(2)
        );
        assert_eq!(
            determinacy_bound(&germ("x1^2 + y1^3", 1, 1), Mode::K, 12).unwrap(),
            Some(3)
        );
    }

    #[test]
    fn determinacy_of_pure_powers() {
        for l in 2..=6 {
            let f = germ(&format!("x1^{l}"), 1, 0);
            assert_eq!(determinacy_bound(&f, Mode::R, 12).unwrap(), Some(l));
        }
    }

    #[test]
    fn determinacy_fails_for_non_finitely_determined_germs() {
        assert_eq!(
            determinacy_bound(&germ("x1*y1", 1, 1), Mode::R, 12).unwrap(),
            None
        );
    }

    #[test]
    fn codim_of_pure_powers() {
        for l in 2..=6 {
            let f = germ(&format!("x1^{l}"), 1, 0);
            assert_eq!(
                codimension(&f, Mode::R).unwrap().codim,
                Codim::Finite(l - 1)
            );
        }
    }

    #[test]
    fn membership_examples() {
        let t = tangent_module(&germ("y1^3", 0, 1), Mode::R, 4).unwrap();
        let one = CornerPoly::one(t.germ.vars().clone());
        let y = germ("y1", 0, 1);
        assert!(membership(&y, &t, &[one.clone(), y.clone()]).unwrap());
        assert!(!membership(&y, &t, &[one]).unwrap());
        let t2 = tangent_module(&germ("x1^2", 1, 0), Mode::R, 4).unwrap();
        assert!(membership(&germ("x1^2", 1, 0), &t2, &[]).unwrap());
    }

    #[test]
    fn membership_indeterminate_when_truncation_too_small() {
        let t = tangent_module(&germ("y1^3", 0, 1), Mode::R, 3).unwrap();
        let g = germ("y1^5", 0, 1);
        assert_eq!(membership(&g, &t, &[]), Err(LocalError::Indeterminate));
    }

    #[test]
    fn codim_stable_under_adding_high_degree_monomial() {
        let f = germ("x1^2 + y1^3", 1, 1);
        let d = determinacy_bound(&f, Mode::R, 12).unwrap().unwrap();
        let g = germ(&format!("x1^2 + y1^3 + y1^{}", d + 1), 1, 1);
        assert_eq!(
            codimension(&f, Mode::R).unwrap().codim,
            codimension(&g, Mode::R).unwrap().codim
        );
    }

    #[test]
    fn rank_nullity_exact() {
        let f = germ("x1^2 + y1^3", 1, 1);
        let l = 5;
        let t = tangent_module(&f, Mode::R, l).unwrap();
        let basis = quotient_basis(&t);
        assert_eq!(basis.len(), t.jet.dim() - t.reducer.rank());
    }

    #[test]
    fn rejects_bad_germs() {
        let c = germ("1 + y1^2", 0, 1);
        assert!(matches!(
            codimension(&c, Mode::R),
            Err(LocalError::NonzeroConstantTerm)
        ));
        let lin = germ("y1 + y1^2", 0, 1);
        assert!(matches!(
            codimension(&lin, Mode::R),
            Err(LocalError::NotInMSquared(_))
        ));
        // K permits M-only germs in the tangent module itself
        assert!(tangent_module(&germ("y1", 0, 1), Mode::K, 2).is_ok());
    }

    #[test]
    fn codim_invariant_under_linear_changes() {
        // y -> y1 + 2y2, y2 -> y1 - y2 on a D4 germ; x -> 2x on F4
        let d4 = germ("y1^2*y2 + y2^3", 0, 2);
        let vars = d4.vars().clone();
        let y1 = CornerPoly::var(vars.clone(), vars.y(0));
        let y2 = CornerPoly::var(vars.clone(), vars.y(1));
        let img1 = y1.add(&y2.scale(&coef(2)));
        let img2 = y1.sub(&y2);
        let g = d4.substitute(&[(vars.y(0), img1), (vars.y(1), img2)], 8);
        assert_eq!(
            codimension(&d4, Mode::R).unwrap().codim,
            codimension(&g, Mode::R).unwrap().codim
        );

        let f4 = germ("x1^2 + y1^3", 1, 1);
        let v = f4.vars().clone();
        let x2 = CornerPoly::var(v.clone(), v.x(0)).scale(&coef(2));
        let h = f4.substitute(&[(v.x(0), x2)], 8);
        assert_eq!(
            codimension(&f4, Mode::R).unwrap().codim,
            codimension(&h, Mode::R).unwrap().codim
        );
    }
}
