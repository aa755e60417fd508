//! Versal unfoldings: construction from quotient bases, infinitesimal
//! versality of a given family, and the stability verdict for the associated
//! reticular Lagrangian/Legendrian map germ.

use serde::Serialize;
use thiserror::Error;

use crate::classify::{classify, ClassifyError, ClassifyOutcome};
use crate::local::{
    codimension, determinacy_bound, tangent_module, Codim, LocalError, Mode, QuotientReport,
};
use crate::poly::{coef, CornerPoly, Mono, VarSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FamilyKind {
    Lagrangian,
    Legendrian,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum UnfoldError {
    #[error("base germ has infinite codimension")]
    InfiniteCodimension,
    #[error("a Legendrian family needs a trailing `z` parameter")]
    MissingZ,
    #[error("a Lagrangian family must not use the `z` parameter")]
    UnexpectedZ,
    #[error("Legendrian construction requires mode K")]
    KindNeedsK,
    #[error("family base violates the kind's degeneracy condition: {0}")]
    BadBase(String),
    #[error(transparent)]
    Local(#[from] LocalError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
}

/// A generating family F(x, y, q_1..q_n[, z]).
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratingFamily {
    pub poly: CornerPoly,
    pub kind: FamilyKind,
}

impl GeneratingFamily {
    pub fn new(poly: CornerPoly, kind: FamilyKind) -> Result<Self, UnfoldError> {
        let params = &poly.vars().params;
        match kind {
            FamilyKind::Legendrian => {
                if params.last().map(|s| s.as_str()) != Some("z") {
                    return Err(UnfoldError::MissingZ);
                }
            }
            FamilyKind::Lagrangian => {
                if params.iter().any(|p| p == "z") {
                    return Err(UnfoldError::UnexpectedZ);
                }
            }
        }
        let fam = GeneratingFamily { poly, kind };
        fam.validate_base()?;
        Ok(fam)
    }

    fn validate_base(&self) -> Result<(), UnfoldError> {
        let base = self.base();
        match self.kind {
            FamilyKind::Lagrangian => {
                if base.order().unwrap_or(2) < 2 {
                    return Err(UnfoldError::BadBase(format!("base `{base}` is not in M^2")));
                }
            }
            FamilyKind::Legendrian => {
                // dF/dx(0) = dF/dy(0) = 0 and F(0) = 0
                if base.order().unwrap_or(2) < 2 {
                    return Err(UnfoldError::BadBase(format!(
                        "base `{base}` has a nonvanishing derivative at 0"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Number of unfolding parameters (z not counted).
    pub fn n(&self) -> usize {
        let p = self.poly.vars().params.len();
        match self.kind {
            FamilyKind::Lagrangian => p,
            FamilyKind::Legendrian => p - 1,
        }
    }

    /// Names of all parameter directions (z included for Legendrian).
    pub fn param_names(&self) -> &[String] {
        &self.poly.vars().params
    }

    /// F with all parameters set to 0, as a germ in E(r;k).
    pub fn base(&self) -> CornerPoly {
        let vars = self.poly.vars().clone();
        let l = self.poly.degree().unwrap_or(0);
        let zero = CornerPoly::zero(vars.clone());
        let bindings: Vec<(usize, CornerPoly)> = (0..vars.params.len())
            .map(|m| (vars.param(m), zero.clone()))
            .collect();
        self.poly.substitute(&bindings, l).restrict_to_germ()
    }

    /// dF/du_i restricted to u = 0, for every parameter direction (z last for
    /// Legendrian), as germs in E(r;k).
    pub fn initial_speeds(&self) -> Vec<CornerPoly> {
        let vars = self.poly.vars().clone();
        let l = self.poly.degree().unwrap_or(0);
        let zero = CornerPoly::zero(vars.clone());
        let bindings: Vec<(usize, CornerPoly)> = (0..vars.params.len())
            .map(|m| (vars.param(m), zero.clone()))
            .collect();
        (0..vars.params.len())
            .map(|m| {
                self.poly
                    .derivative(vars.param(m))
                    .substitute(&bindings, l)
                    .restrict_to_germ()
            })
            .collect()
    }

    /// Family with one parameter direction removed (set to 0). Removing the
    /// z direction of a Legendrian family leaves a Lagrangian-kind one.
    pub fn without_param(&self, idx: usize) -> Result<Self, UnfoldError> {
        let vars = self.poly.vars().clone();
        let l = self.poly.degree().unwrap_or(0);
        let zero = CornerPoly::zero(vars.clone());
        let dropped = self.poly.substitute(&[(vars.param(idx), zero)], l);
        let removed_z = vars.params[idx] == "z";
        let mut params = vars.params.clone();
        params.remove(idx);
        let tvars = VarSet::new(vars.r, vars.k, params);
        let imgs: Vec<CornerPoly> = (0..vars.len())
            .map(|v| {
                if v < vars.r + vars.k {
                    CornerPoly::var(tvars.clone(), v)
                } else {
                    let m = v - vars.r - vars.k;
                    if m == idx {
                        CornerPoly::zero(tvars.clone())
                    } else {
                        let nm = if m < idx { m } else { m - 1 };
                        CornerPoly::var(tvars.clone(), tvars.param(nm))
                    }
                }
            })
            .collect();
        let kind = if removed_z {
            FamilyKind::Lagrangian
        } else {
            self.kind
        };
        GeneratingFamily::new(dropped.substitute_into(tvars, &imgs, l), kind)
    }
}

impl std::fmt::Display for GeneratingFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.poly)
    }
}

/// Miniversal unfolding of f from its quotient basis. Parameters are named
/// u1..un in descending graded-lex order of the basis monomials; in mode K
/// with kind Legendrian the constant direction becomes the z parameter.
pub fn build_versal(
    f: &CornerPoly,
    mode: Mode,
    kind: FamilyKind,
) -> Result<GeneratingFamily, UnfoldError> {
    if kind == FamilyKind::Legendrian && mode != Mode::K {
        return Err(UnfoldError::KindNeedsK);
    }
    let rep = codimension(f, mode)?;
    if rep.codim.finite().is_none() {
        return Err(UnfoldError::InfiniteCodimension);
    }
    let mut basis = rep.basis.clone();
    basis.sort();
    basis.reverse(); // descending: highest monomial gets u1
    let with_z = kind == FamilyKind::Legendrian;
    let mut monos: Vec<Mono> = Vec::new();
    for m in basis {
        if with_z && m.is_one() {
            continue; // the constant direction becomes z
        }
        monos.push(m);
    }
    let mut params: Vec<String> = (1..=monos.len()).map(|i| format!("u{i}")).collect();
    if with_z {
        params.push("z".to_string());
    }
    let vars = VarSet::new(f.vars().r, f.vars().k, params);
    let mut poly = f.extend_vars(vars.clone());
    for (i, m) in monos.iter().enumerate() {
        let mut exps = vec![0u32; vars.len()];
        exps[..m.0.len()].copy_from_slice(&m.0);
        exps[vars.param(i)] = 1;
        poly = poly.add(&CornerPoly::monomial(vars.clone(), Mono(exps), coef(1)));
    }
    if with_z {
        poly = poly.add(&CornerPoly::var(
            vars.clone(),
            vars.param(vars.params.len() - 1),
        ));
    }
    GeneratingFamily::new(poly, kind)
}

/// Infinitesimal versality: E(r;k) = tangent module + R-span of the initial
/// speeds (plus the constant for mode R).
pub fn check_versality(fam: &GeneratingFamily, mode: Mode) -> Result<bool, UnfoldError> {
    let base = fam.base();
    let rep = codimension(&base, mode)?;
    if rep.codim.finite().is_none() {
        return Ok(false);
    }
    let speeds = fam.initial_speeds();
    let dmax = speeds.iter().filter_map(|s| s.degree()).max().unwrap_or(0);
    let l = rep.l_used.max(fam.n() + 2).max(dmax);
    let t = tangent_module(&base, mode, l)?;
    // the quotient must still look stabilized at this truncation
    let quot: Vec<Mono> = t
        .jet
        .basis
        .iter()
        .enumerate()
        .filter(|(i, _)| !t.reducer.has_pivot(*i))
        .map(|(_, m)| m.clone())
        .collect();
    let expected: Vec<Mono> = match mode {
        Mode::R => {
            let mut v = vec![Mono::one(base.nvars())];
            v.extend(rep.basis.clone());
            v.sort();
            v
        }
        Mode::K => rep.basis.clone(),
    };
    if quot != expected {
        return Err(UnfoldError::Local(LocalError::Indeterminate));
    }
    let mut reducer = t.reducer.clone();
    if mode == Mode::R {
        reducer.insert(t.jet.jet_of(&CornerPoly::one(base.vars().clone())));
    }
    for s in speeds {
        reducer.insert(t.jet.jet_of(&s.truncate(l)));
    }
    Ok(reducer.rank() == t.jet.dim())
}

fn ser_determinacy<S: serde::Serializer>(d: &Option<usize>, s: S) -> Result<S::Ok, S::Error> {
    match d {
        Some(n) => s.serialize_u64(*n as u64),
        None => s.serialize_str("FAIL"),
    }
}

/// Stability report for the reticular map germ the family generates.
#[derive(Clone, Debug, Serialize)]
pub struct StabilityReport {
    pub versal: bool,
    pub codim: Codim,
    pub class: String,
    #[serde(serialize_with = "ser_determinacy")]
    pub determinacy: Option<usize>,
    pub l_used: usize,
    pub reasons: Vec<String>,
}

/// Decide stability of the associated map via versality of the family.
pub fn stability_verdict(
    fam: &GeneratingFamily,
    mode: Mode,
) -> Result<StabilityReport, UnfoldError> {
    let base = fam.base();
    let rep: QuotientReport = codimension(&base, mode)?;
    let mut reasons = Vec::new();
    let versal = match check_versality(fam, mode) {
        Ok(v) => v,
        Err(UnfoldError::Local(LocalError::Indeterminate)) => {
            reasons.push("versality indeterminate at the working truncation".into());
            false
        }
        Err(e) => return Err(e),
    };
    if rep.codim.finite().is_none() {
        reasons.push("base germ has infinite codimension".into());
    }
    let class = match classify(&base, mode)? {
        ClassifyOutcome::Class(c) => c.label(),
        ClassifyOutcome::NotSimple { .. } => "NOT_SIMPLE".to_string(),
    };
    let determinacy = determinacy_bound(&base, mode, crate::local::DEFAULT_DETERMINACY_CAP)?;
    reasons.push(if versal {
        "stable map: the generating family is infinitesimally versal".into()
    } else {
        "not stable: the generating family is not infinitesimally versal".into()
    });
    Ok(StabilityReport {
        versal,
        codim: rep.codim.clone(),
        class,
        determinacy,
        l_used: rep.l_used,
        reasons,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_in, parse_poly};

    fn germ(text: &str, r: usize, k: usize) -> CornerPoly {
        parse_poly(text, r, k, &[]).unwrap()
    }

    fn family(
        text: &str,
        r: usize,
        k: usize,
        params: &[&str],
        kind: FamilyKind,
    ) -> GeneratingFamily {
        let vars = VarSet::new(r, k, params.iter().map(|s| s.to_string()).collect());
        GeneratingFamily::new(parse_in(text, vars).unwrap(), kind).unwrap()
    }

    #[test]
    fn build_versal_b2() {
        for (g, expect) in [("x1^2", "x1*u1 + x1^2"), ("-x1^2", "x1*u1 - x1^2")] {
            let fam = build_versal(&germ(g, 1, 0), Mode::R, FamilyKind::Lagrangian).unwrap();
            assert_eq!(fam.to_string(), expect);
        }
    }

    #[test]
    fn build_versal_a2() {
        let fam = build_versal(&germ("y1^3", 0, 1), Mode::R, FamilyKind::Lagrangian).unwrap();
        assert_eq!(fam.to_string(), "y1*u1 + y1^3");
        assert_eq!(fam.n(), 1);
    }

    #[test]
    fn build_versal_c3_legendrian() {
        let fam =
            build_versal(&germ("x1*y1 + y1^3", 1, 1), Mode::K, FamilyKind::Legendrian).unwrap();
        // xy + y^3 + u1 y^2 + u2 y + z
        assert_eq!(fam.n(), 2);
        assert_eq!(fam.param_names(), &["u1", "u2", "z"]);
        assert_eq!(fam.to_string(), "z + y1*u2 + x1*y1 + y1^2*u1 + y1^3");
    }

    #[test]
    fn build_versal_rejects_infinite() {
        assert!(matches!(
            build_versal(&germ("x1*y1", 1, 1), Mode::R, FamilyKind::Lagrangian),
            Err(UnfoldError::InfiniteCodimension)
        ));
    }

    #[test]
    fn versality_examples() {
        let a2 = family("y1^3 + q1*y1", 0, 1, &["q1"], FamilyKind::Lagrangian);
        assert!(check_versality(&a2, Mode::R).unwrap());

        let bare = family("y1^3", 0, 1, &[], FamilyKind::Lagrangian);
        assert!(!check_versality(&bare, Mode::R).unwrap());

        let partial = family("y1^4 + q1*y1^2", 0, 1, &["q1"], FamilyKind::Lagrangian);
        assert!(!check_versality(&partial, Mode::R).unwrap());
        let full = family(
            "y1^4 + q1*y1^2 + q2*y1",
            0,
            1,
            &["q1", "q2"],
            FamilyKind::Lagrangian,
        );
        assert!(check_versality(&full, Mode::R).unwrap());
    }

    #[test]
    fn versal_round_trip_and_minimality() {
        for (g, r, k, mode, kind) in [
            ("x1^2 + y1^3", 1, 1, Mode::R, FamilyKind::Lagrangian),
            ("x1*y1 + y1^3", 1, 1, Mode::K, FamilyKind::Legendrian),
            ("y1^4", 0, 1, Mode::R, FamilyKind::Lagrangian),
        ] {
            let fam = build_versal(&germ(g, r, k), mode, kind).unwrap();
            assert!(check_versality(&fam, mode).unwrap(), "{g} versal");
            for i in 0..fam.param_names().len() {
                let smaller = fam.without_param(i).unwrap();
                assert!(
                    !check_versality(&smaller, mode).unwrap(),
                    "{g} minus param {i} must fail"
                );
            }
        }
    }

    #[test]
    fn parameter_permutation_keeps_verdict() {
        let f1 = family(
            "y1^4 + q1*y1^2 + q2*y1",
            0,
            1,
            &["q1", "q2"],
            FamilyKind::Lagrangian,
        );
        let f2 = family(
            "y1^4 + q2*y1^2 + q1*y1",
            0,
            1,
            &["q1", "q2"],
            FamilyKind::Lagrangian,
        );
        assert_eq!(
            check_versality(&f1, Mode::R).unwrap(),
            check_versality(&f2, Mode::R).unwrap()
        );
        // adding a parameter-dependent constant does not change the verdict
        let f3 = family(
            "y1^4 + q1*y1^2 + q2*y1 + q1^2",
            0,
            1,
            &["q1", "q2"],
            FamilyKind::Lagrangian,
        );
        assert!(check_versality(&f3, Mode::R).unwrap());
    }

    #[test]
    fn stability_verdicts() {
        let a2 = family("y1^3 + q1*y1", 0, 1, &["q1"], FamilyKind::Lagrangian);
        let rep = stability_verdict(&a2, Mode::R).unwrap();
        assert!(rep.versal);
        assert_eq!(rep.class, "A2");

        let bare = family("y1^3", 0, 1, &[], FamilyKind::Lagrangian);
        assert!(!stability_verdict(&bare, Mode::R).unwrap().versal);

        // B4 with only 2 parameters cannot be stable (codim 3)
        let b4 = family(
            "x1^4 + q1*x1^3 + q2*x1^2",
            1,
            0,
            &["q1", "q2"],
            FamilyKind::Lagrangian,
        );
        let rep = stability_verdict(&b4, Mode::R).unwrap();
        assert!(!rep.versal);
        assert_eq!(rep.codim, Codim::Finite(3));
    }
}
