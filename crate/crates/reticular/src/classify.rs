//! Splitting-lemma reduction and recognition of the simple classes:
//! A/D/E for r=0 and B/C/F for r=1, under reticular R- or K-equivalence.
//!
//! Recognition is invariant-based: corank and signature of the y-Hessian,
//! vanishing orders, binary-cubic root structure for corank 2, and a final
//! codimension cross-check certifying every answer.

use num::{Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::local::{codimension, Codim, LocalError, Mode, QuotientReport};
use crate::poly::{coef, Coef, CornerPoly, Mono, VarSet};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ClassifyError {
    #[error("classification supports r in {{0,1}} only, got r={0}")]
    Unsupported(usize),
    #[error(transparent)]
    Local(#[from] LocalError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Series {
    A,
    B,
    C,
    D,
    E,
    F,
}

impl Series {
    fn letter(self) -> char {
        match self {
            Series::A => 'A',
            Series::B => 'B',
            Series::C => 'C',
            Series::D => 'D',
            Series::E => 'E',
            Series::F => 'F',
        }
    }
}

/// A recognized normal-form label.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GermClass {
    pub series: Series,
    pub index: usize,
    /// +1/-1 where the class carries a sign (K-mode C-series: the ε tag).
    pub sign: Option<i8>,
    pub mode: Mode,
    pub corank: usize,
    pub codim: usize,
}

impl GermClass {
    /// Serialized label: "A2", "A3+", "B3-", "C3e+", "D5", "F4+", ...
    pub fn label(&self) -> String {
        let base = format!("{}{}", self.series.letter(), self.index);
        match self.sign {
            None => base,
            Some(s) => {
                let sgn = if s >= 0 { '+' } else { '-' };
                if self.mode == Mode::K && self.series == Series::C {
                    format!("{base}e{sgn}")
                } else {
                    format!("{base}{sgn}")
                }
            }
        }
    }
}

impl std::fmt::Display for GermClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.label())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ClassifyOutcome {
    Class(GermClass),
    NotSimple { codim: Codim, reason: String },
}

impl ClassifyOutcome {
    pub fn class(&self) -> Option<&GermClass> {
        match self {
            ClassifyOutcome::Class(c) => Some(c),
            ClassifyOutcome::NotSimple { .. } => None,
        }
    }

    pub fn label(&self) -> String {
        match self {
            ClassifyOutcome::Class(c) => c.label(),
            ClassifyOutcome::NotSimple { .. } => "NOT_SIMPLE".to_string(),
        }
    }
}

/// Result of the stable (splitting lemma) reduction.
#[derive(Clone, Debug)]
pub struct SplitReport {
    /// Germ in x and the corank-many remaining y variables; zero 2-jet in y.
    pub residual: CornerPoly,
    pub quad_rank: usize,
    /// Inertia (positive, negative) of the split quadratic part.
    pub quad_signature: (usize, usize),
    pub change_log: Vec<String>,
}

/// Classification plus the intermediate artifacts, for reporting.
#[derive(Clone, Debug)]
pub struct Classification {
    pub outcome: ClassifyOutcome,
    pub split: SplitReport,
    pub codim_report: QuotientReport,
}

fn sign_of(c: &Coef) -> i8 {
    if c.is_negative() {
        -1
    } else {
        1
    }
}

/// Congruence-diagonalize a symmetric rational matrix. Returns the change of
/// basis C (columns are the new basis vectors) and the diagonal of CᵀHC,
/// arranged so the nonzero entries come first.
fn diagonalize_symmetric(mut h: Vec<Vec<Coef>>) -> (Vec<Vec<Coef>>, Vec<Coef>) {
    let k = h.len();
    let mut c: Vec<Vec<Coef>> = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| if i == j { coef(1) } else { coef(0) })
                .collect()
        })
        .collect();

    // right-multiply C by elementary T, congruence-update H
    let apply = |h: &mut Vec<Vec<Coef>>, c: &mut Vec<Vec<Coef>>, t: &Vec<Vec<Coef>>| {
        let k = h.len();
        let mut ht = vec![vec![Coef::zero(); k]; k];
        for i in 0..k {
            for j in 0..k {
                let mut s = Coef::zero();
                for m in 0..k {
                    s += h[i][m].clone() * t[m][j].clone();
                }
                ht[i][j] = s;
            }
        }
        let mut tht = vec![vec![Coef::zero(); k]; k];
        for i in 0..k {
            for j in 0..k {
                let mut s = Coef::zero();
                for m in 0..k {
                    s += t[m][i].clone() * ht[m][j].clone();
                }
                tht[i][j] = s;
            }
        }
        *h = tht;
        let mut cnew = vec![vec![Coef::zero(); k]; k];
        for i in 0..k {
            for j in 0..k {
                let mut s = Coef::zero();
                for m in 0..k {
                    s += c[i][m].clone() * t[m][j].clone();
                }
                cnew[i][j] = s;
            }
        }
        *c = cnew;
    };

    let elem = |k: usize, f: &dyn Fn(usize, usize) -> Coef| -> Vec<Vec<Coef>> {
        (0..k).map(|i| (0..k).map(|j| f(i, j)).collect()).collect()
    };
    let identity = |k: usize| elem(k, &|i, j| if i == j { coef(1) } else { coef(0) });

    for step in 0..k {
        if h[step][step].is_zero() {
            if let Some(i) = (step + 1..k).find(|&i| !h[i][i].is_zero()) {
                let mut t = identity(k);
                t[step][step] = coef(0);
                t[i][i] = coef(0);
                t[step][i] = coef(1);
                t[i][step] = coef(1);
                apply(&mut h, &mut c, &t);
            } else if let Some((i, j)) = (step..k)
                .flat_map(|i| (i + 1..k).map(move |j| (i, j)))
                .find(|&(i, j)| !h[i][j].is_zero())
            {
                // make a nonzero diagonal entry out of an off-diagonal one
                let mut t = identity(k);
                t[j][i] = coef(1); // new e_i = e_i + e_j
                apply(&mut h, &mut c, &t);
                if i != step {
                    let mut t = identity(k);
                    t[step][step] = coef(0);
                    t[i][i] = coef(0);
                    t[step][i] = coef(1);
                    t[i][step] = coef(1);
                    apply(&mut h, &mut c, &t);
                }
            } else {
                break; // remaining block is zero
            }
        }
        let pivot = h[step][step].clone();
        for j in step + 1..k {
            if !h[step][j].is_zero() {
                let mut t = identity(k);
                t[step][j] = -h[step][j].clone() / pivot.clone();
                apply(&mut h, &mut c, &t);
            }
        }
    }

    // move nonzero diagonal entries to the front
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by_key(|&i| h[i][i].is_zero());
    let perm = elem(k, &|i, j| if order[j] == i { coef(1) } else { coef(0) });
    apply(&mut h, &mut c, &perm);
    let diag = (0..k).map(|i| h[i][i].clone()).collect();
    (c, diag)
}

/// Stable reduction at an explicit truncation.
pub fn split_at(f: &CornerPoly, l: usize) -> Result<SplitReport, LocalError> {
    let vars = f.vars().clone();
    if !vars.params.is_empty() {
        return Err(LocalError::HasParameters);
    }
    if !f.constant_term().is_zero() {
        return Err(LocalError::NonzeroConstantTerm);
    }
    if let Some(ord) = f.order() {
        if ord < 2 {
            return Err(LocalError::NotInMSquared(f.truncate(1).to_string()));
        }
    }
    let (r, k) = (vars.r, vars.k);
    let mut log = Vec::new();

    let h = f.y_hessian();
    let (cmat, diag) = diagonalize_symmetric(h.clone());
    let m = diag.iter().filter(|d| !d.is_zero()).count();
    let pos = diag.iter().filter(|d| d.is_positive()).count();
    let neg = diag.iter().filter(|d| d.is_negative()).count();
    log.push(format!(
        "diagonalized y-Hessian: rank {m}, signature ({pos},{neg})"
    ));

    // f_diag(y) = f(C y)
    let mut images: Vec<CornerPoly> = (0..vars.len())
        .map(|v| CornerPoly::var(vars.clone(), v))
        .collect();
    for i in 0..k {
        let mut im = CornerPoly::zero(vars.clone());
        for j in 0..k {
            if !cmat[i][j].is_zero() {
                im = im.add(&CornerPoly::var(vars.clone(), vars.y(j)).scale(&cmat[i][j]));
            }
        }
        images[vars.y(i)] = im;
    }
    let f_diag = f.substitute_into(vars.clone(), &images, l);

    // Solve the critical equations in the split variables z = y_1..y_m by
    // iteration; the Hessian block is diagonal and invertible.
    let mut zeta: Vec<CornerPoly> = (0..m).map(|_| CornerPoly::zero(vars.clone())).collect();
    let grads: Vec<CornerPoly> = (0..m).map(|i| f_diag.derivative(vars.y(i))).collect();
    let max_iter = 2 * l + 4;
    let mut converged = false;
    for _ in 0..max_iter {
        let bindings: Vec<(usize, CornerPoly)> =
            (0..m).map(|i| (vars.y(i), zeta[i].clone())).collect();
        let residuals: Vec<CornerPoly> = grads
            .iter()
            .map(|g| g.substitute(&bindings, l.saturating_sub(1)))
            .collect();
        if residuals.iter().all(|r| r.is_zero()) {
            converged = true;
            break;
        }
        let mut changed = false;
        for i in 0..m {
            if residuals[i].is_zero() {
                continue;
            }
            let delta = residuals[i].scale(&(-coef(1) / diag[i].clone()));
            zeta[i] = zeta[i].add(&delta).truncate(l);
            changed = true;
        }
        if !changed {
            break;
        }
    }
    assert!(
        converged,
        "split: critical-point iteration did not converge"
    );
    log.push(format!(
        "solved critical equations for {m} split variable(s) to order {l}"
    ));

    let bindings: Vec<(usize, CornerPoly)> = (0..m).map(|i| (vars.y(i), zeta[i].clone())).collect();
    let g_full = f_diag.substitute(&bindings, l);

    // drop the split variables: y_{m+1..k} become y_1..y_{k-m}
    let tvars = VarSet::germ(r, k - m);
    let timgs: Vec<CornerPoly> = (0..vars.len())
        .map(|v| {
            if v < r {
                CornerPoly::var(tvars.clone(), v)
            } else if v < r + k {
                let j = v - r;
                if j < m {
                    CornerPoly::zero(tvars.clone())
                } else {
                    CornerPoly::var(tvars.clone(), tvars.y(j - m))
                }
            } else {
                unreachable!()
            }
        })
        .collect();
    let residual = g_full.substitute_into(tvars, &timgs, l);
    debug_assert!(
        residual.y_hessian().iter().flatten().all(|c| c.is_zero()),
        "residual must have zero 2-jet in its y variables"
    );

    Ok(SplitReport {
        residual,
        quad_rank: m,
        quad_signature: (pos, neg),
        change_log: log,
    })
}

/// Stable reduction with a default truncation adequate for the input degree.
pub fn split(f: &CornerPoly) -> Result<SplitReport, LocalError> {
    let l = f.degree().unwrap_or(2).max(8) + 2;
    split_at(f, l)
}

/// Coefficient of a pure power v^e in p.
fn pure_coeff(p: &CornerPoly, v: usize, e: u32) -> Coef {
    let n = p.nvars();
    let mut exps = vec![0u32; n];
    exps[v] = e;
    p.coeff(&Mono(exps))
}

/// The part of p supported on powers of a single variable, as (order, coeff)
/// of the lowest such term with degree >= min_deg.
fn pure_series_lead(p: &CornerPoly, v: usize, min_deg: usize) -> Option<(usize, Coef)> {
    p.terms()
        .filter(|(m, _)| {
            m.degree() >= min_deg && m.0.iter().enumerate().all(|(w, &e)| w == v || e == 0)
        })
        .map(|(m, c)| (m.degree(), c.clone()))
        .next()
}

/// Recognition data for a corank-2 residual (r = 0).
struct Cubic {
    a: Coef, // y1^3
    b: Coef, // y1^2 y2
    c: Coef, // y1 y2^2
    d: Coef, // y2^3
}

impl Cubic {
    fn of(p: &CornerPoly) -> Cubic {
        let vars = p.vars();
        let (v1, v2) = (vars.y(0), vars.y(1));
        let mono = |e1: u32, e2: u32| {
            let mut exps = vec![0u32; p.nvars()];
            exps[v1] = e1;
            exps[v2] = e2;
            Mono(exps)
        };
        Cubic {
            a: p.coeff(&mono(3, 0)),
            b: p.coeff(&mono(2, 1)),
            c: p.coeff(&mono(1, 2)),
            d: p.coeff(&mono(0, 3)),
        }
    }

    fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero() && self.c.is_zero() && self.d.is_zero()
    }

    fn discriminant(&self) -> Coef {
        let (a, b, c, d) = (&self.a, &self.b, &self.c, &self.d);
        coef(18) * a.clone() * b.clone() * c.clone() * d.clone()
            - coef(4) * b.clone() * b.clone() * b.clone() * d.clone()
            + b.clone() * b.clone() * c.clone() * c.clone()
            - coef(4) * a.clone() * c.clone() * c.clone() * c.clone()
            - coef(27) * a.clone() * a.clone() * d.clone() * d.clone()
    }

    /// For a degenerate cubic: the repeated linear factor (alpha, beta) for
    /// alpha*y1 + beta*y2, and for a double root the cofactor form scaled so
    /// cubic = L1^2 * L2 exactly. A triple root reports the direction alone
    /// (the cubic stays kappa * y1^3 after the change, kappa rational).
    fn repeated_factor(&self) -> Option<RepeatedFactor> {
        let (a, b, c, d) = (&self.a, &self.b, &self.c, &self.d);
        if a.is_zero() && b.is_zero() {
            // y2^2 divides the form
            if c.is_zero() {
                if d.is_zero() {
                    return None;
                }
                return Some(RepeatedFactor::Triple {
                    l1: (coef(0), coef(1)),
                });
            }
            return Some(RepeatedFactor::Double {
                l1: (coef(0), coef(1)),
                l2: (c.clone(), d.clone()),
            });
        }
        if a.is_zero() {
            // form = y2 (b y1^2 + c y1 y2 + d y2^2), double root from the quadratic
            let disc = c.clone() * c.clone() - coef(4) * b.clone() * d.clone();
            if !disc.is_zero() {
                return None;
            }
            let rho = -c.clone() / (coef(2) * b.clone());
            return Some(RepeatedFactor::Double {
                l1: (coef(1), -rho),
                l2: (coef(0), b.clone()),
            });
        }
        // full cubic p(t) = a t^3 + b t^2 + c t + d
        // triple root iff p = a (t - rho)^3 with rho = -b/(3a)
        let rho3 = -b.clone() / (coef(3) * a.clone());
        let is_triple = {
            // compare coefficients of a(t-rho)^3
            let r = rho3.clone();
            let c_exp = coef(3) * a.clone() * r.clone() * r.clone();
            let d_exp = -a.clone() * r.clone() * r.clone() * r.clone();
            c_exp == *c && d_exp == *d
        };
        if is_triple {
            return Some(RepeatedFactor::Triple {
                l1: (coef(1), -rho3),
            });
        }
        // double root: common root of p and p'; p' = 3a t^2 + 2b t + c,
        // p'' = 6a t + 2b. Use the gcd structure: the double root rho solves
        // p(rho)=p'(rho)=0; eliminate to a linear condition.
        // gcd(p, p') over Q: do one Euclid step exactly.
        let p = [d.clone(), c.clone(), b.clone(), a.clone()]; // ascending
        let dp = [c.clone(), coef(2) * b.clone(), coef(3) * a.clone()];
        let rem = poly_rem_cubic(&p, &dp);
        // rem is linear (disc = 0, not triple): root is the double root
        let (r0, r1) = (&rem[0], &rem[1]);
        if r1.is_zero() {
            return None;
        }
        let rho = -r0.clone() / r1.clone();
        // remaining simple root sigma: a(t-rho)^2(t-sigma): t^2 coeff: -a(2rho+sigma)=b
        let sigma = -(b.clone() / a.clone()) - coef(2) * rho.clone();
        Some(RepeatedFactor::Double {
            l1: (coef(1), -rho.clone()),
            l2: (a.clone(), -a.clone() * sigma),
        })
    }
}

enum RepeatedFactor {
    Double { l1: (Coef, Coef), l2: (Coef, Coef) },
    Triple { l1: (Coef, Coef) },
}

/// Remainder of a cubic (ascending coeffs, degree 3) modulo a quadratic.
fn poly_rem_cubic(p: &[Coef; 4], q: &[Coef; 3]) -> [Coef; 2] {
    // p - (p3/q2) t q - ((p2 - p3 q1/q2)/q2) q
    let lead = p[3].clone() / q[2].clone();
    let mut r = [
        p[0].clone(),
        p[1].clone() - lead.clone() * q[0].clone(),
        p[2].clone() - lead.clone() * q[1].clone(),
    ];
    let lead2 = r[2].clone() / q[2].clone();
    [
        r[0].clone() - lead2.clone() * q[0].clone(),
        std::mem::take(&mut r[1]) - lead2 * q[1].clone(),
    ]
}

/// Substitute a rational linear change of the two y variables: y = M * y_new.
fn linear_change_2(p: &CornerPoly, m: &[[Coef; 2]; 2], l: usize) -> CornerPoly {
    let vars = p.vars().clone();
    let (v1, v2) = (vars.y(0), vars.y(1));
    let y1 = CornerPoly::var(vars.clone(), v1);
    let y2 = CornerPoly::var(vars.clone(), v2);
    let img1 = y1.scale(&m[0][0]).add(&y2.scale(&m[0][1]));
    let img2 = y1.scale(&m[1][0]).add(&y2.scale(&m[1][1]));
    p.substitute(&[(v1, img1), (v2, img2)], l)
}

/// Invert a 2x2 rational matrix.
fn inv2(rows: &[[Coef; 2]; 2]) -> Option<[[Coef; 2]; 2]> {
    let det = rows[0][0].clone() * rows[1][1].clone() - rows[0][1].clone() * rows[1][0].clone();
    if det.is_zero() {
        return None;
    }
    Some([
        [
            rows[1][1].clone() / det.clone(),
            -rows[0][1].clone() / det.clone(),
        ],
        [-rows[1][0].clone() / det.clone(), rows[0][0].clone() / det],
    ])
}

/// Kill mixed terms of a corank-2 residual whose cubic is exactly y1^2*y2,
/// returning the reduced germ (shape y1^2 y2 + phi(y2) up to truncation).
fn reduce_d_mixed(mut g: CornerPoly, l: usize) -> CornerPoly {
    let vars = g.vars().clone();
    let (v1, v2) = (vars.y(0), vars.y(1));
    loop {
        // lowest offending mixed term: y1^a y2^b with a >= 1, not the cubic itself
        let target = g
            .terms()
            .filter(|(m, _)| {
                let (a, b) = (m.exp(v1), m.exp(v2));
                a >= 1 && !(a == 2 && b == 1)
            })
            .map(|(m, c)| (m.clone(), c.clone()))
            .next();
        let Some((m, c)) = target else { break };
        if m.degree() > l {
            break;
        }
        let (a, b) = (m.exp(v1), m.exp(v2));
        if a == 1 {
            // y1 -> y1 - (c/2) y2^(b-1)
            let mut e = vec![0u32; vars.len()];
            e[v2] = b - 1;
            let u = CornerPoly::monomial(vars.clone(), Mono(e), -c.clone() / coef(2));
            let y1 = CornerPoly::var(vars.clone(), v1);
            g = g.substitute(&[(v1, y1.add(&u))], l);
        } else {
            // y2 -> y2 - c y1^(a-2) y2^b
            let mut e = vec![0u32; vars.len()];
            e[v1] = a - 2;
            e[v2] = b;
            let v = CornerPoly::monomial(vars.clone(), Mono(e), -c.clone());
            let y2 = CornerPoly::var(vars.clone(), v2);
            g = g.substitute(&[(v2, y2.add(&v))], l);
        }
    }
    g
}

struct Recognized {
    series: Series,
    index: usize,
    raw_sign: i8,
    log: Vec<String>,
}

/// Recognize the residual of an r=0 germ.
fn recognize_interior(resid: &CornerPoly, l: usize) -> Option<Recognized> {
    let corank = resid.vars().k;
    match corank {
        0 => Some(Recognized {
            series: Series::A,
            index: 1,
            raw_sign: 1,
            log: vec!["nondegenerate quadratic: A1".into()],
        }),
        1 => {
            let v = resid.vars().y(0);
            let (s, c) = pure_series_lead(resid, v, 3)?;
            Some(Recognized {
                series: Series::A,
                index: s - 1,
                raw_sign: sign_of(&c),
                log: vec![format!("one-variable residual of order {s}")],
            })
        }
        2 => {
            let cubic = Cubic::of(resid);
            if cubic.is_zero() {
                return None;
            }
            let disc = cubic.discriminant();
            if !disc.is_zero() {
                // nondegenerate cubic: D4 (three real factors: -, one: +)
                let sign = if disc.is_positive() { -1 } else { 1 };
                return Some(Recognized {
                    series: Series::D,
                    index: 4,
                    raw_sign: sign,
                    log: vec![format!(
                        "nondegenerate cubic, discriminant sign {}",
                        if disc.is_positive() { "+" } else { "-" }
                    )],
                });
            }
            match cubic.repeated_factor()? {
                RepeatedFactor::Double { l1, l2 } => {
                    let m = inv2(&[[l1.0.clone(), l1.1.clone()], [l2.0.clone(), l2.1.clone()]])?;
                    let g = linear_change_2(resid, &m, l);
                    let g = reduce_d_mixed(g, l);
                    let v2 = g.vars().y(1);
                    let (s, c) = pure_series_lead(&g, v2, 4)?;
                    Some(Recognized {
                        series: Series::D,
                        index: s + 1,
                        raw_sign: sign_of(&c),
                        log: vec![format!(
                            "degenerate cubic with double factor; reduced pure part of order {s}"
                        )],
                    })
                }
                RepeatedFactor::Triple { l1 } => {
                    // normalize cubic direction to y1
                    let comp = if !l1.0.is_zero() {
                        (coef(0), coef(1))
                    } else {
                        (coef(1), coef(0))
                    };
                    let m = inv2(&[[l1.0.clone(), l1.1.clone()], [comp.0, comp.1]])?;
                    let g = linear_change_2(resid, &m, l);
                    let v2 = g.vars().y(1);
                    let e = pure_coeff(&g, v2, 4);
                    if e.is_zero() {
                        return None;
                    }
                    Some(Recognized {
                        series: Series::E,
                        index: 6,
                        raw_sign: sign_of(&e),
                        log: vec!["cubic is a perfect cube; quartic on the kernel direction".into()],
                    })
                }
            }
        }
        _ => None,
    }
}

/// Recognize the residual of an r=1 germ.
fn recognize_corner(resid: &CornerPoly, _l: usize) -> Option<Recognized> {
    let vars = resid.vars().clone();
    let corank = vars.k;
    let vx = vars.x(0);
    match corank {
        0 => {
            let (s, c) = pure_series_lead(resid, vx, 2)?;
            Some(Recognized {
                series: Series::B,
                index: s,
                raw_sign: sign_of(&c),
                log: vec![format!("corner-variable residual of order {s}")],
            })
        }
        1 => {
            let vy = vars.y(0);
            let n = vars.len();
            let mono = |ex: u32, ey: u32| {
                let mut e = vec![0u32; n];
                e[vx] = ex;
                e[vy] = ey;
                Mono(e)
            };
            let a = resid.coeff(&mono(1, 1));
            let b = resid.coeff(&mono(2, 0));
            if !a.is_zero() {
                // C series: xy + eps y^l. Normalizing the xy coefficient by a
                // y-scaling multiplies the pure coefficient by a^(-s), so
                // eps = sign(c_s) * sign(a)^s.
                let (s, c) = pure_series_lead(resid, vy, 3)?;
                let a_pow = if s % 2 == 1 { sign_of(&a) } else { 1 };
                let eps = sign_of(&c) * a_pow;
                Some(Recognized {
                    series: Series::C,
                    index: s,
                    raw_sign: eps,
                    log: vec![format!(
                        "mixed term present; pure internal part of order {s}"
                    )],
                })
            } else if !b.is_zero() {
                let (s, _c3) = pure_series_lead(resid, vy, 3)?;
                if s != 3 {
                    return None;
                }
                Some(Recognized {
                    series: Series::F,
                    index: 4,
                    raw_sign: sign_of(&b),
                    log: vec!["corner square plus internal cubic".into()],
                })
            } else {
                None
            }
        }
        _ => None,
    }
}

/// Expected codimension of a class: R-mode is the R⁺ one (index - 1 for the
/// series here, 3 for F4, 5 for E6), K-mode is one more.
fn expected_codim(series: Series, index: usize, mode: Mode) -> usize {
    let mu = match series {
        Series::A | Series::B | Series::C | Series::D => index,
        Series::E => 6,
        Series::F => 4,
    };
    match mode {
        Mode::R => mu - 1,
        Mode::K => mu,
    }
}

fn index_valid(series: Series, index: usize) -> bool {
    match series {
        Series::A => index >= 1,
        Series::B => index >= 2,
        Series::C => index >= 3,
        Series::D => index >= 4,
        Series::E => index == 6,
        Series::F => index == 4,
    }
}

/// Sign bookkeeping per mode. Returns (stored sign, log note).
fn normalize_sign(
    series: Series,
    index: usize,
    raw: i8,
    mode: Mode,
) -> (Option<i8>, Option<String>) {
    match mode {
        Mode::R => {
            let keep = match series {
                Series::A => index >= 3 && index % 2 == 1,
                Series::B | Series::C | Series::D | Series::E | Series::F => true,
            };
            (keep.then_some(raw), None)
        }
        Mode::K => match series {
            Series::C => {
                // eps^(l-1) = 1: both signs for odd l, forced +1 for even l
                if index % 2 == 1 {
                    (Some(raw), None)
                } else {
                    let note = (raw < 0)
                        .then(|| format!("unit absorbed: raw sign - collapsed to C{index}"));
                    (None, note)
                }
            }
            Series::D => {
                if index % 2 == 0 {
                    (Some(raw), None)
                } else {
                    let note = (raw < 0)
                        .then(|| format!("unit absorbed: raw sign - collapsed to D{index}"));
                    (None, note)
                }
            }
            _ => {
                let note = (raw < 0).then(|| "unit absorbed: raw sign - dropped".to_string());
                (None, note)
            }
        },
    }
}

/// Full classification with intermediate reports.
pub fn classify_detailed(f: &CornerPoly, mode: Mode) -> Result<Classification, ClassifyError> {
    let r = f.vars().r;
    if r > 1 {
        return Err(ClassifyError::Unsupported(r));
    }
    let codim_report = codimension(f, mode)?;
    let l_work = (codim_report.l_used + 2).max(8).min(16);
    let mut split = split_at(f, l_work)?;

    let Some(codim) = codim_report.codim.finite() else {
        return Ok(Classification {
            outcome: ClassifyOutcome::NotSimple {
                codim: Codim::Infinite,
                reason: "infinite codimension".into(),
            },
            split,
            codim_report,
        });
    };

    let recognized = if r == 0 {
        recognize_interior(&split.residual, l_work)
    } else {
        recognize_corner(&split.residual, l_work)
    };

    let Some(rec) = recognized else {
        return Ok(Classification {
            outcome: ClassifyOutcome::NotSimple {
                codim: Codim::Finite(codim),
                reason: "invariants match no simple class".into(),
            },
            split,
            codim_report,
        });
    };
    split.change_log.extend(rec.log.clone());

    if !index_valid(rec.series, rec.index) || expected_codim(rec.series, rec.index, mode) != codim {
        return Ok(Classification {
            outcome: ClassifyOutcome::NotSimple {
                codim: Codim::Finite(codim),
                reason: format!(
                    "codimension {codim} inconsistent with candidate {}{}",
                    rec.series.letter(),
                    rec.index
                ),
            },
            split,
            codim_report,
        });
    }

    let (sign, note) = normalize_sign(rec.series, rec.index, rec.raw_sign, mode);
    if let Some(n) = note {
        split.change_log.push(n);
    }
    let class = GermClass {
        series: rec.series,
        index: rec.index,
        sign,
        mode,
        corank: split.residual.vars().k,
        codim,
    };
    Ok(Classification {
        outcome: ClassifyOutcome::Class(class),
        split,
        codim_report,
    })
}

/// Recognize the simple class of a germ, or NOT_SIMPLE.
pub fn classify(f: &CornerPoly, mode: Mode) -> Result<ClassifyOutcome, ClassifyError> {
    classify_detailed(f, mode).map(|c| c.outcome)
}

/// True iff classify returns a class.
pub fn is_simple(f: &CornerPoly, mode: Mode) -> Result<bool, ClassifyError> {
    Ok(classify(f, mode)?.class().is_some())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_poly;

    fn germ(text: &str, r: usize, k: usize) -> CornerPoly {
        parse_poly(text, r, k, &[]).unwrap()
    }

    fn label(text: &str, r: usize, k: usize, mode: Mode) -> String {
        classify(&germ(text, r, k), mode).unwrap().label()
    }

    #[test]
    fn split_examples() {
        let s = split(&germ("y1^2 + y2^3", 0, 2)).unwrap();
        assert_eq!(s.quad_rank, 1);
        assert_eq!(s.residual.vars().k, 1);
        assert_eq!(s.residual, germ("y1^3", 0, 1));

        let s = split(&germ("x1^2 + y1^3", 1, 1)).unwrap();
        assert_eq!(s.quad_rank, 0);
        assert_eq!(s.residual, germ("x1^2 + y1^3", 1, 1));

        let s = split(&germ("y1*y2 + y1^3", 0, 2)).unwrap();
        assert_eq!(s.quad_rank, 2);
        assert_eq!(s.quad_signature, (1, 1));
        assert!(s.residual.is_zero());
    }

    #[test]
    fn classify_examples() {
        assert_eq!(label("x1^2 + y1^3 + y1^7", 1, 1, Mode::R), "F4+");
        assert_eq!(label("x1^3 + x1^4", 1, 0, Mode::R), "B3+");
        assert_eq!(label("y1^2 + y2^3", 0, 2, Mode::R), "A2");
        let out = classify(&germ("x1*y1", 1, 1), Mode::R).unwrap();
        assert_eq!(out.label(), "NOT_SIMPLE");
    }

    #[test]
    fn classify_morse_products() {
        assert_eq!(label("y1*y2 + y1^3", 0, 2, Mode::R), "A1");
    }

    #[test]
    fn corner_germ_with_internal_quadratic_splits_to_b_series() {
        assert_eq!(label("x1^2 + x1*y1 + y1^2", 1, 1, Mode::R), "B2+");
        assert_eq!(label("-x1^2 + x1*y1 - y1^2", 1, 1, Mode::R), "B2-");
        // an internal variable the germ never couples to leaves the
        // codimension infinite
        let out = classify(&germ("y1^2", 1, 1), Mode::R).unwrap();
        assert_eq!(out.label(), "NOT_SIMPLE");
    }

    #[test]
    fn simple_list_round_trip_r_mode() {
        // B_l, C_l, F_4 for l <= 6 (r = 1)
        for l in 2..=6 {
            assert_eq!(label(&format!("x1^{l}"), 1, 0, Mode::R), format!("B{l}+"));
            assert_eq!(label(&format!("-x1^{l}"), 1, 0, Mode::R), format!("B{l}-"));
        }
        for l in 3..=6 {
            assert_eq!(
                label(&format!("x1*y1 + y1^{l}"), 1, 1, Mode::R),
                format!("C{l}+")
            );
            assert_eq!(
                label(&format!("x1*y1 - y1^{l}"), 1, 1, Mode::R),
                format!("C{l}-")
            );
        }
        assert_eq!(label("x1^2 + y1^3", 1, 1, Mode::R), "F4+");
        assert_eq!(label("-x1^2 + y1^3", 1, 1, Mode::R), "F4-");
    }

    #[test]
    fn simple_list_round_trip_ade() {
        assert_eq!(label("y1^3", 0, 1, Mode::R), "A2");
        assert_eq!(label("y1^4", 0, 1, Mode::R), "A3+");
        assert_eq!(label("-y1^4", 0, 1, Mode::R), "A3-");
        assert_eq!(label("y1^5", 0, 1, Mode::R), "A4");
        assert_eq!(label("y1^6", 0, 1, Mode::R), "A5+");
        assert_eq!(label("y1^7", 0, 1, Mode::R), "A6");
        assert_eq!(label("y1^2*y2 + y2^3", 0, 2, Mode::R), "D4+");
        assert_eq!(label("y1^2*y2 - y2^3", 0, 2, Mode::R), "D4-");
        assert_eq!(label("y1^2*y2 + y2^4", 0, 2, Mode::R), "D5+");
        assert_eq!(label("y1^2*y2 - y2^4", 0, 2, Mode::R), "D5-");
        assert_eq!(label("y1^2*y2 + y2^5", 0, 2, Mode::R), "D6+");
        assert_eq!(label("y1^3 + y2^4", 0, 2, Mode::R), "E6+");
        assert_eq!(label("y1^3 - y2^4", 0, 2, Mode::R), "E6-");
    }

    #[test]
    fn k_mode_collapses_signs() {
        assert_eq!(label("x1^3", 1, 0, Mode::K), "B3");
        assert_eq!(label("-x1^3", 1, 0, Mode::K), "B3");
        assert_eq!(label("x1*y1 + y1^3", 1, 1, Mode::K), "C3e+");
        assert_eq!(label("x1*y1 - y1^3", 1, 1, Mode::K), "C3e-");
        assert_eq!(label("x1*y1 + y1^4", 1, 1, Mode::K), "C4");
        assert_eq!(label("x1*y1 - y1^4", 1, 1, Mode::K), "C4");
        assert_eq!(label("x1^2 + y1^3", 1, 1, Mode::K), "F4");
        assert_eq!(label("y1^2*y2 + y2^4", 0, 2, Mode::K), "D5");
        assert_eq!(label("y1^2*y2 - y2^3", 0, 2, Mode::K), "D4-");
        assert_eq!(label("y1^3 - y2^4", 0, 2, Mode::K), "E6");
    }

    #[test]
    fn simple_list_round_trip_k_mode() {
        // B_l and C^eps_l (eps^(l-1) = 1) with l <= 6, both input signs
        for l in 2..=6 {
            assert_eq!(label(&format!("x1^{l}"), 1, 0, Mode::K), format!("B{l}"));
            assert_eq!(label(&format!("-x1^{l}"), 1, 0, Mode::K), format!("B{l}"));
        }
        for l in 3..=6 {
            let plus = label(&format!("x1*y1 + y1^{l}"), 1, 1, Mode::K);
            let minus = label(&format!("x1*y1 - y1^{l}"), 1, 1, Mode::K);
            if l % 2 == 1 {
                assert_eq!(plus, format!("C{l}e+"));
                assert_eq!(minus, format!("C{l}e-"));
            } else {
                assert_eq!(plus, format!("C{l}"));
                assert_eq!(minus, format!("C{l}"));
            }
        }
    }

    #[test]
    fn c_series_sign_respects_mixed_coefficient() {
        // -xy + y^3 ~ xy - y^3 via y -> -y
        assert_eq!(label("-x1*y1 + y1^3", 1, 1, Mode::R), "C3-");
        // -xy + y^4 ~ xy + y^4
        assert_eq!(label("-x1*y1 + y1^4", 1, 1, Mode::R), "C4+");
    }

    #[test]
    fn is_simple_examples() {
        assert!(is_simple(&germ("x1^2 + y1^3", 1, 1), Mode::R).unwrap());
        assert!(!is_simple(&germ("x1*y1", 1, 1), Mode::R).unwrap());
        assert!(is_simple(&germ("y1^5", 0, 1), Mode::R).unwrap());
    }

    #[test]
    fn stable_under_high_order_perturbation() {
        let f = germ("x1^2 + y1^3", 1, 1);
        let g = germ("x1^2 + y1^3 + y1^9", 1, 1);
        assert_eq!(
            classify(&f, Mode::R).unwrap(),
            classify(&g, Mode::R).unwrap()
        );
    }

    #[test]
    fn rejects_r_at_least_two() {
        let vars = VarSet::germ(2, 0);
        let f = CornerPoly::var(vars.clone(), 0).mul(&CornerPoly::var(vars, 1));
        assert!(matches!(
            classify(&f, Mode::R),
            Err(ClassifyError::Unsupported(2))
        ));
    }
}
