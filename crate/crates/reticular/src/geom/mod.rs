//! The symplectic/contact side: non-degeneracy rank checks, Hamiltonian and
//! contact-Hamiltonian vector fields, generating families built from
//! generating functions, the module-generation stability criterion for map
//! germs, and numerical caustic/wavefront extraction.
//!
//! Everything in this file is exact rational algebra; floats live in
//! [`solve`] and [`mesh`] only.

pub mod mesh;
pub mod solve;

use std::sync::Arc;

use num::Zero;
use thiserror::Error;

use crate::jets::jet_space;
use crate::linalg::{dense_rank, Reducer};
use crate::poly::{coef, Coef, CornerPoly, VarSet};
use crate::unfold::{FamilyKind, GeneratingFamily, UnfoldError};

#[derive(Debug, Error)]
pub enum GeomError {
    #[error("family is not S-non-degenerate")]
    NotSNondegenerate,
    #[error("family is not C-non-degenerate")]
    NotCNondegenerate,
    #[error("expected a {0:?} family")]
    WrongKind(FamilyKind),
    #[error("map germ is not {0} to the working order: {1}")]
    InvalidMap(&'static str, String),
    #[error("generating function must vanish to second order")]
    BadGeneratingFunction,
    #[error("corner count r={0} exceeds n={1}")]
    CornerExceedsDim(usize, usize),
    #[error("jet order {0} too small, need at least {1}")]
    JetOrderTooSmall(usize, usize),
    #[error("invalid region: {0}")]
    BadRegion(String),
    #[error("meshing supports ambient dimension <= 3, got {0}")]
    TooManyDims(usize),
    #[error("mesh is empty; OBJ/PLY export needs at least one point")]
    EmptyMesh,
    #[error("coordinates exceed 3 components; use CSV")]
    TooManyCoords,
    #[error(transparent)]
    Unfold(#[from] UnfoldError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// rank of the mixed-Hessian block [[F_xy, F_xq], [F_yy, F_yq]] at 0 equals
/// r + k: the family cuts out an honest configuration.
pub fn check_s_nondegenerate(fam: &GeneratingFamily) -> bool {
    if fam.kind != FamilyKind::Lagrangian {
        return false;
    }
    let f = &fam.poly;
    let vars = f.vars().clone();
    let (r, k) = (vars.r, vars.k);
    let n = vars.params.len();
    let origin = vec![Coef::zero(); vars.len()];
    let mut rows = Vec::new();
    let mut row_of = |v: usize| {
        let dv = f.derivative(v);
        let mut row = Vec::with_capacity(k + n);
        for j in 0..k {
            row.push(dv.derivative(vars.y(j)).eval(&origin));
        }
        for m in 0..n {
            row.push(dv.derivative(vars.param(m)).eval(&origin));
        }
        rows.push(row);
    };
    for i in 0..r {
        row_of(vars.x(i));
    }
    for j in 0..k {
        row_of(vars.y(j));
    }
    dense_rank(rows) == r + k
}

/// Legendrian analogue: dF/dx(0) = dF/dy(0) = 0 and the (1+r+k)-row matrix
/// [F_y F_q F_z; F_xy F_xq F_xz; F_yy F_yq F_yz] at 0 has rank r + k + 1.
pub fn check_c_nondegenerate(fam: &GeneratingFamily) -> bool {
    if fam.kind != FamilyKind::Legendrian {
        return false;
    }
    let f = &fam.poly;
    let vars = f.vars().clone();
    let (r, k) = (vars.r, vars.k);
    let np = vars.params.len(); // q1..qn, z
    let origin = vec![Coef::zero(); vars.len()];
    for i in 0..r {
        if !f.derivative(vars.x(i)).eval(&origin).is_zero() {
            return false;
        }
    }
    for j in 0..k {
        if !f.derivative(vars.y(j)).eval(&origin).is_zero() {
            return false;
        }
    }
    let cols: Vec<usize> = (0..k)
        .map(|j| vars.y(j))
        .chain((0..np).map(|m| vars.param(m)))
        .collect();
    let mut rows = Vec::new();
    let mut row_of = |g: &CornerPoly| {
        rows.push(
            cols.iter()
                .map(|&c| g.derivative(c).eval(&origin))
                .collect::<Vec<_>>(),
        );
    };
    row_of(f);
    for i in 0..r {
        let d = f.derivative(vars.x(i));
        row_of(&d);
    }
    for j in 0..k {
        let d = f.derivative(vars.y(j));
        row_of(&d);
    }
    dense_rank(rows) == r + k + 1
}

/// Phase-space variable set (q_1..q_n, p_1..p_n).
pub fn phase_vars(n: usize) -> Arc<VarSet> {
    let mut params: Vec<String> = (1..=n).map(|j| format!("q{j}")).collect();
    params.extend((1..=n).map(|j| format!("p{j}")));
    VarSet::new(0, 0, params)
}

/// Contact phase-space variable set (q_1..q_n, z, p_1..p_n).
pub fn contact_vars(n: usize) -> Arc<VarSet> {
    let mut params: Vec<String> = (1..=n).map(|j| format!("q{j}")).collect();
    params.push("z".to_string());
    params.extend((1..=n).map(|j| format!("p{j}")));
    VarSet::new(0, 0, params)
}

/// Source variable set of a symplectic map germ (Q_1..Q_n, P_1..P_n).
pub fn source_vars(n: usize) -> Arc<VarSet> {
    let mut params: Vec<String> = (1..=n).map(|j| format!("Q{j}")).collect();
    params.extend((1..=n).map(|j| format!("P{j}")));
    VarSet::new(0, 0, params)
}

/// Source variable set of a contact map germ (Q_1..Q_n, Z, P_1..P_n).
pub fn contact_source_vars(n: usize) -> Arc<VarSet> {
    let mut params: Vec<String> = (1..=n).map(|j| format!("Q{j}")).collect();
    params.push("Z".to_string());
    params.extend((1..=n).map(|j| format!("P{j}")));
    VarSet::new(0, 0, params)
}

/// Hamiltonian vector field of f(q, p):
/// X_f = sum_j (df/dp_j d/dq_j - df/dq_j d/dp_j).
/// Components returned in coordinate order (q_1..q_n, p_1..p_n).
pub fn hamiltonian_vf(f: &CornerPoly, n: usize) -> Vec<CornerPoly> {
    let vars = f.vars().clone();
    assert_eq!(vars.params.len(), 2 * n, "expected (q, p) coordinates");
    let mut comps = Vec::with_capacity(2 * n);
    for j in 0..n {
        comps.push(f.derivative(vars.param(n + j))); // q_j dot
    }
    for j in 0..n {
        comps.push(f.derivative(vars.param(j)).neg()); // p_j dot
    }
    comps
}

/// Contact Hamiltonian vector field of f(q, z, p):
/// X_f = sum_j (df/dq_j + p_j df/dz) d/dp_j - sum_j df/dp_j d/dq_j
///       + (f - sum_j p_j df/dp_j) d/dz.
/// Components returned in coordinate order (q_1..q_n, z, p_1..p_n).
pub fn contact_hamiltonian_vf(f: &CornerPoly, n: usize) -> Vec<CornerPoly> {
    let vars = f.vars().clone();
    assert_eq!(
        vars.params.len(),
        2 * n + 1,
        "expected (q, z, p) coordinates"
    );
    let zi = vars.param(n);
    let p = |j: usize| CornerPoly::var(vars.clone(), vars.param(n + 1 + j));
    let mut comps = Vec::with_capacity(2 * n + 1);
    for j in 0..n {
        comps.push(f.derivative(vars.param(n + 1 + j)).neg()); // q_j dot
    }
    let mut zdot = f.clone();
    for j in 0..n {
        zdot = zdot.sub(&p(j).mul(&f.derivative(vars.param(n + 1 + j))));
    }
    comps.push(zdot);
    for j in 0..n {
        comps.push(
            f.derivative(vars.param(j))
                .add(&p(j).mul(&f.derivative(zi))),
        );
    }
    comps
}

/// Coefficients of the 2-form d(alpha) for a polynomial 1-form alpha:
/// entry (a, b) with a < b is the coefficient of du_a ∧ du_b.
pub fn exterior_derivative(alpha: &[CornerPoly]) -> Vec<Vec<CornerPoly>> {
    let nv = alpha[0].nvars();
    let vars = alpha[0].vars().clone();
    let mut out = vec![vec![CornerPoly::zero(vars.clone()); nv]; nv];
    for a in 0..nv {
        for b in a + 1..nv {
            out[a][b] = alpha[b].derivative(a).sub(&alpha[a].derivative(b));
        }
    }
    out
}

/// Lie derivative of the symplectic form sum dp_j ∧ dq_j along a vector field
/// (components in order q_1..q_n, p_1..p_n). Zero iff the field is an
/// infinitesimal symplectomorphism.
pub fn lie_derivative_symplectic_form(vf: &[CornerPoly], n: usize) -> Vec<Vec<CornerPoly>> {
    // iota_X omega = sum_j (B_j dq_j - A_j dp_j) for X = A d/dq + B d/dp
    let vars = vf[0].vars().clone();
    let mut alpha = vec![CornerPoly::zero(vars.clone()); 2 * n];
    for j in 0..n {
        alpha[j] = vf[n + j].clone(); // coefficient of dq_j
        alpha[n + j] = vf[j].neg(); // coefficient of dp_j
    }
    exterior_derivative(&alpha)
}

/// theta(X) for theta = dz - sum p_j dq_j and a field with components in
/// order (q_1..q_n, z, p_1..p_n).
pub fn contact_form_on(vf: &[CornerPoly], n: usize) -> CornerPoly {
    let vars = vf[0].vars().clone();
    let mut out = vf[n].clone(); // z component
    for j in 0..n {
        let pj = CornerPoly::var(vars.clone(), vars.param(n + 1 + j));
        out = out.sub(&pj.mul(&vf[j]));
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MapKind {
    Symplectic,
    Contact,
}

/// A polynomial map germ presented by its components in source coordinates,
/// validated to be symplectic/contact up to the working jet order.
#[derive(Clone, Debug)]
pub struct MapGermSpec {
    pub kind: MapKind,
    pub n: usize,
    pub r: usize,
    pub l: usize,
    pub q_comps: Vec<CornerPoly>,
    pub z_comp: Option<CornerPoly>,
    pub p_comps: Vec<CornerPoly>,
}

impl MapGermSpec {
    /// Symplectic map germ S with components (q∘S, p∘S) in (Q, P).
    pub fn symplectic(
        n: usize,
        r: usize,
        l: usize,
        q_comps: Vec<CornerPoly>,
        p_comps: Vec<CornerPoly>,
    ) -> Result<Self, GeomError> {
        let sv = source_vars(n);
        assert!(q_comps
            .iter()
            .chain(p_comps.iter())
            .all(|c| c.vars() == &sv));
        let spec = MapGermSpec {
            kind: MapKind::Symplectic,
            n,
            r,
            l,
            q_comps,
            z_comp: None,
            p_comps,
        };
        // S*(sum dp ∧ dq) must equal sum dP ∧ dQ up to degree l
        let nv = 2 * n;
        let lcoef = l.saturating_sub(1);
        for a in 0..nv {
            for b in a + 1..nv {
                let mut c = CornerPoly::zero(sv.clone());
                for j in 0..n {
                    let pa = spec.p_comps[j].derivative(a);
                    let pb = spec.p_comps[j].derivative(b);
                    let qa = spec.q_comps[j].derivative(a);
                    let qb = spec.q_comps[j].derivative(b);
                    c = c.add(&pa.mul(&qb)).sub(&pb.mul(&qa));
                }
                // target: coefficient -1 on (Q_j, P_j) pairs, else 0
                let target = if b == a + n {
                    CornerPoly::constant(sv.clone(), -coef(1))
                } else {
                    CornerPoly::zero(sv.clone())
                };
                if c.truncate(lcoef) != target.truncate(lcoef) {
                    return Err(GeomError::InvalidMap(
                        "symplectic",
                        format!("pullback form mismatch at pair ({a},{b})"),
                    ));
                }
            }
        }
        Ok(spec)
    }

    /// Symplectic map germ validated at the default jet order n + 2.
    pub fn symplectic_default(
        n: usize,
        r: usize,
        q_comps: Vec<CornerPoly>,
        p_comps: Vec<CornerPoly>,
    ) -> Result<Self, GeomError> {
        Self::symplectic(n, r, n + 2, q_comps, p_comps)
    }

    /// Contact map germ C with components (q∘C, z∘C, p∘C) in (Q, Z, P):
    /// C*(dz - p dq) = g (dZ - P dQ) with g(0) != 0, up to degree l.
    pub fn contact(
        n: usize,
        r: usize,
        l: usize,
        q_comps: Vec<CornerPoly>,
        z_comp: CornerPoly,
        p_comps: Vec<CornerPoly>,
    ) -> Result<Self, GeomError> {
        let sv = contact_source_vars(n);
        let nv = 2 * n + 1;
        let zi = n; // index of Z among source vars
        let lcoef = l.saturating_sub(1);
        // alpha_a = d_a(zC) - sum_j pC_j d_a(qC_j)
        let mut alpha = Vec::with_capacity(nv);
        for a in 0..nv {
            let mut c = z_comp.derivative(a);
            for j in 0..n {
                c = c.sub(&p_comps[j].mul(&q_comps[j].derivative(a)));
            }
            alpha.push(c);
        }
        let g = alpha[zi].clone();
        if g.constant_term().is_zero() {
            return Err(GeomError::InvalidMap(
                "contact",
                "conformal factor vanishes at 0".into(),
            ));
        }
        for a in 0..nv {
            let target = if a == zi {
                continue;
            } else if a < n {
                // Q_a: coefficient -g * P_a
                let pa = CornerPoly::var(sv.clone(), sv.param(n + 1 + a));
                g.mul(&pa).neg()
            } else {
                CornerPoly::zero(sv.clone())
            };
            if alpha[a].truncate(lcoef) != target.truncate(lcoef) {
                return Err(GeomError::InvalidMap(
                    "contact",
                    format!("pullback one-form mismatch in component {a}"),
                ));
            }
        }
        Ok(MapGermSpec {
            kind: MapKind::Contact,
            n,
            r,
            l,
            q_comps,
            z_comp: Some(z_comp),
            p_comps,
        })
    }

    /// Contact map germ validated at the default jet order n + 2.
    pub fn contact_default(
        n: usize,
        r: usize,
        q_comps: Vec<CornerPoly>,
        z_comp: CornerPoly,
        p_comps: Vec<CornerPoly>,
    ) -> Result<Self, GeomError> {
        Self::contact(n, r, n + 2, q_comps, z_comp, p_comps)
    }
}

/// Generating family from a generating function H(Q, p):
/// H_0(x, y) = H(x_1..x_r, 0.., y_1..y_n); F = H_0 + <y, q> (- z).
pub fn family_from_generating_function(
    h: &CornerPoly,
    r: usize,
    n: usize,
    kind: FamilyKind,
) -> Result<GeneratingFamily, GeomError> {
    if r > n {
        return Err(GeomError::CornerExceedsDim(r, n));
    }
    assert_eq!(h.vars().params.len(), 2 * n, "H must live in (Q, p)");
    if h.order().unwrap_or(2) < 2 {
        return Err(GeomError::BadGeneratingFunction);
    }
    let mut params: Vec<String> = (1..=n).map(|m| format!("q{m}")).collect();
    if kind == FamilyKind::Legendrian {
        params.push("z".to_string());
    }
    let tvars = VarSet::new(r, n, params);
    let deg = h.degree().unwrap_or(2);
    // images of (Q_1..Q_n, p_1..p_n)
    let mut images = Vec::with_capacity(2 * n);
    for i in 0..n {
        if i < r {
            images.push(CornerPoly::var(tvars.clone(), tvars.x(i)));
        } else {
            images.push(CornerPoly::zero(tvars.clone()));
        }
    }
    for j in 0..n {
        images.push(CornerPoly::var(tvars.clone(), tvars.y(j)));
    }
    let mut f = h.substitute_into(tvars.clone(), &images, deg);
    for j in 0..n {
        let yj = CornerPoly::var(tvars.clone(), tvars.y(j));
        let qj = CornerPoly::var(tvars.clone(), tvars.param(j));
        f = f.add(&yj.mul(&qj));
    }
    if kind == FamilyKind::Legendrian {
        let z = CornerPoly::var(tvars.clone(), tvars.param(n));
        f = f.sub(&z);
    }
    Ok(GeneratingFamily::new(f, kind)?)
}

/// The truncated module-generation stability criterion: in source jets
/// modulo B + M^(l+2), the pullbacks of base monomials times {1, p_i∘S}
/// span everything. B is generated by Q_i P_i (i <= r), the remaining Q_j,
/// and (contact case) Z.
pub fn stability_criterion_check(spec: &MapGermSpec, l: usize) -> Result<bool, GeomError> {
    let min_l = match spec.kind {
        MapKind::Symplectic => spec.n + 1,
        MapKind::Contact => spec.n + 2,
    };
    if l < min_l {
        return Err(GeomError::JetOrderTooSmall(l, min_l));
    }
    let (sv, zi) = match spec.kind {
        MapKind::Symplectic => (source_vars(spec.n), None),
        MapKind::Contact => (contact_source_vars(spec.n), Some(spec.n)),
    };
    let deg = l + 1;
    let js = jet_space(sv.clone(), deg, 0);
    let mut reducer = Reducer::new();

    // rows of B
    let mut b_gens: Vec<CornerPoly> = Vec::new();
    for i in 0..spec.r {
        let qi = CornerPoly::var(sv.clone(), sv.param(i));
        let pi_idx = match spec.kind {
            MapKind::Symplectic => spec.n + i,
            MapKind::Contact => spec.n + 1 + i,
        };
        let pi = CornerPoly::var(sv.clone(), sv.param(pi_idx));
        b_gens.push(qi.mul(&pi));
    }
    for j in spec.r..spec.n {
        b_gens.push(CornerPoly::var(sv.clone(), sv.param(j)));
    }
    if let Some(z) = zi {
        b_gens.push(CornerPoly::var(sv.clone(), sv.param(z)));
    }
    for g in &b_gens {
        let ord = g.order().unwrap();
        for m in js.basis.iter() {
            if m.degree() + ord > deg {
                continue;
            }
            let mono = CornerPoly::monomial(sv.clone(), m.clone(), coef(1));
            reducer.insert(js.jet_of(&g.mul_trunc(&mono, Some(deg))));
        }
    }

    // pullback rows: monomials in the target base coordinates, composed with
    // the map, times {1} ∪ {p components}
    let mut base_imgs: Vec<CornerPoly> = spec.q_comps.clone();
    if spec.kind == MapKind::Contact {
        base_imgs.push(spec.z_comp.clone().unwrap());
    }
    let nb = base_imgs.len();
    let mut mults: Vec<CornerPoly> = vec![CornerPoly::one(sv.clone())];
    mults.extend(spec.p_comps.iter().cloned());

    // enumerate exponent vectors over the base coordinates up to degree deg
    let mut exps = vec![0u32; nb];
    enumerate_exps(&mut exps, 0, deg, &mut |e| {
        let mut pb = CornerPoly::one(sv.clone());
        for (i, &ei) in e.iter().enumerate() {
            if ei > 0 {
                pb = pb.mul_trunc(&base_imgs[i].pow_trunc(ei, Some(deg)), Some(deg));
            }
        }
        if pb.is_zero() {
            return;
        }
        for m in &mults {
            reducer.insert(js.jet_of(&pb.mul_trunc(m, Some(deg))));
        }
    });

    Ok(reducer.rank() == js.dim())
}

fn enumerate_exps(exps: &mut Vec<u32>, idx: usize, budget: usize, f: &mut impl FnMut(&[u32])) {
    if idx == exps.len() {
        f(exps);
        return;
    }
    for e in 0..=budget {
        exps[idx] = e as u32;
        enumerate_exps(exps, idx + 1, budget - e, f);
    }
    exps[idx] = 0;
}

/// Stratum label: sigma as "empty" or concatenated 1-based indices.
pub fn sigma_label(sigma: &[usize]) -> String {
    if sigma.is_empty() {
        "empty".to_string()
    } else {
        sigma
            .iter()
            .map(|i| (i + 1).to_string())
            .collect::<Vec<_>>()
            .join("")
    }
}
