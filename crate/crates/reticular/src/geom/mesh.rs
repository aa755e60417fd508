//! Numerical extraction of caustics and wavefronts from generating families.
//!
//! Caustics: for each corner stratum, track critical-point branches over a
//! parameter grid, bracket sign changes of the free-variable Hessian
//! determinant (degenerate points) and of the free corner coordinates
//! (boundary strata), then polish each hit with an augmented Newton solve.
//! Wavefronts: sample the full solution sheets and project to (q, z).
//!
//! Points are deduplicated on a tolerance grid and sorted lexicographically,
//! so identical invocations produce identical meshes.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::Write;

use crate::poly::{CornerPoly, VarSet};
use crate::unfold::{FamilyKind, GeneratingFamily};

use super::solve::{kernel_direction, newton, solve_linear, NewtonParams, PolyF64, SquareSystem};
use super::{check_c_nondegenerate, check_s_nondegenerate, sigma_label, GeomError};

#[derive(Clone, Debug)]
pub struct MeshConfig {
    pub tol_eq: f64,
    pub tol_deg: f64,
    pub newton: NewtonParams,
    pub seed_box: (f64, f64),
    pub seeds_per_dim: usize,
    pub dedupe_tol: f64,
    pub corner_tol: f64,
    pub branch_jump: f64,
    pub refine_gap: Option<f64>,
    pub reseed_stride: usize,
}

impl Default for MeshConfig {
    fn default() -> Self {
        MeshConfig {
            tol_eq: 1e-9,
            tol_deg: 1e-6,
            newton: NewtonParams::default(),
            seed_box: (-2.0, 2.0),
            seeds_per_dim: 7,
            dedupe_tol: 1e-6,
            corner_tol: 1e-9,
            branch_jump: 0.5,
            refine_gap: None,
            reseed_stride: 1,
        }
    }
}

impl MeshConfig {
    /// Apply one key=value override (the config-file format).
    pub fn apply_kv(&mut self, key: &str, value: &str) -> Result<(), String> {
        let fv = || value.parse::<f64>().map_err(|e| e.to_string());
        let uv = || value.parse::<usize>().map_err(|e| e.to_string());
        match key {
            "tol_eq" => self.tol_eq = fv()?,
            "tol_deg" => self.tol_deg = fv()?,
            "newton_max_iter" => self.newton.max_iter = uv()?,
            "newton_tol" => self.newton.tol = fv()?,
            "damping" => self.newton.damping = fv()?,
            "seed_min" => self.seed_box.0 = fv()?,
            "seed_max" => self.seed_box.1 = fv()?,
            "seeds_per_dim" => self.seeds_per_dim = uv()?,
            "dedupe_tol" => self.dedupe_tol = fv()?,
            "corner_tol" => self.corner_tol = fv()?,
            "branch_jump" => self.branch_jump = fv()?,
            "refine_gap" => self.refine_gap = Some(fv()?),
            "reseed_stride" => self.reseed_stride = uv()?.max(1),
            other => return Err(format!("unknown config key `{other}`")),
        }
        Ok(())
    }

    pub fn load_file(&mut self, path: &str) -> Result<(), String> {
        let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| format!("bad config line `{line}`"))?;
            self.apply_kv(k.trim(), v.trim())?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct MeshPoint {
    pub coords: Vec<f64>,
    pub stratum: String,
}

#[derive(Clone, Debug)]
pub struct DiscriminantMesh {
    pub ambient_dim: usize,
    pub points: Vec<MeshPoint>,
    pub region: Vec<(f64, f64)>,
    pub res: usize,
    pub tol_eq: f64,
    pub tol_deg: f64,
    /// Newton runs that failed to converge during seeding/polish.
    pub dropped: usize,
}

impl DiscriminantMesh {
    pub fn strata_counts(&self) -> BTreeMap<String, usize> {
        let mut out = BTreeMap::new();
        for p in &self.points {
            *out.entry(p.stratum.clone()).or_insert(0) += 1;
        }
        out
    }

    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "ambient_dim": self.ambient_dim,
            "points": self.points.len(),
            "strata": self.strata_counts(),
            "dropped": self.dropped,
        })
    }
}

/// One corner stratum of the critical system, compiled for evaluation.
struct Stratum {
    /// unknown variable indices (free corner variables then internal ones)
    free: Vec<usize>,
    /// positions (in `free`) and variable indices of the free corner vars
    free_x: Vec<(usize, usize)>,
    eqs: Vec<CornerPoly>,
    sys: SquareSystem,
    det_poly: Option<CornerPoly>,
    det: Option<PolyF64>,
}

fn subsets(r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for mask in 0..(1usize << r) {
        out.push((0..r).filter(|i| mask & (1 << i) != 0).collect());
    }
    out
}

fn sym_det(m: &[Vec<CornerPoly>], vars: &std::sync::Arc<VarSet>) -> CornerPoly {
    let d = m.len();
    match d {
        0 => CornerPoly::one(vars.clone()),
        1 => m[0][0].clone(),
        _ => {
            let mut acc = CornerPoly::zero(vars.clone());
            for j in 0..d {
                let minor: Vec<Vec<CornerPoly>> = (1..d)
                    .map(|i| {
                        (0..d)
                            .filter(|&c| c != j)
                            .map(|c| m[i][c].clone())
                            .collect()
                    })
                    .collect();
                let cof = m[0][j].mul(&sym_det(&minor, vars));
                acc = if j % 2 == 0 {
                    acc.add(&cof)
                } else {
                    acc.sub(&cof)
                };
            }
            acc
        }
    }
}

/// Critical-system stratum for a family: substitute x_sigma = 0 and take the
/// gradient in the remaining (x, y) variables. `extra_f` appends F itself
/// (wavefront) and `extra_unknowns` adds the z variable.
fn build_stratum(
    fam: &GeneratingFamily,
    sigma: &[usize],
    with_f: bool,
    z_unknown: Option<usize>,
) -> Stratum {
    let vars = fam.poly.vars().clone();
    let (r, k) = (vars.r, vars.k);
    let zero = CornerPoly::zero(vars.clone());
    let pins: Vec<(usize, CornerPoly)> = sigma.iter().map(|&i| (vars.x(i), zero.clone())).collect();
    let deg = fam.poly.degree().unwrap_or(2);
    let f_sigma = fam.poly.substitute(&pins, deg);

    let mut free = Vec::new();
    let mut free_x = Vec::new();
    for i in 0..r {
        if !sigma.contains(&i) {
            free_x.push((free.len(), vars.x(i)));
            free.push(vars.x(i));
        }
    }
    for j in 0..k {
        free.push(vars.y(j));
    }

    let mut eqs: Vec<CornerPoly> = free.iter().map(|&v| f_sigma.derivative(v)).collect();
    let hess: Vec<Vec<CornerPoly>> = free
        .iter()
        .map(|&a| {
            free.iter()
                .map(|&b| f_sigma.derivative(a).derivative(b))
                .collect()
        })
        .collect();
    let det_poly = (!free.is_empty()).then(|| sym_det(&hess, &vars));

    let mut unknowns = free.clone();
    if with_f {
        eqs.push(f_sigma.clone());
    }
    if let Some(z) = z_unknown {
        unknowns.push(z);
    }
    let sys = SquareSystem::compile(&eqs, &unknowns);
    Stratum {
        free,
        free_x,
        eqs,
        sys,
        det: det_poly.as_ref().map(PolyF64::compile),
        det_poly,
    }
}

fn seed_grid(d: usize, box_: (f64, f64), per_dim: usize) -> Vec<Vec<f64>> {
    if d == 0 {
        return vec![Vec::new()];
    }
    let vals: Vec<f64> = (0..per_dim)
        .map(|i| {
            if per_dim == 1 {
                0.5 * (box_.0 + box_.1)
            } else {
                box_.0 + (box_.1 - box_.0) * i as f64 / (per_dim - 1) as f64
            }
        })
        .collect();
    let mut out = vec![Vec::new()];
    for _ in 0..d {
        let mut next = Vec::with_capacity(out.len() * vals.len());
        for base in &out {
            for &v in &vals {
                let mut b = base.clone();
                b.push(v);
                next.push(b);
            }
        }
        out = next;
    }
    out
}

/// All converged, deduplicated solutions of the stratum system at the point
/// described by `template` (unknown slots are overwritten).
fn solve_all(
    st: &Stratum,
    template: &[f64],
    warm: &[Vec<f64>],
    seeds: &[Vec<f64>],
    cfg: &MeshConfig,
    dropped: &mut usize,
) -> Vec<Vec<f64>> {
    let unknowns = &st.sys.unknowns;
    let mut sols: Vec<Vec<f64>> = Vec::new();
    let try_start = |vals: &[f64], sols: &mut Vec<Vec<f64>>, dropped: &mut usize| {
        let mut x = template.to_vec();
        for (i, &v) in unknowns.iter().enumerate() {
            x[v] = vals[i];
        }
        if newton(&st.sys, &mut x, &cfg.newton) {
            let key: Vec<f64> = unknowns.iter().map(|&v| x[v]).collect();
            let dup = sols.iter().any(|s| {
                unknowns
                    .iter()
                    .enumerate()
                    .all(|(i, &v)| (s[v] - key[i]).abs() < cfg.dedupe_tol)
            });
            if !dup {
                sols.push(x);
            }
        } else {
            *dropped += 1;
        }
    };
    for w in warm {
        let vals: Vec<f64> = unknowns.iter().map(|&v| w[v]).collect();
        try_start(&vals, &mut sols, dropped);
    }
    for s in seeds {
        try_start(s, &mut sols, dropped);
    }
    sols
}

/// Newton polish of an augmented square system (criticality + one extra
/// equation), freeing one grid coordinate.
fn polish_augmented(
    st: &Stratum,
    extra: &CornerPoly,
    free_axis_var: usize,
    x: &mut [f64],
    cfg: &MeshConfig,
) -> bool {
    let mut eqs = st.eqs.clone();
    eqs.push(extra.clone());
    let mut unknowns = st.sys.unknowns.clone();
    unknowns.push(free_axis_var);
    let sys = SquareSystem::compile(&eqs, &unknowns);
    newton(&sys, x, &cfg.newton)
}

struct Collector {
    seen: HashSet<(String, Vec<i64>)>,
    /// stratum -> full coordinate vectors (for refinement seeding)
    raw: HashMap<String, Vec<Vec<f64>>>,
    points: Vec<MeshPoint>,
    tol: f64,
}

impl Collector {
    fn new(tol: f64) -> Self {
        Collector {
            seen: HashSet::new(),
            raw: HashMap::new(),
            points: Vec::new(),
            tol,
        }
    }

    fn push(&mut self, stratum: &str, coords: Vec<f64>, full: Vec<f64>) {
        let key: Vec<i64> = coords
            .iter()
            .map(|c| (c / self.tol).round() as i64)
            .collect();
        if self.seen.insert((stratum.to_string(), key)) {
            self.raw.entry(stratum.to_string()).or_default().push(full);
            self.points.push(MeshPoint {
                coords,
                stratum: stratum.to_string(),
            });
        }
    }
}

fn in_region(coords: &[f64], region: &[(f64, f64)]) -> bool {
    coords
        .iter()
        .zip(region.iter())
        .all(|(c, (a, b))| *c >= a - 1e-9 && *c <= b + 1e-9)
}

fn grid_value(region: (f64, f64), res: usize, i: usize) -> f64 {
    if res <= 1 {
        0.5 * (region.0 + region.1)
    } else {
        region.0 + (region.1 - region.0) * i as f64 / (res - 1) as f64
    }
}

/// Multi-indices over `axes.len()` dimensions, each 0..res.
fn line_indices(naxes: usize, res: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..naxes {
        let mut next = Vec::with_capacity(out.len() * res);
        for base in &out {
            for i in 0..res {
                let mut b = base.clone();
                b.push(i);
                next.push(b);
            }
        }
        out = next;
    }
    out
}

fn corner_ok(st: &Stratum, x: &[f64], tol: f64) -> bool {
    st.free_x.iter().all(|&(_, v)| x[v] >= -tol)
}

/// Detector values this close to zero at a grid node count as direct hits.
const NODE_HIT_EPS: f64 = 1e-11;

fn q_label(vars: &std::sync::Arc<VarSet>, sigma: &[usize], xv: usize) -> String {
    let x_index = (0..vars.r).find(|&i| vars.x(i) == xv).unwrap();
    let mut tau = sigma.to_vec();
    tau.push(x_index);
    tau.sort();
    format!("Q_{}_{}", sigma_label(sigma), sigma_label(&tau))
}

/// Emit a point of the degenerate stratum if it passes the residual,
/// degeneracy, corner, and region checks.
#[allow(clippy::too_many_arguments)]
fn emit_c(
    st: &Stratum,
    x: Vec<f64>,
    cfg: &MeshConfig,
    region: &[(f64, f64)],
    q_vars: &[usize],
    label: &str,
    collector: &mut Collector,
) -> bool {
    let Some(det) = &st.det else { return false };
    if corner_ok(st, &x, cfg.corner_tol)
        && det.eval(&x).abs() <= cfg.tol_deg
        && st.sys.residual_norm(&x) <= cfg.tol_eq
    {
        let coords: Vec<f64> = q_vars.iter().map(|&v| x[v]).collect();
        if in_region(&coords, region) {
            collector.push(label, coords, x);
            return true;
        }
    }
    false
}

/// Solve the fold system (criticality + det = 0) from a seed, then emit.
#[allow(clippy::too_many_arguments)]
fn polish_emit_c(
    st: &Stratum,
    axis_var: usize,
    mut x: Vec<f64>,
    cfg: &MeshConfig,
    region: &[(f64, f64)],
    q_vars: &[usize],
    label: &str,
    collector: &mut Collector,
    dropped: &mut usize,
) {
    let Some(det_poly) = &st.det_poly else { return };
    if polish_augmented(st, det_poly, axis_var, &mut x, cfg)
        && emit_c(st, x, cfg, region, q_vars, label, collector)
    {
    } else {
        *dropped += 1;
    }
}

/// Caustic of a Lagrangian generating family over a box in q-space.
pub fn caustic(
    fam: &GeneratingFamily,
    region: &[(f64, f64)],
    res: usize,
    cfg: &MeshConfig,
) -> Result<DiscriminantMesh, GeomError> {
    if fam.kind != FamilyKind::Lagrangian {
        return Err(GeomError::WrongKind(FamilyKind::Lagrangian));
    }
    if !check_s_nondegenerate(fam) {
        return Err(GeomError::NotSNondegenerate);
    }
    let vars = fam.poly.vars().clone();
    let n = fam.n();
    if region.len() != n {
        return Err(GeomError::BadRegion(format!(
            "need {n} ranges, got {}",
            region.len()
        )));
    }
    if n == 0 || n > 3 {
        return Err(GeomError::TooManyDims(n));
    }
    if res < 2 {
        return Err(GeomError::BadRegion("resolution must be >= 2".into()));
    }
    let q_vars: Vec<usize> = (0..n).map(|m| vars.param(m)).collect();
    let mut collector = Collector::new(cfg.dedupe_tol);
    let mut dropped = 0usize;

    for sigma in subsets(vars.r) {
        let st = build_stratum(fam, &sigma, false, None);
        if st.free.is_empty() {
            continue;
        }
        let seeds = seed_grid(st.free.len(), cfg.seed_box, cfg.seeds_per_dim);
        let c_label = format!("C_{}", sigma_label(&sigma));

        for axis in 0..n {
            let others: Vec<usize> = (0..n).filter(|&a| a != axis).collect();
            for line in line_indices(others.len(), res) {
                let mut template = vec![0.0; vars.len()];
                for (pos, &a) in others.iter().enumerate() {
                    template[q_vars[a]] = grid_value(region[a], res, line[pos]);
                }
                let mut prev: Vec<Vec<f64>> = Vec::new();
                let mut q_prev = 0.0f64;
                for step in 0..res {
                    let q_cur = grid_value(region[axis], res, step);
                    template[q_vars[axis]] = q_cur;
                    let fresh: &[Vec<f64>] = if step % cfg.reseed_stride == 0 {
                        &seeds
                    } else {
                        &[]
                    };
                    let sols = solve_all(&st, &template, &prev, fresh, cfg, &mut dropped);
                    let q_mid = 0.5 * (q_prev + q_cur);
                    let mut prev_matched = vec![false; prev.len()];
                    for s_new in &sols {
                        // node-exact hits: the solution already sits on the
                        // stratum (a crossing landing on a grid node never
                        // produces a sign change)
                        if let Some(det) = &st.det {
                            if det.eval(s_new).abs() <= NODE_HIT_EPS {
                                emit_c(
                                    &st,
                                    s_new.clone(),
                                    cfg,
                                    region,
                                    &q_vars,
                                    &c_label,
                                    &mut collector,
                                );
                            }
                        }
                        for &(_, xv) in &st.free_x {
                            if s_new[xv].abs() <= NODE_HIT_EPS
                                && corner_ok(&st, s_new, cfg.corner_tol)
                                && st.sys.residual_norm(s_new) <= cfg.tol_eq
                            {
                                let coords: Vec<f64> = q_vars.iter().map(|&v| s_new[v]).collect();
                                if in_region(&coords, region) {
                                    let label = q_label(&vars, &sigma, xv);
                                    collector.push(&label, coords, s_new.clone());
                                }
                            }
                        }

                        let nearest = prev
                            .iter()
                            .enumerate()
                            .map(|(pi, s_old)| {
                                let d2: f64 =
                                    st.free.iter().map(|&v| (s_new[v] - s_old[v]).powi(2)).sum();
                                (d2.sqrt(), pi)
                            })
                            .filter(|(d, _)| *d < cfg.branch_jump)
                            .min_by(|a, b| a.0.total_cmp(&b.0));
                        let Some((_, pi)) = nearest else {
                            // branch born between the nodes: a fold sits there
                            if step > 0 {
                                let mut x = s_new.clone();
                                x[q_vars[axis]] = q_mid;
                                polish_emit_c(
                                    &st,
                                    q_vars[axis],
                                    x,
                                    cfg,
                                    region,
                                    &q_vars,
                                    &c_label,
                                    &mut collector,
                                    &mut dropped,
                                );
                            }
                            continue;
                        };
                        prev_matched[pi] = true;
                        let s_old = &prev[pi];

                        // degenerate critical values: det sign change along
                        // a persistent branch
                        if let Some(det) = &st.det {
                            let hp = det.eval(s_old);
                            let hn = det.eval(s_new);
                            if hp * hn < 0.0 {
                                let x: Vec<f64> = s_old
                                    .iter()
                                    .zip(s_new.iter())
                                    .map(|(a, b)| 0.5 * (a + b))
                                    .collect();
                                polish_emit_c(
                                    &st,
                                    q_vars[axis],
                                    x,
                                    cfg,
                                    region,
                                    &q_vars,
                                    &c_label,
                                    &mut collector,
                                    &mut dropped,
                                );
                            }
                        }

                        // boundary strata: free corner coordinate crossing zero
                        for &(_, xv) in &st.free_x {
                            let xp = s_old[xv];
                            let xn = s_new[xv];
                            if xp * xn < 0.0 {
                                let xi_poly = CornerPoly::var(vars.clone(), xv);
                                let mut x: Vec<f64> = s_old
                                    .iter()
                                    .zip(s_new.iter())
                                    .map(|(a, b)| 0.5 * (a + b))
                                    .collect();
                                if polish_augmented(&st, &xi_poly, q_vars[axis], &mut x, cfg)
                                    && corner_ok(&st, &x, cfg.corner_tol)
                                    && x[xv].abs() <= cfg.tol_eq.max(1e-9)
                                    && st.sys.residual_norm(&x) <= cfg.tol_eq
                                {
                                    let coords: Vec<f64> = q_vars.iter().map(|&v| x[v]).collect();
                                    if in_region(&coords, region) {
                                        let label = q_label(&vars, &sigma, xv);
                                        collector.push(&label, coords, x);
                                    }
                                } else {
                                    dropped += 1;
                                }
                            }
                        }
                    }
                    // branch deaths: folds between the nodes
                    for (pi, s_old) in prev.iter().enumerate() {
                        if !prev_matched[pi] {
                            let mut x = s_old.clone();
                            x[q_vars[axis]] = q_mid;
                            polish_emit_c(
                                &st,
                                q_vars[axis],
                                x,
                                cfg,
                                region,
                                &q_vars,
                                &c_label,
                                &mut collector,
                                &mut dropped,
                            );
                        }
                    }
                    prev = sols;
                    q_prev = q_cur;
                }
            }
        }

        // arc-length refinement of one-dimensional strata (ambient dim 2)
        if n == 2 {
            if let Some(gap) = cfg.refine_gap {
                if let Some(det_poly) = &st.det_poly {
                    let seeds: Vec<Vec<f64>> =
                        collector.raw.get(&c_label).cloned().unwrap_or_default();
                    refine_curve(
                        &st,
                        det_poly.clone(),
                        &seeds,
                        &q_vars,
                        region,
                        gap,
                        cfg,
                        &mut collector,
                        &c_label,
                        &mut dropped,
                    );
                }
                let q_seeds: Vec<(String, CornerPoly, Vec<Vec<f64>>)> = st
                    .free_x
                    .iter()
                    .map(|&(_, xv)| {
                        let x_index = (0..vars.r).find(|&i| vars.x(i) == xv).unwrap();
                        let mut tau = sigma.clone();
                        tau.push(x_index);
                        tau.sort();
                        let label = format!("Q_{}_{}", sigma_label(&sigma), sigma_label(&tau));
                        let pts = collector.raw.get(&label).cloned().unwrap_or_default();
                        (label, CornerPoly::var(vars.clone(), xv), pts)
                    })
                    .collect();
                for (label, xpoly, pts) in q_seeds {
                    refine_curve(
                        &st,
                        xpoly,
                        &pts,
                        &q_vars,
                        region,
                        gap,
                        cfg,
                        &mut collector,
                        &label,
                        &mut dropped,
                    );
                }
            }
        }
    }

    let mut points = collector.points;
    points.sort_by(|a, b| {
        a.stratum.cmp(&b.stratum).then_with(|| {
            a.coords
                .partial_cmp(&b.coords)
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    });
    Ok(DiscriminantMesh {
        ambient_dim: n,
        points,
        region: region.to_vec(),
        res,
        tol_eq: cfg.tol_eq,
        tol_deg: cfg.tol_deg,
        dropped,
    })
}

/// Trace the solution curve (criticality + one augmenting equation) through
/// the detected points with arc steps <= gap, filling coverage gaps.
#[allow(clippy::too_many_arguments)]
fn refine_curve(
    st: &Stratum,
    aug: CornerPoly,
    seeds: &[Vec<f64>],
    q_vars: &[usize],
    region: &[(f64, f64)],
    gap: f64,
    cfg: &MeshConfig,
    collector: &mut Collector,
    label: &str,
    dropped: &mut usize,
) {
    if seeds.is_empty() {
        return;
    }
    let mut eqs = st.eqs.clone();
    eqs.push(aug);
    let mut unknowns = st.sys.unknowns.clone();
    unknowns.extend_from_slice(q_vars);
    // d+1 equations, d+2 unknowns: one-dimensional solution curve
    let jac: Vec<Vec<PolyF64>> = eqs
        .iter()
        .map(|e| {
            unknowns
                .iter()
                .map(|&v| PolyF64::compile(&e.derivative(v)))
                .collect()
        })
        .collect();
    let eqs_c: Vec<PolyF64> = eqs.iter().map(PolyF64::compile).collect();

    let cell = |q: &[f64]| -> (i64, i64) {
        (
            (q[0] / (0.5 * gap)).round() as i64,
            (q[1] / (0.5 * gap)).round() as i64,
        )
    };
    // visited points carry (owner, step index when emitted, q)
    let mut visited: HashMap<(i64, i64), Vec<(usize, usize, Vec<f64>)>> = HashMap::new();
    let qproj = |x: &[f64]| -> Vec<f64> { q_vars.iter().map(|&v| x[v]).collect() };
    for (ti, s) in seeds.iter().enumerate() {
        let q = qproj(s);
        visited
            .entry(cell(&q))
            .or_default()
            .push((usize::MAX - ti, 0, q));
    }

    let eval_jac = |x: &[f64]| -> Vec<Vec<f64>> {
        jac.iter()
            .map(|row| row.iter().map(|p| p.eval(x)).collect())
            .collect()
    };
    // corrector: Newton on (eqs, plane through x0 orthogonal to t)
    let correct = |x0: &[f64], t: &[f64], x: &mut Vec<f64>| -> bool {
        for _ in 0..cfg.newton.max_iter {
            let mut a = eval_jac(x);
            a.push(t.to_vec());
            let mut b: Vec<f64> = eqs_c.iter().map(|e| -e.eval(x)).collect();
            let plane: f64 = unknowns
                .iter()
                .enumerate()
                .map(|(i, &v)| (x[v] - x0[v]) * t[i])
                .sum();
            b.push(-plane);
            let Some(delta) = solve_linear(a, b) else {
                return false;
            };
            let mut maxstep = 0.0f64;
            for (i, &v) in unknowns.iter().enumerate() {
                x[v] += delta[i];
                maxstep = maxstep.max(delta[i].abs());
            }
            if maxstep < cfg.newton.tol {
                break;
            }
        }
        eqs_c.iter().all(|e| e.eval(x).abs() < cfg.tol_eq)
    };

    let max_total_steps = 200_000usize;
    let mut total = 0usize;
    for (trace_id, seed) in seeds.iter().enumerate() {
        for dir in [1.0f64, -1.0] {
            let owner = 2 * trace_id + usize::from(dir < 0.0);
            let mut x = seed.clone();
            let mut prev_t: Option<Vec<f64>> = None;
            let mut steps = 0usize;
            'trace: loop {
                total += 1;
                steps += 1;
                if total > max_total_steps {
                    return;
                }
                let Some(mut t) = kernel_direction(&eval_jac(&x)) else {
                    break;
                };
                match &prev_t {
                    Some(p) => {
                        let dot: f64 = p.iter().zip(t.iter()).map(|(a, b)| a * b).sum();
                        if dot < 0.0 {
                            t.iter_mut().for_each(|v| *v = -*v);
                        }
                    }
                    None => {
                        if dir < 0.0 {
                            t.iter_mut().for_each(|v| *v = -*v);
                        }
                    }
                }
                let mut step = gap;
                let mut advanced = false;
                for _ in 0..4 {
                    let mut xn = x.clone();
                    for (i, &v) in unknowns.iter().enumerate() {
                        xn[v] += step * t[i];
                    }
                    let x0 = xn.clone();
                    if correct(&x0, &t, &mut xn) && corner_ok(st, &xn, cfg.corner_tol) {
                        x = xn;
                        advanced = true;
                        break;
                    }
                    step *= 0.5;
                }
                if !advanced {
                    *dropped += 1;
                    break;
                }
                let q = qproj(&x);
                if !in_region(&q, region) {
                    break;
                }
                // stop on meeting territory covered by another trace, or by
                // this one long enough ago (a closed loop)
                let c0 = cell(&q);
                for dx in -1..=1 {
                    for dy in -1..=1 {
                        if let Some(pts) = visited.get(&(c0.0 + dx, c0.1 + dy)) {
                            for (powner, pstep, pq) in pts {
                                if *powner == owner && steps.saturating_sub(*pstep) <= 20 {
                                    continue;
                                }
                                let d2: f64 =
                                    pq.iter().zip(q.iter()).map(|(a, b)| (a - b).powi(2)).sum();
                                if d2.sqrt() < 0.45 * gap {
                                    collector.push(label, q.clone(), x.clone());
                                    break 'trace;
                                }
                            }
                        }
                    }
                }
                collector.push(label, q.clone(), x.clone());
                visited
                    .entry(c0)
                    .or_default()
                    .push((owner, steps, q.clone()));
                prev_t = Some(t);
            }
        }
    }
}

/// Wavefront of a Legendrian generating family over a box in (q, z)-space.
pub fn wavefront(
    fam: &GeneratingFamily,
    region: &[(f64, f64)],
    res: usize,
    cfg: &MeshConfig,
) -> Result<DiscriminantMesh, GeomError> {
    if fam.kind != FamilyKind::Legendrian {
        return Err(GeomError::WrongKind(FamilyKind::Legendrian));
    }
    if !check_c_nondegenerate(fam) {
        return Err(GeomError::NotCNondegenerate);
    }
    let vars = fam.poly.vars().clone();
    let n = fam.n();
    if region.len() != n + 1 {
        return Err(GeomError::BadRegion(format!(
            "need {} ranges (q then z), got {}",
            n + 1,
            region.len()
        )));
    }
    if n + 1 > 3 {
        return Err(GeomError::TooManyDims(n + 1));
    }
    if res < 2 && n > 0 {
        return Err(GeomError::BadRegion("resolution must be >= 2".into()));
    }
    let q_vars: Vec<usize> = (0..n).map(|m| vars.param(m)).collect();
    let z_var = vars.param(n);
    let z_range = region[n];
    let mut collector = Collector::new(cfg.dedupe_tol);
    let mut dropped = 0usize;

    for sigma in subsets(vars.r) {
        let st = build_stratum(fam, &sigma, true, Some(z_var));
        let label = format!("W_{}", sigma_label(&sigma));
        let d = st.free.len();
        let mut seeds = Vec::new();
        let zseeds: Vec<f64> = (0..5)
            .map(|i| z_range.0 + (z_range.1 - z_range.0) * i as f64 / 4.0)
            .collect();
        for v in seed_grid(d, cfg.seed_box, cfg.seeds_per_dim) {
            for &z in &zseeds {
                let mut s = v.clone();
                s.push(z);
                seeds.push(s);
            }
        }

        if n == 0 {
            let template = vec![0.0; vars.len()];
            let sols = solve_all(&st, &template, &[], &seeds, cfg, &mut dropped);
            for x in sols {
                if corner_ok(&st, &x, cfg.corner_tol) {
                    let coords = vec![x[z_var]];
                    if in_region(&coords, region) {
                        collector.push(&label, coords, x);
                    }
                }
            }
            continue;
        }

        let others: Vec<usize> = (1..n).collect();
        for line in line_indices(others.len(), res) {
            let mut template = vec![0.0; vars.len()];
            for (pos, &a) in others.iter().enumerate() {
                template[q_vars[a]] = grid_value(region[a], res, line[pos]);
            }
            let mut prev: Vec<Vec<f64>> = Vec::new();
            for step in 0..res {
                template[q_vars[0]] = grid_value(region[0], res, step);
                let fresh: &[Vec<f64>] = if step % cfg.reseed_stride == 0 {
                    &seeds
                } else {
                    &[]
                };
                let sols = solve_all(&st, &template, &prev, fresh, cfg, &mut dropped);
                for x in &sols {
                    if corner_ok(&st, x, cfg.corner_tol) && st.sys.residual_norm(x) <= cfg.tol_eq {
                        let mut coords: Vec<f64> = q_vars.iter().map(|&v| x[v]).collect();
                        coords.push(x[z_var]);
                        if in_region(&coords, region) {
                            collector.push(&label, coords, x.clone());
                        }
                    }
                }
                prev = sols;
            }
        }
    }

    let mut points = collector.points;
    points.sort_by(|a, b| {
        a.stratum.cmp(&b.stratum).then_with(|| {
            a.coords
                .partial_cmp(&b.coords)
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    });
    Ok(DiscriminantMesh {
        ambient_dim: n + 1,
        points,
        region: region.to_vec(),
        res,
        tol_eq: cfg.tol_eq,
        tol_deg: cfg.tol_deg,
        dropped,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Obj,
    Ply,
}

impl std::str::FromStr for ExportFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ExportFormat::Csv),
            "obj" => Ok(ExportFormat::Obj),
            "ply" => Ok(ExportFormat::Ply),
            other => Err(format!("unknown format `{other}`")),
        }
    }
}

fn pad3(coords: &[f64]) -> Result<[f64; 3], GeomError> {
    if coords.len() > 3 {
        return Err(GeomError::TooManyCoords);
    }
    let mut out = [0.0; 3];
    out[..coords.len()].copy_from_slice(coords);
    Ok(out)
}

/// Write a mesh as CSV, or as an OBJ/PLY point cloud grouped by stratum.
pub fn export_mesh(
    mesh: &DiscriminantMesh,
    format: ExportFormat,
    path: &str,
) -> Result<(), GeomError> {
    let mut out: Box<dyn Write> = Box::new(std::io::BufWriter::new(std::fs::File::create(path)?));
    match format {
        ExportFormat::Csv => {
            let header: Vec<String> = (1..=mesh.ambient_dim)
                .map(|i| format!("coord_{i}"))
                .chain(std::iter::once("stratum".to_string()))
                .collect();
            writeln!(out, "{}", header.join(","))?;
            for p in &mesh.points {
                let row: Vec<String> = p
                    .coords
                    .iter()
                    .map(|c| format!("{c}"))
                    .chain(std::iter::once(p.stratum.clone()))
                    .collect();
                writeln!(out, "{}", row.join(","))?;
            }
        }
        ExportFormat::Obj => {
            if mesh.points.is_empty() {
                return Err(GeomError::EmptyMesh);
            }
            let mut current = None::<&str>;
            for p in &mesh.points {
                if current != Some(p.stratum.as_str()) {
                    writeln!(out, "g {}", p.stratum)?;
                    current = Some(p.stratum.as_str());
                }
                let [x, y, z] = pad3(&p.coords)?;
                writeln!(out, "v {x} {y} {z}")?;
            }
        }
        ExportFormat::Ply => {
            if mesh.points.is_empty() {
                return Err(GeomError::EmptyMesh);
            }
            let strata: Vec<String> = mesh.strata_counts().keys().cloned().collect();
            writeln!(out, "ply")?;
            writeln!(out, "format ascii 1.0")?;
            for (i, s) in strata.iter().enumerate() {
                writeln!(out, "comment stratum {i} {s}")?;
            }
            writeln!(out, "element vertex {}", mesh.points.len())?;
            writeln!(out, "property float x")?;
            writeln!(out, "property float y")?;
            writeln!(out, "property float z")?;
            writeln!(out, "property uchar stratum")?;
            writeln!(out, "end_header")?;
            for p in &mesh.points {
                let [x, y, z] = pad3(&p.coords)?;
                let idx = strata.iter().position(|s| s == &p.stratum).unwrap();
                writeln!(out, "{x} {y} {z} {idx}")?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_in;

    fn fam(text: &str, r: usize, k: usize, params: &[&str], kind: FamilyKind) -> GeneratingFamily {
        let vars = VarSet::new(r, k, params.iter().map(|s| s.to_string()).collect());
        GeneratingFamily::new(parse_in(text, vars).unwrap(), kind).unwrap()
    }

    #[test]
    fn a1_caustic_is_empty() {
        let f = fam("y1^2 + q1*y1", 0, 1, &["q1"], FamilyKind::Lagrangian);
        let mesh = caustic(&f, &[(-1.0, 1.0)], 50, &MeshConfig::default()).unwrap();
        assert!(mesh.points.is_empty());
    }

    #[test]
    fn b2_caustic_is_the_corner_line() {
        for text in ["x1^2 + q1*x1", "-x1^2 + q1*x1"] {
            let f = fam(text, 1, 0, &["q1"], FamilyKind::Lagrangian);
            let mesh = caustic(&f, &[(-1.0, 1.0)], 101, &MeshConfig::default()).unwrap();
            assert!(!mesh.points.is_empty());
            for p in &mesh.points {
                assert!(p.stratum == "Q_empty_1");
                assert!(p.coords[0].abs() < 1e-6);
            }
        }
    }

    #[test]
    fn a2_wavefront_is_the_cusp() {
        let f = fam(
            "y1^3 + q1*y1 + z",
            0,
            1,
            &["q1", "z"],
            FamilyKind::Legendrian,
        );
        let mesh = wavefront(&f, &[(-1.0, 1.0), (-1.0, 1.0)], 201, &MeshConfig::default()).unwrap();
        assert!(!mesh.points.is_empty());
        // every point satisfies q = -3t^2, z = 2t^3 for some t
        for p in &mesh.points {
            let (q, z) = (p.coords[0], p.coords[1]);
            assert!(q <= 1e-9);
            let t = (-q / 3.0).sqrt();
            let dz = (z.abs() - 2.0 * t.powi(3)).abs();
            assert!(dz < 1e-6, "point ({q}, {z}) off the front");
        }
    }

    #[test]
    fn c3_wavefront_has_both_sheets() {
        let f = fam(
            "x1*y1 + y1^3 + q1*y1^2 + q2*y1 + z",
            1,
            1,
            &["q1", "q2", "z"],
            FamilyKind::Legendrian,
        );
        let region = [(-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0)];
        let mut cfg = MeshConfig::default();
        cfg.seeds_per_dim = 5;
        let mesh = wavefront(&f, &region, 15, &cfg).unwrap();
        let counts = mesh.strata_counts();
        assert!(counts.get("W_empty").copied().unwrap_or(0) > 0);
        assert!(counts.get("W_1").copied().unwrap_or(0) > 0);
    }

    #[test]
    fn a1_wavefront_single_sheet() {
        let f = fam("y1^2 + z", 0, 1, &["z"], FamilyKind::Legendrian);
        let mesh = wavefront(&f, &[(-1.0, 1.0)], 2, &MeshConfig::default()).unwrap();
        assert_eq!(mesh.points.len(), 1);
        assert!(mesh.points[0].coords[0].abs() < 1e-9);
    }

    #[test]
    fn caustic_invariant_under_stable_suspension() {
        // adding a nondegenerate quadratic in fresh internal variables does
        // not move the caustic
        let a2 = fam("y1^3 + q1*y1", 0, 1, &["q1"], FamilyKind::Lagrangian);
        let a2s = fam(
            "y1^3 + q1*y1 + y2^2 - y3^2",
            0,
            3,
            &["q1"],
            FamilyKind::Lagrangian,
        );
        let mut cfg = MeshConfig::default();
        cfg.seeds_per_dim = 5;
        let m1 = caustic(&a2, &[(-1.0, 1.0)], 80, &cfg).unwrap();
        let m2 = caustic(&a2s, &[(-1.0, 1.0)], 80, &cfg).unwrap();
        assert!(!m1.points.is_empty() && !m2.points.is_empty());
        for (a, b) in [(&m1, &m2), (&m2, &m1)] {
            for p in &a.points {
                let d = b
                    .points
                    .iter()
                    .map(|q| (p.coords[0] - q.coords[0]).abs())
                    .fold(f64::INFINITY, f64::min);
                assert!(d < 1e-7, "suspension moved the caustic by {d}");
            }
        }
    }

    #[test]
    fn csv_export_empty_has_header_only() {
        let f = fam("y1^2 + q1*y1", 0, 1, &["q1"], FamilyKind::Lagrangian);
        let mesh = caustic(&f, &[(-1.0, 1.0)], 50, &MeshConfig::default()).unwrap();
        let dir = std::env::temp_dir().join("reticular_test_csv");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("empty.csv");
        export_mesh(&mesh, ExportFormat::Csv, path.to_str().unwrap()).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.trim(), "coord_1,stratum");
        assert!(matches!(
            export_mesh(&mesh, ExportFormat::Obj, path.to_str().unwrap()),
            Err(GeomError::EmptyMesh)
        ));
    }
}
