//! f64 evaluation of exact polynomials and a damped Newton solver for the
//! mesh extraction. The only floating-point code path in the crate.

use num::ToPrimitive;

use crate::poly::CornerPoly;

/// A polynomial compiled for fast f64 evaluation over the full coordinate
/// vector of its variable set.
#[derive(Clone, Debug)]
pub struct PolyF64 {
    terms: Vec<(f64, Vec<(usize, u32)>)>,
}

impl PolyF64 {
    pub fn compile(p: &CornerPoly) -> Self {
        let terms = p
            .terms()
            .map(|(m, c)| {
                let factors: Vec<(usize, u32)> =
                    m.0.iter()
                        .enumerate()
                        .filter(|(_, &e)| e > 0)
                        .map(|(v, &e)| (v, e))
                        .collect();
                (c.to_f64().expect("coefficient out of f64 range"), factors)
            })
            .collect();
        PolyF64 { terms }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (c, factors) in &self.terms {
            let mut t = *c;
            for &(v, e) in factors {
                t *= x[v].powi(e as i32);
            }
            acc += t;
        }
        acc
    }
}

/// Square polynomial system over a subset of the coordinates; the remaining
/// coordinates act as parameters fixed in the evaluation vector.
#[derive(Clone, Debug)]
pub struct SquareSystem {
    pub eqs: Vec<PolyF64>,
    pub jac: Vec<Vec<PolyF64>>,
    pub unknowns: Vec<usize>,
}

impl SquareSystem {
    pub fn compile(eqs: &[CornerPoly], unknowns: &[usize]) -> Self {
        let jac = eqs
            .iter()
            .map(|e| {
                unknowns
                    .iter()
                    .map(|&v| PolyF64::compile(&e.derivative(v)))
                    .collect()
            })
            .collect();
        SquareSystem {
            eqs: eqs.iter().map(PolyF64::compile).collect(),
            jac,
            unknowns: unknowns.to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        self.unknowns.len()
    }

    pub fn residual_norm(&self, x: &[f64]) -> f64 {
        self.eqs.iter().map(|e| e.eval(x).abs()).fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct NewtonParams {
    pub max_iter: usize,
    pub tol: f64,
    pub damping: f64,
}

impl Default for NewtonParams {
    fn default() -> Self {
        NewtonParams {
            max_iter: 50,
            tol: 1e-12,
            damping: 0.5,
        }
    }
}

/// Solve a small dense linear system in place; None if near-singular.
pub fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let (piv, max) = (col..n)
            .map(|i| (i, a[i][col].abs()))
            .max_by(|x, y| x.1.total_cmp(&y.1))?;
        if max < 1e-14 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        let d = a[col][col];
        for i in 0..n {
            if i == col {
                continue;
            }
            let f = a[i][col] / d;
            if f == 0.0 {
                continue;
            }
            for j in col..n {
                a[i][j] -= f * a[col][j];
            }
            b[i] -= f * b[col];
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

/// Damped Newton iteration on the unknown coordinates of `x` (in place).
/// Returns true on convergence to residual < params.tol.
pub fn newton(system: &SquareSystem, x: &mut [f64], params: &NewtonParams) -> bool {
    let d = system.dim();
    let mut res = system.residual_norm(x);
    for _ in 0..params.max_iter {
        if res < params.tol {
            return true;
        }
        let a: Vec<Vec<f64>> = system
            .jac
            .iter()
            .map(|row| row.iter().map(|p| p.eval(x)).collect())
            .collect();
        let b: Vec<f64> = system.eqs.iter().map(|e| -e.eval(x)).collect();
        let Some(delta) = solve_linear(a, b) else {
            return false;
        };
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..10 {
            let mut trial: Vec<f64> = x.to_vec();
            for (i, &v) in system.unknowns.iter().enumerate() {
                trial[v] += scale * delta[i];
            }
            let tr = system.residual_norm(&trial);
            if tr < res || tr < params.tol {
                x.copy_from_slice(&trial);
                res = tr;
                accepted = true;
                break;
            }
            scale *= params.damping;
        }
        if !accepted {
            return false;
        }
        if x.iter().any(|v| !v.is_finite() || v.abs() > 1e8) {
            return false;
        }
        let _ = d;
    }
    res < params.tol
}

/// Approximate a unit kernel vector of an m x (m+1) Jacobian (the tangent of
/// a one-dimensional solution curve).
pub fn kernel_direction(jac: &[Vec<f64>]) -> Option<Vec<f64>> {
    let m = jac.len();
    let n = m + 1;
    let mut a: Vec<Vec<f64>> = jac.iter().map(|r| r.to_vec()).collect();
    let mut pivots: Vec<Option<usize>> = vec![None; m];
    let mut used = vec![false; n];
    for row in 0..m {
        let (col, max) = (0..n)
            .filter(|&c| !used[c])
            .map(|c| (c, a[row][c].abs()))
            .max_by(|x, y| x.1.total_cmp(&y.1))?;
        if max < 1e-12 {
            continue;
        }
        used[col] = true;
        pivots[row] = Some(col);
        let d = a[row][col];
        for i in 0..m {
            if i == row {
                continue;
            }
            let f = a[i][col] / d;
            if f != 0.0 {
                for j in 0..n {
                    a[i][j] -= f * a[row][j];
                }
            }
        }
    }
    let free = (0..n).find(|&c| !used[c])?;
    let mut v = vec![0.0; n];
    v[free] = 1.0;
    for row in 0..m {
        if let Some(p) = pivots[row] {
            v[p] = -a[row][free] / a[row][p];
        }
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm < 1e-14 || !norm.is_finite() {
        return None;
    }
    for x in v.iter_mut() {
        *x /= norm;
    }
    Some(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_in;
    use crate::poly::VarSet;

    #[test]
    fn newton_finds_roots() {
        // solve y^3 + q = 0 at q = -8 -> y = 2... (y^3 = -q): y = 2 when q = -8
        let vars = VarSet::new(0, 1, vec!["q1".to_string()]);
        let eq = parse_in("y1^3 + q1", vars.clone()).unwrap();
        let sys = SquareSystem::compile(&[eq], &[0]);
        let mut x = vec![1.0, -8.0];
        assert!(newton(&sys, &mut x, &NewtonParams::default()));
        assert!((x[0] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn kernel_of_gradient_row() {
        // single row [0, 1]: kernel = (±1, 0)
        let v = kernel_direction(&[vec![0.0, 1.0]]).unwrap();
        assert!(v[1].abs() < 1e-12);
        assert!((v[0].abs() - 1.0).abs() < 1e-12);
    }
}
