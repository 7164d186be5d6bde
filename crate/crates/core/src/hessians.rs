//! Finite-difference Hessians of black-box scalar fields on `R^{4n}`.
//!
//! Three nested structures are computed from the same central-difference
//! stencil: the real 4n-by-4n Hessian, the complex mixed Hessian
//! `(d^2 u / dz_i dzb_j)` in the chart `z_j = x_{2j} + (-1)^j x_{2j+1} i`,
//! and the quaternionic Hessian `(d^2 u / dqb_l dq_k)`. The quaternionic one
//! is assembled by two independent routes — directly from the sixteen real
//! second partials per entry, and through the complex Hessian — which must
//! agree; their agreement is the transcription guard for all unit-order
//! conventions.

use nalgebra::DMatrix;
use num::complex::Complex64;
use std::sync::Arc;

use crate::error::{QmaError, Result};
use crate::quat::{moore_det, HyperhermitianMatrix, Quaternion};

/// A real-valued function on `R^{4n}`, `n` the quaternionic dimension.
///
/// Evaluators must be safe for concurrent calls; all routines here only read.
#[derive(Clone)]
pub struct ScalarField {
    n: usize,
    eval: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
}

impl ScalarField {
    pub fn new(n: usize, eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        ScalarField { n, eval: Arc::new(eval) }
    }

    /// Quaternionic dimension; the real dimension is `4n`.
    pub fn quat_dim(&self) -> usize {
        self.n
    }

    pub fn real_dim(&self) -> usize {
        4 * self.n
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.eval)(x)
    }
}

/// Central-difference configuration; `h` is the step on unit-scale domains.
#[derive(Debug, Clone, Copy)]
pub struct FdConfig {
    pub h: f64,
}

impl Default for FdConfig {
    fn default() -> Self {
        FdConfig { h: 1e-3 }
    }
}

impl FdConfig {
    pub fn with_step(h: f64) -> Result<Self> {
        if h <= 0.0 || !h.is_finite() {
            return Err(QmaError::Invalid(format!("step must be positive, got {h}")));
        }
        Ok(FdConfig { h })
    }
}

/// Maps a real point to the complex chart, `z_j = x_{2j} + (-1)^j x_{2j+1} i`.
pub fn to_complex_chart(x: &[f64]) -> Vec<Complex64> {
    (0..x.len() / 2)
        .map(|j| {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            Complex64::new(x[2 * j], sign * x[2 * j + 1])
        })
        .collect()
}

/// Real symmetric Hessian by second-order central differences.
pub fn real_hessian(u: &ScalarField, p: &[f64], cfg: &FdConfig) -> Result<DMatrix<f64>> {
    let d = u.real_dim();
    if p.len() != d {
        return Err(QmaError::Invalid(format!(
            "point has dimension {}, field expects {}",
            p.len(),
            d
        )));
    }
    let h = cfg.h;
    let f0 = u.eval(p);
    if !f0.is_finite() {
        return Err(QmaError::Domain("field evaluation is not finite at the base point".into()));
    }
    let mut x = p.to_vec();
    let mut hess = DMatrix::<f64>::zeros(d, d);
    for i in 0..d {
        x[i] += h;
        let fp = u.eval(&x);
        x[i] -= 2.0 * h;
        let fm = u.eval(&x);
        x[i] = p[i];
        hess[(i, i)] = (fp - 2.0 * f0 + fm) / (h * h);
        for j in i + 1..d {
            x[i] += h;
            x[j] += h;
            let fpp = u.eval(&x);
            x[j] -= 2.0 * h;
            let fpm = u.eval(&x);
            x[i] -= 2.0 * h;
            let fmm = u.eval(&x);
            x[j] += 2.0 * h;
            let fmp = u.eval(&x);
            x[i] = p[i];
            x[j] = p[j];
            let v = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    if hess.iter().any(|v| !v.is_finite()) {
        return Err(QmaError::Domain("non-finite Hessian entry; point too close to a singularity".into()));
    }
    Ok(hess)
}

/// Mixed complex Hessian `(d^2 u / dz_a dzb_b)`, a 2n-by-2n matrix assembled
/// from the real Hessian through the chart rule; Hermitian-symmetrized.
pub fn complex_hessian(u: &ScalarField, p: &[f64], cfg: &FdConfig) -> Result<DMatrix<Complex64>> {
    let d2 = real_hessian(u, p, cfg)?;
    Ok(complex_from_real(&d2))
}

/// Chart assembly of the mixed complex Hessian from a real one.
pub fn complex_from_real(d2: &DMatrix<f64>) -> DMatrix<Complex64> {
    let m = d2.nrows() / 2;
    let mut c = DMatrix::<Complex64>::zeros(m, m);
    for a in 0..m {
        let ea = if a % 2 == 0 { 1.0 } else { -1.0 };
        for b in 0..m {
            let eb = if b % 2 == 0 { 1.0 } else { -1.0 };
            // 1/4 (d_{x_{2a}} - e_a i d_{x_{2a+1}}) (d_{x_{2b}} + e_b i d_{x_{2b+1}})
            let re = 0.25 * (d2[(2 * a, 2 * b)] + ea * eb * d2[(2 * a + 1, 2 * b + 1)]);
            let im = 0.25 * (eb * d2[(2 * a, 2 * b + 1)] - ea * d2[(2 * a + 1, 2 * b)]);
            c[(a, b)] = Complex64::new(re, im);
        }
    }
    // Hermitian symmetrization kills FD asymmetry
    let ch = c.adjoint();
    (c + ch) * Complex64::new(0.5, 0.0)
}

/// Quaternionic Hessian entry by entry from real second partials:
/// `(d/dqb_l)(d/dq_k) u = sum_{a,b} e_a D_{4l+a, 4k+b} c_b` with left units
/// `e = (1, i, j, k)` and right units `c = (1, -i, -j, -k)`.
pub fn quat_hessian_direct(u: &ScalarField, p: &[f64], cfg: &FdConfig) -> Result<HyperhermitianMatrix> {
    let d2 = real_hessian(u, p, cfg)?;
    let n = u.quat_dim();
    let e = [Quaternion::ONE, Quaternion::I, Quaternion::J, Quaternion::K];
    let c = [Quaternion::ONE, -Quaternion::I, -Quaternion::J, -Quaternion::K];
    let mut entries = vec![Quaternion::ZERO; n * n];
    for l in 0..n {
        for k in 0..n {
            let mut acc = Quaternion::ZERO;
            for a in 0..4 {
                for b in 0..4 {
                    acc = acc + e[a] * d2[(4 * l + a, 4 * k + b)] * c[b];
                }
            }
            entries[l * n + k] = acc;
        }
    }
    HyperhermitianMatrix::symmetrized(n, &entries)
}

/// Quaternionic Hessian through the complex route: entry `(l,k)` is
/// `4(C_{2k,2l} + C_{2l+1,2k+1}) + 4 j (C_{2k,2l+1} - C_{2l,2k+1})` with
/// `C_{a,b} = d^2 u / dz_a dzb_b`; must agree with the direct route.
pub fn quat_hessian_via_complex(u: &ScalarField, p: &[f64], cfg: &FdConfig) -> Result<HyperhermitianMatrix> {
    let c = complex_hessian(u, p, cfg)?;
    let n = u.quat_dim();
    let mut entries = vec![Quaternion::ZERO; n * n];
    for l in 0..n {
        for k in 0..n {
            let a = 4.0 * (c[(2 * k, 2 * l)] + c[(2 * l + 1, 2 * k + 1)]);
            let b = 4.0 * (c[(2 * k, 2 * l + 1)] - c[(2 * l, 2 * k + 1)]);
            // left split q = a + j b
            entries[l * n + k] = Quaternion::new(a.re, a.im, b.re, -b.im);
        }
    }
    HyperhermitianMatrix::symmetrized(n, &entries)
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Pointwise Monge-Ampere density: the coefficient of the n-th power of the
/// operator against the canonical `(2n,0)` form,
/// `(n!/4^n) det(Hess(u, H))` with the Moore determinant.
pub fn qma_density(u: &ScalarField, p: &[f64], cfg: &FdConfig) -> Result<f64> {
    let n = u.quat_dim();
    let hess = quat_hessian_direct(u, p, cfg)?;
    Ok(factorial(n) / 4f64.powi(n as i32) * moore_det(&hess)?)
}

/// Outcome of the determinant inequality check
/// `det(Hess(u,H))^2 >= 4^{2n} det(Hess(u,C))` at a plurisubharmonic point.
#[derive(Debug, Clone, Copy)]
pub struct CprCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

const CPR_REL_TOL: f64 = 1e-10;

pub fn cpr_check(u: &ScalarField, p: &[f64], cfg: &FdConfig) -> Result<CprCheck> {
    let n = u.quat_dim();
    let c = complex_hessian(u, p, cfg)?;
    // precondition: complex Hessian PSD to FD tolerance
    let eig = c.clone().symmetric_eigen();
    let rho = eig.eigenvalues.iter().map(|v| v.abs()).fold(0.0_f64, f64::max);
    let psd_tol = 1e3 * cfg.h * cfg.h * rho.max(1.0);
    if let Some(bad) = eig.eigenvalues.iter().find(|&&v| v < -psd_tol) {
        return Err(QmaError::Domain(format!(
            "complex Hessian is not positive semidefinite (eigenvalue {bad:.3e}); the inequality requires a plurisubharmonic point"
        )));
    }
    let det_c = c.lu().determinant().re;
    let hess_q = quat_hessian_direct(u, p, cfg)?;
    let moore = moore_det(&hess_q)?;
    let lhs = moore * moore;
    let rhs = 4f64.powi(2 * n as i32) * det_c;
    let holds = lhs >= rhs - CPR_REL_TOL * rhs.abs().max(1.0);
    Ok(CprCheck { lhs, rhs, holds })
}
