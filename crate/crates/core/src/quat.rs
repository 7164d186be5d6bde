//! Quaternion arithmetic, hyperhermitian matrices and the Moore determinant.
//!
//! A hyperhermitian matrix `M` splits entrywise as `G + jH` with complex
//! `G`, `H`; the embedding `psi(M) = [[G, -conj(H)], [H, conj(G)]]` is a
//! Hermitian 2n-by-2n complex matrix whose spectrum doubles the quaternionic
//! one. The Moore determinant is computed by two independent routes: the
//! Pfaffian of the skew-symmetric matrix `I psi(M)` (sign pinned so the
//! identity matrix maps to 1) and the product of one eigenvalue per pair of
//! the doubled spectrum of `psi(M)`.

use nalgebra::DMatrix;
use num::complex::Complex64;

use crate::error::{QmaError, Result};
use crate::pfaffian;

/// Relative tolerance for validating hyperhermitian structure of inputs.
const HH_TOL: f64 = 1e-9;

/// Relative tolerance for the eigenvalue pairing in the spectral route.
const PAIR_TOL: f64 = 1e-8;

/// A quaternion `w + x i + y j + z k` stored as four real scalars.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const ZERO: Quaternion = Quaternion { w: 0.0, x: 0.0, y: 0.0, z: 0.0 };
    pub const ONE: Quaternion = Quaternion { w: 1.0, x: 0.0, y: 0.0, z: 0.0 };
    pub const I: Quaternion = Quaternion { w: 0.0, x: 1.0, y: 0.0, z: 0.0 };
    pub const J: Quaternion = Quaternion { w: 0.0, x: 0.0, y: 1.0, z: 0.0 };
    pub const K: Quaternion = Quaternion { w: 0.0, x: 0.0, y: 0.0, z: 1.0 };

    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Quaternion { w, x, y, z }
    }

    pub fn real(w: f64) -> Self {
        Quaternion { w, x: 0.0, y: 0.0, z: 0.0 }
    }

    pub fn conj(&self) -> Self {
        Quaternion { w: self.w, x: -self.x, y: -self.y, z: -self.z }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.w.is_finite() && self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Complex part `w + x i` of the left split `q = g + j h`.
    pub fn complex_g(&self) -> Complex64 {
        Complex64::new(self.w, self.x)
    }

    /// Complex part `h = y - z i` of the left split `q = g + j h`; this is
    /// the split for which the block embedding is a *-homomorphism.
    pub fn complex_h(&self) -> Complex64 {
        Complex64::new(self.y, -self.z)
    }

    /// Rebuilds a quaternion from the two complex parts of the left split.
    pub fn from_complex_parts(g: Complex64, h: Complex64) -> Self {
        Quaternion { w: g.re, x: g.im, y: h.re, z: -h.im }
    }
}

impl std::ops::Add for Quaternion {
    type Output = Quaternion;
    fn add(self, o: Quaternion) -> Quaternion {
        Quaternion::new(self.w + o.w, self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl std::ops::Sub for Quaternion {
    type Output = Quaternion;
    fn sub(self, o: Quaternion) -> Quaternion {
        Quaternion::new(self.w - o.w, self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl std::ops::Neg for Quaternion {
    type Output = Quaternion;
    fn neg(self) -> Quaternion {
        Quaternion::new(-self.w, -self.x, -self.y, -self.z)
    }
}

impl std::ops::Mul<f64> for Quaternion {
    type Output = Quaternion;
    fn mul(self, s: f64) -> Quaternion {
        Quaternion::new(self.w * s, self.x * s, self.y * s, self.z * s)
    }
}

impl std::ops::Mul for Quaternion {
    type Output = Quaternion;
    /// Hamilton product; noncommutative, `conj(ab) = conj(b) conj(a)`.
    fn mul(self, o: Quaternion) -> Quaternion {
        Quaternion {
            w: self.w * o.w - self.x * o.x - self.y * o.y - self.z * o.z,
            x: self.w * o.x + self.x * o.w + self.y * o.z - self.z * o.y,
            y: self.w * o.y - self.x * o.z + self.y * o.w + self.z * o.x,
            z: self.w * o.z + self.x * o.y - self.y * o.x + self.z * o.w,
        }
    }
}

pub fn quat_mul(a: Quaternion, b: Quaternion) -> Quaternion {
    a * b
}

/// An n-by-n quaternionic matrix equal to its quaternionic conjugate
/// transpose; diagonal entries are real.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperhermitianMatrix {
    n: usize,
    entries: Vec<Quaternion>, // row-major
}

impl HyperhermitianMatrix {
    /// Validating constructor; rejects non-hyperhermitian input naming the
    /// offending index pair.
    pub fn new(n: usize, entries: Vec<Quaternion>) -> Result<Self> {
        if n == 0 {
            return Err(QmaError::Invalid("dimension must be positive".into()));
        }
        if entries.len() != n * n {
            return Err(QmaError::Invalid(format!(
                "expected {} entries for n = {}, got {}",
                n * n,
                n,
                entries.len()
            )));
        }
        let scale = entries.iter().map(|q| q.norm()).fold(0.0_f64, f64::max).max(1.0);
        for (idx, q) in entries.iter().enumerate() {
            if !q.is_finite() {
                let (l, k) = (idx / n, idx % n);
                return Err(QmaError::InvalidHyperhermitian { l, k, detail: "non-finite entry".into() });
            }
        }
        for l in 0..n {
            let d = entries[l * n + l];
            if (d.x.abs().max(d.y.abs()).max(d.z.abs())) > HH_TOL * scale {
                return Err(QmaError::InvalidHyperhermitian {
                    l,
                    k: l,
                    detail: format!("diagonal entry has imaginary part {:?}", (d.x, d.y, d.z)),
                });
            }
            for k in l + 1..n {
                let diff = entries[l * n + k] - entries[k * n + l].conj();
                if diff.norm() > HH_TOL * scale {
                    return Err(QmaError::InvalidHyperhermitian {
                        l,
                        k,
                        detail: format!("entry (l,k) differs from conj of (k,l) by {:.3e}", diff.norm()),
                    });
                }
            }
        }
        Ok(HyperhermitianMatrix { n, entries })
    }

    /// Projects arbitrary entries onto the hyperhermitian structure by
    /// averaging with the quaternionic conjugate transpose and zeroing the
    /// imaginary parts of the diagonal.
    pub fn symmetrized(n: usize, entries: &[Quaternion]) -> Result<Self> {
        if entries.len() != n * n || n == 0 {
            return Err(QmaError::Invalid("entry count does not match dimension".into()));
        }
        let mut out = vec![Quaternion::ZERO; n * n];
        for l in 0..n {
            for k in 0..n {
                let avg = (entries[l * n + k] + entries[k * n + l].conj()) * 0.5;
                out[l * n + k] = avg;
            }
        }
        for l in 0..n {
            let d = out[l * n + l];
            out[l * n + l] = Quaternion::real(d.w);
        }
        HyperhermitianMatrix::new(n, out)
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![Quaternion::ZERO; n * n];
        for i in 0..n {
            entries[i * n + i] = Quaternion::ONE;
        }
        HyperhermitianMatrix { n, entries }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        let mut entries = vec![Quaternion::ZERO; n * n];
        for i in 0..n {
            entries[i * n + i] = Quaternion::real(values[i]);
        }
        HyperhermitianMatrix { n, entries }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, l: usize, k: usize) -> Quaternion {
        self.entries[l * self.n + k]
    }

    pub fn entries(&self) -> &[Quaternion] {
        &self.entries
    }

    pub fn add(&self, other: &HyperhermitianMatrix) -> Result<Self> {
        if self.n != other.n {
            return Err(QmaError::Invalid("dimension mismatch".into()));
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(&a, &b)| a + b)
            .collect();
        Ok(HyperhermitianMatrix { n: self.n, entries })
    }

    pub fn scale(&self, s: f64) -> Self {
        HyperhermitianMatrix {
            n: self.n,
            entries: self.entries.iter().map(|&q| q * s).collect(),
        }
    }

    /// The complex embedding `psi(M) = [[G, -conj(H)], [H, conj(G)]]`.
    pub fn psi(&self) -> DMatrix<Complex64> {
        let n = self.n;
        let mut m = DMatrix::<Complex64>::zeros(2 * n, 2 * n);
        for l in 0..n {
            for k in 0..n {
                let g = self.get(l, k).complex_g();
                let h = self.get(l, k).complex_h();
                m[(l, k)] = g;
                m[(l, n + k)] = -h.conj();
                m[(n + l, k)] = h;
                m[(n + l, n + k)] = g.conj();
            }
        }
        m
    }

    /// The skew-symmetric matrix `I psi(M)` with `I = [[0, -Id], [Id, 0]]`,
    /// symmetrized to kill floating-point asymmetry.
    pub fn skew_representative(&self) -> DMatrix<Complex64> {
        let n = self.n;
        let psi = self.psi();
        let mut s = DMatrix::<Complex64>::zeros(2 * n, 2 * n);
        for j in 0..2 * n {
            for k in 0..n {
                // top block: -(rows n..2n of psi), bottom block: rows 0..n
                s[(k, j)] = -psi[(n + k, j)];
                s[(n + k, j)] = psi[(k, j)];
            }
        }
        let st = s.transpose();
        (s - st) * Complex64::new(0.5, 0.0)
    }
}

/// Sign of the Pfaffian route, pinned by `moore_det(Identity) = 1`.
fn moore_sign(n: usize) -> Result<f64> {
    let s = HyperhermitianMatrix::identity(n).skew_representative();
    let pf = pfaffian::pfaffian(&s)?;
    // exact +-1 up to round-off
    Ok(if pf.re >= 0.0 { 1.0 } else { -1.0 })
}

/// Moore determinant via the Pfaffian of `I psi(M)`.
pub fn moore_det_pfaffian(m: &HyperhermitianMatrix) -> Result<f64> {
    let s = m.skew_representative();
    let pf = pfaffian::pfaffian(&s)?;
    Ok(pf.re * moore_sign(m.dim())?)
}

/// Moore determinant via the doubled spectrum of `psi(M)`.
///
/// The eigenvalues of the Hermitian embedding come in exact pairs; the
/// product of one representative per pair is the Moore determinant. A pair
/// gap beyond tolerance signals numerically broken hyperhermitian structure.
pub fn moore_det_eigen(m: &HyperhermitianMatrix) -> Result<f64> {
    let psi = m.psi();
    let eig = psi.symmetric_eigen();
    let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let rho = ev.iter().map(|v| v.abs()).fold(0.0_f64, f64::max);
    let tol = PAIR_TOL * rho.max(f64::MIN_POSITIVE);
    let mut det = 1.0;
    for pair in ev.chunks(2) {
        let gap = (pair[1] - pair[0]).abs();
        if gap > tol {
            return Err(QmaError::EigenPairing { gap, tol });
        }
        det *= 0.5 * (pair[0] + pair[1]);
    }
    Ok(det)
}

/// Moore determinant; the Pfaffian route is the returned value, the spectral
/// route serves as a structural guard.
pub fn moore_det(m: &HyperhermitianMatrix) -> Result<f64> {
    let _ = moore_det_eigen(m)?;
    moore_det_pfaffian(m)
}

/// Positivity of the quaternionic Hessian: all eigenvalues of `psi(M)`
/// at least `-tol` with `tol = 1e-12 * spectral radius`.
pub fn is_hyperhermitian_positive(m: &HyperhermitianMatrix) -> bool {
    let psi = m.psi();
    let eig = psi.symmetric_eigen();
    let rho = eig.eigenvalues.iter().map(|v| v.abs()).fold(0.0_f64, f64::max);
    let tol = 1e-12 * rho;
    eig.eigenvalues.iter().all(|&v| v >= -tol)
}

/// Smallest eigenvalue of `psi(M)`; lets callers apply their own positivity
/// tolerance (finite-difference Hessians need one at the FD error scale).
pub fn psi_min_eigenvalue(m: &HyperhermitianMatrix) -> f64 {
    let eig = m.psi().symmetric_eigen();
    eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Strict positivity: all eigenvalues above `+tol`.
pub fn is_hyperhermitian_strictly_positive(m: &HyperhermitianMatrix) -> bool {
    let psi = m.psi();
    let eig = psi.symmetric_eigen();
    let rho = eig.eigenvalues.iter().map(|v| v.abs()).fold(0.0_f64, f64::max);
    let tol = 1e-12 * rho;
    eig.eigenvalues.iter().all(|&v| v > tol)
}

/// Quaternionic matrix product of raw row-major entry slices (test helper
/// and building block for random hyperhermitian instances).
pub fn quat_mat_mul(n: usize, a: &[Quaternion], b: &[Quaternion]) -> Vec<Quaternion> {
    let mut out = vec![Quaternion::ZERO; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = Quaternion::ZERO;
            for k in 0..n {
                acc = acc + a[i * n + k] * b[k * n + j];
            }
            out[i * n + j] = acc;
        }
    }
    out
}

/// Quaternionic conjugate transpose of a raw row-major entry slice.
pub fn quat_mat_conj_transpose(n: usize, a: &[Quaternion]) -> Vec<Quaternion> {
    let mut out = vec![Quaternion::ZERO; n * n];
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = a[j * n + i].conj();
        }
    }
    out
}

/// Parses the hyperhermitian matrix file format consumed by the `moore`
/// subcommand:
///
/// ```text
/// n 2
/// entries
/// 1.0 0 0 0
/// 0.5 0.25 0 -1
/// 0.5 -0.25 0 1
/// 2.0 0 0 0
/// ```
///
/// `entries` lists the n^2 quaternions row-major, one `w x y z` tuple per
/// line; blank lines and `#` comments are ignored. The hyperhermitian
/// invariants are validated and violations rejected with a diagnostic.
pub fn parse_hyperhermitian(text: &str) -> Result<HyperhermitianMatrix> {
    let mut n: Option<usize> = None;
    let mut quads: Vec<Quaternion> = Vec::new();
    let mut in_entries = false;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if !in_entries {
            if let Some(rest) = line.strip_prefix('n') {
                let rest = rest.trim_start_matches([' ', '=', ':']).trim();
                n = Some(rest.parse::<usize>().map_err(|e| {
                    QmaError::Parse(format!("line {}: cannot parse dimension: {}", lineno + 1, e))
                })?);
                continue;
            }
            if line == "entries" {
                if n.is_none() {
                    return Err(QmaError::Parse("'entries' before dimension 'n'".into()));
                }
                in_entries = true;
                continue;
            }
            return Err(QmaError::Parse(format!("line {}: unexpected '{}'", lineno + 1, line)));
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 4 {
            return Err(QmaError::Parse(format!(
                "line {}: expected 4 components w x y z, got {}",
                lineno + 1,
                parts.len()
            )));
        }
        let mut c = [0.0_f64; 4];
        for (i, p) in parts.iter().enumerate() {
            c[i] = p.parse::<f64>().map_err(|e| {
                QmaError::Parse(format!("line {}: bad number '{}': {}", lineno + 1, p, e))
            })?;
        }
        quads.push(Quaternion::new(c[0], c[1], c[2], c[3]));
    }
    let n = n.ok_or_else(|| QmaError::Parse("missing dimension 'n'".into()))?;
    HyperhermitianMatrix::new(n, quads)
}

/// Uniform random quaternion with components in `[-1, 1)`.
pub fn random_quaternion(r: &mut impl rand::Rng) -> Quaternion {
    Quaternion::new(
        r.gen_range(-1.0..1.0),
        r.gen_range(-1.0..1.0),
        r.gen_range(-1.0..1.0),
        r.gen_range(-1.0..1.0),
    )
}

/// Random hyperhermitian matrix (symmetrized random entries).
pub fn random_hyperhermitian(n: usize, r: &mut impl rand::Rng) -> HyperhermitianMatrix {
    let entries: Vec<Quaternion> = (0..n * n).map(|_| random_quaternion(r)).collect();
    HyperhermitianMatrix::symmetrized(n, &entries).unwrap()
}

/// Random strictly positive definite hyperhermitian matrix `A* A + eps Id`.
pub fn random_positive_definite(n: usize, r: &mut impl rand::Rng) -> HyperhermitianMatrix {
    let a: Vec<Quaternion> = (0..n * n).map(|_| random_quaternion(r)).collect();
    let at = quat_mat_conj_transpose(n, &a);
    let prod = quat_mat_mul(n, &at, &a);
    let eps = HyperhermitianMatrix::identity(n).scale(1e-3);
    HyperhermitianMatrix::symmetrized(n, &prod)
        .unwrap()
        .add(&eps)
        .unwrap()
}
