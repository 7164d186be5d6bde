//! Exact exterior calculus over `R^{4n} ~ C^{2n}`.
//!
//! Polynomials in the variables `z_0..z_{2n-1}`, `zb_0..zb_{2n-1}` carry
//! exact Gaussian-rational coefficients, so every operator identity is
//! checked without tolerance. Differential forms of bidegree `(p,q)` store a
//! sparse polynomial per basis wedge `dz_I ^ dzb_J` with strictly increasing
//! index tuples.
//!
//! The twisted differential has two implementations: the composition
//! `J^{-1} o dbar o J` with `J` acting fiberwise on basis factors, and the
//! direct coordinate formula; they are required to coincide exactly.

use num::complex::Complex;
use num::{BigInt, BigRational, One, Signed, Zero};
use rand::Rng;
use std::collections::BTreeMap;
use std::fmt;

use crate::error::{QmaError, Result};
use crate::pfaffian;

pub type Rat = BigRational;
/// Exact Gaussian-rational coefficient.
pub type CRat = Complex<Rat>;

pub fn crat_zero() -> CRat {
    Complex::new(Rat::zero(), Rat::zero())
}

pub fn crat_one() -> CRat {
    Complex::new(Rat::one(), Rat::zero())
}

pub fn crat_int(v: i64) -> CRat {
    Complex::new(Rat::from_integer(BigInt::from(v)), Rat::zero())
}

/// Dyadic rational `num / 2^k` as a real coefficient.
pub fn crat_dyadic(num: i64, k: u32) -> CRat {
    Complex::new(
        Rat::new(BigInt::from(num), BigInt::from(1i64 << k)),
        Rat::zero(),
    )
}

pub fn crat_conj(c: &CRat) -> CRat {
    Complex::new(c.re.clone(), -c.im.clone())
}

pub fn crat_to_f64(c: &CRat) -> (f64, f64) {
    fn r2f(r: &Rat) -> f64 {
        let n = r.numer();
        let d = r.denom();
        // good enough for desk-scale coefficients
        let nf = n.to_string().parse::<f64>().unwrap_or(f64::NAN);
        let df = d.to_string().parse::<f64>().unwrap_or(f64::NAN);
        nf / df
    }
    (r2f(&c.re), r2f(&c.im))
}

/// Index of the quaternionic partner coordinate: `0<->1`, `2<->3`, ...
pub fn partner(i: usize) -> usize {
    if i % 2 == 0 {
        i + 1
    } else {
        i - 1
    }
}

/// A monomial `prod z_i^{zpow_i} * prod zb_i^{wpow_i}`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub zpow: Vec<u8>,
    pub wpow: Vec<u8>,
}

impl Monomial {
    pub fn constant(nvars: usize) -> Self {
        Monomial { zpow: vec![0; nvars], wpow: vec![0; nvars] }
    }

    pub fn degree(&self) -> usize {
        self.zpow.iter().map(|&e| e as usize).sum::<usize>()
            + self.wpow.iter().map(|&e| e as usize).sum::<usize>()
    }

    /// Swaps holomorphic and antiholomorphic exponents.
    pub fn bar(&self) -> Self {
        Monomial { zpow: self.wpow.clone(), wpow: self.zpow.clone() }
    }
}

/// Sparse polynomial with exact coefficients; zero coefficients are never
/// stored and iteration order is the lexicographic term order of the
/// exponent vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Monomial, CRat>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Polynomial { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: CRat) -> Self {
        let mut p = Polynomial::zero(nvars);
        p.insert(Monomial::constant(nvars), c);
        p
    }

    pub fn var_z(nvars: usize, i: usize) -> Self {
        let mut m = Monomial::constant(nvars);
        m.zpow[i] = 1;
        let mut p = Polynomial::zero(nvars);
        p.insert(m, crat_one());
        p
    }

    pub fn var_zbar(nvars: usize, i: usize) -> Self {
        let mut m = Monomial::constant(nvars);
        m.wpow[i] = 1;
        let mut p = Polynomial::zero(nvars);
        p.insert(m, crat_one());
        p
    }

    /// `sum_i z_i zb_i`, the squared quaternionic norm.
    pub fn norm_sq(nvars: usize) -> Self {
        let mut p = Polynomial::zero(nvars);
        for i in 0..nvars {
            let mut m = Monomial::constant(nvars);
            m.zpow[i] = 1;
            m.wpow[i] = 1;
            p.insert(m, crat_one());
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &CRat)> {
        self.terms.iter()
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    fn insert(&mut self, m: Monomial, c: CRat) {
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

    pub fn add(&self, o: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.insert(m.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Polynomial {
        Polynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
        }
    }

    pub fn sub(&self, o: &Polynomial) -> Polynomial {
        self.add(&o.neg())
    }

    pub fn scale(&self, s: &CRat) -> Polynomial {
        if s.is_zero() {
            return Polynomial::zero(self.nvars);
        }
        Polynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c.clone() * s.clone())).collect(),
        }
    }

    pub fn mul(&self, o: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero(self.nvars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                let m = Monomial {
                    zpow: ma.zpow.iter().zip(&mb.zpow).map(|(a, b)| a + b).collect(),
                    wpow: ma.wpow.iter().zip(&mb.wpow).map(|(a, b)| a + b).collect(),
                };
                out.insert(m, ca.clone() * cb.clone());
            }
        }
        out
    }

    pub fn deriv_z(&self, i: usize) -> Polynomial {
        let mut out = Polynomial::zero(self.nvars);
        for (m, c) in &self.terms {
            let e = m.zpow[i];
            if e > 0 {
                let mut nm = m.clone();
                nm.zpow[i] = e - 1;
                out.insert(nm, c.clone() * crat_int(e as i64));
            }
        }
        out
    }

    pub fn deriv_zbar(&self, i: usize) -> Polynomial {
        let mut out = Polynomial::zero(self.nvars);
        for (m, c) in &self.terms {
            let e = m.wpow[i];
            if e > 0 {
                let mut nm = m.clone();
                nm.wpow[i] = e - 1;
                out.insert(nm, c.clone() * crat_int(e as i64));
            }
        }
        out
    }

    /// Formal complex conjugate: swap `z <-> zb` and conjugate coefficients.
    pub fn conj(&self) -> Polynomial {
        Polynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.bar(), crat_conj(c))).collect(),
        }
    }

    /// Structural real-ness: the polynomial equals its formal conjugate.
    pub fn is_real(&self) -> bool {
        *self == self.conj()
    }

    /// Constant term, or an error if the polynomial is not constant.
    pub fn constant_value(&self) -> Result<CRat> {
        if self.is_zero() {
            return Ok(crat_zero());
        }
        if self.terms.len() == 1 {
            if let Some(c) = self.terms.get(&Monomial::constant(self.nvars)) {
                return Ok(c.clone());
            }
        }
        Err(QmaError::Invalid(format!("polynomial is not constant: {}", self)))
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({}{}{}i)", c.re, if c.im.is_negative() { "" } else { "+" }, c.im)?;
            for (i, &e) in m.zpow.iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, "*z{}", i)?,
                    _ => write!(f, "*z{}^{}", i, e)?,
                }
            }
            for (i, &e) in m.wpow.iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, "*zb{}", i)?,
                    _ => write!(f, "*zb{}^{}", i, e)?,
                }
            }
        }
        Ok(())
    }
}

/// Inserts `idx` into a strictly increasing tuple, returning the new tuple
/// and whether the wedge reordering sign is negative. `None` on repetition.
fn insert_sorted(tuple: &[u8], idx: u8) -> Option<(Vec<u8>, bool)> {
    match tuple.binary_search(&idx) {
        Ok(_) => None,
        Err(pos) => {
            let mut out = Vec::with_capacity(tuple.len() + 1);
            out.extend_from_slice(&tuple[..pos]);
            out.push(idx);
            out.extend_from_slice(&tuple[pos..]);
            Some((out, pos % 2 == 1))
        }
    }
}

/// Concatenation sign of two increasing tuples (inversion count parity);
/// `None` if they share an index.
fn merge_sorted(a: &[u8], b: &[u8]) -> Option<(Vec<u8>, bool)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let mut inversions = 0usize;
    let (mut i, mut j) = (0usize, 0usize);
    while i < a.len() && j < b.len() {
        if a[i] == b[j] {
            return None;
        }
        if a[i] < b[j] {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
            inversions += a.len() - i;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    Some((out, inversions % 2 == 1))
}

/// Sorts an arbitrary distinct tuple, tracking the permutation sign.
fn sort_with_sign(mut t: Vec<u8>) -> (Vec<u8>, bool) {
    let mut swaps = 0usize;
    for i in 1..t.len() {
        let mut j = i;
        while j > 0 && t[j - 1] > t[j] {
            t.swap(j - 1, j);
            swaps += 1;
            j -= 1;
        }
    }
    (t, swaps % 2 == 1)
}

/// Differential form of bidegree `(p,q)` with polynomial coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyForm {
    nvars: usize,
    p: usize,
    q: usize,
    terms: BTreeMap<(Vec<u8>, Vec<u8>), Polynomial>,
}

impl PolyForm {
    pub fn zero(nvars: usize, p: usize, q: usize) -> Self {
        PolyForm { nvars, p, q, terms: BTreeMap::new() }
    }

    pub fn scalar(poly: Polynomial) -> Self {
        let nvars = poly.nvars();
        let mut f = PolyForm::zero(nvars, 0, 0);
        f.insert(vec![], vec![], poly);
        f
    }

    pub fn basis_dz(nvars: usize, i: usize) -> Self {
        let mut f = PolyForm::zero(nvars, 1, 0);
        f.insert(vec![i as u8], vec![], Polynomial::constant(nvars, crat_one()));
        f
    }

    pub fn basis_dzbar(nvars: usize, i: usize) -> Self {
        let mut f = PolyForm::zero(nvars, 0, 1);
        f.insert(vec![], vec![i as u8], Polynomial::constant(nvars, crat_one()));
        f
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn bidegree(&self) -> (usize, usize) {
        (self.p, self.q)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(Vec<u8>, Vec<u8>), &Polynomial)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, dz: &[u8], dzbar: &[u8]) -> Polynomial {
        self.terms
            .get(&(dz.to_vec(), dzbar.to_vec()))
            .cloned()
            .unwrap_or_else(|| Polynomial::zero(self.nvars))
    }

    fn insert(&mut self, dz: Vec<u8>, dzbar: Vec<u8>, poly: Polynomial) {
        if poly.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry((dz, dzbar)) {
            Entry::Vacant(e) => {
                e.insert(poly);
            }
            Entry::Occupied(mut e) => {
                let s = e.get().add(&poly);
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, o: &PolyForm) -> Result<PolyForm> {
        if self.is_zero() {
            return Ok(o.clone());
        }
        if o.is_zero() {
            return Ok(self.clone());
        }
        if (self.p, self.q) != (o.p, o.q) || self.nvars != o.nvars {
            return Err(QmaError::Invalid("bidegree mismatch in form addition".into()));
        }
        let mut out = self.clone();
        for ((dz, dzb), poly) in &o.terms {
            out.insert(dz.clone(), dzb.clone(), poly.clone());
        }
        Ok(out)
    }

    pub fn neg(&self) -> PolyForm {
        PolyForm {
            nvars: self.nvars,
            p: self.p,
            q: self.q,
            terms: self.terms.iter().map(|(k, v)| (k.clone(), v.neg())).collect(),
        }
    }

    pub fn sub(&self, o: &PolyForm) -> Result<PolyForm> {
        self.add(&o.neg())
    }

    pub fn scale(&self, s: &CRat) -> PolyForm {
        PolyForm {
            nvars: self.nvars,
            p: self.p,
            q: self.q,
            terms: self
                .terms
                .iter()
                .map(|(k, v)| (k.clone(), v.scale(s)))
                .filter(|(_, v)| !v.is_zero())
                .collect(),
        }
    }

    /// Exterior product; degree overflow annihilates to the zero form.
    pub fn wedge(&self, o: &PolyForm) -> PolyForm {
        let p = self.p + o.p;
        let q = self.q + o.q;
        if p > self.nvars || q > self.nvars {
            return PolyForm::zero(self.nvars, p.min(self.nvars), q.min(self.nvars));
        }
        let mut out = PolyForm::zero(self.nvars, p, q);
        for ((ia, ja), fa) in &self.terms {
            for ((ib, jb), fb) in &o.terms {
                // move the p_b dz factors of the right form past the q_a
                // dzbar factors of the left one
                let cross_neg = (ja.len() * ib.len()) % 2 == 1;
                let Some((i_merged, i_neg)) = merge_sorted(ia, ib) else { continue };
                let Some((j_merged, j_neg)) = merge_sorted(ja, jb) else { continue };
                let neg = cross_neg ^ i_neg ^ j_neg;
                let mut poly = fa.mul(fb);
                if neg {
                    poly = poly.neg();
                }
                out.insert(i_merged, j_merged, poly);
            }
        }
        out
    }

    /// The holomorphic exterior derivative `d` (the operator `∂`).
    pub fn d_holo(&self) -> PolyForm {
        let mut out = PolyForm::zero(self.nvars, (self.p + 1).min(self.nvars + 1), self.q);
        for ((dz, dzb), f) in &self.terms {
            for i in 0..self.nvars {
                let df = f.deriv_z(i);
                if df.is_zero() {
                    continue;
                }
                if let Some((ndz, neg)) = insert_sorted(dz, i as u8) {
                    out.insert(ndz, dzb.clone(), if neg { df.neg() } else { df });
                }
            }
        }
        out
    }

    /// The antiholomorphic exterior derivative (the operator `∂̄`).
    pub fn d_anti(&self) -> PolyForm {
        let mut out = PolyForm::zero(self.nvars, self.p, (self.q + 1).min(self.nvars + 1));
        for ((dz, dzb), f) in &self.terms {
            for i in 0..self.nvars {
                let df = f.deriv_zbar(i);
                if df.is_zero() {
                    continue;
                }
                if let Some((ndzb, neg)) = insert_sorted(dzb, i as u8) {
                    // dzbar_i crosses all p dz factors first
                    let neg = neg ^ (dz.len() % 2 == 1);
                    out.insert(dz.clone(), ndzb, if neg { df.neg() } else { df });
                }
            }
        }
        out
    }

    /// The fiberwise action of the complex structure `J`:
    /// `J(dz_k) = (-1)^{k+1} dzb_{k+(-1)^k}` and the conjugate rule on the
    /// `dzb` factors; coefficients are untouched. Maps `(p,q)` to `(q,p)`.
    pub fn j_action(&self) -> PolyForm {
        let mut out = PolyForm::zero(self.nvars, self.q, self.p);
        for ((dz, dzb), f) in &self.terms {
            let mut neg = false;
            // unit signs (-1)^{k+1} per mapped factor
            for &k in dz.iter().chain(dzb.iter()) {
                if k % 2 == 0 {
                    neg = !neg;
                }
            }
            // original order: mapped dz factors become dzb (kept first),
            // mapped dzb become dz; moving the new dz block to the front
            // crosses |dz| * |dzb| factors
            if (dz.len() * dzb.len()) % 2 == 1 {
                neg = !neg;
            }
            let new_dz: Vec<u8> = dzb.iter().map(|&k| partner(k as usize) as u8).collect();
            let new_dzb: Vec<u8> = dz.iter().map(|&k| partner(k as usize) as u8).collect();
            let (new_dz, s1) = sort_with_sign(new_dz);
            let (new_dzb, s2) = sort_with_sign(new_dzb);
            neg ^= s1 ^ s2;
            out.insert(new_dz, new_dzb, if neg { f.neg() } else { f.clone() });
        }
        out
    }

    fn j_inverse(&self) -> PolyForm {
        self.j_action().j_action().j_action()
    }

    /// Twisted differential via the composition `J^{-1} o dbar o J`;
    /// defined on `(k,0)` forms only.
    pub fn d_twist(&self) -> Result<PolyForm> {
        if self.q != 0 {
            return Err(QmaError::Domain(format!(
                "twisted differential requires bidegree (k,0), got ({},{})",
                self.p, self.q
            )));
        }
        Ok(self.j_action().d_anti().j_inverse())
    }

    /// Twisted differential by the direct coordinate formula
    /// `sum_i (-1)^{i+1} (d_{zb_{i+(-1)^i}} f) dz_i ^ ...`.
    pub fn d_twist_direct(&self) -> Result<PolyForm> {
        if self.q != 0 {
            return Err(QmaError::Domain(format!(
                "twisted differential requires bidegree (k,0), got ({},{})",
                self.p, self.q
            )));
        }
        let mut out = PolyForm::zero(self.nvars, (self.p + 1).min(self.nvars + 1), 0);
        for ((dz, _), f) in &self.terms {
            for i in 0..self.nvars {
                let df = f.deriv_zbar(partner(i));
                if df.is_zero() {
                    continue;
                }
                if let Some((ndz, mut neg)) = insert_sorted(dz, i as u8) {
                    if i % 2 == 0 {
                        // the (-1)^{i+1} unit sign
                        neg = !neg;
                    }
                    out.insert(ndz, vec![], if neg { df.neg() } else { df });
                }
            }
        }
        Ok(out)
    }
}

/// `beta_n = sum_i dz_{2i} ^ dz_{2i+1}`.
pub fn beta_form(nvars: usize) -> PolyForm {
    let mut f = PolyForm::zero(nvars, 2, 0);
    for i in 0..nvars / 2 {
        f.insert(
            vec![2 * i as u8, 2 * i as u8 + 1],
            vec![],
            Polynomial::constant(nvars, crat_one()),
        );
    }
    f
}

/// `Omega_n = dz_0 ^ dz_1 ^ ... ^ dz_{2n-1}`.
pub fn omega_form(nvars: usize) -> PolyForm {
    let mut f = PolyForm::zero(nvars, nvars, 0);
    f.insert(
        (0..nvars as u8).collect(),
        vec![],
        Polynomial::constant(nvars, crat_one()),
    );
    f
}

/// Wan-Wang operator `d_0` on a scalar, expanded in the basis
/// `w^k = (-1)^k dz_{k+(-1)^k}`; equals `2 ∂_J` on functions.
pub fn d0_scalar(u: &Polynomial) -> PolyForm {
    let nvars = u.nvars();
    let mut out = PolyForm::zero(nvars, 1, 0);
    for k in 0..nvars {
        let df = u.deriv_zbar(k).scale(&crat_int(2));
        if df.is_zero() {
            continue;
        }
        let neg = k % 2 == 1;
        out.insert(
            vec![partner(k) as u8],
            vec![],
            if neg { df.neg() } else { df },
        );
    }
    out
}

/// Wan-Wang operator `d_1` on a scalar in the same basis; equals `-2 ∂`.
pub fn d1_scalar(u: &Polynomial) -> PolyForm {
    let nvars = u.nvars();
    let mut out = PolyForm::zero(nvars, 1, 0);
    for k in 0..nvars {
        let df = u.deriv_z(partner(k)).scale(&crat_int(2));
        if df.is_zero() {
            continue;
        }
        // (-1)^{k+1} from the operator times (-1)^k from the basis
        out.insert(vec![partner(k) as u8], vec![], df.neg());
    }
    out
}

/// The Monge-Ampere 2-form `∂ ∂_J u` of a scalar polynomial.
pub fn qma_form(u: &Polynomial) -> PolyForm {
    PolyForm::scalar(u.clone())
        .d_twist_direct()
        .expect("scalar form")
        .d_holo()
}

/// `(∂ ∂_J u)^n` for real `u`; the quaternionic dimension is `nvars / 2`.
pub fn qma_form_power(u: &Polynomial, n: usize) -> Result<PolyForm> {
    if !u.is_real() {
        return Err(QmaError::Domain("potential must be a real polynomial".into()));
    }
    if u.nvars() != 2 * n {
        return Err(QmaError::Invalid(format!(
            "expected {} complex variables for quaternionic dimension {}, got {}",
            2 * n,
            n,
            u.nvars()
        )));
    }
    let base = qma_form(u);
    let mut acc = base.clone();
    for _ in 1..n {
        acc = acc.wedge(&base);
    }
    Ok(acc)
}

/// Coefficient of `Omega_n` in a `(2n, 0)` form.
pub fn top_coefficient(f: &PolyForm) -> Result<Polynomial> {
    let (p, q) = f.bidegree();
    if p != f.nvars() || q != 0 {
        return Err(QmaError::Invalid(format!(
            "top coefficient requires bidegree ({}, 0), got ({}, {})",
            f.nvars(),
            p,
            q
        )));
    }
    let idx: Vec<u8> = (0..f.nvars() as u8).collect();
    Ok(f.coefficient(&idx, &[]))
}

/// Exact quaternionic Hessian of a real quadratic polynomial, assembled from
/// complex second derivatives; returns the row-major complex split `(G, H)`
/// of the constant hyperhermitian matrix.
pub fn quat_hessian_quadratic(u: &Polynomial, n: usize) -> Result<(Vec<CRat>, Vec<CRat>)> {
    if u.nvars() != 2 * n {
        return Err(QmaError::Invalid("variable count does not match dimension".into()));
    }
    let d2 = |a_bar: usize, b: usize| -> Result<CRat> {
        u.deriv_zbar(a_bar).deriv_z(b).constant_value()
    };
    let mut g = vec![crat_zero(); n * n];
    let mut h = vec![crat_zero(); n * n];
    let four = crat_int(4);
    for l in 0..n {
        for k in 0..n {
            // left split A + jB of the quaternionic second derivative
            let t1 = d2(2 * l, 2 * k)?;
            let t2 = d2(2 * k + 1, 2 * l + 1)?; // d_{z_{2l+1}} d_{zb_{2k+1}}
            let t3 = d2(2 * l + 1, 2 * k)?;
            let t4 = d2(2 * k + 1, 2 * l)?; // d_{z_{2l}} d_{zb_{2k+1}}
            // left split q = A + j B; B is exactly the H-entry of the
            // homomorphic block embedding
            g[l * n + k] = four.clone() * (t1 + t2);
            h[l * n + k] = four.clone() * (t3 - t4);
        }
    }
    Ok((g, h))
}

/// Exact Moore determinant of a constant hyperhermitian matrix given by its
/// complex split, via the recursive Pfaffian of the associated skew matrix.
pub fn moore_det_exact(n: usize, g: &[CRat], h: &[CRat]) -> Result<CRat> {
    let skew = |g: &[CRat], h: &[CRat]| -> Vec<Vec<CRat>> {
        let mut s = vec![vec![crat_zero(); 2 * n]; 2 * n];
        for l in 0..n {
            for k in 0..n {
                s[l][k] = -h[l * n + k].clone();
                s[l][n + k] = -crat_conj(&g[l * n + k]);
                s[n + l][k] = g[l * n + k].clone();
                s[n + l][n + k] = -crat_conj(&h[l * n + k]);
            }
        }
        s
    };
    let pf = pfaffian::pfaffian_expansion(&skew(g, h))?;
    // pin the sign so the identity matrix maps to 1
    let mut gid = vec![crat_zero(); n * n];
    let hid = vec![crat_zero(); n * n];
    for i in 0..n {
        gid[i * n + i] = crat_one();
    }
    let sign = pfaffian::pfaffian_expansion(&skew(&gid, &hid))?;
    Ok(pf * sign)
}

/// The polynomial `M_{ij} = (-1)^i z_{i+(-1)^i} zb_j + (-1)^{j+1} z_{j+(-1)^j} zb_i`
/// appearing in the log-family density computation.
pub fn m_polynomial(nvars: usize, i: usize, j: usize) -> Polynomial {
    let term = |a: usize, b: usize, neg: bool| -> Polynomial {
        let mut m = Monomial::constant(nvars);
        m.zpow[partner(a)] += 1;
        m.wpow[b] += 1;
        let mut p = Polynomial::zero(nvars);
        p.insert(m, if neg { -crat_one() } else { crat_one() });
        p
    };
    // (-1)^i and (-1)^{j+1} unit signs
    term(i, j, i % 2 == 1).add(&term(j, i, j % 2 == 0))
}

/// Expands `M_{kl} M_{mn} - M_{km} M_{ln} + M_{kn} M_{lm}` for the quadruple
/// `k > l > m > n`; the combination vanishes identically.
pub fn m_prime_combination(nvars: usize, k: usize, l: usize, m: usize, n: usize) -> Polynomial {
    let p1 = m_polynomial(nvars, k, l).mul(&m_polynomial(nvars, m, n));
    let p2 = m_polynomial(nvars, k, m).mul(&m_polynomial(nvars, l, n));
    let p3 = m_polynomial(nvars, k, n).mul(&m_polynomial(nvars, l, m));
    p1.sub(&p2).add(&p3)
}

/// Checks the vanishing of the quadratic Pluecker-type combination over all
/// admissible index quadruples in `{0,...,2n-1}`.
pub fn verify_m_prime_vanishing(n: usize) -> bool {
    let nvars = 2 * n;
    for k in 3..nvars {
        for l in 2..k {
            for m in 1..l {
                for nn in 0..m {
                    if !m_prime_combination(nvars, k, l, m, nn).is_zero() {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Random polynomial with dyadic coefficients, for the identity corpus.
pub fn random_polynomial(nvars: usize, max_degree: usize, terms: usize, r: &mut impl Rng) -> Polynomial {
    let mut p = Polynomial::zero(nvars);
    for _ in 0..terms {
        let mut m = Monomial::constant(nvars);
        let deg = r.gen_range(0..=max_degree);
        for _ in 0..deg {
            let v = r.gen_range(0..nvars);
            if r.gen_bool(0.5) {
                m.zpow[v] += 1;
            } else {
                m.wpow[v] += 1;
            }
        }
        let re = crat_dyadic(r.gen_range(-8..=8), r.gen_range(0..=3));
        let im = crat_dyadic(r.gen_range(-8..=8), r.gen_range(0..=3));
        let c = re + im * Complex::new(Rat::zero(), Rat::one());
        p.insert(m, c);
    }
    p
}

/// Random real quadratic `sum c_ij z_i zb_j` (Hermitian dyadic coefficient
/// matrix) plus a harmonic part `2 Re sum d_ij z_i z_j`.
pub fn random_real_quadratic(nvars: usize, with_harmonic: bool, r: &mut impl Rng) -> Polynomial {
    let mut p = Polynomial::zero(nvars);
    for i in 0..nvars {
        for j in 0..nvars {
            let (re, im) = if i == j {
                (crat_dyadic(r.gen_range(-8..=8), 2), crat_zero())
            } else if i < j {
                (
                    crat_dyadic(r.gen_range(-8..=8), 2),
                    crat_dyadic(r.gen_range(-8..=8), 2),
                )
            } else {
                continue;
            };
            let c = re.clone() + im.clone() * Complex::new(Rat::zero(), Rat::one());
            let zizbj = Polynomial::var_z(nvars, i).mul(&Polynomial::var_zbar(nvars, j));
            p = p.add(&zizbj.scale(&c));
            if i != j {
                let zjzbi = Polynomial::var_z(nvars, j).mul(&Polynomial::var_zbar(nvars, i));
                p = p.add(&zjzbi.scale(&crat_conj(&c)));
            }
        }
    }
    if with_harmonic {
        for _ in 0..nvars {
            let i = r.gen_range(0..nvars);
            let j = r.gen_range(0..nvars);
            let c = crat_dyadic(r.gen_range(-4..=4), 2);
            let zz = Polynomial::var_z(nvars, i).mul(&Polynomial::var_z(nvars, j));
            p = p.add(&zz.scale(&c));
            p = p.add(&zz.scale(&c).conj());
        }
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn wedge_basics() {
        let n = 4;
        let dz0 = PolyForm::basis_dz(n, 0);
        let dz1 = PolyForm::basis_dz(n, 1);
        let w = dz0.wedge(&dz1);
        assert_eq!(w.coefficient(&[0, 1], &[]).constant_value().unwrap(), crat_one());
        assert!(dz0.wedge(&dz0).is_zero());
        let anti = dz1.wedge(&dz0);
        assert_eq!(
            anti.coefficient(&[0, 1], &[]).constant_value().unwrap(),
            -crat_one()
        );
    }

    #[test]
    fn beta_power_matches_omega() {
        for n in 1..=3usize {
            let nvars = 2 * n;
            let beta = beta_form(nvars);
            let mut acc = beta.clone();
            for _ in 1..n {
                acc = acc.wedge(&beta);
            }
            let mut factorial = crat_one();
            for k in 2..=n as i64 {
                factorial = factorial * crat_int(k);
            }
            let expect = omega_form(nvars).scale(&factorial);
            assert_eq!(acc, expect, "beta^n != n! Omega_n for n = {n}");
        }
    }

    #[test]
    fn d_holo_single_term() {
        let nvars = 2;
        let u = Polynomial::var_z(nvars, 0).mul(&Polynomial::var_zbar(nvars, 0));
        let du = PolyForm::scalar(u).d_holo();
        assert_eq!(du.coefficient(&[0], &[]), Polynomial::var_zbar(nvars, 0));
        assert!(du.coefficient(&[1], &[]).is_zero());
    }

    #[test]
    fn d_anti_single_term() {
        let nvars = 2;
        let u = Polynomial::var_z(nvars, 0).mul(&Polynomial::var_zbar(nvars, 0));
        let du = PolyForm::scalar(u).d_anti();
        assert_eq!(du.coefficient(&[], &[0]), Polynomial::var_z(nvars, 0));
    }

    #[test]
    fn derivative_of_norm_sq() {
        let nvars = 4;
        let u = Polynomial::norm_sq(nvars);
        let d = PolyForm::scalar(u.clone()).d_holo();
        for i in 0..nvars {
            assert_eq!(d.coefficient(&[i as u8], &[]), Polynomial::var_zbar(nvars, i));
        }
        let db = PolyForm::scalar(u).d_anti();
        for i in 0..nvars {
            assert_eq!(db.coefficient(&[], &[i as u8]), Polynomial::var_z(nvars, i));
        }
    }

    #[test]
    fn squares_vanish_on_random_forms() {
        let mut r = rng(21);
        for _ in 0..30 {
            let nvars = 2 * r.gen_range(1..=3usize);
            let u = random_polynomial(nvars, 3, 5, &mut r);
            let s = PolyForm::scalar(u);
            assert!(s.d_holo().d_holo().is_zero());
            assert!(s.d_anti().d_anti().is_zero());
            let one_form = s.d_holo();
            assert!(one_form.d_holo().d_holo().is_zero());
        }
    }

    #[test]
    fn j_on_basis_factors() {
        let nvars = 4;
        let j_dz0 = PolyForm::basis_dz(nvars, 0).j_action();
        assert_eq!(
            j_dz0.coefficient(&[], &[1]).constant_value().unwrap(),
            -crat_one()
        );
        let j_dz1 = PolyForm::basis_dz(nvars, 1).j_action();
        assert_eq!(
            j_dz1.coefficient(&[], &[0]).constant_value().unwrap(),
            crat_one()
        );
        for k in 0..nvars {
            let jj = PolyForm::basis_dz(nvars, k).j_action().j_action();
            assert_eq!(jj, PolyForm::basis_dz(nvars, k).neg(), "J^2 != -1 on dz_{k}");
        }
    }

    #[test]
    fn twist_routes_agree_and_square_to_zero() {
        let mut r = rng(22);
        for _ in 0..40 {
            let nvars = 2 * r.gen_range(1..=3usize);
            let u = random_polynomial(nvars, 3, 5, &mut r);
            let s = PolyForm::scalar(u);
            let a = s.d_twist().unwrap();
            let b = s.d_twist_direct().unwrap();
            assert_eq!(a, b, "twist routes disagree");
            assert!(a.d_twist().unwrap().is_zero(), "twist^2 != 0 on scalars");
            // anticommutation with the holomorphic derivative
            let anti = s
                .d_holo()
                .d_twist()
                .unwrap()
                .add(&s.d_twist().unwrap().d_holo())
                .unwrap();
            assert!(anti.is_zero(), "d d_J + d_J d != 0");
            // and on (1,0) forms
            let one = s.d_holo();
            assert_eq!(one.d_twist().unwrap(), one.d_twist_direct().unwrap());
        }
    }

    #[test]
    fn twist_of_first_quaternionic_norm() {
        // |q_0|^2 = z0 zb0 + z1 zb1 -> -z1 dz0 + z0 dz1
        let nvars = 2;
        let u = Polynomial::norm_sq(nvars);
        let t = PolyForm::scalar(u).d_twist_direct().unwrap();
        assert_eq!(t.coefficient(&[0], &[]), Polynomial::var_z(nvars, 1).neg());
        assert_eq!(t.coefficient(&[1], &[]), Polynomial::var_z(nvars, 0));
    }

    #[test]
    fn twist_rejects_mixed_bidegree() {
        let f = PolyForm::basis_dzbar(2, 0);
        assert!(f.d_twist().is_err());
        assert!(f.d_twist_direct().is_err());
    }

    #[test]
    fn wan_wang_operators_match() {
        let mut r = rng(23);
        for _ in 0..30 {
            let nvars = 2 * r.gen_range(1..=3usize);
            let u = random_polynomial(nvars, 3, 5, &mut r);
            let two_twist = PolyForm::scalar(u.clone())
                .d_twist_direct()
                .unwrap()
                .scale(&crat_int(2));
            assert_eq!(d0_scalar(&u), two_twist, "d_0 != 2 d_J");
            let minus_two_d = PolyForm::scalar(u.clone()).d_holo().scale(&crat_int(-2));
            assert_eq!(d1_scalar(&u), minus_two_d, "d_1 != -2 d");
        }
    }

    #[test]
    fn qma_form_of_norm_sq() {
        // per quaternionic pair: d(-z1 dz0 + z0 dz1) = 2 dz0 ^ dz1
        let nvars = 2;
        let f = qma_form(&Polynomial::norm_sq(nvars));
        assert_eq!(
            f.coefficient(&[0, 1], &[]).constant_value().unwrap(),
            crat_int(2)
        );
        // top power for general n: n! 2^n Omega_n
        for n in 1..=3usize {
            let nvars = 2 * n;
            let p = qma_form_power(&Polynomial::norm_sq(nvars), n).unwrap();
            let top = top_coefficient(&p).unwrap().constant_value().unwrap();
            let mut expect = crat_one();
            for k in 2..=n as i64 {
                expect = expect * crat_int(k);
            }
            expect = expect * crat_int(1i64 << n);
            assert_eq!(top, expect, "n = {n}");
        }
    }

    #[test]
    fn pluriharmonic_part_contributes_nothing() {
        // Re(z0^2) has vanishing mixed second derivatives
        let nvars = 2;
        let z0sq = Polynomial::var_z(nvars, 0).mul(&Polynomial::var_z(nvars, 0));
        let u = z0sq.add(&z0sq.conj());
        assert!(u.is_real());
        assert!(qma_form(&u).is_zero());
    }

    #[test]
    fn qma_form_power_rejects_non_real() {
        let u = Polynomial::var_z(2, 0);
        assert!(matches!(qma_form_power(&u, 1), Err(QmaError::Domain(_))));
    }

    #[test]
    fn quadratic_top_coefficient_matches_moore() {
        let mut r = rng(24);
        for n in 1..=3usize {
            let nvars = 2 * n;
            for _ in 0..20 {
                let u = random_real_quadratic(nvars, true, &mut r);
                let p = qma_form_power(&u, n).unwrap();
                let top = top_coefficient(&p).unwrap().constant_value().unwrap();
                let (g, h) = quat_hessian_quadratic(&u, n).unwrap();
                let moore = moore_det_exact(n, &g, &h).unwrap();
                let mut factor = crat_one();
                for k in 2..=n as i64 {
                    factor = factor * crat_int(k);
                }
                let four_pow = crat_int(1i64 << (2 * n));
                let expect = factor * moore / four_pow;
                assert_eq!(top, expect, "n = {n}");
                assert!(top.im.is_zero(), "top coefficient not real");
            }
        }
    }

    #[test]
    fn exact_moore_matches_float_route() {
        use crate::quat::{moore_det, HyperhermitianMatrix, Quaternion};
        let mut r = rng(25);
        for n in 1..=3usize {
            for _ in 0..10 {
                let u = random_real_quadratic(2 * n, false, &mut r);
                let (g, h) = quat_hessian_quadratic(&u, n).unwrap();
                let exact = moore_det_exact(n, &g, &h).unwrap();
                let (exact_re, exact_im) = crat_to_f64(&exact);
                assert!(exact_im.abs() < 1e-12);
                let entries: Vec<Quaternion> = (0..n * n)
                    .map(|idx| {
                        let (gre, gim) = crat_to_f64(&g[idx]);
                        let (hre, him) = crat_to_f64(&h[idx]);
                        Quaternion::new(gre, gim, hre, -him)
                    })
                    .collect();
                let m = HyperhermitianMatrix::new(n, entries).unwrap();
                let d = moore_det(&m).unwrap();
                assert!(
                    (d - exact_re).abs() <= 1e-9 * exact_re.abs().max(1.0),
                    "float {d} vs exact {exact_re}"
                );
            }
        }
    }

    #[test]
    fn m_prime_vanishes() {
        assert!(verify_m_prime_vanishing(2));
        assert!(verify_m_prime_vanishing(3));
        // dropping one product breaks the cancellation
        let nvars = 4;
        let partial = m_polynomial(nvars, 3, 2)
            .mul(&m_polynomial(nvars, 1, 0))
            .sub(&m_polynomial(nvars, 3, 1).mul(&m_polynomial(nvars, 2, 0)));
        assert!(!partial.is_zero());
    }

    #[test]
    fn real_potential_gives_real_top_coefficient() {
        let mut r = rng(26);
        for _ in 0..10 {
            let n = r.gen_range(1..=2usize);
            let u = random_real_quadratic(2 * n, true, &mut r);
            let p = qma_form_power(&u, n).unwrap();
            let top = top_coefficient(&p).unwrap();
            for (_, c) in top.terms() {
                assert!(c.im.is_zero());
            }
        }
    }
}
