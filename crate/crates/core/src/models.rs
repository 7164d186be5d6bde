//! Closed-form radial test functions with known Monge-Ampere densities.
//!
//! A radial potential `u(q) = g(s)`, `s = |q|^2`, has pointwise density
//!
//! ```text
//! n! 2^{n-1} g'(s)^{n-1} (2 g'(s) + s g''(s))
//! ```
//!
//! against the canonical `(2n,0)` form. This closed form is derived, not
//! quoted, so it is never trusted bare: the log family gives an analytic
//! oracle for every `epsilon > 0`, and finite differences give an
//! independent numeric oracle at arbitrary sample points (both exercised in
//! the test suite; the `verify` runners repeat them).

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{QmaError, Result};
use crate::hessians::{factorial, ScalarField};
use crate::quad;
use crate::quat::{moore_det, HyperhermitianMatrix, Quaternion};

/// Radial profile `g(s)` with first and second derivatives, `s = |q|^2`.
#[derive(Clone)]
pub struct RadialProfile {
    pub n: usize,
    g: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    g1: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    g2: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl RadialProfile {
    pub fn new(
        n: usize,
        g: impl Fn(f64) -> f64 + Send + Sync + 'static,
        g1: impl Fn(f64) -> f64 + Send + Sync + 'static,
        g2: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        RadialProfile { n, g: Arc::new(g), g1: Arc::new(g1), g2: Arc::new(g2) }
    }

    pub fn g(&self, s: f64) -> f64 {
        (self.g)(s)
    }

    pub fn g1(&self, s: f64) -> f64 {
        (self.g1)(s)
    }

    pub fn g2(&self, s: f64) -> f64 {
        (self.g2)(s)
    }

    /// The potential as a scalar field on `R^{4n}`.
    pub fn to_field(&self) -> ScalarField {
        let g = self.g.clone();
        ScalarField::new(self.n, move |x| g(x.iter().map(|v| v * v).sum()))
    }
}

/// Pointwise Monge-Ampere density of a radial potential at `s > 0`.
pub fn radial_qma_density(prof: &RadialProfile, s: f64) -> Result<f64> {
    if s <= 0.0 {
        return Err(QmaError::Domain(format!("radial density needs s > 0, got {s}")));
    }
    let n = prof.n;
    let g1 = prof.g1(s);
    let g2 = prof.g2(s);
    Ok(factorial(n) * 2f64.powi(n as i32 - 1) * g1.powi(n as i32 - 1) * (2.0 * g1 + s * g2))
}

/// Surface area of the unit sphere in `R^d` for even `d = 2m`:
/// `2 pi^m / (m-1)!`.
pub fn sphere_area(d: usize) -> f64 {
    assert!(d % 2 == 0, "only even dimensions arise here");
    let m = d / 2;
    2.0 * PI.powi(m as i32) / factorial(m - 1)
}

/// Integrates a radial density over the ball of radius `R` in `R^{4n}`
/// against Lebesgue measure: `(pi^{2n}/(2n-1)!) \int_0^{R^2} f(s) s^{2n-1} ds`.
pub fn radial_mass(n: usize, f: impl Fn(f64) -> f64, radius: f64, tol: f64) -> f64 {
    let weight = PI.powi(2 * n as i32) / factorial(2 * n - 1);
    let integrand = |s: f64| f(s) * s.powi(2 * n as i32 - 1);
    weight * quad::integrate(integrand, 0.0, radius * radius, tol)
}

/// Total Monge-Ampere mass of the mollified fundamental solution
/// `-1/(s + delta)` over the ball of radius `R`; converges to
/// `2^n pi^{2n} n! / (2n)!` as `delta -> 0`.
pub fn fundamental_mass(n: usize, delta: f64, radius: f64) -> Result<f64> {
    if delta <= 0.0 || radius <= 0.0 {
        return Err(QmaError::Domain("delta and radius must be positive".into()));
    }
    let density = move |s: f64| {
        factorial(n) * 2f64.powi(n as i32) * delta / (s + delta).powi(2 * n as i32 + 1)
    };
    Ok(radial_mass(n, density, radius, 1e-12))
}

/// The limiting point-mass weight `2^n pi^{2n} n! / (2n)!`.
pub fn fundamental_constant(n: usize) -> f64 {
    2f64.powi(n as i32) * PI.powi(2 * n as i32) * factorial(n) / factorial(2 * n)
}

/// A named model potential with whatever exact structure it carries.
#[derive(Clone)]
pub struct ModelFunction {
    pub name: String,
    /// Quaternionic dimension of the ambient space.
    pub n: usize,
    /// Real dimension carrying the radial structure: `4n` for fully radial
    /// models, `4` for the first-coordinate family.
    pub radial_dim: usize,
    pub field: ScalarField,
    pub profile: Option<RadialProfile>,
    /// Exact radial density as a function of `s`, when known in closed form.
    pub exact_density: Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>>,
    /// Exact total mass over any ball around the origin, when finite and known.
    pub exact_mass: Option<f64>,
    /// Whether the model claims plurisubharmonicity away from its singular set.
    pub qpsh: bool,
    pub singular_at_origin: bool,
}

/// `|q|^2`; density is the constant `n! 2^n`.
pub fn sqnorm_model(n: usize) -> ModelFunction {
    let prof = RadialProfile::new(n, |s| s, |_| 1.0, |_| 0.0);
    let d = factorial(n) * 2f64.powi(n as i32);
    ModelFunction {
        name: "sqnorm".into(),
        n,
        radial_dim: 4 * n,
        field: prof.to_field(),
        profile: Some(prof),
        exact_density: Some(Arc::new(move |_| d)),
        exact_mass: None,
        qpsh: true,
        singular_at_origin: false,
    }
}

/// `log|q| = (1/2) log s`; density `n! / (2 s^n)`, integrable but unbounded.
pub fn lognorm_model(n: usize) -> ModelFunction {
    let prof = RadialProfile::new(
        n,
        |s| 0.5 * s.ln(),
        |s| 0.5 / s,
        |s| -0.5 / (s * s),
    );
    let nf = factorial(n);
    ModelFunction {
        name: "lognorm".into(),
        n,
        radial_dim: 4 * n,
        field: prof.to_field(),
        profile: Some(prof),
        exact_density: Some(Arc::new(move |s: f64| nf / (2.0 * s.powi(n as i32)))),
        exact_mass: None,
        qpsh: true,
        singular_at_origin: true,
    }
}

/// `f_eps = (1/2) log(s + eps)`; smooth and strictly plurisubharmonic with
/// density `n! (s + 2 eps) / (2 (s + eps)^{n+1})`.
pub fn feps_model(n: usize, eps: f64) -> Result<ModelFunction> {
    if eps <= 0.0 {
        return Err(QmaError::Domain(format!("eps must be positive, got {eps}")));
    }
    let prof = RadialProfile::new(
        n,
        move |s| 0.5 * (s + eps).ln(),
        move |s| 0.5 / (s + eps),
        move |s| -0.5 / ((s + eps) * (s + eps)),
    );
    let nf = factorial(n);
    Ok(ModelFunction {
        name: format!("feps:{eps}"),
        n,
        radial_dim: 4 * n,
        field: prof.to_field(),
        profile: Some(prof),
        exact_density: Some(Arc::new(move |s: f64| {
            nf * (s + 2.0 * eps) / (2.0 * (s + eps).powi(n as i32 + 1))
        })),
        exact_mass: None,
        qpsh: true,
        singular_at_origin: false,
    })
}

/// `-1/(s + delta)`; for `delta = 0` this is the fundamental solution with a
/// point mass at the origin, for `delta > 0` a smooth mollification with
/// density `n! 2^n delta / (s + delta)^{2n+1}`.
pub fn neginv_model(n: usize, delta: f64) -> Result<ModelFunction> {
    if delta < 0.0 {
        return Err(QmaError::Domain(format!("delta must be non-negative, got {delta}")));
    }
    let prof = RadialProfile::new(
        n,
        move |s| -1.0 / (s + delta),
        move |s| 1.0 / (s + delta).powi(2),
        move |s| -2.0 / (s + delta).powi(3),
    );
    let nf = factorial(n);
    Ok(ModelFunction {
        name: format!("neginv:{delta}"),
        n,
        radial_dim: 4 * n,
        field: prof.to_field(),
        profile: Some(prof),
        exact_density: Some(Arc::new(move |s: f64| {
            nf * 2f64.powi(n as i32) * delta / (s + delta).powi(2 * n as i32 + 1)
        })),
        exact_mass: if delta == 0.0 { Some(fundamental_constant(n)) } else { None },
        qpsh: true,
        singular_at_origin: delta == 0.0,
    })
}

/// `-1/|q_0|^2` on `H^n`: a function of the first quaternionic coordinate
/// only, singular along a codimension-4 subspace; the sharp example for the
/// `L^p`, `p < 2` local integrability threshold.
pub fn q0_neginv_model(n: usize) -> ModelFunction {
    let prof = RadialProfile::new(
        1,
        |s| -1.0 / s,
        |s| 1.0 / (s * s),
        |s| -2.0 / (s * s * s),
    );
    ModelFunction {
        name: "q0neginv".into(),
        n,
        radial_dim: 4,
        field: ScalarField::new(n, |x| {
            let s: f64 = x[..4].iter().map(|v| v * v).sum();
            -1.0 / s
        }),
        profile: Some(prof),
        exact_density: None,
        exact_mass: None,
        qpsh: true,
        singular_at_origin: true,
    }
}

/// Random plurisubharmonic quadratic `sum A_ab z_a zb_b` with Hermitian
/// positive semidefinite `A = W^H W`; constant exact density.
pub fn psh_quadratic_model(n: usize, seed: u64) -> ModelFunction {
    use nalgebra::DMatrix;
    use num::complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let m = 2 * n;
    let w = DMatrix::from_fn(m, m, |_, _| {
        Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))
    });
    let a = w.adjoint() * &w;

    // constant quaternionic Hessian via the complex-route assembly
    let mut entries = vec![Quaternion::ZERO; n * n];
    for l in 0..n {
        for k in 0..n {
            let ga = 4.0 * (a[(2 * k, 2 * l)] + a[(2 * l + 1, 2 * k + 1)]);
            let hb = 4.0 * (a[(2 * k, 2 * l + 1)] - a[(2 * l, 2 * k + 1)]);
            entries[l * n + k] = Quaternion::new(ga.re, ga.im, hb.re, -hb.im);
        }
    }
    let hess = HyperhermitianMatrix::symmetrized(n, &entries).expect("assembled Hessian");
    let density = factorial(n) / 4f64.powi(n as i32) * moore_det(&hess).expect("constant Moore determinant");

    let field = ScalarField::new(n, move |x| {
        let z = crate::hessians::to_complex_chart(x);
        let mut acc = Complex64::new(0.0, 0.0);
        for p in 0..z.len() {
            for q in 0..z.len() {
                acc += a[(p, q)] * z[p] * z[q].conj();
            }
        }
        acc.re
    });
    ModelFunction {
        name: format!("pshquad:{seed}"),
        n,
        radial_dim: 4 * n,
        field,
        profile: None,
        exact_density: Some(Arc::new(move |_| density)),
        exact_mass: None,
        qpsh: true,
        singular_at_origin: false,
    }
}

/// The default catalog at dimension `n`.
pub fn model_catalog(n: usize) -> Vec<ModelFunction> {
    vec![
        sqnorm_model(n),
        lognorm_model(n),
        feps_model(n, 1.0).unwrap(),
        feps_model(n, 0.1).unwrap(),
        feps_model(n, 0.01).unwrap(),
        neginv_model(n, 0.01).unwrap(),
        neginv_model(n, 0.0).unwrap(),
        q0_neginv_model(n),
        psh_quadratic_model(n, 7),
    ]
}

/// Resolves `name` or `name:param` to a model, e.g. `feps:0.1`,
/// `neginv:0.001`, `sqnorm`, `q0neginv`, `pshquad:42`.
pub fn model_by_name(spec: &str, n: usize) -> Result<ModelFunction> {
    let (name, param) = match spec.split_once(':') {
        Some((a, b)) => (a, Some(b)),
        None => (spec, None),
    };
    let parse = |p: Option<&str>, what: &str| -> Result<f64> {
        let raw = p.ok_or_else(|| QmaError::Parse(format!("model `{name}` requires `{name}:<{what}>`")))?;
        raw.parse::<f64>().map_err(|_| QmaError::Parse(format!("bad {what} `{raw}` in model `{spec}`")))
    };
    match name {
        "sqnorm" => Ok(sqnorm_model(n)),
        "lognorm" => Ok(lognorm_model(n)),
        "feps" => feps_model(n, parse(param, "eps")?),
        "neginv" => neginv_model(n, parse(param, "delta")?),
        "q0neginv" => Ok(q0_neginv_model(n)),
        "pshquad" => {
            let seed = param
                .unwrap_or("7")
                .parse::<u64>()
                .map_err(|_| QmaError::Parse(format!("bad seed in model `{spec}`")))?;
            Ok(psh_quadratic_model(n, seed))
        }
        _ => Err(QmaError::Parse(format!("unknown model `{spec}`"))),
    }
}
