//! Acceptance suite: one test per criterion, each printing a single
//! PASS/FAIL line (visible with `--nocapture`).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;
use std::time::Instant;

use qma::forms::{
    self, crat_int, crat_one, moore_det_exact, qma_form_power, quat_hessian_quadratic,
    random_real_quadratic, top_coefficient,
};
use qma::hessians::{
    cpr_check, factorial, quat_hessian_direct, quat_hessian_via_complex, FdConfig, ScalarField,
};
use qma::models::{feps_model, fundamental_constant, model_by_name, radial_qma_density};
use qma::solver::grid::{grid_vs_radial_sup, solve_grid_n1, GridProblem};
use qma::solver::{
    de_giorgi_bound, solve_radial, stability_experiment, DeGiorgiInput, RadialProblem,
};
use qma::verify::{self, run_integrability, Classification};
use qma::quat;

struct Criterion {
    index: usize,
    label: &'static str,
}

impl Criterion {
    fn new(index: usize, label: &'static str) -> Self {
        Criterion { index, label }
    }

    fn pass(&self, detail: impl std::fmt::Display) {
        println!("[criterion {:02}] PASS {}: {}", self.index, self.label, detail);
    }

    fn fail(&self, detail: impl std::fmt::Display) -> ! {
        println!("[criterion {:02}] FAIL {}: {}", self.index, self.label, detail);
        panic!("criterion {:02} ({}) failed: {}", self.index, self.label, detail);
    }
}

#[test]
fn criterion_01_moore_pfaffian_identity() {
    let c = Criterion::new(1, "moore/pfaffian identity");
    let start = Instant::now();
    let mut r = ChaCha8Rng::seed_from_u64(1001);
    let mut worst_sq = 0.0f64;
    let mut worst_gap = 0.0f64;
    for _ in 0..1000 {
        let n = r.gen_range(1..=4usize);
        let m = quat::random_hyperhermitian(n, &mut r);
        let det = match quat::moore_det_pfaffian(&m) {
            Ok(v) => v,
            Err(e) => c.fail(e),
        };
        let psi_det = m.psi().lu().determinant().re;
        worst_sq = worst_sq.max((det * det - psi_det).abs() / psi_det.abs().max(1.0));
        match quat::moore_det_eigen(&m) {
            Ok(e) => worst_gap = worst_gap.max((det - e).abs() / det.abs().max(1.0)),
            Err(e) => c.fail(e),
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    if worst_sq >= 1e-10 || worst_gap >= 1e-10 {
        c.fail(format!("squared defect {worst_sq:.3e}, route gap {worst_gap:.3e}"));
    }
    if elapsed >= 10.0 {
        c.fail(format!("runtime {elapsed:.1} s exceeds 10 s"));
    }
    c.pass(format!(
        "1000 matrices n <= 4: squared defect {worst_sq:.3e}, route gap {worst_gap:.3e}, {elapsed:.2} s"
    ));
}

#[test]
fn criterion_02_operator_identities() {
    let c = Criterion::new(2, "operator identities");
    let start = Instant::now();
    let mut r = ChaCha8Rng::seed_from_u64(1002);
    for i in 0..200 {
        let nvars = 2 * r.gen_range(1..=3usize);
        let u = forms::random_polynomial(nvars, 3, 6, &mut r);
        let s = forms::PolyForm::scalar(u.clone());
        let t = s.d_twist().unwrap();
        if t != s.d_twist_direct().unwrap() {
            c.fail(format!("twist implementations differ on sample {i}: {u}"));
        }
        if !t.d_twist().unwrap().is_zero() {
            c.fail(format!("twist square nonzero on sample {i}: {u}"));
        }
        let anti = s.d_holo().d_twist().unwrap().add(&t.d_holo()).unwrap();
        if !anti.is_zero() {
            c.fail(format!("anticommutator nonzero on sample {i}: {u}"));
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    if elapsed >= 30.0 {
        c.fail(format!("runtime {elapsed:.1} s exceeds 30 s"));
    }
    c.pass(format!("200 forms n <= 3 degree <= 3, all identities exact, {elapsed:.2} s"));
}

#[test]
fn criterion_03_moore_form_identity() {
    let c = Criterion::new(3, "moore-determinant form identity");
    let start = Instant::now();
    let mut r = ChaCha8Rng::seed_from_u64(1003);
    for n in 1..=3usize {
        for i in 0..100 {
            let u = random_real_quadratic(2 * n, true, &mut r);
            let top = top_coefficient(&qma_form_power(&u, n).unwrap())
                .unwrap()
                .constant_value()
                .unwrap();
            let (g, h) = quat_hessian_quadratic(&u, n).unwrap();
            let moore = moore_det_exact(n, &g, &h).unwrap();
            let mut fact = crat_one();
            for k in 2..=n as i64 {
                fact = fact * crat_int(k);
            }
            let expect = fact * moore / crat_int(1i64 << (2 * n));
            if top != expect {
                c.fail(format!("exact mismatch at n={n}, sample {i}"));
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    if elapsed >= 60.0 {
        c.fail(format!("runtime {elapsed:.1} s exceeds 60 s"));
    }
    c.pass(format!("100 quadratics per n in {{1,2,3}}, exact rational equality, {elapsed:.2} s"));
}

#[test]
fn criterion_04_quaternionic_complex_hessians() {
    let c = Criterion::new(4, "quaternionic-complex Hessian lemma");
    let cfg = FdConfig::default();
    let mut r = ChaCha8Rng::seed_from_u64(1004);
    // quadratics: route agreement at h = 1e-3
    let mut worst = 0.0f64;
    for _ in 0..60 {
        let n = r.gen_range(1..=3usize);
        let m = qma::models::psh_quadratic_model(n, r.gen());
        let p: Vec<f64> = (0..4 * n).map(|_| r.gen_range(-1.0..1.0f64)).collect();
        let a = quat_hessian_direct(&m.field, &p, &cfg).unwrap();
        let b = quat_hessian_via_complex(&m.field, &p, &cfg).unwrap();
        for l in 0..n {
            for k in 0..n {
                worst = worst.max((a.get(l, k) - b.get(l, k)).norm());
            }
        }
    }
    if worst >= 1e-9 {
        c.fail(format!("quadratic route gap {worst:.3e} >= 1e-9"));
    }
    // quartics: observed finite-difference order 2 +/- 0.3 against a
    // near-exact reference at h/8
    let n = 2usize;
    let field = ScalarField::new(n, |x: &[f64]| {
        let s: f64 = x.iter().map(|v| v * v).sum();
        s * s + 0.3 * x[0] * x[1] * x[2] * x[3]
    });
    let p: Vec<f64> = (0..4 * n).map(|i| 0.21 + 0.07 * i as f64).collect();
    let reference = quat_hessian_direct(&field, &p, &FdConfig::with_step(1.25e-4).unwrap()).unwrap();
    let err_at = |h: f64| -> f64 {
        let m = quat_hessian_direct(&field, &p, &FdConfig::with_step(h).unwrap()).unwrap();
        let mut e = 0.0f64;
        for l in 0..n {
            for k in 0..n {
                e = e.max((m.get(l, k) - reference.get(l, k)).norm());
            }
        }
        e
    };
    let order = (err_at(1e-3) / err_at(5e-4)).log2();
    if (order - 2.0).abs() > 0.3 {
        c.fail(format!("observed order {order:.3} outside 2 +/- 0.3"));
    }
    c.pass(format!("quadratic route gap {worst:.3e}, quartic order {order:.3}"));
}

#[test]
fn criterion_05_cpr_inequality() {
    let c = Criterion::new(5, "Moore vs complex determinant inequality");
    let cfg = FdConfig::default();
    let mut r = ChaCha8Rng::seed_from_u64(1005);
    let mut total = 0usize;
    for n in 1..=3usize {
        for _ in 0..1000 {
            let m = qma::models::psh_quadratic_model(n, r.gen());
            let p: Vec<f64> = (0..4 * n).map(|_| r.gen_range(-1.0..1.0f64)).collect();
            match cpr_check(&m.field, &p, &cfg) {
                Ok(chk) if chk.holds => total += 1,
                Ok(chk) => c.fail(format!("violated at n={n}: lhs {} < rhs {}", chk.lhs, chk.rhs)),
                Err(e) => c.fail(e),
            }
        }
    }
    c.pass(format!("{total} plurisubharmonic quadratics (1000 per n in {{1,2,3}}), zero violations"));
}

#[test]
fn criterion_06_m_prime_vanishing() {
    let c = Criterion::new(6, "minor-combination vanishing");
    for n in 2..=3usize {
        if !forms::verify_m_prime_vanishing(n) {
            c.fail(format!("a quadruple combination is nonzero at n={n}"));
        }
    }
    c.pass("all admissible index quadruples expand to zero exactly, n in {2,3}");
}

#[test]
fn criterion_07_model_density_formula() {
    let c = Criterion::new(7, "mollified log-model density");
    let cfg = FdConfig::default();
    let mut r = ChaCha8Rng::seed_from_u64(1007);
    let mut worst_an = 0.0f64;
    let mut worst_fd = 0.0f64;
    for n in 1..=3usize {
        for eps in [1.0, 0.1, 0.01] {
            let model = feps_model(n, eps).unwrap();
            let prof = model.profile.as_ref().unwrap();
            for i in 1..=50 {
                let s = i as f64 / 50.0;
                let analytic = factorial(n) * (s + 2.0 * eps) / (2.0 * (s + eps).powi(n as i32 + 1));
                let got = radial_qma_density(prof, s).unwrap();
                worst_an = worst_an.max((got - analytic).abs() / analytic);
            }
            // finite-difference oracle at a few sample points (C * h^2 scale)
            for _ in 0..5 {
                let dir: Vec<f64> = (0..4 * n).map(|_| r.gen_range(-1.0..1.0f64)).collect();
                let norm: f64 = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
                let radius = r.gen_range(0.4..1.0);
                let p: Vec<f64> = dir.iter().map(|v| v * radius / norm).collect();
                let exact = radial_qma_density(prof, radius * radius).unwrap();
                let fd = qma::hessians::qma_density(&model.field, &p, &cfg).unwrap();
                worst_fd = worst_fd.max((fd - exact).abs() / exact.abs().max(1e-3));
            }
        }
    }
    if worst_an >= 1e-12 {
        c.fail(format!("analytic density mismatch {worst_an:.3e}"));
    }
    if worst_fd >= 1e-2 {
        c.fail(format!("finite-difference oracle gap {worst_fd:.3e} not O(h^2)"));
    }
    c.pass(format!(
        "analytic agreement {worst_an:.1e}, FD oracle gap {worst_fd:.1e} for eps in {{1, 0.1, 0.01}}, n in {{1,2,3}}"
    ));
}

#[test]
fn criterion_08_fundamental_mass() {
    let c = Criterion::new(8, "fundamental-solution mass");
    let start = Instant::now();
    for (n, tol) in [(1usize, 1e-3), (2, 5e-3)] {
        let target = fundamental_constant(n);
        let (mass, _) = verify::extrapolate_fundamental(n, 6, 1.0);
        let rel = (mass - target).abs() / target;
        if rel >= tol {
            c.fail(format!("n={n}: extrapolated {mass:.9} vs {target:.9}, rel {rel:.2e}"));
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    if elapsed >= 60.0 {
        c.fail(format!("runtime {elapsed:.1} s exceeds 60 s"));
    }
    c.pass(format!(
        "within 0.1% of pi^2 (n=1) and 0.5% of pi^4/3 (n=2), {elapsed:.2} s"
    ));
}

#[test]
fn criterion_09_manufactured_dirichlet_solutions() {
    let c = Criterion::new(9, "manufactured Dirichlet solutions");
    let start = Instant::now();
    let eps = 0.1f64;
    // radial recovery for n in 1..=4
    let mut worst = 0.0f64;
    for n in 1..=4usize {
        let model = feps_model(n, eps).unwrap();
        let f = model.exact_density.as_ref().unwrap().clone();
        let sol =
            solve_radial(&RadialProblem::new(n, 1.0, move |s| f(s), 0.5 * (1.0f64 + eps).ln()))
                .unwrap();
        for i in 0..=200 {
            let s = i as f64 / 200.0;
            worst = worst.max((sol.profile.g(s) - 0.5 * (s + eps).ln()).abs());
        }
    }
    if worst >= 1e-6 {
        c.fail(format!("radial sup error {worst:.3e} >= 1e-6"));
    }
    // grid solver vs radial solver, order 2 under h -> h/2 up to a 65^4 grid
    let model = feps_model(1, eps).unwrap();
    let prof = Arc::new(model.profile.clone().unwrap());
    let f = model.exact_density.as_ref().unwrap().clone();
    let boundary = prof.g(1.0);
    let mut errs = Vec::new();
    for steps in [16usize, 32, 64] {
        let h = 2.0 / steps as f64;
        let ff = f.clone();
        let sol = solve_grid_n1(&GridProblem::new(
            1.0,
            h,
            move |x: &[f64; 4]| ff(x.iter().map(|v| v * v).sum()),
            move |_: &[f64; 4]| boundary,
        ))
        .unwrap();
        errs.push(grid_vs_radial_sup(&sol, &prof, 1.0, 1.0));
    }
    let o1 = (errs[0] / errs[1]).log2();
    let o2 = (errs[1] / errs[2]).log2();
    let elapsed = start.elapsed().as_secs_f64();
    if (o1 - 2.0).abs() > 0.5 || (o2 - 2.0).abs() > 0.5 {
        c.fail(format!("grid orders {o1:.2}, {o2:.2} not 2 +/- 0.5 (errors {errs:?})"));
    }
    if elapsed >= 600.0 {
        c.fail(format!("runtime {elapsed:.1} s exceeds 10 min"));
    }
    c.pass(format!(
        "radial sup error {worst:.1e} (n <= 4); grid orders {o1:.2}, {o2:.2} up to 65^4, {elapsed:.1} s"
    ));
}

#[test]
fn criterion_10_comparison_principle() {
    let c = Criterion::new(10, "radial comparison principle");
    let mut r = ChaCha8Rng::seed_from_u64(1010);
    for pair in 0..50 {
        let n = r.gen_range(1..=2usize);
        let a = r.gen_range(0.1..1.5f64);
        let b = r.gen_range(0.0..1.0f64);
        let extra_c = r.gen_range(0.05..1.0f64);
        let extra_d = r.gen_range(0.0..1.0f64);
        let f1 = move |s: f64| a + b * s;
        let f2 = move |s: f64| a + b * s + extra_c + extra_d * s;
        let u1 = solve_radial(&RadialProblem::new(n, 1.0, f1, 0.25)).unwrap();
        let u2 = solve_radial(&RadialProblem::new(n, 1.0, f2, 0.25)).unwrap();
        for i in 0..=64 {
            let s = i as f64 / 64.0;
            if u1.profile.g(s) < u2.profile.g(s) - 1e-10 {
                c.fail(format!("monotonicity violated on pair {pair} at s={s}"));
            }
        }
    }
    c.pass("f1 <= f2 implies u1 >= u2 on 50 seeded density pairs, zero violations");
}

#[test]
fn criterion_11_stability() {
    let c = Criterion::new(11, "stability under density perturbations");
    let n = 1usize;
    let model = feps_model(n, 0.5).unwrap();
    let f0 = model.exact_density.as_ref().unwrap().clone();
    let mut c_hats = Vec::new();
    let mut sups = Vec::new();
    for t in [1e-1, 1e-2, 1e-3] {
        let fa = f0.clone();
        let fb = f0.clone();
        let rep = stability_experiment(
            n,
            1.0,
            move |s| (1.0 + t) * fa(s),
            move |s| fb(s),
            0.0,
            0.0,
            3.0,
        )
        .unwrap();
        c_hats.push(rep.c_hat);
        sups.push(rep.sup_diff);
    }
    let (lo, hi) = c_hats.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &v| (l.min(v), h.max(v)));
    if hi / lo >= 10.0 {
        c.fail(format!("empirical constant ratio {:.2} >= 10", hi / lo));
    }
    if !(sups[0] > sups[1] && sups[1] > sups[2]) {
        c.fail(format!("sup|u - v| not decreasing: {sups:?}"));
    }
    // pure boundary perturbation: sup difference equals the boundary gap
    let fa = f0.clone();
    let fb = f0.clone();
    let rep = stability_experiment(n, 1.0, move |s| fa(s), move |s| fb(s), 0.3, 0.0, 3.0).unwrap();
    if (rep.sup_diff - 0.3).abs() >= 1e-9 {
        c.fail(format!("pure-boundary sup diff {} != 0.3", rep.sup_diff));
    }
    c.pass(format!(
        "constant ratio {:.2} < 10, sup differences {:?} decreasing, boundary case exact",
        hi / lo,
        sups.iter().map(|v| format!("{v:.1e}")).collect::<Vec<_>>()
    ));
}

#[test]
fn criterion_12_integrability_thresholds() {
    let c = Criterion::new(12, "integrability thresholds");
    let start = Instant::now();
    for n in 1..=2usize {
        let q0 = model_by_name("q0neginv", n).unwrap();
        let full = model_by_name("neginv:0", n).unwrap();
        let pc = 2.0 * n as f64;
        let cases = [
            (&q0, 1.9, Classification::Convergent),
            (&q0, 2.1, Classification::Divergent),
            (&full, pc - 0.1, Classification::Convergent),
            (&full, pc + 0.1, Classification::Divergent),
        ];
        for (model, p, want) in cases {
            let got = run_integrability(model, p, 12).unwrap().classification;
            if got != want {
                c.fail(format!("{} at p={p}, n={n}: got {got}, want {want}", model.name));
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    if elapsed >= 60.0 {
        c.fail(format!("runtime {elapsed:.1} s exceeds 60 s"));
    }
    c.pass(format!("all eight threshold classifications correct for n in {{1,2}}, {elapsed:.2} s"));
}

#[test]
fn criterion_13_de_giorgi_bound() {
    let c = Criterion::new(13, "De Giorgi extinction bound");
    let s_inf =
        de_giorgi_bound(&DeGiorgiInput { alpha: 1.0, a_alpha: 1.0, s0: 0.0, f_s0: 0.5 }).unwrap();
    if (s_inf - 2.0).abs() >= 1e-14 {
        c.fail(format!("hand substitution gives 2, got {s_inf}"));
    }
    // synthetic recursion f(s_k) = f0 * 2^{-k}, s_{k+1} = s_k + 2 A f(s_k)^alpha:
    // levels stay below s_inf and the mass is exhausted there
    for (alpha, a, f0, s0) in [(1.0, 1.0, 0.5, 0.0), (0.7, 0.8, 0.4, 1.0), (2.0, 1.3, 0.3, 0.25)] {
        let bound =
            de_giorgi_bound(&DeGiorgiInput { alpha, a_alpha: a, s0, f_s0: f0 }).unwrap();
        let mut s = s0;
        let mut level = f0;
        for k in 0..200 {
            if s > bound + 1e-12 {
                c.fail(format!("level {k} exceeds the bound: s={s} > {bound}"));
            }
            s += 2.0 * a * level.powf(alpha);
            level *= 0.5;
        }
        // the geometric sum 2A f0^a sum_k 2^{-k a} closes exactly at the bound
        if (s - bound).abs() >= 1e-12 {
            c.fail(format!("recursion limit {s} != bound {bound} at alpha={alpha}"));
        }
    }
    c.pass("formula matches hand substitution and the synthetic recursion is exhausted at s_inf");
}
