//! One pass/fail line per acceptance criterion.

use std::time::{Duration, Instant};

use cpskit::cli::run;
use cpskit::format::DecompositionFile;
use cpskit_core::apps::{bec_build, cauchy_build, mass_spring, overdamping_bound, qep_tensor};
use cpskit_core::completion::{fpc_complete, sample_mask, FpcParams, SampleMask};
use cpskit_core::decompose::{
    cp_rank_bounds, cps_decompose, extended_pairs, matrix_decomposition, matrix_rank, real_cps_grouped,
    real_partial_symmetric,
};
use cpskit_core::linalg::{dot_c, real_sym_eig};
use cpskit_core::psd::{
    cone_report, general_psd, grad_quartic, matrix_psd, vector_psd, ConeReport, Field, PsdStatus, PsdVerdict,
    SearchOptions, Witness,
};
use cpskit_core::random::{random_cps, random_low_rank, unit_vector};
use cpskit_core::{CpsTensor, Mat, SymmetryMode, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-10;

struct Outcome {
    checks: Vec<(String, bool)>,
}

impl Outcome {
    fn new() -> Self {
        Outcome { checks: Vec::new() }
    }

    fn check(&mut self, what: impl Into<String>, ok: bool) {
        self.checks.push((what.into(), ok));
    }

    fn passed(&self) -> bool {
        self.checks.iter().all(|(_, ok)| *ok)
    }

    fn summary(&self) -> String {
        let failed: Vec<&str> = self.checks.iter().filter(|(_, ok)| !ok).map(|(s, _)| s.as_str()).collect();
        if failed.is_empty() {
            format!("{} checks", self.checks.len())
        } else {
            format!("failed: {}", failed.join("; "))
        }
    }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn rel_close(got: f64, want: f64, tol: f64) -> bool {
    (got - want).abs() <= tol * want.abs()
}

fn cli(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut argv = vec!["cpskit"];
    argv.extend_from_slice(args);
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap())
}

fn bec_example() -> Outcome {
    let mut o = Outcome::new();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("A.json");
    let p = path.to_str().unwrap();
    let start = Instant::now();
    assert_eq!(cli(&["gen", "bec", "--n", "4", "-o", p]).0, 0);
    let (code, text) = cli(&["decompose", "matrix", p, "--json"]);
    assert_eq!(code, 0);
    let dec: DecompositionFile = serde_json::from_str(&text).unwrap();
    let DecompositionFile::Matrix { terms, .. } = &dec else { panic!("matrix decomposition expected") };
    let lambdas: Vec<f64> = terms.iter().map(|t| t.lambda).collect();
    let want = [218.7885, -16.3885];
    let lambda_ok = lambdas.len() == 2 && want.iter().all(|&w| lambdas.iter().any(|&l| rel_close(l, w, 1e-3)));
    o.check(format!("lambda {lambdas:?} vs {want:?}"), lambda_ok);

    let e1 = Mat::from_fn(4, 4, |i, j| terms[0].e[i][j][0]);
    let mut ev = real_sym_eig(&e1).unwrap().values;
    if ev.iter().sum::<f64>() < 0.0 {
        ev.iter_mut().for_each(|v| *v = -*v);
    }
    ev.sort_by(f64::total_cmp);
    let mut want_e1 = [0.6579, 0.5486, 0.3110, 0.4115];
    want_e1.sort_by(f64::total_cmp);
    let e1_ok = ev.iter().zip(&want_e1).all(|(a, b)| (a - b).abs() <= 1e-3);
    o.check(format!("E1 spectrum {ev:?} vs {want_e1:?}"), e1_ok);

    let a = bec_build(4, 0.0).unwrap().a;
    o.check("matrix rank 2", matrix_rank(&a, TOL).unwrap() == 2);
    let b = cp_rank_bounds(&a, TOL).unwrap();
    o.check(format!("cp bounds [{}, {}] = [16, 16]", b.cp_lower, b.cp_upper), b.cp_lower == 16 && b.cp_upper == 16);
    o.check("runtime < 1 s", start.elapsed() < Duration::from_secs(1));
    o
}

fn qep_example() -> Outcome {
    let mut o = Outcome::new();
    let start = Instant::now();
    let sys = mass_spring(50, 10.0, 6.0).unwrap();
    let a = qep_tensor(&sys).unwrap();
    let r = overdamping_bound(&a, Some(&sys)).unwrap();
    let has = |w: f64| r.lambdas.iter().any(|&l| rel_close(l, w, 1e-2));
    o.check(format!("lambdas {:?}", r.lambdas), r.lambdas.len() == 2 && has(-13.7775) && has(51214.0));
    o.check(format!("certified bound {}", r.certified_bound), rel_close(r.certified_bound, 76.6691, 1e-2));
    o.check("overdamped", r.overdamped);
    let naive = r.naive_bound.unwrap();
    o.check(format!("naive bound {naive}"), rel_close(naive, -19.1489, 1e-2));
    o.check("matrix PSD fails", matrix_psd(&a, TOL).unwrap().status == PsdStatus::NotPsd);
    o.check("runtime < 2 min", start.elapsed() < Duration::from_secs(120));
    o
}

fn basis_tensor() -> Outcome {
    let mut o = Outcome::new();
    let e = CpsTensor::basis(2, [1, 1, 2, 2], c(1.0, 0.0)).unwrap();
    let dec = cps_decompose(&e, TOL).unwrap();
    o.check(format!("{} terms", dec.terms.len()), dec.terms.len() == 4);
    let back = dec.assemble().unwrap();
    o.check("reassembly", back.sub(&e).unwrap().frob_norm() <= 1e-12);

    // ¼[(e1+e2)⁴ + (e1−e2)⁴ − (e1+ie2)²⊗(e1−ie2)² − (e1−ie2)²⊗(e1+ie2)²]
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let expected = [
        (1.0, [c(s, 0.0), c(s, 0.0)]),
        (1.0, [c(s, 0.0), c(-s, 0.0)]),
        (-1.0, [c(s, 0.0), c(0.0, s)]),
        (-1.0, [c(s, 0.0), c(0.0, -s)]),
    ];
    let mut used = [false; 4];
    let mut matched = 0;
    for t in &dec.terms {
        let scale = dot_c(&t.a, &t.a).re;
        let w = t.lambda * scale * scale;
        let unit: Vec<C64> = t.a.iter().map(|z| z / scale.sqrt()).collect();
        if let Some(k) = (0..4).find(|&k| {
            !used[k] && (w - expected[k].0).abs() < 1e-10 && (dot_c(&expected[k].1, &unit).norm() - 1.0).abs() < 1e-10
        }) {
            used[k] = true;
            matched += 1;
        }
    }
    o.check("term set matches the basis decomposition", matched == 4);
    let e1111 = CpsTensor::basis(2, [1, 1, 1, 1], c(1.0, 0.0)).unwrap();
    o.check("E1111 has one term", cps_decompose(&e1111, TOL).unwrap().terms.len() == 1);
    o
}

fn entries(list: &[([usize; 4], C64)]) -> CpsTensor {
    CpsTensor::from_entries(2, list, SymmetryMode::Validate).unwrap()
}

fn witness_ok(a: &CpsTensor, v: &PsdVerdict) -> bool {
    let bound = -1e-6 * a.frob_norm();
    match &v.witness {
        Some(Witness::Vector(x)) => a.quartic_form(x).unwrap() <= bound,
        Some(Witness::Matrix(x)) => a.qform_matrix(x).unwrap() <= bound,
        None => false,
    }
}

fn not_psd(o: &mut Outcome, a: &CpsTensor, label: &str, v: &PsdVerdict) {
    o.check(format!("{label} NotPsd"), v.status == PsdStatus::NotPsd);
    o.check(format!("{label} witness"), witness_ok(a, v));
}

fn holds(o: &mut Outcome, label: &str, v: &PsdVerdict) {
    o.check(format!("{label} not refuted"), v.status != PsdStatus::NotPsd);
}

fn psd_suite() -> Outcome {
    let mut o = Outcome::new();
    let opts = SearchOptions { seed: 42, ..Default::default() };
    let report = |a: &CpsTensor| -> ConeReport { cone_report(a, &opts).unwrap() };

    // x⁴ + y⁴ − ⅛(x+y)⁴
    let mut list = Vec::new();
    for i in 1..=2 {
        for j in 1..=2 {
            for k in 1..=2 {
                for l in 1..=2 {
                    let diag = if i == j && j == k && k == l { 1.0 } else { 0.0 };
                    list.push(([i, j, k, l], c(diag - 0.125, 0.0)));
                }
            }
        }
    }
    let a = entries(&list);
    let r = report(&a);
    holds(&mut o, "sym: vector(R)", r.vector_real.as_ref().unwrap());
    not_psd(&mut o, &a, "sym: matrix(R)", r.matrix_real.as_ref().unwrap());
    o.check("sym: consistency", r.consistency);

    let cross = [
        ([1, 1, 1, 1], c(1.0, 0.0)),
        ([2, 2, 2, 2], c(1.0, 0.0)),
        ([1, 2, 1, 2], c(1.5, 0.0)),
        ([2, 1, 1, 2], c(1.5, 0.0)),
        ([1, 2, 2, 1], c(1.5, 0.0)),
        ([2, 1, 2, 1], c(1.5, 0.0)),
    ];
    let mut list = cross.to_vec();
    list.extend([([1, 1, 2, 2], c(-2.0, 0.0)), ([2, 2, 1, 1], c(-2.0, 0.0))]);
    let a = entries(&list);
    let r = report(&a);
    holds(&mut o, "cps: vector(R)", r.vector_real.as_ref().unwrap());
    not_psd(&mut o, &a, "cps: general(R)", r.general_real.as_ref().unwrap());

    // λ E1⊗E1 − E2⊗E2 at the smallest general-PSD λ.
    let lambda = 23.65425685053042;
    let e1 = [-2.0, 1.0, 1.0, -3.0];
    let e2 = [2.0, 5.0, 5.0, 2.0];
    let m = Mat::from_fn(4, 4, |p, q| c(lambda * e1[p] * e1[q] - e2[p] * e2[q], 0.0));
    let a = CpsTensor::from_unfolding(2, m).unwrap();
    let r = report(&a);
    holds(&mut o, "lambda: general(R)", r.general_real.as_ref().unwrap());
    not_psd(&mut o, &a, "lambda: matrix(R)", r.matrix_real.as_ref().unwrap());
    holds(&mut o, "lambda: general(C)", &r.general_complex);
    not_psd(&mut o, &a, "lambda: vector(C)", &r.vector_complex);
    let x = [c(0.0, 1.0), c(5f64.sqrt() / 3.0, 1.0 / 3.0)];
    let nx = (x[0].norm_sqr() + x[1].norm_sqr()).sqrt();
    let x = [x[0] / nx, x[1] / nx];
    o.check("lambda: known complex witness", a.quartic_form(&x).unwrap() < 0.0);

    let mut list = cross.to_vec();
    list.extend([([1, 1, 2, 2], c(-2.0, -2.0)), ([2, 2, 1, 1], c(-2.0, 2.0))]);
    let a = entries(&list);
    let r = report(&a);
    holds(&mut o, "complex: vector(C)", &r.vector_complex);
    not_psd(&mut o, &a, "complex: general(C)", &r.general_complex);
    o.check("complex: consistency", r.consistency);
    o
}

fn round_trips() -> Outcome {
    let mut o = Outcome::new();
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut rank_ok = true;
    let mut imag = 0.0f64;
    for i in 0..200u64 {
        let n = 2 + (i % 5) as usize;
        let complex = (i / 5) % 2 == 1;
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + i);
        let a = random_cps(&mut rng, n, complex);
        let scale = a.frob_norm();
        let mut rel = |b: CpsTensor| worst = worst.max(a.sub(&b).unwrap().frob_norm() / scale);
        rel(matrix_decomposition(&a, TOL).unwrap().assemble().unwrap());
        rel(extended_pairs(&a, TOL).unwrap().assemble().unwrap());
        rel(cps_decompose(&a, TOL).unwrap().assemble().unwrap());
        if !complex {
            rel(real_partial_symmetric(&a, TOL).unwrap().assemble().unwrap());
            rel(real_cps_grouped(&a, TOL).unwrap().assemble().unwrap());
        }
        rank_ok &= matrix_rank(&a, TOL).unwrap() <= n * (n + 1) / 2;
        let x = unit_vector(&mut rng, n, true);
        imag = imag.max(a.quartic_form_raw(&x).unwrap().im.abs() / scale);
    }
    o.check(format!("reassembly error {worst:e}"), worst <= 1e-9);
    o.check("matrix rank <= n(n+1)/2", rank_ok);
    o.check(format!("quartic imaginary part {imag:e}"), imag <= 1e-10);
    o.check("runtime < 1 min", start.elapsed() < Duration::from_secs(60));
    o
}

fn gradient_oracle() -> Outcome {
    let mut o = Outcome::new();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let n = rng.random_range(2..=5);
        let a = random_cps(&mut rng, n, true);
        let x = unit_vector(&mut rng, n, true);
        let g = grad_quartic(&a, &x).unwrap();
        let h = 1e-6;
        let mut fd = vec![c(0.0, 0.0); n];
        for l in 0..n {
            let mut parts = [0.0; 2];
            for (s, d) in [c(1.0, 0.0), c(0.0, 1.0)].into_iter().enumerate() {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[l] += d * h;
                xm[l] -= d * h;
                parts[s] = (a.quartic_form(&xp).unwrap() - a.quartic_form(&xm).unwrap()) / (2.0 * h);
            }
            fd[l] = c(parts[0], parts[1]) / 2.0;
        }
        let err: f64 = g.iter().zip(&fd).map(|(p, q)| (p - q).norm_sqr()).sum::<f64>().sqrt();
        let size: f64 = fd.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        worst = worst.max(err / size);
    }
    o.check(format!("worst relative error {worst:e}"), worst <= 1e-6);
    o
}

fn real_complex_consistency() -> Outcome {
    let mut o = Outcome::new();
    let opts = SearchOptions { starts: 16, seed: 3, ..Default::default() };
    let (mut matrix_agree, mut general_agree) = (0, 0);
    let mut skew = 0.0f64;
    for i in 0..100u64 {
        let n = 2 + (i % 3) as usize;
        let mut rng = ChaCha8Rng::seed_from_u64(5000 + i);
        let a = random_cps(&mut rng, n, false);

        let complex_matrix = matrix_psd(&a, TOL).unwrap().status == PsdStatus::Certified;
        let ev = real_sym_eig(&a.unfolded_real().unwrap()).unwrap().values;
        let top = ev.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let real_matrix = ev.iter().all(|&v| v >= -TOL * top);
        matrix_agree += usize::from(complex_matrix == real_matrix);

        let gr = general_psd(&a, Field::Real, &opts).unwrap().status;
        let gc = general_psd(&a, Field::Complex, &opts).unwrap().status;
        general_agree += usize::from(gr == gc);

        let s = Mat::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let k = Mat::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let sym = Mat::from_fn(n, n, |p, q| s[(p, q)] + s[(q, p)]);
        let x = Mat::from_fn(n, n, |p, q| c(sym[(p, q)], k[(p, q)] - k[(q, p)]));
        let scale = a.frob_norm() * x.frob_norm().powi(2);
        let d = a.qform_matrix(&x).unwrap() - a.qform_matrix(&sym.to_c64()).unwrap();
        skew = skew.max(d.abs() / scale);
    }
    o.check(format!("matrix verdicts agree {matrix_agree}/100"), matrix_agree == 100);
    o.check(format!("general verdicts agree {general_agree}/100"), general_agree == 100);
    o.check(format!("skew cancellation {skew:e}"), skew <= 1e-10);
    o
}

fn completion_oracle() -> Outcome {
    let mut o = Outcome::new();
    let start = Instant::now();
    for complex in [false, true] {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let a = random_low_rank(&mut rng, 4, &[3.0, 1.0], complex).unwrap();
        let mask = sample_mask(4, 0.6, 0).unwrap();
        let r = fpc_complete(&mask, &a, &FpcParams::default()).unwrap();
        let err = r.tensor.sub(&a).unwrap().frob_norm() / a.frob_norm();
        let field = if complex { "complex" } else { "real" };
        o.check(format!("{field} recovery error {err:.3e}"), err <= 1e-2);

        let full = fpc_complete(&SampleMask::full(4), &a, &FpcParams::default()).unwrap();
        let err = full.tensor.sub(&a).unwrap().frob_norm();
        o.check(format!("{field} full mask error {err:e}"), err <= 1e-9 && full.iterations == 1);
    }
    o.check("runtime < 30 s", start.elapsed() < Duration::from_secs(30));
    o
}

fn cauchy_property() -> Outcome {
    let mut o = Outcome::new();
    let a = cauchy_build(&[1.0, 2.0, 3.0]).unwrap();
    let v = general_psd(&a, Field::Real, &SearchOptions { starts: 256, seed: 9, ..Default::default() }).unwrap();
    o.check(format!("c=(1,2,3) general {:?}", v.status), v.status != PsdStatus::NotPsd);
    let a = cauchy_build(&[1.0, -0.2]).unwrap();
    let v = vector_psd(&a, Field::Real, &SearchOptions { seed: 9, ..Default::default() }).unwrap();
    o.check("c=(1,-0.2) vector(R) NotPsd", v.status == PsdStatus::NotPsd);
    o.check("c=(1,-0.2) witness", witness_ok(&a, &v));
    o
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("BEC example", bec_example),
        ("QEP example", qep_example),
        ("basis tensor", basis_tensor),
        ("PSD counterexamples", psd_suite),
        ("round trips", round_trips),
        ("gradient oracle", gradient_oracle),
        ("real/complex consistency", real_complex_consistency),
        ("completion oracle", completion_oracle),
        ("Cauchy property", cauchy_property),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let status = if outcome.passed() { "PASS" } else { "FAIL" };
        println!("criterion {} ({name}): {status} [{:.2?}] {}", i + 1, start.elapsed(), outcome.summary());
        if !outcome.passed() {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
