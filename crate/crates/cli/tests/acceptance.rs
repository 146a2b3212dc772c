//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.
//!
//! Run with `cargo test -p qlmps-cli --test acceptance`.

use std::f64::consts::{LN_2, SQRT_2};
use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use qlmps::conditions::{
    check_consistency, check_normalization, consistency_horizon, normalization_sums,
    verify_trace_identity,
};
use qlmps::linalg::{hermitian_eigenvalues, ComplexMatrix, Tolerance, C64};
use qlmps::models::{
    ghz_expectation_closed_form, ghz_family, projector_family, random_family, random_hermitian,
    random_product_observable, random_projector_spec,
};
use qlmps::state::{
    check_projectivity, evaluate_naive, evaluate_transfer, reduced_density_matrix,
    von_neumann_entropy,
};
use qlmps::{
    Error, LocalObservable, LogBase, MpsFamily, SiteTensors, Tail, DEFAULT_STATEVECTOR_CAP,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CAP: usize = DEFAULT_STATEVECTOR_CAP;

// pinned tolerances
const GHZ_TOL: f64 = 1e-15;
const GHZ_TIME: Duration = Duration::from_millis(100);
const AGREE: Tolerance = Tolerance {
    atol: 1e-12,
    rtol: 1e-10,
};
const CLOSED_FORM_TIME: Duration = Duration::from_secs(5);
const ENTROPY_TOL: f64 = 1e-10;
const RHO_INVARIANT_TOL: f64 = 1e-10;
const IDENTITY_RTOL: f64 = 1e-10;
const PROJECTIVITY_TOL: f64 = 1e-10;
const LONG_CHAIN_TOL: f64 = 1e-10;
const LONG_CHAIN_TIME: Duration = Duration::from_secs(1);

type Criterion = (&'static str, fn() -> Verdict);

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn diag(a: f64, b: f64) -> ComplexMatrix {
    ComplexMatrix::from_real_diagonal(&[a, b])
}

/// Scaled deviation `|a - b| / (atol + rtol |b|)`; at most one means agreement.
fn scaled(a: C64, b: C64) -> f64 {
    (a - b).norm() / (AGREE.atol + AGREE.rtol * b.norm())
}

fn random_projector_family(rng: &mut ChaCha8Rng) -> MpsFamily {
    let d = rng.gen_range(2..=3);
    let m = rng.gen_range(d..=4);
    let spec = random_projector_spec(rng, m, d).expect("valid spec");
    projector_family(&spec).expect("projector family satisfies the conditions")
}

fn ghz_validation() -> Verdict {
    let ghz = ghz_family();
    let start = Instant::now();
    let norm = check_normalization(&ghz, GHZ_TOL);
    let cons =
        check_consistency(&ghz, consistency_horizon(&ghz), GHZ_TOL).expect("consistency check");
    let elapsed = start.elapsed();
    let sums = normalization_sums(&ghz);
    let s1_shown = norm.notes.contains(&format!("s1 = {:?}", sums.s1));
    let pass = norm.pass
        && cons.pass
        && cons.max_residual() <= GHZ_TOL
        && (sums.s2 - 1.0).abs() <= GHZ_TOL
        && (sums.s1 - SQRT_2).abs() <= GHZ_TOL
        && s1_shown
        && elapsed < GHZ_TIME;
    Verdict::new(
        pass,
        format!(
            "consistency residual {:.3e}, |s2-1| = {:.3e}, |s1-sqrt2| = {:.3e}, s1 in report: {s1_shown}, {elapsed:?}",
            cons.max_residual(),
            (sums.s2 - 1.0).abs(),
            (sums.s1 - SQRT_2).abs(),
        ),
    )
}

fn ghz_closed_form() -> Verdict {
    let ghz = ghz_family();
    let mut rng = rng(2);
    let start = Instant::now();
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let n = rng.gen_range(1..=6);
        let hermitian = rng.gen_bool(0.5);
        let x = random_product_observable(&mut rng, 2, n, hermitian);
        let LocalObservable::Product { factors } = &x else {
            unreachable!()
        };
        let naive = evaluate_naive(&ghz, &x, CAP).expect("naive").value;
        let transfer = evaluate_transfer(&ghz, &x).expect("transfer").value;
        let closed = ghz_expectation_closed_form(factors).expect("closed form");
        worst = worst
            .max(scaled(naive, closed))
            .max(scaled(transfer, closed))
            .max(scaled(naive, transfer));
    }
    let elapsed = start.elapsed();
    Verdict::new(
        worst <= 1.0 && elapsed < CLOSED_FORM_TIME,
        format!("200 observables, worst scaled deviation {worst:.3e}, {elapsed:?}"),
    )
}

fn ghz_entropy() -> Verdict {
    let ghz = ghz_family();
    let mut worst = 0.0f64;
    for n in 1..=6 {
        let rho = reduced_density_matrix(&ghz, n, CAP).expect("rho");
        worst = worst
            .max((von_neumann_entropy(&rho, LogBase::Natural) - LN_2).abs())
            .max((von_neumann_entropy(&rho, LogBase::Two) - 1.0).abs());
    }
    Verdict::new(
        worst <= ENTROPY_TOL,
        format!("N = 1..6, worst deviation {worst:.3e}"),
    )
}

fn rho_invariant_defect(rho: &ComplexMatrix) -> f64 {
    let herm = rho.hermiticity_defect().expect("square");
    let tr = (rho.trace(false).expect("square") - C64::new(1.0, 0.0)).norm();
    let min_eig = hermitian_eigenvalues(rho, 1e-8)
        .expect("hermitian")
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    herm.max(tr).max((-min_eig).max(0.0))
}

fn density_matrix_expectations() -> Verdict {
    let mut rng = rng(4);
    let mut families = vec![ghz_family()];
    families.extend((0..20).map(|_| random_projector_family(&mut rng)));
    let mut worst = 0.0f64;
    let mut invariant = 0.0f64;
    for family in &families {
        let rhos: Vec<_> = (1..=4)
            .map(|n| reduced_density_matrix(family, n, CAP).expect("rho"))
            .collect();
        for rho in &rhos {
            invariant = invariant.max(rho_invariant_defect(rho.matrix()));
        }
        for _ in 0..100 {
            let n = rng.gen_range(1..=4);
            let x = random_product_observable(&mut rng, family.d(), n, true);
            let via_rho = rhos[n - 1].expectation(&x).expect("Tr(rho X)");
            let naive = evaluate_naive(family, &x, CAP).expect("naive").value;
            worst = worst.max(scaled(via_rho, naive));
        }
    }
    Verdict::new(
        worst <= 1.0 && invariant <= RHO_INVARIANT_TOL,
        format!(
            "{} families x 100 observables, worst scaled deviation {worst:.3e}, worst invariant defect {invariant:.3e}",
            families.len()
        ),
    )
}

fn trace_identity() -> Verdict {
    let mut rng = rng(5);
    let mut failures = 0;
    for _ in 0..1000 {
        let d = rng.gen_range(1..=3);
        let m = rng.gen_range(1..=4);
        let n = rng.gen_range(1..=3);
        let k = rng.gen_range(1..=3);
        let family = random_family(&mut rng, d, m, n + k, Tail::Finite).expect("family");
        let i: Vec<usize> = (0..n + k).map(|_| rng.gen_range(0..d)).collect();
        let j: Vec<usize> = (0..n + k).map(|_| rng.gen_range(0..d)).collect();
        if !verify_trace_identity(&family, n, k, (&i, &j), IDENTITY_RTOL).expect("identity") {
            failures += 1;
        }
    }
    Verdict::new(
        failures == 0,
        format!("1000 random families, {failures} disagreements"),
    )
}

/// GHZ-like head on a tail that doubles the weight of `|1⟩` at every site.
fn drifting_family() -> MpsFamily {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    MpsFamily::new(
        2,
        2,
        vec![
            SiteTensors::new(vec![diag(s, 0.), diag(0., s)]).unwrap(),
            SiteTensors::new(vec![diag(1., 0.), diag(0., 2.)]).unwrap(),
        ],
        Tail::RepeatLast,
    )
    .unwrap()
}

fn projectivity() -> Verdict {
    let mut rng = rng(6);
    let mut families = vec![ghz_family()];
    families.extend((0..10).map(|_| random_projector_family(&mut rng)));
    let mut worst = 0.0f64;
    let mut failures = 0;
    for family in &families {
        for _ in 0..20 {
            let n = rng.gen_range(1..=3);
            let hermitian = rng.gen_bool(0.5);
            let x = random_product_observable(&mut rng, family.d(), n, hermitian);
            let report =
                check_projectivity(family, &x, 3, PROJECTIVITY_TOL, CAP).expect("projectivity");
            worst = worst.max(report.max_residual());
            failures += usize::from(!report.pass);
        }
    }
    let drifting = drifting_family();
    let mut caught = 0;
    for _ in 0..20 {
        let n = rng.gen_range(1..=3);
        let x = random_product_observable(&mut rng, 2, n, true);
        let report =
            check_projectivity(&drifting, &x, 3, PROJECTIVITY_TOL, CAP).expect("projectivity");
        caught += usize::from(!report.pass);
    }
    Verdict::new(
        failures == 0 && caught == 20,
        format!(
            "{} families x 20 observables, worst residual {worst:.3e}; drifting family rejected {caught}/20",
            families.len()
        ),
    )
}

fn long_chain() -> Verdict {
    let ghz = ghz_family();
    let mut rng = rng(7);
    let n = 100;
    let mut factors = vec![ComplexMatrix::identity(2); n];
    factors[0] = diag(1., -1.);
    let z = LocalObservable::product(factors.clone()).unwrap();
    factors[0] = ComplexMatrix::identity(2);
    factors[rng.gen_range(0..n)] = random_hermitian(&mut rng, 2);
    let h = LocalObservable::product(factors.clone()).unwrap();

    let start = Instant::now();
    let z_value = evaluate_transfer(&ghz, &z).expect("transfer").value;
    let h_value = evaluate_transfer(&ghz, &h).expect("transfer").value;
    let elapsed = start.elapsed();
    let h_closed = ghz_expectation_closed_form(&factors).expect("closed form");
    let z_dev = z_value.norm();
    let h_dev = (h_value - h_closed).norm();
    let naive_rejected = matches!(evaluate_naive(&ghz, &z, CAP), Err(Error::Resource(_)));
    Verdict::new(
        z_dev <= LONG_CHAIN_TOL && h_dev <= LONG_CHAIN_TOL && elapsed < LONG_CHAIN_TIME && naive_rejected,
        format!(
            "N = 100: |phi(Z)| = {z_dev:.3e}, random single-site deviation {h_dev:.3e}, {elapsed:?}; naive rejected by cap: {naive_rejected}"
        ),
    )
}

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn run_cli(args: &[String], threads: usize) -> (Option<i32>, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_qlmps"))
        .args(args)
        .env("RAYON_NUM_THREADS", threads.to_string())
        .output()
        .expect("qlmps runs");
    (out.status.code(), out.stdout)
}

fn determinism() -> Verdict {
    let invocations: Vec<Vec<String>> = [
        vec!["validate".into(), data("ghz.json")],
        vec!["validate".into(), data("broken.json")],
        vec!["validate".into(), data("projector.json")],
        vec!["expect".into(), data("ghz.json"), data("zz.json")],
        vec![
            "expect".into(),
            data("projector.json"),
            data("random-product.json"),
        ],
        vec![
            "expect".into(),
            data("random-family.json"),
            data("random-product.json"),
            "--method".into(),
            "naive".into(),
        ],
        vec!["expect".into(), data("ghz.json"), data("xx-dense.json")],
        vec![
            "rho".into(),
            data("projector.json"),
            "--n".into(),
            "3".into(),
        ],
        vec!["rho".into(), data("ghz.json"), "--n".into(), "4".into()],
        vec![
            "entropy".into(),
            data("ghz.json"),
            "--n".into(),
            "6".into(),
            "--base".into(),
            "two".into(),
        ],
        vec![
            "entropy".into(),
            data("projector.json"),
            "--n".into(),
            "4".into(),
        ],
        vec![
            "identity-check".into(),
            data("random-family.json"),
            "--n".into(),
            "2".into(),
            "--k".into(),
            "2".into(),
            "--seed".into(),
            "7".into(),
        ],
        vec![
            "identity-check".into(),
            data("projector.json"),
            "--n".into(),
            "3".into(),
            "--k".into(),
            "3".into(),
        ],
        vec!["demo".into(), "ghz".into()],
    ]
    .into_iter()
    .collect();
    let mut mismatched = Vec::new();
    for args in &invocations {
        let runs: Vec<_> = [1, 1, 8, 8].iter().map(|&t| run_cli(args, t)).collect();
        let reference = &runs[0];
        let stable =
            reference.0.is_some() && !reference.1.is_empty() && runs.iter().all(|r| r == reference);
        if !stable {
            mismatched.push(args[0].clone());
        }
    }
    Verdict::new(
        mismatched.is_empty(),
        format!(
            "{} invocations x (1, 1, 8, 8 threads); differing: {mismatched:?}",
            invocations.len()
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("GHZ validation", ghz_validation),
        ("GHZ closed form", ghz_closed_form),
        ("GHZ entropy", ghz_entropy),
        ("density-matrix expectations", density_matrix_expectations),
        ("double-trace identity", trace_identity),
        ("projectivity", projectivity),
        ("transfer performance", long_chain),
        ("CLI determinism", determinism),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let verdict = check();
        let tag = if verdict.pass { "PASS" } else { "FAIL" };
        println!("{tag} [{}] {name}: {}", k + 1, verdict.detail);
        failed += usize::from(!verdict.pass);
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
