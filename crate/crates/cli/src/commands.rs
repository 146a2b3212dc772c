use std::fmt::{self, Write as _};
use std::fs;
use std::path::Path;

use anyhow::Context;
use qlmps::conditions::{
    check_consistency, check_normalization, consistency_horizon, normalization_sums,
    trace_identity_sides, ConditionReport, CONSISTENCY,
};
use qlmps::linalg::ComplexMatrix;
use qlmps::models::{ghz_expectation_closed_form, ghz_family};
use qlmps::state::{
    evaluate_naive, evaluate_transfer, reduced_density_matrix, von_neumann_entropy,
    EvaluationReport,
};
use qlmps::{LocalObservable, LogBase, MpsFamily, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde_json::{json, Value};

use crate::{BaseArg, MethodArg};

pub const DEFAULT_SEED: u64 = 42;

pub struct Options {
    pub tol: f64,
    pub cap: usize,
}

/// What a command prints, plus whether it counts as a pass.
pub struct Outcome {
    pub json: Value,
    pub text: String,
    pub pass: bool,
}

#[derive(Debug)]
pub enum CliError {
    Input(anyhow::Error),
    Computed(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Computed(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(e) | CliError::Computed(e) => write!(f, "{e:#}"),
        }
    }
}

impl From<qlmps::Error> for CliError {
    fn from(e: qlmps::Error) -> Self {
        use qlmps::Error::*;
        match e {
            Resource(_) | UnsupportedForm(_) | Validation(_) => CliError::Computed(e.into()),
            Dimension(_) | Argument(_) | Range(_) => CliError::Input(e.into()),
        }
    }
}

fn load<T: DeserializeOwned>(path: &Path, what: &str) -> Result<T, CliError> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read {what} file {}", path.display()))
        .map_err(CliError::Input)?;
    serde_json::from_str(&text)
        .with_context(|| format!("cannot parse {what} file {}", path.display()))
        .map_err(CliError::Input)
}

fn complex(z: C64) -> Value {
    json!([z.re, z.im])
}

fn fmt_complex(z: C64) -> String {
    format!("{:.12} {:+.12}i", z.re, z.im)
}

fn report_text(r: &ConditionReport) -> String {
    let mut s = format!(
        "{:<14} {}  (tolerance {:e}, max residual {:e})\n",
        r.condition,
        if r.pass { "PASS" } else { "FAIL" },
        r.tolerance,
        r.max_residual()
    );
    for (site, res) in r.sites.iter().zip(&r.residuals) {
        let _ = writeln!(s, "    site {site:>3}: residual {res:e}");
    }
    if !r.notes.is_empty() {
        let _ = writeln!(s, "    {}", r.notes);
    }
    s
}

fn matrix_text(m: &ComplexMatrix) -> String {
    let mut s = String::new();
    for r in 0..m.rows() {
        let row: Vec<String> = (0..m.cols())
            .map(|c| {
                let z = m[(r, c)];
                format!("{:>9.6}{:+.6}i", z.re, z.im)
            })
            .collect();
        let _ = writeln!(s, "    {}", row.join("  "));
    }
    s
}

fn validation_reports(family: &MpsFamily, tol: f64) -> Result<Vec<ConditionReport>, CliError> {
    let norm = check_normalization(family, tol);
    let horizon = consistency_horizon(family);
    let cons = if horizon == 0 {
        ConditionReport::from_residuals(
            CONSISTENCY,
            vec![],
            vec![],
            tol,
            "single-site finite family: no neighbouring pair to check",
        )
    } else {
        check_consistency(family, horizon, tol)?
    };
    Ok(vec![norm, cons])
}

pub fn validate(opts: &Options, family_path: &Path) -> Result<Outcome, CliError> {
    let family: MpsFamily = load(family_path, "family")?;
    let reports = validation_reports(&family, opts.tol)?;
    let pass = reports.iter().all(|r| r.pass);
    let text = reports.iter().map(report_text).collect::<String>();
    Ok(Outcome {
        json: json!({ "pass": pass, "reports": reports }),
        text,
        pass,
    })
}

fn report_json(r: &EvaluationReport, timing: bool) -> Value {
    let mut v = serde_json::to_value(r).expect("report serializes");
    if !timing {
        v.as_object_mut().expect("object").remove("elapsed_ms");
    }
    v
}

fn report_line(r: &EvaluationReport, timing: bool) -> String {
    let mut s = format!(
        "{:<9} phi = {}  ({} sites)",
        serde_json::to_value(r.method)
            .expect("method")
            .as_str()
            .unwrap_or("?"),
        fmt_complex(r.value),
        r.n_sites
    );
    if timing {
        let _ = write!(s, "  {:.3} ms", r.elapsed.as_secs_f64() * 1e3);
    }
    s.push('\n');
    s
}

pub fn expect(
    opts: &Options,
    family_path: &Path,
    observable_path: &Path,
    method: Option<MethodArg>,
    timing: bool,
) -> Result<Outcome, CliError> {
    let family: MpsFamily = load(family_path, "family")?;
    let observable: LocalObservable = load(observable_path, "observable")?;
    let method = method.unwrap_or(match observable {
        LocalObservable::Product { .. } => MethodArg::Both,
        LocalObservable::Dense { .. } => MethodArg::Naive,
    });
    Ok(match method {
        MethodArg::Naive | MethodArg::Transfer => {
            let r = if method == MethodArg::Naive {
                evaluate_naive(&family, &observable, opts.cap)?
            } else {
                evaluate_transfer(&family, &observable)?
            };
            Outcome {
                json: report_json(&r, timing),
                text: report_line(&r, timing),
                pass: true,
            }
        }
        MethodArg::Both => {
            let naive = evaluate_naive(&family, &observable, opts.cap)?;
            let transfer = evaluate_transfer(&family, &observable)?;
            let discrepancy = (naive.value - transfer.value).norm();
            let pass = discrepancy <= opts.tol * (1.0 + naive.value.norm());
            let text = format!(
                "{}{}discrepancy {discrepancy:e} ({})\n",
                report_line(&naive, timing),
                report_line(&transfer, timing),
                if pass { "agree" } else { "DISAGREE" }
            );
            Outcome {
                json: json!({
                    "naive": report_json(&naive, timing),
                    "transfer": report_json(&transfer, timing),
                    "discrepancy": discrepancy,
                }),
                text,
                pass,
            }
        }
    })
}

pub fn rho(opts: &Options, family_path: &Path, n: usize) -> Result<Outcome, CliError> {
    let family: MpsFamily = load(family_path, "family")?;
    let rho = reduced_density_matrix(&family, n, opts.cap)?;
    let text = format!(
        "rho on sites [1, {n}] (d = {}):\n{}",
        rho.d(),
        matrix_text(rho.matrix())
    );
    Ok(Outcome {
        json: serde_json::to_value(&rho).expect("density matrix serializes"),
        text,
        pass: true,
    })
}

fn log_base(base: BaseArg) -> LogBase {
    match base {
        BaseArg::Natural => LogBase::Natural,
        BaseArg::Two => LogBase::Two,
    }
}

pub fn entropy(
    opts: &Options,
    family_path: &Path,
    n: usize,
    base: BaseArg,
) -> Result<Outcome, CliError> {
    let family: MpsFamily = load(family_path, "family")?;
    let rho = reduced_density_matrix(&family, n, opts.cap)?;
    let base = log_base(base);
    let s = von_neumann_entropy(&rho, base);
    Ok(Outcome {
        json: json!({ "n_sites": n, "base": base, "entropy": s }),
        text: format!(
            "S(rho_[1,{n}]) = {s:.12} ({})\n",
            match base {
                LogBase::Natural => "nats",
                LogBase::Two => "bits",
            }
        ),
        pass: true,
    })
}

pub fn identity_check(
    opts: &Options,
    family_path: &Path,
    n: usize,
    k: usize,
    samples: usize,
    seed: u64,
) -> Result<Outcome, CliError> {
    let family: MpsFamily = load(family_path, "family")?;
    if n == 0 || k == 0 {
        return Err(CliError::Input(anyhow::anyhow!(
            "--n and --k must be positive"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = family.d();
    let mut max_dev = 0.0f64;
    let mut max_rel = 0.0f64;
    for _ in 0..samples {
        let i: Vec<usize> = (0..n + k).map(|_| rng.gen_range(0..d)).collect();
        let j: Vec<usize> = (0..n + k).map(|_| rng.gen_range(0..d)).collect();
        let (lhs, rhs) = trace_identity_sides(&family, n, k, &i, &j)?;
        let dev = (lhs - rhs).norm();
        max_dev = max_dev.max(dev);
        max_rel = max_rel.max(dev / lhs.norm().max(1.0));
    }
    let pass = max_rel <= opts.tol;
    Ok(Outcome {
        json: json!({
            "n": n,
            "k": k,
            "samples": samples,
            "seed": seed,
            "max_deviation": max_dev,
            "max_scaled_deviation": max_rel,
            "tolerance": opts.tol,
            "pass": pass,
        }),
        text: format!(
            "double-trace identity, n = {n}, k = {k}, {samples} samples (seed {seed}): \
             max deviation {max_dev:e}, scaled {max_rel:e} -> {}\n",
            if pass { "PASS" } else { "FAIL" }
        ),
        pass,
    })
}

fn pauli(name: char) -> ComplexMatrix {
    match name {
        'I' => ComplexMatrix::identity(2),
        'Z' => ComplexMatrix::from_real_diagonal(&[1.0, -1.0]),
        'X' => ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).expect("2x2"),
        _ => unreachable!("unknown Pauli label {name}"),
    }
}

pub fn demo_ghz(opts: &Options) -> Result<Outcome, CliError> {
    let family = ghz_family();
    let reports = validation_reports(&family, opts.tol)?;
    let sums = normalization_sums(&family);
    let mut text =
        String::from("GHZ family: A_i^[1] = |i><i|/sqrt(2), A_i^[n] = |i><i| for n >= 2\n\n");
    text.push_str(&reports.iter().map(report_text).collect::<String>());
    let _ = writeln!(
        text,
        "    literal sum s1 = {:?}, squared sum s2 = {:?}\n",
        sums.s1, sums.s2
    );

    let labels = ["Z", "ZZ", "ZZZ", "ZI", "IZ", "XX", "XXX", "XZ"];
    let mut expectations = Vec::new();
    let mut pass = reports.iter().all(|r| r.pass);
    for label in labels {
        let factors: Vec<ComplexMatrix> = label.chars().map(pauli).collect();
        let closed = ghz_expectation_closed_form(&factors)?;
        let x = LocalObservable::product(factors)?;
        let naive = evaluate_naive(&family, &x, opts.cap)?.value;
        let transfer = evaluate_transfer(&family, &x)?.value;
        let agree = [naive, transfer]
            .iter()
            .all(|v| (v - closed).norm() <= opts.tol * (1.0 + closed.norm()));
        pass &= agree;
        let _ = writeln!(
            text,
            "phi({label:<3}) naive {}  transfer {}  closed form {}",
            fmt_complex(naive),
            fmt_complex(transfer),
            fmt_complex(closed)
        );
        expectations.push(json!({
            "observable": label,
            "naive": complex(naive),
            "transfer": complex(transfer),
            "closed_form": complex(closed),
        }));
    }
    text.push('\n');

    let mut densities = Vec::new();
    let mut entropies = Vec::new();
    for n in 2..=4 {
        let rho = reduced_density_matrix(&family, n, opts.cap)?;
        let nats = von_neumann_entropy(&rho, LogBase::Natural);
        let bits = von_neumann_entropy(&rho, LogBase::Two);
        let _ = write!(
            text,
            "rho_[1,{n}] diagonal: {}\n  entropy {nats:.12} nats = {bits:.12} bits\n",
            (0..rho.matrix().rows())
                .map(|i| format!("{:.6}", rho.matrix()[(i, i)].re))
                .collect::<Vec<_>>()
                .join(" ")
        );
        densities.push(serde_json::to_value(&rho).expect("density matrix serializes"));
        entropies.push(json!({ "n_sites": n, "natural": nats, "two": bits }));
    }

    Ok(Outcome {
        json: json!({
            "family": family,
            "validation": { "pass": reports.iter().all(|r| r.pass), "reports": reports },
            "normalization_sums": { "s1": sums.s1, "s2": sums.s2 },
            "expectations": expectations,
            "density_matrices": densities,
            "entropies": entropies,
        }),
        text,
        pass,
    })
}
