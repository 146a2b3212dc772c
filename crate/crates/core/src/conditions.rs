//! Numerical checks of the hypotheses under which a family of finite MPS
//! extends to a state on the infinite chain, and of the double-trace
//! identity that underlies the transfer-operator contraction.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{chain_product, kron, ComplexMatrix, C64};
use crate::mps::{MpsFamily, Tail};

pub const DEFAULT_CONDITION_TOL: f64 = 1e-10;

pub const NORMALIZATION: &str = "normalization";
pub const CONSISTENCY: &str = "consistency";
pub const PROJECTIVITY: &str = "projectivity";

/// Outcome of one condition check: one residual per checked site.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub condition: String,
    pub pass: bool,
    pub tolerance: f64,
    pub sites: Vec<usize>,
    pub residuals: Vec<f64>,
    pub notes: String,
}

impl ConditionReport {
    /// `pass` is set iff every residual is `<= tolerance` (NaN fails).
    pub fn from_residuals(
        condition: impl Into<String>,
        sites: Vec<usize>,
        residuals: Vec<f64>,
        tolerance: f64,
        notes: impl Into<String>,
    ) -> Self {
        debug_assert_eq!(sites.len(), residuals.len());
        let pass = residuals.iter().all(|&r| r <= tolerance);
        Self {
            condition: condition.into(),
            pass,
            tolerance,
            sites,
            residuals,
            notes: notes.into(),
        }
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

/// First-site trace sums: `s1 = Σ_i |Tr A_i^[1]|`, `s2 = Σ_i |Tr A_i^[1]|²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalizationSums {
    pub s1: f64,
    pub s2: f64,
}

pub fn normalization_sums(family: &MpsFamily) -> NormalizationSums {
    let first = &family.explicit_sites()[0];
    let traces: Vec<f64> = first
        .matrices()
        .iter()
        .map(|a| a.trace(false).expect("site matrices are square").norm())
        .collect();
    NormalizationSums {
        s1: traces.iter().sum(),
        s2: traces.iter().map(|t| t * t).sum(),
    }
}

/// Gates on `|s2 - 1| <= tol`, since `s2 = ‖ψ_1‖²` is the quantity the
/// projectivity argument needs. The literal sum `s1` is reported in the notes.
pub fn check_normalization(family: &MpsFamily, tol: f64) -> ConditionReport {
    let NormalizationSums { s1, s2 } = normalization_sums(family);
    ConditionReport::from_residuals(
        NORMALIZATION,
        vec![1],
        vec![(s2 - 1.0).abs()],
        tol,
        format!("s1 = {s1:?} (sum of |Tr A_i^[1]|); s2 = {s2:?} (sum of |Tr A_i^[1]|^2, gated)"),
    )
}

/// Frobenius norm of
/// `Σ_j (A_j^[n+1])† (A_i^[n])† ⊗ A_i^[n] A_j^[n+1] - (A_i^[n])† ⊗ A_i^[n]`,
/// maximized over `i`.
pub fn consistency_defect(family: &MpsFamily, n: usize) -> Result<f64> {
    let here = family.site(n)?;
    let next = family.site(n + 1)?;
    let mut worst = 0.0f64;
    for a_i in here.matrices() {
        let a_i_dag = a_i.dagger();
        let rhs = kron(&a_i_dag, a_i);
        let mut lhs = ComplexMatrix::zeros(rhs.rows(), rhs.cols());
        for a_j in next.matrices() {
            let left = a_j.dagger().matmul(&a_i_dag)?;
            let right = a_i.matmul(a_j)?;
            lhs = lhs.add(&kron(&left, &right))?;
        }
        worst = worst.max(lhs.sub(&rhs)?.frobenius_norm());
    }
    Ok(worst)
}

/// Number of sites `n` for which the consistency identity must be checked
/// to cover the whole family: every explicit site for a repeating tail
/// (the last one pairs with its own copy), one fewer for a finite family.
pub fn consistency_horizon(family: &MpsFamily) -> usize {
    let len = family.explicit_sites().len();
    match family.tail() {
        Tail::RepeatLast => len,
        Tail::Finite => len - 1,
    }
}

/// Checks the consistency identity for `n = 1..=n_max`.
pub fn check_consistency(family: &MpsFamily, n_max: usize, tol: f64) -> Result<ConditionReport> {
    if n_max == 0 {
        return Err(Error::Argument("n_max must be at least 1".into()));
    }
    let sites: Vec<usize> = (1..=n_max).collect();
    let residuals = sites
        .par_iter()
        .map(|&n| consistency_defect(family, n))
        .collect::<Result<Vec<_>>>()?;
    let horizon = consistency_horizon(family);
    let notes = match family.tail() {
        Tail::RepeatLast if n_max >= horizon => format!(
            "sites beyond {horizon} repeat the last explicit tensors, so the check covers every n"
        ),
        Tail::Finite if n_max >= horizon => {
            format!(
                "covers every adjacent pair of the {}-site family",
                horizon + 1
            )
        }
        _ => format!("covers n <= {n_max} only; full coverage needs n_max >= {horizon}"),
    };
    Ok(ConditionReport::from_residuals(
        CONSISTENCY,
        sites,
        residuals,
        tol,
        notes,
    ))
}

/// Both sides of the double-trace identity for index tuples `i`, `j` of
/// length `n + k`:
///
/// * left: `conj(Tr(A_{i_1} ⋯ A_{i_{n+k}})) · Tr(A_{j_1} ⋯ A_{j_{n+k}})`
/// * right: `Tr[(A_{i_n}† ⋯ A_{i_1}† ⊗ A_{j_1} ⋯ A_{j_n})
///   (A_{i_{n+k}}† ⋯ A_{i_{n+1}}† ⊗ A_{j_{n+1}} ⋯ A_{j_{n+k}})]`
pub fn trace_identity_sides(
    family: &MpsFamily,
    n: usize,
    k: usize,
    i: &[usize],
    j: &[usize],
) -> Result<(C64, C64)> {
    if n == 0 || k == 0 {
        return Err(Error::Argument(format!(
            "n and k must be positive (n={n}, k={k})"
        )));
    }
    if i.len() != n + k || j.len() != n + k {
        return Err(Error::Argument(format!(
            "index tuples must have length n + k = {}, got {} and {}",
            n + k,
            i.len(),
            j.len()
        )));
    }
    let lhs = family.amplitude(i)?.conj() * family.amplitude(j)?;

    let tensor = |site: usize, idx: usize| -> Result<&ComplexMatrix> {
        family.site(site)?.get(idx).ok_or_else(|| {
            Error::Argument(format!("physical index {idx} outside 0..{}", family.d()))
        })
    };
    let daggers = |range: std::ops::Range<usize>| -> Result<ComplexMatrix> {
        let mats = range
            .rev()
            .map(|s| tensor(s + 1, i[s]).map(ComplexMatrix::dagger))
            .collect::<Result<Vec<_>>>()?;
        chain_product(&mats)
    };
    let plain = |range: std::ops::Range<usize>| -> Result<ComplexMatrix> {
        let mats = range
            .map(|s| tensor(s + 1, j[s]))
            .collect::<Result<Vec<_>>>()?;
        chain_product(mats)
    };
    let head = kron(&daggers(0..n)?, &plain(0..n)?);
    let tail = kron(&daggers(n..n + k)?, &plain(n..n + k)?);
    let rhs = head.matmul(&tail)?.trace(false)?;
    Ok((lhs, rhs))
}

/// True iff the two sides agree to `|lhs - rhs| <= tol · max(1, |lhs|)`.
pub fn verify_trace_identity(
    family: &MpsFamily,
    n: usize,
    k: usize,
    tuples: (&[usize], &[usize]),
    tol: f64,
) -> Result<bool> {
    let (lhs, rhs) = trace_identity_sides(family, n, k, tuples.0, tuples.1)?;
    Ok((lhs - rhs).norm() <= tol * lhs.norm().max(1.0))
}
