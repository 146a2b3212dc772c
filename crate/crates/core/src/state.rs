//! Evaluation of the infinite-volume state on local observables.
//!
//! For an observable `X` on sites `[1, N]` the state is
//! `φ(X) = ⟨ψ_{N+1}| X ⊗ 1 |ψ_{N+1}⟩`, one extra site being traced out.
//! Two routes are provided:
//!
//! * [`evaluate_naive`] builds the statevector `|ψ_{N+1}⟩` (cost `d^(N+1)`)
//!   and accepts dense or product observables;
//! * [`evaluate_transfer`] contracts site-wise `m² × m²` transfer operators
//!   `E_k(X_k) = Σ_{i,j} ⟨i|X_k|j⟩ conj(A_i^[k]) ⊗ A_j^[k]` closed by the
//!   boundary factor `F = Σ_ℓ conj(A_ℓ^[N+1]) ⊗ A_ℓ^[N+1]`, at polynomial cost.
//!
//! The two share no code beyond the family lookup and serve as oracles for
//! each other.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conditions::{
    check_consistency, check_normalization, consistency_horizon, ConditionReport,
    DEFAULT_CONDITION_TOL, PROJECTIVITY,
};
use crate::error::{Error, Result};
use crate::linalg::{
    checked_pow, hermitian_eigenvalues, kron, ComplexMatrix, C64, DEFAULT_HERMITIAN_TOL, ZERO,
};
use crate::mps::MpsFamily;

/// Observable on sites `[1, N]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ObservableRepr", into = "ObservableRepr")]
pub enum LocalObservable {
    /// `X_1 ⊗ ⋯ ⊗ X_N` with every factor `d × d`.
    Product { factors: Vec<ComplexMatrix> },
    /// One matrix of side `d^N`.
    Dense {
        d: usize,
        n_sites: usize,
        matrix: ComplexMatrix,
    },
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
enum ObservableRepr {
    Product {
        n_sites: usize,
        factors: Vec<ComplexMatrix>,
    },
    Dense {
        n_sites: usize,
        matrix: ComplexMatrix,
    },
}

impl TryFrom<ObservableRepr> for LocalObservable {
    type Error = Error;

    fn try_from(repr: ObservableRepr) -> Result<Self> {
        match repr {
            ObservableRepr::Product { n_sites, factors } => {
                if factors.len() != n_sites {
                    return Err(Error::Dimension(format!(
                        "n_sites = {n_sites} but {} factors given",
                        factors.len()
                    )));
                }
                LocalObservable::product(factors)
            }
            ObservableRepr::Dense { n_sites, matrix } => LocalObservable::dense(n_sites, matrix),
        }
    }
}

impl From<LocalObservable> for ObservableRepr {
    fn from(x: LocalObservable) -> Self {
        match x {
            LocalObservable::Product { factors } => ObservableRepr::Product {
                n_sites: factors.len(),
                factors,
            },
            LocalObservable::Dense {
                n_sites, matrix, ..
            } => ObservableRepr::Dense { n_sites, matrix },
        }
    }
}

/// Integer `root` with `root^n == side`, if any.
fn integer_root(side: usize, n: usize) -> Option<usize> {
    let guess = (side as f64).powf(1.0 / n as f64).round() as usize;
    [guess.saturating_sub(1), guess, guess + 1]
        .into_iter()
        .find(|&r| r > 0 && checked_pow(r, n).ok() == Some(side))
}

impl LocalObservable {
    pub fn product(factors: Vec<ComplexMatrix>) -> Result<Self> {
        let first = factors.first().ok_or_else(|| {
            Error::Argument("a product observable needs at least one factor".into())
        })?;
        let d = first.side()?;
        for (k, x) in factors.iter().enumerate() {
            if x.side()? != d {
                return Err(Error::Dimension(format!(
                    "factor {k} is {}x{}, expected {d}x{d}",
                    x.rows(),
                    x.cols()
                )));
            }
        }
        Ok(Self::Product { factors })
    }

    pub fn dense(n_sites: usize, matrix: ComplexMatrix) -> Result<Self> {
        if n_sites == 0 {
            return Err(Error::Argument(
                "observable must act on at least one site".into(),
            ));
        }
        let side = matrix.side()?;
        let d = integer_root(side, n_sites)
            .ok_or_else(|| Error::Dimension(format!("side {side} is not a {n_sites}-th power")))?;
        Ok(Self::Dense { d, n_sites, matrix })
    }

    pub fn identity(d: usize, n_sites: usize) -> Self {
        Self::Product {
            factors: vec![ComplexMatrix::identity(d); n_sites],
        }
    }

    pub fn n_sites(&self) -> usize {
        match self {
            Self::Product { factors } => factors.len(),
            Self::Dense { n_sites, .. } => *n_sites,
        }
    }

    pub fn local_dim(&self) -> usize {
        match self {
            Self::Product { factors } => factors[0].rows(),
            Self::Dense { d, .. } => *d,
        }
    }

    /// Dense `d^N × d^N` matrix.
    pub fn to_dense(&self) -> ComplexMatrix {
        match self {
            Self::Product { factors } => factors[1..]
                .iter()
                .fold(factors[0].clone(), |acc, x| kron(&acc, x)),
            Self::Dense { matrix, .. } => matrix.clone(),
        }
    }

    /// `X ⊗ 1^{⊗k}`, keeping the form.
    pub fn padded(&self, k: usize) -> Result<Self> {
        let d = self.local_dim();
        Ok(match self {
            Self::Product { factors } => {
                let mut factors = factors.clone();
                factors.extend(std::iter::repeat_n(ComplexMatrix::identity(d), k));
                Self::Product { factors }
            }
            Self::Dense {
                n_sites, matrix, ..
            } => Self::Dense {
                d,
                n_sites: n_sites + k,
                matrix: if k == 0 {
                    matrix.clone()
                } else {
                    kron(matrix, &ComplexMatrix::identity(checked_pow(d, k)?))
                },
            },
        })
    }

    fn check_family(&self, family: &MpsFamily) -> Result<()> {
        if self.local_dim() != family.d() {
            return Err(Error::Dimension(format!(
                "observable has local dimension {} but the family has d = {}",
                self.local_dim(),
                family.d()
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Naive,
    Transfer,
}

/// `φ(X)` together with how and how fast it was obtained.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvaluationReport {
    #[serde(serialize_with = "serialize_complex")]
    pub value: C64,
    pub method: Method,
    pub n_sites: usize,
    #[serde(rename = "elapsed_ms", serialize_with = "serialize_millis")]
    pub elapsed: Duration,
}

fn serialize_complex<S: serde::Serializer>(z: &C64, s: S) -> std::result::Result<S::Ok, S::Error> {
    [z.re, z.im].serialize(s)
}

fn serialize_millis<S: serde::Serializer>(
    d: &Duration,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64() * 1e3)
}

/// Applies `x` to tensor factor `site` (0-based) of a vector over `n_total` sites.
fn apply_site_operator(
    v: &[C64],
    x: &ComplexMatrix,
    d: usize,
    site: usize,
    n_total: usize,
) -> Vec<C64> {
    let stride = d.pow((n_total - 1 - site) as u32);
    let block = d * stride;
    let mut out = vec![ZERO; v.len()];
    out.par_chunks_mut(block)
        .zip(v.par_chunks(block))
        .for_each(|(dst, src)| {
            for t in 0..stride {
                for i in 0..d {
                    let mut acc = ZERO;
                    for j in 0..d {
                        acc += x[(i, j)] * src[j * stride + t];
                    }
                    dst[i * stride + t] = acc;
                }
            }
        });
    out
}

/// `⟨ψ_{N+1}| X ⊗ 1 |ψ_{N+1}⟩` from the explicit statevector.
pub fn evaluate_naive(
    family: &MpsFamily,
    x: &LocalObservable,
    cap: usize,
) -> Result<EvaluationReport> {
    let start = Instant::now();
    x.check_family(family)?;
    let n = x.n_sites();
    let d = family.d();
    let psi = family.build_statevector(n + 1, cap)?;
    let amps = psi.amplitudes();
    let applied = match x {
        LocalObservable::Product { factors } => {
            let mut v = amps.to_vec();
            for (k, f) in factors.iter().enumerate() {
                if *f != ComplexMatrix::identity(d) {
                    v = apply_site_operator(&v, f, d, k, n + 1);
                }
            }
            v
        }
        LocalObservable::Dense { matrix, .. } => {
            let side = matrix.rows();
            let mut out = vec![ZERO; amps.len()];
            out.par_chunks_mut(d).enumerate().for_each(|(a, row)| {
                for (l, slot) in row.iter_mut().enumerate() {
                    let mut acc = ZERO;
                    for b in 0..side {
                        acc += matrix[(a, b)] * amps[b * d + l];
                    }
                    *slot = acc;
                }
            });
            out
        }
    };
    let value = amps
        .iter()
        .zip(&applied)
        .fold(ZERO, |acc, (p, q)| acc + p.conj() * q);
    Ok(EvaluationReport {
        value,
        method: Method::Naive,
        n_sites: n,
        elapsed: start.elapsed(),
    })
}

/// `Σ_{i,j} ⟨i|X|j⟩ conj(A_i) ⊗ A_j` for one site.
fn transfer_operator(tensors: &[ComplexMatrix], x: &ComplexMatrix) -> Result<ComplexMatrix> {
    let m = tensors[0].rows();
    let mut e = ComplexMatrix::zeros(m * m, m * m);
    for (i, a_i) in tensors.iter().enumerate() {
        let mut mixed = ComplexMatrix::zeros(m, m);
        for (j, a_j) in tensors.iter().enumerate() {
            let w = x[(i, j)];
            if w != ZERO {
                mixed = mixed.add(&a_j.scale(w))?;
            }
        }
        e = e.add(&kron(&a_i.conj(), &mixed))?;
    }
    Ok(e)
}

/// `Tr[E_1(X_1) ⋯ E_N(X_N) · F]` for a product observable.
pub fn evaluate_transfer(family: &MpsFamily, x: &LocalObservable) -> Result<EvaluationReport> {
    let start = Instant::now();
    let factors = match x {
        LocalObservable::Product { factors } => factors,
        LocalObservable::Dense { .. } => {
            return Err(Error::UnsupportedForm(
                "the transfer route needs a product observable".into(),
            ))
        }
    };
    x.check_family(family)?;
    let n = factors.len();
    let ops = factors
        .par_iter()
        .enumerate()
        .map(|(k, f)| transfer_operator(family.site(k + 1)?.matrices(), f))
        .collect::<Result<Vec<_>>>()?;
    let boundary = {
        let tail = family.site(n + 1)?.matrices();
        let m = family.m();
        let mut f = ComplexMatrix::zeros(m * m, m * m);
        for a in tail {
            f = f.add(&kron(&a.conj(), a))?;
        }
        f
    };
    let mut acc = ops[0].clone();
    for e in &ops[1..] {
        acc = acc.matmul(e)?;
    }
    let value = acc.matmul(&boundary)?.trace(false)?;
    Ok(EvaluationReport {
        value,
        method: Method::Transfer,
        n_sites: n,
        elapsed: start.elapsed(),
    })
}

/// Validated density matrix on `n_sites` sites of dimension `d`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    n_sites: usize,
    d: usize,
    eigenvalues: Vec<f64>,
}

/// Tolerance on Hermiticity, unit trace and positivity of a [`DensityMatrix`].
pub const DENSITY_TOL: f64 = 1e-10;

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix, n_sites: usize, d: usize) -> Result<Self> {
        let side = matrix.side()?;
        let expected = checked_pow(d, n_sites)?;
        if side != expected {
            return Err(Error::Dimension(format!(
                "density matrix side {side} is not {d}^{n_sites}"
            )));
        }
        let herm = matrix.hermiticity_defect()?;
        if herm > DENSITY_TOL {
            return Err(Error::Validation(format!("not Hermitian: defect {herm:e}")));
        }
        let tr = matrix.trace(false)?;
        if (tr - C64::new(1.0, 0.0)).norm() > DENSITY_TOL {
            return Err(Error::Validation(format!("trace is {tr}, expected 1")));
        }
        let eigenvalues = hermitian_eigenvalues(&matrix, DEFAULT_HERMITIAN_TOL)?;
        if let Some(&low) = eigenvalues.last() {
            if low < -DENSITY_TOL {
                return Err(Error::Validation(format!(
                    "not positive semidefinite: eigenvalue {low:e}"
                )));
            }
        }
        Ok(Self {
            matrix,
            n_sites,
            d,
            eigenvalues,
        })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Descending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `Tr(ρ X)`.
    pub fn expectation(&self, x: &LocalObservable) -> Result<C64> {
        if x.n_sites() != self.n_sites || x.local_dim() != self.d {
            return Err(Error::Dimension(format!(
                "observable on {} sites of dimension {} for a density matrix on {} sites of dimension {}",
                x.n_sites(),
                x.local_dim(),
                self.n_sites,
                self.d
            )));
        }
        let dense = x.to_dense();
        let side = self.matrix.rows();
        let mut acc = ZERO;
        for a in 0..side {
            for b in 0..side {
                acc += self.matrix[(a, b)] * dense[(b, a)];
            }
        }
        Ok(acc)
    }
}

#[derive(Serialize)]
struct DensityRepr<'a> {
    n_sites: usize,
    d: usize,
    matrix: &'a ComplexMatrix,
}

impl Serialize for DensityMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DensityRepr {
            n_sites: self.n_sites,
            d: self.d,
            matrix: &self.matrix,
        }
        .serialize(s)
    }
}

/// `ρ_[1,N] = Tr_{N]} |ψ_{N+1}⟩⟨ψ_{N+1}|` with the unnormalized trace.
///
/// The family's conditions are checked first; a failure is logged but does
/// not stop the computation. The result must still pass the
/// [`DensityMatrix`] invariants.
pub fn reduced_density_matrix(family: &MpsFamily, n: usize, cap: usize) -> Result<DensityMatrix> {
    if n == 0 {
        return Err(Error::Argument("N must be at least 1".into()));
    }
    warn_on_failed_conditions(family);
    let d = family.d();
    let psi = family.build_statevector(n + 1, cap)?;
    let amps = psi.amplitudes();
    let side = amps.len() / d;
    let mut entries = vec![ZERO; side * side];
    entries
        .par_chunks_mut(side)
        .enumerate()
        .for_each(|(a, row)| {
            let left = &amps[a * d..(a + 1) * d];
            for (b, slot) in row.iter_mut().enumerate() {
                let right = &amps[b * d..(b + 1) * d];
                *slot = left
                    .iter()
                    .zip(right)
                    .fold(ZERO, |acc, (p, q)| acc + p * q.conj());
            }
        });
    DensityMatrix::new(ComplexMatrix::new(side, side, entries)?, n, d)
}

fn warn_on_failed_conditions(family: &MpsFamily) {
    let norm = check_normalization(family, DEFAULT_CONDITION_TOL);
    if !norm.pass {
        log::warn!("family fails the normalization condition: {}", norm.notes);
    }
    let horizon = consistency_horizon(family);
    if horizon > 0 {
        match check_consistency(family, horizon, DEFAULT_CONDITION_TOL) {
            Ok(r) if !r.pass => log::warn!(
                "family fails the consistency condition (max residual {:e})",
                r.max_residual()
            ),
            Err(e) => log::warn!("consistency check could not run: {e}"),
            _ => {}
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    #[default]
    Natural,
    Two,
}

/// Eigenvalues at or below this contribute nothing to the entropy.
pub const ENTROPY_CUTOFF: f64 = 1e-12;

/// `S(ρ) = -Σ λ log λ`.
pub fn von_neumann_entropy(rho: &DensityMatrix, base: LogBase) -> f64 {
    let nats: f64 = rho
        .eigenvalues
        .iter()
        .filter(|&&l| l > ENTROPY_CUTOFF)
        .map(|&l| -l * l.ln())
        .sum();
    let s = match base {
        LogBase::Natural => nats,
        LogBase::Two => nats / std::f64::consts::LN_2,
    };
    s.max(0.0)
}

/// Compares `φ_{N+k}(X ⊗ 1^{⊗k})` for `k = 0..=k_max` against `k = 0`.
///
/// Agreement witnesses both projectivity and strongly finite convergence
/// with `N_X = N`.
pub fn check_projectivity(
    family: &MpsFamily,
    x: &LocalObservable,
    k_max: usize,
    tol: f64,
    cap: usize,
) -> Result<ConditionReport> {
    let values = (0..=k_max)
        .map(|k| Ok(evaluate_naive(family, &x.padded(k)?, cap)?.value))
        .collect::<Result<Vec<_>>>()?;
    let n = x.n_sites();
    let sites = (0..=k_max).map(|k| n + k).collect();
    let residuals = values.iter().map(|v| (v - values[0]).norm()).collect();
    let listed: Vec<String> = values
        .iter()
        .map(|v| format!("[{:?}, {:?}]", v.re, v.im))
        .collect();
    Ok(ConditionReport::from_residuals(
        PROJECTIVITY,
        sites,
        residuals,
        tol,
        format!("phi values for k = 0..={k_max}: {}", listed.join(", ")),
    ))
}
