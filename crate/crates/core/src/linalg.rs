//! Dense complex linear algebra on small square operators.
//!
//! Everything in this crate is carried by [`ComplexMatrix`]: site tensors,
//! observables, transfer operators and density matrices. Storage is
//! row-major and dense; the dimensions involved stay at desk scale
//! (`d^N` for a handful of sites), so no attempt is made at blocking or
//! sparse representations.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Default absolute threshold for the Hermiticity pre-check.
pub const DEFAULT_HERMITIAN_TOL: f64 = 1e-10;

/// Combined absolute/relative tolerance: `|a - b| <= atol + rtol * |b|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    pub atol: f64,
    pub rtol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            atol: 1e-12,
            rtol: 1e-10,
        }
    }
}

impl Tolerance {
    pub fn new(atol: f64, rtol: f64) -> Self {
        Self { atol, rtol }
    }

    pub fn close(&self, a: C64, b: C64) -> bool {
        (a - b).norm() <= self.atol + self.rtol * b.norm()
    }
}

/// Dense complex matrix, row-major.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixRepr", into = "MatrixRepr")]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<C64>,
}

/// JSON form: `{"rows": r, "cols": c, "entries": [[re, im], ...]}`.
#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    rows: usize,
    cols: usize,
    entries: Vec<[f64; 2]>,
}

impl TryFrom<MatrixRepr> for ComplexMatrix {
    type Error = Error;

    fn try_from(repr: MatrixRepr) -> Result<Self> {
        let entries = repr
            .entries
            .into_iter()
            .map(|[re, im]| C64::new(re, im))
            .collect();
        ComplexMatrix::new(repr.rows, repr.cols, entries)
    }
}

impl From<ComplexMatrix> for MatrixRepr {
    fn from(m: ComplexMatrix) -> Self {
        MatrixRepr {
            rows: m.rows,
            cols: m.cols,
            entries: m.entries.into_iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.entries[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.entries[r * self.cols + c]
    }
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if entries.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    /// Builds a matrix from real row-major entries.
    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        Self::new(
            rows,
            cols,
            entries.iter().map(|&x| C64::new(x, 0.0)).collect(),
        )
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            entries: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &z) in diag.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let diag: Vec<C64> = diag.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_diagonal(&diag)
    }

    /// `|u⟩⟨v|`.
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        let mut m = Self::zeros(u.len(), v.len());
        for (r, &ur) in u.iter().enumerate() {
            for (c, &vc) in v.iter().enumerate() {
                m[(r, c)] = ur * vc.conj();
            }
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Side length of a square matrix.
    pub fn side(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::Dimension(format!(
                "expected a square matrix, got {}x{}",
                self.rows, self.cols
            )))
        }
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[(c, r)] = self[(r, c)].conj();
            }
        }
        out
    }

    /// Entrywise complex conjugate (no transpose).
    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|&z| z * s).collect(),
        }
    }

    /// Sum of diagonal entries; divided by the side length when `normalized`.
    pub fn trace(&self, normalized: bool) -> Result<C64> {
        let n = self.side()?;
        let sum = (0..n).fold(ZERO, |acc, i| acc + self[(i, i)]);
        Ok(if normalized { sum / n as f64 } else { sum })
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == ZERO {
                    continue;
                }
                let row = &other.entries[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.entries[r * other.cols..(r + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension(format!(
                "shape mismatch: {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    /// Largest entry modulus.
    pub fn max_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `max |M - M†|` entrywise.
    pub fn hermiticity_defect(&self) -> Result<f64> {
        let n = self.side()?;
        let mut worst = 0.0f64;
        for r in 0..n {
            for c in r..n {
                worst = worst.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        Ok(worst)
    }

    /// Entrywise comparison under the combined tolerance.
    pub fn approx_eq(&self, other: &Self, tol: Tolerance) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self
                .entries
                .iter()
                .zip(&other.entries)
                .all(|(&a, &b)| tol.close(a, b))
    }
}

/// Local dimension and number of tensor factors of a multi-site operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SiteDims {
    pub d: usize,
    pub n_sites: usize,
}

impl SiteDims {
    pub fn new(d: usize, n_sites: usize) -> Result<Self> {
        if d == 0 || n_sites == 0 {
            return Err(Error::Argument(format!(
                "local dimension and site count must be positive (d={d}, n_sites={n_sites})"
            )));
        }
        Ok(Self { d, n_sites })
    }

    /// `d^n_sites`, the side length of a dense operator on all sites.
    pub fn side(&self) -> Result<usize> {
        checked_pow(self.d, self.n_sites)
    }
}

pub(crate) fn checked_pow(base: usize, exp: usize) -> Result<usize> {
    u32::try_from(exp)
        .ok()
        .and_then(|e| base.checked_pow(e))
        .ok_or_else(|| Error::Resource(format!("{base}^{exp} overflows the index range")))
}

pub fn dagger(m: &ComplexMatrix) -> ComplexMatrix {
    m.dagger()
}

pub fn trace(m: &ComplexMatrix, normalized: bool) -> Result<C64> {
    m.trace(normalized)
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let mut out = ComplexMatrix::zeros(rows, cols);
    for ar in 0..a.rows {
        for ac in 0..a.cols {
            let s = a[(ar, ac)];
            if s == ZERO {
                continue;
            }
            for br in 0..b.rows {
                for bc in 0..b.cols {
                    out[(ar * b.rows + br, ac * b.cols + bc)] = s * b[(br, bc)];
                }
            }
        }
    }
    out
}

/// Left-to-right product `ms[0] · ms[1] · … · ms[n-1]` of equally sized square matrices.
pub fn chain_product<'a, I>(ms: I) -> Result<ComplexMatrix>
where
    I: IntoIterator<Item = &'a ComplexMatrix>,
{
    let mut iter = ms.into_iter();
    let first = iter
        .next()
        .ok_or_else(|| Error::Argument("chain product of an empty sequence".into()))?;
    let side = first.side()?;
    let mut acc = first.clone();
    for m in iter {
        if m.side()? != side {
            return Err(Error::Dimension(format!(
                "chain product mixes side lengths {side} and {}",
                m.rows
            )));
        }
        acc = acc.matmul(m)?;
    }
    Ok(acc)
}

/// Traces out the last `k` of `dims.n_sites` tensor factors of `m`.
///
/// With `normalized = true` each traced factor contributes the normalized
/// trace `Tr(X) = (1/d) Σ_i ⟨i|X|i⟩`, so `A ⊗ 1` maps back to `A`. With
/// `normalized = false` the unnormalized trace of `m` is preserved, which is
/// what density-matrix reductions need.
pub fn partial_trace_last(
    m: &ComplexMatrix,
    dims: SiteDims,
    k: usize,
    normalized: bool,
) -> Result<ComplexMatrix> {
    if k == 0 || k >= dims.n_sites {
        return Err(Error::Argument(format!(
            "can only trace out 1..{} of {} sites, got k={k}",
            dims.n_sites - 1,
            dims.n_sites
        )));
    }
    let side = m.side()?;
    let expected = dims.side()?;
    if side != expected {
        return Err(Error::Dimension(format!(
            "side {side} is not {}^{} = {expected}",
            dims.d, dims.n_sites
        )));
    }
    let traced = checked_pow(dims.d, k)?;
    let kept = side / traced;
    let mut out = ComplexMatrix::zeros(kept, kept);
    for a in 0..kept {
        for b in 0..kept {
            let mut acc = ZERO;
            for t in 0..traced {
                acc += m[(a * traced + t, b * traced + t)];
            }
            out[(a, b)] = acc;
        }
    }
    if normalized {
        out = out.scale(C64::new(1.0 / traced as f64, 0.0));
    }
    Ok(out)
}

/// Eigenvalues of a Hermitian matrix in descending order.
///
/// `m` must satisfy `max |M - M†| <= tol`. The Hermitian part `H = A + iB`
/// is embedded as the real symmetric matrix `[[A, -B], [B, A]]`, whose
/// spectrum is that of `H` with every eigenvalue doubled, and diagonalized
/// with cyclic Jacobi rotations.
pub fn hermitian_eigenvalues(m: &ComplexMatrix, tol: f64) -> Result<Vec<f64>> {
    let n = m.side()?;
    let defect = m.hermiticity_defect()?;
    if defect > tol {
        return Err(Error::Validation(format!(
            "matrix is not Hermitian: max |M - M†| = {defect:e} > {tol:e}"
        )));
    }
    let size = 2 * n;
    let mut a = vec![0.0f64; size * size];
    for r in 0..n {
        for c in 0..n {
            let h = 0.5 * (m[(r, c)] + m[(c, r)].conj());
            a[r * size + c] = h.re;
            a[(r + n) * size + (c + n)] = h.re;
            a[(r + n) * size + c] = h.im;
            a[r * size + (c + n)] = -h.im;
        }
    }
    jacobi_symmetric(&mut a, size);
    let mut diag: Vec<f64> = (0..size).map(|i| a[i * size + i]).collect();
    diag.sort_by(|x, y| y.total_cmp(x));
    Ok(diag.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect())
}

/// In-place cyclic Jacobi diagonalization of a real symmetric `n x n` matrix.
fn jacobi_symmetric(a: &mut [f64], n: usize) {
    const MAX_SWEEPS: usize = 100;
    let total: f64 = a.iter().map(|x| x * x).sum();
    if total == 0.0 {
        return;
    }
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|r| (0..n).filter(move |&c| c != r).map(move |c| (r, c)))
            .map(|(r, c)| a[r * n + c] * a[r * n + c])
            .sum();
        if off <= total * 1e-30 {
            return;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                if apq == 0.0 {
                    continue;
                }
                // negligible against both diagonal entries
                if app.abs() + 1e3 * apq.abs() == app.abs()
                    && aqq.abs() + 1e3 * apq.abs() == aqq.abs()
                {
                    a[p * n + q] = 0.0;
                    a[q * n + p] = 0.0;
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
            }
        }
    }
}
