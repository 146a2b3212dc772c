//! Site-dependent MPS families and the trace-closed amplitudes they define.
//!
//! A family holds, for every site `n = 1, 2, …`, `d` square matrices
//! `A_0^[n], …, A_{d-1}^[n]` of side `m`. Physical indices are 0-based
//! throughout the API and the JSON form (index `i` here is basis state
//! `|i⟩`); site numbers are 1-based. The amplitude of a basis tuple is the
//! unnormalized trace `Tr(A_{i_1}^[1] ⋯ A_{i_n}^[n])`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{chain_product, checked_pow, ComplexMatrix, C64};

/// Default bound on the number of amplitudes a statevector may hold.
pub const DEFAULT_STATEVECTOR_CAP: usize = 1 << 20;

/// How sites beyond the explicitly listed ones resolve.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tail {
    /// Every site past the list reuses the last listed site's tensors.
    RepeatLast,
    /// The family ends at the last listed site.
    Finite,
}

/// The `d` matrices attached to one site.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SiteTensorsRepr", into = "SiteTensorsRepr")]
pub struct SiteTensors {
    matrices: Vec<ComplexMatrix>,
}

#[derive(Serialize, Deserialize)]
struct SiteTensorsRepr {
    matrices: Vec<ComplexMatrix>,
}

impl TryFrom<SiteTensorsRepr> for SiteTensors {
    type Error = Error;

    fn try_from(repr: SiteTensorsRepr) -> Result<Self> {
        SiteTensors::new(repr.matrices)
    }
}

impl From<SiteTensors> for SiteTensorsRepr {
    fn from(s: SiteTensors) -> Self {
        SiteTensorsRepr {
            matrices: s.matrices,
        }
    }
}

impl SiteTensors {
    /// All matrices must be square with a common side.
    pub fn new(matrices: Vec<ComplexMatrix>) -> Result<Self> {
        let first = matrices
            .first()
            .ok_or_else(|| Error::Argument("a site needs at least one matrix".into()))?;
        let m = first.side()?;
        for (i, a) in matrices.iter().enumerate() {
            if a.side()? != m {
                return Err(Error::Dimension(format!(
                    "site matrix {i} has side {} but matrix 0 has side {m}",
                    a.rows()
                )));
            }
        }
        Ok(Self { matrices })
    }

    pub fn matrices(&self) -> &[ComplexMatrix] {
        &self.matrices
    }

    pub fn get(&self, i: usize) -> Option<&ComplexMatrix> {
        self.matrices.get(i)
    }

    /// Local dimension `d`.
    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    /// Bond dimension `m`.
    pub fn bond_dim(&self) -> usize {
        self.matrices[0].rows()
    }
}

/// A family `{A_i^[n]}` described by finitely many sites plus a [`Tail`] rule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FamilyRepr", into = "FamilyRepr")]
pub struct MpsFamily {
    d: usize,
    m: usize,
    tail: Tail,
    sites: Vec<SiteTensors>,
}

#[derive(Serialize, Deserialize)]
struct FamilyRepr {
    d: usize,
    m: usize,
    tail: Tail,
    sites: Vec<SiteTensors>,
}

impl TryFrom<FamilyRepr> for MpsFamily {
    type Error = Error;

    fn try_from(r: FamilyRepr) -> Result<Self> {
        MpsFamily::new(r.d, r.m, r.sites, r.tail)
    }
}

impl From<MpsFamily> for FamilyRepr {
    fn from(f: MpsFamily) -> Self {
        FamilyRepr {
            d: f.d,
            m: f.m,
            tail: f.tail,
            sites: f.sites,
        }
    }
}

impl MpsFamily {
    pub fn new(d: usize, m: usize, sites: Vec<SiteTensors>, tail: Tail) -> Result<Self> {
        if d == 0 || m == 0 {
            return Err(Error::Argument(format!(
                "local and bond dimensions must be positive (d={d}, m={m})"
            )));
        }
        if sites.is_empty() {
            return Err(Error::Argument(
                "a family needs at least one explicit site".into(),
            ));
        }
        for (n, s) in sites.iter().enumerate() {
            if s.len() != d {
                return Err(Error::Dimension(format!(
                    "site {} holds {} matrices, expected d={d}",
                    n + 1,
                    s.len()
                )));
            }
            if s.bond_dim() != m {
                return Err(Error::Dimension(format!(
                    "site {} has bond dimension {}, expected m={m}",
                    n + 1,
                    s.bond_dim()
                )));
            }
        }
        Ok(Self { d, m, tail, sites })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    pub fn explicit_sites(&self) -> &[SiteTensors] {
        &self.sites
    }

    /// Tensors of site `n` (1-based), after applying the tail rule.
    pub fn site(&self, n: usize) -> Result<&SiteTensors> {
        if n == 0 {
            return Err(Error::Range("sites are numbered from 1".into()));
        }
        match self.sites.get(n - 1) {
            Some(s) => Ok(s),
            None => match self.tail {
                Tail::RepeatLast => Ok(self.sites.last().expect("non-empty by construction")),
                Tail::Finite => Err(Error::Range(format!(
                    "site {n} requested but the finite family has {} sites",
                    self.sites.len()
                ))),
            },
        }
    }

    /// Largest site number the family resolves, `None` when unbounded.
    pub fn max_site(&self) -> Option<usize> {
        match self.tail {
            Tail::RepeatLast => None,
            Tail::Finite => Some(self.sites.len()),
        }
    }

    /// Applies `f` to every stored matrix, keeping the tail rule.
    pub fn map_tensors<F>(&self, f: F) -> Result<Self>
    where
        F: Fn(&ComplexMatrix) -> ComplexMatrix,
    {
        let sites = self
            .sites
            .iter()
            .map(|s| SiteTensors::new(s.matrices.iter().map(&f).collect()))
            .collect::<Result<Vec<_>>>()?;
        let m = sites[0].bond_dim();
        Self::new(self.d, m, sites, self.tail)
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.d {
            return Err(Error::Argument(format!(
                "physical index {i} outside 0..{}",
                self.d
            )));
        }
        Ok(())
    }

    /// `Tr(A_{i_1}^[1] A_{i_2}^[2] ⋯ A_{i_n}^[n])` for the 0-based tuple `indices`.
    pub fn amplitude(&self, indices: &[usize]) -> Result<C64> {
        if indices.is_empty() {
            return Err(Error::Argument("amplitude of an empty index tuple".into()));
        }
        let mats = indices
            .iter()
            .enumerate()
            .map(|(k, &i)| {
                self.check_index(i)?;
                Ok(&self.site(k + 1)?.matrices[i])
            })
            .collect::<Result<Vec<_>>>()?;
        chain_product(mats)?.trace(false)
    }

    /// `|ψ_n⟩ = Σ Tr(A_{i_1}^[1] ⋯ A_{i_n}^[n]) |i_1 … i_n⟩`, refusing more than `cap` amplitudes.
    pub fn build_statevector(&self, n: usize, cap: usize) -> Result<StateVector> {
        if n == 0 {
            return Err(Error::Argument(
                "a statevector needs at least one site".into(),
            ));
        }
        let len = checked_pow(self.d, n)?;
        if len > cap {
            return Err(Error::Resource(format!(
                "{}^{n} = {len} amplitudes exceeds the cap of {cap}",
                self.d
            )));
        }
        let sites = (1..=n).map(|k| self.site(k)).collect::<Result<Vec<_>>>()?;
        let d = self.d;
        let amplitudes = (0..len)
            .into_par_iter()
            .map(|flat| {
                let mut digits = vec![0usize; n];
                let mut rest = flat;
                for slot in digits.iter_mut().rev() {
                    *slot = rest % d;
                    rest /= d;
                }
                let mats = digits.iter().zip(&sites).map(|(&i, s)| &s.matrices[i]);
                chain_product(mats).and_then(|p| p.trace(false))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(StateVector {
            n_sites: n,
            d,
            amplitudes,
        })
    }

    /// `‖ψ_n‖²`.
    pub fn norm_squared(&self, n: usize, cap: usize) -> Result<f64> {
        Ok(self.build_statevector(n, cap)?.norm_squared())
    }
}

/// Amplitudes of `|ψ_n⟩` in lexicographic order, `i_1` most significant.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_sites: usize,
    d: usize,
    amplitudes: Vec<C64>,
}

impl StateVector {
    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    /// Flat position of a basis tuple.
    pub fn index_of(&self, indices: &[usize]) -> Result<usize> {
        if indices.len() != self.n_sites {
            return Err(Error::Argument(format!(
                "tuple of length {} for a {}-site state",
                indices.len(),
                self.n_sites
            )));
        }
        indices.iter().try_fold(0usize, |acc, &i| {
            if i >= self.d {
                Err(Error::Argument(format!(
                    "physical index {i} outside 0..{}",
                    self.d
                )))
            } else {
                Ok(acc * self.d + i)
            }
        })
    }

    pub fn norm_squared(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `|ψ⟩⟨ψ|` as a dense matrix.
    pub fn projector(&self) -> ComplexMatrix {
        ComplexMatrix::outer(&self.amplitudes, &self.amplitudes)
    }
}
