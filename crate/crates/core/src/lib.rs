//! Matrix product states as states on the quasi-local algebra of a spin
//! chain.
//!
//! A family of site tensors `{A_i^[n]}` defines finite states
//! `φ_n(X) = ⟨ψ_{n+1}| X ⊗ 1 |ψ_{n+1}⟩`. When the family satisfies a
//! normalization condition on the first site and an operator consistency
//! identity between neighbouring sites, the sequence is projective and
//! defines a state on the infinite chain. This crate checks those
//! conditions numerically, evaluates the state on local observables by an
//! exact statevector route and a polynomial transfer-operator route,
//! and computes reduced density matrices and their entropies.
//!
//! ```
//! use qlmps::models::ghz_family;
//! use qlmps::state::{evaluate_transfer, LocalObservable};
//! use qlmps::linalg::ComplexMatrix;
//!
//! let z = ComplexMatrix::from_real_diagonal(&[1.0, -1.0]);
//! let zz = LocalObservable::product(vec![z.clone(), z]).unwrap();
//! let value = evaluate_transfer(&ghz_family(), &zz).unwrap().value;
//! assert!((value.re - 1.0).abs() < 1e-12);
//! ```

pub mod conditions;
pub mod error;
pub mod linalg;
pub mod models;
pub mod mps;
pub mod state;

pub use conditions::ConditionReport;
pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, SiteDims, Tolerance, C64};
pub use mps::{MpsFamily, SiteTensors, StateVector, Tail, DEFAULT_STATEVECTOR_CAP};
pub use state::{DensityMatrix, EvaluationReport, LocalObservable, LogBase, Method};
