//! Built-in families: the GHZ chain, a generator of orthogonal-projector
//! families that satisfy both conditions by construction, and random
//! inputs for property tests and sampled checks.

use std::f64::consts::FRAC_1_SQRT_2;

use rand::Rng;

use crate::conditions::{check_consistency, check_normalization, consistency_horizon};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64, ONE, ZERO};
use crate::mps::{MpsFamily, SiteTensors, Tail};
use crate::state::LocalObservable;

/// GHZ family: `A_i^[1] = |i⟩⟨i| / √2`, `A_i^[n] = |i⟩⟨i|` for `n >= 2`.
pub fn ghz_family() -> MpsFamily {
    let s = FRAC_1_SQRT_2;
    let first = SiteTensors::new(vec![
        ComplexMatrix::from_real_diagonal(&[s, 0.0]),
        ComplexMatrix::from_real_diagonal(&[0.0, s]),
    ])
    .expect("2x2 tensors");
    let bulk = SiteTensors::new(vec![
        ComplexMatrix::from_real_diagonal(&[1.0, 0.0]),
        ComplexMatrix::from_real_diagonal(&[0.0, 1.0]),
    ])
    .expect("2x2 tensors");
    MpsFamily::new(2, 2, vec![first, bulk], Tail::RepeatLast).expect("GHZ family is well formed")
}

/// `(1/2)(Π_k ⟨0|X_k|0⟩ + Π_k ⟨1|X_k|1⟩)`, the GHZ state on a product observable.
pub fn ghz_expectation_closed_form(factors: &[ComplexMatrix]) -> Result<C64> {
    let mut up = ONE;
    let mut down = ONE;
    for (k, x) in factors.iter().enumerate() {
        if x.rows() != 2 || x.cols() != 2 {
            return Err(Error::Dimension(format!(
                "factor {k} is {}x{}, expected 2x2",
                x.rows(),
                x.cols()
            )));
        }
        up *= x[(0, 0)];
        down *= x[(1, 1)];
    }
    Ok((up + down) * 0.5)
}

/// Normalization tolerance on `Σ |c_i|²` for projector families.
pub const PROJECTOR_COEFF_TOL: f64 = 1e-12;

/// Parameters of a projector family: rank-one projectors `P_i = |i⟩⟨i|`
/// (`i < d <= m`) weighted by `c_i` on the first site.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectorFamilySpec {
    m: usize,
    d: usize,
    coefficients: Vec<C64>,
}

impl ProjectorFamilySpec {
    pub fn new(m: usize, d: usize, coefficients: Vec<C64>) -> Result<Self> {
        if d == 0 || d > m {
            return Err(Error::Argument(format!(
                "need 1 <= d <= m for mutually orthogonal projectors (d={d}, m={m})"
            )));
        }
        if coefficients.len() != d {
            return Err(Error::Argument(format!(
                "expected {d} first-site coefficients, got {}",
                coefficients.len()
            )));
        }
        let total: f64 = coefficients.iter().map(|c| c.norm_sqr()).sum();
        if (total - 1.0).abs() > PROJECTOR_COEFF_TOL {
            return Err(Error::Validation(format!(
                "first-site coefficients have Σ|c_i|² = {total}, expected 1"
            )));
        }
        Ok(Self { m, d, coefficients })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn coefficients(&self) -> &[C64] {
        &self.coefficients
    }
}

fn basis_projector(m: usize, i: usize) -> ComplexMatrix {
    let mut p = ComplexMatrix::zeros(m, m);
    p[(i, i)] = ONE;
    p
}

/// Site 1 carries `c_i P_i`, every later site `P_i`. Since
/// `P_j P_i = δ_ij P_i`, the consistency sum collapses to its right-hand
/// side and `Σ |Tr(c_i P_i)|² = Σ |c_i|² = 1`.
pub fn projector_family(spec: &ProjectorFamilySpec) -> Result<MpsFamily> {
    let first = SiteTensors::new(
        spec.coefficients
            .iter()
            .enumerate()
            .map(|(i, &c)| basis_projector(spec.m, i).scale(c))
            .collect(),
    )?;
    let bulk = SiteTensors::new((0..spec.d).map(|i| basis_projector(spec.m, i)).collect())?;
    let family = MpsFamily::new(spec.d, spec.m, vec![first, bulk], Tail::RepeatLast)?;

    let norm = check_normalization(&family, PROJECTOR_COEFF_TOL);
    let cons = check_consistency(&family, consistency_horizon(&family), PROJECTOR_COEFF_TOL)?;
    if !norm.pass || !cons.pass {
        return Err(Error::Validation(format!(
            "projector family fails its conditions: normalization {:e}, consistency {:e}",
            norm.max_residual(),
            cons.max_residual()
        )));
    }
    Ok(family)
}

fn unit_square<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.gen::<f64>(), rng.gen::<f64>())
}

fn centered<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// `d x d` matrix with entries uniform in `[-1, 1) + i[-1, 1)`.
pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, d: usize) -> ComplexMatrix {
    let entries = (0..d * d).map(|_| centered(rng)).collect();
    ComplexMatrix::new(d, d, entries).expect("d > 0")
}

/// `(G + G†) / 2` for a random `G`.
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, d: usize) -> ComplexMatrix {
    let g = random_matrix(rng, d);
    g.add(&g.dagger())
        .expect("same shape")
        .scale(C64::new(0.5, 0.0))
}

/// Family with `n_sites` explicit sites of unconstrained tensors, entries
/// uniform in the complex unit square `[0, 1) + i[0, 1)`.
pub fn random_family<R: Rng + ?Sized>(
    rng: &mut R,
    d: usize,
    m: usize,
    n_sites: usize,
    tail: Tail,
) -> Result<MpsFamily> {
    let sites = (0..n_sites)
        .map(|_| {
            SiteTensors::new(
                (0..d)
                    .map(|_| {
                        let entries = (0..m * m).map(|_| unit_square(rng)).collect();
                        ComplexMatrix::new(m, m, entries)
                    })
                    .collect::<Result<Vec<_>>>()?,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    MpsFamily::new(d, m, sites, tail)
}

/// Projector spec with random complex coefficients normalized to `Σ|c_i|² = 1`.
pub fn random_projector_spec<R: Rng + ?Sized>(
    rng: &mut R,
    m: usize,
    d: usize,
) -> Result<ProjectorFamilySpec> {
    let raw: Vec<C64> = (0..d).map(|_| centered(rng)).collect();
    let norm = raw.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let coefficients = if norm > 0.0 {
        raw.into_iter().map(|c| c / norm).collect()
    } else {
        let mut v = vec![ZERO; d];
        v[0] = ONE;
        v
    };
    ProjectorFamilySpec::new(m, d, coefficients)
}

/// Product of random factors, Hermitian ones if `hermitian`.
pub fn random_product_observable<R: Rng + ?Sized>(
    rng: &mut R,
    d: usize,
    n_sites: usize,
    hermitian: bool,
) -> LocalObservable {
    let factors = (0..n_sites)
        .map(|_| {
            if hermitian {
                random_hermitian(rng, d)
            } else {
                random_matrix(rng, d)
            }
        })
        .collect();
    LocalObservable::product(factors).expect("non-empty square factors")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Tolerance;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn diag(a: f64, b: f64) -> ComplexMatrix {
        ComplexMatrix::from_real_diagonal(&[a, b])
    }

    #[test]
    fn ghz_tensors() {
        let f = ghz_family();
        assert_eq!(f.site(1).unwrap().matrices()[0], diag(FRAC_1_SQRT_2, 0.));
        assert_eq!(f.site(9).unwrap().matrices()[1], diag(0., 1.));
        assert!(check_normalization(&f, 1e-15).pass);
        let cons = check_consistency(&f, consistency_horizon(&f), 0.0).unwrap();
        assert!(cons.pass);
    }

    #[test]
    fn ghz_statevector_four_sites() {
        let sv = ghz_family().build_statevector(4, 1 << 10).unwrap();
        for (idx, a) in sv.amplitudes().iter().enumerate() {
            let expected = if idx == 0 || idx == 15 {
                FRAC_1_SQRT_2
            } else {
                0.0
            };
            assert_eq!(*a, C64::new(expected, 0.), "amplitude {idx}");
        }
    }

    #[test]
    fn closed_form_examples() {
        let z = diag(1., -1.);
        let x = ComplexMatrix::from_real(2, 2, &[0., 1., 1., 0.]).unwrap();
        assert_eq!(ghz_expectation_closed_form(&[z.clone(), z]).unwrap(), ONE);
        let ids = vec![ComplexMatrix::identity(2); 5];
        assert_eq!(ghz_expectation_closed_form(&ids).unwrap(), ONE);
        assert_eq!(ghz_expectation_closed_form(&[x.clone(), x]).unwrap(), ZERO);
        assert!(matches!(
            ghz_expectation_closed_form(&[ComplexMatrix::identity(3)]),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn three_level_projector_family() {
        let c = C64::new(1. / 3f64.sqrt(), 0.);
        let spec = ProjectorFamilySpec::new(3, 3, vec![c; 3]).unwrap();
        let f = projector_family(&spec).unwrap();
        let sv = f.build_statevector(2, 1 << 10).unwrap();
        for (idx, a) in sv.amplitudes().iter().enumerate() {
            let expected = if idx % 4 == 0 { c } else { ZERO };
            assert!((a - expected).norm() < 1e-15, "amplitude {idx}: {a}");
        }
    }

    #[test]
    fn two_level_projector_family_is_ghz() {
        let c = C64::new(FRAC_1_SQRT_2, 0.);
        let spec = ProjectorFamilySpec::new(2, 2, vec![c, c]).unwrap();
        assert_eq!(projector_family(&spec).unwrap(), ghz_family());
    }

    #[test]
    fn embedded_projector_family_passes_exactly() {
        let spec =
            ProjectorFamilySpec::new(4, 2, vec![C64::new(0.6, 0.), C64::new(0.8, 0.)]).unwrap();
        let f = projector_family(&spec).unwrap();
        let cons = check_consistency(&f, 4, 0.0).unwrap();
        assert!(cons.pass);
        assert!(cons.residuals.iter().all(|&r| r == 0.0));
    }

    #[test]
    fn projector_spec_errors() {
        let one = vec![ONE, ZERO, ZERO];
        assert!(matches!(
            ProjectorFamilySpec::new(2, 3, one),
            Err(Error::Argument(_))
        ));
        assert!(matches!(
            ProjectorFamilySpec::new(3, 2, vec![ONE, ONE]),
            Err(Error::Validation(_))
        ));
        assert!(matches!(
            ProjectorFamilySpec::new(3, 2, vec![ONE]),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn random_generators_are_seeded() {
        let a = random_family(&mut ChaCha8Rng::seed_from_u64(3), 2, 3, 2, Tail::Finite).unwrap();
        let b = random_family(&mut ChaCha8Rng::seed_from_u64(3), 2, 3, 2, Tail::Finite).unwrap();
        assert_eq!(a, b);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let h = random_hermitian(&mut rng, 3);
        assert!(h.approx_eq(&h.dagger(), Tolerance::default()));
        for _ in 0..20 {
            let spec = random_projector_spec(&mut rng, 5, 3).unwrap();
            assert!(projector_family(&spec).is_ok());
        }
    }
}
