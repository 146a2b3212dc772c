#![allow(dead_code)]

use qlmps::linalg::{ComplexMatrix, C64, ZERO};
use qlmps::models::random_matrix;
use qlmps::mps::MpsFamily;
use rand::Rng;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn close(a: C64, b: C64, rtol: f64) -> bool {
    (a - b).norm() <= rtol * (1.0 + b.norm())
}

/// Random unitary by Gram-Schmidt on the columns of a random matrix.
pub fn random_unitary<R: Rng>(rng: &mut R, n: usize) -> ComplexMatrix {
    let g = random_matrix(rng, n);
    let mut cols: Vec<Vec<C64>> = Vec::new();
    for j in 0..n {
        let mut v: Vec<C64> = (0..n).map(|i| g[(i, j)]).collect();
        for u in &cols {
            let proj = u
                .iter()
                .zip(&v)
                .fold(ZERO, |acc, (a, b)| acc + a.conj() * b);
            for (vi, ui) in v.iter_mut().zip(u) {
                *vi -= proj * ui;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        cols.push(v.into_iter().map(|z| z / norm).collect());
    }
    let mut u = ComplexMatrix::zeros(n, n);
    for (j, col) in cols.iter().enumerate() {
        for (i, &z) in col.iter().enumerate() {
            u[(i, j)] = z;
        }
    }
    u
}

/// Every `n`-tuple over `0..d`, lexicographic with the first index most significant.
pub fn all_tuples(d: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..d).map(move |i| {
                    let mut t = t.clone();
                    t.push(i);
                    t
                })
            })
            .collect();
    }
    out
}

/// φ(X) straight from the double sum over index tuples
/// `Σ_{i,j,ℓ} conj(Tr(A_i ⋯ A_ℓ)) Tr(A_j ⋯ A_ℓ) ⟨i|X|j⟩`.
pub fn brute_force_expectation(family: &MpsFamily, x: &ComplexMatrix, n: usize) -> C64 {
    let d = family.d();
    let tuples = all_tuples(d, n);
    let mut acc = ZERO;
    for (a, i) in tuples.iter().enumerate() {
        for (b, j) in tuples.iter().enumerate() {
            let w = x[(a, b)];
            if w == ZERO {
                continue;
            }
            for l in 0..d {
                let mut il = i.clone();
                il.push(l);
                let mut jl = j.clone();
                jl.push(l);
                acc += family.amplitude(&il).unwrap().conj() * family.amplitude(&jl).unwrap() * w;
            }
        }
    }
    acc
}
