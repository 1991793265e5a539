//! Independent oracles and seeded instance families shared by the
//! integration tests and the acceptance suite.
#![allow(dead_code)]

use pseudoeig::matgen::{jordan_matrix, GeneratedMatrix, JordanSpec};
use pseudoeig::{Complex64, ComplexMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Singular values by one-sided Jacobi rotations on the columns, descending.
/// Shares no code with the library's Golub-Kahan path.
pub fn jacobi_singular_values(a: &ComplexMatrix) -> Vec<f64> {
    let n = a.n();
    let mut cols: Vec<Vec<Complex64>> = (0..n).map(|j| (0..n).map(|i| a.get(i, j)).collect()).collect();
    for _ in 0..60 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = cols[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = cols[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma: Complex64 = cols[p].iter().zip(&cols[q]).map(|(x, y)| x.conj() * y).sum();
                let g = gamma.norm();
                if g == 0.0 || g <= 1e-16 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = if zeta >= 0.0 { 1.0 } else { -1.0 } / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                let e = gamma / g;
                // two columns of the same Vec change together
                #[allow(clippy::needless_range_loop)]
                for i in 0..n {
                    let x = cols[p][i];
                    let y = cols[q][i];
                    cols[p][i] = x * cs - y * e.conj() * sn;
                    cols[q][i] = x * e * sn + y * cs;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut s: Vec<f64> = cols
        .iter()
        .map(|col| col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

pub fn jacobi_sigma0(a: &ComplexMatrix, mu: Complex64) -> f64 {
    let s = jacobi_singular_values(&pseudoeig::linalg::shifted(a, mu));
    *s.last().unwrap()
}

/// Eigenvalues from nalgebra's complex Schur form.
pub fn schur_eigenvalues(a: &ComplexMatrix) -> Vec<Complex64> {
    let t = a.to_dmatrix().schur().unpack().1;
    (0..a.n()).map(|i| t[(i, i)]).collect()
}

pub fn min_distance(z: Complex64, eigs: &[Complex64]) -> f64 {
    eigs.iter().map(|l| (z - l).norm()).fold(f64::INFINITY, f64::min)
}

/// Largest distance from a computed eigenvalue to its greedily matched
/// partner in `truth` (both with multiplicity).
pub fn matching_error(computed: &[Complex64], truth: &[Complex64]) -> f64 {
    assert_eq!(computed.len(), truth.len());
    let mut left: Vec<Complex64> = truth.to_vec();
    let mut worst: f64 = 0.0;
    for z in computed {
        let (k, d) = left
            .iter()
            .enumerate()
            .map(|(k, l)| (k, (z - l).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        worst = worst.max(d);
        left.swap_remove(k);
    }
    worst
}

/// Brute-force distance from the eigenvalue of smallest modulus to its
/// nearest other eigenvalue.
pub fn brute_gap(eigs: &[Complex64]) -> f64 {
    let k = (0..eigs.len()).min_by(|&i, &j| eigs[i].norm().total_cmp(&eigs[j].norm())).unwrap();
    (0..eigs.len())
        .filter(|&j| j != k)
        .map(|j| (eigs[j] - eigs[k]).norm())
        .fold(f64::INFINITY, f64::min)
}

pub fn random_point_in_disk<R: Rng>(rng: &mut R, radius: f64) -> Complex64 {
    let r = radius * rng.random::<f64>().sqrt();
    let t = rng.random_range(0.0..std::f64::consts::TAU);
    Complex64::from_polar(r, t)
}

/// Eigenvalues in the disk of radius `radius` with pairwise distance at
/// least `sep`.
pub fn separated_points<R: Rng>(rng: &mut R, count: usize, radius: f64, sep: f64) -> Vec<Complex64> {
    let mut out: Vec<Complex64> = Vec::with_capacity(count);
    while out.len() < count {
        let z = random_point_in_disk(rng, radius);
        if out.iter().all(|w| (z - w).norm() >= sep) {
            out.push(z);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kind {
    Diagonalizable(f64),
    Defective(usize),
}

/// Seeded instance of the given kind and dimension. Defective instances put
/// one block of size `m` first and fill the rest with simple eigenvalues.
pub fn instance(kind: Kind, n: usize, seed: u64) -> GeneratedMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_1234);
    let spec = match kind {
        Kind::Diagonalizable(kappa) => {
            let eigs = separated_points(&mut rng, n, 0.9, 0.05);
            JordanSpec::diagonalizable(eigs, kappa, seed)
        }
        Kind::Defective(m) => {
            assert!(m <= n);
            let eigs = separated_points(&mut rng, n - m + 1, 0.9, 0.05);
            let mut blocks = vec![1; n - m + 1];
            blocks[0] = m;
            JordanSpec::new(eigs, blocks, 2.0, seed)
        }
    };
    jordan_matrix(&spec).expect("valid spec")
}

/// The mixed family: diagonalizable with kappa 1, 5, 20 and defective with
/// m = 2, 3, cycling with the index.
pub fn mixed_instance(index: u64, n_max: usize) -> GeneratedMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(index.wrapping_mul(0x9e37_79b9) ^ 77);
    let kind = match index % 5 {
        0 => Kind::Diagonalizable(1.0),
        1 => Kind::Diagonalizable(5.0),
        2 => Kind::Diagonalizable(20.0),
        3 => Kind::Defective(2),
        _ => Kind::Defective(3),
    };
    let lo = match kind {
        Kind::Defective(m) => m,
        _ => 1,
    };
    let n = rng.random_range(lo.max(2)..=n_max);
    instance(kind, n, index)
}

/// `kappa` and `m` as the solvers should be told for a generated matrix.
pub fn solver_constants(g: &GeneratedMatrix) -> (f64, u32) {
    (g.kappa_jordan.unwrap(), g.m_max.unwrap() as u32)
}

/// Distance bound from an eigenvalue to a shift with smallest singular
/// value `sigma`.
pub fn distance_bound(kappa: f64, m: u32, sigma: f64) -> f64 {
    if m <= 1 {
        kappa * sigma
    } else {
        3.0 * (kappa * sigma).powf(1.0 / m as f64)
    }
}

/// Lower bound on `sigma_0(mu)` for a single Jordan block of size `m`
/// at distance `d`, Kahan's estimate `d^m / (1 + d)^(m-1)`.
pub fn kahan_lower_bound(d: f64, m: u32) -> f64 {
    d.powi(m as i32) / (1.0 + d).powi(m as i32 - 1)
}
