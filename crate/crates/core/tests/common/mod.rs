//! Random systems and independent oracles shared by the integration tests.
#![allow(dead_code)]

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use sentinel_core::polyalg::{Poly, PolyMatrix, Rational, Scalar};
use sentinel_core::security::security_index_md;
use sentinel_core::signals::SignalVector;
use sentinel_core::Error;

pub type Q = Rational;
pub type QMatrix = PolyMatrix<Q>;

pub fn q(v: i64) -> Q {
    Q::from_integer(v.into())
}

pub fn data_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

/// Integer-coefficient polynomial of degree exactly `deg`.
pub fn random_poly(rng: &mut ChaCha8Rng, deg: usize, bound: i64) -> Poly<Q> {
    let mut c: Vec<i64> = (0..=deg).map(|_| rng.gen_range(-bound..=bound)).collect();
    while c[deg] == 0 {
        c[deg] = rng.gen_range(-bound..=bound);
    }
    Poly::from_ints(&c)
}

/// Entry that is zero with probability `1 - density`, else of random degree
/// up to `max_deg`.
pub fn random_entry(rng: &mut ChaCha8Rng, max_deg: usize, density: f64) -> Poly<Q> {
    if rng.gen_bool(density) {
        let d = rng.gen_range(0..=max_deg);
        random_poly(rng, d, 3)
    } else {
        Poly::zero()
    }
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, max_deg: usize, density: f64) -> QMatrix {
    let entries = (0..rows * cols).map(|_| random_entry(rng, max_deg, density)).collect();
    QMatrix::new(rows, cols, entries).unwrap()
}

/// Square kernel with nonzero, non-constant determinant. Column degree caps
/// start at `max_deg` and are lowered until they sum to at most 8, which
/// bounds the determinant degree.
pub fn random_kernel(rng: &mut ChaCha8Rng, n: usize, max_deg: usize, density: f64) -> QMatrix {
    loop {
        let mut caps = vec![max_deg; n];
        while caps.iter().sum::<usize>() > 8 {
            let j = rng.gen_range(0..n);
            caps[j] = caps[j].saturating_sub(1);
        }
        let entries = (0..n * n).map(|k| random_entry(rng, caps[k % n], density)).collect();
        let r = QMatrix::new(n, n, entries).unwrap();
        let det = r.det().unwrap();
        if !det.is_zero() && !det.is_unit() {
            return r;
        }
    }
}

/// Observable `(M, D)` with `D` upper triangular and nonconstant
/// determinant. Some rows of `M` are repeated or zeroed to vary the index.
pub fn random_md(rng: &mut ChaCha8Rng, n: usize, m: usize) -> (QMatrix, QMatrix, usize) {
    loop {
        let mut d = QMatrix::zeros(m, m);
        for i in 0..m {
            let deg = rng.gen_range(1..=2);
            let mut diag = random_poly(rng, deg, 3);
            let lc = diag.leading().unwrap().clone();
            diag = diag.scaled(&(q(1) / lc));
            d.set(i, i, diag);
            for j in i + 1..m {
                d.set(i, j, random_entry(rng, 0, 0.5));
            }
        }
        let mut big_m = random_matrix(rng, n, m, 2, 0.8);
        if rng.gen_bool(0.4) {
            let src = rng.gen_range(0..n);
            let dst = rng.gen_range(0..n);
            for j in 0..m {
                let e = big_m.get(src, j).clone();
                big_m.set(dst, j, e);
            }
        }
        if rng.gen_bool(0.2) {
            let z = rng.gen_range(0..n);
            for j in 0..m {
                big_m.set(z, j, Poly::zero());
            }
        }
        match security_index_md(&big_m, &d) {
            Ok(report) => return (big_m, d, report.index),
            Err(Error::NotObservable | Error::ZeroBehavior | Error::SingularKernel) => continue,
            Err(e) => panic!("unexpected {e}"),
        }
    }
}

/// Attack with iid integer samples (every sample nonzero) on `support`.
pub fn random_attack(rng: &mut ChaCha8Rng, n: usize, support: &[usize], horizon: usize) -> SignalVector<Q> {
    let mut rows = vec![vec![q(0); horizon]; n];
    for &s in support {
        rows[s] = (0..horizon)
            .map(|_| {
                let v: i64 = rng.gen_range(1..=5);
                q(if rng.gen_bool(0.5) { v } else { -v })
            })
            .collect();
    }
    SignalVector::new(rows, 0).unwrap()
}

pub fn random_support(rng: &mut ChaCha8Rng, n: usize, weight: usize) -> Vec<usize> {
    let mut all: Vec<usize> = (0..n).collect();
    all.shuffle(rng);
    let mut s = all[..weight].to_vec();
    s.sort_unstable();
    s
}

pub fn random_ints(rng: &mut ChaCha8Rng, len: usize) -> Vec<Q> {
    (0..len).map(|_| q(rng.gen_range(-4..=4))).collect()
}

/// Determinant by cofactor expansion along the first row.
pub fn laplace_det(m: &QMatrix) -> Poly<Q> {
    let n = m.rows();
    if n == 1 {
        return m.get(0, 0).clone();
    }
    let mut acc = Poly::zero();
    for j in 0..n {
        if m.get(0, j).is_zero() {
            continue;
        }
        let rows: Vec<usize> = (1..n).collect();
        let cols: Vec<usize> = (0..n).filter(|&c| c != j).collect();
        let minor = m.select_rows(&rows).unwrap().select_cols(&cols).unwrap();
        let term = m.get(0, j) * &laplace_det(&minor);
        acc = if j % 2 == 0 { &acc + &term } else { &acc - &term };
    }
    acc
}

/// Polynomial GCD by plain Euclid on monic remainders.
fn euclid(a: &Poly<Q>, b: &Poly<Q>) -> Poly<Q> {
    let (mut x, mut y) = (a.clone(), b.clone());
    while !y.is_zero() {
        let r = x.div_rem(&y).1;
        x = y;
        y = r;
    }
    x
}

/// Left unimodular iff the maximal minors have a nonzero constant GCD.
pub fn minors_gcd_oracle(m: &QMatrix) -> bool {
    let k = m.cols();
    let mut g = Poly::<Q>::zero();
    for rows in (0..m.rows()).combinations(k) {
        let minor = laplace_det(&m.select_rows(&rows).unwrap());
        g = euclid(&g, &minor);
    }
    g.degree() == Some(0)
}

/// Largest `|a - b|` over a window.
pub fn max_abs_diff<F: Scalar>(a: &SignalVector<F>, b: &SignalVector<F>, from: usize, to: usize) -> f64 {
    a.components()
        .iter()
        .zip(b.components())
        .flat_map(|(x, y)| x[from..to].iter().zip(&y[from..to]).map(|(u, v)| (u.clone() - v.clone()).magnitude()))
        .fold(0.0, f64::max)
}
