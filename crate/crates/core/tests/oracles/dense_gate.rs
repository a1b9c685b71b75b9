//! Full-matrix circuit simulation. Every gate is expanded to a `2^n × 2^n`
//! matrix by Kronecker products (qubit 0 is the least significant bit) and
//! each evolution uses `exp(−iφP) = cos φ·I − i sin φ·P`.

use num_complex::Complex64 as C;
use std::f64::consts::PI;

pub type Mat = Vec<Vec<C>>;

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

fn single(p: char) -> [[C; 2]; 2] {
    let (o, z) = (c(1.0, 0.0), c(0.0, 0.0));
    let s = std::f64::consts::FRAC_1_SQRT_2;
    match p {
        'I' => [[o, z], [z, o]],
        'X' => [[z, o], [o, z]],
        'Y' => [[z, c(0.0, -1.0)], [c(0.0, 1.0), z]],
        'Z' => [[o, z], [z, -o]],
        'H' => [[c(s, 0.0), c(s, 0.0)], [c(s, 0.0), c(-s, 0.0)]],
        _ => panic!("unknown gate {p}"),
    }
}

fn kron(a: &Mat, b: &[[C; 2]; 2]) -> Mat {
    let n = a.len();
    let mut out = vec![vec![c(0.0, 0.0); 2 * n]; 2 * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..2 {
                for l in 0..2 {
                    out[2 * i + k][2 * j + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

/// `ops[q]` acts on qubit `q`.
pub fn operator(ops: &[char]) -> Mat {
    let mut m: Mat = vec![vec![c(1.0, 0.0)]];
    for &p in ops.iter().rev() {
        m = kron(&m, &single(p));
    }
    m
}

pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let mut out = vec![vec![c(0.0, 0.0); n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k] == c(0.0, 0.0) {
                continue;
            }
            for j in 0..n {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

fn apply(m: &Mat, v: &[C]) -> Vec<C> {
    m.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

fn evolution(p: &Mat, phi: f64) -> Mat {
    let n = p.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let id = if i == j { c(phi.cos(), 0.0) } else { c(0.0, 0.0) };
                    id + c(0.0, -phi.sin()) * p[i][j]
                })
                .collect()
        })
        .collect()
}

fn subsets(n: usize, k: usize, full: bool) -> Vec<Vec<usize>> {
    if k == 1 {
        return (0..n).map(|q| vec![q]).collect();
    }
    if !full {
        return (0..n + 1 - k).map(|s| (s..s + k).collect()).collect();
    }
    // lexicographic k-subsets by counting bitmasks in lexicographic order
    let mut out: Vec<Vec<usize>> = (0u32..1 << n)
        .filter(|m| m.count_ones() as usize == k)
        .map(|m| (0..n).filter(|q| m & (1 << q) != 0).collect())
        .collect();
    out.sort();
    out
}

/// Pauli labels per repetition; `ZZ` family is `["Z", "ZZ"]`, `Z` is `["Z"]`.
pub fn state(z: &[f64], labels: &[&str], reps: usize, full: bool) -> Vec<C> {
    let n = z.len();
    let dim = 1 << n;
    let mut psi = vec![c(0.0, 0.0); dim];
    psi[0] = c(1.0, 0.0);
    let h_all = operator(&vec!['H'; n]);
    for _ in 0..reps {
        psi = apply(&h_all, &psi);
        for label in labels {
            let chars: Vec<char> = label.chars().collect();
            if chars.len() > n {
                continue;
            }
            for qs in subsets(n, chars.len(), full) {
                let mut ops = vec!['I'; n];
                for (&q, &p) in qs.iter().zip(&chars) {
                    ops[q] = p;
                }
                let phi = if qs.len() == 1 {
                    z[qs[0]]
                } else {
                    qs.iter().map(|&q| PI - z[q]).product()
                };
                psi = apply(&evolution(&operator(&ops), phi), &psi);
            }
        }
    }
    psi
}

pub fn fidelity(z1: &[f64], z2: &[f64], labels: &[&str], reps: usize, full: bool) -> f64 {
    let a = state(z1, labels, reps, full);
    let b = state(z2, labels, reps, full);
    a.iter().zip(&b).map(|(x, y)| x.conj() * y).sum::<C>().norm_sqr()
}
