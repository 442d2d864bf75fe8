//! Brute-force oracles shared by the integration tests. None of these call
//! into the decoder internals they check.
#![allow(dead_code)]

use rand::Rng;
use toric_nbm::{Pauli, PauliVector, SparseCheckMatrix, Syndrome};

pub fn rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}

fn anticommute(a: Pauli, b: Pauli) -> bool {
    (a.x() && b.z()) ^ (a.z() && b.x())
}

/// Exact posterior marginals `P(e_i | s)` by enumerating all `4^n` errors.
pub fn brute_posteriors(h: &SparseCheckMatrix, s: &Syndrome, prior: [f64; 4]) -> Vec<[f64; 4]> {
    let n = h.num_qubits();
    assert!(n <= 9);
    let mut acc = vec![[0.0; 4]; n];
    let mut total = 0.0;
    let mut ops = vec![Pauli::I; n];
    for code in 0..4usize.pow(n as u32) {
        let mut c = code;
        let mut p = 1.0;
        for op in ops.iter_mut() {
            *op = Pauli::from_index(c % 4);
            p *= prior[c % 4];
            c /= 4;
        }
        let ok = h.rows().iter().enumerate().all(|(j, row)| {
            let parity = row.iter().filter(|&&(q, rp)| anticommute(ops[q], rp)).count() % 2;
            parity as u8 == s.get(j)
        });
        if !ok {
            continue;
        }
        total += p;
        for (a, op) in acc.iter_mut().zip(&ops) {
            a[op.index()] += p;
        }
    }
    acc.iter().map(|a| a.map(|x| x / total)).collect()
}

/// Random check matrix whose Tanner graph is a forest: every new check
/// joins qubits from distinct connected components. Checks have weight at
/// least 2 (a weight-1 check pins its qubit and the message clamp then
/// shows up at the 1e-9 level).
pub fn random_acyclic(rng: &mut impl Rng, n: usize) -> SparseCheckMatrix {
    let mut comp: Vec<usize> = (0..n).collect();
    let find = |comp: &mut Vec<usize>, mut x: usize| {
        while comp[x] != x {
            comp[x] = comp[comp[x]];
            x = comp[x];
        }
        x
    };
    let mut rows = Vec::new();
    let checks = rng.random_range(1..=n);
    for _ in 0..checks {
        let want = rng.random_range(2..=4usize.min(n));
        let mut row: Vec<(usize, Pauli)> = Vec::new();
        let mut roots: Vec<usize> = Vec::new();
        for _ in 0..4 * n {
            if row.len() == want {
                break;
            }
            let q = rng.random_range(0..n);
            let r = find(&mut comp, q);
            if roots.contains(&r) {
                continue;
            }
            roots.push(r);
            row.push((q, Pauli::from_index(rng.random_range(1..4))));
        }
        if row.len() < 2 {
            continue;
        }
        for &r in &roots[1..] {
            let a = find(&mut comp, r);
            let b = find(&mut comp, roots[0]);
            comp[a] = b;
        }
        row.sort_unstable_by_key(|x| x.0);
        rows.push(row);
    }
    if rows.is_empty() {
        rows.push(vec![(0, Pauli::X), (1, Pauli::Z)]);
    }
    SparseCheckMatrix::new(n, rows).unwrap()
}

/// Uniformly random Pauli vector.
pub fn random_pauli(rng: &mut impl Rng, n: usize) -> PauliVector {
    PauliVector::from_paulis((0..n).map(|_| Pauli::from_index(rng.random_range(0..4))).collect())
}

/// All-pairs shortest path lengths by Floyd-Warshall.
pub fn floyd(nodes: usize, edges: &[(usize, usize, f64)]) -> Vec<Vec<f64>> {
    let mut d = vec![vec![f64::INFINITY; nodes]; nodes];
    for (v, row) in d.iter_mut().enumerate() {
        row[v] = 0.0;
    }
    for &(a, b, w) in edges {
        if w < d[a][b] {
            d[a][b] = w;
            d[b][a] = w;
        }
    }
    for k in 0..nodes {
        for i in 0..nodes {
            for j in 0..nodes {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

/// Minimum total weight over every perfect pairing of `0..k`.
pub fn brute_pairing(k: usize, dist: &dyn Fn(usize, usize) -> f64) -> f64 {
    fn go(left: &mut Vec<usize>, dist: &dyn Fn(usize, usize) -> f64) -> f64 {
        if left.is_empty() {
            return 0.0;
        }
        let a = left.remove(0);
        let mut best = f64::INFINITY;
        for i in 0..left.len() {
            let b = left.remove(i);
            best = best.min(dist(a, b) + go(left, dist));
            left.insert(i, b);
        }
        left.insert(0, a);
        best
    }
    go(&mut (0..k).collect(), dist)
}
