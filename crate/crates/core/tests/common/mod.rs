//! Seeded instance generators and independent reference implementations
//! shared by the integration tests.

#![allow(dead_code)]

use hyperlap::{CubicalTensor, Hyperedge, Hypergraph};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Directed `k`-uniform hypergraph on `n` nodes with positive weights. Every
/// node `i` owns an edge whose heads include `i + 1 mod n`, so the influence
/// digraph contains a Hamiltonian cycle and is strongly connected.
pub fn strongly_connected_signless(rng: &mut ChaCha8Rng, k: usize, n: usize) -> Hypergraph {
    let mut edges = Vec::new();
    for i in 0..n {
        let mut heads = vec![(i + 1) % n];
        heads.extend((1..k - 1).map(|_| rng.gen_range(0..n)));
        heads.shuffle(rng);
        edges.push(Hyperedge::directed(i, heads, rng.gen_range(0.5..2.0)));
    }
    for _ in 0..rng.gen_range(0..2 * n) {
        let tail = rng.gen_range(0..n);
        let heads = (1..k).map(|_| rng.gen_range(0..n)).collect();
        edges.push(Hyperedge::directed(tail, heads, rng.gen_range(0.1..3.0)));
    }
    Hypergraph::new(n, true, edges).unwrap()
}

/// Unweighted undirected `k`-uniform hypergraph with distinct edges.
pub fn unweighted_undirected(rng: &mut ChaCha8Rng, k: usize, n: usize, edges: usize) -> Hypergraph {
    let nodes: Vec<usize> = (0..n).collect();
    let mut sets: Vec<Vec<usize>> = Vec::new();
    while sets.len() < edges {
        let mut s: Vec<usize> = nodes.choose_multiple(rng, k).copied().collect();
        s.sort_unstable();
        if !sets.contains(&s) {
            sets.push(s);
        }
    }
    Hypergraph::new(n, false, sets.into_iter().map(|s| Hyperedge::undirected(s, 1.0)).collect()).unwrap()
}

pub fn random_sigma(rng: &mut ChaCha8Rng, n: usize) -> Vec<i8> {
    let mut s: Vec<i8> = (0..n).map(|_| if rng.gen_bool(0.5) { 1 } else { -1 }).collect();
    s[0] = 1;
    s
}

fn tuple_sign(sigma: &[i8], tuple: &[usize]) -> f64 {
    tuple.iter().map(|&i| f64::from(sigma[i])).product()
}

/// Random directed signed hypergraph with orders drawn from `orders`. With
/// `planted = Some(sigma)` every sign follows `sigma`; otherwise signs are random.
/// `m` is capped at the number of distinct tuples available.
pub fn signed_hypergraph(
    rng: &mut ChaCha8Rng,
    n: usize,
    m: usize,
    orders: &[usize],
    planted: Option<&[i8]>,
) -> Hypergraph {
    let mut distinct = orders.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    let m = m.min(distinct.iter().map(|&k| n.pow(k as u32)).sum());
    let mut edges = Vec::new();
    let mut seen = Vec::new();
    while edges.len() < m {
        let k = *orders.choose(rng).unwrap();
        let tuple: Vec<usize> = (0..k).map(|_| rng.gen_range(0..n)).collect();
        if seen.contains(&tuple) {
            continue;
        }
        seen.push(tuple.clone());
        let mag = rng.gen_range(0.5..2.0);
        let sign = match planted {
            Some(s) => tuple_sign(s, &tuple),
            None => {
                if rng.gen_bool(0.5) {
                    1.0
                } else {
                    -1.0
                }
            }
        };
        edges.push(Hyperedge::directed(tuple[0], tuple[1..].to_vec(), sign * mag));
    }
    Hypergraph::new(n, true, edges).unwrap()
}

/// Signed `k`-uniform hypergraph balanced by `sigma` whose absolute pattern
/// is strongly connected.
pub fn balanced_connected(rng: &mut ChaCha8Rng, k: usize, n: usize, sigma: &[i8]) -> Hypergraph {
    let base = strongly_connected_signless(rng, k, n);
    let edges = base
        .edges()
        .iter()
        .map(|e| Hyperedge::directed(e.tail.unwrap(), e.members.clone(), e.weight * tuple_sign(sigma, &e.tuple())))
        .collect();
    Hypergraph::new(n, true, edges).unwrap()
}

/// Exhaustive search over all `2^n` sign vectors for one satisfying every
/// edge's product constraint.
pub fn brute_force_balance(h: &Hypergraph) -> Option<Vec<i8>> {
    let n = h.n();
    (0u32..1 << n)
        .map(|mask| (0..n).map(|i| if mask >> i & 1 == 1 { -1 } else { 1 }).collect::<Vec<i8>>())
        .find(|sigma| satisfies_products(h, sigma))
}

pub fn satisfies_products(h: &Hypergraph, sigma: &[i8]) -> bool {
    h.edges().iter().all(|e| {
        let mut t = e.members.clone();
        t.extend(e.tail);
        tuple_sign(sigma, &t) * e.weight > 0.0
    })
}

/// Random tensor with entries in `[lo, hi)` at roughly `density` of all positions.
pub fn random_tensor(rng: &mut ChaCha8Rng, k: usize, n: usize, density: f64, lo: f64, hi: f64) -> CubicalTensor {
    let total = n.pow(k as u32);
    let mut entries = Vec::new();
    for mut code in 0..total {
        if !rng.gen_bool(density) {
            continue;
        }
        let mut idx = vec![0; k];
        for slot in idx.iter_mut().rev() {
            *slot = code % n;
            code /= n;
        }
        entries.push((idx, rng.gen_range(lo..hi)));
    }
    CubicalTensor::from_entries(k, n, entries).unwrap()
}

/// Direct evaluation of `(T x^{k-1})_i = sum T[i, j2..jk] x_j2 .. x_jk` over every index.
pub fn naive_apply(t: &CubicalTensor, x: &[f64]) -> Vec<f64> {
    let (k, n) = (t.order(), t.dim());
    let mut out = vec![0.0; n];
    let mut idx = vec![0usize; k];
    loop {
        let w = t.get(&idx);
        if w != 0.0 {
            out[idx[0]] += w * idx[1..].iter().map(|&j| x[j]).product::<f64>();
        }
        let mut p = k;
        loop {
            if p == 0 {
                return out;
            }
            p -= 1;
            idx[p] += 1;
            if idx[p] < n {
                break;
            }
            idx[p] = 0;
        }
    }
}

/// Reducibility by definition: a nonempty proper `I` with
/// `T[i1, i2..ik] = 0` whenever `i1 in I` and every `ij` lies outside `I`.
pub fn reducible_by_definition(t: &CubicalTensor) -> bool {
    let n = t.dim();
    (1u32..(1 << n) - 1).any(|mask| {
        let inside = |i: usize| mask >> i & 1 == 1;
        t.entries()
            .all(|(idx, _)| !(inside(idx[0]) && idx[1..].iter().all(|&j| !inside(j))))
    })
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
pub fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Newton's method on `A x^{k-1} - lambda x^{[k-1]} = 0`, `sum x = 1`, from
/// `x = 1/n` and `lambda` = mean row sum. Uses a central-difference Jacobian.
pub fn newton_eigenpair(a: &CubicalTensor) -> Option<(f64, Vec<f64>)> {
    let n = a.dim();
    let p = a.order() as i32 - 1;
    let residual = |z: &[f64]| -> Vec<f64> {
        let (x, lam) = (&z[..n], z[n]);
        let ax = naive_apply(a, x);
        let mut r: Vec<f64> = (0..n).map(|i| ax[i] - lam * x[i].powi(p)).collect();
        r.push(x.iter().sum::<f64>() - 1.0);
        r
    };
    let rows = naive_apply(a, &vec![1.0; n]);
    let mut z: Vec<f64> = vec![1.0 / n as f64; n];
    z.push(rows.iter().sum::<f64>() / n as f64);
    for _ in 0..100 {
        let r = residual(&z);
        if r.iter().all(|v| v.abs() < 1e-15) {
            break;
        }
        let h = 1e-7;
        let mut jac = vec![vec![0.0; n + 1]; n + 1];
        for c in 0..=n {
            let mut zp = z.clone();
            let mut zm = z.clone();
            zp[c] += h;
            zm[c] -= h;
            let (rp, rm) = (residual(&zp), residual(&zm));
            for row in 0..=n {
                jac[row][c] = (rp[row] - rm[row]) / (2.0 * h);
            }
        }
        let step = solve_dense(jac, r.iter().map(|v| -v).collect())?;
        z.iter_mut().zip(&step).for_each(|(zi, s)| *zi += s);
    }
    let lam = z.pop()?;
    Some((lam, z))
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}
