//! Oracles and generators shared by the integration tests.
#![allow(dead_code)]

use crn_core::fock::{BoundaryPolicy, TruncationBox};
use crn_core::net::{Network, Transition};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type Dense = Vec<Vec<f64>>;

/// Dense creation operator built straight from the ladder definition.
pub fn dense_creation(i: usize, space: &TruncationBox) -> Dense {
    let d = space.len();
    let mut m = vec![vec![0.0; d]; d];
    for (col, n) in space.states().enumerate() {
        let mut up = n.clone();
        up[i] += 1;
        if let Some(row) = space.index(&up) {
            m[row][col] = 1.0;
        }
    }
    m
}

pub fn dense_annihilation(i: usize, space: &TruncationBox) -> Dense {
    let d = space.len();
    let mut m = vec![vec![0.0; d]; d];
    for (col, n) in space.states().enumerate() {
        if n[i] > 0 {
            let mut down = n.clone();
            down[i] -= 1;
            m[space.index(&down).unwrap()][col] = n[i] as f64;
        }
    }
    m
}

pub fn identity(d: usize) -> Dense {
    (0..d).map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
}

pub fn matmul(a: &Dense, b: &Dense) -> Dense {
    let d = a.len();
    let mut c = vec![vec![0.0; d]; d];
    for i in 0..d {
        for k in 0..d {
            if a[i][k] != 0.0 {
                for j in 0..d {
                    c[i][j] += a[i][k] * b[k][j];
                }
            }
        }
    }
    c
}

/// `prod_i op_i^{p_i}` for one ladder family.
pub fn ladder_power(p: &[u64], space: &TruncationBox, make: fn(usize, &TruncationBox) -> Dense) -> Dense {
    let mut m = identity(space.len());
    for (i, &e) in p.iter().enumerate() {
        let op = make(i, space);
        for _ in 0..e {
            m = matmul(&op, &m);
        }
    }
    m
}

/// `sum_τ r(τ) (a†^t - a†^s) a^s`, composing dense ladder matrices.
///
/// Under the pair policy a column keeps its loss term only when the gain
/// composition for that column survived the truncation.
pub fn dense_hamiltonian(net: &Network<f64>, space: &TruncationBox, policy: BoundaryPolicy) -> Dense {
    let d = space.len();
    let mut h = vec![vec![0.0; d]; d];
    for t in net.transitions() {
        let lower = ladder_power(&t.input.0, space, dense_annihilation);
        let gain = matmul(&ladder_power(&t.output.0, space, dense_creation), &lower);
        let loss = matmul(&ladder_power(&t.input.0, space, dense_creation), &lower);
        for col in 0..d {
            let survived = (0..d).any(|row| gain[row][col] != 0.0);
            for row in 0..d {
                h[row][col] += t.rate * gain[row][col];
                if survived || policy == BoundaryPolicy::Leak {
                    h[row][col] -= t.rate * loss[row][col];
                }
            }
        }
    }
    h
}

pub fn max_abs_diff(a: &Dense, b: &Dense) -> f64 {
    a.iter().zip(b).flat_map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| (x - y).abs())).fold(0.0, f64::max)
}

/// Rank of an integer matrix by fraction-free Bareiss elimination in i128.
pub fn bareiss_rank(m: &[Vec<i64>]) -> usize {
    let mut a: Vec<Vec<i128>> = m.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut rank = 0;
    let mut prev = 1i128;
    for c in 0..cols {
        let Some(p) = (rank..rows).find(|&r| a[r][c] != 0) else { continue };
        a.swap(rank, p);
        for r in rank + 1..rows {
            for j in c + 1..cols {
                a[r][j] = (a[rank][c] * a[r][j] - a[r][c] * a[rank][j]) / prev;
            }
            a[r][c] = 0;
        }
        prev = a[rank][c];
        rank += 1;
    }
    rank
}

/// Connected components of the undirected reaction graph on complexes, by BFS.
pub fn count_linkage_classes(net: &Network<f64>) -> usize {
    let complexes = net.complexes();
    let idx = |c| complexes.iter().position(|x| x == c).unwrap();
    let mut adj = vec![Vec::new(); complexes.len()];
    for t in net.transitions() {
        let (a, b) = (idx(&t.input), idx(&t.output));
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut seen = vec![false; complexes.len()];
    let mut classes = 0;
    for s in 0..complexes.len() {
        if seen[s] {
            continue;
        }
        classes += 1;
        let mut queue = std::collections::VecDeque::from([s]);
        seen[s] = true;
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
    }
    classes
}

const NAMES: [&str; 8] = ["A", "B", "X1", "X2", "Y_2", "foo", "C3", "_z"];

fn random_rate(rng: &mut ChaCha8Rng) -> f64 {
    match rng.gen_range(0..5) {
        0 => rng.gen_range(1..100) as f64,
        1 => rng.gen_range(1e-3..1e3),
        2 => 10f64.powi(rng.gen_range(-12..25)) * rng.gen_range(1.0..10.0),
        3 => rng.gen_range(0..1000) as f64 / 8.0 + 0.125,
        _ => f64::from_bits(rng.gen_range(0x3F00_0000_0000_0000..0x4100_0000_0000_0000)),
    }
}

/// Arbitrary unlabeled network with up to 4 species and 6 transitions.
pub fn random_network(rng: &mut ChaCha8Rng) -> Network<f64> {
    let k = rng.gen_range(1..=4);
    let species: Vec<String> = NAMES.choose_multiple(rng, k).map(|s| s.to_string()).collect();
    let count = rng.gen_range(0..=6);
    let complex = |rng: &mut ChaCha8Rng| -> Vec<u64> {
        (0..k).map(|_| if rng.gen_bool(0.5) { 0 } else { rng.gen_range(1..=3) }).collect()
    };
    let transitions = (0..count)
        .map(|_| {
            let input = complex(rng);
            let output = complex(rng);
            Transition::new(input, output, random_rate(rng))
        })
        .collect();
    Network::new(species, transitions).unwrap()
}

/// Network built from flux cycles through random complexes, so that `c` is
/// complex balanced by construction: along each cycle every edge `y -> y'`
/// carries the same flux `phi`, i.e. its rate is `phi / c^y`.
pub fn balanced_network(rng: &mut ChaCha8Rng) -> (Network<f64>, Vec<f64>) {
    let k = rng.gen_range(1..=3);
    let c: Vec<f64> = (0..k).map(|_| rng.gen_range(0.3..3.0)).collect();
    let target = rng.gen_range(2..=6).min(3usize.pow(k as u32));
    let mut pool: Vec<Vec<u64>> = Vec::new();
    while pool.len() < target {
        let y: Vec<u64> = (0..k).map(|_| rng.gen_range(0..=2)).collect();
        if !pool.contains(&y) {
            pool.push(y);
        }
    }
    let monomial = |y: &[u64]| y.iter().zip(&c).map(|(&e, &ci)| ci.powi(e as i32)).product::<f64>();
    let mut transitions = Vec::new();
    for _ in 0..rng.gen_range(1..=3) {
        let len = rng.gen_range(2..=pool.len());
        let cycle: Vec<&Vec<u64>> = pool.choose_multiple(rng, len).collect();
        let phi = rng.gen_range(0.1..2.0);
        for i in 0..len {
            let (y, next) = (cycle[i], cycle[(i + 1) % len]);
            transitions.push(Transition::new(y.clone(), next.clone(), phi / monomial(y)));
        }
    }
    let species = (0..k).map(|i| format!("S{i}")).collect();
    (Network::new(species, transitions).unwrap(), c)
}

/// Number of ordered ways to draw `s_i` distinct individuals of each species
/// from `n_i`, counted by walking every injective assignment.
pub fn enumerate_selections(n: &[u64], s: &[u64]) -> u64 {
    fn injective(pool: u64, slots: u64, used: &mut Vec<bool>) -> u64 {
        if slots == 0 {
            return 1;
        }
        let mut total = 0;
        for i in 0..pool as usize {
            if !used[i] {
                used[i] = true;
                total += injective(pool, slots - 1, used);
                used[i] = false;
            }
        }
        total
    }
    n.iter().zip(s).map(|(&ni, &si)| injective(ni, si, &mut vec![false; ni as usize])).product()
}
