//! Graph families and seeded random graphs.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{Arc, WeightedDigraph};

pub fn complete(n: usize) -> Result<WeightedDigraph> {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            edges.push((i, j));
        }
    }
    WeightedDigraph::undirected_unit(n, &edges)
}

/// `K_{r,s}` with `U = 0..r` and `W = r..r+s`.
pub fn complete_bipartite(r: usize, s: usize) -> Result<WeightedDigraph> {
    let mut edges = Vec::new();
    for u in 0..r {
        for w in r..r + s {
            edges.push((u, w));
        }
    }
    WeightedDigraph::undirected_unit(r + s, &edges)
}

pub fn path(n: usize) -> Result<WeightedDigraph> {
    let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
    WeightedDigraph::undirected_unit(n, &edges)
}

pub fn cycle(n: usize) -> Result<WeightedDigraph> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!(
            "cycle needs n >= 3, got {n}"
        )));
    }
    let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    WeightedDigraph::undirected_unit(n, &edges)
}

/// Directed cycle `0 → 1 → … → n−1 → 0`.
pub fn directed_cycle(n: usize) -> Result<WeightedDigraph> {
    let arcs: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    WeightedDigraph::directed_unit(n, &arcs)
}

/// `Q_d`; vertex `v` is the bit string of its index, level = popcount.
pub fn hypercube(d: usize) -> Result<WeightedDigraph> {
    let n = 1usize << d;
    let mut edges = Vec::new();
    for v in 0..n {
        for b in 0..d {
            let w = v ^ (1 << b);
            if v < w {
                edges.push((v, w));
            }
        }
    }
    WeightedDigraph::undirected_unit(n, &edges)
}

/// Mixed-radix index of a toric coordinate; the first coordinate varies
/// fastest.
pub fn toric_index(dims: &[usize], coords: &[usize]) -> usize {
    coords
        .iter()
        .zip(dims)
        .rev()
        .fold(0, |idx, (&c, &n)| idx * n + c)
}

pub fn toric_coords(dims: &[usize], mut idx: usize) -> Vec<usize> {
    dims.iter()
        .map(|&n| {
            let c = idx % n;
            idx /= n;
            c
        })
        .collect()
}

/// Product of cycles `C_{n_1} × … × C_{n_d}`, each `n_t ≥ 3`.
pub fn toric_grid(dims: &[usize]) -> Result<WeightedDigraph> {
    if dims.is_empty() || dims.iter().any(|&n| n < 3) {
        return Err(Error::InvalidArgument(
            "toric grid needs cycle lengths >= 3".into(),
        ));
    }
    let n: usize = dims.iter().product();
    let mut edges = Vec::new();
    for v in 0..n {
        let c = toric_coords(dims, v);
        for t in 0..dims.len() {
            let mut next = c.clone();
            next[t] = (c[t] + 1) % dims[t];
            edges.push((v, toric_index(dims, &next)));
        }
    }
    WeightedDigraph::undirected_unit(n, &edges)
}

/// Uniform random labelled tree from a Prüfer sequence.
pub fn random_tree<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<WeightedDigraph> {
    if n < 2 {
        return Err(Error::InvalidArgument(
            "tree needs at least 2 vertices".into(),
        ));
    }
    if n == 2 {
        return WeightedDigraph::undirected_unit(2, &[(0, 1)]);
    }
    let prufer: Vec<usize> = (0..n - 2).map(|_| rng.random_range(0..n)).collect();
    let mut degree = vec![1usize; n];
    for &v in &prufer {
        degree[v] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    for &v in &prufer {
        let leaf = (0..n).find(|&u| degree[u] == 1).expect("a leaf exists");
        edges.push((leaf, v));
        degree[leaf] -= 1;
        degree[v] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&u| degree[u] == 1).collect();
    edges.push((rest[0], rest[1]));
    WeightedDigraph::undirected_unit(n, &edges)
}

/// Connected undirected graph: a random spanning tree plus each other pair
/// with probability `density`. Weights are uniform in `[0.5, 2)` when
/// `weighted`, else 1.
pub fn random_connected<R: Rng + ?Sized>(
    n: usize,
    density: f64,
    weighted: bool,
    rng: &mut R,
) -> Result<WeightedDigraph> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut present = vec![false; n * n];
    let mut arcs = Vec::new();
    let mut add = |a: usize, b: usize, rng: &mut R| {
        let (a, b) = (a.min(b), a.max(b));
        if !present[a * n + b] {
            present[a * n + b] = true;
            let weight = if weighted {
                rng.random_range(0.5..2.0)
            } else {
                1.0
            };
            arcs.push(Arc {
                source: a,
                target: b,
                weight,
            });
        }
    };
    for k in 1..n {
        let parent = order[rng.random_range(0..k)];
        add(order[k], parent, rng);
    }
    for a in 0..n {
        for b in a + 1..n {
            if rng.random_bool(density) {
                add(a, b, rng);
            }
        }
    }
    WeightedDigraph::new(n, arcs, true)
}

/// Strongly connected digraph: a random Hamiltonian cycle plus each other
/// ordered pair with probability `density`, weights uniform in `[0.5, 2)`.
pub fn random_strongly_connected<R: Rng + ?Sized>(
    n: usize,
    density: f64,
    rng: &mut R,
) -> Result<WeightedDigraph> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut present = vec![false; n * n];
    let mut arcs = Vec::new();
    for k in 0..n {
        let (a, b) = (order[k], order[(k + 1) % n]);
        if a != b {
            present[a * n + b] = true;
            arcs.push(Arc {
                source: a,
                target: b,
                weight: rng.random_range(0.5..2.0),
            });
        }
    }
    for a in 0..n {
        for b in 0..n {
            if a != b && !present[a * n + b] && rng.random_bool(density) {
                arcs.push(Arc {
                    source: a,
                    target: b,
                    weight: rng.random_range(0.5..2.0),
                });
            }
        }
    }
    if n == 1 {
        arcs.push(Arc {
            source: 0,
            target: 0,
            weight: 1.0,
        });
    }
    WeightedDigraph::new(n, arcs, false)
}
