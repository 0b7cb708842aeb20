//! Closed-form hitting times, Green's functions and mixing measures for
//! graph families, used as ground truth for the generic solvers.
//!
//! Every oracle realizes its graph and lists the closed-form values together
//! with the quantity each one predicts, so [`OracleReport::compare`] can check
//! them against a [`ChainAnalysis`] of the same graph.

use std::collections::VecDeque;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::analysis::ChainAnalysis;
use crate::error::{Error, Result};
use crate::generate;
use crate::graph::WeightedDigraph;
use crate::spectral::SpectralDecomposition;
use crate::tol;

/// What a closed-form value predicts, in terms of the generic pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Quantity {
    Hitting(usize, usize),
    Greens(usize, usize),
    /// `H(π, j)`
    AccessFromPi(usize),
    /// `H(i, π)`
    AccessToPi(usize),
    TMix,
    TReset,
    THit,
    /// Hypercube level time `T_k = H(v_k, 0) − H(v_{k−1}, 0)` where `v_k` is
    /// the vertex whose lowest `k` bits are set.
    LevelTime(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleValue {
    pub label: String,
    pub quantity: Quantity,
    pub value: f64,
}

/// A consistency check internal to the closed forms (two formulas for the
/// same number), with the absolute difference found.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InternalCheck {
    pub name: String,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub family: &'static str,
    pub params: Vec<usize>,
    pub graph: WeightedDigraph,
    pub values: Vec<OracleValue>,
    /// Closed-form spectrum of the normalized Laplacian, ascending.
    pub eigenvalues: Option<Vec<f64>>,
    pub checks: Vec<InternalCheck>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Deviation {
    pub label: String,
    pub quantity: Quantity,
    pub oracle: f64,
    pub computed: f64,
    /// `|oracle − computed| / max(1, |computed|)`
    pub error: f64,
}

impl OracleReport {
    fn new(family: &'static str, params: Vec<usize>, graph: WeightedDigraph) -> Self {
        OracleReport {
            family,
            params,
            graph,
            values: Vec::new(),
            eigenvalues: None,
            checks: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn push(&mut self, label: impl Into<String>, quantity: Quantity, value: f64) {
        self.values.push(OracleValue {
            label: label.into(),
            quantity,
            value,
        });
    }

    fn check(&mut self, name: impl Into<String>, residual: f64) {
        self.checks.push(InternalCheck {
            name: name.into(),
            residual,
        });
    }

    /// First value predicting `quantity`.
    pub fn value_of(&self, quantity: Quantity) -> Option<f64> {
        self.values
            .iter()
            .find(|v| v.quantity == quantity)
            .map(|v| v.value)
    }

    /// Looks a value up by label, or by the names `tmix`, `treset`, `thit`.
    pub fn measure(&self, name: &str) -> Option<f64> {
        let quantity = match name.to_ascii_lowercase().replace('_', "").as_str() {
            "tmix" => Some(Quantity::TMix),
            "treset" => Some(Quantity::TReset),
            "thit" => Some(Quantity::THit),
            _ => None,
        };
        match quantity {
            Some(q) => self.value_of(q),
            None => self
                .values
                .iter()
                .find(|v| v.label == name)
                .map(|v| v.value),
        }
    }

    pub fn max_check_residual(&self) -> f64 {
        self.checks.iter().map(|c| c.residual).fold(0.0, f64::max)
    }

    /// Evaluates every listed value on `analysis` (which must be the analysis
    /// of [`Self::graph`]).
    pub fn compare(&self, analysis: &ChainAnalysis) -> Vec<Deviation> {
        let h = &analysis.hitting;
        let from_pi = analysis.access_from_pi();
        let m = &analysis.mixing;
        self.values
            .iter()
            .map(|v| {
                let computed = match v.quantity {
                    Quantity::Hitting(i, j) => h.get(i, j),
                    Quantity::Greens(i, j) => analysis.greens.get(i, j),
                    Quantity::AccessFromPi(j) => from_pi[j],
                    Quantity::AccessToPi(i) => m.access_to_pi[i],
                    Quantity::TMix => m.t_mix,
                    Quantity::TReset => m.t_reset,
                    Quantity::THit => m.t_hit,
                    Quantity::LevelTime(k) => h.get((1 << k) - 1, 0) - h.get((1 << (k - 1)) - 1, 0),
                };
                Deviation {
                    label: v.label.clone(),
                    quantity: v.quantity,
                    oracle: v.value,
                    computed,
                    error: (v.value - computed).abs() / computed.abs().max(1.0),
                }
            })
            .collect()
    }

    /// Largest deviation between the closed-form spectrum and the computed
    /// one.
    pub fn compare_spectrum(&self, dec: &SpectralDecomposition) -> Option<f64> {
        let ev = self.eigenvalues.as_ref()?;
        Some(
            ev.iter()
                .zip(dec.eigenvalues().iter())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
        )
    }

    /// Runs the generic pipeline on the realized graph and returns the
    /// largest relative deviation, failing if it exceeds `tol`.
    pub fn verify(&self, tol: f64) -> Result<f64> {
        let analysis = ChainAnalysis::of_graph(&self.graph, 0.0)?;
        let worst = self
            .compare(&analysis)
            .into_iter()
            .max_by(|a, b| a.error.total_cmp(&b.error));
        let mut err = worst.as_ref().map_or(0.0, |d| d.error);
        if self.eigenvalues.is_some() {
            let dec = SpectralDecomposition::of_graph(&self.graph)?;
            err = err.max(self.compare_spectrum(&dec).unwrap_or(0.0));
        }
        if err > tol {
            let what = worst.map_or_else(|| "spectrum".to_string(), |d| d.label);
            return Err(Error::integrity(
                format!("{} oracle value {what}", self.family),
                err,
            ));
        }
        Ok(err)
    }
}

fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

fn ratio(num: impl Into<BigInt>, den: impl Into<BigInt>) -> BigRational {
    BigRational::new(num.into(), den.into())
}

fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().expect("finite rational")
}

/// `K_n`: `H(i,j) = n−1`, `G(i,i) = ((n−1)/n)²`, `G(i,j) = −(n−1)/n²`.
pub fn complete_oracle(n: usize) -> Result<OracleReport> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "complete graph needs n >= 2, got {n}"
        )));
    }
    let mut r = OracleReport::new("complete", vec![n], generate::complete(n)?);
    let nf = n as f64;
    let diag = ((nf - 1.0) / nf).powi(2);
    let off = -(nf - 1.0) / (nf * nf);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                r.push(format!("G({i},{i})"), Quantity::Greens(i, i), diag);
            } else {
                r.push(format!("H({i},{j})"), Quantity::Hitting(i, j), nf - 1.0);
                r.push(format!("G({i},{j})"), Quantity::Greens(i, j), off);
            }
        }
        r.push(
            format!("H(pi,{i})"),
            Quantity::AccessFromPi(i),
            (nf - 1.0).powi(2) / nf,
        );
    }
    r.push("T_hit", Quantity::THit, (nf - 1.0).powi(2) / nf);
    let mut ev = vec![nf / (nf - 1.0); n];
    ev[0] = 0.0;
    r.eigenvalues = Some(ev);
    Ok(r)
}

/// `K_{r,s}` with `U = 0..r`, `W = r..r+s`; the star `K_{1,s}` values are
/// listed separately when `r = 1`.
pub fn bipartite_oracle(r: usize, s: usize) -> Result<OracleReport> {
    if r < 1 || s < 1 {
        return Err(Error::InvalidArgument(
            "partite sets must be non-empty".into(),
        ));
    }
    let mut rep = OracleReport::new("bipartite", vec![r, s], generate::complete_bipartite(r, s)?);
    let (rf, sf) = (r as f64, s as f64);
    let (u0, w0) = (0, r);
    rep.push("H(u,w)", Quantity::Hitting(u0, w0), 2.0 * sf - 1.0);
    rep.push("H(w,u)", Quantity::Hitting(w0, u0), 2.0 * rf - 1.0);
    if r >= 2 {
        rep.push("H(u,u')", Quantity::Hitting(u0, u0 + 1), 2.0 * rf);
    }
    if s >= 2 {
        rep.push("H(w,w')", Quantity::Hitting(w0, w0 + 1), 2.0 * sf);
    }
    rep.push("H(pi,u)", Quantity::AccessFromPi(u0), 2.0 * rf - 1.5);
    rep.push("H(pi,w)", Quantity::AccessFromPi(w0), 2.0 * sf - 1.5);
    rep.push("G(u,u)", Quantity::Greens(u0, u0), 1.0 - 3.0 / (4.0 * rf));
    if r >= 2 {
        rep.push("G(u,u')", Quantity::Greens(u0, u0 + 1), -3.0 / (4.0 * rf));
    }
    rep.push("G(u,w)", Quantity::Greens(u0, w0), -1.0 / (4.0 * sf));
    rep.push("G(w,w)", Quantity::Greens(w0, w0), 1.0 - 3.0 / (4.0 * sf));
    if s >= 2 {
        rep.push("G(w,w')", Quantity::Greens(w0, w0 + 1), -3.0 / (4.0 * sf));
    }
    rep.push("G(w,u)", Quantity::Greens(w0, u0), -1.0 / (4.0 * rf));
    if r == 1 {
        // Star K_{1,n-1}: centre c = 0, leaves v = 1, w = 2.
        let leaves = sf;
        rep.push("star G(c,c)", Quantity::Greens(0, 0), 0.25);
        rep.push("star G(c,v)", Quantity::Greens(0, 1), -1.0 / (4.0 * leaves));
        rep.push(
            "star G(v,v)",
            Quantity::Greens(1, 1),
            1.0 - 3.0 / (4.0 * leaves),
        );
        rep.push("star G(v,c)", Quantity::Greens(1, 0), -0.25);
        if s >= 2 {
            rep.push("star G(v,w)", Quantity::Greens(1, 2), -3.0 / (4.0 * leaves));
        }
    }
    Ok(rep)
}

/// `P_n` on vertices `0..n`. For 1-based `i ≤ j`,
/// `G(i,j) = π_j((i−1)² + (n−j)² − (2n²−4n+3)/6)`; the other triangle
/// follows from `π_i G(i,j) = π_j G(j,i)`.
pub fn path_oracle(n: usize) -> Result<OracleReport> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "path needs n >= 2, got {n}"
        )));
    }
    let mut rep = OracleReport::new("path", vec![n], generate::path(n)?);
    let nf = n as f64;
    let t_mix = (2.0 * nf * nf - 4.0 * nf + 3.0) / 6.0;
    let pi = |v: usize| {
        if v == 0 || v == n - 1 {
            0.5 / (nf - 1.0)
        } else {
            1.0 / (nf - 1.0)
        }
    };
    let upper = |i: usize, j: usize| {
        let (a, b) = ((i + 1) as f64, (j + 1) as f64);
        pi(j) * ((a - 1.0).powi(2) + (nf - b).powi(2) - t_mix)
    };
    for i in 0..n {
        for j in 0..n {
            let g = if i <= j {
                upper(i, j)
            } else {
                pi(j) / pi(i) * upper(j, i)
            };
            rep.push(format!("G({i},{j})"), Quantity::Greens(i, j), g);
        }
        rep.push(
            format!("H(0,{i})"),
            Quantity::Hitting(0, i),
            (i as f64).powi(2),
        );
    }
    rep.push("T_mix", Quantity::TMix, t_mix);
    Ok(rep)
}

/// Rooted view of a tree: parent pointers, depths and subtree edge weight.
struct Rooted {
    parent: Vec<Option<usize>>,
    depth: Vec<usize>,
    order: Vec<usize>,
}

fn root_tree(g: &WeightedDigraph, root: usize) -> Rooted {
    let n = g.n();
    let mut parent = vec![None; n];
    let mut depth = vec![0; n];
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::from([root]);
    seen[root] = true;
    while let Some(v) = queue.pop_front() {
        order.push(v);
        for u in g.out_neighbors(v) {
            if !seen[u] {
                seen[u] = true;
                parent[u] = Some(v);
                depth[u] = depth[v] + 1;
                queue.push_back(u);
            }
        }
    }
    Rooted {
        parent,
        depth,
        order,
    }
}

/// Hitting times on a weighted tree without linear algebra: across an edge
/// `a–b`, `H(a,b) = (2·W_a + w_ab)/w_ab` where `W_a` is the edge weight on
/// `a`'s side, and hitting times add along paths.
fn tree_hitting(g: &WeightedDigraph) -> DMatrix<f64> {
    let n = g.n();
    let mut h = DMatrix::zeros(n, n);
    for target in 0..n {
        let rooted = root_tree(g, target);
        let mut below = vec![0.0; n];
        for &v in rooted.order.iter().rev() {
            if let Some(p) = rooted.parent[v] {
                below[p] += below[v] + g.weight(v, p);
            }
        }
        for &v in &rooted.order {
            if let Some(p) = rooted.parent[v] {
                let w = g.weight(v, p);
                h[(v, target)] = (2.0 * below[v] + w) / w + h[(p, target)];
            }
        }
    }
    h
}

fn lca(rooted: &Rooted, mut a: usize, mut b: usize) -> usize {
    while rooted.depth[a] > rooted.depth[b] {
        a = rooted.parent[a].expect("non-root");
    }
    while rooted.depth[b] > rooted.depth[a] {
        b = rooted.parent[b].expect("non-root");
    }
    while a != b {
        a = rooted.parent[a].expect("non-root");
        b = rooted.parent[b].expect("non-root");
    }
    a
}

/// Trees, via a mixing pessimal vertex `z` (maximizing
/// `H(z',z) − H(π,z)`), its pessimal vertex `z'`, and projections onto the
/// `z–z'` spine:
///
/// ```text
/// G(i,j)/π_j = (H(z',j*) − H(j,j*)) + (H(z,i*) − H(i,i*)) − T_mix
/// ```
///
/// for `i*` no further from `z` than `j*`. Pairs with `i*` beyond `j*` use the
/// symmetry `π_i G(i,j) = π_j G(j,i)`. When `i` and `j` hang off the same
/// spine vertex but their connecting path misses it, `i*` is replaced by the
/// branching vertex of `i`, `j` and `z`; the notes record how many pairs needed
/// this.
///
/// Hitting times come from the edge-cut formula, so the whole oracle is free
/// of matrix algebra.
pub fn tree_oracle(tree: &WeightedDigraph) -> Result<OracleReport> {
    let n = tree.n();
    if !tree.is_undirected()
        || n < 2
        || tree.edge_count() != n - 1
        || !crate::graph::strongly_connected(tree)
    {
        return Err(Error::InvalidArgument("input is not a tree".into()));
    }
    if tree.arcs().iter().any(|a| a.source == a.target) {
        return Err(Error::InvalidArgument(
            "input is not a tree (self-loop)".into(),
        ));
    }
    let mut rep = OracleReport::new("tree", vec![n], tree.clone());
    let h = tree_hitting(tree);
    let deg = tree.degrees();
    let vol = tree.volume();
    let pi: Vec<f64> = deg.iter().map(|d| d / vol).collect();

    // i' = lowest-index maximizer of H(·,i); H(i,π) = H(i',i) − H(π,i).
    let from_pi: Vec<f64> = (0..n)
        .map(|v| (0..n).map(|u| pi[u] * h[(u, v)]).sum())
        .collect();
    let argmax = |vals: &dyn Fn(usize) -> f64| {
        let top = (0..n).map(vals).fold(f64::NEG_INFINITY, f64::max);
        (0..n)
            .find(|&v| vals(v) >= top - tol::time(top))
            .unwrap_or(0)
    };
    let pessimal: Vec<usize> = (0..n).map(|i| argmax(&|k| h[(k, i)])).collect();
    let z = argmax(&|i| h[(pessimal[i], i)] - from_pi[i]);
    let zp = pessimal[z];
    let t_mix = h[(zp, z)] - from_pi[z];
    // Maximizing H(i',i) alone need not give a mixing pessimal vertex.
    let longest = argmax(&|i| h[(pessimal[i], i)]);
    let longest_access = h[(pessimal[longest], longest)] - from_pi[longest];

    let rooted = root_tree(tree, z);
    let mut spine = vec![zp];
    while let Some(p) = rooted.parent[*spine.last().unwrap()] {
        spine.push(p);
    }
    spine.reverse();
    let mut position = vec![usize::MAX; n];
    for (k, &v) in spine.iter().enumerate() {
        position[v] = k;
    }
    // Projection onto the spine: first spine vertex on the way to z.
    let mut proj = vec![0; n];
    for &v in &rooted.order {
        proj[v] = if position[v] != usize::MAX {
            v
        } else {
            proj[rooted.parent[v].unwrap()]
        };
    }

    let formula = |i: usize, j: usize, via: usize| {
        let js = proj[j];
        pi[j] * ((h[(zp, js)] - h[(j, js)]) + (h[(z, via)] - h[(i, via)]) - t_mix)
    };
    let (mut direct, mut mirrored, mut branched) = (0usize, 0usize, 0usize);
    for i in 0..n {
        for j in 0..n {
            let (ri, rj) = (position[proj[i]], position[proj[j]]);
            let g = if ri > rj {
                mirrored += 1;
                pi[j] / pi[i] * formula(j, i, proj[j])
            } else {
                let meet = lca(&rooted, i, j);
                if meet == proj[i] {
                    direct += 1;
                    formula(i, j, proj[i])
                } else {
                    branched += 1;
                    formula(i, j, meet)
                }
            };
            rep.push(format!("G({i},{j})"), Quantity::Greens(i, j), g);
            if i != j {
                rep.push(format!("H({i},{j})"), Quantity::Hitting(i, j), h[(i, j)]);
            }
        }
    }
    rep.push("T_mix", Quantity::TMix, t_mix);
    rep.push("H(z,pi)", Quantity::AccessToPi(z), t_mix);
    rep.push("H(z',pi)", Quantity::AccessToPi(zp), t_mix);
    rep.notes
        .push(format!("z = {z}, z' = {zp}, spine = {spine:?}"));
    rep.notes.push(format!(
        "pairs: {direct} by spine projection, {mirrored} by symmetry, {branched} through a branching vertex off the spine"
    ));
    if longest_access < t_mix - tol::time(t_mix) {
        rep.notes.push(format!(
            "vertex {longest} maximizes H(i',i) but H({longest},pi) = {longest_access} < T_mix = {t_mix}"
        ));
    }
    Ok(rep)
}

/// `C_n` on vertices `0..n`: `H(0,j) = j(n−j)`, `H(π,0) = (n+1)(n−1)/6`,
/// `G(0,j)` by the polynomial and the trigonometric form.
pub fn cycle_oracle(n: usize) -> Result<OracleReport> {
    let mut rep = OracleReport::new("cycle", vec![n], generate::cycle(n)?);
    let nf = n as f64;
    let from_pi = (nf + 1.0) * (nf - 1.0) / 6.0;
    let poly = |d: usize| (from_pi - (d * (n - d)) as f64) / nf;
    let trig = |d: usize| {
        (1..n)
            .map(|k| {
                let k = k as f64;
                (2.0 * PI * k * d as f64 / nf).cos() / (1.0 - (2.0 * PI * k / nf).cos())
            })
            .sum::<f64>()
            / nf
    };
    let mut worst: f64 = 0.0;
    for j in 0..n {
        let (p, t) = (poly(j), trig(j));
        worst = worst.max((p - t).abs());
        rep.push(
            format!("H(0,{j})"),
            Quantity::Hitting(0, j),
            (j * (n - j)) as f64,
        );
        rep.push(format!("G(0,{j})"), Quantity::Greens(0, j), p);
        rep.push(format!("G(0,{j}) trig"), Quantity::Greens(0, j), t);
    }
    for i in 1..n {
        for j in 0..n {
            let d = (j + n - i) % n;
            rep.push(format!("G({i},{j})"), Quantity::Greens(i, j), poly(d));
        }
    }
    rep.push("H(pi,0)", Quantity::AccessFromPi(0), from_pi);
    rep.push("T_hit", Quantity::THit, from_pi);
    rep.check("polynomial vs trigonometric G(0,j)", worst);
    let mut ev: Vec<f64> = (0..n)
        .map(|k| 1.0 - (2.0 * PI * k as f64 / nf).cos())
        .collect();
    ev.sort_by(f64::total_cmp);
    rep.eigenvalues = Some(ev);
    Ok(rep)
}

/// Largest dimension for the exact identities.
pub const HYPERCUBE_MAX_DIM: usize = 14;
/// Largest dimension [`hypercube_oracle`] realizes as a dense graph.
pub const HYPERCUBE_ORACLE_MAX_DIM: usize = 12;

/// Exact closed forms for `Q_d`.
#[derive(Debug, Clone, PartialEq)]
pub struct HypercubeExact {
    /// `T_k` for `k = 1..=d` (index `k − 1`).
    pub level_times: Vec<BigRational>,
    /// `H(v, 0)` for `v` in level `ℓ = 0..=d`.
    pub to_origin: Vec<BigRational>,
    pub t_hit: BigRational,
    /// `H(1, 0)` by `2^{d−1} Σ_{k=0}^{d−1} 1/C(d−1,k)`.
    pub antipodal: BigRational,
    pub t_mix: BigRational,
}

/// Exact rational evaluation of the hypercube formulas, checking each pair of
/// equivalent forms. Returns the values and the names of any identities that
/// failed.
pub fn hypercube_exact(d: usize) -> Result<(HypercubeExact, Vec<String>)> {
    if !(1..=HYPERCUBE_MAX_DIM).contains(&d) {
        return Err(Error::InvalidArgument(format!(
            "hypercube dimension must be in 1..={HYPERCUBE_MAX_DIM}, got {d}"
        )));
    }
    let mut failures = Vec::new();
    let df = BigRational::from_integer(d.into());
    let half_d = &df / ratio(2, 1);

    // T_k = Σ_{j≥k} C(d,j) / C(d−1,k−1)
    let level_times: Vec<BigRational> = (1..=d)
        .map(|k| {
            let tail: BigInt = (k..=d).map(|j| binomial(d, j)).sum();
            BigRational::new(tail, binomial(d - 1, k - 1))
        })
        .collect();
    // T_k = 1 + ((d−k)/d)(T_{k+1} + T_k), with T_{d+1} = 0.
    for k in 1..=d {
        let next = level_times
            .get(k)
            .cloned()
            .unwrap_or_else(BigRational::zero);
        let rhs = BigRational::one() + ratio(d - k, d) * (next + &level_times[k - 1]);
        if rhs != level_times[k - 1] {
            failures.push(format!("level recurrence at k = {k}"));
        }
    }

    let mut to_origin = vec![BigRational::zero()];
    for k in 1..=d {
        let prev = to_origin[k - 1].clone();
        to_origin.push(prev + &level_times[k - 1]);
    }
    // H(v,0) = d Σ_{k≤ℓ} (1/k) Σ_{j≥k} C(d,j)/C(d,k)
    for l in 1..=d {
        let alt: BigRational = (1..=l)
            .map(|k| {
                let tail: BigInt = (k..=d).map(|j| binomial(d, j)).sum();
                BigRational::new(tail, binomial(d, k)) / ratio(k, 1)
            })
            .fold(BigRational::zero(), |a, b| a + b)
            * &df;
        if alt != to_origin[l] {
            failures.push(format!("level sum form at level {l}"));
        }
    }

    let t_hit = (1..=d)
        .map(|k| BigRational::new(binomial(d, k), k.into()))
        .fold(BigRational::zero(), |a, b| a + b)
        * &half_d;
    let antipodal = (0..d)
        .map(|k| BigRational::new(BigInt::one(), binomial(d - 1, k)))
        .fold(BigRational::zero(), |a, b| a + b)
        * BigRational::from_integer(BigInt::from(2).pow((d - 1) as u32));
    let powers_form = (1..=d)
        .map(|k| BigRational::new(BigInt::from(2).pow(k as u32), k.into()))
        .fold(BigRational::zero(), |a, b| a + b)
        * &half_d;
    let binomial_form = (1..=d)
        .map(|k| BigRational::new(BigInt::one() + binomial(d, k), k.into()))
        .fold(BigRational::zero(), |a, b| a + b)
        * &half_d;
    let harmonic = (1..=d)
        .map(|k| ratio(1, k))
        .fold(BigRational::zero(), |a, b| a + b);
    let t_mix = harmonic * &half_d;
    if powers_form != antipodal {
        failures.push("antipodal time: power sum form".into());
    }
    if binomial_form != antipodal {
        failures.push("antipodal time: binomial sum form".into());
    }
    if to_origin[d] != antipodal {
        failures.push("antipodal time: level sum".into());
    }
    if &antipodal - &t_hit != t_mix {
        failures.push("T_mix = H(1,0) − T_hit".into());
    }
    Ok((
        HypercubeExact {
            level_times,
            to_origin,
            t_hit,
            antipodal,
            t_mix,
        },
        failures,
    ))
}

/// `Q_d` for `1 ≤ d ≤ 12`. The realized graph has `2^d` vertices; callers
/// should only run the dense pipeline on it for small `d`.
pub fn hypercube_oracle(d: usize) -> Result<OracleReport> {
    if d > HYPERCUBE_ORACLE_MAX_DIM {
        return Err(Error::InvalidArgument(format!(
            "hypercube oracle realizes at most d = {HYPERCUBE_ORACLE_MAX_DIM}, got {d}"
        )));
    }
    let (exact, failures) = hypercube_exact(d)?;
    let mut rep = OracleReport::new("hypercube", vec![d], generate::hypercube(d)?);
    let n = 1usize << d;
    let nf = n as f64;
    let t_hit = to_f64(&exact.t_hit);
    for (k, t) in exact.level_times.iter().enumerate() {
        rep.push(
            format!("T_{}", k + 1),
            Quantity::LevelTime(k + 1),
            to_f64(t),
        );
    }
    for (l, hv) in exact.to_origin.iter().enumerate() {
        let v = (1usize << l) - 1;
        rep.push(
            format!("H(level {l},0)"),
            Quantity::Hitting(v, 0),
            to_f64(hv),
        );
        rep.push(
            format!("G(0,level {l})"),
            Quantity::Greens(0, v),
            (t_hit - to_f64(hv)) / nf,
        );
    }
    rep.push(
        "H(1,0)",
        Quantity::Hitting(n - 1, 0),
        to_f64(&exact.antipodal),
    );
    rep.push("H(pi,0)", Quantity::AccessFromPi(0), t_hit);
    rep.push("T_hit", Quantity::THit, t_hit);
    rep.push("T_mix", Quantity::TMix, to_f64(&exact.t_mix));
    rep.push("T_reset", Quantity::TReset, to_f64(&exact.t_mix));
    for name in [
        "level recurrence",
        "level sum form",
        "antipodal time",
        "T_mix = H(1,0) − T_hit",
    ] {
        let failed = failures.iter().any(|f| f.starts_with(name));
        rep.check(format!("exact: {name}"), if failed { 1.0 } else { 0.0 });
    }
    let mut ev: Vec<f64> = (0..n)
        .map(|v| 2.0 * v.count_ones() as f64 / d as f64)
        .collect();
    ev.sort_by(f64::total_cmp);
    rep.eigenvalues = Some(ev);
    Ok(rep)
}

pub const TORIC_MAX_VERTICES: usize = 4096;

/// `C_{n_1} × … × C_{n_d}` from its explicit eigensystem:
/// `λ_r = 1 − (1/d) Σ_t cos(2π r_t / n_t)` and
/// `G(0,j) = (1/n) Σ_{r≠0} cos(2π Σ_t r_t j_t / n_t) / λ_r`.
///
/// The `0`-pessimal vertex is found numerically as the lowest-index maximizer
/// of `H(·,0) = n(G(0,0) − G(0,·))`; the notes say whether the vertex with
/// coordinates `⌈n_t/2⌉` also attains the maximum.
pub fn toric_oracle(dims: &[usize]) -> Result<OracleReport> {
    if dims.is_empty() || dims.iter().any(|&n| n < 3) {
        return Err(Error::InvalidArgument(
            "every cycle length must be at least 3".into(),
        ));
    }
    let n = dims
        .iter()
        .try_fold(1usize, |acc, &m| acc.checked_mul(m))
        .unwrap_or(usize::MAX);
    if n > TORIC_MAX_VERTICES {
        return Err(Error::InvalidArgument(format!(
            "toric grid has {n} vertices, limit is {TORIC_MAX_VERTICES}"
        )));
    }
    let mut rep = OracleReport::new("toric", dims.to_vec(), generate::toric_grid(dims)?);
    let d = dims.len() as f64;
    let nf = n as f64;
    let modes: Vec<(Vec<usize>, f64)> = (0..n)
        .map(|idx| {
            let r = generate::toric_coords(dims, idx);
            let lambda = 1.0
                - r.iter()
                    .zip(dims)
                    .map(|(&rt, &nt)| (2.0 * PI * rt as f64 / nt as f64).cos())
                    .sum::<f64>()
                    / d;
            (r, lambda)
        })
        .collect();
    let phase = |r: &[usize], j: &[usize]| {
        r.iter()
            .zip(j)
            .zip(dims)
            .map(|((&rt, &jt), &nt)| rt as f64 * jt as f64 / nt as f64)
            .sum::<f64>()
    };
    let g0: Vec<f64> = (0..n)
        .map(|idx| {
            let j = generate::toric_coords(dims, idx);
            modes[1..]
                .iter()
                .map(|(r, lambda)| (2.0 * PI * phase(r, &j)).cos() / lambda)
                .sum::<f64>()
                / nf
        })
        .collect();
    let t_hit: f64 = modes[1..].iter().map(|(_, l)| 1.0 / l).sum();
    let to_zero: Vec<f64> = g0.iter().map(|g| nf * (g0[0] - g)).collect();
    let best = to_zero.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let slack = tol::time(best);
    let pessimal = (0..n).find(|&v| to_zero[v] >= best - slack).unwrap_or(0);
    let t_mix = -nf * g0[pessimal];

    for (j, &g) in g0.iter().enumerate() {
        rep.push(format!("G(0,{j})"), Quantity::Greens(0, j), g);
        rep.push(format!("H({j},0)"), Quantity::Hitting(j, 0), to_zero[j]);
    }
    rep.push("H(pi,0)", Quantity::AccessFromPi(0), t_hit);
    rep.push("T_hit", Quantity::THit, t_hit);
    rep.push("T_mix", Quantity::TMix, t_mix);
    rep.push("T_reset", Quantity::TReset, t_mix);

    let ceil: Vec<usize> = dims.iter().map(|&m| m.div_ceil(2)).collect();
    let ceil_idx = generate::toric_index(dims, &ceil);
    let ceil_ok = to_zero[ceil_idx] >= best - slack;
    rep.notes.push(format!(
        "0-pessimal vertex {:?}; coordinates ceil(n_t/2) = {:?} {} the maximum",
        generate::toric_coords(dims, pessimal),
        ceil,
        if ceil_ok { "attain" } else { "do not attain" }
    ));
    rep.check(
        "ceil(n_t/2) vertex attains max H(.,0)",
        if ceil_ok {
            0.0
        } else {
            best - to_zero[ceil_idx]
        },
    );

    // Cosine form with a parity shift π Σ r_t + 2π Σ r_t (n_t mod 2)/n_t.
    let parity_form: f64 = -modes[1..]
        .iter()
        .map(|(r, lambda)| {
            let angle: f64 = r
                .iter()
                .zip(dims)
                .map(|(&rt, &nt)| {
                    PI * rt as f64 + 2.0 * PI * rt as f64 * (nt % 2) as f64 / nt as f64
                })
                .sum();
            angle.cos() / lambda
        })
        .sum::<f64>();
    let parity_gap = (parity_form - t_mix).abs();
    if dims.iter().all(|nt| nt % 2 == 0) {
        rep.check("cosine parity form of T_mix", parity_gap);
    } else {
        // The shifted cosine form is off for odd side lengths; keep the gap
        // for reference only.
        rep.notes.push(format!(
            "cosine parity form of T_mix misses by {parity_gap:e} (odd side length)"
        ));
    }

    let mut ev: Vec<f64> = modes.iter().map(|(_, l)| *l).collect();
    ev.sort_by(f64::total_cmp);
    rep.eigenvalues = Some(ev);
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn value(rep: &OracleReport, label: &str) -> f64 {
        rep.measure(label)
            .unwrap_or_else(|| panic!("no value {label}"))
    }

    #[test]
    fn complete_values() {
        let r = complete_oracle(3).unwrap();
        assert!((value(&r, "G(0,0)") - 4.0 / 9.0).abs() < 1e-15);
        let r = complete_oracle(5).unwrap();
        assert!((value(&r, "G(0,1)") + 4.0 / 25.0).abs() < 1e-15);
        let r = complete_oracle(2).unwrap();
        assert_eq!(value(&r, "H(0,1)"), 1.0);
        assert!(complete_oracle(1).is_err());
        assert!(r.verify(1e-8).is_ok());
    }

    #[test]
    fn bipartite_values() {
        let r = bipartite_oracle(2, 3).unwrap();
        assert_eq!(value(&r, "H(u,w)"), 5.0);
        assert_eq!(value(&r, "G(u,u)"), 0.625);
        let star = bipartite_oracle(1, 2).unwrap();
        assert_eq!(value(&star, "star G(c,c)"), 0.25);
        assert!(star.verify(1e-10).is_ok());
    }

    #[test]
    fn path_values() {
        let r = path_oracle(3).unwrap();
        assert!((value(&r, "G(0,0)") - 0.625).abs() < 1e-15);
        assert!((value(&r, "G(1,0)") + 0.125).abs() < 1e-15);
        assert_eq!(path_oracle(2).unwrap().measure("tmix"), Some(0.5));
    }

    #[test]
    fn star_matches_relabelled_path() {
        // K_{1,2} has centre 0; P_3 has centre 1. Swap labels 0 and 1.
        let star = bipartite_oracle(1, 2).unwrap();
        let path = ChainAnalysis::of_graph(&generate::path(3).unwrap(), 0.0).unwrap();
        let relabel = |v: usize| match v {
            0 => 1,
            1 => 0,
            v => v,
        };
        for v in &star.values {
            if let Quantity::Greens(i, j) = v.quantity {
                assert!(
                    (path.greens.get(relabel(i), relabel(j)) - v.value).abs() < 1e-12,
                    "{}",
                    v.label
                );
            }
        }
    }

    #[test]
    fn tree_oracle_matches_path_and_star() {
        let p4 = generate::path(4).unwrap();
        let tree = tree_oracle(&p4).unwrap();
        let path = path_oracle(4).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let q = Quantity::Greens(i, j);
                assert!((tree.value_of(q).unwrap() - path.value_of(q).unwrap()).abs() < 1e-12);
            }
        }
        let star = generate::complete_bipartite(1, 3).unwrap();
        let tree = tree_oracle(&star).unwrap();
        let bip = bipartite_oracle(1, 3).unwrap();
        for v in &bip.values {
            if let Quantity::Greens(..) = v.quantity {
                assert!(
                    (tree.value_of(v.quantity).unwrap() - v.value).abs() < 1e-12,
                    "{}",
                    v.label
                );
            }
        }
    }

    #[test]
    fn tree_oracle_on_random_trees() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for n in [2, 3, 12, 20] {
            let t = generate::random_tree(n, &mut rng).unwrap();
            let r = tree_oracle(&t).unwrap();
            let a = ChainAnalysis::of_graph(&t, 0.0).unwrap();
            let bad: Vec<_> = r
                .compare(&a)
                .into_iter()
                .filter(|d| d.error > 1e-8)
                .collect();
            assert!(
                bad.is_empty(),
                "{:?}\n{:?}",
                &bad[..bad.len().min(5)],
                r.notes
            );
        }
    }

    #[test]
    fn tree_edge_cut_hitting_times() {
        let g = generate::path(3).unwrap();
        let h = tree_hitting(&g);
        assert_eq!(h[(0, 1)], 1.0);
        assert_eq!(h[(1, 2)], 3.0);
        assert_eq!(h[(0, 2)], 4.0);
    }

    #[test]
    fn spine_projection_alone_fails_off_spine() {
        // Spine 0-1-2-3-4 with a two-vertex branch 2-5-6 hanging off 2;
        // 5 and 6 both project to 2 but the path 6 -> 5 never reaches it.
        let g =
            WeightedDigraph::undirected_unit(7, &[(0, 1), (1, 2), (2, 3), (3, 4), (2, 5), (5, 6)])
                .unwrap();
        let rep = tree_oracle(&g).unwrap();
        assert!(rep.notes[1].contains("through a branching vertex"));
        let a = ChainAnalysis::of_graph(&g, 0.0).unwrap();
        let h = &a.hitting;
        let pi = &a.stationary;
        let (z, zp) = (0, 4);
        let t_mix = a.mixing.t_mix;
        let (i, j, star) = (6, 5, 2);
        let spine_only = pi[j]
            * ((h.get(zp, star) - h.get(j, star)) + (h.get(z, star) - h.get(i, star)) - t_mix);
        assert!((spine_only - a.greens.get(i, j)).abs() > 0.1);
        assert!((rep.value_of(Quantity::Greens(i, j)).unwrap() - a.greens.get(i, j)).abs() < 1e-10);
    }

    #[test]
    fn longest_pessimal_walk_need_not_mix_slowest() {
        let edges = [
            (0, 5),
            (2, 7),
            (4, 10),
            (1, 7),
            (6, 9),
            (8, 10),
            (1, 11),
            (1, 15),
            (12, 15),
            (5, 13),
            (5, 6),
            (6, 15),
            (8, 14),
            (8, 15),
            (3, 8),
            (3, 16),
        ];
        let g = WeightedDigraph::undirected_unit(17, &edges).unwrap();
        let a = ChainAnalysis::of_graph(&g, 0.0).unwrap();
        // Leaf 2 has the largest H(i',i) (= 100) but H(2,π) = 16.25 < T_mix = 20.25.
        assert!((a.hitting.get(a.mixing.pessimal[2], 2) - 100.0).abs() < 1e-9);
        assert!((a.mixing.access_to_pi[2] - 16.25).abs() < 1e-9);
        assert!((a.mixing.t_mix - 20.25).abs() < 1e-9);
        let rep = tree_oracle(&g).unwrap();
        assert!(rep
            .notes
            .iter()
            .any(|n| n.starts_with("vertex 2 maximizes")));
        assert!(rep.verify(1e-8).is_ok());
    }

    #[test]
    fn non_tree_rejected() {
        assert!(tree_oracle(&generate::cycle(4).unwrap()).is_err());
    }

    #[test]
    fn cycle_values() {
        let r = cycle_oracle(5).unwrap();
        assert_eq!(value(&r, "H(0,2)"), 6.0);
        assert!(r.max_check_residual() < 1e-10);
        let r = cycle_oracle(4).unwrap();
        assert!((value(&r, "G(0,2)") + 0.375).abs() < 1e-15);
        assert!(cycle_oracle(2).is_err());
    }

    #[test]
    fn hypercube_values() {
        let r = hypercube_oracle(3).unwrap();
        assert_eq!(r.measure("tmix"), Some(2.75));
        assert_eq!(r.measure("H(1,0)"), Some(10.0));
        assert_eq!(r.measure("thit"), Some(7.25));
        assert_eq!(r.max_check_residual(), 0.0);
        assert!(r.verify(1e-8).is_ok());
        assert_eq!(hypercube_oracle(2).unwrap().measure("tmix"), Some(1.5));
        assert_eq!(hypercube_oracle(1).unwrap().measure("T_1"), Some(1.0));
        assert!(hypercube_oracle(0).is_err());
        assert!(hypercube_oracle(13).is_err());
    }

    #[test]
    fn hypercube_identities_exact_up_to_14() {
        for d in 1..=HYPERCUBE_MAX_DIM {
            let (_, failures) = hypercube_exact(d).unwrap();
            assert!(failures.is_empty(), "d = {d}: {failures:?}");
        }
    }

    #[test]
    fn toric_reduces_to_cycle() {
        let t = toric_oracle(&[4]).unwrap();
        let c = cycle_oracle(4).unwrap();
        for j in 0..4 {
            let q = Quantity::Greens(0, j);
            assert!((t.value_of(q).unwrap() - c.value_of(q).unwrap()).abs() < 1e-12);
        }
        assert!((t.measure("thit").unwrap() - 2.5).abs() < 1e-12);
    }

    #[test]
    fn toric_grids_against_pipeline() {
        for dims in [vec![3, 3], vec![4, 4], vec![3, 4, 5]] {
            let r = toric_oracle(&dims).unwrap();
            assert!(r.verify(1e-8).is_ok(), "{dims:?}");
            assert!((r.measure("tmix").unwrap() - r.measure("treset").unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn toric_parity_form_only_holds_for_even_lengths() {
        let even = toric_oracle(&[4, 6]).unwrap();
        let check = |r: &OracleReport, name: &str| {
            r.checks
                .iter()
                .find(|c| c.name.starts_with(name))
                .unwrap()
                .residual
        };
        assert!(check(&even, "cosine parity") < 1e-10);
        assert_eq!(check(&even, "ceil"), 0.0);
        let odd = toric_oracle(&[3, 5]).unwrap();
        let gap = odd
            .notes
            .iter()
            .find_map(|n| n.strip_prefix("cosine parity form of T_mix misses by "))
            .and_then(|rest| rest.split(' ').next()?.parse::<f64>().ok())
            .unwrap();
        assert!(gap > 1e-3);
        assert!(odd.checks.iter().all(|c| !c.name.starts_with("cosine")));
        assert_eq!(check(&odd, "ceil"), 0.0);
    }

    #[test]
    fn toric_bounds() {
        assert!(toric_oracle(&[2, 5]).is_err());
        assert!(toric_oracle(&[65, 65]).is_err());
        assert!(toric_oracle(&[]).is_err());
    }
}
