//! Weighted digraphs, transition matrices and stationary distributions.
//!
//! Vertices are labelled `0..n`. An undirected graph is stored as a digraph in
//! which every edge appears as a pair of opposite arcs of equal weight.

use nalgebra::{DMatrix, DVector};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tol;

/// A single weighted arc `source -> target`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    pub source: usize,
    pub target: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedDigraph {
    n: usize,
    arcs: Vec<Arc>,
    undirected: bool,
    weights: DMatrix<f64>,
}

impl WeightedDigraph {
    /// Builds a digraph on `n` vertices. With `undirected` set, each input arc
    /// is stored in both directions (a self-loop is stored once).
    pub fn new(n: usize, arcs: impl IntoIterator<Item = Arc>, undirected: bool) -> Result<Self> {
        if n == 0 {
            return Err(Error::Validation("graph has no vertices".into()));
        }
        let mut stored = Vec::new();
        let mut weights = DMatrix::zeros(n, n);
        for arc in arcs {
            if arc.source >= n || arc.target >= n {
                return Err(Error::Validation(format!(
                    "arc {} -> {} out of range for {} vertices",
                    arc.source, arc.target, n
                )));
            }
            if !arc.weight.is_finite() || arc.weight < 0.0 {
                return Err(Error::Validation(format!(
                    "arc {} -> {} has invalid weight {}",
                    arc.source, arc.target, arc.weight
                )));
            }
            weights[(arc.source, arc.target)] += arc.weight;
            stored.push(arc);
            if undirected && arc.source != arc.target {
                weights[(arc.target, arc.source)] += arc.weight;
                stored.push(Arc {
                    source: arc.target,
                    target: arc.source,
                    weight: arc.weight,
                });
            }
        }
        for i in 0..n {
            if weights.row(i).sum() <= 0.0 {
                return Err(Error::Validation(format!("vertex {i} has zero out-weight")));
            }
        }
        Ok(WeightedDigraph {
            n,
            arcs: stored,
            undirected,
            weights,
        })
    }

    /// Unit-weight undirected graph from an edge list.
    pub fn undirected_unit(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        Self::new(
            n,
            edges.iter().map(|&(s, t)| Arc {
                source: s,
                target: t,
                weight: 1.0,
            }),
            true,
        )
    }

    /// Unit-weight digraph from an arc list.
    pub fn directed_unit(n: usize, arcs: &[(usize, usize)]) -> Result<Self> {
        Self::new(
            n,
            arcs.iter().map(|&(s, t)| Arc {
                source: s,
                target: t,
                weight: 1.0,
            }),
            false,
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Stored arcs; for undirected graphs both orientations are present.
    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn is_undirected(&self) -> bool {
        self.undirected
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[(i, j)]
    }

    /// Dense weighted adjacency matrix.
    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    /// Weighted out-degree of every vertex.
    pub fn degrees(&self) -> DVector<f64> {
        DVector::from_iterator(self.n, self.weights.row_iter().map(|r| r.sum()))
    }

    pub fn volume(&self) -> f64 {
        self.weights.sum()
    }

    /// Number of undirected edges (self-loops count once). Directed graphs
    /// report their arc count.
    pub fn edge_count(&self) -> usize {
        if self.undirected {
            let loops = self.arcs.iter().filter(|a| a.source == a.target).count();
            (self.arcs.len() - loops) / 2 + loops
        } else {
            self.arcs.len()
        }
    }

    /// Neighbours `j` with `weight(i, j) > 0`.
    pub fn out_neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&j| self.weights[(i, j)] > 0.0)
    }
}

/// Row-stochastic matrix `P = βI + (1−β)P₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    p: DMatrix<f64>,
    laziness: f64,
    // Present when the chain is the walk on an undirected graph; the
    // stationary distribution is then deg/vol.
    degrees: Option<DVector<f64>>,
}

impl TransitionMatrix {
    pub fn from_graph(g: &WeightedDigraph, laziness: f64) -> Result<Self> {
        check_laziness(laziness)?;
        let n = g.n();
        let deg = g.degrees();
        let mut p = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                p[(i, j)] = (1.0 - laziness) * g.weight(i, j) / deg[i];
            }
            p[(i, i)] += laziness;
        }
        Ok(TransitionMatrix {
            p,
            laziness,
            degrees: g.is_undirected().then_some(deg),
        })
    }

    /// Wraps an arbitrary row-stochastic matrix (laziness 0).
    pub fn from_matrix(p: DMatrix<f64>) -> Result<Self> {
        if !p.is_square() || p.nrows() == 0 {
            return Err(Error::Validation(
                "transition matrix must be square and non-empty".into(),
            ));
        }
        if p.iter().any(|&x| !x.is_finite() || x < 0.0) {
            return Err(Error::Validation(
                "transition matrix has a negative or non-finite entry".into(),
            ));
        }
        let worst = row_sum_defect(&p);
        if worst > tol::STOCHASTIC {
            return Err(Error::Validation(format!(
                "transition matrix rows do not sum to 1 (max defect {worst:e})"
            )));
        }
        Ok(TransitionMatrix {
            p,
            laziness: 0.0,
            degrees: None,
        })
    }

    pub fn n(&self) -> usize {
        self.p.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.p
    }

    pub fn laziness(&self) -> f64 {
        self.laziness
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.p[(i, j)]
    }

    /// Whether the chain came from an undirected (hence reversible) graph.
    pub fn is_reversible_walk(&self) -> bool {
        self.degrees.is_some()
    }

    pub(crate) fn walk_degrees(&self) -> Option<&DVector<f64>> {
        self.degrees.as_ref()
    }

    /// The Laplace operator `Δ = I − P`.
    pub fn laplacian(&self) -> DMatrix<f64> {
        DMatrix::identity(self.n(), self.n()) - &self.p
    }

    /// Max over rows of `|Σ_j P(i,j) − 1|`.
    pub fn row_sum_defect(&self) -> f64 {
        row_sum_defect(&self.p)
    }

    /// Whether the support of `P` (ignoring self-loops) is strongly connected.
    pub fn is_irreducible(&self) -> bool {
        let n = self.n();
        support_strongly_connected(
            n,
            (0..n)
                .flat_map(|i| (0..n).map(move |j| (i, j)))
                .filter(|&(i, j)| i != j && self.p[(i, j)] > 0.0),
        )
    }
}

fn check_laziness(beta: f64) -> Result<()> {
    if (0.0..1.0).contains(&beta) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "laziness {beta} not in [0, 1)"
        )))
    }
}

fn row_sum_defect(p: &DMatrix<f64>) -> f64 {
    p.row_iter()
        .map(|r| (r.sum() - 1.0).abs())
        .fold(0.0, f64::max)
}

/// A probability vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution(DVector<f64>);

impl Distribution {
    pub fn new(p: DVector<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::InvalidArgument("empty distribution".into()));
        }
        if p.iter().any(|&x| !x.is_finite() || x < 0.0) {
            return Err(Error::InvalidArgument(
                "distribution has a negative or non-finite entry".into(),
            ));
        }
        let defect = (p.sum() - 1.0).abs();
        if defect > tol::STOCHASTIC {
            return Err(Error::InvalidArgument(format!(
                "distribution sums to {} (defect {defect:e})",
                p.sum()
            )));
        }
        Ok(Distribution(p))
    }

    pub fn from_slice(p: &[f64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(p))
    }

    /// Normalizes nonnegative weights into a distribution.
    pub fn from_weights(w: &[f64]) -> Result<Self> {
        let total: f64 = w.iter().sum();
        if total.is_nan() || total <= 0.0 || w.iter().any(|&x| x.is_nan() || x < 0.0) {
            return Err(Error::InvalidArgument(
                "weights must be nonnegative with positive sum".into(),
            ));
        }
        Self::new(DVector::from_iterator(
            w.len(),
            w.iter().map(|&x| x / total),
        ))
    }

    pub fn point_mass(n: usize, k: usize) -> Result<Self> {
        if k >= n {
            return Err(Error::InvalidArgument(format!(
                "vertex {k} out of range for {n} vertices"
            )));
        }
        let mut v = DVector::zeros(n);
        v[k] = 1.0;
        Ok(Distribution(v))
    }

    pub fn uniform(n: usize) -> Self {
        Distribution(DVector::from_element(n, 1.0 / n as f64))
    }

    // Callers guarantee the invariants up to floating-point noise.
    pub(crate) fn from_vector_unchecked(p: DVector<f64>) -> Self {
        Distribution(p)
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn vector(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    /// Max-abs residual of `πᵀP − πᵀ`.
    pub fn stationarity_residual(&self, p: &TransitionMatrix) -> f64 {
        (p.matrix().transpose() * &self.0 - &self.0).amax()
    }
}

impl std::ops::Index<usize> for Distribution {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Stationary distribution of an irreducible chain.
///
/// Walks on undirected graphs use the closed form `deg(i)/vol`; everything
/// else solves `(Pᵀ − I)x = 0` with one equation replaced by `Σx = 1`.
pub fn stationary_distribution(p: &TransitionMatrix) -> Result<Distribution> {
    if !p.is_irreducible() {
        return Err(Error::NotStronglyConnected);
    }
    if let Some(deg) = p.walk_degrees() {
        let vol = deg.sum();
        return Ok(Distribution(deg / vol));
    }
    let n = p.n();
    let mut a = p.matrix().transpose() - DMatrix::identity(n, n);
    a.row_mut(n - 1).fill(1.0);
    let mut rhs = DVector::zeros(n);
    rhs[n - 1] = 1.0;
    let x = a.lu().solve(&rhs).ok_or_else(|| Error::Numerical {
        context: "stationary solve".into(),
        residual: f64::INFINITY,
    })?;
    let pi = Distribution(x);
    let residual = pi.stationarity_residual(p);
    if residual > tol::STATIONARY || pi.0.iter().any(|&x| x <= 0.0) {
        return Err(Error::Numerical {
            context: "stationary solve".into(),
            residual,
        });
    }
    Ok(pi)
}

/// True iff a single strongly connected component spans every vertex,
/// counting only arcs of positive weight.
pub fn strongly_connected(g: &WeightedDigraph) -> bool {
    support_strongly_connected(
        g.n(),
        g.arcs()
            .iter()
            .filter(|a| a.weight > 0.0)
            .map(|a| (a.source, a.target)),
    )
}

fn support_strongly_connected(n: usize, arcs: impl Iterator<Item = (usize, usize)>) -> bool {
    let mut dg = DiGraph::<(), ()>::with_capacity(n, 0);
    let nodes: Vec<_> = (0..n).map(|_| dg.add_node(())).collect();
    for (s, t) in arcs {
        dg.add_edge(nodes[s], nodes[t], ());
    }
    tarjan_scc(&dg).len() == 1
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k3() -> WeightedDigraph {
        WeightedDigraph::undirected_unit(3, &[(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    fn p3() -> WeightedDigraph {
        WeightedDigraph::undirected_unit(3, &[(0, 1), (1, 2)]).unwrap()
    }

    fn dicycle3() -> WeightedDigraph {
        WeightedDigraph::directed_unit(3, &[(0, 1), (1, 2), (2, 0)]).unwrap()
    }

    #[test]
    fn k3_transition_is_half_off_diagonal() {
        let p = TransitionMatrix::from_graph(&k3(), 0.0).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 0.0 } else { 0.5 };
                assert_eq!(p.get(i, j), expect);
            }
        }
    }

    #[test]
    fn path_transition_plain_and_lazy() {
        let p = TransitionMatrix::from_graph(&p3(), 0.0).unwrap();
        assert_eq!(p.get(0, 1), 1.0);
        assert_eq!(p.get(1, 0), 0.5);
        assert_eq!(p.get(1, 2), 0.5);

        let lazy = TransitionMatrix::from_graph(&p3(), 0.5).unwrap();
        assert_eq!(lazy.get(0, 0), 0.5);
        assert_eq!(lazy.get(0, 1), 0.5);
        assert_eq!(lazy.get(1, 1), 0.5);
        assert_eq!(lazy.get(1, 0), 0.25);
        assert_eq!(lazy.get(1, 2), 0.25);
        assert!(lazy.row_sum_defect() <= 1e-12);
    }

    #[test]
    fn laziness_out_of_range() {
        assert!(matches!(
            TransitionMatrix::from_graph(&p3(), 1.0),
            Err(Error::InvalidArgument(_))
        ));
        assert!(TransitionMatrix::from_graph(&p3(), -0.1).is_err());
    }

    #[test]
    fn stationary_examples() {
        let c4 = WeightedDigraph::undirected_unit(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let pi = stationary_distribution(&TransitionMatrix::from_graph(&c4, 0.0).unwrap()).unwrap();
        assert_eq!(pi.as_slice(), &[0.25; 4]);

        let pi =
            stationary_distribution(&TransitionMatrix::from_graph(&p3(), 0.0).unwrap()).unwrap();
        assert_eq!(pi.as_slice(), &[0.25, 0.5, 0.25]);

        let pi = stationary_distribution(&TransitionMatrix::from_graph(&dicycle3(), 0.0).unwrap())
            .unwrap();
        for &x in pi.as_slice() {
            assert!((x - 1.0 / 3.0).abs() < 1e-14);
        }
    }

    #[test]
    fn stationary_rejects_reducible_chain() {
        // 0 <-> 1 -> 2 <-> 3: every vertex has out-weight but 2,3 never return.
        let g =
            WeightedDigraph::directed_unit(4, &[(0, 1), (1, 0), (1, 2), (2, 3), (3, 2)]).unwrap();
        let p = TransitionMatrix::from_graph(&g, 0.0).unwrap();
        assert_eq!(
            stationary_distribution(&p),
            Err(Error::NotStronglyConnected)
        );
    }

    #[test]
    fn solved_stationary_matches_closed_form_for_undirected() {
        let g =
            WeightedDigraph::undirected_unit(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (1, 3), (0, 4)])
                .unwrap();
        let p = TransitionMatrix::from_graph(&g, 0.0).unwrap();
        let closed = stationary_distribution(&p).unwrap();
        // Strip the undirected marker to force the LU route.
        let generic = TransitionMatrix::from_matrix(p.matrix().clone()).unwrap();
        let solved = stationary_distribution(&generic).unwrap();
        assert!((closed.vector() - solved.vector()).amax() <= 1e-12);
    }

    #[test]
    fn strong_connectivity() {
        assert!(strongly_connected(&dicycle3()));
        assert!(strongly_connected(&p3()));
        // 0 -> 1 only; vertex 1 needs an out-arc to be a valid graph, use a self-loop.
        let g = WeightedDigraph::directed_unit(2, &[(0, 1), (1, 1)]).unwrap();
        assert!(!strongly_connected(&g));
    }

    #[test]
    fn zero_out_weight_is_rejected() {
        let err = WeightedDigraph::directed_unit(2, &[(0, 1)]).unwrap_err();
        assert!(matches!(err, Error::Validation(m) if m.contains("vertex 1")));
    }

    #[test]
    fn volume_counts_both_orientations() {
        let g = p3();
        assert_eq!(g.volume(), 4.0);
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.arcs().len(), 4);
    }
}
