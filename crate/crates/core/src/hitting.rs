//! Hitting times, access times and return times.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{Distribution, TransitionMatrix};
use crate::tol;

/// `Z = (I − P + 1πᵀ)⁻¹`.
#[derive(Debug, Clone, PartialEq)]
pub struct FundamentalMatrix(DMatrix<f64>);

impl FundamentalMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }
}

fn fundamental_operator(p: &TransitionMatrix, pi: &Distribution) -> DMatrix<f64> {
    let n = p.n();
    let ones = DVector::from_element(n, 1.0);
    p.laplacian() + ones * pi.vector().transpose()
}

pub fn fundamental_matrix(p: &TransitionMatrix, pi: &Distribution) -> Result<FundamentalMatrix> {
    let n = p.n();
    let a = fundamental_operator(p, pi);
    let z = a
        .clone()
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::Numerical {
            context: "fundamental matrix inverse".into(),
            residual: f64::INFINITY,
        })?;
    let residual = (&z * &a - DMatrix::<f64>::identity(n, n)).amax();
    if residual > tol::matrix(n) {
        return Err(Error::Numerical {
            context: "fundamental matrix inverse".into(),
            residual,
        });
    }
    Ok(FundamentalMatrix(z))
}

/// Max-abs residual of `Z(I − P + 1πᵀ) − I`.
pub fn fundamental_residual(z: &FundamentalMatrix, p: &TransitionMatrix, pi: &Distribution) -> f64 {
    let n = p.n();
    (z.matrix() * fundamental_operator(p, pi) - DMatrix::<f64>::identity(n, n)).amax()
}

/// Expected hitting times `H(i,j)`, with `H(i,i) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct HittingTimeMatrix(DMatrix<f64>);

impl HittingTimeMatrix {
    /// Wraps a raw matrix; the caller is responsible for its meaning.
    pub fn from_matrix(h: DMatrix<f64>) -> Self {
        HittingTimeMatrix(h)
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    /// The row vector `H(σ, ·)`.
    pub fn from_distribution(&self, sigma: &Distribution) -> DVector<f64> {
        self.0.tr_mul(sigma.vector())
    }

    /// `H(i, τ) = max_j (H(i,j) − H(τ,j))`, the access time from vertex `i`
    /// to the distribution `τ`.
    pub fn vertex_to_distribution(&self, i: usize, tau: &Distribution) -> f64 {
        let from_tau = self.from_distribution(tau);
        self.row_access(i, &from_tau)
    }

    /// `H(·, τ)` for every starting vertex.
    pub fn to_distribution(&self, tau: &Distribution) -> DVector<f64> {
        let from_tau = self.from_distribution(tau);
        DVector::from_iterator(
            self.n(),
            (0..self.n()).map(|i| self.row_access(i, &from_tau)),
        )
    }

    /// `H(σ, τ) = max_j (H(σ,j) − H(τ,j))`.
    pub fn distribution_to_distribution(&self, sigma: &Distribution, tau: &Distribution) -> f64 {
        let a = self.from_distribution(sigma);
        let b = self.from_distribution(tau);
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| x - y)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn row_access(&self, i: usize, from_tau: &DVector<f64>) -> f64 {
        self.0
            .row(i)
            .iter()
            .zip(from_tau.iter())
            .map(|(h, t)| h - t)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `H(i,j) = (Z(j,j) − Z(i,j)) / π_j`.
pub fn hitting_times(p: &TransitionMatrix, pi: &Distribution) -> Result<HittingTimeMatrix> {
    let z = fundamental_matrix(p, pi)?;
    Ok(hitting_from_fundamental(&z, pi))
}

pub fn hitting_from_fundamental(z: &FundamentalMatrix, pi: &Distribution) -> HittingTimeMatrix {
    let n = pi.n();
    let z = z.matrix();
    let h = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            (z[(j, j)] - z[(i, j)]) / pi[j]
        }
    });
    HittingTimeMatrix(h)
}

/// Max over `i ≠ j` of `|H(i,j) − 1 − Σ_k P(i,k) H(k,j)|`.
pub fn first_step_residual(h: &HittingTimeMatrix, p: &TransitionMatrix) -> f64 {
    let ph = p.matrix() * h.matrix();
    let n = h.n();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                worst = worst.max((h.get(i, j) - 1.0 - ph[(i, j)]).abs());
            }
        }
    }
    worst
}

/// `H(σ, j) = Σ_i σ_i H(i,j)`.
pub fn access_to_vertex(h: &HittingTimeMatrix, sigma: &Distribution, j: usize) -> f64 {
    h.matrix().column(j).dot(sigma.vector())
}

/// Expected return times `1/π_j`.
pub fn return_times(pi: &Distribution) -> DVector<f64> {
    pi.vector().map(|x| 1.0 / x)
}

/// `T_hit = Σ π_i π_k H(i,k)` together with the spread of the random target
/// sums `Σ_k π_k H(i,k)` around it, which should vanish.
pub fn hit_time(h: &HittingTimeMatrix, pi: &Distribution) -> (f64, f64) {
    let targets = h.matrix() * pi.vector();
    let t_hit = targets.dot(pi.vector());
    let residual = targets
        .iter()
        .map(|t| (t - t_hit).abs())
        .fold(0.0, f64::max);
    (t_hit, residual)
}

/// Residuals of the cycle reversing identity
/// `H(i,j)+H(j,k)+H(k,i) = H(j,i)+H(i,k)+H(k,j)` and of its stationary form
/// `H(π,i)+H(i,j) = H(π,j)+H(j,i)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleResiduals {
    pub triples: f64,
    pub pairs: f64,
}

/// Triples above this vertex count are sampled rather than enumerated.
pub const CYCLE_ENUMERATION_LIMIT: usize = 50;
pub const CYCLE_SAMPLE_TRIPLES: usize = 10_000;
const CYCLE_SAMPLE_SEED: u64 = 0x6379_636c_6573;

/// Both identities hold for reversible chains; on other chains the residuals
/// are simply reported.
pub fn check_cycle_identities(h: &HittingTimeMatrix, pi: &Distribution) -> CycleResiduals {
    let n = h.n();
    let defect = |i: usize, j: usize, k: usize| {
        let fwd = h.get(i, j) + h.get(j, k) + h.get(k, i);
        let bwd = h.get(j, i) + h.get(i, k) + h.get(k, j);
        (fwd - bwd).abs()
    };
    let mut triples: f64 = 0.0;
    if n <= CYCLE_ENUMERATION_LIMIT {
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    triples = triples.max(defect(i, j, k));
                }
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(CYCLE_SAMPLE_SEED);
        for _ in 0..CYCLE_SAMPLE_TRIPLES {
            let (i, j, k) = (
                rng.random_range(0..n),
                rng.random_range(0..n),
                rng.random_range(0..n),
            );
            triples = triples.max(defect(i, j, k));
        }
    }
    let from_pi = h.from_distribution(pi);
    let mut pairs: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let lhs = from_pi[i] + h.get(i, j);
            let rhs = from_pi[j] + h.get(j, i);
            pairs = pairs.max((lhs - rhs).abs());
        }
    }
    CycleResiduals { triples, pairs }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{stationary_distribution, WeightedDigraph};

    fn chain(g: &WeightedDigraph) -> (TransitionMatrix, Distribution, HittingTimeMatrix) {
        let p = TransitionMatrix::from_graph(g, 0.0).unwrap();
        let pi = stationary_distribution(&p).unwrap();
        let h = hitting_times(&p, &pi).unwrap();
        (p, pi, h)
    }

    fn cycle(n: usize) -> WeightedDigraph {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        WeightedDigraph::undirected_unit(n, &edges).unwrap()
    }

    fn complete(n: usize) -> WeightedDigraph {
        let mut e = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                e.push((i, j));
            }
        }
        WeightedDigraph::undirected_unit(n, &e).unwrap()
    }

    fn path3() -> WeightedDigraph {
        WeightedDigraph::undirected_unit(3, &[(0, 1), (1, 2)]).unwrap()
    }

    fn dicycle3() -> WeightedDigraph {
        WeightedDigraph::directed_unit(3, &[(0, 1), (1, 2), (2, 0)]).unwrap()
    }

    #[test]
    fn fundamental_matrix_properties() {
        let k2 = WeightedDigraph::undirected_unit(2, &[(0, 1)]).unwrap();
        let p = TransitionMatrix::from_graph(&k2, 0.5).unwrap();
        let pi = stationary_distribution(&p).unwrap();
        let z = fundamental_matrix(&p, &pi).unwrap();
        assert!(fundamental_residual(&z, &p, &pi) <= 1e-12);

        let (p, pi, _) = chain(&dicycle3());
        let z = fundamental_matrix(&p, &pi).unwrap();
        for i in 0..3 {
            assert!((z.matrix().row(i).sum() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn complete_graph_hitting_times() {
        let (_, _, h) = chain(&complete(5));
        for i in 0..5 {
            for j in 0..5 {
                let expect = if i == j { 0.0 } else { 4.0 };
                assert!((h.get(i, j) - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cycle_hitting_times_and_access_from_pi() {
        let (_, pi, h) = chain(&cycle(5));
        let expect = [0.0, 4.0, 6.0, 6.0, 4.0];
        for (j, e) in expect.iter().enumerate() {
            assert!((h.get(0, j) - e).abs() < 1e-12);
        }
        assert!((access_to_vertex(&h, &pi, 0) - 4.0).abs() < 1e-12);
        let delta = Distribution::point_mass(5, 3).unwrap();
        assert_eq!(access_to_vertex(&h, &delta, 1), h.get(3, 1));
    }

    #[test]
    fn bipartite_hitting_times() {
        // U = {0, 1}, W = {2, 3, 4}
        let mut e = Vec::new();
        for u in 0..2 {
            for w in 2..5 {
                e.push((u, w));
            }
        }
        let g = WeightedDigraph::undirected_unit(5, &e).unwrap();
        let (_, pi, h) = chain(&g);
        assert!((h.get(0, 2) - 5.0).abs() < 1e-12);
        assert!((h.get(2, 0) - 3.0).abs() < 1e-12);
        assert!((h.get(0, 1) - 4.0).abs() < 1e-12);
        assert!((h.get(2, 3) - 6.0).abs() < 1e-12);
        assert!((access_to_vertex(&h, &pi, 0) - 2.5).abs() < 1e-12);
    }

    #[test]
    fn return_time_examples() {
        assert_eq!(
            return_times(&Distribution::uniform(4)).as_slice(),
            &[4.0; 4]
        );
        let (_, pi, _) = chain(&path3());
        assert_eq!(return_times(&pi).as_slice(), &[4.0, 2.0, 4.0]);
    }

    #[test]
    fn hit_time_examples() {
        let (_, pi, h) = chain(&complete(3));
        let (t, r) = hit_time(&h, &pi);
        assert!((t - 4.0 / 3.0).abs() < 1e-12);
        assert!(r <= 1e-10);

        let (_, pi, h) = chain(&cycle(4));
        let (t, _) = hit_time(&h, &pi);
        assert!((t - 2.5).abs() < 1e-12);
    }

    #[test]
    fn cycle_identities_on_path_and_dicycle() {
        let (_, pi, h) = chain(&path3());
        // 1 + 3 + 4 = 3 + 4 + 1
        assert!((h.get(0, 1) - 1.0).abs() < 1e-12);
        assert!((h.get(1, 2) - 3.0).abs() < 1e-12);
        assert!((h.get(2, 0) - 4.0).abs() < 1e-12);
        let r = check_cycle_identities(&h, &pi);
        assert!(r.triples <= 1e-10 && r.pairs <= 1e-10);

        let (_, pi, h) = chain(&dicycle3());
        let r = check_cycle_identities(&h, &pi);
        assert!((r.triples - 3.0).abs() < 1e-10);
    }

    #[test]
    fn sampled_cycle_identities_on_large_cycle() {
        let (_, pi, h) = chain(&cycle(60));
        let r = check_cycle_identities(&h, &pi);
        assert!(r.triples <= 1e-8 * 900.0);
        assert!(r.pairs <= 1e-8 * 900.0);
    }

    #[test]
    fn first_step_equations_hold() {
        let (p, _, h) = chain(&dicycle3());
        assert!(first_step_residual(&h, &p) <= 1e-12);
        assert_eq!(h.get(1, 0), 2.0);
    }

    #[test]
    fn access_to_distribution_by_max_formula() {
        let (_, pi, h) = chain(&path3());
        let to_pi = h.to_distribution(&pi);
        let expect = [1.5, 0.5, 1.5];
        for i in 0..3 {
            assert!((to_pi[i] - expect[i]).abs() < 1e-12);
        }
        let delta = Distribution::point_mass(3, 2).unwrap();
        assert!((h.vertex_to_distribution(0, &delta) - 4.0).abs() < 1e-12);
        assert!(h.distribution_to_distribution(&pi, &pi).abs() < 1e-12);
    }
}
