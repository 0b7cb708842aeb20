//! Green's functions built from hitting times, exit frequency matrices and
//! the mixing measures that can be read off them.
//!
//! For a target distribution `τ` the (generalized) Green's function is
//!
//! ```text
//! G_τ(i,j) = π_j (H(τ,j) − H(i,j))
//! ```
//!
//! which for `τ = π` is the classical Green's function: the unique matrix with
//! `G(I − P) = I − 1πᵀ` and `G1 = 0`. The exit frequency matrix `X_τ` differs
//! from `G_τ` by the rank-one term `hπᵀ` where `h_i = H(i,τ)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::{Distribution, TransitionMatrix};
use crate::hitting::HittingTimeMatrix;
use crate::tol;

#[derive(Debug, Clone, PartialEq)]
pub struct GreensMatrix {
    g: DMatrix<f64>,
    target: Distribution,
}

impl GreensMatrix {
    /// Wraps an arbitrary matrix for checking with [`verify_green_constraints`].
    pub fn from_parts(g: DMatrix<f64>, target: Distribution) -> Result<Self> {
        if g.nrows() != target.n() || g.ncols() != target.n() {
            return Err(Error::InvalidArgument(
                "matrix and target sizes differ".into(),
            ));
        }
        Ok(GreensMatrix { g, target })
    }

    pub fn n(&self) -> usize {
        self.g.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.g
    }

    pub fn target(&self) -> &Distribution {
        &self.target
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.g[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        self.g.trace()
    }

    /// Max-abs of `G·1`.
    pub fn row_sum_residual(&self) -> f64 {
        self.g.row_iter().map(|r| r.sum().abs()).fold(0.0, f64::max)
    }

    /// Max-abs of `π_i G(i,j) − π_j G(j,i)`; zero for reversible chains.
    pub fn symmetry_residual(&self, pi: &Distribution) -> f64 {
        let n = self.n();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                worst = worst.max((pi[i] * self.g[(i, j)] - pi[j] * self.g[(j, i)]).abs());
            }
        }
        worst
    }
}

fn greens_from_access(
    h: &HittingTimeMatrix,
    pi: &Distribution,
    from_target: &DVector<f64>,
    target: Distribution,
) -> Result<GreensMatrix> {
    let n = h.n();
    let g = DMatrix::from_fn(n, n, |i, j| pi[j] * (from_target[j] - h.get(i, j)));
    let m = GreensMatrix { g, target };
    let residual = m.row_sum_residual();
    if residual > tol::matrix(n) {
        return Err(Error::integrity("Green's function row sums", residual));
    }
    Ok(m)
}

/// `G(i,j) = π_j (H(π,j) − H(i,j))`. Valid for directed chains.
pub fn greens_function(h: &HittingTimeMatrix, pi: &Distribution) -> Result<GreensMatrix> {
    greens_from_access(h, pi, &h.from_distribution(pi), pi.clone())
}

/// `G_τ(i,j) = π_j (H(τ,j) − H(i,j))`.
pub fn greens_general(
    h: &HittingTimeMatrix,
    pi: &Distribution,
    tau: &Distribution,
) -> Result<GreensMatrix> {
    check_size(h, tau)?;
    greens_from_access(h, pi, &h.from_distribution(tau), tau.clone())
}

fn check_size(h: &HittingTimeMatrix, d: &Distribution) -> Result<()> {
    if h.n() == d.n() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "distribution has {} entries, chain has {} states",
            d.n(),
            h.n()
        )))
    }
}

/// Residuals of the two defining constraints of a Green's function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenResiduals {
    /// Max-abs of `M(I − P) − (I − 1·targetᵀ)`.
    pub constraint: f64,
    /// Max-abs of `M·1`.
    pub row_sums: f64,
}

impl GreenResiduals {
    pub fn within(&self, tol: f64) -> bool {
        self.constraint <= tol && self.row_sums <= tol
    }
}

pub fn verify_green_constraints(m: &GreensMatrix, p: &TransitionMatrix) -> GreenResiduals {
    GreenResiduals {
        constraint: conservation_residual(m.matrix(), p, m.target()),
        row_sums: m.row_sum_residual(),
    }
}

/// Max-abs of `M(I − P) − (I − 1τᵀ)`.
pub(crate) fn conservation_residual(
    m: &DMatrix<f64>,
    p: &TransitionMatrix,
    tau: &Distribution,
) -> f64 {
    let n = p.n();
    let ones = DVector::from_element(n, 1.0);
    let rhs = DMatrix::<f64>::identity(n, n) - ones * tau.vector().transpose();
    (m * p.laplacian() - rhs).amax()
}

/// `H(i,j) = (G(j,j) − G(i,j)) / π_j`, inverting [`greens_function`].
pub fn hitting_from_greens(m: &GreensMatrix, pi: &Distribution) -> HittingTimeMatrix {
    let n = m.n();
    HittingTimeMatrix::from_matrix(DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            (m.get(j, j) - m.get(i, j)) / pi[j]
        }
    }))
}

/// Expected exits `X(i,j) = x_j(i, τ)` of an optimal rule from `i` to `τ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExitFrequencyMatrix {
    x: DMatrix<f64>,
    target: Distribution,
    access: DVector<f64>,
}

impl ExitFrequencyMatrix {
    /// Wraps a matrix produced elsewhere (e.g. by a duality transform). The
    /// access vector is taken to be the row sums.
    pub fn from_parts(x: DMatrix<f64>, target: Distribution) -> Self {
        let access = DVector::from_iterator(x.nrows(), x.row_iter().map(|r| r.sum()));
        ExitFrequencyMatrix { x, target, access }
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn target(&self) -> &Distribution {
        &self.target
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.x[(i, j)]
    }

    /// `h_i = H(i, τ)`.
    pub fn access_times(&self) -> &DVector<f64> {
        &self.access
    }

    /// States `j` with zero exit frequency from start `i`.
    pub fn halting_states(&self, i: usize) -> Vec<usize> {
        (0..self.n())
            .filter(|&j| self.x[(i, j)] <= tol::CLAMP)
            .collect()
    }

    /// Max over rows of the row minimum; an optimal rule has a halting state
    /// in every row, so this is at most the clamp tolerance.
    pub fn max_row_minimum(&self) -> f64 {
        self.x
            .row_iter()
            .map(|r| r.min())
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_entry(&self) -> f64 {
        self.x.min()
    }

    /// Max-abs of `X(I − P) − (I − 1τᵀ)`.
    pub fn conservation_residual(&self, p: &TransitionMatrix) -> f64 {
        conservation_residual(&self.x, p, &self.target)
    }

    /// Max over rows of `|Σ_j X(i,j) − H(i,τ)|`.
    pub fn row_sum_residual(&self) -> f64 {
        self.x
            .row_iter()
            .zip(self.access.iter())
            .map(|(r, h)| (r.sum() - h).abs())
            .fold(0.0, f64::max)
    }

    /// `G_τ = X_τ − hπᵀ`.
    pub fn to_greens(&self, pi: &Distribution) -> GreensMatrix {
        GreensMatrix {
            g: &self.x - &self.access * pi.vector().transpose(),
            target: self.target.clone(),
        }
    }
}

/// `x_j(i,τ) = π_j (H(i,τ) + H(τ,j) − H(i,j))` with `H(i,τ)` from the max
/// formula. Entries within `-1e-10` of zero are clamped.
pub fn exit_frequency_matrix(
    h: &HittingTimeMatrix,
    pi: &Distribution,
    tau: &Distribution,
) -> Result<ExitFrequencyMatrix> {
    check_size(h, tau)?;
    let n = h.n();
    let from_tau = h.from_distribution(tau);
    let access = h.to_distribution(tau);
    let mut x = DMatrix::from_fn(n, n, |i, j| pi[j] * (access[i] + from_tau[j] - h.get(i, j)));
    let worst = x.min();
    if worst < -tol::CLAMP {
        return Err(Error::integrity("negative exit frequency", worst));
    }
    x.apply(|v| *v = v.max(0.0));
    Ok(ExitFrequencyMatrix {
        x,
        target: tau.clone(),
        access,
    })
}

/// Exact mixing measures of a chain.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingReport {
    /// `H(i, π)` for every vertex.
    pub access_to_pi: DVector<f64>,
    pub t_mix: f64,
    pub t_reset: f64,
    pub t_hit: f64,
    /// `pessimal[i]` is the lowest-index vertex maximizing `H(·, i)`.
    pub pessimal: Vec<usize>,
    /// Halting states of each row of `X_π`.
    pub halting: Vec<Vec<usize>>,
    /// Vertices `z` with `H(z, π) = T_mix`.
    pub mixing_pessimal: Vec<usize>,
}

/// Mixing measures from `H` and the classical Green's function.
///
/// `H(i,π) = max_j −G(i,j)/π_j`, `T_mix = max_i H(i,π)`,
/// `T_reset = Σ π_i H(i,π)` and `T_hit = Tr(G)`. When `reversible` is set, the
/// second mixing time route `H(i,π) = H(i',i) − H(π,i)` through the pessimal
/// vertex is checked, as is `i'` being a halting state for row `i` of `X_π`.
pub fn mixing_report(
    h: &HittingTimeMatrix,
    g: &GreensMatrix,
    pi: &Distribution,
    reversible: bool,
) -> Result<MixingReport> {
    let n = h.n();
    let access_to_pi = DVector::from_iterator(
        n,
        (0..n).map(|i| {
            (0..n)
                .map(|j| -g.get(i, j) / pi[j])
                .fold(f64::NEG_INFINITY, f64::max)
        }),
    );
    let t_mix = access_to_pi.max();
    let t_reset = access_to_pi.dot(pi.vector());
    let t_hit = g.trace();
    let scale = tol::time(t_hit.max(t_mix));

    let pessimal: Vec<usize> = (0..n)
        .map(|i| {
            let col = h.matrix().column(i);
            let best = col.max();
            (0..n).find(|&j| col[j] >= best - scale).unwrap_or(0)
        })
        .collect();

    let mixing_pessimal = (0..n)
        .filter(|&z| access_to_pi[z] >= t_mix - scale)
        .collect();

    let x_pi = ExitFrequencyMatrix {
        x: g.matrix() + &access_to_pi * pi.vector().transpose(),
        target: pi.clone(),
        access: access_to_pi.clone(),
    };
    let halting = (0..n).map(|i| x_pi.halting_states(i)).collect();

    if reversible {
        let from_pi = h.from_distribution(pi);
        for i in 0..n {
            let via_pessimal = h.get(pessimal[i], i) - from_pi[i];
            let residual = (via_pessimal - access_to_pi[i]).abs();
            if residual > scale {
                return Err(Error::integrity(
                    format!(
                        "mixing time through pessimal vertex {} of vertex {i}",
                        pessimal[i]
                    ),
                    residual,
                ));
            }
            let exit = x_pi.get(i, pessimal[i]);
            if exit > tol::CLAMP.max(scale * pi[pessimal[i]]) {
                return Err(Error::integrity(
                    format!(
                        "pessimal vertex {} is not halting for vertex {i}",
                        pessimal[i]
                    ),
                    exit,
                ));
            }
        }
    }

    Ok(MixingReport {
        access_to_pi,
        t_mix,
        t_reset,
        t_hit,
        pessimal,
        halting,
        mixing_pessimal,
    })
}
