//! Spectral route for undirected graphs.
//!
//! Everything here is computed from the eigensystem of the symmetric
//! normalized Laplacian `I − D^{-1/2} A D^{-1/2}` and is independent of the
//! fundamental-matrix route in [`crate::hitting`]. With
//! `S(i,j) = Σ_{k≥1} φ_k(i) φ_k(j) / λ_k`:
//!
//! ```text
//! H(i,j)  = vol · (S(j,j)/deg(j) − S(i,j)/√(deg(i)deg(j)))
//! G(i,j)  = √(deg(j)/deg(i)) · S(i,j)
//! H(π,j)  = vol/deg(j) · S(j,j)
//! H(i,π)  = −vol/√(deg(i)deg(i')) · S(i,i')
//! T_hit   = Σ_{k≥1} 1/λ_k
//! ```

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::graph::{Distribution, WeightedDigraph};
use crate::greens::GreensMatrix;
use crate::hitting::HittingTimeMatrix;
use crate::tol;

/// `I − D^{-1/2} A D^{-1/2}` of an undirected graph.
pub fn normalized_laplacian(g: &WeightedDigraph) -> Result<DMatrix<f64>> {
    if !g.is_undirected() {
        return Err(Error::Unsupported(
            "the normalized Laplacian is only defined here for undirected graphs".into(),
        ));
    }
    let n = g.n();
    let inv_sqrt = g.degrees().map(|d| 1.0 / d.sqrt());
    Ok(DMatrix::from_fn(n, n, |i, j| {
        let a = g.weight(i, j) * inv_sqrt[i] * inv_sqrt[j];
        if i == j {
            1.0 - a
        } else {
            -a
        }
    }))
}

/// Eigenvalues in ascending order with matching orthonormal eigenvector
/// columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigensystem {
    pub values: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

impl Eigensystem {
    /// Max-abs of `ΦᵀΦ − I`.
    pub fn orthonormality_residual(&self) -> f64 {
        let n = self.values.len();
        (self.vectors.tr_mul(&self.vectors) - DMatrix::<f64>::identity(n, n)).amax()
    }

    /// Max-abs of `M − ΦΛΦᵀ`.
    pub fn reconstruction_residual(&self, m: &DMatrix<f64>) -> f64 {
        let scaled = &self.vectors * DMatrix::from_diagonal(&self.values);
        (m - scaled * self.vectors.transpose()).amax()
    }
}

const EIGEN_MAX_ITER: usize = 10_000;

pub fn eigensystem(m: &DMatrix<f64>) -> Result<Eigensystem> {
    if !m.is_square() {
        return Err(Error::InvalidArgument("matrix is not square".into()));
    }
    let asym = (m - m.transpose()).amax();
    if asym > 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "matrix is not symmetric (defect {asym:e})"
        )));
    }
    let eig =
        SymmetricEigen::try_new(m.clone(), f64::EPSILON, EIGEN_MAX_ITER).ok_or_else(|| {
            Error::Numerical {
                context: "symmetric eigensolver did not converge".into(),
                residual: f64::NAN,
            }
        })?;
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = DVector::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k]));
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    let sys = Eigensystem { values, vectors };
    let residual = sys
        .reconstruction_residual(m)
        .max(sys.orthonormality_residual());
    if residual > tol::matrix(n).max(1e-9) {
        return Err(Error::Numerical {
            context: "symmetric eigensolver".into(),
            residual,
        });
    }
    Ok(sys)
}

/// Eigensystem of the normalized Laplacian with the degree data needed to
/// turn it into walk quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    eigen: Eigensystem,
    degrees: DVector<f64>,
    volume: f64,
    // Σ_{k≥1} φ_k φ_kᵀ / λ_k
    pseudo_inverse: DMatrix<f64>,
}

impl SpectralDecomposition {
    /// Fails with [`Error::Validation`] if more than one eigenvalue is zero
    /// (the graph is disconnected).
    pub fn of_graph(g: &WeightedDigraph) -> Result<Self> {
        let m = normalized_laplacian(g)?;
        let eigen = eigensystem(&m)?;
        let zero_modes = eigen
            .values
            .iter()
            .filter(|&&l| l < tol::ZERO_EIGENVALUE)
            .count();
        if zero_modes != 1 {
            return Err(Error::Validation(format!(
                "graph disconnected ({zero_modes} zero eigenvalues)"
            )));
        }
        let n = g.n();
        let mut scaled = eigen.vectors.columns(1, n - 1).clone_owned();
        for (k, mut col) in scaled.column_iter_mut().enumerate() {
            col /= eigen.values[k + 1];
        }
        let pseudo_inverse = scaled * eigen.vectors.columns(1, n - 1).transpose();
        Ok(SpectralDecomposition {
            eigen,
            degrees: g.degrees(),
            volume: g.volume(),
            pseudo_inverse,
        })
    }

    pub fn n(&self) -> usize {
        self.degrees.len()
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigen.values
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigen.vectors
    }

    pub fn eigensystem(&self) -> &Eigensystem {
        &self.eigen
    }

    pub fn degrees(&self) -> &DVector<f64> {
        &self.degrees
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn stationary(&self) -> Distribution {
        Distribution::from_vector_unchecked(&self.degrees / self.volume)
    }

    /// Max-abs distance of `φ_0` from the unit vector along `√deg`, up to
    /// sign.
    pub fn ground_state_residual(&self) -> f64 {
        let sqrt_deg = self.degrees.map(f64::sqrt);
        let expect = &sqrt_deg / sqrt_deg.norm();
        let phi0 = self.eigen.vectors.column(0);
        (phi0 - &expect).amax().min((phi0 + &expect).amax())
    }

    /// `Σ_{k≥1} φ_k(i) φ_k(j) / λ_k`.
    fn s(&self, i: usize, j: usize) -> f64 {
        self.pseudo_inverse[(i, j)]
    }
}

pub fn spectral_hitting(dec: &SpectralDecomposition) -> HittingTimeMatrix {
    let n = dec.n();
    let d = dec.degrees();
    let vol = dec.volume();
    HittingTimeMatrix::from_matrix(DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            vol * (dec.s(j, j) / d[j] - dec.s(i, j) / (d[i] * d[j]).sqrt())
        }
    }))
}

pub fn spectral_greens(dec: &SpectralDecomposition) -> GreensMatrix {
    let n = dec.n();
    let d = dec.degrees();
    let g = DMatrix::from_fn(n, n, |i, j| (d[j] / d[i]).sqrt() * dec.s(i, j));
    GreensMatrix::from_parts(g, dec.stationary()).expect("sizes agree")
}

/// `H(π, j) = vol/deg(j) · Σ_{k≥1} φ_k(j)² / λ_k`.
pub fn spectral_access_from_pi(dec: &SpectralDecomposition) -> DVector<f64> {
    let d = dec.degrees();
    DVector::from_iterator(
        dec.n(),
        (0..dec.n()).map(|j| dec.volume() / d[j] * dec.s(j, j)),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralMixing {
    pub t_mix: f64,
    pub t_reset: f64,
    pub t_hit: f64,
}

/// Mixing measures from the eigensystem. `pessimal[i]` must be a vertex
/// maximizing `H(·, i)`.
pub fn spectral_mixing(dec: &SpectralDecomposition, pessimal: &[usize]) -> Result<SpectralMixing> {
    let n = dec.n();
    if pessimal.len() != n || pessimal.iter().any(|&v| v >= n) {
        return Err(Error::InvalidArgument(
            "pessimal map does not match the graph".into(),
        ));
    }
    let d = dec.degrees();
    let vol = dec.volume();
    let access: Vec<f64> = (0..n)
        .map(|i| {
            let ip = pessimal[i];
            -vol / (d[i] * d[ip]).sqrt() * dec.s(i, ip)
        })
        .collect();
    let t_mix = access.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let t_reset = access
        .iter()
        .zip(d.iter())
        .map(|(a, di)| a * di / vol)
        .sum();
    let t_hit = dec.eigenvalues().iter().skip(1).map(|l| 1.0 / l).sum();
    Ok(SpectralMixing {
        t_mix,
        t_reset,
        t_hit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(n: usize) -> WeightedDigraph {
        let e: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        WeightedDigraph::undirected_unit(n, &e).unwrap()
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

    fn p3() -> WeightedDigraph {
        WeightedDigraph::undirected_unit(3, &[(0, 1), (1, 2)]).unwrap()
    }

    fn assert_values(dec: &SpectralDecomposition, expect: &[f64]) {
        for (got, e) in dec.eigenvalues().iter().zip(expect) {
            assert!((got - e).abs() < 1e-12, "{got} vs {e}");
        }
    }

    #[test]
    fn laplacian_examples() {
        let l = normalized_laplacian(&complete(2)).unwrap();
        assert!((l - DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0])).amax() < 1e-15);

        let l = normalized_laplacian(&cycle(4)).unwrap();
        assert_eq!(l[(0, 0)], 1.0);
        assert!((l[(0, 1)] + 0.5).abs() < 1e-15);
        assert!((l[(0, 3)] + 0.5).abs() < 1e-15);
        assert_eq!(l[(0, 2)], 0.0);

        let l = normalized_laplacian(&p3()).unwrap();
        assert_eq!(l.diagonal(), DVector::from_element(3, 1.0));
        assert!((l[(0, 1)] + 1.0 / 2f64.sqrt()).abs() < 1e-15);
        assert!((l[(1, 2)] + 1.0 / 2f64.sqrt()).abs() < 1e-15);
        assert!((&l - l.transpose()).amax() <= 1e-12);
    }

    #[test]
    fn directed_input_is_unsupported() {
        let g = WeightedDigraph::directed_unit(3, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        assert!(matches!(
            normalized_laplacian(&g),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn eigenvalue_examples() {
        assert_values(
            &SpectralDecomposition::of_graph(&cycle(4)).unwrap(),
            &[0.0, 1.0, 1.0, 2.0],
        );
        assert_values(
            &SpectralDecomposition::of_graph(&complete(3)).unwrap(),
            &[0.0, 1.5, 1.5],
        );
        assert_values(
            &SpectralDecomposition::of_graph(&complete(2)).unwrap(),
            &[0.0, 2.0],
        );
    }

    #[test]
    fn decomposition_invariants() {
        let g =
            WeightedDigraph::undirected_unit(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (1, 4)]).unwrap();
        let dec = SpectralDecomposition::of_graph(&g).unwrap();
        assert!(dec.eigenvalues()[0].abs() < 1e-10);
        assert!(dec.eigenvalues()[1] > 1e-10);
        assert!(dec.eigensystem().orthonormality_residual() <= 1e-10);
        let l = normalized_laplacian(&g).unwrap();
        assert!(dec.eigensystem().reconstruction_residual(&l) <= 1e-9);
        assert!(dec.ground_state_residual() <= 1e-10);
    }

    #[test]
    fn disconnected_graph_is_rejected() {
        let g = WeightedDigraph::undirected_unit(4, &[(0, 1), (2, 3)]).unwrap();
        assert!(matches!(
            SpectralDecomposition::of_graph(&g),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn hitting_examples() {
        let h = spectral_hitting(&SpectralDecomposition::of_graph(&cycle(5)).unwrap());
        assert!((h.get(0, 2) - 6.0).abs() < 1e-10);
        let h = spectral_hitting(&SpectralDecomposition::of_graph(&complete(5)).unwrap());
        assert!((h.get(1, 3) - 4.0).abs() < 1e-10);
        let h = spectral_hitting(&SpectralDecomposition::of_graph(&p3()).unwrap());
        assert!((h.get(0, 2) - 4.0).abs() < 1e-10);
    }

    #[test]
    fn greens_examples() {
        let g = spectral_greens(&SpectralDecomposition::of_graph(&complete(3)).unwrap());
        assert!((g.get(1, 1) - 4.0 / 9.0).abs() < 1e-12);
        let g = spectral_greens(&SpectralDecomposition::of_graph(&cycle(4)).unwrap());
        assert!((g.get(0, 2) + 0.375).abs() < 1e-12);
        let dec = SpectralDecomposition::of_graph(&p3()).unwrap();
        let g = spectral_greens(&dec);
        assert!((g.get(0, 0) - 0.625).abs() < 1e-12);
        let from_pi = spectral_access_from_pi(&dec);
        assert!((from_pi[0] - 2.5).abs() < 1e-12);
        assert!((from_pi[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn mixing_examples() {
        let dec = SpectralDecomposition::of_graph(&cycle(4)).unwrap();
        let m = spectral_mixing(&dec, &[2, 3, 0, 1]).unwrap();
        assert!((m.t_hit - 2.5).abs() < 1e-12);
        assert!((m.t_mix - 1.5).abs() < 1e-12);
        assert!((m.t_reset - 1.5).abs() < 1e-12);

        let dec = SpectralDecomposition::of_graph(&complete(3)).unwrap();
        let m = spectral_mixing(&dec, &[1, 0, 0]).unwrap();
        assert!((m.t_hit - 4.0 / 3.0).abs() < 1e-12);
        assert!(spectral_mixing(&dec, &[0, 0]).is_err());
    }
}
