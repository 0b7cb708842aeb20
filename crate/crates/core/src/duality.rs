//! The reverse chain `P̂ = Π⁻¹PᵀΠ` and the distributions tied to it: the
//! forget distribution, the π-core, and the duality between their exit
//! frequency matrices and Green's functions.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::analysis::ChainAnalysis;
use crate::error::{Error, Result};
use crate::graph::{Distribution, TransitionMatrix};
use crate::greens::{
    conservation_residual, exit_frequency_matrix, greens_general, ExitFrequencyMatrix,
};
use crate::hitting::{hitting_times, HittingTimeMatrix};
use crate::tol;

/// `P̂(i,j) = π_j P(j,i) / π_i`. A walk on an undirected graph is its own
/// reverse and is returned unchanged.
pub fn reverse_chain(p: &TransitionMatrix, pi: &Distribution) -> Result<TransitionMatrix> {
    if p.n() != pi.n() {
        return Err(Error::InvalidArgument(format!(
            "distribution has {} entries, chain has {} states",
            pi.n(),
            p.n()
        )));
    }
    if p.is_reversible_walk() {
        return Ok(p.clone());
    }
    let n = p.n();
    let mut rev = DMatrix::from_fn(n, n, |i, j| pi[j] * p.get(j, i) / pi[i]);
    for mut row in rev.row_iter_mut() {
        let total = row.sum();
        if (total - 1.0).abs() > tol::STATIONARY {
            return Err(Error::InvalidArgument(
                "distribution is not stationary for the chain".into(),
            ));
        }
        row /= total;
    }
    TransitionMatrix::from_matrix(rev)
}

/// `σ_i = π_i (1 + Σ_j P(i,j) a_j − a_i)` for an access vector `a = H(·,π)`.
/// With the forward chain's `P` and `H` this is the reverse chain's forget
/// distribution, and vice versa.
fn contrast(p: &TransitionMatrix, access: &DVector<f64>, pi: &Distribution) -> DVector<f64> {
    let ahead = p.matrix() * access;
    DVector::from_fn(p.n(), |i, _| pi[i] * (1.0 + ahead[i] - access[i]))
}

/// Accepts a computed probability vector, clamping entries within `1e-10`
/// of zero.
fn settle(v: DVector<f64>, what: &str) -> Result<Distribution> {
    let worst = v.min();
    if worst < -tol::CLAMP {
        return Err(Error::integrity(format!("{what}: negative entry"), worst));
    }
    let defect = (v.sum() - 1.0).abs();
    if defect > tol::STATIONARY {
        return Err(Error::integrity(format!("{what}: total mass"), defect));
    }
    let v = v.map(|x| x.max(0.0));
    let total = v.sum();
    Ok(Distribution::from_vector_unchecked(v / total))
}

/// The forget distribution `μ` of `P`, the unique minimizer of
/// `max_i H(i,τ)` over targets `τ`.
pub fn forget_distribution(p: &TransitionMatrix, pi: &Distribution) -> Result<Distribution> {
    let rev = reverse_chain(p, pi)?;
    let h_rev = hitting_times(&rev, pi)?;
    settle(
        contrast(&rev, &h_rev.to_distribution(pi), pi),
        "forget distribution",
    )
}

/// `T_forget = max_i H(i,μ)`, checked against `T_reset` of the reverse chain.
pub fn forget_time(p: &TransitionMatrix, pi: &Distribution) -> Result<f64> {
    let rev = reverse_chain(p, pi)?;
    let h_rev = hitting_times(&rev, pi)?;
    let reset_rev = h_rev.to_distribution(pi).dot(pi.vector());
    let mu = settle(
        contrast(&rev, &h_rev.to_distribution(pi), pi),
        "forget distribution",
    )?;
    let t_forget = hitting_times(p, pi)?.to_distribution(&mu).max();
    let residual = (t_forget - reset_rev).abs();
    if residual > tol::time(reset_rev) {
        return Err(Error::integrity(
            "T_forget against reverse T_reset",
            residual,
        ));
    }
    Ok(t_forget)
}

/// Column minima `b_i = min_j X_π(j,i)`.
pub fn core_offsets(x_pi: &ExitFrequencyMatrix) -> DVector<f64> {
    DVector::from_iterator(x_pi.n(), x_pi.matrix().column_iter().map(|c| c.min()))
}

/// `π**ᵀ = πᵀ + bᵀ(I − P)` and `X_{π**} = X_π − 1bᵀ`.
fn core_from_offsets(
    p: &TransitionMatrix,
    pi: &Distribution,
    x_pi: &ExitFrequencyMatrix,
    b: &DVector<f64>,
) -> Result<(Distribution, ExitFrequencyMatrix)> {
    let n = p.n();
    let shift = p.laplacian().tr_mul(b);
    let core = settle(pi.vector() + shift, "pi-core")?;
    let mut x = DMatrix::from_fn(n, n, |i, j| x_pi.get(i, j) - b[j]);
    x.apply(|v| *v = v.max(0.0));
    Ok((core.clone(), ExitFrequencyMatrix::from_parts(x, core)))
}

/// The π-core `π**`, whose exit frequency matrix is `X_π` minus its column
/// minima, together with that matrix. The result is cross-checked against
/// the contrast formula on the reverse chain with target `μ̂`.
pub fn pi_core(
    p: &TransitionMatrix,
    pi: &Distribution,
    x_pi: &ExitFrequencyMatrix,
) -> Result<(Distribution, ExitFrequencyMatrix)> {
    let b = core_offsets(x_pi);
    let (core, x_core) = core_from_offsets(p, pi, x_pi, &b)?;
    let h = hitting_times(p, pi)?;
    let rev = reverse_chain(p, pi)?;
    let h_rev = hitting_times(&rev, pi)?;
    let mu_hat = settle(
        contrast(p, &h.to_distribution(pi), pi),
        "reverse forget distribution",
    )?;
    let residual = core_route_residual(&rev, &h_rev, pi, &mu_hat, &core);
    if residual > tol::TIME {
        return Err(Error::integrity("pi-core routes disagree", residual));
    }
    Ok((core, x_core))
}

fn core_route_residual(
    rev: &TransitionMatrix,
    h_rev: &HittingTimeMatrix,
    pi: &Distribution,
    mu_hat: &Distribution,
    core: &Distribution,
) -> f64 {
    let alt = contrast(rev, &h_rev.to_distribution(mu_hat), pi);
    (alt - core.vector()).amax()
}

/// One checked identity and its residual. Time-valued identities report the
/// relative error `|a − b| / max(1, |b|)`; the rest report max-abs errors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualityResidual {
    pub name: &'static str,
    pub value: f64,
}

#[derive(Debug, Clone)]
pub struct DualityReport {
    pub reverse: TransitionMatrix,
    pub reverse_hitting: HittingTimeMatrix,
    /// Forget distribution `μ` of the chain.
    pub forget: DVector<f64>,
    /// Forget distribution `μ̂` of the reverse chain.
    pub reverse_forget: DVector<f64>,
    /// `b_i = min_j X_π(j,i)`.
    pub offsets: DVector<f64>,
    pub pi_core: DVector<f64>,
    pub exit_pi_core: ExitFrequencyMatrix,
    /// `Π⁻¹ X_{π**}ᵀ Π`, the exit frequencies of the reverse chain towards `μ̂`.
    pub dual_exit: DMatrix<f64>,
    pub t_forget: f64,
    pub t_reset: f64,
    pub reverse_t_forget: f64,
    pub reverse_t_reset: f64,
    pub reversible: bool,
    /// `max_i |μ_i − π**_i|`. Zero on trees and vertex-transitive graphs but
    /// not in general, even for reversible chains; informational only.
    pub forget_core_gap: f64,
    pub residuals: Vec<DualityResidual>,
}

impl DualityReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().map(|r| r.value).fold(0.0, f64::max)
    }

    pub fn residual(&self, name: &str) -> Option<f64> {
        self.residuals
            .iter()
            .find(|r| r.name == name)
            .map(|r| r.value)
    }

    pub fn within(&self, tol: f64) -> bool {
        self.max_residual() <= tol
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

/// Builds the full duality picture for `P` and records the residual of every
/// identity. Fails only if a distribution comes out invalid; identity
/// mismatches are reported, not raised.
pub fn duality_checks(p: &TransitionMatrix) -> Result<DualityReport> {
    duality_report(&ChainAnalysis::new(p.clone())?)
}

/// As [`duality_checks`], reusing an existing forward analysis.
pub fn duality_report(fwd: &ChainAnalysis) -> Result<DualityReport> {
    let p = &fwd.transition;
    let pi = &fwd.stationary;
    let h = &fwd.hitting;
    let n = p.n();
    let rev_chain = reverse_chain(p, pi)?;
    let rev = ChainAnalysis::new(rev_chain.clone())?;
    let h_rev = &rev.hitting;
    let mut residuals = Vec::new();
    let mut record =
        |name: &'static str, value: f64| residuals.push(DualityResidual { name, value });

    record(
        "reverse chain stationary",
        pi.stationarity_residual(&rev_chain),
    );
    record(
        "reverse chain stationary (solved)",
        (rev.stationary.vector() - pi.vector()).amax(),
    );
    let reversible = (rev_chain.matrix() - p.matrix()).amax() <= tol::STOCHASTIC;

    let access = &fwd.mixing.access_to_pi;
    let access_rev = &rev.mixing.access_to_pi;
    let t_reset = fwd.mixing.t_reset;
    let reverse_t_reset = rev.mixing.t_reset;
    let mu = settle(contrast(&rev_chain, access_rev, pi), "forget distribution")?;
    let mu_hat = settle(contrast(p, access, pi), "reverse forget distribution")?;
    let t_forget = h.to_distribution(&mu).max();
    let reverse_t_forget = h_rev.to_distribution(&mu_hat).max();
    record("T_forget = reverse T_reset", rel(t_forget, reverse_t_reset));
    record("reverse T_forget = T_reset", rel(reverse_t_forget, t_reset));

    let b = core_offsets(&fwd.exit_pi);
    let (core, x_core) = core_from_offsets(p, pi, &fwd.exit_pi, &b)?;
    record(
        "pi-core routes",
        core_route_residual(&rev_chain, h_rev, pi, &mu_hat, &core),
    );
    record(
        "pi-core conservation",
        conservation_residual(x_core.matrix(), p, &core),
    );
    let x_core_direct = exit_frequency_matrix(h, pi, &core)?;
    record(
        "pi-core exit frequencies",
        (x_core.matrix() - x_core_direct.matrix()).amax(),
    );

    let dual_exit = DMatrix::from_fn(n, n, |i, j| pi[j] * x_core.get(j, i) / pi[i]);
    record(
        "dual image conservation",
        conservation_residual(&dual_exit, &rev_chain, &mu_hat),
    );
    let row_min = dual_exit.row_iter().map(|r| r.min()).fold(0.0, f64::max);
    record("dual image row minima", row_min);
    let x_rev = exit_frequency_matrix(h_rev, pi, &mu_hat)?;
    record(
        "dual image = reverse exit frequencies",
        (&dual_exit - x_rev.matrix()).amax(),
    );

    let g = &fwd.greens;
    let g_rev = &rev.greens;
    let g_hat_mu = greens_general(h_rev, pi, &mu_hat)?;
    let dual_green = DMatrix::from_fn(n, n, |i, j| {
        pi[j] / pi[i] * g.get(j, i) + pi[j] * (access[j] - t_reset)
    });
    record(
        "reverse Green's function to mu-hat",
        (&dual_green - g_hat_mu.matrix()).amax(),
    );
    let to_mu_hat = h_rev.to_distribution(&mu_hat);
    let mean_to_mu_hat = to_mu_hat.dot(pi.vector());
    let g_core = greens_general(h, pi, &core)?;
    let mirrored = DMatrix::from_fn(n, n, |i, j| {
        pi[j] / pi[i] * g_rev.get(j, i) + pi[j] * (to_mu_hat[j] - mean_to_mu_hat)
    });
    record(
        "Green's function to pi-core",
        (&mirrored - g_core.matrix()).amax(),
    );

    let to_core = h.to_distribution(&core);
    let core_to_pi = h.distribution_to_distribution(&core, pi);
    let split = (0..n)
        .map(|i| rel(to_core[i] + core_to_pi, access[i]))
        .fold(0.0, f64::max);
    record("H(i,pi) = H(i,pi-core) + H(pi-core,pi)", split);

    let forget_core_gap = (mu.vector() - core.vector()).amax();

    Ok(DualityReport {
        reverse: rev_chain,
        reverse_hitting: h_rev.clone(),
        forget: mu.vector().clone(),
        reverse_forget: mu_hat.vector().clone(),
        offsets: b,
        pi_core: core.vector().clone(),
        exit_pi_core: x_core,
        dual_exit,
        t_forget,
        t_reset,
        reverse_t_forget,
        reverse_t_reset,
        reversible,
        forget_core_gap,
        residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate;
    use crate::graph::stationary_distribution;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn walk(g: &crate::graph::WeightedDigraph) -> (TransitionMatrix, Distribution) {
        let p = TransitionMatrix::from_graph(g, 0.0).unwrap();
        let pi = stationary_distribution(&p).unwrap();
        (p, pi)
    }

    fn close(a: &DVector<f64>, b: &[f64]) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-10)
    }

    #[test]
    fn reverse_of_directed_cycle() {
        let (p, pi) = walk(&generate::directed_cycle(3).unwrap());
        let r = reverse_chain(&p, &pi).unwrap();
        assert!((r.get(0, 2) - 1.0).abs() < 1e-15);
        assert!((r.get(2, 1) - 1.0).abs() < 1e-15);
        assert!((r.get(1, 0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn reverse_is_an_involution() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = generate::random_strongly_connected(9, 0.3, &mut rng).unwrap();
        let (p, pi) = walk(&g);
        let back = reverse_chain(&reverse_chain(&p, &pi).unwrap(), &pi).unwrap();
        assert!((back.matrix() - p.matrix()).amax() < 1e-12);
        let (c4, pi4) = walk(&generate::cycle(4).unwrap());
        assert_eq!(reverse_chain(&c4, &pi4).unwrap(), c4);
    }

    #[test]
    fn path_forget_and_core() {
        let (p, pi) = walk(&generate::path(3).unwrap());
        let mu = forget_distribution(&p, &pi).unwrap();
        assert!(close(mu.vector(), &[0.0, 1.0, 0.0]));
        assert!((forget_time(&p, &pi).unwrap() - 1.0).abs() < 1e-12);
        let a = ChainAnalysis::new(p.clone()).unwrap();
        assert!(close(&core_offsets(&a.exit_pi), &[0.0, 0.5, 0.0]));
        let (core, _) = pi_core(&p, &pi, &a.exit_pi).unwrap();
        assert!(close(core.vector(), &[0.0, 1.0, 0.0]));

        let r = duality_report(&a).unwrap();
        assert!(r.within(1e-8), "{:?}", r.residuals);
        let h = &a.hitting;
        let core = Distribution::from_vector_unchecked(r.pi_core.clone());
        assert!((h.vertex_to_distribution(0, &core) - 1.0).abs() < 1e-12);
        assert!((h.distribution_to_distribution(&core, &pi) - 0.5).abs() < 1e-12);
        assert!((a.mixing.access_to_pi[0] - 1.5).abs() < 1e-12);
    }

    #[test]
    fn transitive_graphs_collapse_to_pi() {
        for g in [
            generate::cycle(4).unwrap(),
            generate::directed_cycle(3).unwrap(),
        ] {
            let (p, pi) = walk(&g);
            let mu = forget_distribution(&p, &pi).unwrap();
            assert!((mu.vector() - pi.vector()).amax() < 1e-10);
            let r = duality_checks(&p).unwrap();
            assert!((r.pi_core.clone() - pi.vector()).amax() < 1e-10);
            assert!(r.within(1e-8), "{:?}", r.residuals);
        }
        let (p, pi) = walk(&generate::cycle(4).unwrap());
        assert!((forget_time(&p, &pi).unwrap() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn reversible_green_relation_is_the_symmetry() {
        // With μ̂ = π and H(j,π) = T_reset the relation reads G(i,j) = (π_j/π_i) G(j,i).
        let (p, _) = walk(&generate::cycle(4).unwrap());
        let r = duality_checks(&p).unwrap();
        assert!(r.residual("reverse Green's function to mu-hat").unwrap() < 1e-12);
    }

    #[test]
    fn random_digraphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for n in [6, 7, 8, 15] {
            let g = generate::random_strongly_connected(n, 0.25, &mut rng).unwrap();
            let (p, pi) = walk(&g);
            let r = duality_checks(&p).unwrap();
            assert!(r.within(1e-8), "n = {n}: {:?}", r.residuals);
            assert!(r.offsets.iter().any(|&b| b > 0.0));
            let t = forget_time(&p, &pi).unwrap();
            assert!((t - r.reverse_t_reset).abs() < 1e-8);
            let a = ChainAnalysis::new(p.clone()).unwrap();
            assert!(pi_core(&p, &pi, &a.exit_pi).is_ok());
        }
    }

    #[test]
    fn random_reversible_graph() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = generate::random_connected(10, 0.3, true, &mut rng).unwrap();
        let r = duality_checks(&TransitionMatrix::from_graph(&g, 0.0).unwrap()).unwrap();
        assert!(r.reversible);
        assert!(r.within(1e-8), "{:?}", r.residuals);
    }

    #[test]
    fn forget_and_core_coincide_on_trees_only() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let tree = generate::random_tree(9, &mut rng).unwrap();
        let r = duality_checks(&TransitionMatrix::from_graph(&tree, 0.0).unwrap()).unwrap();
        assert!(r.forget_core_gap < 1e-10);
        // A 4-cycle with a pendant vertex: μ and π** differ.
        let g = crate::graph::WeightedDigraph::undirected_unit(
            5,
            &[(0, 1), (1, 2), (2, 3), (3, 0), (0, 4)],
        )
        .unwrap();
        let r = duality_checks(&TransitionMatrix::from_graph(&g, 0.0).unwrap()).unwrap();
        assert!(r.within(1e-8), "{:?}", r.residuals);
        assert!(r.forget_core_gap > 1e-3, "{}", r.forget_core_gap);
    }

    #[test]
    fn duality_is_an_involution() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let g = generate::random_strongly_connected(8, 0.3, &mut rng).unwrap();
        let p = TransitionMatrix::from_graph(&g, 0.0).unwrap();
        let fwd = duality_checks(&p).unwrap();
        let back = duality_checks(&fwd.reverse).unwrap();
        assert!((back.forget.clone() - &fwd.reverse_forget).amax() < 1e-8);
        assert!((back.reverse_forget.clone() - &fwd.forget).amax() < 1e-8);
        assert!((back.t_forget - fwd.reverse_t_forget).abs() < 1e-8);
        assert!((back.t_reset - fwd.reverse_t_reset).abs() < 1e-8);
        assert!((back.reverse.matrix() - p.matrix()).amax() < 1e-12);
    }

    #[test]
    fn non_stationary_input_rejected() {
        let (p, _) = walk(&generate::directed_cycle(3).unwrap());
        let skew = Distribution::from_slice(&[0.5, 0.25, 0.25]).unwrap();
        assert!(reverse_chain(&p, &skew).is_err());
    }
}
