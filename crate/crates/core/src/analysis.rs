//! The full hitting-time pipeline for one chain, computed once and shared.

use crate::error::{Error, Result};
use crate::graph::{stationary_distribution, Distribution, TransitionMatrix, WeightedDigraph};
use crate::greens::{
    exit_frequency_matrix, greens_function, mixing_report, verify_green_constraints,
    ExitFrequencyMatrix, GreenResiduals, GreensMatrix, MixingReport,
};
use crate::hitting::{
    fundamental_matrix, hitting_from_fundamental, FundamentalMatrix, HittingTimeMatrix,
};
use crate::tol;

#[derive(Debug, Clone)]
pub struct ChainAnalysis {
    pub transition: TransitionMatrix,
    pub stationary: Distribution,
    pub fundamental: FundamentalMatrix,
    pub hitting: HittingTimeMatrix,
    pub greens: GreensMatrix,
    pub green_residuals: GreenResiduals,
    pub exit_pi: ExitFrequencyMatrix,
    pub mixing: MixingReport,
}

impl ChainAnalysis {
    pub fn of_graph(g: &WeightedDigraph, laziness: f64) -> Result<Self> {
        Self::new(TransitionMatrix::from_graph(g, laziness)?)
    }

    /// Runs the pipeline, failing with an integrity error if the Green's
    /// function misses its defining constraints by more than `1e-9·n`.
    pub fn new(transition: TransitionMatrix) -> Result<Self> {
        let stationary = stationary_distribution(&transition)?;
        let fundamental = fundamental_matrix(&transition, &stationary)?;
        let hitting = hitting_from_fundamental(&fundamental, &stationary);
        let greens = greens_function(&hitting, &stationary)?;
        let green_residuals = verify_green_constraints(&greens, &transition);
        let n = transition.n();
        if !green_residuals.within(tol::matrix(n)) {
            return Err(Error::integrity(
                "Green's function constraints",
                green_residuals.constraint.max(green_residuals.row_sums),
            ));
        }
        let exit_pi = exit_frequency_matrix(&hitting, &stationary, &stationary)?;
        let mixing = mixing_report(
            &hitting,
            &greens,
            &stationary,
            transition.is_reversible_walk(),
        )?;
        Ok(ChainAnalysis {
            transition,
            stationary,
            fundamental,
            hitting,
            greens,
            green_residuals,
            exit_pi,
            mixing,
        })
    }

    pub fn n(&self) -> usize {
        self.transition.n()
    }

    /// `H(π, ·)`.
    pub fn access_from_pi(&self) -> nalgebra::DVector<f64> {
        self.hitting.from_distribution(&self.stationary)
    }

    /// `TIME · max(1, T_hit, T_mix)`, the tolerance for time-valued checks on
    /// this chain.
    pub fn time_tolerance(&self) -> f64 {
        tol::time(self.mixing.t_hit.max(self.mixing.t_mix))
    }
}
