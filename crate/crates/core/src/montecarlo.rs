//! Seeded random-walk simulation.
//!
//! Trial `t` draws from its own ChaCha8 stream (`seed`, stream `t`) and step
//! counts are summed as integers, so results do not depend on the number of
//! threads or the order trials finish in.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution as _;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Distribution, TransitionMatrix};

pub const DEFAULT_STEP_CAP: u64 = 1_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimStats {
    pub trials: u64,
    pub mean: f64,
    /// Sample standard deviation over `√trials`; zero for a single trial.
    pub std_error: f64,
    pub seed: u64,
}

impl SimStats {
    /// `|mean − expected|` in units of the standard error (infinite when the
    /// error is zero and the mean is off).
    pub fn z_score(&self, expected: f64) -> f64 {
        let diff = (self.mean - expected).abs();
        if diff == 0.0 {
            0.0
        } else {
            diff / self.std_error
        }
    }
}

/// A chain prepared for repeated sampling.
#[derive(Debug, Clone)]
pub struct Simulator {
    rows: Vec<WeightedIndex<f64>>,
    cap: u64,
}

impl Simulator {
    pub fn new(p: &TransitionMatrix) -> Result<Self> {
        let rows = p
            .matrix()
            .row_iter()
            .map(|r| {
                WeightedIndex::new(r.iter().copied())
                    .map_err(|e| Error::Validation(format!("transition row not samplable: {e}")))
            })
            .collect::<Result<_>>()?;
        Ok(Simulator {
            rows,
            cap: DEFAULT_STEP_CAP,
        })
    }

    pub fn with_cap(mut self, cap: u64) -> Self {
        self.cap = cap;
        self
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    fn check_vertex(&self, v: usize) -> Result<()> {
        if v < self.n() {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "vertex {v} out of range for {} states",
                self.n()
            )))
        }
    }

    /// Steps until the walk from `start` first reaches `stop`.
    pub fn walk<R: Rng + ?Sized>(&self, start: usize, stop: usize, rng: &mut R) -> Result<u64> {
        self.check_vertex(start)?;
        self.check_vertex(stop)?;
        let mut v = start;
        let mut steps = 0u64;
        while v != stop {
            if steps == self.cap {
                return Err(Error::Runaway { cap: self.cap });
            }
            v = self.rows[v].sample(rng);
            steps += 1;
        }
        Ok(steps)
    }

    fn run<F>(&self, trials: u64, seed: u64, trial: F) -> Result<SimStats>
    where
        F: Fn(&mut ChaCha8Rng) -> Result<u64> + Sync,
    {
        if trials == 0 {
            return Err(Error::InvalidArgument("trials must be at least 1".into()));
        }
        let (sum, sum_sq) = (0..trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(t);
                let s = trial(&mut rng)? as u128;
                Ok((s, s * s))
            })
            .try_reduce(|| (0u128, 0u128), |a, b| Ok((a.0 + b.0, a.1 + b.1)))?;
        let n = trials as u128;
        let mean = sum as f64 / trials as f64;
        let std_error = if trials > 1 {
            // n·Σs² − (Σs)² is exact in integers.
            let spread = (n * sum_sq - sum * sum) as f64;
            let variance = spread / (trials as f64 * (trials - 1) as f64);
            (variance / trials as f64).sqrt()
        } else {
            0.0
        };
        Ok(SimStats {
            trials,
            mean,
            std_error,
            seed,
        })
    }

    pub fn hitting(&self, i: usize, j: usize, trials: u64, seed: u64) -> Result<SimStats> {
        self.check_vertex(i)?;
        self.check_vertex(j)?;
        self.run(trials, seed, |rng| self.walk(i, j, rng))
    }

    /// Draws `k ~ target` then walks from `i` until reaching `k`.
    pub fn random_target(
        &self,
        target: &Distribution,
        i: usize,
        trials: u64,
        seed: u64,
    ) -> Result<SimStats> {
        self.check_vertex(i)?;
        if target.n() != self.n() {
            return Err(Error::InvalidArgument(
                "target distribution has the wrong size".into(),
            ));
        }
        let pick = WeightedIndex::new(target.as_slice().iter().copied()).map_err(|e| {
            Error::InvalidArgument(format!("target distribution not samplable: {e}"))
        })?;
        self.run(trials, seed, |rng| {
            let k = pick.sample(rng);
            self.walk(i, k, rng)
        })
    }
}

/// One walk from `start` to `stop` with the default step cap.
pub fn simulate_walk(p: &TransitionMatrix, start: usize, stop: usize, seed: u64) -> Result<u64> {
    Simulator::new(p)?.walk(start, stop, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn empirical_hitting(
    p: &TransitionMatrix,
    i: usize,
    j: usize,
    trials: u64,
    seed: u64,
) -> Result<SimStats> {
    Simulator::new(p)?.hitting(i, j, trials, seed)
}

/// The random-target rule: its mean is `T_hit` from every start when
/// `target = π`.
pub fn empirical_random_target(
    p: &TransitionMatrix,
    target: &Distribution,
    i: usize,
    trials: u64,
    seed: u64,
) -> Result<SimStats> {
    Simulator::new(p)?.random_target(target, i, trials, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate;
    use crate::graph::stationary_distribution;

    fn walk(g: &crate::graph::WeightedDigraph) -> TransitionMatrix {
        TransitionMatrix::from_graph(g, 0.0).unwrap()
    }

    #[test]
    fn trivial_walks() {
        let k2 = walk(&generate::complete(2).unwrap());
        assert_eq!(simulate_walk(&k2, 1, 1, 0).unwrap(), 0);
        let dc = walk(&generate::directed_cycle(3).unwrap());
        let s = empirical_hitting(&dc, 0, 2, 100, 9).unwrap();
        assert_eq!((s.mean, s.std_error), (2.0, 0.0));
        let c4 = walk(&generate::cycle(4).unwrap());
        for seed in 0..50 {
            let steps = simulate_walk(&c4, 0, 2, seed).unwrap();
            assert!(steps > 0 && steps % 2 == 0);
        }
    }

    #[test]
    fn step_cap_is_enforced() {
        let p = walk(&generate::path(50).unwrap());
        let sim = Simulator::new(&p).unwrap().with_cap(10);
        let err = sim
            .walk(0, 49, &mut ChaCha8Rng::seed_from_u64(1))
            .unwrap_err();
        assert_eq!(err, Error::Runaway { cap: 10 });
        assert!(sim.hitting(0, 49, 5, 1).is_err());
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let p = walk(&generate::cycle(7).unwrap());
        let a = empirical_hitting(&p, 0, 3, 2000, 42).unwrap();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let b = pool.install(|| empirical_hitting(&p, 0, 3, 2000, 42).unwrap());
        assert_eq!(a, b);
        assert_ne!(a, empirical_hitting(&p, 0, 3, 2000, 43).unwrap());
    }

    #[test]
    fn hitting_means() {
        for (g, i, j, expected) in [
            (generate::complete(5).unwrap(), 0, 1, 4.0),
            (generate::path(3).unwrap(), 0, 2, 4.0),
            (generate::cycle(5).unwrap(), 0, 2, 6.0),
        ] {
            let s = empirical_hitting(&walk(&g), i, j, 100_000, 42).unwrap();
            assert!(s.z_score(expected) <= 4.0, "{s:?} vs {expected}");
        }
    }

    #[test]
    fn random_target_mean_is_start_independent() {
        let p = walk(&generate::cycle(4).unwrap());
        let pi = stationary_distribution(&p).unwrap();
        for i in [0, 1] {
            let s = empirical_random_target(&p, &pi, i, 100_000, 42).unwrap();
            assert!(s.z_score(2.5) <= 4.0, "{s:?}");
        }
        let k3 = walk(&generate::complete(3).unwrap());
        let pi = stationary_distribution(&k3).unwrap();
        let s = empirical_random_target(&k3, &pi, 0, 100_000, 7).unwrap();
        assert!(s.z_score(4.0 / 3.0) <= 4.0, "{s:?}");
    }

    #[test]
    fn bad_arguments() {
        let p = walk(&generate::cycle(4).unwrap());
        assert!(empirical_hitting(&p, 0, 1, 0, 1).is_err());
        assert!(empirical_hitting(&p, 0, 9, 10, 1).is_err());
    }
}
