//! Sample compression schemes and their view as credit-attributing
//! mechanisms.

mod boost;
mod stability;
mod svm;
mod threshold;

pub use boost::{
    exact_draw_distribution, for_sample_size, stable_boost_compress, weak_fit, BoostConfig, BoostRun, BoostScheme,
    WeakClass,
};
pub use stability::{empirical_stability, exact_stability, StabilityReport};
pub use svm::{svm_compress, svm_fit, SvmFit, SvmScheme, SVM_TOLERANCE};
pub use threshold::{check_threshold_realizable, threshold_compress, ThresholdScheme};

use crate::data::Dataset;
use crate::distribution::FiniteDistribution;
use crate::error::{Error, Result};
use crate::hypothesis::Hypothesis;
use crate::mechanism::{CreditMechanism, CreditedOutput, OutputKey};
use crate::seeding::SimRng;

/// A compression function `kappa` paired with a deterministic reconstruction
/// `rho`.
pub trait CompressionScheme: Sync {
    fn name(&self) -> String;

    /// `kappa(S)`: selected positions, in selection order. May repeat.
    fn compress(&self, data: &Dataset, rng: &mut SimRng) -> Result<Vec<usize>>;

    /// `rho`: hypothesis from the selected subsequence.
    fn reconstruct(&self, selected: &Dataset) -> Result<Hypothesis>;

    /// Upper bound on the number of distinct selected elements for `n` inputs.
    fn size_bound(&self, n: usize) -> usize;

    /// Whether `compress` ignores its random source.
    fn is_deterministic(&self) -> bool;
}

/// `M(S) = (rho(S|kappa(S)), kappa(S) as a set)`.
#[derive(Clone, Debug)]
pub struct SchemeMechanism<C>(pub C);

pub fn as_cca_mechanism<C: CompressionScheme>(scheme: C) -> SchemeMechanism<C> {
    SchemeMechanism(scheme)
}

impl<C: CompressionScheme> CreditMechanism for SchemeMechanism<C> {
    fn name(&self) -> String {
        self.0.name()
    }

    fn run(&self, data: &Dataset, rng: &mut SimRng) -> Result<CreditedOutput> {
        let selected = self.0.compress(data, rng)?;
        let hypothesis = self.0.reconstruct(&data.select(&selected)?)?;
        Ok(CreditedOutput::new(hypothesis, selected))
    }

    fn exact_distribution(&self, data: &Dataset) -> Result<FiniteDistribution<OutputKey>> {
        if !self.0.is_deterministic() {
            return Err(Error::NoExactDistribution(self.name()));
        }
        let mut rng = <SimRng as rand::SeedableRng>::seed_from_u64(0);
        Ok(FiniteDistribution::point_mass(self.run(data, &mut rng)?.key()))
    }
}
