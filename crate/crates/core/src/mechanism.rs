//! Credit-attributing mechanisms: `S -> (c, R)`.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::data::Dataset;
use crate::distribution::FiniteDistribution;
use crate::error::{Error, Result};
use crate::hypothesis::{Hypothesis, HypothesisKey};
use crate::seeding::SimRng;

/// A hypothesis together with the dataset positions (0-based) it credits.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CreditedOutput {
    pub hypothesis: Hypothesis,
    pub credited: BTreeSet<usize>,
}

impl CreditedOutput {
    pub fn new(hypothesis: Hypothesis, credited: impl IntoIterator<Item = usize>) -> Self {
        Self {
            hypothesis,
            credited: credited.into_iter().collect(),
        }
    }

    pub fn key(&self) -> OutputKey {
        OutputKey {
            hypothesis: self.hypothesis.key(),
            credited: self.credited.iter().copied().collect(),
        }
    }

    /// Re-index an output computed on `S_{-i}` so positions refer to `S`.
    pub fn lift_after_omission(&self, i: usize) -> Self {
        Self {
            hypothesis: self.hypothesis.clone(),
            credited: self
                .credited
                .iter()
                .map(|&j| if j >= i { j + 1 } else { j })
                .collect(),
        }
    }

    pub(crate) fn check_positions(&self, n: usize) -> Result<()> {
        match self.credited.iter().next_back() {
            Some(&j) if j >= n => Err(Error::InvalidParameter(format!(
                "credited position {j} out of range for dataset of length {n}"
            ))),
            _ => Ok(()),
        }
    }
}

/// Canonical outcome of a mechanism: hypothesis key and sorted credited set.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct OutputKey {
    pub hypothesis: HypothesisKey,
    pub credited: Vec<usize>,
}

impl OutputKey {
    pub fn credits(&self, i: usize) -> bool {
        self.credited.binary_search(&i).is_ok()
    }

    pub fn lift_after_omission(&self, i: usize) -> Self {
        Self {
            hypothesis: self.hypothesis.clone(),
            credited: self
                .credited
                .iter()
                .map(|&j| if j >= i { j + 1 } else { j })
                .collect(),
        }
    }
}

/// A (possibly randomized) mechanism producing credited outputs.
pub trait CreditMechanism: Sync {
    fn name(&self) -> String;

    fn run(&self, data: &Dataset, rng: &mut SimRng) -> Result<CreditedOutput>;

    /// Exact output distribution, when the internal randomness is small
    /// enough to enumerate.
    fn exact_distribution(&self, _data: &Dataset) -> Result<FiniteDistribution<OutputKey>> {
        Err(Error::NoExactDistribution(self.name()))
    }
}

impl<M: CreditMechanism + ?Sized> CreditMechanism for &M {
    fn name(&self) -> String {
        (**self).name()
    }

    fn run(&self, data: &Dataset, rng: &mut SimRng) -> Result<CreditedOutput> {
        (**self).run(data, rng)
    }

    fn exact_distribution(&self, data: &Dataset) -> Result<FiniteDistribution<OutputKey>> {
        (**self).exact_distribution(data)
    }
}

/// Outputs a fixed hypothesis and credits nothing.
#[derive(Clone, Debug)]
pub struct ConstantMechanism(pub Hypothesis);

impl CreditMechanism for ConstantMechanism {
    fn name(&self) -> String {
        format!("constant[{}]", self.0)
    }

    fn run(&self, _data: &Dataset, _rng: &mut SimRng) -> Result<CreditedOutput> {
        Ok(CreditedOutput::new(self.0.clone(), []))
    }

    fn exact_distribution(&self, _data: &Dataset) -> Result<FiniteDistribution<OutputKey>> {
        Ok(FiniteDistribution::point_mass(
            CreditedOutput::new(self.0.clone(), []).key(),
        ))
    }
}

/// Outputs `Constant(y_1)` without crediting anything. Not CCA.
#[derive(Clone, Copy, Debug, Default)]
pub struct FirstLabelMechanism;

impl CreditMechanism for FirstLabelMechanism {
    fn name(&self) -> String {
        "first-label".into()
    }

    fn run(&self, data: &Dataset, _rng: &mut SimRng) -> Result<CreditedOutput> {
        let y = data.get(0).ok_or(Error::EmptyDataset)?.y;
        Ok(CreditedOutput::new(Hypothesis::Constant(y), []))
    }

    fn exact_distribution(&self, data: &Dataset) -> Result<FiniteDistribution<OutputKey>> {
        let mut rng = <SimRng as rand::SeedableRng>::seed_from_u64(0);
        Ok(FiniteDistribution::point_mass(self.run(data, &mut rng)?.key()))
    }
}

/// Wraps another mechanism and credits every input position.
#[derive(Clone, Debug)]
pub struct CreditEverything<M>(pub M);

impl<M: CreditMechanism> CreditMechanism for CreditEverything<M> {
    fn name(&self) -> String {
        format!("credit-all[{}]", self.0.name())
    }

    fn run(&self, data: &Dataset, rng: &mut SimRng) -> Result<CreditedOutput> {
        let out = self.0.run(data, rng)?;
        Ok(CreditedOutput::new(out.hypothesis, 0..data.len()))
    }

    fn exact_distribution(&self, data: &Dataset) -> Result<FiniteDistribution<OutputKey>> {
        let all: Vec<usize> = (0..data.len()).collect();
        Ok(self.0.exact_distribution(data)?.map(|k| OutputKey {
            hypothesis: k.hypothesis.clone(),
            credited: all.clone(),
        }))
    }
}
