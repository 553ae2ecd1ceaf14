//! Labeled examples and datasets.
//!
//! Grid points and threshold indices are 1-based (`x_1 .. x_m`). Dataset
//! positions (the indices credited by mechanisms) are 0-based.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// A domain point: either a grid index in `1..=m` or a point in the plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Point {
    Grid(usize),
    Plane([f64; 2]),
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Grid(j) => write!(f, "x{j}"),
            Point::Plane([a, b]) => write!(f, "({a}, {b})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LabeledExample {
    pub x: Point,
    pub y: u8,
}

impl LabeledExample {
    pub fn grid(j: usize, y: u8) -> Self {
        Self { x: Point::Grid(j), y }
    }

    pub fn plane(x: [f64; 2], y: u8) -> Self {
        Self { x: Point::Plane(x), y }
    }

    pub fn grid_index(&self) -> Option<usize> {
        match self.x {
            Point::Grid(j) => Some(j),
            Point::Plane(_) => None,
        }
    }

    pub fn coords(&self) -> Option<[f64; 2]> {
        match self.x {
            Point::Plane(p) => Some(p),
            Point::Grid(_) => None,
        }
    }
}

/// An ordered sequence of labeled examples.
///
/// When `domain_size` is set, every grid point must lie in `1..=domain_size`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Dataset {
    examples: Vec<LabeledExample>,
    domain_size: Option<usize>,
}

impl Dataset {
    pub fn new(examples: Vec<LabeledExample>, domain_size: Option<usize>) -> Result<Self> {
        for (index, ex) in examples.iter().enumerate() {
            if ex.y > 1 {
                return Err(Error::InvalidExample {
                    index,
                    reason: format!("label {} is not in {{0, 1}}", ex.y),
                });
            }
            match ex.x {
                Point::Grid(j) => {
                    let upper = domain_size.unwrap_or(usize::MAX);
                    if j == 0 || j > upper {
                        return Err(Error::InvalidExample {
                            index,
                            reason: format!("grid index {j} outside 1..={upper}"),
                        });
                    }
                }
                Point::Plane(p) => {
                    if !p.iter().all(|c| c.is_finite()) {
                        return Err(Error::InvalidExample {
                            index,
                            reason: "non-finite coordinate".into(),
                        });
                    }
                }
            }
        }
        Ok(Self {
            examples,
            domain_size,
        })
    }

    /// Dataset over the grid `{x_1, .., x_m}` from `(grid index, label)` pairs.
    pub fn grid(m: usize, pairs: &[(usize, u8)]) -> Result<Self> {
        let examples = pairs
            .iter()
            .map(|&(j, y)| LabeledExample::grid(j, y))
            .collect();
        Self::new(examples, Some(m))
    }

    /// Dataset of labeled points in the plane.
    pub fn plane(pairs: &[([f64; 2], u8)]) -> Result<Self> {
        let examples = pairs
            .iter()
            .map(|&(p, y)| LabeledExample::plane(p, y))
            .collect();
        Self::new(examples, None)
    }

    pub fn empty(domain_size: Option<usize>) -> Self {
        Self {
            examples: Vec::new(),
            domain_size,
        }
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn domain_size(&self) -> Option<usize> {
        self.domain_size
    }

    pub fn examples(&self) -> &[LabeledExample] {
        &self.examples
    }

    pub fn get(&self, i: usize) -> Option<&LabeledExample> {
        self.examples.get(i)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, LabeledExample> {
        self.examples.iter()
    }

    /// `S_{-i}`: the dataset with position `i` omitted, order preserved.
    pub fn omit(&self, i: usize) -> Result<Self> {
        if i >= self.len() {
            return Err(crate::error::invalid(format!(
                "position {i} out of range for dataset of length {}",
                self.len()
            )));
        }
        let mut examples = self.examples.clone();
        examples.remove(i);
        Ok(Self {
            examples,
            domain_size: self.domain_size,
        })
    }

    /// The dataset with every position in `positions` omitted.
    pub fn omit_many(&self, positions: &[usize]) -> Result<Self> {
        if let Some(&bad) = positions.iter().find(|&&i| i >= self.len()) {
            return Err(crate::error::invalid(format!(
                "position {bad} out of range for dataset of length {}",
                self.len()
            )));
        }
        let examples = self
            .examples
            .iter()
            .enumerate()
            .filter(|(i, _)| !positions.contains(i))
            .map(|(_, ex)| *ex)
            .collect();
        Ok(Self {
            examples,
            domain_size: self.domain_size,
        })
    }

    /// Subsequence at the given positions, in the given order.
    pub fn select(&self, positions: &[usize]) -> Result<Self> {
        let mut examples = Vec::with_capacity(positions.len());
        for &i in positions {
            let ex = self.get(i).ok_or_else(|| {
                crate::error::invalid(format!(
                    "position {i} out of range for dataset of length {}",
                    self.len()
                ))
            })?;
            examples.push(*ex);
        }
        Ok(Self {
            examples,
            domain_size: self.domain_size,
        })
    }

    /// Copy of the dataset with position `i` replaced by `example`.
    pub fn replace(&self, i: usize, example: LabeledExample) -> Result<Self> {
        let mut examples = self.examples.clone();
        match examples.get_mut(i) {
            Some(slot) => *slot = example,
            None => {
                return Err(crate::error::invalid(format!(
                    "position {i} out of range for dataset of length {}",
                    self.len()
                )))
            }
        }
        Self::new(examples, self.domain_size)
    }

    pub fn concat(&self, other: &Dataset) -> Self {
        let mut examples = self.examples.clone();
        examples.extend_from_slice(&other.examples);
        Self {
            examples,
            domain_size: self.domain_size.or(other.domain_size),
        }
    }

    /// Neighbor relation: equal length and exactly one differing position.
    pub fn is_neighbor(&self, other: &Dataset) -> bool {
        self.len() == other.len()
            && self
                .examples
                .iter()
                .zip(&other.examples)
                .filter(|(a, b)| a != b)
                .count()
                == 1
    }

    pub fn has_both_labels(&self) -> bool {
        let ones = self.examples.iter().filter(|e| e.y == 1).count();
        ones > 0 && ones < self.len()
    }
}

impl<'a> IntoIterator for &'a Dataset {
    type Item = &'a LabeledExample;
    type IntoIter = std::slice::Iter<'a, LabeledExample>;

    fn into_iter(self) -> Self::IntoIter {
        self.examples.iter()
    }
}
