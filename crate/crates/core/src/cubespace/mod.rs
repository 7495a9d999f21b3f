//! Explicit finite cubespaces and the constructions built on them.

mod check;
mod constructions;
mod hom;
pub(crate) mod search;

use std::collections::HashMap;
use std::sync::Arc;

use crate::cubeset::CubeSet;
use crate::error::{Error, Result};

pub use check::{complete_corner, cs_check_axioms, AxiomReport};
pub(crate) use constructions::element_label;
pub use constructions::{arrow_space, dk_cube_count, for_each_face_solution, make_dk, make_dk_within, one_point};
pub use hom::{hom_count, hom_exists, hom_set, SubCubespace};

/// A finite point set with its cubes of every dimension up to `n_max`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cubespace {
    labels: Vec<String>,
    index: HashMap<String, u32>,
    n_max: usize,
    cubes: Vec<CubeSet>,
    declared_step: Option<usize>,
}

impl Cubespace {
    /// `cubes[n]` holds the `n`-cubes for `n = 0..=n_max`.
    pub fn new(labels: Vec<String>, cubes: Vec<CubeSet>, declared_step: Option<usize>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::structural("cubespace without points"));
        }
        if labels.len() > u32::MAX as usize {
            return Err(Error::structural("too many points"));
        }
        if cubes.is_empty() {
            return Err(Error::structural("cubespace needs at least its 0-cubes"));
        }
        let mut index = HashMap::with_capacity(labels.len());
        for (i, l) in labels.iter().enumerate() {
            if l.is_empty() || l.chars().any(char::is_whitespace) {
                return Err(Error::structural(format!("bad point label {l:?}")));
            }
            if index.insert(l.clone(), i as u32).is_some() {
                return Err(Error::structural(format!("duplicate point label {l}")));
            }
        }
        for (n, c) in cubes.iter().enumerate() {
            if c.dim() != n {
                return Err(Error::structural(format!(
                    "cube set in slot {n} has dimension {}",
                    c.dim()
                )));
            }
            if c.bits() != crate::cubeset::bits_for(labels.len()) {
                return Err(Error::structural("cube set packed for another point count"));
            }
        }
        Ok(Self {
            n_max: cubes.len() - 1,
            labels,
            index,
            cubes,
            declared_step,
        })
    }

    pub fn from_cube_lists(
        labels: Vec<String>,
        lists: &[Vec<Vec<u32>>],
        declared_step: Option<usize>,
    ) -> Result<Self> {
        let n = labels.len();
        let cubes = lists
            .iter()
            .enumerate()
            .map(|(d, l)| CubeSet::from_cubes(n, d, l))
            .collect::<Result<Vec<_>>>()?;
        Self::new(labels, cubes, declared_step)
    }

    /// Points labelled by their index.
    pub fn numbered_labels(n: usize) -> Vec<String> {
        (0..n).map(|i| i.to_string()).collect()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, x: u32) -> &str {
        &self.labels[x as usize]
    }

    pub fn point(&self, label: &str) -> Option<u32> {
        self.index.get(label).copied()
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn declared_step(&self) -> Option<usize> {
        self.declared_step
    }

    pub fn with_declared_step(mut self, step: Option<usize>) -> Self {
        self.declared_step = step;
        self
    }

    pub fn cubes(&self, n: usize) -> &CubeSet {
        &self.cubes[n]
    }

    pub fn cube_sets(&self) -> &[CubeSet] {
        &self.cubes
    }

    pub fn require_dim(&self, n: usize) -> Result<&CubeSet> {
        self.cubes.get(n).ok_or_else(|| {
            Error::Config(format!("{n}-cubes requested but n_max is {}", self.n_max))
        })
    }

    pub fn is_cube(&self, q: &[u32]) -> bool {
        if q.is_empty() || !q.len().is_power_of_two() {
            return false;
        }
        let n = q.len().trailing_zeros() as usize;
        n <= self.n_max && self.cubes[n].contains(q)
    }

    pub fn cube_index(&self, q: &[u32]) -> Option<usize> {
        let n = q.len().trailing_zeros() as usize;
        if !q.len().is_power_of_two() || n > self.n_max {
            return None;
        }
        self.cubes[n].index_of(q)
    }

    /// Index range of the `n`-cubes rooted at `x`, i.e. with `q(0) = x`.
    pub fn rooted(&self, n: usize, x: u32) -> std::ops::Range<usize> {
        self.cubes[n].prefix_range(&[x])
    }

    /// Drop cube sets above dimension `n_max`.
    pub fn truncated(&self, n_max: usize) -> Self {
        let mut out = self.clone();
        out.cubes.truncate(n_max + 1);
        out.n_max = out.cubes.len() - 1;
        out
    }

    pub fn shared(self) -> Arc<Self> {
        Arc::new(self)
    }
}
