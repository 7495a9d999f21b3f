//! Subcubespaces of `{0,1}^N` and their morphism sets into a cubespace.

use std::collections::HashMap;

use super::search::{Constraint, Search};
use super::Cubespace;
use crate::cube::CubeMorphismSpec;
use crate::error::{Error, Result};

/// A vertex subset `P ⊆ {0,1}^N` with the cubes of `{0,1}^N` lying
/// inside it, one injective representative per image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubCubespace {
    ambient_dim: usize,
    vertices: Vec<usize>,
    /// cubes as vertex tables into `vertices` positions
    cubes: Vec<Vec<usize>>,
}

impl SubCubespace {
    /// Inherit the injective cubes of dimension `1..=max_dim` lying in `P`.
    pub fn induced(ambient_dim: usize, vertices: &[usize], max_dim: usize) -> Result<Self> {
        let mut vs = vertices.to_vec();
        vs.sort_unstable();
        vs.dedup();
        if vs.iter().any(|&v| v >> ambient_dim != 0) {
            return Err(Error::structural("vertex outside the ambient cube"));
        }
        let pos: HashMap<usize, usize> = vs.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut by_image: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
        let mut order = vec![];
        for m in 1..=max_dim.min(ambient_dim) {
            for spec in CubeMorphismSpec::enumerate(m, ambient_dim) {
                let table = spec.table();
                let Some(local) = table.iter().map(|v| pos.get(v).copied()).collect::<Option<Vec<_>>>() else {
                    continue;
                };
                let mut image = local.clone();
                image.sort_unstable();
                image.dedup();
                if image.len() != local.len() {
                    continue;
                }
                let monotone = local.windows(2).all(|w| w[0] < w[1]);
                match by_image.get_mut(&image) {
                    Some(existing) => {
                        if monotone && !existing.windows(2).all(|w| w[0] < w[1]) {
                            *existing = local;
                        }
                    }
                    None => {
                        order.push(image.clone());
                        by_image.insert(image, local);
                    }
                }
            }
        }
        let cubes = order.into_iter().map(|im| by_image.remove(&im).expect("stored")).collect();
        Ok(Self {
            ambient_dim,
            vertices: vs,
            cubes,
        })
    }

    /// The whole cube `{0,1}ⁿ`.
    pub fn full(n: usize, max_dim: usize) -> Self {
        let vs: Vec<usize> = (0..1 << n).collect();
        Self::induced(n, &vs, max_dim).expect("valid")
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn cubes(&self) -> &[Vec<usize>] {
        &self.cubes
    }

    pub fn position(&self, v: usize) -> Option<usize> {
        self.vertices.binary_search(&v).ok()
    }

    pub fn contains_all(&self, vs: &[usize]) -> bool {
        vs.iter().all(|&v| self.position(v).is_some())
    }

    /// The subcubespace on a subset of this one's vertices.
    pub fn restrict(&self, vs: &[usize]) -> Result<Self> {
        let max_dim = self.cubes.iter().map(|c| c.len().trailing_zeros() as usize).max().unwrap_or(0);
        Self::induced(self.ambient_dim, vs, max_dim)
    }
}

fn hom_search<'a>(p: &SubCubespace, fixed: &[(usize, u32)], x: &'a Cubespace) -> Result<Search<'a>> {
    let mut assign = vec![None; p.vertices.len()];
    for &(v, val) in fixed {
        let i = p
            .position(v)
            .ok_or_else(|| Error::Precondition(format!("fixed vertex {v} is not in P")))?;
        if val as usize >= x.len() {
            return Err(Error::Precondition(format!("fixed value {val} is not a point")));
        }
        assign[i] = Some(val);
    }
    let constraints: Vec<Constraint> = p
        .cubes
        .iter()
        .filter(|c| c.len().trailing_zeros() as usize <= x.n_max())
        .map(|c| Constraint {
            positions: c.clone(),
        })
        .collect();
    // the prescribed values must already be a morphism on their support
    for c in &constraints {
        if c.positions.iter().all(|&i| assign[i].is_some()) {
            let q: Vec<u32> = c.positions.iter().map(|&i| assign[i].expect("fixed")).collect();
            if !x.is_cube(&q) {
                return Err(Error::Precondition(
                    "prescribed values send a cube of S outside the cube sets".into(),
                ));
            }
        }
    }
    let n = assign.len();
    Ok(Search::new(x, n, assign, constraints, true))
}

/// All morphisms `g: P → X` with `g(v) = f(v)` on the given vertices.
/// Results list values in `P.vertices()` order and come out sorted.
pub fn hom_set(p: &SubCubespace, fixed: &[(usize, u32)], x: &Cubespace) -> Result<Vec<Vec<u32>>> {
    Ok(hom_search(p, fixed, x)?.collect())
}

/// Whether some morphism extends the prescription.
pub fn hom_exists(p: &SubCubespace, fixed: &[(usize, u32)], x: &Cubespace) -> Result<bool> {
    let mut found = false;
    hom_search(p, fixed, x)?.for_each(|_| {
        found = true;
        false
    });
    Ok(found)
}

pub fn hom_count(p: &SubCubespace, fixed: &[(usize, u32)], x: &Cubespace) -> Result<u64> {
    Ok(hom_search(p, fixed, x)?.count())
}
