//! The discrete cube `{0,1}ⁿ` and its morphisms.
//!
//! A vertex is a bitmask with bit `i` holding coordinate `i`. Integer
//! order on vertices is then colex order.

use crate::error::{Error, Result};

pub fn weight(v: usize) -> u32 {
    v.count_ones()
}

/// `(−1)^{|v|}`
pub fn sign(v: usize) -> i64 {
    if v.count_ones() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// A face of `{0,1}ⁿ`: the free coordinates vary, the rest are fixed to
/// the bits of `base`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Face {
    pub free: Vec<usize>,
    pub base: usize,
}

impl Face {
    pub fn dim(&self) -> usize {
        self.free.len()
    }

    /// Embedding of `{0,1}^d` onto the face; vertex `w` of the face maps
    /// to the vertex with `w`'s bits spread over the free coordinates.
    pub fn vertex(&self, w: usize) -> usize {
        let mut v = self.base;
        for (j, &c) in self.free.iter().enumerate() {
            if w >> j & 1 == 1 {
                v |= 1 << c;
            }
        }
        v
    }

    /// Face vertices in ascending order (the embedding is monotone).
    pub fn vertices(&self) -> Vec<usize> {
        (0..1usize << self.dim()).map(|w| self.vertex(w)).collect()
    }

    pub fn top(&self) -> usize {
        self.vertex((1 << self.dim()) - 1)
    }
}

/// All `d`-dimensional faces of `{0,1}ⁿ`.
pub fn faces(n: usize, d: usize) -> Vec<Face> {
    let mut out = vec![];
    if d > n {
        return out;
    }
    for free_mask in 0usize..1 << n {
        if free_mask.count_ones() as usize != d {
            continue;
        }
        let free: Vec<usize> = (0..n).filter(|&i| free_mask >> i & 1 == 1).collect();
        let fixed_mask = ((1usize << n) - 1) & !free_mask;
        // enumerate subsets of fixed_mask
        let mut sub = 0usize;
        loop {
            out.push(Face {
                free: free.clone(),
                base: sub,
            });
            if sub == fixed_mask {
                break;
            }
            sub = (sub.wrapping_sub(fixed_mask)) & fixed_mask;
        }
    }
    out
}

/// `d`-faces of `{0,1}ⁿ` whose top vertex is `v`.
pub fn faces_with_top(n: usize, d: usize, v: usize) -> Vec<Face> {
    let support: Vec<usize> = (0..n).filter(|&i| v >> i & 1 == 1).collect();
    let mut out = vec![];
    if support.len() < d {
        return out;
    }
    for pick in 0usize..1 << support.len() {
        if pick.count_ones() as usize != d {
            continue;
        }
        let free: Vec<usize> = (0..support.len())
            .filter(|&j| pick >> j & 1 == 1)
            .map(|j| support[j])
            .collect();
        let mask: usize = free.iter().map(|&c| 1usize << c).sum();
        out.push(Face {
            free,
            base: v & !mask,
        });
    }
    out
}

/// One output coordinate of a discrete-cube morphism.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Coord {
    Zero,
    One,
    Var(usize),
    NegVar(usize),
}

/// A map `{0,1}^m → {0,1}ⁿ` whose coordinates are constants, source
/// coordinates or negated source coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CubeMorphismSpec {
    pub source_dim: usize,
    pub coords: Vec<Coord>,
}

impl CubeMorphismSpec {
    pub fn new(source_dim: usize, coords: Vec<Coord>) -> Result<Self> {
        for c in &coords {
            if let Coord::Var(i) | Coord::NegVar(i) = c {
                if *i >= source_dim {
                    return Err(Error::structural(format!(
                        "coordinate refers to source axis {i} of {source_dim}"
                    )));
                }
            }
        }
        Ok(Self { source_dim, coords })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            source_dim: n,
            coords: (0..n).map(Coord::Var).collect(),
        }
    }

    pub fn target_dim(&self) -> usize {
        self.coords.len()
    }

    pub fn apply(&self, w: usize) -> usize {
        let mut v = 0;
        for (j, c) in self.coords.iter().enumerate() {
            let bit = match *c {
                Coord::Zero => 0,
                Coord::One => 1,
                Coord::Var(i) => w >> i & 1,
                Coord::NegVar(i) => 1 - (w >> i & 1),
            };
            v |= bit << j;
        }
        v
    }

    /// Vertex table `w ↦ φ(w)`.
    pub fn table(&self) -> Vec<usize> {
        (0..1usize << self.source_dim).map(|w| self.apply(w)).collect()
    }

    /// `self ∘ other`
    pub fn compose(&self, other: &CubeMorphismSpec) -> Result<Self> {
        if other.target_dim() != self.source_dim {
            return Err(Error::structural("composing cube morphisms of mismatched dimensions"));
        }
        let coords = self
            .coords
            .iter()
            .map(|c| match *c {
                Coord::Zero => Coord::Zero,
                Coord::One => Coord::One,
                Coord::Var(i) => other.coords[i],
                Coord::NegVar(i) => match other.coords[i] {
                    Coord::Zero => Coord::One,
                    Coord::One => Coord::Zero,
                    Coord::Var(k) => Coord::NegVar(k),
                    Coord::NegVar(k) => Coord::Var(k),
                },
            })
            .collect();
        Ok(Self {
            source_dim: other.source_dim,
            coords,
        })
    }

    /// Number of negated coordinates.
    pub fn reflections(&self) -> usize {
        self.coords.iter().filter(|c| matches!(c, Coord::NegVar(_))).count()
    }

    /// Whether this is a bijection of `{0,1}ⁿ`.
    pub fn is_automorphism(&self) -> bool {
        if self.source_dim != self.target_dim() {
            return false;
        }
        let mut seen = vec![false; self.source_dim];
        for c in &self.coords {
            match *c {
                Coord::Var(i) | Coord::NegVar(i) if !seen[i] => seen[i] = true,
                _ => return false,
            }
        }
        true
    }

    /// Every spec `{0,1}^m → {0,1}ⁿ`.
    pub fn enumerate(m: usize, n: usize) -> Vec<Self> {
        let mut tags = vec![Coord::Zero, Coord::One];
        for i in 0..m {
            tags.push(Coord::Var(i));
            tags.push(Coord::NegVar(i));
        }
        let mut out = vec![];
        let total = tags.len().pow(n as u32);
        for mut code in 0..total {
            let mut coords = Vec::with_capacity(n);
            for _ in 0..n {
                coords.push(tags[code % tags.len()]);
                code /= tags.len();
            }
            out.push(Self {
                source_dim: m,
                coords,
            });
        }
        out
    }

    /// Pull back a cube: `(q ∘ φ)(w) = q(φ(w))`.
    pub fn pull<T: Clone>(&self, q: &[T]) -> Vec<T> {
        (0..1usize << self.source_dim)
            .map(|w| q[self.apply(w)].clone())
            .collect()
    }
}

/// Vertex tables of the generating maps used by the composition check,
/// each paired with its source dimension. For target dimension `n` and a
/// bound `n_max`, together with their composites these give every
/// discrete-cube morphism between dimensions at most `n_max`.
pub fn generator_tables(n: usize, n_max: usize) -> Vec<(usize, Vec<usize>)> {
    let mut gens = vec![];
    let full = 1usize << n;
    if n >= 1 {
        // reflect coordinate 0
        gens.push((n, (0..full).map(|v| v ^ 1).collect()));
        // restrict to the face x_{n-1} = 0
        gens.push((n - 1, (0..full >> 1).collect()));
    }
    if n >= 2 {
        // swap coordinates 0 and 1
        gens.push((
            n,
            (0..full)
                .map(|v| (v & !3) | ((v & 1) << 1) | ((v >> 1) & 1))
                .collect(),
        ));
        // cyclic shift i -> i+1
        gens.push((
            n,
            (0..full)
                .map(|w| ((w << 1) | (w >> (n - 1))) & (full - 1))
                .collect(),
        ));
        // diagonal x_{n-1} = x_{n-2}
        gens.push((
            n - 1,
            (0..full >> 1)
                .map(|w| w | ((w >> (n - 2) & 1) << (n - 1)))
                .collect(),
        ));
    }
    if n < n_max {
        // add an unused coordinate
        gens.push((n + 1, (0..full << 1).map(|w| w & (full - 1)).collect()));
    }
    gens
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn face_counts() {
        // C(n,d) 2^(n-d)
        assert_eq!(faces(3, 2).len(), 6);
        assert_eq!(faces(3, 1).len(), 12);
        assert_eq!(faces(4, 2).len(), 24);
        assert_eq!(faces(3, 3).len(), 1);
        for f in faces(4, 2) {
            let vs = f.vertices();
            assert!(vs.windows(2).all(|w| w[0] < w[1]));
            assert_eq!(*vs.last().unwrap(), f.top());
        }
    }

    #[test]
    fn faces_by_top() {
        let n = 4;
        for d in 0..=n {
            let mut total = 0;
            for v in 0..1 << n {
                for f in faces_with_top(n, d, v) {
                    assert_eq!(f.top(), v);
                    total += 1;
                }
            }
            assert_eq!(total, faces(n, d).len());
        }
    }

    #[test]
    fn compose_matches_tables() {
        let specs21 = CubeMorphismSpec::enumerate(2, 1);
        let specs32 = CubeMorphismSpec::enumerate(3, 2);
        for a in &specs21 {
            for b in specs32.iter().step_by(7) {
                let c = a.compose(b).unwrap();
                for w in 0..8 {
                    assert_eq!(c.apply(w), a.apply(b.apply(w)));
                }
            }
        }
    }

    /// The closure of the generator maps under composition is every spec.
    #[test]
    fn generators_reach_every_spec() {
        let n_max = 3;
        // reachable tables from identity maps, as maps {0,1}^m -> {0,1}^n
        // represented by composing: start from identity on n, apply generators
        // on the source side.
        for n in 0..=n_max {
            let mut seen: HashSet<(usize, Vec<usize>)> = HashSet::new();
            let id: Vec<usize> = (0..1 << n).collect();
            let mut stack = vec![(n, id)];
            while let Some((m, t)) = stack.pop() {
                if !seen.insert((m, t.clone())) {
                    continue;
                }
                for (m2, g) in generator_tables(m, n_max) {
                    let t2: Vec<usize> = g.iter().map(|&w| t[w]).collect();
                    stack.push((m2, t2));
                }
            }
            for m in 0..=n_max {
                let expected: HashSet<Vec<usize>> = CubeMorphismSpec::enumerate(m, n)
                    .iter()
                    .map(|s| s.table())
                    .collect();
                let got: HashSet<Vec<usize>> = seen
                    .iter()
                    .filter(|(mm, _)| *mm == m)
                    .map(|(_, t)| t.clone())
                    .collect();
                assert_eq!(got, expected, "m={m} n={n}");
            }
        }
    }
}
