//! Backtracking over assignments `positions → points` subject to cube
//! membership constraints.
//!
//! Positions are assigned in increasing order. A constraint lists the
//! positions feeding the vertices of a cube of the target space. When its
//! positions increase along the cube's vertex order, every partial
//! assignment is a prefix of the packed key, so it can be pruned by a
//! range query, and candidates at its last position can be read straight
//! off the matching range.

use rayon::prelude::*;

use super::Cubespace;

#[derive(Debug, Clone)]
pub(crate) struct Constraint {
    pub positions: Vec<usize>,
}

impl Constraint {
    fn dim(&self) -> usize {
        self.positions.len().trailing_zeros() as usize
    }

    fn monotone(&self) -> bool {
        self.positions.windows(2).all(|w| w[0] < w[1])
    }

    fn last(&self) -> usize {
        *self.positions.iter().max().expect("nonempty constraint")
    }
}

pub(crate) struct Search<'a> {
    space: &'a Cubespace,
    nvars: usize,
    fixed: Vec<Option<u32>>,
    constraints: Vec<Constraint>,
    monotone: Vec<bool>,
    /// constraints whose last position is p
    completes_at: Vec<Vec<usize>>,
    /// (constraint, prefix length) for monotone constraints containing p
    /// that are not yet complete at p
    partial_at: Vec<Vec<(usize, usize)>>,
}

impl<'a> Search<'a> {
    pub fn new(
        space: &'a Cubespace,
        nvars: usize,
        fixed: Vec<Option<u32>>,
        constraints: Vec<Constraint>,
        prefix_pruning: bool,
    ) -> Self {
        assert_eq!(fixed.len(), nvars);
        let mut completes_at = vec![vec![]; nvars];
        let mut partial_at = vec![vec![]; nvars];
        let monotone: Vec<bool> = constraints.iter().map(Constraint::monotone).collect();
        for (ci, c) in constraints.iter().enumerate() {
            assert!(c.dim() <= space.n_max(), "constraint beyond stored dimensions");
            let last = c.last();
            completes_at[last].push(ci);
            if monotone[ci] && prefix_pruning {
                for (len, &p) in c.positions.iter().enumerate() {
                    if p != last {
                        partial_at[p].push((ci, len + 1));
                    }
                }
            }
        }
        // cheapest check first: smaller cube dimension
        for list in &mut completes_at {
            list.sort_by_key(|&ci| constraints[ci].dim());
        }
        Self {
            space,
            nvars,
            fixed,
            constraints,
            monotone,
            completes_at,
            partial_at,
        }
    }

    fn values(&self, ci: usize, assign: &[u32], len: usize, buf: &mut Vec<u32>) {
        buf.clear();
        buf.extend(self.constraints[ci].positions[..len].iter().map(|&p| assign[p]));
    }

    fn candidates(&self, p: usize, assign: &[u32], buf: &mut Vec<u32>) -> Vec<u32> {
        if let Some(v) = self.fixed[p] {
            return vec![v];
        }
        if let Some(&ci) = self.completes_at[p].iter().find(|&&ci| self.monotone[ci]) {
            let c = &self.constraints[ci];
            let len = c.positions.len();
            self.values(ci, assign, len - 1, buf);
            let set = self.space.cubes(c.dim());
            let range = set.prefix_range(buf);
            return range.map(|i| set.last_value(i)).collect();
        }
        (0..self.space.len() as u32).collect()
    }

    fn admissible(&self, p: usize, assign: &[u32], buf: &mut Vec<u32>) -> bool {
        for &ci in &self.completes_at[p] {
            let c = &self.constraints[ci];
            self.values(ci, assign, c.positions.len(), buf);
            if !self.space.cubes(c.dim()).contains(buf) {
                return false;
            }
        }
        for &(ci, len) in &self.partial_at[p] {
            self.values(ci, assign, len, buf);
            let set = self.space.cubes(self.constraints[ci].dim());
            if set.prefix_range(buf).is_empty() {
                return false;
            }
        }
        true
    }

    fn rec<F: FnMut(&[u32]) -> bool>(
        &self,
        p: usize,
        assign: &mut Vec<u32>,
        buf: &mut Vec<u32>,
        visit: &mut F,
    ) -> bool {
        if p == self.nvars {
            return visit(assign);
        }
        for x in self.candidates(p, assign, buf) {
            assign[p] = x;
            if self.admissible(p, assign, buf) && !self.rec(p + 1, assign, buf, visit) {
                return false;
            }
        }
        true
    }

    /// Visit every solution in lexicographic order; the visitor returns
    /// `false` to stop early.
    pub fn for_each<F: FnMut(&[u32]) -> bool>(&self, mut visit: F) {
        let mut assign = vec![0u32; self.nvars];
        let mut buf = Vec::with_capacity(64);
        self.rec(0, &mut assign, &mut buf, &mut visit);
    }

    pub fn collect(&self) -> Vec<Vec<u32>> {
        let mut out = vec![];
        self.for_each(|a| {
            out.push(a.to_vec());
            true
        });
        out
    }

    pub fn count(&self) -> u64 {
        self.par_fold(|| 0u64, |acc, _| *acc += 1)
            .into_iter()
            .sum()
    }

    /// Split on the value at position 0 and fold each branch in parallel.
    /// Results come back in branch order.
    pub fn par_fold<R, I, F>(&self, init: I, f: F) -> Vec<R>
    where
        R: Send,
        I: Fn() -> R + Sync,
        F: Fn(&mut R, &[u32]) + Sync,
    {
        if self.nvars == 0 {
            let mut r = init();
            f(&mut r, &[]);
            return vec![r];
        }
        let mut buf = vec![];
        let firsts = self.candidates(0, &[0], &mut buf);
        firsts
            .par_iter()
            .map(|&x0| {
                let mut r = init();
                let mut assign = vec![0u32; self.nvars];
                let mut buf = Vec::with_capacity(64);
                assign[0] = x0;
                if self.admissible(0, &assign, &mut buf) {
                    self.rec(1, &mut assign, &mut buf, &mut |a: &[u32]| {
                        f(&mut r, a);
                        true
                    });
                }
                r
            })
            .collect()
    }
}
