//! `H_k(X, A)` as cocycles modulo coboundaries, by linear algebra over each
//! cyclic factor of `A`.

use super::{automorphism_generators, coboundary_matrix, for_each_concatenation};
use crate::cubespace::Cubespace;
use crate::error::{Error, Result};
use crate::groups::FiniteAbelianGroup;
use crate::linalg::kernel_quotient;
use crate::Limits;

/// Cap on dense constraint-matrix entries.
const MAX_ENTRIES: u128 = 50_000_000;

/// Rows of the axiom system over `Cu^k(X)`: one per automorphism generator
/// and cube, one per adjacent pair. Duplicates are dropped.
fn constraint_rows(x: &Cubespace, k: usize) -> Vec<Vec<(usize, i64)>> {
    let cubes = x.cubes(k);
    let mut rows: Vec<Vec<(usize, i64)>> = vec![];
    for (perm, s) in automorphism_generators(k) {
        for i in 0..cubes.len() {
            let q = cubes.get(i);
            let moved: Vec<u32> = perm.iter().map(|&w| q[w]).collect();
            let j = cubes.index_of(&moved).expect("cube sets are closed under automorphisms");
            rows.push(sparse(&[(j, 1), (i, -s)]));
        }
    }
    for_each_concatenation(x, k, |i, j, c| {
        if let Some(c) = c {
            rows.push(sparse(&[(c, 1), (i, -1), (j, -1)]));
        }
    });
    rows.retain(|r| !r.is_empty());
    rows.sort();
    rows.dedup();
    rows
}

fn sparse(entries: &[(usize, i64)]) -> Vec<(usize, i64)> {
    let mut out: Vec<(usize, i64)> = vec![];
    let mut e = entries.to_vec();
    e.sort_unstable();
    for (i, c) in e {
        match out.last_mut() {
            Some((j, d)) if *j == i => *d += c,
            _ => out.push((i, c)),
        }
    }
    out.retain(|&(_, c)| c != 0);
    out
}

/// `H_k(X, A)` for cocycles on `Cu^k(X)`, as a normalized group.
pub fn cohomology(x: &Cubespace, k: usize, a: &FiniteAbelianGroup, limits: &Limits) -> Result<FiniteAbelianGroup> {
    if k == 0 {
        return Err(Error::Config("cocycles live on cubes of dimension at least 1".into()));
    }
    let n = x.require_dim(k)?.len();
    if n > limits.max_cocycle_cubes {
        return Err(Error::budget(
            format!("cohomology on Cu^{k}"),
            n as u128,
            limits.max_cocycle_cubes as u128,
        ));
    }
    let rows = constraint_rows(x, k);
    let entries = rows.len() as u128 * n as u128;
    if entries > MAX_ENTRIES {
        return Err(Error::budget("constraint matrix entries", entries, MAX_ENTRIES));
    }
    let images: Vec<Vec<i64>> = {
        let m = coboundary_matrix(x, k);
        (0..x.len()).map(|p| m.iter().map(|row| row[p]).collect()).collect()
    };
    let mut factors = vec![];
    for &d in a.factors() {
        let d = d as i64;
        let dense: Vec<Vec<i64>> = rows
            .iter()
            .map(|r| {
                let mut row = vec![0i64; n];
                for &(i, c) in r {
                    row[i] = c.rem_euclid(d);
                }
                row
            })
            .collect();
        let imgs: Vec<Vec<i64>> = images
            .iter()
            .map(|v| v.iter().map(|c| c.rem_euclid(d)).collect())
            .collect();
        factors.extend(kernel_quotient(dense, n, &imgs, d));
    }
    Ok(FiniteAbelianGroup::new(&factors)?.normalized())
}
