//! Named example spaces, extensions and maps.

use std::sync::Arc;

use crate::cocycles::{Coefficients, Cocycle, Extension};
use crate::cube::sign;
use crate::cubespace::{make_dk_within, Cubespace};
use crate::error::{Error, Result};
use crate::filtered::{quotient_nilspace, FilteredGroup};
use crate::groups::{FiniteAbelianGroup, TorusValue};
use crate::Limits;

/// A catalog space with the data it was built from.
#[derive(Debug, Clone)]
pub struct CatalogSpace {
    pub name: String,
    pub space: Cubespace,
    /// set for `G/Γ` spaces
    pub filtered: Option<(FilteredGroup, Vec<u32>)>,
}

impl CatalogSpace {
    pub fn step(&self) -> Option<usize> {
        self.space.declared_step()
    }

    /// Left multiplications by elements of `G_i`, for `G/Γ` spaces, as
    /// `(i, map)` with `i` the deepest term containing the element.
    pub fn left_multiplications(&self) -> Vec<(usize, Vec<u32>)> {
        let Some((g, gamma)) = &self.filtered else {
            return vec![];
        };
        let coset_of = |h: u32| -> u32 {
            let rep = gamma.iter().map(|&y| g.mul(h, y)).min().expect("Γ has the identity");
            self.space.point(&g.labels()[rep as usize]).expect("coset label")
        };
        let reps: Vec<u32> = (0..self.space.len() as u32)
            .map(|p| {
                let label = self.space.label(p);
                g.labels().iter().position(|l| l == label).expect("representative") as u32
            })
            .collect();
        let mut out = vec![];
        for a in 0..g.order() as u32 {
            let depth = (1..=g.degree()).rev().find(|&i| g.in_term(i, a)).unwrap_or(1);
            let map: Vec<u32> = reps.iter().map(|&h| coset_of(g.mul(a, h))).collect();
            out.push((depth, map));
        }
        out.sort();
        out.dedup();
        out
    }
}

/// `D_k(A)`.
pub fn dk(a: &FiniteAbelianGroup, k: usize, n_max: usize, limits: &Limits) -> Result<CatalogSpace> {
    Ok(CatalogSpace {
        name: format!("dk({a},{k})"),
        space: make_dk_within(a, k, n_max, limits)?,
        filtered: None,
    })
}

/// `G/Γ` with its Host–Kra cubes.
pub fn quotient(g: FilteredGroup, gamma: Vec<u32>, name: &str, n_max: usize, limits: &Limits) -> Result<CatalogSpace> {
    let space = quotient_nilspace(&g, &gamma, n_max, limits)?;
    Ok(CatalogSpace {
        name: name.to_string(),
        space,
        filtered: Some((g, gamma)),
    })
}

/// The Heisenberg group mod `p` as a 2-step space.
pub fn heis(p: u64, n_max: usize, limits: &Limits) -> Result<CatalogSpace> {
    let g = FilteredGroup::heisenberg(p)?;
    let e = g.identity();
    quotient(g, vec![e], &format!("heis({p})"), n_max, limits)
}

/// `Z/2N` with `G₂ = {0, N}`; its `~₁` classes are the cosets of `G₂`.
pub fn cyclic_deg2(n: u64, n_max: usize, limits: &Limits) -> Result<CatalogSpace> {
    let g = FilteredGroup::cyclic_deg2(n)?;
    let e = g.identity();
    quotient(g, vec![e], &format!("cyclic-deg2({n})"), n_max, limits)
}

/// The carry cocycle of `Z/nm → Z/n` on `Cu²(D₁(Z/n))`:
/// `q ↦ σ₂(q̃)/n mod m` with `q̃` the lift of `q` to `0..n`.
/// Its extension is `D₁(Z/nm)`, and it is a coboundary only when that
/// extension splits.
pub fn carry_cocycle(x: &Cubespace, n: u64, m: u64) -> Result<Cocycle> {
    if x.len() as u64 != n {
        return Err(Error::Config(format!("carry cocycle needs D1(Z/{n})")));
    }
    let a = FiniteAbelianGroup::cyclic(m);
    let lift: Vec<i64> = (0..n as u32)
        .map(|p| x.label(p).parse::<i64>().map_err(|_| Error::Config("expected numeric labels".into())))
        .collect::<Result<_>>()?;
    Cocycle::from_fn(x, 2, Coefficients::finite(a.clone()), |q| {
        let s: i64 = q.iter().enumerate().map(|(v, &p)| sign(v) * lift[p as usize]).sum();
        TorusValue::new(&a, vec![s.div_euclid(n as i64)], vec![])
    })
}

/// `D₁(Z/n) × D₁(A)` as the extension by the zero cocycle on `Cu²`.
pub fn split_extension(n: u64, a: &FiniteAbelianGroup, n_max: usize, limits: &Limits) -> Result<Extension> {
    let base = Arc::new(make_dk_within(&FiniteAbelianGroup::cyclic(n), 1, n_max, limits)?);
    let zero = Cocycle::zero(&base, 2, Coefficients::finite(a.clone()))?;
    Extension::new(base, &zero)
}

/// `D₁(Z/nm)` as the carry extension of `D₁(Z/n)` by `Z/m`.
pub fn twisted_extension(n: u64, m: u64, n_max: usize, limits: &Limits) -> Result<Extension> {
    let base = Arc::new(make_dk_within(&FiniteAbelianGroup::cyclic(n), 1, n_max, limits)?);
    let rho = carry_cocycle(&base, n, m)?;
    Extension::new(base, &rho)
}

/// `x ↦ x mod m` from `D₁(Z/n)` to `D₁(Z/m)` for `m | n`.
pub fn reduction_map(n: u64, m: u64) -> Result<Vec<u32>> {
    if m == 0 || n % m != 0 {
        return Err(Error::Config(format!("{m} does not divide {n}")));
    }
    Ok((0..n).map(|x| (x % m) as u32).collect())
}

/// The spaces every catalog-wide check runs over.
pub fn micro_catalog(n_max: usize, limits: &Limits) -> Result<Vec<CatalogSpace>> {
    let z = FiniteAbelianGroup::cyclic;
    let mut out = vec![
        dk(&z(2), 1, n_max, limits)?,
        dk(&z(3), 1, n_max, limits)?,
        dk(&z(4), 1, n_max, limits)?,
        dk(&z(2), 2, n_max, limits)?,
        dk(&z(3), 2, n_max, limits)?,
        dk(&FiniteAbelianGroup::new(&[2, 2])?, 1, n_max, limits)?,
        heis(2, n_max, limits)?,
        cyclic_deg2(2, n_max, limits)?,
    ];
    let split = split_extension(2, &z(2), n_max, limits)?;
    out.push(CatalogSpace {
        name: "split(2,2)".into(),
        space: split.materialize(limits)?,
        filtered: None,
    });
    let twisted = twisted_extension(2, 2, n_max, limits)?;
    out.push(CatalogSpace {
        name: "twisted(2,2)".into(),
        space: twisted.materialize(limits)?,
        filtered: None,
    });
    Ok(out)
}
