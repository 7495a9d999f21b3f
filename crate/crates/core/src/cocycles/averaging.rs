//! Averaging a cocycle over the fibres of a morphism, and rectifying a
//! lifted map into an extension by averaging corner completions.

use std::collections::HashMap;

use rayon::prelude::*;

use super::{cocycle_verify, cyclic_modulus, Cocycle, CocycleReport, Extension};
use crate::cube::sign;
use crate::cubespace::Cubespace;
use crate::error::{Error, Result};
use crate::groups::{concentrated_average, d2, Distance, TorusValue};
use crate::report::Verdict;
use crate::structure::Morphism;

#[derive(Debug, Clone)]
pub struct AveragedCocycle {
    pub rho: Cocycle,
    pub report: CocycleReport,
    pub fibres: usize,
    /// `max_q d₂(ρ′(q), ρ(q))`
    pub max_shift: Distance,
    /// largest `d₂` between two values of `ρ` on one fibre
    pub diameter: Distance,
    pub fibre_constant: Verdict,
    pub bound: Verdict,
}

impl AveragedCocycle {
    pub fn verdicts(&self) -> Vec<&Verdict> {
        let mut v: Vec<&Verdict> = self.report.verdicts().to_vec();
        v.push(&self.fibre_constant);
        v.push(&self.bound);
        v
    }
}

/// `ρ′(q) = ` concentrated average of `ρ` over the cubes `q′` with
/// `β∘q′ = β∘q`. Every `k`-cube of the target must be hit.
pub fn average_cocycle(x: &Cubespace, rho: &Cocycle, beta: &Morphism) -> Result<AveragedCocycle> {
    let k = rho.k();
    if *beta.source != *x {
        return Err(Error::structural("the morphism does not start at the cocycle's base"));
    }
    let cubes = x.require_dim(k)?;
    let target = beta.target.require_dim(k)?;
    let image: Vec<usize> = (0..cubes.len())
        .into_par_iter()
        .map(|i| {
            let q: Vec<u32> = cubes.get(i).iter().map(|&p| beta.apply(p)).collect();
            target
                .index_of(&q)
                .ok_or_else(|| Error::Precondition("the map does not send cubes to cubes".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut fibres: Vec<Vec<usize>> = vec![vec![]; target.len()];
    for (i, &j) in image.iter().enumerate() {
        fibres[j].push(i);
    }
    if let Some(j) = fibres.iter().position(Vec::is_empty) {
        return Err(Error::Precondition(format!("target {k}-cube {j} has no preimage")));
    }
    let averaged: Vec<(TorusValue, Distance)> = fibres
        .par_iter()
        .enumerate()
        .map(|(j, fib)| {
            let vals: Vec<TorusValue> = fib.iter().map(|&i| rho.value(i).clone()).collect();
            let avg = concentrated_average(&vals).map_err(|e| match e {
                Error::Concentration { first, second, detail } => Error::Concentration {
                    first: fib[first],
                    second: fib[second],
                    detail: format!("{detail} (fibre over target cube {j})"),
                },
                other => other,
            })?;
            let mut diam = Distance::zero();
            for a in 0..vals.len() {
                for b in a + 1..vals.len() {
                    diam = diam.max(d2(&vals[a], &vals[b])?);
                }
            }
            Ok((avg, diam))
        })
        .collect::<Result<Vec<_>>>()?;
    let values: Vec<TorusValue> = image.iter().map(|&j| averaged[j].0.clone()).collect();
    let new = Cocycle::new(x, k, rho.coefficients().clone(), values)?;
    let mut max_shift = Distance::zero();
    for i in 0..cubes.len() {
        max_shift = max_shift.max(d2(new.value(i), rho.value(i))?);
    }
    let diameter = averaged.iter().map(|a| a.1.clone()).max().unwrap_or_else(Distance::zero);
    let constant = fibres
        .iter()
        .all(|fib| fib.iter().all(|&i| new.value(i) == new.value(fib[0])));
    let fibre_constant = Verdict::new("fibre-constant", constant, format!("{} fibres", fibres.len()));
    let bound = Verdict::new(
        "shift-bound",
        max_shift <= diameter,
        format!("shift {max_shift}, fibre diameter {diameter}"),
    );
    let report = cocycle_verify(x, &new)?;
    Ok(AveragedCocycle {
        rho: new,
        report,
        fibres: fibres.len(),
        max_shift,
        diameter,
        fibre_constant,
        bound,
    })
}

#[derive(Debug, Clone)]
pub struct Rectification {
    pub phi: Vec<u32>,
    /// `φ₄` sends every cube of `Y` to a cube of `M`
    pub morphism: Verdict,
    /// `π∘φ₄ = φ₂`
    pub lifts: Verdict,
}

/// `φ₄(y) = φ₃(y) + ` concentrated average over `q ∈ Cu^k_y(Y)` of
/// `comp₀(q) − φ₃(y)`, where `comp₀(q)` completes `φ₃∘q` at vertex 0.
///
/// The extension's coefficients `Z/N` are read as `(1/N)Z/Z`; the averages
/// must land back in it, so `N` should absorb the cube counts involved.
pub fn rectify_lifted_map(ext: &Extension, y: &Cubespace, phi2: &[u32], phi3: &[u32]) -> Result<Rectification> {
    let n_mod = cyclic_modulus(ext.cocycle().coefficients())?;
    let base = ext.base();
    let k = ext.k();
    let g = ext.group();
    if phi2.len() != y.len() || phi3.len() != y.len() {
        return Err(Error::structural("maps must be defined on every point"));
    }
    for p in 0..y.len() {
        if phi3[p] as usize >= ext.len() || ext.split_point(phi3[p]).0 != phi2[p] {
            return Err(Error::Precondition(format!("the lift is not over the base map at {}", y.label(p as u32))));
        }
    }
    let kcubes = y.require_dim(k)?;
    let base_k = base.require_dim(k)?;
    let z_of = |p: u32| ext.fibre_element(p)[0];
    let phi4 = (0..y.len() as u32)
        .into_par_iter()
        .map(|p| {
            let here = z_of(phi3[p as usize]);
            let offsets = kcubes
                .prefix_range(&[p])
                .map(|i| {
                    let q = kcubes.get(i);
                    let b: Vec<u32> = q.iter().map(|&t| phi2[t as usize]).collect();
                    let j = base_k
                        .index_of(&b)
                        .ok_or_else(|| Error::Precondition("the base map does not preserve cubes".into()))?;
                    let mut z0 = -ext.cocycle().value(j).finite_part()[0];
                    for (v, &t) in q.iter().enumerate().skip(1) {
                        z0 -= sign(v) * z_of(phi3[t as usize]);
                    }
                    Ok(TorusValue::circle(z0 - here, n_mod as i64))
                })
                .collect::<Result<Vec<_>>>()?;
            let avg = concentrated_average(&offsets)?;
            let scaled = avg.torus_part()[0] * n_mod as i64;
            if !scaled.is_integer() {
                return Err(Error::Precondition(format!(
                    "average offset {avg} at {} is not in Z/{n_mod}; refine the coefficients",
                    y.label(p)
                )));
            }
            let z = g.reduce(vec![here + scaled.to_integer()]);
            Ok(ext.point(phi2[p as usize], g.index_of(&z)))
        })
        .collect::<Result<Vec<u32>>>()?;
    let top = y.n_max().min(base.n_max());
    let mut bad = None;
    let mut checked = 0usize;
    for n in 0..=top {
        let set = y.cubes(n);
        if let Some(i) = (0..set.len()).into_par_iter().find_first(|&i| {
            let f: Vec<u32> = set.get(i).iter().map(|&t| phi4[t as usize]).collect();
            !ext.is_cube(&f)
        }) {
            bad = Some((n, i));
            break;
        }
        checked += set.len();
    }
    let morphism = match bad {
        None => Verdict::pass("morphism", format!("{checked} cubes map to cubes")),
        Some((n, i)) => Verdict::fail("morphism", format!("{n}-cube number {i} is not sent to a cube")),
    };
    let lifts_ok = phi4
        .iter()
        .zip(phi2)
        .all(|(&p, &b)| ext.split_point(p).0 == b);
    Ok(Rectification {
        phi: phi4,
        morphism,
        lifts: Verdict::new("lift", lifts_ok, "projection of the result is the base map"),
    })
}

/// Constant `c` with `ψ(y) = φ(y) + c` for all `y`, if there is one.
pub fn constant_offset(ext: &Extension, phi: &[u32], psi: &[u32]) -> Option<TorusValue> {
    let g = ext.group();
    let mut seen: HashMap<Vec<i64>, ()> = HashMap::new();
    for (&a, &b) in phi.iter().zip(psi) {
        if ext.split_point(a).0 != ext.split_point(b).0 {
            return None;
        }
        seen.insert(g.sub(ext.fibre_element(b), ext.fibre_element(a)), ());
    }
    if seen.len() != 1 {
        return None;
    }
    let d = seen.into_keys().next().expect("one entry");
    Some(TorusValue::new(g, d, vec![]))
}
