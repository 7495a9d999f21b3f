//! The tricube `T_n` on `{−1,0,1}ⁿ` and the alternating-sum identity
//! `ρ(q) = Σ_v (−1)^{|v|} ρ(t∘Ψ_v)`.

use rayon::prelude::*;

use super::Cocycle;
use crate::cube::sign;
use crate::cubespace::{hom_set, Cubespace, SubCubespace};
use crate::error::{Error, Result};
use crate::groups::TorusValue;
use crate::report::Verdict;

/// `{−1,0,1}ⁿ` inside `{0,1}^{2n}`: coordinate `j` uses bits `2j, 2j+1`
/// with `−1 ↦ (1,0)`, `0 ↦ (0,0)`, `1 ↦ (0,1)`.
#[derive(Debug, Clone)]
pub struct Tricube {
    pub n: usize,
    pub space: SubCubespace,
    /// ambient vertex of `ω(v)`, `ω(v)_j = 1 − 2v_j`
    pub omega: Vec<usize>,
    /// `psi[v][w]` is the ambient vertex of `Ψ_v(w)`,
    /// `Ψ_v(w)_j = (−1)^{v_j}(1 − w_j)`
    pub psi: Vec<Vec<usize>>,
}

/// Ambient vertex of a point of `{−1,0,1}ⁿ`.
pub fn encode(point: &[i8]) -> usize {
    point.iter().enumerate().fold(0, |acc, (j, &c)| match c {
        -1 => acc | 1 << (2 * j),
        1 => acc | 1 << (2 * j + 1),
        _ => acc,
    })
}

impl Tricube {
    /// Cubes of the induced structure are kept up to dimension `max_dim`.
    pub fn new(n: usize, max_dim: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("the tricube needs n ≥ 1".into()));
        }
        let mut vertices = vec![];
        for i in 0..3usize.pow(n as u32) {
            let pt: Vec<i8> = (0..n).map(|j| (i / 3usize.pow(j as u32) % 3) as i8 - 1).collect();
            vertices.push(encode(&pt));
        }
        let space = SubCubespace::induced(2 * n, &vertices, max_dim)?;
        let full = 1usize << n;
        let omega = (0..full)
            .map(|v| encode(&(0..n).map(|j| 1 - 2 * (v >> j & 1) as i8).collect::<Vec<_>>()))
            .collect();
        let psi = (0..full)
            .map(|v| {
                (0..full)
                    .map(|w| {
                        let pt: Vec<i8> = (0..n)
                            .map(|j| {
                                let s = if v >> j & 1 == 1 { -1 } else { 1 };
                                s * (1 - (w >> j & 1) as i8)
                            })
                            .collect();
                        encode(&pt)
                    })
                    .collect()
            })
            .collect();
        Ok(Self { n, space, omega, psi })
    }

    /// Ambient vertices of `Ψ_v({0,1}ⁿ)`.
    pub fn psi_image(&self, v: usize) -> Vec<usize> {
        let mut out = self.psi[v].clone();
        out.sort_unstable();
        out
    }

    pub fn outer_points(&self) -> Vec<usize> {
        let mut out = self.omega.clone();
        out.sort_unstable();
        out
    }

    pub fn center(&self) -> usize {
        0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TricubeReport {
    pub cubes: usize,
    /// `(q, t)` pairs checked
    pub pairs: u64,
    /// cubes `q` with no `t` extending `q∘ω⁻¹`
    pub empty: usize,
    pub violations: Vec<String>,
    pub verdict: Verdict,
}

/// Check the tricube identity for every `q ∈ Cu^k(X)` and every morphism
/// `t: T_k → X` with `t∘ω = q`.
pub fn tricube_verify(x: &Cubespace, rho: &Cocycle) -> Result<TricubeReport> {
    let k = rho.k();
    let cubes = x.require_dim(k)?;
    let t = Tricube::new(k, x.n_max().min(2 * k))?;
    let pos = |v: usize| t.space.position(v).expect("tricube vertex");
    let psi_pos: Vec<Vec<usize>> = t.psi.iter().map(|row| row.iter().map(|&v| pos(v)).collect()).collect();
    let results: Vec<(u64, bool, Vec<String>)> = (0..cubes.len())
        .into_par_iter()
        .map(|i| {
            let q = cubes.get(i);
            let fixed: Vec<(usize, u32)> = t.omega.iter().zip(&q).map(|(&w, &p)| (w, p)).collect();
            let homs = match hom_set(&t.space, &fixed, x) {
                Ok(h) => h,
                Err(Error::Precondition(_)) => vec![],
                Err(e) => return Err(e),
            };
            let mut bad = vec![];
            for h in &homs {
                let mut acc = TorusValue::zero(&rho.coefficients().shape());
                for (v, row) in psi_pos.iter().enumerate() {
                    let sub: Vec<u32> = row.iter().map(|&p| h[p]).collect();
                    let val = rho
                        .value_of(x, &sub)
                        .ok_or_else(|| Error::NotNilspace("t∘Ψ_v is not a cube".into()))?;
                    acc = acc.add(&val.scale(sign(v)));
                }
                if acc != *rho.value(i) && bad.len() < 3 {
                    bad.push(format!("cube {i}: identity gives {acc}, table has {}", rho.value(i)));
                }
            }
            Ok((homs.len() as u64, homs.is_empty(), bad))
        })
        .collect::<Result<Vec<_>>>()?;
    let pairs = results.iter().map(|r| r.0).sum();
    let empty = results.iter().filter(|r| r.1).count();
    let violations: Vec<String> = results.into_iter().flat_map(|r| r.2).take(10).collect();
    let verdict = if !violations.is_empty() {
        Verdict::fail("tricube", format!("identity fails, first: {}", violations[0]))
    } else if empty > 0 {
        Verdict::fail("tricube", format!("{empty} cubes have an empty tricube hom-set"))
    } else {
        Verdict::pass("tricube", format!("{pairs} (q,t) pairs over {} cubes", cubes.len()))
    };
    Ok(TricubeReport {
        cubes: cubes.len(),
        pairs,
        empty,
        violations,
        verdict,
    })
}
