//! Cocycles on `Cu^k(X)`, their coboundaries, the extensions they define,
//! cross-section cocycles, tricube identities, averaging, rectification
//! and cohomology.
//!
//! A cocycle here is indexed by the dimension `k` of the cubes it is
//! defined on. The extension it defines tests `k`-faces, so it is an
//! extension of degree `k − 1`: the zero cocycle on `Cu^k(point)` gives
//! `D_{k−1}(A)`.

mod averaging;
mod cohomology;
mod extension;
mod tricube;

use rayon::prelude::*;

use crate::cube::sign;
use crate::cubespace::Cubespace;
use crate::error::{Error, Result};
use crate::groups::{concentrated_average, d2, Distance, Element, FiniteAbelianGroup, Rational, TorusShape, TorusValue};
use crate::linalg::solve_mod;
use crate::report::Verdict;
use crate::Limits;

pub use averaging::{average_cocycle, constant_offset, rectify_lifted_map, AveragedCocycle, Rectification};
pub use cohomology::cohomology;
pub use extension::{cocycle_from_section, extension_theta, AbelianExtension, Extension, ThetaReport};
pub use tricube::{tricube_verify, Tricube, TricubeReport};

/// Coefficients `F × (Q/Z)^d`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Coefficients {
    pub finite: FiniteAbelianGroup,
    pub torus_dim: usize,
}

impl Coefficients {
    pub fn finite(a: FiniteAbelianGroup) -> Self {
        Self { finite: a, torus_dim: 0 }
    }

    /// `Q/Z`.
    pub fn circle() -> Self {
        Self {
            finite: FiniteAbelianGroup::trivial(),
            torus_dim: 1,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.torus_dim == 0
    }

    pub fn shape(&self) -> TorusShape {
        TorusShape {
            finite: self.finite.factors().to_vec(),
            torus_dim: self.torus_dim,
        }
    }

    pub fn zero(&self) -> TorusValue {
        TorusValue::zero(&self.shape())
    }

    /// A value of the finite part.
    pub fn element(&self, a: Element) -> TorusValue {
        TorusValue::new(&self.finite, a, vec![Rational::from_integer(0); self.torus_dim])
    }

    pub fn admits(&self, v: &TorusValue) -> bool {
        v.shape() == self.shape()
    }
}

/// A table `ρ: Cu^k(X) → A` in the canonical cube order of `X`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cocycle {
    k: usize,
    coeffs: Coefficients,
    values: Vec<TorusValue>,
}

impl Cocycle {
    pub fn new(x: &Cubespace, k: usize, coeffs: Coefficients, values: Vec<TorusValue>) -> Result<Self> {
        if k == 0 {
            return Err(Error::Config("cocycles live on cubes of dimension at least 1".into()));
        }
        let cubes = x.require_dim(k)?;
        if values.len() != cubes.len() {
            return Err(Error::structural(format!(
                "cocycle table has {} values for {} cubes",
                values.len(),
                cubes.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !coeffs.admits(v)) {
            return Err(Error::structural(format!("value {bad} is not in the coefficient group")));
        }
        Ok(Self { k, coeffs, values })
    }

    pub fn from_fn<F>(x: &Cubespace, k: usize, coeffs: Coefficients, f: F) -> Result<Self>
    where
        F: Fn(&[u32]) -> TorusValue + Sync,
    {
        let cubes = x.require_dim(k)?;
        let values = (0..cubes.len()).into_par_iter().map(|i| f(&cubes.get(i))).collect();
        Self::new(x, k, coeffs, values)
    }

    pub fn zero(x: &Cubespace, k: usize, coeffs: Coefficients) -> Result<Self> {
        let z = coeffs.zero();
        let n = x.require_dim(k)?.len();
        Self::new(x, k, coeffs, vec![z; n])
    }

    /// Dimension of the cubes the table is defined on.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn coefficients(&self) -> &Coefficients {
        &self.coeffs
    }

    pub fn values(&self) -> &[TorusValue] {
        &self.values
    }

    pub fn value(&self, i: usize) -> &TorusValue {
        &self.values[i]
    }

    pub fn value_of(&self, x: &Cubespace, q: &[u32]) -> Option<&TorusValue> {
        x.cubes(self.k).index_of(q).map(|i| &self.values[i])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn add(&self, other: &Cocycle) -> Result<Cocycle> {
        if self.k != other.k || self.coeffs != other.coeffs || self.len() != other.len() {
            return Err(Error::structural("adding cocycles of different shapes"));
        }
        Ok(Cocycle {
            k: self.k,
            coeffs: self.coeffs.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a.add(b)).collect(),
        })
    }

    pub fn neg(&self) -> Cocycle {
        Cocycle {
            k: self.k,
            coeffs: self.coeffs.clone(),
            values: self.values.iter().map(TorusValue::neg).collect(),
        }
    }

    /// Largest `d₂(ρ(q), 0)`.
    pub fn max_distance_from_zero(&self) -> Distance {
        let z = self.coeffs.zero();
        self.values
            .iter()
            .map(|v| d2(v, &z).expect("same shape"))
            .max()
            .unwrap_or_else(Distance::zero)
    }

    /// Read `Q/Z` values as elements of `Z/N`, `p/q ↦ p·N/q`.
    pub fn to_cyclic(&self, n: u64) -> Result<Cocycle> {
        if self.coeffs != Coefficients::circle() {
            return Err(Error::Config("only Q/Z-valued cocycles can be read in Z/N".into()));
        }
        let a = FiniteAbelianGroup::cyclic(n);
        let values = self
            .values
            .iter()
            .map(|v| circle_to_cyclic(v, n).map(|e| TorusValue::new(&a, vec![e], vec![])))
            .collect::<Result<Vec<_>>>()?;
        Ok(Cocycle {
            k: self.k,
            coeffs: Coefficients::finite(a),
            values,
        })
    }

    /// `Z/N`-valued table as the subgroup `(1/N)Z/Z` of `Q/Z`.
    pub fn to_circle(&self) -> Result<Cocycle> {
        let n = cyclic_modulus(&self.coeffs)?;
        Ok(Cocycle {
            k: self.k,
            coeffs: Coefficients::circle(),
            values: self
                .values
                .iter()
                .map(|v| TorusValue::circle(v.finite_part()[0], n as i64))
                .collect(),
        })
    }

    /// `q ↦ ρ(β∘q)` for a map `β: Y → X` sending `k`-cubes to `k`-cubes.
    pub fn pullback(&self, x: &Cubespace, y: &Cubespace, beta: &[u32]) -> Result<Cocycle> {
        let cubes = y.require_dim(self.k)?;
        let values = (0..cubes.len())
            .into_par_iter()
            .map(|i| {
                let q: Vec<u32> = cubes.get(i).iter().map(|&p| beta[p as usize]).collect();
                self.value_of(x, &q)
                    .cloned()
                    .ok_or_else(|| Error::Precondition("pullback map does not preserve cubes".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        Cocycle::new(y, self.k, self.coeffs.clone(), values)
    }
}

pub(crate) fn cyclic_modulus(c: &Coefficients) -> Result<u64> {
    match (c.finite.factors(), c.torus_dim) {
        ([n], 0) => Ok(*n),
        _ => Err(Error::Config(format!("expected a cyclic coefficient group, got {}", c.finite))),
    }
}

pub(crate) fn circle_to_cyclic(v: &TorusValue, n: u64) -> Result<i64> {
    let r = v.torus_part()[0] * n as i64;
    if !r.is_integer() {
        return Err(Error::Precondition(format!("value {v} does not lie in (1/{n})Z/Z")));
    }
    Ok(r.to_integer().rem_euclid(n as i64))
}

/// `σ_k(g∘q)`.
pub fn sigma_of(g: &[TorusValue], q: &[u32]) -> TorusValue {
    let vals: Vec<TorusValue> = q.iter().map(|&p| g[p as usize].clone()).collect();
    TorusValue::sigma(&vals).expect("cube of positive length")
}

/// The coboundary `q ↦ σ_k(g∘q)`.
pub fn coboundary(x: &Cubespace, k: usize, coeffs: Coefficients, g: &[TorusValue]) -> Result<Cocycle> {
    if g.len() != x.len() {
        return Err(Error::structural("function table does not cover the points"));
    }
    if let Some(bad) = g.iter().find(|v| !coeffs.admits(v)) {
        return Err(Error::structural(format!("value {bad} is not in the coefficient group")));
    }
    Cocycle::from_fn(x, k, coeffs, |q| sigma_of(g, q))
}

/// Generators of `Aut({0,1}^k)` as vertex permutations with their sign:
/// the reflection of coordinate 0 (sign −1) and adjacent transpositions.
pub(crate) fn automorphism_generators(k: usize) -> Vec<(Vec<usize>, i64)> {
    let full = 1usize << k;
    let mut gens = vec![((0..full).map(|v| v ^ 1).collect(), -1)];
    for j in 0..k.saturating_sub(1) {
        let perm = (0..full)
            .map(|v| {
                let a = v >> j & 1;
                let b = v >> (j + 1) & 1;
                (v & !(3 << j)) | (a << (j + 1)) | (b << j)
            })
            .collect();
        gens.push((perm, 1));
    }
    gens
}

/// Visit every adjacent pair along the last coordinate: `(q₁, q₂, q₃)`
/// as cube indices, with `q₃` `None` when the concatenation is not a cube.
pub(crate) fn for_each_concatenation<F>(x: &Cubespace, k: usize, mut visit: F)
where
    F: FnMut(usize, usize, Option<usize>),
{
    let cubes = x.cubes(k);
    let half = 1usize << (k - 1);
    for i in 0..cubes.len() {
        let q1 = cubes.get(i);
        for j in cubes.prefix_range(&q1[half..]) {
            let q2 = cubes.get(j);
            let mut q3 = q1[..half].to_vec();
            q3.extend_from_slice(&q2[half..]);
            visit(i, j, cubes.index_of(&q3));
        }
    }
}

/// Outcome of checking both cocycle axioms exhaustively.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CocycleReport {
    pub automorphism: Verdict,
    pub concatenation: Verdict,
    /// First few violations, rendered.
    pub violations: Vec<String>,
}

impl CocycleReport {
    pub fn passed(&self) -> bool {
        self.automorphism.pass && self.concatenation.pass
    }

    pub fn verdicts(&self) -> [&Verdict; 2] {
        [&self.automorphism, &self.concatenation]
    }
}

const SHOWN_VIOLATIONS: usize = 10;

fn show_cube(x: &Cubespace, q: &[u32]) -> String {
    let parts: Vec<&str> = q.iter().map(|&p| x.label(p)).collect();
    format!("({})", parts.join(","))
}

/// Check `ρ(q∘ψ) = sign(ψ)·ρ(q)` on generators and additivity over every
/// adjacent pair along the last coordinate. Together with the automorphism
/// axiom this covers gluing along any axis.
pub fn cocycle_verify(x: &Cubespace, rho: &Cocycle) -> Result<CocycleReport> {
    let k = rho.k;
    let cubes = x.require_dim(k)?;
    if cubes.len() != rho.len() {
        return Err(Error::structural("cocycle table does not match the cube set"));
    }
    let gens = automorphism_generators(k);
    let auto_bad: Vec<String> = (0..cubes.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            let q = cubes.get(i);
            gens.iter()
                .filter_map(|(perm, s)| {
                    let moved: Vec<u32> = perm.iter().map(|&w| q[w]).collect();
                    let expect = rho.values[i].scale(*s);
                    match cubes.index_of(&moved) {
                        Some(j) if rho.values[j] == expect => None,
                        Some(j) => Some(format!(
                            "rho{} = {} but sign*rho{} = {}",
                            show_cube(x, &moved),
                            rho.values[j],
                            show_cube(x, &q),
                            expect
                        )),
                        None => Some(format!("{} is not a cube", show_cube(x, &moved))),
                    }
                })
                .collect::<Vec<_>>()
        })
        .collect();

    let mut pairs = 0u64;
    let mut concat_bad = vec![];
    let mut concat_count = 0u64;
    for_each_concatenation(x, k, |i, j, c| {
        pairs += 1;
        let ok = match c {
            Some(c) => rho.values[c] == rho.values[i].add(&rho.values[j]),
            None => false,
        };
        if !ok {
            concat_count += 1;
            if concat_bad.len() < SHOWN_VIOLATIONS {
                concat_bad.push(match c {
                    Some(c) => format!(
                        "rho{} + rho{} = {} but the concatenation has {}",
                        show_cube(x, &cubes.get(i)),
                        show_cube(x, &cubes.get(j)),
                        rho.values[i].add(&rho.values[j]),
                        rho.values[c]
                    ),
                    None => format!(
                        "concatenation of {} and {} is not a cube",
                        show_cube(x, &cubes.get(i)),
                        show_cube(x, &cubes.get(j))
                    ),
                });
            }
        }
    });

    let checks = cubes.len() * gens.len();
    let automorphism = if auto_bad.is_empty() {
        Verdict::pass("automorphism", format!("{checks} generator moves"))
    } else {
        Verdict::fail("automorphism", format!("{} of {checks} generator moves violate", auto_bad.len()))
    };
    let concatenation = if concat_count == 0 {
        Verdict::pass("concatenation", format!("{pairs} adjacent pairs"))
    } else {
        Verdict::fail("concatenation", format!("{concat_count} of {pairs} adjacent pairs violate"))
    };
    let mut violations: Vec<String> = auto_bad.into_iter().take(SHOWN_VIOLATIONS).collect();
    violations.extend(concat_bad);
    Ok(CocycleReport {
        automorphism,
        concatenation,
        violations,
    })
}

/// How a coboundary equation was solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolvePath {
    Averaging,
    Linear,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoboundarySolution {
    pub g: Vec<TorusValue>,
    pub path: SolvePath,
}

/// `1/2^{k+2}`, the radius below which a cocycle on `Cu^k` is small enough
/// for the averaging path.
pub fn rigidity_radius(k: usize) -> Rational {
    Rational::new(1, 1i64 << (k + 2))
}

/// `g(x) = ` concentrated average of `ρ` over the cubes rooted at `x`,
/// kept only if `σ_k(g∘q) = ρ(q)` holds on every cube.
///
/// Returns `Err(Concentration)` when a rooted value set is not
/// concentrated and `Ok(None)` when the averaged function fails the exact
/// check.
pub fn solve_by_averaging(x: &Cubespace, rho: &Cocycle) -> Result<Option<Vec<TorusValue>>> {
    let k = rho.k;
    x.require_dim(k)?;
    let g = (0..x.len() as u32)
        .into_par_iter()
        .map(|p| {
            let range = x.rooted(k, p);
            let start = range.start;
            concentrated_average(&rho.values[range]).map_err(|e| match e {
                Error::Concentration { first, second, detail } => Error::Concentration {
                    first: start + first,
                    second: start + second,
                    detail: format!("{detail} (cubes rooted at {})", x.label(p)),
                },
                other => other,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(is_coboundary_of(x, rho, &g).then_some(g))
}

pub fn is_coboundary_of(x: &Cubespace, rho: &Cocycle, g: &[TorusValue]) -> bool {
    let cubes = x.cubes(rho.k);
    (0..cubes.len())
        .into_par_iter()
        .all(|i| sigma_of(g, &cubes.get(i)) == rho.values[i])
}

/// Coefficient matrix of `g ↦ σ_k(g∘·)`: row `q`, column `x`.
pub(crate) fn coboundary_matrix(x: &Cubespace, k: usize) -> Vec<Vec<i64>> {
    x.cubes(k)
        .iter()
        .map(|q| {
            let mut row = vec![0i64; x.len()];
            for (v, &p) in q.iter().enumerate() {
                row[p as usize] += sign(v);
            }
            row
        })
        .collect()
}

/// Solve `ρ = σ_k(g∘·)` one cyclic coordinate at a time. Torus
/// coordinates are solved in `Z/N` with `N` the common denominator of the
/// table; `None` when some coordinate has no solution there.
pub fn solve_linear(x: &Cubespace, rho: &Cocycle, limits: &Limits) -> Result<Option<Vec<TorusValue>>> {
    let k = rho.k;
    let cubes = x.require_dim(k)?;
    if cubes.len() > limits.max_cocycle_cubes {
        return Err(Error::budget(
            format!("linear system on Cu^{k}"),
            cubes.len() as u128,
            limits.max_cocycle_cubes as u128,
        ));
    }
    let m = coboundary_matrix(x, k);
    let np = x.len();
    let mut finite_cols: Vec<Vec<i64>> = vec![];
    for (j, &d) in rho.coeffs.finite.factors().iter().enumerate() {
        let b: Vec<i64> = rho.values.iter().map(|v| v.finite_part()[j]).collect();
        match solve_mod(&m, np, &b, d as i64) {
            Some(sol) => finite_cols.push(sol),
            None => return Ok(None),
        }
    }
    let mut torus_cols: Vec<Vec<Rational>> = vec![];
    for j in 0..rho.coeffs.torus_dim {
        let n = rho.values.iter().fold(1i64, |acc, v| {
            num_integer::Integer::lcm(&acc, v.torus_part()[j].denom())
        });
        let b: Vec<i64> = rho
            .values
            .iter()
            .map(|v| (v.torus_part()[j] * n).to_integer())
            .collect();
        match solve_mod(&m, np, &b, n) {
            Some(sol) => torus_cols.push(sol.into_iter().map(|s| Rational::new(s, n)).collect()),
            None => return Ok(None),
        }
    }
    let g = (0..np)
        .map(|p| {
            TorusValue::new(
                &rho.coeffs.finite,
                finite_cols.iter().map(|c| c[p]).collect(),
                torus_cols.iter().map(|c| c[p]).collect(),
            )
        })
        .collect::<Vec<_>>();
    debug_assert!(is_coboundary_of(x, rho, &g));
    Ok(Some(g))
}

/// Averaging path first, then the linear path. `None` when `ρ` is not a
/// coboundary (over `Z/N` for torus coordinates, see [`solve_linear`]).
pub fn coboundary_solve(x: &Cubespace, rho: &Cocycle, limits: &Limits) -> Result<Option<CoboundarySolution>> {
    match solve_by_averaging(x, rho) {
        Ok(Some(g)) => {
            return Ok(Some(CoboundarySolution {
                g,
                path: SolvePath::Averaging,
            }))
        }
        Ok(None) | Err(Error::Concentration { .. }) => {}
        Err(e) => return Err(e),
    }
    Ok(solve_linear(x, rho, limits)?.map(|g| CoboundarySolution {
        g,
        path: SolvePath::Linear,
    }))
}
