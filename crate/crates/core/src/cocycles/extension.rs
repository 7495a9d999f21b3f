//! The extension `M(ρ)`, abstract abelian extensions and the cocycle of a
//! cross section.

use std::sync::Arc;

use rayon::prelude::*;

use super::{cocycle_verify, Coefficients, Cocycle};
use crate::cube::{faces, sign};
use crate::cubeset::{pack, CubeSet};
use crate::cubespace::{element_label, for_each_face_solution, Cubespace};
use crate::error::{Error, Result};
use crate::groups::{Element, FiniteAbelianGroup, TorusValue};
use crate::report::Verdict;
use crate::structure::{BundleDecomposition, Morphism};
use crate::Limits;

/// `M(ρ)` over `X` for a cocycle `ρ` on `Cu^k(X)` with finite values.
///
/// The point `(x, z)` has index `x·|A| + index(z)`. A map `f` is a cube
/// when `π∘f` is a cube of `X` and `ρ(π∘f|F) = −σ_k(z|F)` on every
/// `k`-face `F`; below dimension `k` every lift of a base cube is a cube.
#[derive(Debug, Clone)]
pub struct Extension {
    base: Arc<Cubespace>,
    rho: Cocycle,
    group: FiniteAbelianGroup,
    /// `rho` as group elements
    rho_el: Vec<Element>,
    elements: Vec<Element>,
    /// vertex lists of the `k`-faces of `{0,1}ⁿ`, per `n`
    face_lists: Vec<Vec<Vec<usize>>>,
}

impl Extension {
    /// Checks both cocycle axioms first.
    pub fn new(base: Arc<Cubespace>, rho: &Cocycle) -> Result<Self> {
        let coeffs = rho.coefficients();
        if !coeffs.is_finite() {
            return Err(Error::Config(
                "extensions need finite coefficients; read Q/Z values in Z/N first".into(),
            ));
        }
        let rep = cocycle_verify(&base, rho)?;
        if !rep.passed() {
            return Err(Error::Precondition(format!(
                "table is not a cocycle: {}",
                rep.violations.first().cloned().unwrap_or_default()
            )));
        }
        let group = coeffs.finite.clone();
        let rho_el = rho.values().iter().map(|v| v.finite_part().to_vec()).collect();
        let elements = group.elements().collect();
        let k = rho.k();
        let face_lists = (0..=base.n_max())
            .map(|n| faces(n, k).iter().map(|f| f.vertices()).collect())
            .collect();
        Ok(Self {
            base,
            rho: rho.clone(),
            group,
            rho_el,
            elements,
            face_lists,
        })
    }

    pub fn base(&self) -> &Arc<Cubespace> {
        &self.base
    }

    pub fn cocycle(&self) -> &Cocycle {
        &self.rho
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn k(&self) -> usize {
        self.rho.k()
    }

    /// Step of `M(ρ)` when `X` has step `s`.
    pub fn step_over(&self, base_step: usize) -> usize {
        base_step.max(self.k() - 1)
    }

    pub fn len(&self) -> usize {
        self.base.len() * self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn point(&self, x: u32, a: usize) -> u32 {
        (x as usize * self.elements.len() + a) as u32
    }

    pub fn split_point(&self, p: u32) -> (u32, usize) {
        let m = self.elements.len();
        ((p as usize / m) as u32, p as usize % m)
    }

    pub fn fibre_element(&self, p: u32) -> &Element {
        &self.elements[self.split_point(p).1]
    }

    pub fn projection(&self) -> Vec<u32> {
        (0..self.len() as u32).map(|p| self.split_point(p).0).collect()
    }

    pub fn labels(&self) -> Vec<String> {
        (0..self.len() as u32)
            .map(|p| {
                let (x, a) = self.split_point(p);
                format!("{}|{}", self.base.label(x), element_label(&self.elements[a]))
            })
            .collect()
    }

    /// Cube test without materializing the cube sets.
    pub fn is_cube(&self, f: &[u32]) -> bool {
        if f.is_empty() || !f.len().is_power_of_two() || f.iter().any(|&p| p as usize >= self.len()) {
            return false;
        }
        let n = f.len().trailing_zeros() as usize;
        if n > self.base.n_max() {
            return false;
        }
        let q: Vec<u32> = f.iter().map(|&p| self.split_point(p).0).collect();
        if !self.base.cubes(n).contains(&q) {
            return false;
        }
        let g = &self.group;
        let kcubes = self.base.cubes(self.k());
        self.face_lists[n].iter().all(|face| {
            let sub: Vec<u32> = face.iter().map(|&v| q[v]).collect();
            let Some(i) = kcubes.index_of(&sub) else {
                return false;
            };
            let mut acc = self.rho_el[i].clone();
            for (w, &v) in face.iter().enumerate() {
                let z = self.fibre_element(f[v]);
                acc = if w.count_ones() % 2 == 0 { g.add(&acc, z) } else { g.sub(&acc, z) };
            }
            acc.iter().all(|&c| c == 0)
        })
    }

    /// `Σ_n |Cuⁿ(M)|`: every base cube has `|A|^{Σ_{j<k} C(n,j)}` lifts.
    pub fn cube_count(&self, n: usize) -> u128 {
        let free: u32 = (0..self.k().min(n + 1)).map(|j| binomial(n, j)).sum();
        (self.base.cubes(n).len() as u128).saturating_mul((self.elements.len() as u128).saturating_pow(free))
    }

    /// Enumerate every cube set; the budget bounds the total count.
    pub fn materialize(&self, limits: &Limits) -> Result<Cubespace> {
        let total: u128 = (0..=self.base.n_max()).map(|n| self.cube_count(n)).fold(0, u128::saturating_add);
        if total > limits.max_cubes {
            return Err(Error::budget("cubes of the extension", total, limits.max_cubes));
        }
        let points = self.len();
        let bits = crate::cubeset::bits_for(points);
        let g = &self.group;
        let k = self.k();
        let kcubes = self.base.cubes(k);
        let mut sets = vec![];
        for n in 0..=self.base.n_max() {
            if !CubeSet::packing_fits(points, n) {
                return Err(Error::budget(
                    format!("packing {n}-cubes over {points} points"),
                    (bits as u128) << n,
                    128,
                ));
            }
            let base_cubes = self.base.cubes(n);
            let keys: Vec<u128> = (0..base_cubes.len())
                .into_par_iter()
                .flat_map_iter(|i| {
                    let q = base_cubes.get(i);
                    let mut out = vec![];
                    let rhs = |face: &crate::cube::Face| {
                        let sub: Vec<u32> = face.vertices().iter().map(|&v| q[v]).collect();
                        let j = kcubes.index_of(&sub).expect("faces of cubes are cubes");
                        g.neg(&self.rho_el[j])
                    };
                    let mut f = vec![0u32; q.len()];
                    for_each_face_solution(n, k, g, rhs, |z| {
                        for (v, zv) in z.iter().enumerate() {
                            f[v] = self.point(q[v], g.index_of(zv));
                        }
                        out.push(pack(bits, &f));
                    });
                    out
                })
                .collect();
            sets.push(CubeSet::from_keys(points, n, keys)?);
        }
        let step = self.base.declared_step().map(|s| self.step_over(s));
        Cubespace::new(self.labels(), sets, step)
    }
}

fn binomial(n: usize, j: usize) -> u32 {
    let mut r: u64 = 1;
    for i in 0..j {
        r = r * (n - i) as u64 / (i + 1) as u64;
    }
    r as u32
}

/// `Y → X` with a free action of `A` whose orbits are the fibres.
///
/// `k` is the dimension of the cubes its cocycles live on, one more than
/// the degree of the extension.
#[derive(Debug, Clone)]
pub struct AbelianExtension {
    pub total: Arc<Cubespace>,
    pub base: Arc<Cubespace>,
    pub projection: Vec<u32>,
    pub group: FiniteAbelianGroup,
    pub k: usize,
    /// `act[y·|A| + a] = y + a`
    act: Vec<u32>,
    /// `y = min(fibre(y)) + coord[y]`
    coord: Vec<usize>,
}

impl AbelianExtension {
    /// Validates the projection as a surjective morphism and the action as
    /// free and transitive on each fibre.
    pub fn new(
        total: Arc<Cubespace>,
        base: Arc<Cubespace>,
        projection: Vec<u32>,
        group: FiniteAbelianGroup,
        act: Vec<u32>,
        k: usize,
    ) -> Result<Self> {
        let m = group.order() as usize;
        if act.len() != total.len() * m {
            return Err(Error::structural("action table has the wrong size"));
        }
        let pi = Morphism::verified(total.clone(), base.clone(), projection.clone())
            .map_err(|e| Error::NotExtension(e.to_string()))?;
        let mut fibre_size = vec![0usize; base.len()];
        for &x in &pi.map {
            fibre_size[x as usize] += 1;
        }
        if fibre_size.iter().any(|&s| s != m) {
            return Err(Error::NotExtension(format!("fibres do not all have {m} points")));
        }
        let elements: Vec<Element> = group.elements().collect();
        for y in 0..total.len() {
            if act[y * m] as usize != y {
                return Err(Error::NotExtension("zero does not act trivially".into()));
            }
            let mut orbit: Vec<u32> = act[y * m..(y + 1) * m].to_vec();
            if orbit.iter().any(|&z| projection[z as usize] != projection[y]) {
                return Err(Error::NotExtension("action leaves a fibre".into()));
            }
            orbit.sort_unstable();
            orbit.dedup();
            if orbit.len() != m {
                return Err(Error::NotExtension("action is not free".into()));
            }
            for a in 0..m {
                for b in 0..m {
                    let ab = group.index_of(&group.add(&elements[a], &elements[b]));
                    let lhs = act[act[y * m + a] as usize * m + b];
                    if lhs != act[y * m + ab] {
                        return Err(Error::NotExtension("action is not a group action".into()));
                    }
                }
            }
        }
        let mut least = vec![u32::MAX; base.len()];
        for (y, &x) in projection.iter().enumerate() {
            least[x as usize] = least[x as usize].min(y as u32);
        }
        let mut coord = vec![0; total.len()];
        for &e in &least {
            for a in 0..m {
                coord[act[e as usize * m + a] as usize] = a;
            }
        }
        Ok(Self {
            total,
            base,
            projection,
            group,
            k,
            act,
            coord,
        })
    }

    /// `M(ρ)` materialized, with `A` acting on the second coordinate.
    pub fn from_extension(ext: &Extension, limits: &Limits) -> Result<Self> {
        let total = Arc::new(ext.materialize(limits)?);
        let g = ext.group();
        let elements: Vec<Element> = g.elements().collect();
        let m = elements.len();
        let mut act = Vec::with_capacity(ext.len() * m);
        for p in 0..ext.len() as u32 {
            let (x, a) = ext.split_point(p);
            for b in &elements {
                act.push(ext.point(x, g.index_of(&g.add(&elements[a], b))));
            }
        }
        Self::new(total, ext.base().clone(), ext.projection(), g.clone(), act, ext.k())
    }

    /// The split extension `X × D_{k−1}(A)`, i.e. `M(0)`.
    pub fn split(base: Arc<Cubespace>, a: FiniteAbelianGroup, k: usize, limits: &Limits) -> Result<Self> {
        let zero = Cocycle::zero(&base, k, Coefficients::finite(a))?;
        Self::from_extension(&Extension::new(base, &zero)?, limits)
    }

    /// `X_s → X_{s−1}` with the top structure group of a tower.
    pub fn from_tower(x: Arc<Cubespace>, tower: &BundleDecomposition) -> Result<Self> {
        let s = tower.step;
        if s == 0 {
            return Err(Error::Config("a 0-step space is not an extension".into()));
        }
        let sg = &tower.structure[s - 1];
        let m = sg.group.order() as usize;
        let act = (0..x.len() as u32)
            .flat_map(|y| (0..m).map(move |a| (y, a)))
            .map(|(y, a)| sg.act(y, a))
            .collect();
        let base = Arc::new(tower.factors[s - 1].clone());
        Self::new(x, base, tower.projections[s - 1].clone(), sg.group.clone(), act, s + 1)
    }

    pub fn act(&self, y: u32, a: usize) -> u32 {
        self.act[y as usize * self.group.order() as usize + a]
    }

    /// Index of `a` with `y₂ + a = y₁`, if they share a fibre.
    pub fn difference(&self, y1: u32, y2: u32) -> Option<usize> {
        if self.projection[y1 as usize] != self.projection[y2 as usize] {
            return None;
        }
        let g = &self.group;
        let d = g.sub(&g.element(self.coord[y1 as usize]), &g.element(self.coord[y2 as usize]));
        Some(g.index_of(&d))
    }

    pub fn check_section(&self, s: &[u32]) -> Result<()> {
        if s.len() != self.base.len() {
            return Err(Error::structural("section has the wrong length"));
        }
        for (x, &y) in s.iter().enumerate() {
            if y as usize >= self.total.len() || self.projection[y as usize] as usize != x {
                return Err(Error::Precondition(format!(
                    "section value at {} is not over it",
                    self.base.label(x as u32)
                )));
            }
        }
        Ok(())
    }

    /// The section picking the least point of each fibre.
    pub fn least_section(&self) -> Vec<u32> {
        let mut s = vec![u32::MAX; self.base.len()];
        for (y, &x) in self.projection.iter().enumerate() {
            s[x as usize] = s[x as usize].min(y as u32);
        }
        s
    }
}

/// `ρ_s(q) = σ_k(s∘q − q′)` for a lift `q′` of `q`, checked to be the same
/// for every lift.
pub fn cocycle_from_section(ext: &AbelianExtension, s: &[u32]) -> Result<Cocycle> {
    ext.check_section(s)?;
    let k = ext.k;
    let base_cubes = ext.base.require_dim(k)?;
    let lifts = ext.total.require_dim(k)?;
    let g = &ext.group;
    let computed: Vec<(usize, Element)> = (0..lifts.len())
        .into_par_iter()
        .map(|i| {
            let qp = lifts.get(i);
            let q: Vec<u32> = qp.iter().map(|&y| ext.projection[y as usize]).collect();
            let j = base_cubes
                .index_of(&q)
                .ok_or_else(|| Error::NotExtension("projection does not preserve cubes".into()))?;
            let mut acc = g.zero();
            for (v, (&x, &y)) in q.iter().zip(&qp).enumerate() {
                let d = g.element(ext.difference(s[x as usize], y).expect("same fibre"));
                acc = g.add(&acc, &g.scale(&d, sign(v)));
            }
            Ok((j, acc))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut values: Vec<Option<Element>> = vec![None; base_cubes.len()];
    for (j, a) in computed {
        match &values[j] {
            None => values[j] = Some(a),
            Some(b) if *b == a => {}
            Some(b) => {
                return Err(Error::NotExtension(format!(
                    "lifts of base cube {j} give different values {} and {}",
                    element_label(b),
                    element_label(&a)
                )))
            }
        }
    }
    let values = values
        .into_iter()
        .enumerate()
        .map(|(j, v)| {
            v.map(|a| TorusValue::new(g, a, vec![]))
                .ok_or_else(|| Error::NotExtension(format!("base cube {j} has no lift")))
        })
        .collect::<Result<Vec<_>>>()?;
    Cocycle::new(&ext.base, k, Coefficients::finite(g.clone()), values)
}

/// `θ(y) = (π(y), y − s(π(y)))` into `M(ρ_s)` with its checks.
#[derive(Debug, Clone)]
pub struct ThetaReport {
    pub rho: Cocycle,
    pub extension: Extension,
    pub theta: Vec<u32>,
    pub bijective: Verdict,
    /// `θ` sends every cube of `Y` to a cube of `M(ρ_s)`
    pub forward: Verdict,
    /// every cube of `M(ρ_s)` comes from a cube of `Y`
    pub backward: Verdict,
}

impl ThetaReport {
    pub fn verdicts(&self) -> [&Verdict; 3] {
        [&self.bijective, &self.forward, &self.backward]
    }
}

/// Build `θ` and check it is a bijection that is a morphism both ways.
/// A failed check is returned as `NotIsomorphic`.
pub fn extension_theta(ext: &AbelianExtension, s: &[u32]) -> Result<ThetaReport> {
    let rho = cocycle_from_section(ext, s)?;
    let m = Extension::new(ext.base.clone(), &rho)?;
    let theta: Vec<u32> = (0..ext.total.len() as u32)
        .map(|y| {
            let x = ext.projection[y as usize];
            m.point(x, ext.difference(y, s[x as usize]).expect("same fibre"))
        })
        .collect();
    let mut seen = vec![false; m.len()];
    for &p in &theta {
        seen[p as usize] = true;
    }
    let bijective = if theta.len() == m.len() && seen.iter().all(|&b| b) {
        Verdict::pass("bijective", format!("{} points", theta.len()))
    } else {
        return Err(Error::NotIsomorphic("theta is not a bijection".into()));
    };
    let top = ext.total.n_max().min(ext.base.n_max());
    let mut forward_checked = 0usize;
    let mut backward_checked = 0u128;
    for n in 0..=top {
        let cubes = ext.total.cubes(n);
        let bad = (0..cubes.len()).into_par_iter().find_first(|&i| {
            let f: Vec<u32> = cubes.get(i).iter().map(|&y| theta[y as usize]).collect();
            !m.is_cube(&f)
        });
        if let Some(i) = bad {
            return Err(Error::NotIsomorphic(format!("the {n}-cube number {i} is not sent to a cube")));
        }
        forward_checked += cubes.len();
        // θ is injective on cubes, so equal counts make it onto
        let target = m.cube_count(n);
        if target != cubes.len() as u128 {
            return Err(Error::NotIsomorphic(format!(
                "{} {n}-cubes upstairs but {target} in M(rho)",
                cubes.len()
            )));
        }
        backward_checked += target;
    }
    Ok(ThetaReport {
        rho,
        extension: m,
        theta,
        bijective,
        forward: Verdict::pass("forward", format!("{forward_checked} cubes map to cubes")),
        backward: Verdict::pass("backward", format!("{backward_checked} cubes of M(rho) are hit")),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycles::coboundary;
    use crate::cubespace::{cs_check_axioms, make_dk, one_point};
    use crate::structure::bundle_decompose;

    fn z(n: u64) -> FiniteAbelianGroup {
        FiniteAbelianGroup::cyclic(n)
    }

    #[test]
    fn zero_over_point_is_dk() {
        for k in 1..=3 {
            let p = Arc::new(one_point(3));
            let rho = Cocycle::zero(&p, k, Coefficients::finite(z(3))).unwrap();
            let m = Extension::new(p, &rho).unwrap().materialize(&Limits::default()).unwrap();
            let d = make_dk(&z(3), k - 1, 3).unwrap();
            for n in 0..=3 {
                assert_eq!(m.cubes(n).keys_u128(), d.cubes(n).keys_u128(), "k={k} n={n}");
            }
        }
    }

    #[test]
    fn implicit_test_matches_materialized() {
        let x = Arc::new(make_dk(&z(2), 1, 3).unwrap());
        let a = z(2);
        let rho = Cocycle::from_fn(&x, 2, Coefficients::finite(a.clone()), |q| {
            let s: i64 = q.iter().enumerate().map(|(v, &p)| sign(v) * p as i64).sum();
            TorusValue::new(&a, vec![s / 2], vec![])
        })
        .unwrap();
        let ext = Extension::new(x, &rho).unwrap();
        let m = ext.materialize(&Limits::default()).unwrap();
        assert!(cs_check_axioms(&m, 1).unwrap().passed());
        // the carry extension of Z/2 by Z/2 is Z/4
        let d = make_dk(&z(4), 1, 3).unwrap();
        for n in 0..=3 {
            assert_eq!(m.cubes(n).len(), d.cubes(n).len());
            for q in m.cubes(n).iter() {
                assert!(ext.is_cube(&q));
            }
            assert_eq!(m.cubes(n).len() as u128, ext.cube_count(n));
        }
    }

    #[test]
    fn tautological_section_round_trip() {
        let x = Arc::new(make_dk(&z(3), 1, 3).unwrap());
        let g: Vec<TorusValue> = (0..3).map(|i| TorusValue::new(&z(3), vec![i * i], vec![])).collect();
        let rho = coboundary(&x, 2, Coefficients::finite(z(3)), &g).unwrap();
        let ext = Extension::new(x.clone(), &rho).unwrap();
        let ae = AbelianExtension::from_extension(&ext, &Limits::default()).unwrap();
        let s: Vec<u32> = (0..3).map(|p| ext.point(p, 0)).collect();
        assert_eq!(cocycle_from_section(&ae, &s).unwrap(), rho);
        let th = extension_theta(&ae, &s).unwrap();
        assert_eq!(th.theta, (0..ext.len() as u32).collect::<Vec<_>>());
    }

    #[test]
    fn split_zero_section_gives_zero() {
        let x = Arc::new(make_dk(&z(2), 1, 3).unwrap());
        let ae = AbelianExtension::split(x.clone(), z(3), 2, &Limits::default()).unwrap();
        let rho = cocycle_from_section(&ae, &ae.least_section()).unwrap();
        assert!(rho.values().iter().all(TorusValue::is_zero));
    }

    #[test]
    fn tower_top_is_extension() {
        let x = Arc::new(make_dk(&z(4), 1, 3).unwrap());
        let tower = bundle_decompose(&x).unwrap();
        let ae = AbelianExtension::from_tower(x, &tower).unwrap();
        let s = ae.least_section();
        let th = extension_theta(&ae, &s).unwrap();
        assert!(th.verdicts().iter().all(|v| v.pass));
    }
}
