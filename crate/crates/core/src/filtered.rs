//! Filtered finite nilpotent groups, Host–Kra cube groups and the
//! quotient cubespaces they induce.

use rayon::prelude::*;

use crate::cubeset::{bits_for, pack, CubeSet};
use crate::cubespace::Cubespace;
use crate::error::{Error, Result};
use crate::groups::FiniteAbelianGroup;
use crate::Limits;

/// A finite group given by its multiplication table, with a filtration
/// `G = G₀ = G₁ ⊇ G₂ ⊇ … ⊇ G_{k+1} = {id}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilteredGroup {
    labels: Vec<String>,
    mul: Vec<u32>,
    inv: Vec<u32>,
    identity: u32,
    /// `terms[i]` is `G_{i+1}` as a sorted element list
    terms: Vec<Vec<u32>>,
    /// `member[i][g]` for `G_{i+1}`
    member: Vec<Vec<bool>>,
}

/// A violated commutator inclusion `[g, h] ∉ G_{i+j}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommutatorViolation {
    pub i: usize,
    pub j: usize,
    pub g: u32,
    pub h: u32,
    pub commutator: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiltrationReport {
    pub degree: usize,
    pub violations: Vec<CommutatorViolation>,
}

impl FiltrationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl FilteredGroup {
    /// `table[a * n + b] = a·b`. `filtration` lists `G₁, G₂, …, G_{k+1}`.
    ///
    /// Checks the group axioms (associativity exhaustively up to 128
    /// elements, on a fixed sample above). The filtration itself is checked
    /// by [`FilteredGroup::validate`].
    pub fn new(labels: Vec<String>, table: Vec<u32>, filtration: Vec<Vec<u32>>) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::structural("empty group"));
        }
        if n > Limits::default().max_group_order.max(1 << 16) {
            return Err(Error::budget("group order", n as u128, 1 << 16));
        }
        if table.len() != n * n {
            return Err(Error::structural(format!(
                "multiplication table has {} entries, expected {}",
                table.len(),
                n * n
            )));
        }
        if table.iter().any(|&x| x as usize >= n) {
            return Err(Error::structural("multiplication table leaves the group"));
        }
        let m = |a: usize, b: usize| table[a * n + b] as usize;
        let identity = (0..n)
            .find(|&e| (0..n).all(|x| m(e, x) == x && m(x, e) == x))
            .ok_or_else(|| Error::structural("no identity element"))?;
        let mut inv = vec![0u32; n];
        for x in 0..n {
            inv[x] = (0..n)
                .find(|&y| m(x, y) == identity && m(y, x) == identity)
                .ok_or_else(|| Error::structural(format!("element {} has no inverse", labels[x])))?
                as u32;
        }
        let triples: Box<dyn Iterator<Item = (usize, usize, usize)>> = if n <= 128 {
            Box::new((0..n).flat_map(move |a| (0..n).flat_map(move |b| (0..n).map(move |c| (a, b, c)))))
        } else {
            Box::new((0..20_000usize).map(move |s| {
                let h = s.wrapping_mul(2_654_435_761);
                (h % n, (h / n) % n, (h / (n * n)) % n)
            }))
        };
        for (a, b, c) in triples {
            if m(m(a, b), c) != m(a, m(b, c)) {
                return Err(Error::structural(format!(
                    "multiplication not associative at ({}, {}, {})",
                    labels[a], labels[b], labels[c]
                )));
            }
        }
        let mut terms = vec![];
        let mut member = vec![];
        for t in filtration {
            let mut t = t;
            if t.iter().any(|&x| x as usize >= n) {
                return Err(Error::structural("filtration term refers to a missing element"));
            }
            t.sort_unstable();
            t.dedup();
            let mut mem = vec![false; n];
            for &x in &t {
                mem[x as usize] = true;
            }
            terms.push(t);
            member.push(mem);
        }
        Ok(Self {
            labels,
            mul: table,
            inv,
            identity: identity as u32,
            terms,
            member,
        })
    }

    pub fn order(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn identity(&self) -> u32 {
        self.identity
    }

    /// Filtration degree `k`.
    pub fn degree(&self) -> usize {
        self.terms.len().saturating_sub(1)
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        self.mul[a as usize * self.labels.len() + b as usize]
    }

    pub fn inv(&self, a: u32) -> u32 {
        self.inv[a as usize]
    }

    /// `[g, h] = g⁻¹h⁻¹gh`
    pub fn commutator(&self, g: u32, h: u32) -> u32 {
        self.mul(self.mul(self.inv(g), self.inv(h)), self.mul(g, h))
    }

    pub fn table(&self) -> &[u32] {
        &self.mul
    }

    /// Elements of `G_i`.
    pub fn term(&self, i: usize) -> Vec<u32> {
        match i {
            0 => (0..self.order() as u32).collect(),
            i if i <= self.terms.len() => self.terms[i - 1].clone(),
            _ => vec![self.identity],
        }
    }

    pub fn in_term(&self, i: usize, g: u32) -> bool {
        match i {
            0 => true,
            i if i <= self.terms.len() => self.member[i - 1][g as usize],
            _ => g == self.identity,
        }
    }

    pub fn term_order(&self, i: usize) -> usize {
        match i {
            0 => self.order(),
            i if i <= self.terms.len() => self.terms[i - 1].len(),
            _ => 1,
        }
    }

    pub fn is_subgroup(&self, set: &[u32]) -> bool {
        let mut mem = vec![false; self.order()];
        for &x in set {
            mem[x as usize] = true;
        }
        mem[self.identity as usize]
            && set.iter().all(|&a| mem[self.inv(a) as usize])
            && set.iter().all(|&a| set.iter().all(|&b| mem[self.mul(a, b) as usize]))
    }

    /// Check the filtration: subgroups, descending, `G₁ = G`, last term
    /// trivial, then list every commutator violation.
    pub fn validate(&self) -> Result<FiltrationReport> {
        if self.terms.is_empty() {
            return Err(Error::structural("filtration has no terms"));
        }
        for (i, t) in self.terms.iter().enumerate() {
            if !self.is_subgroup(t) {
                return Err(Error::structural(format!("G_{} is not a subgroup", i + 1)));
            }
        }
        if self.terms[0].len() != self.order() {
            return Err(Error::structural("G_1 must be the whole group"));
        }
        for i in 1..self.terms.len() {
            if !self.terms[i].iter().all(|&g| self.member[i - 1][g as usize]) {
                return Err(Error::structural(format!(
                    "filtration not descending: G_{} is not inside G_{}",
                    i + 1,
                    i
                )));
            }
        }
        if self.terms.last().expect("nonempty") != &vec![self.identity] {
            return Err(Error::structural("last filtration term must be trivial"));
        }
        let k = self.degree();
        let mut violations = vec![];
        for i in 1..=k + 1 {
            for j in i..=k + 1 {
                for &g in &self.term(i) {
                    for &h in &self.term(j) {
                        let c = self.commutator(g, h);
                        if !self.in_term(i + j, c) {
                            violations.push(CommutatorViolation {
                                i,
                                j,
                                g,
                                h,
                                commutator: c,
                            });
                        }
                    }
                }
            }
        }
        Ok(FiltrationReport {
            degree: k,
            violations,
        })
    }

    /// `Z/N` (or any finite abelian group) with `G₁ = … = G_k = A` and
    /// `G_{k+1} = 0`.
    pub fn abelian(a: &FiniteAbelianGroup, k: usize) -> Result<Self> {
        let n = a.order() as u32;
        let all: Vec<u32> = (0..n).collect();
        let mut filtration = vec![all; k.max(1)];
        if k == 0 {
            filtration.clear();
        }
        filtration.push(vec![0]);
        Self::abelian_with(a, filtration)
    }

    /// Abelian group with a filtration given by element index lists.
    pub fn abelian_with(a: &FiniteAbelianGroup, filtration: Vec<Vec<u32>>) -> Result<Self> {
        let n = a.order() as usize;
        if n > Limits::default().max_group_order {
            return Err(Error::budget("group order", n as u128, Limits::default().max_group_order as u128));
        }
        let elems: Vec<_> = a.elements().collect();
        let labels = elems.iter().map(|x| crate::cubespace::element_label(x)).collect();
        let mut table = Vec::with_capacity(n * n);
        for x in &elems {
            for y in &elems {
                table.push(a.index_of(&a.add(x, y)) as u32);
            }
        }
        Self::new(labels, table, filtration)
    }

    /// `Z/2N` with `G₂ = {0, N}`: a degree-2 filtration on a cyclic group.
    pub fn cyclic_deg2(n: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::structural("cyclic-deg2 needs N >= 1"));
        }
        let a = FiniteAbelianGroup::cyclic(2 * n);
        let all: Vec<u32> = (0..2 * n as u32).collect();
        Self::abelian_with(&a, vec![all, vec![0, n as u32], vec![0]])
    }

    /// Upper unitriangular 3×3 matrices mod `N`, element `(a,b,c)` at
    /// index `a + N b + N² c`, with its lower central series.
    pub fn heisenberg(n: u64) -> Result<Self> {
        if n < 1 {
            return Err(Error::structural("Heisenberg group needs N >= 1"));
        }
        let n = n as usize;
        let size = n * n * n;
        if size > Limits::default().max_group_order {
            return Err(Error::budget("group order", size as u128, Limits::default().max_group_order as u128));
        }
        let idx = |a: usize, b: usize, c: usize| (a % n + n * (b % n) + n * n * (c % n)) as u32;
        let split = |g: usize| (g % n, (g / n) % n, g / (n * n));
        let mut labels = Vec::with_capacity(size);
        let mut table = Vec::with_capacity(size * size);
        for g in 0..size {
            let (a, b, c) = split(g);
            labels.push(format!("({a},{b},{c})"));
        }
        for g in 0..size {
            let (a, b, c) = split(g);
            for h in 0..size {
                let (a2, b2, c2) = split(h);
                table.push(idx(a + a2, b + b2, c + c2 + a * b2));
            }
        }
        let center: Vec<u32> = (0..n).map(|c| idx(0, 0, c)).collect();
        Self::new(labels, table, vec![(0..size as u32).collect(), center, vec![0]])
    }
}

/// The upper faces `F(v_i)` of `{0,1}ⁿ` in colex order, `v_i = i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FaceDecomposition {
    pub n: usize,
    pub faces: Vec<usize>,
    pub codims: Vec<usize>,
}

impl FaceDecomposition {
    pub fn new(n: usize) -> Self {
        let faces: Vec<usize> = (0..1 << n).collect();
        let codims = faces.iter().map(|v: &usize| v.count_ones() as usize).collect();
        Self { n, faces, codims }
    }

    /// Whether vertex `u` lies in `F(v)`, i.e. `supp(u) ⊇ supp(v)`.
    pub fn in_face(u: usize, v: usize) -> bool {
        u & v == v
    }
}

/// Coefficients `g₀, …, g_{2ⁿ−1}` with `q = g₀^{F₀} ⋯ g_{2ⁿ−1}^{F_{2ⁿ−1}}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HkFactorization {
    pub faces: FaceDecomposition,
    pub coefficients: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HkOutcome {
    Accept(HkFactorization),
    /// The first face index whose forced coefficient leaves `G_{codim}`.
    Reject { index: usize, coefficient: u32 },
}

impl HkOutcome {
    pub fn is_accept(&self) -> bool {
        matches!(self, HkOutcome::Accept(_))
    }
}

/// Product over the faces strictly below `v`, ascending.
fn below_product(g: &FilteredGroup, coeffs: &[u32], v: usize) -> u32 {
    let mut acc = g.identity();
    for j in 0..v {
        if j & v == j {
            acc = g.mul(acc, coeffs[j]);
        }
    }
    acc
}

/// Peel off coefficients face by face in colex order.
pub fn hk_factorize(g: &FilteredGroup, q: &[u32]) -> Result<HkOutcome> {
    let n = crate::groups::cube_dim(q.len())?;
    if let Some(&x) = q.iter().find(|&&x| x as usize >= g.order()) {
        return Err(Error::structural(format!("value {x} is not a group element")));
    }
    let mut coeffs = Vec::with_capacity(q.len());
    for (i, &qi) in q.iter().enumerate() {
        let prod = below_product(g, &coeffs, i);
        let gi = g.mul(g.inv(prod), qi);
        if !g.in_term(i.count_ones() as usize, gi) {
            return Ok(HkOutcome::Reject {
                index: i,
                coefficient: gi,
            });
        }
        coeffs.push(gi);
    }
    Ok(HkOutcome::Accept(HkFactorization {
        faces: FaceDecomposition::new(n),
        coefficients: coeffs,
    }))
}

/// `q(v) = Π_{supp(v_j) ⊆ supp(v)} g_j`, product ascending in `j`.
pub fn hk_recompose(g: &FilteredGroup, coefficients: &[u32]) -> Result<Vec<u32>> {
    crate::groups::cube_dim(coefficients.len())?;
    Ok((0..coefficients.len())
        .map(|v| g.mul(below_product(g, coefficients, v), coefficients[v]))
        .collect())
}

/// `Π_i |G_{codim F_i}|`.
pub fn hk_count(g: &FilteredGroup, n: usize) -> u128 {
    (0..1usize << n)
        .map(|v| g.term_order(v.count_ones() as usize) as u128)
        .fold(1u128, |a, b| a.saturating_mul(b))
}

/// Visit every cube of `Cuⁿ(G_•)` with `q(0) = root`.
fn hk_visit_rooted<F: FnMut(&[u32])>(g: &FilteredGroup, n: usize, root: u32, mut visit: F) {
    let terms: Vec<Vec<u32>> = (0..=n).map(|i| g.term(i)).collect();
    let size = 1usize << n;
    let mut coeffs = vec![g.identity(); size];
    let mut q = vec![g.identity(); size];
    coeffs[0] = root;
    q[0] = root;
    fn rec<F: FnMut(&[u32])>(
        g: &FilteredGroup,
        i: usize,
        terms: &[Vec<u32>],
        coeffs: &mut Vec<u32>,
        q: &mut Vec<u32>,
        visit: &mut F,
    ) {
        if i == q.len() {
            visit(q);
            return;
        }
        let prod = below_product(g, coeffs, i);
        for &gi in &terms[i.count_ones() as usize] {
            coeffs[i] = gi;
            q[i] = g.mul(prod, gi);
            rec(g, i + 1, terms, coeffs, q, visit);
        }
    }
    rec(g, 1, &terms, &mut coeffs, &mut q, &mut visit);
}

/// Visit all of `Cuⁿ(G_•)`, sequentially.
pub fn hk_for_each<F: FnMut(&[u32])>(g: &FilteredGroup, n: usize, mut visit: F) {
    for root in 0..g.order() as u32 {
        hk_visit_rooted(g, n, root, &mut visit);
    }
}

fn check_budget(g: &FilteredGroup, n: usize, limits: &Limits) -> Result<()> {
    let count = hk_count(g, n);
    if count > limits.max_cubes {
        return Err(Error::budget(format!("{n}-dimensional Host-Kra cubes"), count, limits.max_cubes));
    }
    Ok(())
}

/// `Cuⁿ(G_•)` as a cube set over the group's elements.
pub fn hk_enumerate(g: &FilteredGroup, n: usize, limits: &Limits) -> Result<CubeSet> {
    check_budget(g, n, limits)?;
    project_cubes(g, n, &(0..g.order() as u32).collect::<Vec<_>>(), g.order())
}

fn project_cubes(g: &FilteredGroup, n: usize, point_of: &[u32], points: usize) -> Result<CubeSet> {
    if !CubeSet::packing_fits(points, n) {
        return Err(Error::budget("cube packing width", (bits_for(points) as u128) << n, 128));
    }
    let bits = bits_for(points);
    let keys: Vec<u128> = (0..g.order() as u32)
        .into_par_iter()
        .flat_map_iter(|root| {
            let mut local = vec![];
            let mut buf = vec![0u32; 1 << n];
            hk_visit_rooted(g, n, root, |q| {
                for (b, &x) in buf.iter_mut().zip(q) {
                    *b = point_of[x as usize];
                }
                local.push(pack(bits, &buf));
            });
            local
        })
        .collect();
    CubeSet::from_keys(points, n, keys)
}

/// The cubespace `G/Γ` of left cosets `gΓ`, with cubes the projected
/// Host–Kra cubes. Each coset is represented by its least element.
pub fn quotient_nilspace(g: &FilteredGroup, gamma: &[u32], n_max: usize, limits: &Limits) -> Result<Cubespace> {
    if gamma.iter().any(|&x| x as usize >= g.order()) || !g.is_subgroup(gamma) {
        return Err(Error::structural("Γ is not a subgroup"));
    }
    for n in 0..=n_max {
        check_budget(g, n, limits)?;
    }
    let rep: Vec<u32> = (0..g.order() as u32)
        .map(|x| gamma.iter().map(|&y| g.mul(x, y)).min().expect("Γ contains the identity"))
        .collect();
    let mut reps = rep.clone();
    reps.sort_unstable();
    reps.dedup();
    let point_of: Vec<u32> = rep
        .iter()
        .map(|r| reps.binary_search(r).expect("representative") as u32)
        .collect();
    let labels: Vec<String> = reps.iter().map(|&r| g.labels()[r as usize].clone()).collect();
    let cubes = (0..=n_max)
        .map(|n| project_cubes(g, n, &point_of, reps.len()))
        .collect::<Result<Vec<_>>>()?;
    Cubespace::new(labels, cubes, Some(g.degree()))
}
