//! Canonical equivalences `~_k`, factors, structure groups, bundle
//! decompositions, and the morphism, good-pair and inverse-system checks.

use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;

use crate::cubeset::{bits_for, pack, CubeSet};
use crate::cubespace::{complete_corner, hom_exists, hom_set, make_dk, Cubespace, SubCubespace};
use crate::error::{Error, Result};
use crate::groups::{decompose_cayley, grp_rank, CayleyDecomposition, FiniteAbelianGroup};
use crate::report::Verdict;

/// The classes of `~_k`, ordered by least element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalPartition {
    pub k: usize,
    pub blocks: Vec<Vec<u32>>,
    pub block_of: Vec<u32>,
}

impl CanonicalPartition {
    fn from_labels(k: usize, label: &[u32]) -> Self {
        // relabel blocks in order of least element
        let mut remap: HashMap<u32, u32> = HashMap::new();
        let mut blocks: Vec<Vec<u32>> = vec![];
        let mut block_of = Vec::with_capacity(label.len());
        for (x, l) in label.iter().enumerate() {
            let b = *remap.entry(*l).or_insert_with(|| {
                blocks.push(vec![]);
                blocks.len() as u32 - 1
            });
            blocks[b as usize].push(x as u32);
            block_of.push(b);
        }
        Self { k, blocks, block_of }
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Every block a singleton.
    pub fn is_discrete(&self) -> bool {
        self.blocks.len() == self.block_of.len()
    }

    pub fn block(&self, x: u32) -> &[u32] {
        &self.blocks[self.block_of[x as usize] as usize]
    }
}

fn show(x: &Cubespace, q: &[u32]) -> String {
    let parts: Vec<&str> = q.iter().map(|&p| x.label(p)).collect();
    format!("({})", parts.join(","))
}

/// `x ~_k y` iff `(x, y, …, y) ∈ Cu^{k+1}(X)`.
pub fn simk(x: &Cubespace, k: usize) -> Result<CanonicalPartition> {
    x.require_dim(k + 1)?;
    let m = x.len();
    let words = m.div_ceil(64);
    let rows: Vec<Vec<u64>> = (0..m as u32)
        .into_par_iter()
        .map(|a| {
            let mut row = vec![0u64; words];
            let mut q = vec![0u32; 1 << (k + 1)];
            q[0] = a;
            for b in 0..m as u32 {
                q[1..].fill(b);
                if x.is_cube(&q) {
                    row[b as usize / 64] |= 1 << (b % 64);
                }
            }
            row
        })
        .collect();
    let related = |a: usize, b: usize| rows[a][b / 64] >> (b % 64) & 1 == 1;
    for a in 0..m {
        if !related(a, a) {
            return Err(Error::NotNilspace(format!(
                "~_{k} is not reflexive at {}",
                x.label(a as u32)
            )));
        }
        for b in 0..m {
            if related(a, b) && rows[a] != rows[b] {
                let why = if !related(b, a) { "symmetric" } else { "transitive" };
                return Err(Error::NotNilspace(format!(
                    "~_{k} is not {why}: {} ~ {} but their classes differ",
                    x.label(a as u32),
                    x.label(b as u32)
                )));
            }
        }
    }
    // label each point by the least member of its class
    let label: Vec<u32> = (0..m)
        .map(|a| (0..m).find(|&b| related(a, b)).expect("reflexive") as u32)
        .collect();
    Ok(CanonicalPartition::from_labels(k, &label))
}

/// Image of a cube set under a point map.
fn image_set(set: &CubeSet, map: &[u32], points: usize) -> Result<CubeSet> {
    let n = set.dim();
    let bits = bits_for(points);
    if !CubeSet::packing_fits(points, n) {
        return Err(Error::budget("cube packing width", (bits as u128) << n, 128));
    }
    let keys: Vec<u128> = (0..set.len())
        .into_par_iter()
        .map_init(
            || vec![0u32; 1 << n],
            |q, i| {
                set.unpack_into(set.key(i), q);
                for x in q.iter_mut() {
                    *x = map[*x as usize];
                }
                pack(bits, q)
            },
        )
        .collect();
    CubeSet::from_keys(points, n, keys)
}

/// Quotient of `X` by a partition; cubes are images of cubes, each block
/// is labelled by its least point.
pub fn quotient_by(x: &Cubespace, part: &CanonicalPartition, declared_step: Option<usize>) -> Result<Cubespace> {
    let labels: Vec<String> = part.blocks.iter().map(|b| x.label(b[0]).to_string()).collect();
    let cubes = x
        .cube_sets()
        .iter()
        .map(|c| image_set(c, &part.block_of, labels.len()))
        .collect::<Result<Vec<_>>>()?;
    Cubespace::new(labels, cubes, declared_step)
}

/// A cubespace map between two shared spaces.
#[derive(Debug, Clone)]
pub struct Morphism {
    pub source: Arc<Cubespace>,
    pub target: Arc<Cubespace>,
    pub map: Vec<u32>,
}

impl Morphism {
    /// Checks shape only; see [`Morphism::non_cube_witness`].
    pub fn new(source: Arc<Cubespace>, target: Arc<Cubespace>, map: Vec<u32>) -> Result<Self> {
        if map.len() != source.len() {
            return Err(Error::structural(format!(
                "point map has {} entries for {} points",
                map.len(),
                source.len()
            )));
        }
        if map.iter().any(|&y| y as usize >= target.len()) {
            return Err(Error::structural("point map leaves the target"));
        }
        Ok(Self { source, target, map })
    }

    /// Like [`Morphism::new`], but also rejects maps that send a cube
    /// outside the target's cube sets.
    pub fn verified(source: Arc<Cubespace>, target: Arc<Cubespace>, map: Vec<u32>) -> Result<Self> {
        let m = Self::new(source, target, map)?;
        if let Some((n, q)) = m.non_cube_witness() {
            return Err(Error::Precondition(format!(
                "{n}-cube {} is not sent to a cube",
                show(&m.source, &q)
            )));
        }
        Ok(m)
    }

    pub fn identity(x: Arc<Cubespace>) -> Self {
        let map = (0..x.len() as u32).collect();
        Self {
            source: x.clone(),
            target: x,
            map,
        }
    }

    pub fn apply(&self, x: u32) -> u32 {
        self.map[x as usize]
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &Morphism) -> Result<Morphism> {
        if !Arc::ptr_eq(&self.target, &other.source) && *self.target != *other.source {
            return Err(Error::structural("composing maps with mismatched spaces"));
        }
        Morphism::new(
            self.source.clone(),
            other.target.clone(),
            self.map.iter().map(|&x| other.map[x as usize]).collect(),
        )
    }

    /// First cube (lowest dimension, then lowest index) whose image is not
    /// a cube.
    pub fn non_cube_witness(&self) -> Option<(usize, Vec<u32>)> {
        let top = self.source.n_max().min(self.target.n_max());
        for n in 0..=top {
            let set = self.source.cubes(n);
            let bad = (0..set.len()).into_par_iter().find_first(|&i| {
                let q: Vec<u32> = set.get(i).iter().map(|&x| self.map[x as usize]).collect();
                !self.target.is_cube(&q)
            });
            if let Some(i) = bad {
                return Some((n, set.get(i)));
            }
        }
        None
    }
}

/// `F_k(X)` with its projection.
#[derive(Debug, Clone)]
pub struct Factor {
    pub space: Cubespace,
    pub projection: Vec<u32>,
    pub partition: CanonicalPartition,
}

pub fn factor(x: &Cubespace, k: usize) -> Result<Factor> {
    let partition = simk(x, k)?;
    let space = quotient_by(x, &partition, Some(k))?;
    Ok(Factor {
        space,
        projection: partition.block_of.clone(),
        partition,
    })
}

/// The level-`k` structure group with its action on every fibre of
/// `X → F_{k−1}(X)`.
#[derive(Debug, Clone)]
pub struct StructureGroup {
    pub level: usize,
    pub group: FiniteAbelianGroup,
    pub fibres: CanonicalPartition,
    pub base: u32,
    order: usize,
    /// `act[y · |A| + a] = y + a`
    act: Vec<u32>,
    /// `coord[y] = a` with `min(fibre(y)) + a = y`
    coord: Vec<usize>,
}

impl StructureGroup {
    pub fn act(&self, y: u32, a: usize) -> u32 {
        self.act[y as usize * self.order + a]
    }

    pub fn coordinate(&self, y: u32) -> usize {
        self.coord[y as usize]
    }

    /// The element `a` with `y + a = x`, if both lie in one fibre.
    pub fn difference(&self, x: u32, y: u32) -> Option<usize> {
        if self.fibres.block_of[x as usize] != self.fibres.block_of[y as usize] {
            return None;
        }
        let g = &self.group;
        let d = g.sub(&g.element(self.coord[x as usize]), &g.element(self.coord[y as usize]));
        Some(g.index_of(&d))
    }
}

fn corner_value(x: &Cubespace, corner: &[u32]) -> Result<u32> {
    let vals = complete_corner(x, corner).map_err(|e| match e {
        Error::Precondition(m) | Error::Completion(m) => Error::NotNilspace(m),
        other => other,
    })?;
    match vals.as_slice() {
        [v] => Ok(*v),
        _ => Err(Error::NotNilspace(format!(
            "corner {} has {} completions",
            show(x, corner),
            vals.len()
        ))),
    }
}

/// Group law on one fibre of `~_{k−1}`, with base point its least element:
/// `a + b` completes the `(k+1)`-corner that is `e` except for `a` and
/// `b` at the two neighbours of `1^{k+1}` along coordinates 0 and 1.
fn fibre_law(x: &Cubespace, k: usize, fibre: &[u32]) -> Result<CayleyDecomposition> {
    let e = fibre[0];
    let full = (1usize << (k + 1)) - 1;
    let pos: HashMap<u32, usize> = fibre.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let n = fibre.len();
    let table: Vec<usize> = (0..n * n)
        .into_par_iter()
        .map(|ab| {
            let (a, b) = (fibre[ab / n], fibre[ab % n]);
            let mut corner = vec![e; full];
            corner[full ^ 1] = a;
            corner[full ^ 2] = b;
            let s = corner_value(x, &corner)?;
            pos.get(&s).copied().ok_or_else(|| {
                Error::NotNilspace(format!(
                    "{} + {} leaves the fibre of {}",
                    x.label(a),
                    x.label(b),
                    x.label(e)
                ))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    decompose_cayley(n, &table, 0).map_err(|e| Error::NotNilspace(format!("fibre law: {e}")))
}

/// The structure group at level `k ≥ 1`, read off the first fibre of
/// `~_{k−1}`, and its action on every fibre.
pub fn structure_group(x: &Cubespace, k: usize) -> Result<StructureGroup> {
    if k == 0 {
        return Err(Error::Config("structure groups start at level 1".into()));
    }
    x.require_dim(k + 1)?;
    let fibres = simk(x, k - 1)?;
    let f0 = fibres.blocks[0].clone();
    let e = f0[0];
    let law = fibre_law(x, k, &f0)?;
    let group = law.group.clone();
    let order = group.order() as usize;
    let full = (1usize << (k + 1)) - 1;
    let low_top = (1usize << k) - 1;
    // y + a completes: e on the lower half except a at 1^k, y on the upper
    // half except the missing top vertex
    let act: Vec<u32> = (0..x.len() * order)
        .into_par_iter()
        .map(|ya| {
            let (y, a) = ((ya / order) as u32, ya % order);
            let mut corner = vec![e; full];
            corner[low_top] = f0[law.to_table[a]];
            for v in (1usize << k)..full {
                corner[v] = y;
            }
            corner_value(x, &corner)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut coord = vec![usize::MAX; x.len()];
    for block in &fibres.blocks {
        if block.len() != order {
            return Err(Error::NotNilspace(format!(
                "fibre of {} has {} points, the structure group has order {order}",
                x.label(block[0]),
                block.len()
            )));
        }
        for &y in block {
            let mut seen = vec![false; x.len()];
            for a in 0..order {
                let z = act[y as usize * order + a];
                if fibres.block_of[z as usize] != fibres.block_of[y as usize] || seen[z as usize] {
                    return Err(Error::NotNilspace(format!(
                        "the action at {} is not free and transitive on its fibre",
                        x.label(y)
                    )));
                }
                seen[z as usize] = true;
            }
            if act[y as usize * order] != y {
                return Err(Error::NotNilspace(format!("0 moves {}", x.label(y))));
            }
        }
        let b = block[0];
        for a in 0..order {
            coord[act[b as usize * order + a] as usize] = a;
        }
    }
    // (y + a) + b = y + (a + b)
    let elems: Vec<_> = group.elements().collect();
    for y in 0..x.len() {
        for a in 0..order {
            let ya = act[y * order + a] as usize;
            for b in 0..order {
                let ab = group.index_of(&group.add(&elems[a], &elems[b]));
                if act[ya * order + b] != act[y * order + ab] {
                    return Err(Error::NotNilspace(format!(
                        "the action is not associative at {}",
                        x.label(y as u32)
                    )));
                }
            }
        }
    }
    Ok(StructureGroup {
        level: k,
        group,
        fibres,
        base: e,
        order,
        act,
        coord,
    })
}

/// The structure group computed separately on every fibre of `~_{k−1}`.
pub fn fibre_groups(x: &Cubespace, k: usize) -> Result<Vec<FiniteAbelianGroup>> {
    if k == 0 {
        return Err(Error::Config("structure groups start at level 1".into()));
    }
    let fibres = simk(x, k - 1)?;
    fibres
        .blocks
        .iter()
        .map(|b| fibre_law(x, k, b).map(|l| l.group))
        .collect()
}

/// The tower `X₀ ← X₁ ← … ← X_s = X` with structure groups.
#[derive(Debug, Clone)]
pub struct BundleDecomposition {
    pub step: usize,
    /// `factors[i] = F_i(X)`
    pub factors: Vec<Cubespace>,
    /// `projections[i]: X → X_i`
    pub projections: Vec<Vec<u32>>,
    /// `factor_maps[i − 1]: X_i → X_{i−1}`
    pub factor_maps: Vec<Vec<u32>>,
    /// `structure[i − 1]` acts on the fibres of `X_i → X_{i−1}`
    pub structure: Vec<StructureGroup>,
    pub rank: usize,
}

impl BundleDecomposition {
    pub fn groups(&self) -> Vec<FiniteAbelianGroup> {
        self.structure.iter().map(|s| s.group.clone()).collect()
    }

    /// `A_i`, trivial above the step.
    pub fn group(&self, i: usize) -> FiniteAbelianGroup {
        if i == 0 || i > self.step {
            FiniteAbelianGroup::trivial()
        } else {
            self.structure[i - 1].group.clone()
        }
    }

    pub fn top(&self) -> &Cubespace {
        self.factors.last().expect("X_0 always present")
    }
}

/// Least `k` with `~_k` discrete.
pub fn step_of(x: &Cubespace) -> Result<usize> {
    for k in 0..x.n_max() {
        if simk(x, k)?.is_discrete() {
            return Ok(k);
        }
    }
    Err(Error::NotNilspace(format!(
        "no ~_k with k < n_max = {} is discrete",
        x.n_max()
    )))
}

/// Fibres of `Cuⁿ(X_i) → Cuⁿ(X_{i−1})` must be orbits of `Cuⁿ(D_i(A_i))`.
fn check_difference_condition(
    xi: &Cubespace,
    xprev: &Cubespace,
    fmap: &[u32],
    sg: &StructureGroup,
    dk: &CubeSet,
    n: usize,
) -> Result<()> {
    let set = xi.cubes(n);
    let down = xprev.cubes(n);
    let slots = 1usize << n;
    // per projected cube: (count, least representative)
    let stats = (0..set.len())
        .into_par_iter()
        .fold(
            || (vec![0u64; down.len()], vec![usize::MAX; down.len()], vec![0u32; slots]),
            |(mut cnt, mut rep, mut q), i| {
                set.unpack_into(set.key(i), &mut q);
                for x in q.iter_mut() {
                    *x = fmap[*x as usize];
                }
                let j = down.index_of(&q).expect("image of a cube is a cube");
                cnt[j] += 1;
                rep[j] = rep[j].min(i);
                (cnt, rep, q)
            },
        )
        .map(|(c, r, _)| (c, r))
        .reduce(
            || (vec![0u64; down.len()], vec![usize::MAX; down.len()]),
            |(mut c1, mut r1), (c2, r2)| {
                for j in 0..c1.len() {
                    c1[j] += c2[j];
                    r1[j] = r1[j].min(r2[j]);
                }
                (c1, r1)
            },
        );
    let (cnt, rep) = stats;
    let want = dk.len() as u64;
    if let Some(j) = cnt.iter().position(|&c| c != want) {
        return Err(Error::NotNilspace(format!(
            "level {}: the {n}-cube {} of the factor has {} lifts, expected {want}",
            sg.level,
            show(xprev, &down.get(j)),
            cnt[j]
        )));
    }
    let bad = rep.par_iter().find_map_any(|&i| {
        let q0 = set.get(i);
        let mut q = vec![0u32; slots];
        let mut q3 = vec![0u32; slots];
        for t in 0..dk.len() {
            dk.unpack_into(dk.key(t), &mut q3);
            for v in 0..slots {
                q[v] = sg.act(q0[v], q3[v] as usize);
            }
            if !set.contains(&q) {
                return Some((q0, q));
            }
        }
        None
    });
    if let Some((q0, q)) = bad {
        return Err(Error::NotNilspace(format!(
            "level {}: {} shifted by a cube of D_{} is {}, not a cube",
            sg.level,
            show(xi, &q0),
            sg.level,
            show(xi, &q)
        )));
    }
    Ok(())
}

/// Full tower of canonical factors with verified structure groups.
pub fn bundle_decompose(x: &Cubespace) -> Result<BundleDecomposition> {
    let step = step_of(x)?;
    let mut factors = vec![];
    let mut projections = vec![];
    let mut partitions = vec![];
    for i in 0..=step {
        let part = simk(x, i)?;
        factors.push(quotient_by(x, &part, Some(i))?);
        projections.push(part.block_of.clone());
        partitions.push(part);
    }
    let mut factor_maps = vec![];
    for i in 1..=step {
        let mut fmap = vec![u32::MAX; factors[i].len()];
        for (p, (&hi, &lo)) in projections[i].iter().zip(&projections[i - 1]).enumerate() {
            if fmap[hi as usize] == u32::MAX {
                fmap[hi as usize] = lo;
            } else if fmap[hi as usize] != lo {
                return Err(Error::NotNilspace(format!(
                    "~_{i} does not refine ~_{} at {}",
                    i - 1,
                    x.label(p as u32)
                )));
            }
        }
        factor_maps.push(fmap);
    }
    let mut structure = vec![];
    for i in 1..=step {
        let xi = &factors[i];
        let sg = structure_group(xi, i)?;
        // fibres of ~_{i−1} on X_i are the fibres of X_i → X_{i−1}
        let fmap = &factor_maps[i - 1];
        for a in 0..xi.len() {
            for b in 0..xi.len() {
                let same = sg.fibres.block_of[a] == sg.fibres.block_of[b];
                if same != (fmap[a] == fmap[b]) {
                    return Err(Error::NotNilspace(format!(
                        "~_{} on F_{i} disagrees with the factor map at {}, {}",
                        i - 1,
                        xi.label(a as u32),
                        xi.label(b as u32)
                    )));
                }
            }
        }
        let d = make_dk(&sg.group, i, xi.n_max())?;
        for n in 0..=xi.n_max() {
            check_difference_condition(xi, &factors[i - 1], fmap, &sg, d.cubes(n), n)?;
        }
        structure.push(sg);
    }
    let rank = structure.iter().map(|s| grp_rank(&s.group)).sum();
    Ok(BundleDecomposition {
        step,
        factors,
        projections,
        factor_maps,
        structure,
        rank,
    })
}

#[derive(Debug, Clone)]
pub struct MorphismReport {
    pub is_morphism: Verdict,
    pub fibre_surjective: Verdict,
    pub measure_preserving: Verdict,
    /// images of the structure morphisms `α_i`, as element-index tables
    pub alphas: Vec<Vec<usize>>,
}

impl MorphismReport {
    pub fn verdicts(&self) -> [&Verdict; 3] {
        [&self.is_morphism, &self.fibre_surjective, &self.measure_preserving]
    }
}

pub fn morphism_check(phi: &Morphism) -> Result<MorphismReport> {
    let src = bundle_decompose(&phi.source)?;
    let tgt = bundle_decompose(&phi.target)?;
    morphism_check_with(phi, &src, &tgt)
}

/// Structure morphisms `α_i: A_i(X) → A_i(Y)` from `φ_i(x + a) = φ_i(x) + α_i(a)`.
fn structure_morphisms(
    phi: &Morphism,
    src: &BundleDecomposition,
    tgt: &BundleDecomposition,
) -> std::result::Result<Vec<Vec<usize>>, String> {
    let top = src.step.max(tgt.step);
    let mut alphas = vec![];
    for i in 1..=top {
        if i > src.step {
            alphas.push(vec![0]);
            continue;
        }
        let xs = &src.factors[i];
        let sgx = &src.structure[i - 1];
        if i > tgt.step {
            alphas.push(vec![0; sgx.group.order() as usize]);
            continue;
        }
        let sgy = &tgt.structure[i - 1];
        // induced φ_i: X_i → Y_i
        let mut phi_i = vec![u32::MAX; xs.len()];
        for (p, &b) in src.projections[i].iter().enumerate() {
            let img = tgt.projections[i][phi.map[p] as usize];
            if phi_i[b as usize] == u32::MAX {
                phi_i[b as usize] = img;
            } else if phi_i[b as usize] != img {
                return Err(format!("φ does not respect ~_{i}"));
            }
        }
        let order = sgx.group.order() as usize;
        let e = sgx.base;
        let mut alpha = Vec::with_capacity(order);
        for a in 0..order {
            let d = sgy
                .difference(phi_i[sgx.act(e, a) as usize], phi_i[e as usize])
                .ok_or_else(|| format!("φ_{i} moves a fibre of level {i} across fibres"))?;
            alpha.push(d);
        }
        for y in 0..xs.len() as u32 {
            for (a, &al) in alpha.iter().enumerate() {
                if sgy.difference(phi_i[sgx.act(y, a) as usize], phi_i[y as usize]) != Some(al) {
                    return Err(format!("α_{i} depends on the base point"));
                }
            }
        }
        alphas.push(alpha);
    }
    Ok(alphas)
}

pub fn morphism_check_with(
    phi: &Morphism,
    src: &BundleDecomposition,
    tgt: &BundleDecomposition,
) -> Result<MorphismReport> {
    let is_morphism = match phi.non_cube_witness() {
        None => Verdict::pass("is-morphism", "every cube maps to a cube"),
        Some((n, q)) => Verdict::fail(
            "is-morphism",
            format!("{n}-cube {} maps outside the cube set", show(&phi.source, &q)),
        ),
    };
    if !is_morphism.pass {
        return Ok(MorphismReport {
            is_morphism,
            fibre_surjective: Verdict::fail("fibre-surjective", "not a morphism"),
            measure_preserving: Verdict::fail("measure-preserving", "not a morphism"),
            alphas: vec![],
        });
    }
    let (fibre_surjective, alphas) = match structure_morphisms(phi, src, tgt) {
        Err(why) => (Verdict::fail("fibre-surjective", why), vec![]),
        Ok(alphas) => {
            let short = alphas.iter().enumerate().find(|(i, al)| {
                let mut img = (*al).clone();
                img.sort_unstable();
                img.dedup();
                img.len() as u64 != tgt.group(i + 1).order()
            });
            let v = match short {
                Some((i, _)) => Verdict::fail(
                    "fibre-surjective",
                    format!("α_{} onto {} is not surjective", i + 1, tgt.group(i + 1)),
                ),
                None => Verdict::pass(
                    "fibre-surjective",
                    format!("all {} structure morphisms are surjective", alphas.len()),
                ),
            };
            (v, alphas)
        }
    };
    // uniform fibres on points and on cubes
    let mut point_fibre = vec![0u64; phi.target.len()];
    for &y in &phi.map {
        point_fibre[y as usize] += 1;
    }
    let uniform = |c: &[u64]| c.iter().all(|&v| v == c[0] && v > 0);
    let mut measure_preserving = if uniform(&point_fibre) {
        Verdict::pass("measure-preserving", format!("point fibres of size {}", point_fibre[0]))
    } else {
        Verdict::fail(
            "measure-preserving",
            format!(
                "point fibres range from {} to {}",
                point_fibre.iter().min().expect("points"),
                point_fibre.iter().max().expect("points")
            ),
        )
    };
    if measure_preserving.pass {
        let top = phi.source.n_max().min(phi.target.n_max());
        let mut sizes = vec![];
        for n in 0..=top {
            let set = phi.source.cubes(n);
            let down = phi.target.cubes(n);
            let counts = (0..set.len())
                .into_par_iter()
                .fold(
                    || vec![0u64; down.len()],
                    |mut c, i| {
                        let q: Vec<u32> = set.get(i).iter().map(|&x| phi.map[x as usize]).collect();
                        c[down.index_of(&q).expect("morphism")] += 1;
                        c
                    },
                )
                .reduce(
                    || vec![0u64; down.len()],
                    |mut a, b| {
                        for (x, y) in a.iter_mut().zip(b) {
                            *x += y;
                        }
                        a
                    },
                );
            if !uniform(&counts) {
                measure_preserving = Verdict::fail(
                    "measure-preserving",
                    format!(
                        "{n}-cube fibres range from {} to {}",
                        counts.iter().min().expect("cubes"),
                        counts.iter().max().expect("cubes")
                    ),
                );
                break;
            }
            sizes.push(counts[0].to_string());
        }
        if measure_preserving.pass {
            measure_preserving = Verdict::pass(
                "measure-preserving",
                format!(
                    "point fibres {}, cube fibres {} for n = 0..={top}",
                    point_fibre[0],
                    sizes.join("/")
                ),
            );
        }
    }
    Ok(MorphismReport {
        is_morphism,
        fibre_surjective,
        measure_preserving,
        alphas,
    })
}

#[derive(Debug, Clone)]
pub struct GoodPairReport {
    pub p1_extension: Verdict,
    pub intersection_extension: Verdict,
    pub abelian_extension: Verdict,
    pub restriction: Verdict,
    /// common size of the restriction fibres, when uniform
    pub fibre_size: Option<u64>,
}

impl GoodPairReport {
    pub fn verdicts(&self) -> [&Verdict; 4] {
        [
            &self.p1_extension,
            &self.intersection_extension,
            &self.abelian_extension,
            &self.restriction,
        ]
    }

    pub fn passed(&self) -> bool {
        self.verdicts().iter().all(|v| v.pass)
    }
}

fn intersect(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter().copied().filter(|v| b.contains(v)).collect()
}

fn max_cube_dim(p: &SubCubespace) -> usize {
    p.cubes()
        .iter()
        .map(|c| c.len().trailing_zeros() as usize)
        .max()
        .unwrap_or(0)
}

/// First morphism `S → Y` with no extension to `P`, if any.
fn extension_failure(p: &SubCubespace, s: &[usize], y: &Cubespace) -> Result<Option<Vec<u32>>> {
    let sub = SubCubespace::induced(p.ambient_dim(), s, max_cube_dim(p))?;
    for g in hom_set(&sub, &[], y)? {
        let fixed: Vec<(usize, u32)> = sub.vertices().iter().copied().zip(g.iter().copied()).collect();
        if !hom_exists(p, &fixed, y)? {
            return Ok(Some(g));
        }
    }
    Ok(None)
}

/// Check that `P₁, P₂` is a good pair in `P` against `X` and the
/// `D_i(A_i)` of its tower, and that restriction
/// `hom_f(P, X) → hom_{f|}(P₂, X)` is onto with fibres of one size.
/// Vertex sets are given as ambient vertices of `P`.
pub fn good_pair_check(
    p: &SubCubespace,
    p1: &[usize],
    p2: &[usize],
    x: &Cubespace,
    f: &[(usize, u32)],
    tower: &BundleDecomposition,
) -> Result<GoodPairReport> {
    if !p.contains_all(p1) || !p.contains_all(p2) {
        return Err(Error::Precondition("P1 and P2 must lie in P".into()));
    }
    if f.len() != p1.len() || !p1.iter().all(|v| f.iter().any(|(w, _)| w == v)) {
        return Err(Error::Precondition("f must be given exactly on P1".into()));
    }
    let p12 = intersect(p1, p2);
    let mut targets: Vec<(String, Cubespace)> = vec![("X".into(), x.clone())];
    for (i, sg) in tower.structure.iter().enumerate() {
        targets.push((
            format!("D_{}({})", i + 1, sg.group),
            make_dk(&sg.group, i + 1, x.n_max())?,
        ));
    }
    let ext_verdict = |name: &str, s: &[usize]| -> Result<Verdict> {
        for (tname, y) in &targets {
            if let Some(g) = extension_failure(p, s, y)? {
                return Ok(Verdict::fail(
                    name,
                    format!("morphism {} into {tname} does not extend", show(y, &g)),
                ));
            }
        }
        Ok(Verdict::pass(
            name,
            format!("every morphism into {} targets extends", targets.len()),
        ))
    };
    let p1_extension = ext_verdict("p1-extension", p1)?;
    let intersection_extension = ext_verdict("intersection-extension", &p12)?;

    let mut abelian_extension = Verdict::pass("abelian-extension", "every level extends");
    let max_dim = max_cube_dim(p);
    let sub2 = SubCubespace::induced(p.ambient_dim(), p2, max_dim)?;
    for (tname, d) in targets.iter().skip(1) {
        let zero_on_12: Vec<(usize, u32)> = p12.iter().map(|&v| (v, 0)).collect();
        let mut failed = None;
        for g in hom_set(&sub2, &zero_on_12, d)? {
            let mut fixed: Vec<(usize, u32)> = p1.iter().map(|&v| (v, 0)).collect();
            for (&v, &val) in sub2.vertices().iter().zip(&g) {
                if !p1.contains(&v) {
                    fixed.push((v, val));
                }
            }
            if !hom_exists(p, &fixed, d)? {
                failed = Some(g);
                break;
            }
        }
        if let Some(g) = failed {
            abelian_extension = Verdict::fail(
                "abelian-extension",
                format!("{} on P2 into {tname} has no extension vanishing on P1", show(d, &g)),
            );
            break;
        }
    }

    // restriction fibres
    let homs = hom_set(p, f, x)?;
    let pos2: Vec<usize> = sub2
        .vertices()
        .iter()
        .map(|&v| p.position(v).expect("P2 inside P"))
        .collect();
    let mut fibres: HashMap<Vec<u32>, u64> = HashMap::new();
    for g in &homs {
        let r: Vec<u32> = pos2.iter().map(|&i| g[i]).collect();
        *fibres.entry(r).or_default() += 1;
    }
    let f12: Vec<(usize, u32)> = f.iter().copied().filter(|(v, _)| p12.contains(v)).collect();
    let base = hom_set(&sub2, &f12, x)?;
    let counts: Vec<u64> = base.iter().map(|t| fibres.get(t).copied().unwrap_or(0)).collect();
    let onto = counts.iter().all(|&c| c > 0) && fibres.len() == base.len();
    let uniform = counts.windows(2).all(|w| w[0] == w[1]);
    let fibre_size = (onto && uniform).then(|| counts.first().copied().unwrap_or(0));
    let restriction = if !onto {
        Verdict::fail(
            "restriction",
            format!(
                "{} of {} restricted morphisms are hit",
                counts.iter().filter(|&&c| c > 0).count(),
                base.len()
            ),
        )
    } else if !uniform {
        Verdict::fail(
            "restriction",
            format!(
                "fibre sizes range from {} to {}",
                counts.iter().min().expect("nonempty"),
                counts.iter().max().expect("nonempty")
            ),
        )
    } else {
        Verdict::pass(
            "restriction",
            format!(
                "{} morphisms onto {} restrictions, fibres of size {}",
                homs.len(),
                base.len(),
                counts.first().copied().unwrap_or(0)
            ),
        )
    };
    Ok(GoodPairReport {
        p1_extension,
        intersection_extension,
        abelian_extension,
        restriction,
        fibre_size,
    })
}

#[derive(Debug, Clone)]
pub struct InverseSystemReport {
    pub morphisms: Verdict,
    pub compatibility: Verdict,
    pub strict: Verdict,
}

impl InverseSystemReport {
    pub fn verdicts(&self) -> [&Verdict; 3] {
        [&self.morphisms, &self.compatibility, &self.strict]
    }
}

/// A chain `spaces[0] → spaces[1] → …` with `transitions[j]` mapping
/// `spaces[j]` to `spaces[j+1]`. `direct` lists further maps
/// `(i, j, map)` from `spaces[i]` to `spaces[j]` that must agree with
/// the composites (or be the identity when `i = j`).
pub fn verify_inverse_system(
    spaces: &[Arc<Cubespace>],
    transitions: &[Vec<u32>],
    direct: &[(usize, usize, Vec<u32>)],
) -> Result<InverseSystemReport> {
    if spaces.is_empty() || transitions.len() + 1 != spaces.len() {
        return Err(Error::structural("need one transition between consecutive spaces"));
    }
    let decomps = spaces
        .iter()
        .map(|s| bundle_decompose(s))
        .collect::<Result<Vec<_>>>()?;
    let mut maps: HashMap<(usize, usize), Morphism> = HashMap::new();
    for i in 0..spaces.len() {
        maps.insert((i, i), Morphism::identity(spaces[i].clone()));
    }
    for (j, t) in transitions.iter().enumerate() {
        let m = Morphism::new(spaces[j].clone(), spaces[j + 1].clone(), t.clone())?;
        for i in 0..=j {
            let prev = maps[&(i, j)].then(&m)?;
            maps.insert((i, j + 1), prev);
        }
    }
    let mut morphisms = Verdict::pass("morphisms", format!("{} transitions are morphisms", transitions.len()));
    let mut strict = Verdict::pass("strict", "every transition and composite is fibre-surjective");
    let mut keys: Vec<_> = maps.keys().copied().filter(|(i, j)| i < j).collect();
    keys.sort_unstable();
    for (i, j) in keys {
        let r = morphism_check_with(&maps[&(i, j)], &decomps[i], &decomps[j])?;
        if !r.is_morphism.pass && morphisms.pass {
            morphisms = Verdict::fail("morphisms", format!("{i} -> {j}: {}", r.is_morphism.detail));
        }
        if !r.fibre_surjective.pass && strict.pass {
            strict = Verdict::fail("strict", format!("{i} -> {j}: {}", r.fibre_surjective.detail));
        }
    }
    let mut compatibility = Verdict::pass(
        "compatibility",
        format!("identities and composites agree on {} given maps", direct.len()),
    );
    for (i, j, map) in direct {
        let ok = match maps.get(&(*i, *j)) {
            Some(m) => &m.map == map,
            None => false,
        };
        if !ok {
            compatibility = Verdict::fail("compatibility", format!("map {i} -> {j} disagrees with the chain"));
            break;
        }
    }
    Ok(InverseSystemReport {
        morphisms,
        compatibility,
        strict,
    })
}

/// `X` as `D_k(A)` after moving the base point to `0`.
#[derive(Debug, Clone)]
pub struct ErgodicClassification {
    pub group: FiniteAbelianGroup,
    /// point → element index
    pub transport: Vec<usize>,
    pub cube_sets_match: Verdict,
}

/// Classify a `k`-fold ergodic `k`-step space: transport every cube set
/// along `x ↦ x − e` and compare with `D_k(A)`.
pub fn classify_ergodic(x: &Cubespace, k: usize) -> Result<ErgodicClassification> {
    if k == 0 {
        if x.len() != 1 {
            return Err(Error::Precondition("a 0-step space has one point".into()));
        }
        return Ok(ErgodicClassification {
            group: FiniteAbelianGroup::trivial(),
            transport: vec![0],
            cube_sets_match: Verdict::pass("ergodic-classification", "one point"),
        });
    }
    let full = (x.len() as u128).checked_pow(1 << k);
    if full != Some(x.require_dim(k)?.len() as u128) {
        return Err(Error::Precondition(format!("the space is not {k}-fold ergodic")));
    }
    let sg = structure_group(x, k)?;
    if sg.fibres.len() != 1 {
        return Err(Error::NotNilspace("~_{k-1} has several classes".into()));
    }
    let transport: Vec<usize> = (0..x.len() as u32).map(|p| sg.coordinate(p)).collect();
    let map: Vec<u32> = transport.iter().map(|&a| a as u32).collect();
    let d = make_dk(&sg.group, k, x.n_max())?;
    let mut verdict = Verdict::pass(
        "ergodic-classification",
        format!("cube sets equal those of D_{k}({}) up to dimension {}", sg.group, x.n_max()),
    );
    for n in 0..=x.n_max() {
        let moved = image_set(x.cubes(n), &map, d.len())?;
        if &moved != d.cubes(n) {
            verdict = Verdict::fail(
                "ergodic-classification",
                format!(
                    "{n}-cubes differ: {} transported vs {} in D_{k}",
                    moved.len(),
                    d.cubes(n).len()
                ),
            );
            break;
        }
    }
    Ok(ErgodicClassification {
        group: sg.group,
        transport,
        cube_sets_match: verdict,
    })
}
