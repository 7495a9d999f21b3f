//! Translation groups `Trans_i(X)`, the induced map to the top factor, the
//! kernel criterion and the identity `Trans_k(X) = τ(A_k)`.

use std::collections::{BTreeSet, VecDeque};

use itertools::Itertools;
use rayon::prelude::*;

use crate::cubespace::{make_dk, Cubespace};
use crate::error::{Error, Result};
use crate::groups::{Element, FiniteAbelianGroup};
use crate::report::{Status, Verdict};
use crate::structure::{bundle_decompose, BundleDecomposition};
use crate::Limits;

/// Outcome of the arrow test for one map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranslationCheck {
    pub height: usize,
    /// arrows were checked for `n = 0..=max_n`
    pub max_n: usize,
    /// `(n, q)` with `⟨q, α∘q⟩_i` not a cube
    pub witness: Option<(usize, Vec<u32>)>,
}

impl TranslationCheck {
    pub fn holds(&self) -> bool {
        self.witness.is_none()
    }

    pub fn verdict(&self) -> Verdict {
        match &self.witness {
            None => Verdict::pass(
                "translation",
                format!("height {}, arrows checked for n <= {}", self.height, self.max_n),
            ),
            Some((n, q)) => Verdict::fail(
                "translation",
                format!("height {}: arrow over the {n}-cube {q:?} is not a cube", self.height),
            ),
        }
    }
}

pub fn check_bijection(x: &Cubespace, alpha: &[u32]) -> Result<()> {
    if alpha.len() != x.len() {
        return Err(Error::Precondition(format!(
            "map has {} entries for {} points",
            alpha.len(),
            x.len()
        )));
    }
    let mut seen = vec![false; x.len()];
    for &a in alpha {
        if a as usize >= x.len() || std::mem::replace(&mut seen[a as usize], true) {
            return Err(Error::Precondition("map is not a bijection".into()));
        }
    }
    Ok(())
}

fn arrow_witness(x: &Cubespace, alpha: &[u32], i: usize) -> Option<(usize, Vec<u32>)> {
    let top_w = (1usize << i) - 1;
    for n in 0..=x.n_max() - i {
        let set = x.cubes(n);
        let low = 1usize << n;
        let bad = (0..set.len()).into_par_iter().find_first(|&j| {
            let q = set.get(j);
            let mut arrow = Vec::with_capacity(low << i);
            for w in 0..=top_w {
                if w == top_w {
                    arrow.extend(q.iter().map(|&p| alpha[p as usize]));
                } else {
                    arrow.extend_from_slice(&q);
                }
            }
            !x.cubes(n + i).contains(&arrow)
        });
        if let Some(j) = bad {
            return Some((n, set.get(j)));
        }
    }
    None
}

/// Is `⟨q, α∘q⟩_i` a cube for every `q ∈ Cuⁿ(X)` with `n ≤ n_max − i`?
pub fn is_translation(x: &Cubespace, alpha: &[u32], i: usize) -> Result<TranslationCheck> {
    check_bijection(x, alpha)?;
    if i == 0 || i > x.n_max() {
        return Err(Error::Config(format!("height {i} needs 1 <= i <= n_max = {}", x.n_max())));
    }
    Ok(TranslationCheck {
        height: i,
        max_n: x.n_max() - i,
        witness: arrow_witness(x, alpha, i),
    })
}

/// Translations found at one height, sorted lexicographically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranslationSet {
    pub height: usize,
    pub maps: Vec<Vec<u32>>,
    /// every bijection was screened
    pub exhaustive: bool,
    /// the closure search stopped at the budget
    pub truncated: bool,
}

impl TranslationSet {
    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    pub fn contains(&self, alpha: &[u32]) -> bool {
        self.maps.binary_search_by(|m| m.as_slice().cmp(alpha)).is_ok()
    }

    /// Closure under composition and inverses.
    pub fn group_check(&self) -> Verdict {
        for a in &self.maps {
            let mut inv = vec![0u32; a.len()];
            for (x, &y) in a.iter().enumerate() {
                inv[y as usize] = x as u32;
            }
            if !self.contains(&inv) {
                return Verdict::fail("group", "an inverse is missing");
            }
            for b in &self.maps {
                if !self.contains(&compose(a, b)) {
                    return Verdict::fail("group", "a composite is missing");
                }
            }
        }
        Verdict::pass("group", format!("{} elements closed under composition and inverse", self.len()))
    }
}

/// `b ∘ a`.
pub fn compose(a: &[u32], b: &[u32]) -> Vec<u32> {
    a.iter().map(|&x| b[x as usize]).collect()
}

/// All height-`i` translations when `|X|` is within the bijection budget;
/// otherwise the translations among the closure of `seeds` under
/// composition, up to `limits.max_translations` elements.
pub fn translations_enumerate(x: &Cubespace, i: usize, seeds: &[Vec<u32>], limits: &Limits) -> Result<TranslationSet> {
    if i == 0 || i > x.n_max() {
        return Err(Error::Config(format!("height {i} needs 1 <= i <= n_max = {}", x.n_max())));
    }
    let n = x.len();
    if n <= limits.max_bijection_points {
        let perms: Vec<Vec<u32>> = (0..n as u32).permutations(n).collect();
        let maps: Vec<Vec<u32>> = perms
            .into_par_iter()
            .filter(|a| arrow_witness(x, a, i).is_none())
            .collect();
        return Ok(TranslationSet {
            height: i,
            maps,
            exhaustive: true,
            truncated: false,
        });
    }
    let mut gens = vec![];
    for s in seeds {
        check_bijection(x, s)?;
        if arrow_witness(x, s, i).is_none() {
            gens.push(s.clone());
        }
    }
    let id: Vec<u32> = (0..n as u32).collect();
    let mut found: BTreeSet<Vec<u32>> = BTreeSet::from([id.clone()]);
    let mut queue = VecDeque::from([id]);
    let mut truncated = false;
    'outer: while let Some(a) = queue.pop_front() {
        for g in &gens {
            let b = compose(&a, g);
            if !found.contains(&b) {
                if found.len() >= limits.max_translations {
                    truncated = true;
                    break 'outer;
                }
                found.insert(b.clone());
                queue.push_back(b);
            }
        }
    }
    // composites of translations are translations; screen anyway
    let maps: Vec<Vec<u32>> = found
        .into_iter()
        .collect::<Vec<_>>()
        .into_par_iter()
        .filter(|a| arrow_witness(x, a, i).is_none())
        .collect();
    Ok(TranslationSet {
        height: i,
        maps,
        exhaustive: false,
        truncated,
    })
}

/// The shifts `y ↦ y + a` by the top structure group.
pub fn top_shifts(x: &Cubespace, tower: &BundleDecomposition) -> Vec<Vec<u32>> {
    if tower.step == 0 {
        return vec![(0..x.len() as u32).collect()];
    }
    let sg = &tower.structure[tower.step - 1];
    let mut out: Vec<Vec<u32>> = (0..sg.group.order() as usize)
        .map(|a| (0..x.len() as u32).map(|y| sg.act(y, a)).collect())
        .collect();
    out.sort();
    out
}

/// `α′: X_{s−1} → A_s` with `α(x) = x + α′(π(x))`, checked against
/// `hom(X_{s−1}, D_{s−i}(A_s))`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelElement {
    /// element indices of `A_s`, one per point of `X_{s−1}`
    pub alpha_prime: Vec<usize>,
    pub in_hom: bool,
}

/// `h(α)` on the top factor and, when it is the identity, the kernel data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InducedTranslation {
    pub induced: Vec<u32>,
    pub induced_check: TranslationCheck,
    pub kernel: Option<KernelElement>,
}

fn require_height(tower: &BundleDecomposition, i: usize) -> Result<usize> {
    let s = tower.step;
    if s == 0 || i == 0 || i > s {
        return Err(Error::Config(format!("height {i} needs 1 <= i <= step = {s}")));
    }
    Ok(s)
}

/// Is `a: X_{s−1} → A_s` a morphism into `D_{s−i}(A_s)`?
pub fn in_dk_hom(factor: &Cubespace, group: &FiniteAbelianGroup, degree: usize, a: &[usize]) -> Result<bool> {
    let d = make_dk(group, degree, factor.n_max())?;
    Ok((0..=factor.n_max()).all(|n| {
        factor.cubes(n).iter().all(|q| {
            let img: Vec<u32> = q.iter().map(|&p| a[p as usize] as u32).collect();
            d.cubes(n).contains(&img)
        })
    }))
}

/// `h(α)(π(x)) = π(α(x))` on `X_{s−1}`, checked well defined and a
/// translation there. `α` need not be a translation itself.
pub fn trans_h(x: &Cubespace, tower: &BundleDecomposition, alpha: &[u32], i: usize) -> Result<InducedTranslation> {
    check_bijection(x, alpha)?;
    let s = require_height(tower, i)?;
    let pi = &tower.projections[s - 1];
    let factor = &tower.factors[s - 1];
    let mut induced = vec![u32::MAX; factor.len()];
    for (p, &a) in alpha.iter().enumerate() {
        let (from, to) = (pi[p] as usize, pi[a as usize]);
        if induced[from] == u32::MAX {
            induced[from] = to;
        } else if induced[from] != to {
            return Err(Error::NotNilspace(format!(
                "alpha does not respect the fibres over {}",
                factor.label(from as u32)
            )));
        }
    }
    check_bijection(factor, &induced).map_err(|_| Error::NotNilspace("induced map is not a bijection".into()))?;
    let induced_check = if i <= factor.n_max() {
        is_translation(factor, &induced, i)?
    } else {
        TranslationCheck {
            height: i,
            max_n: 0,
            witness: None,
        }
    };
    let identity = induced.iter().enumerate().all(|(p, &q)| p as u32 == q);
    let kernel = if identity {
        let sg = &tower.structure[s - 1];
        let mut ap = vec![usize::MAX; factor.len()];
        for (p, &a) in alpha.iter().enumerate() {
            let d = sg.difference(a, p as u32).expect("same fibre");
            let slot = &mut ap[pi[p] as usize];
            if *slot == usize::MAX {
                *slot = d;
            } else if *slot != d {
                // not a shift on this fibre; report as outside the hom set
                return Ok(InducedTranslation {
                    induced,
                    induced_check,
                    kernel: None,
                });
            }
        }
        let in_hom = in_dk_hom(factor, &sg.group, s - i, &ap)?;
        Some(KernelElement { alpha_prime: ap, in_hom })
    } else {
        None
    };
    Ok(InducedTranslation {
        induced,
        induced_check,
        kernel,
    })
}

/// Exhaustive check of `α ∈ Trans_i ⟺ α′ ∈ hom(X_{s−1}, D_{s−i}(A_s))`
/// over every `α′: X_{s−1} → A_s`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelCriterion {
    pub height: usize,
    pub checked: u64,
    pub in_hom: u64,
    /// some kernel translation with `α′` not constant
    pub nonconstant: u64,
    pub verdict: Verdict,
}

pub fn kernel_criterion(x: &Cubespace, tower: &BundleDecomposition, i: usize, limits: &Limits) -> Result<KernelCriterion> {
    let s = require_height(tower, i)?;
    let factor = &tower.factors[s - 1];
    let pi = &tower.projections[s - 1];
    let sg = &tower.structure[s - 1];
    let m = sg.group.order() as u128;
    let total = m.checked_pow(factor.len() as u32).unwrap_or(u128::MAX);
    if total > limits.max_translations as u128 {
        return Err(Error::budget("functions X_{s-1} -> A_s", total, limits.max_translations as u128));
    }
    let d = make_dk(&sg.group, s - i, factor.n_max())?;
    let rows: Vec<(bool, bool, bool)> = (0..total as u64)
        .into_par_iter()
        .map(|code| {
            let ap: Vec<usize> = (0..factor.len())
                .map(|p| (code / (m as u64).pow(p as u32) % m as u64) as usize)
                .collect();
            let alpha: Vec<u32> = (0..x.len()).map(|y| sg.act(y as u32, ap[pi[y] as usize])).collect();
            let trans = arrow_witness(x, &alpha, i).is_none();
            let hom = (0..=factor.n_max()).all(|n| {
                factor.cubes(n).iter().all(|q| {
                    let img: Vec<u32> = q.iter().map(|&p| ap[p as usize] as u32).collect();
                    d.cubes(n).contains(&img)
                })
            });
            let constant = ap.iter().all(|&a| a == ap[0]);
            (trans, hom, trans && !constant)
        })
        .collect();
    let agree = rows.iter().filter(|r| r.0 == r.1).count() as u64;
    let in_hom = rows.iter().filter(|r| r.1).count() as u64;
    let nonconstant = rows.iter().filter(|r| r.2).count() as u64;
    let checked = rows.len() as u64;
    let verdict = Verdict::new(
        "kernel-criterion",
        agree == checked,
        format!("{agree} of {checked} fibre shifts agree; {in_hom} in hom, {nonconstant} non-constant translations"),
    );
    Ok(KernelCriterion {
        height: i,
        checked,
        in_hom,
        nonconstant,
        verdict,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TauReport {
    pub step: usize,
    pub height: usize,
    pub translations: TranslationSet,
    pub shifts: Vec<Vec<u32>>,
    pub status: Status,
    pub verdict: Verdict,
}

/// Compare the height-`s` translations with the shifts by `A_s`.
pub fn check_transk_tau(x: &Cubespace, limits: &Limits) -> Result<TauReport> {
    let tower = bundle_decompose(x)?;
    check_transk_tau_with(x, &tower, &[], limits)
}

pub fn check_transk_tau_with(
    x: &Cubespace,
    tower: &BundleDecomposition,
    extra_seeds: &[Vec<u32>],
    limits: &Limits,
) -> Result<TauReport> {
    let s = tower.step;
    let height = s.max(1);
    let shifts = top_shifts(x, tower);
    let mut seeds = shifts.clone();
    seeds.extend_from_slice(extra_seeds);
    let translations = translations_enumerate(x, height, &seeds, limits)?;
    let equal = translations.maps == shifts;
    let (status, verdict) = if equal && translations.exhaustive {
        (
            Status::Pass,
            Verdict::pass("trans-tau", format!("{} translations of height {height}, all shifts", shifts.len())),
        )
    } else if !equal {
        let extra = translations.maps.iter().filter(|m| shifts.binary_search(m).is_err()).count();
        let missing = shifts.iter().filter(|m| !translations.contains(m)).count();
        (
            Status::Fail,
            Verdict::fail("trans-tau", format!("{extra} translations are not shifts, {missing} shifts are not translations")),
        )
    } else {
        (
            Status::Inconclusive,
            Verdict::pass(
                "trans-tau",
                format!("generator search found only the {} shifts; not exhaustive", shifts.len()),
            ),
        )
    };
    Ok(TauReport {
        step: s,
        height,
        translations,
        shifts,
        status,
        verdict,
    })
}

/// The group element a shift moves by, when `alpha` is a top shift.
pub fn shift_element(tower: &BundleDecomposition, alpha: &[u32]) -> Option<Element> {
    let sg = tower.structure.last()?;
    let a = sg.difference(alpha[0], 0)?;
    let shifted: Vec<u32> = (0..alpha.len() as u32).map(|y| sg.act(y, a)).collect();
    (shifted == alpha).then(|| sg.group.element(a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cubespace::{make_dk, one_point};
    use crate::filtered::{quotient_nilspace, FilteredGroup};

    #[test]
    fn shifts_and_negation_on_cyclic() {
        let x = make_dk(&FiniteAbelianGroup::cyclic(3), 1, 3).unwrap();
        let id: Vec<u32> = vec![0, 1, 2];
        assert!(is_translation(&x, &id, 1).unwrap().holds());
        assert!(is_translation(&x, &[1, 2, 0], 1).unwrap().holds());
        assert!(!is_translation(&x, &[0, 2, 1], 1).unwrap().holds());
        assert!(is_translation(&x, &[0, 0, 1], 1).is_err());
    }

    #[test]
    fn exhaustive_d1_z4() {
        let x = make_dk(&FiniteAbelianGroup::cyclic(4), 1, 3).unwrap();
        let t = translations_enumerate(&x, 1, &[], &Limits::default()).unwrap();
        assert!(t.exhaustive);
        assert_eq!(t.len(), 4);
        assert!(t.group_check().pass);
        let r = check_transk_tau(&x, &Limits::default()).unwrap();
        assert_eq!(r.status, Status::Pass);
    }

    #[test]
    fn one_point_is_trivial() {
        let r = check_transk_tau(&one_point(3), &Limits::default()).unwrap();
        assert_eq!(r.status, Status::Pass);
        assert_eq!(r.translations.len(), 1);
    }

    #[test]
    fn heisenberg_top_and_kernel() {
        let g = FilteredGroup::heisenberg(2).unwrap();
        let x = quotient_nilspace(&g, &[g.identity()], 3, &Limits::default()).unwrap();
        let r = check_transk_tau(&x, &Limits::default()).unwrap();
        assert_eq!(r.status, Status::Pass, "{}", r.verdict);
        assert_eq!(r.shifts.len(), 2);
        let tower = bundle_decompose(&x).unwrap();
        for i in 1..=2 {
            let kc = kernel_criterion(&x, &tower, i, &Limits::default()).unwrap();
            assert!(kc.verdict.pass, "{}", kc.verdict);
        }
        let kc = kernel_criterion(&x, &tower, 1, &Limits::default()).unwrap();
        assert!(kc.nonconstant > 0);
        // a shift has h = id and constant α′
        let h = trans_h(&x, &tower, &r.shifts[1], 2).unwrap();
        let ker = h.kernel.unwrap();
        assert!(ker.in_hom);
        assert!(ker.alpha_prime.iter().all(|&a| a == ker.alpha_prime[0]));
    }

    #[test]
    fn generator_search_when_too_many_points() {
        let x = make_dk(&FiniteAbelianGroup::cyclic(4), 1, 3).unwrap();
        let limits = Limits {
            max_bijection_points: 2,
            ..Limits::default()
        };
        let r = check_transk_tau(&x, &limits).unwrap();
        assert_eq!(r.status, Status::Inconclusive);
        assert_eq!(r.translations.len(), 4);
    }
}
