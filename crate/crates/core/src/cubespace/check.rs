//! The nilspace axiom checker.

use rayon::prelude::*;

use super::search::{Constraint, Search};
use super::Cubespace;
use crate::cube::{faces, generator_tables};
use crate::error::{Error, Result};
use crate::report::Verdict;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxiomReport {
    pub step: usize,
    pub n_max: usize,
    pub ergodicity: Verdict,
    pub composition: Verdict,
    pub completion: Verdict,
    pub uniqueness: Verdict,
    pub face_criterion: Verdict,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.verdicts().iter().all(|v| v.pass)
    }

    pub fn verdicts(&self) -> [&Verdict; 5] {
        [
            &self.ergodicity,
            &self.composition,
            &self.completion,
            &self.uniqueness,
            &self.face_criterion,
        ]
    }
}

fn show(x: &Cubespace, q: &[u32]) -> String {
    let parts: Vec<&str> = q.iter().map(|&p| x.label(p)).collect();
    format!("({})", parts.join(","))
}

/// Lower faces `{x_i = 0}` of `{0,1}ⁿ` as constraints on the first
/// `2ⁿ − 1` vertices.
fn corner_constraints(n: usize) -> Vec<Constraint> {
    (0..n)
        .map(|i| Constraint {
            positions: (0..1usize << n).filter(|v| v >> i & 1 == 0).collect(),
        })
        .collect()
}

pub(crate) fn corner_search(x: &Cubespace, n: usize) -> Search<'_> {
    let nvars = (1usize << n) - 1;
    Search::new(x, nvars, vec![None; nvars], corner_constraints(n), true)
}

/// Every point that completes the corner `c` (values on all vertices but
/// `1ⁿ`, in vertex order).
pub fn complete_corner(x: &Cubespace, c: &[u32]) -> Result<Vec<u32>> {
    let n = (c.len() + 1).trailing_zeros() as usize;
    if !(c.len() + 1).is_power_of_two() || n == 0 {
        return Err(Error::structural(format!("corner with {} values", c.len())));
    }
    let set = x.require_dim(n)?;
    for i in 0..n {
        let face: Vec<u32> = (0..1usize << n)
            .filter(|v| v >> i & 1 == 0)
            .map(|v| c[v])
            .collect();
        if !x.is_cube(&face) {
            return Err(Error::Precondition(format!(
                "lower face {i} of {} is not a cube",
                show(x, c)
            )));
        }
    }
    let range = set.prefix_range(c);
    if range.is_empty() {
        return Err(Error::Completion(show(x, c)));
    }
    Ok(range.map(|i| set.last_value(i)).collect())
}

fn check_ergodicity(x: &Cubespace) -> Verdict {
    let n = x.len() as u64;
    let c0 = x.cubes(0).len() as u64;
    let c1 = x.cubes(1).len() as u64;
    if c0 != n {
        return Verdict::fail("ergodicity", format!("{c0} 0-cubes for {n} points"));
    }
    if c1 != n * n {
        let missing = (0..x.len() as u32)
            .flat_map(|a| (0..x.len() as u32).map(move |b| [a, b]))
            .find(|q| !x.is_cube(q))
            .expect("some pair missing");
        return Verdict::fail(
            "ergodicity",
            format!("{c1} of {} pairs are 1-cubes, missing {}", n * n, show(x, &missing)),
        );
    }
    Verdict::pass("ergodicity", format!("all {} pairs are 1-cubes", n * n))
}

fn check_composition(x: &Cubespace) -> Verdict {
    let n_max = x.n_max();
    for n in 0..=n_max {
        let gens = generator_tables(n, n_max);
        let set = x.cubes(n);
        let bad = (0..set.len()).into_par_iter().find_first(|&i| {
            let q = set.get(i);
            gens.iter().any(|(m, table)| {
                let image: Vec<u32> = table.iter().map(|&w| q[w]).collect();
                *m > n_max || !x.cubes(*m).contains(&image)
            })
        });
        if let Some(i) = bad {
            let q = set.get(i);
            let (m, image) = gens
                .iter()
                .map(|(m, t)| (*m, t.iter().map(|&w| q[w]).collect::<Vec<u32>>()))
                .find(|(m, im)| !x.cubes(*m).contains(im))
                .expect("failing generator");
            return Verdict::fail(
                "composition",
                format!(
                    "{n}-cube {} has {m}-dimensional image {} outside the cube set",
                    show(x, &q),
                    show(x, &image)
                ),
            );
        }
    }
    Verdict::pass(
        "composition",
        format!("cube sets closed under cube morphisms up to dimension {n_max}"),
    )
}

/// Completion counts per corner for dimension `n`: returns (number of
/// corners, first corner with no completion, first corner with more than
/// one completion).
fn corner_stats(x: &Cubespace, n: usize) -> (u64, Option<Vec<u32>>, Option<Vec<u32>>) {
    let set = x.cubes(n);
    let parts = corner_search(x, n).par_fold(
        || (0u64, None::<Vec<u32>>, None::<Vec<u32>>),
        |acc, c| {
            acc.0 += 1;
            if acc.1.is_some() && acc.2.is_some() {
                return;
            }
            let k = set.prefix_range(c).len();
            if k == 0 && acc.1.is_none() {
                acc.1 = Some(c.to_vec());
            }
            if k > 1 && acc.2.is_none() {
                acc.2 = Some(c.to_vec());
            }
        },
    );
    let mut out = (0, None, None);
    for (c, e, m) in parts {
        out.0 += c;
        if out.1.is_none() {
            out.1 = e;
        }
        if out.2.is_none() {
            out.2 = m;
        }
    }
    out
}

/// Verify the axioms of a `k`-step nilspace on the stored cube sets.
///
/// Completion is checked on raw corners up to dimension `k+1`; above
/// that, `Cuⁿ` is compared against the set of maps whose `(k+1)`-faces
/// are all cubes.
pub fn cs_check_axioms(x: &Cubespace, k: usize) -> Result<AxiomReport> {
    let n_max = x.n_max();
    if n_max < k + 1 {
        return Err(Error::Config(format!(
            "step {k} needs cubes up to dimension {}, n_max is {n_max}",
            k + 1
        )));
    }
    let ergodicity = check_ergodicity(x);
    let composition = check_composition(x);

    let mut completion = None;
    let mut uniqueness = None;
    let mut corner_total = 0;
    for n in 1..=k + 1 {
        let (count, empty, multi) = corner_stats(x, n);
        corner_total += count;
        if completion.is_none() {
            if let Some(c) = &empty {
                completion = Some(Verdict::fail(
                    "completion",
                    format!("{n}-corner {} has no completion", show(x, c)),
                ));
            }
        }
        if n == k + 1 {
            uniqueness = Some(match (multi, empty) {
                (Some(c), _) => Verdict::fail(
                    "uniqueness",
                    format!("{n}-corner {} has several completions", show(x, &c)),
                ),
                (None, Some(_)) => Verdict::fail("uniqueness", "some corner has no completion"),
                (None, None) => Verdict::pass(
                    "uniqueness",
                    format!("all {count} {n}-corners complete uniquely"),
                ),
            });
        }
    }
    let completion = completion.unwrap_or_else(|| {
        Verdict::pass(
            "completion",
            format!("all {corner_total} corners of dimension <= {} complete", k + 1),
        )
    });
    let uniqueness = uniqueness.expect("dimension k+1 visited");

    let mut face_criterion = Verdict::pass(
        "face-criterion",
        format!("no stored dimension above {}", k + 1),
    );
    for n in k + 2..=n_max {
        let constraints: Vec<Constraint> = faces(n, k + 1)
            .into_iter()
            .map(|f| Constraint {
                positions: f.vertices(),
            })
            .collect();
        let nvars = 1usize << n;
        let count = Search::new(x, nvars, vec![None; nvars], constraints, true).count();
        let stored = x.cubes(n).len() as u64;
        // stored cubes have cube faces by the composition verdict, so equal
        // counts mean equal sets
        if count != stored {
            face_criterion = Verdict::fail(
                "face-criterion",
                format!(
                    "{count} maps on {{0,1}}^{n} have all {}-faces cubes, {stored} are stored",
                    k + 1
                ),
            );
            break;
        }
        face_criterion = Verdict::pass(
            "face-criterion",
            format!("Cu^n equals the intersection over (k+1)-faces up to n = {n}"),
        );
    }

    Ok(AxiomReport {
        step: k,
        n_max,
        ergodicity,
        composition,
        completion,
        uniqueness,
        face_criterion,
    })
}
