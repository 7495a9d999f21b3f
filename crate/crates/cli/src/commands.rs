//! One function per subcommand, each returning its report.

use std::path::Path;
use std::sync::Arc;

use nilcube::catalog::{carry_cocycle, reduction_map, CatalogSpace};
use nilcube::cocycles::{
    average_cocycle, coboundary_solve, cocycle_from_section, cocycle_verify, constant_offset, extension_theta,
    is_coboundary_of, rectify_lifted_map, tricube_verify, AbelianExtension, Coefficients, Extension, SolvePath,
};
use nilcube::cubespace::{cs_check_axioms, make_dk_within};
use nilcube::filtered::{hk_count, hk_enumerate, hk_factorize, hk_for_each, hk_recompose, HkOutcome};
use nilcube::format;
use nilcube::groups::{FiniteAbelianGroup, Rational, TorusValue};
use nilcube::report::{Report, Status, Verdict};
use nilcube::structure::{bundle_decompose, factor as factor_of, simk, step_of, verify_inverse_system, Morphism};
use nilcube::translations::{
    check_bijection, check_transk_tau_with, is_translation, top_shifts, translations_enumerate,
};
use nilcube::{Cubespace, Error, Limits, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::inputs::{
    build_cocycle, build_space, parse_group, parse_list, random_coboundary, shared, write_file,
};
use crate::{CocycleArgs, SpaceArgs};

fn space_fields(r: &mut Report, c: &CatalogSpace) {
    r.field("space", &c.name).field("points", c.space.len()).field("n_max", c.space.n_max());
}

/// The declared step, or the computed one.
fn step(x: &Cubespace) -> Result<usize> {
    match x.declared_step() {
        Some(s) => Ok(s),
        None => step_of(x),
    }
}

fn push_all<'a>(r: &mut Report, vs: impl IntoIterator<Item = &'a Verdict>) {
    for v in vs {
        r.verdict(v.clone());
    }
}

fn show_group(a: &FiniteAbelianGroup) -> String {
    let f = a.invariant_factors();
    if f.is_empty() {
        "0".into()
    } else {
        f.iter().map(u64::to_string).collect::<Vec<_>>().join(",")
    }
}

pub fn gen(args: &SpaceArgs, out: &Path, limits: &Limits) -> Result<Report> {
    let c = build_space(args, limits)?;
    write_file(out, &format::write_space(&c.space))?;
    let mut r = Report::new("gen");
    space_fields(&mut r, &c);
    for n in 0..=c.space.n_max() {
        r.field(format!("cubes{n}"), c.space.cubes(n).len());
    }
    r.field("out", out.display());
    Ok(r)
}

pub fn check(args: &SpaceArgs, limits: &Limits) -> Result<Report> {
    let c = build_space(args, limits)?;
    let k = match args.step {
        Some(k) => k,
        None => c
            .step()
            .ok_or_else(|| Error::Config("no declared step; pass --step".into()))?,
    };
    let rep = cs_check_axioms(&c.space, k)?;
    let mut r = Report::new("check");
    space_fields(&mut r, &c);
    r.field("step", k);
    push_all(&mut r, rep.verdicts());
    Ok(r)
}

pub fn factor(args: &SpaceArgs, k: usize, out: Option<&Path>, limits: &Limits) -> Result<Report> {
    let c = build_space(args, limits)?;
    let x = &c.space;
    let part = simk(x, k)?;
    let f = factor_of(x, k)?;
    let mut r = Report::new("factor");
    space_fields(&mut r, &c);
    r.field("k", k).field("classes", part.len());
    for (i, b) in part.blocks.iter().enumerate() {
        let labels: Vec<&str> = b.iter().map(|&p| x.label(p)).collect();
        r.field(format!("class{i}"), labels.join(" "));
    }
    r.field("factor_points", f.space.len());
    if let Some(path) = out {
        write_file(path, &format::write_space(&f.space))?;
        r.field("out", path.display());
    }
    Ok(r)
}

pub fn structure(args: &SpaceArgs, limits: &Limits) -> Result<Report> {
    let c = build_space(args, limits)?;
    let tower = bundle_decompose(&c.space)?;
    let mut r = Report::new("structure");
    space_fields(&mut r, &c);
    r.field("step", tower.step).field("rank", tower.rank);
    for i in 1..=tower.step {
        r.field(format!("A{i}"), show_group(&tower.group(i)));
        r.field(format!("X{i}_points"), tower.factors[i].len());
    }
    Ok(r)
}

pub fn hk(args: &SpaceArgs, dim: usize, limits: &Limits) -> Result<Report> {
    let c = build_space(args, limits)?;
    let (g, _) = c
        .filtered
        .as_ref()
        .ok_or_else(|| Error::Config("hk needs a space built from a filtered group".into()))?;
    let set = hk_enumerate(g, dim, limits)?;
    let mut r = Report::new("hk");
    r.field("group_order", g.order()).field("dim", dim).field("cubes", hk_count(g, dim));

    let mut bad = None;
    let mut visited = 0u64;
    hk_for_each(g, dim, |q| {
        visited += 1;
        if bad.is_some() {
            return;
        }
        let ok = match hk_factorize(g, q) {
            Ok(HkOutcome::Accept(f)) => hk_recompose(g, &f.coefficients).ok().as_deref() == Some(q),
            _ => false,
        };
        if !ok {
            bad = Some(q.to_vec());
        }
    });
    r.verdict(match bad {
        None => Verdict::pass("round-trip", format!("factorize then recompose is the identity on {visited} cubes")),
        Some(q) => Verdict::fail("round-trip", format!("cube {q:?} does not round-trip")),
    });

    let order = g.order() as u128;
    let total = order.checked_pow(1 << dim).unwrap_or(u128::MAX);
    if total > limits.max_cubes {
        r.field("membership", format!("skipped: {total} tuples over the budget"));
        r.inconclusive = true;
        return Ok(r);
    }
    let len = 1usize << dim;
    let disagree = (0..total as u64)
        .into_par_iter()
        .find_first(|&code| {
            let q: Vec<u32> = (0..len)
                .map(|v| (code / (order as u64).pow(v as u32) % order as u64) as u32)
                .collect();
            let accept = hk_factorize(g, &q).map(|o| o.is_accept()).unwrap_or(false);
            accept != set.contains(&q)
        });
    r.verdict(match disagree {
        None => Verdict::pass("membership", format!("factorization test agrees with generation on {total} tuples")),
        Some(code) => Verdict::fail("membership", format!("tuple number {code} is classified differently")),
    });
    Ok(r)
}

fn cocycle_fields(r: &mut Report, rho: &nilcube::cocycles::Cocycle) {
    r.field("k", rho.k())
        .field("coefficients", format::write_coefficients(rho.coefficients()))
        .field("values", rho.len());
}

pub fn cocycle_verify_cmd(args: &SpaceArgs, ca: &CocycleArgs, limits: &Limits) -> Result<Report> {
    let c = build_space(args, limits)?;
    let rho = build_cocycle(&c.space, ca)?;
    let rep = cocycle_verify(&c.space, &rho)?;
    let mut r = Report::new("cocycle verify");
    space_fields(&mut r, &c);
    cocycle_fields(&mut r, &rho);
    push_all(&mut r, rep.verdicts());
    for (i, v) in rep.violations.iter().enumerate() {
        r.field(format!("violation{i}"), v);
    }
    Ok(r)
}

pub fn cocycle_coboundary(args: &SpaceArgs, ca: &CocycleArgs, limits: &Limits) -> Result<Report> {
    let c = build_space(args, limits)?;
    let x = &c.space;
    let rho = build_cocycle(x, ca)?;
    let mut r = Report::new("cocycle coboundary");
    space_fields(&mut r, &c);
    cocycle_fields(&mut r, &rho);
    r.field("distance_from_zero", rho.max_distance_from_zero());
    match coboundary_solve(x, &rho, limits)? {
        Some(sol) => {
            let path = match sol.path {
                SolvePath::Averaging => "averaging",
                SolvePath::Linear => "linear",
            };
            r.field("path", path);
            let g: Vec<String> = sol.g.iter().map(format::write_value).collect();
            r.field("g", g.join(" "));
            r.verdict(Verdict::new(
                "coboundary",
                is_coboundary_of(x, &rho, &sol.g),
                format!("solved by {path}, checked on every cube"),
            ));
        }
        None => {
            r.verdict(Verdict::fail("coboundary", "no g with ρ = δg"));
        }
    }
    Ok(r)
}

pub fn cocycle_extend(args: &SpaceArgs, ca: &CocycleArgs, out: Option<&Path>, limits: &Limits) -> Result<Report> {
    let c = build_space(args, limits)?;
    let base = shared(&c);
    let rho = build_cocycle(&base, ca)?;
    let ext = Extension::new(base.clone(), &rho)?;
    let m = ext.materialize(limits)?;
    let s = ext.step_over(step(&base)?);
    let rep = cs_check_axioms(&m, s)?;
    let mut r = Report::new("cocycle extend");
    space_fields(&mut r, &c);
    cocycle_fields(&mut r, &rho);
    r.field("extension_points", m.len()).field("extension_step", s);
    push_all(&mut r, rep.verdicts());
    if let Some(path) = out {
        write_file(path, &format::write_space(&m))?;
        r.field("out", path.display());
    }
    Ok(r)
}

pub fn cocycle_fromsection(args: &SpaceArgs, seed: Option<u64>, limits: &Limits) -> Result<Report> {
    let c = build_space(args, limits)?;
    let x = shared(&c);
    let tower = bundle_decompose(&x)?;
    let ext = AbelianExtension::from_tower(x, &tower)?;
    let mut s = ext.least_section();
    if let Some(seed) = seed {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = ext.group.order() as usize;
        for y in s.iter_mut() {
            *y = ext.act(*y, rng.gen_range(0..m));
        }
    }
    let rho = cocycle_from_section(&ext, &s)?;
    let theta = extension_theta(&ext, &s)?;
    let mut r = Report::new("cocycle fromsection");
    space_fields(&mut r, &c);
    cocycle_fields(&mut r, &rho);
    r.field("structure_group", show_group(&ext.group));
    push_all(&mut r, cocycle_verify(&ext.base, &rho)?.verdicts());
    push_all(&mut r, theta.verdicts());
    Ok(r)
}

pub fn cocycle_average(from: u64, to: u64, carry_mod: u64, seed: u64, limits: &Limits) -> Result<Report> {
    let x = Arc::new(make_dk_within(&FiniteAbelianGroup::cyclic(from), 1, limits.n_max, limits)?);
    let y = Arc::new(make_dk_within(&FiniteAbelianGroup::cyclic(to), 1, limits.n_max, limits)?);
    let beta = Morphism::verified(x.clone(), y.clone(), reduction_map(from, to)?)?;
    let base = carry_cocycle(&y, to, carry_mod)?.to_circle()?;
    let pulled = base.pullback(&y, &x, &beta.map)?;
    let noise = random_coboundary(&x, 2, Coefficients::circle(), seed)?;
    let rho = pulled.add(&noise)?;
    let out = average_cocycle(&x, &rho, &beta)?;
    let mut r = Report::new("cocycle average");
    r.field("source", format!("D1(Z/{from})"))
        .field("target", format!("D1(Z/{to})"))
        .field("fibres", out.fibres)
        .field("max_shift", &out.max_shift)
        .field("fibre_diameter", &out.diameter);
    for v in cocycle_verify(&x, &rho)?.verdicts() {
        r.verdict(Verdict::new(format!("input-{}", v.name), v.pass, v.detail.clone()));
    }
    push_all(&mut r, out.verdicts());
    Ok(r)
}

pub fn cohomology(args: &SpaceArgs, k: usize, coeff: &str, limits: &Limits) -> Result<Report> {
    let c = build_space(args, limits)?;
    let a = parse_group(coeff)?;
    let h = nilcube::cocycles::cohomology(&c.space, k, &a, limits)?;
    let mut r = Report::new("cocycle cohomology");
    space_fields(&mut r, &c);
    r.field("k", k).field("coefficients", show_group(&a)).field("H", show_group(&h));
    Ok(r)
}

pub fn tricube(args: &SpaceArgs, ca: &CocycleArgs, limits: &Limits) -> Result<Report> {
    let c = build_space(args, limits)?;
    let rho = build_cocycle(&c.space, ca)?;
    let rep = tricube_verify(&c.space, &rho)?;
    let mut r = Report::new("cocycle tricube");
    space_fields(&mut r, &c);
    cocycle_fields(&mut r, &rho);
    r.field("cubes", rep.cubes).field("pairs", rep.pairs).field("empty", rep.empty);
    r.verdict(rep.verdict.clone());
    Ok(r)
}

/// Top shifts plus left multiplications by `G_height`.
fn seeds(c: &CatalogSpace, tower: &nilcube::structure::BundleDecomposition, height: usize) -> Vec<Vec<u32>> {
    let mut s = top_shifts(&c.space, tower);
    s.extend(c.left_multiplications().into_iter().filter(|(d, _)| *d >= height).map(|(_, m)| m));
    s
}

pub fn trans_enum(args: &SpaceArgs, height: usize, limits: &Limits) -> Result<Report> {
    let c = build_space(args, limits)?;
    let tower = bundle_decompose(&c.space)?;
    let set = translations_enumerate(&c.space, height, &seeds(&c, &tower, height), limits)?;
    let mut r = Report::new("trans enum");
    space_fields(&mut r, &c);
    r.field("height", height)
        .field("translations", set.len())
        .field("exhaustive", set.exhaustive);
    for (i, m) in set.maps.iter().enumerate().take(64) {
        let s: Vec<String> = m.iter().map(u32::to_string).collect();
        r.field(format!("map{i}"), s.join(","));
    }
    r.verdict(set.group_check());
    r.inconclusive = !set.exhaustive;
    Ok(r)
}

pub fn trans_check(args: &SpaceArgs, height: usize, map: &str, limits: &Limits) -> Result<Report> {
    let c = build_space(args, limits)?;
    let alpha: Vec<u32> = parse_list(map, "map")?;
    check_bijection(&c.space, &alpha)?;
    let t = is_translation(&c.space, &alpha, height)?;
    let mut r = Report::new("trans check");
    space_fields(&mut r, &c);
    r.field("height", height);
    r.verdict(t.verdict());
    Ok(r)
}

pub fn trans_tau(args: &SpaceArgs, limits: &Limits) -> Result<Report> {
    let c = build_space(args, limits)?;
    let tower = bundle_decompose(&c.space)?;
    let height = tower.step.max(1);
    let extra: Vec<Vec<u32>> = c
        .left_multiplications()
        .into_iter()
        .filter(|(d, _)| *d >= height)
        .map(|(_, m)| m)
        .collect();
    let tau = check_transk_tau_with(&c.space, &tower, &extra, limits)?;
    let mut r = Report::new("trans tau");
    space_fields(&mut r, &c);
    r.field("step", tau.step)
        .field("height", tau.height)
        .field("translations", tau.translations.len())
        .field("shifts", tau.shifts.len())
        .field("exhaustive", tau.translations.exhaustive);
    r.verdict(tau.verdict.clone());
    r.inconclusive = tau.status == Status::Inconclusive;
    Ok(r)
}

pub fn rectify(n: u64, modulus: u64, point: u32, offset: &str, seed: u64, limits: &Limits) -> Result<Report> {
    let off: Rational = offset
        .parse()
        .map_err(|_| Error::Config(format!("bad offset {offset:?}")))?;
    let scaled = off * modulus as i64;
    if !scaled.is_integer() {
        return Err(Error::Config(format!("offset {off} is not in (1/{modulus})Z/Z")));
    }
    if point as u64 >= n {
        return Err(Error::Config(format!("point {point} is not in Z/{n}")));
    }
    let x = Arc::new(make_dk_within(&FiniteAbelianGroup::cyclic(n), 1, limits.n_max, limits)?);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h: Vec<TorusValue> = (0..n).map(|_| TorusValue::circle(rng.gen_range(-2..=2), 64)).collect();
    let rho = nilcube::cocycles::coboundary(&x, 2, Coefficients::circle(), &h)?.to_cyclic(modulus)?;
    let ext = Extension::new(x.clone(), &rho)?;
    let a = ext.group().clone();
    let to_z = |v: &TorusValue| -> Result<i64> {
        let r = v.torus_part()[0] * modulus as i64;
        if !r.is_integer() {
            return Err(Error::Config(format!("{v} is not in (1/{modulus})Z/Z")));
        }
        Ok(r.to_integer())
    };
    // φ(x) = (x, −h(x)) is a morphism into M(δh)
    let phi = (0..n as u32)
        .map(|p| Ok(ext.point(p, a.index_of(&a.reduce(vec![to_z(&h[p as usize].neg())?])))))
        .collect::<Result<Vec<u32>>>()?;
    let mut bumped = phi.clone();
    let (p0, a0) = ext.split_point(bumped[point as usize]);
    bumped[point as usize] = ext.point(p0, a.index_of(&a.reduce(vec![a.element(a0)[0] + scaled.to_integer()])));
    let id: Vec<u32> = (0..n as u32).collect();
    let out = rectify_lifted_map(&ext, &x, &id, &bumped)?;
    let mut r = Report::new("rectify");
    r.field("base", format!("D1(Z/{n})"))
        .field("coefficients", format!("Z/{modulus}"))
        .field("perturbed_point", point)
        .field("offset", off);
    r.verdict(out.morphism.clone());
    r.verdict(out.lifts.clone());
    r.verdict(match constant_offset(&ext, &phi, &out.phi) {
        Some(c) => Verdict::pass("constant-offset", format!("the result is the unperturbed map plus {c}")),
        None => Verdict::fail("constant-offset", "the result differs from the unperturbed map by a non-constant"),
    });
    Ok(r)
}

pub fn invsys(chain: &str, limits: &Limits) -> Result<Report> {
    let orders: Vec<u64> = parse_list(chain, "chain")?;
    if orders.is_empty() {
        return Err(Error::Config("empty chain".into()));
    }
    let spaces = orders
        .iter()
        .map(|&n| make_dk_within(&FiniteAbelianGroup::cyclic(n), 1, limits.n_max, limits).map(Arc::new))
        .collect::<Result<Vec<_>>>()?;
    let transitions = orders
        .windows(2)
        .map(|w| reduction_map(w[0], w[1]))
        .collect::<Result<Vec<_>>>()?;
    let last = orders.len() - 1;
    let mut direct = vec![(0, last, reduction_map(orders[0], orders[last])?)];
    for (i, &n) in orders.iter().enumerate() {
        direct.push((i, i, (0..n as u32).collect()));
    }
    let rep = verify_inverse_system(&spaces, &transitions, &direct)?;
    let mut r = Report::new("invsys");
    r.field("chain", chain);
    push_all(&mut r, rep.verdicts());
    Ok(r)
}
