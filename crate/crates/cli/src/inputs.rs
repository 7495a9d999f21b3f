//! Building spaces and cocycles from command-line arguments.

use std::path::Path;
use std::sync::Arc;

use nilcube::catalog::{self, CatalogSpace};
use nilcube::cocycles::{coboundary, Coefficients, Cocycle};
use nilcube::filtered::FilteredGroup;
use nilcube::format;
use nilcube::groups::{FiniteAbelianGroup, TorusValue};
use nilcube::{Cubespace, Error, Limits, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{CocycleArgs, SpaceArgs, SpaceKind};

pub fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(str::trim)
        .filter(|w| !w.is_empty())
        .map(|w| w.parse().map_err(|_| Error::Config(format!("bad {what} entry {w:?}"))))
        .collect()
}

pub fn parse_group(s: &str) -> Result<FiniteAbelianGroup> {
    FiniteAbelianGroup::new(&parse_list::<u64>(s, "group")?)
}

pub fn parse_coefficients(s: &str) -> Result<Coefficients> {
    if s == "circle" {
        Ok(Coefficients::circle())
    } else {
        Ok(Coefficients::finite(parse_group(s)?))
    }
}

/// A space together with the filtered group it came from, when it did.
pub fn build_space(args: &SpaceArgs, limits: &Limits) -> Result<CatalogSpace> {
    let n_max = limits.n_max;
    match args.space {
        SpaceKind::Dk => {
            let a = parse_group(&args.group)?;
            let k = args.step.unwrap_or(1);
            let mut c = catalog::dk(&a, k, n_max, limits)?;
            c.filtered = Some((FilteredGroup::abelian(&a, k)?, vec![0]));
            Ok(c)
        }
        SpaceKind::Heis => catalog::heis(args.p, n_max, limits),
        SpaceKind::CyclicDeg2 => catalog::cyclic_deg2(args.n, n_max, limits),
        SpaceKind::Quotient => {
            let path = args
                .filtered
                .as_deref()
                .ok_or_else(|| Error::Config("--space quotient needs --filtered".into()))?;
            let g = format::read_filtered(&read_file(path)?)?;
            let gamma = match &args.gamma {
                Some(s) => parse_list(s, "gamma")?,
                None => vec![g.identity()],
            };
            catalog::quotient(g, gamma, &path.display().to_string(), n_max, limits)
        }
        SpaceKind::Split => {
            let a = parse_group(&args.group)?;
            let ext = catalog::split_extension(args.n, &a, n_max, limits)?;
            Ok(CatalogSpace {
                name: format!("split({},{a})", args.n),
                space: ext.materialize(limits)?,
                filtered: None,
            })
        }
        SpaceKind::Twisted => {
            let ext = catalog::twisted_extension(args.n, args.m, n_max, limits)?;
            Ok(CatalogSpace {
                name: format!("twisted({},{})", args.n, args.m),
                space: ext.materialize(limits)?,
                filtered: None,
            })
        }
        SpaceKind::File => {
            let path = args
                .file
                .as_deref()
                .ok_or_else(|| Error::Config("--space file needs --file".into()))?;
            let space = format::read_space(&read_file(path)?)?;
            Ok(CatalogSpace {
                name: path.display().to_string(),
                space,
                filtered: None,
            })
        }
    }
}

/// Small random coboundary: `g` uniform on a finite group, or in
/// `{−1, 0, 1}/64` on the circle.
pub fn random_coboundary(x: &Cubespace, k: usize, coeffs: Coefficients, seed: u64) -> Result<Cocycle> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g: Vec<TorusValue> = (0..x.len())
        .map(|_| {
            if coeffs.is_finite() {
                let i = rng.gen_range(0..coeffs.finite.order() as usize);
                coeffs.element(coeffs.finite.element(i))
            } else {
                TorusValue::circle(rng.gen_range(-1..=1), 64)
            }
        })
        .collect();
    coboundary(x, k, coeffs, &g)
}

pub fn build_cocycle(x: &Cubespace, args: &CocycleArgs) -> Result<Cocycle> {
    if let Some(path) = &args.cocycle {
        return format::read_cocycle(&read_file(path)?, x);
    }
    if let Some(m) = args.carry {
        return catalog::carry_cocycle(x, x.len() as u64, m);
    }
    let coeffs = parse_coefficients(&args.coeff)?;
    match args.coboundary {
        Some(seed) => random_coboundary(x, args.k, coeffs, seed),
        None => Cocycle::zero(x, args.k, coeffs),
    }
}

pub fn shared(c: &CatalogSpace) -> Arc<Cubespace> {
    Arc::new(c.space.clone())
}
