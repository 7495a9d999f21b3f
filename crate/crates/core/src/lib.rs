//! Finite nilspaces: explicit cube sets, Host–Kra cube groups, canonical
//! factors and structure groups, cocycles with their extensions, and
//! translation groups, all computed exactly.
//!
//! Every object is finite and every check is exhaustive. Measures are
//! uniform counting measures, so "measure preserving" means constant
//! fibre cardinality.

pub mod catalog;
pub mod cocycles;
pub mod cube;
pub mod cubeset;
pub mod cubespace;
pub mod error;
pub mod filtered;
pub mod format;
pub mod groups;
pub(crate) mod linalg;
pub mod report;
pub mod structure;
pub mod translations;

pub use cubespace::Cubespace;
pub use error::{Error, Result};

/// Enumeration budgets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Limits {
    /// Highest cube dimension stored.
    pub n_max: usize,
    pub max_group_order: usize,
    /// Largest cube set a constructor may materialize.
    pub max_cubes: u128,
    /// Exhaustive bijection search only up to this many points.
    pub max_bijection_points: usize,
    /// Largest cube set a cocycle table or linear system may range over.
    pub max_cocycle_cubes: usize,
    /// Cap on generated translations in the non-exhaustive search.
    pub max_translations: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            n_max: 3,
            max_group_order: 4096,
            max_cubes: 50_000_000,
            max_bijection_points: 8,
            max_cocycle_cubes: 4096,
            max_translations: 100_000,
        }
    }
}

impl Limits {
    /// Defaults overridden by `NILCUBE_NMAX`, `NILCUBE_MAX_GROUP`,
    /// `NILCUBE_MAX_CUBES`, `NILCUBE_MAX_PERM_POINTS` and
    /// `NILCUBE_MAX_COCYCLE_CUBES` when set.
    pub fn from_env() -> Result<Self> {
        fn read<T: std::str::FromStr>(key: &str, slot: &mut T) -> Result<()> {
            if let Ok(v) = std::env::var(key) {
                *slot = v
                    .trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("{key}={v} is not a number")))?;
            }
            Ok(())
        }
        let mut l = Self::default();
        read("NILCUBE_NMAX", &mut l.n_max)?;
        read("NILCUBE_MAX_GROUP", &mut l.max_group_order)?;
        read("NILCUBE_MAX_CUBES", &mut l.max_cubes)?;
        read("NILCUBE_MAX_PERM_POINTS", &mut l.max_bijection_points)?;
        read("NILCUBE_MAX_COCYCLE_CUBES", &mut l.max_cocycle_cubes)?;
        Ok(l)
    }
}
