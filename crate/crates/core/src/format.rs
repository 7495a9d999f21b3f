//! Versioned line-oriented text formats for spaces, groups, filtered groups
//! and cocycles. Writers are deterministic and readers are strict, so
//! `write(read(text)) == text` for any text a writer produced.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::cocycles::{Coefficients, Cocycle};
use crate::cubeset::CubeSet;
use crate::cubespace::Cubespace;
use crate::error::{Error, Result};
use crate::filtered::FilteredGroup;
use crate::groups::{FiniteAbelianGroup, Rational, TorusValue};

pub use crate::report::REPORT_HEADER;

pub const SPACE_HEADER: &str = "nilcube-space v1";
pub const GROUP_HEADER: &str = "nilcube-group v1";
pub const FILTERED_HEADER: &str = "nilcube-filtered v1";
pub const COCYCLE_HEADER: &str = "nilcube-cocycle v1";

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            inner: text.lines().enumerate(),
            line: 0,
        }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse {
            line: self.line,
            msg: msg.into(),
        }
    }

    fn next(&mut self) -> Result<&'a str> {
        match self.inner.next() {
            Some((i, l)) => {
                self.line = i + 1;
                Ok(l)
            }
            None => Err(Error::Parse {
                line: self.line + 1,
                msg: "unexpected end of file".into(),
            }),
        }
    }

    fn header(&mut self, expected: &str) -> Result<()> {
        let l = self.next()?;
        if l != expected {
            let kind = expected.split(' ').next().unwrap_or(expected);
            return Err(if l.starts_with(kind) {
                self.err(format!("version mismatch: got {l:?}, expected {expected:?}"))
            } else {
                self.err(format!("expected header {expected:?}"))
            });
        }
        Ok(())
    }

    /// The words after `key`.
    fn keyed(&mut self, key: &str) -> Result<Vec<&'a str>> {
        let l = self.next()?;
        let mut words = l.split(' ');
        if words.next() != Some(key) {
            return Err(self.err(format!("expected a {key:?} record")));
        }
        Ok(words.filter(|w| !w.is_empty()).collect())
    }

    fn single<T: FromStr>(&mut self, key: &str) -> Result<T> {
        let words = self.keyed(key)?;
        match words.as_slice() {
            [w] => w.parse().map_err(|_| self.err(format!("bad {key} value {w:?}"))),
            _ => Err(self.err(format!("{key} takes one value"))),
        }
    }

    fn numbers<T: FromStr>(&self, words: &[&str]) -> Result<Vec<T>> {
        words
            .iter()
            .map(|w| w.parse().map_err(|_| self.err(format!("bad number {w:?}"))))
            .collect()
    }

    fn end(&mut self) -> Result<()> {
        if self.next()? != "end" {
            return Err(self.err("expected end"));
        }
        if self.inner.next().is_some() {
            return Err(self.err("trailing content after end"));
        }
        Ok(())
    }
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(" ")
}

pub fn write_space(x: &Cubespace) -> String {
    let mut s = String::new();
    writeln!(s, "{SPACE_HEADER}").unwrap();
    writeln!(s, "points {}", x.len()).unwrap();
    writeln!(s, "n_max {}", x.n_max()).unwrap();
    match x.declared_step() {
        Some(k) => writeln!(s, "step {k}").unwrap(),
        None => writeln!(s, "step none").unwrap(),
    }
    for l in x.labels() {
        writeln!(s, "label {l}").unwrap();
    }
    for n in 0..=x.n_max() {
        let set = x.cubes(n);
        writeln!(s, "cubes {n} {}", set.len()).unwrap();
        for q in set.iter() {
            s.push_str(&join(&q));
            s.push('\n');
        }
    }
    s.push_str("end\n");
    s
}

pub fn read_space(text: &str) -> Result<Cubespace> {
    let mut r = Lines::new(text);
    r.header(SPACE_HEADER)?;
    let points: usize = r.single("points")?;
    let n_max: usize = r.single("n_max")?;
    let step_word: String = r.single("step")?;
    let step = match step_word.as_str() {
        "none" => None,
        w => Some(w.parse().map_err(|_| r.err("bad step"))?),
    };
    let mut labels = Vec::with_capacity(points);
    for _ in 0..points {
        let l = r.next()?;
        let label = l.strip_prefix("label ").ok_or_else(|| r.err("expected a label record"))?;
        labels.push(label.to_string());
    }
    let mut sets = vec![];
    for n in 0..=n_max {
        let w = r.keyed("cubes")?;
        let [dim, count] = r.numbers::<usize>(&w)?[..] else {
            return Err(r.err("cubes takes a dimension and a count"));
        };
        if dim != n {
            return Err(r.err(format!("expected {n}-cubes, got {dim}")));
        }
        let mut cubes = Vec::with_capacity(count);
        let mut last: Option<Vec<u32>> = None;
        for _ in 0..count {
            let l = r.next()?;
            let q: Vec<u32> = r.numbers(&l.split(' ').collect::<Vec<_>>())?;
            if q.len() != 1 << n {
                return Err(r.err(format!("{n}-cube needs {} values", 1 << n)));
            }
            if q.iter().any(|&p| p as usize >= points) {
                return Err(r.err("cube refers to a missing point"));
            }
            if last.as_ref().is_some_and(|prev| *prev >= q) {
                return Err(r.err("cubes must be listed in increasing order without repeats"));
            }
            last = Some(q.clone());
            cubes.push(q);
        }
        sets.push(CubeSet::from_cubes(points, n, &cubes).map_err(|e| r.err(e.to_string()))?);
    }
    r.end()?;
    Cubespace::new(labels, sets, step)
}

pub fn write_group(a: &FiniteAbelianGroup) -> String {
    format!("{GROUP_HEADER}\nfactors {}\nend\n", join(a.factors()))
}

pub fn read_group(text: &str) -> Result<FiniteAbelianGroup> {
    let mut r = Lines::new(text);
    r.header(GROUP_HEADER)?;
    let w = r.keyed("factors")?;
    let f: Vec<u64> = r.numbers(&w)?;
    let g = FiniteAbelianGroup::new(&f).map_err(|e| r.err(e.to_string()))?;
    r.end()?;
    Ok(g)
}

pub fn write_filtered(g: &FilteredGroup) -> String {
    let mut s = String::new();
    writeln!(s, "{FILTERED_HEADER}").unwrap();
    writeln!(s, "order {}", g.order()).unwrap();
    for l in g.labels() {
        writeln!(s, "label {l}").unwrap();
    }
    let n = g.order();
    for row in g.table().chunks(n) {
        writeln!(s, "row {}", join(row)).unwrap();
    }
    writeln!(s, "terms {}", g.degree() + 1).unwrap();
    for i in 1..=g.degree() + 1 {
        writeln!(s, "term {}", join(&g.term(i))).unwrap();
    }
    s.push_str("end\n");
    s
}

pub fn read_filtered(text: &str) -> Result<FilteredGroup> {
    let mut r = Lines::new(text);
    r.header(FILTERED_HEADER)?;
    let n: usize = r.single("order")?;
    let mut labels = vec![];
    for _ in 0..n {
        let l = r.next()?;
        labels.push(l.strip_prefix("label ").ok_or_else(|| r.err("expected a label record"))?.to_string());
    }
    let mut table = Vec::with_capacity(n * n);
    for _ in 0..n {
        let w = r.keyed("row")?;
        let row: Vec<u32> = r.numbers(&w)?;
        if row.len() != n {
            return Err(r.err(format!("row needs {n} entries")));
        }
        table.extend(row);
    }
    let terms: usize = r.single("terms")?;
    let mut filtration = vec![];
    for _ in 0..terms {
        let w = r.keyed("term")?;
        filtration.push(r.numbers(&w)?);
    }
    let line = r.line;
    r.end()?;
    FilteredGroup::new(labels, table, filtration).map_err(|e| Error::Parse {
        line,
        msg: e.to_string(),
    })
}

/// `finite;torus`, e.g. `1,0;` or `;3/64`.
pub fn write_value(v: &TorusValue) -> String {
    let f: Vec<String> = v.finite_part().iter().map(i64::to_string).collect();
    let t: Vec<String> = v.torus_part().iter().map(Rational::to_string).collect();
    format!("{};{}", f.join(","), t.join(","))
}

pub fn parse_value(s: &str, coeffs: &Coefficients) -> Result<TorusValue> {
    let bad = || Error::Config(format!("bad value {s:?}"));
    let (f, t) = s.split_once(';').ok_or_else(bad)?;
    let finite: Vec<i64> = if f.is_empty() {
        vec![]
    } else {
        f.split(',').map(|w| w.parse().map_err(|_| bad())).collect::<Result<_>>()?
    };
    let torus: Vec<Rational> = if t.is_empty() {
        vec![]
    } else {
        t.split(',').map(|w| w.parse().map_err(|_| bad())).collect::<Result<_>>()?
    };
    if finite.len() != coeffs.finite.factors().len() || torus.len() != coeffs.torus_dim {
        return Err(Error::Config(format!("value {s:?} does not fit the coefficient group")));
    }
    coeffs.finite.check(&finite)?;
    if torus.iter().any(|r| *r < Rational::from_integer(0) || *r >= Rational::from_integer(1)) {
        return Err(Error::Config(format!("torus coordinates of {s:?} must lie in [0,1)")));
    }
    Ok(TorusValue::new(&coeffs.finite, finite, torus))
}

pub fn write_coefficients(c: &Coefficients) -> String {
    format!("finite {} torus {}", join(c.finite.factors()), c.torus_dim)
}

pub fn write_cocycle(rho: &Cocycle) -> String {
    let mut s = String::new();
    writeln!(s, "{COCYCLE_HEADER}").unwrap();
    writeln!(s, "k {}", rho.k()).unwrap();
    writeln!(s, "coefficients {}", write_coefficients(rho.coefficients())).unwrap();
    writeln!(s, "values {}", rho.len()).unwrap();
    for (i, v) in rho.values().iter().enumerate() {
        writeln!(s, "{i} {}", write_value(v)).unwrap();
    }
    s.push_str("end\n");
    s
}

/// Reads a table against the space whose cube order it indexes.
pub fn read_cocycle(text: &str, x: &Cubespace) -> Result<Cocycle> {
    let mut r = Lines::new(text);
    r.header(COCYCLE_HEADER)?;
    let k: usize = r.single("k")?;
    let w = r.keyed("coefficients")?;
    let tpos = w.iter().position(|&t| t == "torus").ok_or_else(|| r.err("missing torus count"))?;
    if w.first() != Some(&"finite") || tpos + 2 != w.len() {
        return Err(r.err("coefficients read `finite <factors> torus <d>`"));
    }
    let factors: Vec<u64> = r.numbers(&w[1..tpos])?;
    let torus_dim: usize = r.numbers(&w[tpos + 1..])?[0];
    let coeffs = Coefficients {
        finite: FiniteAbelianGroup::new(&factors).map_err(|e| r.err(e.to_string()))?,
        torus_dim,
    };
    let count: usize = r.single("values")?;
    let mut values = Vec::with_capacity(count);
    for i in 0..count {
        let l = r.next()?;
        let (idx, val) = l.split_once(' ').ok_or_else(|| r.err("expected `index value`"))?;
        if idx.parse::<usize>().ok() != Some(i) {
            return Err(r.err(format!("expected index {i}")));
        }
        values.push(parse_value(val, &coeffs).map_err(|e| r.err(e.to_string()))?);
    }
    let line = r.line;
    r.end()?;
    Cocycle::new(x, k, coeffs, values).map_err(|e| Error::Parse {
        line,
        msg: e.to_string(),
    })
}
