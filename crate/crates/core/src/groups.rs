//! Finite abelian groups, exact circle values, the metric d₂ and
//! concentrated averaging.

use std::cmp::Ordering;
use std::fmt;

use num_integer::{Integer, Roots};
use num_rational::Ratio;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = Ratio<i64>;

/// Group element as residues, one per cyclic factor.
pub type Element = Vec<i64>;

/// Direct sum of cyclic groups `Z/f₀ ⊕ Z/f₁ ⊕ …`.
///
/// The factor list is a presentation, not necessarily in invariant-factor
/// form; use [`FiniteAbelianGroup::invariant_factors`] to normalize.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FiniteAbelianGroup {
    factors: Vec<u64>,
}

impl FiniteAbelianGroup {
    /// Factors equal to 1 are dropped; a zero factor is rejected.
    pub fn new(factors: &[u64]) -> Result<Self> {
        if factors.iter().any(|&f| f == 0) {
            return Err(Error::structural("cyclic factor of order 0"));
        }
        Ok(Self {
            factors: factors.iter().copied().filter(|&f| f > 1).collect(),
        })
    }

    pub fn trivial() -> Self {
        Self { factors: vec![] }
    }

    pub fn cyclic(n: u64) -> Self {
        Self::new(&[n]).expect("nonzero order")
    }

    pub fn factors(&self) -> &[u64] {
        &self.factors
    }

    pub fn order(&self) -> u64 {
        self.factors.iter().product()
    }

    pub fn is_trivial(&self) -> bool {
        self.factors.is_empty()
    }

    /// `d₁ | d₂ | … | d_r`, ascending, all at least 2.
    pub fn invariant_factors(&self) -> Vec<u64> {
        invariant_factors(&self.factors)
    }

    pub fn normalized(&self) -> Self {
        Self {
            factors: self.invariant_factors(),
        }
    }

    pub fn is_isomorphic(&self, other: &Self) -> bool {
        self.invariant_factors() == other.invariant_factors()
    }

    pub fn zero(&self) -> Element {
        vec![0; self.factors.len()]
    }

    pub fn reduce(&self, mut x: Element) -> Element {
        for (c, &f) in x.iter_mut().zip(&self.factors) {
            *c = c.rem_euclid(f as i64);
        }
        x
    }

    pub fn check(&self, x: &[i64]) -> Result<()> {
        if x.len() != self.factors.len() {
            return Err(Error::structural(format!(
                "element has {} coordinates, group has {} factors",
                x.len(),
                self.factors.len()
            )));
        }
        for (&c, &f) in x.iter().zip(&self.factors) {
            if c < 0 || c >= f as i64 {
                return Err(Error::structural(format!("residue {c} not reduced mod {f}")));
            }
        }
        Ok(())
    }

    pub fn add(&self, x: &[i64], y: &[i64]) -> Element {
        x.iter()
            .zip(y)
            .zip(&self.factors)
            .map(|((a, b), &f)| (a + b).rem_euclid(f as i64))
            .collect()
    }

    pub fn sub(&self, x: &[i64], y: &[i64]) -> Element {
        x.iter()
            .zip(y)
            .zip(&self.factors)
            .map(|((a, b), &f)| (a - b).rem_euclid(f as i64))
            .collect()
    }

    pub fn neg(&self, x: &[i64]) -> Element {
        x.iter()
            .zip(&self.factors)
            .map(|(a, &f)| (-a).rem_euclid(f as i64))
            .collect()
    }

    pub fn scale(&self, x: &[i64], m: i64) -> Element {
        x.iter()
            .zip(&self.factors)
            .map(|(a, &f)| (a * m).rem_euclid(f as i64))
            .collect()
    }

    /// Mixed-radix index with the first factor most significant, so index
    /// order is lexicographic order on residue tuples.
    pub fn index_of(&self, x: &[i64]) -> usize {
        x.iter()
            .zip(&self.factors)
            .fold(0usize, |acc, (&c, &f)| acc * f as usize + c as usize)
    }

    pub fn element(&self, mut idx: usize) -> Element {
        let mut out = vec![0; self.factors.len()];
        for (c, &f) in out.iter_mut().zip(&self.factors).rev() {
            *c = (idx % f as usize) as i64;
            idx /= f as usize;
        }
        out
    }

    pub fn elements(&self) -> impl Iterator<Item = Element> + '_ {
        (0..self.order() as usize).map(move |i| self.element(i))
    }

    /// `Σ_v (−1)^{|v|} f(v)` over a table indexed by vertex bitmask.
    pub fn sigma(&self, f: &[Element]) -> Result<Element> {
        cube_dim(f.len())?;
        let mut acc = self.zero();
        for (v, x) in f.iter().enumerate() {
            acc = if v.count_ones() % 2 == 0 {
                self.add(&acc, x)
            } else {
                self.sub(&acc, x)
            };
        }
        Ok(acc)
    }

    /// Order of an element.
    pub fn element_order(&self, x: &[i64]) -> u64 {
        x.iter().zip(&self.factors).fold(1u64, |acc, (&c, &f)| {
            let o = f / (c as u64).gcd(&f);
            acc.lcm(&o)
        })
    }
}

impl fmt::Display for FiniteAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, x) in self.factors.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "]")
    }
}

pub(crate) fn cube_dim(len: usize) -> Result<usize> {
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::structural(format!(
            "table of length {len} is not indexed by a discrete cube"
        )));
    }
    Ok(len.trailing_zeros() as usize)
}

/// Prime factorization by trial division.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = vec![];
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Normalize any list of cyclic orders to invariant factors, ascending.
pub fn invariant_factors(factors: &[u64]) -> Vec<u64> {
    let mut by_prime: std::collections::BTreeMap<u64, Vec<u32>> = Default::default();
    for &f in factors {
        for (p, e) in factorize(f) {
            by_prime.entry(p).or_default().push(e);
        }
    }
    let len = by_prime.values().map(Vec::len).max().unwrap_or(0);
    let mut out = vec![1u64; len];
    for (p, mut es) in by_prime {
        es.sort_unstable_by(|a, b| b.cmp(a));
        for (slot, e) in out.iter_mut().zip(es) {
            *slot *= p.pow(e);
        }
    }
    out.reverse();
    out
}

/// Minimal number of generators.
pub fn grp_rank(a: &FiniteAbelianGroup) -> usize {
    a.invariant_factors().len()
}

/// An abstract group recovered from an addition table, with the
/// identification between its elements and the table's labels.
#[derive(Debug, Clone)]
pub struct CayleyDecomposition {
    pub group: FiniteAbelianGroup,
    /// abstract element index → table label
    pub to_table: Vec<usize>,
    /// table label → abstract element index
    pub from_table: Vec<usize>,
}

/// Decompose an abelian group given by its addition table
/// (`table[a * n + b] = a + b`) into invariant-factor form.
pub fn decompose_cayley(n: usize, table: &[usize], zero: usize) -> Result<CayleyDecomposition> {
    if table.len() != n * n || zero >= n {
        return Err(Error::structural("addition table has the wrong shape"));
    }
    let add = |a: usize, b: usize| table[a * n + b];
    let mul = |x: usize, m: u64| {
        let mut acc = zero;
        for _ in 0..m {
            acc = add(acc, x);
        }
        acc
    };
    let order = |x: usize| {
        let mut k = 1u64;
        let mut y = x;
        while y != zero {
            y = add(y, x);
            k += 1;
            if k > n as u64 {
                return None;
            }
        }
        Some(k)
    };
    let mut orders = Vec::with_capacity(n);
    for x in 0..n {
        orders.push(order(x).ok_or_else(|| Error::structural("element of infinite order"))?);
    }

    // per prime: list of (generator, exponent) with exponents non-increasing
    let mut prime_bases: Vec<(u64, Vec<(usize, u32)>)> = vec![];
    for (p, _) in factorize(n as u64) {
        let part: Vec<usize> = (0..n)
            .filter(|&x| factorize(orders[x]).iter().all(|&(q, _)| q == p))
            .collect();
        let mut span = vec![zero];
        let mut in_span = vec![false; n];
        in_span[zero] = true;
        let mut basis = vec![];
        while span.len() < part.len() {
            // element of maximal order modulo the current span
            let rel_order = |x: usize| {
                let mut k = 0u32;
                let mut y = x;
                while !in_span[y] {
                    y = mul(y, p);
                    k += 1;
                }
                k
            };
            let (x, e) = part
                .iter()
                .map(|&x| (x, rel_order(x)))
                .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
                .expect("nonempty part");
            let pe = p.pow(e);
            let target = mul(x, pe);
            let h = span
                .iter()
                .copied()
                .find(|&h| mul(h, pe) == target)
                .ok_or_else(|| Error::structural("table is not an abelian group"))?;
            // x - h
            let neg_h = (0..n).find(|&y| add(y, h) == zero).expect("inverse");
            let g = add(x, neg_h);
            if orders[g] != pe {
                return Err(Error::structural("table is not an abelian group"));
            }
            let mut next = Vec::with_capacity(span.len() * pe as usize);
            for &s in &span {
                let mut y = s;
                for _ in 0..pe {
                    next.push(y);
                    y = add(y, g);
                }
            }
            next.sort_unstable();
            next.dedup();
            if next.len() != span.len() * pe as usize {
                return Err(Error::structural("table is not an abelian group"));
            }
            for &y in &next {
                in_span[y] = true;
            }
            span = next;
            basis.push((g, e));
        }
        prime_bases.push((p, basis));
    }

    let len = prime_bases.iter().map(|(_, b)| b.len()).max().unwrap_or(0);
    let mut gens = vec![(zero, 1u64); len];
    for (p, basis) in &prime_bases {
        for (slot, &(g, e)) in gens.iter_mut().zip(basis) {
            slot.0 = add(slot.0, g);
            slot.1 *= p.pow(e);
        }
    }
    gens.reverse();
    let group = FiniteAbelianGroup::new(&gens.iter().map(|g| g.1).collect::<Vec<_>>())?;
    let mut to_table = Vec::with_capacity(n);
    let mut from_table = vec![usize::MAX; n];
    for (idx, el) in group.elements().enumerate() {
        let mut y = zero;
        for (&c, &(g, _)) in el.iter().zip(&gens) {
            y = add(y, mul(g, c as u64));
        }
        if from_table[y] != usize::MAX {
            return Err(Error::structural("table is not an abelian group"));
        }
        from_table[y] = idx;
        to_table.push(y);
    }
    if to_table.len() != n {
        return Err(Error::structural("table is not an abelian group"));
    }
    // the map must be a homomorphism
    for a in 0..n {
        for b in 0..n {
            let s = group.add(&group.element(from_table[a]), &group.element(from_table[b]));
            if to_table[group.index_of(&s)] != add(a, b) {
                return Err(Error::structural("table is not an abelian group"));
            }
        }
    }
    Ok(CayleyDecomposition {
        group,
        to_table,
        from_table,
    })
}

/// Reduce a rational to `[0, 1)`.
pub fn mod_one(r: Rational) -> Rational {
    r - r.floor()
}

/// Lift of `r mod 1` into `(−1/2, 1/2]`.
pub fn centered(r: Rational) -> Rational {
    let m = mod_one(r);
    if m > Rational::new(1, 2) {
        m - 1
    } else {
        m
    }
}

/// Shape of a coefficient group `F × (Q/Z)^d`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TorusShape {
    pub finite: Vec<u64>,
    pub torus_dim: usize,
}

/// A point of `F × (Q/Z)^d` with exact rational torus coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TorusValue {
    finite_moduli: Vec<u64>,
    finite: Vec<i64>,
    torus: Vec<Rational>,
}

impl TorusValue {
    pub fn new(finite_group: &FiniteAbelianGroup, finite: Element, torus: Vec<Rational>) -> Self {
        let finite = finite_group.reduce(finite);
        Self {
            finite_moduli: finite_group.factors().to_vec(),
            finite,
            torus: torus.into_iter().map(mod_one).collect(),
        }
    }

    /// Pure torus value.
    pub fn torus(coords: Vec<Rational>) -> Self {
        Self::new(&FiniteAbelianGroup::trivial(), vec![], coords)
    }

    /// Single circle coordinate `p/q`.
    pub fn circle(p: i64, q: i64) -> Self {
        Self::torus(vec![Rational::new(p, q)])
    }

    pub fn zero(shape: &TorusShape) -> Self {
        Self {
            finite_moduli: shape.finite.clone(),
            finite: vec![0; shape.finite.len()],
            torus: vec![Rational::zero(); shape.torus_dim],
        }
    }

    pub fn shape(&self) -> TorusShape {
        TorusShape {
            finite: self.finite_moduli.clone(),
            torus_dim: self.torus.len(),
        }
    }

    pub fn finite_part(&self) -> &[i64] {
        &self.finite
    }

    pub fn torus_part(&self) -> &[Rational] {
        &self.torus
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.finite_moduli != other.finite_moduli || self.torus.len() != other.torus.len() {
            return Err(Error::structural("torus values from different coefficient groups"));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(self.add(other))
    }

    /// Panics when shapes differ; use [`TorusValue::try_add`] for unchecked input.
    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.shape(), other.shape(), "torus shape mismatch");
        Self {
            finite_moduli: self.finite_moduli.clone(),
            finite: self
                .finite
                .iter()
                .zip(&other.finite)
                .zip(&self.finite_moduli)
                .map(|((a, b), &m)| (a + b).rem_euclid(m as i64))
                .collect(),
            torus: self
                .torus
                .iter()
                .zip(&other.torus)
                .map(|(a, b)| mod_one(a + b))
                .collect(),
        }
    }

    pub fn neg(&self) -> Self {
        Self {
            finite_moduli: self.finite_moduli.clone(),
            finite: self
                .finite
                .iter()
                .zip(&self.finite_moduli)
                .map(|(a, &m)| (-a).rem_euclid(m as i64))
                .collect(),
            torus: self.torus.iter().map(|a| mod_one(-a)).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, m: i64) -> Self {
        Self {
            finite_moduli: self.finite_moduli.clone(),
            finite: self
                .finite
                .iter()
                .zip(&self.finite_moduli)
                .map(|(a, &q)| (a * m).rem_euclid(q as i64))
                .collect(),
            torus: self.torus.iter().map(|a| mod_one(a * m)).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.finite.iter().all(|&c| c == 0) && self.torus.iter().all(Zero::is_zero)
    }

    /// Least common denominator of the torus coordinates.
    pub fn denominator(&self) -> i64 {
        self.torus.iter().fold(1, |acc, r| acc.lcm(r.denom()))
    }

    /// `Σ_v (−1)^{|v|} f(v)`.
    pub fn sigma(f: &[TorusValue]) -> Result<TorusValue> {
        cube_dim(f.len())?;
        let mut acc = TorusValue::zero(&f[0].shape());
        for (v, x) in f.iter().enumerate() {
            acc.same_shape(x)?;
            acc = if v.count_ones() % 2 == 0 {
                acc.add(x)
            } else {
                acc.sub(x)
            };
        }
        Ok(acc)
    }
}

impl fmt::Display for TorusValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.finite.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ";")?;
        for (i, r) in self.torus.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}/{}", r.numer(), r.denom())?;
        }
        write!(f, ")")
    }
}

/// Value of d₂. Finite distances are stored squared so they stay rational.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Distance {
    Finite { squared: Rational },
    Infinite,
}

impl Distance {
    pub fn zero() -> Self {
        Distance::Finite {
            squared: Rational::zero(),
        }
    }

    pub fn from_value(r: Rational) -> Self {
        assert!(!r.is_negative(), "negative distance");
        Distance::Finite { squared: r * r }
    }

    pub fn squared(&self) -> Option<Rational> {
        match self {
            Distance::Finite { squared } => Some(*squared),
            Distance::Infinite => None,
        }
    }

    /// The distance itself when its square root is rational.
    pub fn value(&self) -> Option<Rational> {
        let sq = self.squared()?;
        let (n, d) = (*sq.numer(), *sq.denom());
        let (rn, rd) = (n.sqrt(), d.sqrt());
        (rn * rn == n && rd * rd == d).then(|| Rational::new(rn, rd))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Distance::Infinite)
    }

    /// `self < r`
    pub fn lt(&self, r: Rational) -> bool {
        *self < Distance::from_value(r)
    }

    /// `self ≤ r`
    pub fn le(&self, r: Rational) -> bool {
        *self <= Distance::from_value(r)
    }
}

impl PartialOrd for Distance {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Distance {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Distance::Infinite, Distance::Infinite) => Ordering::Equal,
            (Distance::Infinite, _) => Ordering::Greater,
            (_, Distance::Infinite) => Ordering::Less,
            (Distance::Finite { squared: a }, Distance::Finite { squared: b }) => a.cmp(b),
        }
    }
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distance::Infinite => write!(f, "inf"),
            Distance::Finite { squared } => match self.value() {
                Some(v) => write!(f, "{}/{}", v.numer(), v.denom()),
                None => write!(f, "sqrt({}/{})", squared.numer(), squared.denom()),
            },
        }
    }
}

pub fn d2(x: &TorusValue, y: &TorusValue) -> Result<Distance> {
    x.same_shape(y)?;
    if x.finite != y.finite {
        return Ok(Distance::Infinite);
    }
    let squared = x
        .torus
        .iter()
        .zip(&y.torus)
        .map(|(a, b)| {
            let c = centered(a - b);
            c * c
        })
        .fold(Rational::zero(), |acc, s| acc + s);
    Ok(Distance::Finite { squared })
}

fn quarter() -> Rational {
    Rational::new(1, 4)
}

fn midpoint(a: &TorusValue, b: &TorusValue) -> TorusValue {
    let mut out = a.clone();
    for (o, (x, y)) in out.torus.iter_mut().zip(a.torus.iter().zip(&b.torus)) {
        *o = mod_one(x + centered(y - x) / 2);
    }
    out
}

fn center_ok(values: &[TorusValue], z: &TorusValue) -> Result<bool> {
    for v in values {
        if !d2(v, z)?.lt(quarter()) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A center `z` with every value in the open 1/4-ball around it.
///
/// Input values are tried first, in order; if none works, the short-arc
/// midpoints of pairs are tried, which catches sets of diameter exactly
/// 1/4 around a point that is not itself an input.
pub fn find_center(values: &[TorusValue]) -> Result<TorusValue> {
    let first = values
        .first()
        .ok_or_else(|| Error::Precondition("averaging an empty multiset".into()))?;
    for (j, v) in values.iter().enumerate() {
        first.same_shape(v)?;
        if v.finite != first.finite {
            return Err(Error::Concentration {
                first: 0,
                second: j,
                detail: "in different finite components".into(),
            });
        }
    }
    for z in values {
        if center_ok(values, z)? {
            return Ok(z.clone());
        }
    }
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            let z = midpoint(&values[i], &values[j]);
            if center_ok(values, &z)? {
                return Ok(z);
            }
        }
    }
    // name the farthest pair
    let mut worst = (0, 0, Distance::zero());
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            let d = d2(&values[i], &values[j])?;
            if d > worst.2 {
                worst = (i, j, d);
            }
        }
    }
    Err(Error::Concentration {
        first: worst.0,
        second: worst.1,
        detail: format!("at distance {}, no 1/4-ball holds the set", worst.2),
    })
}

/// Exact average of values concentrated in an open 1/4-ball.
pub fn concentrated_average(values: &[TorusValue]) -> Result<TorusValue> {
    let z = find_center(values)?;
    Ok(average_around(values, &z))
}

pub(crate) fn average_around(values: &[TorusValue], z: &TorusValue) -> TorusValue {
    let m = values.len() as i64;
    let mut out = z.clone();
    for (j, zc) in z.torus.iter().enumerate() {
        let total = values
            .iter()
            .map(|v| centered(v.torus[j] - zc))
            .fold(Rational::zero(), |acc, x| acc + x);
        out.torus[j] = mod_one(zc + total / m);
    }
    out
}
