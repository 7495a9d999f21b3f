//! Smith reduction over `Z/d` with optional transform tracking, and the
//! two linear problems built on it: solving `M g = b` and the invariant
//! factors of `ker(C) / span(images)`.

use num_integer::Integer;

pub(crate) type Mat = Vec<Vec<i64>>;

fn md(x: i64, d: i64) -> i64 {
    x.rem_euclid(d)
}

/// A unit `s` of `Z/d` with `a·s ≡ gcd(a, d)`.
fn associate_unit(a: i64, d: i64) -> (i64, i64) {
    let g = a.gcd(&d);
    if g == d {
        return (d, 1);
    }
    let target = g % d;
    // units are dense enough that a short scan always succeeds for d ≤ 2^20
    let step = d / g;
    let base = {
        let e = (a / g).extended_gcd(&step);
        md(e.x, step)
    };
    let mut s = base;
    while s.gcd(&d) != 1 {
        s += step;
    }
    debug_assert_eq!(md(a * s, d), target);
    (g, s % d)
}

fn identity(n: usize) -> Mat {
    (0..n)
        .map(|i| (0..n).map(|j| i64::from(i == j)).collect())
        .collect()
}

/// `U A V = diag(D)` over `Z/d`. Every diagonal entry divides `d`
/// (a zero entry is stored as `d`). `w = V⁻¹`.
pub(crate) struct Smith {
    pub diag: Vec<i64>,
    pub u: Option<Mat>,
    pub v: Option<Mat>,
    pub w: Option<Mat>,
}

/// Apply the unimodular 2×2 map `(x, y) ↦ (s x + t y, −b x + a y)` to rows
/// `i, j` of `m`.
fn mix_rows(m: &mut Mat, i: usize, j: usize, s: i64, t: i64, b: i64, a: i64, d: i64) {
    let (lo, hi) = if i < j { (i, j) } else { (j, i) };
    let (left, right) = m.split_at_mut(hi);
    let (ri, rj) = if i < j {
        (&mut left[lo], &mut right[0])
    } else {
        (&mut right[0], &mut left[lo])
    };
    for (x, y) in ri.iter_mut().zip(rj.iter_mut()) {
        let (nx, ny) = (md(s * *x + t * *y, d), md(-b * *x + a * *y, d));
        *x = nx;
        *y = ny;
    }
}

fn mix_cols(m: &mut Mat, i: usize, j: usize, s: i64, t: i64, b: i64, a: i64, d: i64) {
    for row in m.iter_mut() {
        let (x, y) = (row[i], row[j]);
        row[i] = md(s * x + t * y, d);
        row[j] = md(-b * x + a * y, d);
    }
}

/// Bezout data to clear `y` against pivot `x`: new pivot `s x + t y = g`,
/// and the second slot becomes `−(y/g) x + (x/g) y = 0`.
fn bezout(x: i64, y: i64) -> (i64, i64, i64, i64) {
    let e = x.extended_gcd(&y);
    let g = e.gcd;
    (e.x, e.y, y / g, x / g)
}

pub(crate) fn smith_mod(mut a: Mat, cols: usize, d: i64, track_rows: bool, track_cols: bool) -> Smith {
    let rows = a.len();
    for r in a.iter_mut() {
        debug_assert_eq!(r.len(), cols);
        for x in r.iter_mut() {
            *x = md(*x, d);
        }
    }
    let mut u = track_rows.then(|| identity(rows));
    let mut v = track_cols.then(|| identity(cols));
    let mut w = track_cols.then(|| identity(cols));
    let mut diag = vec![];
    for t in 0..rows.min(cols) {
        // pivot: entry generating the largest ideal
        let mut best: Option<(i64, usize, usize)> = None;
        for (i, row) in a.iter().enumerate().skip(t) {
            for (j, &x) in row.iter().enumerate().skip(t) {
                if x != 0 {
                    let g = x.gcd(&d);
                    if best.map_or(true, |b| g < b.0) {
                        best = Some((g, i, j));
                    }
                }
            }
            if best.map_or(false, |b| b.0 == 1) {
                break;
            }
        }
        let Some((_, pi, pj)) = best else {
            diag.extend(std::iter::repeat(d).take(rows.min(cols) - t));
            break;
        };
        a.swap(t, pi);
        if let Some(u) = u.as_mut() {
            u.swap(t, pi);
        }
        if pj != t {
            for row in a.iter_mut() {
                row.swap(t, pj);
            }
            if let Some(v) = v.as_mut() {
                for row in v.iter_mut() {
                    row.swap(t, pj);
                }
            }
            if let Some(w) = w.as_mut() {
                w.swap(t, pj);
            }
        }
        loop {
            // make the pivot a divisor of d by a unit row scaling
            let (g, s) = associate_unit(a[t][t], d);
            if s != 1 {
                for x in a[t].iter_mut() {
                    *x = md(*x * s, d);
                }
                if let Some(u) = u.as_mut() {
                    for x in u[t].iter_mut() {
                        *x = md(*x * s, d);
                    }
                }
            }
            debug_assert_eq!(a[t][t], g % d);
            let p = a[t][t];
            let mut dirty = false;
            for i in t + 1..rows {
                let y = a[i][t];
                if y == 0 {
                    continue;
                }
                if y % p == 0 {
                    let q = y / p;
                    for c in t..cols {
                        a[i][c] = md(a[i][c] - q * a[t][c], d);
                    }
                    if let Some(u) = u.as_mut() {
                        for c in 0..rows {
                            u[i][c] = md(u[i][c] - q * u[t][c], d);
                        }
                    }
                } else {
                    let (s, tt, b, aa) = bezout(p, y);
                    mix_rows(&mut a, t, i, s, tt, b, aa, d);
                    if let Some(u) = u.as_mut() {
                        mix_rows(u, t, i, s, tt, b, aa, d);
                    }
                    dirty = true;
                    break;
                }
            }
            if dirty {
                continue;
            }
            for j in t + 1..cols {
                let y = a[t][j];
                if y == 0 {
                    continue;
                }
                let (s, tt, b, aa) = if y % p == 0 {
                    (1, 0, y / p, 1)
                } else {
                    dirty = true;
                    bezout(p, y)
                };
                mix_cols(&mut a, t, j, s, tt, b, aa, d);
                if let Some(v) = v.as_mut() {
                    mix_cols(v, t, j, s, tt, b, aa, d);
                }
                if let Some(w) = w.as_mut() {
                    // inverse of the column map acts on rows of V⁻¹
                    let g = md(s * aa + tt * b, d);
                    debug_assert_eq!(g, 1 % d);
                    mix_rows(w, t, j, aa, b, tt, s, d);
                }
                if dirty {
                    break;
                }
            }
            if !dirty {
                break;
            }
        }
        diag.push(if a[t][t] == 0 { d } else { a[t][t] });
    }
    Smith { diag, u, v, w }
}

fn mat_vec(m: &Mat, x: &[i64], d: i64) -> Vec<i64> {
    m.iter()
        .map(|row| md(row.iter().zip(x).map(|(a, b)| a * b % d).sum::<i64>(), d))
        .collect()
}

/// Some `g` with `A g ≡ b (mod d)`, or `None`.
pub(crate) fn solve_mod(a: &Mat, cols: usize, b: &[i64], d: i64) -> Option<Vec<i64>> {
    let sm = smith_mod(a.clone(), cols, d, true, true);
    let ub = mat_vec(sm.u.as_ref().expect("tracked"), b, d);
    let mut y = vec![0i64; cols];
    for (t, &r) in ub.iter().enumerate() {
        match sm.diag.get(t) {
            Some(&p) if p != d => {
                if r % p != 0 {
                    return None;
                }
                // p | d, so solve (p)·y ≡ r mod d by y = r/p
                y[t] = r / p;
            }
            _ => {
                if r != 0 {
                    return None;
                }
            }
        }
    }
    Some(mat_vec(sm.v.as_ref().expect("tracked"), &y, d))
}

/// Invariant factors (each > 1, unsorted) of
/// `{x ∈ (Z/d)^N : C x = 0} / span(images)`; the images must lie in the
/// kernel.
pub(crate) fn kernel_quotient(constraints: Mat, n: usize, images: &[Vec<i64>], d: i64) -> Vec<u64> {
    let sm = smith_mod(constraints, n, d, false, true);
    let w = sm.w.expect("tracked");
    // kernel = V · ⊕ m_t Z/d with m_t = d / gcd(D_t, d)
    let m: Vec<i64> = (0..n)
        .map(|t| match sm.diag.get(t) {
            Some(&p) => d / p.gcd(&d),
            None => 1,
        })
        .collect();
    let live: Vec<usize> = (0..n).filter(|&t| m[t] < d).collect();
    if live.is_empty() {
        return vec![];
    }
    // generators of the quotient relations, one column each, rows = live coords
    let mut cols: Vec<Vec<i64>> = vec![];
    for img in images {
        let y = mat_vec(&w, img, d);
        debug_assert!(y.iter().zip(&m).all(|(a, b)| a % b == 0), "image outside the kernel");
        cols.push(live.iter().map(|&t| y[t] / m[t]).collect());
    }
    for (r, &t) in live.iter().enumerate() {
        let mut c = vec![0; live.len()];
        c[r] = d / m[t];
        cols.push(c);
    }
    let rel: Mat = (0..live.len())
        .map(|r| cols.iter().map(|c| c[r]).collect())
        .collect();
    let ncols = cols.len();
    let sm = smith_mod(rel, ncols, d, false, false);
    let mut out: Vec<u64> = (0..live.len())
        .map(|t| sm.diag.get(t).copied().unwrap_or(d).gcd(&d) as u64)
        .filter(|&x| x > 1)
        .collect();
    out.sort_unstable();
    out
}
