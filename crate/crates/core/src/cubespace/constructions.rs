//! `D_k(A)`, the one-point space and arrow spaces.

use super::Cubespace;
use crate::cube::{faces_with_top, Face};
use crate::cubeset::{bits_for, pack, CubeSet};
use crate::error::{Error, Result};
use crate::groups::{Element, FiniteAbelianGroup};
use crate::Limits;

/// One point, every cube constant.
pub fn one_point(n_max: usize) -> Cubespace {
    let cubes = (0..=n_max)
        .map(|n| CubeSet::from_cubes(1, n, &[vec![0; 1 << n]]).expect("one point"))
        .collect();
    Cubespace::new(vec!["0".into()], cubes, Some(0)).expect("valid one-point space")
}

/// Enumerate all `f: {0,1}ⁿ → A` with `σ_d(f|F) = rhs(F)` on every
/// `d`-face `F`, in lexicographic order of vertex values.
///
/// Vertices are assigned in increasing order; a vertex that tops some
/// `d`-face is forced by the first such face and checked against the rest.
pub fn for_each_face_solution<R, V>(n: usize, d: usize, a: &FiniteAbelianGroup, rhs: R, mut visit: V)
where
    R: Fn(&Face) -> Element,
    V: FnMut(&[Element]),
{
    let tops: Vec<Vec<(Face, Element)>> = (0..1usize << n)
        .map(|v| {
            faces_with_top(n, d, v)
                .into_iter()
                .map(|f| {
                    let r = rhs(&f);
                    (f, r)
                })
                .collect()
        })
        .collect();
    let all: Vec<Element> = a.elements().collect();
    let mut f: Vec<Element> = vec![a.zero(); 1 << n];

    // alternating sum over the face excluding its top vertex
    let partial = |f: &[Element], face: &Face| {
        let top = (1usize << face.dim()) - 1;
        let mut acc = a.zero();
        for w in 0..top {
            let x = &f[face.vertex(w)];
            acc = if w.count_ones() % 2 == 0 {
                a.add(&acc, x)
            } else {
                a.sub(&acc, x)
            };
        }
        acc
    };

    fn rec<V: FnMut(&[Element])>(
        v: usize,
        f: &mut Vec<Element>,
        tops: &[Vec<(Face, Element)>],
        all: &[Element],
        a: &FiniteAbelianGroup,
        d: usize,
        partial: &dyn Fn(&[Element], &Face) -> Element,
        visit: &mut V,
    ) {
        if v == f.len() {
            visit(f);
            return;
        }
        if let Some(((face, r), rest)) = tops[v].split_first() {
            // σ = partial + (−1)^d f(v) = r
            let diff = a.sub(r, &partial(f, face));
            let value = if d % 2 == 0 { diff } else { a.neg(&diff) };
            f[v] = value;
            for (face, r) in rest {
                let s = a.sub(r, &partial(f, face));
                let want = if d % 2 == 0 { s } else { a.neg(&s) };
                if want != f[v] {
                    return;
                }
            }
            rec(v + 1, f, tops, all, a, d, partial, visit);
        } else {
            for x in all {
                f[v] = x.clone();
                rec(v + 1, f, tops, all, a, d, partial, visit);
            }
        }
    }
    rec(0, &mut f, &tops, &all, a, d, &partial, &mut visit);
}

pub(crate) fn element_label(x: &[i64]) -> String {
    match x.len() {
        0 => "0".into(),
        1 => x[0].to_string(),
        _ => {
            let parts: Vec<String> = x.iter().map(i64::to_string).collect();
            format!("({})", parts.join(","))
        }
    }
}

/// `|A|^(Σ_{j ≤ k} C(n, j))`, the size of `Cuⁿ(D_k(A))`.
pub fn dk_cube_count(order: u64, k: usize, n: usize) -> u128 {
    let mut exp = 0u32;
    let mut binom = 1u128;
    for j in 0..=n.min(k) {
        if j > 0 {
            binom = binom * (n - j + 1) as u128 / j as u128;
        }
        exp += binom as u32;
    }
    (order as u128).checked_pow(exp).unwrap_or(u128::MAX)
}

/// `D_k(A)`: cubes are the maps with vanishing `σ_{k+1}` on every
/// `(k+1)`-face.
pub fn make_dk(a: &FiniteAbelianGroup, k: usize, n_max: usize) -> Result<Cubespace> {
    make_dk_within(a, k, n_max, &Limits::default())
}

pub fn make_dk_within(a: &FiniteAbelianGroup, k: usize, n_max: usize, limits: &Limits) -> Result<Cubespace> {
    let order = a.order();
    if order as usize > limits.max_group_order {
        return Err(Error::budget("group order", order as u128, limits.max_group_order as u128));
    }
    let labels: Vec<String> = a.elements().map(|x| element_label(&x)).collect();
    let bits = bits_for(labels.len());
    let mut cubes = vec![];
    for n in 0..=n_max {
        let count = dk_cube_count(order, k, n);
        if count > limits.max_cubes {
            return Err(Error::budget(format!("{n}-cubes of D_{k}"), count, limits.max_cubes));
        }
        if !CubeSet::packing_fits(labels.len(), n) {
            return Err(Error::budget("cube packing width", (bits as u128) << n, 128));
        }
        let mut keys = Vec::with_capacity(count as usize);
        let mut idx = vec![0u32; 1 << n];
        for_each_face_solution(
            n,
            k + 1,
            a,
            |_| a.zero(),
            |f| {
                for (slot, x) in idx.iter_mut().zip(f) {
                    *slot = a.index_of(x) as u32;
                }
                keys.push(pack(bits, &idx));
            },
        );
        cubes.push(CubeSet::from_keys(labels.len(), n, keys)?);
    }
    Cubespace::new(labels, cubes, Some(k))
}

/// The arrow space `X ⋈_i X`: pairs `(q₀, q₁)` whose concatenation
/// `⟨q₀, q₁⟩_i` is a cube of `X`. Point `(x₀, x₁)` has index `x₀·|X| + x₁`.
pub fn arrow_space(x: &Cubespace, i: usize) -> Result<Cubespace> {
    if i == 0 || i > x.n_max() {
        return Err(Error::Config(format!(
            "arrow height {i} needs 1 <= i <= n_max = {}",
            x.n_max()
        )));
    }
    let m = x.len();
    let points = m * m;
    let labels: Vec<String> = (0..points)
        .map(|p| format!("{}|{}", x.label((p / m) as u32), x.label((p % m) as u32)))
        .collect();
    let bits = bits_for(points);
    let mut cubes = vec![];
    for n in 0..=x.n_max() - i {
        if !CubeSet::packing_fits(points, n) {
            return Err(Error::budget("arrow cube packing width", (bits as u128) << n, 128));
        }
        let big = x.cubes(n + i);
        let low = 1usize << n;
        let top_w = (1usize << i) - 1;
        let mut keys = vec![];
        let mut q = vec![0u32; low << i];
        let mut pair = vec![0u32; low];
        for idx in 0..big.len() {
            big.unpack_into(big.key(idx), &mut q);
            let arrow = (0..top_w).all(|w| (0..low).all(|v| q[v + (w << n)] == q[v]));
            if arrow {
                for v in 0..low {
                    pair[v] = q[v] * m as u32 + q[v + (top_w << n)];
                }
                keys.push(pack(bits, &pair));
            }
        }
        cubes.push(CubeSet::from_keys(points, n, keys)?);
    }
    Cubespace::new(labels, cubes, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dk_counts() {
        let z2 = FiniteAbelianGroup::cyclic(2);
        let d1 = make_dk(&z2, 1, 3).unwrap();
        assert_eq!(d1.cubes(2).len(), 8);
        assert_eq!(d1.cubes(3).len(), 16);
        let d2 = make_dk(&z2, 2, 3).unwrap();
        assert_eq!(d2.cubes(2).len(), 16);
        assert_eq!(d2.cubes(3).len(), 128);
        let t = make_dk(&FiniteAbelianGroup::trivial(), 2, 3).unwrap();
        assert_eq!(t.len(), 1);
        for n in 0..=3 {
            assert_eq!(d1.cubes(n).len() as u128, dk_cube_count(2, 1, n));
        }
    }

    #[test]
    fn dk_matches_brute_force() {
        let a = FiniteAbelianGroup::cyclic(3);
        let x = make_dk(&a, 1, 3).unwrap();
        // brute force over all 3^8 maps for n = 3
        let mut count = 0;
        for code in 0..3usize.pow(8) {
            let f: Vec<u32> = (0..8).map(|v| (code / 3usize.pow(v) % 3) as u32).collect();
            let ok = crate::cube::faces(3, 2).iter().all(|face| {
                let vals: Vec<Element> = face.vertices().iter().map(|&v| vec![f[v] as i64]).collect();
                a.sigma(&vals).unwrap() == vec![0]
            });
            assert_eq!(ok, x.is_cube(&f));
            count += ok as usize;
        }
        assert_eq!(count, 81);
    }

    #[test]
    fn arrow_counts() {
        let x = make_dk(&FiniteAbelianGroup::cyclic(2), 1, 3).unwrap();
        let ar = arrow_space(&x, 1).unwrap();
        assert_eq!(ar.len(), 4);
        // Cu^1 of the arrow space reindexes Cu^2(X)
        assert_eq!(ar.cubes(1).len(), x.cubes(2).len());
        for q in x.cubes(1).iter() {
            let diag: Vec<u32> = q.iter().map(|&p| p * 2 + p).collect();
            assert!(ar.is_cube(&diag));
        }
        let pt = arrow_space(&one_point(2), 1).unwrap();
        assert_eq!(pt.len(), 1);
    }
}
