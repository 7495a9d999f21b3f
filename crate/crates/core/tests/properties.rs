//! Randomized invariants, each checked against a direct computation.

use std::sync::{Arc, OnceLock};

use nilcube::catalog::{carry_cocycle, heis, CatalogSpace};
use nilcube::cocycles::{
    coboundary, cocycle_from_section, cocycle_verify, rigidity_radius, solve_by_averaging, AbelianExtension,
    Coefficients, Cocycle, Extension,
};
use nilcube::cubespace::make_dk;
use nilcube::filtered::{hk_enumerate, hk_factorize, hk_recompose, FilteredGroup, HkOutcome};
use nilcube::groups::{concentrated_average, d2, FiniteAbelianGroup, Rational, TorusValue};
use nilcube::{Cubespace, Limits};
use proptest::prelude::*;

fn r(p: i64, q: i64) -> Rational {
    Rational::new(p, q)
}

fn circle(v: Rational) -> TorusValue {
    TorusValue::torus(vec![v - v.floor()])
}

fn sum(values: &[TorusValue]) -> TorusValue {
    values.iter().skip(1).fold(values[0].clone(), |a, b| a.add(b))
}

proptest! {
    // m functions on a common domain, each within 1/(4m) of a center
    #[test]
    fn averaging_is_additive(
        m in 1usize..=4,
        n in 1usize..=6,
        centers in prop::collection::vec(0i64..64, 4),
        noise in prop::collection::vec(-63i64..=63, 24),
    ) {
        let fs: Vec<Vec<TorusValue>> = (0..m)
            .map(|j| {
                (0..n)
                    .map(|i| circle(r(centers[j], 64) + r(noise[j * 6 + i], 256 * m as i64)))
                    .collect()
            })
            .collect();
        let total: Vec<TorusValue> = (0..n)
            .map(|i| sum(&fs.iter().map(|f| f[i].clone()).collect::<Vec<_>>()))
            .collect();
        let lhs = concentrated_average(&total).unwrap();
        let rhs = sum(&fs.iter().map(|f| concentrated_average(f).unwrap()).collect::<Vec<_>>());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn sigma_reflection_and_permutation(
        k in 1usize..=3,
        vals in prop::collection::vec(0i64..5, 8),
        j in 0usize..3,
        swap in 0usize..2,
    ) {
        let a = FiniteAbelianGroup::cyclic(5);
        let j = j % k;
        let f: Vec<Vec<i64>> = (0..1usize << k).map(|v| vec![vals[v]]).collect();
        let reflected: Vec<Vec<i64>> = (0..1usize << k).map(|v| f[v ^ (1 << j)].clone()).collect();
        let s = a.sigma(&f).unwrap();
        prop_assert_eq!(a.sigma(&reflected).unwrap(), a.neg(&s));
        if k >= 2 {
            // swap coordinates swap and swap+1
            let i = swap % (k - 1);
            let perm = |v: usize| {
                let (b0, b1) = (v >> i & 1, v >> (i + 1) & 1);
                (v & !(0b11 << i)) | (b1 << i) | (b0 << (i + 1))
            };
            let permuted: Vec<Vec<i64>> = (0..1usize << k).map(|v| f[perm(v)].clone()).collect();
            prop_assert_eq!(a.sigma(&permuted).unwrap(), s);
        }
    }

    #[test]
    fn d2_is_a_metric(
        xs in prop::collection::vec(0i64..48, 3),
        fin in prop::collection::vec(0i64..2, 3),
    ) {
        let a = FiniteAbelianGroup::cyclic(2);
        let v: Vec<TorusValue> = (0..3)
            .map(|i| TorusValue::new(&a, vec![fin[i]], vec![r(xs[i], 48)]))
            .collect();
        let d = |i: usize, j: usize| d2(&v[i], &v[j]).unwrap();
        prop_assert_eq!(d(0, 1), d(1, 0));
        prop_assert_eq!(d(0, 0).squared(), Some(Rational::from_integer(0)));
        if v[0] != v[1] {
            prop_assert!(d(0, 1) > d(0, 0));
        }
        // one circle coordinate: distances are rational, compare directly
        match (d(0, 2).value(), d(0, 1).value(), d(1, 2).value()) {
            (Some(ac), Some(ab), Some(bc)) => prop_assert!(ac <= ab + bc),
            _ => prop_assert!(d(0, 1).is_infinite() || d(1, 2).is_infinite()),
        }
    }
}

fn filtered_groups() -> &'static [FilteredGroup] {
    static G: OnceLock<Vec<FilteredGroup>> = OnceLock::new();
    G.get_or_init(|| {
        vec![
            FilteredGroup::heisenberg(2).unwrap(),
            FilteredGroup::heisenberg(3).unwrap(),
            FilteredGroup::cyclic_deg2(2).unwrap(),
            FilteredGroup::abelian(&FiniteAbelianGroup::cyclic(3), 2).unwrap(),
        ]
    })
}

proptest! {
    #[test]
    fn factorize_inverts_recompose(which in 0usize..4, n in 0usize..=3, picks in prop::collection::vec(any::<prop::sample::Index>(), 8)) {
        let g = &filtered_groups()[which];
        let coeffs: Vec<u32> = (0..1usize << n)
            .map(|v| {
                let term = g.term(v.count_ones() as usize);
                *picks[v].get(&term)
            })
            .collect();
        let q = hk_recompose(g, &coeffs).unwrap();
        match hk_factorize(g, &q).unwrap() {
            HkOutcome::Accept(f) => prop_assert_eq!(f.coefficients, coeffs),
            HkOutcome::Reject { index, .. } => prop_assert!(false, "rejected at {}", index),
        }
    }

    #[test]
    fn factorize_membership_matches_generation(which in 0usize..4, n in 1usize..=2, vals in prop::collection::vec(0u32..27, 4)) {
        let g = &filtered_groups()[which];
        let q: Vec<u32> = (0..1usize << n).map(|v| vals[v] % g.order() as u32).collect();
        let set = hk_enumerate(g, n, &Limits::default()).unwrap();
        prop_assert_eq!(hk_factorize(g, &q).unwrap().is_accept(), set.contains(&q));
    }
}

struct Bases {
    spaces: Vec<Arc<Cubespace>>,
}

fn bases() -> &'static Bases {
    static B: OnceLock<Bases> = OnceLock::new();
    B.get_or_init(|| {
        let z = FiniteAbelianGroup::cyclic;
        let heis2: CatalogSpace = heis(2, 3, &Limits::default()).unwrap();
        Bases {
            spaces: vec![
                Arc::new(make_dk(&z(3), 1, 3).unwrap()),
                Arc::new(make_dk(&z(4), 1, 3).unwrap()),
                Arc::new(make_dk(&z(2), 2, 3).unwrap()),
                Arc::new(heis2.space),
            ],
        }
    })
}

fn finite_g(a: &FiniteAbelianGroup, picks: &[u64], len: usize) -> Vec<TorusValue> {
    (0..len)
        .map(|i| TorusValue::new(a, a.element((picks[i % picks.len()] % a.order()) as usize), vec![]))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn coboundaries_are_cocycles_and_additive(
        which in 0usize..4,
        k in 1usize..=3,
        g1 in prop::collection::vec(any::<u64>(), 8),
        g2 in prop::collection::vec(any::<u64>(), 8),
        c in any::<u64>(),
    ) {
        let x = &bases().spaces[which];
        let a = FiniteAbelianGroup::new(&[2, 3]).unwrap();
        let coeffs = Coefficients::finite(a.clone());
        let (f1, f2) = (finite_g(&a, &g1, x.len()), finite_g(&a, &g2, x.len()));
        let r1 = coboundary(x, k, coeffs.clone(), &f1).unwrap();
        let r2 = coboundary(x, k, coeffs.clone(), &f2).unwrap();
        prop_assert!(cocycle_verify(x, &r1).unwrap().passed());
        let both: Vec<TorusValue> = f1.iter().zip(&f2).map(|(u, v)| u.add(v)).collect();
        prop_assert_eq!(coboundary(x, k, coeffs.clone(), &both).unwrap(), r1.add(&r2).unwrap());
        let constant = finite_g(&a, &[c], x.len());
        prop_assert_eq!(coboundary(x, k, coeffs.clone(), &constant).unwrap(), Cocycle::zero(x, k, coeffs).unwrap());
    }

    // M(ρ) with the section x ↦ (x, 0) gives back ρ
    #[test]
    fn tautological_section_round_trip(
        which in 0usize..2,
        g in prop::collection::vec(any::<u64>(), 8),
        twist in any::<bool>(),
    ) {
        let x = bases().spaces[which].clone();
        let a = FiniteAbelianGroup::cyclic(2);
        let mut rho = coboundary(&x, 2, Coefficients::finite(a.clone()), &finite_g(&a, &g, x.len())).unwrap();
        if twist {
            rho = rho.add(&carry_cocycle(&x, x.len() as u64, 2).unwrap()).unwrap();
        }
        let limits = Limits::default();
        let ext = Extension::new(x.clone(), &rho).unwrap();
        let abelian = AbelianExtension::from_extension(&ext, &limits).unwrap();
        let zero = ext.group().index_of(&ext.group().zero());
        let s: Vec<u32> = (0..x.len() as u32).map(|p| ext.point(p, zero)).collect();
        prop_assert_eq!(cocycle_from_section(&abelian, &s).unwrap(), rho);
    }

    #[test]
    fn small_cocycles_are_coboundaries(
        which in 0usize..4,
        k in 1usize..=2,
        h in prop::collection::vec(-1i64..=1, 8),
    ) {
        let x = &bases().spaces[which];
        // |δh| ≤ 2^k/64 stays inside the rigidity radius for k ≤ 2
        let g: Vec<TorusValue> = (0..x.len()).map(|i| TorusValue::circle(h[i % h.len()], 64)).collect();
        let rho = coboundary(x, k, Coefficients::circle(), &g).unwrap();
        prop_assert!(rho.max_distance_from_zero().le(rigidity_radius(k)));
        let sol = solve_by_averaging(x, &rho).unwrap();
        let sol = sol.expect("averaging path succeeds");
        prop_assert_eq!(coboundary(x, k, Coefficients::circle(), &sol).unwrap(), rho);
    }
}
