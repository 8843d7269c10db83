use std::collections::{HashMap, HashSet};

use num_bigint::BigUint;
use num_integer::binomial;
use proptest::prelude::*;

use zde::construction::{build_delta, delta_pattern_count, delta_pattern_count_brute};
use zde::counting::q_count_volume;
use zde::lattice::{compose, decompose_generic, LatticeBox, LatticeMode};
use zde::measures::{bernoulli, bernoulli_entropy, empirical_measure, metric_d};
use zde::separation::{katok_entropy, max_separated, Method};
use zde::symbolic::{point_distance, AssignRule, Alphabet, BlockAssignment, Configuration, Pattern};

fn mode() -> impl Strategy<Value = LatticeMode> {
    prop_oneof![Just(LatticeMode::Positive), Just(LatticeMode::Full)]
}

fn simplex(b: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, b).prop_map(|v| {
        let s: f64 = v.iter().sum();
        v.into_iter().map(|x| x / s).collect()
    })
}

fn periodic(tile: &[u8], mode: LatticeMode) -> Configuration {
    Configuration::periodic(Alphabet::new(2).unwrap(), mode, vec![tile.len() as u64], tile.to_vec()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn composed_volume_is_product(m in 1u64..=10, n in 1u64..=10, d in 1usize..=3, mode in mode()) {
        let v = |r| LatticeBox::new(d, mode, r).unwrap().volume();
        prop_assert_eq!(v(compose(m, n, mode)), v(m) * v(n));
    }

    #[test]
    fn decomposition_partitions_the_box(big_n in 1u64..=6, extra in 0u64..=12, d in 1usize..=2, mode in mode()) {
        let n = big_n + extra;
        let dec = decompose_generic(big_n, n, d, mode).unwrap();
        let mut owner: HashMap<Vec<i64>, usize> = HashMap::new();
        for (i, t) in dec.subcube_origins.iter().enumerate() {
            for c in dec.sub.cells() {
                let cell: Vec<i64> = c.iter().zip(t).map(|(a, b)| a + b).collect();
                prop_assert!(dec.target.contains(&cell));
                prop_assert!(owner.insert(cell, i).is_none(), "subcubes overlap");
            }
        }
        let mut remainder = 0u64;
        for c in dec.target.cells() {
            match owner.get(&c) {
                Some(&i) => prop_assert_eq!(dec.subcube_of(&c), Some(i)),
                None => remainder += 1,
            }
        }
        prop_assert_eq!(dec.remainder_volume.clone(), BigUint::from(remainder));
        prop_assert!(dec.satisfies_width_bound());
    }

    #[test]
    fn shift_is_an_action(seed in any::<u64>(), h in prop::collection::vec(0i64..50, 2), k in prop::collection::vec(0i64..50, 2)) {
        let bx = LatticeBox::new(1, LatticeMode::Positive, 0).unwrap();
        let a = Alphabet::new(3).unwrap();
        let blocks: Vec<Pattern> = (0..3u8).map(|s| Pattern::new(bx, a, vec![s]).unwrap()).collect();
        let sub = build_delta(blocks, None).unwrap();
        let x = sub.tiling(&BlockAssignment::seeded(seed, 3, 1)).unwrap();
        let x2 = Configuration::periodic(a, LatticeMode::Positive, vec![7, 5], (0..35).map(|i| (i % 3) as u8).collect()).unwrap();
        let win = LatticeBox::new(2, LatticeMode::Positive, 30).unwrap();
        let hk: Vec<i64> = h.iter().zip(&k).map(|(a, b)| a + b).collect();
        let lhs = x2.shift(&hk).unwrap().window(&win, &[0, 0]).unwrap();
        let rhs = x2.shift(&h).unwrap().shift(&k).unwrap().window(&win, &[0, 0]).unwrap();
        prop_assert_eq!(lhs, rhs);
        let w1 = LatticeBox::new(1, LatticeMode::Positive, 100).unwrap();
        let lhs = x.shift(&[hk[0]]).unwrap().window(&w1, &[0]).unwrap();
        let rhs = x.shift(&[h[0]]).unwrap().shift(&[k[0]]).unwrap().window(&w1, &[0]).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn measure_metric_symmetric_and_triangle(p in simplex(3), q in simplex(3), r in simplex(3), depth in 0u64..=2, mode in mode()) {
        let mk = |v: &Vec<f64>| bernoulli(v, depth, 1, mode).unwrap();
        let (a, b, c) = (mk(&p), mk(&q), mk(&r));
        let ab = metric_d(&a, &b, depth).unwrap();
        prop_assert_eq!(ab.value, metric_d(&b, &a, depth).unwrap().value);
        let (ac, cb) = (metric_d(&a, &c, depth).unwrap(), metric_d(&c, &b, depth).unwrap());
        prop_assert!(ab.value <= ac.value + cb.value + 2.0 * ab.tail_bound + 1e-12);
    }

    #[test]
    fn bernoulli_marginals_are_consistent(p in simplex(3), depth in 0u64..=2, mode in mode()) {
        let mu = bernoulli(&p, depth, 1, mode).unwrap();
        prop_assert!(mu.is_marginal_consistent(1e-12));
    }

    #[test]
    fn katok_tracks_bernoulli_entropy(p in 0.3f64..0.7) {
        let mu = bernoulli(&[p, 1.0 - p], 0, 1, LatticeMode::Positive).unwrap();
        let k = katok_entropy(&mu, 15, 0.5, 0.1).unwrap();
        let h = bernoulli_entropy(&[p, 1.0 - p]);
        prop_assert!((k.estimate - h).abs() <= 0.05, "estimate {} vs {}", k.estimate, h);
    }

    #[test]
    fn q_is_monotone_in_delta(v in 1u64..=64, i in 1usize..9) {
        let a = q_count_volume(v, i as f64 / 20.0).unwrap();
        let b = q_count_volume(v, (i + 1) as f64 / 20.0).unwrap();
        prop_assert!(a.exact.unwrap() <= b.exact.unwrap());
    }

    #[test]
    fn pascal_identity(n in 1u64..200, k in 1u64..200) {
        prop_assume!(k <= n);
        let c = |n: u64, k: u64| binomial(BigUint::from(n), BigUint::from(k));
        prop_assert_eq!(c(n + 1, k), c(n, k) + c(n, k - 1));
    }

    #[test]
    fn greedy_never_beats_exact(tiles in prop::collection::vec(prop::collection::vec(0u8..2, 1..=4), 1..=12), n in 0u64..=2, r in 0u64..=2) {
        let points: Vec<Configuration> = tiles.iter().map(|t| periodic(t, LatticeMode::Positive)).collect();
        let eps = 0.5f64.powi(r as i32 + 1);
        let exact = max_separated(&points, n, eps, Method::Exact).unwrap().count;
        let greedy = max_separated(&points, n, eps, Method::Greedy).unwrap().count;
        prop_assert!(greedy <= exact);
        // Monotone: a coarser ε or a shorter window never separates more.
        let coarser = max_separated(&points, n, eps * 2.0, Method::Exact).unwrap().count;
        prop_assert!(coarser <= exact);
        let longer = max_separated(&points, n + 1, eps, Method::Exact).unwrap().count;
        prop_assert!(exact <= longer);
    }

    #[test]
    fn half_separation_is_pattern_inequality(tiles in prop::collection::vec(prop::collection::vec(0u8..2, 1..=4), 1..=10), n in 0u64..=4) {
        let points: Vec<Configuration> = tiles.iter().map(|t| periodic(t, LatticeMode::Positive)).collect();
        let bx = LatticeBox::new(1, LatticeMode::Positive, n).unwrap();
        let distinct: HashSet<Vec<u8>> = points.iter().map(|p| p.window(&bx, &[0]).unwrap()).collect();
        let count = max_separated(&points, n, 0.5, Method::Exact).unwrap().count;
        prop_assert_eq!(count, BigUint::from(distinct.len()));
    }

    #[test]
    fn periodic_empirical_measures_converge(tile in prop::collection::vec(0u8..2, 1..=5), k in 1u64..=6, extra in 0u64..40) {
        let x = periodic(&tile, LatticeMode::Positive);
        let p = tile.len() as u64;
        let full = |m: u64| empirical_measure(&x, &LatticeBox::new(1, LatticeMode::Positive, m * p - 1).unwrap(), 1).unwrap();
        // Whole periods give the same measure exactly.
        prop_assert_eq!(metric_d(&full(k), &full(k + 1), 1).unwrap().value, 0.0);
        let n = k * p - 1 + extra;
        let partial = empirical_measure(&x, &LatticeBox::new(1, LatticeMode::Positive, n).unwrap(), 1).unwrap();
        prop_assert!(metric_d(&partial, &full(1), 1).unwrap().value <= p as f64 / (n + 1) as f64 + 1e-12);
    }

    #[test]
    fn point_distance_symmetric_and_triangle(a in prop::collection::vec(0u8..2, 1..=4), b in prop::collection::vec(0u8..2, 1..=4), c in prop::collection::vec(0u8..2, 1..=4)) {
        let (x, y, z) = (periodic(&a, LatticeMode::Full), periodic(&b, LatticeMode::Full), periodic(&c, LatticeMode::Full));
        let d = |u: &Configuration, v: &Configuration| point_distance(u, v, 6);
        let (xy, yx) = (d(&x, &y), d(&y, &x));
        prop_assert_eq!((xy.lower, xy.upper), (yx.lower, yx.upper));
        let (xz, zy) = (d(&x, &z), d(&z, &y));
        if xy.is_exact() && xz.is_exact() && zy.is_exact() {
            prop_assert!(xy.lower <= xz.lower + zy.lower);
        }
    }

    #[test]
    fn dp_count_matches_brute_force(words in prop::collection::hash_set(prop::collection::vec(0u8..2, 3), 1..=4), mode in mode()) {
        let radius = if mode == LatticeMode::Positive { 2 } else { 1 };
        let bx = LatticeBox::new(1, mode, radius).unwrap();
        let a = Alphabet::new(2).unwrap();
        let blocks = words.into_iter().map(|w| Pattern::new(bx, a, w).unwrap()).collect();
        let sub = build_delta(blocks, None).unwrap();
        prop_assert_eq!(delta_pattern_count(&sub, 1).unwrap(), delta_pattern_count_brute(&sub, 1).unwrap());
    }

    /// With exact tracing one Y-cylinder on Λ_n holds no two points that are
    /// separated on Λ_{nD_M+M}, while distinct cylinders all are.
    #[test]
    fn one_separated_point_per_cylinder(seed in any::<u64>(), patches in prop::collection::vec((3i64..8, 0usize..3), 0..6), n in 0u64..=2) {
        let bx = LatticeBox::new(1, LatticeMode::Positive, 1).unwrap();
        let a = Alphabet::new(2).unwrap();
        let blocks: Vec<Pattern> = [[0u8, 1], [1, 1], [0, 0]].iter().map(|w| Pattern::new(bx, a, w.to_vec()).unwrap()).collect();
        let sub = build_delta(blocks, None).unwrap();
        let base = BlockAssignment::seeded(seed, 3, 1);
        let mut same = vec![sub.tiling(&base).unwrap()];
        for (cell, k) in &patches {
            // Cells past n lie outside the cylinder.
            let cells = HashMap::from([(vec![*cell], *k)]);
            let rule = AssignRule::Patched { base: base.rule.clone(), cells };
            same.push(sub.tiling(&BlockAssignment::new(rule, 1)).unwrap());
        }
        let window = compose(n, sub.m(), LatticeMode::Positive);
        prop_assert_eq!(max_separated(&same, window, 0.5, Method::Exact).unwrap().count, BigUint::from(1u32));

        let grid = LatticeBox::new(1, LatticeMode::Positive, n).unwrap();
        let mut distinct = Vec::new();
        for code in 0..3usize.pow(grid.cell_count().unwrap() as u32) {
            let mut cells = HashMap::new();
            let mut c = code;
            for g in grid.cells() {
                cells.insert(g, c % 3);
                c /= 3;
            }
            let rule = AssignRule::Patched { base: base.rule.clone(), cells };
            distinct.push(sub.tiling(&BlockAssignment::new(rule, 1)).unwrap());
        }
        prop_assert_eq!(max_separated(&distinct, window, 0.5, Method::Exact).unwrap().count, BigUint::from(distinct.len()));
    }
}
