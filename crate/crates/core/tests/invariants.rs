//! Randomized structural invariants.

use multidisk::basis::{make_layout, truncation_order, BlockLayout, CoeffVector, Truncation};
use multidisk::geometry::{create_random_disks, DiskConfig, RandomCloud, Rect};
use multidisk::incidence::IncidentField;
use multidisk::operators::{
    assemble_dense, assemble_toeplitz, DenseOperator, LinearOperator, OperatorKind, OperatorSpec,
};
use multidisk::postproc::{incident_field_grid, rcs_db, GridSpec, NodeMask};
use multidisk::solver::{gmres, solve_direct, GmresOptions};
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use std::f64::consts::PI;

fn cloud(count: usize, seed: u64) -> DiskConfig<f64> {
    create_random_disks(&RandomCloud {
        region: Rect::square(3.0),
        count,
        a_min: 0.2,
        a_max: 0.5,
        d_min: 0.05,
        holes: vec![],
        seed,
        attempts_per_disk: 10_000,
    })
    .unwrap()
}

fn complex_vec(len: usize) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| C64::new(a, b)), len)
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

const KINDS: [OperatorKind; 4] = [
    OperatorKind::SingleLayer,
    OperatorKind::DoubleLayer,
    OperatorKind::DnSingleLayer,
    OperatorKind::DnDoubleLayer,
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_clouds_are_valid_and_reproducible(count in 1usize..12, seed in any::<u64>()) {
        let c = cloud(count, seed);
        prop_assert_eq!(&c, &cloud(count, seed));
        prop_assert_eq!(c.len(), count);
        for (p, d) in c.disks().iter().enumerate() {
            prop_assert!(d.a >= 0.2 && d.a <= 0.5);
            prop_assert!(d.x1.abs() + d.a <= 3.0 && d.x2.abs() + d.a <= 3.0);
            for q in p + 1..c.len() {
                let (b, a_pq) = c.separation(p, q);
                let (b_qp, a_qp) = c.separation(q, p);
                prop_assert!(b - d.a - c.disk(q).a >= 0.05);
                prop_assert!((b - b_qp).abs() <= 1e-14);
                let turn = (a_pq - a_qp).rem_euclid(2.0 * PI);
                prop_assert!((turn - PI).abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn blocks_round_trip(orders in prop::collection::vec(0usize..9, 1..6), seed in any::<u64>()) {
        let layout = BlockLayout::from_orders(orders.clone());
        let values: Vec<C64> = (0..layout.total()).map(|i| C64::new(i as f64, (seed % 97) as f64)).collect();
        let v = CoeffVector::new(layout.clone(), values.clone()).unwrap();
        let blocks = v.clone().into_blocks();
        prop_assert_eq!(blocks.iter().map(Vec::len).collect::<Vec<_>>(), orders.iter().map(|n| 2 * n + 1).collect::<Vec<_>>());
        let back = CoeffVector::from_blocks(blocks);
        prop_assert_eq!(back.layout(), &layout);
        prop_assert_eq!(back.into_values(), values);
    }

    #[test]
    fn truncation_grows_with_ka_and_accuracy(ka in 0.01f64..200.0, step in 0.0f64..5.0, e1 in -14.0f64..-1.0, de in 0.0f64..4.0) {
        let eps = 10f64.powf(e1);
        let n = truncation_order(ka, 1.0, eps).unwrap();
        prop_assert!(n >= 1 && n as f64 >= ka);
        prop_assert!(truncation_order(ka + step, 1.0, eps).unwrap() >= n);
        prop_assert!(truncation_order(ka, 1.0, eps * 10f64.powf(-de)).unwrap() >= n);
    }

    #[test]
    fn toeplitz_matches_dense_and_is_linear(
        count in 2usize..5,
        seed in any::<u64>(),
        kind in 0usize..4,
        k in 0.5f64..8.0,
        coefs in complex_vec(2),
        raw in complex_vec(2 * 5 * 21),
    ) {
        let config = cloud(count, seed);
        let layout = make_layout(&config, k, &Truncation::Tolerance(1e-6)).unwrap();
        let n = layout.total();
        let (u, v) = (&raw[..n], &raw[n..2 * n]);
        let spec = OperatorSpec::single(KINDS[kind], C64::new(1.0, 0.0), k);
        let dense = assemble_dense(&spec, &layout, &config).unwrap();
        let fast = assemble_toeplitz(&spec, &layout, &config).unwrap();
        let scale = dense.data().iter().map(|z| z.norm()).fold(0.0, f64::max);
        for j in 0..n {
            let mut e = vec![C64::new(0.0, 0.0); n];
            e[j] = C64::new(1.0, 0.0);
            let col = fast.apply(&e);
            for (i, z) in col.iter().enumerate() {
                prop_assert!((z - dense.get(i, j)).norm() <= 1e-13 * scale);
            }
        }
        let mix: Vec<C64> = u.iter().zip(v).map(|(a, b)| coefs[0] * a + coefs[1] * b).collect();
        let lhs = fast.apply(&mix);
        let (au, av) = (fast.apply(u), fast.apply(v));
        let rhs: Vec<C64> = au.iter().zip(&av).map(|(a, b)| coefs[0] * a + coefs[1] * b).collect();
        let gap: Vec<C64> = lhs.iter().zip(&rhs).map(|(a, b)| a - b).collect();
        prop_assert!(norm(&gap) <= 1e-13 * scale * (norm(u) + norm(v)) * 4.0);
        let dv = dense.apply(u);
        let diff: Vec<C64> = dv.iter().zip(&au).map(|(a, b)| a - b).collect();
        prop_assert!(norm(&diff) <= 1e-12 * norm(&dv));
    }

    #[test]
    fn unrestarted_gmres_reproduces_direct_solve(n in 2usize..24, raw in complex_vec(24 * 25)) {
        let mut data: Vec<C64> = raw[..n * n].to_vec();
        for i in 0..n {
            data[i * n + i] += C64::new(2.0 * n as f64, 0.0);
        }
        let a = DenseOperator::from_row_major(n, n, data).unwrap();
        let b = &raw[n * n..n * n + n];
        let (x_direct, _) = solve_direct(&a, b).unwrap();
        let opts = GmresOptions { restart: n, tol: 1e-12, max_cycles: 4 };
        let (x, stats) = gmres::<f64, _, DenseOperator<f64>>(&a, b, None, &opts, None);
        prop_assert!(stats.converged);
        let diff: Vec<C64> = x.iter().zip(&x_direct).map(|(a, b)| a - b).collect();
        prop_assert!(norm(&diff) <= 1e-10 * norm(&x_direct));
        for w in stats.history.windows(2) {
            if w[0].cycle == w[1].cycle {
                prop_assert!(w[1].residual <= w[0].residual * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn traces_restrict_to_sub_configurations(count in 2usize..6, seed in any::<u64>(), keep in any::<u16>(), beta in -PI..PI) {
        let config = cloud(count, seed);
        let k = 3.0;
        let layout = make_layout(&config, k, &Truncation::Tolerance(1e-8)).unwrap();
        let kept: Vec<usize> = (0..count).filter(|p| keep >> p & 1 == 1).collect();
        prop_assume!(!kept.is_empty());
        let sub = config.retain(|p, _| kept.contains(&p));
        let sub_layout = BlockLayout::from_orders(kept.iter().map(|&p| layout.order(p)).collect());
        for inc in [IncidentField::plane_wave(beta), IncidentField::point_source([7.0, -6.5])] {
            let full = inc.traces(&config, &layout, k).unwrap();
            let part = inc.traces(&sub, &sub_layout, k).unwrap();
            for (i, &p) in kept.iter().enumerate() {
                prop_assert_eq!(full.u.block(p), part.u.block(i));
                prop_assert_eq!(full.du.block(p), part.du.block(i));
            }
        }
    }

    #[test]
    fn grid_mask_matches_geometry(count in 1usize..8, seed in any::<u64>(), n1 in 2usize..30, n2 in 2usize..30) {
        let config = cloud(count, seed);
        let grid = GridSpec::new((-3.0, 3.0), (-3.0, 3.0), n1, n2).unwrap();
        let map = incident_field_grid(&grid, 2.0, &IncidentField::plane_wave(0.0), &config);
        prop_assert_eq!(map.nodes.len(), n1 * n2);
        for (x, m) in map.nodes.iter().zip(&map.mask) {
            let inside: Vec<usize> = (0..count).filter(|&p| config.disk(p).local_polar(*x).0 < config.disk(p).a).collect();
            prop_assert!(inside.len() <= 1);
            let expected = inside.first().map_or(NodeMask::Exterior, |&p| NodeMask::Interior(p));
            prop_assert_eq!(*m, expected);
        }
    }

    #[test]
    fn rcs_is_log_of_scaled_intensity(re in -1e3f64..1e3, im in -1e3f64..1e3) {
        let a = C64::new(re, im);
        prop_assume!(a.norm() > 1e-150);
        let want = 10.0 * (2.0 * PI * a.norm_sqr()).log10();
        prop_assert!((rcs_db(a) - want).abs() <= 1e-12 * want.abs().max(1.0));
    }
}
