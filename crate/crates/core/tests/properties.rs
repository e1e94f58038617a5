mod common;

use double_phase::exponents::{holder_conjugate, ExponentField};
use double_phase::functional::{energy, residual, ProblemSpec};
use double_phase::grid::{Grid, GridFunction, Layout};
use double_phase::spaces::{luxemburg_norm, sum_space_norm};
use proptest::prelude::*;

fn grid1(n_values: usize) -> Grid {
    // interior nodes are n - 2
    Grid::new(1, 2.0, n_values + 2).unwrap()
}

fn values(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![Just(0.0), -1e3..1e3f64, -1e-3..1e-3f64], n)
}

fn exponents(n: usize, lo: f64, hi: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(lo..hi, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn norm_matches_bisection(v in values(12), e in exponents(12, 1.05, 6.0)) {
        let g = grid1(12);
        let u = GridFunction::interior(g, v.clone()).unwrap();
        let p = ExponentField::new(g, Layout::Interior, e.clone()).unwrap();
        let n = luxemburg_norm(&u, &p, None).unwrap();
        let m: Vec<f64> = v.iter().map(|x| x.abs()).collect();
        let r = common::luxemburg_bisect(&m, &e, &vec![g.cell_volume(); 12]);
        prop_assert!((n - r).abs() <= 1e-9 * r.max(f64::MIN_POSITIVE), "{} vs {}", n, r);
    }

    #[test]
    fn norm_is_homogeneous(v in values(10), e in exponents(10, 1.1, 4.0), c in -50.0..50.0f64) {
        let g = grid1(10);
        let u = GridFunction::interior(g, v).unwrap();
        let p = ExponentField::new(g, Layout::Interior, e).unwrap();
        let a = luxemburg_norm(&u.scale(c), &p, None).unwrap();
        let b = c.abs() * luxemburg_norm(&u, &p, None).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * a.max(b).max(f64::MIN_POSITIVE));
    }

    #[test]
    fn conjugate_exponents_sum_to_one(e in exponents(8, 1.01, 20.0)) {
        let g = grid1(8);
        let p = ExponentField::new(g, Layout::Interior, e).unwrap();
        let c = holder_conjugate(&p).unwrap();
        for (a, b) in p.values().iter().zip(c.values()) {
            prop_assert!((1.0 / a + 1.0 / b - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sum_space_split_is_exact_and_bounded(v in values(9), e in exponents(9, 1.2, 3.0), gap in 0.1..2.0f64) {
        let g = Grid::new(1, 2.0, 10).unwrap();
        let u = GridFunction::new(g, Layout::Cells, 1, v).unwrap();
        let p = ExponentField::new(g, Layout::Cells, e).unwrap();
        let q = p.map(|x| x + gap).unwrap();
        let r = sum_space_norm(&u, &p, &q).unwrap();
        prop_assert_eq!(r.best.v.add(&r.best.w).unwrap(), u.clone());
        prop_assert!(r.lower <= r.upper * (1.0 + 1e-9));
        // v = u or w = u are decompositions too
        let cap = luxemburg_norm(&u, &p, None).unwrap().min(luxemburg_norm(&u, &q, None).unwrap());
        prop_assert!(r.upper <= cap * (1.0 + 1e-9));
    }

    #[test]
    fn csv_round_trip_is_exact(v in prop::collection::vec(any::<f64>().prop_filter("finite", |x| x.is_finite()), 7)) {
        let u = GridFunction::interior(grid1(7), v).unwrap();
        let back = GridFunction::from_csv(&u.to_csv().unwrap()).unwrap();
        prop_assert_eq!(back.values().iter().map(|x| x.to_bits()).collect::<Vec<_>>(), u.values().iter().map(|x| x.to_bits()).collect::<Vec<_>>());
    }

    #[test]
    fn energy_is_even_and_residual_odd(v in prop::collection::vec(-3.0..3.0f64, 19)) {
        let pr = problem();
        let u = GridFunction::interior(*pr.grid(), v).unwrap();
        let m = u.scale(-1.0);
        prop_assert_eq!(energy(&m, &pr).unwrap().total, energy(&u, &pr).unwrap().total);
        prop_assert_eq!(residual(&m, &pr).unwrap(), residual(&u, &pr).unwrap().scale(-1.0));
    }
}

fn problem() -> ProblemSpec {
    let text = std::fs::read_to_string(std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/mountain_pass_1d.toml")).unwrap();
    let cfg = double_phase::cli::RunConfig::parse(&text.replace("nodes_per_axis = 161", "nodes_per_axis = 21")).unwrap();
    cfg.problem().unwrap()
}
