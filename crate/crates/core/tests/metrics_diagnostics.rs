use ising_impute::diagnostics::gelman_rubin;
use ising_impute::metrics::{auc, jaccard, median, mse_bias, roc_curve, threshold_grid};
use ising_impute::{IsingMatrix, ReplicationSet};
use ndarray::{array, Array2};
use proptest::prelude::*;

fn m3(e21: f64, e31: f64, e32: f64) -> IsingMatrix {
    IsingMatrix::from_entries(3, &[(1, 0, e21), (2, 0, e31), (2, 1, e32)])
}

#[test]
fn mse_and_bias_by_hand() {
    let truth = m3(1.0, 0.0, -1.0);
    let reps = ReplicationSet::new(truth, vec![m3(1.5, 0.0, -1.0), m3(0.5, 0.2, -2.0)]).unwrap();
    let mb = mse_bias(&reps);
    assert!((mb.mse[[1, 0]] - 0.25).abs() < 1e-15);
    assert!((mb.bias[[1, 0]] - 0.0).abs() < 1e-15);
    assert!((mb.mse[[2, 0]] - 0.02).abs() < 1e-15);
    assert!((mb.bias[[2, 0]] - 0.1).abs() < 1e-15);
    assert!((mb.mse[[2, 1]] - 0.5).abs() < 1e-15);
    assert!((mb.bias[[2, 1]] + 0.5).abs() < 1e-15);
    assert_eq!(mb.lower_rows().len(), 6);
    assert_eq!(mb.edge_mse().len(), 3);
}

#[test]
fn perfect_separation_gives_unit_auc_and_jaccard() {
    let truth = m3(1.0, 0.0, -1.0);
    let reps = ReplicationSet::new(truth, vec![m3(0.9, 0.05, -1.2), m3(0.7, -0.1, -0.8)]).unwrap();
    let curve = roc_curve(&reps, &threshold_grid(&reps)).unwrap();
    assert!((auc(&curve) - 1.0).abs() < 1e-15);
    assert_eq!(jaccard(&reps, 0.3).unwrap(), 1.0);
    // tau = 0.75: selected {0.9, 1.2, 0.8} of 4 true-edge slots; union 4
    assert!((jaccard(&reps, 0.75).unwrap() - 0.75).abs() < 1e-15);
}

#[test]
fn reversed_ranking_gives_zero_auc() {
    let truth = m3(1.0, 0.0, 1.0);
    let reps = ReplicationSet::new(truth, vec![m3(0.1, 0.9, 0.2)]).unwrap();
    let curve = roc_curve(&reps, &threshold_grid(&reps)).unwrap();
    assert!(auc(&curve).abs() < 1e-15);
    assert_eq!(jaccard(&reps, 0.5).unwrap(), 0.0);
}

#[test]
fn roc_points_by_hand() {
    let truth = m3(1.0, 0.0, 1.0);
    let reps = ReplicationSet::new(truth, vec![m3(0.5, 0.3, 0.1)]).unwrap();
    let curve = roc_curve(&reps, &[0.0, 0.2, 0.4, f64::INFINITY]).unwrap();
    let pts: Vec<(f64, f64)> = curve.iter().map(|p| (p.tpr, p.fpr)).collect();
    assert_eq!(pts, vec![(1.0, 1.0), (0.5, 1.0), (0.5, 0.0), (0.0, 0.0)]);
    // points (0,0) (0,0.5) (1,0.5) (1,1): area 0.5
    assert!((auc(&curve) - 0.5).abs() < 1e-15);
}

#[test]
fn degenerate_truth_rejected() {
    let reps = ReplicationSet::new(IsingMatrix::zeros(3), vec![m3(0.1, 0.2, 0.3)]).unwrap();
    assert!(roc_curve(&reps, &[0.0]).is_err());
    assert!(jaccard(&reps, 0.0).is_err());
    assert_eq!(jaccard(&reps, 1.0).unwrap(), 0.0);
}

#[test]
fn median_cases() {
    assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
    assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    assert!(median(&[]).is_nan());
}

#[test]
fn psrf_by_hand() {
    // n = 10, two chains: 0..9 and 1..10. W = 55/6, B/n = 0.5
    let a = Array2::from_shape_fn((10, 1), |(i, _)| i as f64);
    let b = Array2::from_shape_fn((10, 1), |(i, _)| i as f64 + 1.0);
    let w: f64 = 55.0 / 6.0;
    let want = ((0.9 * w + 0.5) / w).sqrt();
    let got = gelman_rubin(&[a, b]).unwrap()[0];
    assert!((got - want).abs() < 1e-14, "{got} vs {want}");
}

#[test]
fn psrf_edge_cases() {
    let c = Array2::from_elem((10, 2), 1.0);
    let d = Array2::from_shape_fn((10, 2), |(_, j)| if j == 0 { 1.0 } else { 2.0 });
    let r = gelman_rubin(&[c.clone(), d]).unwrap();
    assert_eq!(r[0], 1.0);
    assert_eq!(r[1], f64::INFINITY);
    assert!(gelman_rubin(&[c.clone()]).is_err());
    assert!(gelman_rubin(&[c.slice(ndarray::s![..5, ..]).to_owned(), c.slice(ndarray::s![..5, ..]).to_owned()]).is_err());
    assert!(gelman_rubin(&[c.clone(), array![[1.0, 2.0]]]).is_err());
}

proptest! {
    #[test]
    fn auc_and_jaccard_in_unit_interval(vals in proptest::collection::vec(-2.0f64..2.0, 6), tau in 0.01f64..2.0) {
        let truth = m3(1.0, 0.0, -0.5);
        let reps = ReplicationSet::new(truth, vec![m3(vals[0], vals[1], vals[2]), m3(vals[3], vals[4], vals[5])]).unwrap();
        let grid = threshold_grid(&reps);
        prop_assert!(grid.windows(2).all(|w| w[0] < w[1]));
        let curve = roc_curve(&reps, &grid).unwrap();
        let a = auc(&curve);
        prop_assert!((0.0..=1.0).contains(&a));
        // TPR and FPR never increase with the threshold
        prop_assert!(curve.windows(2).all(|w| w[1].tpr <= w[0].tpr && w[1].fpr <= w[0].fpr));
        let j = jaccard(&reps, tau).unwrap();
        prop_assert!((0.0..=1.0).contains(&j));
    }

    #[test]
    fn mse_is_bias_squared_plus_variance(x in proptest::collection::vec(-3.0f64..3.0, 4)) {
        let truth = m3(0.5, 0.0, 0.0);
        let est: Vec<IsingMatrix> = x.iter().map(|&v| m3(v, 0.0, 0.0)).collect();
        let mb = mse_bias(&ReplicationSet::new(truth, est).unwrap());
        let mean = x.iter().sum::<f64>() / 4.0;
        let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 4.0;
        prop_assert!((mb.mse[[1, 0]] - (mb.bias[[1, 0]].powi(2) + var)).abs() < 1e-12);
    }

    #[test]
    fn psrf_at_least_near_one(seed in any::<u64>()) {
        use rand::Rng;
        let mut rng = ising_impute::RngStream::new(seed, 0);
        let chains: Vec<Array2<f64>> = (0..3).map(|_| Array2::from_shape_fn((20, 2), |_| rng.random::<f64>())).collect();
        for r in gelman_rubin(&chains).unwrap() {
            // (n-1)/n W + B/n >= (n-1)/n W
            prop_assert!(r >= (19.0f64 / 20.0).sqrt() - 1e-12);
        }
    }
}
