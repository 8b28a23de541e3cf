//! Published and hand-derived reference values.

use fuselab::metrics::{accuracy, aggregate_folds, class_metrics, f1_score, kappa, ConfusionMatrix};
use fuselab::svm::{brute_force_dual, kernel_eval, smo_train, KernelSpec, SmoConfig};
use ndarray::array;

#[test]
fn f1_from_published_precision_recall() {
    for (p, r, f1) in [(100.0, 97.6, 98.78), (96.82, 88.83, 92.65), (97.72, 94.35, 96.01)] {
        let (got, degenerate) = f1_score(p / 100.0, r / 100.0);
        assert!(!degenerate);
        assert!((100.0 * got - f1).abs() <= 0.01, "{p} {r}: {}", 100.0 * got);
    }
}

#[test]
fn integer_reconstruction_of_db1_accuracy() {
    // Recalls 97.6 / 93.2 / 86.8 with 122 of 125 COVID images correct.
    let cm = ConfusionMatrix::from_rows(&[vec![122, 3, 0], vec![0, 466, 34], vec![0, 66, 434]]).unwrap();
    assert!((100.0 * accuracy(&cm) - 90.84).abs() <= 0.01);
    let m = class_metrics(&cm);
    assert!((100.0 * m[0].recall - 97.6).abs() < 1e-9);
    assert!((100.0 * m[0].precision - 100.0).abs() < 1e-9);
}

#[test]
fn hand_derived_kappa_and_fold_summary() {
    let cm = ConfusionMatrix::from_rows(&[vec![20, 5], vec![10, 15]]).unwrap();
    assert!((kappa(&cm) - 0.4).abs() < 1e-12);
    assert_eq!(aggregate_folds(&[90.0, 91.0, 89.0, 92.0, 90.0]).unwrap().render(), "90.4 (1.1)");
    assert_eq!(aggregate_folds(&[90.0; 5]).unwrap().render(), "90.0 (0.0)");
}

#[test]
fn kernel_formulas() {
    let rbf = KernelSpec::rbf(1.0);
    assert!((kernel_eval(&rbf, &[0.0], &[1.0]).unwrap() - 0.36787944117144233).abs() < 1e-15);
    let poly = KernelSpec::polynomial(1.0, 2, 1.0);
    assert_eq!(kernel_eval(&poly, &[1.0, 0.0], &[1.0, 1.0]).unwrap(), 4.0);
}

#[test]
fn two_point_dual() {
    let x = array![[1.0, 0.0], [-1.0, 0.0]];
    let y = [1.0, -1.0];
    let k = KernelSpec::polynomial(1.0, 1, 0.0);
    let oracle = brute_force_dual(&x, &y, &k, 10.0).unwrap();
    assert!((oracle.objective - 0.5).abs() < 1e-12);
    let cfg = SmoConfig { c: 10.0, tolerance: 1e-9, ..SmoConfig::default() };
    let m = smo_train(&x, &y, &k, &cfg).unwrap();
    assert!(m.bias.abs() < 1e-12);
    assert!((m.decision_value(&[0.3, 5.0]).unwrap() - 0.3).abs() < 1e-12);
}
