use std::path::PathBuf;

use ncsvm::admm::Termination;
use ncsvm::{
    fit, read_libsvm_file, Dataset, LinearModel, PenaltyConfig, PenaltyKind, SolverConfig,
    SparseMatrix,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cfg(kind: PenaltyKind) -> SolverConfig {
    SolverConfig::new(PenaltyConfig::with_default_theta(kind, 0.015625).unwrap())
}

#[test]
fn two_point_separable() {
    let x = SparseMatrix::from_dense_rows(&[vec![1.0], vec![-1.0]], 1).unwrap();
    let ds = Dataset::new(x, vec![1.0, -1.0]).unwrap();
    let rep = fit(&ds, &cfg(PenaltyKind::Scad)).unwrap();
    assert!(rep.iterations <= 1000);
    assert_eq!(rep.model.accuracy(&ds).unwrap(), 1.0);
}

#[test]
fn heart_scale_converges_in_tens_of_iterations() {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/heart_scale");
    let ds = read_libsvm_file(path, None).unwrap();
    let rep = fit(&ds, &cfg(PenaltyKind::Scad).with_rho(0.01, 0.01)).unwrap();
    assert_eq!(rep.terminated_by, Termination::Tolerance);
    assert!(rep.iterations <= 100, "{}", rep.iterations);
}

#[test]
fn stopping_rule_matches_trace() {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/heart_scale");
    let ds = read_libsvm_file(path, None).unwrap();
    let c = cfg(PenaltyKind::Mcp);
    let rep = fit(&ds, &c).unwrap();
    let (last, earlier) = rep.trace.split_last().unwrap();
    assert!(earlier.iter().all(|r| r.rel_change >= c.epsilon));
    assert_eq!(
        last.rel_change < c.epsilon,
        rep.terminated_by == Termination::Tolerance
    );
    for w in rep.trace.windows(2) {
        assert_eq!(w[1].iter, w[0].iter + 1);
        let rel = (w[1].objective - w[0].objective).abs() / w[0].objective.abs().max(1e-12);
        assert_eq!(rel, w[1].rel_change);
    }
}

fn noisy(seed: u64, n: usize, informative: usize, noise: usize) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let truth: Vec<f64> = (0..informative)
        .map(|_| rng.random_range(-2.0..2.0))
        .collect();
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for _ in 0..n {
        let row: Vec<f64> = (0..informative + noise)
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        let score: f64 = truth.iter().zip(&row).map(|(a, b)| a * b).sum();
        labels.push(if score >= 0.0 { 1.0 } else { -1.0 });
        rows.push(row);
    }
    Dataset::new(
        SparseMatrix::from_dense_rows(&rows, informative + noise).unwrap(),
        labels,
    )
    .unwrap()
}

#[test]
fn noise_features_are_zeroed() {
    let ds = noisy(5, 300, 5, 20);
    for kind in PenaltyKind::ALL {
        let rep = fit(&ds, &cfg(kind)).unwrap();
        let sparse = rep.sparse_model().unwrap();
        let zeroed = sparse.w[5..]
            .iter()
            .filter(|v| v.abs() < sparse.zero_tolerance)
            .count();
        assert!(zeroed >= 1, "{kind}: z = {:?}", sparse.w);
        assert!(sparse.coefficient_sparsity().zero_count >= zeroed);

        // w itself reaches the tolerance once w − z is driven down.
        let tight = SolverConfig {
            epsilon: 1e-6,
            max_iters: 5000,
            ..cfg(kind)
        }
        .with_rho(5.0, 0.1);
        let m = fit(&ds, &tight).unwrap().model;
        let zeroed = m.w[5..]
            .iter()
            .filter(|v| v.abs() < m.zero_tolerance)
            .count();
        assert!(zeroed >= 1, "{kind}: w = {:?}", m.w);
    }
}

#[test]
fn sign_flip_complements_accuracy() {
    let ds = noisy(6, 80, 3, 2);
    let rep = fit(&ds, &cfg(PenaltyKind::Lsp)).unwrap();
    let m = &rep.model;
    let no_ties = ds.features().rows().all(|r| r.dot(&m.w) + m.b != 0.0);
    assert!(no_ties);
    let a = m.accuracy(&ds).unwrap();
    assert!((a + m.negated().accuracy(&ds).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn column_permutation_invariance() {
    let ds = noisy(7, 60, 3, 4);
    let d = ds.n_features();
    let perm = [3usize, 0, 6, 1, 5, 2, 4];
    let rows: Vec<Vec<f64>> = ds
        .features()
        .to_dense()
        .row_iter()
        .map(|r| perm.iter().map(|&j| r[j]).collect())
        .collect();
    let permuted = Dataset::new(
        SparseMatrix::from_dense_rows(&rows, d).unwrap(),
        ds.labels().to_vec(),
    )
    .unwrap();
    let m = fit(&ds, &cfg(PenaltyKind::Mcp)).unwrap().model;
    let pw: Vec<f64> = perm.iter().map(|&j| m.w[j]).collect();
    let pm = LinearModel::new(pw, m.b, m.penalty_used).unwrap();
    assert_eq!(pm.coefficient_sparsity(), m.coefficient_sparsity());
    assert_eq!(pm.accuracy(&permuted).unwrap(), m.accuracy(&ds).unwrap());
}

#[test]
fn iterates_stay_nonnegative() {
    let ds = noisy(8, 50, 4, 4);
    let mut admm = ncsvm::Admm::new(&ds, cfg(PenaltyKind::CappedL1).with_beta(1e-3)).unwrap();
    for _ in 0..50 {
        admm.step().unwrap();
        let st = admm.state();
        assert!(st.xi.iter().chain(&st.s).all(|&v| v >= 0.0));
    }
}
