use hypervec::embeddings::VectorTables;
use hypervec::rng::rng_from_seed;
use hypervec::xling::{fit_mapping, project, solve_ridge};
use hypervec::{BilingualLexicon, EmbeddingStore, MappingModel};
use rand::seq::SliceRandom;
use rand_distr::{Distribution, Normal};

fn random_matrix(rows: usize, cols: usize, rng: &mut impl rand::Rng) -> Vec<f64> {
    (0..rows * cols).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// Row-major `(n × k) · (k × m)`.
fn matmul(a: &[f64], b: &[f64], n: usize, k: usize, m: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * m];
    for i in 0..n {
        for j in 0..m {
            for l in 0..k {
                out[i * m + j] += a[i * k + l] * b[l * m + j];
            }
        }
    }
    out
}

fn frobenius(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[test]
fn recovers_planted_mapping() {
    let (n, d) = (500, 10);
    let mut rng = rng_from_seed(1);
    let planted = random_matrix(d, d, &mut rng);
    let x = random_matrix(n, d, &mut rng);
    let noise = Normal::new(0.0, 0.01).unwrap();
    let y: Vec<f64> = matmul(&x, &planted, n, d, d).into_iter().map(|v| v + noise.sample(&mut rng)).collect();

    let model = solve_ridge(&x, &y, n, d, d, 1e-3).unwrap();
    let diff: Vec<f64> = model.weights().iter().zip(&planted).map(|(a, b)| a - b).collect();
    let rel = frobenius(&diff) / frobenius(&planted);
    assert!(rel < 0.05, "relative error {}", rel);
}

#[test]
fn unregularized_square_system_interpolates() {
    let d = 8;
    let mut rng = rng_from_seed(2);
    let x = random_matrix(d, d, &mut rng);
    let y = random_matrix(d, d, &mut rng);
    let model = solve_ridge(&x, &y, d, d, d, 0.0).unwrap();
    let fitted = matmul(&x, model.weights(), d, d, d);
    let residual: Vec<f64> = fitted.iter().zip(&y).map(|(a, b)| a - b).collect();
    assert!(frobenius(&residual) < 1e-8);
}

#[test]
fn row_order_does_not_matter() {
    let (n, d1, d2) = (60, 5, 4);
    let mut rng = rng_from_seed(3);
    let x = random_matrix(n, d1, &mut rng);
    let y = random_matrix(n, d2, &mut rng);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let xs: Vec<f64> = order.iter().flat_map(|&i| x[i * d1..(i + 1) * d1].to_vec()).collect();
    let ys: Vec<f64> = order.iter().flat_map(|&i| y[i * d2..(i + 1) * d2].to_vec()).collect();
    let a = solve_ridge(&x, &y, n, d1, d2, 0.1).unwrap();
    let b = solve_ridge(&xs, &ys, n, d1, d2, 0.1).unwrap();
    for (p, q) in a.weights().iter().zip(b.weights()) {
        assert!((p - q).abs() < 1e-10);
    }
}

#[test]
fn larger_lambda_shrinks_weights() {
    let (n, d) = (40, 6);
    let mut rng = rng_from_seed(4);
    let x = random_matrix(n, d, &mut rng);
    let y = random_matrix(n, d, &mut rng);
    let norms: Vec<f64> = [0.0, 0.01, 0.1, 1.0, 10.0, 100.0]
        .iter()
        .map(|&l| solve_ridge(&x, &y, n, d, d, l).unwrap().frobenius_norm())
        .collect();
    for w in norms.windows(2) {
        assert!(w[1] < w[0], "{:?}", norms);
    }
}

fn store(prefix: &str, n: usize, d: usize, rng: &mut impl rand::Rng) -> EmbeddingStore {
    EmbeddingStore::from_rows((0..n).map(|i| format!("{}{}", prefix, i)).collect(), d, random_matrix(n, d, rng)).unwrap()
}

#[test]
fn project_matches_matrix_product() {
    let mut rng = rng_from_seed(5);
    let source = store("s", 25, 4, &mut rng);
    let model = MappingModel::new(random_matrix(4, 3, &mut rng), 4, 3, 0.5).unwrap();
    let projected = project(&model, &source).unwrap();
    let expected = matmul(source.word_table(), model.weights(), 25, 4, 3);
    assert_eq!(projected.words(), source.words());
    for (a, b) in projected.word_table().iter().zip(&expected) {
        assert!((a - b).abs() < 1e-12);
    }
    assert!(project(&MappingModel::identity(3), &source).is_err());
}

#[test]
fn fit_uses_entries_present_in_both_spaces() {
    let mut rng = rng_from_seed(6);
    let source = store("s", 30, 3, &mut rng);
    let target = store("t", 30, 3, &mut rng);
    let mut candidates: Vec<(String, String, f64)> =
        (0..30).map(|i| (format!("s{}", i), format!("t{}", i), 1.0)).collect();
    candidates.push(("s0".into(), "t5".into(), 0.5));
    candidates.push(("missing".into(), "t1".into(), 1.0));
    let lexicon = BilingualLexicon::from_candidates(candidates);
    assert_eq!(lexicon.len(), 31);

    let (model, report) = fit_mapping(&source, &target, &lexicon, 0.01).unwrap();
    assert_eq!((report.rows, report.skipped), (30, 1));
    let x: Vec<f64> = (0..30).flat_map(|i| source.word(i).to_vec()).collect();
    let direct = solve_ridge(&x, target.word_table(), 30, 3, 3, 0.01).unwrap();
    for (a, b) in model.weights().iter().zip(direct.weights()) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn model_file_round_trip() {
    let mut rng = rng_from_seed(7);
    let model = MappingModel::new(random_matrix(5, 2, &mut rng), 5, 2, 0.25).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("map.bin");
    model.save(&path).unwrap();
    let bytes = std::fs::read(&path).unwrap();
    assert_eq!(&bytes[..4], b"HVMP");
    assert_eq!(bytes.len(), 4 + 1 + 16 + 8 * 10 + 8);
    assert_eq!(MappingModel::load(&path).unwrap(), model);
    std::fs::write(&path, &bytes[..bytes.len() - 1]).unwrap();
    assert!(MappingModel::load(&path).is_err());
}

#[test]
fn negative_lambda_is_rejected() {
    assert!(solve_ridge(&[1.0], &[1.0], 1, 1, 1, -1.0).is_err());
    assert!(solve_ridge(&[], &[], 0, 1, 1, 1.0).is_err());
}
