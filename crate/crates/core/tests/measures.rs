use hypervec::embeddings::{cosine, norm};
use hypervec::measures::{direction, hyper_score, pair_features, Measure};
use hypervec::{Direction, EmbeddingStore};
use proptest::prelude::*;

fn two(u: &[f64], v: &[f64]) -> EmbeddingStore {
    let mut values = u.to_vec();
    values.extend_from_slice(v);
    EmbeddingStore::from_rows(vec!["u".into(), "v".into()], u.len(), values).unwrap()
}

fn nonzero_pair(d: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (prop::collection::vec(-5.0f64..5.0, d), prop::collection::vec(-5.0f64..5.0, d))
        .prop_filter("non-zero vectors", |(u, v)| norm(u) > 1e-3 && norm(v) > 1e-3)
}

proptest! {
    #[test]
    fn forward_times_backward_is_squared_cosine((u, v) in nonzero_pair(7)) {
        let s = two(&u, &v);
        let c = cosine(&u, &v).unwrap();
        let prod = hyper_score(&s, "u", "v").unwrap() * hyper_score(&s, "v", "u").unwrap();
        prop_assert!((prod - c * c).abs() < 1e-9);
    }

    #[test]
    fn scores_ignore_global_scaling((u, v) in nonzero_pair(6), a in 0.01f64..100.0) {
        let s = two(&u, &v);
        let mut scaled = s.clone();
        scaled.scale(a);
        let before = hyper_score(&s, "u", "v").unwrap();
        let after = hyper_score(&scaled, "u", "v").unwrap();
        prop_assert!((before - after).abs() <= 1e-9 * (1.0 + before.abs()));
        prop_assert_eq!(direction(&s, "u", "v").unwrap(), direction(&scaled, "u", "v").unwrap());
    }

    #[test]
    fn direction_is_antisymmetric((u, v) in nonzero_pair(5)) {
        let s = two(&u, &v);
        let forward = direction(&s, "u", "v").unwrap();
        let backward = direction(&s, "v", "u").unwrap();
        let expected = match forward {
            Direction::UIsHyponym => Direction::VIsHyponym,
            Direction::VIsHyponym => Direction::UIsHyponym,
            Direction::Undecided => Direction::Undecided,
        };
        prop_assert_eq!(backward, expected);
        prop_assert_eq!(forward == Direction::UIsHyponym, norm(&v) > norm(&u));
    }

    #[test]
    fn features_follow_layout((u, v) in nonzero_pair(4)) {
        let s = two(&u, &v);
        let f = pair_features(&s, "u", "v").unwrap();
        prop_assert_eq!(f.len(), 4 + 3);
        for i in 0..4 {
            prop_assert_eq!(f[i], v[i] - u[i]);
        }
        prop_assert_eq!(f[4], cosine(&u, &v).unwrap());
        prop_assert_eq!(f[5], norm(&u));
        prop_assert_eq!(f[6], norm(&v));
    }
}

#[test]
fn measure_names_round_trip() {
    for m in [Measure::HyperScore, Measure::Cosine] {
        assert_eq!(m.name().parse::<Measure>().unwrap(), m);
    }
    assert!("nope".parse::<Measure>().is_err());
}

#[test]
fn cosine_measure_is_symmetric_and_hyper_score_is_not() {
    let s = two(&[1.0, 0.0], &[3.0, 1.0]);
    let a = Measure::Cosine.score(&s, "u", "v").unwrap();
    assert_eq!(a, Measure::Cosine.score(&s, "v", "u").unwrap());
    assert!(Measure::HyperScore.score(&s, "u", "v").unwrap() > Measure::HyperScore.score(&s, "v", "u").unwrap());
}
