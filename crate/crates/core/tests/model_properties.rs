use multirace::model::{classify_recurrence, Verdict};
use multirace::{game_from_goals, GameSpec64};
use proptest::prelude::*;

fn simplex(m: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, m).prop_map(|w| {
        let s: f64 = w.iter().sum();
        w.iter().map(|x| x / s).collect()
    })
}

proptest! {
    #[test]
    fn canonical_probs_sum_to_one(goals in prop::collection::vec(1u64..10_000, 2..12)) {
        let g: GameSpec64 = game_from_goals(&goals).unwrap();
        let s: f64 = g.probs().iter().sum();
        prop_assert!((s - 1.0).abs() <= 1e-15);
    }

    #[test]
    fn eta_is_at_most_one_and_permutation_invariant(p in simplex(2..=6), shift in 0usize..6) {
        let v = classify_recurrence(&p).unwrap();
        prop_assert!(v.eta <= 1.0);
        let mut q = p.clone();
        q.rotate_left(shift % p.len());
        q.reverse();
        prop_assert_eq!(classify_recurrence(&q).unwrap(), v);
    }
}

#[test]
fn uniform_vectors_reach_eta_one() {
    for m in 2..=8 {
        let p = vec![1.0 / m as f64; m];
        let v = classify_recurrence(&p).unwrap();
        assert!((v.eta - 1.0).abs() <= 1e-12);
        let want = if m <= 3 { Verdict::Recurrent } else { Verdict::Transient };
        assert_eq!(v.verdict, want);
    }
    let v = classify_recurrence(&[0.3, 0.3, 0.4]).unwrap();
    assert!(v.eta < 1.0 && v.verdict == Verdict::Transient);
}
