use multirace::exact::{
    last_prob_inclusion_exclusion, last_probs_dp, last_probs_exact, win_prob_negmulti,
    win_prob_sum_beta, win_prob_two_player, win_probs_dp,
};
use multirace::quad::{last_prob_quad, win_prob_quad, QuadConfig};
use multirace::{game_from_goals, game_from_goals_probs, Budget, GameSpec64, Rational};
use proptest::prelude::*;

/// Every goal vector with `m` entries in `1..=max`.
fn grid(m: usize, max: u64) -> Vec<Vec<u64>> {
    let mut out = vec![vec![]];
    for _ in 0..m {
        out = out
            .into_iter()
            .flat_map(|v| {
                (1..=max).map(move |g| {
                    let mut w = v.clone();
                    w.push(g);
                    w
                })
            })
            .collect();
    }
    out
}

fn game(goals: &[u64]) -> GameSpec64 {
    game_from_goals(goals).unwrap()
}

#[test]
fn exact_methods_agree_up_to_six() {
    let b = Budget::default();
    for m in 2..=4 {
        for goals in grid(m, 6) {
            let g = game(&goals);
            let win = win_probs_dp(&g, &b).unwrap().values;
            let last = last_probs_dp(&g, &b).unwrap().values;
            for l in 0..m {
                let nm = win_prob_negmulti(&g, l, &b).unwrap();
                let sb = win_prob_sum_beta(&g, l, &b).unwrap();
                let ie = last_prob_inclusion_exclusion(&g, l, &b).unwrap();
                assert!((win[l] - nm).abs() <= 1e-10, "{goals:?} {l}: {} {nm}", win[l]);
                assert!((win[l] - sb).abs() <= 1e-9, "{goals:?} {l}: {} {sb}", win[l]);
                assert!((last[l] - ie).abs() <= 1e-9, "{goals:?} {l}: {} {ie}", last[l]);
            }
            assert!((win.iter().sum::<f64>() - 1.0).abs() <= 1e-10);
            assert!((last.iter().sum::<f64>() - 1.0).abs() <= 1e-10);
        }
    }
}

#[test]
fn quad_matches_dp_up_to_six() {
    let cfg = QuadConfig::default();
    let b = Budget::default();
    for m in 2..=4 {
        for goals in grid(m, 6) {
            let g = game(&goals);
            let win = win_probs_dp(&g, &b).unwrap().values;
            let last = last_probs_dp(&g, &b).unwrap().values;
            let (mut sw, mut sl) = (0.0, 0.0);
            for l in 0..m {
                let qw = win_prob_quad(&g, l, &cfg).unwrap();
                let ql = last_prob_quad(&g, l, &cfg).unwrap();
                assert!((qw - win[l]).abs() <= 10.0 * cfg.abs_tol, "{goals:?} {l}");
                assert!((ql - last[l]).abs() <= 10.0 * cfg.abs_tol, "{goals:?} {l}");
                sw += qw;
                sl += ql;
            }
            let slack = m as f64 * 10.0 * cfg.abs_tol;
            assert!((sw - 1.0).abs() <= slack && (sl - 1.0).abs() <= slack);
        }
    }
}

#[test]
fn win_increases_in_opponent_goals() {
    let b = Budget::default();
    for m in 2..=3 {
        for goals in grid(m, 8) {
            let base = win_probs_dp(&game(&goals), &b).unwrap().values[0];
            for k in 1..m {
                let mut up = goals.clone();
                up[k] += 1;
                let v = win_probs_dp(&game(&up), &b).unwrap().values[0];
                assert!(v > base, "{goals:?} -> {up:?}: {base} vs {v}");
            }
        }
    }
}

#[test]
fn two_player_ordering() {
    for n1 in 1..=50u64 {
        for n2 in 1..=50u64 {
            let v: f64 = win_prob_two_player(n1, n2).unwrap();
            assert_eq!(v > 0.5, n1 < n2, "({n1},{n2}) -> {v}");
        }
    }
}

#[test]
fn last_place_is_not_monotone() {
    let b = Budget::default();
    let a = last_probs_dp(&game(&[1, 1, 1]), &b).unwrap().values[0];
    let c = last_probs_dp(&game(&[1, 1, 2]), &b).unwrap().values[0];
    assert!(a > c, "{a} vs {c}");
    let exact = last_probs_exact(&[1, 1, 2], &b).unwrap();
    assert_eq!(exact[0], Rational::new(23.into(), 72.into()));
}

#[test]
fn quad_increases_in_real_opponent_goal() {
    let cfg = QuadConfig::default();
    for n1 in [1.0, 2.5, 4.0] {
        let mut prev = -1.0;
        for i in 0..=20 {
            let n2 = 1.0 + 0.25 * i as f64;
            let g = multirace::game_from_real_goals(&[n1, n2]).unwrap();
            let v = win_prob_quad(&g, 0, &cfg).unwrap();
            assert!(v > prev, "n1 {n1} n2 {n2}: {prev} then {v}");
            prev = v;
        }
    }
}

#[test]
fn quad_is_far_faster_than_last_dp() {
    let dice = multirace::dice_preset::<f64>();
    let t = std::time::Instant::now();
    last_probs_dp(&dice, &Budget::default()).unwrap();
    let dp = t.elapsed();
    let t = std::time::Instant::now();
    last_prob_quad(&dice, 0, &QuadConfig::default()).unwrap();
    let quad = t.elapsed();
    assert!(dp > quad * 100, "dp {dp:?}, quad {quad:?}");
}

fn goals_and_probs() -> impl Strategy<Value = (Vec<u64>, Vec<f64>)> {
    (2usize..=4).prop_flat_map(|m| {
        (
            prop::collection::vec(1u64..=5, m),
            prop::collection::vec(0.05f64..1.0, m),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn permutation_equivariance((goals, w) in goals_and_probs(), seed in any::<u64>()) {
        let b = Budget::default();
        let g = game_from_goals_probs(&goals, &w).unwrap();
        let m = goals.len();
        let mut order: Vec<usize> = (0..m).collect();
        order.rotate_left((seed % m as u64) as usize);
        if seed & 1 == 1 {
            order.swap(0, m - 1);
        }
        let h = g.permuted(&order);
        let (wa, wb) = (win_probs_dp(&g, &b).unwrap().values, win_probs_dp(&h, &b).unwrap().values);
        let (la, lb) = (last_probs_dp(&g, &b).unwrap().values, last_probs_dp(&h, &b).unwrap().values);
        for (i, &o) in order.iter().enumerate() {
            prop_assert!((wb[i] - wa[o]).abs() <= 1e-13);
            prop_assert!((lb[i] - la[o]).abs() <= 1e-13);
        }
    }

    #[test]
    fn negmulti_and_inclusion_exclusion_with_free_probs((goals, w) in goals_and_probs()) {
        let b = Budget::default();
        let g = game_from_goals_probs(&goals, &w).unwrap();
        let win = win_probs_dp(&g, &b).unwrap().values;
        let last = last_probs_dp(&g, &b).unwrap().values;
        for l in 0..goals.len() {
            prop_assert!((win_prob_negmulti(&g, l, &b).unwrap() - win[l]).abs() <= 1e-10);
            prop_assert!((last_prob_inclusion_exclusion(&g, l, &b).unwrap() - last[l]).abs() <= 1e-9);
        }
    }
}
