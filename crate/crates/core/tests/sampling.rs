use multirace::exact::{last_probs_dp, win_probs_dp};
use multirace::quad::{integrate_gamma_weighted, QuadConfig};
use multirace::sample::{
    chunk_rng, gamma_race, mc_estimate, sample_inverted_dirichlet, simulate_walk, IDParams,
    McConfig, McMethod,
};
use multirace::specfn::gamma_sf;
use multirace::{dice_preset, game_from_goals, game_from_goals_probs, Budget};

fn within(hat: f64, p: f64, n: f64, k: f64) -> bool {
    let sd = (p * (1.0 - p) / n).sqrt();
    (hat - p).abs() <= k * sd + 1e-12
}

#[test]
fn gamma_race_marginals_match_dp() {
    let b = Budget::default();
    let cfg = McConfig {
        samples: 100_000,
        seed: 7,
        ..McConfig::default()
    };
    let n = cfg.samples as f64;
    let mut goals = vec![vec![]];
    for m in 1..=4 {
        goals = goals
            .into_iter()
            .flat_map(|v: Vec<u64>| {
                (1..=5).map(move |g| {
                    let mut w = v.clone();
                    w.push(g);
                    w
                })
            })
            .collect();
        if m < 2 {
            continue;
        }
        for gl in &goals {
            let g = game_from_goals::<f64>(gl).unwrap();
            let est = mc_estimate(&g, &cfg).unwrap();
            let win = win_probs_dp(&g, &b).unwrap().values;
            let last = last_probs_dp(&g, &b).unwrap().values;
            for l in 0..m {
                assert!(within(est.win_hat[l], win[l], n, 4.0), "{gl:?} win {l}");
                assert!(within(est.last_hat[l], last[l], n, 4.0), "{gl:?} last {l}");
            }
        }
    }
}

#[test]
fn walk_and_gamma_race_agree_on_dice() {
    let dice = dice_preset::<f64>();
    let walk = mc_estimate(
        &dice,
        &McConfig {
            samples: 200_000,
            seed: 3,
            method: McMethod::Walk,
            ..McConfig::default()
        },
    )
    .unwrap();
    let race = mc_estimate(
        &dice,
        &McConfig {
            samples: 200_000,
            seed: 4,
            ..McConfig::default()
        },
    )
    .unwrap();
    for l in 0..dice.m() {
        let sw = walk.stderr_win[l].hypot(race.stderr_win[l]);
        let sl = walk.stderr_last[l].hypot(race.stderr_last[l]);
        assert!((walk.win_hat[l] - race.win_hat[l]).abs() <= 4.0 * sw + 1e-12);
        assert!((walk.last_hat[l] - race.last_hat[l]).abs() <= 4.0 * sl + 1e-12);
    }
}

#[test]
fn full_order_matches_walk() {
    // The gamma race only proves the first and last marginals; check the middle.
    let g = game_from_goals_probs::<f64>(&[2, 3, 4, 2], &[0.2, 0.3, 0.35, 0.15]).unwrap();
    let m = g.m();
    let n = 200_000;
    let mut walk = vec![vec![0u64; m]; m];
    let mut race = vec![vec![0u64; m]; m];
    let mut rng = chunk_rng(11, 0);
    for _ in 0..n {
        let o = simulate_walk(&g, &mut rng).unwrap();
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by_key(|&k| o.per_player_finish_round[k]);
        for (place, &k) in order.iter().enumerate() {
            walk[place][k] += 1;
        }
        let r = gamma_race(&g, &mut rng).unwrap();
        for (place, &k) in r.order.iter().enumerate() {
            race[place][k] += 1;
        }
    }
    let nf = n as f64;
    for place in 0..m {
        for k in 0..m {
            let a = walk[place][k] as f64 / nf;
            let b = race[place][k] as f64 / nf;
            let p = 0.5 * (a + b);
            let sd = (2.0 * p * (1.0 - p) / nf).sqrt();
            assert!((a - b).abs() <= 4.0 * sd + 1e-12, "place {place} player {k}: {a} vs {b}");
        }
    }
}

#[test]
fn inverted_dirichlet_marginal() {
    let full = IDParams::new(vec![2.0, 3.0, 4.0], 1.5).unwrap();
    let cfg = QuadConfig::default();
    let n = 200_000;
    let mut rng = chunk_rng(5, 0);
    let draws: Vec<Vec<f64>> = (0..n)
        .map(|_| sample_inverted_dirichlet(&full, &mut rng))
        .collect();
    for &(a, b) in &[(0.5, 1.0), (1.0, 2.0), (2.0, 1.5), (0.2, 4.0)] {
        let hits = draws.iter().filter(|x| x[0] > a && x[1] > b).count();
        let hat = hits as f64 / n as f64;
        // P(X_2 > a, X_3 > b) for ID(2, 3; 1.5), conditioning on G_1.
        let (p, _) = integrate_gamma_weighted(
            |x| gamma_sf(a * x, 2.0).unwrap() * gamma_sf(b * x, 3.0).unwrap(),
            1.5,
            1.0,
            &cfg,
        )
        .unwrap();
        assert!(within(hat, p, n as f64, 4.0), "({a},{b}): {hat} vs {p}");
    }
}

#[test]
fn estimates_ignore_worker_count() {
    let dice = dice_preset::<f64>();
    let cfg = McConfig {
        samples: 150_000,
        seed: 9,
        chunk_size: 10_000,
        ..McConfig::default()
    };
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| mc_estimate(&dice, &cfg).unwrap())
    };
    assert_eq!(run(1), run(4));
    let walk = McConfig {
        method: McMethod::Walk,
        ..cfg
    };
    assert_eq!(mc_estimate(&dice, &walk).unwrap(), mc_estimate(&dice, &walk).unwrap());
}

#[test]
fn pinned_dice_walk() {
    let dice = dice_preset::<f64>();
    let mut rng = chunk_rng(42, 0);
    let o = simulate_walk(&dice, &mut rng).unwrap();
    assert_eq!(o.winner, 3);
    assert_eq!(o.last, 1);
    assert_eq!(o.rounds_to_win, 11);
    assert_eq!(
        o.per_player_finish_round,
        [14, 61, 18, 11, 36, 37, 33, 55, 25, 23, 34]
    );
}
