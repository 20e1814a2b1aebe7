//! Monte Carlo estimates by walk simulation and by the gamma race, and the
//! inverted Dirichlet law.
//!
//! Sampling runs in `f64` regardless of the game's scalar type; results are
//! converted on the way out. Chunk `i` of an estimate draws from stream `i` of a
//! ChaCha generator keyed by the seed, so estimates do not depend on how chunks
//! are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;

use crate::error::{RaceError, Result};
use crate::model::GameSpec;
use crate::scalar::{lit, Real};
use crate::specfn::log_mv_beta;

/// Hard cap on the length of a simulated walk.
pub const MAX_ROUNDS: u64 = 1_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum McMethod {
    /// Round-by-round simulation of the game.
    Walk,
    /// Finishing times `G_ℓ / p_ℓ` with independent `G_ℓ ~ Gamma(n_ℓ, 1)`.
    GammaRace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub samples: u64,
    pub seed: u64,
    pub method: McMethod,
    pub chunk_size: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            samples: 100_000,
            seed: 0,
            method: McMethod::GammaRace,
            chunk_size: 1 << 16,
        }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 || self.chunk_size == 0 {
            return Err(RaceError::invalid("samples and chunk_size must be at least 1"));
        }
        Ok(())
    }
}

/// One simulated game. Rounds are counted from 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkOutcome {
    pub winner: usize,
    pub last: usize,
    pub rounds_to_win: u64,
    pub per_player_finish_round: Vec<u64>,
}

/// One draw of the gamma race: finishing times and the full order they induce.
#[derive(Debug, Clone, PartialEq)]
pub struct RaceOrder<T> {
    pub winner: usize,
    pub last: usize,
    /// Players sorted by finishing time, first to last.
    pub order: Vec<usize>,
    pub times: Vec<T>,
}

/// Empirical win and last-place frequencies with binomial standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct McEstimate<T> {
    pub win_hat: Vec<T>,
    pub last_hat: Vec<T>,
    pub stderr_win: Vec<T>,
    pub stderr_last: Vec<T>,
    /// Mean finishing round (walk) or finishing time (gamma race) per player.
    pub mean_finish: Vec<T>,
    pub stderr_finish: Vec<T>,
    pub samples: u64,
}

/// Walk simulator with the player-selection alias table built once.
#[derive(Debug, Clone)]
pub struct Walker {
    goals: Vec<u64>,
    pick: WeightedAliasIndex<f64>,
}

impl Walker {
    pub fn new<T: Real>(game: &GameSpec<T>) -> Result<Self> {
        let goals = game.int_goals()?;
        let weights = game.probs().iter().map(|p| p.approx()).collect();
        let pick = WeightedAliasIndex::new(weights)
            .map_err(|e| RaceError::invalid(format!("alias table: {e}")))?;
        Ok(Walker { goals, pick })
    }

    /// Plays rounds until every player has reached their goal.
    pub fn run<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<WalkOutcome> {
        let m = self.goals.len();
        let mut steps = vec![0u64; m];
        let mut finish = vec![0u64; m];
        let mut open = m;
        let mut round = 0u64;
        let mut winner = usize::MAX;
        let mut last = usize::MAX;
        while open > 0 {
            round += 1;
            if round > MAX_ROUNDS {
                return Err(RaceError::Runaway { rounds: MAX_ROUNDS });
            }
            let l = self.pick.sample(rng);
            steps[l] += 1;
            if steps[l] == self.goals[l] {
                finish[l] = round;
                if winner == usize::MAX {
                    winner = l;
                }
                last = l;
                open -= 1;
            }
        }
        Ok(WalkOutcome {
            winner,
            last,
            rounds_to_win: finish[winner],
            per_player_finish_round: finish,
        })
    }
}

/// Simulates one game round by round.
pub fn simulate_walk<T: Real, R: Rng + ?Sized>(game: &GameSpec<T>, rng: &mut R) -> Result<WalkOutcome> {
    Walker::new(game)?.run(rng)
}

/// Gamma-race sampler with the per-player distributions built once.
#[derive(Debug, Clone)]
pub struct GammaRacer {
    shapes: Vec<Gamma<f64>>,
    probs: Vec<f64>,
}

impl GammaRacer {
    pub fn new<T: Real>(game: &GameSpec<T>) -> Result<Self> {
        let shapes = game
            .goals()
            .iter()
            .map(|n| Gamma::new(n.approx(), 1.0).map_err(|e| RaceError::invalid(e.to_string())))
            .collect::<Result<_>>()?;
        Ok(GammaRacer {
            shapes,
            probs: game.probs().iter().map(|p| p.approx()).collect(),
        })
    }

    fn times<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut Vec<f64>) {
        out.clear();
        out.extend(
            self.shapes
                .iter()
                .zip(&self.probs)
                .map(|(g, &p)| g.sample(rng) / p),
        );
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> RaceOrder<f64> {
        let mut times = Vec::with_capacity(self.probs.len());
        self.times(rng, &mut times);
        let mut order: Vec<usize> = (0..times.len()).collect();
        order.sort_by(|&a, &b| times[a].total_cmp(&times[b]));
        RaceOrder {
            winner: order[0],
            last: *order.last().expect("m >= 2"),
            order,
            times,
        }
    }
}

/// One draw of the gamma race.
pub fn gamma_race<T: Real, R: Rng + ?Sized>(game: &GameSpec<T>, rng: &mut R) -> Result<RaceOrder<T>> {
    let r = GammaRacer::new(game)?.draw(rng);
    Ok(RaceOrder {
        winner: r.winner,
        last: r.last,
        order: r.order,
        times: r.times.into_iter().map(lit).collect(),
    })
}

/// Generator for chunk `chunk` of a run seeded with `seed`.
pub fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

#[derive(Debug, Clone)]
struct Tally {
    win: Vec<u64>,
    last: Vec<u64>,
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
}

impl Tally {
    fn new(m: usize) -> Self {
        Tally {
            win: vec![0; m],
            last: vec![0; m],
            sum: vec![0.0; m],
            sum_sq: vec![0.0; m],
        }
    }

    fn record(&mut self, winner: usize, last: usize, finish: impl Iterator<Item = f64>) {
        self.win[winner] += 1;
        self.last[last] += 1;
        for (k, t) in finish.enumerate() {
            self.sum[k] += t;
            self.sum_sq[k] += t * t;
        }
    }

    fn merge(mut self, other: &Tally) -> Self {
        for k in 0..self.win.len() {
            self.win[k] += other.win[k];
            self.last[k] += other.last[k];
            self.sum[k] += other.sum[k];
            self.sum_sq[k] += other.sum_sq[k];
        }
        self
    }
}

/// Aggregates `cfg.samples` independent games.
pub fn mc_estimate<T: Real>(game: &GameSpec<T>, cfg: &McConfig) -> Result<McEstimate<T>> {
    cfg.validate()?;
    let m = game.m();
    let chunks = cfg.samples.div_ceil(cfg.chunk_size);
    let size = |c: u64| cfg.chunk_size.min(cfg.samples - c * cfg.chunk_size);

    let tallies: Vec<Tally> = match cfg.method {
        McMethod::Walk => {
            let walker = Walker::new(game)?;
            (0..chunks)
                .into_par_iter()
                .map(|c| {
                    let mut rng = chunk_rng(cfg.seed, c);
                    let mut t = Tally::new(m);
                    for _ in 0..size(c) {
                        let o = walker.run(&mut rng)?;
                        t.record(o.winner, o.last, o.per_player_finish_round.iter().map(|&r| r as f64));
                    }
                    Ok(t)
                })
                .collect::<Result<_>>()?
        }
        McMethod::GammaRace => {
            let racer = GammaRacer::new(game)?;
            (0..chunks)
                .into_par_iter()
                .map(|c| {
                    let mut rng = chunk_rng(cfg.seed, c);
                    let mut t = Tally::new(m);
                    let mut times = Vec::with_capacity(m);
                    for _ in 0..size(c) {
                        racer.times(&mut rng, &mut times);
                        let (mut lo, mut hi) = (0, 0);
                        for k in 1..m {
                            if times[k] < times[lo] {
                                lo = k;
                            }
                            if times[k] > times[hi] {
                                hi = k;
                            }
                        }
                        t.record(lo, hi, times.iter().copied());
                    }
                    Ok(t)
                })
                .collect::<Result<_>>()?
        }
    };
    let total = tallies
        .iter()
        .fold(Tally::new(m), |acc, t| acc.merge(t));

    let n = cfg.samples as f64;
    let freq = |c: &[u64]| -> (Vec<T>, Vec<T>) {
        c.iter()
            .map(|&k| {
                let p = k as f64 / n;
                (lit::<T>(p), lit::<T>((p * (1.0 - p) / n).sqrt()))
            })
            .unzip()
    };
    let (win_hat, stderr_win) = freq(&total.win);
    let (last_hat, stderr_last) = freq(&total.last);
    let (mean_finish, stderr_finish) = (0..m)
        .map(|k| {
            let mean = total.sum[k] / n;
            let var = if cfg.samples > 1 {
                ((total.sum_sq[k] - n * mean * mean) / (n - 1.0)).max(0.0)
            } else {
                0.0
            };
            (lit::<T>(mean), lit::<T>((var / n).sqrt()))
        })
        .unzip();
    Ok(McEstimate {
        win_hat,
        last_hat,
        stderr_win,
        stderr_last,
        mean_finish,
        stderr_finish,
        samples: cfg.samples,
    })
}

/// Parameters of `ID(n_2, ..., n_m; n_1, λ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IDParams<T> {
    pub numer_shapes: Vec<T>,
    pub denom_shape: T,
    pub lambda: T,
}

impl<T: Real> IDParams<T> {
    /// `λ = 1`.
    pub fn new(numer_shapes: Vec<T>, denom_shape: T) -> Result<Self> {
        Self::with_lambda(numer_shapes, denom_shape, T::one())
    }

    pub fn with_lambda(numer_shapes: Vec<T>, denom_shape: T, lambda: T) -> Result<Self> {
        let ok = |v: T| v.is_finite() && v > T::zero();
        if numer_shapes.is_empty() {
            return Err(RaceError::invalid("need at least one numerator shape"));
        }
        if !numer_shapes.iter().all(|&v| ok(v)) || !ok(denom_shape) || !ok(lambda) {
            return Err(RaceError::invalid(
                "inverted Dirichlet shapes and lambda must be positive",
            ));
        }
        Ok(IDParams {
            numer_shapes,
            denom_shape,
            lambda,
        })
    }

    /// All shapes with `n_1` first.
    fn all_shapes(&self) -> Vec<T> {
        std::iter::once(self.denom_shape)
            .chain(self.numer_shapes.iter().copied())
            .collect()
    }
}

/// `λ (G_2 / G_1, ..., G_m / G_1)` for independent `G_k ~ Gamma(n_k, 1)`.
pub fn sample_inverted_dirichlet<T: Real, R: Rng + ?Sized>(params: &IDParams<T>, rng: &mut R) -> Vec<T> {
    let draw = |shape: T, rng: &mut R| {
        Gamma::new(shape.approx(), 1.0)
            .expect("validated shape")
            .sample(rng)
    };
    let g1 = draw(params.denom_shape, rng);
    let lambda = params.lambda.approx();
    params
        .numer_shapes
        .iter()
        .map(|&n| lit(lambda * draw(n, rng) / g1))
        .collect()
}

/// Log density of `ID(n_2, ..., n_m; n_1, λ)` at `point`.
pub fn id_log_density<T: Real>(point: &[T], params: &IDParams<T>) -> Result<T> {
    if point.len() != params.numer_shapes.len() {
        return Err(RaceError::domain("point dimension does not match the parameters"));
    }
    if point.iter().any(|&s| !(s.is_finite() && s > T::zero())) {
        return Err(RaceError::domain("inverted Dirichlet density needs positive coordinates"));
    }
    let shapes = params.all_shapes();
    let total = shapes.iter().fold(T::zero(), |a, &n| a + n);
    let mut acc = params.denom_shape * params.lambda.ln() - log_mv_beta(&shapes)?;
    let mut s_sum = params.lambda;
    for (&s, &n) in point.iter().zip(&params.numer_shapes) {
        acc = acc + (n - T::one()) * s.ln();
        s_sum = s_sum + s;
    }
    Ok(acc - total * s_sum.ln())
}
