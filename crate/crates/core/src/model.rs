//! Game specification, result containers and the recurrence classifier.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{RaceError, Result};
use crate::scalar::{lit, Accumulator, Neumaier, Real};

/// Goals of the two-dice game: player `ℓ` advances when the dice sum to `ℓ + 1`.
pub const DICE_GOALS: [u64; 11] = [1, 2, 3, 4, 5, 6, 5, 4, 3, 2, 1];

/// Input probability sums further than this from 1 are reported when normalised.
const NORMALIZATION_REPORT: f64 = 1e-9;

/// A race: `m` players with goals `n_ℓ` and per-round advancing probabilities `p_ℓ`.
///
/// Goals are stored as reals so the quadrature methods can use the continuous
/// extension; the lattice and finite-sum methods ask for [`GameSpec::int_goals`].
#[derive(Debug, Clone, PartialEq)]
pub struct GameSpec<T> {
    goals: Vec<T>,
    probs: Vec<T>,
    input_sum: T,
}

impl<T: Real> GameSpec<T> {
    fn build(goals: Vec<T>, probs: Option<Vec<T>>) -> Result<Self> {
        if goals.len() < 2 {
            return Err(RaceError::invalid(format!(
                "a race needs at least two players, got {}",
                goals.len()
            )));
        }
        for (i, &g) in goals.iter().enumerate() {
            if !g.is_finite() || g <= T::zero() {
                return Err(RaceError::invalid(format!(
                    "goal of player {} must be positive, got {g:?}",
                    i + 1
                )));
            }
        }
        let given = probs.is_some();
        let raw = probs.unwrap_or_else(|| goals.clone());
        if raw.len() != goals.len() {
            return Err(RaceError::invalid(format!(
                "{} goals but {} probabilities",
                goals.len(),
                raw.len()
            )));
        }
        for (i, &p) in raw.iter().enumerate() {
            if !p.is_finite() || p <= T::zero() {
                return Err(RaceError::invalid(format!(
                    "probability of player {} must be positive, got {p:?}",
                    i + 1
                )));
            }
        }
        let mut acc = Neumaier::default();
        for &p in &raw {
            acc.add(p);
        }
        let input_sum = acc.total();
        let probs = raw.iter().map(|&p| p / input_sum).collect();
        Ok(GameSpec {
            goals,
            probs,
            // Weights derived from goals are not user input.
            input_sum: if given { input_sum } else { T::one() },
        })
    }

    pub fn m(&self) -> usize {
        self.goals.len()
    }

    pub fn goals(&self) -> &[T] {
        &self.goals
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    /// Goals as integers, or a validation error naming the first non-integer goal.
    pub fn int_goals(&self) -> Result<Vec<u64>> {
        self.goals
            .iter()
            .enumerate()
            .map(|(i, &g)| {
                if g.fract() == T::zero() && g >= T::one() {
                    g.to_u64().ok_or_else(|| {
                        RaceError::invalid(format!("goal of player {} is too large", i + 1))
                    })
                } else {
                    Err(RaceError::invalid(format!(
                        "goal of player {} is {g:?}; exact methods need integer goals, use quad",
                        i + 1
                    )))
                }
            })
            .collect()
    }

    /// True when `p_ℓ = n_ℓ / Σ n` for every player (to 1e-12).
    pub fn is_canonical(&self) -> bool {
        let total = self.goals.iter().fold(T::zero(), |a, &g| a + g);
        let tol = lit::<T>(1e-12).max(T::epsilon() * lit(16.0));
        self.goals
            .iter()
            .zip(&self.probs)
            .all(|(&g, &p)| (g / total - p).abs() <= tol)
    }

    /// The raw probability sum when normalisation changed it by more than 1e-9.
    pub fn normalization_warning(&self) -> Option<T> {
        ((self.input_sum - T::one()).abs() > lit(NORMALIZATION_REPORT)).then_some(self.input_sum)
    }

    /// The same game with player `player` moved to the front and the others in
    /// their original order.
    pub fn with_player_first(&self, player: usize) -> Result<Self> {
        self.check_player(player)?;
        let order: Vec<usize> = std::iter::once(player)
            .chain((0..self.m()).filter(|&k| k != player))
            .collect();
        Ok(self.permuted(&order))
    }

    /// Reorders players: entry `i` of the result is player `order[i]` of `self`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        GameSpec {
            goals: order.iter().map(|&i| self.goals[i]).collect(),
            probs: order.iter().map(|&i| self.probs[i]).collect(),
            input_sum: self.input_sum,
        }
    }

    pub(crate) fn check_player(&self, player: usize) -> Result<()> {
        if player >= self.m() {
            return Err(RaceError::invalid(format!(
                "player index {player} out of range for {} players",
                self.m()
            )));
        }
        Ok(())
    }
}

/// Canonical game: `p_ℓ = n_ℓ / Σ n_k`.
pub fn game_from_goals<T: Real>(goals: &[u64]) -> Result<GameSpec<T>> {
    GameSpec::build(int_to_real(goals)?, None)
}

/// Canonical game over real-valued goals.
pub fn game_from_real_goals<T: Real>(goals: &[T]) -> Result<GameSpec<T>> {
    GameSpec::build(goals.to_vec(), None)
}

/// Game with explicit advancing probabilities, normalised to sum to one.
pub fn game_from_goals_probs<T: Real>(goals: &[u64], probs: &[T]) -> Result<GameSpec<T>> {
    GameSpec::build(int_to_real(goals)?, Some(probs.to_vec()))
}

/// Game with real goals and explicit probabilities.
pub fn game_from_real_goals_probs<T: Real>(goals: &[T], probs: &[T]) -> Result<GameSpec<T>> {
    GameSpec::build(goals.to_vec(), Some(probs.to_vec()))
}

fn int_to_real<T: Real>(goals: &[u64]) -> Result<Vec<T>> {
    goals
        .iter()
        .enumerate()
        .map(|(i, &g)| {
            if g == 0 {
                Err(RaceError::invalid(format!(
                    "goal of player {} must be at least 1",
                    i + 1
                )))
            } else {
                T::from_u64(g).ok_or_else(|| RaceError::invalid("goal too large"))
            }
        })
        .collect()
}

/// The two-dice game with eleven players.
pub fn dice_preset<T: Real>() -> GameSpec<T> {
    game_from_goals(&DICE_GOALS).expect("preset is valid")
}

#[derive(Serialize, Deserialize)]
struct GameSpecJson {
    goals: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    probs: Option<Vec<f64>>,
}

impl<T: Real> Serialize for GameSpec<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let f = |v: &[T]| v.iter().map(|x| x.approx()).collect::<Vec<_>>();
        GameSpecJson {
            goals: f(&self.goals),
            probs: Some(f(&self.probs)),
        }
        .serialize(s)
    }
}

impl<'de, T: Real> Deserialize<'de> for GameSpec<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = GameSpecJson::deserialize(d)?;
        let conv = |v: Vec<f64>| v.into_iter().map(lit::<T>).collect::<Vec<_>>();
        GameSpec::build(conv(raw.goals), raw.probs.map(conv)).map_err(serde::de::Error::custom)
    }
}

/// Which place a probability vector refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Win,
    Last,
}

/// The algorithm that produced a probability vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Dp,
    NegMulti,
    SumBeta,
    InclExcl,
    Quad,
    Mc,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Method::Dp => "dp",
            Method::NegMulti => "negmulti",
            Method::SumBeta => "sumbeta",
            Method::InclExcl => "inclexcl",
            Method::Quad => "quad",
            Method::Mc => "mc",
        };
        f.write_str(s)
    }
}

/// Per-player win or last-place probabilities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RaceProbabilities<T> {
    pub kind: Kind,
    pub values: Vec<T>,
    pub method: Method,
    /// Zero for exact methods.
    pub error_bound: T,
}

impl<T: Real> RaceProbabilities<T> {
    pub fn total(&self) -> T {
        let mut acc = Neumaier::default();
        for &v in &self.values {
            acc.add(v);
        }
        acc.total()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Recurrent,
    Transient,
}

/// Classification of the centred walk by `η = (∏ m p_j)^{1/m}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RecurrenceVerdict<T> {
    pub eta: T,
    pub verdict: Verdict,
}

/// Recurrent exactly when the probabilities are uniform and `m ≤ 3`.
pub fn classify_recurrence<T: Real>(probs: &[T]) -> Result<RecurrenceVerdict<T>> {
    let m = probs.len();
    if m < 2 {
        return Err(RaceError::invalid("need at least two probabilities"));
    }
    if probs.iter().any(|&p| !p.is_finite() || p <= T::zero()) {
        return Err(RaceError::invalid("probabilities must be positive"));
    }
    // Sorting makes the result bit-for-bit permutation invariant.
    let mut sorted = probs.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let mut sum = Neumaier::default();
    for &p in &sorted {
        sum.add(p);
    }
    let mf = T::from_usize_lossy(m);
    if (sum.total() - T::one()).abs() > lit::<T>(1e-12).max(T::epsilon() * mf) {
        return Err(RaceError::invalid(format!(
            "probabilities sum to {:?}, not 1",
            sum.total()
        )));
    }
    let mut logs = Neumaier::default();
    for &p in &sorted {
        logs.add((mf * p).ln());
    }
    let eta = (logs.total() / mf).exp().min(T::one());
    let uniform = (eta - T::one()).abs() <= lit::<T>(1e-12).max(T::epsilon() * lit(4.0));
    let verdict = if uniform && m <= 3 {
        Verdict::Recurrent
    } else {
        Verdict::Transient
    };
    Ok(RecurrenceVerdict { eta, verdict })
}
