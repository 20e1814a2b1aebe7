//! Exact win and last-place probabilities for integer goals.
//!
//! Two lattice recursions over the game state, plus finite sums derived from the
//! negative multinomial law of the other players' advances. The lattice code is
//! generic over [`Scalar`] and also runs over exact rationals.

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::{RaceError, Result};
use crate::model::{GameSpec, Kind, Method, RaceProbabilities};
use crate::scalar::{lit, Accumulator, Neumaier, Real, Scalar};
use crate::specfn::{log_gamma, reg_inc_beta, reg_inc_beta_unchecked};

/// Work limits for the lattice and finite-sum methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    /// Maximum number of lattice states.
    pub states: u128,
    /// Maximum number of summed terms.
    pub terms: u128,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            states: 100_000_000,
            terms: 10_000_000,
        }
    }
}

fn checked_product(
    dims: impl IntoIterator<Item = u128>,
    what: &'static str,
    budget: u128,
) -> Result<u128> {
    let mut n: u128 = 1;
    for d in dims {
        n = n.saturating_mul(d);
    }
    if n > budget {
        return Err(RaceError::Budget {
            what,
            needed: n,
            budget,
        });
    }
    Ok(n)
}

fn check_lattice_input<S>(goals: &[u64], probs: &[S]) -> Result<()> {
    if goals.len() < 2 || goals.len() != probs.len() {
        return Err(RaceError::invalid(
            "need at least two players and one probability per goal",
        ));
    }
    if goals.contains(&0) {
        return Err(RaceError::invalid("goals must be at least 1"));
    }
    Ok(())
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(dims.len());
    let mut s = 1;
    for &d in dims {
        out.push(s);
        s *= d;
    }
    out
}

/// Advances a mixed-radix counter in place.
#[inline]
fn tick(digits: &mut [usize], dims: &[usize]) {
    for (d, &n) in digits.iter_mut().zip(dims) {
        *d += 1;
        if *d < n {
            return;
        }
        *d = 0;
    }
}

/// Winning probabilities by forward recursion over the open lattice `∏ [0, n_ℓ)`.
///
/// States are visited in increasing mixed-radix index; every move raises the
/// index, so each state is complete before it is pushed forward.
pub fn win_probs_lattice<S: Scalar>(goals: &[u64], probs: &[S], budget: &Budget) -> Result<Vec<S>> {
    check_lattice_input(goals, probs)?;
    let total = checked_product(goals.iter().map(|&g| g as u128), "win lattice", budget.states)?;
    let dims: Vec<usize> = goals.iter().map(|&g| g as usize).collect();
    let stride = strides(&dims);
    let m = dims.len();

    let mut mass: Vec<S::Acc> = vec![S::Acc::default(); total as usize];
    mass[0].add(S::one());
    let mut pi: Vec<S::Acc> = vec![S::Acc::default(); m];
    let mut digits = vec![0usize; m];

    for idx in 0..total as usize {
        let v = std::mem::take(&mut mass[idx]).total();
        if !v.is_zero() {
            for l in 0..m {
                let c = v.clone() * probs[l].clone();
                if digits[l] + 1 < dims[l] {
                    mass[idx + stride[l]].add(c);
                } else {
                    pi[l].add(c);
                }
            }
        }
        tick(&mut digits, &dims);
    }
    Ok(pi.iter().map(|a| a.total()).collect())
}

/// Last-place probabilities by recursion over the capped lattice `∏ [0, n_ℓ]`.
///
/// Finished players are never selected; the remaining players move with their
/// renormalised probabilities. That changes the clock but not the finishing order.
pub fn last_probs_lattice<S: Scalar>(goals: &[u64], probs: &[S], budget: &Budget) -> Result<Vec<S>> {
    check_lattice_input(goals, probs)?;
    let total = checked_product(
        goals.iter().map(|&g| g as u128 + 1),
        "last lattice",
        budget.states,
    )?;
    let dims: Vec<usize> = goals.iter().map(|&g| g as usize + 1).collect();
    let stride = strides(&dims);
    let m = dims.len();

    let mut mass: Vec<S::Acc> = vec![S::Acc::default(); total as usize];
    mass[0].add(S::one());
    let mut tau: Vec<S::Acc> = vec![S::Acc::default(); m];
    let mut digits = vec![0usize; m];
    let mut open = Vec::with_capacity(m);

    for idx in 0..total as usize {
        let v = std::mem::take(&mut mass[idx]).total();
        if !v.is_zero() {
            open.clear();
            open.extend((0..m).filter(|&l| digits[l] + 1 < dims[l]));
            if open.len() == 1 {
                tau[open[0]].add(v);
            } else {
                let mut rate = S::zero();
                for &l in &open {
                    rate = rate + probs[l].clone();
                }
                let w = v / rate;
                for &l in &open {
                    mass[idx + stride[l]].add(w.clone() * probs[l].clone());
                }
            }
        }
        tick(&mut digits, &dims);
    }
    Ok(tau.iter().map(|a| a.total()).collect())
}

/// Canonical probabilities `n_ℓ / Σ n` as exact rationals.
pub fn canonical_rational_probs(goals: &[u64]) -> Vec<BigRational> {
    let total: BigInt = goals.iter().map(|&g| BigInt::from(g)).sum();
    goals
        .iter()
        .map(|&g| BigRational::new(BigInt::from(g), total.clone()))
        .collect()
}

/// Exact rational winning probabilities of the canonical game.
pub fn win_probs_exact(goals: &[u64], budget: &Budget) -> Result<Vec<BigRational>> {
    win_probs_lattice(goals, &canonical_rational_probs(goals), budget)
}

/// Exact rational last-place probabilities of the canonical game.
pub fn last_probs_exact(goals: &[u64], budget: &Budget) -> Result<Vec<BigRational>> {
    last_probs_lattice(goals, &canonical_rational_probs(goals), budget)
}

fn exact_result<T: Real>(kind: Kind, method: Method, values: Vec<T>) -> RaceProbabilities<T> {
    RaceProbabilities {
        kind,
        values,
        method,
        error_bound: T::zero(),
    }
}

/// Winning probabilities of every player by the lattice recursion.
pub fn win_probs_dp<T: Real>(game: &GameSpec<T>, budget: &Budget) -> Result<RaceProbabilities<T>> {
    let values = win_probs_lattice(&game.int_goals()?, game.probs(), budget)?;
    Ok(exact_result(Kind::Win, Method::Dp, values))
}

/// Last-place probabilities of every player by the capped-lattice recursion.
pub fn last_probs_dp<T: Real>(game: &GameSpec<T>, budget: &Budget) -> Result<RaceProbabilities<T>> {
    let values = last_probs_lattice(&game.int_goals()?, game.probs(), budget)?;
    Ok(exact_result(Kind::Last, Method::Dp, values))
}

/// Negative multinomial law of `(A_2, ..., A_m)`: the advances of the other
/// players before the `n1`-th advance of player 1.
#[derive(Debug, Clone, PartialEq)]
pub struct NegMultinomialParams<T> {
    n1: u64,
    head: T,
    tail_probs: Vec<T>,
}

impl<T: Real> NegMultinomialParams<T> {
    pub fn new(n1: u64, tail_probs: Vec<T>) -> Result<Self> {
        if n1 == 0 {
            return Err(RaceError::invalid("n1 must be at least 1"));
        }
        if tail_probs
            .iter()
            .any(|&p| !(p > T::zero() && p < T::one()))
        {
            return Err(RaceError::invalid("tail probabilities must lie in (0, 1)"));
        }
        let head = T::one() - tail_probs.iter().fold(T::zero(), |a, &p| a + p);
        if head <= T::zero() {
            return Err(RaceError::invalid("tail probabilities must sum below 1"));
        }
        Ok(NegMultinomialParams {
            n1,
            head,
            tail_probs,
        })
    }

    /// Builds the law from unnormalised selection weights, avoiding `1 - Σ`.
    pub(crate) fn from_weights(n1: u64, head: T, tail: &[T]) -> Self {
        let total = tail.iter().fold(head, |a, &w| a + w);
        NegMultinomialParams {
            n1,
            head: head / total,
            tail_probs: tail.iter().map(|&w| w / total).collect(),
        }
    }

    pub fn n1(&self) -> u64 {
        self.n1
    }

    pub fn tail_probs(&self) -> &[T] {
        &self.tail_probs
    }

    /// `p_1 = 1 - Σ tail_probs`.
    pub fn head_prob(&self) -> T {
        self.head
    }

    /// `P(A_k < bounds_k for all k)` as a finite sum of point probabilities.
    pub fn cdf_below(&self, bounds: &[u64], budget: &Budget) -> Result<T> {
        if bounds.len() != self.tail_probs.len() {
            return Err(RaceError::invalid("one bound per tail component"));
        }
        if bounds.contains(&0) {
            return Ok(T::zero());
        }
        checked_product(
            bounds.iter().map(|&b| b as u128),
            "negative multinomial sum",
            budget.terms,
        )?;
        let top = self.n1 + bounds.iter().map(|&b| b - 1).sum::<u64>();
        let lgam: Vec<T> = (0..=top)
            .map(|j| {
                if j == 0 {
                    T::zero()
                } else {
                    log_gamma(T::from_u64(j).expect("fits")).expect("positive")
                }
            })
            .collect();
        // cols[d][k] = k ln q_d - ln k!
        let cols: Vec<Vec<T>> = self
            .tail_probs
            .iter()
            .zip(bounds)
            .map(|(&q, &b)| {
                let lq = q.ln();
                (0..b)
                    .map(|k| T::from_u64(k).expect("fits") * lq - lgam_fact(&lgam, k))
                    .collect()
            })
            .collect();
        let base = T::from_u64(self.n1).expect("fits") * self.head.ln() - lgam[self.n1 as usize];
        let mut acc = Neumaier::default();
        nested_sum(&cols, 0, self.n1 as usize, base, &mut |s, w| {
            acc.add((lgam[s] + w).exp());
        });
        Ok(acc.total().min(T::one()))
    }
}

/// `ln k!` from a table of `ln Γ(j)`.
fn lgam_fact<T: Real>(lgam: &[T], k: u64) -> T {
    lgam[k as usize + 1]
}

/// Visits every index tuple of `cols`, passing the running index sum and
/// the running sum of column entries.
fn nested_sum<T: Real>(cols: &[Vec<T>], dim: usize, s: usize, w: T, leaf: &mut impl FnMut(usize, T)) {
    if dim == cols.len() {
        leaf(s, w);
        return;
    }
    for (k, &c) in cols[dim].iter().enumerate() {
        nested_sum(cols, dim + 1, s + k, w + c, leaf);
    }
}

/// `π_player` as a negative multinomial probability.
pub fn win_prob_negmulti<T: Real>(game: &GameSpec<T>, player: usize, budget: &Budget) -> Result<T> {
    let g = game.with_player_first(player)?;
    let goals = g.int_goals()?;
    let params = NegMultinomialParams::from_weights(goals[0], g.probs()[0], &g.probs()[1..]);
    params.cdf_below(&goals[1..], budget)
}

/// Two-player winning probability of player 1 under canonical probabilities.
pub fn win_prob_two_player<T: Real>(n1: u64, n2: u64) -> Result<T> {
    if n1 == 0 || n2 == 0 {
        return Err(RaceError::domain("goals must be at least 1"));
    }
    if n1 == n2 {
        return Ok(lit(0.5));
    }
    let a = T::from_u64(n1).expect("fits");
    let b = T::from_u64(n2).expect("fits");
    reg_inc_beta(a / (a + b), a, b)
}

/// `π_player` for canonical probabilities as a sum of incomplete beta values.
///
/// One opponent is integrated out exactly (the one with the largest goal, to
/// keep the term count small); the others contribute Poisson-type weights.
pub fn win_prob_sum_beta<T: Real>(game: &GameSpec<T>, player: usize, budget: &Budget) -> Result<T> {
    if !game.is_canonical() {
        return Err(RaceError::domain(
            "the incomplete beta sum needs canonical probabilities p = n / sum(n)",
        ));
    }
    let g = game.with_player_first(player)?;
    let goals = g.int_goals()?;
    let others = &goals[1..];
    let far = others
        .iter()
        .enumerate()
        .max_by_key(|&(i, &n)| (n, std::cmp::Reverse(i)))
        .map(|(i, _)| i)
        .expect("at least one opponent");
    let middle: Vec<u64> = others
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != far)
        .map(|(_, &n)| n)
        .collect();
    checked_product(middle.iter().map(|&n| n as u128), "incomplete beta sum", budget.terms)?;

    let n1 = goals[0];
    let nm = T::from_u64(others[far]).expect("fits");
    let near: u64 = n1 + middle.iter().sum::<u64>();
    let near_t = T::from_u64(near).expect("fits");
    let x = near_t / (near_t + nm);
    let ln_near = near_t.ln();

    let top = n1 + middle.iter().map(|&n| n - 1).sum::<u64>();
    let lgam: Vec<T> = (0..=top + 1)
        .map(|j| {
            if j == 0 {
                T::zero()
            } else {
                log_gamma(T::from_u64(j).expect("fits")).expect("positive")
            }
        })
        .collect();
    let cols: Vec<Vec<T>> = middle
        .iter()
        .map(|&n| {
            let ln_n = T::from_u64(n).expect("fits").ln();
            (0..n)
                .map(|k| T::from_u64(k).expect("fits") * ln_n - lgam_fact(&lgam, k))
                .collect()
        })
        .collect();
    let n1_t = T::from_u64(n1).expect("fits");
    let base = n1_t * n1_t.ln() - lgam[n1 as usize];
    let mut acc = Neumaier::default();
    nested_sum(&cols, 0, n1 as usize, base, &mut |s, w| {
        let st = T::from_usize_lossy(s);
        let weight = (w + lgam[s] - st * ln_near).exp();
        acc.add(weight * reg_inc_beta_unchecked(x, st, nm));
    });
    Ok(acc.total().min(T::one()))
}

/// `τ_player` by inclusion and exclusion over the set of opponents that have
/// not finished when the player does.
pub fn last_prob_inclusion_exclusion<T: Real>(
    game: &GameSpec<T>,
    player: usize,
    budget: &Budget,
) -> Result<T> {
    let g = game.with_player_first(player)?;
    let goals = g.int_goals()?;
    let probs = g.probs();
    let others = goals.len() - 1;
    checked_product(
        goals[1..].iter().map(|&n| n as u128 + 1),
        "inclusion-exclusion",
        budget.terms,
    )?;

    let mut acc = Neumaier::default();
    let mut bounds = Vec::with_capacity(others);
    let mut weights = Vec::with_capacity(others);
    for mask in 0u64..(1u64 << others) {
        bounds.clear();
        weights.clear();
        for k in 0..others {
            if mask >> k & 1 == 1 {
                bounds.push(goals[k + 1]);
                weights.push(probs[k + 1]);
            }
        }
        let term = if bounds.is_empty() {
            T::one()
        } else {
            NegMultinomialParams::from_weights(goals[0], probs[0], &weights)
                .cdf_below(&bounds, budget)?
        };
        if mask.count_ones() % 2 == 0 {
            acc.add(term);
        } else {
            acc.add(-term);
        }
    }
    Ok(acc.total().max(T::zero()).min(T::one()))
}

fn per_player<T: Real>(
    game: &GameSpec<T>,
    kind: Kind,
    method: Method,
    f: impl Fn(usize) -> Result<T>,
) -> Result<RaceProbabilities<T>> {
    let values = (0..game.m()).map(f).collect::<Result<Vec<_>>>()?;
    Ok(exact_result(kind, method, values))
}

/// [`win_prob_negmulti`] for every player.
pub fn win_probs_negmulti<T: Real>(game: &GameSpec<T>, budget: &Budget) -> Result<RaceProbabilities<T>> {
    per_player(game, Kind::Win, Method::NegMulti, |l| {
        win_prob_negmulti(game, l, budget)
    })
}

/// [`win_prob_sum_beta`] for every player.
pub fn win_probs_sum_beta<T: Real>(game: &GameSpec<T>, budget: &Budget) -> Result<RaceProbabilities<T>> {
    per_player(game, Kind::Win, Method::SumBeta, |l| {
        win_prob_sum_beta(game, l, budget)
    })
}

/// [`last_prob_inclusion_exclusion`] for every player.
pub fn last_probs_inclusion_exclusion<T: Real>(
    game: &GameSpec<T>,
    budget: &Budget,
) -> Result<RaceProbabilities<T>> {
    per_player(game, Kind::Last, Method::InclExcl, |l| {
        last_prob_inclusion_exclusion(game, l, budget)
    })
}
