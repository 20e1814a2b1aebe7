//! Limits of the win and last-place probabilities of player 1 as goals grow.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand_distr::{Distribution, Gamma, StandardNormal};
use rayon::prelude::*;

use crate::error::{RaceError, Result};
use crate::model::Kind;
use crate::quad::{integrate_adaptive, QuadConfig};
use crate::sample::{chunk_rng, McConfig};
use crate::scalar::{lit, Real};
use crate::specfn::{beta_density, gamma_pq_unchecked, normal_cdf, normal_pdf};

/// Tail mass dropped from the Gaussian weight of the proportional limits.
const NORMAL_TAIL_MASS: f64 = 1e-16;

/// Goal proportions `α_1, ..., α_m` for `(n_1, ..., n_m) = n α` with `n → ∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProportionVector<T> {
    alphas: Vec<T>,
}

impl<T: Real> ProportionVector<T> {
    pub fn new(alphas: Vec<T>) -> Result<Self> {
        if alphas.len() < 2 {
            return Err(RaceError::invalid("need at least two proportions"));
        }
        if alphas.iter().any(|&a| !(a.is_finite() && a > T::zero())) {
            return Err(RaceError::invalid("proportions must be positive"));
        }
        Ok(ProportionVector { alphas })
    }

    pub fn alphas(&self) -> &[T] {
        &self.alphas
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitMethod {
    Exact,
    Quadrature,
    MonteCarlo,
}

/// A limit value with its error estimate (quadrature) or standard error (Monte Carlo).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitEstimate<T> {
    pub value: T,
    pub error: T,
    pub method: LimitMethod,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitConfig<T> {
    pub quad: QuadConfig<T>,
    /// Used where no one-dimensional reduction exists.
    pub mc: McConfig,
}

impl<T: Real> Default for LimitConfig<T> {
    fn default() -> Self {
        LimitConfig {
            quad: QuadConfig::default(),
            mc: McConfig {
                samples: 1_000_000,
                ..McConfig::default()
            },
        }
    }
}

fn check_goals<T: Real>(goals: &[T], what: &str) -> Result<()> {
    if goals.is_empty() {
        return Err(RaceError::domain(format!("{what} must not be empty")));
    }
    if goals.iter().any(|&g| !(g.is_finite() && g > T::zero())) {
        return Err(RaceError::domain(format!("{what} must be positive")));
    }
    Ok(())
}

/// `lim_{n_1→∞} π_1 = ∏_{k≥2} P(G_k > n_k)` with `G_k ~ Gamma(n_k, 1)`.
pub fn limit_win_n1_inf<T: Real>(tail_goals: &[T]) -> Result<T> {
    check_goals(tail_goals, "tail goals")?;
    Ok(tail_goals
        .iter()
        .fold(T::one(), |acc, &n| acc * gamma_pq_unchecked(n, n).1))
}

/// `lim_{n_1→∞} τ_1 = ∏_{k≥2} P(G_k ≤ n_k)`.
pub fn limit_last_n1_inf<T: Real>(tail_goals: &[T]) -> Result<T> {
    check_goals(tail_goals, "tail goals")?;
    Ok(tail_goals
        .iter()
        .fold(T::one(), |acc, &n| acc * gamma_pq_unchecked(n, n).0))
}

/// `lim_{n_m→∞} π_1` given the goals `n_1, ..., n_{m-1}` of the other players.
pub fn limit_win_nm_inf<T: Real>(head: &[T], cfg: &LimitConfig<T>) -> Result<LimitEstimate<T>> {
    limit_nm_inf(head, Kind::Win, cfg)
}

/// `lim_{n_m→∞} τ_1` given `n_1, ..., n_{m-1}`.
pub fn limit_last_nm_inf<T: Real>(head: &[T], cfg: &LimitConfig<T>) -> Result<LimitEstimate<T>> {
    limit_nm_inf(head, Kind::Last, cfg)
}

/// With `X_k = G_k / G_1` and `G_Σ ~ Gamma(n_1 + ... + n_{m-1})`, the win limit is
/// `P(X_k > n_k / n_1 ∀k, G_Σ < n_1 (1 + Σ X_k))`; the last-place limit flips
/// every inequality.
fn limit_nm_inf<T: Real>(head: &[T], kind: Kind, cfg: &LimitConfig<T>) -> Result<LimitEstimate<T>> {
    check_goals(head, "head goals")?;
    let n1 = head[0];
    match head.len() {
        1 => {
            let (p, q) = gamma_pq_unchecked(n1, n1);
            Ok(LimitEstimate {
                value: if kind == Kind::Win { p } else { q },
                error: T::zero(),
                method: LimitMethod::Exact,
            })
        }
        2 => {
            // t = X_2 / (1 + X_2) ~ Beta(n_2, n_1), and 1 + X_2 = 1 / (1 - t).
            let n2 = head[1];
            let total = n1 + n2;
            let c = n2 / n1;
            let t0 = c / (T::one() + c);
            let f = |t: T| {
                let (p, q) = gamma_pq_unchecked(total, n1 / (T::one() - t));
                let w = beta_density(t, n2, n1);
                match kind {
                    Kind::Win => p * w,
                    Kind::Last => q * w,
                }
            };
            let (lo, hi) = match kind {
                Kind::Win => (t0, T::one()),
                Kind::Last => (T::zero(), t0),
            };
            let (value, error) = integrate_adaptive(f, lo, hi, &cfg.quad, T::zero())?;
            Ok(LimitEstimate {
                value: value.max(T::zero()).min(T::one()),
                error,
                method: LimitMethod::Quadrature,
            })
        }
        _ => limit_nm_inf_mc(head, kind, &cfg.mc),
    }
}

/// Monte Carlo estimate of the `n_m → ∞` limit over inverted Dirichlet draws,
/// with the inner gamma probability evaluated exactly.
pub fn limit_nm_inf_mc<T: Real>(head: &[T], kind: Kind, mc: &McConfig) -> Result<LimitEstimate<T>> {
    check_goals(head, "head goals")?;
    mc.validate()?;
    let goals: Vec<f64> = head.iter().map(|g| g.approx()).collect();
    let n1 = goals[0];
    let total: f64 = goals.iter().sum();
    let draws: Vec<Gamma<f64>> = goals
        .iter()
        .map(|&g| Gamma::new(g, 1.0).expect("positive shape"))
        .collect();
    let chunks = mc.samples.div_ceil(mc.chunk_size);
    let sums: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(mc.seed, c);
            let n = mc.chunk_size.min(mc.samples - c * mc.chunk_size);
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..n {
                let g1 = draws[0].sample(&mut rng);
                let mut inside = true;
                let mut ratio_sum = 0.0;
                for k in 1..goals.len() {
                    let x = draws[k].sample(&mut rng) / g1;
                    ratio_sum += x;
                    let above = x > goals[k] / n1;
                    inside &= if kind == Kind::Win { above } else { !above };
                }
                if inside {
                    let (p, q) = gamma_pq_unchecked(total, n1 * (1.0 + ratio_sum));
                    let v = if kind == Kind::Win { p } else { q };
                    s += v;
                    s2 += v * v;
                }
            }
            (s, s2)
        })
        .collect();
    let (s, s2) = sums.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let n = mc.samples as f64;
    let mean = s / n;
    let var = if mc.samples > 1 {
        ((s2 - n * mean * mean) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(LimitEstimate {
        value: lit(mean),
        error: lit((var / n).sqrt()),
        method: LimitMethod::MonteCarlo,
    })
}

/// Half-width `z*` with `Φ(-z*) = mass / 2`.
fn normal_cutoff<T: Real>(mass: T) -> T {
    let target = mass * lit(0.5);
    let (mut lo, mut hi) = (T::zero(), lit::<T>(40.0));
    for _ in 0..200 {
        let mid = (lo + hi) * lit(0.5);
        if mid <= lo || mid >= hi {
            break;
        }
        if normal_cdf(-mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

fn proportional<T: Real>(props: &ProportionVector<T>, kind: Kind, cfg: &QuadConfig<T>) -> Result<LimitEstimate<T>> {
    let a = props.alphas();
    let slopes: Vec<T> = a[1..].iter().map(|&ak| (ak / a[0]).sqrt()).collect();
    let f = |z: T| {
        let prod = slopes.iter().fold(T::one(), |acc, &c| {
            acc * match kind {
                Kind::Win => normal_cdf(-c * z),
                Kind::Last => normal_cdf(c * z),
            }
        });
        prod * normal_pdf(z)
    };
    let mass = lit::<T>(NORMAL_TAIL_MASS).max(T::epsilon());
    let z = normal_cutoff(mass);
    let (value, error) = integrate_adaptive(f, -z, z, cfg, T::zero())?;
    Ok(LimitEstimate {
        value: value.max(T::zero()).min(T::one()),
        error: error + mass,
        method: LimitMethod::Quadrature,
    })
}

/// `lim_{n→∞} π_1(n α) = ∫ ∏_{k≥2} (1 - Φ(√(α_k/α_1) z)) φ(z) dz`.
pub fn limit_win_proportional<T: Real>(props: &ProportionVector<T>, cfg: &QuadConfig<T>) -> Result<LimitEstimate<T>> {
    proportional(props, Kind::Win, cfg)
}

/// `lim_{n→∞} τ_1(n α) = ∫ ∏_{k≥2} Φ(√(α_k/α_1) z) φ(z) dz`.
pub fn limit_last_proportional<T: Real>(props: &ProportionVector<T>, cfg: &QuadConfig<T>) -> Result<LimitEstimate<T>> {
    proportional(props, Kind::Last, cfg)
}

/// Direct Monte Carlo of the proportional limits from independent normal vectors:
/// player 1 wins when `Z_k / √α_k > Z_1 / √α_1` for all `k`.
pub fn proportional_mc<T: Real>(props: &ProportionVector<T>, kind: Kind, mc: &McConfig) -> Result<LimitEstimate<T>> {
    mc.validate()?;
    let inv: Vec<f64> = props.alphas().iter().map(|a| 1.0 / a.approx().sqrt()).collect();
    let chunks = mc.samples.div_ceil(mc.chunk_size);
    let hits: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(mc.seed, c);
            let n = mc.chunk_size.min(mc.samples - c * mc.chunk_size);
            let mut hits = 0u64;
            for _ in 0..n {
                let z1: f64 = StandardNormal.sample(&mut rng);
                let t1 = z1 * inv[0];
                let mut all = true;
                for &w in &inv[1..] {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    all &= match kind {
                        Kind::Win => z * w > t1,
                        Kind::Last => z * w < t1,
                    };
                }
                hits += all as u64;
            }
            hits
        })
        .sum();
    let n = mc.samples as f64;
    let p = hits as f64 / n;
    Ok(LimitEstimate {
        value: lit(p),
        error: lit((p * (1.0 - p) / n).sqrt()),
        method: LimitMethod::MonteCarlo,
    })
}

/// The iterated limit `1 / 2^{ℓ-1}` as an exact rational.
pub fn iterated_limit_win(ell: u32) -> Result<BigRational> {
    if ell < 1 {
        return Err(RaceError::domain("ell must be at least 1"));
    }
    Ok(BigRational::new(
        BigInt::from(1),
        BigInt::from(2).pow(ell - 1),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> QuadConfig<f64> {
        QuadConfig::default()
    }

    #[test]
    fn n1_limits() {
        let e1 = (-1f64).exp();
        assert!((limit_win_n1_inf(&[1.0]).unwrap() - e1).abs() < 1e-15);
        assert!((limit_win_n1_inf(&[1.0, 1.0]).unwrap() - e1 * e1).abs() < 1e-15);
        assert!((limit_last_n1_inf(&[1.0]).unwrap() - (1.0 - e1)).abs() < 1e-15);
        assert!((limit_last_n1_inf(&[1.0, 1.0]).unwrap() - (1.0 - e1).powi(2)).abs() < 1e-15);
        assert!(limit_win_n1_inf::<f64>(&[]).is_err());
        assert!(limit_win_n1_inf(&[0.0]).is_err());
    }

    #[test]
    fn nm_limits_two_players() {
        let cfg = LimitConfig::default();
        let w = limit_win_nm_inf(&[1.0], &cfg).unwrap();
        let l = limit_last_nm_inf(&[1.0], &cfg).unwrap();
        assert!((w.value - (1.0 - (-1f64).exp())).abs() < 1e-15);
        assert!((l.value - (-1f64).exp()).abs() < 1e-15);
        assert_eq!(w.method, LimitMethod::Exact);
        for n in [1.0, 2.0, 7.5] {
            let w = limit_win_nm_inf(&[n], &cfg).unwrap().value;
            let l = limit_last_nm_inf(&[n], &cfg).unwrap().value;
            assert!((w + l - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn nm_limit_three_players_uses_quadrature() {
        let cfg = LimitConfig::default();
        let w = limit_win_nm_inf(&[1.0, 1.0], &cfg).unwrap();
        assert_eq!(w.method, LimitMethod::Quadrature);
        assert!(w.value > 0.0 && w.value < 1.0);
    }

    #[test]
    fn proportional_examples() {
        for a in [(1.0, 1.0), (1.0, 3.0), (0.2, 5.0)] {
            let p = ProportionVector::new(vec![a.0, a.1]).unwrap();
            let w = limit_win_proportional(&p, &q()).unwrap().value;
            let l = limit_last_proportional(&p, &q()).unwrap().value;
            assert!((w - 0.5).abs() < 1e-10);
            assert!((w + l - 1.0).abs() < 1e-12);
        }
        for m in 2..=6 {
            let p = ProportionVector::new(vec![2.5; m]).unwrap();
            let w = limit_win_proportional(&p, &q()).unwrap().value;
            let l = limit_last_proportional(&p, &q()).unwrap().value;
            assert!((w - 1.0 / m as f64).abs() < 1e-10);
            assert!((l - 1.0 / m as f64).abs() < 1e-10);
        }
        assert!(ProportionVector::new(vec![1.0]).is_err());
        assert!(ProportionVector::new(vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn last_limit_increases_with_alpha() {
        let a = ProportionVector::new(vec![1.0, 1.0, 2.0]).unwrap();
        let b = ProportionVector::new(vec![1.0, 1.0, 3.0]).unwrap();
        assert!(
            limit_last_proportional(&b, &q()).unwrap().value
                > limit_last_proportional(&a, &q()).unwrap().value
        );
    }

    #[test]
    fn iterated_constant() {
        let r = |a: i64, b: i64| BigRational::new(a.into(), b.into());
        assert_eq!(iterated_limit_win(1).unwrap(), r(1, 1));
        assert_eq!(iterated_limit_win(3).unwrap(), r(1, 4));
        assert_eq!(iterated_limit_win(11).unwrap(), r(1, 1024));
        assert!(iterated_limit_win(0).is_err());
    }
}
