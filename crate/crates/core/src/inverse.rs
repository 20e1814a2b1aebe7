//! Inverse of the winning-probability map.
//!
//! For fixed goals, `p ↦ π(p)` is a bijection of the open simplex onto itself, and
//! likewise `p ↦ τ(p)`. The solver runs a damped Newton iteration in log-ratio
//! coordinates `x_k = ln(p_k / p_1)`, evaluating the map by quadrature and its
//! Jacobian by central differences.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{RaceError, Result};
use crate::model::{game_from_goals, game_from_goals_probs, Kind};
use crate::quad::{probs_quad, QuadConfig};
use crate::scalar::{lit, Real};

const MAX_ITERATIONS: usize = 100;
const MAX_HALVINGS: usize = 30;
const FD_STEP: f64 = 1e-5;
/// Largest Newton step in any log-ratio coordinate.
const MAX_STEP: f64 = 4.0;

/// Outcome of a successful inversion.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult<T> {
    pub probs: Vec<T>,
    /// `‖map(probs) − target‖_∞`.
    pub residual_inf: T,
    pub iterations: usize,
    pub converged: bool,
}

/// Advancing probabilities whose winning probabilities are `target`.
pub fn winning_to_advancing<T: Real + Send + Sync>(
    goals: &[u64],
    target: &[T],
    tol: T,
    cfg: &QuadConfig<T>,
) -> Result<SolveResult<T>> {
    solve_advancing(goals, target, Kind::Win, tol, cfg)
}

/// Advancing probabilities whose win (`Kind::Win`) or last-place (`Kind::Last`)
/// probabilities are `target`.
pub fn solve_advancing<T: Real + Send + Sync>(
    goals: &[u64],
    target: &[T],
    kind: Kind,
    tol: T,
    cfg: &QuadConfig<T>,
) -> Result<SolveResult<T>> {
    validate(goals, target, tol, cfg)?;
    let start = start_point(goals, target, kind);
    newton(goals, target, kind, tol, cfg, start)
}

/// The vector `p̄` giving every player winning probability `1/m`.
pub fn equal_probability_vector<T: Real + Send + Sync>(
    goals: &[u64],
    tol: T,
    cfg: &QuadConfig<T>,
) -> Result<SolveResult<T>> {
    let m = goals.len();
    let target = vec![T::one() / T::from_usize_lossy(m.max(2)); m];
    winning_to_advancing(goals, &target, tol, cfg)
}

/// Known facts about `p̄_1` for two players with `n1 ≤ n2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EqualVectorBounds<T> {
    pub lower: T,
    pub upper: T,
    /// Closed form, available when `n1 = 1`.
    pub exact: Option<T>,
}

/// Bounds on (or the exact value of) `p̄_1` for the two-player game `(n1, n2)`.
pub fn equal_vector_m2_bounds<T: Real>(n1: u64, n2: u64) -> Result<EqualVectorBounds<T>> {
    if n1 == 0 || n2 == 0 {
        return Err(RaceError::domain("goals must be positive"));
    }
    if n1 > n2 {
        return Err(RaceError::domain(format!(
            "bounds need n1 <= n2, got ({n1}, {n2})"
        )));
    }
    if n1 == 1 {
        let v = T::one() - lit::<T>(2.0).powf(-T::one() / lit::<T>(n2 as f64));
        return Ok(EqualVectorBounds {
            lower: v,
            upper: v,
            exact: Some(v),
        });
    }
    let (a, b) = (n1 as f64, n2 as f64);
    Ok(EqualVectorBounds {
        lower: lit((a - 1.0) / (a + b - 1.0)),
        upper: lit(a / (a + b)),
        exact: None,
    })
}

fn validate<T: Real>(goals: &[u64], target: &[T], tol: T, cfg: &QuadConfig<T>) -> Result<()> {
    game_from_goals::<T>(goals)?;
    cfg.validate()?;
    if target.len() != goals.len() {
        return Err(RaceError::invalid(format!(
            "target has {} entries for {} players",
            target.len(),
            goals.len()
        )));
    }
    if target.iter().any(|&t| !(t.is_finite() && t > T::zero())) {
        return Err(RaceError::invalid(
            "target probabilities must be strictly positive; a zero target needs a zero advancing probability",
        ));
    }
    let sum = target.iter().fold(T::zero(), |s, &t| s + t);
    if (sum - T::one()).abs() > lit::<T>(1e-9).max(T::epsilon() * lit(16.0)) {
        return Err(RaceError::invalid(format!(
            "target must sum to 1, got {}",
            sum.approx()
        )));
    }
    if !(tol.is_finite() && tol > T::zero()) {
        return Err(RaceError::invalid("tolerance must be positive"));
    }
    Ok(())
}

fn start_point<T: Real>(goals: &[u64], target: &[T], kind: Kind) -> Vec<T> {
    let m = goals.len();
    let equal = target
        .iter()
        .all(|&t| (t - target[0]).abs() <= T::epsilon() * lit(16.0));
    if m == 2 && kind == Kind::Win && equal {
        let (lo, hi) = (goals[0].min(goals[1]), goals[0].max(goals[1]));
        let (a, b) = (lo as f64, hi as f64);
        let mid = 0.5 * ((a - 1.0) / (a + b - 1.0) + a / (a + b));
        let p_small: T = lit(mid);
        return if goals[0] <= goals[1] {
            vec![p_small, T::one() - p_small]
        } else {
            vec![T::one() - p_small, p_small]
        };
    }
    let total = goals.iter().map(|&g| g as f64).sum::<f64>();
    goals.iter().map(|&g| lit(g as f64 / total)).collect()
}

fn to_probs<T: Real>(x: &[T]) -> Vec<T> {
    let top = x.iter().fold(T::zero(), |a, &b| a.max(b));
    let mut p = Vec::with_capacity(x.len() + 1);
    p.push((-top).exp());
    p.extend(x.iter().map(|&v| (v - top).exp()));
    let s = p.iter().fold(T::zero(), |a, &b| a + b);
    p.iter().map(|&v| v / s).collect()
}

fn to_coords<T: Real>(p: &[T]) -> Vec<T> {
    p[1..].iter().map(|&v| (v / p[0]).ln()).collect()
}

struct Problem<'a, T> {
    goals: &'a [u64],
    target: &'a [T],
    kind: Kind,
}

impl<T: Real + Send + Sync> Problem<'_, T> {
    /// `map(p(x)) − target`.
    fn residual(&self, x: &[T], cfg: &QuadConfig<T>) -> Result<Vec<T>> {
        let p = to_probs(x);
        let game = game_from_goals_probs(self.goals, &p)?;
        let values = probs_quad(&game, self.kind, cfg)?.values;
        Ok(values
            .iter()
            .zip(self.target)
            .map(|(&v, &t)| v - t)
            .collect())
    }

    /// Jacobian of residual components `1..m` with respect to `x`, in `f64`.
    fn jacobian(&self, x: &[T], cfg: &QuadConfig<T>) -> Result<DMatrix<f64>> {
        let d = x.len();
        let h: T = lit(FD_STEP);
        let columns: Vec<Result<Vec<f64>>> = (0..d)
            .into_par_iter()
            .map(|j| {
                let mut up = x.to_vec();
                let mut dn = x.to_vec();
                up[j] = up[j] + h;
                dn[j] = dn[j] - h;
                let fu = self.residual(&up, cfg)?;
                let fd = self.residual(&dn, cfg)?;
                Ok((1..=d)
                    .map(|i| ((fu[i] - fd[i]) / (h + h)).approx())
                    .collect())
            })
            .collect();
        let mut jac = DMatrix::zeros(d, d);
        for (j, col) in columns.into_iter().enumerate() {
            for (i, v) in col?.into_iter().enumerate() {
                jac[(i, j)] = v;
            }
        }
        Ok(jac)
    }
}

fn inf_norm<T: Real>(r: &[T]) -> T {
    r.iter().fold(T::zero(), |a, &b| a.max(b.abs()))
}

/// Quadrature settings for derivative probes: tolerance at most `tol / 100`.
fn probe_config<T: Real>(cfg: &QuadConfig<T>, tol: T) -> QuadConfig<T> {
    let floor = T::epsilon() * lit(100.0);
    let t = cfg.abs_tol.min(tol / lit(100.0)).max(floor);
    let mut out = cfg.with_tol(t);
    out.rel_tol = cfg.rel_tol.min(t);
    if out.tail_cutoff_mass >= t {
        out.tail_cutoff_mass = t / lit(10.0);
    }
    out
}

fn newton<T: Real + Send + Sync>(
    goals: &[u64],
    target: &[T],
    kind: Kind,
    tol: T,
    cfg: &QuadConfig<T>,
    start: Vec<T>,
) -> Result<SolveResult<T>> {
    let m = goals.len();
    let problem = Problem {
        goals,
        target,
        kind,
    };
    let probe = probe_config(cfg, tol);
    let mut x = to_coords(&start);
    let mut r = problem.residual(&x, cfg)?;
    let mut norm = inf_norm(&r);
    let unsolved = |iterations: usize, norm: T, x: &[T]| RaceError::Unsolved {
        iterations,
        residual: norm.approx(),
        best: to_probs(x).iter().map(|v| v.approx()).collect(),
    };

    for iteration in 0..MAX_ITERATIONS {
        if norm <= tol {
            return Ok(SolveResult {
                probs: to_probs(&x),
                residual_inf: norm,
                iterations: iteration,
                converged: true,
            });
        }
        let jac = problem.jacobian(&x, &probe)?;
        let rhs = DVector::from_iterator(m - 1, r[1..].iter().map(|v| -v.approx()));
        let step = match jac.lu().solve(&rhs) {
            Some(s) if s.iter().all(|v| v.is_finite()) => s,
            _ => return Err(unsolved(iteration, norm, &x)),
        };
        let longest = step.amax();
        let scale = if longest > MAX_STEP {
            MAX_STEP / longest
        } else {
            1.0
        };

        let mut t = scale;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let trial: Vec<T> = x
                .iter()
                .zip(step.iter())
                .map(|(&xi, &si)| xi + lit::<T>(t * si))
                .collect();
            let tr = problem.residual(&trial, cfg)?;
            let tn = inf_norm(&tr);
            if tn < norm {
                accepted = Some((trial, tr, tn));
                break;
            }
            t *= 0.5;
        }
        match accepted {
            Some((nx, nr, nn)) => {
                x = nx;
                r = nr;
                norm = nn;
            }
            None => return Err(unsolved(iteration + 1, norm, &x)),
        }
    }
    if norm <= tol {
        return Ok(SolveResult {
            probs: to_probs(&x),
            residual_inf: norm,
            iterations: MAX_ITERATIONS,
            converged: true,
        });
    }
    Err(unsolved(MAX_ITERATIONS, norm, &x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::win_prob_quad;

    fn cfg() -> QuadConfig<f64> {
        QuadConfig::default()
    }

    #[test]
    fn closed_form_one_two() {
        let r = equal_probability_vector(&[1, 2], 1e-12, &cfg()).unwrap();
        assert!(r.converged);
        let exact = 1.0 - 2f64.powf(-0.5);
        assert!((r.probs[0] - exact).abs() < 1e-9, "{:?}", r.probs);
        assert!((r.probs[0] - 0.292893).abs() < 1e-6);
    }

    #[test]
    fn symmetric_fixed_point() {
        let r = winning_to_advancing(&[4, 4], &[0.5, 0.5], 1e-10, &cfg()).unwrap();
        assert!((r.probs[0] - 0.5).abs() < 1e-10);
        let r = equal_probability_vector(&[3, 3, 3], 1e-10, &cfg()).unwrap();
        for p in r.probs {
            assert!((p - 1.0 / 3.0).abs() < 1e-9);
        }
    }

    #[test]
    fn round_trip_two_three_four() {
        let p0 = [0.2, 0.3, 0.5];
        let game = game_from_goals_probs(&[2, 3, 4], &p0).unwrap();
        let pi = probs_quad(&game, Kind::Win, &cfg()).unwrap().values;
        let r = winning_to_advancing(&[2, 3, 4], &pi, 1e-10, &cfg()).unwrap();
        for (a, b) in r.probs.iter().zip(p0) {
            assert!((a - b).abs() <= 1e-6, "{:?}", r.probs);
        }
    }

    #[test]
    fn equal_vector_one_two_three_residual() {
        let r = equal_probability_vector(&[1, 2, 3], 1e-10, &cfg()).unwrap();
        let game = game_from_goals_probs(&[1, 2, 3], &r.probs).unwrap();
        for l in 0..3 {
            let v = win_prob_quad(&game, l, &cfg()).unwrap();
            assert!((v - 1.0 / 3.0).abs() < 1e-8);
        }
    }

    #[test]
    fn last_map_round_trip() {
        let p0 = [0.5, 0.3, 0.2];
        let game = game_from_goals_probs(&[1, 2, 3], &p0).unwrap();
        let tau = probs_quad(&game, Kind::Last, &cfg()).unwrap().values;
        let r = solve_advancing(&[1, 2, 3], &tau, Kind::Last, 1e-10, &cfg()).unwrap();
        for (a, b) in r.probs.iter().zip(p0) {
            assert!((a - b).abs() <= 1e-6, "{:?}", r.probs);
        }
    }

    #[test]
    fn bounds_examples() {
        let b = equal_vector_m2_bounds::<f64>(1, 2).unwrap();
        assert!((b.exact.unwrap() - 0.292893).abs() < 1e-6);
        let b = equal_vector_m2_bounds::<f64>(2, 3).unwrap();
        assert_eq!((b.lower, b.upper, b.exact), (0.25, 0.4, None));
        let b = equal_vector_m2_bounds::<f64>(5, 5).unwrap();
        assert!((b.lower - 4.0 / 9.0).abs() < 1e-15 && b.upper == 0.5);
        assert!(equal_vector_m2_bounds::<f64>(3, 2).is_err());
    }

    #[test]
    fn rejects_boundary_targets() {
        let e = winning_to_advancing(&[1, 2], &[1.0, 0.0], 1e-8, &cfg()).unwrap_err();
        assert!(matches!(e, RaceError::Validation(_)));
        let e = winning_to_advancing(&[1, 2], &[0.6, 0.6], 1e-8, &cfg()).unwrap_err();
        assert!(matches!(e, RaceError::Validation(_)));
    }

    #[test]
    fn f32_solves() {
        let r = equal_probability_vector::<f32>(&[1, 2], 1e-5, &QuadConfig::default()).unwrap();
        assert!((r.probs[0] - 0.292_893).abs() < 1e-4);
    }
}
