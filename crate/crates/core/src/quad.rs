//! One-dimensional quadrature for win and last-place probabilities.
//!
//! Player `ℓ` wins when `G_k / p_k > G_ℓ / p_ℓ` for every other player, with
//! independent `G_k ~ Gamma(n_k, 1)`. Conditioning on `x = G_ℓ / n_ℓ` leaves a
//! product of gamma tails integrated against `Gamma(n_ℓ, rate n_ℓ)`. Goals may be
//! any positive reals.

use crate::error::{RaceError, Result};
use crate::model::{GameSpec, Kind, Method, RaceProbabilities};
use crate::scalar::{lit, Accumulator, Neumaier, Real};
use crate::specfn::{gamma_density, gamma_pq_unchecked, gamma_power_term, ln_gamma_unchecked};

/// Kronrod abscissae on `[0, 1]`, outermost first; odd entries are Gauss nodes.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Gauss weights for `XGK[1], XGK[3], XGK[5], XGK[7]`.
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Tail products below this are treated as zero.
const PRODUCT_FLOOR: f64 = 1e-300;

/// Control settings for the adaptive integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_subdivisions: usize,
    /// Probability mass cut from each end of a gamma weight, split evenly.
    pub tail_cutoff_mass: T,
}

impl<T: Real> Default for QuadConfig<T> {
    fn default() -> Self {
        let floor = T::epsilon() * lit(100.0);
        QuadConfig {
            abs_tol: lit::<T>(1e-10).max(floor),
            rel_tol: lit::<T>(1e-10).max(floor),
            max_subdivisions: 200,
            tail_cutoff_mass: lit(1e-16),
        }
    }
}

impl<T: Real> QuadConfig<T> {
    /// Same settings with both tolerances set to `tol`.
    pub fn with_tol(self, tol: T) -> Self {
        QuadConfig {
            abs_tol: tol,
            rel_tol: tol,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |v: T| v.is_finite() && v > T::zero();
        if !pos(self.abs_tol) || !pos(self.rel_tol) || !pos(self.tail_cutoff_mass) {
            return Err(RaceError::invalid("quadrature tolerances must be positive"));
        }
        if self.max_subdivisions == 0 {
            return Err(RaceError::invalid("max_subdivisions must be at least 1"));
        }
        if self.tail_cutoff_mass >= self.abs_tol {
            return Err(RaceError::invalid(
                "tail_cutoff_mass must be below abs_tol",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel<T> {
    a: T,
    b: T,
    value: T,
    err: T,
}

fn kronrod<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T) -> Panel<T> {
    let c = (a + b) * lit(0.5);
    let h = (b - a) * lit(0.5);
    let fc = f(c);
    let mut resk = fc * lit(WGK[7]);
    let mut resg = fc * lit(WG[3]);
    let mut resabs = resk.abs();
    let mut pairs = [(T::zero(), T::zero()); 7];
    for (j, pair) in pairs.iter_mut().enumerate() {
        let dx = h * lit(XGK[j]);
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        *pair = (f1, f2);
        resk = resk + lit::<T>(WGK[j]) * (f1 + f2);
        resabs = resabs + lit::<T>(WGK[j]) * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg = resg + lit::<T>(WG[j / 2]) * (f1 + f2);
        }
    }
    let mean = resk * lit(0.5);
    let mut resasc = lit::<T>(WGK[7]) * (fc - mean).abs();
    for (j, &(f1, f2)) in pairs.iter().enumerate() {
        resasc = resasc + lit::<T>(WGK[j]) * ((f1 - mean).abs() + (f2 - mean).abs());
    }
    let hh = h.abs();
    resasc = resasc * hh;
    resabs = resabs * hh;
    let mut err = ((resk - resg) * h).abs();
    if resasc != T::zero() && err != T::zero() {
        err = resasc * T::one().min((lit::<T>(200.0) * err / resasc).powf(lit(1.5)));
    }
    if resabs > T::min_positive_value() / (lit::<T>(50.0) * T::epsilon()) {
        err = err.max(lit::<T>(50.0) * T::epsilon() * resabs);
    }
    Panel {
        a,
        b,
        value: resk * h,
        err,
    }
}

fn sum_panels<T: Real>(panels: &[Panel<T>]) -> (T, T) {
    let mut v = Neumaier::default();
    let mut e = Neumaier::default();
    for p in panels {
        v.add(p.value);
        e.add(p.err);
    }
    (v.total(), e.total())
}

/// Adaptive Gauss–Kronrod (7/15) integration of `f` over `[a, b]`.
///
/// Bisects the panel with the largest error estimate until the summed estimate
/// is below `max(abs_tol, rel_tol·|I|) - slack`. Returns `(value, error)`.
pub fn integrate_adaptive<T: Real, F: Fn(T) -> T>(
    f: F,
    a: T,
    b: T,
    cfg: &QuadConfig<T>,
    slack: T,
) -> Result<(T, T)> {
    cfg.validate()?;
    if !(a.is_finite() && b.is_finite()) {
        return Err(RaceError::domain("integration limits must be finite"));
    }
    if a == b {
        return Ok((T::zero(), T::zero()));
    }
    let mut panels = vec![kronrod(&f, a, b)];
    loop {
        let (value, err) = sum_panels(&panels);
        let target = cfg.abs_tol.max(cfg.rel_tol * value.abs()) - slack;
        if err <= target {
            return Ok((value, err));
        }
        if panels.len() >= cfg.max_subdivisions {
            return Err(RaceError::Convergence {
                what: "adaptive quadrature",
                achieved: err.approx(),
                requested: target.approx(),
            });
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .fold((0, -T::one()), |best, (i, p)| {
                if p.err > best.1 {
                    (i, p.err)
                } else {
                    best
                }
            });
        let p = panels[worst];
        let mid = (p.a + p.b) * lit(0.5);
        if mid <= p.a || mid >= p.b {
            return Err(RaceError::Convergence {
                what: "adaptive quadrature (panel below resolution)",
                achieved: err.approx(),
                requested: target.approx(),
            });
        }
        panels[worst] = kronrod(&f, p.a, mid);
        panels.insert(worst + 1, kronrod(&f, mid, p.b));
    }
}

/// Quantiles `(lo, hi)` of `Gamma(shape, 1)` with `mass` below `lo` and above `hi`.
pub(crate) fn gamma_quantile_bounds<T: Real>(shape: T, mass: T) -> (T, T) {
    let cdf = |x: T| gamma_pq_unchecked(shape, x).0;
    let sf = |x: T| gamma_pq_unchecked(shape, x).1;
    let steps = 200;

    let mut hi = shape + T::one();
    while sf(hi) > mass {
        hi = hi * lit(2.0);
    }
    let mut a = hi * lit(0.5);
    let mut b = hi;
    for _ in 0..steps {
        let mid = (a + b) * lit(0.5);
        if mid <= a || mid >= b {
            break;
        }
        if sf(mid) > mass {
            a = mid;
        } else {
            b = mid;
        }
    }
    let hi = b;

    let mut lo = shape;
    while lo > T::zero() && cdf(lo) > mass {
        lo = lo * lit(0.5);
    }
    if lo <= T::min_positive_value() {
        return (T::zero(), hi);
    }
    let mut a = lo;
    let mut b = lo * lit(2.0);
    for _ in 0..steps {
        let mid = (a + b) * lit(0.5);
        if mid <= a || mid >= b {
            break;
        }
        if cdf(mid) > mass {
            b = mid;
        } else {
            a = mid;
        }
    }
    (a, hi)
}

/// `∫ f(x) Gamma(shape, rate)(dx)` over the central interval holding all but
/// `tail_cutoff_mass` of the weight. The returned error includes that mass,
/// assuming `|f| ≤ 1`.
pub fn integrate_gamma_weighted<T: Real, F: Fn(T) -> T>(
    f: F,
    shape: T,
    rate: T,
    cfg: &QuadConfig<T>,
) -> Result<(T, T)> {
    cfg.validate()?;
    let ok = |v: T| v.is_finite() && v > T::zero();
    if !ok(shape) || !ok(rate) {
        return Err(RaceError::domain("gamma shape and rate must be positive"));
    }
    let cut = cfg.tail_cutoff_mass;
    let (lo, hi) = gamma_quantile_bounds(shape, cut * lit(0.5));
    let (value, err) = if shape >= T::one() {
        integrate_adaptive(
            |x: T| {
                let w = gamma_density(x, shape, rate);
                if w == T::zero() {
                    T::zero()
                } else {
                    f(x) * w
                }
            },
            lo / rate,
            hi / rate,
            cfg,
            cut,
        )?
    } else {
        // y = (rate x)^shape flattens the singular weight at the origin.
        let inv = shape.recip();
        integrate_adaptive(
            |y: T| {
                if y <= T::zero() {
                    return f(T::zero()) * (-ln_gamma_unchecked(shape + T::one())).exp();
                }
                let u = y.powf(inv);
                f(u / rate) * gamma_power_term(shape, u) / (shape * y)
            },
            lo.powf(shape),
            hi.powf(shape),
            cfg,
            cut,
        )?
    };
    Ok((value, err + cut))
}

/// `(value, error)` of the one-dimensional integral for player `player`.
pub fn race_integral<T: Real>(
    game: &GameSpec<T>,
    player: usize,
    kind: Kind,
    cfg: &QuadConfig<T>,
) -> Result<(T, T)> {
    game.check_player(player)?;
    let n = game.goals();
    let p = game.probs();
    let nl = n[player];
    // Opponent k's tail is evaluated at (p_k n_ℓ / p_ℓ) x.
    let opponents: Vec<(T, T)> = (0..game.m())
        .filter(|&k| k != player)
        .map(|k| (n[k], p[k] * nl / p[player]))
        .collect();
    let floor = lit::<T>(PRODUCT_FLOOR);
    let integrand = |x: T| {
        let mut prod = T::one();
        for &(shape, scale) in &opponents {
            let (lower, upper) = gamma_pq_unchecked(shape, scale * x);
            prod = prod
                * match kind {
                    Kind::Win => upper,
                    Kind::Last => lower,
                };
            if prod < floor {
                return T::zero();
            }
        }
        prod
    };
    let (v, e) = integrate_gamma_weighted(integrand, nl, nl, cfg)?;
    Ok((v.max(T::zero()).min(T::one()), e))
}

/// `π_player` by quadrature.
pub fn win_prob_quad<T: Real>(game: &GameSpec<T>, player: usize, cfg: &QuadConfig<T>) -> Result<T> {
    race_integral(game, player, Kind::Win, cfg).map(|r| r.0)
}

/// `τ_player` by quadrature.
pub fn last_prob_quad<T: Real>(game: &GameSpec<T>, player: usize, cfg: &QuadConfig<T>) -> Result<T> {
    race_integral(game, player, Kind::Last, cfg).map(|r| r.0)
}

/// Every player's win or last-place probability by quadrature; `error_bound` is
/// the largest per-player error estimate.
pub fn probs_quad<T: Real>(
    game: &GameSpec<T>,
    kind: Kind,
    cfg: &QuadConfig<T>,
) -> Result<RaceProbabilities<T>> {
    let mut values = Vec::with_capacity(game.m());
    let mut bound = T::zero();
    for l in 0..game.m() {
        let (v, e) = race_integral(game, l, kind, cfg)?;
        values.push(v);
        bound = bound.max(e);
    }
    Ok(RaceProbabilities {
        kind,
        values,
        method: Method::Quad,
        error_bound: bound,
    })
}
