//! Special functions against 50-digit reference values (see data/gen_reference.py).

use multirace::specfn::{gamma_sf, log_gamma, reg_inc_beta, std_normal_cdf};

const REFERENCE: &str = include_str!("data/reference.txt");

fn rows(name: &str) -> Vec<Vec<f64>> {
    REFERENCE
        .lines()
        .filter(|l| l.split_whitespace().next() == Some(name))
        .map(|l| {
            l.split_whitespace()
                .skip(1)
                .map(|t| t.parse::<f64>().unwrap())
                .collect()
        })
        .collect()
}

fn worst(name: &str, f: impl Fn(&[f64]) -> f64, err: impl Fn(f64, f64) -> f64) -> (f64, Vec<f64>) {
    let mut out = (0.0, vec![]);
    for r in rows(name) {
        let (args, want) = r.split_at(r.len() - 1);
        let e = err(f(args), want[0]);
        if e > out.0 || e.is_nan() {
            out = (e, r.clone());
        }
    }
    assert!(!rows(name).is_empty());
    out
}

fn rel(got: f64, want: f64) -> f64 {
    if want == 0.0 {
        got.abs()
    } else {
        ((got - want) / want).abs()
    }
}

fn abs(got: f64, want: f64) -> f64 {
    (got - want).abs()
}

#[test]
fn log_gamma_relative_error() {
    let (e, at) = worst("lgamma", |a| log_gamma(a[0]).unwrap(), |g, w| {
        // Relative error in Γ itself near the zeros of ln Γ.
        if w.abs() < 1.0 { abs(g, w) } else { rel(g, w) }
    });
    assert!(e <= 1e-13, "worst {e:e} at {at:?}");
}

#[test]
fn reg_inc_beta_absolute_error() {
    let (e, at) = worst("ibeta", |a| reg_inc_beta(a[0], a[1], a[2]).unwrap(), abs);
    assert!(e <= 1e-13, "worst {e:e} at {at:?}");
}

#[test]
fn gamma_sf_absolute_error() {
    let (e, at) = worst("gammasf", |a| gamma_sf(a[0], a[1]).unwrap(), abs);
    assert!(e <= 1e-13, "worst {e:e} at {at:?}");
}

#[test]
fn normal_cdf_error() {
    let (e, at) = worst("ncdf", |a| std_normal_cdf(a[0]).unwrap(), abs);
    assert!(e <= 1e-15, "worst {e:e} at {at:?}");
    let (e, at) = worst("ncdf", |a| std_normal_cdf(a[0]).unwrap(), rel);
    assert!(e <= 1e-12, "worst relative {e:e} at {at:?}");
}

