//! Quadrature building blocks: Gauss-Legendre rules, panel integration,
//! dyadic refinement for integrable endpoint singularities, and expectations
//! against the standard normal weight.

use crate::util;
use std::sync::OnceLock;

/// Gauss-Legendre nodes/weights on [-1, 1], computed by Newton iteration on
/// the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // initial guess (Abramowitz & Stegun 22.16.6)
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 0..n {
                let jf = j as f64;
                let p3 = p2;
                p2 = p1;
                p1 = ((2.0 * jf + 1.0) * z * p2 - jf * p3) / (jf + 1.0);
            }
            pp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * pp * pp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

pub(crate) fn gl15() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(15))
}

/// 15-point Gauss-Legendre integral of `f` over [a, b].
pub fn integrate_gl15<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let (nodes, weights) = gl15();
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut acc = 0.0;
    for (&t, &w) in nodes.iter().zip(weights) {
        acc += w * f(c + h * t);
    }
    acc * h
}

/// Integral of `f` over [a, b] split into `panels` equal GL-15 panels.
pub fn integrate_panels<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let panels = panels.max(1);
    let step = (b - a) / panels as f64;
    let mut acc = 0.0;
    for i in 0..panels {
        let lo = a + step * i as f64;
        acc += integrate_gl15(&f, lo, lo + step);
    }
    acc
}

/// Integral over [0, b] of a function with an integrable singularity at 0
/// (logarithmic or weaker): GL-15 over dyadically shrinking panels toward 0.
pub fn integrate_singular_at_zero<F: Fn(f64) -> f64>(f: F, b: f64) -> f64 {
    let mut acc = 0.0;
    let mut hi = b;
    for _ in 0..64 {
        let lo = hi / 2.0;
        acc += integrate_gl15(&f, lo, hi);
        hi = lo;
        if hi < 1e-300 {
            break;
        }
    }
    acc
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Standard normal CDF via quadrature of the density (used only as an
/// internal reference; accuracy ~1e-14).
pub fn normal_cdf(x: f64) -> f64 {
    let ax = x.abs();
    let tail = if ax >= 9.0 {
        0.0
    } else {
        integrate_panels(normal_pdf, ax, 9.0, (2.0 * (9.0 - ax)).ceil() as usize)
    };
    if x >= 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

/// E[f(H)] for H ~ N(0,1) and even f, via GL-15 panels against the normal
/// weight with dyadic refinement toward 0 down to `smallest_scale`.
///
/// Robust for integrands with a log-like transition near the origin (e.g.
/// log(1 + c h^2) with large c), where fixed-order Gauss-Hermite rules under-
/// resolve the transition region.
pub fn normal_expectation_even<F>(f: F, smallest_scale: f64, parallel: bool) -> f64
where
    F: Fn(f64) -> f64 + Sync + Send,
{
    let mut breaks = vec![9.0_f64];
    let floor = (smallest_scale / 4.0).clamp(1e-10, 1.0);
    let mut hi = 9.0_f64;
    while hi > floor {
        hi /= 2.0;
        breaks.push(hi);
    }
    breaks.push(0.0);
    let (nodes, weights) = gl15().clone();
    let vals = util::map_indices(breaks.len() - 1, parallel, |i| {
        let (b, a) = (breaks[i], breaks[i + 1]);
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut acc = 0.0;
        for (&t, &w) in nodes.iter().zip(&weights) {
            let x = c + h * t;
            acc += w * normal_pdf(x) * f(x);
        }
        acc * h
    });
    2.0 * vals.iter().sum::<f64>()
}

/// Composite trapezoid over uniformly spaced samples.
pub fn trapezoid_uniform(values: &[f64], dx: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let inner: f64 = values[1..values.len() - 1].iter().sum();
    dx * (0.5 * values[0] + inner + 0.5 * values[values.len() - 1])
}
