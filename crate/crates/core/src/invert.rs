//! Numerical inversion of even, real characteristic functions.
//!
//! The continuous density behind a CF with point mass c is
//!
//!   f(x) = (1/pi) int_0^inf [Psi(w) - c] cos(w x) dw.
//!
//! The integral is split at a truncation frequency W. The head [0, W] uses
//! Gauss-Legendre panels sized to resolve both the CF and the fastest cosine
//! oscillation. The tail [W, inf) is handled analytically: either it is
//! negligible because the CF carries a Gaussian factor, or the centered CF is
//! fitted to an algebraic series sum c_n w^-n (n = 2..6) whose cosine
//! transforms reduce to sine/cosine integrals. Slow w^-1 branches have no
//! place here; callers extract them in closed form first.

use crate::error::{Error, Result};
use crate::quad::gl15;
use crate::special::sici;
use crate::util;

/// How the centered CF decays at large w; drives truncation and tail handling.
#[derive(Debug, Clone, Copy)]
pub enum CfDecay {
    /// Psi - atom eventually behaves like an algebraic series starting at
    /// w^-2. `w_start_hint` is a frequency beyond which the asymptotic
    /// regime is expected to hold.
    Algebraic { w_start_hint: Option<f64> },
    /// Psi carries a factor exp(-variance w^2 / 2); the tail beyond the
    /// Gaussian cutoff is negligible.
    GaussianFactor { variance: f64 },
}

/// Tuning for one inversion.
#[derive(Debug, Clone, Copy)]
pub struct InvertOptions {
    pub decay: CfDecay,
    /// Narrowest w-scale on which the centered CF varies (for panel sizing).
    pub feature_scale: f64,
    /// Largest |x| at which the density will be evaluated.
    pub x_max: f64,
    /// Target absolute density error per point.
    pub abs_tol: f64,
}

impl InvertOptions {
    pub fn new(decay: CfDecay, feature_scale: f64, x_max: f64) -> Self {
        InvertOptions {
            decay,
            feature_scale,
            x_max,
            abs_tol: 1e-6,
        }
    }
}

const TAIL_TERMS: usize = 5; // coefficients of w^-2 .. w^-6

#[derive(Debug, Clone)]
struct TailFit {
    w_end: f64,
    coeffs: [f64; TAIL_TERMS],
}

impl TailFit {
    /// int_W^inf (sum c_n w^-n) cos(w x) dw, exact via Si/Ci.
    fn integral(&self, x: f64) -> Result<f64> {
        let w = self.w_end;
        let ax = x.abs();
        if ax * w < 1e-9 {
            let mut acc = 0.0;
            for (i, &c) in self.coeffs.iter().enumerate() {
                let n = (i + 2) as f64;
                acc += c * w.powf(1.0 - n) / (n - 1.0);
            }
            return Ok(acc);
        }
        let z = w * ax;
        let (si, ci) = sici(z)?;
        // itilde_n = int_z^inf cos t / t^n dt, jtilde_n likewise with sin
        let mut itilde = -ci;
        let mut jtilde = std::f64::consts::FRAC_PI_2 - si;
        let (cz, sz) = (z.cos(), z.sin());
        let mut acc = 0.0;
        let mut zpow = z; // z^(n-1) for n = current order
        for n in 2..=(TAIL_TERMS + 1) {
            let nf = n as f64;
            let it_next = (cz / zpow - jtilde) / (nf - 1.0);
            let jt_next = (sz / zpow + itilde) / (nf - 1.0);
            itilde = it_next;
            jtilde = jt_next;
            zpow *= z;
            // coefficient of w^-n, transform scaled by x^(n-1)
            acc += self.coeffs[n - 2] * ax.powi(n as i32 - 1) * itilde;
        }
        Ok(acc)
    }
}

/// A prepared inversion: quadrature nodes with pre-weighted centered-CF
/// values, plus the analytic tail. Immutable after construction; evaluation
/// at any x is a cosine-weighted dot product.
#[derive(Debug, Clone)]
pub struct CfInversion {
    nodes: Vec<f64>,
    weighted: Vec<f64>,
    w_end: f64,
    tail: Option<TailFit>,
    fit_residual: f64,
    tail_estimate: f64,
}

/// Newton divided-difference fit of y(u) = h(1/u) u^-2 ... expanded to
/// monomial coefficients of u^0..u^4.
fn fit_algebraic<H: Fn(f64) -> f64>(h: &H, w_start: f64) -> ([f64; TAIL_TERMS], f64) {
    let us: Vec<f64> = (0..TAIL_TERMS)
        .map(|j| 1.0 / (w_start * (1u64 << j) as f64))
        .collect();
    let ys: Vec<f64> = us.iter().map(|&u| h(1.0 / u) / (u * u)).collect();
    // divided differences
    let mut dd = ys.clone();
    for level in 1..TAIL_TERMS {
        for i in (level..TAIL_TERMS).rev() {
            dd[i] = (dd[i] - dd[i - 1]) / (us[i] - us[i - level]);
        }
    }
    // expand Newton form to monomials
    let mut a = [0.0; TAIL_TERMS];
    for k in (0..TAIL_TERMS).rev() {
        for i in (1..TAIL_TERMS).rev() {
            a[i] = a[i - 1] - us[k] * a[i];
        }
        a[0] = dd[k] - us[k] * a[0];
    }
    // residual at geometric midpoints
    let mut residual = 0.0_f64;
    for &mult in &[1.414, 2.828, 5.657, 11.314] {
        let w = w_start * mult;
        let u = 1.0 / w;
        let mut fit = 0.0;
        for i in (0..TAIL_TERMS).rev() {
            fit = fit * u + a[i];
        }
        residual = residual.max((h(w) * w * w - fit).abs());
    }
    (a, residual)
}

impl CfInversion {
    /// Prepare the inversion of a centered CF `h(w) = Psi(w) - atom`.
    pub fn prepare<H>(h: H, opts: &InvertOptions) -> Result<Self>
    where
        H: Fn(f64) -> f64 + Sync,
    {
        let tol = opts.abs_tol;
        let (w_end, tail, fit_residual, tail_estimate) = match opts.decay {
            CfDecay::GaussianFactor { variance } => {
                if !(variance > 0.0) {
                    return Err(Error::invalid("GaussianFactor decay requires variance > 0"));
                }
                // bound: int_W^inf e^{-v w^2/2} dw <= e^{-v W^2/2} / (v W)
                let mut w = (2.0 * 30.0 / variance).sqrt();
                let bound = |w: f64| (-0.5 * variance * w * w).exp() / (variance * w);
                for _ in 0..200 {
                    if bound(w) <= tol * std::f64::consts::PI / 10.0 {
                        break;
                    }
                    w *= 1.1;
                }
                (w, None, 0.0, bound(w) / std::f64::consts::PI)
            }
            CfDecay::Algebraic { w_start_hint } => {
                let mut w = w_start_hint.unwrap_or(32.0).max(8.0);
                let mut best: Option<(f64, [f64; TAIL_TERMS], f64, f64)> = None;
                for _ in 0..16 {
                    let (coeffs, residual) = fit_algebraic(&h, w);
                    // error of the fitted tail, concentrated near W
                    let est = 2.0 * residual / (w * std::f64::consts::PI);
                    best = Some((w, coeffs, residual, est));
                    if est <= tol / 5.0 {
                        break;
                    }
                    w *= 2.0;
                }
                let (w, coeffs, residual, est) = best.unwrap();
                if est > tol / 5.0 {
                    return Err(Error::InversionFailure {
                        normalization: f64::NAN,
                        tolerance: tol,
                        w_end: w,
                        tail_estimate: est,
                        fit_residual: residual,
                    });
                }
                (w, Some(TailFit { w_end: w, coeffs }), residual, est)
            }
        };

        // head panels: resolve both the CF feature scale and the fastest
        // oscillation cos(w x_max)
        let osc = if opts.x_max > 0.0 {
            std::f64::consts::FRAC_PI_2 / opts.x_max
        } else {
            f64::INFINITY
        };
        let width = osc.min(opts.feature_scale / 2.0).min(w_end);
        if !(width > 0.0) {
            return Err(Error::invalid("invalid panel width in inversion"));
        }
        let n_panels = (w_end / width).ceil() as usize;
        if n_panels > 2_000_000 {
            return Err(Error::Numeric(format!(
                "inversion head rule too large: {n_panels} panels"
            )));
        }
        let step = w_end / n_panels as f64;
        let (gl_nodes, gl_weights) = gl15();
        let mut nodes = Vec::with_capacity(n_panels * gl_nodes.len());
        let mut weighted = Vec::with_capacity(n_panels * gl_nodes.len());
        for p in 0..n_panels {
            let a = step * p as f64;
            let c = a + 0.5 * step;
            let half = 0.5 * step;
            for (&t, &gw) in gl_nodes.iter().zip(gl_weights) {
                let w = c + half * t;
                nodes.push(w);
                weighted.push(gw * half * h(w));
            }
        }
        Ok(CfInversion {
            nodes,
            weighted,
            w_end,
            tail,
            fit_residual,
            tail_estimate,
        })
    }

    pub fn w_end(&self) -> f64 {
        self.w_end
    }

    pub fn fit_residual(&self) -> f64 {
        self.fit_residual
    }

    pub fn tail_estimate(&self) -> f64 {
        self.tail_estimate
    }

    /// Continuous density at a single point.
    pub fn density_at(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for (&w, &v) in self.nodes.iter().zip(&self.weighted) {
            acc += v * (w * x).cos();
        }
        if let Some(tail) = &self.tail {
            acc += tail.integral(x).unwrap_or(0.0);
        }
        acc / std::f64::consts::PI
    }

    /// Densities at x = 0, dx, 2 dx, ..., (n-1) dx.
    ///
    /// Uses a rotation recurrence for cos(w (x + dx)) within fixed-size
    /// chunks (re-anchored with true trig at every chunk start), so results
    /// are bit-identical between parallel and sequential execution.
    pub fn density_uniform_grid(&self, dx: f64, n: usize, parallel: bool) -> Vec<f64> {
        const CHUNK: usize = 128;
        let n_chunks = n.div_ceil(CHUNK);
        let parts = util::map_indices(n_chunks, parallel, |ci| {
            let j0 = ci * CHUNK;
            let len = CHUNK.min(n - j0);
            let x0 = j0 as f64 * dx;
            let mut acc = vec![0.0; len];
            for (&w, &v) in self.nodes.iter().zip(&self.weighted) {
                let (mut s, mut c) = (w * x0).sin_cos();
                let (sd, cd) = (w * dx).sin_cos();
                for slot in acc.iter_mut() {
                    *slot += v * c;
                    let c_next = c * cd - s * sd;
                    s = s * cd + c * sd;
                    c = c_next;
                }
            }
            if let Some(tail) = &self.tail {
                for (j, slot) in acc.iter_mut().enumerate() {
                    *slot += tail.integral(x0 + j as f64 * dx).unwrap_or(0.0);
                }
            }
            for slot in acc.iter_mut() {
                *slot /= std::f64::consts::PI;
            }
            acc
        });
        let mut out = Vec::with_capacity(n);
        for part in parts {
            out.extend_from_slice(&part);
        }
        out
    }

    /// Sequential twin of [`density_uniform_grid`]; reference path for the
    /// benchmark suite.
    pub fn density_uniform_grid_sequential(&self, dx: f64, n: usize) -> Vec<f64> {
        self.density_uniform_grid(dx, n, false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn opts_alg(x_max: f64) -> InvertOptions {
        InvertOptions::new(CfDecay::Algebraic { w_start_hint: Some(32.0) }, 1.0, x_max)
    }

    #[test]
    fn laplace_pair() {
        // Psi = 1/(1+w^2) -> f(x) = exp(-|x|)/2
        let inv = CfInversion::prepare(|w| 1.0 / (1.0 + w * w), &opts_alg(10.0)).unwrap();
        assert_relative_eq!(inv.density_at(0.0), 0.5, epsilon = 1e-8);
        assert_relative_eq!(inv.density_at(1.0), 0.5 * (-1.0_f64).exp(), epsilon = 1e-8);
        assert_relative_eq!(inv.density_at(7.5), 0.5 * (-7.5_f64).exp(), epsilon = 1e-8);
    }

    #[test]
    fn squared_pair() {
        // Psi = (1/(1+w^2))^2 -> f(x) = e^{-|x|} (|x|/4 + 1/4); f(2) ~ 0.101501
        let inv =
            CfInversion::prepare(|w| (1.0 / (1.0 + w * w)).powi(2), &opts_alg(10.0)).unwrap();
        assert_relative_eq!(inv.density_at(2.0), 0.101501, epsilon = 1e-6);
        assert_relative_eq!(
            inv.density_at(0.0),
            0.25,
            epsilon = 1e-8
        );
    }

    #[test]
    fn gaussian_cf() {
        // Psi = exp(-w^2/2) -> standard normal density
        let opts = InvertOptions::new(CfDecay::GaussianFactor { variance: 1.0 }, 1.0, 8.0);
        let inv = CfInversion::prepare(|w| (-0.5 * w * w).exp(), &opts).unwrap();
        assert_relative_eq!(
            inv.density_at(0.0),
            1.0 / (2.0 * std::f64::consts::PI).sqrt(),
            epsilon = 1e-9
        );
        assert_relative_eq!(
            inv.density_at(2.0),
            (-2.0_f64).exp() / (2.0 * std::f64::consts::PI).sqrt(),
            epsilon = 1e-9
        );
    }

    #[test]
    fn gaussian_cf_with_algebraic_plan() {
        // the self-validating algebraic plan also handles super-algebraic decay
        let inv = CfInversion::prepare(|w| (-0.5 * w * w).exp(), &opts_alg(8.0)).unwrap();
        assert_relative_eq!(
            inv.density_at(1.0),
            (-0.5_f64).exp() / (2.0 * std::f64::consts::PI).sqrt(),
            epsilon = 1e-7
        );
    }

    #[test]
    fn grid_matches_pointwise_and_is_deterministic() {
        let inv = CfInversion::prepare(|w| 1.0 / (1.0 + w * w), &opts_alg(10.0)).unwrap();
        let n = 1001;
        let dx = 0.01;
        let par = inv.density_uniform_grid(dx, n, true);
        let seq = inv.density_uniform_grid_sequential(dx, n);
        assert_eq!(par, seq, "parallel and sequential grids must be bit-identical");
        for &j in &[0usize, 1, 57, 500, 1000] {
            let x = j as f64 * dx;
            assert_relative_eq!(par[j], inv.density_at(x), epsilon = 1e-10);
        }
    }

    #[test]
    fn tail_fit_reports_failure_for_slow_decay() {
        // w^-1 decay cannot be fitted by the w^-2.. series: the residual
        // stays large and prepare must fail with diagnostics.
        let r = CfInversion::prepare(|w| 1.0 / (1.0 + w * w).sqrt(), &opts_alg(10.0));
        assert!(matches!(r, Err(Error::InversionFailure { .. })));
    }
}
