//! Interference densities: closed forms for the special cases, the subset
//! decomposition of the general CF, and grid-sampled mixed distributions.
//!
//! The general interference CF expands over occupancy subsets. The empty
//! subset is the point mass prod(1-p); each singleton p_m prod_{k!=m}(1-p_k)
//! inverts in closed form to a K0 kernel; everything that remains decays at
//! least as w^-2 and goes through the numeric engine. This confines both the
//! slow w^-1 branches and the log singularity at x = 0 to analytic terms.

use crate::cf::{CciCf, CharFn};
use crate::error::{Error, Result};
use crate::invert::{CfDecay, CfInversion, InvertOptions};
use crate::quad::{integrate_gl15, integrate_singular_at_zero};
use crate::special::bessel_k0;

/// Uniform symmetric grid: x_i = (i - half_points) dx for i in 0..=2*half_points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub dx: f64,
    pub half_points: usize,
}

impl GridSpec {
    pub fn new(dx: f64, half_points: usize) -> Result<Self> {
        if !(dx > 0.0) || half_points == 0 {
            return Err(Error::invalid("grid requires dx > 0 and half_points >= 1"));
        }
        Ok(GridSpec { dx, half_points })
    }

    /// Default grid for a law of standard deviation `sigma`: spacing
    /// 0.01 sigma, half-width 12 sigma.
    pub fn from_sigma(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(Error::invalid("sigma must be > 0"));
        }
        GridSpec::new(0.01 * sigma, 1200)
    }

    pub fn len(&self) -> usize {
        2 * self.half_points + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn x_max(&self) -> f64 {
        self.dx * self.half_points as f64
    }

    pub fn x_at(&self, i: usize) -> f64 {
        (i as f64 - self.half_points as f64) * self.dx
    }
}

/// A symmetric density sampled on a uniform grid, plus an explicit point mass
/// at zero. For laws with a K0 log singularity the center entry stores the
/// density at dx/2 (display/offset convention) and `zero_cell_mass` carries
/// the exact probability of [-dx, dx] so that integrals stay honest.
#[derive(Debug, Clone)]
pub struct NumericPdf {
    pub grid: GridSpec,
    pub values: Vec<f64>,
    pub atom_mass: f64,
    pub zero_cell_mass: Option<f64>,
}

impl NumericPdf {
    /// Continuous-part integral plus the atom.
    pub fn total_mass(&self) -> f64 {
        self.atom_mass + self.continuous_mass()
    }

    /// Integral of the continuous part over the grid span.
    pub fn continuous_mass(&self) -> f64 {
        let h = self.grid.half_points;
        let dx = self.grid.dx;
        match self.zero_cell_mass {
            None => {
                let inner: f64 = self.values[1..self.values.len() - 1].iter().sum();
                dx * (0.5 * self.values[0] + inner + 0.5 * self.values[self.values.len() - 1])
            }
            Some(cell) => {
                // trapezoid over [dx, x_max], doubled, plus the exact center cell
                let right = &self.values[h + 1..];
                let inner: f64 = right[1..right.len() - 1].iter().sum();
                cell + 2.0 * dx * (0.5 * right[0] + inner + 0.5 * right[right.len() - 1])
            }
        }
    }

    /// Variance of the mixed law (the atom contributes nothing).
    pub fn variance(&self) -> f64 {
        let h = self.grid.half_points;
        let dx = self.grid.dx;
        let mut acc = 0.0;
        for (i, &v) in self.values.iter().enumerate() {
            let x = (i as f64 - h as f64) * dx;
            let w = if i == 0 || i == self.values.len() - 1 {
                0.5
            } else {
                1.0
            };
            acc += w * x * x * v;
        }
        acc * dx
    }

    pub fn value_at(&self, i: usize) -> f64 {
        self.values[i]
    }

    /// CSV serialization: metadata header lines then x,density rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "# atom_mass={} dx={} half_points={} zero_cell_mass={}\n",
            self.atom_mass,
            self.grid.dx,
            self.grid.half_points,
            self.zero_cell_mass
                .map(|m| m.to_string())
                .unwrap_or_else(|| "none".into())
        ));
        out.push_str("x,density\n");
        for (i, v) in self.values.iter().enumerate() {
            out.push_str(&format!("{},{}\n", self.grid.x_at(i), v));
        }
        out
    }
}

/// K0 kernel: density of sqrt(E) H X for independent standard normal H, X.
/// Diverges logarithmically at x = 0.
pub fn k0_density(e: f64, x: f64) -> f64 {
    debug_assert!(e > 0.0);
    let root = e.sqrt();
    let ax = x.abs();
    if ax == 0.0 {
        return f64::INFINITY;
    }
    match bessel_k0(ax / root) {
        Ok(v) => v / (std::f64::consts::PI * root),
        Err(_) => f64::INFINITY,
    }
}

/// Probability of [0, delta] under the K0 kernel with power `e`.
pub fn k0_cell_mass(e: f64, delta: f64) -> f64 {
    let root = e.sqrt();
    let z = delta / root;
    integrate_singular_at_zero(|t| bessel_k0(t).unwrap_or(0.0), z) / std::f64::consts::PI
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Closed-form density of the sum of `m` equal-power full-loading
/// interferers, for m = 1 or even m (pairs of product-normal branches merge
/// into rational CFs of integer order n = m/2).
pub fn equal_power_density(m: usize, e1: f64, x: f64) -> Result<f64> {
    if !(e1 > 0.0) {
        return Err(Error::invalid("equal-power density requires E1 > 0"));
    }
    if m == 1 {
        return Ok(k0_density(e1, x));
    }
    if m == 0 || m % 2 != 0 {
        return Err(Error::invalid(format!(
            "no closed form for m = {m}; only m = 1 and even m are supported"
        )));
    }
    let n = m / 2;
    let root = e1.sqrt();
    let u = x.abs() / root;
    let mut sum = 0.0;
    for k in 0..n {
        sum += factorial(2 * n - k - 2) * (2.0 * u).powi(k as i32)
            / (factorial(k) * factorial(n - k - 1));
    }
    Ok((-u).exp() * sum / (2f64.powi(2 * n as i32 - 1) * factorial(n - 1) * root))
}

/// Partial-fraction coefficients of 1/prod(1 + E_m w^2):
/// a_m = E_m^2 / prod_{k!=m} (E_m - E_k). They sum to one.
pub fn three_pair_coefficients(e: [f64; 3]) -> [f64; 3] {
    let a1 = e[0] * e[0] / ((e[0] - e[1]) * (e[0] - e[2]));
    let a2 = e[1] * e[1] / ((e[1] - e[0]) * (e[1] - e[2]));
    let a3 = e[2] * e[2] / ((e[2] - e[0]) * (e[2] - e[1]));
    [a1, a2, a3]
}

/// Which algebraic form a three-pair evaluation used.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThreePairForm {
    /// Distinct powers: plain partial fractions.
    Distinct,
    /// Two powers within the relative-gap threshold, merged to their mean.
    MergedPair,
    /// All three powers within the threshold: equal-power form at the mean.
    MergedAll,
}

/// Relative gap below which partial-fraction coefficients blow up and the
/// merged limit forms take over.
pub const THREE_PAIR_GAP: f64 = 1e-6;

fn rel_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.max(b)
}

/// Decide the evaluation form for a power triple.
pub fn three_pair_form(e: [f64; 3]) -> ThreePairForm {
    let g01 = rel_gap(e[0], e[1]);
    let g02 = rel_gap(e[0], e[2]);
    let g12 = rel_gap(e[1], e[2]);
    let close = |g: f64| g < THREE_PAIR_GAP;
    if close(g01) && close(g02) && close(g12) {
        ThreePairForm::MergedAll
    } else if close(g01) || close(g02) || close(g12) {
        ThreePairForm::MergedPair
    } else {
        ThreePairForm::Distinct
    }
}

fn laplace_density(e: f64, x: f64) -> f64 {
    let root = e.sqrt();
    (-x.abs() / root).exp() / (2.0 * root)
}

/// Density of six interferers whose powers pair up into the triple `e`
/// (full loading). Distinct powers use partial fractions; nearly-coalescing
/// powers switch to the merged limit forms at the group mean.
pub fn three_pair_density(e: [f64; 3], x: f64) -> Result<f64> {
    if e.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::invalid("three-pair density requires positive powers"));
    }
    match three_pair_form(e) {
        ThreePairForm::MergedAll => {
            let mean = (e[0] + e[1] + e[2]) / 3.0;
            equal_power_density(6, mean, x)
        }
        ThreePairForm::Distinct => {
            let a = three_pair_coefficients(e);
            Ok((0..3)
                .map(|m| a[m] * laplace_density(e[m], x))
                .sum())
        }
        ThreePairForm::MergedPair => {
            // identify the coalescing pair, merge to its mean
            let (pair, single) = if rel_gap(e[0], e[1]) < THREE_PAIR_GAP {
                ((e[0] + e[1]) / 2.0, e[2])
            } else if rel_gap(e[0], e[2]) < THREE_PAIR_GAP {
                ((e[0] + e[2]) / 2.0, e[1])
            } else {
                ((e[1] + e[2]) / 2.0, e[0])
            };
            let (a, b) = (pair, single);
            // 1/((1+a t)^2 (1+b t)) = A/(1+a t) + B/(1+a t)^2 + C/(1+b t)
            let denom = (b - a) * (b - a);
            let coef_a = -a * b / denom;
            let coef_b = a / (a - b);
            let coef_c = b * b / denom;
            Ok(coef_a * laplace_density(a, x)
                + coef_b * equal_power_density(4, a, x)?
                + coef_c * laplace_density(b, x))
        }
    }
}

/// Analytic decomposition of an interference(+Gaussian) law: explicit atom,
/// closed-form K0 singles, and a prepared numeric inversion for the rest.
pub struct CciDensity {
    atom: f64,
    singles: Vec<(f64, f64)>, // (weight beta_m, power E_m)
    numeric: Option<CfInversion>,
    variance: f64,
}

fn validate_powers_loadings(powers: &[f64], loadings: &[f64]) -> Result<()> {
    if powers.len() != loadings.len() {
        return Err(Error::invalid("powers and loadings must have equal length"));
    }
    if powers.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::invalid("received powers must be > 0"));
    }
    if loadings.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
        return Err(Error::invalid("loading rates must lie in [0, 1]"));
    }
    Ok(())
}

impl CciDensity {
    /// Pure interference (no Gaussian factor). `x_max` is the largest |x|
    /// at which the density will be evaluated.
    pub fn interference(powers: &[f64], loadings: &[f64], x_max: f64) -> Result<Self> {
        validate_powers_loadings(powers, loadings)?;
        let atom: f64 = loadings.iter().map(|&p| 1.0 - p).product();
        let mut singles = Vec::new();
        for m in 0..powers.len() {
            let beta: f64 = loadings[m]
                * loadings
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| k != m)
                    .map(|(_, &p)| 1.0 - p)
                    .product::<f64>();
            if beta > 0.0 {
                singles.push((beta, powers[m]));
            }
        }
        let active: Vec<(f64, f64)> = powers
            .iter()
            .zip(loadings)
            .filter(|&(_, &p)| p > 0.0)
            .map(|(&e, &p)| (e, p))
            .collect();
        let numeric = if active.len() >= 2 {
            let e_min = active.iter().map(|&(e, _)| e).fold(f64::INFINITY, f64::min);
            let e_max = active.iter().map(|&(e, _)| e).fold(0.0, f64::max);
            let cf = CciCf::new(powers.to_vec(), loadings.to_vec(), 0.0)?;
            let singles_cl = singles.clone();
            let h = move |w: f64| {
                let mut v = cf.eval(w) - atom;
                for &(beta, e) in &singles_cl {
                    v -= beta / (1.0 + e * w * w).sqrt();
                }
                v
            };
            let opts = InvertOptions::new(
                CfDecay::Algebraic {
                    w_start_hint: Some(24.0 / e_min.sqrt()),
                },
                1.0 / e_max.sqrt(),
                x_max,
            );
            Some(CfInversion::prepare(h, &opts)?)
        } else {
            None
        };
        let variance: f64 = powers.iter().zip(loadings).map(|(&e, &p)| p * e).sum();
        Ok(CciDensity {
            atom,
            singles,
            numeric,
            variance,
        })
    }

    /// Interference plus a Gaussian factor of variance `gauss_variance`
    /// (noise, or noise plus the conditioned desired term). Fully numeric:
    /// the Gaussian cutoff makes the integrand rapidly decaying, and the
    /// resulting density is bounded.
    pub fn signal(
        powers: &[f64],
        loadings: &[f64],
        gauss_variance: f64,
        x_max: f64,
    ) -> Result<Self> {
        validate_powers_loadings(powers, loadings)?;
        if !(gauss_variance > 0.0) {
            return Err(Error::invalid("signal density requires a positive Gaussian variance"));
        }
        let cf = CciCf::new(powers.to_vec(), loadings.to_vec(), gauss_variance)?;
        let variance = cf.variance();
        let e_max = powers
            .iter()
            .zip(loadings)
            .filter(|&(_, &p)| p > 0.0)
            .map(|(&e, _)| e)
            .fold(0.0_f64, f64::max);
        let feature = (1.0 / gauss_variance.sqrt()).min(if e_max > 0.0 {
            1.0 / e_max.sqrt()
        } else {
            f64::INFINITY
        });
        let opts = InvertOptions::new(
            CfDecay::GaussianFactor {
                variance: gauss_variance,
            },
            feature,
            x_max,
        );
        let numeric = CfInversion::prepare(move |w| cf.eval(w), &opts)?;
        Ok(CciDensity {
            atom: 0.0,
            singles: Vec::new(),
            numeric: Some(numeric),
            variance,
        })
    }

    pub fn atom_mass(&self) -> f64 {
        self.atom
    }

    /// Analytic variance sum p_m E_m (+ Gaussian part).
    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn has_singular_center(&self) -> bool {
        !self.singles.is_empty()
    }

    /// Continuous part of the density. Infinite at x = 0 when K0 singles are
    /// present.
    pub fn continuous_at(&self, x: f64) -> f64 {
        let mut v = 0.0;
        for &(beta, e) in &self.singles {
            v += beta * k0_density(e, x);
        }
        if let Some(inv) = &self.numeric {
            v += inv.density_at(x);
        }
        v
    }

    /// Exact probability of [-dx, dx] (for the singular-center convention).
    fn zero_cell_mass(&self, dx: f64) -> f64 {
        let singles: f64 = self
            .singles
            .iter()
            .map(|&(beta, e)| beta * k0_cell_mass(e, dx))
            .sum();
        let numeric = match &self.numeric {
            Some(inv) => integrate_gl15(|x| inv.density_at(x), 0.0, dx),
            None => 0.0,
        };
        2.0 * (singles + numeric)
    }

    /// Sample onto a grid, with the singular-center handling and a
    /// normalization check at tolerance 1e-3.
    pub fn to_numeric_pdf(&self, grid: &GridSpec) -> Result<NumericPdf> {
        self.to_numeric_pdf_impl(grid, true)
    }

    /// Sequential twin of [`to_numeric_pdf`]; reference path for benchmarks.
    pub fn to_numeric_pdf_sequential(&self, grid: &GridSpec) -> Result<NumericPdf> {
        self.to_numeric_pdf_impl(grid, false)
    }

    fn to_numeric_pdf_impl(&self, grid: &GridSpec, parallel: bool) -> Result<NumericPdf> {
        let h = grid.half_points;
        let dx = grid.dx;
        let numeric_right = match &self.numeric {
            Some(inv) => inv.density_uniform_grid(dx, h + 1, parallel),
            None => vec![0.0; h + 1],
        };
        let mut values = vec![0.0; grid.len()];
        for i in 0..=h {
            let x = dx * i as f64;
            let mut v = numeric_right[i];
            if i == 0 && self.has_singular_center() {
                // offset convention: the stored center value is f(dx/2)
                v = self.continuous_at(dx / 2.0);
            } else {
                for &(beta, e) in &self.singles {
                    v += beta * k0_density(e, x);
                }
            }
            values[h + i] = v;
            values[h - i] = v;
        }
        let zero_cell_mass = if self.has_singular_center() {
            Some(self.zero_cell_mass(dx))
        } else {
            None
        };
        let pdf = NumericPdf {
            grid: *grid,
            values,
            atom_mass: self.atom,
            zero_cell_mass,
        };
        let total = pdf.total_mass();
        const EPS_NORM: f64 = 1e-3;
        if (total - 1.0).abs() > EPS_NORM {
            let (w_end, tail_estimate, fit_residual) = match &self.numeric {
                Some(inv) => (inv.w_end(), inv.tail_estimate(), inv.fit_residual()),
                None => (0.0, 0.0, 0.0),
            };
            return Err(Error::InversionFailure {
                normalization: total,
                tolerance: EPS_NORM,
                w_end,
                tail_estimate,
                fit_residual,
            });
        }
        Ok(pdf)
    }
}

/// Numerical inversion of an arbitrary even, real CF onto a grid (the raw
/// engine behind [`CciDensity`]). The CF's centered part must decay at least
/// as w^-2; slow single branches belong in closed form, not here.
pub fn invert_cf(cf: &dyn CharFn, grid: &GridSpec, opts: &InvertOptions) -> Result<NumericPdf> {
    let atom = cf.atom_mass();
    let inv = CfInversion::prepare(|w| cf.eval(w) - atom, opts)?;
    let h = grid.half_points;
    let right = inv.density_uniform_grid(grid.dx, h + 1, true);
    let mut values = vec![0.0; grid.len()];
    for i in 0..=h {
        values[h + i] = right[i];
        values[h - i] = right[i];
    }
    let pdf = NumericPdf {
        grid: *grid,
        values,
        atom_mass: atom,
        zero_cell_mass: None,
    };
    let total = pdf.total_mass();
    const EPS_NORM: f64 = 1e-3;
    if (total - 1.0).abs() > EPS_NORM {
        return Err(Error::InversionFailure {
            normalization: total,
            tolerance: EPS_NORM,
            w_end: inv.w_end(),
            tail_estimate: inv.tail_estimate(),
            fit_residual: inv.fit_residual(),
        });
    }
    Ok(pdf)
}

/// Grid-sampled PDF of one interferer: p K0-kernel plus a (1-p) atom.
pub fn pdf_single_cci(e: f64, p: f64, grid: &GridSpec) -> Result<NumericPdf> {
    if !(e > 0.0) {
        return Err(Error::invalid("pdf_single_cci requires E > 0"));
    }
    CciDensity::interference(&[e], &[p], grid.x_max())?.to_numeric_pdf(grid)
}

/// Grid-sampled closed form for m equal-power full-loading interferers.
pub fn pdf_equal_power(m: usize, e1: f64, grid: &GridSpec) -> Result<NumericPdf> {
    // validate m and e1 through the density function
    equal_power_density(m, e1, 1.0)?;
    let h = grid.half_points;
    let dx = grid.dx;
    let mut values = vec![0.0; grid.len()];
    for i in 0..=h {
        let x = if i == 0 && m == 1 { dx / 2.0 } else { dx * i as f64 };
        let v = equal_power_density(m, e1, x)?;
        values[h + i] = v;
        values[h - i] = v;
    }
    let zero_cell_mass = if m == 1 {
        Some(2.0 * k0_cell_mass(e1, dx))
    } else {
        None
    };
    Ok(NumericPdf {
        grid: *grid,
        values,
        atom_mass: 0.0,
        zero_cell_mass,
    })
}

/// Grid-sampled closed form for six interferers with paired powers.
pub fn pdf_three_pair(e: [f64; 3], grid: &GridSpec) -> Result<NumericPdf> {
    let h = grid.half_points;
    let mut values = vec![0.0; grid.len()];
    for i in 0..=h {
        let v = three_pair_density(e, grid.dx * i as f64)?;
        values[h + i] = v;
        values[h - i] = v;
    }
    Ok(NumericPdf {
        grid: *grid,
        values,
        atom_mass: 0.0,
        zero_cell_mass: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn equal_power_values() {
        // f2(0) = 1/2 for E1 = 1
        assert_relative_eq!(equal_power_density(2, 1.0, 0.0).unwrap(), 0.5, epsilon = 1e-14);
        // f4(0) = 3/16 for E1 = 1
        assert_relative_eq!(equal_power_density(6, 1.0, 0.0).unwrap(), 0.1875, epsilon = 1e-14);
        // f3 at E1 = 4, x = 2: e^-1 / 4
        assert_relative_eq!(
            equal_power_density(4, 4.0, 2.0).unwrap(),
            (-1.0_f64).exp() * 0.25,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            equal_power_density(4, 4.0, 2.0).unwrap(),
            0.091970,
            max_relative = 1e-4
        );
        // m = 1 is the K0 kernel: f(1) = K0(1)/pi
        assert_relative_eq!(
            equal_power_density(1, 1.0, 1.0).unwrap(),
            0.421024438240708333 / std::f64::consts::PI,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            equal_power_density(1, 1.0, 1.0).unwrap(),
            0.134011,
            max_relative = 1e-4
        );
        assert!(equal_power_density(3, 1.0, 0.0).is_err());
        assert!(equal_power_density(5, 1.0, 0.0).is_err());
        assert!(equal_power_density(2, -1.0, 0.0).is_err());
    }

    #[test]
    fn three_pair_coefficient_identities() {
        let a = three_pair_coefficients([4.0, 2.0, 1.0]);
        assert_relative_eq!(a[0], 8.0 / 3.0, max_relative = 1e-14);
        assert_relative_eq!(a[1], -2.0, max_relative = 1e-14);
        assert_relative_eq!(a[2], 1.0 / 3.0, max_relative = 1e-14);
        assert_relative_eq!(a.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn three_pair_laplace_limit() {
        // E2, E3 -> 0 reduces to the two-CCI Laplace form
        let e = [1.0, 1e-12, 2e-12];
        for &x in &[0.0, 0.5, 1.0, 3.0] {
            let v = three_pair_density(e, x).unwrap();
            assert_relative_eq!(v, laplace_density(1.0, x), max_relative = 1e-5, epsilon = 1e-7);
        }
    }

    #[test]
    fn three_pair_equal_limit() {
        // E2 -> E1, E3 -> E1 reduces to the six-CCI equal-power form, and the
        // exact partial fractions agree with the merged fallback to 1e-6 at
        // relative gap 1e-4
        let eps = 1e-4;
        let e = [1.0, 1.0 + eps, 1.0 + 2.0 * eps];
        assert_eq!(three_pair_form(e), ThreePairForm::Distinct);
        let mean = (e[0] + e[1] + e[2]) / 3.0;
        let mut sup = 0.0_f64;
        for i in 0..=200 {
            let x = 10.0 * i as f64 / 200.0;
            let exact = three_pair_density(e, x).unwrap();
            let merged = equal_power_density(6, mean, x).unwrap();
            sup = sup.max((exact - merged).abs());
        }
        assert!(sup < 1e-6, "sup deviation {sup} exceeds 1e-6");
    }

    #[test]
    fn three_pair_merged_dispatch() {
        assert_eq!(
            three_pair_form([1.0, 1.0 + 1e-9, 2.0]),
            ThreePairForm::MergedPair
        );
        assert_eq!(
            three_pair_form([1.0, 1.0 + 1e-9, 1.0 - 1e-9]),
            ThreePairForm::MergedAll
        );
        // merged-pair branch stays finite and close to the nearby distinct form
        let near = three_pair_density([1.0, 1.0 + 1e-9, 2.0], 0.7).unwrap();
        let distinct = three_pair_density([1.0, 1.0 + 1e-3, 2.0], 0.7).unwrap();
        assert_relative_eq!(near, distinct, max_relative = 1e-2);
        assert!(near.is_finite());
    }

    #[test]
    fn interference_pipeline_matches_closed_forms() {
        // full loading, equal powers: numeric remainder path vs closed forms
        for &m in &[2usize, 4, 6] {
            let powers = vec![1.0; m];
            let loadings = vec![1.0; m];
            let dens = CciDensity::interference(&powers, &loadings, 10.0).unwrap();
            assert!(!dens.has_singular_center());
            assert_relative_eq!(dens.atom_mass(), 0.0, epsilon = 1e-15);
            for &x in &[0.0, 0.3, 1.0, 2.5, 7.0] {
                let closed = equal_power_density(m, 1.0, x).unwrap();
                assert_relative_eq!(dens.continuous_at(x), closed, epsilon = 2e-6);
            }
        }
    }

    #[test]
    fn interference_pipeline_single_is_closed_form() {
        // M = 1 full loading: everything is extracted analytically
        let dens = CciDensity::interference(&[1.0], &[1.0], 10.0).unwrap();
        assert!(dens.has_singular_center());
        for &x in &[0.1, 1.0, 4.0] {
            assert_relative_eq!(
                dens.continuous_at(x),
                k0_density(1.0, x),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn single_cci_pdf_structure() {
        let grid = GridSpec::from_sigma(1.0).unwrap();
        let pdf = pdf_single_cci(1.0, 0.5, &grid).unwrap();
        assert_relative_eq!(pdf.atom_mass, 0.5, epsilon = 1e-15);
        // continuous part is halved relative to full loading
        let full = pdf_single_cci(1.0, 1.0, &GridSpec::from_sigma(1.0).unwrap()).unwrap();
        let i = grid.half_points + 100;
        assert_relative_eq!(pdf.values[i], 0.5 * full.values[grid.half_points + 100], max_relative = 1e-10);
        // mixed law normalizes despite the log singularity
        assert_relative_eq!(pdf.total_mass(), 1.0, epsilon = 1e-3);
        assert_relative_eq!(full.total_mass(), 1.0, epsilon = 1e-3);
    }

    #[test]
    fn mixed_loading_pdf_normalizes_and_matches_variance() {
        let powers = [0.8, 0.35, 0.1, 0.05];
        let loadings = [0.5, 0.5, 0.5, 0.5];
        let var: f64 = powers.iter().zip(&loadings).map(|(&e, &p)| e * p).sum();
        let grid = GridSpec::from_sigma(var.sqrt()).unwrap();
        let dens = CciDensity::interference(&powers, &loadings, grid.x_max()).unwrap();
        let pdf = dens.to_numeric_pdf(&grid).unwrap();
        assert_relative_eq!(pdf.atom_mass, 0.5_f64.powi(4), epsilon = 1e-15);
        assert_relative_eq!(pdf.total_mass(), 1.0, epsilon = 1e-3);
        assert_relative_eq!(pdf.variance(), var, max_relative = 5e-3);
        // symmetry is exact by construction
        for i in 0..grid.len() {
            assert_eq!(pdf.values[i], pdf.values[grid.len() - 1 - i]);
        }
    }

    #[test]
    fn signal_density_is_bounded_and_normalized() {
        let powers = [0.4, 0.2];
        let loadings = [0.5, 0.5];
        let grid = GridSpec::from_sigma((0.3_f64 + 1e-3).sqrt()).unwrap();
        let dens = CciDensity::signal(&powers, &loadings, 1e-3, grid.x_max()).unwrap();
        let pdf = dens.to_numeric_pdf(&grid).unwrap();
        assert!(pdf.values.iter().all(|v| v.is_finite()));
        assert_relative_eq!(pdf.total_mass(), 1.0, epsilon = 1e-3);
        assert_relative_eq!(pdf.variance(), 0.301, max_relative = 5e-3);
        assert_eq!(pdf.atom_mass, 0.0);
    }

    #[test]
    fn invert_cf_gaussian_example() {
        struct Gauss;
        impl CharFn for Gauss {
            fn eval(&self, w: f64) -> f64 {
                (-0.5 * w * w).exp()
            }
        }
        let grid = GridSpec::from_sigma(1.0).unwrap();
        let opts = InvertOptions::new(CfDecay::GaussianFactor { variance: 1.0 }, 1.0, grid.x_max());
        let pdf = invert_cf(&Gauss, &grid, &opts).unwrap();
        assert_relative_eq!(
            pdf.values[grid.half_points],
            0.3989422804014327,
            epsilon = 1e-8
        );
    }

    #[test]
    fn csv_has_metadata_and_rows() {
        let grid = GridSpec::new(0.5, 2).unwrap();
        let pdf = pdf_equal_power(2, 1.0, &grid).unwrap();
        let csv = pdf.to_csv();
        let mut lines = csv.lines();
        assert!(lines.next().unwrap().starts_with("# atom_mass=0 dx=0.5"));
        assert_eq!(lines.next().unwrap(), "x,density");
        assert_eq!(csv.lines().count(), 2 + grid.len());
    }
}
