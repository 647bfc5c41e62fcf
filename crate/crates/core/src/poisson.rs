//! Corner singularities of the Laplacian and radial cusps sampled on dyadic
//! grids, plus the linear-vs-nonlinear rate benchmark in the `s = 1`
//! (`H^1`-equivalent) coefficient norm.
//!
//! Both generators are centered at the cube center `x0 = (1/2, ..., 1/2)` and
//! vanish beyond their cutoff radius, so the periodized transform never sees
//! the cube boundary. For corners, the sector `0 ≤ θ ≤ ω` is measured
//! counter-clockwise from the positive `x` axis through `x0`, and the function
//! is extended by zero outside it.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::nterm::{partial_sum_approx, sigma_n_curve};
use crate::parallel::Execution;
use crate::space::SpaceParams;
use crate::wavelet::{analyze_with, GridFunction, WaveletFamily};
use crate::widths::{fit_rate, RateReport, TheoryExponent, DEFAULT_SLOPE_TOL};

pub const DEFAULT_CUTOFF_RADIUS: f64 = 0.25;
pub const DEFAULT_GRID_LEVEL: u32 = 10;
const INTEGER_TOL: f64 = 1e-12;

/// `C^∞` step: 1 on `[0, R/2]`, 0 on `[R, ∞)`, built from `exp(-1/x)`.
pub fn smooth_cutoff(r: f64, radius: f64) -> f64 {
    let half = radius / 2.0;
    if r <= half {
        return 1.0;
    }
    if r >= radius {
        return 0.0;
    }
    let u = (r - half) / half;
    let e = |x: f64| if x > 0.0 { (-1.0 / x).exp() } else { 0.0 };
    let (a, b) = (e(1.0 - u), e(u));
    a / (a + b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CornerSingularity {
    pub omega: f64,
    pub m: u32,
    pub lambda: f64,
    pub log_variant: bool,
    pub cutoff_radius: f64,
}

impl CornerSingularity {
    /// `λ = mπ/ω`; the logarithmic form is used when `λ` is an integer.
    pub fn new(omega: f64, m: u32, cutoff_radius: f64) -> Result<Self> {
        if !(omega > 0.0 && omega <= 2.0 * PI + INTEGER_TOL) {
            return Err(Error::InvalidParameter(format!("corner angle must lie in (0, 2π], got {omega}")));
        }
        if m == 0 {
            return Err(Error::InvalidParameter("m must be >= 1".into()));
        }
        if !(cutoff_radius > 0.0 && cutoff_radius <= 0.5) {
            return Err(Error::InvalidParameter(format!("cutoff radius must lie in (0, 1/2], got {cutoff_radius}")));
        }
        let lambda = m as f64 * PI / omega;
        let log_variant = (lambda - lambda.round()).abs() <= INTEGER_TOL;
        Ok(Self { omega, m, lambda, log_variant, cutoff_radius })
    }

    /// The L-shaped reentrant corner `ω = 3π/2`, `m = 1`.
    pub fn l_shape() -> Self {
        Self::new(1.5 * PI, 1, DEFAULT_CUTOFF_RADIUS).expect("valid")
    }

    /// Value at polar coordinates around the corner, `θ ∈ [0, 2π)`.
    pub fn value_polar(&self, r: f64, theta: f64) -> f64 {
        if r <= 0.0 || r >= self.cutoff_radius || theta < 0.0 || theta > self.omega {
            return 0.0;
        }
        let arg = self.lambda * theta;
        let radial = smooth_cutoff(r, self.cutoff_radius) * r.powf(self.lambda);
        if self.log_variant {
            radial * (r.ln() * arg.sin() + theta * arg.cos())
        } else {
            radial * arg.sin()
        }
    }

    pub fn value_at(&self, x: f64, y: f64) -> f64 {
        let (dx, dy) = (x - 0.5, y - 0.5);
        let theta = dy.atan2(dx).rem_euclid(2.0 * PI);
        self.value_polar(dx.hypot(dy), theta)
    }
}

pub fn eval_corner_singularity(cs: &CornerSingularity, level: u32, exec: Execution) -> Result<GridFunction> {
    if level < 3 {
        return Err(Error::InvalidParameter(format!("corner grids need L >= 3, got L={level}")));
    }
    GridFunction::from_fn(2, level, exec, |x| cs.value_at(x[0], x[1]))
}

/// `|x - x0|^α |log|x - x0||^β ρ(|x - x0|)` with the bump
/// `ρ(r) = exp(1 - 1/(1 - (r/R)²))`, `ρ(0) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialCusp {
    pub alpha: f64,
    pub beta: f64,
    pub radius: f64,
}

impl RadialCusp {
    pub fn new(alpha: f64, beta: f64, radius: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("alpha must be > 0, got {alpha}")));
        }
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(Error::InvalidParameter(format!("beta must be >= 0, got {beta}")));
        }
        if !(radius > 0.0 && radius <= 0.5) {
            return Err(Error::InvalidParameter(format!("bump radius must lie in (0, 1/2], got {radius}")));
        }
        Ok(Self { alpha, beta, radius })
    }

    pub fn bump(&self, r: f64) -> f64 {
        let u = r / self.radius;
        if u >= 1.0 {
            0.0
        } else {
            (1.0 - 1.0 / (1.0 - u * u)).exp()
        }
    }

    pub fn value_radial(&self, r: f64) -> f64 {
        if r <= 0.0 || r >= self.radius {
            return 0.0;
        }
        let log_factor = if self.beta == 0.0 { 1.0 } else { r.ln().abs().powf(self.beta) };
        r.powf(self.alpha) * log_factor * self.bump(r)
    }

    pub fn value_at(&self, x: &[f64]) -> f64 {
        let r = x.iter().map(|v| (v - 0.5) * (v - 0.5)).sum::<f64>().sqrt();
        self.value_radial(r)
    }
}

pub fn eval_radial_cusp(rc: &RadialCusp, d: u32, level: u32, exec: Execution) -> Result<GridFunction> {
    if d != 1 && d != 2 {
        return Err(Error::InvalidParameter(format!("cusps are sampled for d = 1, 2 only, got d={d}")));
    }
    GridFunction::from_fn(d, level, exec, |x| rc.value_at(x))
}

/// Nonlinear and linear sweeps on the same coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularityBenchmark {
    pub nonlinear: RateReport,
    pub linear: RateReport,
    /// `linear slope − nonlinear slope`; positive when adaptivity pays off.
    pub gap: f64,
}

/// Runs both methods on `analyze(f)` in the `b^1_{2,2}` norm.
///
/// For each requested `n` the linear method keeps all levels `j ≤ ⌊log2(n)/d⌋`;
/// its actual term count `m` is what both methods are charged, so each
/// sample compares best `m`-term against the `m`-term level truncation.
/// Requests that map to the same `m` are merged.
pub fn benchmark_singularity_rates(
    f: &GridFunction,
    family: &WaveletFamily,
    t_nominal: f64,
    n_list: &[usize],
    exec: Execution,
) -> Result<SingularityBenchmark> {
    if n_list.len() < 3 {
        return Err(Error::Degenerate(format!("rate fit needs at least 3 sizes, got {}", n_list.len())));
    }
    if n_list.contains(&0) {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    let a = analyze_with(f, family, exec)?;
    let target = SpaceParams::hilbert(1.0, f.d());
    let linear_runs = exec.map(n_list, |&n| partial_sum_approx(&a, n, &target).map(|r| (r.term_count, r.error)));
    let mut linear: Vec<(usize, f64)> = linear_runs.into_iter().collect::<Result<_>>()?;
    linear.sort_by_key(|s| s.0);
    linear.dedup_by_key(|s| s.0);
    let counts: Vec<usize> = linear.iter().map(|s| s.0).collect();
    let nonlinear_err = sigma_n_curve(&a, &target, &counts)?;
    let nonlinear: Vec<(usize, f64)> = counts.iter().copied().zip(nonlinear_err).collect();

    let nonlinear_report = fit_rate(&nonlinear)?
        .labeled("NTerm")
        .with_theory(TheoryExponent::Point(-t_nominal / f.d() as f64), DEFAULT_SLOPE_TOL);
    let linear_report = fit_rate(&linear)?.labeled("Linear");
    let gap = linear_report.fitted_exponent - nonlinear_report.fitted_exponent;
    Ok(SingularityBenchmark { nonlinear: nonlinear_report, linear: linear_report, gap })
}

/// Generator parameters written next to benchmark CSVs.
#[derive(Debug, Clone, Serialize)]
pub struct BenchmarkSidecar {
    pub function: String,
    pub corner: Option<CornerSingularity>,
    pub cusp: Option<RadialCusp>,
    pub grid_level: u32,
    pub family: String,
    pub t_nominal: f64,
    pub n: Vec<usize>,
    pub gap: f64,
}
