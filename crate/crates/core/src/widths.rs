//! Width asymptotics, Gluskin's Gelfand estimates for `ℓ_p^m → ℓ_2^m`, and
//! log-log rate fitting for empirical sweeps.

use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nterm::{dyadic_level, extremal_lower_sequence, nterm_lower_offset, partial_sum_approx, sigma_n_exact, ExtremalKind};
use crate::parallel::Execution;
use crate::sequence::{besov_seq_norm, cube_structure, WeightedSequence};
use crate::space::{embedding_threshold, SpaceParams};

/// Default slope tolerance for empirical-vs-theory comparisons.
pub const DEFAULT_SLOPE_TOL: f64 = 0.15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WidthKind {
    Linear,
    NTerm,
    Manifold,
    Gelfand,
    Bernstein,
}

impl WidthKind {
    pub const ALL: [WidthKind; 5] =
        [WidthKind::Linear, WidthKind::NTerm, WidthKind::Manifold, WidthKind::Gelfand, WidthKind::Bernstein];

    pub fn name(self) -> &'static str {
        match self {
            WidthKind::Linear => "Linear",
            WidthKind::NTerm => "NTerm",
            WidthKind::Manifold => "Manifold",
            WidthKind::Gelfand => "Gelfand",
            WidthKind::Bernstein => "Bernstein",
        }
    }
}

impl fmt::Display for WidthKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for WidthKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "linear" => Ok(WidthKind::Linear),
            "nterm" | "n-term" | "nonlinear" => Ok(WidthKind::NTerm),
            "manifold" | "continuous" => Ok(WidthKind::Manifold),
            "gelfand" => Ok(WidthKind::Gelfand),
            "bernstein" => Ok(WidthKind::Bernstein),
            other => Err(Error::InvalidParameter(format!("unknown width kind '{other}'"))),
        }
    }
}

/// Decay exponent `α` with width `≍ n^α`, or an interval when only two-sided
/// bounds with different rates are known.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TheoryExponent {
    Point(f64),
    Interval { lower: f64, upper: f64 },
}

impl TheoryExponent {
    pub fn contains(&self, x: f64, tol: f64) -> bool {
        match *self {
            TheoryExponent::Point(a) => (x - a).abs() <= tol,
            TheoryExponent::Interval { lower, upper } => x >= lower - tol && x <= upper + tol,
        }
    }

    pub fn point(&self) -> Option<f64> {
        match *self {
            TheoryExponent::Point(a) => Some(a),
            TheoryExponent::Interval { .. } => None,
        }
    }
}

impl fmt::Display for TheoryExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TheoryExponent::Point(a) => write!(f, "{a}"),
            TheoryExponent::Interval { lower, upper } => write!(f, "{lower}..{upper}"),
        }
    }
}

fn require_hilbert(kind: WidthKind, target: &SpaceParams) -> Result<()> {
    if target.is_hilbert() {
        Ok(())
    } else {
        Err(Error::UncoveredRegime(format!("{kind} widths are only covered for a b^s_(2,2) target")))
    }
}

/// Width exponent for the identity `b^{s+t}_{p0,q0} → b^s_{p1,q1}`.
///
/// Linear and Gelfand need a Hilbert target `p1 = q1 = 2`. Regimes without an
/// established result return [`Error::UncoveredRegime`].
pub fn width_exponent(kind: WidthKind, source: &SpaceParams, target: &SpaceParams) -> Result<TheoryExponent> {
    target.check_dim(source.d)?;
    let d = source.d as f64;
    let t = source.s - target.s;
    let base = -t / d;
    let compact = t > embedding_threshold(source, target);
    let uncovered = |why: String| Err(Error::UncoveredRegime(format!("{kind}: {why}")));
    match kind {
        WidthKind::NTerm | WidthKind::Manifold => {
            if !compact {
                return uncovered(format!("needs t > d(1/p0 - 1/p1)_+, got t = {t}"));
            }
            Ok(TheoryExponent::Point(base))
        }
        WidthKind::Bernstein => {
            if !compact {
                return uncovered(format!("needs t > d(1/p0 - 1/p1)_+, got t = {t}"));
            }
            if source.p.le(target.p) {
                Ok(TheoryExponent::Point(base))
            } else {
                Ok(TheoryExponent::Point(base + source.p.recip() - target.p.recip()))
            }
        }
        WidthKind::Linear => {
            require_hilbert(kind, target)?;
            if !compact {
                return uncovered(format!("needs t > d(1/p - 1/2)_+, got t = {t}"));
            }
            if source.p.value() >= 2.0 {
                Ok(TheoryExponent::Point(base))
            } else {
                Ok(TheoryExponent::Point(base + source.p.recip() - 0.5))
            }
        }
        WidthKind::Gelfand => {
            require_hilbert(kind, target)?;
            let p = source.p.value();
            if p >= 2.0 {
                // p = 2 is squeezed between the Bernstein lower and linear upper bounds
                if t > 0.0 {
                    Ok(TheoryExponent::Point(base))
                } else {
                    uncovered(format!("p >= 2 needs t > 0, got t = {t}"))
                }
            } else if p >= 1.0 {
                if t > d / 2.0 {
                    Ok(TheoryExponent::Point(base))
                } else {
                    uncovered(format!("1 <= p < 2 needs t > d/2 = {}, got t = {t}", d / 2.0))
                }
            } else {
                let need = d * (1.0 / p - 0.5);
                if t > need {
                    Ok(TheoryExponent::Interval { lower: base, upper: base - 1.0 + 1.0 / p })
                } else {
                    uncovered(format!("0 < p < 1 needs t > d(1/p - 1/2) = {need}, got t = {t}"))
                }
            }
        }
    }
}

/// Value of Gluskin's asymptotic formula for `d^n(I: ℓ_p^m → ℓ_2^m)` with the
/// hidden constant set to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GluskinEstimate {
    pub value: f64,
    /// Only an upper estimate is known (`0 < p < 1`).
    pub upper_only: bool,
}

pub fn gluskin_gelfand(m: u64, n: u64, p: f64) -> Result<GluskinEstimate> {
    if n < 1 || n > m {
        return Err(Error::InvalidParameter(format!("need 1 <= n <= m, got n={n}, m={m}")));
    }
    if !(p > 0.0) {
        return Err(Error::InvalidParameter(format!("need p > 0, got {p}")));
    }
    let (mf, nf) = (m as f64, n as f64);
    let inv_p = if p.is_infinite() { 0.0 } else { 1.0 / p };
    if p >= 2.0 {
        Ok(GluskinEstimate { value: (mf - nf + 1.0).powf(0.5 - inv_p), upper_only: false })
    } else if p >= 1.0 {
        let inv_pp = 1.0 - inv_p;
        let value = if nf <= mf.powf(2.0 * inv_pp) { 1.0 } else { mf.powf(inv_pp) / nf.sqrt() };
        Ok(GluskinEstimate { value, upper_only: false })
    } else {
        Ok(GluskinEstimate { value: 1.0 / nf.sqrt(), upper_only: true })
    }
}

/// `(n, error)` samples with a least-squares log-log slope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub kind: String,
    pub samples: Vec<(usize, f64)>,
    pub fitted_exponent: f64,
    pub theory_exponent: Option<TheoryExponent>,
    /// RMS deviation of `ln error` from the fitted line.
    pub residual: f64,
    pub tolerance: f64,
    pub pass: Option<bool>,
}

impl RateReport {
    pub fn with_theory(mut self, theory: TheoryExponent, tolerance: f64) -> Self {
        self.pass = Some(theory.contains(self.fitted_exponent, tolerance));
        self.theory_exponent = Some(theory);
        self.tolerance = tolerance;
        self
    }

    pub fn labeled(mut self, kind: impl Into<String>) -> Self {
        self.kind = kind.into();
        self
    }
}

/// Fits `ln error = c + α ln n` by least squares.
pub fn fit_rate(samples: &[(usize, f64)]) -> Result<RateReport> {
    if samples.len() < 3 {
        return Err(Error::Degenerate(format!("need at least 3 samples, got {}", samples.len())));
    }
    if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::Degenerate("sample sizes n must be strictly increasing".into()));
    }
    if let Some(bad) = samples.iter().find(|s| !(s.1 > 0.0) || !s.1.is_finite()) {
        return Err(Error::Degenerate(format!("errors must be positive and finite, got {} at n={}", bad.1, bad.0)));
    }
    let xs: Vec<f64> = samples.iter().map(|s| (s.0 as f64).ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.1.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    Ok(RateReport {
        kind: String::new(),
        samples: samples.to_vec(),
        fitted_exponent: slope,
        theory_exponent: None,
        residual: (rss / k).sqrt(),
        tolerance: DEFAULT_SLOPE_TOL,
        pass: None,
    })
}

/// Sequences used to estimate worst-case errors over the source unit ball.
#[derive(Debug, Clone, PartialEq)]
pub enum WidthFamily {
    /// Each estimator runs on its own lower-bound certificate: flat
    /// `NTermLower` for n-term, diagonal `LinearLower` for the linear method.
    Extremal,
    /// Worst ratio `error / ‖a‖_source` over the given sequences.
    Samples(Vec<WeightedSequence>),
}

fn normalized_error(err: f64, a: &WeightedSequence, source: &SpaceParams) -> Result<f64> {
    let norm = besov_seq_norm(a, source)?;
    if norm == 0.0 {
        Ok(0.0)
    } else {
        Ok(err / norm)
    }
}

fn empirical_error(
    kind: WidthKind,
    n: usize,
    source: &SpaceParams,
    target: &SpaceParams,
    family: &WidthFamily,
    structure_top: i32,
) -> Result<f64> {
    let run = |a: &WeightedSequence| -> Result<f64> {
        let err = match kind {
            WidthKind::NTerm => sigma_n_exact(a, n, target)?.error,
            WidthKind::Linear => partial_sum_approx(a, n, target)?.error,
            _ => unreachable!("no empirical estimator"),
        };
        normalized_error(err, a, source)
    };
    match family {
        WidthFamily::Extremal => {
            let structure = cube_structure(source.d, structure_top)?;
            let big_n = dyadic_level(n, source.d);
            let ek = if kind == WidthKind::NTerm { ExtremalKind::NTermLower } else { ExtremalKind::LinearLower };
            run(&extremal_lower_sequence(ek, big_n, source, &structure)?)
        }
        WidthFamily::Samples(seqs) => {
            let mut worst = 0.0f64;
            for a in seqs {
                worst = worst.max(run(a)?);
            }
            Ok(worst)
        }
    }
}

/// One report per width with an empirical estimator (Linear via partial
/// sums, NTerm via exact best n-term), each compared with its theory exponent.
pub fn widths_table(
    source: &SpaceParams,
    target: &SpaceParams,
    n_list: &[usize],
    family: &WidthFamily,
    tolerance: f64,
    exec: Execution,
) -> Result<Vec<RateReport>> {
    if n_list.is_empty() {
        return Err(Error::InvalidParameter("n_list is empty".into()));
    }
    if n_list.contains(&0) {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    target.check_dim(source.d)?;
    if !target.is_hilbert() {
        return Err(Error::InvalidParameter("widths_table needs a b^s_(2,2) target".into()));
    }
    let kinds = [WidthKind::NTerm, WidthKind::Linear];
    let theories: Vec<TheoryExponent> =
        kinds.iter().map(|k| width_exponent(*k, source, target)).collect::<Result<_>>()?;
    let max_n = *n_list.iter().max().expect("non-empty");
    let structure_top = if let WidthFamily::Extremal = family {
        let probe = cube_structure(source.d, 0)?;
        dyadic_level(max_n, source.d) + nterm_lower_offset(&probe).max(1)
    } else {
        0
    };

    let jobs: Vec<(usize, usize)> = (0..kinds.len()).flat_map(|k| n_list.iter().map(move |&n| (k, n))).collect();
    let errors: Vec<Result<f64>> =
        exec.map(&jobs, |&(k, n)| empirical_error(kinds[k], n, source, target, family, structure_top));

    let mut reports = Vec::new();
    for (k, kind) in kinds.iter().enumerate() {
        let samples: Vec<(usize, f64)> = jobs
            .iter()
            .zip(&errors)
            .filter(|(job, _)| job.0 == k)
            .map(|(job, e)| e.clone().map(|e| (job.1, e)))
            .collect::<Result<_>>()?;
        let report = fit_rate(&samples)?.labeled(kind.name()).with_theory(theories[k], tolerance);
        reports.push(report);
    }
    Ok(reports)
}

fn format_theory(t: &Option<TheoryExponent>) -> String {
    t.map(|t| t.to_string()).unwrap_or_default()
}

fn format_pass(p: Option<bool>) -> &'static str {
    match p {
        Some(true) => "true",
        Some(false) => "false",
        None => "",
    }
}

/// CSV with columns `kind,n,error,fitted_exponent,theory_exponent,pass`, one
/// row per sample. With `function`, a leading `function` column is added.
pub fn reports_csv(reports: &[RateReport], function: Option<&str>) -> String {
    let mut out = String::new();
    if function.is_some() {
        out.push_str("function,");
    }
    out.push_str("kind,n,error,fitted_exponent,theory_exponent,pass\n");
    for r in reports {
        for (n, e) in &r.samples {
            if let Some(f) = function {
                let _ = write!(out, "{f},");
            }
            let _ = writeln!(
                out,
                "{},{},{:e},{},{},{}",
                r.kind,
                n,
                e,
                r.fitted_exponent,
                format_theory(&r.theory_exponent),
                format_pass(r.pass)
            );
        }
    }
    out
}

#[derive(Serialize)]
struct ReportSummary<'a> {
    kind: &'a str,
    n: Vec<usize>,
    error: Vec<f64>,
    fitted_exponent: f64,
    theory_exponent: Option<TheoryExponent>,
    residual: f64,
    tolerance: f64,
    pass: Option<bool>,
}

/// JSON summary objects with the CSV fields (arrays for `n` and `error`).
pub fn reports_json(reports: &[RateReport]) -> serde_json::Value {
    let items: Vec<ReportSummary<'_>> = reports
        .iter()
        .map(|r| ReportSummary {
            kind: &r.kind,
            n: r.samples.iter().map(|s| s.0).collect(),
            error: r.samples.iter().map(|s| s.1).collect(),
            fitted_exponent: r.fitted_exponent,
            theory_exponent: r.theory_exponent,
            residual: r.residual,
            tolerance: r.tolerance,
            pass: r.pass,
        })
        .collect();
    serde_json::to_value(items).expect("serializable")
}
