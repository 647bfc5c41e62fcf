//! Approximation operators on weighted sequences.
//!
//! * [`sigma_n_exact`]: best n-term approximation in a Hilbert-weighted target,
//!   exact by keeping the largest weighted magnitudes.
//! * [`sigma_n_bruteforce`]: exhaustive subset search for any target, used as
//!   an oracle.
//! * [`plan_thresholds`] / [`nterm_continuous`]: level-dependent soft selection
//!   whose coefficients depend continuously on the input.
//! * [`partial_sum_approx`]: the linear method, truncation after level `N`.
//! * [`extremal_lower_sequence`]: explicit lower-bound certificates.
//!
//! All sorts order by weighted magnitude descending, then by [`Index`]
//! ascending.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sequence::{
    besov_seq_norm, format_coefficient, norm_of_sorted, parse_sequence_lines, weight_level, Index,
    LevelStructure, WeightedSequence, J_MIN,
};
use crate::space::{embedding_threshold, Exponent, SpaceParams};
use crate::sum::CompensatedSum;

/// Largest support accepted by [`sigma_n_bruteforce`].
pub const BRUTEFORCE_LIMIT: usize = 20;

/// An approximant together with its error in the stated target norm.
///
/// For the nonlinear operators `retained` is exactly the set of nonzero
/// coefficients of `approximant`. For [`partial_sum_approx`] it is the whole
/// index window `j ≤ N` (the rank of the linear method), whether or not the
/// input has entries there.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproxResult {
    pub retained: Vec<Index>,
    pub approximant: WeightedSequence,
    pub error: f64,
    pub term_count: usize,
}

impl ApproxResult {
    fn from_approximant(approximant: WeightedSequence, error: f64) -> Self {
        let approximant = approximant.pruned();
        let retained: Vec<Index> = approximant.entries().iter().map(|e| e.0).collect();
        let term_count = retained.len();
        Self { retained, approximant, error, term_count }
    }

    /// Sequence text format plus a trailer `#error <value> #terms <count>`.
    pub fn to_text(&self) -> String {
        let mut out = self.approximant.to_text();
        let _ = writeln!(out, "#error {} #terms {}", format_coefficient(self.error), self.term_count);
        out
    }

    /// Parses [`ApproxResult::to_text`] output. The retained set is recovered
    /// as the nonzero support.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut trailer: Option<(f64, usize)> = None;
        let mut cb = |line_no: usize, line: &str| -> Result<bool> {
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() == 4 && toks[0] == "#error" && toks[2] == "#terms" {
                let err = toks[1].parse::<f64>();
                let terms = toks[3].parse::<usize>();
                match (err, terms) {
                    (Ok(e), Ok(t)) => {
                        trailer = Some((e, t));
                        Ok(true)
                    }
                    _ => Err(Error::Parse { line: line_no, message: "bad #error/#terms trailer".into() }),
                }
            } else {
                Ok(false)
            }
        };
        let seq = parse_sequence_lines(text.lines().enumerate().map(|(i, l)| (i + 1, l)), Some(&mut cb))?;
        let (error, term_count) =
            trailer.ok_or(Error::Parse { line: text.lines().count().max(1), message: "missing #error trailer".into() })?;
        let approximant = seq.pruned();
        let retained = approximant.entries().iter().map(|e| e.0).collect();
        Ok(Self { retained, approximant, error, term_count })
    }
}

/// Nonzero entries ranked by `2^{j·e}|a_{j,λ}|` descending, ties by index.
/// Returns `(key, position in a.entries())`.
fn rank_by_weight(a: &WeightedSequence, level_exponent: f64) -> Vec<(f64, usize)> {
    let mut ranked: Vec<(f64, usize)> = a
        .entries()
        .iter()
        .enumerate()
        .filter(|(_, e)| e.1 != 0.0)
        .map(|(pos, (idx, v))| ((weight_level(idx.j) * level_exponent).exp2() * v.abs(), pos))
        .collect();
    // positions follow index order, so comparing them breaks ties by index
    ranked.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
    ranked
}

fn split_by_positions(a: &WeightedSequence, keep: &[bool]) -> (WeightedSequence, WeightedSequence) {
    let mut kept = Vec::new();
    let mut rest = Vec::new();
    for (e, &k) in a.entries().iter().zip(keep) {
        if k {
            kept.push(*e);
        } else {
            rest.push(*e);
        }
    }
    (
        WeightedSequence::from_sorted_unchecked(*a.structure(), kept),
        WeightedSequence::from_sorted_unchecked(*a.structure(), rest),
    )
}

fn require_hilbert(target: &SpaceParams) -> Result<()> {
    if target.is_hilbert() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "target must have p = q = 2, got p={}, q={}",
            target.p, target.q
        )))
    }
}

/// Best n-term approximation in `b^s_{2,2}`: keep the `n` largest
/// `2^{js}|a_{j,λ}|`. Exact, since the target is a rescaled `ℓ_2`.
pub fn sigma_n_exact(a: &WeightedSequence, n: usize, target: &SpaceParams) -> Result<ApproxResult> {
    require_hilbert(target)?;
    target.check_dim(a.d())?;
    let ranked = rank_by_weight(a, target.level_exponent());
    let mut keep = vec![false; a.len()];
    for &(_, pos) in ranked.iter().take(n) {
        keep[pos] = true;
    }
    let (kept, rest) = split_by_positions(a, &keep);
    let error = besov_seq_norm(&rest, target)?;
    Ok(ApproxResult::from_approximant(kept, error))
}

/// `σ_n(a)` in `b^s_{2,2}` for every `n` in `ns`, from one sort.
pub fn sigma_n_curve(a: &WeightedSequence, target: &SpaceParams, ns: &[usize]) -> Result<Vec<f64>> {
    require_hilbert(target)?;
    target.check_dim(a.d())?;
    let tails = hilbert_tail_squares(a, target);
    Ok(ns.iter().map(|&n| tails[n.min(tails.len() - 1)].sqrt()).collect())
}

/// `tails[n] = Σ_{k ≥ n} key_k²` over the ranked keys; `tails.len() = support + 1`.
fn hilbert_tail_squares(a: &WeightedSequence, target: &SpaceParams) -> Vec<f64> {
    let ranked = rank_by_weight(a, target.level_exponent());
    let mut tails = vec![0.0; ranked.len() + 1];
    let mut acc = CompensatedSum::new();
    for (k, (key, _)) in ranked.iter().enumerate().rev() {
        acc.add(key * key);
        tails[k] = acc.value();
    }
    tails
}

/// Exhaustive best n-term approximation for an arbitrary target norm.
///
/// On a fixed retained set the best coefficients are `a`'s own values (the
/// norm is coordinatewise monotone), so only index subsets are searched.
pub fn sigma_n_bruteforce(a: &WeightedSequence, n: usize, target: &SpaceParams) -> Result<ApproxResult> {
    target.check_dim(a.d())?;
    let support: Vec<(Index, f64)> = a.nonzero().copied().collect();
    let m = support.len();
    if m > BRUTEFORCE_LIMIT {
        return Err(Error::SupportTooLarge { size: m, limit: BRUTEFORCE_LIMIT });
    }
    let n = n.min(m);
    let mut best_mask = 0u32;
    let mut best_err = f64::INFINITY;
    for mask in 0u32..(1u32 << m) {
        if mask.count_ones() as usize > n {
            continue;
        }
        let complement = support
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) == 0)
            .map(|(_, (idx, v))| (idx.j, *v));
        let err = norm_of_sorted(complement, target);
        if err < best_err {
            best_err = err;
            best_mask = mask;
        }
    }
    let kept: Vec<(Index, f64)> = support
        .iter()
        .enumerate()
        .filter(|(i, _)| best_mask & (1 << i) != 0)
        .map(|(_, e)| *e)
        .collect();
    Ok(ApproxResult::from_approximant(
        WeightedSequence::from_sorted_unchecked(*a.structure(), kept),
        best_err,
    ))
}

/// Largest `N ≥ 0` with `2^{Nd} ≤ n` (`n ≥ 1`).
pub fn dyadic_level(n: usize, d: u32) -> i32 {
    let bits = usize::BITS - 1 - n.max(1).leading_zeros();
    (bits / d) as i32
}

/// Level-dependent thresholds of the continuous n-term scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdPlan {
    pub n: usize,
    /// Dyadic scale with `2^{Nd} ≤ n < 2^{(N+1)d}`.
    pub big_n: i32,
    pub delta: f64,
    /// `ε_j` for `N < j ≤ K`; zero at all coarser levels.
    pub epsilons: BTreeMap<i32, f64>,
    /// Tail-cut level: levels above it are dropped.
    pub k: i32,
    /// Target smoothness `s` entering the selection threshold `2^{-js}ε_j`.
    pub target_s: f64,
    pub d: u32,
    epsilon_base: f64,
    epsilon_rate: f64,
}

impl ThresholdPlan {
    /// `ε_j`: `0` for `j ≤ N`, else `n^{-1/p0} 2^{-jd(1/2-1/p0)} 2^{-jt} 2^{(j-N)δ/p0}`.
    pub fn epsilon(&self, j: i32) -> f64 {
        if j <= self.big_n {
            0.0
        } else {
            self.epsilon_base * (self.epsilon_rate * j as f64).exp2()
        }
    }

    /// Magnitude at which `g_j` starts to let coefficients through: `2^{-js}ε_j`.
    pub fn threshold(&self, j: i32) -> f64 {
        (-weight_level(j) * self.target_s).exp2() * self.epsilon(j)
    }

    /// The odd, piecewise-linear `g_j`: zero on `[0, θ]`, identity on `[2θ, ∞)`,
    /// linear in between, `θ = 2^{-js}ε_j`.
    pub fn g(&self, j: i32, x: f64) -> f64 {
        let theta = self.threshold(j);
        let ax = x.abs();
        let y = if ax <= theta {
            0.0
        } else if ax >= 2.0 * theta {
            ax
        } else {
            2.0 * (ax - theta)
        };
        y.copysign(x)
    }

    /// Term-count bound `c` (terms ≤ c·n) for inputs in the unit ball of
    /// `b^{s+t}_{p0,∞}`: `|∇_{≤min(N,K)}| + Σ_{N<j≤K} n 2^{-(j-N)δ}`, divided by `n`.
    pub fn count_bound(&self, structure: &LevelStructure) -> f64 {
        let full = structure.cumulative_cardinality(self.big_n.min(self.k)) as f64;
        let n = self.n as f64;
        let geometric: f64 = ((self.big_n + 1)..=self.k)
            .map(|j| n * (-(j - self.big_n) as f64 * self.delta).exp2())
            .sum();
        (full + geometric) / n
    }
}

fn check_pair(source: &SpaceParams, target: &SpaceParams) -> Result<f64> {
    target.check_dim(source.d)?;
    let t = source.s - target.s;
    let need = embedding_threshold(source, target);
    if t > need {
        Ok(t)
    } else {
        Err(Error::Regime(format!(
            "need t = s0 - s1 > d(1/p0 - 1/p1)_+ = {need}, got t = {t}"
        )))
    }
}

/// Thresholds for the continuous scheme; requires `p0 < p1` and
/// `t > d(1/p0 − 1/p1)`.
///
/// `K` is the smallest level with `Σ_{j>K} 2^{-ju(t - d(1/p0-1/p1))} ≤ n^{-tu/d}`,
/// `u = min(1, p1, q1)`, which bounds the tail of any element of the unit ball
/// of `b^{s+t}_{p0,∞}` by `n^{-t/d}` in the target.
pub fn plan_thresholds(n: usize, source: &SpaceParams, target: &SpaceParams) -> Result<ThresholdPlan> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    let t = check_pair(source, target)?;
    if !source.p.lt(target.p) {
        return Err(Error::Regime(format!(
            "threshold plan needs p0 < p1, got p0={}, p1={}",
            source.p, target.p
        )));
    }
    let d = source.d as f64;
    let gap = source.p.recip() - target.p.recip();
    let rate = t - d * gap;
    let delta = rate / (2.0 * gap);
    let big_n = dyadic_level(n, source.d);
    let inv_p0 = source.p.recip();

    let u = target.p.min_with(1.0).min(target.q.value());
    let x = (-u * rate).exp2();
    let bound = (n as f64).powf(-t * u / d);
    let tail = |k: i32| x.powi(k + 1) / (1.0 - x);
    let mut k = ((bound * (1.0 - x)).ln() / x.ln() - 1.0).ceil().max(0.0) as i32;
    while k > 0 && tail(k - 1) <= bound {
        k -= 1;
    }
    while tail(k) > bound {
        k += 1;
    }

    let nf = n as f64;
    // ε_j = n^{-1/p0} 2^{-Nδ/p0} · 2^{j(-d(1/2-1/p0) - t + δ/p0)}
    let epsilon_base = nf.powf(-inv_p0) * (-(big_n as f64) * delta * inv_p0).exp2();
    let epsilon_rate = -d * (0.5 - inv_p0) - t + delta * inv_p0;
    let mut plan = ThresholdPlan {
        n,
        big_n,
        delta,
        epsilons: BTreeMap::new(),
        k,
        target_s: target.s,
        d: source.d,
        epsilon_base,
        epsilon_rate,
    };
    for j in (big_n + 1)..=k {
        let e = plan.epsilon(j);
        plan.epsilons.insert(j, e);
    }
    Ok(plan)
}

/// Continuous n-term scheme `S_n a = Σ_{j≤K} g_j(a_{j,λ}) e_{j,λ}`.
///
/// For `p0 ≥ p1` the plain partial sum is already rate-optimal and is used
/// instead.
pub fn nterm_continuous(
    a: &WeightedSequence,
    n: usize,
    source: &SpaceParams,
    target: &SpaceParams,
) -> Result<ApproxResult> {
    source.check_dim(a.d())?;
    check_pair(source, target)?;
    if !source.p.lt(target.p) {
        return partial_sum_approx(a, n, target);
    }
    let plan = plan_thresholds(n, source, target)?;
    Ok(apply_plan(a, &plan, target))
}

/// Applies a precomputed plan; error measured in `target`.
pub fn apply_plan(a: &WeightedSequence, plan: &ThresholdPlan, target: &SpaceParams) -> ApproxResult {
    let mut kept = Vec::new();
    let mut residual = Vec::with_capacity(a.len());
    for (idx, v) in a.entries() {
        let y = if idx.j > plan.k { 0.0 } else { plan.g(idx.j, *v) };
        if y != 0.0 {
            kept.push((*idx, y));
        }
        let r = v - y;
        if r != 0.0 {
            residual.push((idx.j, r));
        }
    }
    let error = norm_of_sorted(residual, target);
    ApproxResult::from_approximant(WeightedSequence::from_sorted_unchecked(*a.structure(), kept), error)
}

/// Linear method: keep every level `j ≤ N`, `N = floor(log2(n)/d)`.
pub fn partial_sum_approx(a: &WeightedSequence, n: usize, target: &SpaceParams) -> Result<ApproxResult> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    target.check_dim(a.d())?;
    let structure = *a.structure();
    let big_n = dyadic_level(n, a.d()).min(structure.j_max());
    let (kept, rest): (Vec<_>, Vec<_>) = a.entries().iter().partition(|e| e.0.j <= big_n);
    let rest = WeightedSequence::from_sorted_unchecked(structure, rest);
    let error = besov_seq_norm(&rest, target)?;
    let retained: Vec<Index> = (J_MIN..=big_n).flat_map(|j| structure.indices(j).collect::<Vec<_>>()).collect();
    let term_count = retained.len();
    let approximant = WeightedSequence::from_sorted_unchecked(structure, kept).pruned();
    Ok(ApproxResult { retained, approximant, error, term_count })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExtremalKind {
    /// Flat sequence on `∇_{N+K}` with unit source norm.
    NTermLower,
    /// Diagonal `Σ_{j=0}^{N+1} e_{j,λ_j}`.
    LinearLower,
    /// Flat level-`N` sequence with unit source norm.
    BernsteinBall,
}

/// Smallest `K ≥ 0` with `C1·2^{Kd} ≥ 2`, so that `n = 2^{Nd}` is at most half of `|∇_{N+K}|`.
pub fn nterm_lower_offset(structure: &LevelStructure) -> i32 {
    let (c1, _) = structure.cardinality_constants(0);
    let mut k = 0;
    while c1 * (k as f64 * structure.d() as f64).exp2() < 2.0 {
        k += 1;
    }
    k
}

fn flat_level(structure: &LevelStructure, level: i32, source: &SpaceParams) -> WeightedSequence {
    let count = structure.cardinality(level) as f64;
    let value = match source.p {
        Exponent::Infinite => 1.0,
        Exponent::Finite(p) => count.powf(-1.0 / p),
    } * (-weight_level(level) * source.level_exponent()).exp2();
    WeightedSequence::from_sorted_unchecked(*structure, structure.indices(level).map(|i| (i, value)).collect())
}

/// Explicit extremal sequences realizing the width lower bounds.
pub fn extremal_lower_sequence(
    kind: ExtremalKind,
    big_n: i32,
    source: &SpaceParams,
    structure: &LevelStructure,
) -> Result<WeightedSequence> {
    source.check_dim(structure.d())?;
    if big_n < 0 {
        return Err(Error::LevelOutOfRange { level: big_n, min: 0, max: structure.j_max() });
    }
    match kind {
        ExtremalKind::NTermLower => {
            let level = big_n + nterm_lower_offset(structure);
            structure.check_level(level)?;
            Ok(flat_level(structure, level, source))
        }
        ExtremalKind::BernsteinBall => {
            structure.check_level(big_n)?;
            Ok(flat_level(structure, big_n, source))
        }
        ExtremalKind::LinearLower => {
            structure.check_level(big_n + 1)?;
            let entries = (0..=big_n + 1).map(|j| (Index::new(j, 1, 0), 1.0)).collect();
            Ok(WeightedSequence::from_sorted_unchecked(*structure, entries))
        }
    }
}

/// `(Σ_{n=1}^{n_max} [n^{t/d} σ_n(a)]^p / n)^{1/p}` in the limiting case
/// `t = d(1/p − 1/2)`, `p < 2`, source `b^{s+t}_{p,p}`, target `b^s_{2,2}`.
///
/// Bounded in `n_max` exactly when `a` lies in the source space.
pub fn limiting_case_functional(
    a: &WeightedSequence,
    source: &SpaceParams,
    target: &SpaceParams,
    n_max: usize,
) -> Result<f64> {
    require_hilbert(target)?;
    target.check_dim(source.d)?;
    source.check_dim(a.d())?;
    let p = match source.p {
        Exponent::Finite(p) if p < 2.0 => p,
        _ => return Err(Error::Regime(format!("limiting case needs p < 2, got p={}", source.p))),
    };
    if source.q != source.p {
        return Err(Error::Regime("limiting case needs q = p in the source".into()));
    }
    let d = source.d as f64;
    let t = source.s - target.s;
    let expected = d * (1.0 / p - 0.5);
    if (t - expected).abs() > 1e-12 * expected.abs().max(1.0) {
        return Err(Error::Regime(format!("limiting case needs t = d(1/p - 1/2) = {expected}, got {t}")));
    }
    let tails = hilbert_tail_squares(a, target);
    let last = tails.len() - 1;
    let mut acc = CompensatedSum::new();
    for n in 1..=n_max {
        let sigma = tails[n.min(last)].sqrt();
        if sigma == 0.0 {
            break;
        }
        let nf = n as f64;
        acc.add((nf.powf(t / d) * sigma).powf(p) / nf);
    }
    Ok(acc.value().powf(1.0 / p))
}
