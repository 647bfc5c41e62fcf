//! Periodized biorthogonal wavelet transforms on dyadic grids over `[0,1]^d`,
//! `d ∈ {1, 2}`.
//!
//! Coefficients are `L2`-normalized: the finest scaling coefficients are
//! `c_L[k] = f(x_k)·2^{-Ld/2}`, so for Haar the transform is orthogonal and
//! `Σ coeff² = Σ f(x_k)²·2^{-Ld}`.
//!
//! Index layout matches [`cube_structure`]: level `-1` holds the single
//! scaling coefficient, level `j ≥ 0` holds channels `1..2^d` (bit 0 set for
//! a high-pass in `x`, bit 1 for a high-pass in `y`) on the lattice
//! `ky·2^j + kx`.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::parallel::Execution;
use crate::sequence::{besov_seq_norm, cube_structure, Index, WeightedSequence};
use crate::space::{Exponent, SpaceParams};

/// Largest grid level accepted (`2^{Ld}` samples must stay addressable).
pub const MAX_GRID_LEVEL_2D: u32 = 13;
pub const MAX_GRID_LEVEL_1D: u32 = 26;

/// Cell-center samples on the `2^L`-per-axis grid, row-major
/// (`index = iy·2^L + ix`).
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    d: u32,
    level: u32,
    samples: Vec<f64>,
}

impl GridFunction {
    pub fn new(d: u32, level: u32, samples: Vec<f64>) -> Result<Self> {
        check_grid(d, level)?;
        let expected = 1usize << (level * d);
        if samples.len() != expected {
            return Err(Error::InvalidParameter(format!(
                "grid d={d} L={level} needs {expected} samples, got {}",
                samples.len()
            )));
        }
        if let Some(v) = samples.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite sample {v}")));
        }
        Ok(Self { d, level, samples })
    }

    pub fn zeros(d: u32, level: u32) -> Result<Self> {
        check_grid(d, level)?;
        Ok(Self { d, level, samples: vec![0.0; 1usize << (level * d)] })
    }

    /// Samples `f` at cell centers; rows are evaluated in parallel.
    pub fn from_fn<F>(d: u32, level: u32, exec: Execution, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Sync + Send,
    {
        let mut g = Self::zeros(d, level)?;
        let side = 1usize << level;
        let h = 1.0 / side as f64;
        exec.for_each_chunk(&mut g.samples, side, |iy, row| {
            let y = (iy as f64 + 0.5) * h;
            for (ix, v) in row.iter_mut().enumerate() {
                let x = (ix as f64 + 0.5) * h;
                *v = if d == 1 { f(&[x]) } else { f(&[x, y]) };
            }
        });
        if let Some(v) = g.samples.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("function produced non-finite sample {v}")));
        }
        Ok(g)
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn side(&self) -> usize {
        1usize << self.level
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { samples: self.samples.iter().map(|v| v * c).collect(), ..self.clone() }
    }

    pub fn cell_volume(&self) -> f64 {
        (-((self.level * self.d) as f64)).exp2()
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Discrete `L2([0,1]^d)` norm `(Σ f² · cell volume)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        (crate::sum::compensated_sum(self.samples.iter().map(|v| v * v)) * self.cell_volume()).sqrt()
    }

    /// `#grid d=<d> L=<L>` followed by one sample per line in row-major order.
    pub fn to_text(&self) -> String {
        let mut out = format!("#grid d={} L={}\n", self.d, self.level);
        for v in &self.samples {
            let _ = writeln!(out, "{v:.17e}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut header = None;
        let mut samples = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("#grid") {
                header = Some(parse_grid_header(rest).map_err(|m| Error::Parse { line: line_no, message: m })?);
                continue;
            }
            if line.starts_with('#') {
                continue;
            }
            if header.is_none() {
                return Err(Error::Parse { line: line_no, message: "sample before '#grid' header".into() });
            }
            let v: f64 = line
                .parse()
                .map_err(|_| Error::Parse { line: line_no, message: format!("bad sample '{line}'") })?;
            samples.push(v);
        }
        let (d, level) = header.ok_or(Error::Parse { line: 1, message: "missing '#grid d=<d> L=<L>' header".into() })?;
        Self::new(d, level, samples)
    }
}

fn parse_grid_header(rest: &str) -> std::result::Result<(u32, u32), String> {
    let mut d = None;
    let mut level = None;
    for tok in rest.split_whitespace() {
        if let Some(v) = tok.strip_prefix("d=") {
            d = Some(v.parse::<u32>().map_err(|_| format!("bad d '{v}'"))?);
        } else if let Some(v) = tok.strip_prefix("L=") {
            level = Some(v.parse::<u32>().map_err(|_| format!("bad L '{v}'"))?);
        } else {
            return Err(format!("unexpected header token '{tok}'"));
        }
    }
    match (d, level) {
        (Some(d), Some(l)) => Ok((d, l)),
        _ => Err("header needs d=<d> and L=<L>".into()),
    }
}

fn check_grid(d: u32, level: u32) -> Result<()> {
    match d {
        1 if level <= MAX_GRID_LEVEL_1D => Ok(()),
        2 if level <= MAX_GRID_LEVEL_2D => Ok(()),
        1 | 2 => Err(Error::InvalidParameter(format!("grid level {level} too large for d={d}"))),
        _ => Err(Error::InvalidParameter(format!("grids exist for d = 1, 2 only, got d={d}"))),
    }
}

/// Filter `taps[i]` sits at position `offset + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Filter {
    pub offset: i32,
    pub taps: Vec<f64>,
}

impl Filter {
    fn first(&self) -> i32 {
        self.offset
    }

    fn last(&self) -> i32 {
        self.offset + self.taps.len() as i32 - 1
    }

    fn at(&self, n: i32) -> f64 {
        let i = n - self.offset;
        if i < 0 || i as usize >= self.taps.len() {
            0.0
        } else {
            self.taps[i as usize]
        }
    }

    /// `g[n] = (-1)^n h[1 - n]`, the quadrature mirror of `h`.
    fn mirror(h: &Filter) -> Filter {
        let first = 1 - h.last();
        let taps = (first..=1 - h.first())
            .map(|n| if n.rem_euclid(2) == 0 { h.at(1 - n) } else { -h.at(1 - n) })
            .collect();
        Filter { offset: first, taps }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyName {
    Haar,
    /// Cohen-Daubechies-Feauveau pair: B-spline synthesis of order `m`,
    /// dual of order `m_dual`; `m + m_dual` even.
    Spline { m: u32, m_dual: u32 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveletFamily {
    name: FamilyName,
    analysis_low: Filter,
    analysis_high: Filter,
    synthesis_low: Filter,
    synthesis_high: Filter,
    vanishing_moments: u32,
    support_radius: u32,
}

/// Laurent polynomial `Σ c[i] z^{offset+i}`.
#[derive(Debug, Clone)]
struct Laurent {
    offset: i32,
    c: Vec<f64>,
}

impl Laurent {
    fn monomial(k: i32, c: f64) -> Self {
        Self { offset: k, c: vec![c] }
    }

    fn mul(&self, o: &Laurent) -> Laurent {
        let mut c = vec![0.0; self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            for (j, b) in o.c.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Laurent { offset: self.offset + o.offset, c }
    }

    fn add(&self, o: &Laurent) -> Laurent {
        let lo = self.offset.min(o.offset);
        let hi = (self.offset + self.c.len() as i32).max(o.offset + o.c.len() as i32);
        let mut c = vec![0.0; (hi - lo) as usize];
        for (i, a) in self.c.iter().enumerate() {
            c[(self.offset - lo) as usize + i] += a;
        }
        for (i, a) in o.c.iter().enumerate() {
            c[(o.offset - lo) as usize + i] += a;
        }
        Laurent { offset: lo, c }
    }

    fn scale(&self, s: f64) -> Laurent {
        Laurent { offset: self.offset, c: self.c.iter().map(|v| v * s).collect() }
    }

    fn pow(&self, k: u32) -> Laurent {
        (0..k).fold(Laurent::monomial(0, 1.0), |acc, _| acc.mul(self))
    }

    fn into_filter(self) -> Filter {
        let mut first = 0;
        let mut last = self.c.len();
        while first < last && self.c[first].abs() < 1e-15 {
            first += 1;
        }
        while last > first && self.c[last - 1].abs() < 1e-15 {
            last -= 1;
        }
        Filter { offset: self.offset + first as i32, taps: self.c[first..last].to_vec() }
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn cdf_lowpass(m: u32, m_dual: u32) -> (Filter, Filter) {
    let half_one_plus_z = Laurent { offset: 0, c: vec![0.5, 0.5] };
    let a = (m / 2) as i32;
    let b = a + (m_dual as i32 - m as i32) / 2;
    let synth = half_one_plus_z.pow(m).mul(&Laurent::monomial(-a, std::f64::consts::SQRT_2));
    // P(S) = Σ_{k<ℓ} C(ℓ-1+k, k) S^k with S = sin²(ξ/2) = (2 - z - 1/z)/4
    let ell = (m + m_dual) / 2;
    let s = Laurent { offset: -1, c: vec![-0.25, 0.5, -0.25] };
    let mut p = Laurent::monomial(0, 0.0);
    for k in 0..ell {
        p = p.add(&s.pow(k).scale(binomial(ell - 1 + k, k)));
    }
    let anal = half_one_plus_z
        .pow(m_dual)
        .mul(&p)
        .mul(&Laurent::monomial(-b, std::f64::consts::SQRT_2));
    (anal.into_filter(), synth.into_filter())
}

impl WaveletFamily {
    pub fn haar() -> Self {
        let mut f = Self::build(1, 1);
        f.name = FamilyName::Haar;
        f
    }

    /// CDF biorthogonal spline pair `(m, m_dual)`, e.g. `(2, 2)` is the 5/3 pair.
    pub fn spline(m: u32, m_dual: u32) -> Result<Self> {
        if m == 0 || m_dual == 0 || (m + m_dual) % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "spline orders need m, m_dual >= 1 with m + m_dual even, got ({m}, {m_dual})"
            )));
        }
        if m + m_dual > 16 {
            return Err(Error::InvalidParameter(format!("spline orders ({m}, {m_dual}) too large")));
        }
        Ok(Self::build(m, m_dual))
    }

    fn build(m: u32, m_dual: u32) -> Self {
        let (analysis_low, synthesis_low) = cdf_lowpass(m, m_dual);
        let analysis_high = Filter::mirror(&synthesis_low);
        let synthesis_high = Filter::mirror(&analysis_low);
        let support_radius = [&analysis_low, &analysis_high, &synthesis_low, &synthesis_high]
            .iter()
            .map(|f| f.first().unsigned_abs().max(f.last().unsigned_abs()))
            .max()
            .unwrap_or(0);
        Self {
            name: FamilyName::Spline { m, m_dual },
            analysis_low,
            analysis_high,
            synthesis_low,
            synthesis_high,
            vanishing_moments: m,
            support_radius,
        }
    }

    pub fn name(&self) -> FamilyName {
        self.name
    }

    /// Number of vanishing moments of the analysis wavelet (polynomials of
    /// degree `< r` are annihilated). Haar has `r = 1`.
    pub fn vanishing_moments(&self) -> u32 {
        self.vanishing_moments
    }

    /// Largest `|n|` with a nonzero tap in any of the four filters.
    pub fn support_radius(&self) -> u32 {
        self.support_radius
    }

    pub fn analysis_filters(&self) -> (&Filter, &Filter) {
        (&self.analysis_low, &self.analysis_high)
    }

    pub fn synthesis_filters(&self) -> (&Filter, &Filter) {
        (&self.synthesis_low, &self.synthesis_high)
    }

    /// Open window `(lo, hi)` of smoothness `s` for which the coefficient
    /// norm is equivalent to the `B^s_{p,q}` norm with this family.
    ///
    /// The upper end is the Besov regularity of the synthesis spline capped by
    /// the vanishing moments; the lower end mirrors it for the dual and adds
    /// the `d(1/p - 1)_+` shift needed below `p = 1`.
    pub fn smoothness_window(&self, p: Exponent, d: u32) -> (f64, f64) {
        let inv_p = p.recip();
        let (m, m_dual) = match self.name {
            FamilyName::Haar => (1, 1),
            FamilyName::Spline { m, m_dual } => (m, m_dual),
        };
        let hi = (m as f64 - 1.0 + inv_p).min(m as f64);
        let dual_reg = m_dual as f64 - 1.0 + (1.0 - inv_p).max(0.0);
        let lo = d as f64 * (inv_p - 1.0).max(0.0) - dual_reg;
        (lo, hi)
    }

    fn name_string(&self) -> String {
        match self.name {
            FamilyName::Haar => "Haar".into(),
            FamilyName::Spline { m, m_dual } => format!("Spline({m},{m_dual})"),
        }
    }
}

impl std::fmt::Display for WaveletFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.name_string())
    }
}

impl std::str::FromStr for WaveletFamily {
    type Err = Error;

    /// `haar` or `spline(m,m_dual)` / `spline:m,m_dual`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        if t == "haar" {
            return Ok(Self::haar());
        }
        let body = t
            .strip_prefix("spline")
            .map(|r| r.trim_start_matches([':', '(']).trim_end_matches(')'))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown wavelet family '{s}'")))?;
        let parts: Vec<&str> = body.split(',').map(str::trim).collect();
        if parts.len() != 2 {
            return Err(Error::InvalidParameter(format!("expected spline(m,m_dual), got '{s}'")));
        }
        let parse = |v: &str| v.parse::<u32>().map_err(|_| Error::InvalidParameter(format!("bad spline order '{v}'")));
        Self::spline(parse(parts[0])?, parse(parts[1])?)
    }
}

fn analysis_step(x: &[f64], low: &Filter, high: &Filter, out: &mut [f64]) {
    let m = x.len() as i64;
    let half = x.len() / 2;
    for k in 0..half {
        let base = 2 * k as i64;
        let mut a = 0.0;
        for (i, h) in low.taps.iter().enumerate() {
            a += h * x[(base + low.offset as i64 + i as i64).rem_euclid(m) as usize];
        }
        let mut b = 0.0;
        for (i, g) in high.taps.iter().enumerate() {
            b += g * x[(base + high.offset as i64 + i as i64).rem_euclid(m) as usize];
        }
        out[k] = a;
        out[half + k] = b;
    }
}

fn synthesis_step(y: &[f64], low: &Filter, high: &Filter, out: &mut [f64]) {
    let m = y.len() as i64;
    let half = y.len() / 2;
    out.iter_mut().for_each(|v| *v = 0.0);
    for k in 0..half {
        let base = 2 * k as i64;
        let (a, b) = (y[k], y[half + k]);
        for (i, h) in low.taps.iter().enumerate() {
            out[(base + low.offset as i64 + i as i64).rem_euclid(m) as usize] += h * a;
        }
        for (i, g) in high.taps.iter().enumerate() {
            out[(base + high.offset as i64 + i as i64).rem_euclid(m) as usize] += g * b;
        }
    }
}

/// Applies `step` to the leading `size×size` block of a row-major `stride`-wide
/// square array: first along rows, then along columns.
fn pass_2d<F>(data: &mut [f64], stride: usize, size: usize, exec: Execution, forward: bool, step: F)
where
    F: Fn(&[f64], &mut [f64]) + Sync + Send,
{
    let rows = |data: &mut [f64]| {
        exec.for_each_chunk(&mut data[..stride * size], stride, |_, row| {
            let src = row[..size].to_vec();
            step(&src, &mut row[..size]);
        });
    };
    let cols = |data: &mut [f64]| {
        let mut t = vec![0.0; size * size];
        for y in 0..size {
            for x in 0..size {
                t[x * size + y] = data[y * stride + x];
            }
        }
        exec.for_each_chunk(&mut t, size, |_, col| {
            let src = col.to_vec();
            step(&src, col);
        });
        for y in 0..size {
            for x in 0..size {
                data[y * stride + x] = t[x * size + y];
            }
        }
    };
    if forward {
        rows(data);
        cols(data);
    } else {
        cols(data);
        rows(data);
    }
}

/// Forward transform down to level 0, returning the coefficient sequence.
pub fn analyze(f: &GridFunction, family: &WaveletFamily) -> Result<WeightedSequence> {
    analyze_with(f, family, Execution::default())
}

pub fn analyze_with(f: &GridFunction, family: &WaveletFamily, exec: Execution) -> Result<WeightedSequence> {
    let level = f.level;
    if level < 1 {
        return Err(Error::InvalidParameter("analysis needs grid level L >= 1".into()));
    }
    let d = f.d;
    let side = f.side();
    let scale = (-((level * d) as f64) / 2.0).exp2();
    let mut data: Vec<f64> = f.samples.iter().map(|v| v * scale).collect();
    let (lo, hi) = family.analysis_filters();
    let step = |x: &[f64], out: &mut [f64]| analysis_step(x, lo, hi, out);
    let mut size = side;
    while size > 1 {
        if d == 1 {
            let src = data[..size].to_vec();
            step(&src, &mut data[..size]);
        } else {
            pass_2d(&mut data, side, size, exec, true, step);
        }
        size /= 2;
    }
    collect_coefficients(&data, d, level)
}

fn collect_coefficients(data: &[f64], d: u32, level: u32) -> Result<WeightedSequence> {
    let structure = cube_structure(d, level as i32 - 1)?;
    let side = 1usize << level;
    let mut entries = Vec::with_capacity(data.len());
    entries.push((Index::new(-1, 0, 0), data[0]));
    for j in 0..level as i32 {
        let n = 1usize << j;
        if d == 1 {
            for k in 0..n {
                entries.push((Index::new(j, 1, k as u64), data[n + k]));
            }
        } else {
            for channel in 1..4u32 {
                let (ox, oy) = ((channel & 1) as usize * n, ((channel >> 1) & 1) as usize * n);
                for ky in 0..n {
                    for kx in 0..n {
                        entries.push((Index::new(j, channel, (ky * n + kx) as u64), data[(oy + ky) * side + ox + kx]));
                    }
                }
            }
        }
    }
    entries.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(WeightedSequence::from_sorted_unchecked(structure, entries))
}

/// Inverse transform onto a level-`L` grid.
pub fn synthesize(a: &WeightedSequence, family: &WaveletFamily, level: u32) -> Result<GridFunction> {
    synthesize_with(a, family, level, Execution::default())
}

pub fn synthesize_with(a: &WeightedSequence, family: &WaveletFamily, level: u32, exec: Execution) -> Result<GridFunction> {
    let d = a.d();
    check_grid(d, level)?;
    if level < 1 {
        return Err(Error::InvalidParameter("synthesis needs grid level L >= 1".into()));
    }
    if let Some(top) = a.max_level() {
        if top > level as i32 - 1 {
            return Err(Error::LevelOutOfRange { level: top, min: -1, max: level as i32 - 1 });
        }
    }
    let side = 1usize << level;
    let mut data = vec![0.0; 1usize << (level * d)];
    for (idx, v) in a.entries() {
        if idx.j < 0 {
            data[0] = *v;
            continue;
        }
        let n = 1usize << idx.j;
        let k = idx.lattice as usize;
        if d == 1 {
            data[n + k] = *v;
        } else {
            let (ox, oy) = ((idx.channel & 1) as usize * n, ((idx.channel >> 1) & 1) as usize * n);
            data[(oy + k / n) * side + ox + k % n] = *v;
        }
    }
    let (lo, hi) = family.synthesis_filters();
    let step = |y: &[f64], out: &mut [f64]| synthesis_step(y, lo, hi, out);
    let mut size = 2;
    while size <= side {
        if d == 1 {
            let src = data[..size].to_vec();
            step(&src, &mut data[..size]);
        } else {
            pass_2d(&mut data, side, size, exec, false, step);
        }
        size *= 2;
    }
    let scale = (((level * d) as f64) / 2.0).exp2();
    data.iter_mut().for_each(|v| *v *= scale);
    GridFunction::new(d, level, data)
}

/// `besov_seq_norm(analyze(f), params)`, gated by the family's smoothness window.
pub fn besov_norm_function(f: &GridFunction, family: &WaveletFamily, params: &SpaceParams) -> Result<f64> {
    params.check_dim(f.d)?;
    let (lo, hi) = family.smoothness_window(params.p, params.d);
    if !(params.s > lo && params.s < hi) {
        return Err(Error::Regularity { s: params.s, p: params.p.to_string(), lo, hi });
    }
    besov_seq_norm(&analyze(f, family)?, params)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lcg(seed: &mut u64) -> f64 {
        *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((*seed >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    }

    fn families() -> Vec<WaveletFamily> {
        vec![
            WaveletFamily::haar(),
            WaveletFamily::spline(2, 2).unwrap(),
            WaveletFamily::spline(2, 4).unwrap(),
            WaveletFamily::spline(3, 3).unwrap(),
            WaveletFamily::spline(1, 3).unwrap(),
        ]
    }

    #[test]
    fn haar_taps() {
        let h = WaveletFamily::haar();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(h.analysis_low, Filter { offset: 0, taps: vec![r, r] });
        assert_eq!(h.analysis_high, Filter { offset: 0, taps: vec![r, -r] });
        assert_eq!(h.support_radius(), 1);
        assert_eq!(h.vanishing_moments(), 1);
    }

    #[test]
    fn cdf53_taps() {
        let f = WaveletFamily::spline(2, 2).unwrap();
        let s = std::f64::consts::SQRT_2;
        let (lo, _) = f.synthesis_filters();
        assert_eq!(lo.offset, -1);
        for (a, b) in lo.taps.iter().zip([0.25 * s, 0.5 * s, 0.25 * s]) {
            assert!((a - b).abs() < 1e-15);
        }
        let (alo, _) = f.analysis_filters();
        assert_eq!(alo.offset, -2);
        let expect = [-1.0, 2.0, 6.0, 2.0, -1.0].map(|v| v * s / 8.0);
        for (a, b) in alo.taps.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(f.support_radius(), 3);
    }

    #[test]
    fn lowpass_sums_and_vanishing_moments() {
        for fam in families() {
            let (alo, ahi) = fam.analysis_filters();
            let (slo, shi) = fam.synthesis_filters();
            for f in [alo, slo] {
                assert!((f.taps.iter().sum::<f64>() - std::f64::consts::SQRT_2).abs() < 1e-13);
            }
            for k in 0..fam.vanishing_moments() as i32 {
                let mom: f64 =
                    ahi.taps.iter().enumerate().map(|(i, g)| g * ((ahi.offset + i as i32) as f64).powi(k)).sum();
                assert!(mom.abs() < 1e-10, "{fam} moment {k} = {mom}");
            }
            assert!(shi.taps.iter().sum::<f64>().abs() < 1e-13);
        }
    }

    #[test]
    fn round_trip_all_families() {
        let mut seed = 7u64;
        for fam in families() {
            for (d, level) in [(1, 1), (1, 5), (2, 1), (2, 2), (2, 4)] {
                let n = 1usize << (level * d);
                let f = GridFunction::new(d, level, (0..n).map(|_| lcg(&mut seed)).collect()).unwrap();
                let a = analyze(&f, &fam).unwrap();
                assert_eq!(a.len(), n);
                let g = synthesize(&a, &fam, level).unwrap();
                let err = f.samples.iter().zip(&g.samples).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
                assert!(err <= 1e-12 * f.max_abs(), "{fam} d={d} L={level}: {err}");
            }
        }
    }

    #[test]
    fn constant_has_no_detail() {
        for fam in families() {
            let f = GridFunction::new(2, 3, vec![2.5; 64]).unwrap();
            let a = analyze(&f, &fam).unwrap();
            for (idx, v) in a.entries() {
                if idx.j >= 0 {
                    assert!(v.abs() < 1e-12, "{fam} {idx:?} {v}");
                } else {
                    assert!((v - 2.5).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn single_haar_wavelet_round_trip() {
        let fam = WaveletFamily::haar();
        let s = cube_structure(2, 2).unwrap();
        let idx = Index::new(1, 3, 2);
        let a = WeightedSequence::new(s, [(idx, 1.0)]).unwrap();
        let f = synthesize(&a, &fam, 3).unwrap();
        let back = analyze(&f, &fam).unwrap().pruned();
        for (i, v) in back.entries() {
            if *i == idx {
                assert!((v - 1.0).abs() < 1e-14);
            } else {
                assert!(v.abs() < 1e-14);
            }
        }
    }

    #[test]
    fn haar_wavelet_shape_1d() {
        let fam = WaveletFamily::haar();
        let s = cube_structure(1, 1).unwrap();
        let a = WeightedSequence::new(s, [(Index::new(0, 1, 0), 1.0)]).unwrap();
        let f = synthesize(&a, &fam, 2).unwrap();
        // ψ_{0,0} = 1 on [0, 1/2), -1 on [1/2, 1)
        for (v, e) in f.samples().iter().zip([1.0, 1.0, -1.0, -1.0]) {
            assert!((v - e).abs() < 1e-14);
        }
    }

    #[test]
    fn scaling_coefficient_to_constant() {
        let fam = WaveletFamily::haar();
        let s = cube_structure(2, 1).unwrap();
        let a = WeightedSequence::new(s, [(Index::new(-1, 0, 0), 3.0)]).unwrap();
        let f = synthesize(&a, &fam, 2).unwrap();
        assert!(f.samples().iter().all(|v| (v - 3.0).abs() < 1e-14));
    }

    #[test]
    fn haar_parseval() {
        let mut seed = 99u64;
        let f = GridFunction::new(2, 5, (0..1024).map(|_| lcg(&mut seed)).collect()).unwrap();
        let a = analyze(&f, &WaveletFamily::haar()).unwrap();
        let lhs: f64 = a.entries().iter().map(|e| e.1 * e.1).sum();
        let rhs = f.l2_norm().powi(2);
        assert!((lhs - rhs).abs() <= 1e-12 * rhs);
    }

    #[test]
    fn synthesize_rejects_fine_levels() {
        let s = cube_structure(1, 4).unwrap();
        let a = WeightedSequence::new(s, [(Index::new(4, 1, 0), 1.0)]).unwrap();
        assert!(matches!(synthesize(&a, &WaveletFamily::haar(), 3), Err(Error::LevelOutOfRange { .. })));
        let zero = synthesize(&WeightedSequence::zero(cube_structure(1, 2).unwrap()), &WaveletFamily::haar(), 3).unwrap();
        assert!(zero.samples().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn analyze_rejects_level_zero() {
        let f = GridFunction::new(1, 0, vec![1.0]).unwrap();
        assert!(analyze(&f, &WaveletFamily::haar()).is_err());
    }

    #[test]
    fn regularity_gate() {
        let f = GridFunction::new(1, 4, vec![1.0; 16]).unwrap();
        let haar = WaveletFamily::haar();
        let bad = SpaceParams::hilbert(0.5, 1);
        assert!(matches!(besov_norm_function(&f, &haar, &bad), Err(Error::Regularity { .. })));
        let ok = SpaceParams::hilbert(0.4, 1);
        assert!((besov_norm_function(&f, &haar, &ok).unwrap() - 1.0).abs() < 1e-12);
        let cdf = WaveletFamily::spline(2, 2).unwrap();
        assert!(besov_norm_function(&f, &cdf, &SpaceParams::hilbert(1.2, 1)).is_ok());
    }

    #[test]
    fn text_round_trip() {
        let f = GridFunction::new(2, 1, vec![0.1, -2.0, 3.5e-7, 4.0]).unwrap();
        let back = GridFunction::from_text(&f.to_text()).unwrap();
        assert_eq!(f, back);
        assert!(matches!(
            GridFunction::from_text("#grid d=1 L=1\n1.0\nnope\n"),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(GridFunction::from_text("#grid d=1 L=2\n1.0\n").is_err());
    }

    #[test]
    fn family_parsing() {
        assert_eq!("haar".parse::<WaveletFamily>().unwrap().name(), FamilyName::Haar);
        assert_eq!(
            "spline(2,4)".parse::<WaveletFamily>().unwrap().name(),
            FamilyName::Spline { m: 2, m_dual: 4 }
        );
        assert!("spline(2,3)".parse::<WaveletFamily>().is_err());
        assert!("db4".parse::<WaveletFamily>().is_err());
    }
}
