//! Level structures `∇_j` on the unit cube, finitely supported weighted
//! sequences over them, and the `b^s_{p,q}` quasi-norm.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{Exponent, SpaceParams};
use crate::sum::CompensatedSum;

/// Coarsest level: the scaling-function slot.
pub const J_MIN: i32 = -1;

/// A basis index `(j, λ)` with `λ = (channel, lattice)`.
///
/// The derived order is `(j, channel, lattice)` lexicographic, which is the
/// tie-break order used by every sort in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Index {
    pub j: i32,
    pub channel: u32,
    pub lattice: u64,
}

impl Index {
    pub const fn new(j: i32, channel: u32, lattice: u64) -> Self {
        Self { j, channel, lattice }
    }
}

/// Level used inside weights `2^{j(...)}`: the scaling level counts as 0.
#[inline]
pub fn weight_level(j: i32) -> f64 {
    j.max(0) as f64
}

/// `∇_{-1}, ∇_0, …, ∇_{J_max}` for the unit cube `[0,1]^d`.
///
/// `∇_{-1}` holds one scaling slot (channel 0, lattice 0); `∇_j` for `j ≥ 0`
/// holds `channels · 2^{jd}` entries, channels numbered `1..=channels`, lattice
/// points numbered row-major in `0..2^{jd}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelStructure {
    d: u32,
    j_max: i32,
    channels: u32,
}

impl LevelStructure {
    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn j_min(&self) -> i32 {
        J_MIN
    }

    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    pub fn channels(&self) -> u32 {
        self.channels
    }

    pub fn levels(&self) -> std::ops::RangeInclusive<i32> {
        J_MIN..=self.j_max
    }

    pub fn has_level(&self, j: i32) -> bool {
        (J_MIN..=self.j_max).contains(&j)
    }

    pub fn check_level(&self, j: i32) -> Result<()> {
        if self.has_level(j) {
            Ok(())
        } else {
            Err(Error::LevelOutOfRange { level: j, min: J_MIN, max: self.j_max })
        }
    }

    /// Number of lattice points at level `j`.
    pub fn lattice_count(&self, j: i32) -> u64 {
        if j < 0 {
            1
        } else {
            1u64 << (j as u64 * self.d as u64)
        }
    }

    pub fn channel_range(&self, j: i32) -> std::ops::RangeInclusive<u32> {
        if j < 0 {
            0..=0
        } else {
            1..=self.channels
        }
    }

    /// `|∇_j|`.
    pub fn cardinality(&self, j: i32) -> u64 {
        if !self.has_level(j) {
            return 0;
        }
        if j < 0 {
            1
        } else {
            self.channels as u64 * self.lattice_count(j)
        }
    }

    /// `Σ_{j' ≤ j} |∇_{j'}|`.
    pub fn cumulative_cardinality(&self, j: i32) -> u64 {
        (J_MIN..=j.min(self.j_max)).map(|l| self.cardinality(l)).sum()
    }

    pub fn contains(&self, idx: &Index) -> bool {
        self.has_level(idx.j)
            && self.channel_range(idx.j).contains(&idx.channel)
            && idx.lattice < self.lattice_count(idx.j)
    }

    /// All indices of `∇_j` in tie-break order.
    pub fn indices(&self, j: i32) -> impl Iterator<Item = Index> + '_ {
        let lattice = if self.has_level(j) { self.lattice_count(j) } else { 0 };
        let channels = if self.has_level(j) { self.channel_range(j) } else { 1..=0 };
        channels.flat_map(move |c| (0..lattice).map(move |k| Index::new(j, c, k)))
    }

    /// `(C1, C2)` with `C1 ≤ 2^{-jd}|∇_j| ≤ C2` for all stored `j ≥ from_level`
    /// (levels below 0 are skipped).
    pub fn cardinality_constants(&self, from_level: i32) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for j in from_level.max(0)..=self.j_max {
            let ratio = self.cardinality(j) as f64 / self.lattice_count(j) as f64;
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
        (lo, hi)
    }
}

/// Builds the unit-cube level structure for levels `-1..=j_max`.
///
/// `channels_per_point` is the number of wavelet channels per lattice point
/// for `j ≥ 0`; the tensor-product construction uses `2^d − 1`.
pub fn make_level_structure(d: u32, j_max: i32, channels_per_point: u32) -> Result<LevelStructure> {
    if j_max < 0 {
        return Err(Error::InvalidParameter(format!("J_max must be >= 0, got {j_max}")));
    }
    if d == 0 {
        return Err(Error::InvalidParameter("dimension must be >= 1".into()));
    }
    if channels_per_point == 0 {
        return Err(Error::InvalidParameter("channels_per_point must be >= 1".into()));
    }
    if (j_max as u64) * (d as u64) > 40 {
        return Err(Error::InvalidParameter(format!(
            "level structure too large: 2^(J_max*d) with J_max={j_max}, d={d}"
        )));
    }
    Ok(LevelStructure { d, j_max, channels: channels_per_point })
}

/// `make_level_structure(d, j_max, 2^d − 1)`.
pub fn cube_structure(d: u32, j_max: i32) -> Result<LevelStructure> {
    if d == 0 || d > 16 {
        return Err(Error::InvalidParameter(format!("unsupported dimension {d}")));
    }
    make_level_structure(d, j_max, (1u32 << d) - 1)
}

/// Finitely supported coefficients `a_{j,λ}` over a level structure.
///
/// Entries are kept sorted by [`Index`]; stored zeros are allowed and never
/// change a norm or an approximation.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSequence {
    structure: LevelStructure,
    entries: Vec<(Index, f64)>,
}

impl WeightedSequence {
    pub fn zero(structure: LevelStructure) -> Self {
        Self { structure, entries: Vec::new() }
    }

    pub fn new<I>(structure: LevelStructure, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Index, f64)>,
    {
        let mut entries: Vec<(Index, f64)> = entries.into_iter().collect();
        for (idx, v) in &entries {
            if !structure.contains(idx) {
                return Err(Error::NotInStructure { j: idx.j, channel: idx.channel, lattice: idx.lattice });
            }
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("non-finite coefficient at {idx:?}")));
            }
        }
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        if let Some(w) = entries.windows(2).find(|w| w[0].0 == w[1].0) {
            let idx = w[0].0;
            return Err(Error::DuplicateIndex { j: idx.j, channel: idx.channel, lattice: idx.lattice });
        }
        Ok(Self { structure, entries })
    }

    /// Callers guarantee sorted, unique, in-structure entries.
    pub(crate) fn from_sorted_unchecked(structure: LevelStructure, entries: Vec<(Index, f64)>) -> Self {
        debug_assert!(entries.windows(2).all(|w| w[0].0 < w[1].0));
        Self { structure, entries }
    }

    pub fn from_map(structure: LevelStructure, map: &BTreeMap<Index, f64>) -> Result<Self> {
        Self::new(structure, map.iter().map(|(k, v)| (*k, *v)))
    }

    pub fn structure(&self) -> &LevelStructure {
        &self.structure
    }

    pub fn d(&self) -> u32 {
        self.structure.d
    }

    pub fn entries(&self) -> &[(Index, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, idx: &Index) -> f64 {
        self.entries
            .binary_search_by(|e| e.0.cmp(idx))
            .map(|i| self.entries[i].1)
            .unwrap_or(0.0)
    }

    pub fn nonzero(&self) -> impl Iterator<Item = &(Index, f64)> {
        self.entries.iter().filter(|e| e.1 != 0.0)
    }

    pub fn nonzero_count(&self) -> usize {
        self.nonzero().count()
    }

    pub fn max_level(&self) -> Option<i32> {
        self.entries.last().map(|e| e.0.j)
    }

    /// Copy with zero entries dropped.
    pub fn pruned(&self) -> Self {
        Self { structure: self.structure, entries: self.nonzero().copied().collect() }
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map_values(|_, v| c * v)
    }

    pub fn map_values<F: FnMut(&Index, f64) -> f64>(&self, mut f: F) -> Self {
        Self {
            structure: self.structure,
            entries: self.entries.iter().map(|(i, v)| (*i, f(i, *v))).collect(),
        }
    }

    pub fn filter<F: FnMut(&Index, f64) -> bool>(&self, mut keep: F) -> Self {
        Self {
            structure: self.structure,
            entries: self.entries.iter().filter(|(i, v)| keep(i, *v)).copied().collect(),
        }
    }

    /// Coefficient-wise `self + c·other` on a common structure.
    pub fn axpy(&self, c: f64, other: &WeightedSequence) -> Result<Self> {
        if self.structure != other.structure {
            return Err(Error::InvalidParameter("sequences live on different level structures".into()));
        }
        let mut out = Vec::with_capacity(self.entries.len() + other.entries.len());
        let (mut i, mut k) = (0, 0);
        while i < self.entries.len() || k < other.entries.len() {
            match (self.entries.get(i), other.entries.get(k)) {
                (Some(a), Some(b)) if a.0 == b.0 => {
                    out.push((a.0, a.1 + c * b.1));
                    i += 1;
                    k += 1;
                }
                (Some(a), Some(b)) if a.0 < b.0 => {
                    out.push(*a);
                    i += 1;
                }
                (Some(_), Some(b)) => {
                    out.push((b.0, c * b.1));
                    k += 1;
                }
                (Some(a), None) => {
                    out.push(*a);
                    i += 1;
                }
                (None, Some(b)) => {
                    out.push((b.0, c * b.1));
                    k += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        Ok(Self { structure: self.structure, entries: out })
    }

    /// Text serialization: header `#besovseq d=<d> jmin=<j_min> jmax=<J_max>`
    /// followed by `j<TAB>channel<TAB>lattice<TAB>coefficient` records.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        self.write_text(&mut out);
        out
    }

    pub(crate) fn write_text(&self, out: &mut String) {
        let _ = writeln!(
            out,
            "#besovseq d={} jmin={} jmax={}",
            self.structure.d, J_MIN, self.structure.j_max
        );
        for (idx, v) in &self.entries {
            let _ = writeln!(out, "{}\t{}\t{}\t{}", idx.j, idx.channel, idx.lattice, format_coefficient(*v));
        }
    }

    pub fn from_text(text: &str) -> Result<Self> {
        parse_sequence_lines(text.lines().enumerate().map(|(i, l)| (i + 1, l)), None)
    }
}

/// 17 significant digits.
pub fn format_coefficient(v: f64) -> String {
    format!("{v:.16e}")
}

/// Parses a sequence body. Lines starting with `#` other than the header are
/// rejected unless `trailer` accepts them.
pub(crate) fn parse_sequence_lines<'a, I>(
    lines: I,
    mut trailer: Option<&mut dyn FnMut(usize, &str) -> Result<bool>>,
) -> Result<WeightedSequence>
where
    I: Iterator<Item = (usize, &'a str)>,
{
    let mut structure = None;
    let mut entries = Vec::new();
    for (line_no, raw) in lines {
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        if structure.is_none() {
            structure = Some(parse_header(line_no, line)?);
            continue;
        }
        if line.starts_with('#') {
            if let Some(cb) = trailer.as_mut() {
                if cb(line_no, line)? {
                    continue;
                }
            }
            return Err(Error::Parse { line: line_no, message: format!("unexpected directive '{line}'") });
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected 4 tab-separated fields, got {}", fields.len()),
            });
        }
        let bad = |what: &str| Error::Parse { line: line_no, message: format!("bad {what}") };
        let j: i32 = fields[0].trim().parse().map_err(|_| bad("level"))?;
        let channel: u32 = fields[1].trim().parse().map_err(|_| bad("channel"))?;
        let lattice: u64 = fields[2].trim().parse().map_err(|_| bad("lattice index"))?;
        let value: f64 = fields[3].trim().parse().map_err(|_| bad("coefficient"))?;
        let idx = Index::new(j, channel, lattice);
        let st: &LevelStructure = structure.as_ref().expect("header parsed");
        if !st.contains(&idx) {
            return Err(Error::Parse { line: line_no, message: format!("index {idx:?} outside the level structure") });
        }
        if !value.is_finite() {
            return Err(bad("coefficient"));
        }
        entries.push((idx, value));
    }
    let structure = structure.ok_or(Error::Parse { line: 1, message: "missing #besovseq header".into() })?;
    WeightedSequence::new(structure, entries)
}

fn parse_header(line_no: usize, line: &str) -> Result<LevelStructure> {
    let err = |m: &str| Error::Parse { line: line_no, message: m.to_string() };
    let mut tokens = line.split_whitespace();
    if tokens.next() != Some("#besovseq") {
        return Err(err("expected '#besovseq' header"));
    }
    let (mut d, mut jmin, mut jmax) = (None, None, None);
    for tok in tokens {
        let (key, value) = tok.split_once('=').ok_or_else(|| err("malformed header field"))?;
        match key {
            "d" => d = Some(value.parse::<u32>().map_err(|_| err("bad d"))?),
            "jmin" => jmin = Some(value.parse::<i32>().map_err(|_| err("bad jmin"))?),
            "jmax" => jmax = Some(value.parse::<i32>().map_err(|_| err("bad jmax"))?),
            _ => return Err(err("unknown header field")),
        }
    }
    let (d, jmin, jmax) = match (d, jmin, jmax) {
        (Some(d), Some(a), Some(b)) => (d, a, b),
        _ => return Err(err("header needs d, jmin and jmax")),
    };
    if jmin != J_MIN {
        return Err(err("only jmin=-1 is supported"));
    }
    cube_structure(d, jmax).map_err(|e| err(&e.to_string()))
}

/// `(Σ |x|^p)^{1/p}`, or `max |x|` for `p = ∞`.
pub fn lp_norm<I: IntoIterator<Item = f64>>(values: I, p: Exponent) -> f64 {
    match p {
        Exponent::Infinite => values.into_iter().fold(0.0, |m, v| m.max(v.abs())),
        Exponent::Finite(p) => {
            let mut acc = CompensatedSum::new();
            for v in values {
                let a = v.abs();
                if a != 0.0 {
                    acc.add(if p == 2.0 { a * a } else if p == 1.0 { a } else { a.powf(p) });
                }
            }
            let s = acc.value();
            if s == 0.0 {
                0.0
            } else if p == 1.0 {
                s
            } else if p == 2.0 {
                s.sqrt()
            } else {
                s.powf(1.0 / p)
            }
        }
    }
}

/// Outer `ℓ_q` over weighted level quasi-norms. `levels` yields `(j, ‖a_j‖_{ℓ_p})`.
pub fn combine_levels<I: IntoIterator<Item = (i32, f64)>>(levels: I, params: &SpaceParams) -> f64 {
    let exponent = params.level_exponent();
    let terms = levels
        .into_iter()
        .filter(|(_, v)| *v != 0.0)
        .map(|(j, v)| (weight_level(j) * exponent).exp2() * v);
    lp_norm(terms, params.q)
}

/// Norm of entries already grouped by level in ascending order.
pub(crate) fn norm_of_sorted<I>(entries: I, params: &SpaceParams) -> f64
where
    I: IntoIterator<Item = (i32, f64)>,
{
    let mut levels: Vec<(i32, f64)> = Vec::new();
    let mut current: Option<i32> = None;
    let mut bucket: Vec<f64> = Vec::new();
    for (j, v) in entries {
        if current != Some(j) {
            if let Some(cj) = current {
                levels.push((cj, lp_norm(bucket.drain(..), params.p)));
            }
            current = Some(j);
        }
        bucket.push(v);
    }
    if let Some(cj) = current {
        levels.push((cj, lp_norm(bucket.drain(..), params.p)));
    }
    combine_levels(levels, params)
}

/// `‖a‖_{b^s_{p,q}}`.
///
/// `(Σ_j 2^{j(s+d(1/2−1/p))q} (Σ_λ |a_{j,λ}|^p)^{q/p})^{1/q}` with sup-branches for
/// `p = ∞` or `q = ∞`; the scaling level `j = −1` carries weight `2^0`.
pub fn besov_seq_norm(a: &WeightedSequence, params: &SpaceParams) -> Result<f64> {
    params.check_dim(a.d())?;
    Ok(norm_of_sorted(a.entries.iter().map(|(i, v)| (i.j, *v)), params))
}

/// `L_σ a` with `(L_σ a)_{j,λ} = 2^{−σj} a_{j,λ}`, an isometry
/// `b^s_{p,q} → b^{s+σ}_{p,q}`.
pub fn scale_isomorphism(a: &WeightedSequence, sigma: f64) -> WeightedSequence {
    if sigma == 0.0 {
        return a.clone();
    }
    a.map_values(|idx, v| (-sigma * weight_level(idx.j)).exp2() * v)
}
