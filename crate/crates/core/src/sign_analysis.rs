//! Coefficient sequences: support, sign changes, the zero-count lower bound
//! they imply, gap profiles and the root-test regularity profile.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{parse_err, Error, Result};
use crate::lattice_sets::IndexSet;

/// Default relative support threshold.
pub const DEFAULT_SUPPORT_TOLERANCE: f64 = 1e-10;

/// Real coefficients `a_0..a_N` with a relative support threshold `τ`:
/// `a_m` counts as zero iff `|a_m| <= τ · max_k |a_k|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealSequence {
    values: Vec<f64>,
    support_tolerance: f64,
}

impl RealSequence {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(values, DEFAULT_SUPPORT_TOLERANCE)
    }

    pub fn with_tolerance(values: Vec<f64>, support_tolerance: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter("a sequence needs at least a_0".into()));
        }
        if let Some(m) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("a_{m} is not finite")));
        }
        if !(support_tolerance >= 0.0 && support_tolerance.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "support tolerance must be finite and non-negative, got {support_tolerance}"
            )));
        }
        Ok(Self {
            values,
            support_tolerance,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn support_tolerance(&self) -> f64 {
        self.support_tolerance
    }

    /// The last index `N`.
    pub fn degree(&self) -> u64 {
        self.values.len() as u64 - 1
    }

    fn threshold(&self) -> f64 {
        let max = self.values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        self.support_tolerance * max
    }

    fn support_iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        let max = self.values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        let thr = self.threshold();
        self.values
            .iter()
            .enumerate()
            .filter(move |(_, v)| max > 0.0 && v.abs() > thr)
            .map(|(m, &v)| (m as u64, v))
    }

    /// `{m : a_m ≠ 0}` under the support tolerance.
    pub fn support(&self) -> IndexSet {
        IndexSet::new(self.support_iter().map(|(m, _)| m).collect(), self.degree())
            .expect("support indices are increasing and bounded by N")
    }

    /// Parses the two-column `m,a_m` text format. Rows must list every index
    /// `0..=N` in order; an optional `m,a_m` header line is accepted.
    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut values = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if values.is_empty() && line.replace(' ', "") == "m,a_m" {
                continue;
            }
            let (m, a) = line
                .split_once(',')
                .ok_or_else(|| parse_err(line_no, "expected `m,a_m`"))?;
            let m: u64 = m
                .trim()
                .parse()
                .map_err(|_| parse_err(line_no, format!("bad index `{}`", m.trim())))?;
            if m != values.len() as u64 {
                return Err(parse_err(
                    line_no,
                    format!("expected index {}, found {m} (rows must be 0..N without gaps)", values.len()),
                ));
            }
            let a: f64 = a
                .trim()
                .parse()
                .map_err(|_| parse_err(line_no, format!("bad coefficient `{}`", a.trim())))?;
            if !a.is_finite() {
                return Err(parse_err(line_no, "coefficient is not finite"));
            }
            values.push(a);
        }
        if values.is_empty() {
            return Err(parse_err(1, "no coefficient rows"));
        }
        Self::new(values)
    }

    /// Writes `m,a_m` rows in shortest round-trip scientific notation.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("m,a_m\n");
        for (m, a) in self.values.iter().enumerate() {
            writeln!(out, "{m},{a:e}").unwrap();
        }
        out
    }
}

/// Places `m` at which a sign change occurs: some `k < m` has
/// `a_m a_k < 0` with every coefficient strictly between them zero.
pub fn sign_change_set(seq: &RealSequence) -> IndexSet {
    let mut prev_sign: Option<bool> = None;
    let mut changes = Vec::new();
    for (m, v) in seq.support_iter() {
        let positive = v > 0.0;
        if prev_sign.is_some_and(|p| p != positive) {
            changes.push(m);
        }
        prev_sign = Some(positive);
    }
    IndexSet::new(changes, seq.degree()).expect("sign changes are increasing")
}

/// `max(0, N - #sign changes)`: the minimum number of zeros on `[0, N]` of
/// any real-analytic `f` with `f(n) = (-1)^n a_n`.
pub fn lemma4_bound(seq: &RealSequence) -> u64 {
    seq.degree().saturating_sub(sign_change_set(seq).len() as u64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapPoint {
    pub m: u64,
    /// Support points in `(m, (1+r)m]`.
    pub count: u64,
    pub ratio: f64,
    pub gap_suspect: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapProfile {
    pub r: f64,
    /// Support density `|support| / (N+1)` that ratios are screened against.
    pub expected_density: f64,
    pub points: Vec<GapPoint>,
}

impl GapProfile {
    pub fn point(&self, m: u64) -> Option<&GapPoint> {
        self.points
            .binary_search_by_key(&m, |p| p.m)
            .ok()
            .map(|i| &self.points[i])
    }

    pub fn suspects(&self) -> impl Iterator<Item = &GapPoint> {
        self.points.iter().filter(|p| p.gap_suspect)
    }
}

/// For every support point `m >= 1` with `(1+r)m <= N`, the number of support
/// points in `(m, (1+r)m]` and its ratio to `r m`. Points whose ratio falls
/// below half the overall support density are flagged.
pub fn gap_profile(seq: &RealSequence, r: f64) -> Result<GapProfile> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidParameter(format!("gap profile needs r > 0, got {r}")));
    }
    let support = seq.support();
    let n = seq.degree() as f64;
    let expected_density = support.len() as f64 / (n + 1.0);
    let points = support
        .elements()
        .iter()
        .copied()
        .filter(|&m| m >= 1 && (1.0 + r) * m as f64 <= n)
        .map(|m| {
            let x = m as f64;
            let count = support.count_le((1.0 + r) * x) - support.count_le(x);
            let ratio = count as f64 / (r * x);
            GapPoint {
                m,
                count,
                ratio,
                gap_suspect: ratio < 0.5 * expected_density,
            }
        })
        .collect();
    Ok(GapProfile {
        r,
        expected_density,
        points,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityProfile {
    pub m_min: u64,
    /// `(m, |a_m|^{1/m})` over support points `m >= m_min`.
    pub points: Vec<(u64, f64)>,
    /// `max | |a_m|^{1/m} - 1 |` over the profile; 0 when empty.
    pub max_deviation: f64,
    /// Set when no support point lies at or beyond `m_min`.
    pub empty_tail: bool,
}

impl RegularityProfile {
    /// Largest deviation over profile points with `lo <= m <= hi`.
    pub fn max_deviation_in(&self, lo: u64, hi: u64) -> Option<f64> {
        self.points
            .iter()
            .filter(|(m, _)| (lo..=hi).contains(m))
            .map(|(_, v)| (v - 1.0).abs())
            .reduce(f64::max)
    }
}

/// `|a_m|^{1/m}`, computed as `exp(ln|a_m| / m)`, along the support tail.
pub fn regularity_profile(seq: &RealSequence, m_min: u64) -> Result<RegularityProfile> {
    if m_min < 1 {
        return Err(Error::InvalidParameter("m_min must be at least 1".into()));
    }
    let points: Vec<(u64, f64)> = seq
        .support_iter()
        .filter(|&(m, _)| m >= m_min)
        .map(|(m, v)| (m, (v.abs().ln() / m as f64).exp()))
        .collect();
    let max_deviation = points
        .iter()
        .map(|(_, v)| (v - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(RegularityProfile {
        m_min,
        empty_tail: points.is_empty(),
        points,
        max_deviation,
    })
}
