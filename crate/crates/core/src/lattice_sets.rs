//! Finite integer sets with a declared horizon, their counting function and
//! the windowed (Pólya) density estimators computed on them.
//!
//! All limiting quantities are replaced by finite-horizon estimates: a
//! [`DensityCurve`] records, for every window ratio `r`, the infimum and the
//! supremum of
//!
//! ```text
//!   (n((1+r)x) - n(x)) / (r x)
//! ```
//!
//! over a geometric grid of `x`. The scalar summaries are the values at the
//! smallest `r` of the grid, not extrapolated limits.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{parse_err, Error, Result};

/// Ratio of consecutive points of the `x` scan grid.
pub const X_GRID_RATIO: f64 = 1.01;

/// Default window ratios, largest first.
pub const DEFAULT_R_GRID: [f64; 6] = [0.5, 0.2, 0.1, 0.05, 0.02, 0.01];

/// Default lower bound on `r * x_lo`, the number of lattice points in the
/// narrowest window of the scan.
pub const DEFAULT_MIN_WINDOW_POINTS: f64 = 1000.0;

/// Spread of `n(x)/x` over the top decade below which the measurability
/// diagnostic reports convergence.
pub const MEASURABILITY_SPREAD: f64 = 0.02;

/// A finite, strictly increasing set of non-negative integers, valid up to
/// `horizon`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexSet {
    elements: Vec<u64>,
    horizon: u64,
}

/// Minimal period and residue pattern of a periodic set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Periodicity {
    pub period: u64,
    /// Residues in `0..period`, increasing.
    pub residues: Vec<u64>,
}

impl Periodicity {
    pub fn density(&self) -> f64 {
        self.residues.len() as f64 / self.period as f64
    }
}

impl IndexSet {
    pub fn new(elements: Vec<u64>, horizon: u64) -> Result<Self> {
        if let Some(w) = elements.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(format!(
                "elements must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        if let Some(&last) = elements.last() {
            if last > horizon {
                return Err(Error::InvalidParameter(format!(
                    "element {last} exceeds horizon {horizon}"
                )));
            }
        }
        Ok(Self { elements, horizon })
    }

    pub fn empty(horizon: u64) -> Self {
        Self {
            elements: Vec::new(),
            horizon,
        }
    }

    /// `{t ∈ 0..=horizon : keep(t)}`.
    pub fn from_predicate(horizon: u64, keep: impl Fn(u64) -> bool) -> Self {
        Self {
            elements: (0..=horizon).filter(|&t| keep(t)).collect(),
            horizon,
        }
    }

    /// `{t ∈ 0..=horizon : t mod period ∈ residues}`.
    pub fn periodic(period: u64, residues: &[u64], horizon: u64) -> Result<Self> {
        if period == 0 {
            return Err(Error::InvalidParameter("period must be positive".into()));
        }
        if let Some(r) = residues.iter().find(|&&r| r >= period) {
            return Err(Error::InvalidParameter(format!(
                "residue {r} is not below period {period}"
            )));
        }
        let mut mask = vec![false; period as usize];
        for &r in residues {
            mask[r as usize] = true;
        }
        Ok(Self::from_predicate(horizon, |t| mask[(t % period) as usize]))
    }

    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, t: u64) -> bool {
        self.elements.binary_search(&t).is_ok()
    }

    /// `#{t : t <= x}` without the horizon check.
    #[inline]
    pub(crate) fn count_le(&self, x: f64) -> u64 {
        self.elements.partition_point(|&t| (t as f64) <= x) as u64
    }

    /// `#{t : t < x}` for integer `x`.
    #[inline]
    pub(crate) fn count_below(&self, x: u64) -> u64 {
        self.elements.partition_point(|&t| t < x) as u64
    }

    /// The counting function `n(x) = #{t ∈ set : t ≤ x}`.
    pub fn counting(&self, x: f64) -> Result<u64> {
        if x.is_nan() || x < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "counting needs x >= 0, got {x}"
            )));
        }
        if x > self.horizon as f64 {
            return Err(Error::HorizonExceeded {
                requested: x,
                horizon: self.horizon,
            });
        }
        Ok(self.count_le(x))
    }

    /// `(n((1+r)x) - n(x)) / (r x)`.
    pub fn window_density(&self, x: f64, r: f64) -> Result<f64> {
        if !(x > 0.0 && r > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "window density needs x > 0 and r > 0, got x={x}, r={r}"
            )));
        }
        let upper = (1.0 + r) * x;
        if upper > self.horizon as f64 {
            return Err(Error::HorizonExceeded {
                requested: upper,
                horizon: self.horizon,
            });
        }
        Ok(self.window_count(x, r) as f64 / (r * x))
    }

    #[inline]
    fn window_count(&self, x: f64, r: f64) -> u64 {
        self.count_le((1.0 + r) * x) - self.count_le(x)
    }

    /// `{1..=horizon} \ self`. Zero is never part of the complement.
    pub fn complement(&self) -> IndexSet {
        let mut out = Vec::with_capacity((self.horizon as usize + 1).saturating_sub(self.len()));
        let mut it = self.elements.iter().peekable();
        for t in 1..=self.horizon {
            while it.next_if(|&&e| e < t).is_some() {}
            if it.next_if_eq(&&t).is_none() {
                out.push(t);
            }
        }
        IndexSet {
            elements: out,
            horizon: self.horizon,
        }
    }

    /// Membership bitmap over `0..=horizon`.
    pub(crate) fn bitmap(&self) -> Vec<bool> {
        let mut mask = vec![false; self.horizon as usize + 1];
        for &t in &self.elements {
            mask[t as usize] = true;
        }
        mask
    }

    /// Smallest period `p <= max_period` such that membership on
    /// `1..=horizon` is invariant under `t -> t + p`. The horizon must cover
    /// at least four periods for a period to be reported.
    pub fn minimal_period(&self, max_period: u64) -> Option<Periodicity> {
        let mask = self.bitmap();
        let h = self.horizon as usize;
        (1..=max_period as usize)
            .take_while(|&p| 4 * p <= h)
            .find(|&p| (1..=h - p).all(|t| mask[t] == mask[t + p]))
            .map(|p| Periodicity {
                period: p as u64,
                residues: (0..p as u64)
                    .filter(|&r| mask[if r == 0 { p } else { r as usize }])
                    .collect(),
            })
    }

    /// Spread of `n(x)/x` over the top decade of the horizon.
    pub fn measurability(&self) -> Measurability {
        let h = self.horizon as f64;
        let grid = geometric_grid((h / 10.0).max(1.0), h);
        let ratios: Vec<f64> = grid.iter().map(|&x| self.count_le(x) as f64 / x).collect();
        let (lo, hi) = min_max(&ratios);
        Measurability {
            density_at_horizon: if h > 0.0 { self.len() as f64 / h } else { 0.0 },
            spread: hi - lo,
            converged: hi - lo <= MEASURABILITY_SPREAD,
        }
    }

    /// Parses the set text format: a leading `# horizon=N` header followed by
    /// one decimal integer per line.
    pub fn parse(text: &str) -> Result<Self> {
        let (headers, set) = parse_set_text(text, &["horizon"])?;
        debug_assert!(headers.contains_key("horizon"));
        Ok(set)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("# horizon={}\n", self.horizon);
        for t in &self.elements {
            writeln!(out, "{t}").unwrap();
        }
        out
    }
}

/// Convergence diagnostic for `n(x)/x`; it does not decide measurability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Measurability {
    pub density_at_horizon: f64,
    pub spread: f64,
    pub converged: bool,
}

/// Parses header lines `# key=value` (only `allowed` keys, `horizon`
/// required) followed by strictly increasing integers.
pub(crate) fn parse_set_text(
    text: &str,
    allowed: &[&str],
) -> Result<(BTreeMap<String, String>, IndexSet)> {
    let mut headers = BTreeMap::new();
    let mut elements: Vec<u64> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if !elements.is_empty() {
                return Err(parse_err(line_no, "header after data"));
            }
            let (key, value) = rest
                .split_once('=')
                .ok_or_else(|| parse_err(line_no, "header must look like `# key=value`"))?;
            let key = key.trim();
            if !allowed.contains(&key) {
                return Err(parse_err(line_no, format!("unknown header key `{key}`")));
            }
            if headers.insert(key.to_string(), value.trim().to_string()).is_some() {
                return Err(parse_err(line_no, format!("duplicate header key `{key}`")));
            }
            continue;
        }
        let t: u64 = line
            .parse()
            .map_err(|_| parse_err(line_no, format!("expected a non-negative integer, got `{line}`")))?;
        if let Some(&prev) = elements.last() {
            if t <= prev {
                return Err(parse_err(line_no, format!("{t} does not exceed previous {prev}")));
            }
        }
        elements.push(t);
    }
    let horizon: u64 = headers
        .get("horizon")
        .ok_or_else(|| parse_err(1, "missing `# horizon=N` header"))?
        .parse()
        .map_err(|_| parse_err(1, "horizon must be a non-negative integer"))?;
    if let Some(&last) = elements.last() {
        if last > horizon {
            return Err(parse_err(
                text.lines().count(),
                format!("element {last} exceeds horizon {horizon}"),
            ));
        }
    }
    Ok((headers, IndexSet { elements, horizon }))
}

/// Window-density estimates over an `(r, x)` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityCurve {
    #[serde(rename = "r")]
    pub r_values: Vec<f64>,
    pub inf_window: Vec<f64>,
    pub sup_window: Vec<f64>,
    pub x_lo: f64,
    /// Upper end of the scanned `x` range, per `r`.
    pub x_hi: Vec<f64>,
    /// Infimum at the smallest `r`.
    #[serde(rename = "min_estimate")]
    pub scalar_min_estimate: f64,
    /// Supremum at the smallest `r`.
    #[serde(rename = "max_estimate")]
    pub scalar_max_estimate: f64,
}

/// `x_lo, x_lo·1.01, x_lo·1.01², …` up to `x_hi`, with `x_hi` appended.
pub(crate) fn geometric_grid(x_lo: f64, x_hi: f64) -> Vec<f64> {
    let mut grid = Vec::new();
    let mut k = 0i32;
    loop {
        let x = x_lo * X_GRID_RATIO.powi(k);
        if x >= x_hi {
            break;
        }
        grid.push(x);
        k += 1;
    }
    grid.push(x_hi);
    grid
}

fn min_max(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

/// Scans every `r` of `r_grid` over `x ∈ [x_lo, horizon/(1+r)]`.
pub fn density_curve(set: &IndexSet, r_grid: &[f64], x_lo: f64) -> Result<DensityCurve> {
    if r_grid.is_empty() {
        return Err(Error::InvalidParameter("r grid is empty".into()));
    }
    if r_grid.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
        return Err(Error::InvalidParameter("r grid must be positive".into()));
    }
    if r_grid.windows(2).any(|w| w[0] <= w[1]) {
        return Err(Error::InvalidParameter("r grid must be strictly decreasing".into()));
    }
    if !(x_lo >= 1.0) {
        return Err(Error::InvalidParameter(format!("x_lo must be >= 1, got {x_lo}")));
    }
    let h = set.horizon() as f64;
    let mut curve = DensityCurve {
        r_values: r_grid.to_vec(),
        inf_window: Vec::with_capacity(r_grid.len()),
        sup_window: Vec::with_capacity(r_grid.len()),
        x_lo,
        x_hi: Vec::with_capacity(r_grid.len()),
        scalar_min_estimate: 0.0,
        scalar_max_estimate: 0.0,
    };
    for &r in r_grid {
        let x_hi = h / (1.0 + r);
        if x_hi < x_lo {
            return Err(Error::InsufficientHorizon(format!(
                "no x in [{x_lo}, {x_hi}] fits a window with r={r} below horizon {}",
                set.horizon()
            )));
        }
        let densities: Vec<f64> = geometric_grid(x_lo, x_hi)
            .into_iter()
            .map(|x| set.window_count(x, r) as f64 / (r * x))
            .collect();
        let (lo, hi) = min_max(&densities);
        curve.inf_window.push(lo);
        curve.sup_window.push(hi);
        curve.x_hi.push(x_hi);
    }
    curve.scalar_min_estimate = *curve.inf_window.last().unwrap();
    curve.scalar_max_estimate = *curve.sup_window.last().unwrap();
    Ok(curve)
}

/// Parameters of the default density scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityOptions {
    pub r_grid: Vec<f64>,
    /// `None` means `horizon / 8`.
    pub x_lo: Option<f64>,
    pub min_window_points: f64,
}

impl Default for DensityOptions {
    fn default() -> Self {
        Self {
            r_grid: DEFAULT_R_GRID.to_vec(),
            x_lo: None,
            min_window_points: DEFAULT_MIN_WINDOW_POINTS,
        }
    }
}

impl DensityOptions {
    /// Effective `(r_grid, x_lo)`: ratios with `r·x_lo` below
    /// `min_window_points` are dropped, except that the largest ratio is always
    /// kept.
    pub fn resolve(&self, set: &IndexSet) -> (Vec<f64>, f64) {
        let x_lo = self
            .x_lo
            .unwrap_or_else(|| (set.horizon() as f64 / 8.0).max(1.0));
        let mut grid: Vec<f64> = self
            .r_grid
            .iter()
            .copied()
            .filter(|&r| r * x_lo >= self.min_window_points)
            .collect();
        if grid.is_empty() {
            if let Some(&first) = self.r_grid.first() {
                grid.push(first);
            }
        }
        (grid, x_lo)
    }
}

pub fn density_curve_with(set: &IndexSet, options: &DensityOptions) -> Result<DensityCurve> {
    let (grid, x_lo) = options.resolve(set);
    density_curve(set, &grid, x_lo)
}
