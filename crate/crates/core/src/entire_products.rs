//! The even canonical product `F(z) = ∏_{t∈S} (1 - z²/t²)` over a set `S` of
//! positive integers, evaluated by truncation at `T` plus a modelled tail.
//!
//! `log|F|` is accumulated in ascending `t` with block-compensated summation
//! (see [`crate::summation`]). Zeros beyond `T` are replaced by a tail term:
//!
//! * [`TailModel::Density`]: the continuum integral
//!   `ρ ∫_a^∞ log(1 - z²/t²) dt = -ρ a Σ_k (z²/a²)^k / (k(2k-1))`, anchored at
//!   `a = max(t_last + 1/(2ρ), T + 1 - 1/(2ρ))` where `t_last` is the last
//!   zero `<= T`.
//!   For integer-spaced zero sets this is the midpoint rule and the error is
//!   `O(ρ|z|²/T³)`.
//! * [`TailModel::Periodic`]: the exact power sums `Σ_{t>T, t∈S} t^{-2k}` of an
//!   eventually periodic `S` through the Hurwitz zeta function.
//!
//! Every evaluation at `z` requires `T >= 20|z|`, so each neglected factor has
//! `|z²/t²| <= 1/400`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice_sets::{parse_set_text, IndexSet, Periodicity};
use crate::summation::{block_sum, DoubleDouble};

/// Required ratio `T / |z|`.
pub const TRUNCATION_RATIO: f64 = 20.0;

/// Largest period considered when detecting periodic zero sets.
pub const MAX_DETECTED_PERIOD: u64 = 64;

/// Number of radii in an indicator scan.
pub const INDICATOR_GRID_LEN: usize = 128;

/// Points closer than this to `±S` are excluded from indicator scans.
pub const ZERO_EXCLUSION_RADIUS: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum TailModel {
    /// Zeros beyond `T` have asymptotic density `ρ`.
    Density { density: f64 },
    /// Zeros beyond `T` continue the given residue pattern exactly.
    Periodic(Periodicity),
}

impl TailModel {
    pub fn density(&self) -> f64 {
        match self {
            TailModel::Density { density } => *density,
            TailModel::Periodic(p) => p.density(),
        }
    }
}

/// Zero set, truncation and tail model of `F`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductSpec {
    zeros: IndexSet,
    tail: TailModel,
    truncation: u64,
    /// Number of zeros `<= truncation`.
    active: usize,
}

impl ProductSpec {
    pub fn new(zeros: IndexSet, tail_density: f64, truncation: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&tail_density) {
            return Err(Error::InvalidParameter(format!(
                "tail density must lie in [0, 1], got {tail_density}"
            )));
        }
        Self::build(zeros, TailModel::Density { density: tail_density }, truncation)
    }

    /// Exact periodic tail; `zeros` must follow `pattern` on `1..=horizon`.
    pub fn with_periodic_tail(zeros: IndexSet, pattern: Periodicity, truncation: u64) -> Result<Self> {
        if pattern.period == 0 || pattern.residues.iter().any(|&r| r >= pattern.period) {
            return Err(Error::InvalidParameter("malformed residue pattern".into()));
        }
        let mask = zeros.bitmap();
        let p = pattern.period;
        if let Some(t) = (1..=zeros.horizon()).find(|&t| mask[t as usize] != pattern.residues.contains(&(t % p))) {
            return Err(Error::InvalidParameter(format!(
                "zero set departs from the period-{p} pattern at {t}"
            )));
        }
        Self::build(zeros, TailModel::Periodic(pattern), truncation)
    }

    /// Periodic tail when the zero set is periodic with period at most
    /// [`MAX_DETECTED_PERIOD`], density tail `density` otherwise.
    pub fn detect_tail(zeros: IndexSet, fallback_density: f64, truncation: u64) -> Result<Self> {
        match zeros.minimal_period(MAX_DETECTED_PERIOD) {
            Some(p) => Self::with_periodic_tail(zeros, p, truncation),
            None => Self::new(zeros, fallback_density, truncation),
        }
    }

    fn build(zeros: IndexSet, tail: TailModel, truncation: u64) -> Result<Self> {
        if zeros.elements().first() == Some(&0) {
            return Err(Error::InvalidParameter(
                "0 cannot be a zero of F (F(0) = 1)".into(),
            ));
        }
        if truncation > zeros.horizon() {
            return Err(Error::InvalidParameter(format!(
                "truncation {truncation} exceeds the zero-set horizon {}",
                zeros.horizon()
            )));
        }
        if truncation == 0 && tail.density() > 0.0 {
            return Err(Error::InvalidParameter(
                "a positive tail density needs truncation >= 1".into(),
            ));
        }
        let active = zeros.elements().partition_point(|&t| t <= truncation);
        Ok(Self {
            zeros,
            tail,
            truncation,
            active,
        })
    }

    pub fn zeros(&self) -> &IndexSet {
        &self.zeros
    }

    pub fn tail(&self) -> &TailModel {
        &self.tail
    }

    pub fn tail_density(&self) -> f64 {
        self.tail.density()
    }

    pub fn truncation(&self) -> u64 {
        self.truncation
    }

    fn active_zeros(&self) -> &[u64] {
        &self.zeros.elements()[..self.active]
    }

    fn check_truncation(&self, radius: f64) -> Result<()> {
        let required = TRUNCATION_RATIO * radius;
        // a few ulps of slack so that |t·e^{iθ}| = t survives rounding
        if !(self.truncation as f64 >= required * (1.0 - 1e-14)) {
            return Err(Error::TruncationInsufficient {
                truncation: self.truncation,
                required,
            });
        }
        Ok(())
    }

    fn is_listed_zero(&self, z: Complex64) -> bool {
        if z.im != 0.0 {
            return false;
        }
        let x = z.re.abs();
        x.fract() == 0.0 && x <= self.truncation as f64 && x >= 1.0 && self.zeros.contains(x as u64)
    }

    /// Tail contribution `Σ_{t>T, t∈S} log|1 - z²/t²|` under the tail model.
    pub fn tail_term(&self, z: Complex64) -> f64 {
        match &self.tail {
            TailModel::Density { density } => density_tail(*density, self.tail_anchor(*density), z),
            TailModel::Periodic(p) => periodic_tail(p, self.truncation, z),
        }
    }

    fn tail_anchor(&self, density: f64) -> f64 {
        let t = self.truncation as f64;
        match self.active_zeros().last() {
            Some(&last) if density > 0.0 => {
                (last as f64 + 0.5 / density).max(t + 1.0 - 0.5 / density)
            }
            _ => t,
        }
    }

    /// Bound on the density-tail error for zero sets that are locally
    /// equispaced with spacing `1/ρ`: the midpoint-rule remainder
    /// `|z|²/(12 ρ a³)`, doubled to cover the higher-order terms. Zero for the
    /// exact periodic tail.
    pub fn tail_error_bound(&self, z: Complex64) -> f64 {
        match &self.tail {
            TailModel::Density { density } if *density > 0.0 => {
                let a = self.tail_anchor(*density);
                z.norm_sqr() / (6.0 * density * a.powi(3))
            }
            _ => 0.0,
        }
    }

    /// `|density tail - exact periodic tail|` at `z` when the zero set is
    /// periodic, i.e. the error of substituting the asserted density for the
    /// actual tail.
    pub fn density_tail_discrepancy(&self, z: Complex64) -> Option<f64> {
        let pattern = self.zeros.minimal_period(MAX_DETECTED_PERIOD)?;
        let rho = self.tail_density();
        let modelled = density_tail(rho, self.tail_anchor(rho), z);
        Some((modelled - periodic_tail(&pattern, self.truncation, z)).abs())
    }

    /// `log|F(z)|`; `-∞` exactly at a listed zero.
    pub fn eval_log_abs(&self, z: Complex64) -> Result<f64> {
        self.check_truncation(z.norm())?;
        if self.is_listed_zero(z) {
            return Ok(f64::NEG_INFINITY);
        }
        let head = block_sum(self.active_zeros().iter().map(|&t| log_abs_factor(t as f64, z)));
        Ok(head + self.tail_term(z))
    }

    /// `F(m)` as a signed real: exactly 0 on `S`, otherwise with sign
    /// `(-1)^{#(S ∩ (0, m))}` and magnitude `exp(log|F(m)|)`.
    pub fn eval_at_integer(&self, m: u64) -> Result<f64> {
        let log_abs = self.eval_log_abs(Complex64::new(m as f64, 0.0))?;
        if log_abs == f64::NEG_INFINITY {
            return Ok(0.0);
        }
        Ok(self.integer_sign(m) * log_abs.exp())
    }

    fn integer_sign(&self, m: u64) -> f64 {
        if self.zeros.count_below(m).is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }

    /// `F(0), F(1), …, F(n)`. With an exact periodic tail the head sums come
    /// from per-residue prefix sums of `ln u` in double-double precision, which
    /// costs `O(T + n·k)` instead of `O(n·T)`.
    pub fn eval_at_integers(&self, n: u64) -> Result<Vec<f64>> {
        self.check_truncation(n as f64)?;
        match &self.tail {
            TailModel::Periodic(pattern) => Ok(self.periodic_integer_values(pattern, n)),
            TailModel::Density { .. } => (0..=n).map(|m| self.eval_at_integer(m)).collect(),
        }
    }

    fn periodic_integer_values(&self, pattern: &Periodicity, n: u64) -> Vec<f64> {
        let p = pattern.period;
        let t = self.truncation;
        let table = ResiduePrefix::new(p, t + n);
        let mut out = Vec::with_capacity(n as usize + 1);
        for m in 0..=n {
            if m >= 1 && pattern.residues.contains(&(m % p)) {
                out.push(0.0);
                continue;
            }
            let mut acc = DoubleDouble::default();
            for &r in &pattern.residues {
                let shifted = (r + m) % p;
                acc = acc.add_dd(table.sum(shifted, t + m));
                acc = acc.sub_dd(table.sum(shifted, m));
                if m >= 1 {
                    acc = acc.add_dd(table.sum((m + p - r % p) % p, m - 1));
                }
                if t >= m {
                    acc = acc.add_dd(table.sum((r + p - m % p) % p, t - m));
                }
                let own = table.sum(r, t);
                acc = acc.sub_dd(own).sub_dd(own);
            }
            let log_abs = acc.hi + acc.lo + self.tail_term(Complex64::new(m as f64, 0.0));
            out.push(self.integer_sign(m) * log_abs.exp());
        }
        out
    }

    /// `u_m(z) = log|F(m z)| / m`.
    pub fn scaled_log_modulus(&self, m: u64, z: Complex64) -> Result<f64> {
        if m == 0 {
            return Err(Error::InvalidParameter("scale m must be positive".into()));
        }
        Ok(self.eval_log_abs(z * m as f64)? / m as f64)
    }

    /// Samples `log|F(t e^{iθ})| / t` on a geometric grid of radii in
    /// `[1, t_max]`, skipping points within 1/4 of `±S`. The estimate is the
    /// maximum over radii `t >= t_max / 2`.
    pub fn indicator_estimate(&self, theta: f64, t_max: f64) -> Result<IndicatorSample> {
        if !(t_max >= 2.0 && t_max.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "indicator scan needs t_max >= 2, got {t_max}"
            )));
        }
        self.check_truncation(t_max)?;
        let theta = normalize_angle(theta);
        let direction = Complex64::from_polar(1.0, theta);
        let ratio = t_max.powf(1.0 / (INDICATOR_GRID_LEN - 1) as f64);
        let mut t_grid = Vec::with_capacity(INDICATOR_GRID_LEN);
        let mut values = Vec::with_capacity(INDICATOR_GRID_LEN);
        for k in 0..INDICATOR_GRID_LEN {
            let t = if k + 1 == INDICATOR_GRID_LEN { t_max } else { ratio.powi(k as i32) };
            let z = direction * t;
            if self.distance_to_zeros(z) < ZERO_EXCLUSION_RADIUS {
                continue;
            }
            t_grid.push(t);
            values.push(self.eval_log_abs(z)? / t);
        }
        let t_lo = t_max / 2.0;
        let estimate = t_grid
            .iter()
            .zip(&values)
            .filter(|(&t, _)| t >= t_lo)
            .map(|(_, &v)| v)
            .fold(f64::NEG_INFINITY, f64::max);
        Ok(IndicatorSample {
            theta,
            t_grid,
            values,
            estimate,
            expected: PI * self.tail_density() * theta.sin().abs(),
            slack: indicator_slack(t_lo),
        })
    }

    fn distance_to_zeros(&self, z: Complex64) -> f64 {
        let x = z.re.abs();
        let elements = self.zeros.elements();
        let i = elements.partition_point(|&t| (t as f64) < x);
        let mut best = f64::INFINITY;
        for j in [i.wrapping_sub(1), i] {
            if let Some(&t) = elements.get(j) {
                best = best.min((x - t as f64).hypot(z.im));
            }
        }
        best
    }

    /// `#(S ∩ [c, d])`: the real zeros of `F` in `[c, d]`, all simple.
    pub fn zero_count_interval(&self, c: f64, d: f64) -> Result<u64> {
        if !(0.0 <= c && c <= d) {
            return Err(Error::InvalidParameter(format!(
                "zero count needs 0 <= c <= d, got [{c}, {d}]"
            )));
        }
        if d > self.zeros.horizon() as f64 {
            return Err(Error::HorizonExceeded {
                requested: d,
                horizon: self.zeros.horizon(),
            });
        }
        let elements = self.zeros.elements();
        let below_c = elements.partition_point(|&t| (t as f64) < c);
        Ok(self.zeros.count_le(d) - below_c as u64)
    }

    /// `#(S ∩ [m, (1+r)m]) / m`, to be compared with `ρ r`.
    pub fn scaled_zero_count(&self, m: u64, r: f64) -> Result<f64> {
        if m == 0 || !(r > 0.0) {
            return Err(Error::InvalidParameter("scaled zero count needs m >= 1, r > 0".into()));
        }
        let x = m as f64;
        Ok(self.zero_count_interval(x, (1.0 + r) * x)? as f64 / x)
    }

    /// Parses a zero-set file with `# tail_density=ρ` and `# truncation=T`
    /// headers. `# tail_mode=periodic` selects the exact periodic tail (the
    /// pattern is detected from the listed zeros).
    pub fn parse(text: &str) -> Result<Self> {
        let (headers, zeros) = parse_set_text(
            text,
            &["horizon", "tail_density", "truncation", "tail_mode"],
        )?;
        let truncation = match headers.get("truncation") {
            Some(v) => v.parse().map_err(|_| Error::Parse {
                line: 1,
                message: format!("truncation must be a non-negative integer, got `{v}`"),
            })?,
            None => zeros.horizon(),
        };
        let density = match headers.get("tail_density") {
            Some(v) => v.parse::<f64>().map_err(|_| Error::Parse {
                line: 1,
                message: format!("tail_density must be a real number, got `{v}`"),
            })?,
            None => 0.0,
        };
        match headers.get("tail_mode").map(String::as_str) {
            None | Some("density") => Self::new(zeros, density, truncation),
            Some("periodic") => {
                let pattern = zeros.minimal_period(MAX_DETECTED_PERIOD).ok_or_else(|| {
                    Error::InvalidParameter("tail_mode=periodic but the zero set is not periodic".into())
                })?;
                Self::with_periodic_tail(zeros, pattern, truncation)
            }
            Some(other) => Err(Error::Parse {
                line: 1,
                message: format!("unknown tail_mode `{other}`"),
            }),
        }
    }

    pub fn to_text(&self) -> String {
        let mut head = format!("# tail_density={}\n# truncation={}\n", self.tail_density(), self.truncation);
        if matches!(self.tail, TailModel::Periodic(_)) {
            head.push_str("# tail_mode=periodic\n");
        }
        head + &self.zeros.to_text()
    }
}

/// `log|F(t e^{iθ})|/t` along one ray.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorSample {
    pub theta: f64,
    #[serde(rename = "t")]
    pub t_grid: Vec<f64>,
    #[serde(rename = "value")]
    pub values: Vec<f64>,
    pub estimate: f64,
    /// `π ρ |sin θ|`, the indicator of a product with zero density `ρ`.
    pub expected: f64,
    /// Allowance for the `O(log t)/t` terms at the sampled radii.
    pub slack: f64,
}

impl IndicatorSample {
    pub fn within_bound(&self) -> bool {
        self.estimate <= self.expected + self.slack
    }
}

/// `(2 + 2 ln(1 + t)) / t`: room for a `t^c` factor with `c <= 2` at the
/// smallest sampled radius. Periodic products with residues `R` mod `p` carry
/// `c = Σ_{r∈R} (1 - 2r/p)`, which is at most 1.5 for `p <= 8`.
pub fn indicator_slack(t_lo: f64) -> f64 {
    (2.0 + 2.0 * t_lo.ln_1p()) / t_lo
}

/// Maps an angle to `(-π, π]`.
pub fn normalize_angle(theta: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut a = theta.rem_euclid(two_pi);
    if a > PI {
        a -= two_pi;
    }
    a
}

/// `log|1 - z²/t²|`, even in `z` and invariant under conjugation bit for bit.
#[inline]
fn log_abs_factor(t: f64, z: Complex64) -> f64 {
    let wr = z.re / t;
    let wi = z.im / t;
    let ur = wr * wr - wi * wi;
    let ui = 2.0 * wr * wi;
    let u2 = ur * ur + ui * ui;
    if u2 < 0.0625 {
        0.5 * (u2 - 2.0 * ur).ln_1p()
    } else {
        let y2 = z.im * z.im;
        let minus = (t - z.re) * (t - z.re) + y2;
        let plus = (t + z.re) * (t + z.re) + y2;
        0.5 * (minus.ln() + plus.ln()) - 2.0 * t.ln()
    }
}

fn density_tail(density: f64, anchor: f64, z: Complex64) -> f64 {
    if density == 0.0 {
        return 0.0;
    }
    let u = z * z / (anchor * anchor);
    let mut power = u;
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 1..=40u32 {
        let kf = k as f64;
        let term = power / (kf * (2.0 * kf - 1.0));
        sum += term;
        if term.norm() <= 1e-18 * sum.norm() {
            break;
        }
        power *= u;
    }
    -density * anchor * sum.re
}

fn periodic_tail(pattern: &Periodicity, truncation: u64, z: Complex64) -> f64 {
    let p = pattern.period;
    let u = z * z;
    if u.norm() == 0.0 || pattern.residues.is_empty() {
        return 0.0;
    }
    let firsts: Vec<f64> = pattern
        .residues
        .iter()
        .map(|&r| {
            let next = truncation + 1;
            (next + (r + p - next % p) % p) as f64
        })
        .collect();
    let pf = p as f64;
    let mut power = Complex64::new(1.0, 0.0);
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 1..=40u32 {
        power *= u;
        let s = 2.0 * k as f64;
        let h: f64 = firsts.iter().map(|&a| hurwitz_zeta(s, a / pf)).sum::<f64>() * pf.powf(-s);
        let term = power * (h / k as f64);
        sum += term;
        if term.norm() <= 1e-18 * sum.norm() {
            break;
        }
    }
    -sum.re
}

/// `ζ(s, q) = Σ_{j>=0} (q + j)^{-s}` for `s > 1`, `q > 0`, by direct summation
/// up to `q + J >= max(10, s)` followed by Euler–Maclaurin.
pub(crate) fn hurwitz_zeta(s: f64, q: f64) -> f64 {
    const B2K_OVER_FACT: [f64; 6] = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30240.0,
        -1.0 / 1209600.0,
        1.0 / 47900160.0,
        -691.0 / 1307674368000.0,
    ];
    let target = s.max(10.0);
    let mut head = 0.0;
    let mut q = q;
    while q < target {
        head += q.powf(-s);
        q += 1.0;
    }
    let mut tail = q.powf(1.0 - s) / (s - 1.0) + 0.5 * q.powf(-s);
    // rising factorial s(s+1)…(s+2i-2) times q^{-s-2i+1}
    let mut factor = s * q.powf(-s - 1.0);
    for (i, b) in B2K_OVER_FACT.iter().enumerate() {
        tail += b * factor;
        let i = i as f64;
        factor *= (s + 2.0 * i + 1.0) * (s + 2.0 * i + 2.0) / (q * q);
    }
    head + tail
}

/// `P(x) = Σ_{1<=u<=x, u ≡ x (mod p)} ln u` for `x <= limit`, stored in
/// double-double precision so that differences keep full accuracy.
struct ResiduePrefix {
    period: u64,
    prefix: Vec<DoubleDouble>,
}

impl ResiduePrefix {
    fn new(period: u64, limit: u64) -> Self {
        let mut prefix = vec![DoubleDouble::default(); limit as usize + 1];
        for x in 1..=limit as usize {
            let base = if x > period as usize { prefix[x - period as usize] } else { DoubleDouble::default() };
            prefix[x] = base.add_f64((x as f64).ln());
        }
        Self { period, prefix }
    }

    /// `Σ_{1<=u<=x, u ≡ residue (mod p)} ln u`.
    fn sum(&self, residue: u64, x: u64) -> DoubleDouble {
        let p = self.period;
        let back = (x + p - residue % p) % p;
        if back > x || x - back == 0 {
            return DoubleDouble::default();
        }
        self.prefix[(x - back) as usize]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn naturals(h: u64) -> IndexSet {
        IndexSet::from_predicate(h, |t| t > 0)
    }

    fn odds(h: u64) -> IndexSet {
        IndexSet::from_predicate(h, |t| t % 2 == 1)
    }

    /// `log|sin(πz)/(πz)|` from `|sin(x+iy)|² = sin²x + sinh²y`.
    fn log_sinc(z: Complex64) -> f64 {
        let (x, y) = (PI * z.re, PI * z.im);
        0.5 * (x.sin().powi(2) + y.sinh().powi(2)).ln() - (PI * z.norm()).ln()
    }

    /// `log|cos(πz/2)|` from `|cos(x+iy)|² = cos²x + sinh²y`.
    fn log_cos_half(z: Complex64) -> f64 {
        let (x, y) = (PI * z.re / 2.0, PI * z.im / 2.0);
        0.5 * (x.cos().powi(2) + y.sinh().powi(2)).ln()
    }

    #[test]
    fn sinc_at_one_half() {
        let spec = ProductSpec::new(naturals(10_000), 1.0, 10_000).unwrap();
        let got = spec.eval_log_abs(Complex64::new(0.5, 0.0)).unwrap();
        assert!((got - (2.0 / PI).ln()).abs() <= 1e-6, "{got}");
    }

    #[test]
    fn sinc_at_i_matches_high_precision_value() {
        // log(sinh(π)/π) evaluated to 30 digits offline
        const EXPECTED: f64 = 1.301_846_398_603_712_677_770_433_663_01;
        let spec = ProductSpec::new(naturals(10_000), 1.0, 10_000).unwrap();
        let got = spec.eval_log_abs(Complex64::new(0.0, 1.0)).unwrap();
        assert!((got - EXPECTED).abs() <= 1e-9, "{got}");
    }

    #[test]
    fn listed_zero_is_negative_infinity() {
        let spec = ProductSpec::new(odds(1000), 0.5, 1000).unwrap();
        assert_eq!(spec.eval_log_abs(Complex64::new(7.0, 0.0)).unwrap(), f64::NEG_INFINITY);
        assert_eq!(spec.eval_log_abs(Complex64::new(-7.0, 0.0)).unwrap(), f64::NEG_INFINITY);
        assert!(spec.eval_log_abs(Complex64::new(8.0, 0.0)).unwrap().is_finite());
    }

    #[test]
    fn truncation_rule_is_enforced() {
        let spec = ProductSpec::new(odds(1000), 0.5, 100).unwrap();
        assert!(spec.eval_log_abs(Complex64::new(5.0, 0.0)).is_ok());
        assert!(matches!(
            spec.eval_log_abs(Complex64::new(3.0, 4.0 + 1e-9)),
            Err(Error::TruncationInsufficient { truncation: 100, .. })
        ));
        assert!(spec.eval_at_integer(6).is_err());
    }

    #[test]
    fn construction_errors() {
        assert!(ProductSpec::new(IndexSet::new(vec![0, 1], 10).unwrap(), 0.5, 10).is_err());
        assert!(ProductSpec::new(odds(10), 1.5, 10).is_err());
        assert!(ProductSpec::new(odds(10), 0.5, 11).is_err());
        let bad = Periodicity { period: 2, residues: vec![0] };
        assert!(ProductSpec::with_periodic_tail(odds(100), bad, 100).is_err());
    }

    #[test]
    fn integer_values_for_odd_zeros() {
        let spec = ProductSpec::new(odds(10_000), 0.5, 10_000).unwrap();
        assert!((spec.eval_at_integer(2).unwrap() + 1.0).abs() <= 1e-6);
        assert_eq!(spec.eval_at_integer(3).unwrap(), 0.0);
        assert!((spec.eval_at_integer(4).unwrap() - 1.0).abs() <= 1e-6);
        assert!((spec.eval_at_integer(0).unwrap() - 1.0).abs() <= 1e-15);
    }

    #[test]
    fn empty_product_is_one() {
        let spec = ProductSpec::new(IndexSet::empty(100), 0.0, 100).unwrap();
        for m in 0..=5 {
            assert_eq!(spec.eval_at_integer(m).unwrap(), 1.0);
        }
        assert_eq!(spec.eval_at_integers(5).unwrap(), vec![1.0; 6]);
    }

    #[test]
    fn integer_sign_matches_direct_signed_product() {
        let zeros = IndexSet::from_predicate(4000, |t| t > 0 && (t % 3 == 1 || t % 7 == 2));
        let spec = ProductSpec::new(zeros.clone(), 3.0 / 7.0, 4000).unwrap();
        for m in 0..=200u64 {
            let direct: f64 = zeros
                .elements()
                .iter()
                .map(|&t| 1.0 - (m * m) as f64 / (t * t) as f64)
                .map(f64::signum)
                .product();
            let got = spec.eval_at_integer(m).unwrap();
            if zeros.contains(m) {
                assert_eq!(got, 0.0);
            } else {
                assert_eq!(got.signum(), direct, "m={m}");
            }
        }
    }

    #[test]
    fn periodic_batch_agrees_with_direct_evaluation() {
        for (p, res) in [(2u64, vec![1u64]), (3, vec![0, 2]), (5, vec![1, 4]), (8, vec![0, 3, 5, 6])] {
            let zeros = IndexSet::from_predicate(6000, |t| t > 0 && res.contains(&(t % p)));
            let pattern = zeros.minimal_period(64).unwrap();
            let spec = ProductSpec::with_periodic_tail(zeros, pattern, 6000).unwrap();
            let batch = spec.eval_at_integers(300).unwrap();
            for m in (0..=300u64).step_by(7) {
                let single = spec.eval_at_integer(m).unwrap();
                let b = batch[m as usize];
                assert!((b - single).abs() <= 1e-11 * single.abs().max(1e-300) || b == single, "p={p} m={m}: {b} vs {single}");
            }
        }
    }

    #[test]
    fn periodic_tail_matches_long_truncation() {
        // the exact tail at T=200 should reproduce a head sum carried to 10^6
        let zeros = IndexSet::from_predicate(1_000_000, |t| t % 6 == 1 || t % 6 == 4);
        let z = Complex64::new(3.3, 1.7);
        let long = ProductSpec::new(zeros.clone(), 1.0 / 3.0, 1_000_000).unwrap();
        let short_zeros = IndexSet::from_predicate(200, |t| t % 6 == 1 || t % 6 == 4);
        let pattern = short_zeros.minimal_period(64).unwrap();
        let short = ProductSpec::with_periodic_tail(short_zeros, pattern, 200).unwrap();
        let a = long.eval_log_abs(z).unwrap();
        let b = short.eval_log_abs(z).unwrap();
        assert!((a - b).abs() <= 1e-9, "{a} vs {b}");
    }

    #[test]
    fn hurwitz_zeta_known_values() {
        // ζ(2,1) = π²/6, ζ(4,1) = π⁴/90, ζ(2,1/2) = π²/2
        assert!((hurwitz_zeta(2.0, 1.0) - PI * PI / 6.0).abs() < 1e-14);
        assert!((hurwitz_zeta(4.0, 1.0) - PI.powi(4) / 90.0).abs() < 1e-14);
        assert!((hurwitz_zeta(2.0, 0.5) - PI * PI / 2.0).abs() < 1e-13);
        let direct: f64 = (0..200_000).rev().map(|j| (3.7f64 + j as f64).powi(-6)).sum();
        assert!((hurwitz_zeta(6.0, 3.7) / direct - 1.0).abs() < 1e-13);
        let direct: f64 = (0..200_000).rev().map(|j| (1234.5f64 + j as f64).powi(-6)).sum::<f64>()
            + (201_234.5f64).powi(-5) / 5.0;
        assert!((hurwitz_zeta(6.0, 1234.5) / direct - 1.0).abs() < 1e-12);
    }

    #[test]
    fn density_tail_discrepancy_is_small_for_periodic_sets() {
        let spec = ProductSpec::new(odds(4000), 0.5, 4000).unwrap();
        let d = spec.density_tail_discrepancy(Complex64::new(150.0, 20.0)).unwrap();
        assert!(d < 1e-6, "{d}");
        let aperiodic = IndexSet::from_predicate(500, |t| t > 0 && (t as f64).sqrt().fract() < 0.5);
        let spec = ProductSpec::new(aperiodic, 0.5, 500).unwrap();
        assert!(spec.density_tail_discrepancy(Complex64::new(1.0, 0.0)).is_none());
    }

    #[test]
    fn indicator_along_imaginary_axis() {
        let spec = ProductSpec::new(naturals(40_000), 1.0, 40_000).unwrap();
        let s = spec.indicator_estimate(PI / 2.0, 2000.0).unwrap();
        assert!((s.estimate - PI).abs() <= 1e-2, "{}", s.estimate);
        assert!(s.within_bound());

        let spec = ProductSpec::new(odds(20_000), 0.5, 20_000).unwrap();
        let s = spec.indicator_estimate(PI / 2.0, 1000.0).unwrap();
        assert!((s.estimate - PI / 2.0).abs() <= 1e-2, "{}", s.estimate);
    }

    #[test]
    fn indicator_vanishes_on_the_real_axis() {
        for zeros in [naturals(20_000), odds(20_000)] {
            let rho = zeros.minimal_period(8).unwrap().density();
            let spec = ProductSpec::new(zeros.clone(), rho, 20_000).unwrap();
            let s = spec.indicator_estimate(0.0, 1000.0).unwrap();
            assert!(s.estimate <= 1e-2, "{}", s.estimate);
            assert!(s.t_grid.iter().all(|&t| {
                zeros.elements().iter().all(|&z| (t - z as f64).abs() >= 0.25)
            }));
        }
    }

    #[test]
    fn indicator_respects_bound_for_periodic_products() {
        for (p, res) in [(3u64, vec![1u64]), (4, vec![0, 1, 3]), (5, vec![2]), (8, vec![1, 2, 3, 4])] {
            let zeros = IndexSet::from_predicate(20_000, |t| t > 0 && res.contains(&(t % p)));
            let pattern = zeros.minimal_period(64).unwrap();
            let spec = ProductSpec::with_periodic_tail(zeros, pattern, 20_000).unwrap();
            for k in -6..=6 {
                let theta = k as f64 * PI / 6.0 + 0.1;
                let s = spec.indicator_estimate(theta, 1000.0).unwrap();
                assert!(s.within_bound(), "p={p} θ={theta}: {} > {} + {}", s.estimate, s.expected, s.slack);
            }
        }
    }

    #[test]
    fn scaled_log_modulus_examples() {
        let spec = ProductSpec::new(odds(100_000), 0.5, 100_000).unwrap();
        assert_eq!(spec.scaled_log_modulus(1000, Complex64::new(0.0, 0.0)).unwrap(), 0.0);
        let u = spec.scaled_log_modulus(1000, Complex64::new(0.0, 1.0)).unwrap();
        assert!((u - PI / 2.0).abs() <= 1e-3, "{u}");
        // lattice-avoiding real point: 1000·x sits 1/2 away from the odd lattice
        let u = spec.scaled_log_modulus(1000, Complex64::new(2.0, 0.0)).unwrap();
        assert!(u.abs() <= 1e-2);
        assert!(spec.scaled_log_modulus(0, Complex64::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn zero_counts() {
        let spec = ProductSpec::new(odds(2000), 0.5, 2000).unwrap();
        assert_eq!(spec.zero_count_interval(10.0, 20.0).unwrap(), 5);
        assert_eq!(spec.zero_count_interval(11.0, 11.0).unwrap(), 1);
        assert_eq!(spec.scaled_zero_count(1000, 0.1).unwrap(), 0.05);
        assert!(spec.zero_count_interval(5.0, 2001.0).is_err());
        assert!(spec.zero_count_interval(5.0, 4.0).is_err());
    }

    #[test]
    fn text_round_trip() {
        let spec = ProductSpec::new(odds(50), 0.5, 40).unwrap();
        assert_eq!(ProductSpec::parse(&spec.to_text()).unwrap(), spec);
        let periodic = ProductSpec::detect_tail(odds(50), 0.5, 40).unwrap();
        assert!(matches!(periodic.tail(), TailModel::Periodic(_)));
        assert_eq!(ProductSpec::parse(&periodic.to_text()).unwrap(), periodic);
        assert!(ProductSpec::parse("# tail_mode=magic\n# horizon=3\n1\n").is_err());
    }

    #[test]
    fn angles_normalize_into_half_open_interval() {
        assert_eq!(normalize_angle(PI), PI);
        assert_eq!(normalize_angle(-PI), PI);
        assert!((normalize_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert_eq!(normalize_angle(0.25), 0.25);
    }

    #[test]
    fn closed_form_equivalence_for_multiples() {
        for q in [1u64, 2, 3, 5] {
            let zeros = IndexSet::from_predicate(5000, |t| t > 0 && t % q == 0);
            let spec = ProductSpec::new(zeros, 1.0 / q as f64, 5000).unwrap();
            for &(x, y) in &[(0.3, 0.0), (7.25, 3.0), (-40.5, 100.0), (120.1, -2.0)] {
                let z = Complex64::new(x, y);
                let expected = log_sinc(z / q as f64);
                let got = spec.eval_log_abs(z).unwrap();
                let bound = spec.tail_error_bound(z) + 1e-12 * expected.abs().max(1.0);
                assert!((got - expected).abs() <= bound, "q={q} z={z}: {got} vs {expected}");
            }
        }
        let spec = ProductSpec::new(odds(5000), 0.5, 5000).unwrap();
        let z = Complex64::new(33.3, -12.0);
        assert!((spec.eval_log_abs(z).unwrap() - log_cos_half(z)).abs() <= 1e-8);
    }

    proptest! {
        #[test]
        fn evenness_and_conjugation_are_exact(x in -40.0f64..40.0, y in -40.0f64..40.0) {
            let spec = ProductSpec::new(IndexSet::from_predicate(2000, |t| t % 3 != 0), 2.0 / 3.0, 2000).unwrap();
            let z = Complex64::new(x, y);
            let v = spec.eval_log_abs(z).unwrap();
            prop_assert_eq!(v.to_bits(), spec.eval_log_abs(-z).unwrap().to_bits());
            prop_assert_eq!(v.to_bits(), spec.eval_log_abs(z.conj()).unwrap().to_bits());
        }

        #[test]
        fn truncation_convergence(x in -20.0f64..20.0, y in 0.5f64..20.0) {
            let z = Complex64::new(x, y);
            let zeros = odds(40_000);
            let a = ProductSpec::new(zeros.clone(), 0.5, 10_000).unwrap().eval_log_abs(z).unwrap();
            let b = ProductSpec::new(zeros, 0.5, 40_000).unwrap().eval_log_abs(z).unwrap();
            let bound = 0.5 * z.norm_sqr() * (1.0 / 10_000.0 - 1.0 / 40_000.0) + z.norm_sqr().powi(2) / 1e12;
            prop_assert!((a - b).abs() <= bound);
        }
    }
}
