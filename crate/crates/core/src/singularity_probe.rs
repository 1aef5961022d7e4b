//! Locating singularities of a power series on its circle of convergence from
//! finitely many coefficients.
//!
//! The probe estimates the radius of convergence from the root test, builds a
//! Padé approximant, removes Froissart doublets from its poles and clusters the
//! survivors near the unit circle. Arc verdicts use the closed arc
//! `I_Δ = {e^{iθ} : |θ| <= πΔ}`. All of it is numerical evidence, not proof.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::entire_products::normalize_angle;
use crate::error::{Error, Result};
use crate::sign_analysis::RealSequence;

/// Pivot-ratio gate of the Padé linear solve.
pub const CONDITION_GATE: f64 = 1e10;

/// Half-width of the modulus band `[1-η, 1+η]` treated as "on the circle".
pub const UNIT_BAND: f64 = 0.05;

/// Largest angular gap between neighbouring poles of one cluster.
pub const CLUSTER_GAP: f64 = 0.05;

/// Default relative pole–zero distance below which a pair is a doublet.
pub const DOUBLET_TOLERANCE: f64 = 1e-6;

/// Angular slack of the closed-arc test.
pub const ARC_ANGLE_TOLERANCE: f64 = 1e-9;

/// Minimum number of support points for a radius estimate.
pub const MIN_SUPPORT_FOR_RADIUS: usize = 10;

pub const EVIDENCE_NOTE: &str = "numerical evidence only";

fn support_points(seq: &RealSequence) -> Vec<(u64, f64)> {
    let support = seq.support();
    support
        .elements()
        .iter()
        .map(|&m| (m, seq.values()[m as usize]))
        .collect()
}

/// `1 / max |a_m|^{1/m}` over support points in the top half `[N/2, N]`.
pub fn radius_estimate(seq: &RealSequence) -> Result<f64> {
    let support = support_points(seq);
    if support.len() < MIN_SUPPORT_FOR_RADIUS {
        return Err(Error::InsufficientData(format!(
            "radius estimate needs at least {MIN_SUPPORT_FOR_RADIUS} support points, found {}",
            support.len()
        )));
    }
    let n = seq.degree();
    let root = support
        .iter()
        .filter(|&&(m, _)| m >= 1 && 2 * m >= n)
        .map(|&(m, v)| (v.abs().ln() / m as f64).exp())
        .fold(f64::NEG_INFINITY, f64::max);
    if !root.is_finite() || root <= 0.0 {
        return Err(Error::InsufficientData(
            "no support point in the top half of the index range".into(),
        ));
    }
    Ok(1.0 / root)
}

/// Maxima of `|a_m|^{1/m}` over consecutive windows of width `⌈N/10⌉`
/// covering the top half, as `(window start, max)`; windows without support
/// are skipped.
pub fn root_test_windows(seq: &RealSequence) -> Vec<(u64, f64)> {
    let n = seq.degree();
    let width = n.div_ceil(10).max(1);
    let support = support_points(seq);
    let mut out = Vec::new();
    let mut start = n.div_ceil(2).max(1);
    while start <= n {
        let end = (start + width - 1).min(n);
        let max = support
            .iter()
            .filter(|&&(m, _)| (start..=end).contains(&m))
            .map(|&(m, v)| (v.abs().ln() / m as f64).exp())
            .reduce(f64::max);
        if let Some(max) = max {
            out.push((start, max));
        }
        start = end + 1;
    }
    out
}

/// `[L/M]` Padé approximant `P/Q` with `Q(0) = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PadeApproximant {
    pub l: usize,
    pub m: usize,
    pub effective_m: usize,
    pub numerator: Vec<Complex64>,
    pub denominator: Vec<Complex64>,
    /// Set when the denominator system stayed singular down to `M = 0`.
    pub degenerate: bool,
}

impl PadeApproximant {
    pub fn eval(&self, z: Complex64) -> Complex64 {
        horner(&self.numerator, z) / horner(&self.denominator, z)
    }
}

fn horner(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

fn horner_with_derivative(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let zero = Complex64::new(0.0, 0.0);
    coeffs.iter().rev().fold((zero, zero), |(p, dp), &c| (p * z + c, dp * z + p))
}

enum Solve {
    Solution(Vec<Complex64>),
    Singular { rank: usize },
}

/// Gaussian elimination with full pivoting. The system is declared singular
/// when the pivot magnitudes span more than [`CONDITION_GATE`]; the numerical
/// rank counts pivots above `max pivot / CONDITION_GATE`.
fn solve_full_pivot(mut a: Vec<Vec<Complex64>>, mut b: Vec<Complex64>) -> Solve {
    let n = b.len();
    let mut col_perm: Vec<usize> = (0..n).collect();
    let mut pivots = Vec::with_capacity(n);
    for k in 0..n {
        let (mut pr, mut pc, mut best) = (k, k, -1.0);
        for (i, row) in a.iter().enumerate().skip(k) {
            for (j, v) in row.iter().enumerate().skip(k) {
                let mag = v.norm();
                if mag > best {
                    best = mag;
                    pr = i;
                    pc = j;
                }
            }
        }
        pivots.push(best);
        if best == 0.0 {
            break;
        }
        a.swap(k, pr);
        b.swap(k, pr);
        if pc != k {
            for row in a.iter_mut() {
                row.swap(k, pc);
            }
            col_perm.swap(k, pc);
        }
        let pivot = a[k][k];
        for i in k + 1..n {
            let factor = a[i][k] / pivot;
            if factor.norm() == 0.0 {
                continue;
            }
            for j in k..n {
                let delta = factor * a[k][j];
                a[i][j] -= delta;
            }
            let delta = factor * b[k];
            b[i] -= delta;
        }
    }
    let max = pivots.iter().cloned().fold(0.0, f64::max);
    let min = pivots.iter().cloned().fold(f64::INFINITY, f64::min);
    if n > 0 && (max == 0.0 || pivots.len() < n || max / min > CONDITION_GATE) {
        let rank = pivots.iter().filter(|&&p| p > max / CONDITION_GATE).count();
        return Solve::Singular { rank };
    }
    let mut y = vec![Complex64::new(0.0, 0.0); n];
    for k in (0..n).rev() {
        let mut s = b[k];
        for j in k + 1..n {
            s -= a[k][j] * y[j];
        }
        y[k] = s / a[k][k];
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for (k, &c) in col_perm.iter().enumerate() {
        x[c] = y[k];
    }
    Solve::Solution(x)
}

/// `[L/M]` approximant of the series with coefficients `coeffs` (`a_0..a_N`).
pub fn pade(coeffs: &[Complex64], l: usize, m: usize) -> Result<PadeApproximant> {
    if coeffs.is_empty() || l + m > coeffs.len() - 1 {
        return Err(Error::InvalidParameter(format!(
            "[{l}/{m}] Padé needs L + M <= N = {}",
            coeffs.len().saturating_sub(1)
        )));
    }
    let a = |k: isize| -> Complex64 {
        if k < 0 {
            Complex64::new(0.0, 0.0)
        } else {
            coeffs[k as usize]
        }
    };
    let mut mm = m;
    let mut degenerate = false;
    let q_tail = loop {
        if mm == 0 {
            break Vec::new();
        }
        let rows: Vec<Vec<Complex64>> = (1..=mm)
            .map(|i| (1..=mm).map(|j| a(l as isize + i as isize - j as isize)).collect())
            .collect();
        let rhs: Vec<Complex64> = (1..=mm).map(|i| -a((l + i) as isize)).collect();
        match solve_full_pivot(rows, rhs) {
            Solve::Solution(q) => break q,
            Solve::Singular { rank } => {
                mm = rank.min(mm - 1);
                if mm == 0 {
                    degenerate = true;
                }
            }
        }
    };
    let mut denominator = Vec::with_capacity(mm + 1);
    denominator.push(Complex64::new(1.0, 0.0));
    denominator.extend(q_tail);
    let numerator = (0..=l)
        .map(|k| {
            (0..=k.min(mm))
                .map(|j| denominator[j] * coeffs[k - j])
                .sum::<Complex64>()
        })
        .collect();
    Ok(PadeApproximant {
        l,
        m,
        effective_m: mm,
        numerator,
        denominator,
        degenerate,
    })
}

pub fn pade_real(seq: &RealSequence, l: usize, m: usize) -> Result<PadeApproximant> {
    let coeffs: Vec<Complex64> = seq.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    pade(&coeffs, l, m)
}

/// Drops trailing coefficients below `rel · max |c|`.
fn trimmed(coeffs: &[Complex64], rel: f64) -> &[Complex64] {
    let max = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut len = coeffs.len();
    while len > 0 && coeffs[len - 1].norm() <= rel * max {
        len -= 1;
    }
    &coeffs[..len]
}

/// Roots of `Σ c_k z^k` as eigenvalues of the companion matrix (complex Schur
/// form), each refined by Newton steps on the polynomial while the residual
/// decreases. Trailing coefficients below `1e-14` of the largest are dropped.
pub fn polynomial_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let c = trimmed(coeffs, 1e-14);
    if c.len() < 2 {
        return Vec::new();
    }
    let d = c.len() - 1;
    let lead = c[d];
    let mut companion = DMatrix::<Complex64>::zeros(d, d);
    for i in 1..d {
        companion[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..d {
        companion[(i, d - 1)] = -c[i] / lead;
    }
    let eigen = companion
        .clone()
        .try_schur(1e-15, 10_000)
        .and_then(|s| s.eigenvalues())
        .unwrap_or_else(|| companion.schur().eigenvalues().expect("complex Schur form is triangular"));
    eigen
        .iter()
        .map(|&z0| {
            let mut z = z0;
            let mut residual = horner(c, z).norm();
            for _ in 0..4 {
                let (p, dp) = horner_with_derivative(c, z);
                if dp.norm() == 0.0 {
                    break;
                }
                let next = z - p / dp;
                let r = horner(c, next).norm();
                if r < residual {
                    z = next;
                    residual = r;
                } else {
                    break;
                }
            }
            z
        })
        .collect()
}

/// Froissart doublet filter: a pole and a numerator zero closer than
/// `tolerance · (1 + |pole|)` cancel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FroissartPolicy {
    pub tolerance: f64,
}

impl Default for FroissartPolicy {
    fn default() -> Self {
        Self {
            tolerance: DOUBLET_TOLERANCE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pole {
    pub re: f64,
    pub im: f64,
    /// Residue magnitude `|P(z)/Q'(z)|`.
    pub weight: f64,
}

impl Pole {
    pub fn z(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    pub fn angle(&self) -> f64 {
        normalize_angle(self.im.atan2(self.re))
    }

    pub fn modulus(&self) -> f64 {
        self.re.hypot(self.im)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoleSet {
    pub poles: Vec<Pole>,
    pub removed_doublets: usize,
}

/// Poles of the approximant after doublet removal, sorted by angle.
pub fn poles(approx: &PadeApproximant, filter: FroissartPolicy) -> PoleSet {
    let denominator = trimmed(&approx.denominator, 1e-13);
    let raw = polynomial_roots(denominator);
    let zeros = polynomial_roots(&approx.numerator);
    let mut used = vec![false; zeros.len()];
    let mut kept = Vec::new();
    let mut removed = 0;
    for z in raw {
        let limit = filter.tolerance * (1.0 + z.norm());
        let partner = zeros
            .iter()
            .enumerate()
            .filter(|(i, w)| !used[*i] && (**w - z).norm() < limit)
            .min_by(|a, b| (*a.1 - z).norm().total_cmp(&(*b.1 - z).norm()));
        if let Some((i, _)) = partner {
            used[i] = true;
            removed += 1;
            continue;
        }
        let (_, dq) = horner_with_derivative(denominator, z);
        let weight = (horner(&approx.numerator, z) / dq).norm();
        kept.push(Pole {
            re: z.re,
            im: z.im,
            weight,
        });
    }
    kept.sort_by(|a, b| a.angle().total_cmp(&b.angle()).then(a.modulus().total_cmp(&b.modulus())));
    PoleSet {
        poles: kept,
        removed_doublets: removed,
    }
}

/// Poles near the unit circle whose angles chain together with gaps of at
/// most [`CLUSTER_GAP`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoleCluster {
    /// Weighted circular mean of the member angles.
    pub angle: f64,
    /// Smallest `|θ|` among the members.
    pub nearest_angle: f64,
    pub modulus: f64,
    pub count: usize,
    pub weight: f64,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArcClearance {
    pub delta: f64,
    pub arc_halfangle: f64,
    pub clusters: Vec<PoleCluster>,
    pub on_arc: bool,
    /// `min (|θ| - πΔ)` over clusters; `None` without any cluster.
    pub margin: Option<f64>,
}

fn build_cluster(members: &[Pole]) -> PoleCluster {
    let total: f64 = members.iter().map(|p| p.weight).sum();
    let w = |p: &Pole| if total > 0.0 { p.weight } else { 1.0 };
    let (s, c) = members
        .iter()
        .fold((0.0, 0.0), |(s, c), p| (s + w(p) * p.angle().sin(), c + w(p) * p.angle().cos()));
    let count = members.len();
    PoleCluster {
        angle: normalize_angle(s.atan2(c)),
        nearest_angle: members.iter().map(|p| p.angle().abs()).fold(f64::INFINITY, f64::min),
        modulus: members.iter().map(Pole::modulus).sum::<f64>() / count as f64,
        count,
        weight: total,
        label: if count == 1 {
            "pole".to_string()
        } else {
            format!("cluster of {count} poles")
        },
    }
}

/// Clusters the poles with modulus in `[1-band, 1+band]` and tests them
/// against the closed arc `|θ| <= πΔ`.
pub fn arc_clearance(poles: &[Pole], delta: f64, band: f64) -> Result<ArcClearance> {
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::InvalidParameter(format!("Δ must lie in [0, 1), got {delta}")));
    }
    let mut near: Vec<Pole> = poles
        .iter()
        .copied()
        .filter(|p| (p.modulus() - 1.0).abs() <= band)
        .collect();
    near.sort_by(|a, b| a.angle().total_cmp(&b.angle()));
    let mut groups: Vec<Vec<Pole>> = Vec::new();
    for p in near {
        match groups.last_mut() {
            Some(g) if p.angle() - g.last().unwrap().angle() <= CLUSTER_GAP => g.push(p),
            _ => groups.push(vec![p]),
        }
    }
    if groups.len() > 1 {
        let first = groups[0][0].angle();
        let last = groups.last().unwrap().last().unwrap().angle();
        if first + 2.0 * PI - last <= CLUSTER_GAP {
            let mut wrapped = groups.pop().unwrap();
            wrapped.append(&mut groups[0]);
            groups[0] = wrapped;
        }
    }
    let arc = PI * delta;
    let clusters: Vec<PoleCluster> = groups.iter().map(|g| build_cluster(g)).collect();
    let margin = clusters
        .iter()
        .map(|c| c.nearest_angle - arc)
        .reduce(f64::min);
    Ok(ArcClearance {
        delta,
        arc_halfangle: arc,
        on_arc: margin.is_some_and(|m| m <= ARC_ANGLE_TOLERANCE),
        clusters,
        margin,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeOptions {
    /// Defaults to `⌊N/2⌋ - 1` for both degrees.
    pub l: Option<usize>,
    pub m: Option<usize>,
    pub band: f64,
    pub froissart: FroissartPolicy,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        Self {
            l: None,
            m: None,
            band: UNIT_BAND,
            froissart: FroissartPolicy::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularityReport {
    pub radius: f64,
    pub l: usize,
    pub m: usize,
    pub effective_m: usize,
    pub degenerate: bool,
    pub poles: Vec<Pole>,
    pub removed_doublets: usize,
    pub delta: f64,
    pub arc_halfangle: f64,
    pub clusters: Vec<PoleCluster>,
    pub on_arc: bool,
    pub margin: Option<f64>,
    pub evidence: String,
}

/// Radius estimate, Padé poles and arc clearance at `delta`.
pub fn probe(seq: &RealSequence, delta: f64, options: &ProbeOptions) -> Result<SingularityReport> {
    let radius = radius_estimate(seq)?;
    let n = seq.degree() as usize;
    let diagonal = (n / 2).saturating_sub(1);
    let l = options.l.unwrap_or(diagonal);
    let m = options.m.unwrap_or(diagonal);
    let approx = pade_real(seq, l, m)?;
    let pole_set = poles(&approx, options.froissart);
    let clearance = arc_clearance(&pole_set.poles, delta, options.band)?;
    Ok(SingularityReport {
        radius,
        l,
        m,
        effective_m: approx.effective_m,
        degenerate: approx.degenerate,
        poles: pole_set.poles,
        removed_doublets: pole_set.removed_doublets,
        delta,
        arc_halfangle: clearance.arc_halfangle,
        clusters: clearance.clusters,
        on_arc: clearance.on_arc,
        margin: clearance.margin,
        evidence: EVIDENCE_NOTE.to_string(),
    })
}
