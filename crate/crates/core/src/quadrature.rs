//! Romberg integration over `kappa in (0, inf)` on the mixed-rule axis
//! `kappa = exp(nu - exp(-nu))`.
//!
//! Nodes live on a global dyadic grid `nu = index / 2^level`, so a given
//! `nu` always has the same integer key and bit-identical `kappa`, whichever
//! integral asks for it. That key is what the node cache indexes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;

/// Dyadic node `nu = index / 2^level` in canonical form (odd index unless
/// `level == 0`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct KappaNode {
    pub level: u32,
    pub index: i64,
}

impl KappaNode {
    pub fn new(level: u32, index: i64) -> Self {
        let (mut level, mut index) = (level, index);
        while level > 0 && index % 2 == 0 {
            level -= 1;
            index /= 2;
        }
        Self { level, index }
    }

    pub fn nu(&self) -> f64 {
        self.index as f64 / (1u64 << self.level) as f64
    }

    pub fn kappa(&self) -> f64 {
        mixed_rule_transform(self.nu()).0
    }
}

/// `kappa = exp(nu - exp(-nu))` and `d kappa / d nu = kappa (1 + exp(-nu))`.
pub fn mixed_rule_transform(nu: f64) -> (f64, f64) {
    let e = (-nu).exp();
    let kappa = (nu - e).exp();
    if kappa == 0.0 {
        return (0.0, 0.0);
    }
    (kappa, kappa * (1.0 + e))
}

/// Quadrature settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadConfig {
    /// Relative tolerance, measured against `int |f| d kappa`.
    pub tol: f64,
    pub max_levels: u32,
    pub min_levels: u32,
    /// Consecutive unit-spaced probes that must be negligible before a
    /// cutoff is accepted.
    pub tail_probes: u32,
    /// Lowest `nu` ever probed; `kappa(-6) ~ 1e-178`.
    pub nu_floor: f64,
    /// Highest `nu` ever probed.
    pub nu_ceiling: f64,
    /// Worker count for node evaluation within one refinement level.
    pub threads: Option<usize>,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_levels: 20,
            min_levels: 3,
            tail_probes: 3,
            nu_floor: -6.0,
            nu_ceiling: 60.0,
            threads: Some(1),
        }
    }
}

impl QuadConfig {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::Config(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_levels == 0 || self.max_levels > 40 || self.min_levels > self.max_levels {
            return Err(Error::Config("need 0 < min_levels <= max_levels <= 40".into()));
        }
        if !(self.nu_floor < self.nu_ceiling) {
            return Err(Error::Config("nu_floor must lie below nu_ceiling".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub est_error: f64,
    pub nodes_used: usize,
    pub cutoffs: (f64, f64),
    pub levels: u32,
}

/// Richardson columns including the trapezoid column.
const COLUMNS: usize = 5;

/// Romberg tableau on step-halving trapezoid sums.
struct Tableau {
    rows: Vec<Vec<f64>>,
}

impl Tableau {
    fn new() -> Self {
        Self { rows: Vec::new() }
    }

    fn push(&mut self, trapezoid: f64) -> f64 {
        let mut row = vec![trapezoid];
        if let Some(prev) = self.rows.last() {
            let mut factor = 1.0;
            for m in 1..COLUMNS.min(prev.len() + 1) {
                factor *= 4.0;
                let r = row[m - 1] + (row[m - 1] - prev[m - 1]) / (factor - 1.0);
                row.push(r);
            }
        }
        let best = *row.last().unwrap_or(&trapezoid);
        self.rows.push(row);
        best
    }

    fn diagonal_change(&self) -> f64 {
        let n = self.rows.len();
        if n < 2 {
            return f64::INFINITY;
        }
        let a = self.rows[n - 1].last().copied().unwrap_or(0.0);
        let b = self.rows[n - 2].last().copied().unwrap_or(0.0);
        (a - b).abs()
    }
}

/// Integrate `f(kappa)` over `(0, inf)`.
///
/// `f` receives the node key and its `kappa`. Cutoffs are found on the unit
/// grid: each side is extended until `tail_probes` consecutive probes have
/// `|f| * jacobian <= tol * peak`. Each refinement level then adds the odd
/// nodes, evaluated in parallel and summed in index order.
pub fn romberg_integrate<F>(f: F, cfg: &QuadConfig) -> Result<QuadratureResult>
where
    F: Fn(KappaNode, f64) -> Result<f64> + Sync + Send,
{
    cfg.validate()?;
    let weighted = |node: KappaNode| -> Result<f64> {
        let (kappa, jac) = mixed_rule_transform(node.nu());
        if jac == 0.0 {
            return Ok(0.0);
        }
        let v = f(node, kappa)?;
        if !v.is_finite() {
            return Err(Error::Domain(format!("integrand is not finite at kappa = {kappa}")));
        }
        Ok(v * jac)
    };

    // cutoff search on the unit grid, starting at nu = 0
    let floor = cfg.nu_floor.ceil() as i64;
    let ceiling = cfg.nu_ceiling.floor() as i64;
    let start = 0i64.clamp(floor, ceiling);
    let mut values = std::collections::BTreeMap::new();
    let v0 = weighted(KappaNode::new(0, start))?;
    values.insert(start, v0);
    let mut peak = v0.abs();
    let (mut lo, mut hi) = (start, start);
    let (mut quiet_lo, mut quiet_hi) = (0u32, 0u32);
    let need = cfg.tail_probes.max(1);
    while quiet_lo < need || quiet_hi < need {
        if quiet_hi < need {
            if hi == ceiling {
                return Err(Error::Convergence {
                    levels: 0,
                    last_diff: f64::INFINITY,
                    value: f64::NAN,
                });
            }
            hi += 1;
            let v = weighted(KappaNode::new(0, hi))?;
            values.insert(hi, v);
            peak = peak.max(v.abs());
            quiet_hi = if v.abs() <= cfg.tol * peak { quiet_hi + 1 } else { 0 };
        }
        if quiet_lo < need {
            if lo == floor {
                // kappa underflows below the floor; the remaining tail is nil
                quiet_lo = need;
                continue;
            }
            lo -= 1;
            let v = weighted(KappaNode::new(0, lo))?;
            values.insert(lo, v);
            peak = peak.max(v.abs());
            quiet_lo = if v.abs() <= cfg.tol * peak { quiet_lo + 1 } else { 0 };
        }
    }
    // trailing quiet probes are kept; they cost nothing and pin the ends
    let ends = [values[&lo], values[&hi]];
    let interior: f64 = values.range(lo + 1..hi).map(|(_, v)| *v).sum();
    let interior_abs: f64 = values.range(lo + 1..hi).map(|(_, v)| v.abs()).sum();
    let mut trap = 0.5 * (ends[0] + ends[1]) + interior;
    let mut trap_abs = 0.5 * (ends[0].abs() + ends[1].abs()) + interior_abs;
    let mut nodes_used = values.len();

    let mut tableau = Tableau::new();
    let mut value = tableau.push(trap);
    let span = (hi - lo) as usize;
    for level in 1..=cfg.max_levels {
        let h = 1.0 / (1u64 << level) as f64;
        let count = span << (level - 1);
        let base = lo << level;
        let new: Vec<Result<f64>> = par::map_indexed(count, cfg.threads, |i| {
            weighted(KappaNode::new(level, base + 2 * i as i64 + 1))
        });
        let mut sum = 0.0;
        let mut sum_abs = 0.0;
        for v in new {
            let v = v?;
            sum += v;
            sum_abs += v.abs();
        }
        nodes_used += count;
        trap = 0.5 * trap + h * sum;
        trap_abs = 0.5 * trap_abs + h * sum_abs;
        value = tableau.push(trap);
        let diff = tableau.diagonal_change();
        if level >= cfg.min_levels && diff <= cfg.tol * (value.abs() + trap_abs) {
            return Ok(QuadratureResult {
                value,
                est_error: diff,
                nodes_used,
                cutoffs: (lo as f64, hi as f64),
                levels: level,
            });
        }
        if level == cfg.max_levels {
            return Err(Error::Convergence {
                levels: level,
                last_diff: diff,
                value,
            });
        }
    }
    Err(Error::Convergence {
        levels: cfg.max_levels,
        last_diff: f64::INFINITY,
        value,
    })
}

/// Romberg integration of `f` over the finite interval `[a, b]`.
pub fn romberg_interval<F>(f: F, a: f64, b: f64, cfg: &QuadConfig) -> Result<QuadratureResult>
where
    F: Fn(f64) -> Result<f64> + Sync + Send,
{
    cfg.validate()?;
    if !(b > a) {
        return Err(Error::Domain(format!("empty interval [{a}, {b}]")));
    }
    let width = b - a;
    let fa = f(a)?;
    let fb = f(b)?;
    let mut trap = 0.5 * width * (fa + fb);
    let mut trap_abs = 0.5 * width * (fa.abs() + fb.abs());
    let mut tableau = Tableau::new();
    let mut value = tableau.push(trap);
    let mut nodes_used = 2;
    for level in 1..=cfg.max_levels {
        let count = 1usize << (level - 1);
        let h = width / (1u64 << level) as f64;
        let new: Vec<Result<f64>> = par::map_indexed(count, cfg.threads, |i| f(a + (2 * i + 1) as f64 * h));
        let mut sum = 0.0;
        let mut sum_abs = 0.0;
        for v in new {
            let v = v?;
            sum += v;
            sum_abs += v.abs();
        }
        nodes_used += count;
        trap = 0.5 * trap + h * sum;
        trap_abs = 0.5 * trap_abs + h * sum_abs;
        value = tableau.push(trap);
        let diff = tableau.diagonal_change();
        if level >= cfg.min_levels.max(2) && diff <= cfg.tol * (value.abs() + trap_abs) {
            return Ok(QuadratureResult {
                value,
                est_error: diff,
                nodes_used,
                cutoffs: (a, b),
                levels: level,
            });
        }
    }
    Err(Error::Convergence {
        levels: cfg.max_levels,
        last_diff: tableau.diagonal_change(),
        value,
    })
}
