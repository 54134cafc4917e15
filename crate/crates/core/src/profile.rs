//! Scatterer chains and susceptibility profiles.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// A finite chain of point scatterers with uniform spacing.
#[derive(Debug, Clone, PartialEq)]
pub struct ScattererChain {
    positions: Vec<f64>,
    alphas: Vec<f64>,
    delta: f64,
    fingerprint: [u8; 32],
}

impl ScattererChain {
    /// Build a chain from explicit positions and polarizabilities.
    ///
    /// A single particle has no intrinsic spacing, so `delta` is taken from
    /// the caller when `positions.len() == 1`.
    pub fn new(positions: Vec<f64>, alphas: Vec<f64>, delta: f64) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::InvalidChain("chain has no particles".into()));
        }
        if positions.len() != alphas.len() {
            return Err(Error::InvalidChain(format!(
                "{} positions but {} polarizabilities",
                positions.len(),
                alphas.len()
            )));
        }
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::InvalidChain(format!("spacing must be positive, got {delta}")));
        }
        for (i, &a) in alphas.iter().enumerate() {
            if !a.is_finite() || a < 0.0 {
                return Err(Error::InvalidChain(format!(
                    "alpha[{i}] = {a} is not a finite non-negative value"
                )));
            }
        }
        for (i, w) in positions.windows(2).enumerate() {
            if !w[0].is_finite() || !w[1].is_finite() || (w[1] - w[0] - delta).abs() >= 1e-12 * delta.max(1.0) {
                return Err(Error::InvalidChain(format!(
                    "gap between particles {} and {} is {} instead of {delta}",
                    i + 1,
                    i + 2,
                    w[1] - w[0]
                )));
            }
        }
        let fingerprint = fingerprint(&positions, &alphas, delta);
        Ok(Self {
            positions,
            alphas,
            delta,
            fingerprint,
        })
    }

    /// Chain starting at `x_start` with spacing `delta`.
    pub fn uniform(x_start: f64, delta: f64, alphas: Vec<f64>) -> Result<Self> {
        let positions = (0..alphas.len()).map(|i| x_start + i as f64 * delta).collect();
        Self::new(positions, alphas, delta)
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    /// Local susceptibility `chi_j = alpha_j / delta` (0-based index).
    pub fn chi(&self, j: usize) -> f64 {
        self.alphas[j] / self.delta
    }

    /// Content hash of positions, polarizabilities and spacing.
    pub fn fingerprint(&self) -> [u8; 32] {
        self.fingerprint
    }

    /// Whether `alpha_j == alpha_{N+1-j}` for all `j`.
    pub fn is_mirror_symmetric(&self) -> bool {
        let n = self.alphas.len();
        (0..n / 2).all(|j| self.alphas[j] == self.alphas[n - 1 - j])
    }
}

fn fingerprint(positions: &[f64], alphas: &[f64], delta: f64) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update((positions.len() as u64).to_le_bytes());
    h.update(delta.to_bits().to_le_bytes());
    for &x in positions {
        h.update(x.to_bits().to_le_bytes());
    }
    for &a in alphas {
        h.update(a.to_bits().to_le_bytes());
    }
    h.finalize().into()
}

/// Interpolation used between tabulated samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    Linear,
    #[default]
    Cubic,
}

/// Refractive index and its first three derivatives at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexDerivatives {
    pub n: f64,
    pub dn: f64,
    pub d2n: f64,
    pub d3n: f64,
}

impl IndexDerivatives {
    fn homogeneous(n: f64) -> Self {
        Self {
            n,
            dn: 0.0,
            d2n: 0.0,
            d3n: 0.0,
        }
    }

    /// Geometric scattering amplitude `-n''/(4n) + 3n'^2/(8n^2)`.
    pub fn beta0(&self) -> f64 {
        let (n, n1, n2) = (self.n, self.dn, self.d2n);
        -n2 / (4.0 * n) + 3.0 * n1 * n1 / (8.0 * n * n)
    }

    /// `d(beta0)/dx`.
    pub fn beta0_prime(&self) -> f64 {
        let (n, n1, n2, n3) = (self.n, self.dn, self.d2n, self.d3n);
        -n3 / (4.0 * n) + n1 * n2 / (n * n) - 0.75 * n1 * n1 * n1 / (n * n * n)
    }
}

/// Susceptibility profile `chi(x) >= 0` with `n = sqrt(1 + chi)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SusceptibilityProfile {
    /// Layers separated by `boundaries`; `chi` has one more entry than
    /// `boundaries`, the first and last being the semi-infinite exterior.
    PiecewiseConstant { boundaries: Vec<f64>, chi: Vec<f64> },
    /// `chi0 * sech^2(x / a)`.
    Sech2 { chi0: f64, a: f64 },
    /// Samples on a strictly increasing grid; undefined outside the grid.
    Tabulated {
        x: Vec<f64>,
        chi: Vec<f64>,
        #[serde(default)]
        interpolation: Interpolation,
    },
}

/// `sech^2` values below this are treated as vacuum.
pub const SECH2_TRUNCATION: f64 = 1e-14;

impl SusceptibilityProfile {
    /// Homogeneous block of susceptibility `chi` on `[x0, x1]` in vacuum.
    pub fn block(x0: f64, x1: f64, chi: f64) -> Self {
        Self::PiecewiseConstant {
            boundaries: vec![x0, x1],
            chi: vec![0.0, chi, 0.0],
        }
    }

    /// Three homogeneous layers: `n1` for `x < 0`, `n2` on `[0, a]`, `n3` beyond.
    pub fn three_layer(n1: f64, n2: f64, n3: f64, a: f64) -> Self {
        Self::PiecewiseConstant {
            boundaries: vec![0.0, a],
            chi: vec![n1 * n1 - 1.0, n2 * n2 - 1.0, n3 * n3 - 1.0],
        }
    }

    /// Tabulated profile reconstructed from a chain, `chi_j = alpha_j / delta`.
    pub fn from_chain(chain: &ScattererChain) -> Result<Self> {
        if chain.len() < 2 {
            return Err(Error::InvalidProfile(
                "a tabulated profile needs at least two samples".into(),
            ));
        }
        let p = Self::Tabulated {
            x: chain.positions().to_vec(),
            chi: (0..chain.len()).map(|j| chain.chi(j)).collect(),
            interpolation: Interpolation::Cubic,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidProfile(m));
        match self {
            Self::PiecewiseConstant { boundaries, chi } => {
                if chi.len() != boundaries.len() + 1 {
                    return bad(format!(
                        "{} boundaries need {} layer values, got {}",
                        boundaries.len(),
                        boundaries.len() + 1,
                        chi.len()
                    ));
                }
                if boundaries.windows(2).any(|w| !(w[1] > w[0])) || boundaries.iter().any(|b| !b.is_finite()) {
                    return bad("layer boundaries must be finite and strictly increasing".into());
                }
                if chi.iter().any(|c| !c.is_finite() || *c < 0.0) {
                    return bad("layer susceptibilities must be finite and non-negative".into());
                }
            }
            Self::Sech2 { chi0, a } => {
                if !(chi0.is_finite() && *chi0 >= 0.0) || !(a.is_finite() && *a > 0.0) {
                    return bad(format!("sech2 needs chi0 >= 0 and a > 0, got chi0 = {chi0}, a = {a}"));
                }
            }
            Self::Tabulated { x, chi, interpolation } => {
                if x.len() != chi.len() {
                    return bad("tabulated x and chi differ in length".into());
                }
                let min = if *interpolation == Interpolation::Cubic { 3 } else { 2 };
                if x.len() < min {
                    return bad(format!("tabulated profile needs at least {min} samples"));
                }
                if x.windows(2).any(|w| !(w[1] > w[0])) || x.iter().any(|v| !v.is_finite()) {
                    return bad("tabulated grid must be finite and strictly increasing".into());
                }
                if chi.iter().any(|c| !c.is_finite() || *c < 0.0) {
                    return bad("tabulated susceptibilities must be finite and non-negative".into());
                }
            }
        }
        Ok(())
    }

    /// Susceptibility at `x`. At a layer interface this is the mean of the
    /// two adjacent layers.
    pub fn chi(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::Evaluation {
                x,
                reason: "non-finite position".into(),
            });
        }
        match self {
            Self::PiecewiseConstant { boundaries, chi } => {
                let i = boundaries.partition_point(|&b| b < x);
                if i < boundaries.len() && boundaries[i] == x {
                    Ok(0.5 * (chi[i] + chi[i + 1]))
                } else {
                    Ok(chi[i])
                }
            }
            Self::Sech2 { chi0, a } => {
                let s = 1.0 / (x / a).cosh();
                Ok(chi0 * s * s)
            }
            Self::Tabulated {
                x: xs,
                chi,
                interpolation,
            } => tabulated_eval(xs, chi, *interpolation, x),
        }
    }

    /// One-sided susceptibility: the value just left (`from_right = false`)
    /// or just right of `x`. Differs from [`Self::chi`] only at interfaces.
    pub fn chi_one_sided(&self, x: f64, from_right: bool) -> Result<f64> {
        if let Self::PiecewiseConstant { boundaries, chi } = self {
            let i = boundaries.partition_point(|&b| b < x);
            if i < boundaries.len() && boundaries[i] == x {
                return Ok(if from_right { chi[i + 1] } else { chi[i] });
            }
        }
        self.chi(x)
    }

    pub fn n(&self, x: f64) -> Result<f64> {
        Ok((1.0 + self.chi(x)?).sqrt())
    }

    /// Whether `x` is exactly on a layer interface.
    pub fn is_interface(&self, x: f64) -> bool {
        match self {
            Self::PiecewiseConstant { boundaries, .. } => boundaries.contains(&x),
            _ => false,
        }
    }

    /// Points where the profile is not smooth; ODE steps stop there.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Self::PiecewiseConstant { boundaries, .. } => boundaries.clone(),
            Self::Tabulated {
                x,
                interpolation: Interpolation::Linear,
                ..
            } => x.clone(),
            _ => Vec::new(),
        }
    }

    /// Interval outside which the profile is constant, or the grid for
    /// tabulated profiles.
    pub fn support(&self) -> (f64, f64) {
        match self {
            Self::PiecewiseConstant { boundaries, .. } => match (boundaries.first(), boundaries.last()) {
                (Some(&lo), Some(&hi)) => (lo, hi),
                _ => (0.0, 0.0),
            },
            Self::Sech2 { a, .. } => {
                let r = a * (1.0 / SECH2_TRUNCATION.sqrt()).acosh();
                (-r, r)
            }
            Self::Tabulated { x, .. } => (x[0], x[x.len() - 1]),
        }
    }

    /// Whether the profile is defined beyond its support.
    pub fn has_constant_exterior(&self) -> bool {
        !matches!(self, Self::Tabulated { .. })
    }

    /// `n, n', n'', n'''` at `x`.
    ///
    /// Exact for sech2 and inside layers; central differences with step
    /// `max(1e-6, grid spacing)` for tabulated profiles.
    pub fn derivatives(&self, x: f64) -> Result<IndexDerivatives> {
        match self {
            Self::PiecewiseConstant { .. } => {
                if self.is_interface(x) {
                    return Err(Error::Interface { x });
                }
                Ok(IndexDerivatives::homogeneous(self.n(x)?))
            }
            Self::Sech2 { chi0, a } => Ok(sech2_derivatives(*chi0, *a, x)),
            Self::Tabulated { x: xs, .. } => {
                let spacing = xs.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
                let h = spacing.max(1e-6);
                let (lo, hi) = (xs[0], xs[xs.len() - 1]);
                // slopes are exact from the interpolant; higher orders by differences,
                // with the stencil shifted inside the grid near its ends
                let c = (x - 1.5 * h).max(lo + 1.5 * h).min(hi - 1.5 * h);
                let (n, dn) = self.slope(x)?;
                let d = |k: f64| -> Result<f64> { Ok(self.slope((c + k * h).clamp(lo, hi))?.1) };
                let (m1, p1) = (d(-0.5)?, d(0.5)?);
                let (m3, p3) = (d(-1.5)?, d(1.5)?);
                let d2n = (p1 - m1) / h;
                let d3n = (p3 - p1 - m1 + m3) / (2.0 * h * h);
                Ok(IndexDerivatives { n, dn, d2n, d3n })
            }
        }
    }

    /// `(n, n')` from the profile itself; exact for every kind, and
    /// defined at interfaces as the one-sided value from the right.
    pub fn slope(&self, x: f64) -> Result<(f64, f64)> {
        match self {
            Self::PiecewiseConstant { .. } => Ok(((1.0 + self.chi_one_sided(x, true)?).sqrt(), 0.0)),
            Self::Sech2 { chi0, a } => {
                let d = sech2_derivatives(*chi0, *a, x);
                Ok((d.n, d.dn))
            }
            Self::Tabulated {
                x: xs,
                chi,
                interpolation,
            } => {
                let (c, dc) = tabulated_eval_with_slope(xs, chi, *interpolation, x)?;
                let n = (1.0 + c).sqrt();
                Ok((n, dc / (2.0 * n)))
            }
        }
    }

    /// `(n, n', n'')`.
    pub fn profile_derivatives(&self, x: f64) -> Result<(f64, f64, f64)> {
        let d = self.derivatives(x)?;
        Ok((d.n, d.dn, d.d2n))
    }
}

fn sech2_derivatives(chi0: f64, a: f64, x: f64) -> IndexDerivatives {
    let u = x / a;
    let t = u.tanh();
    let s = 1.0 / u.cosh();
    let s2 = s * s;
    let chi = chi0 * s2;
    let c1 = -2.0 * chi0 * t * s2 / a;
    let c2 = chi0 * (-2.0 + 6.0 * t * t) * s2 / (a * a);
    let c3 = chi0 * (16.0 * t - 24.0 * t * t * t) * s2 / (a * a * a);
    let n = (1.0 + chi).sqrt();
    let dn = c1 / (2.0 * n);
    let d2n = (c2 - 2.0 * dn * dn) / (2.0 * n);
    let d3n = (c3 - 6.0 * dn * d2n) / (2.0 * n);
    IndexDerivatives { n, dn, d2n, d3n }
}

fn tabulated_eval(xs: &[f64], ys: &[f64], interp: Interpolation, x: f64) -> Result<f64> {
    Ok(tabulated_eval_with_slope(xs, ys, interp, x)?.0)
}

fn tabulated_eval_with_slope(xs: &[f64], ys: &[f64], interp: Interpolation, x: f64) -> Result<(f64, f64)> {
    let (lo, hi) = (xs[0], xs[xs.len() - 1]);
    if x < lo || x > hi {
        return Err(Error::Evaluation {
            x,
            reason: format!("outside tabulated range [{lo}, {hi}]"),
        });
    }
    let i = xs.partition_point(|&v| v <= x).clamp(1, xs.len() - 1) - 1;
    let (x0, x1) = (xs[i], xs[i + 1]);
    let h = x1 - x0;
    let t = (x - x0) / h;
    let (v, dv) = match interp {
        Interpolation::Linear => (ys[i] + t * (ys[i + 1] - ys[i]), (ys[i + 1] - ys[i]) / h),
        Interpolation::Cubic => {
            // cubic Hermite with centered (one-sided at the ends) slopes
            let slope = |k: usize| -> f64 {
                if k == 0 {
                    (ys[1] - ys[0]) / (xs[1] - xs[0])
                } else if k == xs.len() - 1 {
                    (ys[k] - ys[k - 1]) / (xs[k] - xs[k - 1])
                } else {
                    (ys[k + 1] - ys[k - 1]) / (xs[k + 1] - xs[k - 1])
                }
            };
            let (m0, m1) = (slope(i) * h, slope(i + 1) * h);
            let t2 = t * t;
            let t3 = t2 * t;
            let v = (2.0 * t3 - 3.0 * t2 + 1.0) * ys[i]
                + (t3 - 2.0 * t2 + t) * m0
                + (-2.0 * t3 + 3.0 * t2) * ys[i + 1]
                + (t3 - t2) * m1;
            let dv = (6.0 * t2 - 6.0 * t) * ys[i]
                + (3.0 * t2 - 4.0 * t + 1.0) * m0
                + (-6.0 * t2 + 6.0 * t) * ys[i + 1]
                + (3.0 * t2 - 2.0 * t) * m1;
            (v, dv / h)
        }
    };
    // interpolation must not create gain media
    if v < 0.0 {
        Ok((0.0, 0.0))
    } else {
        Ok((v, dv))
    }
}

/// Sample `profile` at `n_particles` equally spaced points of
/// `[x_start, x_end]` and set `alpha_j = chi(x_j) * delta`.
///
/// At the chain ends the susceptibility is taken from inside the interval,
/// so a block whose edges coincide with the chain ends is sampled uniformly.
pub fn chain_from_profile(
    profile: &SusceptibilityProfile,
    n_particles: usize,
    x_start: f64,
    x_end: f64,
) -> Result<ScattererChain> {
    if n_particles == 0 {
        return Err(Error::InvalidChain("N must be at least 1".into()));
    }
    if !(x_end > x_start) {
        return Err(Error::InvalidChain(format!("empty interval [{x_start}, {x_end}]")));
    }
    profile.validate()?;
    let delta = if n_particles > 1 {
        (x_end - x_start) / (n_particles - 1) as f64
    } else {
        x_end - x_start
    };
    let mut positions = Vec::with_capacity(n_particles);
    let mut alphas = Vec::with_capacity(n_particles);
    for i in 0..n_particles {
        // fill from both ends so symmetric intervals give exactly mirrored positions
        let x = if 2 * i < n_particles {
            x_start + i as f64 * delta
        } else {
            x_end - (n_particles - 1 - i) as f64 * delta
        };
        let chi = if i == 0 {
            profile.chi_one_sided(x, true)?
        } else if i + 1 == n_particles {
            profile.chi_one_sided(x, false)?
        } else {
            profile.chi(x)?
        };
        positions.push(x);
        alphas.push(chi * delta);
    }
    ScattererChain::new(positions, alphas, delta)
}
