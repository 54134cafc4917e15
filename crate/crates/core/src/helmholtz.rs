//! Macroscopic limit: wave solutions `psi_+-` of `psi'' = kappa^2 n^2 psi`,
//! the Green function, the force density and its geometrical-optics
//! asymptotics.
//!
//! Solutions are carried as `u = psi'/psi` and `L = ln psi`. To keep the
//! large part `s kappa n` of `u` out of the arithmetic, the integrated
//! variable is `w = u - s kappa n` (`s = +1` for `psi_+`, `-1` for `psi_-`),
//! which obeys `w' = -2 s kappa n w - w^2 - s kappa n'`. Inside homogeneous
//! layers this is solved in closed form; smooth profiles use an adaptive
//! Dormand-Prince integrator. Outside the support the solutions continue
//! as exact exponentials.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::profile::SusceptibilityProfile;
use crate::quadrature::{mixed_rule_transform, romberg_integrate, romberg_interval, QuadConfig, QuadratureResult};
use crate::specfun;

/// Relative tolerance of the wave integrator.
pub const WAVE_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Segment {
    Homogeneous,
    Smooth,
    Exterior,
}

#[derive(Debug, Clone, Copy)]
struct Anchor {
    /// Position along the integration direction, `t = s x`.
    t: f64,
    w: f64,
    n_ref: f64,
    l: f64,
    seg: Segment,
}

/// One of the two solutions, integrated in direction `s`.
#[derive(Debug, Clone)]
struct Side {
    s: f64,
    kappa: f64,
    /// Seed position (in `t`) and index of the seed exterior.
    t_start: f64,
    n_start: f64,
    anchors: Vec<Anchor>,
}

/// Local solution data at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavePoint {
    pub x: f64,
    pub kappa: f64,
    pub u_plus: f64,
    pub u_minus: f64,
    /// `u_+ - kappa n_plus_ref`.
    pub w_plus: f64,
    /// `u_- + kappa n_minus_ref`.
    pub w_minus: f64,
    pub n_plus_ref: f64,
    pub n_minus_ref: f64,
    pub ln_psi_plus: f64,
    pub ln_psi_minus: f64,
}

impl WavePoint {
    /// `u_+ - u_-`, positive.
    pub fn spread(&self) -> f64 {
        self.kappa * (self.n_plus_ref + self.n_minus_ref) + self.w_plus - self.w_minus
    }

    /// `u_+ + u_-` without cancellation of the `kappa n` parts.
    pub fn sum(&self) -> f64 {
        self.kappa * (self.n_plus_ref - self.n_minus_ref) + self.w_plus + self.w_minus
    }

    /// `w_+` and `w_-` re-referenced to index `n`.
    pub fn w_about(&self, n: f64) -> (f64, f64) {
        (
            self.w_plus + self.kappa * (self.n_plus_ref - n),
            self.w_minus - self.kappa * (self.n_minus_ref - n),
        )
    }

    /// Diagonal Green function `g(x, x) = 1 / (u_- - u_+)`.
    pub fn green_diag(&self) -> f64 {
        -1.0 / self.spread()
    }

    /// `d/dx g(x, x) = (u_+ + u_-) / (u_- - u_+)`.
    pub fn green_diag_slope(&self) -> f64 {
        -self.sum() / self.spread()
    }
}

#[derive(Debug, Clone)]
enum WaveKind {
    Numeric {
        plus: Side,
        minus: Side,
    },
    Sech2 {
        chi0: f64,
        a: f64,
        nu_minus: Complex64,
        nu_plus: Complex64,
    },
}

/// The pair `psi_+-` at one imaginary wavenumber.
///
/// Normalization: `psi_+ = e^{n_l kappa x}` left of the profile support and
/// `psi_- = e^{-n_r kappa x}` right of it, with `n_l`, `n_r` the exterior
/// indices.
#[derive(Debug, Clone)]
pub struct WaveSolution {
    kappa: f64,
    profile: SusceptibilityProfile,
    domain: Option<(f64, f64)>,
    kind: WaveKind,
    ln_neg_w: f64,
}

/// Integrate the wave equation for `profile` at `kappa`.
///
/// `domain` optionally restricts where the solution may be evaluated.
pub fn solve_waves(profile: &SusceptibilityProfile, kappa: f64, domain: Option<(f64, f64)>) -> Result<WaveSolution> {
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(Error::Domain(format!("kappa must be positive and finite, got {kappa}")));
    }
    profile.validate()?;
    if let Some((lo, hi)) = domain {
        if !(hi > lo) {
            return Err(Error::Domain(format!("empty domain [{lo}, {hi}]")));
        }
    }
    let (x_l, x_r) = profile.support();
    let n_l = exterior_n(profile, x_l, false)?;
    let n_r = exterior_n(profile, x_r, true)?;
    let mut cuts: Vec<f64> = profile
        .breakpoints()
        .into_iter()
        .filter(|&b| b > x_l && b < x_r)
        .collect();
    cuts.insert(0, x_l);
    cuts.push(x_r);
    cuts.dedup();
    let plus = integrate_side(profile, kappa, 1.0, &cuts, n_l, n_r)?;
    let rev: Vec<f64> = cuts.iter().rev().copied().collect();
    let minus = integrate_side(profile, kappa, -1.0, &rev, n_r, n_l)?;
    let mut ws = WaveSolution {
        kappa,
        profile: profile.clone(),
        domain,
        kind: WaveKind::Numeric { plus, minus },
        ln_neg_w: 0.0,
    };
    let p = ws.point_unchecked(x_l)?;
    ws.ln_neg_w = p.ln_psi_plus + p.ln_psi_minus + p.spread().ln();
    Ok(ws)
}

fn exterior_n(profile: &SusceptibilityProfile, x: f64, right: bool) -> Result<f64> {
    match profile {
        SusceptibilityProfile::Sech2 { .. } => Ok(1.0),
        _ => Ok((1.0 + profile.chi_one_sided(x, right)?).sqrt()),
    }
}

/// Closed-form state in a homogeneous stretch of length `tau >= 0`.
fn propagate_homogeneous(q: f64, s: f64, w0: f64, tau: f64) -> (f64, f64) {
    if tau == 0.0 {
        return (w0, 0.0);
    }
    let e = -(-2.0 * q * tau).exp_m1();
    let den = 1.0 + s * w0 * e / (2.0 * q);
    let w = w0 * (-2.0 * q * tau).exp() / den;
    (w, q * tau + den.ln())
}

fn integrate_side(
    profile: &SusceptibilityProfile,
    kappa: f64,
    s: f64,
    cuts: &[f64],
    n_start: f64,
    n_end: f64,
) -> Result<Side> {
    let t_start = s * cuts[0];
    let mut u = s * kappa * n_start;
    let mut l = s * n_start * kappa * cuts[0];
    let mut anchors = Vec::new();
    let homogeneous = matches!(profile, SusceptibilityProfile::PiecewiseConstant { .. });
    let width = (cuts[cuts.len() - 1] - cuts[0]).abs().max(1e-300);
    for win in cuts.windows(2) {
        let (x0, x1) = (win[0], win[1]);
        let (t0, t1) = (s * x0, s * x1);
        if homogeneous {
            let n = profile.n(0.5 * (x0 + x1))?;
            let q = kappa * n;
            let w0 = u - s * q;
            anchors.push(Anchor {
                t: t0,
                w: w0,
                n_ref: n,
                l,
                seg: Segment::Homogeneous,
            });
            let (w1, dl) = propagate_homogeneous(q, s, w0, t1 - t0);
            u = s * q + w1;
            l += dl;
        } else {
            let n0 = profile.n(x0)?;
            let mut w = u - s * kappa * n0;
            let mut t = t0;
            anchors.push(Anchor {
                t,
                w,
                n_ref: n0,
                l,
                seg: Segment::Smooth,
            });
            let mut h = (t1 - t0).min(0.5 / (kappa * n0 + 1.0 / width));
            while t < t1 {
                let step = h.min(t1 - t);
                let last = step == t1 - t;
                let (y, err) = dp5_step(profile, kappa, s, t, [w, l], step, true)?;
                let sc_w = WAVE_RTOL * (w.abs().max(y[0].abs()) + 1.0 / width);
                let sc_l = WAVE_RTOL * (1.0 + (y[1] - l).abs());
                let e = (err[0] / sc_w).abs().max((err[1] / sc_l).abs());
                if e <= 1.0 || step < 1e-14 * width {
                    t = if last { t1 } else { t + step };
                    w = y[0];
                    l = y[1];
                    if t < t1 {
                        let n = profile.n(s * t)?;
                        anchors.push(Anchor {
                            t,
                            w,
                            n_ref: n,
                            l,
                            seg: Segment::Smooth,
                        });
                    }
                }
                let fac = if e == 0.0 {
                    5.0
                } else {
                    (0.9 * e.powf(-0.2)).clamp(0.2, 5.0)
                };
                h = step * fac;
                if !w.is_finite() || !l.is_finite() {
                    return Err(Error::Integration {
                        x: s * t,
                        reason: "non-finite wave state".into(),
                    });
                }
            }
            let n1 = profile.n(x1)?;
            u = s * kappa * n1 + w;
        }
    }
    let t_end = s * cuts[cuts.len() - 1];
    anchors.push(Anchor {
        t: t_end,
        w: u - s * kappa * n_end,
        n_ref: n_end,
        l,
        seg: Segment::Exterior,
    });
    Ok(Side {
        s,
        kappa,
        t_start,
        n_start,
        anchors,
    })
}

const DP_C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const DP_E: [f64; 7] = [
    35.0 / 384.0 - 5179.0 / 57600.0,
    0.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,
    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0,
    11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0,
];

/// Right-hand side in the direction variable `t = s x`.
fn rhs(profile: &SusceptibilityProfile, kappa: f64, s: f64, t: f64, y: [f64; 2]) -> Result<[f64; 2]> {
    let (n, dn) = profile.slope(s * t)?;
    let w = y[0];
    Ok([-2.0 * kappa * n * w - s * w * w - kappa * dn, kappa * n + s * w])
}

fn dp5_step(
    profile: &SusceptibilityProfile,
    kappa: f64,
    s: f64,
    t: f64,
    y: [f64; 2],
    h: f64,
    with_error: bool,
) -> Result<([f64; 2], [f64; 2])> {
    let mut k = [[0.0f64; 2]; 7];
    for i in 0..7 {
        let mut yi = y;
        for j in 0..i {
            yi[0] += h * DP_A[i][j] * k[j][0];
            yi[1] += h * DP_A[i][j] * k[j][1];
        }
        if i == 6 {
            // FSAL stage only needed for the error estimate
            if !with_error {
                return Ok((yi, [0.0, 0.0]));
            }
            k[6] = rhs(profile, kappa, s, t + h, yi)?;
            let mut err = [0.0; 2];
            for (j, kj) in k.iter().enumerate() {
                err[0] += h * DP_E[j] * kj[0];
                err[1] += h * DP_E[j] * kj[1];
            }
            return Ok((yi, err));
        }
        k[i] = rhs(profile, kappa, s, t + DP_C[i] * h, yi)?;
    }
    unreachable!()
}

impl Side {
    /// `(w, n_ref, L)` at `x`.
    fn eval(&self, profile: &SusceptibilityProfile, x: f64) -> Result<(f64, f64, f64)> {
        let t = self.s * x;
        if t <= self.t_start {
            return Ok((0.0, self.n_start, self.s * self.n_start * self.kappa * x));
        }
        let i = self.anchors.partition_point(|a| a.t <= t).saturating_sub(1);
        let a = self.anchors[i];
        let tau = t - a.t;
        match a.seg {
            Segment::Homogeneous | Segment::Exterior => {
                let (w, dl) = propagate_homogeneous(self.kappa * a.n_ref, self.s, a.w, tau);
                Ok((w, a.n_ref, a.l + dl))
            }
            Segment::Smooth => {
                if tau == 0.0 {
                    return Ok((a.w, a.n_ref, a.l));
                }
                let (y, _) = dp5_step(profile, self.kappa, self.s, a.t, [a.w, a.l], tau, false)?;
                Ok((y[0], profile.n(x)?, y[1]))
            }
        }
    }
}

impl WaveSolution {
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn profile(&self) -> &SusceptibilityProfile {
        &self.profile
    }

    pub fn is_closed_form(&self) -> bool {
        matches!(self.kind, WaveKind::Sech2 { .. })
    }

    /// `ln(-W)`; the Wronskian itself may overflow.
    pub fn ln_neg_wronskian(&self) -> f64 {
        self.ln_neg_w
    }

    /// `W = psi_+ psi_-' - psi_- psi_+'` (negative).
    pub fn wronskian(&self) -> f64 {
        -self.ln_neg_w.exp()
    }

    /// Wronskian recomputed from the local solution at `x`.
    pub fn wronskian_at(&self, x: f64) -> Result<f64> {
        let p = self.point(x)?;
        Ok(-(p.ln_psi_plus + p.ln_psi_minus).exp() * p.spread())
    }

    pub fn point(&self, x: f64) -> Result<WavePoint> {
        if let Some((lo, hi)) = self.domain {
            if x < lo || x > hi {
                return Err(Error::Evaluation {
                    x,
                    reason: format!("outside the solution domain [{lo}, {hi}]"),
                });
            }
        }
        self.point_unchecked(x)
    }

    fn point_unchecked(&self, x: f64) -> Result<WavePoint> {
        let kappa = self.kappa;
        match &self.kind {
            WaveKind::Numeric { plus, minus } => {
                let (wp, np, lp) = plus.eval(&self.profile, x)?;
                let (wm, nm, lm) = minus.eval(&self.profile, x)?;
                Ok(WavePoint {
                    x,
                    kappa,
                    u_plus: kappa * np + wp,
                    u_minus: -kappa * nm + wm,
                    w_plus: wp,
                    w_minus: wm,
                    n_plus_ref: np,
                    n_minus_ref: nm,
                    ln_psi_plus: lp,
                    ln_psi_minus: lm,
                })
            }
            WaveKind::Sech2 {
                chi0,
                a,
                nu_minus,
                nu_plus,
            } => {
                let (lp, up) = sech2_psi_plus(*a, kappa, *nu_minus, *nu_plus, x)?;
                let (lm, um) = sech2_psi_plus(*a, kappa, *nu_minus, *nu_plus, -x)?;
                let s = 1.0 / (x / a).cosh();
                let n = (1.0 + chi0 * s * s).sqrt();
                let um = -um;
                Ok(WavePoint {
                    x,
                    kappa,
                    u_plus: up,
                    u_minus: um,
                    w_plus: up - kappa * n,
                    w_minus: um + kappa * n,
                    n_plus_ref: n,
                    n_minus_ref: n,
                    ln_psi_plus: lp,
                    ln_psi_minus: lm,
                })
            }
        }
    }

    pub fn psi_plus(&self, x: f64) -> Result<f64> {
        Ok(self.point(x)?.ln_psi_plus.exp())
    }

    pub fn psi_minus(&self, x: f64) -> Result<f64> {
        Ok(self.point(x)?.ln_psi_minus.exp())
    }

    pub fn dpsi_plus(&self, x: f64) -> Result<f64> {
        let p = self.point(x)?;
        Ok(p.u_plus * p.ln_psi_plus.exp())
    }

    pub fn dpsi_minus(&self, x: f64) -> Result<f64> {
        let p = self.point(x)?;
        Ok(p.u_minus * p.ln_psi_minus.exp())
    }
}

/// `ln psi_+` and `psi_+'/psi_+` of the sech2 closed form
/// `e^{kappa x} 2F1(nu_-, nu_+; kappa a + 1; zeta)`.
pub(crate) fn sech2_psi_plus(
    a: f64,
    kappa: f64,
    nu_minus: Complex64,
    nu_plus: Complex64,
    x: f64,
) -> Result<(f64, f64)> {
    let zeta = 1.0 / (1.0 + (-2.0 * x / a).exp());
    let one_minus = 1.0 / (1.0 + (2.0 * x / a).exp());
    if !(zeta < 1.0) {
        return Err(Error::Domain(format!(
            "sech2 closed form is limited to x/a < 18, got x = {x}"
        )));
    }
    let (f, df) = specfun::hyp2f1_with_derivative(nu_minus, nu_plus, kappa * a + 1.0, zeta)?;
    if !(f > 0.0) {
        return Err(Error::SpecialFunction {
            func: "hyp2f1",
            reason: format!("non-positive value {f} at zeta = {zeta}"),
        });
    }
    let dzeta = 2.0 * zeta * one_minus / a;
    Ok((kappa * x + f.ln(), kappa + df * dzeta / f))
}

impl WaveSolution {
    /// Wrap the sech2 closed form; `ln_neg_w` from the Gamma expression.
    pub(crate) fn sech2_closed_form(
        chi0: f64,
        a: f64,
        kappa: f64,
        nu_minus: Complex64,
        nu_plus: Complex64,
        ln_neg_w: f64,
    ) -> Self {
        WaveSolution {
            kappa,
            profile: SusceptibilityProfile::Sech2 { chi0, a },
            domain: None,
            kind: WaveKind::Sech2 {
                chi0,
                a,
                nu_minus,
                nu_plus,
            },
            ln_neg_w,
        }
    }
}

/// Green function value with its `x`-derivative where defined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenEval {
    pub g: f64,
    /// `d/dx g(x, x0)`; `None` at `x == x0`, where it jumps by one.
    pub dg_dx: Option<f64>,
    pub kappa: f64,
    pub x: f64,
    pub x0: f64,
}

/// `g(x, x0) = psi_+(x<) psi_-(x>) / W`.
pub fn green(ws: &WaveSolution, x: f64, x0: f64) -> Result<GreenEval> {
    let (lo, hi) = if x <= x0 { (x, x0) } else { (x0, x) };
    let p_hi = ws.point(hi)?;
    if lo == hi {
        return Ok(GreenEval {
            g: p_hi.green_diag(),
            dg_dx: None,
            kappa: ws.kappa,
            x,
            x0,
        });
    }
    let p_lo = ws.point(lo)?;
    // psi_+(lo) psi_-(hi) / W = [psi_+(lo) / psi_+(hi)] g(hi, hi)
    let g = (p_lo.ln_psi_plus - p_hi.ln_psi_plus).exp() * p_hi.green_diag();
    let dg = if x < x0 { g * p_lo.u_plus } else { g * p_hi.u_minus };
    Ok(GreenEval {
        g,
        dg_dx: Some(dg),
        kappa: ws.kappa,
        x,
        x0,
    })
}

/// Spectral force density `kappa^2 chi d/dx g(x, x)`.
pub fn force_density(ws: &WaveSolution, x: f64) -> Result<f64> {
    if ws.profile.is_interface(x) {
        return Err(Error::Interface { x });
    }
    let chi = ws.profile.chi(x)?;
    let p = ws.point(x)?;
    Ok(ws.kappa * ws.kappa * chi * p.green_diag_slope())
}

/// Leading geometrical-optics asymptote of the spectral force density,
/// `-((n^2 - 1)/2) d/dx(kappa/n + beta0/(kappa n^3))`.
pub fn force_density_asymptotics(profile: &SusceptibilityProfile, x: f64, kappa: f64) -> Result<f64> {
    let d = profile.derivatives(x)?;
    let (n, n1) = (d.n, d.dn);
    let b0 = d.beta0();
    let inv_n_prime = -n1 / (n * n);
    let b_term = d.beta0_prime() / n.powi(3) - 3.0 * b0 * n1 / n.powi(4);
    Ok(-0.5 * (n * n - 1.0) * (kappa * inv_n_prime + b_term / kappa))
}

/// Coefficient `s` of the linear growth `f_tilde ~ s kappa` at large `kappa`.
pub fn linear_growth_coefficient(profile: &SusceptibilityProfile, x: f64) -> Result<f64> {
    let d = profile.derivatives(x)?;
    Ok(0.5 * (d.n * d.n - 1.0) * d.dn / (d.n * d.n))
}

/// Madelung representation at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MadelungState {
    pub x: f64,
    pub kappa: f64,
    /// Local wavenumber `k = -1 / (2 g(x, x))`.
    pub k: f64,
    pub k_prime: f64,
    pub beta: f64,
    pub beta0: f64,
    pub n: f64,
}

impl MadelungState {
    /// `k^2 - n^2 kappa^2 + 2 beta`.
    pub fn dispersion_residual(&self) -> f64 {
        let (k, nk) = (self.k, self.n * self.kappa);
        // (k - nk)(k + nk) keeps the difference exact when k ~ n kappa
        (k - nk) * (k + nk) + 2.0 * self.beta
    }
}

/// `k`, `k'`, `beta` from the wave solution and `beta0` from the profile.
///
/// `k' = (u_-^2 - u_+^2)/2` and `beta = -(k'/k)'/4 + (k'/k)^2/8` follow from
/// the Riccati equation directly, without numerical differentiation.
pub fn madelung_state(ws: &WaveSolution, x: f64) -> Result<MadelungState> {
    let d = ws.profile.derivatives(x)?;
    let p = ws.point(x)?;
    let g = p.green_diag();
    if !(g < 0.0) {
        return Err(Error::WaveState { x, g });
    }
    let kappa = ws.kappa;
    let n = d.n;
    let (wp, wm) = p.w_about(n);
    let k = 0.5 * p.spread();
    let sum = wp + wm;
    let k_prime = -k * sum;
    // (w_+ + w_-)' from the Riccati equations; the n' terms cancel
    let sum_prime = -2.0 * kappa * n * (wp - wm) - wp * wp - wm * wm;
    let beta = 0.25 * sum_prime + 0.125 * sum * sum;
    Ok(MadelungState {
        x,
        kappa,
        k,
        k_prime,
        beta,
        beta0: d.beta0(),
        n,
    })
}

/// Options for the integrated force density.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOptions {
    pub quad: QuadConfig,
    /// Upper `kappa` of the partial integral reported when it diverges.
    pub kappa_max: f64,
    /// Samples used to fit the large-`kappa` growth.
    pub fit_points: usize,
}

impl Default for DensityOptions {
    fn default() -> Self {
        Self {
            quad: QuadConfig::default(),
            kappa_max: 200.0,
            fit_points: 9,
        }
    }
}

/// Integrated force density `f = (1/2 pi) int f_tilde d kappa`.
#[derive(Debug, Clone, PartialEq)]
pub enum IntegratedDensity {
    Converged {
        value: f64,
        est_error: f64,
    },
    /// The integral grows without bound: partial value up to `kappa_max`
    /// and the fitted `f_tilde ~ growth kappa + offset + tail / kappa`.
    Divergent {
        partial: f64,
        kappa_max: f64,
        growth: f64,
        offset: f64,
        tail: f64,
        expected_growth: f64,
    },
}

/// Integrate the spectral force density over `kappa`.
///
/// Where the index varies the integrand grows linearly in `kappa`; this is
/// a property of the macroscopic limit, not a numerical failure, and is
/// reported as [`IntegratedDensity::Divergent`].
pub fn integrated_force_density(
    profile: &SusceptibilityProfile,
    x: f64,
    opts: &DensityOptions,
) -> Result<IntegratedDensity> {
    if profile.is_interface(x) {
        return Err(Error::Interface { x });
    }
    let expected = linear_growth_coefficient(profile, x)?;
    let spectral = |kappa: f64| -> Result<f64> { force_density(&solve_waves(profile, kappa, None)?, x) };
    if expected == 0.0 {
        match romberg_integrate(|_, kappa| spectral(kappa), &opts.quad) {
            Ok(r) => {
                return Ok(IntegratedDensity::Converged {
                    value: r.value / (2.0 * PI),
                    est_error: r.est_error / (2.0 * PI),
                })
            }
            Err(Error::Convergence { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    let kappa_max = opts.kappa_max;
    let nu_max = inverse_mixed_rule(kappa_max);
    let partial: QuadratureResult = romberg_interval(
        |nu| {
            let (kappa, jac) = mixed_rule_transform(nu);
            if jac == 0.0 {
                return Ok(0.0);
            }
            Ok(spectral(kappa)? * jac)
        },
        opts.quad.nu_floor,
        nu_max,
        &opts.quad,
    )?;
    let m = opts.fit_points.max(3);
    let mut rows = Vec::with_capacity(m);
    for i in 0..m {
        let kappa = kappa_max * (0.25 + 0.75 * i as f64 / (m - 1) as f64);
        rows.push(([kappa, 1.0, 1.0 / kappa], spectral(kappa)?));
    }
    let c = least_squares3(&rows)?;
    Ok(IntegratedDensity::Divergent {
        partial: partial.value / (2.0 * PI),
        kappa_max,
        growth: c[0],
        offset: c[1],
        tail: c[2],
        expected_growth: expected,
    })
}

/// `nu` with `exp(nu - exp(-nu)) = kappa`.
pub fn inverse_mixed_rule(kappa: f64) -> f64 {
    let target = kappa.ln();
    let mut nu = target.max(0.0);
    for _ in 0..100 {
        let e = (-nu).exp();
        let step = (nu - e - target) / (1.0 + e);
        nu -= step;
        if step.abs() < 1e-15 * nu.abs().max(1.0) {
            break;
        }
    }
    nu
}

/// Least squares with three basis functions via normal equations.
fn least_squares3(rows: &[([f64; 3], f64)]) -> Result<[f64; 3]> {
    let mut a = [[0.0f64; 4]; 3];
    for (b, y) in rows {
        for i in 0..3 {
            for j in 0..3 {
                a[i][j] += b[i] * b[j];
            }
            a[i][3] += b[i] * y;
        }
    }
    for col in 0..3 {
        let piv = (col..3)
            .max_by(|&p, &q| a[p][col].abs().total_cmp(&a[q][col].abs()))
            .unwrap_or(col);
        a.swap(col, piv);
        if a[col][col] == 0.0 {
            return Err(Error::Domain("singular growth fit".into()));
        }
        for r in 0..3 {
            if r != col {
                let f = a[r][col] / a[col][col];
                let pivot = a[col];
                for (x, p) in a[r].iter_mut().zip(pivot).skip(col) {
                    *x -= f * p;
                }
            }
        }
    }
    Ok([a[0][3] / a[0][0], a[1][3] / a[1][1], a[2][3] / a[2][2]])
}
