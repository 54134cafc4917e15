//! Spectral electromagnetic stresses, the local Green function `g0`, the
//! anomaly and the effective (renormalized) stresses.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::helmholtz::{green, MadelungState, WavePoint, WaveSolution};
use crate::profile::SusceptibilityProfile;
use crate::quadrature::{romberg_integrate, QuadConfig, QuadratureResult};

/// Margin in the default locality cutoff `kappa_min = margin |n'/n| / (2 pi n)`.
pub const LOCALITY_MARGIN: f64 = 10.0;

/// Electric and magnetic spectral stresses and the Abraham pressure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralStresses {
    pub sigma_e: f64,
    pub sigma_m: f64,
    pub p_ab: f64,
    /// `sigma_e + sigma_m - kappa n`, computed without cancellation.
    pub total_excess: f64,
}

impl SpectralStresses {
    pub fn total(&self) -> f64 {
        self.sigma_e + self.sigma_m
    }
}

/// All stress quantities at one `(x, kappa)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct StressBundle {
    pub x: f64,
    pub kappa: f64,
    pub sigma_e: f64,
    pub sigma_m: f64,
    pub p_ab: f64,
    pub sigma_e0: f64,
    pub sigma_m0: f64,
    /// `beta0 / (2 kappa n)`.
    pub anomaly: f64,
    pub sigma_e_eff: f64,
    pub sigma_m_eff: f64,
}

impl StressBundle {
    pub fn sigma_eff(&self) -> f64 {
        self.sigma_e_eff + self.sigma_m_eff
    }
}

struct Local {
    n: f64,
    dn: f64,
    d2n: f64,
    beta0: f64,
    wp: f64,
    wm: f64,
    spread: f64,
}

fn local(ws: &WaveSolution, x: f64) -> Result<(Local, WavePoint)> {
    if ws.profile().is_interface(x) {
        return Err(Error::Interface { x });
    }
    let d = ws.profile().derivatives(x)?;
    let p = ws.point(x)?;
    let (wp, wm) = p.w_about(d.n);
    Ok((
        Local {
            n: d.n,
            dn: d.dn,
            d2n: d.d2n,
            beta0: d.beta0(),
            wp,
            wm,
            spread: p.spread(),
        },
        p,
    ))
}

/// `sigma_E = -n^2 kappa^2 g(x, x)`, `sigma_M = psi_+' psi_-' / W` and
/// `p_Ab = chi kappa^2 g(x, x)`.
pub fn spectral_stresses(ws: &WaveSolution, x: f64) -> Result<SpectralStresses> {
    let (l, _) = local(ws, x)?;
    let kappa = ws.kappa();
    let kn = kappa * l.n;
    let sigma_e = kn * kn / l.spread;
    // sigma_E + sigma_M - kappa n = -w_+ w_- / (u_+ - u_-)
    let total_excess = -l.wp * l.wm / l.spread;
    let sigma_m = kn + total_excess - sigma_e;
    let p_ab = -(l.n * l.n - 1.0) / (l.n * l.n) * sigma_e;
    Ok(SpectralStresses {
        sigma_e,
        sigma_m,
        p_ab,
        total_excess,
    })
}

/// Stresses in the Madelung form `n^2 kappa^2 / (2k)` and `k/2 - k'^2/(8k^3)`.
pub fn madelung_stresses(m: &MadelungState) -> (f64, f64) {
    let kn = m.n * m.kappa;
    (
        kn * kn / (2.0 * m.k),
        0.5 * m.k - m.k_prime * m.k_prime / (8.0 * m.k.powi(3)),
    )
}

/// `kappa n - n'^2 / (8 kappa n^3)`.
pub fn total_stress_asymptote(profile: &SusceptibilityProfile, x: f64, kappa: f64) -> Result<f64> {
    let d = profile.derivatives(x)?;
    Ok(kappa * d.n - d.dn * d.dn / (8.0 * kappa * d.n.powi(3)))
}

/// `(kappa n / 2, kappa n / 2 + d/dx [n' / (4 kappa n^2)])`.
pub fn local_stresses(profile: &SusceptibilityProfile, x: f64, kappa: f64) -> Result<(f64, f64)> {
    let d = profile.derivatives(x)?;
    let (n, n1, n2) = (d.n, d.dn, d.d2n);
    let half = 0.5 * kappa * n;
    Ok((
        half,
        half + n2 / (4.0 * kappa * n * n) - n1 * n1 / (2.0 * kappa * n.powi(3)),
    ))
}

/// Default lower `kappa` for local stresses, from `|d lambda/dx| << 1` with
/// `lambda = 2 pi / (kappa n)`.
pub fn locality_cutoff(profile: &SusceptibilityProfile, x: f64) -> Result<f64> {
    let d = profile.derivatives(x)?;
    Ok(LOCALITY_MARGIN * (d.dn / d.n).abs() / (2.0 * PI * d.n))
}

/// Full stress bundle. `kappa_min` overrides the default locality cutoff.
pub fn stress_bundle(ws: &WaveSolution, x: f64, kappa_min: Option<f64>) -> Result<StressBundle> {
    let kappa = ws.kappa();
    let cutoff = match kappa_min {
        Some(c) => c,
        None => locality_cutoff(ws.profile(), x)?,
    };
    if kappa < cutoff {
        return Err(Error::Locality { x, kappa, cutoff });
    }
    let (l, _) = local(ws, x)?;
    let s = spectral_stresses(ws, x)?;
    let kn = kappa * l.n;
    let (sigma_e0, sigma_m0) = local_stresses(ws.profile(), x, kappa)?;
    let anomaly = l.beta0 / (2.0 * kn);
    // sigma_E - kappa n / 2 = -kappa n (w_+ - w_-) / (2 (u_+ - u_-))
    let e_excess = -kn * (l.wp - l.wm) / (2.0 * l.spread);
    let m_excess = s.total_excess - e_excess;
    let m_local = l.d2n / (4.0 * kappa * l.n * l.n) - l.dn * l.dn / (2.0 * kappa * l.n.powi(3));
    Ok(StressBundle {
        x,
        kappa,
        sigma_e: s.sigma_e,
        sigma_m: s.sigma_m,
        p_ab: s.p_ab,
        sigma_e0,
        sigma_m0,
        anomaly,
        sigma_e_eff: e_excess - anomaly,
        sigma_m_eff: m_excess - m_local - anomaly,
    })
}

/// `(sigma_E_eff, sigma_M_eff)`.
pub fn effective_stresses(ws: &WaveSolution, x: f64, kappa_min: Option<f64>) -> Result<(f64, f64)> {
    let b = stress_bundle(ws, x, kappa_min)?;
    Ok((b.sigma_e_eff, b.sigma_m_eff))
}

/// Coefficients of the local Green function emitted at `x0`,
/// `g0 = c_{+a} psi_+ + c_{-a} psi_-` left (`a = -`) and right (`a = +`)
/// of `x0`.
///
/// Stored as `c_{sigma a} psi_sigma(x0)`, which stays finite when the waves
/// themselves overflow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalGreen {
    pub x0: f64,
    pub kappa: f64,
    pub plus_left: f64,
    pub minus_left: f64,
    pub plus_right: f64,
    pub minus_right: f64,
    ln_psi_plus: f64,
    ln_psi_minus: f64,
}

/// `c_{sigma a} = -sigma D_a psi_{-sigma}(x0) / (2 kappa n W)` with
/// `D_a = d/dx + a kappa n + n' / (2n)`.
///
/// Fixes the four coefficients by continuity, the unit jump of the slope
/// and `D_+- g0 = 0` at `x0 +- 0`.
pub fn local_green_coefficients(ws: &WaveSolution, x0: f64) -> Result<LocalGreen> {
    let (l, p) = local(ws, x0)?;
    let kappa = ws.kappa();
    let kn = kappa * l.n;
    let amp = l.dn / (2.0 * l.n);
    let den = 2.0 * kn * (-l.spread);
    // D_+ psi_- / psi_- = w_- + n'/2n, D_- psi_+ / psi_+ = w_+ + n'/2n (about n)
    Ok(LocalGreen {
        x0,
        kappa,
        plus_left: -(l.wm - 2.0 * kn + amp) / den,
        minus_left: (l.wp + amp) / den,
        plus_right: -(l.wm + amp) / den,
        minus_right: (l.wp + 2.0 * kn + amp) / den,
        ln_psi_plus: p.ln_psi_plus,
        ln_psi_minus: p.ln_psi_minus,
    })
}

impl LocalGreen {
    /// `g0(x; x0)`; at `x = x0` both branches agree.
    pub fn eval(&self, ws: &WaveSolution, x: f64) -> Result<f64> {
        let p = ws.point(x)?;
        let ep = (p.ln_psi_plus - self.ln_psi_plus).exp();
        let em = (p.ln_psi_minus - self.ln_psi_minus).exp();
        Ok(if x < self.x0 {
            self.plus_left * ep + self.minus_left * em
        } else {
            self.plus_right * ep + self.minus_right * em
        })
    }

    /// `d/dx g0(x; x0)` on the branch selected by `right`.
    pub fn slope(&self, ws: &WaveSolution, x: f64, right: bool) -> Result<f64> {
        let p = ws.point(x)?;
        let ep = (p.ln_psi_plus - self.ln_psi_plus).exp() * p.u_plus;
        let em = (p.ln_psi_minus - self.ln_psi_minus).exp() * p.u_minus;
        Ok(if right {
            self.plus_right * ep + self.minus_right * em
        } else {
            self.plus_left * ep + self.minus_left * em
        })
    }
}

/// Local stresses evaluated from `g0` itself: `-n^2 kappa^2 g0(x0, x0)` and
/// the mixed derivative, with the `x0`-dependence of the coefficients taken
/// by a fourth-order difference of step `h`. Both branches are averaged.
pub fn local_stresses_from_g0(ws: &WaveSolution, x0: f64, h: f64) -> Result<(f64, f64)> {
    let g = local_green_coefficients(ws, x0)?;
    let n = ws.profile().n(x0)?;
    let kappa = ws.kappa();
    let sigma_e0 = -(n * kappa).powi(2) * g.eval(ws, x0)?;
    let p = ws.point(x0)?;
    // c_{sigma a}(y) psi_sigma'(x0) = chat(y) u_sigma(x0) psi_sigma(x0) / psi_sigma(y)
    let term = |y: f64| -> Result<[f64; 2]> {
        let c = local_green_coefficients(ws, y)?;
        let rp = (p.ln_psi_plus - c.ln_psi_plus).exp() * p.u_plus;
        let rm = (p.ln_psi_minus - c.ln_psi_minus).exp() * p.u_minus;
        Ok([
            c.plus_left * rp + c.minus_left * rm,
            c.plus_right * rp + c.minus_right * rm,
        ])
    };
    let (a, b, c, d) = (term(x0 - 2.0 * h)?, term(x0 - h)?, term(x0 + h)?, term(x0 + 2.0 * h)?);
    let diff = |i: usize| (a[i] - 8.0 * b[i] + 8.0 * c[i] - d[i]) / (12.0 * h);
    Ok((sigma_e0, 0.5 * (diff(0) + diff(1))))
}

/// Legacy renormalizer `e^{-kappa s} A (1 + beta1 r / kappa)` around `x0`,
/// with `r = x - x0`, the optical length `s` of the quadratic index
/// expansion, `A = -1 / (2 kappa sqrt(n n0))` and `beta1 = beta0 / n0`.
/// Valid within [`legacy_radius`] of `x0`.
pub fn legacy_renormalizer(profile: &SusceptibilityProfile, x0: f64, x: f64, kappa: f64) -> Result<f64> {
    let d = profile.derivatives(x0)?;
    let (n0, n1, n2) = (d.n, d.dn, d.d2n);
    let r = x - x0;
    let s = r * (n0 + 0.5 * n1 * r + n2 * r * r / 6.0);
    let n = n0 + n1 * r + 0.5 * n2 * r * r;
    if !(n > 0.0) {
        return Err(Error::Domain(format!(
            "quadratic index expansion is not positive at x = {x}"
        )));
    }
    let amp = -1.0 / (2.0 * kappa * (n * n0).sqrt());
    let beta1 = d.beta0() / n0;
    Ok((-kappa * s.abs()).exp() * amp * (1.0 + beta1 * r.abs() / kappa))
}

/// `0.1 min(a, 1 / (kappa n))`, with `a = |n / n'|` unless the profile
/// has its own scale.
pub fn legacy_radius(profile: &SusceptibilityProfile, x0: f64, kappa: f64) -> Result<f64> {
    let d = profile.derivatives(x0)?;
    let a = match profile {
        SusceptibilityProfile::Sech2 { a, .. } => *a,
        _ if d.dn != 0.0 => (d.n / d.dn).abs(),
        _ => f64::INFINITY,
    };
    Ok(0.1 * a.min(1.0 / (kappa * d.n)))
}

/// Stresses generated by the legacy renormalizer:
/// `sigma_E = kappa n / 2` and
/// `sigma_M = kappa n / 2 - beta0 / (kappa n) - n'^2 / (8 kappa n^3) - beta1' / (2 kappa^2 n)`.
pub fn legacy_stresses(profile: &SusceptibilityProfile, x0: f64, kappa: f64) -> Result<(f64, f64)> {
    let d = profile.derivatives(x0)?;
    let n = d.n;
    let b0 = d.beta0();
    let b1_prime = d.beta0_prime() / n - b0 * d.dn / (n * n);
    let half = 0.5 * kappa * n;
    Ok((
        half,
        half - b0 / (kappa * n) - d.dn * d.dn / (8.0 * kappa * n.powi(3)) - b1_prime / (2.0 * kappa * kappa * n),
    ))
}

/// `(1 / 2 pi) int kappa^2 g(x1, x0) d kappa`, the equal-time electric
/// correlation `(eps0 / 2) <E(x1) E(x0)>` in units `hbar c = 1`.
pub fn field_correlation<F>(waves: F, x1: f64, x0: f64, quad: &QuadConfig) -> Result<QuadratureResult>
where
    F: Fn(f64) -> Result<WaveSolution> + Sync,
{
    if x1 == x0 {
        return Err(Error::Domain("the equal-point correlation diverges".into()));
    }
    let r = romberg_integrate(|_, kappa| Ok(kappa * kappa * green(&waves(kappa)?, x1, x0)?.g), quad)?;
    Ok(QuadratureResult {
        value: r.value / (2.0 * PI),
        est_error: r.est_error / (2.0 * PI),
        ..r
    })
}

/// `K(t) = -(1/pi) int_{kappa_ir}^inf g(x1, x0) cosh(kappa t) d kappa`,
/// defined outside the light cone `|x1 - x0| > |t|`.
///
/// In one dimension `g ~ -1/(2 kappa)` at small `kappa`, so the integral
/// needs the infrared cutoff `kappa_ir > 0`; differences in `t` do not
/// depend on it as `kappa_ir -> 0`.
pub fn correlation_kernel<F>(
    waves: F,
    x1: f64,
    x0: f64,
    t: f64,
    kappa_ir: f64,
    quad: &QuadConfig,
) -> Result<QuadratureResult>
where
    F: Fn(f64) -> Result<WaveSolution> + Sync,
{
    if !((x1 - x0).abs() > t.abs()) {
        return Err(Error::Domain(format!(
            "|x1 - x0| = {} is not outside the light cone |t| = {}",
            (x1 - x0).abs(),
            t.abs()
        )));
    }
    if !(kappa_ir > 0.0) {
        return Err(Error::Domain(format!(
            "infrared cutoff must be positive, got {kappa_ir}"
        )));
    }
    let r = romberg_integrate(
        |_, k| {
            let kappa = kappa_ir + k;
            Ok(green(&waves(kappa)?, x1, x0)?.g * (kappa * t).cosh())
        },
        quad,
    )?;
    Ok(QuadratureResult {
        value: -r.value / PI,
        est_error: r.est_error / PI,
        ..r
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{sech2_waves, Sech2Config};
    use crate::helmholtz::{madelung_state, solve_waves};

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    fn sech2() -> SusceptibilityProfile {
        SusceptibilityProfile::Sech2 { chi0: 1.0, a: 0.15 }
    }

    #[test]
    fn vacuum_and_uniform_stresses() {
        let vac = SusceptibilityProfile::block(0.0, 1.0, 0.0);
        let s = spectral_stresses(&solve_waves(&vac, 3.0, None).unwrap(), 0.5).unwrap();
        assert!(rel(s.sigma_e, 1.5) < 1e-15 && rel(s.sigma_m, 1.5) < 1e-15);
        let n: f64 = 1.4;
        let uni = SusceptibilityProfile::three_layer(n, n, n, 1.0);
        let s = spectral_stresses(&solve_waves(&uni, 3.0, None).unwrap(), 0.5).unwrap();
        assert!(rel(s.sigma_e, 1.5 * n) < 1e-14 && rel(s.sigma_m, 1.5 * n) < 1e-14);
        assert!(rel(s.p_ab, -(n * n - 1.0) * 3.0 / (2.0 * n)) < 1e-14);
    }

    #[test]
    fn madelung_forms_agree() {
        let p = sech2();
        for &kappa in &[1.0, 8.0, 50.0] {
            let ws = solve_waves(&p, kappa, None).unwrap();
            for &x in &[-0.3, 0.05, 0.1] {
                let s = spectral_stresses(&ws, x).unwrap();
                let (e, m) = madelung_stresses(&madelung_state(&ws, x).unwrap());
                assert!(rel(e, s.sigma_e) < 1e-8 && rel(m, s.sigma_m) < 1e-8);
            }
        }
    }

    #[test]
    fn interface_is_rejected() {
        let p = SusceptibilityProfile::three_layer(1.0, 1.5, 1.0, 1.0);
        let ws = solve_waves(&p, 2.0, None).unwrap();
        assert!(matches!(spectral_stresses(&ws, 1.0), Err(Error::Interface { .. })));
        assert!(matches!(
            local_green_coefficients(&ws, 0.0),
            Err(Error::Interface { .. })
        ));
    }

    #[test]
    fn local_green_jump_conditions() {
        let ws = solve_waves(&sech2(), 6.0, None).unwrap();
        let x0 = 0.1;
        let g = local_green_coefficients(&ws, x0).unwrap();
        let left = g.plus_left + g.minus_left;
        let right = g.plus_right + g.minus_right;
        assert!(rel(left, right) < 1e-13);
        let jump = g.slope(&ws, x0, true).unwrap() - g.slope(&ws, x0, false).unwrap();
        assert!((jump - 1.0).abs() < 1e-12);
        // outgoing: D_+ g0 = 0 just right of x0, D_- g0 = 0 just left
        let d = ws.profile().derivatives(x0).unwrap();
        let (kn, amp) = (6.0 * d.n, d.dn / (2.0 * d.n));
        let dp = g.slope(&ws, x0, true).unwrap() + (kn + amp) * right;
        let dm = g.slope(&ws, x0, false).unwrap() + (-kn + amp) * left;
        assert!(dp.abs() < 1e-12 && dm.abs() < 1e-12);
    }

    #[test]
    fn local_green_equals_green_in_homogeneous_medium() {
        let p = SusceptibilityProfile::three_layer(1.3, 1.3, 1.3, 1.0);
        let ws = solve_waves(&p, 2.5, None).unwrap();
        let g0 = local_green_coefficients(&ws, 0.4).unwrap();
        for &x in &[0.1, 0.4, 0.8] {
            assert!(rel(g0.eval(&ws, x).unwrap(), green(&ws, x, 0.4).unwrap().g) < 1e-13);
        }
    }

    #[test]
    fn g0_stresses_match_closed_forms() {
        let c = Sech2Config::new(1.0, 0.15).unwrap();
        let ws = sech2_waves(&c, 8.0).unwrap();
        let (e, m) = local_stresses_from_g0(&ws, 0.1, 1e-3).unwrap();
        let (e0, m0) = local_stresses(&c.profile(), 0.1, 8.0).unwrap();
        assert!(rel(e, e0) < 1e-12);
        assert!(rel(m, m0) < 1e-7, "{m} {m0}");
    }

    #[test]
    fn local_stress_closed_forms() {
        let vac = SusceptibilityProfile::block(0.0, 1.0, 0.0);
        assert_eq!(local_stresses(&vac, 0.5, 2.0).unwrap(), (1.0, 1.0));
        let p = sech2();
        let d = p.derivatives(0.0).unwrap();
        let (_, m) = local_stresses(&p, 0.0, 4.0).unwrap();
        assert!(rel(m - 2.0 * d.n, d.d2n / (4.0 * 4.0 * d.n * d.n)) < 1e-12);
    }

    #[test]
    fn anomaly_restores_abraham_identity() {
        let p = sech2();
        let kappa = 10.0;
        let x = 0.1;
        let h = 1e-4;
        let with = |y: f64| -> (f64, f64) {
            let d = p.derivatives(y).unwrap();
            let (e, m) = local_stresses(&p, y, kappa).unwrap();
            let an = d.beta0() / (2.0 * kappa * d.n);
            (e + an, m + an)
        };
        let fd =
            |f: &dyn Fn(f64) -> f64| (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h);
        let d = p.derivatives(x).unwrap();
        let lhs = fd(&|y| {
            let (e, m) = with(y);
            e + m
        });
        let rhs = 2.0 * d.dn / d.n * with(x).0;
        assert!((lhs - rhs).abs() < 1e-6 * kappa * d.n, "{lhs} {rhs}");
        let bare = fd(&|y| {
            let (e, m) = local_stresses(&p, y, kappa).unwrap();
            e + m
        });
        let rhs_bare = 2.0 * d.dn / d.n * local_stresses(&p, x, kappa).unwrap().0;
        assert!((bare - rhs_bare).abs() > 1e-4);
    }

    #[test]
    fn locality_cutoff_is_enforced() {
        let ws = solve_waves(&sech2(), 0.5, None).unwrap();
        assert!(matches!(stress_bundle(&ws, 0.1, None), Err(Error::Locality { .. })));
        assert!(stress_bundle(&ws, 0.1, Some(0.0)).is_ok());
    }

    #[test]
    fn effective_stresses_vanish_in_bulk() {
        let p = SusceptibilityProfile::three_layer(1.3, 1.3, 1.3, 1.0);
        let ws = solve_waves(&p, 4.0, None).unwrap();
        let (e, m) = effective_stresses(&ws, 0.5, None).unwrap();
        assert!(e.abs() < 1e-14 && m.abs() < 1e-14);
    }

    #[test]
    fn legacy_renormalizer_limits() {
        let n0: f64 = 1.3;
        let p = SusceptibilityProfile::three_layer(n0, n0, n0, 1.0);
        let g = legacy_renormalizer(&p, 0.5, 0.6, 2.0).unwrap();
        assert!(rel(g, -(-2.0 * n0 * 0.1f64).exp() / (2.0 * 2.0 * n0)) < 1e-14);
        let q = sech2();
        assert!(
            rel(
                legacy_renormalizer(&q, 0.1, 0.1, 7.0).unwrap(),
                -1.0 / (14.0 * q.n(0.1).unwrap())
            ) < 1e-15
        );
    }

    #[test]
    fn legacy_stresses_match_renormalizer_differences() {
        let p = sech2();
        let (x0, kappa) = (0.1, 5.0);
        let h = 2e-4;
        let g = |x: f64, y: f64| legacy_renormalizer(&p, y, x, kappa).unwrap();
        // mixed derivative on the x > x0 branch
        let eps = 1e-7;
        let mixed_at = |b: f64| {
            (g(b + h, x0 + eps) - g(b - h, x0 + eps) - g(b + h, x0 - eps) + g(b - h, x0 - eps)) / (4.0 * h * eps)
        };
        let m1 = mixed_at(x0 + 2.0 * h);
        let m2 = mixed_at(x0 + 4.0 * h);
        let extrap = 2.0 * m1 - m2;
        let (_, sm) = legacy_stresses(&p, x0, kappa).unwrap();
        assert!(rel(extrap, sm) < 1e-4, "{extrap} {sm}");
    }

    #[test]
    fn vacuum_field_correlation() {
        let vac = SusceptibilityProfile::block(0.0, 1.0, 0.0);
        let waves = |k: f64| solve_waves(&vac, k, None);
        let d = 0.3;
        let r = field_correlation(waves, 0.2 + d, 0.2, &QuadConfig::default()).unwrap();
        assert!(rel(r.value, -1.0 / (4.0 * PI * d * d)) < 1e-9);
        let q = QuadConfig::default();
        let k0 = correlation_kernel(waves, 0.2 + d, 0.2, 0.0, 1e-9, &q).unwrap().value;
        let kt = correlation_kernel(waves, 0.2 + d, 0.2, 0.2, 1e-9, &q).unwrap().value;
        let exact = (d * d / (d * d - 0.04)).ln() / (4.0 * PI);
        assert!((kt - k0 - exact).abs() < 1e-8 * exact, "{} {exact}", kt - k0);
        assert!(matches!(
            correlation_kernel(waves, 0.5, 0.2, 0.3, 1e-9, &q),
            Err(Error::Domain(_))
        ));
    }
}
