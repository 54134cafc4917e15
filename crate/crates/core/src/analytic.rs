//! Closed-form reference models: three homogeneous layers and the sech2
//! profile.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::helmholtz::WaveSolution;
use crate::profile::SusceptibilityProfile;
use crate::quadrature::{romberg_integrate, QuadConfig, QuadratureResult};
use crate::specfun;
use crate::transfer::Transfer2;

/// Layers `n1 | n2 | n3` with the central layer on `[0, a]`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThreeLayerConfig {
    pub n1: f64,
    pub n2: f64,
    pub n3: f64,
    pub a: f64,
}

impl ThreeLayerConfig {
    pub fn new(n1: f64, n2: f64, n3: f64, a: f64) -> Result<Self> {
        let c = Self { n1, n2, n3, a };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, n) in [("n1", self.n1), ("n2", self.n2), ("n3", self.n3)] {
            if !(n >= 1.0) || !n.is_finite() {
                return Err(Error::InvalidProfile(format!(
                    "{name} = {n} must be finite and at least 1"
                )));
            }
        }
        if !(self.a > 0.0) || !self.a.is_finite() {
            return Err(Error::InvalidProfile(format!(
                "layer thickness a = {} must be positive",
                self.a
            )));
        }
        Ok(())
    }

    /// Reflection coefficient of the left interface seen from inside.
    pub fn rho_l(&self) -> f64 {
        (self.n2 - self.n1) / (self.n2 + self.n1)
    }

    pub fn rho_r(&self) -> f64 {
        (self.n2 - self.n3) / (self.n2 + self.n3)
    }

    pub fn profile(&self) -> SusceptibilityProfile {
        SusceptibilityProfile::three_layer(self.n1, self.n2, self.n3, self.a)
    }

    /// `rho_l rho_r e^{-2 n2 kappa a}`, the round-trip factor.
    fn round_trip(&self, kappa: f64) -> f64 {
        self.rho_l() * self.rho_r() * (-2.0 * self.n2 * kappa * self.a).exp()
    }
}

/// Diagonal Green function `g(x, x)` of the three-layer system.
pub fn three_layer_green_diag(cfg: &ThreeLayerConfig, kappa: f64, x: f64) -> Result<f64> {
    cfg.validate()?;
    if !(kappa > 0.0) {
        return Err(Error::Domain(format!("kappa must be positive, got {kappa}")));
    }
    let (n1, n2, n3, a) = (cfg.n1, cfg.n2, cfg.n3, cfg.a);
    let (rl, rr) = (cfg.rho_l(), cfg.rho_r());
    let e = (-2.0 * n2 * kappa * a).exp();
    let den = 1.0 - rl * rr * e;
    let g = if x <= 0.0 {
        let q = n1 * kappa;
        (-1.0 + (rl - rr * e) / den * (2.0 * q * x).exp()) / (2.0 * q)
    } else if x >= a {
        let q = n3 * kappa;
        (-1.0 + (rr - rl * e) / den * (2.0 * q * (a - x)).exp()) / (2.0 * q)
    } else {
        let q = n2 * kappa;
        let bounce = rl * (-2.0 * q * x).exp() + rr * (2.0 * q * (x - a)).exp();
        -1.0 / (2.0 * q) - bounce / (2.0 * q * den) - rl * rr * e / (q * den)
    };
    Ok(g)
}

/// Central-layer `g(x, x)` summed as `terms` multiple reflections.
pub fn three_layer_green_series(cfg: &ThreeLayerConfig, kappa: f64, x: f64, terms: usize) -> Result<f64> {
    cfg.validate()?;
    if !(x > 0.0 && x < cfg.a) {
        return Err(Error::Domain(format!("x = {x} is not inside the central layer")));
    }
    let q = cfg.n2 * kappa;
    let r = cfg.round_trip(kappa);
    let bounce = cfg.rho_l() * (-2.0 * q * x).exp() + cfg.rho_r() * (2.0 * q * (x - cfg.a)).exp();
    let mut sum = 1.0;
    let mut rm = 1.0;
    for m in 0..terms {
        sum += rm * bounce;
        rm *= r;
        if m + 1 < terms {
            sum += 2.0 * rm;
        }
    }
    Ok(-sum / (2.0 * q))
}

/// Transfer matrix of amplitudes `(A, B)` of `A e^{n q x} + B e^{-n q x}`
/// across an interface from index `n_from` to `n_to`, both expansions
/// centred on the interface.
pub fn interface_transfer(n_from: f64, n_to: f64) -> Transfer2 {
    let r = n_from / n_to;
    Transfer2 {
        m11: 0.5 * (1.0 + r),
        m12: 0.5 * (1.0 - r),
        m21: 0.5 * (1.0 - r),
        m22: 0.5 * (1.0 + r),
    }
}

/// Reflection `B/A` generated by a purely growing incident wave.
pub fn interface_reflection(m: &Transfer2) -> f64 {
    m.m21 / m.m11
}

/// Integrated force density of the three-layer system as Lerch series.
///
/// Diverges at the interfaces, which are rejected.
pub fn lerch_force_density(cfg: &ThreeLayerConfig, x: f64) -> Result<f64> {
    cfg.validate()?;
    let (n1, n2, n3, a) = (cfg.n1, cfg.n2, cfg.n3, cfg.a);
    if x == 0.0 || x == a {
        return Err(Error::Interface { x });
    }
    let (rl, rr) = (cfg.rho_l(), cfg.rho_r());
    let z = rl * rr;
    let psi = |xi: f64| specfun::lerch_phi(z, 3, xi);
    let scale = 1.0 / (PI * (2.0 * n2 * a).powi(3));
    if x < 0.0 {
        let xi = -n1 * x / (n2 * a);
        Ok((n1 * n1 - 1.0) * scale * (rl * psi(xi)? - rr * psi(1.0 + xi)?))
    } else if x > a {
        let xi = n3 * (x - a) / (n2 * a);
        Ok((n3 * n3 - 1.0) * scale * (rl * psi(1.0 + xi)? - rr * psi(xi)?))
    } else {
        Ok((n2 * n2 - 1.0) * scale * (rl * psi(x / a)? - rr * psi(1.0 - x / a)?))
    }
}

/// Spectral stresses in the three layers, local parts included.
pub fn layer_stresses(cfg: &ThreeLayerConfig, kappa: f64) -> Result<[f64; 3]> {
    cfg.validate()?;
    let r = cfg.round_trip(kappa);
    let q = cfg.n2 * kappa;
    Ok([cfg.n1 * kappa, q + 2.0 * q * r / (1.0 - r), cfg.n3 * kappa])
}

/// Spectral Lifshitz force on the left interface; positive is attractive.
pub fn lifshitz_spectral(cfg: &ThreeLayerConfig, kappa: f64) -> f64 {
    let r = cfg.round_trip(kappa);
    cfg.n2 * kappa * r / (1.0 - r) / PI
}

/// Lifshitz force on the left interface integrated over `kappa`; the right
/// interface feels the opposite force.
pub fn lifshitz_force(cfg: &ThreeLayerConfig, quad: &QuadConfig) -> Result<QuadratureResult> {
    cfg.validate()?;
    romberg_integrate(|_, kappa| Ok(lifshitz_spectral(cfg, kappa)), quad)
}

/// `Li2(rho_l rho_r) / (4 pi n2 a^2)`, the summed reflection series of
/// [`lifshitz_force`].
pub fn lifshitz_closed_form(cfg: &ThreeLayerConfig) -> Result<f64> {
    cfg.validate()?;
    let z = cfg.rho_l() * cfg.rho_r();
    let li2 = if z == 0.0 {
        0.0
    } else {
        z * specfun::lerch_phi(z, 2, 1.0)?
    };
    Ok(li2 / (4.0 * PI * cfg.n2 * cfg.a * cfg.a))
}

/// `chi(x) = chi0 sech^2(x / a)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sech2Config {
    pub chi0: f64,
    pub a: f64,
}

impl Sech2Config {
    pub fn new(chi0: f64, a: f64) -> Result<Self> {
        let c = Self { chi0, a };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.chi0 >= 0.0) || !self.chi0.is_finite() {
            return Err(Error::InvalidProfile(format!(
                "chi0 = {} must be finite and non-negative",
                self.chi0
            )));
        }
        if !(self.a > 0.0) || !self.a.is_finite() {
            return Err(Error::InvalidProfile(format!("width a = {} must be positive", self.a)));
        }
        Ok(())
    }

    pub fn profile(&self) -> SusceptibilityProfile {
        SusceptibilityProfile::Sech2 {
            chi0: self.chi0,
            a: self.a,
        }
    }

    /// `nu_-+ = (1 -+ sqrt(1 - 4 chi0 a^2 kappa^2)) / 2`, complex conjugates
    /// above `kappa = 1 / (2 a sqrt(chi0))`.
    pub fn nu_pair(&self, kappa: f64) -> (Complex64, Complex64) {
        let disc = Complex64::new(1.0 - 4.0 * self.chi0 * (self.a * kappa).powi(2), 0.0).sqrt();
        (0.5 * (1.0 - disc), 0.5 * (1.0 + disc))
    }
}

fn check_kappa(kappa: f64) -> Result<()> {
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(Error::Domain(format!("kappa must be positive and finite, got {kappa}")));
    }
    Ok(())
}

/// `ln(-W) = ln 2 + 2 ln Gamma(K+1) - ln a - ln Gamma(K+nu_+) - ln Gamma(K+nu_-)`
/// with `K = kappa a`.
pub fn sech2_ln_neg_wronskian(cfg: &Sech2Config, kappa: f64) -> Result<f64> {
    cfg.validate()?;
    check_kappa(kappa)?;
    let k = Complex64::new(kappa * cfg.a, 0.0);
    let (nm, np) = cfg.nu_pair(kappa);
    let v = 2.0 * specfun::ln_gamma(k + 1.0)? - specfun::ln_gamma(k + np)? - specfun::ln_gamma(k + nm)?;
    Ok(std::f64::consts::LN_2 + v.re - cfg.a.ln())
}

/// Closed-form wave pair of the sech2 profile.
pub fn sech2_waves(cfg: &Sech2Config, kappa: f64) -> Result<WaveSolution> {
    let ln_neg_w = sech2_ln_neg_wronskian(cfg, kappa)?;
    let (nm, np) = cfg.nu_pair(kappa);
    Ok(WaveSolution::sech2_closed_form(
        cfg.chi0, cfg.a, kappa, nm, np, ln_neg_w,
    ))
}

/// Coefficients `(decaying, growing)` of `psi_+ ~ D e^{-kappa x} + G e^{kappa x}`
/// for `x -> +infinity`.
///
/// `D = Gamma(K+1) Gamma(-K) / (Gamma(nu_+) Gamma(nu_-))` has poles at integer
/// `K = kappa a`, where the split is degenerate and an error is returned.
pub fn sech2_asymptotic_split(cfg: &Sech2Config, kappa: f64) -> Result<(f64, f64)> {
    cfg.validate()?;
    check_kappa(kappa)?;
    let k = kappa * cfg.a;
    if k.fract() == 0.0 {
        return Err(Error::Pole { re: -k, im: 0.0 });
    }
    let (nm, np) = cfg.nu_pair(kappa);
    let kc = Complex64::new(k, 0.0);
    let lg = |z: Complex64| specfun::ln_gamma(z);
    let growing = (lg(kc)? + lg(kc + 1.0)? - lg(kc + np)? - lg(kc + nm)?).exp();
    // 1 / (Gamma(nu_+) Gamma(nu_-)) vanishes when chi0 = 0
    let inv = match (lg(np), lg(nm)) {
        (Ok(a), Ok(b)) => (-(a + b)).exp(),
        (Err(Error::Pole { .. }), _) | (_, Err(Error::Pole { .. })) => Complex64::new(0.0, 0.0),
        (Err(e), _) | (_, Err(e)) => return Err(e),
    };
    // Gamma(K+1) Gamma(-K) = -pi / sin(pi K)
    let decaying = -PI / (PI * k).sin() * inv;
    Ok((decaying.re, growing.re))
}
