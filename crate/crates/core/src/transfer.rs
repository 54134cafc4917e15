//! Transfer matrices on the imaginary frequency axis and the rescaled
//! recurrence for `T22` and its particle derivatives.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::profile::ScattererChain;

/// Largest `kappa * delta` for which the plain propagation matrix is formed.
pub const PROPAGATION_GUARD: f64 = 700.0;

/// Real 2x2 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transfer2 {
    pub m11: f64,
    pub m12: f64,
    pub m21: f64,
    pub m22: f64,
}

pub type Vec2 = [f64; 2];

impl Transfer2 {
    pub const IDENTITY: Self = Self {
        m11: 1.0,
        m12: 0.0,
        m21: 0.0,
        m22: 1.0,
    };

    pub fn new(m11: f64, m12: f64, m21: f64, m22: f64) -> Self {
        Self { m11, m12, m21, m22 }
    }

    pub fn det(&self) -> f64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    pub fn transpose(&self) -> Self {
        Self::new(self.m11, self.m21, self.m12, self.m22)
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self::new(
            self.m11 * o.m11 + self.m12 * o.m21,
            self.m11 * o.m12 + self.m12 * o.m22,
            self.m21 * o.m11 + self.m22 * o.m21,
            self.m21 * o.m12 + self.m22 * o.m22,
        )
    }

    pub fn apply(&self, v: Vec2) -> Vec2 {
        [self.m11 * v[0] + self.m12 * v[1], self.m21 * v[0] + self.m22 * v[1]]
    }

    pub fn is_finite(&self) -> bool {
        self.m11.is_finite() && self.m12.is_finite() && self.m21.is_finite() && self.m22.is_finite()
    }
}

/// Free propagation over `delta`: `diag(e^{-kappa delta}, e^{kappa delta})`.
pub fn propagation_matrix(kappa: f64, delta: f64) -> Result<Transfer2> {
    let kd = kappa * delta;
    if kd > PROPAGATION_GUARD {
        return Err(Error::Range { kd });
    }
    Ok(Transfer2::new((-kd).exp(), 0.0, 0.0, kd.exp()))
}

/// Point scatterer of polarizability `alpha`: `1 - (kappa alpha / 2) [[1, 1], [-1, -1]]`.
pub fn scatterer_matrix(kappa: f64, alpha: f64) -> Transfer2 {
    let h = 0.5 * kappa * alpha;
    Transfer2::new(1.0 - h, -h, h, 1.0 + h)
}

/// Scattering matrix of a real-frequency transfer matrix `[[a, b*], [b, a*]]`.
pub fn scattering_matrix_from_transfer(alpha: Complex64, beta: Complex64) -> Result<[[Complex64; 2]; 2]> {
    let det = alpha.norm_sqr() - beta.norm_sqr();
    if !(det > 0.0) {
        return Err(Error::InvalidTransfer { det });
    }
    let r = Complex64::new(det.sqrt(), 0.0);
    let inv = 1.0 / alpha.conj();
    Ok([[r * inv, beta.conj() * inv], [-beta * inv, r * inv]])
}

/// Per-`kappa` sweep data of a chain.
///
/// `a[j]` and `b[j]` are the second column of `A_j` and second row of `B_j`
/// up to the scale `2^{ea[j]}` and `2^{eb[j]}`; the remaining factor
/// `e^{(N+1) kappa delta}` is common to all particles.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainSpectralState {
    pub kappa: f64,
    pub a: Vec<Vec2>,
    pub b: Vec<Vec2>,
    pub ea: Vec<i32>,
    pub eb: Vec<i32>,
    /// `d_j T22 / T22` per particle.
    pub log_derivative: Vec<f64>,
    /// `ln T22` evaluated at each particle (equal up to rounding).
    pub ln_t22: Vec<f64>,
}

impl ChainSpectralState {
    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    /// Approximate heap footprint, used for cache accounting.
    pub fn byte_size(&self) -> usize {
        Self::estimated_bytes(self.len())
    }

    pub fn estimated_bytes(n: usize) -> usize {
        std::mem::size_of::<Self>() + n * (2 * std::mem::size_of::<Vec2>() + 2 * 4 + 2 * 8)
    }
}

/// Scale `v` by a power of two so that its largest entry lies in `[0.5, 1)`.
/// Exact in binary floating point; returns the exponent removed.
fn normalize(v: &mut Vec2) -> i32 {
    let m = v[0].abs().max(v[1].abs());
    if m == 0.0 || !m.is_finite() {
        return 0;
    }
    let e = m.log2().floor() as i32 + 1;
    let s = pow2(-e);
    v[0] *= s;
    v[1] *= s;
    e
}

fn pow2(e: i32) -> f64 {
    // split so intermediate factors stay normal
    let half = e / 2;
    2f64.powi(half) * 2f64.powi(e - half)
}

/// Run the forward and backward sweeps at `kappa`.
///
/// Each step applies `diag(e^{-2 kappa delta}, 1) R_j`, which is
/// `e^{-kappa delta} P R_j`; the removed factor and a power-of-two
/// renormalization are booked separately, so vectors never overflow or
/// underflow regardless of `kappa delta N`.
pub fn run_rescaled_recurrence(chain: &ScattererChain, kappa: f64) -> Result<ChainSpectralState> {
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(Error::Domain(format!("kappa must be positive and finite, got {kappa}")));
    }
    let n = chain.len();
    let delta = chain.delta();
    let kd = kappa * delta;
    let damp = (-2.0 * kd).exp();
    let step = |j: usize, transpose: bool, v: Vec2| -> Vec2 {
        let r = scatterer_matrix(kappa, chain.alphas()[j]);
        let r = if transpose { r.transpose() } else { r };
        let w = r.apply(v);
        [damp * w[0], w[1]]
    };

    let mut a = vec![[0.0, 1.0]; n];
    let mut ea = vec![0i32; n];
    for j in 0..n.saturating_sub(1) {
        let mut v = step(j, false, a[j]);
        let e = normalize(&mut v);
        if !v[0].is_finite() || !v[1].is_finite() || v == [0.0, 0.0] {
            return Err(Error::Overflow { j: j + 1, kappa });
        }
        a[j + 1] = v;
        ea[j + 1] = ea[j] + e;
    }
    let mut b = vec![[0.0, 1.0]; n];
    let mut eb = vec![0i32; n];
    for j in (1..n).rev() {
        let mut v = step(j, true, b[j]);
        let e = normalize(&mut v);
        if !v[0].is_finite() || !v[1].is_finite() || v == [0.0, 0.0] {
            return Err(Error::Overflow { j: j - 1, kappa });
        }
        b[j - 1] = v;
        eb[j - 1] = eb[j] + e;
    }

    let mut log_derivative = Vec::with_capacity(n);
    let mut ln_t22 = Vec::with_capacity(n);
    let common = (n as f64 + 1.0) * kd;
    for j in 0..n {
        let r = scatterer_matrix(kappa, chain.alphas()[j]);
        let ra = r.apply(a[j]);
        let t = b[j][0] * ra[0] + b[j][1] * ra[1];
        if !(t > 0.0) {
            return Err(Error::NonPositiveT22 { j, kappa, t22: t });
        }
        let sx = b[j][0] * a[j][1] + b[j][1] * a[j][0];
        let dt = -delta * kappa * kappa * chain.chi(j) * sx;
        log_derivative.push(dt / t);
        ln_t22.push(t.ln() + common + f64::from(ea[j] + eb[j]) * std::f64::consts::LN_2);
    }
    Ok(ChainSpectralState {
        kappa,
        a,
        b,
        ea,
        eb,
        log_derivative,
        ln_t22,
    })
}

/// `(T22, d_j T22)` at particle `j` (0-based) of a computed state.
///
/// Values are the true matrix elements of `P R_N P ... R_1 P` and overflow to
/// infinity for long chains at large `kappa`; use
/// [`ChainSpectralState::ln_t22`] and [`ChainSpectralState::log_derivative`]
/// when that matters.
pub fn t22_and_derivative(state: &ChainSpectralState, j: usize) -> Result<(f64, f64)> {
    if j >= state.len() {
        return Err(Error::IndexOutOfRange {
            index: j,
            len: state.len(),
        });
    }
    let t = state.ln_t22[j].exp();
    Ok((t, t * state.log_derivative[j]))
}
