//! Per-particle van der Waals forces `F_j = -(1/2 pi) int d_j T22 / T22 d kappa`.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::{Duration, Instant};

use crate::cache::NodeCache;
use crate::error::{Error, Result};
use crate::par;
use crate::profile::ScattererChain;
use crate::quadrature::{romberg_integrate, KappaNode, QuadConfig};
use crate::transfer::{run_rescaled_recurrence, ChainSpectralState};

/// Forces on every particle of a chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ForceResult {
    /// Force per particle (units `hbar c` over length^2); `NaN` where failed.
    pub forces: Vec<f64>,
    pub errors: Vec<f64>,
    /// Particles whose integral failed, with the cause.
    pub failures: Vec<(usize, Error)>,
    pub wall_time: Duration,
}

impl ForceResult {
    pub fn is_complete(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn failed_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.forces.len()];
        for (j, _) in &self.failures {
            mask[*j] = true;
        }
        mask
    }

    pub fn net_force(&self) -> f64 {
        self.forces.iter().sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.forces.iter().fold(0.0, |m, f| m.max(f.abs()))
    }
}

/// Force integrals over a shared node cache.
#[derive(Debug, Clone)]
pub struct ForceEngine {
    pub quad: QuadConfig,
    cache: Arc<NodeCache>,
}

impl ForceEngine {
    pub fn new(quad: QuadConfig) -> Self {
        Self::with_cache(quad, Arc::new(NodeCache::from_env()))
    }

    pub fn with_cache(quad: QuadConfig, cache: Arc<NodeCache>) -> Self {
        Self { quad, cache }
    }

    pub fn cache(&self) -> &Arc<NodeCache> {
        &self.cache
    }

    /// Cached sweep of `chain` at `node`.
    pub fn state(&self, chain: &ScattererChain, node: KappaNode) -> Result<Arc<ChainSpectralState>> {
        let bytes = ChainSpectralState::estimated_bytes(chain.len());
        self.cache.get_or_compute(chain.fingerprint(), node, bytes, || {
            run_rescaled_recurrence(chain, node.kappa())
        })
    }

    /// Force on particle `j` (0-based) and its quadrature error estimate.
    pub fn force_on_particle(&self, chain: &ScattererChain, j: usize) -> Result<(f64, f64)> {
        if j >= chain.len() {
            return Err(Error::IndexOutOfRange {
                index: j,
                len: chain.len(),
            });
        }
        let r = romberg_integrate(|node, _| Ok(self.state(chain, node)?.log_derivative[j]), &self.quad)
            .map_err(|e| e.for_particle(j))?;
        Ok((-r.value / (2.0 * PI), r.est_error / (2.0 * PI)))
    }

    /// Forces on all particles, `threads` workers over the particle index.
    ///
    /// Each particle owns its Romberg tableau and nodes are summed in a fixed
    /// order, so the result does not depend on `threads`.
    pub fn force_all(&self, chain: &ScattererChain, threads: Option<usize>) -> ForceResult {
        let start = Instant::now();
        let inner = ForceEngine {
            quad: QuadConfig {
                threads: Some(1),
                ..self.quad.clone()
            },
            cache: self.cache.clone(),
        };
        let results = par::map_indexed(chain.len(), threads, |j| inner.force_on_particle(chain, j));
        let mut forces = Vec::with_capacity(chain.len());
        let mut errors = Vec::with_capacity(chain.len());
        let mut failures = Vec::new();
        for (j, r) in results.into_iter().enumerate() {
            match r {
                Ok((f, e)) => {
                    forces.push(f);
                    errors.push(e);
                }
                Err(e) => {
                    forces.push(f64::NAN);
                    errors.push(f64::NAN);
                    failures.push((j, e));
                }
            }
        }
        ForceResult {
            forces,
            errors,
            failures,
            wall_time: start.elapsed(),
        }
    }
}

/// Spectral force `-d_j ln T22` on particle `j` (0-based) at `kappa`.
pub fn spectral_force(chain: &ScattererChain, j: usize, kappa: f64) -> Result<f64> {
    if j >= chain.len() {
        return Err(Error::IndexOutOfRange {
            index: j,
            len: chain.len(),
        });
    }
    let s = run_rescaled_recurrence(chain, kappa)?;
    Ok(-s.log_derivative[j])
}
