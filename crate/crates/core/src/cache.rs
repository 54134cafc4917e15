//! Shared cache of per-node chain sweeps.
//!
//! Entries are keyed by the chain fingerprint and the quadrature node. A
//! node being computed by one worker is visible to the others, which wait
//! for that result instead of repeating the sweep. Eviction is least
//! recently used, bounded by a byte budget.

use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::Result;
use crate::quadrature::KappaNode;
use crate::transfer::ChainSpectralState;

/// Environment variable overriding the default byte budget.
pub const CACHE_BYTES_ENV: &str = "CASIMIR_CHAIN_CACHE_BYTES";
pub const DEFAULT_CACHE_BYTES: usize = 4 << 30;

type Key = ([u8; 32], KappaNode);
type Slot = Arc<OnceLock<Result<Arc<ChainSpectralState>>>>;

struct Entry {
    slot: Slot,
    tick: u64,
    bytes: usize,
}

#[derive(Default)]
struct Inner {
    map: HashMap<Key, Entry>,
    lru: BTreeMap<u64, Key>,
    tick: u64,
    bytes: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CacheStats {
    pub hits: u64,
    pub misses: u64,
    pub entries: usize,
    pub bytes: usize,
}

impl CacheStats {
    pub fn hit_rate_since(&self, earlier: &CacheStats) -> f64 {
        let h = self.hits - earlier.hits;
        let m = self.misses - earlier.misses;
        if h + m == 0 {
            0.0
        } else {
            h as f64 / (h + m) as f64
        }
    }
}

pub struct NodeCache {
    budget: usize,
    inner: Mutex<Inner>,
    hits: AtomicU64,
    misses: AtomicU64,
}

impl std::fmt::Debug for NodeCache {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NodeCache")
            .field("budget", &self.budget)
            .field("stats", &self.stats())
            .finish()
    }
}

impl Default for NodeCache {
    fn default() -> Self {
        Self::new(DEFAULT_CACHE_BYTES)
    }
}

impl NodeCache {
    pub fn new(budget: usize) -> Self {
        Self {
            budget,
            inner: Mutex::new(Inner::default()),
            hits: AtomicU64::new(0),
            misses: AtomicU64::new(0),
        }
    }

    /// Budget from `CASIMIR_CHAIN_CACHE_BYTES`, else the 4 GiB default.
    pub fn from_env() -> Self {
        let budget = std::env::var(CACHE_BYTES_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .unwrap_or(DEFAULT_CACHE_BYTES);
        Self::new(budget)
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn stats(&self) -> CacheStats {
        let inner = self.inner.lock().unwrap_or_else(|e| e.into_inner());
        CacheStats {
            hits: self.hits.load(Ordering::Relaxed),
            misses: self.misses.load(Ordering::Relaxed),
            entries: inner.map.len(),
            bytes: inner.bytes,
        }
    }

    pub fn clear(&self) {
        let mut inner = self.inner.lock().unwrap_or_else(|e| e.into_inner());
        *inner = Inner::default();
    }

    /// Fetch the state for `(fingerprint, node)`, running `compute` if no
    /// worker has produced or started it yet.
    pub fn get_or_compute<F>(
        &self,
        fingerprint: [u8; 32],
        node: KappaNode,
        bytes: usize,
        compute: F,
    ) -> Result<Arc<ChainSpectralState>>
    where
        F: FnOnce() -> Result<ChainSpectralState>,
    {
        let key = (fingerprint, node);
        let slot = {
            let mut inner = self.inner.lock().unwrap_or_else(|e| e.into_inner());
            inner.tick += 1;
            let tick = inner.tick;
            if let Some(entry) = inner.map.get_mut(&key) {
                let old = entry.tick;
                entry.tick = tick;
                let slot = entry.slot.clone();
                inner.lru.remove(&old);
                inner.lru.insert(tick, key);
                self.hits.fetch_add(1, Ordering::Relaxed);
                slot
            } else {
                self.misses.fetch_add(1, Ordering::Relaxed);
                let slot: Slot = Arc::new(OnceLock::new());
                inner.map.insert(
                    key,
                    Entry {
                        slot: slot.clone(),
                        tick,
                        bytes,
                    },
                );
                inner.lru.insert(tick, key);
                inner.bytes += bytes;
                while inner.bytes > self.budget {
                    let Some((&t, &victim)) = inner.lru.iter().next() else {
                        break;
                    };
                    inner.lru.remove(&t);
                    if let Some(e) = inner.map.remove(&victim) {
                        inner.bytes -= e.bytes;
                    }
                }
                slot
            }
        };
        slot.get_or_init(|| compute().map(Arc::new)).clone()
    }
}
