//! Run configuration shared by the command-line tool and its tests.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::profile::SusceptibilityProfile;
use crate::quadrature::QuadConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    ChainForce,
    MacroDensity,
    ThreeLayer,
    Sech2,
    RenormStress,
    Figures,
}

/// Which imaginary wavenumbers to evaluate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum KappaSpec {
    Single {
        value: f64,
    },
    Range {
        start: f64,
        stop: f64,
        count: usize,
        log: bool,
    },
    /// Integrate over `kappa`; divergent integrals are reported up to `kappa_max`.
    Integrated {
        kappa_max: f64,
    },
}

impl KappaSpec {
    /// Sample points; empty for the integrated mode.
    pub fn values(&self) -> Vec<f64> {
        match self {
            Self::Single { value } => vec![*value],
            Self::Range {
                start,
                stop,
                count,
                log,
            } => linspace(*start, *stop, *count, *log),
            Self::Integrated { .. } => Vec::new(),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            Self::Single { value } => *value > 0.0 && value.is_finite(),
            Self::Range { start, stop, count, .. } => *start > 0.0 && stop >= start && stop.is_finite() && *count > 0,
            Self::Integrated { kappa_max } => *kappa_max > 0.0 && kappa_max.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid kappa specification {self:?}")))
        }
    }
}

/// `count` equally spaced points of `[start, stop]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Grid {
    pub fn single(x: f64) -> Self {
        Self {
            start: x,
            stop: x,
            count: 1,
        }
    }

    pub fn values(&self) -> Vec<f64> {
        linspace(self.start, self.stop, self.count, false)
    }
}

fn linspace(start: f64, stop: f64, count: usize, log: bool) -> Vec<f64> {
    if count == 1 {
        return vec![start];
    }
    (0..count)
        .map(|i| {
            let t = i as f64 / (count - 1) as f64;
            if i == count - 1 {
                stop
            } else if log {
                start * (stop / start).powf(t)
            } else {
                start + t * (stop - start)
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// Everything that determines a run's output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default)]
    pub profile: Option<SusceptibilityProfile>,
    /// Number of particles for chain commands.
    #[serde(default)]
    pub particles: Option<usize>,
    /// Interval occupied by the chain.
    #[serde(default)]
    pub span: Option<[f64; 2]>,
    /// Explicit polarizabilities, used instead of sampling a profile.
    #[serde(default)]
    pub alphas: Option<Vec<f64>>,
    #[serde(default)]
    pub kappa: Option<KappaSpec>,
    #[serde(default)]
    pub x: Option<Grid>,
    #[serde(default)]
    pub lifshitz: bool,
    #[serde(default)]
    pub quad: QuadConfig,
    #[serde(default)]
    pub kappa_min_cutoff: Option<f64>,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub out: Option<String>,
    #[serde(default)]
    pub format: OutputFormat,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            profile: None,
            particles: None,
            span: None,
            alphas: None,
            kappa: None,
            x: None,
            lifshitz: false,
            quad: QuadConfig::default(),
            kappa_min_cutoff: None,
            threads: None,
            out: None,
            format: OutputFormat::Csv,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// SHA-256 of the canonical JSON, ignoring the output destination and
    /// the worker count, neither of which changes results.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.out = None;
        c.threads = None;
        c.quad.threads = None;
        let bytes = serde_json::to_vec(&c).expect("config serializes");
        Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<()> {
        self.quad.validate()?;
        if let Some(p) = &self.profile {
            p.validate()?;
        }
        if let Some(k) = &self.kappa {
            k.validate()?;
        }
        if let Some(g) = &self.x {
            if g.count == 0 || !(g.stop >= g.start) || !g.start.is_finite() || !g.stop.is_finite() {
                return Err(Error::Config(format!("invalid x grid {g:?}")));
            }
        }
        if let Some([a, b]) = self.span {
            if !(b > a) || !a.is_finite() || !b.is_finite() {
                return Err(Error::Config(format!("invalid span [{a}, {b}]")));
            }
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        if let Some(c) = self.kappa_min_cutoff {
            if !(c >= 0.0) {
                return Err(Error::Config(format!("kappa_min_cutoff = {c} must be non-negative")));
            }
        }
        let need_profile = matches!(self.command, Command::MacroDensity | Command::RenormStress);
        if need_profile && self.profile.is_none() {
            return Err(Error::Config(format!("{:?} needs a profile", self.command)));
        }
        match self.command {
            Command::ChainForce => {
                if self.profile.is_none() && self.alphas.is_none() {
                    return Err(Error::Config("chain-force needs a profile or explicit alphas".into()));
                }
                if self.profile.is_some() && self.particles.unwrap_or(0) == 0 {
                    return Err(Error::Config(
                        "chain-force from a profile needs a particle count".into(),
                    ));
                }
            }
            Command::ThreeLayer => match &self.profile {
                Some(SusceptibilityProfile::PiecewiseConstant { boundaries, .. }) if boundaries.len() == 2 => {}
                _ => return Err(Error::Config("three-layer needs n1,n2,n3 and a".into())),
            },
            Command::Sech2 => {
                if !matches!(self.profile, Some(SusceptibilityProfile::Sech2 { .. })) {
                    return Err(Error::Config("sech2 needs chi0 and a".into()));
                }
                if matches!(self.kappa, None | Some(KappaSpec::Integrated { .. })) {
                    return Err(Error::Config("sech2 needs kappa values".into()));
                }
            }
            Command::RenormStress => {
                if matches!(self.kappa, None | Some(KappaSpec::Integrated { .. })) {
                    return Err(Error::Config("renorm-stress needs kappa values".into()));
                }
            }
            Command::MacroDensity => {
                if self.kappa.is_none() {
                    return Err(Error::Config(
                        "macro-density needs kappa values or the integrated mode".into(),
                    ));
                }
            }
            Command::Figures => {}
        }
        Ok(())
    }
}
