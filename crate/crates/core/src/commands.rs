//! Command implementations behind the `casimir-chain` binary.
//!
//! Every command turns a [`RunConfig`] into one or more [`Table`]s. Rows
//! are computed independently and collected in grid order, so output does
//! not depend on the worker count.

use std::f64::consts::PI;

use crate::analytic::{
    layer_stresses, lerch_force_density, lifshitz_closed_form, lifshitz_force, lifshitz_spectral,
    sech2_asymptotic_split, sech2_waves, Sech2Config, ThreeLayerConfig,
};
use crate::config::{Command, Grid, KappaSpec, RunConfig};
use crate::error::{Error, Result};
use crate::force::{spectral_force, ForceEngine};
use crate::helmholtz::{
    force_density, force_density_asymptotics, integrated_force_density, solve_waves, DensityOptions, IntegratedDensity,
};
use crate::output::Table;
use crate::par;
use crate::profile::{chain_from_profile, ScattererChain, SusceptibilityProfile};
use crate::stress::{spectral_stresses, stress_bundle};

/// Tables produced by one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub tables: Vec<Table>,
    /// Some per-particle force integrals failed; their rows hold `NaN`.
    pub incomplete: bool,
}

pub fn run(cfg: &RunConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let single = |t: Table| RunOutput {
        tables: vec![t],
        incomplete: false,
    };
    match cfg.command {
        Command::ChainForce => {
            let chain = build_chain(cfg)?;
            let t = chain_force_table("chain-force", "per-particle forces", &chain, cfg, &[])?;
            let incomplete = t.column("failed").is_some_and(|c| c.iter().any(|&f| f != 0.0));
            Ok(RunOutput {
                tables: vec![t],
                incomplete,
            })
        }
        Command::MacroDensity => macro_density(cfg).map(single),
        Command::ThreeLayer => three_layer(cfg).map(single),
        Command::Sech2 => sech2(cfg).map(single),
        Command::RenormStress => renorm_stress(cfg).map(single),
        Command::Figures => figures(cfg),
    }
}

fn collect<T: Send>(n: usize, threads: Option<usize>, f: impl Fn(usize) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    par::map_indexed(n, threads, f).into_iter().collect()
}

/// Default interval a chain covers when no span is given.
pub fn default_span(profile: &SusceptibilityProfile) -> (f64, f64) {
    match profile {
        // sech^2 has fallen below 1% of its peak at |x| = 10a/3
        SusceptibilityProfile::Sech2 { a, .. } => (-10.0 * a / 3.0, 10.0 * a / 3.0),
        SusceptibilityProfile::PiecewiseConstant { boundaries, .. } => {
            (boundaries[0], boundaries[boundaries.len() - 1])
        }
        SusceptibilityProfile::Tabulated { x, .. } => (x[0], x[x.len() - 1]),
    }
}

fn build_chain(cfg: &RunConfig) -> Result<ScattererChain> {
    if let Some(alphas) = &cfg.alphas {
        let n = alphas.len();
        let (x0, delta) = match cfg.span {
            Some([a, b]) if n > 1 => (a, (b - a) / (n - 1) as f64),
            Some([a, b]) => (a, b - a),
            None => (0.0, 1.0),
        };
        return ScattererChain::uniform(x0, delta, alphas.clone());
    }
    let profile = cfg
        .profile
        .as_ref()
        .ok_or_else(|| Error::Config("chain-force needs a profile".into()))?;
    let n = cfg
        .particles
        .ok_or_else(|| Error::Config("chain-force needs a particle count".into()))?;
    let (a, b) = cfg.span.map(|[a, b]| (a, b)).unwrap_or_else(|| default_span(profile));
    chain_from_profile(profile, n, a, b)
}

type Curve<'a> = (&'a str, &'a (dyn Fn(f64) -> Result<f64> + Sync));

/// Forces on every particle; each curve adds a comparison column, `nan`
/// where it cannot be evaluated.
fn chain_force_table(
    name: &str,
    description: &str,
    chain: &ScattererChain,
    cfg: &RunConfig,
    curves: &[Curve],
) -> Result<Table> {
    let engine = ForceEngine::new(cfg.quad.clone());
    let r = engine.force_all(chain, cfg.threads);
    let delta = chain.delta();
    let mut cols = vec!["j", "x", "alpha", "force", "force_over_delta", "est_error", "failed"];
    cols.extend(curves.iter().map(|c| c.0));
    let mut t = Table::new(name, description, &cols);
    let failed = r.failed_mask();
    let extra = par::map_indexed(chain.len(), cfg.threads, |j| {
        curves
            .iter()
            .map(|c| c.1(chain.positions()[j]).unwrap_or(f64::NAN))
            .collect::<Vec<f64>>()
    });
    for (j, extra) in extra.into_iter().enumerate() {
        let x = chain.positions()[j];
        let mut row = vec![
            (j + 1) as f64,
            x,
            chain.alphas()[j],
            r.forces[j],
            r.forces[j] / delta,
            r.errors[j],
            if failed[j] { 1.0 } else { 0.0 },
        ];
        row.extend(extra);
        t.push(row);
    }
    t.set_meta("particles", chain.len());
    t.set_meta("delta", delta);
    if r.is_complete() {
        t.set_meta("net_force", r.net_force());
    }
    t.set_meta("max_abs_force", r.max_abs());
    let failures: Vec<String> = r
        .failures
        .iter()
        .map(|(j, e)| format!("particle {}: {e}", j + 1))
        .collect();
    if !failures.is_empty() {
        t.set_meta("failures", failures);
    }
    Ok(t)
}

fn x_grid(cfg: &RunConfig, default: Grid) -> Vec<f64> {
    cfg.x.unwrap_or(default).values()
}

fn profile_of(cfg: &RunConfig) -> Result<&SusceptibilityProfile> {
    cfg.profile
        .as_ref()
        .ok_or_else(|| Error::Config(format!("{:?} needs a profile", cfg.command)))
}

fn default_x_grid(profile: &SusceptibilityProfile) -> Grid {
    let (a, b) = default_span(profile);
    Grid {
        start: a,
        stop: b,
        count: 101,
    }
}

fn pairs(xs: &[f64], ks: &[f64]) -> Vec<(f64, f64)> {
    ks.iter().flat_map(|&k| xs.iter().map(move |&x| (x, k))).collect()
}

fn macro_density(cfg: &RunConfig) -> Result<Table> {
    let profile = profile_of(cfg)?;
    let xs = x_grid(cfg, default_x_grid(profile));
    let kappa = cfg
        .kappa
        .as_ref()
        .ok_or_else(|| Error::Config("macro-density needs kappa".into()))?;
    if let KappaSpec::Integrated { kappa_max } = kappa {
        let opts = DensityOptions {
            quad: cfg.quad.clone(),
            kappa_max: *kappa_max,
            ..Default::default()
        };
        let rows = collect(xs.len(), cfg.threads, |i| {
            integrated_force_density(profile, xs[i], &opts)
        })?;
        let mut t = Table::new(
            "macro-density",
            "kappa-integrated force density; divergent points report the partial integral and the linear growth fit",
            &[
                "x",
                "converged",
                "value",
                "est_error",
                "kappa_max",
                "growth",
                "offset",
                "expected_growth",
            ],
        );
        for (x, r) in xs.iter().zip(rows) {
            t.push(match r {
                IntegratedDensity::Converged { value, est_error } => {
                    vec![*x, 1.0, value, est_error, f64::NAN, 0.0, f64::NAN, 0.0]
                }
                IntegratedDensity::Divergent {
                    partial,
                    kappa_max,
                    growth,
                    offset,
                    expected_growth,
                    ..
                } => {
                    vec![*x, 0.0, partial, f64::NAN, kappa_max, growth, offset, expected_growth]
                }
            });
        }
        return Ok(t);
    }
    let pts = pairs(&xs, &kappa.values());
    let rows = collect(pts.len(), cfg.threads, |i| {
        let (x, k) = pts[i];
        let ws = solve_waves(profile, k, None)?;
        Ok(vec![
            x,
            k,
            profile.chi(x)?,
            force_density(&ws, x)?,
            force_density_asymptotics(profile, x, k)?,
        ])
    })?;
    let mut t = Table::new(
        "macro-density",
        "spectral force density and its large-kappa asymptote",
        &["x", "kappa", "chi", "f_tilde", "f_tilde_asymptote"],
    );
    rows.into_iter().for_each(|r| t.push(r));
    Ok(t)
}

fn three_layer_config(cfg: &RunConfig) -> Result<ThreeLayerConfig> {
    match profile_of(cfg)? {
        SusceptibilityProfile::PiecewiseConstant { boundaries, chi }
            if boundaries.len() == 2 && boundaries[0] == 0.0 =>
        {
            let n = |c: f64| (1.0 + c).sqrt();
            ThreeLayerConfig::new(n(chi[0]), n(chi[1]), n(chi[2]), boundaries[1])
        }
        _ => Err(Error::Config("three-layer needs layers n1 | [0, a] n2 | n3".into())),
    }
}

fn three_layer(cfg: &RunConfig) -> Result<Table> {
    let tl = three_layer_config(cfg)?;
    if cfg.lifshitz {
        let r = lifshitz_force(&tl, &cfg.quad)?;
        let mut t = Table::new(
            "three-layer",
            "Lifshitz force on the left (F_l) and right (F_r) interfaces; positive F_l attracts",
            &["F_l", "F_r", "est_error", "closed_form"],
        );
        t.push(vec![r.value, -r.value, r.est_error, lifshitz_closed_form(&tl)?]);
        return Ok(t);
    }
    if let Some(k) = &cfg.kappa {
        let ks = k.values();
        if ks.is_empty() {
            return Err(Error::Config("three-layer stresses need kappa values".into()));
        }
        let mut t = Table::new(
            "three-layer",
            "spectral stresses in the three layers and the spectral Lifshitz force",
            &["kappa", "sigma_1", "sigma_2", "sigma_3", "lifshitz_spectral"],
        );
        for kappa in ks {
            let s = layer_stresses(&tl, kappa)?;
            t.push(vec![kappa, s[0], s[1], s[2], lifshitz_spectral(&tl, kappa)]);
        }
        return Ok(t);
    }
    let xs = x_grid(
        cfg,
        Grid {
            start: -tl.a,
            stop: 2.0 * tl.a,
            count: 301,
        },
    );
    let profile = tl.profile();
    let mut t = Table::new(
        "three-layer",
        "integrated force density; nan on the interfaces",
        &["x", "chi", "force_density"],
    );
    for x in xs {
        let f = match lerch_force_density(&tl, x) {
            Err(Error::Interface { .. }) => f64::NAN,
            r => r?,
        };
        t.push(vec![x, profile.chi(x)?, f]);
    }
    Ok(t)
}

fn sech2(cfg: &RunConfig) -> Result<Table> {
    let (chi0, a) = match profile_of(cfg)? {
        SusceptibilityProfile::Sech2 { chi0, a } => (*chi0, *a),
        _ => return Err(Error::Config("sech2 needs a sech2 profile".into())),
    };
    let sc = Sech2Config::new(chi0, a)?;
    let xs = x_grid(
        cfg,
        Grid {
            start: -5.0 * a,
            stop: 5.0 * a,
            count: 101,
        },
    );
    let ks = cfg.kappa.as_ref().map(|k| k.values()).unwrap_or_default();
    let mut t = Table::new(
        "sech2",
        "closed-form waves; psi_+ ~ decaying e^{-kappa x} + growing e^{kappa x} for large x, nan at integer kappa a",
        &[
            "x",
            "kappa",
            "ln_psi_plus",
            "ln_psi_minus",
            "green_diag",
            "ln_neg_wronskian",
            "decaying",
            "growing",
        ],
    );
    for kappa in ks {
        let ws = sech2_waves(&sc, kappa)?;
        let (dec, grow) = match sech2_asymptotic_split(&sc, kappa) {
            Ok(v) => v,
            Err(Error::Pole { .. }) => (f64::NAN, f64::NAN),
            Err(e) => return Err(e),
        };
        for &x in &xs {
            let p = ws.point(x)?;
            t.push(vec![
                x,
                kappa,
                p.ln_psi_plus,
                p.ln_psi_minus,
                p.green_diag(),
                ws.ln_neg_wronskian(),
                dec,
                grow,
            ]);
        }
    }
    Ok(t)
}

const STRESS_COLUMNS: [&str; 12] = [
    "x",
    "kappa",
    "chi",
    "sigma_e",
    "sigma_m",
    "p_ab",
    "sigma_e0",
    "sigma_m0",
    "anomaly",
    "sigma_e_eff",
    "sigma_m_eff",
    "sigma_eff",
];

fn stress_rows(profile: &SusceptibilityProfile, pts: &[(f64, f64)], cfg: &RunConfig) -> Result<Vec<Vec<f64>>> {
    collect(pts.len(), cfg.threads, |i| {
        let (x, k) = pts[i];
        let ws = solve_waves(profile, k, None)?;
        let b = stress_bundle(&ws, x, cfg.kappa_min_cutoff)?;
        Ok(vec![
            x,
            k,
            profile.chi(x)?,
            b.sigma_e,
            b.sigma_m,
            b.p_ab,
            b.sigma_e0,
            b.sigma_m0,
            b.anomaly,
            b.sigma_e_eff,
            b.sigma_m_eff,
            b.sigma_eff(),
        ])
    })
}

fn renorm_stress(cfg: &RunConfig) -> Result<Table> {
    let profile = profile_of(cfg)?;
    let xs = x_grid(cfg, default_x_grid(profile));
    let ks = cfg.kappa.as_ref().map(|k| k.values()).unwrap_or_default();
    let mut t = Table::new(
        "renorm-stress",
        "spectral, local and effective stresses",
        &STRESS_COLUMNS,
    );
    for r in stress_rows(profile, &pairs(&xs, &ks), cfg)? {
        t.push(r);
    }
    Ok(t)
}

/// Parameters of the figure tables.
pub mod figure_params {
    /// Homogeneous block: susceptibility, particle count.
    pub const BLOCK_CHI: f64 = 1.0;
    pub const BLOCK_PARTICLES: usize = 51;
    /// sech^2 profile used by the inhomogeneous chain and stress figures.
    pub const SECH2_CHI0: f64 = 1.0;
    pub const SECH2_A: f64 = 0.15;
    pub const SECH2_PARTICLES: usize = 101;
    pub const SECH2_SPAN: (f64, f64) = (-0.5, 0.5);
    /// Position of the stress decay curves.
    pub const STRESS_X: f64 = 0.1;
    pub const STRESS_KAPPAS: (f64, f64, usize) = (1.0, 1000.0, 61);
    pub const EFFECTIVE_KAPPAS: [f64; 8] = [3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0];
    pub const EFFECTIVE_X: (f64, f64, usize) = (-0.6, 0.6, 121);
    /// Three layers with increasing index, which repel.
    pub const LAYERS: (f64, f64, f64, f64) = (1.2, 1.5, 1.8, 1.0);
    pub const LAYER_PARTICLES: usize = 151;
    pub const LAYER_SPAN: (f64, f64) = (-1.0, 2.0);
    /// Wavenumber of the spectral force comparison.
    pub const SPECTRAL_KAPPA: f64 = 8.0;
}

fn figures(cfg: &RunConfig) -> Result<RunOutput> {
    use figure_params::*;
    let mut tables = vec![fig2a(cfg)?];

    let sech = SusceptibilityProfile::Sech2 {
        chi0: SECH2_CHI0,
        a: SECH2_A,
    };
    let chain = chain_from_profile(&sech, SECH2_PARTICLES, SECH2_SPAN.0, SECH2_SPAN.1)?;
    tables.push(chain_force_table(
        "fig2b",
        "forces on a chain sampling a sech^2 profile",
        &chain,
        cfg,
        &[],
    )?);

    tables.push(fig4(cfg, &sech)?);

    let xs = Grid {
        start: EFFECTIVE_X.0,
        stop: EFFECTIVE_X.1,
        count: EFFECTIVE_X.2,
    }
    .values();
    let mut t5 = Table::new("fig5", "effective stresses of the sech^2 profile", &STRESS_COLUMNS);
    for r in stress_rows(&sech, &pairs(&xs, &EFFECTIVE_KAPPAS), cfg)? {
        t5.push(r);
    }
    tables.push(t5);

    let (n1, n2, n3, a) = LAYERS;
    let tl = ThreeLayerConfig::new(n1, n2, n3, a)?;
    let layers = tl.profile();
    let chain = chain_from_profile(&layers, LAYER_PARTICLES, LAYER_SPAN.0, LAYER_SPAN.1)?;
    let d = chain.delta();
    let finite = SusceptibilityProfile::PiecewiseConstant {
        boundaries: vec![LAYER_SPAN.0 - d / 2.0, 0.0, a, LAYER_SPAN.1 + d / 2.0],
        chi: vec![0.0, n1 * n1 - 1.0, n2 * n2 - 1.0, n3 * n3 - 1.0, 0.0],
    };
    let opts = DensityOptions {
        quad: cfg.quad.clone(),
        ..Default::default()
    };
    let finite_density = |x: f64| match integrated_force_density(&finite, x, &opts)? {
        IntegratedDensity::Converged { value, .. } => Ok(value),
        IntegratedDensity::Divergent { .. } => Err(Error::Domain("divergent".into())),
    };
    let lerch = |x: f64| lerch_force_density(&tl, x);
    let mut t6a = chain_force_table(
        "fig6a",
        "forces on a chain sampling three layers; macroscopic_density is the limit for the chain's own extent, \
         unbounded_density the limit for semi-infinite outer layers",
        &chain,
        cfg,
        &[("macroscopic_density", &finite_density), ("unbounded_density", &lerch)],
    )?;
    t6a.set_meta("layers", format!("n = ({n1}, {n2}, {n3}), a = {a}"));
    tables.push(t6a);
    tables.push(fig6b(cfg, &tl)?);

    tables.push(fig7(cfg, &sech)?);
    Ok(RunOutput {
        tables,
        incomplete: false,
    })
}

/// Block of constant susceptibility; the macroscopic curve treats each
/// particle as the centre of a cell of width `delta`, so the equivalent
/// slab is `[-delta/2, 1 + delta/2]` and densities are sampled at the cell's
/// right edge.
fn fig2a(cfg: &RunConfig) -> Result<Table> {
    use figure_params::*;
    let block = SusceptibilityProfile::block(0.0, 1.0, BLOCK_CHI);
    let chain = chain_from_profile(&block, BLOCK_PARTICLES, 0.0, 1.0)?;
    let d = chain.delta();
    let n = (1.0 + BLOCK_CHI).sqrt();
    let slab = ThreeLayerConfig::new(1.0, n, 1.0, 1.0 + d)?;
    let curve = |x: f64| lerch_force_density(&slab, x + d / 2.0);
    let mut t = chain_force_table(
        "fig2a",
        "forces on a chain sampling a homogeneous block",
        &chain,
        cfg,
        &[("macroscopic_density", &curve)],
    )?;
    t.set_meta("block", format!("chi = {BLOCK_CHI} on [0, 1]"));
    Ok(t)
}

fn fig4(cfg: &RunConfig, sech: &SusceptibilityProfile) -> Result<Table> {
    use figure_params::*;
    let x = STRESS_X;
    let (k0, k1, m) = STRESS_KAPPAS;
    let ks = KappaSpec::Range {
        start: k0,
        stop: k1,
        count: m,
        log: true,
    }
    .values();
    let d = sech.derivatives(x)?;
    let rows = collect(ks.len(), cfg.threads, |i| {
        let k = ks[i];
        let s = spectral_stresses(&solve_waves(sech, k, None)?, x)?;
        let residual = s.total_excess + d.dn * d.dn / (8.0 * k * d.n.powi(3));
        Ok(vec![k, s.sigma_e, s.sigma_m, s.total(), s.total_excess, residual])
    })?;
    let mut t = Table::new(
        "fig4",
        "total spectral stress at fixed x; excess = sigma - kappa n, residual = sigma - (kappa n - n'^2/(8 kappa n^3))",
        &["kappa", "sigma_e", "sigma_m", "sigma", "excess", "residual"],
    );
    rows.into_iter().for_each(|r| t.push(r));
    t.set_meta("x", x);
    t.set_meta("n", d.n);
    t.set_meta("dn", d.dn);
    Ok(t)
}

fn fig6b(cfg: &RunConfig, tl: &ThreeLayerConfig) -> Result<Table> {
    let r = lifshitz_force(tl, &cfg.quad)?;
    let profile = tl.profile();
    let mut t = Table::new(
        "fig6b",
        "integrated renormalized stress: zero in the outer layers, the Lifshitz force inside",
        &["x", "chi", "stress"],
    );
    for x in (Grid {
        start: -tl.a,
        stop: 2.0 * tl.a,
        count: 301,
    })
    .values()
    {
        let inside = x > 0.0 && x < tl.a;
        t.push(vec![x, profile.chi(x)?, if inside { r.value } else { 0.0 }]);
    }
    t.set_meta("F_l", r.value);
    t.set_meta("F_r", -r.value);
    t.set_meta("est_error", r.est_error);
    t.set_meta("closed_form", lifshitz_closed_form(tl)?);
    t.set_meta("repulsive", r.value < 0.0);
    Ok(t)
}

fn fig7(cfg: &RunConfig, sech: &SusceptibilityProfile) -> Result<Table> {
    use figure_params::*;
    let kappa = SPECTRAL_KAPPA;
    let chain = chain_from_profile(sech, SECH2_PARTICLES, SECH2_SPAN.0, SECH2_SPAN.1)?;
    let ws = solve_waves(sech, kappa, None)?;
    let d = chain.delta();
    let rows = collect(chain.len(), cfg.threads, |j| {
        let x = chain.positions()[j];
        Ok(vec![
            (j + 1) as f64,
            x,
            chain.chi(j),
            spectral_force(&chain, j, kappa)? / d,
            force_density(&ws, x)?,
            force_density_asymptotics(sech, x, kappa)?,
        ])
    })?;
    let mut t = Table::new(
        "fig7",
        "spectral forces -d_j ln T22 / delta against the macroscopic spectral density and its asymptote",
        &["j", "x", "chi", "discrete_over_delta", "f_tilde", "f_tilde_asymptote"],
    );
    rows.into_iter().for_each(|r| t.push(r));
    t.set_meta("kappa", kappa);
    t.set_meta(
        "density_normalization",
        format!("force = (1/{:.6}) int f_tilde d kappa", 2.0 * PI),
    );
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_particle_feels_no_force() {
        let mut c = RunConfig::new(Command::ChainForce);
        c.alphas = Some(vec![0.5]);
        let out = run(&c).unwrap();
        let f = out.tables[0].column("force").unwrap();
        assert_eq!(f.len(), 1);
        assert!(f[0].abs() < 1e-12);
    }

    #[test]
    fn symmetric_layers_balance() {
        let mut c = RunConfig::new(Command::ThreeLayer);
        c.profile = Some(SusceptibilityProfile::three_layer(1.0, 2.0, 1.0, 1.0));
        c.lifshitz = true;
        let t = &run(&c).unwrap().tables[0];
        let (fl, fr) = (t.rows[0][0], t.rows[0][1]);
        assert_eq!(fl, -fr);
        assert!((fl - t.rows[0][3]).abs() < 1e-9 * fl.abs());
    }

    #[test]
    fn stress_below_cutoff_is_rejected() {
        let mut c = RunConfig::new(Command::RenormStress);
        c.profile = Some(SusceptibilityProfile::Sech2 { chi0: 1.0, a: 0.15 });
        c.kappa = Some(KappaSpec::Single { value: 0.5 });
        c.x = Some(Grid::single(0.1));
        assert!(matches!(run(&c), Err(Error::Locality { .. })));
        c.kappa_min_cutoff = Some(0.0);
        assert!(run(&c).is_ok());
    }

    #[test]
    fn sech2_table_has_pole_markers() {
        let mut c = RunConfig::new(Command::Sech2);
        c.profile = Some(SusceptibilityProfile::Sech2 { chi0: 1.0, a: 0.5 });
        c.kappa = Some(KappaSpec::Single { value: 2.0 });
        c.x = Some(Grid {
            start: -1.0,
            stop: 1.0,
            count: 3,
        });
        let t = &run(&c).unwrap().tables[0];
        assert!(t.column("decaying").unwrap()[0].is_nan());
        assert!(t.column("green_diag").unwrap().iter().all(|g| *g < 0.0));
    }
}
