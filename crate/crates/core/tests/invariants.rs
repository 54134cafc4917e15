use num_complex::Complex64;
use proptest::prelude::*;
use rand::{rngs::StdRng, Rng, SeedableRng};

use casimir_chain::analytic::{lifshitz_spectral, Sech2Config, ThreeLayerConfig};
use casimir_chain::config::{Command, Grid, KappaSpec, RunConfig};
use casimir_chain::force::spectral_force;
use casimir_chain::helmholtz::{force_density, solve_waves};
use casimir_chain::profile::{chain_from_profile, ScattererChain, SusceptibilityProfile};
use casimir_chain::quadrature::{romberg_integrate, QuadConfig};
use casimir_chain::specfun::{gamma, hyp2f1, lerch_phi};
use casimir_chain::stress::{spectral_stresses, stress_bundle};
use casimir_chain::transfer::{propagation_matrix, run_rescaled_recurrence, scatterer_matrix};
use casimir_chain::ForceEngine;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn profiles() -> impl Strategy<Value = SusceptibilityProfile> {
    prop_oneof![
        (0.0..4.0f64, 0.05..2.0f64).prop_map(|(chi0, a)| SusceptibilityProfile::Sech2 { chi0, a }),
        (1.0..3.0f64, 1.0..3.0f64, 1.0..3.0f64, 0.2..2.0f64)
            .prop_map(|(n1, n2, n3, a)| SusceptibilityProfile::three_layer(n1, n2, n3, a)),
    ]
}

fn chains() -> impl Strategy<Value = ScattererChain> {
    (prop::collection::vec(0.0..2.0f64, 2..40), 0.01..0.5f64)
        .prop_map(|(alphas, delta)| ScattererChain::uniform(0.0, delta, alphas).unwrap())
}

/// `alpha` list and its mirror image appended.
fn mirror_chains() -> impl Strategy<Value = ScattererChain> {
    (prop::collection::vec(0.0..1.5f64, 1..8), any::<bool>(), 0.02..0.3f64).prop_map(|(half, odd, delta)| {
        let mut alphas = half.clone();
        if odd {
            alphas.push(0.7);
        }
        alphas.extend(half.iter().rev());
        ScattererChain::uniform(0.0, delta, alphas).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn index_matches_susceptibility(p in profiles(), x in -3.0..3.0f64) {
        let n = p.n(x).unwrap();
        prop_assert!((n * n - 1.0 - p.chi(x).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn chain_sampling_reproduces_chi(p in profiles(), n in 2usize..60) {
        let (lo, hi) = (-1.5, 2.5);
        let chain = chain_from_profile(&p, n, lo, hi).unwrap();
        for j in 1..n - 1 {
            let chi = p.chi(chain.positions()[j]).unwrap();
            prop_assert!((chain.chi(j) - chi).abs() <= 2.0 * f64::EPSILON * chi);
        }
    }

    #[test]
    fn t22_is_the_same_from_every_particle(chain in chains(), kappa in 0.01..50.0f64) {
        let s = run_rescaled_recurrence(&chain, kappa).unwrap();
        let l0 = s.ln_t22[0];
        for &l in &s.ln_t22 {
            // relative deviation of T22 itself
            prop_assert!((l - l0).abs() < 1e-9);
        }
    }

    #[test]
    fn vacuum_chain_is_force_free(n in 1usize..30, delta in 0.01..1.0f64, kappa in 0.01..100.0f64) {
        let chain = ScattererChain::uniform(0.0, delta, vec![0.0; n]).unwrap();
        let s = run_rescaled_recurrence(&chain, kappa).unwrap();
        prop_assert!(s.log_derivative.iter().all(|&d| d == 0.0));
    }

    #[test]
    fn wronskian_is_constant(chi0 in 0.0..4.0f64, a in 0.05..1.0f64, kappa in 0.1..40.0f64) {
        let p = SusceptibilityProfile::Sech2 { chi0, a };
        let ws = solve_waves(&p, kappa, None).unwrap();
        let w0 = ws.wronskian_at(0.0).unwrap();
        for i in 0..=20 {
            let x = -4.0 * a + 8.0 * a * i as f64 / 20.0;
            prop_assert!((ws.wronskian_at(x).unwrap() - w0).abs() < 1e-8 * w0.abs());
        }
    }

    #[test]
    fn abraham_pressure_follows_electric_stress(chi0 in 0.0..4.0f64, a in 0.05..1.0f64, kappa in 0.1..40.0f64, x in -1.0..1.0f64) {
        let p = SusceptibilityProfile::Sech2 { chi0, a };
        let s = spectral_stresses(&solve_waves(&p, kappa, None).unwrap(), x).unwrap();
        let n2 = p.n(x).unwrap().powi(2);
        prop_assert!((s.p_ab + (n2 - 1.0) / n2 * s.sigma_e).abs() <= 1e-14 * s.sigma_e.abs());
    }

    #[test]
    fn effective_stress_needs_a_valid_kappa(chi0 in 0.1..4.0f64, a in 0.05..1.0f64, x in -1.0..1.0f64) {
        let p = SusceptibilityProfile::Sech2 { chi0, a };
        let cutoff = casimir_chain::stress::locality_cutoff(&p, x).unwrap();
        prop_assume!(cutoff > 1e-3);
        let ws = solve_waves(&p, 0.5 * cutoff, None).unwrap();
        let is_locality = matches!(stress_bundle(&ws, x, None), Err(casimir_chain::Error::Locality { .. }));
        prop_assert!(is_locality);
    }

    #[test]
    fn lifshitz_integrand_sign(n1 in 1.0..3.0f64, n2 in 1.0..3.0f64, n3 in 1.0..3.0f64, a in 0.1..2.0f64, kappa in 0.01..20.0f64) {
        let cfg = ThreeLayerConfig::new(n1, n2, n3, a).unwrap();
        let product = cfg.rho_l() * cfg.rho_r();
        let f = lifshitz_spectral(&cfg, kappa);
        if product > 0.0 {
            prop_assert!(f >= 0.0);
        } else if product < 0.0 {
            prop_assert!(f <= 0.0);
        }
    }

    #[test]
    fn nu_pair_vieta(chi0 in 0.01..4.0f64, a in 0.05..2.0f64, t in 0.5..1.5f64) {
        let cfg = Sech2Config::new(chi0, a).unwrap();
        // scan across the real/complex transition
        let kappa = t / (2.0 * a * chi0.sqrt());
        let (nm, np) = cfg.nu_pair(kappa);
        prop_assert!((nm + np - 1.0).norm() < 1e-12);
        prop_assert!((nm * np - chi0 * (a * kappa).powi(2)).norm() < 1e-12 * (1.0 + chi0 * (a * kappa).powi(2)));
    }

    #[test]
    fn gamma_reflection(re in -4.0..4.0f64, im in -3.0..3.0f64) {
        let z = Complex64::new(re, im);
        prop_assume!(im.abs() > 1e-3 || (re - re.round()).abs() > 1e-3);
        let lhs = gamma(z).unwrap() * gamma(1.0 - z).unwrap();
        let rhs = std::f64::consts::PI / (z * std::f64::consts::PI).sin();
        prop_assert!((lhs - rhs).norm() <= 1e-11 * rhs.norm());
    }

    #[test]
    fn hyp2f1_contiguous_in_a(a in -2.0..2.0f64, b in -2.0..2.0f64, cc in 0.5..4.0f64, z in 0.0..0.9f64) {
        // (c - a) F(a-1) + (2a - c + (b - a) z) F(a) + a (z - 1) F(a+1) = 0
        let f = |a: f64| hyp2f1(c(a), c(b), cc, z).unwrap();
        let terms = [(cc - a) * f(a - 1.0), (2.0 * a - cc + (b - a) * z) * f(a), a * (z - 1.0) * f(a + 1.0)];
        let scale = terms.iter().map(|t| t.abs()).fold(1.0, f64::max);
        prop_assert!(terms.iter().sum::<f64>().abs() < 1e-9 * scale);
    }

    #[test]
    fn lerch_shift(z in -0.95..0.95f64, s in 1u32..5, x in 0.05..20.0f64) {
        let lhs = lerch_phi(z, s, x).unwrap();
        let rhs = z * lerch_phi(z, s, x + 1.0).unwrap() + x.powi(-(s as i32));
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
    }

    #[test]
    fn config_round_trip(chi0 in 0.0..5.0f64, a in 0.01..3.0f64, k0 in 0.1..10.0f64, count in 1usize..50, tol in 1e-14..1e-6f64, threads in prop::option::of(1usize..32)) {
        let mut cfg = RunConfig::new(Command::RenormStress);
        cfg.profile = Some(SusceptibilityProfile::Sech2 { chi0, a });
        cfg.kappa = Some(KappaSpec::Range { start: k0, stop: 3.0 * k0, count, log: count % 2 == 0 });
        cfg.x = Some(Grid { start: -a, stop: a, count });
        cfg.quad.tol = tol;
        cfg.threads = threads;
        let back = RunConfig::from_json(&cfg.to_json()).unwrap();
        prop_assert_eq!(back, cfg);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn newton_third_law(chain in chains()) {
        let r = ForceEngine::new(QuadConfig::default()).force_all(&chain, Some(1));
        prop_assert!(r.is_complete());
        prop_assert!(r.net_force().abs() <= 1e-8 * r.max_abs().max(1e-300));
    }

    #[test]
    fn mirror_antisymmetry(chain in mirror_chains()) {
        let r = ForceEngine::new(QuadConfig::default()).force_all(&chain, Some(1));
        let n = chain.len();
        for j in 0..n {
            prop_assert!((r.forces[j] + r.forces[n - 1 - j]).abs() <= 1e-9 * r.max_abs().max(1e-300));
        }
    }

    #[test]
    fn halving_tol_stays_within_error(c1 in 0.1..10.0f64, c2 in 0.1..10.0f64, p in 0u32..4) {
        let f = |_: _, k: f64| Ok(k.powi(p as i32) * (-c1 * k).exp() / (1.0 + c2 * k * k));
        let loose = romberg_integrate(f, &QuadConfig::default().with_tol(1e-6)).unwrap();
        let tight = romberg_integrate(f, &QuadConfig::default().with_tol(5e-7)).unwrap();
        prop_assert!((tight.value - loose.value).abs() <= loose.est_error.max(1e-15 * loose.value.abs()));
    }
}

#[test]
fn transfer_determinant_is_one() {
    let mut rng = StdRng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..1_000_000 {
        let kappa: f64 = rng.gen_range(0.0..50.0);
        let delta: f64 = rng.gen_range(0.0..10.0);
        let alpha: f64 = rng.gen_range(0.0..5.0);
        let m = propagation_matrix(kappa, delta)
            .unwrap()
            .mul(&scatterer_matrix(kappa, alpha));
        let scale = m.m11.abs() * m.m22.abs() + m.m12.abs() * m.m21.abs();
        worst = worst.max((m.det() - 1.0).abs() / scale.max(1.0));
    }
    assert!(worst < 1e-10, "worst determinant deviation {worst}");
}

/// Largest interior relative deviation of `F_j / delta` from the slab density.
fn block_deviation(n: usize) -> f64 {
    let block = SusceptibilityProfile::block(0.0, 1.0, 1.0);
    let chain = chain_from_profile(&block, n, 0.0, 1.0).unwrap();
    let d = chain.delta();
    let slab = ThreeLayerConfig::new(1.0, 2f64.sqrt(), 1.0, 1.0 + d).unwrap();
    let r = ForceEngine::new(QuadConfig::default()).force_all(&chain, None);
    let mut dev: f64 = 0.0;
    for (j, &x) in chain.positions().iter().enumerate() {
        if x > 0.1 && x < 0.9 && (x - 0.5).abs() > 1e-9 {
            let f = casimir_chain::analytic::lerch_force_density(&slab, x + d / 2.0).unwrap();
            dev = dev.max((r.forces[j] / d - f).abs() / f.abs());
        }
    }
    dev
}

#[test]
fn block_forces_converge_at_first_order() {
    let devs: Vec<f64> = [25, 51, 101, 201].iter().map(|&n| block_deviation(n)).collect();
    for w in devs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order >= 1.0, "observed order {order} from {devs:?}");
    }
}

#[test]
fn spectral_forces_approach_the_macroscopic_density() {
    let p = SusceptibilityProfile::Sech2 { chi0: 1.0, a: 0.15 };
    let kappa = 8.0;
    let x = 0.1;
    let target = force_density(&solve_waves(&p, kappa, None).unwrap(), x).unwrap();
    let devs: Vec<f64> = [51, 101, 201]
        .iter()
        .map(|&n| {
            let chain = chain_from_profile(&p, n, -0.5, 0.5).unwrap();
            let j = chain.positions().iter().position(|&xj| (xj - x).abs() < 1e-12).unwrap();
            (spectral_force(&chain, j, kappa).unwrap() / chain.delta() - target).abs() / target.abs()
        })
        .collect();
    for w in devs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order >= 1.0, "observed order {order} from {devs:?}");
    }
}
