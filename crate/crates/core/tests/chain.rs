use magnon_core::bath::{sample_thermal_configuration, HyperfineBath, NuclearConfiguration, SiteField};
use magnon_core::chain::*;
use magnon_core::dynamics::{Electron, NuclearState, Propagator};
use magnon_core::linalg::C64;
use magnon_core::pulse::effective_coupling;
use magnon_core::spinwave::{mode_couplings, prefactor_table, ModeCouplings, Sign};
use magnon_core::{Error, Spin};

const S: Spin = Spin::THREE_HALVES;

fn uniform_mode(zeta: u8, n: usize) -> ModeCouplings {
    ModeCouplings::from_weights(zeta, 1.0, &vec![1.0; n]).unwrap()
}

/// `√Σ(a_j P(m_j))²` written out per site.
fn omega_direct(config: &NuclearConfiguration, mode: &ModeCouplings, sign: Sign) -> f64 {
    let table = prefactor_table(mode.zeta, sign, S).unwrap();
    let mut terms: Vec<f64> =
        config.levels().iter().zip(&mode.a_mode).map(|(&k, a)| (a * table[k as usize]).powi(2)).collect();
    terms.sort_by(f64::total_cmp);
    terms.iter().sum::<f64>().sqrt()
}

#[test]
fn omega_examples() {
    // Two sites at m = -3/2 and m = +1/2 with weights 0.75 / 0.25.
    let c = NuclearConfiguration::from_m(S, &[-1.5, 0.5]).unwrap();
    let m = ModeCouplings::from_weights(1, 2.0, &[3.0, 1.0]).unwrap();
    let r = omega_rates(&c, &m).unwrap();
    let r12 = 12f64.sqrt();
    assert!((r.omega_plus - (0.75f64.powi(2) + 0.25f64.powi(2)).sqrt() * r12).abs() < 1e-14);
    // Lowering only from +1/2 (to -1/2 has P₋ = 0 for ζ=1) so Ω₋ = 0.
    assert_eq!(r.omega_minus, 0.0);
    assert!((r.g_plus - effective_coupling(2.0) * r.omega_plus).abs() < 1e-14);

    let m2 = ModeCouplings::from_weights(2, 1.0, &[3.0, 1.0]).unwrap();
    let r2 = omega_rates(&c, &m2).unwrap();
    assert!((r2.omega_plus - 0.75 * r12).abs() < 1e-14);
    assert!((r2.omega_minus - 0.25 * r12).abs() < 1e-14);
    assert!((r2.leakage - 1.0 / 3.0).abs() < 1e-14);
}

#[test]
fn omega_matches_direct_sum_on_thermal_configs() {
    for (seed, p) in [(1, 0.0), (2, 0.3), (3, 0.8)] {
        let c = sample_thermal_configuration(p, S, 3000, seed).unwrap();
        for zeta in [1u8, 2] {
            let m = ModeCouplings::from_weights(zeta, 1.0, &(0..3000).map(|j| 1.0 + (j % 7) as f64).collect::<Vec<_>>()).unwrap();
            let r = omega_rates(&c, &m).unwrap();
            assert!((r.omega_plus - omega_direct(&c, &m, Sign::Plus)).abs() < 1e-13);
            assert!((r.omega_minus - omega_direct(&c, &m, Sign::Minus)).abs() < 1e-13);
        }
    }
}

#[test]
fn unpolarised_leakage_tends_to_one() {
    let n = 20_000;
    for zeta in [1u8, 2] {
        let mut mean = 0.0;
        for seed in 0..20 {
            let c = sample_thermal_configuration(0.0, S, n, seed).unwrap();
            mean += omega_rates(&c, &uniform_mode(zeta, n)).unwrap().leakage / 20.0;
        }
        assert!((mean - 1.0).abs() < 0.01, "ζ={zeta}: {mean}");
    }
}

#[test]
fn fully_polarised_has_no_downward_links() {
    let c = NuclearConfiguration::fully_polarised(S, 30);
    for zeta in [1u8, 2] {
        let (plus, minus) = closed_form_links(&c, &uniform_mode(zeta, 30), 6).unwrap();
        assert!(plus[0] > 0.0);
        assert!(plus[1..].iter().all(|w| *w == 0.0), "{plus:?}");
        assert!(minus.iter().all(|w| *w == 0.0));
    }
}

#[test]
fn uniform_structure() {
    let b = uniform_links(2.0, 0.5, 5).unwrap();
    assert_eq!(b.k_star, 5);
    for k in 0..5 {
        let (p, m) = if k % 2 == 0 { (2.0, 0.5) } else { (0.5, 2.0) };
        assert_eq!(b.element(Sign::Plus, k, k + 1), p);
        assert_eq!(b.element(Sign::Plus, k + 1, k), p);
        assert_eq!(b.element(Sign::Minus, k, k + 1), m);
        assert_eq!(b.element(Sign::Plus, k, k), 0.0);
    }
    assert_eq!(b.element(Sign::Plus, 5, 6), 0.0);
    assert!((b.leakage() - 0.25).abs() < 1e-15);
    assert!(uniform_links(1.0, 0.1, 0).is_err());
    assert!(ChainBasis::new(vec![1.0, -1.0], vec![0.0, 0.0]).is_err());
}

#[test]
fn leakage_spreads_population_beyond_first_step() {
    let occupation_beyond_one = |leak: f64| {
        let prop = Propagator::new(&uniform_links(1.0, leak, 12).unwrap());
        let l = &prop.layout;
        let mut v = vec![C64::new(0.0, 0.0); l.dim()];
        v[l.index(Electron::Up, NuclearState::Even(0))] = C64::new(1.0, 0.0);
        let psi = prop.apply(&v, std::f64::consts::FRAC_PI_2);
        let mut deep = 0.0;
        for e in [Electron::Up, Electron::Down] {
            for k in 2..=12 {
                for b in [Sign::Plus, Sign::Minus] {
                    if k % 2 == 0 && b == Sign::Minus {
                        continue;
                    }
                    deep += psi[l.index(e, NuclearState::on_branch(b, k))].norm_sqr();
                }
            }
        }
        deep
    };
    assert!(occupation_beyond_one(0.0) < 1e-28);
    let d = occupation_beyond_one(0.3);
    assert!(d > 1e-3 && d < 0.5, "{d}");
}

#[test]
fn truncation_examples() {
    let horizon = 3.2 * std::f64::consts::FRAC_PI_2;
    assert_eq!(select_truncation(0.0, horizon, 1e-8).unwrap(), 1);
    let k3 = select_truncation(0.3, horizon, 1e-8).unwrap();
    let k5 = select_truncation(0.5, horizon, 1e-8).unwrap();
    let k3_loose = select_truncation(0.3, horizon, 1e-4).unwrap();
    assert!(k3 > 1 && k5 >= k3 && k3_loose <= k3, "{k3} {k5} {k3_loose}");
    assert!(select_truncation(-0.1, 1.0, 1e-8).is_err());
    assert_eq!(select_truncation(1e3, 100.0, 1e-14), Err(Error::TruncationCap { cap: TRUNCATION_CAP }));
}

#[test]
fn selected_depth_agrees_with_doubled_chain() {
    // Independent check: evolve on k and 2k chains, compare the electron
    // return amplitude over the horizon.
    let horizon = 3.2 * std::f64::consts::FRAC_PI_2;
    for leak in [0.2, 0.4, 0.7] {
        let k = select_truncation(leak, horizon, 1e-8).unwrap();
        let small = Propagator::new(&uniform_links(1.0, leak, k).unwrap());
        let large = Propagator::new(&uniform_links(1.0, leak, 2 * k).unwrap());
        for i in 1..=16 {
            let t = horizon * i as f64 / 16.0;
            let amp = |p: &Propagator| {
                let l = &p.layout;
                let mut v = vec![C64::new(0.0, 0.0); l.dim()];
                let i0 = l.index(Electron::Up, NuclearState::Even(0));
                v[i0] = C64::new(1.0, 0.0);
                p.apply(&v, t)[i0]
            };
            assert!((amp(&small) - amp(&large)).norm() < 1e-3, "leak {leak} k {k} t {t}");
        }
    }
}

/// Largest `|link/(√n_new·Ω) − 1|` over the first few depths of both branches.
fn closed_form_vs_uniform(n: usize, seed: u64) -> f64 {
    let c = sample_thermal_configuration(0.5, S, n, seed).unwrap();
    let m = uniform_mode(2, n);
    let r = omega_rates(&c, &m).unwrap();
    let (plus, minus) = closed_form_links(&c, &m, 5).unwrap();
    let mut worst: f64 = 0.0;
    for (branch, links) in [(Sign::Plus, &plus), (Sign::Minus, &minus)] {
        for (k, w) in links.iter().enumerate().take(5) {
            let (p, q) = slot_counts(branch, k);
            let (p2, _) = slot_counts(branch, k + 1);
            let (n_new, omega) = if p2 > p { (p2, r.omega_plus) } else { (q + 1, r.omega_minus) };
            worst = worst.max((w / ((n_new as f64).sqrt() * omega) - 1.0).abs());
        }
    }
    worst
}

#[test]
fn closed_form_approaches_uniform_with_n() {
    let d: Vec<f64> = [50, 500, 5000].iter().map(|&n| closed_form_vs_uniform(n, 12)).collect();
    assert!(d[0] > d[1] && d[1] > d[2], "{d:?}");
    assert!(d[2] < 2e-3, "{d:?}");
}

#[test]
fn magnetisation_bookkeeping() {
    for k in 0..10 {
        for b in [Sign::Plus, Sign::Minus] {
            let (p, q) = slot_counts(b, k);
            assert_eq!(p + q, k);
            assert_eq!(p as i32 - q as i32, ChainBasis::magnetisation(b, k));
        }
    }
}

#[test]
fn selection_rule() {
    let c = sample_thermal_configuration(0.4, S, 40, 3).unwrap();
    let m = uniform_mode(2, 40);
    for k in 0..6 {
        for k2 in 0..6 {
            let w = exact_chain_element(&c, &m, k, k2, Sign::Plus).unwrap();
            if k.abs_diff(k2) != 1 {
                assert_eq!(w, 0.0);
            } else {
                assert!(w > 0.0);
            }
        }
    }
    let other = NuclearConfiguration::fully_polarised(Spin::from_twice(5), 3);
    assert_eq!(
        exact_chain_element(&other, &uniform_mode(2, 3), 0, 1, Sign::Plus),
        Err(Error::UnsupportedSpin(2.5))
    );
}

#[test]
fn ensemble_leakage_columns() {
    let bath = HyperfineBath::uniform(400, 65_000.0, S)
        .unwrap()
        .with_quadrupole(SiteField::Uniform(1.5), SiteField::Uniform(std::f64::consts::FRAC_PI_4));
    let modes: Vec<ModeCouplings> = [1u8, 2].iter().map(|&z| mode_couplings(&bath, 50.0, z).unwrap()).collect();
    let r = ensemble_leakage(&bath, &modes, &[0.0, 0.5, 1.0], 100, 9).unwrap();
    for name in ["leak_z1_mean", "leak_z2_mean", "leak_z1_rsd", "leak_z2_rsd", "diff_z2_z1_mean"] {
        assert!(r.column(name).is_some(), "{name}");
    }
    let z2 = r.column("leak_z2_mean").unwrap();
    assert_eq!(z2[2], 0.0);
    assert!(z2[0] > z2[1]);
    assert!(ensemble_leakage(&bath, &modes, &[0.5], 99, 9).is_err());
    assert_eq!(r, ensemble_leakage(&bath, &modes, &[0.0, 0.5, 1.0], 100, 9).unwrap());
}
