use magnon_core::bath::{BathParams, HyperfineBath, SiteField, build_gaussian_bath};
use magnon_core::spinwave::*;
use magnon_core::Spin;
use nalgebra::DMatrix;
use proptest::prelude::*;

const S: Spin = Spin::THREE_HALVES;

/// Dense `I_z`, `I_+` in the `|m⟩` basis, index 0 = `-I`.
fn spin_matrices(spin: Spin) -> (DMatrix<f64>, DMatrix<f64>) {
    let d = spin.multiplicity();
    let i = spin.value();
    let mut iz = DMatrix::zeros(d, d);
    let mut ip = DMatrix::zeros(d, d);
    for k in 0..d {
        let m = k as f64 - i;
        iz[(k, k)] = m;
        if k + 1 < d {
            ip[(k + 1, k)] = (i * (i + 1.0) - m * (m + 1.0)).sqrt();
        }
    }
    (iz, ip)
}

fn single_site_raise(zeta: u8, spin: Spin) -> DMatrix<f64> {
    let (iz, ip) = spin_matrices(spin);
    match zeta {
        1 => &ip * &iz + &iz * &ip,
        _ => &ip * &ip,
    }
}

#[test]
fn prefactor_examples() {
    let r12 = 12f64.sqrt();
    assert!((ladder_prefactor(1, Sign::Plus, -1.5, S).unwrap() + r12).abs() < 1e-14);
    assert!((ladder_prefactor(1, Sign::Plus, 0.5, S).unwrap() - r12).abs() < 1e-14);
    assert!((ladder_prefactor(2, Sign::Plus, -0.5, S).unwrap() - r12).abs() < 1e-14);
    assert!((ladder_prefactor(2, Sign::Minus, 1.5, S).unwrap() - r12).abs() < 1e-14);
    assert!(ladder_prefactor(3, Sign::Plus, -1.5, S).is_err());
}

#[test]
fn prefactors_match_dense_operators() {
    for twice in 1..=9u32 {
        let spin = Spin::from_twice(twice);
        for zeta in [1u8, 2] {
            let raise = single_site_raise(zeta, spin);
            let lower = raise.transpose();
            let d = spin.multiplicity();
            for k in 0..d {
                let m = spin.level(k as u8);
                let up = if k + (zeta as usize) < d { raise[(k + zeta as usize, k)] } else { 0.0 };
                let down = if k >= zeta as usize { lower[(k - zeta as usize, k)] } else { 0.0 };
                assert!((ladder_prefactor(zeta, Sign::Plus, m, spin).unwrap() - up).abs() < 1e-12);
                assert!((ladder_prefactor(zeta, Sign::Minus, m, spin).unwrap() - down).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn dark_transitions_for_three_halves() {
    // Exhaustive scan of the spin-3/2 manifold.
    let mut dark = Vec::new();
    for zeta in [1u8, 2] {
        for sign in [Sign::Plus, Sign::Minus] {
            for m in S.levels() {
                let target = m + zeta as f64 * sign.value();
                let inside = target.abs() <= 1.5;
                let p = ladder_prefactor(zeta, sign, m, S).unwrap();
                if inside && p == 0.0 {
                    dark.push((zeta, sign, m));
                }
                if !inside {
                    assert_eq!(p, 0.0);
                }
            }
        }
    }
    // ζ=1 vanishes only across the central pair.
    assert_eq!(dark, vec![(1, Sign::Plus, -0.5), (1, Sign::Minus, 0.5)]);
}

#[test]
fn mode_factor_matches_edge_prefactor() {
    for zeta in [1u8, 2] {
        let f = mode_factor(zeta, S);
        assert!((f.abs() - 2.0 * 3f64.sqrt()).abs() < 1e-14);
        let p = ladder_prefactor(zeta, Sign::Plus, -1.5, S).unwrap();
        assert!((f - p).abs() < 1e-14);
    }
}

#[test]
fn mode_strength_from_bath() {
    let p = BathParams { lattice_spacing: 1.0, theta: 0.6, ..Default::default() };
    let b = build_gaussian_bath(&p).unwrap();
    for zeta in [1u8, 2] {
        let m = mode_couplings(&b, p.omega_zn, zeta).unwrap();
        let s = if zeta == 1 { (2.0 * 0.6f64).sin() } else { 0.6f64.sin().powi(2) };
        let direct: f64 = (0..b.len()).map(|j| 0.5 * p.a_total * b.a[j] * p.b_q * s / p.omega_zn).sum();
        assert!((m.a_zeta - direct).abs() < 1e-12 * direct.abs());
        // Uniform B_Q and θ: mode weights equal the hyperfine weights.
        for (x, y) in m.a_mode.iter().zip(&b.a) {
            assert!((x - y).abs() < 1e-15);
        }
        let doubled = mode_couplings(&b, 2.0 * p.omega_zn, zeta).unwrap();
        assert!((doubled.a_zeta - 0.5 * m.a_zeta).abs() < 1e-12 * m.a_zeta.abs());
    }
}

#[test]
fn perpendicular_field_decouples_first_mode() {
    let b = HyperfineBath::uniform(10, 1.0, S)
        .unwrap()
        .with_quadrupole(SiteField::Uniform(1.0), SiteField::Uniform(std::f64::consts::FRAC_PI_2));
    assert!(mode_couplings(&b, 1.0, 1).is_err());
    assert!(mode_couplings(&b, 1.0, 2).is_ok());
}

#[test]
fn per_site_fields_reweight() {
    let b = HyperfineBath::uniform(2, 1.0, S)
        .unwrap()
        .with_quadrupole(SiteField::PerSite(vec![1.0, 3.0]), SiteField::Uniform(1.0));
    let m = mode_couplings(&b, 1.0, 2).unwrap();
    assert!((m.a_mode[0] - 0.25).abs() < 1e-15 && (m.a_mode[1] - 0.75).abs() < 1e-15);
}

#[test]
fn collective_rate_scales_as_sqrt_n() {
    // Fixed coupling per site: A_total grows with N.
    let rate = |n: usize| {
        let b = HyperfineBath::uniform(n, n as f64, S).unwrap();
        let m = mode_couplings(&b, 1.0, 2).unwrap();
        collective_rate(2, S, m.a_zeta, m.sum_sq())
    };
    let r1 = rate(100);
    for n in [400, 1600, 6400] {
        let ratio = rate(n) / r1;
        assert!((ratio - (n as f64 / 100.0).sqrt()).abs() < 1e-10, "{n}: {ratio}");
    }
}

proptest! {
    #[test]
    fn raise_and_lower_are_adjoint(twice in 1u32..12, k in 0usize..12, zeta in 1u8..=2) {
        let spin = Spin::from_twice(twice);
        prop_assume!(k + zeta as usize <= twice as usize);
        let m = spin.level(k as u8);
        let up = ladder_prefactor(zeta, Sign::Plus, m, spin).unwrap();
        let down = ladder_prefactor(zeta, Sign::Minus, m + zeta as f64, spin).unwrap();
        prop_assert!((up - down).abs() < 1e-12);
    }
}
