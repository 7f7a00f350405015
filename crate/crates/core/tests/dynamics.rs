use std::f64::consts::{FRAC_PI_2, PI};

use magnon_core::bath::{HyperfineBath, SiteField};
use magnon_core::chain::uniform_links;
use magnon_core::dynamics::*;
use magnon_core::linalg::C64;
use magnon_core::Spin;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const S: Spin = Spin::THREE_HALVES;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn random_qubit(rng: &mut ChaCha8Rng) -> (C64, C64) {
    let v: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    (c(v[0] / n, v[1] / n), c(v[2] / n, v[3] / n))
}

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[test]
fn polarised_evolution_matches_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..50 {
        let g = rng.random_range(0.1..3.0);
        let t = rng.random_range(0.0..10.0);
        let (alpha, beta) = random_qubit(&mut rng);
        let chain = uniform_links(g, 0.0, 3).unwrap();
        let prop = Propagator::new(&chain);
        let l = &prop.layout;
        let psi = prop.apply(&HybridState::initial(l, alpha, beta).amplitudes, t);
        // α cos(Gt)|↑,0⟩ − iα sin(Gt)|↓,1⟩ + β|↓,0⟩.
        let mut want = vec![c(0.0, 0.0); l.dim()];
        want[l.index(Electron::Up, NuclearState::Even(0))] = alpha * (g * t).cos();
        want[l.index(Electron::Down, NuclearState::Plus(1))] = alpha * c(0.0, -(g * t).sin());
        want[l.index(Electron::Down, NuclearState::Even(0))] = beta;
        for (a, b) in psi.iter().zip(&want) {
            assert!((a - b).norm() < 1e-10);
        }
    }
}

#[test]
fn propagator_is_unitary_and_linear() {
    let prop = Propagator::new(&uniform_links(1.3, 0.45, 9).unwrap());
    let n = prop.dim();
    for t in [0.0, 0.3, 2.0, 17.0] {
        let u = prop.unitary(t);
        let err = max_abs(&(&u * u.adjoint() - DMatrix::<C64>::identity(n, n)));
        assert!(err < 1e-12, "t={t}: {err}");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let x: Vec<C64> = (0..n).map(|_| c(rng.random(), rng.random())).collect();
    let y: Vec<C64> = (0..n).map(|_| c(rng.random(), rng.random())).collect();
    let (a, b) = (c(0.3, -1.2), c(-0.7, 0.4));
    let mix: Vec<C64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
    let lhs = prop.apply(&mix, 1.7);
    let (ux, uy) = (prop.apply(&x, 1.7), prop.apply(&y, 1.7));
    for i in 0..n {
        assert!((lhs[i] - (a * ux[i] + b * uy[i])).norm() < 1e-12);
    }
    // Time composition.
    let two = prop.apply(&prop.apply(&x, 0.8), 0.9);
    let one = prop.apply(&x, 1.7);
    assert!(two.iter().zip(&one).all(|(p, q)| (p - q).norm() < 1e-12));
}

#[test]
fn density_invariants() {
    let prop = Propagator::new(&uniform_links(1.0, 0.3, 10).unwrap());
    let start = HybridDensity::pure(&HybridState::initial(&prop.layout, c(0.6, 0.0), c(0.0, 0.8)));
    let (rho, _) = prop.evolve_density(&start, 1.4, 1e-3).unwrap();
    assert!((rho.trace() - c(1.0, 0.0)).norm() < 1e-12);
    assert!(max_abs(&(&rho.rho - rho.rho.adjoint())) < 1e-13);
    let nuc = rho.trace_electron();
    // Eigenvalues of the Hermitian block via its real embedding (each doubled).
    let n = nuc.nrows();
    let mut real = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = nuc[(i, j)];
            real[(i, j)] = z.re;
            real[(i + n, j + n)] = z.re;
            real[(i, j + n)] = -z.im;
            real[(i + n, j)] = z.im;
        }
    }
    let eig = real.symmetric_eigenvalues();
    assert!(eig.iter().all(|e| *e > -1e-12));
    assert!((eig.iter().sum::<f64>() - 2.0).abs() < 1e-12);
    let e = rho.trace_nuclear();
    assert!((e.trace() - c(1.0, 0.0)).norm() < 1e-12);
    assert!((e[(0, 1)] - e[(1, 0)].conj()).norm() < 1e-13);
}

#[test]
fn pure_evolution_monitors_boundary() {
    let chain = uniform_links(1.0, 0.6, 3).unwrap();
    let s = HybridState::initial(&HybridLayout::new(3), c(1.0, 0.0), c(0.0, 0.0));
    assert!(matches!(evolve(&s, &chain, 5.0, 1e-8), Err(magnon_core::Error::TruncationExceeded { .. })));
    let (out, occ) = evolve(&s, &chain, 0.01, 1e-4).unwrap();
    assert!(occ < 1e-4 && (out.norm() - 1.0).abs() < 1e-12 && out.time == 0.01);
    let wrong = HybridState::initial(&HybridLayout::new(2), c(1.0, 0.0), c(0.0, 0.0));
    assert!(evolve(&wrong, &chain, 1.0, 1e-4).is_err());
}

#[test]
fn ideal_write_read() {
    let g = 0.8;
    let prop = Propagator::new(&uniform_links(g, 0.0, 4).unwrap());
    let t0 = FRAC_PI_2 / g;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..20 {
        let (a, b) = random_qubit(&mut rng);
        let f = write_read_cycle(&prop, a, b, t0, t0, 1e-10).unwrap();
        assert!((f - 1.0).abs() < 1e-12, "{f}");
    }
    let r = average_fidelity(&prop, t0, t0, 1e-10).unwrap();
    assert!((r.mean - 1.0).abs() < 1e-12);
    // No storage: the readout returns the unwritten state's ↓ population.
    let r = average_fidelity(&prop, 0.0, 0.0, 1e-10).unwrap();
    assert!((r.mean - 0.5).abs() < 1e-12);
}

#[test]
fn write_read_examples() {
    // ψ=|↑⟩ half written (Gt = π/4): the electron keeps ↑ with weight 1/2.
    let prop = Propagator::new(&uniform_links(1.0, 0.0, 2).unwrap());
    let f = write_read_cycle(&prop, c(1.0, 0.0), c(0.0, 0.0), PI / 4.0, FRAC_PI_2, 1e-10).unwrap();
    assert!((f - 0.5).abs() < 1e-12, "{f}");
    // |↓⟩ is never disturbed.
    let f = write_read_cycle(&prop, c(0.0, 0.0), c(1.0, 0.0), 0.37, 1.1, 1e-10).unwrap();
    assert!((f - 1.0).abs() < 1e-12);
}

#[test]
fn optimiser_limits() {
    let prop = Propagator::new(&uniform_links(2.0, 0.0, 3).unwrap());
    let o = optimize_transfer_times(&prop, 1e-8).unwrap();
    assert!((o.t0 - FRAC_PI_2 / 2.0).abs() < 1e-15);
    assert!((o.t1 / o.t0 - 1.0).abs() < 1e-3 && (o.t2 / o.t0 - 1.0).abs() < 1e-3, "{o:?}");
    assert!((o.fidelity - 1.0).abs() < 1e-6);

    let horizon = 3.2 * FRAC_PI_2;
    let mut last = 1.0 + 1e-12;
    for leak in [0.0, 0.1, 0.2, 0.3, 0.5, 0.8] {
        let k = magnon_core::chain::select_truncation(leak, horizon, 1e-8).unwrap();
        let prop = Propagator::new(&uniform_links(1.0, leak, k).unwrap());
        let o = optimize_transfer_times(&prop, 1e-8).unwrap();
        assert!(o.fidelity <= last + 1e-9, "leak {leak}: {} > {last}", o.fidelity);
        last = o.fidelity;
        if leak == 0.3 {
            assert!(o.t1 / o.t0 > 1.0 && o.t1 / o.t0 < 1.2, "{o:?}");
        }
    }
}

fn quad_bath(n: usize, b_q: f64) -> HyperfineBath {
    HyperfineBath::uniform(n, 65_000.0, S)
        .unwrap()
        .with_quadrupole(SiteField::Uniform(b_q), SiteField::Uniform(FRAC_PI_2))
}

#[test]
fn coupling_against_zeeman() {
    let omegas = [5.0, 10.0, 20.0, 50.0];
    let ps = [0.0, 0.5, 1.0];
    let r = coupling_vs_zeeman(&quad_bath(500, 1.5), 2, &omegas, &ps, 20, 3).unwrap();
    for p in ps {
        let g = r.column(&format!("g_plus_p{p}")).unwrap();
        for (w, x) in omegas.iter().zip(g) {
            assert!((x * w - g[0] * omegas[0]).abs() < 1e-10 * g[0] * omegas[0]);
        }
    }
    let g1 = r.column("g_plus_p1").unwrap()[0];
    assert!(g1 > r.column("g_plus_p0.5").unwrap()[0] && g1 > r.column("g_plus_p0").unwrap()[0]);

    let doubled = coupling_vs_zeeman(&quad_bath(500, 3.0), 2, &omegas, &ps, 20, 3).unwrap();
    for p in ps {
        let name = format!("g_plus_p{p}");
        for (a, b) in r.column(&name).unwrap().iter().zip(doubled.column(&name).unwrap()) {
            assert!((2.0 * a - b).abs() < 1e-10 * b);
        }
    }
    assert!(coupling_vs_zeeman(&quad_bath(10, 1.0), 2, &[0.0], &ps, 5, 1).is_err());
}

#[test]
fn polarised_sweep_point_is_perfect() {
    let bath = quad_bath(200, 1.5);
    let mode = magnon_core::spinwave::mode_couplings(&bath, 50.0, 2).unwrap();
    let opts = FidelitySweepOptions { n_samples: 4, seed: 1, tol: 1e-8 };
    let r = fidelity_vs_polarisation(&bath, &mode, &[1.0], &opts).unwrap();
    assert!((r.column("fid_z2_mean").unwrap()[0] - 1.0).abs() < 1e-6);
    assert_eq!(r.column("fid_z2_std").unwrap()[0], 0.0);
}
