//! Invariants over generated inputs. Every proptest runs from a fixed seed.

use std::collections::{BTreeMap, HashSet};
use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ftf::budget::{depolarizing_kraus, kraus_average_fidelity, phase_error_fidelity, phase_tolerance, projector};
use ftf::composite::{assemble_ftf, diagonalize, track_labels, DeviceSpec, Label, COMPUTATIONAL, TRACKED};
use ftf::config::{bundled, DeviceConfigFile, BUNDLED};
use ftf::linalg::{hermiticity_defect, symmetry_defect, CMat};
use ftf::pulse::{conditional_phase, interference_setting, Columns, DriveLinePair, DrivenSystem, EvolveOptions, PulseEnvelope};
use ftf::qubit::{build_fluxonium_mode, build_transmon_mode, FluxoniumParams, TransmonParams};
use ftf::rb::{fit_rb, simulate_rb, Channel, RbSpec, Weights};
use ftf::zz::zz_exact;

fn config(cases: u32, seed: u64) -> Config {
    Config { cases, rng_seed: RngSeed::Fixed(seed), failure_persistence: None, ..Config::default() }
}

fn small_device(p: [f64; 9], flux: [f64; 3], j: [f64; 3]) -> DeviceSpec {
    let mut f1 = FluxoniumParams::new(p[0], p[1], p[2], flux[0] * TAU);
    let mut f2 = FluxoniumParams::new(p[3], p[4], p[5], flux[1] * TAU);
    f1.basis_size = 60;
    f2.basis_size = 60;
    DeviceSpec {
        fluxonium1: f1,
        fluxonium2: f2,
        transmon: TransmonParams { charge_cutoff: 20, ..TransmonParams::new(p[6], p[7], p[8], flux[2] * TAU) },
        j_1c: j[0],
        j_2c: j[1],
        j_12: j[2],
        levels: [4, 3, 4],
    }
}

fn device_strategy() -> impl Strategy<Value = DeviceSpec> {
    (
        (0.8..1.6f64, 0.4..1.0f64, 3.0..7.0f64, 0.8..1.6f64, 0.4..1.0f64, 3.0..7.0f64, 0.2..0.4f64, 2.0..5.0f64, 8.0..15.0f64),
        (0.4..0.6f64, 0.4..0.6f64, 0.0..1.0f64),
        (0.0..0.7f64, 0.0..0.7f64, -0.3..0.3f64),
    )
        .prop_map(|(p, f, j)| small_device([p.0, p.1, p.2, p.3, p.4, p.5, p.6, p.7, p.8], [f.0, f.1, f.2], [j.0, j.1, j.2]))
}

// ---- Hamiltonians ----

proptest! {
    #![proptest_config(config(24, 11))]

    #[test]
    fn composite_hamiltonian_is_symmetric(d in device_strategy()) {
        let asm = assemble_ftf(&d).unwrap();
        prop_assert_eq!(asm.h.nrows(), d.dim());
        prop_assert!(symmetry_defect(&asm.h) < 1e-12);
    }

    #[test]
    fn charge_matrices_are_hermitian(d in device_strategy()) {
        for m in [
            build_fluxonium_mode(&d.fluxonium1, 6).unwrap(),
            build_transmon_mode(&d.transmon, 5).unwrap(),
        ] {
            prop_assert!(hermiticity_defect(&m.n_matrix) < 1e-10);
        }
    }

    #[test]
    fn uncoupled_energies_are_sums(d in device_strategy()) {
        let d = d.uncoupled();
        let sys = diagonalize(&d).unwrap();
        let f1 = build_fluxonium_mode(&d.fluxonium1, d.levels[0]).unwrap();
        let c = build_transmon_mode(&d.transmon, d.levels[1]).unwrap();
        let f2 = build_fluxonium_mode(&d.fluxonium2, d.levels[2]).unwrap();
        let mut sums = Vec::new();
        for a in &f1.energies {
            for b in &c.energies {
                sums.extend(f2.energies.iter().map(|x| a + b + x));
            }
        }
        sums.sort_by(f64::total_cmp);
        for (e, s) in sys.energies.iter().zip(&sums) {
            prop_assert!((e - s).abs() < 1e-9);
        }
        prop_assert_eq!(zz_exact(&d).unwrap(), 0.0);
    }

    #[test]
    fn mirrored_device_has_same_spectrum(d in device_strategy()) {
        let a = diagonalize(&d).unwrap();
        let b = diagonalize(&d.mirrored()).unwrap();
        for (x, y) in a.energies.iter().zip(&b.energies) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn transmon_flux_periodic_and_symmetric(e_c in 0.2..0.4f64, e_j1 in 1.0..5.0f64, e_j2 in 5.0..15.0f64, f in 0.0..1.0f64) {
        let w = |phi: f64| build_transmon_mode(&TransmonParams::new(e_c, e_j1, e_j2, phi), 2).unwrap().omega01();
        let base = w(f * TAU);
        prop_assert!((base - w(f * TAU + TAU)).abs() < 1e-9);
        prop_assert!((w(PI + f) - w(PI - f)).abs() < 1e-9);
        let single = |phi: f64| build_transmon_mode(&TransmonParams::new(e_c, e_j1, 0.0, phi), 2).unwrap().omega01();
        prop_assert!((single(0.0) - single(f * TAU)).abs() < 1e-9);
    }

    #[test]
    fn linear_fluxonium_is_harmonic(e_c in 0.5..2.0f64, e_l in 0.3..1.5f64, flux in 0.0..1.0f64) {
        let m = build_fluxonium_mode(&FluxoniumParams::new(e_c, e_l, 0.0, flux * TAU), 6).unwrap();
        let w = (8.0 * e_c * e_l).sqrt();
        for k in 1..6 {
            prop_assert!((m.energies[k] - m.energies[k - 1] - w).abs() < 1e-8 * w);
        }
    }

    #[test]
    fn fluxonium_parity_at_half_flux(e_c in 0.8..1.6f64, e_l in 0.4..1.0f64, e_j in 3.0..7.0f64) {
        let m = build_fluxonium_mode(&FluxoniumParams::new(e_c, e_l, e_j, PI), 4).unwrap();
        prop_assert!(m.n_matrix[(0, 2)].norm() < 1e-8);
        prop_assert!(m.n_matrix[(1, 3)].norm() < 1e-8);
    }
}

// ---- truncation convergence and label continuity on the bundled devices ----

#[test]
fn fluxonium_basis_converged_on_bundled_devices() {
    for name in BUNDLED {
        let d = bundled(name).unwrap();
        for p in [d.fluxonium1, d.fluxonium2] {
            let a = build_fluxonium_mode(&p, 8).unwrap();
            let b = build_fluxonium_mode(&FluxoniumParams { basis_size: 180, ..p }, 8).unwrap();
            for k in 0..8 {
                assert!((a.energies[k] - b.energies[k]).abs() < 1e-6, "{name} level {k}");
            }
        }
        let t = build_transmon_mode(&d.transmon, 6).unwrap();
        let t2 = build_transmon_mode(&TransmonParams { charge_cutoff: 45, ..d.transmon }, 6).unwrap();
        for k in 0..6 {
            assert!((t.energies[k] - t2.energies[k]).abs() < 1e-9, "{name} coupler level {k}");
        }
    }
}

#[test]
fn zz_converged_in_kept_levels() {
    for name in BUNDLED {
        let d = bundled(name).unwrap();
        let a = zz_exact(&d).unwrap();
        let b = zz_exact(&DeviceSpec { levels: [10, 7, 10], ..d.clone() }).unwrap();
        assert!((a - b).abs() < 0.02 * b.abs(), "{name}: {a} vs {b} kHz");
    }
}

#[test]
fn labels_continuous_along_coupler_sweep() {
    for name in BUNDLED {
        let d = bundled(name).unwrap();
        let fluxes: Vec<f64> = (0..=10).map(|k| 0.5 + 0.05 * k as f64).collect();
        for (spec, _) in track_labels(&d, &fluxes, &TRACKED).unwrap() {
            assert!(spec.ambiguous.is_empty(), "{name} at {}: {:?}", spec.coupler_flux, spec.ambiguous);
            let used: HashSet<usize> = spec.labels.values().copied().collect();
            assert_eq!(used.len(), TRACKED.len(), "{name}: two labels on one state");
            for l in COMPUTATIONAL {
                assert!(spec.continuity[&l] > 0.95, "{name} {l} continuity {}", spec.continuity[&l]);
                assert!(spec.overlaps[&l] > 0.9, "{name} {l} overlap {}", spec.overlaps[&l]);
            }
        }
    }
}

// ---- configuration ----

proptest! {
    #![proptest_config(config(64, 12))]

    #[test]
    fn config_round_trip(d in device_strategy()) {
        let file = DeviceConfigFile::from_device(&d).unwrap();
        let text = file.to_toml().unwrap();
        let back = DeviceConfigFile::parse(&text).unwrap();
        prop_assert_eq!(&back, &file);
        let d2 = back.to_device().unwrap();
        prop_assert_eq!(d2.levels, d.levels);
        prop_assert_eq!((d2.j_1c, d2.j_2c, d2.j_12), (d.j_1c, d.j_2c, d.j_12));
        for (x, y) in [
            (d2.fluxonium1.phi_ext, d.fluxonium1.phi_ext),
            (d2.fluxonium2.phi_ext, d.fluxonium2.phi_ext),
            (d2.transmon.phi_ext, d.transmon.phi_ext),
        ] {
            prop_assert!((x - y).abs() <= 4.0 * f64::EPSILON * y.abs().max(1.0));
        }
    }
}

// ---- dynamics ----

fn random_antisymmetric(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let x: f64 = rng.gen_range(-1.0..1.0);
            m[(i, j)] = x;
            m[(j, i)] = -x;
        }
    }
    m
}

fn random_system(seed: u64) -> DrivenSystem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 4;
    let mut e: Vec<f64> = (0..n).map(|k| k as f64 * 1.3 + rng.gen_range(-0.2..0.2)).collect();
    e[0] = 0.0;
    let labels = BTreeMap::from([(Label(0, 0, 0), 0), (Label(1, 0, 0), 1), (Label(0, 0, 1), 2), (Label(1, 0, 1), 3)]);
    DrivenSystem::from_parts(e, random_antisymmetric(n, &mut rng), random_antisymmetric(n, &mut rng), labels).unwrap()
}

proptest! {
    #![proptest_config(config(12, 13))]

    #[test]
    fn propagator_is_unitary(seed in any::<u64>(), amp in 0.0..0.05f64, beta in -0.5..0.5f64, phase in -PI..PI) {
        let sys = random_system(seed);
        let drives = DriveLinePair { weights: [1.0, 0.7], phases: [0.0, phase], frequency: 1.3, dispersion_slope: 0.0 };
        let opts = EvolveOptions { columns: Columns::All, ..EvolveOptions::default() };
        let u = sys.evolve(&drives, &PulseEnvelope::drag(15.0, amp, beta), &opts).unwrap();
        let defect = (u.u.adjoint() * &u.u - CMat::identity(4, 4)).iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(defect < 1e-9, "defect {}", defect);
    }

    #[test]
    fn interference_cancels_unwanted_element(seed in any::<u64>(), slope in -1.0..1.0f64, freq in 0.5..5.0f64) {
        let sys = random_system(seed);
        let (from, to) = (Label(1, 0, 0), Label(1, 0, 1));
        let set = interference_setting(&sys, from, to, slope, freq).unwrap();
        let d = set.drives(freq, slope);
        let (i, f) = (sys.index(from).unwrap(), sys.index(to).unwrap());
        let terms = sys.charge_element(0, f, i).norm() + set.amplitude_ratio * sys.charge_element(1, f, i).norm();
        prop_assert!(sys.drive_element(&d, f, i).norm() < 1e-10 * terms);
    }

    #[test]
    fn conditional_phase_ignores_local_z(a in -PI..PI, b in -PI..PI, c in -PI..PI, g in -PI..PI) {
        let cz = DVector::from_vec(vec![1.0, 1.0, 1.0, -1.0]);
        let z = |x: f64| Complex64::from_polar(1.0, x);
        let local = [z(g), z(g + a), z(g + b), z(g + a + b)];
        let u = CMat::from_diagonal(&DVector::from_iterator(4, (0..4).map(|k| local[k] * cz[k] * z(if k == 3 { c } else { 0.0 }))));
        let phi = conditional_phase(&u).unwrap();
        prop_assert!((ftf::linalg::wrap_angle(phi - PI - c)).abs() < 1e-12);
    }
}

// ---- error budget ----

proptest! {
    #![proptest_config(config(64, 14))]

    #[test]
    fn phase_tolerance_inverts_fidelity(dphi in 0.0..1.5f64) {
        prop_assert!((phase_tolerance(phase_error_fidelity(dphi)) - dphi).abs() < 1e-7);
    }

    #[test]
    fn depolarizing_fidelity_closed_form(p in 0.0..1.0f64) {
        let f = kraus_average_fidelity(&depolarizing_kraus(p), &CMat::identity(2, 2), &projector(2, &[0, 1])).unwrap();
        prop_assert!((f - (1.0 - 0.5 * (1.0 - p))).abs() < 1e-12);
    }
}

// ---- benchmarking ----

/// Standard normal draws by Box-Muller.
fn gaussians(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let (u1, u2): (f64, f64) = (rng.gen_range(f64::EPSILON..1.0), rng.gen());
            (-2.0 * u1.ln()).sqrt() * (TAU * u2).cos()
        })
        .collect()
}

proptest! {
    #![proptest_config(config(48, 15))]

    #[test]
    fn fit_consistent_with_noise(seed in any::<u64>(), p in 0.95..0.999f64, a in 0.5..0.8f64, sigma in 1e-4..2e-3f64) {
        let x: Vec<f64> = [1.0, 3.0, 6.0, 10.0, 20.0, 40.0, 80.0, 150.0, 300.0].to_vec();
        let noise = gaussians(&mut ChaCha8Rng::seed_from_u64(seed), x.len());
        let b = 1.0 - a;
        let y: Vec<f64> = x.iter().zip(&noise).map(|(m, e)| a * p.powf(*m) + b + sigma * e).collect();
        let s = vec![sigma; x.len()];
        let f = fit_rb(&x, &y, Weights::Absolute(&s)).unwrap();
        prop_assert!(f.p_err > 0.0);
        prop_assert!((f.p - p).abs() < 5.0 * f.p_err, "p {} vs {} +- {}", f.p, p, f.p_err);
    }
}

#[test]
fn benchmarking_reproducible_by_seed() {
    let spec = |seed| RbSpec {
        clifford_noise: Channel::Depolarizing(0.99),
        shots: Some(200),
        ..RbSpec::new(1, vec![1, 5, 10, 20, 40], 6, seed)
    };
    let a = simulate_rb(&spec(3)).unwrap();
    let b = simulate_rb(&spec(3)).unwrap();
    let c = simulate_rb(&spec(4)).unwrap();
    assert_eq!(a.survival, b.survival);
    assert_eq!(a.fit.p, b.fit.p);
    assert_ne!(a.survival, c.survival);
}
