//! Matrix representation of single scattering events. The emitter spin and
//! each photon's polarization are explicit two-level factors; one photon
//! scatters through X = P_t + e^{iφ} P_s, with P_s the spin-polarization
//! singlet projector. Starting from the stationary spin state this
//! reproduces the equal-time quantities of the closed forms.

use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use photonic_kondo::model::{DrivenConfig, JonesPolarization};
use photonic_kondo::sampling::{random_config, random_unit};
use photonic_kondo::spectra::average_field;
use photonic_kondo::statistics::{cs_zero, g_combinations, k_initial_unscaled};
use photonic_kondo::bloch::stationary_bloch;
use photonic_kondo::Vec3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type M = DMatrix<C>;

fn eye(n: usize) -> M {
    M::identity(n, n)
}

fn pauli() -> [M; 3] {
    let z = C::new(0.0, 0.0);
    let o = C::new(1.0, 0.0);
    let i = C::new(0.0, 1.0);
    [
        M::from_row_slice(2, 2, &[z, o, o, z]),
        M::from_row_slice(2, 2, &[z, -i, i, z]),
        M::from_row_slice(2, 2, &[o, z, z, -o]),
    ]
}

fn dot_sigma(v: &Vec3) -> M {
    let p = pauli();
    &p[0] * C::from(v.x) + &p[1] * C::from(v.y) + &p[2] * C::from(v.z)
}

fn kron(a: &M, b: &M) -> M {
    a.kronecker(b)
}

/// X on spin ⊗ photon.
fn scattering(config: &DrivenConfig) -> M {
    let p = pauli();
    let mut exchange = M::zeros(4, 4);
    for s in &p {
        exchange += kron(s, s) * C::from(0.25);
    }
    let singlet = eye(4) * C::from(0.25) - exchange;
    let triplet = eye(4) - &singlet;
    triplet + singlet * config.phase().exp_i()
}

fn spin_state(config: &DrivenConfig) -> M {
    eye(2) * C::from(0.5) + dot_sigma(&stationary_bloch(config).unwrap().s())
}

/// Unnormalized photon factor αα†/L, trace f.
fn photon_state(pol: &JonesPolarization) -> M {
    let a = M::from_column_slice(2, 1, &pol.amplitudes());
    &a * a.adjoint() / C::from(pol.length)
}

fn expect(rho: &M, op: &M) -> C {
    (rho * op).trace()
}

fn setup(seed: u64) -> Vec<(DrivenConfig, JonesPolarization)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..40)
        .map(|_| {
            let c = random_config(&mut rng);
            let pol = JonesPolarization::from_direction(&c.n_cl(), c.f(), 1.3).unwrap();
            (c, pol)
        })
        .collect()
}

fn vec_close(a: &Vec3, b: &Vec3, scale: f64) {
    assert!((a - b).norm() <= 1e-12 * scale, "{a:?} vs {b:?}");
}

#[test]
fn average_field_from_partial_trace() {
    for (config, pol) in setup(1) {
        let x = scattering(&config);
        let rho = spin_state(&config);
        let mut u = M::zeros(2, 2);
        for sig in 0..2 {
            for sig2 in 0..2 {
                for a in 0..2 {
                    for b in 0..2 {
                        u[(sig, sig2)] += rho[(b, a)] * x[(2 * a + sig, 2 * b + sig2)];
                    }
                }
            }
        }
        let alpha = M::from_column_slice(2, 1, &pol.amplitudes()) / C::from(pol.length.sqrt());
        let out = u * alpha;
        let closed = average_field(&config, &pol).unwrap();
        for k in 0..2 {
            assert!((out[k] - closed[k]).norm() <= 1e-12 * config.f().sqrt().max(1.0));
        }
    }
}

#[test]
fn equal_time_jones_vector() {
    for (config, pol) in setup(2) {
        let x = scattering(&config);
        let rho = kron(&spin_state(&config), &photon_state(&pol));
        let p = pauli();
        let v: Vec<f64> = p
            .iter()
            .map(|s| expect(&rho, &(x.adjoint() * kron(&eye(2), s) * &x)).re * 0.5)
            .collect();
        vec_close(&Vec3::new(v[0], v[1], v[2]), &cs_zero(&config).unwrap(), config.f());
    }
}

#[test]
fn k_vectors_after_one_scattering() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (config, pol) in setup(3) {
        let x = scattering(&config);
        let rho = kron(&spin_state(&config), &photon_state(&pol));
        let p = pauli();
        let m = random_unit(&mut rng);
        let pm = dot_sigma(&m) * C::from(0.5);
        let k0: Vec<f64> = p
            .iter()
            .map(|s| expect(&rho, &(x.adjoint() * kron(&(s * C::from(0.5)), &eye(2)) * &x)).re)
            .collect();
        let km: Vec<f64> = p
            .iter()
            .map(|s| expect(&rho, &(x.adjoint() * kron(&(s * C::from(0.5)), &pm) * &x)).re)
            .collect();
        vec_close(&Vec3::from_column_slice(&k0), &k_initial_unscaled(&config, None).unwrap().value, config.f());
        vec_close(&Vec3::from_column_slice(&km), &k_initial_unscaled(&config, Some(&m)).unwrap().value, config.f());
    }
}

#[test]
fn coincidences_of_two_consecutive_photons() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for (config, pol) in setup(4) {
        let x = scattering(&config);
        // spin ⊗ first photon ⊗ second photon
        let x1 = kron(&x, &eye(2));
        let swap = M::from_fn(4, 4, |r, c| {
            let (a, b) = (r / 2, r % 2);
            C::from(if c == 2 * b + a { 1.0 } else { 0.0 })
        });
        let p23 = kron(&eye(2), &swap);
        let x2 = &p23 * &x1 * &p23;
        let photon = photon_state(&pol);
        let rho = kron(&kron(&spin_state(&config), &photon), &photon);
        let evolve = |op: &M| expect(&rho, &(x1.adjoint() * x2.adjoint() * op * &x2 * &x1)).re;
        let (n, m) = (random_unit(&mut rng), random_unit(&mut rng));
        let half = C::from(0.5);
        let (pn, pm) = (dot_sigma(&n) * half, dot_sigma(&m) * half);
        let g_nm = evolve(&kron(&kron(&eye(2), &pm), &pn));
        let g_n0 = evolve(&kron(&kron(&eye(2), &eye(2)), &pn));
        let g_0m = evolve(&kron(&kron(&eye(2), &pm), &eye(2)));
        let g_00 = evolve(&eye(8));
        let closed = g_combinations(&config, &n, &m, 0.0).unwrap();
        let scale = config.f() * config.f();
        assert!((g_nm - closed.g_nm).abs() <= 1e-12 * scale, "{g_nm} {}", closed.g_nm);
        assert!((g_n0 - closed.g_n0).abs() <= 1e-12 * scale);
        assert!((g_0m - closed.g_0m).abs() <= 1e-12 * scale);
        assert!((g_00 - closed.g_00).abs() <= 1e-12 * scale);
    }
}
