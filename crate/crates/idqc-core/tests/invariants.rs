//! Property tests for the numerical substrate: unitarity, the propagator
//! group law, spectral reconstruction, and Kronecker structure.

use idqc_core::engine::{ControlCycle, Schedule, Simulator, SystemState};
use idqc_core::model::{ControlPlant, Tolerances};
use idqc_core::spectral::{dagger, frobenius_norm, identity, kron, outer_product, HermitianMatrix};
use ndarray::Array2;
use num_complex::Complex64 as C64;
use proptest::prelude::*;

fn complex_matrix(n: usize) -> impl Strategy<Value = Array2<C64>> {
    proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n * n).prop_map(move |entries| {
        Array2::from_shape_fn((n, n), |(i, j)| {
            let (re, im) = entries[i * n + j];
            C64::new(re, im)
        })
    })
}

fn hermitian_matrix(n: usize) -> impl Strategy<Value = Array2<C64>> {
    complex_matrix(n).prop_map(|raw| (&raw + &dagger(&raw)).mapv(|z| 0.5 * z))
}

fn any_dim_hermitian() -> impl Strategy<Value = Array2<C64>> {
    (2usize..=5).prop_flat_map(hermitian_matrix)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn propagator_is_unitary(h in any_dim_hermitian(), t in -10.0..10.0f64) {
        let n = h.nrows();
        let u = HermitianMatrix::new(h).unwrap().propagator(t).unwrap();
        let residual = frobenius_norm(&(dagger(u.as_array()).dot(u.as_array()) - identity(n)));
        prop_assert!(residual <= 1e-12);
    }

    #[test]
    fn propagator_group_law(h in any_dim_hermitian(), s in -2.0..2.0f64, t in -2.0..2.0f64) {
        // rescale so ‖H‖_F ≤ 5
        let norm = frobenius_norm(&h).max(1e-6);
        let h = h.mapv(|z| z * (5.0 / norm));
        let eig = HermitianMatrix::new(h).unwrap().eig().unwrap();
        let u_s = eig.propagator_matrix(s).unwrap();
        let u_t = eig.propagator_matrix(t).unwrap();
        let u_st = eig.propagator_matrix(s + t).unwrap();
        prop_assert!(frobenius_norm(&(u_s.dot(&u_t) - u_st)) <= 1e-10);
    }

    #[test]
    fn spectral_reconstruction(h in any_dim_hermitian()) {
        let eig = HermitianMatrix::new(h.clone()).unwrap().eig().unwrap();
        let diff = frobenius_norm(&(eig.reconstruct() - &h));
        prop_assert!(diff <= 1e-12 * frobenius_norm(&h).max(1.0));
        // eigenvalues ascending up to degenerate-cluster reordering
        for pair in eig.values().windows(2) {
            prop_assert!(pair[1] >= pair[0] - 1e-9 * frobenius_norm(&h).max(1.0));
        }
    }

    #[test]
    fn kron_mixed_product(
        a in complex_matrix(2),
        b in complex_matrix(3),
        c in complex_matrix(2),
        d in complex_matrix(3),
    ) {
        let lhs = kron(&a, &b).dot(&kron(&c, &d));
        let rhs = kron(&a.dot(&c), &b.dot(&d));
        let scale = frobenius_norm(&rhs).max(1.0);
        prop_assert!(frobenius_norm(&(lhs - rhs)) <= 1e-12 * scale);
    }

    #[test]
    fn schedule_halves_compose(
        h_s in hermitian_matrix(2),
        block0 in hermitian_matrix(2),
        block1 in hermitian_matrix(2),
        dt in 0.0..4.0f64,
        tail in 0.0..2.0f64,
        re in -1.0..1.0f64,
        im in -1.0..1.0f64,
    ) {
        // accessor basis = σz eigenbasis; H_I block-diagonal by construction
        let e0 = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
        let e1 = [C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
        let h_a = Array2::from_diag(&ndarray::arr1(&[C64::new(1.0, 0.0), C64::new(-1.0, 0.0)]));
        let h_i = kron(&block0, &outer_product(&e1)) + kron(&block1, &outer_product(&e0));
        let plant = ControlPlant::new(h_s, h_a, h_i, Tolerances::default()).unwrap();
        let sim = Simulator::new(&plant).unwrap();

        let raw = [C64::new(1.0, 0.2), C64::new(re, im)];
        let norm = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let psi = SystemState::new(raw.iter().map(|z| z / norm).collect()).unwrap();

        let whole = Schedule::new(vec![ControlCycle::with_free_tail(1, dt, tail)]);
        let halves = Schedule::new(vec![
            ControlCycle::new(1, dt / 2.0),
            ControlCycle::with_free_tail(1, dt - dt / 2.0, tail),
        ]);
        let (a, phase_a) = sim.final_state(&psi, &whole).unwrap();
        let (b, phase_b) = sim.final_state(&psi, &halves).unwrap();
        let diff: f64 = a
            .amplitudes()
            .iter()
            .zip(b.amplitudes())
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>()
            .sqrt();
        prop_assert!(diff <= 1e-12);
        prop_assert!((phase_a - phase_b).abs() <= 1e-12 * phase_a.abs().max(1.0));
    }
}
