//! Control-cycle simulation: ideal accessor preparation followed by
//! conditional evolution, the full joint evolution used as a validation
//! oracle, Schmidt factorization, and Bloch-coordinate trajectories.
//!
//! Preparation is instantaneous and perfect; scalar phase terms (−α_j per
//! unit time) are tracked in a side ledger instead of being multiplied into
//! states, so states compare by fidelity and by phase separately.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::{AccessorEigenstate, ControlPlant};
use crate::spectral::{
    dagger, fix_global_phase, identity, kron_vector, EigenDecomposition, HermitianMatrix,
    UnitaryMatrix, UNIT_TOL,
};

/// Unit-norm tolerance for state vectors.
pub const NORM_TOL: f64 = 1e-10;

/// Default number of samples per cycle when rendering trajectories.
pub const DEFAULT_SAMPLES_PER_CYCLE: usize = 64;

/// A pure state of the controlled system.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemState {
    amps: Vec<C64>,
}

impl SystemState {
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        if amps.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite {
                context: "state amplitudes",
            });
        }
        let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { amps })
    }

    pub fn basis_state(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::IndexOutOfRange {
                context: "basis state",
                index,
                dim,
            });
        }
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[index] = C64::new(1.0, 0.0);
        Ok(Self { amps })
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// ⟨self|other⟩.
    pub fn overlap(&self, other: &Self) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                context: "state overlap",
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Global-phase-invariant |⟨self|other⟩|².
    pub fn fidelity(&self, other: &Self) -> Result<f64> {
        Ok(self.overlap(other)?.norm_sqr())
    }
}

/// One control cycle: prepare accessor state `accessor_index`, evolve under
/// the conditional Hamiltonian for `duration`, then optionally free-evolve
/// under H_S alone for `post_free_time`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlCycle {
    pub accessor_index: usize,
    pub duration: f64,
    pub post_free_time: f64,
}

impl ControlCycle {
    pub fn new(accessor_index: usize, duration: f64) -> Self {
        Self {
            accessor_index,
            duration,
            post_free_time: 0.0,
        }
    }

    pub fn with_free_tail(accessor_index: usize, duration: f64, post_free_time: f64) -> Self {
        Self {
            accessor_index,
            duration,
            post_free_time,
        }
    }
}

/// An ordered, finite sequence of control cycles — one element of the
/// semigroup of reachable propagators.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Schedule {
    pub cycles: Vec<ControlCycle>,
}

impl Schedule {
    pub fn new(cycles: Vec<ControlCycle>) -> Self {
        Self { cycles }
    }

    pub fn empty() -> Self {
        Self { cycles: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.cycles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycles.is_empty()
    }

    pub fn total_time(&self) -> f64 {
        self.cycles
            .iter()
            .map(|c| c.duration + c.post_free_time)
            .sum()
    }
}

#[derive(Debug, Clone)]
pub struct TrajectorySample {
    pub time: f64,
    pub state: SystemState,
    pub bloch: Option<[f64; 3]>,
}

/// Time-stamped states produced by a schedule, with Bloch coordinates when
/// the system is a qubit, plus the accumulated scalar phase Σ (−α_j Δt_j).
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    pub accumulated_phase: f64,
}

impl Trajectory {
    pub fn final_state(&self) -> &SystemState {
        &self.samples.last().expect("trajectory never empty").state
    }
}

/// Best rank-one factorization of a bipartite state vector.
#[derive(Debug, Clone)]
pub struct Factorization {
    pub system: SystemState,
    pub accessor: Vec<C64>,
    /// 1 − (largest Schmidt coefficient)²; 0 for product states.
    pub schmidt_residual: f64,
}

/// Precomputed spectral data for one plant: conditional generators per
/// accessor state, the free drift, and the full joint Hamiltonian. All
/// evolution methods are pure; the simulator is safe to share across
/// threads.
#[derive(Debug, Clone)]
pub struct Simulator {
    plant: ControlPlant,
    states: Vec<AccessorEigenstate>,
    conditional_eigs: Vec<EigenDecomposition>,
    free_eig: EigenDecomposition,
    joint_eig: EigenDecomposition,
}

impl Simulator {
    pub fn new(plant: &ControlPlant) -> Result<Self> {
        let states = plant.accessor_spectrum()?;
        let mut conditional_eigs = Vec::with_capacity(states.len());
        for state in &states {
            let generator = plant.h_s().add(&state.conditional)?;
            conditional_eigs.push(generator.eig()?);
        }
        let free_eig = plant.h_s().eig()?;
        let joint_eig = plant.total_hamiltonian().eig()?;
        Ok(Self {
            plant: plant.clone(),
            states,
            conditional_eigs,
            free_eig,
            joint_eig,
        })
    }

    pub fn plant(&self) -> &ControlPlant {
        &self.plant
    }

    pub fn dim_s(&self) -> usize {
        self.plant.dim_s()
    }

    pub fn accessor_states(&self) -> &[AccessorEigenstate] {
        &self.states
    }

    fn check_cycle(&self, cycle: &ControlCycle) -> Result<()> {
        if cycle.accessor_index >= self.states.len() {
            return Err(Error::IndexOutOfRange {
                context: "accessor eigenstate",
                index: cycle.accessor_index,
                dim: self.states.len(),
            });
        }
        for value in [cycle.duration, cycle.post_free_time] {
            if !value.is_finite() {
                return Err(Error::NonFinite {
                    context: "cycle duration",
                });
            }
            if value < 0.0 {
                return Err(Error::NegativeDuration { value });
            }
        }
        Ok(())
    }

    /// Apply one S1/S2 cycle: exp(−i(H_S + H_j)Δt), then exp(−iH_S·tail).
    /// The scalar phase −α_j·Δt is reported by [`Simulator::cycle_phase`],
    /// not multiplied into the state.
    pub fn evolve_cycle(&self, state: &SystemState, cycle: &ControlCycle) -> Result<SystemState> {
        self.check_cycle(cycle)?;
        if state.dim() != self.dim_s() {
            return Err(Error::DimensionMismatch {
                context: "state vs system dimension",
                left: state.dim(),
                right: self.dim_s(),
            });
        }
        let mut amps = state.amplitudes().to_vec();
        if cycle.duration > 0.0 {
            amps = self.conditional_eigs[cycle.accessor_index]
                .apply_propagator(cycle.duration, &amps);
        }
        if cycle.post_free_time > 0.0 {
            amps = self.free_eig.apply_propagator(cycle.post_free_time, &amps);
        }
        SystemState::new(amps)
    }

    /// Scalar phase contributed by a cycle: −α_j · Δt (the free tail carries
    /// no accessor phase).
    pub fn cycle_phase(&self, cycle: &ControlCycle) -> Result<f64> {
        self.check_cycle(cycle)?;
        Ok(-self.states[cycle.accessor_index].alpha * cycle.duration)
    }

    /// Final state and accumulated phase of a schedule without sampling.
    pub fn final_state(&self, initial: &SystemState, schedule: &Schedule) -> Result<(SystemState, f64)> {
        let mut state = initial.clone();
        let mut phase = 0.0;
        for cycle in &schedule.cycles {
            state = self.evolve_cycle(&state, cycle)?;
            phase += self.cycle_phase(cycle)?;
        }
        Ok((state, phase))
    }

    /// Run a schedule, sampling each cycle uniformly in time. The final
    /// sample equals the composition of all cycle propagators applied to the
    /// initial state.
    pub fn run_schedule(
        &self,
        initial: &SystemState,
        schedule: &Schedule,
        samples_per_cycle: usize,
    ) -> Result<Trajectory> {
        if samples_per_cycle == 0 {
            return Err(Error::NoSamplePoints);
        }
        if initial.dim() != self.dim_s() {
            return Err(Error::DimensionMismatch {
                context: "state vs system dimension",
                left: initial.dim(),
                right: self.dim_s(),
            });
        }
        let mut samples = vec![self.sample_at(0.0, initial.clone())?];
        let mut state = initial.clone();
        let mut t = 0.0;
        let mut phase = 0.0;
        for cycle in &schedule.cycles {
            self.check_cycle(cycle)?;
            let span = cycle.duration + cycle.post_free_time;
            phase += self.cycle_phase(cycle)?;
            if span == 0.0 {
                continue;
            }
            // state after the interaction segment, reused for tail samples
            let mid = if cycle.duration > 0.0 {
                self.conditional_eigs[cycle.accessor_index]
                    .apply_propagator(cycle.duration, state.amplitudes())
            } else {
                state.amplitudes().to_vec()
            };
            for k in 1..=samples_per_cycle {
                let tau = if k == samples_per_cycle {
                    span
                } else {
                    span * k as f64 / samples_per_cycle as f64
                };
                let amps = if tau <= cycle.duration {
                    self.conditional_eigs[cycle.accessor_index]
                        .apply_propagator(tau, state.amplitudes())
                } else {
                    self.free_eig.apply_propagator(tau - cycle.duration, &mid)
                };
                samples.push(self.sample_at(t + tau, SystemState::new(amps)?)?);
            }
            state = samples.last().expect("just pushed").state.clone();
            t += span;
        }
        Ok(Trajectory {
            samples,
            accumulated_phase: phase,
        })
    }

    fn sample_at(&self, time: f64, state: SystemState) -> Result<TrajectorySample> {
        let bloch = if state.dim() == 2 {
            Some(bloch_coordinates(&state)?)
        } else {
            None
        };
        Ok(TrajectorySample { time, state, bloch })
    }

    /// Evolve ψ ⊗ φ_j under the full Hamiltonian H_S + H_A + H_I for t ≥ 0.
    pub fn evolve_joint(&self, state: &SystemState, j: usize, t: f64) -> Result<Vec<C64>> {
        if j >= self.states.len() {
            return Err(Error::IndexOutOfRange {
                context: "accessor eigenstate",
                index: j,
                dim: self.states.len(),
            });
        }
        if !t.is_finite() {
            return Err(Error::NonFinite {
                context: "joint evolution time",
            });
        }
        if t < 0.0 {
            return Err(Error::NegativeDuration { value: t });
        }
        if state.dim() != self.dim_s() {
            return Err(Error::DimensionMismatch {
                context: "state vs system dimension",
                left: state.dim(),
                right: self.dim_s(),
            });
        }
        let joint = kron_vector(state.amplitudes(), &self.states[j].phi);
        Ok(self.joint_eig.apply_propagator(t, &joint))
    }

    /// exp(−i(H_S + H_j)t)·ψ from the cached conditional spectrum — the
    /// synthesis hot path. The caller guarantees a valid index and t ≥ 0.
    pub(crate) fn conditional_apply(&self, j: usize, t: f64, amps: &[C64]) -> Vec<C64> {
        self.conditional_eigs[j].apply_propagator(t, amps)
    }

    /// The ordered product of cycle propagators as a dense unitary. The
    /// unitarity tolerance widens linearly with the number of factors.
    pub fn schedule_propagator(&self, schedule: &Schedule) -> Result<UnitaryMatrix> {
        let mut acc = identity(self.dim_s());
        let mut factors = 0usize;
        for cycle in &schedule.cycles {
            self.check_cycle(cycle)?;
            if cycle.duration > 0.0 {
                let u = self.conditional_eigs[cycle.accessor_index]
                    .propagator_matrix(cycle.duration)?;
                acc = u.dot(&acc);
                factors += 1;
            }
            if cycle.post_free_time > 0.0 {
                let u = self.free_eig.propagator_matrix(cycle.post_free_time)?;
                acc = u.dot(&acc);
                factors += 1;
            }
        }
        UnitaryMatrix::new_with_tol(acc, factors.max(1) as f64 * UNIT_TOL)
    }
}

/// Best rank-one approximation of a bipartite vector (system factor first):
/// dominant Schmidt triple via the accessor-side Gram matrix. Residual near
/// 1 signals strong entanglement — reported, never raised.
pub fn check_factorization(joint: &[C64], dim_s: usize, dim_a: usize) -> Result<Factorization> {
    if joint.len() != dim_s * dim_a {
        return Err(Error::DimensionMismatch {
            context: "joint vector vs system × accessor",
            left: joint.len(),
            right: dim_s * dim_a,
        });
    }
    let norm = joint.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized { norm });
    }
    let coeff = Array2::from_shape_fn((dim_s, dim_a), |(s, a)| joint[s * dim_a + a]);
    let gram = dagger(&coeff).dot(&coeff);
    let eig = HermitianMatrix::from_array_unchecked(gram).eig()?;
    let top = eig.dim() - 1;
    let lambda_max = eig.values()[top].clamp(0.0, f64::INFINITY);
    let accessor = eig.eigenvector(top);
    let sigma = lambda_max.sqrt();
    let mut system = vec![C64::new(0.0, 0.0); dim_s];
    for (s, out) in system.iter_mut().enumerate() {
        let mut acc = C64::new(0.0, 0.0);
        for a in 0..dim_a {
            acc += coeff[[s, a]] * accessor[a];
        }
        *out = acc / sigma;
    }
    fix_global_phase(&mut system);
    Ok(Factorization {
        system: SystemState::new(system)?,
        accessor,
        schmidt_residual: (1.0 - lambda_max).max(0.0),
    })
}

/// (x, y, z) = (2 Re a₀*a₁, 2 Im a₀*a₁, |a₀|² − |a₁|²); unit length for pure
/// qubit states.
pub fn bloch_coordinates(state: &SystemState) -> Result<[f64; 3]> {
    if state.dim() != 2 {
        return Err(Error::DimensionMismatch {
            context: "Bloch coordinates need a qubit",
            left: state.dim(),
            right: 2,
        });
    }
    let a0 = state.amplitudes()[0];
    let a1 = state.amplitudes()[1];
    let cross = a0.conj() * a1;
    Ok([
        2.0 * cross.re,
        2.0 * cross.im,
        a0.norm_sqr() - a1.norm_sqr(),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Tolerances;
    use crate::spectral::{frobenius_norm, kron, sigma_x, sigma_z};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_unit_state(rng: &mut ChaCha8Rng, dim: usize) -> SystemState {
        let mut amps: Vec<C64> = (0..dim)
            .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in amps.iter_mut() {
            *z /= norm;
        }
        SystemState::new(amps).unwrap()
    }

    fn random_block_plant(rng: &mut ChaCha8Rng, dim_s: usize, dim_a: usize) -> ControlPlant {
        use crate::spectral::{dagger, outer_product};
        let herm = |rng: &mut ChaCha8Rng, n: usize| {
            let raw = Array2::from_shape_fn((n, n), |_| {
                c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            });
            (&raw + &dagger(&raw)).mapv(|z| 0.5 * z)
        };
        let h_s = herm(rng, dim_s);
        let h_a = herm(rng, dim_a).mapv(|z| z * 2.0);
        let eig = HermitianMatrix::new(h_a.clone()).unwrap().eig().unwrap();
        let mut h_i = Array2::zeros((dim_s * dim_a, dim_s * dim_a));
        for j in 0..dim_a {
            let block = herm(rng, dim_s);
            h_i = h_i + kron(&block, &outer_product(&eig.eigenvector(j)));
        }
        ControlPlant::new(h_s, h_a, h_i, Tolerances::default()).unwrap()
    }

    #[test]
    fn zero_cycle_leaves_state_unchanged() {
        let plant = ControlPlant::spin_example(1.0, 2.0, 3.0).unwrap();
        let sim = Simulator::new(&plant).unwrap();
        let psi = SystemState::basis_state(2, 0).unwrap();
        let out = sim
            .evolve_cycle(&psi, &ControlCycle::with_free_tail(0, 0.0, 0.0))
            .unwrap();
        assert_eq!(out, psi);
    }

    #[test]
    fn cycle_rejects_bad_inputs() {
        let plant = ControlPlant::spin_example(1.0, 2.0, 3.0).unwrap();
        let sim = Simulator::new(&plant).unwrap();
        let psi = SystemState::basis_state(2, 0).unwrap();
        assert!(matches!(
            sim.evolve_cycle(&psi, &ControlCycle::new(5, 1.0)),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            sim.evolve_cycle(&psi, &ControlCycle::new(0, -1.0)),
            Err(Error::NegativeDuration { .. })
        ));
    }

    #[test]
    fn interaction_segment_matches_rabi_moduli() {
        // |a₀|² = cos²Ωt + (ω_S/Ω)² sin²Ωt and |a₁| = (g/Ω)|sin Ωt|
        let (ws, wa, g) = (1.0_f64, 2.0, 3.0);
        let omega = (ws * ws + g * g).sqrt();
        let plant = ControlPlant::spin_example(ws, wa, g).unwrap();
        let sim = Simulator::new(&plant).unwrap();
        let psi = SystemState::basis_state(2, 0).unwrap();
        for j in 0..2 {
            for k in 1..=10 {
                let t = 0.37 * k as f64;
                let out = sim.evolve_cycle(&psi, &ControlCycle::new(j, t)).unwrap();
                let a0 = out.amplitudes()[0].norm_sqr();
                let a1 = out.amplitudes()[1].norm();
                let expect0 = (omega * t).cos().powi(2)
                    + (ws / omega).powi(2) * (omega * t).sin().powi(2);
                let expect1 = (g / omega) * (omega * t).sin().abs();
                assert!((a0 - expect0).abs() < 1e-12);
                assert!((a1 - expect1).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn effective_eigenstate_is_stationary() {
        let mut rng = ChaCha8Rng::seed_from_u64(70);
        let plant = random_block_plant(&mut rng, 3, 2);
        let sim = Simulator::new(&plant).unwrap();
        let generator = plant
            .h_s()
            .add(&sim.accessor_states()[0].conditional)
            .unwrap();
        let eig = generator.eig().unwrap();
        let psi = SystemState::new(eig.eigenvector(1)).unwrap();
        let out = sim
            .evolve_cycle(&psi, &ControlCycle::new(0, 2.17))
            .unwrap();
        assert!(psi.fidelity(&out).unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn empty_schedule_yields_single_sample() {
        let plant = ControlPlant::spin_example(1.0, 2.0, 3.0).unwrap();
        let sim = Simulator::new(&plant).unwrap();
        let psi = SystemState::basis_state(2, 0).unwrap();
        let traj = sim.run_schedule(&psi, &Schedule::empty(), 16).unwrap();
        assert_eq!(traj.samples.len(), 1);
        assert_eq!(traj.final_state(), &psi);
        assert_eq!(traj.accumulated_phase, 0.0);
    }

    #[test]
    fn split_schedule_composes() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        let plant = random_block_plant(&mut rng, 2, 2);
        let sim = Simulator::new(&plant).unwrap();
        let psi = random_unit_state(&mut rng, 2);
        let whole = Schedule::new(vec![ControlCycle::with_free_tail(1, 1.4, 0.6)]);
        let halves = Schedule::new(vec![
            ControlCycle::new(1, 0.7),
            ControlCycle::with_free_tail(1, 0.7, 0.6),
        ]);
        let (a, _) = sim.final_state(&psi, &whole).unwrap();
        let (b, _) = sim.final_state(&psi, &halves).unwrap();
        let diff: f64 = a
            .amplitudes()
            .iter()
            .zip(b.amplitudes())
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(diff <= 1e-12);
    }

    #[test]
    fn sampled_final_matches_schedule_propagator() {
        let mut rng = ChaCha8Rng::seed_from_u64(72);
        let plant = random_block_plant(&mut rng, 3, 3);
        let sim = Simulator::new(&plant).unwrap();
        let psi = random_unit_state(&mut rng, 3);
        let schedule = Schedule::new(vec![
            ControlCycle::with_free_tail(0, 0.9, 0.2),
            ControlCycle::new(2, 1.3),
            ControlCycle::with_free_tail(1, 0.0, 0.8),
        ]);
        let traj = sim.run_schedule(&psi, &schedule, 7).unwrap();
        let u = sim.schedule_propagator(&schedule).unwrap();
        let direct = u.apply(psi.amplitudes());
        let diff: f64 = traj
            .final_state()
            .amplitudes()
            .iter()
            .zip(direct.iter())
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(diff <= 1e-10);
        // times non-decreasing
        for pair in traj.samples.windows(2) {
            assert!(pair[1].time >= pair[0].time);
        }
    }

    #[test]
    fn joint_evolution_at_zero_is_product() {
        let plant = ControlPlant::spin_example(1.0, 2.0, 3.0).unwrap();
        let sim = Simulator::new(&plant).unwrap();
        let psi = SystemState::basis_state(2, 0).unwrap();
        let joint = sim.evolve_joint(&psi, 1, 0.0).unwrap();
        let expected = kron_vector(psi.amplitudes(), &sim.accessor_states()[1].phi);
        for (a, b) in joint.iter().zip(expected.iter()) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn joint_propagator_matches_closed_form() {
        // exp(−iφ̂)·[cos Ωt − i sin Ωt ((ω_S/Ω) σz⊗1 + (g/Ω) σx⊗σz)]
        let (ws, wa, g) = (1.3_f64, 0.8, 2.1);
        let omega = (ws * ws + g * g).sqrt();
        let plant = ControlPlant::spin_example(ws, wa, g).unwrap();
        let total = plant.total_hamiltonian().eig().unwrap();
        for k in 1..=6 {
            let t = 0.51 * k as f64;
            let u = total.propagator_matrix(t).unwrap();
            let phase = kron(
                &identity(2),
                &Array2::from_diag(&ndarray::arr1(&[
                    C64::from_polar(1.0, -wa * t),
                    C64::from_polar(1.0, wa * t),
                ])),
            );
            let rotor = identity(4).mapv(|z| z * c((omega * t).cos(), 0.0))
                + (kron(&sigma_z(), &identity(2)).mapv(|z| z * (ws / omega))
                    + kron(&sigma_x(), &sigma_z()).mapv(|z| z * (g / omega)))
                .mapv(|z| z * c(0.0, -(omega * t).sin()));
            let closed = phase.dot(&rotor);
            assert!(frobenius_norm(&(&u - &closed)) <= 1e-10);
        }
    }

    #[test]
    fn joint_evolution_factorizes_and_matches_cycle() {
        let mut rng = ChaCha8Rng::seed_from_u64(73);
        for _ in 0..5 {
            let plant = random_block_plant(&mut rng, 4, 3);
            let sim = Simulator::new(&plant).unwrap();
            for _ in 0..4 {
                let psi = random_unit_state(&mut rng, 4);
                let j = rng.random_range(0..3);
                let t = rng.random_range(0.0..10.0);
                let joint = sim.evolve_joint(&psi, j, t).unwrap();
                let fact = check_factorization(&joint, 4, 3).unwrap();
                assert!(fact.schmidt_residual <= 1e-10);
                let eff = sim.evolve_cycle(&psi, &ControlCycle::new(j, t)).unwrap();
                assert!(fact.system.fidelity(&eff).unwrap() >= 1.0 - 1e-10);
            }
        }
    }

    #[test]
    fn accumulated_phase_matches_joint_global_phase() {
        let mut rng = ChaCha8Rng::seed_from_u64(74);
        let plant = random_block_plant(&mut rng, 3, 2);
        let sim = Simulator::new(&plant).unwrap();
        let initial = random_unit_state(&mut rng, 3);
        let mut psi = initial.clone();
        let mut cycles = Vec::new();
        let mut total_phase = 0.0;
        for step in 0..3 {
            let j = step % 2;
            let t = rng.random_range(0.1..3.0);
            let cycle = ControlCycle::new(j, t);
            let joint = sim.evolve_joint(&psi, j, t).unwrap();
            let eff = sim.evolve_cycle(&psi, &cycle).unwrap();
            let phase = sim.cycle_phase(&cycle).unwrap();
            // ⟨ψ_eff ⊗ φ_j | joint⟩ = e^{iθ} with θ the ledger phase
            let reference = kron_vector(eff.amplitudes(), &sim.accessor_states()[j].phi);
            let overlap: C64 = reference
                .iter()
                .zip(joint.iter())
                .map(|(a, b)| a.conj() * b)
                .sum();
            assert!((overlap.norm() - 1.0).abs() < 1e-10);
            let wrapped = (overlap.arg() - phase).rem_euclid(std::f64::consts::TAU);
            let dist = wrapped.min(std::f64::consts::TAU - wrapped);
            assert!(dist <= 1e-8, "phase mismatch {dist:.3e}");
            total_phase += phase;
            cycles.push(cycle);
            psi = eff;
        }
        // the trajectory ledger aggregates the per-cycle phases
        let traj = sim
            .run_schedule(&initial, &Schedule::new(cycles), 3)
            .unwrap();
        assert!((traj.accumulated_phase - total_phase).abs() <= 1e-12);
        assert!(traj.final_state().fidelity(&psi).unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn free_tail_rotates_relative_phase_at_level_splitting_rate() {
        // the tail phase comes out of the propagator itself: for H_S with
        // levels E₀, E₁ the relative phase advances by (E₀ − E₁)·t₂
        let (ws, wa, g) = (1.0_f64, 2.0, 100.0);
        let omega = (ws * ws + g * g).sqrt();
        let plant = ControlPlant::spin_example(ws, wa, g).unwrap();
        let sim = Simulator::new(&plant).unwrap();
        let psi = SystemState::basis_state(2, 0).unwrap();
        let t1 = 0.35 / omega;
        let base = sim.evolve_cycle(&psi, &ControlCycle::new(0, t1)).unwrap();
        let rel = |s: &SystemState| s.amplitudes()[1].arg() - s.amplitudes()[0].arg();
        for t2 in [0.17, 0.8, 2.9] {
            let out = sim
                .evolve_cycle(&psi, &ControlCycle::with_free_tail(0, t1, t2))
                .unwrap();
            // moduli untouched by the tail, |a₀| within ω_S/Ω of cos Ωt₁
            assert!(
                (out.amplitudes()[0].norm() - base.amplitudes()[0].norm()).abs() < 1e-12
            );
            assert!((out.amplitudes()[0].norm() - (omega * t1).cos().abs()) <= ws / omega);
            let advance =
                (rel(&out) - rel(&base)).rem_euclid(std::f64::consts::TAU);
            let expected = (2.0 * ws * t2).rem_euclid(std::f64::consts::TAU);
            let dist = (advance - expected).abs();
            let dist = dist.min(std::f64::consts::TAU - dist);
            assert!(dist <= 1e-9, "tail phase advance off by {dist:.3e}");
        }
    }

    #[test]
    fn factorization_of_product_vector() {
        let psi = [c(0.6, 0.0), c(0.0, 0.8)];
        let phi = [c(0.0, 1.0), c(0.0, 0.0)];
        let joint = kron_vector(&psi, &phi);
        let fact = check_factorization(&joint, 2, 2).unwrap();
        assert!(fact.schmidt_residual <= 1e-14);
        let target = SystemState::new(psi.to_vec()).unwrap();
        assert!(fact.system.fidelity(&target).unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn factorization_of_bell_state() {
        let r = 1.0 / 2.0_f64.sqrt();
        let joint = vec![c(r, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(r, 0.0)];
        let fact = check_factorization(&joint, 2, 2).unwrap();
        assert!((fact.schmidt_residual - 0.5).abs() <= 1e-12);
    }

    #[test]
    fn bloch_axes() {
        let zero = SystemState::basis_state(2, 0).unwrap();
        assert_eq!(bloch_coordinates(&zero).unwrap(), [0.0, 0.0, 1.0]);
        let r = 1.0 / 2.0_f64.sqrt();
        let plus = SystemState::new(vec![c(r, 0.0), c(r, 0.0)]).unwrap();
        let [x, y, z] = bloch_coordinates(&plus).unwrap();
        assert!((x - 1.0).abs() < 1e-12 && y.abs() < 1e-12 && z.abs() < 1e-12);
        let plus_i = SystemState::new(vec![c(r, 0.0), c(0.0, r)]).unwrap();
        let [x, y, _] = bloch_coordinates(&plus_i).unwrap();
        assert!(x.abs() < 1e-12 && (y - 1.0).abs() < 1e-12);
        let three = SystemState::basis_state(3, 0).unwrap();
        assert!(bloch_coordinates(&three).is_err());
    }

    #[test]
    fn bloch_trajectory_of_two_step_protocol() {
        // during the interaction z(t) = 1 − 2(g/Ω)² sin²Ωt; during the free
        // tail z is constant (rotation about the z axis)
        let (ws, wa, g) = (1.0_f64, 2.0, 3.0);
        let omega = (ws * ws + g * g).sqrt();
        let plant = ControlPlant::spin_example(ws, wa, g).unwrap();
        let sim = Simulator::new(&plant).unwrap();
        let psi = SystemState::basis_state(2, 0).unwrap();
        let (t1, t2) = (0.3, 0.9);
        let schedule = Schedule::new(vec![ControlCycle::with_free_tail(0, t1, t2)]);
        let traj = sim.run_schedule(&psi, &schedule, 240).unwrap();
        let mut z_tail = None;
        for sample in &traj.samples {
            let [x, y, z] = sample.bloch.expect("qubit trajectory");
            assert!((x * x + y * y + z * z - 1.0).abs() <= 1e-9);
            if sample.time <= t1 {
                let expect = 1.0 - 2.0 * (g / omega).powi(2) * (omega * sample.time).sin().powi(2);
                assert!((z - expect).abs() <= 1e-9);
            } else {
                let z_ref = *z_tail.get_or_insert(z);
                assert!((z - z_ref).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn norm_conserved_over_thousand_cycles() {
        let mut rng = ChaCha8Rng::seed_from_u64(75);
        let plant = random_block_plant(&mut rng, 3, 2);
        let sim = Simulator::new(&plant).unwrap();
        let cycles: Vec<ControlCycle> = (0..1000)
            .map(|k| ControlCycle::new(k % 2, rng.random_range(0.0..2.0)))
            .collect();
        let (out, _) = sim
            .final_state(
                &random_unit_state(&mut rng, 3),
                &Schedule::new(cycles),
            )
            .unwrap();
        assert!((out.norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn run_schedule_needs_sample_points() {
        let plant = ControlPlant::spin_example(1.0, 2.0, 3.0).unwrap();
        let sim = Simulator::new(&plant).unwrap();
        let psi = SystemState::basis_state(2, 0).unwrap();
        assert!(matches!(
            sim.run_schedule(&psi, &Schedule::empty(), 0),
            Err(Error::NoSamplePoints)
        ));
    }

    #[test]
    fn state_validation() {
        assert!(matches!(
            SystemState::new(vec![c(2.0, 0.0)]),
            Err(Error::NotNormalized { .. })
        ));
        assert!(matches!(
            SystemState::basis_state(2, 4),
            Err(Error::IndexOutOfRange { .. })
        ));
    }
}
