//! Schedule synthesis: closed-form two-segment steering for the two-spin
//! preset, and seeded derivative-free fidelity maximization for general
//! plants.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::controllability::is_fully_controllable;
use crate::engine::{ControlCycle, Schedule, Simulator, SystemState};
use crate::error::{Error, Result};
use crate::model::ControlPlant;
use crate::spectral::frobenius_norm;

/// Target state: (θ, φ) angles for a qubit, or an explicit amplitude vector.
/// The angle form denotes cos(θ)|0⟩ + e^{iφ} sin(θ)|1⟩.
#[derive(Debug, Clone)]
pub enum TargetSpec {
    Angles { theta: f64, phi: f64 },
    Vector(SystemState),
}

impl TargetSpec {
    pub fn to_state(&self, dim_s: usize) -> Result<SystemState> {
        match self {
            TargetSpec::Angles { theta, phi } => {
                if dim_s != 2 {
                    return Err(Error::DimensionMismatch {
                        context: "angle target needs a qubit",
                        left: dim_s,
                        right: 2,
                    });
                }
                if !(theta.is_finite() && phi.is_finite()) {
                    return Err(Error::NonFinite {
                        context: "target angles",
                    });
                }
                SystemState::new(vec![
                    C64::new(theta.cos(), 0.0),
                    C64::from_polar(theta.sin(), *phi),
                ])
            }
            TargetSpec::Vector(state) => {
                if state.dim() != dim_s {
                    return Err(Error::DimensionMismatch {
                        context: "target vs system dimension",
                        left: state.dim(),
                        right: dim_s,
                    });
                }
                Ok(state.clone())
            }
        }
    }
}

/// A synthesized schedule with its exactly simulated fidelity.
#[derive(Debug, Clone)]
pub struct SynthesisResult {
    pub schedule: Schedule,
    pub achieved_fidelity: f64,
    pub evaluations: u64,
    pub seed: u64,
    pub warnings: Vec<String>,
}

const BISECTION_STEPS: usize = 160;

/// Two-segment steering of the spin preset from |0⟩: an interaction segment
/// of length t₁ sets the target modulus, a free tail of length t₂ dials the
/// relative phase.
///
/// t₁ comes from a root solve on the simulated |a₀| curve within the first
/// quarter Rabi period (clamped at the maximum-transfer point when the
/// target modulus lies below the reachable floor ω_S/Ω), and t₂ from solving
/// the phase match exactly on the free-evolution circle. The accessor state
/// with the negative transverse coupling is used, so the native phase at
/// t₂ = 0 is +π/2.
pub fn synthesize_qubit(plant: &ControlPlant, target: &TargetSpec) -> Result<SynthesisResult> {
    if plant.dim_s() != 2 {
        return Err(Error::UnsupportedPlant {
            reason: "closed-form synthesis needs a two-level system",
        });
    }
    let sim = Simulator::new(plant)?;
    let h_s = plant.h_s().as_array();
    let hs_scale = frobenius_norm(h_s).max(1.0);
    if h_s[[0, 1]].norm() > 1e-9 * hs_scale {
        return Err(Error::UnsupportedPlant {
            reason: "system Hamiltonian must be diagonal",
        });
    }
    let e0 = h_s[[0, 0]].re;
    let e1 = h_s[[1, 1]].re;

    // conditional Hamiltonians must be transverse: H_j = λ_j σ_x
    let mut lambdas = Vec::with_capacity(sim.accessor_states().len());
    for state in sim.accessor_states() {
        let hj = state.conditional.as_array();
        let lambda = hj[[0, 1]].re;
        let residual = (hj[[0, 0]].norm_sqr()
            + hj[[1, 1]].norm_sqr()
            + (hj[[0, 1]] - C64::new(lambda, 0.0)).norm_sqr()
            + (hj[[1, 0]] - C64::new(lambda, 0.0)).norm_sqr())
        .sqrt();
        if residual > 1e-9 * frobenius_norm(hj).max(1.0) {
            return Err(Error::UnsupportedPlant {
                reason: "conditional Hamiltonians must be transverse (λ·σx)",
            });
        }
        lambdas.push(lambda);
    }
    let (j_star, &lambda) = lambdas
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| a.total_cmp(b))
        .expect("accessor spectrum is non-empty");
    if lambdas.iter().map(|l| l.abs()).fold(0.0, f64::max) <= 1e-12 * hs_scale {
        return Err(Error::NoTransverseDrive);
    }

    let omega_s = 0.5 * (e0 - e1);
    let rabi = (omega_s * omega_s + lambda * lambda).sqrt();
    let quarter = std::f64::consts::FRAC_PI_2 / rabi;

    let target_state = target.to_state(2)?;
    let a0_target = target_state.amplitudes()[0];
    let a1_target = target_state.amplitudes()[1];
    let modulus_target = a0_target.norm();

    let initial = SystemState::basis_state(2, 0)?;
    let mut evaluations = 0u64;
    let mut probe = |t: f64| -> Result<SystemState> {
        evaluations += 1;
        sim.evolve_cycle(&initial, &ControlCycle::new(j_star, t))
    };

    // |a₀(t)| is monotone decreasing on [0, quarter] from 1 to |ω_S|/Ω
    let floor = omega_s.abs() / rabi;
    let t1 = if modulus_target >= 1.0 - 1e-15 {
        0.0
    } else if modulus_target <= floor {
        quarter
    } else {
        let mut lo = 0.0;
        let mut hi = quarter;
        for _ in 0..BISECTION_STEPS {
            let mid = 0.5 * (lo + hi);
            let a0 = probe(mid)?.amplitudes()[0].norm();
            if a0 > modulus_target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };

    let mut warnings = Vec::new();
    let after_interaction = probe(t1)?;
    let need_phase = a1_target.norm() > 1e-12
        && a0_target.norm() > 1e-12
        && after_interaction.amplitudes()[1].norm() > 1e-12;
    let t2 = if need_phase {
        let achieved =
            after_interaction.amplitudes()[1].arg() - after_interaction.amplitudes()[0].arg();
        let wanted = a1_target.arg() - a0_target.arg();
        // relative phase advances linearly at rate E₀ − E₁ under the free drift
        let rate = e0 - e1;
        if rate.abs() <= 1e-14 * hs_scale {
            warnings.push("free evolution cannot adjust the relative phase (degenerate drift)".into());
            0.0
        } else {
            ((wanted - achieved) * rate.signum()).rem_euclid(std::f64::consts::TAU) / rate.abs()
        }
    } else {
        0.0
    };

    let schedule = Schedule::new(vec![ControlCycle::with_free_tail(j_star, t1, t2)]);
    let (final_state, _) = sim.final_state(&initial, &schedule)?;
    evaluations += 1;
    let achieved_fidelity = target_state.fidelity(&final_state)?;
    Ok(SynthesisResult {
        schedule,
        achieved_fidelity,
        evaluations,
        seed: 0,
        warnings,
    })
}

/// Fidelity maximization over the durations of a round-robin cycle template
/// using seeded coordinate search: a coarse scan plus golden-section
/// refinement per coordinate, with uniform-random restarts. Deterministic
/// for a fixed seed; every returned duration is non-negative. Exhausting the
/// budget is not an error — the best schedule so far is returned.
pub fn synthesize_general(
    plant: &ControlPlant,
    initial: &SystemState,
    target: &SystemState,
    max_cycles: usize,
    eval_budget: u64,
    seed: u64,
) -> Result<SynthesisResult> {
    let sim = Simulator::new(plant)?;
    if initial.dim() != plant.dim_s() {
        return Err(Error::DimensionMismatch {
            context: "initial vs system dimension",
            left: initial.dim(),
            right: plant.dim_s(),
        });
    }
    if target.dim() != plant.dim_s() {
        return Err(Error::DimensionMismatch {
            context: "target vs system dimension",
            left: target.dim(),
            right: plant.dim_s(),
        });
    }

    let mut warnings = Vec::new();
    let verdict = is_fully_controllable(plant)?;
    if !verdict.controllable {
        warnings.push(format!(
            "plant is not fully controllable: generated dimension {} of {}",
            verdict.generated_dim, verdict.required_dim
        ));
    }

    let n_states = sim.accessor_states().len();
    let template: Vec<usize> = (0..max_cycles).map(|k| k % n_states).collect();
    let mut search = DurationSearch::new(&sim, &template, initial, target, eval_budget);
    let bounds: Vec<f64> = template
        .iter()
        .map(|&j| search.duration_bound(j))
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best_x = vec![0.0; max_cycles];
    let mut best_f = search.eval(&best_x).unwrap_or(0.0);

    'restarts: while search.remaining() > 0 && best_f < 1.0 - 1e-12 {
        let mut x: Vec<f64> = if search.first_restart_done {
            bounds
                .iter()
                .map(|&b| rng.random_range(0.0..=b.max(f64::MIN_POSITIVE)))
                .collect()
        } else {
            vec![0.0; max_cycles]
        };
        search.first_restart_done = true;
        let mut f_cur = match search.eval(&x) {
            Some(f) => f,
            None => break 'restarts,
        };
        for _sweep in 0..25 {
            let mut improved = false;
            for (coord, &bound) in bounds.iter().enumerate() {
                match search.line_max(&mut x, coord, bound, f_cur) {
                    Some(f_new) => {
                        if f_new > f_cur + 1e-13 {
                            improved = true;
                        }
                        f_cur = f_new;
                    }
                    None => {
                        if f_cur > best_f {
                            best_x = x.clone();
                        }
                        break 'restarts;
                    }
                }
                if f_cur > best_f {
                    best_f = f_cur;
                    best_x = x.clone();
                }
            }
            if !improved || f_cur > 1.0 - 1e-12 {
                break;
            }
        }
        if f_cur > best_f {
            best_f = f_cur;
            best_x = x;
        }
    }

    // a zero duration deletes its cycle; the pruned schedule is equivalent
    let cycles: Vec<ControlCycle> = template
        .iter()
        .zip(best_x.iter())
        .filter(|(_, &d)| d > 0.0)
        .map(|(&j, &d)| ControlCycle::new(j, d))
        .collect();
    let schedule = Schedule::new(cycles);
    let (final_state, _) = sim.final_state(initial, &schedule)?;
    let achieved_fidelity = target.fidelity(&final_state)?;
    Ok(SynthesisResult {
        schedule,
        achieved_fidelity,
        evaluations: search.used,
        seed,
        warnings,
    })
}

struct DurationSearch<'a> {
    sim: &'a Simulator,
    template: &'a [usize],
    initial: &'a SystemState,
    target: &'a SystemState,
    budget: u64,
    used: u64,
    first_restart_done: bool,
}

impl<'a> DurationSearch<'a> {
    fn new(
        sim: &'a Simulator,
        template: &'a [usize],
        initial: &'a SystemState,
        target: &'a SystemState,
        budget: u64,
    ) -> Self {
        Self {
            sim,
            template,
            initial,
            target,
            budget,
            used: 0,
            first_restart_done: false,
        }
    }

    fn remaining(&self) -> u64 {
        self.budget.saturating_sub(self.used)
    }

    /// Search interval per accessor index: two full revolutions of the
    /// widest spectral gap of the conditional generator.
    fn duration_bound(&self, j: usize) -> f64 {
        let generator = self
            .sim
            .plant()
            .h_s()
            .add(&self.sim.accessor_states()[j].conditional)
            .expect("dimensions match");
        let eig = generator.eig().expect("validated generator");
        let span = eig.values()[eig.dim() - 1] - eig.values()[0];
        if span <= 1e-12 {
            1.0
        } else {
            4.0 * std::f64::consts::PI / span
        }
    }

    /// |⟨target|U(x)|initial⟩|², or None once the budget is exhausted.
    fn eval(&mut self, durations: &[f64]) -> Option<f64> {
        if self.used >= self.budget {
            return None;
        }
        self.used += 1;
        let mut amps = self.initial.amplitudes().to_vec();
        for (&j, &d) in self.template.iter().zip(durations.iter()) {
            if d > 0.0 {
                amps = self.sim.conditional_apply(j, d, &amps);
            }
        }
        let overlap: C64 = self
            .target
            .amplitudes()
            .iter()
            .zip(amps.iter())
            .map(|(t, a)| t.conj() * a)
            .sum();
        Some(overlap.norm_sqr())
    }

    /// Coarse scan plus golden-section refinement of one coordinate on
    /// [0, bound]. Returns the (possibly unchanged) objective value, or None
    /// when the budget ran out mid-search.
    fn line_max(
        &mut self,
        x: &mut [f64],
        coord: usize,
        bound: f64,
        f_cur: f64,
    ) -> Option<f64> {
        const GRID: usize = 16;
        const GOLDEN_ITERS: usize = 40;
        let x_old = x[coord];
        let mut best_t = x_old;
        let mut best_f = f_cur;
        let mut grid_best = 0usize;
        for i in 0..=GRID {
            let t = bound * i as f64 / GRID as f64;
            x[coord] = t;
            let f = match self.eval(x) {
                Some(f) => f,
                None => {
                    x[coord] = best_t;
                    return None;
                }
            };
            if f > best_f {
                best_f = f;
                best_t = t;
                grid_best = i;
            }
        }
        // refine inside the bracket around the best grid point
        let mut lo = bound * grid_best.saturating_sub(1) as f64 / GRID as f64;
        let mut hi = bound * (grid_best + 1).min(GRID) as f64 / GRID as f64;
        let inv_phi = 0.5 * (5.0_f64.sqrt() - 1.0);
        let mut t_a = hi - inv_phi * (hi - lo);
        let mut t_b = lo + inv_phi * (hi - lo);
        x[coord] = t_a;
        let mut f_a = match self.eval(x) {
            Some(f) => f,
            None => {
                x[coord] = best_t;
                return None;
            }
        };
        x[coord] = t_b;
        let mut f_b = match self.eval(x) {
            Some(f) => f,
            None => {
                x[coord] = best_t;
                return None;
            }
        };
        for _ in 0..GOLDEN_ITERS {
            if f_a > f_b {
                hi = t_b;
                t_b = t_a;
                f_b = f_a;
                t_a = hi - inv_phi * (hi - lo);
                x[coord] = t_a;
                f_a = match self.eval(x) {
                    Some(f) => f,
                    None => break,
                };
            } else {
                lo = t_a;
                t_a = t_b;
                f_a = f_b;
                t_b = lo + inv_phi * (hi - lo);
                x[coord] = t_b;
                f_b = match self.eval(x) {
                    Some(f) => f,
                    None => break,
                };
            }
            let (t, f) = if f_a > f_b { (t_a, f_a) } else { (t_b, f_b) };
            if f > best_f {
                best_f = f;
                best_t = t;
            }
        }
        x[coord] = best_t;
        Some(best_f)
    }
}
