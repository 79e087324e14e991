//! The four workflows behind the CLI: check, simulate, synthesize, validate.
//! Each returns the structured result document plus the process exit code
//! (0 iff every check in the workflow passed its threshold).

use std::path::Path;

use anyhow::{bail, Context, Result};

use idqc_core::controllability::is_fully_controllable;
use idqc_core::engine::{check_factorization, ControlCycle, Simulator, SystemState};
use idqc_core::synthesis::{synthesize_general, synthesize_qubit};

use crate::report::{
    write_trajectory, ControllabilityReport, NondemolitionVerdict, ResultDocument, Thresholds,
    ValidationVerdict, TRAJECTORY_FILE,
};
use crate::scenario::{pairs_from_amplitudes, ScenarioDocument};

/// Worst-case infidelity / Schmidt residual allowed by `validate`.
pub const VALIDATION_TOL: f64 = 1e-9;

/// Evaluation budget of the general synthesizer.
pub const SYNTHESIS_EVAL_BUDGET: u64 = 100_000;

fn thresholds_for(scenario: &ScenarioDocument) -> Thresholds {
    let tol = scenario.tolerances();
    Thresholds {
        herm_tol: tol.herm_tol,
        nd_tol: tol.nd_tol,
        unit_tol: tol.unit_tol,
        validation_tol: VALIDATION_TOL,
    }
}

fn schedule_triples(schedule: &idqc_core::engine::Schedule) -> Vec<(usize, f64, f64)> {
    schedule
        .cycles
        .iter()
        .map(|c| (c.accessor_index, c.duration, c.post_free_time))
        .collect()
}

/// Non-demolition check, accessor spectrum, and the controllability rank
/// test. Exit 0 iff all pass.
pub fn cmd_check(scenario: &ScenarioDocument, out_dir: &Path) -> Result<(ResultDocument, i32)> {
    let mut doc = ResultDocument::new("check", thresholds_for(scenario));
    let plant = scenario.build_plant()?;
    let report = plant.validate_nondemolition();
    doc.nondemolition = Some(NondemolitionVerdict {
        residual: report.residual,
        threshold: report.threshold,
        passed: report.passed,
    });
    println!(
        "non-demolition: {} (residual {:.3e}, threshold {:.3e})",
        if report.passed { "pass" } else { "FAIL" },
        report.residual,
        report.threshold
    );

    let mut all_passed = report.passed;
    if report.passed {
        match is_fully_controllable(&plant) {
            Ok(verdict) => {
                println!(
                    "controllability: {} (generated dimension {} of {})",
                    if verdict.controllable {
                        "controllable"
                    } else {
                        "NOT controllable"
                    },
                    verdict.generated_dim,
                    verdict.required_dim
                );
                all_passed &= verdict.controllable;
                doc.controllability = Some(ControllabilityReport {
                    controllable: verdict.controllable,
                    generated_dim: verdict.generated_dim,
                    required_dim: verdict.required_dim,
                    borderline_admissions: verdict.certificate.borderline_admissions(),
                });
            }
            Err(err) => {
                println!("accessor spectrum: FAIL ({err})");
                doc.warnings.push(err.to_string());
                all_passed = false;
            }
        }
    }
    doc.passed = all_passed;
    let path = doc.write(out_dir)?;
    println!("result written to {}", path.display());
    Ok((doc, if all_passed { 0 } else { 1 }))
}

/// Run the scenario's schedule and export the sampled trajectory.
pub fn cmd_simulate(
    scenario: &ScenarioDocument,
    out_dir: &Path,
    samples_per_cycle: usize,
) -> Result<(ResultDocument, i32)> {
    let mut doc = ResultDocument::new("simulate", thresholds_for(scenario));
    let plant = scenario.build_plant()?;
    let schedule = scenario
        .build_schedule()
        .context("`simulate` needs a `schedule` field in the scenario")?;
    let initial = scenario.build_initial(plant.dim_s())?;
    let sim = Simulator::new(&plant)?;
    let trajectory = sim.run_schedule(&initial, &schedule, samples_per_cycle)?;

    let path = write_trajectory(out_dir, &trajectory, plant.dim_s())?;
    doc.trajectory_file = Some(TRAJECTORY_FILE.to_string());
    doc.final_state = Some(pairs_from_amplitudes(
        trajectory.final_state().amplitudes(),
    ));
    doc.accumulated_phase = Some(trajectory.accumulated_phase);
    doc.schedule = Some(schedule_triples(&schedule));
    doc.passed = true;
    println!(
        "simulated {} cycles, {} samples, accumulated phase {:.6}",
        schedule.len(),
        trajectory.samples.len(),
        trajectory.accumulated_phase
    );
    println!("trajectory written to {}", path.display());
    let report_path = doc.write(out_dir)?;
    println!("result written to {}", report_path.display());
    Ok((doc, 0))
}

/// Produce a schedule steering the initial state to the scenario's target:
/// closed-form for the spin preset, derivative-free search otherwise or when
/// forced with `--general`.
pub fn cmd_synthesize(
    scenario: &ScenarioDocument,
    out_dir: &Path,
    seed_override: Option<u64>,
    force_general: bool,
) -> Result<(ResultDocument, i32)> {
    let mut doc = ResultDocument::new("synthesize", thresholds_for(scenario));
    let plant = scenario.build_plant()?;
    let target = scenario
        .build_target()
        .context("`synthesize` needs a `target` field in the scenario")??;
    let seed = seed_override.or(scenario.seed).unwrap_or(0);

    let use_closed_form = scenario.preset.is_some() && !force_general;
    let result = if use_closed_form {
        synthesize_qubit(&plant, &target)?
    } else {
        let initial = scenario.build_initial(plant.dim_s())?;
        let target_state = target.to_state(plant.dim_s())?;
        let max_cycles = 2 * plant.dim_s() * plant.dim_a();
        synthesize_general(
            &plant,
            &initial,
            &target_state,
            max_cycles,
            SYNTHESIS_EVAL_BUDGET,
            seed,
        )?
    };

    println!(
        "synthesized {} cycles, fidelity {:.12}, {} evaluations ({})",
        result.schedule.len(),
        result.achieved_fidelity,
        result.evaluations,
        if use_closed_form {
            "closed form"
        } else {
            "coordinate search"
        }
    );
    for warning in &result.warnings {
        println!("warning: {warning}");
    }
    doc.schedule = Some(schedule_triples(&result.schedule));
    doc.fidelity = Some(result.achieved_fidelity);
    doc.evaluations = Some(result.evaluations);
    doc.seed = Some(seed);
    doc.warnings = result.warnings;
    doc.passed = true;
    let path = doc.write(out_dir)?;
    println!("result written to {}", path.display());
    Ok((doc, 0))
}

/// Compare the reduced joint evolution against the effective conditional
/// evolution over a grid of accessor indices, initial states, and times.
/// Exit 0 iff the worst infidelity and worst Schmidt residual are both
/// within [`VALIDATION_TOL`].
pub fn cmd_validate(scenario: &ScenarioDocument, out_dir: &Path) -> Result<(ResultDocument, i32)> {
    let mut doc = ResultDocument::new("validate", thresholds_for(scenario));
    let plant = scenario.build_plant()?;
    let dim_s = plant.dim_s();
    let dim_a = plant.dim_a();

    let report = plant.validate_nondemolition();
    doc.nondemolition = Some(NondemolitionVerdict {
        residual: report.residual,
        threshold: report.threshold,
        passed: report.passed,
    });
    if !report.passed {
        println!(
            "non-demolition: FAIL (residual {:.3e}, threshold {:.3e})",
            report.residual, report.threshold
        );
        doc.passed = false;
        let path = doc.write(out_dir)?;
        println!("result written to {}", path.display());
        return Ok((doc, 1));
    }

    let sim = Simulator::new(&plant)?;
    let mut probes: Vec<SystemState> = (0..dim_s)
        .map(|k| SystemState::basis_state(dim_s, k).expect("valid index"))
        .collect();
    let uniform = vec![
        num_complex::Complex64::new(1.0 / (dim_s as f64).sqrt(), 0.0);
        dim_s
    ];
    probes.push(SystemState::new(uniform)?);

    let mut worst_infidelity = 0.0_f64;
    let mut worst_residual = 0.0_f64;
    for j in 0..dim_a {
        for state in &probes {
            for k in 0..=14 {
                let t = 0.7 * k as f64;
                let joint = sim.evolve_joint(state, j, t)?;
                let fact = check_factorization(&joint, dim_s, dim_a)?;
                let eff = sim.evolve_cycle(state, &ControlCycle::new(j, t))?;
                worst_infidelity = worst_infidelity.max(1.0 - fact.system.fidelity(&eff)?);
                worst_residual = worst_residual.max(fact.schmidt_residual);
            }
        }
    }
    let passed = worst_infidelity <= VALIDATION_TOL && worst_residual <= VALIDATION_TOL;
    println!(
        "validation: {} (worst infidelity {:.3e}, worst Schmidt residual {:.3e}, threshold {:.1e})",
        if passed { "pass" } else { "FAIL" },
        worst_infidelity,
        worst_residual,
        VALIDATION_TOL
    );
    doc.validation = Some(ValidationVerdict {
        worst_infidelity,
        worst_schmidt_residual: worst_residual,
        passed,
    });
    doc.passed = passed;
    let path = doc.write(out_dir)?;
    println!("result written to {}", path.display());
    Ok((doc, if passed { 0 } else { 1 }))
}

/// Shared argument handling for all subcommands.
pub fn run(
    command: &str,
    scenario_path: &Path,
    out_dir: &Path,
    seed: Option<u64>,
    samples: Option<usize>,
    general: bool,
) -> Result<i32> {
    let scenario = ScenarioDocument::from_path(scenario_path)?;
    let samples_per_cycle = samples.unwrap_or(idqc_core::engine::DEFAULT_SAMPLES_PER_CYCLE);
    let (_, code) = match command {
        "check" => cmd_check(&scenario, out_dir)?,
        "simulate" => cmd_simulate(&scenario, out_dir, samples_per_cycle)?,
        "synthesize" => cmd_synthesize(&scenario, out_dir, seed, general)?,
        "validate" => cmd_validate(&scenario, out_dir)?,
        other => bail!("unknown command {other}"),
    };
    Ok(code)
}
