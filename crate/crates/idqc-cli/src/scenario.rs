//! Scenario documents: JSON descriptions of a plant (preset or explicit
//! matrices), an optional schedule, initial state, target, tolerance
//! overrides, and a seed. Matrices are row-major lists of (real, imaginary)
//! pairs so the format stays trivially parsable.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use idqc_core::engine::{ControlCycle, Schedule, SystemState};
use idqc_core::model::{ControlPlant, Tolerances};
use idqc_core::synthesis::TargetSpec;

pub type ComplexPair = (f64, f64);

pub const SPIN_PRESET_NAME: &str = "spin-example";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub explicit: Option<ExplicitPlant>,
    /// Cycles as (accessor_index, dt, free_tail) triples.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Vec<(usize, f64, f64)>>,
    /// Initial system state; defaults to basis state 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Vec<ComplexPair>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<TargetDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<ToleranceDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Preset {
    pub name: String,
    pub parameters: SpinParameters,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpinParameters {
    #[serde(rename = "omega_S")]
    pub omega_s: f64,
    #[serde(rename = "omega_A")]
    pub omega_a: f64,
    pub g: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitPlant {
    /// (dim_S, dim_A).
    pub dims: (usize, usize),
    pub h_s: Vec<ComplexPair>,
    pub h_a: Vec<ComplexPair>,
    pub h_i: Vec<ComplexPair>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum TargetDoc {
    Angles { theta: f64, phi: f64 },
    Amplitudes { amplitudes: Vec<ComplexPair> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ToleranceDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub herm_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nd_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit_tol: Option<f64>,
}

impl ScenarioDocument {
    /// Parse from a file; JSON errors carry line/column diagnostics.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read scenario file {}", path.display()))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let doc: ScenarioDocument = serde_json::from_str(text)
            .context("malformed scenario document")?;
        doc.validate()?;
        Ok(doc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    fn validate(&self) -> Result<()> {
        match (&self.preset, &self.explicit) {
            (Some(_), Some(_)) => bail!("scenario must contain exactly one of `preset` / `explicit`, found both"),
            (None, None) => bail!("scenario must contain exactly one of `preset` / `explicit`, found neither"),
            _ => {}
        }
        if let Some(preset) = &self.preset {
            if preset.name != SPIN_PRESET_NAME {
                bail!(
                    "unknown preset `{}`; the only named preset is `{SPIN_PRESET_NAME}`",
                    preset.name
                );
            }
        }
        if let Some(explicit) = &self.explicit {
            let (ds, da) = explicit.dims;
            if ds == 0 || da == 0 {
                bail!("dims must be positive, got ({ds}, {da})");
            }
            for (name, field, dim) in [
                ("h_s", &explicit.h_s, ds),
                ("h_a", &explicit.h_a, da),
                ("h_i", &explicit.h_i, ds * da),
            ] {
                if field.len() != dim * dim {
                    bail!(
                        "field `{name}` has {} entries, expected {} for dimension {dim}",
                        field.len(),
                        dim * dim
                    );
                }
            }
        }
        Ok(())
    }

    pub fn tolerances(&self) -> Tolerances {
        let mut tol = Tolerances::default();
        if let Some(doc) = &self.tolerances {
            if let Some(h) = doc.herm_tol {
                tol.herm_tol = h;
            }
            if let Some(n) = doc.nd_tol {
                tol.nd_tol = n;
            }
            if let Some(u) = doc.unit_tol {
                tol.unit_tol = u;
            }
        }
        tol
    }

    pub fn build_plant(&self) -> Result<ControlPlant> {
        let tol = self.tolerances();
        if let Some(preset) = &self.preset {
            let p = &preset.parameters;
            return ControlPlant::spin_example(p.omega_s, p.omega_a, p.g)
                .context("invalid spin preset parameters");
        }
        let explicit = self.explicit.as_ref().expect("validated");
        let (ds, da) = explicit.dims;
        let h_s = matrix_from_pairs(&explicit.h_s, ds);
        let h_a = matrix_from_pairs(&explicit.h_a, da);
        let h_i = matrix_from_pairs(&explicit.h_i, ds * da);
        ControlPlant::new(h_s, h_a, h_i, tol).context("invalid explicit plant")
    }

    pub fn build_schedule(&self) -> Option<Schedule> {
        self.schedule.as_ref().map(|entries| {
            Schedule::new(
                entries
                    .iter()
                    .map(|&(j, dt, tail)| ControlCycle::with_free_tail(j, dt, tail))
                    .collect(),
            )
        })
    }

    pub fn build_initial(&self, dim_s: usize) -> Result<SystemState> {
        match &self.initial {
            None => Ok(SystemState::basis_state(dim_s, 0)?),
            Some(pairs) => {
                if pairs.len() != dim_s {
                    bail!(
                        "initial state has {} amplitudes, expected {dim_s}",
                        pairs.len()
                    );
                }
                Ok(SystemState::new(
                    pairs.iter().map(|&(re, im)| C64::new(re, im)).collect(),
                )?)
            }
        }
    }

    pub fn build_target(&self) -> Option<Result<TargetSpec>> {
        self.target.as_ref().map(|doc| match doc {
            TargetDoc::Angles { theta, phi } => Ok(TargetSpec::Angles {
                theta: *theta,
                phi: *phi,
            }),
            TargetDoc::Amplitudes { amplitudes } => {
                let amps: Vec<C64> = amplitudes.iter().map(|&(re, im)| C64::new(re, im)).collect();
                Ok(TargetSpec::Vector(SystemState::new(amps)?))
            }
        })
    }
}

fn matrix_from_pairs(pairs: &[ComplexPair], dim: usize) -> ndarray::Array2<C64> {
    ndarray::Array2::from_shape_fn((dim, dim), |(i, j)| {
        let (re, im) = pairs[i * dim + j];
        C64::new(re, im)
    })
}

pub fn pairs_from_amplitudes(amps: &[C64]) -> Vec<ComplexPair> {
    amps.iter().map(|z| (z.re, z.im)).collect()
}
