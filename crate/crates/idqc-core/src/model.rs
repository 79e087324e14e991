//! The control plant (H_S, H_A, H_I): validation of the non-demolition
//! coupling, extraction of the accessor spectrum with its conditional
//! Hamiltonians, effective Hamiltonians per accessor eigenstate, and the
//! two-spin preset.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::spectral::{
    self, frobenius_norm, identity, kron, outer_product, sigma_x, sigma_z, HermitianMatrix,
    DEGENERACY_GAP,
};

/// Validation thresholds carried by a plant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Relative Hermiticity tolerance for the three Hamiltonians.
    pub herm_tol: f64,
    /// Relative non-demolition / block-consistency tolerance.
    pub nd_tol: f64,
    /// Absolute unitarity tolerance per propagator call.
    pub unit_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            herm_tol: spectral::HERM_TOL,
            nd_tol: 1e-9,
            unit_tol: spectral::UNIT_TOL,
        }
    }
}

/// Outcome of the non-demolition check ‖[1 ⊗ H_A, H_I]‖_F against its
/// threshold. A query object: failing is reported, not raised.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationReport {
    pub residual: f64,
    pub threshold: f64,
    pub passed: bool,
}

/// One common eigenvector of H_A and H_I with its eigenvalue and the
/// conditional Hamiltonian it induces on the system.
#[derive(Debug, Clone)]
pub struct AccessorEigenstate {
    pub index: usize,
    pub alpha: f64,
    pub phi: Vec<C64>,
    pub conditional: HermitianMatrix,
}

/// H_S + H_j(S) − α_j·1, the generator of system evolution for accessor
/// state j. `alpha` is kept alongside so the scalar term can be split back
/// out for phase bookkeeping.
#[derive(Debug, Clone)]
pub struct EffectiveHamiltonian {
    pub index: usize,
    pub alpha: f64,
    pub matrix: HermitianMatrix,
}

/// One term λ·X of a simplified conditional Hamiltonian.
#[derive(Debug, Clone)]
pub struct SimplifiedGenerator {
    pub operator: HermitianMatrix,
    pub coupling: f64,
}

/// The physical model under control: system, accessor, and interaction
/// Hamiltonians with consistent dimensions. Immutable after construction.
#[derive(Debug, Clone)]
pub struct ControlPlant {
    dim_s: usize,
    dim_a: usize,
    h_s: HermitianMatrix,
    h_a: HermitianMatrix,
    h_i: HermitianMatrix,
    tol: Tolerances,
}

impl ControlPlant {
    pub fn new(
        h_s: Array2<C64>,
        h_a: Array2<C64>,
        h_i: Array2<C64>,
        tol: Tolerances,
    ) -> Result<Self> {
        let h_s = HermitianMatrix::new_with_tol(h_s, tol.herm_tol)?;
        let h_a = HermitianMatrix::new_with_tol(h_a, tol.herm_tol)?;
        let h_i = HermitianMatrix::new_with_tol(h_i, tol.herm_tol)?;
        let dim_s = h_s.dim();
        let dim_a = h_a.dim();
        if h_i.dim() != dim_s * dim_a {
            return Err(Error::DimensionMismatch {
                context: "interaction vs system × accessor",
                left: h_i.dim(),
                right: dim_s * dim_a,
            });
        }
        Ok(Self {
            dim_s,
            dim_a,
            h_s,
            h_a,
            h_i,
            tol,
        })
    }

    /// The two-spin preset: H_S = ω_S σ_z, H_A = ω_A σ_z, H_I = g σ_x ⊗ σ_z
    /// (system factor first). Satisfies the non-demolition condition exactly.
    pub fn spin_example(omega_s: f64, omega_a: f64, g: f64) -> Result<Self> {
        if !(omega_s.is_finite() && omega_a.is_finite() && g.is_finite()) {
            return Err(Error::NonFinite {
                context: "spin example parameters",
            });
        }
        let h_s = sigma_z().mapv(|z| z * omega_s);
        let h_a = sigma_z().mapv(|z| z * omega_a);
        let h_i = kron(&sigma_x(), &sigma_z()).mapv(|z| z * g);
        Self::new(h_s, h_a, h_i, Tolerances::default())
    }

    pub fn dim_s(&self) -> usize {
        self.dim_s
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn h_s(&self) -> &HermitianMatrix {
        &self.h_s
    }

    pub fn h_a(&self) -> &HermitianMatrix {
        &self.h_a
    }

    pub fn h_i(&self) -> &HermitianMatrix {
        &self.h_i
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tol
    }

    /// H_S ⊗ 1 + 1 ⊗ H_A + H_I on the composite space.
    pub fn total_hamiltonian(&self) -> HermitianMatrix {
        let mat = kron(self.h_s.as_array(), &identity(self.dim_a))
            + kron(&identity(self.dim_s), self.h_a.as_array())
            + self.h_i.as_array();
        HermitianMatrix::from_array_unchecked(mat)
    }

    /// Reports ‖[1 ⊗ H_A, H_I]‖_F against nd_tol · max(1, ‖H_A‖·‖H_I‖).
    pub fn validate_nondemolition(&self) -> ValidationReport {
        let lifted = kron(&identity(self.dim_s), self.h_a.as_array());
        let comm = spectral::commutator(&lifted, self.h_i.as_array())
            .expect("dimensions validated at construction");
        let residual = frobenius_norm(&comm);
        let scale = frobenius_norm(self.h_a.as_array()) * frobenius_norm(self.h_i.as_array());
        let threshold = self.tol.nd_tol * scale.max(1.0);
        ValidationReport {
            residual,
            threshold,
            passed: residual <= threshold,
        }
    }

    /// One entry per accessor eigenvector, ordered by the deterministic
    /// eigendecomposition of H_A, each carrying its conditional Hamiltonian
    /// H_j(S) = (1 ⊗ φ_j†) H_I (1 ⊗ φ_j).
    ///
    /// Within degenerate eigenvalue clusters of H_A the accessor basis is
    /// re-diagonalized against the interaction to recover a block structure
    /// when one exists; if none exists within tolerance this fails with
    /// [`Error::BlockInconsistency`].
    pub fn accessor_spectrum(&self) -> Result<Vec<AccessorEigenstate>> {
        let report = self.validate_nondemolition();
        if !report.passed {
            return Err(Error::Nondemolition {
                residual: report.residual,
                tol: report.threshold,
            });
        }

        let eig = self.h_a.eig()?;
        let alphas = eig.values();
        let gap = DEGENERACY_GAP * frobenius_norm(self.h_a.as_array()).max(1.0);
        let block_tol = self.tol.nd_tol * frobenius_norm(self.h_i.as_array()).max(1.0);

        let mut states = Vec::with_capacity(self.dim_a);
        let mut start = 0;
        while start < self.dim_a {
            let mut end = start + 1;
            while end < self.dim_a && alphas[end] - alphas[end - 1] < gap {
                end += 1;
            }
            let cluster: Vec<Vec<C64>> = (start..end).map(|k| eig.eigenvector(k)).collect();
            let resolved = if cluster.len() == 1 {
                cluster
            } else {
                self.resolve_degenerate_cluster(&cluster, block_tol)?
            };
            for (offset, phi) in resolved.into_iter().enumerate() {
                let index = start + offset;
                let block = self.conditional_block(&phi, &phi);
                let residual = self.block_residual(&phi, &block);
                if residual > block_tol {
                    return Err(Error::BlockInconsistency {
                        residual,
                        tol: block_tol,
                    });
                }
                states.push(AccessorEigenstate {
                    index,
                    alpha: alphas[index],
                    phi,
                    conditional: HermitianMatrix::new_with_tol(block, self.tol.herm_tol)?,
                });
            }
            start = end;
        }
        Ok(states)
    }

    /// H_eff(j) = H_S + H_j(S) − α_j·1.
    pub fn effective_hamiltonian(&self, j: usize) -> Result<EffectiveHamiltonian> {
        let states = self.accessor_spectrum()?;
        let state = states.get(j).ok_or(Error::IndexOutOfRange {
            context: "accessor eigenstate",
            index: j,
            dim: self.dim_a,
        })?;
        let matrix = self.h_s.add(&state.conditional)?.shifted(-state.alpha);
        Ok(EffectiveHamiltonian {
            index: j,
            alpha: state.alpha,
            matrix,
        })
    }

    /// ⟨φ_bra| H_I |φ_ket⟩ traced over the accessor factor: a dim_S × dim_S
    /// block of the interaction.
    fn conditional_block(&self, bra: &[C64], ket: &[C64]) -> Array2<C64> {
        let h_i = self.h_i.as_array();
        let da = self.dim_a;
        Array2::from_shape_fn((self.dim_s, self.dim_s), |(a, b)| {
            let mut acc = C64::new(0.0, 0.0);
            for c in 0..da {
                for d in 0..da {
                    acc += bra[c].conj() * h_i[[a * da + c, b * da + d]] * ket[d];
                }
            }
            acc
        })
    }

    /// ‖H_I (1 ⊗ φφ†) − B ⊗ φφ†‖_F — the defining property of a conditional
    /// Hamiltonian, testable directly.
    fn block_residual(&self, phi: &[C64], block: &Array2<C64>) -> f64 {
        let projector = outer_product(phi);
        let lhs = self
            .h_i
            .as_array()
            .dot(&kron(&identity(self.dim_s), &projector));
        let rhs = kron(block, &projector);
        frobenius_norm(&(lhs - rhs))
    }

    /// Rotate a degenerate accessor eigenspace so the interaction becomes
    /// block-diagonal over it. Probes the system factor with a few fixed
    /// generic Hermitian matrices; each probe folds the interaction into a
    /// small Hermitian matrix on the cluster whose eigenbasis separates
    /// blocks with distinct probe traces.
    fn resolve_degenerate_cluster(
        &self,
        cluster: &[Vec<C64>],
        block_tol: f64,
    ) -> Result<Vec<Vec<C64>>> {
        const PROBES: usize = 3;
        let k = cluster.len();
        let mut best_residual = f64::INFINITY;
        for attempt in 0..PROBES {
            let probe = generic_probe(self.dim_s, attempt);
            let w = Array2::from_shape_fn((k, k), |(u, v)| {
                let block = self.conditional_block(&cluster[u], &cluster[v]);
                // tr(G · B(u, v))
                let mut acc = C64::new(0.0, 0.0);
                for a in 0..self.dim_s {
                    for b in 0..self.dim_s {
                        acc += probe[[a, b]] * block[[b, a]];
                    }
                }
                acc
            });
            let weig = HermitianMatrix::new(w)?.eig()?;
            let mut rotated = Vec::with_capacity(k);
            for m in 0..k {
                let coeffs = weig.eigenvector(m);
                let mut phi = vec![C64::new(0.0, 0.0); self.dim_a];
                for (u, coeff) in coeffs.iter().enumerate() {
                    for (i, z) in cluster[u].iter().enumerate() {
                        phi[i] += coeff * z;
                    }
                }
                spectral::fix_global_phase(&mut phi);
                rotated.push(phi);
            }
            let worst = rotated
                .iter()
                .map(|phi| {
                    let block = self.conditional_block(phi, phi);
                    self.block_residual(phi, &block)
                })
                .fold(0.0_f64, f64::max);
            if worst <= block_tol {
                return Ok(rotated);
            }
            best_residual = best_residual.min(worst);
        }
        Err(Error::BlockInconsistency {
            residual: best_residual,
            tol: block_tol,
        })
    }
}

/// Effective Hamiltonians H_S + λ_j·X_j of the simplified model; constant
/// offsets are dropped since they only generate global phase.
pub fn build_simplified_model(
    h_s: &HermitianMatrix,
    generators: &[SimplifiedGenerator],
) -> Result<Vec<EffectiveHamiltonian>> {
    let mut out = Vec::with_capacity(generators.len());
    for (index, gen) in generators.iter().enumerate() {
        if gen.operator.dim() != h_s.dim() {
            return Err(Error::DimensionMismatch {
                context: "simplified generator vs drift",
                left: gen.operator.dim(),
                right: h_s.dim(),
            });
        }
        let matrix = h_s.add(&gen.operator.scaled(gen.coupling))?;
        out.push(EffectiveHamiltonian {
            index,
            alpha: 0.0,
            matrix,
        });
    }
    Ok(out)
}

/// A fixed generic Hermitian probe; distinct `attempt` values give
/// independent probes for retrying degenerate resolutions.
fn generic_probe(n: usize, attempt: usize) -> Array2<C64> {
    let shift = (attempt + 1) as f64;
    let upper = |i: usize, j: usize| -> C64 {
        if i == j {
            C64::new(
                (i + 1) as f64 + (shift * (i as f64 + 0.5) * 0.7391).sin(),
                0.0,
            )
        } else {
            C64::new(
                (shift * ((i * n + j) as f64 + 1.0) * 0.8191).sin(),
                (shift * ((j * n + i) as f64 + 1.0) * 0.4273).cos(),
            )
        }
    };
    Array2::from_shape_fn((n, n), |(i, j)| {
        if i <= j {
            upper(i, j)
        } else {
            upper(j, i).conj()
        }
    })
}
