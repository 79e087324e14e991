//! Dense complex matrix services: Hermitian eigendecomposition, unitary
//! propagators, tensor products, commutators, and Frobenius norms.
//!
//! All matrices are square `Array2<Complex64>` at desk scale (dimension
//! ≲ 64). Propagators are formed from the eigendecomposition of their
//! Hermitian generator rather than by scaling-and-squaring, so unitarity
//! and the one-parameter group law hold to machine precision.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Relative Hermiticity tolerance accepted by [`HermitianMatrix::new`].
pub const HERM_TOL: f64 = 1e-10;
/// Absolute unitarity tolerance for every single-propagator call.
pub const UNIT_TOL: f64 = 1e-12;
/// Relative eigenvalue gap below which eigenvalues form a degenerate cluster.
pub const DEGENERACY_GAP: f64 = 1e-9;

const MAX_JACOBI_SWEEPS: usize = 64;

pub fn identity(dim: usize) -> Array2<C64> {
    Array2::eye(dim)
}

pub fn sigma_x() -> Array2<C64> {
    let o = C64::new(0.0, 0.0);
    let l = C64::new(1.0, 0.0);
    ndarray::array![[o, l], [l, o]]
}

pub fn sigma_y() -> Array2<C64> {
    let o = C64::new(0.0, 0.0);
    ndarray::array![[o, C64::new(0.0, -1.0)], [C64::new(0.0, 1.0), o]]
}

pub fn sigma_z() -> Array2<C64> {
    let o = C64::new(0.0, 0.0);
    ndarray::array![[C64::new(1.0, 0.0), o], [o, C64::new(-1.0, 0.0)]]
}

pub fn all_finite(a: &Array2<C64>) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Conjugate transpose A†.
pub fn dagger(a: &Array2<C64>) -> Array2<C64> {
    let (rows, cols) = a.dim();
    Array2::from_shape_fn((cols, rows), |(i, j)| a[[j, i]].conj())
}

pub fn frobenius_norm(a: &Array2<C64>) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Frobenius inner product tr(A†B).
pub fn frobenius_inner(a: &Array2<C64>, b: &Array2<C64>) -> Result<C64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            context: "frobenius inner product",
            left: a.nrows(),
            right: b.nrows(),
        });
    }
    Ok(a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum())
}

/// Kronecker product A ⊗ B. The left factor varies slowest, so composite
/// indices read (row_A · nrows_B + row_B); system-first ordering throughout
/// the crate.
pub fn kron(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    ndarray::linalg::kron(a, b)
}

/// Tensor product of state vectors, same ordering convention as [`kron`].
pub fn kron_vector(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for &x in a {
        for &y in b {
            out.push(x * y);
        }
    }
    out
}

/// Outer product vv†.
pub fn outer_product(v: &[C64]) -> Array2<C64> {
    let n = v.len();
    Array2::from_shape_fn((n, n), |(i, j)| v[i] * v[j].conj())
}

/// Commutator AB − BA.
pub fn commutator(a: &Array2<C64>, b: &Array2<C64>) -> Result<Array2<C64>> {
    if a.nrows() != a.ncols() {
        return Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            context: "commutator",
            left: a.nrows(),
            right: b.nrows(),
        });
    }
    Ok(a.dot(b) - b.dot(a))
}

/// Multiply a state vector by the unit phase that makes its
/// largest-magnitude component (first such index on ties) real positive.
pub fn fix_global_phase(v: &mut [C64]) {
    let anchor = anchor_index(v);
    let a = v[anchor];
    let r = a.norm();
    if r > 0.0 {
        let phase = a.conj() / r;
        for z in v.iter_mut() {
            *z *= phase;
        }
    }
}

/// Index of the largest-magnitude component; first index wins on exact ties.
pub fn anchor_index(v: &[C64]) -> usize {
    let mut best = 0;
    let mut best_mag = v[0].norm_sqr();
    for (i, z) in v.iter().enumerate().skip(1) {
        let m = z.norm_sqr();
        if m > best_mag {
            best = i;
            best_mag = m;
        }
    }
    best
}

/// A validated Hermitian matrix: ‖A − A†‖_F ≤ tol · max(1, ‖A‖_F).
///
/// Inputs are accepted as given — asymmetry beyond tolerance is an error,
/// never silently repaired.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    mat: Array2<C64>,
}

impl HermitianMatrix {
    pub fn new(mat: Array2<C64>) -> Result<Self> {
        Self::new_with_tol(mat, HERM_TOL)
    }

    pub fn new_with_tol(mat: Array2<C64>, herm_tol: f64) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::NotSquare {
                rows: mat.nrows(),
                cols: mat.ncols(),
            });
        }
        if !all_finite(&mat) {
            return Err(Error::NonFinite {
                context: "Hermitian matrix entries",
            });
        }
        let residual = frobenius_norm(&(&mat - &dagger(&mat)));
        let tol = herm_tol * frobenius_norm(&mat).max(1.0);
        if residual > tol {
            return Err(Error::NotHermitian { residual, tol });
        }
        Ok(Self { mat })
    }

    /// Internal constructor for matrices Hermitian by construction.
    pub(crate) fn from_array_unchecked(mat: Array2<C64>) -> Self {
        Self { mat }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn as_array(&self) -> &Array2<C64> {
        &self.mat
    }

    pub fn into_array(self) -> Array2<C64> {
        self.mat
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                context: "Hermitian matrix sum",
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(Self::from_array_unchecked(&self.mat + &other.mat))
    }

    /// A + c·1 for real c.
    pub fn shifted(&self, c: f64) -> Self {
        let shift = C64::new(c, 0.0);
        let mut mat = self.mat.clone();
        for i in 0..mat.nrows() {
            mat[[i, i]] += shift;
        }
        Self { mat }
    }

    pub fn scaled(&self, r: f64) -> Self {
        Self {
            mat: self.mat.mapv(|z| z * r),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.mat[[i, i]]).sum()
    }

    /// The traceless part A − (tr A / N)·1.
    pub fn traceless_part(&self) -> Self {
        let mean = self.trace().re / self.dim() as f64;
        self.shifted(-mean)
    }

    pub fn eig(&self) -> Result<EigenDecomposition> {
        eig_hermitian(self)
    }

    pub fn propagator(&self, t: f64) -> Result<UnitaryMatrix> {
        self.eig()?.propagator(t)
    }
}

/// A validated unitary matrix: ‖U†U − 1‖_F within tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix {
    mat: Array2<C64>,
}

impl UnitaryMatrix {
    pub fn new(mat: Array2<C64>) -> Result<Self> {
        Self::new_with_tol(mat, UNIT_TOL)
    }

    /// Products of M propagators accumulate up to M·[`UNIT_TOL`] deviation;
    /// composition sites pass the widened tolerance explicitly.
    pub fn new_with_tol(mat: Array2<C64>, unit_tol: f64) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::NotSquare {
                rows: mat.nrows(),
                cols: mat.ncols(),
            });
        }
        if !all_finite(&mat) {
            return Err(Error::NonFinite {
                context: "unitary matrix entries",
            });
        }
        let n = mat.nrows();
        let residual = frobenius_norm(&(dagger(&mat).dot(&mat) - identity(n)));
        if residual > unit_tol {
            return Err(Error::NotUnitary {
                residual,
                tol: unit_tol,
            });
        }
        Ok(Self { mat })
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn as_array(&self) -> &Array2<C64> {
        &self.mat
    }

    pub fn into_array(self) -> Array2<C64> {
        self.mat
    }

    pub fn apply(&self, amps: &[C64]) -> Vec<C64> {
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).map(|j| self.mat[[i, j]] * amps[j]).sum())
            .collect()
    }
}

/// Spectral decomposition H = V Λ V† with real ascending eigenvalues and
/// orthonormal, deterministically phase-fixed eigenvector columns.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    values: Vec<f64>,
    vectors: Array2<C64>,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn vectors(&self) -> &Array2<C64> {
        &self.vectors
    }

    pub fn eigenvector(&self, k: usize) -> Vec<C64> {
        self.vectors.column(k).to_vec()
    }

    pub fn reconstruct(&self) -> Array2<C64> {
        let mut scaled = self.vectors.clone();
        for (k, &lam) in self.values.iter().enumerate() {
            scaled
                .column_mut(k)
                .mapv_inplace(|z| z * C64::new(lam, 0.0));
        }
        scaled.dot(&dagger(&self.vectors))
    }

    /// exp(−iHt) as a dense matrix.
    pub fn propagator_matrix(&self, t: f64) -> Result<Array2<C64>> {
        if !t.is_finite() {
            return Err(Error::NonFinite {
                context: "propagator time",
            });
        }
        let mut scaled = self.vectors.clone();
        for (k, &lam) in self.values.iter().enumerate() {
            let phase = C64::from_polar(1.0, -lam * t);
            scaled.column_mut(k).mapv_inplace(|z| z * phase);
        }
        Ok(scaled.dot(&dagger(&self.vectors)))
    }

    /// exp(−iHt), validated unitary.
    pub fn propagator(&self, t: f64) -> Result<UnitaryMatrix> {
        UnitaryMatrix::new(self.propagator_matrix(t)?)
    }

    /// exp(−iHt)·ψ without forming the matrix.
    pub fn apply_propagator(&self, t: f64, amps: &[C64]) -> Vec<C64> {
        let n = self.dim();
        debug_assert_eq!(amps.len(), n);
        let coeffs: Vec<C64> = (0..n)
            .map(|k| {
                let projected: C64 =
                    (0..n).map(|i| self.vectors[[i, k]].conj() * amps[i]).sum();
                projected * C64::from_polar(1.0, -self.values[k] * t)
            })
            .collect();
        (0..n)
            .map(|i| (0..n).map(|k| self.vectors[[i, k]] * coeffs[k]).sum())
            .collect()
    }
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi
/// rotations.
///
/// Eigenvalues come back ascending. Within numerically degenerate clusters
/// (gap < [`DEGENERACY_GAP`] · max(1, ‖H‖_F)) eigenpairs are ordered by the
/// index of each vector's largest-magnitude component, and every vector is
/// phase-fixed so that component is real positive, making accessor indices
/// reproducible across runs.
pub fn eig_hermitian(h: &HermitianMatrix) -> Result<EigenDecomposition> {
    let a = h.as_array();
    let n = a.nrows();
    let scale = frobenius_norm(a);
    // Work on the Hermitian part; inputs were validated within tolerance,
    // mirroring the one-triangle reads of conventional eigensolvers.
    let mut m = (a + &dagger(a)).mapv(|z| 0.5 * z);
    let mut v: Array2<C64> = Array2::eye(n);

    let tol = (n as f64) * f64::EPSILON * scale.max(1.0);
    let mut sweeps = 0;
    loop {
        let off = offdiagonal_norm(&m);
        if off <= tol {
            break;
        }
        if sweeps >= MAX_JACOBI_SWEEPS {
            return Err(Error::NoConvergence { sweeps, off });
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate_pair(&mut m, &mut v, p, q);
            }
        }
        sweeps += 1;
    }

    let values: Vec<f64> = (0..n).map(|i| m[[i, i]].re).collect();
    let (values, vectors) = sort_and_fix(values, v, scale);
    Ok(EigenDecomposition { values, vectors })
}

/// exp(−iHt) for a Hermitian generator.
pub fn propagator(h: &HermitianMatrix, t: f64) -> Result<UnitaryMatrix> {
    h.propagator(t)
}

fn offdiagonal_norm(m: &Array2<C64>) -> f64 {
    let n = m.nrows();
    let mut acc = 0.0;
    for p in 0..n {
        for q in 0..n {
            if p != q {
                acc += m[[p, q]].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// One complex Jacobi rotation zeroing the (p, q) entry: M ← U†MU, V ← VU.
fn rotate_pair(m: &mut Array2<C64>, v: &mut Array2<C64>, p: usize, q: usize) {
    let apq = m[[p, q]];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let app = m[[p, p]].re;
    let aqq = m[[q, q]].re;
    let phase = apq / mag;
    let theta = (app - aqq) / (2.0 * mag);
    let t = if theta >= 0.0 {
        1.0 / (theta + (theta * theta + 1.0).sqrt())
    } else {
        -1.0 / (-theta + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let n = m.nrows();

    // rows p, q: left-multiply by U†
    for k in 0..n {
        let apk = m[[p, k]];
        let aqk = m[[q, k]];
        m[[p, k]] = c * apk + s * phase * aqk;
        m[[q, k]] = -s * apk + c * phase * aqk;
    }
    // columns p, q: right-multiply by U
    for k in 0..n {
        let akp = m[[k, p]];
        let akq = m[[k, q]];
        m[[k, p]] = c * akp + s * phase.conj() * akq;
        m[[k, q]] = -s * akp + c * phase.conj() * akq;
    }
    // pin the rotated pair against roundoff
    m[[p, q]] = C64::new(0.0, 0.0);
    m[[q, p]] = C64::new(0.0, 0.0);
    m[[p, p]] = C64::new(m[[p, p]].re, 0.0);
    m[[q, q]] = C64::new(m[[q, q]].re, 0.0);

    for k in 0..n {
        let vkp = v[[k, p]];
        let vkq = v[[k, q]];
        v[[k, p]] = c * vkp + s * phase.conj() * vkq;
        v[[k, q]] = -s * vkp + c * phase.conj() * vkq;
    }
}

fn sort_and_fix(values: Vec<f64>, vectors: Array2<C64>, scale: f64) -> (Vec<f64>, Array2<C64>) {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));

    // keep eigenpairs bound while re-ordering inside degenerate clusters
    let mut pairs: Vec<(f64, Vec<C64>)> = order
        .iter()
        .map(|&i| (values[i], vectors.column(i).to_vec()))
        .collect();

    let gap = DEGENERACY_GAP * scale.max(1.0);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && pairs[end].0 - pairs[end - 1].0 < gap {
            end += 1;
        }
        if end - start > 1 {
            pairs[start..end].sort_by_key(|(_, col)| anchor_index(col));
        }
        for (_, col) in pairs[start..end].iter_mut() {
            fix_global_phase(col);
        }
        start = end;
    }

    let sorted_values: Vec<f64> = pairs.iter().map(|(lam, _)| *lam).collect();
    let mut sorted_vectors = Array2::zeros((n, n));
    for (j, (_, col)) in pairs.iter().enumerate() {
        for i in 0..n {
            sorted_vectors[[i, j]] = col[i];
        }
    }
    (sorted_values, sorted_vectors)
}
