//! Pure-state embedding |Ψ⟩ = Σ √p(x,y,z) |x y z⟩ and two-qubit
//! entanglement measures of the reduced state on AB.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use crate::classes::ClassifyOptions;
use crate::dist::JointTable;
use crate::error::{Error, Result};
use crate::secrecy::reversibility::{decide_reversibility, Status};
use crate::view::{Roles, Tripartite};

const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-9;
const PSD_FLOOR: f64 = -1e-9;
/// Eigenvalues of ρ at or below this are treated as exact zeros.
const RANK_FLOOR: f64 = 1e-14;

/// Amplitudes √p(x,y,z) indexed `(x*ny + y)*nz + z`, plus `[nx, ny, nz]`.
pub fn embed(table: &JointTable, roles: &Roles) -> Result<(Vec<f64>, [usize; 3])> {
    roles.check_disjoint()?;
    table.ensure_valid()?;
    let v = Tripartite::from_table(table, roles)?;
    let total: f64 = v.p.iter().sum();
    Ok((v.p.iter().map(|m| (m / total).sqrt()).collect(), [v.nx, v.ny, v.nz]))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub dim: usize,
    pub entries: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::ShapeMismatch("density matrix must be square".into()));
        }
        let rho = Self { dim: entries.nrows(), entries };
        rho.check()?;
        Ok(rho)
    }

    /// Hermiticity, unit trace and positivity within tolerance.
    pub fn check(&self) -> Result<()> {
        let m = &self.entries;
        if (m - m.adjoint()).iter().any(|e| e.norm() > HERMITIAN_TOL) {
            return Err(Error::Precondition("density matrix is not Hermitian".into()));
        }
        if (m.trace().re - 1.0).abs() > TRACE_TOL {
            return Err(Error::Precondition(format!("density matrix has trace {}", m.trace().re)));
        }
        let lo = SymmetricEigen::new(m.clone()).eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        if lo < PSD_FLOOR {
            return Err(Error::Precondition(format!("density matrix has eigenvalue {lo:e}")));
        }
        Ok(())
    }

    /// tr ρ².
    pub fn purity(&self) -> f64 {
        (&self.entries * &self.entries).trace().re
    }
}

/// ρ_AB = tr_E |Ψ⟩⟨Ψ| for a state on dims `[a, b, e]`.
pub fn reduce_ab(psi: &[f64], dims: [usize; 3]) -> Result<DensityMatrix> {
    let [a, b, e] = dims;
    if a * b * e != psi.len() {
        return Err(Error::ShapeMismatch(format!("state of length {} does not factor as {a}×{b}×{e}", psi.len())));
    }
    let d = a * b;
    let rho = DMatrix::from_fn(d, d, |i, j| Complex64::new((0..e).map(|z| psi[i * e + z] * psi[j * e + z]).sum(), 0.0));
    DensityMatrix::new(rho)
}

/// W with ρ = W W†, dropping eigenvalues at the noise floor so that a
/// rank-deficient ρ yields an exactly rank-deficient W.
fn factor(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let eig = SymmetricEigen::new(m.clone());
    let keep: Vec<usize> = (0..eig.eigenvalues.len()).filter(|&i| eig.eigenvalues[i] > RANK_FLOOR).collect();
    DMatrix::from_fn(m.nrows(), keep.len().max(1), |r, c| match keep.get(c) {
        Some(&i) => eig.eigenvectors[(r, i)] * eig.eigenvalues[i].sqrt(),
        None => Complex64::new(0.0, 0.0),
    })
}

/// Wootters concurrence. The square roots of the eigenvalues of √ρ ρ̃ √ρ
/// are obtained as the singular values of Wᵀ (σ_y⊗σ_y) W with ρ = W W†,
/// which avoids taking square roots of eigenvalue round-off.
pub fn concurrence_2q(rho: &DensityMatrix) -> Result<f64> {
    if rho.dim != 4 {
        return Err(Error::ShapeMismatch(format!("concurrence needs a 4×4 state, got {}×{}", rho.dim, rho.dim)));
    }
    rho.check()?;
    let (o, i) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 1.0));
    let sy = DMatrix::from_row_slice(2, 2, &[o, -i, i, o]);
    let yy = sy.kronecker(&sy);
    let w = factor(&rho.entries);
    let b = w.transpose() * yy * &w;
    let mut s: Vec<f64> = b.singular_values().iter().copied().collect();
    s.resize(4, 0.0);
    s.sort_by(|a, b| b.total_cmp(a));
    Ok((s[0] - s[1] - s[2] - s[3]).max(0.0))
}

/// Binary entropy in bits.
pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

/// h((1 − √(1 − c²)) / 2).
pub fn eof_from_concurrence(c: f64) -> f64 {
    let c = c.clamp(0.0, 1.0);
    binary_entropy((1.0 - (1.0 - c * c).max(0.0).sqrt()) / 2.0)
}

pub fn eof_2q(rho: &DensityMatrix) -> Result<f64> {
    Ok(eof_from_concurrence(concurrence_2q(rho)?))
}

/// 2 Σ_z p(z) √(p(x=0|z) p(x=1|z)) for p(x,y|z) = δ_xy p(x|z).
pub fn closed_form_concurrence(pz: &[f64], p0: &[f64]) -> f64 {
    2.0 * pz.iter().zip(p0).map(|(w, q)| w * (q * (1.0 - q)).max(0.0).sqrt()).sum::<f64>()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaxcorrReport {
    /// Σ_z p(z) 𝖤(2√(p0 p1)).
    pub key_closed_form: f64,
    /// 𝖤(2 Σ_z p(z) √(p0 p1)).
    pub eof_closed_form: f64,
    pub gap: f64,
    pub concurrence_closed_form: f64,
    pub concurrence_eigen: f64,
    /// H(X|Z=z) is the same for every supported z.
    pub constant_conditional_entropy: bool,
    /// The embedded ρ_AB is pure.
    pub pure: bool,
    /// Y was relabeled to reach the diagonal form.
    pub y_swapped: bool,
}

/// Per-z weights and p(x=0|z) when p(x,y|z) = δ_{x,π(y)} p(x|z).
fn diagonal_form(v: &Tripartite) -> Option<(Vec<f64>, Vec<f64>, bool)> {
    for swapped in [false, true] {
        let pi = |y: usize| if swapped { 1 - y } else { y };
        let off = (0..2).any(|x| (0..2).any(|y| x != pi(y) && (0..v.nz).any(|z| v.at(x, y, z) > 0.0)));
        if off {
            continue;
        }
        let pz = v.pz();
        let total: f64 = pz.iter().sum();
        let sup = v.z_support();
        let w = sup.iter().map(|&z| pz[z] / total).collect();
        let p0 = sup.iter().map(|&z| v.at(0, pi(0), z) / pz[z]).collect();
        return Some((w, p0, swapped));
    }
    None
}

pub fn maxcorr_report(table: &JointTable, roles: &Roles, opts: &ClassifyOptions) -> Result<MaxcorrReport> {
    let v = Tripartite::from_table(table, roles)?;
    if v.nx != 2 || v.ny != 2 {
        return Err(Error::Precondition("the report needs binary X and Y".into()));
    }
    let (w, p0, y_swapped) = diagonal_form(&v)
        .ok_or_else(|| Error::Precondition("p(x,y|z) is not diagonal under either labeling of Y".into()))?;
    let verdict = decide_reversibility(table, roles, opts)?;
    if verdict.status != Status::Reversible {
        return Err(Error::Precondition("the table is not known to be reversible".into()));
    }
    if verdict.key_value.unwrap_or(0.0) <= opts.tol {
        return Err(Error::Precondition("the report excludes tables with zero key".into()));
    }
    let key = w.iter().zip(&p0).map(|(wz, q)| wz * eof_from_concurrence(2.0 * (q * (1.0 - q)).sqrt())).sum::<f64>();
    let c = closed_form_concurrence(&w, &p0);
    let eof = eof_from_concurrence(c);
    let (psi, dims) = embed(table, roles)?;
    let rho = reduce_ab(&psi, dims)?;
    let h: Vec<f64> = p0.iter().map(|&q| binary_entropy(q)).collect();
    let constant = h.iter().all(|x| (x - h[0]).abs() <= 1e-9);
    Ok(MaxcorrReport {
        key_closed_form: key,
        eof_closed_form: eof,
        gap: key - eof,
        concurrence_closed_form: c,
        concurrence_eigen: concurrence_2q(&rho)?,
        constant_conditional_entropy: constant,
        pure: (rho.purity() - 1.0).abs() <= 1e-9,
        y_swapped,
    })
}
