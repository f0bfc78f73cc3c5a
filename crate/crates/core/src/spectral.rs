//! Commuting tuples and their joint spectral decomposition.
//!
//! The decomposition realizes the product spectral measure of a commuting
//! Hermitian family in finite dimensions: one unitary basis `U` and a
//! `dim x n` table of joint eigenvalues, one row per basis vector (repeated
//! rows encode multiplicity).
//!
//! Algorithm: diagonalize a random generic linear combination of the members,
//! split eigenvalue clusters recursively, retry with fresh coefficients on
//! residual failure, and fall back to cyclic Jacobi sweeps for stubborn
//! near-degenerate inputs.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{
    commutator_norm, pair_scale, HermitianMatrix, Interval, MatrixJson, SPECTRUM_SLACK,
};

/// Default tolerance for the pairwise commutator test.
pub const ABELIAN_TOL: f64 = 1e-10;

/// Relative eigenvalue-gap threshold below which eigenvalues of the probe
/// combination are treated as one cluster.
const CLUSTER_GAP: f64 = 1e-8;

/// Relative residual accepted for the reconstruction `x_i = U diag(L_i) U*`.
pub const RECONSTRUCTION_TOL: f64 = 1e-9;

const MAX_ATTEMPTS: usize = 5;
const MAX_JACOBI_SWEEPS: usize = 60;

/// Eigendecomposition of a single Hermitian matrix with eigenvalues sorted
/// ascending and the basis columns permuted to match.
///
/// The QR eigensolver occasionally leaves substantial off-diagonal mass on
/// complex Hermitian input, so the result is verified against the rotated
/// matrix and polished by Jacobi sweeps whenever the residual is above
/// machine level.
pub fn eigh(x: &HermitianMatrix) -> (Vec<f64>, DMatrix<Complex64>) {
    let dim = x.dim();
    if dim == 0 {
        return (Vec::new(), DMatrix::zeros(0, 0));
    }
    let se = nalgebra::SymmetricEigen::new(x.as_matrix().clone());
    let mut basis = se.eigenvectors;
    let mut rotated = basis.adjoint() * x.as_matrix() * &basis;
    let mut off = 0.0f64;
    for i in 0..dim {
        for j in 0..dim {
            if i != j {
                off += rotated[(i, j)].norm_sqr();
            }
        }
    }
    if off.sqrt() > 1e-13 * (1.0 + x.frobenius()) {
        basis = jacobi_sweeps(std::slice::from_ref(x), basis);
        rotated = basis.adjoint() * x.as_matrix() * &basis;
    }
    let raw: Vec<f64> = (0..dim).map(|i| rotated[(i, i)].re).collect();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| raw[a].partial_cmp(&raw[b]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| raw[i]).collect();
    let mut sorted = DMatrix::<Complex64>::zeros(dim, dim);
    for (dst, &src) in order.iter().enumerate() {
        sorted.set_column(dst, &basis.column(src));
    }
    (values, sorted)
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn eigenvalues(x: &HermitianMatrix) -> Vec<f64> {
    eigh(x).0
}

/// True iff all pairwise commutators vanish within `tol * (1 + |x_i| |x_j|)`;
/// also reports the worst absolute commutator norm seen. The empty and the
/// singleton family are vacuously abelian.
pub fn is_abelian(members: &[HermitianMatrix], tol: f64) -> Result<(bool, f64)> {
    let mut worst = 0.0f64;
    let mut ok = true;
    for i in 0..members.len() {
        for j in (i + 1)..members.len() {
            let norm = commutator_norm(&members[i], &members[j])?;
            worst = worst.max(norm);
            if norm > tol * pair_scale(&members[i], &members[j]) {
                ok = false;
            }
        }
    }
    Ok((ok, worst))
}

/// An abelian tuple: `n` pairwise-commuting Hermitian matrices of equal
/// dimension together with the cube that bounds their spectra.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AbelianTuple {
    members: Vec<HermitianMatrix>,
    cube: Vec<Interval>,
}

impl AbelianTuple {
    /// Validates commutation (tolerance [`ABELIAN_TOL`]) and that every
    /// eigenvalue lies within [`SPECTRUM_SLACK`] of its interval.
    pub fn new(members: Vec<HermitianMatrix>, cube: Vec<Interval>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidArgument("empty tuple".into()));
        }
        if members.len() != cube.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} members but {} intervals",
                members.len(),
                cube.len()
            )));
        }
        let dim = members[0].dim();
        for m in &members {
            if m.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: m.dim(),
                });
            }
        }
        let (ok, worst) = is_abelian(&members, ABELIAN_TOL)?;
        if !ok {
            return Err(Error::NotAbelian {
                worst,
                tol: ABELIAN_TOL,
            });
        }
        for (m, iv) in members.iter().zip(cube.iter()) {
            for v in eigenvalues(m) {
                iv.clip(v, SPECTRUM_SLACK)?;
            }
        }
        Ok(AbelianTuple { members, cube })
    }

    /// Tuple with the cube taken to be the componentwise hull of the actual
    /// spectra (padded by the spectrum slack so membership never fails).
    pub fn with_spectral_cube(members: Vec<HermitianMatrix>) -> Result<Self> {
        let cube = members
            .iter()
            .map(|m| {
                let vals = eigenvalues(m);
                let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                Interval::new(lo, hi)
            })
            .collect();
        Self::new(members, cube)
    }

    pub fn n(&self) -> usize {
        self.members.len()
    }

    pub fn dim(&self) -> usize {
        self.members[0].dim()
    }

    pub fn members(&self) -> &[HermitianMatrix] {
        &self.members
    }

    pub fn member(&self, i: usize) -> &HermitianMatrix {
        &self.members[i]
    }

    pub fn cube(&self) -> &[Interval] {
        &self.cube
    }

    /// Componentwise convex combination `w x + (1 - w) y`.
    pub fn blend(&self, other: &AbelianTuple, w: f64) -> Result<Vec<HermitianMatrix>> {
        if self.n() != other.n() || self.dim() != other.dim() {
            return Err(Error::ShapeMismatch("tuple shapes differ".into()));
        }
        self.members
            .iter()
            .zip(other.members.iter())
            .map(|(x, y)| x.scale(w).add(&y.scale(1.0 - w)))
            .collect()
    }
}

/// Joint spectral decomposition: unitary `basis` and the `dim x n` eigenvalue
/// `table`; row `j` holds the joint eigenvalue attached to basis vector `j`.
#[derive(Debug, Clone)]
pub struct JointSpectralDecomposition {
    pub basis: DMatrix<Complex64>,
    pub table: Vec<Vec<f64>>,
}

impl JointSpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn n(&self) -> usize {
        self.table.first().map_or(0, |r| r.len())
    }

    pub fn unitarity_residual(&self) -> f64 {
        let dim = self.dim();
        (self.basis.adjoint() * &self.basis - DMatrix::<Complex64>::identity(dim, dim)).norm()
    }

    /// Rebuild member `i` as `U diag(table[., i]) U*`.
    pub fn reconstruct(&self, i: usize) -> HermitianMatrix {
        let diag = DVector::from_iterator(
            self.dim(),
            self.table.iter().map(|row| Complex64::new(row[i], 0.0)),
        );
        HermitianMatrix::from_hermitian_parts(
            &self.basis * DMatrix::from_diagonal(&diag) * self.basis.adjoint(),
        )
    }

    pub fn reconstruction_residual(&self, members: &[HermitianMatrix]) -> f64 {
        members
            .iter()
            .enumerate()
            .map(|(i, m)| {
                self.reconstruct(i)
                    .sub(m)
                    .map(|d| d.frobenius() / (1.0 + m.frobenius()))
                    .unwrap_or(f64::INFINITY)
            })
            .fold(0.0, f64::max)
    }

    /// Apply `f` rowwise to the table and assemble `U diag(f(rows)) U*`.
    pub fn assemble(&self, values: &[f64]) -> HermitianMatrix {
        let diag =
            DVector::from_iterator(self.dim(), values.iter().map(|&v| Complex64::new(v, 0.0)));
        HermitianMatrix::from_hermitian_parts(
            &self.basis * DMatrix::from_diagonal(&diag) * self.basis.adjoint(),
        )
    }

    pub fn to_json(&self) -> DecompositionJson {
        DecompositionJson {
            basis: MatrixJson::from_complex(&self.basis),
            table: self.table.clone(),
        }
    }
}

/// Serialized decomposition: the basis in the matrix exchange format plus the
/// eigenvalue table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecompositionJson {
    pub basis: MatrixJson,
    pub table: Vec<Vec<f64>>,
}

impl DecompositionJson {
    pub fn to_decomposition(&self) -> Result<JointSpectralDecomposition> {
        Ok(JointSpectralDecomposition {
            basis: self.basis.to_complex()?,
            table: self.table.clone(),
        })
    }
}

/// Jointly diagonalize an abelian tuple.
///
/// Fails only when neither the generic random-combination path (5 attempts)
/// nor the Jacobi fallback brings the reconstruction residual under
/// [`RECONSTRUCTION_TOL`]; that signals an input whose members do not
/// actually commute to working precision.
pub fn joint_diagonalize(tuple: &AbelianTuple) -> Result<JointSpectralDecomposition> {
    joint_diagonalize_members(tuple.members())
}

pub(crate) fn joint_diagonalize_members(
    members: &[HermitianMatrix],
) -> Result<JointSpectralDecomposition> {
    let dim = members[0].dim();

    // Single member: plain eigendecomposition, no probe combination. This
    // keeps the one-variable calculus bit-identical to the univariate path.
    if members.len() == 1 {
        let (vals, basis) = eigh(&members[0]);
        return Ok(JointSpectralDecomposition {
            basis,
            table: vals.into_iter().map(|v| vec![v]).collect(),
        });
    }

    let mut best: Option<(f64, DMatrix<Complex64>)> = None;
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(0x4a44_0000 + attempt as u64);
        let basis = random_combination_basis(members, &mut rng, 0);
        let decomp = table_from_basis(members, basis);
        let residual = decomp.reconstruction_residual(members);
        if residual <= RECONSTRUCTION_TOL && decomp.unitarity_residual() <= 1e-10 {
            return Ok(decomp);
        }
        if best.as_ref().map_or(true, |(r, _)| residual < *r) {
            best = Some((residual, decomp.basis));
        }
    }

    // Jacobi fallback, warm-started from the best basis found so far.
    let start = best
        .map(|(_, b)| b)
        .unwrap_or_else(|| DMatrix::identity(dim, dim));
    let basis = jacobi_sweeps(members, start);
    let decomp = table_from_basis(members, basis);
    let residual = decomp.reconstruction_residual(members);
    if residual <= RECONSTRUCTION_TOL && decomp.unitarity_residual() <= 1e-10 {
        Ok(decomp)
    } else {
        Err(Error::JointDiagonalizationFailed { residual })
    }
}

/// Recursive generic path: eigendecompose a random combination, then refine
/// clusters by recursing on the restricted tuple with fresh coefficients.
fn random_combination_basis(
    members: &[HermitianMatrix],
    rng: &mut ChaCha8Rng,
    depth: usize,
) -> DMatrix<Complex64> {
    let dim = members[0].dim();
    if dim <= 1 {
        return DMatrix::identity(dim, dim);
    }
    if depth > 12 || all_near_scalar(members) {
        return DMatrix::identity(dim, dim);
    }

    let coeffs: Vec<f64> = (0..members.len())
        .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
        .collect();
    let mut probe = DMatrix::<Complex64>::zeros(dim, dim);
    for (c, m) in coeffs.iter().zip(members) {
        probe += m.as_matrix().scale(*c);
    }
    let probe = HermitianMatrix::from_hermitian_parts(probe);
    let scale = 1.0 + probe.frobenius();
    let (vals, mut basis) = eigh(&probe);

    // group adjacent eigenvalues whose gap is below the cluster threshold
    let mut start = 0;
    while start < dim {
        let mut end = start + 1;
        while end < dim && vals[end] - vals[end - 1] < CLUSTER_GAP * scale {
            end += 1;
        }
        let size = end - start;
        if size > 1 {
            let sub = basis.columns(start, size).into_owned();
            let restricted: Vec<HermitianMatrix> = members
                .iter()
                .map(|m| {
                    HermitianMatrix::from_hermitian_parts(sub.adjoint() * m.as_matrix() * &sub)
                })
                .collect();
            let w = random_combination_basis(&restricted, rng, depth + 1);
            let refined = &sub * w;
            for (offset, col) in (start..end).enumerate() {
                basis.set_column(col, &refined.column(offset));
            }
        }
        start = end;
    }
    basis
}

fn all_near_scalar(members: &[HermitianMatrix]) -> bool {
    let dim = members[0].dim();
    members.iter().all(|m| {
        let mean = m.trace() / dim as f64;
        let centered = m.shift(-mean);
        centered.frobenius() <= 1e-12 * (1.0 + m.frobenius())
    })
}

fn table_from_basis(
    members: &[HermitianMatrix],
    basis: DMatrix<Complex64>,
) -> JointSpectralDecomposition {
    let dim = members[0].dim();
    let mut table = vec![vec![0.0; members.len()]; dim];
    for (i, m) in members.iter().enumerate() {
        let rotated = basis.adjoint() * m.as_matrix() * &basis;
        for (j, row) in table.iter_mut().enumerate() {
            row[i] = rotated[(j, j)].re;
        }
    }
    JointSpectralDecomposition { basis, table }
}

/// Cyclic Jacobi sweeps minimizing the total off-diagonal mass of a Hermitian
/// family simultaneously (Cardoso-Souloumiac rotations).
fn jacobi_sweeps(members: &[HermitianMatrix], start: DMatrix<Complex64>) -> DMatrix<Complex64> {
    let dim = members[0].dim();
    let mut basis = start;
    let mut rotated: Vec<DMatrix<Complex64>> = members
        .iter()
        .map(|m| basis.adjoint() * m.as_matrix() * &basis)
        .collect();
    let scale: f64 = 1.0 + members.iter().map(|m| m.frobenius()).fold(0.0, f64::max);

    for _ in 0..MAX_JACOBI_SWEEPS {
        let mut changed = false;
        for p in 0..dim {
            for q in (p + 1)..dim {
                // For Hermitian A the Cardoso-Souloumiac 3-vector
                // [a_pp - a_qq, 2 Re a_pq, 2 Im a_pq] is real; the optimal
                // rotation comes from the top eigenvector of G = sum g g^T.
                let mut g = [[0.0f64; 3]; 3];
                for a in &rotated {
                    let h = [
                        a[(p, p)].re - a[(q, q)].re,
                        2.0 * a[(p, q)].re,
                        2.0 * a[(p, q)].im,
                    ];
                    for r in 0..3 {
                        for c in 0..3 {
                            g[r][c] += h[r] * h[c];
                        }
                    }
                }
                let (x, y, z) = top_eigenvector_3x3(&g);
                let r = (x * x + y * y + z * z).sqrt();
                if r < 1e-300 {
                    continue;
                }
                let (x, y, z) = if x < 0.0 { (-x, -y, -z) } else { (x, y, z) };
                let c = ((x + r) / (2.0 * r)).sqrt();
                let s = Complex64::new(y, -z) / (2.0 * r * (x + r)).sqrt();
                if s.norm() < 1e-16 * scale.max(1.0) {
                    continue;
                }
                changed = true;
                apply_rotation(&mut rotated, &mut basis, p, q, c, s);
            }
        }
        if !changed {
            break;
        }
    }
    basis
}

/// Apply the plane rotation R = [[c, conj(s)], [-s, c]] on coordinates (p, q)
/// as A <- R A R* to every rotated member, accumulating the basis as
/// U <- U R*, so that U* A_original U stays equal to the rotated copies.
fn apply_rotation(
    rotated: &mut [DMatrix<Complex64>],
    basis: &mut DMatrix<Complex64>,
    p: usize,
    q: usize,
    c: f64,
    s: Complex64,
) {
    let sc = s.conj();
    for a in rotated.iter_mut() {
        let n = a.nrows();
        // rows: [row_p, row_q] <- [c row_p + sc row_q, -s row_p + c row_q]
        for col in 0..n {
            let ap = a[(p, col)];
            let aq = a[(q, col)];
            a[(p, col)] = ap * c + aq * sc;
            a[(q, col)] = -(ap * s) + aq * c;
        }
        // columns (right-multiply by R*): [col_p, col_q] <- [c col_p + s col_q, -sc col_p + c col_q]
        for r in 0..n {
            let ap = a[(r, p)];
            let aq = a[(r, q)];
            a[(r, p)] = ap * c + aq * s;
            a[(r, q)] = -(ap * sc) + aq * c;
        }
    }
    let n = basis.nrows();
    for r in 0..n {
        let up = basis[(r, p)];
        let uq = basis[(r, q)];
        basis[(r, p)] = up * c + uq * s;
        basis[(r, q)] = -(up * sc) + uq * c;
    }
}

/// Dominant eigenvector of a symmetric 3x3 matrix by power iteration with a
/// positive-definite shift (G is PSD by construction).
fn top_eigenvector_3x3(g: &[[f64; 3]; 3]) -> (f64, f64, f64) {
    let mut v = [1.0f64, 0.577, 0.301];
    for _ in 0..60 {
        let w = [
            g[0][0] * v[0] + g[0][1] * v[1] + g[0][2] * v[2],
            g[1][0] * v[0] + g[1][1] * v[1] + g[1][2] * v[2],
            g[2][0] * v[0] + g[2][1] * v[1] + g[2][2] * v[2],
        ];
        let n = (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt();
        if n < 1e-300 {
            return (0.0, 0.0, 0.0);
        }
        v = [w[0] / n, w[1] / n, w[2] / n];
    }
    (v[0], v[1], v[2])
}

/// Compatibility of two abelian tuples: `[x_i, y_j] = [x_j, y_i]` for all
/// pairs, within `tol * (1 + |x_i||y_j| + |x_j||y_i|)`. When it holds, every
/// convex combination of the tuples is again abelian.
pub fn compatible(x: &AbelianTuple, y: &AbelianTuple, tol: f64) -> Result<bool> {
    Ok(compatibility_residual(x, y, tol)?.0)
}

/// Worst normalized residual of the compatibility condition.
pub fn compatibility_residual(x: &AbelianTuple, y: &AbelianTuple, tol: f64) -> Result<(bool, f64)> {
    if x.n() != y.n() || x.dim() != y.dim() {
        return Err(Error::ShapeMismatch(format!(
            "tuples of shape (n={}, dim={}) vs (n={}, dim={})",
            x.n(),
            x.dim(),
            y.n(),
            y.dim()
        )));
    }
    let mut ok = true;
    let mut worst = 0.0f64;
    for i in 0..x.n() {
        for j in 0..x.n() {
            let lhs = crate::matrix::commutator(x.member(i), y.member(j))?;
            let rhs = crate::matrix::commutator(x.member(j), y.member(i))?;
            let scale = 1.0
                + x.member(i).frobenius() * y.member(j).frobenius()
                + x.member(j).frobenius() * y.member(i).frobenius();
            let resid = (lhs - rhs).norm() / scale;
            worst = worst.max(resid);
            if resid > tol {
                ok = false;
            }
        }
    }
    Ok((ok, worst))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::testutil::{pauli_x, pauli_z};

    fn random_hermitian_raw(seed: u64, dim: usize) -> HermitianMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = DMatrix::from_fn(dim, dim, |_, _| {
            Complex64::new(
                rng.sample::<f64, _>(rand_distr::StandardNormal),
                rng.sample::<f64, _>(rand_distr::StandardNormal),
            )
        });
        HermitianMatrix::new(data).unwrap()
    }

    #[test]
    fn is_abelian_examples() {
        let (ok, _) = is_abelian(&[pauli_x(), pauli_z()], ABELIAN_TOL).unwrap();
        assert!(!ok);
        let (ok, worst) = is_abelian(&[pauli_x()], ABELIAN_TOL).unwrap();
        assert!(ok);
        assert_eq!(worst, 0.0);
        let (ok, _) = is_abelian(&[], ABELIAN_TOL).unwrap();
        assert!(ok, "empty family is vacuously abelian");
    }

    #[test]
    fn joint_diagonalize_diagonal_tuple() {
        let t = AbelianTuple::new(
            vec![
                HermitianMatrix::diagonal(&[1.0, 2.0, 3.0]),
                HermitianMatrix::diagonal(&[-1.0, 0.5, 0.25]),
            ],
            vec![Interval::new(1.0, 3.0), Interval::new(-1.0, 0.5)],
        )
        .unwrap();
        let d = joint_diagonalize(&t).unwrap();
        assert!(d.reconstruction_residual(t.members()) <= RECONSTRUCTION_TOL);
        assert!(d.unitarity_residual() <= 1e-10);
        // rows are the paired diagonals, up to permutation
        let mut rows = d.table.clone();
        rows.sort_by(|a, b| a[0].partial_cmp(&b[0]).unwrap());
        let expect = [[1.0, -1.0], [2.0, 0.5], [3.0, 0.25]];
        for (row, want) in rows.iter().zip(expect.iter()) {
            assert!((row[0] - want[0]).abs() < 1e-12 && (row[1] - want[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn joint_diagonalize_functional_relation() {
        let x = random_hermitian_raw(7, 6);
        let x3 =
            HermitianMatrix::from_hermitian_parts(x.as_matrix() * x.as_matrix() * x.as_matrix());
        let t = AbelianTuple::with_spectral_cube(vec![x.clone(), x3]).unwrap();
        let d = joint_diagonalize(&t).unwrap();
        for row in &d.table {
            assert!(
                (row[1] - row[0].powi(3)).abs() <= 1e-8 * (1.0 + row[0].abs().powi(3)),
                "row {:?}",
                row
            );
        }
    }

    #[test]
    fn joint_diagonalize_degenerate_cluster() {
        // x1 has a double eigenvalue; x2 splits the cluster.
        let x1 = HermitianMatrix::diagonal(&[1.0, 1.0, 2.0]);
        let r =
            HermitianMatrix::from_real(3, &[0.0, 0.3, 0.0, 0.3, 0.0, 0.0, 0.0, 0.0, 5.0]).unwrap();
        let t = AbelianTuple::with_spectral_cube(vec![x1, r]).unwrap();
        let d = joint_diagonalize(&t).unwrap();
        assert!(d.reconstruction_residual(t.members()) <= RECONSTRUCTION_TOL);
    }

    #[test]
    fn joint_diagonalize_shared_degeneracy_keeps_repeated_rows() {
        let x1 = HermitianMatrix::diagonal(&[1.0, 1.0, 2.0]);
        let x2 = HermitianMatrix::diagonal(&[3.0, 3.0, 7.0]);
        let t = AbelianTuple::with_spectral_cube(vec![x1, x2]).unwrap();
        let d = joint_diagonalize(&t).unwrap();
        assert!(d.reconstruction_residual(t.members()) <= RECONSTRUCTION_TOL);
        let repeats = d
            .table
            .iter()
            .filter(|row| (row[0] - 1.0).abs() < 1e-9 && (row[1] - 3.0).abs() < 1e-9)
            .count();
        assert_eq!(repeats, 2, "multiplicity encoded as repeated rows");
    }

    #[test]
    fn jacobi_fallback_diagonalizes_commuting_family() {
        // exercise the fallback directly from the identity start
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let dim = 5;
        let g = DMatrix::from_fn(dim, dim, |_, _| {
            Complex64::new(
                rng.sample::<f64, _>(rand_distr::StandardNormal),
                rng.sample::<f64, _>(rand_distr::StandardNormal),
            )
        });
        let q = g.qr().q();
        let mk = |vals: &[f64]| {
            let d = DMatrix::from_diagonal(&DVector::from_iterator(
                dim,
                vals.iter().map(|&v| Complex64::new(v, 0.0)),
            ));
            HermitianMatrix::from_hermitian_parts(&q * d * q.adjoint())
        };
        let members = vec![
            mk(&[1.0, -0.5, 2.0, 0.3, 0.9]),
            mk(&[0.2, 0.4, -1.0, 2.5, 1.1]),
        ];
        let basis = jacobi_sweeps(&members, DMatrix::identity(dim, dim));
        let d = table_from_basis(&members, basis);
        assert!(
            d.reconstruction_residual(&members) <= RECONSTRUCTION_TOL,
            "residual {}",
            d.reconstruction_residual(&members)
        );
        assert!(d.unitarity_residual() <= 1e-10);
    }

    #[test]
    fn compatible_examples() {
        // scalar shifts of the same tuple are compatible
        let x = random_hermitian_raw(3, 4);
        let y = random_hermitian_raw(4, 4);
        let xc = HermitianMatrix::from_hermitian_parts(x.as_matrix() * x.as_matrix());
        let t1 = AbelianTuple::with_spectral_cube(vec![x.clone(), xc.clone()]).unwrap();
        let t2 = AbelianTuple::with_spectral_cube(vec![x.shift(0.7), xc.shift(-0.2)]).unwrap();
        assert!(compatible(&t1, &t2, 1e-10).unwrap());

        // (sigma_x, 0) vs (0, sigma_z) reduces to [sigma_x, sigma_z] = 0: fails
        let a =
            AbelianTuple::with_spectral_cube(vec![pauli_x(), HermitianMatrix::zeros(2)]).unwrap();
        let b =
            AbelianTuple::with_spectral_cube(vec![HermitianMatrix::zeros(2), pauli_z()]).unwrap();
        assert!(!compatible(&a, &b, 1e-10).unwrap());

        // shape mismatch errors out
        let c = AbelianTuple::with_spectral_cube(vec![y]).unwrap();
        assert!(compatible(&t1, &c, 1e-10).is_err());
    }

    #[test]
    fn compatibility_closure_on_grid() {
        let x = random_hermitian_raw(5, 4);
        let x2 = HermitianMatrix::from_hermitian_parts(x.as_matrix() * x.as_matrix());
        let t1 = AbelianTuple::with_spectral_cube(vec![x.clone(), x2.clone()]).unwrap();
        let t2 = AbelianTuple::with_spectral_cube(vec![
            x.shift(1.0).scale(0.5),
            x2.scale(0.25).shift(0.3),
        ])
        .unwrap();
        assert!(compatible(&t1, &t2, 1e-10).unwrap());
        for k in 0..=10 {
            let w = k as f64 / 10.0;
            let blend = t1.blend(&t2, w).unwrap();
            let (ok, worst) = is_abelian(&blend, ABELIAN_TOL).unwrap();
            assert!(ok, "blend at {w} not abelian, worst {worst}");
        }
    }
}
