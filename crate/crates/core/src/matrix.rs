//! Dense Hermitian matrices and the elementary operator-order predicates.
//!
//! Everything downstream (tuples, functional calculus, verifiers) is built on
//! [`HermitianMatrix`]: a square complex matrix symmetrized on construction,
//! so `X = X*` holds by representation rather than by trust.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closed real interval, used both for spectra and for function domains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(lo <= hi, "empty interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    /// Clip a value that drifted at most `slack` outside the interval back to
    /// the nearest endpoint; values farther out are rejected.
    pub fn clip(&self, v: f64, slack: f64) -> Result<f64> {
        if v < self.lo - slack || v > self.hi + slack {
            return Err(Error::SpectrumOutsideDomain {
                value: v,
                lo: self.lo,
                hi: self.hi,
            });
        }
        Ok(v.clamp(self.lo, self.hi))
    }
}

/// Slack allowed between a spectrum and its declared interval before an
/// eigenvalue is considered out of domain. Eigenvalues inside the slack band
/// are clipped to the endpoint.
pub const SPECTRUM_SLACK: f64 = 1e-9;

/// A dense complex Hermitian matrix.
///
/// The constructor replaces its argument by `(X + X*)/2`, so the stored data
/// is Hermitian up to floating-point roundoff in the averaging itself.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    data: DMatrix<Complex64>,
}

impl HermitianMatrix {
    /// Symmetrize and wrap. Rejects non-square and non-finite input.
    pub fn new(data: DMatrix<Complex64>) -> Result<Self> {
        if data.nrows() != data.ncols() {
            return Err(Error::ShapeMismatch(format!(
                "expected square matrix, got {}x{}",
                data.nrows(),
                data.ncols()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let sym = (&data + data.adjoint()).scale(0.5);
        Ok(HermitianMatrix { data: sym })
    }

    /// Wrap a matrix already Hermitian by construction (e.g. `a* x a` of a
    /// Hermitian `x`). Symmetrizes anyway so the representation invariant
    /// cannot be violated by accumulated roundoff.
    pub(crate) fn from_hermitian_parts(data: DMatrix<Complex64>) -> Self {
        let sym = (&data + data.adjoint()).scale(0.5);
        HermitianMatrix { data: sym }
    }

    pub fn zeros(dim: usize) -> Self {
        HermitianMatrix {
            data: DMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        HermitianMatrix {
            data: DMatrix::identity(dim, dim),
        }
    }

    /// Real diagonal matrix.
    pub fn diagonal(entries: &[f64]) -> Self {
        HermitianMatrix {
            data: DMatrix::from_diagonal(&DVector::from_iterator(
                entries.len(),
                entries.iter().map(|&v| Complex64::new(v, 0.0)),
            )),
        }
    }

    /// Square matrix from a row-major real slice.
    pub fn from_real(rows: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != rows * rows {
            return Err(Error::ShapeMismatch(format!(
                "expected {} entries for a {rows}x{rows} matrix, got {}",
                rows * rows,
                entries.len()
            )));
        }
        let data = DMatrix::from_row_slice(
            rows,
            rows,
            &entries
                .iter()
                .map(|&v| Complex64::new(v, 0.0))
                .collect::<Vec<_>>(),
        );
        Self::new(data)
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<Complex64> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.data
    }

    pub fn frobenius(&self) -> f64 {
        self.data.norm()
    }

    /// Trace; real by Hermiticity, the imaginary roundoff is discarded.
    pub fn trace(&self) -> f64 {
        self.data.trace().re
    }

    pub fn scale(&self, factor: f64) -> Self {
        HermitianMatrix {
            data: self.data.scale(factor),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_same_dim(self, other)?;
        Ok(HermitianMatrix {
            data: &self.data + &other.data,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_same_dim(self, other)?;
        Ok(HermitianMatrix {
            data: &self.data - &other.data,
        })
    }

    /// Shift by a real multiple of the identity.
    pub fn shift(&self, offset: f64) -> Self {
        let mut data = self.data.clone();
        for i in 0..data.nrows() {
            data[(i, i)] += Complex64::new(offset, 0.0);
        }
        HermitianMatrix { data }
    }

    /// `a* self a` for an arbitrary (not necessarily Hermitian) square `a`.
    pub fn conjugate_by(&self, a: &DMatrix<Complex64>) -> Result<Self> {
        if a.nrows() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: a.nrows(),
            });
        }
        Ok(Self::from_hermitian_parts(a.adjoint() * &self.data * a))
    }
}

fn check_same_dim(x: &HermitianMatrix, y: &HermitianMatrix) -> Result<()> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            found: y.dim(),
        });
    }
    Ok(())
}

/// `xy - yx`. Anti-Hermitian for Hermitian arguments, hence returned as a
/// plain complex matrix.
pub fn commutator(x: &HermitianMatrix, y: &HermitianMatrix) -> Result<DMatrix<Complex64>> {
    check_same_dim(x, y)?;
    Ok(x.as_matrix() * y.as_matrix() - y.as_matrix() * x.as_matrix())
}

pub fn commutator_norm(x: &HermitianMatrix, y: &HermitianMatrix) -> Result<f64> {
    Ok(commutator(x, y)?.norm())
}

/// Relative scale `1 + product of Frobenius norms`, the denominator used by
/// pairwise tolerance checks.
pub fn pair_scale(x: &HermitianMatrix, y: &HermitianMatrix) -> f64 {
    1.0 + x.frobenius() * y.frobenius()
}

/// Operator order `x <= y`: true iff the minimum eigenvalue of `y - x` is
/// at least `-tol * (1 + |x|_F |y|_F)`.
pub fn psd_leq(x: &HermitianMatrix, y: &HermitianMatrix, tol: f64) -> Result<bool> {
    let diff = y.sub(x)?;
    let min = min_eigenvalue(&diff);
    Ok(min >= -tol * pair_scale(x, y))
}

pub fn min_eigenvalue(x: &HermitianMatrix) -> f64 {
    if x.dim() == 0 {
        return 0.0;
    }
    let se = nalgebra::SymmetricEigen::new(x.as_matrix().clone());
    se.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
}

/// Kronecker product.
pub fn kron(a: &HermitianMatrix, b: &HermitianMatrix) -> HermitianMatrix {
    HermitianMatrix::from_hermitian_parts(a.as_matrix().kronecker(b.as_matrix()))
}

/// Embed a matrix acting on tensor leg `leg` of a product space with factor
/// dimensions `dims`, i.e. `1 (x) ... (x) small (x) ... (x) 1`.
pub fn embed_in_leg(
    dims: &[usize],
    leg: usize,
    small: &HermitianMatrix,
) -> Result<HermitianMatrix> {
    if leg >= dims.len() {
        return Err(Error::InvalidArgument(format!(
            "leg {leg} out of range for {} factors",
            dims.len()
        )));
    }
    if small.dim() != dims[leg] {
        return Err(Error::DimensionMismatch {
            expected: dims[leg],
            found: small.dim(),
        });
    }
    let left: usize = dims[..leg].iter().product();
    let right: usize = dims[leg + 1..].iter().product();
    let mut out = small.as_matrix().clone();
    if left > 1 {
        out = DMatrix::identity(left, left).kronecker(&out);
    }
    if right > 1 {
        out = out.kronecker(&DMatrix::identity(right, right));
    }
    Ok(HermitianMatrix::from_hermitian_parts(out))
}

/// Leg embedding for a general (not necessarily Hermitian) matrix.
pub fn embed_general(dims: &[usize], leg: usize, small: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let left: usize = dims[..leg].iter().product();
    let right: usize = dims[leg + 1..].iter().product();
    let mut out = small.clone();
    if left > 1 {
        out = DMatrix::identity(left, left).kronecker(&out);
    }
    if right > 1 {
        out = out.kronecker(&DMatrix::identity(right, right));
    }
    out
}

/// Component of `x` on tensor leg `leg` (normalized partial trace over the
/// other legs), so that `leg_component(embed_in_leg(s)) == s`.
pub fn leg_component(dims: &[usize], leg: usize, x: &HermitianMatrix) -> Result<HermitianMatrix> {
    let total: usize = dims.iter().product();
    if x.dim() != total {
        return Err(Error::DimensionMismatch {
            expected: total,
            found: x.dim(),
        });
    }
    let d = dims[leg];
    let left: usize = dims[..leg].iter().product();
    let right: usize = dims[leg + 1..].iter().product();
    let mut out = DMatrix::<Complex64>::zeros(d, d);
    let m = x.as_matrix();
    // flat index (l, k, r) = l*d*right + k*right + r
    for k1 in 0..d {
        for k2 in 0..d {
            let mut acc = Complex64::new(0.0, 0.0);
            for l in 0..left {
                for r in 0..right {
                    let row = l * d * right + k1 * right + r;
                    let col = l * d * right + k2 * right + r;
                    acc += m[(row, col)];
                }
            }
            out[(k1, k2)] = acc / ((left * right) as f64);
        }
    }
    Ok(HermitianMatrix::from_hermitian_parts(out))
}

/// Frobenius distance of `x` from the embedding of its own leg component;
/// zero exactly when `x` acts on leg `leg` alone.
pub fn leg_membership_residual(dims: &[usize], leg: usize, x: &HermitianMatrix) -> Result<f64> {
    let comp = leg_component(dims, leg, x)?;
    let rebuilt = embed_in_leg(dims, leg, &comp)?;
    Ok(rebuilt.sub(x)?.frobenius())
}

/// JSON exchange form for a complex matrix: row-major real and imaginary
/// parts. Round-trips every finite `f64` bit-exactly through `serde_json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl MatrixJson {
    pub fn from_complex(m: &DMatrix<Complex64>) -> Self {
        let dim = m.nrows();
        let mut re = Vec::with_capacity(dim * dim);
        let mut im = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                re.push(m[(i, j)].re);
                im.push(m[(i, j)].im);
            }
        }
        MatrixJson { dim, re, im }
    }

    pub fn to_complex(&self) -> Result<DMatrix<Complex64>> {
        let n = self.dim;
        if self.re.len() != n * n || self.im.len() != n * n {
            return Err(Error::ShapeMismatch(format!(
                "dim {} requires {} entries, got re={}, im={}",
                n,
                n * n,
                self.re.len(),
                self.im.len()
            )));
        }
        Ok(DMatrix::from_fn(n, n, |i, j| {
            Complex64::new(self.re[i * n + j], self.im[i * n + j])
        }))
    }
}

impl Serialize for HermitianMatrix {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::from_complex(&self.data).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for HermitianMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let json = MatrixJson::deserialize(deserializer)?;
        let data = json.to_complex().map_err(serde::de::Error::custom)?;
        // No symmetrization on the way in: exchange must stay bit-exact for
        // matrices that were Hermitian when written.
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(serde::de::Error::custom("non-finite entries"));
        }
        Ok(HermitianMatrix { data })
    }
}


#[cfg(test)]
mod tests {
    use super::testutil::{pauli_x, pauli_z};
    use super::*;

    #[test]
    fn constructor_symmetrizes() {
        let raw = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(1.0, 0.5),
                Complex64::new(2.0, 1.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(3.0, -0.5),
            ],
        );
        let h = HermitianMatrix::new(raw).unwrap();
        let resid = (h.as_matrix() - h.as_matrix().adjoint()).norm();
        assert!(resid <= 1e-12 * (1.0 + h.frobenius()));
        // diagonal imaginary parts are killed by the averaging
        assert!(h.as_matrix()[(0, 0)].im.abs() < 1e-15);
    }

    #[test]
    fn constructor_rejects_non_finite() {
        let raw = DMatrix::from_row_slice(1, 1, &[Complex64::new(f64::NAN, 0.0)]);
        assert!(matches!(HermitianMatrix::new(raw), Err(Error::NonFinite)));
    }

    #[test]
    fn commutator_of_diagonals_is_zero() {
        let x = HermitianMatrix::diagonal(&[1.0, 2.0]);
        let y = HermitianMatrix::diagonal(&[3.0, 4.0]);
        assert_eq!(commutator_norm(&x, &y).unwrap(), 0.0);
    }

    #[test]
    fn pauli_commutator_norm() {
        // [sigma_x, sigma_z] = -2i sigma_y has Frobenius norm 2 sqrt(2)
        let norm = commutator_norm(&pauli_x(), &pauli_z()).unwrap();
        assert!((norm - 2.0 * 2.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn matrix_commutes_with_its_square() {
        let x =
            HermitianMatrix::from_real(3, &[1.0, 0.2, 0.0, 0.2, -0.5, 0.7, 0.0, 0.7, 2.0]).unwrap();
        let x2 = HermitianMatrix::from_hermitian_parts(x.as_matrix() * x.as_matrix());
        assert!(commutator_norm(&x, &x2).unwrap() <= 1e-12 * pair_scale(&x, &x2));
    }

    #[test]
    fn commutator_dimension_mismatch() {
        let x = HermitianMatrix::identity(2);
        let y = HermitianMatrix::identity(3);
        assert!(commutator(&x, &y).is_err());
    }

    #[test]
    fn psd_order_examples() {
        let x = HermitianMatrix::diagonal(&[0.0, 2.0]);
        let y = HermitianMatrix::diagonal(&[1.0, 1.0]);
        assert!(psd_leq(&x, &x, 0.0).unwrap());
        assert!(psd_leq(
            &HermitianMatrix::zeros(2),
            &HermitianMatrix::diagonal(&[1.0, 2.0]),
            0.0
        )
        .unwrap());
        assert!(!psd_leq(&x, &y, 1e-9).unwrap());
    }

    #[test]
    fn psd_order_transitive_on_exact_instances() {
        let x = HermitianMatrix::diagonal(&[0.0, 1.0, 2.0]);
        let y = HermitianMatrix::diagonal(&[0.5, 1.5, 2.0]);
        let z = HermitianMatrix::diagonal(&[1.0, 2.0, 3.0]);
        assert!(psd_leq(&x, &y, 0.0).unwrap());
        assert!(psd_leq(&y, &z, 0.0).unwrap());
        assert!(psd_leq(&x, &z, 0.0).unwrap());
    }

    #[test]
    fn embed_and_project_roundtrip() {
        let dims = [2, 3, 2];
        let small =
            HermitianMatrix::from_real(3, &[1.0, 0.5, 0.0, 0.5, -1.0, 0.25, 0.0, 0.25, 2.0])
                .unwrap();
        let big = embed_in_leg(&dims, 1, &small).unwrap();
        assert_eq!(big.dim(), 12);
        let back = leg_component(&dims, 1, &big).unwrap();
        assert!(back.sub(&small).unwrap().frobenius() < 1e-12);
        assert!(leg_membership_residual(&dims, 1, &big).unwrap() < 1e-12);
        // membership fails for a matrix straddling legs
        let off = kron(&pauli_x(), &HermitianMatrix::identity(6));
        assert!(leg_membership_residual(&dims, 1, &off).unwrap() > 0.5);
    }

    #[test]
    fn interval_clip() {
        let iv = Interval::new(0.0, 1.0);
        assert_eq!(iv.clip(1.0 + 0.5e-9, 1e-9).unwrap(), 1.0);
        assert_eq!(iv.clip(-0.5e-9, 1e-9).unwrap(), 0.0);
        assert_eq!(iv.clip(0.5, 1e-9).unwrap(), 0.5);
        assert!(iv.clip(1.0 + 1e-6, 1e-9).is_err());
    }

    #[test]
    fn json_round_trip_bit_exact() {
        let h = HermitianMatrix::new(DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(0.1 + 0.2, 0.0), // not decimal-representable; must still round-trip
                Complex64::new(1.25, -0.5),
                Complex64::new(1.25, 0.5),
                Complex64::new(-3.0, 0.0),
            ],
        ))
        .unwrap();
        let text = serde_json::to_string(&h).unwrap();
        let back: HermitianMatrix = serde_json::from_str(&text).unwrap();
        for (a, b) in h.as_matrix().iter().zip(back.as_matrix().iter()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }
}
