//! Seeded generation of every test object: Hermitian draws, abelian tuples,
//! unital columns, discrete operator fields, and the two constructions of
//! pairwise-compatible tuples (tensor legs and the shifted-generator family).

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{commutator, embed_in_leg, HermitianMatrix, Interval, MatrixJson};
use crate::rng::{gaussian_complex, haar_unitary, stream_rng};
use crate::spectral::{eigh, AbelianTuple};

/// Unitality tolerance for columns and fields.
pub const UNITAL_TOL: f64 = 1e-10;

/// An m-tuple of matrices with `sum a_k* a_k = 1`.
#[derive(Debug, Clone)]
pub struct UnitalColumn {
    blocks: Vec<DMatrix<Complex64>>,
}

impl UnitalColumn {
    pub fn new(blocks: Vec<DMatrix<Complex64>>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidArgument(
                "column needs at least one block".into(),
            ));
        }
        let dim = blocks[0].ncols();
        for b in &blocks {
            if b.nrows() != dim || b.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: b.nrows(),
                });
            }
        }
        let residual = unital_residual(&blocks);
        if residual > UNITAL_TOL {
            return Err(Error::NotUnital { residual });
        }
        Ok(UnitalColumn { blocks })
    }

    pub fn m(&self) -> usize {
        self.blocks.len()
    }

    pub fn dim(&self) -> usize {
        self.blocks[0].ncols()
    }

    pub fn blocks(&self) -> &[DMatrix<Complex64>] {
        &self.blocks
    }

    pub fn block(&self, k: usize) -> &DMatrix<Complex64> {
        &self.blocks[k]
    }

    pub fn to_json(&self) -> Vec<MatrixJson> {
        self.blocks.iter().map(MatrixJson::from_complex).collect()
    }
}

fn unital_residual(blocks: &[DMatrix<Complex64>]) -> f64 {
    let dim = blocks[0].ncols();
    let mut acc = DMatrix::<Complex64>::zeros(dim, dim);
    for b in blocks {
        acc += b.adjoint() * b;
    }
    (acc - DMatrix::<Complex64>::identity(dim, dim)).norm()
}

/// Weighted node family `(w_t, a_t, x_t)` with `sum_t w_t a_t* a_t = 1`;
/// the finite realization of a unital column field. Node tuples are optional
/// (a bare column field carries none).
#[derive(Debug, Clone)]
pub struct DiscreteField {
    weights: Vec<f64>,
    columns: Vec<DMatrix<Complex64>>,
    tuples: Option<Vec<AbelianTuple>>,
}

impl DiscreteField {
    pub fn new(
        weights: Vec<f64>,
        columns: Vec<DMatrix<Complex64>>,
        tuples: Option<Vec<AbelianTuple>>,
    ) -> Result<Self> {
        if weights.is_empty() || weights.len() != columns.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} weights vs {} columns",
                weights.len(),
                columns.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidArgument(
                "weights must be finite and nonnegative".into(),
            ));
        }
        let dim = columns[0].nrows();
        for c in &columns {
            if c.nrows() != dim || c.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: c.nrows(),
                });
            }
        }
        if let Some(ts) = &tuples {
            if ts.len() != weights.len() {
                return Err(Error::ShapeMismatch(format!(
                    "{} tuples vs {} nodes",
                    ts.len(),
                    weights.len()
                )));
            }
            let n = ts[0].n();
            for t in ts {
                if t.dim() != dim || t.n() != n {
                    return Err(Error::ShapeMismatch("node tuple shape mismatch".into()));
                }
            }
        }
        let residual = {
            let mut acc = DMatrix::<Complex64>::zeros(dim, dim);
            for (w, c) in weights.iter().zip(&columns) {
                acc += (c.adjoint() * c).scale(*w);
            }
            (acc - DMatrix::<Complex64>::identity(dim, dim)).norm()
        };
        if residual > UNITAL_TOL {
            return Err(Error::NotUnital { residual });
        }
        Ok(DiscreteField {
            weights,
            columns,
            tuples,
        })
    }

    pub fn nodes(&self) -> usize {
        self.weights.len()
    }

    pub fn dim(&self) -> usize {
        self.columns[0].nrows()
    }

    pub fn n(&self) -> usize {
        self.tuples.as_ref().map_or(0, |t| t[0].n())
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn column(&self, t: usize) -> &DMatrix<Complex64> {
        &self.columns[t]
    }

    pub fn tuples(&self) -> Option<&[AbelianTuple]> {
        self.tuples.as_deref()
    }

    pub fn tuple(&self, t: usize) -> Result<&AbelianTuple> {
        self.tuples
            .as_ref()
            .and_then(|ts| ts.get(t))
            .ok_or_else(|| Error::InvalidArgument("field carries no node tuples".into()))
    }

    /// Discrete field integral `sum_t w_t a_t* z_t a_t`.
    pub fn integrate<F>(&self, mut node_value: F) -> Result<HermitianMatrix>
    where
        F: FnMut(usize) -> Result<HermitianMatrix>,
    {
        let mut acc = DMatrix::<Complex64>::zeros(self.dim(), self.dim());
        for t in 0..self.nodes() {
            let z = node_value(t)?;
            acc += (self.columns[t].adjoint() * z.as_matrix() * &self.columns[t])
                .scale(self.weights[t]);
        }
        Ok(HermitianMatrix::new(acc).expect("integrand is Hermitian"))
    }

    /// The integrated members `y_i = sum_t w_t a_t* x_{it} a_t`.
    pub fn integrated_members(&self) -> Result<Vec<HermitianMatrix>> {
        let n = self.n();
        if n == 0 {
            return Err(Error::InvalidArgument(
                "field carries no node tuples".into(),
            ));
        }
        (0..n)
            .map(|i| self.integrate(|t| Ok(self.tuple(t)?.member(i).clone())))
            .collect()
    }
}

/// GUE-style draw with the spectrum affinely rescaled onto `interval`.
pub fn random_hermitian(seed: u64, dim: usize, interval: Interval) -> HermitianMatrix {
    let mut rng = stream_rng(seed, streams::HERMITIAN);
    random_hermitian_with(&mut rng, dim, interval)
}

pub(crate) fn random_hermitian_with(
    rng: &mut ChaCha8Rng,
    dim: usize,
    interval: Interval,
) -> HermitianMatrix {
    let g = gaussian_complex(rng, dim, dim);
    let h = HermitianMatrix::new(g).expect("finite gaussian draw");
    rescale_spectrum(&h, interval)
}

/// Affine spectral rescale onto `interval` (degenerate interval gives the
/// scalar matrix; degenerate spectrum maps to the midpoint).
pub fn rescale_spectrum(x: &HermitianMatrix, interval: Interval) -> HermitianMatrix {
    let (vals, basis) = eigh(x);
    let dim = x.dim();
    let lo = vals.first().copied().unwrap_or(0.0);
    let hi = vals.last().copied().unwrap_or(0.0);
    let mapped: Vec<f64> = if interval.width() == 0.0 {
        vec![interval.lo; dim]
    } else if hi - lo < 1e-14 * (1.0 + hi.abs()) {
        vec![0.5 * (interval.lo + interval.hi); dim]
    } else {
        vals.iter()
            .map(|v| interval.lo + (v - lo) * interval.width() / (hi - lo))
            .collect()
    };
    crate::spectral::JointSpectralDecomposition {
        basis,
        table: vals.iter().map(|&v| vec![v]).collect(),
    }
    .assemble(&mapped)
}

/// Abelian tuple with a planted joint eigenbasis: one Haar unitary and `n`
/// independent eigenvalue columns drawn uniformly inside the cube.
pub fn random_abelian_tuple(seed: u64, dim: usize, n: usize, cube: &[Interval]) -> AbelianTuple {
    let mut rng = stream_rng(seed, streams::ABELIAN_TUPLE);
    random_abelian_tuple_with(&mut rng, dim, n, cube)
}

pub(crate) fn random_abelian_tuple_with(
    rng: &mut ChaCha8Rng,
    dim: usize,
    n: usize,
    cube: &[Interval],
) -> AbelianTuple {
    assert_eq!(cube.len(), n, "cube arity mismatch");
    let basis = haar_unitary(rng, dim);
    let members: Vec<HermitianMatrix> = cube
        .iter()
        .map(|iv| {
            let vals: Vec<f64> = (0..dim)
                .map(|_| {
                    if iv.width() == 0.0 {
                        iv.lo
                    } else {
                        rng.gen_range(iv.lo..=iv.hi)
                    }
                })
                .collect();
            let diag = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                dim,
                vals.iter().map(|&v| Complex64::new(v, 0.0)),
            ));
            HermitianMatrix::new(&basis * diag * basis.adjoint()).expect("finite")
        })
        .collect();
    AbelianTuple::new(members, cube.to_vec()).expect("planted tuple is abelian by construction")
}

/// Unital column: orthonormalize the columns of an `(m dim) x dim` Gaussian
/// stack and slice it into `m` square blocks.
pub fn random_unital_column(seed: u64, m: usize, dim: usize) -> UnitalColumn {
    let mut rng = stream_rng(seed, streams::UNITAL_COLUMN);
    random_unital_column_with(&mut rng, m, dim)
}

pub(crate) fn random_unital_column_with(
    rng: &mut ChaCha8Rng,
    m: usize,
    dim: usize,
) -> UnitalColumn {
    assert!(m >= 1);
    let stack = gaussian_complex(rng, m * dim, dim);
    let q = stack.qr().q(); // (m dim) x dim, orthonormal columns
    let blocks: Vec<DMatrix<Complex64>> =
        (0..m).map(|k| q.rows(k * dim, dim).into_owned()).collect();
    UnitalColumn::new(blocks).expect("sliced isometry is unital by construction")
}

/// Random field: Dirichlet(1) weights, Gaussian per-node columns rescaled so
/// the unital field identity holds exactly, and a planted abelian tuple per
/// node.
pub fn random_field(
    seed: u64,
    nodes: usize,
    dim: usize,
    n: usize,
    cube: &[Interval],
) -> DiscreteField {
    assert!(nodes >= 1);
    let mut wrng = stream_rng(seed, streams::FIELD_WEIGHTS);
    let weights = dirichlet_weights(&mut wrng, nodes);
    let mut crng = stream_rng(seed, streams::FIELD_COLUMNS);
    let raw: Vec<DMatrix<Complex64>> = (0..nodes)
        .map(|_| gaussian_complex(&mut crng, dim, dim))
        .collect();
    let columns = rescale_columns(&weights, raw);
    let tuples: Vec<AbelianTuple> = (0..nodes)
        .map(|t| {
            let mut trng = stream_rng(seed, streams::FIELD_TUPLES + t as u64);
            random_abelian_tuple_with(&mut trng, dim, n, cube)
        })
        .collect();
    DiscreteField::new(weights, columns, Some(tuples)).expect("rescaled field is unital")
}

/// Symmetric Dirichlet(1) weight vector for `nodes` nodes.
pub fn random_weights(seed: u64, nodes: usize) -> Vec<f64> {
    let mut rng = stream_rng(seed, streams::FIELD_WEIGHTS ^ 0x5);
    dirichlet_weights(&mut rng, nodes)
}

pub(crate) fn dirichlet_weights(rng: &mut ChaCha8Rng, nodes: usize) -> Vec<f64> {
    if nodes == 1 {
        return vec![1.0];
    }
    // symmetric Dirichlet(1): normalized unit-rate exponentials
    let draws: Vec<f64> = (0..nodes).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let total: f64 = draws.iter().sum();
    draws.into_iter().map(|d| d / total).collect()
}

/// Rescale columns (not re-orthonormalize) so `sum_t w_t a_t* a_t = 1`:
/// right-multiply every block by the inverse square root of the raw sum.
pub(crate) fn rescale_columns(
    weights: &[f64],
    raw: Vec<DMatrix<Complex64>>,
) -> Vec<DMatrix<Complex64>> {
    let dim = raw[0].nrows();
    let mut s = DMatrix::<Complex64>::zeros(dim, dim);
    for (w, a) in weights.iter().zip(&raw) {
        s += (a.adjoint() * a).scale(*w);
    }
    let s = HermitianMatrix::new(s).expect("gram matrix is Hermitian");
    let inv_sqrt = matrix_inv_sqrt(&s);
    raw.into_iter().map(|a| a * &inv_sqrt).collect()
}

/// Inverse square root of a positive definite Hermitian matrix.
pub(crate) fn matrix_inv_sqrt(s: &HermitianMatrix) -> DMatrix<Complex64> {
    let (vals, basis) = eigh(s);
    let inv_sqrt_vals: Vec<f64> = vals.iter().map(|&v| 1.0 / v.max(1e-300).sqrt()).collect();
    let diag = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        vals.len(),
        inv_sqrt_vals.iter().map(|&v| Complex64::new(v, 0.0)),
    ));
    &basis * diag * basis.adjoint()
}

/// Tensor-leg compatible pair: on the product of the given leg dimensions,
/// member `i` of each tuple acts on leg `i` alone, so the commutator
/// symmetry holds with both sides zero and every segment point is abelian.
pub fn compatible_pair_eq8(
    seed: u64,
    leg_dims: &[usize],
    cube: &[Interval],
) -> Result<(AbelianTuple, AbelianTuple)> {
    let n = leg_dims.len();
    if cube.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "{n} legs but {} intervals",
            cube.len()
        )));
    }
    let mut rng = stream_rng(seed, streams::PAIR_EQ8);
    let build = |rng: &mut ChaCha8Rng| -> Result<AbelianTuple> {
        let members: Vec<HermitianMatrix> = leg_dims
            .iter()
            .enumerate()
            .map(|(i, &d)| {
                let small = random_hermitian_with(rng, d, cube[i]);
                embed_in_leg(leg_dims, i, &small)
            })
            .collect::<Result<_>>()?;
        AbelianTuple::new(members, cube.to_vec())
    };
    let x = build(&mut rng)?;
    let y = build(&mut rng)?;
    Ok((x, y))
}

/// Per-leg operator-ordered tensor pair: `x_i <= y_i` with both tuples
/// abelian and mutually compatible. Leg spectra sit inside `interval`.
pub fn ordered_pair_eq8(
    seed: u64,
    leg_dims: &[usize],
    interval: Interval,
) -> Result<(AbelianTuple, AbelianTuple)> {
    let n = leg_dims.len();
    let mut rng = stream_rng(seed, streams::ORDERED_EQ8);
    let cube = vec![interval; n];
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for (i, &d) in leg_dims.iter().enumerate() {
        let span = interval.width();
        let gap: f64 = rng.gen_range(0.2..0.5) * span;
        let x_hat =
            random_hermitian_with(&mut rng, d, Interval::new(interval.lo, interval.hi - gap));
        let g = gaussian_complex(&mut rng, d, d);
        let p_raw = HermitianMatrix::new(&g * g.adjoint()).expect("finite");
        let p = rescale_spectrum(&p_raw, Interval::new(0.0, gap));
        let y_hat = x_hat.add(&p)?;
        xs.push(embed_in_leg(leg_dims, i, &x_hat)?);
        ys.push(embed_in_leg(leg_dims, i, &y_hat)?);
    }
    Ok((
        AbelianTuple::new(xs, cube.clone())?,
        AbelianTuple::new(ys, cube)?,
    ))
}

/// The shifted-generator family: tuples `(eps_1 x + c_1, ..., eps_n x + c_n)`
/// with `x` block-diagonal in the eigenbasis of a fixed degenerate generator
/// and the `c_i` scalar on each of its spectral blocks. Two draws from the
/// same family are compatible even though the `x` parts do not commute.
pub struct GeneratorFamily {
    basis: DMatrix<Complex64>,
    block_sizes: Vec<usize>,
    eps: Vec<f64>,
    rng: ChaCha8Rng,
}

impl GeneratorFamily {
    pub fn new(seed: u64, dim: usize, n: usize, eps: Vec<f64>) -> Result<Self> {
        if eps.len() != n || eps.iter().all(|e| *e == 0.0) {
            return Err(Error::InvalidArgument(
                "direction vector must have length n and not vanish".into(),
            ));
        }
        if dim < 2 {
            return Err(Error::InvalidArgument(
                "generator family needs dim >= 2".into(),
            ));
        }
        let mut rng = stream_rng(seed, streams::PAIR_EQ7);
        let basis = haar_unitary(&mut rng, dim);
        // blocks of size 2 (plus one of size 1 for odd dim): at least one
        // block of size >= 2 keeps the commutant genuinely noncommutative
        let mut block_sizes = Vec::new();
        let mut left = dim;
        while left > 0 {
            let b = left.min(2);
            block_sizes.push(b);
            left -= b;
        }
        Ok(GeneratorFamily {
            basis,
            block_sizes,
            eps,
            rng,
        })
    }

    fn n(&self) -> usize {
        self.eps.len()
    }

    fn dim(&self) -> usize {
        self.basis.nrows()
    }

    /// Block-diagonal Hermitian in the generator basis (an element of the
    /// generator's commutant).
    fn commutant_element(&mut self, scale: f64, positive: bool) -> HermitianMatrix {
        let dim = self.dim();
        let mut m = DMatrix::<Complex64>::zeros(dim, dim);
        let mut offset = 0;
        for &b in &self.block_sizes.clone() {
            let g = gaussian_complex(&mut self.rng, b, b);
            let block = if positive {
                (&g * g.adjoint()).scale(scale / b as f64)
            } else {
                ((&g + g.adjoint()).scale(0.5)).scale(scale)
            };
            for i in 0..b {
                for j in 0..b {
                    m[(offset + i, offset + j)] = block[(i, j)];
                }
            }
            offset += b;
        }
        HermitianMatrix::new(&self.basis * m * self.basis.adjoint()).expect("finite")
    }

    /// Block-scalar Hermitian (a polynomial in the generator).
    fn center_element(&mut self, lo: f64, hi: f64) -> HermitianMatrix {
        let dim = self.dim();
        let mut vals = Vec::with_capacity(dim);
        for &b in &self.block_sizes {
            let v = self.rng.gen_range(lo..hi);
            vals.extend(std::iter::repeat(v).take(b));
        }
        let diag = HermitianMatrix::diagonal(&vals);
        diag.conjugate_by(&self.basis.adjoint()).expect("same dim")
    }

    /// One tuple from the family.
    pub fn tuple(&mut self) -> Result<AbelianTuple> {
        let x = self.commutant_element(0.6, false);
        let eps = self.eps.clone();
        let members: Vec<HermitianMatrix> = eps
            .iter()
            .map(|&e| {
                let c = self.center_element(-0.5, 0.5);
                x.scale(e).add(&c)
            })
            .collect::<Result<_>>()?;
        AbelianTuple::with_spectral_cube(members)
    }

    /// An operator-ordered pair `x <= y` from the family, plus a density
    /// commuting with every member of both tuples (block-scalar positive).
    pub fn ordered_pair_with_density(
        &mut self,
    ) -> Result<(AbelianTuple, AbelianTuple, HermitianMatrix)> {
        if self.eps.iter().any(|e| *e <= 0.0) {
            return Err(Error::InvalidArgument(
                "ordered pairs need strictly positive directions".into(),
            ));
        }
        let x_part = self.commutant_element(0.5, false);
        let bump = self.commutant_element(0.4, true);
        let x_part_shifted = x_part.add(&bump)?;
        let eps = self.eps.clone();
        let mut xs = Vec::with_capacity(self.n());
        let mut ys = Vec::with_capacity(self.n());
        for &e in &eps {
            let c = self.center_element(-0.4, 0.4);
            let lift = self.center_element(0.0, 0.5);
            xs.push(x_part.scale(e).add(&c)?);
            ys.push(x_part_shifted.scale(e).add(&c)?.add(&lift)?);
        }
        let density = self.center_element(0.1, 1.0);
        // shared cube: hull of both spectra per coordinate
        let x_tuple = AbelianTuple::with_spectral_cube(xs)?;
        let y_tuple = AbelianTuple::with_spectral_cube(ys)?;
        let cube = hull_cubes(x_tuple.cube(), y_tuple.cube());
        Ok((
            AbelianTuple::new(x_tuple.members().to_vec(), cube.clone())?,
            AbelianTuple::new(y_tuple.members().to_vec(), cube)?,
            density,
        ))
    }
}

/// Componentwise hull of two cubes.
pub fn hull_cubes(a: &[Interval], b: &[Interval]) -> Vec<Interval> {
    a.iter()
        .zip(b)
        .map(|(x, y)| Interval::new(x.lo.min(y.lo), x.hi.max(y.hi)))
        .collect()
}

/// Compatible pair from the shifted-generator construction.
pub fn compatible_pair_eq7(
    seed: u64,
    dim: usize,
    n: usize,
    eps: &[f64],
) -> Result<(AbelianTuple, AbelianTuple)> {
    let mut family = GeneratorFamily::new(seed, dim, n, eps.to_vec())?;
    let x = family.tuple()?;
    let y = family.tuple()?;
    Ok((x, y))
}

/// Sufficient commutation condition for a field: for all member indices
/// `i < j` and all node pairs `(s, t)`,
/// `[a_t* x_{it} a_t, a_s* x_{js} a_s] = [a_t* x_{jt} a_t, a_s* x_{is} a_s]`.
/// Returns the verdict and the worst normalized residual.
pub fn check_field_condition_eq11(field: &DiscreteField, tol: f64) -> Result<(bool, f64)> {
    let n = field.n();
    if n == 0 {
        return Err(Error::InvalidArgument(
            "field carries no node tuples".into(),
        ));
    }
    // conjugated members A[t][i] = a_t* x_{it} a_t
    let mut conj: Vec<Vec<HermitianMatrix>> = Vec::with_capacity(field.nodes());
    for t in 0..field.nodes() {
        let col = field.column(t);
        let tup = field.tuple(t)?;
        conj.push(
            (0..n)
                .map(|i| tup.member(i).conjugate_by(col))
                .collect::<Result<_>>()?,
        );
    }
    let mut ok = true;
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            for t in 0..field.nodes() {
                for s in 0..field.nodes() {
                    let lhs = commutator(&conj[t][i], &conj[s][j])?;
                    let rhs = commutator(&conj[t][j], &conj[s][i])?;
                    let scale = 1.0
                        + conj[t][i].frobenius() * conj[s][j].frobenius()
                        + conj[t][j].frobenius() * conj[s][i].frobenius();
                    let resid = (lhs - rhs).norm() / scale;
                    worst = worst.max(resid);
                    if resid > tol {
                        ok = false;
                    }
                }
            }
        }
    }
    Ok((ok, worst))
}

/// Random positive semidefinite matrix with spectrum in `[0, radius]`.
pub fn random_psd(rng: &mut ChaCha8Rng, dim: usize, radius: f64) -> HermitianMatrix {
    let g = gaussian_complex(rng, dim, dim);
    let p = HermitianMatrix::new(&g * g.adjoint()).expect("finite");
    rescale_spectrum(&p, Interval::new(0.0, radius))
}

/// Ordered pair of abelian tuples sharing one eigenbasis (hence compatible):
/// `y_i = x_i + diag-nonneg in the same basis`.
pub fn ordered_pair_shared_basis(
    seed: u64,
    dim: usize,
    n: usize,
    interval: Interval,
) -> (AbelianTuple, AbelianTuple) {
    let mut rng = stream_rng(seed, streams::ORDERED_SHARED);
    let basis = haar_unitary(&mut rng, dim);
    let cube = vec![interval; n];
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for _ in 0..n {
        let split: f64 = rng.gen_range(0.3..0.7);
        let xvals: Vec<f64> = (0..dim)
            .map(|_| interval.lo + rng.gen::<f64>() * split * interval.width())
            .collect();
        let yvals: Vec<f64> = xvals
            .iter()
            .map(|&v| v + rng.gen::<f64>() * (interval.hi - v))
            .collect();
        let embed = |vals: &[f64]| {
            HermitianMatrix::diagonal(vals)
                .conjugate_by(&basis.adjoint())
                .expect("same dim")
        };
        xs.push(embed(&xvals));
        ys.push(embed(&yvals));
    }
    (
        AbelianTuple::new(xs, cube.clone()).expect("shared basis tuple"),
        AbelianTuple::new(ys, cube).expect("shared basis tuple"),
    )
}

/// Ordered pair of abelian tuples in two unrelated eigenbases. The order
/// `x_i <= y_i` is enforced by a scalar shift of `y_i` up to contact plus a
/// small random slack, so the pair is generically *not* compatible.
pub fn ordered_pair_two_bases(
    seed: u64,
    dim: usize,
    n: usize,
    positive: bool,
) -> (AbelianTuple, AbelianTuple) {
    let mut rng = stream_rng(seed, streams::ORDERED_TWO_BASES);
    let lo = if positive { 0.0 } else { -1.0 };
    let x_cube = vec![Interval::new(lo, 1.0); n];
    let x = random_abelian_tuple_with(&mut rng, dim, n, &x_cube);
    let y_raw = random_abelian_tuple_with(&mut rng, dim, n, &x_cube);
    let mut ys = Vec::with_capacity(n);
    for i in 0..n {
        let diff = y_raw.member(i).sub(x.member(i)).expect("same dim");
        let min_eig = crate::matrix::min_eigenvalue(&diff);
        let slack: f64 = rng.gen_range(0.0..0.05);
        let shift = if min_eig < 0.0 {
            -min_eig + slack
        } else {
            slack
        };
        ys.push(y_raw.member(i).shift(shift));
    }
    let y = AbelianTuple::with_spectral_cube(ys).expect("shifted tuple stays abelian");
    let cube = hull_cubes(x.cube(), y.cube());
    (
        AbelianTuple::new(x.members().to_vec(), cube.clone()).expect("cube hull"),
        AbelianTuple::new(y.members().to_vec(), cube).expect("cube hull"),
    )
}

/// A discrete field whose node tuples live on tensor legs: member `i` of
/// every node tuple acts on leg `i` alone. The integrated members then live
/// on their legs too, so they commute by structure.
#[derive(Debug, Clone)]
pub struct TensorLegField {
    pub leg_dims: Vec<usize>,
    pub field: DiscreteField,
}

/// Tensor-leg field with unital columns. With `scalar_columns` the columns
/// are positive scalars; otherwise each is a scalar multiple of a product of
/// per-leg Haar unitaries. Both keep the integrated tuple leg-supported.
pub fn tensor_leg_field(
    seed: u64,
    leg_dims: &[usize],
    nodes: usize,
    cube: &[Interval],
    scalar_columns: bool,
) -> Result<TensorLegField> {
    let n = leg_dims.len();
    if cube.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "{n} legs but {} intervals",
            cube.len()
        )));
    }
    let total: usize = leg_dims.iter().product();
    let mut wrng = stream_rng(seed, streams::FIELD_WEIGHTS);
    let weights = dirichlet_weights(&mut wrng, nodes);
    // column magnitudes: own Dirichlet draw so sum_t w_t c_t^2 = 1 exactly
    let gammas = dirichlet_weights(&mut wrng, nodes);
    let mut crng = stream_rng(seed, streams::FIELD_COLUMNS);
    let mut trng = stream_rng(seed, streams::FIELD_TUPLES);
    let mut columns = Vec::with_capacity(nodes);
    let mut tuples = Vec::with_capacity(nodes);
    for t in 0..nodes {
        let c = (gammas[t] / weights[t]).sqrt();
        let col = if scalar_columns {
            DMatrix::<Complex64>::identity(total, total).scale(c)
        } else {
            let mut u = DMatrix::<Complex64>::identity(1, 1);
            for &d in leg_dims {
                u = u.kronecker(&haar_unitary(&mut crng, d));
            }
            u.scale(c)
        };
        columns.push(col);
        let members: Vec<HermitianMatrix> = leg_dims
            .iter()
            .enumerate()
            .map(|(i, &d)| {
                let small = random_hermitian_with(&mut trng, d, cube[i]);
                embed_in_leg(leg_dims, i, &small)
            })
            .collect::<Result<_>>()?;
        tuples.push(AbelianTuple::new(members, cube.to_vec())?);
    }
    Ok(TensorLegField {
        leg_dims: leg_dims.to_vec(),
        field: DiscreteField::new(weights, columns, Some(tuples))?,
    })
}

/// Shared node weights plus one column list per tensor leg, stored as the
/// small per-leg blocks. Used by the zero-padded and constant-tuple
/// constructions, where joint unitality forces the per-leg column masses
/// `b_i = sum_t w_t a_{it}* a_{it}` to be scalars summing to one.
#[derive(Debug, Clone)]
pub struct PerLegColumnFields {
    pub leg_dims: Vec<usize>,
    pub weights: Vec<f64>,
    /// `columns[i][t]`: block of leg `i` at node `t`, of size `d_i x d_i`.
    pub columns: Vec<Vec<DMatrix<Complex64>>>,
    /// The scalar masses `c_i` with `b_i = c_i 1`.
    pub masses: Vec<f64>,
}

fn per_leg_columns(seed: u64, leg_dims: &[usize], nodes: usize) -> PerLegColumnFields {
    let n = leg_dims.len();
    let mut wrng = stream_rng(seed, streams::FIELD_WEIGHTS);
    let weights = dirichlet_weights(&mut wrng, nodes);
    let masses = dirichlet_weights(&mut wrng, n);
    let mut crng = stream_rng(seed, streams::FIELD_COLUMNS);
    let mut columns = Vec::with_capacity(n);
    for (i, &d) in leg_dims.iter().enumerate() {
        let raw: Vec<DMatrix<Complex64>> = (0..nodes)
            .map(|_| gaussian_complex(&mut crng, d, d))
            .collect();
        let rescaled = rescale_columns(&weights, raw);
        columns.push(
            rescaled
                .into_iter()
                .map(|a| a.scale(masses[i].sqrt()))
                .collect(),
        );
    }
    PerLegColumnFields {
        leg_dims: leg_dims.to_vec(),
        weights,
        columns,
        masses,
    }
}

/// Zero-padded construction: per-leg fields `(x_{it}, a_{it})` on leg `i`
/// with joint unitality `sum_i sum_t w_t a_{it}* a_{it} = 1`. Every interval
/// of the cube contains zero.
#[derive(Debug, Clone)]
pub struct BlockZeroFields {
    pub legs: PerLegColumnFields,
    /// `xs[i][t]`: the leg-`i` Hermitian at node `t` (small).
    pub xs: Vec<Vec<HermitianMatrix>>,
    pub cube: Vec<Interval>,
}

pub fn block_zero_fields(seed: u64, leg_dims: &[usize], nodes: usize) -> Result<BlockZeroFields> {
    let n = leg_dims.len();
    let cube = vec![Interval::new(-1.0, 1.0); n];
    let legs = per_leg_columns(seed, leg_dims, nodes);
    let mut xrng = stream_rng(seed, streams::FIELD_TUPLES);
    let xs: Vec<Vec<HermitianMatrix>> = leg_dims
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            (0..nodes)
                .map(|_| random_hermitian_with(&mut xrng, d, cube[i]))
                .collect()
        })
        .collect();
    Ok(BlockZeroFields { legs, xs, cube })
}

/// Constant-tuple construction: one fixed `x_i` per leg, conjugated by the
/// per-leg column fields; `sum_i b_i = 1`.
#[derive(Debug, Clone)]
pub struct ConstantTupleFields {
    pub legs: PerLegColumnFields,
    /// `xs[i]`: the fixed leg-`i` Hermitian (small).
    pub xs: Vec<HermitianMatrix>,
    pub cube: Vec<Interval>,
}

pub fn constant_tuple_fields(
    seed: u64,
    leg_dims: &[usize],
    nodes: usize,
    cube: &[Interval],
) -> Result<ConstantTupleFields> {
    if cube.len() != leg_dims.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} legs but {} intervals",
            leg_dims.len(),
            cube.len()
        )));
    }
    let legs = per_leg_columns(seed, leg_dims, nodes);
    let mut xrng = stream_rng(seed, streams::FIELD_TUPLES);
    let xs: Vec<HermitianMatrix> = leg_dims
        .iter()
        .enumerate()
        .map(|(i, &d)| random_hermitian_with(&mut xrng, d, cube[i]))
        .collect();
    Ok(ConstantTupleFields {
        legs,
        xs,
        cube: cube.to_vec(),
    })
}

/// Stream indices, one per generator, so sub-draws never alias.
pub mod streams {
    pub const HERMITIAN: u64 = 0x10;
    pub const ABELIAN_TUPLE: u64 = 0x20;
    pub const UNITAL_COLUMN: u64 = 0x30;
    pub const FIELD_WEIGHTS: u64 = 0x40;
    pub const FIELD_COLUMNS: u64 = 0x41;
    pub const FIELD_TUPLES: u64 = 0x1000;
    pub const PAIR_EQ8: u64 = 0x50;
    pub const ORDERED_EQ8: u64 = 0x51;
    pub const PAIR_EQ7: u64 = 0x60;
    pub const ORDERED_SHARED: u64 = 0x70;
    pub const ORDERED_TWO_BASES: u64 = 0x71;
    pub const UNIT_VECTOR: u64 = 0x80;
    pub const STATE: u64 = 0x90;
    pub const QUADRUPLE: u64 = 0xa0;
}

/// Serializable form of a generated field (instances exchange format).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldJson {
    pub weights: Vec<f64>,
    pub columns: Vec<MatrixJson>,
    pub tuples: Option<Vec<Vec<MatrixJson>>>,
}

impl DiscreteField {
    pub fn to_json(&self) -> FieldJson {
        FieldJson {
            weights: self.weights.clone(),
            columns: self.columns.iter().map(MatrixJson::from_complex).collect(),
            tuples: self.tuples.as_ref().map(|ts| {
                ts.iter()
                    .map(|t| {
                        t.members()
                            .iter()
                            .map(|m| MatrixJson::from_complex(m.as_matrix()))
                            .collect()
                    })
                    .collect()
            }),
        }
    }
}
