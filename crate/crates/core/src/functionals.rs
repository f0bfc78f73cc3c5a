//! Positive trace-like functionals `x -> trace(rho x)`, their centralizers,
//! and the finite-dimensional realizations of the proof objects: the spectral
//! mixture measure, the conditional expectation onto a commuting family's
//! joint-spectrum atoms, and the induced per-atom measures of a field.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::calculus::{apply_multivariate, ScalarFunction};
use crate::error::{Error, Result};
use crate::factory::{DiscreteField, UnitalColumn};
use crate::matrix::{commutator_norm, pair_scale, HermitianMatrix};
use crate::rng::stream_rng;
use crate::spectral::{eigh, joint_diagonalize, AbelianTuple};

/// Atoms with weight below this threshold are regarded as null sets and
/// excluded from every sum (the finite-dimensional "for almost every s").
pub const NULL_ATOM_TOL: f64 = 1e-12;

/// Row-clustering tolerance for merging equal joint eigenvalues into one
/// spectral projection.
const ATOM_CLUSTER_TOL: f64 = 1e-8;

/// A positive functional `phi(x) = trace(rho x)`. The plain trace is
/// `rho = 1`; states have `trace(rho) = 1` but normalization is optional.
#[derive(Debug, Clone)]
pub struct TraceFunctional {
    density: HermitianMatrix,
}

impl TraceFunctional {
    pub fn new(density: HermitianMatrix) -> Result<Self> {
        let min_eig = crate::matrix::min_eigenvalue(&density);
        if min_eig < -1e-12 * (1.0 + density.frobenius()) {
            return Err(Error::NotPositive { min_eig });
        }
        Ok(TraceFunctional { density })
    }

    /// The unnormalized trace on `dim x dim` matrices.
    pub fn trace(dim: usize) -> Self {
        TraceFunctional {
            density: HermitianMatrix::identity(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.density.dim()
    }

    pub fn density(&self) -> &HermitianMatrix {
        &self.density
    }

    /// Total mass `phi(1) = trace(rho)`.
    pub fn total(&self) -> f64 {
        self.density.trace()
    }

    pub fn scale(&self, c: f64) -> Result<Self> {
        if c < 0.0 {
            return Err(Error::InvalidArgument("scale must be nonnegative".into()));
        }
        Ok(TraceFunctional {
            density: self.density.scale(c),
        })
    }

    /// Normalize to a state (`trace(rho) = 1`).
    pub fn normalized(&self) -> Result<Self> {
        let t = self.total();
        if t <= 0.0 {
            return Err(Error::InvalidArgument(
                "cannot normalize the zero functional".into(),
            ));
        }
        self.scale(1.0 / t)
    }

    /// `phi(x) = trace(rho x)`, real by Hermiticity.
    pub fn evaluate(&self, x: &HermitianMatrix) -> Result<f64> {
        let z = self.evaluate_complex(x.as_matrix())?;
        let scale = 1.0 + self.density.frobenius() * x.frobenius();
        if z.im.abs() > 1e-10 * scale {
            return Err(Error::InvalidArgument(format!(
                "imaginary residual {} in a Hermitian pairing",
                z.im
            )));
        }
        Ok(z.re)
    }

    /// `trace(rho m)` for an arbitrary complex matrix.
    pub(crate) fn evaluate_complex(&self, m: &DMatrix<Complex64>) -> Result<Complex64> {
        if m.nrows() != self.dim() || m.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: m.nrows(),
            });
        }
        let rho = self.density.as_matrix();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..self.dim() {
            for k in 0..self.dim() {
                acc += rho[(i, k)] * m[(k, i)];
            }
        }
        Ok(acc)
    }

    /// `Re trace(rho a b)` for Hermitian `a`, `b`. The value is genuinely
    /// real whenever the density commutes with either factor; a substantial
    /// imaginary part is rejected.
    pub fn evaluate_product(&self, a: &HermitianMatrix, b: &HermitianMatrix) -> Result<f64> {
        let z = self.evaluate_complex(&(a.as_matrix() * b.as_matrix()))?;
        let scale = 1.0 + self.density.frobenius() * a.frobenius() * b.frobenius();
        if z.im.abs() > 1e-8 * scale {
            return Err(Error::InvalidArgument(format!(
                "imaginary residual {} in a product pairing",
                z.im
            )));
        }
        Ok(z.re)
    }

    /// Centralizer membership: in finite dimensions `phi(xy) = phi(yx)` for
    /// all `x` iff `[rho, y] = 0`.
    pub fn in_centralizer(&self, y: &HermitianMatrix, tol: f64) -> Result<bool> {
        let norm = commutator_norm(&self.density, y)?;
        Ok(norm <= tol * pair_scale(&self.density, y))
    }

    pub fn centralizer_residual(&self, y: &HermitianMatrix) -> Result<f64> {
        Ok(commutator_norm(&self.density, y)? / pair_scale(&self.density, y))
    }
}

/// A positive functional whose centralizer contains every member of `tuple`:
/// `rho = g(tuple)` for a strictly positive `g` lifted by the multivariate
/// calculus. Seed 0 stream picks the coefficients of `g`.
pub fn centralizing_state(seed: u64, tuple: &AbelianTuple) -> Result<TraceFunctional> {
    let mut rng = stream_rng(seed, crate::factory::streams::STATE);
    use rand::Rng;
    let coeffs: Vec<f64> = (0..tuple.n()).map(|_| rng.gen_range(-0.5..0.5)).collect();
    let g = ScalarFunction::new(
        "centralizing_gauss",
        tuple.cube().to_vec(),
        std::sync::Arc::new(move |p: &[f64]| {
            let s: f64 = p.iter().zip(&coeffs).map(|(v, c)| v * c).sum();
            let q: f64 = p.iter().map(|v| v * v).sum();
            (s - 0.25 * q).exp()
        }),
        None,
        Default::default(),
    );
    let rho = apply_multivariate(&g, tuple)?;
    TraceFunctional::new(rho)?.normalized()
}

/// Discrete measure on the real line.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AtomicMeasure1D {
    pub atoms: Vec<Atom1D>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Atom1D {
    pub point: f64,
    pub mass: f64,
}

impl AtomicMeasure1D {
    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum()
    }

    pub fn barycenter(&self) -> f64 {
        self.atoms.iter().map(|a| a.point * a.mass).sum()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.atoms.iter().map(|a| f(a.point) * a.mass).sum()
    }
}

/// Discrete measure on a cube.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AtomicMeasureND {
    pub atoms: Vec<AtomND>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AtomND {
    pub point: Vec<f64>,
    pub mass: f64,
}

impl AtomicMeasureND {
    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum()
    }

    /// First moment of coordinate `i`.
    pub fn moment(&self, i: usize) -> f64 {
        self.atoms.iter().map(|a| a.point[i] * a.mass).sum()
    }

    pub fn integrate(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        self.atoms.iter().map(|a| f(&a.point) * a.mass).sum()
    }
}

/// The spectral mixture measure of a unit vector under a unital column:
/// atoms at the eigenvalues of the `x_k`, with mass `sum_k (E_k(l) a_k v | a_k v)`.
/// Its total mass is 1 and its barycenter is `(y v | v)` for
/// `y = sum_k a_k* x_k a_k`.
pub fn spectral_mixture_measure(
    xs: &[HermitianMatrix],
    column: &UnitalColumn,
    xi: &DVector<Complex64>,
) -> Result<AtomicMeasure1D> {
    if xs.len() != column.m() {
        return Err(Error::ShapeMismatch(format!(
            "{} matrices vs {} column blocks",
            xs.len(),
            column.m()
        )));
    }
    let norm = xi.norm();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::NonUnitVector { norm });
    }
    let mut atoms: Vec<Atom1D> = Vec::new();
    for (x, a) in xs.iter().zip(column.blocks()) {
        if x.dim() != column.dim() {
            return Err(Error::DimensionMismatch {
                expected: column.dim(),
                found: x.dim(),
            });
        }
        let v = a * xi;
        let (vals, basis) = eigh(x);
        for (j, &lambda) in vals.iter().enumerate() {
            let overlap = basis.column(j).dotc(&v).norm_sqr();
            atoms.push(Atom1D {
                point: lambda,
                mass: overlap,
            });
        }
    }
    // merge atoms at coinciding eigenvalues
    atoms.sort_by(|a, b| a.point.partial_cmp(&b.point).unwrap());
    let mut merged: Vec<Atom1D> = Vec::new();
    for atom in atoms {
        match merged.last_mut() {
            Some(last) if (atom.point - last.point).abs() <= 1e-12 * (1.0 + last.point.abs()) => {
                last.mass += atom.mass;
            }
            _ => merged.push(atom),
        }
    }
    Ok(AtomicMeasure1D { atoms: merged })
}

/// One atom of the joint spectrum: the eigenvalue vector, its spectral
/// projection (equal table rows merged), and its weight under the functional.
#[derive(Debug, Clone)]
pub struct SpectralAtom {
    pub point: Vec<f64>,
    pub projection: HermitianMatrix,
    pub weight: f64,
}

/// The conditional expectation onto the commutative algebra generated by an
/// abelian tuple, compatible with a positive functional containing the tuple
/// in its centralizer.
///
/// On each non-null atom `P_j` it takes the value
/// `phi(P_j x) / phi(P_j)`, and the atom weights `phi(P_j)` realize the
/// measure that represents `phi` on the joint spectrum.
#[derive(Debug, Clone)]
pub struct ConditionalExpectation {
    functional: TraceFunctional,
    atoms: Vec<SpectralAtom>,
}

/// Centralizer tolerance used when building conditional expectations.
pub const CENTRALIZER_TOL: f64 = 1e-9;

impl ConditionalExpectation {
    /// Builds the atoms of `tuple`'s joint spectrum and their weights.
    /// Errors if some member is not in the centralizer of `phi`, or if every
    /// atom is null.
    pub fn new(phi: &TraceFunctional, tuple: &AbelianTuple) -> Result<Self> {
        for m in tuple.members() {
            let resid = phi.centralizer_residual(m)?;
            if resid > CENTRALIZER_TOL {
                return Err(Error::CentralizerViolation {
                    norm: resid,
                    tol: CENTRALIZER_TOL,
                });
            }
        }
        let decomp = joint_diagonalize(tuple)?;
        let clusters = cluster_rows(&decomp.table);
        let mut atoms = Vec::with_capacity(clusters.len());
        for cluster in clusters {
            let mut proj = DMatrix::<Complex64>::zeros(tuple.dim(), tuple.dim());
            for &row in &cluster {
                let col = decomp.basis.column(row);
                proj += &col * col.adjoint();
            }
            let projection = HermitianMatrix::new(proj).expect("finite projection");
            let weight = phi.evaluate(&projection)?;
            let point = average_rows(&decomp.table, &cluster);
            atoms.push(SpectralAtom {
                point,
                projection,
                weight,
            });
        }
        if atoms.iter().all(|a| a.weight <= NULL_ATOM_TOL) {
            return Err(Error::AllAtomsNull);
        }
        Ok(ConditionalExpectation {
            functional: phi.clone(),
            atoms,
        })
    }

    pub fn atoms(&self) -> &[SpectralAtom] {
        &self.atoms
    }

    /// Indices of the atoms with nonnull weight.
    pub fn active(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.atoms.len()).filter(|&j| self.atoms[j].weight > NULL_ATOM_TOL)
    }

    /// The measure `j -> phi(P_j)` on the joint spectrum (all atoms).
    pub fn base_measure(&self) -> AtomicMeasureND {
        AtomicMeasureND {
            atoms: self
                .atoms
                .iter()
                .map(|a| AtomND {
                    point: a.point.clone(),
                    mass: a.weight,
                })
                .collect(),
        }
    }

    /// `Phi(x)` as values on the non-null atoms: pairs `(atom index, value)`.
    pub fn apply(&self, x: &HermitianMatrix) -> Result<Vec<(usize, f64)>> {
        let mut out = Vec::new();
        for j in self.active() {
            let atom = &self.atoms[j];
            let pjx = atom.projection.as_matrix() * x.as_matrix();
            let z = self.functional.evaluate_complex(&pjx)?;
            let scale = 1.0 + self.functional.density().frobenius() * x.frobenius();
            if z.im.abs() > 1e-8 * scale {
                return Err(Error::InvalidArgument(format!(
                    "conditional expectation picked up imaginary mass {}",
                    z.im
                )));
            }
            out.push((j, z.re / atom.weight));
        }
        Ok(out)
    }

    /// Pair `Phi(x)` against a table-valued `z` (one value per atom) under
    /// the base measure: `sum_j z_j Phi(x)(j) phi(P_j)`.
    pub fn pair(&self, z_values: &[f64], x: &HermitianMatrix) -> Result<f64> {
        if z_values.len() != self.atoms.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} atom values vs {} atoms",
                z_values.len(),
                self.atoms.len()
            )));
        }
        let phi_x = self.apply(x)?;
        Ok(phi_x
            .iter()
            .map(|&(j, v)| z_values[j] * v * self.atoms[j].weight)
            .sum())
    }
}

fn cluster_rows(table: &[Vec<f64>]) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..table.len()).collect();
    order.sort_by(|&a, &b| table[a].partial_cmp(&table[b]).unwrap());
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for &row in &order {
        let fits = clusters.last().map_or(false, |cluster| {
            let rep = &table[cluster[0]];
            table[row]
                .iter()
                .zip(rep)
                .all(|(a, b)| (a - b).abs() <= ATOM_CLUSTER_TOL * (1.0 + b.abs()))
        });
        if fits {
            clusters.last_mut().unwrap().push(row);
        } else {
            clusters.push(vec![row]);
        }
    }
    clusters
}

fn average_rows(table: &[Vec<f64>], rows: &[usize]) -> Vec<f64> {
    let n = table[0].len();
    let mut out = vec![0.0; n];
    for &r in rows {
        for i in 0..n {
            out[i] += table[r][i];
        }
    }
    for v in &mut out {
        *v /= rows.len() as f64;
    }
    out
}

/// The per-atom measures a field induces on the cube: for each non-null atom
/// `j` of the integrated tuple's joint spectrum, a probability measure whose
/// atoms are the node tuples' joint eigenvalues with masses
/// `Phi(w_t a_t* Q_{t,r} a_t)(j)`.
///
/// Whenever the field integrates to the given tuple, the measure has total
/// mass 1 and its first moments reproduce `Phi(y_i)(j)`.
pub fn induced_measures(
    phi: &TraceFunctional,
    integrated: &AbelianTuple,
    field: &DiscreteField,
) -> Result<Vec<(usize, AtomicMeasureND)>> {
    // the supplied tuple must be the field's own integral
    let recomputed = field.integrated_members()?;
    if recomputed.len() != integrated.n() {
        return Err(Error::ShapeMismatch(format!(
            "field integrates to {} members, tuple has {}",
            recomputed.len(),
            integrated.n()
        )));
    }
    for (got, want) in recomputed.iter().zip(integrated.members()) {
        let resid = got.sub(want)?.frobenius();
        if resid > 1e-9 * (1.0 + want.frobenius()) {
            return Err(Error::InvalidArgument(format!(
                "tuple is not the field integral (residual {resid:.3e})"
            )));
        }
    }
    let cond = ConditionalExpectation::new(phi, integrated)?;
    // node-level spectral atoms
    let mut node_atoms: Vec<(usize, SpectralAtom)> = Vec::new();
    for t in 0..field.nodes() {
        let tuple = field.tuple(t)?;
        let decomp = joint_diagonalize(tuple)?;
        for cluster in cluster_rows(&decomp.table) {
            let mut proj = DMatrix::<Complex64>::zeros(tuple.dim(), tuple.dim());
            for &row in &cluster {
                let col = decomp.basis.column(row);
                proj += &col * col.adjoint();
            }
            node_atoms.push((
                t,
                SpectralAtom {
                    point: average_rows(&decomp.table, &cluster),
                    projection: HermitianMatrix::new(proj).expect("finite"),
                    weight: 0.0,
                },
            ));
        }
    }
    let mut out = Vec::new();
    for j in cond.active() {
        let mut atoms = Vec::with_capacity(node_atoms.len());
        for (t, na) in &node_atoms {
            let conjugated = na
                .projection
                .conjugate_by(field.column(*t))?
                .scale(field.weights()[*t]);
            let values = cond.apply(&conjugated)?;
            let mass = values
                .iter()
                .find(|(idx, _)| idx == &j)
                .map(|&(_, v)| v)
                .unwrap_or(0.0);
            atoms.push(AtomND {
                point: na.point.clone(),
                mass,
            });
        }
        out.push((j, AtomicMeasureND { atoms }));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::factory::{
        random_abelian_tuple, random_field, random_hermitian, random_unital_column,
    };
    use crate::matrix::Interval;
    use crate::rng::random_unit_vector;

    #[test]
    fn evaluate_examples() {
        let phi = TraceFunctional::trace(2);
        assert_eq!(
            phi.evaluate(&HermitianMatrix::diagonal(&[1.0, 2.0]))
                .unwrap(),
            3.0
        );
        let zero = TraceFunctional::new(HermitianMatrix::zeros(2)).unwrap();
        assert_eq!(zero.evaluate(&HermitianMatrix::zeros(2)).unwrap(), 0.0);
    }

    #[test]
    fn evaluate_matches_direct_summation() {
        let rho_raw = random_hermitian(41, 5, Interval::new(0.0, 1.0));
        let phi = TraceFunctional::new(rho_raw.clone()).unwrap();
        let x = random_hermitian(42, 5, Interval::new(-1.0, 1.0));
        let got = phi.evaluate(&x).unwrap();
        // independent oracle: direct double sum over entries
        let mut want = Complex64::new(0.0, 0.0);
        for j in 0..5 {
            for k in 0..5 {
                want += rho_raw.as_matrix()[(j, k)] * x.as_matrix()[(k, j)];
            }
        }
        assert!((got - want.re).abs() <= 1e-12 * (1.0 + want.re.abs()));
        assert!(want.im.abs() <= 1e-12);
    }

    #[test]
    fn positivity_spot_check() {
        let phi = TraceFunctional::new(random_hermitian(43, 4, Interval::new(0.0, 2.0))).unwrap();
        for seed in 0..20 {
            let mut rng = stream_rng(seed, 0x5005);
            let g = crate::rng::gaussian_complex(&mut rng, 4, 4);
            let xx = HermitianMatrix::new(&g.adjoint() * &g).unwrap();
            let v = phi.evaluate(&xx).unwrap();
            assert!(v >= -1e-10 * (1.0 + phi.density().frobenius() * xx.frobenius()));
        }
    }

    #[test]
    fn rejects_negative_density() {
        assert!(TraceFunctional::new(HermitianMatrix::diagonal(&[1.0, -0.5])).is_err());
    }

    #[test]
    fn centralizer_examples() {
        let y = random_hermitian(44, 4, Interval::new(-1.0, 1.0));
        // the trace contains everything
        let tau = TraceFunctional::trace(4);
        assert!(tau.in_centralizer(&y, 1e-12).unwrap());
        // rho = y^2 + 1 commutes with y
        let y2 = HermitianMatrix::new(y.as_matrix() * y.as_matrix())
            .unwrap()
            .shift(1.0);
        let phi = TraceFunctional::new(y2).unwrap();
        assert!(phi.in_centralizer(&y, 1e-12).unwrap());
        // independent random density: generically not
        let rho = random_hermitian(45, 4, Interval::new(0.0, 1.0));
        let psi = TraceFunctional::new(rho).unwrap();
        assert!(!psi.in_centralizer(&y, 1e-10).unwrap());
    }

    #[test]
    fn centralizing_state_centralizes() {
        let cube = [Interval::new(-1.0, 1.0), Interval::new(0.0, 1.0)];
        let t = random_abelian_tuple(46, 5, 2, &cube);
        let phi = centralizing_state(47, &t).unwrap();
        for m in t.members() {
            assert!(phi.centralizer_residual(m).unwrap() <= 1e-10);
        }
        assert!((phi.total() - 1.0).abs() < 1e-12);
        assert!(crate::matrix::min_eigenvalue(phi.density()) > 0.0);
    }

    #[test]
    fn mixture_measure_point_mass_for_eigenvector() {
        // m = 1, a = 1, xi an eigenvector of x: point mass at its eigenvalue
        let x = HermitianMatrix::diagonal(&[0.25, 0.75]);
        let column = UnitalColumn::new(vec![DMatrix::identity(2, 2)]).unwrap();
        let xi = DVector::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
        let mu = spectral_mixture_measure(&[x], &column, &xi).unwrap();
        assert!((mu.total_mass() - 1.0).abs() < 1e-12);
        assert!((mu.barycenter() - 0.25).abs() < 1e-12);
        let heavy: Vec<_> = mu.atoms.iter().filter(|a| a.mass > 1e-12).collect();
        assert_eq!(heavy.len(), 1);
        assert!((heavy[0].point - 0.25).abs() < 1e-12);
    }

    #[test]
    fn mixture_measure_mass_and_barycenter() {
        let m = 3;
        let dim = 5;
        let column = random_unital_column(48, m, dim);
        let xs: Vec<HermitianMatrix> = (0..m)
            .map(|k| random_hermitian(50 + k as u64, dim, Interval::new(-1.0, 1.0)))
            .collect();
        let mut rng = stream_rng(49, crate::factory::streams::UNIT_VECTOR);
        let xi = random_unit_vector(&mut rng, dim);
        let mu = spectral_mixture_measure(&xs, &column, &xi).unwrap();
        assert!((mu.total_mass() - 1.0).abs() <= 1e-10);
        // barycenter against (y xi | xi), built the straightforward way
        let mut y = DMatrix::<Complex64>::zeros(dim, dim);
        for (x, a) in xs.iter().zip(column.blocks()) {
            y += a.adjoint() * x.as_matrix() * a;
        }
        let want = (&y * &xi).dotc(&xi).re;
        assert!((mu.barycenter() - want).abs() <= 1e-10 * (1.0 + want.abs()));
    }

    #[test]
    fn conditional_expectation_unital_and_algebra_values() {
        let cube = [Interval::new(-1.0, 1.0), Interval::new(0.0, 1.0)];
        let t = random_abelian_tuple(51, 5, 2, &cube);
        let phi = centralizing_state(52, &t).unwrap();
        let cond = ConditionalExpectation::new(&phi, &t).unwrap();

        // Phi(1) = 1
        for (_, v) in cond.apply(&HermitianMatrix::identity(5)).unwrap() {
            assert!((v - 1.0).abs() <= 1e-9);
        }

        // x in the algebra of the tuple: values are the joint-spectrum values
        let f = catalog::get("square", 2)
            .unwrap()
            .with_cube(t.cube().to_vec())
            .unwrap();
        let fx = apply_multivariate(&f, &t).unwrap();
        for (j, v) in cond.apply(&fx).unwrap() {
            let pt = &cond.atoms()[j].point;
            let want = f.eval(pt);
            assert!(
                (v - want).abs() <= 1e-8 * (1.0 + want.abs()),
                "atom {j}: {v} vs {want}"
            );
        }
    }

    #[test]
    fn conditional_expectation_module_property_and_bound() {
        let cube = [Interval::new(-1.0, 1.0), Interval::new(0.0, 1.0)];
        let t = random_abelian_tuple(53, 6, 2, &cube);
        let phi = centralizing_state(54, &t).unwrap();
        let cond = ConditionalExpectation::new(&phi, &t).unwrap();
        let x = random_hermitian(55, 6, Interval::new(-2.0, 2.0));

        // z = y_1: sum_j z(j) Phi(x)(j) mu(j) == phi(y_1 x)
        let z_values: Vec<f64> = cond.atoms().iter().map(|a| a.point[0]).collect();
        let lhs = cond.pair(&z_values, &x).unwrap();
        let y1x = t.member(0).as_matrix() * x.as_matrix();
        let rhs = phi.evaluate_complex(&y1x).unwrap().re;
        assert!(
            (lhs - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()),
            "{lhs} vs {rhs}"
        );

        // contractivity |Phi(x)| <= |x|
        let op_norm = crate::spectral::eigenvalues(&x)
            .iter()
            .map(|v| v.abs())
            .fold(0.0, f64::max);
        for (_, v) in cond.apply(&x).unwrap() {
            assert!(v.abs() <= op_norm + 1e-9);
        }
    }

    #[test]
    fn conditional_expectation_positivity_and_pinching() {
        let cube = [Interval::new(0.0, 1.0)];
        let t = random_abelian_tuple(56, 5, 1, &cube);
        // tracial case: Phi(x)(j) = trace(P_j x) / rank(P_j)
        let tau = TraceFunctional::trace(5);
        let cond = ConditionalExpectation::new(&tau, &t).unwrap();
        let x = random_hermitian(57, 5, Interval::new(0.0, 2.0));
        for (j, v) in cond.apply(&x).unwrap() {
            assert!(v >= -1e-10, "positivity violated: {v}");
            let pj = &cond.atoms()[j].projection;
            let rank = pj.trace().round();
            let pinched = (pj.as_matrix() * x.as_matrix()).trace().re / rank;
            assert!((v - pinched).abs() <= 1e-10 * (1.0 + pinched.abs()));
        }
    }

    #[test]
    fn conditional_expectation_rejects_non_centralizing() {
        let cube = [Interval::new(-1.0, 1.0)];
        let t = random_abelian_tuple(58, 4, 1, &cube);
        let rho = random_hermitian(59, 4, Interval::new(0.0, 1.0));
        let phi = TraceFunctional::new(rho).unwrap();
        assert!(matches!(
            ConditionalExpectation::new(&phi, &t),
            Err(Error::CentralizerViolation { .. })
        ));
    }

    #[test]
    fn induced_measures_single_node_point_masses() {
        // one node, a = 1: the induced measure at each atom is the point mass
        // at that atom's own joint eigenvalue
        let cube = [Interval::new(-1.0, 1.0), Interval::new(0.0, 1.0)];
        let t = random_abelian_tuple(60, 4, 2, &cube);
        let field = DiscreteField::new(
            vec![1.0],
            vec![DMatrix::identity(4, 4)],
            Some(vec![t.clone()]),
        )
        .unwrap();
        let phi = centralizing_state(61, &t).unwrap();
        let measures = induced_measures(&phi, &t, &field).unwrap();
        let cond = ConditionalExpectation::new(&phi, &t).unwrap();
        for (j, mu) in &measures {
            assert!((mu.total_mass() - 1.0).abs() <= 1e-9);
            let own = &cond.atoms()[*j].point;
            // mass concentrates on this atom's point
            for atom in &mu.atoms {
                let same = atom
                    .point
                    .iter()
                    .zip(own)
                    .all(|(a, b)| (a - b).abs() <= 1e-7 * (1.0 + b.abs()));
                if !same {
                    assert!(atom.mass.abs() <= 1e-9, "foreign mass {}", atom.mass);
                }
            }
        }
    }

    #[test]
    fn induced_measures_mass_and_moments() {
        // tensor-leg field: the integrated members commute by structure
        let cube = [Interval::new(-1.0, 1.0), Interval::new(0.0, 1.0)];
        let tensor = crate::factory::tensor_leg_field(62, &[2, 3], 3, &cube, false).unwrap();
        let field = &tensor.field;
        let members = field.integrated_members().unwrap();
        let y = AbelianTuple::new(members, cube.to_vec()).unwrap();
        let phi = centralizing_state(63, &y).unwrap();
        let measures = induced_measures(&phi, &y, field).unwrap();
        assert!(!measures.is_empty());
        let cond = ConditionalExpectation::new(&phi, &y).unwrap();
        for (j, mu) in &measures {
            assert!(
                (mu.total_mass() - 1.0).abs() <= 1e-9,
                "mass {}",
                mu.total_mass()
            );
            for i in 0..2 {
                let want = cond.atoms()[*j].point[i];
                assert!(
                    (mu.moment(i) - want).abs() <= 1e-9 * (1.0 + want.abs()),
                    "moment {i} of atom {j}: {} vs {want}",
                    mu.moment(i)
                );
            }
        }
    }
}
