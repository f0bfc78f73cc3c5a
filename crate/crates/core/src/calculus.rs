//! Scalar functions of `n` variables on a cube and their lift to commuting
//! Hermitian tuples through the joint spectral decomposition.

use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::{HermitianMatrix, Interval, SPECTRUM_SLACK};
use crate::spectral::{eigh, joint_diagonalize_members, AbelianTuple};

type EvalFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type PartialFn = dyn Fn(usize, &[f64]) -> f64 + Send + Sync;

/// Caller-asserted shape metadata; verifiers trust a flag only after the
/// corresponding random probe agrees.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FunctionFlags {
    pub claimed_convex: bool,
    pub claimed_concave: bool,
    pub claimed_monotone_increasing: bool,
}

/// A black-box evaluator on a cube, with optional closed-form partial
/// derivatives. No symbolic representation is kept.
#[derive(Clone)]
pub struct ScalarFunction {
    name: String,
    cube: Vec<Interval>,
    eval: Arc<EvalFn>,
    partials: Option<Arc<PartialFn>>,
    pub flags: FunctionFlags,
}

impl std::fmt::Debug for ScalarFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ScalarFunction")
            .field("name", &self.name)
            .field("arity", &self.arity())
            .field("cube", &self.cube)
            .field("flags", &self.flags)
            .finish()
    }
}

impl ScalarFunction {
    pub fn new(
        name: impl Into<String>,
        cube: Vec<Interval>,
        eval: Arc<EvalFn>,
        partials: Option<Arc<PartialFn>>,
        flags: FunctionFlags,
    ) -> Self {
        ScalarFunction {
            name: name.into(),
            cube,
            eval,
            partials,
            flags,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.cube.len()
    }

    pub fn cube(&self) -> &[Interval] {
        &self.cube
    }

    pub fn has_closed_form_partials(&self) -> bool {
        self.partials.is_some()
    }

    /// Same evaluator on a different cube (flags are kept; the caller is
    /// responsible for their validity on the new domain).
    pub fn with_cube(&self, cube: Vec<Interval>) -> Result<Self> {
        if cube.len() != self.arity() {
            return Err(Error::ArityMismatch {
                expected: self.arity(),
                found: cube.len(),
            });
        }
        Ok(ScalarFunction {
            name: self.name.clone(),
            cube,
            eval: self.eval.clone(),
            partials: self.partials.clone(),
            flags: self.flags,
        })
    }

    /// Drop the closed-form partials, forcing the finite-difference fallback.
    pub fn without_partials(&self) -> Self {
        ScalarFunction {
            name: self.name.clone(),
            cube: self.cube.clone(),
            eval: self.eval.clone(),
            partials: None,
            flags: self.flags,
        }
    }

    pub fn eval(&self, point: &[f64]) -> f64 {
        debug_assert_eq!(point.len(), self.arity());
        (self.eval)(point)
    }

    /// Pointwise product, used by the homomorphism property.
    pub fn pointwise_mul(&self, other: &ScalarFunction) -> Result<ScalarFunction> {
        if self.arity() != other.arity() {
            return Err(Error::ArityMismatch {
                expected: self.arity(),
                found: other.arity(),
            });
        }
        let f = self.eval.clone();
        let g = other.eval.clone();
        Ok(ScalarFunction {
            name: format!("{}*{}", self.name, other.name),
            cube: self.cube.clone(),
            eval: Arc::new(move |p| f(p) * g(p)),
            partials: None,
            flags: FunctionFlags::default(),
        })
    }
}

/// Partial derivative at a point: closed form when available, else a central
/// difference with step `1e-5 * (1 + |point_k|)`, degrading to a one-sided
/// difference against the cube boundary.
pub fn partial_eval(f: &ScalarFunction, k: usize, point: &[f64]) -> Result<f64> {
    if k >= f.arity() || point.len() != f.arity() {
        return Err(Error::ArityMismatch {
            expected: f.arity(),
            found: point.len().max(k + 1),
        });
    }
    if let Some(p) = &f.partials {
        return Ok(p(k, point));
    }
    let h = 1e-5 * (1.0 + point[k].abs());
    let iv = f.cube()[k];
    let up_ok = point[k] + h <= iv.hi;
    let down_ok = point[k] - h >= iv.lo;
    let mut hi = point.to_vec();
    let mut lo = point.to_vec();
    match (up_ok, down_ok) {
        (true, true) => {
            hi[k] += h;
            lo[k] -= h;
            Ok((f.eval(&hi) - f.eval(&lo)) / (2.0 * h))
        }
        (true, false) => {
            hi[k] += h;
            Ok((f.eval(&hi) - f.eval(point)) / h)
        }
        (false, true) => {
            lo[k] -= h;
            Ok((f.eval(point) - f.eval(&lo)) / h)
        }
        // interval narrower than one step: fall back to the full width
        (false, false) => {
            hi[k] = iv.hi;
            lo[k] = iv.lo;
            if iv.width() == 0.0 {
                Ok(0.0)
            } else {
                Ok((f.eval(&hi) - f.eval(&lo)) / iv.width())
            }
        }
    }
}

/// `f(x)` for a one-variable function: eigenvalues are clipped into the
/// domain (slack band only) and mapped through `f` in the eigenbasis of `x`.
pub fn apply_univariate(f: &ScalarFunction, x: &HermitianMatrix) -> Result<HermitianMatrix> {
    if f.arity() != 1 {
        return Err(Error::ArityMismatch {
            expected: 1,
            found: f.arity(),
        });
    }
    let (vals, basis) = eigh(x);
    let iv = f.cube()[0];
    let mapped: Result<Vec<f64>> = vals
        .iter()
        .map(|&v| Ok(f.eval(&[iv.clip(v, SPECTRUM_SLACK)?])))
        .collect();
    let decomp = crate::spectral::JointSpectralDecomposition {
        basis,
        table: vals.iter().map(|&v| vec![v]).collect(),
    };
    Ok(decomp.assemble(&mapped?))
}

/// `f(x_1, ..., x_n)` via the joint spectral decomposition: the table rows
/// are clipped into the cube and mapped through `f`, and the result is
/// assembled in the shared eigenbasis.
pub fn apply_multivariate(f: &ScalarFunction, tuple: &AbelianTuple) -> Result<HermitianMatrix> {
    if f.arity() != tuple.n() {
        return Err(Error::ArityMismatch {
            expected: tuple.n(),
            found: f.arity(),
        });
    }
    let decomp = joint_diagonalize_members(tuple.members())?;
    let values = decomp
        .table
        .iter()
        .map(|row| {
            let clipped: Result<Vec<f64>> = row
                .iter()
                .zip(f.cube().iter())
                .map(|(&v, iv)| iv.clip(v, SPECTRUM_SLACK))
                .collect();
            Ok(f.eval(&clipped?))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(decomp.assemble(&values))
}

/// Sample points of the cube, uniform per coordinate.
fn sample_point(cube: &[Interval], rng: &mut ChaCha8Rng) -> Vec<f64> {
    cube.iter()
        .map(|iv| {
            if iv.width() == 0.0 {
                iv.lo
            } else {
                rng.gen_range(iv.lo..=iv.hi)
            }
        })
        .collect()
}

const PROBE_SAMPLES: usize = 64;
const PROBE_SLACK: f64 = 1e-12;
const PROBE_SEED: u64 = 0x00c0_ffee;

/// Midpoint-convexity spot check on random pairs. A claimed flag is trusted
/// only if this probe agrees.
pub fn probe_convex(f: &ScalarFunction) -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(PROBE_SEED);
    for _ in 0..PROBE_SAMPLES {
        let a = sample_point(f.cube(), &mut rng);
        let b = sample_point(f.cube(), &mut rng);
        let mid: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect();
        let lhs = f.eval(&mid);
        let rhs = 0.5 * (f.eval(&a) + f.eval(&b));
        if !lhs.is_finite() || !rhs.is_finite() {
            return false;
        }
        if lhs > rhs + PROBE_SLACK * (1.0 + lhs.abs() + rhs.abs()) {
            return false;
        }
    }
    true
}

pub fn probe_concave(f: &ScalarFunction) -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(PROBE_SEED ^ 1);
    for _ in 0..PROBE_SAMPLES {
        let a = sample_point(f.cube(), &mut rng);
        let b = sample_point(f.cube(), &mut rng);
        let mid: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect();
        let lhs = f.eval(&mid);
        let rhs = 0.5 * (f.eval(&a) + f.eval(&b));
        if !lhs.is_finite() || !rhs.is_finite() {
            return false;
        }
        if lhs < rhs - PROBE_SLACK * (1.0 + lhs.abs() + rhs.abs()) {
            return false;
        }
    }
    true
}

/// Componentwise-order monotonicity spot check on random ordered pairs.
pub fn probe_monotone_increasing(f: &ScalarFunction) -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(PROBE_SEED ^ 2);
    for _ in 0..PROBE_SAMPLES {
        let a = sample_point(f.cube(), &mut rng);
        let b: Vec<f64> = a
            .iter()
            .zip(f.cube())
            .map(|(&x, iv)| {
                if iv.hi > x {
                    rng.gen_range(x..=iv.hi)
                } else {
                    x
                }
            })
            .collect();
        let fa = f.eval(&a);
        let fb = f.eval(&b);
        if !fa.is_finite() || !fb.is_finite() {
            return false;
        }
        if fa > fb + PROBE_SLACK * (1.0 + fa.abs() + fb.abs()) {
            return false;
        }
    }
    true
}
