//! Monotone trace functions: the convex/concave-branch order check, the
//! compatible-path machinery with its derivative formula, the exponential's
//! directional derivative, the two-factor product monotonicity, and the
//! randomized search on the open three-factor question.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::calculus::{
    apply_multivariate, partial_eval, probe_concave, probe_convex, probe_monotone_increasing,
    ScalarFunction,
};
use crate::error::{Error, Result};
use crate::factory::{ordered_pair_shared_basis, ordered_pair_two_bases};
use crate::functionals::{TraceFunctional, CENTRALIZER_TOL};
use crate::matrix::{min_eigenvalue, HermitianMatrix, Interval, MatrixJson};
use crate::report::InequalityReport;
use crate::rng::InstanceManifest;
use crate::spectral::{compatibility_residual, eigh, AbelianTuple, ABELIAN_TOL};
use crate::verifiers::VerifierOptions;

const ORDER_TOL: f64 = 1e-9;

type Precondition = std::result::Result<(), String>;

fn require_ordered(x: &AbelianTuple, y: &AbelianTuple) -> Precondition {
    if x.n() != y.n() || x.dim() != y.dim() {
        return Err("tuple shapes differ".into());
    }
    for i in 0..x.n() {
        if !crate::matrix::psd_leq(x.member(i), y.member(i), ORDER_TOL)
            .map_err(|e| e.to_string())?
        {
            return Err(format!(
                "order violation: x_{} is not below y_{}",
                i + 1,
                i + 1
            ));
        }
    }
    Ok(())
}

fn require_increasing(f: &ScalarFunction) -> Precondition {
    if !f.flags.claimed_monotone_increasing {
        return Err(format!("function `{}` is not flagged increasing", f.name()));
    }
    if !probe_monotone_increasing(f) {
        return Err(format!(
            "function `{}` claims monotonicity but the probe disagrees",
            f.name()
        ));
    }
    Ok(())
}

fn require_spectra_in_cube(t: &AbelianTuple, cube: &[Interval], what: &str) -> Precondition {
    for i in 0..t.n() {
        for v in crate::spectral::eigenvalues(t.member(i)) {
            if cube[i].clip(v, crate::matrix::SPECTRUM_SLACK).is_err() {
                return Err(format!(
                    "{what}: eigenvalue {v} of member {} outside [{}, {}]",
                    i + 1,
                    cube[i].lo,
                    cube[i].hi
                ));
            }
        }
    }
    Ok(())
}

/// Order monotonicity under a positive functional, by curvature branch:
/// convex `f` needs the lower tuple in the centralizer, concave `f` the
/// upper one. Checks `phi(f(x)) <= phi(f(y))` for `x_i <= y_i`.
pub fn monotone_trace_check(
    f: &ScalarFunction,
    x: &AbelianTuple,
    y: &AbelianTuple,
    phi: &TraceFunctional,
    opts: VerifierOptions,
) -> Result<InequalityReport> {
    const ID: &str = "thm16";
    const REF: &str = "theorem-16";
    let pre = (|| -> Precondition {
        if f.arity() != x.n() {
            return Err(format!(
                "function arity {} vs tuple size {}",
                f.arity(),
                x.n()
            ));
        }
        require_increasing(f)?;
        require_ordered(x, y)?;
        require_spectra_in_cube(x, f.cube(), "lower tuple")?;
        require_spectra_in_cube(y, f.cube(), "upper tuple")?;
        let convex = f.flags.claimed_convex && probe_convex(f);
        let concave = f.flags.claimed_concave && probe_concave(f);
        if convex {
            for (i, m) in x.members().iter().enumerate() {
                let resid = phi.centralizer_residual(m).map_err(|e| e.to_string())?;
                if resid > CENTRALIZER_TOL {
                    return Err(format!(
                        "convex branch: x_{} is not in the centralizer (residual {resid:.3e})",
                        i + 1
                    ));
                }
            }
        } else if concave {
            for (i, m) in y.members().iter().enumerate() {
                let resid = phi.centralizer_residual(m).map_err(|e| e.to_string())?;
                if resid > CENTRALIZER_TOL {
                    return Err(format!(
                        "concave branch: y_{} is not in the centralizer (residual {resid:.3e})",
                        i + 1
                    ));
                }
            }
        } else {
            return Err(format!(
                "function `{}` is neither convex nor concave; no branch applies",
                f.name()
            ));
        }
        Ok(())
    })();
    if let Err(reason) = pre {
        return Ok(InequalityReport::precondition_failed(
            ID, REF, reason, opts.tol,
        ));
    }

    let lhs = phi.evaluate(&apply_multivariate(f, x)?)?;
    let rhs = phi.evaluate(&apply_multivariate(f, y)?)?;
    Ok(InequalityReport::inequality(ID, REF, lhs, rhs, opts.tol))
}

/// The partial of `f` in slot `k`, as a scalar function on the same cube.
fn partial_function(f: &ScalarFunction, k: usize) -> ScalarFunction {
    let inner = f.clone();
    ScalarFunction::new(
        format!("d{}_{}", k + 1, f.name()),
        f.cube().to_vec(),
        Arc::new(move |p: &[f64]| partial_eval(&inner, k, p).unwrap_or(f64::NAN)),
        None,
        Default::default(),
    )
}

/// Derivative of `t -> phi(f(x + t h))` along a compatible direction:
/// `sum_k phi(f'_k(z) h_k)` with `z = x + t h`. Requires the centralizer of
/// `phi` to contain both endpoints (hence the whole segment).
pub fn path_derivative(
    f: &ScalarFunction,
    x: &AbelianTuple,
    h: &[HermitianMatrix],
    t: f64,
    phi: &TraceFunctional,
) -> Result<f64> {
    let n = x.n();
    if h.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "{} directions vs n={n}",
            h.len()
        )));
    }
    let shifted = AbelianTuple::with_spectral_cube(
        x.members()
            .iter()
            .zip(h)
            .map(|(xm, hm)| xm.add(hm))
            .collect::<Result<_>>()?,
    )?;
    let (ok, worst) = compatibility_residual(x, &shifted, ABELIAN_TOL)?;
    if !ok {
        return Err(Error::NotCompatible {
            residual: worst,
            tol: ABELIAN_TOL,
        });
    }
    for m in x.members().iter().chain(shifted.members()) {
        let resid = phi.centralizer_residual(m)?;
        if resid > CENTRALIZER_TOL {
            return Err(Error::CentralizerViolation {
                norm: resid,
                tol: CENTRALIZER_TOL,
            });
        }
    }
    let z_members: Vec<HermitianMatrix> = x
        .members()
        .iter()
        .zip(h)
        .map(|(xm, hm)| xm.add(&hm.scale(t)))
        .collect::<Result<_>>()?;
    let z = AbelianTuple::new(z_members, f.cube().to_vec())?;
    let mut total = 0.0;
    for k in 0..n {
        let fk = partial_function(f, k);
        let fk_z = apply_multivariate(&fk, &z)?;
        let prod = fk_z.as_matrix() * h[k].as_matrix();
        let val = phi.evaluate_complex(&prod)?;
        let scale = 1.0 + fk_z.frobenius() * h[k].frobenius();
        if val.im.abs() > 1e-8 * scale {
            return Err(Error::InvalidArgument(format!(
                "path derivative picked up imaginary mass {}",
                val.im
            )));
        }
        total += val.re;
    }
    Ok(total)
}

/// Monotonicity along the segment between ordered compatible tuples:
/// `g(t) = phi(f((1-t)x + t y))` must be nondecreasing across the grid and
/// the path derivative must stay above `-tol * scale` at every grid point.
/// The report's `rhs` is the worst margin over both checks (`lhs = 0`).
pub fn path_monotonicity_check(
    f: &ScalarFunction,
    x: &AbelianTuple,
    y: &AbelianTuple,
    phi: &TraceFunctional,
    grid: &[f64],
    opts: VerifierOptions,
) -> Result<InequalityReport> {
    const ID: &str = "prop18";
    const REF: &str = "proposition-18";
    let pre = (|| -> Precondition {
        if grid.len() < 2 {
            return Err("grid needs at least two points".into());
        }
        if f.arity() != x.n() {
            return Err(format!(
                "function arity {} vs tuple size {}",
                f.arity(),
                x.n()
            ));
        }
        require_increasing(f)?;
        require_ordered(x, y)?;
        let (ok, worst) = compatibility_residual(x, y, ABELIAN_TOL).map_err(|e| e.to_string())?;
        if !ok {
            return Err(format!("tuples are not compatible (residual {worst:.3e})"));
        }
        require_spectra_in_cube(x, f.cube(), "lower tuple")?;
        require_spectra_in_cube(y, f.cube(), "upper tuple")?;
        for (i, m) in x.members().iter().chain(y.members()).enumerate() {
            let resid = phi.centralizer_residual(m).map_err(|e| e.to_string())?;
            if resid > CENTRALIZER_TOL {
                return Err(format!(
                    "member {} is not in the centralizer (residual {resid:.3e})",
                    i + 1
                ));
            }
        }
        Ok(())
    })();
    if let Err(reason) = pre {
        return Ok(InequalityReport::precondition_failed(
            ID, REF, reason, opts.tol,
        ));
    }

    let h: Vec<HermitianMatrix> = y
        .members()
        .iter()
        .zip(x.members())
        .map(|(ym, xm)| ym.sub(xm))
        .collect::<Result<_>>()?;
    let mut values = Vec::with_capacity(grid.len());
    let mut worst_derivative = f64::INFINITY;
    let scale = 1.0
        + x.members()
            .iter()
            .map(|m| m.frobenius())
            .fold(0.0, f64::max)
            * y.members()
                .iter()
                .map(|m| m.frobenius())
                .fold(0.0, f64::max);
    for &t in grid {
        let z_members: Vec<HermitianMatrix> = x
            .members()
            .iter()
            .zip(&h)
            .map(|(xm, hm)| xm.add(&hm.scale(t)))
            .collect::<Result<_>>()?;
        let z = AbelianTuple::new(z_members, f.cube().to_vec())?;
        values.push(phi.evaluate(&apply_multivariate(f, &z)?)?);
        let d = path_derivative(f, x, &h, t, phi)?;
        worst_derivative = worst_derivative.min(d / scale);
    }
    let worst_increment = values
        .windows(2)
        .map(|w| (w[1] - w[0]) / (1.0 + w[0].abs()))
        .fold(f64::INFINITY, f64::min);
    let margin = worst_increment.min(worst_derivative);
    Ok(
        InequalityReport::inequality(ID, REF, 0.0, margin, 1e-8).with_metadata(serde_json::json!({
            "endpoint-lhs": values.first(),
            "endpoint-rhs": values.last(),
            "worst-increment": worst_increment,
            "worst-derivative": worst_derivative,
        })),
    )
}

/// Directional derivative of the matrix exponential,
/// `lim eps^-1 (exp(a + eps b) - exp(a))`, via the eigenbasis closed form:
/// entries are multiplied by the divided difference of `exp` at the
/// corresponding eigenvalue pair.
pub fn exp_directional_derivative(
    a: &HermitianMatrix,
    b: &HermitianMatrix,
) -> Result<HermitianMatrix> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let (vals, basis) = eigh(a);
    let b_rot = basis.adjoint() * b.as_matrix() * &basis;
    let dim = a.dim();
    let mut out = DMatrix::<Complex64>::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            out[(i, j)] = b_rot[(i, j)] * exp_divided_difference(vals[i], vals[j]);
        }
    }
    Ok(HermitianMatrix::new(&basis * out * basis.adjoint())?)
}

/// `(e^x - e^y) / (x - y)` with the removable singularity filled by `e^x`.
fn exp_divided_difference(x: f64, y: f64) -> f64 {
    let d = x - y;
    if d.abs() < 1e-8 * (1.0 + x.abs()) {
        // first-order correction keeps the seam smooth
        ((x + y) * 0.5).exp()
    } else {
        // exp(y) expm1(d)/d avoids cancellation for moderate d
        y.exp() * d.exp_m1() / d
    }
}

/// Matrix exponential of a Hermitian matrix through its eigenbasis.
pub fn matrix_exp(a: &HermitianMatrix) -> HermitianMatrix {
    let (vals, basis) = eigh(a);
    let decomp = crate::spectral::JointSpectralDecomposition {
        basis,
        table: vals.iter().map(|&v| vec![v]).collect(),
    };
    decomp.assemble(&vals.iter().map(|&v| v.exp()).collect::<Vec<_>>())
}

/// Two-factor trace monotonicity: `tau(x1 y1) <= tau(x2 y2)` for positive
/// `x1 <= x2`, `y1 <= y2` and any trace, with no commutation assumptions.
pub fn two_factor_monotone(
    x1: &HermitianMatrix,
    y1: &HermitianMatrix,
    x2: &HermitianMatrix,
    y2: &HermitianMatrix,
    tau: &TraceFunctional,
    opts: VerifierOptions,
) -> Result<InequalityReport> {
    const ID: &str = "two_factor";
    const REF: &str = "remark-17";
    let pre = (|| -> Precondition {
        for (m, name) in [(x1, "x1"), (y1, "y1"), (x2, "x2"), (y2, "y2")] {
            if min_eigenvalue(m) < -ORDER_TOL * (1.0 + m.frobenius()) {
                return Err(format!("{name} is not positive semidefinite"));
            }
        }
        if !crate::matrix::psd_leq(x1, x2, ORDER_TOL).map_err(|e| e.to_string())? {
            return Err("order violation: x1 is not below x2".into());
        }
        if !crate::matrix::psd_leq(y1, y2, ORDER_TOL).map_err(|e| e.to_string())? {
            return Err("order violation: y1 is not below y2".into());
        }
        let dim = tau.dim() as f64;
        let mean = tau.density().trace() / dim;
        if tau.density().shift(-mean).frobenius() > 1e-10 * (1.0 + tau.density().frobenius()) {
            return Err("functional is not a trace (density is not central)".into());
        }
        Ok(())
    })();
    if let Err(reason) = pre {
        return Ok(InequalityReport::precondition_failed(
            ID, REF, reason, opts.tol,
        ));
    }
    let lhs = tau.evaluate_complex(&(x1.as_matrix() * y1.as_matrix()))?.re;
    let rhs = tau.evaluate_complex(&(x2.as_matrix() * y2.as_matrix()))?.re;
    Ok(InequalityReport::inequality(ID, REF, lhs, rhs, opts.tol))
}

/// Which sampling regime the three-factor search runs in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchArm {
    /// Ordered positive abelian triples in unrelated eigenbases; the open
    /// regime.
    General,
    /// Ordered triples sharing one eigenbasis (compatible); the theorem
    /// applies, so this arm must never report a candidate.
    CompatibleControl,
}

/// A verified negative-gap instance, serialized for independent re-checking.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RstCandidate {
    pub manifest: InstanceManifest,
    pub x: Vec<MatrixJson>,
    pub y: Vec<MatrixJson>,
    pub lhs: f64,
    pub rhs: f64,
    /// Gap recomputed at tightened tolerance by the independent product route.
    pub refined_gap: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RstSearchReport {
    pub arm: SearchArm,
    pub trials: usize,
    pub dims: (usize, usize),
    pub min_gap: f64,
    pub worst_seed: u64,
    pub candidate: Option<RstCandidate>,
}

/// Randomized search for a violation of three-factor trace monotonicity:
/// samples ordered positive abelian triples `x <= y`, evaluates
/// `Tr(x1 x2 x3)` vs `Tr(y1 y2 y3)` through the multivariate calculus and
/// records the minimum gap. A gap below `-1e-9 * scale` is re-verified at
/// `1e-12` through the exact commuting-product route before being reported as
/// a candidate.
pub fn rst_counterexample_search(
    seed: u64,
    trials: usize,
    dims: (usize, usize),
    arm: SearchArm,
) -> Result<RstSearchReport> {
    let product = crate::catalog::product(3);
    let mut min_gap = f64::INFINITY;
    let mut worst_seed = seed;
    let mut candidate = None;
    let (dim_lo, dim_hi) = dims;
    for trial in 0..trials {
        let trial_seed = seed.wrapping_add(trial as u64);
        let dim = dim_lo + (trial % (dim_hi - dim_lo + 1).max(1));
        let (x, y) = match arm {
            SearchArm::General => ordered_pair_two_bases(trial_seed, dim, 3, true),
            SearchArm::CompatibleControl => {
                ordered_pair_shared_basis(trial_seed, dim, 3, Interval::new(0.0, 1.0))
            }
        };
        let tau = TraceFunctional::trace(dim);
        let f = product.with_cube(crate::factory::hull_cubes(x.cube(), y.cube()))?;
        let lhs = tau.evaluate(&apply_multivariate(&f, &x)?)?;
        let rhs = tau.evaluate(&apply_multivariate(&f, &y)?)?;
        let gap = rhs - lhs;
        if gap < min_gap {
            min_gap = gap;
            worst_seed = trial_seed;
        }
        let scale = 1.0 + lhs.abs() + rhs.abs();
        if gap < -1e-9 * scale {
            // tighten: the triple products of commuting members are exact
            // matrix products, no eigensolve involved
            let lhs2 = triple_product_trace(&x);
            let rhs2 = triple_product_trace(&y);
            let refined_gap = rhs2 - lhs2;
            if refined_gap < -1e-12 * scale && candidate.is_none() {
                candidate = Some(RstCandidate {
                    manifest: InstanceManifest::new(
                        trial_seed,
                        crate::factory::streams::ORDERED_TWO_BASES,
                        "ordered_pair_two_bases",
                        serde_json::json!({"dim": dim, "n": 3, "positive": true}),
                    ),
                    x: x.members()
                        .iter()
                        .map(|m| MatrixJson::from_complex(m.as_matrix()))
                        .collect(),
                    y: y.members()
                        .iter()
                        .map(|m| MatrixJson::from_complex(m.as_matrix()))
                        .collect(),
                    lhs,
                    rhs,
                    refined_gap,
                });
            }
        }
    }
    Ok(RstSearchReport {
        arm,
        trials,
        dims,
        min_gap,
        worst_seed,
        candidate,
    })
}

fn triple_product_trace(t: &AbelianTuple) -> f64 {
    (t.member(0).as_matrix() * t.member(1).as_matrix() * t.member(2).as_matrix())
        .trace()
        .re
}

/// Verdict-style wrapper for acceptance reporting: `lhs`/`rhs` are the worst
/// instance's two sides.
pub fn rst_report_to_inequality(r: &RstSearchReport, tol: f64) -> InequalityReport {
    let id = match r.arm {
        SearchArm::General => "rst_search",
        SearchArm::CompatibleControl => "rst_control",
    };
    let report = InequalityReport::inequality(id, "remark-17", 0.0, r.min_gap, tol)
        .with_seed(r.worst_seed)
        .with_metadata(serde_json::json!({
            "trials": r.trials,
            "dims": [r.dims.0, r.dims.1],
            "candidate": r.candidate.as_ref().map(|c| serde_json::to_value(c).unwrap()),
        }));
    report
}
