//! Jensen-type inequality verifiers.
//!
//! Every verifier enforces its stated preconditions, then computes the two
//! sides of the inequality through independent code paths: the left side via
//! the joint calculus of the integrated tuple, the right side via per-node
//! calculus. Precondition violations produce `precondition-failed` reports,
//! never pass/fail.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::calculus::{apply_multivariate, apply_univariate, probe_convex, ScalarFunction};
use crate::error::Result;
use crate::factory::{
    BlockZeroFields, ConstantTupleFields, DiscreteField, TensorLegField, UnitalColumn,
};
use crate::functionals::{TraceFunctional, CENTRALIZER_TOL};
use crate::matrix::{
    embed_general, embed_in_leg, leg_membership_residual, HermitianMatrix, Interval, SPECTRUM_SLACK,
};
use crate::report::{InequalityReport, DEFAULT_TOL};
use crate::spectral::{compatibility_residual, eigenvalues, is_abelian, AbelianTuple, ABELIAN_TOL};

#[derive(Debug, Clone, Copy)]
pub struct VerifierOptions {
    /// Relative verdict tolerance.
    pub tol: f64,
}

impl Default for VerifierOptions {
    fn default() -> Self {
        VerifierOptions { tol: DEFAULT_TOL }
    }
}

type Precondition = std::result::Result<(), String>;

fn require_convex(f: &ScalarFunction) -> Precondition {
    if !f.flags.claimed_convex {
        return Err(format!("function `{}` is not flagged convex", f.name()));
    }
    if !probe_convex(f) {
        return Err(format!(
            "function `{}` claims convexity but the midpoint probe disagrees",
            f.name()
        ));
    }
    Ok(())
}

fn require_spectrum_in(x: &HermitianMatrix, iv: Interval, what: &str) -> Precondition {
    for v in eigenvalues(x) {
        if iv.clip(v, SPECTRUM_SLACK).is_err() {
            return Err(format!(
                "{what}: eigenvalue {v} outside [{}, {}]",
                iv.lo, iv.hi
            ));
        }
    }
    Ok(())
}

fn require_centralizing(phi: &TraceFunctional, ys: &[HermitianMatrix]) -> Precondition {
    for (i, y) in ys.iter().enumerate() {
        let resid = phi
            .centralizer_residual(y)
            .map_err(|e| format!("centralizer check failed: {e}"))?;
        if resid > CENTRALIZER_TOL {
            return Err(format!(
                "y_{} is not in the centralizer of the functional (residual {resid:.3e})",
                i + 1
            ));
        }
    }
    Ok(())
}

fn require_abelian(members: &[HermitianMatrix], what: &str) -> Precondition {
    let (ok, worst) = is_abelian(members, ABELIAN_TOL).map_err(|e| e.to_string())?;
    if ok {
        Ok(())
    } else {
        Err(format!(
            "{what} is not abelian (worst commutator {worst:.3e})"
        ))
    }
}

/// Matrix Jensen trace inequality: for a convex `f` and a unital column,
/// `Tr f(sum a_k* x_k a_k) <= Tr sum a_k* f(x_k) a_k`.
pub fn jensen_trace_matrix(
    f: &ScalarFunction,
    xs: &[HermitianMatrix],
    column: &UnitalColumn,
    opts: VerifierOptions,
) -> Result<InequalityReport> {
    const ID: &str = "thm2";
    const REF: &str = "theorem-2";
    let pre = (|| -> Precondition {
        if f.arity() != 1 {
            return Err(format!("one-variable verifier got arity {}", f.arity()));
        }
        if xs.len() != column.m() {
            return Err(format!(
                "{} matrices vs {} column blocks",
                xs.len(),
                column.m()
            ));
        }
        for x in xs {
            if x.dim() != column.dim() {
                return Err("matrix and column dimensions differ".into());
            }
            require_spectrum_in(x, f.cube()[0], "input spectrum")?;
        }
        require_convex(f)
    })();
    if let Err(reason) = pre {
        return Ok(InequalityReport::precondition_failed(
            ID, REF, reason, opts.tol,
        ));
    }

    // shared shape with the field verifier: a unit-weight single-node field
    let field = DiscreteField::new(vec![1.0; column.m()], column.blocks().to_vec(), None)?;
    let y = field.integrate(|k| Ok(xs[k].clone()))?;
    let tau = TraceFunctional::trace(column.dim());
    let lhs = tau.evaluate(&apply_univariate(f, &y)?)?;
    let rhs = tau.evaluate(&field.integrate(|k| apply_univariate(f, &xs[k]))?)?;
    Ok(InequalityReport::inequality(ID, REF, lhs, rhs, opts.tol))
}

/// Core of the field Jensen verifiers (shared by the plain and the
/// tensor-subalgebra form): checks spectra, the integrated tuple's
/// commutation, and the centralizer condition, then evaluates both sides.
fn field_jensen_core(
    id: &str,
    reference: &str,
    f: &ScalarFunction,
    field: &DiscreteField,
    phi: &TraceFunctional,
    opts: VerifierOptions,
) -> Result<InequalityReport> {
    let pre = (|| -> Precondition {
        let n = field.n();
        if n == 0 {
            return Err("field carries no node tuples".into());
        }
        if f.arity() != n {
            return Err(format!("function arity {} vs tuple size {n}", f.arity()));
        }
        if phi.dim() != field.dim() {
            return Err("functional dimension differs from field dimension".into());
        }
        for t in 0..field.nodes() {
            let tuple = field.tuple(t).map_err(|e| e.to_string())?;
            for i in 0..n {
                require_spectrum_in(tuple.member(i), f.cube()[i], "node spectrum")?;
            }
        }
        require_convex(f)
    })();
    if let Err(reason) = pre {
        return Ok(InequalityReport::precondition_failed(
            id, reference, reason, opts.tol,
        ));
    }

    let members = field.integrated_members()?;
    if let Err(reason) = require_abelian(&members, "the integrated tuple") {
        return Ok(InequalityReport::precondition_failed(
            id, reference, reason, opts.tol,
        ));
    }
    if let Err(reason) = require_centralizing(phi, &members) {
        return Ok(InequalityReport::precondition_failed(
            id, reference, reason, opts.tol,
        ));
    }
    let y_tuple = match AbelianTuple::new(members, f.cube().to_vec()) {
        Ok(t) => t,
        Err(e) => {
            return Ok(InequalityReport::precondition_failed(
                id,
                reference,
                format!("integrated tuple rejected: {e}"),
                opts.tol,
            ))
        }
    };

    let lhs = phi.evaluate(&apply_multivariate(f, &y_tuple)?)?;
    let rhs = phi.evaluate(&field.integrate(|t| apply_multivariate(f, field.tuple(t)?))?)?;
    Ok(InequalityReport::inequality(
        id, reference, lhs, rhs, opts.tol,
    ))
}

/// Field Jensen inequality in several variables:
/// `phi(f(sum_t w_t a_t* x_t a_t)) <= phi(sum_t w_t a_t* f(x_t) a_t)`,
/// for fields whose integrated members commute and lie in the centralizer.
pub fn jensen_field_multivar(
    f: &ScalarFunction,
    field: &DiscreteField,
    phi: &TraceFunctional,
    opts: VerifierOptions,
) -> Result<InequalityReport> {
    field_jensen_core("thm7", "theorem-7", f, field, phi, opts)
}

/// One-variable field form: no commutation condition beyond the centralizer.
pub fn jensen_one_var_field(
    f: &ScalarFunction,
    field: &DiscreteField,
    phi: &TraceFunctional,
    opts: VerifierOptions,
) -> Result<InequalityReport> {
    const ID: &str = "cor9";
    const REF: &str = "corollary-9";
    if field.n() != 1 {
        return Ok(InequalityReport::precondition_failed(
            ID,
            REF,
            format!("one-variable verifier got {}-tuples", field.n()),
            opts.tol,
        ));
    }
    field_jensen_core(ID, REF, f, field, phi, opts)
}

/// Scalar-weight mixture of abelian tuples:
/// `phi(f(sum_t w_t x_t)) <= phi(sum_t w_t f(x_t))` under the pairwise
/// commutator symmetry across nodes.
pub fn jensen_mixture(
    f: &ScalarFunction,
    weighted: &[(f64, AbelianTuple)],
    phi: &TraceFunctional,
    opts: VerifierOptions,
) -> Result<InequalityReport> {
    const ID: &str = "cor10";
    const REF: &str = "corollary-10";
    let pre = (|| -> Precondition {
        if weighted.is_empty() {
            return Err("empty mixture".into());
        }
        let total: f64 = weighted.iter().map(|(w, _)| *w).sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(format!("weights sum to {total}, not 1"));
        }
        if weighted.iter().any(|(w, _)| *w < 0.0) {
            return Err("negative weight".into());
        }
        let n = weighted[0].1.n();
        let dim = weighted[0].1.dim();
        if f.arity() != n {
            return Err(format!("function arity {} vs tuple size {n}", f.arity()));
        }
        for (_, t) in weighted {
            if t.n() != n || t.dim() != dim {
                return Err("tuples have mismatched shapes".into());
            }
            for i in 0..n {
                require_spectrum_in(t.member(i), f.cube()[i], "node spectrum")?;
            }
        }
        // pairwise commutator symmetry across nodes (s = t included, which
        // re-checks that every node is abelian)
        for (s, (_, ts)) in weighted.iter().enumerate() {
            for (t, (_, tt)) in weighted.iter().enumerate().skip(s) {
                let (ok, worst) =
                    compatibility_residual(ts, tt, ABELIAN_TOL).map_err(|e| e.to_string())?;
                if !ok {
                    return Err(format!(
                        "commutator symmetry fails across nodes {s} and {t} (residual {worst:.3e})"
                    ));
                }
            }
        }
        require_convex(f)
    })();
    if let Err(reason) = pre {
        return Ok(InequalityReport::precondition_failed(
            ID, REF, reason, opts.tol,
        ));
    }

    let dim = weighted[0].1.dim();
    let n = weighted[0].1.n();
    let mut members = vec![HermitianMatrix::zeros(dim); n];
    for (w, t) in weighted {
        for i in 0..n {
            members[i] = members[i].add(&t.member(i).scale(*w))?;
        }
    }
    if let Err(reason) = require_abelian(&members, "the mixture tuple") {
        return Ok(InequalityReport::precondition_failed(
            ID, REF, reason, opts.tol,
        ));
    }
    if let Err(reason) = require_centralizing(phi, &members) {
        return Ok(InequalityReport::precondition_failed(
            ID, REF, reason, opts.tol,
        ));
    }
    let y_tuple = AbelianTuple::new(members, f.cube().to_vec())?;
    let lhs = phi.evaluate(&apply_multivariate(f, &y_tuple)?)?;
    let mut rhs_matrix = HermitianMatrix::zeros(dim);
    for (w, t) in weighted {
        rhs_matrix = rhs_matrix.add(&apply_multivariate(f, t)?.scale(*w))?;
    }
    let rhs = phi.evaluate(&rhs_matrix)?;
    Ok(InequalityReport::inequality(ID, REF, lhs, rhs, opts.tol))
}

/// Convexity of `x -> tau(f(x))` along the segment between two compatible
/// tuples: one report per grid value `w`, checking
/// `tau(f(w x + (1-w) y)) <= w tau(f(x)) + (1-w) tau(f(y))`.
pub fn trace_convexity_segment(
    f: &ScalarFunction,
    x: &AbelianTuple,
    y: &AbelianTuple,
    tau: &TraceFunctional,
    grid: &[f64],
    opts: VerifierOptions,
) -> Result<Vec<InequalityReport>> {
    const ID: &str = "cor11";
    const REF: &str = "corollary-11";
    let pre = (|| -> Precondition {
        if f.arity() != x.n() {
            return Err(format!(
                "function arity {} vs tuple size {}",
                f.arity(),
                x.n()
            ));
        }
        let (ok, worst) = compatibility_residual(x, y, ABELIAN_TOL).map_err(|e| e.to_string())?;
        if !ok {
            return Err(format!("tuples are not compatible (residual {worst:.3e})"));
        }
        // tau must be a trace: central density
        let dim = tau.dim() as f64;
        let mean = tau.density().trace() / dim;
        let centered = tau.density().shift(-mean);
        if centered.frobenius() > 1e-10 * (1.0 + tau.density().frobenius()) {
            return Err("functional is not a trace (density is not central)".into());
        }
        for i in 0..x.n() {
            require_spectrum_in(x.member(i), f.cube()[i], "left tuple spectrum")?;
            require_spectrum_in(y.member(i), f.cube()[i], "right tuple spectrum")?;
        }
        require_convex(f)
    })();
    if let Err(reason) = pre {
        return Ok(vec![InequalityReport::precondition_failed(
            ID, REF, reason, opts.tol,
        )]);
    }

    let fx = tau.evaluate(&apply_multivariate(f, x)?)?;
    let fy = tau.evaluate(&apply_multivariate(f, y)?)?;
    let mut out = Vec::with_capacity(grid.len());
    for &w in grid {
        let blend = AbelianTuple::new(x.blend(y, w)?, f.cube().to_vec())?;
        let lhs = tau.evaluate(&apply_multivariate(f, &blend)?)?;
        let rhs = w * fx + (1.0 - w) * fy;
        out.push(InequalityReport::inequality(ID, REF, lhs, rhs, opts.tol));
    }
    Ok(out)
}

/// Tensor-subalgebra form: the node members must act on their own legs.
pub fn jensen_subalgebra_tensor(
    f: &ScalarFunction,
    tensor: &TensorLegField,
    phi: &TraceFunctional,
    opts: VerifierOptions,
) -> Result<InequalityReport> {
    const ID: &str = "cor12";
    const REF: &str = "corollary-12";
    let field = &tensor.field;
    let pre = (|| -> Precondition {
        let n = field.n();
        if n != tensor.leg_dims.len() {
            return Err(format!(
                "{} legs declared but node tuples have {n} members",
                tensor.leg_dims.len()
            ));
        }
        for t in 0..field.nodes() {
            let tuple = field.tuple(t).map_err(|e| e.to_string())?;
            for i in 0..n {
                let resid = leg_membership_residual(&tensor.leg_dims, i, tuple.member(i))
                    .map_err(|e| e.to_string())?;
                if resid > 1e-8 * (1.0 + tuple.member(i).frobenius()) {
                    return Err(format!(
                        "node {t} member {i} is not supported on leg {i} (residual {resid:.3e})"
                    ));
                }
            }
        }
        Ok(())
    })();
    if let Err(reason) = pre {
        return Ok(InequalityReport::precondition_failed(
            ID, REF, reason, opts.tol,
        ));
    }
    field_jensen_core(ID, REF, f, field, phi, opts)
}

/// Zero-padded per-leg form:
/// `phi(f(y_1, ..., y_n)) <= phi(sum_i sum_t w_t a_it* f(0,...,x_it,...,0) a_it)`
/// with `y_i = sum_t w_t a_it* x_it a_it` and joint unitality across legs.
pub fn jensen_block_zero(
    f: &ScalarFunction,
    bz: &BlockZeroFields,
    phi: &TraceFunctional,
    opts: VerifierOptions,
) -> Result<InequalityReport> {
    const ID: &str = "cor13";
    const REF: &str = "corollary-13";
    let dims = &bz.legs.leg_dims;
    let n = dims.len();
    let total: usize = dims.iter().product();

    // embedded columns and members
    let embed_cols: Vec<Vec<DMatrix<Complex64>>> = (0..n)
        .map(|i| {
            bz.legs.columns[i]
                .iter()
                .map(|a| embed_general(dims, i, a))
                .collect()
        })
        .collect();

    let pre = (|| -> Precondition {
        if f.arity() != n {
            return Err(format!("function arity {} vs {n} legs", f.arity()));
        }
        for (i, iv) in bz.cube.iter().enumerate() {
            if !iv.contains(0.0) {
                return Err(format!("interval {} of the cube does not contain 0", i + 1));
            }
            if !f.cube()[i].contains(0.0) {
                return Err(format!(
                    "interval {} of the function domain does not contain 0",
                    i + 1
                ));
            }
        }
        // joint unitality
        let mut acc = DMatrix::<Complex64>::zeros(total, total);
        for i in 0..n {
            for (t, a) in embed_cols[i].iter().enumerate() {
                acc += (a.adjoint() * a).scale(bz.legs.weights[t]);
            }
        }
        let resid = (acc - DMatrix::<Complex64>::identity(total, total)).norm();
        if resid > 1e-9 {
            return Err(format!(
                "per-leg columns are not jointly unital (residual {resid:.3e})"
            ));
        }
        for i in 0..n {
            for x in &bz.xs[i] {
                require_spectrum_in(x, f.cube()[i], "leg spectrum")?;
            }
        }
        require_convex(f)
    })();
    if let Err(reason) = pre {
        return Ok(InequalityReport::precondition_failed(
            ID, REF, reason, opts.tol,
        ));
    }

    // y_i = sum_t w_t a_it* x_it a_it, assembled in the big space
    let mut members = Vec::with_capacity(n);
    for i in 0..n {
        let mut acc = DMatrix::<Complex64>::zeros(total, total);
        for (t, a) in embed_cols[i].iter().enumerate() {
            let x_big = embed_in_leg(dims, i, &bz.xs[i][t])?;
            acc += (a.adjoint() * x_big.as_matrix() * a).scale(bz.legs.weights[t]);
        }
        members.push(HermitianMatrix::new(acc)?);
    }
    // Eq-25-style membership: each y_i must land on its own leg
    for (i, y) in members.iter().enumerate() {
        let resid = leg_membership_residual(dims, i, y)?;
        if resid > 1e-8 * (1.0 + y.frobenius()) {
            return Ok(InequalityReport::precondition_failed(
                ID,
                REF,
                format!(
                    "y_{} does not lie on leg {} (residual {resid:.3e})",
                    i + 1,
                    i + 1
                ),
                opts.tol,
            ));
        }
    }
    if let Err(reason) = require_abelian(&members, "the integrated tuple") {
        return Ok(InequalityReport::precondition_failed(
            ID, REF, reason, opts.tol,
        ));
    }
    if let Err(reason) = require_centralizing(phi, &members) {
        return Ok(InequalityReport::precondition_failed(
            ID, REF, reason, opts.tol,
        ));
    }
    let y_tuple = AbelianTuple::new(members, f.cube().to_vec())?;
    let lhs = phi.evaluate(&apply_multivariate(f, &y_tuple)?)?;

    // rhs: zero-padded single-leg values
    let mut rhs_acc = DMatrix::<Complex64>::zeros(total, total);
    for i in 0..n {
        for (t, a) in embed_cols[i].iter().enumerate() {
            let mut padded = vec![HermitianMatrix::zeros(total); n];
            padded[i] = embed_in_leg(dims, i, &bz.xs[i][t])?;
            let tuple = AbelianTuple::new(padded, f.cube().to_vec())?;
            let fx = apply_multivariate(f, &tuple)?;
            rhs_acc += (a.adjoint() * fx.as_matrix() * a).scale(bz.legs.weights[t]);
        }
    }
    let rhs = phi.evaluate(&HermitianMatrix::new(rhs_acc)?)?;
    Ok(InequalityReport::inequality(ID, REF, lhs, rhs, opts.tol))
}

/// Constant-tuple form: fixed `x_i` per leg,
/// `y_i = sum_t w_t a_it* x_i a_it + (1 - b_i) x_i`, and
/// `phi(f(y)) <= phi(sum_i sum_t w_t a_it* f(x) a_it)`.
pub fn jensen_constant_tuple(
    f: &ScalarFunction,
    ct: &ConstantTupleFields,
    phi: &TraceFunctional,
    opts: VerifierOptions,
) -> Result<InequalityReport> {
    const ID: &str = "cor14";
    const REF: &str = "corollary-14";
    let dims = &ct.legs.leg_dims;
    let n = dims.len();
    let total: usize = dims.iter().product();

    let embed_cols: Vec<Vec<DMatrix<Complex64>>> = (0..n)
        .map(|i| {
            ct.legs.columns[i]
                .iter()
                .map(|a| embed_general(dims, i, a))
                .collect()
        })
        .collect();
    let xs_big: Vec<HermitianMatrix> = (0..n)
        .map(|i| embed_in_leg(dims, i, &ct.xs[i]))
        .collect::<Result<_>>()?;

    // b_i = sum_t w_t a_it* a_it
    let b: Vec<HermitianMatrix> = (0..n)
        .map(|i| {
            let mut acc = DMatrix::<Complex64>::zeros(total, total);
            for (t, a) in embed_cols[i].iter().enumerate() {
                acc += (a.adjoint() * a).scale(ct.legs.weights[t]);
            }
            HermitianMatrix::new(acc)
        })
        .collect::<Result<_>>()?;

    let pre = (|| -> Precondition {
        if f.arity() != n {
            return Err(format!("function arity {} vs {n} legs", f.arity()));
        }
        let mut acc = HermitianMatrix::zeros(total);
        for bi in &b {
            acc = acc.add(bi).map_err(|e| e.to_string())?;
        }
        let resid = acc
            .sub(&HermitianMatrix::identity(total))
            .map_err(|e| e.to_string())?
            .frobenius();
        if resid > 1e-9 {
            return Err(format!(
                "column masses do not sum to 1 (residual {resid:.3e})"
            ));
        }
        for (i, x) in xs_big.iter().enumerate() {
            require_spectrum_in(x, f.cube()[i], "fixed tuple spectrum")?;
        }
        require_convex(f)
    })();
    if let Err(reason) = pre {
        return Ok(InequalityReport::precondition_failed(
            ID, REF, reason, opts.tol,
        ));
    }

    // y_i over the full parameter space: sum over all legs j of
    // w_t a_jt* x_i a_jt, which collapses to the leg-i part plus (1-b_i) x_i
    let mut members = Vec::with_capacity(n);
    for i in 0..n {
        let mut acc = DMatrix::<Complex64>::zeros(total, total);
        for j in 0..n {
            for (t, a) in embed_cols[j].iter().enumerate() {
                acc += (a.adjoint() * xs_big[i].as_matrix() * a).scale(ct.legs.weights[t]);
            }
        }
        members.push(HermitianMatrix::new(acc)?);
    }
    // sanity of the collapsed form (a genuine structural precondition)
    for i in 0..n {
        let mut leg_part = DMatrix::<Complex64>::zeros(total, total);
        for (t, a) in embed_cols[i].iter().enumerate() {
            leg_part += (a.adjoint() * xs_big[i].as_matrix() * a).scale(ct.legs.weights[t]);
        }
        let one_minus_b = HermitianMatrix::identity(total).sub(&b[i])?;
        let rest = HermitianMatrix::new(one_minus_b.as_matrix() * xs_big[i].as_matrix())?;
        let collapsed = HermitianMatrix::new(leg_part)?.add(&rest)?;
        let resid = collapsed.sub(&members[i])?.frobenius();
        if resid > 1e-8 * (1.0 + members[i].frobenius()) {
            return Ok(InequalityReport::precondition_failed(
                ID,
                REF,
                format!(
                    "y_{} does not collapse to the per-leg form (residual {resid:.3e})",
                    i + 1
                ),
                opts.tol,
            ));
        }
    }
    if let Err(reason) = require_abelian(&members, "the integrated tuple") {
        return Ok(InequalityReport::precondition_failed(
            ID, REF, reason, opts.tol,
        ));
    }
    if let Err(reason) = require_centralizing(phi, &members) {
        return Ok(InequalityReport::precondition_failed(
            ID, REF, reason, opts.tol,
        ));
    }
    let y_tuple = match AbelianTuple::new(members, f.cube().to_vec()) {
        Ok(t) => t,
        Err(e) => {
            return Ok(InequalityReport::precondition_failed(
                ID,
                REF,
                format!("integrated tuple rejected: {e}"),
                opts.tol,
            ))
        }
    };
    let lhs = phi.evaluate(&apply_multivariate(f, &y_tuple)?)?;

    let fixed_tuple = AbelianTuple::new(xs_big.clone(), f.cube().to_vec())?;
    let f_fixed = apply_multivariate(f, &fixed_tuple)?;
    let mut rhs_acc = DMatrix::<Complex64>::zeros(total, total);
    for i in 0..n {
        for (t, a) in embed_cols[i].iter().enumerate() {
            rhs_acc += (a.adjoint() * f_fixed.as_matrix() * a).scale(ct.legs.weights[t]);
        }
    }
    let rhs = phi.evaluate(&HermitianMatrix::new(rhs_acc)?)?;
    Ok(InequalityReport::inequality(ID, REF, lhs, rhs, opts.tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::factory::{
        self, block_zero_fields, constant_tuple_fields, random_field, random_unital_column,
        tensor_leg_field,
    };
    use crate::functionals::centralizing_state;
    use crate::matrix::kron;
    use crate::report::Verdict;
    use crate::rng::stream_rng;

    fn opts() -> VerifierOptions {
        VerifierOptions::default()
    }

    #[test]
    fn thm2_unitary_column_gives_equality() {
        // m = 1: the single column block is unitary, so both sides agree
        let f = catalog::get("square", 1).unwrap();
        let column = random_unital_column(1, 1, 4);
        let x = factory::random_hermitian(2, 4, Interval::new(-1.0, 1.0));
        let r = jensen_trace_matrix(&f, &[x], &column, opts()).unwrap();
        assert_eq!(r.verdict(), Verdict::Pass);
        assert!(
            r.gap().unwrap().abs()
                <= 1e-10 * (1.0 + r.lhs().unwrap().abs() + r.rhs().unwrap().abs())
        );
    }

    #[test]
    fn thm2_affine_gives_equality() {
        let f = catalog::get("affine", 1).unwrap();
        let column = random_unital_column(3, 3, 4);
        let xs: Vec<HermitianMatrix> = (0..3)
            .map(|k| factory::random_hermitian(10 + k, 4, Interval::new(-1.0, 1.0)))
            .collect();
        let r = jensen_trace_matrix(&f, &xs, &column, opts()).unwrap();
        assert_eq!(r.verdict(), Verdict::Pass);
        assert!(
            r.gap().unwrap().abs()
                <= 1e-10 * (1.0 + r.lhs().unwrap().abs() + r.rhs().unwrap().abs())
        );
    }

    #[test]
    fn thm2_worked_example() {
        // f = square, x1 = diag(0,2), x2 = diag(1,1), a_k = sqrt(1/2) 1:
        // y = (x1+x2)/2 = diag(1/2, 3/2), lhs = 1/4 + 9/4 = 2.5
        // rhs = (Tr x1^2 + Tr x2^2)/2 = (4 + 2)/2 = 3.0
        let f = catalog::get("square", 1)
            .unwrap()
            .with_cube(vec![Interval::new(0.0, 2.0)])
            .unwrap();
        let s = (0.5f64).sqrt();
        let column = UnitalColumn::new(vec![
            DMatrix::<Complex64>::identity(2, 2).scale(s),
            DMatrix::<Complex64>::identity(2, 2).scale(s),
        ])
        .unwrap();
        let xs = vec![
            HermitianMatrix::diagonal(&[0.0, 2.0]),
            HermitianMatrix::diagonal(&[1.0, 1.0]),
        ];
        let r = jensen_trace_matrix(&f, &xs, &column, opts()).unwrap();
        assert!((r.lhs().unwrap() - 2.5).abs() < 1e-12);
        assert!((r.rhs().unwrap() - 3.0).abs() < 1e-12);
        assert!((r.gap().unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(r.verdict(), Verdict::Pass);
    }

    #[test]
    fn thm2_rejects_nonconvex_function() {
        let f = catalog::get("sin", 1).unwrap();
        let column = random_unital_column(4, 2, 3);
        let xs: Vec<HermitianMatrix> = (0..2)
            .map(|k| factory::random_hermitian(20 + k, 3, Interval::new(-1.0, 1.0)))
            .collect();
        let r = jensen_trace_matrix(&f, &xs, &column, opts()).unwrap();
        assert_eq!(r.verdict(), Verdict::PreconditionFailed);
        assert!(r.precondition_reason().unwrap().contains("convex"));
    }

    #[test]
    fn thm7_tensor_instance_passes() {
        let cube = [Interval::new(-1.0, 1.0), Interval::new(-1.0, 1.0)];
        let tensor = tensor_leg_field(31, &[2, 3], 3, &cube, false).unwrap();
        let members = tensor.field.integrated_members().unwrap();
        let y = AbelianTuple::new(members, cube.to_vec()).unwrap();
        let phi = centralizing_state(32, &y).unwrap();
        let f = catalog::get("exp_sum", 2).unwrap();
        let r = jensen_field_multivar(&f, &tensor.field, &phi, opts()).unwrap();
        assert_eq!(r.verdict(), Verdict::Pass, "{:?}", r);
    }

    #[test]
    fn thm7_affine_equality() {
        let cube = [Interval::new(-1.0, 1.0), Interval::new(-1.0, 1.0)];
        let tensor = tensor_leg_field(33, &[2, 2], 2, &cube, true).unwrap();
        let y =
            AbelianTuple::new(tensor.field.integrated_members().unwrap(), cube.to_vec()).unwrap();
        let phi = centralizing_state(34, &y).unwrap();
        let f = catalog::get("affine", 2).unwrap();
        let r = jensen_field_multivar(&f, &tensor.field, &phi, opts()).unwrap();
        assert_eq!(r.verdict(), Verdict::Pass);
        assert!(
            r.gap().unwrap().abs()
                <= 1e-9 * (1.0 + r.lhs().unwrap().abs() + r.rhs().unwrap().abs())
        );
    }

    #[test]
    fn thm7_precondition_honesty_on_nonabelian_y() {
        // a generic random field integrates to a non-commuting family
        let cube = [Interval::new(-1.0, 1.0), Interval::new(-1.0, 1.0)];
        let field = random_field(35, 3, 4, 2, &cube);
        let phi = TraceFunctional::trace(4);
        let f = catalog::get("square", 2).unwrap();
        let r = jensen_field_multivar(&f, &field, &phi, opts()).unwrap();
        assert_eq!(r.verdict(), Verdict::PreconditionFailed);
        assert!(r.precondition_reason().unwrap().contains("abelian"));
    }

    #[test]
    fn thm7_precondition_honesty_on_noncentralizing_phi() {
        let cube = [Interval::new(-1.0, 1.0), Interval::new(-1.0, 1.0)];
        let tensor = tensor_leg_field(36, &[2, 2], 2, &cube, false).unwrap();
        // random density independent of the instance: generically not central
        let rho = factory::random_hermitian(37, 4, Interval::new(0.1, 1.0));
        let phi = TraceFunctional::new(rho).unwrap();
        let f = catalog::get("square", 2).unwrap();
        let r = jensen_field_multivar(&f, &tensor.field, &phi, opts()).unwrap();
        assert_eq!(r.verdict(), Verdict::PreconditionFailed);
        assert!(r.precondition_reason().unwrap().contains("centralizer"));
    }

    #[test]
    fn reduction_chain_thm7_matches_thm2_bitwise() {
        for seed in 0..10u64 {
            let dim = 4;
            let column = random_unital_column(100 + seed, 1, dim);
            let x = factory::random_hermitian(200 + seed, dim, Interval::new(-1.0, 1.0));
            let f = catalog::get("square", 1).unwrap();

            let r2 = jensen_trace_matrix(&f, &[x.clone()], &column, opts()).unwrap();

            let tuple = AbelianTuple::new(vec![x], f.cube().to_vec()).unwrap();
            let field =
                DiscreteField::new(vec![1.0], vec![column.block(0).clone()], Some(vec![tuple]))
                    .unwrap();
            let phi = TraceFunctional::trace(dim);
            let r7 = jensen_field_multivar(&f, &field, &phi, opts()).unwrap();

            assert_eq!(r2.verdict(), r7.verdict());
            assert_eq!(
                r2.lhs().unwrap().to_bits(),
                r7.lhs().unwrap().to_bits(),
                "lhs differs at seed {seed}"
            );
            assert_eq!(
                r2.rhs().unwrap().to_bits(),
                r7.rhs().unwrap().to_bits(),
                "rhs differs at seed {seed}"
            );
        }
    }

    #[test]
    fn cor9_random_field_passes() {
        let cube = [Interval::new(-1.0, 1.0)];
        let field = random_field(41, 3, 4, 1, &cube);
        let y = AbelianTuple::new(field.integrated_members().unwrap(), cube.to_vec()).unwrap();
        let phi = centralizing_state(42, &y).unwrap();
        let f = catalog::get("exp_sum", 1).unwrap();
        let r = jensen_one_var_field(&f, &field, &phi, opts()).unwrap();
        assert_eq!(r.verdict(), Verdict::Pass);
    }

    #[test]
    fn cor10_mixture_examples() {
        // all nodes equal: zero gap
        let cube = [Interval::new(-1.0, 1.0), Interval::new(0.0, 1.0)];
        let t = factory::random_abelian_tuple(51, 4, 2, &cube);
        let phi = centralizing_state(52, &t).unwrap();
        let f = catalog::get("square", 2)
            .unwrap()
            .with_cube(cube.to_vec())
            .unwrap();
        let r = jensen_mixture(&f, &[(0.5, t.clone()), (0.5, t.clone())], &phi, opts()).unwrap();
        assert_eq!(r.verdict(), Verdict::Pass);
        assert!(r.gap().unwrap().abs() <= 1e-9 * (1.0 + r.lhs().unwrap().abs()));

        // compatible pair mixture passes
        let (a, b) = factory::compatible_pair_eq8(53, &[2, 2], &cube).unwrap();
        let mix_members: Vec<HermitianMatrix> = (0..2)
            .map(|i| a.member(i).scale(0.5).add(&b.member(i).scale(0.5)).unwrap())
            .collect();
        let mix = AbelianTuple::new(mix_members, cube.to_vec()).unwrap();
        let phi = centralizing_state(54, &mix).unwrap();
        let r = jensen_mixture(&f, &[(0.5, a), (0.5, b)], &phi, opts()).unwrap();
        assert_eq!(r.verdict(), Verdict::Pass, "{r:?}");

        // weights not summing to one
        let t2 = factory::random_abelian_tuple(55, 4, 2, &cube);
        let r = jensen_mixture(&f, &[(0.5, t2)], &TraceFunctional::trace(4), opts()).unwrap();
        assert_eq!(r.verdict(), Verdict::PreconditionFailed);
    }

    #[test]
    fn cor11_segment_examples() {
        let cube = [Interval::new(-1.0, 1.0), Interval::new(-1.0, 1.0)];
        let (x, y) = factory::compatible_pair_eq8(61, &[2, 2], &cube).unwrap();
        let tau = TraceFunctional::trace(4);
        let f = catalog::get("exp_sum", 2).unwrap();
        let grid: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
        let reports = trace_convexity_segment(&f, &x, &y, &tau, &grid, opts()).unwrap();
        assert_eq!(reports.len(), 11);
        for r in &reports {
            assert_eq!(r.verdict(), Verdict::Pass, "{r:?}");
        }
        // endpoints are exact equalities
        for idx in [0usize, 10] {
            let r = &reports[idx];
            assert!(r.gap().unwrap().abs() <= 1e-9 * (1.0 + r.lhs().unwrap().abs()));
        }

        // incompatible tuples are refused
        let p = AbelianTuple::with_spectral_cube(vec![
            crate::matrix::testutil::pauli_x(),
            HermitianMatrix::zeros(2),
        ])
        .unwrap();
        let q = AbelianTuple::with_spectral_cube(vec![
            HermitianMatrix::zeros(2),
            crate::matrix::testutil::pauli_z(),
        ])
        .unwrap();
        let r =
            trace_convexity_segment(&f, &p, &q, &TraceFunctional::trace(2), &grid, opts()).unwrap();
        assert_eq!(r[0].verdict(), Verdict::PreconditionFailed);
        assert!(r[0].precondition_reason().unwrap().contains("compatible"));
    }

    #[test]
    fn cor12_tensor_passes_and_checks_legs() {
        let cube = [Interval::new(-1.0, 1.0), Interval::new(-1.0, 1.0)];
        let tensor = tensor_leg_field(71, &[2, 2], 2, &cube, false).unwrap();
        let y =
            AbelianTuple::new(tensor.field.integrated_members().unwrap(), cube.to_vec()).unwrap();
        let phi = centralizing_state(72, &y).unwrap();
        let f = catalog::get("square", 2).unwrap();
        let r = jensen_subalgebra_tensor(&f, &tensor, &phi, opts()).unwrap();
        assert_eq!(r.verdict(), Verdict::Pass, "{r:?}");

        // a field whose member straddles legs is rejected
        let bad_member = kron(
            &crate::matrix::testutil::pauli_x(),
            &crate::matrix::testutil::pauli_z(),
        );
        let other =
            crate::matrix::embed_in_leg(&[2, 2], 1, &crate::matrix::testutil::pauli_z()).unwrap();
        let bad_tuple = AbelianTuple::with_spectral_cube(vec![bad_member, other]).unwrap();
        let bad = TensorLegField {
            leg_dims: vec![2, 2],
            field: DiscreteField::new(
                vec![1.0],
                vec![DMatrix::<Complex64>::identity(4, 4)],
                Some(vec![bad_tuple]),
            )
            .unwrap(),
        };
        let r = jensen_subalgebra_tensor(&f, &bad, &TraceFunctional::trace(4), opts()).unwrap();
        assert_eq!(r.verdict(), Verdict::PreconditionFailed);
        assert!(r.precondition_reason().unwrap().contains("leg"));
    }

    #[test]
    fn cor13_block_zero_passes() {
        let bz = block_zero_fields(81, &[2, 3], 2).unwrap();
        let f = catalog::get("square", 2).unwrap();
        // y members for the centralizing state
        let phi = {
            let r = jensen_block_zero(&f, &bz, &TraceFunctional::trace(6), opts()).unwrap();
            assert_eq!(r.verdict(), Verdict::Pass, "trace case: {r:?}");
            // now a nontrivial centralizing state
            let dims = &bz.legs.leg_dims;
            let mut members = Vec::new();
            for i in 0..2 {
                let mut acc = DMatrix::<Complex64>::zeros(6, 6);
                for (t, a) in bz.legs.columns[i].iter().enumerate() {
                    let a_big = embed_general(dims, i, a);
                    let x_big = embed_in_leg(dims, i, &bz.xs[i][t]).unwrap();
                    acc += (a_big.adjoint() * x_big.as_matrix() * a_big).scale(bz.legs.weights[t]);
                }
                members.push(HermitianMatrix::new(acc).unwrap());
            }
            let y = AbelianTuple::new(members, f.cube().to_vec()).unwrap();
            centralizing_state(82, &y).unwrap()
        };
        let r = jensen_block_zero(&f, &bz, &phi, opts()).unwrap();
        assert_eq!(r.verdict(), Verdict::Pass, "{r:?}");

        // zero inputs with f(0) = 0: both sides vanish
        let mut zeroed = bz.clone();
        for leg in &mut zeroed.xs {
            for x in leg.iter_mut() {
                *x = HermitianMatrix::zeros(x.dim());
            }
        }
        let r = jensen_block_zero(&f, &zeroed, &TraceFunctional::trace(6), opts()).unwrap();
        assert_eq!(r.verdict(), Verdict::Pass);
        assert!(r.lhs().unwrap().abs() < 1e-10 && r.rhs().unwrap().abs() < 1e-10);

        // cube missing zero is refused
        let f_bad = f.with_cube(vec![Interval::new(0.5, 1.0); 2]).unwrap();
        let r = jensen_block_zero(&f_bad, &bz, &TraceFunctional::trace(6), opts()).unwrap();
        assert_eq!(r.verdict(), Verdict::PreconditionFailed);
    }

    #[test]
    fn cor13_and_cor14_single_leg_reduce_to_one_variable_shapes() {
        // n = 1: the zero-padded form collapses to the one-variable field
        // inequality, the constant-tuple form to the matrix inequality
        let f1 = catalog::get("square", 1).unwrap();
        let bz = block_zero_fields(83, &[3], 2).unwrap();
        let r = jensen_block_zero(&f1, &bz, &TraceFunctional::trace(3), opts()).unwrap();
        assert_eq!(r.verdict(), Verdict::Pass, "{r:?}");

        let ct = constant_tuple_fields(84, &[3], 1, f1.cube()).unwrap();
        let r = jensen_constant_tuple(&f1, &ct, &TraceFunctional::trace(3), opts()).unwrap();
        assert_eq!(r.verdict(), Verdict::Pass, "{r:?}");
    }

    #[test]
    fn cor14_constant_tuple_passes() {
        let cube = [Interval::new(-1.0, 1.0), Interval::new(-1.0, 1.0)];
        let ct = constant_tuple_fields(91, &[2, 2], 3, &cube).unwrap();
        let f = catalog::get("exp_sum", 2).unwrap();
        let r = jensen_constant_tuple(&f, &ct, &TraceFunctional::trace(4), opts()).unwrap();
        assert_eq!(r.verdict(), Verdict::Pass, "{r:?}");

        // affine equality
        let f_aff = catalog::get("affine", 2).unwrap();
        let r = jensen_constant_tuple(&f_aff, &ct, &TraceFunctional::trace(4), opts()).unwrap();
        assert_eq!(r.verdict(), Verdict::Pass);
        assert!(
            r.gap().unwrap().abs()
                <= 1e-9 * (1.0 + r.lhs().unwrap().abs() + r.rhs().unwrap().abs())
        );
    }

    #[test]
    fn positive_scaling_covariance() {
        let cube = [Interval::new(-1.0, 1.0), Interval::new(-1.0, 1.0)];
        let tensor = tensor_leg_field(95, &[2, 2], 2, &cube, false).unwrap();
        let y =
            AbelianTuple::new(tensor.field.integrated_members().unwrap(), cube.to_vec()).unwrap();
        let phi = centralizing_state(96, &y).unwrap();
        let f = catalog::get("square", 2).unwrap();
        let r1 = jensen_field_multivar(&f, &tensor.field, &phi, opts()).unwrap();
        let c = 3.5;
        let phi_scaled = phi.scale(c).unwrap();
        let r2 = jensen_field_multivar(&f, &tensor.field, &phi_scaled, opts()).unwrap();
        let (l1, r1v) = (r1.lhs().unwrap(), r1.rhs().unwrap());
        let (l2, r2v) = (r2.lhs().unwrap(), r2.rhs().unwrap());
        assert!((l2 - c * l1).abs() <= 1e-9 * (1.0 + l2.abs()));
        assert!((r2v - c * r1v).abs() <= 1e-9 * (1.0 + r2v.abs()));
    }

    #[test]
    fn mixed_seed_smoke_many_instances() {
        // a small randomized sweep across the verifier family
        let mut rng = stream_rng(0xbeef, 0);
        use rand::Rng;
        for trial in 0..12u64 {
            let dim = rng.gen_range(2..=5);
            let m = rng.gen_range(1..=3);
            let f = catalog::get(
                ["square", "exp_sum", "quartic", "relu_sum"][trial as usize % 4],
                1,
            )
            .unwrap();
            let column = random_unital_column(1000 + trial, m, dim);
            let xs: Vec<HermitianMatrix> = (0..m)
                .map(|k| factory::random_hermitian(2000 + 10 * trial + k as u64, dim, f.cube()[0]))
                .collect();
            let r = jensen_trace_matrix(&f, &xs, &column, opts()).unwrap();
            assert_eq!(r.verdict(), Verdict::Pass, "trial {trial}: {r:?}");
        }
    }
}
