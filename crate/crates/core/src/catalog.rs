//! Named scalar functions addressable from campaign configs.
//!
//! Names are stable CLI identifiers. Arity-generic entries (`exp_sum`,
//! `square`, ...) build for the requested number of variables; `productN`
//! carries its arity in the name but accepts any matching request via the
//! plain `product` alias.

use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::calculus::{FunctionFlags, ScalarFunction};
use crate::error::{Error, Result};
use crate::matrix::Interval;

fn cube(n: usize, lo: f64, hi: f64) -> Vec<Interval> {
    vec![Interval::new(lo, hi); n]
}

/// All catalog names, in the order `describe`-style listings use.
pub const NAMES: &[&str] = &[
    "exp_sum",
    "square",
    "relu_sum",
    "abs",
    "quartic",
    "product",
    "sin",
    "affine",
    "affine_increasing",
    "log1p_sum",
    "sqrt_sum",
    "gauss",
    "id",
];

/// Look up a catalog function for `n` variables.
pub fn get(name: &str, n: usize) -> Result<ScalarFunction> {
    if n == 0 {
        return Err(Error::InvalidArgument("arity must be at least 1".into()));
    }
    // productK names pin their arity
    if let Some(rest) = name.strip_prefix("product") {
        if !rest.is_empty() {
            let k: usize = rest
                .parse()
                .map_err(|_| Error::UnknownFunction(name.to_string()))?;
            if k != n {
                return Err(Error::ArityMismatch {
                    expected: k,
                    found: n,
                });
            }
        }
        return Ok(product(n));
    }
    match name {
        "exp_sum" => Ok(exp_sum(n)),
        "square" => Ok(square(n)),
        "relu_sum" => Ok(relu_sum(n)),
        "abs" => Ok(abs_sum(n)),
        "quartic" => Ok(quartic(n)),
        "sin" => {
            if n != 1 {
                return Err(Error::ArityMismatch {
                    expected: 1,
                    found: n,
                });
            }
            Ok(sine())
        }
        "affine" => Ok(random_affine(0x00af_f13e, n, false)),
        "affine_increasing" => Ok(random_affine(0x00af_f13e, n, true)),
        "log1p_sum" => Ok(log1p_sum(n)),
        "sqrt_sum" => Ok(sqrt_sum(n)),
        "gauss" => Ok(gauss(n)),
        "id" => {
            if n != 1 {
                return Err(Error::ArityMismatch {
                    expected: 1,
                    found: n,
                });
            }
            Ok(identity())
        }
        other => Err(Error::UnknownFunction(other.to_string())),
    }
}

/// exp(sum of variables): convex and increasing.
pub fn exp_sum(n: usize) -> ScalarFunction {
    ScalarFunction::new(
        "exp_sum",
        cube(n, -1.0, 1.0),
        Arc::new(|p: &[f64]| p.iter().sum::<f64>().exp()),
        Some(Arc::new(|_k: usize, p: &[f64]| p.iter().sum::<f64>().exp())),
        FunctionFlags {
            claimed_convex: true,
            claimed_concave: false,
            claimed_monotone_increasing: true,
        },
    )
}

/// Sum of squares: convex, not monotone on a symmetric cube.
pub fn square(n: usize) -> ScalarFunction {
    ScalarFunction::new(
        "square",
        cube(n, -1.0, 1.0),
        Arc::new(|p: &[f64]| p.iter().map(|v| v * v).sum()),
        Some(Arc::new(|k: usize, p: &[f64]| 2.0 * p[k])),
        FunctionFlags {
            claimed_convex: true,
            claimed_concave: false,
            claimed_monotone_increasing: false,
        },
    )
}

/// Sum of positive parts: convex and (weakly) increasing, nonsmooth at 0.
pub fn relu_sum(n: usize) -> ScalarFunction {
    ScalarFunction::new(
        "relu_sum",
        cube(n, -1.0, 1.0),
        Arc::new(|p: &[f64]| p.iter().map(|v| v.max(0.0)).sum()),
        None,
        FunctionFlags {
            claimed_convex: true,
            claimed_concave: false,
            claimed_monotone_increasing: true,
        },
    )
}

/// Sum of absolute values: convex.
pub fn abs_sum(n: usize) -> ScalarFunction {
    ScalarFunction::new(
        "abs",
        cube(n, -1.0, 1.0),
        Arc::new(|p: &[f64]| p.iter().map(|v| v.abs()).sum()),
        None,
        FunctionFlags {
            claimed_convex: true,
            claimed_concave: false,
            claimed_monotone_increasing: false,
        },
    )
}

/// Sum of fourth powers: convex.
pub fn quartic(n: usize) -> ScalarFunction {
    ScalarFunction::new(
        "quartic",
        cube(n, -2.0, 2.0),
        Arc::new(|p: &[f64]| p.iter().map(|v| v.powi(4)).sum()),
        Some(Arc::new(|k: usize, p: &[f64]| 4.0 * p[k].powi(3))),
        FunctionFlags {
            claimed_convex: true,
            claimed_concave: false,
            claimed_monotone_increasing: false,
        },
    )
}

/// Product of all variables on the unit cube: increasing there, neither
/// convex nor concave for n >= 2.
pub fn product(n: usize) -> ScalarFunction {
    ScalarFunction::new(
        format!("product{n}"),
        cube(n, 0.0, 1.0),
        Arc::new(|p: &[f64]| p.iter().product()),
        Some(Arc::new(|k: usize, p: &[f64]| {
            p.iter()
                .enumerate()
                .filter(|(i, _)| *i != k)
                .map(|(_, v)| v)
                .product()
        })),
        FunctionFlags {
            claimed_convex: n < 2,
            claimed_concave: n < 2,
            claimed_monotone_increasing: true,
        },
    )
}

/// sin on [-pi/2, pi/2]: increasing, neither convex nor concave.
pub fn sine() -> ScalarFunction {
    ScalarFunction::new(
        "sin",
        vec![Interval::new(
            -std::f64::consts::FRAC_PI_2,
            std::f64::consts::FRAC_PI_2,
        )],
        Arc::new(|p: &[f64]| p[0].sin()),
        Some(Arc::new(|_k: usize, p: &[f64]| p[0].cos())),
        FunctionFlags {
            claimed_convex: false,
            claimed_concave: false,
            claimed_monotone_increasing: true,
        },
    )
}

/// Affine function with pseudo-random coefficients derived from `seed`.
/// Affine maps are simultaneously convex and concave; they are monotone
/// increasing when all coefficients are nonnegative (`increasing` forces
/// that by taking absolute values).
pub fn random_affine(seed: u64, n: usize, increasing: bool) -> ScalarFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coeffs: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    if increasing {
        for c in &mut coeffs {
            *c = c.abs();
        }
    }
    let offset: f64 = rng.gen_range(-1.0..1.0);
    let name = if increasing {
        "affine_increasing"
    } else {
        "affine"
    };
    let coeffs_eval = coeffs.clone();
    let coeffs_partial = coeffs.clone();
    ScalarFunction::new(
        name,
        cube(n, -1.0, 1.0),
        Arc::new(move |p: &[f64]| {
            p.iter().zip(&coeffs_eval).map(|(v, c)| v * c).sum::<f64>() + offset
        }),
        Some(Arc::new(move |k: usize, _p: &[f64]| coeffs_partial[k])),
        FunctionFlags {
            claimed_convex: true,
            claimed_concave: true,
            claimed_monotone_increasing: increasing,
        },
    )
}

/// Sum of log(1 + v) on [0, 3]: concave and increasing.
pub fn log1p_sum(n: usize) -> ScalarFunction {
    ScalarFunction::new(
        "log1p_sum",
        cube(n, 0.0, 3.0),
        Arc::new(|p: &[f64]| p.iter().map(|v| v.ln_1p()).sum()),
        Some(Arc::new(|k: usize, p: &[f64]| 1.0 / (1.0 + p[k]))),
        FunctionFlags {
            claimed_convex: false,
            claimed_concave: true,
            claimed_monotone_increasing: true,
        },
    )
}

/// Sum of square roots on [0, 4]: concave and increasing.
pub fn sqrt_sum(n: usize) -> ScalarFunction {
    ScalarFunction::new(
        "sqrt_sum",
        cube(n, 0.0, 4.0),
        Arc::new(|p: &[f64]| p.iter().map(|v| v.sqrt()).sum()),
        None,
        FunctionFlags {
            claimed_convex: false,
            claimed_concave: true,
            claimed_monotone_increasing: true,
        },
    )
}

/// exp(-sum of squares): strictly positive, used to build centralizing
/// density matrices.
pub fn gauss(n: usize) -> ScalarFunction {
    ScalarFunction::new(
        "gauss",
        cube(n, -2.0, 2.0),
        Arc::new(|p: &[f64]| (-p.iter().map(|v| v * v).sum::<f64>()).exp()),
        None,
        FunctionFlags::default(),
    )
}

/// One-variable identity.
pub fn identity() -> ScalarFunction {
    ScalarFunction::new(
        "id",
        cube(1, -1.0, 1.0),
        Arc::new(|p: &[f64]| p[0]),
        Some(Arc::new(|_k: usize, _p: &[f64]| 1.0)),
        FunctionFlags {
            claimed_convex: true,
            claimed_concave: true,
            claimed_monotone_increasing: true,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{probe_concave, probe_convex, probe_monotone_increasing};

    #[test]
    fn square_is_flagged_convex() {
        assert!(get("square", 1).unwrap().flags.claimed_convex);
    }

    #[test]
    fn product3_evaluates() {
        let f = get("product3", 3).unwrap();
        assert_eq!(f.eval(&[1.0, 2.0, 3.0]), 6.0);
        assert!(matches!(
            get("product3", 2),
            Err(Error::ArityMismatch { .. })
        ));
    }

    #[test]
    fn sin_domain_is_half_period() {
        let f = get("sin", 1).unwrap();
        assert_eq!(f.cube()[0].lo, -std::f64::consts::FRAC_PI_2);
        assert_eq!(f.cube()[0].hi, std::f64::consts::FRAC_PI_2);
    }

    #[test]
    fn unknown_name_errors() {
        assert!(matches!(get("nope", 1), Err(Error::UnknownFunction(_))));
    }

    #[test]
    fn all_flags_survive_their_probe() {
        for name in NAMES {
            for n in [1usize, 2, 3] {
                let f = match get(name, n) {
                    Ok(f) => f,
                    Err(_) => continue, // arity-pinned entries
                };
                if f.flags.claimed_convex {
                    assert!(
                        probe_convex(&f),
                        "{name}@{n} claims convex, probe disagrees"
                    );
                }
                if f.flags.claimed_concave {
                    assert!(
                        probe_concave(&f),
                        "{name}@{n} claims concave, probe disagrees"
                    );
                }
                if f.flags.claimed_monotone_increasing {
                    assert!(
                        probe_monotone_increasing(&f),
                        "{name}@{n} claims increasing, probe disagrees"
                    );
                }
            }
        }
    }
}
