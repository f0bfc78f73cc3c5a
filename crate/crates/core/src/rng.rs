//! Seeded randomness for instance generation.
//!
//! All generators draw from ChaCha8, a counter-based stream cipher RNG:
//! a `(seed, stream)` pair fully determines every draw, so instances are
//! reproducible bit-for-bit and independent streams can be consumed
//! concurrently.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// RNG for a named sub-draw of a generator.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(rand_distr::StandardNormal)
}

/// Complex matrix with independent standard-normal real and imaginary parts.
pub fn gaussian_complex(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(standard_normal(rng), standard_normal(rng))
    })
}

/// Haar-distributed unitary: QR of a complex Gaussian with the phase
/// convention that makes R's diagonal positive.
pub fn haar_unitary(rng: &mut ChaCha8Rng, dim: usize) -> DMatrix<Complex64> {
    let g = gaussian_complex(rng, dim, dim);
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Random unit vector, uniform on the complex sphere.
pub fn random_unit_vector(rng: &mut ChaCha8Rng, dim: usize) -> DVector<Complex64> {
    loop {
        let v = DVector::from_fn(dim, |_, _| {
            Complex64::new(standard_normal(rng), standard_normal(rng))
        });
        let norm = v.norm();
        if norm > 1e-6 {
            return v / Complex64::new(norm, 0.0);
        }
    }
}

/// Provenance record attached to generated instances and anomaly dumps.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceManifest {
    pub seed: u64,
    pub stream: u64,
    pub generator: String,
    pub parameters: serde_json::Value,
}

impl InstanceManifest {
    pub fn new(seed: u64, stream: u64, generator: &str, parameters: serde_json::Value) -> Self {
        InstanceManifest {
            seed,
            stream,
            generator: generator.to_string(),
            parameters,
        }
    }
}
