use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{HermitianMatrix, Projection};
use crate::error::{Error, Result};

/// 64-bit seed for a ChaCha8 stream. Child seeds are derived with
/// SplitMix64, so `seed.child(i)` streams are independent of each other
/// and of the scheduling order of the trials that use them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RngSeed(pub u64);

impl RngSeed {
    pub const ALGORITHM: &'static str = "chacha8+splitmix64";

    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }

    pub fn child(self, index: u64) -> RngSeed {
        let mut z = self
            .0
            .wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(index.wrapping_add(1)));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        RngSeed(z ^ (z >> 31))
    }
}

/// `rows × cols` matrix of independent `N(0, std²)` entries, filled
/// column by column.
pub fn gaussian_matrix(rows: usize, cols: usize, std: f64, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| {
        let z: f64 = StandardNormal.sample(rng);
        std * z
    })
}

/// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the
/// signs of `diag(R)` moved into `Q`.
pub fn haar_orthogonal(n: usize, seed: RngSeed) -> DMatrix<f64> {
    let mut rng = seed.rng();
    orthonormal_columns(gaussian_matrix(n, n, 1.0, &mut rng))
}

fn orthonormal_columns(g: DMatrix<f64>) -> DMatrix<f64> {
    let k = g.ncols();
    if k == 0 {
        return g;
    }
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..k {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Projection onto the span of an `n × r` standard Gaussian matrix.
pub fn haar_projection(n: usize, r: usize, seed: RngSeed) -> Result<Projection> {
    if r > n {
        return Err(Error::invalid("r", format!("rank {r} exceeds dimension {n}")));
    }
    let mut rng = seed.rng();
    Ok(Projection::from_orthonormal(orthonormal_columns(
        gaussian_matrix(n, r, 1.0, &mut rng),
    )))
}

/// `U·a·Uᵀ` for Haar `U`. The rotated eigenvectors are stored with the
/// original eigenvalues, so the spectrum is carried over exactly.
pub fn haar_conjugate(a: &HermitianMatrix, seed: RngSeed) -> HermitianMatrix {
    let u = haar_orthogonal(a.dim(), seed);
    HermitianMatrix::from_spectral(a.spectrum(), u * a.eigenvectors())
        .expect("orthogonal conjugation preserves the shape")
}

/// Symmetric matrix with independent `N(0, 1/n)` entries on and above the
/// diagonal.
pub fn random_symmetric(n: usize, seed: RngSeed) -> HermitianMatrix {
    let mut rng = seed.rng();
    let g = gaussian_matrix(n, n, (1.0 / n as f64).sqrt(), &mut rng);
    let m = DMatrix::from_fn(n, n, |i, j| if i <= j { g[(i, j)] } else { g[(j, i)] });
    HermitianMatrix::new(m).expect("symmetric by construction")
}
