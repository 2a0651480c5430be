use super::mp::triangular_law_cdf;
use super::partition::{Partition, SubsetId};
use crate::cdf::Cdf;
use crate::error::{Error, Result};
use crate::spectral::{haar_conjugate, spectral_max, HermitianMatrix, RngSeed};

/// The `n`-point quantile discretization `Q((i − ½)/n)`, `i = 1..n`.
pub fn quantile_diagonal(f: &Cdf, n: usize) -> Result<Vec<f64>> {
    (1..=n)
        .map(|i| f.quantile((i as f64 - 0.5) / n as f64))
        .collect()
}

/// One matrix per atom: the quantile diagonal of the triangular law with
/// that atom's mass, conjugated by an independent Haar rotation
/// (`seed.child(j)` for atom `j`). Atoms of zero mass get the zero matrix.
pub fn realize_triangular_process(
    partition: &Partition,
    n: usize,
    seed: RngSeed,
) -> Result<Vec<HermitianMatrix>> {
    if n < super::lab::MIN_DIMENSION {
        return Err(Error::invalid("N", format!("dimension {n} is too small")));
    }
    partition
        .atoms()
        .iter()
        .enumerate()
        .map(|(j, atom)| {
            if atom.mass == 0.0 {
                return Ok(HermitianMatrix::zeros(n));
            }
            let diag = quantile_diagonal(&triangular_law_cdf(atom.mass)?, n)?;
            let d = HermitianMatrix::from_diagonal(&diag)?;
            Ok(haar_conjugate(&d, seed.child(j as u64)))
        })
        .collect()
}

/// `Z(ω) = ∨_{j ∈ ω} Z_j`.
pub fn triangular_subset_max(process: &[HermitianMatrix], subset: &SubsetId) -> Result<HermitianMatrix> {
    let mut it = subset.indices().iter().map(|&j| &process[j]);
    let first = it
        .next()
        .ok_or_else(|| Error::invalid("subset", "empty subset"))?
        .clone();
    it.try_fold(first, |acc, z| spectral_max(&acc, z))
}
