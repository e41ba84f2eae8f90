//! Full symmetric eigendecomposition of a chain, one total-Sz sector at a
//! time, and a file cache for the results.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;

use crate::chain::{build_hamiltonian, sector_split, ChainSpec, SectorIndex};
use crate::error::{Error, Result};
use crate::limits::Limits;

pub mod cache;

/// Format version of `SpectralData` and its cache files.
pub const FORMAT_VERSION: u32 = 1;

/// Orthonormal eigenvectors of one total-Sz sector.
#[derive(Clone, Debug, PartialEq)]
pub struct SectorVectors {
    pub twice_sz: i64,
    /// Product-basis index of each row of `vectors`.
    pub indices: Vec<usize>,
    /// Ascending eigenvalues of the block.
    pub eigenvalues: Vec<f64>,
    /// Column `k` is the eigenvector for `eigenvalues[k]`.
    pub vectors: DMatrix<f64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpectrumMeta {
    pub version: u32,
    pub fingerprint: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralData {
    pub spec: ChainSpec,
    /// Full multiset of eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    pub sectors: Option<Vec<SectorVectors>>,
    pub meta: SpectrumMeta,
}

impl SpectralData {
    pub(crate) fn assemble(spec: ChainSpec, mut eigenvalues: Vec<f64>, sectors: Option<Vec<SectorVectors>>) -> Self {
        eigenvalues.sort_by(f64::total_cmp);
        SpectralData {
            spec,
            eigenvalues,
            sectors,
            meta: SpectrumMeta { version: FORMAT_VERSION, fingerprint: spec.fingerprint() },
        }
    }

    pub fn has_vectors(&self) -> bool {
        self.sectors.is_some()
    }

    pub fn dimension(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max_energy(&self) -> f64 {
        *self.eigenvalues.last().expect("nonempty spectrum")
    }

    /// Distinct levels with multiplicities; eigenvalues closer than
    /// `1e-9 * max(1, |E|)` are merged.
    pub fn levels(&self) -> Vec<(f64, usize)> {
        let mut levels: Vec<(f64, usize)> = Vec::new();
        for &e in &self.eigenvalues {
            match levels.last_mut() {
                Some((first, count)) if (e - *first).abs() <= 1e-9 * first.abs().max(1.0) => *count += 1,
                _ => levels.push((e, 1)),
            }
        }
        levels
    }

    /// Embeds eigenvector `k` of sector `sector` into the full product basis.
    pub fn full_vector(&self, sector: usize, k: usize) -> Result<DVector<f64>> {
        let sectors = self.sectors.as_ref().ok_or(Error::MissingVectors)?;
        let sv = &sectors[sector];
        let mut v = DVector::zeros(self.dimension());
        for (row, &global) in sv.indices.iter().enumerate() {
            v[global] = sv.vectors[(row, k)];
        }
        Ok(v)
    }
}

/// Diagonalizes every total-Sz block of the Hamiltonian.
///
/// Eigenvectors are computed only when `need_vectors` is set, and then only
/// within `limits.max_vector_dim`.
pub fn diagonalize(spec: &ChainSpec, need_vectors: bool, limits: &Limits) -> Result<SpectralData> {
    let dim = spec.dimension(limits)?;
    if need_vectors {
        Limits::check_dim(dim as u128, limits.max_vector_dim)?;
    }
    let h = build_hamiltonian(spec, limits)?;
    let index = SectorIndex::new(spec, limits)?;
    let blocks = sector_split(&index, &h);

    let solved: Vec<(Vec<f64>, Option<SectorVectors>)> = blocks
        .into_par_iter()
        .map(|b| {
            let n = b.indices.len();
            if need_vectors {
                let eig = SymmetricEigen::try_new(b.block, f64::EPSILON, 1000 * n.max(1))
                    .ok_or(Error::SolverFailure { twice_sz: b.twice_sz })?;
                let mut order: Vec<usize> = (0..n).collect();
                order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
                let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
                let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
                let sv = SectorVectors {
                    twice_sz: b.twice_sz,
                    indices: b.indices,
                    eigenvalues: eigenvalues.clone(),
                    vectors,
                };
                Ok((eigenvalues, Some(sv)))
            } else {
                let values = b.block.symmetric_eigenvalues();
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::SolverFailure { twice_sz: b.twice_sz });
                }
                Ok((values.as_slice().to_vec(), None))
            }
        })
        .collect::<Result<_>>()?;

    let mut eigenvalues = Vec::with_capacity(dim);
    let mut sectors = Vec::new();
    for (values, sv) in solved {
        eigenvalues.extend(values);
        sectors.extend(sv);
    }
    Ok(SpectralData::assemble(*spec, eigenvalues, need_vectors.then_some(sectors)))
}

/// `diagonalize` through the cache in `dir`. Returns the data and whether it
/// was a cache hit. A values-and-vectors entry also serves values-only requests.
pub fn diagonalize_cached(
    spec: &ChainSpec,
    need_vectors: bool,
    limits: &Limits,
    dir: Option<&std::path::Path>,
) -> Result<(SpectralData, bool)> {
    let Some(dir) = dir else {
        return Ok((diagonalize(spec, need_vectors, limits)?, false));
    };
    spec.dimension(limits)?;
    if let Some(sd) = cache::load(spec, need_vectors, dir)? {
        return Ok((sd, true));
    }
    let sd = diagonalize(spec, need_vectors, limits)?;
    cache::store(&sd, dir)?;
    Ok((sd, false))
}
