//! Periodic (or open) Heisenberg chains: the full sparse Hamiltonian and its
//! total-Sz block structure.

use std::collections::BTreeMap;
use std::fmt;

use log::warn;
use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::matrix::{kron, RealSymMatrix, SparseMatrix};
use crate::spin::{heisenberg_bond, ladder_matrices, sz_matrix, SpinValue};

/// A Hamiltonian instance `H = J sum_i S_i . S_{i+1}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChainSpec {
    pub spin: SpinValue,
    pub sites: usize,
    pub coupling: f64,
    pub periodic: bool,
}

impl ChainSpec {
    /// A periodic ring.
    pub fn new(spin: SpinValue, sites: usize, coupling: f64) -> Result<Self> {
        ChainSpec::with_boundary(spin, sites, coupling, true)
    }

    pub fn with_boundary(spin: SpinValue, sites: usize, coupling: f64, periodic: bool) -> Result<Self> {
        if sites < 2 {
            return Err(Error::InvalidChain(format!("need at least 2 sites, got {sites}")));
        }
        if !coupling.is_finite() {
            return Err(Error::InvalidChain(format!("coupling must be finite, got {coupling}")));
        }
        if coupling <= 0.0 {
            warn!("coupling J = {coupling} is not antiferromagnetic; entanglement results are untested there");
        }
        Ok(ChainSpec { spin, sites, coupling, periodic })
    }

    pub fn with_coupling(&self, coupling: f64) -> Result<Self> {
        ChainSpec::with_boundary(self.spin, self.sites, coupling, self.periodic)
    }

    pub fn is_antiferromagnetic(&self) -> bool {
        self.coupling > 0.0
    }

    /// `(2s+1)^L`, unchecked.
    pub fn raw_dimension(&self) -> u128 {
        (self.spin.local_dim() as u128).checked_pow(self.sites as u32).unwrap_or(u128::MAX)
    }

    /// `(2s+1)^L`, refused when above the dimension budget.
    pub fn dimension(&self, limits: &Limits) -> Result<usize> {
        limits.check_spin(self.spin)?;
        Limits::check_dim(self.raw_dimension(), limits.max_dim)
    }

    /// Bonds `(i, j)` as zero-based site pairs, in summation order.
    ///
    /// Periodic rings list `L` bonds including `(L-1, 0)`; for `L = 2` this
    /// means the pair `(0, 1)` and `(1, 0)` both appear.
    pub fn bonds(&self) -> Vec<(usize, usize)> {
        let count = if self.periodic { self.sites } else { self.sites - 1 };
        (0..count).map(|i| (i, (i + 1) % self.sites)).collect()
    }

    /// Canonical text identifying the Hamiltonian; used as the cache key.
    pub fn fingerprint(&self) -> String {
        format!(
            "twice_s={};sites={};coupling={};periodic={}",
            self.spin.twice(),
            self.sites,
            self.coupling,
            self.periodic
        )
    }
}

impl fmt::Display for ChainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "s={} L={} J={} {}",
            self.spin,
            self.sites,
            self.coupling,
            if self.periodic { "periodic" } else { "open" }
        )
    }
}

/// Embeds `left` on site `i` and `right` on site `j` with identity padding.
fn embed_pair(d: usize, sites: usize, i: usize, j: usize, left: &SparseMatrix, right: &SparseMatrix) -> SparseMatrix {
    let (lo, hi, op_lo, op_hi) = if i < j { (i, j, left, right) } else { (j, i, right, left) };
    let pad = |n: usize| SparseMatrix::identity(d.pow(n as u32));
    let mut m = pad(lo);
    m = kron(&m, op_lo);
    m = kron(&m, &pad(hi - lo - 1));
    m = kron(&m, op_hi);
    kron(&m, &pad(sites - hi - 1))
}

/// Full sparse Hamiltonian, summed bond by bond.
pub fn build_hamiltonian(spec: &ChainSpec, limits: &Limits) -> Result<RealSymMatrix> {
    let dim = spec.dimension(limits)?;
    let d = spec.spin.local_dim();
    let bond = heisenberg_bond(spec.spin).scale(spec.coupling);
    let sz = sz_matrix(spec.spin).into_sparse();
    let (raise, lower) = ladder_matrices(spec.spin);

    let mut total = RealSymMatrix::from_diagonal(&vec![0.0; dim]);
    for (i, j) in spec.bonds() {
        let term = if j == i + 1 {
            let pad = |n: usize| RealSymMatrix::from_diagonal(&vec![1.0; d.pow(n as u32)]);
            pad(i).kron(&bond).kron(&pad(spec.sites - j - 1))
        } else {
            // wrap-around bond: the two operators are not adjacent factors
            let zz = embed_pair(d, spec.sites, i, j, &sz, &sz).scale(spec.coupling);
            let flip = embed_pair(d, spec.sites, i, j, &raise, &lower).scale(0.5 * spec.coupling);
            RealSymMatrix::new(zz).expect("Sz Sz is symmetric").add(&RealSymMatrix::symmetrized(&flip))
        };
        total = total.add(&term);
    }
    Ok(total)
}

/// Product-basis indices grouped by total `2 Sz`, highest `Sz` first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SectorIndex {
    sectors: BTreeMap<i64, Vec<usize>>,
}

impl SectorIndex {
    pub fn new(spec: &ChainSpec, limits: &Limits) -> Result<Self> {
        let dim = spec.dimension(limits)?;
        let d = spec.spin.local_dim();
        let twice_s = i64::from(spec.spin.twice());
        let mut sectors: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
        for index in 0..dim {
            let mut rest = index;
            let mut twice_sz = 0i64;
            for _ in 0..spec.sites {
                // digit k carries m = s - k
                twice_sz += twice_s - 2 * (rest % d) as i64;
                rest /= d;
            }
            sectors.entry(twice_sz).or_default().push(index);
        }
        Ok(SectorIndex { sectors })
    }

    /// `(2 Sz, indices)` in descending `Sz`.
    pub fn iter(&self) -> impl Iterator<Item = (i64, &[usize])> {
        self.sectors.iter().rev().map(|(&k, v)| (k, v.as_slice()))
    }

    pub fn len(&self) -> usize {
        self.sectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sectors.is_empty()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.iter().map(|(_, v)| v.len()).collect()
    }

    pub fn total(&self) -> usize {
        self.sectors.values().map(Vec::len).sum()
    }
}

/// One diagonal block of `H` restricted to a total-Sz sector.
#[derive(Clone, Debug)]
pub struct SectorBlock {
    pub twice_sz: i64,
    pub indices: Vec<usize>,
    pub block: DMatrix<f64>,
}

/// Splits `h` into dense total-Sz blocks.
///
/// Panics if `h` couples different sectors, which `build_hamiltonian` never does.
pub fn sector_split(sectors: &SectorIndex, h: &RealSymMatrix) -> Vec<SectorBlock> {
    let h = h.sparse();
    let mut position = vec![(0i64, usize::MAX); h.dim()];
    for (twice_sz, indices) in sectors.iter() {
        for (local, &global) in indices.iter().enumerate() {
            position[global] = (twice_sz, local);
        }
    }
    sectors
        .iter()
        .map(|(twice_sz, indices)| {
            let n = indices.len();
            let mut block = DMatrix::zeros(n, n);
            for (r, &global) in indices.iter().enumerate() {
                for (col, v) in h.row(global) {
                    let (sector, c) = position[col];
                    assert_eq!(sector, twice_sz, "Hamiltonian couples sectors {twice_sz} and {sector}");
                    block[(r, c)] = v;
                }
            }
            SectorBlock { twice_sz, indices: indices.to_vec(), block }
        })
        .collect()
}
