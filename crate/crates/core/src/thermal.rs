//! Gibbs-ensemble quantities for `rho(T) = exp(-H/T) / Z`.
//!
//! Boltzmann weights are always taken relative to the ground energy,
//! `w_i = exp(-(E_i - E_0)/T)`, so nothing overflows as `T -> 0`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::matrix::{Complex64, ComplexMatrix};
use crate::spectra::SpectralData;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThermalObservables {
    pub temperature: f64,
    /// `<H>`
    pub energy: f64,
    /// `<H^2>`
    pub energy_sq: f64,
    /// `<H^2> - <H>^2`, clamped at zero when within rounding.
    pub variance: f64,
    /// `ln sum_i exp(-(E_i - E_0)/T)`
    pub log_z_shifted: f64,
}

fn check_temperature(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidTemperature(t))
    }
}

/// Normalized Boltzmann weights of an ascending level list.
pub fn boltzmann_weights(levels: &[f64], temperature: f64) -> Result<Vec<f64>> {
    check_temperature(temperature)?;
    let e0 = levels.iter().copied().fold(f64::INFINITY, f64::min);
    let raw: Vec<f64> = levels.iter().map(|e| (-(e - e0) / temperature).exp()).collect();
    let z: f64 = raw.iter().sum();
    Ok(raw.into_iter().map(|w| w / z).collect())
}

/// Thermal moments of a bare list of energy levels (each listed once per state).
pub fn observables_from_levels(levels: &[f64], temperature: f64) -> Result<ThermalObservables> {
    check_temperature(temperature)?;
    let e0 = levels.iter().copied().fold(f64::INFINITY, f64::min);
    let (mut z, mut e1, mut e2) = (0.0, 0.0, 0.0);
    for &e in levels {
        let w = (-(e - e0) / temperature).exp();
        z += w;
        e1 += w * e;
        e2 += w * e * e;
    }
    let energy = e1 / z;
    let energy_sq = e2 / z;
    let mut variance = energy_sq - energy * energy;
    if variance < 0.0 && variance > -1e-9 * energy_sq.max(1.0) {
        variance = 0.0;
    }
    Ok(ThermalObservables { temperature, energy, energy_sq, variance, log_z_shifted: z.ln() })
}

pub fn observables(sd: &SpectralData, temperature: f64) -> Result<ThermalObservables> {
    observables_from_levels(&sd.eigenvalues, temperature)
}

/// Hermitian, unit-trace, positive semidefinite matrix on a tensor product
/// of spaces with dimensions `dims`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    pub matrix: ComplexMatrix,
    pub dims: Vec<usize>,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix, dims: Vec<usize>) -> Result<Self> {
        let n = matrix.nrows();
        if matrix.ncols() != n || dims.iter().product::<usize>() != n || dims.is_empty() {
            return Err(Error::MalformedDims { dims, dimension: n });
        }
        Ok(DensityMatrix { matrix, dims })
    }

    pub fn from_real(matrix: DMatrix<f64>, dims: Vec<usize>) -> Result<Self> {
        DensityMatrix::new(matrix.map(|v| Complex64::new(v, 0.0)), dims)
    }

    /// `|psi><psi| / <psi|psi>`.
    pub fn pure(state: &nalgebra::DVector<Complex64>, dims: Vec<usize>) -> Result<Self> {
        let norm_sq = state.norm_squared();
        DensityMatrix::new(state * state.adjoint() / Complex64::new(norm_sq, 0.0), dims)
    }

    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn hermiticity_residual(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev = self.matrix.clone().symmetric_eigenvalues().as_slice().to_vec();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// `tr(rho A)`.
    pub fn expectation(&self, op: &ComplexMatrix) -> Complex64 {
        (&self.matrix * op).trace()
    }

    /// Checks trace, Hermiticity and positivity against the standard tolerances.
    pub fn is_valid(&self) -> bool {
        (self.trace() - 1.0).abs() < 1e-10 && self.hermiticity_residual() < 1e-12 && self.min_eigenvalue() > -1e-9
    }
}

/// Dense thermal state of the whole chain.
pub fn thermal_state(sd: &SpectralData, temperature: f64, limits: &Limits) -> Result<DensityMatrix> {
    let sectors = sd.sectors.as_ref().ok_or(Error::MissingVectors)?;
    let dim = Limits::check_dim(sd.dimension() as u128, limits.max_state_dim)?;
    check_temperature(temperature)?;
    let z_shift = sd.ground_energy();
    let total: f64 = sd.eigenvalues.iter().map(|e| (-(e - z_shift) / temperature).exp()).sum();

    let mut rho = DMatrix::<f64>::zeros(dim, dim);
    for sv in sectors {
        let n = sv.indices.len();
        let w: Vec<f64> = sv.eigenvalues.iter().map(|e| (-(e - z_shift) / temperature).exp() / total).collect();
        // block = V diag(w) V^T on this sector's indices
        let scaled = DMatrix::from_fn(n, n, |r, c| sv.vectors[(r, c)] * w[c]);
        let block = &scaled * sv.vectors.transpose();
        for (r, &gr) in sv.indices.iter().enumerate() {
            for (c, &gc) in sv.indices.iter().enumerate() {
                rho[(gr, gc)] = block[(r, c)];
            }
        }
    }
    let dims = vec![sd.spec.spin.local_dim(); sd.spec.sites];
    DensityMatrix::from_real(rho, dims)
}

/// Two-site reduced thermal state of sites `(site, site + 1)` (1-based, with
/// periodic wrap), accumulated eigenvector by eigenvector.
///
/// The result has dims `[2s+1, 2s+1]` with `site` as the first factor.
pub fn nn_reduced_density(sd: &SpectralData, temperature: f64, site: usize) -> Result<DensityMatrix> {
    let sectors = sd.sectors.as_ref().ok_or(Error::MissingVectors)?;
    check_temperature(temperature)?;
    let spec = &sd.spec;
    if site == 0 || site > spec.sites {
        return Err(Error::InvalidChain(format!("site {site} outside 1..={}", spec.sites)));
    }
    let d = spec.spin.local_dim();
    let sites = spec.sites;
    let first = site - 1;
    let second = site % sites;

    // split a product-basis index into (pair index, index of the remaining sites)
    let split = |index: usize| {
        let mut digits = vec![0usize; sites];
        let mut rest = index;
        for k in (0..sites).rev() {
            digits[k] = rest % d;
            rest /= d;
        }
        let pair = digits[first] * d + digits[second];
        let env = digits
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != first && *k != second)
            .fold(0usize, |acc, (_, &digit)| acc * d + digit);
        (pair, env)
    };
    let env_dim = d.pow((sites - 2) as u32);

    let e0 = sd.ground_energy();
    let z: f64 = sd.eigenvalues.iter().map(|e| (-(e - e0) / temperature).exp()).sum();
    let cutoff = 1e-16 / z;

    let mut rho = DMatrix::<f64>::zeros(d * d, d * d);
    for sv in sectors {
        let coords: Vec<(usize, usize)> = sv.indices.iter().map(|&g| split(g)).collect();
        let mut amplitudes = DMatrix::<f64>::zeros(d * d, env_dim);
        for (k, &e) in sv.eigenvalues.iter().enumerate() {
            let w = (-(e - e0) / temperature).exp() / z;
            if w < cutoff {
                continue;
            }
            amplitudes.fill(0.0);
            for (row, &(pair, env)) in coords.iter().enumerate() {
                amplitudes[(pair, env)] = sv.vectors[(row, k)];
            }
            rho.gemm(w, &amplitudes, &amplitudes.transpose(), 1.0);
        }
    }
    DensityMatrix::from_real(rho, vec![d, d])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{build_hamiltonian, ChainSpec};
    use crate::matrix::to_complex;
    use crate::spectra::diagonalize;
    use crate::spin::{heisenberg_bond, SpinValue};

    fn data(twice_s: u32, sites: usize, coupling: f64, vectors: bool) -> SpectralData {
        let spec = ChainSpec::new(SpinValue::from_twice(twice_s).unwrap(), sites, coupling).unwrap();
        diagonalize(&spec, vectors, &Limits::default()).unwrap()
    }

    #[test]
    fn spin_half_pair_crosses_separable_bound_at_two_over_ln3() {
        let obs = observables(&data(1, 2, 1.0, false), 2.0 / 3f64.ln()).unwrap();
        assert!((obs.energy + 0.5).abs() < 1e-12, "{}", obs.energy);
    }

    #[test]
    fn spin_one_pair_crosses_minus_two_at_six_over_ln10() {
        let obs = observables(&data(2, 2, 1.0, false), 6.0 / 10f64.ln()).unwrap();
        assert!((obs.energy + 2.0).abs() < 1e-12, "{}", obs.energy);
    }

    #[test]
    fn low_temperature_is_ground_state() {
        let obs = observables(&data(2, 2, 1.0, false), 1e-3).unwrap();
        assert!((obs.energy + 4.0).abs() < 1e-9);
        assert!((obs.energy_sq - 16.0).abs() < 1e-9);
        assert_eq!(obs.variance, 0.0);
        assert!(obs.log_z_shifted.abs() < 1e-12);
    }

    #[test]
    fn tiny_temperatures_do_not_overflow() {
        let obs = observables(&data(1, 6, 3.0, false), 1e-8).unwrap();
        assert!(obs.energy.is_finite() && obs.energy_sq.is_finite());
    }

    #[test]
    fn high_temperature_energy_vanishes() {
        for sd in [data(1, 4, 1.0, false), data(2, 3, 0.5, false)] {
            let obs = observables(&sd, 1e6).unwrap();
            let norm = sd.eigenvalues.iter().fold(0.0f64, |m, e| m.max(e.abs()));
            assert!(obs.energy.abs() < 1e-3 * norm);
        }
    }

    #[test]
    fn rejects_nonpositive_temperature() {
        let sd = data(1, 2, 1.0, false);
        for t in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(matches!(observables(&sd, t), Err(Error::InvalidTemperature(_))));
        }
    }

    #[test]
    fn energy_is_monotone_in_temperature() {
        for sd in [data(1, 2, 1.0, false), data(2, 2, 1.0, false), data(1, 8, 1.0, false), data(2, 4, 0.5, false)] {
            let grid: Vec<f64> = (0..200).map(|k| 10f64.powf(-2.0 + 4.0 * k as f64 / 199.0)).collect();
            let energies: Vec<f64> = grid.iter().map(|&t| observables(&sd, t).unwrap().energy).collect();
            assert!(energies.windows(2).all(|w| w[1] >= w[0] - 1e-12), "{}", sd.spec);
            for e in &energies {
                assert!(*e >= sd.ground_energy() - 1e-12 && *e <= sd.max_energy() + 1e-12);
            }
        }
    }

    #[test]
    fn coupling_scaling_covariance() {
        let a = data(1, 6, 1.0, false);
        let b = data(1, 6, 2.0, false);
        for t in [0.1, 0.7, 3.0] {
            let x = observables(&a, t).unwrap();
            let y = observables(&b, 2.0 * t).unwrap();
            assert!((2.0 * x.energy - y.energy).abs() < 1e-9);
            assert!((4.0 * x.energy_sq - y.energy_sq).abs() < 1e-9);
        }
    }

    #[test]
    fn thermal_state_matches_observables() {
        let sd = data(1, 4, 1.0, true);
        let limits = Limits::default();
        let h = to_complex(&build_hamiltonian(&sd.spec, &limits).unwrap().to_dense());
        for t in [0.2, 1.0, 5.0] {
            let rho = thermal_state(&sd, t, &limits).unwrap();
            assert!(rho.is_valid());
            let obs = observables(&sd, t).unwrap();
            assert!((rho.expectation(&h).re - obs.energy).abs() < 1e-8);
            assert!((rho.expectation(&(&h * &h)).re - obs.energy_sq).abs() < 1e-8);
        }
    }

    #[test]
    fn thermal_state_limits() {
        let limits = Limits::default();
        let sd = data(1, 4, 1.0, true);
        let rho = thermal_state(&sd, 1e6, &limits).unwrap();
        let flat = ComplexMatrix::identity(16, 16) / Complex64::new(16.0, 0.0);
        assert!((rho.matrix - flat).iter().all(|z| z.norm() < 1e-6));
        assert!((thermal_state(&sd, 1.0, &limits).unwrap().trace() - 1.0).abs() < 1e-12);

        let pair = data(1, 2, 1.0, true);
        let rho = thermal_state(&pair, 1e-3, &limits).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let singlet = nalgebra::DVector::from_vec(vec![0.0, s, -s, 0.0]).map(|v| Complex64::new(v, 0.0));
        let fidelity = (singlet.adjoint() * &rho.matrix * &singlet)[(0, 0)].re;
        assert!(fidelity > 1.0 - 1e-6);
    }

    #[test]
    fn thermal_state_needs_vectors_and_budget() {
        let limits = Limits::default();
        assert!(matches!(thermal_state(&data(1, 2, 1.0, false), 1.0, &limits), Err(Error::MissingVectors)));
        let small = Limits { max_state_dim: 8, ..limits };
        assert!(matches!(thermal_state(&data(1, 4, 1.0, true), 1.0, &small), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn reduced_state_of_pair_is_full_state() {
        let sd = data(1, 2, 1.0, true);
        let limits = Limits::default();
        for t in [1e-3, 0.9, 4.0] {
            let reduced = nn_reduced_density(&sd, t, 1).unwrap();
            let full = thermal_state(&sd, t, &limits).unwrap();
            assert!((reduced.matrix - full.matrix).iter().all(|z| z.norm() < 1e-12));
        }
    }

    #[test]
    fn reduced_state_is_translation_invariant_and_consistent() {
        let sd = data(1, 4, 1.0, true);
        let bond = to_complex(&heisenberg_bond(SpinValue::HALF).to_dense());
        let t = 1.0;
        let first = nn_reduced_density(&sd, t, 1).unwrap();
        assert!(first.is_valid());
        for site in 2..=4 {
            let other = nn_reduced_density(&sd, t, site).unwrap();
            assert!((&other.matrix - &first.matrix).iter().all(|z| z.norm() < 1e-8), "site {site}");
        }
        let correlation = first.expectation(&bond).re;
        let energy = observables(&sd, t).unwrap().energy;
        assert!((4.0 * 1.0 * correlation - energy).abs() < 1e-8);
    }

    #[test]
    fn reduced_state_at_high_temperature_is_flat() {
        let sd = data(1, 4, 1.0, true);
        let rho = nn_reduced_density(&sd, 1e6, 2).unwrap();
        let flat = ComplexMatrix::identity(4, 4) / Complex64::new(4.0, 0.0);
        assert!((rho.matrix - flat).iter().all(|z| z.norm() < 1e-6));
    }

    #[test]
    fn reduced_state_matches_partial_trace_of_full_state() {
        // open chain, sites 2-3 of 3 spin-1s
        let spec = ChainSpec::with_boundary(SpinValue::ONE, 3, 0.8, false).unwrap();
        let limits = Limits::default();
        let sd = diagonalize(&spec, true, &limits).unwrap();
        let full = thermal_state(&sd, 0.6, &limits).unwrap();
        let reduced = nn_reduced_density(&sd, 0.6, 2).unwrap();
        // trace out site 1 explicitly
        let mut expected = ComplexMatrix::zeros(9, 9);
        for a in 0..3 {
            for r in 0..9 {
                for c in 0..9 {
                    expected[(r, c)] += full.matrix[(a * 9 + r, a * 9 + c)];
                }
            }
        }
        assert!((reduced.matrix - expected).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn density_matrix_rejects_bad_dims() {
        let m = ComplexMatrix::identity(4, 4);
        assert!(DensityMatrix::new(m.clone(), vec![2, 3]).is_err());
        assert!(DensityMatrix::new(m, vec![2, 2]).is_ok());
    }
}
