//! Energy witness, partial transpose and negativity.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::matrix::{to_complex, Complex64, ComplexMatrix};
use crate::spin::{heisenberg_bond, SpinValue};
use crate::thermal::DensityMatrix;

/// Default threshold below which a partial-transpose eigenvalue counts as negative.
pub const NEGATIVITY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WitnessReport {
    pub temperature: Option<f64>,
    pub energy: f64,
    pub separable_bound: f64,
    /// `<H> - E_min`
    pub witness: f64,
    /// `witness < 0`
    pub entangled: bool,
}

/// `W = <H> - E_min`; entanglement is certified only when `W < 0`.
pub fn witness(energy: f64, separable_bound: f64) -> WitnessReport {
    let w = energy - separable_bound;
    WitnessReport { temperature: None, energy, separable_bound, witness: w, entangled: w < 0.0 }
}

pub fn witness_at(temperature: f64, energy: f64, separable_bound: f64) -> WitnessReport {
    WitnessReport { temperature: Some(temperature), ..witness(energy, separable_bound) }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

fn bipartition(rho: &DensityMatrix) -> Result<(usize, usize)> {
    match rho.dims.as_slice() {
        &[a, b] if a * b == rho.dimension() => Ok((a, b)),
        _ => Err(Error::MalformedDims { dims: rho.dims.clone(), dimension: rho.dimension() }),
    }
}

/// Transposes the indices of one factor of a two-factor density matrix:
/// `(a b; a' b') -> (a' b; a b')` for `A`, `(a b'; a' b)` for `B`.
pub fn partial_transpose(rho: &DensityMatrix, subsystem: Subsystem) -> Result<ComplexMatrix> {
    let (da, db) = bipartition(rho)?;
    let n = da * db;
    let m = &rho.matrix;
    Ok(ComplexMatrix::from_fn(n, n, |row, col| {
        let (a, b) = (row / db, row % db);
        let (ap, bp) = (col / db, col % db);
        match subsystem {
            Subsystem::A => m[(ap * db + b, a * db + bp)],
            Subsystem::B => m[(a * db + bp, ap * db + b)],
        }
    }))
}

#[derive(Clone, Debug, PartialEq)]
pub struct NegativityReport {
    /// `|sum of negative eigenvalues of rho^T|`
    pub negativity: f64,
    pub negative_eigenvalues: Vec<f64>,
    pub tolerance: f64,
}

/// Negativity from the spectrum of the partial transpose over subsystem `A`.
/// Eigenvalues in `(-tol, 0)` count as zero.
pub fn negativity(rho: &DensityMatrix, tol: f64) -> Result<NegativityReport> {
    let pt = partial_transpose(rho, Subsystem::A)?;
    let mut eigenvalues = pt.symmetric_eigenvalues().as_slice().to_vec();
    eigenvalues.sort_by(f64::total_cmp);
    let negative_eigenvalues: Vec<f64> = eigenvalues.into_iter().filter(|&v| v < -tol).collect();
    let negativity = negative_eigenvalues.iter().sum::<f64>().abs();
    Ok(NegativityReport { negativity, negative_eigenvalues, tolerance: tol })
}

/// Spin-1/2 pair in an SU(2)-invariant state: NPT iff `<S1.S2> < -1/4`.
pub fn su2_criterion_spin_half(correlation: f64) -> bool {
    correlation < -0.25
}

/// Spin-1 pair in an SU(2)-invariant state: NPT iff `<(S1.S2)^2> > 2`.
pub fn su2_criterion_spin_one(squared_correlation: f64) -> bool {
    squared_correlation > 2.0
}

/// `[(W - 2J)^2 + V(H)] / (8 J^2) - 1` for the two-site spin-1 ring.
///
/// This equals the negativity only while the state is entangled; above the
/// negativity threshold it goes negative while the true negativity is zero.
pub fn negativity_from_witness_spin1(witness: f64, variance: f64, coupling: f64) -> Result<f64> {
    if coupling.is_nan() || coupling <= 0.0 {
        return Err(Error::InvalidCoupling(coupling));
    }
    Ok(((witness - 2.0 * coupling).powi(2) + variance) / (8.0 * coupling * coupling) - 1.0)
}

/// `(tr(rho S1.S2), tr(rho (S1.S2)^2))` for a two-site state.
pub fn bond_correlators(rho: &DensityMatrix, spin: SpinValue) -> Result<(f64, f64)> {
    let (da, db) = bipartition(rho)?;
    if da != spin.local_dim() || db != spin.local_dim() {
        return Err(Error::MalformedDims { dims: rho.dims.clone(), dimension: rho.dimension() });
    }
    let bond: DMatrix<f64> = heisenberg_bond(spin).to_dense();
    let bond = to_complex(&bond);
    let first = rho.expectation(&bond).re;
    let second = rho.expectation(&(&bond * &bond)).re;
    Ok((first, second))
}

/// Projector onto the two-site singlet `sum_m (-1)^(s-m) |m, -m> / sqrt(2s+1)`.
pub fn singlet(spin: SpinValue) -> DensityMatrix {
    let d = spin.local_dim();
    let mut psi = nalgebra::DVector::<Complex64>::zeros(d * d);
    for k in 0..d {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        // |m> is index k, |-m> is index d-1-k
        psi[k * d + (d - 1 - k)] = Complex64::new(sign, 0.0);
    }
    DensityMatrix::pure(&psi, vec![d, d]).expect("square by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::separable::{coherent_pair_state, pair_state};

    fn max_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
        (a - b).iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    #[test]
    fn witness_arithmetic() {
        let r = witness(-3.0, -2.0);
        assert_eq!(r.witness, -1.0);
        assert!(r.entangled);
        let r = witness(-2.0, -2.0);
        assert_eq!(r.witness, 0.0);
        assert!(!r.entangled);
        assert_eq!(witness_at(0.5, -1.5, -0.5).temperature, Some(0.5));
    }

    #[test]
    fn qubit_singlet_partial_transpose() {
        let rho = singlet(SpinValue::HALF);
        let pt = partial_transpose(&rho, Subsystem::A).unwrap();
        let mut ev = pt.symmetric_eigenvalues().as_slice().to_vec();
        ev.sort_by(f64::total_cmp);
        let expected = [-0.5, 0.5, 0.5, 0.5];
        assert!(ev.iter().zip(expected).all(|(a, b)| (a - b).abs() < 1e-12), "{ev:?}");
        assert!((negativity(&rho, NEGATIVITY_TOL).unwrap().negativity - 0.5).abs() < 1e-12);
    }

    #[test]
    fn qutrit_singlet_has_unit_negativity() {
        let rho = singlet(SpinValue::ONE);
        let report = negativity(&rho, NEGATIVITY_TOL).unwrap();
        assert!((report.negativity - 1.0).abs() < 1e-12);
        assert!(report.negative_eigenvalues.iter().all(|&v| v < -NEGATIVITY_TOL));
    }

    #[test]
    fn maximally_mixed_is_unchanged() {
        let flat = DensityMatrix::new(ComplexMatrix::identity(4, 4) / Complex64::new(4.0, 0.0), vec![2, 2]).unwrap();
        let pt = partial_transpose(&flat, Subsystem::A).unwrap();
        assert_eq!(pt, flat.matrix);
    }

    #[test]
    fn transposing_either_side_gives_same_spectrum() {
        let rho = singlet(SpinValue::from_twice(3).unwrap());
        let mut a = partial_transpose(&rho, Subsystem::A).unwrap().symmetric_eigenvalues().as_slice().to_vec();
        let mut b = partial_transpose(&rho, Subsystem::B).unwrap().symmetric_eigenvalues().as_slice().to_vec();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-12));
    }

    #[test]
    fn partial_transpose_is_an_involution() {
        let rho = singlet(SpinValue::ONE);
        for side in [Subsystem::A, Subsystem::B] {
            let once = DensityMatrix::new(partial_transpose(&rho, side).unwrap(), vec![3, 3]).unwrap();
            let twice = partial_transpose(&once, side).unwrap();
            assert_eq!(twice, rho.matrix);
        }
    }

    #[test]
    fn product_states_have_zero_negativity() {
        for t in 1..=4 {
            let s = SpinValue::from_twice(t).unwrap();
            let (a, b) = coherent_pair_state(s);
            let pair = pair_state(s);
            for (x, y) in [(a.clone(), b.clone()), (pair.factor_a.clone(), pair.factor_b.clone()), (a, pair.factor_a)] {
                let d = s.local_dim();
                let rho = DensityMatrix::pure(&x.kronecker(&y), vec![d, d]).unwrap();
                assert_eq!(negativity(&rho, NEGATIVITY_TOL).unwrap().negativity, 0.0);
                // same spectrum as rho itself
                let pt = partial_transpose(&rho, Subsystem::A).unwrap();
                assert!(pt.symmetric_eigenvalues().iter().all(|&v| v > -1e-12));
                assert!(max_diff(&pt, &pt.adjoint()) < 1e-12);
            }
        }
    }

    #[test]
    fn malformed_dims_are_rejected() {
        let rho = DensityMatrix::new(ComplexMatrix::identity(8, 8), vec![2, 2, 2]).unwrap();
        assert!(matches!(partial_transpose(&rho, Subsystem::A), Err(Error::MalformedDims { .. })));
        assert!(negativity(&rho, NEGATIVITY_TOL).is_err());
    }

    #[test]
    fn criteria_are_strict() {
        assert!(su2_criterion_spin_half(-0.75));
        assert!(!su2_criterion_spin_half(0.0));
        assert!(!su2_criterion_spin_half(-0.25));
        assert!(su2_criterion_spin_one(4.0));
        assert!(!su2_criterion_spin_one(2.0));
    }

    #[test]
    fn singlet_correlators() {
        let (c1, c2) = bond_correlators(&singlet(SpinValue::ONE), SpinValue::ONE).unwrap();
        assert!((c1 + 2.0).abs() < 1e-12);
        assert!((c2 - 4.0).abs() < 1e-12);
        let (c1, _) = bond_correlators(&singlet(SpinValue::HALF), SpinValue::HALF).unwrap();
        assert!((c1 + 0.75).abs() < 1e-12);
    }

    #[test]
    fn witness_formula_for_spin_one() {
        // ground state: W = -2J, V = 0 -> 1
        assert!((negativity_from_witness_spin1(-2.0, 0.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        // infinite temperature: <H> = 0, <H^2> = 48/9 -> -1/3
        let rhs = negativity_from_witness_spin1(2.0, 48.0 / 9.0, 1.0).unwrap();
        assert!((rhs + 1.0 / 3.0).abs() < 1e-15);
        // <H^2> = 8J^2 boundary, with J = 1.5: pick <H> = -4, so W = -1, V = 18 - 16 = 2
        let j: f64 = 1.5;
        let energy = -4.0;
        let w = energy + 2.0 * j;
        let v = 8.0 * j * j - energy * energy;
        assert!(negativity_from_witness_spin1(w, v, j).unwrap().abs() < 1e-12);
        assert!(negativity_from_witness_spin1(0.0, 0.0, 0.0).is_err());
        assert!(negativity_from_witness_spin1(0.0, 0.0, -1.0).is_err());
    }
}
