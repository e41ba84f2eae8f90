//! Single-site spin-s operators in the `|s>, |s-1>, ..., |-s>` basis and the
//! two-site exchange operator `S_i . S_j`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::matrix::{kron, Complex64, ComplexMatrix, RealSymMatrix, SparseMatrix};

/// A spin quantum number `s`, stored exactly as the integer `2s`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpinValue {
    twice_s: u32,
}

impl SpinValue {
    pub const HALF: SpinValue = SpinValue { twice_s: 1 };
    pub const ONE: SpinValue = SpinValue { twice_s: 2 };

    pub fn from_twice(twice_s: u32) -> Result<Self> {
        if twice_s == 0 {
            return Err(Error::InvalidSpin { input: "0".into(), reason: "spin must be positive".into() });
        }
        Ok(SpinValue { twice_s })
    }

    pub fn twice(self) -> u32 {
        self.twice_s
    }

    pub fn value(self) -> f64 {
        f64::from(self.twice_s) / 2.0
    }

    /// Local Hilbert-space dimension `2s + 1`.
    pub fn local_dim(self) -> usize {
        self.twice_s as usize + 1
    }

    pub fn is_half_integer(self) -> bool {
        self.twice_s % 2 == 1
    }

    /// Magnetic quantum numbers in basis order: `s, s-1, ..., -s`.
    pub fn m_values(self) -> Vec<f64> {
        (0..self.local_dim()).map(|k| self.value() - k as f64).collect()
    }

    /// `s(s+1)`.
    pub fn casimir(self) -> f64 {
        let s = self.value();
        s * (s + 1.0)
    }
}

impl fmt::Display for SpinValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_half_integer() {
            write!(f, "{}/2", self.twice_s)
        } else {
            write!(f, "{}", self.twice_s / 2)
        }
    }
}

impl FromStr for SpinValue {
    type Err = Error;

    /// Accepts `"1/2"`, `"3/2"`, `"0.5"`, `"1"`, `"2.5"`.
    fn from_str(input: &str) -> Result<Self> {
        let text = input.trim();
        let invalid = |reason: &str| Error::InvalidSpin { input: input.to_string(), reason: reason.to_string() };

        let twice = if let Some((num, den)) = text.split_once('/') {
            let num: u32 = num.trim().parse().map_err(|_| invalid("numerator is not an integer"))?;
            match den.trim() {
                "1" => num.checked_mul(2).ok_or_else(|| invalid("too large"))?,
                "2" => num,
                _ => return Err(invalid("denominator must be 1 or 2")),
            }
        } else {
            let value: f64 = text.parse().map_err(|_| invalid("not a number"))?;
            let doubled = value * 2.0;
            if !doubled.is_finite() || doubled.fract() != 0.0 || doubled > f64::from(u32::MAX) {
                return Err(invalid("spin must be an integer or half-integer"));
            }
            if doubled < 0.0 {
                return Err(invalid("spin must be positive"));
            }
            doubled as u32
        };
        if twice == 0 {
            return Err(invalid("spin must be positive"));
        }
        Ok(SpinValue { twice_s: twice })
    }
}

/// `S^z = diag(s, s-1, ..., -s)`.
pub fn sz_matrix(s: SpinValue) -> RealSymMatrix {
    RealSymMatrix::from_diagonal(&s.m_values())
}

/// Raising and lowering operators `(S+, S-)` with
/// `<m+1|S+|m> = sqrt((s-m)(s+m+1))` and `S- = (S+)^T`.
pub fn ladder_matrices(s: SpinValue) -> (SparseMatrix, SparseMatrix) {
    let spin = s.value();
    let m = s.m_values();
    // |m+1> sits one row above |m> in the descending basis.
    let raise = SparseMatrix::from_triplets(
        s.local_dim(),
        (1..s.local_dim()).map(|k| (k - 1, k, ((spin - m[k]) * (spin + m[k] + 1.0)).sqrt())),
    );
    let lower = raise.transpose();
    (raise, lower)
}

/// `S^x = (S+ + S-)/2` (real symmetric) and `S^y = (S+ - S-)/(2i)`.
pub fn sx_sy_matrices(s: SpinValue) -> (RealSymMatrix, ComplexMatrix) {
    let (raise, lower) = ladder_matrices(s);
    let sx = RealSymMatrix::symmetrized(&raise).scale(0.5);
    let diff = raise.add(&lower.scale(-1.0)).to_dense();
    // 1/(2i) = -i/2
    let sy = diff.map(|v| Complex64::new(0.0, -0.5 * v));
    (sx, sy)
}

/// `(S^x, S^y, S^z)` as dense complex matrices.
pub fn spin_vector_operators(s: SpinValue) -> [ComplexMatrix; 3] {
    let (sx, sy) = sx_sy_matrices(s);
    let real = |m: &RealSymMatrix| m.to_dense().map(|v| Complex64::new(v, 0.0));
    [real(&sx), sy, real(&sz_matrix(s))]
}

/// Exchange operator `S_1 . S_2 = Sz⊗Sz + (S+⊗S- + S-⊗S+)/2` on the
/// `(2s+1)^2`-dimensional pair space.
pub fn heisenberg_bond(s: SpinValue) -> RealSymMatrix {
    let sz = sz_matrix(s);
    let (raise, lower) = ladder_matrices(s);
    // S+⊗S- is the transpose of S-⊗S+, so their sum is exactly symmetric.
    let flip = RealSymMatrix::symmetrized(&kron(&raise, &lower)).scale(0.5);
    sz.kron(&sz).add(&flip)
}

#[cfg(test)]
mod tests {
    use nalgebra::DMatrix;

    use super::*;

    const SPINS: [u32; 5] = [1, 2, 3, 4, 5];

    fn max_abs(m: &ComplexMatrix) -> f64 {
        m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
    }

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!("1/2".parse::<SpinValue>().unwrap().twice(), 1);
        assert_eq!("0.5".parse::<SpinValue>().unwrap().twice(), 1);
        assert_eq!("1".parse::<SpinValue>().unwrap().twice(), 2);
        assert_eq!(" 5/2 ".parse::<SpinValue>().unwrap().twice(), 5);
        assert_eq!("2.5".parse::<SpinValue>().unwrap().twice(), 5);
        assert_eq!("3/1".parse::<SpinValue>().unwrap().twice(), 6);
    }

    #[test]
    fn rejects_non_half_integers() {
        for bad in ["0.3", "0", "-1/2", "1/3", "abc", "", "-1", "NaN"] {
            assert!(bad.parse::<SpinValue>().is_err(), "{bad} should be rejected");
        }
    }

    #[test]
    fn display_round_trips() {
        for t in SPINS {
            let s = SpinValue::from_twice(t).unwrap();
            assert_eq!(s.to_string().parse::<SpinValue>().unwrap(), s);
        }
        assert_eq!(SpinValue::HALF.to_string(), "1/2");
        assert_eq!(SpinValue::ONE.to_string(), "1");
    }

    #[test]
    fn sz_is_descending_diagonal() {
        let diag = |t| sz_matrix(SpinValue::from_twice(t).unwrap()).to_dense().diagonal().as_slice().to_vec();
        assert_eq!(diag(1), vec![0.5, -0.5]);
        assert_eq!(diag(2), vec![1.0, 0.0, -1.0]);
        assert_eq!(diag(3), vec![1.5, 0.5, -0.5, -1.5]);
    }

    #[test]
    fn ladder_entries() {
        let (up, down) = ladder_matrices(SpinValue::HALF);
        assert_eq!(up.get(0, 1), 1.0);
        assert_eq!(up.nnz(), 1);
        assert_eq!(down, up.transpose());

        let (up, _) = ladder_matrices(SpinValue::ONE);
        assert!((up.get(0, 1) - 2f64.sqrt()).abs() < 1e-15);
        assert!((up.get(1, 2) - 2f64.sqrt()).abs() < 1e-15);

        for t in SPINS {
            let (up, _) = ladder_matrices(SpinValue::from_twice(t).unwrap());
            // column 0 is |s>, which S+ annihilates
            assert!((0..up.dim()).all(|r| up.get(r, 0) == 0.0));
        }
    }

    #[test]
    fn sx_for_spin_half_is_half_pauli_x() {
        let (sx, sy) = sx_sy_matrices(SpinValue::HALF);
        assert_eq!(sx.to_dense(), DMatrix::from_row_slice(2, 2, &[0.0, 0.5, 0.5, 0.0]));
        assert_eq!(sy[(0, 1)], Complex64::new(0.0, -0.5));
        assert_eq!(sy[(1, 0)], Complex64::new(0.0, 0.5));
    }

    #[test]
    fn su2_commutators_hold() {
        let i = Complex64::new(0.0, 1.0);
        for t in SPINS {
            let [sx, sy, sz] = spin_vector_operators(SpinValue::from_twice(t).unwrap());
            let comm = |a: &ComplexMatrix, b: &ComplexMatrix| a * b - b * a;
            assert!(max_abs(&(comm(&sx, &sy) - &sz * i)) < 1e-12);
            assert!(max_abs(&(comm(&sy, &sz) - &sx * i)) < 1e-12);
            assert!(max_abs(&(comm(&sz, &sx) - &sy * i)) < 1e-12);
        }
    }

    #[test]
    fn casimir_is_s_s_plus_one() {
        for t in SPINS {
            let s = SpinValue::from_twice(t).unwrap();
            let [sx, sy, sz] = spin_vector_operators(s);
            let total = &sx * &sx + &sy * &sy + &sz * &sz;
            let expected = ComplexMatrix::identity(s.local_dim(), s.local_dim()) * Complex64::new(s.casimir(), 0.0);
            assert!(max_abs(&(total - expected)) < 1e-12);
        }
    }

    #[test]
    fn spin_one_casimir_is_two() {
        let [sx, sy, sz] = spin_vector_operators(SpinValue::ONE);
        let total = &sx * &sx + &sy * &sy + &sz * &sz;
        assert!(max_abs(&(total - ComplexMatrix::identity(3, 3) * Complex64::new(2.0, 0.0))) < 1e-12);
    }

    fn sorted_eigenvalues(m: DMatrix<f64>) -> Vec<f64> {
        let mut v = m.symmetric_eigenvalues().as_slice().to_vec();
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn bond_spectrum_spin_half() {
        let ev = sorted_eigenvalues(heisenberg_bond(SpinValue::HALF).to_dense());
        let expected = [-0.75, 0.25, 0.25, 0.25];
        assert!(ev.iter().zip(expected).all(|(a, b)| (a - b).abs() < 1e-12), "{ev:?}");
    }

    #[test]
    fn bond_spectrum_spin_one() {
        let ev = sorted_eigenvalues(heisenberg_bond(SpinValue::ONE).to_dense());
        let expected = [-2.0, -1.0, -1.0, -1.0, 1.0, 1.0, 1.0, 1.0, 1.0];
        assert!(ev.iter().zip(expected).all(|(a, b)| (a - b).abs() < 1e-12), "{ev:?}");
    }

    #[test]
    fn bond_is_traceless_and_conserves_total_sz() {
        for t in SPINS {
            let s = SpinValue::from_twice(t).unwrap();
            let bond = heisenberg_bond(s);
            assert!(bond.trace().abs() < 1e-12);
            let d = s.local_dim();
            let sz = sz_matrix(s).to_dense();
            let id = DMatrix::<f64>::identity(d, d);
            let total_sz = sz.kronecker(&id) + id.kronecker(&sz);
            let h = bond.to_dense();
            let residual = (&h * &total_sz - &total_sz * &h).amax();
            assert!(residual < 1e-12);
        }
    }
}
