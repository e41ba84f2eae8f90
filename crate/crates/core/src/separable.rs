//! Minimum energy over separable (product) states.
//!
//! For a product state `<S_i . S_j> = <S_i> . <S_j>` and `|<S>| <= s`, so the
//! minimum over product states is the classical minimum with spins of length
//! `s`. On an even ring that is the alternating `+x/-x` pattern with
//! `E_min = -J L s^2`. Three constructions are provided: the closed form,
//! an explicit binomial pair state (checked against rotated coherent states)
//! and a mean-field coordinate-descent minimizer used as an oracle.

use nalgebra::{DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::chain::ChainSpec;
use crate::error::{Error, Result};
use crate::matrix::{Complex64, ComplexMatrix};
use crate::spin::{spin_vector_operators, SpinValue};

pub type StateVector = DVector<Complex64>;

/// One normalized single-site state per chain site.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductState {
    pub factors: Vec<StateVector>,
}

impl ProductState {
    /// Normalizes each factor. Panics on a zero factor.
    pub fn new(factors: Vec<StateVector>) -> Self {
        let factors = factors
            .into_iter()
            .map(|f| {
                let norm = f.norm();
                assert!(norm > 0.0, "zero product-state factor");
                f / Complex64::new(norm, 0.0)
            })
            .collect();
        ProductState { factors }
    }

    /// The full state vector `f_1 ⊗ f_2 ⊗ ... ⊗ f_L`.
    pub fn to_vector(&self) -> StateVector {
        self.factors.iter().skip(1).fold(self.factors[0].clone(), |acc, f| acc.kronecker(f))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundMethod {
    ClosedForm,
    PairConstruction,
    NumericMinimizer,
}

impl BoundMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundMethod::ClosedForm => "closed-form",
            BoundMethod::PairConstruction => "pair-construction",
            BoundMethod::NumericMinimizer => "numeric-minimizer",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeparableBound {
    pub energy: f64,
    pub state: ProductState,
    pub method: BoundMethod,
}

/// `(<S^x>, <S^y>, <S^z>)` of a single-site state.
pub fn spin_expectation(spin: SpinValue, state: &StateVector) -> [f64; 3] {
    let norm_sq = state.norm_squared();
    spin_vector_operators(spin).map(|op| (state.adjoint() * op * state)[(0, 0)].re / norm_sq)
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// `<S_A . S_B>` for the product state `a ⊗ b`.
pub fn bond_correlation(spin: SpinValue, a: &StateVector, b: &StateVector) -> f64 {
    dot(spin_expectation(spin, a), spin_expectation(spin, b))
}

/// `<H>` of a product state, `J sum_bonds <S_i> . <S_j>`.
pub fn product_energy(spec: &ChainSpec, state: &ProductState) -> f64 {
    let spins: Vec<[f64; 3]> = state.factors.iter().map(|f| spin_expectation(spec.spin, f)).collect();
    spec.coupling * spec.bonds().iter().map(|&(i, j)| dot(spins[i], spins[j])).sum::<f64>()
}

/// `-J L s^2`, valid for even periodic antiferromagnetic rings.
pub fn e_min_closed_form(spec: &ChainSpec) -> Result<f64> {
    if !spec.periodic {
        return Err(Error::ClosedFormUnavailable("open chains need the numeric minimizer".into()));
    }
    if spec.sites % 2 == 1 {
        return Err(Error::ClosedFormUnavailable(format!(
            "odd ring L = {} is frustrated; use the numeric minimizer",
            spec.sites
        )));
    }
    if !spec.is_antiferromagnetic() {
        return Err(Error::ClosedFormUnavailable("closed form assumes J > 0".into()));
    }
    let s = spec.spin.value();
    Ok(-spec.coupling * spec.sites as f64 * s * s)
}

/// Recursion coefficients `C_0 .. C_top` of the explicit pair state.
///
/// `C_0 = 1` and `C_{m+1} = (2s - m)/(m + 1) C_m`; for integer `s` the last
/// coefficient is instead `C_s = (s + 1)/(4s) C_{s-1}`, absorbing the doubled
/// `|0>` amplitude.
pub fn pair_coefficients(spin: SpinValue) -> Vec<f64> {
    let two_s = f64::from(spin.twice());
    let top = (spin.twice() / 2) as usize; // s for integer spin, s - 1/2 otherwise
    let mut c = vec![1.0];
    for m in 0..top {
        let next = if !spin.is_half_integer() && m + 1 == top {
            let s = spin.value();
            (s + 1.0) / (4.0 * s) * c[m]
        } else {
            (two_s - m as f64) / (m as f64 + 1.0) * c[m]
        };
        c.push(next);
    }
    c
}

/// Literal explicit pair factors, each scaled by `2^-s`, before validation.
fn literal_pair(spin: SpinValue) -> (StateVector, StateVector) {
    let d = spin.local_dim();
    let twice = spin.twice() as usize;
    let c = pair_coefficients(spin);
    let mut a = StateVector::zeros(d);
    let mut b = StateVector::zeros(d);
    // |s - m> is basis index m, |m - s> is basis index 2s - m
    let mirror_sign = if spin.is_half_integer() { -1.0 } else { 1.0 };
    for (m, cm) in c.iter().enumerate() {
        let amp = cm.sqrt();
        let alt = if m % 2 == 0 { 1.0 } else { -1.0 };
        a[m] += Complex64::new(amp, 0.0);
        a[twice - m] += Complex64::new(amp, 0.0);
        b[m] += Complex64::new(alt * amp, 0.0);
        b[twice - m] += Complex64::new(alt * mirror_sign * amp, 0.0);
    }
    let scale = Complex64::new(0.5f64.powf(spin.value()), 0.0);
    (a * scale, b * scale)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairConstruction {
    pub factor_a: StateVector,
    pub factor_b: StateVector,
    /// `<S_A . S_B>` achieved by the literal construction.
    pub literal_correlation: f64,
    /// Largest deviation of a literal factor's norm from 1.
    pub literal_norm_error: f64,
    /// Whether the literal construction passed validation; when false the
    /// factors are the coherent-state fallback.
    pub literal_valid: bool,
}

/// Minimum-energy product state of one bond from the binomial recursion,
/// validated against `coherent_pair_state`.
pub fn pair_state(spin: SpinValue) -> PairConstruction {
    let (a, b) = literal_pair(spin);
    let s = spin.value();
    let literal_correlation = bond_correlation(spin, &a, &b);
    let literal_norm_error = (a.norm() - 1.0).abs().max((b.norm() - 1.0).abs());
    let (ca, cb) = coherent_pair_state(spin);
    let coherent_correlation = bond_correlation(spin, &ca, &cb);
    let literal_valid = literal_norm_error < 1e-12
        && (literal_correlation + s * s).abs() < 1e-10
        && (literal_correlation - coherent_correlation).abs() < 1e-10;
    if literal_valid {
        PairConstruction { factor_a: a, factor_b: b, literal_correlation, literal_norm_error, literal_valid }
    } else {
        log::warn!(
            "explicit pair state for s={spin} failed validation (correlation {literal_correlation}, norm error {literal_norm_error}); using coherent states"
        );
        PairConstruction { factor_a: ca, factor_b: cb, literal_correlation, literal_norm_error, literal_valid }
    }
}

/// `exp(-i angle S^y)` via the eigendecomposition of `S^y`.
fn rotation_about_y(spin: SpinValue, angle: f64) -> ComplexMatrix {
    let [_, sy, _] = spin_vector_operators(spin);
    let eig = SymmetricEigen::new(sy);
    let phases = eig.eigenvalues.map(|lambda| Complex64::new(0.0, -angle * lambda).exp());
    &eig.eigenvectors * ComplexMatrix::from_diagonal(&phases) * eig.eigenvectors.adjoint()
}

fn fix_phase(v: StateVector) -> StateVector {
    let pivot = v.iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap_or_default();
    let idx = v.iter().position(|z| z.norm() > 1e-8 * pivot.norm()).unwrap_or(0);
    let phase = v[idx] / Complex64::new(v[idx].norm(), 0.0);
    let fixed = v / phase;
    let norm = fixed.norm();
    fixed / Complex64::new(norm, 0.0)
}

/// Spin coherent states pointing along `+x` and `-x`: `|s>` rotated by
/// `±pi/2` about `y`.
pub fn coherent_pair_state(spin: SpinValue) -> (StateVector, StateVector) {
    let mut top = StateVector::zeros(spin.local_dim());
    top[0] = Complex64::new(1.0, 0.0);
    let plus = fix_phase(rotation_about_y(spin, std::f64::consts::FRAC_PI_2) * &top);
    let minus = fix_phase(rotation_about_y(spin, -std::f64::consts::FRAC_PI_2) * &top);
    (plus, minus)
}

/// Alternating pair factors around an even ring.
pub fn neel_product_state(spec: &ChainSpec) -> Result<ProductState> {
    if spec.sites % 2 == 1 && spec.periodic {
        return Err(Error::ClosedFormUnavailable(format!(
            "an alternating pattern does not close on an odd ring (L = {}); use the numeric minimizer",
            spec.sites
        )));
    }
    let pair = pair_state(spec.spin);
    let factors =
        (0..spec.sites).map(|i| if i % 2 == 0 { pair.factor_a.clone() } else { pair.factor_b.clone() }).collect();
    Ok(ProductState::new(factors))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MinimizerOptions {
    pub restarts: usize,
    /// Stop when one sweep lowers the energy by less than `tol * max(1, |E|)`.
    pub tol: f64,
    pub max_sweeps: usize,
    pub seed: u64,
}

impl Default for MinimizerOptions {
    fn default() -> Self {
        MinimizerOptions { restarts: 16, tol: 1e-13, max_sweeps: 20_000, seed: 0 }
    }
}

#[derive(Clone, Debug)]
pub struct MinimizerOutcome {
    pub bound: SeparableBound,
    /// False if the best restart hit `max_sweeps`.
    pub converged: bool,
    pub sweeps: usize,
    /// Energy before the first sweep and after each sweep, per restart.
    pub histories: Vec<Vec<f64>>,
}

fn random_factor(d: usize, rng: &mut ChaCha8Rng) -> StateVector {
    loop {
        let v =
            StateVector::from_fn(d, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let norm = v.norm();
        if norm > 1e-3 {
            return v / Complex64::new(norm, 0.0);
        }
    }
}

struct Run {
    state: ProductState,
    energy: f64,
    converged: bool,
    history: Vec<f64>,
}

fn descend(spec: &ChainSpec, options: &MinimizerOptions, restart: usize) -> Run {
    let ops = spin_vector_operators(spec.spin);
    let d = spec.spin.local_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed.wrapping_add(restart as u64));
    let mut factors: Vec<StateVector> = (0..spec.sites).map(|_| random_factor(d, &mut rng)).collect();
    let expectation = |f: &StateVector| ops.clone().map(|op| (f.adjoint() * op * f)[(0, 0)].re);
    let mut spins: Vec<[f64; 3]> = factors.iter().map(&expectation).collect();
    let bonds = spec.bonds();
    let energy_of =
        |spins: &[[f64; 3]]| spec.coupling * bonds.iter().map(|&(i, j)| dot(spins[i], spins[j])).sum::<f64>();

    let mut energy = energy_of(&spins);
    let mut history = vec![energy];
    let mut converged = false;
    for _ in 0..options.max_sweeps {
        for site in 0..spec.sites {
            // site energy is field . <S_site>, so the optimum is the ground state of field . S
            let mut field = [0.0; 3];
            for &(i, j) in &bonds {
                let other = if i == site {
                    j
                } else if j == site {
                    i
                } else {
                    continue;
                };
                for k in 0..3 {
                    field[k] += spec.coupling * spins[other][k];
                }
            }
            if dot(field, field) == 0.0 {
                continue;
            }
            let local: ComplexMatrix =
                (0..3).fold(ComplexMatrix::zeros(d, d), |acc, k| acc + &ops[k] * Complex64::new(field[k], 0.0));
            let eig = SymmetricEigen::new(local);
            let ground = eig.eigenvalues.imin();
            let candidate = eig.eigenvectors.column(ground).into_owned();
            let candidate_spin = expectation(&candidate);
            if dot(field, candidate_spin) < dot(field, spins[site]) {
                factors[site] = candidate;
                spins[site] = candidate_spin;
            }
        }
        let next = energy_of(&spins);
        history.push(next);
        let drop = energy - next;
        energy = next.min(energy);
        if drop < options.tol * energy.abs().max(1.0) {
            converged = true;
            break;
        }
    }
    Run { state: ProductState::new(factors), energy, converged, history }
}

/// Minimizes `<psi|H|psi>` over product states by mean-field coordinate
/// descent from `restarts` seeded random starts.
pub fn numeric_min_product_energy(spec: &ChainSpec, options: &MinimizerOptions) -> Result<MinimizerOutcome> {
    if options.restarts == 0 {
        return Err(Error::InvalidChain("restarts must be at least 1".into()));
    }
    let runs: Vec<Run> = (0..options.restarts).into_par_iter().map(|r| descend(spec, options, r)).collect();
    let best = runs
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.energy.total_cmp(&b.1.energy).then(a.0.cmp(&b.0)))
        .map(|(i, _)| i)
        .expect("at least one restart");
    let histories = runs.iter().map(|r| r.history.clone()).collect();
    let run = &runs[best];
    if !run.converged {
        log::warn!("product-state minimizer for {spec} stopped after {} sweeps without converging", options.max_sweeps);
    }
    // report the energy of the stored state itself
    let energy = product_energy(spec, &run.state);
    Ok(MinimizerOutcome {
        bound: SeparableBound { energy, state: run.state.clone(), method: BoundMethod::NumericMinimizer },
        converged: run.converged,
        sweeps: run.history.len() - 1,
        histories,
    })
}

/// Separable bound for any chain: closed form when available, otherwise
/// the numeric minimizer.
pub fn separable_bound(spec: &ChainSpec, options: &MinimizerOptions) -> Result<SeparableBound> {
    match e_min_closed_form(spec) {
        Ok(energy) => {
            let state = neel_product_state(spec)?;
            Ok(SeparableBound { energy, state, method: BoundMethod::ClosedForm })
        }
        Err(Error::ClosedFormUnavailable(_)) => Ok(numeric_min_product_energy(spec, options)?.bound),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::build_hamiltonian;
    use crate::limits::Limits;
    use crate::matrix::to_complex;

    fn spin(t: u32) -> SpinValue {
        SpinValue::from_twice(t).unwrap()
    }

    fn ring(t: u32, sites: usize) -> ChainSpec {
        ChainSpec::new(spin(t), sites, 1.0).unwrap()
    }

    fn real_parts(v: &StateVector) -> Vec<f64> {
        v.iter().map(|z| z.re).collect()
    }

    #[test]
    fn closed_form_values() {
        assert_eq!(e_min_closed_form(&ring(2, 2)).unwrap(), -2.0);
        assert_eq!(e_min_closed_form(&ring(1, 10)).unwrap(), -2.5);
        assert_eq!(e_min_closed_form(&ring(1, 2)).unwrap(), -0.5);
    }

    #[test]
    fn closed_form_refusals() {
        let open = ChainSpec::with_boundary(spin(1), 4, 1.0, false).unwrap();
        assert!(matches!(e_min_closed_form(&open), Err(Error::ClosedFormUnavailable(_))));
        assert!(matches!(e_min_closed_form(&ring(1, 3)), Err(Error::ClosedFormUnavailable(_))));
        assert!(matches!(neel_product_state(&ring(1, 5)), Err(Error::ClosedFormUnavailable(_))));
    }

    #[test]
    fn coefficients_are_binomial() {
        assert_eq!(pair_coefficients(spin(1)), vec![1.0]);
        assert_eq!(pair_coefficients(spin(2)), vec![1.0, 0.5]);
        assert_eq!(pair_coefficients(spin(3)), vec![1.0, 3.0]);
        assert_eq!(pair_coefficients(spin(4)), vec![1.0, 4.0, 1.5]);
    }

    #[test]
    fn spin_half_pair() {
        let pair = pair_state(spin(1));
        assert!(pair.literal_valid);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!(real_parts(&pair.factor_a).iter().zip([h, h]).all(|(a, b)| (a - b).abs() < 1e-15));
        assert!(real_parts(&pair.factor_b).iter().zip([h, -h]).all(|(a, b)| (a - b).abs() < 1e-15));
        assert!((pair.literal_correlation + 0.25).abs() < 1e-12);
    }

    #[test]
    fn spin_one_pair_matches_quarter_half_quarter() {
        let pair = pair_state(spin(2));
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!(real_parts(&pair.factor_a).iter().zip([0.5, r, 0.5]).all(|(a, b)| (a - b).abs() < 1e-15));
        assert!(real_parts(&pair.factor_b).iter().zip([0.5, -r, 0.5]).all(|(a, b)| (a - b).abs() < 1e-15));
        assert!((pair.literal_correlation + 1.0).abs() < 1e-12);
    }

    #[test]
    fn literal_pair_valid_for_supported_spins() {
        for t in 1..=5 {
            let pair = pair_state(spin(t));
            let s = spin(t).value();
            assert!(pair.literal_valid, "2s = {t}");
            assert!(pair.literal_norm_error < 1e-12);
            assert!((bond_correlation(spin(t), &pair.factor_a, &pair.factor_b) + s * s).abs() < 1e-10);
        }
    }

    #[test]
    fn coherent_states_point_along_x() {
        for t in 1..=5 {
            let s = spin(t);
            let (a, b) = coherent_pair_state(s);
            let ea = spin_expectation(s, &a);
            let eb = spin_expectation(s, &b);
            assert!((ea[0] - s.value()).abs() < 1e-12 && ea[1].abs() < 1e-12 && ea[2].abs() < 1e-12);
            assert!((eb[0] + s.value()).abs() < 1e-12);
            assert!((bond_correlation(s, &a, &b) + s.value().powi(2)).abs() < 1e-10);
        }
    }

    #[test]
    fn coherent_and_literal_agree_up_to_phase() {
        for t in 1..=5 {
            let (ca, cb) = coherent_pair_state(spin(t));
            let pair = pair_state(spin(t));
            assert!(((ca.adjoint() * &pair.factor_a)[(0, 0)].norm() - 1.0).abs() < 1e-10);
            assert!(((cb.adjoint() * &pair.factor_b)[(0, 0)].norm() - 1.0).abs() < 1e-10);
        }
        let (a, b) = coherent_pair_state(spin(2));
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!(a.iter().zip([0.5, r, 0.5]).all(|(z, e)| (z - Complex64::new(e, 0.0)).norm() < 1e-12));
        assert!(b.iter().zip([0.5, -r, 0.5]).all(|(z, e)| (z - Complex64::new(e, 0.0)).norm() < 1e-12));
    }

    #[test]
    fn neel_states_reach_closed_form() {
        for (t, l, expected) in [(2, 2, -2.0), (1, 4, -1.0), (2, 6, -6.0)] {
            let spec = ring(t, l);
            let state = neel_product_state(&spec).unwrap();
            assert!((product_energy(&spec, &state) - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn product_energy_agrees_with_full_hamiltonian() {
        let limits = Limits::default();
        for spec in [ring(2, 2), ring(1, 4), ring(3, 3)] {
            let mut rng = ChaCha8Rng::seed_from_u64(7);
            let d = spec.spin.local_dim();
            let state = ProductState::new((0..spec.sites).map(|_| random_factor(d, &mut rng)).collect());
            let h = to_complex(&build_hamiltonian(&spec, &limits).unwrap().to_dense());
            let psi = state.to_vector();
            let direct = (psi.adjoint() * h * &psi)[(0, 0)].re;
            assert!((direct - product_energy(&spec, &state)).abs() < 1e-12);
        }
    }

    #[test]
    fn minimizer_reaches_closed_form_on_even_rings() {
        let options = MinimizerOptions { restarts: 8, ..Default::default() };
        for t in 1..=3 {
            for l in [2, 4, 6] {
                let spec = ring(t, l);
                let outcome = numeric_min_product_energy(&spec, &options).unwrap();
                let exact = e_min_closed_form(&spec).unwrap();
                assert!(outcome.converged);
                assert!((outcome.bound.energy - exact).abs() < 1e-6, "2s={t} L={l}: {}", outcome.bound.energy);
                assert!((product_energy(&spec, &outcome.bound.state) - outcome.bound.energy).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn minimizer_sweeps_never_raise_energy() {
        let options = MinimizerOptions { restarts: 6, ..Default::default() };
        for spec in [ring(1, 3), ring(2, 5), ring(3, 4)] {
            let outcome = numeric_min_product_energy(&spec, &options).unwrap();
            for history in &outcome.histories {
                assert!(history.windows(2).all(|w| w[1] <= w[0] + 1e-12 * w[0].abs().max(1.0)));
            }
        }
    }

    #[test]
    fn minimizer_is_deterministic_for_a_seed() {
        let options = MinimizerOptions { restarts: 4, seed: 99, ..Default::default() };
        let a = numeric_min_product_energy(&ring(2, 5), &options).unwrap();
        let b = numeric_min_product_energy(&ring(2, 5), &options).unwrap();
        assert_eq!(a.bound.energy.to_bits(), b.bound.energy.to_bits());
        assert!(numeric_min_product_energy(&ring(2, 5), &MinimizerOptions { restarts: 0, ..options }).is_err());
    }

    /// Coplanar classical spins of length s on a grid of angles.
    fn coplanar_grid_minimum(s: f64, sites: usize, steps: usize) -> f64 {
        assert_eq!(sites, 3);
        let step = std::f64::consts::TAU / steps as f64;
        let mut best = f64::INFINITY;
        for a in 0..steps {
            for b in 0..steps {
                let angles = [0.0, a as f64 * step, b as f64 * step];
                let e: f64 = (0..3).map(|i| (angles[i] - angles[(i + 1) % 3]).cos()).sum::<f64>() * s * s;
                best = best.min(e);
            }
        }
        best
    }

    #[test]
    fn odd_ring_uses_frustrated_minimum() {
        let spec = ring(1, 3);
        let outcome = numeric_min_product_energy(&spec, &MinimizerOptions::default()).unwrap();
        let grid = coplanar_grid_minimum(0.5, 3, 720);
        assert!((grid + 0.375).abs() < 1e-9);
        assert!((outcome.bound.energy - grid).abs() < 1e-6, "{}", outcome.bound.energy);
        // any aligned product state has energy +3/4
        let up =
            ProductState::new(vec![StateVector::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]); 3]);
        assert!((product_energy(&spec, &up) - 0.75).abs() < 1e-12);
        assert!(outcome.bound.energy < 0.75);
        // the -J L s^2 formula is below the true product minimum here
        assert!(outcome.bound.energy > -0.75);
    }

    #[test]
    fn separable_bound_dispatches() {
        let options = MinimizerOptions::default();
        assert_eq!(separable_bound(&ring(1, 4), &options).unwrap().method, BoundMethod::ClosedForm);
        let odd = separable_bound(&ring(1, 3), &options).unwrap();
        assert_eq!(odd.method, BoundMethod::NumericMinimizer);
    }
}
