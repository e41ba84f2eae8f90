//! Independent reference values, computed without the diagonalization
//! pipeline, and the built-in verification suite that compares the two.

use crate::chain::ChainSpec;
use crate::entanglement::{negativity_from_witness_spin1, su2_criterion_spin_half, witness};
use crate::limits::Limits;
use crate::scans::{characteristic_temperature, negativity_vanishing_temperature, pair_negativity, DEFAULT_TOL};
use crate::separable::{e_min_closed_form, numeric_min_product_energy, pair_state, MinimizerOptions};
use crate::spectra::diagonalize;
use crate::spin::SpinValue;
use crate::thermal::{nn_reduced_density, observables};

/// Levels of `2J S1.S2` from total-spin sectors: `E_S = J[S(S+1) - 2s(s+1)]`
/// with degeneracy `2S+1`, for `S = 0..2s`.
pub fn pair_levels(spin: SpinValue, coupling: f64) -> Vec<(f64, usize)> {
    let s = spin.value();
    (0..=spin.twice() as usize)
        .map(|total| {
            let t = total as f64;
            (coupling * (t * (t + 1.0) - 2.0 * s * (s + 1.0)), 2 * total + 1)
        })
        .collect()
}

/// Thermal energy of the two-site ring from sector sums.
pub fn pair_energy(spin: SpinValue, coupling: f64, temperature: f64) -> f64 {
    let levels = pair_levels(spin, coupling);
    let ground = levels.iter().map(|l| l.0).fold(f64::INFINITY, f64::min);
    let (mut z, mut e) = (0.0, 0.0);
    for (energy, degeneracy) in levels {
        let w = degeneracy as f64 * (-(energy - ground) / temperature).exp();
        z += w;
        e += w * energy;
    }
    e / z
}

/// Illinois-modified regula falsi on a bracketing interval.
pub fn regula_falsi<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let (mut fa, mut fb) = (f(a), f(b));
    assert!(fa * fb <= 0.0, "interval does not bracket a root");
    let mut side = 0;
    for _ in 0..500 {
        let c = (a * fb - b * fa) / (fb - fa);
        let fc = f(c);
        if fc.abs() < tol || (b - a).abs() < tol {
            return c;
        }
        if fc * fb > 0.0 {
            b = c;
            fb = fc;
            if side == -1 {
                fa /= 2.0;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb /= 2.0;
            }
            side = 1;
        }
    }
    0.5 * (a + b)
}

/// `T_c` of the two-site ring where the sector-sum energy equals `-2J s^2`.
pub fn pair_tc(spin: SpinValue, coupling: f64) -> f64 {
    let bound = -2.0 * coupling * spin.value().powi(2);
    regula_falsi(|t| pair_energy(spin, coupling, t) - bound, 1e-2 * coupling, 100.0 * coupling, 1e-14)
}

/// Root of `2u^3 - 3u^2 - 5 = 0` near 2.08, by Newton's method.
///
/// For the two-site spin-1 ring, `<(S1.S2)^2> = 2` at `u = exp(2J/T)`.
pub fn spin_one_threshold_root() -> f64 {
    let mut u: f64 = 2.0;
    for _ in 0..100 {
        let f = 2.0 * u.powi(3) - 3.0 * u.powi(2) - 5.0;
        let df = 6.0 * u.powi(2) - 6.0 * u;
        let next = u - f / df;
        if (next - u).abs() < 1e-15 {
            return next;
        }
        u = next;
    }
    u
}

/// Negativity-vanishing temperature of the two-site spin-1 ring, `2J / ln u*`.
pub fn spin_one_negativity_threshold(coupling: f64) -> f64 {
    2.0 * coupling / spin_one_threshold_root().ln()
}

/// Minimum energy of classical spins of length `s` on a ring:
/// `-J L s^2 cos(pi/L)` for odd `L`, `-J L s^2` for even `L`.
pub fn classical_ring_minimum(spin: SpinValue, sites: usize, coupling: f64) -> f64 {
    let s2 = spin.value().powi(2);
    let l = sites as f64;
    if sites.is_multiple_of(2) {
        -coupling * l * s2
    } else {
        -coupling * l * s2 * (std::f64::consts::PI / l).cos()
    }
}

/// Outcome of one verification check.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &str, value: f64, expected: f64, tol: f64) -> Check {
    let error = (value - expected).abs();
    Check {
        name: name.to_string(),
        passed: error <= tol,
        detail: format!("value {value:.12} expected {expected:.12} |error| {error:.3e} tol {tol:.1e}"),
    }
}

fn failed(name: &str, err: impl std::fmt::Display) -> Check {
    Check { name: name.to_string(), passed: false, detail: format!("error: {err}") }
}

/// Runs the built-in cross-checks between the library and the oracles above.
pub fn verify(limits: &Limits) -> Vec<Check> {
    let mut checks = Vec::new();
    let options = MinimizerOptions::default();
    let ring = |t: u32, l: usize, j: f64| ChainSpec::new(SpinValue::from_twice(t).unwrap(), l, j).unwrap();

    for (t, expected, name) in
        [(1, 2.0 / 3f64.ln(), "t_c s=1/2 L=2 = 2/ln3"), (2, 6.0 / 10f64.ln(), "t_c s=1 L=2 = 6/ln10")]
    {
        match characteristic_temperature(&ring(t, 2, 1.0), DEFAULT_TOL, limits, &options) {
            Ok(r) => checks.push(check(name, r.t_c, expected, 1e-6)),
            Err(e) => checks.push(failed(name, e)),
        }
    }
    for t in 3..=limits.max_twice_spin.min(5) {
        let spin = SpinValue::from_twice(t).unwrap();
        let name = format!("t_c s={spin} L=2 vs sector sums");
        match characteristic_temperature(&ring(t, 2, 1.0), DEFAULT_TOL, limits, &options) {
            Ok(r) => checks.push(check(&name, r.t_c, pair_tc(spin, 1.0), 1e-8)),
            Err(e) => checks.push(failed(&name, e)),
        }
    }

    let name = "negativity threshold s=1 L=2";
    match negativity_vanishing_temperature(&ring(2, 2, 1.0), 1e-9, limits) {
        Ok(th) => checks.push(check(name, th.t_n, spin_one_negativity_threshold(1.0), 5e-3)),
        Err(e) => checks.push(failed(name, e)),
    }

    for t in 1..=limits.max_twice_spin.min(5) {
        let spin = SpinValue::from_twice(t).unwrap();
        let pair = pair_state(spin);
        let correlation = crate::separable::bond_correlation(spin, &pair.factor_a, &pair.factor_b);
        checks.push(check(&format!("pair state correlation s={spin}"), correlation, -spin.value().powi(2), 1e-10));
        let name = format!("gap |E0 - E_min| s={spin} L=2");
        match diagonalize(&ring(t, 2, 1.0), false, limits) {
            Ok(sd) => {
                let gap = (sd.ground_energy() - e_min_closed_form(&sd.spec).unwrap()).abs();
                checks.push(check(&name, gap, 2.0 * spin.value(), 1e-10));
            }
            Err(e) => checks.push(failed(&name, e)),
        }
    }

    for (t, l) in [(1, 4), (2, 4), (1, 3), (2, 5)] {
        let spec = ring(t, l, 1.0);
        let name = format!("product minimum s={} L={l}", spec.spin);
        match numeric_min_product_energy(&spec, &options) {
            Ok(o) => checks.push(check(&name, o.bound.energy, classical_ring_minimum(spec.spin, l, 1.0), 1e-6)),
            Err(e) => checks.push(failed(&name, e)),
        }
    }

    // witness/negativity relations on the two-site rings
    let name = "spin-1 negativity vs witness relation";
    match diagonalize(&ring(2, 2, 1.0), true, limits) {
        Ok(sd) => {
            let worst = (1..=20)
                .map(|k| 0.1 * k as f64)
                .map(|t| -> crate::Result<f64> {
                    let obs = observables(&sd, t)?;
                    let w = witness(obs.energy, -2.0).witness;
                    let rhs = negativity_from_witness_spin1(w, obs.variance, 1.0)?;
                    Ok((rhs - pair_negativity(&sd, t)?).abs())
                })
                .collect::<crate::Result<Vec<_>>>();
            match worst {
                Ok(v) => checks.push(check(name, v.into_iter().fold(0.0, f64::max), 0.0, 1e-8)),
                Err(e) => checks.push(failed(name, e)),
            }
        }
        Err(e) => checks.push(failed(name, e)),
    }
    let name = "spin-1/2 criteria agree";
    match diagonalize(&ring(1, 2, 1.0), true, limits) {
        Ok(sd) => {
            let mut agree = true;
            for k in 1..=40 {
                let t = 0.1 * k as f64;
                let n = pair_negativity(&sd, t).unwrap_or(f64::NAN);
                let energy = observables(&sd, t).map(|o| o.energy).unwrap_or(f64::NAN);
                let rho = nn_reduced_density(&sd, t, 1);
                let corr = rho
                    .and_then(|r| crate::entanglement::bond_correlators(&r, SpinValue::HALF))
                    .map(|c| c.0)
                    .unwrap_or(f64::NAN);
                agree &= (n > 0.0) == su2_criterion_spin_half(corr) && (n > 0.0) == witness(energy, -0.5).entangled;
            }
            checks.push(Check { name: name.into(), passed: agree, detail: "40-point grid T in [0.1, 4]".into() });
        }
        Err(e) => checks.push(failed(name, e)),
    }
    checks
}
