//! Characteristic temperatures and the tables behind the three figures.
//!
//! `T_c` is where the thermal energy crosses the separable bound. `<H>(T)`
//! is continuous and nondecreasing, so a bracketing bisection always
//! converges once a sign change is found.

use std::fmt;

use rayon::prelude::*;

use crate::chain::ChainSpec;
use crate::entanglement::{negativity, NEGATIVITY_TOL};
use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::separable::{separable_bound, BoundMethod, MinimizerOptions};
use crate::spectra::{diagonalize, SpectralData};
use crate::spin::SpinValue;
use crate::thermal::{nn_reduced_density, observables, observables_from_levels};

pub const DEFAULT_TOL: f64 = 1e-8;
const INITIAL_LOW: f64 = 1e-3;
const INITIAL_HIGH: f64 = 1.0;
const MAX_DOUBLINGS: usize = 60;
const MAX_BISECTIONS: usize = 400;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TcResult {
    pub spec: ChainSpec,
    pub ground_energy: f64,
    pub separable_bound: f64,
    pub bound_method: BoundMethod,
    pub t_c: f64,
    pub bracket: (f64, f64),
    pub iterations: usize,
    /// `|<H>(T_c) - E_min|`
    pub residual: f64,
}

/// Root of a nondecreasing `f` with `f(lo) < 0`, expanding `hi` by doubling.
///
/// Stops when the bracket is narrower than `tol / 10` and `|f(mid)|` is below
/// `f_tol`.
fn bisect_increasing<F>(f: F, tol: f64, f_tol: f64) -> Result<(f64, (f64, f64), usize, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut lo = INITIAL_LOW;
    let mut halvings = 0;
    while f(lo)? >= 0.0 {
        lo /= 2.0;
        halvings += 1;
        if halvings > MAX_DOUBLINGS {
            return Err(Error::BracketFailure(halvings));
        }
    }
    let mut hi = INITIAL_HIGH.max(2.0 * lo);
    let mut doublings = 0;
    while f(hi)? < 0.0 {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > MAX_DOUBLINGS {
            return Err(Error::BracketFailure(doublings));
        }
    }
    let mut iterations = 0;
    loop {
        let mid = 0.5 * (lo + hi);
        let value = f(mid)?;
        iterations += 1;
        if (hi - lo) <= 0.1 * tol && value.abs() < f_tol || iterations >= MAX_BISECTIONS || mid == lo || mid == hi {
            return Ok((mid, (lo, hi), iterations, value.abs()));
        }
        if value < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

/// Temperature where the thermal energy of `levels` reaches `bound`.
pub fn crossing_temperature(levels: &[f64], bound: f64, tol: f64) -> Result<(f64, (f64, f64), usize, f64)> {
    let ground = levels.iter().copied().fold(f64::INFINITY, f64::min);
    // a gap within rounding of zero is no gap
    if ground >= bound - 1e-10 * bound.abs().max(1.0) {
        return Err(Error::NoCrossing { ground, bound });
    }
    let f = |t: f64| observables_from_levels(levels, t).map(|o| o.energy - bound);
    bisect_increasing(f, tol, tol * bound.abs().max(1.0))
}

/// `T_c` for an already diagonalized chain and a given separable bound.
pub fn characteristic_temperature_from(
    sd: &SpectralData,
    bound: f64,
    bound_method: BoundMethod,
    tol: f64,
) -> Result<TcResult> {
    let (t_c, bracket, iterations, residual) = crossing_temperature(&sd.eigenvalues, bound, tol)?;
    Ok(TcResult {
        spec: sd.spec,
        ground_energy: sd.ground_energy(),
        separable_bound: bound,
        bound_method,
        t_c,
        bracket,
        iterations,
        residual,
    })
}

/// `T_c` from eigenvalues only. Even rings use `-J L s^2`; odd or open
/// chains use the numeric product-state minimum.
pub fn characteristic_temperature(
    spec: &ChainSpec,
    tol: f64,
    limits: &Limits,
    options: &MinimizerOptions,
) -> Result<TcResult> {
    let sd = diagonalize(spec, false, limits)?;
    let bound = separable_bound(spec, options)?;
    characteristic_temperature_from(&sd, bound.energy, bound.method, tol)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NegativityThreshold {
    /// Smallest temperature found at which the negativity is zero.
    pub t_n: f64,
    pub bracket: (f64, f64),
    pub iterations: usize,
}

/// Negativity of the two-site thermal state at `temperature`.
pub fn pair_negativity(sd: &SpectralData, temperature: f64) -> Result<f64> {
    let rho = nn_reduced_density(sd, temperature, 1)?;
    Ok(negativity(&rho, NEGATIVITY_TOL)?.negativity)
}

/// Temperature above which the two-site thermal state has zero negativity.
pub fn negativity_vanishing_temperature_from(sd: &SpectralData, tol: f64) -> Result<NegativityThreshold> {
    if sd.spec.sites != 2 {
        return Err(Error::InvalidChain(format!(
            "negativity threshold is defined for two sites, got L = {}",
            sd.spec.sites
        )));
    }
    let entangled = |t: f64| pair_negativity(sd, t).map(|n| n > 0.0);
    let mut lo = INITIAL_LOW;
    if !entangled(lo)? {
        return Err(Error::NoCrossing { ground: sd.ground_energy(), bound: f64::NAN });
    }
    let mut hi = INITIAL_HIGH;
    let mut doublings = 0;
    while entangled(hi)? {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > MAX_DOUBLINGS {
            return Err(Error::BracketFailure(doublings));
        }
    }
    let mut iterations = 0;
    while hi - lo > tol && iterations < MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if entangled(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    Ok(NegativityThreshold { t_n: hi, bracket: (lo, hi), iterations })
}

pub fn negativity_vanishing_temperature(spec: &ChainSpec, tol: f64, limits: &Limits) -> Result<NegativityThreshold> {
    if spec.sites != 2 {
        return Err(Error::InvalidChain(format!(
            "negativity threshold is defined for two sites, got L = {}",
            spec.sites
        )));
    }
    let sd = diagonalize(spec, true, limits)?;
    negativity_vanishing_temperature_from(&sd, tol)
}

/// A table cell.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Float(f64),
    Int(i64),
    Bool(bool),
    Text(String),
}

impl Value {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Float(v) => Some(*v),
            Value::Int(v) => Some(*v as f64),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Float(v) => write!(f, "{v}"),
            Value::Int(v) => write!(f, "{v}"),
            Value::Bool(v) => write!(f, "{v}"),
            Value::Text(v) => f.write_str(v),
        }
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Float(v)
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as i64)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_string())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Text(v)
    }
}

/// Rows keyed by their leading columns, sorted, plus scalar diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanTable {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
    pub diagnostics: Vec<(String, Value)>,
}

impl ScanTable {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        ScanTable {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            diagnostics: Vec::new(),
        }
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric values of a column; non-numeric cells become NaN.
    pub fn column(&self, name: &str) -> Vec<f64> {
        let Some(k) = self.column_index(name) else { return Vec::new() };
        self.rows.iter().map(|r| r[k].as_f64().unwrap_or(f64::NAN)).collect()
    }

    pub fn diagnostic(&self, name: &str) -> Option<&Value> {
        self.diagnostics.iter().find(|(k, _)| k == name).map(|(_, v)| v)
    }
}

/// Ordinary least squares `y = slope x + intercept`; returns
/// `(slope, intercept, max |residual|)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let max_residual = x.iter().zip(y).map(|(a, b)| (b - slope * a - intercept).abs()).fold(0.0, f64::max);
    (slope, intercept, max_residual)
}

/// `T_c` of the two-site ring for each spin.
pub fn tc_vs_spin(
    spins: &[SpinValue],
    coupling: f64,
    tol: f64,
    limits: &Limits,
    options: &MinimizerOptions,
) -> Result<ScanTable> {
    let mut spins = spins.to_vec();
    spins.sort();
    spins.dedup();
    let results: Vec<TcResult> = spins
        .par_iter()
        .map(|&s| characteristic_temperature(&ChainSpec::new(s, 2, coupling)?, tol, limits, options))
        .collect::<Result<_>>()?;

    let mut table =
        ScanTable::new("fig1", &["s", "twice_s", "t_c", "ground_energy", "e_min", "gap", "iterations", "residual"]);
    for r in &results {
        table.rows.push(vec![
            r.spec.spin.value().into(),
            (r.spec.spin.twice() as usize).into(),
            r.t_c.into(),
            r.ground_energy.into(),
            r.separable_bound.into(),
            (r.separable_bound - r.ground_energy).into(),
            r.iterations.into(),
            r.residual.into(),
        ]);
    }
    if results.len() >= 2 {
        let x: Vec<f64> = results.iter().map(|r| r.spec.spin.value()).collect();
        let y: Vec<f64> = results.iter().map(|r| r.t_c).collect();
        let (slope, intercept, max_residual) = linear_fit(&x, &y);
        table.diagnostics.push(("fit_slope".into(), slope.into()));
        table.diagnostics.push(("fit_intercept".into(), intercept.into()));
        table.diagnostics.push(("fit_max_residual".into(), max_residual.into()));
    }
    Ok(table)
}

/// Largest default ring length for the length scan at spin `s`.
pub fn default_max_sites(spin: SpinValue) -> usize {
    match spin.twice() {
        1 => 12,
        2 => 8,
        3 => 6,
        _ => 4,
    }
}

/// Even lengths `2, 4, ..., default_max_sites(s)`.
pub fn default_lengths(spin: SpinValue) -> Vec<usize> {
    (2..=default_max_sites(spin)).step_by(2).collect()
}

/// True when `values` decreases strictly until it first comes within 2% of
/// its last entry.
pub fn decreasing_to_plateau(values: &[f64]) -> bool {
    let Some(&last) = values.last() else { return true };
    let settle = values.iter().position(|v| (v - last).abs() <= 0.02 * last.abs()).unwrap_or(values.len() - 1);
    values[..=settle].windows(2).all(|w| w[1] < w[0])
}

/// `T_c` against ring length. Lengths above the dimension budget, or with no
/// crossing, are kept as skipped rows.
pub fn tc_vs_length(
    spin: SpinValue,
    lengths: &[usize],
    coupling: f64,
    tol: f64,
    limits: &Limits,
    options: &MinimizerOptions,
) -> Result<ScanTable> {
    let mut lengths = lengths.to_vec();
    lengths.sort_unstable();
    lengths.dedup();
    let rows: Vec<(usize, std::result::Result<TcResult, Error>)> = lengths
        .par_iter()
        .map(|&l| {
            let result = ChainSpec::new(spin, l, coupling)
                .and_then(|spec| characteristic_temperature(&spec, tol, limits, options));
            (l, result)
        })
        .collect();

    let mut table = ScanTable::new(
        "fig2",
        &["sites", "t_c", "ground_energy", "e_min", "bound_method", "iterations", "residual", "status"],
    );
    let mut even_values = Vec::new();
    for (l, result) in rows {
        match result {
            Ok(r) => {
                if l % 2 == 0 {
                    even_values.push(r.t_c);
                }
                table.rows.push(vec![
                    l.into(),
                    r.t_c.into(),
                    r.ground_energy.into(),
                    r.separable_bound.into(),
                    r.bound_method.as_str().into(),
                    r.iterations.into(),
                    r.residual.into(),
                    "ok".into(),
                ]);
            }
            Err(e @ (Error::TooLarge { .. } | Error::NoCrossing { .. })) => {
                log::warn!("skipping L = {l}: {e}");
                let nan = Value::Float(f64::NAN);
                table.rows.push(vec![
                    l.into(),
                    nan.clone(),
                    nan.clone(),
                    nan.clone(),
                    "".into(),
                    0usize.into(),
                    nan,
                    format!("skipped: {e}").into(),
                ]);
            }
            Err(e) => return Err(e),
        }
    }
    table.diagnostics.push(("spin".into(), spin.to_string().into()));
    table.diagnostics.push(("decreasing_to_plateau_even_l".into(), decreasing_to_plateau(&even_values).into()));
    if let Some(&last) = even_values.last() {
        table.diagnostics.push(("largest_even_l_t_c".into(), last.into()));
    }
    Ok(table)
}

/// `(T_cc(s + 1/2) - T_cc(s)) / s` from the largest-L value of each table;
/// reported, never asserted.
pub fn plateau_spacing(lower: &ScanTable, upper: &ScanTable, lower_spin: SpinValue) -> Option<f64> {
    let get = |t: &ScanTable| t.diagnostic("largest_even_l_t_c").and_then(Value::as_f64);
    Some((get(upper)? - get(lower)?) / lower_spin.value())
}

/// Evenly spaced grid of `n` points on `[start, end]`.
pub fn linspace(start: f64, end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..n).map(|k| start + (end - start) * k as f64 / (n - 1) as f64).collect(),
    }
}

pub fn default_delta_temperatures() -> Vec<f64> {
    linspace(0.1, 4.0, 64)
}

pub fn default_delta_couplings() -> Vec<f64> {
    linspace(0.1, 2.0, 64)
}

/// `Δ = N - |W|` on a temperature × coupling grid for the two-site spin-1 ring,
/// with `W` set to zero at and above `T_c(J)`.
pub fn delta_map(temperatures: &[f64], couplings: &[f64], tol: f64, limits: &Limits) -> Result<ScanTable> {
    if temperatures.iter().chain(couplings).any(|v| *v <= 0.0 || !v.is_finite()) {
        return Err(Error::InvalidChain("delta map grids must be positive".into()));
    }
    let mut temperatures = temperatures.to_vec();
    temperatures.sort_by(f64::total_cmp);
    temperatures.dedup();
    let mut couplings = couplings.to_vec();
    couplings.sort_by(f64::total_cmp);
    couplings.dedup();

    let columns: Vec<Vec<Vec<Value>>> = couplings
        .par_iter()
        .map(|&j| {
            let spec = ChainSpec::new(SpinValue::ONE, 2, j)?;
            let sd = diagonalize(&spec, true, limits)?;
            let bound = -2.0 * j;
            let tc = characteristic_temperature_from(&sd, bound, BoundMethod::ClosedForm, tol)?.t_c;
            let tn = negativity_vanishing_temperature_from(&sd, tol)?.t_n;
            temperatures
                .iter()
                .map(|&t| {
                    let n = pair_negativity(&sd, t)?;
                    let w = observables(&sd, t)?.energy - bound;
                    let clamped = if t >= tc { 0.0 } else { w };
                    Ok(vec![
                        j.into(),
                        t.into(),
                        n.into(),
                        w.into(),
                        clamped.into(),
                        (n - clamped.abs()).into(),
                        tc.into(),
                        tn.into(),
                    ])
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let mut table = ScanTable::new(
        "fig3",
        &["coupling", "temperature", "negativity", "witness", "witness_clamped", "delta", "t_c", "t_n"],
    );
    table.rows = columns.into_iter().flatten().collect();
    let step = temperatures.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    let mismatch = delta_boundary_mismatch(&table);
    table.diagnostics.push(("temperature_step".into(), step.into()));
    table.diagnostics.push(("max_boundary_mismatch".into(), mismatch.into()));
    if let Some(&weakest) = couplings.first() {
        let (warm, all) = weak_coupling_delta(&table, weakest, 1.0);
        table.diagnostics.push(("weakest_coupling".into(), weakest.into()));
        table.diagnostics.push(("weakest_coupling_max_abs_delta_t_ge_1".into(), warm.into()));
        table.diagnostics.push(("weakest_coupling_max_abs_delta".into(), all.into()));
    }
    Ok(table)
}

/// Largest `|Δ|` in the column at `coupling`, over rows with
/// `T >= t_min` and over the whole column.
pub fn weak_coupling_delta(table: &ScanTable, coupling: f64, t_min: f64) -> (f64, f64) {
    let couplings = table.column("coupling");
    let temps = table.column("temperature");
    let deltas = table.column("delta");
    let (mut warm, mut all): (f64, f64) = (0.0, 0.0);
    for k in (0..couplings.len()).filter(|&k| couplings[k] == coupling) {
        all = all.max(deltas[k].abs());
        if temps[k] >= t_min {
            warm = warm.max(deltas[k].abs());
        }
    }
    (warm, all)
}

/// For each coupling column, the lowest grid temperature above which `Δ`
/// vanishes identically, compared against that column's negativity
/// threshold `T_N`. Returns the largest `|T_edge - T_N|` over columns whose
/// `T_N` lies inside the temperature grid, or zero when there are none.
pub fn delta_boundary_mismatch(table: &ScanTable) -> f64 {
    let couplings = table.column("coupling");
    let temps = table.column("temperature");
    let deltas = table.column("delta");
    let tns = table.column("t_n");
    let mut worst: f64 = 0.0;
    let mut start = 0;
    while start < couplings.len() {
        let mut end = start;
        while end < couplings.len() && couplings[end] == couplings[start] {
            end += 1;
        }
        // rows of one column are sorted by temperature
        if tns[start] > temps[end - 1] || tns[start] < temps[start] {
            start = end;
            continue;
        }
        let mut edge = temps[end - 1];
        for k in (start..end).rev() {
            if deltas[k].abs() <= 1e-9 {
                edge = temps[k];
            } else {
                break;
            }
        }
        worst = worst.max((edge - tns[start]).abs());
        start = end;
    }
    worst
}
