//! Stability verdicts, gain profiles, added noise and sensitivity.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::csv_table;
use crate::interconnect::ClosedLoopSystem;
use crate::models::{ControllerModel, PlantModel};
use crate::tfcore::{ComplexPoly, RationalFunction, DEFAULT_ROOT_TOL};

/// Default stability margin, in units of the reference decay rate.
pub const DEFAULT_STABILITY_MARGIN: f64 = 1e-9;

/// Anything with a signal gain `b1 -> b̃1` and a characteristic polynomial.
pub trait AmplifierSystem {
    fn signal_gain(&self) -> &RationalFunction;

    fn characteristic_poly(&self) -> &ComplexPoly;

    fn poles(&self) -> Result<Vec<Complex64>>;

    /// Noise flavour matching this kind of system.
    fn native_flavor(&self) -> NoiseFlavor;

    /// `|G13|² / |G11|²` at `iω`, zero without a loss port.
    fn excess_ratio(&self, omega: f64) -> Result<f64>;
}

impl AmplifierSystem for PlantModel {
    fn signal_gain(&self) -> &RationalFunction {
        self.g11()
    }

    fn characteristic_poly(&self) -> &ComplexPoly {
        PlantModel::characteristic_poly(self)
    }

    fn poles(&self) -> Result<Vec<Complex64>> {
        PlantModel::characteristic_poly(self).roots(DEFAULT_ROOT_TOL)
    }

    fn native_flavor(&self) -> NoiseFlavor {
        NoiseFlavor::Plant
    }

    fn excess_ratio(&self, omega: f64) -> Result<f64> {
        let Some(g13) = self.g13() else {
            return Ok(0.0);
        };
        let g11 = self.g11().eval_iw(omega)?;
        if g11.norm_sqr() == 0.0 {
            return Err(Error::DegenerateGain { omega });
        }
        Ok(g13.eval_iw(omega)?.norm_sqr() / g11.norm_sqr())
    }
}

impl AmplifierSystem for ClosedLoopSystem {
    fn signal_gain(&self) -> &RationalFunction {
        ClosedLoopSystem::signal_gain(self)
    }

    fn characteristic_poly(&self) -> &ComplexPoly {
        ClosedLoopSystem::characteristic_poly(self)
    }

    fn poles(&self) -> Result<Vec<Complex64>> {
        Ok(ClosedLoopSystem::poles(self).to_vec())
    }

    fn native_flavor(&self) -> NoiseFlavor {
        NoiseFlavor::ClosedLoop
    }

    /// Evaluated from the plant entries:
    ///
    /// ```text
    /// |G13 − c K21 (G13 G22 − G12 G23)|² / |G11 − c K21 (G11 G22 − G12 G21)|²,  c = α1α2
    /// ```
    fn excess_ratio(&self, omega: f64) -> Result<f64> {
        let plant = self.plant();
        let Some(g13) = plant.g13() else {
            return Ok(0.0);
        };
        let g23 = plant.g23().expect("lossy plant has both loss entries");
        let s = Complex64::new(0.0, omega);
        let [g11, g12, g21, g22, g13, g23] =
            [plant.g11(), plant.g12(), plant.g21(), plant.g22(), g13, g23].map(|g| g.eval(s));
        let (g11, g12, g21, g22, g13, g23) = (g11?, g12?, g21?, g22?, g13?, g23?);
        let fb = self.feedback();
        let ck = self.controller().k21().eval(s)? * (fb.alpha1 * fb.alpha2);
        let num = g13 - ck * (g13 * g22 - g12 * g23);
        let den = g11 - ck * (g11 * g22 - g12 * g21);
        if den.norm_sqr() == 0.0 {
            return Err(Error::DegenerateGain { omega });
        }
        Ok(num.norm_sqr() / den.norm_sqr())
    }
}

/// Pole-based stability verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityVerdict {
    pub poles: Vec<Complex64>,
    pub max_real_part: f64,
    pub stable: bool,
    /// A pole sits within `margin` of the imaginary axis.
    pub marginal: bool,
    pub margin: f64,
}

pub fn stability<S: AmplifierSystem + ?Sized>(system: &S, margin: f64) -> Result<StabilityVerdict> {
    if !(margin >= 0.0) {
        return Err(Error::Parameter(format!(
            "margin must be nonnegative, got {margin}"
        )));
    }
    let poles = system.poles()?;
    let max_real_part = poles.iter().map(|p| p.re).fold(f64::NEG_INFINITY, f64::max);
    Ok(StabilityVerdict {
        stable: max_real_part < -margin,
        marginal: max_real_part.abs() <= margin,
        max_real_part,
        margin,
        poles,
    })
}

/// Largest `|λ|` for which the detuned NDPA with a beam splitter of
/// reflectivity `beta` in its idler loop stays stable:
///
/// ```text
/// |λ| < (κ/2) √((1 + β) / (β² (1 − β)))
/// ```
///
/// For `β² ≪ 1` this reads `|β| < κ / (2|λ|)`. Returns `+∞` for `β = 0`.
pub fn detuned_stability_threshold(kappa: f64, beta: f64) -> Result<f64> {
    if !(kappa > 0.0) {
        return Err(Error::Parameter(format!(
            "kappa must be positive, got {kappa}"
        )));
    }
    if !(beta.abs() < 1.0) {
        return Err(Error::Parameter(format!(
            "|beta| must be below 1, got {beta}"
        )));
    }
    if beta == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(0.5 * kappa * ((1.0 + beta) / (beta * beta * (1.0 - beta))).sqrt())
}

/// Uniform frequency grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrequencyGrid {
    pub omega_min: f64,
    pub omega_max: f64,
    pub n_points: usize,
}

impl Default for FrequencyGrid {
    fn default() -> Self {
        FrequencyGrid {
            omega_min: -2.0,
            omega_max: 2.0,
            n_points: 401,
        }
    }
}

impl FrequencyGrid {
    pub fn new(omega_min: f64, omega_max: f64, n_points: usize) -> Result<Self> {
        let grid = FrequencyGrid {
            omega_min,
            omega_max,
            n_points,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_points < 2 {
            return Err(Error::Parameter(format!(
                "need at least 2 grid points, got {}",
                self.n_points
            )));
        }
        if !(self.omega_min.is_finite()
            && self.omega_max.is_finite()
            && self.omega_min < self.omega_max)
        {
            return Err(Error::Parameter(format!(
                "invalid frequency range [{}, {}]",
                self.omega_min, self.omega_max
            )));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        let n = self.n_points;
        let step = (self.omega_max - self.omega_min) / (n - 1) as f64;
        (0..n)
            .map(|k| {
                if k == n - 1 {
                    self.omega_max
                } else {
                    self.omega_min + step * k as f64
                }
            })
            .collect()
    }
}

/// Sampled complex frequency response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainCurve {
    omegas: Vec<f64>,
    values: Vec<Complex64>,
}

impl GainCurve {
    pub fn new(omegas: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        if omegas.len() != values.len() {
            return Err(Error::Domain(format!(
                "{} frequencies for {} values",
                omegas.len(),
                values.len()
            )));
        }
        if omegas.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Domain(
                "frequencies must be strictly increasing".into(),
            ));
        }
        Ok(GainCurve { omegas, values })
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }

    /// `20 log10 |value|`.
    pub fn gain_db(&self) -> Vec<f64> {
        self.values
            .iter()
            .map(|v| 20.0 * v.norm().log10())
            .collect()
    }

    /// Phase in degrees, wrapped to `(−180, 180]`.
    pub fn phase_deg(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.arg().to_degrees()).collect()
    }

    /// Phase in degrees, unwrapped along the grid by choosing the multiple
    /// of 360 nearest to the previous point.
    pub fn unwrapped_phase_deg(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::with_capacity(self.values.len());
        for v in &self.values {
            let mut p = v.arg();
            if let Some(&prev) = out.last() {
                p += ((prev.to_radians() - p) / (2.0 * PI)).round() * 2.0 * PI;
            }
            out.push(p.to_degrees());
        }
        out
    }

    /// Index of the largest magnitude.
    pub fn peak_index(&self) -> Option<usize> {
        (0..self.values.len())
            .max_by(|&a, &b| self.values[a].norm().total_cmp(&self.values[b].norm()))
    }

    /// CSV with columns `omega,re,im,gain_db,phase_deg`; the phase is unwrapped.
    pub fn to_csv(&self) -> String {
        let db = self.gain_db();
        let ph = self.unwrapped_phase_deg();
        csv_table(
            &["omega", "re", "im", "gain_db", "phase_deg"],
            (0..self.len()).map(|k| {
                vec![
                    self.omegas[k],
                    self.values[k].re,
                    self.values[k].im,
                    db[k],
                    ph[k],
                ]
            }),
        )
    }

    /// The gain-curve columns plus `phase_wrapped_deg`.
    pub fn to_bode_csv(&self) -> String {
        let db = self.gain_db();
        let ph = self.unwrapped_phase_deg();
        let wrapped = self.phase_deg();
        csv_table(
            &[
                "omega",
                "re",
                "im",
                "gain_db",
                "phase_deg",
                "phase_wrapped_deg",
            ],
            (0..self.len()).map(|k| {
                vec![
                    self.omegas[k],
                    self.values[k].re,
                    self.values[k].im,
                    db[k],
                    ph[k],
                    wrapped[k],
                ]
            }),
        )
    }
}

fn check_axis_poles<S: AmplifierSystem + ?Sized>(system: &S, lo: f64, hi: f64) -> Result<()> {
    for p in system.poles()? {
        if p.re.abs() <= DEFAULT_STABILITY_MARGIN * p.norm().max(1.0) && p.im >= lo && p.im <= hi {
            return Err(Error::PoleEvaluation { s: p });
        }
    }
    Ok(())
}

/// Samples the signal gain on a uniform grid of `n_points` frequencies.
pub fn gain_profile<S: AmplifierSystem + ?Sized>(
    system: &S,
    omega_min: f64,
    omega_max: f64,
    n_points: usize,
) -> Result<GainCurve> {
    let grid = FrequencyGrid::new(omega_min, omega_max, n_points)?;
    check_axis_poles(system, omega_min, omega_max)?;
    let omegas = grid.points();
    let values = omegas
        .iter()
        .map(|&w| system.signal_gain().eval_iw(w))
        .collect::<Result<Vec<_>>>()?;
    GainCurve::new(omegas, values)
}

/// Half the distance between the two frequencies where the gain has fallen
/// `drop_db` below its peak, located by linear interpolation in dB.
pub fn effective_bandwidth(curve: &GainCurve, drop_db: f64) -> Result<f64> {
    if !(drop_db > 0.0) {
        return Err(Error::Parameter(format!(
            "drop_db must be positive, got {drop_db}"
        )));
    }
    let db = curve.gain_db();
    let w = curve.omegas();
    let peak = curve
        .peak_index()
        .ok_or_else(|| Error::Range("empty gain curve".into()))?;
    let target = db[peak] - drop_db;
    let crossing = |i: usize, j: usize| w[i] + (target - db[i]) / (db[j] - db[i]) * (w[j] - w[i]);
    let right = (peak + 1..db.len())
        .find(|&k| db[k] <= target)
        .map(|k| crossing(k - 1, k));
    let left = (0..peak)
        .rev()
        .find(|&k| db[k] <= target)
        .map(|k| crossing(k + 1, k));
    match (left, right) {
        (Some(l), Some(r)) => Ok((r - l) / 2.0),
        _ => Err(Error::Range(format!(
            "gain does not fall {drop_db} dB below its peak on both sides within [{}, {}]",
            w[0],
            w[w.len() - 1]
        ))),
    }
}

/// Which added-noise expression to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseFlavor {
    /// Lossless phase-preserving amplifier: `(|g1|² − 1) / (2|g1|²)`.
    Ideal,
    /// Open-loop plant with signal loss.
    Plant,
    /// Closed loop with lossy lines.
    ClosedLoop,
}

/// Added noise referred to the input, with vacuum in every noise port.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseReport {
    pub omega: f64,
    pub a_value: f64,
    pub half_term: f64,
    /// `−1 / (2|G11|²)`
    pub gain_term: f64,
    /// `|G13|² / |G11|²`
    pub excess_term: f64,
    pub flavor: NoiseFlavor,
}

/// Evaluates the added noise `1/2 − 1/(2|G11|²) + |G13|²/|G11|²` at `iω`.
///
/// `Ideal` drops the excess term. `Plant` and `ClosedLoop` must match the
/// kind of `system`.
pub fn added_noise<S: AmplifierSystem + ?Sized>(
    system: &S,
    omega: f64,
    flavor: NoiseFlavor,
) -> Result<NoiseReport> {
    if flavor != NoiseFlavor::Ideal && flavor != system.native_flavor() {
        return Err(Error::Parameter(format!(
            "{flavor:?} noise requested for a {:?} system",
            system.native_flavor()
        )));
    }
    let g = system.signal_gain().eval_iw(omega)?.norm_sqr();
    if !(g > 0.0) {
        return Err(Error::DegenerateGain { omega });
    }
    let half_term = 0.5;
    let gain_term = -0.5 / g;
    let excess_term = match flavor {
        NoiseFlavor::Ideal => 0.0,
        _ => system.excess_ratio(omega)?,
    };
    // Physically nonnegative; only rounding can push it below zero.
    let a_value = (half_term + gain_term + excess_term).max(0.0);
    Ok(NoiseReport {
        omega,
        a_value,
        half_term,
        gain_term,
        excess_term,
        flavor,
    })
}

/// The large-gain floor `1/2 + |G13|²/|G11|²` of the plant's added noise.
pub fn plant_noise_floor(plant: &PlantModel, omega: f64) -> Result<f64> {
    Ok(0.5 + plant.excess_ratio(omega)?)
}

/// CSV with columns `omega,a_value,half_term,gain_term,excess_term`.
pub fn noise_csv(reports: &[NoiseReport]) -> String {
    csv_table(
        &["omega", "a_value", "half_term", "gain_term", "excess_term"],
        reports
            .iter()
            .map(|r| vec![r.omega, r.a_value, r.half_term, r.gain_term, r.excess_term]),
    )
}

/// `1 / |1 − K21 G22|`.
pub fn sensitivity_factor(g22: Complex64, k21: Complex64) -> Result<f64> {
    let den = (Complex64::new(1.0, 0.0) - k21 * g22).norm();
    if den == 0.0 {
        return Err(Error::Degeneracy(format!(
            "1 − K21 G22 = 0 for G22 = {g22}, K21 = {k21}"
        )));
    }
    Ok(1.0 / den)
}

/// Bound on the relative gain fluctuation of the closed loop per unit
/// relative fluctuation of `G22`, `1 / |1 − K21(iω) G22(iω)|`.
pub fn sensitivity_bound(
    plant: &PlantModel,
    controller: &ControllerModel,
    omega: f64,
) -> Result<f64> {
    sensitivity_factor(
        plant.g22().eval_iw(omega)?,
        controller.k21().eval_iw(omega)?,
    )
}

/// First-order relative change of `|G11fb|` when `G22` moves by `dg22`:
///
/// ```text
/// (1 − |K21|²) / |G22* − K21|² · Re[(G22* − K21) / (1 − K21 G22) · ΔG22]
/// ```
pub fn first_order_gain_fluctuation(
    g22: Complex64,
    k21: Complex64,
    dg22: Complex64,
) -> Result<f64> {
    let one = Complex64::new(1.0, 0.0);
    let loop_den = one - k21 * g22;
    let a = g22.conj() - k21;
    if loop_den.norm() == 0.0 || a.norm() == 0.0 {
        return Err(Error::Degeneracy(format!(
            "singular fluctuation formula at G22 = {g22}, K21 = {k21}"
        )));
    }
    Ok((1.0 - k21.norm_sqr()) / a.norm_sqr() * (a / loop_den * dg22).re)
}

/// Classical sensitivity `1 / (1 + G K)`.
pub fn classical_sensitivity(g: f64, k: f64) -> Result<f64> {
    let den = 1.0 + g * k;
    if den == 0.0 {
        return Err(Error::Degeneracy(format!(
            "1 + G K = 0 for G = {g}, K = {k}"
        )));
    }
    Ok(1.0 / den)
}

/// Loop gain `K21(iω) G22(iω)` over `grid`.
pub fn loop_gain_bode(
    plant: &PlantModel,
    controller: &ControllerModel,
    grid: &FrequencyGrid,
) -> Result<GainCurve> {
    grid.validate()?;
    let omegas = grid.points();
    let values = omegas
        .iter()
        .map(|&w| Ok(controller.k21().eval_iw(w)? * plant.g22().eval_iw(w)?))
        .collect::<Result<Vec<_>>>()?;
    GainCurve::new(omegas, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interconnect::{close_ideal_feedback, close_lossy_feedback, FeedbackLoopConfig};
    use crate::models::{build_beam_splitter, build_detuned_ndpa, build_ndpa};

    fn standard(lambda: f64) -> PlantModel {
        build_ndpa(1.0, lambda, 0.0, 0.0, 0.0).unwrap()
    }

    #[test]
    fn standard_ndpa_threshold() {
        let v = stability(&standard(0.49), DEFAULT_STABILITY_MARGIN).unwrap();
        assert!(v.stable);
        assert!((v.max_real_part + 0.01).abs() < 1e-9);
        let v = stability(&standard(0.51), DEFAULT_STABILITY_MARGIN).unwrap();
        assert!(!v.stable && !v.marginal);
        assert!((v.max_real_part - 0.01).abs() < 1e-9);
        let v = stability(&standard(0.5), DEFAULT_STABILITY_MARGIN).unwrap();
        assert!(!v.stable && v.marginal);
    }

    #[test]
    fn detuned_loop_stability() {
        let k = build_beam_splitter(0.1).unwrap();
        let ok = close_ideal_feedback(&build_detuned_ndpa(1.0, 5.0).unwrap(), &k).unwrap();
        assert!(stability(&ok, DEFAULT_STABILITY_MARGIN).unwrap().stable);
        let bad = close_ideal_feedback(&build_detuned_ndpa(1.0, 5.6).unwrap(), &k).unwrap();
        assert!(!stability(&bad, DEFAULT_STABILITY_MARGIN).unwrap().stable);
    }

    #[test]
    fn threshold_values() {
        assert!((detuned_stability_threshold(1.0, 0.1).unwrap() - 5.527707983925667).abs() < 1e-12);
        assert!(
            (detuned_stability_threshold(1.0, 0.05).unwrap() - 10.513149660756936).abs() < 1e-12
        );
        assert_eq!(
            detuned_stability_threshold(1.0, 0.0).unwrap(),
            f64::INFINITY
        );
        assert!(detuned_stability_threshold(1.0, 1.0).is_err());
    }

    #[test]
    fn detuned_peak_and_flat_profile() {
        let curve = gain_profile(&build_detuned_ndpa(1.0, 5.0).unwrap(), -1.0, 1.0, 201).unwrap();
        let db = curve.gain_db();
        let peak = curve.peak_index().unwrap();
        assert_eq!(curve.omegas()[peak], 0.0);
        assert!((db[peak] - 20.0 * 401f64.sqrt().log10()).abs() < 1e-9);

        let flat = gain_profile(&build_detuned_ndpa(1.0, 0.0).unwrap(), -1.0, 1.0, 11).unwrap();
        assert!(flat.gain_db().iter().all(|d| d.abs() < 1e-12));
        assert!(matches!(
            effective_bandwidth(&flat, 3.0),
            Err(Error::Range(_))
        ));
    }

    #[test]
    fn closed_loop_peak() {
        let cl = close_ideal_feedback(
            &build_detuned_ndpa(1.0, 5.0).unwrap(),
            &build_beam_splitter(0.1).unwrap(),
        )
        .unwrap();
        // Over nonnegative frequencies the gain decays from its value at zero;
        // the near-critical pole puts a sharper resonance at ω < 0.
        let curve = gain_profile(&cl, 0.0, 1.0, 201).unwrap();
        let db = curve.gain_db();
        assert_eq!(curve.peak_index(), Some(0));
        assert!((db[0] - 20.0 * 8.776f64.log10()).abs() < 1e-3);
        assert!(db.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn axis_pole_rejected() {
        let err = gain_profile(&standard(0.5), -1.0, 1.0, 10).unwrap_err();
        assert!(err.is_pole_evaluation());
    }

    #[test]
    fn bandwidth_is_lambda_independent() {
        // |G11|² = 1 + λ²/(ω² + 1/4)² falls to r·(1 + 16λ²) with r = 10^(−0.3).
        let r = 10f64.powf(-0.3);
        let oracle = |l: f64| (l / (r * (1.0 + 16.0 * l * l) - 1.0).sqrt() - 0.25).sqrt();
        for l in [1.0, 3.0, 5.0] {
            let curve =
                gain_profile(&build_detuned_ndpa(1.0, l).unwrap(), -2.0, 2.0, 4001).unwrap();
            let bw = effective_bandwidth(&curve, 3.0).unwrap();
            assert!((bw - oracle(l)).abs() < 1e-4, "{l}: {bw}");
        }
    }

    #[test]
    fn ideal_noise_at_resonance() {
        let r = added_noise(&standard(0.4), 0.0, NoiseFlavor::Ideal).unwrap();
        let g: f64 = 1.64 / 0.36;
        assert!((r.a_value - (g * g - 1.0) / (2.0 * g * g)).abs() < 1e-12);
        assert!((r.a_value - 0.4759).abs() < 1e-4);
        assert!((r.a_value - (r.half_term + r.gain_term + r.excess_term)).abs() < 1e-12);
        assert!(added_noise(&standard(0.4), 0.0, NoiseFlavor::ClosedLoop).is_err());
    }

    #[test]
    fn closed_loop_excess_matches_row_sum() {
        let plant = build_ndpa(1.0, 5.0, 5.0, 5.0, 0.05).unwrap();
        let k = build_beam_splitter(0.1).unwrap();
        let cl =
            close_lossy_feedback(&plant, &k, FeedbackLoopConfig::symmetric(0.5).unwrap()).unwrap();
        let r = added_noise(&cl, 0.0, NoiseFlavor::ClosedLoop).unwrap();
        let row: Vec<f64> = cl
            .b1_row()
            .values()
            .map(|g| g.eval_iw(0.0).unwrap().norm_sqr())
            .collect();
        let g11 = cl.signal_gain_at(0.0).unwrap().norm_sqr();
        let ratio = (row.iter().sum::<f64>() - g11) / (2.0 * g11);
        assert!((r.a_value - ratio).abs() < 1e-10);
        let g13 = cl
            .entry(crate::interconnect::InputPort::D3)
            .unwrap()
            .eval_iw(0.0)
            .unwrap();
        assert!((r.excess_term - g13.norm_sqr() / g11).abs() < 1e-10);
    }

    #[test]
    fn sensitivity_footnote() {
        let plant = build_detuned_ndpa(1.0, 5.0).unwrap();
        let b = sensitivity_bound(&plant, &build_beam_splitter(0.1).unwrap(), 0.0).unwrap();
        assert!((b - 1.0 / Complex64::new(1.1, 2.0).norm()).abs() < 1e-12);
        let b0 = sensitivity_bound(&plant, &build_beam_splitter(0.0).unwrap(), 0.0).unwrap();
        assert!((b0 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn fluctuation_reductions() {
        let g22 = Complex64::new(-1.0, -20.0);
        assert_eq!(
            first_order_gain_fluctuation(g22, Complex64::new(0.3, 0.0), Complex64::new(0.0, 0.0))
                .unwrap(),
            0.0
        );
        let d = Complex64::new(1e-3, 2e-3);
        let direct = (g22.conj() * d).re / g22.norm_sqr();
        let f = first_order_gain_fluctuation(g22, Complex64::new(0.0, 0.0), d).unwrap();
        assert!((f - direct).abs() < 1e-15);
    }

    #[test]
    fn bode_loop_gain() {
        let grid = FrequencyGrid::new(-1.0, 1.0, 21).unwrap();
        let plant = build_detuned_ndpa(1.0, 5.0).unwrap();
        let curve = loop_gain_bode(&plant, &build_beam_splitter(0.1).unwrap(), &grid).unwrap();
        assert!((curve.values()[10].norm() - 0.1 * 401f64.sqrt()).abs() < 1e-12);
        let zero = loop_gain_bode(&plant, &build_beam_splitter(0.0).unwrap(), &grid).unwrap();
        assert!(zero.values().iter().all(|v| v.norm() == 0.0));
        let passive =
            loop_gain_bode(&standard(0.0), &build_beam_splitter(0.3).unwrap(), &grid).unwrap();
        assert!(passive
            .values()
            .iter()
            .all(|v| (v.norm() - 0.3).abs() < 1e-12));
    }

    #[test]
    fn unwrap_is_continuous() {
        let omegas: Vec<f64> = (0..50).map(|k| k as f64).collect();
        let values = omegas
            .iter()
            .map(|&w| Complex64::from_polar(1.0, 0.3 * w))
            .collect();
        let curve = GainCurve::new(omegas.clone(), values).unwrap();
        for (w, p) in omegas.iter().zip(curve.unwrapped_phase_deg()) {
            assert!((p - (0.3 * w).to_degrees()).abs() < 1e-9);
        }
        let csv = curve.to_csv();
        assert!(csv.starts_with("omega,re,im,gain_db,phase_deg\n"));
        assert_eq!(csv.lines().count(), 51);
    }
}
