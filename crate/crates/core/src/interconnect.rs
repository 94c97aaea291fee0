//! Closing the coherent feedback loop around the amplifier's idler port.
//!
//! The idler output `b̃2` is routed into controller input `b3`, and controller
//! output `b̃4` is routed back into the idler input `b2`. With lossy
//! transmission lines modelled as beam splitters,
//!
//! ```text
//! b3† = α1 b̃2† + δ1 d5†,    b2† = α2 b̃4† + δ2 d6†,    αi² + δi² = 1
//! ```
//!
//! Writing every plant entry over its shared denominator, `G_ij = N_ij / D`,
//! and every controller entry as `K_ij = P_ij / Q`, all closed-loop entries
//! share the characteristic polynomial
//!
//! ```text
//! χ(s) = D Q − α1 α2 P21 N22        (the cleared form of 1 − α1α2 K21 G22)
//! ```
//!
//! The `b̃1` row is
//!
//! ```text
//! G11fb = (N11 Q − α1α2 P21 M11) / χ,   M11 = (N11 N22 − N12 N21) / D
//! G13fb = (N13 Q − α1α2 P21 M13) / χ,   M13 = (N13 N22 − N12 N23) / D
//! G12fb = α2 N12 P22 / χ      G14fb = α2 N12 P23 / χ
//! G15fb = α2 δ1 N12 P21 / χ   G16fb = δ2 N12 Q / χ
//! ```
//!
//! and the `b̃3†` row (phase-conjugating output) is
//!
//! ```text
//! b1:  α1 P11 N21 / χ          d3:  α1 P11 N23 / χ
//! b4†: (P12 Q D + α1α2 N22 (P11 P22 − P12 P21)) / (Q χ)
//! d4†: (P13 Q D + α1α2 N22 (P11 P23 − P13 P21)) / (Q χ)
//! d5†: δ1 P11 D / χ            d6†: α1 δ2 P11 N22 / χ
//! ```
//!
//! For the NDPA the divisions by `D` defining `M11` and `M13` are exact, so
//! the plant poles cancel out of the loop.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{ControllerModel, PlantModel};
use crate::tfcore::{
    ComplexPoly, Flavor, Port, RationalFunction, RationalMatrix, DEFAULT_ROOT_TOL,
};

/// Relative remainder below which a polynomial division is treated as exact.
const EXACT_DIVISION_TOL: f64 = 1e-10;

/// Relative size of cancellation residue dropped from the characteristic polynomial.
const CHAR_TRIM_TOL: f64 = 64.0 * f64::EPSILON;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Transmissivities of the two feedback transmission lines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeedbackLoopConfig {
    pub alpha1: f64,
    pub alpha2: f64,
}

impl Default for FeedbackLoopConfig {
    fn default() -> Self {
        Self::ideal()
    }
}

impl FeedbackLoopConfig {
    pub fn new(alpha1: f64, alpha2: f64) -> Result<Self> {
        let cfg = FeedbackLoopConfig { alpha1, alpha2 };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Lossless lines.
    pub fn ideal() -> Self {
        FeedbackLoopConfig {
            alpha1: 1.0,
            alpha2: 1.0,
        }
    }

    /// Both lines with the same transmissivity.
    pub fn symmetric(alpha: f64) -> Result<Self> {
        Self::new(alpha, alpha)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, a) in [("alpha1", self.alpha1), ("alpha2", self.alpha2)] {
            if !(a > 0.0 && a <= 1.0) {
                return Err(Error::Parameter(format!(
                    "{name} must lie in (0, 1], got {a}"
                )));
            }
        }
        Ok(())
    }

    /// Reflectivity `δ1 = √(1 − α1²)` of the first line.
    pub fn delta1(&self) -> f64 {
        (1.0 - self.alpha1 * self.alpha1).sqrt()
    }

    pub fn delta2(&self) -> f64 {
        (1.0 - self.alpha2 * self.alpha2).sqrt()
    }
}

/// Inputs of the closed-loop system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum InputPort {
    #[serde(rename = "b1")]
    B1,
    #[serde(rename = "b4_dag")]
    B4Dag,
    #[serde(rename = "d3")]
    D3,
    #[serde(rename = "d4_dag")]
    D4Dag,
    #[serde(rename = "d5_dag")]
    D5Dag,
    #[serde(rename = "d6_dag")]
    D6Dag,
}

impl InputPort {
    pub const ALL: [InputPort; 6] = [
        InputPort::B1,
        InputPort::B4Dag,
        InputPort::D3,
        InputPort::D4Dag,
        InputPort::D5Dag,
        InputPort::D6Dag,
    ];

    pub fn flavor(self) -> Flavor {
        match self {
            InputPort::B1 | InputPort::D3 => Flavor::Annihilation,
            _ => Flavor::Creation,
        }
    }

    pub fn mode(self) -> &'static str {
        match self {
            InputPort::B1 => "b1",
            InputPort::B4Dag => "b4",
            InputPort::D3 => "d3",
            InputPort::D4Dag => "d4",
            InputPort::D5Dag => "d5",
            InputPort::D6Dag => "d6",
        }
    }

    pub fn port(self) -> Port {
        Port {
            mode: self.mode().to_owned(),
            flavor: self.flavor(),
        }
    }
}

impl fmt::Display for InputPort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.port().fmt(f)
    }
}

/// A plant with a passive controller in its idler loop.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClosedLoopSystem {
    b1_row: BTreeMap<InputPort, RationalFunction>,
    b3_row: BTreeMap<InputPort, RationalFunction>,
    characteristic: ComplexPoly,
    poles: Vec<Complex64>,
    plant: PlantModel,
    controller: ControllerModel,
    feedback: FeedbackLoopConfig,
    lossy: bool,
}

impl ClosedLoopSystem {
    /// Transfer functions from each input to the signal output `b̃1`.
    pub fn b1_row(&self) -> &BTreeMap<InputPort, RationalFunction> {
        &self.b1_row
    }

    /// Transfer functions from each input to the auxiliary output `b̃3†`.
    pub fn b3_row(&self) -> &BTreeMap<InputPort, RationalFunction> {
        &self.b3_row
    }

    pub fn entry(&self, input: InputPort) -> Option<&RationalFunction> {
        self.b1_row.get(&input)
    }

    /// `G11fb(s)`.
    pub fn signal_gain(&self) -> &RationalFunction {
        &self.b1_row[&InputPort::B1]
    }

    pub fn signal_gain_at(&self, omega: f64) -> Result<Complex64> {
        self.signal_gain().eval_iw(omega)
    }

    pub fn characteristic_poly(&self) -> &ComplexPoly {
        &self.characteristic
    }

    pub fn poles(&self) -> &[Complex64] {
        &self.poles
    }

    pub fn plant(&self) -> &PlantModel {
        &self.plant
    }

    pub fn controller(&self) -> &ControllerModel {
        &self.controller
    }

    pub fn feedback(&self) -> &FeedbackLoopConfig {
        &self.feedback
    }

    pub fn is_lossy(&self) -> bool {
        self.lossy
    }

    /// The closed loop as a 2-row scattering matrix with rows `(b̃1, b̃3†)`.
    pub fn to_matrix(&self) -> RationalMatrix {
        let inputs: Vec<InputPort> = self.b1_row.keys().copied().collect();
        let rows = vec![Port::annihilation("b1_out"), Port::creation("b3_out")];
        let cols = inputs.iter().map(|p| p.port()).collect();
        let entries = vec![
            inputs.iter().map(|p| self.b1_row[p].clone()).collect(),
            inputs.iter().map(|p| self.b3_row[p].clone()).collect(),
        ];
        RationalMatrix::new(rows, cols, entries).expect("rows built from the same inputs")
    }
}

/// Splits entries into a shared denominator `L` and numerators `P_k` with
/// `entry_k = P_k / L`.
fn common_denominator(entries: &[&RationalFunction]) -> Result<(ComplexPoly, Vec<ComplexPoly>)> {
    let mut lcm = ComplexPoly::one();
    for e in entries {
        if e.den() == &lcm || e.den().degree() == 0 {
            continue;
        }
        if exact_quotient(&lcm, e.den())?.is_none() {
            lcm = &lcm * e.den();
        }
    }
    let nums = entries
        .iter()
        .map(|e| {
            let factor = exact_quotient(&lcm, e.den())?.ok_or_else(|| {
                Error::Domain("entry denominators have no common multiple".into())
            })?;
            Ok(&factor * e.num())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((lcm, nums))
}

/// `a / b` when the remainder is rounding noise, otherwise `None`.
fn exact_quotient(a: &ComplexPoly, b: &ComplexPoly) -> Result<Option<ComplexPoly>> {
    let (q, r) = a.div_rem(b)?;
    let scale = a.max_abs_coeff().max(f64::MIN_POSITIVE);
    Ok((r.max_abs_coeff() <= EXACT_DIVISION_TOL * scale).then_some(q))
}

fn cpoly(x: f64) -> ComplexPoly {
    ComplexPoly::constant(c(x, 0.0))
}

fn trim_sum(a: &ComplexPoly, b: &ComplexPoly, sign: f64) -> ComplexPoly {
    let scale = a.max_abs_coeff().max(b.max_abs_coeff());
    let sum = a + &b.scale(c(sign, 0.0));
    let cutoff = CHAR_TRIM_TOL * scale;
    let mut coeffs = sum.coeffs().to_vec();
    while coeffs.last().is_some_and(|z| z.norm() <= cutoff) {
        coeffs.pop();
    }
    ComplexPoly::new(coeffs)
}

/// `(N_a Q − c P21 M) / χ` where `M = (N_a N22 − N12 N_b)/D`, falling back to
/// keeping `D` in the denominator when the division is not exact (flagged by
/// the returned bool).
#[allow(clippy::too_many_arguments)]
fn entry_with_det(
    n_a: &ComplexPoly,
    n_b: &ComplexPoly,
    n12: &ComplexPoly,
    n22: &ComplexPoly,
    d: &ComplexPoly,
    q: &ComplexPoly,
    p21: &ComplexPoly,
    gain: f64,
    chi: &ComplexPoly,
) -> Result<(RationalFunction, bool)> {
    let det = &(n_a * n22) - &(n12 * n_b);
    let scaled_p21 = p21.scale(c(gain, 0.0));
    match exact_quotient(&det, d)? {
        Some(m) => Ok((
            RationalFunction::new(trim_sum(&(n_a * q), &(&scaled_p21 * &m), -1.0), chi.clone())?,
            false,
        )),
        None => Ok((
            RationalFunction::new(
                trim_sum(&(&(n_a * q) * d), &(&scaled_p21 * &det), -1.0),
                chi * d,
            )?,
            true,
        )),
    }
}

/// `(P_a Q D + c N22 (P11 P_b − P_a P21)) / (Q χ)`, with `Q` cancelled when exact.
#[allow(clippy::too_many_arguments)]
fn b3_feedthrough(
    p_a: &ComplexPoly,
    p_b: &ComplexPoly,
    p11: &ComplexPoly,
    p21: &ComplexPoly,
    n22: &ComplexPoly,
    d: &ComplexPoly,
    q: &ComplexPoly,
    gain: f64,
    chi: &ComplexPoly,
) -> Result<RationalFunction> {
    let det_k = &(p11 * p_b) - &(p_a * p21);
    let loop_term = (n22 * &det_k).scale(c(gain, 0.0));
    let direct = &(p_a * q) * d;
    match exact_quotient(&loop_term, q)? {
        Some(lt) if q.degree() > 0 => {
            RationalFunction::new(trim_sum(&(p_a * d), &lt, 1.0), chi.clone())
        }
        _ => RationalFunction::new(trim_sum(&direct, &loop_term, 1.0), q * chi),
    }
}

fn close(
    plant: &PlantModel,
    controller: &ControllerModel,
    feedback: FeedbackLoopConfig,
    lossy: bool,
) -> Result<ClosedLoopSystem> {
    feedback.validate()?;
    let pm = plant.matrix();
    let km = controller.matrix();

    let mut plant_entries = vec![pm.get(0, 0), pm.get(0, 1), pm.get(1, 0), pm.get(1, 1)];
    if plant.has_loss_port() {
        plant_entries.extend([pm.get(0, 2), pm.get(1, 2)]);
    }
    let (d, n) = common_denominator(&plant_entries)?;
    let (n11, n12, n21, n22) = (&n[0], &n[1], &n[2], &n[3]);
    let zero = ComplexPoly::zero();
    let (n13, n23) = if plant.has_loss_port() {
        (&n[4], &n[5])
    } else {
        (&zero, &zero)
    };

    let mut ctrl_entries = vec![km.get(0, 0), km.get(0, 1), km.get(1, 0), km.get(1, 1)];
    if controller.has_noise_port() {
        ctrl_entries.extend([km.get(0, 2), km.get(1, 2)]);
    }
    let (q, p) = common_denominator(&ctrl_entries)?;
    let (p11, p12, p21, p22) = (&p[0], &p[1], &p[2], &p[3]);
    let (p13, p23) = if controller.has_noise_port() {
        (&p[4], &p[5])
    } else {
        (&zero, &zero)
    };

    let (a1, a2) = (feedback.alpha1, feedback.alpha2);
    let (d1, d2) = (feedback.delta1(), feedback.delta2());
    let gain = a1 * a2;

    let chi = trim_sum(&(&d * &q), &(p21 * n22).scale(c(gain, 0.0)), -1.0);
    if chi.is_zero() {
        return Err(Error::Degeneracy(
            "1 - a1 a2 K21 G22 vanishes identically".into(),
        ));
    }
    let over_chi = |num: ComplexPoly| RationalFunction::new(num, chi.clone());

    let mut b1_row = BTreeMap::new();
    let mut b3_row = BTreeMap::new();

    let (g11, mut keeps_d) = entry_with_det(n11, n21, n12, n22, &d, &q, p21, gain, &chi)?;
    b1_row.insert(InputPort::B1, g11);
    b1_row.insert(InputPort::B4Dag, over_chi(&(n12 * p22) * &cpoly(a2))?);
    b3_row.insert(InputPort::B1, over_chi(&(p11 * n21) * &cpoly(a1))?);
    b3_row.insert(
        InputPort::B4Dag,
        b3_feedthrough(p12, p22, p11, p21, n22, &d, &q, gain, &chi)?,
    );

    if lossy {
        let (g13, keeps) = entry_with_det(n13, n23, n12, n22, &d, &q, p21, gain, &chi)?;
        keeps_d |= keeps;
        b1_row.insert(InputPort::D3, g13);
        b1_row.insert(InputPort::D4Dag, over_chi(&(n12 * p23) * &cpoly(a2))?);
        b1_row.insert(InputPort::D5Dag, over_chi(&(n12 * p21) * &cpoly(a2 * d1))?);
        b1_row.insert(InputPort::D6Dag, over_chi(&(n12 * &q) * &cpoly(d2))?);

        b3_row.insert(InputPort::D3, over_chi(&(p11 * n23) * &cpoly(a1))?);
        b3_row.insert(
            InputPort::D4Dag,
            b3_feedthrough(p13, p23, p11, p21, n22, &d, &q, gain, &chi)?,
        );
        b3_row.insert(InputPort::D5Dag, over_chi(&(p11 * &d) * &cpoly(d1))?);
        b3_row.insert(InputPort::D6Dag, over_chi(&(p11 * n22) * &cpoly(a1 * d2))?);
    }

    // Every entry denominator divides this product.
    let mut characteristic = chi.clone();
    if q.degree() > 0 {
        characteristic = &characteristic * &q;
    }
    if keeps_d {
        characteristic = &characteristic * &d;
    }
    let poles = if characteristic.degree() == 0 {
        Vec::new()
    } else {
        characteristic.roots(DEFAULT_ROOT_TOL)?
    };

    Ok(ClosedLoopSystem {
        b1_row,
        b3_row,
        characteristic,
        poles,
        plant: plant.clone(),
        controller: controller.clone(),
        feedback,
        lossy,
    })
}

/// Closes the lossless loop `b3 = b̃2`, `b2 = b̃4` around a 2x2 plant.
pub fn close_ideal_feedback(
    plant: &PlantModel,
    controller: &ControllerModel,
) -> Result<ClosedLoopSystem> {
    if plant.has_loss_port() {
        return Err(Error::Parameter(
            "ideal closure needs a lossless (gamma = 0) plant".into(),
        ));
    }
    if controller.has_noise_port() {
        return Err(Error::Parameter(
            "ideal closure needs a 2x2 controller".into(),
        ));
    }
    close(plant, controller, FeedbackLoopConfig::ideal(), false)
}

/// Closes the loop with lossy transmission lines and noise ports.
///
/// All six `b̃1` entries are always populated; a plant without a `d3` column
/// or a controller without a `d4` column contributes identically-zero
/// entries for those inputs.
pub fn close_lossy_feedback(
    plant: &PlantModel,
    controller: &ControllerModel,
    feedback: FeedbackLoopConfig,
) -> Result<ClosedLoopSystem> {
    close(plant, controller, feedback, true)
}

/// Closed-form `G11fb(s)` for the specially detuned NDPA with a beam
/// splitter of reflectivity `beta` in the loop:
///
/// ```text
/// ((1−β)s² + βκs − (1+β)κ²/4 + iκλ) / ((1−β)s² + κs + (1+β)κ²/4 + iβκλ)
/// ```
pub fn closed_form_detuned_fb(kappa: f64, lambda: f64, beta: f64) -> Result<RationalFunction> {
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
    let q = kappa * kappa / 4.0;
    let num = ComplexPoly::new(vec![
        c(-(1.0 + beta) * q, kappa * lambda),
        c(beta * kappa, 0.0),
        c(1.0 - beta, 0.0),
    ]);
    let den = ComplexPoly::new(vec![
        c((1.0 + beta) * q, beta * kappa * lambda),
        c(kappa, 0.0),
        c(1.0 - beta, 0.0),
    ]);
    RationalFunction::new(num, den)
}

/// `|G21fb(iω)|`, the gain from `b1†` to the auxiliary output.
///
/// For large plant gain it tends to `√(1/|K21|² − 1)`.
pub fn phase_conjugating_gain(system: &ClosedLoopSystem, omega: f64) -> Result<f64> {
    let g21 = system
        .b3_row()
        .get(&InputPort::B1)
        .ok_or_else(|| Error::Domain("closed loop has no auxiliary output row".into()))?;
    Ok(g21.eval_iw(omega)?.norm())
}

/// Asymptotic phase-conjugating gain `√(1/|K21|² − 1)`.
pub fn phase_conjugating_limit(k21: f64) -> f64 {
    (1.0 / (k21 * k21) - 1.0).sqrt()
}

/// Classical negative-feedback gain `G / (1 + G K)`; tends to `1/K` for large `G`.
pub fn classical_feedback_gain(g: f64, k: f64) -> Result<f64> {
    let den = 1.0 + g * k;
    if den.abs() <= f64::EPSILON * (1.0 + (g * k).abs()) {
        return Err(Error::Degeneracy(format!(
            "1 + G K = 0 for G = {g}, K = {k}"
        )));
    }
    Ok(g / den)
}
