//! Seeded Monte Carlo experiments on the detuned NDPA with a beam splitter
//! in its idler loop: gain robustness under parameter fluctuations, and
//! added noise versus signal loss or line loss.
//!
//! Each sample `i` draws `(ε0, ε1, ε2)` uniformly on `[−1, 1]` from its own
//! ChaCha8 stream (`seed`, stream `i`), so results do not depend on how the
//! samples are scheduled across threads. A sweep reuses the same draws at
//! every sweep point.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    added_noise, gain_profile, stability, AmplifierSystem, FrequencyGrid, NoiseFlavor,
    DEFAULT_STABILITY_MARGIN,
};
use crate::error::{Error, Result};
use crate::interconnect::{close_lossy_feedback, ClosedLoopSystem, FeedbackLoopConfig};
use crate::models::{build_beam_splitter, build_ndpa, ControllerModel, PlantModel};

/// Version of the JSON layout of [`MonteCarloResult`].
pub const RESULT_SCHEMA_VERSION: u32 = 1;

/// Name recorded in result metadata for the per-sample generator.
pub const RNG_NAME: &str =
    "ChaCha8Rng (rand_chacha 0.9), seed_from_u64(seed), stream = sample index";

/// Which `λ` the detuning perturbations multiply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetuningBase {
    /// `Δi = (1 + r εi) λ` with the already perturbed `λ`.
    #[default]
    PerturbedLambda,
    /// `Δi = (1 + r εi) λ0`.
    NominalLambda,
}

/// Relative sizes of the parameter fluctuations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PerturbationSpec {
    pub rel_lambda: f64,
    pub rel_delta: f64,
    pub detuning_base: DetuningBase,
}

impl Default for PerturbationSpec {
    fn default() -> Self {
        PerturbationSpec {
            rel_lambda: 0.1,
            rel_delta: 0.001,
            detuning_base: DetuningBase::PerturbedLambda,
        }
    }
}

impl PerturbationSpec {
    pub fn none() -> Self {
        PerturbationSpec {
            rel_lambda: 0.0,
            rel_delta: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("rel_lambda", self.rel_lambda),
            ("rel_delta", self.rel_delta),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Parameter(format!(
                    "{name} must be nonnegative, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Nominal detuned plant: `Δ1 = Δ2 = λ0`, signal loss `gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NominalPlant {
    pub kappa: f64,
    pub lambda0: f64,
    pub gamma: f64,
}

impl Default for NominalPlant {
    fn default() -> Self {
        NominalPlant {
            kappa: 1.0,
            lambda0: 5.0,
            gamma: 0.01,
        }
    }
}

/// Swept quantity of a noise experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "axis", rename_all = "snake_case", deny_unknown_fields)]
pub enum SweepAxis {
    /// Signal loss rate `γ`.
    Gamma { values: Vec<f64> },
    /// Line transmissivity `α1 = α2`.
    Alpha { values: Vec<f64> },
}

impl SweepAxis {
    pub fn values(&self) -> &[f64] {
        match self {
            SweepAxis::Gamma { values } | SweepAxis::Alpha { values } => values,
        }
    }

    /// `n` evenly spaced values from `lo` to `hi`.
    pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        match n {
            0 => vec![],
            1 => vec![lo],
            _ => (0..n)
                .map(|k| {
                    if k == n - 1 {
                        hi
                    } else {
                        lo + (hi - lo) * k as f64 / (n - 1) as f64
                    }
                })
                .collect(),
        }
    }
}

/// Fixed signal-loss rates used for `α` sweeps when none are given.
pub const DEFAULT_FIXED_GAMMAS: [f64; 3] = [0.01, 0.05, 0.1];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MonteCarloConfig {
    pub seed: u64,
    pub n_samples: usize,
    pub nominal: NominalPlant,
    pub beta: f64,
    pub feedback: FeedbackLoopConfig,
    pub perturbation: PerturbationSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepAxis>,
    pub omega_eval: f64,
    /// When set, every sample also records `|G11|` and `|G11fb|` on this grid.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub curve_grid: Option<FrequencyGrid>,
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        MonteCarloConfig {
            seed: 0,
            n_samples: 50,
            nominal: NominalPlant::default(),
            beta: 0.1,
            feedback: FeedbackLoopConfig {
                alpha1: 0.99,
                alpha2: 0.99,
            },
            perturbation: PerturbationSpec::default(),
            sweep: None,
            omega_eval: 0.0,
            curve_grid: None,
        }
    }
}

impl MonteCarloConfig {
    /// Gain robustness setup: `λ0 = 5κ`, `β = 0.1`, `α1 = α2 = 0.99`, 50 samples.
    pub fn robustness(seed: u64) -> Self {
        MonteCarloConfig {
            seed,
            ..Self::default()
        }
    }

    /// Added noise versus `γ ∈ [0, 0.2]` with `α1 = α2 = 0.5`.
    pub fn noise_vs_gamma(seed: u64) -> Self {
        MonteCarloConfig {
            seed,
            feedback: FeedbackLoopConfig {
                alpha1: 0.5,
                alpha2: 0.5,
            },
            sweep: Some(SweepAxis::Gamma {
                values: SweepAxis::linspace(0.0, 0.2, 11),
            }),
            ..Self::default()
        }
    }

    /// Added noise versus `α1 = α2 ∈ [0.5, 1]` at fixed `gamma`.
    pub fn noise_vs_alpha(seed: u64, gamma: f64) -> Self {
        MonteCarloConfig {
            seed,
            nominal: NominalPlant {
                gamma,
                ..NominalPlant::default()
            },
            sweep: Some(SweepAxis::Alpha {
                values: SweepAxis::linspace(0.5, 1.0, 11),
            }),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::Parameter("n_samples must be at least 1".into()));
        }
        if !(self.nominal.kappa > 0.0) {
            return Err(Error::Parameter(format!(
                "kappa must be positive, got {}",
                self.nominal.kappa
            )));
        }
        if !(self.nominal.gamma >= 0.0) {
            return Err(Error::Parameter(format!(
                "gamma must be nonnegative, got {}",
                self.nominal.gamma
            )));
        }
        if !self.omega_eval.is_finite() {
            return Err(Error::Parameter("omega_eval must be finite".into()));
        }
        self.feedback.validate()?;
        self.perturbation.validate()?;
        if let Some(grid) = &self.curve_grid {
            grid.validate()?;
        }
        Ok(())
    }
}

/// Draws `(ε0, ε1, ε2)` for sample `index`.
pub fn sample_epsilons(seed: u64, index: u64) -> [f64; 3] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    [0; 3].map(|_| rng.random_range(-1.0..=1.0))
}

/// `λ = (1 + r_λ ε0) λ0`, `Δi = (1 + r_Δ εi) λ` with `γ` unchanged.
pub fn sample_perturbed_plant(
    nominal: &NominalPlant,
    spec: &PerturbationSpec,
    eps: [f64; 3],
) -> Result<PlantModel> {
    if let Some(e) = eps.iter().find(|e| !(e.abs() <= 1.0)) {
        return Err(Error::Parameter(format!(
            "perturbation draw {e} outside [-1, 1]"
        )));
    }
    let lambda = (1.0 + spec.rel_lambda * eps[0]) * nominal.lambda0;
    let base = match spec.detuning_base {
        DetuningBase::PerturbedLambda => lambda,
        DetuningBase::NominalLambda => nominal.lambda0,
    };
    let delta1 = (1.0 + spec.rel_delta * eps[1]) * base;
    let delta2 = (1.0 + spec.rel_delta * eps[2]) * base;
    build_ndpa(nominal.kappa, lambda, delta1, delta2, nominal.gamma)
}

/// Realized relative change of the closed-loop gain against the
/// first-order bound `|ΔG22|/|G22| / |1 − α1α2 K21 G22|` at the nominal point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensitivityCheck {
    pub realized: f64,
    pub bound: f64,
    pub satisfied: bool,
}

/// Slack allowed on the first-order bound.
pub const SENSITIVITY_TOL: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub index: usize,
    pub epsilons: [f64; 3],
    pub lambda: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub open_loop_gain: f64,
    pub closed_loop_gain: f64,
    pub a_open: f64,
    pub a_fb: f64,
    pub open_stable: bool,
    pub closed_stable: bool,
    pub sensitivity: SensitivityCheck,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub open_curve: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub closed_curve: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnStats {
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

impl ColumnStats {
    /// Mean, population standard deviation, min and max, summed in order.
    pub fn of(xs: &[f64]) -> Option<Self> {
        if xs.is_empty() {
            return None;
        }
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
        Some(ColumnStats {
            mean,
            std: var.sqrt(),
            min: xs.iter().copied().fold(f64::INFINITY, f64::min),
            max: xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
    }

    /// `std / |mean|`.
    pub fn coefficient_of_variation(&self) -> f64 {
        self.std / self.mean.abs()
    }
}

/// Statistics over the samples whose closed loop is stable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub included: usize,
    pub excluded_unstable: usize,
    pub open_loop_gain: ColumnStats,
    pub closed_loop_gain: ColumnStats,
    pub a_open: ColumnStats,
    pub a_fb: ColumnStats,
}

impl Summary {
    pub fn from_samples(samples: &[SampleRecord]) -> Option<Self> {
        let kept: Vec<&SampleRecord> = samples.iter().filter(|r| r.closed_stable).collect();
        let col = |f: fn(&SampleRecord) -> f64| {
            ColumnStats::of(&kept.iter().map(|r| f(r)).collect::<Vec<_>>())
        };
        Some(Summary {
            included: kept.len(),
            excluded_unstable: samples.len() - kept.len(),
            open_loop_gain: col(|r| r.open_loop_gain)?,
            closed_loop_gain: col(|r| r.closed_loop_gain)?,
            a_open: col(|r| r.a_open)?,
            a_fb: col(|r| r.a_fb)?,
        })
    }
}

/// Results at one sweep point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointResult {
    pub gamma: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub nominal_open_loop_gain: f64,
    pub nominal_closed_loop_gain: f64,
    /// `1 / |1 − α1α2 K21 G22|` at the nominal plant.
    pub sensitivity_bound: f64,
    pub per_sample: Vec<SampleRecord>,
    pub summary: Summary,
    /// Ratio of the coefficients of variation of the closed- and open-loop
    /// gains; `None` when the open-loop gains have no spread.
    pub suppression_ratio: Option<f64>,
    /// `std(closed) / std(open)` without normalization.
    pub absolute_suppression_ratio: Option<f64>,
    pub zero_spread: bool,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub curve_omegas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultMetadata {
    pub schema_version: u32,
    pub artifact: String,
    pub version: String,
    pub experiment: String,
    pub seed: u64,
    pub rng: String,
    pub config: MonteCarloConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloResult {
    pub metadata: ResultMetadata,
    pub points: Vec<PointResult>,
}

impl MonteCarloResult {
    /// Per-sample CSV across all points.
    pub fn to_csv(&self) -> String {
        let header = [
            "gamma",
            "alpha1",
            "alpha2",
            "index",
            "eps0",
            "eps1",
            "eps2",
            "open_loop_gain",
            "closed_loop_gain",
            "a_open",
            "a_fb",
            "closed_stable",
        ];
        let rows = self.points.iter().flat_map(|p| {
            p.per_sample.iter().map(move |r| {
                vec![
                    p.gamma,
                    p.alpha1,
                    p.alpha2,
                    r.index as f64,
                    r.epsilons[0],
                    r.epsilons[1],
                    r.epsilons[2],
                    r.open_loop_gain,
                    r.closed_loop_gain,
                    r.a_open,
                    r.a_fb,
                    if r.closed_stable { 1.0 } else { 0.0 },
                ]
            })
        });
        crate::format::csv_table(&header, rows)
    }
}

struct Nominal {
    g22: num_complex::Complex64,
    closed_gain: f64,
    open_gain: f64,
    bound: f64,
}

fn close(
    plant: &PlantModel,
    controller: &ControllerModel,
    feedback: FeedbackLoopConfig,
) -> Result<ClosedLoopSystem> {
    close_lossy_feedback(plant, controller, feedback)
}

fn nominal_point(
    cfg: &MonteCarloConfig,
    controller: &ControllerModel,
    nominal: &NominalPlant,
    feedback: FeedbackLoopConfig,
) -> Result<Nominal> {
    let plant = sample_perturbed_plant(nominal, &cfg.perturbation, [0.0; 3])?;
    let cl = close(&plant, controller, feedback)?;
    let verdict = stability(&cl, DEFAULT_STABILITY_MARGIN)?;
    if !verdict.stable {
        return Err(Error::Experiment(format!(
            "nominal closed loop is unstable (max Re(pole) = {})",
            verdict.max_real_part
        )));
    }
    let w = cfg.omega_eval;
    let g22 = plant.g22().eval_iw(w)?;
    let k21 = controller.k21().eval_iw(w)?;
    let loop_den =
        num_complex::Complex64::new(1.0, 0.0) - k21 * g22 * (feedback.alpha1 * feedback.alpha2);
    if loop_den.norm() == 0.0 {
        return Err(Error::Degeneracy(
            "1 − α1α2 K21 G22 = 0 at the nominal point".into(),
        ));
    }
    Ok(Nominal {
        g22,
        closed_gain: cl.signal_gain_at(w)?.norm(),
        open_gain: plant.g11().eval_iw(w)?.norm(),
        bound: 1.0 / loop_den.norm(),
    })
}

fn curve(system: &dyn AmplifierSystem, grid: &Option<FrequencyGrid>) -> Result<Vec<f64>> {
    match grid {
        None => Ok(Vec::new()),
        Some(g) => Ok(gain_profile(system, g.omega_min, g.omega_max, g.n_points)?
            .values()
            .iter()
            .map(|v| v.norm())
            .collect()),
    }
}

fn run_sample(
    cfg: &MonteCarloConfig,
    controller: &ControllerModel,
    nominal_plant: &NominalPlant,
    feedback: FeedbackLoopConfig,
    nominal: &Nominal,
    index: usize,
) -> Result<SampleRecord> {
    let epsilons = sample_epsilons(cfg.seed, index as u64);
    let plant = sample_perturbed_plant(nominal_plant, &cfg.perturbation, epsilons)?;
    let cl = close(&plant, controller, feedback)?;
    let w = cfg.omega_eval;
    let open_stable = stability(&plant, DEFAULT_STABILITY_MARGIN)?.stable;
    let closed_stable = stability(&cl, DEFAULT_STABILITY_MARGIN)?.stable;
    let closed_loop_gain = cl.signal_gain_at(w)?.norm();
    let rel_dg22 = (plant.g22().eval_iw(w)? - nominal.g22).norm() / nominal.g22.norm();
    let realized = (closed_loop_gain - nominal.closed_gain).abs() / nominal.closed_gain;
    let bound = nominal.bound * rel_dg22;
    Ok(SampleRecord {
        index,
        epsilons,
        lambda: plant.lambda,
        delta1: plant.delta1,
        delta2: plant.delta2,
        open_loop_gain: plant.g11().eval_iw(w)?.norm(),
        closed_loop_gain,
        a_open: added_noise(&plant, w, NoiseFlavor::Plant)?.a_value,
        a_fb: added_noise(&cl, w, NoiseFlavor::ClosedLoop)?.a_value,
        open_stable,
        closed_stable,
        sensitivity: SensitivityCheck {
            realized,
            bound,
            satisfied: realized <= bound + SENSITIVITY_TOL,
        },
        open_curve: curve(&plant, &cfg.curve_grid)?,
        closed_curve: curve(&cl, &cfg.curve_grid)?,
    })
}

fn run_point(
    cfg: &MonteCarloConfig,
    controller: &ControllerModel,
    nominal_plant: NominalPlant,
    feedback: FeedbackLoopConfig,
) -> Result<PointResult> {
    let nominal = nominal_point(cfg, controller, &nominal_plant, feedback)?;
    let per_sample = (0..cfg.n_samples)
        .into_par_iter()
        .map(|i| run_sample(cfg, controller, &nominal_plant, feedback, &nominal, i))
        .collect::<Result<Vec<_>>>()?;
    let summary = Summary::from_samples(&per_sample).ok_or_else(|| {
        Error::Experiment(format!(
            "all {} samples are unstable at gamma = {}, alpha = ({}, {})",
            per_sample.len(),
            nominal_plant.gamma,
            feedback.alpha1,
            feedback.alpha2
        ))
    })?;
    let open = summary.open_loop_gain;
    let closed = summary.closed_loop_gain;
    let zero_spread = !(open.std > 1e-12 * open.mean.abs());
    let (suppression_ratio, absolute_suppression_ratio) = if zero_spread {
        (None, None)
    } else {
        (
            Some(closed.coefficient_of_variation() / open.coefficient_of_variation()),
            Some(closed.std / open.std),
        )
    };
    Ok(PointResult {
        gamma: nominal_plant.gamma,
        alpha1: feedback.alpha1,
        alpha2: feedback.alpha2,
        nominal_open_loop_gain: nominal.open_gain,
        nominal_closed_loop_gain: nominal.closed_gain,
        sensitivity_bound: nominal.bound,
        per_sample,
        summary,
        suppression_ratio,
        absolute_suppression_ratio,
        zero_spread,
        curve_omegas: cfg.curve_grid.map(|g| g.points()).unwrap_or_default(),
    })
}

fn metadata(cfg: &MonteCarloConfig, experiment: &str) -> ResultMetadata {
    ResultMetadata {
        schema_version: RESULT_SCHEMA_VERSION,
        artifact: env!("CARGO_PKG_NAME").to_owned(),
        version: env!("CARGO_PKG_VERSION").to_owned(),
        experiment: experiment.to_owned(),
        seed: cfg.seed,
        rng: RNG_NAME.to_owned(),
        config: cfg.clone(),
    }
}

/// Open- and closed-loop gain spread at `omega_eval` for the configured
/// plant and lines. Any `sweep` in the config is ignored.
pub fn run_robustness_experiment(cfg: &MonteCarloConfig) -> Result<MonteCarloResult> {
    cfg.validate()?;
    let controller = build_beam_splitter(cfg.beta)?;
    let point = run_point(cfg, &controller, cfg.nominal, cfg.feedback)?;
    Ok(MonteCarloResult {
        metadata: metadata(cfg, "robustness"),
        points: vec![point],
    })
}

/// Open- and closed-loop added noise at every point of the configured sweep.
pub fn run_noise_experiment(cfg: &MonteCarloConfig) -> Result<MonteCarloResult> {
    cfg.validate()?;
    let sweep = cfg
        .sweep
        .as_ref()
        .filter(|s| !s.values().is_empty())
        .ok_or_else(|| Error::Parameter("noise experiment needs a nonempty sweep".into()))?;
    let controller = build_beam_splitter(cfg.beta)?;
    let points = match sweep {
        SweepAxis::Gamma { values } => values
            .iter()
            .map(|&gamma| {
                let nominal = NominalPlant {
                    gamma,
                    ..cfg.nominal
                };
                run_point(cfg, &controller, nominal, cfg.feedback)
            })
            .collect::<Result<Vec<_>>>()?,
        SweepAxis::Alpha { values } => values
            .iter()
            .map(|&a| {
                run_point(
                    cfg,
                    &controller,
                    cfg.nominal,
                    FeedbackLoopConfig::new(a, a)?,
                )
            })
            .collect::<Result<Vec<_>>>()?,
    };
    Ok(MonteCarloResult {
        metadata: metadata(cfg, "noise"),
        points,
    })
}
