//! Plant (NDPA) and controller (passive scatterer) transfer matrices.
//!
//! Plant port order is fixed: columns `(b1, b2†, d3)`, rows `(b̃1, b̃2†)`. The
//! `d3` column only exists when the signal mode has an optical loss rate
//! `gamma > 0`. Controller ports are all creation-flavoured: columns
//! `(b3†, b4†[, d4†])`, rows `(b̃3†, b̃4†)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tfcore::{ComplexPoly, Flavor, Port, RationalFunction, RationalMatrix};

/// Tolerance used when validating a user-supplied passive controller.
pub const PASSIVITY_TOL: f64 = 1e-9;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// A nondegenerate parametric amplifier with optional signal loss.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantModel {
    pub kappa: f64,
    pub lambda: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub gamma: f64,
    matrix: RationalMatrix,
    characteristic: ComplexPoly,
}

impl PlantModel {
    pub fn matrix(&self) -> &RationalMatrix {
        &self.matrix
    }

    /// The shared denominator `D(s)` of every plant entry.
    pub fn characteristic_poly(&self) -> &ComplexPoly {
        &self.characteristic
    }

    pub fn has_loss_port(&self) -> bool {
        self.matrix.cols() == 3
    }

    pub fn g11(&self) -> &RationalFunction {
        self.matrix.get(0, 0)
    }

    pub fn g12(&self) -> &RationalFunction {
        self.matrix.get(0, 1)
    }

    pub fn g21(&self) -> &RationalFunction {
        self.matrix.get(1, 0)
    }

    pub fn g22(&self) -> &RationalFunction {
        self.matrix.get(1, 1)
    }

    pub fn g13(&self) -> Option<&RationalFunction> {
        self.has_loss_port().then(|| self.matrix.get(0, 2))
    }

    pub fn g23(&self) -> Option<&RationalFunction> {
        self.has_loss_port().then(|| self.matrix.get(1, 2))
    }
}

fn plant_ports(lossy: bool) -> (Vec<Port>, Vec<Port>) {
    let rows = vec![Port::annihilation("b1_out"), Port::creation("b2_out")];
    let mut cols = vec![Port::annihilation("b1"), Port::creation("b2")];
    if lossy {
        cols.push(Port::annihilation("d3"));
    }
    (rows, cols)
}

fn shared(num: ComplexPoly, den: &ComplexPoly) -> RationalFunction {
    RationalFunction::new(num, den.clone()).expect("plant denominator is monic")
}

fn check_kappa(kappa: f64) -> Result<()> {
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(Error::Parameter(format!(
            "kappa must be positive, got {kappa}"
        )));
    }
    Ok(())
}

/// Builds the NDPA transfer matrix from the Laplace-transformed Langevin
/// equations
///
/// ```text
/// s a1  = (−(κ+γ)/2 − iΔ1) a1 + λ a2† − √κ b1 − √γ d3
/// s a2† = (−κ/2 + iΔ2) a2† + λ a1 − √κ b2†
/// b̃1 = √κ a1 + b1,   b̃2† = √κ a2† + b2†
/// ```
///
/// With `A = s + (κ+γ)/2 + iΔ1`, `B = s + κ/2 − iΔ2` and `D = AB − λ²`:
///
/// ```text
/// G11 = ((A − κ)B − λ²)/D   G12 = −κλ/D   G13 = −√(κγ) B/D
/// G21 = −κλ/D               G22 = (A(B − κ) − λ²)/D   G23 = −√(κγ) λ/D
/// ```
pub fn build_ndpa(
    kappa: f64,
    lambda: f64,
    delta1: f64,
    delta2: f64,
    gamma: f64,
) -> Result<PlantModel> {
    check_kappa(kappa)?;
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(Error::Parameter(format!(
            "gamma must be nonnegative, got {gamma}"
        )));
    }
    for (name, v) in [("lambda", lambda), ("delta1", delta1), ("delta2", delta2)] {
        if !v.is_finite() {
            return Err(Error::Parameter(format!("{name} must be finite, got {v}")));
        }
    }

    let a = ComplexPoly::linear(c((kappa + gamma) / 2.0, delta1));
    let b = ComplexPoly::linear(c(kappa / 2.0, -delta2));
    let lambda_sq = ComplexPoly::constant(c(lambda * lambda, 0.0));
    let kappa_p = ComplexPoly::constant(c(kappa, 0.0));

    let d = &(&a * &b) - &lambda_sq;
    let n11 = &(&(&a - &kappa_p) * &b) - &lambda_sq;
    let n22 = &(&a * &(&b - &kappa_p)) - &lambda_sq;
    let cross = ComplexPoly::constant(c(-kappa * lambda, 0.0));

    let lossy = gamma > 0.0;
    let mut row1 = vec![shared(n11, &d), shared(cross.clone(), &d)];
    let mut row2 = vec![shared(cross, &d), shared(n22, &d)];
    if lossy {
        let root = (kappa * gamma).sqrt();
        row1.push(shared(b.scale(c(-root, 0.0)), &d));
        row2.push(shared(ComplexPoly::constant(c(-root * lambda, 0.0)), &d));
    }
    let (rows, cols) = plant_ports(lossy);
    let matrix = RationalMatrix::new(rows, cols, vec![row1, row2])?;
    Ok(PlantModel {
        kappa,
        lambda,
        delta1,
        delta2,
        gamma,
        characteristic: matrix.get(0, 0).den().clone(),
        matrix,
    })
}

/// The NDPA with the special detuning `Δ1 = Δ2 = λ`, from its closed form
///
/// ```text
/// G(s) = 1/(s + κ/2)² · [[s² − κ²/4 + iκλ, −κλ], [−κλ, s² − κ²/4 − iκλ]]
/// ```
pub fn build_detuned_ndpa(kappa: f64, lambda: f64) -> Result<PlantModel> {
    check_kappa(kappa)?;
    if !lambda.is_finite() {
        return Err(Error::Parameter(format!(
            "lambda must be finite, got {lambda}"
        )));
    }
    let q = kappa * kappa / 4.0;
    let kl = kappa * lambda;
    let d = ComplexPoly::new(vec![c(q, 0.0), c(kappa, 0.0), c(1.0, 0.0)]);
    let n11 = ComplexPoly::new(vec![c(-q, kl), c(0.0, 0.0), c(1.0, 0.0)]);
    let n22 = ComplexPoly::new(vec![c(-q, -kl), c(0.0, 0.0), c(1.0, 0.0)]);
    let cross = ComplexPoly::constant(c(-kl, 0.0));
    let (rows, cols) = plant_ports(false);
    let matrix = RationalMatrix::new(
        rows,
        cols,
        vec![
            vec![shared(n11, &d), shared(cross.clone(), &d)],
            vec![shared(cross, &d), shared(n22, &d)],
        ],
    )?;
    Ok(PlantModel {
        kappa,
        lambda,
        delta1: lambda,
        delta2: lambda,
        gamma: 0.0,
        characteristic: d,
        matrix,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ControllerKind {
    BeamSplitter { alpha: f64, beta: f64 },
    PassiveTf,
}

/// A passive two-port scatterer, optionally with a noise column `d4†`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControllerModel {
    pub kind: ControllerKind,
    matrix: RationalMatrix,
}

impl ControllerModel {
    /// Wraps an arbitrary 2x2 or 2x3 matrix after checking passivity
    /// (`K K† = I`) on a default grid.
    pub fn from_matrix(matrix: RationalMatrix) -> Result<Self> {
        if matrix.rows() != 2 || !(2..=3).contains(&matrix.cols()) {
            return Err(Error::Parameter(format!(
                "controller must be 2x2 or 2x3, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        if matrix
            .row_ports()
            .iter()
            .chain(matrix.col_ports())
            .any(|p| p.flavor != Flavor::Creation)
        {
            return Err(Error::Parameter(
                "controller ports must all be creation-flavoured".into(),
            ));
        }
        let grid: Vec<f64> = (0..=200).map(|k| -10.0 + 0.1 * k as f64).collect();
        let report = check_scattering_constraints(&matrix, &grid, PASSIVITY_TOL)?;
        if !report.pass {
            return Err(Error::Parameter(format!(
                "controller is not passive (max residual {:.3e})",
                report.max_residual
            )));
        }
        Ok(ControllerModel {
            kind: ControllerKind::PassiveTf,
            matrix,
        })
    }

    pub fn matrix(&self) -> &RationalMatrix {
        &self.matrix
    }

    pub fn has_noise_port(&self) -> bool {
        self.matrix.cols() == 3
    }

    pub fn k11(&self) -> &RationalFunction {
        self.matrix.get(0, 0)
    }

    pub fn k12(&self) -> &RationalFunction {
        self.matrix.get(0, 1)
    }

    pub fn k21(&self) -> &RationalFunction {
        self.matrix.get(1, 0)
    }

    pub fn k22(&self) -> &RationalFunction {
        self.matrix.get(1, 1)
    }

    pub fn k13(&self) -> Option<&RationalFunction> {
        self.has_noise_port().then(|| self.matrix.get(0, 2))
    }

    pub fn k23(&self) -> Option<&RationalFunction> {
        self.has_noise_port().then(|| self.matrix.get(1, 2))
    }
}

/// Standard controller ports for a matrix with `cols` inputs.
pub fn controller_ports(cols: usize) -> (Vec<Port>, Vec<Port>) {
    let rows = vec![Port::creation("b3_out"), Port::creation("b4_out")];
    let mut inputs = vec![Port::creation("b3"), Port::creation("b4")];
    if cols == 3 {
        inputs.push(Port::creation("d4"));
    }
    (rows, inputs)
}

/// Beam splitter `[[α, β], [β, −α]]` with `α = √(1 − β²)`.
pub fn build_beam_splitter(beta: f64) -> Result<ControllerModel> {
    if !(beta.abs() <= 1.0) {
        return Err(Error::Parameter(format!(
            "|beta| must be at most 1, got {beta}"
        )));
    }
    let alpha = (1.0 - beta * beta).sqrt();
    let (rows, cols) = controller_ports(2);
    let matrix = RationalMatrix::new(
        rows,
        cols,
        vec![
            vec![RationalFunction::real(alpha), RationalFunction::real(beta)],
            vec![RationalFunction::real(beta), RationalFunction::real(-alpha)],
        ],
    )?;
    Ok(ControllerModel {
        kind: ControllerKind::BeamSplitter { alpha, beta },
        matrix,
    })
}

/// Residuals of the bosonic scattering identities at one frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSample {
    pub omega: f64,
    pub residuals: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintReport {
    /// Human-readable form of each identity, parallel to `residuals`.
    pub identities: Vec<String>,
    pub samples: Vec<ConstraintSample>,
    pub max_residual: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Checks the commutator-preservation identities of a scattering matrix.
///
/// For each output row `i` with flavor sign `σ_i` and input signs `σ_k`
/// (annihilation `+1`, creation `−1`):
///
/// ```text
/// σ_i Σ_k σ_k |G_ik|² = 1           (norm of row i)
/// Σ_k σ_k G_jk G_ik* = 0   (i < j)   (cross terms)
/// ```
///
/// For the 2x2 amplifier this is `|G11|² − |G12|² = |G22|² − |G21|² = 1` and
/// `G21 G11* − G22 G12* = 0`; with a `d3` column the loss terms enter with
/// the signs of an annihilation input, and for an all-creation passive
/// matrix it reduces to `K K† = I`.
pub fn check_scattering_constraints(
    m: &RationalMatrix,
    grid: &[f64],
    tol: f64,
) -> Result<ConstraintReport> {
    if grid.is_empty() {
        return Err(Error::Domain("constraint grid is empty".into()));
    }
    let col_signs: Vec<f64> = m.col_ports().iter().map(|p| p.flavor.sign()).collect();
    let row_signs: Vec<f64> = m.row_ports().iter().map(|p| p.flavor.sign()).collect();
    let n = m.rows();

    let mut identities = Vec::new();
    for (i, p) in m.row_ports().iter().enumerate() {
        let terms: Vec<String> = m
            .col_ports()
            .iter()
            .enumerate()
            .map(|(k, q)| {
                let sign = if row_signs[i] * q.flavor.sign() > 0.0 {
                    "+"
                } else {
                    "-"
                };
                format!("{sign}|G{}{}|^2", i + 1, k + 1)
            })
            .collect();
        identities.push(format!("{} = 1  [{}]", terms.join(" "), p));
    }
    for i in 0..n {
        for j in i + 1..n {
            identities.push(format!("sum_k s_k G{}k G{}k* = 0", j + 1, i + 1));
        }
    }

    let mut samples = Vec::with_capacity(grid.len());
    let mut max_residual: f64 = 0.0;
    for &omega in grid {
        let g = m.eval_iw(omega)?;
        let mut residuals = Vec::with_capacity(identities.len());
        for i in 0..n {
            let norm: f64 = g[i]
                .iter()
                .zip(&col_signs)
                .map(|(v, s)| s * v.norm_sqr())
                .sum();
            residuals.push((row_signs[i] * norm - 1.0).abs());
        }
        for i in 0..n {
            for j in i + 1..n {
                let cross: Complex64 = g[j]
                    .iter()
                    .zip(&g[i])
                    .zip(&col_signs)
                    .map(|((a, b), s)| a * b.conj() * *s)
                    .sum();
                residuals.push(cross.norm());
            }
        }
        max_residual = residuals.iter().copied().fold(max_residual, f64::max);
        samples.push(ConstraintSample { omega, residuals });
    }
    Ok(ConstraintReport {
        identities,
        samples,
        max_residual,
        tol,
        pass: max_residual < tol,
    })
}
