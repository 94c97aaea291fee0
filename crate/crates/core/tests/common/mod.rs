//! Independent numeric oracles shared by the integration tests.
#![allow(dead_code)]

use qfa::Complex64;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn iw(omega: f64) -> Complex64 {
    c(0.0, omega)
}

/// NDPA transfer matrix `Dss + C (sI − A)⁻¹ B` from the linear Langevin
/// equations, with state `(a1, a2†)` and inputs `(b1, b2†, d3)`.
pub fn ndpa_state_space(
    kappa: f64,
    lambda: f64,
    d1: f64,
    d2: f64,
    gamma: f64,
    s: Complex64,
) -> [[Complex64; 3]; 2] {
    let a = [
        [c(-(kappa + gamma) / 2.0, -d1), c(lambda, 0.0)],
        [c(lambda, 0.0), c(-kappa / 2.0, d2)],
    ];
    // M = sI − A and its inverse.
    let m = [[s - a[0][0], -a[0][1]], [-a[1][0], s - a[1][1]]];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let inv = [
        [m[1][1] / det, -m[0][1] / det],
        [-m[1][0] / det, m[0][0] / det],
    ];
    let rk = kappa.sqrt();
    let b = [
        [c(-rk, 0.0), c(0.0, 0.0), c(-gamma.sqrt(), 0.0)],
        [c(0.0, 0.0), c(-rk, 0.0), c(0.0, 0.0)],
    ];
    let mut g = [[c(0.0, 0.0); 3]; 2];
    for i in 0..2 {
        for k in 0..3 {
            let direct = if i == k { 1.0 } else { 0.0 };
            let mut acc = c(direct, 0.0);
            for j in 0..2 {
                acc += rk * inv[i][j] * b[j][k];
            }
            g[i][k] = acc;
        }
    }
    g
}

/// Solves the 2x2 complex system `m x = r` by Gaussian elimination with
/// partial pivoting.
pub fn solve2(m: [[Complex64; 2]; 2], r: [Complex64; 2]) -> [Complex64; 2] {
    let (mut m, mut r) = (m, r);
    if m[1][0].norm() > m[0][0].norm() {
        m.swap(0, 1);
        r.swap(0, 1);
    }
    let f = m[1][0] / m[0][0];
    let m11 = m[1][1] - f * m[0][1];
    let r1 = r[1] - f * r[0];
    let x1 = r1 / m11;
    let x0 = (r[0] - m[0][1] * x1) / m[0][0];
    [x0, x1]
}

/// Closed-loop responses from one input, found by solving the interconnection
/// equations for the internal fields `b2†` and `b3†`.
#[derive(Debug, Clone, Copy)]
pub struct LoopResponse {
    pub b1_out: Complex64,
    pub b3_out: Complex64,
}

/// Inputs in the order `b1, b4†, d3, d4†, d5†, d6†`.
pub const INPUTS: [&str; 6] = ["b1", "b4_dag", "d3", "d4_dag", "d5_dag", "d6_dag"];

/// `g` is the plant matrix (2x3, zero third column when lossless), `k` the
/// controller matrix (2x3, zero third column without a noise port).
///
/// ```text
/// b̃1 = G11 b1 + G12 b2† + G13 d3           b̃2† = G21 b1 + G22 b2† + G23 d3
/// b̃3† = K11 b3† + K12 b4† + K13 d4†        b̃4† = K21 b3† + K22 b4† + K23 d4†
/// b3† = α1 b̃2† + δ1 d5†                    b2† = α2 b̃4† + δ2 d6†
/// ```
pub fn port_elimination(
    g: [[Complex64; 3]; 2],
    k: [[Complex64; 3]; 2],
    alpha1: f64,
    alpha2: f64,
) -> [LoopResponse; 6] {
    let delta1 = (1.0 - alpha1 * alpha1).sqrt();
    let delta2 = (1.0 - alpha2 * alpha2).sqrt();
    let one = c(1.0, 0.0);
    // Unknowns (x, y) = (b2†, b3†).
    let m = [[-alpha1 * g[1][1], one], [one, -alpha2 * k[1][0]]];
    std::array::from_fn(|input| {
        let mut u = [c(0.0, 0.0); 6];
        u[input] = one;
        let [b1, b4, d3, d4, d5, d6] = u;
        let r = [
            alpha1 * (g[1][0] * b1 + g[1][2] * d3) + delta1 * d5,
            alpha2 * (k[1][1] * b4 + k[1][2] * d4) + delta2 * d6,
        ];
        let [x, y] = solve2(m, r);
        LoopResponse {
            b1_out: g[0][0] * b1 + g[0][1] * x + g[0][2] * d3,
            b3_out: k[0][0] * y + k[0][1] * b4 + k[0][2] * d4,
        }
    })
}

/// Pads a numeric 2xN matrix to 2x3 with zeros.
pub fn pad3(m: &[Vec<Complex64>]) -> [[Complex64; 3]; 2] {
    let mut out = [[c(0.0, 0.0); 3]; 2];
    for i in 0..2 {
        for (k, v) in m[i].iter().enumerate() {
            out[i][k] = *v;
        }
    }
    out
}

/// Relative difference with an absolute floor of 1.
pub fn rel_err(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}

/// A passive 2x3 controller on `(b3†, b4†, d4†)`: the top two rows of the
/// orthogonal matrix `R23(φ) · M12(θ)`, where `M12` is the beam-splitter
/// reflection `[[cos θ, sin θ], [sin θ, −cos θ]]`.
pub fn lossy_beam_splitter(theta: f64, phi: f64) -> [[f64; 3]; 2] {
    let (ct, st) = (theta.cos(), theta.sin());
    let (cp, sp) = (phi.cos(), phi.sin());
    let r12 = [[ct, st, 0.0], [st, -ct, 0.0], [0.0, 0.0, 1.0]];
    let r23 = [[1.0, 0.0, 0.0], [0.0, cp, sp], [0.0, -sp, cp]];
    let mut u = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            u[i][j] = (0..3).map(|k| r23[i][k] * r12[k][j]).sum();
        }
    }
    [u[0], u[1]]
}

/// Wraps constant real rows as a controller on `(b3†, b4†[, d4†])`.
pub fn constant_controller<const N: usize>(rows: [[f64; N]; 2]) -> qfa::models::ControllerModel {
    use qfa::models::{controller_ports, ControllerModel};
    use qfa::tfcore::{RationalFunction, RationalMatrix};
    let (r, cols) = controller_ports(N);
    let entries = rows
        .iter()
        .map(|row| row.iter().map(|&v| RationalFunction::real(v)).collect())
        .collect();
    ControllerModel::from_matrix(RationalMatrix::new(r, cols, entries).unwrap()).unwrap()
}
