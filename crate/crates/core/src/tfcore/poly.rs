//! Dense complex-coefficient polynomials in the Laplace variable `s`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Iteration cap for the Aberth-Ehrlich root finder.
const MAX_ROOT_ITERATIONS: usize = 1000;

/// Default residual tolerance for [`ComplexPoly::roots`].
pub const DEFAULT_ROOT_TOL: f64 = 1e-10;

/// Polynomial with complex coefficients stored in ascending degree.
///
/// The representation is canonical: the highest stored coefficient is
/// nonzero, and the zero polynomial has no coefficients at all.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<Complex64>", into = "Vec<Complex64>")]
pub struct ComplexPoly {
    coeffs: Vec<Complex64>,
}

impl From<Vec<Complex64>> for ComplexPoly {
    fn from(coeffs: Vec<Complex64>) -> Self {
        ComplexPoly::new(coeffs)
    }
}

impl From<ComplexPoly> for Vec<Complex64> {
    fn from(p: ComplexPoly) -> Self {
        p.coeffs
    }
}

impl ComplexPoly {
    /// Builds a polynomial from ascending coefficients, trimming exact zeros
    /// at the top.
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.last().is_some_and(|c| *c == ZERO) {
            coeffs.pop();
        }
        ComplexPoly { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        ComplexPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(ONE)
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(vec![c])
    }

    /// The monomial `s`.
    pub fn s() -> Self {
        Self::new(vec![ZERO, ONE])
    }

    /// `s + c`
    pub fn linear(c: Complex64) -> Self {
        Self::new(vec![c, ONE])
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        roots
            .iter()
            .fold(Self::one(), |acc, &r| &acc * &Self::linear(-r))
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree of the polynomial; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> Complex64 {
        self.coeffs.last().copied().unwrap_or(ZERO)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Horner evaluation.
    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * s + c)
    }

    /// `Σ |c_k| |s|^k`, the natural scale of rounding error in [`eval`](Self::eval).
    pub fn eval_scale(&self, s: Complex64) -> f64 {
        let r = s.norm();
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * r + c.norm())
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    pub fn scale(&self, k: Complex64) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * k).collect())
    }

    /// Drops top coefficients whose magnitude is at most `tol` times the
    /// largest coefficient. Used to clean cancellation noise after subtraction.
    pub fn trim_relative(&self, tol: f64) -> Self {
        let cutoff = tol * self.max_abs_coeff();
        let mut coeffs = self.coeffs.clone();
        while coeffs.last().is_some_and(|c| c.norm() <= cutoff) {
            coeffs.pop();
        }
        ComplexPoly { coeffs }
    }

    /// Polynomial long division: returns `(quotient, remainder)`.
    pub fn div_rem(&self, divisor: &ComplexPoly) -> Result<(ComplexPoly, ComplexPoly)> {
        if divisor.is_zero() {
            return Err(Error::Domain("polynomial division by zero".into()));
        }
        if self.degree() < divisor.degree() || self.is_zero() {
            return Ok((Self::zero(), self.clone()));
        }
        let dd = divisor.degree();
        let lead = divisor.leading();
        let mut rem = self.coeffs.clone();
        let mut quot = vec![ZERO; self.degree() - dd + 1];
        for k in (0..quot.len()).rev() {
            let q = rem[k + dd] / lead;
            quot[k] = q;
            for (j, &d) in divisor.coeffs.iter().enumerate() {
                rem[k + j] -= q * d;
            }
            rem[k + dd] = ZERO;
        }
        rem.truncate(dd);
        Ok((Self::new(quot), Self::new(rem)))
    }

    /// Divides out `(s - root)` by synthetic division, discarding the remainder.
    pub fn deflate(&self, root: Complex64) -> Self {
        if self.coeffs.len() <= 1 {
            return Self::zero();
        }
        let n = self.coeffs.len() - 1;
        let mut out = vec![ZERO; n];
        let mut carry = ZERO;
        for k in (0..n).rev() {
            carry = carry * root + self.coeffs[k + 1];
            out[k] = carry;
        }
        Self::new(out)
    }

    /// Conjugates every coefficient.
    pub fn conj_coeffs(&self) -> Self {
        Self::new(self.coeffs.iter().map(|c| c.conj()).collect())
    }

    /// All `degree()` roots, with multiplicity, sorted by (real, imaginary).
    ///
    /// Every returned root `r` satisfies
    /// `|p(r)| <= tol * Σ |c_k| max(1, |r|)^k`.
    pub fn roots(&self, tol: f64) -> Result<Vec<Complex64>> {
        poly_roots(self, tol)
    }
}

/// Orders roots by real part (quantized to `quantum`, so rounding noise does
/// not split conjugate-like pairs) and then by imaginary part.
fn sort_roots(roots: &mut [Complex64]) {
    let scale = roots.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let quantum = 1e-9 * scale;
    // `+ 0.0` folds −0 into +0 for total_cmp
    let key = |z: &Complex64| (z.re / quantum).round() + 0.0;
    roots.sort_by(|a, b| key(a).total_cmp(&key(b)).then(a.im.total_cmp(&b.im)));
}

/// Finds all roots of `p` with the Aberth-Ehrlich simultaneous iteration.
///
/// Exact zero roots are split off first; linear factors are solved directly.
pub fn poly_roots(p: &ComplexPoly, tol: f64) -> Result<Vec<Complex64>> {
    if p.is_zero() {
        return Err(Error::Domain("roots of the zero polynomial".into()));
    }
    if p.degree() == 0 {
        return Err(Error::Domain("roots of a constant polynomial".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!(
            "root tolerance must be positive, got {tol}"
        )));
    }

    let zeros_at_origin = p.coeffs.iter().take_while(|c| **c == ZERO).count();
    let reduced = ComplexPoly::new(p.coeffs[zeros_at_origin..].to_vec());
    let mut roots = vec![ZERO; zeros_at_origin];

    match reduced.degree() {
        0 => {}
        1 => roots.push(-reduced.coeffs[0] / reduced.coeffs[1]),
        _ => roots.extend(aberth(&reduced)?),
    }

    for r in &roots {
        let bound = tol * p.eval_scale(Complex64::new(r.norm().max(1.0), 0.0));
        if p.eval(*r).norm() > bound {
            return Err(Error::numeric(
                format!(
                    "root residual {:.3e} exceeds bound {:.3e}",
                    p.eval(*r).norm(),
                    bound
                ),
                roots.clone(),
            ));
        }
    }
    sort_roots(&mut roots);
    Ok(roots)
}

fn aberth(p: &ComplexPoly) -> Result<Vec<Complex64>> {
    let n = p.degree();
    let lead = p.leading();
    let monic = p.scale(lead.inv());
    let dp = monic.derivative();

    // Start on a circle around the centroid of the roots.
    let center = -monic.coeffs[n - 1] / n as f64;
    let radius = monic.eval(center).norm().powf(1.0 / n as f64).max(1e-3);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4;
            center + Complex64::from_polar(radius, theta)
        })
        .collect();

    let eps = f64::EPSILON;
    for _ in 0..MAX_ROOT_ITERATIONS {
        let mut converged = true;
        for i in 0..n {
            let pz = monic.eval(z[i]);
            if pz.norm() <= 4.0 * eps * monic.eval_scale(z[i]) {
                continue;
            }
            let dpz = dp.eval(z[i]);
            let repulsion: Complex64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    let d = z[i] - z[j];
                    if d == ZERO {
                        Complex64::new(1e100, 0.0)
                    } else {
                        d.inv()
                    }
                })
                .sum();
            let newton = if dpz == ZERO {
                Complex64::new(1e-8, 1e-8) * (1.0 + z[i].norm())
            } else {
                pz / dpz
            };
            let step = newton / (ONE - newton * repulsion);
            if !step.re.is_finite() || !step.im.is_finite() {
                continue;
            }
            z[i] -= step;
            if step.norm() > 1e-15 * (1.0 + z[i].norm()) {
                converged = false;
            }
        }
        if converged {
            return Ok(z);
        }
    }

    // Multiple roots converge linearly; accept if the residuals are tiny.
    let all_small = z.iter().all(|&r| {
        monic.eval(r).norm() <= 1e-12 * monic.eval_scale(Complex64::new(r.norm().max(1.0), 0.0))
    });
    if all_small {
        Ok(z)
    } else {
        Err(Error::numeric("Aberth iteration did not converge", z))
    }
}

impl Add for &ComplexPoly {
    type Output = ComplexPoly;
    fn add(self, rhs: &ComplexPoly) -> ComplexPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let get = |v: &[Complex64], k: usize| v.get(k).copied().unwrap_or(ZERO);
        ComplexPoly::new(
            (0..n)
                .map(|k| get(&self.coeffs, k) + get(&rhs.coeffs, k))
                .collect(),
        )
    }
}

impl Sub for &ComplexPoly {
    type Output = ComplexPoly;
    fn sub(self, rhs: &ComplexPoly) -> ComplexPoly {
        self + &(-rhs)
    }
}

impl Neg for &ComplexPoly {
    type Output = ComplexPoly;
    fn neg(self) -> ComplexPoly {
        ComplexPoly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl Mul for &ComplexPoly {
    type Output = ComplexPoly;
    fn mul(self, rhs: &ComplexPoly) -> ComplexPoly {
        if self.is_zero() || rhs.is_zero() {
            return ComplexPoly::zero();
        }
        let mut out = vec![ZERO; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        ComplexPoly::new(out)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for ComplexPoly {
            type Output = ComplexPoly;
            fn $m(self, rhs: ComplexPoly) -> ComplexPoly {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl fmt::Display for ComplexPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, c)| **c != ZERO)
            .map(|(k, c)| match k {
                0 => format!("({c})"),
                1 => format!("({c})s"),
                _ => format!("({c})s^{k}"),
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}
