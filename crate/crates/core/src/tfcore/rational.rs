//! Rational functions `num(s) / den(s)` over complex coefficients.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::poly::{ComplexPoly, DEFAULT_ROOT_TOL};
use crate::error::{Error, Result};

/// Root-clustering tolerance used when cancelling common factors.
pub const DEFAULT_CANCEL_TOL: f64 = 1e-8;

/// Largest relative change in frequency response that a cancellation may cause.
const CANCEL_VERIFY_TOL: f64 = 1e-9;

/// Relative size below which cancellation residue at the top of a sum is dropped.
const SUM_TRIM_TOL: f64 = 64.0 * f64::EPSILON;

/// A rational function with a monic denominator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalFunction {
    num: ComplexPoly,
    den: ComplexPoly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl RationalFunction {
    /// Builds `num / den`, normalizing the denominator to be monic.
    pub fn new(num: ComplexPoly, den: ComplexPoly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::Domain(
                "rational function with zero denominator".into(),
            ));
        }
        let k = den.leading().inv();
        Ok(RationalFunction {
            num: num.scale(k),
            den: den.scale(k),
        })
    }

    pub fn from_poly(num: ComplexPoly) -> Self {
        RationalFunction {
            num,
            den: ComplexPoly::one(),
        }
    }

    pub fn constant(c: Complex64) -> Self {
        Self::from_poly(ComplexPoly::constant(c))
    }

    pub fn real(c: f64) -> Self {
        Self::constant(Complex64::new(c, 0.0))
    }

    pub fn zero() -> Self {
        Self::from_poly(ComplexPoly::zero())
    }

    pub fn one() -> Self {
        Self::real(1.0)
    }

    pub fn num(&self) -> &ComplexPoly {
        &self.num
    }

    pub fn den(&self) -> &ComplexPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// Evaluates at `s`; fails when `den(s)` vanishes to within rounding.
    pub fn eval(&self, s: Complex64) -> Result<Complex64> {
        let d = self.den.eval(s);
        let guard = 8.0 * f64::EPSILON * self.den.eval_scale(s);
        if d.norm() <= guard || d.norm() < f64::MIN_POSITIVE {
            return Err(Error::PoleEvaluation { s });
        }
        Ok(self.num.eval(s) / d)
    }

    /// Evaluates on the imaginary axis, `s = iω`.
    pub fn eval_iw(&self, omega: f64) -> Result<Complex64> {
        self.eval(Complex64::new(0.0, omega))
    }

    pub fn poles(&self) -> Result<Vec<Complex64>> {
        if self.den.degree() == 0 {
            return Ok(Vec::new());
        }
        self.den.roots(DEFAULT_ROOT_TOL)
    }

    pub fn zeros(&self) -> Result<Vec<Complex64>> {
        if self.num.degree() == 0 {
            return Ok(Vec::new());
        }
        self.num.roots(DEFAULT_ROOT_TOL)
    }

    pub fn scale(&self, k: Complex64) -> Self {
        RationalFunction {
            num: self.num.scale(k),
            den: self.den.clone(),
        }
    }

    pub fn checked_div(&self, rhs: &RationalFunction) -> Result<Self> {
        if rhs.is_zero() {
            return Err(Error::Domain(
                "division by the zero rational function".into(),
            ));
        }
        Self::new(&self.num * &rhs.den, &self.den * &rhs.num)
    }

    pub fn recip(&self) -> Result<Self> {
        Self::one().checked_div(self)
    }

    /// Cancels common numerator/denominator roots that agree within `tol`.
    ///
    /// The result is checked against the original on a frequency grid; if any
    /// point moves by more than 1e-9 relative, the original is returned
    /// unchanged.
    pub fn reduced(&self, tol: f64) -> Self {
        if self.num.is_zero() {
            return Self::zero();
        }
        if self.num.degree() == 0 || self.den.degree() == 0 {
            return self.clone();
        }
        let (Ok(zeros), Ok(poles)) = (
            self.num.roots(DEFAULT_ROOT_TOL),
            self.den.roots(DEFAULT_ROOT_TOL),
        ) else {
            return self.clone();
        };

        let mut used = vec![false; zeros.len()];
        let mut common = Vec::new();
        for p in &poles {
            let nearest = zeros
                .iter()
                .enumerate()
                .filter(|(i, _)| !used[*i])
                .map(|(i, z)| (i, (z - p).norm()))
                .min_by(|a, b| a.1.total_cmp(&b.1));
            if let Some((i, dist)) = nearest {
                if dist <= tol * p.norm().max(1.0) {
                    used[i] = true;
                    common.push((zeros[i] + p) * 0.5);
                }
            }
        }
        if common.is_empty() {
            return self.clone();
        }

        let mut num = self.num.clone();
        let mut den = self.den.clone();
        for r in &common {
            num = num.deflate(*r);
            den = den.deflate(*r);
        }
        let Ok(candidate) = Self::new(num, den) else {
            return self.clone();
        };
        if self.agrees_with(&candidate, CANCEL_VERIFY_TOL) {
            candidate
        } else {
            self.clone()
        }
    }

    /// Frequency-response agreement on a fixed verification grid.
    fn agrees_with(&self, other: &RationalFunction, rel_tol: f64) -> bool {
        let scale = self
            .poles()
            .unwrap_or_default()
            .iter()
            .chain(self.zeros().unwrap_or_default().iter())
            .map(|z| z.norm())
            .fold(1.0, f64::max);
        (0..=40).all(|k| {
            let omega = scale * (-4.0 + 0.2 * k as f64);
            match (self.eval_iw(omega), other.eval_iw(omega)) {
                (Ok(a), Ok(b)) => (a - b).norm() <= rel_tol * a.norm().max(1e-300) + 1e-300,
                (Err(_), _) | (_, Err(_)) => true,
            }
        })
    }

    fn combine(&self, rhs: &RationalFunction, negate: bool) -> Self {
        let sign = if negate { -1.0 } else { 1.0 };
        if self.den == rhs.den {
            let num = &self.num + &rhs.num.scale(Complex64::new(sign, 0.0));
            let scale = self.num.max_abs_coeff().max(rhs.num.max_abs_coeff());
            return RationalFunction {
                num: trim_against(num, scale),
                den: self.den.clone(),
            };
        }
        let a = &self.num * &rhs.den;
        let b = (&rhs.num * &self.den).scale(Complex64::new(sign, 0.0));
        let scale = a.max_abs_coeff().max(b.max_abs_coeff());
        RationalFunction {
            num: trim_against(&a + &b, scale),
            den: &self.den * &rhs.den,
        }
    }
}

/// Drops top coefficients that are rounding residue relative to `scale`.
fn trim_against(p: ComplexPoly, scale: f64) -> ComplexPoly {
    let cutoff = SUM_TRIM_TOL * scale;
    let mut coeffs = p.coeffs().to_vec();
    while coeffs.last().is_some_and(|c| c.norm() <= cutoff) {
        coeffs.pop();
    }
    ComplexPoly::new(coeffs)
}

/// Exact arithmetic on two rational functions. No cancellation is applied;
/// call [`RationalFunction::reduced`] on the result to opt in.
pub fn rf_arith(
    a: &RationalFunction,
    b: &RationalFunction,
    op: ArithOp,
) -> Result<RationalFunction> {
    match op {
        ArithOp::Add => Ok(a + b),
        ArithOp::Sub => Ok(a - b),
        ArithOp::Mul => Ok(a * b),
        ArithOp::Div => a.checked_div(b),
    }
}

/// Evaluates `r` at `s`.
pub fn rf_eval(r: &RationalFunction, s: Complex64) -> Result<Complex64> {
    r.eval(s)
}

impl Add for &RationalFunction {
    type Output = RationalFunction;
    fn add(self, rhs: &RationalFunction) -> RationalFunction {
        self.combine(rhs, false)
    }
}

impl Sub for &RationalFunction {
    type Output = RationalFunction;
    fn sub(self, rhs: &RationalFunction) -> RationalFunction {
        self.combine(rhs, true)
    }
}

impl Mul for &RationalFunction {
    type Output = RationalFunction;
    fn mul(self, rhs: &RationalFunction) -> RationalFunction {
        RationalFunction {
            num: &self.num * &rhs.num,
            den: &self.den * &rhs.den,
        }
    }
}

impl Neg for &RationalFunction {
    type Output = RationalFunction;
    fn neg(self) -> RationalFunction {
        RationalFunction {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn one_over_s_plus_one() -> RationalFunction {
        RationalFunction::new(ComplexPoly::one(), ComplexPoly::from_real(&[1.0, 1.0])).unwrap()
    }

    #[test]
    fn denominator_is_monic() {
        let r = RationalFunction::new(
            ComplexPoly::from_real(&[2.0]),
            ComplexPoly::from_real(&[2.0, 4.0]),
        )
        .unwrap();
        assert_eq!(r.den().leading(), c(1.0, 0.0));
        assert!((r.eval(c(0.0, 0.0)).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn zero_denominator_rejected() {
        assert!(matches!(
            RationalFunction::new(ComplexPoly::one(), ComplexPoly::zero()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn like_denominators_add() {
        let a = one_over_s_plus_one();
        let sum = &a + &a;
        assert_eq!(sum.den(), a.den());
        assert_eq!(sum.num(), &ComplexPoly::from_real(&[2.0]));
    }

    #[test]
    fn self_division_cancels_to_one() {
        let r =
            RationalFunction::new(ComplexPoly::s(), ComplexPoly::from_real(&[1.0, 1.0])).unwrap();
        let q = rf_arith(&r, &r, ArithOp::Div)
            .unwrap()
            .reduced(DEFAULT_CANCEL_TOL);
        assert_eq!(q.num().degree(), 0);
        assert_eq!(q.den().degree(), 0);
        assert!((q.eval(c(0.3, 0.7)).unwrap() - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn constant_one_everywhere() {
        let one = RationalFunction::one();
        for s in [c(0.0, 0.0), c(1.0, -3.0), c(-7.0, 2.0)] {
            assert_eq!(one.eval(s).unwrap(), c(1.0, 0.0));
        }
    }

    #[test]
    fn pole_evaluation_detected() {
        let r = one_over_s_plus_one();
        assert!(r.eval(c(-1.0, 0.0)).unwrap_err().is_pole_evaluation());
    }

    #[test]
    fn division_by_zero_function() {
        let r = one_over_s_plus_one();
        assert!(matches!(
            rf_arith(&r, &RationalFunction::zero(), ArithOp::Div),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn cancellation_leaves_distinct_roots() {
        // (s+1)(s+2) / ((s+1)(s+3)) -> (s+2)/(s+3)
        let num = ComplexPoly::from_roots(&[c(-1.0, 0.0), c(-2.0, 0.0)]);
        let den = ComplexPoly::from_roots(&[c(-1.0, 0.0), c(-3.0, 0.0)]);
        let r = RationalFunction::new(num, den)
            .unwrap()
            .reduced(DEFAULT_CANCEL_TOL);
        assert_eq!(r.den().degree(), 1);
        assert!((r.den().coeffs()[0] - c(3.0, 0.0)).norm() < 1e-12);
        assert!((r.num().coeffs()[0] - c(2.0, 0.0)).norm() < 1e-12);
    }
}
