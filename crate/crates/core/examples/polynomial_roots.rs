//! Polynomial roots and rational-function arithmetic in `tfcore`.
//!
//! ```sh
//! cargo run --example polynomial_roots
//! ```

use qfa::tfcore::{ComplexPoly, RationalFunction};
use qfa::Complex64;

fn main() -> qfa::Result<()> {
    let roots = [
        Complex64::new(-0.5, 2.0),
        Complex64::new(-0.5, -2.0),
        Complex64::new(-3.0, 0.0),
        Complex64::new(-0.01, 7.0),
    ];
    let p = ComplexPoly::from_roots(&roots);
    println!("p(s) coefficients, constant first:");
    for (k, c) in p.coeffs().iter().enumerate() {
        println!("  s^{k}: {c:.6}");
    }
    for r in p.roots(1e-12)? {
        println!("root {r:.12}   |p(root)| = {:.2e}", p.eval(r).norm());
    }

    // H(s) = (s + 1) / p(s), then H · (1 / H) reduces to 1.
    let h = RationalFunction::new(ComplexPoly::from_real(&[1.0, 1.0]), p)?;
    let one = (&h * &h.recip()?).reduced(1e-9);
    println!("H(2i) = {:.6}", h.eval_iw(2.0)?);
    println!(
        "H·H⁻¹ at s = 0.3 + 0.1i: {:.12}",
        one.eval(Complex64::new(0.3, 0.1))?
    );
    for pole in h.poles()? {
        println!("pole of H: {pole:.4}");
    }
    Ok(())
}
