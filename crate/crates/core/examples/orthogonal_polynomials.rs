//! Zero ladders, interlacing and the Christoffel-Darboux identities for a
//! coefficient rule given as a closure.

use jacobi_ncft::jacobi::JacobiCoefficients;
use jacobi_ncft::orthopoly::{eigenvalues, RecurrencePolynomials};

fn main() -> jacobi_ncft::Result<()> {
    // A Jacobi operator with slowly varying coefficients, a_m -> 1/2 and b_m -> 0.
    let coeffs = JacobiCoefficients::new(
        |m| 0.5 + 0.25 / (m as f64 + 1.0),
        |m| 0.3 / (m as f64 + 1.0).powi(2),
        1.05,
    )?;
    let fam = RecurrencePolynomials::new(coeffs.clone());

    let ladder = fam.zero_ladder(6)?;
    for set in &ladder {
        let line: Vec<String> = set.zeros.iter().map(|z| format!("{z:+.6}")).collect();
        println!("P_{}: {}", set.degree, line.join(" "));
    }
    let interlaced = ladder.windows(2).all(|w| w[0].interlaces(&w[1]));
    println!("consecutive zero sets interlace: {interlaced}");

    let n = 40;
    let zeros = fam.zeros(n)?;
    let eig = eigenvalues(&coeffs.truncate(n)?);
    let gap = zeros
        .zeros
        .iter()
        .zip(&eig)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    println!("zeros of P_{n} vs eigenvalues of the {n}x{n} truncation: max gap {gap:.2e}");

    for (n, t, z) in [(10, 0.3, -0.7), (64, 0.95, 0.1), (128, -0.2, -0.2)] {
        let (kernel, confluent) = fam.christoffel_darboux_residual(n, t, z)?.relative();
        println!("n = {n:>3}, t = {t:+}, z = {z:+}: kernel {kernel:.1e}, confluent {confluent:.1e}");
    }
    Ok(())
}
