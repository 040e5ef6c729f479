//! Truncated spectrum of the kinetic operator by Sturm bisection, next to the
//! closed form and the zeros of the second-kind Chebyshev polynomial.

use jacobi_ncft::jacobi::JacobiCoefficients;
use jacobi_ncft::ncft::{kinetic_reduced, spectrum_closed_form};
use jacobi_ncft::orthopoly::{eigenvalues, sturm_count, RecurrencePolynomials};

fn main() -> jacobi_ncft::Result<()> {
    let (mu_sq, n) = (1.5, 8);
    let g = kinetic_reduced(mu_sq, n)?;
    let sturm = eigenvalues(g.matrix());
    let closed = spectrum_closed_form(mu_sq, n)?;
    let u_zeros = RecurrencePolynomials::new(JacobiCoefficients::chebyshev_u()).zeros(n)?;

    println!(
        "{:>3} {:>20} {:>20} {:>20}",
        "k", "Sturm", "closed form", "2mu^2(1 - x_k)"
    );
    for k in 0..n {
        let via_u = 2.0 * mu_sq * (1.0 - u_zeros.zeros[n - 1 - k]);
        println!("{k:>3} {:>20.15} {:>20.15} {:>20.15}", sturm[k], closed[k], via_u);
    }
    println!("eigenvalues below 2 mu^2: {}", sturm_count(g.matrix(), 2.0 * mu_sq));
    Ok(())
}
