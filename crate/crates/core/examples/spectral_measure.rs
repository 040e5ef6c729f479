//! Gauss rules from Jacobi coefficients, moments, the Stieltjes transform and
//! recovery of interval masses by Perron inversion.

use jacobi_ncft::jacobi::JacobiCoefficients;
use jacobi_ncft::measure::{
    gauss_rule, matrix_element, moments, perron_inversion, stieltjes_series, stieltjes_transform, SpectralMeasure,
    Weight,
};
use jacobi_ncft::orthopoly::RecurrencePolynomials;
use num_complex::Complex64;

fn main() -> jacobi_ncft::Result<()> {
    let coeffs = JacobiCoefficients::chebyshev_u();
    let measure = SpectralMeasure::chebyshev_u();
    let rule = gauss_rule(&coeffs, 12)?;
    println!("12-node rule, exact to degree {}", rule.exact_degree());

    let s = moments(&rule, 8)?;
    println!(
        "moments s_0..s_8: {:?}",
        s.iter().map(|x| format!("{x:.6}")).collect::<Vec<_>>()
    );

    let z = Complex64::new(2.0, 0.0);
    let w = stieltjes_transform(&measure, &rule, z)?;
    let all = moments(&gauss_rule(&JacobiCoefficients::chebyshev_u(), 40)?, 79)?;
    println!("w(2) = {:.15} (series {:.15})", w.re, stieltjes_series(&all, z).re);

    let fam = RecurrencePolynomials::new(coeffs);
    let a3 = matrix_element(&fam, &measure, &rule, 3, 4, Weight::T)?;
    println!("int t P_3 P_4 dmu = {a3:.15} (a_3 = 0.5)");

    for nu in [1e-2, 1e-3, 1e-4] {
        let mass = perron_inversion(&measure, -0.5, 0.5, nu, nu)?;
        println!("nu = {nu:.0e}: mu([-1/2, 1/2]) ~ {mass:.6}");
    }
    println!("exact: {:.6}", 1.0 / 3.0 + 3f64.sqrt() / (2.0 * std::f64::consts::PI));
    Ok(())
}
