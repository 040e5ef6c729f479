//! One-loop tadpole coefficients as a function of the cutoff, and the fitted
//! divergence exponent.

use jacobi_ncft::ncft::{
    tadpole_closed_form, tadpole_coefficient, tadpole_divergence_exponent, tadpole_sigma, vertex_cubic,
    PropagatorSource,
};

fn main() -> jacobi_ncft::Result<()> {
    let mu_sq = 1.0;
    println!("sigma = {}", tadpole_sigma(mu_sq));
    println!("cubic vertex V_(2,1,1,3) = {}", vertex_cubic(mu_sq, 2, 1, 1, 3));
    for cutoff in [4, 16, 64, 256, 1024] {
        let c = tadpole_coefficient(mu_sq, 1, cutoff, PropagatorSource::ClosedForm)?;
        println!(
            "N = {cutoff:>5}: c_N(1) = {c:>10} (closed form {})",
            tadpole_closed_form(mu_sq, 1, cutoff)
        );
    }
    let q = tadpole_coefficient(mu_sq, 1, 16, PropagatorSource::Quadrature { nodes: 1 << 8 })?;
    println!("N = 16 with quadrature propagator: {q:.12}");
    let p = tadpole_divergence_exponent(mu_sq, 0, &[250, 500, 1000, 2000])?;
    println!("c_N grows like N^{p:.4}");
    Ok(())
}
