//! Closed-form eigenvectors of the truncated kinetic operator, its Dirichlet
//! form, and the residual the full operator leaves on them.

use jacobi_ncft::ncft::{eigenvector_closed_form, embedding_residual, kinetic_reduced};

fn main() -> jacobi_ncft::Result<()> {
    let (mu_sq, n) = (2.0, 6);
    let g = kinetic_reduced(mu_sq, n)?;
    for m in 0..n {
        let v = eigenvector_closed_form(n, m)?;
        let norm: f64 = v.components.iter().map(|x| x * x).sum::<f64>().sqrt();
        println!(
            "m = {m}: G-eigenvalue {:.6}, |v| = {norm:.15}, residual {:.1e}, full-operator residual {:.6}",
            v.g_eigenvalue(mu_sq),
            v.residual(mu_sq)?,
            embedding_residual(mu_sq, n, m)?
        );
    }
    let v = [1.0, -2.0, 0.5, 0.0, 3.0, 1.0];
    println!(
        "<v, G v> = {:.6}, Dirichlet form = {:.6}",
        g.quadratic_form(&v)?,
        g.dirichlet_form(&v)?
    );
    Ok(())
}
