//! The propagator by midpoint quadrature in the angle variable, compared with
//! (min(m, l) + 1)/mu^2, and the identity G P = 1 on interior rows.

use jacobi_ncft::ncft::{
    propagator_closed_form, propagator_entry, propagator_identity_residual, propagator_min_nodes, propagator_table,
    PropagatorSource, DEFAULT_PROPAGATOR_NODES,
};

fn main() -> jacobi_ncft::Result<()> {
    let mu_sq = 0.5;
    for (m, l) in [(0, 0), (2, 5), (7, 7), (40, 13)] {
        let q = propagator_entry(mu_sq, m, l, DEFAULT_PROPAGATOR_NODES)?;
        println!(
            "P_{m},{l} = {q:.12} (closed form {}, minimal exact nodes {})",
            propagator_closed_form(mu_sq, m, l),
            propagator_min_nodes(m, l)
        );
    }
    let table = propagator_table(mu_sq, 5, 64)?;
    println!("{table:.4}");
    for source in [
        PropagatorSource::ClosedForm,
        PropagatorSource::Quadrature { nodes: 256 },
    ] {
        println!(
            "{source:?}: identity residual {:.2e}",
            propagator_identity_residual(mu_sq, 32, source)?
        );
    }
    Ok(())
}
