//! Finite spectral triple on the kinetic operator: Dirac square roots, the
//! real structure, a commuting non-scalar witness and Hilbert-Schmidt bounds.

use jacobi_ncft::ncft::kinetic_reduced;
use jacobi_ncft::triple::{
    commutant_witness, decompose, dirac_positive, dirac_sqrt, hs_bound_check, isometry_j, ko_relations,
    strong_convergence_profile, CliffordRep, DecaySpec,
};
use nalgebra::DMatrix;
use num_complex::Complex64;

fn main() -> jacobi_ncft::Result<()> {
    let n = 12;
    let g = kinetic_reduced(1.0, n)?;
    let dec = decompose(&g)?;
    let d = dirac_positive(&dec)?;
    println!("D^2 - G: {:.1e}, ||D|| = {:.6}", d.square_residual(&g), d.norm());

    let signs: Vec<f64> = (0..n).map(|i| if i % 3 == 0 { -1.0 } else { 1.0 }).collect();
    let mixed = dirac_sqrt(&dec, &signs)?;
    println!("mixed-sign root, D^2 - G: {:.1e}", mixed.square_residual(&g));

    let iso = isometry_j(&dec, &d, &signs)?;
    println!(
        "isometry: J^2 - 1 {:.1e}, [D, J] {:.1e}",
        iso.involution_residual, iso.commutator_residual
    );

    let cl = CliffordRep::standard();
    println!("Clifford anticommutators {:.1e}", cl.anticommutator_residual());
    println!("{:?}", ko_relations(d.matrix(), &cl));

    let w = commutant_witness(&dec, &d, 0)?;
    println!(
        "witness: ||[D, P]|| = {:.1e}, distance to scalars {:.6}",
        w.commutator_norm, w.scalar_distance
    );

    let a = DMatrix::from_fn(n, n, |i, j| {
        Complex64::new(((i * 7 + j * 3) % 5) as f64 - 2.0, (i as f64 - j as f64) / n as f64)
    });
    let hs = hs_bound_check(&d, &a, Complex64::new(0.5, 0.3))?;
    println!("Hilbert-Schmidt slacks {:?}", hs.slacks());

    let profile = strong_convergence_profile(
        1.0,
        &DecaySpec::Geometric {
            amplitude: 1.0,
            ratio: 0.5,
        },
        &[1, 2, 4, 8, 16],
        1e-14,
    )?;
    let shown: Vec<String> = profile.iter().map(|x| format!("{x:.3e}")).collect();
    println!("||(P_N G P_N - G) f|| for N = 1, 2, 4, 8, 16: {}", shown.join(", "));
    Ok(())
}
