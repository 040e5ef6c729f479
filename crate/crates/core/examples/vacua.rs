//! Rotationally symmetric vacua in each regime of Omega^2, with their
//! equation-of-motion residuals.

use jacobi_ncft::ncft::{eom_residual, vacuum_sequence, VacuumParams};

fn main() -> jacobi_ncft::Result<()> {
    for (omega_sq, kappa, alpha) in [
        (0.1, -1.0, 0.0),
        (0.1, -1.0, 0.2),
        (1.0 / 3.0, -1.0, 0.0),
        (0.6, -1.0, 0.0),
        (1.0, -2.0, 0.0),
    ] {
        let seq = vacuum_sequence(VacuumParams::new(omega_sq, kappa, alpha)?)?;
        let u: Vec<String> = (0..6)
            .map(|m| seq.u(m).map(|x| format!("{x:.5}")))
            .collect::<Result<_, _>>()?;
        let mut worst: f64 = 0.0;
        for m in 0..30 {
            let scale = 1.0 + seq.u(m + 1)?.max(seq.u(m)?).powf(1.5);
            worst = worst.max(eom_residual(&seq, m)? / scale);
        }
        println!(
            "Omega^2 = {omega_sq:.4}, kappa = {kappa}, alpha = {alpha}: {:?}, r = {:?}, u = [{}], max relative residual {worst:.1e}",
            seq.regime(),
            seq.ratio(),
            u.join(", ")
        );
    }
    Ok(())
}
