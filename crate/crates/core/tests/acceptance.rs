//! Acceptance suite: one PASS/FAIL line per criterion. Exits nonzero if any fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use jacobi_ncft::jacobi::JacobiCoefficients;
use jacobi_ncft::measure::{gauss_rule, matrix_element, perron_inversion, SpectralMeasure, Weight};
use jacobi_ncft::ncft::{
    eigenvector_closed_form, embedding_residual, eom_residual, kinetic13, kinetic_4index, kinetic_4index_with,
    kinetic_reduced, kinetic_uniform_exact, printed_normalization, propagator_entry, propagator_identity_residual,
    propagator_table, tadpole_coefficient, tadpole_divergence_exponent, vacuum_sequence, PropagatorSource, Regime,
    VacuumParams, DEFAULT_PROPAGATOR_NODES,
};
use jacobi_ncft::orthopoly::{eigenvalues, RecurrencePolynomials};
use jacobi_ncft::triple::{commutant_witness, decompose, dirac_positive, ko_relations, CliffordRep};
use nalgebra::DMatrix;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SPECTRUM_TOL: f64 = 1e-10;
const SPECTRUM_BUDGET: Duration = Duration::from_secs(10);
const ZEROS_TOL: f64 = 1e-10;
const EIGVEC_RESIDUAL_TOL: f64 = 1e-12;
const GRAM_TOL: f64 = 1e-10;
const NORMALIZATION_TOL: f64 = 1e-12;
const PROPAGATOR_TOL: f64 = 1e-8;
const PROPAGATOR_BUDGET: Duration = Duration::from_secs(30);
const CD_TOL: f64 = 1e-10;
const FAVARD_TOL: f64 = 1e-12;
const PERRON_TOL: f64 = 1e-3;
const PERRON_NU: f64 = 1e-4;
const VACUUM_TOL: f64 = 1e-12;
const DIRAC_SQUARE_TOL: f64 = 1e-10;
const KO_TOL: f64 = 1e-13;
const WITNESS_TOL: f64 = 1e-12;
const EXPONENT_TOL: f64 = 0.01;
const EMBEDDING_TOL: f64 = 1e-12;

type Criterion = (&'static str, fn() -> Verdict);

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn random_family(rng: &mut ChaCha8Rng, len: usize) -> JacobiCoefficients {
    let a: Vec<f64> = (0..len).map(|_| rng.gen_range(0.2..1.0)).collect();
    let b: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let bound = a.iter().zip(&b).map(|(x, y)| x + y.abs()).fold(0.0, f64::max);
    JacobiCoefficients::tabulated(a, b, bound).unwrap()
}

fn c1_spectrum() -> Verdict {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for n in 1..=512 {
        let g = kinetic_reduced(1.0, n).unwrap();
        let eig = eigenvalues(g.matrix());
        let oracle: Vec<f64> = (0..n)
            .map(|k| 2.0 * (1.0 - ((k + 1) as f64 * PI / (n + 1) as f64).cos()))
            .collect();
        worst = worst.max(max_abs_diff(&eig, &oracle));
    }
    let elapsed = start.elapsed();
    verdict(
        worst <= SPECTRUM_TOL && elapsed <= SPECTRUM_BUDGET,
        format!(
            "max abs error {worst:.2e} (tol {SPECTRUM_TOL:.0e}), {:.2} s (budget 10 s)",
            elapsed.as_secs_f64()
        ),
    )
}

fn c2_zeros_vs_eigenvalues() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut families = vec![JacobiCoefficients::chebyshev_shifted()];
    for _ in 0..5 {
        families.push(random_family(&mut rng, 257));
    }
    let mut worst: f64 = 0.0;
    for coeffs in &families {
        let ladder = RecurrencePolynomials::new(coeffs.clone()).zero_ladder(256).unwrap();
        for set in &ladder {
            let eig = eigenvalues(&coeffs.truncate(set.degree).unwrap());
            worst = worst.max(max_abs_diff(&set.zeros, &eig));
        }
    }
    verdict(
        worst <= ZEROS_TOL,
        format!("6 families, N <= 256, max gap {worst:.2e} (tol {ZEROS_TOL:.0e})"),
    )
}

fn c3_eigenvectors() -> Verdict {
    let mut residual: f64 = 0.0;
    let mut gram: f64 = 0.0;
    let mut normalization: f64 = 0.0;
    let mut ratio_spread = (f64::INFINITY, 0.0f64);
    for n in 1..=128 {
        let vs: Vec<Vec<f64>> = (0..n)
            .map(|m| eigenvector_closed_form(n, m).unwrap().components)
            .collect();
        for mu_sq in [1.0, 2.5] {
            let g = kinetic_reduced(mu_sq, n).unwrap().to_dense();
            for (m, v) in vs.iter().enumerate() {
                let theta = (m + 1) as f64 * PI / (n + 1) as f64;
                let lambda = 2.0 * mu_sq * (1.0 - theta.cos());
                let gv = &g * nalgebra::DVector::from_column_slice(v);
                let r = gv
                    .iter()
                    .zip(v)
                    .map(|(x, y)| (x - lambda * y).powi(2))
                    .sum::<f64>()
                    .sqrt();
                residual = residual.max(r / mu_sq);
            }
        }
        let mut dev = 0.0;
        for i in 0..n {
            for j in 0..n {
                let dot: f64 = vs[i].iter().zip(&vs[j]).map(|(a, b)| a * b).sum();
                dev += (dot - if i == j { 1.0 } else { 0.0 }).powi(2);
            }
        }
        gram = gram.max(dev.sqrt());
        for m in 0..n {
            let theta = (m + 1) as f64 * PI / (n + 1) as f64;
            let target = theta.sin() * (2.0 / (n + 1) as f64).sqrt();
            let printed = printed_normalization(n, m);
            normalization = normalization.max((printed - target).abs());
            let ratio = target / printed;
            ratio_spread = (ratio_spread.0.min(ratio), ratio_spread.1.max(ratio));
        }
    }
    let parts = [
        residual <= EIGVEC_RESIDUAL_TOL,
        gram <= GRAM_TOL,
        normalization <= NORMALIZATION_TOL,
    ];
    verdict(
        parts.iter().all(|&p| p),
        format!(
            "residual {residual:.2e}/mu^2 [{}], Gram {gram:.2e} [{}], printed normalization mismatch {normalization:.3e} [{}] \
             (unit/printed ratio in [{:.15}, {:.15}], sqrt 2 = {:.15})",
            tag(parts[0]),
            tag(parts[1]),
            tag(parts[2]),
            ratio_spread.0,
            ratio_spread.1,
            2f64.sqrt()
        ),
    )
}

fn tag(p: bool) -> &'static str {
    if p {
        "ok"
    } else {
        "FAIL"
    }
}

fn c4_propagator() -> Verdict {
    let start = Instant::now();
    let mut rel: f64 = 0.0;
    for mu_sq in [1.0, 0.5] {
        let table = propagator_table(mu_sq, 65, DEFAULT_PROPAGATOR_NODES).unwrap();
        for m in 0..=64 {
            for l in 0..=64 {
                let exact = (m.min(l) + 1) as f64 / mu_sq;
                rel = rel.max((table[(m, l)] - exact).abs() / exact);
            }
        }
    }
    for (m, l) in [(0, 0), (3, 17), (64, 64), (64, 0)] {
        let v = propagator_entry(1.0, m, l, DEFAULT_PROPAGATOR_NODES).unwrap();
        rel = rel.max((v - (m.min(l) + 1) as f64).abs() / (m.min(l) + 1) as f64);
    }
    let identity = propagator_identity_residual(
        1.0,
        65,
        PropagatorSource::Quadrature {
            nodes: DEFAULT_PROPAGATOR_NODES,
        },
    )
    .unwrap();
    let elapsed = start.elapsed();
    verdict(
        rel <= PROPAGATOR_TOL && identity <= PROPAGATOR_TOL && elapsed <= PROPAGATOR_BUDGET,
        format!(
            "max rel error {rel:.2e}, identity residual {identity:.2e} (tol {PROPAGATOR_TOL:.0e}), {:.2} s (budget 30 s)",
            elapsed.as_secs_f64()
        ),
    )
}

/// Direct recurrence with derivatives, independent of the library's rescaling.
fn recurrence(coeffs: &JacobiCoefficients, n: usize, t: f64) -> (Vec<f64>, Vec<f64>) {
    let mut p = vec![1.0, 0.0];
    let mut d = vec![0.0, 0.0];
    p[1] = (t - coeffs.b(0).unwrap()) / coeffs.a(0).unwrap();
    d[1] = 1.0 / coeffs.a(0).unwrap();
    for k in 1..=n {
        let (a, b, a_prev) = (coeffs.a(k).unwrap(), coeffs.b(k).unwrap(), coeffs.a(k - 1).unwrap());
        p.push(((t - b) * p[k] - a_prev * p[k - 1]) / a);
        d.push((p[k] + (t - b) * d[k] - a_prev * d[k - 1]) / a);
    }
    (p, d)
}

fn c5_christoffel_darboux() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut families = vec![
        JacobiCoefficients::chebyshev_u(),
        JacobiCoefficients::chebyshev_shifted(),
    ];
    for _ in 0..3 {
        families.push(random_family(&mut rng, 140));
    }
    let mut worst_lib: f64 = 0.0;
    let mut worst_oracle: f64 = 0.0;
    for _ in 0..100 {
        let coeffs = &families[rng.gen_range(0..families.len())];
        let edge = coeffs.norm_bound();
        let n = rng.gen_range(0..=128);
        let t = rng.gen_range(-edge..edge);
        let z = rng.gen_range(-edge..edge);
        let (k, c) = RecurrencePolynomials::new(coeffs.clone())
            .christoffel_darboux_residual(n, t, z)
            .unwrap()
            .relative();
        worst_lib = worst_lib.max(k).max(c);

        let (pt, dt) = recurrence(coeffs, n, t);
        let (pz, _) = recurrence(coeffs, n, z);
        let an = coeffs.a(n).unwrap();
        let lhs: f64 = (0..=n).map(|k| pt[k] * pz[k]).sum::<f64>() * (t - z);
        let rhs = an * (pt[n + 1] * pz[n] - pt[n] * pz[n + 1]);
        let scale = (t - z).abs() * (0..=n).map(|k| (pt[k] * pz[k]).abs()).sum::<f64>()
            + an * ((pt[n + 1] * pz[n]).abs() + (pt[n] * pz[n + 1]).abs());
        let lhs2: f64 = (0..=n).map(|k| pt[k] * pt[k]).sum();
        let rhs2 = an * (dt[n + 1] * pt[n] - dt[n] * pt[n + 1]);
        let scale2 = lhs2 + an * ((dt[n + 1] * pt[n]).abs() + (dt[n] * pt[n + 1]).abs());
        worst_oracle = worst_oracle
            .max((lhs - rhs).abs() / scale)
            .max((lhs2 - rhs2).abs() / scale2);
    }
    verdict(
        worst_lib <= CD_TOL && worst_oracle <= CD_TOL,
        format!(
            "100 samples, n <= 128: library {worst_lib:.2e}, direct recurrence {worst_oracle:.2e} (tol {CD_TOL:.0e})"
        ),
    )
}

fn c6_favard() -> Verdict {
    let k = 65;
    let coeffs = JacobiCoefficients::chebyshev_shifted();
    let rule = gauss_rule(&coeffs, k).unwrap();
    let fam = RecurrencePolynomials::new(coeffs);
    let measure = SpectralMeasure::kinetic();
    let mut worst: f64 = 0.0;
    for mu_sq in [1.0, 3.0] {
        let j = kinetic_reduced(mu_sq, k).unwrap().to_dense() / -mu_sq;
        for m in 0..k {
            for l in 0..k {
                let v = matrix_element(&fam, &measure, &rule, m, l, Weight::T).unwrap();
                worst = worst.max((v - j[(m, l)]).abs());
            }
        }
    }
    verdict(
        worst <= FAVARD_TOL,
        format!("K = 65, m,l <= 64: max error {worst:.2e} (tol {FAVARD_TOL:.0e})"),
    )
}

fn c7_perron() -> Verdict {
    let u = SpectralMeasure::chebyshev_u();
    // (2/pi) int sqrt(1 - x^2) dx by its antiderivative (x sqrt(1 - x^2) + asin x) / 2.
    let antiderivative = |x: f64| 0.5 * (x * (1.0 - x * x).sqrt() + x.asin());
    let target = 2.0 / PI * (antiderivative(0.5) - antiderivative(-0.5));
    let stated = 0.5 + 3f64.sqrt() / (2.0 * PI);
    let part = perron_inversion(&u, -0.5, 0.5, PERRON_NU, PERRON_NU).unwrap();
    let total = perron_inversion(&u, -1.5, 1.5, PERRON_NU, PERRON_NU).unwrap();
    let (e1, e2) = ((part - target).abs(), (total - 1.0).abs());
    verdict(
        e1 <= PERRON_TOL && e2 <= PERRON_TOL,
        format!(
            "mu([-1/2,1/2]) = {part:.6} vs antiderivative {target:.6} = 1/3 + sqrt3/(2 pi) (err {e1:.1e}; \
             the closed form 1/2 + sqrt3/(2 pi) = {stated:.6} misevaluates the same integral); mass {total:.6} (err {e2:.1e}); tol {PERRON_TOL:.0e}"
        ),
    )
}

fn c8_vacua() -> Verdict {
    let mut worst: f64 = 0.0;
    let mut seen = Vec::new();
    for (omega_sq, kappa) in [
        (0.1, -1.0),
        (0.25, -2.0),
        (0.6, -1.0),
        (0.9, -0.5),
        (1.0, -1.0),
        (1.0, -3.0),
    ] {
        let seq = vacuum_sequence(VacuumParams::new(omega_sq, kappa, 0.0).unwrap()).unwrap();
        seen.push(seq.regime());
        for m in 0..=100 {
            worst = worst.max(eom_residual(&seq, m).unwrap() / kappa.abs());
        }
    }
    let regimes_ok = [Regime::Exponential, Regime::Alternating, Regime::Critical]
        .iter()
        .all(|r| seen.contains(r));
    let mut uniform_exact = true;
    for kappa in [-1.0, -0.75, -4.0 / 3.0, -2.0] {
        let seq = vacuum_sequence(VacuumParams::new(1.0 / 3.0, kappa, 0.0).unwrap()).unwrap();
        for m in 0..=100 {
            uniform_exact &= seq.a(m).unwrap() == 0.5 * (-3.0 * kappa).sqrt();
        }
    }
    verdict(
        worst <= VACUUM_TOL && regimes_ok && uniform_exact,
        format!("max eom residual {worst:.2e}|kappa| (tol {VACUUM_TOL:.0e}), uniform a_m exact: {uniform_exact}"),
    )
}

fn c9_four_index() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let third = Ratio::new(1i64, 3);
    let kappa = Ratio::from_integer(-1i64);
    let a_sq = Ratio::new(3i64, 4);
    let seqs: Vec<_> = [0.0, 0.7, 5.0]
        .iter()
        .map(|&alpha| vacuum_sequence(VacuumParams::new(1.0 / 3.0, -1.0, alpha).unwrap()).unwrap())
        .collect();
    let mut exact_mismatch = 0;
    let mut alpha_mismatch = 0;
    let mut float_worst: f64 = 0.0;
    for _ in 0..10_000 {
        let q: Vec<i64> = (0..4).map(|_| rng.gen_range(0..10)).collect();
        let general = kinetic_4index_with(third, kappa, |_, _| a_sq, q[0], q[1], q[2], q[3]);
        let reduced = kinetic13(kappa, q[0], q[1], q[2], q[3]);
        let lib = kinetic_uniform_exact(Ratio::from_integer(1), q[0], q[1], q[2], q[3]);
        if general != reduced || lib != reduced {
            exact_mismatch += 1;
        }
        let u: Vec<usize> = q.iter().map(|&x| x as usize).collect();
        let vals: Vec<f64> = seqs
            .iter()
            .map(|s| kinetic_4index(s, u[0], u[1], u[2], u[3]).unwrap())
            .collect();
        if vals.iter().any(|v| v.to_bits() != vals[0].to_bits()) {
            alpha_mismatch += 1;
        }
        let r = *reduced.numer() as f64 / *reduced.denom() as f64;
        float_worst = float_worst.max((vals[0] - r).abs());
    }
    verdict(
        exact_mismatch == 0 && alpha_mismatch == 0 && float_worst <= 1e-14,
        format!("10^4 quadruples: exact mismatches {exact_mismatch}, alpha-dependent {alpha_mismatch}, f64 gap {float_worst:.1e}"),
    )
}

fn c10_triple() -> Verdict {
    let n = 32;
    let g = kinetic_reduced(1.0, n).unwrap();
    let dec = decompose(&g).unwrap();
    let d = dirac_positive(&dec).unwrap();
    let dense: DMatrix<f64> = d.matrix().clone();
    let square = (&dense * &dense - g.to_dense()).amax();
    let cl = CliffordRep::standard();
    let ko = ko_relations(d.matrix(), &cl);
    let anti = cl.anticommutator_residual();
    let w = commutant_witness(&dec, &d, 0).unwrap();
    let non_scalar = (w.scalar_distance - 0.5).abs() <= WITNESS_TOL;
    verdict(
        square <= DIRAC_SQUARE_TOL && ko.max() <= KO_TOL && anti <= KO_TOL && w.commutator_norm <= WITNESS_TOL && non_scalar,
        format!(
            "N = 32: D^2 - G {square:.2e}, KO max {:.2e}, Clifford {anti:.1e}, witness [D,P] {:.2e}, distance to scalars {:.15}",
            ko.max(),
            w.commutator_norm,
            w.scalar_distance
        ),
    )
}

fn c11_tadpole() -> Verdict {
    let mut mismatches = 0;
    for n in 2..=1000usize {
        for k in [0, n / 2 - 1, n - 2] {
            let lib = tadpole_coefficient(1.0, k, n, PropagatorSource::ClosedForm).unwrap();
            let p = |m: usize, l: usize| (m.min(l) + 1) as i128;
            let direct: i128 =
                (0..n).map(|l| 2 * p(l, l) - p(l, l + 1)).sum::<i128>() + p(k, k) + p(k + 1, k + 1) - p(k, k + 1);
            let closed = (n * (n + 1) / 2 + k + 2) as i128;
            if direct != closed || lib != closed as f64 {
                mismatches += 1;
            }
        }
    }
    let mut quad: f64 = 0.0;
    for n in [2, 5, 17, 40] {
        let v = tadpole_coefficient(2.0, 1.min(n - 2), n, PropagatorSource::Quadrature { nodes: 1 << 10 }).unwrap();
        let exact = (n * (n + 1) / 2 + 1.min(n - 2) + 2) as f64 / 2.0;
        quad = quad.max((v - exact).abs() / exact);
    }
    let exponent = tadpole_divergence_exponent(1.0, 0, &[250, 500, 1000]).unwrap();
    verdict(
        mismatches == 0 && quad <= PROPAGATOR_TOL && (exponent - 2.0).abs() <= EXPONENT_TOL,
        format!("N <= 1000: {mismatches} mismatches, quadrature source {quad:.1e}, divergence exponent {exponent:.5}"),
    )
}

fn c12_embedding() -> Verdict {
    let mut worst: f64 = 0.0;
    let mut largest: f64 = 0.0;
    for n in 1..=128 {
        for m in 0..n {
            let v = eigenvector_closed_form(n, m).unwrap();
            for mu_sq in [1.0, 2.5] {
                let gap = embedding_residual(mu_sq, n, m).unwrap();
                worst = worst.max((gap - mu_sq * v.components[n - 1].abs()).abs());
                largest = largest.max(gap / mu_sq);
            }
        }
    }
    verdict(
        worst <= EMBEDDING_TOL,
        format!("N <= 128: |residual - mu^2 |v_(N-1)|| <= {worst:.2e} (tol {EMBEDDING_TOL:.0e}); largest residual/mu^2 {largest:.3}"),
    )
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("spectrum formula", c1_spectrum),
        ("zeros vs eigenvalues", c2_zeros_vs_eigenvalues),
        ("eigenvectors", c3_eigenvectors),
        ("propagator", c4_propagator),
        ("Christoffel-Darboux", c5_christoffel_darboux),
        ("measure round trip", c6_favard),
        ("Stieltjes-Perron", c7_perron),
        ("vacua", c8_vacua),
        ("four-index reduction", c9_four_index),
        ("spectral triple", c10_triple),
        ("tadpole", c11_tadpole),
        ("point-spectrum gap", c12_embedding),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let v = run();
        if !v.pass {
            failures += 1;
        }
        println!(
            "criterion {:>2} {}: {} ({})",
            i + 1,
            if v.pass { "PASS" } else { "FAIL" },
            name,
            v.detail
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
