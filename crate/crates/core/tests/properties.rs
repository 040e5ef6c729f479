use jacobi_ncft::jacobi::{JacobiCoefficients, SparseVector};
use jacobi_ncft::measure::{
    gauss_rule, matrix_element, moments, perron_inversion, stieltjes_series, stieltjes_transform, SpectralMeasure,
    Weight,
};
use jacobi_ncft::ncft::{
    eom_residual, kinetic_4index, kinetic_reduced, spectrum_closed_form, vacuum_sequence, VacuumParams,
};
use jacobi_ncft::orthopoly::{chebyshev_u, chebyshev_u_recurrence, eigenvalues, RecurrencePolynomials};
use jacobi_ncft::triple::{
    commutant_witness, decompose, dirac_sqrt, hs_bound_check, strong_convergence_profile, DecaySpec,
};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

fn family(len: usize) -> impl Strategy<Value = JacobiCoefficients> {
    (
        prop::collection::vec(0.05f64..2.0, len),
        prop::collection::vec(-2.0f64..2.0, len),
    )
        .prop_map(|(a, b)| {
            let bound = a.iter().zip(&b).map(|(x, y)| x + y.abs()).fold(0.0, f64::max);
            JacobiCoefficients::tabulated(a, b, bound).unwrap()
        })
}

/// Small perturbations of `a = 1, b = 0`, whose eigenvectors stay extended over
/// the tested windows.
fn perturbed(len: usize) -> impl Strategy<Value = JacobiCoefficients> {
    (
        prop::collection::vec(0.9f64..1.1, len),
        prop::collection::vec(-0.1f64..0.1, len),
    )
        .prop_map(|(a, b)| {
            let bound = a.iter().zip(&b).map(|(x, y)| x + y.abs()).fold(0.0, f64::max);
            JacobiCoefficients::tabulated(a, b, bound).unwrap()
        })
}

fn sparse(max_index: usize) -> impl Strategy<Value = SparseVector> {
    prop::collection::btree_map(0..max_index, -3.0f64..3.0, 0..8).prop_map(|m| {
        let mut v = SparseVector::new();
        for (i, x) in m {
            v.set(i, x);
        }
        v
    })
}

fn catalan_moment(n: usize) -> f64 {
    if n % 2 == 1 {
        return 0.0;
    }
    let j = n / 2;
    let mut c = 1.0;
    for i in 0..j {
        c = c * (2 * (2 * i + 1)) as f64 / (i + 2) as f64;
    }
    c / 4f64.powi(j as i32)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn apply_is_linear(c in family(40), u in sparse(30), v in sparse(30), alpha in -2.0f64..2.0, beta in -2.0f64..2.0) {
        let lhs = c.apply(&u.combine(alpha, &v, beta)).unwrap();
        let rhs = c.apply(&u).unwrap().combine(alpha, &c.apply(&v).unwrap(), beta);
        let scale = 1.0 + u.norm() + v.norm();
        for i in 0..32 {
            prop_assert!((lhs.get(i) - rhs.get(i)).abs() <= 1e-14 * scale * c.bound() * 4.0);
        }
    }

    #[test]
    fn truncations_are_nested(c in family(40), n in 1usize..20, extra in 1usize..20) {
        let small = c.truncate(n).unwrap();
        let big = c.truncate(n + extra).unwrap();
        prop_assert_eq!(big.leading(n).unwrap(), small);
    }

    #[test]
    fn truncation_agrees_with_operator(c in family(40), n in 2usize..30, seed in sparse(28)) {
        let mut v = SparseVector::new();
        for (i, x) in seed.iter().filter(|(i, _)| *i + 2 <= n) {
            v.set(i, x);
        }
        let dense = c.truncate(n).unwrap().matvec(&v.to_dense(n).unwrap()).unwrap();
        let full = c.apply(&v).unwrap();
        for (i, x) in dense.iter().enumerate() {
            prop_assert!((x - full.get(i)).abs() <= 1e-14 * c.norm_bound() * (1.0 + v.norm()));
        }
    }

    #[test]
    fn eigenvalues_within_norm_bound(c in family(60), n in 1usize..60) {
        let m2 = c.norm_bound();
        for x in eigenvalues(&c.truncate(n).unwrap()) {
            prop_assert!(x.abs() <= m2);
        }
    }

    #[test]
    fn eigenvalues_match_dense_solver(c in family(40), n in 1usize..40) {
        let t = c.truncate(n).unwrap();
        let mut oracle: Vec<f64> = t.to_dense().symmetric_eigenvalues().iter().copied().collect();
        oracle.sort_by(f64::total_cmp);
        let ours = eigenvalues(&t);
        for (x, y) in ours.iter().zip(&oracle) {
            prop_assert!((x - y).abs() <= 1e-12 * c.norm_bound());
        }
    }

    #[test]
    fn zeros_interlace_strictly(c in perturbed(50), n in 2usize..48) {
        let ladder = RecurrencePolynomials::new(c.clone()).zero_ladder(n).unwrap();
        for pair in ladder.windows(2) {
            prop_assert!(pair[0].is_strictly_increasing());
            prop_assert!(pair[0].interlaces(&pair[1]));
        }
    }

    #[test]
    fn zeros_stay_bounded_and_match_eigenvalues(c in family(50), n in 2usize..48) {
        let ladder = RecurrencePolynomials::new(c.clone()).zero_ladder(n).unwrap();
        let slack = 1e-12 * c.norm_bound();
        for pair in ladder.windows(2) {
            let (x, y) = (&pair[0].zeros, &pair[1].zeros);
            for i in 0..x.len() {
                prop_assert!(y[i] <= x[i] + slack && x[i] <= y[i + 1] + slack);
            }
        }
        for z in &ladder[n - 1].zeros {
            prop_assert!(z.abs() <= c.norm_bound());
        }
        let eig = eigenvalues(&c.truncate(n).unwrap());
        for (z, e) in ladder[n - 1].zeros.iter().zip(&eig) {
            prop_assert!((z - e).abs() <= 1e-10);
        }
    }

    #[test]
    fn chebyshev_paths_agree(n in 0usize..64, x in -1.0f64..=1.0) {
        prop_assert!((chebyshev_u(n, x) - chebyshev_u_recurrence(n, x)).abs() <= 1e-12 * (n + 1) as f64);
    }

    #[test]
    fn christoffel_darboux_on_chebyshev(n in 0usize..=128, t in -1.0f64..1.0, z in -1.0f64..1.0) {
        let fam = RecurrencePolynomials::new(JacobiCoefficients::chebyshev_u());
        let (k, c) = fam.christoffel_darboux_residual(n, t, z).unwrap().relative();
        prop_assert!(k <= 1e-10 && c <= 1e-10);
    }

    #[test]
    fn gauss_rule_is_exact_on_monomials(k in 1usize..30) {
        let rule = gauss_rule(&JacobiCoefficients::chebyshev_u(), k).unwrap();
        let s = moments(&rule, 2 * k - 1).unwrap();
        for (n, x) in s.iter().enumerate() {
            let exact = catalan_moment(n);
            let scale = if exact == 0.0 { catalan_moment(n + 1) } else { exact };
            prop_assert!((x - exact).abs() <= 1e-13 * scale, "n = {}: {} vs {}", n, x, exact);
        }
    }

    #[test]
    fn favard_round_trip(c in perturbed(66), k in 1usize..=65) {
        let rule = gauss_rule(&c, k).unwrap();
        let measure = SpectralMeasure::from_rule(rule.clone());
        let fam = RecurrencePolynomials::new(c.clone());
        for m in 0..k {
            let b = matrix_element(&fam, &measure, &rule, m, m, Weight::T).unwrap();
            prop_assert!((b - c.b(m).unwrap()).abs() <= 1e-12);
            if m + 1 < k {
                let a = matrix_element(&fam, &measure, &rule, m, m + 1, Weight::T).unwrap();
                prop_assert!((a - c.a(m).unwrap()).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn stieltjes_series_matches_quadrature(r in 1.5f64..4.0, phi in 0.01f64..3.13) {
        let z = Complex64::from_polar(r, phi);
        let measure = SpectralMeasure::chebyshev_u();
        let rule = gauss_rule(&JacobiCoefficients::chebyshev_u(), 80).unwrap();
        let quad = stieltjes_transform(&measure, &rule, z).unwrap();
        let s = moments(&rule, 159).unwrap();
        let series = stieltjes_series(&s, z);
        let closed = -2.0 * (z - (z - 1.0).sqrt() * (z + 1.0).sqrt());
        prop_assert!((quad - series).norm() <= 1e-12);
        prop_assert!((quad - closed).norm() <= 1e-12);
    }

    #[test]
    fn kinetic_form_is_dirichlet(v in prop::collection::vec(-5.0f64..5.0, 1..80), mu_sq in 0.1f64..10.0) {
        let g = kinetic_reduced(mu_sq, v.len()).unwrap();
        let n = v.len();
        let mut direct = v[0] * v[0] + v[n - 1] * v[n - 1];
        for m in 0..n - 1 {
            direct += (v[m] - v[m + 1]).powi(2);
        }
        direct *= mu_sq;
        let form = g.quadratic_form(&v).unwrap();
        prop_assert!((form - direct).abs() <= 1e-12 * (1.0 + direct));
        prop_assert!((g.dirichlet_form(&v).unwrap() - direct).abs() <= 1e-12 * (1.0 + direct));
        prop_assert!(eigenvalues(g.matrix())[0] > 0.0);
    }

    #[test]
    fn kinetic_conserves_index(m in 0usize..12, n in 0usize..12, k in 0usize..12, l in 0usize..12, kappa in -3.0f64..-0.1) {
        let seq = vacuum_sequence(VacuumParams::new(1.0 / 3.0, kappa, 0.0).unwrap()).unwrap();
        let g = kinetic_4index(&seq, m, n, k, l).unwrap();
        if g != 0.0 {
            prop_assert_eq!(m + n, k + l);
        }
    }

    #[test]
    fn exponential_vacuum_with_alpha(omega_sq in 0.05f64..0.3, kappa in -3.0f64..-0.1, alpha in 0.0f64..2.0, m in 0usize..20) {
        let seq = vacuum_sequence(VacuumParams::new(omega_sq, kappa, alpha).unwrap()).unwrap();
        let scale = seq.u(m + 1).unwrap().max(1.0).powf(1.5) * kappa.abs().max(1.0);
        prop_assert!(eom_residual(&seq, m).unwrap() <= 1e-12 * scale);
    }

    #[test]
    fn dirac_squares_to_kinetic(n in 1usize..=128, mu_sq in 0.2f64..5.0, bits in any::<u128>()) {
        let g = kinetic_reduced(mu_sq, n).unwrap();
        let dec = decompose(&g).unwrap();
        let signs: Vec<f64> = (0..n).map(|i| if bits >> i & 1 == 1 { 1.0 } else { -1.0 }).collect();
        let d = dirac_sqrt(&dec, &signs).unwrap();
        let m = d.matrix();
        prop_assert!((m * m - g.to_dense()).norm() <= 1e-10 * mu_sq);
    }

    #[test]
    fn commutant_witness_exists(n in 2usize..40, index in 0usize..40) {
        let g = kinetic_reduced(1.0, n).unwrap();
        let dec = decompose(&g).unwrap();
        let d = jacobi_ncft::triple::dirac_positive(&dec).unwrap();
        let w = commutant_witness(&dec, &d, index % n).unwrap();
        prop_assert!(w.commutator_norm <= 1e-12);
        prop_assert!((w.scalar_distance - 0.5).abs() <= 1e-12);
    }
}

#[test]
fn hs_bounds_hold_on_random_sweep() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let g = kinetic_reduced(1.0, 32).unwrap();
    let dec = decompose(&g).unwrap();
    let d = jacobi_ncft::triple::dirac_positive(&dec).unwrap();
    let mut min_slack = f64::INFINITY;
    for _ in 0..100 {
        let a = DMatrix::from_fn(32, 32, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let z = Complex64::new(rng.gen_range(-3.0..3.0), rng.gen_range(0.05..2.0));
        min_slack = min_slack.min(hs_bound_check(&d, &a, z).unwrap().min_slack());
    }
    assert!(min_slack >= 0.0, "min slack {min_slack}");
}

#[test]
fn perron_mass_converges_first_order() {
    let u = SpectralMeasure::chebyshev_u();
    let nus = [4e-3, 2e-3, 1e-3];
    let deficits: Vec<f64> = nus
        .iter()
        .map(|&nu| 1.0 - perron_inversion(&u, -1.5, 1.5, nu, nu * 1e-3).unwrap())
        .collect();
    for w in deficits.windows(2) {
        let ratio = w[0] / w[1];
        assert!((ratio - 2.0).abs() < 0.1, "deficits {deficits:?}");
    }
}

#[test]
fn semicircle_density_matches_gauss_rule() {
    let kin = SpectralMeasure::kinetic();
    let rule = gauss_rule(&JacobiCoefficients::chebyshev_shifted(), 40).unwrap();
    for n in 0..20 {
        let by_density = kin.integrate(|t| t.powi(n), 1e-14 * 4f64.powi(n));
        let by_rule = rule.integrate(|t| t.powi(n));
        assert!(
            (by_density - by_rule).abs() <= 1e-10 * by_rule.abs().max(1.0),
            "n = {n}"
        );
    }
    let w2 = stieltjes_transform(
        &SpectralMeasure::chebyshev_u(),
        &gauss_rule(&JacobiCoefficients::chebyshev_u(), 60).unwrap(),
        Complex64::new(2.0, 0.0),
    )
    .unwrap();
    assert!((w2.re + 2.0 * (2.0 - 3f64.sqrt())).abs() < 1e-14 && w2.im == 0.0);
}

#[test]
fn strong_convergence_decays() {
    let f = DecaySpec::Geometric {
        amplitude: 1.0,
        ratio: 0.7,
    };
    let levels: Vec<usize> = (1..40).collect();
    let p = strong_convergence_profile(1.0, &f, &levels, 1e-14).unwrap();
    for w in p.windows(2) {
        assert!(w[1] <= w[0] * (1.0 + 1e-12), "{p:?}");
    }
    assert!(p[p.len() - 1] < 1e-5);
    let slow = strong_convergence_profile(
        2.0,
        &DecaySpec::Power {
            amplitude: 1.0,
            exponent: 1.5,
        },
        &[4, 16, 64, 256],
        1e-10,
    )
    .unwrap();
    assert!(slow.windows(2).all(|w| w[1] < w[0]));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn spectrum_three_routes(n in 1usize..=512, mu_sq in 0.1f64..10.0) {
        let closed = spectrum_closed_form(mu_sq, n).unwrap();
        let sturm = eigenvalues(kinetic_reduced(mu_sq, n).unwrap().matrix());
        let zeros = RecurrencePolynomials::new(JacobiCoefficients::chebyshev_u()).zeros(n).unwrap();
        let mut via_u: Vec<f64> = zeros.zeros.iter().map(|x| 2.0 * mu_sq * (1.0 - x)).collect();
        via_u.sort_by(f64::total_cmp);
        for k in 0..n {
            prop_assert!((closed[k] - sturm[k]).abs() <= 1e-10 * mu_sq);
            prop_assert!((closed[k] - via_u[k]).abs() <= 1e-10 * mu_sq);
        }
    }
}
