//! Batch front-end: parses a job, runs it and renders JSON or CSV.
//!
//! Exit codes: 0 success, 1 an invariant exceeded its limit, 2 invalid configuration.

use std::collections::BTreeMap;
use std::ffi::OsString;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::error::Error;
use crate::jacobi::JacobiCoefficients;
use crate::measure::{gauss_rule, matrix_element, perron_inversion, SpectralMeasure, Weight};
use crate::ncft::{
    eigenvector_closed_form, embedding_residual, eom_residual, kinetic13, kinetic_4index, kinetic_reduced,
    normalization, printed_normalization, propagator_closed_form, propagator_entry, propagator_identity_residual,
    spectrum_closed_form, tadpole_closed_form, tadpole_coefficient, tadpole_sigma, vacuum_sequence, PropagatorSource,
    VacuumParams, DEFAULT_PROPAGATOR_NODES,
};
use crate::orthopoly::{eigenvalues, RecurrencePolynomials};
use crate::triple::{commutant_witness, decompose, dirac_sqrt, hs_bound_check, isometry_j, ko_relations, CliffordRep};

/// Environment variable overriding the default `--tol`.
pub const TOL_ENV: &str = "JACOBI_NCFT_TOL";

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVARIANT: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

const PERRON_NU: f64 = 1e-4;
const PERRON_LIMIT: f64 = 1e-3;
const MEASURE_DEFAULT_NODES: usize = 16;

#[derive(Parser, Debug)]
#[command(
    name = "jacobi-ncft",
    version,
    about = "Spectral computations for Jacobi operators and the reduced kinetic operator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Options,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Eigenvalues of the truncated kinetic operator.
    Spectrum,
    /// Closed-form eigenvectors with residuals.
    Eigvecs,
    /// One propagator entry by quadrature.
    Propagator,
    /// Gauss rule, Favard round trip and Perron mass of a measure.
    Measure,
    /// Vacuum amplitudes and equation-of-motion residuals.
    Vacuum,
    /// One-loop tadpole coefficient.
    Tadpole,
    /// Dirac square root, real structure and Hilbert-Schmidt checks.
    TripleCheck,
    /// The full invariant suite.
    VerifyAll,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Eigvecs => "eigvecs",
            Command::Propagator => "propagator",
            Command::Measure => "measure",
            Command::Vacuum => "vacuum",
            Command::Tadpole => "tadpole",
            Command::TripleCheck => "triple-check",
            Command::VerifyAll => "verify-all",
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// `a = 1/2, b = 0` with the measure `(2/pi) sqrt(1 - x^2)`.
    Chebyshev,
    /// `a = 1, b = -2`, the operator `-G / mu^2`.
    Kinetic,
}

#[derive(Args, Debug, Clone)]
pub struct Options {
    #[arg(long = "mu-sq", global = true, default_value_t = 1.0)]
    pub mu_sq: f64,
    #[arg(long = "omega-sq", global = true, default_value_t = 1.0 / 3.0)]
    pub omega_sq: f64,
    #[arg(long, global = true, default_value_t = -1.0, allow_hyphen_values = true)]
    pub kappa: f64,
    #[arg(long, global = true, default_value_t = 0.0)]
    pub alpha: f64,
    #[arg(long = "N", global = true, default_value_t = 16)]
    pub n: usize,
    /// Quadrature nodes (Gauss nodes for `measure`, midpoint nodes for `propagator`).
    #[arg(long = "K", global = true)]
    pub nodes: Option<usize>,
    #[arg(long, global = true, env = TOL_ENV, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Json)]
    pub output: OutputFormat,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, default_value_t = 0)]
    pub m: usize,
    #[arg(long, global = true, default_value_t = 0)]
    pub l: usize,
    /// Free index of the tadpole coefficient.
    #[arg(long = "k", global = true, default_value_t = 0)]
    pub k: usize,
    #[arg(long, global = true, value_enum, default_value_t = Family::Chebyshev)]
    pub family: Family,
}

/// Result of one invocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Clone, Debug)]
struct Check {
    name: &'static str,
    residual: f64,
    limit: f64,
    reference: &'static str,
}

#[derive(Clone, Debug, Default)]
struct Report {
    params: BTreeMap<String, Value>,
    results: Value,
    columns: Vec<&'static str>,
    rows: Vec<Vec<f64>>,
    /// Optional text first column, one entry per row.
    labels: Vec<String>,
    checks: Vec<Check>,
    refs: BTreeMap<String, String>,
}

impl Report {
    fn check(&mut self, name: &'static str, residual: f64, limit: f64, reference: &'static str) {
        self.checks.push(Check {
            name,
            residual,
            limit,
            reference,
        });
        self.refs.insert(name.to_string(), reference.to_string());
    }
}

enum Failure {
    Config(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Config(e.to_string())
    }
}

/// Parses `args` (including the program name) and runs the job.
pub fn run_from<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let text = e.render().to_string();
            if code == EXIT_OK {
                Outcome {
                    code,
                    stdout: text,
                    stderr: String::new(),
                }
            } else {
                Outcome {
                    code,
                    stdout: String::new(),
                    stderr: text,
                }
            }
        }
    }
}

pub fn run(cli: &Cli) -> Outcome {
    let config_error = |msg: String| Outcome {
        code: EXIT_CONFIG,
        stdout: String::new(),
        stderr: format!("invalid configuration: {msg}\n"),
    };
    if let Err(Failure::Config(msg)) = validate(&cli.opts) {
        return config_error(msg);
    }
    let report = match build(cli.command, &cli.opts) {
        Ok(r) => r,
        Err(Failure::Config(msg)) => return config_error(msg),
    };
    let stdout = match cli.opts.output {
        OutputFormat::Json => render_json(cli.command, &report),
        OutputFormat::Csv => match render_csv(&report) {
            Ok(s) => s,
            Err(e) => return config_error(e),
        },
    };
    let mut stderr = String::new();
    for c in &report.checks {
        if !(c.residual <= c.limit) {
            stderr.push_str(&format!(
                "invariant violated: {} [{}]: residual {:e} exceeds {:e}\n",
                c.name, c.reference, c.residual, c.limit
            ));
        }
    }
    let code = if stderr.is_empty() { EXIT_OK } else { EXIT_INVARIANT };
    Outcome { code, stdout, stderr }
}

fn validate(o: &Options) -> Result<(), Failure> {
    let bad = |m: &str| Err(Failure::Config(m.to_string()));
    if !(o.tol > 0.0 && o.tol.is_finite()) {
        return bad("tol must be positive");
    }
    if o.n == 0 {
        return bad("N must be at least 1");
    }
    if !(o.mu_sq > 0.0 && o.mu_sq.is_finite()) {
        return bad("mu^2 must be positive");
    }
    if o.nodes == Some(0) {
        return bad("K must be at least 1");
    }
    Ok(())
}

fn build(command: Command, o: &Options) -> Result<Report, Failure> {
    let mut r = Report::default();
    r.params.insert("mu_sq".into(), json!(o.mu_sq));
    r.params.insert("tol".into(), json!(o.tol));
    match command {
        Command::Spectrum => spectrum(o, &mut r)?,
        Command::Eigvecs => eigvecs(o, &mut r)?,
        Command::Propagator => propagator(o, &mut r)?,
        Command::Measure => measure(o, &mut r)?,
        Command::Vacuum => vacuum(o, &mut r)?,
        Command::Tadpole => tadpole(o, &mut r)?,
        Command::TripleCheck => triple_check(o, &mut r)?,
        Command::VerifyAll => verify_all(o, &mut r)?,
    }
    Ok(r)
}

const REF_SPECTRUM: &str = "lambda_k = 2 mu^2 (1 - cos((k+1) pi / (N+1)))";
const REF_ZEROS: &str = "eigenvalues of the N x N truncation are the zeros of P_N";
const REF_EIGVEC: &str = "v_p = f U_p((2 + lambda)/2), f = sin(theta) sqrt(2/(N+1))";
const REF_EMBED: &str = "full operator on the padded eigenvector leaves mu^2 |v_{N-1}| on coordinate N";
const REF_PROPAGATOR: &str = "P_ml = (1/(pi mu^2)) int sqrt((1+x)/(1-x)) U_m U_l dx = (min(m,l)+1)/mu^2";
const REF_IDENTITY: &str = "sum_l G_ml P_lr = delta_mr for rows m <= N-2";
const REF_FAVARD: &str = "a_n = int t P_n P_{n+1} dmu, b_n = int t P_n^2 dmu";
const REF_ORTHO: &str = "int P_m P_l dmu = delta_ml";
const REF_MASS: &str = "pi^-1 int Im w(t + i nu) dt -> mu([a, b])";
const REF_VACUUM: &str = "a_m ((3 Omega^2 - 1)(a_{m+1}^2 + a_{m-1}^2) + 2 (1 + Omega^2) a_m^2 + 2 kappa) = 0";
const REF_KINETIC: &str =
    "G_{mn;kl} at Omega^2 = 1/3 equals -kappa (2 d_ml d_nk - d_{k,n+1} d_{m,l+1} - d_{n,k+1} d_{l,m+1})";
const REF_TADPOLE: &str =
    "c_N(k) = sum_{l<N} (2 P_ll - P_{l,l+1}) + P_kk + P_{k+1,k+1} - P_{k,k+1} = (N(N+1)/2 + k + 2)/mu^2";
const REF_DIRAC: &str = "D = sum sqrt(lambda) |v><v|, D^2 = G^N";
const REF_KO: &str = "J^2 = -1, JD = DJ, J Gamma = -Gamma J, Gamma^2 = 1, D Gamma = -Gamma D";
const REF_WITNESS: &str = "|v><v| commutes with D and is at distance 1/2 from the scalars";
const REF_HS: &str = "||[D,a]|| <= ||[D,a]||_2 <= 2 ||D|| ||a||_2, ||a R||_2 <= ||a||_2 ||R||";
const REF_ISOMETRY: &str = "J = sum u |v><v|, J^2 = 1, DJ = JD";
const REF_CD: &str = "(t - z) sum P_k(t) P_k(z) = a_n (P_{n+1}(t) P_n(z) - P_n(t) P_{n+1}(z)) and its confluent form";

fn spectrum(o: &Options, r: &mut Report) -> Result<(), Failure> {
    r.params.insert("N".into(), json!(o.n));
    let g = kinetic_reduced(o.mu_sq, o.n)?;
    let eig = eigenvalues(g.matrix());
    let closed = spectrum_closed_form(o.mu_sq, o.n)?;
    let gap = eig.iter().zip(&closed).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / o.mu_sq;
    r.results = json!(eig);
    r.columns = vec!["k", "eigenvalue", "closed_form"];
    r.rows = eig
        .iter()
        .zip(&closed)
        .enumerate()
        .map(|(k, (a, b))| vec![k as f64, *a, *b])
        .collect();
    r.check("spectrum_closed_form", gap, o.tol, REF_SPECTRUM);
    Ok(())
}

fn eigvecs(o: &Options, r: &mut Report) -> Result<(), Failure> {
    r.params.insert("N".into(), json!(o.n));
    let n = o.n;
    let vs: Vec<_> = (0..n)
        .map(|m| eigenvector_closed_form(n, m))
        .collect::<Result<_, _>>()?;
    let mut worst_res: f64 = 0.0;
    let mut worst_embed: f64 = 0.0;
    let mut items = Vec::with_capacity(n);
    for v in &vs {
        worst_res = worst_res.max(v.residual(o.mu_sq)? / o.mu_sq);
        let embed = embedding_residual(o.mu_sq, n, v.m)?;
        worst_embed = worst_embed.max((embed - o.mu_sq * v.components[n - 1].abs()).abs() / o.mu_sq);
        items.push(json!({
            "m": v.m,
            "eigenvalue": v.g_eigenvalue(o.mu_sq),
            "normalization": normalization(n, v.m),
            "printed_normalization": printed_normalization(n, v.m),
            "embedding_residual": embed,
            "components": v.components,
        }));
        for (p, x) in v.components.iter().enumerate() {
            r.rows.push(vec![v.m as f64, p as f64, *x]);
        }
    }
    let mut gram: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let dot: f64 = vs[i].components.iter().zip(&vs[j].components).map(|(a, b)| a * b).sum();
            let target = if i == j { 1.0 } else { 0.0 };
            gram += (dot - target).powi(2);
        }
    }
    r.results = json!(items);
    r.columns = vec!["m", "p", "component"];
    r.check("eigen_residual", worst_res, o.tol, REF_EIGVEC);
    r.check("gram_deviation", gram.sqrt(), o.tol, REF_EIGVEC);
    r.check("embedding_residual_formula", worst_embed, o.tol, REF_EMBED);
    Ok(())
}

fn propagator(o: &Options, r: &mut Report) -> Result<(), Failure> {
    let nodes = o.nodes.unwrap_or(DEFAULT_PROPAGATOR_NODES);
    r.params.insert("m".into(), json!(o.m));
    r.params.insert("l".into(), json!(o.l));
    r.params.insert("K".into(), json!(nodes));
    let value = propagator_entry(o.mu_sq, o.m, o.l, nodes)?;
    let closed = propagator_closed_form(o.mu_sq, o.m, o.l);
    r.results = json!({ "value": value, "closed_form": closed });
    r.columns = vec!["m", "l", "value", "closed_form"];
    r.rows = vec![vec![o.m as f64, o.l as f64, value, closed]];
    r.check(
        "propagator_closed_form",
        (value - closed).abs() / closed,
        o.tol,
        REF_PROPAGATOR,
    );
    Ok(())
}

fn family_parts(f: Family) -> (JacobiCoefficients, SpectralMeasure, &'static str) {
    match f {
        Family::Chebyshev => (
            JacobiCoefficients::chebyshev_u(),
            SpectralMeasure::chebyshev_u(),
            "chebyshev",
        ),
        Family::Kinetic => (
            JacobiCoefficients::chebyshev_shifted(),
            SpectralMeasure::kinetic(),
            "kinetic",
        ),
    }
}

fn favard_residuals(coeffs: &JacobiCoefficients, measure: &SpectralMeasure, k: usize) -> Result<(f64, f64), Failure> {
    let rule = gauss_rule(coeffs, k)?;
    let fam = RecurrencePolynomials::new(coeffs.clone());
    let t = coeffs.truncate(k)?;
    let mut favard: f64 = 0.0;
    let mut ortho: f64 = 0.0;
    for m in 0..k {
        for l in 0..k {
            let jt = matrix_element(&fam, measure, &rule, m, l, Weight::T)?;
            favard = favard.max((jt - t.entry(m, l)).abs());
            if m + l < 2 * k {
                let id = matrix_element(&fam, measure, &rule, m, l, Weight::Identity)?;
                ortho = ortho.max((id - if m == l { 1.0 } else { 0.0 }).abs());
            }
        }
    }
    Ok((favard, ortho))
}

fn measure(o: &Options, r: &mut Report) -> Result<(), Failure> {
    let k = o.nodes.unwrap_or(MEASURE_DEFAULT_NODES);
    let (coeffs, meas, label) = family_parts(o.family);
    r.params.insert("family".into(), json!(label));
    r.params.insert("K".into(), json!(k));
    let rule = gauss_rule(&coeffs, k)?;
    let (favard, ortho) = favard_residuals(&coeffs, &meas, k)?;
    let (lo, hi) = meas.support();
    let mass = perron_inversion(&meas, lo - 0.5, hi + 0.5, PERRON_NU, PERRON_NU)?;
    r.results = json!({ "nodes": rule.nodes(), "weights": rule.weights(), "perron_total_mass": mass });
    r.columns = vec!["i", "node", "weight"];
    r.rows = rule
        .nodes()
        .iter()
        .zip(rule.weights())
        .enumerate()
        .map(|(i, (x, w))| vec![i as f64, *x, *w])
        .collect();
    r.check(
        "weight_sum",
        (rule.total_weight() - 1.0).abs(),
        o.tol,
        "weights of the Gauss rule sum to the total mass 1",
    );
    r.check("favard_roundtrip", favard, o.tol, REF_FAVARD);
    r.check("orthonormality", ortho, o.tol, REF_ORTHO);
    r.check(
        "perron_total_mass",
        (mass - 1.0).abs(),
        o.tol.max(PERRON_LIMIT),
        REF_MASS,
    );
    Ok(())
}

fn vacuum(o: &Options, r: &mut Report) -> Result<(), Failure> {
    r.params.insert("omega_sq".into(), json!(o.omega_sq));
    r.params.insert("kappa".into(), json!(o.kappa));
    r.params.insert("alpha".into(), json!(o.alpha));
    r.params.insert("N".into(), json!(o.n));
    let seq = vacuum_sequence(VacuumParams::new(o.omega_sq, o.kappa, o.alpha)?)?;
    let scale = if o.kappa != 0.0 { o.kappa.abs() } else { 1.0 };
    let mut worst: f64 = 0.0;
    for m in 0..o.n {
        let u = seq.u(m)?;
        let e = eom_residual(&seq, m)?;
        worst = worst.max(e / scale);
        r.rows.push(vec![m as f64, u, seq.a(m)?, e]);
    }
    r.results = json!({
        "regime": format!("{:?}", seq.regime()).to_lowercase(),
        "ratio": seq.ratio(),
        "u": r.rows.iter().map(|row| row[1]).collect::<Vec<_>>(),
    });
    r.columns = vec!["m", "u", "a", "eom_residual"];
    r.check("eom_residual", worst, o.tol, REF_VACUUM);
    Ok(())
}

fn tadpole(o: &Options, r: &mut Report) -> Result<(), Failure> {
    r.params.insert("k".into(), json!(o.k));
    r.params.insert("N".into(), json!(o.n));
    let c = tadpole_coefficient(o.mu_sq, o.k, o.n, PropagatorSource::ClosedForm)?;
    let closed = tadpole_closed_form(o.mu_sq, o.k, o.n);
    let sigma = tadpole_sigma(o.mu_sq);
    r.results = json!({ "coefficient": c, "closed_form": closed, "sigma": { "re": sigma.re, "im": sigma.im } });
    r.columns = vec!["N", "k", "coefficient", "closed_form"];
    r.rows = vec![vec![o.n as f64, o.k as f64, c, closed]];
    r.check("tadpole_closed_form", (c - closed).abs() / closed, o.tol, REF_TADPOLE);
    Ok(())
}

fn random_signs(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect()
}

fn triple_check(o: &Options, r: &mut Report) -> Result<(), Failure> {
    r.params.insert("N".into(), json!(o.n));
    r.params.insert("seed".into(), json!(o.seed));
    let mut rng = ChaCha8Rng::seed_from_u64(o.seed);
    let n = o.n;
    let g = kinetic_reduced(o.mu_sq, n)?;
    let dec = decompose(&g)?;
    let signs = random_signs(&mut rng, n);
    let d = dirac_sqrt(&dec, &signs)?;
    let scale = o.mu_sq.max(1.0);
    let d2 = d.square_residual(&g) / scale;
    let ko = ko_relations(d.matrix(), &CliffordRep::standard());
    let u = random_signs(&mut rng, n);
    let iso = isometry_j(&dec, &d, &u)?;
    let mut min_slack = f64::INFINITY;
    for _ in 0..20 {
        let a = nalgebra::DMatrix::from_fn(n, n, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(0.1..1.0));
        min_slack = min_slack.min(hs_bound_check(&d, &a, z)?.min_slack());
    }
    let mut results = json!({
        "dirac_square_residual": d2,
        "ko": { "j_squared": ko.j_squared, "j_dirac": ko.j_dirac, "j_grading": ko.j_grading,
                "grading_squared": ko.grading_squared, "dirac_grading": ko.dirac_grading },
        "isometry": { "involution": iso.involution_residual, "commutator": iso.commutator_residual },
        "hs_min_slack": min_slack,
    });
    r.check("dirac_square", d2, o.tol, REF_DIRAC);
    r.check("ko_relations", ko.max(), o.tol, REF_KO);
    r.check(
        "isometry",
        iso.involution_residual.max(iso.commutator_residual / scale),
        o.tol,
        REF_ISOMETRY,
    );
    r.check("hs_bounds", (-min_slack).max(0.0), o.tol, REF_HS);
    if n >= 2 {
        let w = commutant_witness(&dec, &d, 0)?;
        results["witness"] = json!({ "commutator_norm": w.commutator_norm, "scalar_distance": w.scalar_distance });
        r.check("commutant_witness", w.commutator_norm / scale, o.tol, REF_WITNESS);
        r.check(
            "witness_non_scalar",
            (0.5 - w.scalar_distance).max(0.0),
            o.tol,
            REF_WITNESS,
        );
    }
    r.columns = vec!["i", "sign", "branch"];
    r.rows = d
        .branches()
        .iter()
        .zip(&signs)
        .enumerate()
        .map(|(i, (b, s))| vec![i as f64, *s, *b])
        .collect();
    r.results = results;
    Ok(())
}

fn verify_all(o: &Options, r: &mut Report) -> Result<(), Failure> {
    r.params.insert("N".into(), json!(o.n));
    r.params.insert("seed".into(), json!(o.seed));
    let n = o.n;
    let mut rng = ChaCha8Rng::seed_from_u64(o.seed);

    let mut sub = Report::default();
    spectrum(o, &mut sub)?;
    eigvecs(o, &mut sub)?;

    let fam = RecurrencePolynomials::new(JacobiCoefficients::chebyshev_shifted());
    let zeros = fam.zeros(n)?;
    let eig = eigenvalues(&JacobiCoefficients::chebyshev_shifted().truncate(n)?);
    let gap = zeros
        .zeros
        .iter()
        .zip(&eig)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    sub.check("zeros_vs_eigenvalues", gap, o.tol, REF_ZEROS);

    let cheb = RecurrencePolynomials::new(JacobiCoefficients::chebyshev_u());
    let mut cd: f64 = 0.0;
    for _ in 0..20 {
        let deg = rng.gen_range(0..=n.min(128));
        let t = rng.gen_range(-1.0..1.0);
        let z = rng.gen_range(-1.0..1.0);
        let (a, b) = cheb.christoffel_darboux_residual(deg, t, z)?.relative();
        cd = cd.max(a).max(b);
    }
    sub.check("christoffel_darboux", cd, o.tol, REF_CD);

    let k = n.min(64);
    let (favard, ortho) = favard_residuals(&JacobiCoefficients::chebyshev_shifted(), &SpectralMeasure::kinetic(), k)?;
    sub.check("favard_roundtrip", favard, o.tol, REF_FAVARD);
    sub.check("orthonormality", ortho, o.tol, REF_ORTHO);

    let size = n.clamp(3, 64);
    let closed = propagator_identity_residual(o.mu_sq, size, PropagatorSource::ClosedForm)? * o.mu_sq;
    sub.check("propagator_identity_closed_form", closed, o.tol, REF_IDENTITY);
    let nodes = (2 * size).next_power_of_two();
    let quad = propagator_identity_residual(o.mu_sq, size, PropagatorSource::Quadrature { nodes })? * o.mu_sq;
    sub.check("propagator_identity_quadrature", quad, o.tol, REF_IDENTITY);

    let mut vac: f64 = 0.0;
    for (w, kappa) in [(0.1, -1.0), (1.0 / 3.0, -1.0), (0.6, -1.0), (1.0, -1.0)] {
        let seq = vacuum_sequence(VacuumParams::new(w, kappa, 0.0)?)?;
        for m in 0..=n.min(100) {
            vac = vac.max(eom_residual(&seq, m)? / kappa.abs());
        }
    }
    sub.check("vacuum_eom", vac, o.tol, REF_VACUUM);

    let seq = vacuum_sequence(VacuumParams::new(1.0 / 3.0, -o.mu_sq, 0.0)?)?;
    let mut kin: f64 = 0.0;
    for _ in 0..1000 {
        let idx: Vec<usize> = (0..4).map(|_| rng.gen_range(0..8)).collect();
        let g4 = kinetic_4index(&seq, idx[0], idx[1], idx[2], idx[3])?;
        let g13 = kinetic13(-o.mu_sq, idx[0] as i64, idx[1] as i64, idx[2] as i64, idx[3] as i64);
        kin = kin.max((g4 - g13).abs() / o.mu_sq);
    }
    sub.check("kinetic_reduction", kin, o.tol, REF_KINETIC);

    let cut = n.max(2);
    let tad = tadpole_coefficient(o.mu_sq, 0, cut, PropagatorSource::ClosedForm)?;
    let tad_closed = tadpole_closed_form(o.mu_sq, 0, cut);
    sub.check(
        "tadpole_closed_form",
        (tad - tad_closed).abs() / tad_closed,
        o.tol,
        REF_TADPOLE,
    );

    let mut small = o.clone();
    small.n = n.clamp(2, 32);
    triple_check(&small, &mut sub)?;

    let mass = perron_inversion(&SpectralMeasure::chebyshev_u(), -1.5, 1.5, PERRON_NU, PERRON_NU)?;
    sub.check(
        "perron_total_mass",
        (mass - 1.0).abs(),
        o.tol.max(PERRON_LIMIT),
        REF_MASS,
    );

    let mut results = serde_json::Map::new();
    for c in &sub.checks {
        results.insert(
            c.name.to_string(),
            json!({ "residual": c.residual, "limit": c.limit, "passed": c.residual <= c.limit }),
        );
    }
    r.results = Value::Object(results);
    r.columns = vec!["check", "residual", "limit"];
    r.rows = sub.checks.iter().map(|c| vec![c.residual, c.limit]).collect();
    r.labels = sub.checks.iter().map(|c| c.name.to_string()).collect();
    r.checks = sub.checks;
    r.refs = sub.refs;
    Ok(())
}

fn render_json(command: Command, r: &Report) -> String {
    let residuals: BTreeMap<&str, f64> = r.checks.iter().map(|c| (c.name, c.residual)).collect();
    let doc = json!({
        "command": command.name(),
        "params": r.params,
        "results": r.results,
        "residuals": residuals,
        "paper_refs": r.refs,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("json values serialize");
    s.push('\n');
    s
}

fn cell(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x:?}")
    }
}

fn render_csv(r: &Report) -> Result<String, String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&r.columns).map_err(|e| e.to_string())?;
    for (i, row) in r.rows.iter().enumerate() {
        let label = r.labels.get(i).cloned();
        w.write_record(label.into_iter().chain(row.iter().map(|&x| cell(x))))
            .map_err(|e| e.to_string())?;
    }
    let bytes = w.into_inner().map_err(|e| e.to_string())?;
    String::from_utf8(bytes).map_err(|e| e.to_string())
}
