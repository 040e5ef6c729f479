//! Symmetric vacua, the kinetic operator and its tridiagonal reduction, the
//! eigensystem and propagator of the reduced operator, the cubic vertex and the
//! one-loop tadpole coefficient.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::jacobi::TridiagonalTruncation;
use crate::orthopoly::chebyshev_u;
use crate::util::log_log_slope;

/// `Omega^2` of the uniform vacuum and of the reduced operator.
pub const UNIFORM_OMEGA_SQ: f64 = 1.0 / 3.0;
/// Coefficient of the quartic interaction, `4 Omega^2` at `Omega^2 = 1/3`.
pub const QUARTIC_COUPLING: f64 = 4.0 / 3.0;
/// Default node count of the propagator quadrature.
pub const DEFAULT_PROPAGATOR_NODES: usize = 1 << 16;
/// Relative change between doublings accepted as converged.
pub const PROPAGATOR_REL_TOL: f64 = 1e-9;

const PROPAGATOR_MAX_NODES: usize = 1 << 22;
const OMEGA_SQ_SLACK: f64 = 4.0 * f64::EPSILON;

/// Which closed form describes the vacuum.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    /// `0 < Omega^2 < 1/3`: `u_m = alpha (r^m - r^-m) - kappa/(4 Omega^2) (1 - r^-m)`, `r > 1`.
    Exponential,
    /// `Omega^2 = 1/3`, `kappa < 0`: `a_m = sqrt(-3 kappa) / 2`.
    Uniform,
    /// `1/3 < Omega^2 < 1`, `kappa <= 0`: `u_m = -kappa/(4 Omega^2) (1 - r^-m)`, `r <= -1`.
    Alternating,
    /// `Omega^2 = 1`, `kappa <= 0`: `u_m = -kappa/4 (1 - (-1)^m)`.
    Critical,
}

/// Parameters of a rotationally symmetric vacuum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VacuumParams {
    pub omega_sq: f64,
    pub kappa: f64,
    pub alpha: f64,
}

impl VacuumParams {
    pub fn new(omega_sq: f64, kappa: f64, alpha: f64) -> Result<Self> {
        let p = Self { omega_sq, kappa, alpha };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.omega_sq.is_finite() && self.kappa.is_finite() && self.alpha.is_finite()) {
            return bad("vacuum parameters must be finite".into());
        }
        if !(self.omega_sq > 0.0 && self.omega_sq <= 1.0 + OMEGA_SQ_SLACK) {
            return bad(format!("Omega^2 must lie in (0, 1], got {}", self.omega_sq));
        }
        if self.alpha < 0.0 {
            return bad(format!("alpha must be nonnegative, got {}", self.alpha));
        }
        match self.regime() {
            Regime::Uniform if !(self.kappa < 0.0) => bad(format!("Omega^2 = 1/3 needs kappa < 0, got {}", self.kappa)),
            Regime::Alternating | Regime::Critical if self.kappa > 0.0 => {
                bad(format!("Omega^2 > 1/3 needs kappa <= 0, got {}", self.kappa))
            }
            _ => Ok(()),
        }
    }

    pub fn regime(&self) -> Regime {
        if (self.omega_sq - UNIFORM_OMEGA_SQ).abs() <= OMEGA_SQ_SLACK {
            Regime::Uniform
        } else if (self.omega_sq - 1.0).abs() <= OMEGA_SQ_SLACK {
            Regime::Critical
        } else if self.omega_sq < UNIFORM_OMEGA_SQ {
            Regime::Exponential
        } else {
            Regime::Alternating
        }
    }

    /// `r = (1 + Omega^2 + sqrt(8 Omega^2 (1 - Omega^2))) / (1 - 3 Omega^2)`; `None` at `Omega^2 = 1/3`.
    pub fn ratio(&self) -> Option<f64> {
        match self.regime() {
            Regime::Uniform => None,
            Regime::Critical => Some(-1.0),
            _ => {
                let w = self.omega_sq;
                Some((1.0 + w + (8.0 * w * (1.0 - w)).sqrt()) / (1.0 - 3.0 * w))
            }
        }
    }
}

/// The amplitudes `u_m = a_m^2` of a vacuum, evaluated on demand.
#[derive(Clone, Debug, PartialEq)]
pub struct VacuumSequence {
    params: VacuumParams,
    regime: Regime,
    ratio: Option<f64>,
}

/// Builds the vacuum for the regime selected by `Omega^2`.
pub fn vacuum_sequence(params: VacuumParams) -> Result<VacuumSequence> {
    params.validate()?;
    Ok(VacuumSequence {
        params,
        regime: params.regime(),
        ratio: params.ratio(),
    })
}

impl VacuumSequence {
    pub fn params(&self) -> &VacuumParams {
        &self.params
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn ratio(&self) -> Option<f64> {
        self.ratio
    }

    /// `u_m`, failing when it is negative or overflows.
    pub fn u(&self, m: usize) -> Result<f64> {
        let VacuumParams { omega_sq, kappa, alpha } = self.params;
        let value = match self.regime {
            Regime::Uniform => 0.25 * (-3.0 * kappa),
            Regime::Critical => {
                let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
                -0.25 * kappa * (1.0 - sign)
            }
            Regime::Alternating | Regime::Exponential => {
                let r = self.ratio.expect("ratio exists off the uniform point");
                let inv = r.powi(-(m as i32));
                let mut u = -kappa / (4.0 * omega_sq) * (1.0 - inv);
                if self.regime == Regime::Exponential && alpha != 0.0 {
                    u += alpha * (r.powi(m as i32) - inv);
                }
                u
            }
        };
        if !value.is_finite() {
            return Err(Error::InvalidParameter(format!("vacuum amplitude u_{m} overflows")));
        }
        if value < 0.0 {
            return Err(Error::NegativeAmplitude { m, value });
        }
        Ok(value)
    }

    /// `a_m = sqrt(u_m)`.
    pub fn a(&self, m: usize) -> Result<f64> {
        if self.regime == Regime::Uniform {
            return Ok(0.5 * (-3.0 * self.params.kappa).sqrt());
        }
        self.u(m).map(f64::sqrt)
    }

    /// `a_i` including the index `-1`: the uniform vacuum continues translation
    /// invariantly, every other regime has `a_{-1} = 0`.
    pub fn a_extended(&self, i: i64) -> Result<f64> {
        if i >= 0 {
            self.a(i as usize)
        } else if i == -1 && self.regime == Regime::Uniform {
            self.a(0)
        } else {
            Ok(0.0)
        }
    }
}

/// `|a_m ((3 Omega^2 - 1)(a_{m+1}^2 + a_{m-1}^2) + 2 (1 + Omega^2) a_m^2 + 2 kappa)|`
/// with `a_{-1} = 0`.
pub fn eom_residual(seq: &VacuumSequence, m: usize) -> Result<f64> {
    let VacuumParams { omega_sq, kappa, .. } = seq.params;
    let um = seq.u(m)?;
    let up = seq.u(m + 1)?;
    let down = if m > 0 { seq.u(m - 1)? } else { 0.0 };
    let am = if seq.regime == Regime::Uniform {
        seq.a(m)?
    } else {
        um.sqrt()
    };
    let bracket = (3.0 * omega_sq - 1.0) * (up + down) + 2.0 * (1.0 + omega_sq) * um + 2.0 * kappa;
    Ok((am * bracket).abs())
}

fn delta<T: Zero + One>(cond: bool) -> T {
    if cond {
        T::one()
    } else {
        T::zero()
    }
}

/// `G_{mn;kl}` assembled from its three groups of terms, over any number type.
/// `pair(i, j)` supplies `a_i a_j`, with `i` or `j` possibly `-1`.
pub fn kinetic_4index_with<T, P>(omega_sq: T, kappa: T, pair: P, m: i64, n: i64, k: i64, l: i64) -> T
where
    T: num_traits::Num + Copy,
    P: Fn(i64, i64) -> T,
{
    let one = T::one();
    let two = one + one;
    let three = two + one;
    let five = three + two;
    let diag: T = delta::<T>(m == l) * delta::<T>(n == k);
    let first = (one + five * omega_sq) * diag * (pair(n, n + 1) + pair(n, n - 1));
    let second = (three * omega_sq - one)
        * (delta::<T>(m == l) * delta::<T>(n + 1 == k - 1) * pair(n, n + 1)
            + delta::<T>(m == l) * delta::<T>(n - 1 == k + 1) * pair(n, n - 1)
            - two * delta::<T>(m == l + 1) * delta::<T>(k + 1 == n) * pair(n, l));
    let third = (one + omega_sq)
        * (delta::<T>(k == n + 1) * delta::<T>(m == l + 1) * pair(n, l)
            + delta::<T>(n == k + 1) * delta::<T>(l == m + 1) * pair(n, l));
    first - second - third + two * kappa * diag
}

/// `G_{mn;kl}` on a vacuum.
pub fn kinetic_4index(seq: &VacuumSequence, m: usize, n: usize, k: usize, l: usize) -> Result<f64> {
    let (m, n, k, l) = (m as i64, n as i64, k as i64, l as i64);
    let needed = [n - 1, n, n + 1, l];
    let mut amp = std::collections::BTreeMap::new();
    for i in needed {
        amp.insert(i, seq.a_extended(i)?);
    }
    let pair = |i: i64, j: i64| amp[&i] * amp[&j];
    Ok(kinetic_4index_with(
        seq.params.omega_sq,
        seq.params.kappa,
        pair,
        m,
        n,
        k,
        l,
    ))
}

/// `-kappa (2 delta_ml delta_nk - delta_{k,n+1} delta_{m,l+1} - delta_{n,k+1} delta_{l,m+1})`.
pub fn kinetic13<T>(kappa: T, m: i64, n: i64, k: i64, l: i64) -> T
where
    T: num_traits::Num + Copy + std::ops::Neg<Output = T>,
{
    let two = T::one() + T::one();
    -kappa
        * (two * delta::<T>(m == l) * delta::<T>(n == k)
            - delta::<T>(k == n + 1) * delta::<T>(m == l + 1)
            - delta::<T>(n == k + 1) * delta::<T>(l == m + 1))
}

/// `G_{mn;kl}` on the uniform vacuum in exact rational arithmetic, with
/// `Omega^2 = 1/3`, `kappa = -mu^2` and `a_i a_j = 3 mu^2 / 4`.
pub fn kinetic_uniform_exact(mu_sq: Ratio<i64>, m: i64, n: i64, k: i64, l: i64) -> Ratio<i64> {
    let third = Ratio::new(1, 3);
    let amp = Ratio::new(3, 4) * mu_sq;
    kinetic_4index_with(third, -mu_sq, |_, _| amp, m, n, k, l)
}

/// The reduced operator `G = mu^2 (2 delta_ml - delta_{m,l+1} - delta_{l,m+1})`, truncated.
#[derive(Clone, Debug, PartialEq)]
pub struct KineticReduced {
    mu_sq: f64,
    matrix: TridiagonalTruncation,
}

pub fn kinetic_reduced(mu_sq: f64, n: usize) -> Result<KineticReduced> {
    check_mu_sq(mu_sq)?;
    if n == 0 {
        return Err(Error::SizeTooSmall { min: 1, got: 0 });
    }
    let matrix = TridiagonalTruncation::new(vec![2.0 * mu_sq; n], vec![-mu_sq; n - 1])?;
    Ok(KineticReduced { mu_sq, matrix })
}

fn check_mu_sq(mu_sq: f64) -> Result<()> {
    if mu_sq > 0.0 && mu_sq.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("mu^2 must be positive, got {mu_sq}")))
    }
}

impl KineticReduced {
    pub fn mu_sq(&self) -> f64 {
        self.mu_sq
    }

    pub fn size(&self) -> usize {
        self.matrix.size()
    }

    pub fn matrix(&self) -> &TridiagonalTruncation {
        &self.matrix
    }

    /// `J = -G / mu^2`, the truncation of the Jacobi operator `a = 1, b = -2`.
    pub fn to_jacobi(&self) -> TridiagonalTruncation {
        self.matrix.scaled(-1.0 / self.mu_sq)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        self.matrix.to_dense()
    }

    /// `<v, G v>`.
    pub fn quadratic_form(&self, v: &[f64]) -> Result<f64> {
        let gv = self.matrix.matvec(v)?;
        Ok(v.iter().zip(&gv).map(|(x, y)| x * y).sum())
    }

    /// `mu^2 (v_0^2 + sum_{m<N-1} (v_m - v_{m+1})^2 + v_{N-1}^2)`.
    pub fn dirichlet_form(&self, v: &[f64]) -> Result<f64> {
        let n = self.size();
        if v.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: v.len(),
            });
        }
        let inner: f64 = v.windows(2).map(|w| (w[0] - w[1]).powi(2)).sum();
        Ok(self.mu_sq * (v[0] * v[0] + inner + v[n - 1] * v[n - 1]))
    }
}

fn angle(n: usize, k: usize) -> f64 {
    (k + 1) as f64 * PI / (n + 1) as f64
}

/// `2 mu^2 (1 - cos((k+1) pi / (N+1)))`, ascending in `k`.
pub fn spectrum_closed_form(mu_sq: f64, n: usize) -> Result<Vec<f64>> {
    check_mu_sq(mu_sq)?;
    if n == 0 {
        return Err(Error::SizeTooSmall { min: 1, got: 0 });
    }
    Ok((0..n).map(|k| 2.0 * mu_sq * (1.0 - angle(n, k).cos())).collect())
}

/// A unit eigenvector of the truncated operator in closed form.
#[derive(Clone, Debug, PartialEq)]
pub struct EigvecClosedForm {
    pub n: usize,
    pub m: usize,
    /// Eigenvalue of `J = -G / mu^2`: `2 (cos theta - 1)`.
    pub lambda: f64,
    pub components: Vec<f64>,
}

impl EigvecClosedForm {
    /// The matching eigenvalue of `G`, `-mu^2 lambda`.
    pub fn g_eigenvalue(&self, mu_sq: f64) -> f64 {
        -mu_sq * self.lambda
    }

    /// `||G v - lambda_G v||` on the `N x N` truncation.
    pub fn residual(&self, mu_sq: f64) -> Result<f64> {
        let g = kinetic_reduced(mu_sq, self.n)?;
        let gv = g.matrix.matvec(&self.components)?;
        let lam = self.g_eigenvalue(mu_sq);
        Ok(gv
            .iter()
            .zip(&self.components)
            .map(|(x, v)| (x - lam * v).powi(2))
            .sum::<f64>()
            .sqrt())
    }
}

/// Unit normalization `sin theta sqrt(2 / (N+1))`, `theta = (m+1) pi / (N+1)`.
pub fn normalization(n: usize, m: usize) -> f64 {
    let th = angle(n, m);
    th.sin() * (2.0 / (n + 1) as f64).sqrt()
}

/// The normalization as printed in the source derivation,
/// `((-1)^m (N+1) sin(N theta) / sin^3 theta)^(-1/2)`; it equals
/// `sin theta / sqrt(N+1)`, short of unit norm by `sqrt 2`.
pub fn printed_normalization(n: usize, m: usize) -> f64 {
    let th = angle(n, m);
    let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
    let base = sign * (n + 1) as f64 * ((n as f64) * th).sin() / th.sin().powi(3);
    base.powf(-0.5)
}

/// `v_p = f U_p((2 + lambda)/2)`, `p < N`, with the unit normalization `f`.
pub fn eigenvector_closed_form(n: usize, m: usize) -> Result<EigvecClosedForm> {
    if m >= n {
        return Err(Error::IndexOutOfRange { index: m, size: n });
    }
    let lambda = 2.0 * (angle(n, m).cos() - 1.0);
    let x = (2.0 + lambda) / 2.0;
    let f = normalization(n, m);
    let components = (0..n).map(|p| f * chebyshev_u(p, x)).collect();
    Ok(EigvecClosedForm {
        n,
        m,
        lambda,
        components,
    })
}

/// Residual of the semi-infinite operator on the zero-padded truncated eigenvector,
/// `||G v - lambda v||` over coordinates `0..=N`; analytically `mu^2 |v_{N-1}|`.
pub fn embedding_residual(mu_sq: f64, n: usize, m: usize) -> Result<f64> {
    let v = eigenvector_closed_form(n, m)?;
    let g = kinetic_reduced(mu_sq, n + 1)?;
    let mut padded = v.components.clone();
    padded.push(0.0);
    let gv = g.matrix.matvec(&padded)?;
    let lam = v.g_eigenvalue(mu_sq);
    Ok(gv
        .iter()
        .zip(&padded)
        .map(|(x, p)| (x - lam * p).powi(2))
        .sum::<f64>()
        .sqrt())
}

/// `(min(m, l) + 1) / mu^2`.
pub fn propagator_closed_form(mu_sq: f64, m: usize, l: usize) -> f64 {
    (m.min(l) + 1) as f64 / mu_sq
}

/// Smallest node count for which the midpoint rule is exact on entry `(m, l)`.
pub fn propagator_min_nodes(m: usize, l: usize) -> usize {
    (m + l).div_ceil(2) + 1
}

/// One midpoint-rule evaluation with `nodes` points of
/// `(1 / (pi mu^2)) int_0^pi sin((m+1)t) sin((l+1)t) / (2 sin^2(t/2)) dt`.
pub fn propagator_quadrature(mu_sq: f64, m: usize, l: usize, nodes: usize) -> Result<f64> {
    check_mu_sq(mu_sq)?;
    check_nodes(m, l, nodes)?;
    let h = PI / nodes as f64;
    let sum: f64 = (0..nodes)
        .map(|j| {
            let th = (j as f64 + 0.5) * h;
            let s = (0.5 * th).sin();
            (((m + 1) as f64) * th).sin() * (((l + 1) as f64) * th).sin() / (2.0 * s * s)
        })
        .sum();
    Ok(sum * h / (PI * mu_sq))
}

fn check_nodes(m: usize, l: usize, nodes: usize) -> Result<()> {
    let min = propagator_min_nodes(m, l);
    if nodes < min {
        Err(Error::InvalidParameter(format!(
            "{nodes} nodes cannot resolve propagator entry ({m}, {l}); need {min}"
        )))
    } else {
        Ok(())
    }
}

/// Propagator entry by quadrature, doubling the node count from `nodes` until
/// successive values agree to `PROPAGATOR_REL_TOL`.
pub fn propagator_entry(mu_sq: f64, m: usize, l: usize, nodes: usize) -> Result<f64> {
    let mut k = nodes;
    let mut prev = propagator_quadrature(mu_sq, m, l, k)?;
    loop {
        k *= 2;
        let next = propagator_quadrature(mu_sq, m, l, k)?;
        let change = (next - prev).abs() / next.abs().max(f64::MIN_POSITIVE);
        if change < PROPAGATOR_REL_TOL {
            return Ok(next);
        }
        if k >= PROPAGATOR_MAX_NODES {
            return Err(Error::NoConvergence { change });
        }
        prev = next;
    }
}

fn propagator_table_once(mu_sq: f64, size: usize, nodes: usize) -> DMatrix<f64> {
    let h = PI / nodes as f64;
    let thetas: Vec<f64> = (0..nodes).map(|j| (j as f64 + 0.5) * h).collect();
    let weights: Vec<f64> = thetas.iter().map(|th| h / (2.0 * (0.5 * th).sin().powi(2))).collect();
    let sines: Vec<Vec<f64>> = (0..size)
        .into_par_iter()
        .map(|m| thetas.iter().map(|th| (((m + 1) as f64) * th).sin()).collect())
        .collect();
    let rows: Vec<Vec<f64>> = (0..size)
        .into_par_iter()
        .map(|m| {
            (0..size)
                .map(|l| {
                    let s: f64 = sines[m]
                        .iter()
                        .zip(&sines[l])
                        .zip(&weights)
                        .map(|((a, b), w)| a * b * w)
                        .sum();
                    s / (PI * mu_sq)
                })
                .collect()
        })
        .collect();
    DMatrix::from_fn(size, size, |i, j| rows[i][j])
}

/// All entries `0 <= m, l < size` on shared nodes, doubled until every entry
/// changes by less than `PROPAGATOR_REL_TOL` relative.
pub fn propagator_table(mu_sq: f64, size: usize, nodes: usize) -> Result<DMatrix<f64>> {
    check_mu_sq(mu_sq)?;
    if size == 0 {
        return Err(Error::SizeTooSmall { min: 1, got: 0 });
    }
    check_nodes(size - 1, size - 1, nodes)?;
    let mut k = nodes;
    let mut prev = propagator_table_once(mu_sq, size, k);
    loop {
        k *= 2;
        let next = propagator_table_once(mu_sq, size, k);
        let change = next
            .iter()
            .zip(prev.iter())
            .map(|(a, b)| (a - b).abs() / a.abs().max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max);
        if change < PROPAGATOR_REL_TOL {
            return Ok(next);
        }
        if k >= PROPAGATOR_MAX_NODES {
            return Err(Error::NoConvergence { change });
        }
        prev = next;
    }
}

/// How propagator entries are produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PropagatorSource {
    ClosedForm,
    Quadrature { nodes: usize },
}

fn propagator_matrix(mu_sq: f64, size: usize, source: PropagatorSource) -> Result<DMatrix<f64>> {
    match source {
        PropagatorSource::ClosedForm => {
            check_mu_sq(mu_sq)?;
            Ok(DMatrix::from_fn(size, size, |m, l| propagator_closed_form(mu_sq, m, l)))
        }
        PropagatorSource::Quadrature { nodes } => propagator_table(mu_sq, size, nodes),
    }
}

/// `max |sum_{l<N} G_ml P_lr - delta_mr|` over rows `m <= N-2` and columns `r < N`.
pub fn propagator_identity_residual(mu_sq: f64, n: usize, source: PropagatorSource) -> Result<f64> {
    if n < 3 {
        return Err(Error::SizeTooSmall { min: 3, got: n });
    }
    let g = kinetic_reduced(mu_sq, n)?;
    let p = propagator_matrix(mu_sq, n, source)?;
    let mut worst: f64 = 0.0;
    for m in 0..n - 1 {
        for r in 0..n {
            let lo = m.saturating_sub(1);
            let s: f64 = (lo..=m + 1).map(|l| g.matrix.entry(m, l) * p[(l, r)]).sum();
            let target = if m == r { 1.0 } else { 0.0 };
            worst = worst.max((s - target).abs());
        }
    }
    Ok(worst)
}

/// Coefficient of `phi_pq phi_qr phi_mp` in the cubic interaction on the uniform
/// vacuum: `i 8 Omega^2 a_r (delta_{m+1,r} - delta_{r+1,m})`, `a_r = sqrt(3 mu^2) / 2`.
pub fn vertex_cubic(mu_sq: f64, m: usize, _p: usize, _q: usize, r: usize) -> Complex64 {
    let ar = 0.5 * (3.0 * mu_sq).sqrt();
    let bracket = f64::from(u8::from(m + 1 == r)) - f64::from(u8::from(r + 1 == m));
    Complex64::new(0.0, 8.0 * UNIFORM_OMEGA_SQ * ar * bracket)
}

/// `sigma = i (2/3) sqrt(3 mu^2)`, the constant multiplying the tadpole coefficient.
pub fn tadpole_sigma(mu_sq: f64) -> Complex64 {
    Complex64::new(0.0, 2.0 / 3.0 * (3.0 * mu_sq).sqrt())
}

/// `c_N(k) = sum_{l<N} (2 P_ll - P_{l,l+1}) + P_kk + P_{k+1,k+1} - P_{k,k+1}`.
///
/// With the closed-form source the integer numerators are summed first, so the
/// result is exact up to the final division by `mu^2`.
pub fn tadpole_coefficient(mu_sq: f64, k: usize, cutoff: usize, source: PropagatorSource) -> Result<f64> {
    check_mu_sq(mu_sq)?;
    if k + 2 > cutoff {
        return Err(Error::InvalidParameter(format!(
            "tadpole index k = {k} needs cutoff >= {}, got {cutoff}",
            k + 2
        )));
    }
    match source {
        PropagatorSource::ClosedForm => {
            let num = |m: usize, l: usize| (m.min(l) + 1) as u128;
            let mut total: u128 = 0;
            for l in 0..cutoff {
                total += 2 * num(l, l) - num(l, l + 1);
            }
            total += num(k, k) + num(k + 1, k + 1) - num(k, k + 1);
            Ok(total as f64 / mu_sq)
        }
        PropagatorSource::Quadrature { nodes } => {
            let p = propagator_table(mu_sq, cutoff + 1, nodes)?;
            let mut terms: Vec<f64> = (0..cutoff).map(|l| 2.0 * p[(l, l)] - p[(l, l + 1)]).collect();
            terms.push(p[(k, k)] + p[(k + 1, k + 1)] - p[(k, k + 1)]);
            Ok(crate::util::compensated_sum(terms))
        }
    }
}

/// `(N (N+1) / 2 + k + 2) / mu^2`.
pub fn tadpole_closed_form(mu_sq: f64, k: usize, cutoff: usize) -> f64 {
    let n = cutoff as u128;
    (n * (n + 1) / 2 + k as u128 + 2) as f64 / mu_sq
}

/// Least-squares slope of `log c_N(k)` against `log N` over the given cutoffs.
pub fn tadpole_divergence_exponent(mu_sq: f64, k: usize, cutoffs: &[usize]) -> Result<f64> {
    if cutoffs.len() < 2 {
        return Err(Error::SizeTooSmall {
            min: 2,
            got: cutoffs.len(),
        });
    }
    let values = cutoffs
        .iter()
        .map(|&n| tadpole_coefficient(mu_sq, k, n, PropagatorSource::ClosedForm))
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = cutoffs.iter().map(|&n| n as f64).collect();
    Ok(log_log_slope(&xs, &values))
}
