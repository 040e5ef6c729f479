//! Orthonormal polynomials of a Jacobi operator: forward recurrence, zeros by
//! interlacing bisection, a Sturm-count eigensolver and the Christoffel-Darboux
//! identities.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::jacobi::{JacobiCoefficients, TridiagonalTruncation};

/// Values above `2^RESCALE_EXPONENT` trigger a rescale of the recurrence.
pub const RESCALE_EXPONENT: i32 = 100;
/// Default relative tolerance for zero location.
pub const DEFAULT_ZERO_TOL: f64 = 1e-13;

const MAX_BISECTIONS: usize = 200;
const PAR_THRESHOLD: usize = 64;

/// `P_0..P_n` at a point, stored as `values[k] * 2^log2_scale`.
///
/// One scale is shared by the whole prefix, so early entries may underflow to
/// zero once the tail has been rescaled many times.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaledValues {
    pub values: Vec<f64>,
    pub log2_scale: i32,
}

impl ScaledValues {
    /// `P_k` in absolute terms; may overflow to infinity.
    pub fn value(&self, k: usize) -> f64 {
        self.values[k] * 2f64.powi(self.log2_scale)
    }
}

/// Simple real zeros of `P_n`, ascending.
#[derive(Clone, Debug, PartialEq)]
pub struct ZeroSet {
    pub degree: usize,
    pub zeros: Vec<f64>,
}

impl ZeroSet {
    pub fn is_strictly_increasing(&self) -> bool {
        self.zeros.windows(2).all(|w| w[0] < w[1])
    }

    /// Whether `self` (degree n) strictly interlaces `next` (degree n+1).
    pub fn interlaces(&self, next: &ZeroSet) -> bool {
        next.degree == self.degree + 1
            && next.zeros.len() == self.zeros.len() + 1
            && self
                .zeros
                .iter()
                .enumerate()
                .all(|(i, &z)| next.zeros[i] < z && z < next.zeros[i + 1])
    }
}

/// Absolute residuals of the two Christoffel-Darboux identities with the
/// magnitudes of their terms, for relative comparison.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CdResidual {
    pub kernel: f64,
    pub kernel_scale: f64,
    pub confluent: f64,
    pub confluent_scale: f64,
}

impl CdResidual {
    pub fn absolute(&self) -> (f64, f64) {
        (self.kernel, self.confluent)
    }

    pub fn relative(&self) -> (f64, f64) {
        let rel = |r: f64, s: f64| if r == 0.0 { 0.0 } else { r / s.max(f64::MIN_POSITIVE) };
        (
            rel(self.kernel, self.kernel_scale),
            rel(self.confluent, self.confluent_scale),
        )
    }
}

/// The orthonormal family with `P_0 = 1`, `P_{-1} = 0` and
/// `t P_n = a_n P_{n+1} + b_n P_n + a_{n-1} P_{n-1}`.
#[derive(Clone, Debug)]
pub struct RecurrencePolynomials {
    coeffs: JacobiCoefficients,
}

impl RecurrencePolynomials {
    pub fn new(coeffs: JacobiCoefficients) -> Self {
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &JacobiCoefficients {
        &self.coeffs
    }

    /// `(P_0(t), ..., P_n(t))` by forward recurrence with power-of-two rescaling.
    pub fn eval_all(&self, n: usize, t: f64) -> Result<ScaledValues> {
        if !t.is_finite() {
            return Err(Error::NonFiniteArgument);
        }
        let (a, b) = self.coeffs.window(n)?;
        let mut values = Vec::with_capacity(n + 1);
        values.push(1.0);
        let mut scale = 0;
        let big = 2f64.powi(RESCALE_EXPONENT);
        let shrink = 2f64.powi(-RESCALE_EXPONENT);
        for k in 0..n {
            let prev = if k > 0 { a[k - 1] * values[k - 1] } else { 0.0 };
            let next = ((t - b[k]) * values[k] - prev) / a[k];
            values.push(next);
            if next.abs() > big {
                values.iter_mut().for_each(|v| *v *= shrink);
                scale += RESCALE_EXPONENT;
            }
        }
        Ok(ScaledValues {
            values,
            log2_scale: scale,
        })
    }

    /// Unscaled values and derivatives `P'_0..P'_n` from the differentiated recurrence.
    pub fn eval_with_derivatives(&self, n: usize, t: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        if !t.is_finite() {
            return Err(Error::NonFiniteArgument);
        }
        let (a, b) = self.coeffs.window(n)?;
        let mut p = vec![1.0];
        let mut dp = vec![0.0];
        for k in 0..n {
            let (pp, dpp) = if k > 0 {
                (a[k - 1] * p[k - 1], a[k - 1] * dp[k - 1])
            } else {
                (0.0, 0.0)
            };
            p.push(((t - b[k]) * p[k] - pp) / a[k]);
            dp.push(((t - b[k]) * dp[k] + p[k] - dpp) / a[k]);
        }
        if p.iter().chain(&dp).any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter(format!("recurrence overflowed at t = {t}")));
        }
        Ok((p, dp))
    }

    /// The zeros of `P_n`, found without any eigensolver.
    pub fn zeros(&self, n: usize) -> Result<ZeroSet> {
        self.zeros_with_tol(n, DEFAULT_ZERO_TOL)
    }

    pub fn zeros_with_tol(&self, n: usize, tol: f64) -> Result<ZeroSet> {
        let mut ladder = self.zero_ladder_with_tol(n, tol)?;
        Ok(ladder.pop().expect("n >= 1"))
    }

    /// Zeros of `P_1, ..., P_n`; level `k` is bracketed by the zeros of level `k - 1`
    /// and the endpoints `+-2M`.
    pub fn zero_ladder(&self, n: usize) -> Result<Vec<ZeroSet>> {
        self.zero_ladder_with_tol(n, DEFAULT_ZERO_TOL)
    }

    pub fn zero_ladder_with_tol(&self, n: usize, tol: f64) -> Result<Vec<ZeroSet>> {
        if n == 0 {
            return Err(Error::SizeTooSmall { min: 1, got: 0 });
        }
        if !(tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "zero tolerance must be positive, got {tol}"
            )));
        }
        let (a, b) = self.coeffs.window(n)?;
        let m = self.coeffs.bound();
        let edge = 2.0 * m * (1.0 + 1e-12) + f64::MIN_POSITIVE;
        let mut ladder: Vec<ZeroSet> = Vec::with_capacity(n);
        ladder.push(ZeroSet {
            degree: 1,
            zeros: vec![b[0]],
        });
        for deg in 2..=n {
            let prev = &ladder[deg - 2].zeros;
            let mut ends = Vec::with_capacity(deg + 1);
            ends.push(-edge);
            ends.extend_from_slice(prev);
            ends.push(edge);
            let mut signs: Vec<f64> = ends.iter().map(|&x| tail_value(&a, &b, deg, x)).collect();
            let mut collapsed = vec![false; ends.len()];
            for i in 0..ends.len() {
                let expected = if (deg - i) % 2 == 0 { 1.0 } else { -1.0 };
                if signs[i] != 0.0 && signs[i].signum() == expected {
                    continue;
                }
                if i == 0 || i == ends.len() - 1 {
                    return Err(Error::BracketFailure {
                        degree: deg,
                        bracket: i,
                    });
                }
                match repair_bracket(&a, &b, deg, ends[i - 1], ends[i], ends[i + 1], expected, tol * edge) {
                    Some((x, v)) => {
                        ends[i] = x;
                        signs[i] = v;
                    }
                    None => collapsed[i] = true,
                }
            }
            let solve = |i: usize| {
                if collapsed[i] {
                    ends[i]
                } else if collapsed[i + 1] {
                    ends[i + 1]
                } else {
                    bisect_zero(&a, &b, deg, ends[i], ends[i + 1], signs[i], tol)
                }
            };
            let zeros: Vec<f64> = if deg >= PAR_THRESHOLD {
                (0..deg).into_par_iter().map(solve).collect()
            } else {
                (0..deg).map(solve).collect()
            };
            ladder.push(ZeroSet { degree: deg, zeros });
        }
        Ok(ladder)
    }

    /// Residuals of
    /// `(t - z) sum_{k<=n} P_k(t) P_k(z) = a_n (P_{n+1}(t) P_n(z) - P_n(t) P_{n+1}(z))`
    /// and of the confluent form
    /// `sum_{k<=n} P_k(t)^2 = a_n (P'_{n+1}(t) P_n(t) - P'_n(t) P_{n+1}(t))`.
    pub fn christoffel_darboux_residual(&self, n: usize, t: f64, z: f64) -> Result<CdResidual> {
        let (pt, dpt) = self.eval_with_derivatives(n + 1, t)?;
        let (pz, _) = self.eval_with_derivatives(n + 1, z)?;
        let an = self.coeffs.a(n)?;

        let kernel_sum: f64 = (0..=n).map(|k| pt[k] * pz[k]).sum();
        let kernel_abs: f64 = (0..=n).map(|k| (pt[k] * pz[k]).abs()).sum();
        let lhs = (t - z) * kernel_sum;
        let r1 = an * pt[n + 1] * pz[n];
        let r2 = an * pt[n] * pz[n + 1];
        let kernel = (lhs - (r1 - r2)).abs();
        let kernel_scale = (t - z).abs() * kernel_abs + r1.abs() + r2.abs();

        let square_sum: f64 = (0..=n).map(|k| pt[k] * pt[k]).sum();
        let c1 = an * dpt[n + 1] * pt[n];
        let c2 = an * dpt[n] * pt[n + 1];
        let confluent = (square_sum - (c1 - c2)).abs();
        let confluent_scale = square_sum + c1.abs() + c2.abs();

        Ok(CdResidual {
            kernel,
            kernel_scale,
            confluent,
            confluent_scale,
        })
    }
}

/// `P_deg(t)` up to a positive power of two.
fn tail_value(a: &[f64], b: &[f64], deg: usize, t: f64) -> f64 {
    let big = 2f64.powi(RESCALE_EXPONENT);
    let shrink = 2f64.powi(-RESCALE_EXPONENT);
    let mut prev = 0.0;
    let mut cur = 1.0;
    for k in 0..deg {
        let back = if k > 0 { a[k - 1] * prev } else { 0.0 };
        let next = ((t - b[k]) * cur - back) / a[k];
        prev = cur;
        cur = next;
        if cur.abs() > big {
            cur *= shrink;
            prev *= shrink;
        }
    }
    cur
}

/// A previous-degree zero `x` that lies within rounding of a new zero gives an
/// unreliable sign. Probes outward from `x`, staying inside its neighbours and
/// within `16 * reach`, for a point with the expected sign. `None` means both
/// adjacent zeros coincide with `x` at that resolution.
#[allow(clippy::too_many_arguments)]
fn repair_bracket(
    a: &[f64],
    b: &[f64],
    deg: usize,
    left: f64,
    x: f64,
    right: f64,
    expected: f64,
    reach: f64,
) -> Option<(f64, f64)> {
    let cap = 16.0 * reach;
    let mut delta = f64::EPSILON * x.abs().max(reach);
    while delta <= cap {
        for probe in [x + delta, x - delta] {
            if probe > left && probe < right {
                let v = tail_value(a, b, deg, probe);
                if v != 0.0 && v.signum() == expected {
                    return Some((probe, v));
                }
            }
        }
        delta *= 2.0;
    }
    None
}

fn bisect_zero(a: &[f64], b: &[f64], deg: usize, mut lo: f64, mut hi: f64, sign_lo: f64, tol: f64) -> f64 {
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= tol * mid.abs() {
            return mid;
        }
        let v = tail_value(a, b, deg, mid);
        if v == 0.0 {
            return mid;
        }
        if v.signum() == sign_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `U_n(x)`: trigonometric form on `[-1, 1]`, recurrence elsewhere.
pub fn chebyshev_u(n: usize, x: f64) -> f64 {
    if x == 1.0 {
        return (n + 1) as f64;
    }
    if x == -1.0 {
        let v = (n + 1) as f64;
        return if n.is_multiple_of(2) { v } else { -v };
    }
    if x.abs() < 1.0 {
        let theta = x.acos();
        return (((n + 1) as f64) * theta).sin() / theta.sin();
    }
    chebyshev_u_recurrence(n, x)
}

/// `U_n(x)` from `U_{n+1} = 2x U_n - U_{n-1}`.
pub fn chebyshev_u_recurrence(n: usize, x: f64) -> f64 {
    let mut prev = 0.0;
    let mut cur = 1.0;
    for _ in 0..n {
        let next = 2.0 * x * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Number of eigenvalues of `t` strictly below `x`.
pub fn sturm_count(t: &TridiagonalTruncation, x: f64) -> usize {
    let e2: Vec<f64> = t.offdiag().iter().map(|e| e * e).collect();
    sturm_count_sq(t.diag(), &e2, x, pivot_floor(&e2))
}

fn pivot_floor(e2: &[f64]) -> f64 {
    let top = e2.iter().fold(1.0f64, |m, &x| m.max(x));
    f64::MIN_POSITIVE * top
}

fn sturm_count_sq(diag: &[f64], e2: &[f64], x: f64, pivmin: f64) -> usize {
    let mut count = 0;
    let mut d = 1.0;
    for (i, &di) in diag.iter().enumerate() {
        d = if i == 0 { di - x } else { di - x - e2[i - 1] / d };
        if d.abs() < pivmin {
            d = -pivmin;
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// All eigenvalues of a symmetric tridiagonal matrix, ascending, by Sturm-count
/// bisection carried to floating-point convergence.
pub fn eigenvalues(t: &TridiagonalTruncation) -> Vec<f64> {
    let e2: Vec<f64> = t.offdiag().iter().map(|e| e * e).collect();
    let pivmin = pivot_floor(&e2);
    let (glo, ghi) = t.gershgorin();
    let pad = 4.0 * f64::EPSILON * glo.abs().max(ghi.abs()) + pivmin;
    let lo = glo - pad;
    let hi = ghi + pad;
    let n = t.size();
    if n == 1 {
        return vec![t.diag()[0]];
    }
    let mut out = vec![0.0; n];
    let clo = sturm_count_sq(t.diag(), &e2, lo, pivmin);
    let chi = sturm_count_sq(t.diag(), &e2, hi, pivmin);
    let isolated = isolate(t.diag(), &e2, pivmin, lo, hi, clo, chi, &mut out[clo..chi]);
    let refined: Vec<(usize, f64)> = isolated
        .par_chunks(LANES)
        .flat_map_iter(|chunk| refine(t.diag(), &e2, pivmin, chunk))
        .collect();
    for (k, v) in refined {
        out[k] = v;
    }
    out
}

const LANES: usize = 8;

/// An interval `[lo, hi)` holding exactly the eigenvalue with index `index`.
#[derive(Clone, Copy, Debug)]
struct Isolated {
    lo: f64,
    hi: f64,
    index: usize,
}

/// Splits `[lo, hi)` until each interval holds one eigenvalue. Clusters that
/// cannot be separated in floating point are written to `out` directly.
#[allow(clippy::too_many_arguments)]
fn isolate(
    diag: &[f64],
    e2: &[f64],
    pivmin: f64,
    lo: f64,
    hi: f64,
    clo: usize,
    chi: usize,
    out: &mut [f64],
) -> Vec<Isolated> {
    if clo == chi {
        return Vec::new();
    }
    if chi - clo == 1 {
        return vec![Isolated { lo, hi, index: clo }];
    }
    let mid = 0.5 * (lo + hi);
    if mid <= lo || mid >= hi {
        out.iter_mut().for_each(|v| *v = mid);
        return Vec::new();
    }
    let cm = sturm_count_sq(diag, e2, mid, pivmin).clamp(clo, chi);
    let (left, right) = out.split_at_mut(cm - clo);
    let (mut a, b) = if chi - clo >= PAR_THRESHOLD {
        rayon::join(
            || isolate(diag, e2, pivmin, lo, mid, clo, cm, left),
            || isolate(diag, e2, pivmin, mid, hi, cm, chi, right),
        )
    } else {
        (
            isolate(diag, e2, pivmin, lo, mid, clo, cm, left),
            isolate(diag, e2, pivmin, mid, hi, cm, chi, right),
        )
    };
    a.extend(b);
    a
}

/// Bisects up to `LANES` isolated eigenvalues in lockstep to floating-point convergence.
fn refine(diag: &[f64], e2: &[f64], pivmin: f64, chunk: &[Isolated]) -> Vec<(usize, f64)> {
    let k = chunk.len();
    let mut lo = [0.0; LANES];
    let mut hi = [0.0; LANES];
    for (j, c) in chunk.iter().enumerate() {
        lo[j] = c.lo;
        hi[j] = c.hi;
    }
    loop {
        let mut mid = [0.0; LANES];
        let mut active = false;
        for j in 0..k {
            mid[j] = 0.5 * (lo[j] + hi[j]);
            active |= mid[j] > lo[j] && mid[j] < hi[j];
        }
        if !active {
            break;
        }
        let counts = sturm_counts_batch(diag, e2, &mid, pivmin);
        for j in 0..k {
            if mid[j] <= lo[j] || mid[j] >= hi[j] {
                continue;
            }
            if counts[j] > chunk[j].index {
                hi[j] = mid[j];
            } else {
                lo[j] = mid[j];
            }
        }
    }
    (0..k).map(|j| (chunk[j].index, 0.5 * (lo[j] + hi[j]))).collect()
}

fn sturm_counts_batch(diag: &[f64], e2: &[f64], x: &[f64; LANES], pivmin: f64) -> [usize; LANES] {
    let mut count = [0usize; LANES];
    let mut d = [0.0; LANES];
    for j in 0..LANES {
        d[j] = diag[0] - x[j];
    }
    let step = |d: &mut [f64; LANES], count: &mut [usize; LANES]| {
        for j in 0..LANES {
            if d[j].abs() < pivmin {
                d[j] = -pivmin;
            }
            count[j] += usize::from(d[j] < 0.0);
        }
    };
    step(&mut d, &mut count);
    for i in 1..diag.len() {
        let (di, ei) = (diag[i], e2[i - 1]);
        for j in 0..LANES {
            d[j] = di - x[j] - ei / d[j];
        }
        step(&mut d, &mut count);
    }
    count
}
