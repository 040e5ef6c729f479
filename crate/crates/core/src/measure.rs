//! The orthogonality measure of a Jacobi operator: Gauss rules, moments, the
//! Stieltjes transform, Perron inversion and measure-side matrix elements.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::jacobi::JacobiCoefficients;
use crate::orthopoly::{eigenvalues, RecurrencePolynomials};
use crate::util::{adaptive_simpson, compensated_sum};

const SIMPSON_DEPTH: u32 = 60;
const MIDPOINT_START: usize = 64;
const MIDPOINT_MAX: usize = 1 << 22;

/// Density of an absolutely continuous measure.
#[derive(Clone)]
pub enum Density {
    /// `(2 / (pi R^2)) sqrt(R^2 - (t - c)^2)` on `[c - R, c + R]`.
    Semicircle {
        center: f64,
        radius: f64,
    },
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Density::Semicircle { center, radius } => write!(f, "Semicircle {{ center: {center}, radius: {radius} }}"),
            Density::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

#[derive(Clone, Debug)]
enum Representation {
    Density(Density),
    Discrete(QuadratureRule),
}

/// A compactly supported measure given by a density or by a finite rule.
#[derive(Clone, Debug)]
pub struct SpectralMeasure {
    lo: f64,
    hi: f64,
    total_mass: f64,
    repr: Representation,
}

impl SpectralMeasure {
    pub fn semicircle(center: f64, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite() && center.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "semicircle needs finite center and radius > 0, got ({center}, {radius})"
            )));
        }
        Ok(Self {
            lo: center - radius,
            hi: center + radius,
            total_mass: 1.0,
            repr: Representation::Density(Density::Semicircle { center, radius }),
        })
    }

    /// `(2/pi) sqrt(1 - x^2)` on `[-1, 1]`, the measure of `JacobiCoefficients::chebyshev_u`.
    pub fn chebyshev_u() -> Self {
        Self::semicircle(0.0, 1.0).expect("valid semicircle")
    }

    /// `(1/(2 pi)) sqrt(-t (t + 4))` on `[-4, 0]`, the measure of `-G / mu^2`.
    pub fn kinetic() -> Self {
        Self::semicircle(-2.0, 2.0).expect("valid semicircle")
    }

    /// Arbitrary nonnegative density on `[lo, hi]` with declared mass.
    pub fn with_density<F>(lo: f64, hi: f64, density: F, total_mass: f64) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(lo < hi && lo.is_finite() && hi.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "support [{lo}, {hi}] is not a proper interval"
            )));
        }
        Ok(Self {
            lo,
            hi,
            total_mass,
            repr: Representation::Density(Density::Custom(Arc::new(density))),
        })
    }

    /// The discrete measure of a quadrature rule.
    pub fn from_rule(rule: QuadratureRule) -> Self {
        let lo = rule.nodes.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = rule.nodes.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let total_mass = rule.total_weight();
        Self {
            lo,
            hi,
            total_mass,
            repr: Representation::Discrete(rule),
        }
    }

    pub fn support(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    /// `(center, radius)` for semicircle densities.
    pub fn semicircle_params(&self) -> Option<(f64, f64)> {
        match &self.repr {
            Representation::Density(Density::Semicircle { center, radius }) => Some((*center, *radius)),
            _ => None,
        }
    }

    /// Density at `t`; `None` for discrete measures.
    pub fn density(&self, t: f64) -> Option<f64> {
        match &self.repr {
            Representation::Density(d) => Some(if t < self.lo || t > self.hi {
                0.0
            } else {
                eval_density(d, t)
            }),
            Representation::Discrete(_) => None,
        }
    }

    /// `int f dmu` through the density (or the atoms of a discrete measure).
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, tol: f64) -> f64 {
        match &self.repr {
            Representation::Density(Density::Semicircle { center, radius }) => {
                let g = |th: f64| f(center + radius * th.cos()) * th.sin().powi(2);
                2.0 / PI * adaptive_simpson(&g, 0.0, PI, tol, SIMPSON_DEPTH)
            }
            Representation::Density(Density::Custom(rho)) => {
                let g = |t: f64| f(t) * rho(t);
                adaptive_simpson(&g, self.lo, self.hi, tol, SIMPSON_DEPTH)
            }
            Representation::Discrete(rule) => rule.integrate(f),
        }
    }

    fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

fn eval_density(d: &Density, t: f64) -> f64 {
    match d {
        Density::Semicircle { center, radius } => {
            let s = radius * radius - (t - center) * (t - center);
            2.0 / (PI * radius * radius) * s.max(0.0).sqrt()
        }
        Density::Custom(f) => f(t),
    }
}

/// Nodes and nonnegative weights of a quadrature rule.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    exact_degree: usize,
}

impl QuadratureRule {
    pub fn new(nodes: Vec<f64>, weights: Vec<f64>, exact_degree: usize) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::SizeTooSmall { min: 1, got: 0 });
        }
        if nodes.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: nodes.len(),
                got: weights.len(),
            });
        }
        if weights.iter().any(|w| !(*w >= 0.0)) || nodes.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter(
                "rule needs finite nodes and nonnegative weights".into(),
            ));
        }
        Ok(Self {
            nodes,
            weights,
            exact_degree,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Highest polynomial degree integrated exactly.
    pub fn exact_degree(&self) -> usize {
        self.exact_degree
    }

    pub fn total_weight(&self) -> f64 {
        compensated_sum(self.weights.iter().copied())
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        compensated_sum(self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)))
    }

    fn require_degree(&self, needed: usize) -> Result<()> {
        if needed > self.exact_degree {
            Err(Error::DegreeNotExact {
                nodes: self.len(),
                exact: self.exact_degree,
                needed,
            })
        } else {
            Ok(())
        }
    }
}

/// The `K`-node Gauss rule of the measure of `coeffs`: nodes are the eigenvalues
/// of the `K x K` truncation, weights the Christoffel numbers `1 / sum_k P_k(x)^2`.
pub fn gauss_rule(coeffs: &JacobiCoefficients, k: usize) -> Result<QuadratureRule> {
    let t = coeffs.truncate(k)?;
    let nodes = eigenvalues(&t);
    let fam = RecurrencePolynomials::new(coeffs.clone());
    let mut weights = Vec::with_capacity(k);
    for &x in &nodes {
        let v = fam.eval_all(k - 1, x)?;
        let s: f64 = compensated_sum(v.values.iter().map(|p| p * p));
        weights.push(2f64.powi(-2 * v.log2_scale) / s);
    }
    QuadratureRule::new(nodes, weights, 2 * k - 1)
}

/// `s_n = int x^n dmu`; fails unless the rule is exact to degree `n`.
pub fn moment(rule: &QuadratureRule, n: usize) -> Result<f64> {
    rule.require_degree(n)?;
    Ok(rule.integrate(|x| x.powi(n as i32)))
}

/// `s_0, ..., s_n`.
pub fn moments(rule: &QuadratureRule, n: usize) -> Result<Vec<f64>> {
    (0..=n).map(|k| moment(rule, k)).collect()
}

/// `w(z) = int dmu(x) / (x - z)` by quadrature.
pub fn stieltjes_transform(measure: &SpectralMeasure, rule: &QuadratureRule, z: Complex64) -> Result<Complex64> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::NonFiniteArgument);
    }
    if z.im == 0.0 && measure.contains(z.re) {
        return Err(Error::InsideSupport(z.re));
    }
    let terms: Vec<Complex64> = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&x, &w)| w / (x - z))
        .collect();
    Ok(Complex64::new(
        compensated_sum(terms.iter().map(|c| c.re)),
        compensated_sum(terms.iter().map(|c| c.im)),
    ))
}

/// The moment series `-sum_n s_n / z^(n+1)`.
pub fn stieltjes_series(moments: &[f64], z: Complex64) -> Complex64 {
    let inv = 1.0 / z;
    let mut power = inv;
    let mut sum = Complex64::new(0.0, 0.0);
    for s in moments {
        sum -= s * power;
        power *= inv;
    }
    sum
}

/// `pi^-1 int_{a+eps}^{b-eps} Im w(t + i nu) dt`.
pub fn perron_inversion(measure: &SpectralMeasure, a: f64, b: f64, nu: f64, eps: f64) -> Result<f64> {
    if !(nu > 0.0) {
        return Err(Error::InvalidParameter(format!("nu must be positive, got {nu}")));
    }
    if !(eps >= 0.0) || !(a < b) || a + eps >= b - eps {
        return Err(Error::InvalidParameter(format!(
            "empty inversion interval [{a} + {eps}, {b} - {eps}]"
        )));
    }
    let (lo, hi) = (a + eps, b - eps);
    match &measure.repr {
        Representation::Discrete(rule) => Ok(rule.integrate(|x| ((hi - x) / nu).atan() - ((lo - x) / nu).atan()) / PI),
        Representation::Density(d) => {
            let (slo, shi) = measure.support();
            let peak = peak_density(d, slo, shi);
            let inner_tol = 1e-10 * peak.max(f64::MIN_POSITIVE);
            let im_w = |t: f64| {
                let p0 = ((slo - t) / nu).atan();
                let p1 = ((shi - t) / nu).atan();
                let g = |phi: f64| {
                    let x = t + nu * phi.tan();
                    if x < slo || x > shi {
                        0.0
                    } else {
                        eval_density(d, x)
                    }
                };
                adaptive_simpson(&g, p0, p1, inner_tol, SIMPSON_DEPTH)
            };
            let outer_tol = 1e-9 * measure.total_mass.abs().max(1.0);
            Ok(adaptive_simpson(&im_w, lo, hi, outer_tol, SIMPSON_DEPTH) / PI)
        }
    }
}

fn peak_density(d: &Density, lo: f64, hi: f64) -> f64 {
    match d {
        Density::Semicircle { radius, .. } => 2.0 / (PI * radius),
        Density::Custom(f) => (0..=256)
            .map(|i| f(lo + (hi - lo) * i as f64 / 256.0).abs())
            .fold(0.0, f64::max),
    }
}

/// Weight inserted into a matrix element `int w(t) P_m(t) P_l(t) dmu(t)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Weight {
    Identity,
    T,
    InverseT,
}

/// `<e_m, W e_l>` with `W` the identity, `J` or `J^-1`, computed on the measure side.
///
/// Identity and `t` use the rule and require exactness by degree. `1/t` uses the
/// angle form of a semicircle density, where a zero at a support endpoint cancels
/// against the density; other measures use the rule and require `0` off the support.
pub fn matrix_element(
    fam: &RecurrencePolynomials,
    measure: &SpectralMeasure,
    rule: &QuadratureRule,
    m: usize,
    l: usize,
    weight: Weight,
) -> Result<f64> {
    let top = m.max(l);
    let pair = |x: f64| -> Result<f64> {
        let v = fam.eval_all(top, x)?;
        let s = 2f64.powi(v.log2_scale);
        Ok(v.values[m] * s * v.values[l] * s)
    };
    match weight {
        Weight::Identity | Weight::T => {
            let extra = usize::from(weight == Weight::T);
            rule.require_degree(m + l + extra)?;
            let mut terms = Vec::with_capacity(rule.len());
            for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
                let f = if extra == 1 { x } else { 1.0 };
                terms.push(w * f * pair(x)?);
            }
            Ok(compensated_sum(terms))
        }
        Weight::InverseT => {
            let (lo, hi) = measure.support();
            if lo < 0.0 && 0.0 < hi {
                return Err(Error::SpectrumContainsZero);
            }
            if let Some((c, r)) = measure.semicircle_params() {
                return inverse_on_semicircle(&pair, c, r, lo, hi);
            }
            if lo == 0.0 || hi == 0.0 {
                return Err(Error::InvalidParameter(
                    "0 at a support endpoint needs a semicircle density".into(),
                ));
            }
            let mut terms = Vec::with_capacity(rule.len());
            for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
                terms.push(w * pair(x)? / x);
            }
            Ok(compensated_sum(terms))
        }
    }
}

fn inverse_on_semicircle<P>(pair: &P, c: f64, r: f64, lo: f64, hi: f64) -> Result<f64>
where
    P: Fn(f64) -> Result<f64>,
{
    // sin^2(theta) / t with t = c + r cos(theta), cancelled when 0 is an endpoint
    let kernel = |th: f64| -> f64 {
        if hi == 0.0 {
            -2.0 / r * (0.5 * th).cos().powi(2)
        } else if lo == 0.0 {
            2.0 / r * (0.5 * th).sin().powi(2)
        } else {
            th.sin().powi(2) / (c + r * th.cos())
        }
    };
    let rule_at = |k: usize| -> Result<f64> {
        let h = PI / k as f64;
        let mut terms = Vec::with_capacity(k);
        for j in 0..k {
            let th = (j as f64 + 0.5) * h;
            terms.push(pair(c + r * th.cos())? * kernel(th));
        }
        Ok(2.0 / PI * h * compensated_sum(terms))
    };
    let mut k = MIDPOINT_START;
    let mut prev = rule_at(k)?;
    loop {
        k *= 2;
        let next = rule_at(k)?;
        let change = (next - prev).abs();
        if change <= 1e-13 * next.abs().max(1.0) {
            return Ok(next);
        }
        if k >= MIDPOINT_MAX {
            return Err(Error::NoConvergence {
                change: change / next.abs().max(1.0),
            });
        }
        prev = next;
    }
}
