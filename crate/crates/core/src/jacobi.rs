//! Jacobi coefficient sequences, the semi-infinite operator on finitely supported
//! vectors, and its finite truncations.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Off-diagonal entries below this magnitude are treated as decoupling and rejected.
pub const MIN_OFF_DIAGONAL: f64 = 1e-300;

type Rule = Arc<dyn Fn(usize) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Sequence {
    Constant(f64),
    Table(Arc<[f64]>),
    Rule(Rule),
}

impl Sequence {
    fn get(&self, m: usize) -> Result<f64> {
        match self {
            Sequence::Constant(c) => Ok(*c),
            Sequence::Table(t) => t.get(m).copied().ok_or(Error::OutsideTable { index: m, len: t.len() }),
            Sequence::Rule(f) => Ok(f(m)),
        }
    }
}

impl fmt::Debug for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sequence::Constant(c) => write!(f, "Constant({c})"),
            Sequence::Table(t) => write!(f, "Table(len={})", t.len()),
            Sequence::Rule(_) => write!(f, "Rule(..)"),
        }
    }
}

/// The sequences `a` (off-diagonal, strictly positive) and `b` (diagonal) of a
/// bounded Jacobi operator, together with a declared bound `M >= sup |a_m| + |b_m|`.
///
/// The bound is checked lazily on every accessed index.
#[derive(Clone, Debug)]
pub struct JacobiCoefficients {
    a: Sequence,
    b: Sequence,
    bound: f64,
}

fn check_bound(bound: f64) -> Result<()> {
    if bound.is_finite() && bound > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "bound M must be finite and positive, got {bound}"
        )))
    }
}

impl JacobiCoefficients {
    /// Coefficients given as rules `m -> a_m`, `m -> b_m`.
    pub fn new<A, B>(a: A, b: B, bound: f64) -> Result<Self>
    where
        A: Fn(usize) -> f64 + Send + Sync + 'static,
        B: Fn(usize) -> f64 + Send + Sync + 'static,
    {
        check_bound(bound)?;
        Ok(Self {
            a: Sequence::Rule(Arc::new(a)),
            b: Sequence::Rule(Arc::new(b)),
            bound,
        })
    }

    /// Constant sequences with the tight bound `M = |a| + |b|`.
    pub fn constant(a: f64, b: f64) -> Result<Self> {
        let bound = a.abs() + b.abs();
        check_bound(bound)?;
        Ok(Self {
            a: Sequence::Constant(a),
            b: Sequence::Constant(b),
            bound,
        })
    }

    /// Finitely many tabulated coefficients; indices past the table are an error.
    pub fn tabulated(a: Vec<f64>, b: Vec<f64>, bound: f64) -> Result<Self> {
        check_bound(bound)?;
        Ok(Self {
            a: Sequence::Table(a.into()),
            b: Sequence::Table(b.into()),
            bound,
        })
    }

    /// `a = 1/2, b = 0`: the orthonormal family is U_n, orthonormal for
    /// `(2/pi) sqrt(1 - x^2) dx` on `[-1, 1]`.
    pub fn chebyshev_u() -> Self {
        Self::constant(0.5, 0.0).expect("valid constants")
    }

    /// `a = 1, b = -2`: the operator `-G / mu^2`, with `P_n(2x - 2) = U_n(x)`.
    pub fn chebyshev_shifted() -> Self {
        Self::constant(1.0, -2.0).expect("valid constants")
    }

    /// The declared bound `M`.
    pub fn bound(&self) -> f64 {
        self.bound
    }

    /// `2M`, an upper bound on the operator norm.
    pub fn norm_bound(&self) -> f64 {
        2.0 * self.bound
    }

    /// `(a_m, b_m)` after validating positivity and the declared bound.
    pub fn pair(&self, m: usize) -> Result<(f64, f64)> {
        let a = self.a.get(m)?;
        let b = self.b.get(m)?;
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::NonFiniteCoefficient { index: m });
        }
        if a < MIN_OFF_DIAGONAL {
            return Err(Error::NonPositiveOffDiagonal { index: m, value: a });
        }
        let sum = a + b.abs();
        if sum > self.bound * (1.0 + 4.0 * f64::EPSILON) {
            return Err(Error::BoundExceeded {
                index: m,
                sum,
                bound: self.bound,
            });
        }
        Ok((a, b))
    }

    pub fn a(&self, m: usize) -> Result<f64> {
        self.pair(m).map(|p| p.0)
    }

    pub fn b(&self, m: usize) -> Result<f64> {
        self.pair(m).map(|p| p.1)
    }

    /// Validated `(a_0..a_{n-1}, b_0..b_{n-1})`.
    pub fn window(&self, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut a = Vec::with_capacity(n);
        let mut b = Vec::with_capacity(n);
        for m in 0..n {
            let (am, bm) = self.pair(m)?;
            a.push(am);
            b.push(bm);
        }
        Ok((a, b))
    }

    /// `(Jv)_m = a_m v_{m+1} + b_m v_m + a_{m-1} v_{m-1}`.
    pub fn apply(&self, v: &SparseVector) -> Result<SparseVector> {
        let mut out: BTreeMap<usize, f64> = BTreeMap::new();
        for (&i, &vi) in &v.entries {
            let (ai, bi) = self.pair(i)?;
            *out.entry(i).or_insert(0.0) += bi * vi;
            *out.entry(i + 1).or_insert(0.0) += ai * vi;
            if i > 0 {
                let prev = self.a(i - 1)?;
                *out.entry(i - 1).or_insert(0.0) += prev * vi;
            }
        }
        out.retain(|_, x| *x != 0.0);
        Ok(SparseVector { entries: out })
    }

    /// The leading `n x n` block.
    pub fn truncate(&self, n: usize) -> Result<TridiagonalTruncation> {
        if n == 0 {
            return Err(Error::SizeTooSmall { min: 1, got: 0 });
        }
        let (a, b) = self.window(n)?;
        let mut off = a;
        off.truncate(n - 1);
        Ok(TridiagonalTruncation { diag: b, offdiag: off })
    }
}

/// A finitely supported vector in l^2(N).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SparseVector {
    entries: BTreeMap<usize, f64>,
}

impl SparseVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// The basis vector `e_i`.
    pub fn unit(i: usize) -> Self {
        let mut v = Self::new();
        v.set(i, 1.0);
        v
    }

    /// Nonzero entries of a dense prefix.
    pub fn from_dense(values: &[f64]) -> Self {
        let mut v = Self::new();
        for (i, &x) in values.iter().enumerate() {
            v.set(i, x);
        }
        v
    }

    pub fn get(&self, i: usize) -> f64 {
        self.entries.get(&i).copied().unwrap_or(0.0)
    }

    /// Sets entry `i`; zero removes it from the support.
    pub fn set(&mut self, i: usize, x: f64) {
        if x == 0.0 {
            self.entries.remove(&i);
        } else {
            self.entries.insert(i, x);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.entries.iter().map(|(&i, &x)| (i, x))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Largest index in the support.
    pub fn max_index(&self) -> Option<usize> {
        self.entries.keys().next_back().copied()
    }

    pub fn norm(&self) -> f64 {
        self.entries.values().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// `alpha * self + beta * other`.
    pub fn combine(&self, alpha: f64, other: &Self, beta: f64) -> Self {
        let mut out = Self::new();
        for (i, x) in self.iter() {
            out.set(i, alpha * x + beta * other.get(i));
        }
        for (i, y) in other.iter() {
            if !self.entries.contains_key(&i) {
                out.set(i, beta * y);
            }
        }
        out
    }

    /// Dense prefix of length `n`; fails if the support reaches past it.
    pub fn to_dense(&self, n: usize) -> Result<Vec<f64>> {
        if let Some(top) = self.max_index() {
            if top >= n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: top + 1,
                });
            }
        }
        let mut out = vec![0.0; n];
        for (i, x) in self.iter() {
            out[i] = x;
        }
        Ok(out)
    }
}

/// A real symmetric tridiagonal `N x N` matrix stored by its two diagonals.
#[derive(Clone, Debug, PartialEq)]
pub struct TridiagonalTruncation {
    diag: Vec<f64>,
    offdiag: Vec<f64>,
}

impl TridiagonalTruncation {
    /// Any symmetric tridiagonal matrix; zero off-diagonals are allowed here.
    pub fn new(diag: Vec<f64>, offdiag: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::SizeTooSmall { min: 1, got: 0 });
        }
        if offdiag.len() + 1 != diag.len() {
            return Err(Error::DimensionMismatch {
                expected: diag.len() - 1,
                got: offdiag.len(),
            });
        }
        if diag.iter().chain(&offdiag).any(|x| !x.is_finite()) {
            return Err(Error::NonFiniteArgument);
        }
        Ok(Self { diag, offdiag })
    }

    pub fn size(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn offdiag(&self) -> &[f64] {
        &self.offdiag
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let n = self.size();
        if i >= n || j >= n {
            return 0.0;
        }
        match i.abs_diff(j) {
            0 => self.diag[i],
            1 => self.offdiag[i.min(j)],
            _ => 0.0,
        }
    }

    /// `T * scale`.
    pub fn scaled(&self, scale: f64) -> Self {
        Self {
            diag: self.diag.iter().map(|x| x * scale).collect(),
            offdiag: self.offdiag.iter().map(|x| x * scale).collect(),
        }
    }

    /// The leading `n x n` principal submatrix.
    pub fn leading(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.size() {
            return Err(Error::IndexOutOfRange {
                index: n,
                size: self.size(),
            });
        }
        Ok(Self {
            diag: self.diag[..n].to_vec(),
            offdiag: self.offdiag[..n - 1].to_vec(),
        })
    }

    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        let n = self.size();
        if v.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: v.len(),
            });
        }
        Ok((0..n)
            .map(|i| {
                let mut s = self.diag[i] * v[i];
                if i + 1 < n {
                    s += self.offdiag[i] * v[i + 1];
                }
                if i > 0 {
                    s += self.offdiag[i - 1] * v[i - 1];
                }
                s
            })
            .collect())
    }

    /// `|<Tu, v> - <u, Tv>|`.
    pub fn symmetry_residual(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        let tu = self.matvec(u)?;
        let tv = self.matvec(v)?;
        let lhs: f64 = tu.iter().zip(v).map(|(x, y)| x * y).sum();
        let rhs: f64 = u.iter().zip(&tv).map(|(x, y)| x * y).sum();
        Ok((lhs - rhs).abs())
    }

    /// Gershgorin enclosure `[lo, hi]` of the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.size();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut r = 0.0;
            if i + 1 < n {
                r += self.offdiag[i].abs();
            }
            if i > 0 {
                r += self.offdiag[i - 1].abs();
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// Maximum absolute row sum, an upper bound on the spectral norm.
    pub fn norm_upper_bound(&self) -> f64 {
        let (lo, hi) = self.gershgorin();
        lo.abs().max(hi.abs())
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.size();
        DMatrix::from_fn(n, n, |i, j| self.entry(i, j))
    }
}
