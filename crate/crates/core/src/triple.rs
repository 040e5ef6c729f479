//! Finite-truncation checks of the spectral triple built on the reduced kinetic
//! operator: Dirac square roots, the isometry, gamma matrices and the real
//! structure, Hilbert-Schmidt estimates and the commutant witness.

use nalgebra::{DMatrix, DVector, Matrix2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::ncft::{eigenvector_closed_form, KineticReduced};

type CMatrix = DMatrix<Complex64>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn frobenius(m: &DMatrix<f64>) -> f64 {
    m.norm()
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn spectral_norm(m: &CMatrix) -> f64 {
    if m.iter().all(|z| *z == c(0.0, 0.0)) {
        return 0.0;
    }
    m.clone().singular_values().iter().cloned().fold(0.0, f64::max)
}

/// Eigenpairs `(lambda_i, v_i)` of the truncated reduced operator, ascending.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralDecomposition {
    level: usize,
    values: Vec<f64>,
    vectors: Vec<DVector<f64>>,
}

/// Eigenpairs of `G^N` from the closed-form eigenvectors.
pub fn decompose(g: &KineticReduced) -> Result<SpectralDecomposition> {
    let n = g.size();
    let mut values = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n);
    for m in 0..n {
        let v = eigenvector_closed_form(n, m)?;
        values.push(v.g_eigenvalue(g.mu_sq()));
        vectors.push(DVector::from_vec(v.components));
    }
    Ok(SpectralDecomposition {
        level: n,
        values,
        vectors,
    })
}

impl SpectralDecomposition {
    pub fn level(&self) -> usize {
        self.level
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn vector(&self, i: usize) -> &DVector<f64> {
        &self.vectors[i]
    }

    /// The rank-one projector `|v_i><v_i|`.
    pub fn projector(&self, i: usize) -> DMatrix<f64> {
        &self.vectors[i] * self.vectors[i].transpose()
    }

    /// `sum_i coeffs_i |v_i><v_i|`.
    pub fn spectral_sum(&self, coeffs: &[f64]) -> Result<DMatrix<f64>> {
        if coeffs.len() != self.level {
            return Err(Error::DimensionMismatch {
                expected: self.level,
                got: coeffs.len(),
            });
        }
        let mut out = DMatrix::zeros(self.level, self.level);
        for (v, &w) in self.vectors.iter().zip(coeffs) {
            out += w * v * v.transpose();
        }
        Ok(out)
    }

    /// `||V^T V - 1||_F`.
    pub fn orthonormality_defect(&self) -> f64 {
        let n = self.level;
        let gram = DMatrix::from_fn(n, n, |i, j| self.vectors[i].dot(&self.vectors[j]));
        frobenius(&(gram - DMatrix::identity(n, n)))
    }

    /// `||sum lambda_i |v_i><v_i| - G||_F`.
    pub fn reconstruction_residual(&self, g: &KineticReduced) -> Result<f64> {
        let sum = self.spectral_sum(&self.values)?;
        Ok(frobenius(&(sum - g.to_dense())))
    }
}

/// `D = sum_i s_i sqrt(lambda_i) |v_i><v_i|` with signs `s_i = +-1`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiracTruncation {
    matrix: DMatrix<f64>,
    signs: Vec<f64>,
    branches: Vec<f64>,
}

fn check_signs(signs: &[f64], n: usize) -> Result<()> {
    if signs.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: signs.len(),
        });
    }
    if signs.iter().any(|s| s.abs() != 1.0) {
        return Err(Error::InvalidParameter("sign choices must be +1 or -1".into()));
    }
    Ok(())
}

/// Square root of `G^N` on the given sign branches.
pub fn dirac_sqrt(dec: &SpectralDecomposition, signs: &[f64]) -> Result<DiracTruncation> {
    check_signs(signs, dec.level)?;
    if let Some(&bad) = dec.values.iter().find(|&&l| !(l > 0.0)) {
        return Err(Error::NonPositiveEigenvalue(bad));
    }
    let branches: Vec<f64> = dec.values.iter().zip(signs).map(|(l, s)| s * l.sqrt()).collect();
    let matrix = dec.spectral_sum(&branches)?;
    Ok(DiracTruncation {
        matrix,
        signs: signs.to_vec(),
        branches,
    })
}

/// The positive square root, with trivial kernel.
pub fn dirac_positive(dec: &SpectralDecomposition) -> Result<DiracTruncation> {
    dirac_sqrt(dec, &vec![1.0; dec.level])
}

impl DiracTruncation {
    pub fn level(&self) -> usize {
        self.signs.len()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn signs(&self) -> &[f64] {
        &self.signs
    }

    /// Eigenvalues `s_i sqrt(lambda_i)` in the order of the decomposition.
    pub fn branches(&self) -> &[f64] {
        &self.branches
    }

    /// Operator norm, `max |s_i sqrt(lambda_i)|`.
    pub fn norm(&self) -> f64 {
        self.branches.iter().fold(0.0, |m, b| m.max(b.abs()))
    }

    /// `||D^2 - G||_F`.
    pub fn square_residual(&self, g: &KineticReduced) -> f64 {
        frobenius(&(&self.matrix * &self.matrix - g.to_dense()))
    }

    /// `||D - D^T||_F`.
    pub fn symmetry_residual(&self) -> f64 {
        frobenius(&(&self.matrix - self.matrix.transpose()))
    }
}

/// The isometry `sum_i u_i |v_i><v_i|` and its defining relations.
#[derive(Clone, Debug, PartialEq)]
pub struct Isometry {
    pub matrix: DMatrix<f64>,
    /// `||J^2 - 1||_F`.
    pub involution_residual: f64,
    /// `||D J - J D||_F`.
    pub commutator_residual: f64,
}

pub fn isometry_j(dec: &SpectralDecomposition, dirac: &DiracTruncation, u: &[f64]) -> Result<Isometry> {
    check_signs(u, dec.level)?;
    let j = dec.spectral_sum(u)?;
    let n = dec.level;
    let involution_residual = frobenius(&(&j * &j - DMatrix::identity(n, n)));
    let commutator_residual = frobenius(&(&dirac.matrix * &j - &j * &dirac.matrix));
    Ok(Isometry {
        matrix: j,
        involution_residual,
        commutator_residual,
    })
}

/// Pauli matrices with `sigma_2 = [[0, i], [-i, 0]]` and `sigma_3 = i sigma_1 sigma_2`.
pub fn pauli() -> [Matrix2<Complex64>; 3] {
    let s1 = Matrix2::new(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0));
    let s2 = Matrix2::new(c(0.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(0.0, 0.0));
    let s3 = s1 * s2 * c(0.0, 1.0);
    [s1, s2, s3]
}

fn to_dyn(m: &Matrix2<Complex64>) -> CMatrix {
    DMatrix::from_fn(2, 2, |i, j| m[(i, j)])
}

/// An antilinear map `v -> L conj(v)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Antilinear {
    pub linear: CMatrix,
}

impl Antilinear {
    pub fn apply(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        &self.linear * v.map(|z| z.conj())
    }
}

/// Gamma matrices `gamma_mu = 1 x sigma_mu`, `gamma_{mu+2} = sigma_mu x 1`, the
/// grading `gamma_1 gamma_2 gamma_3 gamma_4` and the charge conjugation
/// `gamma_2 o conj`.
#[derive(Clone, Debug, PartialEq)]
pub struct CliffordRep {
    pub gamma: [CMatrix; 4],
    pub grading: CMatrix,
    pub conjugation: Antilinear,
}

impl CliffordRep {
    pub fn standard() -> Self {
        let [s1, s2, _] = pauli();
        let id = CMatrix::identity(2, 2);
        let (s1, s2) = (to_dyn(&s1), to_dyn(&s2));
        let gamma = [
            id.kronecker(&s1),
            id.kronecker(&s2),
            s1.kronecker(&id),
            s2.kronecker(&id),
        ];
        let grading = &gamma[0] * &gamma[1] * &gamma[2] * &gamma[3];
        let conjugation = Antilinear {
            linear: gamma[1].clone(),
        };
        Self {
            gamma,
            grading,
            conjugation,
        }
    }

    /// Max-norm residual of `{gamma_mu, gamma_nu} = 2 delta` within each pair
    /// `(gamma_1, gamma_2)` and `(gamma_3, gamma_4)`.
    pub fn anticommutator_residual(&self) -> f64 {
        let id = CMatrix::identity(4, 4);
        let mut worst: f64 = 0.0;
        for pair in [(0, 1), (2, 3)] {
            for &i in &[pair.0, pair.1] {
                for &j in &[pair.0, pair.1] {
                    let anti = &self.gamma[i] * &self.gamma[j] + &self.gamma[j] * &self.gamma[i];
                    let target = if i == j {
                        &id * c(2.0, 0.0)
                    } else {
                        CMatrix::zeros(4, 4)
                    };
                    worst = worst.max(max_abs(&(anti - target)));
                }
            }
        }
        worst
    }

    /// Max-norm residual of `grading^2 = 1`.
    pub fn grading_square_residual(&self) -> f64 {
        max_abs(&(&self.grading * &self.grading - CMatrix::identity(4, 4)))
    }
}

/// Max-norm residuals of the five real-structure relations on `C^N x C^4`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KoReport {
    /// `J^2 = -1`.
    pub j_squared: f64,
    /// `J D = D J`.
    pub j_dirac: f64,
    /// `J Gamma = -Gamma J`.
    pub j_grading: f64,
    /// `Gamma^2 = 1`.
    pub grading_squared: f64,
    /// `D Gamma = -Gamma D`.
    pub dirac_grading: f64,
}

impl KoReport {
    pub fn max(&self) -> f64 {
        [
            self.j_squared,
            self.j_dirac,
            self.j_grading,
            self.grading_squared,
            self.dirac_grading,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Builds `D x gamma_3`, `1 x Gamma` and `(1 x gamma_2) o conj` and checks the
/// relations on the spanning set `{e_j, i e_j}`.
pub fn ko_relations(d: &DMatrix<f64>, cl: &CliffordRep) -> KoReport {
    let n = d.nrows();
    let dc: CMatrix = d.map(|x| c(x, 0.0));
    let id_n = CMatrix::identity(n, n);
    let big_d = dc.kronecker(&cl.gamma[2]);
    let big_g = id_n.kronecker(&cl.grading);
    let big_j = Antilinear {
        linear: id_n.kronecker(&cl.conjugation.linear),
    };
    let dim = 4 * n;

    let mut j_squared: f64 = 0.0;
    let mut j_dirac: f64 = 0.0;
    let mut j_grading: f64 = 0.0;
    for k in 0..dim {
        for phase in [c(1.0, 0.0), c(0.0, 1.0)] {
            let mut v = DVector::zeros(dim);
            v[k] = phase;
            let jv = big_j.apply(&v);
            let sup = |w: DVector<Complex64>| w.iter().map(|z| z.norm()).fold(0.0, f64::max);
            j_squared = j_squared.max(sup(big_j.apply(&jv) + &v));
            j_dirac = j_dirac.max(sup(big_j.apply(&(&big_d * &v)) - &big_d * &jv));
            j_grading = j_grading.max(sup(big_j.apply(&(&big_g * &v)) + &big_g * &jv));
        }
    }
    let grading_squared = max_abs(&(&big_g * &big_g - CMatrix::identity(dim, dim)));
    let dirac_grading = max_abs(&(&big_d * &big_g + &big_g * &big_d));
    KoReport {
        j_squared,
        j_dirac,
        j_grading,
        grading_squared,
        dirac_grading,
    }
}

/// A non-scalar operator commuting with `D`.
#[derive(Clone, Debug, PartialEq)]
pub struct CommutantWitness {
    pub matrix: DMatrix<f64>,
    /// `||[D, a]||` in operator norm.
    pub commutator_norm: f64,
    /// `min_lambda ||a - lambda 1||`.
    pub scalar_distance: f64,
}

/// The spectral projector `|v_i><v_i|`, which commutes with `D` without being scalar.
pub fn commutant_witness(
    dec: &SpectralDecomposition,
    dirac: &DiracTruncation,
    index: usize,
) -> Result<CommutantWitness> {
    if dec.level < 2 {
        return Err(Error::SizeTooSmall { min: 2, got: dec.level });
    }
    if index >= dec.level {
        return Err(Error::IndexOutOfRange { index, size: dec.level });
    }
    let a = dec.projector(index);
    let comm = &dirac.matrix * &a - &a * &dirac.matrix;
    let commutator_norm = spectral_norm(&comm.map(|x| c(x, 0.0)));
    Ok(CommutantWitness {
        scalar_distance: scalar_distance(&a),
        commutator_norm,
        matrix: a,
    })
}

/// `min_lambda ||a - lambda 1||` for symmetric `a`: half its spectral spread.
pub fn scalar_distance(a: &DMatrix<f64>) -> f64 {
    let ev = a.clone().symmetric_eigenvalues();
    let hi = ev.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = ev.iter().cloned().fold(f64::INFINITY, f64::min);
    0.5 * (hi - lo)
}

/// `||[D, a]||` and `||D a - a D||` for an arbitrary operator, in operator norm.
pub fn commutator_norm(d: &DMatrix<f64>, a: &DMatrix<f64>) -> f64 {
    spectral_norm(&(d * a - a * d).map(|x| c(x, 0.0)))
}

/// Both sides of the Hilbert-Schmidt estimates for one operator `a`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HsReport {
    /// `||[D, a]||`.
    pub commutator_op: f64,
    /// `||[D, a]||_2`.
    pub commutator_hs: f64,
    /// `2 ||D|| ||a||_2`.
    pub commutator_bound: f64,
    /// `||a R(z)||_2`.
    pub resolvent_hs: f64,
    /// `||a||_2 ||R(z)||`.
    pub resolvent_bound: f64,
}

impl HsReport {
    /// Slack of each inequality; all are nonnegative when the estimates hold.
    pub fn slacks(&self) -> [f64; 3] {
        [
            self.commutator_hs - self.commutator_op,
            self.commutator_bound - self.commutator_hs,
            self.resolvent_bound - self.resolvent_hs,
        ]
    }

    pub fn min_slack(&self) -> f64 {
        self.slacks().into_iter().fold(f64::INFINITY, f64::min)
    }
}

/// Checks `||[D,a]|| <= ||[D,a]||_2 <= 2 ||D|| ||a||_2` and
/// `||a R(z)||_2 <= ||a||_2 ||R(z)||` with `R(z) = (D - z)^-1`.
pub fn hs_bound_check(dirac: &DiracTruncation, a: &CMatrix, z: Complex64) -> Result<HsReport> {
    let n = dirac.level();
    if a.nrows() != n || a.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: a.nrows().max(a.ncols()),
        });
    }
    let scale = dirac.norm().max(1.0);
    if dirac
        .branches
        .iter()
        .any(|&b| (c(b, 0.0) - z).norm() <= 16.0 * f64::EPSILON * scale)
    {
        return Err(Error::SingularResolvent);
    }
    let d: CMatrix = dirac.matrix.map(|x| c(x, 0.0));
    let comm = &d * a - a * &d;
    let shifted = &d - CMatrix::identity(n, n) * z;
    let r = shifted.try_inverse().ok_or(Error::SingularResolvent)?;
    let a_hs = a.norm();
    Ok(HsReport {
        commutator_op: spectral_norm(&comm),
        commutator_hs: comm.norm(),
        commutator_bound: 2.0 * dirac.norm() * a_hs,
        resolvent_hs: (a * &r).norm(),
        resolvent_bound: a_hs * spectral_norm(&r),
    })
}

/// A vector of `l^2(N)` given by a coefficient rule with a known tail.
#[derive(Clone, Debug, PartialEq)]
pub enum DecaySpec {
    Finite(Vec<f64>),
    /// `amplitude * ratio^m`.
    Geometric {
        amplitude: f64,
        ratio: f64,
    },
    /// `amplitude * (m + 1)^-exponent`.
    Power {
        amplitude: f64,
        exponent: f64,
    },
}

impl DecaySpec {
    pub fn coefficient(&self, m: usize) -> f64 {
        match self {
            DecaySpec::Finite(v) => v.get(m).copied().unwrap_or(0.0),
            DecaySpec::Geometric { amplitude, ratio } => amplitude * ratio.powi(m as i32),
            DecaySpec::Power { amplitude, exponent } => amplitude * ((m + 1) as f64).powf(-exponent),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            DecaySpec::Geometric { ratio, .. } if !(ratio.abs() < 1.0) => Err(Error::NotSquareSummable),
            DecaySpec::Power { exponent, .. } if !(*exponent > 0.5) => Err(Error::NotSquareSummable),
            _ => Ok(()),
        }
    }

    /// Upper bound on `(sum_{m >= w} (G f)_m^2)^(1/2)` for `w >= 1`.
    fn image_tail(&self, mu_sq: f64, w: usize) -> f64 {
        match self {
            DecaySpec::Finite(v) => {
                if w > v.len() {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            DecaySpec::Geometric { amplitude, ratio } => {
                let q = ratio.abs();
                let sq = (mu_sq * amplitude * (1.0 + q).powi(2)).powi(2) * q.powi(2 * (w as i32 - 1)) / (1.0 - q * q);
                sq.sqrt()
            }
            DecaySpec::Power { amplitude, exponent } => {
                let p = *exponent;
                let base = (w - 1).max(1) as f64;
                let sq = (mu_sq * amplitude * p * (p + 1.0)).powi(2) * base.powf(-2.0 * p - 3.0) / (2.0 * p + 3.0);
                sq.sqrt()
            }
        }
    }
}

const MAX_WINDOW: usize = 1 << 24;

/// `||(P_N G P_N - G) f||_2` for each level `N`, with `P_N` the projection onto
/// the first `N` coordinates. `Gf` is evaluated on a window whose neglected tail
/// is below `tail_tol`.
pub fn strong_convergence_profile(mu_sq: f64, f: &DecaySpec, levels: &[usize], tail_tol: f64) -> Result<Vec<f64>> {
    f.validate()?;
    if !(mu_sq > 0.0) || !(tail_tol > 0.0) {
        return Err(Error::InvalidParameter(
            "mu^2 and the tail tolerance must be positive".into(),
        ));
    }
    if levels.contains(&0) {
        return Err(Error::SizeTooSmall { min: 1, got: 0 });
    }
    let top = levels.iter().copied().max().unwrap_or(1);
    let mut w = top + 2;
    while f.image_tail(mu_sq, w) > tail_tol {
        w *= 2;
        if w > MAX_WINDOW {
            return Err(Error::InvalidParameter(format!(
                "tail tolerance {tail_tol:e} needs a window above {MAX_WINDOW}"
            )));
        }
    }
    let coeff: Vec<f64> = (0..=w).map(|m| f.coefficient(m)).collect();
    let full: Vec<f64> = (0..w)
        .map(|m| {
            let back = if m > 0 { coeff[m - 1] } else { 0.0 };
            mu_sq * (2.0 * coeff[m] - back - coeff[m + 1])
        })
        .collect();
    Ok(levels
        .iter()
        .map(|&n| {
            let mut sq = 0.0;
            for (m, &g) in full.iter().enumerate().skip(n.saturating_sub(1)) {
                let projected = if m < n {
                    let back = if m > 0 { coeff[m - 1] } else { 0.0 };
                    let fwd = if m + 1 < n { coeff[m + 1] } else { 0.0 };
                    mu_sq * (2.0 * coeff[m] - back - fwd)
                } else {
                    0.0
                };
                sq += (projected - g).powi(2);
            }
            sq.sqrt()
        })
        .collect())
}
