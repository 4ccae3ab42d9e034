//! Gaussian-state calculus over labelled bosonic modes.
//!
//! Quadratures follow `a = X + iP`, so `[X, P] = i/2` and the vacuum has
//! `Var(X) = Var(P) = 1/4`. Phase-space vectors are ordered
//! `(x_1, p_1, ..., x_M, p_M)` and the symplectic form `Omega` is block
//! diagonal with blocks `[[0, 1], [-1, 0]]`, so `[r_i, r_j] = (i/2) Omega_ij`.
//! Wigner functions are normalized to unit integral.

use std::collections::HashSet;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

pub const SYMMETRY_TOL: f64 = 1e-12;
pub const SPECTRAL_TOL: f64 = 1e-10;
pub const COMMUTATION_TOL: f64 = 1e-10;
pub const PURITY_TOL: f64 = 1e-9;

/// Block-diagonal symplectic form on `n_modes` modes.
pub fn omega(n_modes: usize) -> DMatrix<f64> {
    let mut om = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        om[(2 * k, 2 * k + 1)] = 1.0;
        om[(2 * k + 1, 2 * k)] = -1.0;
    }
    om
}

/// Symplectic product `u . Omega . v` of two phase-space row vectors.
pub fn symplectic_product(u: &[f64], v: &[f64]) -> f64 {
    u.chunks(2)
        .zip(v.chunks(2))
        .map(|(a, b)| a[0] * b[1] - a[1] * b[0])
        .sum()
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Smallest eigenvalue of the Hermitian matrix `cov + (i/4) Omega`, computed
/// through its real symmetric embedding `[[A, -B], [B, A]]`.
pub fn uncertainty_min_eigenvalue(cov: &DMatrix<f64>) -> f64 {
    let n = cov.nrows();
    if n == 0 {
        return 0.0;
    }
    let b = omega(n / 2) * 0.25;
    let mut emb = DMatrix::zeros(2 * n, 2 * n);
    emb.view_mut((0, 0), (n, n)).copy_from(cov);
    emb.view_mut((n, n), (n, n)).copy_from(cov);
    emb.view_mut((0, n), (n, n)).copy_from(&(-&b));
    emb.view_mut((n, 0), (n, n)).copy_from(&b);
    let emb = symmetrize(&emb);
    emb.symmetric_eigenvalues().min()
}

/// Which quadrature of a mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadrature {
    X,
    P,
}

/// A point in phase space, `(x, p)` per mode.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint(pub Vec<f64>);

impl PhasePoint {
    pub fn new(coordinates: Vec<f64>) -> Self {
        Self(coordinates)
    }

    /// Point built from one complex amplitude `x + ip` per mode.
    pub fn from_amplitudes(alphas: &[Complex64]) -> Self {
        Self(alphas.iter().flat_map(|a| [a.re, a.im]).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Linear phase-space map plus displacement: `r -> S r + d`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticOp {
    matrix: DMatrix<f64>,
    displacement: DVector<f64>,
}

impl SymplecticOp {
    /// Checks `S Omega S^T = Omega` to 1e-12, scaled by the squared entry size.
    pub fn new(matrix: DMatrix<f64>, displacement: DVector<f64>) -> Result<Self> {
        let n = matrix.nrows();
        if matrix.ncols() != n || !n.is_multiple_of(2) {
            return Err(Error::ShapeMismatch(format!(
                "symplectic matrix must be square with even size, got {}x{}",
                n,
                matrix.ncols()
            )));
        }
        if displacement.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: displacement.len(),
            });
        }
        let om = omega(n / 2);
        let dev = max_abs(&(&matrix * &om * matrix.transpose() - &om));
        let scale = max_abs(&matrix).max(1.0).powi(2);
        if dev > SYMMETRY_TOL * scale {
            return Err(Error::NotSymplectic(dev));
        }
        Ok(Self {
            matrix,
            displacement,
        })
    }

    pub fn linear(matrix: DMatrix<f64>) -> Result<Self> {
        let n = matrix.nrows();
        Self::new(matrix, DVector::zeros(n))
    }

    pub fn identity(n_modes: usize) -> Self {
        Self {
            matrix: DMatrix::identity(2 * n_modes, 2 * n_modes),
            displacement: DVector::zeros(2 * n_modes),
        }
    }

    /// Two-mode squeezer with squeezing `r`; acting on vacuum it yields the
    /// two-mode squeezed state with `mu = tanh r` and positive x-correlation.
    pub fn two_mode_squeeze(r: f64) -> Self {
        let (c, s) = (r.cosh(), r.sinh());
        #[rustfmt::skip]
        let m = DMatrix::from_row_slice(4, 4, &[
            c, 0.0, s, 0.0,
            0.0, c, 0.0, -s,
            s, 0.0, c, 0.0,
            0.0, -s, 0.0, c,
        ]);
        Self {
            matrix: m,
            displacement: DVector::zeros(4),
        }
    }

    /// Single-mode phase rotation `a -> a e^{-i theta}`.
    pub fn phase_rotation(theta: f64) -> Self {
        let (c, s) = (theta.cos(), theta.sin());
        Self {
            matrix: DMatrix::from_row_slice(2, 2, &[c, s, -s, c]),
            displacement: DVector::zeros(2),
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn displacement(&self) -> &DVector<f64> {
        &self.displacement
    }

    pub fn n_modes(&self) -> usize {
        self.matrix.nrows() / 2
    }

    pub fn inverse(&self) -> Self {
        // S^{-1} = -Omega S^T Omega for symplectic S.
        let om = omega(self.n_modes());
        let inv = -(&om * self.matrix.transpose() * &om);
        let d = -(&inv * &self.displacement);
        Self {
            matrix: inv,
            displacement: d,
        }
    }
}

/// Mean vector and covariance matrix over labelled modes.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    labels: Vec<String>,
    mean: DVector<f64>,
    covariance: DMatrix<f64>,
}

impl GaussianState {
    /// Validates symmetry, the uncertainty relation and label uniqueness.
    pub fn new(labels: Vec<String>, mean: DVector<f64>, covariance: DMatrix<f64>) -> Result<Self> {
        check_labels(&labels)?;
        let dim = 2 * labels.len();
        if mean.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: mean.len(),
            });
        }
        if covariance.nrows() != dim || covariance.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: covariance.nrows(),
            });
        }
        let asym = max_abs(&(&covariance - covariance.transpose()));
        if asym > SYMMETRY_TOL * max_abs(&covariance).max(1.0) {
            return Err(Error::NotSymmetric(asym));
        }
        let covariance = symmetrize(&covariance);
        let min_eig = uncertainty_min_eigenvalue(&covariance);
        if min_eig < -SPECTRAL_TOL * max_abs(&covariance).max(1.0) {
            return Err(Error::UncertaintyViolated(min_eig));
        }
        Ok(Self {
            labels,
            mean,
            covariance,
        })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    pub fn n_modes(&self) -> usize {
        self.labels.len()
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownMode(label.to_string()))
    }

    /// 2x2 covariance block of one mode.
    pub fn mode_covariance(&self, label: &str) -> Result<DMatrix<f64>> {
        let k = self.index_of(label)?;
        Ok(self.covariance.view((2 * k, 2 * k), (2, 2)).into_owned())
    }

    /// `(x, p)` centre of one mode.
    pub fn mode_mean(&self, label: &str) -> Result<[f64; 2]> {
        let k = self.index_of(label)?;
        Ok([self.mean[2 * k], self.mean[2 * k + 1]])
    }

    /// Same state with new labels, in order.
    pub fn relabel(&self, labels: Vec<String>) -> Result<Self> {
        check_labels(&labels)?;
        if labels.len() != self.labels.len() {
            return Err(Error::DimensionMismatch {
                expected: self.labels.len(),
                actual: labels.len(),
            });
        }
        Ok(Self {
            labels,
            ..self.clone()
        })
    }

    /// Tensor product, `self` modes first.
    pub fn tensor(&self, other: &GaussianState) -> Result<Self> {
        let mut labels = self.labels.clone();
        labels.extend(other.labels.iter().cloned());
        check_labels(&labels)?;
        let (n, m) = (self.mean.len(), other.mean.len());
        let mut mean = DVector::zeros(n + m);
        mean.rows_mut(0, n).copy_from(&self.mean);
        mean.rows_mut(n, m).copy_from(&other.mean);
        let mut cov = DMatrix::zeros(n + m, n + m);
        cov.view_mut((0, 0), (n, n)).copy_from(&self.covariance);
        cov.view_mut((n, n), (m, m)).copy_from(&other.covariance);
        Ok(Self {
            labels,
            mean,
            covariance: cov,
        })
    }

    /// Reorders modes to match `order`, which must be a permutation of the labels.
    pub fn reorder(&self, order: &[&str]) -> Result<Self> {
        if order.len() != self.n_modes() {
            return Err(Error::DimensionMismatch {
                expected: self.n_modes(),
                actual: order.len(),
            });
        }
        let idx: Vec<usize> = order
            .iter()
            .map(|l| self.index_of(l))
            .collect::<Result<_>>()?;
        let q = quadrature_indices(&idx);
        let labels: Vec<String> = order.iter().map(|s| s.to_string()).collect();
        check_labels(&labels)?;
        Ok(Self {
            labels,
            mean: DVector::from_iterator(q.len(), q.iter().map(|&i| self.mean[i])),
            covariance: DMatrix::from_fn(q.len(), q.len(), |i, j| self.covariance[(q[i], q[j])]),
        })
    }
}

fn check_labels(labels: &[String]) -> Result<()> {
    let mut seen = HashSet::new();
    for l in labels {
        if !seen.insert(l.as_str()) {
            return Err(Error::DuplicateLabel(l.clone()));
        }
    }
    Ok(())
}

fn quadrature_indices(modes: &[usize]) -> Vec<usize> {
    modes.iter().flat_map(|&k| [2 * k, 2 * k + 1]).collect()
}

fn owned_labels<S: AsRef<str>>(labels: &[S]) -> Vec<String> {
    labels.iter().map(|s| s.as_ref().to_string()).collect()
}

/// Vacuum on the given modes: zero mean, covariance `I/4`.
pub fn vacuum_state<S: AsRef<str>>(labels: &[S]) -> Result<GaussianState> {
    let labels = owned_labels(labels);
    check_labels(&labels)?;
    let dim = 2 * labels.len();
    Ok(GaussianState {
        labels,
        mean: DVector::zeros(dim),
        covariance: DMatrix::identity(dim, dim) * 0.25,
    })
}

/// Coherent state `|alpha>` on a single mode.
pub fn coherent_state(label: &str, alpha: Complex64) -> Result<GaussianState> {
    displace(&vacuum_state(&[label])?, label, alpha)
}

/// Thermal state with the given mean photon number.
pub fn thermal_state(label: &str, mean_photons: f64) -> Result<GaussianState> {
    if mean_photons.is_nan() || mean_photons < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "mean photon number must be non-negative, got {mean_photons}"
        )));
    }
    let var = (2.0 * mean_photons + 1.0) / 4.0;
    GaussianState::new(
        vec![label.to_string()],
        DVector::zeros(2),
        DMatrix::identity(2, 2) * var,
    )
}

/// Two-mode squeezed vacuum `sqrt(1-mu^2) sum mu^n |n>|n>` (for `sign = +1`).
///
/// Per-mode variance `(1+mu^2)/(4(1-mu^2))`, `Cov(x_1, x_2) = sign mu/(2(1-mu^2))`
/// and `Cov(p_1, p_2) = -sign mu/(2(1-mu^2))`. `sign = -1` is the same state
/// with `mu -> -mu`.
pub fn two_mode_squeezed(mu: f64, sign: f64, labels: [&str; 2]) -> Result<GaussianState> {
    crate::error::check_mu(mu)?;
    if sign != 1.0 && sign != -1.0 {
        return Err(Error::InvalidParameter(format!(
            "sign must be +1 or -1, got {sign}"
        )));
    }
    let den = 1.0 - mu * mu;
    let var = (1.0 + mu * mu) / (4.0 * den);
    let c = sign * mu / (2.0 * den);
    #[rustfmt::skip]
    let cov = DMatrix::from_row_slice(4, 4, &[
        var, 0.0, c, 0.0,
        0.0, var, 0.0, -c,
        c, 0.0, var, 0.0,
        0.0, -c, 0.0, var,
    ]);
    GaussianState::new(owned_labels(&labels), DVector::zeros(4), cov)
}

/// Shifts the centre of `mode` by `alpha = x + ip`.
pub fn displace(state: &GaussianState, mode: &str, alpha: Complex64) -> Result<GaussianState> {
    let k = state.index_of(mode)?;
    let mut out = state.clone();
    out.mean[2 * k] += alpha.re;
    out.mean[2 * k + 1] += alpha.im;
    Ok(out)
}

/// Applies `op` to the ordered mode subset `modes`; other modes are untouched.
pub fn apply_symplectic<S: AsRef<str>>(
    state: &GaussianState,
    op: &SymplecticOp,
    modes: &[S],
) -> Result<GaussianState> {
    if op.n_modes() != modes.len() {
        return Err(Error::DimensionMismatch {
            expected: 2 * modes.len(),
            actual: op.matrix.nrows(),
        });
    }
    let idx: Vec<usize> = modes
        .iter()
        .map(|m| state.index_of(m.as_ref()))
        .collect::<Result<_>>()?;
    check_labels(&owned_labels(modes))?;
    let q = quadrature_indices(&idx);
    let n = state.mean.len();

    // Embed the op into the full space.
    let mut full = DMatrix::identity(n, n);
    let mut d = DVector::zeros(n);
    for (i, &qi) in q.iter().enumerate() {
        d[qi] = op.displacement[i];
        for (j, &qj) in q.iter().enumerate() {
            full[(qi, qj)] = op.matrix[(i, j)];
        }
    }
    let mean = &full * &state.mean + d;
    let cov = symmetrize(&(&full * &state.covariance * full.transpose()));
    Ok(GaussianState {
        labels: state.labels.clone(),
        mean,
        covariance: cov,
    })
}

/// Restriction to the modes in `keep`, in the given order.
pub fn partial_trace<S: AsRef<str>>(state: &GaussianState, keep: &[S]) -> Result<GaussianState> {
    if keep.is_empty() {
        return Err(Error::InvalidParameter(
            "partial trace must keep at least one mode".into(),
        ));
    }
    let labels = owned_labels(keep);
    check_labels(&labels)?;
    let idx: Vec<usize> = labels
        .iter()
        .map(|l| state.index_of(l))
        .collect::<Result<_>>()?;
    let q = quadrature_indices(&idx);
    Ok(GaussianState {
        labels,
        mean: DVector::from_iterator(q.len(), q.iter().map(|&i| state.mean[i])),
        covariance: DMatrix::from_fn(q.len(), q.len(), |i, j| state.covariance[(q[i], q[j])]),
    })
}

/// Precomputed evaluator for the normalized Wigner function of a state.
#[derive(Debug, Clone)]
pub struct WignerFunction {
    mean: DVector<f64>,
    precision: DMatrix<f64>,
    norm: f64,
}

impl WignerFunction {
    pub fn new(state: &GaussianState) -> Result<Self> {
        let n_modes = state.n_modes();
        let chol = state
            .covariance
            .clone()
            .cholesky()
            .ok_or(Error::SingularCovariance)?;
        let det: f64 = chol.l().diagonal().iter().map(|d| d * d).product();
        if det.is_nan() || det <= 0.0 || !det.is_finite() {
            return Err(Error::SingularCovariance);
        }
        Ok(Self {
            mean: state.mean.clone(),
            precision: chol.inverse(),
            norm: 1.0 / ((2.0 * PI).powi(n_modes as i32) * det.sqrt()),
        })
    }

    pub fn eval(&self, point: &[f64]) -> Result<f64> {
        if point.len() != self.mean.len() {
            return Err(Error::DimensionMismatch {
                expected: self.mean.len(),
                actual: point.len(),
            });
        }
        let d = DVector::from_column_slice(point) - &self.mean;
        let q = (d.transpose() * &self.precision * &d)[(0, 0)];
        Ok(self.norm * (-0.5 * q).exp())
    }
}

/// `W(r) = exp(-(r-m)^T Sigma^{-1} (r-m)/2) / ((2 pi)^M sqrt(det Sigma))`.
pub fn wigner_value(state: &GaussianState, point: &PhasePoint) -> Result<f64> {
    WignerFunction::new(state)?.eval(&point.0)
}

/// Photon statistics of a single mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeStats {
    pub mean_photons: f64,
    pub purity: f64,
}

/// Mean photon number `<X^2> + <P^2> - 1/2` and purity `1/sqrt(det(4 Sigma))`.
pub fn mode_stats(state: &GaussianState, mode: &str) -> Result<ModeStats> {
    let cov = state.mode_covariance(mode)?;
    let [x, p] = state.mode_mean(mode)?;
    let mean_photons = cov[(0, 0)] + cov[(1, 1)] + x * x + p * p - 0.5;
    let purity = 1.0 / (cov * 4.0).determinant().sqrt();
    Ok(ModeStats {
        mean_photons,
        purity,
    })
}

/// Global purity `Tr(rho^2) = 1/sqrt(det(4 Sigma))`.
pub fn purity(state: &GaussianState) -> f64 {
    if state.n_modes() == 0 {
        return 1.0;
    }
    1.0 / (&state.covariance * 4.0).determinant().sqrt()
}

/// `Tr(rho sigma)` for a pure reference `sigma`:
/// `exp(-d^T (S1+S2)^{-1} d / 2) / sqrt(det(2 (S1+S2)))`.
pub fn overlap_with_pure(state: &GaussianState, reference: &GaussianState) -> Result<f64> {
    if state.n_modes() != reference.n_modes() {
        return Err(Error::DimensionMismatch {
            expected: reference.n_modes(),
            actual: state.n_modes(),
        });
    }
    let pr = purity(reference);
    if (pr - 1.0).abs() > PURITY_TOL {
        return Err(Error::NotPure(pr));
    }
    Ok(gaussian_overlap(state, reference))
}

pub(crate) fn gaussian_overlap(a: &GaussianState, b: &GaussianState) -> f64 {
    let sum = &a.covariance + &b.covariance;
    let d = &a.mean - &b.mean;
    let inv = sum
        .clone()
        .try_inverse()
        .expect("sum of valid covariances is invertible");
    let q = (d.transpose() * inv * &d)[(0, 0)];
    (-0.5 * q).exp() / (sum * 2.0).determinant().sqrt()
}

/// Source of measurement outcomes.
pub enum Outcomes<'a> {
    /// Condition on these values, one per observable.
    Given(&'a [f64]),
    /// Draw from the joint Gaussian marginal of the observables.
    Sample(&'a mut dyn RngCore),
}

/// A mode of the post-measurement state that mixes measured and unmeasured
/// original modes. Coefficients are over the input state's quadratures.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualMode {
    pub label: String,
    pub x_coeffs: Vec<f64>,
    pub p_coeffs: Vec<f64>,
}

/// Result of an ideal joint homodyne measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub outcomes: Vec<f64>,
    /// State of the unmeasured modes: first the modes outside the
    /// observables' support (original labels, original order), then any
    /// [`ResidualMode`]s.
    pub posterior: GaussianState,
    pub removed_modes: Vec<String>,
    pub residual_modes: Vec<ResidualMode>,
}

/// Canonical coordinates adapted to a commuting observable set.
struct MeasurementBasis {
    observables: DMatrix<f64>,
    conjugates: DMatrix<f64>,
    /// Rows of kept coordinates: untouched quadratures then residual pairs.
    kept: DMatrix<f64>,
    support: Vec<usize>,
    untouched: Vec<usize>,
    residual: Vec<(Vec<f64>, Vec<f64>)>,
}

impl MeasurementBasis {
    fn build(state: &GaussianState, observables: &[Vec<f64>]) -> Result<Self> {
        let dim = 2 * state.n_modes();
        let k = observables.len();
        if k == 0 {
            return Err(Error::DegenerateObservables);
        }
        for c in observables {
            if c.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: c.len(),
                });
            }
        }
        let scale = observables
            .iter()
            .flat_map(|c| c.iter())
            .fold(0.0_f64, |a, v| a.max(v.abs()));
        if scale == 0.0 {
            return Err(Error::DegenerateObservables);
        }
        for i in 0..k {
            for j in (i + 1)..k {
                let w = symplectic_product(&observables[i], &observables[j]);
                if w.abs() > COMMUTATION_TOL * scale * scale {
                    return Err(Error::NonCommuting(i, j));
                }
            }
        }
        let c = DMatrix::from_fn(k, dim, |i, j| observables[i][j]);
        let gram = &c * c.transpose();
        let gram_inv = {
            let eig = gram.clone().symmetric_eigenvalues();
            if eig.min() <= 1e-12 * eig.max() {
                return Err(Error::DegenerateObservables);
            }
            gram.try_inverse().ok_or(Error::DegenerateObservables)?
        };
        // Conjugates with omega(c_i, d_j) = delta_ij and omega(d_i, d_j) = 0.
        let om = omega(state.n_modes());
        let d = gram_inv * &c * &om;

        let tiny = 1e-15 * scale;
        let support: Vec<usize> = (0..state.n_modes())
            .filter(|&m| {
                (0..k).any(|i| c[(i, 2 * m)].abs() > tiny || c[(i, 2 * m + 1)].abs() > tiny)
            })
            .collect();
        let untouched: Vec<usize> = (0..state.n_modes())
            .filter(|m| !support.contains(m))
            .collect();

        let pairs: Vec<(Vec<f64>, Vec<f64>)> = (0..k).map(|i| (row(&c, i), row(&d, i))).collect();
        let n_residual = support.len() - k;
        let residual = residual_pairs(&support, dim, &pairs, n_residual);

        let kept_rows = 2 * untouched.len() + 2 * residual.len();
        let mut kept = DMatrix::zeros(kept_rows, dim);
        let mut r = 0;
        for &m in &untouched {
            kept[(r, 2 * m)] = 1.0;
            kept[(r + 1, 2 * m + 1)] = 1.0;
            r += 2;
        }
        for (u, w) in &residual {
            for j in 0..dim {
                kept[(r, j)] = u[j];
                kept[(r + 1, j)] = w[j];
            }
            r += 2;
        }
        Ok(Self {
            observables: c,
            conjugates: d,
            kept,
            support,
            untouched,
            residual,
        })
    }
}

fn row(m: &DMatrix<f64>, i: usize) -> Vec<f64> {
    m.row(i).iter().copied().collect()
}

/// Removes the components of `v` along the canonical pairs `(e_j, f_j)`.
fn project_out(v: &mut [f64], pairs: &[(Vec<f64>, Vec<f64>)]) {
    for (e, f) in pairs {
        let a = symplectic_product(v, f);
        let b = symplectic_product(v, e);
        for j in 0..v.len() {
            v[j] -= a * e[j] - b * f[j];
        }
    }
}

/// Symplectic Gram-Schmidt on the complement of `pairs` inside the support.
fn residual_pairs(
    support: &[usize],
    dim: usize,
    pairs: &[(Vec<f64>, Vec<f64>)],
    count: usize,
) -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut cands: Vec<Vec<f64>> = support
        .iter()
        .flat_map(|&m| [2 * m, 2 * m + 1])
        .map(|q| {
            let mut v = vec![0.0; dim];
            v[q] = 1.0;
            project_out(&mut v, pairs);
            v
        })
        .collect();
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let (ui, _) =
            cands
                .iter()
                .enumerate()
                .map(|(i, v)| (i, norm(v)))
                .fold(
                    (0, -1.0),
                    |best, cur| if cur.1 > best.1 { cur } else { best },
                );
        let mut u = cands.swap_remove(ui);
        let nu = norm(&u);
        u.iter_mut().for_each(|x| *x /= nu);
        let (wi, wval) = cands
            .iter()
            .enumerate()
            .map(|(i, v)| (i, symplectic_product(&u, v)))
            .fold((0usize, 0.0f64), |best, cur| {
                if cur.1.abs() > best.1.abs() {
                    cur
                } else {
                    best
                }
            });
        let mut w = cands.swap_remove(wi);
        w.iter_mut().for_each(|x| *x /= wval);
        let pair = vec![(u, w)];
        for v in cands.iter_mut() {
            project_out(v, &pair);
        }
        out.extend(pair);
    }
    out
}

/// Joint homodyne measurement of commuting linear quadrature observables.
///
/// Each observable is a coefficient vector over the state's `2M` quadratures.
/// The measured degrees of freedom and their conjugates are removed; the
/// posterior is the Schur-complement conditional of the remaining canonical
/// coordinates, whose covariance does not depend on the outcomes.
pub fn measure_commuting_quadratures(
    state: &GaussianState,
    observables: &[Vec<f64>],
    outcomes: Outcomes<'_>,
) -> Result<Measurement> {
    let basis = MeasurementBasis::build(state, observables)?;
    let k = observables.len();
    let c = &basis.observables;
    let y_mean = c * &state.mean;
    let s_yy = symmetrize(&(c * &state.covariance * c.transpose()));
    let s_yy_chol = s_yy.clone().cholesky().ok_or(Error::SingularCovariance)?;

    let y = match outcomes {
        Outcomes::Given(v) => {
            if v.len() != k {
                return Err(Error::DimensionMismatch {
                    expected: k,
                    actual: v.len(),
                });
            }
            DVector::from_column_slice(v)
        }
        Outcomes::Sample(rng) => {
            let xi = DVector::from_fn(k, |_, _| {
                let z: f64 = StandardNormal.sample(rng);
                z
            });
            &y_mean + s_yy_chol.l() * xi
        }
    };

    let (mean, cov) = condition(state, &basis, &s_yy_chol, &y_mean, &y);

    let mut labels: Vec<String> = basis
        .untouched
        .iter()
        .map(|&m| state.labels[m].clone())
        .collect();
    let mut residual_modes = Vec::new();
    for (j, (u, w)) in basis.residual.iter().enumerate() {
        let mut label = format!("residual{j}");
        while labels.contains(&label) {
            label.push('\'');
        }
        labels.push(label.clone());
        residual_modes.push(ResidualMode {
            label,
            x_coeffs: u.clone(),
            p_coeffs: w.clone(),
        });
    }
    let posterior = GaussianState::new(labels, mean, cov)?;
    Ok(Measurement {
        outcomes: y.iter().copied().collect(),
        posterior,
        removed_modes: basis
            .support
            .iter()
            .map(|&m| state.labels[m].clone())
            .collect(),
        residual_modes,
    })
}

fn condition(
    state: &GaussianState,
    basis: &MeasurementBasis,
    s_yy_chol: &nalgebra::Cholesky<f64, nalgebra::Dyn>,
    y_mean: &DVector<f64>,
    y: &DVector<f64>,
) -> (DVector<f64>, DMatrix<f64>) {
    let kk = &basis.kept;
    let c = &basis.observables;
    let s_zy = kk * &state.covariance * c.transpose();
    let s_zz = kk * &state.covariance * kk.transpose();
    let gain = s_yy_chol.solve(&s_zy.transpose()).transpose();
    let mean = kk * &state.mean + &gain * (y - y_mean);
    let cov = symmetrize(&(s_zz - &gain * s_zy.transpose()));
    (mean, cov)
}

/// Full-mode post-measurement state for a finite-resolution homodyne.
///
/// Each measured canonical coordinate is left in a squeezed state with
/// variance `exp(-2 r)/4` centred on its outcome (its conjugate gets
/// `exp(2 r)/4`); the unmeasured coordinates carry the exact conditional
/// state. As `r` grows this approaches the projective post-measurement state
/// while staying a valid, non-singular Gaussian on the original modes.
pub fn regularized_post_measurement(
    state: &GaussianState,
    observables: &[Vec<f64>],
    outcomes: &[f64],
    resolution_squeezing: f64,
) -> Result<GaussianState> {
    let basis = MeasurementBasis::build(state, observables)?;
    let k = observables.len();
    if outcomes.len() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            actual: outcomes.len(),
        });
    }
    let c = &basis.observables;
    let y_mean = c * &state.mean;
    let s_yy = symmetrize(&(c * &state.covariance * c.transpose()));
    let s_yy_chol = s_yy.cholesky().ok_or(Error::SingularCovariance)?;
    let y = DVector::from_column_slice(outcomes);
    let (z_mean, z_cov) = condition(state, &basis, &s_yy_chol, &y_mean, &y);

    let dim = state.mean.len();
    let zk = basis.kept.nrows();
    // New canonical coordinates: measured pairs first, then kept rows.
    let mut t = DMatrix::zeros(dim, dim);
    for i in 0..k {
        t.row_mut(2 * i).copy_from(&basis.observables.row(i));
        t.row_mut(2 * i + 1).copy_from(&basis.conjugates.row(i));
    }
    t.view_mut((2 * k, 0), (zk, dim)).copy_from(&basis.kept);

    let p_mean = &basis.conjugates * &state.mean;
    let mut new_mean = DVector::zeros(dim);
    let mut new_cov = DMatrix::zeros(dim, dim);
    let sq = (-2.0 * resolution_squeezing).exp() / 4.0;
    let anti = (2.0 * resolution_squeezing).exp() / 4.0;
    for i in 0..k {
        new_mean[2 * i] = outcomes[i];
        new_mean[2 * i + 1] = p_mean[i];
        new_cov[(2 * i, 2 * i)] = sq;
        new_cov[(2 * i + 1, 2 * i + 1)] = anti;
    }
    new_mean.rows_mut(2 * k, zk).copy_from(&z_mean);
    new_cov.view_mut((2 * k, 2 * k), (zk, zk)).copy_from(&z_cov);

    let t_inv = t.try_inverse().ok_or(Error::DegenerateObservables)?;
    let mean = &t_inv * new_mean;
    let cov = symmetrize(&(&t_inv * new_cov * t_inv.transpose()));
    GaussianState::new(state.labels.clone(), mean, cov)
}

/// Coefficient vector for a single quadrature of `mode`.
pub fn quadrature_observable(state: &GaussianState, mode: &str, q: Quadrature) -> Result<Vec<f64>> {
    let k = state.index_of(mode)?;
    let mut c = vec![0.0; 2 * state.n_modes()];
    c[2 * k + usize::from(q == Quadrature::P)] = 1.0;
    Ok(c)
}

/// Joint mean and covariance of linear observables `c_i . r`.
pub fn observable_moments(
    state: &GaussianState,
    observables: &[Vec<f64>],
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let dim = 2 * state.n_modes();
    for c in observables {
        if c.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: c.len(),
            });
        }
    }
    let c = DMatrix::from_fn(observables.len(), dim, |i, j| observables[i][j]);
    Ok((
        &c * &state.mean,
        symmetrize(&(&c * &state.covariance * c.transpose())),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn vacuum_conventions() {
        let v = vacuum_state(&["A"]).unwrap();
        assert_eq!(v.mean().as_slice(), &[0.0, 0.0]);
        assert_eq!(v.covariance(), &(DMatrix::identity(2, 2) * 0.25));
        let v2 = vacuum_state(&["A", "B"]).unwrap();
        assert_eq!(v2.covariance(), &(DMatrix::identity(4, 4) * 0.25));
        assert_eq!(
            vacuum_state(&["A", "A"]).unwrap_err(),
            Error::DuplicateLabel("A".into())
        );
    }

    #[test]
    fn tmss_entries() {
        let s = two_mode_squeezed(0.0, 1.0, ["E", "F"]).unwrap();
        assert_relative_eq!(
            s.covariance(),
            &(DMatrix::identity(4, 4) * 0.25),
            epsilon = 1e-15
        );

        let s = two_mode_squeezed(0.5, 1.0, ["E", "F"]).unwrap();
        assert_relative_eq!(s.covariance()[(0, 0)], 5.0 / 12.0, epsilon = 1e-12);
        assert_relative_eq!(s.covariance()[(0, 2)], 1.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(s.covariance()[(1, 3)], -1.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!((s.covariance() * 4.0).determinant(), 1.0, epsilon = 1e-12);

        assert!(matches!(
            two_mode_squeezed(1.0, 1.0, ["E", "F"]),
            Err(Error::MuOutOfRange(_))
        ));
        assert!(two_mode_squeezed(-0.1, 1.0, ["E", "F"]).is_err());
    }

    #[test]
    fn displacement_group() {
        let v = vacuum_state(&["A"]).unwrap();
        let d = displace(&v, "A", c(1.0, 0.5)).unwrap();
        assert_eq!(d.mean().as_slice(), &[1.0, 0.5]);
        assert_eq!(d.covariance(), v.covariance());
        assert_eq!(displace(&v, "A", c(0.0, 0.0)).unwrap(), v);
        let back = displace(&d, "A", c(-1.0, -0.5)).unwrap();
        assert_eq!(back, v);
        assert!(matches!(
            displace(&v, "Z", c(1.0, 0.0)),
            Err(Error::UnknownMode(_))
        ));
    }

    #[test]
    fn symplectic_application() {
        let v = vacuum_state(&["A", "B"]).unwrap();
        let id = apply_symplectic(&v, &SymplecticOp::identity(2), &["A", "B"]).unwrap();
        assert_eq!(id, v);

        for mu in [0.0, 0.3, 0.5, 0.9] {
            let op = SymplecticOp::two_mode_squeeze(f64::atanh(mu));
            let s = apply_symplectic(&v, &op, &["A", "B"]).unwrap();
            let t = two_mode_squeezed(mu, 1.0, ["A", "B"]).unwrap();
            assert_relative_eq!(s.covariance(), t.covariance(), epsilon = 1e-12);
        }

        let bad = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 2.0]);
        assert!(matches!(
            SymplecticOp::linear(bad),
            Err(Error::NotSymplectic(_))
        ));

        let op = SymplecticOp::identity(1);
        assert!(matches!(
            apply_symplectic(&v, &op, &["A", "B"]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn inverse_op_round_trip() {
        let op = SymplecticOp::two_mode_squeeze(0.7);
        let prod = op.matrix() * op.inverse().matrix();
        assert_relative_eq!(prod, DMatrix::identity(4, 4), epsilon = 1e-12);
    }

    #[test]
    fn uncertainty_is_enforced() {
        let squeezed_too_far = DMatrix::from_row_slice(2, 2, &[0.1, 0.0, 0.0, 0.1]);
        let r = GaussianState::new(vec!["A".into()], DVector::zeros(2), squeezed_too_far);
        assert!(matches!(r, Err(Error::UncertaintyViolated(_))));
    }

    #[test]
    fn single_mode_vacuum_measurement() {
        let v = vacuum_state(&["A"]).unwrap();
        let x = quadrature_observable(&v, "A", Quadrature::X).unwrap();
        let m =
            measure_commuting_quadratures(&v, std::slice::from_ref(&x), Outcomes::Given(&[0.3]))
                .unwrap();
        assert_eq!(m.posterior.n_modes(), 0);
        assert_eq!(m.removed_modes, vec!["A".to_string()]);
        let (mean, cov) = observable_moments(&v, &[x]).unwrap();
        assert_eq!(mean[0], 0.0);
        assert_relative_eq!(cov[(0, 0)], 0.25);
    }

    #[test]
    fn conditioning_on_separable_state_is_inert() {
        let s = two_mode_squeezed(0.0, 1.0, ["E", "F"]).unwrap();
        let x = quadrature_observable(&s, "E", Quadrature::X).unwrap();
        for y in [-2.0, 0.0, 1.3] {
            let m =
                measure_commuting_quadratures(&s, std::slice::from_ref(&x), Outcomes::Given(&[y]))
                    .unwrap();
            assert_relative_eq!(
                m.posterior.covariance(),
                &(DMatrix::identity(2, 2) * 0.25),
                epsilon = 1e-14
            );
            assert_relative_eq!(m.posterior.mean().norm(), 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn non_commuting_and_degenerate_observables_rejected() {
        let v = vacuum_state(&["A"]).unwrap();
        let x = quadrature_observable(&v, "A", Quadrature::X).unwrap();
        let p = quadrature_observable(&v, "A", Quadrature::P).unwrap();
        assert_eq!(
            measure_commuting_quadratures(&v, &[x.clone(), p], Outcomes::Given(&[0.0, 0.0]))
                .unwrap_err(),
            Error::NonCommuting(0, 1)
        );
        let v2 = vacuum_state(&["A", "B"]).unwrap();
        let xa = quadrature_observable(&v2, "A", Quadrature::X).unwrap();
        let twice: Vec<f64> = xa.iter().map(|v| 2.0 * v).collect();
        assert_eq!(
            measure_commuting_quadratures(&v2, &[xa, twice], Outcomes::Given(&[0.0, 0.0]))
                .unwrap_err(),
            Error::DegenerateObservables
        );
        assert_eq!(
            measure_commuting_quadratures(&v2, &[], Outcomes::Given(&[])).unwrap_err(),
            Error::DegenerateObservables
        );
    }

    #[test]
    fn sampled_and_given_outcomes_agree() {
        let s = two_mode_squeezed(0.6, 1.0, ["E", "F"]).unwrap();
        let x = quadrature_observable(&s, "E", Quadrature::X).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let sampled =
            measure_commuting_quadratures(&s, std::slice::from_ref(&x), Outcomes::Sample(&mut rng))
                .unwrap();
        let given =
            measure_commuting_quadratures(&s, &[x], Outcomes::Given(&sampled.outcomes)).unwrap();
        assert_eq!(sampled, given);
    }

    #[test]
    fn partial_measurement_of_support_creates_residual_mode() {
        // x_A + x_B on two modes leaves one mixed residual mode.
        let s = two_mode_squeezed(0.4, 1.0, ["A", "B"]).unwrap();
        let obs = vec![1.0, 0.0, 1.0, 0.0];
        let m =
            measure_commuting_quadratures(&s, std::slice::from_ref(&obs), Outcomes::Given(&[0.2]))
                .unwrap();
        assert_eq!(m.residual_modes.len(), 1);
        let r = &m.residual_modes[0];
        assert_relative_eq!(
            symplectic_product(&r.x_coeffs, &r.p_coeffs),
            1.0,
            epsilon = 1e-12
        );
        assert_relative_eq!(symplectic_product(&r.x_coeffs, &obs), 0.0, epsilon = 1e-12);
        assert_relative_eq!(symplectic_product(&r.p_coeffs, &obs), 0.0, epsilon = 1e-12);
        assert!(purity(&m.posterior) <= 1.0 + 1e-10);
    }

    #[test]
    fn wigner_values() {
        let v = vacuum_state(&["A"]).unwrap();
        assert_relative_eq!(
            wigner_value(&v, &PhasePoint::new(vec![0.0, 0.0])).unwrap(),
            2.0 / PI,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            wigner_value(&v, &PhasePoint::new(vec![1.0, 0.0])).unwrap(),
            2.0 / PI * (-2.0f64).exp(),
            epsilon = 1e-12
        );
        for mu in [0.0, 0.3, 0.8] {
            let s = two_mode_squeezed(mu, 1.0, ["A", "B"]).unwrap();
            assert_relative_eq!(
                wigner_value(&s, &PhasePoint::new(vec![0.0; 4])).unwrap(),
                4.0 / (PI * PI),
                epsilon = 1e-12
            );
        }
        assert!(matches!(
            wigner_value(&v, &PhasePoint::new(vec![0.0; 4])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn mode_statistics() {
        let v = vacuum_state(&["A"]).unwrap();
        let st = mode_stats(&v, "A").unwrap();
        assert_relative_eq!(st.mean_photons, 0.0, epsilon = 1e-15);
        assert_relative_eq!(st.purity, 1.0, epsilon = 1e-15);

        let s = two_mode_squeezed(0.5, 1.0, ["A", "B"]).unwrap();
        let st = mode_stats(&s, "B").unwrap();
        assert_relative_eq!(st.mean_photons, 1.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(st.purity, 0.6, epsilon = 1e-12);

        let coh = coherent_state("A", c(1.0, 0.0)).unwrap();
        let st = mode_stats(&coh, "A").unwrap();
        assert_relative_eq!(st.mean_photons, 1.0, epsilon = 1e-12);
        assert_relative_eq!(st.purity, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn overlaps() {
        let a = coherent_state("A", c(0.3, -0.7)).unwrap();
        assert_relative_eq!(overlap_with_pure(&a, &a).unwrap(), 1.0, epsilon = 1e-12);
        let v = vacuum_state(&["A"]).unwrap();
        let one = coherent_state("A", c(1.0, 0.0)).unwrap();
        assert_relative_eq!(
            overlap_with_pure(&v, &one).unwrap(),
            (-1.0f64).exp(),
            epsilon = 1e-12
        );
        let s = two_mode_squeezed(0.5, 1.0, ["A", "B"]).unwrap();
        let th = partial_trace(&s, &["A"]).unwrap();
        assert_relative_eq!(overlap_with_pure(&th, &v).unwrap(), 0.75, epsilon = 1e-12);
        assert!(matches!(overlap_with_pure(&v, &th), Err(Error::NotPure(_))));
    }

    #[test]
    fn partial_traces() {
        let v = vacuum_state(&["A", "B"]).unwrap();
        assert_eq!(
            partial_trace(&v, &["A"]).unwrap(),
            vacuum_state(&["A"]).unwrap()
        );
        let s = two_mode_squeezed(0.5, 1.0, ["A", "B"]).unwrap();
        let r = partial_trace(&s, &["B"]).unwrap();
        assert_relative_eq!(
            r.covariance(),
            &(DMatrix::identity(2, 2) * (5.0 / 12.0)),
            epsilon = 1e-12
        );
        assert_eq!(partial_trace(&s, &["A", "B"]).unwrap(), s);
        assert!(matches!(
            partial_trace(&s, &["C"]),
            Err(Error::UnknownMode(_))
        ));
    }

    #[test]
    fn reorder_and_tensor() {
        let a = coherent_state("A", c(1.0, 2.0)).unwrap();
        let b = vacuum_state(&["B"]).unwrap();
        let ab = a.tensor(&b).unwrap();
        let ba = ab.reorder(&["B", "A"]).unwrap();
        assert_eq!(ba.mode_mean("A").unwrap(), [1.0, 2.0]);
        assert_eq!(ba.labels(), &["B".to_string(), "A".to_string()]);
        assert!(a.tensor(&a).is_err());
    }
}
