//! Truncated Fock-space states for one or two modes.
//!
//! This backend shares no code with [`crate::gaussian`]; it works directly
//! with photon-number amplitudes and ladder-operator matrix elements and is
//! used as the brute-force oracle for the Gaussian engine.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{check_mu, Error, Result};

/// Default cutoff for `mu <= 0.8`.
pub const DEFAULT_CUTOFF: usize = 60;

/// Largest tolerated norm loss when displacing a truncated state.
pub const DISPLACEMENT_LOSS_LIMIT: f64 = 1e-6;

/// Pure state on one or two modes, each truncated at `cutoff` photons.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    cutoff: usize,
    modes: usize,
    amplitudes: Vec<Complex64>,
}

impl FockVector {
    pub fn new(cutoff: usize, modes: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if cutoff < 1 {
            return Err(Error::InvalidParameter("cutoff must be at least 1".into()));
        }
        if !(1..=2).contains(&modes) {
            return Err(Error::InvalidParameter(format!(
                "Fock oracle supports 1 or 2 modes, got {modes}"
            )));
        }
        let len = (cutoff + 1).pow(modes as u32);
        if amplitudes.len() != len {
            return Err(Error::DimensionMismatch {
                expected: len,
                actual: amplitudes.len(),
            });
        }
        let fv = Self {
            cutoff,
            modes,
            amplitudes,
        };
        if fv.norm_sqr() > 1.0 + 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "amplitudes have squared norm {} > 1",
                fv.norm_sqr()
            )));
        }
        Ok(fv)
    }

    pub fn vacuum(modes: usize, cutoff: usize) -> Result<Self> {
        let len = (cutoff + 1).pow(modes as u32);
        let mut amps = vec![Complex64::new(0.0, 0.0); len];
        if let Some(a) = amps.first_mut() {
            *a = Complex64::new(1.0, 0.0);
        }
        Self::new(cutoff, modes, amps)
    }

    /// Product of two single-mode states with the same cutoff.
    pub fn product(a: &FockVector, b: &FockVector) -> Result<Self> {
        if a.modes != 1 || b.modes != 1 || a.cutoff != b.cutoff {
            return Err(Error::ShapeMismatch(
                "product needs two single-mode states with equal cutoff".into(),
            ));
        }
        let amps = a
            .amplitudes
            .iter()
            .flat_map(|x| b.amplitudes.iter().map(move |y| x * y))
            .collect();
        Self::new(a.cutoff, 2, amps)
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Amplitude for the photon-number tuple `n` (one entry per mode).
    pub fn amplitude(&self, n: &[usize]) -> Complex64 {
        assert_eq!(n.len(), self.modes, "index arity must match mode count");
        if n.iter().any(|&k| k > self.cutoff) {
            return Complex64::new(0.0, 0.0);
        }
        self.amplitudes[self.flat(n)]
    }

    fn flat(&self, n: &[usize]) -> usize {
        n.iter().fold(0, |acc, &k| acc * (self.cutoff + 1) + k)
    }

    fn unflat(&self, mut idx: usize) -> [usize; 2] {
        let d = self.cutoff + 1;
        if self.modes == 1 {
            [idx, 0]
        } else {
            let b = idx % d;
            idx /= d;
            [idx, b]
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Probability mass lost to the cutoff, `1 - sum |amplitude|^2`.
    pub fn truncation_loss(&self) -> f64 {
        (1.0 - self.norm_sqr()).max(0.0)
    }

    fn as_matrix(&self) -> DMatrix<Complex64> {
        let d = self.cutoff + 1;
        if self.modes == 1 {
            DMatrix::from_column_slice(d, 1, &self.amplitudes)
        } else {
            DMatrix::from_row_slice(d, d, &self.amplitudes)
        }
    }
}

/// `sqrt(1-mu^2) sum_{n<=N} mu^n |n>|n>`.
pub fn tmss_fock(mu: f64, cutoff: usize) -> Result<FockVector> {
    check_mu(mu)?;
    let d = cutoff + 1;
    let mut amps = vec![Complex64::new(0.0, 0.0); d * d];
    let mut a = (1.0 - mu * mu).sqrt();
    for n in 0..=cutoff {
        amps[n * d + n] = Complex64::new(a, 0.0);
        a *= mu;
    }
    FockVector::new(cutoff, 2, amps)
}

/// `e^{-|alpha|^2/2} sum alpha^n / sqrt(n!) |n>`.
pub fn coherent_fock(alpha: Complex64, cutoff: usize) -> Result<FockVector> {
    if alpha.norm_sqr() > cutoff as f64 / 4.0 {
        log::warn!(
            "coherent amplitude |alpha|^2 = {} is not small against cutoff {}",
            alpha.norm_sqr(),
            cutoff
        );
    }
    let mut amps = Vec::with_capacity(cutoff + 1);
    let mut a = Complex64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    amps.push(a);
    for n in 1..=cutoff {
        a = a * alpha / (n as f64).sqrt();
        amps.push(a);
    }
    FockVector::new(cutoff, 1, amps)
}

/// Marginal photon-number distribution of `mode` (0 or 1).
pub fn photon_number_distribution(state: &FockVector, mode: usize) -> Result<Vec<f64>> {
    if mode >= state.modes {
        return Err(Error::UnknownMode(format!("index {mode}")));
    }
    let mut p = vec![0.0; state.cutoff + 1];
    for (i, a) in state.amplitudes.iter().enumerate() {
        let n = state.unflat(i);
        p[n[mode]] += a.norm_sqr();
    }
    Ok(p)
}

/// Joint photon-number distribution of a two-mode state, `P[n_a][n_b]`.
pub fn joint_photon_distribution(state: &FockVector) -> Result<Vec<Vec<f64>>> {
    if state.modes != 2 {
        return Err(Error::ShapeMismatch(
            "joint distribution needs two modes".into(),
        ));
    }
    let d = state.cutoff + 1;
    let mut p = vec![vec![0.0; d]; d];
    for (i, a) in state.amplitudes.iter().enumerate() {
        let [na, nb] = state.unflat(i);
        p[na][nb] += a.norm_sqr();
    }
    Ok(p)
}

/// First and second quadrature moments of the renormalized truncated state.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureMoments {
    /// `<r_i>` ordered `(x_1, p_1, ...)`.
    pub mean: DVector<f64>,
    /// Symmetrized covariance `(<r_i r_j + r_j r_i>)/2 - <r_i><r_j>`.
    pub covariance: DMatrix<f64>,
    pub truncation_loss: f64,
}

/// `a_mode |psi>` on the truncated basis.
fn lower(state: &FockVector, mode: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); state.amplitudes.len()];
    for (i, a) in state.amplitudes.iter().enumerate() {
        let mut n = state.unflat(i);
        if n[mode] == 0 {
            continue;
        }
        let f = (n[mode] as f64).sqrt();
        n[mode] -= 1;
        out[state.flat(&n[..state.modes])] += a * f;
    }
    out
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Moments via `X = (a + a^dag)/2`, `P = (a - a^dag)/(2i)`.
///
/// Only lowering operators are applied to the state, so no amplitude is lost
/// above the cutoff: `<a_i a_j>` and `<a_i^dag a_j>` are inner products of
/// lowered vectors and the rest follows from the commutator.
pub fn quadrature_moments(state: &FockVector) -> QuadratureMoments {
    let m = state.modes;
    let norm = state.norm_sqr();
    let psi = &state.amplitudes;
    let lowered: Vec<Vec<Complex64>> = (0..m).map(|k| lower(state, k)).collect();
    let a_mean: Vec<Complex64> = (0..m).map(|k| inner(psi, &lowered[k]) / norm).collect();
    // <a_i a_j> = <psi| a_i a_j psi>
    let aa = |i: usize, j: usize| -> Complex64 {
        let tmp = FockVector {
            cutoff: state.cutoff,
            modes: m,
            amplitudes: lowered[j].clone(),
        };
        inner(psi, &lower(&tmp, i)) / norm
    };
    // <a_i^dag a_j> = <a_i psi | a_j psi>
    let ada = |i: usize, j: usize| -> Complex64 { inner(&lowered[i], &lowered[j]) / norm };

    // r = u a + v a^dag
    let coeffs = |q: usize| -> (Complex64, Complex64) {
        if q.is_multiple_of(2) {
            (Complex64::new(0.5, 0.0), Complex64::new(0.5, 0.0))
        } else {
            (Complex64::new(0.0, -0.5), Complex64::new(0.0, 0.5))
        }
    };

    let dim = 2 * m;
    let mut mean = DVector::zeros(dim);
    for q in 0..dim {
        let (u, v) = coeffs(q);
        let k = q / 2;
        mean[q] = (u * a_mean[k] + v * a_mean[k].conj()).re;
    }
    let mut cov = DMatrix::zeros(dim, dim);
    for qi in 0..dim {
        for qj in qi..dim {
            let (ui, vi) = coeffs(qi);
            let (uj, vj) = coeffs(qj);
            let (i, j) = (qi / 2, qj / 2);
            let a_ij = aa(i, j);
            let ad_a_ij = ada(i, j);
            // <a_i a_j^dag> = <a_j^dag a_i> + delta_ij
            let a_adj = ada(j, i) + if i == j { 1.0 } else { 0.0 };
            // <a_i^dag a_j^dag> = conj(<a_j a_i>)
            let ad_ad = aa(j, i).conj();
            let second = ui * uj * a_ij + ui * vj * a_adj + vi * uj * ad_a_ij + vi * vj * ad_ad;
            let c = second.re - mean[qi] * mean[qj];
            cov[(qi, qj)] = c;
            cov[(qj, qi)] = c;
        }
    }
    QuadratureMoments {
        mean,
        covariance: cov,
        truncation_loss: state.truncation_loss(),
    }
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

/// Generalized Laguerre polynomials `L_j^{(k)}(x)` for `j = 0..=n`.
fn laguerre_row(n: usize, k: usize, x: f64) -> Vec<f64> {
    let k = k as f64;
    let mut out = Vec::with_capacity(n + 1);
    out.push(1.0);
    if n >= 1 {
        out.push(1.0 + k - x);
    }
    for j in 1..n {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + k - x) * out[j] - (jf + k) * out[j - 1]) / (jf + 1.0);
        out.push(next);
    }
    out
}

/// Matrix elements `<m|D(alpha)|n>` for `m <= rows-1`, `n <= cols-1`,
/// from the associated-Laguerre closed form.
pub fn displacement_matrix(alpha: Complex64, rows: usize, cols: usize) -> DMatrix<Complex64> {
    let x = alpha.norm_sqr();
    if x == 0.0 {
        return DMatrix::from_fn(rows, cols, |i, j| {
            Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0)
        });
    }
    let lf = ln_factorials(rows.max(cols));
    let r = alpha.norm();
    let phase = alpha / r;
    let damp = -x / 2.0;
    let mut out = DMatrix::from_element(rows, cols, Complex64::new(0.0, 0.0));
    // Group by |m - n| so each Laguerre row is computed once.
    for diff in 0..rows.max(cols) {
        let lag = laguerre_row(rows.max(cols), diff, x);
        for low in 0..rows.max(cols) {
            let high = low + diff;
            let mag_ln = 0.5 * (lf[low] - lf.get(high).copied().unwrap_or(f64::INFINITY))
                + diff as f64 * r.ln()
                + damp;
            if !mag_ln.is_finite() {
                continue;
            }
            let mag = mag_ln.exp() * lag[low];
            if high < rows && low < cols {
                // m = high >= n = low
                out[(high, low)] = phase.powu(diff as u32) * mag;
            }
            if diff > 0 && low < rows && high < cols {
                // m = low < n = high
                out[(low, high)] = (-phase.conj()).powu(diff as u32) * mag;
            }
        }
    }
    out
}

fn padded_rows(cutoff: usize, alpha: Complex64) -> usize {
    let a = alpha.norm();
    cutoff + 1 + (40.0 + 12.0 * a + 4.0 * a * a).ceil() as usize
}

/// `D(-alpha)` applied to each mode, returned as a matrix (or column for one mode).
fn displaced_back(state: &FockVector, alphas: &[Option<Complex64>]) -> Result<DMatrix<Complex64>> {
    let d = state.cutoff + 1;
    let psi = state.as_matrix();
    let op = |a: Option<Complex64>| -> DMatrix<Complex64> {
        match a {
            Some(a) => displacement_matrix(-a, padded_rows(state.cutoff, a), d),
            None => DMatrix::from_fn(d, d, |i, j| {
                Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0)
            }),
        }
    };
    let phi = if state.modes == 1 {
        op(alphas[0]) * psi
    } else {
        op(alphas[0]) * psi * op(alphas[1]).transpose()
    };
    let norm = state.norm_sqr();
    let kept: f64 = phi.iter().map(|c| c.norm_sqr()).sum();
    let loss = (norm - kept) / norm;
    if loss > DISPLACEMENT_LOSS_LIMIT {
        return Err(Error::Truncation {
            loss,
            limit: DISPLACEMENT_LOSS_LIMIT,
        });
    }
    Ok(phi)
}

fn parity_sum(phi: &DMatrix<Complex64>, norm: f64, sign_rows: bool, sign_cols: bool) -> f64 {
    let mut s = 0.0;
    for j in 0..phi.ncols() {
        for i in 0..phi.nrows() {
            let mut w = phi[(i, j)].norm_sqr();
            if sign_rows && i % 2 == 1 {
                w = -w;
            }
            if sign_cols && j % 2 == 1 {
                w = -w;
            }
            s += w;
        }
    }
    s / norm
}

/// `<D(alpha) (-1)^N D(alpha)^dag>` with one displacement per mode, taken
/// from `point` as `(x, p)` pairs with `alpha = x + ip`.
pub fn displaced_parity(state: &FockVector, point: &crate::gaussian::PhasePoint) -> Result<f64> {
    if point.len() != 2 * state.modes {
        return Err(Error::DimensionMismatch {
            expected: 2 * state.modes,
            actual: point.len(),
        });
    }
    let alphas: Vec<Option<Complex64>> = point
        .0
        .chunks(2)
        .map(|c| Some(Complex64::new(c[0], c[1])))
        .collect();
    let phi = displaced_back(state, &alphas)?;
    Ok(parity_sum(&phi, state.norm_sqr(), true, state.modes == 2))
}

/// Displaced parity of a single mode of a (possibly two-mode) state, i.e. of
/// its reduced density operator.
pub fn displaced_parity_mode(state: &FockVector, mode: usize, alpha: Complex64) -> Result<f64> {
    if mode >= state.modes {
        return Err(Error::UnknownMode(format!("index {mode}")));
    }
    let mut alphas = vec![None; state.modes];
    alphas[mode] = Some(alpha);
    let phi = displaced_back(state, &alphas)?;
    Ok(parity_sum(&phi, state.norm_sqr(), mode == 0, mode == 1))
}

/// `|<a|b>|^2`.
pub fn overlap_fock(a: &FockVector, b: &FockVector) -> Result<f64> {
    if a.cutoff != b.cutoff || a.modes != b.modes {
        return Err(Error::ShapeMismatch(format!(
            "cutoff/modes {}x{} vs {}x{}",
            a.cutoff, a.modes, b.cutoff, b.modes
        )));
    }
    Ok(inner(&a.amplitudes, &b.amplitudes).norm_sqr())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::PhasePoint;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn tmss_amplitudes() {
        let v = tmss_fock(0.0, 5).unwrap();
        assert_eq!(v.amplitude(&[0, 0]), c(1.0, 0.0));
        assert_eq!(v.norm_sqr(), 1.0);

        let s = tmss_fock(0.5, 2).unwrap();
        let diag: Vec<f64> = (0..=2).map(|n| s.amplitude(&[n, n]).re).collect();
        assert_relative_eq!(diag[0], 0.866025, epsilon = 1e-6);
        assert_relative_eq!(diag[1], 0.433013, epsilon = 1e-6);
        assert_relative_eq!(diag[2], 0.216506, epsilon = 1e-6);
        assert_eq!(s.amplitude(&[0, 1]), c(0.0, 0.0));

        let s = tmss_fock(0.5, 10).unwrap();
        assert_relative_eq!(s.truncation_loss(), 0.5f64.powi(22), epsilon = 1e-12);
        assert!(matches!(tmss_fock(1.0, 4), Err(Error::MuOutOfRange(_))));
    }

    #[test]
    fn coherent_amplitudes() {
        assert_eq!(
            coherent_fock(c(0.0, 0.0), 4).unwrap(),
            FockVector::vacuum(1, 4).unwrap()
        );
        let a = coherent_fock(c(1.0, 0.0), 20).unwrap();
        let p = photon_number_distribution(&a, 0).unwrap();
        let mean: f64 = p.iter().enumerate().map(|(n, q)| n as f64 * q).sum();
        assert_relative_eq!(mean, 1.0, epsilon = 1e-10);
        let vac = FockVector::vacuum(1, 20).unwrap();
        assert_relative_eq!(
            overlap_fock(&vac, &a).unwrap(),
            (-1.0f64).exp(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn photon_distributions() {
        let mu = 0.5f64.sqrt();
        let s = tmss_fock(mu, 40).unwrap();
        let p = photon_number_distribution(&s, 0).unwrap();
        assert_relative_eq!(p[0], 0.5, epsilon = 1e-12);
        assert_relative_eq!(p[1], 0.25, epsilon = 1e-12);
        assert_relative_eq!(p[2], 0.125, epsilon = 1e-12);
        let joint = joint_photon_distribution(&s).unwrap();
        for (na, row) in joint.iter().enumerate() {
            for (nb, q) in row.iter().enumerate() {
                if na != nb {
                    assert_eq!(*q, 0.0);
                }
            }
        }
        let vac = FockVector::vacuum(2, 3).unwrap();
        assert_eq!(photon_number_distribution(&vac, 1).unwrap()[0], 1.0);
        assert!(photon_number_distribution(&vac, 2).is_err());
    }

    #[test]
    fn moments() {
        let vac = FockVector::vacuum(1, 5).unwrap();
        let m = quadrature_moments(&vac);
        assert_relative_eq!(m.covariance[(0, 0)], 0.25, epsilon = 1e-15);
        assert_relative_eq!(m.covariance[(1, 1)], 0.25, epsilon = 1e-15);

        let a = coherent_fock(c(1.0, 0.0), 30).unwrap();
        let m = quadrature_moments(&a);
        assert_relative_eq!(m.mean[0], 1.0, epsilon = 1e-10);
        assert_relative_eq!(m.covariance[(0, 0)], 0.25, epsilon = 1e-9);

        let s = tmss_fock(0.5, 60).unwrap();
        let m = quadrature_moments(&s);
        assert_relative_eq!(m.covariance[(0, 2)], 1.0 / 3.0, epsilon = 1e-10);
        assert_relative_eq!(m.covariance[(1, 3)], -1.0 / 3.0, epsilon = 1e-10);
    }

    #[test]
    fn displacement_matrix_builds_coherent_states() {
        let alpha = c(0.8, -0.4);
        let d = displacement_matrix(alpha, 40, 40);
        let coh = coherent_fock(alpha, 39).unwrap();
        for n in 0..30 {
            let diff = (d[(n, 0)] - coh.amplitudes()[n]).norm();
            assert!(diff < 1e-12, "n={n} diff={diff}");
        }
        // D(alpha) D(-alpha) = 1 on the low corner.
        let prod = displacement_matrix(alpha, 40, 80) * displacement_matrix(-alpha, 80, 40);
        for i in 0..20 {
            for j in 0..20 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((prod[(i, j)] - c(expect, 0.0)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn parity_values() {
        let vac = FockVector::vacuum(1, 10).unwrap();
        assert_relative_eq!(
            displaced_parity(&vac, &PhasePoint::new(vec![0.0, 0.0])).unwrap(),
            1.0,
            epsilon = 1e-14
        );
        let s = tmss_fock(0.5f64.sqrt(), 80).unwrap();
        assert_relative_eq!(
            displaced_parity_mode(&s, 0, c(0.0, 0.0)).unwrap(),
            1.0 / 3.0,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            displaced_parity(&s, &PhasePoint::new(vec![0.0; 4])).unwrap(),
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn large_displacement_is_padded() {
        // A state at the cutoff displaced far away keeps its norm in the padded space.
        let mut amps = vec![c(0.0, 0.0); 11];
        amps[10] = c(1.0, 0.0);
        let top = FockVector::new(10, 1, amps).unwrap();
        let v = displaced_parity(&top, &PhasePoint::new(vec![12.0, 0.0])).unwrap();
        assert!(v.abs() < 1e-12);
        assert!(displaced_parity(&top, &PhasePoint::new(vec![0.0; 4])).is_err());
    }

    #[test]
    fn overlaps() {
        let s = tmss_fock(0.5, 60).unwrap();
        assert_relative_eq!(overlap_fock(&s, &s).unwrap(), 1.0, epsilon = 1e-12);
        // TMSS(-mu): alternate the sign of odd amplitudes.
        let d = s.cutoff() + 1;
        let flipped: Vec<Complex64> = s
            .amplitudes()
            .iter()
            .enumerate()
            .map(|(i, a)| if (i / d) % 2 == 1 { -a } else { *a })
            .collect();
        let t = FockVector::new(60, 2, flipped).unwrap();
        assert_relative_eq!(overlap_fock(&s, &t).unwrap(), 0.36, epsilon = 1e-12);
        let one = FockVector::vacuum(1, 60).unwrap();
        assert!(matches!(
            overlap_fock(&s, &one),
            Err(Error::ShapeMismatch(_))
        ));
    }
}
