//! Inertial (Minkowski) versus accelerated (Rindler) descriptions.
//!
//! A Rindler mode and its mirror mode are related to a pair of Minkowski
//! modes by the Bogoliubov map `a' = (a - mu b^dag)/sqrt(1-mu^2)`,
//! `b' = (b - mu a^dag)/sqrt(1-mu^2)`. Read as a substitution of phase-space
//! coordinates in the Wigner function, the Minkowski Wigner function is the
//! Rindler one evaluated at `S^{-1} r`, where `S` is [`bogoliubov_symplectic`].
//! Hence a state changes as `Sigma_M = S Sigma_R S^T` going to Minkowski and
//! with `S^{-1}` going to Rindler. With this reading the Minkowski vacuum is
//! the two-mode squeezed state with positive x-correlation in the Rindler
//! frame, and a Rindler vacuum pair looks like the same state with
//! `mu -> -mu` to an inertial observer.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{check_mu, Error, Result};
use crate::gaussian::{apply_symplectic, vacuum_state, GaussianState, SymplecticOp};

/// Physical constants and trajectory parameters. SI by default.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccelParams {
    /// Proper acceleration, m/s^2.
    pub acceleration: f64,
    /// Rindler frequency, rad/s.
    pub rindler_frequency: f64,
    pub speed_of_light: f64,
    pub hbar: f64,
    pub boltzmann: f64,
}

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const HBAR: f64 = 1.054_571_817e-34;
pub const BOLTZMANN: f64 = 1.380_649e-23;

impl AccelParams {
    pub fn new(acceleration: f64, rindler_frequency: f64) -> Result<Self> {
        Self {
            acceleration,
            rindler_frequency,
            speed_of_light: SPEED_OF_LIGHT,
            hbar: HBAR,
            boltzmann: BOLTZMANN,
        }
        .validated()
    }

    /// `c = hbar = k_B = 1`.
    pub fn natural(acceleration: f64, rindler_frequency: f64) -> Result<Self> {
        Self {
            acceleration,
            rindler_frequency,
            speed_of_light: 1.0,
            hbar: 1.0,
            boltzmann: 1.0,
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self> {
        let positive = |v: f64, name: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )))
            }
        };
        positive(self.acceleration, "acceleration")?;
        positive(self.rindler_frequency, "rindler frequency")?;
        positive(self.speed_of_light, "speed of light")?;
        positive(self.hbar, "hbar")?;
        positive(self.boltzmann, "boltzmann constant")?;
        Ok(self)
    }
}

/// `mu = exp(-pi omega' c / a)`.
pub fn mu_from_acceleration(params: &AccelParams) -> f64 {
    (-std::f64::consts::PI * params.rindler_frequency * params.speed_of_light / params.acceleration)
        .exp()
}

/// `mu = exp(-pi^2 D / lambda)` for mirror trajectories a distance `D` apart,
/// as seen by an inertial observer. `D = 0` gives the boundary value 1, which
/// is outside the range accepted by the state constructors.
pub fn mu_from_geometry(distance: f64, wavelength: f64) -> Result<f64> {
    if distance.is_nan() || distance < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "distance must be non-negative, got {distance}"
        )));
    }
    if wavelength.is_nan() || wavelength <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "wavelength must be positive, got {wavelength}"
        )));
    }
    let pi = std::f64::consts::PI;
    Ok((-pi * pi * distance / wavelength).exp())
}

/// Acceleration at which `mu^2 = 1/2`: `a = 2 pi omega' c / ln 2`.
pub fn fair_coin_acceleration(rindler_frequency: f64, speed_of_light: f64) -> Result<f64> {
    if !(rindler_frequency > 0.0 && speed_of_light > 0.0) {
        return Err(Error::InvalidParameter(
            "frequency and speed of light must be positive".into(),
        ));
    }
    Ok(2.0 * std::f64::consts::PI * rindler_frequency * speed_of_light / std::f64::consts::LN_2)
}

/// Unruh temperature `T = hbar a / (2 pi c k_B)` in kelvin (or natural units).
pub fn unruh_temperature(params: &AccelParams) -> f64 {
    params.hbar * params.acceleration
        / (2.0 * std::f64::consts::PI * params.speed_of_light * params.boltzmann)
}

/// The Bogoliubov map on `(x, p, x~, p~)`:
/// `x' = (x - mu x~)/s`, `p' = (p + mu p~)/s`, `x~' = (x~ - mu x)/s`,
/// `p~' = (p~ + mu p)/s` with `s = sqrt(1 - mu^2)`.
pub fn bogoliubov_symplectic(mu: f64) -> Result<SymplecticOp> {
    check_mu(mu)?;
    let s = (1.0 - mu * mu).sqrt();
    let (d, o) = (1.0 / s, mu / s);
    #[rustfmt::skip]
    let m = DMatrix::from_row_slice(4, 4, &[
        d, 0.0, -o, 0.0,
        0.0, d, 0.0, o,
        -o, 0.0, d, 0.0,
        0.0, o, 0.0, d,
    ]);
    SymplecticOp::linear(m)
}

/// A Rindler mode, its mirror mode, and the Minkowski pair they mix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FramePair {
    pub rindler_mode: String,
    pub mirror_mode: String,
    pub minkowski_modes: (String, String),
    pub mu: f64,
}

impl FramePair {
    pub fn new(
        rindler_mode: impl Into<String>,
        mirror_mode: impl Into<String>,
        minkowski_modes: (impl Into<String>, impl Into<String>),
        mu: f64,
    ) -> Result<Self> {
        check_mu(mu)?;
        let pair = Self {
            rindler_mode: rindler_mode.into(),
            mirror_mode: mirror_mode.into(),
            minkowski_modes: (minkowski_modes.0.into(), minkowski_modes.1.into()),
            mu,
        };
        let labels = [
            &pair.rindler_mode,
            &pair.mirror_mode,
            &pair.minkowski_modes.0,
            &pair.minkowski_modes.1,
        ];
        for i in 0..4 {
            for j in (i + 1)..4 {
                if labels[i] == labels[j] {
                    return Err(Error::DuplicateLabel(labels[i].clone()));
                }
            }
        }
        Ok(pair)
    }

    fn source(&self, direction: Direction) -> (&str, &str) {
        match direction {
            Direction::ToRindler => (&self.minkowski_modes.0, &self.minkowski_modes.1),
            Direction::ToMinkowski => (&self.rindler_mode, &self.mirror_mode),
        }
    }

    fn target(&self, direction: Direction) -> (&str, &str) {
        match direction {
            Direction::ToRindler => (&self.rindler_mode, &self.mirror_mode),
            Direction::ToMinkowski => (&self.minkowski_modes.0, &self.minkowski_modes.1),
        }
    }

    /// Phase-space map applied to states in `direction`.
    fn state_map(&self, direction: Direction) -> Result<SymplecticOp> {
        let s = bogoliubov_symplectic(self.mu)?;
        Ok(match direction {
            Direction::ToMinkowski => s,
            Direction::ToRindler => s.inverse(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    ToRindler,
    ToMinkowski,
}

/// Changes frame pair by pair and renames the modes accordingly.
pub fn transform_state(
    state: &GaussianState,
    pairs: &[FramePair],
    direction: Direction,
) -> Result<GaussianState> {
    let mut out = state.clone();
    for pair in pairs {
        let (a, b) = pair.source(direction);
        out = apply_symplectic(&out, &pair.state_map(direction)?, &[a, b])?;
    }
    out.relabel(relabelled(state.labels(), pairs, direction)?)
}

fn relabelled(labels: &[String], pairs: &[FramePair], direction: Direction) -> Result<Vec<String>> {
    let mut out = labels.to_vec();
    for pair in pairs {
        let (a, b) = pair.source(direction);
        let (ta, tb) = pair.target(direction);
        let ia = labels
            .iter()
            .position(|l| l == a)
            .ok_or_else(|| Error::UnknownMode(a.to_string()))?;
        let ib = labels
            .iter()
            .position(|l| l == b)
            .ok_or_else(|| Error::UnknownMode(b.to_string()))?;
        out[ia] = ta.to_string();
        out[ib] = tb.to_string();
    }
    Ok(out)
}

/// Minkowski description of a Rindler pair whose modes are both in their
/// vacuum ("cooled"): equals the two-mode squeezed state with `sign = -1`.
pub fn rindler_vacuum_in_minkowski(mu: f64) -> Result<GaussianState> {
    let pair = FramePair::new("R", "R~", ("M", "M~"), mu)?;
    transform_state(
        &vacuum_state(&["R", "R~"])?,
        &[pair],
        Direction::ToMinkowski,
    )
}

/// Pushes a linear observable through the frame change so that expectation
/// values are preserved: `c' = c S^{-1}` for states mapped by `S`.
///
/// `coeffs` is over the quadratures of `labels`; the result is over the
/// quadratures of the returned (renamed) labels, same ordering.
pub fn transform_observable(
    coeffs: &[f64],
    labels: &[String],
    pairs: &[FramePair],
    direction: Direction,
) -> Result<(Vec<f64>, Vec<String>)> {
    if coeffs.len() != 2 * labels.len() {
        return Err(Error::DimensionMismatch {
            expected: 2 * labels.len(),
            actual: coeffs.len(),
        });
    }
    let mut out = coeffs.to_vec();
    for pair in pairs {
        let (a, b) = pair.source(direction);
        let ia = labels
            .iter()
            .position(|l| l == a)
            .ok_or_else(|| Error::UnknownMode(a.to_string()))?;
        let ib = labels
            .iter()
            .position(|l| l == b)
            .ok_or_else(|| Error::UnknownMode(b.to_string()))?;
        let q = [2 * ia, 2 * ia + 1, 2 * ib, 2 * ib + 1];
        let inv = pair.state_map(direction)?.inverse();
        let block: Vec<f64> = q.iter().map(|&i| out[i]).collect();
        for (j, &qj) in q.iter().enumerate() {
            out[qj] = (0..4).map(|i| block[i] * inv.matrix()[(i, j)]).sum();
        }
    }
    Ok((out, relabelled(labels, pairs, direction)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{omega, two_mode_squeezed};
    use approx::assert_relative_eq;

    #[test]
    fn mu_from_physical_parameters() {
        let ln2 = std::f64::consts::LN_2;
        let pi = std::f64::consts::PI;
        let p = AccelParams::natural(pi / ln2, 1.0).unwrap();
        assert_relative_eq!(mu_from_acceleration(&p), 0.5, epsilon = 1e-14);
        let p = AccelParams::natural(1e-3, 1.0).unwrap();
        assert!(mu_from_acceleration(&p) < 1e-300);
        let p = AccelParams::natural(2.0 * pi / ln2, 1.0).unwrap();
        assert_relative_eq!(mu_from_acceleration(&p), 0.5f64.sqrt(), epsilon = 1e-14);
        assert!(AccelParams::natural(0.0, 1.0).is_err());
    }

    #[test]
    fn geometry() {
        assert_eq!(mu_from_geometry(0.0, 1.0).unwrap(), 1.0);
        let pi2 = std::f64::consts::PI.powi(2);
        assert_relative_eq!(
            mu_from_geometry(1.0 / pi2, 1.0).unwrap(),
            (-1.0f64).exp(),
            epsilon = 1e-15
        );
        assert!(mu_from_geometry(100.0, 1.0).unwrap() < 1e-300);
        assert!(mu_from_geometry(-1.0, 1.0).is_err());
        assert!(mu_from_geometry(1.0, 0.0).is_err());
    }

    #[test]
    fn fair_coin() {
        let a = fair_coin_acceleration(1.0, 1.0).unwrap();
        assert_relative_eq!(a, 9.06472, epsilon = 1e-5);
        let mu = mu_from_acceleration(&AccelParams::natural(a, 1.0).unwrap());
        assert_relative_eq!(mu * mu, 0.5, epsilon = 1e-12);
        assert_relative_eq!(
            fair_coin_acceleration(2.0, 1.0).unwrap(),
            2.0 * a,
            epsilon = 1e-12
        );
    }

    #[test]
    fn temperature() {
        let c = SPEED_OF_LIGHT;
        let a = 2.0 * std::f64::consts::PI * c * BOLTZMANN / HBAR;
        assert_relative_eq!(
            unruh_temperature(&AccelParams::new(a, 1.0).unwrap()),
            1.0,
            epsilon = 1e-12
        );
        let t = unruh_temperature(&AccelParams::new(9.81, 1.0).unwrap());
        assert_relative_eq!(t, 3.98e-20, max_relative = 2e-3);
        let t2 = unruh_temperature(&AccelParams::new(19.62, 1.0).unwrap());
        assert_relative_eq!(t2, 2.0 * t, epsilon = 1e-30);
    }

    #[test]
    fn bogoliubov_entries() {
        assert_eq!(
            bogoliubov_symplectic(0.0).unwrap(),
            SymplecticOp::identity(2)
        );
        let s = bogoliubov_symplectic(0.6).unwrap();
        let m = s.matrix();
        for i in 0..4 {
            assert_relative_eq!(m[(i, i)], 1.25, epsilon = 1e-12);
        }
        assert_relative_eq!(m[(0, 2)], -0.75, epsilon = 1e-12);
        assert_relative_eq!(m[(1, 3)], 0.75, epsilon = 1e-12);
        let m9 = bogoliubov_symplectic(0.9).unwrap();
        let om = omega(2);
        let dev = m9.matrix() * &om * m9.matrix().transpose() - &om;
        assert!(dev.amax() < 1e-12);
        assert!(matches!(
            bogoliubov_symplectic(1.0),
            Err(Error::MuOutOfRange(_))
        ));
    }

    fn pair(mu: f64) -> FramePair {
        FramePair::new("E", "E~", ("ME", "ME~"), mu).unwrap()
    }

    #[test]
    fn vacuum_to_rindler_is_tmss() {
        for mu in [0.0, 0.3, 0.5f64.sqrt(), 0.9] {
            let vac = vacuum_state(&["ME", "ME~"]).unwrap();
            let r = transform_state(&vac, &[pair(mu)], Direction::ToRindler).unwrap();
            let t = two_mode_squeezed(mu, 1.0, ["E", "E~"]).unwrap();
            assert_eq!(r.labels(), t.labels());
            assert_relative_eq!(r.covariance(), t.covariance(), epsilon = 1e-12);
            let back = transform_state(&r, &[pair(mu)], Direction::ToMinkowski).unwrap();
            assert_relative_eq!(back.covariance(), vac.covariance(), epsilon = 1e-12);
        }
    }

    #[test]
    fn cooled_pair_is_sign_flipped_tmss() {
        let c = rindler_vacuum_in_minkowski(0.5).unwrap();
        let t = two_mode_squeezed(0.5, -1.0, ["M", "M~"]).unwrap();
        assert_relative_eq!(c.covariance(), t.covariance(), epsilon = 1e-12);
        assert_relative_eq!(
            rindler_vacuum_in_minkowski(0.0).unwrap().covariance(),
            &(DMatrix::identity(4, 4) * 0.25),
            epsilon = 1e-15
        );
    }

    #[test]
    fn label_errors() {
        let vac = vacuum_state(&["ME", "X"]).unwrap();
        assert!(matches!(
            transform_state(&vac, &[pair(0.3)], Direction::ToRindler),
            Err(Error::UnknownMode(_))
        ));
        // Renaming onto an existing label.
        let vac = vacuum_state(&["ME", "ME~", "E"]).unwrap();
        assert!(matches!(
            transform_state(&vac, &[pair(0.3)], Direction::ToRindler),
            Err(Error::DuplicateLabel(_))
        ));
        assert!(FramePair::new("A", "A", ("B", "C"), 0.1).is_err());
    }

    #[test]
    fn zero_mu_is_relabelling() {
        let s = two_mode_squeezed(0.4, 1.0, ["ME", "ME~"]).unwrap();
        let r = transform_state(&s, &[pair(0.0)], Direction::ToRindler).unwrap();
        assert_eq!(r.covariance(), s.covariance());
        assert_eq!(r.labels(), &["E".to_string(), "E~".to_string()]);
    }

    #[test]
    fn rindler_x_observable_in_minkowski() {
        let mu = 0.6;
        let labels = vec!["E".to_string(), "E~".to_string()];
        let (c, l) = transform_observable(
            &[1.0, 0.0, 0.0, 0.0],
            &labels,
            &[pair(mu)],
            Direction::ToMinkowski,
        )
        .unwrap();
        assert_eq!(l, vec!["ME".to_string(), "ME~".to_string()]);
        assert_relative_eq!(c[0], 1.25, epsilon = 1e-12);
        assert_relative_eq!(c[2], 0.75, epsilon = 1e-12);
        let (c0, _) = transform_observable(
            &[0.3, -1.0, 2.0, 0.5],
            &labels,
            &[pair(0.0)],
            Direction::ToMinkowski,
        )
        .unwrap();
        assert_eq!(c0, vec![0.3, -1.0, 2.0, 0.5]);
    }
}
