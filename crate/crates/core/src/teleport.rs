//! Teleportation-style steering with the vacuum as the entangled resource.
//!
//! Alice holds mode `T` (prepared in a coherent state) and `E`; Bob holds the
//! mirror modes `T~` and `E~`. In the accelerated frame `(E, E~)` is the
//! two-mode squeezed vacuum. Alice homodynes `x_E + x_T` and `p_E - p_T`;
//! the state she then assigns to `E~` is the Gaussian conditional, which is
//! always a pure coherent state centred at
//! `(mu (X - x0), -mu (P + p0))` in this crate's sign convention.
//! Bob cannot be told `(X, P)` while both keep accelerating, so nothing here
//! applies an outcome-dependent correction on Bob's side; the recentred
//! fidelity is a bookkeeping figure computed from Alice's record.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{check_mu, Result};
use crate::frames::{
    rindler_vacuum_in_minkowski, transform_observable, transform_state, Direction, FramePair,
};
use crate::gaussian::{
    coherent_state, displace, measure_commuting_quadratures, observable_moments, overlap_with_pure,
    partial_trace, purity, regularized_post_measurement, thermal_state, two_mode_squeezed,
    vacuum_state, GaussianState, Outcomes, SymplecticOp,
};
use crate::montecarlo::run_blocks;

pub const ALICE_INPUT: &str = "T";
pub const ALICE_RESOURCE: &str = "E";
pub const BOB_INPUT: &str = "T~";
pub const BOB_RESOURCE: &str = "E~";
pub const RINDLER_ORDER: [&str; 4] = [ALICE_INPUT, ALICE_RESOURCE, BOB_INPUT, BOB_RESOURCE];
pub const MINKOWSKI_ORDER: [&str; 4] = ["MT", "ME", "MT~", "ME~"];

/// Squeezing `r` of the finite-resolution homodyne used for the full-mode
/// post-measurement states in [`MorkDescription`].
pub const RESOLUTION_SQUEEZING: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeMode {
    Fixed { x: f64, p: f64 },
    Sampled { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TeleportationConfig {
    pub mu: f64,
    pub alpha0: Complex64,
    pub outcomes: OutcomeMode,
    pub cool_bob: bool,
}

impl TeleportationConfig {
    pub fn new(mu: f64, alpha0: Complex64, outcomes: OutcomeMode) -> Self {
        Self {
            mu,
            alpha0,
            outcomes,
            cool_bob: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TeleportationResult {
    pub outcomes: (f64, f64),
    /// State Alice ascribes to `E~` after her measurement.
    pub bob_conditional: GaussianState,
    pub eq5_reference: GaussianState,
    /// Overlap of the unit-gain recentred conditional state with `|alpha0>`.
    pub fidelity_recentred: f64,
    pub mork: MorkDescription,
}

fn frame_pairs(mu: f64) -> Result<[FramePair; 2]> {
    Ok([
        FramePair::new(
            ALICE_INPUT,
            BOB_INPUT,
            (MINKOWSKI_ORDER[0], MINKOWSKI_ORDER[2]),
            mu,
        )?,
        FramePair::new(
            ALICE_RESOURCE,
            BOB_RESOURCE,
            (MINKOWSKI_ORDER[1], MINKOWSKI_ORDER[3]),
            mu,
        )?,
    ])
}

/// Rindler-frame state before Alice's measurement, modes in [`RINDLER_ORDER`].
///
/// `T` is cooled and displaced to `|alpha0>`. `T~` is cooled to vacuum when
/// `cool_bob` is set and otherwise keeps its thermal occupation.
pub fn rindler_preparation(mu: f64, alpha0: Complex64, cool_bob: bool) -> Result<GaussianState> {
    check_mu(mu)?;
    let t = coherent_state(ALICE_INPUT, alpha0)?;
    let ee = two_mode_squeezed(mu, 1.0, [ALICE_RESOURCE, BOB_RESOURCE])?;
    let tb = if cool_bob {
        vacuum_state(&[BOB_INPUT])?
    } else {
        thermal_state(BOB_INPUT, mu * mu / (1.0 - mu * mu))?
    };
    t.tensor(&ee)?.tensor(&tb)?.reorder(&RINDLER_ORDER)
}

/// `x_E + x_T` and `p_E - p_T` over the quadratures of [`RINDLER_ORDER`].
pub fn alice_observables() -> [Vec<f64>; 2] {
    // order: x_T p_T x_E p_E x_T~ p_T~ x_E~ p_E~
    [
        vec![1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        vec![0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0],
    ]
}

fn conditional_of(
    prep: &GaussianState,
    outcomes: Outcomes<'_>,
) -> Result<((f64, f64), GaussianState)> {
    let m = measure_commuting_quadratures(prep, &alice_observables(), outcomes)?;
    let bob = partial_trace(&m.posterior, &[BOB_RESOURCE])?;
    Ok(((m.outcomes[0], m.outcomes[1]), bob))
}

/// Full pipeline for one run.
pub fn run_teleportation(config: &TeleportationConfig) -> Result<TeleportationResult> {
    let prep = rindler_preparation(config.mu, config.alpha0, config.cool_bob)?;
    let ((x, p), bob) = match config.outcomes {
        OutcomeMode::Fixed { x, p } => conditional_of(&prep, Outcomes::Given(&[x, p]))?,
        OutcomeMode::Sampled { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            conditional_of(&prep, Outcomes::Sample(&mut rng))?
        }
    };
    let eq5 = eq5_reference_state(config.mu, config.alpha0, x, p)?;
    let recentred = recentre(&bob, 1.0, x, p)?;
    let target = coherent_state(BOB_RESOURCE, config.alpha0)?;
    let fidelity = overlap_with_pure(&recentred, &target)?;
    let mork = mork_description(config.mu, config.alpha0, (x, p), config.cool_bob)?;
    Ok(TeleportationResult {
        outcomes: (x, p),
        bob_conditional: bob,
        eq5_reference: eq5,
        fidelity_recentred: fidelity,
        mork,
    })
}

/// Alice-side recentring of the conditional state: a phase rotation by pi
/// followed by a displacement `gain * (X - iP)`. At unit gain and `mu -> 1`
/// this maps the conditional coherent state onto `|alpha0>`.
pub fn recentre(bob: &GaussianState, gain: f64, x: f64, p: f64) -> Result<GaussianState> {
    let label = bob.labels()[0].clone();
    let rotated = crate::gaussian::apply_symplectic(
        bob,
        &SymplecticOp::phase_rotation(std::f64::consts::PI),
        &[&label],
    )?;
    displace(&rotated, &label, Complex64::new(gain * x, -gain * p))
}

/// Closed-form conditional law `centre = A (x0, p0, X, P)`, covariance fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalForm {
    pub mu: f64,
    /// 2x4 map from `(x0, p0, X, P)` to the `(x~, p~)` centre.
    pub centre_map: DMatrix<f64>,
    pub covariance: DMatrix<f64>,
}

impl ConditionalForm {
    pub fn centre(&self, alpha0: Complex64, x: f64, p: f64) -> [f64; 2] {
        let v = &self.centre_map * DVector::from_column_slice(&[alpha0.re, alpha0.im, x, p]);
        [v[0], v[1]]
    }
}

/// Extracts the conditional law from the Gaussian pipeline by probing it on
/// unit inputs; the pipeline is affine with zero offset.
pub fn conditional_form(mu: f64) -> Result<ConditionalForm> {
    let probe = |alpha0: Complex64, x: f64, p: f64| -> Result<GaussianState> {
        let prep = rindler_preparation(mu, alpha0, true)?;
        Ok(conditional_of(&prep, Outcomes::Given(&[x, p]))?.1)
    };
    let base = probe(Complex64::new(0.0, 0.0), 0.0, 0.0)?;
    let inputs = [
        (Complex64::new(1.0, 0.0), 0.0, 0.0),
        (Complex64::new(0.0, 1.0), 0.0, 0.0),
        (Complex64::new(0.0, 0.0), 1.0, 0.0),
        (Complex64::new(0.0, 0.0), 0.0, 1.0),
    ];
    let mut map = DMatrix::zeros(2, 4);
    for (j, (a, x, p)) in inputs.into_iter().enumerate() {
        let s = probe(a, x, p)?;
        map[(0, j)] = s.mean()[0] - base.mean()[0];
        map[(1, j)] = s.mean()[1] - base.mean()[1];
    }
    Ok(ConditionalForm {
        mu,
        centre_map: map,
        covariance: base.covariance().clone(),
    })
}

/// The single Gaussian obtained by multiplying the two factors of the
/// reference conditional Wigner function: weight `(2-2mu)/(3+mu)` centred at
/// `(X - x0, P - p0)` and `(2+2mu)/(3-mu)` centred at `(X + x0, P + p0)`.
pub fn eq5_reference_state(mu: f64, alpha0: Complex64, x: f64, p: f64) -> Result<GaussianState> {
    check_mu(mu)?;
    let w1 = (2.0 - 2.0 * mu) / (3.0 + mu);
    let w2 = (2.0 + 2.0 * mu) / (3.0 - mu);
    let var = 1.0 / (2.0 * (w1 + w2));
    let shift = (w2 - w1) / (w1 + w2);
    GaussianState::new(
        vec![BOB_RESOURCE.to_string()],
        DVector::from_column_slice(&[x + shift * alpha0.re, p + shift * alpha0.im]),
        DMatrix::identity(2, 2) * var,
    )
}

/// Correlations left between Alice's and Bob's sides after the measurement,
/// in both frames, from the finite-resolution post-measurement state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PostMeasurementEntanglement {
    /// Frobenius norm of the covariance block between `{T, E}` and `{T~, E~}`.
    pub rindler_cross_covariance_norm: f64,
    /// Purity of the reduced `{T, E}` state; 1 means Alice's modes factor out.
    pub rindler_alice_purity: f64,
    pub minkowski_cross_covariance_norm: f64,
    pub minkowski_alice_purity: f64,
    pub resolution_squeezing: f64,
}

/// How an inertial observer describes the run.
#[derive(Debug, Clone, PartialEq)]
pub struct MorkDescription {
    /// Minkowski description of the cooled `(T, T~)` pair.
    pub cooling_state: GaussianState,
    /// The prepared four-mode state, modes in [`MINKOWSKI_ORDER`].
    pub state: GaussianState,
    /// Alice's two observables over the quadratures of [`MINKOWSKI_ORDER`].
    pub measured_observables: [Vec<f64>; 2],
    pub entanglement: PostMeasurementEntanglement,
}

fn cross_block_norm(state: &GaussianState) -> f64 {
    let c = state.covariance();
    let mut s = 0.0;
    for i in 0..4 {
        for j in 4..8 {
            s += c[(i, j)] * c[(i, j)];
        }
    }
    s.sqrt()
}

fn alice_side_purity(state: &GaussianState) -> Result<f64> {
    let labels = state.labels();
    Ok(purity(&partial_trace(state, &[&labels[0], &labels[1]])?))
}

pub fn mork_description(
    mu: f64,
    alpha0: Complex64,
    outcomes: (f64, f64),
    cool_bob: bool,
) -> Result<MorkDescription> {
    let pairs = frame_pairs(mu)?;
    let cooling_state = rindler_vacuum_in_minkowski(mu)?
        .relabel(vec![MINKOWSKI_ORDER[0].into(), MINKOWSKI_ORDER[2].into()])?;
    let rindler = rindler_preparation(mu, alpha0, cool_bob)?;
    let minkowski = transform_state(&rindler, &pairs, Direction::ToMinkowski)?;
    let rindler_labels: Vec<String> = RINDLER_ORDER.iter().map(|s| s.to_string()).collect();
    let [ox, op] = alice_observables();
    let (mx, _) = transform_observable(&ox, &rindler_labels, &pairs, Direction::ToMinkowski)?;
    let (mp, _) = transform_observable(&op, &rindler_labels, &pairs, Direction::ToMinkowski)?;

    let y = [outcomes.0, outcomes.1];
    let r_post = regularized_post_measurement(&rindler, &[ox, op], &y, RESOLUTION_SQUEEZING)?;
    let m_post = regularized_post_measurement(
        &minkowski,
        &[mx.clone(), mp.clone()],
        &y,
        RESOLUTION_SQUEEZING,
    )?;
    let entanglement = PostMeasurementEntanglement {
        rindler_cross_covariance_norm: cross_block_norm(&r_post),
        rindler_alice_purity: alice_side_purity(&r_post)?,
        minkowski_cross_covariance_norm: cross_block_norm(&m_post.reorder(&MINKOWSKI_ORDER)?),
        minkowski_alice_purity: alice_side_purity(&m_post)?,
        resolution_squeezing: RESOLUTION_SQUEEZING,
    };
    Ok(MorkDescription {
        cooling_state,
        state: minkowski,
        measured_observables: [mx, mp],
        entanglement,
    })
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: u64,
}

/// Outcome-averaged overlap between the recentred conditional state (gain
/// `gain`) and `|alpha0>`, with outcomes drawn from their Gaussian marginal.
pub fn average_fidelity(
    mu: f64,
    gain: f64,
    alpha0: Complex64,
    trials: u64,
    seed: u64,
    shards: usize,
) -> Result<Estimate> {
    if trials == 0 {
        return Err(crate::Error::InvalidParameter(
            "trials must be at least 1".into(),
        ));
    }
    let form = conditional_form(mu)?;
    let prep = rindler_preparation(mu, alpha0, true)?;
    let (y_mean, y_cov) = observable_moments(&prep, &alice_observables())?;
    let chol = y_cov.cholesky().ok_or(crate::Error::SingularCovariance)?;
    let l = chol.l();
    // Recentred state: rotation by pi leaves the covariance unchanged.
    let sum = &form.covariance + DMatrix::identity(2, 2) * 0.25;
    let sum_inv = sum
        .clone()
        .try_inverse()
        .ok_or(crate::Error::SingularCovariance)?;
    let norm = 1.0 / (&sum * 2.0).determinant().sqrt();

    let sums = run_blocks(trials, seed, shards, |block, rng| {
        let mut s = 0.0;
        let mut s2 = 0.0;
        for _ in 0..block.len {
            let z0: f64 = StandardNormal.sample(rng);
            let z1: f64 = StandardNormal.sample(rng);
            let x = y_mean[0] + l[(0, 0)] * z0;
            let p = y_mean[1] + l[(1, 0)] * z0 + l[(1, 1)] * z1;
            let [cx, cp] = form.centre(alpha0, x, p);
            let d = DVector::from_column_slice(&[
                gain * x - cx - alpha0.re,
                -gain * p - cp - alpha0.im,
            ]);
            let f = norm * (-0.5 * (d.transpose() * &sum_inv * &d)[(0, 0)]).exp();
            s += f;
            s2 += f * f;
        }
        (s, s2)
    })?;
    let (s, s2) = sums.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let n = trials as f64;
    let mean = s / n;
    let var = (s2 / n - mean * mean).max(0.0);
    Ok(Estimate {
        mean,
        stderr: (var / n).sqrt(),
        samples: trials,
    })
}

/// Outcome-averaged ensemble of conditional states on `E~`, estimated by
/// repeatedly sampling Alice's measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleMoments {
    pub mean: [f64; 2],
    /// Mixture covariance: mean conditional covariance plus the spread of centres.
    pub covariance: DMatrix<f64>,
    pub samples: u64,
}

pub fn steering_ensemble(
    mu: f64,
    alpha0: Complex64,
    samples: u64,
    seed: u64,
) -> Result<EnsembleMoments> {
    let prep = rindler_preparation(mu, alpha0, true)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = [0.0; 2];
    let mut outer = DMatrix::zeros(2, 2);
    let mut cov_sum = DMatrix::zeros(2, 2);
    for _ in 0..samples {
        let (_, bob) = conditional_of(&prep, Outcomes::Sample(&mut rng))?;
        let m = bob.mean();
        sum[0] += m[0];
        sum[1] += m[1];
        outer += m * m.transpose();
        cov_sum += bob.covariance();
    }
    let n = samples as f64;
    let mean = [sum[0] / n, sum[1] / n];
    let mv = DVector::from_column_slice(&mean);
    let spread = outer / n - &mv * mv.transpose();
    Ok(EnsembleMoments {
        mean,
        covariance: cov_sum / n + spread,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn fixed(x: f64, p: f64) -> OutcomeMode {
        OutcomeMode::Fixed { x, p }
    }

    #[test]
    fn separable_resource_gives_vacuum() {
        for (x, p) in [(0.0, 0.0), (2.0, -1.0)] {
            let r = run_teleportation(&TeleportationConfig::new(0.0, c(0.7, 0.2), fixed(x, p)))
                .unwrap();
            assert_relative_eq!(r.bob_conditional.mean().norm(), 0.0, epsilon = 1e-14);
            assert_relative_eq!(
                r.bob_conditional.covariance(),
                &(DMatrix::identity(2, 2) * 0.25),
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn conditional_centre_at_half() {
        let r = run_teleportation(&TeleportationConfig::new(0.5, c(1.0, 0.0), fixed(2.0, 0.0)))
            .unwrap();
        assert_relative_eq!(r.bob_conditional.mean()[0], 0.5, epsilon = 1e-12);
        assert_relative_eq!(r.bob_conditional.mean()[1], 0.0, epsilon = 1e-12);
        assert_relative_eq!(
            r.bob_conditional.covariance(),
            &(DMatrix::identity(2, 2) * 0.25),
            epsilon = 1e-12
        );
    }

    #[test]
    fn conditional_form_coefficients() {
        for mu in [0.0, 0.5, 0.99] {
            let f = conditional_form(mu).unwrap();
            assert_relative_eq!(
                f.covariance,
                DMatrix::identity(2, 2) * 0.25,
                epsilon = 1e-10
            );
            #[rustfmt::skip]
            let expect = DMatrix::from_row_slice(2, 4, &[
                -mu, 0.0, mu, 0.0,
                0.0, -mu, 0.0, -mu,
            ]);
            assert_relative_eq!(f.centre_map, expect, epsilon = 1e-10);
        }
    }

    #[test]
    fn eq5_reference_values() {
        let s = eq5_reference_state(0.0, c(1.0, 1.0), 0.4, -0.3).unwrap();
        assert_relative_eq!(s.covariance()[(0, 0)], 3.0 / 8.0, epsilon = 1e-14);
        assert_eq!(s.mean().as_slice(), &[0.4, -0.3]);

        let s = eq5_reference_state(0.5, c(1.0, 2.0), 0.0, 0.0).unwrap();
        assert_relative_eq!(s.covariance()[(0, 0)], 0.336538, epsilon = 1e-6);
        assert_relative_eq!(s.mean()[0], 0.615385, epsilon = 1e-6);
        assert_relative_eq!(s.mean()[1], 2.0 * 0.615385, epsilon = 1e-6);

        let s = eq5_reference_state(1.0 - 1e-12, c(0.3, 0.4), 1.0, 2.0).unwrap();
        assert_relative_eq!(s.covariance()[(0, 0)], 0.25, epsilon = 1e-10);
        assert_relative_eq!(s.mean()[0], 1.3, epsilon = 1e-10);
        assert_relative_eq!(s.mean()[1], 2.4, epsilon = 1e-10);
    }

    #[test]
    fn bob_cooling_is_irrelevant() {
        let mut cfg = TeleportationConfig::new(0.7, c(0.5, -0.5), fixed(1.0, 0.3));
        let a = run_teleportation(&cfg).unwrap();
        cfg.cool_bob = false;
        let b = run_teleportation(&cfg).unwrap();
        assert_relative_eq!(
            a.bob_conditional.mean(),
            b.bob_conditional.mean(),
            epsilon = 1e-12
        );
        assert_relative_eq!(
            a.bob_conditional.covariance(),
            b.bob_conditional.covariance(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn mork_entanglement_report() {
        let m0 = mork_description(0.0, c(0.0, 0.0), (0.0, 0.0), true).unwrap();
        assert!(m0.entanglement.minkowski_cross_covariance_norm < 1e-12);
        let m = mork_description(0.5, c(1.0, 0.0), (0.3, -0.2), true).unwrap();
        assert!(m.entanglement.rindler_cross_covariance_norm < 1e-10);
        assert_relative_eq!(m.entanglement.rindler_alice_purity, 1.0, epsilon = 1e-9);
        assert!(m.entanglement.minkowski_cross_covariance_norm > 1e-3);
        assert!(m.entanglement.minkowski_alice_purity < 1.0 - 1e-3);
        let s = 0.75f64.sqrt();
        assert_relative_eq!(m.measured_observables[0][0], 1.0 / s, epsilon = 1e-12);
    }

    #[test]
    fn fidelity_trivial_cases() {
        let f = average_fidelity(0.0, 0.0, c(0.0, 0.0), 1000, 1, 1).unwrap();
        assert_relative_eq!(f.mean, 1.0, epsilon = 1e-12);
        let f = average_fidelity(0.999, 1.0, c(1.0, 0.0), 20_000, 1, 1).unwrap();
        assert!(f.mean >= 0.99, "{f:?}");
    }

    #[test]
    fn fidelity_matches_single_run_overlap() {
        // The closed-form per-trial overlap equals overlap_with_pure.
        let mu = 0.6;
        let alpha0 = c(0.4, -0.9);
        let (x, p) = (1.1, 0.7);
        let r = run_teleportation(&TeleportationConfig::new(mu, alpha0, fixed(x, p))).unwrap();
        let form = conditional_form(mu).unwrap();
        let [cx, cp] = form.centre(alpha0, x, p);
        let d2 = (x - cx - alpha0.re).powi(2) + (-p - cp - alpha0.im).powi(2);
        assert_relative_eq!(r.fidelity_recentred, (-d2).exp(), epsilon = 1e-10);
    }
}
