//! Coin flipping from the vacuum's photon-number correlations.
//!
//! Each trial, the shared mode pair carries `n` photons with probability
//! `(1 - mu^2) mu^{2n}`, the same `n` on both sides. A party's bit is 1 iff
//! their detector clicks. At `mu^2 = 1/2` the coin is fair.
//!
//! Cheating is modelled, not optimized: a cheating Bob may have photons
//! injected into Alice's mode before her vacuum check, which catches the
//! injection unless it evades with probability `q`; or a party may announce
//! the negation of its bit. A caught injection aborts the trial for both
//! parties ("fail").

use rand::Rng;
use rand_distr::{Distribution, Geometric};
use serde::{Deserialize, Serialize};

use crate::error::{check_mu, Error, Result};
use crate::montecarlo::{binomial_stderr, run_blocks};

/// Photodetector with efficiency `eta` and dark-count probability `p_d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorModel {
    pub efficiency: f64,
    pub dark_count_prob: f64,
}

impl DetectorModel {
    pub const IDEAL: DetectorModel = DetectorModel {
        efficiency: 1.0,
        dark_count_prob: 0.0,
    };

    pub fn new(efficiency: f64, dark_count_prob: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&efficiency) {
            return Err(Error::InvalidParameter(format!(
                "efficiency must lie in [0, 1], got {efficiency}"
            )));
        }
        if !(0.0..1.0).contains(&dark_count_prob) {
            return Err(Error::InvalidParameter(format!(
                "dark count probability must lie in [0, 1), got {dark_count_prob}"
            )));
        }
        Ok(Self {
            efficiency,
            dark_count_prob,
        })
    }

    /// `1 - (1 - eta)^n (1 - p_d)`.
    pub fn click_probability(&self, n: u64) -> f64 {
        let miss = (1.0 - self.efficiency).powf(n as f64);
        1.0 - miss * (1.0 - self.dark_count_prob)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Party {
    Alice,
    Bob,
}

impl Party {
    pub fn other(self) -> Self {
        match self {
            Party::Alice => Party::Bob,
            Party::Bob => Party::Alice,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Cheat {
    None,
    /// Bob's accomplice puts `photons` into Alice's mode; the vacuum check
    /// misses it with probability `evade_prob`.
    Injection {
        photons: u64,
        evade_prob: f64,
    },
    /// `party` announces the negation of its bit.
    ReportFlip {
        party: Party,
    },
}

impl Cheat {
    /// The party whose outcome distribution measures the cheater's bias.
    pub fn honest_party(&self) -> Party {
        match self {
            Cheat::None | Cheat::Injection { .. } => Party::Alice,
            Cheat::ReportFlip { party } => party.other(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoinFlipConfig {
    pub mu: f64,
    pub alice_detector: DetectorModel,
    pub bob_detector: DetectorModel,
    pub trials: u64,
    pub seed: u64,
    pub cheat: Cheat,
}

impl CoinFlipConfig {
    pub fn ideal(mu: f64, trials: u64, seed: u64) -> Self {
        Self {
            mu,
            alice_detector: DetectorModel::IDEAL,
            bob_detector: DetectorModel::IDEAL,
            trials,
            seed,
            cheat: Cheat::None,
        }
    }

    fn validate(&self) -> Result<()> {
        check_mu(self.mu)?;
        DetectorModel::new(
            self.alice_detector.efficiency,
            self.alice_detector.dark_count_prob,
        )?;
        DetectorModel::new(
            self.bob_detector.efficiency,
            self.bob_detector.dark_count_prob,
        )?;
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        match self.cheat {
            Cheat::Injection {
                photons,
                evade_prob,
            } => {
                if photons == 0 {
                    return Err(Error::InvalidParameter(
                        "injection needs at least one photon".into(),
                    ));
                }
                if !(0.0..=1.0).contains(&evade_prob) {
                    return Err(Error::InvalidParameter(format!(
                        "evade probability must lie in [0, 1], got {evade_prob}"
                    )));
                }
            }
            Cheat::None | Cheat::ReportFlip { .. } => {}
        }
        Ok(())
    }
}

/// Bias per bit value with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasEstimate {
    pub value: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolStats {
    pub trials: u64,
    /// Whose outcomes the probabilities below describe.
    pub reference_party: Party,
    pub p_outcome0: f64,
    pub p_outcome1: f64,
    pub p_fail: f64,
    /// Fraction of trials in which both announced outcomes coincide.
    pub agreement_rate: f64,
    pub agreement_stderr: f64,
    /// `max(0, P(outcome = b) - 1/2)` for `b = 0, 1`.
    pub epsilon_estimates: [BiasEstimate; 2],
    /// `max(0, P(outcome = b) - (1 - p_fail)/2)`: excess over an even split
    /// of the trials that did not abort.
    pub abort_adjusted_bias: [f64; 2],
}

/// Outcome a party infers in one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Bit(bool),
    Fail,
}

/// Draws the shared photon number from `P(n) = (1 - mu^2) mu^{2n}`.
pub fn sample_joint_photons<R: Rng + ?Sized>(mu: f64, rng: &mut R) -> Result<u64> {
    check_mu(mu)?;
    if mu == 0.0 {
        return Ok(0);
    }
    let g = Geometric::new(1.0 - mu * mu).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok(g.sample(rng))
}

/// Whether a detector fires on `n` incident photons.
pub fn detect<R: Rng + ?Sized>(n: u64, model: &DetectorModel, rng: &mut R) -> bool {
    rng.random::<f64>() < model.click_probability(n)
}

/// Both parties' inferred outcomes for one trial.
pub fn run_trial<R: Rng + ?Sized>(
    config: &CoinFlipConfig,
    geometric: Option<&Geometric>,
    rng: &mut R,
) -> (Outcome, Outcome) {
    let n = geometric.map_or(0, |g| g.sample(rng));
    let mut alice_photons = n;
    if let Cheat::Injection {
        photons,
        evade_prob,
    } = config.cheat
    {
        let evaded = rng.random::<f64>() < evade_prob;
        if !evaded {
            return (Outcome::Fail, Outcome::Fail);
        }
        alice_photons += photons;
    }
    let mut a = detect(alice_photons, &config.alice_detector, rng);
    let mut b = detect(n, &config.bob_detector, rng);
    if let Cheat::ReportFlip { party } = config.cheat {
        match party {
            Party::Alice => a = !a,
            Party::Bob => b = !b,
        }
    }
    (Outcome::Bit(a), Outcome::Bit(b))
}

#[derive(Debug, Default, Clone, Copy)]
struct Counts {
    zero: u64,
    one: u64,
    fail: u64,
    agree: u64,
}

pub(crate) fn geometric_for(mu: f64) -> Result<Option<Geometric>> {
    if mu == 0.0 {
        return Ok(None);
    }
    Geometric::new(1.0 - mu * mu)
        .map(Some)
        .map_err(|e| Error::InvalidParameter(e.to_string()))
}

/// Honest execution (`cheat = None`).
pub fn run_protocol(config: &CoinFlipConfig, shards: usize) -> Result<ProtocolStats> {
    if config.cheat != Cheat::None {
        return Err(Error::InvalidParameter(
            "run_protocol is the honest run; use run_with_cheat".into(),
        ));
    }
    run(config, shards)
}

/// Execution with a cheat strategy injected.
pub fn run_with_cheat(config: &CoinFlipConfig, shards: usize) -> Result<ProtocolStats> {
    if config.cheat == Cheat::None {
        return Err(Error::InvalidParameter(
            "no cheat strategy configured".into(),
        ));
    }
    run(config, shards)
}

/// Runs the configured protocol, honest or not.
pub fn run(config: &CoinFlipConfig, shards: usize) -> Result<ProtocolStats> {
    config.validate()?;
    let geometric = geometric_for(config.mu)?;
    let reference = config.cheat.honest_party();
    let per_block = run_blocks(config.trials, config.seed, shards, |block, rng| {
        let mut c = Counts::default();
        for _ in 0..block.len {
            let (a, b) = run_trial(config, geometric.as_ref(), rng);
            let mine = match reference {
                Party::Alice => a,
                Party::Bob => b,
            };
            match mine {
                Outcome::Bit(false) => c.zero += 1,
                Outcome::Bit(true) => c.one += 1,
                Outcome::Fail => c.fail += 1,
            }
            if a == b {
                c.agree += 1;
            }
        }
        c
    })?;
    let total = per_block.iter().fold(Counts::default(), |acc, c| Counts {
        zero: acc.zero + c.zero,
        one: acc.one + c.one,
        fail: acc.fail + c.fail,
        agree: acc.agree + c.agree,
    });
    let n = config.trials;
    let nf = n as f64;
    let p0 = total.zero as f64 / nf;
    let p1 = total.one as f64 / nf;
    let pf = total.fail as f64 / nf;
    let agreement = total.agree as f64 / nf;
    let eps = |p: f64| BiasEstimate {
        value: (p - 0.5).max(0.0),
        stderr: binomial_stderr(p, n),
    };
    Ok(ProtocolStats {
        trials: n,
        reference_party: reference,
        p_outcome0: p0,
        p_outcome1: p1,
        p_fail: pf,
        agreement_rate: agreement,
        agreement_stderr: binomial_stderr(agreement, n),
        epsilon_estimates: [eps(p0), eps(p1)],
        abort_adjusted_bias: [
            (p0 - (1.0 - pf) / 2.0).max(0.0),
            (p1 - (1.0 - pf) / 2.0).max(0.0),
        ],
    })
}

/// Comparison of two parties' biases with `(1/2 + eps_A^b)(1/2 + eps_B^b) >= 1/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KitaevReport {
    pub product0: f64,
    pub product1: f64,
    /// True when both products reach 1/2, i.e. the biases are compatible
    /// with protocols built from an unentangled start.
    pub satisfies_bound: bool,
}

/// Per-bit biases `[eps^0, eps^1]` for each party.
pub fn kitaev_check(eps_a: [f64; 2], eps_b: [f64; 2]) -> Result<KitaevReport> {
    for e in eps_a.iter().chain(eps_b.iter()) {
        if !(0.0..=0.5).contains(e) {
            return Err(Error::InvalidParameter(format!(
                "bias must lie in [0, 1/2], got {e}"
            )));
        }
    }
    let product0 = (0.5 + eps_a[0]) * (0.5 + eps_b[0]);
    let product1 = (0.5 + eps_a[1]) * (0.5 + eps_b[1]);
    Ok(KitaevReport {
        product0,
        product1,
        satisfies_bound: product0 >= 0.5 && product1 >= 0.5,
    })
}
