//! Key agreement from the vacuum's photon-number correlations.
//!
//! Bits come from the same sampling path as the coin flip: a shared photon
//! number per round, then each party's detector. The eavesdropping check is
//! the CHSH value of the underlying mode pair, reported next to the key.

use serde::{Deserialize, Serialize};

use crate::bell::{maximize_chsh, ChshOptimum, ChshSearch};
use crate::coinflip::{geometric_for, run_trial, Cheat, CoinFlipConfig, DetectorModel, Outcome};
use crate::error::{check_mu, Error, Result};
use crate::gaussian::two_mode_squeezed;
use crate::montecarlo::{binomial_stderr, run_blocks};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyMaterial {
    pub alice_bits: Vec<u8>,
    pub bob_bits: Vec<u8>,
    /// Fraction of rounds where the bits differ.
    pub qber: f64,
    pub qber_stderr: f64,
    /// Fraction of Alice's bits equal to 1.
    pub bit_bias: f64,
    pub bit_bias_stderr: f64,
    pub chsh_estimate: f64,
    pub chsh: ChshOptimum,
}

pub fn generate_key_bits(
    mu: f64,
    n_bits: u64,
    detectors: (DetectorModel, DetectorModel),
    seed: u64,
    shards: usize,
) -> Result<KeyMaterial> {
    check_mu(mu)?;
    if n_bits == 0 {
        return Err(Error::InvalidParameter("n_bits must be at least 1".into()));
    }
    let config = CoinFlipConfig {
        mu,
        alice_detector: DetectorModel::new(detectors.0.efficiency, detectors.0.dark_count_prob)?,
        bob_detector: DetectorModel::new(detectors.1.efficiency, detectors.1.dark_count_prob)?,
        trials: n_bits,
        seed,
        cheat: Cheat::None,
    };
    let geometric = geometric_for(mu)?;
    let blocks = run_blocks(n_bits, seed, shards, |block, rng| {
        (0..block.len)
            .map(|_| match run_trial(&config, geometric.as_ref(), rng) {
                (Outcome::Bit(a), Outcome::Bit(b)) => (a as u8, b as u8),
                _ => unreachable!("honest rounds never abort"),
            })
            .collect::<Vec<_>>()
    })?;
    let (alice_bits, bob_bits): (Vec<u8>, Vec<u8>) = blocks.into_iter().flatten().unzip();
    let errors = alice_bits
        .iter()
        .zip(&bob_bits)
        .filter(|(a, b)| a != b)
        .count();
    let ones = alice_bits.iter().filter(|&&a| a == 1).count();
    let qber = errors as f64 / n_bits as f64;
    let bit_bias = ones as f64 / n_bits as f64;

    let state = two_mode_squeezed(mu, 1.0, ["A", "B"])?;
    let chsh = maximize_chsh(&state, &ChshSearch::default())?;
    Ok(KeyMaterial {
        alice_bits,
        bob_bits,
        qber,
        qber_stderr: binomial_stderr(qber, n_bits),
        bit_bias,
        bit_bias_stderr: binomial_stderr(bit_bias, n_bits),
        chsh_estimate: chsh.value,
        chsh,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const IDEAL: (DetectorModel, DetectorModel) = (DetectorModel::IDEAL, DetectorModel::IDEAL);

    #[test]
    fn ideal_key_has_no_errors() {
        for mu in [0.2, std::f64::consts::FRAC_1_SQRT_2, 0.95] {
            let k = generate_key_bits(mu, 5000, IDEAL, 1, 2).unwrap();
            assert_eq!(k.qber, 0.0);
        }
        let k = generate_key_bits(std::f64::consts::FRAC_1_SQRT_2, 10_000, IDEAL, 7, 1).unwrap();
        assert!((k.bit_bias - 0.5).abs() <= 3.0 * k.bit_bias_stderr);
        assert!(k.chsh_estimate > 2.0);
    }

    #[test]
    fn zero_mu_gives_no_key() {
        let k = generate_key_bits(0.0, 1000, IDEAL, 1, 1).unwrap();
        assert!(k.alice_bits.iter().chain(&k.bob_bits).all(|&b| b == 0));
        assert!(k.chsh_estimate <= 2.0 + 1e-9);
    }

    #[test]
    fn dark_counts_cause_errors() {
        let d = DetectorModel::new(1.0, 0.01).unwrap();
        let k = generate_key_bits(std::f64::consts::FRAC_1_SQRT_2, 20_000, (d, d), 3, 1).unwrap();
        assert!(k.qber > 0.0 && k.qber_stderr > 0.0);
        assert!(generate_key_bits(0.5, 0, IDEAL, 0, 1).is_err());
    }

    #[test]
    fn sharding_does_not_change_bits() {
        let a = generate_key_bits(0.6, 9000, IDEAL, 5, 1).unwrap();
        let b = generate_key_bits(0.6, 9000, IDEAL, 5, 4).unwrap();
        assert_eq!(a, b);
    }
}
