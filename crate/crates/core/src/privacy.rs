//! XOR privacy amplification.
//!
//! Each round replaces consecutive bit pairs by their XOR. If Eve guesses
//! each bit independently with probability `p`, she gets the XOR right with
//! probability `p² + (1 − p)²`.

use serde::{Deserialize, Serialize};

use crate::attack::AttackOutcome;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Generation,
    XorRound(u32),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Key {
    bits: Vec<u8>,
    provenance: Provenance,
}

impl Key {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::Argument("a key needs at least one bit".into()));
        }
        if let Some(b) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::Argument(format!("key bits must be 0 or 1, got {b}")));
        }
        Ok(Self { bits, provenance: Provenance::Generation })
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// Fraction of positions where both keys agree.
    pub fn agreement(&self, other: &Key) -> Result<f64> {
        if self.len() != other.len() {
            return Err(Error::Argument(format!("key lengths differ: {} vs {}", self.len(), other.len())));
        }
        let same = self.bits.iter().zip(&other.bits).filter(|(a, b)| a == b).count();
        Ok(same as f64 / self.len() as f64)
    }
}

/// `bit j = bits[2j] ^ bits[2j+1]`; an odd trailing bit is dropped.
pub fn xor_halve(key: &Key) -> Result<Key> {
    if key.len() < 2 {
        return Err(Error::Argument(format!("cannot halve a key of {} bit(s)", key.len())));
    }
    let round = match key.provenance {
        Provenance::Generation => 1,
        Provenance::XorRound(k) => k + 1,
    };
    Ok(Key {
        bits: key.bits.chunks_exact(2).map(|p| p[0] ^ p[1]).collect(),
        provenance: Provenance::XorRound(round),
    })
}

pub fn predicted_leak_after_xor(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("probability must lie in [0, 1], got {p}")));
    }
    Ok(p * p + (1.0 - p) * (1.0 - p))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplificationRound {
    /// 0 is the raw key.
    pub round: u32,
    pub n_bits: usize,
    pub p_e: f64,
    pub binomial_std: f64,
    /// Independence prediction from the previous round's measured `p_e`.
    pub predicted: Option<f64>,
}

impl AmplificationRound {
    /// Distance from the prediction in units of this round's binomial std.
    pub fn prediction_z(&self) -> Option<f64> {
        let sigma = self.binomial_std.max(f64::MIN_POSITIVE);
        self.predicted.map(|p| (self.p_e - p).abs() / sigma)
    }
}

/// XOR Eve's guessed key and the true key `rounds` times and report her
/// per-bit agreement after each round (round 0 included). Key bits are
/// Alice's resistor choices.
pub fn empirical_amplification(outcome: &AttackOutcome, rounds: u32) -> Result<Vec<AmplificationRound>> {
    let n = outcome.bits.len();
    if rounds >= usize::BITS || n >> rounds == 0 {
        return Err(Error::Argument(format!("{n} bits cannot support {rounds} XOR round(s)")));
    }
    let mut truth = Key::new(outcome.bits.iter().map(|b| b.truth.alice.bit()).collect())?;
    let mut guess = Key::new(outcome.bits.iter().map(|b| b.guess.alice.bit()).collect())?;
    let mut out = Vec::with_capacity(rounds as usize + 1);
    let mut previous: Option<f64> = None;
    for round in 0..=rounds {
        if round > 0 {
            truth = xor_halve(&truth)?;
            guess = xor_halve(&guess)?;
        }
        let p = truth.agreement(&guess)?;
        let m = truth.len();
        out.push(AmplificationRound {
            round,
            n_bits: m,
            p_e: p,
            binomial_std: (p * (1.0 - p) / m as f64).sqrt(),
            predicted: previous.map(predicted_leak_after_xor).transpose()?,
        });
        previous = Some(p);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attack::{success_rate, BitVerdict};
    use crate::protocol::Arrangement;
    use proptest::prelude::*;

    #[test]
    fn halving_examples() {
        let k = Key::new(vec![1, 0, 1, 1]).unwrap();
        let h = xor_halve(&k).unwrap();
        assert_eq!(h.bits(), &[1, 0]);
        assert_eq!(h.provenance(), Provenance::XorRound(1));
        assert_eq!(xor_halve(&h).unwrap().provenance(), Provenance::XorRound(2));
        assert_eq!(xor_halve(&Key::new(vec![0; 9]).unwrap()).unwrap().bits(), &[0; 4]);
        assert!(xor_halve(&Key::new(vec![1]).unwrap()).is_err());
        assert!(Key::new(vec![]).is_err());
        assert!(Key::new(vec![0, 2]).is_err());
    }

    #[test]
    fn predictor_values() {
        assert!((predicted_leak_after_xor(0.769).unwrap() - 0.644722).abs() < 1e-6);
        let twice = predicted_leak_after_xor(predicted_leak_after_xor(0.769).unwrap()).unwrap();
        assert!((twice - 0.541888).abs() < 1e-5);
        assert_eq!(predicted_leak_after_xor(0.5).unwrap(), 0.5);
        assert!(predicted_leak_after_xor(1.2).is_err());
        assert!(predicted_leak_after_xor(-0.1).is_err());
    }

    fn outcome(q: &[u8]) -> AttackOutcome {
        let bits = q
            .iter()
            .enumerate()
            .map(|(i, &q)| BitVerdict {
                bit: i as u64,
                rho_a: 0.0,
                rho_b: 0.0,
                rho: 0.0,
                guess: if q == 1 { Arrangement::LH } else { Arrangement::HL },
                truth: Arrangement::LH,
                q,
            })
            .collect();
        AttackOutcome { bits, summary: success_rate(q).unwrap() }
    }

    #[test]
    fn perfect_eve_stays_perfect() {
        let r = empirical_amplification(&outcome(&[1; 64]), 3).unwrap();
        assert_eq!(r.len(), 4);
        assert!(r.iter().all(|x| x.p_e == 1.0));
        assert_eq!(r.iter().map(|x| x.n_bits).collect::<Vec<_>>(), vec![64, 32, 16, 8]);
        assert!(empirical_amplification(&outcome(&[1; 4]), 3).is_err());
    }

    #[test]
    fn wrong_pairs_cancel() {
        // Both bits wrong: the XOR is right.
        let r = empirical_amplification(&outcome(&[0, 0, 1, 0]), 1).unwrap();
        assert_eq!(r[1].p_e, 0.5);
        assert_eq!(r[0].p_e, 0.25);
        assert_eq!(r[1].predicted, Some(0.625));
    }

    proptest! {
        #[test]
        fn contraction_towards_half(p in 0.5001f64..0.9999) {
            let mut x = p;
            // The advantage squares each round: 2(p - 1/2)^2.
            while x - 0.5 > 1e-6 {
                let next = predicted_leak_after_xor(x).unwrap();
                prop_assert!(next < x && next > 0.5);
                prop_assert!((next - 0.5 - 2.0 * (x - 0.5).powi(2)).abs() < 1e-12);
                x = next;
            }
        }

        #[test]
        fn round_lengths(bits in proptest::collection::vec(0u8..2, 2..300), rounds in 1u32..4) {
            let mut k = Key::new(bits.clone()).unwrap();
            for r in 1..=rounds {
                if k.len() < 2 { break; }
                k = xor_halve(&k).unwrap();
                prop_assert_eq!(k.len(), bits.len() >> r);
            }
        }
    }
}
