//! Subkeys and round bits derived from a keyed PRF.
//!
//! PRF inputs use a fixed-width layout so that distinct logical inputs can
//! never collide:
//!
//! | record      | layout                                                     |
//! |-------------|------------------------------------------------------------|
//! | subkey      | `'K'` ‖ round (u32 BE) ‖ attempt (u32 BE)                  |
//! | round bit   | `'B'` ‖ round (u32 BE) ‖ tweak digest (16 B) ‖ X^ (u128 BE) |
//! | tweak       | `'T'` ‖ tweak bytes                                        |
//!
//! The round bit is bit 0 (least significant bit of byte 0) of the PRF block.
//! Subkeys are drawn by rejection sampling on the leading 64 bits of the
//! block (all 128 bits when `N > 2^63`), so they are exactly uniform on `[N]`.

use hmac::{Hmac, KeyInit, Mac};
use sha2::Sha256;

use crate::cipher::{Cipher, RoundFunction, RoundMaterial, Tweak};
use crate::domain::Domain;
use crate::error::{Error, Result};

/// Identifier of the reference PRF. Golden vectors are tied to it.
pub const PRF_ID: &str = "hmac-sha256-128";

pub const KEY_LEN: usize = 32;

const TAG_SUBKEY: u8 = b'K';
const TAG_BIT: u8 = b'B';
const TAG_TWEAK: u8 = b'T';

/// A keyed function from byte strings to 128-bit blocks.
pub trait Prf {
    fn eval(&self, input: &[u8]) -> [u8; 16];
}

impl<P: Prf + ?Sized> Prf for &P {
    fn eval(&self, input: &[u8]) -> [u8; 16] {
        (**self).eval(input)
    }
}

/// 256-bit key for the reference PRF, HMAC-SHA-256 truncated to 128 bits.
#[derive(Clone)]
pub struct PrfKey {
    mac: Hmac<Sha256>,
}

impl PrfKey {
    pub fn new(key: [u8; KEY_LEN]) -> Self {
        Self {
            mac: Hmac::<Sha256>::new_from_slice(&key).expect("HMAC accepts any key length"),
        }
    }

    /// Parses a 64-character hex key.
    pub fn from_hex(s: &str) -> Result<Self> {
        let bytes = hex::decode(s.trim()).map_err(|e| Error::Key(e.to_string()))?;
        let key: [u8; KEY_LEN] = bytes.try_into().map_err(|b: Vec<u8>| {
            Error::Key(format!("expected {KEY_LEN} bytes, got {}", b.len()))
        })?;
        Ok(Self::new(key))
    }
}

impl std::fmt::Debug for PrfKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("PrfKey(..)")
    }
}

impl Prf for PrfKey {
    fn eval(&self, input: &[u8]) -> [u8; 16] {
        let mut mac = self.mac.clone();
        mac.update(input);
        let tag = mac.finalize().into_bytes();
        let mut out = [0u8; 16];
        out.copy_from_slice(&tag[..16]);
        out
    }
}

/// `H_K(T)`: a 128-bit digest standing in for the tweak in every round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TweakDigest(pub [u8; 16]);

pub fn encode_subkey_input(round: u32, attempt: u32) -> [u8; 9] {
    let mut buf = [0u8; 9];
    buf[0] = TAG_SUBKEY;
    buf[1..5].copy_from_slice(&round.to_be_bytes());
    buf[5..9].copy_from_slice(&attempt.to_be_bytes());
    buf
}

pub fn encode_bit_input(round: u32, digest: &TweakDigest, canonical: u128) -> [u8; 37] {
    let mut buf = [0u8; 37];
    buf[0] = TAG_BIT;
    buf[1..5].copy_from_slice(&round.to_be_bytes());
    buf[5..21].copy_from_slice(&digest.0);
    buf[21..37].copy_from_slice(&canonical.to_be_bytes());
    buf
}

pub fn tweak_digest<P: Prf>(prf: &P, tweak: &Tweak) -> TweakDigest {
    let mut input = Vec::with_capacity(1 + tweak.as_bytes().len());
    input.push(TAG_TWEAK);
    input.extend_from_slice(tweak.as_bytes());
    TweakDigest(prf.eval(&input))
}

pub fn round_bit<P: Prf>(prf: &P, round: u32, digest: &TweakDigest, canonical: u128) -> bool {
    prf.eval(&encode_bit_input(round, digest, canonical))[0] & 1 == 1
}

/// Sample width used for `[N]`: 64 bits unless `N > 2^63`.
pub fn sample_width(n: u128) -> u32 {
    if n > 1u128 << 63 {
        128
    } else {
        64
    }
}

/// Reads a `width`-bit big-endian sample from the front of a PRF block.
pub fn block_sample(block: &[u8; 16], width: u32) -> u128 {
    let full = u128::from_be_bytes(*block);
    if width >= 128 {
        full
    } else {
        full >> (128 - width)
    }
}

/// Maps a `width`-bit sample to `[n]`, or `None` if it falls in the biased
/// tail `>= n * floor(2^width / n)`.
pub fn reduce_or_reject(sample: u128, n: u128, width: u32) -> Option<u128> {
    // tail = 2^width mod n; the accepted region is [0, 2^width - tail).
    let tail = if width >= 128 {
        (u128::MAX % n + 1) % n
    } else {
        (1u128 << width) % n
    };
    if tail != 0 {
        let limit = if width >= 128 {
            u128::MAX - tail + 1
        } else {
            (1u128 << width) - tail
        };
        if sample >= limit {
            return None;
        }
    }
    Some(sample % n)
}

/// Subkeys `K_1..K_r`, each uniform on `[N]`.
pub fn derive_subkeys<P: Prf>(prf: &P, domain: &Domain, rounds: u32) -> Vec<u128> {
    let n = domain.size();
    let width = sample_width(n);
    (1..=rounds)
        .map(|i| {
            (0u32..)
                .find_map(|attempt| {
                    let block = prf.eval(&encode_subkey_input(i, attempt));
                    reduce_or_reject(block_sample(&block, width), n, width)
                })
                .expect("rejection probability is below 1/2 per attempt")
        })
        .collect()
}

/// Round functions backed by a PRF, evaluated on the tweak digest.
#[derive(Debug, Clone)]
pub struct PrfRounds<P> {
    prf: P,
}

impl<P: Prf> PrfRounds<P> {
    pub fn new(prf: P) -> Self {
        Self { prf }
    }

    pub fn prf(&self) -> &P {
        &self.prf
    }
}

impl<P: Prf> RoundFunction for PrfRounds<P> {
    type Context = TweakDigest;

    fn context(&self, tweak: &Tweak) -> TweakDigest {
        tweak_digest(&self.prf, tweak)
    }

    fn bit(&self, ctx: &TweakDigest, round: u32, canonical: u128) -> bool {
        round_bit(&self.prf, round, ctx, canonical)
    }
}

impl<P: Prf> Cipher<PrfRounds<P>> {
    /// Swap-or-not keyed by a PRF: subkeys and round bits are both derived from it.
    pub fn from_prf(domain: Domain, prf: P, rounds: u32) -> Result<Self> {
        let subkeys = derive_subkeys(&prf, &domain, rounds);
        let material = RoundMaterial::new(rounds as usize, subkeys, PrfRounds::new(prf))?;
        Cipher::new(domain, material)
    }
}
