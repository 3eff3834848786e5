//! The swap-or-not enciphering loop.
//!
//! Each round pairs the current point `X` with `X' = K_i - X` and moves to
//! `X'` when the round function, evaluated on the tweak and on the pair's
//! canonical representative `max(X, X')`, returns 1. Because `X -> K_i - X`
//! is an involution and the decision depends only on the unordered pair,
//! every round is a permutation of `[N]` and is its own inverse; decryption
//! runs the same rounds in the opposite order.
//!
//! The untweaked cipher is the tweakable cipher at the empty tweak.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

use crate::domain::{canonical, Domain};
use crate::error::{Error, Result};

/// Largest supported round count.
pub const MAX_ROUNDS: usize = 1 << 16;

/// Largest supported tweak, in bytes.
pub const MAX_TWEAK_LEN: usize = u32::MAX as usize;

/// Public per-message input selecting one permutation of the keyed family.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Tweak(Vec<u8>);

impl Tweak {
    pub fn new(bytes: impl Into<Vec<u8>>) -> Result<Self> {
        let bytes = bytes.into();
        if bytes.len() > MAX_TWEAK_LEN {
            return Err(Error::TweakTooLong(bytes.len()));
        }
        Ok(Self(bytes))
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// A family of one-bit round functions `F_i(T, X^)`.
///
/// `context` is evaluated once per tweak; `bit` is then called once per round
/// with 1-based round indices.
pub trait RoundFunction {
    type Context;

    fn context(&self, tweak: &Tweak) -> Self::Context;

    fn bit(&self, ctx: &Self::Context, round: u32, canonical: u128) -> bool;
}

impl<T: RoundFunction + ?Sized> RoundFunction for &T {
    type Context = T::Context;

    fn context(&self, tweak: &Tweak) -> Self::Context {
        (**self).context(tweak)
    }

    fn bit(&self, ctx: &Self::Context, round: u32, canonical: u128) -> bool {
        (**self).bit(ctx, round, canonical)
    }
}

/// Stand-in for uniformly random round functions.
///
/// Every `(round, tweak, X^)` bit is derived by hashing it together with a
/// 256-bit seed, so the "lazily sampled" function is memoized implicitly and
/// reproducible across runs.
#[derive(Clone)]
pub struct IdealRounds {
    seed: [u8; 32],
}

impl IdealRounds {
    pub fn new(seed: [u8; 32]) -> Self {
        Self { seed }
    }
}

impl std::fmt::Debug for IdealRounds {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("IdealRounds").finish_non_exhaustive()
    }
}

impl RoundFunction for IdealRounds {
    type Context = Sha256;

    fn context(&self, tweak: &Tweak) -> Sha256 {
        let mut h = Sha256::new();
        h.update(b"swap-or-not/ideal");
        h.update(self.seed);
        h.update((tweak.as_bytes().len() as u64).to_be_bytes());
        h.update(tweak.as_bytes());
        h
    }

    fn bit(&self, ctx: &Sha256, round: u32, canonical: u128) -> bool {
        let mut h = ctx.clone();
        h.update(round.to_be_bytes());
        h.update(canonical.to_be_bytes());
        h.finalize()[0] & 1 == 1
    }
}

/// Round function that always returns the same bit. Test hook.
#[derive(Debug, Clone, Copy)]
pub struct ConstantRounds(pub bool);

impl RoundFunction for ConstantRounds {
    type Context = ();

    fn context(&self, _tweak: &Tweak) {}

    fn bit(&self, _ctx: &(), _round: u32, _canonical: u128) -> bool {
        self.0
    }
}

/// An explicitly materialized round function: a table of coins indexed by
/// `(round, X^)`. Missing entries read as 0 and the tweak is ignored.
///
/// Used to replay recorded traces and the coins of a sampled shuffle.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CoinTable {
    coins: BTreeMap<(u32, u128), bool>,
}

impl CoinTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, round: u32, canonical: u128, bit: bool) {
        self.coins.insert((round, canonical), bit);
    }

    pub fn get(&self, round: u32, canonical: u128) -> Option<bool> {
        self.coins.get(&(round, canonical)).copied()
    }

    pub fn len(&self) -> usize {
        self.coins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coins.is_empty()
    }

    /// Table holding exactly the bits consumed by a traced encryption.
    pub fn from_trace(trace: &[RoundTrace]) -> Self {
        let mut t = Self::new();
        for step in trace {
            t.set(step.round, step.canonical, step.bit);
        }
        t
    }
}

impl RoundFunction for CoinTable {
    type Context = ();

    fn context(&self, _tweak: &Tweak) {}

    fn bit(&self, _ctx: &(), round: u32, canonical: u128) -> bool {
        self.get(round, canonical).unwrap_or(false)
    }
}

/// `F_r, ..., F_1`: round `i` of the wrapper is round `rounds + 1 - i` of `inner`.
#[derive(Debug, Clone)]
pub struct Reversed<F> {
    inner: F,
    rounds: u32,
}

impl<F: RoundFunction> RoundFunction for Reversed<F> {
    type Context = F::Context;

    fn context(&self, tweak: &Tweak) -> Self::Context {
        self.inner.context(tweak)
    }

    fn bit(&self, ctx: &Self::Context, round: u32, canonical: u128) -> bool {
        self.inner.bit(ctx, self.rounds + 1 - round, canonical)
    }
}

/// Subkeys `K_1..K_r` together with the round functions `F_1..F_r`.
#[derive(Debug, Clone)]
pub struct RoundMaterial<F> {
    subkeys: Vec<u128>,
    round_fn: F,
}

impl<F: RoundFunction> RoundMaterial<F> {
    pub fn new(rounds: usize, subkeys: Vec<u128>, round_fn: F) -> Result<Self> {
        if subkeys.len() != rounds {
            return Err(Error::RoundMismatch {
                subkeys: subkeys.len(),
                rounds,
            });
        }
        if rounds > MAX_ROUNDS {
            return Err(Error::TooManyRounds {
                rounds,
                cap: MAX_ROUNDS,
            });
        }
        Ok(Self { subkeys, round_fn })
    }

    pub fn rounds(&self) -> usize {
        self.subkeys.len()
    }

    pub fn subkeys(&self) -> &[u128] {
        &self.subkeys
    }

    pub fn round_fn(&self) -> &F {
        &self.round_fn
    }

    /// `(K_r..K_1, F_r..F_1)`. Enciphering under the reversed material
    /// deciphers under the original.
    pub fn reversed(self) -> RoundMaterial<Reversed<F>> {
        let rounds = self.subkeys.len() as u32;
        let mut subkeys = self.subkeys;
        subkeys.reverse();
        RoundMaterial {
            subkeys,
            round_fn: Reversed {
                inner: self.round_fn,
                rounds,
            },
        }
    }
}

impl RoundMaterial<IdealRounds> {
    /// Uniform subkeys and ideal round functions, all determined by `seed`.
    pub fn ideal(domain: &Domain, rounds: usize, seed: [u8; 32]) -> Result<Self> {
        let mut rng = ChaCha20Rng::from_seed(seed);
        let subkeys = (0..rounds)
            .map(|_| rng.gen_range(0..domain.size()))
            .collect();
        Self::new(rounds, subkeys, IdealRounds::new(seed))
    }
}

/// One round of a traced encryption.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoundTrace {
    /// 1-based round index.
    pub round: u32,
    /// State entering the round.
    pub x: u128,
    pub partner: u128,
    pub canonical: u128,
    pub bit: bool,
}

/// Swap-or-not over a domain with fixed round material.
#[derive(Debug, Clone)]
pub struct Cipher<F> {
    domain: Domain,
    material: RoundMaterial<F>,
}

impl<F: RoundFunction> Cipher<F> {
    pub fn new(domain: Domain, material: RoundMaterial<F>) -> Result<Self> {
        for &k in &material.subkeys {
            domain.check(k)?;
        }
        Ok(Self { domain, material })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn material(&self) -> &RoundMaterial<F> {
        &self.material
    }

    pub fn rounds(&self) -> usize {
        self.material.rounds()
    }

    /// Binds a tweak, evaluating the round function's per-tweak context once.
    pub fn with_tweak(&self, tweak: &Tweak) -> TweakedCipher<'_, F> {
        TweakedCipher {
            cipher: self,
            ctx: self.material.round_fn.context(tweak),
        }
    }

    pub fn encipher(&self, tweak: &Tweak, x: u128) -> Result<u128> {
        self.with_tweak(tweak).encipher(x)
    }

    pub fn decipher(&self, tweak: &Tweak, y: u128) -> Result<u128> {
        self.with_tweak(tweak).decipher(y)
    }

    pub fn encipher_traced(&self, tweak: &Tweak, x: u128) -> Result<(u128, Vec<RoundTrace>)> {
        self.with_tweak(tweak).encipher_traced(x)
    }
}

/// A [`Cipher`] with its tweak context precomputed.
pub struct TweakedCipher<'a, F: RoundFunction> {
    cipher: &'a Cipher<F>,
    ctx: F::Context,
}

impl<F: RoundFunction> TweakedCipher<'_, F> {
    #[inline]
    fn round(&self, i: usize, x: u128) -> (u128, u128, bool) {
        let c = self.cipher;
        let partner = c.domain.partner_unchecked(c.material.subkeys[i], x);
        let hat = canonical(x, partner);
        let bit = c.material.round_fn.bit(&self.ctx, i as u32 + 1, hat);
        (partner, hat, bit)
    }

    pub fn encipher(&self, x: u128) -> Result<u128> {
        let mut x = self.cipher.domain.check(x)?;
        for i in 0..self.cipher.rounds() {
            let (partner, _, bit) = self.round(i, x);
            if bit {
                x = partner;
            }
        }
        Ok(x)
    }

    pub fn decipher(&self, y: u128) -> Result<u128> {
        let mut y = self.cipher.domain.check(y)?;
        for i in (0..self.cipher.rounds()).rev() {
            let (partner, _, bit) = self.round(i, y);
            if bit {
                y = partner;
            }
        }
        Ok(y)
    }

    pub fn encipher_traced(&self, x: u128) -> Result<(u128, Vec<RoundTrace>)> {
        let mut x = self.cipher.domain.check(x)?;
        let mut trace = Vec::with_capacity(self.cipher.rounds());
        for i in 0..self.cipher.rounds() {
            let (partner, hat, bit) = self.round(i, x);
            trace.push(RoundTrace {
                round: i as u32 + 1,
                x,
                partner,
                canonical: hat,
                bit,
            });
            if bit {
                x = partner;
            }
        }
        Ok((x, trace))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn forced(domain: Domain, subkeys: Vec<u128>, bit: bool) -> Cipher<ConstantRounds> {
        let m = RoundMaterial::new(subkeys.len(), subkeys, ConstantRounds(bit)).unwrap();
        Cipher::new(domain, m).unwrap()
    }

    // Single-step reference: one round written out directly from the loop body.
    fn reference_round(n: u128, k: u128, x: u128, bit: bool) -> u128 {
        let partner = (k + n - x) % n;
        if bit {
            partner
        } else {
            x
        }
    }

    #[test]
    fn zero_rounds_is_identity() {
        let d = Domain::mod_add(10).unwrap();
        let c = Cipher::new(d, RoundMaterial::ideal(&d, 0, [7; 32]).unwrap()).unwrap();
        for x in 0..10 {
            assert_eq!(c.encipher(&Tweak::empty(), x).unwrap(), x);
            assert_eq!(c.decipher(&Tweak::empty(), x).unwrap(), x);
        }
    }

    #[test]
    fn all_zero_bits_never_swap() {
        let d = Domain::mod_add(1000).unwrap();
        let c = forced(d, vec![1, 17, 400, 999, 3], false);
        for x in [0, 5, 500, 999] {
            assert_eq!(c.encipher(&Tweak::empty(), x).unwrap(), x);
        }
    }

    #[test]
    fn modadd_hand_trace() {
        let d = Domain::mod_add(10).unwrap();
        let c = forced(d, vec![3, 8], true);
        let expected = reference_round(10, 8, reference_round(10, 3, 7, true), true);
        assert_eq!(expected, 2);
        assert_eq!(c.encipher(&Tweak::empty(), 7).unwrap(), 2);
        assert_eq!(c.decipher(&Tweak::empty(), 2).unwrap(), 7);
    }

    #[test]
    fn xor_hand_trace() {
        let d = Domain::xor_bits(3).unwrap();
        let c = forced(d, vec![5], true);
        assert_eq!(c.encipher(&Tweak::empty(), 2).unwrap(), 2 ^ 5);
    }

    #[test]
    fn trace_matches_encipher() {
        let d = Domain::mod_add(1000).unwrap();
        let c = Cipher::new(d, RoundMaterial::ideal(&d, 17, [1; 32]).unwrap()).unwrap();
        let t = Tweak::new(b"tw".to_vec()).unwrap();
        for x in (0..1000).step_by(37) {
            let (y, trace) = c.encipher_traced(&t, x).unwrap();
            assert_eq!(y, c.encipher(&t, x).unwrap());
            assert_eq!(trace.len(), 17);
            let mut cur = x;
            for step in &trace {
                assert_eq!(step.x, cur);
                assert_eq!(step.canonical, step.x.max(step.partner));
                if step.bit {
                    cur = step.partner;
                }
            }
            assert_eq!(cur, y);

            let replay = Cipher::new(
                d,
                RoundMaterial::new(17, c.material().subkeys().to_vec(), CoinTable::from_trace(&trace))
                    .unwrap(),
            )
            .unwrap();
            assert_eq!(replay.encipher(&Tweak::empty(), x).unwrap(), y);
        }
    }

    #[test]
    fn single_round_trace_length() {
        let d = Domain::mod_add(10).unwrap();
        let c = forced(d, vec![4], true);
        let (_, trace) = c.encipher_traced(&Tweak::empty(), 1).unwrap();
        assert_eq!(trace.len(), 1);
    }

    #[test]
    fn errors() {
        let d = Domain::mod_add(10).unwrap();
        assert_eq!(
            RoundMaterial::new(3, vec![1, 2], ConstantRounds(true)).unwrap_err(),
            Error::RoundMismatch {
                subkeys: 2,
                rounds: 3
            }
        );
        let m = RoundMaterial::new(1, vec![10], ConstantRounds(true)).unwrap();
        assert!(Cipher::new(d, m).is_err());
        let c = forced(d, vec![1], true);
        assert!(c.encipher(&Tweak::empty(), 10).is_err());
        assert!(c.decipher(&Tweak::empty(), 11).is_err());
        let too_many = MAX_ROUNDS + 1;
        assert!(matches!(
            RoundMaterial::new(too_many, vec![0; too_many], ConstantRounds(false)),
            Err(Error::TooManyRounds { .. })
        ));
    }

    #[test]
    fn ideal_bits_are_deterministic() {
        let f = IdealRounds::new([3; 32]);
        let g = IdealRounds::new([3; 32]);
        let t = Tweak::new(vec![1, 2, 3]).unwrap();
        let (cf, cg) = (f.context(&t), g.context(&t));
        for i in 1..50u32 {
            for x in 0..50u128 {
                assert_eq!(f.bit(&cf, i, x), g.bit(&cg, i, x));
            }
        }
    }

    #[test]
    fn reversed_material_inverts() {
        let d = Domain::mod_add(97).unwrap();
        let m = RoundMaterial::ideal(&d, 23, [9; 32]).unwrap();
        let fwd = Cipher::new(d, m.clone()).unwrap();
        let back = Cipher::new(d, m.reversed()).unwrap();
        let t = Tweak::new(b"x".to_vec()).unwrap();
        for x in 0..97 {
            let y = fwd.encipher(&t, x).unwrap();
            assert_eq!(back.encipher(&t, y).unwrap(), x);
        }
    }
}
