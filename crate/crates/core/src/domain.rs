//! Finite abelian groups `([N], +)` that the cipher permutes.
//!
//! Two group laws are supported: addition modulo `N` for arbitrary `N`, and
//! bitwise xor on `n`-bit strings (where `N = 2^n`). The only group operation
//! the cipher needs is the pairing involution `X -> K - X`.

use crate::error::{Error, Result};

/// The group law on `[N]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GroupLaw {
    /// Addition modulo `N`.
    ModAdd,
    /// Xor on `bits`-bit strings. Requires `N = 2^bits`.
    Xor { bits: u32 },
}

/// A message space `[N] = {0, ..., N-1}` with its group law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Domain {
    size: u128,
    law: GroupLaw,
}

impl Domain {
    /// `[N]` under addition modulo `N`.
    pub fn mod_add(size: u128) -> Result<Self> {
        if size < 2 {
            return Err(Error::InvalidDomain(format!("size {size} is below 2")));
        }
        Ok(Self {
            size,
            law: GroupLaw::ModAdd,
        })
    }

    /// `{0,1}^bits` under xor, so `N = 2^bits`.
    pub fn xor_bits(bits: u32) -> Result<Self> {
        if !(1..=127).contains(&bits) {
            return Err(Error::InvalidDomain(format!(
                "xor width {bits} is outside 1..=127"
            )));
        }
        Ok(Self {
            size: 1u128 << bits,
            law: GroupLaw::Xor { bits },
        })
    }

    pub fn new(size: u128, law: GroupLaw) -> Result<Self> {
        match law {
            GroupLaw::ModAdd => Self::mod_add(size),
            GroupLaw::Xor { bits } => {
                let d = Self::xor_bits(bits)?;
                if d.size != size {
                    return Err(Error::InvalidDomain(format!(
                        "xor width {bits} implies size 2^{bits}, got {size}"
                    )));
                }
                Ok(d)
            }
        }
    }

    pub fn size(&self) -> u128 {
        self.size
    }

    pub fn law(&self) -> GroupLaw {
        self.law
    }

    pub fn contains(&self, x: u128) -> bool {
        x < self.size
    }

    pub fn check(&self, x: u128) -> Result<u128> {
        if self.contains(x) {
            Ok(x)
        } else {
            Err(Error::DomainViolation {
                value: x,
                size: self.size,
            })
        }
    }

    /// The partner of `x` under subkey `k`: `k - x` in the group.
    pub fn partner(&self, k: u128, x: u128) -> Result<u128> {
        self.check(k)?;
        self.check(x)?;
        Ok(self.partner_unchecked(k, x))
    }

    /// [`Domain::partner`] without range checks. Callers guarantee `k, x < N`.
    #[inline]
    pub(crate) fn partner_unchecked(&self, k: u128, x: u128) -> u128 {
        match self.law {
            // (k + N - x) mod N, split so that N close to 2^128 cannot overflow.
            GroupLaw::ModAdd => {
                if k >= x {
                    k - x
                } else {
                    self.size - (x - k)
                }
            }
            GroupLaw::Xor { .. } => k ^ x,
        }
    }

    /// Canonical representative of the pair `{x, x'}`, checked against this domain.
    pub fn canonical(&self, x: u128, x_partner: u128) -> Result<u128> {
        self.check(x)?;
        self.check(x_partner)?;
        Ok(canonical(x, x_partner))
    }
}

/// Canonical representative of the unordered pair `{x, x'}`: the larger one.
#[inline]
pub fn canonical(x: u128, x_partner: u128) -> u128 {
    x.max(x_partner)
}
