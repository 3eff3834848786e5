//! Swap-or-not: a PRF-to-PRP construction for arbitrary finite domains.
//!
//! * [`domain`]: the group `([N], +)` being permuted.
//! * [`cipher`]: the enciphering loop, plain and tweakable.
//! * [`prf`]: subkeys and round bits from a keyed PRF.
//! * [`bounds`]: NCPA/CCA advantage bounds and round planning.
//! * [`mixing`]: exact distance-to-uniform of the underlying card shuffle.
//! * [`fpe`]: format-preserving encryption of digit strings.
//!
//! Round functions built from linear or otherwise structured maps instead of
//! a PRF are not secure; only use [`prf::PrfRounds`] (or [`cipher::IdealRounds`]
//! for experiments) as the round-function source.

pub mod bounds;
pub mod cipher;
pub mod domain;
pub mod error;
pub mod fpe;
pub mod mixing;
pub mod prf;

pub use cipher::{Cipher, RoundFunction, RoundMaterial, Tweak};
pub use domain::{Domain, GroupLaw};
pub use error::{Error, Result};
pub use prf::PrfKey;
