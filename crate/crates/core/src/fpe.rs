//! Format-preserving encryption of fixed-length digit strings.
//!
//! A string of `length` digits in radix `radix` (alphabet `0-9a-z`) is read as
//! a big-endian number in `[radix^length]`, enciphered with PRF-keyed
//! swap-or-not over that domain, and written back with the same length.

use num_bigint::BigUint;

use crate::bounds::{min_rounds, Model};
use crate::cipher::{Cipher, Tweak};
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::prf::{PrfKey, PrfRounds, PRF_ID};

const ALPHABET: &[u8; 36] = b"0123456789abcdefghijklmnopqrstuvwxyz";

/// Smallest round count accepted for enciphering.
pub const MIN_FPE_ROUNDS: u32 = 2;

/// Default target advantage when rounds are chosen automatically.
pub const DEFAULT_TARGET_ADV: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FormatSpec {
    radix: u32,
    length: u32,
    size: u128,
}

impl FormatSpec {
    pub fn new(radix: u32, length: u32) -> Result<Self> {
        if !(2..=36).contains(&radix) {
            return Err(Error::Format(format!("radix {radix} is outside 2..=36")));
        }
        if length == 0 {
            return Err(Error::Format("length must be positive".into()));
        }
        let size = (radix as u128).checked_pow(length).ok_or_else(|| {
            Error::Format(format!("{radix}^{length} does not fit in 128 bits"))
        })?;
        Ok(Self {
            radix,
            length,
            size,
        })
    }

    pub fn radix(&self) -> u32 {
        self.radix
    }

    pub fn length(&self) -> u32 {
        self.length
    }

    /// `radix^length`.
    pub fn domain_size(&self) -> u128 {
        self.size
    }

    pub fn matches(&self, s: &str) -> bool {
        self.encode(s).is_ok()
    }

    /// Big-endian value of `s`; leading zeros are significant.
    pub fn encode(&self, s: &str) -> Result<u128> {
        if s.len() != self.length as usize {
            return Err(Error::Format(format!(
                "expected {} digits, got {}",
                self.length,
                s.chars().count()
            )));
        }
        s.chars().try_fold(0u128, |acc, c| {
            let d = c
                .to_digit(36)
                .filter(|&d| d < self.radix && !c.is_ascii_uppercase())
                .ok_or_else(|| {
                    Error::Format(format!("{c:?} is not a radix-{} digit", self.radix))
                })?;
            Ok(acc * self.radix as u128 + d as u128)
        })
    }

    /// Zero-padded representation of `v`.
    pub fn decode(&self, mut v: u128) -> Result<String> {
        if v >= self.size {
            return Err(Error::DomainViolation {
                value: v,
                size: self.size,
            });
        }
        let mut out = vec![b'0'; self.length as usize];
        for slot in out.iter_mut().rev() {
            *slot = ALPHABET[(v % self.radix as u128) as usize];
            v /= self.radix as u128;
        }
        Ok(String::from_utf8(out).expect("alphabet is ASCII"))
    }
}

pub fn encode_digits(s: &str, format: &FormatSpec) -> Result<u128> {
    format.encode(s)
}

pub fn decode_digits(v: u128, format: &FormatSpec) -> Result<String> {
    format.decode(v)
}

/// How many rounds to use.
#[derive(Debug, Clone, PartialEq)]
pub enum Rounds {
    Fixed(u32),
    /// Fewest rounds whose CCA bound is at most `target` for `queries` queries.
    /// `queries` defaults to `floor(N/2)`.
    Auto {
        target: f64,
        queries: Option<BigUint>,
    },
}

impl Default for Rounds {
    fn default() -> Self {
        Rounds::Auto {
            target: DEFAULT_TARGET_ADV,
            queries: None,
        }
    }
}

/// Query budget assumed by [`Rounds::Auto`] when none is given.
pub fn default_queries(format: &FormatSpec) -> BigUint {
    BigUint::from((format.domain_size() / 2).max(1))
}

/// Bound model used to plan rounds: tweakable CCA whenever a tweak is in use.
pub fn planning_model(tweak: &Tweak) -> Model {
    if tweak.is_empty() {
        Model::CcaPlain
    } else {
        Model::CcaTweak
    }
}

pub fn resolve_rounds(format: &FormatSpec, tweak: &Tweak, rounds: &Rounds) -> Result<u32> {
    match rounds {
        Rounds::Fixed(r) if *r < MIN_FPE_ROUNDS => Err(Error::Parameter(format!(
            "{r} rounds is below the floor of {MIN_FPE_ROUNDS}"
        ))),
        Rounds::Fixed(r) => Ok(*r),
        Rounds::Auto { target, queries } => {
            let q = queries.clone().unwrap_or_else(|| default_queries(format));
            min_rounds(
                &BigUint::from(format.domain_size()),
                &q,
                *target,
                planning_model(tweak),
            )
        }
    }
}

/// A keyed format-preserving cipher for one [`FormatSpec`] and round count.
#[derive(Debug, Clone)]
pub struct FpeCipher {
    format: FormatSpec,
    cipher: Cipher<PrfRounds<PrfKey>>,
}

impl FpeCipher {
    /// Uses addition modulo `radix^length`, or xor when `xor` is set (which
    /// requires `radix^length` to be a power of two).
    pub fn new(key: PrfKey, format: FormatSpec, rounds: u32, xor: bool) -> Result<Self> {
        if rounds < MIN_FPE_ROUNDS {
            return Err(Error::Parameter(format!(
                "{rounds} rounds is below the floor of {MIN_FPE_ROUNDS}"
            )));
        }
        let n = format.domain_size();
        let domain = if xor {
            if !n.is_power_of_two() {
                return Err(Error::Parameter(format!(
                    "xor needs a power-of-two domain, {n} is not"
                )));
            }
            Domain::xor_bits(n.trailing_zeros())?
        } else {
            Domain::mod_add(n)?
        };
        Ok(Self {
            format,
            cipher: Cipher::from_prf(domain, key, rounds)?,
        })
    }

    pub fn format(&self) -> &FormatSpec {
        &self.format
    }

    pub fn cipher(&self) -> &Cipher<PrfRounds<PrfKey>> {
        &self.cipher
    }

    pub fn encrypt(&self, tweak: &Tweak, plaintext: &str) -> Result<String> {
        let x = self.format.encode(plaintext)?;
        self.format.decode(self.cipher.encipher(tweak, x)?)
    }

    pub fn decrypt(&self, tweak: &Tweak, ciphertext: &str) -> Result<String> {
        let y = self.format.encode(ciphertext)?;
        self.format.decode(self.cipher.decipher(tweak, y)?)
    }
}

fn build(key_hex: &str, format: &FormatSpec, tweak: &[u8], rounds: &Rounds) -> Result<(FpeCipher, Tweak)> {
    let key = PrfKey::from_hex(key_hex)?;
    let tweak = Tweak::new(tweak.to_vec())?;
    let r = resolve_rounds(format, &tweak, rounds)?;
    Ok((FpeCipher::new(key, *format, r, false)?, tweak))
}

pub fn fpe_encrypt(
    key_hex: &str,
    format: &FormatSpec,
    tweak: &[u8],
    rounds: &Rounds,
    plaintext: &str,
) -> Result<String> {
    let (c, t) = build(key_hex, format, tweak, rounds)?;
    c.encrypt(&t, plaintext)
}

pub fn fpe_decrypt(
    key_hex: &str,
    format: &FormatSpec,
    tweak: &[u8],
    rounds: &Rounds,
    ciphertext: &str,
) -> Result<String> {
    let (c, t) = build(key_hex, format, tweak, rounds)?;
    c.decrypt(&t, ciphertext)
}

/// Version of the golden-vector file format. Bumped whenever [`PRF_ID`] or
/// the PRF input layout changes.
pub const GOLDEN_VERSION: u32 = 1;

/// One `key,tweak,radix,length,rounds,plaintext,ciphertext` record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldenVector {
    pub key: String,
    pub tweak: String,
    pub radix: u32,
    pub length: u32,
    pub rounds: u32,
    pub plaintext: String,
    pub ciphertext: String,
}

impl GoldenVector {
    pub fn to_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.key, self.tweak, self.radix, self.length, self.rounds, self.plaintext, self.ciphertext
        )
    }

    pub fn parse_line(line: &str) -> Result<Self> {
        let f: Vec<&str> = line.trim().split(',').collect();
        if f.len() != 7 {
            return Err(Error::Format(format!(
                "golden vector needs 7 fields, got {}",
                f.len()
            )));
        }
        let num = |s: &str| {
            s.parse::<u32>()
                .map_err(|e| Error::Format(format!("bad number {s:?}: {e}")))
        };
        Ok(Self {
            key: f[0].to_string(),
            tweak: f[1].to_string(),
            radix: num(f[2])?,
            length: num(f[3])?,
            rounds: num(f[4])?,
            plaintext: f[5].to_string(),
            ciphertext: f[6].to_string(),
        })
    }

    pub fn format(&self) -> Result<FormatSpec> {
        FormatSpec::new(self.radix, self.length)
    }

    pub fn tweak_bytes(&self) -> Result<Vec<u8>> {
        hex::decode(&self.tweak).map_err(|e| Error::Format(format!("bad tweak hex: {e}")))
    }

    /// Recomputes the ciphertext from the other fields.
    pub fn compute_ciphertext(&self) -> Result<String> {
        fpe_encrypt(
            &self.key,
            &self.format()?,
            &self.tweak_bytes()?,
            &Rounds::Fixed(self.rounds),
            &self.plaintext,
        )
    }
}

/// The fixed inputs the golden vectors are generated from:
/// `(key, tweak, radix, length, rounds, plaintext)`.
const GOLDEN_INPUTS: [(&str, &str, u32, u32, u32, &str); 10] = [
    (
        "000102030405060708090a0b0c0d0e0f101112131415161718191a1b1c1d1e1f",
        "",
        10,
        9,
        340,
        "123456789",
    ),
    (
        "000102030405060708090a0b0c0d0e0f101112131415161718191a1b1c1d1e1f",
        "",
        10,
        9,
        340,
        "000000000",
    ),
    (
        "000102030405060708090a0b0c0d0e0f101112131415161718191a1b1c1d1e1f",
        "7573657240657861",
        10,
        9,
        340,
        "123456789",
    ),
    (
        "2b7e151628aed2a6abf7158809cf4f3c2b7e151628aed2a6abf7158809cf4f3c",
        "",
        10,
        16,
        500,
        "4111111111111111",
    ),
    (
        "2b7e151628aed2a6abf7158809cf4f3c2b7e151628aed2a6abf7158809cf4f3c",
        "3737373737373737",
        10,
        16,
        500,
        "5500000000000004",
    ),
    (
        "ffeeddccbbaa99887766554433221100ffeeddccbbaa99887766554433221100",
        "",
        36,
        6,
        200,
        "a1b2c3",
    ),
    (
        "ffeeddccbbaa99887766554433221100ffeeddccbbaa99887766554433221100",
        "00",
        36,
        6,
        200,
        "zzzzzz",
    ),
    (
        "0000000000000000000000000000000000000000000000000000000000000000",
        "",
        2,
        20,
        120,
        "10110011100011110000",
    ),
    (
        "0000000000000000000000000000000000000000000000000000000000000000",
        "0102030405060708090a0b0c0d0e0f10",
        16,
        8,
        192,
        "deadbeef",
    ),
    (
        "5468697320697320612074657374206b6579202d2d20646f206e6f7420757365",
        "",
        10,
        4,
        2,
        "0042",
    ),
];

pub fn golden_vectors() -> Result<Vec<GoldenVector>> {
    GOLDEN_INPUTS
        .iter()
        .map(|&(key, tweak, radix, length, rounds, plaintext)| {
            let mut v = GoldenVector {
                key: key.into(),
                tweak: tweak.into(),
                radix,
                length,
                rounds,
                plaintext: plaintext.into(),
                ciphertext: String::new(),
            };
            v.ciphertext = v.compute_ciphertext()?;
            Ok(v)
        })
        .collect()
}

pub fn golden_header() -> String {
    format!(
        "# swap-or-not golden vectors v{GOLDEN_VERSION} prf={PRF_ID}\n\
         # key,tweak,radix,length,rounds,plaintext,ciphertext\n"
    )
}

pub fn render_golden_file(vectors: &[GoldenVector]) -> String {
    let mut s = golden_header();
    for v in vectors {
        s.push_str(&v.to_line());
        s.push('\n');
    }
    s
}

/// Parses a golden-vector file, skipping `#` comments and blank lines.
pub fn parse_golden_file(text: &str) -> Result<Vec<GoldenVector>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(GoldenVector::parse_line)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const KEY: &str = "000102030405060708090a0b0c0d0e0f101112131415161718191a1b1c1d1e1f";

    #[test]
    fn codec_examples() {
        let f10 = FormatSpec::new(10, 3).unwrap();
        assert_eq!(f10.encode("000").unwrap(), 0);
        assert_eq!(f10.encode("042").unwrap(), 42);
        assert_eq!(f10.decode(0).unwrap(), "000");
        assert_eq!(f10.decode(42).unwrap(), "042");
        let f36 = FormatSpec::new(36, 2).unwrap();
        assert_eq!(f36.encode("zz").unwrap(), 1295);
        assert_eq!(f36.decode(1295).unwrap(), "zz");
    }

    #[test]
    fn codec_errors() {
        let f = FormatSpec::new(10, 3).unwrap();
        assert!(f.encode("12").is_err());
        assert!(f.encode("1234").is_err());
        assert!(f.encode("12a").is_err());
        assert!(f.encode("1-2").is_err());
        assert!(f.decode(1000).is_err());
        let hexf = FormatSpec::new(16, 2).unwrap();
        assert!(hexf.encode("AB").is_err());
        assert_eq!(hexf.encode("ab").unwrap(), 0xab);
        assert!(FormatSpec::new(1, 3).is_err());
        assert!(FormatSpec::new(37, 3).is_err());
        assert!(FormatSpec::new(10, 0).is_err());
        assert!(FormatSpec::new(10, 39).is_err());
        assert!(FormatSpec::new(10, 38).is_ok());
        assert!(FormatSpec::new(2, 128).is_err());
    }

    #[test]
    fn round_floor() {
        let f = FormatSpec::new(10, 4).unwrap();
        assert!(fpe_encrypt(KEY, &f, b"", &Rounds::Fixed(1), "1234").is_err());
        assert!(fpe_encrypt(KEY, &f, b"", &Rounds::Fixed(2), "1234").is_ok());
        assert!(fpe_encrypt("abcd", &f, b"", &Rounds::Fixed(2), "1234").is_err());
    }

    #[test]
    fn auto_rounds_meet_the_target() {
        let f = FormatSpec::new(10, 9).unwrap();
        let n = BigUint::from(f.domain_size());
        let plain = resolve_rounds(&f, &Tweak::empty(), &Rounds::default()).unwrap();
        let q = default_queries(&f);
        assert!(crate::bounds::cca_bound(&n, plain, &q).unwrap().value() <= DEFAULT_TARGET_ADV);
        let tweaked =
            resolve_rounds(&f, &Tweak::new(b"t".to_vec()).unwrap(), &Rounds::default()).unwrap();
        assert!(tweaked > plain);
        let r = Rounds::Auto {
            target: 1e-10,
            queries: Some(BigUint::from(100_000_000u64)),
        };
        let recipe = resolve_rounds(&f, &Tweak::empty(), &r).unwrap();
        assert!(recipe <= 340 && recipe % 2 == 0);
        let too_many = Rounds::Auto {
            target: 1e-10,
            queries: Some(n + 1u8),
        };
        assert!(resolve_rounds(&f, &Tweak::empty(), &too_many).is_err());
    }

    #[test]
    fn xor_requires_power_of_two() {
        let key = PrfKey::from_hex(KEY).unwrap();
        assert!(FpeCipher::new(key.clone(), FormatSpec::new(10, 3).unwrap(), 10, true).is_err());
        let c = FpeCipher::new(key, FormatSpec::new(16, 3).unwrap(), 10, true).unwrap();
        let t = Tweak::empty();
        let ct = c.encrypt(&t, "abc").unwrap();
        assert_eq!(c.decrypt(&t, &ct).unwrap(), "abc");
    }

    #[test]
    fn golden_lines_parse_back() {
        let v = golden_vectors().unwrap();
        assert_eq!(v.len(), 10);
        let text = render_golden_file(&v);
        assert_eq!(parse_golden_file(&text).unwrap(), v);
        assert!(GoldenVector::parse_line("a,b,c").is_err());
    }
}
