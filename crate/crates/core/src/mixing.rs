//! Exact distributions of the projected swap-or-not shuffle on small decks.
//!
//! The projected shuffle follows the positions of `q` distinguished cards.
//! Its stationary law is the uniform distribution on `q`-tuples of distinct
//! positions. [`ProjectedDistribution::step`] applies one round exactly by
//! averaging over every subkey and every coin pattern, so the total variation
//! distance to stationarity after `r` rounds is computed, not estimated.

use std::collections::HashMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::bounds::ncpa_bound;
use crate::cipher::{CoinTable, RoundMaterial};
use crate::domain::{canonical, Domain, GroupLaw};
use crate::error::{Error, Result};

/// Largest support `N (N-1) ... (N-q+1)` the exact computation accepts.
pub const MAX_SUPPORT: u128 = 1_000_000;

/// Largest round count for [`exact_tvd_after`].
pub const MAX_EXACT_ROUNDS: u32 = 64;

/// Largest deck for [`shuffle_sample`].
pub const MAX_SHUFFLE_SIZE: u128 = 1 << 20;

/// Slack allowed when comparing a float TVD against a bound.
pub const TVD_SLACK: f64 = 1e-12;

/// All `q`-tuples of distinct positions in `[N]`, in lexicographic order.
#[derive(Debug)]
struct Support {
    tuples: Vec<Vec<u32>>,
    index: HashMap<Vec<u32>, usize>,
}

fn falling_factorial(n: u128, q: usize) -> u128 {
    (0..q as u128).fold(1u128, |acc, i| acc.saturating_mul(n - i))
}

impl Support {
    fn build(n: u32, q: usize) -> Self {
        let mut tuples = Vec::new();
        let mut cur = Vec::with_capacity(q);
        fn rec(n: u32, q: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
            if cur.len() == q {
                out.push(cur.clone());
                return;
            }
            for x in 0..n {
                if !cur.contains(&x) {
                    cur.push(x);
                    rec(n, q, cur, out);
                    cur.pop();
                }
            }
        }
        rec(n, q, &mut cur, &mut tuples);
        let index = tuples
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Self { tuples, index }
    }
}

/// Exact law of the positions of `q` tracked cards.
#[derive(Debug, Clone)]
pub struct ProjectedDistribution {
    domain: Domain,
    support: Arc<Support>,
    probs: Vec<f64>,
}

impl ProjectedDistribution {
    fn empty(domain: Domain, q: usize) -> Result<Self> {
        let n = domain.size();
        if q == 0 || q as u128 > n {
            return Err(Error::Parameter(format!(
                "number of tracked cards must be in 1..={n}, got {q}"
            )));
        }
        let support = falling_factorial(n, q);
        if support > MAX_SUPPORT {
            return Err(Error::Intractable {
                support,
                limit: MAX_SUPPORT,
            });
        }
        let support = Arc::new(Support::build(n as u32, q));
        let probs = vec![0.0; support.tuples.len()];
        Ok(Self {
            domain,
            support,
            probs,
        })
    }

    /// All mass on the tuple `start`, whose entries must be distinct.
    pub fn point_mass(domain: Domain, start: &[u128]) -> Result<Self> {
        let mut d = Self::empty(domain, start.len())?;
        let key = d.key(start)?;
        let i = *d
            .support
            .index
            .get(&key)
            .ok_or_else(|| Error::Parameter("tracked positions must be distinct".into()))?;
        d.probs[i] = 1.0;
        Ok(d)
    }

    /// The stationary law: `q` positions sampled without replacement.
    pub fn stationary(domain: Domain, q: usize) -> Result<Self> {
        let mut d = Self::empty(domain, q)?;
        let p = 1.0 / d.probs.len() as f64;
        d.probs.iter_mut().for_each(|x| *x = p);
        Ok(d)
    }

    fn key(&self, tuple: &[u128]) -> Result<Vec<u32>> {
        tuple
            .iter()
            .map(|&x| self.domain.check(x).map(|x| x as u32))
            .collect()
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn tracked(&self) -> usize {
        self.support.tuples.first().map_or(0, Vec::len)
    }

    pub fn support_len(&self) -> usize {
        self.probs.len()
    }

    /// Probability of a tuple; 0 for tuples outside the support.
    pub fn prob(&self, tuple: &[u128]) -> f64 {
        self.key(tuple)
            .ok()
            .and_then(|k| self.support.index.get(&k).copied())
            .map_or(0.0, |i| self.probs[i])
    }

    pub fn total_mass(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Iterates over `(tuple, probability)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<u128>, f64)> + '_ {
        self.support
            .tuples
            .iter()
            .zip(&self.probs)
            .map(|(t, &p)| (t.iter().map(|&x| x as u128).collect(), p))
    }

    /// Total variation distance, `1/2 sum |p - p'|`.
    pub fn tvd(&self, other: &Self) -> Result<f64> {
        self.check_compatible(other)?;
        Ok(0.5
            * self
                .probs
                .iter()
                .zip(&other.probs)
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>())
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.domain != other.domain || self.probs.len() != other.probs.len() {
            return Err(Error::Parameter(
                "distributions live on different supports".into(),
            ));
        }
        Ok(())
    }

    /// One round of the shuffle, averaged over all subkeys and coins.
    ///
    /// Two tracked cards sitting on partner positions `x` and `K - x` share
    /// one coin: they swap together or not at all.
    pub fn step(&self) -> Self {
        let n = self.domain.size() as u32;
        let q = self.tracked();
        let mut out = vec![0.0; self.probs.len()];
        let mut partners = vec![0u32; q];
        let mut group = vec![usize::MAX; q];
        let mut next = vec![0u32; q];

        for (tuple, &p) in self.support.tuples.iter().zip(&self.probs) {
            if p == 0.0 {
                continue;
            }
            for k in 0..n {
                let mut groups = 0usize;
                for j in 0..q {
                    let x = tuple[j];
                    let y = self.domain.partner_unchecked(k as u128, x as u128) as u32;
                    partners[j] = y;
                    group[j] = if y == x {
                        // Fixed point: the coin cannot move it.
                        usize::MAX
                    } else if let Some(m) = tuple[..j].iter().position(|&t| t == y) {
                        group[m]
                    } else {
                        groups += 1;
                        groups - 1
                    };
                }
                let weight = p / (n as f64 * (1u64 << groups) as f64);
                for coins in 0..(1u32 << groups) {
                    for j in 0..q {
                        let g = group[j];
                        next[j] = if g != usize::MAX && coins >> g & 1 == 1 {
                            partners[j]
                        } else {
                            tuple[j]
                        };
                    }
                    let i = self.support.index[&next];
                    out[i] += weight;
                }
            }
        }
        Self {
            domain: self.domain,
            support: Arc::clone(&self.support),
            probs: out,
        }
    }
}

/// `||tau_r - pi||` for the projected shuffle started from `start`.
pub fn exact_tvd_after(domain: Domain, rounds: u32, start: &[u128]) -> Result<f64> {
    Ok(*tvd_curve(domain, rounds, start)?.last().expect("curve is nonempty"))
}

/// Distances to stationarity after `0..=rounds` rounds.
pub fn tvd_curve(domain: Domain, rounds: u32, start: &[u128]) -> Result<Vec<f64>> {
    if rounds > MAX_EXACT_ROUNDS {
        return Err(Error::Parameter(format!(
            "exact computation supports at most {MAX_EXACT_ROUNDS} rounds, got {rounds}"
        )));
    }
    let pi = ProjectedDistribution::stationary(domain, start.len())?;
    let mut tau = ProjectedDistribution::point_mass(domain, start)?;
    let mut out = Vec::with_capacity(rounds as usize + 1);
    out.push(tau.tvd(&pi)?);
    for _ in 0..rounds {
        tau = tau.step();
        out.push(tau.tvd(&pi)?);
    }
    Ok(out)
}

/// Which starting tuples a grid point is evaluated from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StartPolicy {
    /// Every tuple of distinct positions; the reported distance is the worst.
    All,
    /// Only `(0, 1, ..., q-1)`.
    Canonical,
    /// `All` while the support has at most this many tuples, else `Canonical`.
    AllUpTo(usize),
}

/// One point of the mixing check: exact distance against the NCPA bound.
#[derive(Debug, Clone, PartialEq)]
pub struct GridRow {
    pub law: GroupLaw,
    pub n: u128,
    pub q: usize,
    pub rounds: u32,
    pub tvd: f64,
    pub bound: f64,
    pub pass: bool,
}

pub const GRID_CSV_HEADER: &str = "law,N,q,r,tvd,bound,pass";

pub fn law_name(law: GroupLaw) -> &'static str {
    match law {
        GroupLaw::ModAdd => "add",
        GroupLaw::Xor { .. } => "xor",
    }
}

impl GridRow {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{:.12e},{:.12e},{}",
            law_name(self.law),
            self.n,
            self.q,
            self.rounds,
            self.tvd,
            self.bound,
            if self.pass { "pass" } else { "fail" }
        )
    }
}

/// Domains with `min_n <= N <= max_n`: addition mod `N` for all, xor where `N` is a power of two.
pub fn grid_domains(min_n: u128, max_n: u128) -> Result<Vec<Domain>> {
    let mut out = Vec::new();
    for n in min_n.max(2)..=max_n {
        out.push(Domain::mod_add(n)?);
        if n.is_power_of_two() {
            out.push(Domain::xor_bits(n.trailing_zeros())?);
        }
    }
    Ok(out)
}

/// Worst distance to stationarity over the chosen starts, for rounds `0..=max_r`.
pub fn worst_tvd_curve(domain: Domain, q: usize, max_r: u32, policy: StartPolicy) -> Result<Vec<f64>> {
    let canonical_start: Vec<u128> = (0..q as u128).collect();
    let all = match policy {
        StartPolicy::All => true,
        StartPolicy::Canonical => false,
        StartPolicy::AllUpTo(limit) => falling_factorial(domain.size(), q) <= limit as u128,
    };
    let starts: Vec<Vec<u128>> = if all {
        ProjectedDistribution::stationary(domain, q)?
            .iter()
            .map(|(t, _)| t)
            .collect()
    } else {
        vec![canonical_start]
    };
    let mut worst = vec![0.0f64; max_r as usize + 1];
    for s in &starts {
        for (w, v) in worst.iter_mut().zip(tvd_curve(domain, max_r, s)?) {
            *w = w.max(v);
        }
    }
    Ok(worst)
}

/// Checks exact distances against the NCPA bound for every domain with
/// `min_n <= N <= max_n`, `1 <= q <= max_q` and `1 <= r <= max_r`.
pub fn validate_grid(
    min_n: u128,
    max_n: u128,
    max_q: usize,
    max_r: u32,
    policy: StartPolicy,
) -> Result<Vec<GridRow>> {
    let mut rows = Vec::new();
    for domain in grid_domains(min_n, max_n)? {
        let n = domain.size();
        for q in 1..=max_q.min(n as usize) {
            let curve = worst_tvd_curve(domain, q, max_r, policy)?;
            for r in 1..=max_r {
                let tvd = curve[r as usize];
                let bound = ncpa_bound(&n.into(), r, &(q as u64).into())?.value();
                rows.push(GridRow {
                    law: domain.law(),
                    n,
                    q,
                    rounds: r,
                    tvd,
                    bound,
                    pass: tvd <= bound + TVD_SLACK,
                });
            }
        }
    }
    Ok(rows)
}

/// One realization of the `r`-round shuffle of a full deck.
#[derive(Debug, Clone)]
pub struct ShuffleSample {
    pub subkeys: Vec<u128>,
    /// The coin flipped for each pair, keyed by `(round, max of the pair)`.
    pub coins: CoinTable,
    /// `positions[card]` is the final position of the card that started at `card`.
    pub positions: Vec<u128>,
}

impl ShuffleSample {
    /// The sampled randomness as cipher key material.
    pub fn round_material(&self) -> RoundMaterial<CoinTable> {
        RoundMaterial::new(self.subkeys.len(), self.subkeys.clone(), self.coins.clone())
            .expect("one subkey per round")
    }
}

/// Shuffles a deck of `N` cards for `rounds` rounds, recording all randomness.
pub fn shuffle_sample(domain: Domain, rounds: u32, seed: u64) -> Result<ShuffleSample> {
    let n = domain.size();
    if n > MAX_SHUFFLE_SIZE {
        return Err(Error::Parameter(format!(
            "deck of {n} cards exceeds the limit of {MAX_SHUFFLE_SIZE}"
        )));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    // deck[position] = card
    let mut deck: Vec<u128> = (0..n).collect();
    let mut subkeys = Vec::with_capacity(rounds as usize);
    let mut coins = CoinTable::new();
    for t in 1..=rounds {
        let k = rng.gen_range(0..n);
        subkeys.push(k);
        for x in 0..n {
            let y = domain.partner_unchecked(k, x);
            if y < x {
                continue;
            }
            let b: bool = rng.gen();
            coins.set(t, canonical(x, y), b);
            if b {
                deck.swap(x as usize, y as usize);
            }
        }
    }
    let mut positions = vec![0u128; n as usize];
    for (pos, &card) in deck.iter().enumerate() {
        positions[card as usize] = pos as u128;
    }
    Ok(ShuffleSample {
        subkeys,
        coins,
        positions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_card_two_positions() {
        let d = Domain::mod_add(2).unwrap();
        let s = ProjectedDistribution::point_mass(d, &[0]).unwrap().step();
        assert!((s.prob(&[0]) - 0.75).abs() < 1e-15);
        assert!((s.prob(&[1]) - 0.25).abs() < 1e-15);
        assert!((exact_tvd_after(d, 1, &[0]).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn partners_share_a_coin() {
        let d = Domain::mod_add(2).unwrap();
        let s = ProjectedDistribution::point_mass(d, &[0, 1]).unwrap().step();
        assert_eq!(s.support_len(), 2);
        // K=1 pairs them (coin decides); K=0 fixes both.
        assert!((s.prob(&[0, 1]) - 0.75).abs() < 1e-15);
        assert!((s.prob(&[1, 0]) - 0.25).abs() < 1e-15);
        assert_eq!(s.prob(&[0, 0]), 0.0);
        assert!((s.total_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_rounds_is_point_mass_distance() {
        for n in 2..10 {
            let d = Domain::mod_add(n).unwrap();
            let v = exact_tvd_after(d, 0, &[0]).unwrap();
            assert!((v - (1.0 - 1.0 / n as f64)).abs() < 1e-15);
        }
    }

    #[test]
    fn stationary_is_fixed() {
        for d in grid_domains(2, 7).unwrap() {
            for q in 1..=3.min(d.size() as usize) {
                let pi = ProjectedDistribution::stationary(d, q).unwrap();
                let next = pi.step();
                assert!(next.tvd(&pi).unwrap() * 2.0 < 1e-12);
            }
        }
    }

    #[test]
    fn guards() {
        let d = Domain::mod_add(1000).unwrap();
        assert!(matches!(
            ProjectedDistribution::stationary(d, 3),
            Err(Error::Intractable { .. })
        ));
        let small = Domain::mod_add(5).unwrap();
        assert!(ProjectedDistribution::point_mass(small, &[1, 1]).is_err());
        assert!(ProjectedDistribution::point_mass(small, &[5]).is_err());
        assert!(ProjectedDistribution::stationary(small, 0).is_err());
        assert!(ProjectedDistribution::stationary(small, 6).is_err());
        assert!(exact_tvd_after(small, 65, &[0]).is_err());
        assert!(shuffle_sample(Domain::mod_add((1 << 20) + 1).unwrap(), 1, 0).is_err());
        let a = ProjectedDistribution::stationary(small, 1).unwrap();
        let b = ProjectedDistribution::stationary(small, 2).unwrap();
        assert!(a.tvd(&b).is_err());
    }

    #[test]
    fn xor_small_grid_point() {
        let d = Domain::xor_bits(2).unwrap();
        let v = exact_tvd_after(d, 6, &[0, 1]).unwrap();
        let bound = ncpa_bound(&4u32.into(), 6, &2u32.into()).unwrap().value();
        assert!(v <= bound, "{v} > {bound}");
    }

    #[test]
    fn shuffle_zero_rounds_is_identity() {
        let d = Domain::mod_add(16).unwrap();
        let s = shuffle_sample(d, 0, 9).unwrap();
        assert_eq!(s.positions, (0..16).collect::<Vec<_>>());
    }

    #[test]
    fn shuffle_outputs_permutations() {
        let d = Domain::mod_add(37).unwrap();
        for seed in 0..100 {
            let s = shuffle_sample(d, 5, seed).unwrap();
            let mut p = s.positions.clone();
            p.sort_unstable();
            assert_eq!(p, (0..37).collect::<Vec<_>>());
        }
    }
}
