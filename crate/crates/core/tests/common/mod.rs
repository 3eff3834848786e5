//! Exact-arithmetic oracle for the advantage bounds.
//!
//! Every bound raised to a small integer power `k` is a ratio of integers.
//! The oracle computes that ratio exactly, scales it by a power of ten and
//! takes an integer `k`-th root, giving the bound to at least `DIGITS`
//! significant digits without any floating point.
#![allow(dead_code)]

use num_bigint::BigUint;

pub const DIGITS: u32 = 150;

pub fn big(v: u128) -> BigUint {
    BigUint::from(v)
}

pub fn pow(b: &BigUint, e: u32) -> BigUint {
    b.pow(e)
}

/// `v` where `v^k = num / den`, as f64.
pub fn root_of_ratio(num: BigUint, den: BigUint, k: u32) -> f64 {
    // Extra decimal places so that tiny values still carry DIGITS digits.
    let deficit = (den.bits() as i64 - num.bits() as i64).max(0) as f64;
    let places = DIGITS + (deficit * std::f64::consts::LOG10_2 / k as f64).ceil() as u32;
    let scaled = (num * BigUint::from(10u8).pow(places * k)) / den;
    let v = scaled.nth_root(k);
    format!("{v}e-{places}").parse().unwrap()
}

/// Raw NCPA bound: `v^2 = 4 N^3 (q+N)^(r+2) / ((r+2)^2 (2N)^(r+2))`.
pub fn oracle_ncpa(n: u128, r: u32, q: u128) -> f64 {
    let (n, q) = (big(n), big(q));
    let num = big(4) * pow(&n, 3) * pow(&(&q + &n), r + 2);
    let den = big((r as u128 + 2).pow(2)) * pow(&(&n * 2u8), r + 2);
    root_of_ratio(num, den, 2)
}

/// Raw CCA bound: `v^2 = 64 N^3 (q+N)^(R/2+2) / ((R+4)^2 (2N)^(R/2+2))`.
pub fn oracle_cca(n: u128, total: u32, q: u128) -> f64 {
    let (n, q) = (big(n), big(q));
    let e = total / 2 + 2;
    let num = big(64) * pow(&n, 3) * pow(&(&q + &n), e);
    let den = big((total as u128 + 4).pow(2)) * pow(&(&n * 2u8), e);
    root_of_ratio(num, den, 2)
}

/// Raw tweakable CCA bound: `v^8 = 8^8 N^6 (q+N)^(R+4) / ((R+4)^4 (2N)^(R+4))`.
pub fn oracle_cca_tweak(n: u128, total: u32, q: u128) -> f64 {
    let (n, q) = (big(n), big(q));
    let e = total + 4;
    let num = pow(&big(8), 8) * pow(&n, 6) * pow(&(&q + &n), e);
    let den = pow(&big(total as u128 + 4), 4) * pow(&(&n * 2u8), e);
    root_of_ratio(num, den, 8)
}

/// Thorp: `(2q + r)/r * (4 n q)^r / N^r` with `N = 2^n`.
pub fn oracle_thorp(lg_n: u32, passes: u32, q: u128) -> f64 {
    let q = big(q);
    let num = (&q * 2u8 + passes) * pow(&(&q * (4 * lg_n)), passes);
    let den = big(passes as u128) * pow(&(big(1) << lg_n), passes);
    root_of_ratio(num, den, 1)
}

pub fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}
