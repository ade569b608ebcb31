//! Per-form set construction, factorization, and structure scans.
//!
//! `build_set` materializes one terminating-form set up to a bound by
//! delegating to the sweep engine. The factorizer runs trial division over
//! small candidates and Brent's cycle-finding variant of the rho method
//! beyond; desk-scale members never leave the trial range, so rho only fires
//! on user-supplied wide queries.

use crate::dynamics::{Form, Value};
use crate::error::{Error, Result};
use crate::sweep::{sweep, CaptureConfig, SweepConfig};

/// Complete prime factorization with factors in ascending prime order.
///
/// Invariants: the product of prime^multiplicity reconstructs the value, and
/// every listed prime passes a primality check. The factorization of 1 is
/// the empty product.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    pub value: u128,
    pub factors: Vec<(u128, u32)>,
}

impl Factorization {
    pub fn reconstruct(&self) -> u128 {
        self.factors.iter().map(|&(p, e)| p.pow(e)).product()
    }
}

fn add_mod(a: u128, b: u128, m: u128) -> u128 {
    // a, b < m ≤ 2^128, so a+b < 2m and one conditional subtraction fixes
    // both wraparound and excess.
    let (sum, overflowed) = a.overflowing_add(b);
    if overflowed || sum >= m {
        sum.wrapping_sub(m)
    } else {
        sum
    }
}

fn mul_mod(a: u128, b: u128, m: u128) -> u128 {
    let (mut a, mut b) = (a % m, b % m);
    if m <= u64::MAX as u128 {
        return a * b % m;
    }
    // Shift-and-add for moduli past 64 bits; only reachable from wide
    // user queries.
    let mut acc = 0u128;
    while b > 0 {
        if b & 1 == 1 {
            acc = add_mod(acc, a, m);
        }
        a = add_mod(a, a, m);
        b >>= 1;
    }
    acc
}

fn pow_mod(base: u128, mut exponent: u128, m: u128) -> u128 {
    let mut base = base % m;
    let mut acc = 1u128 % m;
    while exponent > 0 {
        if exponent & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        exponent >>= 1;
        if exponent > 0 {
            base = mul_mod(base, base, m);
        }
    }
    acc
}

/// The first twelve primes as strong-pseudoprime bases decide primality for
/// everything below 3.3e24, which covers the full 64-bit range; the extra
/// bases harden the test for wider inputs.
const MR_BASES: [u128; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
const MR_EXTRA_BASES: [u128; 8] = [41, 43, 47, 53, 59, 61, 67, 71];

pub fn is_prime(n: u128) -> bool {
    if n < 2 {
        return false;
    }
    for p in MR_BASES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let s = d.trailing_zeros();
    d >>= s;
    let strong_probable_prime = |base: u128| -> bool {
        let mut x = pow_mod(base, d, n);
        if x == 1 || x == n - 1 {
            return true;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                return true;
            }
        }
        false
    };
    if !MR_BASES.iter().all(|&b| strong_probable_prime(b)) {
        return false;
    }
    if n >> 64 != 0 && !MR_EXTRA_BASES.iter().all(|&b| strong_probable_prime(b)) {
        return false;
    }
    true
}

/// Brent's rho with a fixed polynomial offset; returns a nontrivial factor
/// of an odd composite n or None when this offset fails.
fn rho_brent(n: u128, offset: u128) -> Option<u128> {
    let gcd = |mut a: u128, mut b: u128| {
        while b != 0 {
            (a, b) = (b, a % b);
        }
        a
    };
    let advance = |x: u128| add_mod(mul_mod(x, x, n), offset, n);

    let mut y = 2u128;
    let mut cycle_len = 1u128;
    let batch = 128u128;
    let mut x = y;
    let mut saved = y;
    let mut product = 1u128;
    let mut factor = 1u128;
    while factor == 1 {
        x = y;
        for _ in 0..cycle_len {
            y = advance(y);
        }
        let mut k = 0u128;
        while k < cycle_len && factor == 1 {
            saved = y;
            for _ in 0..batch.min(cycle_len - k) {
                y = advance(y);
                product = mul_mod(product, x.abs_diff(y), n);
            }
            factor = gcd(product, n);
            k += batch;
        }
        cycle_len *= 2;
    }
    if factor == n {
        // Backtrack one step at a time from the saved point.
        factor = 1;
        let mut z = saved;
        while factor == 1 {
            z = advance(z);
            factor = gcd(x.abs_diff(z), n);
        }
    }
    (factor != n && factor != 0).then_some(factor)
}

const TRIAL_LIMIT: u128 = 65_535;

/// Complete prime factorization; deterministic output order.
pub fn factorize(value: Value) -> Factorization {
    let mut n = value.get();
    let mut primes: Vec<u128> = Vec::new();

    let twos = n.trailing_zeros();
    if twos > 0 && n > 1 {
        primes.extend(std::iter::repeat_n(2u128, twos as usize));
        n >>= twos;
    }
    let mut d = 3u128;
    while d <= TRIAL_LIMIT && d * d <= n {
        while n.is_multiple_of(d) {
            primes.push(d);
            n /= d;
        }
        d += 2;
    }
    if n > 1 {
        let mut pending = vec![n];
        while let Some(m) = pending.pop() {
            if is_prime(m) {
                primes.push(m);
                continue;
            }
            let mut factor = None;
            let mut offset = 1u128;
            while factor.is_none() {
                factor = rho_brent(m, offset);
                offset += 1;
            }
            let f = factor.unwrap();
            pending.push(f);
            pending.push(m / f);
        }
    }

    primes.sort_unstable();
    let mut factors: Vec<(u128, u32)> = Vec::new();
    for p in primes {
        match factors.last_mut() {
            Some((prime, multiplicity)) if *prime == p => *multiplicity += 1,
            _ => factors.push((p, 1)),
        }
    }
    Factorization {
        value: value.get(),
        factors,
    }
}

fn set_sweep(form: Form, bound: u64, step_cap: u64) -> Result<Vec<u64>> {
    let mut config = SweepConfig::new(bound);
    config.step_cap = step_cap;
    config.capture = CaptureConfig::only(form);
    let outcome = sweep(&config)?;
    Ok(outcome.members.members[form.index()].clone())
}

/// All starts x ≤ bound whose terminating form is `form`, ascending.
pub fn build_set(form: Form, bound: u64, step_cap: u64) -> Result<Vec<u64>> {
    set_sweep(form, bound, step_cap)
}

/// Element/factorization rows for one set, mirroring the member listing.
pub fn factor_report(form: Form, bound: u64, step_cap: u64) -> Result<Vec<(u64, Factorization)>> {
    let members = build_set(form, bound, step_cap)?;
    Ok(members
        .into_iter()
        .map(|m| (m, factorize(Value::from_raw(m as u128))))
        .collect())
}

/// Power-of-two structure of one set: every exponent present, the expected
/// residue class of those exponents mod 6, and how many members are not
/// powers of two at all.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExponentScan {
    pub form: Form,
    pub bound: u64,
    pub exponents: Vec<u64>,
    pub expected_residue: u8,
    pub residues_match: bool,
    pub non_power_members: u64,
}

pub fn power2_exponent_scan(form: Form, bound: u64, step_cap: u64) -> Result<ExponentScan> {
    let members = build_set(form, bound, step_cap)?;
    Ok(scan_members(form, bound, &members))
}

/// Scan an already-built member list.
pub fn scan_members(form: Form, bound: u64, members: &[u64]) -> ExponentScan {
    let expected_residue = form.exponent_residue();
    let mut exponents = Vec::new();
    let mut non_power_members = 0u64;
    for &m in members {
        if m.is_power_of_two() {
            exponents.push(m.trailing_zeros() as u64);
        } else {
            non_power_members += 1;
        }
    }
    let residues_match = exponents.iter().all(|&e| (e % 6) as u8 == expected_residue);
    ExponentScan {
        form,
        bound,
        exponents,
        expected_residue,
        residues_match,
        non_power_members,
    }
}

/// Where the power-of-two members sit inside a sorted set, in three views:
/// 1-based positions, raw values, and exponents, each with first and second
/// differences. Purely descriptive.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GapReport {
    pub form: Form,
    pub bound: u64,
    pub positions: Vec<u64>,
    pub position_first_diffs: Vec<u64>,
    pub position_second_diffs: Vec<i128>,
    pub values: Vec<u64>,
    pub value_first_diffs: Vec<u64>,
    pub value_second_diffs: Vec<i128>,
    pub exponents: Vec<u64>,
    pub exponent_first_diffs: Vec<u64>,
    pub exponent_second_diffs: Vec<i128>,
}

fn first_diffs(values: &[u64]) -> Vec<u64> {
    values.windows(2).map(|w| w[1] - w[0]).collect()
}

fn second_diffs(first: &[u64]) -> Vec<i128> {
    first
        .windows(2)
        .map(|w| w[1] as i128 - w[0] as i128)
        .collect()
}

pub fn gap_progression_report(form: Form, bound: u64, step_cap: u64) -> Result<GapReport> {
    let members = build_set(form, bound, step_cap)?;
    gap_report_from_members(form, bound, &members)
}

/// Build the gap report from an already-built member list.
pub fn gap_report_from_members(form: Form, bound: u64, members: &[u64]) -> Result<GapReport> {
    let mut positions = Vec::new();
    let mut values = Vec::new();
    let mut exponents = Vec::new();
    for (i, &m) in members.iter().enumerate() {
        if m.is_power_of_two() {
            positions.push(i as u64 + 1);
            values.push(m);
            exponents.push(m.trailing_zeros() as u64);
        }
    }
    if positions.len() < 3 {
        return Err(Error::TooFewPowers {
            found: positions.len(),
        });
    }
    let position_first_diffs = first_diffs(&positions);
    let value_first_diffs = first_diffs(&values);
    let exponent_first_diffs = first_diffs(&exponents);
    Ok(GapReport {
        form,
        bound,
        position_second_diffs: second_diffs(&position_first_diffs),
        value_second_diffs: second_diffs(&value_first_diffs),
        exponent_second_diffs: second_diffs(&exponent_first_diffs),
        positions,
        position_first_diffs,
        values,
        value_first_diffs,
        exponents,
        exponent_first_diffs,
    })
}
