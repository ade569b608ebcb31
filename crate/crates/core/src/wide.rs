//! Arbitrary-precision mirror of the compressed dynamics.
//!
//! The 128-bit path covers every desk-scale sweep; this module exists for
//! headroom checks on inputs like 2^600, where the classifier must still see
//! a single set bit and the right residue mod 9.

use crate::dynamics::Form;
use crate::error::{Error, Result};
use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

/// One compressed step on a big integer.
pub fn compressed_step(v: &BigUint) -> BigUint {
    if v.bit(0) {
        (v * 3u32 + 1u32) >> 1
    } else {
        v >> 1
    }
}

/// `Some(m)` when v = 2^m, `None` otherwise.
pub fn power_of_two_exponent(v: &BigUint) -> Option<u64> {
    if !v.is_zero() && v.count_ones() == 1 {
        v.trailing_zeros()
    } else {
        None
    }
}

/// The mod-9 form of v, or `None` when 3 divides v.
pub fn form_of(v: &BigUint) -> Option<Form> {
    let residue = (v % 9u32).to_u8().expect("residue mod 9 fits in u8");
    Form::from_residue(residue)
}

/// Wide counterpart of [`crate::classifier::Classification`]; peak tracking
/// is omitted because wide inputs are verification probes, not sweeps.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WideClassification {
    pub terminating_form: Form,
    pub stopping_exponent: u64,
    pub compressed_steps: u64,
}

/// Classify an arbitrarily large start by its compressed trajectory.
pub fn classify(start: &BigUint, step_cap: u64) -> Result<WideClassification> {
    if start.is_zero() {
        return Err(Error::ZeroValue);
    }
    let mut v = start.clone();
    let mut steps = 0u64;
    loop {
        if let Some(m) = power_of_two_exponent(&v) {
            return Ok(WideClassification {
                terminating_form: Form::POWER_OF_TWO_CYCLE[(m % 6) as usize],
                stopping_exponent: m,
                compressed_steps: steps,
            });
        }
        if steps >= step_cap {
            return Err(Error::StepCapExceeded {
                start: start.to_string(),
                cap: step_cap,
            });
        }
        v = compressed_step(&v);
        steps += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::{self, DEFAULT_STEP_CAP};
    use crate::dynamics::Value;
    use num_bigint::BigUint;
    use proptest::prelude::*;

    fn big(n: u128) -> BigUint {
        BigUint::from(n)
    }

    #[test]
    fn rejects_zero() {
        assert!(classify(&BigUint::zero(), DEFAULT_STEP_CAP).is_err());
    }

    #[test]
    fn huge_powers_of_two() {
        let c = classify(&(BigUint::from(1u32) << 600u32), DEFAULT_STEP_CAP).unwrap();
        assert_eq!(c.stopping_exponent, 600);
        assert_eq!(c.compressed_steps, 0);
        assert_eq!(c.terminating_form, Form::D); // 600 ≡ 0 mod 6

        let c = classify(&(BigUint::from(1u32) << 599u32), DEFAULT_STEP_CAP).unwrap();
        assert_eq!(c.terminating_form, Form::E); // 599 ≡ 5 mod 6
    }

    #[test]
    fn doubling_far_beyond_machine_width() {
        // 21 · 2^300 halves down to 21 and stops where 21 stops: at 2^5.
        let start = BigUint::from(21u32) << 300u32;
        let c = classify(&start, DEFAULT_STEP_CAP).unwrap();
        assert_eq!(c.terminating_form, Form::E);
        assert_eq!(c.stopping_exponent, 5);
        assert_eq!(c.compressed_steps, 301);
    }

    proptest! {
        #[test]
        fn agrees_with_machine_classifier(n in 1u128..5_000_000) {
            let narrow = classifier::classify(Value::new(n).unwrap(), DEFAULT_STEP_CAP).unwrap();
            let wide = classify(&big(n), DEFAULT_STEP_CAP).unwrap();
            prop_assert_eq!(narrow.terminating_form, wide.terminating_form);
            prop_assert_eq!(narrow.stopping_exponent, wide.stopping_exponent);
            prop_assert_eq!(narrow.compressed_steps, wide.compressed_steps);
        }

        #[test]
        fn step_agrees_with_machine_step(n in 1u128..1_000_000_000_000) {
            let wide = compressed_step(&big(n));
            let narrow = crate::dynamics::compressed_step(Value::new(n).unwrap()).unwrap();
            prop_assert_eq!(wide, big(narrow.get()));
        }
    }
}
