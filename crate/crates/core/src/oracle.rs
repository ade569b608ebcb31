//! Independent classification route built on the raw map only.
//!
//! The compressed trajectory is exactly the raw trajectory with every
//! element that immediately follows an odd element deleted (the odd step
//! always produces an even number, and the compressed map folds in that
//! forced halving). Walking the raw map and skipping exactly those elements
//! therefore reproduces the compressed classification without ever calling
//! the compressed step — a differential check for the classifier.
//!
//! [`raw_first_power_form`] is the deliberately different convention that
//! keeps every raw element: it disagrees with the filtered route whenever a
//! trajectory passes through 2·2^m right after an odd value, and exists so
//! that the disagreement itself can be demonstrated.

use crate::dynamics::{collatz_step, power_of_two_exponent, Form, Value};
use crate::error::{Error, Result};

/// Terminating form and stopping exponent via the filtered raw route.
pub fn filtered_raw_form(start: Value, step_cap: u64) -> Result<(Form, u64)> {
    // One compressed step is at most two raw steps.
    let raw_cap = step_cap.saturating_mul(2).saturating_add(1);
    let mut v = start;
    let mut previous_was_odd = false; // the start has no predecessor
    let mut raw_steps = 0u64;
    loop {
        if !previous_was_odd {
            if let Some(m) = power_of_two_exponent(v) {
                return Ok((Form::POWER_OF_TWO_CYCLE[(m % 6) as usize], m));
            }
        }
        if raw_steps >= raw_cap {
            return Err(Error::StepCapExceeded {
                start: start.to_string(),
                cap: step_cap,
            });
        }
        previous_was_odd = !v.is_even();
        v = collatz_step(v)?;
        raw_steps += 1;
    }
}

/// Form and exponent of the first power of two in the unfiltered raw
/// trajectory.
pub fn raw_first_power_form(start: Value, step_cap: u64) -> Result<(Form, u64)> {
    let raw_cap = step_cap.saturating_mul(2).saturating_add(1);
    let mut v = start;
    let mut raw_steps = 0u64;
    loop {
        if let Some(m) = power_of_two_exponent(v) {
            return Ok((Form::POWER_OF_TWO_CYCLE[(m % 6) as usize], m));
        }
        if raw_steps >= raw_cap {
            return Err(Error::StepCapExceeded {
                start: start.to_string(),
                cap: step_cap,
            });
        }
        v = collatz_step(v)?;
        raw_steps += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::{classify, DEFAULT_STEP_CAP};

    fn v(n: u128) -> Value {
        Value::new(n).unwrap()
    }

    #[test]
    fn filtered_route_agrees_with_classifier_small_range() {
        for n in 1u128..=5_000 {
            let direct = classify(v(n), DEFAULT_STEP_CAP).unwrap();
            let (form, exponent) = filtered_raw_form(v(n), DEFAULT_STEP_CAP).unwrap();
            assert_eq!(form, direct.terminating_form, "n = {n}");
            assert_eq!(exponent, direct.stopping_exponent, "n = {n}");
        }
    }

    #[test]
    fn unfiltered_route_differs_where_expected() {
        // 5 → 16 → 8 raw: 16 follows the odd 5, so the filtered route skips
        // it and stops at 8 (form a); the unfiltered route stops at 16
        // (form f).
        assert_eq!(
            filtered_raw_form(v(5), DEFAULT_STEP_CAP).unwrap(),
            (Form::A, 3)
        );
        assert_eq!(
            raw_first_power_form(v(5), DEFAULT_STEP_CAP).unwrap(),
            (Form::F, 4)
        );
    }
}
