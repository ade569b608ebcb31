//! The six-state machine on (form, index) pairs.
//!
//! A state (r, n) stands for the integer 9n + r where r is the residue of a
//! form. One machine transition realizes exactly one compressed step, so the
//! machine is conjugate to the compressed map on everything coprime to 3.
//! Starts divisible by 3 have no state; a few compressed steps always leave
//! the multiples of 3, and [`fsm_enter`] performs that entry walk.
//!
//! Which branch a state takes is decided by the parity of its index. For
//! forms with even residue (a, b, c) the index parity equals the value
//! parity; for odd residue (d, e, f) it is the opposite, which is why the
//! d/e/f even-index branches perform the odd-value step.

use crate::classifier;
use crate::dynamics::{compressed_step, form_of, power_of_two_exponent, Form, Value};
use crate::error::{Error, Result};
use num_bigint::BigUint;
use std::fmt;

/// Machine state (form, index) standing for the value 9·index + residue.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct FsmState {
    form: Form,
    index: u128,
}

impl FsmState {
    /// Build a state, rejecting indices whose value 9n + r would overflow.
    pub fn new(form: Form, index: u128) -> Result<FsmState> {
        let residue = form.residue() as u128;
        if index > (u128::MAX - residue) / 9 {
            return Err(Error::Overflow {
                operation: "9n + r",
                value: index,
            });
        }
        Ok(FsmState { form, index })
    }

    pub fn form(self) -> Form {
        self.form
    }

    pub fn index(self) -> u128 {
        self.index
    }

    /// The integer this state stands for. Never divisible by 3.
    pub fn value(self) -> Value {
        Value::from_raw(9 * self.index + self.form.residue() as u128)
    }
}

impl fmt::Display for FsmState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.form, self.index)
    }
}

/// Decompose a value into its state, or `None` when 3 divides it.
pub fn state_of(v: Value) -> Option<FsmState> {
    let form = form_of(v)?;
    let index = (v.get() - form.residue() as u128) / 9;
    Some(FsmState { form, index })
}

fn mul3(n: u128) -> Result<u128> {
    n.checked_mul(3).ok_or(Error::Overflow {
        operation: "3n",
        value: n,
    })
}

/// One machine transition — the image of one compressed step.
///
/// With n the index: a: even → (b, n/2), odd → (a, (3n+1)/2);
/// b: even → (c, n/2), odd → (c, (3n+1)/2);
/// c: even → (d, n/2), odd → (a, (3n-1)/2);
/// d: even → (c, 3n/2), odd → (e, (n-1)/2);
/// e: even → (a, 3n/2), odd → (f, (n-1)/2);
/// f: even → (c, (3n+2)/2), odd → (a, (n-1)/2).
///
/// Termination is the caller's concern: stepping a power-of-two state is
/// well defined and still mirrors the compressed map.
pub fn fsm_step(s: FsmState) -> Result<FsmState> {
    let n = s.index;
    let even = n & 1 == 0;
    let (form, index) = match (s.form, even) {
        (Form::A, true) => (Form::B, n >> 1),
        (Form::A, false) => (Form::A, (mul3(n)? + 1) >> 1),
        (Form::B, true) => (Form::C, n >> 1),
        (Form::B, false) => (Form::C, (mul3(n)? + 1) >> 1),
        (Form::C, true) => (Form::D, n >> 1),
        (Form::C, false) => (Form::A, (mul3(n)? - 1) >> 1),
        (Form::D, true) => (Form::C, mul3(n)? >> 1),
        (Form::D, false) => (Form::E, (n - 1) >> 1),
        (Form::E, true) => (Form::A, mul3(n)? >> 1),
        (Form::E, false) => (Form::F, (n - 1) >> 1),
        (Form::F, true) => (Form::C, (mul3(n)? + 2) >> 1),
        (Form::F, false) => (Form::A, (n - 1) >> 1),
    };
    FsmState::new(form, index)
}

/// Walk a start into the machine: apply compressed steps until the value is
/// coprime to 3, then return its state and the number of steps consumed.
/// Starts already coprime to 3 enter in zero steps.
pub fn fsm_enter(v: Value, step_cap: u64) -> Result<(FsmState, u64)> {
    let mut v = v;
    let mut steps = 0u64;
    loop {
        if let Some(state) = state_of(v) {
            return Ok((state, steps));
        }
        if steps >= step_cap {
            return Err(Error::StepCapExceeded {
                start: v.to_string(),
                cap: step_cap,
            });
        }
        v = compressed_step(v)?;
        steps += 1;
    }
}

/// A full machine run: entry walk, then transitions until the state's value
/// is a power of two.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FsmTrace {
    /// Compressed steps spent leaving the multiples of 3 before the first
    /// state.
    pub entry_steps: u64,
    /// Visited states, first to terminating.
    pub states: Vec<FsmState>,
    pub terminating_form: Form,
}

/// Run the machine from any start until a power of two.
pub fn fsm_trace(v: Value, step_cap: u64) -> Result<FsmTrace> {
    let (mut state, entry_steps) = fsm_enter(v, step_cap)?;
    let mut states = vec![state];
    let mut total = entry_steps;
    while power_of_two_exponent(state.value()).is_none() {
        if total >= step_cap {
            return Err(Error::StepCapExceeded {
                start: v.to_string(),
                cap: step_cap,
            });
        }
        state = fsm_step(state)?;
        total += 1;
        states.push(state);
    }
    Ok(FsmTrace {
        entry_steps,
        terminating_form: state.form(),
        states,
    })
}

/// Outcome of checking that 2^m walks the six-form cycle for all m ≤ max.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleReport {
    pub max_exponent: u64,
    pub first_violation: Option<CycleViolation>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleViolation {
    pub exponent: u64,
    pub expected: Form,
    pub actual: Form,
}

impl CycleReport {
    pub fn passed(&self) -> bool {
        self.first_violation.is_none()
    }
}

/// Verify that classifying 2^m yields form `POWER_OF_TWO_CYCLE[m % 6]` with
/// stopping exponent m and zero steps, for every m up to `max_m`. Runs on
/// arbitrary-precision values so exponents in the hundreds are exercised for
/// real.
pub fn verify_power2_cycle(max_m: u64) -> CycleReport {
    for m in 0..=max_m {
        let value = BigUint::from(1u32) << m;
        let expected = Form::POWER_OF_TWO_CYCLE[(m % 6) as usize];
        let classified = crate::wide::classify(&value, 16);
        let ok = matches!(
            &classified,
            Ok(c) if c.terminating_form == expected
                && c.stopping_exponent == m
                && c.compressed_steps == 0
        );
        if !ok {
            let actual = classified.map(|c| c.terminating_form).unwrap_or(expected);
            return CycleReport {
                max_exponent: max_m,
                first_violation: Some(CycleViolation {
                    exponent: m,
                    expected,
                    actual,
                }),
            };
        }
    }
    CycleReport {
        max_exponent: max_m,
        first_violation: None,
    }
}

/// Outcome of checking doubling invariance of classifications.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScalingReport {
    pub pairs_checked: u64,
    /// At most the first [`ScalingReport::VIOLATION_LIMIT`] violations.
    pub violations: Vec<ScalingViolation>,
    pub violations_total: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScalingViolation {
    pub x: u64,
    pub doublings: u32,
    pub expected: (Form, u64),
    pub actual: (Form, u64),
}

impl ScalingReport {
    pub const VIOLATION_LIMIT: usize = 32;

    pub fn passed(&self) -> bool {
        self.violations_total == 0
    }
}

/// Verify that doubling never changes a classification, for all x ≤ `x_max`
/// and 1 ≤ i ≤ `i_max`.
///
/// For x not a power of two, x·2^i must keep both the terminating form and
/// the stopping exponent of x: the trajectory of x·2^i just halves down to x
/// and none of the intermediate x·2^k can itself be a power of two. When x
/// is a power of two 2^t the start of x·2^i = 2^(t+i) *is* the terminator,
/// so the expected classification is exponent t+i with form
/// `POWER_OF_TWO_CYCLE[(t+i) % 6]` — the degenerate case follows the cycle,
/// not the frozen form.
pub fn verify_scaling(x_max: u64, i_max: u32, step_cap: u64) -> Result<ScalingReport> {
    let mut report = ScalingReport {
        pairs_checked: 0,
        violations: Vec::new(),
        violations_total: 0,
    };
    for x in 1..=x_max {
        let base = classifier::classify(Value::from_raw(x as u128), step_cap)?;
        let pow2_exponent = power_of_two_exponent(Value::from_raw(x as u128));
        for i in 1..=i_max {
            let scaled = Value::from_raw((x as u128) << i);
            let got = classifier::classify(scaled, step_cap)?;
            let expected = match pow2_exponent {
                None => (base.terminating_form, base.stopping_exponent),
                Some(t) => {
                    let m = t + i as u64;
                    (Form::POWER_OF_TWO_CYCLE[(m % 6) as usize], m)
                }
            };
            report.pairs_checked += 1;
            if (got.terminating_form, got.stopping_exponent) != expected {
                report.violations_total += 1;
                if report.violations.len() < ScalingReport::VIOLATION_LIMIT {
                    report.violations.push(ScalingViolation {
                        x,
                        doublings: i,
                        expected,
                        actual: (got.terminating_form, got.stopping_exponent),
                    });
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::DEFAULT_STEP_CAP;
    use proptest::prelude::*;

    fn v(n: u128) -> Value {
        Value::new(n).unwrap()
    }

    fn st(form: Form, index: u128) -> FsmState {
        FsmState::new(form, index).unwrap()
    }

    #[test]
    fn state_of_examples() {
        assert_eq!(state_of(v(8)), Some(st(Form::A, 0)));
        assert_eq!(state_of(v(17)), Some(st(Form::A, 1)));
        assert_eq!(state_of(v(9)), None);
        assert_eq!(st(Form::A, 1).value(), v(17));
    }

    #[test]
    fn step_examples() {
        assert_eq!(fsm_step(st(Form::A, 1)).unwrap(), st(Form::A, 2)); // 17 → 26
        assert_eq!(fsm_step(st(Form::A, 0)).unwrap(), st(Form::B, 0)); // 8 → 4
        assert_eq!(fsm_step(st(Form::D, 0)).unwrap(), st(Form::C, 0)); // 1 → 2
    }

    #[test]
    fn enter_examples() {
        assert_eq!(
            fsm_enter(v(21), DEFAULT_STEP_CAP).unwrap(),
            (st(Form::E, 3), 1)
        ); // 21 → 32
        assert_eq!(
            fsm_enter(v(9), DEFAULT_STEP_CAP).unwrap(),
            (st(Form::E, 1), 1)
        ); // 9 → 14
        assert_eq!(
            fsm_enter(v(7), DEFAULT_STEP_CAP).unwrap(),
            (st(Form::F, 0), 0)
        );
    }

    #[test]
    fn trace_of_seven_visits_all_six_forms() {
        let trace = fsm_trace(v(7), DEFAULT_STEP_CAP).unwrap();
        let expected = [
            st(Form::F, 0), // 7
            st(Form::C, 1), // 11
            st(Form::A, 1), // 17
            st(Form::A, 2), // 26
            st(Form::B, 1), // 13
            st(Form::C, 2), // 20
            st(Form::D, 1), // 10
            st(Form::E, 0), // 5
            st(Form::A, 0), // 8
        ];
        assert_eq!(trace.states, expected);
        assert_eq!(trace.entry_steps, 0);
        assert_eq!(trace.terminating_form, Form::A);
        let mut seen: Vec<Form> = trace.states.iter().map(|s| s.form()).collect();
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen.len(), 6, "all six forms reachable from 7");
    }

    #[test]
    fn trace_entry_and_immediate_termination() {
        let trace = fsm_trace(v(3), DEFAULT_STEP_CAP).unwrap();
        assert_eq!(trace.entry_steps, 1); // 3 → 5
        assert_eq!(trace.states, vec![st(Form::E, 0), st(Form::A, 0)]);
        assert_eq!(trace.terminating_form, Form::A);

        let trace16 = fsm_trace(v(16), DEFAULT_STEP_CAP).unwrap();
        assert_eq!(trace16.states, vec![st(Form::F, 1)]);
        assert_eq!(trace16.terminating_form, Form::F);
    }

    #[test]
    fn cycle_report_examples() {
        let report = verify_power2_cycle(64);
        assert!(report.passed());
        // Spot checks of the cycle itself.
        for (m, form) in [
            (0u32, Form::D),
            (1, Form::C),
            (2, Form::B),
            (3, Form::A),
            (4, Form::F),
            (5, Form::E),
            (6, Form::D),
            (9, Form::A),
        ] {
            assert_eq!(Form::POWER_OF_TWO_CYCLE[(m % 6) as usize], form, "m = {m}");
        }
    }

    #[test]
    fn scaling_report_examples() {
        let report = verify_scaling(200, 8, DEFAULT_STEP_CAP).unwrap();
        assert!(report.passed(), "violations: {:?}", report.violations);

        // 21 ∈ the e class, and so are its doublings.
        for (x, i, expected) in [(21u64, 3u32, Form::E), (21, 4, Form::E), (1, 6, Form::D)] {
            let c = classifier::classify(v((x as u128) << i), DEFAULT_STEP_CAP).unwrap();
            assert_eq!(c.terminating_form, expected);
        }
    }

    #[test]
    fn trace_agrees_with_classify_small_range() {
        for n in 1u128..=2_000 {
            let trace = fsm_trace(v(n), DEFAULT_STEP_CAP).unwrap();
            let c = classifier::classify(v(n), DEFAULT_STEP_CAP).unwrap();
            assert_eq!(trace.terminating_form, c.terminating_form, "n = {n}");
        }
    }

    proptest! {
        /// Conjugacy: stepping the state equals stepping the value.
        #[test]
        fn conjugate_to_compressed_step(n in 1u128..100_000_000) {
            prop_assume!(n % 3 != 0);
            let state = state_of(v(n)).unwrap();
            let stepped = fsm_step(state).unwrap();
            let direct = compressed_step(v(n)).unwrap();
            prop_assert_eq!(stepped, state_of(direct).unwrap());
        }

        /// Closure: transitions never leave the units mod 9.
        #[test]
        fn closure_under_step(n in 1u128..100_000_000) {
            prop_assume!(n % 3 != 0);
            let stepped = fsm_step(state_of(v(n)).unwrap()).unwrap();
            prop_assert!(!stepped.value().get().is_multiple_of(3));
        }

        /// Parity coherence: even residues align value and index parity,
        /// odd residues flip it.
        #[test]
        fn parity_coherence(n in 1u128..100_000_000) {
            prop_assume!(n % 3 != 0);
            let state = state_of(v(n)).unwrap();
            let value_even = state.value().is_even();
            let index_even = state.index() & 1 == 0;
            if state.form().residue().is_multiple_of(2) {
                prop_assert_eq!(value_even, index_even);
            } else {
                prop_assert_eq!(value_even, !index_even);
            }
        }
    }
}
