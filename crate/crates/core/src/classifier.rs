//! Terminating-form classification.
//!
//! The terminating form of a start is the mod-9 form of the first power of
//! two its compressed trajectory visits, the start itself included. Because
//! the form is a tail property — every value on the trajectory before the
//! terminator shares it — a memo table over already-classified smaller values
//! can short-circuit range classification without changing any result.

use crate::dynamics::{compressed_step, power_of_two_exponent, Form, Value};
use crate::error::{Error, Result};
use std::sync::atomic::{AtomicU8, Ordering};

/// Default compressed-step cap. Known trajectories for starts below 10^8
/// finish in well under a thousand steps, so hitting this flags a bug or a
/// genuinely remarkable start, not slow mathematics.
pub const DEFAULT_STEP_CAP: u64 = 100_000;

/// Everything `classify` learns about one start.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Classification {
    pub start: Value,
    /// Form of the first power of two on the compressed trajectory.
    pub terminating_form: Form,
    /// Exponent m of that first power of two 2^m.
    pub stopping_exponent: u64,
    /// Compressed steps taken to reach it (0 when the start is itself a
    /// power of two).
    pub compressed_steps: u64,
    /// Largest value visited, start and terminator included.
    pub peak: Value,
}

impl Classification {
    pub fn stopping_power(&self) -> Value {
        Value::from_raw(1u128 << self.stopping_exponent)
    }
}

/// Shared one-byte-per-value memo of terminating forms.
///
/// Slot v holds 0 while unknown and `form.index() + 1` once classified.
/// Updates are monotone (unknown → form, never rewritten to a different
/// form), so racing writers are harmless and relaxed ordering suffices.
pub struct MemoTable {
    slots: Box<[AtomicU8]>,
}

impl MemoTable {
    /// Table covering values `1..=bound`.
    pub fn new(bound: u64) -> MemoTable {
        let len = bound as usize + 1;
        let mut slots = Vec::with_capacity(len);
        slots.resize_with(len, || AtomicU8::new(0));
        MemoTable {
            slots: slots.into_boxed_slice(),
        }
    }

    /// Table covering `1..=n`, shrunk to fit a byte budget.
    pub fn with_budget(n: u64, budget_bytes: usize) -> MemoTable {
        let bound = n.min(budget_bytes.saturating_sub(1) as u64);
        MemoTable::new(bound)
    }

    /// Largest value the table covers.
    pub fn bound(&self) -> u64 {
        (self.slots.len() - 1) as u64
    }

    fn get(&self, v: u128) -> Option<Form> {
        if v >= self.slots.len() as u128 {
            return None;
        }
        match self.slots[v as usize].load(Ordering::Relaxed) {
            0 => None,
            tag => Form::from_index(tag as usize - 1),
        }
    }

    fn set(&self, v: u128, form: Form) {
        if v < self.slots.len() as u128 {
            self.slots[v as usize].store(form.index() as u8 + 1, Ordering::Relaxed);
        }
    }
}

/// Terminating form only — the hot path for sweeps.
///
/// With a memo table the walk stops at the first already-classified value;
/// the answer is identical either way because the form is a tail property.
pub fn terminating_form(start: Value, memo: Option<&MemoTable>, step_cap: u64) -> Result<Form> {
    let mut v = start;
    let mut steps = 0u64;
    let form = loop {
        if let Some(m) = power_of_two_exponent(v) {
            break Form::POWER_OF_TWO_CYCLE[(m % 6) as usize];
        }
        if let Some(table) = memo {
            if let Some(known) = table.get(v.get()) {
                break known;
            }
        }
        if steps >= step_cap {
            return Err(Error::StepCapExceeded {
                start: start.to_string(),
                cap: step_cap,
            });
        }
        v = compressed_step(v)?;
        steps += 1;
    };
    if let Some(table) = memo {
        table.set(start.get(), form);
    }
    Ok(form)
}

/// Full classification of one start: form, stopping exponent, steps, peak.
pub fn classify(start: Value, step_cap: u64) -> Result<Classification> {
    let mut v = start;
    let mut peak = start;
    let mut steps = 0u64;
    loop {
        if let Some(m) = power_of_two_exponent(v) {
            let terminating_form = Form::POWER_OF_TWO_CYCLE[(m % 6) as usize];
            debug_assert_eq!(crate::dynamics::form_of(v), Some(terminating_form));
            return Ok(Classification {
                start,
                terminating_form,
                stopping_exponent: m,
                compressed_steps: steps,
                peak,
            });
        }
        if steps >= step_cap {
            return Err(Error::StepCapExceeded {
                start: start.to_string(),
                cap: step_cap,
            });
        }
        v = compressed_step(v)?;
        steps += 1;
        if v > peak {
            peak = v;
        }
    }
}

/// Like [`classify`] but also returns the full compressed trajectory from
/// the start through the terminating power of two.
pub fn classify_trace(start: Value, step_cap: u64) -> Result<(Vec<Value>, Classification)> {
    let classification = classify(start, step_cap)?;
    let mut trajectory = Vec::with_capacity(classification.compressed_steps as usize + 1);
    let mut v = start;
    trajectory.push(v);
    for _ in 0..classification.compressed_steps {
        v = compressed_step(v)?;
        trajectory.push(v);
    }
    debug_assert_eq!(
        power_of_two_exponent(*trajectory.last().unwrap()),
        Some(classification.stopping_exponent)
    );
    Ok((trajectory, classification))
}

/// Full classifications for every start in `[lo, hi]`.
pub fn classify_range(lo: u64, hi: u64, step_cap: u64) -> Result<Vec<Classification>> {
    assert!(1 <= lo && lo <= hi, "need 1 <= lo <= hi");
    (lo..=hi)
        .map(|n| classify(Value::from_raw(n as u128), step_cap))
        .collect()
}

/// Per-start terminating forms for `[lo, hi]`, with or without a memo.
///
/// The two modes agree element-wise; the memo only changes how much of each
/// trajectory gets walked.
pub fn classify_range_forms(lo: u64, hi: u64, memo: bool, step_cap: u64) -> Result<Vec<Form>> {
    assert!(1 <= lo && lo <= hi, "need 1 <= lo <= hi");
    let table = if memo { Some(MemoTable::new(hi)) } else { None };
    (lo..=hi)
        .map(|n| terminating_form(Value::from_raw(n as u128), table.as_ref(), step_cap))
        .collect()
}

/// Per-form counts over `[lo, hi]`.
pub fn classify_range_counts(lo: u64, hi: u64, memo: bool, step_cap: u64) -> Result<[u64; 6]> {
    let mut counts = [0u64; 6];
    for form in classify_range_forms(lo, hi, memo, step_cap)? {
        counts[form.index()] += 1;
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::form_of;
    use proptest::prelude::*;

    fn v(n: u128) -> Value {
        Value::new(n).unwrap()
    }

    fn cl(n: u128) -> Classification {
        classify(v(n), DEFAULT_STEP_CAP).unwrap()
    }

    #[test]
    fn classify_examples() {
        let c3 = cl(3); // 3 → 5 → 8
        assert_eq!(c3.terminating_form, Form::A);
        assert_eq!(c3.stopping_exponent, 3);
        assert_eq!(c3.compressed_steps, 2);
        assert_eq!(c3.peak, v(8));

        let c21 = cl(21); // 21 → 32
        assert_eq!(c21.terminating_form, Form::E);
        assert_eq!(c21.stopping_exponent, 5);
        assert_eq!(c21.compressed_steps, 1);

        let c1 = cl(1);
        assert_eq!(c1.terminating_form, Form::D);
        assert_eq!(c1.stopping_exponent, 0);
        assert_eq!(c1.compressed_steps, 0);

        let c75 = cl(75); // 75 → 113 → 170 → 85 → 128
        assert_eq!(c75.terminating_form, Form::C);
        assert_eq!(c75.stopping_exponent, 7);
        assert_eq!(c75.compressed_steps, 4);
        assert_eq!(c75.peak, v(170));
        assert_eq!(c75.stopping_power(), v(128));
    }

    #[test]
    fn trace_examples() {
        let (t3, c3) = classify_trace(v(3), DEFAULT_STEP_CAP).unwrap();
        assert_eq!(t3, vec![v(3), v(5), v(8)]);
        assert_eq!(c3.terminating_form, Form::A);

        let (t2, c2) = classify_trace(v(2), DEFAULT_STEP_CAP).unwrap();
        assert_eq!(t2, vec![v(2)]);
        assert_eq!(c2.terminating_form, Form::C);

        let (t7, c7) = classify_trace(v(7), DEFAULT_STEP_CAP).unwrap();
        let expected: Vec<Value> = [7u128, 11, 17, 26, 13, 20, 10, 5, 8]
            .iter()
            .map(|&n| v(n))
            .collect();
        assert_eq!(t7, expected);
        assert_eq!(c7.terminating_form, Form::A);
    }

    #[test]
    fn range_counts_examples() {
        assert_eq!(
            classify_range_counts(1, 10, false, DEFAULT_STEP_CAP).unwrap(),
            [7, 1, 1, 1, 0, 0]
        );
        assert_eq!(
            classify_range_counts(1, 100, false, DEFAULT_STEP_CAP).unwrap(),
            [89, 1, 3, 2, 4, 1]
        );
        assert_eq!(
            classify_range_counts(4, 4, false, DEFAULT_STEP_CAP).unwrap(),
            [0, 1, 0, 0, 0, 0]
        );
    }

    #[test]
    fn power_of_two_base_case() {
        for m in 0u32..=40 {
            let c = cl(1u128 << m);
            assert_eq!(c.compressed_steps, 0, "m = {m}");
            assert_eq!(
                c.terminating_form,
                Form::POWER_OF_TWO_CYCLE[(m % 6) as usize],
                "m = {m}"
            );
            assert_eq!(c.stopping_exponent, m as u64);
        }
    }

    #[test]
    fn step_cap_reports_start() {
        let err = classify(v(27), 3).unwrap_err();
        match err {
            Error::StepCapExceeded { start, cap } => {
                assert_eq!(start, "27");
                assert_eq!(cap, 3);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn memo_equivalence_elementwise() {
        let with = classify_range_forms(1, 5_000, true, DEFAULT_STEP_CAP).unwrap();
        let without = classify_range_forms(1, 5_000, false, DEFAULT_STEP_CAP).unwrap();
        assert_eq!(with, without);
    }

    #[test]
    fn memo_budget_truncates_table() {
        let table = MemoTable::with_budget(1_000_000, 1024);
        assert_eq!(table.bound(), 1023);
        // Values above the bound are still classified correctly, just never
        // looked up.
        let form = terminating_form(v(999_999), Some(&table), DEFAULT_STEP_CAP).unwrap();
        assert_eq!(
            form,
            classify(v(999_999), DEFAULT_STEP_CAP)
                .unwrap()
                .terminating_form
        );
    }

    proptest! {
        /// The form is a tail property: one compressed step never changes it
        /// unless the start was already a power of two.
        #[test]
        fn tail_invariance(n in 2u128..10_000_000) {
            prop_assume!(!n.is_power_of_two());
            let here = cl(n);
            let next = classify(compressed_step(v(n)).unwrap(), DEFAULT_STEP_CAP).unwrap();
            prop_assert_eq!(here.terminating_form, next.terminating_form);
            prop_assert_eq!(here.stopping_exponent, next.stopping_exponent);
        }

        #[test]
        fn classification_invariants(n in 1u128..10_000_000) {
            let c = cl(n);
            prop_assert!(c.peak >= c.start);
            prop_assert!(c.peak.get() >= 1u128 << c.stopping_exponent);
            prop_assert_eq!(
                c.terminating_form.residue() as u128,
                (1u128 << c.stopping_exponent) % 9
            );
            prop_assert_eq!(form_of(c.stopping_power()), Some(c.terminating_form));
        }
    }
}
