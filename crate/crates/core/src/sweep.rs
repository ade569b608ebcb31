//! Chunked, memoized, deterministic enumeration over `[1, N]`.
//!
//! The range splits into ascending chunks. Workers pull chunk indices from a
//! shared cursor, classify every start in their chunk against a shared memo
//! table, and report per-chunk counts and captured members. A single merger
//! folds results strictly in chunk order, so the outcome is identical for
//! any worker count, chunk size, and scheduler interleaving — including the
//! plain in-thread path used when `workers == 1`.
//!
//! Counts are kept as exact integers; frequencies only materialize at output
//! time. Long runs can persist a text checkpoint and resume later with
//! byte-identical final results.

use crate::classifier::{terminating_form, MemoTable, DEFAULT_STEP_CAP};
use crate::dynamics::{Form, Value};
use crate::error::{Error, Result};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::mpsc;
use std::time::Instant;

/// Per-form member capture limits: `None` disables capture for a form,
/// `Some(k)` keeps the first k members in ascending order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CaptureConfig {
    pub limits: [Option<usize>; 6],
}

impl CaptureConfig {
    /// Capture nothing.
    pub fn none() -> CaptureConfig {
        CaptureConfig { limits: [None; 6] }
    }

    /// Desk-scale defaults: the rare forms b, d, e, f are tiny and kept in
    /// full; c runs near 2.4% of all starts and is capped; a is the bulk
    /// complement and skipped.
    pub fn default_limits() -> CaptureConfig {
        let mut limits = [Some(usize::MAX); 6];
        limits[Form::A.index()] = None;
        limits[Form::C.index()] = Some(100_000);
        CaptureConfig { limits }
    }

    /// Capture a single form without a cap.
    pub fn only(form: Form) -> CaptureConfig {
        let mut limits = [None; 6];
        limits[form.index()] = Some(usize::MAX);
        CaptureConfig { limits }
    }

    fn enabled(&self, form: Form) -> bool {
        self.limits[form.index()].is_some()
    }
}

impl Default for CaptureConfig {
    fn default() -> CaptureConfig {
        CaptureConfig::default_limits()
    }
}

/// Everything a sweep needs to know.
#[derive(Clone, Debug)]
pub struct SweepConfig {
    /// Upper end of the swept range `[1, n]`.
    pub n: u64,
    pub workers: usize,
    /// Values per chunk; chunks additionally cut at every threshold.
    pub chunk: u64,
    pub memo: bool,
    /// Byte budget for the memo table; values beyond it are walked without
    /// lookup.
    pub memo_budget: usize,
    pub step_cap: u64,
    pub capture: CaptureConfig,
    /// Snapshot points: the running table is recorded exactly when the merge
    /// frontier reaches each threshold. Sorted ascending, each ≤ n.
    pub thresholds: Vec<u64>,
    pub checkpoint_path: Option<PathBuf>,
    /// Roughly how many values between checkpoint writes.
    pub checkpoint_every: u64,
    /// Stop at the first chunk boundary past this value, write a checkpoint
    /// if a path is set, and return an incomplete outcome. Test hook for
    /// resumption; normal runs leave it unset.
    pub pause_at: Option<u64>,
}

impl SweepConfig {
    pub fn new(n: u64) -> SweepConfig {
        SweepConfig {
            n,
            workers: default_workers(),
            chunk: 1 << 16,
            memo: true,
            memo_budget: 1 << 28,
            step_cap: DEFAULT_STEP_CAP,
            capture: CaptureConfig::default_limits(),
            thresholds: Vec::new(),
            checkpoint_path: None,
            checkpoint_every: 1 << 24,
            pause_at: None,
        }
    }
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
        .min(8)
}

/// Exact per-form counts over `[1, n_total]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrequencyTable {
    pub n_total: u64,
    /// Indexed by `Form::index()`.
    pub counts: [u64; 6],
}

impl FrequencyTable {
    pub fn count(&self, form: Form) -> u64 {
        self.counts[form.index()]
    }

    pub fn frequency(&self, form: Form) -> f64 {
        self.count(form) as f64 / self.n_total as f64
    }

    /// Sum of the six counts; equals `n_total` exactly when the six sets
    /// partition the range.
    pub fn total_counted(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Counts over an explicit subrange, the unit [`merge`] operates on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RangeCounts {
    pub lo: u64,
    pub hi: u64,
    pub counts: [u64; 6],
}

/// Combine tables over disjoint ranges whose union is contiguous from 1.
pub fn merge(tables: &[RangeCounts]) -> Result<FrequencyTable> {
    if tables.is_empty() {
        return Err(Error::EmptyMerge);
    }
    let mut sorted: Vec<&RangeCounts> = tables.iter().collect();
    sorted.sort_by_key(|t| t.lo);
    let mut expected = 1u64;
    let mut counts = [0u64; 6];
    for t in sorted {
        if t.lo < expected {
            return Err(Error::RangeOverlap { lo: t.lo });
        }
        if t.lo > expected {
            return Err(Error::RangeGap {
                expected,
                found: t.lo,
            });
        }
        for (total, part) in counts.iter_mut().zip(&t.counts) {
            *total += part;
        }
        expected = t.hi + 1;
    }
    Ok(FrequencyTable {
        n_total: expected - 1,
        counts,
    })
}

/// Captured set members per form, ascending, plus truncation flags.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct CapturedMembers {
    pub members: [Vec<u64>; 6],
    pub truncated: [bool; 6],
}

impl CapturedMembers {
    pub fn for_form(&self, form: Form) -> &[u64] {
        &self.members[form.index()]
    }
}

#[derive(Clone, Debug)]
pub struct SweepOutcome {
    pub table: FrequencyTable,
    /// One table per configured threshold the run reached, in order.
    pub snapshots: Vec<FrequencyTable>,
    pub members: CapturedMembers,
    /// False when the run stopped at `pause_at`.
    pub complete: bool,
    pub elapsed_secs: f64,
}

/// Run a fresh sweep over `[1, config.n]`.
pub fn sweep(config: &SweepConfig) -> Result<SweepOutcome> {
    run(config, None)
}

/// Resume a sweep from the checkpoint at `config.checkpoint_path`.
pub fn sweep_resume(config: &SweepConfig) -> Result<SweepOutcome> {
    let path = config
        .checkpoint_path
        .as_ref()
        .expect("resume requires a checkpoint path");
    let checkpoint = Checkpoint::load(path)?;
    checkpoint.validate_against(config)?;
    run(config, Some(checkpoint))
}

/// One pass over ascending powers of ten: thresholds at 10^p for each listed
/// power, one final run to the largest. Returns the snapshot tables in power
/// order.
pub fn sweep_powers_of_ten(powers: &[u32], base: &SweepConfig) -> Result<Vec<FrequencyTable>> {
    assert!(!powers.is_empty(), "need at least one power");
    assert!(powers.windows(2).all(|w| w[0] < w[1]), "powers must ascend");
    let thresholds: Vec<u64> = powers.iter().map(|&p| 10u64.pow(p)).collect();
    let mut config = base.clone();
    config.n = *thresholds.last().unwrap();
    config.thresholds = thresholds;
    Ok(sweep(&config)?.snapshots)
}

#[derive(Clone, Copy, Debug)]
struct ChunkJob {
    lo: u64,
    hi: u64,
}

#[derive(Default)]
struct ChunkData {
    counts: [u64; 6],
    members: [Vec<u64>; 6],
}

fn build_chunks(from: u64, n: u64, chunk: u64, thresholds: &[u64]) -> Vec<ChunkJob> {
    assert!(chunk >= 1);
    let mut jobs = Vec::new();
    let mut lo = from;
    let mut t_pos = thresholds.partition_point(|&t| t < from);
    while lo <= n {
        let mut hi = lo.saturating_add(chunk - 1).min(n);
        if let Some(&t) = thresholds.get(t_pos) {
            if t <= hi {
                hi = t;
            }
        }
        jobs.push(ChunkJob { lo, hi });
        while t_pos < thresholds.len() && thresholds[t_pos] <= hi {
            t_pos += 1;
        }
        lo = hi + 1;
    }
    jobs
}

fn process_chunk(
    job: ChunkJob,
    memo: Option<&MemoTable>,
    step_cap: u64,
    capture: &CaptureConfig,
) -> Result<ChunkData> {
    let mut data = ChunkData::default();
    for n in job.lo..=job.hi {
        let form = terminating_form(Value::from_raw(n as u128), memo, step_cap)?;
        data.counts[form.index()] += 1;
        if capture.enabled(form) {
            data.members[form.index()].push(n);
        }
    }
    Ok(data)
}

struct Merger<'a> {
    config: &'a SweepConfig,
    counts: [u64; 6],
    members: [Vec<u64>; 6],
    truncated: [bool; 6],
    next_value: u64,
    snapshots: Vec<FrequencyTable>,
    threshold_pos: usize,
    since_checkpoint: u64,
    base_elapsed: f64,
    started: Instant,
    paused: bool,
}

impl<'a> Merger<'a> {
    fn new(config: &'a SweepConfig, resume: Option<Checkpoint>) -> Merger<'a> {
        let (counts, members, truncated, next_value, base_elapsed) = match resume {
            Some(cp) => (
                cp.counts,
                cp.members,
                cp.truncated,
                cp.next_unprocessed,
                cp.wall_time_secs,
            ),
            None => ([0u64; 6], Default::default(), [false; 6], 1, 0.0),
        };
        let threshold_pos = config.thresholds.partition_point(|&t| t < next_value);
        Merger {
            config,
            counts,
            members,
            truncated,
            next_value,
            snapshots: Vec::new(),
            threshold_pos,
            since_checkpoint: 0,
            base_elapsed,
            started: Instant::now(),
            paused: false,
        }
    }

    fn apply(&mut self, job: ChunkJob, data: ChunkData) -> Result<()> {
        debug_assert_eq!(job.lo, self.next_value, "chunks must merge in order");
        for i in 0..6 {
            self.counts[i] += data.counts[i];
        }
        for i in 0..6 {
            if let Some(limit) = self.config.capture.limits[i] {
                for &m in &data.members[i] {
                    if self.members[i].len() < limit {
                        self.members[i].push(m);
                    } else {
                        self.truncated[i] = true;
                        break;
                    }
                }
            }
        }
        self.next_value = job.hi + 1;
        self.since_checkpoint += job.hi - job.lo + 1;
        while self
            .config
            .thresholds
            .get(self.threshold_pos)
            .is_some_and(|&t| t == job.hi)
        {
            self.snapshots.push(FrequencyTable {
                n_total: job.hi,
                counts: self.counts,
            });
            self.threshold_pos += 1;
        }
        if self.config.pause_at.is_some_and(|p| self.next_value > p) {
            self.paused = true;
        }
        if self.config.checkpoint_path.is_some()
            && (self.paused || self.since_checkpoint >= self.config.checkpoint_every)
        {
            self.write_checkpoint()?;
            self.since_checkpoint = 0;
        }
        Ok(())
    }

    fn elapsed(&self) -> f64 {
        self.base_elapsed + self.started.elapsed().as_secs_f64()
    }

    fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            target_n: self.config.n,
            next_unprocessed: self.next_value,
            step_cap: self.config.step_cap,
            counts: self.counts,
            capture_limits: self.config.capture.limits,
            members: self.members.clone(),
            truncated: self.truncated,
            wall_time_secs: self.elapsed(),
        }
    }

    fn write_checkpoint(&self) -> Result<()> {
        let path = self.config.checkpoint_path.as_ref().unwrap();
        self.checkpoint().save(path)
    }

    fn finish(mut self) -> Result<SweepOutcome> {
        let complete = self.next_value > self.config.n;
        if complete && self.config.checkpoint_path.is_some() {
            self.write_checkpoint()?;
        }
        let elapsed_secs = self.elapsed();
        Ok(SweepOutcome {
            table: FrequencyTable {
                n_total: self.next_value - 1,
                counts: self.counts,
            },
            snapshots: std::mem::take(&mut self.snapshots),
            members: CapturedMembers {
                members: self.members,
                truncated: self.truncated,
            },
            complete,
            elapsed_secs,
        })
    }
}

fn run(config: &SweepConfig, resume: Option<Checkpoint>) -> Result<SweepOutcome> {
    assert!(config.n >= 1, "sweep range must contain at least 1");
    assert!(config.workers >= 1, "need at least one worker");
    assert!(
        config.thresholds.windows(2).all(|w| w[0] < w[1]),
        "thresholds must be strictly ascending"
    );
    assert!(
        config.thresholds.iter().all(|&t| t <= config.n),
        "thresholds must not exceed n"
    );

    let mut merger = Merger::new(config, resume);
    let from = merger.next_value;
    let jobs = build_chunks(from, config.n, config.chunk, &config.thresholds);
    let memo = config
        .memo
        .then(|| MemoTable::with_budget(config.n, config.memo_budget));
    let memo = memo.as_ref();

    if config.workers == 1 {
        // In-thread path: identical merge semantics, no scheduler involved.
        for &job in &jobs {
            let data = process_chunk(job, memo, config.step_cap, &config.capture)?;
            merger.apply(job, data)?;
            if merger.paused {
                break;
            }
        }
        return merger.finish();
    }

    let cursor = AtomicUsize::new(0);
    let abort = AtomicBool::new(false);
    let (tx, rx) = mpsc::channel::<(usize, Result<ChunkData>)>();

    let merge_result: Result<()> = std::thread::scope(|scope| {
        for _ in 0..config.workers {
            let tx = tx.clone();
            let jobs = &jobs;
            let cursor = &cursor;
            let abort = &abort;
            let capture = &config.capture;
            let step_cap = config.step_cap;
            scope.spawn(move || loop {
                if abort.load(Ordering::Relaxed) {
                    break;
                }
                let idx = cursor.fetch_add(1, Ordering::Relaxed);
                if idx >= jobs.len() {
                    break;
                }
                let data = process_chunk(jobs[idx], memo, step_cap, capture);
                if tx.send((idx, data)).is_err() {
                    break;
                }
            });
        }
        drop(tx);

        let mut pending: BTreeMap<usize, Result<ChunkData>> = BTreeMap::new();
        let mut next_idx = 0usize;
        let mut failure: Option<Error> = None;
        'merge: while next_idx < jobs.len() {
            let Ok((idx, result)) = rx.recv() else {
                break;
            };
            pending.insert(idx, result);
            while let Some(result) = pending.remove(&next_idx) {
                match result.and_then(|data| merger.apply(jobs[next_idx], data)) {
                    Ok(()) => {}
                    Err(e) => {
                        failure = Some(e);
                        break 'merge;
                    }
                }
                next_idx += 1;
                if merger.paused {
                    break 'merge;
                }
            }
        }
        abort.store(true, Ordering::Relaxed);
        for _ in rx {} // drain so workers never block
        match failure {
            Some(e) => Err(e),
            None => Ok(()),
        }
    });
    merge_result?;
    merger.finish()
}

const CHECKPOINT_SCHEMA: &str = "collatz-sweep-checkpoint/1";

/// Resumable sweep state, persisted as a self-describing text file with an
/// embedded digest.
///
/// Invariants: `next_unprocessed ≤ target_n + 1`, and the counts reflect
/// exactly the starts in `[1, next_unprocessed)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub target_n: u64,
    pub next_unprocessed: u64,
    pub step_cap: u64,
    pub counts: [u64; 6],
    pub capture_limits: [Option<usize>; 6],
    pub members: [Vec<u64>; 6],
    pub truncated: [bool; 6],
    pub wall_time_secs: f64,
}

fn fmt_limit(limit: Option<usize>) -> String {
    match limit {
        None => "none".to_string(),
        Some(usize::MAX) => "max".to_string(),
        Some(k) => k.to_string(),
    }
}

fn parse_limit(text: &str) -> Option<Option<usize>> {
    match text {
        "none" => Some(None),
        "max" => Some(Some(usize::MAX)),
        other => other.parse().ok().map(Some),
    }
}

impl Checkpoint {
    fn payload(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "schema {CHECKPOINT_SCHEMA}");
        let _ = writeln!(out, "target_n {}", self.target_n);
        let _ = writeln!(out, "next_unprocessed {}", self.next_unprocessed);
        let _ = writeln!(out, "step_cap {}", self.step_cap);
        let counts: Vec<String> = self.counts.iter().map(|c| c.to_string()).collect();
        let _ = writeln!(out, "counts {}", counts.join(" "));
        let limits: Vec<String> = self.capture_limits.iter().map(|&l| fmt_limit(l)).collect();
        let _ = writeln!(out, "capture_limits {}", limits.join(" "));
        let flags: Vec<&str> = self
            .truncated
            .iter()
            .map(|&t| if t { "1" } else { "0" })
            .collect();
        let _ = writeln!(out, "truncated {}", flags.join(" "));
        let _ = writeln!(out, "elapsed_secs {}", self.wall_time_secs);
        for form in Form::ALL {
            let values: Vec<String> = self.members[form.index()]
                .iter()
                .map(|v| v.to_string())
                .collect();
            let _ = writeln!(out, "members_{} {}", form.label(), values.join(" "));
        }
        out
    }

    fn digest(payload: &str) -> String {
        let mut hasher = Sha256::new();
        hasher.update(payload.as_bytes());
        let bytes = hasher.finalize();
        let mut hex = String::with_capacity(64);
        for b in bytes {
            let _ = write!(hex, "{b:02x}");
        }
        hex
    }

    /// Write atomically: temp file in the same directory, then rename.
    pub fn save(&self, path: &Path) -> Result<()> {
        let payload = self.payload();
        let digest = Self::digest(&payload);
        let contents = format!("{payload}digest {digest}\n");
        let tmp = path.with_extension("tmp");
        let io_err = |source| Error::Io {
            path: path.to_path_buf(),
            source,
        };
        std::fs::write(&tmp, contents).map_err(io_err)?;
        std::fs::rename(&tmp, path).map_err(io_err)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Checkpoint> {
        let contents = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&contents)
    }

    fn parse(contents: &str) -> Result<Checkpoint> {
        let corrupt = |reason: &str| Error::CheckpointCorrupt {
            reason: reason.to_string(),
        };
        let digest_at = contents
            .rfind("digest ")
            .ok_or_else(|| corrupt("missing digest line"))?;
        let (payload, digest_line) = contents.split_at(digest_at);
        let stored_digest = digest_line
            .trim_end()
            .strip_prefix("digest ")
            .ok_or_else(|| corrupt("malformed digest line"))?;
        if Self::digest(payload) != stored_digest {
            return Err(corrupt("digest mismatch"));
        }

        let mut fields: BTreeMap<&str, &str> = BTreeMap::new();
        for line in payload.lines() {
            let (key, value) = line.split_once(' ').unwrap_or((line, ""));
            fields.insert(key, value);
        }
        let schema = fields
            .get("schema")
            .ok_or_else(|| corrupt("missing schema line"))?;
        if *schema != CHECKPOINT_SCHEMA {
            return Err(Error::CheckpointVersion {
                found: schema.to_string(),
                expected: CHECKPOINT_SCHEMA,
            });
        }

        let parse_u64 = |key: &str| -> Result<u64> {
            fields
                .get(key)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| corrupt(&format!("missing or invalid field {key}")))
        };
        let target_n = parse_u64("target_n")?;
        let next_unprocessed = parse_u64("next_unprocessed")?;
        let step_cap = parse_u64("step_cap")?;
        if next_unprocessed > target_n + 1 {
            return Err(corrupt("next_unprocessed beyond target"));
        }

        let split6 = |key: &str| -> Result<Vec<&str>> {
            let raw = fields
                .get(key)
                .ok_or_else(|| corrupt(&format!("missing field {key}")))?;
            let parts: Vec<&str> = raw.split_whitespace().collect();
            if parts.len() != 6 {
                return Err(corrupt(&format!("field {key} needs six entries")));
            }
            Ok(parts)
        };
        let mut counts = [0u64; 6];
        for (i, part) in split6("counts")?.iter().enumerate() {
            counts[i] = part.parse().map_err(|_| corrupt("invalid count"))?;
        }
        let mut capture_limits = [None; 6];
        for (i, part) in split6("capture_limits")?.iter().enumerate() {
            capture_limits[i] =
                parse_limit(part).ok_or_else(|| corrupt("invalid capture limit"))?;
        }
        let mut truncated = [false; 6];
        for (i, part) in split6("truncated")?.iter().enumerate() {
            truncated[i] = match *part {
                "0" => false,
                "1" => true,
                _ => return Err(corrupt("invalid truncated flag")),
            };
        }
        let wall_time_secs: f64 = fields
            .get("elapsed_secs")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| corrupt("missing or invalid elapsed_secs"))?;

        let mut members: [Vec<u64>; 6] = Default::default();
        for form in Form::ALL {
            let key = format!("members_{}", form.label());
            let raw = fields
                .get(key.as_str())
                .ok_or_else(|| corrupt(&format!("missing field {key}")))?;
            for part in raw.split_whitespace() {
                let value: u64 = part.parse().map_err(|_| corrupt("invalid member"))?;
                members[form.index()].push(value);
            }
        }

        Ok(Checkpoint {
            target_n,
            next_unprocessed,
            step_cap,
            counts,
            capture_limits,
            members,
            truncated,
            wall_time_secs,
        })
    }

    fn validate_against(&self, config: &SweepConfig) -> Result<()> {
        let mismatch = |reason: String| Error::CheckpointMismatch { reason };
        if self.target_n != config.n {
            return Err(mismatch(format!(
                "checkpoint targets n = {}, run requests n = {}",
                self.target_n, config.n
            )));
        }
        if self.step_cap != config.step_cap {
            return Err(mismatch(format!(
                "checkpoint used step cap {}, run requests {}",
                self.step_cap, config.step_cap
            )));
        }
        if self.capture_limits != config.capture.limits {
            return Err(mismatch("capture limits differ".to_string()));
        }
        Ok(())
    }
}
