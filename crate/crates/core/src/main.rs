//! Command-line frontend: classification, trajectory and state-machine
//! traces, range sweeps, frequency tables at powers of ten, set reports, and
//! verification suites.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage error, 3 runtime
//! error. Every error path emits one `error: ...` line on stderr. Identical
//! arguments produce identical stdout bytes; the timing footer goes to
//! stderr and `--no-timing` silences it.

use clap::{error::ErrorKind, Parser, Subcommand, ValueEnum};
use collatz_lab::classifier::{self, DEFAULT_STEP_CAP};
use collatz_lab::dynamics::Form;
use collatz_lab::sweep::{self, CaptureConfig, SweepConfig};
use collatz_lab::{analysis, fsm, oracle, output, Error, Value};
use std::path::PathBuf;
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "collatz-lab",
    version,
    about = "Compressed Collatz dynamics and the six mod-9 recurrent forms"
)]
struct Cli {
    /// Suppress the timing footer on stderr.
    #[arg(long, global = true)]
    no_timing: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Text,
    Csv,
    Structured,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Toggle {
    On,
    Off,
}

impl Toggle {
    fn enabled(self) -> bool {
        self == Toggle::On
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Suite {
    /// 2^m classification follows the six-form cycle.
    Cycle,
    /// Compressed classification equals the filtered raw route.
    Oracle,
    /// Doubling invariance of classifications.
    Scaling,
    /// The six sets partition [1, N].
    Partition,
    /// Memoized classification equals direct classification.
    Memo,
}

#[derive(Subcommand)]
enum Command {
    /// Classify one start: terminating form, stopping power, steps, peak.
    Classify {
        #[arg(value_parser = count_u128)]
        start: u128,
        #[arg(long, value_parser = count_u64, default_value = "100000")]
        step_cap: u64,
        #[arg(long, value_enum, default_value = "text")]
        format: OutputFormat,
    },
    /// Print the compressed trajectory of one start.
    Trace {
        #[arg(value_parser = count_u128)]
        start: u128,
        #[arg(long, value_parser = count_u64, default_value = "100000")]
        step_cap: u64,
        #[arg(long, value_enum, default_value = "text")]
        format: OutputFormat,
    },
    /// Print the state-machine trajectory of one start.
    FsmTrace {
        #[arg(value_parser = count_u128)]
        start: u128,
        #[arg(long, value_parser = count_u64, default_value = "100000")]
        step_cap: u64,
        #[arg(long, value_enum, default_value = "text")]
        format: OutputFormat,
    },
    /// Classify every start in [1, N] and tabulate the six forms.
    Sweep {
        #[arg(long, value_parser = count_u64)]
        max: u64,
        #[arg(long, value_parser = count_usize)]
        workers: Option<usize>,
        #[arg(long, value_parser = count_u64, default_value = "65536")]
        chunk: u64,
        #[arg(long, value_enum, default_value = "on")]
        memo: Toggle,
        /// Byte budget for the memo table.
        #[arg(long, value_parser = count_usize, default_value = "268435456")]
        memo_budget: usize,
        #[arg(long, value_parser = count_u64, default_value = "100000")]
        step_cap: u64,
        /// Capture member lists for the rare forms.
        #[arg(long, value_enum, default_value = "on")]
        capture: Toggle,
        /// Cap on captured members of form c.
        #[arg(long, value_parser = count_usize, default_value = "100000")]
        capture_limit_c: usize,
        #[arg(long, value_enum, default_value = "text")]
        format: OutputFormat,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Write resumable progress to this file.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Continue from the checkpoint file instead of starting fresh.
        #[arg(long, requires = "checkpoint")]
        resume: bool,
    },
    /// Frequency-table rows at ascending powers of ten, one pass.
    Table3 {
        /// Range of exponents, e.g. 1-6 (thresholds 10^1 .. 10^6).
        #[arg(long)]
        powers: String,
        #[arg(long, value_parser = count_usize)]
        workers: Option<usize>,
        #[arg(long, value_parser = count_u64, default_value = "65536")]
        chunk: u64,
        #[arg(long, value_enum, default_value = "on")]
        memo: Toggle,
        #[arg(long, value_parser = count_u64, default_value = "100000")]
        step_cap: u64,
        #[arg(long, value_enum, default_value = "csv")]
        format: OutputFormat,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Members of one terminating-form set, optionally factorized.
    Sets {
        /// Form label a..f.
        #[arg(long)]
        form: String,
        #[arg(long, value_parser = count_u64)]
        max: u64,
        /// Add the prime factorization of every member.
        #[arg(long)]
        factor: bool,
        /// Add the power-of-two gap report (positions, values, exponents).
        #[arg(long)]
        gaps: bool,
        #[arg(long, value_parser = count_u64, default_value = "100000")]
        step_cap: u64,
        #[arg(long, value_enum, default_value = "text")]
        format: OutputFormat,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Verification suites; one PASS/FAIL line per property.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        /// Range bound for oracle/partition/memo.
        #[arg(long, value_parser = count_u64)]
        max: Option<u64>,
        /// Largest exponent for the cycle suite.
        #[arg(long, value_parser = count_u64)]
        max_m: Option<u64>,
        /// Largest base value for the scaling suite.
        #[arg(long, value_parser = count_u64)]
        x_max: Option<u64>,
        /// Largest doubling count for the scaling suite.
        #[arg(long, value_parser = count_u32)]
        i_max: Option<u32>,
        #[arg(long, value_parser = count_usize)]
        workers: Option<usize>,
    },
}

/// Parse a positive count, allowing underscores and scientific suffixes
/// ("1_000_000", "1e8", "2.5e3").
fn count_u128(text: &str) -> Result<u128, String> {
    let clean: String = text.chars().filter(|&c| c != '_').collect();
    let bad = || format!("invalid count '{text}'");
    let value = if let Some((mantissa, exponent)) = clean.split_once(['e', 'E']) {
        let exponent: u32 = exponent.parse().map_err(|_| bad())?;
        let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
        let digits = format!("{int_part}{frac_part}");
        let base: u128 = digits.parse().map_err(|_| bad())?;
        let shift = exponent
            .checked_sub(frac_part.len() as u32)
            .ok_or_else(|| format!("'{text}' is not an integer"))?;
        let scale = 10u128
            .checked_pow(shift)
            .ok_or_else(|| format!("'{text}' is out of range"))?;
        base.checked_mul(scale)
            .ok_or_else(|| format!("'{text}' is out of range"))?
    } else {
        clean.parse().map_err(|_| bad())?
    };
    if value == 0 {
        return Err(format!("'{text}' must be at least 1"));
    }
    Ok(value)
}

fn count_u64(text: &str) -> Result<u64, String> {
    let value = count_u128(text)?;
    u64::try_from(value).map_err(|_| format!("'{text}' is out of range"))
}

fn count_u32(text: &str) -> Result<u32, String> {
    let value = count_u128(text)?;
    u32::try_from(value).map_err(|_| format!("'{text}' is out of range"))
}

fn count_usize(text: &str) -> Result<usize, String> {
    let value = count_u128(text)?;
    usize::try_from(value).map_err(|_| format!("'{text}' is out of range"))
}

fn parse_power_range(text: &str) -> Result<Vec<u32>, String> {
    let bad = || format!("invalid power range '{text}' (expected e.g. 1-6 or 3)");
    let (lo, hi) = match text.split_once('-') {
        Some((a, b)) => (
            a.trim().parse::<u32>().map_err(|_| bad())?,
            b.trim().parse::<u32>().map_err(|_| bad())?,
        ),
        None => {
            let p = text.trim().parse::<u32>().map_err(|_| bad())?;
            (p, p)
        }
    };
    if lo > hi || hi > 19 {
        return Err(bad());
    }
    Ok((lo..=hi).collect())
}

enum Failure {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        Failure::Runtime(e)
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => match e.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                print!("{e}");
                std::process::exit(0);
            }
            _ => {
                let line = e.to_string();
                let first = line.lines().next().unwrap_or("invalid arguments");
                let first = first.strip_prefix("error: ").unwrap_or(first);
                eprintln!("error: {first}");
                std::process::exit(2);
            }
        },
    };

    let no_timing = cli.no_timing;
    let started = Instant::now();
    let code = match run(cli.command) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(2);
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            std::process::exit(3);
        }
    };
    if !no_timing {
        eprintln!("elapsed: {:.3}s", started.elapsed().as_secs_f64());
    }
    std::process::exit(code);
}

fn emit(output: Option<&PathBuf>, content: &str) -> Result<(), Failure> {
    match output {
        Some(path) => std::fs::write(path, content).map_err(|source| {
            Failure::Runtime(Error::Io {
                path: path.clone(),
                source,
            })
        }),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn parse_form(text: &str) -> Result<Form, Failure> {
    let mut chars = text.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) => Form::from_label(c)
            .ok_or_else(|| Failure::Usage(format!("unknown form '{text}' (expected a..f)"))),
        _ => Err(Failure::Usage(format!(
            "unknown form '{text}' (expected a..f)"
        ))),
    }
}

fn run(command: Command) -> Result<i32, Failure> {
    match command {
        Command::Classify {
            start,
            step_cap,
            format,
        } => {
            let c = classifier::classify(Value::new(start)?, step_cap)?;
            let rendered = match format {
                OutputFormat::Text => format!(
                    "start {}: form {}, stopping power 2^{}, compressed steps {}, peak {}\n",
                    c.start, c.terminating_form, c.stopping_exponent, c.compressed_steps, c.peak
                ),
                OutputFormat::Csv => format!(
                    "start,form,stopping_exponent,compressed_steps,peak\n{},{},{},{},{}\n",
                    c.start, c.terminating_form, c.stopping_exponent, c.compressed_steps, c.peak
                ),
                OutputFormat::Structured => {
                    let mut s = serde_json::to_string_pretty(&serde_json::json!({
                        "start": c.start.to_string(),
                        "form": c.terminating_form.label().to_string(),
                        "stopping_exponent": c.stopping_exponent,
                        "compressed_steps": c.compressed_steps,
                        "peak": c.peak.to_string(),
                    }))
                    .expect("json rendering cannot fail");
                    s.push('\n');
                    s
                }
            };
            emit(None, &rendered)?;
            Ok(0)
        }

        Command::Trace {
            start,
            step_cap,
            format,
        } => {
            let (trajectory, c) = classifier::classify_trace(Value::new(start)?, step_cap)?;
            let values: Vec<String> = trajectory.iter().map(|v| v.to_string()).collect();
            let rendered = match format {
                OutputFormat::Text => format!(
                    "{}\nform {}, stopping power 2^{}, compressed steps {}\n",
                    values.join(" "),
                    c.terminating_form,
                    c.stopping_exponent,
                    c.compressed_steps
                ),
                OutputFormat::Csv => {
                    let mut s = String::from("step,value\n");
                    for (i, v) in values.iter().enumerate() {
                        s.push_str(&format!("{i},{v}\n"));
                    }
                    s
                }
                OutputFormat::Structured => {
                    let mut s = serde_json::to_string_pretty(&serde_json::json!({
                        "start": c.start.to_string(),
                        "trajectory": values,
                        "form": c.terminating_form.label().to_string(),
                        "stopping_exponent": c.stopping_exponent,
                        "compressed_steps": c.compressed_steps,
                    }))
                    .expect("json rendering cannot fail");
                    s.push('\n');
                    s
                }
            };
            emit(None, &rendered)?;
            Ok(0)
        }

        Command::FsmTrace {
            start,
            step_cap,
            format,
        } => {
            let trace = fsm::fsm_trace(Value::new(start)?, step_cap)?;
            let rendered = match format {
                OutputFormat::Text => {
                    let states: Vec<String> = trace
                        .states
                        .iter()
                        .map(|s| format!("{}={}", s, s.value()))
                        .collect();
                    format!(
                        "entry_steps {}\nstates {}\nterminating_form {}\n",
                        trace.entry_steps,
                        states.join(" "),
                        trace.terminating_form
                    )
                }
                OutputFormat::Csv => {
                    let mut s = String::from("position,form,index,value\n");
                    for (i, state) in trace.states.iter().enumerate() {
                        s.push_str(&format!(
                            "{i},{},{},{}\n",
                            state.form(),
                            state.index(),
                            state.value()
                        ));
                    }
                    s
                }
                OutputFormat::Structured => {
                    let states: Vec<serde_json::Value> = trace
                        .states
                        .iter()
                        .map(|s| {
                            serde_json::json!({
                                "form": s.form().label().to_string(),
                                "index": s.index().to_string(),
                                "value": s.value().to_string(),
                            })
                        })
                        .collect();
                    let mut s = serde_json::to_string_pretty(&serde_json::json!({
                        "start": start.to_string(),
                        "entry_steps": trace.entry_steps,
                        "states": states,
                        "terminating_form": trace.terminating_form.label().to_string(),
                    }))
                    .expect("json rendering cannot fail");
                    s.push('\n');
                    s
                }
            };
            emit(None, &rendered)?;
            Ok(0)
        }

        Command::Sweep {
            max,
            workers,
            chunk,
            memo,
            memo_budget,
            step_cap,
            capture,
            capture_limit_c,
            format,
            output,
            checkpoint,
            resume,
        } => {
            let mut config = SweepConfig::new(max);
            if let Some(w) = workers {
                config.workers = w;
            }
            config.chunk = chunk;
            config.memo = memo.enabled();
            config.memo_budget = memo_budget;
            config.step_cap = step_cap;
            config.capture = if capture.enabled() {
                let mut c = CaptureConfig::default_limits();
                c.limits[Form::C.index()] = Some(capture_limit_c);
                c
            } else {
                CaptureConfig::none()
            };
            config.checkpoint_path = checkpoint;
            let outcome = if resume {
                sweep::sweep_resume(&config)?
            } else {
                sweep::sweep(&config)?
            };
            let members = capture.enabled().then_some(&outcome.members);
            let rendered = match format {
                OutputFormat::Text => output::sweep_text(&outcome.table, members),
                OutputFormat::Csv => output::csv_table(std::slice::from_ref(&outcome.table)),
                OutputFormat::Structured => output::sweep_json(&outcome.table, members),
            };
            emit(output.as_ref(), &rendered)?;
            Ok(0)
        }

        Command::Table3 {
            powers,
            workers,
            chunk,
            memo,
            step_cap,
            format,
            output,
        } => {
            let powers = parse_power_range(&powers).map_err(Failure::Usage)?;
            let mut base = SweepConfig::new(1);
            if let Some(w) = workers {
                base.workers = w;
            }
            base.chunk = chunk;
            base.memo = memo.enabled();
            base.step_cap = step_cap;
            base.capture = CaptureConfig::none();
            let rows = sweep::sweep_powers_of_ten(&powers, &base)?;
            let rendered = match format {
                OutputFormat::Csv => output::csv_table(&rows),
                OutputFormat::Text => {
                    let mut s = String::new();
                    for row in &rows {
                        s.push_str(&output::sweep_text(row, None));
                        s.push('\n');
                    }
                    s
                }
                OutputFormat::Structured => {
                    let rows_json: Vec<serde_json::Value> = rows
                        .iter()
                        .map(|row| {
                            let mut counts = serde_json::Map::new();
                            let mut freqs = serde_json::Map::new();
                            for form in Form::ALL {
                                counts.insert(
                                    form.label().to_string(),
                                    serde_json::json!(row.count(form)),
                                );
                                freqs.insert(
                                    form.label().to_string(),
                                    serde_json::json!(row.frequency(form)),
                                );
                            }
                            serde_json::json!({
                                "n": row.n_total,
                                "counts": counts,
                                "frequencies": freqs,
                            })
                        })
                        .collect();
                    let mut s = serde_json::to_string_pretty(&serde_json::Value::Array(rows_json))
                        .expect("json rendering cannot fail");
                    s.push('\n');
                    s
                }
            };
            emit(output.as_ref(), &rendered)?;
            Ok(0)
        }

        Command::Sets {
            form,
            max,
            factor,
            gaps,
            step_cap,
            format,
            output,
        } => {
            let form = parse_form(&form)?;
            let members = analysis::build_set(form, max, step_cap)?;
            let factorizations: Option<Vec<analysis::Factorization>> = factor.then(|| {
                members
                    .iter()
                    .map(|&m| {
                        analysis::factorize(Value::new(m as u128).expect("members are positive"))
                    })
                    .collect()
            });
            let gap_report = if gaps {
                Some(analysis::gap_report_from_members(form, max, &members)?)
            } else {
                None
            };
            let rendered = match format {
                OutputFormat::Text => output::set_report_text(
                    form,
                    max,
                    &members,
                    factorizations.as_deref(),
                    gap_report.as_ref(),
                ),
                OutputFormat::Csv => output::set_report_csv(&members, factorizations.as_deref()),
                OutputFormat::Structured => {
                    let mut record = serde_json::json!({
                        "form": form.label().to_string(),
                        "max": max,
                        "members": members,
                    });
                    if let Some(rows) = &factorizations {
                        record["factorizations"] = rows
                            .iter()
                            .map(|f| serde_json::json!(output::format_factorization(f)))
                            .collect::<Vec<_>>()
                            .into();
                    }
                    if let Some(g) = &gap_report {
                        record["gaps"] = serde_json::json!({
                            "positions": g.positions,
                            "position_first_diffs": g.position_first_diffs,
                            "position_second_diffs": g.position_second_diffs.iter().map(|d| d.to_string()).collect::<Vec<_>>(),
                            "values": g.values,
                            "value_first_diffs": g.value_first_diffs,
                            "value_second_diffs": g.value_second_diffs.iter().map(|d| d.to_string()).collect::<Vec<_>>(),
                            "exponents": g.exponents,
                            "exponent_first_diffs": g.exponent_first_diffs,
                            "exponent_second_diffs": g.exponent_second_diffs.iter().map(|d| d.to_string()).collect::<Vec<_>>(),
                        });
                    }
                    let mut s =
                        serde_json::to_string_pretty(&record).expect("json rendering cannot fail");
                    s.push('\n');
                    s
                }
            };
            emit(output.as_ref(), &rendered)?;
            Ok(0)
        }

        Command::Verify {
            suite,
            max,
            max_m,
            x_max,
            i_max,
            workers,
        } => run_verify(suite, max, max_m, x_max, i_max, workers),
    }
}

fn run_verify(
    suite: Suite,
    max: Option<u64>,
    max_m: Option<u64>,
    x_max: Option<u64>,
    i_max: Option<u32>,
    workers: Option<usize>,
) -> Result<i32, Failure> {
    match suite {
        Suite::Cycle => {
            let max_m = max_m.unwrap_or(600);
            let report = fsm::verify_power2_cycle(max_m);
            match report.first_violation {
                None => {
                    println!(
                        "cycle: PASS — 2^m classifies to the six-form cycle for every m <= {max_m}"
                    );
                    Ok(0)
                }
                Some(v) => {
                    println!(
                        "cycle: FAIL — at m = {} expected form {}, got {}",
                        v.exponent, v.expected, v.actual
                    );
                    Ok(1)
                }
            }
        }
        Suite::Oracle => {
            let max = max.unwrap_or(100_000);
            for n in 1..=max {
                let start = Value::new(n as u128).expect("range starts at 1");
                let direct = classifier::classify(start, DEFAULT_STEP_CAP)?;
                let (form, exponent) = oracle::filtered_raw_form(start, DEFAULT_STEP_CAP)?;
                if form != direct.terminating_form || exponent != direct.stopping_exponent {
                    println!(
                        "oracle: FAIL — start {n}: compressed route gives ({}, 2^{}), filtered raw route gives ({}, 2^{})",
                        direct.terminating_form, direct.stopping_exponent, form, exponent
                    );
                    return Ok(1);
                }
            }
            println!(
                "oracle: PASS — compressed and filtered-raw classifications agree for every start <= {max}"
            );
            Ok(0)
        }
        Suite::Scaling => {
            let x_max = x_max.unwrap_or(10_000);
            let i_max = i_max.unwrap_or(20);
            let report = fsm::verify_scaling(x_max, i_max, DEFAULT_STEP_CAP)?;
            if report.passed() {
                println!(
                    "scaling: PASS — doubling invariance holds for x <= {x_max}, i <= {i_max} ({} pairs)",
                    report.pairs_checked
                );
                Ok(0)
            } else {
                let v = &report.violations[0];
                println!(
                    "scaling: FAIL — x = {}, i = {}: expected ({}, 2^{}), got ({}, 2^{}) ({} violations total)",
                    v.x,
                    v.doublings,
                    v.expected.0,
                    v.expected.1,
                    v.actual.0,
                    v.actual.1,
                    report.violations_total
                );
                Ok(1)
            }
        }
        Suite::Partition => {
            let max = max.unwrap_or(1_000_000);
            let mut config = SweepConfig::new(max);
            if let Some(w) = workers {
                config.workers = w;
            }
            config.capture = CaptureConfig::none();
            let outcome = sweep::sweep(&config)?;
            if outcome.table.total_counted() == max {
                println!(
                    "partition: PASS — the six sets partition [1, {max}] (every start classified exactly once)"
                );
                Ok(0)
            } else {
                println!(
                    "partition: FAIL — counts sum to {} over [1, {max}]",
                    outcome.table.total_counted()
                );
                Ok(1)
            }
        }
        Suite::Memo => {
            let max = max.unwrap_or(100_000);
            let with = classifier::classify_range_forms(1, max, true, DEFAULT_STEP_CAP)?;
            let without = classifier::classify_range_forms(1, max, false, DEFAULT_STEP_CAP)?;
            match with.iter().zip(&without).position(|(a, b)| a != b) {
                None => {
                    println!(
                        "memo: PASS — memoized and direct classification agree element-wise on [1, {max}]"
                    );
                    Ok(0)
                }
                Some(i) => {
                    println!(
                        "memo: FAIL — start {}: memoized {}, direct {}",
                        i as u64 + 1,
                        with[i],
                        without[i]
                    );
                    Ok(1)
                }
            }
        }
    }
}
