//! Corpus benchmarking: compression ratio, encode time, and closed-form
//! memory models for comparing match finders.
//!
//! The models give the exact steady-state footprint, in bytes, of several
//! dictionary-search structures at a given window geometry — this crate's
//! suffix-array index plus the usual alternatives (binary-tree and
//! suffix-tree match finders over 4-byte integers, LZMA's window-dependent
//! allocation per match-finder kind, and GZip's fixed tables). They are
//! arithmetic only: nothing here instantiates the compared encoders.
//!
//! [`run_benchmark`] encodes every file of a corpus directory under each
//! requested window configuration, decodes and compares the result before
//! reporting anything, and aggregates per-config totals the same way the
//! models above are compared: total encoding time and arithmetic-mean bits
//! per byte. Files are pre-loaded so timings exclude I/O, and the default
//! sequential mode keeps timings uncontended; the optional parallel mode
//! labels every timing it produces as contended.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use serde::Serialize;
use thiserror::Error;

use crate::codec::{decode_stream, encode_stream, CodecError};
use crate::sliding_index::{MatchPolicy, WindowConfig};

/// Benchmarks follow the always-match rule: any existing match, however
/// short, is preferred over a literal.
pub const BENCH_MIN_MATCH: u32 = 1;

/// LZMA match-finder kinds, as named in its encoder settings; each implies
/// a different per-window-byte memory coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LzmaMatchFinder {
    Bt2,
    Bt3,
    Bt4,
    Hc4,
}

impl LzmaMatchFinder {
    /// Per-window-byte cost, doubled (so 9.5 is stored as 19): keeps the
    /// model in integer arithmetic.
    fn doubled_coefficient(self) -> u64 {
        match self {
            LzmaMatchFinder::Bt2 => 19,
            LzmaMatchFinder::Bt3 | LzmaMatchFinder::Bt4 => 23,
            LzmaMatchFinder::Hc4 => 15,
        }
    }
}

impl fmt::Display for LzmaMatchFinder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LzmaMatchFinder::Bt2 => "BT2",
            LzmaMatchFinder::Bt3 => "BT3",
            LzmaMatchFinder::Bt4 => "BT4",
            LzmaMatchFinder::Hc4 => "HC4",
        })
    }
}

impl FromStr for LzmaMatchFinder {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "BT2" => Ok(LzmaMatchFinder::Bt2),
            "BT3" => Ok(LzmaMatchFinder::Bt3),
            "BT4" => Ok(LzmaMatchFinder::Bt4),
            "HC4" => Ok(LzmaMatchFinder::Hc4),
            other => {
                Err(format!("unknown match finder {other:?} (expected BT2, BT3, BT4, or HC4)"))
            }
        }
    }
}

/// Suffix-array index footprint: the window and look-ahead bytes, two
/// window-sized suffix buffers of 4-byte entries, the 256-entry first-symbol
/// table, and the block-sized scratch order.
pub fn memory_sa(dict_len: usize, lab_len: usize) -> u64 {
    let (m, n) = (dict_len as u64, lab_len as u64);
    m + n + 2 * 4 * m + 4 * 256 + 4 * n
}

/// Binary-tree match finder footprint over 4-byte integers.
pub fn memory_bt(dict_len: usize) -> u64 {
    13 * dict_len as u64 + 12
}

/// Suffix-tree match finder footprint with an auxiliary hash table of
/// `hashsz` slots.
pub fn memory_st(dict_len: usize, hashsz: usize) -> u64 {
    25 * dict_len as u64 + 4 * hashsz as u64 + 16
}

/// LZMA encoder footprint: a fixed 4 MiB base plus a per-window-byte
/// coefficient set by the match finder (9.5 for BT2, 11.5 for BT3/BT4,
/// 7.5 for HC4), rounded half-up to whole bytes.
pub fn memory_lzma(dict_len: usize, match_finder: LzmaMatchFinder) -> u64 {
    4_194_304 + (dict_len as u64 * match_finder.doubled_coefficient()).div_ceil(2)
}

/// GZip footprint: fixed tables, independent of configuration.
pub fn memory_gzip() -> u64 {
    313_408
}

/// One file × configuration measurement.
#[derive(Debug, Clone, Serialize)]
pub struct BenchResult {
    pub file: String,
    pub dict_len: usize,
    pub lab_len: usize,
    pub policy: String,
    /// Encode time (the input is pre-loaded; I/O excluded).
    pub seconds: f64,
    /// 8 × compressed bytes / original bytes.
    pub bpb: f64,
    /// Suffix-array index footprint for this configuration.
    pub memory_bytes: u64,
    pub input_bytes: u64,
    pub output_bytes: u64,
    /// True when produced by the parallel mode: wall-clock times share cores.
    pub contended: bool,
}

/// Corpus-level aggregate for one configuration: summed time, mean bpb.
#[derive(Debug, Clone, Serialize)]
pub struct ConfigSummary {
    pub dict_len: usize,
    pub lab_len: usize,
    pub policy: String,
    pub files: usize,
    pub total_seconds: f64,
    pub mean_bpb: f64,
    pub memory_bytes: u64,
    pub contended: bool,
}

/// A corpus entry that produced no measurement, and why.
#[derive(Debug, Clone, Serialize)]
pub struct SkippedFile {
    pub path: String,
    pub reason: String,
}

/// Everything a benchmark run produced.
#[derive(Debug, Clone)]
pub struct BenchReport {
    pub results: Vec<BenchResult>,
    pub summaries: Vec<ConfigSummary>,
    pub skipped: Vec<SkippedFile>,
}

/// Errors that abort a benchmark run entirely (per-file read problems are
/// recorded as skips instead).
#[derive(Debug, Error)]
pub enum BenchError {
    #[error("corpus directory {0:?} is unreadable: {1}")]
    CorpusUnreadable(PathBuf, std::io::Error),
    #[error("corpus directory {0:?} contains no measurable files")]
    EmptyCorpus(PathBuf),
    #[error("no window configurations given")]
    NoConfigs,
    #[error("verification failed for {file:?} at ({dict_len},{lab_len}): {reason}")]
    VerificationFailed { file: String, dict_len: usize, lab_len: usize, reason: String },
    #[error(transparent)]
    Codec(#[from] CodecError),
}

struct LoadedFile {
    name: String,
    data: Vec<u8>,
}

/// Encodes every corpus file under every configuration and reports
/// per-file and per-config measurements.
///
/// Every compressed stream is decoded and compared against the original
/// before its row is reported; a mismatch aborts the run. Unreadable
/// entries, non-files, and empty files are skipped and listed in the
/// report. Files are measured in name order; `parallel` distributes file ×
/// config jobs across threads and marks all timings as contended.
pub fn run_benchmark(
    corpus_dir: &Path,
    configs: &[WindowConfig],
    policy: MatchPolicy,
    parallel: bool,
) -> Result<BenchReport, BenchError> {
    if configs.is_empty() {
        return Err(BenchError::NoConfigs);
    }
    let entries = fs::read_dir(corpus_dir)
        .map_err(|e| BenchError::CorpusUnreadable(corpus_dir.to_path_buf(), e))?;
    let mut paths: Vec<PathBuf> = Vec::new();
    let mut skipped: Vec<SkippedFile> = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| BenchError::CorpusUnreadable(corpus_dir.to_path_buf(), e))?;
        paths.push(entry.path());
    }
    paths.sort();

    let mut files: Vec<LoadedFile> = Vec::new();
    for path in paths {
        let display = path.display().to_string();
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| display.clone());
        match fs::metadata(&path) {
            Err(e) => {
                skipped.push(SkippedFile { path: display, reason: e.to_string() });
                continue;
            }
            Ok(md) if !md.is_file() => {
                skipped.push(SkippedFile { path: display, reason: "not a regular file".into() });
                continue;
            }
            Ok(_) => {}
        }
        match fs::read(&path) {
            Err(e) => skipped.push(SkippedFile { path: display, reason: e.to_string() }),
            Ok(data) if data.is_empty() => {
                skipped.push(SkippedFile { path: display, reason: "empty file".into() })
            }
            Ok(data) => files.push(LoadedFile { name, data }),
        }
    }
    if files.is_empty() {
        return Err(BenchError::EmptyCorpus(corpus_dir.to_path_buf()));
    }

    // Config-major job order keeps rows grouped the way the table reads.
    let jobs: Vec<(WindowConfig, &LoadedFile)> =
        configs.iter().flat_map(|&config| files.iter().map(move |file| (config, file))).collect();

    let results = if parallel {
        run_jobs_parallel(&jobs, policy)?
    } else {
        jobs.iter()
            .map(|&(config, file)| measure(file, config, policy, false))
            .collect::<Result<Vec<_>, _>>()?
    };

    let summaries = configs
        .iter()
        .map(|&config| {
            let rows: Vec<&BenchResult> = results
                .iter()
                .filter(|r| r.dict_len == config.dict_len() && r.lab_len == config.lab_len())
                .collect();
            ConfigSummary {
                dict_len: config.dict_len(),
                lab_len: config.lab_len(),
                policy: policy.to_string(),
                files: rows.len(),
                total_seconds: rows.iter().map(|r| r.seconds).sum(),
                mean_bpb: rows.iter().map(|r| r.bpb).sum::<f64>() / rows.len() as f64,
                memory_bytes: memory_sa(config.dict_len(), config.lab_len()),
                contended: parallel,
            }
        })
        .collect();

    Ok(BenchReport { results, summaries, skipped })
}

/// Work-stealing execution of the job list; results keep job order.
fn run_jobs_parallel(
    jobs: &[(WindowConfig, &LoadedFile)],
    policy: MatchPolicy,
) -> Result<Vec<BenchResult>, BenchError> {
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<BenchResult>>> = Mutex::new(vec![None; jobs.len()]);
    let failures: Mutex<Vec<(usize, BenchError)>> = Mutex::new(Vec::new());
    let workers = thread::available_parallelism().map(|n| n.get()).unwrap_or(1).min(jobs.len());
    thread::scope(|scope| {
        for _ in 0..workers.max(1) {
            scope.spawn(|| loop {
                let j = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(config, file)) = jobs.get(j) else { break };
                match measure(file, config, policy, true) {
                    Ok(row) => slots.lock().unwrap()[j] = Some(row),
                    Err(e) => failures.lock().unwrap().push((j, e)),
                }
            });
        }
    });
    let mut failures = failures.into_inner().unwrap();
    if !failures.is_empty() {
        failures.sort_by_key(|(j, _)| *j);
        return Err(failures.remove(0).1);
    }
    let rows = slots
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|slot| slot.expect("every job either succeeded or failed"))
        .collect();
    Ok(rows)
}

/// Encodes one file under one configuration, verifies the stream decodes
/// back to the original, and builds its report row.
fn measure(
    file: &LoadedFile,
    config: WindowConfig,
    policy: MatchPolicy,
    contended: bool,
) -> Result<BenchResult, BenchError> {
    let mut stream = Vec::with_capacity(file.data.len() / 2 + 64);
    let stats = encode_stream(&file.data[..], config, policy, BENCH_MIN_MATCH, &mut stream)?;
    let verification = {
        let mut restored = Vec::with_capacity(file.data.len());
        match decode_stream(&stream[..], &mut restored) {
            Ok(_) if restored == file.data => Ok(()),
            Ok(_) => Err("decoded bytes differ from the original".to_string()),
            Err(e) => Err(e.to_string()),
        }
    };
    if let Err(reason) = verification {
        return Err(BenchError::VerificationFailed {
            file: file.name.clone(),
            dict_len: config.dict_len(),
            lab_len: config.lab_len(),
            reason,
        });
    }
    Ok(BenchResult {
        file: file.name.clone(),
        dict_len: config.dict_len(),
        lab_len: config.lab_len(),
        policy: policy.to_string(),
        seconds: stats.elapsed.as_secs_f64(),
        bpb: 8.0 * stream.len() as f64 / file.data.len() as f64,
        memory_bytes: memory_sa(config.dict_len(), config.lab_len()),
        input_bytes: file.data.len() as u64,
        output_bytes: stream.len() as u64,
        contended,
    })
}

impl BenchReport {
    /// Human-readable aligned summary table, one row per configuration,
    /// followed by any skipped entries.
    pub fn table(&self) -> String {
        let mut out = String::new();
        let contended = self.summaries.first().is_some_and(|s| s.contended);
        let policy = self.summaries.first().map(|s| s.policy.as_str()).unwrap_or("?");
        out.push_str(&format!(
            "policy: {policy}   min_match: {BENCH_MIN_MATCH}   timings: {}\n",
            if contended { "contended (parallel mode)" } else { "uncontended" }
        ));
        out.push_str(&format!(
            "{:>2}  {:>10}  {:>6}  {:>10}  {:>5}  {:>10}  {:>6}\n",
            "#", "Dictionary", "LAB", "Memory", "Files", "Time(s)", "bpb"
        ));
        for (i, s) in self.summaries.iter().enumerate() {
            out.push_str(&format!(
                "{:>2}  {:>10}  {:>6}  {:>10}  {:>5}  {:>10.3}  {:>6.2}\n",
                i + 1,
                s.dict_len,
                s.lab_len,
                s.memory_bytes,
                s.files,
                s.total_seconds,
                s.mean_bpb
            ));
        }
        for skip in &self.skipped {
            out.push_str(&format!("skipped {}: {}\n", skip.path, skip.reason));
        }
        out
    }

    /// Machine-readable rows: one JSON object per line, per-file rows first,
    /// then per-config summaries, then skipped entries, each tagged `kind`.
    pub fn machine_rows(&self) -> String {
        fn tagged<T: Serialize>(kind: &str, value: &T) -> String {
            let mut v = serde_json::to_value(value).expect("report rows serialize");
            v.as_object_mut()
                .expect("report rows are objects")
                .insert("kind".into(), serde_json::Value::String(kind.into()));
            v.to_string()
        }
        let mut lines = Vec::new();
        for r in &self.results {
            lines.push(tagged("file", r));
        }
        for s in &self.summaries {
            lines.push(tagged("summary", s));
        }
        for s in &self.skipped {
            lines.push(tagged("skipped", s));
        }
        let mut out = lines.join("\n");
        out.push('\n');
        out
    }
}
