//! Command-line front end: compress/decompress files, print the memory
//! models, benchmark a corpus directory, and run built-in verification
//! suites.
//!
//! Exit codes: 0 success, 1 runtime failure (I/O, corrupt stream,
//! verification mismatch), 2 usage error (bad flags or window geometry).
//! Output files are written to a temporary sibling and renamed into place,
//! so a failed run never leaves a partial file behind.

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use salz::{
    build_suffix_array, build_suffix_array_naive, decode_stream, encode_stream, memory_bt,
    memory_gzip, memory_lzma, memory_sa, memory_st, run_benchmark, verify_suffix_array,
    LzmaMatchFinder, MatchPolicy, SlidingIndex, WindowConfig,
};

#[derive(Parser)]
#[command(
    name = "salz",
    version,
    about = "LZSS compression with a sliding-window suffix-array match finder"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compress a file into the salz stream format
    Compress {
        #[command(flatten)]
        window: WindowArgs,
        /// Match search effort: "fast" takes the first candidate, "best" the longest
        #[arg(long, default_value = "best")]
        policy: MatchPolicy,
        /// Shortest match worth a match token (1 = always prefer matches)
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
        min_match: u32,
        /// File to compress
        input: PathBuf,
        /// Destination stream path
        output: PathBuf,
    },
    /// Decompress a salz stream back to the original bytes
    Decompress {
        /// Stream to decode
        input: PathBuf,
        /// Destination file path
        output: PathBuf,
    },
    /// Print the memory-model footprints for a window configuration
    Memory {
        #[command(flatten)]
        window: WindowArgs,
        /// Suffix-tree hash slots (defaults to the dictionary size)
        #[arg(long)]
        hashsz: Option<usize>,
        /// LZMA match-finder variant: BT2, BT3, BT4, or HC4
        #[arg(long, default_value = "BT4")]
        mf: LzmaMatchFinder,
    },
    /// Encode every file in a corpus directory and report time, bpb, and memory
    Bench {
        /// Directory of files to measure
        #[arg(long)]
        corpus: PathBuf,
        /// Window configuration "M,N" (dictionary,LAB); repeat for several
        #[arg(long = "config", value_name = "M,N", required = true)]
        configs: Vec<ConfigArg>,
        /// Match search effort for every run
        #[arg(long, default_value = "best")]
        policy: MatchPolicy,
        /// Also write the table plus machine-readable rows to this path
        #[arg(long)]
        report: Option<PathBuf>,
        /// Encode jobs concurrently (timings are then labelled contended)
        #[arg(long)]
        parallel: bool,
    },
    /// Cross-check the fast paths against reference implementations
    Selftest,
}

#[derive(Args)]
struct WindowArgs {
    /// Dictionary window size in bytes (power of two)
    #[arg(long, default_value_t = 32768)]
    dict: usize,
    /// Look-ahead block size in bytes (power of two, at most the dictionary)
    #[arg(long, default_value_t = 1024)]
    lab: usize,
}

/// A "M,N" pair from the command line.
#[derive(Debug, Clone, Copy)]
struct ConfigArg {
    dict: usize,
    lab: usize,
}

impl FromStr for ConfigArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (m, n) = s.split_once(',').ok_or_else(|| format!("expected \"M,N\", got {s:?}"))?;
        let dict = m.trim().parse::<usize>().map_err(|e| format!("bad dictionary size: {e}"))?;
        let lab = n.trim().parse::<usize>().map_err(|e| format!("bad LAB size: {e}"))?;
        Ok(ConfigArg { dict, lab })
    }
}

impl fmt::Display for ConfigArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.dict, self.lab)
    }
}

/// Failures split by exit code: flag/geometry problems exit 2, everything
/// else exits 1.
enum AppError {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for AppError {
    fn from(e: anyhow::Error) -> Self {
        AppError::Runtime(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(AppError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(AppError::Runtime(err)) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

/// Validates window geometry, treating violations as usage errors.
fn stream_config(dict: usize, lab: usize) -> Result<WindowConfig, AppError> {
    let config = WindowConfig::new(dict, lab).map_err(|e| AppError::Usage(e.to_string()))?;
    if config.len_bits() == 0 {
        return Err(AppError::Usage(
            "the LAB size must be at least 2 (a one-byte block cannot be framed)".into(),
        ));
    }
    Ok(config)
}

fn run(command: Command) -> Result<(), AppError> {
    match command {
        Command::Compress { window, policy, min_match, input, output } => {
            let config = stream_config(window.dict, window.lab)?;
            let reader =
                fs::File::open(&input).with_context(|| format!("opening {}", input.display()))?;
            let stats = write_atomically(&output, |sink| {
                let stats = encode_stream(reader, config, policy, min_match, sink)
                    .with_context(|| format!("compressing {}", input.display()))?;
                Ok(stats)
            })?;
            let ratio = if stats.input_bytes > 0 {
                format!("{:.3} bpb", 8.0 * stats.output_bytes as f64 / stats.input_bytes as f64)
            } else {
                "empty input".to_string()
            };
            println!(
                "compressed {} ({} bytes) -> {} ({} bytes, {}, {} literals, {} matches, {:.3}s)",
                input.display(),
                stats.input_bytes,
                output.display(),
                stats.output_bytes,
                ratio,
                stats.literal_tokens,
                stats.match_tokens,
                stats.elapsed.as_secs_f64(),
            );
            Ok(())
        }
        Command::Decompress { input, output } => {
            let reader = io::BufReader::new(
                fs::File::open(&input).with_context(|| format!("opening {}", input.display()))?,
            );
            let stats = write_atomically(&output, |sink| {
                let stats = decode_stream(reader, sink)
                    .with_context(|| format!("decompressing {}", input.display()))?;
                Ok(stats)
            })?;
            println!(
                "decompressed {} -> {} ({} bytes)",
                input.display(),
                output.display(),
                stats.output_bytes,
            );
            Ok(())
        }
        Command::Memory { window, hashsz, mf } => {
            // The models are pure arithmetic, but the geometry must still be
            // a window we could actually instantiate.
            WindowConfig::new(window.dict, window.lab)
                .map_err(|e| AppError::Usage(e.to_string()))?;
            let (m, n) = (window.dict, window.lab);
            let hashsz = hashsz.unwrap_or(m);
            println!("memory models for dict={m}, lab={n}, hashsz={hashsz}, mf={mf}");
            println!("  SA    {:>12}", memory_sa(m, n));
            println!("  BT    {:>12}", memory_bt(m));
            println!("  ST    {:>12}", memory_st(m, hashsz));
            println!("  LZMA  {:>12}", memory_lzma(m, mf));
            println!("  GZIP  {:>12}", memory_gzip());
            Ok(())
        }
        Command::Bench { corpus, configs, policy, report, parallel } => {
            let configs = configs
                .iter()
                .map(|c| stream_config(c.dict, c.lab))
                .collect::<Result<Vec<_>, _>>()?;
            let result = run_benchmark(&corpus, &configs, policy, parallel)
                .map_err(|e| AppError::Runtime(anyhow::Error::new(e)))?;
            print!("{}", result.table());
            if let Some(path) = report {
                write_atomically(&path, |sink| {
                    sink.write_all(result.table().as_bytes())
                        .and_then(|()| sink.write_all(b"\n"))
                        .and_then(|()| sink.write_all(result.machine_rows().as_bytes()))
                        .with_context(|| format!("writing report {}", path.display()))?;
                    Ok(())
                })?;
                println!("report written to {}", path.display());
            }
            Ok(())
        }
        Command::Selftest => selftest().map_err(AppError::Runtime),
    }
}

/// Runs `write` against a temporary file next to `path`, then renames it
/// into place; nothing is left behind on failure.
fn write_atomically<T>(
    path: &Path,
    write: impl FnOnce(&mut io::BufWriter<&mut fs::File>) -> Result<T, AppError>,
) -> Result<T, AppError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut temp = tempfile::Builder::new()
        .prefix(".salz-")
        .tempfile_in(dir)
        .with_context(|| format!("creating a temporary file in {}", dir.display()))?;
    let value = {
        let mut writer = io::BufWriter::new(temp.as_file_mut());
        let value = write(&mut writer)?;
        writer.flush().with_context(|| format!("writing {}", path.display()))?;
        value
    };
    temp.persist(path).map(|_| value).map_err(|e| {
        AppError::Runtime(
            anyhow::Error::new(e.error)
                .context(format!("moving the finished file into place at {}", path.display())),
        )
    })
}

/// Deterministic cross-checks of the construction, matching, codec, and
/// model paths against reference implementations.
fn selftest() -> anyhow::Result<()> {
    suite_suffix_array()?;
    suite_match_finder()?;
    suite_roundtrip()?;
    suite_memory_models()?;
    println!("selftest: all suites passed");
    Ok(())
}

fn suite_suffix_array() -> anyhow::Result<()> {
    let sa = build_suffix_array(b"mississippi");
    anyhow::ensure!(
        sa.order() == [10, 7, 4, 1, 0, 9, 8, 6, 3, 5, 2],
        "suffix order of the known example is wrong: {:?}",
        sa.order()
    );
    let mut rng = ChaCha8Rng::seed_from_u64(0x5E1F_0001);
    let mut cases = 1usize;
    for round in 0..300 {
        let sigma: u16 = [2, 4, 256][round % 3];
        let len = rng.gen_range(1..=1024);
        let text: Vec<u8> = (0..len).map(|_| (rng.gen_range(0..sigma) & 0xFF) as u8).collect();
        let fast = build_suffix_array(&text);
        let naive = build_suffix_array_naive(&text)?;
        anyhow::ensure!(fast.order() == naive.order(), "construction mismatch on {text:?}");
        anyhow::ensure!(verify_suffix_array(&text, &fast)?, "verifier rejected a real order");
        cases += 1;
    }
    println!("selftest: suffix-array construction vs reference sort ... ok ({cases} cases)");
    Ok(())
}

fn suite_match_finder() -> anyhow::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5E1F_0002);
    let mut cases = 0usize;
    for round in 0..100 {
        let sigma: u16 = [2, 16, 256][round % 3];
        let fill = rng.gen_range(1..=2048);
        let text: Vec<u8> = (0..fill).map(|_| (rng.gen_range(0..sigma) & 0xFF) as u8).collect();
        let mut index = SlidingIndex::new(WindowConfig::new(2048, 128).expect("static sizes"));
        for chunk in text.chunks(128) {
            index.slide_in(chunk).expect("chunks fit");
        }
        index.rebuild();
        let lab: Vec<u8> =
            (0..rng.gen_range(1..=128)).map(|_| (rng.gen_range(0..sigma) & 0xFF) as u8).collect();
        for i in 0..lab.len() {
            let brute = (0..text.len())
                .map(|p| text[p..].iter().zip(&lab[i..]).take_while(|(a, b)| a == b).count())
                .max()
                .unwrap_or(0);
            let found = index
                .longest_match(&lab, i, MatchPolicy::Best)
                .expect("offset in range")
                .map(|m| m.len as usize)
                .unwrap_or(0);
            anyhow::ensure!(
                found == brute,
                "match length {found} != brute-force {brute} (round {round}, offset {i})"
            );
            cases += 1;
        }
    }
    println!("selftest: best-match search vs brute-force scan ... ok ({cases} cases)");
    Ok(())
}

fn suite_roundtrip() -> anyhow::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5E1F_0003);
    let configs = [(64, 16), (256, 64), (1024, 256), (8192, 2048)];
    let mut cases = 0usize;
    let mut inputs: Vec<Vec<u8>> =
        vec![Vec::new(), vec![0u8], vec![0u8; 4096], (0..=255u8).cycle().take(2100).collect()];
    for _ in 0..60 {
        let sigma: u16 = [2, 7, 64, 256][rng.gen_range(0..4)];
        let len = rng.gen_range(0..65536);
        inputs.push((0..len).map(|_| (rng.gen_range(0..sigma) & 0xFF) as u8).collect());
    }
    for data in &inputs {
        for &(m, n) in &configs {
            let config = WindowConfig::new(m, n).expect("static sizes");
            for policy in [MatchPolicy::Fast, MatchPolicy::Best] {
                let mut stream = Vec::new();
                encode_stream(&data[..], config, policy, 1, &mut stream)?;
                let mut restored = Vec::new();
                decode_stream(&stream[..], &mut restored)?;
                anyhow::ensure!(
                    &restored == data,
                    "roundtrip mismatch at ({m},{n}) {policy} on {} bytes",
                    data.len()
                );
                cases += 1;
            }
        }
    }
    println!("selftest: stream roundtrip ... ok ({cases} cases)");
    Ok(())
}

fn suite_memory_models() -> anyhow::Result<()> {
    let checks = [
        ("SA(65536,4096)", memory_sa(65536, 4096), 611_328),
        ("SA(2048,1024)", memory_sa(2048, 1024), 24_576),
        ("BT(65536)", memory_bt(65536), 851_980),
        ("ST(65536,65536)", memory_st(65536, 65536), 1_900_560),
        ("LZMA(65536,BT2)", memory_lzma(65536, LzmaMatchFinder::Bt2), 4_816_896),
        ("LZMA(32768,BT4)", memory_lzma(32768, LzmaMatchFinder::Bt4), 4_571_136),
        ("GZIP()", memory_gzip(), 313_408),
    ];
    for (what, got, want) in checks {
        anyhow::ensure!(got == want, "{what} = {got}, expected {want}");
    }
    println!("selftest: memory models ... ok ({} cases)", checks.len());
    Ok(())
}
