//! Lossless LZSS compression built on a sliding-window suffix array.
//!
//! The pieces, bottom-up:
//!
//! - [`suffix_array`]: linear-time suffix array construction (induced
//!   sorting), plus a quadratic reference builder and an order verifier for
//!   cross-checking.
//! - [`sliding_index`]: the dictionary window. Keeps a suffix array over the
//!   window with a double-buffered incremental update when a block slides in,
//!   and a 256-entry first-symbol table that narrows every match query to one
//!   bucket. Match searches come in `Fast` (first candidate) and `Best`
//!   (longest in bucket) flavors.
//! - [`bitstream`]: MSB-first bit-level I/O over any `Read`/`Write`.
//! - [`codec`]: the stream format — a 6-byte header, the first block raw,
//!   then literal/match tokens — with `encode_stream`/`decode_stream` and a
//!   tokenizer for the fixed-window variant that emits (position, length,
//!   breaking symbol) triples.
//! - [`bench`]: corpus measurement (compression ratio, encode time) and
//!   closed-form memory models for comparing this index against the usual
//!   binary-tree, suffix-tree, and hash-chain match finders.
//!
//! Quick start:
//!
//! ```
//! use salz::{decode_stream, encode_stream, MatchPolicy, WindowConfig};
//!
//! let input = b"how much wood would a woodchuck chuck";
//! let config = WindowConfig::new(1 << 12, 1 << 8).unwrap();
//! let mut packed = Vec::new();
//! encode_stream(&input[..], config, MatchPolicy::Best, 1, &mut packed).unwrap();
//! let mut restored = Vec::new();
//! decode_stream(&packed[..], &mut restored).unwrap();
//! assert_eq!(restored, input);
//! ```

pub mod bench;
pub mod bitstream;
pub mod codec;
pub mod sliding_index;
pub mod suffix_array;

pub use bench::{
    memory_bt, memory_gzip, memory_lzma, memory_sa, memory_st, run_benchmark, BenchError,
    BenchReport, BenchResult, ConfigSummary, LzmaMatchFinder, SkippedFile, BENCH_MIN_MATCH,
};
pub use bitstream::{BitError, BitReader, BitWriter};
pub use codec::{
    decode_stream, encode_stream, tokenize_lz77, CodecError, DecodeStats, EncodeStats, Lz77Token,
    LzssToken, StreamHeader,
};
pub use sliding_index::{IndexError, MatchPolicy, MatchResult, SlidingIndex, WindowConfig};
pub use suffix_array::{
    build_suffix_array, build_suffix_array_naive, verify_suffix_array, SuffixArray,
    SuffixArrayError,
};
