//! LZSS stream encoder/decoder and an in-memory LZ77 tokenizer.
//!
//! Wire format, bit-exact:
//!
//! ```text
//! [pos_bits:8][len_bits:8][file_size:32 LE]   -- 6-byte header
//! raw copy of the first min(2^len_bits, file_size) input bytes
//! token bitstream, MSB-first, zero-padded to a byte at the end:
//!   literal = 0 + 8-bit symbol                      (9 bits)
//!   match   = 1 + pos_bits-bit position             (1 + pos_bits + len_bits)
//!               + len_bits-bit (length - 1)
//! ```
//!
//! `pos_bits`/`len_bits` are the log2 of the dictionary and look-ahead block
//! sizes; a match position is the 0-based byte offset into the dictionary
//! window, and lengths run 1..=2^len_bits (stored biased by one, so a match
//! can cover a whole block). Both sides keep the dictionary block-synchronized:
//! a block enters the window only after it is fully encoded or decoded, so the
//! decoder needs no suffix structures at all.
//!
//! The LZ77 tokenizer shares the match finder but emits in-memory
//! (position, length, breaking-symbol) triples — each token covers `len`
//! matched bytes plus one literal — and defines no wire format.

use std::io::{Read, Write};
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::bitstream::{BitError, BitReader, BitWriter};
use crate::sliding_index::{MatchPolicy, SlidingIndex, WindowConfig};

/// The 6-byte stream preamble.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamHeader {
    /// log2 of the dictionary window size; position fields use this width.
    pub pos_bits: u8,
    /// log2 of the look-ahead block size; length fields use this width.
    pub len_bits: u8,
    /// Total decoded byte count.
    pub file_size: u32,
}

impl StreamHeader {
    /// Wire validity: positions at most 32 bits and length fields no wider
    /// than position fields. Writers additionally require `len_bits >= 1`
    /// (a zero-width length field cannot be produced by valid window
    /// geometry, though the decoder tolerates it).
    fn validate(&self) -> Result<(), CodecError> {
        if self.pos_bits > 32 {
            return Err(CodecError::MalformedHeader(format!(
                "position width {} exceeds 32 bits",
                self.pos_bits
            )));
        }
        if self.len_bits > self.pos_bits {
            return Err(CodecError::MalformedHeader(format!(
                "length width {} exceeds position width {}",
                self.len_bits, self.pos_bits
            )));
        }
        Ok(())
    }
}

/// One LZSS token, prior to bit-packing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LzssToken {
    /// A symbol emitted verbatim: flag bit 0 + 8 bits.
    Literal(u8),
    /// A back-reference: flag bit 1 + position + biased length.
    Match { pos: u32, len: u32 },
}

impl LzssToken {
    /// Exact wire cost of this token under the given field widths.
    pub fn wire_bits(&self, pos_bits: u32, len_bits: u32) -> u32 {
        match self {
            LzssToken::Literal(_) => 9,
            LzssToken::Match { .. } => 1 + pos_bits + len_bits,
        }
    }
}

/// One LZ77 triple: `len` bytes copied from dictionary offset `pos`, then
/// the breaking symbol `sym`. The no-match form is `(0, 0, sym)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Lz77Token {
    pub pos: u32,
    pub len: u32,
    pub sym: u8,
}

/// Errors from encoding or decoding a stream.
#[derive(Debug, Error)]
pub enum CodecError {
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("input of {0} bytes exceeds the 32-bit size field")]
    InputTooLarge(u64),
    #[error("window geometry unusable for streams: {0}")]
    UnsupportedConfig(String),
    #[error("min_match must be at least 1")]
    BadMinMatch,
    #[error("corrupt stream at token {ordinal}: {reason}")]
    Corrupt { ordinal: u64, reason: String },
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<BitError> for CodecError {
    fn from(e: BitError) -> Self {
        match e {
            BitError::Io(io) => CodecError::Io(io),
            // Width and range violations cannot arise from the fixed field
            // layout; surface them as invalid data rather than panicking.
            other => CodecError::Io(std::io::Error::new(
                std::io::ErrorKind::InvalidData,
                other.to_string(),
            )),
        }
    }
}

/// Encoding effort and outcome counters.
#[derive(Debug, Clone, Copy)]
pub struct EncodeStats {
    pub input_bytes: u64,
    /// Total stream bytes: header + raw block + padded token bits.
    pub output_bytes: u64,
    /// Bytes copied verbatim before any token: min(block size, input size).
    pub raw_bytes: u64,
    pub literal_tokens: u64,
    pub match_tokens: u64,
    /// Pure encode time: the clock starts after the input is in memory.
    pub elapsed: Duration,
}

/// Decoding outcome counters.
#[derive(Debug, Clone, Copy)]
pub struct DecodeStats {
    pub output_bytes: u64,
    pub raw_bytes: u64,
    pub literal_tokens: u64,
    pub match_tokens: u64,
    pub elapsed: Duration,
}

/// Writes the 6-byte header. Requires `0 < len_bits <= pos_bits <= 32`.
pub fn write_header<W: Write>(
    w: &mut BitWriter<W>,
    header: StreamHeader,
) -> Result<(), CodecError> {
    header.validate()?;
    if header.len_bits == 0 {
        return Err(CodecError::MalformedHeader("length width must be at least 1".into()));
    }
    w.write_bits(u32::from(header.pos_bits), 8)?;
    w.write_bits(u32::from(header.len_bits), 8)?;
    // The size field is little-endian on the wire, so it goes out low byte
    // first rather than as one MSB-first 32-bit field.
    for byte in header.file_size.to_le_bytes() {
        w.write_bits(u32::from(byte), 8)?;
    }
    Ok(())
}

/// Reads and validates the 6-byte header. A zero `len_bits` is accepted
/// (length fields then occupy no bits and every match has length 1).
pub fn read_header<R: Read>(r: &mut BitReader<R>) -> Result<StreamHeader, CodecError> {
    let mut field = |width: u32| {
        r.read_bits(width).map_err(|e| match e {
            BitError::UnexpectedEof => {
                CodecError::MalformedHeader("stream ends inside the 6-byte header".into())
            }
            BitError::Io(io) => CodecError::Io(io),
            other => CodecError::MalformedHeader(other.to_string()),
        })
    };
    let pos_bits = field(8)? as u8;
    let len_bits = field(8)? as u8;
    let mut size_bytes = [0u8; 4];
    for byte in &mut size_bytes {
        *byte = field(8)? as u8;
    }
    let file_size = u32::from_le_bytes(size_bytes);
    let header = StreamHeader { pos_bits, len_bits, file_size };
    header.validate()?;
    Ok(header)
}

/// Compresses `input` into the LZSS stream format.
///
/// The whole input is buffered first (the header carries its 32-bit size), so
/// `EncodeStats::elapsed` measures encoding only. A match is emitted when one
/// exists and is at least `min_match` bytes (1 = always prefer matches);
/// shorter extensions fall back to literals. Identical input, configuration,
/// policy, and `min_match` produce bit-identical output.
pub fn encode_stream<R: Read, W: Write>(
    mut input: R,
    config: WindowConfig,
    policy: MatchPolicy,
    min_match: u32,
    out: W,
) -> Result<EncodeStats, CodecError> {
    if min_match == 0 {
        return Err(CodecError::BadMinMatch);
    }
    if config.len_bits() == 0 {
        return Err(CodecError::UnsupportedConfig(
            "a one-byte look-ahead block cannot be framed (the header requires a length width of at least 1)"
                .into(),
        ));
    }
    let mut data = Vec::new();
    input.read_to_end(&mut data)?;
    let file_size =
        u32::try_from(data.len()).map_err(|_| CodecError::InputTooLarge(data.len() as u64))?;

    let start = Instant::now();
    let lab = config.lab_len();
    let pos_bits = config.pos_bits();
    let len_bits = config.len_bits();

    let mut writer = BitWriter::new(out);
    write_header(
        &mut writer,
        StreamHeader { pos_bits: pos_bits as u8, len_bits: len_bits as u8, file_size },
    )?;

    let raw = lab.min(data.len());
    for &byte in &data[..raw] {
        writer.write_bits(u32::from(byte), 8)?;
    }

    let mut index = SlidingIndex::new(config);
    if raw < data.len() {
        index.slide_in(&data[..raw]).expect("raw block fits the look-ahead size");
        index.rebuild();
    }

    let mut literal_tokens = 0u64;
    let mut match_tokens = 0u64;
    let mut tokens = Vec::new();
    let mut blocks = data[raw..].chunks(lab).peekable();
    while let Some(block) = blocks.next() {
        tokens.clear();
        tokenize_block_lzss(&index, block, policy, min_match, &mut tokens);
        for token in &tokens {
            match *token {
                LzssToken::Literal(sym) => {
                    writer.write_bits(0, 1)?;
                    writer.write_bits(u32::from(sym), 8)?;
                    literal_tokens += 1;
                }
                LzssToken::Match { pos, len } => {
                    writer.write_bits(1, 1)?;
                    writer.write_bits(pos, pos_bits)?;
                    writer.write_bits(len - 1, len_bits)?;
                    match_tokens += 1;
                }
            }
        }
        // The block joins the dictionary only now, and only if anything
        // still follows; the final slide would never be queried.
        if blocks.peek().is_some() {
            let was_full = index.fill() == config.dict_len();
            index.slide_in(block).expect("encoder blocks fit the look-ahead size");
            if was_full {
                index.update(block).expect("window was full before the slide");
            } else {
                index.rebuild();
            }
        }
    }
    writer.flush()?;

    Ok(EncodeStats {
        input_bytes: data.len() as u64,
        output_bytes: writer.bytes_written(),
        raw_bytes: raw as u64,
        literal_tokens,
        match_tokens,
        elapsed: start.elapsed(),
    })
}

/// Tokenizes one block against the current dictionary. Every input byte is
/// covered exactly once: matches advance by their length, literals by one.
fn tokenize_block_lzss(
    index: &SlidingIndex,
    block: &[u8],
    policy: MatchPolicy,
    min_match: u32,
    out: &mut Vec<LzssToken>,
) {
    let mut i = 0;
    while i < block.len() {
        let found = index.longest_match(block, i, policy).expect("offset stays within the block");
        match found {
            Some(m) if m.len >= min_match => {
                out.push(LzssToken::Match { pos: m.pos, len: m.len });
                i += m.len as usize;
            }
            _ => {
                out.push(LzssToken::Literal(block[i]));
                i += 1;
            }
        }
    }
    debug_assert_eq!(i, block.len());
}

/// Copies one match token's bytes into the pending block buffer.
fn copy_match(dict: &[u8], pending: &mut Vec<u8>, pos: usize, len: usize) {
    pending.extend_from_slice(&dict[pos..pos + len]);
}

/// Reads one token field, converting a premature end of input into a
/// corruption report that names the failing token.
fn read_token_field<R: Read>(
    r: &mut BitReader<R>,
    width: u32,
    ordinal: u64,
    context: &str,
) -> Result<u32, CodecError> {
    r.read_bits(width).map_err(|e| match e {
        BitError::UnexpectedEof => {
            CodecError::Corrupt { ordinal, reason: format!("truncated token stream ({context})") }
        }
        other => CodecError::from(other),
    })
}

/// Appends a completed block to the decoder's dictionary window, evicting
/// the oldest bytes once `cap` is reached.
fn slide_window(dict: &mut Vec<u8>, cap: usize, block: &[u8]) {
    debug_assert!(block.len() <= cap);
    if dict.len() + block.len() > cap {
        let drop = dict.len() + block.len() - cap;
        dict.drain(..drop);
    }
    dict.extend_from_slice(block);
}

/// Decompresses an LZSS stream, reproducing the original bytes exactly.
///
/// The dictionary is reconstructed with the encoder's block synchronization:
/// decoded symbols accumulate in a block buffer that slides into the window
/// each time a full block completes (or at end of stream). Decoding stops
/// after `file_size` output bytes; any token that would contradict the
/// declared geometry is reported as corruption with its 0-based ordinal.
pub fn decode_stream<R: Read, W: Write>(input: R, mut out: W) -> Result<DecodeStats, CodecError> {
    let start = Instant::now();
    let mut reader = BitReader::new(input);
    let header = read_header(&mut reader)?;
    let pos_width = u32::from(header.pos_bits);
    let len_width = u32::from(header.len_bits);
    let dict_cap = 1u64 << header.pos_bits;
    let block_cap = 1u64 << header.len_bits;
    let file_size = u64::from(header.file_size);

    // Raw block: copied verbatim and seeding the dictionary.
    let raw = block_cap.min(file_size) as usize;
    let mut pending = Vec::with_capacity(raw);
    for _ in 0..raw {
        let byte = reader.read_bits(8).map_err(|e| match e {
            BitError::UnexpectedEof => CodecError::Corrupt {
                ordinal: 0,
                reason: "stream ends inside the raw first block".into(),
            },
            other => CodecError::from(other),
        })?;
        pending.push(byte as u8);
    }
    out.write_all(&pending)?;
    let mut dict: Vec<u8> = Vec::new();
    // dict_cap fits usize on 64-bit targets; the cast is lossless there.
    slide_window(&mut dict, dict_cap as usize, &pending);
    pending.clear();

    let mut emitted = raw as u64;
    let mut literal_tokens = 0u64;
    let mut match_tokens = 0u64;
    let mut ordinal = 0u64;
    while emitted + (pending.len() as u64) < file_size {
        let flag = read_token_field(&mut reader, 1, ordinal, "flag bit")?;
        if flag == 0 {
            let sym = read_token_field(&mut reader, 8, ordinal, "literal symbol")?;
            pending.push(sym as u8);
            literal_tokens += 1;
        } else {
            let pos = read_token_field(&mut reader, pos_width, ordinal, "match position")? as u64;
            let len =
                u64::from(read_token_field(&mut reader, len_width, ordinal, "match length")?) + 1;
            let fill = dict.len() as u64;
            if pos >= fill {
                return Err(CodecError::Corrupt {
                    ordinal,
                    reason: format!("match position {pos} is beyond the dictionary fill {fill}"),
                });
            }
            if pos + len > fill {
                return Err(CodecError::Corrupt {
                    ordinal,
                    reason: format!(
                        "match of {len} bytes at position {pos} overruns the dictionary fill {fill}"
                    ),
                });
            }
            if pending.len() as u64 + len > block_cap {
                return Err(CodecError::Corrupt {
                    ordinal,
                    reason: format!("match of {len} bytes crosses a block boundary"),
                });
            }
            if emitted + pending.len() as u64 + len > file_size {
                return Err(CodecError::Corrupt {
                    ordinal,
                    reason: format!(
                        "match of {len} bytes would exceed the declared file size {file_size}"
                    ),
                });
            }
            copy_match(&dict, &mut pending, pos as usize, len as usize);
            match_tokens += 1;
        }
        ordinal += 1;
        if pending.len() as u64 == block_cap || emitted + pending.len() as u64 == file_size {
            out.write_all(&pending)?;
            emitted += pending.len() as u64;
            slide_window(&mut dict, dict_cap as usize, &pending);
            pending.clear();
        }
    }

    Ok(DecodeStats {
        output_bytes: emitted,
        raw_bytes: raw as u64,
        literal_tokens,
        match_tokens,
        elapsed: start.elapsed(),
    })
}

/// Decomposes `input` into LZ77 triples using the same sliding match finder
/// as the stream encoder.
///
/// Each token covers `len + 1` input bytes: the matched dictionary prefix
/// plus the breaking symbol that follows it. Matches are capped one byte
/// short of the block end so the breaking symbol always exists; when the
/// leading byte has no dictionary occurrence the token is `(0, 0, sym)`.
/// There is no wire format for these triples — the stream format is
/// LZSS-only — so the decomposition is returned in memory.
pub fn tokenize_lz77<R: Read>(
    mut input: R,
    config: WindowConfig,
    policy: MatchPolicy,
) -> Result<Vec<Lz77Token>, CodecError> {
    let mut data = Vec::new();
    input.read_to_end(&mut data)?;
    if u32::try_from(data.len()).is_err() {
        return Err(CodecError::InputTooLarge(data.len() as u64));
    }

    let mut index = SlidingIndex::new(config);
    let mut tokens = Vec::new();
    let mut blocks = data.chunks(config.lab_len()).peekable();
    while let Some(block) = blocks.next() {
        tokenize_block_lz77(&index, block, policy, &mut tokens);
        if blocks.peek().is_some() {
            let was_full = index.fill() == config.dict_len();
            index.slide_in(block).expect("blocks fit the look-ahead size");
            if was_full {
                index.update(block).expect("window was full before the slide");
            } else {
                index.rebuild();
            }
        }
    }
    Ok(tokens)
}

/// LZ77 form of one block: every token consumes its match length plus one
/// breaking symbol, so the block length equals Σ(len + 1).
fn tokenize_block_lz77(
    index: &SlidingIndex,
    block: &[u8],
    policy: MatchPolicy,
    out: &mut Vec<Lz77Token>,
) {
    let mut i = 0;
    while i < block.len() {
        // Reserve one byte for the breaking symbol.
        let allowed = block.len() - i - 1;
        let found = if allowed > 0 {
            index.longest_match(block, i, policy).expect("offset stays within the block")
        } else {
            None
        };
        match found {
            Some(m) => {
                let len = (m.len as usize).min(allowed);
                out.push(Lz77Token { pos: m.pos, len: len as u32, sym: block[i + len] });
                i += len + 1;
            }
            None => {
                out.push(Lz77Token { pos: 0, len: 0, sym: block[i] });
                i += 1;
            }
        }
    }
    debug_assert_eq!(i, block.len());
}
