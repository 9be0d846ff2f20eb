//! MSB-first bit-packed I/O.
//!
//! [`BitWriter`] packs fields of up to 32 bits into bytes, most significant
//! bit first; [`BitReader`] mirrors it exactly. The final partial byte of a
//! stream is zero-padded by [`BitWriter::flush`], and a reader simply never
//! consumes the pad. Width 0 is accepted as a no-op so callers can emit
//! degenerate zero-width fields without special-casing.

use std::io::{self, Read, Write};

use thiserror::Error;

/// Errors raised by [`BitWriter`] and [`BitReader`].
#[derive(Debug, Error)]
pub enum BitError {
    /// Requested field width above the 32-bit ceiling.
    #[error("bit field width {0} exceeds 32")]
    WidthTooLarge(u32),
    /// Value has set bits above the requested width.
    #[error("value {value:#x} does not fit in {width} bits")]
    ValueTooWide { value: u32, width: u32 },
    /// The byte source ended in the middle of a field.
    #[error("bit source exhausted mid-field")]
    UnexpectedEof,
    /// Underlying byte I/O failed.
    #[error("bit stream I/O: {0}")]
    Io(#[from] io::Error),
}

/// Packs bit fields into a byte sink, most significant bit first.
pub struct BitWriter<W: Write> {
    sink: W,
    /// Bits accumulated toward the next output byte, right-aligned.
    pending: u8,
    /// Number of valid bits in `pending` (0..=7 between calls).
    bit_count: u32,
    bytes_written: u64,
}

impl<W: Write> BitWriter<W> {
    pub fn new(sink: W) -> Self {
        BitWriter { sink, pending: 0, bit_count: 0, bytes_written: 0 }
    }

    /// Appends the low `width` bits of `value`, most significant first.
    ///
    /// `width` may be 0..=32; a zero width writes nothing (and `value` must
    /// then be 0 like any other out-of-range value would be).
    pub fn write_bits(&mut self, value: u32, width: u32) -> Result<(), BitError> {
        if width > 32 {
            return Err(BitError::WidthTooLarge(width));
        }
        if width < 32 && value >> width != 0 {
            return Err(BitError::ValueTooWide { value, width });
        }
        let mut left = width;
        while left > 0 {
            let take = (8 - self.bit_count).min(left);
            left -= take;
            let chunk = ((value >> left) & ((1 << take) - 1)) as u8;
            self.pending = if take == 8 { chunk } else { (self.pending << take) | chunk };
            self.bit_count += take;
            if self.bit_count == 8 {
                self.sink.write_all(&[self.pending])?;
                self.bytes_written += 1;
                self.pending = 0;
                self.bit_count = 0;
            }
        }
        Ok(())
    }

    /// Flushes any partial byte (zero-padding its low bits) and the sink.
    pub fn flush(&mut self) -> Result<(), BitError> {
        if self.bit_count > 0 {
            let byte = self.pending << (8 - self.bit_count);
            self.sink.write_all(&[byte])?;
            self.bytes_written += 1;
            self.pending = 0;
            self.bit_count = 0;
        }
        self.sink.flush()?;
        Ok(())
    }

    /// Whole bytes emitted so far (the partial byte counts only after flush).
    pub fn bytes_written(&self) -> u64 {
        self.bytes_written
    }
}

/// Reads MSB-first bit fields produced by [`BitWriter`].
pub struct BitReader<R: Read> {
    source: R,
    /// Byte currently being consumed.
    current: u8,
    /// Unread bits remaining in `current`.
    bits_left: u32,
}

impl<R: Read> BitReader<R> {
    pub fn new(source: R) -> Self {
        BitReader { source, current: 0, bits_left: 0 }
    }

    /// Consumes exactly `width` bits and returns them right-aligned.
    ///
    /// Running out of input mid-field yields [`BitError::UnexpectedEof`];
    /// a zero width consumes nothing and returns 0.
    pub fn read_bits(&mut self, width: u32) -> Result<u32, BitError> {
        if width > 32 {
            return Err(BitError::WidthTooLarge(width));
        }
        let mut out: u32 = 0;
        let mut need = width;
        while need > 0 {
            if self.bits_left == 0 {
                let mut byte = [0u8; 1];
                self.source.read_exact(&mut byte).map_err(|e| {
                    if e.kind() == io::ErrorKind::UnexpectedEof {
                        BitError::UnexpectedEof
                    } else {
                        BitError::Io(e)
                    }
                })?;
                self.current = byte[0];
                self.bits_left = 8;
            }
            let take = self.bits_left.min(need);
            let chunk = u32::from(self.current >> (self.bits_left - take)) & ((1 << take) - 1);
            out = (out << take) | chunk;
            self.bits_left -= take;
            need -= take;
        }
        Ok(out)
    }
}
