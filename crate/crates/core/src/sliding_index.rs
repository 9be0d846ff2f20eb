//! Sliding-window dictionary index: a suffix array plus a first-symbol table.
//!
//! The index owns the dictionary window and two suffix-array buffers. The
//! active buffer orders the window's suffixes; its sibling receives the merge
//! output when a block slides in, then the roles swap. An update keeps the
//! surviving suffixes in their previous relative order (their tails just grew
//! into the new block, so the order can drift slightly from true lexicographic
//! order) and merges the block's own suffixes in at ranks found by binary
//! search. That staleness is deliberate: every match the index reports is
//! validated against actual dictionary bytes, so only match *optimality* can
//! degrade between full rebuilds — never correctness.
//!
//! A 256-entry table (`left_index`) maps each byte value to the first
//! suffix-array slot whose suffix starts with that byte, which narrows match
//! searches to one symbol bucket in O(1).

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::suffix_array::build_suffix_array;

/// Below this many candidate slots, `best` match search stops bisecting and
/// scans the remaining interval directly.
const NARROW_CUTOFF: usize = 8;

/// Errors from window configuration and index operations.
#[derive(Debug, Error)]
pub enum IndexError {
    /// Window geometry must be power-of-two sized with lab <= dict.
    #[error("window sizes must be powers of two with 1 <= lab <= dict <= 2^32 (got dict={dict_len}, lab={lab_len})")]
    BadConfig { dict_len: usize, lab_len: usize },
    /// Blocks can never exceed the configured look-ahead size.
    #[error("block of {got} bytes exceeds the configured lab size {max}")]
    BlockTooLarge { got: usize, max: usize },
    /// Sliding in nothing is a caller bug.
    #[error("cannot slide in an empty block")]
    EmptyBlock,
    /// Incremental update is only defined once the dictionary has filled.
    #[error(
        "incremental update requires a full dictionary before the slide (had {fill} of {dict_len})"
    )]
    UpdateWhileFilling { fill: usize, dict_len: usize },
    /// Match queries must start inside the look-ahead slice.
    #[error("lab offset {offset} out of range for a block of {len} bytes")]
    OffsetOutOfRange { offset: usize, len: usize },
}

/// Window geometry: dictionary size and look-ahead block size, both powers
/// of two, from which the token field widths follow directly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowConfig {
    dict_len: usize,
    lab_len: usize,
}

impl WindowConfig {
    pub fn new(dict_len: usize, lab_len: usize) -> Result<Self, IndexError> {
        let ok = dict_len.is_power_of_two()
            && lab_len.is_power_of_two()
            && lab_len <= dict_len
            && (dict_len as u64) <= 1 << 32;
        if !ok {
            return Err(IndexError::BadConfig { dict_len, lab_len });
        }
        Ok(WindowConfig { dict_len, lab_len })
    }

    /// Dictionary window capacity in bytes.
    pub fn dict_len(&self) -> usize {
        self.dict_len
    }

    /// Look-ahead block size in bytes.
    pub fn lab_len(&self) -> usize {
        self.lab_len
    }

    /// Bits needed for a dictionary position field: log2(dict_len).
    pub fn pos_bits(&self) -> u32 {
        self.dict_len.trailing_zeros()
    }

    /// Bits needed for a match length field: log2(lab_len).
    pub fn len_bits(&self) -> u32 {
        self.lab_len.trailing_zeros()
    }
}

/// How much work `longest_match` invests per query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchPolicy {
    /// Take the first suffix in the symbol's bucket and extend it.
    Fast,
    /// Search the whole bucket for the longest extension.
    Best,
}

impl fmt::Display for MatchPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MatchPolicy::Fast => "fast",
            MatchPolicy::Best => "best",
        })
    }
}

impl FromStr for MatchPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fast" => Ok(MatchPolicy::Fast),
            "best" => Ok(MatchPolicy::Best),
            other => Err(format!("unknown match policy {other:?} (expected \"fast\" or \"best\")")),
        }
    }
}

/// A verified dictionary match: `dictionary[pos..pos + len]` equals the
/// queried look-ahead prefix, with `len >= 1`. Matches never extend past the
/// dictionary end into the look-ahead.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatchResult {
    /// 0-based byte offset into the current dictionary window.
    pub pos: u32,
    /// Matched byte count.
    pub len: u32,
}

/// Sliding dictionary window with an incrementally maintained suffix array.
pub struct SlidingIndex {
    config: WindowConfig,
    /// Window bytes; only `dict[..fill]` is meaningful.
    dict: Vec<u8>,
    fill: usize,
    /// Fill observed before the most recent `slide_in`, used to police the
    /// update precondition (the window must have been full already).
    prev_fill: usize,
    sa_a: Vec<u32>,
    sa_b: Vec<u32>,
    active_is_a: bool,
    /// First suffix-array slot per leading byte value, or -1 when absent.
    left_index: [i32; 256],
    /// Scratch: suffix order of the newest block.
    lab_sa: Vec<u32>,
    /// Scratch: merge destination slot for each of the block's suffixes.
    inserts: Vec<u32>,
}

impl SlidingIndex {
    /// Allocates all buffers up front (two dict-sized suffix arrays, the
    /// window itself, and two lab-sized scratch arrays); nothing grows later.
    pub fn new(config: WindowConfig) -> Self {
        SlidingIndex {
            config,
            dict: vec![0; config.dict_len],
            fill: 0,
            prev_fill: 0,
            sa_a: vec![0; config.dict_len],
            sa_b: vec![0; config.dict_len],
            active_is_a: true,
            left_index: [-1; 256],
            lab_sa: vec![0; config.lab_len],
            inserts: vec![0; config.lab_len],
        }
    }

    pub fn config(&self) -> WindowConfig {
        self.config
    }

    /// Valid bytes currently in the window.
    pub fn fill(&self) -> usize {
        self.fill
    }

    /// Current window contents.
    pub fn dictionary(&self) -> &[u8] {
        &self.dict[..self.fill]
    }

    /// The active suffix order (exact after `rebuild`, possibly slightly
    /// stale after `update`s).
    pub fn active_order(&self) -> &[u32] {
        let buf = if self.active_is_a { &self.sa_a } else { &self.sa_b };
        &buf[..self.fill]
    }

    /// First suffix-array slot per leading byte, -1 where the byte does not
    /// occur in the window.
    pub fn left_index(&self) -> &[i32; 256] {
        &self.left_index
    }

    /// Appends `block` to the window, dropping the oldest bytes when the
    /// window would overflow. Does not touch the suffix buffers: callers
    /// follow up with `rebuild` or `update`.
    pub fn slide_in(&mut self, block: &[u8]) -> Result<(), IndexError> {
        if block.is_empty() {
            return Err(IndexError::EmptyBlock);
        }
        if block.len() > self.config.lab_len {
            return Err(IndexError::BlockTooLarge { got: block.len(), max: self.config.lab_len });
        }
        self.prev_fill = self.fill;
        let m = self.config.dict_len;
        if self.fill + block.len() > m {
            let drop = self.fill + block.len() - m;
            self.dict.copy_within(drop..self.fill, 0);
            self.fill -= drop;
        }
        self.dict[self.fill..self.fill + block.len()].copy_from_slice(block);
        self.fill += block.len();
        Ok(())
    }

    /// Recomputes the active buffer from scratch (exactly sorted) and
    /// refreshes the first-symbol table. Used while the window is filling
    /// and whenever exactness matters more than speed.
    pub fn rebuild(&mut self) {
        let sa = build_suffix_array(&self.dict[..self.fill]);
        let active = if self.active_is_a { &mut self.sa_a } else { &mut self.sa_b };
        active[..sa.len()].copy_from_slice(sa.order());
        self.refresh_left_index();
    }

    /// Incremental update after `slide_in(slid_block)` on a window that was
    /// already full: suffixes that slid out are dropped, survivors keep their
    /// relative order at shifted positions, and the block's own suffixes are
    /// merged in at ranks found by binary search against current window
    /// bytes. Runs in O(dict + lab·log(dict)·cmp) without reallocating.
    pub fn update(&mut self, slid_block: &[u8]) -> Result<(), IndexError> {
        let m = self.config.dict_len;
        let b = slid_block.len();
        if b == 0 {
            return Err(IndexError::EmptyBlock);
        }
        if b > self.config.lab_len {
            return Err(IndexError::BlockTooLarge { got: b, max: self.config.lab_len });
        }
        if self.prev_fill < m {
            return Err(IndexError::UpdateWhileFilling { fill: self.prev_fill, dict_len: m });
        }
        debug_assert_eq!(self.fill, m);
        debug_assert_eq!(&self.dict[m - b..], slid_block, "update must describe the newest block");

        // The block sits at the very end of the window, so its suffixes are
        // full window suffixes and their order is exact by construction.
        let block_sa = build_suffix_array(slid_block);
        self.lab_sa[..b].copy_from_slice(block_sa.order());

        let SlidingIndex { dict, sa_a, sa_b, lab_sa, inserts, active_is_a, .. } = self;
        let (src, dst): (&[u32], &mut [u32]) =
            if *active_is_a { (&sa_a[..m], &mut sa_b[..m]) } else { (&sa_b[..m], &mut sa_a[..m]) };

        // Pack survivors into the destination, order preserved, positions
        // shifted down by the block length.
        let mut kept = 0;
        for &p in src {
            if p as usize >= b {
                dst[kept] = p - b as u32;
                kept += 1;
            }
        }
        debug_assert_eq!(kept, m - b);

        // Rank each block suffix among the survivors. Comparisons read the
        // *current* window bytes (survivor tails included); a suffix that is
        // a prefix of another sorts first, which slice comparison gives us.
        // Earlier block suffixes occupy earlier slots and push later ones
        // right, hence the `+ j`.
        for j in 0..b {
            let pos = (m - b + lab_sa[j] as usize) as u32;
            let suffix = &dict[pos as usize..m];
            let rank = dst[..kept].partition_point(|&v| dict[v as usize..m] < *suffix);
            inserts[j] = (rank + j) as u32;
        }

        // Merge in place from the right: the insert slots are strictly
        // increasing, so survivors shift right without being overwritten
        // before they are read. Once every block suffix is placed, the
        // remaining survivors already sit in their final slots.
        let mut survivor = kept;
        let mut pending = b;
        for slot in (0..m).rev() {
            if pending == 0 {
                break;
            }
            if inserts[pending - 1] as usize == slot {
                pending -= 1;
                dst[slot] = (m - b) as u32 + lab_sa[pending];
            } else {
                survivor -= 1;
                dst[slot] = dst[survivor];
            }
        }
        debug_assert_eq!(pending, 0);

        *active_is_a = !*active_is_a;
        self.refresh_left_index();
        Ok(())
    }

    /// Rescans the active buffer and records, per byte value, the first slot
    /// whose suffix starts with it (-1 when the byte is absent).
    pub fn refresh_left_index(&mut self) {
        self.left_index = [-1; 256];
        let buf = if self.active_is_a { &self.sa_a } else { &self.sa_b };
        for i in (0..self.fill).rev() {
            self.left_index[self.dict[buf[i] as usize] as usize] = i as i32;
        }
    }

    /// The slot interval `[left, right]` covering suffixes that start with
    /// `sym`, or `None` when the window does not contain that byte. The right
    /// edge is one slot before the next occupied byte bucket (the buffer
    /// stays bucket-sorted by first byte even when updates leave deeper
    /// positions stale).
    pub fn symbol_range(&self, sym: u8) -> Option<(usize, usize)> {
        let left = self.left_index[sym as usize];
        if left < 0 {
            return None;
        }
        let mut right = self.fill - 1;
        for next in (sym as usize + 1)..256 {
            let slot = self.left_index[next];
            if slot >= 0 {
                debug_assert!(slot > left);
                right = slot as usize - 1;
                break;
            }
        }
        Some((left as usize, right))
    }

    /// Longest verified match between `lab[offset..]` and the window.
    ///
    /// Returns `None` exactly when `lab[offset]` does not occur in the
    /// window; otherwise the result matches at least one byte. `Best`
    /// bisects the symbol bucket one look-ahead symbol at a time and scans
    /// the last few slots directly; `Fast` extends only the bucket's first
    /// slot. Either way the returned length is established by direct byte
    /// comparison, so a stale suffix order can cost length but never yield
    /// a wrong match.
    pub fn longest_match(
        &self,
        lab: &[u8],
        offset: usize,
        policy: MatchPolicy,
    ) -> Result<Option<MatchResult>, IndexError> {
        if offset >= lab.len() {
            return Err(IndexError::OffsetOutOfRange { offset, len: lab.len() });
        }
        let Some((left, right)) = self.symbol_range(lab[offset]) else {
            return Ok(None);
        };
        let want = &lab[offset..];
        let dict = &self.dict[..self.fill];
        let order = self.active_order();
        let (pos, len) = match policy {
            MatchPolicy::Fast => {
                let pos = order[left] as usize;
                (pos, common_prefix(&dict[pos..], want))
            }
            MatchPolicy::Best => best_in_bucket(order, dict, want, left, right),
        };
        debug_assert!(len >= 1, "first-slot suffix must share the leading byte");
        debug_assert_eq!(&dict[pos..pos + len], &want[..len]);
        Ok(Some(MatchResult { pos: pos as u32, len: len as u32 }))
    }
}

/// `Best`-policy search over the symbol bucket `[left, right]`.
///
/// Maintains the candidate interval sharing `depth` look-ahead symbols; in an
/// exactly sorted buffer each narrowing step is a pair of bisections over the
/// suffixes' `depth`-th byte (suffixes too short to have one sort first).
/// The end result is re-measured against window bytes, and if a stale order
/// misled the search entirely, the bucket's first slot — guaranteed to share
/// the leading byte — serves as the fallback.
fn best_in_bucket(
    order: &[u32],
    dict: &[u8],
    want: &[u8],
    left: usize,
    right: usize,
) -> (usize, usize) {
    let mut lo = left;
    let mut hi = right;
    let mut depth = 1;
    let mut candidate = None;
    while hi - lo + 1 > NARROW_CUTOFF {
        if depth >= want.len() {
            // Look-ahead exhausted: everything here matches all of `want`
            // (in the sorted regime), and the leftmost slot wins ties.
            candidate = Some(order[lo] as usize);
            break;
        }
        let target = want[depth];
        // Key the interval by the byte each suffix has at `depth`; suffixes
        // that end before it rank below every byte value.
        let key = |p: &u32| -> i32 {
            let at = *p as usize + depth;
            if at < dict.len() {
                i32::from(dict[at])
            } else {
                -1
            }
        };
        let seg = &order[lo..=hi];
        let first = seg.partition_point(|p| key(p) < i32::from(target));
        let last = seg.partition_point(|p| key(p) <= i32::from(target));
        if first == last {
            // No suffix extends the match past `depth` symbols; the smallest
            // slot of the current interval already attains the maximum.
            candidate = Some(order[lo] as usize);
            break;
        }
        hi = lo + last - 1;
        lo += first;
        depth += 1;
    }

    let (mut pos, mut len) = match candidate {
        Some(pos) => (pos, common_prefix(&dict[pos..], want)),
        None => {
            // Small interval: measure every remaining candidate directly,
            // first slot winning ties.
            let mut best = (0, 0);
            for &p in &order[lo..=hi] {
                let l = common_prefix(&dict[p as usize..], want);
                if l > best.1 {
                    best = (p as usize, l);
                }
            }
            best
        }
    };
    if len == 0 {
        // Only reachable when updates left this bucket interior mis-sorted;
        // the bucket's first suffix always shares the leading byte.
        pos = order[left] as usize;
        len = common_prefix(&dict[pos..], want);
    }
    (pos, len)
}

/// Length of the longest common prefix of `a` and `b`, compared eight bytes
/// at a time.
fn common_prefix(a: &[u8], b: &[u8]) -> usize {
    let n = a.len().min(b.len());
    let mut i = 0;
    while i + 8 <= n {
        let x = u64::from_le_bytes(a[i..i + 8].try_into().unwrap());
        let y = u64::from_le_bytes(b[i..i + 8].try_into().unwrap());
        let diff = x ^ y;
        if diff != 0 {
            return i + (diff.trailing_zeros() / 8) as usize;
        }
        i += 8;
    }
    while i < n && a[i] == b[i] {
        i += 1;
    }
    i
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::suffix_array::{build_suffix_array_naive, verify_suffix_array};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cfg(m: usize, n: usize) -> WindowConfig {
        WindowConfig::new(m, n).unwrap()
    }

    /// Index pre-loaded with `text` and exactly rebuilt.
    fn loaded(m: usize, n: usize, text: &[u8]) -> SlidingIndex {
        let mut index = SlidingIndex::new(cfg(m, n));
        for chunk in text.chunks(n) {
            index.slide_in(chunk).unwrap();
        }
        index.rebuild();
        index
    }

    #[test]
    fn config_validation() {
        assert!(WindowConfig::new(16, 4).is_ok());
        assert!(WindowConfig::new(1, 1).is_ok());
        let c = cfg(2048, 1024);
        assert_eq!((c.pos_bits(), c.len_bits()), (11, 10));
        for (m, n) in [(16, 32), (15, 4), (16, 3), (0, 0), (16, 0)] {
            assert!(matches!(WindowConfig::new(m, n), Err(IndexError::BadConfig { .. })));
        }
    }

    #[test]
    fn new_index_is_empty() {
        let index = SlidingIndex::new(cfg(16, 4));
        assert_eq!(index.fill(), 0);
        assert!(index.dictionary().is_empty());
        assert!(index.left_index().iter().all(|&v| v == -1));
        assert_eq!(index.symbol_range(b'a'), None);
    }

    #[test]
    fn slide_in_appends_then_evicts_oldest() {
        let mut index = SlidingIndex::new(cfg(16, 4));
        for chunk in [&b"this"[..], b" is ", b"the ", b"file"] {
            index.slide_in(chunk).unwrap();
        }
        assert_eq!(index.dictionary(), b"this is the file");
        assert_eq!(index.fill(), 16);
        index.slide_in(b" the").unwrap();
        assert_eq!(index.dictionary(), b" is the file the");
        assert_eq!(index.fill(), 16);
    }

    #[test]
    fn slide_in_rejects_bad_blocks() {
        let mut index = SlidingIndex::new(cfg(16, 4));
        assert!(matches!(index.slide_in(b""), Err(IndexError::EmptyBlock)));
        assert!(matches!(index.slide_in(b"12345"), Err(IndexError::BlockTooLarge { .. })));
    }

    #[test]
    fn rebuild_matches_the_pinned_mississippi_order() {
        let index = loaded(16, 16, b"mississippi");
        assert_eq!(index.active_order(), &[10, 7, 4, 1, 0, 9, 8, 6, 3, 5, 2]);
    }

    #[test]
    fn left_index_records_first_bucket_slots() {
        let index = loaded(16, 16, b"mississippi");
        let li = index.left_index();
        assert_eq!(li[b'i' as usize], 0);
        assert_eq!(li[b'm' as usize], 4);
        assert_eq!(li[b'p' as usize], 5);
        assert_eq!(li[b's' as usize], 7);
        let occupied: Vec<usize> = (0..256).filter(|&c| li[c] >= 0).collect();
        assert_eq!(occupied, [b'i' as usize, b'm' as usize, b'p' as usize, b's' as usize]);
    }

    #[test]
    fn symbol_ranges_cover_their_buckets() {
        let index = loaded(16, 16, b"mississippi");
        assert_eq!(index.symbol_range(b's'), Some((7, 10)));
        assert_eq!(index.symbol_range(b'i'), Some((0, 3)));
        assert_eq!(index.symbol_range(b'm'), Some((4, 4)));
        assert_eq!(index.symbol_range(b'p'), Some((5, 6)));
        assert_eq!(index.symbol_range(b'b'), None);
    }

    #[test]
    fn longest_match_examples() {
        let index = loaded(16, 16, b"mississippi");
        let best = index.longest_match(b"issia", 0, MatchPolicy::Best).unwrap().unwrap();
        assert_eq!(best.len, 4);
        assert!(best.pos == 1 || best.pos == 4, "pos was {}", best.pos);
        let best = index.longest_match(b"bsia", 1, MatchPolicy::Best).unwrap().unwrap();
        assert_eq!(best.len, 2);
        assert!(best.pos == 3 || best.pos == 6, "pos was {}", best.pos);
        assert_eq!(index.longest_match(b"bsia", 0, MatchPolicy::Best).unwrap(), None);
        let fast = index.longest_match(b"issia", 0, MatchPolicy::Fast).unwrap().unwrap();
        assert!(fast.len >= 1);
        assert!(matches!(
            index.longest_match(b"issia", 5, MatchPolicy::Best),
            Err(IndexError::OffsetOutOfRange { .. })
        ));
    }

    #[test]
    fn matches_never_extend_past_the_dictionary_end() {
        // window "abcabc|abc..." — the candidate at the window end must stop
        // there rather than borrow look-ahead bytes.
        let index = loaded(8, 8, b"xyabcabc");
        let m = index.longest_match(b"abcabc", 0, MatchPolicy::Best).unwrap().unwrap();
        assert!(m.pos as usize + m.len as usize <= index.fill());
        assert_eq!(m.len, 6); // dict[2..8] == "abcabc"
        assert_eq!(m.pos, 2);
    }

    /// The published four-byte walk-through: window "this is the file",
    /// block " the". Survivors keep their order, the block's suffixes land
    /// at slots {2, 4, 8, 14}, and the result is the hand-derived merge.
    #[test]
    fn update_places_block_suffixes_at_derived_slots() {
        let mut index = loaded(16, 4, b"this is the file");
        let before: Vec<u32> = index.active_order().to_vec();
        index.slide_in(b" the").unwrap();
        index.update(b" the").unwrap();

        let after = index.active_order();
        let dict = index.dictionary();
        assert_eq!(dict, b" is the file the");

        // In-test oracle for the insertion slots: rank each block suffix
        // among the shifted survivors by direct comparison, then offset by
        // the number of block suffixes already placed.
        let survivors: Vec<u32> = before.iter().filter(|&&p| p >= 4).map(|&p| p - 4).collect();
        let block_order = build_suffix_array(b" the");
        let mut expected_slots = Vec::new();
        for (j, &bp) in block_order.order().iter().enumerate() {
            let pos = 12 + bp as usize;
            let rank = survivors.iter().filter(|&&v| dict[v as usize..] < dict[pos..]).count();
            expected_slots.push(rank + j);
        }
        assert_eq!(expected_slots, [2, 4, 8, 14]);

        let new_slots: Vec<usize> = (0..16).filter(|&i| after[i] >= 12).collect();
        assert_eq!(new_slots, expected_slots);
        assert_eq!(after, &[7, 0, 12, 3, 15, 11, 6, 8, 14, 5, 9, 1, 10, 2, 13, 4]);
    }

    #[test]
    fn update_of_a_full_window_block_equals_rebuild() {
        let mut a = loaded(8, 8, b"mississi");
        let mut b = loaded(8, 8, b"mississi");
        a.slide_in(b"ppirocks").unwrap();
        a.update(b"ppirocks").unwrap();
        b.slide_in(b"ppirocks").unwrap();
        b.rebuild();
        assert_eq!(a.active_order(), b.active_order());
        assert_eq!(a.left_index(), b.left_index());
    }

    #[test]
    fn update_requires_a_previously_full_window() {
        let mut index = loaded(16, 4, b"onlyeight---"); // fill 12 < 16
        index.slide_in(b"abcd").unwrap(); // now full, but was not before
        assert!(matches!(index.update(b"abcd"), Err(IndexError::UpdateWhileFilling { .. })));
    }

    #[test]
    fn update_preserves_survivor_order_and_block_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xD1C7);
        for round in 0..60 {
            let m = [64usize, 256, 1024][round % 3];
            let n = 1 << rng.gen_range(0..=m.trailing_zeros());
            let sigma = [2u16, 7, 256][round % 3];
            let mut index = SlidingIndex::new(cfg(m, n));
            let gen_block = |len: usize, rng: &mut ChaCha8Rng| -> Vec<u8> {
                (0..len).map(|_| (rng.gen_range(0..sigma) & 0xFF) as u8).collect()
            };
            while index.fill() < m {
                let block = gen_block(n.min(m - index.fill()), &mut rng);
                index.slide_in(&block).unwrap();
            }
            index.rebuild();
            for _ in 0..4 {
                let b = rng.gen_range(1..=n);
                let block = gen_block(b, &mut rng);
                let before: Vec<u32> = index.active_order().to_vec();
                index.slide_in(&block).unwrap();
                index.update(&block).unwrap();
                let after = index.active_order();

                // permutation of 0..m
                let mut sorted: Vec<u32> = after.to_vec();
                sorted.sort_unstable();
                assert!(sorted.iter().enumerate().all(|(i, &v)| v as usize == i));

                // survivors keep relative order
                let expected: Vec<u32> =
                    before.iter().filter(|&&p| p as usize >= b).map(|&p| p - b as u32).collect();
                let actual: Vec<u32> =
                    after.iter().copied().filter(|&p| (p as usize) < m - b).collect();
                assert_eq!(actual, expected);

                // block suffixes appear in the block's own suffix order
                let block_order = build_suffix_array(&block);
                let expected: Vec<u32> =
                    block_order.order().iter().map(|&p| (m - b) as u32 + p).collect();
                let actual: Vec<u32> =
                    after.iter().copied().filter(|&p| p as usize >= m - b).collect();
                assert_eq!(actual, expected);

                // left_index still describes the active buffer exactly
                let li = index.left_index();
                let dict = index.dictionary();
                for (c, &entry) in li.iter().enumerate() {
                    let first = after.iter().position(|&p| dict[p as usize] as usize == c);
                    match first {
                        Some(slot) => assert_eq!(entry, slot as i32),
                        None => assert_eq!(entry, -1),
                    }
                }
            }
        }
    }

    /// After a rebuild the order is exact, so best-policy lengths must agree
    /// with a brute-force scan over every dictionary position.
    #[test]
    fn best_matches_brute_force_after_rebuild() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xBE57);
        for round in 0..40 {
            let sigma = [2u16, 4, 16, 256][round % 4];
            let fill = rng.gen_range(1..=512);
            let text: Vec<u8> = (0..fill).map(|_| (rng.gen_range(0..sigma) & 0xFF) as u8).collect();
            let index = loaded(512, 64, &text);
            let lab: Vec<u8> = (0..rng.gen_range(1..=64))
                .map(|_| (rng.gen_range(0..sigma) & 0xFF) as u8)
                .collect();
            for i in 0..lab.len() {
                let brute = (0..text.len())
                    .map(|p| common_prefix(&text[p..], &lab[i..]))
                    .max()
                    .unwrap_or(0);
                match index.longest_match(&lab, i, MatchPolicy::Best).unwrap() {
                    Some(m) => {
                        assert_eq!(m.len as usize, brute, "round {round}, offset {i}");
                        let fast =
                            index.longest_match(&lab, i, MatchPolicy::Fast).unwrap().unwrap();
                        assert!(fast.len <= m.len);
                        assert!(fast.len >= 1);
                    }
                    None => assert_eq!(brute, 0, "round {round}, offset {i}"),
                }
            }
        }
    }

    /// Updates may leave the deep order stale, but every reported match must
    /// still be literally true, bucket membership included.
    #[test]
    fn stale_order_still_yields_verified_matches() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x57A1E);
        for _ in 0..30 {
            let (m, n) = (256, 32);
            let mut index = SlidingIndex::new(cfg(m, n));
            let feed = |rng: &mut ChaCha8Rng| -> Vec<u8> {
                (0..n).map(|_| rng.gen_range(b'a'..=b'd')).collect()
            };
            for _ in 0..m / n {
                let block = feed(&mut rng);
                index.slide_in(&block).unwrap();
            }
            index.rebuild();
            for _ in 0..12 {
                let block = feed(&mut rng);
                index.slide_in(&block).unwrap();
                index.update(&block).unwrap();
                let lab = feed(&mut rng);
                for i in 0..lab.len() {
                    for policy in [MatchPolicy::Fast, MatchPolicy::Best] {
                        if let Some(mr) = index.longest_match(&lab, i, policy).unwrap() {
                            let dict = index.dictionary();
                            let (pos, len) = (mr.pos as usize, mr.len as usize);
                            assert!(len >= 1 && pos + len <= dict.len());
                            assert_eq!(&dict[pos..pos + len], &lab[i..i + len]);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn rebuild_produces_verified_orders_on_random_windows() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..30 {
            let fill = rng.gen_range(1..=2048);
            let text: Vec<u8> = (0..fill).map(|_| rng.gen()).collect();
            let index = loaded(2048, 256, &text);
            let sa = build_suffix_array_naive(index.dictionary()).unwrap();
            assert_eq!(index.active_order(), sa.order());
            assert!(verify_suffix_array(index.dictionary(), &sa).unwrap());
        }
    }

    #[test]
    fn common_prefix_is_exact_at_chunk_edges() {
        assert_eq!(common_prefix(b"", b""), 0);
        assert_eq!(common_prefix(b"a", b"b"), 0);
        assert_eq!(common_prefix(b"abcdefgh", b"abcdefgh"), 8);
        assert_eq!(common_prefix(b"abcdefghi", b"abcdefghj"), 8);
        assert_eq!(common_prefix(b"abcdefgXi", b"abcdefgYj"), 7);
        assert_eq!(common_prefix(b"abcdefghijklmnop", b"abcdefghijklmnoX"), 15);
        let long = vec![0u8; 100];
        let mut other = long.clone();
        other[63] = 1;
        assert_eq!(common_prefix(&long, &other), 63);
    }
}
