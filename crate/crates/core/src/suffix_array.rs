//! Suffix array construction.
//!
//! [`build_suffix_array`] runs SA-IS (suffix array by induced sorting) in
//! linear time over byte strings. [`build_suffix_array_naive`] is the
//! comparison-sort oracle used to cross-check it in tests, and
//! [`verify_suffix_array`] checks the defining invariant directly: the
//! result is a permutation of all suffix start positions in strictly
//! increasing lexicographic order.

use std::cmp::Ordering;

use thiserror::Error;

/// Inputs above this length are refused by the naive oracle; its
/// comparison sort exists to validate small cases, not to be fast.
pub const NAIVE_ORACLE_LIMIT: usize = 1 << 20;

/// Errors from the oracle-facing entry points.
#[derive(Debug, Error)]
pub enum SuffixArrayError {
    /// The naive oracle was handed more input than it is meant for.
    #[error("naive suffix-array oracle limited to {limit} bytes (got {len})")]
    OracleInputTooLong { len: usize, limit: usize },
    /// A candidate array cannot possibly describe the text.
    #[error("suffix array has {sa_len} entries for a text of {text_len} bytes")]
    LengthMismatch { sa_len: usize, text_len: usize },
}

/// Lexicographically sorted suffix start positions of a byte string.
///
/// `order()[i]` is the start of the i-th smallest suffix; positions are
/// 0-based and the array is a permutation of `0..text_len`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuffixArray {
    order: Vec<u32>,
}

impl SuffixArray {
    pub fn order(&self) -> &[u32] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}

/// Builds the suffix array of `text` with SA-IS in O(len) time.
pub fn build_suffix_array(text: &[u8]) -> SuffixArray {
    match text.len() {
        0 => return SuffixArray { order: Vec::new() },
        1 => return SuffixArray { order: vec![0] },
        _ => {}
    }
    // Shift the alphabet up by one so value 0 is free for the sentinel
    // SA-IS appends; the sentinel is unique and smaller than everything.
    let mut s: Vec<u32> = Vec::with_capacity(text.len() + 1);
    s.extend(text.iter().map(|&b| u32::from(b) + 1));
    s.push(0);
    let mut sa = vec![EMPTY; s.len()];
    sa_is(&s, 257, &mut sa);
    // Slot 0 is the sentinel's suffix, not a suffix of the real text.
    sa.remove(0);
    SuffixArray { order: sa }
}

/// Comparison-sort oracle for [`build_suffix_array`].
pub fn build_suffix_array_naive(text: &[u8]) -> Result<SuffixArray, SuffixArrayError> {
    if text.len() > NAIVE_ORACLE_LIMIT {
        return Err(SuffixArrayError::OracleInputTooLong {
            len: text.len(),
            limit: NAIVE_ORACLE_LIMIT,
        });
    }
    let mut order: Vec<u32> = (0..text.len() as u32).collect();
    order.sort_unstable_by(|&a, &b| text[a as usize..].cmp(&text[b as usize..]));
    Ok(SuffixArray { order })
}

/// Checks that `sa` is a permutation of `0..text.len()` whose suffixes are
/// in strictly increasing order. Length mismatch is an error (the array
/// cannot describe this text at all); any other defect returns `Ok(false)`.
pub fn verify_suffix_array(text: &[u8], sa: &SuffixArray) -> Result<bool, SuffixArrayError> {
    if sa.len() != text.len() {
        return Err(SuffixArrayError::LengthMismatch { sa_len: sa.len(), text_len: text.len() });
    }
    let n = text.len();
    let mut seen = vec![false; n];
    for &p in sa.order() {
        let p = p as usize;
        if p >= n || seen[p] {
            return Ok(false);
        }
        seen[p] = true;
    }
    for w in sa.order().windows(2) {
        if text[w[0] as usize..].cmp(&text[w[1] as usize..]) != Ordering::Less {
            return Ok(false);
        }
    }
    Ok(true)
}

const EMPTY: u32 = u32::MAX;

/// SA-IS over `s`, which must end with a unique smallest sentinel (value 0).
/// `sa` receives the full suffix array including the sentinel suffix.
fn sa_is(s: &[u32], sigma: usize, sa: &mut [u32]) {
    let n = s.len();
    debug_assert_eq!(sa.len(), n);
    if n == 1 {
        sa[0] = 0;
        return;
    }
    if n == 2 {
        // sentinel suffix first, then the one real suffix
        sa[0] = 1;
        sa[1] = 0;
        return;
    }

    // Step 1: classify each suffix as S-type (smaller than its successor)
    // or L-type; the sentinel is S by definition.
    let mut is_s = vec![false; n];
    is_s[n - 1] = true;
    for i in (0..n - 1).rev() {
        is_s[i] = match s[i].cmp(&s[i + 1]) {
            Ordering::Less => true,
            Ordering::Greater => false,
            Ordering::Equal => is_s[i + 1],
        };
    }

    let mut counts = vec![0u32; sigma];
    for &c in s {
        counts[c as usize] += 1;
    }

    // Step 2: drop LMS suffixes at their bucket tails in arbitrary order,
    // then induce; afterwards the LMS suffixes appear in the order of their
    // LMS substrings.
    sa.fill(EMPTY);
    {
        let mut tails = bucket_tails(&counts);
        for (i, &sym) in s.iter().enumerate().skip(1) {
            if is_lms(&is_s, i) {
                let c = sym as usize;
                tails[c] -= 1;
                sa[tails[c] as usize] = i as u32;
            }
        }
    }
    induce(s, sa, &is_s, &counts);

    // Step 3: name the LMS substrings in sorted order; equal substrings get
    // equal names so the reduced string preserves suffix order.
    let lms_count = (1..n).filter(|&i| is_lms(&is_s, i)).count();
    let mut sorted_lms = Vec::with_capacity(lms_count);
    for &p in sa.iter() {
        if p != EMPTY && is_lms(&is_s, p as usize) {
            sorted_lms.push(p);
        }
    }
    debug_assert_eq!(sorted_lms.len(), lms_count);
    let mut names = vec![EMPTY; n];
    let mut next_name = 0u32;
    let mut prev: Option<usize> = None;
    for &p in &sorted_lms {
        let p = p as usize;
        if let Some(q) = prev {
            if !lms_substrings_equal(s, &is_s, q, p) {
                next_name += 1;
            }
        }
        names[p] = next_name;
        prev = Some(p);
    }
    let name_count = next_name as usize + 1;

    // Step 4: if names repeat, recurse on the reduced string to finish
    // sorting the LMS suffixes; unique names mean they are already sorted.
    if name_count < lms_count {
        let mut reduced = Vec::with_capacity(lms_count);
        let mut lms_pos = Vec::with_capacity(lms_count);
        for (i, &name) in names.iter().enumerate().skip(1) {
            if is_lms(&is_s, i) {
                lms_pos.push(i as u32);
                reduced.push(name);
            }
        }
        let mut reduced_sa = vec![EMPTY; lms_count];
        sa_is(&reduced, name_count, &mut reduced_sa);
        for (slot, &r) in sorted_lms.iter_mut().zip(reduced_sa.iter()) {
            *slot = lms_pos[r as usize];
        }
    }

    // Step 5: seed the buckets with the now fully sorted LMS suffixes and
    // induce once more to place everything.
    sa.fill(EMPTY);
    {
        let mut tails = bucket_tails(&counts);
        for &p in sorted_lms.iter().rev() {
            let c = s[p as usize] as usize;
            tails[c] -= 1;
            sa[tails[c] as usize] = p;
        }
    }
    induce(s, sa, &is_s, &counts);
}

/// One round of induced sorting: L-types left-to-right from bucket heads,
/// then S-types right-to-left from bucket tails.
fn induce(s: &[u32], sa: &mut [u32], is_s: &[bool], counts: &[u32]) {
    let n = s.len();
    let mut heads = bucket_heads(counts);
    for i in 0..n {
        let p = sa[i];
        if p == EMPTY || p == 0 {
            continue;
        }
        let j = (p - 1) as usize;
        if !is_s[j] {
            let c = s[j] as usize;
            sa[heads[c] as usize] = j as u32;
            heads[c] += 1;
        }
    }
    let mut tails = bucket_tails(counts);
    for i in (0..n).rev() {
        let p = sa[i];
        if p == EMPTY || p == 0 {
            continue;
        }
        let j = (p - 1) as usize;
        if is_s[j] {
            let c = s[j] as usize;
            tails[c] -= 1;
            sa[tails[c] as usize] = j as u32;
        }
    }
}

fn is_lms(is_s: &[bool], i: usize) -> bool {
    i > 0 && is_s[i] && !is_s[i - 1]
}

fn bucket_heads(counts: &[u32]) -> Vec<u32> {
    let mut heads = Vec::with_capacity(counts.len());
    let mut sum = 0u32;
    for &c in counts {
        heads.push(sum);
        sum += c;
    }
    heads
}

fn bucket_tails(counts: &[u32]) -> Vec<u32> {
    let mut tails = Vec::with_capacity(counts.len());
    let mut sum = 0u32;
    for &c in counts {
        sum += c;
        tails.push(sum);
    }
    tails
}

/// Compares the LMS substrings starting at `a` and `b` (both LMS positions):
/// symbols and types must agree up to and including the next LMS position.
fn lms_substrings_equal(s: &[u32], is_s: &[bool], a: usize, b: usize) -> bool {
    let n = s.len();
    if a == b {
        return true;
    }
    // The sentinel's substring is just the sentinel; nothing else equals it.
    if a == n - 1 || b == n - 1 {
        return false;
    }
    let mut i = 0;
    loop {
        let (pa, pb) = (a + i, b + i);
        if i > 0 {
            let a_end = is_lms(is_s, pa);
            let b_end = is_lms(is_s, pb);
            if a_end && b_end {
                return true;
            }
            if a_end != b_end {
                return false;
            }
        }
        if s[pa] != s[pb] || is_s[pa] != is_s[pb] {
            return false;
        }
        i += 1;
    }
}
