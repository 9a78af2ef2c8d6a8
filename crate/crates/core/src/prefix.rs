//! Range-to-prefix conversion for ternary match tables.
//!
//! A W-bit prefix is a pattern of fixed leading bits followed by wildcards;
//! it covers a power-of-two-sized, power-of-two-aligned block of integers.
//! [`range_to_prefixes`] decomposes a closed integer range `[lo, hi]` into
//! the minimal set of such blocks by repeatedly taking the largest prefix
//! that starts at the current lower bound and still fits inside the range.
//! A W-bit range never needs more than `2·W − 2` prefixes.

use std::fmt;

use thiserror::Error;

/// Maximum field width supported by the codec, in bits.
pub const MAX_WIDTH_BITS: u8 = 32;

/// Widths up to this size get an exhaustive minimality check in
/// [`verify_decomposition`]; wider ranges report `minimal: None`.
pub const MINIMALITY_CHECK_MAX_WIDTH: u8 = 20;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum PrefixError {
    #[error("field width must be in 1..={MAX_WIDTH_BITS} bits, got {width_bits}")]
    InvalidWidth { width_bits: u32 },
    #[error("invalid range: lo {lo} exceeds hi {hi}")]
    EmptyRange { lo: u32, hi: u32 },
    #[error("range bound {hi} does not fit in {width_bits} bits")]
    OutOfDomain { hi: u32, width_bits: u8 },
    #[error("value {value:#x} does not fit in {width_bits} bits")]
    ValueTooWide { value: u32, width_bits: u8 },
    #[error("mask {mask:#b} is not a prefix mask at width {width_bits}")]
    NotAPrefixMask { mask: u32, width_bits: u8 },
    #[error("value {value:#b} has set bits under wildcard positions of mask {mask:#b}")]
    NotCanonical { value: u32, mask: u32 },
    #[error("prefix width {found} differs from range width {expected}")]
    MixedWidths { expected: u8, found: u8 },
    #[error("width must be at least 2 bits for the worst-case bound, got {width_bits}")]
    WidthBelowBound { width_bits: u32 },
    #[error("bin count must be at least 1")]
    ZeroBins,
}

/// All-ones mask of the W-bit domain.
fn domain_mask(width_bits: u8) -> u32 {
    if width_bits >= 32 {
        u32::MAX
    } else {
        (1u32 << width_bits) - 1
    }
}

/// One ternary prefix: a W-bit value plus a leading-ones mask.
///
/// The mask has `prefix_len` leading one-bits (within the W-bit field)
/// followed by wildcards; wildcard positions of `value` are zero, so equality
/// of prefixes is structural equality of the covered blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TernaryPrefix {
    value: u32,
    mask: u32,
    width_bits: u8,
}

impl TernaryPrefix {
    /// Builds a prefix, validating the mask shape and canonical form.
    pub fn new(value: u32, mask: u32, width_bits: u8) -> Result<Self, PrefixError> {
        if width_bits == 0 || width_bits > MAX_WIDTH_BITS {
            return Err(PrefixError::InvalidWidth {
                width_bits: width_bits as u32,
            });
        }
        let domain = domain_mask(width_bits);
        if value & !domain != 0 {
            return Err(PrefixError::ValueTooWide { value, width_bits });
        }
        if mask & !domain != 0 {
            return Err(PrefixError::ValueTooWide {
                value: mask,
                width_bits,
            });
        }
        let prefix_len = mask.count_ones();
        let expected = if prefix_len == 0 {
            0
        } else if prefix_len >= width_bits as u32 {
            domain
        } else {
            domain & !(domain >> prefix_len)
        };
        if mask != expected {
            return Err(PrefixError::NotAPrefixMask { mask, width_bits });
        }
        if value & !mask != 0 {
            return Err(PrefixError::NotCanonical { value, mask });
        }
        Ok(Self {
            value,
            mask,
            width_bits,
        })
    }

    /// Internal constructor for an aligned block; invariants hold by
    /// construction. `start` must be aligned to `2^wildcard_bits`.
    fn from_block(start: u64, wildcard_bits: u32, width_bits: u8) -> Self {
        debug_assert!(wildcard_bits <= width_bits as u32);
        debug_assert_eq!(start & ((1u64 << wildcard_bits) - 1), 0);
        let domain = domain_mask(width_bits) as u64;
        let mask = domain & !((1u64 << wildcard_bits) - 1);
        Self {
            value: start as u32,
            mask: mask as u32,
            width_bits,
        }
    }

    pub fn value(&self) -> u32 {
        self.value
    }

    pub fn mask(&self) -> u32 {
        self.mask
    }

    pub fn width_bits(&self) -> u8 {
        self.width_bits
    }

    /// Number of fixed leading bits.
    pub fn prefix_len(&self) -> u32 {
        self.mask.count_ones()
    }

    /// Number of trailing wildcard bits.
    pub fn wildcard_bits(&self) -> u32 {
        self.width_bits as u32 - self.prefix_len()
    }

    /// Count of integers covered by this prefix (a power of two).
    pub fn covered_len(&self) -> u64 {
        1u64 << self.wildcard_bits()
    }

    /// Smallest covered integer.
    pub fn covered_lo(&self) -> u32 {
        self.value
    }

    /// Largest covered integer.
    pub fn covered_hi(&self) -> u32 {
        (self.value as u64 + self.covered_len() - 1) as u32
    }

    /// Ternary match: does `key` (a W-bit value) fall in this prefix?
    pub fn covers(&self, key: u32) -> bool {
        key & self.mask == self.value
    }

    /// Human-readable pattern, e.g. `01**` for value `0100`, mask `1100`.
    pub fn pattern(&self) -> String {
        let w = self.width_bits as u32;
        (0..w)
            .map(|i| {
                let bit = 1u32 << (w - 1 - i);
                if self.mask & bit == 0 {
                    '*'
                } else if self.value & bit == 0 {
                    '0'
                } else {
                    '1'
                }
            })
            .collect()
    }
}

impl fmt::Display for TernaryPrefix {
    /// Binary `value/mask` at the field width, e.g. `0100/1100`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = self.width_bits as usize;
        write!(f, "{:0w$b}/{:0w$b}", self.value, self.mask)
    }
}

/// A closed integer range `[lo, hi]` inside a W-bit domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct IntRange {
    lo: u32,
    hi: u32,
    width_bits: u8,
}

impl IntRange {
    pub fn new(lo: u32, hi: u32, width_bits: u8) -> Result<Self, PrefixError> {
        if width_bits == 0 || width_bits > MAX_WIDTH_BITS {
            return Err(PrefixError::InvalidWidth {
                width_bits: width_bits as u32,
            });
        }
        if lo > hi {
            return Err(PrefixError::EmptyRange { lo, hi });
        }
        if hi as u64 > domain_mask(width_bits) as u64 {
            return Err(PrefixError::OutOfDomain { hi, width_bits });
        }
        Ok(Self { lo, hi, width_bits })
    }

    /// The whole W-bit domain `[0, 2^W − 1]`.
    pub fn full(width_bits: u8) -> Result<Self, PrefixError> {
        if width_bits == 0 || width_bits > MAX_WIDTH_BITS {
            return Err(PrefixError::InvalidWidth {
                width_bits: width_bits as u32,
            });
        }
        Ok(Self {
            lo: 0,
            hi: domain_mask(width_bits),
            width_bits,
        })
    }

    pub fn lo(&self) -> u32 {
        self.lo
    }

    pub fn hi(&self) -> u32 {
        self.hi
    }

    pub fn width_bits(&self) -> u8 {
        self.width_bits
    }

    /// Number of covered integers; at least 1, since `lo <= hi` always.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> u64 {
        self.hi as u64 - self.lo as u64 + 1
    }

    pub fn contains(&self, value: u32) -> bool {
        self.lo <= value && value <= self.hi
    }
}

impl fmt::Display for IntRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]@{}", self.lo, self.hi, self.width_bits)
    }
}

/// Decomposes a range into the minimal set of disjoint prefixes covering it.
///
/// Greedy: at the current lower bound, emit the largest aligned block that
/// fits in the remaining range, then advance past it. The result is ordered
/// by ascending covered value and contains at most `2·W − 2` prefixes for
/// `W ≥ 2` (one for `W = 1`).
pub fn range_to_prefixes(range: &IntRange) -> Vec<TernaryPrefix> {
    let width = range.width_bits;
    let end = range.hi as u64;
    let mut cur = range.lo as u64;
    let mut out = Vec::new();
    while cur <= end {
        let align = if cur == 0 {
            width as u32
        } else {
            cur.trailing_zeros().min(width as u32)
        };
        let fit = (end - cur + 1).ilog2();
        let k = align.min(fit);
        out.push(TernaryPrefix::from_block(cur, k, width));
        cur += 1u64 << k;
    }
    out
}

/// Upper bound on prefixes needed for one W-bit range: `2·W − 2`.
pub fn worst_case_entries_per_bin(width_bits: u32) -> Result<u64, PrefixError> {
    if width_bits < 2 {
        return Err(PrefixError::WidthBelowBound { width_bits });
    }
    Ok(2 * width_bits as u64 - 2)
}

/// Worst-case table size for `num_bins` ranges of W bits: `N·(2·W − 2)`.
pub fn worst_case_entries_total(num_bins: u64, width_bits: u32) -> Result<u64, PrefixError> {
    if num_bins == 0 {
        return Err(PrefixError::ZeroBins);
    }
    Ok(num_bins * worst_case_entries_per_bin(width_bits)?)
}

/// Result of checking a prefix set against a range.
///
/// `minimal` is `None` when the range is too wide for the exhaustive check
/// (see [`MINIMALITY_CHECK_MAX_WIDTH`]): explicitly "not checked" rather than
/// silently assumed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerificationReport {
    /// Union of covered integers equals exactly `{lo..hi}`.
    pub covered: bool,
    /// No integer is covered by two prefixes.
    pub disjoint: bool,
    /// No valid covering decomposition with fewer prefixes exists.
    pub minimal: Option<bool>,
}

impl VerificationReport {
    /// All three checks passed (an unchecked `minimal` does not count).
    pub fn is_valid_minimal(&self) -> bool {
        self.covered && self.disjoint && self.minimal == Some(true)
    }
}

/// Checks that `prefixes` cover `range` exactly, disjointly and minimally.
///
/// Coverage and disjointness are decided by exact interval arithmetic at any
/// width. Minimality compares against [`optimal_decomposition`]'s exhaustive
/// dynamic program, available up to [`MINIMALITY_CHECK_MAX_WIDTH`] bits.
pub fn verify_decomposition(
    range: &IntRange,
    prefixes: &[TernaryPrefix],
) -> Result<VerificationReport, PrefixError> {
    for p in prefixes {
        if p.width_bits != range.width_bits {
            return Err(PrefixError::MixedWidths {
                expected: range.width_bits,
                found: p.width_bits,
            });
        }
    }

    let mut blocks: Vec<(u64, u64)> = prefixes
        .iter()
        .map(|p| (p.covered_lo() as u64, p.covered_hi() as u64))
        .collect();
    blocks.sort_unstable();

    let disjoint = blocks.windows(2).all(|w| w[0].1 < w[1].0);

    // Merge the sorted blocks and compare the union against [lo, hi].
    let covered = {
        let mut merged: Vec<(u64, u64)> = Vec::new();
        for &(lo, hi) in &blocks {
            match merged.last_mut() {
                Some(last) if lo <= last.1 + 1 => last.1 = last.1.max(hi),
                _ => merged.push((lo, hi)),
            }
        }
        merged == [(range.lo as u64, range.hi as u64)]
    };

    let minimal = if !covered {
        Some(false)
    } else {
        optimal_decomposition(range).map(|opt| prefixes.len() as u64 == opt.size)
    };

    Ok(VerificationReport {
        covered,
        disjoint,
        minimal,
    })
}

/// Optimum found by exhaustive search over all prefix decompositions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OptimalDecomposition {
    /// Fewest prefixes that cover the range exactly.
    pub size: u64,
    /// Number of distinct decompositions achieving `size` (saturating).
    pub distinct_optima: u64,
}

/// Exhaustive minimal-decomposition search, as a dynamic program over every
/// position in the range. Returns `None` for ranges wider than
/// [`MINIMALITY_CHECK_MAX_WIDTH`] bits, where the table would not fit.
///
/// Any exact cover of `[lo, hi]` by disjoint aligned blocks is a chain of
/// blocks laid end to end, so the DP over "fewest blocks from position x to
/// hi" searches the full decision space.
pub fn optimal_decomposition(range: &IntRange) -> Option<OptimalDecomposition> {
    if range.width_bits > MINIMALITY_CHECK_MAX_WIDTH {
        return None;
    }
    let lo = range.lo as u64;
    let hi = range.hi as u64;
    let len = (hi - lo + 1) as usize;
    // best[i], ways[i]: fewest blocks (and count of optimal tilings) covering
    // positions lo+i ..= hi.
    let mut best = vec![u32::MAX; len + 1];
    let mut ways = vec![0u64; len + 1];
    best[len] = 0;
    ways[len] = 1;
    for i in (0..len).rev() {
        let pos = lo + i as u64;
        let align = if pos == 0 {
            range.width_bits as u32
        } else {
            pos.trailing_zeros().min(range.width_bits as u32)
        };
        let fit = ((len - i) as u64).ilog2();
        for k in 0..=align.min(fit) {
            let next = i + (1usize << k);
            if best[next] == u32::MAX {
                continue;
            }
            let cand = best[next] + 1;
            if cand < best[i] {
                best[i] = cand;
                ways[i] = ways[next];
            } else if cand == best[i] {
                ways[i] = ways[i].saturating_add(ways[next]);
            }
        }
    }
    Some(OptimalDecomposition {
        size: best[0] as u64,
        distinct_optima: ways[0],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prefixes(range: (u32, u32), width: u8) -> Vec<TernaryPrefix> {
        range_to_prefixes(&IntRange::new(range.0, range.1, width).unwrap())
    }

    /// Literal expansion of a prefix set into the covered integer set.
    fn expand(prefixes: &[TernaryPrefix], width: u8) -> Vec<bool> {
        let mut set = vec![false; 1usize << width];
        for p in prefixes {
            for v in p.covered_lo()..=p.covered_hi() {
                set[v as usize] = true;
            }
        }
        set
    }

    #[test]
    fn four_to_seven_is_a_single_prefix() {
        let got = prefixes((4, 7), 4);
        assert_eq!(got, vec![TernaryPrefix::new(0b0100, 0b1100, 4).unwrap()]);
        assert_eq!(got[0].pattern(), "01**");
    }

    #[test]
    fn three_to_eight_needs_three_prefixes() {
        let got = prefixes((3, 8), 4);
        let want = vec![
            TernaryPrefix::new(0b0011, 0b1111, 4).unwrap(),
            TernaryPrefix::new(0b0100, 0b1100, 4).unwrap(),
            TernaryPrefix::new(0b1000, 0b1111, 4).unwrap(),
        ];
        assert_eq!(got, want);
        let patterns: Vec<_> = got.iter().map(|p| p.pattern()).collect();
        assert_eq!(patterns, ["0011", "01**", "1000"]);
    }

    #[test]
    fn full_domain_is_one_wildcard() {
        for width in 1..=32u8 {
            let got = range_to_prefixes(&IntRange::full(width).unwrap());
            assert_eq!(got.len(), 1, "width {width}");
            assert_eq!(got[0].value(), 0);
            assert_eq!(got[0].mask(), 0);
        }
    }

    #[test]
    fn singleton_is_an_exact_match() {
        let got = prefixes((5, 5), 4);
        assert_eq!(got, vec![TernaryPrefix::new(0b0101, 0b1111, 4).unwrap()]);
    }

    #[test]
    fn width_one_ranges() {
        assert_eq!(prefixes((0, 0), 1).len(), 1);
        assert_eq!(prefixes((1, 1), 1).len(), 1);
        assert_eq!(prefixes((0, 1), 1).len(), 1);
    }

    #[test]
    fn exhaustive_w8_coverage_and_bound() {
        let mut max_len = 0;
        for lo in 0..=255u32 {
            for hi in lo..=255u32 {
                let got = prefixes((lo, hi), 8);
                max_len = max_len.max(got.len());
                let set = expand(&got, 8);
                for v in 0..=255u32 {
                    assert_eq!(
                        set[v as usize],
                        lo <= v && v <= hi,
                        "range [{lo}, {hi}] value {v}"
                    );
                }
            }
        }
        // 2·8 − 2, and the bound is attained.
        assert_eq!(max_len, 14);
    }

    #[test]
    fn worst_case_formulas() {
        assert_eq!(worst_case_entries_per_bin(32).unwrap(), 62);
        assert_eq!(worst_case_entries_per_bin(2).unwrap(), 2);
        assert_eq!(worst_case_entries_per_bin(8).unwrap(), 14);
        assert_eq!(
            worst_case_entries_per_bin(1),
            Err(PrefixError::WidthBelowBound { width_bits: 1 })
        );
        assert_eq!(worst_case_entries_total(500, 32).unwrap(), 31_000);
        assert_eq!(worst_case_entries_total(1, 32).unwrap(), 62);
        assert_eq!(worst_case_entries_total(8196, 32).unwrap(), 508_152);
        assert_eq!(worst_case_entries_total(0, 32), Err(PrefixError::ZeroBins));
    }

    #[test]
    fn verify_three_to_eight_decomposition() {
        let range = IntRange::new(3, 8, 4).unwrap();
        let report = verify_decomposition(&range, &range_to_prefixes(&range)).unwrap();
        assert_eq!(
            report,
            VerificationReport {
                covered: true,
                disjoint: true,
                minimal: Some(true)
            }
        );
    }

    #[test]
    fn verify_flags_non_minimal_singleton_enumeration() {
        let range = IntRange::new(4, 7, 4).unwrap();
        let singletons: Vec<_> = (4..=7)
            .map(|v| TernaryPrefix::new(v, 0b1111, 4).unwrap())
            .collect();
        let report = verify_decomposition(&range, &singletons).unwrap();
        assert!(report.covered);
        assert!(report.disjoint);
        assert_eq!(report.minimal, Some(false));
    }

    #[test]
    fn verify_flags_gaps_and_overlaps() {
        let range = IntRange::new(0, 7, 4).unwrap();
        // Gap: [0,3] only.
        let gap = vec![TernaryPrefix::new(0, 0b1100, 4).unwrap()];
        let report = verify_decomposition(&range, &gap).unwrap();
        assert!(!report.covered);
        assert!(report.disjoint);
        // Overlap: [0,7] plus [4,7] again.
        let overlap = vec![
            TernaryPrefix::new(0, 0b1000, 4).unwrap(),
            TernaryPrefix::new(4, 0b1100, 4).unwrap(),
        ];
        let report = verify_decomposition(&range, &overlap).unwrap();
        assert!(report.covered);
        assert!(!report.disjoint);
    }

    #[test]
    fn verify_rejects_mixed_widths() {
        let range = IntRange::new(0, 3, 4).unwrap();
        let foreign = vec![TernaryPrefix::new(0, 0, 8).unwrap()];
        assert_eq!(
            verify_decomposition(&range, &foreign),
            Err(PrefixError::MixedWidths {
                expected: 4,
                found: 8
            })
        );
    }

    #[test]
    fn minimality_not_checked_above_twenty_bits() {
        let range = IntRange::new(3, 1_000_000, 32).unwrap();
        let report = verify_decomposition(&range, &range_to_prefixes(&range)).unwrap();
        assert!(report.covered);
        assert!(report.disjoint);
        assert_eq!(report.minimal, None);
    }

    #[test]
    fn invalid_ranges_are_rejected() {
        assert_eq!(
            IntRange::new(5, 4, 4),
            Err(PrefixError::EmptyRange { lo: 5, hi: 4 })
        );
        assert_eq!(
            IntRange::new(0, 16, 4),
            Err(PrefixError::OutOfDomain {
                hi: 16,
                width_bits: 4
            })
        );
        assert_eq!(
            IntRange::new(0, 1, 0),
            Err(PrefixError::InvalidWidth { width_bits: 0 })
        );
        assert_eq!(
            IntRange::new(0, 1, 33),
            Err(PrefixError::InvalidWidth { width_bits: 33 })
        );
    }

    #[test]
    fn prefix_constructor_enforces_invariants() {
        // 1010 is not a leading-ones mask.
        assert_eq!(
            TernaryPrefix::new(0, 0b1010, 4),
            Err(PrefixError::NotAPrefixMask {
                mask: 0b1010,
                width_bits: 4
            })
        );
        // Wildcard bits of the value must be zero.
        assert_eq!(
            TernaryPrefix::new(0b0101, 0b1100, 4),
            Err(PrefixError::NotCanonical {
                value: 0b0101,
                mask: 0b1100
            })
        );
        assert_eq!(
            TernaryPrefix::new(0b10000, 0b1111, 4),
            Err(PrefixError::ValueTooWide {
                value: 0b10000,
                width_bits: 4
            })
        );
    }

    #[test]
    fn outputs_are_canonical_ordered_and_within_bound() {
        for width in 2..=10u8 {
            let domain = domain_mask(width);
            for &(lo, hi) in &[(0u32, domain), (1, domain - 1), (domain / 3, domain / 2)] {
                let got = prefixes((lo, hi), width);
                assert!(got.len() as u64 <= worst_case_entries_per_bin(width as u32).unwrap());
                for w in got.windows(2) {
                    assert!(w[0].covered_hi() < w[1].covered_lo());
                }
                for p in &got {
                    // Re-validating through the public constructor checks the
                    // canonical-form invariants.
                    TernaryPrefix::new(p.value(), p.mask(), p.width_bits()).unwrap();
                }
            }
        }
    }

    #[test]
    fn aligned_power_of_two_range_is_one_prefix() {
        for k in 0..=30u32 {
            let start = if k <= 28 { 3u64 << k } else { 0 };
            let range = IntRange::new(start as u32, (start + (1u64 << k) - 1) as u32, 32).unwrap();
            assert_eq!(range_to_prefixes(&range).len(), 1, "k={k}");
        }
    }

    #[test]
    fn full_u32_domain_decomposes_without_overflow() {
        let range = IntRange::full(32).unwrap();
        let got = range_to_prefixes(&range);
        assert_eq!(got.len(), 1);
        // And the worst alignment at full width stays within the bound.
        let worst = IntRange::new(1, u32::MAX - 1, 32).unwrap();
        let got = range_to_prefixes(&worst);
        assert_eq!(got.len() as u64, 62);
        let report = verify_decomposition(&worst, &got).unwrap();
        assert!(report.covered && report.disjoint);
    }

    #[test]
    fn display_and_pattern_formats() {
        let p = TernaryPrefix::new(0b0100, 0b1100, 4).unwrap();
        assert_eq!(p.to_string(), "0100/1100");
        assert_eq!(p.pattern(), "01**");
        let wild = TernaryPrefix::new(0, 0, 8).unwrap();
        assert_eq!(wild.to_string(), "00000000/00000000");
        assert_eq!(wild.pattern(), "********");
    }
}
