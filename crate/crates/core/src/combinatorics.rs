//! Exact combinatorial primitives on `S_n`.
//!
//! Permutations are words: `word[i]` is the candidate placed in ranking
//! position `i + 1`, and signals are indexed by the lexicographic rank of the
//! word. Ordered set partitions are stored as row words: `row_word[j - 1]` is
//! the zero-based block containing element `j`. Tableau entries are zero-based
//! as well and printed one-based.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest `n` supported by the exact integer bookkeeping.
pub const MAX_EXACT_N: usize = 16;

/// `n!` as an exact integer.
pub fn factorial(n: usize) -> u64 {
    debug_assert!(n <= 20);
    (1..=n as u64).product()
}

/// Multinomial coefficient `(Σc)! / ∏ c!`.
pub fn multinomial(counts: &[usize]) -> u64 {
    let mut total = 0u64;
    let mut acc = 1u64;
    for &c in counts {
        for i in 1..=c as u64 {
            total += 1;
            acc = acc * total / i;
        }
    }
    acc
}

/// Advances `a` to the next lexicographic arrangement of its multiset.
/// Returns `false` (and resets to the first arrangement) after the last one.
pub fn next_permutation<T: Ord>(a: &mut [T]) -> bool {
    if a.len() < 2 {
        return false;
    }
    let mut i = a.len() - 1;
    while i > 0 && a[i - 1] >= a[i] {
        i -= 1;
    }
    if i == 0 {
        a.reverse();
        return false;
    }
    let mut j = a.len() - 1;
    while a[j] <= a[i - 1] {
        j -= 1;
    }
    a.swap(i - 1, j);
    a[i..].reverse();
    true
}

/// Lexicographic rank of a permutation word with entries `1..=n`.
pub fn lex_rank_word(word: &[u8]) -> u64 {
    let n = word.len();
    let mut used: u32 = 0;
    let mut rank: u64 = 0;
    for (p, &w) in word.iter().enumerate() {
        let below = (1u32 << (w - 1)) - 1;
        rank = rank * (n - p) as u64 + (below & !used).count_ones() as u64;
        used |= 1 << (w - 1);
    }
    rank
}

/// Writes the permutation word of lexicographic rank `rank` into `out`.
pub fn lex_unrank_into(mut rank: u64, out: &mut [u8]) {
    let n = out.len();
    let mut avail: Vec<u8> = (1..=n as u8).collect();
    for p in 0..n {
        let f = factorial(n - 1 - p);
        let c = (rank / f) as usize;
        rank %= f;
        out[p] = avail.remove(c);
    }
}

/// Lexicographic rank of a word over the multiset with `counts[a]` copies of `a`.
pub fn multiset_rank(word: &[u8], counts: &[usize]) -> u64 {
    let mut rem = counts.to_vec();
    let mut total = word.len() as u64;
    let mut words = multinomial(counts);
    let mut rank = 0u64;
    for &w in word {
        let w = w as usize;
        for &r in rem.iter().take(w) {
            if r > 0 {
                rank += words * r as u64 / total;
            }
        }
        words = words * rem[w] as u64 / total;
        rem[w] -= 1;
        total -= 1;
    }
    rank
}

/// Inverse of [`multiset_rank`].
pub fn multiset_unrank(mut rank: u64, counts: &[usize]) -> Vec<u8> {
    let mut rem = counts.to_vec();
    let mut total: u64 = counts.iter().sum::<usize>() as u64;
    let mut words = multinomial(counts);
    let mut out = Vec::with_capacity(total as usize);
    while total > 0 {
        for a in 0..rem.len() {
            if rem[a] == 0 {
                continue;
            }
            let block = words * rem[a] as u64 / total;
            if rank < block {
                out.push(a as u8);
                words = block;
                rem[a] -= 1;
                total -= 1;
                break;
            }
            rank -= block;
        }
    }
    out
}

/// A permutation of `{1..n}` in one-line notation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Permutation {
    word: Vec<u8>,
}

impl Permutation {
    pub fn new(word: Vec<u8>) -> Result<Self> {
        let n = word.len();
        if n > MAX_EXACT_N {
            return Err(Error::TooLarge {
                n,
                max: MAX_EXACT_N,
            });
        }
        let mut seen = vec![false; n + 1];
        for &w in &word {
            let w = w as usize;
            if w == 0 || w > n || seen[w] {
                return Err(Error::InvalidPermutation(format!(
                    "{word:?} is not a permutation of 1..{n}"
                )));
            }
            seen[w] = true;
        }
        Ok(Self { word })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            word: (1..=n as u8).collect(),
        }
    }

    /// The adjacent transposition `(i, i+1)`, one-based.
    pub fn adjacent_swap(n: usize, i: usize) -> Self {
        let mut word: Vec<u8> = (1..=n as u8).collect();
        word.swap(i - 1, i);
        Self { word }
    }

    pub fn n(&self) -> usize {
        self.word.len()
    }

    pub fn word(&self) -> &[u8] {
        &self.word
    }

    /// `σ(i)` for one-based `i`.
    pub fn apply(&self, i: usize) -> usize {
        self.word[i - 1] as usize
    }

    pub fn lex_rank(&self) -> u64 {
        lex_rank_word(&self.word)
    }

    pub fn lex_unrank(rank: u64, n: usize) -> Self {
        let mut word = vec![0u8; n];
        lex_unrank_into(rank, &mut word);
        Self { word }
    }

    pub fn inversions(&self) -> usize {
        let w = &self.word;
        let mut count = 0;
        for i in 0..w.len() {
            for j in i + 1..w.len() {
                if w[i] > w[j] {
                    count += 1;
                }
            }
        }
        count
    }

    pub fn sign(&self) -> i8 {
        if self.inversions().is_multiple_of(2) {
            1
        } else {
            -1
        }
    }

    pub fn inverse(&self) -> Self {
        let mut word = vec![0u8; self.n()];
        for (i, &w) in self.word.iter().enumerate() {
            word[w as usize - 1] = i as u8 + 1;
        }
        Self { word }
    }

    /// `self ∘ other`, applying `other` first.
    pub fn compose(&self, other: &Permutation) -> Self {
        Self {
            word: other
                .word
                .iter()
                .map(|&w| self.word[w as usize - 1])
                .collect(),
        }
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sep = if self.n() > 9 { " " } else { "" };
        let parts: Vec<String> = self.word.iter().map(|w| w.to_string()).collect();
        write!(f, "{}", parts.join(sep))
    }
}

/// An integer partition `γ ⊢ n` with nonincreasing positive parts.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IntegerPartition {
    parts: Vec<usize>,
}

/// Counting constants attached to a shape.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShapeConstants {
    /// `|Π_γ| = n!/∏γ_i!`
    pub m: u64,
    /// `|Π̄_γ| = m/∏k_i!` with `k_i` the multiplicity of part `i`
    pub z: u64,
    /// dimension of the irreducible module
    pub d: u64,
    /// `√(d/n!)`
    pub c: f64,
    /// `√(d·m/(n!·z))`
    pub c_bar: f64,
}

impl IntegerPartition {
    pub fn new(parts: Vec<usize>) -> Result<Self> {
        if parts.is_empty() || parts.contains(&0) {
            return Err(Error::InvalidPartition(format!(
                "{parts:?} must have positive parts"
            )));
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidPartition(format!(
                "{parts:?} is not nonincreasing"
            )));
        }
        let n: usize = parts.iter().sum();
        if n > MAX_EXACT_N {
            return Err(Error::TooLarge {
                n,
                max: MAX_EXACT_N,
            });
        }
        Ok(Self { parts })
    }

    /// Parses `"7,3"` or `"[7,3]"`.
    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim().trim_start_matches('[').trim_end_matches(']');
        let parts = t
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|p| !p.is_empty())
            .map(|p| {
                p.parse::<usize>()
                    .map_err(|_| Error::InvalidPartition(format!("cannot parse '{s}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(parts)
    }

    /// The one-row shape `[n]`.
    pub fn trivial(n: usize) -> Self {
        Self { parts: vec![n] }
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn n(&self) -> usize {
        self.parts.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Comma-separated parts, the CLI syntax.
    pub fn label(&self) -> String {
        let parts: Vec<String> = self.parts.iter().map(|p| p.to_string()).collect();
        parts.join(",")
    }

    pub fn transpose(&self) -> Self {
        let parts = (0..self.parts[0])
            .map(|j| self.parts.iter().filter(|&&p| p > j).count())
            .collect();
        Self { parts }
    }

    pub fn is_hook(&self) -> bool {
        self.parts[1..].iter().all(|&p| p == 1)
    }

    /// Membership in `H_n`: not the transpose of a lexicographically larger shape.
    pub fn in_h(&self) -> bool {
        *self >= self.transpose()
    }

    /// Strict dominance `self ⊳ other`.
    pub fn dominates(&self, other: &IntegerPartition) -> Result<bool> {
        if self.n() != other.n() {
            return Err(Error::SizeMismatch {
                expected: self.n(),
                found: other.n(),
            });
        }
        if self == other {
            return Ok(false);
        }
        let len = self.len().max(other.len());
        let (mut a, mut b) = (0, 0);
        for i in 0..len {
            a += self.parts.get(i).copied().unwrap_or(0);
            b += other.parts.get(i).copied().unwrap_or(0);
            if a < b {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// `d_γ` by the hook length formula.
    pub fn hook_dimension(&self) -> u64 {
        let t = self.transpose();
        let mut hooks: u128 = 1;
        for (i, &row) in self.parts.iter().enumerate() {
            for j in 0..row {
                hooks *= ((row - j - 1) + (t.parts[j] - i - 1) + 1) as u128;
            }
        }
        (factorial(self.n()) as u128 / hooks) as u64
    }

    pub fn constants(&self) -> ShapeConstants {
        let n = self.n();
        let m = multinomial(&self.parts);
        let mut sym = 1u64;
        let mut i = 0;
        while i < self.parts.len() {
            let mut j = i;
            while j < self.parts.len() && self.parts[j] == self.parts[i] {
                j += 1;
            }
            sym *= factorial(j - i);
            i = j;
        }
        let z = m / sym;
        let d = self.hook_dimension();
        let nf = factorial(n) as f64;
        ShapeConstants {
            m,
            z,
            d,
            c: (d as f64 / nf).sqrt(),
            c_bar: (d as f64 * m as f64 / (nf * z as f64)).sqrt(),
        }
    }

    /// All partitions of `n` in descending lexicographic order.
    pub fn all(n: usize) -> Vec<Self> {
        fn rec(rem: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<IntegerPartition>) {
            if rem == 0 {
                out.push(IntegerPartition { parts: cur.clone() });
                return;
            }
            for p in (1..=rem.min(max)).rev() {
                cur.push(p);
                rec(rem - p, p, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        rec(n, n, &mut Vec::new(), &mut out);
        out
    }
}

impl fmt::Display for IntegerPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.label())
    }
}

/// The shapes of `H_n` in descending lexicographic order, optionally truncated to the first `k`.
pub fn h_n_shapes(n: usize, k: Option<usize>) -> Vec<IntegerPartition> {
    let mut shapes: Vec<_> = IntegerPartition::all(n)
        .into_iter()
        .filter(|s| s.in_h())
        .collect();
    if let Some(k) = k {
        shapes.truncate(k);
    }
    shapes
}

/// An ordered set partition of `{1..n}`, stored as a row word.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrderedSetPartition {
    row_word: Vec<u8>,
    sizes: Vec<usize>,
}

impl OrderedSetPartition {
    /// Builds from a row word; every block index up to the maximum must occur.
    pub fn from_row_word(row_word: Vec<u8>) -> Result<Self> {
        if row_word.len() > MAX_EXACT_N {
            return Err(Error::TooLarge {
                n: row_word.len(),
                max: MAX_EXACT_N,
            });
        }
        let blocks = row_word.iter().map(|&r| r as usize + 1).max().unwrap_or(0);
        let mut sizes = vec![0usize; blocks];
        for &r in &row_word {
            sizes[r as usize] += 1;
        }
        if sizes.contains(&0) {
            return Err(Error::InvalidSetPartition(format!(
                "row word {row_word:?} has an empty block"
            )));
        }
        Ok(Self { row_word, sizes })
    }

    /// Builds from one-based blocks.
    pub fn from_blocks(blocks: &[Vec<usize>], n: usize) -> Result<Self> {
        let mut row_word = vec![u8::MAX; n];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::InvalidSetPartition("empty block".into()));
            }
            for &e in block {
                if e == 0 || e > n || row_word[e - 1] != u8::MAX {
                    return Err(Error::InvalidSetPartition(format!(
                        "element {e} is out of range or repeated"
                    )));
                }
                row_word[e - 1] = b as u8;
            }
        }
        if let Some(p) = row_word.iter().position(|&r| r == u8::MAX) {
            return Err(Error::InvalidSetPartition(format!(
                "element {} is missing",
                p + 1
            )));
        }
        Self::from_row_word(row_word)
    }

    /// The reading-order partition `π₁`: block 1 is `{1..γ₁}`, block 2 the next `γ₂`, and so on.
    pub fn reading_order(sizes: &[usize]) -> Self {
        let mut row_word = Vec::with_capacity(sizes.iter().sum());
        for (b, &s) in sizes.iter().enumerate() {
            row_word.extend(std::iter::repeat_n(b as u8, s));
        }
        Self {
            row_word,
            sizes: sizes.to_vec(),
        }
    }

    pub fn n(&self) -> usize {
        self.row_word.len()
    }

    pub fn row_word(&self) -> &[u8] {
        &self.row_word
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn num_blocks(&self) -> usize {
        self.sizes.len()
    }

    /// Zero-based block holding the one-based element `e`.
    pub fn block_of(&self, e: usize) -> usize {
        self.row_word[e - 1] as usize
    }

    /// Blocks as sorted one-based element lists.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut blocks = vec![Vec::new(); self.sizes.len()];
        for (j, &r) in self.row_word.iter().enumerate() {
            blocks[r as usize].push(j + 1);
        }
        blocks
    }

    pub fn shape(&self) -> Result<IntegerPartition> {
        IntegerPartition::new(self.sizes.clone())
    }

    /// Index in the lexicographic order of all row words with the same block sizes.
    pub fn index(&self) -> u64 {
        multiset_rank(&self.row_word, &self.sizes)
    }

    /// Block-label text, e.g. `245|13`, or `2,4,5|1,3` for `n ≥ 10`.
    pub fn label(&self) -> String {
        let wide = self.n() >= 10;
        let blocks: Vec<String> = self
            .blocks()
            .iter()
            .map(|b| {
                let items: Vec<String> = b.iter().map(|e| e.to_string()).collect();
                items.join(if wide { "," } else { "" })
            })
            .collect();
        blocks.join("|")
    }

    /// Parses block-label text. Digits are single elements unless commas are used;
    /// for `n = 10` the digit `0` stands for 10.
    pub fn parse_label(s: &str, n: usize) -> Result<Self> {
        let s = s.trim();
        let commas = s.contains(',');
        let bad = |msg: String| Error::InvalidSetPartition(msg);
        let mut blocks = Vec::new();
        for part in s.split('|') {
            let part = part.trim();
            let mut block = Vec::new();
            if commas || n > 10 {
                for item in part.split(',').filter(|x| !x.trim().is_empty()) {
                    block.push(
                        item.trim()
                            .parse::<usize>()
                            .map_err(|_| bad(format!("cannot parse '{item}' in '{s}'")))?,
                    );
                }
            } else {
                for ch in part.chars() {
                    let v = ch
                        .to_digit(10)
                        .ok_or_else(|| bad(format!("unexpected '{ch}' in '{s}'")))?
                        as usize;
                    block.push(if v == 0 && n == 10 { 10 } else { v });
                }
            }
            blocks.push(block);
        }
        Self::from_blocks(&blocks, n)
    }

    /// The action `σ(π)`: element `j` of block `i` moves to `σ(j)` in block `i`.
    pub fn act(&self, sigma: &Permutation) -> Result<Self> {
        if sigma.n() != self.n() {
            return Err(Error::SizeMismatch {
                expected: self.n(),
                found: sigma.n(),
            });
        }
        let mut row_word = vec![0u8; self.n()];
        for (j, &r) in self.row_word.iter().enumerate() {
            row_word[sigma.word()[j] as usize - 1] = r;
        }
        Ok(Self {
            row_word,
            sizes: self.sizes.clone(),
        })
    }

    /// The action of the adjacent transposition `(i, i+1)`, one-based.
    pub fn swap_elements(&self, i: usize) -> Self {
        let mut out = self.clone();
        out.row_word.swap(i - 1, i);
        out
    }

    /// Exchanges two blocks of equal size.
    pub fn swap_blocks(&self, a: usize, b: usize) -> Result<Self> {
        if self.sizes[a] != self.sizes[b] {
            return Err(Error::InvalidSetPartition(format!(
                "blocks {a} and {b} differ in size"
            )));
        }
        let mut out = self.clone();
        for r in out.row_word.iter_mut() {
            if *r as usize == a {
                *r = b as u8;
            } else if *r as usize == b {
                *r = a as u8;
            }
        }
        Ok(out)
    }

    /// Pairs `i < j` with `j` in a strictly earlier (higher) block than `i`.
    pub fn inversions(&self) -> usize {
        let w = &self.row_word;
        let mut count = 0;
        for i in 0..w.len() {
            for j in i + 1..w.len() {
                if w[j] < w[i] {
                    count += 1;
                }
            }
        }
        count
    }

    /// Canonical representative of its class under permuting equal-size blocks:
    /// equal-size blocks appear in order of increasing minimum element.
    pub fn is_reduced(&self) -> bool {
        let mut first = vec![usize::MAX; self.sizes.len()];
        for (j, &r) in self.row_word.iter().enumerate() {
            if first[r as usize] == usize::MAX {
                first[r as usize] = j;
            }
        }
        (1..self.sizes.len()).all(|b| self.sizes[b] != self.sizes[b - 1] || first[b - 1] < first[b])
    }

    /// Standard: with blocks written as sorted rows, every column increases downward.
    pub fn is_standard(&self) -> bool {
        if self.sizes.windows(2).any(|w| w[0] < w[1]) {
            return false;
        }
        let blocks = self.blocks();
        (1..blocks.len()).all(|b| (0..blocks[b].len()).all(|c| blocks[b - 1][c] < blocks[b][c]))
    }
}

impl fmt::Display for OrderedSetPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.label())
    }
}

/// All row words with the given block sizes, in lexicographic order.
pub fn enumerate_row_words(sizes: &[usize]) -> Vec<Vec<u8>> {
    let mut word = OrderedSetPartition::reading_order(sizes).row_word;
    let mut out = vec![word.clone()];
    while next_permutation(&mut word) {
        out.push(word.clone());
    }
    out
}

/// `Π_γ` in canonical (row word lexicographic) order; the first element is `π₁`.
pub fn enumerate_ordered_set_partitions(shape: &IntegerPartition) -> Vec<OrderedSetPartition> {
    enumerate_row_words(shape.parts())
        .into_iter()
        .map(|row_word| OrderedSetPartition {
            row_word,
            sizes: shape.parts().to_vec(),
        })
        .collect()
}

/// `Π̄_γ`: one representative per class of block reorderings, in canonical order.
pub fn reduced_representatives(shape: &IntegerPartition) -> Vec<OrderedSetPartition> {
    enumerate_ordered_set_partitions(shape)
        .into_iter()
        .filter(|p| p.is_reduced())
        .collect()
}

/// A column-strict tableau; entries are zero-based content labels.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ColumnStrictTableau {
    shape: IntegerPartition,
    content: IntegerPartition,
    rows: Vec<Vec<u8>>,
}

impl ColumnStrictTableau {
    pub fn new(
        shape: IntegerPartition,
        content: IntegerPartition,
        rows: Vec<Vec<u8>>,
    ) -> Result<Self> {
        let bad = |m: &str| Error::InvalidPartition(format!("not a column-strict tableau: {m}"));
        if rows.len() != shape.len() || rows.iter().zip(shape.parts()).any(|(r, &p)| r.len() != p) {
            return Err(bad("row lengths differ from the shape"));
        }
        let mut counts = vec![0usize; content.len()];
        for r in rows.iter() {
            for &e in r {
                if e as usize >= content.len() {
                    return Err(bad("entry out of range"));
                }
                counts[e as usize] += 1;
            }
            if r.windows(2).any(|w| w[0] > w[1]) {
                return Err(bad("row decreases"));
            }
        }
        if counts != content.parts() {
            return Err(bad("content mismatch"));
        }
        for i in 1..rows.len() {
            if (0..rows[i].len()).any(|c| rows[i - 1][c] >= rows[i][c]) {
                return Err(bad("column not strictly increasing"));
            }
        }
        Ok(Self {
            shape,
            content,
            rows,
        })
    }

    pub fn shape(&self) -> &IntegerPartition {
        &self.shape
    }

    pub fn content(&self) -> &IntegerPartition {
        &self.content
    }

    pub fn rows(&self) -> &[Vec<u8>] {
        &self.rows
    }

    /// Entries read row by row, left to right.
    pub fn reading_word(&self) -> Vec<u8> {
        self.rows.iter().flatten().copied().collect()
    }

    /// Number of entries `a` in row `b`.
    pub fn count(&self, a: usize, b: usize) -> usize {
        self.rows[b].iter().filter(|&&e| e as usize == a).count()
    }
}

impl fmt::Display for ColumnStrictTableau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|e| (e + 1).to_string())
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect();
        write!(f, "{}", rows.join(" / "))
    }
}

/// All column-strict tableaux of shape `shape` and content `content`, in
/// lexicographic order of reading words.
pub fn column_strict_tableaux(
    shape: &IntegerPartition,
    content: &IntegerPartition,
) -> Vec<ColumnStrictTableau> {
    if shape.n() != content.n() {
        return Vec::new();
    }
    let cells: Vec<(usize, usize)> = shape
        .parts()
        .iter()
        .enumerate()
        .flat_map(|(r, &len)| (0..len).map(move |c| (r, c)))
        .collect();
    let mut rows: Vec<Vec<u8>> = shape.parts().iter().map(|&p| vec![0u8; p]).collect();
    let mut remaining = content.parts().to_vec();
    let mut out = Vec::new();

    fn rec(
        idx: usize,
        cells: &[(usize, usize)],
        rows: &mut Vec<Vec<u8>>,
        remaining: &mut Vec<usize>,
        shape: &IntegerPartition,
        content: &IntegerPartition,
        out: &mut Vec<ColumnStrictTableau>,
    ) {
        if idx == cells.len() {
            out.push(ColumnStrictTableau {
                shape: shape.clone(),
                content: content.clone(),
                rows: rows.clone(),
            });
            return;
        }
        let (r, c) = cells[idx];
        let lo_row = if c > 0 { rows[r][c - 1] as usize } else { 0 };
        let lo_col = if r > 0 {
            rows[r - 1][c] as usize + 1
        } else {
            0
        };
        for e in lo_row.max(lo_col)..remaining.len() {
            if remaining[e] == 0 {
                continue;
            }
            remaining[e] -= 1;
            rows[r][c] = e as u8;
            rec(idx + 1, cells, rows, remaining, shape, content, out);
            remaining[e] += 1;
        }
    }

    rec(
        0,
        &cells,
        &mut rows,
        &mut remaining,
        shape,
        content,
        &mut out,
    );
    out
}

/// The Kostka number `K_{γ,ν}`: tableaux of shape `ν` with content `γ`.
pub fn kostka(content: &IntegerPartition, shape: &IntegerPartition) -> usize {
    column_strict_tableaux(shape, content).len()
}

/// `ξ_T`: element `j` goes to block `r` when the `j`-th box in reading order holds `r`.
pub fn tableau_to_set_partition(t: &ColumnStrictTableau) -> OrderedSetPartition {
    OrderedSetPartition {
        row_word: t.reading_word(),
        sizes: t.content.parts().to_vec(),
    }
}
