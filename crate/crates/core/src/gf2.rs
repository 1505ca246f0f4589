//! Linear algebra over GF(2).
//!
//! Two representations are used: [`SparseBinaryMatrix`] (sorted row supports)
//! for parity-check matrices and products, and packed 64-bit words for
//! vectors and for Gaussian elimination.

use std::collections::VecDeque;
use std::fmt;
use std::ops::{BitXor, BitXorAssign};

use crate::error::{Error, Result};

const WORD_BITS: usize = 64;

fn word_count(len: usize) -> usize {
    len.div_ceil(WORD_BITS)
}

/// Fixed-length packed bit vector.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; word_count(len)],
        }
    }

    /// Builds a vector of length `len` with ones at `support`. Repeated
    /// indices cancel in pairs.
    pub fn from_support(len: usize, support: &[usize]) -> Result<Self> {
        let mut v = Self::zeros(len);
        for &i in support {
            if i >= len {
                return Err(Error::invalid(format!(
                    "bit index {i} out of range for length {len}"
                )));
            }
            v.flip(i);
        }
        Ok(v)
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.set(i, true);
            }
        }
        v
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// # Panics
    ///
    /// Panics if `i >= self.len()`.
    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let mask = 1u64 << (i % WORD_BITS);
        if value {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        self.words[i / WORD_BITS] ^= 1u64 << (i % WORD_BITS);
    }

    pub fn clear(&mut self) {
        self.words.iter_mut().for_each(|w| *w = 0);
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Indices of the set bits, ascending.
    pub fn support(&self) -> Vec<usize> {
        self.iter_ones().collect()
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut word = w;
            std::iter::from_fn(move || {
                if word == 0 {
                    return None;
                }
                let tz = word.trailing_zeros() as usize;
                word &= word - 1;
                Some(wi * WORD_BITS + tz)
            })
        })
    }

    /// Number of positions where either `self` or `other` differs from zero,
    /// i.e. the weight of the bitwise OR.
    pub fn union_weight(&self, other: &BitVector) -> usize {
        assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a | b).count_ones() as usize)
            .sum()
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }

    fn xor_words(&mut self, other: &[u64]) {
        for (a, b) in self.words.iter_mut().zip(other) {
            *a ^= b;
        }
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector[{}]{{", self.len)?;
        for (k, i) in self.iter_ones().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

impl BitXorAssign<&BitVector> for BitVector {
    fn bitxor_assign(&mut self, rhs: &BitVector) {
        assert_eq!(self.len, rhs.len, "length mismatch in xor");
        self.xor_words(&rhs.words);
    }
}

impl BitXor<&BitVector> for &BitVector {
    type Output = BitVector;

    fn bitxor(self, rhs: &BitVector) -> BitVector {
        let mut out = self.clone();
        out ^= rhs;
        out
    }
}

/// Binary matrix stored as a sorted column support per row.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SparseBinaryMatrix {
    rows: usize,
    cols: usize,
    row_support: Vec<Vec<usize>>,
}

impl fmt::Debug for SparseBinaryMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SparseBinaryMatrix")
            .field("rows", &self.rows)
            .field("cols", &self.cols)
            .field("row_support", &self.row_support)
            .finish()
    }
}

impl SparseBinaryMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            row_support: vec![Vec::new(); rows],
        }
    }

    pub fn identity(size: usize) -> Self {
        Self {
            rows: size,
            cols: size,
            row_support: (0..size).map(|i| vec![i]).collect(),
        }
    }

    /// Builds a matrix from per-row column lists. Entries are sorted and
    /// duplicates cancel modulo 2.
    pub fn from_rows(rows: usize, cols: usize, supports: Vec<Vec<usize>>) -> Result<Self> {
        if supports.len() != rows {
            return Err(Error::invalid(format!(
                "expected {rows} row supports, got {}",
                supports.len()
            )));
        }
        let mut row_support = Vec::with_capacity(rows);
        for (r, mut s) in supports.into_iter().enumerate() {
            if let Some(&c) = s.iter().find(|&&c| c >= cols) {
                return Err(Error::invalid(format!(
                    "row {r}: column {c} out of range for {cols} columns"
                )));
            }
            s.sort_unstable();
            row_support.push(cancel_pairs(s));
        }
        Ok(Self {
            rows,
            cols,
            row_support,
        })
    }

    pub fn from_dense(dense: &[Vec<u8>]) -> Result<Self> {
        let rows = dense.len();
        let cols = dense.first().map_or(0, Vec::len);
        let mut supports = Vec::with_capacity(rows);
        for (r, row) in dense.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::invalid(format!("row {r} has ragged length")));
            }
            supports.push(
                row.iter()
                    .enumerate()
                    .filter(|(_, &b)| b & 1 == 1)
                    .map(|(c, _)| c)
                    .collect(),
            );
        }
        Self::from_rows(rows, cols, supports)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[usize] {
        &self.row_support[r]
    }

    pub fn row_supports(&self) -> &[Vec<usize>] {
        &self.row_support
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.row_support[r].binary_search(&c).is_ok()
    }

    pub fn nnz(&self) -> usize {
        self.row_support.iter().map(Vec::len).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.row_support.iter().all(Vec::is_empty)
    }

    pub fn row_vector(&self, r: usize) -> BitVector {
        let mut v = BitVector::zeros(self.cols);
        for &c in &self.row_support[r] {
            v.set(c, true);
        }
        v
    }

    pub fn row_weights(&self) -> Vec<usize> {
        self.row_support.iter().map(Vec::len).collect()
    }

    pub fn col_weights(&self) -> Vec<usize> {
        let mut w = vec![0; self.cols];
        for row in &self.row_support {
            for &c in row {
                w[c] += 1;
            }
        }
        w
    }

    /// Row lists per column (the transpose's row supports).
    pub fn col_supports(&self) -> Vec<Vec<usize>> {
        let mut cols = vec![Vec::new(); self.cols];
        for (r, row) in self.row_support.iter().enumerate() {
            for &c in row {
                cols[c].push(r);
            }
        }
        cols
    }

    pub fn transpose(&self) -> Self {
        Self {
            rows: self.cols,
            cols: self.rows,
            row_support: self.col_supports(),
        }
    }

    /// Permutes columns: column `c` of `self` becomes column `perm[c]`.
    pub fn permute_columns(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.cols {
            return Err(Error::invalid("permutation length differs from column count"));
        }
        let supports = self
            .row_support
            .iter()
            .map(|row| row.iter().map(|&c| perm[c]).collect())
            .collect();
        Self::from_rows(self.rows, self.cols, supports)
    }

    /// Stacks `self` on top of `other`.
    pub fn vstack(&self, other: &Self) -> Result<Self> {
        if self.cols != other.cols {
            return Err(Error::invalid("vstack: column counts differ"));
        }
        let mut row_support = self.row_support.clone();
        row_support.extend(other.row_support.iter().cloned());
        Ok(Self {
            rows: self.rows + other.rows,
            cols: self.cols,
            row_support,
        })
    }

    /// Entry-wise sum over GF(2).
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::invalid("add: shapes differ"));
        }
        let supports = self
            .row_support
            .iter()
            .zip(&other.row_support)
            .map(|(a, b)| a.iter().chain(b).copied().collect())
            .collect();
        Self::from_rows(self.rows, self.cols, supports)
    }
}

fn cancel_pairs(sorted: Vec<usize>) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::with_capacity(sorted.len());
    for c in sorted {
        if out.last() == Some(&c) {
            out.pop();
        } else {
            out.push(c);
        }
    }
    out
}

/// `P x P` circulant permutation matrix with ones at `(i, (i + shift) mod P)`.
pub fn cpm_expand(shift: i64, size: usize) -> Result<SparseBinaryMatrix> {
    if size == 0 {
        return Err(Error::invalid("circulant size must be at least 1"));
    }
    let s = reduce_shift(shift, size);
    Ok(SparseBinaryMatrix {
        rows: size,
        cols: size,
        row_support: (0..size).map(|i| vec![(i + s) % size]).collect(),
    })
}

/// Reduces an arbitrary shift into `[0, size)`.
pub fn reduce_shift(shift: i64, size: usize) -> usize {
    shift.rem_euclid(size as i64) as usize
}

pub fn mat_mul_mod2(a: &SparseBinaryMatrix, b: &SparseBinaryMatrix) -> Result<SparseBinaryMatrix> {
    if a.cols != b.rows {
        return Err(Error::invalid(format!(
            "mat_mul: {}x{} times {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let mut acc = vec![false; b.cols];
    let mut touched = Vec::new();
    let mut supports = Vec::with_capacity(a.rows);
    for row in &a.row_support {
        for &k in row {
            for &c in &b.row_support[k] {
                if !acc[c] {
                    touched.push(c);
                }
                acc[c] = !acc[c];
            }
        }
        let mut out: Vec<usize> = touched.iter().copied().filter(|&c| acc[c]).collect();
        out.sort_unstable();
        out.dedup();
        for &c in &touched {
            acc[c] = false;
        }
        touched.clear();
        supports.push(out);
    }
    Ok(SparseBinaryMatrix {
        rows: a.rows,
        cols: b.cols,
        row_support: supports,
    })
}

pub fn mat_vec_mod2(m: &SparseBinaryMatrix, v: &BitVector) -> Result<BitVector> {
    if v.len() != m.cols {
        return Err(Error::invalid(format!(
            "mat_vec: vector length {} but matrix has {} columns",
            v.len(),
            m.cols
        )));
    }
    let mut out = BitVector::zeros(m.rows);
    for (r, row) in m.row_support.iter().enumerate() {
        let parity = row.iter().filter(|&&c| v.get(c)).count() & 1;
        if parity == 1 {
            out.set(r, true);
        }
    }
    Ok(out)
}

/// Reduced basis of a matrix's row space, kept in echelon form with one
/// pivot column per basis row.
#[derive(Clone, Debug)]
pub struct RowSpace {
    cols: usize,
    basis: Vec<BitVector>,
    pivots: Vec<usize>,
}

impl RowSpace {
    pub fn new(m: &SparseBinaryMatrix) -> Self {
        let mut space = Self {
            cols: m.cols,
            basis: Vec::new(),
            pivots: Vec::new(),
        };
        for r in 0..m.rows {
            space.insert(m.row_vector(r));
        }
        space
    }

    /// Adds `v` to the span; returns whether the rank grew.
    fn insert(&mut self, mut v: BitVector) -> bool {
        self.reduce(&mut v);
        let lead = v.iter_ones().next();
        match lead {
            None => false,
            Some(pivot) => {
                // keep the basis fully reduced on pivot columns
                for b in &mut self.basis {
                    if b.get(pivot) {
                        b.xor_words(v.words());
                    }
                }
                self.basis.push(v);
                self.pivots.push(pivot);
                true
            }
        }
    }

    fn reduce(&self, v: &mut BitVector) {
        for (b, &p) in self.basis.iter().zip(&self.pivots) {
            if v.get(p) {
                v.xor_words(b.words());
            }
        }
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn basis(&self) -> &[BitVector] {
        &self.basis
    }

    pub fn contains(&self, v: &BitVector) -> Result<bool> {
        if v.len() != self.cols {
            return Err(Error::invalid(format!(
                "row-space test: vector length {} but {} columns",
                v.len(),
                self.cols
            )));
        }
        if v.is_zero() {
            return Ok(true);
        }
        let mut w = v.clone();
        self.reduce(&mut w);
        Ok(w.is_zero())
    }
}

pub fn gf2_rank(m: &SparseBinaryMatrix) -> usize {
    RowSpace::new(m).rank()
}

pub fn in_row_space(v: &BitVector, m: &SparseBinaryMatrix) -> Result<bool> {
    if v.len() != m.cols {
        return Err(Error::invalid(format!(
            "row-space test: vector length {} but matrix has {} columns",
            v.len(),
            m.cols
        )));
    }
    RowSpace::new(m).contains(v)
}

/// Shortest cycle length in a Tanner graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Girth {
    Finite(usize),
    Unbounded,
}

impl Girth {
    pub fn finite(self) -> Option<usize> {
        match self {
            Girth::Finite(g) => Some(g),
            Girth::Unbounded => None,
        }
    }
}

impl fmt::Display for Girth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Girth::Finite(g) => write!(f, "{g}"),
            Girth::Unbounded => write!(f, "inf"),
        }
    }
}

/// Girth of the Tanner graph of `m`, by BFS from every variable node.
pub fn girth(m: &SparseBinaryMatrix) -> Girth {
    let roots: Vec<usize> = (0..m.cols).collect();
    girth_from_roots(m, &roots)
}

/// Shortest cycle through any of the given variable nodes.
///
/// When `roots` meets every orbit of a graph automorphism group (for example
/// one column per circulant block of a quasi-cyclic matrix), the result equals
/// [`girth`].
pub fn girth_from_roots(m: &SparseBinaryMatrix, roots: &[usize]) -> Girth {
    let n = m.cols;
    let cols = m.col_supports();
    // node ids: variables 0..n, checks n..n+rows
    let neighbors = |node: usize| -> &[usize] {
        if node < n {
            &cols[node]
        } else {
            &m.row_support[node - n]
        }
    };
    let to_id = |from: usize, nb: usize| if from < n { nb + n } else { nb };

    let total = n + m.rows;
    let mut dist = vec![usize::MAX; total];
    let mut parent = vec![usize::MAX; total];
    let mut visited = Vec::new();
    let mut best = usize::MAX;
    let mut queue = VecDeque::new();

    for &root in roots {
        if root >= n {
            continue;
        }
        dist[root] = 0;
        visited.push(root);
        queue.push_back(root);
        'bfs: while let Some(u) = queue.pop_front() {
            // any cycle closed from here is at least 2*dist[u]+1 long
            if 2 * dist[u] + 1 >= best {
                break;
            }
            for &nb in neighbors(u) {
                let w = to_id(u, nb);
                if w == parent[u] {
                    continue;
                }
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    parent[w] = u;
                    visited.push(w);
                    queue.push_back(w);
                } else {
                    let len = dist[u] + dist[w] + 1;
                    if len < best {
                        best = len;
                    }
                    if 2 * dist[u] + 1 >= best {
                        break 'bfs;
                    }
                }
            }
        }
        for &v in &visited {
            dist[v] = usize::MAX;
            parent[v] = usize::MAX;
        }
        visited.clear();
        queue.clear();
    }
    if best == usize::MAX {
        Girth::Unbounded
    } else {
        Girth::Finite(best)
    }
}

/// True when two columns share at least two rows.
pub fn has_four_cycle(m: &SparseBinaryMatrix) -> bool {
    let mut seen = std::collections::HashSet::new();
    for row in &m.row_support {
        for (i, &a) in row.iter().enumerate() {
            for &b in &row[i + 1..] {
                if !seen.insert((a, b)) {
                    return true;
                }
            }
        }
    }
    false
}
