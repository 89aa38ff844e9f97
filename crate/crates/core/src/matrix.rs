//! Column-packed `s`-matrices, the standard configurations, and the text file format.
//!
//! A column is stored as a `u64` holding 2 bits per entry, with row 1 in the
//! most significant used slot. Numeric order of the packed words is therefore
//! the lexicographic base-`s` order of the columns read top to bottom, which is
//! the canonical column order used everywhere in this crate.

use std::fmt;

use thiserror::Error;

/// Largest supported row count (2 bits per entry in one `u64`).
pub const MAX_ROWS: usize = 32;

/// Largest supported alphabet size for the packed encoding.
pub const MAX_ALPHABET: u8 = 4;

/// Upper limit on the number of columns [`SMatrix::universe`] will materialize (`3^16`).
pub const MAX_UNIVERSE: u64 = 43_046_721;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MatrixError {
    #[error("alphabet size {0} unsupported (need 2 <= s <= {MAX_ALPHABET})")]
    Alphabet(u8),
    #[error("row count {0} unsupported (need 1 <= m <= {MAX_ROWS})")]
    Rows(usize),
    #[error("column {column} has length {len}, expected {m}")]
    ColumnLength { column: usize, len: usize, m: usize },
    #[error("entry {digit} at row {row}, column {column} is not below s = {s}")]
    Digit { row: usize, column: usize, digit: u8, s: u8 },
    #[error("{s}^{m} columns exceeds the universe limit of {MAX_UNIVERSE}")]
    Overflow { m: usize, s: u8 },
    #[error("line {line}, column {column}: {msg}")]
    Parse { line: usize, column: usize, msg: String },
}

/// One packed column. Interpreting it requires the row count of its matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Column(pub u64);

impl Column {
    #[inline]
    fn shift(m: usize, row: usize) -> u32 {
        debug_assert!(row >= 1 && row <= m);
        (2 * (m - row)) as u32
    }

    /// Packs digits given top to bottom. Digits must fit in 2 bits.
    pub fn from_digits(digits: &[u8]) -> Self {
        let m = digits.len();
        let mut code = 0u64;
        for (idx, &d) in digits.iter().enumerate() {
            code |= (d as u64 & 3) << Self::shift(m, idx + 1);
        }
        Column(code)
    }

    /// Entry at 1-indexed `row` of an `m`-rowed column.
    #[inline]
    pub fn digit(self, m: usize, row: usize) -> u8 {
        ((self.0 >> Self::shift(m, row)) & 3) as u8
    }

    #[inline]
    pub fn with_digit(self, m: usize, row: usize, d: u8) -> Self {
        let sh = Self::shift(m, row);
        Column((self.0 & !(3u64 << sh)) | ((d as u64 & 3) << sh))
    }

    pub fn digits(self, m: usize) -> Vec<u8> {
        (1..=m).map(|row| self.digit(m, row)).collect()
    }

    /// Entries of rows `i` and `j` as a 2-bit pattern index `2*v_i + v_j`
    /// when both are 0/1, or `None` if either entry is 2 or larger.
    #[inline]
    pub fn pair_pattern(self, m: usize, i: usize, j: usize) -> Option<usize> {
        let x = self.digit(m, i);
        let y = self.digit(m, j);
        if x > 1 || y > 1 {
            None
        } else {
            Some((x as usize) * 2 + y as usize)
        }
    }
}

/// An `m`-rowed matrix over `{0, .., s-1}`, stored column by column.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SMatrix {
    m: usize,
    s: u8,
    cols: Vec<Column>,
}

fn check_shape(m: usize, s: u8) -> Result<(), MatrixError> {
    if !(2..=MAX_ALPHABET).contains(&s) {
        return Err(MatrixError::Alphabet(s));
    }
    if m == 0 || m > MAX_ROWS {
        return Err(MatrixError::Rows(m));
    }
    Ok(())
}

impl SMatrix {
    /// An `m`-rowed matrix with no columns.
    pub fn empty(m: usize, s: u8) -> Result<Self, MatrixError> {
        check_shape(m, s)?;
        Ok(SMatrix { m, s, cols: Vec::new() })
    }

    /// Builds a matrix from explicit columns (each a top-to-bottom digit list).
    pub fn from_columns<C: AsRef<[u8]>>(m: usize, s: u8, columns: &[C]) -> Result<Self, MatrixError> {
        check_shape(m, s)?;
        let mut cols = Vec::with_capacity(columns.len());
        for (cidx, col) in columns.iter().enumerate() {
            let col = col.as_ref();
            if col.len() != m {
                return Err(MatrixError::ColumnLength { column: cidx + 1, len: col.len(), m });
            }
            if let Some((ridx, &d)) = col.iter().enumerate().find(|(_, &d)| d >= s) {
                return Err(MatrixError::Digit { row: ridx + 1, column: cidx + 1, digit: d, s });
            }
            cols.push(Column::from_digits(col));
        }
        Ok(SMatrix { m, s, cols })
    }

    /// Builds a matrix from packed columns, validating every entry.
    pub fn from_packed(m: usize, s: u8, cols: Vec<Column>) -> Result<Self, MatrixError> {
        check_shape(m, s)?;
        if m < MAX_ROWS && cols.iter().any(|c| c.0 >> (2 * m) != 0) {
            return Err(MatrixError::Parse { line: 0, column: 0, msg: "packed column has bits above row count".into() });
        }
        for (cidx, c) in cols.iter().enumerate() {
            for row in 1..=m {
                let d = c.digit(m, row);
                if d >= s {
                    return Err(MatrixError::Digit { row, column: cidx + 1, digit: d, s });
                }
            }
        }
        Ok(SMatrix { m, s, cols })
    }

    /// All `s^m` distinct columns in canonical order.
    pub fn universe(m: usize, s: u8) -> Result<Self, MatrixError> {
        check_shape(m, s)?;
        let total = (s as u64).checked_pow(m as u32).filter(|&t| t <= MAX_UNIVERSE);
        let total = total.ok_or(MatrixError::Overflow { m, s })?;
        let mut cols = Vec::with_capacity(total as usize);
        let mut digits = vec![0u8; m];
        for _ in 0..total {
            cols.push(Column::from_digits(&digits));
            // odometer increment, last row fastest
            for d in digits.iter_mut().rev() {
                *d += 1;
                if *d < s {
                    break;
                }
                *d = 0;
            }
        }
        Ok(SMatrix { m, s, cols })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn s(&self) -> u8 {
        self.s
    }

    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cols.is_empty()
    }

    pub fn columns(&self) -> &[Column] {
        &self.cols
    }

    pub fn into_columns(self) -> Vec<Column> {
        self.cols
    }

    /// Entry at 1-indexed `(row, col)`.
    pub fn entry(&self, row: usize, col: usize) -> u8 {
        self.cols[col - 1].digit(self.m, row)
    }

    /// True iff no two columns are identical.
    pub fn is_simple(&self) -> bool {
        let mut sorted = self.cols.clone();
        sorted.sort_unstable();
        sorted.windows(2).all(|w| w[0] != w[1])
    }

    /// Same columns, sorted into canonical order.
    pub fn canonical(&self) -> Self {
        let mut cols = self.cols.clone();
        cols.sort_unstable();
        SMatrix { m: self.m, s: self.s, cols }
    }

    pub fn is_canonical(&self) -> bool {
        self.cols.windows(2).all(|w| w[0] <= w[1])
    }

    /// Membership test; requires a canonical matrix.
    pub fn contains_column(&self, col: Column) -> bool {
        debug_assert!(self.is_canonical());
        self.cols.binary_search(&col).is_ok()
    }

    /// Column concatenation `[self | other]`.
    pub fn concat(&self, other: &SMatrix) -> Self {
        assert_eq!(self.m, other.m, "row counts differ");
        let mut cols = self.cols.clone();
        cols.extend_from_slice(&other.cols);
        SMatrix { m: self.m, s: self.s.max(other.s), cols }
    }

    /// `p` concatenated copies.
    pub fn repeat(&self, p: usize) -> Self {
        let mut cols = Vec::with_capacity(self.cols.len() * p);
        for _ in 0..p {
            cols.extend_from_slice(&self.cols);
        }
        SMatrix { m: self.m, s: self.s, cols }
    }

    /// Row `k` of the result is row `perm[k-1]` of `self` (both 1-indexed).
    pub fn permute_rows(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.m, "permutation length");
        let m = self.m;
        let cols = self
            .cols
            .iter()
            .map(|&c| {
                let mut out = Column(0);
                for (k, &src) in perm.iter().enumerate() {
                    out = out.with_digit(m, k + 1, c.digit(m, src));
                }
                out
            })
            .collect();
        SMatrix { m, s: self.s, cols }
    }

    /// Swaps digits 0 and 1 everywhere; other digits are untouched.
    pub fn swap_zero_one(&self) -> Self {
        let m = self.m;
        let cols = self
            .cols
            .iter()
            .map(|&c| {
                let mut out = c;
                for row in 1..=m {
                    match c.digit(m, row) {
                        0 => out = out.with_digit(m, row, 1),
                        1 => out = out.with_digit(m, row, 0),
                        _ => {}
                    }
                }
                out
            })
            .collect();
        SMatrix { m, s: self.s, cols }
    }

    /// Restriction to the listed 1-indexed rows, in the given order.
    pub fn restrict_rows(&self, rows: &[usize]) -> Self {
        let m = self.m;
        let k = rows.len();
        let cols = self
            .cols
            .iter()
            .map(|&c| {
                let mut out = Column(0);
                for (idx, &r) in rows.iter().enumerate() {
                    out = out.with_digit(k, idx + 1, c.digit(m, r));
                }
                out
            })
            .collect();
        SMatrix { m: k, s: self.s, cols }
    }
}

impl fmt::Display for SMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&write_matrix(self))
    }
}

/// Parses the matrix text format:
///
/// ```text
/// # optional comments
/// m n s
/// <m lines of n digits>
/// ```
///
/// Row `i` of the file holds entry `i` of every column; column `j` is the
/// vertical slice at character position `j`.
pub fn read_matrix(text: &str) -> Result<SMatrix, MatrixError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim_start().starts_with('#'));

    let (hline, header) = loop {
        match lines.next() {
            Some((_, l)) if l.trim().is_empty() => continue,
            Some(x) => break x,
            None => return Err(MatrixError::Parse { line: 0, column: 0, msg: "missing header line".into() }),
        }
    };
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 3 {
        return Err(MatrixError::Parse {
            line: hline + 1,
            column: 1,
            msg: format!("header needs \"m n s\", found {} fields", fields.len()),
        });
    }
    let num = |idx: usize| -> Result<usize, MatrixError> {
        fields[idx].parse::<usize>().map_err(|_| MatrixError::Parse {
            line: hline + 1,
            column: header.find(fields[idx]).unwrap_or(0) + 1,
            msg: format!("bad number {:?}", fields[idx]),
        })
    };
    let (m, n, s) = (num(0)?, num(1)?, num(2)?);
    let s = u8::try_from(s).map_err(|_| MatrixError::Alphabet(u8::MAX))?;
    check_shape(m, s)?;

    let mut cols = vec![Column(0); n];
    for row in 1..=m {
        let (lno, line) = lines.next().ok_or_else(|| MatrixError::Parse {
            line: text.lines().count() + 1,
            column: 1,
            msg: format!("expected {m} matrix rows, found {}", row - 1),
        })?;
        let line = line.trim_end_matches('\r');
        let bytes = line.as_bytes();
        if bytes.len() != n {
            return Err(MatrixError::Parse {
                line: lno + 1,
                column: bytes.len().min(n) + 1,
                msg: format!("row has {} entries, expected {n}", bytes.len()),
            });
        }
        for (cidx, &b) in bytes.iter().enumerate() {
            if !b.is_ascii_digit() {
                return Err(MatrixError::Parse {
                    line: lno + 1,
                    column: cidx + 1,
                    msg: format!("unexpected character {:?}", b as char),
                });
            }
            let d = b - b'0';
            if d >= s {
                return Err(MatrixError::Digit { row, column: cidx + 1, digit: d, s });
            }
            cols[cidx] = cols[cidx].with_digit(m, row, d);
        }
    }
    if let Some((lno, l)) = lines.find(|(_, l)| !l.trim().is_empty()) {
        return Err(MatrixError::Parse {
            line: lno + 1,
            column: 1,
            msg: format!("trailing content {:?}", l.trim()),
        });
    }
    Ok(SMatrix { m, s, cols })
}

/// Writes the canonical form of `a` in the text format (no comments, trailing newline).
pub fn write_matrix(a: &SMatrix) -> String {
    let canon = a.canonical();
    let n = canon.ncols();
    let mut out = format!("{} {} {}\n", canon.m, n, canon.s);
    out.reserve(canon.m * (n + 1));
    for row in 1..=canon.m {
        for c in &canon.cols {
            out.push((b'0' + c.digit(canon.m, row)) as char);
        }
        out.push('\n');
    }
    out
}

/// A forbidden configuration, either explicit or one of the standard families.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConfigurationF {
    Explicit(SMatrix),
    /// `a` columns 00, `b` columns 10, `c` columns 01, `d` columns 11.
    Fabcd { a: usize, b: usize, c: usize, d: usize },
    /// `p` copies of `K_2`.
    PK2(usize),
    /// `p` copies of `I_2`.
    PI2(usize),
    /// All `2^k` binary columns on `k` rows.
    K(usize),
    /// The `k x k` identity.
    I(usize),
}

impl ConfigurationF {
    /// The column-type counts `(a, b, c, d)` when this is a 2-rowed 0/1 configuration.
    pub fn as_fabcd(&self) -> Option<(usize, usize, usize, usize)> {
        match *self {
            ConfigurationF::Fabcd { a, b, c, d } => Some((a, b, c, d)),
            ConfigurationF::PK2(p) => Some((p, p, p, p)),
            ConfigurationF::PI2(p) => Some((0, p, p, 0)),
            ConfigurationF::K(2) => Some((1, 1, 1, 1)),
            ConfigurationF::I(2) => Some((0, 1, 1, 0)),
            ConfigurationF::Explicit(ref f) if f.m() == 2 => {
                let mut counts = [0usize; 4];
                for &c in f.columns() {
                    counts[c.pair_pattern(2, 1, 2)?] += 1;
                }
                // pattern index is 2*top + bottom: 00, 01, 10, 11
                Some((counts[0], counts[2], counts[1], counts[3]))
            }
            _ => None,
        }
    }

    /// The explicit 0/1 matrix this configuration denotes.
    pub fn expand(&self) -> SMatrix {
        match *self {
            ConfigurationF::Explicit(ref f) => f.clone(),
            ConfigurationF::Fabcd { a, b, c, d } => fabcd_matrix(a, b, c, d),
            ConfigurationF::PK2(p) => ConfigurationF::K(2).expand().repeat(p),
            ConfigurationF::PI2(p) => ConfigurationF::I(2).expand().repeat(p),
            ConfigurationF::K(k) => {
                
                SMatrix::universe(k, 2).expect("K_k needs 1 <= k <= 32 and 2^k within the universe limit")
            }
            ConfigurationF::I(k) => {
                let cols: Vec<Vec<u8>> = (0..k).map(|j| (0..k).map(|i| u8::from(i == j)).collect()).collect();
                SMatrix::from_columns(k, 2, &cols).expect("identity needs 1 <= k <= 32")
            }
        }
    }
}

fn fabcd_matrix(a: usize, b: usize, c: usize, d: usize) -> SMatrix {
    let mut cols: Vec<[u8; 2]> = Vec::with_capacity(a + b + c + d);
    cols.extend(std::iter::repeat_n([0, 0], a));
    cols.extend(std::iter::repeat_n([1, 0], b));
    cols.extend(std::iter::repeat_n([0, 1], c));
    cols.extend(std::iter::repeat_n([1, 1], d));
    SMatrix::from_columns(2, 2, &cols).expect("2-rowed binary columns are valid")
}
