//! Logical-matrix calculus: Kronecker and semi-tensor products, canonical
//! structure matrices and the state index encoding.
//!
//! A [`LogicalMatrix`] keeps only the 1-based row index of the single 1 in
//! each column, so `δ_4[2 4 1 3]` is `rows = 4, cols = [2, 4, 1, 3]`.
//! [`RealMatrix`] is the dense integer carrier used as a reference oracle.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `2^k`, refusing shifts that would overflow.
pub fn pow2(k: usize) -> usize {
    assert!(k < usize::BITS as usize, "2^{k} overflows usize");
    1usize << k
}

/// Exponent `k` with `2^k = v`, or `None` if `v` is not a power of two.
pub fn log2_exact(v: usize) -> Option<usize> {
    if v.is_power_of_two() {
        Some(v.trailing_zeros() as usize)
    } else {
        None
    }
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

/// Dense exact-integer matrix, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RealMatrix {
    rows: usize,
    cols: usize,
    data: Vec<i64>,
}

impl RealMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<i64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch("matrix dimensions must be positive".into()));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!("{} entries for a {rows}x{cols} matrix", data.len())));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Entry at 0-based `(r, c)`.
    pub fn get(&self, r: usize, c: usize) -> i64 {
        self.data[r * self.cols + c]
    }

    fn set(&mut self, r: usize, c: usize, v: i64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn kron(&self, b: &RealMatrix) -> RealMatrix {
        let mut out = RealMatrix::zeros(self.rows * b.rows, self.cols * b.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a == 0 {
                    continue;
                }
                for k in 0..b.rows {
                    for l in 0..b.cols {
                        out.set(i * b.rows + k, j * b.cols + l, a * b.get(k, l));
                    }
                }
            }
        }
        out
    }

    /// Ordinary product; `None` when not conformable.
    pub fn matmul(&self, b: &RealMatrix) -> Option<RealMatrix> {
        if self.cols != b.rows {
            return None;
        }
        let mut out = RealMatrix::zeros(self.rows, b.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..b.cols {
                    let v = out.get(i, j) + a * b.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        Some(out)
    }

    /// Semi-tensor product `(A ⊗ I_{t/n})(B ⊗ I_{t/p})` with `t = lcm(n, p)`.
    pub fn stp(&self, b: &RealMatrix) -> RealMatrix {
        let t = lcm(self.cols, b.rows);
        let left = self.kron(&RealMatrix::identity(t / self.cols));
        let right = b.kron(&RealMatrix::identity(t / b.rows));
        left.matmul(&right).expect("padded factors are conformable")
    }
}

/// Column-indexed logical matrix `δ_rows[c_1 … c_k]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawLogical", into = "RawLogical")]
pub struct LogicalMatrix {
    rows: usize,
    cols: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct RawLogical {
    rows: usize,
    cols: Vec<usize>,
}

impl TryFrom<RawLogical> for LogicalMatrix {
    type Error = Error;
    fn try_from(raw: RawLogical) -> Result<Self> {
        LogicalMatrix::new(raw.rows, raw.cols)
    }
}

impl From<LogicalMatrix> for RawLogical {
    fn from(m: LogicalMatrix) -> Self {
        RawLogical { rows: m.rows, cols: m.cols }
    }
}

impl LogicalMatrix {
    pub fn new(rows: usize, cols: Vec<usize>) -> Result<Self> {
        if rows == 0 {
            return Err(Error::DimensionMismatch("logical matrix needs at least one row".into()));
        }
        if cols.is_empty() {
            return Err(Error::DimensionMismatch("logical matrix needs at least one column".into()));
        }
        if let Some(&bad) = cols.iter().find(|&&c| c == 0 || c > rows) {
            return Err(Error::IndexOutOfRange { what: "row", index: bad, bound: rows });
        }
        Ok(Self { rows, cols })
    }

    /// `δ_rows[cols…]`.
    ///
    /// # Panics
    /// If any column index lies outside `1..=rows`.
    pub fn delta(rows: usize, cols: &[usize]) -> Self {
        Self::new(rows, cols.to_vec()).expect("valid delta matrix")
    }

    pub fn identity(n: usize) -> Self {
        Self { rows: n, cols: (1..=n).collect() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    pub fn cols(&self) -> &[usize] {
        &self.cols
    }

    /// Row index of the 1 in column `j` (both 1-based).
    pub fn col(&self, j: usize) -> usize {
        self.cols[j - 1]
    }

    pub fn to_dense(&self) -> RealMatrix {
        let mut m = RealMatrix::zeros(self.rows, self.cols.len());
        for (j, &c) in self.cols.iter().enumerate() {
            m.set(c - 1, j, 1);
        }
        m
    }

    /// Reads a dense matrix back; fails unless every column is a unit vector.
    pub fn from_dense(m: &RealMatrix) -> Result<Self> {
        let mut cols = Vec::with_capacity(m.cols);
        for j in 0..m.cols {
            let mut hit = None;
            for i in 0..m.rows {
                match m.get(i, j) {
                    0 => {}
                    1 if hit.is_none() => hit = Some(i + 1),
                    _ => return Err(Error::NotLogicalResult),
                }
            }
            cols.push(hit.ok_or(Error::NotLogicalResult)?);
        }
        Ok(Self { rows: m.rows, cols })
    }

    pub fn kron(&self, b: &LogicalMatrix) -> LogicalMatrix {
        let mut cols = Vec::with_capacity(self.ncols() * b.ncols());
        for &a in &self.cols {
            for &c in &b.cols {
                cols.push((a - 1) * b.rows + c);
            }
        }
        LogicalMatrix { rows: self.rows * b.rows, cols }
    }

    /// Ordinary product `self · b`.
    pub fn compose(&self, b: &LogicalMatrix) -> Result<LogicalMatrix> {
        if self.ncols() != b.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows,
                self.ncols(),
                b.rows,
                b.ncols()
            )));
        }
        Ok(LogicalMatrix { rows: self.rows, cols: b.cols.iter().map(|&c| self.col(c)).collect() })
    }

    /// Semi-tensor product on the index form.
    ///
    /// Works for any dimensions: `B ⊗ I_β` maps column `(b-1)β + r` to
    /// `(B(b)-1)β + r`, and `A ⊗ I_α` does the same on the left, so the result
    /// is again logical.
    pub fn stp(&self, b: &LogicalMatrix) -> LogicalMatrix {
        let t = lcm(self.ncols(), b.rows);
        let alpha = t / self.ncols();
        let beta = t / b.rows;
        let mut cols = Vec::with_capacity(b.ncols() * beta);
        for &bc in &b.cols {
            for r in 0..beta {
                let mid = (bc - 1) * beta + r; // 0-based row of B ⊗ I_β
                let (a, r2) = (mid / alpha, mid % alpha);
                cols.push((self.cols[a] - 1) * alpha + r2 + 1);
            }
        }
        LogicalMatrix { rows: self.rows * alpha, cols }
    }

    /// Splits the columns into `count` equal consecutive blocks.
    pub fn blocks(&self, count: usize) -> Vec<&[usize]> {
        let width = self.ncols() / count;
        self.cols.chunks(width).collect()
    }
}

impl fmt::Display for LogicalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "δ_{}[", self.rows)?;
        for (i, c) in self.cols.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

/// Canonical basis vector `δ_dim^index`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DeltaVector {
    dim: usize,
    index: usize,
}

impl DeltaVector {
    pub fn new(dim: usize, index: usize) -> Result<Self> {
        if index == 0 || index > dim {
            return Err(Error::IndexOutOfRange { what: "basis", index, bound: dim });
        }
        Ok(Self { dim, index })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn as_matrix(&self) -> LogicalMatrix {
        LogicalMatrix { rows: self.dim, cols: vec![self.index] }
    }

    /// `self ⋉ other`, which for vectors is the Kronecker product.
    pub fn stp(&self, other: &DeltaVector) -> DeltaVector {
        DeltaVector { dim: self.dim * other.dim, index: (self.index - 1) * other.dim + other.index }
    }
}

impl From<DeltaVector> for LogicalMatrix {
    fn from(v: DeltaVector) -> Self {
        v.as_matrix()
    }
}

impl TryFrom<&LogicalMatrix> for DeltaVector {
    type Error = Error;
    fn try_from(m: &LogicalMatrix) -> Result<Self> {
        if m.ncols() != 1 {
            return Err(Error::DimensionMismatch(format!("{} columns, expected 1", m.ncols())));
        }
        DeltaVector::new(m.rows, m.cols[0])
    }
}

/// Logical operators with a fixed structure matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Operator {
    Negation,
    Conjunction,
    Disjunction,
}

pub fn structure_matrix(op: Operator) -> LogicalMatrix {
    match op {
        Operator::Negation => LogicalMatrix::delta(2, &[2, 1]),
        Operator::Conjunction => LogicalMatrix::delta(2, &[1, 2, 2, 2]),
        Operator::Disjunction => LogicalMatrix::delta(2, &[1, 1, 1, 2]),
    }
}

/// `ψ_n`, with `x ⋉ x = ψ_n ⋉ x` on `Δ_{2^n}`.
pub fn power_reducing_matrix(n: usize) -> LogicalMatrix {
    assert!(n >= 1, "power reducing matrix needs n >= 1");
    let size = pow2(n);
    let cols = (1..=size).map(|i| (i - 1) * size + i).collect();
    LogicalMatrix { rows: size * size, cols }
}

/// Dummy operator dropping a leading `k`-variable factor from a single
/// Boolean argument: `E ⋉ w ⋉ q = q`.
pub fn dummy_operator(k: usize) -> LogicalMatrix {
    dummy_operator_over(k, 1)
}

/// Dummy operator dropping a leading `k`-variable factor in front of an
/// `r`-variable argument.
pub fn dummy_operator_over(k: usize, r: usize) -> LogicalMatrix {
    assert!(k >= 1, "dummy operator needs k >= 1");
    let tail = pow2(r);
    let cols = (0..pow2(k)).flat_map(|_| 1..=tail).collect();
    LogicalMatrix { rows: tail, cols }
}

/// `true ↦ δ_2^1`, leftmost variable most significant.
pub fn encode_state(bits: &[bool]) -> DeltaVector {
    let n = bits.len();
    let index = bits.iter().enumerate().map(|(i, &b)| if b { 0 } else { pow2(n - 1 - i) }).sum::<usize>() + 1;
    DeltaVector { dim: pow2(n), index }
}

pub fn decode_state(v: DeltaVector, n: usize) -> Result<Vec<bool>> {
    if v.dim != pow2(n) {
        return Err(Error::DimensionMismatch(format!("vector of dimension {} is not Δ_{}", v.dim, pow2(n))));
    }
    Ok(decode_index(v.index, n))
}

/// Bits of the 1-based index `index` over `n` variables.
pub fn decode_index(index: usize, n: usize) -> Vec<bool> {
    let k = index - 1;
    (0..n).map(|i| (k >> (n - 1 - i)) & 1 == 0).collect()
}
