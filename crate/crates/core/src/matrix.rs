//! Column-major dense storage, diagonal matrices, precision casts and the
//! plain-text matrix format.
//!
//! Text format: the first line is `m n tag` where `tag` is `working` or
//! `higher`; the remaining `m·n` whitespace-separated values are the entries
//! in column-major order, printed with the shortest decimal string that
//! round-trips to the same bits.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::precision::{Precision, Real};

/// Dense `rows × cols` matrix stored column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::eye(n, n)
    }

    /// `rows × cols` matrix with ones on the main diagonal.
    pub fn eye(rows: usize, cols: usize) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows.min(cols) {
            m[(i, i)] = T::one();
        }
        m
    }

    /// Builds a matrix from column-major data, rejecting non-finite entries.
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} values for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(k) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                row: k % rows.max(1),
                col: k / rows.max(1),
            });
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Builds a matrix from a row-major nested slice. Handy for small literals.
    pub fn from_rows(rows: &[&[T]]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Shape("ragged rows".into()));
        }
        let mut data = Vec::with_capacity(m * n);
        for j in 0..n {
            for r in rows {
                data.push(r[j]);
            }
        }
        Self::from_col_major(m, n, data)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<T>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Matrix { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn precision(&self) -> Precision {
        T::PRECISION
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[T] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [T] {
        let m = self.rows;
        &mut self.data[j * m..(j + 1) * m]
    }

    /// Mutable views of two distinct columns.
    pub fn col_pair_mut(&mut self, i: usize, j: usize) -> (&mut [T], &mut [T]) {
        assert_ne!(i, j);
        let m = self.rows;
        if i < j {
            let (lo, hi) = self.data.split_at_mut(j * m);
            (&mut lo[i * m..(i + 1) * m], &mut hi[..m])
        } else {
            let (lo, hi) = self.data.split_at_mut(i * m);
            let (b, a) = (&mut lo[j * m..(j + 1) * m], &mut hi[..m]);
            (a, b)
        }
    }

    pub fn row(&self, i: usize) -> Vec<T> {
        (0..self.cols).map(|j| self[(i, j)]).collect()
    }

    pub fn swap_cols(&mut self, i: usize, j: usize) {
        if i != j {
            let (a, b) = self.col_pair_mut(i, j);
            a.swap_with_slice(b);
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Copy of rows `range`.
    pub fn row_block(&self, range: std::ops::Range<usize>) -> Self {
        let mut data = Vec::with_capacity(range.len() * self.cols);
        for j in 0..self.cols {
            data.extend_from_slice(&self.col(j)[range.clone()]);
        }
        Matrix::from_raw(range.len(), self.cols, data)
    }

    /// Leading `cols` columns.
    pub fn leading_cols(&self, cols: usize) -> Self {
        assert!(cols <= self.cols);
        Matrix::from_raw(self.rows, cols, self.data[..self.rows * cols].to_vec())
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data
            .iter()
            .map(|x| x.as_f64() * x.as_f64())
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, x| m.max(x.abs()))
    }

    /// `self · other` accumulated in `T`, ascending inner index.
    pub fn matmul(&self, other: &Matrix<T>) -> Result<Matrix<T>> {
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(crate::kernels::matmul(self, other))
    }

    /// Entry-wise conversion to another precision.
    ///
    /// Widening is exact. Narrowing rounds to nearest even and fails with
    /// [`Error::Overflow`] on the first entry that leaves the target range.
    pub fn cast<S: Real>(&self) -> Result<Matrix<S>> {
        let mut data = Vec::with_capacity(self.data.len());
        for (k, &x) in self.data.iter().enumerate() {
            let y: S = x.cast();
            if !y.is_finite() {
                return Err(Error::Overflow {
                    row: k % self.rows,
                    col: k / self.rows,
                    value: x.as_f64(),
                });
            }
            data.push(y);
        }
        Ok(Matrix::from_raw(self.rows, self.cols, data))
    }

    /// Writes the text format.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{} {} {}", self.rows, self.cols, T::PRECISION.tag())?;
        let mut line = String::new();
        for j in 0..self.cols {
            line.clear();
            for (k, x) in self.col(j).iter().enumerate() {
                if k > 0 {
                    line.push(' ');
                }
                write!(line, "{x}").expect("write to String");
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_text(&mut buf).expect("write to Vec");
        String::from_utf8(buf).expect("ascii output")
    }

    /// Reads the text format. The precision tag must match `T`.
    pub fn read_text<R: BufRead>(mut input: R) -> Result<Self> {
        let mut header = String::new();
        input.read_line(&mut header)?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let [m, n, tag] = fields[..] else {
            return Err(Error::Parse(format!("bad header line {header:?}")));
        };
        let rows: usize = m
            .parse()
            .map_err(|_| Error::Parse(format!("bad row count {m:?}")))?;
        let cols: usize = n
            .parse()
            .map_err(|_| Error::Parse(format!("bad column count {n:?}")))?;
        let precision =
            Precision::from_tag(tag).ok_or_else(|| Error::Parse(format!("unknown tag {tag:?}")))?;
        if precision != T::PRECISION {
            return Err(Error::Parse(format!(
                "file holds a {precision} matrix, expected {}",
                T::PRECISION
            )));
        }
        let mut body = String::new();
        input.read_to_string(&mut body)?;
        let data = body
            .split_whitespace()
            .map(|tok| {
                tok.parse::<T>()
                    .map_err(|_| Error::Parse(format!("bad value {tok:?}")))
            })
            .collect::<Result<Vec<T>>>()?;
        Self::from_col_major(rows, cols, data)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        Self::read_text(text.as_bytes())
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(file);
        self.write_text(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_text(std::io::BufReader::new(file))
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[j * self.rows + i]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[j * self.rows + i]
    }
}

/// Diagonal matrix, used for column scalings `D` and singular values `Σ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Diag<T> {
    entries: Vec<T>,
}

impl<T: Real> Diag<T> {
    pub fn new(entries: Vec<T>) -> Self {
        Diag { entries }
    }

    /// Diagonal with strictly positive entries, as required of `D` and `Σ`.
    pub fn positive(entries: Vec<T>) -> Result<Self> {
        if let Some(i) = entries
            .iter()
            .position(|&x| !(x > T::zero() && x.is_finite()))
        {
            return Err(Error::InvalidArgument(format!(
                "diagonal entry {i} is not a positive finite number"
            )));
        }
        Ok(Diag { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    pub fn into_vec(self) -> Vec<T> {
        self.entries
    }

    pub fn precision(&self) -> Precision {
        T::PRECISION
    }

    /// `max/min` of the absolute entries.
    pub fn condition(&self) -> f64 {
        let (lo, hi) = self
            .entries
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), x| {
                let a = x.as_f64().abs();
                (lo.min(a), hi.max(a))
            });
        hi / lo
    }

    pub fn cast<S: Real>(&self) -> Result<Diag<S>> {
        let mut out = Vec::with_capacity(self.entries.len());
        for (i, &x) in self.entries.iter().enumerate() {
            let y: S = x.cast();
            if !y.is_finite() {
                return Err(Error::Overflow {
                    row: i,
                    col: i,
                    value: x.as_f64(),
                });
            }
            out.push(y);
        }
        Ok(Diag { entries: out })
    }

    /// Dense `n × 1` column holding the diagonal, for the text format.
    pub fn to_column(&self) -> Matrix<T> {
        Matrix::from_raw(self.entries.len(), 1, self.entries.clone())
    }
}
