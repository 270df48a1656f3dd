use std::fmt;

use crate::error::{Error, Result};
use crate::polyalg::poly::Poly;
use crate::polyalg::scalar::{Mode, Scalar};

/// Dense row-major matrix of polynomials.
#[derive(Clone, PartialEq, Debug)]
pub struct PolyMatrix<F> {
    rows: usize,
    cols: usize,
    entries: Vec<Poly<F>>,
}

/// Output of [`PolyMatrix::row_reduce_upper`]: `transform * input = upper`.
#[derive(Clone, Debug)]
pub struct RowReduction<F> {
    pub upper: PolyMatrix<F>,
    pub transform: PolyMatrix<F>,
    /// Constant with `det(input) = unit * prod(diag(upper))` for square input.
    unit: F,
}

impl<F: Scalar> RowReduction<F> {
    /// `det(input)` for square input.
    pub fn determinant(&self) -> Poly<F> {
        (0..self.upper.cols).fold(Poly::constant(self.unit.clone()), |acc, k| &acc * self.upper.get(k, k))
    }

    /// All leading diagonal entries are nonzero constants.
    pub fn has_unit_diagonal(&self) -> bool {
        (0..self.upper.cols).all(|k| self.upper.get(k, k).is_unit())
    }
}

impl<F: Scalar> PolyMatrix<F> {
    pub fn new(rows: usize, cols: usize, entries: Vec<Poly<F>>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Shape(format!("matrix must be nonempty, got {rows}x{cols}")));
        }
        if entries.len() != rows * cols {
            return Err(Error::Shape(format!("{} entries for a {rows}x{cols} matrix", entries.len())));
        }
        Ok(PolyMatrix { rows, cols, entries })
    }

    pub fn from_rows(rows: Vec<Vec<Poly<F>>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Shape("ragged rows".into()));
        }
        Self::new(r, c, rows.into_iter().flatten().collect())
    }

    /// Parses a grid of polynomial strings.
    pub fn parse_rows<S: AsRef<str>>(rows: &[Vec<S>]) -> Result<Self> {
        let parsed = rows
            .iter()
            .map(|row| row.iter().map(|s| Poly::parse(s.as_ref())).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(parsed)
    }

    /// Grid of polynomial strings in the text grammar.
    pub fn to_strings(&self) -> Vec<Vec<String>> {
        (0..self.rows).map(|i| (0..self.cols).map(|j| self.get(i, j).to_string()).collect()).collect()
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        PolyMatrix { rows, cols, entries: vec![Poly::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for k in 0..n {
            m.set(k, k, Poly::one());
        }
        m
    }

    /// Constant matrix.
    pub fn from_scalars(values: &[Vec<F>]) -> Result<Self> {
        Self::from_rows(values.iter().map(|row| row.iter().map(|v| Poly::constant(v.clone())).collect()).collect())
    }

    /// `x I - A` for a square constant matrix `A`.
    pub fn shift_minus(a: &[Vec<F>]) -> Result<Self> {
        let n = a.len();
        if a.iter().any(|row| row.len() != n) {
            return Err(Error::Shape("state matrix must be square".into()));
        }
        let mut m = Self::from_scalars(a)?;
        for e in m.entries.iter_mut() {
            *e = -&*e;
        }
        for k in 0..n {
            let e = m.get(k, k) + &Poly::x();
            m.set(k, k, e);
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Poly<F> {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, p: Poly<F>) {
        self.entries[i * self.cols + j] = p;
    }

    pub fn row(&self, i: usize) -> &[Poly<F>] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    /// Largest entry degree; `None` when every entry is zero.
    pub fn max_degree(&self) -> Option<usize> {
        self.entries.iter().filter_map(Poly::degree).max()
    }

    pub fn select_cols(&self, cols: &[usize]) -> Result<Self> {
        if cols.iter().any(|&c| c >= self.cols) {
            return Err(Error::Shape(format!("column index out of range in {cols:?}")));
        }
        let entries = (0..self.rows)
            .flat_map(|i| cols.iter().map(move |&j| (i, j)))
            .map(|(i, j)| self.get(i, j).clone())
            .collect();
        Self::new(self.rows, cols.len(), entries)
    }

    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        if rows.iter().any(|&r| r >= self.rows) {
            return Err(Error::Shape(format!("row index out of range in {rows:?}")));
        }
        let entries = rows.iter().flat_map(|&i| self.row(i).iter().cloned()).collect();
        Self::new(rows.len(), self.cols, entries)
    }

    /// Contiguous block `rows x cols` starting at `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Result<Self> {
        if r0 + rows > self.rows || c0 + cols > self.cols {
            return Err(Error::Shape("block exceeds matrix".into()));
        }
        let entries = (r0..r0 + rows)
            .flat_map(|i| (c0..c0 + cols).map(move |j| (i, j)))
            .map(|(i, j)| self.get(i, j).clone())
            .collect();
        Self::new(rows, cols, entries)
    }

    /// Stacks `self` on top of `below`.
    pub fn vstack(&self, below: &Self) -> Result<Self> {
        if self.cols != below.cols {
            return Err(Error::Shape(format!("cannot stack {} columns on {}", self.cols, below.cols)));
        }
        let mut entries = self.entries.clone();
        entries.extend(below.entries.iter().cloned());
        Self::new(self.rows + below.rows, self.cols, entries)
    }

    pub fn neg(&self) -> Self {
        PolyMatrix { rows: self.rows, cols: self.cols, entries: self.entries.iter().map(|e| -e).collect() }
    }

    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for j in 0..rhs.cols {
                let mut acc = Poly::zero();
                for k in 0..self.cols {
                    let a = self.get(i, k);
                    let b = rhs.get(k, j);
                    if !a.is_zero() && !b.is_zero() {
                        acc = &acc + &(a * b);
                    }
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    pub fn det(&self) -> Result<Poly<F>> {
        if !self.is_square() {
            return Err(Error::Shape(format!("determinant of {}x{} matrix", self.rows, self.cols)));
        }
        Ok(self.row_reduce_upper()?.determinant())
    }

    /// Square with a nonzero constant determinant.
    pub fn is_unimodular(&self) -> Result<bool> {
        Ok(self.det()?.is_unit())
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.entries.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    fn scale_row(&mut self, i: usize, c: &F) {
        for j in 0..self.cols {
            let e = self.get(i, j).scaled(c);
            self.set(i, j, e);
        }
    }

    /// `row[target] -= factor * row[source]`.
    fn sub_row_multiple(&mut self, target: usize, source: usize, factor: &Poly<F>) {
        for j in 0..self.cols {
            let s = self.get(source, j);
            if s.is_zero() {
                continue;
            }
            let e = self.get(target, j) - &(factor * s);
            self.set(target, j, e);
        }
    }

    /// Row of the minimal-degree nonzero entry in column `k` at or below row
    /// `k`. Exact mode breaks ties by lowest row; tolerant mode by largest
    /// leading coefficient, then lowest row.
    fn pivot_row(&self, k: usize) -> Option<usize> {
        let candidates = (k..self.rows).filter_map(|i| {
            let e = self.get(i, k);
            e.degree().map(|d| (d, i, e.leading().map_or(0.0, Scalar::magnitude)))
        });
        if F::MODE == Mode::Exact {
            candidates.min_by_key(|&(d, i, _)| (d, i)).map(|(_, i, _)| i)
        } else {
            candidates.min_by(|a, b| a.0.cmp(&b.0).then(b.2.total_cmp(&a.2)).then(a.1.cmp(&b.1))).map(|(_, i, _)| i)
        }
    }

    /// Unimodular row reduction to upper-triangular Hermite shape.
    ///
    /// Requires `rows >= cols`. Pivots are the minimal-degree nonzero entry of
    /// the working column (see `pivot_row` for ties); diagonal entries come out
    /// monic. A second pass reduces every entry above a nonzero diagonal
    /// entry modulo it, columns left to right, so entries above a diagonal
    /// entry have strictly lower degree.
    pub fn row_reduce_upper(&self) -> Result<RowReduction<F>> {
        if self.rows < self.cols {
            return Err(Error::Shape(format!("row reduction needs rows >= cols, got {}x{}", self.rows, self.cols)));
        }
        let mut t = self.clone();
        let mut u = Self::identity(self.rows);
        let mut unit = F::one();

        for k in 0..self.cols {
            while let Some(p) = t.pivot_row(k) {
                if p != k {
                    t.swap_rows(p, k);
                    u.swap_rows(p, k);
                    unit = -unit;
                }
                let mut clean = true;
                for i in k + 1..t.rows {
                    if t.get(i, k).is_zero() {
                        continue;
                    }
                    let (quot, rem) = t.get(i, k).div_rem(t.get(k, k));
                    if !quot.is_zero() {
                        t.sub_row_multiple(i, k, &quot);
                        u.sub_row_multiple(i, k, &quot);
                    }
                    t.set(i, k, rem);
                    clean &= t.get(i, k).is_zero();
                }
                if clean {
                    break;
                }
            }
            if let Some(lc) = t.get(k, k).leading().cloned() {
                if lc != F::one() {
                    let inv = F::one() / lc.clone();
                    t.scale_row(k, &inv);
                    u.scale_row(k, &inv);
                    let monic = t.get(k, k).monic();
                    t.set(k, k, monic);
                    unit = unit * lc;
                }
            }
        }

        for k in 0..self.cols {
            let Some(dk) = t.get(k, k).degree() else { continue };
            for i in 0..k {
                let e = t.get(i, k);
                if e.degree().is_some_and(|d| d >= dk) {
                    let (quot, rem) = e.div_rem(t.get(k, k));
                    t.sub_row_multiple(i, k, &quot);
                    u.sub_row_multiple(i, k, &quot);
                    t.set(i, k, rem);
                }
            }
        }

        Ok(RowReduction { upper: t, transform: u, unit })
    }

    /// True iff the matrix has a polynomial left inverse.
    pub fn is_left_unimodular(&self) -> Result<bool> {
        Ok(self.row_reduce_upper()?.has_unit_diagonal())
    }

    /// Polynomial `X` with `X * self = I`: the first `cols` rows of the
    /// reduction transform.
    pub fn left_inverse(&self) -> Result<Self> {
        let red = self.row_reduce_upper()?;
        if !red.has_unit_diagonal() {
            return Err(Error::NoLeftInverse);
        }
        red.transform.block(0, 0, self.cols, self.rows)
    }
}

impl<F: Scalar> fmt::Display for PolyMatrix<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(ToString::to_string).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}
