//! Exact rational linear algebra: Dirichlet matrices, fraction-free determinants,
//! inverse entries and linear solves.
//!
//! Rational matrices are scaled row by row to integer matrices and eliminated with
//! Bareiss' fraction-free scheme. Banded matrices (such as the grid Dirichlet matrix
//! in row-major order) are eliminated inside their band with lazily rescaled rows.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::lattice::{EdgeKind, PlaneGraph, Role};

/// Canonical arbitrary-precision rational (reduced, positive denominator).
pub type RationalScalar = BigRational;

/// Rational from an integer.
pub fn rat(n: i64) -> RationalScalar {
    BigRational::from_integer(BigInt::from(n))
}

/// Rational `n / d`.
pub fn ratio(n: i64, d: i64) -> RationalScalar {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Dense matrix of exact rationals whose rows and columns are indexed by vertex ids.
pub struct ExactMatrix {
    rows: Vec<usize>,
    cols: Vec<usize>,
    row_pos: HashMap<usize, usize>,
    col_pos: HashMap<usize, usize>,
    data: Vec<RationalScalar>,
    det_memo: OnceLock<RationalScalar>,
    column_memo: Mutex<HashMap<usize, Arc<Vec<RationalScalar>>>>,
}

impl Clone for ExactMatrix {
    fn clone(&self) -> Self {
        ExactMatrix::from_parts(self.rows.clone(), self.cols.clone(), self.data.clone())
    }
}

impl fmt::Debug for ExactMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ExactMatrix {}x{}", self.nrows(), self.ncols())?;
        for i in 0..self.nrows() {
            let row: Vec<String> = (0..self.ncols())
                .map(|j| self.at(i, j).to_string())
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl PartialEq for ExactMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.data == other.data
    }
}

impl ExactMatrix {
    fn from_parts(rows: Vec<usize>, cols: Vec<usize>, data: Vec<RationalScalar>) -> Self {
        let row_pos = rows.iter().enumerate().map(|(p, &id)| (id, p)).collect();
        let col_pos = cols.iter().enumerate().map(|(p, &id)| (id, p)).collect();
        ExactMatrix {
            rows,
            cols,
            row_pos,
            col_pos,
            data,
            det_memo: OnceLock::new(),
            column_memo: Mutex::new(HashMap::new()),
        }
    }

    /// Zero matrix with the given row and column ids.
    pub fn zeros(rows: Vec<usize>, cols: Vec<usize>) -> Self {
        let n = rows.len() * cols.len();
        Self::from_parts(rows, cols, vec![RationalScalar::zero(); n])
    }

    /// Matrix indexed `0..nrows` by `0..ncols` built from a function of positions.
    pub fn from_fn(nrows: usize, ncols: usize, f: impl Fn(usize, usize) -> RationalScalar) -> Self {
        let mut data = Vec::with_capacity(nrows * ncols);
        for i in 0..nrows {
            for j in 0..ncols {
                data.push(f(i, j));
            }
        }
        Self::from_parts((0..nrows).collect(), (0..ncols).collect(), data)
    }

    /// Matrix indexed by positions from integer rows.
    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let ncols = rows.first().map_or(0, |r| r.len());
        Self::from_fn(rows.len(), ncols, |i, j| rat(rows[i][j]))
    }

    /// Identity over the given ids.
    pub fn identity(ids: Vec<usize>) -> Self {
        let mut m = Self::zeros(ids.clone(), ids);
        for i in 0..m.nrows() {
            m.set(i, i, RationalScalar::one());
        }
        m
    }

    /// Number of rows.
    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    /// Number of columns.
    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    /// Row ids in position order.
    pub fn row_ids(&self) -> &[usize] {
        &self.rows
    }

    /// Column ids in position order.
    pub fn col_ids(&self) -> &[usize] {
        &self.cols
    }

    /// Position of a row id.
    pub fn row_index(&self, id: usize) -> Result<usize> {
        self.row_pos
            .get(&id)
            .copied()
            .ok_or(Error::UnknownVertex(id))
    }

    /// Position of a column id.
    pub fn col_index(&self, id: usize) -> Result<usize> {
        self.col_pos
            .get(&id)
            .copied()
            .ok_or(Error::UnknownVertex(id))
    }

    /// Entry at positions.
    pub fn at(&self, i: usize, j: usize) -> &RationalScalar {
        &self.data[i * self.cols.len() + j]
    }

    /// Entry by ids.
    pub fn entry(&self, row: usize, col: usize) -> Result<&RationalScalar> {
        Ok(self.at(self.row_index(row)?, self.col_index(col)?))
    }

    /// Sets the entry at positions and drops cached factorizations.
    pub fn set(&mut self, i: usize, j: usize, v: RationalScalar) {
        let n = self.cols.len();
        self.data[i * n + j] = v;
        self.invalidate();
    }

    fn invalidate(&mut self) {
        self.det_memo = OnceLock::new();
        self.column_memo = Mutex::new(HashMap::new());
    }

    /// Submatrix selected by row and column ids.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Result<ExactMatrix> {
        let ri: Vec<usize> = rows
            .iter()
            .map(|&r| self.row_index(r))
            .collect::<Result<_>>()?;
        let ci: Vec<usize> = cols
            .iter()
            .map(|&c| self.col_index(c))
            .collect::<Result<_>>()?;
        let mut data = Vec::with_capacity(ri.len() * ci.len());
        for &i in &ri {
            for &j in &ci {
                data.push(self.at(i, j).clone());
            }
        }
        Ok(Self::from_parts(rows.to_vec(), cols.to_vec(), data))
    }

    /// Transpose.
    pub fn transpose(&self) -> ExactMatrix {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.ncols() {
            for i in 0..self.nrows() {
                data.push(self.at(i, j).clone());
            }
        }
        Self::from_parts(self.cols.clone(), self.rows.clone(), data)
    }

    /// Matrix product; the inner index sets must agree positionally in size.
    pub fn mul(&self, other: &ExactMatrix) -> Result<ExactMatrix> {
        if self.ncols() != other.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.nrows(),
                self.ncols(),
                other.nrows(),
                other.ncols()
            )));
        }
        let mut data = Vec::with_capacity(self.nrows() * other.ncols());
        for i in 0..self.nrows() {
            for j in 0..other.ncols() {
                let mut acc = RationalScalar::zero();
                for l in 0..self.ncols() {
                    let a = self.at(i, l);
                    if a.is_zero() {
                        continue;
                    }
                    acc += a * other.at(l, j);
                }
                data.push(acc);
            }
        }
        Ok(Self::from_parts(
            self.rows.clone(),
            other.cols.clone(),
            data,
        ))
    }

    /// Entrywise difference; shapes must agree.
    pub fn sub(&self, other: &ExactMatrix) -> Result<ExactMatrix> {
        if self.nrows() != other.nrows() || self.ncols() != other.ncols() {
            return Err(Error::DimensionMismatch(
                "difference of unequal shapes".into(),
            ));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Self::from_parts(self.rows.clone(), self.cols.clone(), data))
    }

    /// Product with a vector.
    pub fn apply(&self, x: &[RationalScalar]) -> Result<Vec<RationalScalar>> {
        if x.len() != self.ncols() {
            return Err(Error::DimensionMismatch("vector length".into()));
        }
        Ok((0..self.nrows())
            .map(|i| {
                let mut acc = RationalScalar::zero();
                for (j, xj) in x.iter().enumerate() {
                    let a = self.at(i, j);
                    if !a.is_zero() && !xj.is_zero() {
                        acc += a * xj;
                    }
                }
                acc
            })
            .collect())
    }

    fn require_square(&self) -> Result<()> {
        if self.nrows() != self.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "square matrix required, got {}x{}",
                self.nrows(),
                self.ncols()
            )));
        }
        Ok(())
    }

    /// Exact determinant, computed once and cached.
    pub fn det(&self) -> Result<RationalScalar> {
        self.require_square()?;
        if let Some(d) = self.det_memo.get() {
            return Ok(d.clone());
        }
        let (mut a, scales) = self.integer_rows(&[]);
        let mut rhs: Vec<Vec<BigInt>> = vec![Vec::new(); self.nrows()];
        let d = match eliminate(&mut a, &mut rhs) {
            Some(det) => {
                let scale: BigInt = scales.iter().product();
                BigRational::new(det, scale)
            }
            None => RationalScalar::zero(),
        };
        let _ = self.det_memo.set(d.clone());
        Ok(d)
    }

    /// Rows scaled to integers, together with the per-row scale factors. The right-hand
    /// sides are scaled along with their rows and appended to the returned rows' owners.
    fn integer_rows(&self, rhs: &[Vec<RationalScalar>]) -> (Vec<Vec<BigInt>>, Vec<BigInt>) {
        let n = self.nrows();
        let mut rows = Vec::with_capacity(n);
        let mut scales = Vec::with_capacity(n);
        for i in 0..n {
            let mut l = BigInt::one();
            for j in 0..self.ncols() {
                l = l.lcm(self.at(i, j).denom());
            }
            for col in rhs {
                l = l.lcm(col[i].denom());
            }
            rows.push(
                (0..self.ncols())
                    .map(|j| {
                        let v = self.at(i, j);
                        v.numer() * (&l / v.denom())
                    })
                    .collect(),
            );
            scales.push(l);
        }
        (rows, scales)
    }

    /// Solves `self · X = B` for several right-hand sides at once.
    pub fn solve_many(&self, rhs: &[Vec<RationalScalar>]) -> Result<Vec<Vec<RationalScalar>>> {
        self.require_square()?;
        let n = self.nrows();
        for col in rhs {
            if col.len() != n {
                return Err(Error::DimensionMismatch("right-hand side length".into()));
            }
        }
        if n == 0 {
            return Ok(rhs.to_vec());
        }
        let (mut a, scales) = self.integer_rows(rhs);
        let mut b: Vec<Vec<BigInt>> = (0..n)
            .map(|i| {
                rhs.iter()
                    .map(|col| {
                        let v = &col[i];
                        v.numer() * (&scales[i] / v.denom())
                    })
                    .collect()
            })
            .collect();
        let det = eliminate(&mut a, &mut b).ok_or(Error::SingularMatrix)?;
        let upper = bandwidth(&a).1;
        let y = back_substitute(&a, &b, &det, upper);
        Ok((0..rhs.len())
            .map(|r| {
                (0..n)
                    .map(|i| BigRational::new(y[i][r].clone(), det.clone()))
                    .collect()
            })
            .collect())
    }

    /// Solves `self · x = rhs`.
    pub fn solve(&self, rhs: &[RationalScalar]) -> Result<Vec<RationalScalar>> {
        Ok(self.solve_many(&[rhs.to_vec()])?.pop().expect("one column"))
    }

    /// Column of the inverse for a column id, cached across calls.
    pub fn inverse_column(&self, col: usize) -> Result<Arc<Vec<RationalScalar>>> {
        Ok(self.inverse_columns(&[col])?.pop().expect("one column"))
    }

    /// Columns of the inverse, solved together for any ids not yet cached.
    pub fn inverse_columns(&self, cols: &[usize]) -> Result<Vec<Arc<Vec<RationalScalar>>>> {
        self.require_square()?;
        let mut memo = self.column_memo.lock().expect("memo lock");
        let missing: Vec<usize> = {
            let mut m: Vec<usize> = cols
                .iter()
                .copied()
                .filter(|c| !memo.contains_key(c))
                .collect();
            m.sort_unstable();
            m.dedup();
            m
        };
        if !missing.is_empty() {
            let n = self.nrows();
            let rhs: Vec<Vec<RationalScalar>> = missing
                .iter()
                .map(|&c| {
                    let p = self.col_index(c)?;
                    let mut e = vec![RationalScalar::zero(); n];
                    e[p] = RationalScalar::one();
                    Ok(e)
                })
                .collect::<Result<_>>()?;
            let sol = self.solve_many(&rhs)?;
            for (c, x) in missing.into_iter().zip(sol) {
                memo.insert(c, Arc::new(x));
            }
        }
        Ok(cols.iter().map(|c| memo[c].clone()).collect())
    }

    /// Entry `(row, col)` of the inverse.
    pub fn inverse_entry(&self, row: usize, col: usize) -> Result<RationalScalar> {
        let r = self.row_index(row)?;
        Ok(self.inverse_column(col)?[r].clone())
    }

    /// Full inverse with rows and columns indexed like the transpose.
    pub fn inverse(&self) -> Result<ExactMatrix> {
        let cols = self.cols.clone();
        let columns = self.inverse_columns(&cols)?;
        let n = self.nrows();
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for col in &columns {
                data.push(col[i].clone());
            }
        }
        Ok(Self::from_parts(self.cols.clone(), self.rows.clone(), data))
    }

    /// Exact integer/rational text dump.
    pub fn dump(&self) -> String {
        format!("{self:?}")
    }
}

/// Lower and upper bandwidths of an integer matrix.
fn bandwidth(a: &[Vec<BigInt>]) -> (usize, usize) {
    let (mut lo, mut up) = (0, 0);
    for (i, row) in a.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if !v.is_zero() {
                if i > j {
                    lo = lo.max(i - j);
                } else {
                    up = up.max(j - i);
                }
            }
        }
    }
    (lo, up)
}

/// Fraction-free forward elimination in place on `[a | rhs]`. Returns the determinant,
/// or `None` when singular. Tries the banded scheme first and falls back to dense
/// elimination with row pivoting if a zero pivot appears.
fn eliminate(a: &mut Vec<Vec<BigInt>>, rhs: &mut Vec<Vec<BigInt>>) -> Option<BigInt> {
    let n = a.len();
    if n == 0 {
        return Some(BigInt::one());
    }
    let (lo, up) = bandwidth(a);
    if lo < n - 1 || up < n - 1 {
        let (sa, sb) = (a.clone(), rhs.clone());
        if let Some(d) = forward(a, rhs, lo, up, false) {
            return Some(d);
        }
        *a = sa;
        *rhs = sb;
    }
    forward(a, rhs, n - 1, n - 1, true)
}

fn forward(
    a: &mut [Vec<BigInt>],
    rhs: &mut [Vec<BigInt>],
    lower: usize,
    upper: usize,
    pivoting: bool,
) -> Option<BigInt> {
    let n = a.len();
    let mut prev = BigInt::one();
    let mut sign = false;
    let mut entered = vec![false; n];
    let enter = |row: &mut Vec<BigInt>, b: &mut Vec<BigInt>, prev: &BigInt| {
        if !prev.is_one() {
            for v in row.iter_mut().filter(|v| !v.is_zero()) {
                *v *= prev;
            }
            for v in b.iter_mut() {
                *v *= prev;
            }
        }
    };
    for k in 0..n {
        if !entered[k] {
            enter(&mut a[k], &mut rhs[k], &prev);
            entered[k] = true;
        }
        if a[k][k].is_zero() {
            if !pivoting {
                return None;
            }
            let p = (k + 1..n).find(|&i| !a[i][k].is_zero())?;
            a.swap(k, p);
            rhs.swap(k, p);
            sign = !sign;
        }
        let last_row = (k + lower).min(n - 1);
        let (head, tail) = a.split_at_mut(k + 1);
        let pivot_row = &head[k];
        let pivot = pivot_row[k].clone();
        let (bh, bt) = rhs.split_at_mut(k + 1);
        let pivot_rhs = &bh[k];
        for i in k + 1..=last_row {
            let row = &mut tail[i - k - 1];
            let b = &mut bt[i - k - 1];
            if !entered[i] {
                enter(row, b, &prev);
                entered[i] = true;
            }
            let f = std::mem::take(&mut row[k]);
            let last_col = (i + upper).min(n - 1);
            if f.is_zero() {
                for v in row[k + 1..=last_col].iter_mut().filter(|v| !v.is_zero()) {
                    *v = (&pivot * &*v) / &prev;
                }
                for v in b.iter_mut() {
                    *v = (&pivot * &*v) / &prev;
                }
                continue;
            }
            for j in k + 1..=last_col {
                let pj = &pivot_row[j];
                let v = &mut row[j];
                if pj.is_zero() {
                    if !v.is_zero() {
                        *v = (&pivot * &*v) / &prev;
                    }
                } else {
                    *v = (&pivot * &*v - &f * pj) / &prev;
                }
            }
            for (v, pb) in b.iter_mut().zip(pivot_rhs) {
                *v = (&pivot * &*v - &f * pb) / &prev;
            }
        }
        prev = pivot;
    }
    let det = a[n - 1][n - 1].clone();
    Some(if sign { -det } else { det })
}

/// Fraction-free back substitution: returns `y = det · x` for each right-hand side.
fn back_substitute(
    a: &[Vec<BigInt>],
    b: &[Vec<BigInt>],
    det: &BigInt,
    upper: usize,
) -> Vec<Vec<BigInt>> {
    let n = a.len();
    let r = b.first().map_or(0, |row| row.len());
    let mut y = vec![vec![BigInt::zero(); r]; n];
    for i in (0..n).rev() {
        let last = (i + upper).min(n - 1);
        for c in 0..r {
            let mut acc = det * &b[i][c];
            for j in i + 1..=last {
                if !a[i][j].is_zero() {
                    acc -= &a[i][j] * &y[j][c];
                }
            }
            y[i][c] = acc / &a[i][i];
        }
    }
    y
}

/// Dirichlet matrix `K = 4I − A(G₁)` over the primal vertices of a graph, indexed by
/// their vertex ids. Only primal–primal edges contribute to the adjacency part.
pub fn dirichlet_matrix(g1: &PlaneGraph) -> ExactMatrix {
    let ids = g1.with_role(Role::Primal);
    let mut m = ExactMatrix::zeros(ids.clone(), ids.clone());
    let pos: HashMap<usize, usize> = ids.iter().enumerate().map(|(p, &id)| (id, p)).collect();
    for p in 0..ids.len() {
        m.data[p * ids.len() + p] = rat(4);
    }
    for e in &g1.edges {
        if e.kind != EdgeKind::PrimalEdge {
            continue;
        }
        if let (Some(&a), Some(&b)) = (pos.get(&e.u), pos.get(&e.v)) {
            let n = ids.len();
            m.data[a * n + b] -= rat(e.weight as i64);
            m.data[b * n + a] -= rat(e.weight as i64);
        }
    }
    m
}

/// Transition matrix `Q` of the simple random walk on primal vertices, in which each
/// vertex moves along each of its four edge-slots with probability 1/4.
pub fn transition_matrix(g1: &PlaneGraph) -> ExactMatrix {
    let ids = g1.with_role(Role::Primal);
    let n = ids.len();
    let pos: HashMap<usize, usize> = ids.iter().enumerate().map(|(p, &id)| (id, p)).collect();
    let mut m = ExactMatrix::zeros(ids.clone(), ids);
    for e in &g1.edges {
        if e.kind != EdgeKind::PrimalEdge {
            continue;
        }
        if let (Some(&a), Some(&b)) = (pos.get(&e.u), pos.get(&e.v)) {
            m.data[a * n + b] += ratio(e.weight as i64, 4);
            m.data[b * n + a] += ratio(e.weight as i64, 4);
        }
    }
    m
}

/// Exact determinant.
pub fn det_exact(m: &ExactMatrix) -> Result<RationalScalar> {
    m.det()
}

/// Exact inverse entry `(m⁻¹)(row, col)` by ids; errors on singular input.
pub fn inverse_entry(m: &ExactMatrix, row: usize, col: usize) -> Result<RationalScalar> {
    m.inverse_entry(row, col)
}

/// Exact solution of `m · x = rhs`.
pub fn solve_exact(m: &ExactMatrix, rhs: &[RationalScalar]) -> Result<Vec<RationalScalar>> {
    m.solve(rhs)
}

/// Converts an integral rational to an integer; errors if a fractional part remains.
pub fn to_integer(r: &RationalScalar) -> Result<BigInt> {
    if r.is_integer() {
        Ok(r.to_integer())
    } else {
        Err(Error::InvalidConfig(format!(
            "expected an integer, got {r}"
        )))
    }
}

/// Absolute value of an integral rational as an integer.
pub fn abs_integer(r: &RationalScalar) -> Result<BigInt> {
    Ok(to_integer(r)?.abs())
}
