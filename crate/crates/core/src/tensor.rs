//! Dense row-major matrices and image batches.

use crate::error::{shape_err, Error, Result};

/// Row-major `rows × cols` matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            values: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != rows * cols {
            return shape_err(format!(
                "{} values cannot fill a {rows}x{cols} matrix",
                values.len()
            ));
        }
        Ok(Self { rows, cols, values })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.values[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.values[r * self.cols..(r + 1) * self.cols]
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.values[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.values[r * self.cols + c] = v;
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Gathers the listed rows into a new matrix.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let mut values = Vec::with_capacity(rows.len() * self.cols);
        for &r in rows {
            values.extend_from_slice(self.row(r));
        }
        Self {
            rows: rows.len(),
            cols: self.cols,
            values,
        }
    }

    pub fn map_inplace(&mut self, f: impl Fn(f64) -> f64) {
        self.values.iter_mut().for_each(|v| *v = f(*v));
    }

    pub fn scale(&mut self, s: f64) {
        self.map_inplace(|v| v * s);
    }

    /// `self · otherᵀ`
    pub fn matmul_nt(&self, other: &Self) -> Result<Self> {
        if self.cols != other.cols {
            return shape_err(format!(
                "cannot multiply {:?} by transpose of {:?}",
                self.shape(),
                other.shape()
            ));
        }
        let mut out = Self::zeros(self.rows, other.rows);
        gemm(
            self.rows,
            self.cols,
            other.rows,
            (&self.values, self.cols as isize, 1),
            (&other.values, 1, other.cols as isize),
            &mut out,
        );
        Ok(out)
    }

    /// `selfᵀ · other`
    pub fn matmul_tn(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows {
            return shape_err(format!(
                "cannot multiply transpose of {:?} by {:?}",
                self.shape(),
                other.shape()
            ));
        }
        let mut out = Self::zeros(self.cols, other.cols);
        gemm(
            self.cols,
            self.rows,
            other.cols,
            (&self.values, 1, self.cols as isize),
            (&other.values, other.cols as isize, 1),
            &mut out,
        );
        Ok(out)
    }

    /// `self · other`
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return shape_err(format!(
                "cannot multiply {:?} by {:?}",
                self.shape(),
                other.shape()
            ));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        gemm(
            self.rows,
            self.cols,
            other.cols,
            (&self.values, self.cols as isize, 1),
            (&other.values, other.cols as isize, 1),
            &mut out,
        );
        Ok(out)
    }

    /// Adds `bias` to every row.
    pub fn add_row_vector(&mut self, bias: &[f64]) {
        debug_assert_eq!(bias.len(), self.cols);
        for row in self.values.chunks_mut(self.cols) {
            row.iter_mut().zip(bias).for_each(|(v, b)| *v += b);
        }
    }

    pub fn column_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.cols];
        for row in self.values.chunks(self.cols) {
            sums.iter_mut().zip(row).for_each(|(s, v)| *s += v);
        }
        sums
    }
}

/// `out = A · B` where `A` is `m × k` and `B` is `k × n`, each given as
/// `(data, row_stride, col_stride)`.
fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: (&[f64], isize, isize),
    b: (&[f64], isize, isize),
    out: &mut DenseMatrix,
) {
    if m == 0 || n == 0 {
        return;
    }
    if k == 0 {
        out.values.fill(0.0);
        return;
    }
    // SAFETY: strides describe in-bounds views: A spans m×k and B spans k×n
    // over slices whose lengths were checked by the callers' shape tests.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.0.as_ptr(),
            a.1,
            a.2,
            b.0.as_ptr(),
            b.1,
            b.2,
            0.0,
            out.values.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

/// Dimensions of one image: channels, height, width.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ImageDims {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
}

impl ImageDims {
    pub fn new(channels: usize, height: usize, width: usize) -> Self {
        Self {
            channels,
            height,
            width,
        }
    }

    /// Flattened length `C·H·W`.
    pub fn len(&self) -> usize {
        self.channels * self.height * self.width
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn plane_len(&self) -> usize {
        self.height * self.width
    }
}

/// `B × C × H × W` batch of intensities, one flattened sample per row.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageBatch {
    dims: ImageDims,
    data: DenseMatrix,
}

impl ImageBatch {
    /// Builds a batch, checking that every value lies in `[0, 1]`.
    pub fn new(batch: usize, dims: ImageDims, values: Vec<f64>) -> Result<Self> {
        let data = DenseMatrix::from_vec(batch, dims.len(), values)?;
        if let Some(v) = data.as_slice().iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Domain(format!("intensity {v} outside [0, 1]")));
        }
        Ok(Self { dims, data })
    }

    /// Wraps a matrix without range checks (used for model outputs and gradients).
    pub fn from_matrix(dims: ImageDims, data: DenseMatrix) -> Result<Self> {
        if data.cols() != dims.len() {
            return shape_err(format!(
                "matrix with {} columns does not hold {:?} images",
                data.cols(),
                dims
            ));
        }
        Ok(Self { dims, data })
    }

    pub fn from_samples<S: AsRef<[f64]>>(dims: ImageDims, samples: &[S]) -> Result<Self> {
        let mut values = Vec::with_capacity(samples.len() * dims.len());
        for s in samples {
            let s = s.as_ref();
            if s.len() != dims.len() {
                return shape_err(format!(
                    "sample of length {} does not match {:?}",
                    s.len(),
                    dims
                ));
            }
            values.extend_from_slice(s);
        }
        Self::new(samples.len(), dims, values)
    }

    pub fn dims(&self) -> ImageDims {
        self.dims
    }

    pub fn batch_size(&self) -> usize {
        self.data.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.data.rows() == 0
    }

    pub fn sample(&self, b: usize) -> &[f64] {
        self.data.row(b)
    }

    pub fn sample_mut(&mut self, b: usize) -> &mut [f64] {
        self.data.row_mut(b)
    }

    /// One `H × W` plane of sample `b`.
    pub fn plane(&self, b: usize, c: usize) -> &[f64] {
        let p = self.dims.plane_len();
        &self.sample(b)[c * p..(c + 1) * p]
    }

    pub fn values(&self) -> &[f64] {
        self.data.as_slice()
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.data
    }

    pub fn into_matrix(self) -> DenseMatrix {
        self.data
    }

    pub fn select(&self, rows: &[usize]) -> Self {
        Self {
            dims: self.dims,
            data: self.data.select_rows(rows),
        }
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.dims == other.dims && self.batch_size() == other.batch_size()
    }

    pub(crate) fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            shape_err(format!(
                "batch {}x{:?} does not match {}x{:?}",
                self.batch_size(),
                self.dims,
                other.batch_size(),
                other.dims
            ))
        }
    }
}
