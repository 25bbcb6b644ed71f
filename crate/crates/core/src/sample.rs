use crate::error::{HdSignError, Result};

/// An n×p matrix of observations stored row-major; each row is one observation.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    data: Vec<f64>,
    n: usize,
    p: usize,
}

impl SampleMatrix {
    /// Wraps row-major data. Every entry must be finite.
    pub fn new(data: Vec<f64>, n: usize, p: usize) -> Result<Self> {
        if p == 0 {
            return Err(HdSignError::EmptyDimension);
        }
        if n == 0 {
            return Err(HdSignError::TooFewObservations { required: 1, actual: 0 });
        }
        if data.len() != n * p {
            return Err(HdSignError::ShapeMismatch { n, p, len: data.len() });
        }
        if let Some(idx) = data.iter().position(|v| !v.is_finite()) {
            return Err(HdSignError::NonFiniteEntry {
                row: idx / p,
                col: idx % p,
            });
        }
        Ok(Self { data, n, p })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut data = Vec::with_capacity(n * p);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != p {
                return Err(HdSignError::InvalidParameter(format!(
                    "row {i} has {} columns, expected {p}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Self::new(data, n, p)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn p(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.p..(i + 1) * self.p]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.p)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// Returns `c * X`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.data.iter().map(|v| v * c).collect(), self.n, self.p)
    }

    /// Multiplies column k by `factors[k]`.
    pub fn scale_columns(&self, factors: &[f64]) -> Result<Self> {
        if factors.len() != self.p {
            return Err(HdSignError::InvalidParameter(format!(
                "expected {} column factors, got {}",
                self.p,
                factors.len()
            )));
        }
        let data = self
            .rows()
            .flat_map(|row| row.iter().zip(factors).map(|(v, f)| v * f))
            .collect();
        Self::new(data, self.n, self.p)
    }

    /// Subtracts a hypothesized location from every row, turning a test of
    /// `theta = theta0` into a test of `theta = 0`.
    pub fn centered_at(&self, theta0: &[f64]) -> Result<Self> {
        if theta0.len() != self.p {
            return Err(HdSignError::InvalidParameter(format!(
                "location has length {}, expected {}",
                theta0.len(),
                self.p
            )));
        }
        let data = self
            .rows()
            .flat_map(|row| row.iter().zip(theta0).map(|(v, t)| v - t))
            .collect();
        Self::new(data, self.n, self.p)
    }

    /// Reorders rows: row i of the result is row `order[i]` of `self`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        let mut data = Vec::with_capacity(self.data.len());
        for &i in order {
            data.extend_from_slice(self.row(i));
        }
        Self::new(data, order.len(), self.p)
    }

    pub(crate) fn require_rows(&self, required: usize) -> Result<()> {
        if self.n < required {
            return Err(HdSignError::TooFewObservations {
                required,
                actual: self.n,
            });
        }
        Ok(())
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    // four accumulators let the compiler vectorize without reassociating
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let k = c * 4;
        acc[0] += a[k] * b[k];
        acc[1] += a[k + 1] * b[k + 1];
        acc[2] += a[k + 2] * b[k + 2];
        acc[3] += a[k + 3] * b[k + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for k in chunks * 4..a.len() {
        s += a[k] * b[k];
    }
    s
}

#[inline]
pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
