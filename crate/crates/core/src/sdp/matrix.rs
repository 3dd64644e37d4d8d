use super::linalg::{self, Dense};
use super::SdpError;

/// Dense symmetric matrix stored as its packed lower triangle.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

#[inline]
fn packed(i: usize, j: usize) -> usize {
    let (r, c) = if i >= j { (i, j) } else { (j, i) };
    r * (r + 1) / 2 + c
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * (dim + 1) / 2],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, v) in values.iter().enumerate() {
            m.set(i, i, *v);
        }
        m
    }

    /// Builds from full rows, rejecting ragged or asymmetric input.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, SdpError> {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(SdpError::DimensionMismatch);
            }
            for j in 0..=i {
                if row[j] != rows[j][i] {
                    return Err(SdpError::NotSymmetric);
                }
                m.set(i, j, row[j]);
            }
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[packed(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[packed(i, j)] = v;
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j)).collect())
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub(crate) fn to_dense(&self) -> Dense {
        let n = self.dim;
        let mut d = Dense::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                let v = self.get(i, j);
                d.set(i, j, v);
                d.set(j, i, v);
            }
        }
        d
    }

    /// Takes the lower triangle of `d`, which is assumed symmetric.
    pub(crate) fn from_dense(d: &Dense) -> Self {
        let mut m = Self::zeros(d.n);
        for i in 0..d.n {
            for j in 0..=i {
                m.set(i, j, d.get(i, j));
            }
        }
        m
    }
}

/// Block-diagonal symmetric matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockMatrix {
    blocks: Vec<SymMatrix>,
}

impl BlockMatrix {
    pub fn new(blocks: Vec<SymMatrix>) -> Self {
        Self { blocks }
    }

    pub fn zeros(dims: &[usize]) -> Self {
        Self::new(dims.iter().map(|&d| SymMatrix::zeros(d)).collect())
    }

    pub fn identity(dims: &[usize]) -> Self {
        Self::new(dims.iter().map(|&d| SymMatrix::identity(d)).collect())
    }

    pub fn dims(&self) -> Vec<usize> {
        self.blocks.iter().map(SymMatrix::dim).collect()
    }

    pub fn blocks(&self) -> &[SymMatrix] {
        &self.blocks
    }

    pub fn block(&self, k: usize) -> &SymMatrix {
        &self.blocks[k]
    }

    pub fn block_mut(&mut self, k: usize) -> &mut SymMatrix {
        &mut self.blocks[k]
    }

    pub fn max_abs(&self) -> f64 {
        self.blocks.iter().fold(0.0, |m, b| m.max(b.max_abs()))
    }

    /// Smallest eigenvalue over all blocks (`+∞` when there are none).
    pub fn min_eigenvalue(&self) -> Result<f64, SdpError> {
        let mut best = f64::INFINITY;
        for b in &self.blocks {
            best = best.min(min_eigenvalue(b)?);
        }
        Ok(best)
    }
}

/// One stored entry of a sparse symmetric block matrix, with `i ≤ j`.
/// An off-diagonal entry stands for both `(i, j)` and `(j, i)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Entry {
    pub block: usize,
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

/// Sparse block-diagonal symmetric matrix, upper-triangle entries only,
/// sorted by `(block, i, j)` with duplicates summed and zeros removed.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SparseBlockMatrix {
    entries: Vec<Entry>,
}

impl SparseBlockMatrix {
    pub fn new<I>(entries: I) -> Self
    where
        I: IntoIterator<Item = Entry>,
    {
        let mut raw: Vec<Entry> = entries
            .into_iter()
            .map(|e| {
                if e.i <= e.j {
                    e
                } else {
                    Entry {
                        i: e.j,
                        j: e.i,
                        ..e
                    }
                }
            })
            .collect();
        raw.sort_by_key(|a| (a.block, a.i, a.j));
        let mut entries: Vec<Entry> = Vec::with_capacity(raw.len());
        for e in raw {
            match entries.last_mut() {
                Some(last) if (last.block, last.i, last.j) == (e.block, e.i, e.j) => {
                    last.value += e.value
                }
                _ => entries.push(e),
            }
        }
        entries.retain(|e| e.value != 0.0);
        Self { entries }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn identity(dims: &[usize]) -> Self {
        Self::new(dims.iter().enumerate().flat_map(|(block, &d)| {
            (0..d).map(move |i| Entry {
                block,
                i,
                j: i,
                value: 1.0,
            })
        }))
    }

    pub fn from_dense(m: &BlockMatrix) -> Self {
        let mut entries = Vec::new();
        for (block, b) in m.blocks().iter().enumerate() {
            for i in 0..b.dim() {
                for j in i..b.dim() {
                    let value = b.get(i, j);
                    if value != 0.0 {
                        entries.push(Entry { block, i, j, value });
                    }
                }
            }
        }
        Self { entries }
    }

    pub fn to_dense(&self, dims: &[usize]) -> BlockMatrix {
        let mut m = BlockMatrix::zeros(dims);
        for e in &self.entries {
            let b = m.block_mut(e.block);
            b.set(e.i, e.j, b.get(e.i, e.j) + e.value);
        }
        m
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            entries: self
                .entries
                .iter()
                .map(|e| Entry {
                    value: e.value * s,
                    ..*e
                })
                .collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, e| m.max(e.value.abs()))
    }

    /// Squared Frobenius norm of the full symmetric matrix.
    pub fn frobenius_sq(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| {
                let w = if e.i == e.j { 1.0 } else { 2.0 };
                w * e.value * e.value
            })
            .sum()
    }

    /// `⟨self, X⟩` against a block matrix.
    pub fn inner_dense(&self, x: &BlockMatrix) -> f64 {
        self.entries
            .iter()
            .map(|e| {
                let v = x.block(e.block).get(e.i, e.j);
                if e.i == e.j {
                    e.value * v
                } else {
                    2.0 * e.value * v
                }
            })
            .sum()
    }

    /// `⟨self, other⟩` for two sparse matrices.
    pub fn inner_with(&self, other: &SparseBlockMatrix) -> f64 {
        let (mut a, mut b) = (0, 0);
        let mut s = 0.0;
        while a < self.entries.len() && b < other.entries.len() {
            let (x, y) = (&self.entries[a], &other.entries[b]);
            match (x.block, x.i, x.j).cmp(&(y.block, y.i, y.j)) {
                std::cmp::Ordering::Less => a += 1,
                std::cmp::Ordering::Greater => b += 1,
                std::cmp::Ordering::Equal => {
                    let w = if x.i == x.j { 1.0 } else { 2.0 };
                    s += w * x.value * y.value;
                    a += 1;
                    b += 1;
                }
            }
        }
        s
    }
}

/// Trace inner product `Σ_k tr(A_k B_k)`.
pub fn inner(a: &BlockMatrix, b: &BlockMatrix) -> Result<f64, SdpError> {
    if a.dims() != b.dims() {
        return Err(SdpError::DimensionMismatch);
    }
    let mut s = 0.0;
    for (x, y) in a.blocks().iter().zip(b.blocks()) {
        for i in 0..x.dim() {
            s += x.get(i, i) * y.get(i, i);
            for j in 0..i {
                s += 2.0 * x.get(i, j) * y.get(i, j);
            }
        }
    }
    Ok(s)
}

pub fn min_eigenvalue(m: &SymMatrix) -> Result<f64, SdpError> {
    if !m.is_finite() {
        return Err(SdpError::NonFinite);
    }
    Ok(linalg::min_eig(&m.to_dense()))
}

/// All eigenvalues in ascending order.
pub fn eigenvalues(m: &SymMatrix) -> Result<Vec<f64>, SdpError> {
    if !m.is_finite() {
        return Err(SdpError::NonFinite);
    }
    Ok(linalg::sym_eigen(&m.to_dense()).0)
}

/// Spectral factorization `M ≈ Σ wᵢ vᵢ vᵢᵀ` with unit vectors and positive
/// weights. Slightly negative eigenvalues are clamped to zero and weights
/// too small to matter at `tol` are dropped.
pub fn psd_factor(m: &SymMatrix, tol: f64) -> Result<Vec<(f64, Vec<f64>)>, SdpError> {
    if !m.is_finite() {
        return Err(SdpError::NonFinite);
    }
    let n = m.dim();
    if n == 0 {
        return Ok(Vec::new());
    }
    let scale = m.max_abs().max(1.0);
    let (values, vectors) = linalg::sym_eigen(&m.to_dense());
    if values[0] < -tol * scale {
        return Err(SdpError::NotPsd {
            min_eigenvalue: values[0],
        });
    }
    // Dropping all weights below this keeps the reconstruction within
    // tol·scale entrywise.
    let floor = tol * scale / n as f64;
    let mut out = Vec::new();
    for (k, &w) in values.iter().enumerate().rev() {
        if w <= floor {
            continue;
        }
        out.push((w, (0..n).map(|i| vectors.get(i, k)).collect()));
    }
    Ok(out)
}
