//! Dense square-matrix kernels used by the solver: Cholesky factorization,
//! triangular solves and the cyclic Jacobi symmetric eigensolver.

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Dense {
    pub n: usize,
    pub data: Vec<f64>,
}

impl Dense {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::scaled_identity(n, 1.0)
    }

    pub fn scaled_identity(n: usize, s: f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = s;
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    #[inline]
    pub fn add_at(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] += v;
    }

    pub fn matmul(&self, other: &Dense) -> Dense {
        let n = self.n;
        let mut out = Dense::zeros(n);
        for i in 0..n {
            let out_row = &mut out.data[i * n..(i + 1) * n];
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0.0 {
                    continue;
                }
                let brow = &other.data[k * n..(k + 1) * n];
                for (o, b) in out_row.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Dense {
        let n = self.n;
        let mut out = Dense::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j];
            }
        }
        out
    }

    /// `(A + Aᵀ) / 2`.
    pub fn symmetrize(&mut self) {
        let n = self.n;
        for i in 0..n {
            for j in (i + 1)..n {
                let v = 0.5 * (self.data[i * n + j] + self.data[j * n + i]);
                self.data[i * n + j] = v;
                self.data[j * n + i] = v;
            }
        }
    }

    pub fn axpy(&mut self, alpha: f64, x: &Dense) {
        for (a, b) in self.data.iter_mut().zip(&x.data) {
            *a += alpha * b;
        }
    }

    pub fn scale(&mut self, s: f64) {
        for a in &mut self.data {
            *a *= s;
        }
    }

    pub fn dot(&self, other: &Dense) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn frobenius(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Lower Cholesky factor `L` with `A = L Lᵀ`, or `None` when `A` is not
/// numerically positive definite.
pub(crate) fn cholesky(a: &Dense) -> Option<Dense> {
    let n = a.n;
    let mut l = Dense::zeros(n);
    for j in 0..n {
        let mut d = a.get(j, j);
        for k in 0..j {
            let v = l.get(j, k);
            d -= v * v;
        }
        if !(d > 0.0) || !d.is_finite() {
            return None;
        }
        let d = d.sqrt();
        l.set(j, j, d);
        for i in (j + 1)..n {
            let mut s = a.get(i, j);
            let (ri, rj) = (&l.data[i * n..i * n + j], &l.data[j * n..j * n + j]);
            for (x, y) in ri.iter().zip(rj) {
                s -= x * y;
            }
            l.set(i, j, s / d);
        }
    }
    Some(l)
}

/// Diagonally pivoted Cholesky `P A Pᵀ = L Lᵀ` of a positive semidefinite
/// matrix, stopping once the largest remaining pivot falls below
/// `tol·max diag`.
pub(crate) struct PivotedCholesky {
    perm: Vec<usize>,
    l: Dense,
    rank: usize,
}

impl PivotedCholesky {
    pub(crate) fn new(a: &Dense, tol: f64) -> Self {
        let n = a.n;
        let mut w = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = (0..n).map(|i| a.get(i, i)).fold(0.0f64, f64::max);
        let mut rank = 0;
        for k in 0..n {
            let (piv, d) = (k..n)
                .map(|i| (i, w.get(i, i)))
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .expect("non-empty range");
            if !(d > tol * scale) {
                break;
            }
            if piv != k {
                perm.swap(k, piv);
                for c in 0..n {
                    let t = w.get(k, c);
                    w.set(k, c, w.get(piv, c));
                    w.set(piv, c, t);
                }
                for r in 0..n {
                    let t = w.get(r, k);
                    w.set(r, k, w.get(r, piv));
                    w.set(r, piv, t);
                }
            }
            let d = d.sqrt();
            w.set(k, k, d);
            for i in (k + 1)..n {
                let v = w.get(i, k) / d;
                w.set(i, k, v);
            }
            for j in (k + 1)..n {
                let wj = w.get(j, k);
                for i in j..n {
                    let v = w.get(i, j) - w.get(i, k) * wj;
                    w.set(i, j, v);
                    w.set(j, i, v);
                }
            }
            rank += 1;
        }
        let mut l = Dense::zeros(n);
        for i in 0..n {
            for j in 0..rank.min(i + 1) {
                l.set(i, j, w.get(i, j));
            }
        }
        Self { perm, l, rank }
    }

    pub(crate) fn rank(&self) -> usize {
        self.rank
    }

    /// Solves on the leading `rank` pivots; the remaining components of the
    /// solution are zero.
    pub(crate) fn solve(&self, b: &mut [f64]) {
        let r = self.rank;
        let mut v: Vec<f64> = self.perm[..r].iter().map(|&p| b[p]).collect();
        for i in 0..r {
            let mut s = v[i];
            for k in 0..i {
                s -= self.l.get(i, k) * v[k];
            }
            v[i] = s / self.l.get(i, i);
        }
        for i in (0..r).rev() {
            let mut s = v[i];
            for k in (i + 1)..r {
                s -= self.l.get(k, i) * v[k];
            }
            v[i] = s / self.l.get(i, i);
        }
        b.iter_mut().for_each(|x| *x = 0.0);
        for (i, &p) in self.perm[..r].iter().enumerate() {
            b[p] = v[i];
        }
    }
}

/// Solves `L Lᵀ x = b` in place.
pub(crate) fn cholesky_solve(l: &Dense, b: &mut [f64]) {
    let n = l.n;
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l.get(i, k) * b[k];
        }
        b[i] = s / l.get(i, i);
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in (i + 1)..n {
            s -= l.get(k, i) * b[k];
        }
        b[i] = s / l.get(i, i);
    }
}

/// `L⁻¹ B` for lower-triangular `L`.
pub(crate) fn forward_solve_matrix(l: &Dense, b: &Dense) -> Dense {
    let n = l.n;
    let mut x = b.clone();
    for i in 0..n {
        let lii = l.get(i, i);
        for k in 0..i {
            let lik = l.get(i, k);
            if lik == 0.0 {
                continue;
            }
            for j in 0..n {
                let v = x.data[k * n + j];
                x.data[i * n + j] -= lik * v;
            }
        }
        for j in 0..n {
            x.data[i * n + j] /= lii;
        }
    }
    x
}

/// Inverse of `A = L Lᵀ`.
pub(crate) fn cholesky_inverse(l: &Dense) -> Dense {
    let linv = forward_solve_matrix(l, &Dense::identity(l.n));
    // A⁻¹ = L⁻ᵀ L⁻¹
    let n = l.n;
    let mut out = Dense::zeros(n);
    for i in 0..n {
        for j in i..n {
            let mut s = 0.0;
            for k in j..n {
                s += linv.get(k, i) * linv.get(k, j);
            }
            out.set(i, j, s);
            out.set(j, i, s);
        }
    }
    out
}

/// Eigenvalues (ascending) and eigenvectors (columns of the returned matrix)
/// of a symmetric matrix by cyclic Jacobi rotations.
pub(crate) fn sym_eigen(a: &Dense) -> (Vec<f64>, Dense) {
    let n = a.n;
    let mut m = a.clone();
    m.symmetrize();
    let mut v = Dense::identity(n);
    let scale = m.frobenius().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m.get(i, j) * m.get(i, j);
            }
        }
        if off.sqrt() <= 1e-17 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m.get(p, q);
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let app = m.get(p, p);
                let aqq = m.get(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m.get(k, p);
                    let mkq = m.get(k, q);
                    m.set(k, p, c * mkp - s * mkq);
                    m.set(k, q, s * mkp + c * mkq);
                }
                for k in 0..n {
                    let mpk = m.get(p, k);
                    let mqk = m.get(q, k);
                    m.set(p, k, c * mpk - s * mqk);
                    m.set(q, k, s * mpk + c * mqk);
                }
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m.get(i, i).total_cmp(&m.get(j, j)));
    let values: Vec<f64> = order.iter().map(|&i| m.get(i, i)).collect();
    let mut vectors = Dense::zeros(n);
    for (col, &src) in order.iter().enumerate() {
        for k in 0..n {
            vectors.set(k, col, v.get(k, src));
        }
    }
    (values, vectors)
}

pub(crate) fn min_eig(a: &Dense) -> f64 {
    if a.n == 0 {
        return f64::INFINITY;
    }
    sym_eigen(a).0[0]
}

pub(crate) fn max_eig(a: &Dense) -> f64 {
    if a.n == 0 {
        return f64::NEG_INFINITY;
    }
    *sym_eigen(a).0.last().expect("non-empty")
}

/// Largest `α` with `X + α dX ⪰ 0`, given the Cholesky factor of `X ≻ 0`.
pub(crate) fn max_step(l: &Dense, dx: &Dense) -> f64 {
    let y = forward_solve_matrix(l, dx);
    let mut w = forward_solve_matrix(l, &y.transpose());
    w.symmetrize();
    let lambda = min_eig(&w);
    if lambda >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lambda
    }
}
