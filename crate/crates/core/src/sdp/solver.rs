//! Infeasible-start primal-dual path following with the HKM search direction.
//!
//! Each iteration linearizes `A(X) = b`, `Aᵀy + S = C` and `XS = σμI`,
//! eliminates `dX` and `dS`, and solves the Schur complement system
//! `M dy = r` with `M_ij = ⟨A_i, X A_j S⁻¹⟩` by Cholesky.

use log::debug;

use super::linalg::{self, cholesky, cholesky_inverse, cholesky_solve, max_step, Dense, PivotedCholesky};
use super::matrix::{BlockMatrix, SparseBlockMatrix, SymMatrix};
use super::{SdpError, SdpProblem};

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub gap_tol: f64,
    pub feas_tol: f64,
    pub max_iter: usize,
    /// Centering parameter σ applied to μ in the Newton target when the
    /// predictor-corrector step is off.
    pub gamma: f64,
    /// Mehrotra-type predictor-corrector with adaptive centering.
    pub predictor_corrector: bool,
    /// Fraction of the distance to the PSD boundary taken per step.
    pub step_fraction: f64,
    /// Relative pivot threshold of the pivoted fallback factorization used
    /// when the Schur complement is not numerically positive definite;
    /// rows below it are treated as dependent for that step.
    pub regularization: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            gap_tol: 1e-8,
            feas_tol: 1e-8,
            max_iter: 200,
            gamma: 0.3,
            predictor_corrector: true,
            step_fraction: 0.95,
            regularization: 1e-14,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SdpError> {
        let unit = |v: f64| v > 0.0 && v < 1.0;
        if !(self.gap_tol > 0.0 && self.feas_tol > 0.0 && self.regularization > 0.0) {
            return Err(SdpError::InvalidConfig("tolerances must be positive".into()));
        }
        if !unit(self.gamma) || !unit(self.step_fraction) {
            return Err(SdpError::InvalidConfig(
                "gamma and step_fraction must lie in (0, 1)".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SdpStatus {
    Optimal,
    Infeasible,
    NumericalFailure,
    IterationLimit,
}

/// Per-iteration quantities, measured on the original (unscaled) data.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub mu: f64,
    pub primal_objective: f64,
    pub dual_objective: f64,
    /// `⟨X, S⟩`.
    pub complementarity: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    /// `|yᵀ(A(X) − b)| + |⟨C − Aᵀy − S, X⟩|`: the amount by which an infeasible
    /// iterate may violate weak duality.
    pub infeasibility_slack: f64,
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub status: SdpStatus,
    pub x: BlockMatrix,
    pub y: Vec<f64>,
    pub s: BlockMatrix,
    pub primal_objective: f64,
    pub dual_objective: f64,
    /// `⟨X, S⟩` at the final iterate.
    pub gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
    pub history: Vec<IterationRecord>,
    /// On `Infeasible`: `y` with `bᵀy = 1` and `Σ yⱼAⱼ ⪯ ε I`.
    pub ray: Option<Vec<f64>>,
}

/// Read-only view of the current iterate, handed to observers.
pub struct IterateView<'a> {
    pub record: &'a IterationRecord,
    x: &'a [Dense],
    s: &'a [Dense],
}

impl IterateView<'_> {
    pub fn min_eigenvalue_x(&self) -> f64 {
        self.x.iter().map(linalg::min_eig).fold(f64::INFINITY, f64::min)
    }

    pub fn min_eigenvalue_s(&self) -> f64 {
        self.s.iter().map(linalg::min_eig).fold(f64::INFINITY, f64::min)
    }

    pub fn x(&self) -> BlockMatrix {
        to_block(self.x)
    }

    pub fn s(&self) -> BlockMatrix {
        to_block(self.s)
    }
}

fn to_block(ds: &[Dense]) -> BlockMatrix {
    BlockMatrix::new(ds.iter().map(SymMatrix::from_dense).collect())
}

pub fn solve(p: &SdpProblem, cfg: &SolverConfig) -> Result<SdpSolution, SdpError> {
    solve_with_observer(p, cfg, |_| {})
}

// One constraint row split by block: (i, j, value), i ≤ j.
type Row = Vec<Vec<(usize, usize, f64)>>;

fn split_rows(m: &SparseBlockMatrix, nblocks: usize, scale: f64) -> Row {
    let mut row = vec![Vec::new(); nblocks];
    for e in m.entries() {
        row[e.block].push((e.i, e.j, e.value * scale));
    }
    row
}

fn dense_blocks(m: &SparseBlockMatrix, dims: &[usize]) -> Vec<Dense> {
    let mut out: Vec<Dense> = dims.iter().map(|&d| Dense::zeros(d)).collect();
    for e in m.entries() {
        out[e.block].add_at(e.i, e.j, e.value);
        if e.i != e.j {
            out[e.block].add_at(e.j, e.i, e.value);
        }
    }
    out
}

fn row_inner(row: &Row, x: &[Dense]) -> f64 {
    let mut s = 0.0;
    for (k, entries) in row.iter().enumerate() {
        let d = &x[k];
        for &(i, j, v) in entries {
            s += if i == j {
                v * d.get(i, i)
            } else {
                v * (d.get(i, j) + d.get(j, i))
            };
        }
    }
    s
}

fn blocks_dot(a: &[Dense], b: &[Dense]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

fn blocks_max_abs(a: &[Dense]) -> f64 {
    a.iter().fold(0.0, |m, d| m.max(d.max_abs()))
}

/// `Σ yᵢ Aᵢ` as dense blocks.
fn adjoint(rows: &[Row], y: &[f64], dims: &[usize]) -> Vec<Dense> {
    let mut out: Vec<Dense> = dims.iter().map(|&d| Dense::zeros(d)).collect();
    for (row, &yi) in rows.iter().zip(y) {
        if yi == 0.0 {
            continue;
        }
        for (k, entries) in row.iter().enumerate() {
            for &(i, j, v) in entries {
                out[k].add_at(i, j, yi * v);
                if i != j {
                    out[k].add_at(j, i, yi * v);
                }
            }
        }
    }
    out
}

struct Presolved {
    /// Indices of the rows kept after removing linearly dependent ones.
    kept: Vec<usize>,
    /// Row norms used for scaling, per original row.
    norms: Vec<f64>,
    /// A Farkas ray (original row indexing) if a removed row is inconsistent.
    inconsistent: Option<Vec<f64>>,
}

/// Pivoted Cholesky on the Gram matrix of the normalized rows; rows whose
/// remaining pivot falls below the threshold are linear combinations of the
/// kept ones and are dropped after a consistency check on `b`.
fn presolve(p: &SdpProblem) -> Presolved {
    const PIVOT_TOL: f64 = 1e-12;
    let m = p.a.len();
    let norms: Vec<f64> = p.a.iter().map(|a| a.frobenius_sq().sqrt()).collect();
    // positions -> (row, scaled value, weight)
    let mut by_pos: std::collections::HashMap<(usize, usize, usize), Vec<(usize, f64)>> =
        std::collections::HashMap::new();
    for (r, a) in p.a.iter().enumerate() {
        if norms[r] == 0.0 {
            continue;
        }
        for e in a.entries() {
            by_pos
                .entry((e.block, e.i, e.j))
                .or_default()
                .push((r, e.value / norms[r]));
        }
    }
    let mut gram = Dense::zeros(m);
    for ((_, i, j), list) in &by_pos {
        let w = if i == j { 1.0 } else { 2.0 };
        for &(r1, v1) in list {
            for &(r2, v2) in list {
                gram.add_at(r1, r2, w * v1 * v2);
            }
        }
    }
    let b_hat: Vec<f64> = (0..m)
        .map(|r| if norms[r] > 0.0 { p.b[r] / norms[r] } else { p.b[r] })
        .collect();

    // Partial pivoted Cholesky: after k steps, `work` holds the Schur
    // complement of the pivoted rows.
    let mut work = gram.clone();
    let mut remaining: Vec<usize> = (0..m).collect();
    let mut kept = Vec::new();
    loop {
        let best = remaining
            .iter()
            .copied()
            .max_by(|&a, &b| work.get(a, a).total_cmp(&work.get(b, b)));
        let Some(piv) = best else { break };
        let d = work.get(piv, piv);
        if !(d > PIVOT_TOL) {
            break;
        }
        remaining.retain(|&r| r != piv);
        kept.push(piv);
        let col: Vec<f64> = (0..m).map(|r| work.get(r, piv)).collect();
        for &r1 in &remaining {
            for &r2 in &remaining {
                let v = work.get(r1, r2) - col[r1] * col[r2] / d;
                work.set(r1, r2, v);
            }
        }
    }
    kept.sort_unstable();

    let mut inconsistent = None;
    if !remaining.is_empty() {
        let k = kept.len();
        let mut gkk = Dense::zeros(k);
        for (a, &ra) in kept.iter().enumerate() {
            for (b, &rb) in kept.iter().enumerate() {
                gkk.set(a, b, gram.get(ra, rb));
            }
        }
        let l = cholesky(&gkk);
        let bscale = 1.0 + b_hat.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for &r in &remaining {
            let mut c: Vec<f64> = kept.iter().map(|&ra| gram.get(ra, r)).collect();
            if let Some(l) = &l {
                cholesky_solve(l, &mut c);
            }
            let predicted: f64 = kept.iter().zip(&c).map(|(&ra, ci)| ci * b_hat[ra]).sum();
            let mismatch = b_hat[r] - predicted;
            if mismatch.abs() > 1e-8 * bscale {
                // y = (e_r − Σ c e_K) / mismatch in scaled rows, then unscaled.
                let mut ray = vec![0.0; m];
                let nr = if norms[r] > 0.0 { norms[r] } else { 1.0 };
                ray[r] = 1.0 / (mismatch * nr);
                for (&ra, ci) in kept.iter().zip(&c) {
                    ray[ra] = -ci / (mismatch * norms[ra]);
                }
                inconsistent = Some(ray);
                break;
            }
        }
    }
    Presolved {
        kept,
        norms,
        inconsistent,
    }
}

/// Schur complement `M_ij = ⟨A_i, X A_j Z⟩` with `Z = S⁻¹`.
fn schur_complement(rows: &[&Row], x: &[Dense], z: &[Dense], dims: &[usize]) -> Dense {
    let m = rows.len();
    let mut mat = Dense::zeros(m);
    for (k, &n) in dims.iter().enumerate() {
        let active: Vec<usize> = (0..m).filter(|&i| !rows[i][k].is_empty()).collect();
        if active.is_empty() {
            continue;
        }
        let nnz: usize = active.iter().map(|&i| rows[i][k].len()).sum();
        let avg = nnz as f64 / active.len() as f64;
        let sparse_cost = (nnz as f64).powi(2) * 4.0;
        let dense_cost = active.len() as f64 * (avg * n as f64 + (n as f64).powi(3)) + nnz as f64 * active.len() as f64;
        let (xk, zk) = (&x[k], &z[k]);
        if sparse_cost <= dense_cost {
            schur_block_sparse(rows, &active, k, xk, zk, &mut mat);
        } else {
            schur_block_dense(rows, &active, k, xk, zk, &mut mat);
        }
    }
    for i in 0..m {
        for j in 0..i {
            let v = 0.5 * (mat.get(i, j) + mat.get(j, i));
            mat.set(i, j, v);
            mat.set(j, i, v);
        }
    }
    mat
}

#[inline]
fn pairs(p: usize, q: usize) -> ([(usize, usize); 2], usize) {
    ([(p, q), (q, p)], if p == q { 1 } else { 2 })
}

fn schur_block_sparse(rows: &[&Row], active: &[usize], k: usize, x: &Dense, z: &Dense, mat: &mut Dense) {
    for (ai, &i) in active.iter().enumerate() {
        for &j in &active[ai..] {
            let mut s = 0.0;
            for &(p, q, w) in &rows[i][k] {
                let (pq, npq) = pairs(p, q);
                for &(r, t, v) in &rows[j][k] {
                    let (rs, nrs) = pairs(r, t);
                    let mut kk = 0.0;
                    // tr(e_a e_bᵀ X e_c e_dᵀ Z) = X_bc Z_da
                    for &(a, b) in &pq[..npq] {
                        for &(c, d) in &rs[..nrs] {
                            kk += x.get(b, c) * z.get(d, a);
                        }
                    }
                    s += w * v * kk;
                }
            }
            mat.add_at(i, j, s);
            if i != j {
                mat.add_at(j, i, s);
            }
        }
    }
}

fn schur_block_dense(rows: &[&Row], active: &[usize], k: usize, x: &Dense, z: &Dense, mat: &mut Dense) {
    let n = x.n;
    for (aj, &j) in active.iter().enumerate() {
        // T = A_j Z, then G = X T.
        let mut t = Dense::zeros(n);
        for &(p, q, v) in &rows[j][k] {
            for c in 0..n {
                t.add_at(p, c, v * z.get(q, c));
            }
            if p != q {
                for c in 0..n {
                    t.add_at(q, c, v * z.get(p, c));
                }
            }
        }
        let g = x.matmul(&t);
        for &i in &active[..=aj] {
            let mut s = 0.0;
            for &(p, q, w) in &rows[i][k] {
                s += if p == q {
                    w * g.get(p, p)
                } else {
                    w * (g.get(p, q) + g.get(q, p))
                };
            }
            mat.add_at(i, j, s);
            if i != j {
                mat.add_at(j, i, s);
            }
        }
    }
}

pub fn solve_with_observer<F>(p: &SdpProblem, cfg: &SolverConfig, mut observe: F) -> Result<SdpSolution, SdpError>
where
    F: FnMut(&IterateView<'_>),
{
    cfg.validate()?;
    let dims = p.block_dims.clone();
    let nb = dims.len();
    let m_all = p.a.len();
    let n_total: usize = dims.iter().sum();
    let nf = n_total.max(1) as f64;

    let pre = presolve(p);
    let c_dense = dense_blocks(&p.c, &dims);
    let b_inf = p.b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let c_inf = p.c.max_abs();

    if let Some(ray) = pre.inconsistent {
        debug!("sdp: dependent constraint rows with inconsistent right-hand side");
        let zero = BlockMatrix::zeros(&dims);
        return Ok(SdpSolution {
            status: SdpStatus::Infeasible,
            x: zero.clone(),
            y: vec![0.0; m_all],
            s: zero,
            primal_objective: f64::NAN,
            dual_objective: f64::NAN,
            gap: f64::NAN,
            primal_residual: f64::NAN,
            dual_residual: f64::NAN,
            iterations: 0,
            history: Vec::new(),
            ray: Some(ray),
        });
    }

    let kept = pre.kept;
    let rows: Vec<Row> = kept
        .iter()
        .map(|&r| split_rows(&p.a[r], nb, 1.0 / pre.norms[r]))
        .collect();
    let row_refs: Vec<&Row> = rows.iter().collect();
    let all_rows: Vec<Row> = p.a.iter().map(|a| split_rows(a, nb, 1.0)).collect();
    let b_hat: Vec<f64> = kept.iter().map(|&r| p.b[r] / pre.norms[r]).collect();
    let m = kept.len();

    let c_fro = blocks_dot(&c_dense, &c_dense).sqrt();
    let sqrt_n = nf.sqrt();
    let xi = b_hat
        .iter()
        .map(|bi| nf * (1.0 + bi.abs()) / 2.0)
        .fold(10f64.max(sqrt_n), f64::max);
    let eta = 10f64.max(sqrt_n).max(c_fro).max(1.0);
    let mut x: Vec<Dense> = dims.iter().map(|&d| Dense::scaled_identity(d, xi)).collect();
    let mut s: Vec<Dense> = dims.iter().map(|&d| Dense::scaled_identity(d, eta)).collect();
    let mut y = vec![0.0; m];
    // With ⟨C, X0⟩ < 0 the default y0 = 0 would start with bᵀy0 > ⟨C, X0⟩;
    // moving y0 along −b restores weak duality without touching X0 or S0.
    let cx0 = xi * c_dense.iter().map(|c| (0..c.n).map(|i| c.get(i, i)).sum::<f64>()).sum::<f64>();
    let bb: f64 = b_hat.iter().map(|v| v * v).sum();
    if cx0 < 0.0 && bb > 0.0 {
        y = b_hat.iter().map(|v| 2.0 * cx0 / bb * v).collect();
    }

    let mut history = Vec::new();
    let mut status = SdpStatus::IterationLimit;
    let mut ray = None;
    let mut stall = 0usize;
    let mut tiny_steps = 0usize;
    let mut best_dual_res = f64::INFINITY;
    let mut iterations = 0;

    let unscale_y = |y: &[f64]| -> Vec<f64> {
        let mut full = vec![0.0; m_all];
        for (k, &r) in kept.iter().enumerate() {
            full[r] = y[k] / pre.norms[r];
        }
        full
    };

    for iter in 0..=cfg.max_iter {
        iterations = iter;
        let aty = adjoint(&rows, &y, &dims);
        let rd: Vec<Dense> = (0..nb)
            .map(|k| {
                let mut r = c_dense[k].clone();
                r.axpy(-1.0, &aty[k]);
                r.axpy(-1.0, &s[k]);
                r
            })
            .collect();
        let rp: Vec<f64> = rows
            .iter()
            .zip(&b_hat)
            .map(|(row, bi)| bi - row_inner(row, &x))
            .collect();
        let xs = blocks_dot(&x, &s);
        let mu = xs / nf;
        let pobj = blocks_dot(&c_dense, &x);
        let dobj: f64 = b_hat.iter().zip(&y).map(|(b, y)| b * y).sum();
        let prim_res = all_rows
            .iter()
            .zip(&p.b)
            .map(|(row, bi)| (row_inner(row, &x) - bi).abs())
            .fold(0.0, f64::max);
        let dual_res = blocks_max_abs(&rd);
        let slack = rp.iter().zip(&y).map(|(r, y)| r * y).sum::<f64>().abs() + blocks_dot(&rd, &x).abs();
        let record = IterationRecord {
            iteration: iter,
            mu,
            primal_objective: pobj,
            dual_objective: dobj,
            complementarity: xs,
            primal_residual: prim_res,
            dual_residual: dual_res,
            infeasibility_slack: slack,
        };
        observe(&IterateView {
            record: &record,
            x: &x,
            s: &s,
        });
        history.push(record);

        if !(mu.is_finite() && pobj.is_finite() && dobj.is_finite()) {
            status = SdpStatus::NumericalFailure;
            break;
        }
        if xs <= cfg.gap_tol * (1.0 + pobj.abs())
            && prim_res <= cfg.feas_tol * (1.0 + b_inf)
            && dual_res <= cfg.feas_tol * (1.0 + c_inf)
        {
            status = SdpStatus::Optimal;
            break;
        }
        // With the gap and the primal residual converged, a dual residual that
        // keeps growing means the dual optimum is not attained.
        best_dual_res = best_dual_res.min(dual_res);
        if xs <= cfg.gap_tol * (1.0 + pobj.abs())
            && prim_res <= cfg.feas_tol * (1.0 + b_inf)
            && dual_res > 1e3 * best_dual_res.max(cfg.feas_tol * 1e-3)
        {
            debug!("sdp: dual residual diverging at iteration {iter}");
            status = SdpStatus::NumericalFailure;
            break;
        }
        if dobj > 0.0 {
            let lmax = aty.iter().map(linalg::max_eig).fold(f64::NEG_INFINITY, f64::max);
            if lmax / dobj <= cfg.feas_tol {
                let full = unscale_y(&y);
                ray = Some(full.iter().map(|v| v / dobj).collect());
                status = SdpStatus::Infeasible;
                break;
            }
        }
        if dobj > 1.0 / cfg.feas_tol && prim_res > cfg.feas_tol * (1.0 + b_inf) {
            stall += 1;
            if stall >= 20 {
                status = SdpStatus::Infeasible;
                let full = unscale_y(&y);
                ray = Some(full.iter().map(|v| v / dobj).collect());
                break;
            }
        } else {
            stall = 0;
        }
        if iter == cfg.max_iter {
            break;
        }

        // Newton direction.
        let mut lx = Vec::with_capacity(nb);
        let mut ls = Vec::with_capacity(nb);
        let mut z = Vec::with_capacity(nb);
        let mut factor_ok = true;
        for k in 0..nb {
            match (cholesky(&x[k]), cholesky(&s[k])) {
                (Some(a), Some(b)) => {
                    z.push(cholesky_inverse(&b));
                    lx.push(a);
                    ls.push(b);
                }
                _ => {
                    factor_ok = false;
                    break;
                }
            }
        }
        if !factor_ok {
            status = SdpStatus::NumericalFailure;
            break;
        }
        // Factor D^{-1/2} M D^{-1/2} with D = diag(M): row scales of M spread
        // over many orders of magnitude on degenerate problems.
        let schur_exact = schur_complement(&row_refs, &x, &z, &dims);
        let dscale: Vec<f64> = (0..m)
            .map(|i| {
                let d = schur_exact.get(i, i);
                if d > 0.0 { 1.0 / d.sqrt() } else { 1.0 }
            })
            .collect();
        let mut schur = schur_exact.clone();
        for i in 0..m {
            for j in 0..m {
                schur.set(i, j, schur_exact.get(i, j) * dscale[i] * dscale[j]);
            }
        }
        let factor = if m == 0 { Some(Dense::zeros(0)) } else { cholesky(&schur) };
        let pivoted = factor.is_none().then(|| PivotedCholesky::new(&schur, cfg.regularization));
        let refine = pivoted.is_some();
        if let Some(pc) = &pivoted {
            debug!("sdp it {iter}: Schur complement factored with rank {} of {m}", pc.rank());
        }
        let schur_solve = |v: &mut Vec<f64>| {
            for (vi, d) in v.iter_mut().zip(&dscale) {
                *vi *= d;
            }
            match (&factor, &pivoted) {
                (Some(l), _) => cholesky_solve(l, v),
                (None, Some(pc)) => pc.solve(v),
                _ => unreachable!(),
            }
            for (vi, d) in v.iter_mut().zip(&dscale) {
                *vi *= d;
            }
        };
        let xrdz: Vec<Dense> = (0..nb).map(|k| x[k].matmul(&rd[k]).matmul(&z[k])).collect();
        let base_rhs: Vec<f64> = (0..m)
            .map(|i| b_hat[i] + row_inner(&rows[i], &xrdz))
            .collect();
        let a_z: Vec<f64> = rows.iter().map(|row| row_inner(row, &z)).collect();

        // dX = σμZ − X − sym((X dS + corr) Z), with `corr` the second-order
        // term of the corrector step.
        let direction = |sigma_mu: f64, corr: Option<&[Dense]>| {
            let corr_z: Option<Vec<Dense>> =
                corr.map(|c| (0..nb).map(|k| c[k].matmul(&z[k])).collect());
            let mut rhs: Vec<f64> = (0..m)
                .map(|i| {
                    let extra = corr_z.as_ref().map_or(0.0, |cz| row_inner(&rows[i], cz));
                    base_rhs[i] - sigma_mu * a_z[i] + extra
                })
                .collect();
            let target = rhs.clone();
            schur_solve(&mut rhs);
            if refine {
                // Iterative refinement against the full matrix.
                for _ in 0..3 {
                    let mut r: Vec<f64> = (0..m)
                        .map(|i| target[i] - (0..m).map(|j| schur_exact.get(i, j) * rhs[j]).sum::<f64>())
                        .collect();
                    schur_solve(&mut r);
                    for (d, c) in rhs.iter_mut().zip(&r) {
                        *d += c;
                    }
                }
            }
            let dy = rhs;
            let at_dy = adjoint(&rows, &dy, &dims);
            let mut ds = Vec::with_capacity(nb);
            let mut dx = Vec::with_capacity(nb);
            for k in 0..nb {
                let mut dsk = rd[k].clone();
                dsk.axpy(-1.0, &at_dy[k]);
                let mut t = x[k].matmul(&dsk);
                if let Some(c) = corr {
                    t.axpy(1.0, &c[k]);
                }
                let mut t = t.matmul(&z[k]);
                t.symmetrize();
                let mut dxk = z[k].clone();
                dxk.scale(sigma_mu);
                dxk.axpy(-1.0, &x[k]);
                dxk.axpy(-1.0, &t);
                dxk.symmetrize();
                dx.push(dxk);
                ds.push(dsk);
            }
            (dy, dx, ds)
        };
        let steps = |dx: &[Dense], ds: &[Dense]| {
            let mut ap = 1f64;
            let mut ad = 1f64;
            for k in 0..nb {
                ap = ap.min(max_step(&lx[k], &dx[k]));
                ad = ad.min(max_step(&ls[k], &ds[k]));
            }
            (ap, ad)
        };
        let mu_at = |dx: &[Dense], ds: &[Dense], ap: f64, ad: f64| -> f64 {
            let mut acc = 0.0;
            for k in 0..nb {
                let mut xk = x[k].clone();
                xk.axpy(ap, &dx[k]);
                let mut sk = s[k].clone();
                sk.axpy(ad, &ds[k]);
                acc += xk.dot(&sk);
            }
            acc / nf
        };

        let (dy, dx, ds) = if cfg.predictor_corrector {
            let (_, dxp, dsp) = direction(0.0, None);
            let (ap, ad) = steps(&dxp, &dsp);
            let (ap, ad) = (ap.min(1.0), ad.min(1.0));
            let ratio = (mu_at(&dxp, &dsp, ap, ad) / mu).clamp(0.0, 1.0);
            let expon = (3.0 * ap.min(ad).powi(2)).max(1.0);
            let sigma = ratio.powf(expon).min(1.0);
            let corr: Vec<Dense> = (0..nb).map(|k| dxp[k].matmul(&dsp[k])).collect();
            direction(sigma * mu, Some(&corr))
        } else {
            direction(cfg.gamma * mu, None)
        };
        if !(dy.iter().all(|v| v.is_finite()) && dx.iter().all(Dense::is_finite) && ds.iter().all(Dense::is_finite)) {
            status = SdpStatus::NumericalFailure;
            break;
        }
        let (ap, ad) = steps(&dx, &ds);
        let mut ap = (cfg.step_fraction * ap).min(1.0);
        let mut ad = (cfg.step_fraction * ad).min(1.0);
        // Keep μ monotone: shrink both steps until the new complementarity
        // does not exceed the current one.
        let mut tries = 0;
        while mu_at(&dx, &ds, ap, ad) > mu && tries < 40 {
            ap *= 0.8;
            ad *= 0.8;
            tries += 1;
        }
        if ap.max(ad) < 1e-10 {
            tiny_steps += 1;
            if tiny_steps >= 5 {
                status = SdpStatus::NumericalFailure;
                break;
            }
        } else {
            tiny_steps = 0;
        }
        for k in 0..nb {
            x[k].axpy(ap, &dx[k]);
            x[k].symmetrize();
            s[k].axpy(ad, &ds[k]);
            s[k].symmetrize();
        }
        for (yi, d) in y.iter_mut().zip(&dy) {
            *yi += ad * d;
        }
        debug!(
            "sdp it {iter:3} mu {mu:.3e} pobj {pobj:.6e} dobj {dobj:.6e} rp {prim_res:.2e} rd {dual_res:.2e} ap {ap:.3} ad {ad:.3}"
        );
    }

    let last = history.last().cloned().expect("at least one record");
    Ok(SdpSolution {
        status,
        x: to_block(&x),
        y: unscale_y(&y),
        s: to_block(&s),
        primal_objective: last.primal_objective,
        dual_objective: last.dual_objective,
        gap: last.complementarity,
        primal_residual: last.primal_residual,
        dual_residual: last.dual_residual,
        iterations,
        history,
        ray,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum Feasibility {
    Feasible(BlockMatrix),
    Infeasible,
    Unknown,
}

/// Decides `{X ⪰ 0 : ⟨A_j, X⟩ = b_j}` by minimizing the trace.
///
/// Besides an optimal solve, any interior iterate meeting the primal
/// residual tolerance is a witness; this matters for problems without a
/// strictly feasible point, where the dual optimum is not attained and the
/// solver cannot close the dual residual.
pub fn feasibility(p: &SdpProblem, cfg: &SolverConfig) -> Feasibility {
    feasibility_with_solution(p, cfg).0
}

pub fn feasibility_with_solution(p: &SdpProblem, cfg: &SolverConfig) -> (Feasibility, Option<SdpSolution>) {
    let q = p.with_objective(SparseBlockMatrix::identity(&p.block_dims));
    let tol = cfg.feas_tol * (1.0 + p.b.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    let mut witness = None;
    let observe = |it: &IterateView<'_>| {
        if it.record.primal_residual <= tol {
            witness = Some(it.x());
        }
    };
    match solve_with_observer(&q, cfg, observe) {
        Ok(sol) => {
            let verdict = match (sol.status, witness) {
                (SdpStatus::Optimal, _) => Feasibility::Feasible(sol.x.clone()),
                (SdpStatus::Infeasible, _) => Feasibility::Infeasible,
                (_, Some(x)) => Feasibility::Feasible(x),
                _ => Feasibility::Unknown,
            };
            (verdict, Some(sol))
        }
        Err(_) => (Feasibility::Unknown, None),
    }
}
