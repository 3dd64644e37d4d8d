use psatz::sdp::{inner, BlockMatrix, SdpProblem, SparseBlockMatrix, SymMatrix};
use rand::Rng;

/// An SDP with a known primal-dual optimal pair.
pub struct KnownOptimum {
    pub problem: SdpProblem,
    pub x: BlockMatrix,
    pub y: Vec<f64>,
    pub s: BlockMatrix,
    pub optimal_value: f64,
}

// Random orthogonal matrix by Gram-Schmidt on a uniform random matrix.
fn random_orthogonal<R: Rng>(rng: &mut R, n: usize) -> Vec<Vec<f64>> {
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        for _ in 0..2 {
            for c in &cols {
                let d: f64 = v.iter().zip(c).map(|(a, b)| a * b).sum();
                for (vi, ci) in v.iter_mut().zip(c) {
                    *vi -= d * ci;
                }
            }
        }
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-3 {
            cols.push(v.into_iter().map(|a| a / norm).collect());
        }
    }
    cols
}

fn outer_sum(cols: &[Vec<f64>], weights: &[f64], n: usize) -> SymMatrix {
    let mut m = SymMatrix::zeros(n);
    for i in 0..n {
        for j in 0..=i {
            let v: f64 = cols.iter().zip(weights).map(|(c, w)| w * c[i] * c[j]).sum();
            m.set(i, j, v);
        }
    }
    m
}

fn random_symmetric<R: Rng>(rng: &mut R, n: usize) -> SymMatrix {
    let mut m = SymMatrix::zeros(n);
    for i in 0..n {
        for j in 0..=i {
            m.set(i, j, rng.random_range(-1.0..1.0));
        }
    }
    m
}

/// Complementary pair `X*`, `S*` (X* on a random subspace, S* on its
/// orthogonal complement), random dense constraints and dual `y*`, with
/// `C = Σ yⱼ* Aⱼ + S*` and `bⱼ = ⟨Aⱼ, X*⟩`.
pub fn complementary_instance<R: Rng>(rng: &mut R, dims: &[usize], m: usize) -> KnownOptimum {
    let mut xs = Vec::new();
    let mut ss = Vec::new();
    for &n in dims {
        let q = random_orthogonal(rng, n);
        let rank = rng.random_range(0..=n);
        let wx: Vec<f64> = (0..rank).map(|_| rng.random_range(0.5..2.0)).collect();
        let ws: Vec<f64> = (rank..n).map(|_| rng.random_range(0.5..2.0)).collect();
        xs.push(outer_sum(&q[..rank], &wx, n));
        ss.push(outer_sum(&q[rank..], &ws, n));
    }
    let x = BlockMatrix::new(xs);
    let s = BlockMatrix::new(ss);
    let a: Vec<BlockMatrix> = (0..m)
        .map(|_| BlockMatrix::new(dims.iter().map(|&n| random_symmetric(rng, n)).collect()))
        .collect();
    let y: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut c = s.clone();
    for (aj, yj) in a.iter().zip(&y) {
        for (k, blk) in aj.blocks().iter().enumerate() {
            let ck = c.block_mut(k);
            for i in 0..blk.dim() {
                for j in 0..=i {
                    ck.set(i, j, ck.get(i, j) + yj * blk.get(i, j));
                }
            }
        }
    }
    let b: Vec<f64> = a.iter().map(|aj| inner(aj, &x).expect("conforming")).collect();
    let optimal_value = inner(&c, &x).expect("conforming");
    let problem = SdpProblem::new(
        dims.to_vec(),
        SparseBlockMatrix::from_dense(&c),
        a.iter().map(SparseBlockMatrix::from_dense).collect(),
        b,
    )
    .expect("well-formed instance");
    KnownOptimum {
        problem,
        x,
        y,
        s,
        optimal_value,
    }
}

/// Random block sizes (each ≤ `max_dim`, at most three blocks) and a
/// constraint count ≤ `max_m` that keeps the rows generically independent.
pub fn random_shape<R: Rng>(rng: &mut R, max_dim: usize, max_m: usize) -> (Vec<usize>, usize) {
    let nblocks = rng.random_range(1..=3);
    let dims: Vec<usize> = (0..nblocks).map(|_| rng.random_range(1..=max_dim)).collect();
    let free: usize = dims.iter().map(|n| n * (n + 1) / 2).sum();
    let m = rng.random_range(1..=max_m.min(free));
    (dims, m)
}
