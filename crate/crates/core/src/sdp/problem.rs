use std::fmt::Write as _;

use super::matrix::{Entry, SparseBlockMatrix};
use super::SdpError;

/// `min ⟨C, X⟩  s.t.  ⟨A_j, X⟩ = b_j,  X ⪰ 0` over block-diagonal `X`.
#[derive(Clone, Debug, PartialEq)]
pub struct SdpProblem {
    pub block_dims: Vec<usize>,
    pub c: SparseBlockMatrix,
    pub a: Vec<SparseBlockMatrix>,
    pub b: Vec<f64>,
}

impl SdpProblem {
    pub fn new(
        block_dims: Vec<usize>,
        c: SparseBlockMatrix,
        a: Vec<SparseBlockMatrix>,
        b: Vec<f64>,
    ) -> Result<Self, SdpError> {
        if a.len() != b.len() {
            return Err(SdpError::InvalidProblem(format!(
                "{} constraint matrices but {} right-hand sides",
                a.len(),
                b.len()
            )));
        }
        if b.iter().any(|v| !v.is_finite()) {
            return Err(SdpError::NonFinite);
        }
        for m in std::iter::once(&c).chain(&a) {
            for e in m.entries() {
                let dim = *block_dims.get(e.block).ok_or_else(|| {
                    SdpError::InvalidProblem(format!("entry refers to block {}", e.block + 1))
                })?;
                if e.j >= dim {
                    return Err(SdpError::InvalidProblem(format!(
                        "entry ({}, {}) outside block {} of size {dim}",
                        e.i + 1,
                        e.j + 1,
                        e.block + 1
                    )));
                }
                if !e.value.is_finite() {
                    return Err(SdpError::NonFinite);
                }
            }
        }
        Ok(Self {
            block_dims,
            c,
            a,
            b,
        })
    }

    pub fn num_constraints(&self) -> usize {
        self.b.len()
    }

    /// Sum of block sizes.
    pub fn total_dim(&self) -> usize {
        self.block_dims.iter().sum()
    }

    pub fn with_objective(&self, c: SparseBlockMatrix) -> Self {
        Self { c, ..self.clone() }
    }

    /// Sparse block text: `m`, block count, block sizes, `b`, then one
    /// `matno blkno i j value` line per upper-triangle nonzero (1-based,
    /// matrix 0 is the objective).
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let join = |xs: &mut dyn Iterator<Item = String>| xs.collect::<Vec<_>>().join(" ");
        writeln!(out, "{}", self.b.len()).unwrap();
        writeln!(out, "{}", self.block_dims.len()).unwrap();
        writeln!(out, "{}", join(&mut self.block_dims.iter().map(|d| d.to_string()))).unwrap();
        writeln!(out, "{}", join(&mut self.b.iter().map(|v| format!("{v:?}")))).unwrap();
        for (matno, m) in std::iter::once(&self.c).chain(&self.a).enumerate() {
            for e in m.entries() {
                writeln!(
                    out,
                    "{matno} {} {} {} {:?}",
                    e.block + 1,
                    e.i + 1,
                    e.j + 1,
                    e.value
                )
                .unwrap();
            }
        }
        out
    }

    pub fn load(text: &str) -> Result<Self, SdpError> {
        let mut lines = text.lines().enumerate();
        let mut header = |what: &str| -> Result<(usize, &str), SdpError> {
            lines.next().ok_or_else(|| SdpError::Format {
                line: 0,
                message: format!("missing {what} line"),
            })
        };
        let fail = |line: usize, message: String| SdpError::Format {
            line: line + 1,
            message,
        };
        let (ln, l) = header("constraint count")?;
        let m: usize = l.trim().parse().map_err(|_| fail(ln, format!("bad count `{l}`")))?;
        let (ln, l) = header("block count")?;
        let nblocks: usize = l.trim().parse().map_err(|_| fail(ln, format!("bad count `{l}`")))?;
        let (ln, l) = header("block sizes")?;
        let dims: Vec<usize> = l
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| fail(ln, format!("bad block size `{t}`"))))
            .collect::<Result<_, _>>()?;
        if dims.len() != nblocks {
            return Err(fail(ln, format!("expected {nblocks} block sizes")));
        }
        let (ln, l) = header("right-hand side")?;
        let b: Vec<f64> = l
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| fail(ln, format!("bad value `{t}`"))))
            .collect::<Result<_, _>>()?;
        if b.len() != m {
            return Err(fail(ln, format!("expected {m} right-hand side values")));
        }
        let mut mats: Vec<Vec<Entry>> = vec![Vec::new(); m + 1];
        for (ln, l) in lines {
            let toks: Vec<&str> = l.split_whitespace().collect();
            if toks.is_empty() {
                continue;
            }
            if toks.len() != 5 {
                return Err(fail(ln, "expected `matno blkno i j value`".into()));
            }
            let idx = |t: &str| -> Result<usize, SdpError> {
                t.parse().map_err(|_| fail(ln, format!("bad index `{t}`")))
            };
            let (matno, block, i, j) = (idx(toks[0])?, idx(toks[1])?, idx(toks[2])?, idx(toks[3])?);
            let value: f64 = toks[4]
                .parse()
                .map_err(|_| fail(ln, format!("bad value `{}`", toks[4])))?;
            if matno > m || block == 0 || i == 0 || j == 0 || i > j {
                return Err(fail(ln, "index out of range (1-based, upper triangle)".into()));
            }
            mats[matno].push(Entry {
                block: block - 1,
                i: i - 1,
                j: j - 1,
                value,
            });
        }
        let mut mats = mats.into_iter().map(SparseBlockMatrix::new);
        let c = mats.next().expect("objective slot");
        SdpProblem::new(dims, c, mats.collect(), b)
    }
}
