use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::Mat;
use crate::lmi::{Assignment, Catalogue, LmiProgram, Objective, VarId, VarKey, VarShape};

/// Coefficient of one packed scalar at `(row, col)` of a block, `row ≥ col`.
/// Off-diagonal entries are mirrored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Triplet {
    pub scalar: usize,
    pub row: usize,
    pub col: usize,
    pub coeff: f64,
}

/// `constant + Σ θ_k A_k ⪰ 0`, already sense-adjusted.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdBlock {
    pub dim: usize,
    pub label: String,
    pub constant: Mat,
    /// Sorted by `(scalar, row, col)`.
    pub triplets: Vec<Triplet>,
}

impl PsdBlock {
    pub fn eval(&self, theta: &[f64]) -> Mat {
        let mut m = self.constant.clone();
        for t in &self.triplets {
            let v = t.coeff * theta[t.scalar];
            m[(t.row, t.col)] += v;
            if t.row != t.col {
                m[(t.col, t.row)] += v;
            }
        }
        m
    }

    /// Coefficient matrix of scalar `k` (zero if `k` does not enter).
    pub fn coefficient(&self, k: usize) -> Mat {
        let mut m = Mat::zeros(self.dim, self.dim);
        for t in self.triplets.iter().filter(|t| t.scalar == k) {
            m[(t.row, t.col)] += t.coeff;
            if t.row != t.col {
                m[(t.col, t.row)] += t.coeff;
            }
        }
        m
    }

    /// Distinct scalars that enter this block, ascending.
    pub fn scalars(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self.triplets.iter().map(|t| t.scalar).collect();
        out.dedup();
        out
    }
}

/// Which matrix entry a packed scalar stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScalarRef {
    pub var: VarKey,
    pub row: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConicProgram {
    pub num_scalars: usize,
    /// Minimized.
    pub objective: Vec<f64>,
    pub blocks: Vec<PsdBlock>,
    pub scalar_map: Vec<ScalarRef>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecodeError {
    #[error("point has length {got}, program has {expected} scalars")]
    Length { expected: usize, got: usize },
}

/// Packed entries of one variable: row-major upper triangle for symmetric
/// shapes, row-major for full ones.
fn entries(shape: VarShape) -> Vec<(usize, usize)> {
    match shape {
        VarShape::Symmetric(d) => (0..d).flat_map(|r| (r..d).map(move |c| (r, c))).collect(),
        VarShape::Full(rows, cols) => (0..rows).flat_map(|r| (0..cols).map(move |c| (r, c))).collect(),
        VarShape::Scalar => vec![(0, 0)],
    }
}

fn basis(shape: VarShape, r: usize, c: usize) -> Mat {
    let (rows, cols) = shape.dims();
    let mut e = Mat::zeros(rows, cols);
    e[(r, c)] = 1.0;
    if matches!(shape, VarShape::Symmetric(_)) {
        e[(c, r)] = 1.0;
    }
    e
}

impl ConicProgram {
    pub fn encode(program: &LmiProgram) -> Self {
        let cat = &program.catalogue;
        let scalar_map: Vec<ScalarRef> = cat
            .vars()
            .iter()
            .flat_map(|v| entries(v.shape).into_iter().map(move |(row, col)| ScalarRef { var: v.key, row, col }))
            .collect();
        let mut objective = vec![0.0; cat.scalar_count()];
        if program.objective == Objective::MinimizeZeta {
            for v in cat.vars() {
                if let VarKey::Zeta { .. } = v.key {
                    objective[v.offset] = 1.0;
                }
            }
        }
        let blocks = program
            .blocks
            .iter()
            .map(|b| {
                let d = b.dim();
                let sign = b.sense.sign();
                let constant = b.sense.adjust(&b.expr.constant);
                // per-variable dense accumulation, then sparse extraction
                let mut by_var: Vec<(VarId, Vec<&crate::lmi::Term>)> = Vec::new();
                for t in &b.expr.terms {
                    match by_var.iter_mut().find(|(v, _)| *v == t.var) {
                        Some((_, ts)) => ts.push(t),
                        None => by_var.push((t.var, vec![t])),
                    }
                }
                by_var.sort_by_key(|(v, _)| *v);
                let mut triplets = Vec::new();
                for (var, terms) in by_var {
                    let info = cat.info(var);
                    for (n, (r, c)) in entries(info.shape).into_iter().enumerate() {
                        let e = basis(info.shape, r, c);
                        let mut m = Mat::zeros(d, d);
                        for t in &terms {
                            m += t.eval(&e);
                        }
                        for col in 0..d {
                            for row in col..d {
                                let v = sign * m[(row, col)];
                                if v != 0.0 {
                                    triplets.push(Triplet { scalar: info.offset + n, row, col, coeff: v });
                                }
                            }
                        }
                    }
                }
                triplets.sort_by_key(|a| (a.scalar, a.row, a.col));
                PsdBlock { dim: d, label: b.label.to_string(), constant, triplets }
            })
            .collect();
        ConicProgram { num_scalars: cat.scalar_count(), objective, blocks, scalar_map }
    }

    /// Packs an assignment into the scalar vector.
    pub fn pack(&self, cat: &Catalogue, x: &Assignment) -> Vec<f64> {
        self.scalar_map
            .iter()
            .map(|s| x.get(cat.id(s.var))[(s.row, s.col)])
            .collect()
    }

    pub fn decode(&self, cat: &Catalogue, point: &[f64]) -> Result<Assignment, DecodeError> {
        if point.len() != self.num_scalars {
            return Err(DecodeError::Length { expected: self.num_scalars, got: point.len() });
        }
        let mut x = cat.zero_assignment();
        for (s, &v) in self.scalar_map.iter().zip(point) {
            let id = cat.id(s.var);
            let symmetric = matches!(cat.info(id).shape, VarShape::Symmetric(_));
            let m = &mut x.values[id.0];
            m[(s.row, s.col)] = v;
            if symmetric {
                m[(s.col, s.row)] = v;
            }
        }
        Ok(x)
    }

    /// Sparse text listing:
    ///
    /// ```text
    /// N <scalars>
    /// BLOCKS <count>
    /// DIMS d1 d2 ...
    /// OBJECTIVE c1 c2 ...
    /// C <block> <row> <col> <value>             (lower triangle)
    /// A <block> <row> <col> <scalar> <coeff>    (lower triangle)
    /// ```
    ///
    /// Block, row, col and scalar indices are 0-based; each block is
    /// `C + Σ θ_k A_k ⪰ 0` with off-diagonal entries mirrored.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "N {}", self.num_scalars);
        let _ = writeln!(out, "BLOCKS {}", self.blocks.len());
        let dims: Vec<String> = self.blocks.iter().map(|b| b.dim.to_string()).collect();
        let _ = writeln!(out, "DIMS {}", dims.join(" "));
        let obj: Vec<String> = self.objective.iter().map(|v| format!("{v:?}")).collect();
        let _ = writeln!(out, "OBJECTIVE {}", obj.join(" "));
        for (b, block) in self.blocks.iter().enumerate() {
            for col in 0..block.dim {
                for row in col..block.dim {
                    let v = block.constant[(row, col)];
                    if v != 0.0 {
                        let _ = writeln!(out, "C {b} {row} {col} {v:?}");
                    }
                }
            }
            for t in &block.triplets {
                let _ = writeln!(out, "A {b} {} {} {} {:?}", t.row, t.col, t.scalar, t.coeff);
            }
        }
        out
    }
}
