use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use super::vars::{Assignment, Catalogue, VarId, VarShape};
use crate::linalg::{selector, Mat};

/// `coeff · (left · V · right + (left · V · right)ᵀ)`.
///
/// For scalar variables `V` stands for `v · I` with the identity sized to fit
/// between `left` and `right`.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub var: VarId,
    pub left: Mat,
    pub right: Mat,
    pub coeff: f64,
}

impl Term {
    pub fn product(&self, value: &Mat) -> Mat {
        if self.left.ncols() == value.nrows() && value.ncols() == self.right.nrows() {
            &self.left * value * &self.right
        } else {
            debug_assert_eq!(value.shape(), (1, 1));
            &self.left * &self.right * value[(0, 0)]
        }
    }

    pub fn eval(&self, value: &Mat) -> Mat {
        let p = self.product(value) * self.coeff;
        &p + p.transpose()
    }
}

/// Symmetric matrix expression affine in the decision variables.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineExpr {
    pub constant: Mat,
    pub terms: Vec<Term>,
}

impl AffineExpr {
    pub fn zero(dim: usize) -> Self {
        Self { constant: Mat::zeros(dim, dim), terms: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.constant.nrows()
    }

    pub fn term(&mut self, var: VarId, left: Mat, right: Mat, coeff: f64) -> &mut Self {
        debug_assert_eq!(left.nrows(), self.dim());
        debug_assert_eq!(right.ncols(), self.dim());
        if coeff != 0.0 {
            self.terms.push(Term { var, left, right, coeff });
        }
        self
    }

    /// Adds `m` at block position `(row, col)` and its transpose at `(col, row)`.
    /// Diagonal placements (`row == col`) expect a symmetric `m` and add it once.
    pub fn constant_block(&mut self, row: usize, col: usize, m: &Mat) -> &mut Self {
        let mut v = self.constant.view_mut((row, col), m.shape());
        v += m;
        if row != col {
            let mut v = self.constant.view_mut((col, row), (m.ncols(), m.nrows()));
            v += m.transpose();
        }
        self
    }

    /// Adds `scale · other` embedded at diagonal offset `offset`.
    pub fn embed(&mut self, other: &AffineExpr, offset: usize, scale: f64) -> &mut Self {
        let s = selector(self.dim(), offset, other.dim());
        let c = &s * &other.constant * s.transpose() * scale;
        self.constant += c;
        for t in &other.terms {
            self.terms.push(Term {
                var: t.var,
                left: &s * &t.left,
                right: &t.right * s.transpose(),
                coeff: t.coeff * scale,
            });
        }
        self
    }

    pub fn eval(&self, x: &Assignment) -> Mat {
        let mut out = self.constant.clone();
        for t in &self.terms {
            out += t.eval(x.get(t.var));
        }
        out
    }

    /// Checks that every term is conformable with its variable's shape.
    pub fn conformable(&self, cat: &Catalogue) -> bool {
        let d = self.dim();
        self.constant.shape() == (d, d)
            && self.terms.iter().all(|t| {
                let (r, c) = cat.info(t.var).shape.dims();
                let inner_ok = match cat.info(t.var).shape {
                    VarShape::Scalar => t.left.ncols() == t.right.nrows(),
                    _ => t.left.ncols() == r && t.right.nrows() == c,
                };
                inner_ok && t.left.nrows() == d && t.right.ncols() == d
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Family {
    G1,
    G2,
    G3,
    G4stab,
    G4rob,
}

impl Family {
    pub const ALL: [Family; 5] = [Family::G1, Family::G2, Family::G3, Family::G4stab, Family::G4rob];
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::G1 => "G1",
            Family::G2 => "G2",
            Family::G3 => "G3",
            Family::G4stab => "G4stab",
            Family::G4rob => "G4rob",
        };
        f.write_str(s)
    }
}

/// Family tag plus the index tuple a block was generated for.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockLabel {
    pub family: Family,
    /// For positivity blocks: which variable family is constrained.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub var: Option<String>,
    pub i: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<usize>,
    pub j: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jplus: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<usize>,
    pub k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kplus: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l: Option<usize>,
}

impl BlockLabel {
    pub fn new(family: Family, i: usize, j: usize, k: usize) -> Self {
        Self { family, var: None, i, alpha: None, j, jplus: None, s: None, k, kplus: None, l: None }
    }
}

impl fmt::Display for BlockLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.family)?;
        if let Some(v) = &self.var {
            write!(f, "[{v}]")?;
        }
        write!(f, "(i={}", self.i)?;
        if let Some(a) = self.alpha {
            write!(f, ",alpha={a}")?;
        }
        write!(f, ",j={}", self.j)?;
        if let Some(jp) = self.jplus {
            write!(f, ",j+={jp}")?;
        }
        if let Some(s) = self.s {
            write!(f, ",s={s}")?;
        }
        write!(f, ",k={}", self.k)?;
        if let Some(kp) = self.kplus {
            write!(f, ",k+={kp}")?;
        }
        if let Some(l) = self.l {
            write!(f, ",l={l}")?;
        }
        f.write_str(")")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Sense {
    /// `M ⪯ -margin·I`.
    NegDef { margin: f64 },
    /// `M ⪰ margin·I`.
    PosDef { margin: f64 },
}

impl Sense {
    /// The matrix that must be positive semidefinite for `m` to satisfy the sense.
    pub fn adjust(self, m: &Mat) -> Mat {
        let d = m.nrows();
        match self {
            Sense::NegDef { margin } => -m - Mat::identity(d, d) * margin,
            Sense::PosDef { margin } => m - Mat::identity(d, d) * margin,
        }
    }

    /// `+1` when the block enters the adjusted form unchanged, `-1` when negated.
    pub fn sign(self) -> f64 {
        match self {
            Sense::NegDef { .. } => -1.0,
            Sense::PosDef { .. } => 1.0,
        }
    }

    pub fn margin(self) -> f64 {
        match self {
            Sense::NegDef { margin } | Sense::PosDef { margin } => margin,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmiBlock {
    pub label: BlockLabel,
    pub expr: AffineExpr,
    pub sense: Sense,
}

impl LmiBlock {
    pub fn dim(&self) -> usize {
        self.expr.dim()
    }

    pub fn eval(&self, x: &Assignment) -> Mat {
        self.expr.eval(x)
    }

    /// Plain-text listing (label, constant, terms) for diffing by hand.
    pub fn dump(&self, cat: &Catalogue) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "block {} dim {} sense {:?}", self.label, self.dim(), self.sense);
        let _ = writeln!(out, "constant:");
        write_matrix(&mut out, &self.expr.constant);
        for (n, t) in self.expr.terms.iter().enumerate() {
            let _ = writeln!(out, "term {n}: {} coeff {:?}", cat.info(t.var).key, t.coeff);
            let _ = writeln!(out, "  left:");
            write_matrix(&mut out, &t.left);
            let _ = writeln!(out, "  right:");
            write_matrix(&mut out, &t.right);
        }
        out
    }
}

fn write_matrix(out: &mut String, m: &Mat) {
    for r in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|c| format!("{:>12.6e}", m[(r, c)])).collect();
        let _ = writeln!(out, "    {}", row.join(" "));
    }
}
