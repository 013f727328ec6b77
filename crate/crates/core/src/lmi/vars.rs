//! Decision-variable catalogue and assignments.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{SynthesisOptions, ZetaSpec};
use crate::linalg::Mat;
use crate::model::SystemSpec;

/// Identity of one matrix or scalar unknown.
///
/// `i` is the subsystem, `j` the mode, `s`/`k` rule indices. `Tau { a, b }`
/// is the interconnection scalar `τ_{a,b}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "family")]
pub enum VarKey {
    X1 { i: usize, j: usize, k: usize },
    X5 { i: usize, j: usize, k: usize },
    X9 { i: usize, j: usize, k: usize },
    K { i: usize, j: usize, k: usize },
    W { i: usize, j: usize, s: usize, k: usize },
    Tau { a: usize, b: usize },
    Zeta { i: usize },
}

impl fmt::Display for VarKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarKey::X1 { i, j, k } => write!(f, "X1[{i},{j},{k}]"),
            VarKey::X5 { i, j, k } => write!(f, "X5[{i},{j},{k}]"),
            VarKey::X9 { i, j, k } => write!(f, "X9[{i},{j},{k}]"),
            VarKey::K { i, j, k } => write!(f, "K[{i},{j},{k}]"),
            VarKey::W { i, j, s, k } => write!(f, "W[{i},{j},{s},{k}]"),
            VarKey::Tau { a, b } => write!(f, "tau[{a},{b}]"),
            VarKey::Zeta { i } => write!(f, "zeta2[{i}]"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarShape {
    Symmetric(usize),
    Full(usize, usize),
    Scalar,
}

impl VarShape {
    pub fn scalar_count(self) -> usize {
        match self {
            VarShape::Symmetric(d) => d * (d + 1) / 2,
            VarShape::Full(r, c) => r * c,
            VarShape::Scalar => 1,
        }
    }

    pub fn dims(self) -> (usize, usize) {
        match self {
            VarShape::Symmetric(d) => (d, d),
            VarShape::Full(r, c) => (r, c),
            VarShape::Scalar => (1, 1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VarId(pub usize);

#[derive(Debug, Clone, PartialEq)]
pub struct VarInfo {
    pub key: VarKey,
    pub shape: VarShape,
    /// Index of the first packed scalar of this variable.
    pub offset: usize,
}

/// Every unknown of a program, with a fixed packing order.
#[derive(Debug, Clone, PartialEq)]
pub struct Catalogue {
    vars: Vec<VarInfo>,
    index: BTreeMap<VarKey, VarId>,
    scalars: usize,
}

impl Catalogue {
    pub fn new(sys: &SystemSpec, opts: &SynthesisOptions) -> Self {
        let mut cat = Catalogue { vars: Vec::new(), index: BTreeMap::new(), scalars: 0 };
        for (i, sub) in sys.subsystems.iter().enumerate() {
            let (n, p, u) = (sub.state_dim, sub.output_dim, sub.input_dim);
            for (j, mode) in sub.modes.iter().enumerate() {
                for k in 0..mode.rules.len() {
                    cat.push(VarKey::X1 { i, j, k }, VarShape::Symmetric(n));
                    cat.push(VarKey::X5 { i, j, k }, VarShape::Symmetric(p));
                    cat.push(VarKey::X9 { i, j, k }, VarShape::Symmetric(u));
                    cat.push(VarKey::K { i, j, k }, VarShape::Full(u, p));
                }
            }
            for (j, mode) in sub.modes.iter().enumerate() {
                let r = mode.rules.len();
                for s in 0..r {
                    for k in 0..r {
                        cat.push(VarKey::W { i, j, s, k }, VarShape::Symmetric(n));
                    }
                }
            }
        }
        for (i, a) in sys.pairs() {
            cat.push(VarKey::Tau { a: i, b: a }, VarShape::Scalar);
        }
        if matches!(opts.zeta, ZetaSpec::Minimize) && sys.n() >= 2 {
            for i in 0..sys.n() {
                cat.push(VarKey::Zeta { i }, VarShape::Scalar);
            }
        }
        cat
    }

    fn push(&mut self, key: VarKey, shape: VarShape) {
        let id = VarId(self.vars.len());
        self.vars.push(VarInfo { key, shape, offset: self.scalars });
        self.index.insert(key, id);
        self.scalars += shape.scalar_count();
    }

    pub fn id(&self, key: VarKey) -> VarId {
        *self.index.get(&key).unwrap_or_else(|| panic!("variable {key} not catalogued"))
    }

    pub fn get(&self, key: VarKey) -> Option<VarId> {
        self.index.get(&key).copied()
    }

    pub fn info(&self, id: VarId) -> &VarInfo {
        &self.vars[id.0]
    }

    pub fn vars(&self) -> &[VarInfo] {
        &self.vars
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    /// Total number of packed scalars.
    pub fn scalar_count(&self) -> usize {
        self.scalars
    }

    pub fn zero_assignment(&self) -> Assignment {
        Assignment {
            values: self
                .vars
                .iter()
                .map(|v| {
                    let (r, c) = v.shape.dims();
                    Mat::zeros(r, c)
                })
                .collect(),
        }
    }
}

/// Values for every catalogued variable, indexed by [`VarId`].
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub values: Vec<Mat>,
}

impl Assignment {
    pub fn get(&self, id: VarId) -> &Mat {
        &self.values[id.0]
    }

    pub fn set(&mut self, id: VarId, value: Mat) {
        self.values[id.0] = value;
    }

    /// Keyed view, convenient for serialization.
    pub fn to_keyed(&self, cat: &Catalogue) -> Vec<(VarKey, Mat)> {
        cat.vars().iter().zip(&self.values).map(|(v, m)| (v.key, m.clone())).collect()
    }

    pub fn from_keyed(cat: &Catalogue, keyed: &[(VarKey, Mat)]) -> Option<Self> {
        let mut out = cat.zero_assignment();
        let mut seen = vec![false; cat.len()];
        for (key, m) in keyed {
            let id = cat.get(*key)?;
            if m.shape() != cat.info(id).shape.dims() {
                return None;
            }
            out.values[id.0] = m.clone();
            seen[id.0] = true;
        }
        seen.iter().all(|s| *s).then_some(out)
    }
}
