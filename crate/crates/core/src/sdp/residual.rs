use serde::{Deserialize, Serialize};

use crate::jacobi::min_eigenvalue;
use crate::lmi::{Assignment, BlockLabel, Family, LmiProgram};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockResidual {
    pub label: BlockLabel,
    /// Smallest eigenvalue of the block with its sense folded in
    /// (`M` for `⪰`, `-M` for `⪯`), before subtracting the margin.
    pub min_eig: f64,
    pub margin: f64,
    pub pass: bool,
}

impl BlockResidual {
    /// Distance to the margin; negative means violated.
    pub fn slack(&self) -> f64 {
        self.min_eig - self.margin
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyResidual {
    pub family: Family,
    pub blocks: usize,
    pub worst_slack: f64,
    pub worst_label: Option<BlockLabel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub tol: f64,
    pub blocks: Vec<BlockResidual>,
    pub pass: bool,
}

impl ResidualReport {
    pub fn failures(&self) -> impl Iterator<Item = &BlockResidual> {
        self.blocks.iter().filter(|b| !b.pass)
    }

    pub fn worst_slack(&self) -> f64 {
        self.blocks.iter().map(BlockResidual::slack).fold(f64::INFINITY, f64::min)
    }

    pub fn by_family(&self) -> Vec<FamilyResidual> {
        Family::ALL
            .iter()
            .filter_map(|&family| {
                let members: Vec<&BlockResidual> = self.blocks.iter().filter(|b| b.label.family == family).collect();
                if members.is_empty() {
                    return None;
                }
                let worst = members.iter().min_by(|a, b| a.slack().total_cmp(&b.slack()))?;
                Some(FamilyResidual {
                    family,
                    blocks: members.len(),
                    worst_slack: worst.slack(),
                    worst_label: Some(worst.label.clone()),
                })
            })
            .collect()
    }
}

/// Evaluates every block at `x` and checks its sense with the in-repo Jacobi
/// eigensolver. Uses nothing from the solver.
pub fn residual_check(program: &LmiProgram, x: &Assignment, tol: f64) -> ResidualReport {
    let blocks: Vec<BlockResidual> = program
        .blocks
        .iter()
        .map(|b| {
            let m = b.eval(x) * b.sense.sign();
            let min_eig = min_eigenvalue(&m);
            let margin = b.sense.margin();
            BlockResidual { label: b.label.clone(), min_eig, margin, pass: min_eig - margin >= -tol }
        })
        .collect();
    let pass = blocks.iter().all(|b| b.pass);
    ResidualReport { tol, blocks, pass }
}
