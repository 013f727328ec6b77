//! Reference backing for [`solve`]: an infeasible-start primal-dual
//! interior-point method (HKM direction, Mehrotra predictor-corrector).
//!
//! The conic program `C_b + Σ θ_k A_bk ⪰ 0` is lifted to
//!
//! ```text
//! maximize  w·t - objᵀθ
//! s.t.      C_b + Σ θ_k A_bk - t·I ⪰ 0      for every block b
//!           |θ_k| ≤ R,  t ≤ t_cap
//! ```
//!
//! which is strictly feasible for any data (take `t` very negative), so the
//! iteration always has an interior to follow. The original program is
//! feasible within tolerance exactly when the optimal `t` is not below
//! `-feas_tol`.

use nalgebra::{Cholesky, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::conic::ConicProgram;
use crate::linalg::Mat;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    /// A point is accepted when every block has min eigenvalue `≥ -feas_tol`.
    pub feas_tol: f64,
    /// Relative duality gap and residual tolerance for convergence.
    pub gap_tol: f64,
    pub max_iter: usize,
    /// Box bound `R` on every scalar.
    pub bound: f64,
    /// Weight of the margin variable against the objective in optimization mode.
    pub margin_weight: f64,
    /// Fraction of the distance to the cone boundary taken per step.
    pub step_fraction: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            feas_tol: 1e-7,
            gap_tol: 1e-9,
            max_iter: 200,
            bound: 1e3,
            margin_weight: 1e3,
            step_fraction: 0.95,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Feasible,
    Infeasible,
    IllPosed,
    NumericalTrouble,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveDiagnostics {
    pub iterations: usize,
    /// Final value of the lifted margin `t`.
    pub margin: f64,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    /// Smallest eigenvalue over all blocks at the returned (or last) point.
    pub min_eigenvalue: f64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub status: SolveStatus,
    /// Present iff `status == Feasible`.
    pub point: Option<Vec<f64>>,
    pub diagnostics: SolveDiagnostics,
}

/// Symmetric sparse coefficient: entry `(r, c)` and its mirror.
type Sparse = Vec<(usize, usize, f64)>;

struct SdpBlock {
    c: Mat,
    /// `(y index, A_k)`, ascending in `k`.
    a: Vec<(usize, Sparse)>,
}

struct LpRow {
    c: f64,
    k: usize,
    a: f64,
}

struct Lifted {
    m: usize,
    b: Vec<f64>,
    sdp: Vec<SdpBlock>,
    lp: Vec<LpRow>,
}

fn inner_sparse(a: &Sparse, p: &Mat) -> f64 {
    a.iter()
        .map(|&(r, c, v)| if r == c { v * p[(r, c)] } else { v * (p[(r, c)] + p[(c, r)]) })
        .sum()
}

fn add_sparse(m: &mut Mat, a: &Sparse, scale: f64) {
    for &(r, c, v) in a {
        m[(r, c)] += scale * v;
        if r != c {
            m[(c, r)] += scale * v;
        }
    }
}

/// `X · A` for sparse symmetric `A`.
fn left_mul(x: &Mat, a: &Sparse) -> Mat {
    let d = x.nrows();
    let mut out = Mat::zeros(d, d);
    for &(r, c, v) in a {
        for i in 0..d {
            out[(i, c)] += v * x[(i, r)];
        }
        if r != c {
            for i in 0..d {
                out[(i, r)] += v * x[(i, c)];
            }
        }
    }
    out
}

fn sym_part(m: &Mat) -> Mat {
    (m + m.transpose()) * 0.5
}

fn frob(m: &Mat) -> f64 {
    m.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn sparse_norm(a: &Sparse) -> f64 {
    a.iter().map(|&(r, c, v)| if r == c { v * v } else { 2.0 * v * v }).sum::<f64>().sqrt()
}

/// Largest `α ≤ cap` with `X + α·dX ⪰ 0`, given the Cholesky factor of `X`.
fn max_step(chol: &Cholesky<f64, nalgebra::Dyn>, dx: &Mat) -> f64 {
    let l = chol.l();
    let Some(linv) = l.clone().try_inverse() else {
        return 0.0;
    };
    let w = &linv * dx * linv.transpose();
    let lam = SymmetricEigen::new(sym_part(&w)).eigenvalues.min();
    if lam >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lam
    }
}

impl Lifted {
    fn new(cp: &ConicProgram, opts: &SolverOptions, optimize: bool) -> Self {
        let n = cp.num_scalars;
        let m = n + 1;
        let t_idx = n;
        let mut b = vec![0.0; m];
        for (k, &o) in cp.objective.iter().enumerate() {
            b[k] = -o;
        }
        b[t_idx] = if optimize { opts.margin_weight } else { 1.0 };
        let sdp = cp
            .blocks
            .iter()
            .map(|blk| {
                let mut a: Vec<(usize, Sparse)> = Vec::new();
                for t in &blk.triplets {
                    // Z = C - Σ y_k A_k, so the block's own coefficient enters negated
                    match a.last_mut() {
                        Some((k, s)) if *k == t.scalar => s.push((t.row, t.col, -t.coeff)),
                        _ => a.push((t.scalar, vec![(t.row, t.col, -t.coeff)])),
                    }
                }
                a.push((t_idx, (0..blk.dim).map(|i| (i, i, 1.0)).collect()));
                SdpBlock { c: blk.constant.clone(), a }
            })
            .collect();
        let mut lp = Vec::with_capacity(2 * n + 1);
        for k in 0..n {
            lp.push(LpRow { c: opts.bound, k, a: 1.0 });
            lp.push(LpRow { c: opts.bound, k, a: -1.0 });
        }
        lp.push(LpRow { c: if optimize { 0.0 } else { 1.0 }, k: t_idx, a: 1.0 });
        Lifted { m, b, sdp, lp }
    }

    fn total_order(&self) -> f64 {
        (self.sdp.iter().map(|s| s.c.nrows()).sum::<usize>() + self.lp.len()) as f64
    }
}

struct Iterate {
    x: Vec<Mat>,
    z: Vec<Mat>,
    xl: Vec<f64>,
    zl: Vec<f64>,
    y: Vec<f64>,
}

struct Direction {
    dx: Vec<Mat>,
    dz: Vec<Mat>,
    dxl: Vec<f64>,
    dzl: Vec<f64>,
    dy: Vec<f64>,
}

fn certified_min_eig(cp: &ConicProgram, theta: &[f64], feas_tol: f64) -> Option<f64> {
    let mut worst = f64::INFINITY;
    for blk in &cp.blocks {
        let f = blk.eval(theta);
        let shifted = &f + Mat::identity(blk.dim, blk.dim) * feas_tol;
        Cholesky::new(shifted)?;
        worst = worst.min(SymmetricEigen::new(f).eigenvalues.min());
    }
    Some(worst)
}

fn min_eig_all(cp: &ConicProgram, theta: &[f64]) -> f64 {
    cp.blocks
        .iter()
        .map(|b| SymmetricEigen::new(b.eval(theta)).eigenvalues.min())
        .fold(f64::INFINITY, f64::min)
}

fn ill_posed(cp: &ConicProgram) -> Option<String> {
    if cp.objective.len() != cp.num_scalars || cp.objective.iter().any(|v| !v.is_finite()) {
        return Some("objective length or values invalid".into());
    }
    for (n, blk) in cp.blocks.iter().enumerate() {
        if blk.constant.shape() != (blk.dim, blk.dim) || blk.constant.iter().any(|v| !v.is_finite()) {
            return Some(format!("block {n}: constant malformed"));
        }
        if crate::linalg::asymmetry(&blk.constant) > 1e-12 * (1.0 + crate::linalg::max_abs(&blk.constant)) {
            return Some(format!("block {n}: constant not symmetric"));
        }
        if blk.triplets.iter().any(|t| {
            t.row >= blk.dim || t.col > t.row || t.scalar >= cp.num_scalars || !t.coeff.is_finite()
        }) {
            return Some(format!("block {n}: triplet out of range"));
        }
        if blk.triplets.windows(2).any(|w| w[0].scalar > w[1].scalar) {
            return Some(format!("block {n}: triplets not sorted by scalar"));
        }
    }
    None
}

/// Solves the conic program. Feasibility programs (zero objective) stop at
/// the first iterate whose scalars satisfy every block within `feas_tol`;
/// programs with an objective run to convergence.
pub fn solve(cp: &ConicProgram, opts: &SolverOptions) -> SolveResult {
    let mut diag = SolveDiagnostics::default();
    if let Some(msg) = ill_posed(cp) {
        diag.message = msg;
        return SolveResult { status: SolveStatus::IllPosed, point: None, diagnostics: diag };
    }
    let optimize = cp.objective.iter().any(|&v| v != 0.0);
    let lifted = Lifted::new(cp, opts, optimize);
    let n = cp.num_scalars;
    let m = lifted.m;
    let nu = lifted.total_order();

    let b_norm = 1.0 + lifted.b.iter().map(|v| v * v).sum::<f64>().sqrt();
    let c_norm = 1.0
        + lifted.sdp.iter().map(|s| frob(&s.c).powi(2)).sum::<f64>().sqrt()
        + lifted.lp.iter().map(|r| r.c * r.c).sum::<f64>().sqrt();

    let mut it = Iterate {
        x: Vec::with_capacity(lifted.sdp.len()),
        z: Vec::with_capacity(lifted.sdp.len()),
        xl: Vec::new(),
        zl: Vec::new(),
        y: vec![0.0; m],
    };
    for s in &lifted.sdp {
        let d = s.c.nrows();
        let root = (d as f64).sqrt();
        let a_max = s.a.iter().map(|(_, a)| sparse_norm(a)).fold(0.0, f64::max);
        let xi = 10f64.max(root);
        let eta = 10f64.max(root).max(frob(&s.c)).max(a_max);
        it.x.push(Mat::identity(d, d) * xi);
        it.z.push(Mat::identity(d, d) * eta);
    }
    for r in &lifted.lp {
        it.xl.push(10.0);
        it.zl.push(10f64.max(r.c.abs()));
    }

    // best certified point seen so far (optimization mode): (objective, θ, min eig)
    let mut best: Option<(f64, Vec<f64>, f64)> = None;
    let objective = |theta: &[f64]| -> f64 { cp.objective.iter().zip(theta).map(|(c, v)| c * v).sum() };
    let fallback = |best: Option<(f64, Vec<f64>, f64)>, mut diag: SolveDiagnostics, why: String| -> SolveResult {
        match best {
            Some((_, point, e)) => {
                diag.min_eigenvalue = e;
                diag.message = format!("{why}; returning best certified iterate");
                SolveResult { status: SolveStatus::Feasible, point: Some(point), diagnostics: diag }
            }
            None => {
                diag.message = why;
                SolveResult { status: SolveStatus::NumericalTrouble, point: None, diagnostics: diag }
            }
        }
    };

    for iter in 0..opts.max_iter {
        diag.iterations = iter;
        let theta = &it.y[..n];
        diag.margin = it.y[n];

        if let Some(e) = certified_min_eig(cp, theta, opts.feas_tol) {
            if !optimize {
                diag.min_eigenvalue = e;
                diag.message = "certified".into();
                return SolveResult { status: SolveStatus::Feasible, point: Some(theta.to_vec()), diagnostics: diag };
            }
            let f = objective(theta);
            if best.as_ref().map_or(true, |(bf, _, _)| f < *bf) {
                best = Some((f, theta.to_vec(), e));
            }
        }

        // residuals
        let mut rp = lifted.b.clone();
        let mut rd: Vec<Mat> = Vec::with_capacity(lifted.sdp.len());
        let mut pobj = 0.0;
        let mut xz = 0.0;
        for (bi, s) in lifted.sdp.iter().enumerate() {
            let mut r = &s.c - &it.z[bi];
            for (k, a) in &s.a {
                rp[*k] -= inner_sparse(a, &it.x[bi]);
                add_sparse(&mut r, a, -it.y[*k]);
            }
            pobj += s.c.dot(&it.x[bi]);
            xz += it.x[bi].dot(&it.z[bi]);
            rd.push(r);
        }
        let mut rdl = Vec::with_capacity(lifted.lp.len());
        for (j, r) in lifted.lp.iter().enumerate() {
            rp[r.k] -= r.a * it.xl[j];
            rdl.push(r.c - it.zl[j] - r.a * it.y[r.k]);
            pobj += r.c * it.xl[j];
            xz += it.xl[j] * it.zl[j];
        }
        let dobj: f64 = lifted.b.iter().zip(&it.y).map(|(b, y)| b * y).sum();
        let p_inf = rp.iter().map(|v| v * v).sum::<f64>().sqrt() / b_norm;
        let d_inf = (rd.iter().map(|r| frob(r).powi(2)).sum::<f64>() + rdl.iter().map(|v| v * v).sum::<f64>()).sqrt()
            / c_norm;
        let gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        diag.primal_objective = pobj;
        diag.dual_objective = dobj;
        diag.primal_infeasibility = p_inf;
        diag.dual_infeasibility = d_inf;
        let mu = xz / nu;

        // the primal objective bounds the margin from above once A(X) = b;
        // residual slack accounted for through the box radius
        if !optimize && p_inf * b_norm * (opts.bound + 1.0) * (m as f64).sqrt() + pobj < -opts.feas_tol {
            diag.min_eigenvalue = min_eig_all(cp, theta);
            diag.message = format!("margin bounded above by {pobj:.3e}");
            return SolveResult { status: SolveStatus::Infeasible, point: None, diagnostics: diag };
        }
        if gap < opts.gap_tol && p_inf < opts.gap_tol && d_inf < opts.gap_tol {
            diag.min_eigenvalue = min_eig_all(cp, theta);
            if let Some(e) = certified_min_eig(cp, theta, opts.feas_tol) {
                diag.min_eigenvalue = e;
                diag.message = "converged".into();
                return SolveResult { status: SolveStatus::Feasible, point: Some(theta.to_vec()), diagnostics: diag };
            }
            let (status, message) = if it.y[n] < -opts.feas_tol {
                (SolveStatus::Infeasible, format!("optimal margin {:.3e}", it.y[n]))
            } else {
                (SolveStatus::NumericalTrouble, "converged but point not certified".to_string())
            };
            diag.message = message;
            return SolveResult { status, point: None, diagnostics: diag };
        }

        // factorizations
        let mut zinv = Vec::with_capacity(lifted.sdp.len());
        let mut xchol = Vec::with_capacity(lifted.sdp.len());
        let mut zchol = Vec::with_capacity(lifted.sdp.len());
        for bi in 0..lifted.sdp.len() {
            let (Some(cz), Some(cx)) = (Cholesky::new(it.z[bi].clone()), Cholesky::new(it.x[bi].clone())) else {
                diag.min_eigenvalue = min_eig_all(cp, theta);
                return fallback(best, diag, format!("iterate left the cone at iteration {iter}"));
            };
            zinv.push(sym_part(&cz.inverse()));
            zchol.push(cz);
            xchol.push(cx);
        }

        // Schur complement
        let mut schur = Mat::zeros(m, m);
        for (bi, s) in lifted.sdp.iter().enumerate() {
            for (p, (k, ak)) in s.a.iter().enumerate() {
                let pk = left_mul(&it.x[bi], ak) * &zinv[bi];
                for (l, al) in &s.a[p..] {
                    let v = inner_sparse(al, &pk);
                    schur[(*k, *l)] += v;
                    if k != l {
                        schur[(*l, *k)] += v;
                    }
                }
            }
        }
        for (j, r) in lifted.lp.iter().enumerate() {
            schur[(r.k, r.k)] += r.a * r.a * it.xl[j] / it.zl[j];
        }
        let max_diag = (0..m).map(|k| schur[(k, k)]).fold(0.0, f64::max);
        let chol = Cholesky::new(schur.clone()).or_else(|| {
            let mut reg = schur.clone();
            for k in 0..m {
                reg[(k, k)] += 1e-13 * max_diag.max(1.0);
            }
            Cholesky::new(reg)
        });
        let Some(schur_chol) = chol else {
            diag.min_eigenvalue = min_eig_all(cp, theta);
            return fallback(best, diag, format!("Schur complement not positive definite at iteration {iter}"));
        };

        let direction = |sigma_mu: f64, corr: Option<&Direction>| -> Direction {
            let mut rhs = lifted.b.clone();
            let mut h = Vec::with_capacity(lifted.sdp.len());
            for (bi, s) in lifted.sdp.iter().enumerate() {
                let mut hb = &it.x[bi] * &rd[bi] * &zinv[bi] - &zinv[bi] * sigma_mu;
                if let Some(c) = corr {
                    hb += &c.dx[bi] * &c.dz[bi] * &zinv[bi];
                }
                for (k, a) in &s.a {
                    rhs[*k] += inner_sparse(a, &hb);
                }
                h.push(hb);
            }
            for (j, r) in lifted.lp.iter().enumerate() {
                let mut hj = it.xl[j] * rdl[j] / it.zl[j] - sigma_mu / it.zl[j];
                if let Some(c) = corr {
                    hj += c.dxl[j] * c.dzl[j] / it.zl[j];
                }
                rhs[r.k] += r.a * hj;
            }
            let dy = schur_chol.solve(&nalgebra::DVector::from_vec(rhs));
            let mut dz = Vec::with_capacity(lifted.sdp.len());
            let mut dx = Vec::with_capacity(lifted.sdp.len());
            for (bi, s) in lifted.sdp.iter().enumerate() {
                let mut dzb = rd[bi].clone();
                for (k, a) in &s.a {
                    add_sparse(&mut dzb, a, -dy[*k]);
                }
                let mut dxb = &zinv[bi] * sigma_mu - &it.x[bi] - &it.x[bi] * &dzb * &zinv[bi];
                if let Some(c) = corr {
                    dxb -= &c.dx[bi] * &c.dz[bi] * &zinv[bi];
                }
                dx.push(sym_part(&dxb));
                dz.push(dzb);
            }
            let mut dzl = Vec::with_capacity(lifted.lp.len());
            let mut dxl = Vec::with_capacity(lifted.lp.len());
            for (j, r) in lifted.lp.iter().enumerate() {
                let dzj = rdl[j] - r.a * dy[r.k];
                let mut dxj = sigma_mu / it.zl[j] - it.xl[j] - it.xl[j] * dzj / it.zl[j];
                if let Some(c) = corr {
                    dxj -= c.dxl[j] * c.dzl[j] / it.zl[j];
                }
                dzl.push(dzj);
                dxl.push(dxj);
            }
            Direction { dx, dz, dxl, dzl, dy: dy.as_slice().to_vec() }
        };

        let steps = |d: &Direction| -> (f64, f64) {
            let mut ap = f64::INFINITY;
            let mut ad = f64::INFINITY;
            for bi in 0..lifted.sdp.len() {
                ap = ap.min(max_step(&xchol[bi], &d.dx[bi]));
                ad = ad.min(max_step(&zchol[bi], &d.dz[bi]));
            }
            for j in 0..lifted.lp.len() {
                if d.dxl[j] < 0.0 {
                    ap = ap.min(-it.xl[j] / d.dxl[j]);
                }
                if d.dzl[j] < 0.0 {
                    ad = ad.min(-it.zl[j] / d.dzl[j]);
                }
            }
            (ap, ad)
        };

        let pred = direction(0.0, None);
        let (ap, ad) = steps(&pred);
        let (ap, ad) = (ap.min(1.0), ad.min(1.0));
        let mut xz_aff = 0.0;
        for bi in 0..lifted.sdp.len() {
            let xa = &it.x[bi] + &pred.dx[bi] * ap;
            let za = &it.z[bi] + &pred.dz[bi] * ad;
            xz_aff += xa.dot(&za);
        }
        for j in 0..lifted.lp.len() {
            xz_aff += (it.xl[j] + ap * pred.dxl[j]) * (it.zl[j] + ad * pred.dzl[j]);
        }
        let sigma = (xz_aff / xz).clamp(0.0, 1.0).powi(3);
        let corr = direction(sigma * mu, Some(&pred));
        let (ap, ad) = steps(&corr);
        let ap = (opts.step_fraction * ap).min(1.0);
        let ad = (opts.step_fraction * ad).min(1.0);

        for bi in 0..lifted.sdp.len() {
            it.x[bi] += &corr.dx[bi] * ap;
            it.z[bi] += &corr.dz[bi] * ad;
        }
        for j in 0..lifted.lp.len() {
            it.xl[j] += ap * corr.dxl[j];
            it.zl[j] += ad * corr.dzl[j];
        }
        for k in 0..m {
            it.y[k] += ad * corr.dy[k];
        }
        if it.y.iter().any(|v| !v.is_finite()) {
            return fallback(best, diag, "non-finite iterate".into());
        }
    }
    diag.iterations = opts.max_iter;
    diag.min_eigenvalue = min_eig_all(cp, &it.y[..n]);
    fallback(best, diag, "iteration limit reached".into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdp::conic::{PsdBlock, Triplet};

    fn scalar_block(coeff: f64, constant: f64) -> PsdBlock {
        PsdBlock {
            dim: 1,
            label: String::new(),
            constant: Mat::from_element(1, 1, constant),
            triplets: vec![Triplet { scalar: 0, row: 0, col: 0, coeff }],
        }
    }

    fn program(blocks: Vec<PsdBlock>, objective: Vec<f64>) -> ConicProgram {
        ConicProgram { num_scalars: objective.len(), objective, blocks, scalar_map: vec![] }
    }

    #[test]
    fn single_upper_bound_is_feasible() {
        // x ⪯ -1  ⇔  -x - 1 ⪰ 0
        let cp = program(vec![scalar_block(-1.0, -1.0)], vec![0.0]);
        let r = solve(&cp, &SolverOptions::default());
        assert_eq!(r.status, SolveStatus::Feasible, "{:?}", r.diagnostics);
        assert!(r.point.unwrap()[0] <= -1.0 + 1e-7);
    }

    #[test]
    fn contradictory_scalars_are_infeasible() {
        // x ⪰ 1 and x ⪯ -1
        let cp = program(vec![scalar_block(1.0, -1.0), scalar_block(-1.0, -1.0)], vec![0.0]);
        let r = solve(&cp, &SolverOptions::default());
        assert_eq!(r.status, SolveStatus::Infeasible, "{:?}", r.diagnostics);
        assert!(r.point.is_none());
    }

    #[test]
    fn minimizes_a_scalar() {
        // min x s.t. x ⪰ 2
        let cp = program(vec![scalar_block(1.0, -2.0)], vec![1.0]);
        let r = solve(&cp, &SolverOptions::default());
        assert_eq!(r.status, SolveStatus::Feasible, "{:?}", r.diagnostics);
        let x = r.point.unwrap()[0];
        assert!((x - 2.0).abs() < 1e-5, "x = {x}");
    }

    #[test]
    fn matrix_block_with_face() {
        // [[x, 1], [1, x]] ⪰ 0 and x ≤ 1: only x = 1 works (a single point)
        let cp = program(
            vec![
                PsdBlock {
                    dim: 2,
                    label: String::new(),
                    constant: Mat::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]),
                    triplets: vec![
                        Triplet { scalar: 0, row: 0, col: 0, coeff: 1.0 },
                        Triplet { scalar: 0, row: 1, col: 1, coeff: 1.0 },
                    ],
                },
                scalar_block(-1.0, 1.0),
            ],
            vec![0.0],
        );
        let r = solve(&cp, &SolverOptions::default());
        assert_eq!(r.status, SolveStatus::Feasible, "{:?}", r.diagnostics);
        assert!((r.point.unwrap()[0] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn malformed_program_is_ill_posed() {
        let mut cp = program(vec![scalar_block(1.0, 0.0)], vec![0.0]);
        cp.blocks[0].triplets[0].row = 3;
        assert_eq!(solve(&cp, &SolverOptions::default()).status, SolveStatus::IllPosed);
        let cp = program(vec![scalar_block(f64::NAN, 0.0)], vec![0.0]);
        assert_eq!(solve(&cp, &SolverOptions::default()).status, SolveStatus::IllPosed);
    }

    #[test]
    fn no_blocks_is_trivially_feasible() {
        let cp = program(vec![], vec![0.0, 0.0]);
        let r = solve(&cp, &SolverOptions::default());
        assert_eq!(r.status, SolveStatus::Feasible);
        assert_eq!(r.point.unwrap().len(), 2);
    }
}
