use super::block::{AffineExpr, BlockLabel, Family, LmiBlock, Sense};
use super::vars::{Catalogue, VarKey};
use super::{Layout, LmiError, SynthesisOptions, ZetaSpec};
use crate::linalg::{selector, Mat};
use crate::model::SystemSpec;

/// `X1, X5, X9 ⪰ εI` and `X1[l] + W[s,k] ⪰ εI`.
pub fn build_positivity_set(sys: &SystemSpec, opts: &SynthesisOptions, cat: &Catalogue) -> Vec<LmiBlock> {
    let eps = opts.epsilon;
    let mut g1 = Vec::new();
    let mut g2 = Vec::new();
    for (i, sub) in sys.subsystems.iter().enumerate() {
        for (j, mode) in sub.modes.iter().enumerate() {
            let r = mode.rules.len();
            for k in 0..r {
                for (name, key, d) in [
                    ("X1", VarKey::X1 { i, j, k }, sub.state_dim),
                    ("X5", VarKey::X5 { i, j, k }, sub.output_dim),
                    ("X9", VarKey::X9 { i, j, k }, sub.input_dim),
                ] {
                    let mut e = AffineExpr::zero(d);
                    e.term(cat.id(key), Mat::identity(d, d), Mat::identity(d, d), 0.5);
                    let mut label = BlockLabel::new(Family::G1, i, j, k);
                    label.var = Some(name.to_string());
                    g1.push(LmiBlock { label, expr: e, sense: Sense::PosDef { margin: eps } });
                }
            }
            let n = sub.state_dim;
            for s in 0..r {
                for k in 0..r {
                    for l in 0..r {
                        let mut e = AffineExpr::zero(n);
                        let id = Mat::identity(n, n);
                        e.term(cat.id(VarKey::X1 { i, j, k: l }), id.clone(), id.clone(), 0.5);
                        e.term(cat.id(VarKey::W { i, j, s, k }), id.clone(), id, 0.5);
                        let mut label = BlockLabel::new(Family::G2, i, j, k);
                        label.s = Some(s);
                        label.l = Some(l);
                        g2.push(LmiBlock { label, expr: e, sense: Sense::PosDef { margin: eps } });
                    }
                }
            }
        }
    }
    g1.extend(g2);
    g1
}

/// `[[-μ X1[j,k], X1[j,k]], [X1[j,k], -X1[j⁺,k⁺]]] ⪯ 0` for every ordered mode pair.
pub fn build_jump_set(
    sys: &SystemSpec,
    opts: &SynthesisOptions,
    cat: &Catalogue,
) -> Result<Vec<LmiBlock>, LmiError> {
    let mut out = Vec::new();
    for (i, sub) in sys.subsystems.iter().enumerate() {
        let n = sub.state_dim;
        let top = selector(2 * n, 0, n);
        let bottom = selector(2 * n, n, n);
        for j in 0..sub.modes.len() {
            for jplus in 0..sub.modes.len() {
                if jplus == j {
                    continue;
                }
                let mu = opts.mu.get(i, j, jplus);
                if !(mu > 0.0 && mu.is_finite()) {
                    return Err(LmiError::InvalidMu { i, j, jplus, mu });
                }
                for k in 0..sub.rule_count(j) {
                    for kplus in 0..sub.rule_count(jplus) {
                        let cur = cat.id(VarKey::X1 { i, j, k });
                        let next = cat.id(VarKey::X1 { i, j: jplus, k: kplus });
                        let mut e = AffineExpr::zero(2 * n);
                        e.term(cur, top.clone(), top.transpose(), -0.5 * mu);
                        e.term(cur, bottom.clone(), top.transpose(), 1.0);
                        e.term(next, bottom.clone(), bottom.transpose(), -0.5);
                        let mut label = BlockLabel::new(Family::G3, i, j, k);
                        label.jplus = Some(jplus);
                        label.kplus = Some(kplus);
                        out.push(LmiBlock { label, expr: e, sense: Sense::NegDef { margin: 0.0 } });
                    }
                }
            }
        }
    }
    Ok(out)
}

/// `Φ[i,j,s,k] = Σ_{l'} λ_{j,l'} (X1[i,j,l'] + W[i,j,s,k])`, an `n_i × n_i` expression.
pub fn build_phi(
    sys: &SystemSpec,
    opts: &SynthesisOptions,
    cat: &Catalogue,
    i: usize,
    j: usize,
    s: usize,
    k: usize,
) -> AffineExpr {
    let sub = &sys.subsystems[i];
    let n = sub.state_dim;
    let id = Mat::identity(n, n);
    let mut e = AffineExpr::zero(n);
    let mut lambda_sum = 0.0;
    for lp in 0..sub.rule_count(j) {
        let lambda = opts.lambda_for(sys, i, j, lp);
        lambda_sum += lambda;
        e.term(cat.id(VarKey::X1 { i, j, k: lp }), id.clone(), id.clone(), 0.5 * lambda);
    }
    e.term(cat.id(VarKey::W { i, j, s, k }), id.clone(), id, 0.5 * lambda_sum);
    e
}

/// Slot offsets of the augmented vector `(x, y, u)`.
struct Slots {
    n: usize,
    p: usize,
    u: usize,
}

impl Slots {
    fn of(sys: &SystemSpec, i: usize) -> Self {
        let sub = &sys.subsystems[i];
        Slots { n: sub.state_dim, p: sub.output_dim, u: sub.input_dim }
    }

    fn q(&self) -> usize {
        self.n + self.p + self.u
    }
}

/// The `(x, y, u)` core of the decay block without interconnection terms:
/// `Sym(Ã X̄) - Φ` in the chosen layout.
pub fn gamma_core(
    sys: &SystemSpec,
    opts: &SynthesisOptions,
    cat: &Catalogue,
    i: usize,
    j: usize,
    s: usize,
    k: usize,
    l: usize,
) -> Result<AffineExpr, LmiError> {
    let sub = &sys.subsystems[i];
    let sl = Slots::of(sys, i);
    if opts.layout == Layout::Literal && sl.p != sl.u {
        return Err(LmiError::LayoutInfeasible { i, p: sl.p, u: sl.u });
    }
    let q = sl.q();
    let ex = selector(q, 0, sl.n);
    let ey = selector(q, sl.n, sl.p);
    let eu = selector(q, sl.n + sl.p, sl.u);
    let rule = &sub.modes[j].rules[s];
    let x1 = cat.id(VarKey::X1 { i, j, k });
    let x5 = cat.id(VarKey::X5 { i, j, k });
    let x9 = cat.id(VarKey::X9 { i, j, k });
    let gain = cat.id(VarKey::K { i, j, k: l });

    let mut e = AffineExpr::zero(q);
    // A X1 + X1 Aᵀ
    e.term(x1, &ex * &rule.a, ex.transpose(), 1.0);
    // -Φ
    e.embed(&build_phi(sys, opts, cat, i, j, s, k), 0, -1.0);
    // -2 X5, -2 X9
    e.term(x5, ey.clone(), ey.transpose(), -1.0);
    e.term(x9, eu.clone(), eu.transpose(), -1.0);
    // X9 Bᵀ in the (u, x) slot
    e.term(x9, eu.clone(), rule.b.transpose() * ex.transpose(), 1.0);
    match opts.layout {
        Layout::Coherent => {
            // C X1 in (y, x); K in (u, y)
            e.term(x1, &ey * &rule.c, ex.transpose(), 1.0);
            e.term(gain, eu.clone(), ey.transpose(), 1.0);
        }
        Layout::Literal => {
            // C X1 joins X9 Bᵀ in (u, x); Kᵀ in (u, y), i.e. K in (y, u)
            e.term(x1, &eu * &rule.c, ex.transpose(), 1.0);
            e.term(gain, ey.clone(), eu.transpose(), 1.0);
        }
    }
    Ok(e)
}

/// Appends a Schur column realizing `τ⁻¹ X̄ X̄` at offset `col` of `e`.
fn schur_xbar(e: &mut AffineExpr, cat: &Catalogue, sl: &Slots, i: usize, j: usize, k: usize, col: usize, tau: VarKey) {
    let d = e.dim();
    let q = sl.q();
    let parts = [
        (VarKey::X1 { i, j, k }, 0, sl.n),
        (VarKey::X5 { i, j, k }, sl.n, sl.p),
        (VarKey::X9 { i, j, k }, sl.n + sl.p, sl.u),
    ];
    for (key, off, len) in parts {
        let row = selector(d, col + off, len);
        let core = selector(d, off, len);
        e.term(cat.id(key), row, core.transpose(), 1.0);
    }
    let diag = selector(d, col, q);
    e.term(cat.id(tau), diag.clone(), diag.transpose(), -0.5);
}

/// Decay blocks, one per `(i, j, s, k, l)`.
pub fn build_stability_set(
    sys: &SystemSpec,
    opts: &SynthesisOptions,
    cat: &Catalogue,
) -> Result<Vec<LmiBlock>, LmiError> {
    let mut out = Vec::new();
    for (i, sub) in sys.subsystems.iter().enumerate() {
        let sl = Slots::of(sys, i);
        let q = sl.q();
        let peers: Vec<usize> = sys.peers(i).collect();
        let d = q * (1 + peers.len());
        for (j, mode) in sub.modes.iter().enumerate() {
            let r = mode.rules.len();
            for s in 0..r {
                let rule = &mode.rules[s];
                for k in 0..r {
                    for l in 0..r {
                        let core = gamma_core(sys, opts, cat, i, j, s, k, l)?;
                        let mut e = AffineExpr::zero(d);
                        e.embed(&core, 0, 1.0);
                        let ex = selector(d, 0, sl.n);
                        for (slot, &alpha) in peers.iter().enumerate() {
                            let f = &rule.couplings[&alpha].f;
                            // τ[i,α] F Fᵀ
                            e.term(cat.id(VarKey::Tau { a: i, b: alpha }), &ex * f, f.transpose() * ex.transpose(), 0.5);
                            schur_xbar(&mut e, cat, &sl, i, j, k, q * (1 + slot), VarKey::Tau { a: alpha, b: i });
                        }
                        let mut label = BlockLabel::new(Family::G4stab, i, j, k);
                        label.s = Some(s);
                        label.l = Some(l);
                        out.push(LmiBlock { label, expr: e, sense: Sense::NegDef { margin: opts.epsilon } });
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Attenuation blocks, one per `(i, α, j, s, k, l)`.
///
/// Rows: scaled core, τ-Schur column, output-energy Schur column, disturbances.
pub fn build_robustness_set(
    sys: &SystemSpec,
    opts: &SynthesisOptions,
    cat: &Catalogue,
) -> Result<Vec<LmiBlock>, LmiError> {
    let Some(nbar) = sys.pair_weight() else {
        return Ok(Vec::new());
    };
    let mut out = Vec::new();
    for (i, alpha) in sys.pairs() {
        let sub = &sys.subsystems[i];
        let sl = Slots::of(sys, i);
        let q = sl.q();
        let (vi, va) = (sub.disturbance_dim, sys.subsystems[alpha].disturbance_dim);
        let (off_tau, off_q, off_w) = (q, 2 * q, 2 * q + sl.p);
        let d = off_w + vi + va;
        let ex = selector(d, 0, sl.n);
        let ew = selector(d, off_w, vi + va);
        // Ξ = blockdiag(N̄ I, I)
        let xi = Mat::from_fn(vi + va, vi + va, |r, c| match (r == c, r < vi) {
            (true, true) => nbar,
            (true, false) => 1.0,
            _ => 0.0,
        });
        for (j, mode) in sub.modes.iter().enumerate() {
            let r = mode.rules.len();
            for s in 0..r {
                let rule = &mode.rules[s];
                let coupling = &rule.couplings[&alpha];
                for k in 0..r {
                    for l in 0..r {
                        let core = gamma_core(sys, opts, cat, i, j, s, k, l)?;
                        let mut e = AffineExpr::zero(d);
                        e.embed(&core, 0, nbar);
                        e.term(
                            cat.id(VarKey::Tau { a: i, b: alpha }),
                            &ex * &coupling.f,
                            coupling.f.transpose() * ex.transpose(),
                            0.5,
                        );
                        schur_xbar(&mut e, cat, &sl, i, j, k, off_tau, VarKey::Tau { a: alpha, b: i });
                        // √N̄ X5 against the output slot, -I on the diagonal
                        e.term(
                            cat.id(VarKey::X5 { i, j, k }),
                            selector(d, off_q, sl.p) * nbar.sqrt(),
                            selector(d, sl.n, sl.p).transpose(),
                            1.0,
                        );
                        e.constant_block(off_q, off_q, &(-Mat::identity(sl.p, sl.p)));
                        // B̃ᵀ: both disturbance channels act on the state rows
                        let mut btilde = Mat::zeros(sl.n, vi + va);
                        btilde.view_mut((0, 0), (sl.n, vi)).copy_from(&(&rule.bw * nbar));
                        btilde.view_mut((0, vi), (sl.n, va)).copy_from(&coupling.bw);
                        e.constant_block(off_w, 0, &btilde.transpose());
                        match &opts.zeta {
                            ZetaSpec::Fixed(z) => {
                                e.constant_block(off_w, off_w, &(&xi * -z[i]));
                            }
                            ZetaSpec::Minimize => {
                                e.term(cat.id(VarKey::Zeta { i }), &ew * &xi, ew.transpose(), -0.5);
                            }
                        }
                        let mut label = BlockLabel::new(Family::G4rob, i, j, k);
                        label.alpha = Some(alpha);
                        label.s = Some(s);
                        label.l = Some(l);
                        out.push(LmiBlock { label, expr: e, sense: Sense::NegDef { margin: opts.epsilon } });
                    }
                }
            }
        }
    }
    Ok(out)
}
