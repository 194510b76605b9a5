//! Cohomology of the (φ, γ)-complex over the truncated Laurent ring.
//!
//! For a module M over W_n(F_q)((π)) the complex is
//!
//!   0 → M → M ⊕ M → M → 0,   α(x) = ((φ−1)x, (γ−1)x),
//!                             β(y, z) = (γ−1)y − (φ−1)z,
//!
//! and the engine computes H⁰, H¹, H² as finite abelian p-groups, exactly.
//!
//! The reduction to finite linear algebra is a weight argument.  Give the
//! monomial c·πⁱ with vₚ(c) = j the weight w = i + (p−1)j and let
//! s₀ = (p−1)(n−1) + 1.  A monomial of weight ≥ s₀ necessarily has i ≥ 1
//! (j can be at most n−1), and φ multiplies its weight gap above s₀: on the
//! span N of these monomials, φ is topologically nilpotent, so φ−1 is
//! invertible there via the geometric series and the subcomplex on N is
//! acyclic.  Cohomology therefore equals that of the quotient Q = M/N, whose
//! coordinates are the monomial positions (i, l) with i < s₀, the position
//! (i, l) carrying the modulus p^{min(n_l, ⌈(s₀−i)/(p−1)⌉)}.
//!
//! Q is infinite only toward i → −∞ and every element is finitely
//! supported, so the computation runs on the windows i ∈ [−B, s₀) for
//! doubling B and accepts once two consecutive windows report the same
//! invariants.  Operators out of a window are assembled *exactly*: the
//! target window is grown until it holds every monomial of every image, so
//! kernels read off the matrices are true kernels, not truncations.  The
//! mixed moduli are handled by scaling: the row of a coordinate with
//! modulus p^m is multiplied by p^{n−m}, after which kernels over ℤ/pⁿ
//! contain the annihilator lattice ⟨p^{m_a}·e_a⟩ automatically and the
//! honest group is the subquotient by that lattice.
//!
//! Before any of this, the basis is rescaled by a uniform power π^k so that
//! every monomial of the φ-matrix has nonnegative weight (the substitution
//! π ↦ (1+π)^p − 1 raises the weight of π^k by (p−1)k); without that, N
//! need not be φ-stable.  Representatives are transported back through the
//! rescaling, so callers only ever see the module they asked about.

use std::sync::Arc;

use crate::coeff::{add_mod, frobenius_sigma, mul_mod, sub_mod, CoeffElement, RingParams};
use crate::error::Error;
use crate::laurent::{gamma_pi, phi_pi, series_invert_to, ActionParams, LaurentElement};
use crate::module::PhiGammaModule;
use crate::snf::{self, Mat, Presentation};
use crate::Result;

// ---------------------------------------------------------------- options

/// Window schedule for the stabilization loop.
#[derive(Clone, Copy, Debug)]
pub struct EngineOptions {
    /// First window radius B; the engine looks at monomials πⁱ, i ≥ −B.
    pub window_start: i64,
    /// Radius at which the doubling gives up with `NoStabilization`.
    pub window_max: i64,
}

impl Default for EngineOptions {
    fn default() -> EngineOptions {
        EngineOptions { window_start: 32, window_max: 256 }
    }
}

// ---------------------------------------------------------------- quotient windows

/// Coordinate system of a window of Q: positions (i, l, t) with
/// i ∈ [lo, s₀), l a module generator, t an F_p-basis exponent of F_q.
#[derive(Clone, Debug)]
pub(crate) struct QLayout {
    pub(crate) p: u64,
    pub(crate) n: u32,
    pub(crate) f: usize,
    pub(crate) lo: i64,
    pub(crate) s0: i64,
    pub(crate) torsion: Vec<u32>,
}

impl QLayout {
    pub(crate) fn d(&self) -> usize {
        self.torsion.len()
    }

    pub(crate) fn size(&self) -> usize {
        ((self.s0 - self.lo) as usize) * self.d() * self.f
    }

    pub(crate) fn idx(&self, i: i64, l: usize, t: usize) -> usize {
        (((i - self.lo) as usize) * self.d() + l) * self.f + t
    }

    pub(crate) fn coord(&self, idx: usize) -> (i64, usize, usize) {
        let t = idx % self.f;
        let rest = idx / self.f;
        let l = rest % self.d();
        let i = (rest / self.d()) as i64 + self.lo;
        (i, l, t)
    }

    /// Depth of the filtration at exponent i: monomials p^j·πⁱ with
    /// j ≥ jcap(i) already have weight ≥ s₀.
    fn jcap(&self, i: i64) -> u32 {
        if i >= self.s0 {
            return 0;
        }
        let num = (self.s0 - i) as u64;
        num.div_ceil(self.p - 1) as u32
    }

    pub(crate) fn modulus_exp(&self, i: i64, l: usize) -> u32 {
        self.torsion[l].min(self.jcap(i))
    }

    pub(crate) fn moduli(&self) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.size());
        let mut i = self.lo;
        while i < self.s0 {
            for l in 0..self.d() {
                let m = self.modulus_exp(i, l);
                for _ in 0..self.f {
                    out.push(m);
                }
            }
            i += 1;
        }
        out
    }
}

// ---------------------------------------------------------------- operator assembly

/// How an operator acts on the coefficient ring while its matrix acts on
/// the generators: φ substitutes on π and applies σ, γ substitutes and
/// fixes coefficients, and `Id` is a plain matrix action (used by the
/// auxiliary-operator complexes).
#[derive(Clone, Copy, PartialEq, Eq)]
pub(crate) enum RingAct {
    Phi,
    Gamma,
    Id,
}

/// Exact matrix of (operator − ε·id) from the window `src` into a target
/// window grown to hold every image monomial, ε = 0 or 1.
pub(crate) fn assemble_operator(
    src: &QLayout,
    entries: &[Vec<LaurentElement>],
    act: RingAct,
    params: &Arc<RingParams>,
    gact: ActionParams,
    subtract_identity: bool,
) -> Result<(Mat, QLayout)> {
    let p = params.p();
    let n = params.n();
    let f = params.f();
    let modulus = params.modulus();
    let d = entries.len();
    let b = -src.lo;
    let s0 = src.s0;
    assert!(b > 0, "window must reach below π⁰");

    let mut lo_entries: i64 = 0;
    for row in entries {
        for e in row {
            if let Some(l) = e.lo() {
                lo_entries = lo_entries.min(l);
            }
        }
    }

    // the deepest exponent the action can reach from πⁱ, i ≥ −B: the
    // substituted uniformizer has weight p, but p-divisible coefficients
    // let its inverse powers dip (n−1)(p−1) exponents below −pB
    let act_lo = match act {
        RingAct::Phi => -(p as i64) * b - (n as i64 - 1) * (p as i64 - 1),
        _ => -b,
    };
    let need = s0 - 1 - act_lo;
    for row in entries {
        for e in row {
            if let Some(pr) = e.prec() {
                if pr < need {
                    return Err(Error::WindowTooSmall(format!(
                        "operator entry known to O(π^{}) but window radius {} consumes \
                         coefficients through π^{}",
                        pr + 1,
                        b,
                        need
                    )));
                }
            }
        }
    }
    let entries_cut: Vec<Vec<LaurentElement>> = entries
        .iter()
        .map(|row| row.iter().map(|e| e.truncated(need)).collect())
        .collect();

    let tgt = QLayout {
        p,
        n,
        f,
        lo: (act_lo + lo_entries).min(src.lo),
        s0,
        torsion: src.torsion.clone(),
    };
    let mut mat = Mat::zeros(tgt.size(), src.size());

    // source monomials carry g^t; φ moves that through σ, the others do not
    let gmul = match act {
        RingAct::Phi => frobenius_sigma(&CoeffElement::gen(params)),
        _ => CoeffElement::gen(params),
    };
    let mut fac = Vec::with_capacity(f);
    let mut run = CoeffElement::one(params);
    for _ in 0..f {
        fac.push(run.clone());
        run = run.mul(&gmul);
    }

    let emit = |i: i64, upow: &LaurentElement, mat: &mut Mat| {
        for l in 0..d {
            for (lp, row) in entries_cut.iter().enumerate() {
                let e = &row[l];
                if e.is_visibly_zero() {
                    continue;
                }
                let prod = e.mul(upow);
                debug_assert!(
                    prod.prec().is_none_or(|pr| pr >= s0 - 1),
                    "assembled image lost precision at source exponent {i}"
                );
                for (&ip, c) in prod.coeffs() {
                    if ip >= s0 {
                        break;
                    }
                    let me = tgt.modulus_exp(ip, lp);
                    if c.valuation() >= me {
                        continue;
                    }
                    assert!(ip >= tgt.lo, "image escaped the computed target window");
                    for t in 0..f {
                        let cv = c.mul(&fac[t]);
                        let col = src.idx(i, l, t);
                        for (tp, &vv) in cv.coeffs().iter().enumerate() {
                            if vv == 0 {
                                continue;
                            }
                            let at = tgt.idx(ip, lp, tp) * mat.cols + col;
                            mat.a[at] = add_mod(mat.a[at], vv, modulus);
                        }
                    }
                }
            }
        }
    };

    let u = match act {
        RingAct::Phi => phi_pi(params),
        RingAct::Gamma => gamma_pi(params, gact),
        RingAct::Id => LaurentElement::pi_pow(params, 1),
    };

    // nonnegative powers of the substituted uniformizer: exact products
    let hi_keep = s0 - 1 - lo_entries.min(0);
    let mut upow = LaurentElement::one(params);
    for i in 0..s0 {
        if i > 0 {
            upow = upow.mul(&u).truncated(hi_keep);
        }
        emit(i, &upow, &mut mat);
    }

    // negative powers: repeated multiplication by the inverse on a
    // decreasing truncation schedule, so that every coefficient kept at the
    // end is the true one.  One inverse step can push content down by at
    // most `drift` exponents.
    let drift = match act {
        RingAct::Phi => (p + (n as u64 - 1) * (p - 1)) as i64,
        _ => 1,
    };
    let uinv = series_invert_to(&u, hi_keep + b * drift)?;
    let mut upow = LaurentElement::one(params);
    for k in 1..=b {
        let bound = hi_keep + (b - k) * drift;
        upow = upow.mul(&uinv).truncated(bound);
        emit(-k, &upow, &mut mat);
    }

    if subtract_identity {
        let mut i = src.lo;
        while i < s0 {
            for l in 0..d {
                for t in 0..f {
                    let at = tgt.idx(i, l, t) * mat.cols + src.idx(i, l, t);
                    mat.a[at] = sub_mod(mat.a[at], 1, modulus);
                }
            }
            i += 1;
        }
    }

    Ok((mat, tgt))
}

// ---------------------------------------------------------------- window linear algebra

/// Generators of the kernel of a map whose target coordinates carry mixed
/// moduli: the row of a coordinate with modulus p^m is scaled by p^{n−m},
/// after which the ℤ/pⁿ-kernel is the honest kernel lattice (it contains
/// the source annihilators ⟨p^{m_a}·e_a⟩ automatically).
fn window_kernel(mat: &Mat, tgt_moduli: &[u32], p: u64, n: u32) -> Mat {
    assert_eq!(mat.rows, tgt_moduli.len());
    let modulus = p.pow(n);
    let mut scaled = mat.clone();
    for (r, &m) in tgt_moduli.iter().enumerate() {
        if m >= n {
            continue;
        }
        let s = p.pow(n - m);
        for v in &mut scaled.a[r * scaled.cols..(r + 1) * scaled.cols] {
            *v = mul_mod(*v, s, modulus);
        }
    }

    // columns that died under the scaling are free kernel directions; the
    // Smith form only has to look at the rest
    let mut live = Vec::new();
    let mut dead = Vec::new();
    for j in 0..scaled.cols {
        if (0..scaled.rows).any(|i| scaled.at(i, j) != 0) {
            live.push(j);
        } else {
            dead.push(j);
        }
    }
    let compact = Mat::from_cols(&live.iter().map(|&j| scaled.col(j)).collect::<Vec<_>>(), scaled.rows);
    let gens = snf::kernel_generators(&compact, p, n);
    let mut cols: Vec<Vec<u64>> = gens
        .into_iter()
        .map(|(g, _)| {
            let mut full = vec![0u64; mat.cols];
            for (slot, &j) in live.iter().enumerate() {
                full[j] = g[slot];
            }
            full
        })
        .collect();
    for &j in &dead {
        let mut full = vec![0u64; mat.cols];
        full[j] = 1;
        cols.push(full);
    }
    Mat::from_cols(&cols, mat.cols)
}

/// Columns p^{m_a}·e_a for every coordinate with modulus below pⁿ.
fn annihilator_gens(moduli: &[u32], p: u64, n: u32) -> Mat {
    let cols: Vec<Vec<u64>> = moduli
        .iter()
        .enumerate()
        .filter(|&(_, &m)| m < n)
        .map(|(a, &m)| {
            let mut v = vec![0u64; moduli.len()];
            v[a] = p.pow(m);
            v
        })
        .collect();
    Mat::from_cols(&cols, moduli.len())
}

/// The group ∩ ker(opⱼ) inside the window, as a presentation.  Shared by
/// H⁰ (two operators) and the auxiliary three-operator complexes.
pub(crate) fn kernel_of_operators(
    src: &QLayout,
    ops: &[(Mat, QLayout)],
    p: u64,
    n: u32,
) -> Presentation {
    assert!(!ops.is_empty());
    let mut stacked = ops[0].0.clone();
    let mut moduli = ops[0].1.moduli();
    for (m, t) in &ops[1..] {
        stacked = stacked.vstack(m);
        moduli.extend(t.moduli());
    }
    let khat = window_kernel(&stacked, &moduli, p, n);
    let l = annihilator_gens(&src.moduli(), p, n);
    snf::subquotient(&khat, &l, p, n)
}

/// Split the rows of an operator into the block lying over the source
/// window (reindexed to source order) and the deeper "outside" block; the
/// source coordinates are a contiguous tail of the target layout.
fn split_rows(op: &Mat, tgt: &QLayout, src: &QLayout) -> (Mat, Mat, Vec<u32>) {
    let off = ((src.lo - tgt.lo) as usize) * src.d() * src.f;
    let cols = op.cols;
    let inside = Mat {
        rows: src.size(),
        cols,
        a: op.a[off * cols..(off + src.size()) * cols].to_vec(),
    };
    let outside = Mat { rows: off, cols, a: op.a[..off * cols].to_vec() };
    let out_moduli = tgt.moduli()[..off].to_vec();
    (inside, outside, out_moduli)
}

/// Pad an operator with zero rows so that its target becomes the common
/// window reaching down to `common_lo`.
fn embed_rows(op: &Mat, tgt: &QLayout, common_lo: i64) -> Mat {
    let add = ((tgt.lo - common_lo) as usize) * tgt.d() * tgt.f;
    if add == 0 {
        return op.clone();
    }
    let mut out = Mat::zeros(op.rows + add, op.cols);
    out.a[add * op.cols..].copy_from_slice(&op.a);
    out
}

fn neg_mat(m: &Mat, modulus: u64) -> Mat {
    Mat {
        rows: m.rows,
        cols: m.cols,
        a: m.a.iter().map(|&v| if v == 0 { 0 } else { modulus - v }).collect(),
    }
}

// ---------------------------------------------------------------- the engine proper

struct WindowData {
    src: QLayout,
    h0: Presentation,
    h1: Presentation,
    h2: Presentation,
    h2_denoms: Mat,
}

fn cohomology_at_window(
    phi: &[Vec<LaurentElement>],
    gam: &[Vec<LaurentElement>],
    torsion: &[u32],
    params: &Arc<RingParams>,
    gact: ActionParams,
    b: i64,
) -> Result<WindowData> {
    let p = params.p();
    let n = params.n();
    let f = params.f();
    let modulus = params.modulus();
    let s0 = (p as i64 - 1) * (n as i64 - 1) + 1;
    let src = QLayout { p, n, f, lo: -b, s0, torsion: torsion.to_vec() };

    let (mp, tp) = assemble_operator(&src, phi, RingAct::Phi, params, gact, true)?;
    let (mg, tg) = assemble_operator(&src, gam, RingAct::Gamma, params, gact, true)?;

    // H⁰ = ker α
    let h0 = kernel_of_operators(
        &src,
        &[(mp.clone(), tp.clone()), (mg.clone(), tg.clone())],
        p,
        n,
    );

    // the part of the α-image landing inside the window seeds the H¹ denominator
    let (ins_p, out_p, om_p) = split_rows(&mp, &tp, &src);
    let (ins_g, out_g, om_g) = split_rows(&mg, &tg, &src);
    let outside = out_p.vstack(&out_g);
    let mut out_moduli = om_p;
    out_moduli.extend(om_g);
    let ahat = window_kernel(&outside, &out_moduli, p, n);
    let img_alpha = ins_p.vstack(&ins_g).mul(&ahat, modulus);

    // β on the pair window, over the common target
    let common_lo = tp.lo.min(tg.lo);
    let common = QLayout { p, n, f, lo: common_lo, s0, torsion: torsion.to_vec() };
    let beta = embed_rows(&mg, &tg, common_lo)
        .hstack(&neg_mat(&embed_rows(&mp, &tp, common_lo), modulus));

    // H¹ = ker β̄ / (α-image + annihilators)
    let khat1 = window_kernel(&beta, &common.moduli(), p, n);
    let mut src2_moduli = src.moduli();
    src2_moduli.extend(src.moduli());
    let t1 = img_alpha.hstack(&annihilator_gens(&src2_moduli, p, n));
    let h1 = snf::subquotient(&khat1, &t1, p, n);

    // H² = window / (β-image + annihilators).  The pairs feeding the image
    // need a deeper γ-slot than the window itself: a β-preimage of a window
    // element can always be chosen with its φ-slot no deeper than ~B/p (the
    // substituted uniformizer multiplies depth by p, and that leading term
    // is a unit), but its γ-slot may legitimately reach ~2B before the
    // correction ladder at the depths with a^i ≡ 1 runs out.  A same-size
    // source window would miss exactly the bottom coordinates and freeze a
    // spurious class there that no amount of stabilization detects.
    let mut lo_phi: i64 = 0;
    for row in phi {
        for e in row {
            if let Some(l) = e.lo() {
                lo_phi = lo_phi.min(l);
            }
        }
    }
    let slack = (n as i64) * (p as i64) * (p as i64 - 1)
        + p as i64
        + s0
        + 2 * (-lo_phi.min(0));
    let src_y = QLayout { p, n, f, lo: -(2 * b + slack), s0, torsion: torsion.to_vec() };
    let (mg2, tg2) = assemble_operator(&src_y, gam, RingAct::Gamma, params, gact, true)?;
    let deep_lo = tg2.lo.min(tp.lo);
    let beta2 = embed_rows(&mg2, &tg2, deep_lo)
        .hstack(&neg_mat(&embed_rows(&mp, &tp, deep_lo), modulus));
    let deep = QLayout { p, n, f, lo: deep_lo, s0, torsion: torsion.to_vec() };
    let (ins_b, out_b, om_b) = split_rows(&beta2, &deep, &src);
    let dhat = window_kernel(&out_b, &om_b, p, n);
    let img_beta = ins_b.mul(&dhat, modulus);
    let t2 = img_beta.hstack(&annihilator_gens(&src.moduli(), p, n));
    let h2 = snf::subquotient(&Mat::identity(src.size()), &t2, p, n);

    Ok(WindowData { src, h0, h1, h2, h2_denoms: t2 })
}

/// Weight lower bound of a matrix, each row capped by its coordinate's
/// torsion exponent; unseen tails of windowed entries are counted at their
/// own lower bound prec+1.
pub(crate) fn matrix_weight_low(entries: &[Vec<LaurentElement>], torsion: &[u32]) -> i64 {
    const FAR: i64 = i64::MAX / 4;
    let mut best = FAR;
    for (i, row) in entries.iter().enumerate() {
        for e in row {
            if let Some(w) = e.weight_low(torsion[i]) {
                best = best.min(w);
            }
            if let Some(pr) = e.prec() {
                best = best.min(pr + 1);
            }
        }
    }
    best
}

/// Rescale the basis by the uniform power π^k that makes every φ-matrix
/// monomial weight nonnegative; γ-weights can only rise under it.
pub(crate) fn twist_matrices(
    m: &PhiGammaModule,
) -> Result<(Vec<Vec<LaurentElement>>, Vec<Vec<LaurentElement>>, i64)> {
    let params = &m.params;
    let p = params.p() as i64;
    let w_gam = matrix_weight_low(&m.gam, &m.torsion);
    if w_gam < 0 {
        return Err(Error::InvalidParams(format!(
            "γ-matrix carries a monomial of weight {}; the filtration argument needs \
             nonnegative γ-weights",
            w_gam
        )));
    }
    let w_phi = matrix_weight_low(&m.phi, &m.torsion);
    if w_phi >= 0 {
        return Ok((m.phi.clone(), m.gam.clone(), 0));
    }
    let k = (-w_phi + (p - 2)) / (p - 1);
    let tau_phi = phi_pi(params).shift(-1).pow(k as u64);
    let tau_gam = gamma_pi(params, m.act).shift(-1).pow(k as u64);
    let phi_t: Vec<Vec<LaurentElement>> =
        m.phi.iter().map(|row| row.iter().map(|e| e.mul(&tau_phi)).collect()).collect();
    let gam_t: Vec<Vec<LaurentElement>> =
        m.gam.iter().map(|row| row.iter().map(|e| e.mul(&tau_gam)).collect()).collect();
    if matrix_weight_low(&phi_t, &m.torsion) < 0 || matrix_weight_low(&gam_t, &m.torsion) < 0 {
        return Err(Error::InvalidParams(
            "basis rescaling failed to reach nonnegative operator weights".into(),
        ));
    }
    Ok((phi_t, gam_t, k))
}

/// The three cohomology groups of a module, with enough context to decode
/// generators into module elements and to test membership of H² classes.
pub struct CohomologyResult {
    pub h0: Presentation,
    pub h1: Presentation,
    pub h2: Presentation,
    /// Window radius at which the invariants stabilized.
    pub window: i64,
    params: Arc<RingParams>,
    layout: QLayout,
    twist: i64,
    h2_denoms: Mat,
}

/// Run the engine: rescale, assemble, compute on doubling windows, accept
/// two consecutive agreeing invariant lists.
pub fn cohomology(m: &PhiGammaModule, opts: &EngineOptions) -> Result<CohomologyResult> {
    let params = &m.params;
    let (phi_t, gam_t, twist) = twist_matrices(m)?;
    let mut b = opts.window_start.max(8);
    let mut prev: Option<(Vec<u32>, Vec<u32>, Vec<u32>)> = None;
    loop {
        let wd = cohomology_at_window(&phi_t, &gam_t, &m.torsion, params, m.act, b)?;
        let tri = (wd.h0.orders.clone(), wd.h1.orders.clone(), wd.h2.orders.clone());
        if prev.as_ref() == Some(&tri) {
            return Ok(CohomologyResult {
                h0: wd.h0,
                h1: wd.h1,
                h2: wd.h2,
                window: b,
                params: params.clone(),
                layout: wd.src,
                twist,
                h2_denoms: wd.h2_denoms,
            });
        }
        if b >= opts.window_max {
            return Err(Error::NoStabilization(format!(
                "invariants were still moving at window radius {}",
                b
            )));
        }
        prev = Some(tri);
        b *= 2;
    }
}

impl CohomologyResult {
    pub fn invariants(&self) -> (Vec<u32>, Vec<u32>, Vec<u32>) {
        (self.h0.orders.clone(), self.h1.orders.clone(), self.h2.orders.clone())
    }

    /// Σ lengths with alternating signs, l(H⁰) − l(H¹) + l(H²).
    pub fn euler_characteristic(&self) -> i64 {
        self.h0.length() as i64 - self.h1.length() as i64 + self.h2.length() as i64
    }

    /// Turn window coordinates into a module element in the caller's basis.
    fn decode_single(&self, coords: &[u64]) -> Vec<LaurentElement> {
        let lay = &self.layout;
        let p = lay.p;
        let mut out = vec![LaurentElement::zero(&self.params); lay.d()];
        for (idx, &v) in coords.iter().enumerate() {
            if v == 0 {
                continue;
            }
            let (i, l, t) = lay.coord(idx);
            let vr = v % p.pow(lay.modulus_exp(i, l));
            if vr == 0 {
                continue;
            }
            let mut poly = vec![0u64; lay.f];
            poly[t] = vr;
            let c = CoeffElement::from_poly(&self.params, &poly);
            let mono = LaurentElement::monomial(&self.params, i + self.twist, c);
            out[l] = out[l].add(&mono);
        }
        out
    }

    pub fn h0_elements(&self) -> Vec<(Vec<LaurentElement>, u32)> {
        (0..self.h0.orders.len())
            .map(|j| (self.decode_single(&self.h0.gens.col(j)), self.h0.orders[j]))
            .collect()
    }

    /// 1-cocycles (first slot pairs with φ, second with γ).
    pub fn h1_elements(&self) -> Vec<(Vec<LaurentElement>, Vec<LaurentElement>, u32)> {
        let half = self.layout.size();
        (0..self.h1.orders.len())
            .map(|j| {
                let col = self.h1.gens.col(j);
                (
                    self.decode_single(&col[..half]),
                    self.decode_single(&col[half..]),
                    self.h1.orders[j],
                )
            })
            .collect()
    }

    pub fn h2_elements(&self) -> Vec<(Vec<LaurentElement>, u32)> {
        (0..self.h2.orders.len())
            .map(|j| (self.decode_single(&self.h2.gens.col(j)), self.h2.orders[j]))
            .collect()
    }

    /// Project a module element onto the window coordinates; errors if it
    /// visibly sticks out below the stabilized window or is too blurry to
    /// project at all.
    pub fn encode(&self, x: &[LaurentElement]) -> Result<Vec<u64>> {
        let lay = &self.layout;
        assert_eq!(x.len(), lay.d(), "element rank mismatch");
        let p = lay.p;
        let mut coords = vec![0u64; lay.size()];
        for (l, comp) in x.iter().enumerate() {
            let shifted = comp.shift(-self.twist);
            if let Some(pr) = shifted.prec() {
                if pr < lay.s0 - 1 {
                    return Err(Error::WindowTooSmall(format!(
                        "representative known to O(π^{}) cannot be projected through π^{}",
                        pr + 1,
                        lay.s0 - 1
                    )));
                }
            }
            for (&i, c) in shifted.coeffs() {
                if i >= lay.s0 {
                    continue;
                }
                let me = lay.modulus_exp(i, l);
                let pm = p.pow(me);
                for (t, &v) in c.coeffs().iter().enumerate() {
                    if v % pm == 0 {
                        continue;
                    }
                    if i < lay.lo {
                        return Err(Error::WindowTooSmall(format!(
                            "class has support at π^{}, below the stabilized window −{}",
                            i, -lay.lo
                        )));
                    }
                    coords[lay.idx(i, l, t)] = v;
                }
            }
        }
        Ok(coords)
    }

    /// Is the degree-2 class of x zero, i.e. does x lie in the image of β
    /// plus the annihilator lattice?
    pub fn h2_class_is_trivial(&self, x: &[LaurentElement]) -> Result<bool> {
        let e = self.encode(x)?;
        Ok(snf::solve(&self.h2_denoms, &e, self.layout.p, self.layout.n).is_some())
    }

    /// Coordinates of the degree-2 class of x over the H² generators, each
    /// reduced mod its generator's order.
    pub fn h2_class_coords(&self, x: &[LaurentElement]) -> Result<Vec<u64>> {
        let e = self.encode(x)?;
        let r = self.h2.orders.len();
        if r == 0 {
            return Ok(vec![]);
        }
        let sys = self.h2.gens.hstack(&self.h2_denoms);
        let sol = snf::solve(&sys, &e, self.layout.p, self.layout.n).ok_or_else(|| {
            Error::InvalidParams("element does not lie in the window presentation".into())
        })?;
        Ok((0..r)
            .map(|j| sol[j] % self.layout.p.pow(self.h2.orders[j]))
            .collect())
    }
}

// ---------------------------------------------------------------- (φ−1)-solving and Euler counts

/// Solve (φ−1)x = y when every monomial of y sits above the contraction
/// threshold c(M) = ⌈(C+1)/(p−1)⌉ + C, C = max(0, −lo Φ): there the lowest
/// exponent grows along φ, so x = −Σ_k φᵏ(y) terminates on any window.
pub fn solve_phi_minus_one(
    m: &PhiGammaModule,
    y: &[LaurentElement],
    hi: i64,
) -> Result<Vec<LaurentElement>> {
    let p = m.params.p() as i64;
    let mut lo_phi: i64 = 0;
    for row in &m.phi {
        for e in row {
            if let Some(l) = e.lo() {
                lo_phi = lo_phi.min(l);
            }
        }
    }
    let c_gap = -lo_phi.min(0);
    let thresh = (c_gap + 1 + (p - 2)) / (p - 1) + c_gap;
    for comp in y {
        if let Some(l) = comp.lo() {
            if l < thresh {
                return Err(Error::BelowThreshold(format!(
                    "right-hand side has support at π^{}, below the contraction threshold π^{}",
                    l, thresh
                )));
            }
        }
    }

    let cur0: Vec<LaurentElement> = y.iter().map(|c| c.truncated(hi)).collect();
    let mut acc = cur0.clone();
    let mut cur = cur0;
    let limit = (hi - thresh + 4).max(4) as usize;
    for _ in 0..limit {
        cur = m.apply_phi_vec(&cur, hi)?;
        if cur.iter().all(|c| c.is_visibly_zero()) {
            return Ok(acc.iter().map(|c| c.neg()).collect());
        }
        acc = acc.iter().zip(&cur).map(|(a, c)| a.add(c)).collect();
    }
    Err(Error::NoConvergence(format!(
        "φ-iteration did not exhaust the window after {} steps",
        limit
    )))
}

/// The alternating length the cohomology of a module must total:
/// −f·Σ torsion exponents.
pub fn expected_euler_characteristic(m: &PhiGammaModule) -> i64 {
    -(m.params.f() as i64) * m.torsion.iter().map(|&t| t as i64).sum::<i64>()
}

// ----------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laurent::DEFAULT_PREC;

    fn setup(p: u64, n: u32, f: usize) -> (Arc<RingParams>, ActionParams) {
        let minpoly = match (p, f) {
            (_, 1) => None,
            (3, 2) => Some(vec![2, 2, 1]),
            _ => panic!("no residue-field polynomial wired up for p={p}, f={f}"),
        };
        let params = RingParams::new(p, n, f, minpoly).expect("ring");
        let act = ActionParams::new(2, p).expect("action");
        (params, act)
    }

    fn run(m: &PhiGammaModule) -> CohomologyResult {
        cohomology(m, &EngineOptions::default()).expect("cohomology should stabilize")
    }

    #[test]
    fn trivial_module_over_q3() {
        let (params, act) = setup(3, 1, 1);
        let m = PhiGammaModule::trivial(&params, act);
        let r = run(&m);
        assert_eq!(r.h0.orders, vec![1], "H⁰ of the trivial module is ℤ/3");
        assert_eq!(r.h1.orders, vec![1, 1], "H¹ of the trivial module is (ℤ/3)²");
        assert!(r.h2.orders.is_empty(), "H² of the trivial module vanishes");
        assert_eq!(r.euler_characteristic(), expected_euler_characteristic(&m));
    }

    #[test]
    fn cyclotomic_module_over_q3() {
        let (params, act) = setup(3, 1, 1);
        let m = PhiGammaModule::omega(&params, act);
        let r = run(&m);
        assert!(r.h0.orders.is_empty(), "the cyclotomic twist has no invariants");
        assert_eq!(r.h1.orders, vec![1, 1]);
        assert_eq!(r.h2.orders, vec![1], "H² of the cyclotomic twist is ℤ/3");
    }

    #[test]
    fn trivial_and_cyclotomic_over_q5() {
        let (params, act) = setup(5, 1, 1);
        let r = run(&PhiGammaModule::trivial(&params, act));
        assert_eq!(
            (r.h0.orders.clone(), r.h1.orders.clone(), r.h2.orders.clone()),
            (vec![1], vec![1, 1], vec![]),
        );
        let r = run(&PhiGammaModule::omega(&params, act));
        assert_eq!(
            (r.h0.orders.clone(), r.h1.orders.clone(), r.h2.orders.clone()),
            (vec![], vec![1, 1], vec![1]),
        );
    }

    #[test]
    fn unramified_quadratic_twist_has_only_h1() {
        let (params, act) = setup(3, 1, 1);
        let m = PhiGammaModule::unramified_twist(&params, act, 2).expect("twist");
        let r = run(&m);
        assert!(r.h0.orders.is_empty(), "2σ(x) = x forces x = 0 over F₃");
        assert_eq!(r.h1.orders, vec![1], "Euler count −1 rests entirely on H¹");
        assert!(r.h2.orders.is_empty());
    }

    #[test]
    fn square_cyclotomic_twist_mod_3_looks_trivial() {
        // a² ≡ 1 mod 3, so the square twist is the trivial character mod 3
        // even though its matrices are honest degree-8 series.
        let (params, act) = setup(3, 1, 1);
        let m = PhiGammaModule::cyclotomic_twist(&params, act, 2, None).expect("twist");
        let r = run(&m);
        assert_eq!(r.h0.orders, vec![1]);
        assert_eq!(r.h1.orders, vec![1, 1]);
        assert!(r.h2.orders.is_empty());
    }

    #[test]
    fn trivial_module_mod_nine() {
        let (params, act) = setup(3, 2, 1);
        let m = PhiGammaModule::trivial(&params, act);
        let r = run(&m);
        assert_eq!(r.h0.orders, vec![2], "H⁰ = ℤ/9");
        assert_eq!(r.h1.orders, vec![2, 2], "H¹ = (ℤ/9)²");
        assert!(r.h2.orders.is_empty());
        assert_eq!(r.euler_characteristic(), -2);
    }

    #[test]
    fn cyclotomic_module_mod_nine() {
        let (params, act) = setup(3, 2, 1);
        let m = PhiGammaModule::omega(&params, act);
        let r = run(&m);
        assert!(r.h0.orders.is_empty());
        assert_eq!(r.h1.orders, vec![2, 2]);
        assert_eq!(r.h2.orders, vec![2], "H² = ℤ/9 for the cyclotomic twist");
    }

    #[test]
    fn unramified_base_change_adds_h1() {
        let (params, act) = setup(3, 1, 2);
        let m = PhiGammaModule::trivial(&params, act);
        let r = run(&m);
        assert_eq!(r.h0.orders, vec![1], "σ-invariants of F₉ are F₃");
        assert_eq!(r.h1.orders, vec![1, 1, 1], "f = 2 doubles the Euler defect");
        assert!(r.h2.orders.is_empty());
        assert_eq!(r.euler_characteristic(), -2);
    }

    #[test]
    fn torsion_summand_counts_like_its_annihilator() {
        // ℤ/9 ⊕ ℤ/3 with trivial actions: lengths add coordinatewise.
        let (params, act) = setup(3, 2, 1);
        let t2 = PhiGammaModule::trivial(&params, act);
        let mut t1 = PhiGammaModule::trivial(&params, act);
        t1.torsion = vec![1];
        t1.validate().expect("p-torsion summand is a valid module");
        let m = t2.direct_sum(&t1).expect("sum");
        let r = run(&m);
        assert_eq!(r.h0.orders, vec![2, 1]);
        assert_eq!(r.h1.orders, vec![2, 2, 1, 1]);
        assert!(r.h2.orders.is_empty());
        assert_eq!(r.euler_characteristic(), -3, "lengths 3 − 6 + 0");
    }

    #[test]
    fn h2_membership_on_the_cyclotomic_twist() {
        let (params, act) = setup(3, 1, 1);
        let m = PhiGammaModule::omega(&params, act);
        let r = run(&m);

        // π⁻¹ generates H²; the constant 1 (the exact form dπ) is a coboundary
        let gen = vec![LaurentElement::pi_pow(&params, -1)];
        let one = vec![LaurentElement::one(&params)];
        assert!(!r.h2_class_is_trivial(&gen).unwrap(), "π⁻¹·dπ generates H²");
        assert!(r.h2_class_is_trivial(&one).unwrap(), "dπ itself is a coboundary");
        let coords = r.h2_class_coords(&gen).unwrap();
        assert_eq!(coords.len(), 1);
        assert_ne!(coords[0] % 3, 0, "π⁻¹·dπ maps to a unit coordinate");
    }

    #[test]
    fn solve_phi_minus_one_known_value() {
        let (params, act) = setup(3, 1, 1);
        let m = PhiGammaModule::trivial(&params, act);
        // (φ−1)x = π has x = −(π + π³ + π⁹ + …) mod 3
        let y = vec![LaurentElement::pi_pow(&params, 1)];
        let x = solve_phi_minus_one(&m, &y, DEFAULT_PREC).expect("solvable");
        let fx = m.apply_phi_vec(&x, DEFAULT_PREC).unwrap();
        let back = fx[0].sub(&x[0]);
        assert!(
            back.sub(&y[0].truncated(back.prec().unwrap())).is_visibly_zero(),
            "(φ−1)x reproduces y on the window: got {:?}",
            back.window()
        );
        assert_eq!(x[0].coeff_at(1).coeffs()[0], 2, "leading term is −π");
        assert_eq!(x[0].coeff_at(3).coeffs()[0], 2, "next term is −π³");
    }

    #[test]
    fn solve_phi_minus_one_threshold_is_enforced() {
        let (params, act) = setup(3, 1, 1);
        let m = PhiGammaModule::trivial(&params, act);
        let y = vec![LaurentElement::one(&params)];
        let err = solve_phi_minus_one(&m, &y, DEFAULT_PREC).unwrap_err();
        assert!(
            matches!(err, Error::BelowThreshold(_)),
            "constants sit below the contraction threshold: {err}"
        );
    }

    #[test]
    fn stabilization_reports_the_accepting_window() {
        let (params, act) = setup(3, 1, 1);
        let r = run(&PhiGammaModule::trivial(&params, act));
        assert_eq!(r.window, 64, "32 and 64 agree, and the later one is reported");
    }
}
