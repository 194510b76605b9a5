//! Cup products and the explicit duality pairing.
//!
//! The degree-two cohomology of the differential twist Ω (generator e ↔ dπ,
//! φ-action divided by p) is identified with ℤ/pⁿ by the normalized
//! residue-trace functional
//!
//!   w·e ↦ −(p / log a)·Tr(res(w dπ)),
//!
//! where a = χ(γ) and log a has p-adic valuation exactly one.  On top of that
//! sit cup products of cochains of the two-operator complex, the evaluation
//! M ⊗ M̃ → Ω against the dual module, and the resulting pairing
//!
//!   H^i(M) × H^{2−i}(M̃) → ℤ/pⁿ,
//!
//! reported degree by degree together with a perfectness verdict: the two
//! sides must have equal invariant factors and both adjoint maps must be
//! surjective.
//!
//! Cochain conventions match the complex: a 1-cochain is a pair whose first
//! slot faces φ and whose second faces γ, a 1-cocycle satisfies
//! (γ−1)x = (φ−1)y, and the only degree combination that needs a formula
//! beyond plain tensoring is
//!
//!   (x₁, y₁) ∪ (x₂, y₂) = y₁ ⊗ γx₂ − x₁ ⊗ φy₂,
//!
//! which changes by the coboundary of (v⊗x₂, v⊗y₂), resp. −(x₁⊗φu, y₁⊗γu),
//! when a representative moves by α(v) on the left or α(u) on the right.

use std::sync::Arc;

use crate::coeff::{inv_mod_pk, mul_mod, padic_log, trace_to_base, CoeffElement, RingParams};
use crate::cohomology::{cohomology, CohomologyResult, EngineOptions};
use crate::error::Error;
use crate::laurent::{residue, ActionParams, DifferentialForm, LaurentElement};
use crate::module::PhiGammaModule;
use crate::snf::{subquotient, Mat};
use crate::Result;

// ---------------------------------------------------------------- residue-trace functional

/// The normalization −p / log a mod pⁿ.  The action parameter is a primitive
/// root mod p², so log a = p·u with u a unit; anything else is rejected.
pub fn normalization_unit(params: &Arc<RingParams>, act: ActionParams) -> Result<u64> {
    let p = params.p();
    let lg = padic_log(&CoeffElement::from_residue(params, act.a()), 2)?;
    let val = lg.coeffs()[0];
    if val % p != 0 || (val / p) % p == 0 {
        return Err(Error::InvalidParams(format!(
            "log {} must have valuation exactly one",
            act.a()
        )));
    }
    let m = params.modulus();
    let u = (val / p) % m;
    Ok((m - inv_mod_pk(u, p, m)) % m)
}

/// The isomorphism H²(Ω) ≅ ℤ/pⁿ on explicit representatives,
/// w ↦ −(p/log a)·Tr(res(w dπ)).
pub struct ResidueTraceMap {
    params: Arc<RingParams>,
    unit: u64,
}

impl ResidueTraceMap {
    pub fn new(params: &Arc<RingParams>, act: ActionParams) -> Result<ResidueTraceMap> {
        Ok(ResidueTraceMap { params: params.clone(), unit: normalization_unit(params, act)? })
    }

    /// The normalization unit −p/log a mod pⁿ.
    pub fn unit(&self) -> u64 {
        self.unit
    }

    /// Apply the functional to the coefficient of a degree-2 representative
    /// w·e.  Fails when w is too blurry to determine the residue.
    pub fn apply(&self, w: &LaurentElement) -> Result<u64> {
        let r = residue(&DifferentialForm::new(w.clone()))?;
        let t = trace_to_base(&r);
        Ok(mul_mod(t, self.unit, self.params.modulus()))
    }
}

/// [`ResidueTraceMap::apply`] guarded by a shape check: the module must be
/// the differential twist itself, otherwise the residue has no meaning.
pub fn h2_iso(m: &PhiGammaModule, w: &[LaurentElement], rt: &ResidueTraceMap) -> Result<u64> {
    let omega = PhiGammaModule::omega(&m.params, m.act);
    let n = m.params.n();
    let ok = m.rank() == 1
        && w.len() == 1
        && m.torsion == omega.torsion
        && m.phi[0][0].agrees_with(&omega.phi[0][0], n)
        && m.gam[0][0].agrees_with(&omega.gam[0][0], n);
    if !ok {
        return Err(Error::WrongModule(
            "the residue-trace realization applies to the differential twist only".into(),
        ));
    }
    rt.apply(&w[0])
}

// ---------------------------------------------------------------- cochains and cups

/// A cochain of the two-operator complex: one coordinate vector in degrees 0
/// and 2, the (φ-slot, γ-slot) pair in degree 1.
#[derive(Clone, Debug)]
pub enum Cochain {
    Zero(Vec<LaurentElement>),
    One(Vec<LaurentElement>, Vec<LaurentElement>),
    Two(Vec<LaurentElement>),
}

impl Cochain {
    pub fn degree(&self) -> u8 {
        match self {
            Cochain::Zero(_) => 0,
            Cochain::One(_, _) => 1,
            Cochain::Two(_) => 2,
        }
    }

    fn components(&self) -> Vec<&LaurentElement> {
        match self {
            Cochain::Zero(x) | Cochain::Two(x) => x.iter().collect(),
            Cochain::One(x, y) => x.iter().chain(y.iter()).collect(),
        }
    }
}

/// (x ⊗ y)_{l·dim(y)+j} = xₗ·yⱼ on the lexicographic tensor basis.
fn tensor_vec(x: &[LaurentElement], y: &[LaurentElement]) -> Vec<LaurentElement> {
    let mut out = Vec::with_capacity(x.len() * y.len());
    for xl in x {
        for yj in y {
            out.push(xl.mul(yj));
        }
    }
    out
}

fn sub_vec(x: &[LaurentElement], y: &[LaurentElement]) -> Vec<LaurentElement> {
    x.iter().zip(y).map(|(a, b)| a.sub(b)).collect()
}

/// Cup product of a cochain on M with a cochain on N, valued in M ⊗ N.
/// Only the operators of the right module enter; total degree above two is
/// rejected.  On cocycles the result represents the cohomological cup
/// product.
pub fn cup(right: &PhiGammaModule, x: &Cochain, y: &Cochain) -> Result<Cochain> {
    // enough precision that downstream residues stay exact even after both
    // factors reach their deepest pole
    let depth = x
        .components()
        .into_iter()
        .chain(y.components())
        .filter_map(|e| e.lo())
        .min()
        .unwrap_or(0)
        .min(0);
    let hi = -2 * depth + right.params.p() as i64 + 8;
    Ok(match (x, y) {
        (Cochain::Zero(a), Cochain::Zero(b)) => Cochain::Zero(tensor_vec(a, b)),
        (Cochain::Zero(a), Cochain::One(b1, b2)) => {
            Cochain::One(tensor_vec(a, b1), tensor_vec(a, b2))
        }
        (Cochain::One(a1, a2), Cochain::Zero(b)) => {
            Cochain::One(tensor_vec(a1, b), tensor_vec(a2, b))
        }
        (Cochain::One(a1, a2), Cochain::One(b1, b2)) => {
            let gb1 = right.apply_gamma_vec(b1, hi)?;
            let pb2 = right.apply_phi_vec(b2, hi)?;
            Cochain::Two(sub_vec(&tensor_vec(a2, &gb1), &tensor_vec(a1, &pb2)))
        }
        (Cochain::Zero(a), Cochain::Two(w)) => Cochain::Two(tensor_vec(a, w)),
        (Cochain::Two(w), Cochain::Zero(a)) => Cochain::Two(tensor_vec(w, a)),
        _ => {
            return Err(Error::DegreeOverflow(format!(
                "cup of degrees {} and {} exceeds the length of the complex",
                x.degree(),
                y.degree()
            )))
        }
    })
}

// ---------------------------------------------------------------- cocycle repair

fn visibly_zero(v: &[LaurentElement]) -> bool {
    v.iter().all(LaurentElement::is_visibly_zero)
}

fn add_vec(x: &[LaurentElement], y: &[LaurentElement]) -> Vec<LaurentElement> {
    x.iter().zip(y).map(|(a, b)| a.add(b)).collect()
}

/// Coefficient-wise reduction of the component of a torsion-p^k generator
/// to its canonical representative mod p^k.  The coordinate of such a
/// generator carries no information beyond p^k, and the invisible multiples
/// must go before a defect is inspected: they can sit at arbitrarily deep
/// exponents, where iterating φ would expand instead of contract.
fn reduce_component(params: &Arc<RingParams>, e: &LaurentElement, k: u32) -> LaurentElement {
    if k == params.n() {
        return e.clone();
    }
    let q = params.p().pow(k);
    let mut out = LaurentElement::zero(params);
    for (&i, c) in e.coeffs() {
        let digits: Vec<u64> = c.coeffs().iter().map(|&a| a % q).collect();
        let r = CoeffElement::from_poly(params, &digits);
        if !r.is_zero() {
            out = out.add(&LaurentElement::monomial(params, i, r));
        }
    }
    out.with_prec(e.prec())
}

fn reduce_defect(m: &PhiGammaModule, e: &[LaurentElement]) -> Vec<LaurentElement> {
    e.iter()
        .zip(&m.torsion)
        .map(|(c, &k)| reduce_component(&m.params, c, k))
        .collect()
}

/// Σ_{k≥0} φᵏ(e), defined whenever e sits in positive exponents: φ at least
/// multiplies such a valuation by p, so the tail leaves any finite precision
/// after ~log_p(hi) steps.  By telescoping, (φ−1) of the sum is −e.
fn phi_geometric_sum(
    m: &PhiGammaModule,
    e: &[LaurentElement],
    hi: i64,
) -> Result<Vec<LaurentElement>> {
    let mut acc = e.to_vec();
    let mut cur = e.to_vec();
    for _ in 0..128 {
        cur = reduce_defect(m, &m.apply_phi_vec(&cur, hi)?);
        if visibly_zero(&cur) {
            return Ok(acc);
        }
        acc = add_vec(&acc, &cur);
    }
    Err(Error::NoConvergence(
        "geometric φ-series still visible after 128 terms; \
         the cocycle defect is not supported in positive exponents"
            .into(),
    ))
}

/// Replace a truncated representative by the cocycle it approximates.
///
/// Window representatives satisfy their cocycle identities only up to a
/// defect supported in positive exponents of positive p-valuation.  That
/// defect region is one where (φ−1) is invertible, with inverse
/// −Σ_{k≥0} φᵏ, so degree 0 is repaired by x ↦ x + Σ φᵏ((φ−1)x) and
/// degree 1 by keeping the φ-slot and moving the γ-slot to
/// y − Σ φᵏ((γ−1)x − (φ−1)y).  In degree 0 the γ-identity then holds for
/// free: (γ−1) of the repaired element is killed by (φ−1), which is
/// injective there.  Degree 2 has no identity to repair.  The corrections
/// vanish under truncation back to the window, so the represented class is
/// untouched, and an exact cocycle passes through unchanged.
fn lift_to_cocycle(m: &PhiGammaModule, c: &Cochain, hi: i64) -> Result<Cochain> {
    Ok(match c {
        Cochain::Zero(x) => {
            let e = reduce_defect(m, &sub_vec(&m.apply_phi_vec(x, hi)?, x));
            if visibly_zero(&e) {
                c.clone()
            } else {
                Cochain::Zero(add_vec(x, &phi_geometric_sum(m, &e, hi)?))
            }
        }
        Cochain::One(u, v) => {
            let gu = sub_vec(&m.apply_gamma_vec(u, hi)?, u);
            let pv = sub_vec(&m.apply_phi_vec(v, hi)?, v);
            let e = reduce_defect(m, &sub_vec(&gu, &pv));
            if visibly_zero(&e) {
                c.clone()
            } else {
                Cochain::One(u.clone(), sub_vec(v, &phi_geometric_sum(m, &e, hi)?))
            }
        }
        Cochain::Two(_) => c.clone(),
    })
}

// ---------------------------------------------------------------- evaluation and pairing

/// The evaluation M ⊗ M̃ → Ω on the lexicographic tensor basis,
/// e_l ⊗ ẽ_j ↦ δ_{lj}·p^{n−n_l}·e.  Against [`PhiGammaModule::hom_dual`]
/// this intertwines both operators: Σ_l p^{n−n_l}·Φ_{lk}·Φ̃_{lm} reduces to
/// u·p^{n−n_m}·δ_{km} with u the Ω multiplier.
pub fn eval_to_omega(m: &PhiGammaModule, t: &[LaurentElement]) -> Result<LaurentElement> {
    let d = m.rank();
    if t.len() != d * d {
        return Err(Error::WrongModule(format!(
            "evaluation expects {} tensor coordinates, got {}",
            d * d,
            t.len()
        )));
    }
    let n = m.params.n();
    let p = m.params.p();
    let mut f = LaurentElement::zero(&m.params);
    for l in 0..d {
        let scale = CoeffElement::from_residue(&m.params, p).pow((n - m.torsion[l]) as u64);
        f = f.add(&t[l * d + l].scale(&scale));
    }
    Ok(f)
}

/// ⟨x, y⟩ ∈ ℤ/pⁿ for cochains of total degree two: repair both sides into
/// genuine cocycles, cup into M ⊗ M̃, evaluate into Ω, apply the
/// residue-trace functional.
///
/// The repair step matters: a truncated representative that is a cocycle
/// only up to positive-exponent terms would leak those terms into the
/// residue once the other factor has poles, and the reported value would
/// depend on the truncation.  On exact cocycles it is a no-op.
pub fn pair_cochains(
    m: &PhiGammaModule,
    mdual: &PhiGammaModule,
    x: &Cochain,
    y: &Cochain,
    rt: &ResidueTraceMap,
) -> Result<u64> {
    if mdual.rank() != m.rank() || mdual.torsion != m.torsion {
        return Err(Error::TorsionMismatch(
            "the dual side must have the torsion exponents of the module itself".into(),
        ));
    }
    // same precision the cup itself will use; the corrections live in
    // positive exponents, so they do not move the depth
    let depth = x
        .components()
        .into_iter()
        .chain(y.components())
        .filter_map(|e| e.lo())
        .min()
        .unwrap_or(0)
        .min(0);
    let hi = -2 * depth + m.params.p() as i64 + 8;
    let x = lift_to_cocycle(m, x, hi)?;
    let y = lift_to_cocycle(mdual, y, hi)?;
    let c = cup(mdual, &x, &y)?;
    let w = match c {
        Cochain::Two(w) => w,
        other => {
            return Err(Error::DegreeOverflow(format!(
                "the pairing needs total degree two, got {}",
                other.degree()
            )))
        }
    };
    rt.apply(&eval_to_omega(m, &w)?)
}

// ---------------------------------------------------------------- perfectness reports

/// The pairing table of one degree combination, with its verdict.
#[derive(Clone, Debug)]
pub struct PairingReport {
    /// (left degree, right degree), summing to two.
    pub degrees: (u8, u8),
    /// Invariant-factor exponents of H^i(M), descending.
    pub left_orders: Vec<u32>,
    /// Invariant-factor exponents of H^{2−i}(M̃), descending.
    pub right_orders: Vec<u32>,
    /// ⟨xⱼ, yₖ⟩ mod pⁿ at row j, column k.
    pub table: Mat,
    /// Equal invariant factors, well-formed divisibility, and both adjoints
    /// surjective.
    pub perfect: bool,
}

fn classes(h: &CohomologyResult, deg: u8) -> (Vec<Cochain>, Vec<u32>) {
    match deg {
        0 => {
            let e = h.h0_elements();
            let o = e.iter().map(|(_, o)| *o).collect();
            (e.into_iter().map(|(x, _)| Cochain::Zero(x)).collect(), o)
        }
        1 => {
            let e = h.h1_elements();
            let o = e.iter().map(|(_, _, o)| *o).collect();
            (e.into_iter().map(|(x, y, _)| Cochain::One(x, y)).collect(), o)
        }
        _ => {
            let e = h.h2_elements();
            let o = e.iter().map(|(_, o)| *o).collect();
            (e.into_iter().map(|(x, _)| Cochain::Two(x)).collect(), o)
        }
    }
}

/// Cokernel triviality of one adjoint: the columns of `map` (entries taken
/// mod p^{orders[k]} row-wise) must generate ⊕ₖ ℤ/p^{orders[k]}.
fn adjoint_surjective(map: &Mat, orders: &[u32], p: u64, n: u32) -> bool {
    let k = orders.len();
    let modulus = p.pow(n);
    let mut rel = Mat::zeros(k, k);
    for (i, &e) in orders.iter().enumerate() {
        rel.set(i, i, p.pow(e) % modulus);
    }
    subquotient(&Mat::identity(k), &map.hstack(&rel), p, n).orders.is_empty()
}

fn verdict(
    left_orders: &[u32],
    right_orders: &[u32],
    table: &Mat,
    p: u64,
    n: u32,
) -> bool {
    if left_orders != right_orders {
        // both lists are descending, so multiset equality is list equality
        return false;
    }
    let jn = left_orders.len();
    let kn = right_orders.len();
    // divisibility: an order-p^a class pairs an order-p^b class into the
    // subgroup p^{n−min(a,b)}·ℤ/pⁿ
    for j in 0..jn {
        for k in 0..kn {
            let e = n - left_orders[j].min(right_orders[k]);
            if table.at(j, k) % p.pow(e) != 0 {
                return false;
            }
        }
    }
    // right adjoint: xⱼ ↦ ⟨xⱼ, ·⟩ ∈ ⊕ₖ Hom(ℤ/p^{bₖ}, ℤ/pⁿ) ≅ ⊕ₖ ℤ/p^{bₖ}
    let mut right_map = Mat::zeros(kn, jn);
    for j in 0..jn {
        for k in 0..kn {
            right_map.set(k, j, table.at(j, k) / p.pow(n - right_orders[k]));
        }
    }
    if !adjoint_surjective(&right_map, right_orders, p, n) {
        return false;
    }
    // left adjoint: yₖ ↦ ⟨·, yₖ⟩ ∈ ⊕ⱼ ℤ/p^{aⱼ}
    let mut left_map = Mat::zeros(jn, kn);
    for j in 0..jn {
        for k in 0..kn {
            left_map.set(j, k, table.at(j, k) / p.pow(n - left_orders[j]));
        }
    }
    adjoint_surjective(&left_map, left_orders, p, n)
}

/// Run both cohomologies and tabulate the pairing in all three degree
/// combinations (0,2), (1,1), (2,0), with one verdict per combination.
pub fn pairing_reports(m: &PhiGammaModule, opts: &EngineOptions) -> Result<Vec<PairingReport>> {
    let md = m.hom_dual(None)?;
    let hm = cohomology(m, opts)?;
    let hd = cohomology(&md, opts)?;
    let rt = ResidueTraceMap::new(&m.params, m.act)?;
    let p = m.params.p();
    let n = m.params.n();
    let mut out = Vec::with_capacity(3);
    for i in 0u8..3 {
        let (xs, left_orders) = classes(&hm, i);
        let (ys, right_orders) = classes(&hd, 2 - i);
        let mut table = Mat::zeros(xs.len(), ys.len());
        for (j, x) in xs.iter().enumerate() {
            for (k, y) in ys.iter().enumerate() {
                table.set(j, k, pair_cochains(m, &md, x, y, &rt)?);
            }
        }
        let perfect = verdict(&left_orders, &right_orders, &table, p, n);
        out.push(PairingReport { degrees: (i, 2 - i), left_orders, right_orders, table, perfect });
    }
    Ok(out)
}

// ----------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(p: u64, n: u32) -> (Arc<RingParams>, ActionParams) {
        let params = RingParams::new(p, n, 1, None).expect("ring");
        let act = ActionParams::new(2, p).expect("action");
        (params, act)
    }

    #[test]
    fn normalization_units_match_hand_computation() {
        // log 2 = 3·8 mod 27, so −1/u = −1/8 = 1 mod 9
        let (params, act) = setup(3, 2);
        assert_eq!(normalization_unit(&params, act).unwrap(), 1, "p = 3, n = 2");
        // log 2 = 5·17 mod 125, so −1/u = −1/2 = 2 mod 5
        let (params, act) = setup(5, 1);
        assert_eq!(normalization_unit(&params, act).unwrap(), 2, "p = 5, n = 1");
    }

    #[test]
    fn residue_trace_sends_the_canonical_class_to_the_unit() {
        let (params, act) = setup(3, 1);
        let rt = ResidueTraceMap::new(&params, act).unwrap();
        let w = LaurentElement::pi_pow(&params, -1);
        assert_eq!(
            rt.apply(&w).unwrap(),
            rt.unit(),
            "π⁻¹·e must map to the normalization unit itself"
        );
        // an exact polynomial part has no residue
        let v = LaurentElement::from_int_terms(&params, &[(0, 1), (2, 2)]);
        assert_eq!(rt.apply(&v).unwrap(), 0, "polynomials have residue zero");
    }

    #[test]
    fn h2_iso_rejects_modules_that_are_not_the_twist() {
        let (params, act) = setup(3, 1);
        let rt = ResidueTraceMap::new(&params, act).unwrap();
        let m = PhiGammaModule::trivial(&params, act);
        let w = [LaurentElement::pi_pow(&params, -1)];
        assert!(matches!(h2_iso(&m, &w, &rt), Err(Error::WrongModule(_))));
        let omega = PhiGammaModule::omega(&params, act);
        assert_eq!(h2_iso(&omega, &w, &rt).unwrap(), rt.unit());
    }

    #[test]
    fn the_twist_generator_pairs_to_a_unit_under_the_engine_basis() {
        let (params, act) = setup(3, 1);
        let omega = PhiGammaModule::omega(&params, act);
        let h = cohomology(&omega, &EngineOptions::default()).unwrap();
        assert_eq!(h.h2.orders, vec![1], "H² of the twist is ℤ/3");
        let rt = ResidueTraceMap::new(&params, act).unwrap();
        let (gen, order) = h.h2_elements().remove(0);
        assert_eq!(order, 1);
        let v = h2_iso(&omega, &gen, &rt).unwrap();
        assert_eq!(v % 3 != 0, true, "the generator must map to a unit, got {v}");
        // dπ itself bounds: its class vanishes, and the functional sees 0
        let one = vec![LaurentElement::one(&params)];
        assert!(h.h2_class_is_trivial(&one).unwrap(), "dπ is a coboundary");
        assert_eq!(rt.apply(&one[0]).unwrap(), 0);
    }

    #[test]
    fn cup_rejects_total_degree_past_two() {
        let (params, act) = setup(3, 1);
        let m = PhiGammaModule::trivial(&params, act);
        let one = vec![LaurentElement::one(&params)];
        let a = Cochain::One(one.clone(), one.clone());
        let b = Cochain::Two(one.clone());
        assert!(matches!(cup(&m, &a, &b), Err(Error::DegreeOverflow(_))));
    }

    #[test]
    fn duality_of_the_unit_module_is_perfect_in_every_degree() {
        let (params, act) = setup(3, 1);
        let m = PhiGammaModule::trivial(&params, act);
        let reports = pairing_reports(&m, &EngineOptions::default()).unwrap();
        assert_eq!(reports.len(), 3);
        for r in &reports {
            assert!(
                r.perfect,
                "degrees {:?}: orders {:?} vs {:?}, table {:?}",
                r.degrees, r.left_orders, r.right_orders, r.table
            );
        }
        // the known invariants appear on both sides in complementary degrees
        assert_eq!(reports[0].left_orders, vec![1], "H⁰ of the unit module");
        assert_eq!(reports[0].right_orders, vec![1], "H² of its dual");
        assert_eq!(reports[1].left_orders, vec![1, 1], "H¹ of the unit module");
    }

    #[test]
    fn duality_is_perfect_for_a_mixed_torsion_module() {
        let (params, act) = setup(3, 2);
        let t9 = PhiGammaModule::trivial(&params, act);
        let m = t9
            .direct_sum(&PhiGammaModule::new(
                &params,
                act,
                vec![1],
                vec![vec![LaurentElement::one(&params)]],
                vec![vec![LaurentElement::one(&params)]],
            ).unwrap())
            .unwrap();
        let reports = pairing_reports(&m, &EngineOptions::default()).unwrap();
        for r in &reports {
            assert!(
                r.perfect,
                "degrees {:?}: orders {:?} vs {:?}, table {:?}",
                r.degrees, r.left_orders, r.right_orders, r.table
            );
        }
        assert_eq!(reports[0].left_orders, vec![2, 1], "H⁰ of ℤ/9 ⊕ ℤ/3");
    }
}
