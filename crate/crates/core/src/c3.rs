//! The three-operator complex for modules with a second group generator.
//!
//! When the acting group has two topological generators γ, γ′ with the
//! single relation γγ′γ⁻¹ = (γ′)^a (and φ commuting with both), the
//! two-operator complex grows to
//!
//!   0 → M →^{A₀} M³ →^{A₁} M³ →^{A₂} M → 0,
//!
//!   A₀ = (φ−1, γ−1, γ′−1)ᵀ,
//!   A₁ = ⎡ γ−1    1−φ      0  ⎤
//!        ⎢ γ′−1    0      1−φ ⎥ ,
//!        ⎣  0   (γ′)^a−1  δ−γ ⎦
//!   A₂ = ((γ′)^a−1, δ−γ, φ−1),      δ = Σ_{k<a} (γ′)^k.
//!
//! That A₁A₀ = A₂A₁ = 0 uses only the group relation and the centrality of
//! φ, so it can be certified once and for all in the integral monoid algebra
//! on the three symbols ([`verify_symbolic_complex`]).  The numeric side
//! pairs a Φ-Γ-module with an extra matrix G′ acting linearly over the ring
//! ([`TwoGenModule`]) and computes the degree-zero cohomology by the same
//! quotient-window filtration as the main engine ([`c3_h0`]).

use std::collections::BTreeMap;
use std::fmt;

use crate::cohomology::{
    assemble_operator, kernel_of_operators, matrix_weight_low, twist_matrices, EngineOptions,
    QLayout, RingAct,
};
use crate::error::Error;
use crate::laurent::{apply_gamma_to, apply_phi_to, LaurentElement};
use crate::module::{map_entries_try, mat_mul, PhiGammaModule};
use crate::snf::Presentation;
use crate::Result;

// ---------------------------------------------------------------- symbolic monoid algebra

/// ℤ-linear combination of normal-form monomials (γ′)^i γ^j φ^k of the
/// monoid generated by γ′, γ, φ modulo γγ′ = (γ′)^a γ with φ central.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GroupWord {
    terms: BTreeMap<(u64, u64, u64), i64>,
}

impl GroupWord {
    pub fn zero() -> GroupWord {
        GroupWord::default()
    }

    pub fn monomial(i: u64, j: u64, k: u64, c: i64) -> GroupWord {
        let mut terms = BTreeMap::new();
        if c != 0 {
            terms.insert((i, j, k), c);
        }
        GroupWord { terms }
    }

    pub fn one() -> GroupWord {
        GroupWord::monomial(0, 0, 0, 1)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &GroupWord) -> GroupWord {
        let mut terms = self.terms.clone();
        for (&m, &c) in &other.terms {
            let e = terms.entry(m).or_insert(0);
            *e += c;
            if *e == 0 {
                terms.remove(&m);
            }
        }
        GroupWord { terms }
    }

    pub fn sub(&self, other: &GroupWord) -> GroupWord {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> GroupWord {
        GroupWord { terms: self.terms.iter().map(|(&m, &c)| (m, -c)).collect() }
    }
}

impl fmt::Display for GroupWord {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(out, "0");
        }
        let mut first = true;
        for (&(i, j, k), &c) in &self.terms {
            if !first {
                write!(out, " + ")?;
            }
            first = false;
            write!(out, "{c}")?;
            if i > 0 {
                write!(out, "·γ′^{i}")?;
            }
            if j > 0 {
                write!(out, "·γ^{j}")?;
            }
            if k > 0 {
                write!(out, "·φ^{k}")?;
            }
        }
        Ok(())
    }
}

/// Multiplication context: the exponent a of the relation γγ′ = (γ′)^a γ.
#[derive(Clone, Copy, Debug)]
pub struct SymbolicAlgebra {
    a: u64,
}

impl SymbolicAlgebra {
    pub fn new(a: u64) -> Result<SymbolicAlgebra> {
        if a == 0 {
            return Err(Error::InvalidParams(
                "the relation exponent must be positive".into(),
            ));
        }
        Ok(SymbolicAlgebra { a })
    }

    /// Normal-form product: γ^j·(γ′)^{i′} = (γ′)^{i′·a^j}·γ^j moves every
    /// primed generator of the right factor past the unprimed ones of the
    /// left.
    pub fn mul(&self, x: &GroupWord, y: &GroupWord) -> GroupWord {
        let mut out = GroupWord::zero();
        for (&(i, j, k), &c) in &x.terms {
            for (&(i2, j2, k2), &c2) in &y.terms {
                let moved = i + i2 * self.a.pow(j as u32);
                out = out.add(&GroupWord::monomial(moved, j + j2, k + k2, c * c2));
            }
        }
        out
    }

    /// δ = Σ_{k<a} (γ′)^k, the transfer element of the relation.
    pub fn delta(&self) -> GroupWord {
        let mut d = GroupWord::zero();
        for k in 0..self.a {
            d = d.add(&GroupWord::monomial(k, 0, 0, 1));
        }
        d
    }
}

fn symbolic_mat_mul(
    alg: &SymbolicAlgebra,
    x: &[Vec<GroupWord>],
    y: &[Vec<GroupWord>],
) -> Vec<Vec<GroupWord>> {
    let rows = x.len();
    let mid = y.len();
    let cols = y[0].len();
    let mut out = vec![vec![GroupWord::zero(); cols]; rows];
    for r in 0..rows {
        for c in 0..cols {
            for m in 0..mid {
                out[r][c] = out[r][c].add(&alg.mul(&x[r][m], &y[m][c]));
            }
        }
    }
    out
}

/// Certify A₁A₀ = 0 and A₂A₁ = 0 in the monoid algebra for the given
/// relation exponent; an error names the first offending entry.
pub fn verify_symbolic_complex(a: u64) -> Result<()> {
    let alg = SymbolicAlgebra::new(a)?;
    let one = GroupWord::one();
    let phi = GroupWord::monomial(0, 0, 1, 1);
    let gam = GroupWord::monomial(0, 1, 0, 1);
    let gp = GroupWord::monomial(1, 0, 0, 1);
    let gpa = GroupWord::monomial(a, 0, 0, 1);
    let zero = GroupWord::zero();
    let delta = alg.delta();

    let a0 = vec![
        vec![phi.sub(&one)],
        vec![gam.sub(&one)],
        vec![gp.sub(&one)],
    ];
    let a1 = vec![
        vec![gam.sub(&one), one.sub(&phi), zero.clone()],
        vec![gp.sub(&one), zero.clone(), one.sub(&phi)],
        vec![zero.clone(), gpa.sub(&one), delta.sub(&gam)],
    ];
    let a2 = vec![vec![gpa.sub(&one), delta.sub(&gam), phi.sub(&one)]];

    for (name, prod) in [
        ("A₁A₀", symbolic_mat_mul(&alg, &a1, &a0)),
        ("A₂A₁", symbolic_mat_mul(&alg, &a2, &a1)),
    ] {
        for (r, row) in prod.iter().enumerate() {
            for (c, e) in row.iter().enumerate() {
                if !e.is_zero() {
                    return Err(Error::InvalidParams(format!(
                        "{name} has nonzero entry ({r},{c}): {e}"
                    )));
                }
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------- numeric modules

/// A Φ-Γ-module together with a matrix G′ for the second generator, which
/// acts linearly over the ring; the group relation becomes
///
///   Γ·γ(G′) = (G′)^a·Γ    and    Φ·φ(G′) = G′·Φ.
pub struct TwoGenModule {
    pub base: PhiGammaModule,
    pub gprime: Vec<Vec<LaurentElement>>,
}

impl TwoGenModule {
    pub fn new(base: PhiGammaModule, gprime: Vec<Vec<LaurentElement>>) -> Result<TwoGenModule> {
        let m = TwoGenModule { base, gprime };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        let d = self.base.rank();
        if self.gprime.len() != d || self.gprime.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidParams(format!(
                "G′ must be {d}×{d} like the module it acts on"
            )));
        }
        let a = self.base.act.a();
        let hi: i64 = 48;
        let torsion = &self.base.torsion;

        let mut gpa = self.gprime.clone();
        for _ in 1..a {
            gpa = mat_mul(&gpa, &self.gprime);
        }
        let lhs_g = mat_mul(
            &self.base.gam,
            &map_entries_try(&self.gprime, |e| apply_gamma_to(e, self.base.act, hi))?,
        );
        let rhs_g = mat_mul(&gpa, &self.base.gam);
        let lhs_p = mat_mul(
            &self.base.phi,
            &map_entries_try(&self.gprime, |e| apply_phi_to(e, hi))?,
        );
        let rhs_p = mat_mul(&self.gprime, &self.base.phi);
        for i in 0..d {
            for j in 0..d {
                if !lhs_g[i][j].agrees_with(&rhs_g[i][j], torsion[i]) {
                    return Err(Error::NotCommuting(format!(
                        "Γ·γ(G′) and (G′)^a·Γ differ at entry ({i},{j})"
                    )));
                }
                if !lhs_p[i][j].agrees_with(&rhs_p[i][j], torsion[i]) {
                    return Err(Error::NotCommuting(format!(
                        "Φ·φ(G′) and G′·Φ differ at entry ({i},{j})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// γ′ on coordinate vectors: a plain matrix action, exact.
    pub fn apply_gamma_prime_vec(&self, x: &[LaurentElement]) -> Vec<LaurentElement> {
        let d = self.base.rank();
        assert_eq!(x.len(), d);
        (0..d)
            .map(|i| {
                let mut acc = LaurentElement::zero(&self.base.params);
                for (j, xj) in x.iter().enumerate() {
                    acc = acc.add(&self.gprime[i][j].mul(xj));
                }
                acc
            })
            .collect()
    }

    fn gamma_prime_power(&self, x: &[LaurentElement], e: u64) -> Vec<LaurentElement> {
        let mut v = x.to_vec();
        for _ in 0..e {
            v = self.apply_gamma_prime_vec(&v);
        }
        v
    }

    /// δ = Σ_{k<a} (γ′)^k on coordinate vectors.
    pub fn apply_delta_vec(&self, x: &[LaurentElement]) -> Vec<LaurentElement> {
        let mut acc = vec![LaurentElement::zero(&self.base.params); x.len()];
        let mut v = x.to_vec();
        for k in 0..self.base.act.a() {
            if k > 0 {
                v = self.apply_gamma_prime_vec(&v);
            }
            acc = add_vec(&acc, &v);
        }
        acc
    }

    /// A₀x = ((φ−1)x, (γ−1)x, (γ′−1)x).
    pub fn d0(&self, x: &[LaurentElement], hi: i64) -> Result<[Vec<LaurentElement>; 3]> {
        let px = self.base.apply_phi_vec(x, hi)?;
        let gx = self.base.apply_gamma_vec(x, hi)?;
        let qx = self.apply_gamma_prime_vec(x);
        Ok([sub_vec(&px, x), sub_vec(&gx, x), sub_vec(&qx, x)])
    }

    /// A₁(u,v,w) = ((γ−1)u − (φ−1)v, (γ′−1)u − (φ−1)w, ((γ′)^a−1)v + (δ−γ)w).
    pub fn d1(
        &self,
        u: &[LaurentElement],
        v: &[LaurentElement],
        w: &[LaurentElement],
        hi: i64,
    ) -> Result<[Vec<LaurentElement>; 3]> {
        let a = self.base.act.a();
        let r1 = sub_vec(
            &sub_vec(&self.base.apply_gamma_vec(u, hi)?, u),
            &sub_vec(&self.base.apply_phi_vec(v, hi)?, v),
        );
        let r2 = sub_vec(
            &sub_vec(&self.apply_gamma_prime_vec(u), u),
            &sub_vec(&self.base.apply_phi_vec(w, hi)?, w),
        );
        let r3 = add_vec(
            &sub_vec(&self.gamma_prime_power(v, a), v),
            &sub_vec(&self.apply_delta_vec(w), &self.base.apply_gamma_vec(w, hi)?),
        );
        Ok([r1, r2, r3])
    }

    /// A₂(u,v,w) = ((γ′)^a−1)u + (δ−γ)v + (φ−1)w.
    pub fn d2(
        &self,
        u: &[LaurentElement],
        v: &[LaurentElement],
        w: &[LaurentElement],
        hi: i64,
    ) -> Result<Vec<LaurentElement>> {
        let a = self.base.act.a();
        let t1 = sub_vec(&self.gamma_prime_power(u, a), u);
        let t2 = sub_vec(&self.apply_delta_vec(v), &self.base.apply_gamma_vec(v, hi)?);
        let t3 = sub_vec(&self.base.apply_phi_vec(w, hi)?, w);
        Ok(add_vec(&add_vec(&t1, &t2), &t3))
    }
}

fn add_vec(x: &[LaurentElement], y: &[LaurentElement]) -> Vec<LaurentElement> {
    x.iter().zip(y).map(|(a, b)| a.add(b)).collect()
}

fn sub_vec(x: &[LaurentElement], y: &[LaurentElement]) -> Vec<LaurentElement> {
    x.iter().zip(y).map(|(a, b)| a.sub(b)).collect()
}

// ---------------------------------------------------------------- degree zero

/// H⁰ of the three-operator complex: the common kernel of φ−1, γ−1, γ′−1,
/// window-stabilized exactly like the two-operator engine.  G′ acts linearly,
/// so the basis rescaling that makes the φ- and γ-weights admissible leaves
/// it untouched; its own weights must already be nonnegative for the
/// filtration to be stable.
pub fn c3_h0(m: &TwoGenModule, opts: &EngineOptions) -> Result<Presentation> {
    m.validate()?;
    let params = &m.base.params;
    let p = params.p();
    let n = params.n();
    let (phi_t, gam_t, _) = twist_matrices(&m.base)?;
    if matrix_weight_low(&m.gprime, &m.base.torsion) < 0 {
        return Err(Error::InvalidParams(
            "G′ has negative weight; the quotient filtration is not stable under it".into(),
        ));
    }
    let s0 = (p as i64 - 1) * (n as i64 - 1) + 1;
    let mut b = opts.window_start.max(8);
    let mut prev: Option<Vec<u32>> = None;
    loop {
        let src = QLayout {
            p,
            n,
            f: params.f(),
            lo: -b,
            s0,
            torsion: m.base.torsion.clone(),
        };
        let ops = vec![
            assemble_operator(&src, &phi_t, RingAct::Phi, params, m.base.act, true)?,
            assemble_operator(&src, &gam_t, RingAct::Gamma, params, m.base.act, true)?,
            assemble_operator(&src, &m.gprime, RingAct::Id, params, m.base.act, true)?,
        ];
        let k = kernel_of_operators(&src, &ops, p, n);
        if prev.as_ref() == Some(&k.orders) {
            return Ok(k);
        }
        if b >= opts.window_max {
            return Err(Error::NoStabilization(format!(
                "three-operator invariants were still moving at window radius {b}"
            )));
        }
        prev = Some(k.orders);
        b *= 2;
    }
}

// ----------------------------------------------------------------
