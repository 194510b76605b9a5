//! Étale Φ-Γ-modules over O = W_n(F_q)((π)): finitely presented modules
//! M = ⊕ₗ (O/p^{nₗ})·eₗ with semilinear actions
//!
//!   φ(Σ xⱼeⱼ) = Σᵢ (Σⱼ Φᵢⱼ·φ(xⱼ)) eᵢ ,   γ likewise through Γᵢⱼ ,
//!
//! subject to: Φ and Γ invertible over O (étale; equivalently invertible
//! mod p, since an element of O is a unit iff its reduction in F_q((π)) is
//! nonzero), the commutation Φ·φ(Γ) = Γ·γ(Φ), and torsion compatibility
//! v_p(Φᵢⱼ) ≥ nᵢ − nⱼ so that columns respect the coordinate annihilators.
//!
//! The builtin constructors cover the standard one-dimensional twists, the
//! tensor product, direct sums, and the dual Hom(M, Ω) into the
//! differential-form twist Ω (the module of dπ with the φ-action divided by
//! p, which is what makes the residue pairing work downstream).

use std::sync::Arc;

use crate::coeff::{CoeffElement, RingParams};
use crate::error::Error;
use crate::laurent::{
    apply_gamma_to, apply_phi_to, one_plus_pi_pow, series_invert_to, ActionParams, LaurentElement,
};
use crate::Result;

/// Default guaranteed precision of constructed twist entries: generous
/// enough for the cohomology engine at its largest window.
pub fn default_entry_prec(params: &RingParams) -> i64 {
    params.p() as i64 * 256 + 128
}

/// How far validation pushes the commutation check when entries are exact.
const VALIDATE_PREC: i64 = 48;

// ---------------------------------------------------------------- the module

#[derive(Clone, Debug)]
pub struct PhiGammaModule {
    pub params: Arc<RingParams>,
    pub act: ActionParams,
    /// Annihilator exponents: eₗ is killed by p^{torsion[l]}.
    pub torsion: Vec<u32>,
    /// φ matrix, `phi[i][j]` the eᵢ-component of φ(eⱼ).
    pub phi: Vec<Vec<LaurentElement>>,
    /// γ matrix.
    pub gam: Vec<Vec<LaurentElement>>,
}

impl PhiGammaModule {
    pub fn rank(&self) -> usize {
        self.torsion.len()
    }

    pub fn new(
        params: &Arc<RingParams>,
        act: ActionParams,
        torsion: Vec<u32>,
        phi: Vec<Vec<LaurentElement>>,
        gam: Vec<Vec<LaurentElement>>,
    ) -> Result<PhiGammaModule> {
        let m = PhiGammaModule { params: params.clone(), act, torsion, phi, gam };
        m.validate()?;
        Ok(m)
    }

    /// Check every module axiom that is visible on the given entry windows.
    pub fn validate(&self) -> Result<()> {
        let d = self.rank();
        if d == 0 {
            return Err(Error::InvalidParams("the module must have positive rank".into()));
        }
        if self.torsion.len() != d
            || self.phi.len() != d
            || self.gam.len() != d
            || self.phi.iter().any(|r| r.len() != d)
            || self.gam.iter().any(|r| r.len() != d)
        {
            return Err(Error::InvalidParams("matrix shapes must match the rank".into()));
        }
        for &t in &self.torsion {
            if t == 0 || t > self.params.n() {
                return Err(Error::InvalidParams(format!(
                    "coordinate torsion p^{t} must divide the ring torsion p^{}",
                    self.params.n()
                )));
            }
        }

        // torsion compatibility of both matrices
        for (name, mat) in [("φ", &self.phi), ("γ", &self.gam)] {
            for i in 0..d {
                for j in 0..d {
                    let need = self.torsion[i].saturating_sub(self.torsion[j]);
                    if need == 0 {
                        continue;
                    }
                    let e = &mat[i][j];
                    if e.reduce_mod_pk(self.torsion[i]).div_exact_p(need).is_err() {
                        return Err(Error::TorsionMismatch(format!(
                            "{name} entry ({i},{j}) maps p^{}-torsion into p^{}-torsion \
                             but is not divisible by p^{need}",
                            self.torsion[j], self.torsion[i]
                        )));
                    }
                }
            }
        }

        // étale: both matrices invertible mod p
        let dphi = det(&map_entries(&self.phi, |e| e.reduce_mod_pk(1)));
        if !dphi.is_visibly_unit() {
            return Err(Error::NotEtale("det Φ vanishes mod p".into()));
        }
        let dgam = det(&map_entries(&self.gam, |e| e.reduce_mod_pk(1)));
        if !dgam.is_visibly_unit() {
            return Err(Error::InvalidParams("det Γ vanishes mod p: γ is not invertible".into()));
        }

        // commutation Φ·φ(Γ) = Γ·γ(Φ), compared entrywise mod the target
        // torsion on whatever window both sides guarantee
        let hi = VALIDATE_PREC;
        let phi_of_gam = map_entries_try(&self.gam, |e| apply_phi_to(e, hi))?;
        let gam_of_phi = map_entries_try(&self.phi, |e| apply_gamma_to(e, self.act, hi))?;
        let lhs = mat_mul(&self.phi, &phi_of_gam);
        let rhs = mat_mul(&self.gam, &gam_of_phi);
        for i in 0..d {
            for j in 0..d {
                if !lhs[i][j].agrees_with(&rhs[i][j], self.torsion[i]) {
                    return Err(Error::NotCommuting(format!(
                        "Φ·φ(Γ) and Γ·γ(Φ) differ at entry ({i},{j})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// φ on coordinate vectors, guaranteed through π^hi.
    pub fn apply_phi_vec(&self, x: &[LaurentElement], hi: i64) -> Result<Vec<LaurentElement>> {
        self.apply_semilinear(x, hi, true)
    }

    /// γ on coordinate vectors.
    pub fn apply_gamma_vec(&self, x: &[LaurentElement], hi: i64) -> Result<Vec<LaurentElement>> {
        self.apply_semilinear(x, hi, false)
    }

    fn apply_semilinear(
        &self,
        x: &[LaurentElement],
        hi: i64,
        use_phi: bool,
    ) -> Result<Vec<LaurentElement>> {
        let d = self.rank();
        assert_eq!(x.len(), d);
        let mat = if use_phi { &self.phi } else { &self.gam };
        let lo_min = mat
            .iter()
            .flatten()
            .filter_map(|e| e.lo())
            .min()
            .unwrap_or(0)
            .min(0);
        let target = hi - lo_min;
        let images: Vec<LaurentElement> = x
            .iter()
            .map(|xi| {
                if use_phi {
                    apply_phi_to(xi, target)
                } else {
                    apply_gamma_to(xi, self.act, target)
                }
            })
            .collect::<Result<_>>()?;
        Ok((0..d)
            .map(|i| {
                let mut acc = LaurentElement::zero(&self.params);
                for (j, img) in images.iter().enumerate() {
                    acc = acc.add(&mat[i][j].mul(img));
                }
                acc.truncated(hi)
            })
            .collect())
    }

    // ------------------------------------------------------------ constructors

    /// The unit object: rank 1, Φ = Γ = (1).
    pub fn trivial(params: &Arc<RingParams>, act: ActionParams) -> PhiGammaModule {
        let one = LaurentElement::one(params);
        PhiGammaModule {
            params: params.clone(),
            act,
            torsion: vec![params.n()],
            phi: vec![vec![one.clone()]],
            gam: vec![vec![one]],
        }
    }

    /// The differential-form twist Ω (the realization of the torsion module
    /// of p-power roots of unity): e ↔ dπ with the φ-action divided by p,
    ///
    ///   Φ = (1+π)^{p−1},   Γ = a·(1+π)^{a−1}.
    pub fn omega(params: &Arc<RingParams>, act: ActionParams) -> PhiGammaModule {
        Self::cyclotomic_twist(params, act, 1, None).expect("the twist by 1 is exact")
    }

    /// The m-th cyclotomic twist: Φ = (1+π)^{m(p−1)}, Γ = a^m·(1+π)^{m(a−1)}.
    /// Negative m inverts the series, guaranteed through `prec`
    /// (`default_entry_prec` when omitted).
    pub fn cyclotomic_twist(
        params: &Arc<RingParams>,
        act: ActionParams,
        m: i64,
        prec: Option<i64>,
    ) -> Result<PhiGammaModule> {
        let prec = prec.unwrap_or_else(|| default_entry_prec(params));
        let p = params.p();
        let a = act.a();
        let pow = |base_exp: i64| -> Result<LaurentElement> {
            if base_exp >= 0 {
                Ok(one_plus_pi_pow(params, base_exp as u64))
            } else {
                series_invert_to(&one_plus_pi_pow(params, (-base_exp) as u64), prec)
            }
        };
        let phi_mult = pow(m * (p as i64 - 1))?;
        let a_pow = if m >= 0 {
            CoeffElement::from_residue(params, a).pow(m as u64)
        } else {
            crate::coeff::coeff_invert(&CoeffElement::from_residue(params, a))?.pow((-m) as u64)
        };
        let gam_mult = pow(m * (a as i64 - 1))?.scale(&a_pow);
        PhiGammaModule::new(
            params,
            act,
            vec![params.n()],
            vec![vec![phi_mult]],
            vec![vec![gam_mult]],
        )
    }

    /// The unramified twist: Φ = (c), Γ = (1), for a unit constant c.
    pub fn unramified_twist(
        params: &Arc<RingParams>,
        act: ActionParams,
        c: u64,
    ) -> Result<PhiGammaModule> {
        PhiGammaModule::new(
            params,
            act,
            vec![params.n()],
            vec![vec![LaurentElement::constant(CoeffElement::from_residue(params, c))]],
            vec![vec![LaurentElement::one(params)]],
        )
    }

    /// M ⊗ N with basis eᵢ⊗fⱼ ordered lexicographically; coordinate torsion
    /// min(nᵢ, nⱼ) and Kronecker-product matrices.
    pub fn tensor(&self, other: &PhiGammaModule) -> Result<PhiGammaModule> {
        assert_eq!(self.params, other.params, "mixed ring parameters");
        assert_eq!(self.act, other.act, "mixed Γ-generators");
        let torsion: Vec<u32> = self
            .torsion
            .iter()
            .flat_map(|&a| other.torsion.iter().map(move |&b| a.min(b)))
            .collect();
        PhiGammaModule::new(
            &self.params,
            self.act,
            torsion,
            kronecker(&self.phi, &other.phi),
            kronecker(&self.gam, &other.gam),
        )
    }

    /// M ⊕ N with block-diagonal matrices.
    pub fn direct_sum(&self, other: &PhiGammaModule) -> Result<PhiGammaModule> {
        assert_eq!(self.params, other.params);
        assert_eq!(self.act, other.act);
        let da = self.rank();
        let db = other.rank();
        let zero = LaurentElement::zero(&self.params);
        let block = |a: &Vec<Vec<LaurentElement>>, b: &Vec<Vec<LaurentElement>>| {
            let mut m = vec![vec![zero.clone(); da + db]; da + db];
            for i in 0..da {
                for j in 0..da {
                    m[i][j] = a[i][j].clone();
                }
            }
            for i in 0..db {
                for j in 0..db {
                    m[da + i][da + j] = b[i][j].clone();
                }
            }
            m
        };
        let mut torsion = self.torsion.clone();
        torsion.extend_from_slice(&other.torsion);
        PhiGammaModule::new(
            &self.params,
            self.act,
            torsion,
            block(&self.phi, &other.phi),
            block(&self.gam, &other.gam),
        )
    }

    /// The dual M̃ = Hom(M, Ω) on the dual basis: same torsion, and
    ///
    ///   Φ̃ₗₖ = u·p^{nₗ−nₖ}·(Φ⁻¹)ₖₗ ,   Γ̃ with v in place of u,
    ///
    /// where u, v are the Ω multipliers.  The p-power is a genuine division
    /// when nₗ < nₖ; failure of exactness would mean M was not well formed.
    pub fn hom_dual(&self, prec: Option<i64>) -> Result<PhiGammaModule> {
        let prec = prec.unwrap_or_else(|| default_entry_prec(&self.params));
        let omega = Self::omega(&self.params, self.act);
        let u = &omega.phi[0][0];
        let v = &omega.gam[0][0];
        let d = self.rank();
        let phi_inv = invert_matrix(&self.phi, prec)?;
        let gam_inv = invert_matrix(&self.gam, prec)?;
        let twist = |inv: &Vec<Vec<LaurentElement>>, mult: &LaurentElement| -> Result<Vec<Vec<LaurentElement>>> {
            let mut out = vec![vec![LaurentElement::zero(&self.params); d]; d];
            for l in 0..d {
                for k in 0..d {
                    let base = inv[k][l].mul(mult);
                    let nl = self.torsion[l] as i64;
                    let nk = self.torsion[k] as i64;
                    out[l][k] = if nl >= nk {
                        base.scale(&CoeffElement::from_residue(
                            &self.params,
                            self.params.p(),
                        ).pow((nl - nk) as u64))
                    } else {
                        base.reduce_mod_pk(self.torsion[k]).div_exact_p((nk - nl) as u32)?
                    };
                }
            }
            Ok(out)
        };
        PhiGammaModule::new(
            &self.params,
            self.act,
            self.torsion.clone(),
            twist(&phi_inv, u)?,
            twist(&gam_inv, v)?,
        )
    }
}

// ---------------------------------------------------------------- matrix helpers

pub(crate) fn map_entries(
    m: &[Vec<LaurentElement>],
    f: impl Fn(&LaurentElement) -> LaurentElement,
) -> Vec<Vec<LaurentElement>> {
    m.iter().map(|row| row.iter().map(&f).collect()).collect()
}

pub(crate) fn map_entries_try(
    m: &[Vec<LaurentElement>],
    f: impl Fn(&LaurentElement) -> Result<LaurentElement>,
) -> Result<Vec<Vec<LaurentElement>>> {
    m.iter().map(|row| row.iter().map(&f).collect()).collect()
}

pub(crate) fn mat_mul(
    a: &[Vec<LaurentElement>],
    b: &[Vec<LaurentElement>],
) -> Vec<Vec<LaurentElement>> {
    let n = a.len();
    let k = b.len();
    let m = b[0].len();
    let params = a[0][0].params().clone();
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| {
                    let mut acc = LaurentElement::zero(&params);
                    for t in 0..k {
                        acc = acc.add(&a[i][t].mul(&b[t][j]));
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

/// Determinant by cofactor expansion (ranks here are small).
pub(crate) fn det(m: &[Vec<LaurentElement>]) -> LaurentElement {
    let d = m.len();
    let params = m[0][0].params().clone();
    if d == 1 {
        return m[0][0].clone();
    }
    let mut acc = LaurentElement::zero(&params);
    for j in 0..d {
        if m[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<LaurentElement>> = (1..d)
            .map(|i| {
                (0..d)
                    .filter(|&c| c != j)
                    .map(|c| m[i][c].clone())
                    .collect()
            })
            .collect();
        let term = m[0][j].mul(&det(&minor));
        acc = if j % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
    }
    acc
}

/// Inverse by the adjugate, guaranteed through π^prec.
pub(crate) fn invert_matrix(
    m: &[Vec<LaurentElement>],
    prec: i64,
) -> Result<Vec<Vec<LaurentElement>>> {
    let d = m.len();
    let dm = det(m);
    let dinv = series_invert_to(&dm, prec)?;
    if d == 1 {
        return Ok(vec![vec![dinv]]);
    }
    let mut out = vec![Vec::with_capacity(d); d];
    for i in 0..d {
        for j in 0..d {
            // adjugate: (−1)^{i+j}·minor with rows/cols j/i removed
            let minor: Vec<Vec<LaurentElement>> = (0..d)
                .filter(|&r| r != j)
                .map(|r| {
                    (0..d)
                        .filter(|&c| c != i)
                        .map(|c| m[r][c].clone())
                        .collect()
                })
                .collect();
            let mut cof = det(&minor).mul(&dinv);
            if (i + j) % 2 == 1 {
                cof = cof.neg();
            }
            out[i].push(cof.truncated(prec));
        }
    }
    Ok(out)
}

pub(crate) fn kronecker(
    a: &[Vec<LaurentElement>],
    b: &[Vec<LaurentElement>],
) -> Vec<Vec<LaurentElement>> {
    let da = a.len();
    let db = b.len();
    let mut out = vec![Vec::with_capacity(da * db); da * db];
    for i in 0..da {
        for bi in 0..db {
            for j in 0..da {
                for bj in 0..db {
                    out[i * db + bi].push(a[i][j].mul(&b[bi][bj]));
                }
            }
        }
    }
    out
}

// ----------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(p: u64, n: u32) -> (Arc<RingParams>, ActionParams) {
        let params = RingParams::new(p, n, 1, None).unwrap();
        let act = ActionParams::new(2, p).unwrap();
        (params, act)
    }

    #[test]
    fn builtin_modules_validate() {
        for (p, n) in [(3u64, 1u32), (3, 2), (5, 2)] {
            let (params, act) = setup(p, n);
            PhiGammaModule::trivial(&params, act).validate().unwrap();
            PhiGammaModule::omega(&params, act).validate().unwrap();
            PhiGammaModule::cyclotomic_twist(&params, act, -1, Some(64)).unwrap();
            PhiGammaModule::cyclotomic_twist(&params, act, 2, None).unwrap();
            PhiGammaModule::unramified_twist(&params, act, 2).unwrap();
        }
    }

    #[test]
    fn omega_entries_are_the_stated_multipliers() {
        let (params, act) = setup(3, 2);
        let w = PhiGammaModule::omega(&params, act);
        assert_eq!(w.phi[0][0], one_plus_pi_pow(&params, 2), "Φ_Ω = (1+π)²  for p = 3");
        let expected = one_plus_pi_pow(&params, 1).scale_int(2);
        assert_eq!(w.gam[0][0], expected, "Γ_Ω = 2(1+π) for a = 2");
    }

    #[test]
    fn rejects_non_etale() {
        let (params, act) = setup(3, 2);
        let r = PhiGammaModule::new(
            &params,
            act,
            vec![2],
            vec![vec![LaurentElement::from_int_terms(&params, &[(0, 3)])]],
            vec![vec![LaurentElement::one(&params)]],
        );
        assert!(matches!(r, Err(Error::NotEtale(_))), "Φ = (3) dies mod 3");

        // Φ = (π) is étale: π is invertible in the Laurent ring
        let r = PhiGammaModule::new(
            &params,
            act,
            vec![2],
            vec![vec![LaurentElement::pi_pow(&params, 1)]],
            vec![vec![LaurentElement::one(&params)]],
        );
        assert!(matches!(r, Err(Error::NotCommuting(_))), "π-twist of φ alone breaks φγ = γφ");
    }

    #[test]
    fn rejects_non_commuting() {
        let (params, act) = setup(3, 2);
        let r = PhiGammaModule::new(
            &params,
            act,
            vec![2],
            vec![vec![LaurentElement::one(&params)]],
            vec![vec![LaurentElement::from_int_terms(&params, &[(0, 1), (1, 1)])]],
        );
        assert!(matches!(r, Err(Error::NotCommuting(_))), "Γ = (1+π) does not commute with Φ = 1");
    }

    #[test]
    fn torsion_compatibility() {
        let (params, act) = setup(3, 2);
        let one = LaurentElement::one(&params);
        let zero = LaurentElement::zero(&params);
        let three = LaurentElement::from_int_terms(&params, &[(0, 3)]);
        // entry (0,1) maps a p-torsion generator into a p²-torsion coordinate
        let bad = PhiGammaModule::new(
            &params,
            act,
            vec![2, 1],
            vec![vec![one.clone(), one.clone()], vec![zero.clone(), one.clone()]],
            vec![vec![one.clone(), zero.clone()], vec![zero.clone(), one.clone()]],
        );
        assert!(matches!(bad, Err(Error::TorsionMismatch(_))));

        let good = PhiGammaModule::new(
            &params,
            act,
            vec![2, 1],
            vec![vec![one.clone(), three], vec![zero.clone(), one.clone()]],
            vec![vec![one.clone(), zero.clone()], vec![zero, one]],
        );
        assert!(good.is_ok(), "{:?}", good.err());
    }

    #[test]
    fn tensor_with_the_unit_is_identity_on_matrices() {
        let (params, act) = setup(5, 2);
        let t = PhiGammaModule::trivial(&params, act);
        let w = PhiGammaModule::omega(&params, act);
        let tw = t.tensor(&w).unwrap();
        assert_eq!(tw.rank(), 1);
        assert_eq!(tw.phi[0][0], w.phi[0][0]);
        assert_eq!(tw.gam[0][0], w.gam[0][0]);
    }

    #[test]
    fn tensor_torsion_is_the_minimum() {
        let (params, act) = setup(3, 2);
        let one = LaurentElement::one(&params);
        let m1 = PhiGammaModule::new(
            &params,
            act,
            vec![1],
            vec![vec![one.clone()]],
            vec![vec![one.clone()]],
        )
        .unwrap();
        let m2 = PhiGammaModule::trivial(&params, act);
        let t = m1.tensor(&m2).unwrap();
        assert_eq!(t.torsion, vec![1]);
        let s = m2.direct_sum(&m1).unwrap();
        assert_eq!(s.torsion, vec![2, 1]);
        assert_eq!(s.rank(), 2);
    }

    #[test]
    fn dual_of_omega_is_trivial() {
        let (params, act) = setup(3, 2);
        let w = PhiGammaModule::omega(&params, act);
        let dual = w.hom_dual(Some(48)).unwrap();
        assert!(
            dual.phi[0][0].agrees_with(&LaurentElement::one(&params), 2),
            "Hom(Ω, Ω) has Φ = 1, got {:?}",
            dual.phi[0][0]
        );
        assert!(dual.gam[0][0].agrees_with(&LaurentElement::one(&params), 2));
    }

    #[test]
    fn dual_of_trivial_is_omega() {
        let (params, act) = setup(5, 1);
        let t = PhiGammaModule::trivial(&params, act);
        let dual = t.hom_dual(Some(48)).unwrap();
        let w = PhiGammaModule::omega(&params, act);
        assert!(dual.phi[0][0].agrees_with(&w.phi[0][0], 1));
        assert!(dual.gam[0][0].agrees_with(&w.gam[0][0], 1));
    }

    #[test]
    fn double_dual_recovers_the_matrices() {
        let (params, act) = setup(3, 2);
        let one = LaurentElement::one(&params);
        let zero = LaurentElement::zero(&params);
        let swap = PhiGammaModule::new(
            &params,
            act,
            vec![2, 2],
            vec![vec![zero.clone(), one.clone()], vec![one.clone(), zero.clone()]],
            vec![vec![one.clone(), zero.clone()], vec![zero, one]],
        )
        .unwrap();
        let dd = swap.hom_dual(Some(64)).unwrap().hom_dual(Some(48)).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!(
                    dd.phi[i][j].agrees_with(&swap.phi[i][j], 2),
                    "double dual returns Φ at ({i},{j})"
                );
                assert!(dd.gam[i][j].agrees_with(&swap.gam[i][j], 2));
            }
        }
    }

    #[test]
    fn matrix_inverse_known_value() {
        let (params, _) = setup(3, 2);
        let one = LaurentElement::one(&params);
        let pi = LaurentElement::pi_pow(&params, 1);
        let m = vec![vec![one.clone(), pi], vec![LaurentElement::zero(&params), one.clone()]];
        let inv = invert_matrix(&m, 16).unwrap();
        let prod = mat_mul(&m, &inv);
        assert!(prod[0][0].agrees_with(&one, 2));
        assert!(prod[0][1].agrees_with(&LaurentElement::zero(&params), 2));
        assert!(prod[1][0].agrees_with(&LaurentElement::zero(&params), 2));
        assert!(prod[1][1].agrees_with(&one, 2));
    }

    #[test]
    fn semilinear_application_known_value() {
        // on Ω over p=3: φ(π·e) = φ(π)·(1+π)²·e
        let (params, act) = setup(3, 2);
        let w = PhiGammaModule::omega(&params, act);
        let x = vec![LaurentElement::pi_pow(&params, 1)];
        let y = w.apply_phi_vec(&x, 12).unwrap();
        let expect = crate::laurent::phi_pi(&params).mul(&one_plus_pi_pow(&params, 2));
        assert!(y[0].agrees_with(&expect, 2), "got {:?}", y[0]);
    }
}
