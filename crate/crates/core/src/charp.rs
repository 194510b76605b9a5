//! The residue-characteristic story: finite fields F_q and étale Φ-modules
//! over them, with H⁰ and H¹ of the one-row complex x ↦ φ(x) − x computed by
//! plain F_p-linear algebra.
//!
//! Unlike the mixed-characteristic coefficient rings (which insist on p odd),
//! everything here works for p = 2 as well: the Artin–Schreier picture
//! E = F_q((π)), φ = (x ↦ x^p)·Φ needs no cyclotomic character.
//!
//! The map x ↦ Φσ(x) − x is only F_p-linear (σ is the q-power Frobenius on
//! coefficients... here the p-power map on F_q), so cohomology is computed on
//! the underlying F_p-space of dimension d·f.  For a d×d invertible Φ the
//! matrix is square, so dim H⁰ = dim H¹ always; H^i = 0 for i ≥ 2.

use std::fmt;
use std::sync::Arc;

use crate::coeff;
use crate::error::Error;
use crate::snf::{self, Mat};
use crate::Result;

// ---------------------------------------------------------------- the field

/// F_q = F_p[g]/(m(g)), q = p^f.  p = 2 is allowed here.
#[derive(Debug, PartialEq, Eq)]
pub struct FqParams {
    p: u64,
    f: usize,
    minpoly: Vec<u64>,
}

impl FqParams {
    pub fn new(p: u64, f: usize, minpoly: Option<Vec<u64>>) -> Result<Arc<FqParams>> {
        if !coeff::is_prime_u64(p) {
            return Err(Error::InvalidParams(format!("{p} is not prime")));
        }
        if f == 0 {
            return Err(Error::InvalidParams("f must be positive".into()));
        }
        let minpoly = match minpoly {
            None if f == 1 => vec![0, 1],
            None => {
                return Err(Error::InvalidParams(
                    "a defining polynomial is required for f > 1".into(),
                ))
            }
            Some(mut m) => {
                if m.len() != f + 1 {
                    return Err(Error::InvalidParams(format!(
                        "defining polynomial must have degree f = {f}"
                    )));
                }
                for c in m.iter_mut() {
                    *c %= p;
                }
                if m[f] != 1 {
                    return Err(Error::InvalidParams("defining polynomial must be monic".into()));
                }
                if f > 1 && !coeff::is_irreducible_mod_p(&m, p) {
                    return Err(Error::InvalidParams(
                        "defining polynomial is reducible mod p".into(),
                    ));
                }
                m
            }
        };
        Ok(Arc::new(FqParams { p, f, minpoly }))
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn f(&self) -> usize {
        self.f
    }

    pub fn q(&self) -> u64 {
        self.p.pow(self.f as u32)
    }

    pub fn minpoly(&self) -> &[u64] {
        &self.minpoly
    }
}

/// An element of F_q as a polynomial in g of degree < f.
#[derive(Clone, PartialEq, Eq)]
pub struct FqElement {
    params: Arc<FqParams>,
    c: Vec<u64>,
}

impl fmt::Debug for FqElement {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .c
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, &v)| v != 0)
            .map(|(k, &v)| match (k, v) {
                (0, v) => format!("{v}"),
                (1, 1) => "g".into(),
                (1, v) => format!("{v}*g"),
                (k, 1) => format!("g^{k}"),
                (k, v) => format!("{v}*g^{k}"),
            })
            .collect();
        if parts.is_empty() {
            write!(fm, "0")
        } else {
            write!(fm, "{}", parts.join("+"))
        }
    }
}

impl FqElement {
    pub fn zero(params: &Arc<FqParams>) -> Self {
        FqElement { params: params.clone(), c: vec![0; params.f] }
    }

    pub fn one(params: &Arc<FqParams>) -> Self {
        Self::from_residue(params, 1)
    }

    pub fn gen(params: &Arc<FqParams>) -> Self {
        let mut c = vec![0; params.f];
        if params.f > 1 {
            c[1] = 1;
        } else {
            // g plays no role over the prime field; map it to 0
        }
        FqElement { params: params.clone(), c }
    }

    pub fn from_residue(params: &Arc<FqParams>, v: u64) -> Self {
        let mut c = vec![0; params.f];
        c[0] = v % params.p;
        FqElement { params: params.clone(), c }
    }

    pub fn from_coeffs(params: &Arc<FqParams>, coeffs: &[u64]) -> Self {
        assert!(coeffs.len() <= params.f);
        let mut c = vec![0; params.f];
        for (i, &v) in coeffs.iter().enumerate() {
            c[i] = v % params.p;
        }
        FqElement { params: params.clone(), c }
    }

    pub fn params(&self) -> &Arc<FqParams> {
        &self.params
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|&v| v == 0)
    }

    pub fn add(&self, other: &Self) -> Self {
        let p = self.params.p;
        let c = self.c.iter().zip(&other.c).map(|(&a, &b)| (a + b) % p).collect();
        FqElement { params: self.params.clone(), c }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let p = self.params.p;
        let c = self.c.iter().zip(&other.c).map(|(&a, &b)| (a + p - b) % p).collect();
        FqElement { params: self.params.clone(), c }
    }

    pub fn neg(&self) -> Self {
        Self::zero(&self.params).sub(self)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let c = coeff::poly_mul_mod(&self.c, &other.c, &self.params.minpoly, self.params.p);
        FqElement { params: self.params.clone(), c }
    }

    pub fn pow(&self, e: u64) -> Self {
        let c = coeff::poly_pow_mod(&self.c, e, &self.params.minpoly, self.params.p);
        FqElement { params: self.params.clone(), c }
    }

    pub fn inverse(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::NotAUnit("0 has no inverse in F_q".into()));
        }
        Ok(self.pow(self.params.q() - 2))
    }

    /// The p-power Frobenius x ↦ x^p (the absolute one, generating
    /// Gal(F_q/F_p)).
    pub fn frobenius(&self) -> Self {
        self.pow(self.params.p)
    }
}

// ---------------------------------------------------------------- Φ-modules

/// A free module over F_q with a semilinear φ given on the basis by an
/// invertible matrix: φ(Σ xⱼeⱼ) = Σᵢ (Σⱼ Φᵢⱼ σ(xⱼ)) eᵢ.
pub struct PhiModuleCharP {
    pub params: Arc<FqParams>,
    pub d: usize,
    /// Row i, column j.
    pub phi: Vec<Vec<FqElement>>,
}

impl PhiModuleCharP {
    pub fn new(params: &Arc<FqParams>, phi: Vec<Vec<FqElement>>) -> Result<PhiModuleCharP> {
        let d = phi.len();
        if d == 0 || phi.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidParams("phi must be a nonempty square matrix".into()));
        }
        let m = PhiModuleCharP { params: params.clone(), d, phi };
        if !m.phi_invertible() {
            return Err(Error::NotEtale("the matrix of φ is singular over F_q".into()));
        }
        Ok(m)
    }

    /// Invertibility over the field, by checking the F_p-linear rank of
    /// multiplication... more directly, by eliminating over F_q.
    fn phi_invertible(&self) -> bool {
        let mut m: Vec<Vec<FqElement>> = self.phi.clone();
        let d = self.d;
        for t in 0..d {
            let Some(pr) = (t..d).find(|&i| !m[i][t].is_zero()) else {
                return false;
            };
            m.swap(t, pr);
            let inv = m[t][t].inverse().expect("pivot is nonzero");
            for i in t + 1..d {
                if m[i][t].is_zero() {
                    continue;
                }
                let fac = m[i][t].mul(&inv);
                for j in t..d {
                    let s = fac.mul(&m[t][j]);
                    m[i][j] = m[i][j].sub(&s);
                }
            }
        }
        true
    }

    /// φ applied to a coordinate vector.
    pub fn apply_phi(&self, x: &[FqElement]) -> Vec<FqElement> {
        assert_eq!(x.len(), self.d);
        (0..self.d)
            .map(|i| {
                let mut s = FqElement::zero(&self.params);
                for j in 0..self.d {
                    s = s.add(&self.phi[i][j].mul(&x[j].frobenius()));
                }
                s
            })
            .collect()
    }
}

// ---------------------------------------------------------------- cohomology

/// H⁰ and H¹ of [M --(φ−1)--> M] as F_p-spaces: dimensions, a basis of the
/// kernel, and representatives spanning the cokernel.  H^i = 0 for i ≥ 2.
pub struct CharPCohomology {
    pub h0_dim: usize,
    pub h1_dim: usize,
    pub h0_basis: Vec<Vec<FqElement>>,
    pub h1_reps: Vec<Vec<FqElement>>,
}

/// Flatten a coordinate vector to the underlying F_p-space (basis g^t·eⱼ).
fn flatten(x: &[FqElement], f: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(x.len() * f);
    for e in x {
        out.extend_from_slice(e.coeffs());
    }
    out
}

fn unflatten(params: &Arc<FqParams>, v: &[u64], d: usize) -> Vec<FqElement> {
    let f = params.f();
    (0..d).map(|j| FqElement::from_coeffs(params, &v[j * f..(j + 1) * f])).collect()
}

/// Cohomology of the slope-zero complex over F_q((π))... restricted to the
/// unramified story: the fixed points and cofixed points of φ−1 on M itself.
pub fn c1_cohomology_finite_field(m: &PhiModuleCharP) -> CharPCohomology {
    let p = m.params.p();
    let f = m.params.f();
    let dim = m.d * f;

    // matrix of x ↦ φ(x) − x in the flat basis
    let mut a = Mat::zeros(dim, dim);
    for j in 0..m.d {
        for t in 0..f {
            let mut basis = vec![FqElement::zero(&m.params); m.d];
            let mut c = vec![0u64; f];
            c[t] = 1;
            basis[j] = FqElement::from_coeffs(&m.params, &c);
            let img = m.apply_phi(&basis);
            let flat_in = flatten(&basis, f);
            let flat_img = flatten(&img, f);
            let col = j * f + t;
            for row in 0..dim {
                let v = (flat_img[row] + p - flat_in[row]) % p;
                a.set(row, col, v);
            }
        }
    }

    let h0_basis: Vec<Vec<FqElement>> = snf::kernel_generators(&a, p, 1)
        .into_iter()
        .map(|(g, _)| unflatten(&m.params, &g, m.d))
        .collect();
    let coker = snf::subquotient(&Mat::identity(dim), &a, p, 1);
    let h1_reps: Vec<Vec<FqElement>> = (0..coker.gens.cols)
        .map(|j| unflatten(&m.params, &coker.gens.col(j), m.d))
        .collect();

    CharPCohomology {
        h0_dim: h0_basis.len(),
        h1_dim: h1_reps.len(),
        h0_basis,
        h1_reps,
    }
}

/// Kill the H¹ class of `target` by enlarging the module: N = M ⊕ F_q·e with
/// φ(e) = e + target.  Inside N the class becomes (φ−1)e.  Returns N together
/// with the solving element.
pub fn efface_h1_char_p(
    m: &PhiModuleCharP,
    target: &[FqElement],
) -> Result<(PhiModuleCharP, Vec<FqElement>)> {
    if target.len() != m.d {
        return Err(Error::InvalidParams("target must be a coordinate vector of M".into()));
    }
    let d = m.d;
    let mut phi = vec![vec![FqElement::zero(&m.params); d + 1]; d + 1];
    for i in 0..d {
        for j in 0..d {
            phi[i][j] = m.phi[i][j].clone();
        }
        phi[i][d] = target[i].clone();
    }
    phi[d][d] = FqElement::one(&m.params);
    let n = PhiModuleCharP::new(&m.params, phi)?;
    let mut solver = vec![FqElement::zero(&m.params); d + 1];
    solver[d] = FqElement::one(&m.params);
    Ok((n, solver))
}

// ----------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;

    fn f4() -> Arc<FqParams> {
        // F₄ = F₂[g]/(g² + g + 1)
        FqParams::new(2, 2, Some(vec![1, 1, 1])).unwrap()
    }

    #[test]
    fn field_arithmetic_in_f4() {
        let f = f4();
        let g = FqElement::gen(&f);
        let g2 = g.mul(&g);
        assert_eq!(g2, g.add(&FqElement::one(&f)), "g² = g + 1 in F₄");
        assert_eq!(g.pow(3), FqElement::one(&f), "g has order 3");
        assert_eq!(g.inverse().unwrap(), g2, "g⁻¹ = g² = g + 1");
        assert_eq!(g.frobenius(), g2, "Frobenius squares in characteristic 2");
    }

    #[test]
    fn rejects_bad_fields() {
        assert!(FqParams::new(4, 1, None).is_err(), "4 is not prime");
        assert!(FqParams::new(2, 2, Some(vec![0, 0, 1])).is_err(), "g² is reducible");
        assert!(FqParams::new(2, 2, None).is_err(), "f > 1 needs a defining polynomial");
        assert!(FqParams::new(2, 1, None).is_ok(), "p = 2 is fine in characteristic p");
    }

    #[test]
    fn trivial_module_over_f2_has_dims_1_1() {
        // E = F₂: φ = x ↦ x², which is the identity on F₂; φ − 1 = 0
        let f2 = FqParams::new(2, 1, None).unwrap();
        let m = PhiModuleCharP::new(&f2, vec![vec![FqElement::one(&f2)]]).unwrap();
        let c = c1_cohomology_finite_field(&m);
        assert_eq!((c.h0_dim, c.h1_dim), (1, 1), "F₂ with trivial φ: both dims 1");
    }

    #[test]
    fn twisted_module_over_f4_known_kernel() {
        // φ(x) = g·x² on F₄: kernel of φ−1 is {0, g+1}
        let f = f4();
        let g = FqElement::gen(&f);
        let m = PhiModuleCharP::new(&f, vec![vec![g.clone()]]).unwrap();
        let c = c1_cohomology_finite_field(&m);
        assert_eq!((c.h0_dim, c.h1_dim), (1, 1));
        assert_eq!(c.h0_basis.len(), 1);
        let k = &c.h0_basis[0][0];
        let expected = g.add(&FqElement::one(&f));
        assert_eq!(k, &expected, "fixed points of x ↦ g·x² are {{0, g+1}}");
    }

    #[test]
    fn trivial_module_over_f4_has_dims_2_2() {
        // φ = Frobenius on F₄: fixed field F₂... dim over F₂ of H⁰ is 1,
        // but the module is F₄ itself (f = 2, d = 1) and φ−1 has matrix of
        // rank 1 on a 2-dimensional F₂-space.
        let f = f4();
        let m = PhiModuleCharP::new(&f, vec![vec![FqElement::one(&f)]]).unwrap();
        let c = c1_cohomology_finite_field(&m);
        assert_eq!((c.h0_dim, c.h1_dim), (1, 1), "H⁰(F₄, trivial) = F₂");
    }

    #[test]
    fn kernel_and_cokernel_dimensions_agree() {
        // Φ invertible forces dim H⁰ = dim H¹ (square F_p-matrix)
        let f = f4();
        let g = FqElement::gen(&f);
        let one = FqElement::one(&f);
        let zero = FqElement::zero(&f);
        let m = PhiModuleCharP::new(
            &f,
            vec![vec![g.clone(), one.clone()], vec![zero.clone(), g.mul(&g)]],
        )
        .unwrap();
        let c = c1_cohomology_finite_field(&m);
        assert_eq!(c.h0_dim, c.h1_dim);
        for b in &c.h0_basis {
            let img = m.apply_phi(b);
            let diff: Vec<FqElement> = img.iter().zip(b).map(|(x, y)| x.sub(y)).collect();
            assert!(diff.iter().all(|e| e.is_zero()), "kernel basis is fixed by φ");
        }
    }

    #[test]
    fn effacement_kills_the_class() {
        let f = f4();
        let g = FqElement::gen(&f);
        let m = PhiModuleCharP::new(&f, vec![vec![g.clone()]]).unwrap();
        let c = c1_cohomology_finite_field(&m);
        assert_eq!(c.h1_dim, 1);
        let target = c.h1_reps[0].clone();
        let (n, solver) = efface_h1_char_p(&m, &target).unwrap();
        // (φ_N − 1)(solver) equals the image of the target in N
        let img = n.apply_phi(&solver);
        let diff: Vec<FqElement> = img.iter().zip(&solver).map(|(x, y)| x.sub(y)).collect();
        assert_eq!(diff[0], target[0], "the effaced class becomes a coboundary");
        assert!(diff[1].is_zero());
        let cn = c1_cohomology_finite_field(&n);
        assert_eq!(cn.h0_dim, cn.h1_dim, "the enlarged module is still étale");
    }

    #[test]
    fn rejects_singular_phi() {
        let f = f4();
        let zero = FqElement::zero(&f);
        let one = FqElement::one(&f);
        let res = PhiModuleCharP::new(
            &f,
            vec![vec![one.clone(), one.clone()], vec![one.clone(), one]],
        );
        assert!(matches!(res, Err(Error::NotEtale(_))), "rank-1 Φ is not étale, got {:?}", res.err());
        let _ = zero;
    }
}
