//! Truncated Witt vectors W_n(R) for n ≤ 4, with the universal structure
//! polynomials computed from the ghost components
//!
//!   w_k(x) = x₀^{p^k} + p·x₁^{p^{k−1}} + ⋯ + p^k·x_k .
//!
//! Addition, multiplication, negation and Frobenius are determined by
//! w_k(S(x,y)) = w_k(x) + w_k(y), w_k(M) = w_k(x)·w_k(y), w_k(N) = −w_k(x),
//! and w_k(F(x)) = w_{k+1}(x); each ladder step divides exactly by p^k.
//!
//! The polynomial coefficients are integers, but only their residues modulo
//! a power of p ever matter for evaluation.  We therefore carry them as u64
//! residues mod p^V with an explicit validity exponent V: exact inputs start
//! at V = 16 (or the largest power of p below 2⁶²), and the k-th ladder step
//! costs one division by p^k, leaving S₀…S₃ valid mod p^16 … p^13, far more
//! than the n ≤ 4 torsion any evaluation base needs.  No big-integer
//! arithmetic is involved anywhere.
//!
//! Evaluation is generic over the coefficient base: ℤ/p^m (`ZpM`) or F_q
//! (`FqWittCtx`, allowing p = 2).  Ghost coordinates are only faithful over
//! a base with enough room, so `ghost` demands ℤ/p^m with m ≥ 2n − 1.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::charp::{FqElement, FqParams};
use crate::error::Error;
use crate::Result;

// ---------------------------------------------------------------- polynomials

/// Multivariate polynomial with u64 coefficients carried mod p^valid.
#[derive(Clone, Debug)]
struct WittPoly {
    p: u64,
    /// Coefficients are correct modulo p^valid.
    valid: u32,
    /// exponent vector (one u16 per variable) ↦ coefficient
    coeffs: BTreeMap<Vec<u16>, u64>,
}

fn p_pow(p: u64, e: u32) -> u64 {
    p.pow(e)
}

impl WittPoly {
    fn zero(p: u64, valid: u32) -> Self {
        WittPoly { p, valid, coeffs: BTreeMap::new() }
    }

    fn constant(p: u64, valid: u32, nv: usize, c: u64) -> Self {
        let mut out = Self::zero(p, valid);
        let m = p_pow(p, valid);
        if c % m != 0 {
            out.coeffs.insert(vec![0; nv], c % m);
        }
        out
    }

    fn var_pow(p: u64, valid: u32, nv: usize, var: usize, e: u16) -> Self {
        let mut key = vec![0u16; nv];
        key[var] = e;
        let mut out = Self::zero(p, valid);
        out.coeffs.insert(key, 1);
        out
    }

    fn reduce_to(&self, valid: u32) -> Self {
        let m = p_pow(self.p, valid);
        let coeffs = self
            .coeffs
            .iter()
            .filter_map(|(k, &v)| {
                let r = v % m;
                (r != 0).then(|| (k.clone(), r))
            })
            .collect();
        WittPoly { p: self.p, valid, coeffs }
    }

    fn add(&self, other: &Self) -> Self {
        let valid = self.valid.min(other.valid);
        let m = p_pow(self.p, valid);
        let mut out = self.reduce_to(valid);
        for (k, &v) in &other.coeffs {
            let e = out.coeffs.entry(k.clone()).or_insert(0);
            *e = (*e + v % m) % m;
            if *e == 0 {
                out.coeffs.remove(k);
            }
        }
        out
    }

    fn neg(&self) -> Self {
        let m = p_pow(self.p, self.valid);
        let coeffs = self.coeffs.iter().map(|(k, &v)| (k.clone(), (m - v % m) % m)).collect();
        WittPoly { p: self.p, valid: self.valid, coeffs }
    }

    fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    fn mul(&self, other: &Self) -> Self {
        let valid = self.valid.min(other.valid);
        let m = p_pow(self.p, valid) as u128;
        let mut coeffs: BTreeMap<Vec<u16>, u64> = BTreeMap::new();
        for (ka, &va) in &self.coeffs {
            let va = va as u128 % m;
            if va == 0 {
                continue;
            }
            for (kb, &vb) in &other.coeffs {
                let prod = (va * (vb as u128 % m)) % m;
                if prod == 0 {
                    continue;
                }
                let key: Vec<u16> = ka.iter().zip(kb).map(|(&a, &b)| a + b).collect();
                let e = coeffs.entry(key).or_insert(0);
                *e = ((*e as u128 + prod) % m) as u64;
            }
        }
        coeffs.retain(|_, v| *v != 0);
        WittPoly { p: self.p, valid, coeffs }
    }

    fn pow(&self, e: u64) -> Self {
        let nv = self.coeffs.keys().next().map_or(0, |k| k.len());
        let mut acc = Self::constant(self.p, self.valid, nv, 1);
        let mut b = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&b);
            }
            e >>= 1;
            if e > 0 {
                b = b.mul(&b);
            }
        }
        acc
    }

    /// Multiply by p^k: validity rises by k.
    fn scale_p(&self, k: u32) -> Self {
        let valid = self.valid + k;
        let m = p_pow(self.p, valid);
        let pk = p_pow(self.p, k);
        let coeffs = self
            .coeffs
            .iter()
            .map(|(key, &v)| (key.clone(), ((v as u128 * pk as u128) % m as u128) as u64))
            .collect();
        WittPoly { p: self.p, valid, coeffs }
    }

    /// Exact division by p^k: validity drops by k.
    fn div_exact_p(&self, k: u32) -> Self {
        let pk = p_pow(self.p, k);
        let valid = self.valid - k;
        let coeffs = self
            .coeffs
            .iter()
            .map(|(key, &v)| {
                assert_eq!(v % pk, 0, "ladder division is exact by construction");
                (key.clone(), v / pk)
            })
            .collect();
        WittPoly { p: self.p, valid, coeffs }.reduce_to(valid)
    }
}

/// w_k in the variables var_offset..var_offset+k+1 of an nv-variable ring.
fn ghost_poly(p: u64, valid: u32, nv: usize, var_offset: usize, k: u32) -> WittPoly {
    let mut w = WittPoly::zero(p, valid);
    for i in 0..=k {
        let term = WittPoly::var_pow(p, valid, nv, var_offset + i as usize, p_pow(p, k - i) as u16)
            .scale_p(i)
            .reduce_to(valid);
        w = w.add(&term);
    }
    w
}

/// Solve w_k(out) = target_k for k = 0..count−1 by the exact ladder.
fn ladder(p: u64, valid0: u32, count: u32, target: impl Fn(u32) -> WittPoly) -> Vec<WittPoly> {
    let mut out: Vec<WittPoly> = Vec::new();
    for k in 0..count {
        let mut rhs = target(k);
        for i in 0..k {
            let lift = out[i as usize].pow(p_pow(p, k - i) as u64).scale_p(i).reduce_to(rhs.valid.min(valid0));
            rhs = rhs.sub(&lift);
        }
        out.push(rhs.div_exact_p(k));
    }
    out
}

// ---------------------------------------------------------------- coefficient bases

/// A commutative ring the Witt components live in.
pub trait WittCoeffRing: Clone {
    type Elt: Clone + PartialEq + std::fmt::Debug;
    fn p(&self) -> u64;
    fn zero(&self) -> Self::Elt;
    fn one(&self) -> Self::Elt;
    fn add(&self, a: &Self::Elt, b: &Self::Elt) -> Self::Elt;
    fn mul(&self, a: &Self::Elt, b: &Self::Elt) -> Self::Elt;
    /// Image of an integer residue.
    fn from_u64(&self, v: u64) -> Self::Elt;
    /// How many p-adic digits of a universal coefficient the base can see.
    fn required_validity(&self) -> u32;
    /// Whether ghost coordinates over this base are faithful for length n.
    fn supports_ghost(&self, n: u32) -> bool;

    fn pow(&self, a: &Self::Elt, mut e: u64) -> Self::Elt {
        let mut acc = self.one();
        let mut b = a.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &b);
            }
            e >>= 1;
            if e > 0 {
                b = self.mul(&b, &b);
            }
        }
        acc
    }
}

/// ℤ/p^m with u64 elements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZpM {
    pub p: u64,
    pub m: u32,
}

impl ZpM {
    pub fn modulus(&self) -> u64 {
        self.p.pow(self.m)
    }
}

impl WittCoeffRing for ZpM {
    type Elt = u64;

    fn p(&self) -> u64 {
        self.p
    }

    fn zero(&self) -> u64 {
        0
    }

    fn one(&self) -> u64 {
        1 % self.modulus()
    }

    fn add(&self, a: &u64, b: &u64) -> u64 {
        (a + b) % self.modulus()
    }

    fn mul(&self, a: &u64, b: &u64) -> u64 {
        ((*a as u128 * *b as u128) % self.modulus() as u128) as u64
    }

    fn from_u64(&self, v: u64) -> u64 {
        v % self.modulus()
    }

    fn required_validity(&self) -> u32 {
        self.m
    }

    fn supports_ghost(&self, n: u32) -> bool {
        self.m >= 2 * n - 1
    }
}

/// F_q as a Witt coefficient base (p = 2 included).
#[derive(Clone)]
pub struct FqWittCtx {
    pub params: Arc<FqParams>,
}

impl WittCoeffRing for FqWittCtx {
    type Elt = FqElement;

    fn p(&self) -> u64 {
        self.params.p()
    }

    fn zero(&self) -> FqElement {
        FqElement::zero(&self.params)
    }

    fn one(&self) -> FqElement {
        FqElement::one(&self.params)
    }

    fn add(&self, a: &FqElement, b: &FqElement) -> FqElement {
        a.add(b)
    }

    fn mul(&self, a: &FqElement, b: &FqElement) -> FqElement {
        a.mul(b)
    }

    fn from_u64(&self, v: u64) -> FqElement {
        FqElement::from_residue(&self.params, v)
    }

    fn required_validity(&self) -> u32 {
        1
    }

    fn supports_ghost(&self, _n: u32) -> bool {
        false
    }
}

// ---------------------------------------------------------------- the ring

/// W_n(R): the universal polynomials specialized to one (p, n), evaluated
/// over a chosen base.
pub struct WittRing<C: WittCoeffRing> {
    pub ctx: C,
    pub n: u32,
    add_polys: Vec<WittPoly>,
    mul_polys: Vec<WittPoly>,
    neg_polys: Vec<WittPoly>,
    /// F_k for k = 0..n−2 (Frobenius shortens a vector by one).
    frob_polys: Vec<WittPoly>,
}

impl<C: WittCoeffRing> WittRing<C> {
    pub fn new(ctx: C, n: u32) -> Result<WittRing<C>> {
        if n == 0 || n > 4 {
            return Err(Error::InvalidParams("Witt length must be between 1 and 4".into()));
        }
        let p = ctx.p();
        // largest exponent with p^v < 2^62, capped at 16
        let mut valid0 = 0u32;
        let mut acc = 1u64;
        while valid0 < 16 && acc < (1u64 << 62) / p {
            acc *= p;
            valid0 += 1;
        }
        let need = ctx.required_validity() + (n - 1);
        if valid0 < need {
            return Err(Error::InvalidParams(format!(
                "p = {p} is too large for exact Witt coefficients at this torsion"
            )));
        }

        let nv2 = 2 * n as usize;
        let add_polys = ladder(p, valid0, n, |k| {
            ghost_poly(p, valid0, nv2, 0, k).add(&ghost_poly(p, valid0, nv2, n as usize, k))
        });
        let mul_polys = ladder(p, valid0, n, |k| {
            ghost_poly(p, valid0, nv2, 0, k).mul(&ghost_poly(p, valid0, nv2, n as usize, k))
        });
        let nv1 = n as usize;
        let neg_polys = ladder(p, valid0, n, |k| ghost_poly(p, valid0, nv1, 0, k).neg());
        let frob_polys = if n >= 2 {
            ladder(p, valid0, n - 1, |k| ghost_poly(p, valid0, nv1, 0, k + 1))
        } else {
            vec![]
        };

        Ok(WittRing { ctx, n, add_polys, mul_polys, neg_polys, frob_polys })
    }

    fn eval(&self, poly: &WittPoly, vars: &[C::Elt]) -> C::Elt {
        assert!(poly.valid >= self.ctx.required_validity());
        let mut out = self.ctx.zero();
        for (key, &c) in &poly.coeffs {
            let mut term = self.ctx.from_u64(c);
            for (v, &e) in key.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                assert!(v < vars.len(), "polynomial touches a variable beyond the vector");
                term = self.ctx.mul(&term, &self.ctx.pow(&vars[v], e as u64));
            }
            out = self.ctx.add(&out, &term);
        }
        out
    }

    fn eval_family(&self, polys: &[WittPoly], count: usize, vars: &[C::Elt]) -> Vec<C::Elt> {
        polys[..count].iter().map(|s| self.eval(s, vars)).collect()
    }

    pub fn zero_vec(&self, len: usize) -> Vec<C::Elt> {
        vec![self.ctx.zero(); len]
    }

    pub fn one_vec(&self, len: usize) -> Vec<C::Elt> {
        let mut v = self.zero_vec(len);
        v[0] = self.ctx.one();
        v
    }

    pub fn add(&self, x: &[C::Elt], y: &[C::Elt]) -> Vec<C::Elt> {
        assert_eq!(x.len(), y.len());
        let len = x.len();
        assert!(len <= self.n as usize);
        let mut vars = Vec::with_capacity(2 * self.n as usize);
        vars.extend_from_slice(x);
        vars.extend(std::iter::repeat_n(self.ctx.zero(), self.n as usize - len));
        vars.extend_from_slice(y);
        vars.extend(std::iter::repeat_n(self.ctx.zero(), self.n as usize - len));
        self.eval_family(&self.add_polys, len, &vars)
    }

    pub fn mul(&self, x: &[C::Elt], y: &[C::Elt]) -> Vec<C::Elt> {
        assert_eq!(x.len(), y.len());
        let len = x.len();
        assert!(len <= self.n as usize);
        let mut vars = Vec::with_capacity(2 * self.n as usize);
        vars.extend_from_slice(x);
        vars.extend(std::iter::repeat_n(self.ctx.zero(), self.n as usize - len));
        vars.extend_from_slice(y);
        vars.extend(std::iter::repeat_n(self.ctx.zero(), self.n as usize - len));
        self.eval_family(&self.mul_polys, len, &vars)
    }

    pub fn neg(&self, x: &[C::Elt]) -> Vec<C::Elt> {
        assert!(x.len() <= self.n as usize);
        let mut vars = x.to_vec();
        vars.extend(std::iter::repeat_n(self.ctx.zero(), self.n as usize - x.len()));
        self.eval_family(&self.neg_polys, x.len(), &vars)
    }

    pub fn sub(&self, x: &[C::Elt], y: &[C::Elt]) -> Vec<C::Elt> {
        self.add(x, &self.neg(y))
    }

    /// Verschiebung: (x₀,…,x_{k−1}) ↦ (0, x₀,…,x_{k−1}), one longer.
    pub fn verschiebung(&self, x: &[C::Elt]) -> Vec<C::Elt> {
        assert!(x.len() < self.n as usize, "V leaves W_n");
        let mut out = Vec::with_capacity(x.len() + 1);
        out.push(self.ctx.zero());
        out.extend_from_slice(x);
        out
    }

    /// Frobenius: shortens a length-k vector to length k−1.
    pub fn frobenius(&self, x: &[C::Elt]) -> Vec<C::Elt> {
        assert!(x.len() >= 2 && x.len() <= self.n as usize);
        let mut vars = x.to_vec();
        vars.extend(std::iter::repeat_n(self.ctx.zero(), self.n as usize - x.len()));
        self.eval_family(&self.frob_polys, x.len() - 1, &vars)
    }

    /// The Witt vector of an integer (double-and-add on the additive group).
    pub fn scalar(&self, v: u64, len: usize) -> Vec<C::Elt> {
        let mut acc = self.zero_vec(len);
        let one = self.one_vec(len);
        for bit in (0..64).rev() {
            acc = self.add(&acc, &acc);
            if (v >> bit) & 1 == 1 {
                acc = self.add(&acc, &one);
            }
        }
        acc
    }

    /// Ghost coordinates (w₀(x), …): only faithful over a torsion-free
    /// enough base.
    pub fn ghost(&self, x: &[C::Elt]) -> Result<Vec<C::Elt>> {
        if !self.ctx.supports_ghost(x.len() as u32) {
            return Err(Error::TorsionBase(
                "ghost coordinates need base ℤ/p^m with m ≥ 2n − 1".into(),
            ));
        }
        let p = self.ctx.p();
        Ok((0..x.len() as u32)
            .map(|k| {
                let mut w = self.ctx.zero();
                for i in 0..=k {
                    let mut t = self.ctx.pow(&x[i as usize], p_pow(p, k - i));
                    t = self.ctx.mul(&t, &self.ctx.from_u64(p_pow(p, i)));
                    w = self.ctx.add(&w, &t);
                }
                w
            })
            .collect())
    }
}

// ---------------------------------------------------------------- the two bridges

/// Teichmüller lift of a residue mod p into ℤ/pⁿ: the fixed point of x ↦ x^p
/// congruent to it mod p.
fn teich_u64(x: u64, p: u64, n: u32) -> u64 {
    let m = p.pow(n);
    let mut t = x % p;
    for _ in 0..n + 2 {
        t = crate::coeff::pow_mod(t, p, m);
    }
    t
}

/// The ring isomorphism W_n(F_p) ≅ ℤ/pⁿ, x ↦ Σ pⁱ·ω(xᵢ).
pub fn witt_to_znp(ring: &WittRing<FqWittCtx>, x: &[FqElement]) -> u64 {
    let p = ring.ctx.p();
    assert_eq!(ring.ctx.params.f(), 1, "this bridge is for the prime field");
    let n = x.len() as u32;
    let m = p.pow(n);
    let mut out = 0u64;
    for (i, xi) in x.iter().enumerate() {
        let r = xi.coeffs()[0];
        out = (out + p.pow(i as u32) * teich_u64(r, p, n)) % m;
    }
    out
}

/// Inverse of `witt_to_znp`.
pub fn znp_to_witt(ring: &WittRing<FqWittCtx>, v: u64, len: usize) -> Vec<FqElement> {
    let p = ring.ctx.p();
    assert_eq!(ring.ctx.params.f(), 1);
    let n = len as u32;
    let m = p.pow(n);
    let mut rest = v % m;
    let mut out = Vec::with_capacity(len);
    for i in 0..len {
        let digits_left = n - i as u32;
        let r = rest % p;
        out.push(FqElement::from_residue(&ring.ctx.params, r));
        let t = teich_u64(r, p, digits_left);
        rest = (rest + p.pow(digits_left) - t) % p.pow(digits_left) / p;
    }
    debug_assert_eq!(rest, 0);
    out
}

/// W_n(F_q) → W_n(F_q) as the coefficient ring W_n(F_q) of the main library:
/// x ↦ Σ pⁱ·ω(xᵢ^{p^{f−i mod f}}), the classical strict-p-ring embedding
/// with the inverse-Frobenius twist on higher components.
pub fn witt_to_coeff(
    ring: &WittRing<FqWittCtx>,
    x: &[FqElement],
    params: &Arc<crate::coeff::RingParams>,
) -> crate::coeff::CoeffElement {
    use crate::coeff::CoeffElement;
    let p = ring.ctx.p();
    let f = ring.ctx.params.f() as u32;
    assert_eq!(params.p(), p);
    assert_eq!(params.f() as u32, f);
    assert_eq!(params.n() as usize, x.len());
    let mut out = CoeffElement::zero(params);
    for (i, xi) in x.iter().enumerate() {
        // inverse Frobenius i times = forward Frobenius (f − i mod f) times
        let twist_pow = p_pow(p, (f - (i as u32 % f)) % f);
        let tw = xi.pow(twist_pow);
        let lift = crate::coeff::teichmuller(params, tw.coeffs());
        out = out.add(&lift.scale(p_pow(p, i as u32)));
    }
    out
}

// ----------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fp_ring(p: u64, n: u32) -> WittRing<FqWittCtx> {
        let params = FqParams::new(p, 1, None).unwrap();
        WittRing::new(FqWittCtx { params }, n).unwrap()
    }

    #[test]
    fn universal_polynomials_known_values() {
        // p = 3, n = 2: S₁ = x₁ + y₁ − x₀²y₀ − x₀y₀²
        let ring = fp_ring(3, 2);
        let s1 = &ring.add_polys[1];
        let m = 3u64.pow(s1.valid);
        let expect: Vec<(Vec<u16>, u64)> = vec![
            (vec![0, 1, 0, 0], 1),       // x₁
            (vec![0, 0, 0, 1], 1),       // y₁
            (vec![2, 0, 1, 0], m - 1),   // −x₀²y₀
            (vec![1, 0, 2, 0], m - 1),   // −x₀y₀²
        ];
        for (key, v) in expect {
            assert_eq!(s1.coeffs.get(&key), Some(&v), "S₁ monomial {key:?}");
        }
        assert_eq!(s1.coeffs.len(), 4);

        // M₁ = x₀³y₁ + x₁y₀³ + 3x₁y₁
        let m1 = &ring.mul_polys[1];
        assert_eq!(m1.coeffs.get(&vec![3, 0, 0, 1]), Some(&1));
        assert_eq!(m1.coeffs.get(&vec![0, 1, 3, 0]), Some(&1));
        assert_eq!(m1.coeffs.get(&vec![0, 1, 0, 1]), Some(&3));
        assert_eq!(m1.coeffs.len(), 3);

        // F₀ = x₀³ + 3x₁
        let f0 = &ring.frob_polys[0];
        assert_eq!(f0.coeffs.get(&vec![3, 0]), Some(&1));
        assert_eq!(f0.coeffs.get(&vec![0, 1]), Some(&3));
        assert_eq!(f0.coeffs.len(), 2);
    }

    #[test]
    fn validity_ladder() {
        let ring = fp_ring(3, 4);
        let valids: Vec<u32> = ring.add_polys.iter().map(|s| s.valid).collect();
        assert_eq!(valids, vec![16, 15, 14, 13]);
    }

    #[test]
    fn w2_f3_is_z9_exhaustively() {
        let ring = fp_ring(3, 2);
        for a in 0..9u64 {
            for b in 0..9u64 {
                let x = znp_to_witt(&ring, a, 2);
                let y = znp_to_witt(&ring, b, 2);
                assert_eq!(witt_to_znp(&ring, &x), a, "round trip at {a}");
                assert_eq!(
                    witt_to_znp(&ring, &ring.add(&x, &y)),
                    (a + b) % 9,
                    "addition transports to ℤ/9 at ({a}, {b})"
                );
                assert_eq!(
                    witt_to_znp(&ring, &ring.mul(&x, &y)),
                    (a * b) % 9,
                    "multiplication transports to ℤ/9 at ({a}, {b})"
                );
            }
        }
    }

    #[test]
    fn w3_f2_is_z8_exhaustively() {
        // the universal polynomials are characteristic-agnostic: p = 2 works
        let ring = fp_ring(2, 3);
        for a in 0..8u64 {
            for b in 0..8u64 {
                let x = znp_to_witt(&ring, a, 3);
                let y = znp_to_witt(&ring, b, 3);
                assert_eq!(witt_to_znp(&ring, &ring.add(&x, &y)), (a + b) % 8);
                assert_eq!(witt_to_znp(&ring, &ring.mul(&x, &y)), (a * b) % 8);
            }
        }
    }

    #[test]
    fn ghost_is_a_ring_map() {
        let ring = WittRing::new(ZpM { p: 3, m: 5 }, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = 3u64.pow(5);
        for _ in 0..40 {
            let x: Vec<u64> = (0..3).map(|_| rng.random_range(0..m)).collect();
            let y: Vec<u64> = (0..3).map(|_| rng.random_range(0..m)).collect();
            let gx = ring.ghost(&x).unwrap();
            let gy = ring.ghost(&y).unwrap();
            let gsum = ring.ghost(&ring.add(&x, &y)).unwrap();
            let gprod = ring.ghost(&ring.mul(&x, &y)).unwrap();
            for k in 0..3 {
                assert_eq!(gsum[k], (gx[k] + gy[k]) % m, "ghost of a sum");
                assert_eq!(gprod[k], ((gx[k] as u128 * gy[k] as u128) % m as u128) as u64);
            }
            let gneg = ring.ghost(&ring.neg(&x)).unwrap();
            for k in 0..3 {
                assert_eq!((gneg[k] + gx[k]) % m, 0, "ghost of a negative");
            }
        }
    }

    #[test]
    fn ghost_requires_room() {
        let ring = WittRing::new(ZpM { p: 3, m: 2 }, 3).unwrap();
        let x = ring.zero_vec(3);
        assert!(matches!(ring.ghost(&x), Err(Error::TorsionBase(_))));
        let params = FqParams::new(3, 1, None).unwrap();
        let ring = WittRing::new(FqWittCtx { params }, 2).unwrap();
        let x = ring.zero_vec(2);
        assert!(matches!(ring.ghost(&x), Err(Error::TorsionBase(_))));
    }

    #[test]
    fn frobenius_after_verschiebung_is_p() {
        // F(V(x)) = p·x, checked over ℤ/p^m and over F_q
        let ring = WittRing::new(ZpM { p: 3, m: 6 }, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = 3u64.pow(6);
        for _ in 0..30 {
            let x: Vec<u64> = (0..2).map(|_| rng.random_range(0..m)).collect();
            let fv = ring.frobenius(&ring.verschiebung(&x));
            let px = ring.mul(&x, &ring.scalar(3, 2));
            assert_eq!(fv, px, "F∘V = p over ℤ/3⁶ at {x:?}");
        }

        let params = FqParams::new(3, 2, Some(vec![2, 2, 1])).unwrap();
        let ring = WittRing::new(FqWittCtx { params: params.clone() }, 3).unwrap();
        for seed in 0..20u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x: Vec<FqElement> = (0..2)
                .map(|_| FqElement::from_coeffs(&params, &[rng.random_range(0..3), rng.random_range(0..3)]))
                .collect();
            let fv = ring.frobenius(&ring.verschiebung(&x));
            let px = ring.mul(&x, &ring.scalar(3, 2));
            assert_eq!(fv, px, "F∘V = p over F₉ at {x:?}");
        }
    }

    #[test]
    fn neg_is_an_additive_inverse() {
        let ring = fp_ring(5, 2);
        for v in 0..25u64 {
            let x = znp_to_witt(&ring, v, 2);
            let s = ring.add(&x, &ring.neg(&x));
            assert!(s.iter().all(|e| e.is_zero()), "x + (−x) = 0 at {v}");
        }
    }

    #[test]
    fn witt_model_matches_coefficient_ring_model_on_w2_f9() {
        // W₂(F₉) two ways: universal polynomials vs. the Cohen-ring model
        let fq = FqParams::new(3, 2, Some(vec![2, 2, 1])).unwrap();
        let ring = WittRing::new(FqWittCtx { params: fq.clone() }, 2).unwrap();
        let params = crate::coeff::RingParams::new(3, 2, 2, Some(vec![2, 2, 1])).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let rand_elt = |rng: &mut ChaCha8Rng| -> Vec<FqElement> {
            (0..2)
                .map(|_| FqElement::from_coeffs(&fq, &[rng.random_range(0..3), rng.random_range(0..3)]))
                .collect()
        };
        for case in 0..100 {
            let x = rand_elt(&mut rng);
            let y = rand_elt(&mut rng);
            let bx = witt_to_coeff(&ring, &x, &params);
            let by = witt_to_coeff(&ring, &y, &params);
            assert_eq!(
                witt_to_coeff(&ring, &ring.add(&x, &y), &params),
                bx.add(&by),
                "case {case}: sums agree"
            );
            assert_eq!(
                witt_to_coeff(&ring, &ring.mul(&x, &y), &params),
                bx.mul(&by),
                "case {case}: products agree"
            );
        }
    }

    #[test]
    fn rejects_long_vectors() {
        assert!(WittRing::new(ZpM { p: 3, m: 2 }, 5).is_err());
        assert!(WittRing::new(ZpM { p: 3, m: 2 }, 0).is_err());
    }
}
