//! The coefficient ring W_n(F_q): exact arithmetic in ℤ/pⁿ and its
//! unramified extensions.
//!
//! Elements are polynomial representatives of degree < f with coefficients
//! mod pⁿ, reduced modulo a monic minimal polynomial m(g) whose reduction
//! mod p is irreducible over F_p.  The ring carries
//!
//! - the Frobenius σ, the unique automorphism lifting x ↦ x^p; computed once
//!   per parameter set by Newton–Hensel lifting the root g^p of m,
//! - the Teichmüller lift ω(a), the unique root of x^q = x above a ∈ F_q,
//! - the trace Tr = Σ_{j<f} σ^j down to ℤ/pⁿ,
//! - the p-adic logarithm log⟨u⟩ of units, evaluated by the truncated
//!   alternating series at an internally lifted modulus.
//!
//! p = 2 is rejected: the logarithm, the Teichmüller section and the duality
//! normalization all assume p odd.

use std::fmt;
use std::sync::Arc;

use crate::error::Error;
use crate::Result;

// ---------------------------------------------------------------- raw mod-m helpers

pub(crate) fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub(crate) fn add_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 + b as u128) % m as u128) as u64
}

pub(crate) fn sub_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 + m as u128 - b as u128 % m as u128) % m as u128) as u64
}

pub(crate) fn pow_mod(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, a, m);
        }
        a = mul_mod(a, a, m);
        e >>= 1;
    }
    acc
}

/// p-adic valuation of a residue; `n` is returned for 0 (the residue is only
/// known mod pⁿ, so its valuation is at least n).
pub(crate) fn vp(mut a: u64, p: u64, n: u32) -> u32 {
    if a == 0 {
        return n;
    }
    let mut v = 0;
    while a % p == 0 {
        a /= p;
        v += 1;
    }
    v.min(n)
}

/// Inverse of a unit mod p^k: Fermat inverse mod p, then Newton digits.
pub(crate) fn inv_mod_pk(a: u64, p: u64, modulus: u64) -> u64 {
    debug_assert!(a % p != 0, "inv_mod_pk needs a unit");
    let mut x = pow_mod(a % p, p - 2, p);
    // x ← x(2 − ax) doubles the number of correct p-digits per step.
    loop {
        let ax = mul_mod(a, x, modulus);
        if ax == 1 {
            return x;
        }
        x = mul_mod(x, sub_mod(2, ax, modulus), modulus);
    }
}

pub(crate) fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for q in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == q {
            return true;
        }
        if n % q == 0 {
            return false;
        }
    }
    // Deterministic Miller-Rabin for u64 with the standard base set.
    let d = n - 1;
    let s = d.trailing_zeros();
    let d = d >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

// ---------------------------------------------------------------- polynomials mod (m(g), p^k)

/// Schoolbook product followed by reduction modulo the monic `minpoly`.
pub(crate) fn poly_mul_mod(a: &[u64], b: &[u64], minpoly: &[u64], modulus: u64) -> Vec<u64> {
    let f = minpoly.len() - 1;
    let mut prod = vec![0u64; a.len() + b.len()];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            if bj == 0 {
                continue;
            }
            prod[i + j] = add_mod(prod[i + j], mul_mod(ai, bj, modulus), modulus);
        }
    }
    // minpoly is monic, so the reduction is exact division-free elimination.
    for k in (f..prod.len()).rev() {
        let c = prod[k];
        if c == 0 {
            continue;
        }
        prod[k] = 0;
        for (t, &mt) in minpoly.iter().enumerate().take(f) {
            let idx = k - f + t;
            prod[idx] = sub_mod(prod[idx], mul_mod(c, mt, modulus), modulus);
        }
    }
    prod.truncate(f.max(1));
    prod.resize(f.max(1), 0);
    prod
}

pub(crate) fn poly_pow_mod(base: &[u64], mut e: u64, minpoly: &[u64], modulus: u64) -> Vec<u64> {
    let f = minpoly.len() - 1;
    let mut acc = vec![0u64; f.max(1)];
    acc[0] = 1 % modulus;
    let mut b = base.to_vec();
    while e > 0 {
        if e & 1 == 1 {
            acc = poly_mul_mod(&acc, &b, minpoly, modulus);
        }
        b = poly_mul_mod(&b, &b, minpoly, modulus);
        e >>= 1;
    }
    acc
}

/// Monic gcd over F_p, used by the irreducibility test.
fn poly_gcd_mod_p(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let trim = |v: &mut Vec<u64>| {
        while v.len() > 1 && *v.last().unwrap() == 0 {
            v.pop();
        }
    };
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    for c in a.iter_mut() {
        *c %= p;
    }
    for c in b.iter_mut() {
        *c %= p;
    }
    trim(&mut a);
    trim(&mut b);
    while !(b.len() == 1 && b[0] == 0) {
        // a mod b
        let lead_inv = inv_mod_pk(*b.last().unwrap(), p, p);
        while a.len() >= b.len() && !(a.len() == 1 && a[0] == 0) {
            let shift = a.len() - b.len();
            let c = mul_mod(*a.last().unwrap(), lead_inv, p);
            if c != 0 {
                for (t, &bt) in b.iter().enumerate() {
                    a[shift + t] = sub_mod(a[shift + t], mul_mod(c, bt, p), p);
                }
            }
            trim(&mut a);
            if a.len() == 1 && a[0] == 0 {
                break;
            }
            if *a.last().unwrap() == 0 {
                trim(&mut a);
            }
            if a.len() < b.len() {
                break;
            }
        }
        std::mem::swap(&mut a, &mut b);
    }
    trim(&mut a);
    a
}

pub(crate) fn is_irreducible_mod_p(minpoly: &[u64], p: u64) -> bool {
    let f = (minpoly.len() - 1) as u64;
    if f == 1 {
        return true;
    }
    // x^{p^f} ≡ x mod (m, p) and gcd(x^{p^{f/l}} − x, m) = 1 for primes l | f.
    let x = vec![0u64, 1];
    let frob = |t: &[u64]| poly_pow_mod(t, p, minpoly, p);
    let mut powers = Vec::with_capacity(f as usize + 1);
    powers.push(x.clone());
    for _ in 0..f {
        let last = powers.last().unwrap().clone();
        powers.push(frob(&last));
    }
    let mut top = powers[f as usize].clone();
    top.resize(2.max(top.len()), 0);
    if top[1] != 1 % p || top.iter().enumerate().any(|(i, &c)| i != 1 && c != 0) {
        return false;
    }
    let mut l = 2;
    let mut rem = f;
    while l * l <= rem {
        if rem % l == 0 {
            let mut diff = powers[(f / l) as usize].clone();
            diff.resize(2.max(diff.len()), 0);
            diff[1] = sub_mod(diff[1], 1, p);
            let g = poly_gcd_mod_p(&diff, minpoly, p);
            if g.len() > 1 {
                return false;
            }
            while rem % l == 0 {
                rem /= l;
            }
        }
        l += 1;
    }
    if rem > 1 && rem < f {
        let mut diff = powers[(f / rem) as usize].clone();
        diff.resize(2.max(diff.len()), 0);
        diff[1] = sub_mod(diff[1], 1, p);
        let g = poly_gcd_mod_p(&diff, minpoly, p);
        if g.len() > 1 {
            return false;
        }
    } else if rem == f && f > 1 {
        // f itself prime: check l = f.
        let mut diff = powers[1].clone();
        diff.resize(2.max(diff.len()), 0);
        diff[1] = sub_mod(diff[1], 1, p);
        let g = poly_gcd_mod_p(&diff, minpoly, p);
        if g.len() > 1 {
            return false;
        }
    }
    true
}

// ---------------------------------------------------------------- RingParams

/// Parameters of W_n(F_q): the odd prime p, the torsion exponent n, the
/// residue degree f with q = p^f, and the minimal polynomial of the chosen
/// generator g.  The Frobenius image σ(g) is computed once at construction.
#[derive(Clone)]
pub struct RingParams {
    p: u64,
    n: u32,
    f: usize,
    modulus: u64,
    minpoly: Vec<u64>,
    sigma_gen: Vec<u64>,
}

impl fmt::Debug for RingParams {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(fm, "RingParams(p={}, n={}, f={})", self.p, self.n, self.f)
    }
}

impl PartialEq for RingParams {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.n == other.n && self.f == other.f && self.minpoly == other.minpoly
    }
}
impl Eq for RingParams {}

impl RingParams {
    /// Construct the ring parameters.  `minpoly` is the monic degree-f
    /// minimal polynomial as little-endian coefficients mod pⁿ; it is
    /// required exactly when f > 1 (for f = 1 the generator is 0 and the
    /// polynomial is x).
    pub fn new(p: u64, n: u32, f: usize, minpoly: Option<Vec<u64>>) -> Result<Arc<RingParams>> {
        if p == 2 {
            return Err(Error::InvalidParams("p = 2 is not supported".into()));
        }
        if !is_prime_u64(p) {
            return Err(Error::InvalidParams(format!("p = {p} is not prime")));
        }
        if n == 0 {
            return Err(Error::InvalidParams("torsion exponent n must be >= 1".into()));
        }
        if f == 0 {
            return Err(Error::InvalidParams("residue degree f must be >= 1".into()));
        }
        let modulus = p
            .checked_pow(n)
            .filter(|&m| m <= 1 << 62)
            .ok_or_else(|| Error::InvalidParams(format!("p^n = {p}^{n} exceeds the u64 budget")))?;
        let minpoly = match (f, minpoly) {
            (1, None) => vec![0, 1],
            (1, Some(mp)) => {
                if mp.len() != 2 || mp[1] % modulus != 1 {
                    return Err(Error::InvalidParams(
                        "for f = 1 the minimal polynomial must be monic of degree 1".into(),
                    ));
                }
                mp.into_iter().map(|c| c % modulus).collect()
            }
            (_, None) => {
                return Err(Error::InvalidParams(
                    "a minimal polynomial is required when f > 1".into(),
                ))
            }
            (_, Some(mp)) => {
                if mp.len() != f + 1 {
                    return Err(Error::InvalidParams(format!(
                        "minimal polynomial must have degree f = {f} (got {} coefficients)",
                        mp.len()
                    )));
                }
                let mp: Vec<u64> = mp.into_iter().map(|c| c % modulus).collect();
                if mp[f] != 1 {
                    return Err(Error::InvalidParams("minimal polynomial must be monic".into()));
                }
                mp
            }
        };
        if !is_irreducible_mod_p(&minpoly, p) {
            return Err(Error::InvalidParams(
                "minimal polynomial is reducible mod p".into(),
            ));
        }

        let sigma_gen = Self::lift_frobenius_root(&minpoly, p, n, modulus)?;
        Ok(Arc::new(RingParams { p, n, f, modulus, minpoly, sigma_gen }))
    }

    /// Newton–Hensel: lift the simple root g^p of m from mod p to mod pⁿ.
    fn lift_frobenius_root(minpoly: &[u64], p: u64, n: u32, modulus: u64) -> Result<Vec<u64>> {
        let f = minpoly.len() - 1;
        if f == 1 {
            // g = −m₀ is the unique root; σ fixes it.
            return Ok(vec![sub_mod(0, minpoly[0], modulus)]);
        }
        let g = vec![0u64, 1];
        let mut r = poly_pow_mod(&g, p, minpoly, p); // correct mod p
        // m'(x) coefficients.
        let mut deriv = vec![0u64; f];
        for k in 1..=f {
            deriv[k - 1] = mul_mod(k as u64 % modulus, minpoly[k], modulus);
        }
        let eval = |poly: &[u64], at: &[u64]| -> Vec<u64> {
            // Horner in the quotient ring.
            let mut acc = vec![0u64; f];
            for &c in poly.iter().rev() {
                acc = poly_mul_mod(&acc, at, minpoly, modulus);
                acc[0] = add_mod(acc[0], c, modulus);
            }
            acc
        };
        for _ in 0..(64 - u64::from(n).leading_zeros() + 2) {
            let m_r = eval(minpoly, &r);
            if m_r.iter().all(|&c| c == 0) {
                break;
            }
            let d_r = eval(&deriv, &r);
            let d_inv = poly_unit_inverse(&d_r, minpoly, p, modulus)?;
            let corr = poly_mul_mod(&m_r, &d_inv, minpoly, modulus);
            r.resize(f, 0);
            for (rc, cc) in r.iter_mut().zip(corr.iter()) {
                *rc = sub_mod(*rc, *cc, modulus);
            }
        }
        let check = {
            let mut acc = vec![0u64; f];
            for &c in minpoly.iter().rev() {
                acc = poly_mul_mod(&acc, &r, minpoly, modulus);
                acc[0] = add_mod(acc[0], c, modulus);
            }
            acc
        };
        if check.iter().any(|&c| c != 0) {
            return Err(Error::InvalidParams(
                "Frobenius root failed to lift (minimal polynomial not separable?)".into(),
            ));
        }
        r.resize(f, 0);
        Ok(r)
    }

    pub fn p(&self) -> u64 {
        self.p
    }
    pub fn n(&self) -> u32 {
        self.n
    }
    pub fn f(&self) -> usize {
        self.f
    }
    /// pⁿ as a u64.
    pub fn modulus(&self) -> u64 {
        self.modulus
    }
    pub fn minpoly(&self) -> &[u64] {
        &self.minpoly
    }

    /// Same field data at a different torsion exponent; the minimal
    /// polynomial is carried over by its canonical representatives.
    pub fn with_torsion(self: &Arc<Self>, n: u32) -> Result<Arc<RingParams>> {
        let mp = if self.f == 1 { None } else { Some(self.minpoly.clone()) };
        RingParams::new(self.p, n, self.f, mp)
    }
}

/// Inverse of a unit in the quotient ring: Fermat inverse mod p, then
/// quadratic Newton refinement at the full modulus.
fn poly_unit_inverse(c: &[u64], minpoly: &[u64], p: u64, modulus: u64) -> Result<Vec<u64>> {
    let f = minpoly.len() - 1;
    if c.iter().all(|&x| x % p == 0) {
        return Err(Error::NotAUnit("element reduces to 0 mod p".into()));
    }
    let q_minus_2 = p.pow(f as u32) - 2;
    let cp: Vec<u64> = c.iter().map(|&x| x % p).collect();
    let mut x = poly_pow_mod(&cp, q_minus_2, minpoly, p);
    x.resize(f, 0);
    loop {
        let cx = poly_mul_mod(c, &x, minpoly, modulus);
        if cx.iter().enumerate().all(|(i, &v)| v == if i == 0 { 1 } else { 0 }) {
            return Ok(x);
        }
        // x ← x(2 − cx)
        let mut two_minus = cx;
        for (i, v) in two_minus.iter_mut().enumerate() {
            *v = sub_mod(if i == 0 { 2 } else { 0 }, *v, modulus);
        }
        x = poly_mul_mod(&x, &two_minus, minpoly, modulus);
    }
}

// ---------------------------------------------------------------- CoeffElement

/// An element of W_n(F_q): a polynomial representative of degree < f in the
/// generator g, coefficients mod pⁿ.
#[derive(Clone, PartialEq, Eq)]
pub struct CoeffElement {
    params: Arc<RingParams>,
    c: Vec<u64>,
}

impl fmt::Debug for CoeffElement {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(fm, "{}", crate::textio::format_coeff(self))
    }
}

impl CoeffElement {
    pub fn zero(params: &Arc<RingParams>) -> Self {
        CoeffElement { params: params.clone(), c: vec![0; params.f] }
    }

    pub fn one(params: &Arc<RingParams>) -> Self {
        Self::from_residue(params, 1)
    }

    /// The generator g itself (0 when f = 1).
    pub fn gen(params: &Arc<RingParams>) -> Self {
        let mut c = vec![0; params.f];
        if params.f > 1 {
            c[1] = 1;
        }
        CoeffElement { params: params.clone(), c }
    }

    pub fn from_residue(params: &Arc<RingParams>, a: u64) -> Self {
        let mut c = vec![0; params.f];
        c[0] = a % params.modulus;
        CoeffElement { params: params.clone(), c }
    }

    /// Signed convenience constructor.
    pub fn from_int(params: &Arc<RingParams>, a: i64) -> Self {
        let m = params.modulus as i128;
        let r = ((a as i128 % m) + m) % m;
        Self::from_residue(params, r as u64)
    }

    /// From little-endian polynomial coefficients (any length; reduced).
    pub fn from_poly(params: &Arc<RingParams>, coeffs: &[u64]) -> Self {
        let reduced: Vec<u64> = coeffs.iter().map(|&x| x % params.modulus).collect();
        let one = {
            let mut v = vec![0u64; params.f];
            v[0] = 1;
            v
        };
        let c = poly_mul_mod(&reduced, &one, &params.minpoly, params.modulus);
        CoeffElement { params: params.clone(), c }
    }

    pub fn params(&self) -> &Arc<RingParams> {
        &self.params
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|&x| x == 0)
    }

    /// Nonzero mod p, i.e. a unit of W_n(F_q).
    pub fn is_unit(&self) -> bool {
        self.c.iter().any(|&x| x % self.params.p != 0)
    }

    fn assert_same(&self, other: &Self) {
        assert_eq!(
            self.params, other.params,
            "mixed coefficient rings in one operation"
        );
    }

    pub fn add(&self, other: &Self) -> Self {
        self.assert_same(other);
        let m = self.params.modulus;
        let c = self.c.iter().zip(&other.c).map(|(&a, &b)| add_mod(a, b, m)).collect();
        CoeffElement { params: self.params.clone(), c }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.assert_same(other);
        let m = self.params.modulus;
        let c = self.c.iter().zip(&other.c).map(|(&a, &b)| sub_mod(a, b, m)).collect();
        CoeffElement { params: self.params.clone(), c }
    }

    pub fn neg(&self) -> Self {
        let m = self.params.modulus;
        let c = self.c.iter().map(|&a| sub_mod(0, a, m)).collect();
        CoeffElement { params: self.params.clone(), c }
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.assert_same(other);
        let c = poly_mul_mod(&self.c, &other.c, &self.params.minpoly, self.params.modulus);
        CoeffElement { params: self.params.clone(), c }
    }

    pub fn scale(&self, a: u64) -> Self {
        let m = self.params.modulus;
        let c = self.c.iter().map(|&x| mul_mod(x, a, m)).collect();
        CoeffElement { params: self.params.clone(), c }
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut acc = Self::one(&self.params);
        let mut b = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&b);
            }
            b = b.mul(&b);
            e >>= 1;
        }
        acc
    }

    /// Exact division by p^k on canonical representatives; `None` when some
    /// coefficient is not divisible.
    pub fn div_exact_p(&self, k: u32) -> Option<Self> {
        let pk = self.params.p.checked_pow(k)?;
        let mut c = Vec::with_capacity(self.c.len());
        for &x in &self.c {
            if x % pk != 0 {
                return None;
            }
            c.push(x / pk);
        }
        Some(CoeffElement { params: self.params.clone(), c })
    }

    /// Minimum p-valuation over the coefficients (n for the zero element).
    pub fn valuation(&self) -> u32 {
        self.c
            .iter()
            .map(|&x| vp(x, self.params.p, self.params.n))
            .min()
            .unwrap_or(self.params.n)
    }

    /// Reduce into a ring with smaller torsion exponent.
    pub fn reduce_to(&self, params: &Arc<RingParams>) -> Self {
        assert!(params.n <= self.params.n && params.p == self.params.p && params.f == self.params.f);
        let c = self.c.iter().map(|&x| x % params.modulus).collect();
        CoeffElement { params: params.clone(), c }
    }
}

// ---------------------------------------------------------------- ring operations

/// c⁻¹ mod pⁿ; fails when c ≡ 0 mod p.
pub fn coeff_invert(c: &CoeffElement) -> Result<CoeffElement> {
    let p = c.params.p;
    let inv = poly_unit_inverse(&c.c, &c.params.minpoly, p, c.params.modulus)?;
    Ok(CoeffElement { params: c.params.clone(), c: inv })
}

/// The Frobenius σ, evaluated through the precomputed image of g.
pub fn frobenius_sigma(c: &CoeffElement) -> CoeffElement {
    let params = &c.params;
    if params.f == 1 {
        return c.clone();
    }
    let s = CoeffElement { params: params.clone(), c: params.sigma_gen.clone() };
    // Horner: c(σ(g)).
    let mut acc = CoeffElement::zero(params);
    for &coef in c.c.iter().rev() {
        acc = acc.mul(&s);
        acc.c[0] = add_mod(acc.c[0], coef, params.modulus);
    }
    acc
}

/// σ^j.
pub fn sigma_pow(c: &CoeffElement, j: usize) -> CoeffElement {
    let mut r = c.clone();
    for _ in 0..(j % c.params.f) {
        r = frobenius_sigma(&r);
    }
    r
}

/// Teichmüller lift: the unique solution of x^q = x reducing to the given
/// residue mod p.  Input residue as little-endian coefficients mod p.
pub fn teichmuller(params: &Arc<RingParams>, residue: &[u64]) -> CoeffElement {
    let q: u64 = params.p.pow(params.f as u32);
    let mut x = CoeffElement::from_poly(params, residue);
    // x ↦ x^q gains one p-digit of stability per step.
    for _ in 0..params.n + 1 {
        let next = x.pow(q);
        if next == x {
            break;
        }
        x = next;
    }
    debug_assert_eq!(x.pow(q), x, "Teichmuller iteration must reach a fixed point");
    x
}

/// Tr(c) = Σ_{j<f} σ^j(c) ∈ ℤ/pⁿ.
pub fn trace_to_base(c: &CoeffElement) -> u64 {
    let mut acc = CoeffElement::zero(&c.params);
    let mut t = c.clone();
    for _ in 0..c.params.f {
        acc = acc.add(&t);
        t = frobenius_sigma(&t);
    }
    debug_assert!(
        acc.c.iter().skip(1).all(|&x| x == 0),
        "trace must land in the base ring"
    );
    acc.c[0]
}

/// The p-adic logarithm of a unit u, as a value mod p^{n + extra_precision}.
///
/// log u := log⟨u⟩ with ⟨u⟩ = u·ω(u mod p)⁻¹ ∈ 1 + pW, evaluated by the
/// alternating series Σ (−1)^{k+1} y^k/k at an internally lifted modulus so
/// that every retained term is exact.  The result depends on the canonical
/// representative of u, as any computation past the input precision must.
pub fn padic_log(u: &CoeffElement, extra_precision: u32) -> Result<CoeffElement> {
    if !u.is_unit() {
        return Err(Error::NotAUnit("padic_log of a non-unit".into()));
    }
    let p = u.params.p;
    let m = u.params.n + extra_precision;
    // Series term k contributes v_p(y^k/k) ≥ k − log_p k; pick kmax so that
    // everything beyond is ≥ m, and guard digits to absorb the divisions.
    let mut kmax = m as u64;
    while (kmax as u32) < m + ilog_p(kmax.max(1), p) + 1 {
        kmax += 1;
    }
    let guard = ilog_p(kmax, p) + 1;
    let big = u.params.with_torsion(m + guard)?;

    let u_big = CoeffElement::from_poly(&big, &u.c);
    let resid: Vec<u64> = u.c.iter().map(|&x| x % p).collect();
    let omega = teichmuller(&big, &resid);
    let principal = u_big.mul(&coeff_invert(&omega)?);
    let y = principal.sub(&CoeffElement::one(&big));
    debug_assert!(y.valuation() >= 1, "principal unit must be ≡ 1 mod p");

    let mut acc = CoeffElement::zero(&big);
    let mut ypow = y.clone();
    for k in 1..=kmax {
        let s = vp(k, p, m + guard);
        let k_unit = k / p.pow(s);
        let term = ypow
            .div_exact_p(s)
            .expect("y^k is divisible by the p-part of k");
        let term = term.mul(&CoeffElement::from_residue(
            &big,
            inv_mod_pk(k_unit % big.modulus, p, big.modulus),
        ));
        if k % 2 == 1 {
            acc = acc.add(&term);
        } else {
            acc = acc.sub(&term);
        }
        ypow = ypow.mul(&y);
        if ypow.valuation() >= m + guard {
            break;
        }
    }
    let out = u.params.with_torsion(m)?;
    Ok(acc.reduce_to(&out))
}

fn ilog_p(mut k: u64, p: u64) -> u32 {
    let mut l = 0;
    while k >= p {
        k /= p;
        l += 1;
    }
    l
}

// ----------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn zp(p: u64, n: u32) -> Arc<RingParams> {
        RingParams::new(p, n, 1, None).unwrap()
    }

    /// F₉-style parameters with g² = g + 1.
    fn f9(n: u32) -> Arc<RingParams> {
        let m = 3u64.pow(n);
        RingParams::new(3, n, 2, Some(vec![m - 1, m - 1, 1])).unwrap()
    }

    #[test]
    fn rejects_bad_params() {
        assert!(matches!(RingParams::new(2, 1, 1, None), Err(Error::InvalidParams(_))));
        assert!(matches!(RingParams::new(9, 1, 1, None), Err(Error::InvalidParams(_))));
        assert!(matches!(RingParams::new(3, 0, 1, None), Err(Error::InvalidParams(_))));
        // x² + 1 is reducible mod 5 (it is (x+2)(x+3)).
        assert!(matches!(
            RingParams::new(5, 1, 2, Some(vec![1, 0, 1])),
            Err(Error::InvalidParams(_))
        ));
        assert!(RingParams::new(3, 1, 2, Some(vec![1, 0, 1])).is_ok());
    }

    #[test]
    fn invert_known_values() {
        let r = zp(3, 2);
        let two = CoeffElement::from_residue(&r, 2);
        assert_eq!(
            coeff_invert(&two).unwrap().coeffs(),
            &[5],
            "2·5 = 10 ≡ 1 mod 9"
        );
        let three = CoeffElement::from_residue(&r, 3);
        assert!(matches!(coeff_invert(&three), Err(Error::NotAUnit(_))));

        let r9 = f9(1);
        let g = CoeffElement::gen(&r9);
        let inv = coeff_invert(&g).unwrap();
        assert_eq!(inv.coeffs(), &[2, 1], "g·(g+2) = g²+2g = 3g+1 ≡ 1 in F₉");
        assert_eq!(g.mul(&inv), CoeffElement::one(&r9));
    }

    #[test]
    fn frobenius_known_values() {
        let r = zp(5, 3);
        let c = CoeffElement::from_residue(&r, 77);
        assert_eq!(frobenius_sigma(&c), c, "σ is the identity for f = 1");

        let r9 = f9(1);
        let g = CoeffElement::gen(&r9);
        assert_eq!(frobenius_sigma(&g).coeffs(), &[1, 2], "σ(g) = g³ = 2g+1 in F₉");
    }

    #[test]
    fn frobenius_order_and_automorphism() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [1u32, 2, 3] {
            let r = f9(n);
            for _ in 0..20 {
                let a = CoeffElement::from_poly(
                    &r,
                    &[rng.random_range(0..r.modulus()), rng.random_range(0..r.modulus())],
                );
                let b = CoeffElement::from_poly(
                    &r,
                    &[rng.random_range(0..r.modulus()), rng.random_range(0..r.modulus())],
                );
                assert_eq!(sigma_pow(&a, 2), a, "σ^f = id");
                assert_eq!(
                    frobenius_sigma(&a.mul(&b)),
                    frobenius_sigma(&a).mul(&frobenius_sigma(&b)),
                    "σ is multiplicative"
                );
                assert_eq!(
                    frobenius_sigma(&a.add(&b)),
                    frobenius_sigma(&a).add(&frobenius_sigma(&b)),
                    "σ is additive"
                );
            }
        }
    }

    #[test]
    fn teichmuller_known_values() {
        let r = zp(3, 2);
        assert!(teichmuller(&r, &[0]).is_zero());
        assert_eq!(teichmuller(&r, &[1]), CoeffElement::one(&r));
        assert_eq!(teichmuller(&r, &[2]).coeffs(), &[8], "ω(2) = 8 mod 9 since 2⁹ ≡ 8");

        let r25 = zp(5, 2);
        assert_eq!(teichmuller(&r25, &[2]).coeffs(), &[7], "ω(2) = 7 mod 25");
        assert_eq!(teichmuller(&r25, &[3]).coeffs(), &[18], "ω(3) = 18 mod 25");
    }

    #[test]
    fn teichmuller_is_multiplicative_on_all_of_f9() {
        let r = f9(2);
        let q = 9u64;
        let elems: Vec<Vec<u64>> = (0..3u64)
            .flat_map(|a| (0..3u64).map(move |b| vec![a, b]))
            .collect();
        for x in &elems {
            let wx = teichmuller(&r, x);
            assert_eq!(wx.pow(q), wx, "ω lands on the q-th power fixed locus");
            for y in &elems {
                let wy = teichmuller(&r, y);
                let xy = CoeffElement::from_poly(&r, x).mul(&CoeffElement::from_poly(&r, y));
                let resid: Vec<u64> = xy.coeffs().iter().map(|&c| c % 3).collect();
                assert_eq!(
                    teichmuller(&r, &resid),
                    wx.mul(&wy),
                    "ω(xy) = ω(x)ω(y) on F₉, x={x:?} y={y:?}"
                );
            }
        }
    }

    #[test]
    fn trace_known_values() {
        let r9 = f9(1);
        assert_eq!(trace_to_base(&CoeffElement::one(&r9)), 2, "Tr(1) = f");
        assert_eq!(trace_to_base(&CoeffElement::gen(&r9)), 1, "Tr(g) = g + (2g+1) = 3g+1 = 1");

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let r = f9(2);
        for _ in 0..25 {
            let a = CoeffElement::from_poly(
                &r,
                &[rng.random_range(0..r.modulus()), rng.random_range(0..r.modulus())],
            );
            assert_eq!(
                trace_to_base(&frobenius_sigma(&a)),
                trace_to_base(&a),
                "trace is σ-invariant"
            );
        }
    }

    #[test]
    fn padic_log_known_values() {
        let r625 = zp(5, 4);
        let six = CoeffElement::from_residue(&r625, 6);
        let l = padic_log(&six, 0).unwrap();
        assert_eq!(l.coeffs(), &[555], "log 6 = 5 − 25/2 + 125/3 ≡ 555 mod 625");

        let r27 = zp(3, 3);
        let two = CoeffElement::from_residue(&r27, 2);
        let l = padic_log(&two, 0).unwrap();
        assert_eq!(l.coeffs(), &[24], "log 2 = log(1−3) ≡ 24 mod 27");

        let one = CoeffElement::one(&r27);
        assert!(padic_log(&one, 0).unwrap().is_zero(), "log 1 = 0");
        assert!(matches!(
            padic_log(&CoeffElement::from_residue(&r27, 6), 0),
            Err(Error::NotAUnit(_))
        ));
    }

    #[test]
    fn padic_log_lifts_precision() {
        // Requesting extra precision from an exact integer input must agree
        // with computing directly at the bigger modulus.
        let small = zp(3, 1);
        let two = CoeffElement::from_residue(&small, 2);
        let lifted = padic_log(&two, 2).unwrap();
        assert_eq!(lifted.params().modulus(), 27);
        assert_eq!(lifted.coeffs(), &[24]);
    }

    #[test]
    fn padic_log_is_additive() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (p, n) in [(3u64, 3u32), (5, 2), (7, 2)] {
            let r = zp(p, n);
            for _ in 0..20 {
                let u = loop {
                    let c = CoeffElement::from_residue(&r, rng.random_range(1..r.modulus()));
                    if c.is_unit() {
                        break c;
                    }
                };
                let v = loop {
                    let c = CoeffElement::from_residue(&r, rng.random_range(1..r.modulus()));
                    if c.is_unit() {
                        break c;
                    }
                };
                let lu = padic_log(&u, 0).unwrap();
                let lv = padic_log(&v, 0).unwrap();
                let luv = padic_log(&u.mul(&v), 0).unwrap();
                assert_eq!(
                    luv,
                    lu.add(&lv),
                    "log(uv) = log u + log v for p={p}, n={n}"
                );
            }
        }
        // and over F₉ with n = 2
        let r = f9(2);
        for _ in 0..10 {
            let mut rng2 = ChaCha8Rng::seed_from_u64(rng.random());
            let mk = |rng: &mut ChaCha8Rng| loop {
                let c = CoeffElement::from_poly(
                    &r,
                    &[rng.random_range(0..r.modulus()), rng.random_range(0..r.modulus())],
                );
                if c.is_unit() {
                    break c;
                }
            };
            let u = mk(&mut rng2);
            let v = mk(&mut rng2);
            assert_eq!(
                padic_log(&u.mul(&v), 0).unwrap(),
                padic_log(&u, 0).unwrap().add(&padic_log(&v, 0).unwrap())
            );
        }
    }

    #[test]
    fn division_and_valuation() {
        let r = zp(3, 3);
        let x = CoeffElement::from_residue(&r, 18);
        assert_eq!(x.valuation(), 2);
        assert_eq!(x.div_exact_p(1).unwrap().coeffs(), &[6]);
        assert!(x.div_exact_p(3).is_none(), "18 = 2·9 is not divisible by 27");
        assert_eq!(CoeffElement::zero(&r).valuation(), 3);
    }
}
