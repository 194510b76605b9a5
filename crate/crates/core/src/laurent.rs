//! The working Cohen ring mod pⁿ: truncated Laurent series W_n(F_q)((π))
//! with explicit precision, the Frobenius and Γ ring actions, and the residue
//! map on differential forms.
//!
//! An element is a finite coefficient map i ↦ aᵢ together with a precision
//! tag: `prec = Some(h)` means the element is only known modulo O(π^{h+1}),
//! `prec = None` means it is exact (a Laurent polynomial).  Arithmetic never
//! reports coefficients beyond what the inputs guarantee; the multiplication
//! rule is hi = min(hi_x + lo_y, hi_y + lo_x).
//!
//! The two ring endomorphisms are fixed by the cyclotomic choice π = [ε]−1:
//!
//!   φ: aᵢ ↦ σ(aᵢ),  π ↦ (1+π)^p − 1        (so φ(π) ≡ π^p mod p),
//!   γ: aᵢ fixed,    π ↦ (1+π)^a − 1         (a = χ(γ), a primitive root mod p²).
//!
//! Negative powers of φ(π) and γ(π) are produced by `series_invert`, which
//! factors out the leading unit of the mod-p reduction and sums the geometric
//! series of the (p, π)-topologically nilpotent remainder.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::coeff::{self, frobenius_sigma, CoeffElement, RingParams};
use crate::error::Error;
use crate::Result;

/// Default guaranteed precision for operations that must truncate an
/// infinite series and have no caller-provided target (exponent window
/// (−32, 32) by default, doubled on demand by the cohomology engine).
pub const DEFAULT_PREC: i64 = 32;

// ---------------------------------------------------------------- LaurentElement

/// Truncated Laurent series over W_n(F_q).
#[derive(Clone, PartialEq, Eq)]
pub struct LaurentElement {
    params: Arc<RingParams>,
    coeffs: BTreeMap<i64, CoeffElement>,
    /// Known modulo O(π^{prec+1}); `None` means exact.
    prec: Option<i64>,
}

impl fmt::Debug for LaurentElement {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(fm, "{}", crate::textio::format_series(self))
    }
}

const INF: i64 = i64::MAX / 4;

fn min_prec(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (None, None) => None,
        (Some(x), None) | (None, Some(x)) => Some(x),
        (Some(x), Some(y)) => Some(x.min(y)),
    }
}

impl LaurentElement {
    pub fn zero(params: &Arc<RingParams>) -> Self {
        LaurentElement { params: params.clone(), coeffs: BTreeMap::new(), prec: None }
    }

    pub fn one(params: &Arc<RingParams>) -> Self {
        Self::monomial(params, 0, CoeffElement::one(params))
    }

    pub fn constant(c: CoeffElement) -> Self {
        let params = c.params().clone();
        Self::monomial(&params, 0, c)
    }

    pub fn monomial(params: &Arc<RingParams>, i: i64, c: CoeffElement) -> Self {
        let mut coeffs = BTreeMap::new();
        if !c.is_zero() {
            coeffs.insert(i, c);
        }
        LaurentElement { params: params.clone(), coeffs, prec: None }
    }

    pub fn pi_pow(params: &Arc<RingParams>, i: i64) -> Self {
        Self::monomial(params, i, CoeffElement::one(params))
    }

    /// Integer polynomial Σ cᵢ πⁱ from (exponent, signed value) pairs.
    pub fn from_int_terms(params: &Arc<RingParams>, terms: &[(i64, i64)]) -> Self {
        let mut out = Self::zero(params);
        for &(i, v) in terms {
            out = out.add(&Self::monomial(params, i, CoeffElement::from_int(params, v)));
        }
        out
    }

    pub fn params(&self) -> &Arc<RingParams> {
        &self.params
    }

    pub fn coeffs(&self) -> &BTreeMap<i64, CoeffElement> {
        &self.coeffs
    }

    pub fn coeff_at(&self, i: i64) -> CoeffElement {
        self.coeffs.get(&i).cloned().unwrap_or_else(|| CoeffElement::zero(&self.params))
    }

    /// Precision tag: the element is known modulo O(π^{prec+1}); `None` = exact.
    pub fn prec(&self) -> Option<i64> {
        self.prec
    }

    pub fn is_exact(&self) -> bool {
        self.prec.is_none()
    }

    /// No visible coefficients (for a windowed element this only says the
    /// element is O(π^{prec+1})).
    pub fn is_visibly_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Known zero: exact and without coefficients.
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty() && self.prec.is_none()
    }

    /// The guaranteed window (lo, hi) as used in precision bookkeeping:
    /// lo is the lowest visible exponent (or hi+1 for a visibly zero
    /// element), hi the precision bound.  Exact elements report hi = lo of
    /// the sentinel-free kind via `prec() == None`.
    pub fn window(&self) -> (i64, i64) {
        let hi = self.prec.unwrap_or(INF);
        let lo = self.coeffs.keys().next().copied().unwrap_or(hi.saturating_add(1).min(INF));
        (lo, hi)
    }

    /// Lowest visible exponent, if any coefficient is nonzero.
    pub fn lo(&self) -> Option<i64> {
        self.coeffs.keys().next().copied()
    }

    fn lo_eff(&self) -> i64 {
        self.window().0
    }

    fn hi_eff(&self) -> i64 {
        self.prec.unwrap_or(INF)
    }

    fn normalized(mut self) -> Self {
        if let Some(h) = self.prec {
            self.coeffs.retain(|&i, _| i <= h);
        }
        self.coeffs.retain(|_, c| !c.is_zero());
        self
    }

    /// Forget coefficients above `hi` and cap the precision there.
    pub fn truncated(&self, hi: i64) -> Self {
        let mut out = self.clone();
        out.prec = Some(min_prec(self.prec, Some(hi)).unwrap());
        out.normalized()
    }

    /// Re-tag an exact element with a finite precision (no-op on windowed
    /// elements with smaller precision).
    pub fn with_prec(&self, prec: Option<i64>) -> Self {
        let mut out = self.clone();
        out.prec = min_prec(self.prec, prec);
        out.normalized()
    }

    fn assert_same(&self, other: &Self) {
        assert_eq!(self.params, other.params, "mixed ring parameters");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.assert_same(other);
        let mut coeffs = self.coeffs.clone();
        for (&i, c) in &other.coeffs {
            let e = coeffs.entry(i).or_insert_with(|| CoeffElement::zero(&self.params));
            *e = e.add(c);
        }
        LaurentElement { params: self.params.clone(), coeffs, prec: min_prec(self.prec, other.prec) }
            .normalized()
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        let coeffs = self.coeffs.iter().map(|(&i, c)| (i, c.neg())).collect();
        LaurentElement { params: self.params.clone(), coeffs, prec: self.prec }
    }

    pub fn scale(&self, c: &CoeffElement) -> Self {
        let coeffs = self.coeffs.iter().map(|(&i, a)| (i, a.mul(c))).collect();
        LaurentElement { params: self.params.clone(), coeffs, prec: self.prec }.normalized()
    }

    pub fn scale_int(&self, v: i64) -> Self {
        self.scale(&CoeffElement::from_int(&self.params, v))
    }

    /// Multiply by πᵏ (exact shift).
    pub fn shift(&self, k: i64) -> Self {
        let coeffs = self.coeffs.iter().map(|(&i, c)| (i + k, c.clone())).collect();
        LaurentElement { params: self.params.clone(), coeffs, prec: self.prec.map(|h| h + k) }
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.assert_same(other);
        let prec = match (self.prec, other.prec) {
            (None, None) => None,
            _ => Some(
                (self.hi_eff().saturating_add(other.lo_eff()))
                    .min(other.hi_eff().saturating_add(self.lo_eff()))
                    .min(INF),
            ),
        };
        let hi_keep = prec.unwrap_or(INF);
        let a = FlatSeries::from_element(self);
        let b = FlatSeries::from_element(other);
        let prod = FlatSeries::mul(&a, &b, &self.params, i64::MIN / 4, hi_keep);
        let mut out = prod.into_element(&self.params);
        out.prec = prec;
        out.normalized()
    }

    pub fn pow(&self, e: u64) -> Self {
        let mut acc = Self::one(&self.params);
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

    /// Unit test: the reduction mod p is a nonzero element of F_q((π)).
    pub fn is_visibly_unit(&self) -> bool {
        self.mod_p_valuation().is_some()
    }

    /// Lowest exponent whose coefficient is a unit of W_n(F_q) (that is, the
    /// π-valuation of the reduction mod p), if one is visible.
    pub fn mod_p_valuation(&self) -> Option<i64> {
        self.coeffs
            .iter()
            .find(|(_, c)| c.is_unit())
            .map(|(&i, _)| i)
    }

    /// Minimum of i + (p−1)·v_p(aᵢ) over visible monomials, with the
    /// coefficient considered modulo p^cap.  Returns `None` when nothing is
    /// visible at that torsion level.
    pub fn weight_low(&self, cap: u32) -> Option<i64> {
        let p = self.params.p();
        let mut best: Option<i64> = None;
        for (&i, c) in &self.coeffs {
            for (t, &x) in c.coeffs().iter().enumerate() {
                let _ = t;
                let v = coeff::vp(x, p, self.params.n());
                if v >= cap {
                    continue;
                }
                let w = i + (p as i64 - 1) * v as i64;
                best = Some(best.map_or(w, |b: i64| b.min(w)));
            }
        }
        best
    }

    /// Reduce every coefficient mod p^k (the stored representative of an
    /// element of a p^k-torsion coordinate).
    pub fn reduce_mod_pk(&self, k: u32) -> Self {
        let pk = self.params.p().pow(k.min(self.params.n()));
        let coeffs = self
            .coeffs
            .iter()
            .filter_map(|(&i, c)| {
                let r = CoeffElement::from_poly(
                    &self.params,
                    &c.coeffs().iter().map(|&v| v % pk).collect::<Vec<_>>(),
                );
                (!r.is_zero()).then_some((i, r))
            })
            .collect();
        LaurentElement { params: self.params.clone(), coeffs, prec: self.prec }
    }

    /// Divide every coefficient exactly by p^k.
    pub fn div_exact_p(&self, k: u32) -> Result<Self> {
        let mut coeffs = BTreeMap::new();
        for (&i, c) in &self.coeffs {
            let d = c.div_exact_p(k).ok_or_else(|| {
                Error::TorsionMismatch(format!(
                    "coefficient at π^{i} is not divisible by p^{k}"
                ))
            })?;
            if !d.is_zero() {
                coeffs.insert(i, d);
            }
        }
        Ok(LaurentElement { params: self.params.clone(), coeffs, prec: self.prec })
    }

    /// d/dπ, used by the exactness test of the residue.
    pub fn derivative(&self) -> Self {
        let mut out = Self::zero(&self.params);
        for (&i, c) in &self.coeffs {
            out.coeffs.insert(i - 1, c.scale_signed(i));
        }
        out.prec = self.prec.map(|h| h - 1);
        out.normalized()
    }

    /// Coefficient-wise equality of everything both sides guarantee, with
    /// coefficients compared mod p^cap.
    pub fn agrees_with(&self, other: &Self, cap: u32) -> bool {
        let h = min_prec(self.prec, other.prec);
        let pk = self.params.p().pow(cap.min(self.params.n()));
        let all: std::collections::BTreeSet<i64> = self
            .coeffs
            .keys()
            .chain(other.coeffs.keys())
            .copied()
            .filter(|&i| h.map_or(true, |hh| i <= hh))
            .collect();
        for i in all {
            let a = self.coeff_at(i);
            let b = other.coeff_at(i);
            if a.coeffs()
                .iter()
                .zip(b.coeffs())
                .any(|(&x, &y)| x % pk != y % pk)
            {
                return false;
            }
        }
        true
    }
}

impl CoeffElement {
    fn scale_signed(&self, v: i64) -> CoeffElement {
        let m = self.params().modulus() as i128;
        let r = (((v as i128) % m) + m) % m;
        self.scale(r as u64)
    }
}

// ---------------------------------------------------------------- flat fast path

/// Dense coefficient block `[lo, hi]`, each exponent holding f residues.
/// This is the allocation-free representation used by products, substitution
/// and the cohomology engine.
#[derive(Clone)]
pub(crate) struct FlatSeries {
    pub lo: i64,
    pub c: Vec<u64>, // length (hi - lo + 1) * f
}

impl FlatSeries {
    pub fn len_exps(&self, f: usize) -> i64 {
        (self.c.len() / f) as i64
    }

    pub fn from_element(x: &LaurentElement) -> FlatSeries {
        let f = x.params.f();
        match (x.coeffs.keys().next(), x.coeffs.keys().next_back()) {
            (Some(&lo), Some(&hi)) => {
                let mut c = vec![0u64; ((hi - lo + 1) as usize) * f];
                for (&i, a) in &x.coeffs {
                    let base = ((i - lo) as usize) * f;
                    c[base..base + f].copy_from_slice(a.coeffs());
                }
                FlatSeries { lo, c }
            }
            _ => FlatSeries { lo: 0, c: vec![] },
        }
    }

    pub fn into_element(self, params: &Arc<RingParams>) -> LaurentElement {
        let f = params.f();
        let mut coeffs = BTreeMap::new();
        for e in 0..self.len_exps(f) {
            let base = (e as usize) * f;
            let slice = &self.c[base..base + f];
            if slice.iter().any(|&v| v != 0) {
                coeffs.insert(self.lo + e, CoeffElement::from_poly(params, slice));
            }
        }
        LaurentElement { params: params.clone(), coeffs, prec: None }
    }

    /// Convolution with both factors exact, keeping exponents in
    /// `[lo_keep, hi_keep]`.  Coefficient products are accumulated as raw
    /// degree-(2f−2) polynomials in u128 and reduced once per output slot.
    pub fn mul(a: &FlatSeries, b: &FlatSeries, params: &Arc<RingParams>, lo_keep: i64, hi_keep: i64) -> FlatSeries {
        let f = params.f();
        let modulus = params.modulus();
        if a.c.is_empty() || b.c.is_empty() {
            return FlatSeries { lo: 0, c: vec![] };
        }
        let la = a.len_exps(f);
        let lb = b.len_exps(f);
        let lo = (a.lo + b.lo).max(lo_keep);
        let hi = (a.lo + la - 1 + b.lo + lb - 1).min(hi_keep);
        if hi < lo {
            return FlatSeries { lo: 0, c: vec![] };
        }
        let width = 2 * f - 1;
        let mut acc = vec![0u128; ((hi - lo + 1) as usize) * width];
        for ia in 0..la {
            let ea = a.lo + ia;
            let abase = (ia as usize) * f;
            if a.c[abase..abase + f].iter().all(|&v| v == 0) {
                continue;
            }
            // b-exponent range contributing inside [lo, hi]
            let jb_lo = (lo - ea - b.lo).max(0);
            let jb_hi = (hi - ea - b.lo).min(lb - 1);
            for jb in jb_lo..=jb_hi {
                let eb = b.lo + jb;
                let bbase = (jb as usize) * f;
                let out = ((ea + eb - lo) as usize) * width;
                for s in 0..f {
                    let av = a.c[abase + s];
                    if av == 0 {
                        continue;
                    }
                    for t in 0..f {
                        let bv = b.c[bbase + t];
                        if bv == 0 {
                            continue;
                        }
                        acc[out + s + t] += ((av as u128) * (bv as u128)) % (modulus as u128);
                    }
                }
            }
        }
        // reduce each slot by the minimal polynomial
        let minpoly = params.minpoly();
        let mut c = vec![0u64; ((hi - lo + 1) as usize) * f];
        let mut slot = vec![0u64; width];
        for e in 0..(hi - lo + 1) as usize {
            let base = e * width;
            for k in 0..width {
                slot[k] = (acc[base + k] % modulus as u128) as u64;
            }
            for k in (f..width).rev() {
                let v = slot[k];
                if v == 0 {
                    continue;
                }
                slot[k] = 0;
                for (t, &mt) in minpoly.iter().enumerate().take(f) {
                    let idx = k - f + t;
                    slot[idx] = coeff::sub_mod(slot[idx], coeff::mul_mod(v, mt, modulus), modulus);
                }
            }
            c[e * f..e * f + f].copy_from_slice(&slot[..f]);
        }
        FlatSeries { lo, c }
    }
}

// ---------------------------------------------------------------- series operations

/// x·y with the window rule hi = min(hi_x + lo_y, hi_y + lo_x).
pub fn series_mul(x: &LaurentElement, y: &LaurentElement) -> LaurentElement {
    x.mul(y)
}

/// Inverse of a unit, guaranteed up to the window implied by x (its own
/// precision, or the default (−32, 32) window for exact x).
pub fn series_invert(x: &LaurentElement) -> Result<LaurentElement> {
    let hi = x.prec().unwrap_or(DEFAULT_PREC);
    series_invert_to(x, hi)
}

/// Inverse of a unit with the result guaranteed modulo O(π^{hi+1}).
///
/// Writes x = c·π^v·(1 + t) with c·π^v the lowest unit monomial of the mod-p
/// reduction; every monomial of t then carries either a positive power of π
/// or a positive power of p, so the geometric series Σ (−t)^k terminates on
/// any finite window.
pub fn series_invert_to(x: &LaurentElement, hi: i64) -> Result<LaurentElement> {
    let params = x.params().clone();
    let n = params.n() as i64;
    let v = x
        .mod_p_valuation()
        .ok_or_else(|| Error::NotAUnit("series reduces to 0 mod p on its window".into()))?;
    let c = x.coeff_at(v);
    let c_inv = coeff::coeff_invert(&c)?;

    // t = c⁻¹π^{-v}·x − 1; its monomials below exponent 0 are all divisible by p.
    let t = x.scale(&c_inv).shift(-v).sub(&LaurentElement::one(&params));
    let lo_t = t.lo().unwrap_or(0).min(0);
    // Each later factor of t can pull an exponent down by at most |lo_t|, and
    // at most n−1 p-divisible factors survive mod pⁿ.
    let work_hi = hi + v + (n - 1).max(0) * (-lo_t);

    let mut sum = LaurentElement::one(&params);
    let mut term = LaurentElement::one(&params);
    let span = (work_hi - lo_t + 2).max(2) as u64;
    let cap = 4 * (n as u64 + 1) * span + 64;
    let mut iter = 0u64;
    loop {
        term = term.mul(&t.neg()).truncated(work_hi);
        if term.is_visibly_zero() {
            break;
        }
        sum = sum.add(&term);
        iter += 1;
        if iter > cap {
            return Err(Error::NoConvergence(
                "geometric series for the inverse did not terminate".into(),
            ));
        }
    }
    let inv = sum.shift(-v).scale(&c_inv);
    // Precision: a perturbation of x above its window moves 1/x by
    // δx·x⁻¹·x̃⁻¹, and each inverse can dip lo_inv below zero.
    let prec = match x.prec() {
        None => Some(hi),
        Some(hx) => {
            let lo_inv = (-v + (n - 1).max(0) * lo_t).min(0);
            Some(hi.min(hx + 2 * lo_inv))
        }
    };
    Ok(inv.with_prec(prec))
}

/// (1+π)^a for a ≥ 0, exact (finite integer binomial expansion, computed by
/// square-and-multiply on exact polynomials).
pub fn one_plus_pi_pow(params: &Arc<RingParams>, a: u64) -> LaurentElement {
    LaurentElement::from_int_terms(params, &[(0, 1), (1, 1)]).pow(a)
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub(crate) enum CoeffTwist {
    Id,
    Sigma,
}

/// Σ tw(aᵢ)·uⁱ for u the exact image of π (lowest exponent 1), truncated so
/// everything up to `hi` is guaranteed.  An exact x without negative
/// exponents maps to an exact polynomial regardless of `hi`.  This is the
/// engine behind both ring actions.
pub(crate) fn substitute(
    x: &LaurentElement,
    u: &LaurentElement,
    hi: i64,
    twist: CoeffTwist,
) -> Result<LaurentElement> {
    let params = x.params().clone();
    assert!(u.is_exact() && u.lo().map_or(false, |l| l >= 1), "substitution target must be exact with π-valuation ≥ 1");
    let polynomial_case = x.is_exact() && x.lo().map_or(true, |l| l >= 0);
    // Images of unknown coefficients π^m (m > prec) have valuation ≥ m, so
    // the result precision is min(hi, prec); polynomials map exactly.
    let out_prec = if polynomial_case { None } else { Some(min_prec(x.prec(), Some(hi)).unwrap()) };
    let hi = if polynomial_case { INF } else { hi };

    let tw = |c: &CoeffElement| match twist {
        CoeffTwist::Id => c.clone(),
        CoeffTwist::Sigma => frobenius_sigma(c),
    };

    let mut out = LaurentElement::zero(&params);

    // Non-negative exponents: ascending incremental powers, truncation at hi
    // is sound because u has positive valuation.
    let pos_keys: Vec<i64> = x.coeffs.keys().copied().filter(|&i| i >= 0).collect();
    if let Some(&max_pos) = pos_keys.last() {
        let mut acc = LaurentElement::one(&params);
        let mut k = 0i64;
        for &i in &pos_keys {
            while k < i {
                acc = acc.mul(u);
                if hi < INF {
                    acc = acc.truncated(hi);
                }
                k += 1;
            }
            out = out.add(&acc.scale(&tw(&x.coeff_at(i))));
        }
        debug_assert_eq!(k, max_pos);
    }

    // Negative exponents: powers of u⁻¹ with a decreasing truncation
    // schedule, so that content dropped above the current bound can never
    // drift back under the final one.
    let neg_keys: Vec<i64> = x.coeffs.keys().copied().filter(|&i| i < 0).collect();
    if let Some(&deepest) = neg_keys.first() {
        let steps = -deepest;
        let n = params.n() as i64;
        let v = u.mod_p_valuation().expect("π-image must be a unit series");
        let lo_u = u.lo().unwrap();
        let drift = (v + (n - 1).max(0) * (v - lo_u.min(0))).max(1);
        let uinv = series_invert_to(u, hi + steps * drift)?;
        let mut acc = LaurentElement::one(&params);
        for k in 1..=steps {
            let bound = hi + (steps - k) * drift;
            acc = acc.mul(&uinv).truncated(bound);
            let i = -k;
            if let Some(c) = x.coeffs.get(&i) {
                out = out.add(&acc.scale(&tw(c)).truncated(hi));
            }
        }
    }

    Ok(out.with_prec(out_prec))
}

// ---------------------------------------------------------------- the two ring actions

/// Parameters of the Γ-action: a = χ(γ) for the chosen topological
/// generator γ.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ActionParams {
    a: u64,
}

impl ActionParams {
    /// a must be a primitive root modulo p² so that γ topologically
    /// generates Γ ≅ ℤ_p^× (p odd).
    pub fn new(a: u64, p: u64) -> Result<ActionParams> {
        if a < 2 {
            return Err(Error::InvalidParams("chi(gamma) must be an integer >= 2".into()));
        }
        let p2 = p * p;
        if a % p == 0 {
            return Err(Error::InvalidParams("chi(gamma) must be prime to p".into()));
        }
        // order of a mod p² must be p(p−1)
        let ord = p * (p - 1);
        let mut fac = Vec::new();
        let mut r = ord;
        let mut d = 2;
        while d * d <= r {
            if r % d == 0 {
                fac.push(d);
                while r % d == 0 {
                    r /= d;
                }
            }
            d += 1;
        }
        if r > 1 {
            fac.push(r);
        }
        for l in fac {
            if coeff::pow_mod(a, ord / l, p2) == 1 {
                return Err(Error::InvalidParams(format!(
                    "chi(gamma) = {a} is not a primitive root modulo {p}²"
                )));
            }
        }
        Ok(ActionParams { a })
    }

    pub fn a(&self) -> u64 {
        self.a
    }
}

/// φ(π) = (1+π)^p − 1 as an exact polynomial.
pub fn phi_pi(params: &Arc<RingParams>) -> LaurentElement {
    one_plus_pi_pow(params, params.p()).sub(&LaurentElement::one(params))
}

/// γ(π) = (1+π)^a − 1 as an exact polynomial.
pub fn gamma_pi(params: &Arc<RingParams>, act: ActionParams) -> LaurentElement {
    one_plus_pi_pow(params, act.a()).sub(&LaurentElement::one(params))
}

/// The Frobenius of the Laurent ring: σ on coefficients, π ↦ (1+π)^p − 1.
pub fn apply_phi(x: &LaurentElement) -> LaurentElement {
    apply_phi_to(x, x.prec().unwrap_or(DEFAULT_PREC)).expect("phi of a visible unit window")
}

/// Same, with an explicit guarantee target.
pub fn apply_phi_to(x: &LaurentElement, hi: i64) -> Result<LaurentElement> {
    substitute(x, &phi_pi(x.params()), hi, CoeffTwist::Sigma)
}

/// The Γ-action: coefficients fixed, π ↦ (1+π)^a − 1.
pub fn apply_gamma(x: &LaurentElement, act: ActionParams) -> LaurentElement {
    apply_gamma_to(x, act, x.prec().unwrap_or(DEFAULT_PREC)).expect("gamma of a visible unit window")
}

pub fn apply_gamma_to(x: &LaurentElement, act: ActionParams, hi: i64) -> Result<LaurentElement> {
    substitute(x, &gamma_pi(x.params(), act), hi, CoeffTwist::Id)
}

// ---------------------------------------------------------------- differentials

/// A continuous differential form body·dπ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DifferentialForm {
    pub body: LaurentElement,
}

impl DifferentialForm {
    pub fn new(body: LaurentElement) -> Self {
        DifferentialForm { body }
    }

    /// d of a series: (Σ i aᵢ π^{i−1}) dπ.
    pub fn d(x: &LaurentElement) -> Self {
        DifferentialForm { body: x.derivative() }
    }
}

/// res(Σ aᵢ πⁱ dπ) = a₋₁.  Fails when the window does not determine the
/// coefficient at −1.
pub fn residue(form: &DifferentialForm) -> Result<CoeffElement> {
    if let Some(h) = form.body.prec() {
        if h < -1 {
            return Err(Error::WindowTooSmall(
                "the coefficient at π⁻¹ is beyond the known window".into(),
            ));
        }
    }
    Ok(form.body.coeff_at(-1))
}

// ----------------------------------------------------------------
