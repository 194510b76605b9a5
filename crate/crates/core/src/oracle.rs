//! Brute-force ground truth for the unramified story.
//!
//! A continuous representation of the absolute Galois group of a finite
//! field is nothing but an invertible matrix ρ (the image of Frobenius) of
//! finite order.  Its cohomology has closed formulas,
//!
//!   H⁰ = ker(ρ−1),   H¹ = V/(ρ−1)V,   H^{≥2} = 0,
//!
//! and the attached Φ-module is an honest fixed space: D(V) is the kernel of
//! ρ ⊗ Frob_q − 1 on V ⊗ F_{q^m}, carrying φ = 1 ⊗ (x ↦ x^p).  Both routes
//! are independent of the main engine (no Laurent series, no windows), which
//! is what makes them useful as oracles: seeded random representations run
//! through [`d_of_v`] and [`crate::charp::c1_cohomology_finite_field`] must
//! agree with [`procyclic_cohomology`] dimension by dimension.

use std::sync::Arc;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::charp::{c1_cohomology_finite_field, FqElement, FqParams, PhiModuleCharP};
use crate::coeff;
use crate::error::Error;
use crate::snf::{self, Mat, Presentation};
use crate::Result;

// ---------------------------------------------------------------- representations

/// A representation of the procyclic group ⟨Frob⟩ on (ℤ/pⁿ)^d that factors
/// through the quotient of order m: one matrix with ρ^m = 1.
#[derive(Clone, Debug)]
pub struct FiniteRep {
    pub p: u64,
    pub n: u32,
    /// ρ^m = 1; the splitting field of the representation has degree
    /// dividing m over the base.
    pub m: u32,
    /// ρ(Frob), square over ℤ/pⁿ.
    pub rho: Mat,
}

impl FiniteRep {
    pub fn new(p: u64, n: u32, m: u32, rho: Mat) -> Result<FiniteRep> {
        if !coeff::is_prime_u64(p) {
            return Err(Error::InvalidParams(format!("{p} is not prime")));
        }
        if n == 0 || m == 0 || rho.rows == 0 || rho.rows != rho.cols {
            return Err(Error::InvalidParams(
                "need n ≥ 1, m ≥ 1 and a nonempty square matrix".into(),
            ));
        }
        let modulus = p.pow(n);
        let mut reduced = rho;
        for v in reduced.a.iter_mut() {
            *v %= modulus;
        }
        let mut pow = Mat::identity(reduced.rows);
        for _ in 0..m {
            pow = pow.mul(&reduced, modulus);
        }
        if pow != Mat::identity(reduced.rows) {
            return Err(Error::InconsistentRep(format!(
                "ρ^{m} is not the identity, so ρ does not act through the stated quotient"
            )));
        }
        Ok(FiniteRep { p, n, m, rho: reduced })
    }

    pub fn d(&self) -> usize {
        self.rho.rows
    }
}

/// H⁰ and H¹ of the procyclic group on V = (ℤ/pⁿ)^d: the kernel of ρ−1 as a
/// subgroup and the cokernel as a quotient.  Higher degrees vanish.
pub fn procyclic_cohomology(rep: &FiniteRep) -> (Presentation, Presentation) {
    let d = rep.d();
    let p = rep.p;
    let n = rep.n;
    let modulus = p.pow(n);
    let mut a = rep.rho.clone();
    for i in 0..d {
        let v = a.at(i, i);
        a.set(i, i, (v + modulus - 1) % modulus);
    }
    let kernel_cols: Vec<Vec<u64>> =
        snf::kernel_generators(&a, p, n).into_iter().map(|(g, _)| g).collect();
    let kmat = Mat::from_cols(&kernel_cols, d);
    let h0 = snf::subquotient(&kmat, &Mat::zeros(d, 0), p, n);
    let h1 = snf::subquotient(&Mat::identity(d), &a, p, n);
    (h0, h1)
}

// ---------------------------------------------------------------- fixed-space construction

/// The lexicographically smallest monic irreducible polynomial of the given
/// degree over F_p, little-endian with leading coefficient 1.  Used as the
/// canonical model of every finite field the oracle touches.
pub fn smallest_irreducible(p: u64, deg: usize) -> Vec<u64> {
    assert!(deg >= 1);
    if deg == 1 {
        return vec![0, 1];
    }
    let count = p.pow(deg as u32);
    for v in 0..count {
        let mut poly = Vec::with_capacity(deg + 1);
        let mut rest = v;
        for _ in 0..deg {
            poly.push(rest % p);
            rest /= p;
        }
        poly.push(1);
        if coeff::is_irreducible_mod_p(&poly, p) {
            return poly;
        }
    }
    unreachable!("irreducible polynomials of every degree exist over F_p")
}

fn flatten(x: &[FqElement]) -> Vec<u64> {
    let mut out = Vec::new();
    for e in x {
        out.extend_from_slice(e.coeffs());
    }
    out
}

fn unflatten(params: &Arc<FqParams>, v: &[u64], d: usize) -> Vec<FqElement> {
    let fl = params.f();
    (0..d).map(|j| FqElement::from_coeffs(params, &v[j * fl..(j + 1) * fl])).collect()
}

/// Horner evaluation of an F_p-polynomial at a point of a larger field.
fn eval_poly(poly: &[u64], x: &FqElement) -> FqElement {
    let params = x.params();
    let mut acc = FqElement::zero(params);
    for &c in poly.iter().rev() {
        acc = acc.mul(x).add(&FqElement::from_residue(params, c));
    }
    acc
}

/// Elements of F_q in a canonical order (coefficient vectors by ascending
/// value).
fn field_elements(params: &Arc<FqParams>) -> impl Iterator<Item = FqElement> + '_ {
    let p = params.p();
    let fl = params.f();
    (0..p.pow(fl as u32)).map(move |v| {
        let mut c = Vec::with_capacity(fl);
        let mut rest = v;
        for _ in 0..fl {
            c.push(rest % p);
            rest /= p;
        }
        FqElement::from_coeffs(params, &c)
    })
}

/// The Φ-module of a mod-p representation over F_q, q = p^f: the fixed
/// space of ρ ⊗ Frob_q on V ⊗ F_{q^m}, an F_q-space of dimension d with
/// φ = 1 ⊗ (x ↦ x^p) expressed in a greedily chosen basis.
pub fn d_of_v(rep: &FiniteRep, f: usize) -> Result<PhiModuleCharP> {
    if rep.n != 1 {
        return Err(Error::InvalidParams(
            "the fixed-space construction works one residue level at a time (n = 1)".into(),
        ));
    }
    let p = rep.p;
    let d = rep.d();
    let fm = f * rep.m as usize;
    let qparams = FqParams::new(p, f, Some(smallest_irreducible(p, f)))?;
    let lparams = FqParams::new(p, fm, Some(smallest_irreducible(p, fm)))?;
    let q = qparams.q();

    // the canonical embedding F_q ↪ L: the first root of the F_q defining
    // polynomial, in the canonical element order
    let h_image = if f == 1 {
        FqElement::zero(&lparams)
    } else {
        field_elements(&lparams)
            .find(|x| eval_poly(qparams.minpoly(), x).is_zero())
            .expect("the splitting field contains every root")
    };
    // ρ ⊗ Frob_q − 1 on the F_p-space V ⊗ L, basis e_j ⊗ g^t
    let ambient = d * fm;
    let gen = FqElement::gen(&lparams);
    let mut op = Mat::zeros(ambient, ambient);
    for j in 0..d {
        for t in 0..fm {
            let col = j * fm + t;
            let frob = gen.pow(t as u64).pow(q);
            for i in 0..d {
                let scaled = frob.mul(&FqElement::from_residue(&lparams, rep.rho.at(i, j)));
                for (s, &v) in scaled.coeffs().iter().enumerate() {
                    let row = i * fm + s;
                    let dec = u64::from(row == col);
                    op.set(row, col, (v + p - dec) % p);
                }
            }
        }
    }

    let kernel: Vec<Vec<u64>> =
        snf::kernel_generators(&op, p, 1).into_iter().map(|(g, _)| g).collect();
    assert_eq!(
        kernel.len(),
        d * f,
        "the fixed space must have F_p-dimension d·f; the representation data is corrupt"
    );

    // greedy F_q-basis: adopt a kernel vector unless it already lies in the
    // F_q-span of the adopted ones, tracked by an F_p-echelon of all
    // h-multiples
    let mut basis: Vec<Vec<FqElement>> = Vec::with_capacity(d);
    let mut echelon: Vec<Vec<u64>> = Vec::new();
    let reduce = |rows: &[Vec<u64>], mut v: Vec<u64>| -> Option<(usize, Vec<u64>)> {
        for row in rows {
            let piv = row.iter().position(|&x| x != 0).expect("echelon rows are nonzero");
            if v[piv] != 0 {
                let c = v[piv] * coeff::inv_mod_pk(row[piv], p, p) % p;
                for (x, &r) in v.iter_mut().zip(row) {
                    *x = (*x + (p - c % p) * r) % p;
                }
            }
        }
        v.iter().position(|&x| x != 0).map(|piv| (piv, v))
    };
    for w in &kernel {
        if basis.len() == d {
            break;
        }
        if reduce(&echelon, w.clone()).is_none() {
            continue;
        }
        let lvec = unflatten(&lparams, w, d);
        for t in 0..f {
            let mult = h_image.pow(t as u64);
            let scaled: Vec<FqElement> = lvec.iter().map(|x| x.mul(&mult)).collect();
            if let Some((piv, row)) = reduce(&echelon, flatten(&scaled)) {
                echelon.push(row);
                let _ = piv;
            }
        }
        basis.push(lvec);
    }
    assert_eq!(basis.len(), d, "the fixed space must have F_q-dimension d");

    // φ = 1 ⊗ (x ↦ x^p) in the chosen basis: solve each image against the
    // F_p-columns h^t·w_j
    let mut sys_cols: Vec<Vec<u64>> = Vec::with_capacity(d * f);
    for w in &basis {
        for t in 0..f {
            let mult = h_image.pow(t as u64);
            sys_cols.push(flatten(&w.iter().map(|x| x.mul(&mult)).collect::<Vec<_>>()));
        }
    }
    let sys = Mat::from_cols(&sys_cols, ambient);
    let mut phi = vec![vec![FqElement::zero(&qparams); d]; d];
    for (k, w) in basis.iter().enumerate() {
        let image: Vec<FqElement> = w.iter().map(|x| x.frobenius()).collect();
        let sol = snf::solve(&sys, &flatten(&image), p, 1)
            .expect("φ preserves the fixed space, so its image lies in the span");
        for j in 0..d {
            phi[j][k] = FqElement::from_coeffs(&qparams, &sol[j * f..(j + 1) * f]);
        }
    }
    PhiModuleCharP::new(&qparams, phi)
}

// ---------------------------------------------------------------- random representations

fn invert_mod_p(m: &Mat, p: u64) -> Option<Mat> {
    let d = m.rows;
    let mut a = m.clone();
    let mut inv = Mat::identity(d);
    for t in 0..d {
        let pr = (t..d).find(|&i| a.at(i, t) % p != 0)?;
        for j in 0..d {
            let (x, y) = (a.at(t, j), a.at(pr, j));
            a.set(t, j, y);
            a.set(pr, j, x);
            let (x, y) = (inv.at(t, j), inv.at(pr, j));
            inv.set(t, j, y);
            inv.set(pr, j, x);
        }
        let c = coeff::inv_mod_pk(a.at(t, t) % p, p, p);
        for j in 0..d {
            a.set(t, j, a.at(t, j) * c % p);
            inv.set(t, j, inv.at(t, j) * c % p);
        }
        for i in 0..d {
            if i == t || a.at(i, t) % p == 0 {
                continue;
            }
            let c = a.at(i, t) % p;
            for j in 0..d {
                let v = (a.at(i, j) + (p - c) * a.at(t, j)) % p;
                a.set(i, j, v);
                let v = (inv.at(i, j) + (p - c) * inv.at(t, j)) % p;
                inv.set(i, j, v);
            }
        }
    }
    Some(inv)
}

fn mult_order(x: u64, p: u64) -> u32 {
    let mut acc = x % p;
    let mut k = 1;
    while acc != 1 {
        acc = acc * x % p;
        k += 1;
    }
    k
}

/// A reproducible random representation mod p with ρ^m = 1: block-diagonal
/// pieces of allowed orders (scalars whose multiplicative order divides m,
/// permutation cycles of length dividing m, a unipotent pair when p | m),
/// conjugated by a random invertible matrix.
pub fn random_rep(rng: &mut impl Rng, p: u64, m: u32, d: usize) -> FiniteRep {
    assert!(d >= 1 && m >= 1);
    let scalars: Vec<u64> = (1..p).filter(|&x| m % mult_order(x, p) == 0).collect();
    let cycles: Vec<usize> =
        (2..=d).filter(|&c| c <= m as usize && m as usize % c == 0).collect();

    let mut b = Mat::zeros(d, d);
    let mut pos = 0;
    while pos < d {
        let room = d - pos;
        // candidate blocks, deterministically ordered
        let mut picks: Vec<(usize, u8)> = scalars.iter().map(|_| (1usize, 0u8)).collect();
        for &c in &cycles {
            if c <= room {
                picks.push((c, 1));
            }
        }
        if p as usize <= m as usize && m % p as u32 == 0 && room >= 2 {
            picks.push((2, 2));
        }
        let which = rng.random_range(0..picks.len());
        match picks[which] {
            (1, 0) => {
                let s = scalars[rng.random_range(0..scalars.len())];
                b.set(pos, pos, s);
                pos += 1;
            }
            (c, 1) => {
                for i in 0..c {
                    b.set(pos + (i + 1) % c, pos + i, 1);
                }
                pos += c;
            }
            (_, _) => {
                b.set(pos, pos, 1);
                b.set(pos, pos + 1, 1);
                b.set(pos + 1, pos + 1, 1);
                pos += 2;
            }
        }
    }

    let (t, tinv) = loop {
        let mut t = Mat::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                t.set(i, j, rng.random_range(0..p));
            }
        }
        if let Some(tinv) = invert_mod_p(&t, p) {
            break (t, tinv);
        }
    };
    let rho = t.mul(&b, p).mul(&tinv, p);
    FiniteRep::new(p, 1, m, rho).expect("conjugation preserves the order condition")
}

// ---------------------------------------------------------------- the comparison experiment

/// One row of the seeded comparison: dimensions over F_p in degrees 0 and 1
/// along both routes.  Degrees ≥ 2 vanish on both sides by the shape of the
/// complexes.
#[derive(Clone, Debug)]
pub struct EquivalenceCase {
    pub q: u64,
    pub f: usize,
    pub m: u32,
    pub d: usize,
    pub h0_fixed_route: usize,
    pub h1_fixed_route: usize,
    pub h0_direct: usize,
    pub h1_direct: usize,
}

impl EquivalenceCase {
    pub fn agrees(&self) -> bool {
        self.h0_fixed_route == self.h0_direct && self.h1_fixed_route == self.h1_direct
    }
}

/// Run `cases` seeded comparisons across q ∈ {2, 3, 4, 9}, m ≤ 4, d ≤ 3.
pub fn equivalence_experiment(seed: u64, cases: usize) -> Result<Vec<EquivalenceCase>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fields: [(u64, usize); 4] = [(2, 1), (3, 1), (2, 2), (3, 2)];
    let mut out = Vec::with_capacity(cases);
    for k in 0..cases {
        let (p, f) = fields[k % fields.len()];
        let m = rng.random_range(1..=4);
        let d = rng.random_range(1..=3);
        let rep = random_rep(&mut rng, p, m, d);
        let module = d_of_v(&rep, f)?;
        let c = c1_cohomology_finite_field(&module);
        let (h0, h1) = procyclic_cohomology(&rep);
        out.push(EquivalenceCase {
            q: p.pow(f as u32),
            f,
            m,
            d,
            h0_fixed_route: c.h0_dim,
            h1_fixed_route: c.h1_dim,
            h0_direct: h0.orders.len(),
            h1_direct: h1.orders.len(),
        });
    }
    Ok(out)
}

// ----------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: usize, entries: &[u64]) -> Mat {
        assert_eq!(entries.len(), rows * rows);
        let mut m = Mat::zeros(rows, rows);
        for i in 0..rows {
            for j in 0..rows {
                m.set(i, j, entries[i * rows + j]);
            }
        }
        m
    }

    #[test]
    fn rejects_matrices_of_the_wrong_order() {
        // 2 has order 2 mod 3, so it cannot act through a quotient of order 3
        let r = FiniteRep::new(3, 1, 3, mat(1, &[2]));
        assert!(matches!(r, Err(Error::InconsistentRep(_))));
        assert!(FiniteRep::new(3, 1, 2, mat(1, &[2])).is_ok());
    }

    #[test]
    fn procyclic_formulas_on_known_representations() {
        // trivial: full invariants and coinvariants
        let rep = FiniteRep::new(3, 2, 1, mat(2, &[1, 0, 0, 1])).unwrap();
        let (h0, h1) = procyclic_cohomology(&rep);
        assert_eq!(h0.orders, vec![2, 2], "H⁰ of the trivial rank-2 module mod 9");
        assert_eq!(h1.orders, vec![2, 2], "H¹ = coinvariants of the trivial module");
        // quadratic character mod 3: ρ−1 = (1) is invertible
        let rep = FiniteRep::new(3, 1, 2, mat(1, &[2])).unwrap();
        let (h0, h1) = procyclic_cohomology(&rep);
        assert!(h0.orders.is_empty() && h1.orders.is_empty(), "a nontrivial character has no cohomology");
    }

    #[test]
    fn artin_schreier_dimensions_over_f2_and_f4() {
        let rep = FiniteRep::new(2, 1, 1, mat(1, &[1])).unwrap();
        for f in [1usize, 2] {
            let m = d_of_v(&rep, f).unwrap();
            let c = c1_cohomology_finite_field(&m);
            assert_eq!(
                (c.h0_dim, c.h1_dim),
                (1, 1),
                "trivial mod-2 representation over F_{}",
                2u64.pow(f as u32)
            );
        }
    }

    #[test]
    fn quadratic_character_has_no_cohomology_along_either_route() {
        let rep = FiniteRep::new(3, 1, 2, mat(1, &[2])).unwrap();
        let module = d_of_v(&rep, 1).unwrap();
        let c = c1_cohomology_finite_field(&module);
        assert_eq!((c.h0_dim, c.h1_dim), (0, 0));
        let (h0, h1) = procyclic_cohomology(&rep);
        assert_eq!((h0.orders.len(), h1.orders.len()), (0, 0));
    }

    #[test]
    fn unipotent_representation_matches_across_routes() {
        let rep = FiniteRep::new(2, 1, 2, mat(2, &[1, 1, 0, 1])).unwrap();
        let module = d_of_v(&rep, 1).unwrap();
        let c = c1_cohomology_finite_field(&module);
        let (h0, h1) = procyclic_cohomology(&rep);
        assert_eq!(c.h0_dim, h0.orders.len(), "degree 0");
        assert_eq!(c.h1_dim, h1.orders.len(), "degree 1");
        assert_eq!(c.h0_dim, 1, "one Jordan block fixes a line");
    }

    #[test]
    fn seeded_experiment_is_reproducible_and_agrees() {
        let a = equivalence_experiment(11, 12).unwrap();
        let b = equivalence_experiment(11, 12).unwrap();
        assert_eq!(a.len(), 12);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(
                (x.q, x.m, x.d, x.h0_fixed_route, x.h1_fixed_route),
                (y.q, y.m, y.d, y.h0_fixed_route, y.h1_fixed_route),
                "the experiment must be deterministic for a fixed seed"
            );
        }
        for (i, case) in a.iter().enumerate() {
            assert!(
                case.agrees(),
                "case {i} over F_{} (m={}, d={}): fixed-space route ({}, {}) vs direct ({}, {})",
                case.q,
                case.m,
                case.d,
                case.h0_fixed_route,
                case.h1_fixed_route,
                case.h0_direct,
                case.h1_direct
            );
        }
    }

    #[test]
    fn smallest_irreducibles_are_the_expected_ones() {
        assert_eq!(smallest_irreducible(2, 2), vec![1, 1, 1], "x² + x + 1 over F₂");
        assert_eq!(smallest_irreducible(3, 2), vec![1, 0, 1], "x² + 1 over F₃");
        assert_eq!(smallest_irreducible(2, 3), vec![1, 1, 0, 1], "x³ + x + 1 over F₂");
    }
}
