//! Dense linear algebra over ℤ/pⁿ: Smith normal form with transforms,
//! kernels, linear solving, and invariant factors of subquotients.
//!
//! ℤ/pⁿ is a chain ring, so Gaussian elimination works verbatim once pivots
//! are chosen of minimal p-valuation: every other entry of the pivot row and
//! column is then exactly divisible by the pivot.  The decomposition is
//! U·A·V = D with D diagonal, diag(D) = (p^{d₀}, p^{d₁}, …), d₀ ≤ d₁ ≤ ….
//!
//! We never form U itself.  Row operations are mirrored on U⁻¹ (stored as
//! `linv`, acting by column operations) because generators of images and
//! subquotients are read off the columns of U⁻¹, and on an optional attached
//! right-hand side (for solving).  Column operations are mirrored on V,
//! whose columns parametrize kernels.  The identity A·V_j = p^{d_j}·(U⁻¹)_j
//! ties all three together and is checked in the tests.

use crate::coeff::{add_mod, mul_mod, sub_mod, vp};

// ---------------------------------------------------------------- matrices

/// Dense row-major matrix with entries in ℤ/pⁿ.
#[derive(Clone, PartialEq, Eq)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub a: Vec<u64>,
}

impl std::fmt::Debug for Mat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "Mat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", &self.a[i * self.cols..(i + 1) * self.cols])?;
        }
        write!(f, "]")
    }
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Mat {
        Mat { rows, cols, a: vec![0; rows * cols] }
    }

    pub fn identity(k: usize) -> Mat {
        let mut m = Mat::zeros(k, k);
        for i in 0..k {
            m.a[i * k + i] = 1;
        }
        m
    }

    pub fn from_cols(cols: &[Vec<u64>], rows: usize) -> Mat {
        let mut m = Mat::zeros(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), rows);
            for i in 0..rows {
                m.a[i * m.cols + j] = c[i];
            }
        }
        m
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> u64 {
        self.a[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        self.a[i * self.cols + j] = v;
    }

    pub fn col(&self, j: usize) -> Vec<u64> {
        (0..self.rows).map(|i| self.at(i, j)).collect()
    }

    /// Columns of `other` appended on the right.
    pub fn hstack(&self, other: &Mat) -> Mat {
        assert_eq!(self.rows, other.rows);
        let mut m = Mat::zeros(self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(i, j, self.at(i, j));
            }
            for j in 0..other.cols {
                m.set(i, self.cols + j, other.at(i, j));
            }
        }
        m
    }

    /// Rows of `other` appended below.
    pub fn vstack(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.cols);
        let mut m = Mat::zeros(self.rows + other.rows, self.cols);
        m.a[..self.a.len()].copy_from_slice(&self.a);
        m.a[self.a.len()..].copy_from_slice(&other.a);
        m
    }

    pub fn mul(&self, other: &Mat, modulus: u64) -> Mat {
        assert_eq!(self.cols, other.rows);
        let mut m = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let v = self.at(i, k);
                if v == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let t = mul_mod(v, other.at(k, j), modulus);
                    let idx = i * m.cols + j;
                    m.a[idx] = add_mod(m.a[idx], t, modulus);
                }
            }
        }
        m
    }

    pub fn mul_vec(&self, x: &[u64], modulus: u64) -> Vec<u64> {
        assert_eq!(self.cols, x.len());
        (0..self.rows)
            .map(|i| {
                let mut s = 0u64;
                for j in 0..self.cols {
                    s = add_mod(s, mul_mod(self.at(i, j), x[j], modulus), modulus);
                }
                s
            })
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.a.iter().all(|&v| v == 0)
    }
}

// ---------------------------------------------------------------- smith form

/// U·A·V = D over ℤ/pⁿ, with `linv` = U⁻¹ and the diagonal recorded as
/// p-valuation exponents (entries that vanish mod pⁿ are simply absent).
pub struct SmithResult {
    pub p: u64,
    pub n: u32,
    /// Exponents d of the nonzero diagonal entries p^d, nondecreasing.
    pub diag: Vec<u32>,
    /// Right transform (cols × cols): columns beyond `rank()` span the free
    /// part of the kernel.
    pub v: Mat,
    /// U⁻¹ (rows × rows): column j is the image-side vector with
    /// A·V_j = p^{d_j}·linv_j.
    pub linv: Mat,
    /// U·B for the attached right-hand side B, if one was supplied.
    pub attached: Option<Mat>,
}

impl SmithResult {
    pub fn rank(&self) -> usize {
        self.diag.len()
    }
}

/// Smith normal form; `attach` rides along under row operations (it becomes
/// U·attach), which is what solving needs.
pub fn smith_with(a: &Mat, p: u64, n: u32, attach: Option<&Mat>) -> SmithResult {
    smith_engine(a, p, n, attach, true, true)
}

/// The worker: the transforms are only maintained when asked for, because
/// U⁻¹ bookkeeping costs O(rows²) per pivot and the large window kernels
/// need neither it nor, sometimes, V.
pub fn smith_engine(
    a: &Mat,
    p: u64,
    n: u32,
    attach: Option<&Mat>,
    track_v: bool,
    track_linv: bool,
) -> SmithResult {
    let modulus = p.pow(n);
    let mut m = a.clone();
    let rows = m.rows;
    let cols = m.cols;
    let mut v = if track_v { Mat::identity(cols) } else { Mat::zeros(0, 0) };
    let mut linv = if track_linv { Mat::identity(rows) } else { Mat::zeros(0, 0) };
    let mut att = attach.cloned();
    if let Some(b) = &att {
        assert_eq!(b.rows, rows, "attached matrix must have matching rows");
    }
    let mut diag = Vec::new();

    let mut t = 0usize;
    while t < rows.min(cols) {
        // pivot: minimal p-valuation in the trailing block, lex-first
        let mut best: Option<(u32, usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                let e = m.at(i, j);
                if e == 0 {
                    continue;
                }
                let val = vp(e, p, n);
                if best.map_or(true, |(bv, _, _)| val < bv) {
                    best = Some((val, i, j));
                    if val == 0 {
                        break;
                    }
                }
            }
            if best.map_or(false, |(bv, _, _)| bv == 0) {
                break;
            }
        }
        let Some((d, pi, pj)) = best else { break };

        // move the pivot to (t, t)
        if pi != t {
            for j in 0..cols {
                m.a.swap(pi * cols + j, t * cols + j);
            }
            if let Some(b) = &mut att {
                for j in 0..b.cols {
                    b.a.swap(pi * b.cols + j, t * b.cols + j);
                }
            }
            if track_linv {
                for i in 0..rows {
                    linv.a.swap(i * rows + pi, i * rows + t);
                }
            }
        }
        if pj != t {
            for i in 0..rows {
                m.a.swap(i * cols + pj, i * cols + t);
            }
            if track_v {
                for i in 0..cols {
                    v.a.swap(i * cols + pj, i * cols + t);
                }
            }
        }

        // normalize the pivot to exactly p^d
        let pd = p.pow(d);
        let unit = m.at(t, t) / pd;
        debug_assert_eq!(m.at(t, t) % pd, 0);
        if unit != 1 {
            let uinv = crate::coeff::inv_mod_pk(unit % modulus, p, modulus);
            for j in 0..cols {
                let idx = t * cols + j;
                m.a[idx] = mul_mod(m.a[idx], uinv, modulus);
            }
            if let Some(b) = &mut att {
                for j in 0..b.cols {
                    let idx = t * b.cols + j;
                    b.a[idx] = mul_mod(b.a[idx], uinv, modulus);
                }
            }
            // row_t ← u⁻¹·row_t on A means U⁻¹'s column t picks up the factor u
            if track_linv {
                for i in 0..rows {
                    let idx = i * rows + t;
                    linv.a[idx] = mul_mod(linv.a[idx], unit % modulus, modulus);
                }
            }
        }
        debug_assert_eq!(m.at(t, t), pd % modulus);

        // clear the pivot column with row operations
        for i in 0..rows {
            if i == t {
                continue;
            }
            let e = m.at(i, t);
            if e == 0 {
                continue;
            }
            let f = (e / pd) % modulus;
            debug_assert_eq!(e % pd, 0, "pivot was not of minimal valuation");
            for j in 0..cols {
                let s = mul_mod(f, m.at(t, j), modulus);
                let idx = i * cols + j;
                m.a[idx] = sub_mod(m.a[idx], s, modulus);
            }
            if let Some(b) = &mut att {
                for j in 0..b.cols {
                    let s = mul_mod(f, b.at(t, j), modulus);
                    let idx = i * b.cols + j;
                    b.a[idx] = sub_mod(b.a[idx], s, modulus);
                }
            }
            // row_i ← row_i − f·row_t on A means U⁻¹'s col_t ← col_t + f·col_i
            if track_linv {
                for r in 0..rows {
                    let s = mul_mod(f, linv.at(r, i), modulus);
                    let idx = r * rows + t;
                    linv.a[idx] = add_mod(linv.a[idx], s, modulus);
                }
            }
        }

        // clear the pivot row with column operations
        for j in 0..cols {
            if j == t {
                continue;
            }
            let e = m.at(t, j);
            if e == 0 {
                continue;
            }
            let g = (e / pd) % modulus;
            debug_assert_eq!(e % pd, 0);
            for i in 0..rows {
                let s = mul_mod(g, m.at(i, t), modulus);
                let idx = i * cols + j;
                m.a[idx] = sub_mod(m.a[idx], s, modulus);
            }
            if track_v {
                for i in 0..cols {
                    let s = mul_mod(g, v.at(i, t), modulus);
                    let idx = i * cols + j;
                    v.a[idx] = sub_mod(v.a[idx], s, modulus);
                }
            }
        }

        diag.push(d);
        t += 1;
    }

    SmithResult { p, n, diag, v, linv, attached: att }
}

pub fn smith(a: &Mat, p: u64, n: u32) -> SmithResult {
    smith_with(a, p, n, None)
}

// ---------------------------------------------------------------- kernels and solving

/// Generators of {x : A·x = 0} over ℤ/pⁿ, as columns, each paired with its
/// order exponent (the generator has additive order p^e).
pub fn kernel_generators(a: &Mat, p: u64, n: u32) -> Vec<(Vec<u64>, u32)> {
    let s = smith_engine(a, p, n, None, true, false);
    let modulus = p.pow(n);
    let mut gens = Vec::new();
    for (j, &d) in s.diag.iter().enumerate() {
        if d == 0 {
            continue;
        }
        let scale = p.pow(n - d);
        let col: Vec<u64> = s.v.col(j).iter().map(|&x| mul_mod(x, scale, modulus)).collect();
        gens.push((col, d));
    }
    for j in s.diag.len()..a.cols {
        gens.push((s.v.col(j), n));
    }
    gens
}

/// One solution of A·x = b over ℤ/pⁿ, if any.
pub fn solve(a: &Mat, b: &[u64], p: u64, n: u32) -> Option<Vec<u64>> {
    let modulus = p.pow(n);
    let bm = Mat::from_cols(&[b.to_vec()], a.rows);
    let s = smith_engine(a, p, n, Some(&bm), true, false);
    let c = s.attached.unwrap();
    let mut y = vec![0u64; a.cols];
    for (j, &d) in s.diag.iter().enumerate() {
        let cj = c.at(j, 0);
        let pd = p.pow(d);
        if cj % pd != 0 {
            return None;
        }
        y[j] = (cj / pd) % modulus;
    }
    for j in s.diag.len()..a.rows {
        if c.at(j, 0) != 0 {
            return None;
        }
    }
    Some(s.v.mul_vec(&y, modulus))
}

// ---------------------------------------------------------------- subquotients

/// A finite abelian p-group presented by generators (ambient column vectors)
/// with their orders, invariant factors in descending order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Presentation {
    /// Invariant-factor exponents, descending; the group is ⊕ ℤ/p^{e}.
    pub orders: Vec<u32>,
    /// Ambient representatives, one column per invariant factor.
    pub gens: Mat,
}

impl Presentation {
    pub fn trivial(ambient_rows: usize) -> Presentation {
        Presentation { orders: vec![], gens: Mat::zeros(ambient_rows, 0) }
    }

    /// Total length ∑ e (the p-length of the group).
    pub fn length(&self) -> u64 {
        self.orders.iter().map(|&e| e as u64).sum()
    }
}

/// Invariant factors and generators of S̄/T̄ where S̄, T̄ ⊆ (ℤ/pⁿ)^N are the
/// subgroups generated by the columns of `s` and `t`, assuming T̄ ⊆ S̄.
///
/// The relation lattice {u : S·u ∈ T̄} is the projection to the first k
/// coordinates of ker[S | T]; the Smith form of its generating matrix then
/// reads off the quotient, with generators Σ_t (U⁻¹)_{t,j}·S_t of order
/// p^{d_j}.
pub fn subquotient(s: &Mat, t: &Mat, p: u64, n: u32) -> Presentation {
    let modulus = p.pow(n);
    let k = s.cols;
    if k == 0 {
        return Presentation::trivial(s.rows);
    }
    let stacked = s.hstack(t);
    let ker = kernel_generators(&stacked, p, n);
    let rel_cols: Vec<Vec<u64>> = ker.iter().map(|(col, _)| col[..k].to_vec()).collect();
    let rel = Mat::from_cols(&rel_cols, k);
    let sm = smith_engine(&rel, p, n, None, false, true);

    let mut factors: Vec<(u32, Vec<u64>)> = Vec::new();
    for j in 0..k {
        let d = if j < sm.diag.len() { sm.diag[j] } else { n };
        if d == 0 {
            continue;
        }
        // generator in ambient coordinates: S · (U⁻¹ column j)
        let amb = s.mul_vec(&sm.linv.col(j), modulus);
        factors.push((d, amb));
    }
    factors.sort_by(|x, y| y.0.cmp(&x.0));
    let orders: Vec<u32> = factors.iter().map(|(d, _)| *d).collect();
    let gens = Mat::from_cols(
        &factors.into_iter().map(|(_, g)| g).collect::<Vec<_>>(),
        s.rows,
    );
    Presentation { orders, gens }
}

/// Invariant factors (exponents, descending) of the subgroup of (ℤ/pⁿ)^rows
/// generated by the columns of A.
pub fn image_invariants(a: &Mat, p: u64, n: u32) -> Vec<u32> {
    let s = smith_engine(a, p, n, None, false, false);
    let mut out: Vec<u32> = s.diag.iter().map(|&d| n - d).filter(|&e| e > 0).collect();
    out.sort_by(|x, y| y.cmp(x));
    out
}

// ----------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mat(rows: usize, cols: usize, entries: &[u64]) -> Mat {
        assert_eq!(entries.len(), rows * cols);
        Mat { rows, cols, a: entries.to_vec() }
    }

    #[test]
    fn smith_known_diagonal() {
        // diag(3, 9) over ℤ/27
        let a = mat(2, 2, &[3, 0, 0, 9]);
        let s = smith(&a, 3, 3);
        assert_eq!(s.diag, vec![1, 2]);

        // all-ones 2×2 over ℤ/9 has rank 1 with unit pivot
        let a = mat(2, 2, &[1, 1, 1, 1]);
        let s = smith(&a, 3, 2);
        assert_eq!(s.diag, vec![0], "second diagonal entry vanishes mod 9");

        // 2×3 with mixed valuations over ℤ/25
        let a = mat(2, 3, &[5, 10, 3, 0, 5, 20]);
        let s = smith(&a, 5, 2);
        assert_eq!(s.diag, vec![0, 1]);
    }

    #[test]
    fn smith_transform_identity() {
        // A·V_j = p^{d_j}·(U⁻¹)_j ties the three outputs together
        let cases: Vec<(u64, u32, Mat)> = vec![
            (3, 2, mat(2, 2, &[1, 1, 1, 1])),
            (3, 3, mat(3, 2, &[3, 6, 2, 9, 0, 18])),
            (5, 2, mat(2, 3, &[5, 10, 3, 0, 5, 20])),
        ];
        for (p, n, a) in cases {
            let modulus = p.pow(n);
            let s = smith(&a, p, n);
            for j in 0..a.cols {
                let av = a.mul_vec(&s.v.col(j), modulus);
                let rhs: Vec<u64> = if j < s.diag.len() {
                    let pd = p.pow(s.diag[j]);
                    s.linv.col(j).iter().map(|&x| mul_mod(x, pd, modulus)).collect()
                } else {
                    vec![0; a.rows]
                };
                assert_eq!(av, rhs, "A·V_{j} = p^d·linv_{j} for p={p} n={n}");
            }
        }
    }

    #[test]
    fn kernel_known_values() {
        // multiplication by 3 on ℤ/9: kernel = 3·ℤ/9 ≃ ℤ/3
        let a = mat(1, 1, &[3]);
        let gens = kernel_generators(&a, 3, 2);
        assert_eq!(gens, vec![(vec![3], 1)]);

        // x + y = 0 mod 9: kernel free of rank 1
        let a = mat(1, 2, &[1, 1]);
        let gens = kernel_generators(&a, 3, 2);
        assert_eq!(gens.len(), 1);
        assert_eq!(gens[0].1, 2, "kernel of (1 1) is a free rank-1 module");
        let g = &gens[0].0;
        assert_eq!((g[0] + g[1]) % 9, 0);
        assert!(g.iter().any(|&x| x % 3 != 0), "generator must be primitive");
    }

    #[test]
    fn solve_known_values() {
        let a = mat(2, 2, &[2, 1, 0, 3]);
        let x = solve(&a, &[5, 3], 3, 2).expect("system is solvable");
        assert_eq!(a.mul_vec(&x, 9), vec![5, 3]);

        let a = mat(1, 1, &[3]);
        assert_eq!(solve(&a, &[1], 3, 2), None, "3x = 1 has no solution mod 9");
        let x = solve(&a, &[6], 3, 2).unwrap();
        assert_eq!((3 * x[0]) % 9, 6);
    }

    #[test]
    fn subquotient_known_values() {
        // S = ⟨(1,0), (0,3)⟩, T = ⟨(3,0)⟩ inside (ℤ/9)²: quotient ≃ ℤ/3 ⊕ ℤ/3
        let s = mat(2, 2, &[1, 0, 0, 3]);
        let t = mat(2, 1, &[3, 0]);
        let q = subquotient(&s, &t, 3, 2);
        assert_eq!(q.orders, vec![1, 1], "⟨e₁,3e₂⟩/⟨3e₁⟩ ≃ (ℤ/3)²");

        // S/S is trivial
        let q = subquotient(&s, &s, 3, 2);
        assert_eq!(q.orders, Vec::<u32>::new());

        // S/0 recovers the image invariants
        let zero = Mat::zeros(2, 0);
        let q = subquotient(&s, &zero, 3, 2);
        assert_eq!(q.orders, vec![2, 1]);
        assert_eq!(q.orders, image_invariants(&s, 3, 2));
    }

    #[test]
    fn subquotient_generators_have_stated_orders() {
        // generator orders are exact: p^{e−1}·g ∉ T̄, p^e·g ∈ T̄
        let p = 3u64;
        let n = 3u32;
        let modulus = p.pow(n);
        let s = mat(3, 3, &[1, 0, 3, 0, 3, 0, 0, 0, 9]);
        let t = mat(3, 2, &[9, 0, 0, 9, 0, 0]);
        let q = subquotient(&s, &t, p, n);
        assert!(!q.orders.is_empty());
        for (j, &e) in q.orders.iter().enumerate() {
            let g = q.gens.col(j);
            let scaled: Vec<u64> = g.iter().map(|&x| mul_mod(x, p.pow(e), modulus)).collect();
            assert!(
                solve(&t, &scaled, p, n).is_some(),
                "p^{e}·gen_{j} must land in the denominator subgroup"
            );
            let halfway: Vec<u64> = g.iter().map(|&x| mul_mod(x, p.pow(e - 1), modulus)).collect();
            assert!(
                solve(&t, &halfway, p, n).is_none(),
                "p^{}·gen_{j} must not land in the denominator subgroup",
                e - 1
            );
        }
    }

    #[test]
    fn image_invariants_known_values() {
        let a = mat(2, 2, &[3, 0, 0, 1]);
        assert_eq!(image_invariants(&a, 3, 2), vec![2, 1], "⟨3e₁, e₂⟩ ≃ ℤ/9 ⊕ ℤ/3");
        let a = Mat::zeros(2, 2);
        assert_eq!(image_invariants(&a, 3, 2), Vec::<u32>::new());
    }

    proptest! {
        #[test]
        fn kernel_columns_are_killed(seed in 0u64..200) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let (p, n) = *[(3u64, 2u32), (3, 3), (5, 2)].get(seed as usize % 3).unwrap();
            let modulus = p.pow(n);
            let rows = rng.random_range(1..5usize);
            let cols = rng.random_range(1..5usize);
            let a = Mat { rows, cols, a: (0..rows * cols).map(|_| rng.random_range(0..modulus)).collect() };
            for (g, e) in kernel_generators(&a, p, n) {
                prop_assert!(a.mul_vec(&g, modulus).iter().all(|&x| x == 0));
                // the stated order is exact
                prop_assert!(g.iter().any(|&x| mul_mod(x, p.pow(e - 1), modulus) != 0));
                prop_assert!(g.iter().all(|&x| mul_mod(x, p.pow(e), modulus) == 0));
            }
            // every random combination solves back
            let x: Vec<u64> = (0..cols).map(|_| rng.random_range(0..modulus)).collect();
            let b = a.mul_vec(&x, modulus);
            let x2 = solve(&a, &b, p, n).expect("A·x is always solvable");
            prop_assert_eq!(a.mul_vec(&x2, modulus), b);
        }
    }
}
