//! Dickson matrices A[i|j] = a_{j-i}^{q^i} of linearized polynomials, their
//! principal minors and the structural tests built on them.
//!
//! Index sets are bitmasks over Z_n, bit i standing for index i.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf::linalg::{self, Matrix};
use crate::gf::{Elem, FieldTower};
use crate::linpoly::LinPoly;

/// Largest n for which [`DicksonMatrix::fingerprint`] is computed.
pub const MAX_FINGERPRINT_N: u32 = 12;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DicksonMatrix {
    coeffs: LinPoly,
    m: Matrix,
}

/// All 2^n principal minors in ascending mask order, the empty minor being 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fingerprint(Vec<Elem>);

impl Fingerprint {
    pub fn entries(&self) -> &[Elem] {
        &self.0
    }

    pub fn get(&self, mask: u64) -> Elem {
        self.0[mask as usize]
    }

    /// Little-endian bytes of the element codes.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.0.iter().flat_map(|e| e.code().to_le_bytes()).collect()
    }

    /// FNV-1a over [`Self::to_bytes`]; equal digests still need a full compare.
    pub fn digest(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for e in &self.0 {
            for b in e.code().to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        }
        h
    }

    pub fn to_codes(&self) -> Vec<u64> {
        self.0.iter().map(|e| e.code()).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoewyPartition {
    pub alpha: u64,
    pub beta: u64,
}

pub fn mask_indices(mask: u64, n: usize) -> Vec<usize> {
    (0..n).filter(|&i| mask >> i & 1 == 1).collect()
}

/// Cyclic shift I ↦ I + 1 of an index set.
pub fn rotate_mask(mask: u64, n: u32) -> u64 {
    let full = (1u64 << n) - 1;
    ((mask << 1) | (mask >> (n - 1))) & full
}

impl DicksonMatrix {
    pub fn from_poly(t: &FieldTower, f: &LinPoly) -> Self {
        let n = f.len();
        let m = Matrix::from_fn(n, n, |i, j| t.frob(f.coeff((j + n - i) % n), i as i64));
        DicksonMatrix { coeffs: f.clone(), m }
    }

    pub fn n(&self) -> usize {
        self.m.rows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.m
    }

    pub fn source(&self) -> &LinPoly {
        &self.coeffs
    }

    pub fn get(&self, i: usize, j: usize) -> Elem {
        self.m.get(i, j)
    }

    /// A[rows|cols] with indices in ascending order.
    pub fn submatrix(&self, rows: u64, cols: u64) -> Result<Matrix> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyIndexSet);
        }
        let r = mask_indices(rows, self.n());
        let c = mask_indices(cols, self.n());
        Ok(Matrix::from_fn(r.len(), c.len(), |i, j| self.m.get(r[i], c[j])))
    }

    /// det A[I|I]; the empty set gives 1.
    pub fn minor(&self, t: &FieldTower, mask: u64) -> Elem {
        let idx = mask_indices(mask, self.n());
        let k = idx.len();
        let mut buf: Vec<Elem> =
            idx.iter().flat_map(|&i| idx.iter().map(move |&j| (i, j))).map(|(i, j)| self.m.get(i, j)).collect();
        linalg::det_in_place(t, &mut buf, k)
    }

    /// Every principal minor. Only one set per rotation orbit is eliminated;
    /// the rest follow from det A[I+1|I+1] = (det A[I|I])^q.
    pub fn fingerprint(&self, t: &FieldTower) -> Result<Fingerprint> {
        let n = self.n() as u32;
        if n > MAX_FINGERPRINT_N {
            return Err(Error::TooLarge { what: format!("2^{n} principal minors"), budget: 1 << MAX_FINGERPRINT_N });
        }
        let size = 1usize << n;
        let mut out = vec![Elem::ZERO; size];
        let mut done = vec![false; size];
        out[0] = Elem::ONE;
        done[0] = true;
        for mask in 1..size as u64 {
            if done[mask as usize] {
                continue;
            }
            let mut v = self.minor(t, mask);
            let mut m = mask;
            loop {
                out[m as usize] = v;
                done[m as usize] = true;
                m = rotate_mask(m, n);
                if m == mask {
                    break;
                }
                v = t.frob(v, 1);
            }
        }
        Ok(Fingerprint(out))
    }

    /// Same as [`Self::fingerprint`] but with one elimination per set.
    pub fn fingerprint_direct(&self, t: &FieldTower) -> Fingerprint {
        Fingerprint((0..1u64 << self.n()).map(|m| self.minor(t, m)).collect())
    }

    /// Dickson matrix of the adjoint, which is the transpose of A.
    pub fn transpose(&self, t: &FieldTower) -> DicksonMatrix {
        DicksonMatrix::from_poly(t, &self.coeffs.adjoint(t))
    }

    /// max k with det A[{0..k-1}|{0..k-1}] ≠ 0.
    pub fn rank_leading(&self, t: &FieldTower) -> usize {
        (1..=self.n()).rev().find(|&k| !self.minor(t, (1u64 << k) - 1).is_zero()).unwrap_or(0)
    }

    /// p_A(λ0) = det(A - diag(λ0, λ0^q, …)).
    pub fn char_value(&self, t: &FieldTower, lambda: Elem) -> Elem {
        let shifted = self.coeffs.sub(t, &LinPoly::scalar(self.n() as u32, lambda));
        linalg::det(t, DicksonMatrix::from_poly(t, &shifted).matrix())
    }

    /// Multiplicity of `a` as a root of p_A: 1 + q + … + q^{w-1} where
    /// w = n - rank(A - diag(a, a^q, …)).
    pub fn root_multiplicity(&self, t: &FieldTower, a: Elem) -> u64 {
        let shifted = self.coeffs.sub(t, &LinPoly::scalar(self.n() as u32, a));
        let w = self.n() - DicksonMatrix::from_poly(t, &shifted).rank_leading(t);
        (0..w as u32).map(|k| t.q().pow(k)).sum()
    }

    /// `Some(d)` with d = linearity_gcd(f) > 1 when A is reducible.
    pub fn is_reducible(&self) -> Result<Option<u32>> {
        let d = self.coeffs.linearity_gcd()?;
        Ok((d > 1).then_some(d))
    }

    fn rank_of(&self, t: &FieldTower, rows: u64, cols: u64) -> usize {
        linalg::rank(t, &self.submatrix(rows, cols).expect("non-empty index sets"))
    }

    /// Whether rank A[α|β] = rank A[β|α] = 1 for the complementary pair.
    pub fn is_loewy_witness(&self, t: &FieldTower, alpha: u64) -> bool {
        let full = (1u64 << self.n()) - 1;
        let beta = full & !alpha;
        alpha.count_ones() >= 2
            && beta.count_ones() >= 2
            && self.rank_of(t, alpha, beta) == 1
            && self.rank_of(t, beta, alpha) == 1
    }

    /// The canonical candidates in order: α = dZ_n for divisors 1 < d | n,
    /// then α = {0, i} for i = 1..n-1.
    pub fn loewy_candidates(n: u32) -> Vec<u64> {
        let mut out = Vec::new();
        for d in 2..n {
            if !n.is_multiple_of(d) {
                continue;
            }
            let size = n / d;
            if size < 2 || n - size < 2 {
                continue;
            }
            out.push((0..size).fold(0u64, |m, k| m | 1 << (k * d)));
        }
        for i in 1..n {
            out.push(1 | 1 << i);
        }
        out
    }

    /// First Loewy-reducibility witness among [`Self::loewy_candidates`].
    pub fn loewy_partition(&self, t: &FieldTower) -> Result<Option<LoewyPartition>> {
        let n = self.n() as u32;
        if n < 4 {
            return Err(Error::TooSmall(n));
        }
        let full = (1u64 << n) - 1;
        Ok(Self::loewy_candidates(n)
            .into_iter()
            .find(|&a| self.is_loewy_witness(t, a))
            .map(|alpha| LoewyPartition { alpha, beta: full & !alpha }))
    }
}

/// λ with B = D^{-1} A D, D = diag(λ, λ^q, …), i.e. b_i = a_i λ^{q^i - 1}.
///
/// Returns the smallest such λ by code, or `None`.
pub fn diag_similar(t: &FieldTower, a: &DicksonMatrix, b: &DicksonMatrix) -> Option<Elem> {
    let (fa, fb) = (a.source(), b.source());
    if fa.len() != fb.len() || fa.support() != fb.support() {
        return None;
    }
    if fa.coeff(0) != fb.coeff(0) {
        return None;
    }
    let Some(&i) = fa.support().iter().find(|&&i| i >= 1) else {
        return Some(Elem::ONE);
    };
    let ratio = t.div(fb.coeff(i), fa.coeff(i)).ok()?;
    // λ^{q^i - 1} = ratio, with q^i - 1 reduced mod the group order
    let group = t.order() - 1;
    let k = (t.frob_exponent(i as u32) + group - 1) % group;
    let roots = if k == 0 {
        if ratio == Elem::ONE {
            vec![Elem::ONE]
        } else {
            Vec::new()
        }
    } else {
        t.solve_power(ratio, k).ok()?
    };
    roots.into_iter().find(|&lam| fa.twist(t, lam).map(|g| &g == fb).unwrap_or(false))
}
