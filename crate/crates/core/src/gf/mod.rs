//! Exact arithmetic in the tower F_p ⊆ F_q ⊆ F_{q^d} ⊆ F_{q^n}.
//!
//! Every element lives in the single big field F_{q^n} = F_p[x]/(m(x)),
//! where m is a monic irreducible polynomial of degree `e·n`. Subfields are
//! recognised by the predicate x^{q^d} = x rather than by a separate
//! representation.
//!
//! An element is stored as its *code*: the integer whose base-p digits,
//! least significant first, are the coordinates on the power basis
//! 1, x, x^2, ... The natural order on codes is the fixed enumeration order
//! of the field used everywhere else in the crate.
//!
//! Fields of order up to 2^22 get exp/log tables (and Zech logarithms in odd
//! characteristic); larger fields fall back to polynomial arithmetic.

pub mod fp_poly;
pub mod linalg;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use fp_poly::{add_mod, sub_mod};
use linalg::Matrix;

/// Default bound on the size of anything that gets enumerated.
pub const DEFAULT_BUDGET: u64 = 1 << 20;

const TABLE_LIMIT: u64 = 1 << 22;

/// An element of F_{q^n}, identified by its code.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Elem(u64);

impl Elem {
    pub const ZERO: Elem = Elem(0);
    pub const ONE: Elem = Elem(1);

    pub const fn from_code(code: u64) -> Self {
        Elem(code)
    }

    pub const fn code(self) -> u64 {
        self.0
    }

    pub const fn is_zero(self) -> bool {
        self.0 == 0
    }
}

enum Backend {
    Table {
        exp: Vec<u32>,
        log: Vec<u32>,
        /// zech[k] = log(1 + g^k), or u32::MAX when 1 + g^k = 0; empty for p = 2
        zech: Vec<u32>,
    },
    Poly,
}

/// The field F_{q^n} with q = p^e, immutable after construction.
pub struct FieldTower {
    p: u64,
    e: u32,
    n: u32,
    degree: u32,
    q: u64,
    order: u64,
    modulus: Vec<u64>,
    budget: u64,
    backend: Backend,
    /// q^j mod (order - 1) for j in 0..n
    qpow: Vec<u64>,
    /// an F_q-basis of F_{q^n} and its trace-dual basis
    basis: Vec<Elem>,
    dual: Vec<Elem>,
    fq: Vec<Elem>,
}

impl std::fmt::Debug for FieldTower {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FieldTower")
            .field("p", &self.p)
            .field("e", &self.e)
            .field("n", &self.n)
            .field("modulus", &self.modulus)
            .finish()
    }
}

/// JSON field descriptor. `modulus` lists all `e·n + 1` coefficients,
/// constant term first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldDescriptor {
    pub p: u64,
    pub e: u32,
    pub n: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<Vec<u64>>,
}

/// JSON form of an element: its little-endian base-p digits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElemJson {
    pub coeffs: Vec<u64>,
}

fn checked_order(p: u64, degree: u32) -> Result<u64> {
    p.checked_pow(degree).ok_or_else(|| Error::TooLarge {
        what: format!("{p}^{degree}"),
        budget: u64::MAX,
    })
}

impl FieldTower {
    /// Builds F_{q^n}, q = p^e, on the canonical modulus.
    pub fn new(p: u64, e: u32, n: u32) -> Result<Self> {
        Self::validate(p, e, n)?;
        let modulus = fp_poly::canonical_modulus(p, e * n);
        Self::build(p, e, n, modulus)
    }

    /// Builds the tower on a caller-supplied monic irreducible modulus.
    pub fn with_modulus(p: u64, e: u32, n: u32, modulus: Vec<u64>) -> Result<Self> {
        Self::validate(p, e, n)?;
        let k = (e * n) as usize;
        if modulus.len() != k + 1 {
            return Err(Error::InvalidModulus(format!(
                "expected {} coefficients, got {}",
                k + 1,
                modulus.len()
            )));
        }
        if modulus[k] != 1 || modulus.iter().any(|&c| c >= p) {
            return Err(Error::InvalidModulus("must be monic with residues in [0, p)".into()));
        }
        if !fp_poly::is_irreducible(&modulus, p) {
            return Err(Error::InvalidModulus(format!("{modulus:?} is reducible")));
        }
        Self::build(p, e, n, modulus)
    }

    pub fn from_descriptor(d: &FieldDescriptor) -> Result<Self> {
        match &d.modulus {
            Some(m) => Self::with_modulus(d.p, d.e, d.n, m.clone()),
            None => Self::new(d.p, d.e, d.n),
        }
    }

    pub fn descriptor(&self) -> FieldDescriptor {
        FieldDescriptor { p: self.p, e: self.e, n: self.n, modulus: Some(self.modulus.clone()) }
    }

    fn validate(p: u64, e: u32, n: u32) -> Result<()> {
        if !fp_poly::is_prime(p) {
            return Err(Error::NonPrime(p));
        }
        if e == 0 || n == 0 {
            return Err(Error::BadParameters("e and n must be positive".into()));
        }
        checked_order(p, e * n)?;
        Ok(())
    }

    fn build(p: u64, e: u32, n: u32, modulus: Vec<u64>) -> Result<Self> {
        let degree = e * n;
        let order = checked_order(p, degree)?;
        let q = p.pow(e);
        let group = order - 1;
        let qpow = (0..n)
            .map(|j| {
                let mut acc: u128 = 1;
                for _ in 0..j {
                    acc = acc * q as u128 % group.max(1) as u128;
                }
                acc as u64
            })
            .collect();
        let mut t = FieldTower {
            p,
            e,
            n,
            degree,
            q,
            order,
            modulus,
            budget: DEFAULT_BUDGET,
            backend: Backend::Poly,
            qpow,
            basis: Vec::new(),
            dual: Vec::new(),
            fq: Vec::new(),
        };
        if order <= TABLE_LIMIT {
            t.backend = t.build_tables();
        }
        t.build_fq_structure();
        Ok(t)
    }

    fn build_tables(&self) -> Backend {
        let group = self.order - 1;
        let g = self.find_primitive();
        let mut exp = vec![0u32; group as usize];
        let mut log = vec![0u32; self.order as usize];
        let gd = self.digits(g);
        let mut cur = vec![1u64];
        cur.resize(self.degree as usize, 0);
        for i in 0..group {
            let code = self.encode(&cur);
            exp[i as usize] = code as u32;
            log[code as usize] = i as u32;
            cur = self.poly_mul_digits(&cur, &gd);
        }
        let zech = if self.p == 2 {
            Vec::new()
        } else {
            (0..group)
                .map(|k| {
                    let mut d = self.digits(Elem(exp[k as usize] as u64));
                    d[0] = add_mod(d[0], 1, self.p);
                    let c = self.encode(&d);
                    if c == 0 {
                        u32::MAX
                    } else {
                        log[c as usize]
                    }
                })
                .collect()
        };
        Backend::Table { exp, log, zech }
    }

    /// Smallest code of multiplicative order `order - 1`.
    fn find_primitive(&self) -> Elem {
        let group = self.order - 1;
        if group == 1 {
            return Elem::ONE;
        }
        let factors = fp_poly::prime_factors(group);
        (1..self.order)
            .map(Elem)
            .find(|&x| factors.iter().all(|&r| self.pow_poly(x, group / r) != Elem::ONE))
            .expect("the multiplicative group is cyclic")
    }

    fn build_fq_structure(&mut self) {
        let n = self.n as usize;
        if self.e == 1 {
            // power basis of the modulus root; coordinates are the digits
            self.basis = (0..n).map(|i| Elem(self.p.pow(i as u32))).collect();
            self.dual = Vec::new();
            self.fq = (0..self.p).map(Elem).collect();
            return;
        }
        // F_q = image of the absolute trace to F_q; enumerate the prime-field
        // span of traces of power-basis monomials
        let mut fq: Vec<Elem> = Vec::new();
        let monomials: Vec<Elem> = (0..self.degree).map(|i| Elem(self.p.pow(i))).collect();
        let traces: Vec<Elem> = monomials.iter().map(|&m| self.trace(m)).collect();
        let mut span = vec![Elem::ZERO];
        for tr in traces {
            if span.contains(&tr) {
                continue;
            }
            let mut next = Vec::with_capacity(span.len() * self.p as usize);
            for &s in &span {
                let mut acc = s;
                for _ in 0..self.p {
                    next.push(acc);
                    acc = self.add(acc, tr);
                }
            }
            next.sort();
            next.dedup();
            span = next;
            if span.len() as u64 == self.q {
                break;
            }
        }
        fq.extend(span);
        fq.sort();
        self.fq = fq;

        // generator of F_{q^n} over F_q: first element outside every maximal subfield
        let maximal: Vec<u32> = fp_poly::prime_factors(self.n as u64)
            .into_iter()
            .map(|r| self.n / r as u32)
            .collect();
        let theta = (1..self.order)
            .map(Elem)
            .find(|&x| maximal.iter().all(|&d| self.frob(x, d as i64) != x))
            .expect("a generator exists");
        let mut basis = Vec::with_capacity(n);
        let mut cur = Elem::ONE;
        for _ in 0..n {
            basis.push(cur);
            cur = self.mul(cur, theta);
        }
        let gram = Matrix::from_fn(n, n, |i, j| self.trace(self.mul(basis[i], basis[j])));
        let ginv = linalg::inverse(self, &gram).expect("trace form is nondegenerate");
        self.dual = (0..n)
            .map(|j| {
                (0..n).fold(Elem::ZERO, |acc, k| self.add(acc, self.mul(ginv.get(j, k), basis[k])))
            })
            .collect();
        self.basis = basis;
    }

    pub fn p(&self) -> u64 {
        self.p
    }
    pub fn e(&self) -> u32 {
        self.e
    }
    pub fn n(&self) -> u32 {
        self.n
    }
    pub fn q(&self) -> u64 {
        self.q
    }
    /// Number of elements of F_{q^n}.
    pub fn order(&self) -> u64 {
        self.order
    }
    /// Degree of F_{q^n} over F_p.
    pub fn degree(&self) -> u32 {
        self.degree
    }
    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }
    pub fn budget(&self) -> u64 {
        self.budget
    }
    pub fn set_budget(&mut self, budget: u64) {
        self.budget = budget;
    }
    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }
    pub fn has_tables(&self) -> bool {
        matches!(self.backend, Backend::Table { .. })
    }

    /// Fails with `BudgetExceeded` when `size` items would be enumerated.
    pub fn check_budget(&self, size: u128) -> Result<()> {
        if size > self.budget as u128 {
            Err(Error::BudgetExceeded { size, budget: self.budget as u128 })
        } else {
            Ok(())
        }
    }

    // ---- encoding ----

    pub fn digits(&self, x: Elem) -> Vec<u64> {
        let mut c = x.0;
        (0..self.degree)
            .map(|_| {
                let d = c % self.p;
                c /= self.p;
                d
            })
            .collect()
    }

    fn encode(&self, digits: &[u64]) -> u64 {
        digits.iter().rev().fold(0u64, |acc, &d| acc * self.p + d)
    }

    pub fn from_digits(&self, digits: &[u64]) -> Result<Elem> {
        if digits.len() != self.degree as usize {
            return Err(Error::InvalidElement(format!(
                "expected {} coefficients, got {}",
                self.degree,
                digits.len()
            )));
        }
        if let Some(bad) = digits.iter().find(|&&d| d >= self.p) {
            return Err(Error::InvalidElement(format!("residue {bad} out of range")));
        }
        Ok(Elem(self.encode(digits)))
    }

    pub fn from_code(&self, code: u64) -> Result<Elem> {
        if code >= self.order {
            return Err(Error::InvalidElement(format!("code {code} >= field order {}", self.order)));
        }
        Ok(Elem(code))
    }

    pub fn to_json(&self, x: Elem) -> ElemJson {
        ElemJson { coeffs: self.digits(x) }
    }

    pub fn from_json(&self, j: &ElemJson) -> Result<Elem> {
        self.from_digits(&j.coeffs)
    }

    /// Image of the integer `c` under Z -> F_p ⊆ F_{q^n}.
    pub fn from_int(&self, c: i64) -> Elem {
        Elem(c.rem_euclid(self.p as i64) as u64)
    }

    // ---- arithmetic ----

    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        if self.p == 2 {
            return Elem(a.0 ^ b.0);
        }
        match &self.backend {
            Backend::Table { exp, log, zech } => {
                if a.0 == 0 {
                    return b;
                }
                if b.0 == 0 {
                    return a;
                }
                let group = (self.order - 1) as u32;
                let la = log[a.0 as usize];
                let lb = log[b.0 as usize];
                let k = if lb >= la { lb - la } else { lb + group - la };
                let z = zech[k as usize];
                if z == u32::MAX {
                    return Elem::ZERO;
                }
                let s = la as u64 + z as u64;
                let s = if s >= group as u64 { s - group as u64 } else { s };
                Elem(exp[s as usize] as u64)
            }
            Backend::Poly => {
                let (da, db) = (self.digits(a), self.digits(b));
                let s: Vec<u64> = da.iter().zip(&db).map(|(&x, &y)| add_mod(x, y, self.p)).collect();
                Elem(self.encode(&s))
            }
        }
    }

    #[inline]
    pub fn neg(&self, a: Elem) -> Elem {
        if self.p == 2 || a.0 == 0 {
            return a;
        }
        match &self.backend {
            Backend::Table { exp, log, .. } => {
                let group = self.order - 1;
                let s = (log[a.0 as usize] as u64 + group / 2) % group;
                Elem(exp[s as usize] as u64)
            }
            Backend::Poly => {
                let d: Vec<u64> = self.digits(a).iter().map(|&x| sub_mod(0, x, self.p)).collect();
                Elem(self.encode(&d))
            }
        }
    }

    #[inline]
    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        if a.0 == 0 || b.0 == 0 {
            return Elem::ZERO;
        }
        match &self.backend {
            Backend::Table { exp, log, .. } => {
                let group = self.order - 1;
                let s = log[a.0 as usize] as u64 + log[b.0 as usize] as u64;
                let s = if s >= group { s - group } else { s };
                Elem(exp[s as usize] as u64)
            }
            Backend::Poly => {
                let r = self.poly_mul_digits(&self.digits(a), &self.digits(b));
                Elem(self.encode(&r))
            }
        }
    }

    fn poly_mul_digits(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let mut r = fp_poly::poly_mulmod(a, b, &self.modulus, self.p);
        r.resize(self.degree as usize, 0);
        r
    }

    fn pow_poly(&self, x: Elem, mut exp: u64) -> Elem {
        let mut acc = Elem::ONE;
        let mut base = self.digits(x);
        let mut accd = self.digits(acc);
        while exp > 0 {
            if exp & 1 == 1 {
                accd = self.poly_mul_digits(&accd, &base);
            }
            base = self.poly_mul_digits(&base, &base);
            exp >>= 1;
        }
        acc.0 = self.encode(&accd);
        acc
    }

    /// x^k, with 0^0 = 1.
    pub fn pow(&self, x: Elem, k: u64) -> Elem {
        if k == 0 {
            return Elem::ONE;
        }
        if x.0 == 0 {
            return Elem::ZERO;
        }
        let group = self.order - 1;
        match &self.backend {
            Backend::Table { exp, log, .. } => {
                let s = (log[x.0 as usize] as u128 * (k % group) as u128 % group as u128) as usize;
                Elem(exp[s] as u64)
            }
            Backend::Poly => self.pow_poly(x, k % group),
        }
    }

    pub fn inv(&self, x: Elem) -> Result<Elem> {
        if x.0 == 0 {
            return Err(Error::DivisionByZero);
        }
        match &self.backend {
            Backend::Table { exp, log, .. } => {
                let group = (self.order - 1) as u32;
                let l = log[x.0 as usize];
                Ok(Elem(exp[if l == 0 { 0 } else { (group - l) as usize }] as u64))
            }
            Backend::Poly => Ok(self.pow_poly(x, self.order - 2)),
        }
    }

    pub fn div(&self, a: Elem, b: Elem) -> Result<Elem> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// x^{q^j}; `j` is taken mod n.
    #[inline]
    pub fn frob(&self, x: Elem, j: i64) -> Elem {
        let j = j.rem_euclid(self.n as i64) as usize;
        if j == 0 || x.0 <= 1 {
            return x;
        }
        let group = self.order - 1;
        match &self.backend {
            Backend::Table { exp, log, .. } => {
                let s = log[x.0 as usize] as u64 * self.qpow[j] % group;
                Elem(exp[s as usize] as u64)
            }
            Backend::Poly => self.pow_poly(x, self.qpow[j]),
        }
    }

    /// q^j mod (order - 1), the exponent of the j-th Frobenius on units.
    pub fn frob_exponent(&self, j: u32) -> u64 {
        self.qpow[(j % self.n) as usize]
    }

    pub fn log(&self, x: Elem) -> Option<u64> {
        match &self.backend {
            Backend::Table { log, .. } if x.0 != 0 => Some(log[x.0 as usize] as u64),
            _ => None,
        }
    }

    fn check_divisor(&self, d: u32) -> Result<()> {
        if d == 0 || !self.n.is_multiple_of(d) {
            Err(Error::NotADivisor { d, n: self.n })
        } else {
            Ok(())
        }
    }

    /// Relative trace Tr_{q^n|q^d}.
    pub fn trace_to(&self, x: Elem, d: u32) -> Result<Elem> {
        self.check_divisor(d)?;
        Ok((0..self.n / d).fold(Elem::ZERO, |acc, j| self.add(acc, self.frob(x, (j * d) as i64))))
    }

    /// Relative norm N_{q^n|q^d}.
    pub fn norm_to(&self, x: Elem, d: u32) -> Result<Elem> {
        self.check_divisor(d)?;
        Ok((0..self.n / d).fold(Elem::ONE, |acc, j| self.mul(acc, self.frob(x, (j * d) as i64))))
    }

    /// Absolute trace Tr_{q^n|q}.
    pub fn trace(&self, x: Elem) -> Elem {
        (0..self.n).fold(Elem::ZERO, |acc, j| self.add(acc, self.frob(x, j as i64)))
    }

    /// Absolute norm N_{q^n|q}.
    pub fn norm(&self, x: Elem) -> Elem {
        (0..self.n).fold(Elem::ONE, |acc, j| self.mul(acc, self.frob(x, j as i64)))
    }

    pub fn in_subfield(&self, x: Elem, d: u32) -> Result<bool> {
        self.check_divisor(d)?;
        Ok(self.frob(x, d as i64) == x)
    }

    /// The elements of F_q in enumeration order.
    pub fn fq_elements(&self) -> &[Elem] {
        &self.fq
    }

    /// The F_q-basis of F_{q^n} used for coordinates.
    pub fn fq_basis(&self) -> &[Elem] {
        &self.basis
    }

    /// Coordinates of `x` over F_q w.r.t. [`Self::fq_basis`]; each entry lies in F_q.
    pub fn coords(&self, x: Elem) -> Vec<Elem> {
        if self.e == 1 {
            return self.digits(x).into_iter().map(Elem).collect();
        }
        self.dual.iter().map(|&dj| self.trace(self.mul(x, dj))).collect()
    }

    pub fn from_coords(&self, c: &[Elem]) -> Elem {
        c.iter().zip(&self.basis).fold(Elem::ZERO, |acc, (&ci, &b)| self.add(acc, self.mul(ci, b)))
    }

    /// Every element of F_{q^n} in enumeration order, within budget.
    pub fn elements(&self) -> Result<impl Iterator<Item = Elem>> {
        self.check_budget(self.order as u128)?;
        Ok((0..self.order).map(Elem))
    }

    /// The elements of the subfield F_{q^d}, sorted by code.
    pub fn subfield_elements(&self, d: u32) -> Result<Vec<Elem>> {
        self.check_divisor(d)?;
        let size = (self.q as u128).pow(d);
        self.check_budget(size)?;
        if d == self.n {
            return Ok((0..self.order).map(Elem).collect());
        }
        // Tr_{q^n|q^d} maps the F_q-basis onto a spanning set of F_{q^d}
        let traces: Vec<Elem> =
            self.basis.iter().map(|&b| self.trace_to(b, d).expect("d divides n")).collect();
        let mut span = vec![Elem::ZERO];
        for tr in traces {
            if span.len() as u128 == size {
                break;
            }
            if span.contains(&tr) {
                continue;
            }
            let mut next = Vec::with_capacity(span.len() * self.fq.len());
            for &s in &span {
                for &c in &self.fq {
                    next.push(self.add(s, self.mul(c, tr)));
                }
            }
            next.sort();
            next.dedup();
            span = next;
        }
        debug_assert_eq!(span.len() as u128, size);
        Ok(span)
    }

    /// An F_q-basis of F_{q^d}: the first elements in enumeration order that
    /// raise the rank.
    pub fn subfield_basis(&self, d: u32) -> Result<Vec<Elem>> {
        self.check_divisor(d)?;
        let mut basis = Vec::with_capacity(d as usize);
        for x in self.subfield_elements(d)? {
            if basis.len() == d as usize {
                break;
            }
            basis.push(x);
            if self.fq_rank(&basis) < basis.len() {
                basis.pop();
            }
        }
        Ok(basis)
    }

    /// All λ with λ^k = c, sorted by code.
    pub fn solve_power(&self, c: Elem, k: u64) -> Result<Vec<Elem>> {
        if k == 0 {
            return if c == Elem::ONE {
                Ok((1..self.order).map(Elem).collect())
            } else {
                Ok(Vec::new())
            };
        }
        if c.is_zero() {
            return Ok(vec![Elem::ZERO]);
        }
        let group = self.order - 1;
        if let Backend::Table { exp, log, .. } = &self.backend {
            // k·x ≡ log c (mod group)
            let target = log[c.0 as usize] as u64;
            let g = gcd(k % group, group);
            let g = if g == 0 { group } else { g };
            if !target.is_multiple_of(g) {
                return Ok(Vec::new());
            }
            let m = group / g;
            let kk = (k % group) / g;
            let x0 = if m == 1 { 0 } else { (target / g) as u128 * mod_inverse(kk % m, m) as u128 % m as u128 };
            let mut out: Vec<Elem> =
                (0..g).map(|t| Elem(exp[((x0 as u64) + t * m) as usize % group as usize] as u64)).collect();
            out.sort();
            return Ok(out);
        }
        self.check_budget(self.order as u128)?;
        Ok((1..self.order).map(Elem).filter(|&x| self.pow(x, k) == c).collect())
    }

    /// F_q-independence of `elems`, decided by the Moore determinant and
    /// cross-checked by echelon reduction over F_q.
    pub fn is_independent(&self, elems: &[Elem]) -> bool {
        let by_moore = !self.moore_det(elems).is_zero();
        let by_echelon = self.fq_rank(elems) == elems.len();
        assert_eq!(by_moore, by_echelon, "Moore determinant and echelon rank disagree on {elems:?}");
        by_moore
    }

    /// det(elems_i^{q^j}) for i, j < |elems|.
    pub fn moore_det(&self, elems: &[Elem]) -> Elem {
        let k = elems.len();
        let m = Matrix::from_fn(k, k, |i, j| self.frob(elems[i], j as i64));
        linalg::det(self, &m)
    }

    /// Dimension over F_q of the span of `elems`.
    pub fn fq_rank(&self, elems: &[Elem]) -> usize {
        let rows: Vec<Vec<Elem>> = elems.iter().map(|&x| self.coords(x)).collect();
        if rows.is_empty() {
            return 0;
        }
        linalg::rank(self, &Matrix::from_rows(&rows))
    }
}

/// F_{q^d} built as a tower of its own, together with its embedding into a
/// larger tower F_{q^n}.
pub struct Subtower {
    small: FieldTower,
    image: Vec<Elem>,
    back: HashMap<Elem, Elem>,
}

impl Subtower {
    pub fn field(&self) -> &FieldTower {
        &self.small
    }

    pub fn embed(&self, x: Elem) -> Elem {
        self.image[x.code() as usize]
    }

    /// Inverse of [`Self::embed`] on F_{q^d}.
    pub fn restrict(&self, x: Elem) -> Result<Elem> {
        self.back
            .get(&x)
            .copied()
            .ok_or_else(|| Error::InvalidElement(format!("{} is outside the subfield", x.code())))
    }
}

impl FieldTower {
    /// F_{q^d} on its canonical modulus, embedded by the smallest-code root of
    /// that modulus inside this tower.
    pub fn subtower(&self, d: u32) -> Result<Subtower> {
        let elems = self.subfield_elements(d)?;
        let small = FieldTower::new(self.p, self.e, d)?.with_budget(self.budget);
        let m = small.modulus().to_vec();
        let root = elems
            .iter()
            .copied()
            .find(|&x| {
                m.iter().rev().fold(Elem::ZERO, |acc, &c| self.add(self.mul(acc, x), self.from_int(c as i64)))
                    == Elem::ZERO
            })
            .ok_or_else(|| Error::InvalidModulus("subfield modulus has no root".into()))?;
        let powers: Vec<Elem> = (0..small.degree())
            .scan(Elem::ONE, |acc, _| {
                let cur = *acc;
                *acc = self.mul(*acc, root);
                Some(cur)
            })
            .collect();
        let image: Vec<Elem> = (0..small.order())
            .map(|c| {
                small
                    .digits(Elem(c))
                    .iter()
                    .zip(&powers)
                    .fold(Elem::ZERO, |acc, (&dg, &pw)| self.add(acc, self.mul(self.from_int(dg as i64), pw)))
            })
            .collect();
        let back = image.iter().enumerate().map(|(c, &x)| (x, Elem(c as u64))).collect();
        Ok(Subtower { small, image, back })
    }
}

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn mod_inverse(a: u64, m: u64) -> u64 {
    let (mut old_r, mut r) = (a as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let qt = old_r / r;
        (old_r, r) = (r, old_r - qt * r);
        (old_s, s) = (s, old_s - qt * s);
    }
    old_s.rem_euclid(m as i128) as u64
}
