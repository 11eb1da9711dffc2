//! F_q-subspaces of F_{q^n}^r, the linear sets they define, and the
//! constructions of equal linear sets (clubs, pseudoregulus, generalized
//! perp and generalized pseudoregulus).
//!
//! A [`Subspace`] is stored as the reduced echelon basis over F_q of its
//! flattened coordinates, so two subspaces are equal iff their bases are.
//! Vectors act on the left of transforms: v ↦ v·M.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::dickson::{mask_indices, DicksonMatrix};
use crate::error::{Error, Result};
use crate::gf::linalg::{self, Matrix};
use crate::gf::{gcd, Elem, ElemJson, FieldTower};
use crate::linpoly::LinPoly;

/// Largest r accepted by [`multi_coeffs`].
pub const MAX_MULTI_R: usize = 4;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Subspace {
    r: usize,
    basis: Vec<Vec<Elem>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubspaceJson {
    pub r: usize,
    pub basis: Vec<Vec<ElemJson>>,
}

/// A projective point, scaled so that its first nonzero coordinate is 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point(Vec<Elem>);

impl Point {
    /// The point spanned by `v` and the scalar μ with v = μ·P.
    pub fn from_vector(t: &FieldTower, v: &[Elem]) -> Option<(Point, Elem)> {
        let mu = *v.iter().find(|x| !x.is_zero())?;
        let inv = t.inv(mu).ok()?;
        Some((Point(v.iter().map(|&x| t.mul(x, inv)).collect()), mu))
    }

    pub fn new(t: &FieldTower, v: &[Elem]) -> Result<Point> {
        Self::from_vector(t, v)
            .map(|(p, _)| p)
            .ok_or_else(|| Error::InvalidElement("the zero vector is not a point".into()))
    }

    pub fn coords(&self) -> &[Elem] {
        &self.0
    }
}

fn flatten(t: &FieldTower, v: &[Elem]) -> Vec<Elem> {
    v.iter().flat_map(|&x| t.coords(x)).collect()
}

fn unflatten(t: &FieldTower, r: usize, c: &[Elem]) -> Vec<Elem> {
    let n = t.n() as usize;
    (0..r).map(|j| t.from_coords(&c[j * n..(j + 1) * n])).collect()
}

impl Subspace {
    /// The F_q-span of `vectors`, each of length `r`.
    pub fn span(t: &FieldTower, r: usize, vectors: &[Vec<Elem>]) -> Result<Self> {
        if vectors.iter().any(|v| v.len() != r) {
            return Err(Error::AmbientMismatch);
        }
        let width = r * t.n() as usize;
        if vectors.is_empty() {
            return Ok(Subspace { r, basis: Vec::new() });
        }
        let rows: Vec<Vec<Elem>> = vectors.iter().map(|v| flatten(t, v)).collect();
        let (red, _) = linalg::rref(t, &Matrix::from_rows(&rows));
        debug_assert_eq!(red.cols(), width);
        let basis = red.to_rows().iter().map(|row| unflatten(t, r, row)).collect();
        Ok(Subspace { r, basis })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    /// F_q-dimension.
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<Elem>] {
        &self.basis
    }

    pub fn contains(&self, t: &FieldTower, v: &[Elem]) -> bool {
        let mut vs = self.basis.clone();
        vs.push(v.to_vec());
        Subspace::span(t, self.r, &vs).map(|s| s.dim() == self.dim()).unwrap_or(false)
    }

    pub fn sum(&self, t: &FieldTower, other: &Subspace) -> Result<Subspace> {
        if self.r != other.r {
            return Err(Error::AmbientMismatch);
        }
        let vs: Vec<Vec<Elem>> = self.basis.iter().chain(&other.basis).cloned().collect();
        Subspace::span(t, self.r, &vs)
    }

    pub fn intersection_dim(&self, t: &FieldTower, other: &Subspace) -> Result<usize> {
        Ok(self.dim() + other.dim() - self.sum(t, other)?.dim())
    }

    /// λ·U
    pub fn scale(&self, t: &FieldTower, lambda: Elem) -> Subspace {
        let vs: Vec<Vec<Elem>> =
            self.basis.iter().map(|v| v.iter().map(|&x| t.mul(lambda, x)).collect()).collect();
        Subspace::span(t, self.r, &vs).expect("same ambient")
    }

    /// {v·M : v ∈ U} for an r×r matrix M over F_{q^n}.
    pub fn transform(&self, t: &FieldTower, m: &Matrix) -> Result<Subspace> {
        if m.rows() != self.r || m.cols() != self.r {
            return Err(Error::AmbientMismatch);
        }
        let vs: Vec<Vec<Elem>> = self
            .basis
            .iter()
            .map(|v| {
                (0..self.r)
                    .map(|j| (0..self.r).fold(Elem::ZERO, |acc, i| t.add(acc, t.mul(v[i], m.get(i, j)))))
                    .collect()
            })
            .collect();
        Subspace::span(t, self.r, &vs)
    }

    /// Every vector of U, the zero vector first.
    pub fn vectors(&self, t: &FieldTower) -> Result<Vec<Vec<Elem>>> {
        t.check_budget((t.q() as u128).saturating_pow(self.dim() as u32))?;
        let mut out = vec![vec![Elem::ZERO; self.r]];
        for b in &self.basis {
            let mut next = Vec::with_capacity(out.len() * t.q() as usize);
            for v in &out {
                for &c in t.fq_elements() {
                    next.push(v.iter().zip(b).map(|(&x, &y)| t.add(x, t.mul(c, y))).collect());
                }
            }
            out = next;
        }
        Ok(out)
    }

    /// Whether U is closed under multiplication by F_{q^d}.
    pub fn is_fqd_subspace(&self, t: &FieldTower, d: u32) -> Result<bool> {
        let gens = t.subfield_basis(d)?;
        Ok(self.basis.iter().all(|v| {
            gens.iter().all(|&g| self.contains(t, &v.iter().map(|&x| t.mul(g, x)).collect::<Vec<_>>()))
        }))
    }

    /// `Some(f)` when U = {(x, f(x))}.
    pub fn as_graph(&self, t: &FieldTower) -> Option<LinPoly> {
        let n = t.n() as usize;
        if self.r != 2 || self.dim() != n {
            return None;
        }
        // in reduced echelon form a graph has its pivots exactly in the x-block
        let basis = t.fq_basis();
        let mut ys = Vec::with_capacity(n);
        for (k, v) in self.basis.iter().enumerate() {
            if v[0] != basis[k] {
                return None;
            }
            ys.push(v[1]);
        }
        LinPoly::interpolate(t, basis, &ys).ok()
    }

    pub fn to_json(&self, t: &FieldTower) -> SubspaceJson {
        SubspaceJson {
            r: self.r,
            basis: self.basis.iter().map(|v| v.iter().map(|&x| t.to_json(x)).collect()).collect(),
        }
    }

    pub fn from_json(t: &FieldTower, j: &SubspaceJson) -> Result<Self> {
        let vs = j
            .basis
            .iter()
            .map(|v| v.iter().map(|x| t.from_json(x)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Subspace::span(t, j.r, &vs)
    }
}

/// {(x, f(x)) : x ∈ F_{q^n}}
pub fn graph_subspace(t: &FieldTower, f: &LinPoly) -> Subspace {
    let vs: Vec<Vec<Elem>> = t.fq_basis().iter().map(|&b| vec![b, f.evaluate(t, b)]).collect();
    Subspace::span(t, 2, &vs).expect("graph vectors have length 2")
}

/// {(x_0, …, x_{r-2}, f_0(x_0) + … + f_{r-2}(x_{r-2}))}
pub fn multi_graph_subspace(t: &FieldTower, fs: &[LinPoly]) -> Subspace {
    let r = fs.len() + 1;
    let mut vs = Vec::new();
    for (j, f) in fs.iter().enumerate() {
        for &b in t.fq_basis() {
            let mut v = vec![Elem::ZERO; r];
            v[j] = b;
            v[r - 1] = f.evaluate(t, b);
            vs.push(v);
        }
    }
    Subspace::span(t, r, &vs).expect("consistent lengths")
}

/// The F_{q^n}-line of P as an F_q-subspace of dimension n.
fn line_of(t: &FieldTower, p: &Point) -> Subspace {
    let vs: Vec<Vec<Elem>> = t.fq_basis().iter().map(|&b| p.0.iter().map(|&x| t.mul(b, x)).collect()).collect();
    Subspace::span(t, p.0.len(), &vs).expect("point length is r")
}

/// dim_{F_q}(⟨P⟩_{F_{q^n}} ∩ U)
pub fn weight(t: &FieldTower, u: &Subspace, p: &Point) -> Result<u32> {
    if p.0.len() != u.r {
        return Err(Error::AmbientMismatch);
    }
    Ok(line_of(t, p).intersection_dim(t, u)? as u32)
}

/// For each point of L_U, the nonzero μ with μ·P ∈ U.
pub fn point_scalars(t: &FieldTower, u: &Subspace) -> Result<BTreeMap<Point, Vec<Elem>>> {
    let mut out: BTreeMap<Point, Vec<Elem>> = BTreeMap::new();
    for v in u.vectors(t)? {
        if let Some((p, mu)) = Point::from_vector(t, &v) {
            out.entry(p).or_default().push(mu);
        }
    }
    for mus in out.values_mut() {
        mus.sort();
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearSet {
    r: usize,
    n: u32,
    q: u64,
    rank: usize,
    points: BTreeMap<Point, u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointJson {
    pub coords: Vec<ElemJson>,
    pub weight: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearSetJson {
    pub points: Vec<PointJson>,
    pub spectrum: Vec<u64>,
}

impl LinearSet {
    pub fn points(&self) -> &BTreeMap<Point, u32> {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.points.contains_key(p)
    }

    /// Weight of `p`, 0 when it is not in the set.
    pub fn weight_of(&self, p: &Point) -> u32 {
        self.points.get(p).copied().unwrap_or(0)
    }

    /// (t_1, …, t_n), t_j being the number of points of weight j.
    pub fn spectrum(&self) -> Vec<u64> {
        let mut s = vec![0u64; self.n as usize];
        for &w in self.points.values() {
            s[w as usize - 1] += 1;
        }
        s
    }

    /// Σ_P (q^{w(P)} - 1), which must equal q^rank - 1.
    pub fn weighted_count(&self) -> u128 {
        self.points.values().map(|&w| (self.q as u128).pow(w) - 1).sum()
    }

    pub fn same_points(&self, other: &LinearSet) -> bool {
        self.points.len() == other.points.len() && self.points.keys().eq(other.points.keys())
    }

    pub fn to_json(&self, t: &FieldTower) -> LinearSetJson {
        LinearSetJson {
            points: self
                .points
                .iter()
                .map(|(p, &w)| PointJson { coords: p.0.iter().map(|&x| t.to_json(x)).collect(), weight: w })
                .collect(),
            spectrum: self.spectrum(),
        }
    }

    /// `weight,count` rows for every weight 1..=n.
    pub fn spectrum_csv(&self) -> String {
        let mut out = String::from("weight,count\n");
        for (j, c) in self.spectrum().iter().enumerate() {
            out.push_str(&format!("{},{}\n", j + 1, c));
        }
        out
    }
}

pub fn linear_set(t: &FieldTower, u: &Subspace) -> Result<LinearSet> {
    let scalars = point_scalars(t, u)?;
    let q = t.q() as usize;
    let points = scalars
        .into_iter()
        .map(|(p, mus)| {
            let mut w = 0u32;
            let mut size = 1usize;
            while size < mus.len() + 1 {
                size *= q;
                w += 1;
            }
            debug_assert_eq!(size, mus.len() + 1);
            (p, w)
        })
        .collect();
    Ok(LinearSet { r: u.r, n: t.n(), q: t.q(), rank: u.dim(), points })
}

/// L_U = L_W, by fingerprints when both are graphs and by enumeration otherwise.
pub fn sets_equal(t: &FieldTower, u: &Subspace, w: &Subspace) -> Result<bool> {
    if u.r != w.r {
        return Err(Error::AmbientMismatch);
    }
    if let (Some(f), Some(g)) = (u.as_graph(t), w.as_graph(t)) {
        let a = DicksonMatrix::from_poly(t, &f).fingerprint(t)?;
        let b = DicksonMatrix::from_poly(t, &g).fingerprint(t)?;
        return Ok(a == b);
    }
    sets_equal_by_enumeration(t, u, w)
}

pub fn sets_equal_by_enumeration(t: &FieldTower, u: &Subspace, w: &Subspace) -> Result<bool> {
    if u.r != w.r {
        return Err(Error::AmbientMismatch);
    }
    Ok(linear_set(t, u)?.same_points(&linear_set(t, w)?))
}

/// Both decision paths for L_U = L_W, and pointwise weight agreement.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SetComparison {
    pub by_fingerprint: Option<bool>,
    pub by_enumeration: bool,
    pub weights_agree: bool,
}

impl SetComparison {
    pub fn consistent(&self) -> bool {
        self.by_fingerprint.is_none_or(|b| b == self.by_enumeration)
    }
}

pub fn compare_sets(t: &FieldTower, u: &Subspace, w: &Subspace) -> Result<SetComparison> {
    if u.r != w.r {
        return Err(Error::AmbientMismatch);
    }
    let by_fingerprint = match (u.as_graph(t), w.as_graph(t)) {
        (Some(f), Some(g)) => Some(
            DicksonMatrix::from_poly(t, &f).fingerprint(t)? == DicksonMatrix::from_poly(t, &g).fingerprint(t)?,
        ),
        _ => None,
    };
    let (lu, lw) = (linear_set(t, u)?, linear_set(t, w)?);
    Ok(SetComparison { by_fingerprint, by_enumeration: lu.same_points(&lw), weights_agree: lu == lw })
}

/// Orthogonal complement in F_{q^n}^2 for b((x1,y1),(x2,y2)) = Tr(x1 y2 - x2 y1).
pub fn perp(t: &FieldTower, u: &Subspace) -> Result<Subspace> {
    if u.r != 2 {
        return Err(Error::BadParameters("perp is defined for r = 2".into()));
    }
    let basis = t.fq_basis();
    let rows: Vec<Vec<Elem>> = u
        .basis
        .iter()
        .map(|v| {
            let (x1, y1) = (v[0], v[1]);
            basis
                .iter()
                .map(|&b| t.neg(t.trace(t.mul(b, y1))))
                .chain(basis.iter().map(|&b| t.trace(t.mul(x1, b))))
                .collect()
        })
        .collect();
    let width = 2 * t.n() as usize;
    let sols = if rows.is_empty() {
        (0..width).map(|k| (0..width).map(|j| if j == k { Elem::ONE } else { Elem::ZERO }).collect()).collect()
    } else {
        linalg::nullspace(t, &Matrix::from_rows(&rows))
    };
    let vs: Vec<Vec<Elem>> = sols.iter().map(|c| unflatten(t, 2, c)).collect();
    Subspace::span(t, 2, &vs)
}

/// A transform M (v ↦ v·M) and the f with U·M = graph(f).
///
/// Candidates in order: identity, the coordinate swap, then the shears
/// (1, 0; c, 1) for c ≠ 0 in enumeration order.
pub fn normalize_off_infinity(t: &FieldTower, u: &Subspace) -> Result<(LinPoly, Matrix)> {
    if u.r != 2 {
        return Err(Error::BadParameters("normalization is defined for r = 2".into()));
    }
    if u.dim() != t.n() as usize {
        return Err(Error::NotMaxRank);
    }
    let (z, o) = (Elem::ZERO, Elem::ONE);
    let candidates = [Matrix::identity(2), Matrix::from_rows(&[vec![z, o], vec![o, z]])]
        .into_iter()
        .chain((1..t.order()).map(|c| Matrix::from_rows(&[vec![o, z], vec![Elem::from_code(c), o]])));
    for m in candidates {
        let image = u.transform(t, &m)?;
        if let Some(f) = image.as_graph(t) {
            return Ok((f, m));
        }
    }
    Err(Error::BadParameters("no candidate transform moves P_inf off the set".into()))
}

/// a·x + λ·Tr_{q^n|q}(b·x)
pub fn club_poly(t: &FieldTower, a: Elem, b: Elem, lambda: Elem) -> Result<LinPoly> {
    if b.is_zero() {
        return Err(Error::ZeroParameter("b"));
    }
    if lambda.is_zero() {
        return Err(Error::ZeroParameter("lambda"));
    }
    let n = t.n() as usize;
    let mut coeffs: Vec<Elem> = (0..n).map(|i| t.mul(lambda, t.frob(b, i as i64))).collect();
    coeffs[0] = t.add(coeffs[0], a);
    Ok(LinPoly::new(coeffs))
}

pub fn construct_club(t: &FieldTower, a: Elem, b: Elem, lambda: Elem) -> Result<Subspace> {
    Ok(graph_subspace(t, &club_poly(t, a, b, lambda)?))
}

/// a·x^{q^i} with gcd(i, n) = 1.
pub fn pseudoregulus_poly(t: &FieldTower, a: Elem, i: u32) -> Result<LinPoly> {
    if a.is_zero() {
        return Err(Error::ZeroParameter("a"));
    }
    if gcd(i as u64, t.n() as u64) != 1 {
        return Err(Error::BadExponent { i, n: t.n() });
    }
    Ok(LinPoly::monomial(t.n(), a, i))
}

pub fn construct_pseudoregulus(t: &FieldTower, a: Elem, i: u32) -> Result<Subspace> {
    Ok(graph_subspace(t, &pseudoregulus_poly(t, a, i)?))
}

/// Parameters of f(x) = f'(x) + Σ_{i<d} b_i Tr_{q^n|q^d}(a x)^{q^i}.
///
/// A nonzero b_0 is allowed and simply adds the F_{q^d}-linear term
/// b_0 Tr_{q^n|q^d}(ax) to f'.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Generalized {
    pub f_prime: LinPoly,
    pub b: Vec<Elem>,
    pub a: Elem,
    pub d: u32,
}

/// Partner choices for [`generalized_partner`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PartnerMode {
    /// W_ξ = U_ξ, so W = U.
    Identity,
    /// W_ξ = U_ξ^{⊥_d}.
    PerpD,
    /// Inner b_i y^{q^i} replaced by b_i y^{q^j}.
    Pseudoregulus(u32),
}

/// U = U_d ⊕ U_ξ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    pub u_d: Subspace,
    pub xi: Elem,
    pub u_xi: Subspace,
}

impl Generalized {
    pub fn new(t: &FieldTower, f_prime: LinPoly, b: Vec<Elem>, a: Elem, d: u32) -> Result<Self> {
        let n = t.n();
        if d <= 1 || d >= n || !n.is_multiple_of(d) {
            return Err(Error::BadParameters(format!("need 1 < d < n with d | n, got d = {d}, n = {n}")));
        }
        if a.is_zero() {
            return Err(Error::ZeroParameter("a"));
        }
        if b.len() != d as usize {
            return Err(Error::BadParameters(format!("b must have {d} entries")));
        }
        for &bi in &b {
            t.from_code(bi.code())?;
            if !t.in_subfield(bi, d)? {
                return Err(Error::BadParameters(format!("b entry {} is outside F_(q^{d})", bi.code())));
            }
        }
        if b[1..].iter().all(|x| x.is_zero()) {
            return Err(Error::BadParameters("b_1, ..., b_(d-1) are all zero".into()));
        }
        if f_prime.len() != n as usize {
            return Err(Error::BadParameters("f' has the wrong length".into()));
        }
        if !f_prime.is_zero() && f_prime.linearity_gcd()? % d != 0 {
            return Err(Error::BadParameters(format!("f' is not F_(q^{d})-linear")));
        }
        Ok(Generalized { f_prime, b, a, d })
    }

    /// The coefficient at index dk + i gains b_i a^{q^{dk+i}}.
    pub fn poly(&self, t: &FieldTower) -> LinPoly {
        let n = t.n() as usize;
        let d = self.d as usize;
        let mut coeffs = self.f_prime.coeffs().to_vec();
        for (i, &bi) in self.b.iter().enumerate() {
            if bi.is_zero() {
                continue;
            }
            for k in 0..n / d {
                let idx = d * k + i;
                coeffs[idx] = t.add(coeffs[idx], t.mul(bi, t.frob(self.a, idx as i64)));
            }
        }
        LinPoly::new(coeffs)
    }

    pub fn subspace(&self, t: &FieldTower) -> Subspace {
        graph_subspace(t, &self.poly(t))
    }

    /// h(y) = Σ b_i y^{q^i} as a length-d polynomial over F_{q^d}.
    pub fn inner(&self) -> LinPoly {
        LinPoly::new(self.b.clone())
    }

    /// First ξ in enumeration order with Tr_{q^n|q^d}(aξ) = 1.
    pub fn xi(&self, t: &FieldTower) -> Result<Elem> {
        for c in 1..t.order() {
            let x = Elem::from_code(c);
            if t.trace_to(t.mul(self.a, x), self.d)? == Elem::ONE {
                return Ok(x);
            }
        }
        Err(Error::DecompositionFailed("no ξ with trace 1".into()))
    }

    pub fn decompose(&self, t: &FieldTower) -> Result<Decomposition> {
        let n = t.n() as usize;
        let d = self.d as usize;
        // ker Tr_{q^n|q^d}(a·)
        let tr = LinPoly::new(
            (0..n).map(|k| if k % d == 0 { t.frob(self.a, k as i64) } else { Elem::ZERO }).collect(),
        );
        let kernel = tr.kernel(t);
        let u_d = Subspace::span(
            t,
            2,
            &kernel.iter().map(|&x| vec![x, self.f_prime.evaluate(t, x)]).collect::<Vec<_>>(),
        )?;
        let xi = self.xi(t)?;
        let fxi = self.f_prime.evaluate(t, xi);
        let h = self.inner();
        let u_xi = Subspace::span(
            t,
            2,
            &t.subfield_basis(self.d)?
                .iter()
                .map(|&y| vec![t.mul(xi, y), t.add(t.mul(fxi, y), h.evaluate(t, y))])
                .collect::<Vec<_>>(),
        )?;
        if u_d.dim() != n - d || u_xi.dim() != d {
            return Err(Error::DecompositionFailed(format!(
                "dimensions {} + {} instead of {} + {d}",
                u_d.dim(),
                u_xi.dim(),
                n - d
            )));
        }
        if u_d.sum(t, &u_xi)? != self.subspace(t) {
            return Err(Error::DecompositionFailed("U_d + U_xi differs from U".into()));
        }
        Ok(Decomposition { u_d, xi, u_xi })
    }

    /// The partner data: same f', a and d, inner coefficients replaced.
    pub fn partner(&self, t: &FieldTower, mode: PartnerMode) -> Result<Generalized> {
        let d = self.d;
        let b = match mode {
            PartnerMode::Identity => self.b.clone(),
            PartnerMode::PerpD => self.inner().adjoint(t).coeffs().to_vec(),
            PartnerMode::Pseudoregulus(j) => {
                let (i, bi) = self
                    .inner()
                    .as_monomial()
                    .ok_or_else(|| Error::BadMode("inner polynomial is not a monomial".into()))?;
                if i == 0 || gcd(i as u64, d as u64) != 1 {
                    return Err(Error::BadMode(format!("inner exponent {i} is not coprime to {d}")));
                }
                if j == 0 || j >= d || gcd(j as u64, d as u64) != 1 {
                    return Err(Error::BadMode(format!("exponent {j} is not coprime to {d}")));
                }
                let mut c = vec![Elem::ZERO; d as usize];
                c[j as usize] = bi;
                c
            }
        };
        Generalized::new(t, self.f_prime.clone(), b, self.a, d)
    }
}

pub fn construct_generalized(t: &FieldTower, f_prime: LinPoly, b: Vec<Elem>, a: Elem, d: u32) -> Result<Subspace> {
    Ok(Generalized::new(t, f_prime, b, a, d)?.subspace(t))
}

/// W = U_d ⊕ W_ξ for the chosen inner partner.
pub fn generalized_partner(t: &FieldTower, g: &Generalized, mode: PartnerMode) -> Result<Subspace> {
    let partner = g.partner(t, mode)?;
    let (du, dw) = (g.decompose(t)?, partner.decompose(t)?);
    if du.u_d != dw.u_d || du.xi != dw.xi {
        return Err(Error::DecompositionFailed("partner does not share U_d".into()));
    }
    du.u_d.sum(t, &dw.u_xi)
}

/// Points P of L_U with λ·F_{q^d}·P ⊆ U for some λ, each with the smallest such λ.
pub fn fqd_lines(t: &FieldTower, u: &Subspace, d: u32) -> Result<Vec<(Point, Elem)>> {
    let gens = t.subfield_basis(d)?;
    let mut out = Vec::new();
    for (p, mus) in point_scalars(t, u)? {
        if mus.len() + 1 < (t.q() as usize).pow(d) {
            continue;
        }
        let set: HashSet<Elem> = mus.iter().copied().collect();
        if let Some(&lam) = mus.iter().find(|&&l| gens.iter().all(|&g| set.contains(&t.mul(l, g)))) {
            out.push((p, lam));
        }
    }
    Ok(out)
}

/// Coefficients det C_ψ of the polynomial F attached to r-1 Dickson matrices.
///
/// Entry `Σ_i φ(i) r^i` holds det C_ψ for I = {i : φ(i) > 0} and ψ = φ - 1
/// on I, where C_ψ[i|j] = A_{ψ(j)}[i|j]. Entry 0 (empty I) is 1, and for
/// r = 2 the table is the principal-minor fingerprint.
pub fn multi_coeffs(t: &FieldTower, mats: &[DicksonMatrix]) -> Result<Vec<Elem>> {
    let r = mats.len() + 1;
    if !(2..=MAX_MULTI_R).contains(&r) {
        return Err(Error::BadParameters(format!("r = {r} is outside 2..={MAX_MULTI_R}")));
    }
    let n = mats[0].n();
    if mats.iter().any(|m| m.n() != n) {
        return Err(Error::AmbientMismatch);
    }
    let size = (r as u128).pow(n as u32);
    if size > (1 << 20) {
        return Err(Error::TooLarge { what: format!("{r}^{n} coefficients"), budget: 1 << 20 });
    }
    let mut out = Vec::with_capacity(size as usize);
    for code in 0..size as u64 {
        let mut phi = Vec::with_capacity(n);
        let mut c = code;
        for _ in 0..n {
            phi.push((c % r as u64) as usize);
            c /= r as u64;
        }
        let idx: Vec<usize> = (0..n).filter(|&i| phi[i] > 0).collect();
        let k = idx.len();
        let mut buf: Vec<Elem> = Vec::with_capacity(k * k);
        for &i in &idx {
            for &j in &idx {
                buf.push(mats[phi[j] - 1].get(i, j));
            }
        }
        out.push(linalg::det_in_place(t, &mut buf, k));
    }
    Ok(out)
}

/// The principal-minor index of a set in [`multi_coeffs`] layout for r = 2.
pub fn multi_code_of_mask(mask: u64, n: usize) -> u64 {
    mask_indices(mask, n).iter().map(|&i| 1u64 << i).sum()
}

/// Projection of L ∖ {V} from V onto the line x_k = 0, k the first nonzero
/// coordinate of V.
pub fn cone_base(t: &FieldTower, l: &LinearSet, vertex: &Point) -> Result<BTreeSet<Point>> {
    if l.r != 3 || vertex.0.len() != 3 {
        return Err(Error::BadParameters("cones are checked in PG(2, q^n)".into()));
    }
    if !l.contains(vertex) {
        return Err(Error::VertexNotInSet);
    }
    let k = vertex.0.iter().position(|x| !x.is_zero()).expect("points are nonzero");
    Ok(l
        .points
        .keys()
        .filter(|p| *p != vertex)
        .map(|p| {
            let s = p.0[k];
            let proj: Vec<Elem> = p.0.iter().zip(&vertex.0).map(|(&x, &v)| t.sub(x, t.mul(s, v))).collect();
            Point::new(t, &proj).expect("P differs from the vertex")
        })
        .collect())
}

/// Whether L is the union of the lines joining the vertex to its base.
pub fn is_cone_r3(t: &FieldTower, l: &LinearSet, vertex: &Point) -> Result<bool> {
    let base = cone_base(t, l, vertex)?;
    // every point of L lies on some ⟨V, B⟩, so equality is a count
    Ok(l.len() as u128 == 1 + base.len() as u128 * t.order() as u128)
}

/// Set-level field of linearity: a verified lower bound, exact when every
/// larger divisor was ruled out.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SetLinearity {
    pub lower_bound: u32,
    pub exact: bool,
}

/// Fields with q^n up to this size get the exhaustive subspace search.
pub const SET_LINEARITY_SEARCH_LIMIT: u64 = 1 << 10;

enum SearchOutcome {
    Found,
    Impossible,
    Capped,
}

pub fn set_linearity(t: &FieldTower, u: &Subspace, node_cap: usize) -> Result<SetLinearity> {
    let n = t.n();
    let divisors: Vec<u32> = (1..=n).filter(|d| n.is_multiple_of(*d)).collect();
    let mut lower = 1;
    for &d in divisors.iter().rev() {
        if u.is_fqd_subspace(t, d)? {
            lower = d;
            break;
        }
    }
    if lower == n {
        return Ok(SetLinearity { lower_bound: n, exact: true });
    }
    if t.order() > SET_LINEARITY_SEARCH_LIMIT {
        return Ok(SetLinearity { lower_bound: lower, exact: false });
    }
    let target: BTreeSet<Point> = linear_set(t, u)?.points.into_keys().collect();
    let mut all_ruled_out = true;
    for &d in divisors.iter().rev().filter(|&&d| d > lower) {
        let mut nodes = 0usize;
        let empty = Subspace { r: u.r, basis: Vec::new() };
        match search_fqd(t, &target, d, &empty, &mut nodes, node_cap)? {
            SearchOutcome::Found => return Ok(SetLinearity { lower_bound: d, exact: all_ruled_out }),
            SearchOutcome::Impossible => {}
            SearchOutcome::Capped => all_ruled_out = false,
        }
    }
    Ok(SetLinearity { lower_bound: lower, exact: all_ruled_out })
}

/// Depth-first search for an F_{q^d}-subspace V ⊇ `current` with L_V = target.
fn search_fqd(
    t: &FieldTower,
    target: &BTreeSet<Point>,
    d: u32,
    current: &Subspace,
    nodes: &mut usize,
    cap: usize,
) -> Result<SearchOutcome> {
    *nodes += 1;
    if *nodes > cap {
        return Ok(SearchOutcome::Capped);
    }
    let covered: BTreeSet<Point> = if current.dim() == 0 {
        BTreeSet::new()
    } else {
        linear_set(t, current)?.points.into_keys().collect()
    };
    if !covered.is_subset(target) {
        return Ok(SearchOutcome::Impossible);
    }
    let Some(next) = target.iter().find(|p| !covered.contains(p)) else {
        return Ok(SearchOutcome::Found);
    };
    let sub = t.subfield_elements(d)?;
    let gens = t.subfield_basis(d)?;
    let mut capped = false;
    let mut seen: HashSet<Elem> = HashSet::new();
    for c in 1..t.order() {
        let mu = Elem::from_code(c);
        if seen.contains(&mu) {
            continue;
        }
        // μ·F_{q^d}^* gives the same F_{q^d}-span
        for &s in sub.iter().filter(|s| !s.is_zero()) {
            seen.insert(t.mul(mu, s));
        }
        let mut vs = current.basis.clone();
        for &g in &gens {
            vs.push(next.0.iter().map(|&x| t.mul(t.mul(mu, g), x)).collect());
        }
        let candidate = Subspace::span(t, current.r, &vs)?;
        match search_fqd(t, target, d, &candidate, nodes, cap)? {
            SearchOutcome::Found => return Ok(SearchOutcome::Found),
            SearchOutcome::Capped => capped = true,
            SearchOutcome::Impossible => {}
        }
        if *nodes > cap {
            return Ok(SearchOutcome::Capped);
        }
    }
    Ok(if capped { SearchOutcome::Capped } else { SearchOutcome::Impossible })
}
