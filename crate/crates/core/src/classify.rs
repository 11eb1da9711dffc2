//! Deciding how two graphs with the same linear set are related, and
//! exhaustive fingerprint-bucket searches over all linearized polynomials.

use std::collections::{BTreeMap, HashSet};
use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;
use serde::Serialize;

use crate::dickson::{diag_similar, DicksonMatrix, Fingerprint};
use crate::error::{Error, Result};
use crate::gf::linalg::{inverse, Matrix};
use crate::gf::{fp_poly::is_prime, gcd, Elem, FieldTower};
use crate::linpoly::LinPoly;
use crate::linset::{
    graph_subspace, linear_set, perp, sets_equal_by_enumeration, set_linearity, Generalized, Point, Subspace,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Case {
    Multiple,
    PerpMultiple,
    Pseudoregulus,
    GeneralizedPseudoregulus,
    GeneralizedPerp,
    Unknown,
}

impl Case {
    pub fn as_str(self) -> &'static str {
        match self {
            Case::Multiple => "multiple",
            Case::PerpMultiple => "perp_multiple",
            Case::Pseudoregulus => "pseudoregulus",
            Case::GeneralizedPseudoregulus => "generalized_pseudoregulus",
            Case::GeneralizedPerp => "generalized_perp",
            Case::Unknown => "unknown",
        }
    }

    pub fn is_generalized(self) -> bool {
        matches!(self, Case::GeneralizedPerp | Case::GeneralizedPseudoregulus)
    }
}

/// Evidence for a case. Element values are codes; inner data of the
/// generalized cases is given both as big-field codes and, in `inner`, as a
/// verdict over F_{q^d} built on its own canonical modulus.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// g = λ^{-1} f(λx), i.e. W = λ^{-1} U.
    Multiple { lambda: u64 },
    /// ĝ = λ^{-1} f(λx), i.e. W = λ U^⊥.
    PerpMultiple { lambda: u64 },
    /// In the basis `frame` = (v0, v1) of F_{q^n}^2, U and W are the graphs
    /// of a x^{q^i} and b x^{q^j} with N(a) = N(b).
    Pseudoregulus { frame: [[u64; 2]; 2], i: usize, j: usize, a: u64, b: u64 },
    /// f = f' + Σ b_i Tr(ax)^{q^i} and μ^{-1} g(μx) = f' + Σ c_i Tr(ax)^{q^i}.
    Generalized {
        d: u32,
        mu: u64,
        a: u64,
        f_prime: Vec<u64>,
        inner_f: Vec<u64>,
        inner_g: Vec<u64>,
        inner: Box<PairVerdict>,
    },
    None,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PairVerdict {
    pub case: Case,
    /// Every case whose test succeeded, in test order.
    pub matched: Vec<Case>,
    pub witness: Witness,
    /// The checks that [`replay`] performs for this witness.
    pub certificate: Vec<String>,
}

fn codes(v: &[Elem]) -> Vec<u64> {
    v.iter().map(|e| e.code()).collect()
}

fn elems(v: &[u64]) -> Vec<Elem> {
    v.iter().map(|&c| Elem::from_code(c)).collect()
}

fn certificate_for(w: &Witness) -> Vec<String> {
    match w {
        Witness::Multiple { .. } => vec!["graph(g) = lambda^-1 * graph(f) as subspaces".into()],
        Witness::PerpMultiple { .. } => vec!["graph(g) = lambda * perp(graph(f)) as subspaces".into()],
        Witness::Pseudoregulus { .. } => vec![
            "in the frame basis U and W are graphs of monomials with exponents coprime to n".into(),
            "N(a) = N(b)".into(),
            "L_U = L_W by point enumeration".into(),
        ],
        Witness::Generalized { .. } => vec![
            "f rebuilt from (f', b, a, d)".into(),
            "mu^-1 g(mu x) rebuilt from (f', c, a, d)".into(),
            "L_U = L_W by point enumeration".into(),
            "inner verdict replays over F_(q^d)".into(),
        ],
        Witness::None => Vec::new(),
    }
}

fn monomial_in_frame(t: &FieldTower, u: &Subspace, inv: &Matrix) -> Result<Option<(usize, Elem)>> {
    let n = t.n() as u64;
    Ok(u.transform(t, inv)?
        .as_graph(t)
        .and_then(|h| h.as_monomial())
        .filter(|&(i, a)| i > 0 && !a.is_zero() && gcd(i as u64, n) == 1))
}

fn frame_matrix(t: &FieldTower, frame: &[[u64; 2]; 2]) -> Result<Matrix> {
    let rows: Vec<Vec<Elem>> =
        frame.iter().map(|v| v.iter().map(|&c| t.from_code(c)).collect::<Result<Vec<_>>>()).collect::<Result<_>>()?;
    Ok(Matrix::from_rows(&rows))
}

/// Case (3). Monomial graphs are tested directly; otherwise, when L has the
/// size and weights of a pseudoregulus-type set, every pair of points off L
/// is tried as the pair of transversal points.
fn pseudoregulus_witness(t: &FieldTower, f: &LinPoly, g: &LinPoly) -> Result<Option<Witness>> {
    let (u, w) = (graph_subspace(t, f), graph_subspace(t, g));
    let identity = [[1, 0], [0, 1]];
    let inv = Matrix::identity(2);
    let try_frame = |frame: [[u64; 2]; 2], inv: &Matrix| -> Result<Option<Witness>> {
        let Some((i, a)) = monomial_in_frame(t, &u, inv)? else {
            return Ok(None);
        };
        let Some((j, b)) = monomial_in_frame(t, &w, inv)? else {
            return Ok(None);
        };
        if t.norm(a) != t.norm(b) {
            return Ok(None);
        }
        Ok(Some(Witness::Pseudoregulus { frame, i, j, a: a.code(), b: b.code() }))
    };
    if f.as_monomial().is_some() && g.as_monomial().is_some() {
        return try_frame(identity, &inv);
    }
    let l = linear_set(t, &u)?;
    if l.len() as u64 != (t.order() - 1) / (t.q() - 1) || l.points().values().any(|&wt| wt != 1) {
        return Ok(None);
    }
    let outside: Vec<Vec<Elem>> = std::iter::once(vec![Elem::ZERO, Elem::ONE])
        .chain((0..t.order()).map(|c| vec![Elem::ONE, Elem::from_code(c)]))
        .filter(|v| !l.contains(&Point::new(t, v).expect("nonzero")))
        .collect();
    t.check_budget((outside.len() as u128).pow(2) / 2)?;
    for (k, v0) in outside.iter().enumerate() {
        for v1 in &outside[k + 1..] {
            let m = Matrix::from_rows(&[v0.clone(), v1.clone()]);
            let inv = inverse(t, &m).expect("distinct points");
            let frame = [[v0[0].code(), v0[1].code()], [v1[0].code(), v1[1].code()]];
            if let Some(wit) = try_frame(frame, &inv)? {
                return Ok(Some(wit));
            }
        }
    }
    Ok(None)
}

/// f = f' + Σ_{i=1}^{d-1} b_i Tr_{q^n|q^d}(ax)^{q^i}, normalized so that the
/// first nonzero b_i is 1. `None` when f has no such shape.
fn split_generalized(t: &FieldTower, f: &LinPoly, d: u32) -> Option<(LinPoly, Elem, Vec<Elem>)> {
    let n = t.n() as usize;
    let d = d as usize;
    let i0 = (1..d).find(|&i| (0..n / d).any(|k| !f.coeff(d * k + i).is_zero()))?;
    let v0 = f.coeff(i0);
    if v0.is_zero() {
        return None;
    }
    let a = t.frob(v0, -(i0 as i64));
    let mut b = vec![Elem::ZERO; d];
    for (i, bi) in b.iter_mut().enumerate().skip(1) {
        *bi = t.div(f.coeff(i), t.frob(a, i as i64)).ok()?;
        if !t.in_subfield(*bi, d as u32).ok()? {
            return None;
        }
        for k in 0..n / d {
            let idx = d * k + i;
            if f.coeff(idx) != t.mul(*bi, t.frob(a, idx as i64)) {
                return None;
            }
        }
    }
    let f_prime = LinPoly::new((0..n).map(|k| if k % d == 0 { f.coeff(k) } else { Elem::ZERO }).collect());
    Some((f_prime, a, b))
}

/// Cases (4) and (5) for one divisor d.
fn generalized_witness(t: &FieldTower, f: &LinPoly, g: &LinPoly, d: u32) -> Result<Option<(Case, Witness)>> {
    let Some((f_prime, a, b)) = split_generalized(t, f, d) else {
        return Ok(None);
    };
    let sub = t.subtower(d)?;
    let small = sub.field();
    let sub_units: Vec<Elem> = t.subfield_elements(d)?.into_iter().filter(|x| !x.is_zero()).collect();
    let mut seen: HashSet<Elem> = HashSet::new();
    for c in 1..t.order() {
        let mu = Elem::from_code(c);
        if seen.contains(&mu) {
            continue;
        }
        for &s in &sub_units {
            seen.insert(t.mul(mu, s));
        }
        let gt = g.twist(t, mu)?;
        let Some((g_prime, a_g, c_g)) = split_generalized(t, &gt, d) else {
            continue;
        };
        if g_prime != f_prime {
            continue;
        }
        let kappa = t.div(a_g, a)?;
        if !t.in_subfield(kappa, d)? {
            continue;
        }
        let c_rel: Vec<Elem> =
            c_g.iter().enumerate().map(|(i, &ci)| t.mul(ci, t.frob(kappa, i as i64))).collect();
        let h_f = LinPoly::new(b.iter().map(|&x| sub.restrict(x)).collect::<Result<Vec<_>>>()?);
        let h_g = LinPoly::new(c_rel.iter().map(|&x| sub.restrict(x)).collect::<Result<Vec<_>>>()?);
        let inner = match classify_pair(small, &h_f, &h_g) {
            Ok(v) => v,
            Err(Error::NotEqualSets) => continue,
            Err(e) => return Err(e),
        };
        let case = match inner.case {
            Case::PerpMultiple | Case::GeneralizedPerp => Case::GeneralizedPerp,
            Case::Pseudoregulus | Case::GeneralizedPseudoregulus => Case::GeneralizedPseudoregulus,
            Case::Multiple | Case::Unknown => continue,
        };
        let witness = Witness::Generalized {
            d,
            mu: mu.code(),
            a: a.code(),
            f_prime: codes(f_prime.coeffs()),
            inner_f: codes(&b),
            inner_g: codes(&c_rel),
            inner: Box::new(inner),
        };
        return Ok(Some((case, witness)));
    }
    Ok(None)
}

/// Classifies a pair of graphs with equal linear sets, testing the cases in
/// the order multiple, perp multiple, pseudoregulus, generalized.
pub fn classify_pair(t: &FieldTower, f: &LinPoly, g: &LinPoly) -> Result<PairVerdict> {
    let a = DicksonMatrix::from_poly(t, f);
    let b = DicksonMatrix::from_poly(t, g);
    if a.fingerprint(t)? != b.fingerprint(t)? {
        return Err(Error::NotEqualSets);
    }
    let mut found: Vec<(Case, Witness)> = Vec::new();
    if let Some(l) = diag_similar(t, &a, &b) {
        found.push((Case::Multiple, Witness::Multiple { lambda: l.code() }));
    }
    if let Some(l) = diag_similar(t, &a, &b.transpose(t)) {
        found.push((Case::PerpMultiple, Witness::PerpMultiple { lambda: l.code() }));
    }
    if let Some(w) = pseudoregulus_witness(t, f, g)? {
        found.push((Case::Pseudoregulus, w));
    }
    let n = t.n();
    let mut generalized: Vec<(Case, Witness)> = Vec::new();
    for d in (2..n).filter(|d| n.is_multiple_of(*d)) {
        if let Some(hit) = generalized_witness(t, f, g, d)? {
            generalized.push(hit);
        }
    }
    // the case list puts the inner-pseudoregulus case before the inner-perp one
    generalized.sort_by_key(|(c, _)| *c);
    found.extend(generalized);
    let mut matched: Vec<Case> = found.iter().map(|(c, _)| *c).collect();
    matched.dedup();
    let (case, witness) = found.into_iter().next().unwrap_or((Case::Unknown, Witness::None));
    let certificate = certificate_for(&witness);
    Ok(PairVerdict { case, matched, witness, certificate })
}

/// Re-checks a verdict's witness by independent computations.
pub fn replay(t: &FieldTower, f: &LinPoly, g: &LinPoly, v: &PairVerdict) -> Result<bool> {
    let u = graph_subspace(t, f);
    let w = graph_subspace(t, g);
    Ok(match &v.witness {
        Witness::Multiple { lambda } => {
            let l = t.from_code(*lambda)?;
            v.case == Case::Multiple && w == u.scale(t, t.inv(l)?)
        }
        Witness::PerpMultiple { lambda } => {
            let l = t.from_code(*lambda)?;
            v.case == Case::PerpMultiple && w == perp(t, &u)?.scale(t, l)
        }
        Witness::Pseudoregulus { frame, i, j, a, b } => {
            let n = t.n();
            let m = frame_matrix(t, frame)?;
            let Some(inv) = inverse(t, &m) else {
                return Ok(false);
            };
            let (a, b) = (t.from_code(*a)?, t.from_code(*b)?);
            let (i, j) = (*i as u32, *j as u32);
            v.case == Case::Pseudoregulus
                && gcd(i as u64, n as u64) == 1
                && gcd(j as u64, n as u64) == 1
                && t.norm(a) == t.norm(b)
                && u.transform(t, &inv)? == graph_subspace(t, &LinPoly::monomial(n, a, i % n))
                && w.transform(t, &inv)? == graph_subspace(t, &LinPoly::monomial(n, b, j % n))
                && linear_set(t, &u)?.same_points(&linear_set(t, &w)?)
        }
        Witness::Generalized { d, mu, a, f_prime, inner_f, inner_g, inner } => {
            let fp = LinPoly::new(elems(f_prime));
            let a = Elem::from_code(*a);
            let gen_f = Generalized::new(t, fp.clone(), elems(inner_f), a, *d)?;
            let gen_g = Generalized::new(t, fp, elems(inner_g), a, *d)?;
            let sub = t.subtower(*d)?;
            let h_f = LinPoly::new(elems(inner_f).iter().map(|&x| sub.restrict(x)).collect::<Result<Vec<_>>>()?);
            let h_g = LinPoly::new(elems(inner_g).iter().map(|&x| sub.restrict(x)).collect::<Result<Vec<_>>>()?);
            v.case.is_generalized()
                && gen_f.poly(t) == *f
                && gen_g.poly(t) == g.twist(t, Elem::from_code(*mu))?
                && linear_set(t, &u)?.same_points(&linear_set(t, &w)?)
                && replay(sub.field(), &h_f, &h_g, inner)?
        }
        Witness::None => false,
    })
}

/// Settings for [`bucket_search`] and [`verify_club_uniqueness`].
#[derive(Clone, Debug)]
pub struct SearchOptions {
    pub workers: usize,
    /// Upper bound on the number of polynomials scanned.
    pub budget: u64,
    /// Print a line to stderr every 2^20 scanned polynomials.
    pub progress: bool,
    /// Node cap of the set-level linearity search run on unknown pairs.
    pub linearity_cap: usize,
    /// Also compare the point sets of every bucketed pair by enumeration.
    pub paranoid: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { workers: 1, budget: crate::gf::DEFAULT_BUDGET, progress: false, linearity_cap: 20_000, paranoid: false }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SearchParams {
    pub p: u64,
    pub e: u32,
    pub n: u32,
    pub q: u64,
    pub modulus: Vec<u64>,
    pub budget: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PairRecord {
    pub f: String,
    pub g: String,
    pub verdict: Case,
    pub reason: String,
}

/// Outcome of a bucket search.
///
/// Every scanned polynomial is either zero, has linearity gcd above 1, is a
/// twist of a smaller one (x ↦ λ^{-1} f(λx)), or is an orbit representative;
/// buckets partition the representatives.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BucketReport {
    pub params: SearchParams,
    pub scanned: u64,
    pub skipped_zero: u64,
    pub skipped_linearity: u64,
    pub skipped_twist: u64,
    pub orbit_reps: u64,
    pub bucket_count: u64,
    pub multi_member_buckets: u64,
    pub largest_bucket: u64,
    pub pairs_classified: u64,
    pub verdict_histogram: BTreeMap<String, u64>,
    pub flagged: Vec<PairRecord>,
    pub anomalies: Vec<PairRecord>,
}

impl BucketReport {
    pub fn confirmed(&self) -> bool {
        self.anomalies.is_empty()
    }

    pub fn exit_code(&self) -> i32 {
        if self.confirmed() {
            0
        } else {
            2
        }
    }

    pub fn csv(&self) -> String {
        let mut out = String::from("key,value\n");
        out.push_str(&format!("scanned,{}\n", self.scanned));
        out.push_str(&format!("orbit_reps,{}\n", self.orbit_reps));
        out.push_str(&format!("bucket_count,{}\n", self.bucket_count));
        out.push_str(&format!("multi_member_buckets,{}\n", self.multi_member_buckets));
        out.push_str(&format!("pairs_classified,{}\n", self.pairs_classified));
        for (k, v) in &self.verdict_histogram {
            out.push_str(&format!("verdict:{k},{v}\n"));
        }
        out.push_str(&format!("flagged,{}\n", self.flagged.len()));
        out.push_str(&format!("anomalies,{}\n", self.anomalies.len()));
        out
    }
}

struct Buckets {
    scanned: u64,
    skipped_zero: u64,
    skipped_linearity: u64,
    skipped_twist: u64,
    buckets: Vec<Vec<u64>>,
}

fn decode(t: &FieldTower, id: u64) -> LinPoly {
    let mut c = id;
    LinPoly::new(
        (0..t.n())
            .map(|_| {
                let e = Elem::from_code(c % t.order());
                c /= t.order();
                e
            })
            .collect(),
    )
}

/// λ^{q^i - 1} for one λ per nontrivial class of F_{q^n}^* / F_q^*.
fn twist_multipliers(t: &FieldTower) -> Vec<Vec<Elem>> {
    let mut seen: HashSet<Elem> = t.fq_elements().iter().copied().collect();
    let mut out = Vec::new();
    for c in 2..t.order() {
        let l = Elem::from_code(c);
        if seen.contains(&l) {
            continue;
        }
        for &s in t.fq_elements().iter().filter(|s| !s.is_zero()) {
            seen.insert(t.mul(l, s));
        }
        let inv = t.inv(l).expect("nonzero");
        out.push((0..t.n()).map(|i| t.mul(t.frob(l, i as i64), inv)).collect());
    }
    out
}

/// Whether the id of f is minimal among the ids of its twists; ids compare
/// from the top coefficient down.
fn is_twist_minimal(t: &FieldTower, coeffs: &[Elem], mults: &[Vec<Elem>]) -> bool {
    let n = coeffs.len();
    'outer: for m in mults {
        for i in (0..n).rev() {
            let tw = t.mul(coeffs[i], m[i]);
            match tw.cmp(&coeffs[i]) {
                std::cmp::Ordering::Less => return false,
                std::cmp::Ordering::Greater => continue 'outer,
                std::cmp::Ordering::Equal => {}
            }
        }
    }
    true
}

struct ChunkOut {
    zero: u64,
    linearity: u64,
    twist: u64,
    reps: Vec<(u64, u64)>,
}

const CHUNK: u64 = 1 << 14;
const PROGRESS_EVERY: u64 = 1 << 20;

fn build_buckets(t: &FieldTower, opts: &SearchOptions) -> Result<Buckets> {
    let total = (t.order() as u128).checked_pow(t.n()).unwrap_or(u128::MAX);
    if total > opts.budget as u128 {
        return Err(Error::BudgetExceeded { size: total, budget: opts.budget as u128 });
    }
    let total = total as u64;
    let mults = twist_multipliers(t);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers.max(1))
        .build()
        .map_err(|e| Error::Io(e.to_string()))?;
    let done = AtomicU64::new(0);
    let chunks = total.div_ceil(CHUNK);
    let outs: Vec<Result<ChunkOut>> = pool.install(|| {
        (0..chunks)
            .into_par_iter()
            .map(|ci| {
                let mut out = ChunkOut { zero: 0, linearity: 0, twist: 0, reps: Vec::new() };
                let end = ((ci + 1) * CHUNK).min(total);
                for id in ci * CHUNK..end {
                    let f = decode(t, id);
                    match f.linearity_gcd() {
                        Err(_) => {
                            out.zero += 1;
                            continue;
                        }
                        Ok(d) if d != 1 => {
                            out.linearity += 1;
                            continue;
                        }
                        Ok(_) => {}
                    }
                    if !is_twist_minimal(t, f.coeffs(), &mults) {
                        out.twist += 1;
                        continue;
                    }
                    let fp = DicksonMatrix::from_poly(t, &f).fingerprint(t)?;
                    out.reps.push((fp.digest(), id));
                }
                let before = done.fetch_add(end - ci * CHUNK, Ordering::Relaxed);
                if opts.progress && (before + end - ci * CHUNK) / PROGRESS_EVERY > before / PROGRESS_EVERY {
                    eprintln!("scanned {} / {}", before + end - ci * CHUNK, total);
                }
                Ok(out)
            })
            .collect()
    });
    let (mut zero, mut linearity, mut twist) = (0, 0, 0);
    let mut reps: Vec<(u64, u64)> = Vec::new();
    for o in outs {
        let o = o?;
        zero += o.zero;
        linearity += o.linearity;
        twist += o.twist;
        reps.extend(o.reps);
    }
    reps.sort_unstable();
    let mut buckets: Vec<Vec<u64>> = Vec::new();
    let mut start = 0;
    while start < reps.len() {
        let digest = reps[start].0;
        let mut end = start;
        while end < reps.len() && reps[end].0 == digest {
            end += 1;
        }
        if end - start == 1 {
            buckets.push(vec![reps[start].1]);
        } else {
            // a shared digest is only a hint; split by the full fingerprint
            let mut split: BTreeMap<Fingerprint, Vec<u64>> = BTreeMap::new();
            for &(_, id) in &reps[start..end] {
                let fp = DicksonMatrix::from_poly(t, &decode(t, id)).fingerprint(t)?;
                split.entry(fp).or_default().push(id);
            }
            buckets.extend(split.into_values());
        }
        start = end;
    }
    Ok(Buckets { scanned: total, skipped_zero: zero, skipped_linearity: linearity, skipped_twist: twist, buckets })
}

fn params(t: &FieldTower, opts: &SearchOptions) -> SearchParams {
    SearchParams { p: t.p(), e: t.e(), n: t.n(), q: t.q(), modulus: t.modulus().to_vec(), budget: opts.budget }
}

enum PairOutcome {
    Fine(Case),
    Flagged(PairRecord),
    Anomaly(PairRecord),
}

fn examine_pair(t: &FieldTower, f: &LinPoly, g: &LinPoly, opts: &SearchOptions) -> Result<PairOutcome> {
    let v = classify_pair(t, f, g)?;
    let record = |reason: String| PairRecord { f: f.display(), g: g.display(), verdict: v.case, reason };
    if opts.paranoid && !sets_equal_by_enumeration(t, &graph_subspace(t, f), &graph_subspace(t, g))? {
        return Ok(PairOutcome::Anomaly(record("equal fingerprints but different point sets".into())));
    }
    if v.case.is_generalized() && is_prime(t.n() as u64) {
        return Ok(PairOutcome::Anomaly(record("generalized verdict at prime n".into())));
    }
    if v.case != Case::Unknown {
        if !replay(t, f, g, &v)? {
            return Ok(PairOutcome::Anomaly(record("witness failed to replay".into())));
        }
        return Ok(PairOutcome::Fine(v.case));
    }
    let sf = set_linearity(t, &graph_subspace(t, f), opts.linearity_cap)?;
    let sg = set_linearity(t, &graph_subspace(t, g), opts.linearity_cap)?;
    if sf.lower_bound > 1 || sg.lower_bound > 1 || !sf.exact || !sg.exact {
        Ok(PairOutcome::Flagged(record(format!(
            "set-level linearity may exceed F_q (bounds {}{}, {}{})",
            sf.lower_bound,
            if sf.exact { "" } else { "+" },
            sg.lower_bound,
            if sg.exact { "" } else { "+" }
        ))))
    } else {
        Ok(PairOutcome::Anomaly(record("no case of the classification applies".into())))
    }
}

/// Scans every linearized polynomial over F_{q^n}, keeps those with
/// linearity gcd 1 that are twist-orbit minimal, buckets them by principal
/// minors and classifies every pair inside each bucket.
pub fn bucket_search(t: &FieldTower, opts: &SearchOptions) -> Result<BucketReport> {
    let b = build_buckets(t, opts)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers.max(1))
        .build()
        .map_err(|e| Error::Io(e.to_string()))?;
    let multi: Vec<&Vec<u64>> = b.buckets.iter().filter(|m| m.len() > 1).collect();
    let results: Vec<Result<Vec<PairOutcome>>> = pool.install(|| {
        multi
            .par_iter()
            .map(|members| {
                let polys: Vec<LinPoly> = members.iter().map(|&id| decode(t, id)).collect();
                let mut out = Vec::new();
                for i in 0..polys.len() {
                    for j in i + 1..polys.len() {
                        out.push(examine_pair(t, &polys[i], &polys[j], opts)?);
                    }
                }
                Ok(out)
            })
            .collect()
    });
    let mut histogram: BTreeMap<String, u64> = BTreeMap::new();
    let mut flagged = Vec::new();
    let mut anomalies = Vec::new();
    let mut pairs = 0u64;
    for r in results {
        for o in r? {
            pairs += 1;
            match o {
                PairOutcome::Fine(c) => *histogram.entry(c.as_str().to_string()).or_default() += 1,
                PairOutcome::Flagged(rec) => {
                    *histogram.entry(rec.verdict.as_str().to_string()).or_default() += 1;
                    flagged.push(rec);
                }
                PairOutcome::Anomaly(rec) => {
                    *histogram.entry(rec.verdict.as_str().to_string()).or_default() += 1;
                    anomalies.push(rec);
                }
            }
        }
    }
    Ok(BucketReport {
        params: params(t, opts),
        scanned: b.scanned,
        skipped_zero: b.skipped_zero,
        skipped_linearity: b.skipped_linearity,
        skipped_twist: b.skipped_twist,
        orbit_reps: b.buckets.iter().map(|m| m.len() as u64).sum(),
        bucket_count: b.buckets.len() as u64,
        multi_member_buckets: multi.len() as u64,
        largest_bucket: b.buckets.iter().map(|m| m.len() as u64).max().unwrap_or(0),
        pairs_classified: pairs,
        verdict_histogram: histogram,
        flagged,
        anomalies,
    })
}

/// Whether f - a·x has rank 1 for some a, i.e. L_f has a point of weight n-1.
pub fn is_club(t: &FieldTower, f: &LinPoly) -> bool {
    let n = t.n();
    n >= 3
        && (0..t.order()).any(|c| f.sub(t, &LinPoly::scalar(n, Elem::from_code(c))).map_rank(t) == 1)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClubReport {
    pub params: SearchParams,
    pub scanned: u64,
    pub orbit_reps: u64,
    pub club_reps: u64,
    pub club_buckets: u64,
    /// Buckets holding a club together with another orbit.
    pub violations: Vec<Vec<String>>,
    pub unique: bool,
}

/// Every fingerprint bucket that contains a club contains a single twist orbit.
pub fn verify_club_uniqueness(t: &FieldTower, opts: &SearchOptions) -> Result<ClubReport> {
    let b = build_buckets(t, opts)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers.max(1))
        .build()
        .map_err(|e| Error::Io(e.to_string()))?;
    let flags: Vec<Vec<bool>> = pool.install(|| {
        b.buckets
            .par_iter()
            .map(|members| members.iter().map(|&id| is_club(t, &decode(t, id))).collect())
            .collect()
    });
    let mut club_reps = 0;
    let mut club_buckets = 0;
    let mut violations = Vec::new();
    for (members, fl) in b.buckets.iter().zip(&flags) {
        let clubs = fl.iter().filter(|&&x| x).count() as u64;
        if clubs == 0 {
            continue;
        }
        club_reps += clubs;
        club_buckets += 1;
        if members.len() > 1 {
            violations.push(members.iter().map(|&id| decode(t, id).display()).collect());
        }
    }
    Ok(ClubReport {
        params: params(t, opts),
        scanned: b.scanned,
        orbit_reps: b.buckets.iter().map(|m| m.len() as u64).sum(),
        club_reps,
        club_buckets,
        unique: violations.is_empty(),
        violations,
    })
}
