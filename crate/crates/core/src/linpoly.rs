//! Linearized polynomials f(x) = Σ a_i x^{q^i} viewed as F_q-linear maps of
//! F_{q^n}.
//!
//! A [`LinPoly`] is just its coefficient vector `(a_0, …, a_{n-1})`; every
//! operation takes the tower explicitly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf::linalg::{self, Matrix};
use crate::gf::{gcd, Elem, ElemJson, FieldTower};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinPoly {
    coeffs: Vec<Elem>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinPolyJson {
    pub coeffs: Vec<ElemJson>,
}

impl LinPoly {
    pub fn new(coeffs: Vec<Elem>) -> Self {
        LinPoly { coeffs }
    }

    /// Checks the length and that every coefficient is an element of `t`.
    pub fn checked(t: &FieldTower, coeffs: Vec<Elem>) -> Result<Self> {
        if coeffs.len() != t.n() as usize {
            return Err(Error::BadParameters(format!(
                "expected {} coefficients, got {}",
                t.n(),
                coeffs.len()
            )));
        }
        for &c in &coeffs {
            t.from_code(c.code())?;
        }
        Ok(LinPoly { coeffs })
    }

    pub fn zero(n: u32) -> Self {
        LinPoly { coeffs: vec![Elem::ZERO; n as usize] }
    }

    pub fn scalar(n: u32, a: Elem) -> Self {
        Self::monomial(n, a, 0)
    }

    pub fn identity(n: u32) -> Self {
        Self::monomial(n, Elem::ONE, 0)
    }

    /// a·x^{q^i}
    pub fn monomial(n: u32, a: Elem, i: u32) -> Self {
        let mut p = Self::zero(n);
        p.coeffs[(i % n) as usize] = a;
        p
    }

    /// Tr_{q^n|q}(x)
    pub fn trace(n: u32) -> Self {
        LinPoly { coeffs: vec![Elem::ONE; n as usize] }
    }

    pub fn coeffs(&self) -> &[Elem] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Elem {
        self.coeffs[i]
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Indices of the nonzero coefficients.
    pub fn support(&self) -> Vec<usize> {
        (0..self.coeffs.len()).filter(|&i| !self.coeffs[i].is_zero()).collect()
    }

    /// `Some((i, a))` when f = a·x^{q^i} with a ≠ 0.
    pub fn as_monomial(&self) -> Option<(usize, Elem)> {
        match self.support().as_slice() {
            [i] => Some((*i, self.coeffs[*i])),
            _ => None,
        }
    }

    pub fn evaluate(&self, t: &FieldTower, x: Elem) -> Elem {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .fold(Elem::ZERO, |acc, (i, &c)| t.add(acc, t.mul(c, t.frob(x, i as i64))))
    }

    pub fn add(&self, t: &FieldTower, other: &LinPoly) -> LinPoly {
        LinPoly {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| t.add(a, b)).collect(),
        }
    }

    pub fn sub(&self, t: &FieldTower, other: &LinPoly) -> LinPoly {
        LinPoly {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| t.sub(a, b)).collect(),
        }
    }

    /// c·f(x)
    pub fn scale(&self, t: &FieldTower, c: Elem) -> LinPoly {
        LinPoly { coeffs: self.coeffs.iter().map(|&a| t.mul(c, a)).collect() }
    }

    /// Matrix of f over F_q: row k holds the F_q-coordinates of f(β_k).
    pub fn map_matrix(&self, t: &FieldTower) -> Matrix {
        let rows: Vec<Vec<Elem>> =
            t.fq_basis().iter().map(|&b| t.coords(self.evaluate(t, b))).collect();
        Matrix::from_rows(&rows)
    }

    /// Rank of f as an F_q-linear map.
    pub fn map_rank(&self, t: &FieldTower) -> usize {
        linalg::rank(t, &self.map_matrix(t))
    }

    /// An F_q-basis of ker f.
    pub fn kernel(&self, t: &FieldTower) -> Vec<Elem> {
        linalg::nullspace(t, &self.map_matrix(t).transpose())
            .into_iter()
            .map(|c| t.from_coords(&c))
            .collect()
    }

    /// The adjoint f̂ with respect to (x, y) ↦ Tr(xy): f̂_k = a_{k'-k}^{q^k},
    /// indices mod k' = len.
    ///
    /// For a coefficient vector of length d | n with entries in F_{q^d} this is
    /// the adjoint of the map on F_{q^d} for the trace form of F_{q^d}.
    pub fn adjoint(&self, t: &FieldTower) -> LinPoly {
        let k = self.coeffs.len();
        LinPoly {
            coeffs: (0..k).map(|j| t.frob(self.coeffs[(k - j) % k], j as i64)).collect(),
        }
    }

    /// f ∘ g reduced modulo x^{q^n} - x.
    pub fn compose(&self, t: &FieldTower, g: &LinPoly) -> LinPoly {
        let k = self.coeffs.len();
        let mut out = vec![Elem::ZERO; k];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, &b) in g.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let idx = (i + j) % k;
                out[idx] = t.add(out[idx], t.mul(a, t.frob(b, i as i64)));
            }
        }
        LinPoly { coeffs: out }
    }

    /// λ^{-1}·f(λx), coefficientwise g_i = a_i·λ^{q^i - 1}.
    pub fn twist(&self, t: &FieldTower, lambda: Elem) -> Result<LinPoly> {
        if lambda.is_zero() {
            return Err(Error::ZeroScalar);
        }
        let inv = t.inv(lambda)?;
        Ok(LinPoly {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(i, &a)| {
                    if a.is_zero() {
                        a
                    } else {
                        t.mul(a, t.mul(t.frob(lambda, i as i64), inv))
                    }
                })
                .collect(),
        })
    }

    /// The unique f with f(x_k) = y_k, given an F_q-basis x_0..x_{n-1}.
    pub fn interpolate(t: &FieldTower, xs: &[Elem], ys: &[Elem]) -> Result<LinPoly> {
        let n = t.n() as usize;
        if xs.len() != n || ys.len() != n {
            return Err(Error::BadParameters("interpolation needs n points".into()));
        }
        let moore = Matrix::from_fn(n, n, |k, i| t.frob(xs[k], i as i64));
        let inv = linalg::inverse(t, &moore)
            .ok_or_else(|| Error::BadParameters("interpolation points are F_q-dependent".into()))?;
        Ok(LinPoly {
            coeffs: (0..n)
                .map(|i| (0..n).fold(Elem::ZERO, |acc, k| t.add(acc, t.mul(inv.get(i, k), ys[k]))))
                .collect(),
        })
    }

    /// The largest d | n such that f is F_{q^d}-linear.
    pub fn linearity_gcd(&self) -> Result<u32> {
        if self.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        let n = self.coeffs.len() as u64;
        Ok(self.support().into_iter().fold(n, |g, i| gcd(g, i as u64)) as u32)
    }

    pub fn to_json(&self, t: &FieldTower) -> LinPolyJson {
        LinPolyJson { coeffs: self.coeffs.iter().map(|&c| t.to_json(c)).collect() }
    }

    pub fn from_json(t: &FieldTower, j: &LinPolyJson) -> Result<Self> {
        let coeffs = j.coeffs.iter().map(|c| t.from_json(c)).collect::<Result<Vec<_>>>()?;
        Self::checked(t, coeffs)
    }

    /// Parses a sum of terms `c*x^q^i`.
    ///
    /// A term is `x`, `x^q` or `x^q^i`, optionally preceded by `c*`, where `c`
    /// is either a bracketed base-p digit list such as `[1,0,1]` (constant
    /// term first) or a decimal element code. Repeated exponents add up and
    /// `i` is read mod n. The literal `0` is the zero polynomial.
    pub fn parse(t: &FieldTower, s: &str) -> Result<Self> {
        let src: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let mut out = Self::zero(t.n());
        if src == "0" {
            return Ok(out);
        }
        if src.is_empty() {
            return Err(Error::Parse("empty polynomial".into()));
        }
        for term in split_terms(&src)? {
            let (c, i) = parse_term(t, term)?;
            let idx = (i % t.n() as u64) as usize;
            out.coeffs[idx] = t.add(out.coeffs[idx], c);
        }
        Ok(out)
    }

    /// Inverse of [`Self::parse`], printing coefficients as element codes.
    pub fn display(&self) -> String {
        let terms: Vec<String> = self
            .support()
            .into_iter()
            .map(|i| {
                let c = self.coeffs[i].code();
                let mono = match i {
                    0 => "x".to_string(),
                    1 => "x^q".to_string(),
                    _ => format!("x^q^{i}"),
                };
                if c == 1 {
                    mono
                } else {
                    format!("{c}*{mono}")
                }
            })
            .collect();
        if terms.is_empty() {
            "0".into()
        } else {
            terms.join(" + ")
        }
    }
}

fn split_terms(src: &str) -> Result<Vec<&str>> {
    let mut terms = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (pos, ch) in src.char_indices() {
        match ch {
            '[' => depth += 1,
            ']' => depth -= 1,
            '+' if depth == 0 => {
                terms.push(&src[start..pos]);
                start = pos + 1;
            }
            _ => {}
        }
        if depth < 0 {
            return Err(Error::Parse("unbalanced ']'".into()));
        }
    }
    if depth != 0 {
        return Err(Error::Parse("unbalanced '['".into()));
    }
    terms.push(&src[start..]);
    if terms.iter().any(|t| t.is_empty()) {
        return Err(Error::Parse("empty term".into()));
    }
    Ok(terms)
}

fn parse_term(t: &FieldTower, term: &str) -> Result<(Elem, u64)> {
    let (coef, mono) = match term.rfind('*') {
        Some(pos) => (Some(&term[..pos]), &term[pos + 1..]),
        None => (None, term),
    };
    let c = match coef {
        Some(c) => parse_element(t, c)?,
        None => Elem::ONE,
    };
    let i = match mono {
        "x" => 0,
        "x^q" => 1,
        _ => mono
            .strip_prefix("x^q^")
            .and_then(|e| e.parse::<u64>().ok())
            .ok_or_else(|| Error::Parse(format!("bad monomial '{mono}'")))?,
    };
    Ok((c, i))
}

/// An element written as `[d_0,d_1,…]` (base-p digits) or as a decimal code.
pub fn parse_element(t: &FieldTower, s: &str) -> Result<Elem> {
    let s = s.trim();
    if let Some(inner) = s.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
        let digits = inner
            .split(',')
            .map(|d| d.trim().parse::<u64>().map_err(|e| Error::Parse(format!("digit '{d}': {e}"))))
            .collect::<Result<Vec<_>>>()?;
        t.from_digits(&digits)
    } else {
        let code = s.parse::<u64>().map_err(|e| Error::Parse(format!("element '{s}': {e}")))?;
        t.from_code(code)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_poly(t: &FieldTower, rng: &mut ChaCha8Rng) -> LinPoly {
        LinPoly::new((0..t.n()).map(|_| Elem::from_code(rng.gen_range(0..t.order()))).collect())
    }

    #[test]
    fn evaluate_monomial_and_zero() {
        let t = FieldTower::new(2, 1, 4).unwrap();
        let f = LinPoly::monomial(4, Elem::ONE, 1);
        for x in t.elements().unwrap() {
            assert_eq!(f.evaluate(&t, x), t.frob(x, 1));
        }
        assert_eq!(f.evaluate(&t, Elem::ZERO), Elem::ZERO);
    }

    #[test]
    fn trace_map_has_rank_one() {
        let t = FieldTower::new(2, 1, 3).unwrap();
        let tr = LinPoly::trace(3);
        assert_eq!(tr.map_rank(&t), 1);
        let kernel = t.elements().unwrap().filter(|&x| tr.evaluate(&t, x).is_zero()).count();
        assert_eq!(kernel, 4);
        assert_eq!(tr.kernel(&t).len(), 2);
        assert_eq!(LinPoly::zero(3).map_rank(&t), 0);
        assert_eq!(LinPoly::monomial(3, Elem::ONE, 2).map_rank(&t), 3);
    }

    #[test]
    fn adjoint_of_frobenius_power() {
        let t = FieldTower::new(2, 1, 5).unwrap();
        for i in 0..5 {
            let f = LinPoly::monomial(5, Elem::ONE, i);
            let fh = f.adjoint(&t);
            assert_eq!(fh, LinPoly::monomial(5, Elem::ONE, (5 - i) % 5));
            for x in t.elements().unwrap().step_by(3) {
                for y in t.elements().unwrap().step_by(5) {
                    assert_eq!(
                        t.trace(t.mul(y, f.evaluate(&t, x))),
                        t.trace(t.mul(fh.evaluate(&t, y), x))
                    );
                }
            }
        }
    }

    #[test]
    fn compose_pointwise_over_f16() {
        let t = FieldTower::new(2, 1, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let f = random_poly(&t, &mut rng);
            let g = random_poly(&t, &mut rng);
            let fg = f.compose(&t, &g);
            for x in t.elements().unwrap() {
                assert_eq!(fg.evaluate(&t, x), f.evaluate(&t, g.evaluate(&t, x)));
            }
            assert_eq!(f.compose(&t, &LinPoly::identity(4)), f);
        }
        let fq = LinPoly::monomial(4, Elem::ONE, 1);
        assert_eq!(fq.compose(&t, &fq), LinPoly::monomial(4, Elem::ONE, 2));
    }

    #[test]
    fn twist_scales_the_graph() {
        // g(x) = λ^{-1} f(λx) on every point, and the coefficient formula
        let t = FieldTower::new(2, 1, 3).unwrap();
        let w = Elem::from_code(2);
        let f = LinPoly::monomial(3, Elem::ONE, 1);
        let g = f.twist(&t, w).unwrap();
        assert_eq!(g.coeff(1), t.pow(w, 1));
        for x in t.elements().unwrap() {
            let expect = t.div(f.evaluate(&t, t.mul(w, x)), w).unwrap();
            assert_eq!(g.evaluate(&t, x), expect);
        }
        assert_eq!(g.twist(&t, t.inv(w).unwrap()).unwrap(), f);
        assert_eq!(f.twist(&t, Elem::ZERO), Err(Error::ZeroScalar));
    }

    #[test]
    fn linearity_gcd_examples() {
        let t = FieldTower::new(2, 1, 6).unwrap();
        let f = LinPoly::monomial(6, Elem::ONE, 2).add(&t, &LinPoly::monomial(6, Elem::ONE, 4));
        assert_eq!(f.linearity_gcd().unwrap(), 2);
        let f4 = t.subfield_elements(2).unwrap();
        let f8 = t.subfield_elements(3).unwrap();
        let linear_over = |lams: &[Elem]| {
            lams.iter().all(|&l| {
                t.elements().unwrap().all(|x| f.evaluate(&t, t.mul(l, x)) == t.mul(l, f.evaluate(&t, x)))
            })
        };
        assert!(linear_over(&f4));
        assert!(!linear_over(&f8));
        assert_eq!(LinPoly::scalar(6, Elem::from_code(9)).linearity_gcd().unwrap(), 6);
        assert_eq!(LinPoly::monomial(5, Elem::ONE, 1).linearity_gcd().unwrap(), 1);
        assert_eq!(LinPoly::zero(5).linearity_gcd(), Err(Error::ZeroPolynomial));
    }

    #[test]
    fn interpolation_recovers_the_polynomial() {
        let t = FieldTower::new(3, 1, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..10 {
            let f = random_poly(&t, &mut rng);
            let xs = t.fq_basis().to_vec();
            let ys: Vec<Elem> = xs.iter().map(|&x| f.evaluate(&t, x)).collect();
            assert_eq!(LinPoly::interpolate(&t, &xs, &ys).unwrap(), f);
        }
    }

    #[test]
    fn parse_grammar() {
        let t = FieldTower::new(2, 1, 4).unwrap();
        assert_eq!(LinPoly::parse(&t, "x^q").unwrap(), LinPoly::monomial(4, Elem::ONE, 1));
        assert_eq!(LinPoly::parse(&t, "x^q^2").unwrap(), LinPoly::monomial(4, Elem::ONE, 2));
        let f = LinPoly::parse(&t, "[0,1,0,0]*x + 3*x^q^3 + x^q^3").unwrap();
        assert_eq!(f.coeff(0), Elem::from_code(2));
        assert_eq!(f.coeff(3), Elem::from_code(2));
        assert_eq!(LinPoly::parse(&t, &f.display()).unwrap(), f);
        assert_eq!(LinPoly::parse(&t, "0").unwrap(), LinPoly::zero(4));
        assert!(LinPoly::parse(&t, "x^y").is_err());
        assert!(LinPoly::parse(&t, "17*x").is_err());
        assert!(LinPoly::parse(&t, "[1,2,0,0]*x").is_err());
    }

    #[test]
    fn json_round_trip() {
        let t = FieldTower::new(3, 1, 2).unwrap();
        let f = LinPoly::new(vec![Elem::from_code(5), Elem::from_code(7)]);
        let j = serde_json::to_string(&f.to_json(&t)).unwrap();
        assert_eq!(j, r#"{"coeffs":[{"coeffs":[2,1]},{"coeffs":[1,2]}]}"#);
        let back: LinPolyJson = serde_json::from_str(&j).unwrap();
        assert_eq!(LinPoly::from_json(&t, &back).unwrap(), f);
    }
}
