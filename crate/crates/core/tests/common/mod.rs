//! Brute-force oracles shared by the integration tests. They use only field
//! arithmetic and evaluation, never the library's linear algebra.

#![allow(dead_code)]

use std::collections::BTreeSet;

use linset_lab::{Elem, FieldTower, LinPoly};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn e(c: u64) -> Elem {
    Elem::from_code(c)
}

pub fn all(t: &FieldTower) -> impl Iterator<Item = Elem> {
    (0..t.order()).map(Elem::from_code)
}

pub fn random_poly(t: &FieldTower, rng: &mut ChaCha8Rng) -> LinPoly {
    LinPoly::new((0..t.n()).map(|_| e(rng.gen_range(0..t.order()))).collect())
}

pub fn random_unit(t: &FieldTower, rng: &mut ChaCha8Rng) -> Elem {
    e(rng.gen_range(1..t.order()))
}

/// x^{(q^n - 1)/(q - 1)}.
pub fn norm(t: &FieldTower, x: Elem) -> Elem {
    t.pow(x, (t.order() - 1) / (t.q() - 1))
}

/// log_q of a power of q.
pub fn log_q(t: &FieldTower, mut count: u64) -> u32 {
    let mut k = 0;
    while count > 1 {
        assert_eq!(count % t.q(), 0, "not a power of q");
        count /= t.q();
        k += 1;
    }
    k
}

/// dim_{F_q} of {x : f(x) = a·x}.
pub fn eigen_dim(t: &FieldTower, f: &LinPoly, a: Elem) -> u32 {
    log_q(t, all(t).filter(|&x| f.evaluate(t, x) == t.mul(a, x)).count() as u64)
}

/// dim_{F_q} of the image of f.
pub fn image_rank(t: &FieldTower, f: &LinPoly) -> u32 {
    log_q(t, all(t).map(|x| f.evaluate(t, x)).collect::<BTreeSet<_>>().len() as u64)
}

/// Scales a nonzero vector so that its first nonzero entry is 1.
pub fn normalize(t: &FieldTower, v: &[Elem]) -> Vec<Elem> {
    let lead = *v.iter().find(|x| !x.is_zero()).expect("nonzero vector");
    let inv = t.inv(lead).unwrap();
    v.iter().map(|&x| t.mul(x, inv)).collect()
}

/// Points of {(x, f(x))} by brute force.
pub fn graph_points(t: &FieldTower, f: &LinPoly) -> BTreeSet<Vec<Elem>> {
    all(t).filter(|x| !x.is_zero()).map(|x| normalize(t, &[x, f.evaluate(t, x)])).collect()
}

/// Points of {(x0, x1, f0(x0) + f1(x1))} by brute force.
pub fn r3_points(t: &FieldTower, f0: &LinPoly, f1: &LinPoly) -> BTreeSet<Vec<Elem>> {
    let mut out = BTreeSet::new();
    for x0 in all(t) {
        for x1 in all(t) {
            if x0.is_zero() && x1.is_zero() {
                continue;
            }
            let y = t.add(f0.evaluate(t, x0), f1.evaluate(t, x1));
            out.insert(normalize(t, &[x0, x1, y]));
        }
    }
    out
}

/// Σ_x Tr(y·f(x)) = Tr(h(y)·x) checked for every x, y.
pub fn is_adjoint_pair(t: &FieldTower, f: &LinPoly, h: &LinPoly) -> bool {
    all(t).all(|x| {
        all(t).all(|y| t.trace(t.mul(y, f.evaluate(t, x))) == t.trace(t.mul(h.evaluate(t, y), x)))
    })
}
