//! Acceptance checks, one line per criterion. Runs without the libtest
//! harness so the lines always reach the output.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use common::*;
use linset_lab::classify::{bucket_search, classify_pair, replay, verify_club_uniqueness, Case, SearchOptions};
use linset_lab::gf::linalg;
use linset_lab::linset::{
    cone_base, construct_club, generalized_partner, graph_subspace, is_cone_r3, linear_set, multi_coeffs,
    multi_graph_subspace, perp, sets_equal, Generalized, PartnerMode, Point,
};
use linset_lab::{diag_similar, DicksonMatrix, Elem, FieldTower, LinPoly};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn field(p: u64, n: u32) -> FieldTower {
    FieldTower::new(p, 1, n).unwrap()
}

fn search_ok(t: &FieldTower, opts: &SearchOptions) -> Result<linset_lab::classify::BucketReport, String> {
    let r = bucket_search(t, opts).map_err(|e| e.to_string())?;
    let q = t.q() as u128;
    check(r.scanned as u128 == q.pow(t.n() * t.n()), || format!("scanned {}", r.scanned))?;
    check(r.skipped_zero + r.skipped_linearity + r.skipped_twist + r.orbit_reps == r.scanned, || {
        "scan accounting does not add up".into()
    })?;
    check(r.anomalies.is_empty(), || format!("anomalies: {:?}", r.anomalies))?;
    check(r.flagged.is_empty(), || format!("flagged: {:?}", r.flagged))?;
    Ok(r)
}

fn only_multiples(r: &linset_lab::classify::BucketReport) -> Result<(), String> {
    for k in r.verdict_histogram.keys() {
        check(k == "multiple" || k == "perp_multiple", || format!("verdict {k} present"))?;
    }
    Ok(())
}

fn c1() -> Outcome {
    let mut parts = Vec::new();
    for (p, n) in [(2, 2), (2, 3), (3, 2), (3, 3)] {
        let t = field(p, n);
        let r = search_ok(&t, &SearchOptions::default())?;
        only_multiples(&r)?;
        parts.push(format!("({p},{n}) pairs={}", r.pairs_classified));
    }
    Ok(parts.join(", "))
}

fn c2() -> Outcome {
    let t = field(2, 4);
    let r = search_ok(&t, &SearchOptions::default())?;
    only_multiples(&r)?;
    Ok(format!("scanned={} buckets={} pairs={} {:?}", r.scanned, r.bucket_count, r.pairs_classified, r.verdict_histogram))
}

fn c2_second_modulus() -> Outcome {
    let canonical = search_ok(&field(2, 4), &SearchOptions::default())?;
    let t = FieldTower::with_modulus(2, 1, 4, vec![1, 1, 0, 0, 1]).unwrap();
    let r = search_ok(&t, &SearchOptions::default())?;
    only_multiples(&r)?;
    check(
        r.orbit_reps == canonical.orbit_reps
            && r.bucket_count == canonical.bucket_count
            && r.verdict_histogram == canonical.verdict_histogram,
        || "statistics depend on the modulus".into(),
    )?;
    Ok(format!("x^4+x+1: buckets={} pairs={}", r.bucket_count, r.pairs_classified))
}

fn c3() -> Outcome {
    let mut parts = Vec::new();
    for p in [2, 3] {
        let t = field(p, 5);
        let n = 5u32;
        struct Item {
            i: u32,
            a: Elem,
            fp: Vec<u64>,
            points: BTreeSet<Vec<Elem>>,
            norm: Elem,
        }
        let mut items = Vec::new();
        // n is prime, so every exponent 1..n is coprime to it
        for i in 1..n {
            for a in all(&t).skip(1) {
                let f = LinPoly::monomial(n, a, i);
                let fp = DicksonMatrix::from_poly(&t, &f).fingerprint(&t).unwrap().to_codes();
                items.push(Item { i, a, fp, points: graph_points(&t, &f), norm: norm(&t, a) });
            }
        }
        // the three equivalence relations coincide iff each key determines the others
        let mut by_fp: BTreeMap<&Vec<u64>, (&BTreeSet<Vec<Elem>>, Elem)> = BTreeMap::new();
        let mut by_points: BTreeMap<&BTreeSet<Vec<Elem>>, &Vec<u64>> = BTreeMap::new();
        let mut by_norm: BTreeMap<Elem, &Vec<u64>> = BTreeMap::new();
        for it in &items {
            let (pts, nm) = *by_fp.entry(&it.fp).or_insert((&it.points, it.norm));
            check(pts == &it.points && nm == it.norm, || "fingerprint class is not a point-set class".into())?;
            check(*by_points.entry(&it.points).or_insert(&it.fp) == &it.fp, || "point set with two fingerprints".into())?;
            check(*by_norm.entry(it.norm).or_insert(&it.fp) == &it.fp, || "norm class with two fingerprints".into())?;
        }
        // spot-check the library path on representatives of each norm class
        let reps: Vec<&Item> = items.iter().filter(|it| it.a.code() <= 3).collect();
        for x in &reps {
            for y in &reps {
                let (f, g) = (LinPoly::monomial(n, x.a, x.i), LinPoly::monomial(n, y.a, y.i));
                let eq = sets_equal(&t, &graph_subspace(&t, &f), &graph_subspace(&t, &g)).unwrap();
                check(eq == (x.norm == y.norm), || format!("sets_equal mismatch for {} and {}", f.display(), g.display()))?;
            }
        }
        let mut diag_checked = 0u64;
        for x in &items {
            let a = DicksonMatrix::from_poly(&t, &LinPoly::monomial(n, x.a, x.i));
            for y in items.iter().filter(|y| y.norm == x.norm) {
                let b = DicksonMatrix::from_poly(&t, &LinPoly::monomial(n, y.a, y.i));
                let direct = diag_similar(&t, &a, &b);
                if y.i != x.i && y.i != n - x.i {
                    check(direct.is_none() && diag_similar(&t, &a, &b.transpose(&t)).is_none(), || {
                        format!("diagonal similarity for exponents {} and {}", x.i, y.i)
                    })?;
                    diag_checked += 1;
                } else if y.i == x.i {
                    check(direct.is_some(), || "equal exponents and norms without a twist".into())?;
                }
            }
        }
        check(by_norm.len() as u64 == t.q() - 1, || "norm classes".into())?;
        parts.push(format!("q={p}: {} graphs, {} classes, {diag_checked} non-similar pairs", items.len(), by_fp.len()));
    }
    Ok(parts.join("; "))
}

fn c4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut total = 0;
    for (p, n) in [(2, 3), (2, 4), (2, 5), (3, 3)] {
        let t = field(p, n);
        let expected = (t.order() - 1) / (t.q() - 1);
        for _ in 0..100 {
            let f = random_poly(&t, &mut rng);
            let a_mat = DicksonMatrix::from_poly(&t, &f);
            let mut sum = 0;
            for a in all(&t) {
                let m = a_mat.root_multiplicity(&t, a);
                let w = eigen_dim(&t, &f, a);
                let oracle: u64 = (0..w).map(|k| t.q().pow(k)).sum();
                check(m == oracle, || format!("multiplicity at {} for {}", a.code(), f.display()))?;
                sum += m;
            }
            check(sum == expected, || format!("sum {sum} != {expected} for {}", f.display()))?;
            total += 1;
        }
    }
    Ok(format!("{total} polynomials"))
}

fn c5() -> Outcome {
    let mut count = 0u64;
    let mut probe = |t: &FieldTower, f: &LinPoly| -> Result<(), String> {
        let lead = DicksonMatrix::from_poly(t, f).rank_leading(t);
        check(lead == f.map_rank(t) && lead as u32 == image_rank(t, f), || format!("rank mismatch for {}", f.display()))?;
        count += 1;
        Ok(())
    };
    for n in [3u32, 4] {
        let t = field(2, n);
        for id in 0..t.order().pow(n) {
            let mut c = id;
            let f = LinPoly::new(
                (0..n)
                    .map(|_| {
                        let x = e(c % t.order());
                        c /= t.order();
                        x
                    })
                    .collect(),
            );
            probe(&t, &f)?;
        }
    }
    let t = field(2, 6);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10_000 {
        probe(&t, &random_poly(&t, &mut rng))?;
    }
    Ok(format!("{count} polynomials"))
}

fn c6() -> Outcome {
    let mut parts = Vec::new();
    for (p, n) in [(2, 4), (2, 5), (3, 3)] {
        let t = field(p, n);
        let choices = [(0, 1, 1), (1, 1, 1), (2, 3, 5), (t.order() - 1, 2, t.order() - 2)];
        for (a, b, l) in choices {
            let (a, b, l) = (e(a), e(b), e(l));
            let u = construct_club(&t, a, b, l).unwrap();
            let f = u.as_graph(&t).unwrap();
            let spec = linear_set(&t, &u).unwrap().spectrum();
            let mut oracle = vec![0u64; n as usize];
            for s in all(&t) {
                let w = eigen_dim(&t, &f, s);
                if w > 0 {
                    oracle[w as usize - 1] += 1;
                }
            }
            check(spec == oracle, || format!("spectrum {spec:?} vs oracle {oracle:?}"))?;
            let mut want = vec![0u64; n as usize];
            want[0] = t.q().pow(n - 1);
            want[n as usize - 2] += 1;
            check(spec == want, || format!("club spectrum {spec:?}"))?;
            let shifted = f.sub(&t, &LinPoly::scalar(n, a));
            let r = linalg::rank(&t, DicksonMatrix::from_poly(&t, &shifted).matrix());
            check(r == 1, || format!("rank(A - diag) = {r}"))?;
        }
        parts.push(format!("({p},{n}) spectra ok"));
    }
    for (p, n) in [(2, 3), (2, 4), (3, 3)] {
        let r = verify_club_uniqueness(&field(p, n), &SearchOptions::default()).map_err(|e| e.to_string())?;
        check(r.unique && r.club_reps > 0, || format!("club uniqueness fails at ({p},{n}): {:?}", r.violations))?;
        parts.push(format!("({p},{n}) {} club orbits unique", r.club_reps));
    }
    Ok(parts.join(", "))
}

fn generalized_case(t: &FieldTower, gen: &Generalized, mode: PartnerMode, want: Case) -> Outcome {
    let f = gen.poly(t);
    let w = generalized_partner(t, gen, mode).map_err(|e| e.to_string())?;
    let g = w.as_graph(t).ok_or("partner is not a graph")?;
    let u = graph_subspace(t, &f);
    check(sets_equal(t, &u, &w).unwrap(), || "fingerprints differ".into())?;
    check(graph_points(t, &f) == graph_points(t, &g), || "point sets differ".into())?;
    let (a, b) = (DicksonMatrix::from_poly(t, &f), DicksonMatrix::from_poly(t, &g));
    check(diag_similar(t, &a, &b).is_none(), || "W is a multiple of U".into())?;
    check(diag_similar(t, &a, &b.transpose(t)).is_none(), || "W is a multiple of the perp".into())?;
    check(w != u && w != perp(t, &u).unwrap(), || "partner coincides with U or its perp".into())?;
    let v = classify_pair(t, &f, &g).map_err(|e| e.to_string())?;
    check(v.case == want, || format!("classified as {}", v.case.as_str()))?;
    check(replay(t, &f, &g, &v).unwrap(), || "witness does not replay".into())?;
    Ok(format!("f = {}, g = {}, verdict {}", f.display(), g.display(), v.case.as_str()))
}

fn c7() -> Outcome {
    let t = field(2, 6);
    let theta = e(2);
    let f_prime = LinPoly::monomial(6, theta, 3);
    check(!t.in_subfield(theta, 3).unwrap(), || "a_3 lies in F_(q^3)".into())?;
    let gen = Generalized::new(&t, f_prime, vec![e(0), e(0), e(1)], e(1), 3).unwrap();
    generalized_case(&t, &gen, PartnerMode::PerpD, Case::GeneralizedPerp)
}

fn c8() -> Outcome {
    let t = field(2, 10);
    let gen = Generalized::new(&t, LinPoly::zero(10), vec![e(0), e(1), e(0), e(0), e(0)], e(1), 5).unwrap();
    generalized_case(&t, &gen, PartnerMode::Pseudoregulus(2), Case::GeneralizedPseudoregulus)
}

fn c9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut total = 0;
    for (p, n) in [(2, 4), (2, 5), (3, 3)] {
        let t = field(p, n);
        for _ in 0..100 {
            let f = random_poly(&t, &mut rng);
            let u = graph_subspace(&t, &f);
            let up = perp(&t, &u).unwrap();
            let h = f.adjoint(&t);
            check(up == graph_subspace(&t, &h), || format!("perp is not the adjoint graph for {}", f.display()))?;
            check(sets_equal(&t, &u, &up).unwrap(), || "fingerprints of U and its perp differ".into())?;
            check(graph_points(&t, &f) == graph_points(&t, &h), || "point sets of U and its perp differ".into())?;
            total += 1;
        }
    }
    Ok(format!("{total} graphs"))
}

fn c10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let (mut equal, mut unequal) = (0, 0);
    let mut probe = |t: &FieldTower, f: &[LinPoly; 2], g: &[LinPoly; 2]| -> Result<(), String> {
        let mf = multi_coeffs(t, &[DicksonMatrix::from_poly(t, &f[0]), DicksonMatrix::from_poly(t, &f[1])]).unwrap();
        let mg = multi_coeffs(t, &[DicksonMatrix::from_poly(t, &g[0]), DicksonMatrix::from_poly(t, &g[1])]).unwrap();
        let same = r3_points(t, &f[0], &f[1]) == r3_points(t, &g[0], &g[1]);
        check((mf == mg) == same, || {
            format!("coefficients {} but point sets {}", mf == mg, same)
        })?;
        if same {
            equal += 1;
        } else {
            unequal += 1;
        }
        Ok(())
    };
    // n = 2: every g against 25 random f
    let t = field(2, 2);
    for _ in 0..25 {
        let f = [random_poly(&t, &mut rng), random_poly(&t, &mut rng)];
        for id in 0..t.order().pow(4) {
            let c = |k: u32| e((id / t.order().pow(k)) % t.order());
            let g = [LinPoly::new(vec![c(0), c(1)]), LinPoly::new(vec![c(2), c(3)])];
            probe(&t, &f, &g)?;
        }
    }
    // n = 3: 50 pairs, alternating twists, perturbations and random data
    let t = field(2, 3);
    for k in 0..50 {
        let f = [random_poly(&t, &mut rng), random_poly(&t, &mut rng)];
        let g = match k % 3 {
            0 => {
                let l = random_unit(&t, &mut rng);
                [f[0].twist(&t, l).unwrap(), f[1].twist(&t, l).unwrap()]
            }
            1 => [f[0].add(&t, &LinPoly::monomial(3, random_unit(&t, &mut rng), 1)), f[1].clone()],
            _ => [random_poly(&t, &mut rng), random_poly(&t, &mut rng)],
        };
        probe(&t, &f, &g)?;
    }
    check(equal > 0 && unequal > 0, || "both outcomes must occur".into())?;
    Ok(format!("{equal} equal and {unequal} unequal pairs"))
}

fn c11() -> Outcome {
    let t = field(2, 5);
    let mut parts = Vec::new();
    for c in [e(1), e(2), e(19)] {
        let fs = [LinPoly::monomial(5, e(1), 1), LinPoly::scalar(5, c)];
        let u = multi_graph_subspace(&t, &fs);
        let l = linear_set(&t, &u).unwrap();
        let vertex = Point::new(&t, &[e(0), e(1), c]).unwrap();
        check(is_cone_r3(&t, &l, &vertex).unwrap(), || format!("not a cone for c = {}", c.code()))?;
        let base: BTreeSet<Vec<Elem>> =
            cone_base(&t, &l, &vertex).unwrap().iter().map(|p| p.coords().to_vec()).collect();
        let oracle: BTreeSet<Vec<Elem>> =
            all(&t).filter(|&s| norm(&t, s) == Elem::ONE).map(|s| vec![e(1), e(0), s]).collect();
        check(base == oracle, || "base is not {N(t) = 1}".into())?;
        let gs = [LinPoly::monomial(5, e(1), 2), LinPoly::scalar(5, c)];
        let w = multi_graph_subspace(&t, &gs);
        check(sets_equal(&t, &u, &w).unwrap(), || "partner set differs".into())?;
        check(r3_points(&t, &fs[0], &fs[1]) == r3_points(&t, &gs[0], &gs[1]), || "partner points differ".into())?;
        parts.push(format!("c={}: {} points", c.code(), l.len()));
    }
    Ok(parts.join(", "))
}

fn c12() -> Outcome {
    let t = field(2, 5);
    let opts = |workers| SearchOptions { workers, budget: 1 << 25, ..SearchOptions::default() };
    let r1 = search_ok(&t, &opts(1))?;
    let r2 = search_ok(&t, &opts(3))?;
    check(serde_json::to_string(&r1).unwrap() == serde_json::to_string(&r2).unwrap(), || {
        "reports differ across worker counts".into()
    })?;
    for k in r1.verdict_histogram.keys() {
        check(!k.starts_with("generalized") && k != "unknown", || format!("verdict {k} at prime n"))?;
    }
    Ok(format!("scanned={} reps={} pairs={} {:?}", r1.scanned, r1.orbit_reps, r1.pairs_classified, r1.verdict_histogram))
}

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("1 n<=3 equal-set pairs are multiples or perp multiples", c1),
        ("2 n=4 equal-set pairs are multiples or perp multiples", c2),
        ("2b n=4 search under the modulus x^4+x+1", c2_second_modulus),
        ("3 pseudoregulus sets and norms", c3),
        ("4 root counts and multiplicities", c4),
        ("5 leading-minor rank", c5),
        ("6 clubs", c6),
        ("7 generalized perp at n=6", c7),
        ("8 generalized pseudoregulus at n=10", c8),
        ("9 perp identity", c9),
        ("10 r=3 coefficients versus point sets", c10),
        ("11 cones in PG(2,2^5)", c11),
        ("12 exhaustive search at (2,5)", c12),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, f) in criteria {
        if !filter.is_empty() && !filter.iter().any(|s| name.contains(s.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS [{name}] ({secs:.1}s) {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL [{name}] ({secs:.1}s) {why}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
