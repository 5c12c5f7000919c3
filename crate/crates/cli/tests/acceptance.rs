//! Acceptance criteria 1–12. Each prints one `criterion N: PASS|FAIL` line;
//! the test fails if any criterion fails.

use std::time::{Duration, Instant};

use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use nodal_cli::{random_invariant_coordinates, run};
use nodal_core::appendix::{
    compute_lhs, compute_rhs_total, divisor_factor_for_class, elliptic_demo, AppendixCase, CaseId,
};
use nodal_core::cohomology::CohRing;
use nodal_core::gw_oracle::{kontsevich_nd, kontsevich_sequence, OracleTable, SummationOrder};
use nodal_core::linalg::Matrix;
use nodal_core::loop_matrix::{build_loop_matrix, Flavor};
use nodal_core::node_trade::NodeTrader;
use nodal_core::pairings::{enumerate_pairings, loop_number, loop_type, Pairing};
use nodal_core::partitions::{double_factorial_odd, even_row_partitions, Partition};
use nodal_core::rational::{frac, int, Rational};
use nodal_core::stable_graphs::Scenario;
use nodal_core::tensor_oracle::{invariant_map_rank, verify_diagonal_insertion, BilinearSpace};

type Check = Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Check {
    let t = start.elapsed();
    ensure(t < limit, || format!("took {t:?}, limit {limit:?}"))
}

fn span_dim(vectors: &[Vec<Rational>], len: usize) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    Matrix::from_columns(vectors, len).unwrap().rank()
}

/// Same span: both sets have rank r and so does their union.
fn same_span(a: &[Vec<Rational>], b: &[Vec<Rational>], len: usize) -> bool {
    let union: Vec<Vec<Rational>> = a.iter().chain(b).cloned().collect();
    let r = span_dim(a, len);
    r == span_dim(b, len) && r == span_dim(&union, len)
}

fn criterion_1() -> Check {
    let start = Instant::now();
    for (n, expected) in [(1, 1usize), (2, 3), (3, 15), (4, 105), (5, 945)] {
        let got = enumerate_pairings(n).map_err(|e| e.to_string())?.len();
        ensure(got == expected, || format!("n = {n}: {got} pairings, expected {expected}"))?;
    }
    within(start, Duration::from_secs(1))
}

fn criterion_2() -> Check {
    let p = Pairing::new(vec![(1, 4), (2, 5), (3, 7), (6, 8)]).unwrap();
    let q = Pairing::new(vec![(1, 2), (3, 4), (5, 7), (6, 8)]).unwrap();
    ensure(p.crossing_number() == 4, || format!("c(P) = {}", p.crossing_number()))?;
    ensure(q.crossing_number() == 1, || format!("c(Q) = {}", q.crossing_number()))?;
    let l = loop_number(&p, &q).unwrap();
    ensure(l == 2, || format!("L = {l}"))?;
    for n in 1..=3 {
        let all = enumerate_pairings(n).unwrap();
        for a in &all {
            for b in &all {
                let l = loop_number(a, b).unwrap();
                let cycles = a.as_permutation().compose(&b.as_permutation()).unwrap().cycle_count();
                ensure(cycles == 2 * l, || format!("{a} {b}: {cycles} cycles, L = {l}"))?;
                // arc-diagram trace, independent of the cycle count
                let traced = loop_type(a, b).unwrap().length();
                ensure(traced == l, || format!("{a} {b}: traced {traced} loops, L = {l}"))?;
            }
        }
    }
    Ok(())
}

fn criterion_3() -> Check {
    for n in 1..=5 {
        let total: num_bigint::BigUint = even_row_partitions(2 * n)
            .unwrap()
            .iter()
            .map(Partition::hook_dimension)
            .sum();
        ensure(total == double_factorial_odd(n), || format!("n = {n}: sum {total}"))?;
    }
    Ok(())
}

fn eigenspace_dim(m: &Matrix, lambda: &Rational) -> usize {
    let shifted = m.sub(&Matrix::identity(m.rows()).scale(lambda)).unwrap();
    shifted.kernel().len()
}

fn criterion_4() -> Check {
    let start = Instant::now();
    let line = vec![vec![int(1), int(1), int(1)]];
    let plane = vec![vec![int(1), int(-1), int(0)], vec![int(1), int(0), int(-1)]];
    for x in [2i64, 3, 5, 7, -3] {
        let xr = int(x);
        let m = build_loop_matrix(2, &xr).unwrap().matrix;
        let e_line = int(x * (x + 2));
        let e_plane = int(x * (x - 1));
        for v in &line {
            let mv = m.mul_vec(v).unwrap();
            ensure(mv == v.iter().map(|c| c * &e_line).collect::<Vec<_>>(), || format!("x = {x}: line"))?;
        }
        for v in &plane {
            let mv = m.mul_vec(v).unwrap();
            ensure(mv == v.iter().map(|c| c * &e_plane).collect::<Vec<_>>(), || format!("x = {x}: plane"))?;
        }
        ensure(eigenspace_dim(&m, &e_line) == 1, || format!("x = {x}: multiplicity of x(x+2)"))?;
        ensure(eigenspace_dim(&m, &e_plane) == 2, || format!("x = {x}: multiplicity of x(x-1)"))?;
        let ker_line = Matrix::identity(3).scale(&e_line).sub(&m).unwrap().kernel();
        ensure(same_span(&ker_line, &line, 3), || format!("x = {x}: eigenline"))?;
    }
    for x in [3i64, 5, 7, 10, -5] {
        let m = build_loop_matrix(3, &int(x)).unwrap().matrix;
        let eig = [
            (x * (x + 2) * (x + 4), 1usize),
            (x * (x + 2) * (x - 1), 9),
            (x * (x - 1) * (x - 2), 5),
        ];
        for (value, mult) in eig {
            let d = eigenspace_dim(&m, &int(value));
            ensure(d == mult, || format!("M(3,{x}): eigenvalue {value} has multiplicity {d}, expected {mult}"))?;
        }
    }
    within(start, Duration::from_secs(5))
}

fn criterion_5() -> Check {
    let start = Instant::now();
    for n in 1..=3 {
        for k in 1..=3 {
            for space in [BilinearSpace::orthogonal(k).unwrap(), BilinearSpace::symplectic(k).unwrap()] {
                verify_diagonal_insertion(n, &space)
                    .map_err(|e| format!("n = {n}, {}: {e}", space.flavor().name()))?;
            }
        }
    }
    within(start, Duration::from_secs(60))
}

fn criterion_6() -> Check {
    let o = invariant_map_rank(2, &BilinearSpace::orthogonal(1).unwrap()).unwrap();
    ensure(o.rank == 1, || format!("orthogonal k=1: rank {}", o.rank))?;
    let plane = vec![vec![int(1), int(-1), int(0)], vec![int(1), int(0), int(-1)]];
    let ker: Vec<Vec<Rational>> = o.kernel.iter().map(|v| v.coords.clone()).collect();
    ensure(same_span(&ker, &plane, 3), || format!("orthogonal kernel {ker:?}"))?;
    let s = invariant_map_rank(2, &BilinearSpace::symplectic(1).unwrap()).unwrap();
    ensure(s.rank == 2, || format!("symplectic 2k=2: rank {}", s.rank))?;
    let ker: Vec<Vec<Rational>> = s.kernel.iter().map(|v| v.coords.clone()).collect();
    ensure(same_span(&ker, &[vec![int(1), int(1), int(1)]], 3), || format!("symplectic kernel {ker:?}"))?;
    for n in 1..=3 {
        for k in 1..=3 {
            for flavor in [Flavor::orthogonal(k).unwrap(), Flavor::symplectic(k).unwrap()] {
                let expected: usize = even_row_partitions(2 * n)
                    .unwrap()
                    .iter()
                    .filter(|l| flavor.admits(l))
                    .map(|l| usize::try_from(l.hook_dimension()).unwrap())
                    .sum();
                let rank = invariant_map_rank(n, &BilinearSpace::new(flavor)).unwrap().rank;
                ensure(rank == expected, || format!("n = {n}, {} k = {k}: rank {rank}, expected {expected}", flavor.name()))?;
            }
        }
    }
    Ok(())
}

fn criterion_7() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for n in 1..=3 {
        for k in 1..=3 {
            for space in [BilinearSpace::orthogonal(k).unwrap(), BilinearSpace::symplectic(k).unwrap()] {
                let name = space.flavor().name();
                let trader = NodeTrader::new(n, space).unwrap();
                for i in 0..50 {
                    let c = random_invariant_coordinates(n, &mut rng).unwrap();
                    let omega = trader.expand(&c).unwrap();
                    let data = trader.contract_with_all_diagonals(&omega.tensor).unwrap();
                    let back = trader.recover(&data).map_err(|e| format!("{name} n={n} k={k} #{i}: {e}"))?;
                    ensure(back.tensor == omega.tensor, || format!("{name} n={n} k={k} #{i}: roundtrip differs"))?;
                }
            }
        }
    }
    within(start, Duration::from_secs(60))
}

fn criterion_8() -> Check {
    let start = Instant::now();
    for (d, expected) in [(1, 1u32), (2, 1), (3, 12)] {
        let got = kontsevich_nd(d).unwrap();
        ensure(got == expected.into(), || format!("N_{d} = {got}"))?;
    }
    let seq = kontsevich_sequence(8, SummationOrder::Forward).map_err(|e| e.to_string())?;
    ensure(seq.len() == 8, || "sequence to d = 8".into())?;
    within(start, Duration::from_secs(1))
}

fn criterion_9() -> Check {
    let start = Instant::now();
    let lhs = compute_lhs().map_err(|e| e.to_string())?;
    ensure(lhs == int(54), || format!("lhs = {lhs}"))?;
    let case = AppendixCase::new().unwrap();
    let expected = [int(3), int(5), int(8), int(10), int(3), frac(15, 2), frac(15, 2), int(10)];
    for (c, e) in CaseId::ALL.iter().zip(&expected) {
        let got = case.compute_contribution(*c).map_err(|e| e.to_string())?.value;
        ensure(&got == e, || format!("case {c}: {got}, expected {e}"))?;
    }
    let report = compute_rhs_total().map_err(|e| e.to_string())?;
    ensure(report.rhs_total == int(54) && report.agreement, || format!("rhs {}", report.rhs_total))?;
    ensure(report.degeneration.total == int(54), || format!("degeneration sum {}", report.degeneration.total))?;

    // divisor factors: recomputed from intersection numbers and matched against the case breakdown
    let f1 = CohRing::bundled("f1").unwrap();
    let p2 = CohRing::bundled("p2").unwrap();
    let live = |ring: &CohRing, class: &str| divisor_factor_for_class(ring, &ring.curve_class(class).unwrap()).unwrap();
    let checks: [(CaseId, &str, Vec<Rational>); 5] = [
        (CaseId::III, "4", vec![live(&p2, "2L")]),
        (CaseId::IV, "5", vec![live(&f1, "D0+3F")]),
        (CaseId::V, "1+1", vec![live(&p2, "L"), live(&p2, "L")]),
        (CaseId::VII, "3+0", vec![live(&f1, "D0+2F"), live(&f1, "F")]),
        (CaseId::VIII, "4", vec![live(&p2, "2L")]),
    ];
    for (c, detail, per_vertex) in checks {
        let contribution = case.compute_contribution(c).unwrap();
        let f = contribution.factor("divisor").ok_or(format!("case {c}: no divisor factor"))?;
        let recomputed: Vec<String> = per_vertex.iter().map(nodal_core::rational::format).collect();
        let sum = per_vertex.iter().fold(Rational::zero(), |a, b| a + b);
        ensure(f.detail == detail && recomputed.join("+") == detail && f.value == sum, || {
            format!("case {c}: divisor {} ({}), recomputed {recomputed:?}", f.value, f.detail)
        })?;
    }
    ensure(live(&p2, "L") == int(1), || "H⊗H on a line".into())?;
    ensure(live(&f1, "F") == int(0), || "fibre branch".into())?;
    let table = OracleTable::bundled();
    ensure(!table.keys().any(|k| k.contains("divisor")), || "divisor factor found in the count table".into())?;
    within(start, Duration::from_secs(1))
}

fn criterion_10() -> Check {
    let list = Scenario::bundled_appendix().enumerate().map_err(|e| e.to_string())?;
    ensure(list.len() == 8, || format!("{} splittings", list.len()))?;
    for s in &list {
        ensure(s.aut == 1, || format!("{}: aut {}", s.label, s.aut))?;
        let expected_m = if s.decomposition == "B" { 2 } else { 1 };
        ensure(s.m == expected_m, || format!("{}: m {}", s.label, s.m))?;
    }
    let per: Vec<usize> = ["A", "B", "C"]
        .iter()
        .map(|d| list.iter().filter(|s| s.decomposition == *d).count())
        .collect();
    ensure(per == [3, 2, 3], || format!("per decomposition {per:?}"))
}

fn criterion_11() -> Check {
    let r = elliptic_demo(&int(1), &int(0), &int(0), &int(1)).map_err(|e| e.to_string())?;
    ensure(r.determinant.is_one() && r.invariant == "<a,b>", || format!("{} {}", r.determinant, r.invariant))?;
    ensure(r.nodal_coefficient == int(2), || format!("nodal coefficient {}", r.nodal_coefficient))?;
    let z = elliptic_demo(&int(1), &int(0), &int(1), &int(0)).unwrap();
    ensure(z.determinant.is_zero(), || "degenerate determinant".into())?;
    let (u1, v1, u2, v2) = (frac(3, 2), int(-2), int(5), frac(1, 3));
    let g = elliptic_demo(&u1, &v1, &u2, &v2).unwrap();
    ensure(g.determinant == &u1 * &v2 - &u2 * &v1, || format!("determinant {}", g.determinant))
}

fn suite_outputs(seed: &str) -> Vec<String> {
    let scenario = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/data/scenarios/p2_cubic_loop.json");
    let commands: Vec<Vec<&str>> = vec![
        vec!["pairings", "--n", "3"],
        vec!["loopmat", "--n", "3", "--x", "5/2", "--eigen"],
        vec!["oracle", "--n", "2", "--flavor", "symplectic", "--k", "2", "--check-loop-matrix", "--rank"],
        vec!["trade", "--n", "2", "--flavor", "orthogonal", "--k", "2", "--random", "20"],
        vec!["trade", "--n", "2", "--flavor", "symplectic", "--k", "1", "--random", "20"],
        vec!["graphs", "--split", scenario],
        vec!["oracle-p2", "--nd", "8"],
        vec!["appendix"],
        vec!["appendix", "--case", "iv"],
        vec!["appendix", "--elliptic", "1,0,0,1"],
    ];
    commands
        .into_iter()
        .map(|c| {
            let mut args = vec!["nodal-trade", "--seed", seed];
            args.extend(c);
            let out = run(args.clone());
            assert_eq!(out.code, 0, "{args:?}: {}", out.stderr);
            out.stdout
        })
        .collect()
}

fn criterion_12() -> Check {
    let a = suite_outputs("42");
    let b = suite_outputs("42");
    ensure(a == b, || "reports differ between runs".into())?;
    for out in &a {
        let v: serde_json::Value = serde_json::from_str(out).map_err(|e| e.to_string())?;
        ensure(v["seed"] == "42", || "seed not recorded".into())?;
    }
    let c = suite_outputs("43");
    ensure(a[3] != c[3], || "seed has no effect on random roundtrips".into())
}

#[test]
fn acceptance_criteria() {
    let criteria: [(u32, fn() -> Check); 12] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
        (11, criterion_11),
        (12, criterion_12),
    ];
    let mut failed = Vec::new();
    for (n, check) in criteria {
        let start = Instant::now();
        match check() {
            Ok(()) => println!("criterion {n}: PASS ({:.2?})", start.elapsed()),
            Err(e) => {
                println!("criterion {n}: FAIL ({e})");
                failed.push(n);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
