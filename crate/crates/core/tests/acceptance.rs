//! Acceptance suite: one test per criterion, each printing a pass/fail line
//! per claim instance. Everything is exact; there are no tolerances to
//! tune, only equalities that hold or fail.

use swl_core::lefschetz::Convention;
use swl_core::report::{summary_line, VerificationReport};
use swl_core::verify::{self, MainOptions, ModelCache, RunParams};

fn run(name: &str, r: &VerificationReport) {
    println!("ACCEPTANCE {name}: {}", summary_line(r));
    assert!(r.passed(), "{name} failed: {}", serde_json::to_string_pretty(&r.to_json()).unwrap());
}

fn rp(q: u64, m: usize, n: usize) -> RunParams {
    RunParams { q, m, n, samples: 200, seed: 2024, psi_twist: 0, convention: Convention::PsiInverse }
}

#[test]
fn criterion_01_heisenberg_weil_character_law() {
    let cache = ModelCache::new();
    for (q, m, n, samples) in [
        (2u64, 1usize, 1usize, 0usize),
        (2, 3, 1, 0),
        (3, 1, 1, 0),
        (3, 3, 1, 0),
        (2, 1, 2, 0),
        (2, 1, 3, 0),
        (2, 3, 2, 500),
    ] {
        let mut p = rp(q, m, n);
        p.samples = samples.max(1);
        let r = verify::heisenberg_weil(&cache, &p).unwrap();
        run(&format!("1 heisenberg-weil q={q} m={m} n={n}"), &r);
    }
    // Second psi twist where distinct twists exist.
    let mut p = rp(3, 3, 1);
    p.psi_twist = 1;
    let r = verify::heisenberg_weil(&cache, &p).unwrap();
    run("1 heisenberg-weil q=3 m=3 n=1 twist=1", &r);
}

#[test]
fn criterion_02_frobenius_scalar_and_counts() {
    let cache = ModelCache::new();
    for (q, m, n) in [(2u64, 3usize, 1usize), (2, 3, 2), (3, 3, 1)] {
        let r = verify::frobenius_scalar(&cache, &rp(q, m, n)).unwrap();
        run(&format!("2 frobenius-scalar q={q} m={m} n={n}"), &r);
    }
}

#[test]
fn criterion_03_trace_tables() {
    let cache = ModelCache::new();
    for (q, n) in [(2u64, 1usize), (3, 1), (2, 2)] {
        let r = verify::trace_tables(&cache, &rp(q, 3, n)).unwrap();
        run(&format!("3 trace-tables q={q} m=3 n={n}"), &r);
    }
}

#[test]
fn criterion_04_main_identity() {
    let cache = ModelCache::new();
    // (a) n = 1 exhaustive; the constructive path gets a sampling budget at
    // q = 3 where the witness towers are large.
    for q in [2u64, 3] {
        for i in 1..=3usize {
            let p = rp(q, 3, 1);
            let budget = if q == 2 { None } else { Some(2000) };
            let opts = MainOptions { i, path_a_budget: budget, exhaustive: true };
            let r = verify::main_theorem(&cache, &p, &opts).unwrap();
            run(&format!("4a shintani-lift q={q} m=3 n=1 i={i}"), &r);
        }
    }
    // (b) n = 2 sampled, invariant path.
    for i in 1..=3usize {
        let mut p = rp(2, 3, 2);
        p.samples = 200;
        let opts = MainOptions { i, path_a_budget: Some(0), exhaustive: false };
        let r = verify::main_theorem(&cache, &p, &opts).unwrap();
        run(&format!("4b shintani-lift q=2 m=3 n=2 i={i}"), &r);
    }
    // psi-twist variation at q = 3 (two distinct twists exist).
    let mut p = rp(3, 3, 1);
    p.psi_twist = 1;
    p.samples = 500;
    let opts = MainOptions { i: 1, path_a_budget: Some(200), exhaustive: false };
    let r = verify::main_theorem(&cache, &p, &opts).unwrap();
    run("4 shintani-lift q=3 m=3 n=1 twist=1 sampled", &r);
}

#[test]
fn criterion_05_uniqueness() {
    let cache = ModelCache::new();
    for q in [2u64, 3] {
        let r = verify::uniqueness(&cache, &rp(q, 3, 1)).unwrap();
        run(&format!("5 uniqueness q={q} m=3 n=1"), &r);
    }
}

#[test]
fn criterion_06_support() {
    let cache = ModelCache::new();
    let r = verify::support(&cache, &rp(2, 3, 1)).unwrap();
    run("6 support q=2 m=3 n=1 exhaustive", &r);
    let mut p = rp(2, 3, 2);
    p.samples = 500;
    let r = verify::support(&cache, &p).unwrap();
    run("6 support q=2 m=3 n=2 sampled", &r);
}

#[test]
fn criterion_07_compatibilities() {
    let cache = ModelCache::new();
    for m in [1usize, 3] {
        let mut p = rp(2, m, 2);
        p.samples = 200;
        let r = verify::orthogonal(&cache, &p).unwrap();
        run(&format!("7 orthogonal q=2 m={m}"), &r);
    }
    let r = verify::parabolic(&cache, &rp(2, 1, 3)).unwrap();
    run("7 parabolic q=2 m=1 n=3", &r);
    // Form-negation twist rides along with the compatibility block.
    for (q, m, n) in [(2u64, 3usize, 1usize), (2, 3, 2)] {
        let mut p = rp(q, m, n);
        p.samples = 100;
        let r = verify::twist(&cache, &p).unwrap();
        run(&format!("7 form-negation q={q} m={m} n={n}"), &r);
    }
}

#[test]
fn criterion_08_torus_and_tensor_induction() {
    let cache = ModelCache::new();
    let r = verify::torus_tensor(&cache, &rp(2, 3, 1)).unwrap();
    run("8 torus-tensor q=2 m=n=3", &r);
}

#[test]
fn criterion_09_norm_map_machinery() {
    let cache = ModelCache::new();
    for q in [2u64, 3] {
        let r = verify::gyoja(&cache, &rp(q, 3, 1)).unwrap();
        run(&format!("9 gyoja q={q} m=3"), &r);
    }
}

#[test]
fn criterion_10_cross_oracle_integrity() {
    let cache = ModelCache::new();
    // The full zeta/j grid of criterion 3 runs both oracles inside
    // trace_tables; here the sampled group elements and count cross-checks.
    for q in [2u64, 3] {
        let mut p = rp(q, 3, 1);
        p.samples = 60;
        let r = verify::cross_oracle(&cache, &p).unwrap();
        run(&format!("10 cross-oracle q={q} m=3 n=1"), &r);
    }
    let mut p = rp(2, 3, 2);
    p.samples = 34; // 34 samples x 3 Frobenius powers ~ 100 cells
    let r = verify::cross_oracle(&cache, &p).unwrap();
    run("10 cross-oracle q=2 m=3 n=2 samples", &r);
    for q in [2u64, 3] {
        let r = verify::curve_decomposition(&rp(q, 3, 1)).unwrap();
        run(&format!("10 curve-decomposition q={q} m=3"), &r);
    }
}
