fn main() {
    let t0 = std::time::Instant::now();
    let cache = swl_core::verify::ModelCache::new();
    let rp = swl_core::verify::RunParams {
        q: 2, m: 3, n: 2, samples: 20, seed: 7, psi_twist: 0,
        convention: swl_core::lefschetz::Convention::PsiInverse,
    };
    let r = swl_core::verify::heisenberg_weil(&cache, &rp).unwrap();
    println!("20 samples U_2(8): {:?} passed={}", t0.elapsed(), r.passed());
}
