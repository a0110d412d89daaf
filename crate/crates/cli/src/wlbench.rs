//! Counts WL-indistinguishable link pairs on random regular graphs of
//! growing size.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use linklab_core::corpus;
use linklab_core::wl::find_indistinguishable_link_pairs;

use crate::error::{at_stage, Result};
use crate::report::{BenchSizeOutcome, WlBenchReport};

pub fn run_wl_bench(
    degree: usize,
    sizes: &[usize],
    hops: usize,
    seeds: usize,
    base_seed: u64,
) -> Result<WlBenchReport> {
    let started = Instant::now();
    let mut outcomes = Vec::with_capacity(sizes.len());
    for (si, &n) in sizes.iter().enumerate() {
        let mut pairs_per_seed = Vec::with_capacity(seeds);
        for s in 0..seeds {
            let mut rng = ChaCha8Rng::seed_from_u64(base_seed + (si as u64) * 10_000 + s as u64);
            let g = corpus::random_regular(n, degree, &mut rng);
            let pairs =
                find_indistinguishable_link_pairs(&g, hops).map_err(at_stage("wl-bench"))?;
            pairs_per_seed.push(pairs.len());
        }
        let total: usize = pairs_per_seed.iter().sum();
        outcomes.push(BenchSizeOutcome {
            num_nodes: n,
            degree,
            seeds,
            seeds_with_pairs: pairs_per_seed.iter().filter(|&&c| c > 0).count(),
            mean_pairs: total as f64 / seeds.max(1) as f64,
            min_pairs: pairs_per_seed.iter().copied().min().unwrap_or(0),
            max_pairs: pairs_per_seed.iter().copied().max().unwrap_or(0),
            pairs_per_seed,
        });
    }
    Ok(WlBenchReport {
        degree,
        hops,
        sizes: outcomes,
        wall_clock_ms: started.elapsed().as_millis(),
    })
}
