//! Deterministic seeded instance generation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::harness::scenario::InstanceSpec;
use crate::rank::{footrule, PriorityOrder};

/// Expands an instance spec into true-type profiles. Exhaustive grids ignore
/// the seed and come out in lexicographic order; sampled and
/// permutation-derived streams are a pure function of the seed.
pub fn generate_instances(seed: u64, spec: &InstanceSpec) -> Result<Vec<Vec<u64>>> {
    match *spec {
        InstanceSpec::Exhaustive { agents, theta_min, theta_max } => {
            if theta_min > theta_max {
                return Err(Error::EmptyRange(format!(
                    "theta_min {theta_min} > theta_max {theta_max}"
                )));
            }
            let mut out = Vec::new();
            let mut profile = vec![theta_min; agents];
            loop {
                out.push(profile.clone());
                let mut pos = agents;
                loop {
                    if pos == 0 {
                        return Ok(out);
                    }
                    pos -= 1;
                    if profile[pos] < theta_max {
                        profile[pos] += 1;
                        break;
                    }
                    profile[pos] = theta_min;
                }
            }
        }
        InstanceSpec::Sample { agents, theta_max, count } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            Ok((0..count)
                .map(|_| (0..agents).map(|_| rng.gen_range(0..=theta_max)).collect())
                .collect())
        }
        InstanceSpec::Permutation { agents, tasks, count } => {
            if tasks == 0 {
                return Err(Error::EmptyRange("permutation mode needs at least one task".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let principal = PriorityOrder::identity(tasks);
            let mut out = Vec::with_capacity(count);
            for _ in 0..count {
                let mut profile = Vec::with_capacity(agents);
                for _ in 0..agents {
                    let mut ranks: Vec<u32> = (1..=tasks as u32).collect();
                    for i in (1..ranks.len()).rev() {
                        let j = rng.gen_range(0..=i);
                        ranks.swap(i, j);
                    }
                    let preferred = PriorityOrder::new(ranks).expect("shuffled identity");
                    profile.push(footrule(&principal, &preferred)?.total);
                }
                out.push(profile);
            }
            Ok(out)
        }
    }
}
