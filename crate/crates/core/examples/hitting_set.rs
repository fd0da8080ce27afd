//! A hitting set for all 3- and 4-subsets of a 12-element universe, with the
//! certificate and a Monte-Carlo estimate of how often a random set works.

use commproto::bits::Pattern;
use commproto::hitting::{find_hitting_set, sample_hit_rate};
use commproto::patterns::PatternFamily;
use itertools::Itertools;
use rand::SeedableRng;
use rand_xoshiro::Xoshiro256StarStar;

fn main() -> commproto::Result<()> {
    let m = 12;
    let t = 4;
    let patterns = (3..=4).flat_map(|k| (0..m).combinations(k)).map(Pattern::from_indices).collect();
    let family = PatternFamily::new(m, patterns)?;
    let cert = find_hitting_set(&family, t)?;
    cert.verify(&family)?;
    println!("|Γ| = {}, t = {t}", family.len());
    println!("σ = {:?} (size {}, target {})", cert.sigma, cert.sigma.len(), cert.target_size);
    println!("hits {} of {} large patterns", cert.hit_count, cert.large_count);
    println!("max |γ ∩ σ| = {} under threshold {:.2}", cert.max_intersection, cert.threshold);

    let mut rng = Xoshiro256StarStar::seed_from_u64(0);
    println!("random σ success rate: {:.3}", sample_hit_rate(&family, t, 2000, &mut rng));
    Ok(())
}
