//! Deterministic hitting sets for families of bounded-size patterns.
//!
//! Given `Γ` with every `|γ| <= 2t`, we look for `σ ⊆ [m]` that meets at least
//! half of the large patterns (`|γ| >= t`) while no pattern meets `σ` in more
//! than `8e + log2 |Γ|` elements. A random `σ` of size `2m/t` works with
//! probability above one half; here the subsets of size
//! `s* = min(m, ceil(2m/t))` are scanned in lexicographic order of their
//! sorted index lists and the first success wins, so both players derive the
//! same `σ` without talking. Other sizes are scanned only as a fallback.
//!
//! `t` may be a half-integer: callers that work with a window `[s/2, s]` pass
//! `2t = s` through [`find_hitting_set_for_window`].

use crate::bits::Pattern;
use crate::error::{Error, Result};
use crate::patterns::PatternFamily;
use itertools::Itertools;
use rand::seq::index::sample;
use rand::Rng;
use std::f64::consts::E;

#[derive(Clone, Debug, PartialEq)]
pub struct HittingCertificate {
    pub sigma: Pattern,
    pub universe: usize,
    /// `2t`, so half-integer `t` stays exact.
    pub two_t: usize,
    pub hit_count: usize,
    pub large_count: usize,
    pub max_intersection: usize,
    /// `8e + log2 |Γ|`
    pub threshold: f64,
    /// `min(m, ceil(2m/t))`
    pub target_size: usize,
    /// Set when `σ` was not found among subsets of the target size.
    pub fallback: bool,
}

impl HittingCertificate {
    /// Recomputes both bounds from scratch against `family`.
    pub fn verify(&self, family: &PatternFamily) -> Result<()> {
        let mut hit = 0;
        let mut large = 0;
        let mut worst = 0;
        for g in family.patterns() {
            let members: Vec<usize> = (0..family.universe()).filter(|&i| g.contains(i)).collect();
            let inside = members.iter().filter(|&&i| self.sigma.contains(i)).count();
            worst = worst.max(inside);
            if 2 * members.len() >= self.two_t {
                large += 1;
                if inside > 0 {
                    hit += 1;
                }
            }
        }
        let threshold = 8.0 * E + (family.len() as f64).log2();
        if (hit, large, worst) != (self.hit_count, self.large_count, self.max_intersection) {
            return Err(Error::invariant(format!(
                "certificate claims hit/large/max {}/{}/{} but recount gives {hit}/{large}/{worst}",
                self.hit_count, self.large_count, self.max_intersection
            )));
        }
        if 2 * hit < large {
            return Err(Error::invariant(format!("σ hits only {hit} of {large} large patterns")));
        }
        if worst as f64 > threshold {
            return Err(Error::invariant(format!("intersection {worst} exceeds {threshold:.3}")));
        }
        Ok(())
    }
}

/// `σ` for patterns of size at most `2t`, large meaning `|γ| >= t`.
pub fn find_hitting_set(family: &PatternFamily, t: usize) -> Result<HittingCertificate> {
    if t == 0 {
        return Err(Error::input("t must be positive"));
    }
    find_hitting_set_for_window(family, 2 * t)
}

/// Same search with `t = two_t / 2`, large meaning `2|γ| >= two_t`.
pub fn find_hitting_set_for_window(family: &PatternFamily, two_t: usize) -> Result<HittingCertificate> {
    let m = family.universe();
    if m == 0 {
        return Err(Error::input("empty witness universe"));
    }
    if family.is_empty() {
        return Err(Error::input("empty pattern family"));
    }
    if two_t == 0 {
        return Err(Error::input("t must be positive"));
    }
    if let Some(g) = family.patterns().iter().find(|g| g.len() > two_t) {
        return Err(Error::input(format!("pattern {g:?} is larger than 2t = {two_t}")));
    }

    let threshold = 8.0 * E + (family.len() as f64).log2();
    let large: Vec<Pattern> = family.patterns().iter().copied().filter(|g| 2 * g.len() >= two_t).collect();
    let target_size = m.min((4 * m).div_ceil(two_t));

    let evaluate = |sigma: Pattern| {
        let hit = large.iter().filter(|g| !g.intersect(sigma).is_empty()).count();
        let worst = family.patterns().iter().map(|g| g.intersect(sigma).len()).max().unwrap_or(0);
        (hit, worst)
    };
    let certificate = |sigma: Pattern, hit: usize, worst: usize, fallback: bool| HittingCertificate {
        sigma,
        universe: m,
        two_t,
        hit_count: hit,
        large_count: large.len(),
        max_intersection: worst,
        threshold,
        target_size,
        fallback,
    };

    if large.is_empty() {
        // Nothing to hit; the empty set has the smallest intersections.
        return Ok(certificate(Pattern::EMPTY, 0, 0, false));
    }

    let sizes = std::iter::once(target_size).chain(target_size + 1..=m).chain((0..target_size).rev());
    for size in sizes {
        for combo in (0..m).combinations(size) {
            let sigma = Pattern::from_indices(combo);
            let (hit, worst) = evaluate(sigma);
            if 2 * hit >= large.len() && worst as f64 <= threshold {
                return Ok(certificate(sigma, hit, worst, size != target_size));
            }
        }
    }
    Err(Error::ClaimViolation(format!(
        "no σ ⊆ [{m}] hits half of {} large patterns within {threshold:.3}",
        large.len()
    )))
}

/// Fraction of `samples` uniform subsets of the target size that satisfy the
/// hitting condition. Expected to exceed one half.
pub fn sample_hit_rate<R: Rng + ?Sized>(family: &PatternFamily, t: usize, samples: usize, rng: &mut R) -> f64 {
    let m = family.universe();
    let two_t = 2 * t;
    let size = m.min((4 * m).div_ceil(two_t));
    let large: Vec<Pattern> = family.patterns().iter().copied().filter(|g| 2 * g.len() >= two_t).collect();
    let threshold = 8.0 * E + (family.len() as f64).log2();
    let good = (0..samples)
        .filter(|_| {
            let sigma = Pattern::from_indices(sample(rng, m, size));
            let hit = large.iter().filter(|g| !g.intersect(sigma).is_empty()).count();
            let worst = family.patterns().iter().map(|g| g.intersect(sigma).len()).max().unwrap_or(0);
            2 * hit >= large.len() && worst as f64 <= threshold
        })
        .count();
    good as f64 / samples.max(1) as f64
}
