//! Randomised rounding of a graph towards a target signature.

use crate::error::{Error, Result};
use crate::graph::{block_densities, edit_count, pairs, Equipartition, Graph};
use crate::rng::counter_uniform;
use crate::signature::{zero_signature, Signature};

#[derive(Clone, Debug)]
pub struct RoundingReport {
    pub result: Graph,
    /// Number of pairs whose adjacency changed.
    pub edits: usize,
    /// The zero signature of the partition in the result.
    pub realized: Signature,
    /// `max |d′(V_i, V_j) − η′_{i,j}|` over part pairs.
    pub per_pair_dev: f64,
}

/// Change probabilities for one part pair with density `d` and target `eta`:
/// `(remove, add)`. At `d ∈ {0, 1}` the formulas reduce to pure addition or
/// removal, which keeps the expected density equal to the target.
pub fn flip_probabilities(d: f64, eta: f64) -> (f64, f64) {
    if eta <= d {
        let remove = if d > 0.0 { 1.0 - eta / d } else { 0.0 };
        (remove, 0.0)
    } else {
        (0.0, 1.0 - (1.0 - eta) / (1.0 - d))
    }
}

/// Keeps pairs inside parts and re-draws each cross pair `u ∈ V_i`,
/// `v ∈ V_j` with an independent coin keyed by `(seed, i, j, u, v)`.
pub fn randomized_round(g: &Graph, a: &Equipartition, target: &Signature, seed: u64) -> Result<RoundingReport> {
    if a.n() != g.n() {
        return Err(Error::domain("partition and graph sizes differ"));
    }
    if target.t() != a.t() {
        return Err(Error::domain(format!(
            "target signature has {} parts, the partition {}",
            target.t(),
            a.t()
        )));
    }
    let d = block_densities(g, a);
    let mut result = g.clone();
    for (i, j) in pairs(a.t()) {
        let (remove, add) = flip_probabilities(d[i][j], target.get(i, j));
        if remove == 0.0 && add == 0.0 {
            continue;
        }
        for &u in a.part(i) {
            for &v in a.part(j) {
                let coin = counter_uniform(seed, &[i as u64, j as u64, u as u64, v as u64]);
                let edge = g.has_edge(u, v);
                if (edge && coin < remove) || (!edge && coin < add) {
                    result.toggle_edge(u, v);
                }
            }
        }
    }
    let realized = zero_signature(&result, a);
    let per_pair_dev = pairs(a.t())
        .map(|(i, j)| (realized.get(i, j) - target.get(i, j)).abs())
        .fold(0.0, f64::max);
    Ok(RoundingReport {
        edits: edit_count(g, &result)?,
        result,
        realized,
        per_pair_dev,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::*;
    use crate::graph::{canonical_equipartition, edit_distance};

    #[test]
    fn fixed_points() {
        let mut rng = crate::rng::seeded(1);
        let g = gnp(30, 0.4, &mut rng);
        let a = random_equipartition(30, 3, &mut rng);
        let r = randomized_round(&g, &a, &zero_signature(&g, &a), 9).unwrap();
        assert_eq!(r.result, g);
        assert_eq!(r.edits, 0);
        assert!(r.per_pair_dev < 1e-12);

        let r = randomized_round(&g, &a, &Signature::constant(3, 0.0).unwrap(), 9).unwrap();
        for (u, v) in r.result.edges() {
            assert_eq!(a.part_of(u), a.part_of(v));
        }
        let r = randomized_round(&g, &a, &Signature::constant(3, 1.0).unwrap(), 9).unwrap();
        for u in 0..30 {
            for v in u + 1..30 {
                if a.part_of(u) != a.part_of(v) {
                    assert!(r.result.has_edge(u, v));
                } else {
                    assert_eq!(r.result.has_edge(u, v), g.has_edge(u, v));
                }
            }
        }
    }

    #[test]
    fn flip_probabilities_are_unbiased() {
        for &(d, eta) in &[(0.0, 0.3), (1.0, 0.2), (0.5, 0.5), (0.25, 0.75), (0.8, 0.1), (0.0, 0.0), (1.0, 1.0)] {
            let (rm, add) = flip_probabilities(d, eta);
            assert!((0.0..=1.0).contains(&rm) && (0.0..=1.0).contains(&add));
            let expected = d * (1.0 - rm) + (1.0 - d) * add;
            assert!((expected - eta).abs() < 1e-12, "d={d} eta={eta}");
        }
    }

    #[test]
    fn edits_match_edit_distance_and_coins_are_reproducible() {
        let mut rng = crate::rng::seeded(2);
        let g = gnp(24, 0.5, &mut rng);
        let a = canonical_equipartition(24, 4).unwrap();
        let target = Signature::new(4, vec![0.1, 0.9, 0.5, 0.3, 0.7, 0.2]).unwrap();
        let r1 = randomized_round(&g, &a, &target, 77).unwrap();
        let r2 = randomized_round(&g, &a, &target, 77).unwrap();
        assert_eq!(r1.result, r2.result);
        assert_eq!(r1.edits as f64, 576.0 * edit_distance(&g, &r1.result).unwrap());
        assert!(randomized_round(&g, &a, &Signature::constant(3, 0.5).unwrap(), 1).is_err());
    }

    #[test]
    fn mean_density_tracks_target() {
        let mut rng = crate::rng::seeded(3);
        let g = gnp(60, 0.5, &mut rng);
        let a = canonical_equipartition(60, 3).unwrap();
        let target = Signature::new(3, vec![0.15, 0.6, 0.95]).unwrap();
        let runs = 40;
        let mut mean = [0.0; 3];
        for seed in 0..runs {
            let r = randomized_round(&g, &a, &target, seed).unwrap();
            for (k, m) in mean.iter_mut().enumerate() {
                *m += r.realized.eta()[k] / runs as f64;
            }
        }
        let cells = (400 * runs) as f64;
        for k in 0..3 {
            let eta = target.eta()[k];
            let sd = (eta * (1.0 - eta) / cells).sqrt().max(1e-3);
            assert!((mean[k] - eta).abs() <= 4.0 * sd, "pair {k}: {} vs {eta}", mean[k]);
        }
    }
}
