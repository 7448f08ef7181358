//! Small seeded k-means (plus-plus initialization, multiple restarts) and
//! cluster purity, used to score the clustering demonstration.

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn lloyd(points: &[Vec<f64>], mut centers: Vec<Vec<f64>>) -> (Vec<usize>, f64) {
    let k = centers.len();
    let mut assign = vec![0usize; points.len()];
    for _ in 0..100 {
        let mut changed = false;
        for (i, p) in points.iter().enumerate() {
            let best = (0..k)
                .min_by(|&a, &b| {
                    dist_sq(p, &centers[a])
                        .partial_cmp(&dist_sq(p, &centers[b]))
                        .unwrap()
                })
                .unwrap();
            if assign[i] != best {
                assign[i] = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let dim = points[0].len();
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &a) in points.iter().zip(&assign) {
            counts[a] += 1;
            for (s, v) in sums[a].iter_mut().zip(p) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] == 0 {
                // re-seed an empty cluster at the point farthest from its center
                let far = points
                    .iter()
                    .enumerate()
                    .max_by(|(_, a), (_, b)| {
                        dist_sq(a, &centers[assign[0]])
                            .partial_cmp(&dist_sq(b, &centers[assign[0]]))
                            .unwrap()
                    })
                    .unwrap()
                    .0;
                centers[c] = points[far].clone();
            } else {
                for (cv, s) in centers[c].iter_mut().zip(&sums[c]) {
                    *cv = s / counts[c] as f64;
                }
            }
        }
    }
    let inertia = points
        .iter()
        .zip(&assign)
        .map(|(p, &a)| dist_sq(p, &centers[a]))
        .sum();
    (assign, inertia)
}

/// Seeded k-means with plus-plus initialization; the best of `restarts`
/// runs by within-cluster sum of squares wins.
pub fn kmeans(points: &[Vec<f64>], k: usize, seed: u64, restarts: usize) -> Vec<usize> {
    assert!(k >= 1 && points.len() >= k && restarts >= 1);
    let mut best: Option<(Vec<usize>, f64)> = None;
    for r in 0..restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(r as u64));
        let mut centers = vec![points[rng.gen_range(0..points.len())].clone()];
        while centers.len() < k {
            let weights: Vec<f64> = points
                .iter()
                .map(|p| {
                    centers
                        .iter()
                        .map(|c| dist_sq(p, c))
                        .fold(f64::INFINITY, f64::min)
                })
                .collect();
            let next = if weights.iter().sum::<f64>() > 0.0 {
                WeightedIndex::new(&weights).unwrap().sample(&mut rng)
            } else {
                rng.gen_range(0..points.len())
            };
            centers.push(points[next].clone());
        }
        let (assign, inertia) = lloyd(points, centers);
        if best.as_ref().map_or(true, |(_, bi)| inertia < *bi) {
            best = Some((assign, inertia));
        }
    }
    best.unwrap().0
}

/// Fraction of points whose cluster's majority true label matches theirs:
/// (1/n) Σ over clusters of the largest true-label count inside.
pub fn purity(assignments: &[usize], labels: &[usize]) -> f64 {
    assert_eq!(assignments.len(), labels.len());
    assert!(!labels.is_empty());
    let k = assignments.iter().max().unwrap() + 1;
    let g = labels.iter().max().unwrap() + 1;
    let mut counts = vec![vec![0usize; g]; k];
    for (&a, &l) in assignments.iter().zip(labels) {
        counts[a][l] += 1;
    }
    let hits: usize = counts
        .iter()
        .map(|row| row.iter().max().copied().unwrap_or(0))
        .sum();
    hits as f64 / labels.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn blobs(centers: &[(f64, f64)], per: usize, spread: f64, seed: u64) -> (Vec<Vec<f64>>, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pts = Vec::new();
        let mut labels = Vec::new();
        for (li, &(cx, cy)) in centers.iter().enumerate() {
            for _ in 0..per {
                pts.push(vec![
                    cx + spread * rng.gen_range(-1.0..1.0),
                    cy + spread * rng.gen_range(-1.0..1.0),
                ]);
                labels.push(li);
            }
        }
        (pts, labels)
    }

    #[test]
    fn separates_well_spaced_blobs() {
        let (pts, labels) = blobs(&[(0., 0.), (10., 0.), (0., 10.), (10., 10.)], 20, 0.5, 1);
        let assign = kmeans(&pts, 4, 7, 10);
        assert_eq!(purity(&assign, &labels), 1.0);
    }

    #[test]
    fn two_blobs_split_four_ways_caps_purity() {
        // four true groups but only two spatial blobs: purity ~ 0.5
        let (pts, _) = blobs(&[(0., 0.), (10., 0.)], 40, 0.5, 2);
        let labels: Vec<usize> = (0..80).map(|i| (i / 20) % 4).collect();
        // groups 0,1 live in blob one; 2,3 in blob two
        let assign = kmeans(&pts, 4, 7, 10);
        let p = purity(&assign, &labels);
        assert!(p <= 0.8, "purity {}", p);
    }

    #[test]
    fn deterministic_given_seed() {
        let (pts, _) = blobs(&[(0., 0.), (5., 5.), (9., 0.)], 15, 1.0, 3);
        assert_eq!(kmeans(&pts, 3, 11, 5), kmeans(&pts, 3, 11, 5));
    }

    #[test]
    fn purity_counts_majorities() {
        let assign = vec![0, 0, 0, 1, 1, 1];
        let labels = vec![0, 0, 1, 1, 1, 1];
        // cluster 0 majority label 0 (2), cluster 1 majority label 1 (3)
        assert!((purity(&assign, &labels) - 5.0 / 6.0).abs() < 1e-12);
    }
}
