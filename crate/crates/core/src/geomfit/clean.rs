use std::num::NonZero;

use kiddo::{ImmutableKdTree, SquaredEuclidean};

#[cfg(feature = "parallel")]
use crate::par::*;
use crate::unproject::PointCloud;

#[derive(Debug, Clone, PartialEq)]
pub struct CleanResult {
    pub cloud: PointCloud,
    /// Indices (into the input) of the retained points.
    pub kept: Vec<usize>,
    /// Set when every point scored as an outlier and the input was returned as is.
    pub all_removed_warning: bool,
}

/// Mean distance from each point to its `k` nearest neighbours, self excluded.
fn knn_scores(points: &[[f64; 3]], k: usize) -> Vec<f64> {
    let tree: ImmutableKdTree<f64, 3> = ImmutableKdTree::new_from_slice(points);
    let want = NonZero::new(k + 1).unwrap();
    maybe_par_iter!(points)
        .enumerate()
        .map(|(i, p)| {
            let mut nn = tree.nearest_n::<SquaredEuclidean>(p, want);
            match nn.iter().position(|n| n.item as usize == i) {
                Some(pos) => {
                    nn.remove(pos);
                }
                None => nn.truncate(k),
            }
            nn.iter().map(|n| n.distance.sqrt()).sum::<f64>() / k as f64
        })
        .collect()
}

/// Statistical outlier removal: drops points whose mean k-NN distance exceeds
/// `mean + sigma_mult · stddev` over the cloud. `k` is clamped to `n − 1`.
pub fn clean_pointcloud(pc: &PointCloud, k: usize, sigma_mult: f64) -> CleanResult {
    let n = pc.len();
    let k = k.max(1).min(n.saturating_sub(1));
    if k == 0 {
        return CleanResult {
            cloud: pc.clone(),
            kept: (0..n).collect(),
            all_removed_warning: false,
        };
    }
    let coords: Vec<[f64; 3]> = pc.points.iter().map(|p| [p.x, p.y, p.z]).collect();
    let scores = knn_scores(&coords, k);
    let mean = scores.iter().sum::<f64>() / n as f64;
    let var = scores.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n as f64;
    // The relative slack keeps identical scores from splitting on rounding.
    let limit = mean + sigma_mult * var.sqrt() + 1e-12 * mean;
    let kept: Vec<usize> = (0..n).filter(|&i| scores[i] <= limit).collect();
    if kept.is_empty() {
        return CleanResult {
            cloud: pc.clone(),
            kept: (0..n).collect(),
            all_removed_warning: true,
        };
    }
    CleanResult {
        cloud: pc.select(&kept),
        kept,
        all_removed_warning: false,
    }
}
