//! Injectivity of `p ↦ r_p` at data level.

use rayon::prelude::*;

use crate::data::{TravelTimeDataset, TruthSidecar};
use crate::manifold::Point;

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingStats {
    pub rows: usize,
    /// Smallest `‖r_p − r_q‖_∞` over distinct complete rows.
    pub min_gap: f64,
    pub min_pair: Option<(usize, usize)>,
    /// Pairs with gap at or below the duplicate tolerance.
    pub duplicates: Vec<(usize, usize, f64)>,
}

impl EmbeddingStats {
    pub fn injective(&self) -> bool {
        self.duplicates.is_empty() && self.min_gap > 0.0
    }
}

/// Blind check: needs only the dataset. Incomplete rows are skipped.
pub fn embedding_check(ds: &TravelTimeDataset, duplicate_tol: f64) -> EmbeddingStats {
    let rows: Vec<usize> = (0..ds.n).filter(|&i| ds.row_is_complete(i)).collect();
    let per_row: Vec<(f64, Option<(usize, usize)>, Vec<(usize, usize, f64)>)> = rows
        .par_iter()
        .enumerate()
        .map(|(a, &i)| {
            let mut best = (f64::INFINITY, None);
            let mut dups = Vec::new();
            for &k in &rows[a + 1..] {
                let g = ds.sup_gap(i, k);
                if g < best.0 {
                    best = (g, Some((i, k)));
                }
                if g <= duplicate_tol {
                    dups.push((i, k, g));
                }
            }
            (best.0, best.1, dups)
        })
        .collect();
    let mut out = EmbeddingStats { rows: rows.len(), min_gap: f64::INFINITY, min_pair: None, duplicates: Vec::new() };
    for (g, pair, dups) in per_row {
        if g < out.min_gap {
            out.min_gap = g;
            out.min_pair = pair;
        }
        out.duplicates.extend(dups);
    }
    out
}

/// Truth-side check of `‖r_p − r_q‖_∞ ≤ d(p, q) + tol`, which holds by the
/// triangle inequality for any true distance function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleCheck {
    pub pairs: usize,
    /// Pairs where the distance oracle failed.
    pub skipped: usize,
    pub violations: usize,
    /// Largest `gap − d(p, q)`.
    pub worst_excess: f64,
}

/// `pairs = None` checks every pair; otherwise the given list.
pub fn embedding_truth_check<F>(
    ds: &TravelTimeDataset,
    truth: &TruthSidecar,
    distance: F,
    pairs: Option<&[(usize, usize)]>,
    tol: f64,
) -> TriangleCheck
where
    F: Fn(&Point, &Point) -> Option<f64> + Sync,
{
    let all: Vec<(usize, usize)>;
    let pairs = match pairs {
        Some(p) => p,
        None => {
            all = (0..ds.n).flat_map(|a| (a + 1..ds.n).map(move |b| (a, b))).collect();
            &all
        }
    };
    pairs
        .par_iter()
        .map(|&(a, b)| {
            let gap = ds.sup_gap(a, b);
            match distance(&truth.sources[a].point, &truth.sources[b].point) {
                Some(d) if gap.is_finite() => {
                    let excess = gap - d;
                    TriangleCheck { pairs: 1, skipped: 0, violations: (excess > tol) as usize, worst_excess: excess }
                }
                _ => TriangleCheck { pairs: 1, skipped: 1, violations: 0, worst_excess: f64::NEG_INFINITY },
            }
        })
        .reduce(
            || TriangleCheck { pairs: 0, skipped: 0, violations: 0, worst_excess: f64::NEG_INFINITY },
            |x, y| TriangleCheck {
                pairs: x.pairs + y.pairs,
                skipped: x.skipped + y.skipped,
                violations: x.violations + y.violations,
                worst_excess: x.worst_excess.max(y.worst_excess),
            },
        )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicated_row_is_flagged() {
        let u = vec![0.0, 0.5, 1.0];
        let times = vec![0.3, 0.4, 0.5, 0.9, 0.1, 0.2, 0.3, 0.4, 0.5];
        let ds = TravelTimeDataset::new(u, times).unwrap();
        let s = embedding_check(&ds, 0.0);
        assert_eq!(s.min_gap, 0.0);
        assert_eq!(s.min_pair, Some((0, 2)));
        assert_eq!(s.duplicates, vec![(0, 2, 0.0)]);
        assert!(!s.injective());
    }
}
