//! Filtered ranking over embedding vectors, MRR and Hits@K.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

pub fn cosine_similarity(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    dot / (na * nb)
}

/// Outcome of ranking one query against the candidate corpus.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RankResult {
    /// 1-based rank of the target among the filtered candidates.
    pub rank: Option<usize>,
    /// Leading candidate ids, for audit output.
    pub top: Vec<String>,
}

/// Rank candidates by descending cosine similarity to the query in the
/// filtered setting: all `filter_ids` except the target are removed
/// before ranking. Ties break by candidate id, so results are stable.
pub fn rank_candidates(
    query: &[f64],
    candidates: &[(String, Vec<f64>)],
    target_id: &str,
    filter_ids: &BTreeSet<String>,
) -> RankResult {
    let mut scored: Vec<(&String, f64)> = candidates
        .iter()
        .filter(|(id, _)| id == target_id || !filter_ids.contains(id))
        .map(|(id, v)| (id, cosine_similarity(query, v)))
        .collect();
    scored.sort_by(|(ida, sa), (idb, sb)| {
        sb.partial_cmp(sa)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| ida.cmp(idb))
    });
    let rank = scored
        .iter()
        .position(|(id, _)| id.as_str() == target_id)
        .map(|i| i + 1);
    RankResult {
        rank,
        top: scored
            .iter()
            .take(20)
            .map(|(id, _)| (*id).clone())
            .collect(),
    }
}

/// Aggregate retrieval quality.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RetrievalMetrics {
    pub queries: usize,
    pub mrr: f64,
    pub hits: BTreeMap<usize, f64>,
}

/// MRR is the mean of 1/rank (0 when the target is absent); Hits@k the
/// fraction of queries ranking the target within the top k.
pub fn mrr_hits(ranks: &[Option<usize>], ks: &[usize]) -> RetrievalMetrics {
    let n = ranks.len().max(1);
    let mrr = ranks
        .iter()
        .map(|r| r.map(|rank| 1.0 / rank as f64).unwrap_or(0.0))
        .sum::<f64>()
        / n as f64;
    let hits = ks
        .iter()
        .map(|&k| {
            let hit = ranks.iter().filter(|r| r.is_some_and(|rank| rank <= k)).count();
            (k, hit as f64 / n as f64)
        })
        .collect();
    RetrievalMetrics {
        queries: ranks.len(),
        mrr,
        hits,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cosine_basics() {
        assert!((cosine_similarity(&[1.0, 0.0], &[1.0, 0.0]) - 1.0).abs() < 1e-12);
        assert!(cosine_similarity(&[1.0, 0.0], &[0.0, 1.0]).abs() < 1e-12);
        assert_eq!(cosine_similarity(&[0.0, 0.0], &[1.0, 0.0]), 0.0);
    }

    fn candidates() -> Vec<(String, Vec<f64>)> {
        vec![
            ("a".to_string(), vec![1.0, 0.0]),
            ("b".to_string(), vec![0.9, 0.1]),
            ("c".to_string(), vec![0.0, 1.0]),
            ("d".to_string(), vec![-1.0, 0.0]),
        ]
    }

    #[test]
    fn query_equal_to_target_ranks_first() {
        let r = rank_candidates(&[1.0, 0.0], &candidates(), "a", &BTreeSet::new());
        assert_eq!(r.rank, Some(1));
    }

    #[test]
    fn filtering_removes_competitors_but_never_the_target() {
        let filter: BTreeSet<String> = ["a".to_string()].into_iter().collect();
        // b is the target; without filtering a would outrank it.
        let r = rank_candidates(&[1.0, 0.0], &candidates(), "b", &filter);
        assert_eq!(r.rank, Some(1));
        // Target also in the filter set: it must survive.
        let filter: BTreeSet<String> = ["b".to_string()].into_iter().collect();
        let r = rank_candidates(&[1.0, 0.0], &candidates(), "b", &filter);
        assert_eq!(r.rank, Some(2));
    }

    #[test]
    fn ties_break_by_id() {
        let cands = vec![
            ("z".to_string(), vec![0.0, 1.0]),
            ("y".to_string(), vec![0.0, 1.0]),
        ];
        let r = rank_candidates(&[0.0, 1.0], &cands, "z", &BTreeSet::new());
        assert_eq!(r.rank, Some(2)); // y sorts before z on equal similarity
    }

    #[test]
    fn mrr_and_hits_examples() {
        let m = mrr_hits(&[Some(1), Some(2), Some(4)], &[5, 10, 20]);
        assert!((m.mrr - (1.0 + 0.5 + 0.25) / 3.0).abs() < 1e-12);
        assert_eq!(m.hits[&5], 1.0);
        let m = mrr_hits(&[Some(6)], &[5, 10]);
        assert_eq!(m.hits[&5], 0.0);
        assert_eq!(m.hits[&10], 1.0);
        let m = mrr_hits(&[Some(1), Some(1)], &[5]);
        assert_eq!(m.mrr, 1.0);
        let m = mrr_hits(&[None, Some(1)], &[5]);
        assert_eq!(m.mrr, 0.5);
        assert_eq!(m.hits[&5], 0.5);
    }
}
