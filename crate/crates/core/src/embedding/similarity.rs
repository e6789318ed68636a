use std::cmp::Ordering;
use std::collections::BTreeSet;

use super::{EmbeddingModel, SimilarityResult};
use crate::error::{Error, Result};

pub(crate) fn norm<T: Copy + Into<f64>>(v: &[T]) -> f64 {
    v.iter()
        .map(|&x| {
            let x: f64 = x.into();
            x * x
        })
        .sum::<f64>()
        .sqrt()
}

fn dot<A: Copy + Into<f64>, B: Copy + Into<f64>>(a: &[A], b: &[B]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| x.into() * y.into()).sum()
}

/// `u·v / (|u||v|)`, accumulated in f64. Errors on mismatched dimensions or a zero vector.
pub fn cosine_similarity<T: Copy + Into<f64>>(u: &[T], v: &[T]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::validation(format!(
            "cosine of vectors with dimensions {} and {}",
            u.len(),
            v.len()
        )));
    }
    let (nu, nv) = (norm(u), norm(v));
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::validation(
            "cosine of a zero-norm vector is undefined",
        ));
    }
    Ok(dot(u, v) / (nu * nv))
}

/// Descending score, then ascending term.
fn rank_order(a: &SimilarityResult, b: &SimilarityResult) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then_with(|| a.term.cmp(&b.term))
}

/// The `k` vocabulary terms closest (by cosine) to the mean vector of the in-vocabulary
/// query terms. Query terms and `exclude` never appear in the result; terms whose vector
/// has zero norm are not rankable and are skipped.
pub fn most_similar<S: AsRef<str>>(
    model: &EmbeddingModel,
    query_terms: &[S],
    k: usize,
    exclude: &BTreeSet<String>,
) -> Result<Vec<SimilarityResult>> {
    if k == 0 {
        return Err(Error::validation("k must be at least 1"));
    }
    if query_terms.is_empty() {
        return Err(Error::validation("query must contain at least one term"));
    }
    let vocab = model.vocabulary();
    let mut query_ids = Vec::new();
    let mut misses = Vec::new();
    for t in query_terms {
        match vocab.id(t.as_ref()) {
            Some(id) => query_ids.push(id),
            None => misses.push(t.as_ref().to_owned()),
        }
    }
    if query_ids.is_empty() {
        return Err(Error::OutOfVocabulary { terms: misses });
    }

    let dim = model.dimension();
    let mut query = vec![0.0f64; dim];
    for &id in &query_ids {
        for (q, &v) in query.iter_mut().zip(model.vector_by_id(id)) {
            *q += f64::from(v);
        }
    }
    let count = query_ids.len() as f64;
    query.iter_mut().for_each(|q| *q /= count);
    let query_norm = norm(&query);
    if query_norm == 0.0 {
        return Err(Error::validation("query vector has zero norm"));
    }

    let mut scored: Vec<SimilarityResult> = (0..vocab.len())
        .filter(|id| !query_ids.contains(id))
        .filter(|&id| model.norm_by_id(id) > 0.0)
        .filter(|&id| !exclude.contains(vocab.term(id)))
        .map(|id| SimilarityResult {
            term: vocab.term(id).to_owned(),
            score: dot(&query, model.vector_by_id(id)) / (query_norm * model.norm_by_id(id)),
        })
        .collect();

    if scored.len() > k {
        scored.select_nth_unstable_by(k - 1, rank_order);
        scored.truncate(k);
    }
    scored.sort_by(rank_order);
    Ok(scored)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::{TrainingConfig, Vocabulary};
    use proptest::prelude::*;

    fn model(rows: &[(&str, &[f32])]) -> EmbeddingModel {
        let dim = rows[0].1.len();
        let vocab =
            Vocabulary::from_entries(rows.iter().map(|(t, _)| (t.to_string(), 1)).collect(), 1)
                .unwrap();
        let vectors = rows.iter().flat_map(|(_, v)| v.iter().copied()).collect();
        EmbeddingModel::new(
            vocab,
            vectors,
            TrainingConfig {
                dimension: dim,
                ..Default::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn cosine_examples() {
        assert!(
            (cosine_similarity(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap() - 1.0).abs() < 1e-12
        );
        assert_eq!(cosine_similarity(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        let c = cosine_similarity(&[1.0, 1.0], &[1.0, 0.0]).unwrap();
        assert!((c - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-6);
    }

    #[test]
    fn cosine_errors() {
        assert!(cosine_similarity(&[0.0, 0.0], &[1.0, 0.0]).is_err());
        assert!(cosine_similarity(&[1.0], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn duplicate_vector_is_top() {
        let m = model(&[("a", &[1.0, 2.0]), ("b", &[1.0, 2.0]), ("c", &[-2.0, 1.0])]);
        let r = most_similar(&m, &["a"], 1, &BTreeSet::new()).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].term, "b");
        assert!((r[0].score - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ties_break_lexicographically_and_exclusions_hold() {
        let m = model(&[
            ("q", &[1.0, 0.0]),
            ("zeta", &[0.0, 1.0]),
            ("alpha", &[0.0, 1.0]),
            ("mid", &[1.0, 1.0]),
        ]);
        let r = most_similar(&m, &["q"], 10, &BTreeSet::new()).unwrap();
        let terms: Vec<_> = r.iter().map(|s| s.term.as_str()).collect();
        assert_eq!(terms, ["mid", "alpha", "zeta"]);
        let excl = BTreeSet::from(["mid".to_string()]);
        let r = most_similar(&m, &["q"], 1, &excl).unwrap();
        assert_eq!(r[0].term, "alpha");
    }

    #[test]
    fn multi_term_query_uses_mean_and_ignores_partial_misses() {
        let m = model(&[
            ("x", &[1.0, 0.0]),
            ("y", &[0.0, 1.0]),
            ("diag", &[1.0, 1.0]),
            ("neg", &[-1.0, -1.0]),
        ]);
        let r = most_similar(&m, &["x", "y", "missing"], 1, &BTreeSet::new()).unwrap();
        assert_eq!(r[0].term, "diag");
        assert!((r[0].score - 1.0).abs() < 1e-12);
    }

    #[test]
    fn oov_and_k_errors() {
        let m = model(&[("a", &[1.0]), ("b", &[2.0])]);
        match most_similar(&m, &["nope", "never"], 3, &BTreeSet::new()).unwrap_err() {
            Error::OutOfVocabulary { terms } => assert_eq!(terms, ["nope", "never"]),
            e => panic!("{e}"),
        }
        assert_eq!(
            most_similar(&m, &["a"], 0, &BTreeSet::new())
                .unwrap_err()
                .code(),
            "VALIDATION"
        );
    }

    #[test]
    fn fewer_candidates_than_k() {
        let m = model(&[("a", &[1.0]), ("b", &[2.0])]);
        assert_eq!(
            most_similar(&m, &["a"], 20, &BTreeSet::new())
                .unwrap()
                .len(),
            1
        );
    }

    proptest! {
        #[test]
        fn cosine_scale_invariant(
            u in prop::collection::vec(-100.0f32..100.0, 1..64),
            c in 1e-3f32..1e3,
        ) {
            prop_assume!(u.iter().any(|&x| x != 0.0));
            let scaled: Vec<f32> = u.iter().map(|x| x * c).collect();
            prop_assume!(scaled.iter().any(|&x| x != 0.0));
            let s = cosine_similarity(&u, &scaled).unwrap();
            prop_assert!((s - 1.0).abs() <= 1e-9, "{}", s);
        }

        #[test]
        fn cosine_bounded(
            pair in (1usize..32).prop_flat_map(|d| (
                prop::collection::vec(-10.0f64..10.0, d),
                prop::collection::vec(-10.0f64..10.0, d),
            ))
        ) {
            let (u, v) = pair;
            if let Ok(s) = cosine_similarity(&u, &v) {
                prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&s));
            }
        }
    }
}
