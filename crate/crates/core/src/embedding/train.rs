use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{build_vocabulary, EmbeddingModel, TrainingConfig, Vocabulary};
use crate::corpus::Corpus;
use crate::error::{Error, Result};

/// Final learning rate as a fraction of the initial one.
const LR_FLOOR: f64 = 1e-4;
/// Exponent applied to unigram counts for the noise distribution.
const NOISE_POWER: f64 = 0.75;

/// Cumulative unigram^0.75 distribution, sampled by binary search.
struct NoiseTable {
    cumulative: Vec<f64>,
}

impl NoiseTable {
    fn new(vocab: &Vocabulary) -> Self {
        let mut acc = 0.0;
        let cumulative = vocab
            .counts()
            .iter()
            .map(|&c| {
                acc += (c.max(1) as f64).powf(NOISE_POWER);
                acc
            })
            .collect();
        NoiseTable { cumulative }
    }

    fn sample(&self, rng: &mut impl Rng) -> usize {
        let total = *self.cumulative.last().expect("non-empty vocabulary");
        let u = rng.random::<f64>() * total;
        self.cumulative
            .partition_point(|&c| c <= u)
            .min(self.cumulative.len() - 1)
    }
}

fn sigmoid(x: f32) -> f32 {
    1.0 / (1.0 + (-x).exp())
}

fn dot(a: &[f32], b: &[f32]) -> f32 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Trains CBOW embeddings with negative sampling.
///
/// Each document is one training stream; tokens outside the vocabulary are dropped before
/// windows are taken, so the context of a position is up to `window` vocabulary tokens on
/// each side. The context vectors are averaged, the center word is scored against
/// `negative_samples` noise words, and the gradient is added to every context vector.
/// The learning rate falls linearly from `initial_learning_rate` to
/// `initial_learning_rate * 1e-4` over all epochs.
///
/// Training is single-threaded and visits documents in doc_id order, so a fixed
/// (corpus, config) pair always produces the same bits on a given build.
pub fn train_cbow(corpus: &Corpus, config: &TrainingConfig) -> Result<EmbeddingModel> {
    config.validate()?;
    let vocab = build_vocabulary(corpus, config.min_count)?;
    let n = vocab.len();
    let dim = config.dimension;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut input: Vec<f32> = (0..n * dim)
        .map(|_| (rng.random::<f32>() - 0.5) / dim as f32)
        .collect();
    let mut output = vec![0.0f32; n * dim];
    let noise = NoiseTable::new(&vocab);

    let streams: Vec<Vec<usize>> = corpus
        .documents()
        .map(|doc| doc.tokens.iter().filter_map(|t| vocab.id(t)).collect())
        .collect();
    let words_per_epoch: u64 = streams.iter().map(|s| s.len() as u64).sum();
    let total_words = (words_per_epoch * config.epochs as u64).max(1) as f64;
    let total_count: u64 = vocab.counts().iter().sum();
    let keep_prob: Option<Vec<f64>> = (config.subsample > 0.0).then(|| {
        let threshold = config.subsample * total_count as f64;
        vocab
            .counts()
            .iter()
            .map(|&c| {
                let c = c as f64;
                ((c / threshold).sqrt() + 1.0) * threshold / c
            })
            .collect()
    });

    let lr0 = config.initial_learning_rate;
    let mut processed: u64 = 0;
    let mut hidden = vec![0.0f32; dim];
    let mut grad = vec![0.0f32; dim];
    let mut sentence: Vec<usize> = Vec::new();

    for epoch in 0..config.epochs {
        for stream in &streams {
            sentence.clear();
            match &keep_prob {
                Some(keep) => {
                    for &w in stream {
                        if keep[w] >= 1.0 || rng.random::<f64>() < keep[w] {
                            sentence.push(w);
                        }
                    }
                }
                None => sentence.extend_from_slice(stream),
            }
            // Learning-rate progress counts every stream token, kept or not.
            let skipped = (stream.len() - sentence.len()) as u64;

            for pos in 0..sentence.len() {
                let progress = processed as f64 / total_words;
                let lr = (lr0 * (1.0 - (1.0 - LR_FLOOR) * progress)) as f32;
                processed += 1;

                let lo = pos.saturating_sub(config.window);
                let hi = (pos + config.window + 1).min(sentence.len());
                let context_len = hi - lo - 1;
                if context_len == 0 {
                    continue;
                }
                hidden.fill(0.0);
                for (cpos, &c) in sentence[lo..hi].iter().enumerate() {
                    if lo + cpos == pos {
                        continue;
                    }
                    let row = &input[c * dim..(c + 1) * dim];
                    hidden.iter_mut().zip(row).for_each(|(h, v)| *h += v);
                }
                let inv = 1.0 / context_len as f32;
                hidden.iter_mut().for_each(|h| *h *= inv);

                grad.fill(0.0);
                let center = sentence[pos];
                for sample in 0..=config.negative_samples {
                    let (target, label) = if sample == 0 {
                        (center, 1.0f32)
                    } else {
                        let t = noise.sample(&mut rng);
                        if t == center {
                            continue;
                        }
                        (t, 0.0)
                    };
                    let out = &mut output[target * dim..(target + 1) * dim];
                    let g = (label - sigmoid(dot(&hidden, out))) * lr;
                    for ((gr, o), h) in grad.iter_mut().zip(out.iter_mut()).zip(&hidden) {
                        *gr += g * *o;
                        *o += g * h;
                    }
                }
                for (cpos, &c) in sentence[lo..hi].iter().enumerate() {
                    if lo + cpos == pos {
                        continue;
                    }
                    let row = &mut input[c * dim..(c + 1) * dim];
                    row.iter_mut().zip(&grad).for_each(|(v, g)| *v += g);
                }
            }
            processed += skipped;
        }
        if input.iter().any(|v| !v.is_finite()) {
            return Err(Error::Diverged { epoch: epoch + 1 });
        }
    }

    EmbeddingModel::new(vocab, input, config.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Document, DocumentMeta};

    fn single_doc(text: &str) -> Corpus {
        Corpus::from_documents([Document::new(
            DocumentMeta {
                doc_id: "d".into(),
                title: String::new(),
                author: String::new(),
                year: None,
                category: String::new(),
            },
            text,
        )])
        .unwrap()
    }

    #[test]
    fn noise_table_follows_three_quarter_power() {
        let vocab = Vocabulary::from_entries(vec![("a".into(), 16), ("b".into(), 1)], 1).unwrap();
        let table = NoiseTable::new(&vocab);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let draws = 80_000;
        let a = (0..draws).filter(|_| table.sample(&mut rng) == 0).count();
        // 16^0.75 = 8, so P(a) = 8/9.
        let p = a as f64 / draws as f64;
        assert!((p - 8.0 / 9.0).abs() < 0.01, "{p}");
    }

    #[test]
    fn invalid_config_rejected() {
        let corpus = single_doc("a b c");
        let cfg = TrainingConfig {
            dimension: 0,
            min_count: 1,
            ..Default::default()
        };
        assert_eq!(train_cbow(&corpus, &cfg).unwrap_err().code(), "VALIDATION");
        let cfg = TrainingConfig {
            min_count: 50,
            ..Default::default()
        };
        assert!(matches!(
            train_cbow(&corpus, &cfg),
            Err(Error::EmptyVocabulary { .. })
        ));
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let corpus = single_doc(&"the cat sat on the mat with the dog ".repeat(20));
        let cfg = TrainingConfig {
            dimension: 16,
            min_count: 1,
            epochs: 1,
            seed: 11,
            ..Default::default()
        };
        let a = train_cbow(&corpus, &cfg).unwrap();
        let b = train_cbow(&corpus, &cfg).unwrap();
        assert_eq!(a, b);
        let c = train_cbow(&corpus, &TrainingConfig { seed: 12, ..cfg }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn subsampling_runs_and_stays_finite() {
        let corpus = single_doc(&"the the the the cat the dog the ".repeat(50));
        let cfg = TrainingConfig {
            dimension: 8,
            min_count: 1,
            subsample: 1e-3,
            ..Default::default()
        };
        let m = train_cbow(&corpus, &cfg).unwrap();
        assert_eq!(m.len(), 3);
    }
}
