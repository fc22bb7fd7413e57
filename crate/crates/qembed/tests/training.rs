use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qembed::corpus::{build_vocabulary, CorpusOptions, CorpusSource};
use qembed::train::{train_sgns, SgnsConfig};
use qembed_core::loss::LossKind;

/// Sentences drawn from a few disjoint topics of 20 words each.
fn topical_corpus(tokens: usize, seed: u64) -> CorpusSource {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut text = String::new();
    let mut n = 0;
    while n < tokens {
        let topic = rng.gen_range(0..8);
        let len = rng.gen_range(8..20);
        let words: Vec<String> = (0..len)
            .map(|_| format!("t{topic}w{}", rng.gen_range(0..20)))
            .collect();
        text.push_str(&words.join(" "));
        text.push('\n');
        n += len;
    }
    CorpusSource::from_text(&text)
}

#[test]
fn loss_windows_do_not_increase_over_first_epoch() {
    let source = topical_corpus(200_000, 1);
    let vocab = build_vocabulary(&source, 1, CorpusOptions::default()).unwrap();
    for loss in [LossKind::RealSigmoid, LossKind::ComplexSigmoidNormalized] {
        let mut cfg = SgnsConfig {
            dim: 16,
            loss,
            lr: 1e-3,
            table_size: 100_000,
            ..SgnsConfig::default()
        };
        cfg.drive.epochs = 1;
        cfg.drive.threads = 1;
        cfg.drive.pairs.subsample = None;
        let (_, report) = train_sgns(&source, &vocab, &cfg).unwrap();
        let w = &report.window_losses;
        assert!(w.len() >= 50, "only {} windows", w.len());
        // running average at each window boundary
        let running: Vec<f64> = w
            .iter()
            .scan(0.0, |s, x| {
                *s += x;
                Some(*s)
            })
            .enumerate()
            .map(|(i, s)| s / (i + 1) as f64)
            .collect();
        for (i, pair) in running.windows(2).enumerate() {
            assert!(
                pair[1] <= pair[0],
                "{}: window {} rose from {} to {}",
                loss.name(),
                i + 1,
                pair[0],
                pair[1]
            );
        }
        assert!(running[running.len() - 1] < w[0]);
    }
}

#[test]
fn unnormalized_training_keeps_vector_norms() {
    let source = topical_corpus(20_000, 2);
    let vocab = build_vocabulary(&source, 1, CorpusOptions::default()).unwrap();
    let mut cfg = SgnsConfig {
        dim: 8,
        loss: LossKind::ComplexSigmoidUnnormalized,
        table_size: 100_000,
        ..SgnsConfig::default()
    };
    cfg.drive.epochs = 2;
    let (m, _) = train_sgns(&source, &vocab, &cfg).unwrap();
    let norms: Vec<f64> = (0..m.focal.rows())
        .map(|r| m.focal.vector(r).norm_sqr().sqrt())
        .collect();
    assert!(norms.iter().any(|n| (n - 1.0).abs() > 1e-3));
    assert!(norms.iter().all(|n| n.is_finite()));
}
