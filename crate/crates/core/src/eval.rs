//! Word-similarity evaluation: score word pairs, correlate with human
//! ratings, report coverage.

use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::complex::{cosine, fidelity_normalizing, ComplexSlice};
use crate::embedding::{EmbeddingMode, EmbeddingTable};
use crate::error::{Error, Result};
use crate::pqc::WordCircuitTable;
use crate::stats::spearman;
use crate::vocab::Vocabulary;

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredPair {
    pub a: String,
    pub b: String,
    pub human: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityDataset {
    pub name: String,
    pairs: Vec<ScoredPair>,
}

impl SimilarityDataset {
    /// Rejects non-finite scores and repeated ordered pairs.
    pub fn new(name: impl Into<String>, pairs: Vec<ScoredPair>) -> Result<Self> {
        let mut seen = alloc::collections::BTreeSet::new();
        for p in &pairs {
            if !p.human.is_finite() {
                return Err(Error::NonFinite);
            }
            if !seen.insert((p.a.as_str(), p.b.as_str())) {
                return Err(Error::InvalidConfig("duplicate word pair in dataset"));
            }
        }
        Ok(SimilarityDataset {
            name: name.into(),
            pairs,
        })
    }

    pub fn pairs(&self) -> &[ScoredPair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Anything that can score a word pair; `Ok(None)` marks a missing word.
pub trait PairScorer {
    fn score(&self, a: &str, b: &str) -> Result<Option<f64>>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairScore {
    /// Index of the pair in the dataset.
    pub index: usize,
    pub system: f64,
    pub human: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub dataset: String,
    pub spearman: f64,
    pub covered: usize,
    pub total: usize,
    pub scores: Vec<PairScore>,
}

impl EvalReport {
    pub fn coverage(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.covered as f64 / self.total as f64
        }
    }
}

/// Scores every in-vocabulary pair and correlates with the human ratings.
/// Pairs with a missing word are left out entirely.
pub fn evaluate<M: PairScorer + ?Sized>(
    model: &M,
    dataset: &SimilarityDataset,
) -> Result<EvalReport> {
    let mut scores = Vec::with_capacity(dataset.len());
    for (index, p) in dataset.pairs().iter().enumerate() {
        if let Some(system) = model.score(&p.a, &p.b)? {
            scores.push(PairScore {
                index,
                system,
                human: p.human,
            });
        }
    }
    if scores.len() < 2 {
        return Err(Error::TooFewPairs {
            covered: scores.len(),
            total: dataset.len(),
        });
    }
    let sys: Vec<f64> = scores.iter().map(|s| s.system).collect();
    let hum: Vec<f64> = scores.iter().map(|s| s.human).collect();
    Ok(EvalReport {
        dataset: dataset.name.clone(),
        spearman: spearman(&sys, &hum)?,
        covered: scores.len(),
        total: dataset.len(),
        scores,
    })
}

/// Cosine (real mode) or fidelity (complex mode) between embedding rows.
pub struct EmbeddingScorer<'a> {
    vocab: &'a Vocabulary,
    focal: &'a EmbeddingTable,
    context: Option<&'a EmbeddingTable>,
}

impl<'a> EmbeddingScorer<'a> {
    pub fn new(vocab: &'a Vocabulary, focal: &'a EmbeddingTable) -> Result<Self> {
        if vocab.len() != focal.rows() {
            return Err(Error::DimensionMismatch(vocab.len(), focal.rows()));
        }
        Ok(EmbeddingScorer {
            vocab,
            focal,
            context: None,
        })
    }

    /// Scores `focal + context` sums instead of focal rows alone.
    pub fn with_context(mut self, context: &'a EmbeddingTable) -> Result<Self> {
        if context.rows() != self.focal.rows() {
            return Err(Error::DimensionMismatch(context.rows(), self.focal.rows()));
        }
        if context.dim() != self.focal.dim() {
            return Err(Error::DimensionMismatch(context.dim(), self.focal.dim()));
        }
        self.context = Some(context);
        Ok(self)
    }

    fn row(&self, id: u32) -> (Vec<f64>, Vec<f64>) {
        let mut v = self.focal.vector(id as usize);
        if let Some(c) = self.context {
            let w = c.vector(id as usize);
            for j in 0..v.dim() {
                v.re[j] += w.re[j];
                v.im[j] += w.im[j];
            }
        }
        (v.re, v.im)
    }
}

impl PairScorer for EmbeddingScorer<'_> {
    fn score(&self, a: &str, b: &str) -> Result<Option<f64>> {
        let (Some(ia), Some(ib)) = (self.vocab.id(a), self.vocab.id(b)) else {
            return Ok(None);
        };
        let (ar, ai) = self.row(ia);
        let (br, bi) = self.row(ib);
        let s = match self.focal.mode() {
            EmbeddingMode::Real => cosine(&ar, &br)?,
            EmbeddingMode::Complex => {
                fidelity_normalizing(ComplexSlice::new(&ar, &ai), ComplexSlice::new(&br, &bi))?
            }
        };
        Ok(Some(s))
    }
}

/// Fidelity between prepared word states.
pub struct CircuitScorer<'a> {
    vocab: &'a Vocabulary,
    states: Vec<Vec<Complex64>>,
}

impl<'a> CircuitScorer<'a> {
    pub fn new(vocab: &'a Vocabulary, table: &WordCircuitTable) -> Result<Self> {
        if vocab.len() != table.rows() {
            return Err(Error::DimensionMismatch(vocab.len(), table.rows()));
        }
        Ok(CircuitScorer {
            vocab,
            states: table.prepare_all()?,
        })
    }

    pub fn from_states(vocab: &'a Vocabulary, states: Vec<Vec<Complex64>>) -> Result<Self> {
        if vocab.len() != states.len() {
            return Err(Error::DimensionMismatch(vocab.len(), states.len()));
        }
        Ok(CircuitScorer { vocab, states })
    }
}

impl PairScorer for CircuitScorer<'_> {
    fn score(&self, a: &str, b: &str) -> Result<Option<f64>> {
        let (Some(ia), Some(ib)) = (self.vocab.id(a), self.vocab.id(b)) else {
            return Ok(None);
        };
        let (sa, sb) = (&self.states[ia as usize], &self.states[ib as usize]);
        let z: Complex64 = sa.iter().zip(sb).map(|(x, y)| x.conj() * y).sum();
        Ok(Some(z.norm_sqr()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pqc::Ansatz;
    use crate::vocab::build_vocabulary;
    use alloc::vec;

    fn pair(a: &str, b: &str, h: f64) -> ScoredPair {
        ScoredPair {
            a: a.into(),
            b: b.into(),
            human: h,
        }
    }

    #[test]
    fn self_scores() {
        let vocab = build_vocabulary("a b".split_whitespace(), 1).unwrap();
        let real = EmbeddingTable::from_parts(
            2,
            EmbeddingMode::Real,
            vec![0.3, 0.4, 1.0, -2.0],
            vec![0.0; 4],
        )
        .unwrap();
        let s = EmbeddingScorer::new(&vocab, &real).unwrap();
        assert!((s.score("a", "a").unwrap().unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(s.score("a", "zzz").unwrap(), None);

        let a = Ansatz::catalog("A14", 2, 1).unwrap();
        let table = WordCircuitTable::new(a.clone(), vec![0.3; 2 * a.param_count()]).unwrap();
        let c = CircuitScorer::new(&vocab, &table).unwrap();
        assert!((c.score("b", "b").unwrap().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn complex_two_word_model() {
        let vocab = build_vocabulary("a b".split_whitespace(), 1).unwrap();
        let h = core::f64::consts::FRAC_1_SQRT_2 as f32;
        let t = EmbeddingTable::from_parts(
            2,
            EmbeddingMode::Complex,
            vec![1.0, 0.0, h, h],
            vec![0.0; 4],
        )
        .unwrap();
        let s = EmbeddingScorer::new(&vocab, &t).unwrap();
        assert!((s.score("a", "b").unwrap().unwrap() - 0.5).abs() < 1e-7);
    }

    struct Table(Vec<(&'static str, &'static str, f64)>);

    impl PairScorer for Table {
        fn score(&self, a: &str, b: &str) -> Result<Option<f64>> {
            Ok(self
                .0
                .iter()
                .find(|(x, y, _)| *x == a && *y == b)
                .map(|t| t.2))
        }
    }

    #[test]
    fn skipped_pairs_are_not_correlated() {
        let ds = SimilarityDataset::new(
            "toy",
            vec![
                pair("a", "b", 1.0),
                pair("c", "d", 2.0),
                pair("e", "f", 3.0),
                pair("x", "y", 0.0),
            ],
        )
        .unwrap();
        let model = Table(vec![("a", "b", 0.1), ("c", "d", 0.2), ("e", "f", 0.3)]);
        let r = evaluate(&model, &ds).unwrap();
        assert_eq!((r.covered, r.total), (3, 4));
        assert!((r.spearman - 1.0).abs() < 1e-15);
        assert!(r.scores.iter().all(|s| s.index != 3));

        let sparse = Table(vec![("a", "b", 0.1)]);
        assert_eq!(
            evaluate(&sparse, &ds),
            Err(Error::TooFewPairs {
                covered: 1,
                total: 4
            })
        );
    }

    #[test]
    fn duplicates_rejected() {
        assert!(
            SimilarityDataset::new("d", vec![pair("a", "b", 1.0), pair("a", "b", 2.0)]).is_err()
        );
        assert!(
            SimilarityDataset::new("d", vec![pair("a", "b", 1.0), pair("b", "a", 2.0)]).is_ok()
        );
    }
}
