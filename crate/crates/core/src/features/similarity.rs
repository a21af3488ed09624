use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::events::AccountTimeline;

/// Most recent comments considered per account.
pub const MAX_COMMENTS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum SimilarityAlgorithm {
    Jaccard,
    Cosine,
    #[default]
    TfIdf,
}

impl FromStr for SimilarityAlgorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "jaccard" => Ok(Self::Jaccard),
            "cosine" => Ok(Self::Cosine),
            "tfidf" => Ok(Self::TfIdf),
            other => Err(Error::invalid(format!("unknown similarity algorithm {other:?}"))),
        }
    }
}

impl fmt::Display for SimilarityAlgorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Jaccard => "jaccard",
            Self::Cosine => "cosine",
            Self::TfIdf => "tfidf",
        })
    }
}

/// Lowercased alphanumeric runs.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// The account's comment texts, most recent first, at most [`MAX_COMMENTS`].
pub fn recent_comments(timeline: &AccountTimeline) -> Vec<&str> {
    timeline
        .events
        .iter()
        .rev()
        .filter_map(|e| e.comment_text.as_deref())
        .take(MAX_COMMENTS)
        .collect()
}

type Sparse = Vec<(usize, f64)>;

fn dot(a: &Sparse, b: &Sparse) -> f64 {
    let (mut i, mut j, mut acc) = (0, 0, 0.0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                acc += a[i].1 * b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    acc
}

/// Cosine of two sparse vectors. Two empty vectors count as identical.
fn cosine(a: &Sparse, na: f64, b: &Sparse, nb: f64) -> f64 {
    match (na == 0.0, nb == 0.0) {
        (true, true) => 1.0,
        (true, false) | (false, true) => 0.0,
        _ => (dot(a, b) / (na * nb)).clamp(0.0, 1.0),
    }
}

fn jaccard(a: &Sparse, b: &Sparse) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    let shared = {
        let (mut i, mut j, mut n) = (0, 0, 0usize);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    n += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        n
    };
    shared as f64 / (a.len() + b.len() - shared) as f64
}

/// Mean pairwise similarity over all unordered comment pairs.
///
/// TF-IDF weights are `count * (ln(N / df) + 1)` with document frequencies
/// taken over exactly these comments; the `+ 1` keeps terms shared by every
/// comment from vanishing, so identical comments still score 1.
/// Returns `None` for fewer than two comments.
pub fn comment_similarity<S: AsRef<str>>(
    comments: &[S],
    algorithm: SimilarityAlgorithm,
) -> Option<f64> {
    let n = comments.len();
    if n < 2 {
        return None;
    }
    let mut vocab: HashMap<String, usize> = HashMap::new();
    let docs: Vec<Sparse> = comments
        .iter()
        .map(|c| {
            let mut counts: HashMap<usize, f64> = HashMap::new();
            for tok in tokenize(c.as_ref()) {
                let next = vocab.len();
                let id = *vocab.entry(tok).or_insert(next);
                *counts.entry(id).or_default() += 1.0;
            }
            let mut v: Sparse = counts.into_iter().collect();
            v.sort_unstable_by_key(|&(id, _)| id);
            v
        })
        .collect();

    let weighted: Vec<Sparse> = match algorithm {
        SimilarityAlgorithm::TfIdf => {
            let mut df = vec![0usize; vocab.len()];
            for d in &docs {
                for &(id, _) in d {
                    df[id] += 1;
                }
            }
            docs.iter()
                .map(|d| {
                    d.iter()
                        .map(|&(id, tf)| (id, tf * ((n as f64 / df[id] as f64).ln() + 1.0)))
                        .collect()
                })
                .collect()
        }
        _ => docs,
    };
    let norms: Vec<f64> = weighted.iter().map(|v| dot(v, v).sqrt()).collect();

    let mut total = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            total += match algorithm {
                SimilarityAlgorithm::Jaccard => jaccard(&weighted[i], &weighted[j]),
                _ => cosine(&weighted[i], norms[i], &weighted[j], norms[j]),
            };
        }
    }
    Some(total / (n * (n - 1) / 2) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::{BTreeMap, BTreeSet};

    const ALL: [SimilarityAlgorithm; 3] = [
        SimilarityAlgorithm::Jaccard,
        SimilarityAlgorithm::Cosine,
        SimilarityAlgorithm::TfIdf,
    ];

    /// Direct double loop over string-keyed maps, independent of the sparse path.
    fn oracle(comments: &[&str], algorithm: SimilarityAlgorithm) -> f64 {
        let toks: Vec<Vec<String>> = comments.iter().map(|c| tokenize(c)).collect();
        let n = comments.len() as f64;
        let df = |t: &str| toks.iter().filter(|d| d.iter().any(|x| x == t)).count() as f64;
        let vec_of = |d: &[String]| {
            let mut m: BTreeMap<String, f64> = BTreeMap::new();
            for t in d {
                *m.entry(t.clone()).or_default() += 1.0;
            }
            if algorithm == SimilarityAlgorithm::TfIdf {
                for (t, v) in m.iter_mut() {
                    *v *= (n / df(t)).ln() + 1.0;
                }
            }
            m
        };
        let mut sum = 0.0;
        let mut pairs = 0.0;
        for i in 0..toks.len() {
            for j in i + 1..toks.len() {
                pairs += 1.0;
                sum += if algorithm == SimilarityAlgorithm::Jaccard {
                    let a: BTreeSet<_> = toks[i].iter().collect();
                    let b: BTreeSet<_> = toks[j].iter().collect();
                    if a.is_empty() && b.is_empty() {
                        1.0
                    } else {
                        a.intersection(&b).count() as f64 / a.union(&b).count() as f64
                    }
                } else {
                    let a = vec_of(&toks[i]);
                    let b = vec_of(&toks[j]);
                    let d: f64 = a.iter().map(|(t, v)| v * b.get(t).unwrap_or(&0.0)).sum();
                    let na = a.values().map(|v| v * v).sum::<f64>().sqrt();
                    let nb = b.values().map(|v| v * v).sum::<f64>().sqrt();
                    match (na == 0.0, nb == 0.0) {
                        (true, true) => 1.0,
                        (false, false) => d / (na * nb),
                        _ => 0.0,
                    }
                };
            }
        }
        sum / pairs
    }

    #[test]
    fn identical_pair_is_one() {
        for a in ALL {
            let s = comment_similarity(&["Thanks for the PR!", "thanks for the pr"], a).unwrap();
            assert!((s - 1.0).abs() < 1e-12, "{a}");
        }
    }

    #[test]
    fn disjoint_pair_is_zero() {
        for a in ALL {
            assert_eq!(comment_similarity(&["alpha beta", "gamma delta"], a), Some(0.0));
        }
    }

    #[test]
    fn fewer_than_two_is_missing() {
        assert_eq!(comment_similarity(&["only one"], SimilarityAlgorithm::TfIdf), None);
        assert_eq!(comment_similarity::<&str>(&[], SimilarityAlgorithm::Cosine), None);
    }

    #[test]
    fn templated_comments_match_oracle() {
        let c = [
            "Coverage report: total coverage is 81 percent",
            "Coverage report: total coverage is 64 percent",
            "Coverage report: total coverage is 93 percent",
        ];
        for a in ALL {
            let got = comment_similarity(&c, a).unwrap();
            assert!((got - oracle(&c, a)).abs() < 1e-9, "{a}");
        }
        assert!(comment_similarity(&c, SimilarityAlgorithm::TfIdf).unwrap() > 0.5);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn comment() -> impl Strategy<Value = String> {
            proptest::collection::vec(
                prop_oneof!["a", "b", "c", "lgtm", "fix", "1", "2", "!", " "],
                0..8,
            )
            .prop_map(|w| w.join(" "))
        }

        proptest! {
            #[test]
            fn equals_pairwise_oracle(cs in proptest::collection::vec(comment(), 2..10)) {
                let refs: Vec<&str> = cs.iter().map(String::as_str).collect();
                for a in ALL {
                    let got = comment_similarity(&refs, a).unwrap();
                    prop_assert!((got - oracle(&refs, a)).abs() < 1e-9);
                    prop_assert!((0.0..=1.0).contains(&got));
                }
            }

            #[test]
            fn order_does_not_matter(cs in proptest::collection::vec(comment(), 2..10), seed in any::<u64>()) {
                use rand::{seq::SliceRandom, SeedableRng};
                let mut shuffled = cs.clone();
                shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
                for a in ALL {
                    let x = comment_similarity(&cs, a).unwrap();
                    let y = comment_similarity(&shuffled, a).unwrap();
                    prop_assert!((x - y).abs() < 1e-9);
                }
            }
        }
    }
}
