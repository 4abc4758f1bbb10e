//! Per-hashtag documents and hashtag embeddings averaged from a pretrained
//! word-vector lexicon, plus cosine similarity.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::io::{self, BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{HashtagId, Tweet};

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("lexicon has no valid {dimension}-dimensional vectors")]
    EmptyLexicon { dimension: usize },
    #[error("embedding dimension must be positive")]
    ZeroDimension,
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("cosine similarity undefined for a zero-norm vector")]
    ZeroNorm,
    #[error("malformed embedding dump line {line}")]
    MalformedDump { line: usize },
}

/// Word tokens of a tweet as used for hashtag documents.
///
/// Splits on whitespace, drops hashtags, @-mentions and URLs, strips
/// surrounding punctuation and lowercases. No stemming or stopword removal.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace().filter_map(normalize_token).collect()
}

fn normalize_token(raw: &str) -> Option<String> {
    let lower = raw.to_lowercase();
    if lower.starts_with("http://") || lower.starts_with("https://") || lower.starts_with("www.") {
        return None;
    }
    let head = raw.trim_start_matches(|c: char| !c.is_alphanumeric() && c != '#' && c != '@');
    if head.starts_with('#') || head.starts_with('@') {
        return None;
    }
    let word = head.trim_matches(|c: char| !c.is_alphanumeric());
    if word.is_empty() {
        None
    } else {
        Some(word.to_lowercase())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HashtagDocument {
    pub hashtag: HashtagId,
    /// Word token instances, repetitions retained, in corpus order.
    pub tokens: Vec<String>,
    /// Number of tweets that contributed.
    pub tweet_count: usize,
}

impl HashtagDocument {
    pub fn token_count(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tweet_count == 0
    }
}

/// Concatenates the word tokens of every tweet that contains `hashtag`.
pub fn build_document<'a, I>(hashtag: &HashtagId, tweets: I) -> HashtagDocument
where
    I: IntoIterator<Item = &'a Tweet>,
{
    let mut doc = HashtagDocument {
        hashtag: hashtag.clone(),
        tokens: Vec::new(),
        tweet_count: 0,
    };
    for tweet in tweets {
        if tweet.hashtags.contains(hashtag) {
            doc.tokens.extend(tokenize(&tweet.text));
            doc.tweet_count += 1;
        }
    }
    doc
}

/// Builds documents for all of `hashtags` in a single pass over the corpus.
/// Each tweet is appended once per distinct hashtag it contains.
pub fn build_documents<'a, I>(
    hashtags: &BTreeSet<HashtagId>,
    tweets: I,
) -> BTreeMap<HashtagId, HashtagDocument>
where
    I: IntoIterator<Item = &'a Tweet>,
{
    let mut docs: BTreeMap<HashtagId, HashtagDocument> = hashtags
        .iter()
        .map(|h| {
            (
                h.clone(),
                HashtagDocument {
                    hashtag: h.clone(),
                    tokens: Vec::new(),
                    tweet_count: 0,
                },
            )
        })
        .collect();
    for tweet in tweets {
        let mut seen: Vec<&HashtagId> = Vec::new();
        let mut tokens: Option<Vec<String>> = None;
        for tag in &tweet.hashtags {
            if seen.contains(&tag) {
                continue;
            }
            seen.push(tag);
            if let Some(doc) = docs.get_mut(tag) {
                let words = tokens.get_or_insert_with(|| tokenize(&tweet.text));
                doc.tokens.extend(words.iter().cloned());
                doc.tweet_count += 1;
            }
        }
    }
    docs
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LexiconStats {
    pub loaded: u64,
    pub wrong_dimension: u64,
    pub malformed: u64,
    pub duplicates: u64,
    pub filtered_out: u64,
}

/// Immutable word-vector table keyed by lowercase word.
#[derive(Debug, Clone)]
pub struct EmbeddingLexicon {
    dimension: usize,
    vectors: HashMap<String, Vec<f32>>,
}

impl EmbeddingLexicon {
    pub fn from_vectors<I>(dimension: usize, entries: I) -> Result<Self, EmbeddingError>
    where
        I: IntoIterator<Item = (String, Vec<f32>)>,
    {
        if dimension == 0 {
            return Err(EmbeddingError::ZeroDimension);
        }
        let mut vectors = HashMap::new();
        for (word, v) in entries {
            if v.len() != dimension {
                return Err(EmbeddingError::DimensionMismatch {
                    left: dimension,
                    right: v.len(),
                });
            }
            vectors.insert(word.to_lowercase(), v);
        }
        if vectors.is_empty() {
            return Err(EmbeddingError::EmptyLexicon { dimension });
        }
        Ok(EmbeddingLexicon { dimension, vectors })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<&[f32]> {
        self.vectors.get(word).map(Vec::as_slice)
    }
}

/// Loads a `word c1 ... cd` text lexicon. Lines with the wrong component
/// count or non-finite values are counted and skipped; on duplicate words the
/// last line wins.
pub fn load_lexicon<R: BufRead>(
    source: R,
    expected_dimension: usize,
) -> Result<(EmbeddingLexicon, LexiconStats), EmbeddingError> {
    load_lexicon_filtered(source, expected_dimension, None)
}

/// Like [`load_lexicon`] but keeps only words in `vocabulary` when given.
pub fn load_lexicon_filtered<R: BufRead>(
    source: R,
    expected_dimension: usize,
    vocabulary: Option<&HashSet<String>>,
) -> Result<(EmbeddingLexicon, LexiconStats), EmbeddingError> {
    if expected_dimension == 0 {
        return Err(EmbeddingError::ZeroDimension);
    }
    let mut stats = LexiconStats::default();
    let mut vectors: HashMap<String, Vec<f32>> = HashMap::new();
    let mut line = String::new();
    let mut source = source;
    loop {
        line.clear();
        if source.read_line(&mut line)? == 0 {
            break;
        }
        let mut parts = line.split_whitespace();
        let Some(word) = parts.next() else {
            continue;
        };
        let word = word.to_lowercase();
        let components: Result<Vec<f32>, _> = parts.map(str::parse::<f32>).collect();
        let components = match components {
            Ok(c) if c.iter().all(|x| x.is_finite()) => c,
            _ => {
                stats.malformed += 1;
                continue;
            }
        };
        if components.len() != expected_dimension {
            stats.wrong_dimension += 1;
            continue;
        }
        if vocabulary.is_some_and(|v| !v.contains(&word)) {
            stats.filtered_out += 1;
            continue;
        }
        if vectors.insert(word, components).is_some() {
            stats.duplicates += 1;
        } else {
            stats.loaded += 1;
        }
    }
    if stats.loaded + stats.filtered_out == 0 {
        return Err(EmbeddingError::EmptyLexicon {
            dimension: expected_dimension,
        });
    }
    Ok((
        EmbeddingLexicon {
            dimension: expected_dimension,
            vectors,
        },
        stats,
    ))
}

/// What the average in [`embed_hashtag`] divides by.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DivisorMode {
    /// Number of token instances that have a lexicon vector (a true mean).
    #[default]
    Covered,
    /// Total number of token instances in the document.
    AllTokens,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HashtagEmbedding {
    pub hashtag: HashtagId,
    pub vector: Vec<f64>,
    pub covered_tokens: usize,
}

/// The document had no token with a lexicon vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NoCoverage {
    pub hashtag: HashtagId,
    pub token_count: usize,
}

/// Mean of the lexicon vectors of the document's token instances. Repeated
/// words contribute once per occurrence.
pub fn embed_hashtag(
    doc: &HashtagDocument,
    lexicon: &EmbeddingLexicon,
    divisor: DivisorMode,
) -> Result<HashtagEmbedding, NoCoverage> {
    let mut sum = vec![0.0f64; lexicon.dimension()];
    let mut covered = 0usize;
    for token in &doc.tokens {
        if let Some(v) = lexicon.get(token) {
            for (s, &x) in sum.iter_mut().zip(v) {
                *s += f64::from(x);
            }
            covered += 1;
        }
    }
    if covered == 0 {
        return Err(NoCoverage {
            hashtag: doc.hashtag.clone(),
            token_count: doc.token_count(),
        });
    }
    let denom = match divisor {
        DivisorMode::Covered => covered,
        DivisorMode::AllTokens => doc.token_count(),
    } as f64;
    for s in &mut sum {
        *s /= denom;
    }
    Ok(HashtagEmbedding {
        hashtag: doc.hashtag.clone(),
        vector: sum,
        covered_tokens: covered,
    })
}

/// Why a retained hashtag did not get a usable embedding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exclusion {
    EmptyDocument,
    NoCoverage,
    ZeroNorm,
}

impl Exclusion {
    pub fn as_str(self) -> &'static str {
        match self {
            Exclusion::EmptyDocument => "empty_document",
            Exclusion::NoCoverage => "no_coverage",
            Exclusion::ZeroNorm => "zero_norm",
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct EmbeddingSet {
    pub embeddings: BTreeMap<HashtagId, HashtagEmbedding>,
    pub excluded: BTreeMap<HashtagId, Exclusion>,
}

impl EmbeddingSet {
    /// Vectors of the clusterable hashtags, in hashtag order.
    pub fn vectors(&self) -> BTreeMap<HashtagId, Vec<f64>> {
        self.embeddings
            .iter()
            .map(|(h, e)| (h.clone(), e.vector.clone()))
            .collect()
    }
}

/// Embeds every document in parallel. Output is independent of scheduling.
pub fn embed_all(
    docs: &BTreeMap<HashtagId, HashtagDocument>,
    lexicon: &EmbeddingLexicon,
    divisor: DivisorMode,
) -> EmbeddingSet {
    let results: Vec<(HashtagId, Result<HashtagEmbedding, Exclusion>)> = docs
        .par_iter()
        .map(|(h, doc)| {
            let outcome = if doc.is_empty() {
                Err(Exclusion::EmptyDocument)
            } else {
                match embed_hashtag(doc, lexicon, divisor) {
                    Ok(e) if norm(&e.vector) > 0.0 => Ok(e),
                    Ok(_) => Err(Exclusion::ZeroNorm),
                    Err(_) => Err(Exclusion::NoCoverage),
                }
            };
            (h.clone(), outcome)
        })
        .collect();
    let mut set = EmbeddingSet::default();
    for (h, outcome) in results {
        match outcome {
            Ok(e) => {
                set.embeddings.insert(h, e);
            }
            Err(reason) => {
                set.excluded.insert(h, reason);
            }
        }
    }
    set
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// `a·b / (|a||b|)`, clamped to `[-1, 1]`.
pub fn cosine_similarity(a: &[f64], b: &[f64]) -> Result<f64, EmbeddingError> {
    if a.len() != b.len() {
        return Err(EmbeddingError::DimensionMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        return Err(EmbeddingError::ZeroNorm);
    }
    Ok((dot(a, b) / (na * nb)).clamp(-1.0, 1.0))
}

/// Writes `hashtag<TAB>c1 ... cd` per embedding. Values use the shortest
/// representation that round-trips exactly.
pub fn write_embeddings<'a, W, I>(out: &mut W, embeddings: I) -> io::Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a HashtagEmbedding>,
{
    for e in embeddings {
        write!(out, "{}\t", e.hashtag)?;
        for (i, x) in e.vector.iter().enumerate() {
            if i > 0 {
                out.write_all(b" ")?;
            }
            write!(out, "{x}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Reads the format produced by [`write_embeddings`].
pub fn read_embeddings<R: BufRead>(source: R) -> Result<BTreeMap<HashtagId, Vec<f64>>, EmbeddingError> {
    let mut out = BTreeMap::new();
    let mut dim = None;
    for (n, line) in source.lines().enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let bad = || EmbeddingError::MalformedDump { line: n + 1 };
        let (tag, rest) = line.split_once('\t').ok_or_else(bad)?;
        let tag = HashtagId::new(tag).ok_or_else(bad)?;
        let v: Vec<f64> = rest
            .split(' ')
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|_| bad())?;
        if *dim.get_or_insert(v.len()) != v.len() {
            return Err(bad());
        }
        out.insert(tag, v);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;
    use proptest::prelude::*;
    use std::io::Cursor;

    fn tweet(text: &str) -> Tweet {
        Tweet::new(0, "u", chrono::Utc.with_ymd_and_hms(2009, 6, 11, 0, 0, 0).unwrap(), text)
    }

    fn tag(s: &str) -> HashtagId {
        HashtagId::new(s).unwrap()
    }

    fn lexicon(entries: &[(&str, &[f32])]) -> EmbeddingLexicon {
        let dim = entries[0].1.len();
        EmbeddingLexicon::from_vectors(
            dim,
            entries.iter().map(|(w, v)| (w.to_string(), v.to_vec())),
        )
        .unwrap()
    }

    fn doc(tokens: &[&str]) -> HashtagDocument {
        HashtagDocument {
            hashtag: tag("h"),
            tokens: tokens.iter().map(|s| s.to_string()).collect(),
            tweet_count: 1,
        }
    }

    #[test]
    fn tokenizer_drops_tags_mentions_urls() {
        assert_eq!(
            tokenize("RT @bob: Save the Whales! #green http://t.co/x (really)"),
            vec!["rt", "save", "the", "whales", "really"]
        );
    }

    #[test]
    fn document_single_tweet() {
        let d = build_document(&tag("green"), &[tweet("save the whales #green")]);
        assert_eq!(d.tokens, vec!["save", "the", "whales"]);
        assert_eq!(d.token_count(), 3);
    }

    #[test]
    fn document_keeps_repetitions() {
        let corpus = [tweet("#mj rip rip"), tweet("#mj king"), tweet("#other rip")];
        let d = build_document(&tag("mj"), &corpus);
        assert_eq!(d.tokens, vec!["rip", "rip", "king"]);
        assert_eq!(d.token_count(), 3);
    }

    #[test]
    fn document_strips_mentions() {
        let d = build_document(&tag("x"), &[tweet("@bob hi #x")]);
        assert_eq!(d.tokens, vec!["hi"]);
    }

    #[test]
    fn document_matching_is_case_sensitive() {
        let corpus = [tweet("#Jackson one"), tweet("#jackson two")];
        assert_eq!(build_document(&tag("Jackson"), &corpus).tokens, vec!["one"]);
        let empty = build_document(&tag("nobody"), &corpus);
        assert!(empty.is_empty());
    }

    #[test]
    fn batch_documents_match_single() {
        let corpus = [
            tweet("#a #b alpha"),
            tweet("#a #a beta"),
            tweet("#b gamma #c"),
            tweet("delta"),
        ];
        let tags: BTreeSet<_> = ["a", "b", "c", "z"].iter().map(|s| tag(s)).collect();
        let docs = build_documents(&tags, &corpus);
        for t in &tags {
            assert_eq!(docs[t], build_document(t, &corpus));
        }
    }

    #[test]
    fn lexicon_loads_and_counts() {
        let text = "cat 1.0 2.0\nbad 1.0 2.0 3.0\nnan 1.0 NaN\ncat 3.0 4.0\ndog x y\n\n";
        let (lex, stats) = load_lexicon(Cursor::new(text), 2).unwrap();
        assert_eq!(lex.get("cat"), Some(&[3.0f32, 4.0][..]));
        assert_eq!(lex.len(), 1);
        assert_eq!(stats.wrong_dimension, 1);
        assert_eq!(stats.duplicates, 1);
        assert_eq!(stats.malformed, 2);
    }

    #[test]
    fn lexicon_single_line() {
        let (lex, _) = load_lexicon(Cursor::new("cat 1.0 2.0\n"), 2).unwrap();
        assert_eq!(lex.get("cat"), Some(&[1.0f32, 2.0][..]));
    }

    #[test]
    fn empty_lexicon_is_fatal() {
        assert!(matches!(
            load_lexicon(Cursor::new("cat 1 2 3\n"), 2),
            Err(EmbeddingError::EmptyLexicon { .. })
        ));
    }

    #[test]
    fn filtered_load_keeps_vocabulary() {
        let vocab: HashSet<String> = ["dog".to_string()].into();
        let (lex, stats) =
            load_lexicon_filtered(Cursor::new("cat 1 2\ndog 3 4\n"), 2, Some(&vocab)).unwrap();
        assert_eq!(lex.len(), 1);
        assert_eq!(stats.filtered_out, 1);
    }

    #[test]
    fn single_word_average_is_the_word() {
        let lex = lexicon(&[("cat", &[2.0, 4.0])]);
        let e = embed_hashtag(&doc(&["cat"]), &lex, DivisorMode::Covered).unwrap();
        assert_eq!(e.vector, vec![2.0, 4.0]);
        assert_eq!(e.covered_tokens, 1);
    }

    #[test]
    fn two_word_midpoint() {
        let lex = lexicon(&[("cat", &[0.0, 0.0]), ("dog", &[2.0, 4.0])]);
        let e = embed_hashtag(&doc(&["cat", "dog"]), &lex, DivisorMode::Covered).unwrap();
        assert_eq!(e.vector, vec![1.0, 2.0]);
    }

    #[test]
    fn repeated_words_weigh_more() {
        let lex = lexicon(&[("cat", &[0.0, 0.0]), ("dog", &[3.0, 3.0])]);
        let e = embed_hashtag(&doc(&["cat", "cat", "dog"]), &lex, DivisorMode::Covered).unwrap();
        assert_eq!(e.vector, vec![1.0, 1.0]);
    }

    #[test]
    fn divisor_modes_differ_with_oov() {
        let lex = lexicon(&[("dog", &[3.0, 3.0])]);
        let d = doc(&["dog", "zzz", "yyy"]);
        let covered = embed_hashtag(&d, &lex, DivisorMode::Covered).unwrap();
        let all = embed_hashtag(&d, &lex, DivisorMode::AllTokens).unwrap();
        assert_eq!(covered.vector, vec![3.0, 3.0]);
        assert_eq!(all.vector, vec![1.0, 1.0]);
        assert_eq!(all.covered_tokens, 1);
    }

    #[test]
    fn no_coverage_is_reported() {
        let lex = lexicon(&[("dog", &[3.0, 3.0])]);
        let err = embed_hashtag(&doc(&["zzz"]), &lex, DivisorMode::Covered).unwrap_err();
        assert_eq!(err.token_count, 1);
    }

    #[test]
    fn embed_all_separates_exclusions() {
        let lex = lexicon(&[("zero", &[0.0, 0.0]), ("dog", &[1.0, 0.0])]);
        let mut docs = BTreeMap::new();
        for (name, toks, tweets) in [
            ("a", vec!["dog"], 1),
            ("b", vec!["zzz"], 1),
            ("c", vec!["zero"], 1),
            ("d", vec![], 0),
        ] {
            docs.insert(
                tag(name),
                HashtagDocument {
                    hashtag: tag(name),
                    tokens: toks.into_iter().map(String::from).collect(),
                    tweet_count: tweets,
                },
            );
        }
        let set = embed_all(&docs, &lex, DivisorMode::Covered);
        assert_eq!(set.embeddings.len(), 1);
        assert_eq!(set.excluded[&tag("b")], Exclusion::NoCoverage);
        assert_eq!(set.excluded[&tag("c")], Exclusion::ZeroNorm);
        assert_eq!(set.excluded[&tag("d")], Exclusion::EmptyDocument);
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn cosine_examples() {
        let v = [0.3, -2.0, 5.5];
        assert!((cosine_similarity(&v, &v).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(cosine_similarity(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        let s = cosine_similarity(&[1.0, 1.0], &[1.0, 0.0]).unwrap();
        assert!((s - 0.7071).abs() < 1e-4);
        assert!(matches!(
            cosine_similarity(&[0.0, 0.0], &[1.0, 0.0]),
            Err(EmbeddingError::ZeroNorm)
        ));
        assert!(matches!(
            cosine_similarity(&[1.0], &[1.0, 0.0]),
            Err(EmbeddingError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn embedding_dump_round_trips() {
        let e = HashtagEmbedding {
            hashtag: tag("x"),
            vector: vec![0.1, -1e-300, 1.0 / 3.0],
            covered_tokens: 2,
        };
        let mut buf = Vec::new();
        write_embeddings(&mut buf, [&e]).unwrap();
        let back = read_embeddings(Cursor::new(buf)).unwrap();
        assert_eq!(back[&tag("x")], e.vector);
        assert!(read_embeddings(Cursor::new("x\t1 2\ny\t1\n")).is_err());
    }

    fn vec_strategy(dim: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(-10.0f64..10.0, dim)
    }

    proptest! {
        #[test]
        fn embedding_stays_in_hull(
            words in proptest::collection::vec(proptest::collection::vec(-5.0f32..5.0, 3), 1..6),
            picks in proptest::collection::vec(0usize..6, 1..20),
        ) {
            let lex = EmbeddingLexicon::from_vectors(
                3,
                words.iter().enumerate().map(|(i, v)| (format!("w{i}"), v.clone())),
            ).unwrap();
            let tokens: Vec<String> = picks.iter().map(|p| format!("w{}", p % words.len())).collect();
            let d = HashtagDocument { hashtag: tag("h"), tokens: tokens.clone(), tweet_count: 1 };
            let e = embed_hashtag(&d, &lex, DivisorMode::Covered).unwrap();
            for c in 0..3 {
                let vals = tokens.iter().map(|t| f64::from(lex.get(t).unwrap()[c]));
                let lo = vals.clone().fold(f64::INFINITY, f64::min);
                let hi = vals.fold(f64::NEG_INFINITY, f64::max);
                prop_assert!(e.vector[c] >= lo - 1e-9 && e.vector[c] <= hi + 1e-9);
            }
            let mut shuffled = d.clone();
            shuffled.tokens.reverse();
            shuffled.tokens.rotate_left(picks.len() / 2);
            let e2 = embed_hashtag(&shuffled, &lex, DivisorMode::Covered).unwrap();
            for (a, b) in e.vector.iter().zip(&e2.vector) {
                prop_assert!((a - b).abs() < 1e-9);
            }
        }

        #[test]
        fn cosine_is_symmetric_and_scale_invariant(a in vec_strategy(4), b in vec_strategy(4), s in 0.01f64..100.0) {
            prop_assume!(norm(&a) > 1e-6 && norm(&b) > 1e-6);
            let ab = cosine_similarity(&a, &b).unwrap();
            prop_assert_eq!(ab, cosine_similarity(&b, &a).unwrap());
            let scaled: Vec<f64> = a.iter().map(|x| x * s).collect();
            prop_assert!((cosine_similarity(&scaled, &b).unwrap() - ab).abs() < 1e-9);
            prop_assert!((-1.0..=1.0).contains(&ab));
        }
    }
}
