//! Pattern extraction, ranking, and greedy substitution.
//!
//! Extraction enumerates every substring of length `min_len..=max_len` and
//! counts leftmost non-overlapping occurrences, one hash table per length so
//! window slices can borrow from the input. Ranking keeps the `top_k`
//! highest-scoring repeated patterns under a total order, and tokenization is
//! a single left-to-right longest-match pass over a trie of the combined
//! dictionary.

use std::collections::HashMap;
use std::ops::Range;

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::model::{
    Dictionary, EngineConfig, PatternStats, Token, LITERAL_SYMBOLS, MAX_PATTERN_LEN,
    MAX_PATTERN_SYMBOLS,
};

/// Ranking heuristic: frequency times squared length.
pub fn score(frequency: u64, length: usize) -> u64 {
    frequency * (length as u64) * (length as u64)
}

/// Per-pattern counting state: occurrences taken so far and the first input
/// position where the next non-overlapping occurrence may start.
type WindowCounts<'a> = FxHashMap<&'a [u8], (u64, usize)>;

/// Count leftmost non-overlapping occurrences of every length-`len` window
/// inside the given runs. Windows never span a run boundary; run order is
/// ascending, so one cursor per pattern implements the greedy rule globally.
fn count_windows<'a>(data: &'a [u8], runs: &[Range<usize>], len: usize) -> WindowCounts<'a> {
    let mut counts = WindowCounts::default();
    for run in runs {
        if run.end - run.start < len {
            continue;
        }
        for pos in run.start..=run.end - len {
            let window = &data[pos..pos + len];
            let entry = counts.entry(window).or_insert((0, 0));
            if pos >= entry.1 {
                entry.0 += 1;
                entry.1 = pos + len;
            }
        }
    }
    counts
}

/// Every distinct substring of `data` with length in the configured range,
/// with its leftmost non-overlapping occurrence count. Order is unspecified.
pub fn extract_patterns(data: &[u8], cfg: &EngineConfig) -> Vec<PatternStats> {
    let runs = [0..data.len()];
    let mut out = Vec::new();
    for len in cfg.min_len()..=cfg.max_len() {
        if len > data.len() {
            break;
        }
        for (window, (freq, _)) in count_windows(data, &runs, len) {
            out.push(PatternStats::new(window.to_vec(), freq));
        }
    }
    out
}

/// Pipeline fast path: only patterns that repeat can ever be selected, so
/// stop materializing once a length yields no repeats (a repeated longer
/// pattern would imply a repeated prefix at the shorter length).
pub(crate) fn extract_repeated(
    data: &[u8],
    runs: &[Range<usize>],
    cfg: &EngineConfig,
) -> Vec<PatternStats> {
    let mut out = Vec::new();
    for len in cfg.min_len()..=cfg.max_len() {
        let mut any = false;
        for (window, (freq, _)) in count_windows(data, runs, len) {
            if freq >= 2 {
                any = true;
                out.push(PatternStats::new(window.to_vec(), freq));
            }
        }
        if !any {
            break;
        }
    }
    out
}

/// Add this input's per-pattern counts into a corpus-wide accumulator.
pub(crate) fn accumulate_pattern_counts(
    data: &[u8],
    cfg: &EngineConfig,
    into: &mut HashMap<Vec<u8>, u64>,
) {
    let runs = [0..data.len()];
    for len in cfg.min_len()..=cfg.max_len() {
        if len > data.len() {
            break;
        }
        for (window, (freq, _)) in count_windows(data, &runs, len) {
            *into.entry(window.to_vec()).or_insert(0) += freq;
        }
    }
}

/// Keep the top `k` repeated patterns under the total order
/// (score descending, length descending, bytes ascending).
///
/// Patterns occurring once are dropped: a single replacement plus the
/// dictionary entry it requires cannot shrink the output.
pub fn rank_and_select(mut stats: Vec<PatternStats>, k: usize) -> Dictionary {
    stats.retain(|s| {
        s.frequency >= 2 && !s.pattern.is_empty() && s.pattern.len() <= MAX_PATTERN_LEN
    });
    stats.sort_unstable_by(|a, b| {
        b.score
            .cmp(&a.score)
            .then_with(|| b.pattern.len().cmp(&a.pattern.len()))
            .then_with(|| a.pattern.cmp(&b.pattern))
    });
    // Identical patterns sort adjacently; guard against malformed input.
    stats.dedup_by(|a, b| a.pattern == b.pattern);
    stats.truncate(k);
    let entries: Vec<Vec<u8>> = stats.into_iter().map(|s| s.pattern).collect();
    Dictionary::new(entries).expect("ranked patterns are distinct and bounded")
}

#[derive(Debug)]
struct MatchNode {
    children: Vec<(u8, u32)>,
    symbol: Option<u16>,
}

impl MatchNode {
    fn new() -> Self {
        Self {
            children: Vec::new(),
            symbol: None,
        }
    }

    fn child(&self, byte: u8) -> Option<u32> {
        self.children
            .binary_search_by_key(&byte, |&(b, _)| b)
            .ok()
            .map(|i| self.children[i].1)
    }
}

/// Immutable longest-match trie over a combined dictionary, mapping each
/// pattern to its symbol id.
#[derive(Debug)]
pub struct Matcher {
    nodes: Vec<MatchNode>,
}

impl Matcher {
    fn insert(&mut self, pattern: &[u8], symbol: u16) -> Result<()> {
        let mut node = 0usize;
        for &byte in pattern {
            node = match self.nodes[node].child(byte) {
                Some(next) => next as usize,
                None => {
                    let next = self.nodes.len() as u32;
                    self.nodes.push(MatchNode::new());
                    let slot = self.nodes[node]
                        .children
                        .binary_search_by_key(&byte, |&(b, _)| b)
                        .unwrap_err();
                    self.nodes[node].children.insert(slot, (byte, next));
                    next as usize
                }
            };
        }
        if self.nodes[node].symbol.is_some() {
            return Err(Error::Config(format!(
                "duplicate pattern across dictionaries: {:?}",
                String::from_utf8_lossy(pattern)
            )));
        }
        self.nodes[node].symbol = Some(symbol);
        Ok(())
    }

    /// Longest dictionary entry prefixing `input`, with its symbol id.
    pub fn longest_match(&self, input: &[u8]) -> Option<(u16, usize)> {
        let mut node = 0usize;
        let mut best = None;
        for (i, &byte) in input.iter().enumerate() {
            match self.nodes[node].child(byte) {
                Some(next) => node = next as usize,
                None => break,
            }
            if let Some(symbol) = self.nodes[node].symbol {
                best = Some((symbol, i + 1));
            }
        }
        best
    }
}

/// Build the longest-match structure over both dictionaries. Predefined
/// entries take symbol ids 256.., dynamic entries follow.
pub fn build_matcher(predefined: &Dictionary, dynamic: &Dictionary) -> Result<Matcher> {
    let total = predefined.len() + dynamic.len();
    if total > MAX_PATTERN_SYMBOLS {
        return Err(Error::Config(format!(
            "combined dictionaries hold {total} patterns, exceeding {MAX_PATTERN_SYMBOLS}"
        )));
    }
    let mut matcher = Matcher {
        nodes: vec![MatchNode::new()],
    };
    for (i, pattern) in predefined.iter().chain(dynamic.iter()).enumerate() {
        matcher.insert(pattern, (LITERAL_SYMBOLS + i) as u16)?;
    }
    Ok(matcher)
}

/// Single left-to-right pass: at each position emit the longest match as a
/// code token, or the byte as a literal.
pub fn tokenize(data: &[u8], matcher: &Matcher) -> Vec<Token> {
    tokenize_with_runs(data, matcher).0
}

/// Tokenize and also report the maximal literal runs as ranges into `data`.
pub(crate) fn tokenize_with_runs(
    data: &[u8],
    matcher: &Matcher,
) -> (Vec<Token>, Vec<Range<usize>>) {
    let mut tokens = Vec::new();
    let mut runs = Vec::new();
    let mut run_start = None;
    let mut pos = 0;
    while pos < data.len() {
        match matcher.longest_match(&data[pos..]) {
            Some((symbol, len)) => {
                if let Some(start) = run_start.take() {
                    runs.push(start..pos);
                }
                tokens.push(Token::Code(symbol));
                pos += len;
            }
            None => {
                run_start.get_or_insert(pos);
                tokens.push(Token::Literal(data[pos]));
                pos += 1;
            }
        }
    }
    if let Some(start) = run_start {
        runs.push(start..data.len());
    }
    (tokens, runs)
}

/// Replace literals and codes with their original bytes.
pub fn detokenize(
    tokens: &[Token],
    predefined: &Dictionary,
    dynamic: &Dictionary,
) -> Result<Vec<u8>> {
    let total = predefined.len() + dynamic.len();
    let mut out = Vec::with_capacity(tokens.len());
    for token in tokens {
        match token {
            Token::Literal(b) => out.push(*b),
            Token::Code(id) => {
                let index = (*id as usize)
                    .checked_sub(LITERAL_SYMBOLS)
                    .ok_or_else(|| Error::Corrupt(format!("code token {id} below 256")))?;
                if index >= total {
                    return Err(Error::Corrupt(format!(
                        "code token {id} outside combined dictionary of {total} entries"
                    )));
                }
                let entry = if index < predefined.len() {
                    predefined.get(index).unwrap()
                } else {
                    dynamic.get(index - predefined.len()).unwrap()
                };
                out.extend_from_slice(entry);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Brute-force oracle: count leftmost non-overlapping occurrences of
    /// `pattern` by repeated scanning.
    fn oracle_count(data: &[u8], pattern: &[u8]) -> u64 {
        let mut count = 0;
        let mut pos = 0;
        while pos + pattern.len() <= data.len() {
            if &data[pos..pos + pattern.len()] == pattern {
                count += 1;
                pos += pattern.len();
            } else {
                pos += 1;
            }
        }
        count
    }

    /// Brute-force oracle enumerating every substring in the length range.
    fn oracle_extract(data: &[u8], cfg: &EngineConfig) -> HashMap<Vec<u8>, u64> {
        let mut out = HashMap::new();
        for len in cfg.min_len()..=cfg.max_len().min(data.len()) {
            for start in 0..=data.len() - len {
                let pattern = data[start..start + len].to_vec();
                out.entry(pattern.clone())
                    .or_insert_with(|| oracle_count(data, &pattern));
            }
        }
        out
    }

    fn as_map(stats: Vec<PatternStats>) -> HashMap<Vec<u8>, u64> {
        stats.into_iter().map(|s| (s.pattern, s.frequency)).collect()
    }

    #[test]
    fn score_examples() {
        assert_eq!(score(3, 2), 12);
        assert_eq!(score(1, 3), 9);
        assert_eq!(score(0, 32), 0);
    }

    #[test]
    fn extract_ababab() {
        let cfg = EngineConfig::new(2, 3, 16).unwrap();
        let got = as_map(extract_patterns(b"ababab", &cfg));
        let expected: HashMap<Vec<u8>, u64> = [
            (b"ab".to_vec(), 3),
            (b"ba".to_vec(), 2),
            (b"aba".to_vec(), 1),
            (b"bab".to_vec(), 1),
        ]
        .into_iter()
        .collect();
        assert_eq!(got, expected);
        assert_eq!(got, oracle_extract(b"ababab", &cfg));
    }

    #[test]
    fn extract_edge_cases() {
        let cfg = EngineConfig::new(3, 3, 16).unwrap();
        assert!(extract_patterns(b"", &cfg).is_empty());
        let got = extract_patterns(b"xyz", &cfg);
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].pattern, b"xyz");
        assert_eq!(got[0].frequency, 1);
        assert_eq!(got[0].score, 9);
    }

    #[test]
    fn rank_filters_singletons() {
        let stats = vec![
            PatternStats::new(b"abcd".to_vec(), 1),
            PatternStats::new(b"xy".to_vec(), 4),
        ];
        assert_eq!(stats[0].score, 16);
        assert_eq!(stats[1].score, 16);
        let dict = rank_and_select(stats, 2);
        assert_eq!(dict.entries(), &[b"xy".to_vec()]);
    }

    #[test]
    fn rank_ababab_top1() {
        let cfg = EngineConfig::new(2, 3, 16).unwrap();
        let stats = extract_patterns(b"ababab", &cfg);
        // After the frequency filter only {"ab": 12, "ba": 8} remain.
        let dict = rank_and_select(stats, 1);
        assert_eq!(dict.entries(), &[b"ab".to_vec()]);
    }

    #[test]
    fn rank_tie_breaks() {
        // Same score, longer pattern wins.
        let stats = vec![
            PatternStats::new(b"aaaa".to_vec(), 2), // score 32
            PatternStats::new(vec![b'z'; 2], 8),    // score 32
        ];
        let dict = rank_and_select(stats, 2);
        assert_eq!(dict.entries(), &[b"aaaa".to_vec(), b"zz".to_vec()]);

        // Same score and length, lexicographically smaller wins.
        let stats = vec![
            PatternStats::new(b"bb".to_vec(), 2),
            PatternStats::new(b"aa".to_vec(), 2),
        ];
        let dict = rank_and_select(stats, 1);
        assert_eq!(dict.entries(), &[b"aa".to_vec()]);
    }

    #[test]
    fn rank_empty() {
        assert!(rank_and_select(Vec::new(), 5).is_empty());
    }

    #[test]
    fn matcher_longest_match() {
        let predefined = Dictionary::new(vec![b"aba".to_vec()]).unwrap();
        let dynamic = Dictionary::new(vec![b"ab".to_vec()]).unwrap();
        let m = build_matcher(&predefined, &dynamic).unwrap();
        assert_eq!(m.longest_match(b"abab"), Some((256, 3)));
        assert_eq!(m.longest_match(b"abx"), Some((257, 2)));
        assert_eq!(m.longest_match(b"zz"), None);

        let empty = build_matcher(&Dictionary::empty(), &Dictionary::empty()).unwrap();
        assert_eq!(empty.longest_match(b"anything"), None);

        let tags = Dictionary::new(vec![b"<x>".to_vec()]).unwrap();
        let m = build_matcher(&tags, &Dictionary::empty()).unwrap();
        assert_eq!(m.longest_match(b"ab"), None);
    }

    #[test]
    fn matcher_rejects_cross_dictionary_duplicates() {
        let a = Dictionary::new(vec![b"ab".to_vec()]).unwrap();
        let b = Dictionary::new(vec![b"ab".to_vec()]).unwrap();
        assert!(build_matcher(&a, &b).is_err());
    }

    #[test]
    fn tokenize_examples() {
        let dict = Dictionary::new(vec![b"ab".to_vec()]).unwrap();
        let m = build_matcher(&Dictionary::empty(), &dict).unwrap();
        assert_eq!(
            tokenize(b"ababab", &m),
            vec![Token::Code(256), Token::Code(256), Token::Code(256)]
        );

        let dict = Dictionary::new(vec![b"aba".to_vec(), b"ab".to_vec()]).unwrap();
        let m = build_matcher(&Dictionary::empty(), &dict).unwrap();
        assert_eq!(
            tokenize(b"abab", &m),
            vec![Token::Code(256), Token::Literal(b'b')]
        );

        let empty = build_matcher(&Dictionary::empty(), &Dictionary::empty()).unwrap();
        assert_eq!(tokenize(b"q", &empty), vec![Token::Literal(b'q')]);
    }

    #[test]
    fn tokenize_reports_literal_runs() {
        let dict = Dictionary::new(vec![b"<a>".to_vec()]).unwrap();
        let m = build_matcher(&dict, &Dictionary::empty()).unwrap();
        let (tokens, runs) = tokenize_with_runs(b"<a>x</a><a>y</a>", &m);
        assert_eq!(tokens.len(), 12); // 2 codes + 10 literals
        assert_eq!(runs, vec![3..8, 11..16]);
    }

    #[test]
    fn detokenize_examples() {
        let dict = Dictionary::new(vec![b"ab".to_vec()]).unwrap();
        let tokens = vec![Token::Code(256), Token::Code(256), Token::Code(256)];
        assert_eq!(
            detokenize(&tokens, &Dictionary::empty(), &dict).unwrap(),
            b"ababab"
        );
        assert_eq!(
            detokenize(&[], &Dictionary::empty(), &Dictionary::empty()).unwrap(),
            b""
        );
        assert!(detokenize(&[Token::Code(300)], &Dictionary::empty(), &dict).is_err());
    }

    #[test]
    fn extract_repeated_matches_full_extraction() {
        let cfg = EngineConfig::new(2, 5, 16).unwrap();
        let data = b"the cat and the dog and the bird";
        let full: HashMap<Vec<u8>, u64> = as_map(
            extract_patterns(data, &cfg)
                .into_iter()
                .filter(|s| s.frequency >= 2)
                .collect(),
        );
        let fast = as_map(extract_repeated(data, &[0..data.len()], &cfg));
        assert_eq!(full, fast);
    }

    proptest! {
        #[test]
        fn extract_matches_oracle(data in proptest::collection::vec(0u8..4, 0..64)) {
            let cfg = EngineConfig::new(2, 5, 16).unwrap();
            prop_assert_eq!(as_map(extract_patterns(&data, &cfg)), oracle_extract(&data, &cfg));
        }

        #[test]
        fn round_trip_with_ranked_dictionary(data in proptest::collection::vec(0u8..8, 0..256)) {
            let cfg = EngineConfig::new(2, 6, 8).unwrap();
            let dict = rank_and_select(extract_patterns(&data, &cfg), cfg.top_k());
            let m = build_matcher(&Dictionary::empty(), &dict).unwrap();
            let tokens = tokenize(&data, &m);
            prop_assert!(tokens.len() <= data.len());
            prop_assert!(crate::model::validate_tokens(&tokens, dict.len()));
            let back = detokenize(&tokens, &Dictionary::empty(), &dict).unwrap();
            prop_assert_eq!(back, data);
        }
    }
}
