//! Offline corpus analysis: aggregate pattern statistics across many files
//! and emit a predefined dictionary.
//!
//! Counting within each file matches dynamic extraction exactly; files are
//! independent (patterns never span file boundaries) and the merge is plain
//! addition, so the result does not depend on file order. Singleton patterns
//! are kept until selection — two files contributing one occurrence each
//! still add up to a usable pattern.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::container::PredefinedDictionary;
use crate::engine::{accumulate_pattern_counts, rank_and_select};
use crate::error::{Error, Result};
use crate::model::{EngineConfig, PatternStats, MAX_PATTERN_SYMBOLS};

/// Aggregated pattern frequencies over a corpus.
#[derive(Clone, Debug, Default)]
pub struct CorpusStats {
    counts: HashMap<Vec<u8>, u64>,
    files_seen: u64,
    bytes_seen: u64,
}

impl CorpusStats {
    pub fn frequency(&self, pattern: &[u8]) -> u64 {
        self.counts.get(pattern).copied().unwrap_or(0)
    }

    pub fn counts(&self) -> &HashMap<Vec<u8>, u64> {
        &self.counts
    }

    pub fn distinct_patterns(&self) -> usize {
        self.counts.len()
    }

    pub fn files_seen(&self) -> u64 {
        self.files_seen
    }

    pub fn bytes_seen(&self) -> u64 {
        self.bytes_seen
    }
}

/// Sum per-file extraction counts over the corpus.
pub fn analyze_corpus<D: AsRef<[u8]>>(files: &[D], cfg: &EngineConfig) -> CorpusStats {
    let mut stats = CorpusStats::default();
    for file in files {
        let data = file.as_ref();
        accumulate_pattern_counts(data, cfg, &mut stats.counts);
        stats.files_seen += 1;
        stats.bytes_seen += data.len() as u64;
    }
    stats
}

/// Rank the aggregated statistics and package the winners as a predefined
/// dictionary under the config's bounds.
pub fn build_predefined(
    stats: &CorpusStats,
    k: usize,
    cfg: &EngineConfig,
) -> Result<PredefinedDictionary> {
    if k > MAX_PATTERN_SYMBOLS {
        return Err(Error::Config(format!(
            "dictionary size {k} exceeds {MAX_PATTERN_SYMBOLS}"
        )));
    }
    let candidates: Vec<PatternStats> = stats
        .counts
        .iter()
        .map(|(pattern, &freq)| PatternStats::new(pattern.clone(), freq))
        .collect();
    let dict = rank_and_select(candidates, k);
    PredefinedDictionary::new(cfg.min_len(), cfg.max_len(), dict)
}

/// Regular files under the given paths, directories walked recursively in
/// sorted order.
pub fn collect_corpus_files(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for path in paths {
        walk(path, &mut files)?;
    }
    Ok(files)
}

fn walk(path: &Path, files: &mut Vec<PathBuf>) -> Result<()> {
    let meta = fs::metadata(path)?;
    if meta.is_file() {
        files.push(path.to_path_buf());
    } else if meta.is_dir() {
        let mut entries: Vec<PathBuf> = fs::read_dir(path)?
            .map(|e| e.map(|e| e.path()))
            .collect::<std::io::Result<_>>()?;
        entries.sort();
        for entry in entries {
            walk(&entry, files)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::extract_patterns;

    #[test]
    fn analyze_sums_per_file_counts() {
        let cfg = EngineConfig::new(2, 2, 16).unwrap();
        let stats = analyze_corpus(&[b"abab".as_slice(), b"abba".as_slice()], &cfg);
        assert_eq!(stats.frequency(b"ab"), 3);
        assert_eq!(stats.frequency(b"ba"), 2);
        assert_eq!(stats.frequency(b"bb"), 1);
        assert_eq!(stats.distinct_patterns(), 3);
        assert_eq!(stats.files_seen(), 2);
        assert_eq!(stats.bytes_seen(), 8);
    }

    #[test]
    fn empty_corpus() {
        let cfg = EngineConfig::default();
        let stats = analyze_corpus::<&[u8]>(&[], &cfg);
        assert_eq!(stats.distinct_patterns(), 0);
        let pd = build_predefined(&stats, 8, &cfg).unwrap();
        assert!(pd.dictionary().is_empty());
    }

    #[test]
    fn single_file_equals_extraction() {
        let cfg = EngineConfig::new(2, 4, 16).unwrap();
        let data = b"mississippi";
        let stats = analyze_corpus(&[data.as_slice()], &cfg);
        for s in extract_patterns(data, &cfg) {
            assert_eq!(stats.frequency(&s.pattern), s.frequency, "{:?}", s.pattern);
        }
        assert_eq!(
            stats.distinct_patterns(),
            extract_patterns(data, &cfg).len()
        );
    }

    #[test]
    fn build_selects_top_patterns() {
        let cfg = EngineConfig::new(2, 2, 16).unwrap();
        let stats = analyze_corpus(&[b"abab".as_slice(), b"abba".as_slice()], &cfg);
        let pd = build_predefined(&stats, 1, &cfg).unwrap();
        assert_eq!(pd.dictionary().entries(), &[b"ab".to_vec()]);
    }

    #[test]
    fn file_order_does_not_matter() {
        let cfg = EngineConfig::new(2, 8, 32).unwrap();
        let files = [
            b"<item id=\"1\"/><item id=\"2\"/>".as_slice(),
            b"<list><item/></list>".as_slice(),
            b"plain text tail".as_slice(),
        ];
        let forward = build_predefined(&analyze_corpus(&files, &cfg), 16, &cfg).unwrap();
        let reversed: Vec<&[u8]> = files.iter().rev().copied().collect();
        let backward = build_predefined(&analyze_corpus(&reversed, &cfg), 16, &cfg).unwrap();
        assert_eq!(forward.to_bytes(), backward.to_bytes());
    }

    #[test]
    fn single_file_matches_dynamic_selection() {
        let cfg = EngineConfig::new(2, 6, 8).unwrap();
        let data = b"<a>x</a><a>y</a>";
        let pd = build_predefined(&analyze_corpus(&[data.as_slice()], &cfg), cfg.top_k(), &cfg)
            .unwrap();
        let dynamic = rank_and_select(extract_patterns(data, &cfg), cfg.top_k());
        assert_eq!(pd.dictionary(), &dynamic);
    }

    #[test]
    fn emitted_patterns_repeat_and_fit_bounds() {
        let cfg = EngineConfig::new(3, 5, 64).unwrap();
        let files = [b"abcabcabc".as_slice(), b"xyzxyz".as_slice()];
        let stats = analyze_corpus(&files, &cfg);
        let pd = build_predefined(&stats, 64, &cfg).unwrap();
        for entry in pd.dictionary().iter() {
            assert!(stats.frequency(entry) >= 2);
            assert!(entry.len() >= 3 && entry.len() <= 5);
        }
    }
}
