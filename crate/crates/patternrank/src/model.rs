//! Shared data model: tokens, dictionaries, engine configuration, and
//! symbol-space arithmetic.
//!
//! The symbol space is unified: ids 0..=255 are literal bytes, ids 256 and up
//! index into the combined dictionary (predefined entries first, then dynamic
//! ones). Everything here is an immutable value after construction.

use std::collections::HashSet;

use serde::Serialize;

use crate::error::{Error, Result};

/// Number of literal byte symbols preceding pattern codes.
pub const LITERAL_SYMBOLS: usize = 256;

/// Ceiling on combined pattern symbols so every id fits in 16 bits.
pub const MAX_PATTERN_SYMBOLS: usize = 65_280;

/// Longest representable pattern: entries serialize with a 1-byte length.
pub const MAX_PATTERN_LEN: usize = 255;

/// Extraction and selection parameters: pattern lengths considered and the
/// number of top-ranked patterns kept.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct EngineConfig {
    min_len: usize,
    max_len: usize,
    top_k: usize,
}

impl EngineConfig {
    pub const DEFAULT_MIN_LEN: usize = 3;
    pub const DEFAULT_MAX_LEN: usize = 32;
    pub const DEFAULT_TOP_K: usize = 256;

    pub fn new(min_len: usize, max_len: usize, top_k: usize) -> Result<Self> {
        if min_len < 2 {
            return Err(Error::Config(format!(
                "min pattern length must be at least 2, got {min_len}"
            )));
        }
        if min_len > max_len {
            return Err(Error::Config(format!(
                "min pattern length {min_len} exceeds max {max_len}"
            )));
        }
        if max_len > MAX_PATTERN_LEN {
            return Err(Error::Config(format!(
                "max pattern length must be at most {MAX_PATTERN_LEN}, got {max_len}"
            )));
        }
        if top_k == 0 || top_k > MAX_PATTERN_SYMBOLS {
            return Err(Error::Config(format!(
                "top-k must be in 1..={MAX_PATTERN_SYMBOLS}, got {top_k}"
            )));
        }
        Ok(Self {
            min_len,
            max_len,
            top_k,
        })
    }

    pub fn min_len(&self) -> usize {
        self.min_len
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn top_k(&self) -> usize {
        self.top_k
    }
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            min_len: Self::DEFAULT_MIN_LEN,
            max_len: Self::DEFAULT_MAX_LEN,
            top_k: Self::DEFAULT_TOP_K,
        }
    }
}

/// A candidate pattern with its non-overlapping occurrence count and
/// ranking score (frequency times squared length).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatternStats {
    pub pattern: Vec<u8>,
    pub frequency: u64,
    pub score: u64,
}

impl PatternStats {
    pub fn new(pattern: Vec<u8>, frequency: u64) -> Self {
        let score = crate::engine::score(frequency, pattern.len());
        Self {
            pattern,
            frequency,
            score,
        }
    }
}

/// One element of the post-substitution stream: a literal byte or a pattern
/// code addressing the combined dictionary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Token {
    Literal(u8),
    Code(u16),
}

impl Token {
    /// Position of the token in the unified symbol space.
    pub fn symbol_id(self) -> u16 {
        match self {
            Token::Literal(b) => b as u16,
            Token::Code(id) => id,
        }
    }

    pub fn from_symbol_id(id: u16) -> Self {
        if (id as usize) < LITERAL_SYMBOLS {
            Token::Literal(id as u8)
        } else {
            Token::Code(id)
        }
    }
}

/// Ordered list of byte-sequence patterns. Position `i` corresponds to symbol
/// id `256 + i`, offset by any preceding dictionary's entries.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Dictionary {
    entries: Vec<Vec<u8>>,
}

impl Dictionary {
    pub fn new(entries: Vec<Vec<u8>>) -> Result<Self> {
        let mut seen: HashSet<&[u8]> = HashSet::with_capacity(entries.len());
        for entry in &entries {
            if entry.is_empty() {
                return Err(Error::Config("dictionary entry must not be empty".into()));
            }
            if entry.len() > MAX_PATTERN_LEN {
                return Err(Error::Config(format!(
                    "dictionary entry length {} exceeds {MAX_PATTERN_LEN}",
                    entry.len()
                )));
            }
            if !seen.insert(entry) {
                return Err(Error::Config(format!(
                    "duplicate dictionary entry {:?}",
                    String::from_utf8_lossy(entry)
                )));
            }
        }
        Ok(Self { entries })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Vec<u8>] {
        &self.entries
    }

    pub fn get(&self, index: usize) -> Option<&[u8]> {
        self.entries.get(index).map(|e| e.as_slice())
    }

    pub fn contains(&self, pattern: &[u8]) -> bool {
        self.entries.iter().any(|e| e.as_slice() == pattern)
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u8]> {
        self.entries.iter().map(|e| e.as_slice())
    }
}

/// Size of the Huffman alphabet covering literals plus both dictionaries.
pub fn symbol_space_size(predefined_count: usize, dynamic_count: usize) -> Result<usize> {
    let total = predefined_count
        .checked_add(dynamic_count)
        .ok_or_else(|| Error::Config("pattern count overflow".into()))?;
    if total > MAX_PATTERN_SYMBOLS {
        return Err(Error::Config(format!(
            "combined dictionaries hold {total} patterns, exceeding the \
             {MAX_PATTERN_SYMBOLS} available symbol ids"
        )));
    }
    Ok(LITERAL_SYMBOLS + total)
}

/// True iff every code token addresses the combined dictionary of the given
/// size.
pub fn validate_tokens(tokens: &[Token], dict_size: usize) -> bool {
    tokens.iter().all(|t| match t {
        Token::Literal(_) => true,
        Token::Code(id) => (*id as usize) < LITERAL_SYMBOLS + dict_size,
    })
}
