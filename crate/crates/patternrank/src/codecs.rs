//! End-to-end compression pipelines tying the engine, dictionaries, the
//! Huffman stage, and the container together.
//!
//! All four pipelines share the same shape: derive a token stream, then
//! serialize it either escape-encoded (v1, v2) or Huffman-coded over the
//! extended alphabet (v1h, v2h). Decompression dispatches on the algorithm
//! byte and always verifies the original length and CRC-32, so no codec bug
//! can silently return wrong bytes.

use crate::container::{
    crc32, escape_decode, escape_encode, read_container, write_container, Algorithm, Container,
    Header, HuffmanSection, Payload, PredefinedDictionary,
};
use crate::engine::{
    build_matcher, extract_repeated, rank_and_select, tokenize, tokenize_with_runs,
};
use crate::error::{Error, Result};
use crate::huffman::{build_code_lengths, canonicalize, count_frequencies, decode, encode,
    CodeLengthTable};
use crate::model::{Dictionary, EngineConfig, Token, LITERAL_SYMBOLS};

/// Dynamic dictionary and token stream of the v1 pipeline: extract, rank,
/// tokenize, then drop any selected pattern the greedy pass never used.
pub fn v1_token_stream(data: &[u8], cfg: &EngineConfig) -> Result<(Dictionary, Vec<Token>)> {
    let stats = extract_repeated(data, &[0..data.len()], cfg);
    let dynamic = rank_and_select(stats, cfg.top_k());
    let matcher = build_matcher(&Dictionary::empty(), &dynamic)?;
    let tokens = tokenize(data, &matcher);
    Ok(compact_dynamic(0, dynamic, tokens))
}

/// Dynamic dictionary and token stream of the v2 pipeline: tokenize with the
/// predefined dictionary, mine the residual literal runs for new patterns,
/// then re-tokenize the original data with the combined dictionary.
pub fn v2_token_stream(
    data: &[u8],
    cfg: &EngineConfig,
    predefined: &PredefinedDictionary,
) -> Result<(Dictionary, Vec<Token>)> {
    if predefined.min_len() < cfg.min_len() || predefined.max_len() > cfg.max_len() {
        return Err(Error::Usage(format!(
            "predefined dictionary bounds {}..={} fall outside configured {}..={}",
            predefined.min_len(),
            predefined.max_len(),
            cfg.min_len(),
            cfg.max_len()
        )));
    }
    let stage1 = build_matcher(predefined.dictionary(), &Dictionary::empty())?;
    let (_, runs) = tokenize_with_runs(data, &stage1);
    let mut stats = extract_repeated(data, &runs, cfg);
    // Residual runs cannot contain a predefined entry (the first pass would
    // have replaced it), but selection is required to be disjoint.
    stats.retain(|s| !predefined.dictionary().contains(&s.pattern));
    let dynamic = rank_and_select(stats, cfg.top_k());
    let combined = build_matcher(predefined.dictionary(), &dynamic)?;
    let tokens = tokenize(data, &combined);
    Ok(compact_dynamic(predefined.dictionary().len(), dynamic, tokens))
}

/// Drop dynamic entries the token stream never references and renumber the
/// remaining codes, preserving rank order. Keeps every stored pattern live:
/// each one is replaced at least once in the output.
fn compact_dynamic(
    predefined_len: usize,
    dynamic: Dictionary,
    mut tokens: Vec<Token>,
) -> (Dictionary, Vec<Token>) {
    let first_dynamic = LITERAL_SYMBOLS + predefined_len;
    let mut used = vec![false; dynamic.len()];
    for token in &tokens {
        if let Token::Code(id) = token {
            if let Some(index) = (*id as usize).checked_sub(first_dynamic) {
                used[index] = true;
            }
        }
    }
    if used.iter().all(|&u| u) {
        return (dynamic, tokens);
    }
    let mut remap = vec![0u16; dynamic.len()];
    let mut entries = Vec::new();
    for (index, entry) in dynamic.entries().iter().enumerate() {
        if used[index] {
            remap[index] = (first_dynamic + entries.len()) as u16;
            entries.push(entry.clone());
        }
    }
    for token in &mut tokens {
        if let Token::Code(id) = token {
            if let Some(index) = (*id as usize).checked_sub(first_dynamic) {
                *id = remap[index];
            }
        }
    }
    let compacted = Dictionary::new(entries).expect("compaction preserves validity");
    (compacted, tokens)
}

fn header_for(algorithm: Algorithm, data: &[u8]) -> Header {
    Header {
        algorithm,
        original_length: data.len() as u64,
        original_crc32: crc32(data),
    }
}

/// Dynamic pattern-ranking substitution with escape-encoded output.
pub fn compress_v1(data: &[u8], cfg: &EngineConfig) -> Result<Vec<u8>> {
    let (dynamic, tokens) = v1_token_stream(data, cfg)?;
    write_container(&Container {
        header: header_for(Algorithm::V1, data),
        predefined: None,
        dynamic,
        payload: Payload::Escape(escape_encode(&tokens)),
    })
}

/// Predefined-dictionary substitution plus dynamic residual patterns,
/// escape-encoded.
pub fn compress_v2(
    data: &[u8],
    cfg: &EngineConfig,
    predefined: &PredefinedDictionary,
) -> Result<Vec<u8>> {
    let (dynamic, tokens) = v2_token_stream(data, cfg, predefined)?;
    write_container(&Container {
        header: header_for(Algorithm::V2, data),
        predefined: Some(predefined.clone()),
        dynamic,
        payload: Payload::Escape(escape_encode(&tokens)),
    })
}

/// Pattern substitution followed by canonical Huffman coding of the token
/// stream over the extended alphabet.
pub fn compress_hybrid(
    data: &[u8],
    cfg: &EngineConfig,
    predefined: Option<&PredefinedDictionary>,
) -> Result<Vec<u8>> {
    let (algorithm, dynamic, tokens) = match predefined {
        Some(pd) => {
            let (dynamic, tokens) = v2_token_stream(data, cfg, pd)?;
            (Algorithm::V2Huffman, dynamic, tokens)
        }
        None => {
            let (dynamic, tokens) = v1_token_stream(data, cfg)?;
            (Algorithm::V1Huffman, dynamic, tokens)
        }
    };
    let predefined_len = predefined.map_or(0, |p| p.dictionary().len());
    let alphabet_size = LITERAL_SYMBOLS + predefined_len + dynamic.len();
    let section = if tokens.is_empty() {
        HuffmanSection {
            token_count: 0,
            lengths: CodeLengthTable::zeros(alphabet_size),
            bits: Vec::new(),
        }
    } else {
        let freqs = count_frequencies(&tokens, alphabet_size)?;
        let lengths = build_code_lengths(&freqs)?;
        let codebook = canonicalize(&lengths)?;
        let bits = encode(&tokens, &codebook)?;
        HuffmanSection {
            token_count: tokens.len() as u64,
            lengths,
            bits,
        }
    };
    write_container(&Container {
        header: header_for(algorithm, data),
        predefined: predefined.cloned(),
        dynamic,
        payload: Payload::Huffman(section),
    })
}

/// Decode a parsed container back to its token stream, enforcing that a
/// Huffman bitstream is consumed exactly (zero padding, no surplus bytes).
fn decode_tokens(container: &Container) -> Result<Vec<Token>> {
    let dict_size = container.predefined_len() + container.dynamic.len();
    match &container.payload {
        Payload::Escape(bytes) => escape_decode(bytes, dict_size),
        Payload::Huffman(section) => {
            let tokens = decode(&section.bits, &section.lengths, section.token_count as usize)?;
            let total_bits: u64 = tokens
                .iter()
                .map(|t| section.lengths.lengths[t.symbol_id() as usize] as u64)
                .sum();
            if section.bits.len() as u64 != total_bits.div_ceil(8) {
                return Err(Error::Corrupt(
                    "bitstream length does not match decoded symbols".into(),
                ));
            }
            let tail = (total_bits % 8) as u8;
            if tail != 0 {
                let last = *section.bits.last().unwrap();
                if last & ((1u8 << (8 - tail)) - 1) != 0 {
                    return Err(Error::Corrupt("nonzero padding bits".into()));
                }
            }
            Ok(tokens)
        }
    }
}

fn expand(container: &Container) -> Result<Vec<u8>> {
    let tokens = decode_tokens(container)?;
    let empty = Dictionary::empty();
    let predefined = container
        .predefined
        .as_ref()
        .map_or(&empty, |p| p.dictionary());
    crate::engine::detokenize(&tokens, predefined, &container.dynamic)
}

/// Decompress a container, verifying length and CRC-32 of the result.
pub fn decompress(bytes: &[u8]) -> Result<Vec<u8>> {
    let container = read_container(bytes)?;
    let out = expand(&container)?;
    if out.len() as u64 != container.header.original_length {
        return Err(Error::Integrity(format!(
            "decompressed length {} does not match header {}",
            out.len(),
            container.header.original_length
        )));
    }
    let computed = crc32(&out);
    if computed != container.header.original_crc32 {
        return Err(Error::Integrity(format!(
            "crc32 mismatch: stored {:08x}, computed {computed:08x}",
            container.header.original_crc32
        )));
    }
    Ok(out)
}

/// Metadata and integrity summary of a container.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyReport {
    pub algorithm: Algorithm,
    pub original_length: u64,
    pub original_crc32: u32,
    pub predefined_entries: usize,
    pub dynamic_entries: usize,
    pub payload_size: usize,
    pub crc_ok: bool,
}

/// Decompress internally, discard the output, and report what was found.
/// Structural corruption still errors; a failed length or CRC comparison is
/// reported as `crc_ok: false`.
pub fn verify(bytes: &[u8]) -> Result<VerifyReport> {
    let container = read_container(bytes)?;
    let out = expand(&container)?;
    let crc_ok = out.len() as u64 == container.header.original_length
        && crc32(&out) == container.header.original_crc32;
    Ok(VerifyReport {
        algorithm: container.header.algorithm,
        original_length: container.header.original_length,
        original_crc32: container.header.original_crc32,
        predefined_entries: container.predefined_len(),
        dynamic_entries: container.dynamic.len(),
        payload_size: container.payload.stored_size(),
        crc_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dict_builder::{analyze_corpus, build_predefined};
    use proptest::prelude::*;

    fn default_cfg() -> EngineConfig {
        EngineConfig::default()
    }

    #[test]
    fn empty_input_v1_is_the_20_byte_fixture() {
        let bytes = compress_v1(b"", &default_cfg()).unwrap();
        assert_eq!(bytes.len(), 20);
        assert_eq!(decompress(&bytes).unwrap(), b"");
    }

    #[test]
    fn repetitive_input_compresses_below_ten_percent() {
        let data: Vec<u8> = b"ab".repeat(32_768);
        let bytes = compress_v1(&data, &default_cfg()).unwrap();
        assert!(bytes.len() < 6_554, "got {} bytes", bytes.len());
        assert_eq!(decompress(&bytes).unwrap(), data);
    }

    #[test]
    fn every_stored_dynamic_pattern_is_used() {
        let data = b"xabxabxab the xab pattern shadows ab and bx".to_vec();
        let cfg = EngineConfig::new(2, 3, 16).unwrap();
        let (dynamic, tokens) = v1_token_stream(&data, &cfg).unwrap();
        let mut used = vec![false; dynamic.len()];
        for t in &tokens {
            if let Token::Code(id) = t {
                used[*id as usize - 256] = true;
            }
        }
        assert!(!dynamic.is_empty());
        assert!(used.iter().all(|&u| u));
    }

    #[test]
    fn v2_selects_residual_patterns() {
        let pd = PredefinedDictionary::new(
            3,
            4,
            Dictionary::new(vec![b"<a>".to_vec()]).unwrap(),
        )
        .unwrap();
        let cfg = EngineConfig::new(3, 4, 1).unwrap();
        let (dynamic, _) = v2_token_stream(b"<a>x</a><a>y</a>", &cfg, &pd).unwrap();
        assert_eq!(dynamic.entries(), &[b"</a>".to_vec()]);
    }

    #[test]
    fn v2_with_full_coverage_selects_nothing() {
        let pd = PredefinedDictionary::new(
            3,
            32,
            Dictionary::new(vec![b"abc".to_vec()]).unwrap(),
        )
        .unwrap();
        let cfg = default_cfg();
        let (dynamic, tokens) = v2_token_stream(b"abcabcabc", &cfg, &pd).unwrap();
        assert!(dynamic.is_empty());
        assert_eq!(tokens, vec![Token::Code(256); 3]);
    }

    #[test]
    fn v2_with_empty_dictionary_equals_v1() {
        let pd = PredefinedDictionary::new(3, 32, Dictionary::empty()).unwrap();
        let cfg = default_cfg();
        for data in [
            &b""[..],
            b"<x>1</x><x>2</x><x>3</x>",
            b"no repeats here at all",
        ] {
            let v1 = v1_token_stream(data, &cfg).unwrap();
            let v2 = v2_token_stream(data, &cfg, &pd).unwrap();
            assert_eq!(v1, v2);
        }
    }

    #[test]
    fn v2_rejects_incompatible_bounds() {
        let pd = PredefinedDictionary::new(3, 32, Dictionary::empty()).unwrap();
        let cfg = EngineConfig::new(4, 32, 8).unwrap();
        assert!(matches!(
            v2_token_stream(b"xx", &cfg, &pd),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn hybrid_empty_input() {
        let bytes = compress_hybrid(b"", &default_cfg(), None).unwrap();
        let container = read_container(&bytes).unwrap();
        match &container.payload {
            Payload::Huffman(section) => {
                assert_eq!(section.token_count, 0);
                assert_eq!(section.lengths.alphabet_size(), 256);
                assert!(section.bits.is_empty());
            }
            _ => panic!("expected huffman payload"),
        }
        assert_eq!(decompress(&bytes).unwrap(), b"");
    }

    #[test]
    fn hybrid_single_symbol_stream() {
        let cfg = EngineConfig::new(2, 3, 1).unwrap();
        let bytes = compress_hybrid(b"ababab", &cfg, None).unwrap();
        let container = read_container(&bytes).unwrap();
        match &container.payload {
            Payload::Huffman(section) => {
                assert_eq!(section.token_count, 3);
                assert_eq!(section.lengths.alphabet_size(), 257);
                // Three one-bit codes pack into a single payload byte.
                assert_eq!(section.bits, vec![0x00]);
            }
            _ => panic!("expected huffman payload"),
        }
        assert_eq!(decompress(&bytes).unwrap(), b"ababab");
    }

    #[test]
    fn unknown_algorithm_byte_is_rejected() {
        let mut bytes = compress_v1(b"abc", &default_cfg()).unwrap();
        bytes[4] = 0x09;
        assert!(matches!(
            decompress(&bytes),
            Err(Error::UnknownAlgorithm(0x09))
        ));
    }

    #[test]
    fn verify_reports_metadata() {
        let report = verify(&compress_v1(b"abc", &default_cfg()).unwrap()).unwrap();
        assert_eq!(report.algorithm, Algorithm::V1);
        assert_eq!(report.original_length, 3);
        assert!(report.crc_ok);
        assert_eq!(report.predefined_entries, 0);

        let corpus = [b"<a>x</a><a>y</a>".as_slice()];
        let cfg = default_cfg();
        let pd = build_predefined(&analyze_corpus(&corpus, &cfg), 4, &cfg).unwrap();
        let bytes = compress_hybrid(b"<a>q</a><a>r</a>", &cfg, Some(&pd)).unwrap();
        let report = verify(&bytes).unwrap();
        assert_eq!(report.algorithm, Algorithm::V2Huffman);
        assert_eq!(report.predefined_entries, pd.dictionary().len());
        assert!(report.crc_ok);
    }

    #[test]
    fn truncated_container_fails_verify() {
        let bytes = compress_v1(b"abcabcabc", &default_cfg()).unwrap();
        assert!(verify(&bytes[..10]).is_err());
    }

    #[test]
    fn flipped_payload_bit_never_returns_wrong_bytes() {
        let data = b"<item a=\"1\"/><item a=\"2\"/><item a=\"3\"/>".to_vec();
        for compressed in [
            compress_v1(&data, &default_cfg()).unwrap(),
            compress_hybrid(&data, &default_cfg(), None).unwrap(),
        ] {
            for bit in 0..8 {
                let mut broken = compressed.clone();
                let last = broken.len() - 1;
                broken[last] ^= 1 << bit;
                match decompress(&broken) {
                    Ok(out) => assert_eq!(out, data),
                    Err(e) => assert!(e.is_corruption(), "unexpected error class: {e}"),
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn all_four_pipelines_round_trip(
            data in proptest::collection::vec(any::<u8>(), 0..2048),
            seed_corpus in proptest::collection::vec(proptest::collection::vec(0u8..16, 64..256), 1..3),
        ) {
            let cfg = EngineConfig::new(2, 8, 32).unwrap();
            let pd = build_predefined(&analyze_corpus(&seed_corpus, &cfg), 16, &cfg).unwrap();

            for bytes in [
                compress_v1(&data, &cfg).unwrap(),
                compress_v2(&data, &cfg, &pd).unwrap(),
                compress_hybrid(&data, &cfg, None).unwrap(),
                compress_hybrid(&data, &cfg, Some(&pd)).unwrap(),
            ] {
                prop_assert_eq!(&decompress(&bytes).unwrap(), &data);
            }
        }
    }
}
