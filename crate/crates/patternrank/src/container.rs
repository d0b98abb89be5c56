//! Bit-exact serialization of compressed artifacts and dictionary files.
//!
//! Container layout (`.prk`):
//!
//! ```text
//! "PRK1" | algorithm u8 | flags u8 (0) | original_length u64 LE | crc32 u32 LE
//! [v2 family] min_len u8 | max_len u8 | dictionary | fnv1a64(dictionary) u64 LE
//! dynamic dictionary
//! [escape family]  escape-encoded payload to end of file
//! [huffman family] token_count u64 LE | alphabet_size u32 LE |
//!                  code length per symbol u8 | bitstream to end of file
//! ```
//!
//! A dictionary serializes as entry count u16 LE, then per entry a 1-byte
//! length followed by the pattern bytes, in ranking order. The predefined
//! dictionary file (`.prd`) is "PRD1", the config echo, the dictionary, and
//! its 64-bit FNV-1a hash; the same block minus the magic is inlined into
//! v2-family containers so decompression is self-contained.

use std::fmt;

use crate::error::{Error, Result};
use crate::huffman::CodeLengthTable;
use crate::model::{Dictionary, Token, LITERAL_SYMBOLS, MAX_PATTERN_LEN, MAX_PATTERN_SYMBOLS};

pub const CONTAINER_MAGIC: [u8; 4] = *b"PRK1";
pub const DICTIONARY_MAGIC: [u8; 4] = *b"PRD1";

/// Escape byte introducing a pattern code (or an escaped literal) in the
/// standalone payload encoding. Rare in XML text; worst-case expansion 2x.
pub const ESCAPE_BYTE: u8 = 0x1B;

/// CRC-32 (IEEE polynomial 0xEDB88320, init and final xor 0xFFFFFFFF) of the
/// original data; authoritative for end-to-end verification.
pub fn crc32(data: &[u8]) -> u32 {
    crc32fast::hash(data)
}

const FNV_OFFSET_BASIS: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// 64-bit FNV-1a, used as the predefined dictionary's content hash.
pub fn fnv1a64(data: &[u8]) -> u64 {
    let mut hash = FNV_OFFSET_BASIS;
    for &byte in data {
        hash ^= byte as u64;
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    hash
}

/// The four compression pipelines a container can carry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algorithm {
    V1 = 0x01,
    V2 = 0x02,
    V1Huffman = 0x03,
    V2Huffman = 0x04,
}

impl Algorithm {
    pub fn from_byte(byte: u8) -> Option<Self> {
        match byte {
            0x01 => Some(Algorithm::V1),
            0x02 => Some(Algorithm::V2),
            0x03 => Some(Algorithm::V1Huffman),
            0x04 => Some(Algorithm::V2Huffman),
            _ => None,
        }
    }

    pub fn byte(self) -> u8 {
        self as u8
    }

    /// v2 family: carries an inlined predefined dictionary.
    pub fn uses_predefined(self) -> bool {
        matches!(self, Algorithm::V2 | Algorithm::V2Huffman)
    }

    /// Hybrid family: payload is a Huffman section, not escape bytes.
    pub fn uses_huffman(self) -> bool {
        matches!(self, Algorithm::V1Huffman | Algorithm::V2Huffman)
    }

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::V1 => "v1",
            Algorithm::V2 => "v2",
            Algorithm::V1Huffman => "v1h",
            Algorithm::V2Huffman => "v2h",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Corpus-derived dictionary with the extraction bounds it was built under.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PredefinedDictionary {
    min_len: usize,
    max_len: usize,
    dict: Dictionary,
}

impl PredefinedDictionary {
    pub fn new(min_len: usize, max_len: usize, dict: Dictionary) -> Result<Self> {
        if min_len < 2 || min_len > max_len || max_len > MAX_PATTERN_LEN {
            return Err(Error::Config(format!(
                "invalid dictionary bounds {min_len}..={max_len}"
            )));
        }
        for entry in dict.iter() {
            if entry.len() < min_len || entry.len() > max_len {
                return Err(Error::Config(format!(
                    "dictionary entry length {} outside bounds {min_len}..={max_len}",
                    entry.len()
                )));
            }
        }
        Ok(Self {
            min_len,
            max_len,
            dict,
        })
    }

    pub fn min_len(&self) -> usize {
        self.min_len
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn dictionary(&self) -> &Dictionary {
        &self.dict
    }

    /// FNV-1a of the serialized dictionary body, as stored on disk.
    pub fn content_hash(&self) -> u64 {
        fnv1a64(&serialize_dictionary(&self.dict))
    }

    /// Serialize to the standalone `.prd` file format.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&DICTIONARY_MAGIC);
        self.write_block(&mut out);
        out
    }

    /// Parse the standalone `.prd` file format.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut reader = Reader::new(bytes);
        let magic = reader.take(4, "dictionary file magic")?;
        if magic != DICTIONARY_MAGIC {
            return Err(Error::BadMagic {
                context: "dictionary file",
                expected: DICTIONARY_MAGIC,
                found: [magic[0], magic[1], magic[2], magic[3]],
            });
        }
        let pd = Self::read_block(&mut reader)?;
        if !reader.is_empty() {
            return Err(Error::Corrupt(
                "trailing bytes after dictionary file".into(),
            ));
        }
        Ok(pd)
    }

    /// Config echo, dictionary, and content hash — the form inlined into
    /// v2-family containers.
    fn write_block(&self, out: &mut Vec<u8>) {
        out.push(self.min_len as u8);
        out.push(self.max_len as u8);
        let body = serialize_dictionary(&self.dict);
        out.extend_from_slice(&body);
        out.extend_from_slice(&fnv1a64(&body).to_le_bytes());
    }

    fn read_block(reader: &mut Reader<'_>) -> Result<Self> {
        let min_len = reader.u8("dictionary min length")? as usize;
        let max_len = reader.u8("dictionary max length")? as usize;
        if min_len < 2 || min_len > max_len {
            return Err(Error::Corrupt(format!(
                "invalid dictionary bounds {min_len}..={max_len}"
            )));
        }
        let body_start = reader.pos;
        let dict = parse_dictionary(reader)?;
        let body = &reader.buf[body_start..reader.pos];
        let computed = fnv1a64(body);
        let stored = reader.u64("dictionary content hash")?;
        if stored != computed {
            return Err(Error::DictHashMismatch { stored, computed });
        }
        for entry in dict.iter() {
            if entry.len() < min_len || entry.len() > max_len {
                return Err(Error::Corrupt(format!(
                    "dictionary entry length {} outside bounds {min_len}..={max_len}",
                    entry.len()
                )));
            }
        }
        Self::new(min_len, max_len, dict)
    }
}

/// Entry count, then length-prefixed patterns in ranking order.
pub fn serialize_dictionary(dict: &Dictionary) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(&(dict.len() as u16).to_le_bytes());
    for entry in dict.iter() {
        out.push(entry.len() as u8);
        out.extend_from_slice(entry);
    }
    out
}

fn parse_dictionary(reader: &mut Reader<'_>) -> Result<Dictionary> {
    let count = reader.u16("dictionary entry count")? as usize;
    let mut entries = Vec::with_capacity(count.min(4096));
    for _ in 0..count {
        let len = reader.u8("dictionary entry length")? as usize;
        if len == 0 {
            return Err(Error::Corrupt("zero-length dictionary entry".into()));
        }
        entries.push(reader.take(len, "dictionary entry")?.to_vec());
    }
    Dictionary::new(entries).map_err(|e| Error::Corrupt(e.to_string()))
}

fn leb128_encode(mut value: u32, out: &mut Vec<u8>) {
    loop {
        let mut byte = (value & 0x7F) as u8;
        value >>= 7;
        if value != 0 {
            byte |= 0x80;
        }
        out.push(byte);
        if value == 0 {
            break;
        }
    }
}

/// Pattern indices fit comfortably in three varint bytes; anything longer is
/// corruption.
fn leb128_decode(bytes: &[u8]) -> Result<(u32, usize)> {
    let mut value = 0u32;
    for (i, &byte) in bytes.iter().take(3).enumerate() {
        value |= ((byte & 0x7F) as u32) << (7 * i);
        if byte & 0x80 == 0 {
            return Ok((value, i + 1));
        }
    }
    if bytes.len() < 3 {
        Err(Error::Corrupt("truncated escape sequence".into()))
    } else {
        Err(Error::Corrupt("escape varint overflow".into()))
    }
}

/// Standalone byte representation of a token stream: literals pass through,
/// the escape byte doubles as its own marker, and codes become the escape
/// byte plus a varint of the dictionary index plus one.
pub fn escape_encode(tokens: &[Token]) -> Vec<u8> {
    let mut out = Vec::with_capacity(tokens.len());
    for token in tokens {
        match token {
            Token::Literal(ESCAPE_BYTE) => {
                out.push(ESCAPE_BYTE);
                out.push(0x00);
            }
            Token::Literal(b) => out.push(*b),
            Token::Code(id) => {
                let index = *id as u32 - LITERAL_SYMBOLS as u32;
                out.push(ESCAPE_BYTE);
                leb128_encode(index + 1, &mut out);
            }
        }
    }
    out
}

/// Exact inverse of [`escape_encode`].
pub fn escape_decode(bytes: &[u8], dict_size: usize) -> Result<Vec<Token>> {
    let mut tokens = Vec::with_capacity(bytes.len());
    let mut pos = 0;
    while pos < bytes.len() {
        let byte = bytes[pos];
        pos += 1;
        if byte != ESCAPE_BYTE {
            tokens.push(Token::Literal(byte));
            continue;
        }
        let (value, used) = leb128_decode(&bytes[pos..])?;
        pos += used;
        if value == 0 {
            tokens.push(Token::Literal(ESCAPE_BYTE));
        } else {
            let index = (value - 1) as usize;
            if index >= dict_size {
                return Err(Error::Corrupt(format!(
                    "escaped pattern index {index} outside dictionary of {dict_size} entries"
                )));
            }
            tokens.push(Token::Code((LITERAL_SYMBOLS + index) as u16));
        }
    }
    Ok(tokens)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Header {
    pub algorithm: Algorithm,
    pub original_length: u64,
    pub original_crc32: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HuffmanSection {
    pub token_count: u64,
    pub lengths: CodeLengthTable,
    pub bits: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Payload {
    Escape(Vec<u8>),
    Huffman(HuffmanSection),
}

impl Payload {
    /// Bytes the payload occupies on disk, section fields included.
    pub fn stored_size(&self) -> usize {
        match self {
            Payload::Escape(bytes) => bytes.len(),
            Payload::Huffman(section) => 8 + 4 + section.lengths.alphabet_size() + section.bits.len(),
        }
    }
}

/// A fully parsed (or about-to-be-written) container.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Container {
    pub header: Header,
    pub predefined: Option<PredefinedDictionary>,
    pub dynamic: Dictionary,
    pub payload: Payload,
}

impl Container {
    pub fn predefined_len(&self) -> usize {
        self.predefined.as_ref().map_or(0, |p| p.dictionary().len())
    }
}

fn check_consistency(container: &Container) -> Result<()> {
    let algo = container.header.algorithm;
    match (algo.uses_predefined(), container.predefined.is_some()) {
        (true, false) => {
            return Err(Error::Usage(format!(
                "algorithm {algo} requires a predefined dictionary"
            )))
        }
        (false, true) => {
            return Err(Error::Usage(format!(
                "algorithm {algo} does not carry a predefined dictionary"
            )))
        }
        _ => {}
    }
    let total = container.predefined_len() + container.dynamic.len();
    if total > MAX_PATTERN_SYMBOLS {
        return Err(Error::Config(format!(
            "combined dictionaries hold {total} patterns, exceeding {MAX_PATTERN_SYMBOLS}"
        )));
    }
    match (&container.payload, algo.uses_huffman()) {
        (Payload::Escape(_), true) | (Payload::Huffman(_), false) => {
            return Err(Error::Usage(format!(
                "payload kind does not match algorithm {algo}"
            )))
        }
        (Payload::Huffman(section), true) => {
            if section.lengths.alphabet_size() != LITERAL_SYMBOLS + total {
                return Err(Error::Usage(
                    "code length table does not cover the symbol space".into(),
                ));
            }
            if section.token_count == 0
                && (section.lengths.lengths.iter().any(|&l| l != 0) || !section.bits.is_empty())
            {
                return Err(Error::Usage(
                    "empty token stream must carry no code data".into(),
                ));
            }
        }
        _ => {}
    }
    Ok(())
}

/// Serialize a container to its on-disk byte layout.
pub fn write_container(container: &Container) -> Result<Vec<u8>> {
    check_consistency(container)?;
    let mut out = Vec::new();
    out.extend_from_slice(&CONTAINER_MAGIC);
    out.push(container.header.algorithm.byte());
    out.push(0x00); // reserved flags
    out.extend_from_slice(&container.header.original_length.to_le_bytes());
    out.extend_from_slice(&container.header.original_crc32.to_le_bytes());
    if let Some(predefined) = &container.predefined {
        predefined.write_block(&mut out);
    }
    out.extend_from_slice(&serialize_dictionary(&container.dynamic));
    match &container.payload {
        Payload::Escape(bytes) => out.extend_from_slice(bytes),
        Payload::Huffman(section) => {
            out.extend_from_slice(&section.token_count.to_le_bytes());
            out.extend_from_slice(&(section.lengths.alphabet_size() as u32).to_le_bytes());
            out.extend_from_slice(&section.lengths.lengths);
            out.extend_from_slice(&section.bits);
        }
    }
    Ok(out)
}

/// Parse and structurally validate a container. The payload is not decoded
/// here; integrity against the original bytes is the decompressor's job.
pub fn read_container(bytes: &[u8]) -> Result<Container> {
    let mut reader = Reader::new(bytes);
    let magic = reader.take(4, "container magic")?;
    if magic != CONTAINER_MAGIC {
        return Err(Error::BadMagic {
            context: "container",
            expected: CONTAINER_MAGIC,
            found: [magic[0], magic[1], magic[2], magic[3]],
        });
    }
    let algo_byte = reader.u8("algorithm byte")?;
    let algorithm = Algorithm::from_byte(algo_byte).ok_or(Error::UnknownAlgorithm(algo_byte))?;
    let flags = reader.u8("flags byte")?;
    if flags != 0 {
        return Err(Error::Corrupt(format!(
            "reserved flags byte must be zero, found 0x{flags:02x}"
        )));
    }
    let original_length = reader.u64("original length")?;
    let original_crc32 = reader.u32("original crc32")?;

    let predefined = if algorithm.uses_predefined() {
        Some(PredefinedDictionary::read_block(&mut reader)?)
    } else {
        None
    };
    let dynamic = parse_dictionary(&mut reader)?;
    let predefined_count = predefined.as_ref().map_or(0, |p| p.dictionary().len());
    let total = predefined_count + dynamic.len();
    if total > MAX_PATTERN_SYMBOLS {
        return Err(Error::Corrupt(format!(
            "combined dictionaries hold {total} patterns, exceeding {MAX_PATTERN_SYMBOLS}"
        )));
    }

    let payload = if algorithm.uses_huffman() {
        let token_count = reader.u64("token count")?;
        if token_count > original_length {
            return Err(Error::Corrupt(format!(
                "token count {token_count} exceeds original length {original_length}"
            )));
        }
        let alphabet_size = reader.u32("alphabet size")? as usize;
        if alphabet_size != LITERAL_SYMBOLS + total {
            return Err(Error::Corrupt(format!(
                "alphabet size {alphabet_size} does not match dictionaries ({})",
                LITERAL_SYMBOLS + total
            )));
        }
        let lengths = CodeLengthTable::new(reader.take(alphabet_size, "code length table")?.to_vec());
        let bits = reader.rest().to_vec();
        if token_count == 0 && (lengths.lengths.iter().any(|&l| l != 0) || !bits.is_empty()) {
            return Err(Error::Corrupt(
                "empty token stream carries code data".into(),
            ));
        }
        Payload::Huffman(HuffmanSection {
            token_count,
            lengths,
            bits,
        })
    } else {
        Payload::Escape(reader.rest().to_vec())
    };

    Ok(Container {
        header: Header {
            algorithm,
            original_length,
            original_crc32,
        },
        predefined,
        dynamic,
        payload,
    })
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0 }
    }

    fn take(&mut self, n: usize, context: &'static str) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(Error::Truncated(context));
        }
        let slice = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    fn u8(&mut self, context: &'static str) -> Result<u8> {
        Ok(self.take(1, context)?[0])
    }

    fn u16(&mut self, context: &'static str) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2, context)?.try_into().unwrap()))
    }

    fn u32(&mut self, context: &'static str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, context)?.try_into().unwrap()))
    }

    fn u64(&mut self, context: &'static str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, context)?.try_into().unwrap()))
    }

    fn rest(&mut self) -> &'a [u8] {
        let slice = &self.buf[self.pos..];
        self.pos = self.buf.len();
        slice
    }

    fn is_empty(&self) -> bool {
        self.pos == self.buf.len()
    }
}
