//! Canonical Huffman coding over the extended token alphabet.
//!
//! Code lengths come from the standard two-at-a-time merge with a
//! deterministic tie-break (weight ascending, then lowest contained symbol
//! id), and codes are assigned canonically so the decoder can rebuild the
//! exact codebook from the length table alone. The bitstream is MSB-first
//! within each byte, zero-padded at the end; termination is external (the
//! container stores the token count), so no sentinel symbol is spent.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::model::Token;

/// Bit length per symbol id; 0 marks an unused symbol.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodeLengthTable {
    pub lengths: Vec<u8>,
}

impl CodeLengthTable {
    pub fn new(lengths: Vec<u8>) -> Self {
        Self { lengths }
    }

    pub fn zeros(alphabet_size: usize) -> Self {
        Self {
            lengths: vec![0; alphabet_size],
        }
    }

    pub fn alphabet_size(&self) -> usize {
        self.lengths.len()
    }

    /// Used symbols as (length, symbol id), sorted for canonical assignment.
    fn used_symbols(&self) -> Vec<(u8, u32)> {
        let mut used: Vec<(u8, u32)> = self
            .lengths
            .iter()
            .enumerate()
            .filter(|(_, &len)| len > 0)
            .map(|(sym, &len)| (len, sym as u32))
            .collect();
        used.sort_unstable();
        used
    }
}

const MAX_CODE_LEN: u8 = 63;

/// Strict completeness check: with two or more used symbols the Kraft sum
/// must be exactly one; a lone symbol must have length one.
fn check_lengths(used: &[(u8, u32)]) -> Result<()> {
    if used.is_empty() {
        return Ok(());
    }
    if let Some(&(len, sym)) = used.iter().find(|&&(len, _)| len > MAX_CODE_LEN) {
        return Err(Error::Corrupt(format!(
            "code length {len} for symbol {sym} exceeds {MAX_CODE_LEN}"
        )));
    }
    if used.len() == 1 {
        if used[0].0 != 1 {
            return Err(Error::Corrupt(format!(
                "single used symbol must have code length 1, found {}",
                used[0].0
            )));
        }
        return Ok(());
    }
    let kraft: u128 = used
        .iter()
        .map(|&(len, _)| 1u128 << (MAX_CODE_LEN - len))
        .sum();
    if kraft != 1u128 << MAX_CODE_LEN {
        return Err(Error::Corrupt(
            "code lengths do not form a complete prefix code (Kraft sum != 1)".into(),
        ));
    }
    Ok(())
}

/// Canonically assigned (code value, bit length) per used symbol.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Codebook {
    entries: Vec<(u64, u8)>,
}

impl Codebook {
    pub fn code(&self, symbol: u16) -> Option<(u64, u8)> {
        match self.entries.get(symbol as usize) {
            Some(&(_, 0)) | None => None,
            Some(&entry) => Some(entry),
        }
    }

    pub fn alphabet_size(&self) -> usize {
        self.entries.len()
    }
}

/// Exact occurrence count per symbol id.
pub fn count_frequencies(tokens: &[Token], alphabet_size: usize) -> Result<Vec<u64>> {
    let mut freqs = vec![0u64; alphabet_size];
    for token in tokens {
        let id = token.symbol_id() as usize;
        if id >= alphabet_size {
            return Err(Error::Internal("token symbol outside alphabet"));
        }
        freqs[id] += 1;
    }
    Ok(freqs)
}

/// Optimal code lengths for the given frequencies.
///
/// The merge queue orders nodes by (weight ascending, lowest contained
/// symbol id ascending), which is a total order because live nodes own
/// disjoint symbol sets. A single used symbol gets length 1 so the decoder
/// loop stays uniform.
pub fn build_code_lengths(freqs: &[u64]) -> Result<CodeLengthTable> {
    let used: Vec<u32> = freqs
        .iter()
        .enumerate()
        .filter(|(_, &f)| f > 0)
        .map(|(sym, _)| sym as u32)
        .collect();
    let mut lengths = vec![0u8; freqs.len()];
    match used.len() {
        0 => return Err(Error::Internal("no symbol frequencies to code")),
        1 => {
            lengths[used[0] as usize] = 1;
            return Ok(CodeLengthTable::new(lengths));
        }
        _ => {}
    }

    // Arena of merge nodes; the first `used.len()` are leaves.
    let mut children: Vec<Option<(u32, u32)>> = vec![None; used.len()];
    let mut heap: BinaryHeap<Reverse<(u64, u32, u32)>> = used
        .iter()
        .enumerate()
        .map(|(i, &sym)| Reverse((freqs[sym as usize], sym, i as u32)))
        .collect();
    while heap.len() > 1 {
        let Reverse((wa, ma, a)) = heap.pop().unwrap();
        let Reverse((wb, mb, b)) = heap.pop().unwrap();
        let node = children.len() as u32;
        children.push(Some((a, b)));
        heap.push(Reverse((wa + wb, ma.min(mb), node)));
    }
    let Reverse((_, _, root)) = heap.pop().unwrap();

    let mut stack = vec![(root, 0u32)];
    while let Some((node, depth)) = stack.pop() {
        match children[node as usize] {
            Some((a, b)) => {
                stack.push((a, depth + 1));
                stack.push((b, depth + 1));
            }
            None => {
                if depth > MAX_CODE_LEN as u32 {
                    return Err(Error::Internal("huffman code length exceeds 63 bits"));
                }
                lengths[used[node as usize] as usize] = depth as u8;
            }
        }
    }
    Ok(CodeLengthTable::new(lengths))
}

/// Canonical code assignment: codes start at zero, increment per symbol in
/// (length, symbol id) order, and shift left at each length increase.
pub fn canonicalize(table: &CodeLengthTable) -> Result<Codebook> {
    let used = table.used_symbols();
    check_lengths(&used)?;
    let mut entries = vec![(0u64, 0u8); table.alphabet_size()];
    let mut code = 0u64;
    let mut prev_len = used.first().map(|&(len, _)| len).unwrap_or(0);
    for &(len, sym) in &used {
        code <<= len - prev_len;
        entries[sym as usize] = (code, len);
        code += 1;
        prev_len = len;
    }
    Ok(Codebook { entries })
}

struct BitWriter {
    buf: Vec<u8>,
    current: u8,
    filled: u8,
}

impl BitWriter {
    fn new() -> Self {
        Self {
            buf: Vec::new(),
            current: 0,
            filled: 0,
        }
    }

    fn write_code(&mut self, code: u64, len: u8) {
        for i in (0..len).rev() {
            let bit = ((code >> i) & 1) as u8;
            self.current = (self.current << 1) | bit;
            self.filled += 1;
            if self.filled == 8 {
                self.buf.push(self.current);
                self.current = 0;
                self.filled = 0;
            }
        }
    }

    fn finish(mut self) -> Vec<u8> {
        if self.filled > 0 {
            self.buf.push(self.current << (8 - self.filled));
        }
        self.buf
    }
}

struct BitReader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> BitReader<'a> {
    fn new(data: &'a [u8]) -> Self {
        Self { data, pos: 0 }
    }

    fn read_bit(&mut self) -> Option<u8> {
        let byte = *self.data.get(self.pos / 8)?;
        let bit = (byte >> (7 - (self.pos % 8))) & 1;
        self.pos += 1;
        Some(bit)
    }
}

/// Concatenated canonical codes, MSB-first, final partial byte zero-padded.
pub fn encode(tokens: &[Token], codebook: &Codebook) -> Result<Vec<u8>> {
    let mut writer = BitWriter::new();
    for token in tokens {
        let (code, len) = codebook
            .code(token.symbol_id())
            .ok_or(Error::Internal("symbol without an assigned code"))?;
        writer.write_code(code, len);
    }
    Ok(writer.finish())
}

/// Canonical decoding state per code length: the first code value and the
/// range of symbols assigned at that length.
struct CanonicalDecoder {
    first_code: Vec<u64>,
    first_index: Vec<usize>,
    counts: Vec<usize>,
    symbols: Vec<u32>,
    max_len: u8,
}

impl CanonicalDecoder {
    fn new(table: &CodeLengthTable) -> Result<Self> {
        let used = table.used_symbols();
        check_lengths(&used)?;
        let max_len = used.last().map(|&(len, _)| len).unwrap_or(0);
        let mut counts = vec![0usize; max_len as usize + 1];
        for &(len, _) in &used {
            counts[len as usize] += 1;
        }
        let mut first_code = vec![0u64; max_len as usize + 1];
        let mut first_index = vec![0usize; max_len as usize + 1];
        let mut code = 0u64;
        let mut index = 0usize;
        for len in 1..=max_len as usize {
            code <<= 1;
            first_code[len] = code;
            first_index[len] = index;
            code += counts[len] as u64;
            index += counts[len];
        }
        Ok(Self {
            first_code,
            first_index,
            counts,
            symbols: used.iter().map(|&(_, sym)| sym).collect(),
            max_len,
        })
    }

    fn decode_symbol(&self, reader: &mut BitReader<'_>) -> Result<u32> {
        let mut code = 0u64;
        for len in 1..=self.max_len as usize {
            let bit = reader
                .read_bit()
                .ok_or_else(|| Error::Corrupt("bitstream exhausted mid-symbol".into()))?;
            code = (code << 1) | bit as u64;
            let count = self.counts[len] as u64;
            if count > 0 && code >= self.first_code[len] && code - self.first_code[len] < count {
                let offset = (code - self.first_code[len]) as usize;
                return Ok(self.symbols[self.first_index[len] + offset]);
            }
        }
        Err(Error::Corrupt("invalid prefix in bitstream".into()))
    }
}

/// Decode exactly `token_count` symbols from a bitstream produced by
/// [`encode`] with the canonical codebook of `table`.
pub fn decode(bits: &[u8], table: &CodeLengthTable, token_count: usize) -> Result<Vec<Token>> {
    if token_count == 0 {
        return Ok(Vec::new());
    }
    let decoder = CanonicalDecoder::new(table)?;
    if decoder.symbols.is_empty() {
        return Err(Error::Corrupt(
            "no code lengths but a nonzero token count".into(),
        ));
    }
    let mut reader = BitReader::new(bits);
    let mut tokens = Vec::with_capacity(token_count);
    for _ in 0..token_count {
        let symbol = decoder.decode_symbol(&mut reader)?;
        tokens.push(Token::from_symbol_id(symbol as u16));
    }
    Ok(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn table(pairs: &[(usize, u8)], alphabet: usize) -> CodeLengthTable {
        let mut lengths = vec![0u8; alphabet];
        for &(sym, len) in pairs {
            lengths[sym] = len;
        }
        CodeLengthTable::new(lengths)
    }

    fn freqs(pairs: &[(usize, u64)], alphabet: usize) -> Vec<u64> {
        let mut out = vec![0u64; alphabet];
        for &(sym, f) in pairs {
            out[sym] = f;
        }
        out
    }

    /// Exhaustive oracle: minimum total bits over all complete prefix codes,
    /// found by enumerating every length assignment with Kraft sum 1.
    fn oracle_optimal_cost(active: &[u64]) -> u64 {
        fn rec(freqs: &[u64], lens: &mut Vec<u8>, best: &mut u64) {
            if lens.len() == freqs.len() {
                let kraft: u128 = lens.iter().map(|&l| 1u128 << (32 - l)).sum();
                if kraft == 1u128 << 32 {
                    let cost: u64 = lens
                        .iter()
                        .zip(freqs)
                        .map(|(&l, &f)| l as u64 * f)
                        .sum();
                    *best = (*best).min(cost);
                }
                return;
            }
            let max = (freqs.len() - 1).max(1) as u8;
            for l in 1..=max {
                lens.push(l);
                rec(freqs, lens, best);
                lens.pop();
            }
        }
        let mut best = u64::MAX;
        rec(active, &mut Vec::new(), &mut best);
        best
    }

    #[test]
    fn count_frequencies_examples() {
        let tokens = [Token::Literal(97), Token::Literal(97), Token::Code(256)];
        let got = count_frequencies(&tokens, 257).unwrap();
        assert_eq!(got[97], 2);
        assert_eq!(got[256], 1);
        assert_eq!(got.iter().sum::<u64>(), 3);

        assert_eq!(count_frequencies(&[], 256).unwrap(), vec![0; 256]);

        let tokens = [Token::Code(256), Token::Code(256), Token::Code(256)];
        let got = count_frequencies(&tokens, 257).unwrap();
        assert_eq!(got[256], 3);

        assert!(count_frequencies(&[Token::Code(300)], 257).is_err());
    }

    #[test]
    fn code_lengths_skewed() {
        // A=5, B=2, C=1, D=1 over symbols 0..4.
        let f = freqs(&[(0, 5), (1, 2), (2, 1), (3, 1)], 4);
        let table = build_code_lengths(&f).unwrap();
        assert_eq!(table.lengths, vec![1, 2, 3, 3]);
        let cost: u64 = table
            .lengths
            .iter()
            .zip(&f)
            .map(|(&l, &f)| l as u64 * f)
            .sum();
        assert_eq!(cost, oracle_optimal_cost(&f));
        assert_eq!(cost, 15);
    }

    #[test]
    fn code_lengths_edge_cases() {
        let table = build_code_lengths(&freqs(&[(3, 7)], 5)).unwrap();
        assert_eq!(table.lengths, vec![0, 0, 0, 1, 0]);

        let table = build_code_lengths(&freqs(&[(0, 1), (1, 1)], 2)).unwrap();
        assert_eq!(table.lengths, vec![1, 1]);

        assert!(build_code_lengths(&[0, 0, 0]).is_err());
    }

    #[test]
    fn canonical_assignment() {
        let book = canonicalize(&table(&[(0, 1), (1, 2), (2, 3), (3, 3)], 4)).unwrap();
        assert_eq!(book.code(0), Some((0b0, 1)));
        assert_eq!(book.code(1), Some((0b10, 2)));
        assert_eq!(book.code(2), Some((0b110, 3)));
        assert_eq!(book.code(3), Some((0b111, 3)));

        let book = canonicalize(&table(&[(0, 1), (1, 1)], 2)).unwrap();
        assert_eq!(book.code(0), Some((0b0, 1)));
        assert_eq!(book.code(1), Some((0b1, 1)));
    }

    #[test]
    fn canonicalize_rejects_incomplete_code() {
        // Kraft sum 3/4.
        assert!(canonicalize(&table(&[(0, 2), (1, 2), (2, 2)], 3)).is_err());
        // Over-subscribed.
        assert!(canonicalize(&table(&[(0, 1), (1, 1), (2, 1)], 3)).is_err());
        // Lone symbol must use length 1.
        assert!(canonicalize(&table(&[(0, 2)], 1)).is_err());
        // Empty table is fine (empty stream path).
        assert!(canonicalize(&CodeLengthTable::zeros(4)).is_ok());
    }

    #[test]
    fn encode_examples() {
        let book = canonicalize(&table(&[(0, 1), (1, 2), (2, 3), (3, 3)], 4)).unwrap();
        let tokens = [Token::Literal(0), Token::Literal(1), Token::Literal(0)];
        // Bits 0 10 0 -> 0100_0000.
        assert_eq!(encode(&tokens, &book).unwrap(), vec![0x40]);
        assert_eq!(encode(&[], &book).unwrap(), Vec::<u8>::new());

        let lone = canonicalize(&table(&[(0, 1)], 1)).unwrap();
        assert_eq!(encode(&[Token::Literal(0)], &lone).unwrap(), vec![0x00]);
    }

    #[test]
    fn decode_examples() {
        let lengths = table(&[(0, 1), (1, 2), (2, 3), (3, 3)], 4);
        let got = decode(&[0x40], &lengths, 3).unwrap();
        assert_eq!(
            got,
            vec![Token::Literal(0), Token::Literal(1), Token::Literal(0)]
        );

        assert_eq!(decode(&[], &lengths, 0).unwrap(), Vec::new());

        let lone = table(&[(0, 1)], 1);
        assert!(decode(&[], &lone, 1).is_err());
    }

    #[test]
    fn decode_rejects_truncated_and_invalid() {
        let lengths = table(&[(0, 1), (1, 2), (2, 3), (3, 3)], 4);
        // One byte holds at most 8 one-bit symbols; ask for more.
        assert!(decode(&[0x00], &lengths, 9).is_err());
    }

    proptest! {
        #[test]
        fn round_trip(symbol_ids in proptest::collection::vec(0u16..12, 1..400)) {
            let tokens: Vec<Token> = symbol_ids.iter().map(|&s| Token::from_symbol_id(s)).collect();
            let freqs = count_frequencies(&tokens, 12).unwrap();
            let table = build_code_lengths(&freqs).unwrap();
            let book = canonicalize(&table).unwrap();
            let bits = encode(&tokens, &book).unwrap();
            let back = decode(&bits, &table, tokens.len()).unwrap();
            prop_assert_eq!(back, tokens);
        }

        #[test]
        fn lengths_are_optimal_and_complete(fs in proptest::collection::vec(1u64..64, 2..7)) {
            let table = build_code_lengths(&fs).unwrap();
            let kraft: u128 = table.lengths.iter().filter(|&&l| l > 0)
                .map(|&l| 1u128 << (32 - l)).sum();
            prop_assert_eq!(kraft, 1u128 << 32);
            let cost: u64 = table.lengths.iter().zip(&fs).map(|(&l, &f)| l as u64 * f).sum();
            prop_assert_eq!(cost, oracle_optimal_cost(&fs));
        }
    }
}
