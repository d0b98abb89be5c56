//! Comparative benchmark harness: DEFLATE baseline versus the four
//! pattern-ranking pipelines, plus a deterministic synthetic XML corpus
//! generator standing in for backup-style input data.
//!
//! Timings are the median of three runs after one warm-up, measured
//! sequentially on a single worker. Sizes are exact byte counts of the
//! emitted containers, metadata included.

use std::io::{Read, Write};
use std::time::Instant;

use flate2::read::GzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::codecs::{compress_hybrid, compress_v1, compress_v2, decompress};
use crate::container::PredefinedDictionary;
use crate::error::{Error, Result};
use crate::model::EngineConfig;

/// Element names emitted by the synthetic corpus generator.
pub const SYNTH_TAGS: [&str; 20] = [
    "package",
    "application",
    "activity",
    "service",
    "receiver",
    "provider",
    "intent-filter",
    "action",
    "category",
    "meta-data",
    "uses-permission",
    "uses-feature",
    "uses-library",
    "permission",
    "instrumentation",
    "data",
    "grant-uri-permission",
    "path-permission",
    "supports-screens",
    "backup-item",
];

/// Attribute names emitted by the synthetic corpus generator.
pub const SYNTH_ATTRS: [&str; 15] = [
    "android:name",
    "android:value",
    "android:label",
    "android:exported",
    "android:enabled",
    "android:permission",
    "android:process",
    "android:authorities",
    "android:icon",
    "android:theme",
    "android:priority",
    "android:resource",
    "android:scheme",
    "android:host",
    "android:required",
];

const SYNTH_VALUES: [&str; 24] = [
    "true",
    "false",
    "com.example.app",
    "android.intent.action.MAIN",
    "android.intent.action.VIEW",
    "android.intent.category.LAUNCHER",
    "android.intent.category.DEFAULT",
    "@string/app_name",
    "@drawable/icon",
    "@style/Theme.Light",
    "com.example.app.MainActivity",
    "com.example.app.SyncService",
    "com.example.app.PushReceiver",
    "com.example.app.DataProvider",
    "android.permission.INTERNET",
    "android.permission.READ_CONTACTS",
    "com.google.android.gms",
    "content://media/external",
    "singleTop",
    "portrait",
    "100",
    "1",
    "0",
    "https",
];

/// Zipf-like pick: weight of rank i is proportional to 1/(i+1).
fn zipf_index(rng: &mut ChaCha8Rng, n: usize) -> usize {
    let total: u64 = (1..=n as u64).map(|i| 1200 / i).sum();
    let mut roll = rng.random_range(0..total);
    for i in 0..n {
        let w = 1200 / (i as u64 + 1);
        if roll < w {
            return i;
        }
        roll -= w;
    }
    n - 1
}

fn push_indent(out: &mut Vec<u8>, depth: usize) {
    for _ in 0..depth {
        out.extend_from_slice(b"  ");
    }
}

fn push_attrs(out: &mut Vec<u8>, rng: &mut ChaCha8Rng, count: usize) {
    for _ in 0..count {
        let attr = SYNTH_ATTRS[rng.random_range(0..SYNTH_ATTRS.len())];
        let value = SYNTH_VALUES[zipf_index(rng, SYNTH_VALUES.len())];
        out.push(b' ');
        out.extend_from_slice(attr.as_bytes());
        out.push(b'=');
        out.push(b'"');
        out.extend_from_slice(value.as_bytes());
        out.push(b'"');
    }
}

/// Deterministic pseudo-random XML documents: nested elements over a fixed
/// tag/attribute vocabulary with Zipf-distributed attribute values. The same
/// seed always yields byte-identical files.
pub fn synth_corpus(seed: u64, file_count: usize, target_size: usize) -> Vec<Vec<u8>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..file_count)
        .map(|_| synth_document(&mut rng, target_size))
        .collect()
}

fn synth_document(rng: &mut ChaCha8Rng, target_size: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(target_size + 256);
    out.extend_from_slice(b"<?xml version=\"1.0\" encoding=\"utf-8\"?>\n");
    let mut stack: Vec<&str> = Vec::new();

    let root = SYNTH_TAGS[0];
    out.push(b'<');
    out.extend_from_slice(root.as_bytes());
    push_attrs(&mut out, rng, 2);
    out.extend_from_slice(b">\n");
    stack.push(root);

    while out.len() < target_size {
        let roll = rng.random_range(0u32..100);
        if (roll < 40 && stack.len() < 7) || stack.len() < 2 {
            // Open an element.
            let tag = SYNTH_TAGS[rng.random_range(0..SYNTH_TAGS.len())];
            let attrs = rng.random_range(1..=3);
            push_indent(&mut out, stack.len());
            out.push(b'<');
            out.extend_from_slice(tag.as_bytes());
            push_attrs(&mut out, rng, attrs);
            out.extend_from_slice(b">\n");
            stack.push(tag);
        } else if roll < 75 {
            // Self-closing leaf.
            let tag = SYNTH_TAGS[rng.random_range(0..SYNTH_TAGS.len())];
            let attrs = rng.random_range(1..=2);
            push_indent(&mut out, stack.len());
            out.push(b'<');
            out.extend_from_slice(tag.as_bytes());
            push_attrs(&mut out, rng, attrs);
            out.extend_from_slice(b"/>\n");
        } else {
            // Close the innermost element.
            let tag = stack.pop().unwrap();
            push_indent(&mut out, stack.len());
            out.extend_from_slice(b"</");
            out.extend_from_slice(tag.as_bytes());
            out.extend_from_slice(b">\n");
            if stack.is_empty() {
                break;
            }
        }
    }
    while let Some(tag) = stack.pop() {
        push_indent(&mut out, stack.len());
        out.extend_from_slice(b"</");
        out.extend_from_slice(tag.as_bytes());
        out.extend_from_slice(b">\n");
    }
    out
}

/// Benchmark modes: the external DEFLATE baseline plus the four pipelines.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Mode {
    #[serde(rename = "deflate")]
    Deflate,
    #[serde(rename = "v1")]
    V1,
    #[serde(rename = "v2")]
    V2,
    #[serde(rename = "v1h")]
    V1h,
    #[serde(rename = "v2h")]
    V2h,
}

impl Mode {
    pub const ALL: [Mode; 5] = [Mode::Deflate, Mode::V1, Mode::V2, Mode::V1h, Mode::V2h];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Deflate => "deflate",
            Mode::V1 => "v1",
            Mode::V2 => "v2",
            Mode::V1h => "v1h",
            Mode::V2h => "v2h",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Mode::ALL.into_iter().find(|m| m.name() == name)
    }

    pub fn requires_predefined(self) -> bool {
        matches!(self, Mode::V2 | Mode::V2h)
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A named input to benchmark.
#[derive(Clone, Debug)]
pub struct BenchInput {
    pub name: String,
    pub data: Vec<u8>,
}

impl BenchInput {
    pub fn new(name: impl Into<String>, data: Vec<u8>) -> Self {
        Self {
            name: name.into(),
            data,
        }
    }
}

/// One (input, mode) measurement.
#[derive(Clone, Debug, Serialize)]
pub struct BenchRow {
    pub input: String,
    pub mode: Mode,
    pub original_size: u64,
    pub compressed_size: u64,
    /// compressed/original; absent for empty inputs.
    pub ratio: Option<f64>,
    pub compress_time_ns: u64,
    pub decompress_time_ns: u64,
    pub round_trip_ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct EnvironmentNotes {
    pub os: String,
    pub arch: String,
    pub notes: Vec<String>,
}

/// Machine-readable benchmark report.
#[derive(Clone, Debug, Serialize)]
pub struct BenchReport {
    pub config: EngineConfig,
    pub workers: usize,
    pub environment: EnvironmentNotes,
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// CSV with the same columns as the JSON rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "input,mode,original_size,compressed_size,ratio,compress_time_ns,decompress_time_ns,round_trip_ok\n",
        );
        for row in &self.rows {
            let ratio = row.ratio.map_or(String::new(), |r| format!("{r:.6}"));
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                csv_field(&row.input),
                row.mode,
                row.original_size,
                row.compressed_size,
                ratio,
                row.compress_time_ns,
                row.decompress_time_ns,
                row.round_trip_ok,
            ));
        }
        out
    }
}

fn csv_field(value: &str) -> String {
    if value.contains([',', '"', '\n']) {
        format!("\"{}\"", value.replace('"', "\"\""))
    } else {
        value.to_string()
    }
}

fn gzip_compress(data: &[u8]) -> Result<Vec<u8>> {
    let mut encoder = GzEncoder::new(Vec::new(), Compression::default());
    encoder.write_all(data)?;
    Ok(encoder.finish()?)
}

fn gzip_decompress(bytes: &[u8]) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    GzDecoder::new(bytes).read_to_end(&mut out)?;
    Ok(out)
}

fn median_of_3_ns(mut run: impl FnMut() -> Result<()>) -> Result<u64> {
    let mut samples = [0u64; 3];
    for sample in &mut samples {
        let start = Instant::now();
        run()?;
        *sample = start.elapsed().as_nanos() as u64;
    }
    samples.sort_unstable();
    Ok(samples[1])
}

/// Compress and decompress every input under every mode, verifying each
/// round trip. A failed round trip aborts the run naming the (input, mode)
/// pair.
pub fn run_bench(
    inputs: &[BenchInput],
    modes: &[Mode],
    cfg: &EngineConfig,
    predefined: Option<&PredefinedDictionary>,
) -> Result<BenchReport> {
    if predefined.is_none() {
        if let Some(mode) = modes.iter().find(|m| m.requires_predefined()) {
            return Err(Error::Usage(format!(
                "mode {mode} requires a predefined dictionary"
            )));
        }
    }

    let mut rows = Vec::with_capacity(inputs.len() * modes.len());
    for input in inputs {
        for &mode in modes {
            let compress: Box<dyn Fn(&[u8]) -> Result<Vec<u8>>> = match mode {
                Mode::Deflate => Box::new(gzip_compress),
                Mode::V1 => Box::new(|d| compress_v1(d, cfg)),
                Mode::V2 => Box::new(|d| compress_v2(d, cfg, predefined.unwrap())),
                Mode::V1h => Box::new(|d| compress_hybrid(d, cfg, None)),
                Mode::V2h => Box::new(|d| compress_hybrid(d, cfg, predefined)),
            };
            let decompress_fn: fn(&[u8]) -> Result<Vec<u8>> = match mode {
                Mode::Deflate => gzip_decompress,
                _ => decompress,
            };

            let compressed = compress(&input.data)?; // warm-up, artifact kept
            let restored = decompress_fn(&compressed)?;
            if restored != input.data {
                return Err(Error::Integrity(format!(
                    "round trip failed for input '{}' under mode {mode}",
                    input.name
                )));
            }

            let compress_time_ns = median_of_3_ns(|| compress(&input.data).map(drop))?;
            let _ = decompress_fn(&compressed)?; // warm-up
            let decompress_time_ns = median_of_3_ns(|| decompress_fn(&compressed).map(drop))?;

            let original_size = input.data.len() as u64;
            rows.push(BenchRow {
                input: input.name.clone(),
                mode,
                original_size,
                compressed_size: compressed.len() as u64,
                ratio: (original_size > 0)
                    .then(|| compressed.len() as f64 / original_size as f64),
                compress_time_ns,
                decompress_time_ns,
                round_trip_ok: true,
            });
        }
    }

    Ok(BenchReport {
        config: *cfg,
        workers: 1,
        environment: EnvironmentNotes {
            os: std::env::consts::OS.to_string(),
            arch: std::env::consts::ARCH.to_string(),
            notes: vec!["timing: median of 3 runs after one warm-up".to_string()],
        },
        rows,
    })
}
