//! Pattern-ranking dictionary compression.
//!
//! The toolkit scores every repeated substring of the input by
//! `frequency * length^2`, keeps the top-k patterns, and replaces their
//! occurrences with short codes. Three pipelines build on that core:
//!
//! - **v1** — dynamic: patterns are mined from the data being compressed.
//! - **v2** — a corpus-trained predefined dictionary is applied first, then
//!   dynamic extraction runs over whatever it left uncompressed.
//! - **hybrid** — either pipeline's token stream is re-coded with a
//!   canonical Huffman stage over the combined literal+code alphabet.
//!
//! Outputs are self-contained `.prk` containers carrying the dictionaries
//! they need plus a CRC-32 of the original bytes; predefined dictionaries
//! live in standalone `.prd` files. See the `examples/` directory for a
//! runnable tour of every capability, and the `prk` binary for the
//! command-line front end.
//!
//! ```
//! use patternrank::{codecs, EngineConfig};
//!
//! let data = b"<item id=\"1\"/><item id=\"2\"/><item id=\"3\"/>";
//! let compressed = codecs::compress_v1(data, &EngineConfig::default()).unwrap();
//! assert_eq!(codecs::decompress(&compressed).unwrap(), data);
//! ```

pub mod bench;
pub mod codecs;
pub mod container;
pub mod dict_builder;
pub mod engine;
pub mod error;
pub mod huffman;
pub mod model;

pub use container::{Algorithm, PredefinedDictionary};
pub use error::{Error, Result};
pub use model::{Dictionary, EngineConfig, PatternStats, Token};
