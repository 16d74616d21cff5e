//! Indexed record files and dataset generation.

mod generate;
mod header;
mod io;

pub use generate::{
    generate, DatasetPaths, GenerationMode, GenerationSpec, Manifest, PointSummary, Prevalence, DEEP_PHASE_FRACTION,
};
pub use header::{RecordHeader, FLAG_DEFLATE, HEADER_LEN};
pub use io::{
    decode_record, encode_record, verify_index, DatasetIndex, DatasetReader, DatasetWriter, IndexEntry, Record,
    DATA_MAGIC, FORMAT_VERSION, INDEX_MAGIC, INDEX_ENTRY_LEN, PREAMBLE_LEN,
};
