//! Data and index files.
//!
//! Data file: `DPDS`, version byte, then records back to back. Index file:
//! `DPIX`, version byte, then 16-byte `(offset, length)` entries. Offsets
//! count from the first byte after the data-file preamble.

use std::fs::File;
use std::io::{BufReader, BufWriter, ErrorKind, Read, Seek, SeekFrom, Write};
use std::path::Path;

use flate2::read::DeflateDecoder;
use flate2::write::DeflateEncoder;
use flate2::Compression;

use crate::error::StoreError;
use crate::field::{row_bytes, SpaceTimeField};
use crate::pattern::MultiHotTarget;
use crate::sim::SimParams;

use super::header::{RecordHeader, FLAG_DEFLATE, HEADER_LEN};

pub const DATA_MAGIC: &[u8; 4] = b"DPDS";
pub const INDEX_MAGIC: &[u8; 4] = b"DPIX";
pub const FORMAT_VERSION: u8 = 1;
pub const PREAMBLE_LEN: u64 = 5;
pub const INDEX_ENTRY_LEN: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct IndexEntry {
    pub offset: u64,
    pub length: u64,
}

/// One decoded sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub field: SpaceTimeField,
    pub params: SimParams,
    pub target: MultiHotTarget,
}

/// Ordered `(offset, length)` pairs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DatasetIndex {
    pub entries: Vec<IndexEntry>,
}

impl DatasetIndex {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, k: usize) -> Option<IndexEntry> {
        self.entries.get(k).copied()
    }

    /// Offsets strictly increasing and records non-overlapping.
    pub fn check_ordering(&self) -> Result<(), StoreError> {
        for pair in self.entries.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            if b.offset <= a.offset || a.offset + a.length > b.offset {
                return Err(StoreError::corrupt(b.offset, "index entries overlap or are out of order"));
            }
        }
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self, StoreError> {
        let mut bytes = Vec::new();
        File::open(path)?.read_to_end(&mut bytes)?;
        Self::decode(&bytes)
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, StoreError> {
        check_preamble(bytes, INDEX_MAGIC, "index")?;
        let body = &bytes[PREAMBLE_LEN as usize..];
        if !body.len().is_multiple_of(INDEX_ENTRY_LEN) {
            return Err(StoreError::corrupt(
                PREAMBLE_LEN + (body.len() - body.len() % INDEX_ENTRY_LEN) as u64,
                "truncated index entry",
            ));
        }
        let entries = body
            .chunks_exact(INDEX_ENTRY_LEN)
            .map(|c| IndexEntry {
                offset: u64::from_le_bytes(c[0..8].try_into().unwrap()),
                length: u64::from_le_bytes(c[8..16].try_into().unwrap()),
            })
            .collect();
        let index = Self { entries };
        index.check_ordering()?;
        Ok(index)
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(PREAMBLE_LEN as usize + INDEX_ENTRY_LEN * self.entries.len());
        out.extend_from_slice(INDEX_MAGIC);
        out.push(FORMAT_VERSION);
        for e in &self.entries {
            out.extend_from_slice(&e.offset.to_le_bytes());
            out.extend_from_slice(&e.length.to_le_bytes());
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<(), StoreError> {
        std::fs::write(path, self.encode())?;
        Ok(())
    }
}

fn check_preamble(bytes: &[u8], magic: &[u8; 4], kind: &'static str) -> Result<(), StoreError> {
    if bytes.len() < PREAMBLE_LEN as usize || &bytes[..4] != magic {
        return Err(StoreError::BadMagic { kind });
    }
    if bytes[4] != FORMAT_VERSION {
        return Err(StoreError::BadVersion { kind, version: bytes[4] });
    }
    Ok(())
}

/// Serializes one record (header + payload).
pub fn encode_record(
    field: &SpaceTimeField,
    params: &SimParams,
    target: &MultiHotTarget,
    compress: bool,
) -> Result<Vec<u8>, StoreError> {
    params.validate()?;
    if field.n_sites() != params.n_sites || field.n_rows() != params.n_rows() {
        return Err(StoreError::Param(crate::error::ParamError::Scheme(format!(
            "field {}x{} does not match params {}x{}",
            field.n_sites(),
            field.n_rows(),
            params.n_sites,
            params.n_rows()
        ))));
    }
    let payload = if compress {
        let mut enc = DeflateEncoder::new(Vec::new(), Compression::default());
        enc.write_all(field.packed())?;
        enc.finish()?
    } else {
        field.packed().to_vec()
    };
    let payload_len = u32::try_from(payload.len()).map_err(|_| StoreError::PayloadTooLarge(payload.len()))?;
    let dims = |v: usize| u32::try_from(v).map_err(|_| StoreError::PayloadTooLarge(v));
    let header = RecordHeader {
        n_sites: dims(field.n_sites())?,
        n_rows: dims(field.n_rows())?,
        p: params.p,
        q: params.q,
        seed: params.seed,
        target: target.mask(),
        flags: if compress { FLAG_DEFLATE } else { 0 },
        reserved: 0,
        payload_len,
    };
    let mut out = Vec::with_capacity(HEADER_LEN + payload.len());
    out.extend_from_slice(&header.encode());
    out.extend_from_slice(&payload);
    Ok(out)
}

/// Inverse of [`encode_record`]; `offset` is only used in error messages.
pub fn decode_record(bytes: &[u8], offset: u64) -> Result<Record, StoreError> {
    if bytes.len() < HEADER_LEN {
        return Err(StoreError::corrupt(offset, "record shorter than its header"));
    }
    let header = RecordHeader::decode(bytes[..HEADER_LEN].try_into().unwrap());
    header.validate(offset)?;
    if bytes.len() as u64 != header.record_len() {
        return Err(StoreError::corrupt(
            offset,
            format!("record length {} != 40 + payload_len {}", bytes.len(), header.payload_len),
        ));
    }
    let payload = &bytes[HEADER_LEN..];
    let (n, rows) = (header.n_sites as usize, header.n_rows as usize);
    let expected = row_bytes(n) * rows;
    let packed = if header.is_compressed() {
        let mut out = Vec::with_capacity(expected);
        DeflateDecoder::new(payload)
            .take(expected as u64 + 1)
            .read_to_end(&mut out)
            .map_err(|e| StoreError::corrupt(offset, format!("decompression failed: {e}")))?;
        out
    } else {
        payload.to_vec()
    };
    if packed.len() != expected {
        return Err(StoreError::corrupt(
            offset,
            format!("payload holds {} bytes, expected {expected}", packed.len()),
        ));
    }
    let field = SpaceTimeField::from_packed(n, rows, packed)
        .ok_or_else(|| StoreError::corrupt(offset, "pad bits set"))?;
    Ok(Record {
        field,
        params: header.params(offset)?,
        target: header.target_value().map_err(|e| StoreError::corrupt(offset, e.to_string()))?,
    })
}

/// Append-only writer for a data file and its sidecar index.
pub struct DatasetWriter {
    data: BufWriter<File>,
    index: BufWriter<File>,
    next_offset: u64,
    compress: bool,
    entries: Vec<IndexEntry>,
}

impl DatasetWriter {
    /// Creates (truncating) both files and writes their preambles.
    pub fn create(data_path: &Path, index_path: &Path, compress: bool) -> Result<Self, StoreError> {
        let mut data = BufWriter::new(File::create(data_path)?);
        let mut index = BufWriter::new(File::create(index_path)?);
        data.write_all(DATA_MAGIC)?;
        data.write_all(&[FORMAT_VERSION])?;
        index.write_all(INDEX_MAGIC)?;
        index.write_all(&[FORMAT_VERSION])?;
        Ok(Self {
            data,
            index,
            next_offset: 0,
            compress,
            entries: Vec::new(),
        })
    }

    pub fn append_record(
        &mut self,
        field: &SpaceTimeField,
        params: &SimParams,
        target: &MultiHotTarget,
    ) -> Result<IndexEntry, StoreError> {
        let bytes = encode_record(field, params, target, self.compress)?;
        self.append_encoded(&bytes)
    }

    /// Appends bytes produced by [`encode_record`].
    pub fn append_encoded(&mut self, bytes: &[u8]) -> Result<IndexEntry, StoreError> {
        let entry = IndexEntry {
            offset: self.next_offset,
            length: bytes.len() as u64,
        };
        self.data.write_all(bytes)?;
        self.index.write_all(&entry.offset.to_le_bytes())?;
        self.index.write_all(&entry.length.to_le_bytes())?;
        self.next_offset += entry.length;
        self.entries.push(entry);
        Ok(entry)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Flushes data before index so no visible entry points past written bytes.
    pub fn flush(&mut self) -> Result<(), StoreError> {
        self.data.flush()?;
        self.data.get_ref().sync_data()?;
        self.index.flush()?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<DatasetIndex, StoreError> {
        self.flush()?;
        Ok(DatasetIndex {
            entries: std::mem::take(&mut self.entries),
        })
    }
}

/// Random-access reader over a data file.
pub struct DatasetReader {
    file: File,
    len: u64,
}

impl DatasetReader {
    pub fn open(data_path: &Path) -> Result<Self, StoreError> {
        let mut file = File::open(data_path)?;
        let mut pre = [0u8; PREAMBLE_LEN as usize];
        match file.read_exact(&mut pre) {
            Ok(()) => {}
            Err(e) if e.kind() == ErrorKind::UnexpectedEof => return Err(StoreError::BadMagic { kind: "data" }),
            Err(e) => return Err(e.into()),
        }
        check_preamble(&pre, DATA_MAGIC, "data")?;
        let len = file.metadata()?.len() - PREAMBLE_LEN;
        Ok(Self { file, len })
    }

    /// Bytes after the preamble.
    pub fn body_len(&self) -> u64 {
        self.len
    }

    pub fn read_record(&mut self, entry: IndexEntry) -> Result<Record, StoreError> {
        let bytes = self.read_raw(entry)?;
        decode_record(&bytes, entry.offset)
    }

    fn read_raw(&mut self, entry: IndexEntry) -> Result<Vec<u8>, StoreError> {
        let end = entry.offset.checked_add(entry.length);
        if end.is_none_or(|end| end > self.len) {
            return Err(StoreError::corrupt(entry.offset, "entry extends past end of file"));
        }
        self.file.seek(SeekFrom::Start(PREAMBLE_LEN + entry.offset))?;
        let mut bytes = vec![0u8; entry.length as usize];
        self.file.read_exact(&mut bytes)?;
        Ok(bytes)
    }

    /// Reads records in file order, trusting only the headers.
    pub fn scan(&mut self) -> Result<Vec<(IndexEntry, Record)>, StoreError> {
        let index = self.rebuild_index()?;
        index
            .entries
            .iter()
            .map(|&e| Ok((e, self.read_record(e)?)))
            .collect()
    }

    /// Recovers the index by walking record headers from the start of the file.
    pub fn rebuild_index(&mut self) -> Result<DatasetIndex, StoreError> {
        self.file.seek(SeekFrom::Start(PREAMBLE_LEN))?;
        let mut reader = BufReader::new(&self.file);
        let mut entries = Vec::new();
        let mut offset = 0u64;
        while offset < self.len {
            let mut buf = [0u8; HEADER_LEN];
            reader
                .read_exact(&mut buf)
                .map_err(|_| StoreError::corrupt(offset, "truncated header"))?;
            let header = RecordHeader::decode(&buf);
            header.validate(offset)?;
            let length = header.record_len();
            if offset + length > self.len {
                return Err(StoreError::corrupt(offset, "truncated payload"));
            }
            reader.seek_relative(i64::from(header.payload_len))?;
            entries.push(IndexEntry { offset, length });
            offset += length;
        }
        Ok(DatasetIndex { entries })
    }
}

/// Checks every entry's length against the header at its offset.
pub fn verify_index(reader: &mut DatasetReader, index: &DatasetIndex) -> Result<(), StoreError> {
    index.check_ordering()?;
    for &entry in &index.entries {
        let bytes = reader.read_raw(IndexEntry {
            offset: entry.offset,
            length: HEADER_LEN as u64,
        })?;
        let header = RecordHeader::decode(bytes[..].try_into().unwrap());
        if header.record_len() != entry.length {
            return Err(StoreError::corrupt(
                entry.offset,
                format!("index length {} != header length {}", entry.length, header.record_len()),
            ));
        }
    }
    Ok(())
}
