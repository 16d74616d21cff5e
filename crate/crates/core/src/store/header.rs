use crate::error::StoreError;
use crate::pattern::MultiHotTarget;
use crate::sim::SimParams;

pub const HEADER_LEN: usize = 40;

pub const FLAG_DEFLATE: u8 = 0b0000_0001;

/// Fixed 40-byte little-endian record header.
///
/// | bytes  | field       |
/// |--------|-------------|
/// | 0..4   | n_sites u32 |
/// | 4..8   | n_rows u32  |
/// | 8..16  | p f64       |
/// | 16..24 | q f64       |
/// | 24..32 | seed u64    |
/// | 32     | target mask |
/// | 33     | flags       |
/// | 34..36 | reserved    |
/// | 36..40 | payload_len |
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecordHeader {
    pub n_sites: u32,
    pub n_rows: u32,
    pub p: f64,
    pub q: f64,
    pub seed: u64,
    pub target: u8,
    pub flags: u8,
    pub reserved: u16,
    pub payload_len: u32,
}

impl RecordHeader {
    pub fn encode(&self) -> [u8; HEADER_LEN] {
        let mut buf = [0u8; HEADER_LEN];
        buf[0..4].copy_from_slice(&self.n_sites.to_le_bytes());
        buf[4..8].copy_from_slice(&self.n_rows.to_le_bytes());
        buf[8..16].copy_from_slice(&self.p.to_le_bytes());
        buf[16..24].copy_from_slice(&self.q.to_le_bytes());
        buf[24..32].copy_from_slice(&self.seed.to_le_bytes());
        buf[32] = self.target;
        buf[33] = self.flags;
        buf[34..36].copy_from_slice(&self.reserved.to_le_bytes());
        buf[36..40].copy_from_slice(&self.payload_len.to_le_bytes());
        buf
    }

    pub fn decode(buf: &[u8; HEADER_LEN]) -> Self {
        let u32_at = |i: usize| u32::from_le_bytes(buf[i..i + 4].try_into().unwrap());
        let u64_at = |i: usize| u64::from_le_bytes(buf[i..i + 8].try_into().unwrap());
        Self {
            n_sites: u32_at(0),
            n_rows: u32_at(4),
            p: f64::from_bits(u64_at(8)),
            q: f64::from_bits(u64_at(16)),
            seed: u64_at(24),
            target: buf[32],
            flags: buf[33],
            reserved: u16::from_le_bytes([buf[34], buf[35]]),
            payload_len: u32_at(36),
        }
    }

    pub fn is_compressed(&self) -> bool {
        self.flags & FLAG_DEFLATE != 0
    }

    /// Total bytes this record occupies.
    pub fn record_len(&self) -> u64 {
        HEADER_LEN as u64 + u64::from(self.payload_len)
    }

    /// Structural checks that do not need the payload; `offset` is only used in errors.
    pub fn validate(&self, offset: u64) -> Result<(), StoreError> {
        if self.reserved != 0 {
            return Err(StoreError::corrupt(offset, "reserved bytes are not zero"));
        }
        if self.flags & !FLAG_DEFLATE != 0 {
            return Err(StoreError::corrupt(offset, format!("unknown flags {:#04x}", self.flags)));
        }
        self.target_value()
            .map_err(|e| StoreError::corrupt(offset, e.to_string()))?;
        self.params(offset)?;
        Ok(())
    }

    pub fn target_value(&self) -> Result<MultiHotTarget, crate::error::ParamError> {
        MultiHotTarget::from_mask(self.target)
    }

    /// Simulation parameters; `init_density` is not stored and reads back as the default.
    pub fn params(&self, offset: u64) -> Result<SimParams, StoreError> {
        if self.n_rows < 2 {
            return Err(StoreError::corrupt(offset, format!("n_rows {} < 2", self.n_rows)));
        }
        SimParams::new(
            self.n_sites as usize,
            self.n_rows as usize - 1,
            self.p,
            self.q,
            self.seed,
        )
        .map_err(|e| StoreError::corrupt(offset, e.to_string()))
    }
}
