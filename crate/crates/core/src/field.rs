//! Bit-packed space-time lattice.
//!
//! Rows are time slices `t = 0..n_rows`; each row holds `n_sites` bits packed
//! least-significant-bit first, padded with zero bits to a byte boundary.

use std::fmt;
use std::str::FromStr;

/// Boolean occupation field `n[i, t]`, periodic in space.
#[derive(Clone, PartialEq, Eq)]
pub struct SpaceTimeField {
    n_sites: usize,
    n_rows: usize,
    bits: Vec<u8>,
}

impl SpaceTimeField {
    pub fn zeros(n_sites: usize, n_rows: usize) -> Self {
        let stride = row_bytes(n_sites);
        Self {
            n_sites,
            n_rows,
            bits: vec![0; stride * n_rows],
        }
    }

    pub fn ones(n_sites: usize, n_rows: usize) -> Self {
        let mut field = Self::zeros(n_sites, n_rows);
        for t in 0..n_rows {
            for i in 0..n_sites {
                field.set(t, i, true);
            }
        }
        field
    }

    /// Builds a field from per-row cell vectors. Rows must share one length.
    pub fn from_rows<R: AsRef<[bool]>>(rows: &[R]) -> Self {
        let n_sites = rows.first().map_or(0, |r| r.as_ref().len());
        let mut field = Self::zeros(n_sites, rows.len());
        for (t, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            assert_eq!(row.len(), n_sites, "ragged rows");
            field.set_row(t, row);
        }
        field
    }

    /// Wraps packed bytes, returning `None` when the length is wrong or a pad bit is set.
    pub fn from_packed(n_sites: usize, n_rows: usize, bits: Vec<u8>) -> Option<Self> {
        let stride = row_bytes(n_sites);
        if bits.len() != stride * n_rows {
            return None;
        }
        let field = Self {
            n_sites,
            n_rows,
            bits,
        };
        field.pads_clear().then_some(field)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn row_stride(&self) -> usize {
        row_bytes(self.n_sites)
    }

    pub fn packed(&self) -> &[u8] {
        &self.bits
    }

    pub fn into_packed(self) -> Vec<u8> {
        self.bits
    }

    #[inline]
    pub fn get(&self, t: usize, i: usize) -> bool {
        debug_assert!(t < self.n_rows && i < self.n_sites);
        let byte = self.bits[t * self.row_stride() + i / 8];
        (byte >> (i % 8)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, t: usize, i: usize, value: bool) {
        debug_assert!(t < self.n_rows && i < self.n_sites);
        let idx = t * self.row_stride() + i / 8;
        let mask = 1u8 << (i % 8);
        if value {
            self.bits[idx] |= mask;
        } else {
            self.bits[idx] &= !mask;
        }
    }

    /// Site `i` of row `t` with periodic wrap in space.
    #[inline]
    pub fn get_wrapped(&self, t: usize, i: isize) -> bool {
        let n = self.n_sites as isize;
        self.get(t, i.rem_euclid(n) as usize)
    }

    pub fn row_bits(&self, t: usize) -> &[u8] {
        let stride = self.row_stride();
        &self.bits[t * stride..(t + 1) * stride]
    }

    pub fn row(&self, t: usize) -> Vec<bool> {
        (0..self.n_sites).map(|i| self.get(t, i)).collect()
    }

    pub fn set_row(&mut self, t: usize, cells: &[bool]) {
        assert_eq!(cells.len(), self.n_sites);
        let stride = self.row_stride();
        let row = &mut self.bits[t * stride..(t + 1) * stride];
        row.fill(0);
        for (i, &c) in cells.iter().enumerate() {
            if c {
                row[i / 8] |= 1 << (i % 8);
            }
        }
    }

    pub fn row_is_empty(&self, t: usize) -> bool {
        self.row_bits(t).iter().all(|&b| b == 0)
    }

    pub fn count_ones(&self) -> u64 {
        self.bits.iter().map(|b| u64::from(b.count_ones())).sum()
    }

    pub fn row_count_ones(&self, t: usize) -> usize {
        self.row_bits(t).iter().map(|b| b.count_ones() as usize).sum()
    }

    /// True when every trailing pad bit is zero.
    pub fn pads_clear(&self) -> bool {
        let rem = self.n_sites % 8;
        if rem == 0 || self.n_rows == 0 {
            return true;
        }
        let pad_mask = !((1u8 << rem) - 1);
        let stride = self.row_stride();
        (0..self.n_rows).all(|t| self.bits[t * stride + stride - 1] & pad_mask == 0)
    }

    /// Every occupied cell at `t + 1` has an occupied parent in `{i-1, i, i+1}` at `t`.
    pub fn has_no_spontaneous_creation(&self) -> bool {
        self.first_orphan().is_none()
    }

    /// First `(t, i)` occupied without an occupied parent, scanning in time order.
    pub fn first_orphan(&self) -> Option<(usize, usize)> {
        for t in 1..self.n_rows {
            for i in 0..self.n_sites {
                if self.get(t, i) {
                    let i = i as isize;
                    let parent = (-1..=1).any(|d| self.get_wrapped(t - 1, i + d));
                    if !parent {
                        return Some((t, i as usize));
                    }
                }
            }
        }
        None
    }
}

impl fmt::Debug for SpaceTimeField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SpaceTimeField({}x{})", self.n_sites, self.n_rows)
    }
}

/// Text rendering: one line per time row, `1` for occupied.
impl fmt::Display for SpaceTimeField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in 0..self.n_rows {
            for i in 0..self.n_sites {
                f.write_str(if self.get(t, i) { "1" } else { "0" })?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Parses the [`Display`](fmt::Display) rendering; blank lines and `#` comments are skipped.
impl FromStr for SpaceTimeField {
    type Err = String;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut rows: Vec<Vec<bool>> = Vec::new();
        for (k, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let row = line
                .chars()
                .map(|c| match c {
                    '0' => Ok(false),
                    '1' => Ok(true),
                    other => Err(format!("line {}: unexpected character {other:?}", k + 1)),
                })
                .collect::<Result<Vec<_>, _>>()?;
            if rows.first().is_some_and(|r| r.len() != row.len()) {
                return Err(format!("line {}: row width {} differs from {}", k + 1, row.len(), rows[0].len()));
            }
            rows.push(row);
        }
        if rows.is_empty() {
            return Err("no rows".into());
        }
        Ok(Self::from_rows(&rows))
    }
}

pub fn row_bytes(n_sites: usize) -> usize {
    n_sites.div_ceil(8)
}
