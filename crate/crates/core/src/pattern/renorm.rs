use crate::error::ParamError;
use crate::field::SpaceTimeField;

use super::scheme::{check_adjacency, Offset, RenormScheme};

/// Boolean grid of renormalized sites, `width` across space and `height` along time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenormField {
    width: usize,
    height: usize,
    cells: Vec<bool>,
    periodic: bool,
    adjacency: Vec<Offset>,
    source: (usize, usize),
}

impl RenormField {
    /// Grid built directly from cells (row-major, time rows of `width`).
    pub fn from_cells(
        width: usize,
        height: usize,
        cells: Vec<bool>,
        periodic: bool,
        adjacency: Vec<Offset>,
    ) -> Result<Self, ParamError> {
        if cells.len() != width * height {
            return Err(ParamError::Scheme(format!(
                "{} cells do not fill a {width}x{height} grid",
                cells.len()
            )));
        }
        check_adjacency(&adjacency)?;
        Ok(Self {
            width,
            height,
            cells,
            periodic,
            adjacency,
            source: (width, height),
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Whether the space direction wraps around.
    pub fn periodic(&self) -> bool {
        self.periodic
    }

    pub fn adjacency(&self) -> &[Offset] {
        &self.adjacency
    }

    /// `(n_sites, n_rows)` of the field this grid was derived from.
    pub fn source_dims(&self) -> (usize, usize) {
        self.source
    }

    #[inline]
    pub fn get(&self, x: usize, t: usize) -> bool {
        self.cells[t * self.width + x]
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    pub fn active_fraction(&self) -> f64 {
        if self.cells.is_empty() {
            return 0.0;
        }
        self.cells.iter().filter(|&&c| c).count() as f64 / self.cells.len() as f64
    }
}

/// Applies a scheme's predicate to every anchored block of `field`.
///
/// Space wraps (and the space extent is `N / stride`) exactly when the stride
/// divides `N`; otherwise only blocks fitting inside `[0, N)` are used.
pub fn renormalize(field: &SpaceTimeField, scheme: &RenormScheme) -> Result<RenormField, ParamError> {
    renormalize_cells(&Cells::unpack(field), scheme)
}

/// One byte per cell, row-major; unpacked once when several schemes read one field.
pub(crate) struct Cells {
    n_sites: usize,
    n_rows: usize,
    data: Vec<u8>,
}

impl Cells {
    pub(crate) fn unpack(field: &SpaceTimeField) -> Self {
        let (n, rows) = (field.n_sites(), field.n_rows());
        let mut data = Vec::with_capacity(n * rows);
        for t in 0..rows {
            let row = field.row_bits(t);
            data.extend((0..n).map(|i| (row[i / 8] >> (i % 8)) & 1));
        }
        Self {
            n_sites: n,
            n_rows: rows,
            data,
        }
    }
}

pub(crate) fn renormalize_cells(cells: &Cells, scheme: &RenormScheme) -> Result<RenormField, ParamError> {
    let (n, rows) = (cells.n_sites, cells.n_rows);
    let (w, h) = scheme.block();
    let (sx, st) = scheme.stride();
    if w > n || h > rows {
        return Err(ParamError::FieldTooSmall { sites: n, rows, w, h });
    }
    let periodic = n % sx == 0;
    let width = if periodic { n / sx } else { (n - w) / sx + 1 };
    let height = (rows - h) / st + 1;

    let mut out = Vec::with_capacity(width * height);
    for jt in 0..height {
        let t0 = jt * st;
        for ix in 0..width {
            let x0 = ix * sx;
            let mut pattern = 0usize;
            for dt in 0..h {
                let row = &cells.data[(t0 + dt) * n..(t0 + dt + 1) * n];
                for dx in 0..w {
                    let x = x0 + dx;
                    let x = if x >= n { x - n } else { x };
                    pattern |= usize::from(row[x]) << (dt * w + dx);
                }
            }
            out.push(scheme.is_active(pattern));
        }
    }
    Ok(RenormField {
        width,
        height,
        cells: out,
        periodic,
        adjacency: scheme.adjacency().to_vec(),
        source: (n, rows),
    })
}
