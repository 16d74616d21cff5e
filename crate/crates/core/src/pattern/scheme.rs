//! Renormalization schemes: which local blocks count as active renormalized
//! sites, and which renormalized sites are neighbours.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Deserialize;

use crate::error::ParamError;

/// Percolation patterns in canonical order `A, PL, Q+, D+, Q, D`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PatternKind {
    A,
    PL,
    Qplus,
    Dplus,
    Q,
    D,
}

impl PatternKind {
    pub const ALL: [PatternKind; 6] = [
        PatternKind::A,
        PatternKind::PL,
        PatternKind::Qplus,
        PatternKind::Dplus,
        PatternKind::Q,
        PatternKind::D,
    ];

    /// The five renormalized patterns, canonical order.
    pub const PATTERNS: [PatternKind; 5] = [
        PatternKind::PL,
        PatternKind::Qplus,
        PatternKind::Dplus,
        PatternKind::Q,
        PatternKind::D,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(idx: usize) -> Option<Self> {
        Self::ALL.get(idx).copied()
    }

    /// Column name used in tables and files.
    pub fn name(self) -> &'static str {
        match self {
            PatternKind::A => "A",
            PatternKind::PL => "PL",
            PatternKind::Qplus => "Qplus",
            PatternKind::Dplus => "Dplus",
            PatternKind::Q => "Q",
            PatternKind::D => "D",
        }
    }
}

impl fmt::Display for PatternKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PatternKind {
    type Err = ParamError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "A" => Ok(PatternKind::A),
            "PL" => Ok(PatternKind::PL),
            "Qplus" | "Q+" => Ok(PatternKind::Qplus),
            "Dplus" | "D+" => Ok(PatternKind::Dplus),
            "Q" => Ok(PatternKind::Q),
            "D" => Ok(PatternKind::D),
            other => Err(ParamError::Scheme(format!("unknown pattern {other:?}"))),
        }
    }
}

/// Offset `(space, time)` on the renormalized lattice.
pub type Offset = (isize, isize);

pub const NEAREST: [Offset; 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];
pub const DIAGONAL: [Offset; 4] = [(1, 1), (1, -1), (-1, 1), (-1, -1)];

/// Block geometry, activity predicate and adjacency of one renormalized lattice.
///
/// Block cells are numbered row-major with time as the row: cell `k` sits at
/// time offset `k / width`, space offset `k % width`. The predicate is a table
/// over all `2^(width*height)` block patterns indexed by `sum(bit_k << k)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenormScheme {
    width: usize,
    height: usize,
    stride_space: usize,
    stride_time: usize,
    active: Vec<bool>,
    adjacency: Vec<Offset>,
}

impl RenormScheme {
    pub fn new(
        block: (usize, usize),
        stride: (usize, usize),
        active: Vec<bool>,
        adjacency: Vec<Offset>,
    ) -> Result<Self, ParamError> {
        let (width, height) = block;
        if width == 0 || height == 0 {
            return Err(ParamError::Scheme("block dimensions must be positive".into()));
        }
        if width * height > 16 {
            return Err(ParamError::Scheme("blocks larger than 16 cells are not supported".into()));
        }
        if stride.0 == 0 || stride.1 == 0 {
            return Err(ParamError::Scheme("strides must be at least 1".into()));
        }
        if active.len() != 1 << (width * height) {
            return Err(ParamError::Scheme(format!(
                "predicate has {} entries, expected {}",
                active.len(),
                1 << (width * height)
            )));
        }
        check_adjacency(&adjacency)?;
        Ok(Self {
            width,
            height,
            stride_space: stride.0,
            stride_time: stride.1,
            active,
            adjacency,
        })
    }

    /// Scheme whose active set is given as bit strings, e.g. `["10", "01"]`.
    pub fn from_patterns(
        block: (usize, usize),
        stride: (usize, usize),
        patterns: &[&str],
        adjacency: Vec<Offset>,
    ) -> Result<Self, ParamError> {
        let cells = block.0 * block.1;
        if cells == 0 || cells > 16 {
            return Err(ParamError::Scheme("block must have between 1 and 16 cells".into()));
        }
        let mut active = vec![false; 1 << cells];
        for pat in patterns {
            active[parse_block_pattern(pat, cells)?] = true;
        }
        Self::new(block, stride, active, adjacency)
    }

    /// Scheme active when at least `min_occupied` block cells are occupied.
    pub fn threshold(
        block: (usize, usize),
        stride: (usize, usize),
        min_occupied: u32,
        adjacency: Vec<Offset>,
    ) -> Result<Self, ParamError> {
        let cells = block.0 * block.1;
        if cells == 0 || cells > 16 {
            return Err(ParamError::Scheme("block must have between 1 and 16 cells".into()));
        }
        let active = (0..1usize << cells).map(|m| m.count_ones() >= min_occupied).collect();
        Self::new(block, stride, active, adjacency)
    }

    pub fn block(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn stride(&self) -> (usize, usize) {
        (self.stride_space, self.stride_time)
    }

    pub fn adjacency(&self) -> &[Offset] {
        &self.adjacency
    }

    #[inline]
    pub fn is_active(&self, block_pattern: usize) -> bool {
        self.active[block_pattern]
    }

    /// Activity of a pattern written as a bit string.
    pub fn is_active_str(&self, pattern: &str) -> Result<bool, ParamError> {
        Ok(self.active[parse_block_pattern(pattern, self.width * self.height)?])
    }

    pub fn active_patterns(&self) -> Vec<String> {
        let cells = self.width * self.height;
        (0..self.active.len())
            .filter(|&m| self.active[m])
            .map(|m| (0..cells).map(|k| if m >> k & 1 == 1 { '1' } else { '0' }).collect())
            .collect()
    }

    pub fn with_stride(mut self, stride: (usize, usize)) -> Result<Self, ParamError> {
        if stride.0 == 0 || stride.1 == 0 {
            return Err(ParamError::Scheme("strides must be at least 1".into()));
        }
        self.stride_space = stride.0;
        self.stride_time = stride.1;
        Ok(self)
    }
}

pub(crate) fn check_adjacency(adjacency: &[Offset]) -> Result<(), ParamError> {
    for &(dx, dt) in adjacency {
        if dx == 0 && dt == 0 {
            return Err(ParamError::Scheme("adjacency offset (0, 0) is not allowed".into()));
        }
        if !adjacency.contains(&(-dx, -dt)) {
            return Err(ParamError::Scheme(format!(
                "adjacency is not symmetric: ({dx}, {dt}) without ({}, {})",
                -dx, -dt
            )));
        }
    }
    Ok(())
}

fn parse_block_pattern(pattern: &str, cells: usize) -> Result<usize, ParamError> {
    if pattern.len() != cells {
        return Err(ParamError::Scheme(format!(
            "block pattern {pattern:?} must have {cells} bits"
        )));
    }
    pattern.bytes().enumerate().try_fold(0usize, |acc, (k, b)| match b {
        b'0' => Ok(acc),
        b'1' => Ok(acc | 1 << k),
        _ => Err(ParamError::Scheme(format!("block pattern {pattern:?} is not a bit string"))),
    })
}

fn nearest() -> Vec<Offset> {
    NEAREST.to_vec()
}

fn with_diagonals() -> Vec<Offset> {
    NEAREST.iter().chain(DIAGONAL.iter()).copied().collect()
}

/// Default convention for each renormalized pattern.
///
/// Dipoles are spatial 2x1 blocks with exactly one occupied site, quadrupoles
/// 2x2 blocks occupied on one diagonal, plaquettes 2x2 blocks with at least
/// three occupied sites. Plain kinds use nearest-neighbour adjacency; `+`
/// kinds add the four diagonal offsets. Blocks are disjoint.
pub fn builtin_scheme(kind: PatternKind) -> Result<RenormScheme, ParamError> {
    let scheme = match kind {
        PatternKind::A => return Err(ParamError::AbsorbingScheme),
        PatternKind::D => RenormScheme::from_patterns((2, 1), (2, 1), &["10", "01"], nearest()),
        PatternKind::Dplus => RenormScheme::from_patterns((2, 1), (2, 1), &["10", "01"], with_diagonals()),
        PatternKind::Q => RenormScheme::from_patterns((2, 2), (2, 2), &["1001", "0110"], nearest()),
        PatternKind::Qplus => RenormScheme::from_patterns((2, 2), (2, 2), &["1001", "0110"], with_diagonals()),
        PatternKind::PL => RenormScheme::threshold((2, 2), (2, 2), 3, nearest()),
    };
    Ok(scheme.expect("builtin schemes are valid"))
}

/// Plain site lattice: every occupied cell is an active site, all eight
/// surrounding cells are neighbours. Used for site percolation of fields
/// that lack automaton causality.
pub fn site_scheme() -> RenormScheme {
    RenormScheme::from_patterns((1, 1), (1, 1), &["1"], with_diagonals()).expect("site scheme is valid")
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SchemeEntry {
    block: [usize; 2],
    stride: Option<[usize; 2]>,
    active: Vec<String>,
    adjacency: Vec<[isize; 2]>,
}

/// Parses a scheme override document.
///
/// The document is TOML with one table per pattern name (`PL`, `Qplus`,
/// `Dplus`, `Q`, `D`; `"Q+"` and `"D+"` are accepted):
///
/// ```toml
/// [D]
/// block = [2, 1]          # width (space), height (time)
/// stride = [2, 1]         # optional, defaults to the block shape
/// active = ["10", "01"]   # active block patterns, row-major bit strings
/// adjacency = [[1, 0], [-1, 0], [0, 1], [0, -1]]
/// ```
pub fn parse_scheme_overrides(text: &str) -> Result<BTreeMap<PatternKind, RenormScheme>, ParamError> {
    let raw: BTreeMap<String, SchemeEntry> =
        toml::from_str(text).map_err(|e| ParamError::Scheme(e.to_string()))?;
    let mut out = BTreeMap::new();
    for (name, entry) in raw {
        let kind: PatternKind = name.parse()?;
        if kind == PatternKind::A {
            return Err(ParamError::AbsorbingScheme);
        }
        let block = (entry.block[0], entry.block[1]);
        let stride = entry.stride.map_or(block, |s| (s[0], s[1]));
        let patterns: Vec<&str> = entry.active.iter().map(String::as_str).collect();
        let adjacency = entry.adjacency.iter().map(|o| (o[0], o[1])).collect();
        let scheme = RenormScheme::from_patterns(block, stride, &patterns, adjacency)
            .map_err(|e| ParamError::Scheme(format!("{name}: {e}")))?;
        out.insert(kind, scheme);
    }
    Ok(out)
}

/// Renders a scheme as an override table, the inverse of [`parse_scheme_overrides`].
pub fn format_scheme(kind: PatternKind, scheme: &RenormScheme) -> String {
    let active: Vec<String> = scheme.active_patterns().iter().map(|p| format!("{p:?}")).collect();
    let adjacency: Vec<String> = scheme.adjacency.iter().map(|(dx, dt)| format!("[{dx}, {dt}]")).collect();
    format!(
        "[{}]\nblock = [{}, {}]\nstride = [{}, {}]\nactive = [{}]\nadjacency = [{}]\n",
        kind.name(),
        scheme.width,
        scheme.height,
        scheme.stride_space,
        scheme.stride_time,
        active.join(", "),
        adjacency.join(", ")
    )
}
