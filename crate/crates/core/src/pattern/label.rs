use std::collections::BTreeMap;
use std::fmt;

use crate::error::ParamError;
use crate::field::SpaceTimeField;

use super::cluster::spanning;
use super::renorm::{renormalize, renormalize_cells, Cells};
use super::scheme::{builtin_scheme, site_scheme, PatternKind, RenormScheme};

/// Six pattern flags in canonical order. Percolating is `!A`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct MultiHotTarget([bool; 6]);

impl MultiHotTarget {
    pub const ABSORBING: MultiHotTarget = MultiHotTarget([true, false, false, false, false, false]);

    /// Rejects `A` set together with any pattern flag.
    pub fn new(flags: [bool; 6]) -> Result<Self, ParamError> {
        if flags[0] && flags[1..].iter().any(|&f| f) {
            return Err(ParamError::Scheme("absorbing target with pattern flags set".into()));
        }
        Ok(Self(flags))
    }

    pub fn flags(&self) -> [bool; 6] {
        self.0
    }

    pub fn get(&self, kind: PatternKind) -> bool {
        self.0[kind.index()]
    }

    pub fn percolating(&self) -> bool {
        !self.0[0]
    }

    /// Bit `k` set for canonical pattern `k`.
    pub fn mask(&self) -> u8 {
        self.0.iter().enumerate().fold(0, |m, (k, &f)| m | (u8::from(f) << k))
    }

    pub fn from_mask(mask: u8) -> Result<Self, ParamError> {
        if mask & 0xC0 != 0 {
            return Err(ParamError::Scheme(format!("target mask {mask:#04x} has bits 6-7 set")));
        }
        Self::new(std::array::from_fn(|k| mask >> k & 1 == 1))
    }

    /// Single class by the fixed-order rule: the last set pattern flag in
    /// canonical order, else `A`, else percolating without a pattern.
    pub fn class(&self) -> PhaseClass {
        if let Some(kind) = PatternKind::PATTERNS.iter().rev().find(|k| self.get(**k)) {
            return PhaseClass::Pattern(*kind);
        }
        if self.0[0] {
            PhaseClass::Absorbing
        } else {
            PhaseClass::PercolatingOnly
        }
    }
}

impl fmt::Display for MultiHotTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bits: Vec<&str> = self.0.iter().map(|&b| if b { "1" } else { "0" }).collect();
        write!(f, "[{}]", bits.join(","))
    }
}

/// Single-label phase class used in phase maps and prevalence tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PhaseClass {
    Absorbing,
    Pattern(PatternKind),
    PercolatingOnly,
}

impl PhaseClass {
    pub const ALL: [PhaseClass; 7] = [
        PhaseClass::Absorbing,
        PhaseClass::Pattern(PatternKind::PL),
        PhaseClass::Pattern(PatternKind::Qplus),
        PhaseClass::Pattern(PatternKind::Dplus),
        PhaseClass::Pattern(PatternKind::Q),
        PhaseClass::Pattern(PatternKind::D),
        PhaseClass::PercolatingOnly,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PhaseClass::Absorbing => "A",
            PhaseClass::Pattern(k) => k.name(),
            PhaseClass::PercolatingOnly => "P",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "A" => Some(PhaseClass::Absorbing),
            "P" => Some(PhaseClass::PercolatingOnly),
            other => other.parse::<PatternKind>().ok().map(PhaseClass::Pattern),
        }
    }
}

impl fmt::Display for PhaseClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Automaton survival: the last row still holds an occupied site.
///
/// Only meaningful for automaton output, where every occupied cell has an
/// occupied parent, so a non-empty last row implies a directed path back to
/// row 0.
pub fn site_percolates(field: &SpaceTimeField) -> bool {
    field.n_rows() > 0 && !field.row_is_empty(field.n_rows() - 1)
}

/// Schemes for the five renormalized patterns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labeler {
    schemes: [RenormScheme; 5],
}

impl Default for Labeler {
    fn default() -> Self {
        Self {
            schemes: PatternKind::PATTERNS.map(|k| builtin_scheme(k).expect("pattern kinds have schemes")),
        }
    }
}

impl Labeler {
    /// Builtin schemes with the given patterns replaced.
    pub fn with_overrides(overrides: &BTreeMap<PatternKind, RenormScheme>) -> Result<Self, ParamError> {
        let mut labeler = Self::default();
        for (&kind, scheme) in overrides {
            if kind == PatternKind::A {
                return Err(ParamError::AbsorbingScheme);
            }
            labeler.schemes[kind.index() - 1] = scheme.clone();
        }
        Ok(labeler)
    }

    pub fn scheme(&self, kind: PatternKind) -> Option<&RenormScheme> {
        kind.index().checked_sub(1).map(|i| &self.schemes[i])
    }

    /// Whether the renormalized lattice of `kind` spans `field` in time.
    pub fn spans(&self, field: &SpaceTimeField, kind: PatternKind) -> Result<bool, ParamError> {
        let scheme = self.scheme(kind).ok_or(ParamError::AbsorbingScheme)?;
        let rf = renormalize(field, scheme)?;
        Ok(spanning(&rf, rf.periodic()))
    }

    /// Label of an automaton field: `A` from survival, patterns from spanning.
    pub fn label(&self, field: &SpaceTimeField) -> Result<MultiHotTarget, ParamError> {
        self.label_with_survival(field, site_percolates(field))
    }

    /// Label of a field without automaton causality; survival is replaced
    /// by spanning of the plain site lattice.
    pub fn label_isotropic(&self, field: &SpaceTimeField) -> Result<MultiHotTarget, ParamError> {
        let rf = renormalize(field, &site_scheme())?;
        self.label_with_survival(field, spanning(&rf, rf.periodic()))
    }

    fn label_with_survival(&self, field: &SpaceTimeField, survives: bool) -> Result<MultiHotTarget, ParamError> {
        let mut flags = [false; 6];
        if !survives {
            flags[0] = true;
            // pattern sizes are still validated
            for scheme in &self.schemes {
                let (w, h) = scheme.block();
                if w > field.n_sites() || h > field.n_rows() {
                    return Err(ParamError::FieldTooSmall {
                        sites: field.n_sites(),
                        rows: field.n_rows(),
                        w,
                        h,
                    });
                }
            }
            return MultiHotTarget::new(flags);
        }
        let cells = Cells::unpack(field);
        for (kind, scheme) in PatternKind::PATTERNS.iter().zip(&self.schemes) {
            let rf = renormalize_cells(&cells, scheme)?;
            flags[kind.index()] = spanning(&rf, rf.periodic());
        }
        MultiHotTarget::new(flags)
    }
}

/// Ground-truth label with the builtin schemes.
pub fn label_field(field: &SpaceTimeField) -> Result<MultiHotTarget, ParamError> {
    Labeler::default().label(field)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn checkerboard(n: usize, rows: usize) -> SpaceTimeField {
        let mut f = SpaceTimeField::zeros(n, rows);
        for t in 0..rows {
            for i in 0..n {
                f.set(t, i, (i + t) % 2 == 0);
            }
        }
        f
    }

    #[test]
    fn label_examples() {
        let zero = SpaceTimeField::zeros(10, 21);
        assert_eq!(label_field(&zero).unwrap().flags(), [true, false, false, false, false, false]);
        let ones = SpaceTimeField::ones(10, 21);
        assert_eq!(label_field(&ones).unwrap().flags(), [false, true, false, false, false, false]);
        let cb = checkerboard(10, 21);
        assert_eq!(label_field(&cb).unwrap().flags(), [false, false, true, true, true, true]);
    }

    #[test]
    fn mask_round_trip() {
        for mask in 0u8..64 {
            match MultiHotTarget::from_mask(mask) {
                Ok(t) => assert_eq!(t.mask(), mask),
                Err(_) => assert!(mask & 1 == 1 && mask > 1),
            }
        }
        assert!(MultiHotTarget::from_mask(0x40).is_err());
        assert_eq!(MultiHotTarget::new([false, true, false, false, false, false]).unwrap().mask(), 0b10);
    }

    #[test]
    fn class_is_last_set_pattern() {
        let t = MultiHotTarget::new([false, false, true, true, true, true]).unwrap();
        assert_eq!(t.class(), PhaseClass::Pattern(PatternKind::D));
        let t = MultiHotTarget::new([false, true, false, false, false, false]).unwrap();
        assert_eq!(t.class(), PhaseClass::Pattern(PatternKind::PL));
        assert_eq!(MultiHotTarget::ABSORBING.class(), PhaseClass::Absorbing);
        assert_eq!(MultiHotTarget::default().class(), PhaseClass::PercolatingOnly);
        assert!(MultiHotTarget::default().percolating());
    }

    #[test]
    fn site_percolation() {
        let mut f = SpaceTimeField::ones(5, 4);
        assert!(site_percolates(&f));
        f.set_row(3, &[false; 5]);
        assert!(!site_percolates(&f));
    }

    #[test]
    fn overrides_replace_one_scheme() {
        let mut map = BTreeMap::new();
        let d = builtin_scheme(PatternKind::D).unwrap().with_stride((1, 1)).unwrap();
        map.insert(PatternKind::D, d.clone());
        let labeler = Labeler::with_overrides(&map).unwrap();
        assert_eq!(labeler.scheme(PatternKind::D), Some(&d));
        assert_eq!(labeler.scheme(PatternKind::Q), Some(&builtin_scheme(PatternKind::Q).unwrap()));
        assert!(labeler.scheme(PatternKind::A).is_none());
    }

    #[test]
    fn too_small_field_errors() {
        let f = SpaceTimeField::zeros(3, 1);
        assert!(label_field(&f).is_err());
    }
}
