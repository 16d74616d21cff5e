//! Raster rendering of phase maps.

use std::path::Path;

use image::{Rgb, RgbImage};
use percolab_core::pattern::PatternKind;
use percolab_core::{PhaseClass, PhaseMap};

pub fn class_color(class: PhaseClass) -> Rgb<u8> {
    match class {
        PhaseClass::Absorbing => Rgb([40, 40, 40]),
        PhaseClass::Pattern(PatternKind::PL) => Rgb([230, 159, 0]),
        PhaseClass::Pattern(PatternKind::Qplus) => Rgb([86, 180, 233]),
        PhaseClass::Pattern(PatternKind::Dplus) => Rgb([0, 158, 115]),
        PhaseClass::Pattern(PatternKind::Q) => Rgb([0, 114, 178]),
        PhaseClass::Pattern(PatternKind::D) => Rgb([213, 94, 0]),
        PhaseClass::Pattern(PatternKind::A) => Rgb([40, 40, 40]),
        PhaseClass::PercolatingOnly => Rgb([220, 220, 220]),
    }
}

/// One `scale x scale` square per cell; `p` grows to the right, `q` grows upward.
pub fn phase_map_image(map: &PhaseMap, scale: u32) -> RgbImage {
    let (np, nq) = (map.p_grid.len() as u32, map.q_grid.len() as u32);
    RgbImage::from_fn(np * scale, nq * scale, |x, y| {
        let ip = (x / scale) as usize;
        let iq = (nq - 1 - y / scale) as usize;
        class_color(map.cell(ip, iq).class)
    })
}

pub fn write_png(map: &PhaseMap, scale: u32, path: &Path) -> Result<(), image::ImageError> {
    phase_map_image(map, scale).save_with_format(path, image::ImageFormat::Png)
}
