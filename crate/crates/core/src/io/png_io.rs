use std::io::Cursor;
use std::path::Path;

use super::{read_bytes, write_bytes, FormatError};
use crate::raster::Raster;

/// Default meters per 16-bit PNG unit.
pub const DEFAULT_PNG_SCALE: f64 = 1.0 / 256.0;

fn png_err(e: impl std::fmt::Display) -> FormatError {
    FormatError::Png(e.to_string())
}

fn encode(width: u32, height: u32, color: png::ColorType, depth: png::BitDepth, data: &[u8]) -> Result<Vec<u8>, FormatError> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, width, height);
        enc.set_color(color);
        enc.set_depth(depth);
        let mut w = enc.write_header().map_err(png_err)?;
        w.write_image_data(data).map_err(png_err)?;
    }
    Ok(out)
}

/// Writes depth as 16-bit grayscale, `unit = round(depth / scale)` clamped to
/// `1..=65535`; invalid pixels are written as 0.
pub fn write_depth_png16(path: &Path, depth: &Raster, scale: f64) -> Result<(), FormatError> {
    if !(scale > 0.0) {
        return Err(FormatError::Invalid(format!("png scale must be positive, got {scale}")));
    }
    let mut data = Vec::with_capacity(depth.values().len() * 2);
    for &v in depth.values() {
        let unit: u16 = if v.is_finite() && v > 0.0 {
            (f64::from(v) / scale).round().clamp(1.0, 65535.0) as u16
        } else {
            0
        };
        data.extend_from_slice(&unit.to_be_bytes());
    }
    let bytes = encode(depth.width(), depth.height(), png::ColorType::Grayscale, png::BitDepth::Sixteen, &data)?;
    write_bytes(path, &bytes)
}

struct Decoded {
    width: u32,
    height: u32,
    channels: usize,
    sixteen: bool,
    data: Vec<u8>,
}

fn decode(bytes: Vec<u8>) -> Result<Decoded, FormatError> {
    let mut dec = png::Decoder::new(Cursor::new(bytes));
    dec.set_transformations(png::Transformations::EXPAND);
    let mut reader = dec.read_info().map_err(png_err)?;
    let size = reader.output_buffer_size().ok_or_else(|| FormatError::Png("image too large".into()))?;
    let mut data = vec![0; size];
    let info = reader.next_frame(&mut data).map_err(png_err)?;
    data.truncate(info.buffer_size());
    Ok(Decoded {
        width: info.width,
        height: info.height,
        channels: info.color_type.samples(),
        sixteen: info.bit_depth == png::BitDepth::Sixteen,
        data,
    })
}

/// Reads a 16-bit grayscale depth PNG; 0 becomes NaN.
pub fn read_depth_png16(path: &Path, scale: f64) -> Result<Raster, FormatError> {
    let d = decode(read_bytes(path)?)?;
    if d.channels != 1 || !d.sixteen {
        return Err(FormatError::Png(format!("{}: expected 16-bit grayscale", path.display())));
    }
    let values = d
        .data
        .chunks_exact(2)
        .map(|c| match u16::from_be_bytes([c[0], c[1]]) {
            0 => f32::NAN,
            u => (f64::from(u) * scale) as f32,
        })
        .collect();
    Raster::new(d.width, d.height, values).map_err(|e| FormatError::Png(e.to_string()))
}

/// Reads any 8/16-bit gray, gray+alpha, RGB or RGBA PNG as luminance in `[0, 1]`.
pub fn read_gray_png(path: &Path) -> Result<Raster, FormatError> {
    let d = decode(read_bytes(path)?)?;
    let sample = |i: usize| -> f64 {
        if d.sixteen {
            f64::from(u16::from_be_bytes([d.data[2 * i], d.data[2 * i + 1]])) / 65535.0
        } else {
            f64::from(d.data[i]) / 255.0
        }
    };
    let n = d.width as usize * d.height as usize;
    let values = (0..n)
        .map(|p| {
            let base = p * d.channels;
            let y = if d.channels >= 3 {
                0.299 * sample(base) + 0.587 * sample(base + 1) + 0.114 * sample(base + 2)
            } else {
                sample(base)
            };
            y as f32
        })
        .collect();
    Raster::new(d.width, d.height, values).map_err(|e| FormatError::Png(e.to_string()))
}

const RAMP: [(f64, [f64; 3]); 5] = [
    (0.0, [0.0, 0.0, 131.0]),
    (0.25, [0.0, 128.0, 255.0]),
    (0.5, [128.0, 255.0, 128.0]),
    (0.75, [255.0, 128.0, 0.0]),
    (1.0, [128.0, 0.0, 0.0]),
];

/// Fixed heatmap ramp: linear interpolation between navy (0), azure (0.25),
/// light green (0.5), orange (0.75) and maroon (1). Input is clamped to `[0, 1]`.
pub fn heatmap_color(t: f64) -> [u8; 3] {
    let t = if t.is_nan() { 0.0 } else { t.clamp(0.0, 1.0) };
    let k = RAMP.windows(2).position(|w| t <= w[1].0).unwrap_or(RAMP.len() - 2);
    let ((t0, c0), (t1, c1)) = (RAMP[k], RAMP[k + 1]);
    let f = (t - t0) / (t1 - t0);
    std::array::from_fn(|i| (c0[i] + f * (c1[i] - c0[i])).round() as u8)
}

/// Renders a raster through [`heatmap_color`], scaling by `max_value` (or the
/// raster maximum when `None`). Invalid cells are black.
pub fn write_heatmap_png(path: &Path, r: &Raster, max_value: Option<f32>) -> Result<(), FormatError> {
    let max = max_value.unwrap_or_else(|| r.values().iter().copied().filter(|v| v.is_finite()).fold(0.0, f32::max));
    let mut data = Vec::with_capacity(r.values().len() * 3);
    for &v in r.values() {
        let rgb = if v.is_finite() {
            heatmap_color(if max > 0.0 { f64::from(v / max) } else { 0.0 })
        } else {
            [0, 0, 0]
        };
        data.extend_from_slice(&rgb);
    }
    let bytes = encode(r.width(), r.height(), png::ColorType::Rgb, png::BitDepth::Eight, &data)?;
    write_bytes(path, &bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn depth_png16_round_trip_quantizes() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.png");
        let r = Raster::new(3, 1, vec![10.0, f32::NAN, 1.0 / 512.0]).unwrap();
        write_depth_png16(&p, &r, DEFAULT_PNG_SCALE).unwrap();
        let back = read_depth_png16(&p, DEFAULT_PNG_SCALE).unwrap();
        assert_eq!(back.get(0, 0), 10.0);
        assert!(back.get(1, 0).is_nan());
        // rounds to one unit, never to the invalid marker
        assert_eq!(back.get(2, 0), (1.0 / 256.0) as f32);
        assert!(read_gray_png(&p).is_ok());
    }

    #[test]
    fn ramp_endpoints() {
        assert_eq!(heatmap_color(0.0), [0, 0, 131]);
        assert_eq!(heatmap_color(1.0), [128, 0, 0]);
        assert_eq!(heatmap_color(0.5), [128, 255, 128]);
        assert_eq!(heatmap_color(7.0), [128, 0, 0]);
        assert_eq!(heatmap_color(0.125), [0, 64, 193]);
    }

    #[test]
    fn heatmap_writes_rgb() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("h.png");
        write_heatmap_png(&p, &Raster::new(2, 1, vec![0.0, 2.0]).unwrap(), None).unwrap();
        let g = read_gray_png(&p).unwrap();
        assert_eq!((g.width(), g.height()), (2, 1));
    }
}
