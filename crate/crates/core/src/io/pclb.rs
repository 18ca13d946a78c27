use std::path::Path;

use log::warn;

use super::{read_bytes, write_bytes, FormatError};
use crate::geometry::{PointCloud, Vec3};

const MAGIC: &[u8; 4] = b"PCLB";
const HEADER_LEN: usize = 9;

/// A parsed cloud plus the number of records dropped for non-finite values.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedCloud {
    pub cloud: PointCloud,
    pub dropped: usize,
}

pub fn encode_pclb(cloud: &PointCloud) -> Vec<u8> {
    let fields: u8 = if cloud.intensity().is_some() { 4 } else { 3 };
    let mut out = Vec::with_capacity(HEADER_LEN + cloud.len() * fields as usize * 4);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(cloud.len() as u32).to_le_bytes());
    out.push(fields);
    for (i, p) in cloud.points().iter().enumerate() {
        for c in p.iter() {
            out.extend_from_slice(&(*c as f32).to_le_bytes());
        }
        if let Some(int) = cloud.intensity() {
            out.extend_from_slice(&(int[i] as f32).to_le_bytes());
        }
    }
    out
}

/// Decodes a `PCLB` payload, or whitespace-separated `x y z [intensity]`
/// text when the magic is absent. Non-finite records are dropped.
pub fn decode_point_cloud(bytes: &[u8]) -> Result<LoadedCloud, FormatError> {
    if bytes.starts_with(MAGIC) {
        decode_binary(bytes)
    } else {
        decode_ascii(bytes)
    }
}

fn decode_binary(bytes: &[u8]) -> Result<LoadedCloud, FormatError> {
    if bytes.len() < HEADER_LEN {
        return Err(FormatError::Truncated { what: "PCLB header", offset: bytes.len() });
    }
    let count = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let fields = bytes[8] as usize;
    if fields != 3 && fields != 4 {
        return Err(FormatError::Invalid(format!("PCLB fields per point must be 3 or 4, got {fields}")));
    }
    let record = fields * 4;
    let mut points = Vec::with_capacity(count);
    let mut intensity = (fields == 4).then(|| Vec::with_capacity(count));
    let mut dropped = 0;
    for i in 0..count {
        let offset = HEADER_LEN + i * record;
        let Some(rec) = bytes.get(offset..offset + record) else {
            return Err(FormatError::Truncated { what: "PCLB record", offset });
        };
        let vals: Vec<f32> = rec.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect();
        if vals.iter().any(|v| !v.is_finite()) {
            dropped += 1;
            continue;
        }
        points.push(Vec3::new(f64::from(vals[0]), f64::from(vals[1]), f64::from(vals[2])));
        if let Some(int) = intensity.as_mut() {
            int.push(f64::from(vals[3]));
        }
    }
    let end = HEADER_LEN + count * record;
    if bytes.len() > end {
        return Err(FormatError::Invalid(format!("PCLB has trailing bytes at offset {end}")));
    }
    finish(points, intensity, dropped)
}

fn decode_ascii(bytes: &[u8]) -> Result<LoadedCloud, FormatError> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| FormatError::Invalid(format!("neither PCLB nor UTF-8 text: {e}")))?;
    let mut points = Vec::new();
    let mut intensity: Option<Vec<f64>> = None;
    let mut dropped = 0;
    let mut fields = None;
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let vals = line
            .split_whitespace()
            .map(str::parse::<f64>)
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| FormatError::Text { line: n + 1, message: e.to_string() })?;
        if vals.len() != 3 && vals.len() != 4 {
            return Err(FormatError::Text { line: n + 1, message: format!("expected 3 or 4 values, got {}", vals.len()) });
        }
        match fields {
            None => {
                fields = Some(vals.len());
                if vals.len() == 4 {
                    intensity = Some(Vec::new());
                }
            }
            Some(f) if f != vals.len() => {
                return Err(FormatError::Text { line: n + 1, message: format!("expected {f} values like previous lines") });
            }
            _ => {}
        }
        if vals.iter().any(|v| !v.is_finite()) {
            dropped += 1;
            continue;
        }
        points.push(Vec3::new(vals[0], vals[1], vals[2]));
        if let Some(int) = intensity.as_mut() {
            int.push(vals[3]);
        }
    }
    finish(points, intensity, dropped)
}

fn finish(points: Vec<Vec3>, intensity: Option<Vec<f64>>, dropped: usize) -> Result<LoadedCloud, FormatError> {
    let cloud = PointCloud::new(points, intensity).map_err(|e| FormatError::Invalid(e.to_string()))?;
    Ok(LoadedCloud { cloud, dropped })
}

pub fn read_point_cloud(path: &Path) -> Result<LoadedCloud, FormatError> {
    let loaded = decode_point_cloud(&read_bytes(path)?)?;
    if loaded.dropped > 0 {
        warn!("{}: dropped {} non-finite points", path.display(), loaded.dropped);
    }
    Ok(loaded)
}

pub fn write_point_cloud(path: &Path, cloud: &PointCloud) -> Result<(), FormatError> {
    write_bytes(path, &encode_pclb(cloud))
}
