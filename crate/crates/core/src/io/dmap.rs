use std::path::Path;

use super::{read_bytes, write_bytes, FormatError};
use crate::raster::Raster;

const MAGIC: &[u8; 4] = b"DMAP";
const HEADER_LEN: usize = 12;

pub fn encode_dmap(r: &Raster) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + r.values().len() * 4);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&r.width().to_le_bytes());
    out.extend_from_slice(&r.height().to_le_bytes());
    for v in r.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_dmap(bytes: &[u8]) -> Result<Raster, FormatError> {
    if bytes.len() < HEADER_LEN {
        return Err(FormatError::Truncated { what: "DMAP header", offset: bytes.len() });
    }
    if &bytes[..4] != MAGIC {
        return Err(FormatError::Invalid(format!("bad DMAP magic {:?}", &bytes[..4])));
    }
    let width = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    let height = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    let n = width as usize * height as usize;
    let end = HEADER_LEN + n * 4;
    if bytes.len() < end {
        // offset of the first incomplete value
        let offset = HEADER_LEN + (bytes.len() - HEADER_LEN) / 4 * 4;
        return Err(FormatError::Truncated { what: "DMAP payload", offset });
    }
    if bytes.len() > end {
        return Err(FormatError::Invalid(format!("DMAP has trailing bytes at offset {end}")));
    }
    let values = bytes[HEADER_LEN..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(Raster::new(width, height, values).expect("length checked"))
}

pub fn read_dmap(path: &Path) -> Result<Raster, FormatError> {
    decode_dmap(&read_bytes(path)?)
}

pub fn write_dmap(path: &Path, r: &Raster) -> Result<(), FormatError> {
    write_bytes(path, &encode_dmap(r))
}
