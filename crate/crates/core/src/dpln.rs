//! DPLN plane interchange format: magic "DPLN", u32 LE version (=1),
//! u32 LE height, u32 LE width, then height*width float32 LE samples
//! row-major.

use std::io::{Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use crate::error::{Error, Result};
use crate::plane::Plane;

const MAGIC: &[u8; 4] = b"DPLN";
const VERSION: u32 = 1;

pub fn write_plane<W: Write>(plane: &Plane, mut out: W) -> std::io::Result<()> {
    out.write_all(MAGIC)?;
    out.write_u32::<LittleEndian>(VERSION)?;
    out.write_u32::<LittleEndian>(plane.height() as u32)?;
    out.write_u32::<LittleEndian>(plane.width() as u32)?;
    for &s in plane.samples() {
        out.write_f32::<LittleEndian>(s as f32)?;
    }
    Ok(())
}

pub fn read_plane<R: Read>(mut input: R) -> Result<Plane> {
    let corrupt = |detail: &str| Error::CorruptData {
        path: "<stream>".into(),
        detail: detail.into(),
    };
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic).map_err(|_| corrupt("short header"))?;
    if &magic != MAGIC {
        return Err(corrupt("bad magic"));
    }
    let version = input
        .read_u32::<LittleEndian>()
        .map_err(|_| corrupt("short header"))?;
    if version != VERSION {
        return Err(corrupt(&format!("unsupported version {version}")));
    }
    let height = input
        .read_u32::<LittleEndian>()
        .map_err(|_| corrupt("short header"))? as usize;
    let width = input
        .read_u32::<LittleEndian>()
        .map_err(|_| corrupt("short header"))? as usize;
    let mut samples = Vec::with_capacity(width * height);
    for _ in 0..width * height {
        let v = input
            .read_f32::<LittleEndian>()
            .map_err(|_| corrupt("truncated sample data"))?;
        samples.push(v as f64);
    }
    Plane::new(width, height, samples)
}

pub fn save_plane(plane: &Plane, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut buf = Vec::with_capacity(16 + plane.len() * 4);
    write_plane(plane, &mut buf).expect("in-memory write");
    std::fs::write(path, buf).map_err(|source| Error::WriteFailed {
        path: path.into(),
        source,
    })
}

pub fn load_plane(path: impl AsRef<Path>) -> Result<Plane> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| Error::Unreadable {
        path: path.into(),
        source,
    })?;
    read_plane(std::io::Cursor::new(bytes)).map_err(|e| match e {
        Error::CorruptData { detail, .. } => Error::CorruptData {
            path: path.into(),
            detail,
        },
        other => other,
    })
}
