//! Bit-exact binary persistence of flow states.
//!
//! Layout: magic `GMCF1\n` (6 bytes), then little-endian `u32 m`, `u32 n`,
//! `u32 N`, `f64 L`, `f64 band`, `u8 mode` (0 raw / 1 normalized),
//! `f64 time`, `u64 step_count`, followed by `N^m * n` f64 values in
//! lexicographic node order. The header occupies 51 bytes before the
//! payload. Roundtrip is the identity at the bit level.

use std::fmt;
use std::fs::File;
use std::io::{self, Read, Write};
use std::path::Path;

use crate::flow::{FlowState, Mode};
use crate::grid::{build_grid, GridMap};

pub const MAGIC: &[u8; 6] = b"GMCF1\n";
/// 6 + 4*3 + 8*2 + 1 + 8 + 8.
pub const HEADER_LEN: usize = 51;

#[derive(Debug)]
pub enum SnapshotError {
    Io(io::Error),
    BadMagic,
    Truncated,
    BadMode(u8),
    BadGrid(String),
}

impl fmt::Display for SnapshotError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SnapshotError::Io(e) => write!(f, "{e}"),
            SnapshotError::BadMagic => write!(f, "bad magic"),
            SnapshotError::Truncated => write!(f, "truncated payload"),
            SnapshotError::BadMode(b) => write!(f, "bad mode byte {b}"),
            SnapshotError::BadGrid(s) => write!(f, "invalid grid header: {s}"),
        }
    }
}

impl std::error::Error for SnapshotError {}

impl From<io::Error> for SnapshotError {
    fn from(e: io::Error) -> Self {
        SnapshotError::Io(e)
    }
}

pub fn write_snapshot(state: &FlowState, path: &Path) -> Result<(), SnapshotError> {
    let grid = &state.map.grid;
    let mut buf = Vec::with_capacity(HEADER_LEN + state.map.values.len() * 8);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&(grid.m as u32).to_le_bytes());
    buf.extend_from_slice(&(state.map.n as u32).to_le_bytes());
    buf.extend_from_slice(&(grid.nodes as u32).to_le_bytes());
    buf.extend_from_slice(&grid.half_width.to_le_bytes());
    buf.extend_from_slice(&grid.band.to_le_bytes());
    buf.push(match state.mode {
        Mode::Raw => 0,
        Mode::Normalized => 1,
    });
    buf.extend_from_slice(&state.time.to_le_bytes());
    buf.extend_from_slice(&state.step_count.to_le_bytes());
    debug_assert_eq!(buf.len(), HEADER_LEN);
    for v in &state.map.values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    let mut file = File::create(path)?;
    file.write_all(&buf)?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<FlowState, SnapshotError> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() < HEADER_LEN {
        return Err(if bytes.starts_with(MAGIC) || bytes.len() < 6 {
            SnapshotError::Truncated
        } else {
            SnapshotError::BadMagic
        });
    }
    if &bytes[..6] != MAGIC {
        return Err(SnapshotError::BadMagic);
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as usize;
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let m = u32_at(6);
    let n = u32_at(10);
    let nodes = u32_at(14);
    let half_width = f64_at(18);
    let band = f64_at(26);
    let mode = match bytes[34] {
        0 => Mode::Raw,
        1 => Mode::Normalized,
        b => return Err(SnapshotError::BadMode(b)),
    };
    let time = f64_at(35);
    let step_count = u64::from_le_bytes(bytes[43..51].try_into().unwrap());
    let grid =
        build_grid(m, nodes, half_width, band).map_err(|e| SnapshotError::BadGrid(e.to_string()))?;
    let count = grid.node_count() * n;
    if bytes.len() != HEADER_LEN + count * 8 {
        return Err(SnapshotError::Truncated);
    }
    let mut values = Vec::with_capacity(count);
    for i in 0..count {
        values.push(f64_at(HEADER_LEN + i * 8));
    }
    let map = GridMap { grid, n, values };
    Ok(FlowState {
        map,
        time,
        mode,
        step_count,
    })
}
