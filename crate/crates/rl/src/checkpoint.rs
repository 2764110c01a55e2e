//! Flat binary parameter snapshots.
//!
//! Layout (all little-endian):
//!
//! ```text
//! magic            8 bytes  b"NNCKPT01"
//! section_count    u32
//! per section:
//!   name_len       u16, then UTF-8 name bytes
//!   width_count    u32, then widths as u32 each
//!   param_count    u64, then params as f64 each (row-major layer order)
//! ```
//!
//! A JSON metadata document is written next to the binary as
//! `<path>.json` with the agent kind, dimensions, config hash and seed.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::RlError;

pub const MAGIC: &[u8; 8] = b"NNCKPT01";

/// One named parameter block: `(name, widths, flat params)`. Widths are
/// the layer widths for networks, or `[len]` for bare vectors such as
/// log-std.
#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub name: String,
    pub widths: Vec<usize>,
    pub params: Vec<f64>,
}

impl Section {
    pub fn new(name: impl Into<String>, widths: Vec<usize>, params: Vec<f64>) -> Self {
        Section { name: name.into(), widths, params }
    }
}

pub fn save(
    path: &Path,
    sections: &[Section],
    metadata: &serde_json::Value,
) -> Result<(), RlError> {
    let mut buf: Vec<u8> = Vec::new();
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&(sections.len() as u32).to_le_bytes());
    for s in sections {
        let name = s.name.as_bytes();
        if name.len() > u16::MAX as usize {
            return Err(RlError::checkpoint("section name too long"));
        }
        buf.extend_from_slice(&(name.len() as u16).to_le_bytes());
        buf.extend_from_slice(name);
        buf.extend_from_slice(&(s.widths.len() as u32).to_le_bytes());
        for &w in &s.widths {
            buf.extend_from_slice(&(w as u32).to_le_bytes());
        }
        buf.extend_from_slice(&(s.params.len() as u64).to_le_bytes());
        for &p in &s.params {
            buf.extend_from_slice(&p.to_le_bytes());
        }
    }
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut f = fs::File::create(path)?;
    f.write_all(&buf)?;

    let meta_path = sidecar_path(path);
    fs::write(&meta_path, serde_json::to_string_pretty(metadata).unwrap())?;
    Ok(())
}

pub fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut os = path.as_os_str().to_owned();
    os.push(".json");
    os.into()
}

pub fn load(path: &Path) -> Result<(Vec<Section>, serde_json::Value), RlError> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    let mut at = 0usize;
    let take = |at: &mut usize, n: usize| -> Result<&[u8], RlError> {
        if *at + n > bytes.len() {
            return Err(RlError::checkpoint("truncated checkpoint"));
        }
        let s = &bytes[*at..*at + n];
        *at += n;
        Ok(s)
    };
    if take(&mut at, 8)? != MAGIC {
        return Err(RlError::checkpoint("bad magic bytes"));
    }
    let n_sections = u32::from_le_bytes(take(&mut at, 4)?.try_into().unwrap()) as usize;
    let mut sections = Vec::with_capacity(n_sections);
    for _ in 0..n_sections {
        let name_len = u16::from_le_bytes(take(&mut at, 2)?.try_into().unwrap()) as usize;
        let name = String::from_utf8(take(&mut at, name_len)?.to_vec())
            .map_err(|_| RlError::checkpoint("section name is not UTF-8"))?;
        let n_widths = u32::from_le_bytes(take(&mut at, 4)?.try_into().unwrap()) as usize;
        let mut widths = Vec::with_capacity(n_widths);
        for _ in 0..n_widths {
            widths.push(u32::from_le_bytes(take(&mut at, 4)?.try_into().unwrap()) as usize);
        }
        let n_params = u64::from_le_bytes(take(&mut at, 8)?.try_into().unwrap()) as usize;
        let mut params = Vec::with_capacity(n_params);
        for _ in 0..n_params {
            params.push(f64::from_le_bytes(take(&mut at, 8)?.try_into().unwrap()));
        }
        sections.push(Section { name, widths, params });
    }
    let metadata = match fs::read_to_string(sidecar_path(path)) {
        Ok(text) => serde_json::from_str(&text)
            .map_err(|e| RlError::checkpoint(format!("bad metadata json: {e}")))?,
        Err(_) => serde_json::Value::Null,
    };
    Ok((sections, metadata))
}

/// Fetches a named section or fails with a checkpoint error.
pub fn find<'a>(sections: &'a [Section], name: &str) -> Result<&'a Section, RlError> {
    sections
        .iter()
        .find(|s| s.name == name)
        .ok_or_else(|| RlError::checkpoint(format!("missing section `{name}`")))
}
