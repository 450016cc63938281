//! `.gsb` basis files.
//!
//! Layout, all little-endian:
//!
//! ```text
//! "GSB1"            4 bytes   magic
//! version           u32       = 1
//! n                 u32       > 0
//! threshold_mi      f64
//! site fingerprint  32 bytes  SHA-256 of the ordered site list
//! n × site          u16 id length, id bytes (UTF-8), f64 lat, f64 lon
//! n × f64           eigenvalues, ascending
//! n·n × f64         eigenvectors, column-major
//! ```
//!
//! A basis only applies to scenes over exactly the same ordered sites; the
//! fingerprint is recomputed on load and must match the header.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::scene::{Fingerprint, Site, SiteIndex};
use crate::spectral::GraphSpectralBasis;

pub const MAGIC: [u8; 4] = *b"GSB1";
pub const FORMAT_VERSION: u32 = 1;
/// Bytes before the site table.
pub const HEADER_LEN: usize = 4 + 4 + 4 + 8 + 32;

#[derive(Debug, Error)]
pub enum PersistError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a basis file: magic is {found:?}, expected \"GSB1\"")]
    BadMagic { found: String },
    #[error("unsupported basis file version {0}")]
    UnsupportedVersion(u32),
    #[error("basis file truncated at byte offset {offset} (needed {needed} more bytes)")]
    Truncated { offset: usize, needed: usize },
    #[error("malformed basis file at byte offset {offset}: {reason}")]
    Malformed { offset: usize, reason: String },
    #[error("basis file is corrupt: header fingerprint {stored}, site table hashes to {computed}")]
    Corrupt { stored: Fingerprint, computed: Fingerprint },
    #[error("basis belongs to sites {basis}, given sites {sites}")]
    FingerprintMismatch { basis: Fingerprint, sites: Fingerprint },
}

impl PersistError {
    /// True for every way a file can fail to be a valid basis file.
    pub fn is_format_error(&self) -> bool {
        !matches!(self, PersistError::Io(_) | PersistError::FingerprintMismatch { .. })
    }
}

/// Serialize to an in-memory buffer.
pub fn encode_basis(basis: &GraphSpectralBasis, sites: &SiteIndex) -> Result<Vec<u8>, PersistError> {
    if basis.site_fingerprint() != sites.fingerprint() {
        return Err(PersistError::FingerprintMismatch { basis: basis.site_fingerprint(), sites: sites.fingerprint() });
    }
    let n = basis.n();
    let mut buf = Vec::with_capacity(HEADER_LEN + n * 40 + (n + n * n) * 8);
    buf.extend_from_slice(&MAGIC);
    buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    buf.extend_from_slice(&(n as u32).to_le_bytes());
    buf.extend_from_slice(&basis.threshold_mi().to_le_bytes());
    buf.extend_from_slice(&sites.fingerprint().0);
    for s in sites.sites() {
        s.encode_into(&mut buf);
    }
    for v in basis.eigenvalues().iter().chain(basis.eigenvectors()) {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    Ok(buf)
}

pub fn write_basis<W: Write>(
    basis: &GraphSpectralBasis,
    sites: &SiteIndex,
    mut writer: W,
) -> Result<u64, PersistError> {
    let buf = encode_basis(basis, sites)?;
    writer.write_all(&buf)?;
    writer.flush()?;
    Ok(buf.len() as u64)
}

/// Write atomically: a temporary file in the destination directory is renamed
/// over `path` only once fully written.
pub fn save_basis(basis: &GraphSpectralBasis, sites: &SiteIndex, path: &Path) -> Result<u64, PersistError> {
    let buf = encode_basis(basis, sites)?;
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(&buf)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| PersistError::Io(e.error))?;
    Ok(buf.len() as u64)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    offset: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8], PersistError> {
        let remaining = self.bytes.len() - self.offset;
        if remaining < len {
            return Err(PersistError::Truncated { offset: self.bytes.len(), needed: len - remaining });
        }
        let out = &self.bytes[self.offset..self.offset + len];
        self.offset += len;
        Ok(out)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N], PersistError> {
        Ok(self.take(N)?.try_into().expect("length checked"))
    }

    fn u16(&mut self) -> Result<u16, PersistError> {
        Ok(u16::from_le_bytes(self.array()?))
    }

    fn u32(&mut self) -> Result<u32, PersistError> {
        Ok(u32::from_le_bytes(self.array()?))
    }

    fn f64(&mut self) -> Result<f64, PersistError> {
        Ok(f64::from_le_bytes(self.array()?))
    }

    fn f64s(&mut self, count: usize) -> Result<Vec<f64>, PersistError> {
        let raw = self.take(count * 8)?;
        Ok(raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
    }
}

/// Parse a complete `.gsb` image.
pub fn decode_basis(bytes: &[u8]) -> Result<(GraphSpectralBasis, SiteIndex), PersistError> {
    let mut cur = Cursor { bytes, offset: 0 };

    let magic: [u8; 4] = cur.array()?;
    if magic != MAGIC {
        return Err(PersistError::BadMagic { found: String::from_utf8_lossy(&magic).into_owned() });
    }
    let version = cur.u32()?;
    if version != FORMAT_VERSION {
        return Err(PersistError::UnsupportedVersion(version));
    }
    let n_offset = cur.offset;
    let n = cur.u32()? as usize;
    if n == 0 {
        return Err(PersistError::Malformed { offset: n_offset, reason: "site count is zero".into() });
    }
    let threshold_mi = cur.f64()?;
    let stored = Fingerprint(cur.array()?);

    let mut sites = Vec::with_capacity(n);
    for _ in 0..n {
        let at = cur.offset;
        let len = cur.u16()? as usize;
        let id = std::str::from_utf8(cur.take(len)?)
            .map_err(|_| PersistError::Malformed { offset: at, reason: "station id is not UTF-8".into() })?
            .to_string();
        let lat = cur.f64()?;
        let lon = cur.f64()?;
        sites.push(Site::new(id, lat, lon));
    }
    let table_end = cur.offset;
    let index =
        SiteIndex::new(sites).map_err(|e| PersistError::Malformed { offset: table_end, reason: e.to_string() })?;
    if index.fingerprint() != stored {
        return Err(PersistError::Corrupt { stored, computed: index.fingerprint() });
    }

    let eigenvalues = cur.f64s(n)?;
    let eigenvectors = cur.f64s(
        n.checked_mul(n).ok_or(PersistError::Malformed { offset: n_offset, reason: "site count overflows".into() })?,
    )?;
    if cur.offset != bytes.len() {
        return Err(PersistError::Malformed {
            offset: cur.offset,
            reason: format!("{} trailing bytes", bytes.len() - cur.offset),
        });
    }
    let basis =
        GraphSpectralBasis::from_parts(eigenvalues, eigenvectors, stored, threshold_mi).expect("shapes follow from n");
    Ok((basis, index))
}

pub fn read_basis<R: Read>(mut reader: R) -> Result<(GraphSpectralBasis, SiteIndex), PersistError> {
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    decode_basis(&bytes)
}

pub fn load_basis(path: &Path) -> Result<(GraphSpectralBasis, SiteIndex), PersistError> {
    decode_basis(&fs::read(path)?)
}
