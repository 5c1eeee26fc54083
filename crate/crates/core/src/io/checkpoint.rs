//! Binary checkpoints with a bit-exact round trip.
//!
//! Layout (all little-endian):
//! - bytes 0..8: magic `BECOTTO1`
//! - bytes 8..12: u32 format version (currently 1)
//! - bytes 12..16: u32 N (grid points per dimension)
//! - bytes 16..64: f64 × 6: L, t, omega, alpha, mu, T
//! - bytes 64..: N³ (re, im) f64 pairs in x-fastest order
//!
//! Each checkpoint is accompanied by a human-readable `<path>.txt` sidecar
//! carrying the same metadata.

use crate::error::{Error, Result};
use crate::spectral::ComplexField3D;
use num_complex::Complex64;
use std::io::Write;
use std::path::Path;

pub const MAGIC: &[u8; 8] = b"BECOTTO1";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 8 + 4 + 4 + 6 * 8;

/// Checkpoint metadata: enough to rebuild the physical context of a state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckpointMeta {
    pub n: u32,
    /// Unit length scale L.
    pub box_scale: f64,
    /// Simulation time.
    pub t: f64,
    /// Trap frequency at save time.
    pub omega: f64,
    /// Interaction multiplier.
    pub alpha: f64,
    /// Chemical potential (0 when not meaningful).
    pub mu: f64,
    /// Bath temperature in code units (0 for Hamiltonian strokes).
    pub temperature: f64,
}

/// Write `psi` and its metadata to `path`, plus the `.txt` sidecar.
pub fn save_checkpoint(psi: &ComplexField3D, meta: &CheckpointMeta, path: &Path) -> Result<()> {
    let n = meta.n as usize;
    if psi.n() != n {
        return Err(Error::invalid(format!(
            "checkpoint metadata says N = {n} but the field is {}³",
            psi.n()
        )));
    }
    let data = psi.data();
    let mut buf = Vec::with_capacity(HEADER_LEN + data.len() * 16);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&meta.n.to_le_bytes());
    for v in [meta.box_scale, meta.t, meta.omega, meta.alpha, meta.mu, meta.temperature] {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    for z in data {
        buf.extend_from_slice(&z.re.to_le_bytes());
        buf.extend_from_slice(&z.im.to_le_bytes());
    }
    write_atomically(path, &buf)?;

    let sidecar = path_with_txt(path);
    let text = format!(
        "format = BECOTTO1 v{VERSION}\nn = {}\nl = {:?}\nt = {:?}\nomega = {:?}\nalpha = {:?}\nmu = {:?}\ntemperature = {:?}\n",
        meta.n, meta.box_scale, meta.t, meta.omega, meta.alpha, meta.mu, meta.temperature
    );
    write_atomically(&sidecar, text.as_bytes())?;
    Ok(())
}

/// Read a checkpoint back; the field and metadata are bit-identical to
/// what was saved.
pub fn load_checkpoint(path: &Path) -> Result<(ComplexField3D, CheckpointMeta)> {
    let buf = std::fs::read(path)?;
    if buf.len() < HEADER_LEN {
        return Err(Error::Checkpoint(format!(
            "{}: file is {} bytes, shorter than the {HEADER_LEN}-byte header",
            path.display(),
            buf.len()
        )));
    }
    if &buf[0..8] != MAGIC {
        return Err(Error::Checkpoint(format!(
            "{}: bad magic at offset 0 (expected BECOTTO1)",
            path.display()
        )));
    }
    let version = u32::from_le_bytes(buf[8..12].try_into().unwrap());
    if version != VERSION {
        return Err(Error::Checkpoint(format!(
            "{}: unsupported version {version} at offset 8 (expected {VERSION})",
            path.display()
        )));
    }
    let n = u32::from_le_bytes(buf[12..16].try_into().unwrap());
    let n_usize = n as usize;
    let payload = (n_usize)
        .checked_pow(3)
        .and_then(|c| c.checked_mul(16))
        .ok_or_else(|| {
            Error::Checkpoint(format!(
                "{}: N = {n} at offset 12 implies an impossible payload size",
                path.display()
            ))
        })?;
    let expected = HEADER_LEN + payload;
    if buf.len() != expected {
        return Err(Error::Checkpoint(format!(
            "{}: length mismatch: N = {n} implies {expected} bytes, file has {} \
             (payload starts at offset {HEADER_LEN})",
            path.display(),
            buf.len()
        )));
    }
    let mut f = [0.0f64; 6];
    for (i, v) in f.iter_mut().enumerate() {
        let o = 16 + 8 * i;
        *v = f64::from_le_bytes(buf[o..o + 8].try_into().unwrap());
    }
    let meta = CheckpointMeta {
        n,
        box_scale: f[0],
        t: f[1],
        omega: f[2],
        alpha: f[3],
        mu: f[4],
        temperature: f[5],
    };
    let mut data = Vec::with_capacity(n_usize * n_usize * n_usize);
    for chunk in buf[HEADER_LEN..].chunks_exact(16) {
        let re = f64::from_le_bytes(chunk[0..8].try_into().unwrap());
        let im = f64::from_le_bytes(chunk[8..16].try_into().unwrap());
        data.push(Complex64::new(re, im));
    }
    // Length already verified against the header.
    let field = ComplexField3D::from_vec(n_usize, data);
    Ok((field, meta))
}

fn path_with_txt(path: &Path) -> std::path::PathBuf {
    let mut os = path.as_os_str().to_os_string();
    os.push(".txt");
    std::path::PathBuf::from(os)
}

/// Write via a temp file + rename so a crash never leaves a truncated
/// checkpoint under the final name.
fn write_atomically(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = {
        let mut os = path.as_os_str().to_os_string();
        os.push(".tmp");
        std::path::PathBuf::from(os)
    };
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}
