//! On-disk spectrum cache.
//!
//! One file per `(2s, L, J, boundary, kind)`. Each file is a short text
//! header terminated by `end\n` followed by little-endian binary payload:
//!
//! * `vals`: `count` f64 eigenvalues, ascending;
//! * `vecs-sector-k`: `size` u64 basis indices, `size` f64 eigenvalues and
//!   `size * size` f64 vector entries in column-major order.
//!
//! Files are written to a temporary name and renamed into place, so
//! concurrent writers of the same spectrum never expose partial files.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use log::warn;
use nalgebra::DMatrix;

use super::{SectorVectors, SpectralData, FORMAT_VERSION};
use crate::chain::ChainSpec;
use crate::error::Result;

const MAGIC: &str = "spinchain-spectrum";

pub const ENV_CACHE_DIR: &str = "SPINCHAIN_CACHE_DIR";

fn stem(spec: &ChainSpec) -> String {
    format!(
        "s{}-L{}-J{:016x}-{}",
        spec.spin.twice(),
        spec.sites,
        spec.coupling.to_bits(),
        if spec.periodic { "pbc" } else { "obc" }
    )
}

pub fn values_path(spec: &ChainSpec, dir: &Path) -> PathBuf {
    dir.join(format!("{}.vals", stem(spec)))
}

pub fn sector_path(spec: &ChainSpec, dir: &Path, sector: usize) -> PathBuf {
    dir.join(format!("{}.vecs-sector-{sector}", stem(spec)))
}

fn header(spec: &ChainSpec, kind: &str, extra: &[(&str, String)]) -> String {
    let mut text = format!(
        "{MAGIC}\nversion={FORMAT_VERSION}\nkind={kind}\ntwice_s={}\nsites={}\ncoupling={}\nperiodic={}\n",
        spec.spin.twice(),
        spec.sites,
        spec.coupling,
        spec.periodic
    );
    for (key, value) in extra {
        text.push_str(&format!("{key}={value}\n"));
    }
    text.push_str("end\n");
    text
}

fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    static COUNTER: AtomicU64 = AtomicU64::new(0);
    let tmp = path.with_extension(format!("tmp-{}-{}", std::process::id(), COUNTER.fetch_add(1, Ordering::Relaxed)));
    let result = (|| {
        let mut file = fs::File::create(&tmp)?;
        file.write_all(bytes)?;
        file.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

/// Writes eigenvalues, and eigenvectors when present.
pub fn store(sd: &SpectralData, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let spec = &sd.spec;

    let mut bytes = header(spec, "vals", &[("count", sd.eigenvalues.len().to_string())]).into_bytes();
    for v in &sd.eigenvalues {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    write_atomic(&values_path(spec, dir), &bytes)?;

    if let Some(sectors) = &sd.sectors {
        for (k, sv) in sectors.iter().enumerate() {
            let n = sv.indices.len();
            let mut bytes = header(
                spec,
                &format!("vecs-sector-{k}"),
                &[("twice_sz", sv.twice_sz.to_string()), ("size", n.to_string())],
            )
            .into_bytes();
            for &i in &sv.indices {
                bytes.extend_from_slice(&(i as u64).to_le_bytes());
            }
            for v in sv.eigenvalues.iter().chain(sv.vectors.as_slice()) {
                bytes.extend_from_slice(&v.to_le_bytes());
            }
            write_atomic(&sector_path(spec, dir, k), &bytes)?;
        }
    }
    Ok(())
}

/// Outcome of reading one cache file.
enum Read<T> {
    Hit(T),
    Miss,
}

fn read_file(path: &Path) -> Result<Option<Vec<u8>>> {
    match fs::read(path) {
        Ok(bytes) => Ok(Some(bytes)),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(e.into()),
    }
}

type HeaderFields = Vec<(String, String)>;

/// Splits header fields from the binary payload.
fn parse_header(bytes: &[u8]) -> Option<(HeaderFields, &[u8])> {
    let marker = b"\nend\n";
    let pos = bytes.windows(marker.len()).position(|w| w == marker)?;
    let text = std::str::from_utf8(&bytes[..pos]).ok()?;
    let mut lines = text.lines();
    if lines.next()? != MAGIC {
        return None;
    }
    let fields =
        lines.map(|l| l.split_once('=').map(|(k, v)| (k.to_string(), v.to_string()))).collect::<Option<Vec<_>>>()?;
    Some((fields, &bytes[pos + marker.len()..]))
}

fn field<'a>(fields: &'a [(String, String)], key: &str) -> Option<&'a str> {
    fields.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
}

/// Header identity check: version and every fingerprint component must match.
fn matches_spec(fields: &[(String, String)], spec: &ChainSpec, kind: &str) -> bool {
    field(fields, "version") == Some(&FORMAT_VERSION.to_string())
        && field(fields, "kind") == Some(kind)
        && field(fields, "twice_s") == Some(&spec.spin.twice().to_string())
        && field(fields, "sites") == Some(&spec.sites.to_string())
        && field(fields, "coupling").and_then(|v| v.parse::<f64>().ok()).map(f64::to_bits)
            == Some(spec.coupling.to_bits())
        && field(fields, "periodic") == Some(&spec.periodic.to_string())
}

fn f64s(payload: &[u8]) -> impl Iterator<Item = f64> + '_ {
    payload.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap()))
}

fn load_values(spec: &ChainSpec, path: &Path) -> Result<Read<Vec<f64>>> {
    let Some(bytes) = read_file(path)? else { return Ok(Read::Miss) };
    let Some((fields, payload)) = parse_header(&bytes) else {
        warn!("ignoring corrupt cache file {}", path.display());
        return Ok(Read::Miss);
    };
    if !matches_spec(&fields, spec, "vals") {
        return Ok(Read::Miss);
    }
    let count = field(&fields, "count").and_then(|c| c.parse::<usize>().ok());
    match count {
        Some(count) if payload.len() == count * 8 && spec.raw_dimension() == count as u128 => {
            Ok(Read::Hit(f64s(payload).collect()))
        }
        _ => {
            warn!("ignoring truncated or inconsistent cache file {}", path.display());
            Ok(Read::Miss)
        }
    }
}

fn load_sector(spec: &ChainSpec, path: &Path, k: usize) -> Result<Read<SectorVectors>> {
    let Some(bytes) = read_file(path)? else { return Ok(Read::Miss) };
    let Some((fields, payload)) = parse_header(&bytes) else {
        warn!("ignoring corrupt cache file {}", path.display());
        return Ok(Read::Miss);
    };
    if !matches_spec(&fields, spec, &format!("vecs-sector-{k}")) {
        return Ok(Read::Miss);
    }
    let size = field(&fields, "size").and_then(|v| v.parse::<usize>().ok());
    let twice_sz = field(&fields, "twice_sz").and_then(|v| v.parse::<i64>().ok());
    let (Some(n), Some(twice_sz)) = (size, twice_sz) else {
        warn!("ignoring corrupt cache file {}", path.display());
        return Ok(Read::Miss);
    };
    if payload.len() != 8 * (2 * n + n * n) {
        warn!("ignoring truncated cache file {}", path.display());
        return Ok(Read::Miss);
    }
    let (index_bytes, rest) = payload.split_at(8 * n);
    let indices = index_bytes.chunks_exact(8).map(|c| u64::from_le_bytes(c.try_into().unwrap()) as usize).collect();
    let (value_bytes, vector_bytes) = rest.split_at(8 * n);
    let eigenvalues = f64s(value_bytes).collect();
    let vectors = DMatrix::from_iterator(n, n, f64s(vector_bytes));
    Ok(Read::Hit(SectorVectors { twice_sz, indices, eigenvalues, vectors }))
}

/// Loads a cached spectrum. Missing, mismatched or corrupt files are a miss
/// (`Ok(None)`); only genuine read failures are errors.
pub fn load(spec: &ChainSpec, need_vectors: bool, dir: &Path) -> Result<Option<SpectralData>> {
    let Read::Hit(eigenvalues) = load_values(spec, &values_path(spec, dir))? else {
        return Ok(None);
    };
    let sectors = if need_vectors {
        let count = spec.spin.twice() as usize * spec.sites + 1;
        let mut sectors = Vec::with_capacity(count);
        for k in 0..count {
            match load_sector(spec, &sector_path(spec, dir, k), k)? {
                Read::Hit(sv) => sectors.push(sv),
                Read::Miss => return Ok(None),
            }
        }
        if sectors.iter().map(|s| s.indices.len()).sum::<usize>() != eigenvalues.len() {
            warn!("ignoring inconsistent eigenvector cache for {spec}");
            return Ok(None);
        }
        Some(sectors)
    } else {
        None
    };
    Ok(Some(SpectralData::assemble(*spec, eigenvalues, sectors)))
}
