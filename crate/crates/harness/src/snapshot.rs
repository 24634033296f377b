//! Binary field snapshots and the on-disk flow-map cache.
//!
//! Both formats are little-endian: a four-byte magic, a `u32` version, the
//! phase-space axes as `(len: u64, min: f64, max: f64)` triples, a few
//! scalars and then the flat sample array.

use std::io::{Read, Write};
use std::ops::Range;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use semiclassical::liouville::{flow_endpoints, FlowMap, FlowScheme};
use semiclassical::{Axis, FourierPotential, GridSpec, PhaseSpaceField};

use crate::error::{HarnessError, Result};

const FIELD_MAGIC: &[u8; 4] = b"WSNP";
const FLOW_MAGIC: &[u8; 4] = b"FLOW";
const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub epsilon: f64,
    pub t: f64,
    pub field: PhaseSpaceField,
}

fn put_axes(w: &mut impl Write, grid: &GridSpec) -> std::io::Result<()> {
    w.write_all(&(grid.n() as u32).to_le_bytes())?;
    for a in grid.axes() {
        w.write_all(&(a.len as u64).to_le_bytes())?;
        w.write_all(&a.min.to_le_bytes())?;
        w.write_all(&a.max.to_le_bytes())?;
    }
    Ok(())
}

fn get<const N: usize>(r: &mut impl Read) -> std::io::Result<[u8; N]> {
    let mut b = [0u8; N];
    r.read_exact(&mut b)?;
    Ok(b)
}

fn get_f64(r: &mut impl Read) -> std::io::Result<f64> {
    Ok(f64::from_le_bytes(get(r)?))
}

fn get_u64(r: &mut impl Read) -> std::io::Result<u64> {
    Ok(u64::from_le_bytes(get(r)?))
}

fn get_axes(r: &mut impl Read) -> std::io::Result<std::result::Result<GridSpec, String>> {
    let n = u32::from_le_bytes(get(r)?) as usize;
    if !(n == 1 || n == 2) {
        return Ok(Err(format!("dimension {n}")));
    }
    let mut axes = Vec::with_capacity(2 * n);
    for _ in 0..2 * n {
        let len = get_u64(r)? as usize;
        let (min, max) = (get_f64(r)?, get_f64(r)?);
        match Axis::new(min, max, len) {
            Ok(a) => axes.push(a),
            Err(e) => return Ok(Err(e.to_string())),
        }
    }
    Ok(GridSpec::from_axes(axes).map_err(|e| e.to_string()))
}

fn put_values(w: &mut impl Write, values: &[f64]) -> std::io::Result<()> {
    w.write_all(&(values.len() as u64).to_le_bytes())?;
    for v in values {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn get_values(r: &mut impl Read, expected: usize) -> std::io::Result<Option<Vec<f64>>> {
    let count = get_u64(r)? as usize;
    if count != expected {
        return Ok(None);
    }
    let mut bytes = vec![0u8; count * 8];
    r.read_exact(&mut bytes)?;
    Ok(Some(
        bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect(),
    ))
}

fn check_magic(r: &mut impl Read, magic: &[u8; 4]) -> std::io::Result<bool> {
    let m: [u8; 4] = get(r)?;
    let v = u32::from_le_bytes(get(r)?);
    Ok(&m == magic && v == VERSION)
}

pub fn write_snapshot(w: &mut impl Write, snap: &Snapshot) -> std::io::Result<()> {
    w.write_all(FIELD_MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    put_axes(w, snap.field.grid())?;
    w.write_all(&snap.epsilon.to_le_bytes())?;
    w.write_all(&snap.t.to_le_bytes())?;
    put_values(w, snap.field.values())
}

pub fn read_snapshot(r: &mut impl Read, path: &Path) -> Result<Snapshot> {
    let bad = |reason: String| HarnessError::Snapshot {
        path: path.to_path_buf(),
        reason,
    };
    let io = |e| HarnessError::io(path, e);
    if !check_magic(r, FIELD_MAGIC).map_err(io)? {
        return Err(bad("not a field snapshot".into()));
    }
    let grid = get_axes(r).map_err(io)?.map_err(bad)?;
    let epsilon = get_f64(r).map_err(io)?;
    let t = get_f64(r).map_err(io)?;
    let values = get_values(r, grid.len())
        .map_err(io)?
        .ok_or_else(|| bad("sample count does not match the grid".into()))?;
    Ok(Snapshot {
        epsilon,
        t,
        field: PhaseSpaceField::new(grid, values)?,
    })
}

pub fn save_snapshot(path: &Path, snap: &Snapshot) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| HarnessError::io(path, e))?;
    let mut w = std::io::BufWriter::new(f);
    write_snapshot(&mut w, snap)
        .and_then(|_| w.flush())
        .map_err(|e| HarnessError::io(path, e))
}

pub fn load_snapshot(path: &Path) -> Result<Snapshot> {
    let f = std::fs::File::open(path).map_err(|e| HarnessError::io(path, e))?;
    read_snapshot(&mut std::io::BufReader::new(f), path)
}

fn scheme_tag(s: FlowScheme) -> u8 {
    match s {
        FlowScheme::Leapfrog => 0,
        FlowScheme::Yoshida4 => 1,
    }
}

/// Cache file name for a flow of `pot` over `[0, t]` on `grid`.
pub fn flow_cache_path(
    dir: &Path,
    pot: &FourierPotential,
    t: f64,
    dt: f64,
    grid: &GridSpec,
    scheme: FlowScheme,
) -> PathBuf {
    let mut h: u64 = pot.fingerprint();
    let mut eat = |v: u64| {
        for b in v.to_le_bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    };
    eat(t.to_bits());
    eat(dt.to_bits());
    eat(u64::from(scheme_tag(scheme)));
    for a in grid.axes() {
        eat(a.len as u64);
        eat(a.min.to_bits());
        eat(a.max.to_bits());
    }
    dir.join(format!("flow-{h:016x}.bin"))
}

pub fn save_flow(path: &Path, map: &FlowMap, fingerprint: u64) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| HarnessError::io(path, e))?;
    let mut w = std::io::BufWriter::new(f);
    (|| -> std::io::Result<()> {
        w.write_all(FLOW_MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&fingerprint.to_le_bytes())?;
        w.write_all(&[scheme_tag(map.scheme())])?;
        w.write_all(&map.t().to_le_bytes())?;
        w.write_all(&map.dt().to_le_bytes())?;
        put_axes(&mut w, map.grid())?;
        put_values(&mut w, map.endpoints())?;
        w.flush()
    })()
    .map_err(|e| HarnessError::io(path, e))
}

/// Loads a cached flow; `None` when absent or when the header does not
/// match the request.
pub fn load_flow(
    path: &Path,
    fingerprint: u64,
    t: f64,
    dt: f64,
    grid: &GridSpec,
    scheme: FlowScheme,
) -> Result<Option<FlowMap>> {
    let f = match std::fs::File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(HarnessError::io(path, e)),
    };
    let r = &mut std::io::BufReader::new(f);
    let io = |e| HarnessError::io(path, e);
    if !check_magic(r, FLOW_MAGIC).map_err(io)? {
        return Ok(None);
    }
    let fp = get_u64(r).map_err(io)?;
    let tag: [u8; 1] = get(r).map_err(io)?;
    let (ct, cdt) = (get_f64(r).map_err(io)?, get_f64(r).map_err(io)?);
    let cached = match get_axes(r).map_err(io)? {
        Ok(g) => g,
        Err(_) => return Ok(None),
    };
    if fp != fingerprint
        || tag[0] != scheme_tag(scheme)
        || ct.to_bits() != t.to_bits()
        || cdt.to_bits() != dt.to_bits()
        || cached.axes() != grid.axes()
    {
        return Ok(None);
    }
    let Some(endpoints) = get_values(r, grid.len() * 2 * grid.n()).map_err(io)? else {
        return Ok(None);
    };
    Ok(Some(FlowMap::from_endpoints(
        grid.clone(),
        t,
        dt,
        scheme,
        endpoints,
    )?))
}

/// Backward flow of every node, sharded across the rayon pool.
pub fn flow_parallel(
    pot: &FourierPotential,
    t: f64,
    grid: &GridSpec,
    dt: f64,
    scheme: FlowScheme,
) -> Result<FlowMap> {
    let len = grid.len();
    let chunk = (len / (4 * rayon::current_num_threads())).max(4096);
    let shards: Vec<Range<usize>> = (0..len)
        .step_by(chunk)
        .map(|s| s..(s + chunk).min(len))
        .collect();
    let parts = shards
        .into_par_iter()
        .map(|r| flow_endpoints(pot, t, grid, dt, scheme, r))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(FlowMap::from_endpoints(
        grid.clone(),
        t,
        dt,
        scheme,
        parts.concat(),
    )?)
}

/// [`flow_parallel`] backed by the cache directory, when one is given.
pub fn flow_cached(
    pot: &FourierPotential,
    t: f64,
    grid: &GridSpec,
    dt: f64,
    scheme: FlowScheme,
    cache: Option<&Path>,
) -> Result<FlowMap> {
    let Some(dir) = cache else {
        return flow_parallel(pot, t, grid, dt, scheme);
    };
    let path = flow_cache_path(dir, pot, t, dt, grid, scheme);
    if let Some(map) = load_flow(&path, pot.fingerprint(), t, dt, grid, scheme)? {
        return Ok(map);
    }
    let map = flow_parallel(pot, t, grid, dt, scheme)?;
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    save_flow(&path, &map, pot.fingerprint())?;
    Ok(map)
}
