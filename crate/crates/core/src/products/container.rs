//! Binary container for raw frames, products, calibration sets and scenes.
//!
//! All integers little-endian:
//!
//! ```text
//! magic        8 bytes  "L1CHAIN\0"
//! version      u32      FORMAT_VERSION
//! kind         u32      ContainerKind
//! meta_len     u64
//! metadata     meta_len bytes of UTF-8 JSON
//! sections     u32 count, then per section:
//!                name_len u16, name (UTF-8), dtype u8 (0 u8, 1 u16, 2 f32, 3 f64),
//!                elements u64, payload (elements × width bytes, LE)
//! checksum     32 bytes SHA-256 of every preceding byte
//! ```

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::calibration_set::CalibrationSet;
use crate::error::{Error, Result};
use crate::geom::{AttitudeProfile, Mode, OrbitElements, SensorGeometry};
use crate::radiometry::{FrameStack, RawFrame};
use crate::sim::{Extent, Field, Scene};
use crate::tdi::{GridDef, Level, ProductGrid, ProductMetadata};

pub const MAGIC: [u8; 8] = *b"L1CHAIN\0";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u32)]
pub enum ContainerKind {
    RawFrames = 1,
    Product = 2,
    Calibration = 3,
    Scene = 4,
}

impl ContainerKind {
    fn from_u32(v: u32) -> Result<Self> {
        Ok(match v {
            1 => ContainerKind::RawFrames,
            2 => ContainerKind::Product,
            3 => ContainerKind::Calibration,
            4 => ContainerKind::Scene,
            _ => return Err(Error::Format(format!("unknown container kind {v}"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SectionData {
    U8(Vec<u8>),
    U16(Vec<u16>),
    F32(Vec<f32>),
    F64(Vec<f64>),
}

impl SectionData {
    fn dtype(&self) -> u8 {
        match self {
            SectionData::U8(_) => 0,
            SectionData::U16(_) => 1,
            SectionData::F32(_) => 2,
            SectionData::F64(_) => 3,
        }
    }

    fn len(&self) -> usize {
        match self {
            SectionData::U8(v) => v.len(),
            SectionData::U16(v) => v.len(),
            SectionData::F32(v) => v.len(),
            SectionData::F64(v) => v.len(),
        }
    }

    fn write(&self, out: &mut Vec<u8>) {
        match self {
            SectionData::U8(v) => out.extend_from_slice(v),
            SectionData::U16(v) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
            SectionData::F32(v) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
            SectionData::F64(v) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub name: String,
    pub data: SectionData,
}

/// A decoded container: kind, JSON metadata and named arrays.
#[derive(Debug, Clone, PartialEq)]
pub struct Container {
    pub kind: ContainerKind,
    pub metadata: serde_json::Value,
    pub sections: Vec<Section>,
}

fn format_err(e: impl std::fmt::Display) -> Error {
    Error::Format(e.to_string())
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.buf.len().saturating_sub(self.pos) < n {
            return Err(Error::Truncated(format!("{what} needs {n} bytes at offset {}", self.pos)));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u16(&mut self, what: &str) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2, what)?.try_into().unwrap()))
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &str) -> Result<usize> {
        let v = u64::from_le_bytes(self.take(8, what)?.try_into().unwrap());
        usize::try_from(v).map_err(|_| Error::Truncated(format!("{what} length {v} is not addressable")))
    }
}

impl Container {
    pub fn new(kind: ContainerKind, metadata: serde_json::Value) -> Self {
        Container { kind, metadata, sections: Vec::new() }
    }

    pub fn push(&mut self, name: impl Into<String>, data: SectionData) {
        self.sections.push(Section { name: name.into(), data });
    }

    pub fn section(&self, name: &str) -> Result<&SectionData> {
        self.sections
            .iter()
            .find(|s| s.name == name)
            .map(|s| &s.data)
            .ok_or_else(|| Error::Format(format!("missing section {name}")))
    }

    pub fn encode(&self) -> Result<Vec<u8>> {
        let meta = serde_json::to_vec(&self.metadata).map_err(format_err)?;
        let mut out = Vec::new();
        out.extend_from_slice(&MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.kind as u32).to_le_bytes());
        out.extend_from_slice(&(meta.len() as u64).to_le_bytes());
        out.extend_from_slice(&meta);
        out.extend_from_slice(&(self.sections.len() as u32).to_le_bytes());
        for s in &self.sections {
            let name = s.name.as_bytes();
            let name_len = u16::try_from(name.len()).map_err(|_| Error::Format("section name too long".into()))?;
            out.extend_from_slice(&name_len.to_le_bytes());
            out.extend_from_slice(name);
            out.push(s.data.dtype());
            out.extend_from_slice(&(s.data.len() as u64).to_le_bytes());
            s.data.write(&mut out);
        }
        let digest = Sha256::digest(&out);
        out.extend_from_slice(&digest);
        Ok(out)
    }

    pub fn decode(buf: &[u8]) -> Result<Self> {
        let mut r = Reader { buf, pos: 0 };
        if r.take(8, "magic")? != MAGIC {
            return Err(Error::Format("not a container (bad magic)".into()));
        }
        let version = r.u32("version")?;
        if version != FORMAT_VERSION {
            return Err(Error::Version { found: version, supported: FORMAT_VERSION });
        }
        let kind = r.u32("kind")?;
        let meta_len = r.u64("metadata length")?;
        let meta = r.take(meta_len, "metadata")?;
        let count = r.u32("section count")?;
        let mut raw_sections = Vec::new();
        for _ in 0..count {
            let name_len = r.u16("section name length")? as usize;
            let name = r.take(name_len, "section name")?;
            let dtype = r.take(1, "section type")?[0];
            let n = r.u64("section length")?;
            let width = match dtype {
                0 => 1,
                1 => 2,
                2 => 4,
                3 => 8,
                _ => return Err(Error::Format(format!("unknown section type {dtype}"))),
            };
            let bytes = n.checked_mul(width).ok_or_else(|| Error::Truncated("section length overflows".into()))?;
            let payload = r.take(bytes, "section payload")?;
            raw_sections.push((name, dtype, payload));
        }
        let body_end = r.pos;
        let digest = r.take(32, "checksum")?;
        if r.pos != buf.len() {
            return Err(Error::Format(format!("{} trailing bytes after checksum", buf.len() - r.pos)));
        }
        if Sha256::digest(&buf[..body_end]).as_slice() != digest {
            return Err(Error::Checksum);
        }
        let kind = ContainerKind::from_u32(kind)?;
        let metadata = serde_json::from_slice(meta).map_err(format_err)?;
        let mut sections = Vec::with_capacity(raw_sections.len());
        for (name, dtype, p) in raw_sections {
            let name = String::from_utf8(name.to_vec()).map_err(format_err)?;
            let data = match dtype {
                0 => SectionData::U8(p.to_vec()),
                1 => SectionData::U16(p.chunks_exact(2).map(|c| u16::from_le_bytes(c.try_into().unwrap())).collect()),
                2 => SectionData::F32(p.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect()),
                _ => SectionData::F64(p.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect()),
            };
            sections.push(Section { name, data });
        }
        Ok(Container { kind, metadata, sections })
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.encode()?)?;
        Ok(())
    }

    pub fn read_file(path: &Path) -> Result<Self> {
        Container::decode(&std::fs::read(path)?)
    }

    fn expect(&self, kind: ContainerKind) -> Result<()> {
        if self.kind != kind {
            return Err(Error::Format(format!("expected a {kind:?} container, found {:?}", self.kind)));
        }
        Ok(())
    }

    fn meta<T: DeserializeOwned>(&self) -> Result<T> {
        serde_json::from_value(self.metadata.clone()).map_err(format_err)
    }
}

fn to_value<T: Serialize>(v: &T) -> Result<serde_json::Value> {
    serde_json::to_value(v).map_err(format_err)
}

macro_rules! typed {
    ($name:ident, $variant:ident, $t:ty) => {
        fn $name(c: &Container, name: &str, len: usize) -> Result<Vec<$t>> {
            match c.section(name)? {
                SectionData::$variant(v) if v.len() == len => Ok(v.clone()),
                SectionData::$variant(v) => {
                    Err(Error::Format(format!("section {name} holds {} values, {len} declared", v.len())))
                }
                _ => Err(Error::Format(format!("section {name} has the wrong element type"))),
            }
        }
    };
}
typed!(u8s, U8, u8);
typed!(u16s, U16, u16);
typed!(f32s, F32, f32);
typed!(f64s, F64, f64);

/// Objects that persist as one container.
pub trait Persist: Sized {
    fn to_container(&self) -> Result<Container>;
    fn from_container(c: &Container) -> Result<Self>;

    fn write(&self, path: &Path) -> Result<()> {
        self.to_container()?.write_file(path)
    }

    fn read(path: &Path) -> Result<Self> {
        Self::from_container(&Container::read_file(path)?)
    }
}

#[derive(Serialize, Deserialize)]
struct FrameHeader {
    band: u8,
    mode: Mode,
    seq: usize,
    start_time: f64,
    rows: usize,
    cols: usize,
    dark_cols: Option<usize>,
    tilt_angle: f64,
}

#[derive(Serialize, Deserialize)]
struct StackHeader {
    mode: Mode,
    sensor: SensorGeometry,
    orbit: OrbitElements,
    attitude: AttitudeProfile,
    frame_period: f64,
    integration_time: f64,
    height: f64,
    frames: Vec<FrameHeader>,
}

impl Persist for FrameStack {
    fn to_container(&self) -> Result<Container> {
        let frames = self
            .frames
            .iter()
            .map(|f| FrameHeader {
                band: f.band,
                mode: f.mode,
                seq: f.seq,
                start_time: f.start_time,
                rows: f.rows,
                cols: f.cols,
                dark_cols: f.dark_row.as_ref().map(|d| d.len()),
                tilt_angle: f.tilt_angle,
            })
            .collect();
        let header = StackHeader {
            mode: self.mode,
            sensor: self.sensor.clone(),
            orbit: self.orbit.clone(),
            attitude: self.attitude.clone(),
            frame_period: self.frame_period,
            integration_time: self.integration_time,
            height: self.height,
            frames,
        };
        let mut c = Container::new(ContainerKind::RawFrames, to_value(&header)?);
        c.push("counts", SectionData::U16(self.frames.iter().flat_map(|f| f.counts.iter().copied()).collect()));
        c.push(
            "dark_rows",
            SectionData::U16(self.frames.iter().flat_map(|f| f.dark_row.iter().flatten().copied()).collect()),
        );
        Ok(c)
    }

    fn from_container(c: &Container) -> Result<Self> {
        c.expect(ContainerKind::RawFrames)?;
        let h: StackHeader = c.meta()?;
        let n_counts = h.frames.iter().map(|f| f.rows * f.cols).sum();
        let n_dark = h.frames.iter().filter_map(|f| f.dark_cols).sum();
        let counts = u16s(c, "counts", n_counts)?;
        let dark = u16s(c, "dark_rows", n_dark)?;
        let (mut ci, mut di) = (0, 0);
        let mut frames = Vec::with_capacity(h.frames.len());
        for f in h.frames {
            let n = f.rows * f.cols;
            let dark_row = f.dark_cols.map(|k| {
                di += k;
                dark[di - k..di].to_vec()
            });
            frames.push(RawFrame {
                band: f.band,
                mode: f.mode,
                seq: f.seq,
                start_time: f.start_time,
                rows: f.rows,
                cols: f.cols,
                counts: counts[ci..ci + n].to_vec(),
                dark_row,
                tilt_angle: f.tilt_angle,
            });
            ci += n;
        }
        Ok(FrameStack {
            mode: h.mode,
            sensor: h.sensor,
            orbit: h.orbit,
            attitude: h.attitude,
            frame_period: h.frame_period,
            integration_time: h.integration_time,
            height: h.height,
            frames,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct ProductHeader {
    level: Level,
    grid: GridDef,
    rows: usize,
    cols: usize,
    bands: Vec<u8>,
    metadata: ProductMetadata,
}

impl Persist for ProductGrid {
    fn to_container(&self) -> Result<Container> {
        let header = ProductHeader {
            level: self.level,
            grid: self.grid.clone(),
            rows: self.rows,
            cols: self.cols,
            bands: self.bands.clone(),
            metadata: self.metadata.clone(),
        };
        let mut c = Container::new(ContainerKind::Product, to_value(&header)?);
        for (bi, b) in self.bands.iter().enumerate() {
            c.push(format!("radiance/{b}"), SectionData::F32(self.radiance[bi].clone()));
            c.push(format!("sample_count/{b}"), SectionData::U16(self.sample_count[bi].clone()));
            c.push(format!("quality/{b}"), SectionData::U8(self.quality[bi].clone()));
        }
        c.push("latitude", SectionData::F64(self.lat.clone()));
        c.push("longitude", SectionData::F64(self.lon.clone()));
        Ok(c)
    }

    fn from_container(c: &Container) -> Result<Self> {
        c.expect(ContainerKind::Product)?;
        let h: ProductHeader = c.meta()?;
        let n = h.rows * h.cols;
        let mut p = ProductGrid {
            level: h.level,
            grid: h.grid,
            rows: h.rows,
            cols: h.cols,
            bands: h.bands.clone(),
            radiance: Vec::new(),
            sample_count: Vec::new(),
            quality: Vec::new(),
            lat: f64s(c, "latitude", n)?,
            lon: f64s(c, "longitude", n)?,
            metadata: h.metadata,
        };
        for b in &h.bands {
            p.radiance.push(f32s(c, &format!("radiance/{b}"), n)?);
            p.sample_count.push(u16s(c, &format!("sample_count/{b}"), n)?);
            p.quality.push(u8s(c, &format!("quality/{b}"), n)?);
        }
        Ok(p)
    }
}

impl Persist for CalibrationSet {
    fn to_container(&self) -> Result<Container> {
        Ok(Container::new(ContainerKind::Calibration, to_value(self)?))
    }

    fn from_container(c: &Container) -> Result<Self> {
        c.expect(ContainerKind::Calibration)?;
        c.meta()
    }
}

#[derive(Serialize, Deserialize)]
struct SceneHeader {
    extent: Extent,
    nlat: usize,
    nlon: usize,
    bands: Vec<u8>,
    /// `Some(v)` for constant bands; gridded bands live in sections.
    constants: Vec<Option<f64>>,
    seed: u64,
}

impl Persist for Scene {
    fn to_container(&self) -> Result<Container> {
        let constants = self
            .fields
            .iter()
            .map(|f| match f {
                Field::Constant(v) => Some(*v),
                Field::Grid(_) => None,
            })
            .collect();
        let header = SceneHeader {
            extent: self.extent,
            nlat: self.nlat,
            nlon: self.nlon,
            bands: self.bands.clone(),
            constants,
            seed: self.seed,
        };
        let mut c = Container::new(ContainerKind::Scene, to_value(&header)?);
        for (b, f) in self.bands.iter().zip(&self.fields) {
            if let Field::Grid(g) = f {
                c.push(format!("radiance/{b}"), SectionData::F64(g.clone()));
            }
        }
        Ok(c)
    }

    fn from_container(c: &Container) -> Result<Self> {
        c.expect(ContainerKind::Scene)?;
        let h: SceneHeader = c.meta()?;
        if h.constants.len() != h.bands.len() {
            return Err(Error::Format("scene band list and field list differ".into()));
        }
        let fields = h
            .bands
            .iter()
            .zip(&h.constants)
            .map(|(b, k)| match k {
                Some(v) => Ok(Field::Constant(*v)),
                None => Ok(Field::Grid(f64s(c, &format!("radiance/{b}"), h.nlat * h.nlon)?)),
            })
            .collect::<Result<_>>()?;
        Ok(Scene { extent: h.extent, nlat: h.nlat, nlon: h.nlon, bands: h.bands, fields, seed: h.seed })
    }
}

/// Writes a product as flat little-endian rasters plus a JSON sidecar:
/// `radiance_<band>.f32`, `latitude.f64`, `longitude.f64`, `metadata.json`.
pub fn export_flat(product: &ProductGrid, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for (bi, b) in product.bands.iter().enumerate() {
        let mut buf = Vec::new();
        SectionData::F32(product.radiance[bi].clone()).write(&mut buf);
        std::fs::write(dir.join(format!("radiance_{b}.f32")), buf)?;
    }
    for (name, v) in [("latitude.f64", &product.lat), ("longitude.f64", &product.lon)] {
        let mut buf = Vec::new();
        SectionData::F64(v.clone()).write(&mut buf);
        std::fs::write(dir.join(name), buf)?;
    }
    let meta = serde_json::json!({
        "level": product.level,
        "rows": product.rows,
        "cols": product.cols,
        "bands": product.bands,
        "grid": product.grid,
        "metadata": product.metadata,
    });
    std::fs::write(dir.join("metadata.json"), serde_json::to_vec_pretty(&meta).map_err(format_err)?)?;
    Ok(())
}

/// Anything serializable as pretty JSON (reports, truth bundles).
pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    std::fs::write(path, serde_json::to_vec_pretty(value).map_err(format_err)?)?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    serde_json::from_slice(&std::fs::read(path)?).map_err(format_err)
}
