//! Sidecar plane files, grayscale PNG masks and dataset group loading.
//!
//! Plane file layout, all integers little-endian:
//!
//! ```text
//! offset  size  field
//!      0     4  magic "CSPL"
//!      4     1  version (1)
//!      5     1  dtype (0 = f32, 1 = i32)
//!      6     2  reserved (0)
//!      8     4  n_planes
//!     12     4  height
//!     16     4  width
//!     20     …  n_planes × height × width values, plane-major, row-major
//! ```
//!
//! Dataset layout for one group directory:
//!
//! ```text
//! <group>/<image_id>.attn.plane   f32, one plane per attention head
//! <group>/<image_id>.clus.plane   i32, a single plane of cluster labels
//! <group>/<image_id>.gt.png       optional 8-bit grayscale ground truth
//! <group>/<image_id>.png          optional source image (ignored)
//! ```

use std::collections::BTreeSet;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::plane::{AttentionStack, BinaryMask, ClusterMap, FloatPlane, Plane};

pub const MAGIC: [u8; 4] = *b"CSPL";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 20;

pub const ATTENTION_SUFFIX: &str = ".attn.plane";
pub const CLUSTER_SUFFIX: &str = ".clus.plane";
pub const GT_SUFFIX: &str = ".gt.png";

/// Gray levels at or above this value read as foreground.
pub const MASK_THRESHOLD: u8 = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Dtype {
    F32 = 0,
    I32 = 1,
}

impl Dtype {
    fn from_tag(tag: u8) -> Result<Self> {
        match tag {
            0 => Ok(Dtype::F32),
            1 => Ok(Dtype::I32),
            other => Err(Error::UnknownDtype(other)),
        }
    }

    fn name(self) -> &'static str {
        match self {
            Dtype::F32 => "f32",
            Dtype::I32 => "i32",
        }
    }
}

/// Contents of one plane file.
#[derive(Debug, Clone, PartialEq)]
pub enum PlaneData {
    Float(Vec<FloatPlane>),
    Int(Vec<Plane<i32>>),
}

impl PlaneData {
    pub fn dtype(&self) -> Dtype {
        match self {
            PlaneData::Float(_) => Dtype::F32,
            PlaneData::Int(_) => Dtype::I32,
        }
    }

    pub fn n_planes(&self) -> usize {
        match self {
            PlaneData::Float(p) => p.len(),
            PlaneData::Int(p) => p.len(),
        }
    }

    fn dims(&self) -> Option<(usize, usize)> {
        match self {
            PlaneData::Float(p) => p.first().map(Plane::dims),
            PlaneData::Int(p) => p.first().map(Plane::dims),
        }
    }
}

fn u32_field(value: usize, what: &'static str) -> Result<u32> {
    u32::try_from(value).map_err(|_| Error::BadHeader(what))
}

/// Serializes planes into the plane file format.
pub fn encode_planes(data: &PlaneData) -> Result<Vec<u8>> {
    let (height, width) = data.dims().ok_or(Error::BadHeader("no planes to write"))?;
    let n_planes = data.n_planes();
    let mut out = Vec::with_capacity(HEADER_LEN + n_planes * height * width * 4);
    out.extend_from_slice(&MAGIC);
    out.push(VERSION);
    out.push(data.dtype() as u8);
    out.extend_from_slice(&0u16.to_le_bytes());
    out.extend_from_slice(&u32_field(n_planes, "n_planes exceeds u32")?.to_le_bytes());
    out.extend_from_slice(&u32_field(height, "height exceeds u32")?.to_le_bytes());
    out.extend_from_slice(&u32_field(width, "width exceeds u32")?.to_le_bytes());
    match data {
        PlaneData::Float(planes) => {
            for plane in planes {
                if plane.dims() != (height, width) {
                    return Err(Error::dims("plane file", (height, width), plane.dims()));
                }
                for v in plane.as_slice() {
                    out.extend_from_slice(&v.to_le_bytes());
                }
            }
        }
        PlaneData::Int(planes) => {
            for plane in planes {
                if plane.dims() != (height, width) {
                    return Err(Error::dims("plane file", (height, width), plane.dims()));
                }
                for v in plane.as_slice() {
                    out.extend_from_slice(&v.to_le_bytes());
                }
            }
        }
    }
    Ok(out)
}

fn read_u32(bytes: &[u8], offset: usize) -> u32 {
    u32::from_le_bytes(bytes[offset..offset + 4].try_into().unwrap())
}

/// Parses a plane file image held in memory.
pub fn decode_planes(bytes: &[u8]) -> Result<PlaneData> {
    if bytes.len() < HEADER_LEN {
        if bytes.len() >= 4 && bytes[..4] != MAGIC {
            return Err(Error::BadMagic(bytes[..4].try_into().unwrap()));
        }
        return Err(Error::Truncated { expected: HEADER_LEN, found: bytes.len() });
    }
    let magic: [u8; 4] = bytes[..4].try_into().unwrap();
    if magic != MAGIC {
        return Err(Error::BadMagic(magic));
    }
    if bytes[4] != VERSION {
        return Err(Error::UnsupportedVersion(bytes[4]));
    }
    let dtype = Dtype::from_tag(bytes[5])?;
    if bytes[6..8] != [0, 0] {
        return Err(Error::BadHeader("reserved field must be zero"));
    }
    let n_planes = read_u32(bytes, 8);
    let height = read_u32(bytes, 12);
    let width = read_u32(bytes, 16);
    if n_planes == 0 {
        return Err(Error::BadHeader("n_planes must be at least 1"));
    }
    let overflow = || Error::DimOverflow { n_planes, height, width };
    let plane_len = (height as usize).checked_mul(width as usize).ok_or_else(overflow)?;
    let payload = plane_len.checked_mul(n_planes as usize).and_then(|n| n.checked_mul(4)).ok_or_else(overflow)?;
    let expected = payload.checked_add(HEADER_LEN).ok_or_else(overflow)?;
    if bytes.len() < expected {
        return Err(Error::Truncated { expected, found: bytes.len() });
    }
    if bytes.len() > expected {
        return Err(Error::TrailingBytes(bytes.len() - expected));
    }

    let words = bytes[HEADER_LEN..].chunks_exact(4).map(|c| <[u8; 4]>::try_from(c).unwrap());
    let (h, w) = (height as usize, width as usize);
    match dtype {
        Dtype::F32 => {
            let values: Vec<f32> = words.map(f32::from_le_bytes).collect();
            if let Some(index) = values.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite { index });
            }
            let planes =
                values.chunks_exact(plane_len).map(|chunk| Plane::new(h, w, chunk.to_vec())).collect::<Result<_>>()?;
            Ok(PlaneData::Float(planes))
        }
        Dtype::I32 => {
            let values: Vec<i32> = words.map(i32::from_le_bytes).collect();
            let planes =
                values.chunks_exact(plane_len).map(|chunk| Plane::new(h, w, chunk.to_vec())).collect::<Result<_>>()?;
            Ok(PlaneData::Int(planes))
        }
    }
}

pub fn read_plane_file(path: impl AsRef<Path>) -> Result<PlaneData> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(Error::io(path))?;
    decode_planes(&bytes)
}

pub fn write_plane_file(data: &PlaneData, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_planes(data)?;
    fs::write(path, bytes).map_err(Error::io(path))
}

pub fn read_attention(path: impl AsRef<Path>) -> Result<AttentionStack> {
    match read_plane_file(path)? {
        PlaneData::Float(planes) => AttentionStack::new(planes),
        other => Err(Error::WrongDtype { expected: "f32", found: other.dtype().name() }),
    }
}

pub fn write_attention(stack: &AttentionStack, path: impl AsRef<Path>) -> Result<()> {
    write_plane_file(&PlaneData::Float(stack.heads().to_vec()), path)
}

pub fn read_clusters(path: impl AsRef<Path>) -> Result<ClusterMap> {
    match read_plane_file(path)? {
        PlaneData::Int(mut planes) => {
            if planes.len() != 1 {
                return Err(Error::WrongPlaneCount { expected: 1, found: planes.len() });
            }
            ClusterMap::from_signed(planes.pop().unwrap())
        }
        other => Err(Error::WrongDtype { expected: "i32", found: other.dtype().name() }),
    }
}

pub fn write_clusters(map: &ClusterMap, path: impl AsRef<Path>) -> Result<()> {
    write_plane_file(&PlaneData::Int(vec![map.to_signed()]), path)
}

fn read_gray8(path: &Path) -> Result<Plane<u8>> {
    let file = File::open(path).map_err(Error::io(path))?;
    let decoder = png::Decoder::new(BufReader::new(file));
    let mut reader = decoder.read_info()?;
    let info = reader.info();
    if info.color_type != png::ColorType::Grayscale || info.bit_depth != png::BitDepth::Eight {
        return Err(Error::WrongColorType(format!("{:?} at {:?}", info.color_type, info.bit_depth)));
    }
    let (width, height) = (info.width as usize, info.height as usize);
    let mut buf = vec![0u8; reader.output_buffer_size().ok_or(Error::BadHeader("PNG too large"))?];
    let frame = reader.next_frame(&mut buf)?;
    let stride = frame.line_size;
    let mut data = Vec::with_capacity(width * height);
    for row in buf[..frame.buffer_size()].chunks_exact(stride).take(height) {
        data.extend_from_slice(&row[..width]);
    }
    Plane::new(height, width, data)
}

fn write_gray8(height: usize, width: usize, pixels: &[u8], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(Error::io(path))?;
    let mut sink = BufWriter::new(file);
    {
        let mut encoder = png::Encoder::new(&mut sink, width as u32, height as u32);
        encoder.set_color(png::ColorType::Grayscale);
        encoder.set_depth(png::BitDepth::Eight);
        let mut writer = encoder.write_header()?;
        writer.write_image_data(pixels)?;
        writer.finish()?;
    }
    sink.flush().map_err(Error::io(path))
}

/// Reads an 8-bit grayscale PNG; levels ≥ 128 become `true`.
pub fn read_mask_png(path: impl AsRef<Path>) -> Result<BinaryMask> {
    read_gray8(path.as_ref())?.map(|v| v >= MASK_THRESHOLD)
}

/// Writes a mask as 8-bit grayscale with levels 0 and 255.
pub fn write_mask_png(mask: &BinaryMask, path: impl AsRef<Path>) -> Result<()> {
    let pixels: Vec<u8> = mask.as_slice().iter().map(|&b| if b { 255 } else { 0 }).collect();
    write_gray8(mask.height(), mask.width(), &pixels, path.as_ref())
}

/// Reads an 8-bit grayscale PNG as a map in `[0, 1]` (level / 255).
pub fn read_gray_png(path: impl AsRef<Path>) -> Result<FloatPlane> {
    read_gray8(path.as_ref())?.map(|v| v as f32 / 255.0)
}

/// Writes a `[0, 1]` map as 8-bit grayscale, rounding to the nearest level.
pub fn write_gray_png(map: &FloatPlane, path: impl AsRef<Path>) -> Result<()> {
    map.ensure_unit_range()?;
    let pixels: Vec<u8> = map.as_slice().iter().map(|&v| (v * 255.0).round() as u8).collect();
    write_gray8(map.height(), map.width(), &pixels, path.as_ref())
}

/// One image of a group with its sidecars.
#[derive(Debug, Clone)]
pub struct GroupEntry {
    pub image_id: String,
    pub attention: AttentionStack,
    pub clusters: ClusterMap,
    pub ground_truth: Option<BinaryMask>,
}

/// A group of images expected to share a common salient object.
#[derive(Debug, Clone)]
pub struct GroupBundle {
    name: String,
    entries: Vec<GroupEntry>,
}

impl GroupBundle {
    /// Checks the per-entry dimension invariants.
    pub fn new(name: impl Into<String>, entries: Vec<GroupEntry>) -> Result<Self> {
        let name = name.into();
        if entries.is_empty() {
            return Err(Error::EmptyGroup(PathBuf::from(&name)));
        }
        for entry in &entries {
            let dims = entry.attention.dims();
            if entry.clusters.dims() != dims {
                return Err(Error::dims(
                    format!("{}: attention vs clusters", entry.image_id),
                    dims,
                    entry.clusters.dims(),
                ));
            }
            if let Some(gt) = &entry.ground_truth {
                if gt.dims() != dims {
                    return Err(Error::dims(format!("{}: attention vs ground truth", entry.image_id), dims, gt.dims()));
                }
            }
        }
        Ok(GroupBundle { name, entries })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn entries(&self) -> &[GroupEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn has_ground_truth(&self) -> bool {
        self.entries.iter().all(|e| e.ground_truth.is_some())
    }
}

fn file_name(path: &Path) -> Option<&str> {
    path.file_name().and_then(|n| n.to_str())
}

/// Loads every image of a group directory, sorted by image id.
pub fn load_group(dir: impl AsRef<Path>) -> Result<GroupBundle> {
    let dir = dir.as_ref();
    let mut ids = BTreeSet::new();
    for entry in fs::read_dir(dir).map_err(Error::io(dir))? {
        let path = entry.map_err(Error::io(dir))?.path();
        if let Some(name) = file_name(&path) {
            if let Some(id) = name.strip_suffix(ATTENTION_SUFFIX).or_else(|| name.strip_suffix(CLUSTER_SUFFIX)) {
                ids.insert(id.to_string());
            }
        }
    }
    if ids.is_empty() {
        return Err(Error::EmptyGroup(dir.to_path_buf()));
    }

    let mut entries = Vec::with_capacity(ids.len());
    for id in ids {
        let sidecar = |suffix: &str| -> Result<PathBuf> {
            let path = dir.join(format!("{id}{suffix}"));
            if path.is_file() {
                Ok(path)
            } else {
                Err(Error::MissingSidecar { image_id: id.clone(), path })
            }
        };
        let attention = read_attention(sidecar(ATTENTION_SUFFIX)?)?;
        let clusters = read_clusters(sidecar(CLUSTER_SUFFIX)?)?;
        let gt_path = dir.join(format!("{id}{GT_SUFFIX}"));
        let ground_truth = if gt_path.is_file() { Some(read_mask_png(&gt_path)?) } else { None };
        entries.push(GroupEntry { image_id: id, attention, clusters, ground_truth });
    }
    let name = file_name(dir).unwrap_or("group").to_string();
    GroupBundle::new(name, entries)
}

/// Group subdirectories of a dataset root, sorted by name.
pub fn discover_groups(root: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let root = root.as_ref();
    let mut groups = Vec::new();
    for entry in fs::read_dir(root).map_err(Error::io(root))? {
        let path = entry.map_err(Error::io(root))?.path();
        if path.is_dir() {
            groups.push(path);
        }
    }
    if groups.is_empty() {
        return Err(Error::NoGroups(root.to_path_buf()));
    }
    groups.sort();
    Ok(groups)
}
