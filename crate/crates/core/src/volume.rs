//! Reading and writing of image/mask volumes in a minimal NRRD subset.
//!
//! The subset is: magic `NRRD000X` (X in 1..5), header lines `key: value`
//! terminated by the first blank line, `encoding: raw`, attached payload in
//! little-endian x-fastest order. Unknown header keys are ignored. 2D files
//! are promoted to a single-slice 3D volume with unit z spacing.

use std::fs;
use std::io::Write;
use std::path::Path;

use thiserror::Error;

/// Relative tolerance for per-axis spacing comparison.
pub const SPACING_REL_TOL: f64 = 1e-4;

#[derive(Debug, Error)]
pub enum VolumeError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("not an NRRD file (bad magic line {0:?})")]
    BadMagic(String),
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("missing required header key `{0}`")]
    MissingHeaderKey(&'static str),
    #[error("unsupported encoding `{0}` (only raw is supported)")]
    UnsupportedEncoding(String),
    #[error("unsupported voxel type `{0}`")]
    UnsupportedType(String),
    #[error("payload size mismatch: expected {expected} bytes, found {actual}")]
    PayloadSizeMismatch { expected: usize, actual: usize },
    #[error("volume contains non-finite intensities")]
    NonFiniteIntensity,
    #[error("mask voxel type `{0}` is not an integer type")]
    NonIntegerMaskType(String),
    #[error("mask contains negative label {0}")]
    NegativeMaskLabel(i64),
    #[error("dims mismatch: image {img:?} vs mask {mask:?}")]
    DimsMismatch {
        img: (usize, usize, usize),
        mask: (usize, usize, usize),
    },
    #[error("spacing mismatch on axis {axis}: image {img} vs mask {mask}")]
    SpacingMismatch { axis: usize, img: f64, mask: f64 },
}

/// Voxel types accepted by the reader.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VoxelType {
    Uchar,
    Short,
    Ushort,
    Int,
    Float,
    Double,
}

impl VoxelType {
    fn parse(s: &str) -> Result<Self, VolumeError> {
        match s {
            "uchar" => Ok(Self::Uchar),
            "short" => Ok(Self::Short),
            "ushort" => Ok(Self::Ushort),
            "int" => Ok(Self::Int),
            "float" => Ok(Self::Float),
            "double" => Ok(Self::Double),
            other => Err(VolumeError::UnsupportedType(other.to_string())),
        }
    }

    fn byte_size(self) -> usize {
        match self {
            Self::Uchar => 1,
            Self::Short | Self::Ushort => 2,
            Self::Int | Self::Float => 4,
            Self::Double => 8,
        }
    }

    fn is_integer(self) -> bool {
        !matches!(self, Self::Float | Self::Double)
    }
}

/// A scalar 3D image grid with physical spacing in millimeters.
///
/// 2D images are stored with `nz = 1`. Voxel data is kept in x-fastest order
/// (`index = i + nx * (j + ny * k)`) and promoted to `f64` on read.
#[derive(Debug, Clone, PartialEq)]
pub struct Volume {
    dims: (usize, usize, usize),
    spacing: (f64, f64, f64),
    data: Vec<f64>,
}

impl Volume {
    pub fn new(
        dims: (usize, usize, usize),
        spacing: (f64, f64, f64),
        data: Vec<f64>,
    ) -> Result<Self, VolumeError> {
        let n = dims.0 * dims.1 * dims.2;
        if dims.0 == 0 || dims.1 == 0 || dims.2 == 0 {
            return Err(VolumeError::MalformedHeader(format!(
                "zero-sized axis in dims {dims:?}"
            )));
        }
        if data.len() != n {
            return Err(VolumeError::PayloadSizeMismatch {
                expected: n,
                actual: data.len(),
            });
        }
        if !(spacing.0 > 0.0 && spacing.1 > 0.0 && spacing.2 > 0.0) {
            return Err(VolumeError::MalformedHeader(format!(
                "non-positive spacing {spacing:?}"
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(VolumeError::NonFiniteIntensity);
        }
        Ok(Self {
            dims,
            spacing,
            data,
        })
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.dims
    }

    pub fn spacing(&self) -> (f64, f64, f64) {
        self.spacing
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Flat index of voxel (i, j, k) in x-fastest order.
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims.0 * (j + self.dims.1 * k)
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[self.index(i, j, k)]
    }
}

/// An integer label grid on the same geometry as its companion [`Volume`].
#[derive(Debug, Clone, PartialEq)]
pub struct MaskVolume {
    dims: (usize, usize, usize),
    spacing: (f64, f64, f64),
    labels: Vec<u32>,
}

impl MaskVolume {
    pub fn new(
        dims: (usize, usize, usize),
        spacing: (f64, f64, f64),
        labels: Vec<u32>,
    ) -> Result<Self, VolumeError> {
        let n = dims.0 * dims.1 * dims.2;
        if dims.0 == 0 || dims.1 == 0 || dims.2 == 0 {
            return Err(VolumeError::MalformedHeader(format!(
                "zero-sized axis in dims {dims:?}"
            )));
        }
        if labels.len() != n {
            return Err(VolumeError::PayloadSizeMismatch {
                expected: n,
                actual: labels.len(),
            });
        }
        if !(spacing.0 > 0.0 && spacing.1 > 0.0 && spacing.2 > 0.0) {
            return Err(VolumeError::MalformedHeader(format!(
                "non-positive spacing {spacing:?}"
            )));
        }
        Ok(Self {
            dims,
            spacing,
            labels,
        })
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.dims
    }

    pub fn spacing(&self) -> (f64, f64, f64) {
        self.spacing
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims.0 * (j + self.dims.1 * k)
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> u32 {
        self.labels[self.index(i, j, k)]
    }
}

struct Header {
    dims: (usize, usize, usize),
    spacing: (f64, f64, f64),
    vtype: VoxelType,
    payload_offset: usize,
}

fn parse_header(bytes: &[u8]) -> Result<Header, VolumeError> {
    // Header is ASCII lines up to the first blank line; payload follows.
    let blank = bytes
        .windows(2)
        .position(|w| w == b"\n\n")
        .ok_or_else(|| VolumeError::MalformedHeader("no blank line before payload".into()))?;
    let header_text = std::str::from_utf8(&bytes[..blank])
        .map_err(|_| VolumeError::MalformedHeader("header is not valid UTF-8".into()))?;

    let mut lines = header_text.lines();
    let magic = lines.next().unwrap_or("").trim_end_matches('\r');
    let valid_magic = magic.len() == 8
        && magic.starts_with("NRRD000")
        && matches!(magic.as_bytes()[7], b'1'..=b'5');
    if !valid_magic {
        return Err(VolumeError::BadMagic(magic.to_string()));
    }

    let mut dimension: Option<usize> = None;
    let mut sizes: Option<Vec<usize>> = None;
    let mut vtype: Option<VoxelType> = None;
    let mut encoding: Option<String> = None;
    let mut spacings: Option<Vec<f64>> = None;

    for line in lines {
        let line = line.trim_end_matches('\r');
        if line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once(':')
            .ok_or_else(|| VolumeError::MalformedHeader(format!("line without `:`: {line:?}")))?;
        let value = value.trim();
        match key.trim() {
            "dimension" => {
                let d = value
                    .parse::<usize>()
                    .map_err(|_| VolumeError::MalformedHeader(format!("bad dimension {value:?}")))?;
                if d != 2 && d != 3 {
                    return Err(VolumeError::MalformedHeader(format!(
                        "dimension must be 2 or 3, got {d}"
                    )));
                }
                dimension = Some(d);
            }
            "sizes" => {
                let parsed: Result<Vec<usize>, _> =
                    value.split_whitespace().map(str::parse::<usize>).collect();
                sizes = Some(parsed.map_err(|_| {
                    VolumeError::MalformedHeader(format!("bad sizes {value:?}"))
                })?);
            }
            "type" => vtype = Some(VoxelType::parse(value)?),
            "encoding" => encoding = Some(value.to_string()),
            "spacings" => {
                let parsed: Result<Vec<f64>, _> =
                    value.split_whitespace().map(str::parse::<f64>).collect();
                spacings = Some(parsed.map_err(|_| {
                    VolumeError::MalformedHeader(format!("bad spacings {value:?}"))
                })?);
            }
            // Unknown keys are ignored by contract.
            _ => {}
        }
    }

    let dimension = dimension.ok_or(VolumeError::MissingHeaderKey("dimension"))?;
    let sizes = sizes.ok_or(VolumeError::MissingHeaderKey("sizes"))?;
    let vtype = vtype.ok_or(VolumeError::MissingHeaderKey("type"))?;
    let encoding = encoding.ok_or(VolumeError::MissingHeaderKey("encoding"))?;
    if encoding != "raw" {
        return Err(VolumeError::UnsupportedEncoding(encoding));
    }
    if sizes.len() != dimension {
        return Err(VolumeError::MalformedHeader(format!(
            "sizes has {} entries for dimension {dimension}",
            sizes.len()
        )));
    }
    if sizes.iter().any(|&s| s == 0) {
        return Err(VolumeError::MalformedHeader("zero-sized axis".into()));
    }
    if let Some(sp) = &spacings {
        if sp.len() != dimension {
            return Err(VolumeError::MalformedHeader(format!(
                "spacings has {} entries for dimension {dimension}",
                sp.len()
            )));
        }
        if sp.iter().any(|&s| !(s > 0.0)) {
            return Err(VolumeError::MalformedHeader(
                "non-positive spacing".into(),
            ));
        }
    }

    // 2D promotion: nz = 1, sz = 1.0. Missing spacings default to 1.0 mm.
    let dims = match dimension {
        2 => (sizes[0], sizes[1], 1),
        _ => (sizes[0], sizes[1], sizes[2]),
    };
    let spacing = match (&spacings, dimension) {
        (Some(sp), 2) => (sp[0], sp[1], 1.0),
        (Some(sp), _) => (sp[0], sp[1], sp[2]),
        (None, _) => (1.0, 1.0, 1.0),
    };

    Ok(Header {
        dims,
        spacing,
        vtype,
        payload_offset: blank + 2,
    })
}

fn check_payload_len(
    payload: &[u8],
    nvox: usize,
    vtype: VoxelType,
) -> Result<(), VolumeError> {
    let expected = nvox * vtype.byte_size();
    if payload.len() != expected {
        return Err(VolumeError::PayloadSizeMismatch {
            expected,
            actual: payload.len(),
        });
    }
    Ok(())
}

/// Read an image volume. Intensities are promoted to `f64`.
pub fn read_volume<P: AsRef<Path>>(path: P) -> Result<Volume, VolumeError> {
    let bytes = fs::read(path)?;
    let header = parse_header(&bytes)?;
    let nvox = header.dims.0 * header.dims.1 * header.dims.2;
    let payload = &bytes[header.payload_offset..];
    check_payload_len(payload, nvox, header.vtype)?;

    let data: Vec<f64> = match header.vtype {
        VoxelType::Uchar => payload.iter().map(|&b| f64::from(b)).collect(),
        VoxelType::Short => payload
            .chunks_exact(2)
            .map(|c| f64::from(i16::from_le_bytes([c[0], c[1]])))
            .collect(),
        VoxelType::Ushort => payload
            .chunks_exact(2)
            .map(|c| f64::from(u16::from_le_bytes([c[0], c[1]])))
            .collect(),
        VoxelType::Int => payload
            .chunks_exact(4)
            .map(|c| f64::from(i32::from_le_bytes([c[0], c[1], c[2], c[3]])))
            .collect(),
        VoxelType::Float => payload
            .chunks_exact(4)
            .map(|c| f64::from(f32::from_le_bytes([c[0], c[1], c[2], c[3]])))
            .collect(),
        VoxelType::Double => payload
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect(),
    };
    if data.iter().any(|v| !v.is_finite()) {
        return Err(VolumeError::NonFiniteIntensity);
    }
    Volume::new(header.dims, header.spacing, data)
}

/// Read a mask volume. The voxel type must be an integer type and all labels
/// must be non-negative.
pub fn read_mask<P: AsRef<Path>>(path: P) -> Result<MaskVolume, VolumeError> {
    let bytes = fs::read(path)?;
    let header = parse_header(&bytes)?;
    if !header.vtype.is_integer() {
        let name = match header.vtype {
            VoxelType::Float => "float",
            VoxelType::Double => "double",
            _ => unreachable!(),
        };
        return Err(VolumeError::NonIntegerMaskType(name.to_string()));
    }
    let nvox = header.dims.0 * header.dims.1 * header.dims.2;
    let payload = &bytes[header.payload_offset..];
    check_payload_len(payload, nvox, header.vtype)?;

    let raw: Vec<i64> = match header.vtype {
        VoxelType::Uchar => payload.iter().map(|&b| i64::from(b)).collect(),
        VoxelType::Short => payload
            .chunks_exact(2)
            .map(|c| i64::from(i16::from_le_bytes([c[0], c[1]])))
            .collect(),
        VoxelType::Ushort => payload
            .chunks_exact(2)
            .map(|c| i64::from(u16::from_le_bytes([c[0], c[1]])))
            .collect(),
        VoxelType::Int => payload
            .chunks_exact(4)
            .map(|c| i64::from(i32::from_le_bytes([c[0], c[1], c[2], c[3]])))
            .collect(),
        _ => unreachable!(),
    };
    let mut labels = Vec::with_capacity(raw.len());
    for v in raw {
        if v < 0 {
            return Err(VolumeError::NegativeMaskLabel(v));
        }
        labels.push(v as u32);
    }
    MaskVolume::new(header.dims, header.spacing, labels)
}

/// Check that image and mask share the exact same dims and per-axis spacing
/// within [`SPACING_REL_TOL`].
pub fn validate_geometry(img: &Volume, mask: &MaskVolume) -> Result<(), VolumeError> {
    if img.dims() != mask.dims() {
        return Err(VolumeError::DimsMismatch {
            img: img.dims(),
            mask: mask.dims(),
        });
    }
    let img_sp = [img.spacing().0, img.spacing().1, img.spacing().2];
    let mask_sp = [mask.spacing().0, mask.spacing().1, mask.spacing().2];
    for axis in 0..3 {
        let (a, b) = (img_sp[axis], mask_sp[axis]);
        if (a - b).abs() > SPACING_REL_TOL * a.abs().max(b.abs()) {
            return Err(VolumeError::SpacingMismatch {
                axis,
                img: a,
                mask: b,
            });
        }
    }
    Ok(())
}

fn write_header(
    out: &mut impl Write,
    dims: (usize, usize, usize),
    spacing: (f64, f64, f64),
    type_name: &str,
) -> std::io::Result<()> {
    writeln!(out, "NRRD0004")?;
    writeln!(out, "dimension: 3")?;
    writeln!(out, "sizes: {} {} {}", dims.0, dims.1, dims.2)?;
    writeln!(out, "type: {type_name}")?;
    writeln!(out, "encoding: raw")?;
    writeln!(out, "spacings: {} {} {}", spacing.0, spacing.1, spacing.2)?;
    writeln!(out)?;
    Ok(())
}

/// Companion writer: emits the volume as 3D `double` NRRD so that a read
/// back reproduces dims, spacing and data bit-exactly.
pub fn write_volume<P: AsRef<Path>>(path: P, vol: &Volume) -> Result<(), VolumeError> {
    let mut buf = Vec::new();
    write_header(&mut buf, vol.dims(), vol.spacing(), "double")?;
    for v in vol.data() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, buf)?;
    Ok(())
}

/// Companion writer for masks (type `int`).
pub fn write_mask<P: AsRef<Path>>(path: P, mask: &MaskVolume) -> Result<(), VolumeError> {
    let mut buf = Vec::new();
    write_header(&mut buf, mask.dims(), mask.spacing(), "int")?;
    for &v in mask.labels() {
        buf.extend_from_slice(&(v as i32).to_le_bytes());
    }
    fs::write(path, buf)?;
    Ok(())
}
