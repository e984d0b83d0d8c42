use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::value::VectorValue;

/// A rectangular grid of `channels`-dimensional pixels stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorImage {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f64>,
}

impl VectorImage {
    /// Builds an image from a flat row-major buffer of `width * height * channels` components.
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || channels == 0 {
            return Err(Error::InvalidImage(format!(
                "dimensions must be positive, got {width}x{height}x{channels}"
            )));
        }
        let expected = width * height * channels;
        if data.len() != expected {
            return Err(Error::InvalidImage(format!(
                "buffer holds {} components, expected {expected}",
                data.len()
            )));
        }
        let mut data = data;
        for (index, c) in data.iter_mut().enumerate() {
            if !c.is_finite() {
                return Err(Error::NonFinite { index, value: *c });
            }
            if *c == 0.0 {
                *c = 0.0;
            }
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn from_values(width: usize, height: usize, pixels: &[VectorValue]) -> Result<Self> {
        let channels = pixels.first().map(VectorValue::dim).unwrap_or(0);
        let mut data = Vec::with_capacity(pixels.len() * channels);
        for p in pixels {
            crate::value::check_dim(channels, p.dim())?;
            data.extend_from_slice(p.components());
        }
        Self::new(width, height, channels, data)
    }

    pub fn constant(width: usize, height: usize, value: &[f64]) -> Result<Self> {
        let data = value
            .iter()
            .copied()
            .cycle()
            .take(width * height * value.len())
            .collect();
        Self::new(width, height, value.len(), data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.width, self.height, self.channels)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Pixel by linear index.
    pub fn pixel(&self, index: usize) -> &[f64] {
        let c = self.channels;
        &self.data[index * c..(index + 1) * c]
    }

    pub fn at(&self, row: usize, col: usize) -> &[f64] {
        self.pixel(row * self.width + col)
    }

    pub fn pixels(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.channels)
    }

    pub fn value(&self, index: usize) -> VectorValue {
        VectorValue::from_slice(self.pixel(index)).expect("image components are finite")
    }

    pub(crate) fn check_same_shape(&self, other: &VectorImage) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::ShapeMismatch {
                left: self.shape(),
                right: other.shape(),
            });
        }
        Ok(())
    }
}

/// Shape family for the built-in structuring elements.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeShape {
    Square,
    Cross,
}

/// Finite set of `(dy, dx)` pixel offsets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructuringElement {
    offsets: Vec<(isize, isize)>,
    label: String,
}

impl StructuringElement {
    pub fn new(offsets: Vec<(isize, isize)>) -> Result<Self> {
        if offsets.is_empty() {
            return Err(Error::InvalidStructuringElement("offset set is empty".into()));
        }
        for (i, o) in offsets.iter().enumerate() {
            if offsets[..i].contains(o) {
                return Err(Error::InvalidStructuringElement(format!(
                    "duplicate offset {o:?}"
                )));
            }
        }
        let label = format!("custom:{}", offsets.len());
        Ok(Self { offsets, label })
    }

    /// `size x size` square centred on the origin.
    pub fn square(size: usize) -> Result<Self> {
        Self::shaped(SeShape::Square, size)
    }

    /// Plus-shaped element of arm length `size / 2`.
    pub fn cross(size: usize) -> Result<Self> {
        Self::shaped(SeShape::Cross, size)
    }

    pub fn shaped(shape: SeShape, size: usize) -> Result<Self> {
        if size == 0 || size.is_multiple_of(2) {
            return Err(Error::InvalidStructuringElement(format!(
                "size must be odd and positive, got {size}"
            )));
        }
        let r = (size / 2) as isize;
        let mut offsets = Vec::new();
        for dy in -r..=r {
            for dx in -r..=r {
                if shape == SeShape::Square || dy == 0 || dx == 0 {
                    offsets.push((dy, dx));
                }
            }
        }
        let name = match shape {
            SeShape::Square => "square",
            SeShape::Cross => "cross",
        };
        Ok(Self {
            offsets,
            label: format!("{name}:{size}"),
        })
    }

    pub fn offsets(&self) -> &[(isize, isize)] {
        &self.offsets
    }

    pub fn contains_origin(&self) -> bool {
        self.offsets.contains(&(0, 0))
    }

    /// Descriptor such as `square:3`, used in reports.
    pub fn label(&self) -> &str {
        &self.label
    }
}

impl fmt::Display for StructuringElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

impl FromStr for StructuringElement {
    type Err = Error;

    /// Parses `square:N` or `cross:N`.
    fn from_str(s: &str) -> Result<Self> {
        let (shape, size) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidStructuringElement(format!("expected <shape>:<size>, got {s:?}")))?;
        let size: usize = size
            .trim()
            .parse()
            .map_err(|_| Error::InvalidStructuringElement(format!("bad size in {s:?}")))?;
        let shape = match shape.trim() {
            "square" => SeShape::Square,
            "cross" => SeShape::Cross,
            other => {
                return Err(Error::InvalidStructuringElement(format!(
                    "unknown shape {other:?}"
                )))
            }
        };
        Self::shaped(shape, size)
    }
}
