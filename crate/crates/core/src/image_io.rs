//! 8-bit raster I/O and the distinct-value set of an image.
//!
//! Channels are mapped between bytes and `{0, 1/255, ..., 1}` exactly, so a
//! load/save round trip is the identity on 8-bit data. Only gray and RGB
//! images at 8 bits per sample are accepted.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::image::VectorImage;
use crate::orders::lex_cmp_unchecked;
use crate::value::VectorValue;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ImageFileFormat {
    Png,
    /// Binary PPM (P6) for RGB or PGM (P5) for gray, maxval 255.
    Pnm,
}

impl ImageFileFormat {
    /// Guesses the format from a file extension.
    pub fn from_path(path: &Path) -> Result<Self> {
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase);
        match ext.as_deref() {
            Some("png") => Ok(ImageFileFormat::Png),
            Some("ppm" | "pgm" | "pnm") => Ok(ImageFileFormat::Pnm),
            _ => Err(Error::UnsupportedFormat {
                path: path.to_path_buf(),
                reason: "unknown extension (expected .png, .ppm or .pgm)".into(),
            }),
        }
    }
}

pub fn byte_to_unit(b: u8) -> f64 {
    b as f64 / 255.0
}

pub fn unit_to_byte(v: f64) -> u8 {
    (v * 255.0).round() as u8
}

pub fn image_from_bytes(width: usize, height: usize, channels: usize, bytes: &[u8]) -> Result<VectorImage> {
    VectorImage::new(
        width,
        height,
        channels,
        bytes.iter().map(|&b| byte_to_unit(b)).collect(),
    )
}

/// Quantizes every component with `round(v * 255)`. Components outside `[0, 1]` are rejected.
pub fn image_to_bytes(image: &VectorImage) -> Result<Vec<u8>> {
    image
        .data()
        .iter()
        .map(|&v| {
            if (0.0..=1.0).contains(&v) {
                Ok(unit_to_byte(v))
            } else {
                Err(Error::InvalidImage(format!(
                    "component {v} outside [0, 1] cannot be quantized"
                )))
            }
        })
        .collect()
}

/// Loads a PNG, PPM (P6) or PGM (P5) file, sniffing the format from its magic bytes.
pub fn load_image(path: impl AsRef<Path>) -> Result<VectorImage> {
    let path = path.as_ref();
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.starts_with(b"\x89PNG\r\n\x1a\n") {
        decode_png(path, &bytes)
    } else if bytes.starts_with(b"P5") || bytes.starts_with(b"P6") {
        decode_pnm(path, &bytes)
    } else {
        Err(Error::UnsupportedFormat {
            path: path.to_path_buf(),
            reason: "not a PNG or binary PPM/PGM file".into(),
        })
    }
}

fn decode_png(path: &Path, bytes: &[u8]) -> Result<VectorImage> {
    let decoder = png::Decoder::new(std::io::Cursor::new(bytes));
    let mut reader = decoder.read_info()?;
    let info = reader.info();
    let unsupported = |reason: String| Error::UnsupportedFormat {
        path: path.to_path_buf(),
        reason,
    };
    if info.bit_depth != png::BitDepth::Eight {
        return Err(unsupported(format!(
            "bit depth {:?} (only 8-bit is supported)",
            info.bit_depth
        )));
    }
    let channels = match info.color_type {
        png::ColorType::Grayscale => 1,
        png::ColorType::Rgb => 3,
        other => return Err(unsupported(format!("color type {other:?} (gray or RGB only)"))),
    };
    let (width, height) = (info.width as usize, info.height as usize);
    let mut buf = vec![
        0;
        reader
            .output_buffer_size()
            .ok_or_else(|| { unsupported("image too large".into()) })?
    ];
    let frame = reader.next_frame(&mut buf)?;
    buf.truncate(frame.buffer_size());
    let stride = frame.line_size;
    let mut packed = Vec::with_capacity(width * height * channels);
    for row in buf.chunks(stride).take(height) {
        packed.extend_from_slice(&row[..width * channels]);
    }
    image_from_bytes(width, height, channels, &packed)
}

fn decode_pnm(path: &Path, bytes: &[u8]) -> Result<VectorImage> {
    let unsupported = |reason: &str| Error::UnsupportedFormat {
        path: path.to_path_buf(),
        reason: reason.into(),
    };
    let channels = if bytes[1] == b'6' { 3 } else { 1 };
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in fields.iter_mut() {
        // Whitespace and comments between header tokens.
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err(unsupported("malformed header"));
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| unsupported("malformed header number"))?;
    }
    let [width, height, maxval] = fields;
    if maxval != 255 {
        return Err(unsupported("maxval must be 255 (8-bit only)"));
    }
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(unsupported("malformed header"));
    }
    pos += 1;
    let needed = width * height * channels;
    let raster = &bytes[pos..];
    if raster.len() < needed {
        return Err(Error::Io(std::io::Error::new(
            std::io::ErrorKind::UnexpectedEof,
            format!(
                "{}: raster holds {} bytes, expected {needed}",
                path.display(),
                raster.len()
            ),
        )));
    }
    image_from_bytes(width, height, channels, &raster[..needed])
}

/// Writes `image` as PNG or PPM/PGM. Only 1- and 3-channel images can be saved.
pub fn save_image(image: &VectorImage, path: impl AsRef<Path>, format: ImageFileFormat) -> Result<()> {
    let path = path.as_ref();
    let channels = image.channels();
    if channels != 1 && channels != 3 {
        return Err(Error::UnsupportedFormat {
            path: path.to_path_buf(),
            reason: format!("{channels} channels (only gray or RGB can be saved)"),
        });
    }
    let bytes = image_to_bytes(image)?;
    let mut out = BufWriter::new(File::create(path)?);
    match format {
        ImageFileFormat::Png => {
            let mut encoder = png::Encoder::new(&mut out, image.width() as u32, image.height() as u32);
            encoder.set_color(if channels == 3 {
                png::ColorType::Rgb
            } else {
                png::ColorType::Grayscale
            });
            encoder.set_depth(png::BitDepth::Eight);
            let mut writer = encoder.write_header()?;
            writer.write_image_data(&bytes)?;
            writer.finish()?;
        }
        ImageFileFormat::Pnm => {
            let magic = if channels == 3 { "P6" } else { "P5" };
            write!(out, "{magic}\n{} {}\n255\n", image.width(), image.height())?;
            out.write_all(&bytes)?;
        }
    }
    out.flush()?;
    Ok(())
}

/// `save_image` with the format taken from the extension.
pub fn save_image_auto(image: &VectorImage, path: impl AsRef<Path>) -> Result<()> {
    let format = ImageFileFormat::from_path(path.as_ref())?;
    save_image(image, path, format)
}

/// The set of pixel values, deduplicated and in lexicographic order.
pub fn distinct_values(image: &VectorImage) -> Vec<VectorValue> {
    let mut pixels: Vec<&[f64]> = image.pixels().collect();
    pixels.sort_by(|a, b| lex_cmp_unchecked(a, b));
    pixels.dedup();
    pixels
        .into_iter()
        .map(|p| VectorValue::from_slice(p).expect("image components are finite"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ppm_red_pixel() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("red.ppm");
        let mut f = File::create(&path).unwrap();
        f.write_all(b"P6\n# a comment\n1 1\n255\n\xff\x00\x00").unwrap();
        drop(f);
        let img = load_image(&path).unwrap();
        assert_eq!(img.shape(), (1, 1, 3));
        assert_eq!(img.pixel(0), &[1.0, 0.0, 0.0]);
    }

    #[test]
    fn pgm_is_single_channel() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.pgm");
        std::fs::write(&path, b"P5 2 2 255\n\x00\x40\x80\xff").unwrap();
        let img = load_image(&path).unwrap();
        assert_eq!(img.shape(), (2, 2, 1));
        assert_eq!(img.data(), &[0.0, 64.0 / 255.0, 128.0 / 255.0, 1.0]);
    }

    #[test]
    fn rejects_truncated_and_16_bit_pnm() {
        let dir = tempfile::tempdir().unwrap();
        let short = dir.path().join("short.ppm");
        std::fs::write(&short, b"P6\n2 2\n255\n\x00\x00").unwrap();
        assert!(matches!(load_image(&short), Err(Error::Io(_))));
        let deep = dir.path().join("deep.pgm");
        std::fs::write(&deep, b"P5\n1 1\n65535\n\x00\x00").unwrap();
        assert!(matches!(load_image(&deep), Err(Error::UnsupportedFormat { .. })));
        let text = dir.path().join("ascii.ppm");
        std::fs::write(&text, b"P3\n1 1\n255\n0 0 0\n").unwrap();
        assert!(load_image(&text).is_err());
    }

    #[test]
    fn png_with_alpha_or_16_bit_rejected() {
        let dir = tempfile::tempdir().unwrap();
        for (color, depth, bytes) in [
            (png::ColorType::Rgba, png::BitDepth::Eight, vec![0u8; 4]),
            (png::ColorType::Grayscale, png::BitDepth::Sixteen, vec![0u8; 2]),
        ] {
            let path = dir.path().join("bad.png");
            let file = File::create(&path).unwrap();
            let mut enc = png::Encoder::new(BufWriter::new(file), 1, 1);
            enc.set_color(color);
            enc.set_depth(depth);
            let mut w = enc.write_header().unwrap();
            w.write_image_data(&bytes).unwrap();
            w.finish().unwrap();
            assert!(matches!(load_image(&path), Err(Error::UnsupportedFormat { .. })));
        }
    }

    #[test]
    fn constant_images_quantize_to_extremes() {
        let white = VectorImage::constant(3, 2, &[1.0, 1.0, 1.0]).unwrap();
        assert!(image_to_bytes(&white).unwrap().iter().all(|&b| b == 255));
        let black = VectorImage::constant(3, 2, &[0.0]).unwrap();
        assert!(image_to_bytes(&black).unwrap().iter().all(|&b| b == 0));
        let bad = VectorImage::constant(1, 1, &[1.5]).unwrap();
        assert!(image_to_bytes(&bad).is_err());
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (channels, name) in [(3, "a.png"), (1, "b.png"), (3, "c.ppm"), (1, "d.pgm")] {
            let bytes: Vec<u8> = (0..7 * 5 * channels).map(|_| rng.random()).collect();
            let img = image_from_bytes(7, 5, channels, &bytes).unwrap();
            let path = dir.path().join(name);
            save_image_auto(&img, &path).unwrap();
            assert_eq!(load_image(&path).unwrap(), img);
        }
    }

    #[test]
    fn distinct_values_dedup_and_order() {
        let img = VectorImage::new(2, 1, 3, vec![1.0, 0.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(distinct_values(&img).len(), 1);

        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let bytes: Vec<u8> = (0..8 * 8 * 3).map(|_| rng.random_range(0..3) * 127).collect();
        let img = image_from_bytes(8, 8, 3, &bytes).unwrap();
        let got = distinct_values(&img);
        // Nested-loop oracle.
        let mut naive: Vec<Vec<f64>> = Vec::new();
        for p in img.pixels() {
            if !naive.iter().any(|q| q.as_slice() == p) {
                naive.push(p.to_vec());
            }
        }
        assert_eq!(got.len(), naive.len());
        for q in &naive {
            assert!(got.iter().any(|v| v.components() == q.as_slice()));
        }
        assert!(got
            .windows(2)
            .all(|w| lex_cmp_unchecked(w[0].components(), w[1].components()).is_lt()));
    }
}
