//! Grayscale PGM input/output and synthetic test images.
//!
//! Pixel `(col, row)` of a `W x H` image is identified with grid node
//! `(j, i) = (col, row)`, so an image maps onto a grid with `nx = W`, `ny = H`.

use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{GridSpec, ScalarField2D};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntensityImage {
    pub width: usize,
    pub height: usize,
    pub max_value: u16,
    /// Row-major, top row first.
    pub samples: Vec<u16>,
}

impl IntensityImage {
    pub fn new(width: usize, height: usize, max_value: u16, samples: Vec<u16>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::MalformedHeader(format!("zero dimension {width}x{height}")));
        }
        if max_value == 0 {
            return Err(Error::MalformedHeader("max value must be positive".into()));
        }
        if samples.len() != width * height {
            return Err(Error::TruncatedPayload {
                expected: width * height,
                found: samples.len(),
            });
        }
        if let Some(index) = samples.iter().position(|&s| s > max_value) {
            return Err(Error::SampleOutOfRange {
                index,
                value: samples[index] as u32,
                max_value: max_value as u32,
            });
        }
        Ok(IntensityImage {
            width,
            height,
            max_value,
            samples,
        })
    }

    #[inline]
    pub fn get(&self, col: usize, row: usize) -> u16 {
        self.samples[row * self.width + col]
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        read_pgm(&bytes)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, write_pgm(self)).map_err(|e| Error::io(path, e))
    }
}

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> HeaderCursor<'a> {
    fn skip_whitespace_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            let b = self.bytes[self.pos];
            if b == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' && self.bytes[self.pos] != b'\r' {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    /// Next unsigned decimal token, or `None` at end of input.
    fn next_number(&mut self, what: &str) -> Result<Option<u32>> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            if self.pos >= self.bytes.len() {
                return Ok(None);
            }
            return Err(Error::MalformedHeader(format!(
                "expected {what}, found byte 0x{:02x}",
                self.bytes[self.pos]
            )));
        }
        let text = std::str::from_utf8(&self.bytes[start..self.pos]).expect("ascii digits");
        text.parse::<u32>()
            .map(Some)
            .map_err(|_| Error::MalformedHeader(format!("{what} {text} out of range")))
    }

    fn header_number(&mut self, what: &str) -> Result<u32> {
        self.next_number(what)?
            .ok_or_else(|| Error::MalformedHeader(format!("missing {what}")))
    }
}

pub fn read_pgm(bytes: &[u8]) -> Result<IntensityImage> {
    if bytes.len() < 2 {
        return Err(Error::MalformedHeader("file too short".into()));
    }
    let magic = &bytes[..2];
    let binary = match magic {
        b"P2" => false,
        b"P5" => true,
        _ => return Err(Error::UnsupportedFormat(String::from_utf8_lossy(magic).into_owned())),
    };
    let mut cur = HeaderCursor { bytes, pos: 2 };
    let width = cur.header_number("width")? as usize;
    let height = cur.header_number("height")? as usize;
    let max_value = cur.header_number("max value")?;
    if width == 0 || height == 0 {
        return Err(Error::MalformedHeader(format!("zero dimension {width}x{height}")));
    }
    if max_value == 0 || max_value > u16::MAX as u32 {
        return Err(Error::MalformedHeader(format!("max value {max_value} outside 1..=65535")));
    }
    let expected = width
        .checked_mul(height)
        .ok_or_else(|| Error::MalformedHeader("image dimensions overflow".into()))?;

    let mut samples = Vec::with_capacity(expected);
    if binary {
        // Exactly one whitespace byte separates the header from the raster.
        if cur.pos >= bytes.len() || !bytes[cur.pos].is_ascii_whitespace() {
            return Err(Error::TruncatedPayload { expected, found: 0 });
        }
        let raster = &bytes[cur.pos + 1..];
        let width_bytes = if max_value < 256 { 1 } else { 2 };
        let found = raster.len() / width_bytes;
        if found < expected {
            return Err(Error::TruncatedPayload { expected, found });
        }
        if width_bytes == 1 {
            samples.extend(raster[..expected].iter().map(|&b| b as u16));
        } else {
            samples.extend(raster[..2 * expected].chunks_exact(2).map(|c| u16::from_be_bytes([c[0], c[1]])));
        }
    } else {
        while samples.len() < expected {
            match cur.next_number("sample")? {
                Some(v) if v > u16::MAX as u32 => {
                    return Err(Error::SampleOutOfRange {
                        index: samples.len(),
                        value: v,
                        max_value,
                    })
                }
                Some(v) => samples.push(v as u16),
                None => {
                    return Err(Error::TruncatedPayload {
                        expected,
                        found: samples.len(),
                    })
                }
            }
        }
    }
    if let Some(index) = samples.iter().position(|&s| s as u32 > max_value) {
        return Err(Error::SampleOutOfRange {
            index,
            value: samples[index] as u32,
            max_value,
        });
    }
    Ok(IntensityImage {
        width,
        height,
        max_value: max_value as u16,
        samples,
    })
}

/// Binary (P5) encoding; 16-bit big-endian samples when `max_value > 255`.
pub fn write_pgm(image: &IntensityImage) -> Vec<u8> {
    let header = format!("P5\n{} {}\n{}\n", image.width, image.height, image.max_value);
    let wide = image.max_value > 255;
    let mut out = Vec::with_capacity(header.len() + image.samples.len() * if wide { 2 } else { 1 });
    out.extend_from_slice(header.as_bytes());
    if wide {
        for &s in &image.samples {
            out.extend_from_slice(&s.to_be_bytes());
        }
    } else {
        out.extend(image.samples.iter().map(|&s| s as u8));
    }
    out
}

/// ASCII (P2) encoding, mostly useful for fixtures.
pub fn write_pgm_ascii(image: &IntensityImage) -> Vec<u8> {
    let mut out = format!("P2\n{} {}\n{}\n", image.width, image.height, image.max_value);
    for row in image.samples.chunks(image.width) {
        let line: Vec<String> = row.iter().map(|s| s.to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out.into_bytes()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ShapeKind {
    /// `|x - cx| / half_x + |y - cy| / half_y <= 1`.
    Rhombus { cx: f64, cy: f64, half_x: f64, half_y: f64 },
    Circle { cx: f64, cy: f64, radius: f64 },
    Rectangle { x0: f64, y0: f64, x1: f64, y1: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeSpec {
    pub kind: ShapeKind,
    pub foreground: u16,
    pub background: u16,
}

impl ShapeSpec {
    /// The benchmark rhombus `|x|/2 + |y| <= 3/4`, dark on light.
    pub fn benchmark_rhombus() -> Self {
        ShapeSpec {
            kind: ShapeKind::Rhombus {
                cx: 0.0,
                cy: 0.0,
                half_x: 1.5,
                half_y: 0.75,
            },
            foreground: 0,
            background: 255,
        }
    }

    pub fn circle(cx: f64, cy: f64, radius: f64) -> Self {
        ShapeSpec {
            kind: ShapeKind::Circle { cx, cy, radius },
            foreground: 0,
            background: 255,
        }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        match self.kind {
            ShapeKind::Rhombus { cx, cy, half_x, half_y } => (x - cx).abs() / half_x + (y - cy).abs() / half_y <= 1.0,
            ShapeKind::Circle { cx, cy, radius } => (x - cx).powi(2) + (y - cy).powi(2) <= radius * radius,
            ShapeKind::Rectangle { x0, y0, x1, y1 } => x >= x0 && x <= x1 && y >= y0 && y <= y1,
        }
    }

    fn bounding_box(&self) -> (f64, f64, f64, f64) {
        match self.kind {
            ShapeKind::Rhombus { cx, cy, half_x, half_y } => (cx - half_x, cy - half_y, cx + half_x, cy + half_y),
            ShapeKind::Circle { cx, cy, radius } => (cx - radius, cy - radius, cx + radius, cy + radius),
            ShapeKind::Rectangle { x0, y0, x1, y1 } => (x0, y0, x1, y1),
        }
    }

    fn validate(&self, grid: &GridSpec) -> Result<()> {
        if self.foreground == self.background {
            return Err(Error::InvalidShape("foreground and background gray levels coincide".into()));
        }
        let positive = match self.kind {
            ShapeKind::Rhombus { half_x, half_y, .. } => half_x > 0.0 && half_y > 0.0,
            ShapeKind::Circle { radius, .. } => radius > 0.0,
            ShapeKind::Rectangle { x0, y0, x1, y1 } => x1 > x0 && y1 > y0,
        };
        if !positive {
            return Err(Error::InvalidShape(format!("non-positive extent in {:?}", self.kind)));
        }
        let (x0, y0, x1, y1) = self.bounding_box();
        if x0 < grid.x_min || x1 > grid.x_max || y0 < grid.y_min || y1 > grid.y_max {
            return Err(Error::InvalidShape(format!(
                "{:?} does not fit in [{}, {}] x [{}, {}]",
                self.kind, grid.x_min, grid.x_max, grid.y_min, grid.y_max
            )));
        }
        Ok(())
    }
}

/// Nodes inside the shape get the foreground level, all others the background.
pub fn render_synthetic(shape: &ShapeSpec, grid: &GridSpec) -> Result<IntensityImage> {
    shape.validate(grid)?;
    let mut samples = Vec::with_capacity(grid.len());
    for i in 0..grid.ny {
        for j in 0..grid.nx {
            samples.push(if shape.contains(grid.x(j), grid.y(i)) {
                shape.foreground
            } else {
                shape.background
            });
        }
    }
    IntensityImage::new(grid.nx, grid.ny, shape.foreground.max(shape.background).max(1), samples)
}

/// Intensities scaled to `[0, 1]` on the given grid.
pub fn normalize(image: &IntensityImage, grid: &GridSpec) -> Result<ScalarField2D> {
    if image.width != grid.nx || image.height != grid.ny {
        return Err(Error::InvalidParameter(format!(
            "image is {}x{} but grid has {}x{} nodes",
            image.width, image.height, grid.nx, grid.ny
        )));
    }
    let scale = image.max_value as f64;
    ScalarField2D::new(*grid, image.samples.iter().map(|&s| s as f64 / scale).collect())
}
