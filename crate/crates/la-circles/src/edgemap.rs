//! Grayscale loading (PGM P2/P5 and PNG), Canny edge extraction and seeded
//! sampling of the working edge-point vector.
//!
//! Edge maps are binary rasters; on disk any nonzero pixel counts as an edge
//! and maps are saved as P5 PGM with 0/255 values.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Default floor for [`sample_edge_points`]: a flat percentage of a sparse
/// map can yield too few points to form any triple.
pub const DEFAULT_SAMPLE_FLOOR: usize = 30;

/// 8-bit grayscale image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 || pixels.len() != width * height {
            return Err(Error::Dimension(format!(
                "{}x{} image with {} pixels",
                width,
                height,
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }
}

/// Binary edge raster, row-major; `true` marks an edge pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeMap {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl EdgeMap {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn from_bits(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 || bits.len() != width * height {
            return Err(Error::Dimension(format!(
                "{}x{} edge map with {} bits",
                width,
                height,
                bits.len()
            )));
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.bits[y * self.width + x] = value;
    }

    /// Number of edge pixels (the total the sampler draws from).
    pub fn edge_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// All edge pixels in row-major order.
    pub fn points(&self) -> Vec<EdgePoint> {
        let mut out = Vec::new();
        for y in 0..self.height {
            for x in 0..self.width {
                if self.bits[y * self.width + x] {
                    out.push(EdgePoint { x, y });
                }
            }
        }
        out
    }
}

/// One edge pixel, 0-based (x = column, y = row).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EdgePoint {
    pub x: usize,
    pub y: usize,
}

impl EdgePoint {
    pub fn as_f64(&self) -> (f64, f64) {
        (self.x as f64, self.y as f64)
    }
}

/// The working subset of edge points a detection run operates on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgePointVector {
    pub points: Vec<EdgePoint>,
}

impl EdgePointVector {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Loads a grayscale image from a PGM (P2/P5) or PNG file.
///
/// 16-bit sources are right-shifted to 8 bits; color PNG is converted by the
/// 0.299/0.587/0.114 luminance weighting.
pub fn load_gray(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::Io {
        path: path.into(),
        source: e,
    })?;
    decode_gray(&bytes, path)
}

fn decode_gray(bytes: &[u8], path: &Path) -> Result<GrayImage> {
    if bytes.starts_with(b"\x89PNG") {
        decode_png(bytes, path)
    } else if bytes.starts_with(b"P2") || bytes.starts_with(b"P5") {
        decode_pgm(bytes, path)
    } else {
        let magic = bytes
            .iter()
            .take(2)
            .map(|&b| if b.is_ascii_graphic() { b as char } else { '?' })
            .collect::<String>();
        Err(Error::Format {
            path: path.into(),
            detail: format!("magic '{magic}'; expected PGM (P2/P5) or PNG"),
        })
    }
}

fn decode_png(bytes: &[u8], path: &Path) -> Result<GrayImage> {
    let format_err = |detail: String| Error::Format {
        path: path.into(),
        detail,
    };
    let img = image::load_from_memory_with_format(bytes, image::ImageFormat::Png)
        .map_err(|e| format_err(format!("png: {e}")))?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let luma601 = |r: u16, g: u16, b: u16| -> u8 {
        ((299 * r as u32 + 587 * g as u32 + 114 * b as u32 + 500) / 1000) as u8
    };
    let pixels: Vec<u8> = match img {
        image::DynamicImage::ImageLuma8(buf) => buf.into_raw(),
        image::DynamicImage::ImageLumaA8(buf) => buf.pixels().map(|p| p.0[0]).collect(),
        image::DynamicImage::ImageLuma16(buf) => buf.pixels().map(|p| (p.0[0] >> 8) as u8).collect(),
        image::DynamicImage::ImageLumaA16(buf) => {
            buf.pixels().map(|p| (p.0[0] >> 8) as u8).collect()
        }
        image::DynamicImage::ImageRgb8(buf) => buf
            .pixels()
            .map(|p| luma601(p.0[0] as u16, p.0[1] as u16, p.0[2] as u16))
            .collect(),
        image::DynamicImage::ImageRgba8(buf) => buf
            .pixels()
            .map(|p| luma601(p.0[0] as u16, p.0[1] as u16, p.0[2] as u16))
            .collect(),
        image::DynamicImage::ImageRgb16(buf) => buf
            .pixels()
            .map(|p| luma601(p.0[0] >> 8, p.0[1] >> 8, p.0[2] >> 8))
            .collect(),
        image::DynamicImage::ImageRgba16(buf) => buf
            .pixels()
            .map(|p| luma601(p.0[0] >> 8, p.0[1] >> 8, p.0[2] >> 8))
            .collect(),
        other => other
            .to_rgb8()
            .pixels()
            .map(|p| luma601(p.0[0] as u16, p.0[1] as u16, p.0[2] as u16))
            .collect(),
    };
    GrayImage::new(w, h, pixels)
}

struct PgmCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> PgmCursor<'a> {
    fn skip_ws_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            let b = self.bytes[self.pos];
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    fn next_token(&mut self) -> Option<&'a [u8]> {
        self.skip_ws_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        (self.pos > start).then(|| &self.bytes[start..self.pos])
    }

    fn next_usize(&mut self) -> Option<usize> {
        std::str::from_utf8(self.next_token()?).ok()?.parse().ok()
    }
}

fn decode_pgm(bytes: &[u8], path: &Path) -> Result<GrayImage> {
    let format_err = |detail: &str| Error::Format {
        path: path.into(),
        detail: detail.into(),
    };
    let binary = bytes.starts_with(b"P5");
    let mut cur = PgmCursor { bytes, pos: 2 };
    let width = cur.next_usize().ok_or_else(|| format_err("missing width"))?;
    let height = cur
        .next_usize()
        .ok_or_else(|| format_err("missing height"))?;
    let maxval = cur
        .next_usize()
        .ok_or_else(|| format_err("missing maxval"))?;
    if width == 0 || height == 0 || maxval == 0 || maxval > 65535 {
        return Err(format_err("bad header values"));
    }
    let n = width * height;
    let wide = maxval > 255;

    let pixels = if binary {
        // Exactly one whitespace byte separates the header from the data.
        if cur.pos >= bytes.len() || !bytes[cur.pos].is_ascii_whitespace() {
            return Err(format_err("missing data separator"));
        }
        let data = &bytes[cur.pos + 1..];
        if wide {
            if data.len() < 2 * n {
                return Err(format_err("truncated pixel data"));
            }
            data.chunks_exact(2)
                .take(n)
                .map(|c| (u16::from_be_bytes([c[0], c[1]]) >> 8) as u8)
                .collect()
        } else {
            if data.len() < n {
                return Err(format_err("truncated pixel data"));
            }
            data[..n].to_vec()
        }
    } else {
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let v = cur
                .next_usize()
                .ok_or_else(|| format_err("truncated pixel data"))?;
            if v > maxval {
                return Err(format_err("sample exceeds maxval"));
            }
            out.push(if wide { (v >> 8) as u8 } else { v as u8 });
        }
        out
    };
    GrayImage::new(width, height, pixels)
}

/// Writes a grayscale image as binary P5 PGM.
pub fn save_pgm(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = format!("P5\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend_from_slice(&img.pixels);
    fs::write(path, out).map_err(|e| Error::Io {
        path: path.into(),
        source: e,
    })
}

/// Loads an edge map: any nonzero pixel of the underlying raster is an edge.
pub fn load_edge_map(path: impl AsRef<Path>) -> Result<EdgeMap> {
    let gray = load_gray(path)?;
    let bits = gray.pixels.iter().map(|&p| p != 0).collect();
    EdgeMap::from_bits(gray.width, gray.height, bits)
}

/// Saves an edge map as P5 PGM with 0/255 values.
pub fn save_edge_map(em: &EdgeMap, path: impl AsRef<Path>) -> Result<()> {
    let pixels = em.bits.iter().map(|&b| if b { 255 } else { 0 }).collect();
    let img = GrayImage::new(em.width, em.height, pixels)?;
    save_pgm(&img, path)
}

/// Canny edge extraction: Gaussian smoothing, Sobel gradients, non-maximum
/// suppression along the quantized gradient direction and double-threshold
/// hysteresis with 8-connected linking.
///
/// `low` and `high` are fractions of the maximum gradient magnitude.
pub fn canny(img: &GrayImage, sigma: f64, low: f64, high: f64) -> Result<EdgeMap> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    if !(0.0..1.0).contains(&low) || !(low < high && high <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "thresholds must satisfy 0 <= low < high <= 1, got low={low} high={high}"
        )));
    }
    let radius = (3.0 * sigma).ceil() as usize;
    let ksize = 2 * radius + 1;
    if img.width < ksize || img.height < ksize {
        return Err(Error::Dimension(format!(
            "{}x{} image smaller than the {ksize}x{ksize} Gaussian kernel",
            img.width, img.height
        )));
    }

    let (w, h) = (img.width, img.height);
    let field = gradient_field(img, sigma);
    if field.max_mag == 0.0 {
        return Ok(EdgeMap::new(w, h));
    }

    let nms = suppress_non_maxima(&field, w, h);

    // Hysteresis: seed at strong pixels, link 8-neighbors above the low bar.
    let t_high = high * field.max_mag;
    let t_low = low * field.max_mag;
    let mut bits = vec![false; w * h];
    let mut stack = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if nms[i] >= t_high && !bits[i] {
                bits[i] = true;
                stack.push((x, y));
                while let Some((cx, cy)) = stack.pop() {
                    for dy in -1i64..=1 {
                        for dx in -1i64..=1 {
                            let (nx, ny) = (cx as i64 + dx, cy as i64 + dy);
                            if nx < 0 || ny < 0 || nx as usize >= w || ny as usize >= h {
                                continue;
                            }
                            let j = ny as usize * w + nx as usize;
                            if !bits[j] && nms[j] >= t_low {
                                bits[j] = true;
                                stack.push((nx as usize, ny as usize));
                            }
                        }
                    }
                }
            }
        }
    }
    EdgeMap::from_bits(w, h, bits)
}

struct GradientField {
    gx: Vec<f64>,
    gy: Vec<f64>,
    mag: Vec<f64>,
    max_mag: f64,
}

fn gradient_field(img: &GrayImage, sigma: f64) -> GradientField {
    let (w, h) = (img.width, img.height);
    let blurred = gaussian_blur(img, sigma);

    let mut gx = vec![0.0; w * h];
    let mut gy = vec![0.0; w * h];
    let mut mag = vec![0.0; w * h];
    let mut max_mag = 0.0f64;
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let p = |dx: i64, dy: i64| {
                blurred[(y as i64 + dy) as usize * w + (x as i64 + dx) as usize]
            };
            let sx = (p(1, -1) + 2.0 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2.0 * p(-1, 0) + p(-1, 1));
            let sy = (p(-1, 1) + 2.0 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2.0 * p(0, -1) + p(1, -1));
            let i = y * w + x;
            gx[i] = sx;
            gy[i] = sy;
            mag[i] = sx.hypot(sy);
            max_mag = max_mag.max(mag[i]);
        }
    }
    GradientField {
        gx,
        gy,
        mag,
        max_mag,
    }
}

fn gaussian_blur(img: &GrayImage, sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as i64;
    let mut kernel = Vec::with_capacity(2 * radius as usize + 1);
    for i in -radius..=radius {
        kernel.push((-((i * i) as f64) / (2.0 * sigma * sigma)).exp());
    }
    let norm: f64 = kernel.iter().sum();
    for k in &mut kernel {
        *k /= norm;
    }

    let (w, h) = (img.width as i64, img.height as i64);
    let clamp = |v: i64, hi: i64| v.clamp(0, hi - 1) as usize;

    // Separable passes with replicated borders.
    let mut horiz = vec![0.0; (w * h) as usize];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (ki, kv) in kernel.iter().enumerate() {
                let sx = clamp(x + ki as i64 - radius, w);
                acc += kv * img.pixels[y as usize * w as usize + sx] as f64;
            }
            horiz[(y * w + x) as usize] = acc;
        }
    }
    let mut out = vec![0.0; (w * h) as usize];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (ki, kv) in kernel.iter().enumerate() {
                let sy = clamp(y + ki as i64 - radius, h);
                acc += kv * horiz[sy * w as usize + x as usize];
            }
            out[(y * w + x) as usize] = acc;
        }
    }
    out
}

/// Keeps only ridge pixels along one of four quantized gradient directions.
/// The comparison is strict on one side so plateau ties thin to one pixel.
fn suppress_non_maxima(field: &GradientField, w: usize, h: usize) -> Vec<f64> {
    let mut out = vec![0.0; w * h];
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let i = y * w + x;
            let m = field.mag[i];
            if m == 0.0 {
                continue;
            }
            let mut angle = field.gy[i].atan2(field.gx[i]).to_degrees();
            if angle < 0.0 {
                angle += 180.0;
            }
            let ((ax, ay), (bx, by)) = if !(22.5..157.5).contains(&angle) {
                ((x + 1, y), (x - 1, y))
            } else if angle < 67.5 {
                ((x + 1, y + 1), (x - 1, y - 1))
            } else if angle < 112.5 {
                ((x, y + 1), (x, y - 1))
            } else {
                ((x - 1, y + 1), (x + 1, y - 1))
            };
            if m > field.mag[ay * w + ax] && m >= field.mag[by * w + bx] {
                out[i] = m;
            }
        }
    }
    out
}

/// Draws a seeded uniform sample of distinct edge points.
///
/// The sample size is `max(ceil(fraction * N_t), min_count)` capped at the
/// total edge count; candidate order is row-major before shuffling so the
/// result only depends on (map, fraction, min_count, seed).
pub fn sample_edge_points(
    em: &EdgeMap,
    fraction: f64,
    min_count: usize,
    seed: u64,
) -> Result<EdgePointVector> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "sample fraction must lie in (0, 1], got {fraction}"
        )));
    }
    let mut points = em.points();
    let n_t = points.len();
    if n_t < 3 {
        return Err(Error::InsufficientData(format!(
            "edge map has {n_t} edge pixels; a circle needs 3"
        )));
    }
    let target = ((fraction * n_t as f64).ceil() as usize)
        .max(min_count)
        .min(n_t);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..target {
        let j = rng.gen_range(i..n_t);
        points.swap(i, j);
    }
    points.truncate(target);
    Ok(EdgePointVector { points })
}
