//! Grayscale ingest and particle segmentation.
//!
//! Particles are darker than the background: Otsu's threshold splits the
//! 256-bin histogram, every pixel at or below the cutoff becomes foreground,
//! the largest 8-connected component is kept and its outer boundary is traced
//! with Moore-neighbour tracing.

use std::path::{Path, PathBuf};

use image::DynamicImage;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major 8-bit grayscale raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::ZeroAreaImage);
        }
        if pixels.len() != width * height {
            return Err(Error::ImageSizeMismatch {
                expected: width * height,
                got: pixels.len(),
            });
        }
        Ok(Self { width, height, pixels })
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

    pub fn histogram(&self) -> [u64; 256] {
        let mut hist = [0u64; 256];
        for &p in &self.pixels {
            hist[p as usize] += 1;
        }
        hist
    }
}

/// Integer luma: round(0.299 R + 0.587 G + 0.114 B), computed in fixed point.
pub fn luma(r: u8, g: u8, b: u8) -> u8 {
    let weighted = 299 * r as u32 + 587 * g as u32 + 114 * b as u32;
    ((weighted + 500) / 1000) as u8
}

/// Read an 8-bit PNG, BMP or binary PGM. Colour inputs are reduced with [`luma`].
pub fn load_gray_image(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let unreadable = |reason: String| Error::UnreadableFile {
        path: path.to_path_buf(),
        reason,
    };
    let reader = image::ImageReader::open(path)
        .map_err(|e| unreadable(e.to_string()))?
        .with_guessed_format()
        .map_err(|e| unreadable(e.to_string()))?;
    let decoded = reader.decode().map_err(|e| unreadable(e.to_string()))?;
    let (width, height) = (decoded.width() as usize, decoded.height() as usize);
    let pixels = match decoded {
        DynamicImage::ImageLuma8(buf) => buf.into_raw(),
        DynamicImage::ImageLumaA8(buf) => buf.pixels().map(|p| p.0[0]).collect(),
        DynamicImage::ImageRgb8(buf) => buf.pixels().map(|p| luma(p.0[0], p.0[1], p.0[2])).collect(),
        DynamicImage::ImageRgba8(buf) => buf.pixels().map(|p| luma(p.0[0], p.0[1], p.0[2])).collect(),
        other => {
            return Err(Error::UnsupportedBitDepth {
                path: path.to_path_buf(),
                depth: format!("{:?}", other.color()),
            })
        }
    };
    GrayImage::new(width, height, pixels)
}

pub const IMAGE_EXTENSIONS: [&str; 4] = ["png", "bmp", "pgm", "pnm"];

/// Every raster in `dir` with a supported extension, sorted lexicographically.
pub fn list_images(dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir.as_ref())? {
        let path = entry?.path();
        if !path.is_file() {
            continue;
        }
        let supported = path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
            .unwrap_or(false);
        if supported {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// Between-class variance for a split with class 0 = intensities <= `t`.
/// `None` when either class is empty.
pub fn between_class_variance(hist: &[u64; 256], t: usize) -> Option<f64> {
    let total: u64 = hist.iter().sum();
    let sum: f64 = hist.iter().enumerate().map(|(i, &c)| i as f64 * c as f64).sum();
    let n0: u64 = hist[..=t].iter().sum();
    let n1 = total - n0;
    if n0 == 0 || n1 == 0 {
        return None;
    }
    let s0: f64 = hist[..=t].iter().enumerate().map(|(i, &c)| i as f64 * c as f64).sum();
    let (w0, w1) = (n0 as f64 / total as f64, n1 as f64 / total as f64);
    let mu0 = s0 / n0 as f64;
    let mu1 = (sum - s0) / n1 as f64;
    Some(w0 * w1 * (mu0 - mu1) * (mu0 - mu1))
}

// Relative slack under which two variances count as tied.
const OTSU_TIE_EPS: f64 = 1e-12;

/// Otsu's threshold. Ties are resolved by the floor of the mean maximizing threshold.
pub fn otsu_threshold(img: &GrayImage) -> Result<u8> {
    let hist = img.histogram();
    let total: u64 = hist.iter().sum();
    let sum: f64 = hist.iter().enumerate().map(|(i, &c)| i as f64 * c as f64).sum();

    let mut scores = [f64::NAN; 256];
    let (mut n0, mut s0) = (0u64, 0f64);
    for t in 0..256 {
        n0 += hist[t];
        s0 += t as f64 * hist[t] as f64;
        let n1 = total - n0;
        if n0 == 0 || n1 == 0 {
            continue;
        }
        let (w0, w1) = (n0 as f64 / total as f64, n1 as f64 / total as f64);
        let d = s0 / n0 as f64 - (sum - s0) / n1 as f64;
        scores[t] = w0 * w1 * d * d;
    }

    let best = scores
        .iter()
        .copied()
        .filter(|s| !s.is_nan())
        .fold(f64::NEG_INFINITY, f64::max);
    if !best.is_finite() {
        return Err(Error::DegenerateHistogram);
    }
    let (mut acc, mut count) = (0usize, 0usize);
    for (t, &s) in scores.iter().enumerate() {
        if !s.is_nan() && (best - s).abs() <= OTSU_TIE_EPS * best {
            acc += t;
            count += 1;
        }
    }
    Ok((acc / count) as u8)
}

/// Row-major boolean occupancy grid with at least one foreground pixel.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, data: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::ZeroAreaImage);
        }
        if data.len() != width * height {
            return Err(Error::ImageSizeMismatch {
                expected: width * height,
                got: data.len(),
            });
        }
        if !data.iter().any(|&b| b) {
            return Err(Error::NoParticle);
        }
        Ok(Self { width, height, data })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    /// Occupancy with out-of-bounds reads as background.
    #[inline]
    pub fn get(&self, x: i64, y: i64) -> bool {
        x >= 0
            && y >= 0
            && (x as usize) < self.width
            && (y as usize) < self.height
            && self.data[y as usize * self.width + x as usize]
    }

    pub fn area(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn foreground(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.data
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| (i % self.width, i / self.width))
    }

    /// Lossless quarter turn: pixel (x, y) moves to (y, width - 1 - x).
    pub fn rotate90(&self) -> Self {
        let (w, h) = (self.width, self.height);
        let mut data = vec![false; w * h];
        for (x, y) in self.foreground() {
            let (nx, ny) = (y, w - 1 - x);
            data[ny * h + nx] = true;
        }
        Self {
            width: h,
            height: w,
            data,
        }
    }

    /// Nearest-neighbour enlargement by an integer factor.
    pub fn upscale(&self, factor: usize) -> Self {
        let (w, h) = (self.width * factor, self.height * factor);
        let data = (0..w * h)
            .map(|i| self.data[(i / w / factor) * self.width + (i % w) / factor])
            .collect();
        Self {
            width: w,
            height: h,
            data,
        }
    }

    /// Copy onto a larger canvas with the origin moved to (dx, dy).
    pub fn translate(&self, dx: usize, dy: usize) -> Self {
        let (w, h) = (self.width + dx, self.height + dy);
        let mut data = vec![false; w * h];
        for (x, y) in self.foreground() {
            data[(y + dy) * w + x + dx] = true;
        }
        Self {
            width: w,
            height: h,
            data,
        }
    }

    /// PGM (P5) bytes with foreground dark (0) on a light (255) background.
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend(self.data.iter().map(|&b| if b { 0u8 } else { 255u8 }));
        out
    }
}

/// Foreground = intensity <= t.
pub fn binarize(img: &GrayImage, t: u8) -> Result<BinaryMask> {
    let data = img.pixels().iter().map(|&p| p <= t).collect();
    BinaryMask::new(img.width(), img.height(), data)
}

const NEIGHBOURS8: [(i64, i64); 8] = [(-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)];

/// Keep only the 8-connected component with the most pixels. Equal sizes go to
/// the component whose bounding-box corner (row, column) comes first.
pub fn largest_component(mask: &BinaryMask) -> BinaryMask {
    let (w, h) = (mask.width, mask.height);
    let mut labels = vec![u32::MAX; w * h];
    let mut stack = Vec::new();
    // (size, min_y, min_x) per component
    let mut stats: Vec<(usize, usize, usize)> = Vec::new();

    for start in 0..w * h {
        if !mask.data[start] || labels[start] != u32::MAX {
            continue;
        }
        let id = stats.len() as u32;
        let mut st = (0usize, usize::MAX, usize::MAX);
        labels[start] = id;
        stack.push(start);
        while let Some(i) = stack.pop() {
            let (x, y) = (i % w, i / w);
            st.0 += 1;
            st.1 = st.1.min(y);
            st.2 = st.2.min(x);
            for (dx, dy) in NEIGHBOURS8 {
                let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                if mask.get(nx, ny) {
                    let j = ny as usize * w + nx as usize;
                    if labels[j] == u32::MAX {
                        labels[j] = id;
                        stack.push(j);
                    }
                }
            }
        }
        stats.push(st);
    }

    if stats.len() <= 1 {
        return mask.clone();
    }
    let keep = stats
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| b.0.cmp(&a.0).then((a.1, a.2).cmp(&(b.1, b.2))))
        .map(|(i, _)| i as u32)
        .expect("at least one component");
    BinaryMask {
        width: w,
        height: h,
        data: labels.iter().map(|&l| l == keep).collect(),
    }
}

/// A point in pixel-centre coordinates (x = column, y = row).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Twice the signed (shoelace) area of a closed polygon.
pub fn signed_area2(points: &[Point]) -> f64 {
    let n = points.len();
    (0..n)
        .map(|i| {
            let (a, b) = (points[i], points[(i + 1) % n]);
            a.x * b.y - b.x * a.y
        })
        .sum()
}

/// Closed outer boundary, positively oriented (shoelace area > 0).
#[derive(Debug, Clone, PartialEq)]
pub struct Contour {
    points: Vec<Point>,
}

impl Contour {
    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn signed_area(&self) -> f64 {
        0.5 * signed_area2(&self.points)
    }

    /// Closed polygon length, including the segment back to the start.
    pub fn perimeter(&self) -> f64 {
        let n = self.points.len();
        (0..n).map(|i| self.points[i].dist(self.points[(i + 1) % n])).sum()
    }
}

// Clockwise on screen (y grows downward): N, NE, E, SE, S, SW, W, NW.
const MOORE: [(i64, i64); 8] = [(0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1)];

fn moore_index(dx: i64, dy: i64) -> usize {
    MOORE
        .iter()
        .position(|&d| d == (dx, dy))
        .expect("offset is an 8-neighbour")
}

/// Moore-neighbour trace of the outer boundary, starting at the topmost then
/// leftmost foreground pixel. Holes are ignored.
pub fn trace_contour(mask: &BinaryMask) -> Result<Contour> {
    let start = mask.data.iter().position(|&b| b).ok_or(Error::NoParticle)?;
    let s = ((start % mask.width) as i64, (start / mask.width) as i64);

    let mut pixels = vec![s];
    let mut cur = s;
    // Direction from `cur` to the background pixel we entered from.
    let mut back = 6usize;
    let mut second: Option<(i64, i64)> = None;
    let limit = 4 * mask.area() + 16;

    loop {
        let step = (1..=8).map(|i| (back + i) % 8).find(|&d| {
            let (dx, dy) = MOORE[d];
            mask.get(cur.0 + dx, cur.1 + dy)
        });
        let Some(d) = step else {
            return Err(Error::ContourDegenerate);
        };
        let next = (cur.0 + MOORE[d].0, cur.1 + MOORE[d].1);
        if cur == s && second == Some(next) {
            break;
        }
        if second.is_none() {
            second = Some(next);
        }
        let (bx, by) = MOORE[(d + 7) % 8];
        let backtrack = (cur.0 + bx, cur.1 + by);
        back = moore_index(backtrack.0 - next.0, backtrack.1 - next.1);
        pixels.push(next);
        cur = next;
        if pixels.len() > limit {
            return Err(Error::ContourDegenerate);
        }
    }
    if pixels.len() > 1 && pixels.last() == pixels.first() {
        pixels.pop();
    }

    let mut points: Vec<Point> = pixels
        .into_iter()
        .map(|(x, y)| Point::new(x as f64, y as f64))
        .collect();
    let area2 = signed_area2(&points);
    if points.len() < 4 || area2 == 0.0 {
        return Err(Error::ContourDegenerate);
    }
    if area2 < 0.0 {
        points[1..].reverse();
    }
    Ok(Contour { points })
}

/// Sub-pixel centroid of a mask.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Centroid {
    pub x: f64,
    pub y: f64,
}

/// Mean of the foreground pixel-centre coordinates.
pub fn centroid_of(mask: &BinaryMask) -> Centroid {
    let (mut sx, mut sy, mut n) = (0f64, 0f64, 0usize);
    for (x, y) in mask.foreground() {
        sx += x as f64;
        sy += y as f64;
        n += 1;
    }
    Centroid {
        x: sx / n as f64,
        y: sy / n as f64,
    }
}
