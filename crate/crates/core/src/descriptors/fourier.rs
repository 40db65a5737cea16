use std::f64::consts::TAU;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use super::{DescriptorKind, DescriptorVector};
use crate::error::{Error, Result};
use crate::mask::{Contour, Point};

/// Boundary samples fed to the transform.
pub const FD_RESAMPLE_POINTS: usize = 256;
/// Harmonics kept on each side of the spectrum.
pub const FD_HARMONICS: usize = 5;

/// `n` points equally spaced by arclength along the closed polygon, starting
/// at its first vertex.
pub fn contour_resample(points: &[Point], n: usize) -> Result<Vec<Point>> {
    if n < 4 {
        return Err(Error::InvalidArgument(format!("resample count {n} < 4")));
    }
    if points.len() < 2 {
        return Err(Error::ContourDegenerate);
    }
    let m = points.len();
    let mut cumulative = Vec::with_capacity(m + 1);
    cumulative.push(0.0);
    for i in 0..m {
        let next = cumulative[i] + points[i].dist(points[(i + 1) % m]);
        cumulative.push(next);
    }
    let total = cumulative[m];
    if total <= 0.0 {
        return Err(Error::ContourDegenerate);
    }

    let mut out = Vec::with_capacity(n);
    let mut seg = 0;
    for j in 0..n {
        let s = total * j as f64 / n as f64;
        while seg + 1 < m && cumulative[seg + 1] <= s {
            seg += 1;
        }
        let len = cumulative[seg + 1] - cumulative[seg];
        let (a, b) = (points[seg], points[(seg + 1) % m]);
        let f = if len > 0.0 { (s - cumulative[seg]) / len } else { 0.0 };
        out.push(Point::new(a.x + f * (b.x - a.x), a.y + f * (b.y - a.y)));
    }
    Ok(out)
}

/// C_n = (1/N) Σ z(t) e^{-i2πnt/N} for n = -⌊N/2⌋ ..= ⌈N/2⌉ - 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSpectrum {
    // coefficient n lives at index n.rem_euclid(N), i.e. FFT order
    coeffs: Vec<Complex64>,
}

impl ComplexSpectrum {
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn min_index(&self) -> i64 {
        -((self.coeffs.len() / 2) as i64)
    }

    pub fn max_index(&self) -> i64 {
        self.coeffs.len().div_ceil(2) as i64 - 1
    }

    pub fn coefficient(&self, n: i64) -> Complex64 {
        assert!(
            (self.min_index()..=self.max_index()).contains(&n),
            "harmonic {n} outside spectrum"
        );
        self.coeffs[n.rem_euclid(self.coeffs.len() as i64) as usize]
    }

    /// (n, C_n) pairs in ascending n.
    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        (self.min_index()..=self.max_index()).map(|n| (n, self.coefficient(n)))
    }
}

pub fn fourier_spectrum(points: &[Point]) -> ComplexSpectrum {
    let n = points.len();
    let mut buf: Vec<Complex64> = points.iter().map(|p| Complex64::new(p.x, p.y)).collect();
    if n > 0 {
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    }
    let scale = 1.0 / n as f64;
    buf.iter_mut().for_each(|c| *c *= scale);
    ComplexSpectrum { coeffs: buf }
}

/// Magnitudes F_n = |C_n| / |C_1| for n = -k..=-1, 1..=k, with C_0 dropped.
pub fn fourier_descriptor(spec: &ComplexSpectrum, k: usize) -> Result<Vec<f64>> {
    let k_i = k as i64;
    if k == 0 || -k_i < spec.min_index() || k_i > spec.max_index() {
        return Err(Error::HarmonicOutOfRange {
            requested: k,
            limit: spec.max_index().max(0) as usize,
        });
    }
    let first = spec.coefficient(1).norm();
    let scale: f64 = spec.iter().filter(|&(n, _)| n != 0).map(|(_, c)| c.norm()).sum();
    if first == 0.0 || first <= 1e-9 * scale {
        return Err(Error::DegenerateFirstHarmonic);
    }
    Ok((-k_i..=k_i)
        .filter(|&n| n != 0)
        .map(|n| spec.coefficient(n).norm() / first)
        .collect())
}

/// Inverse transform truncated to |n| <= k, evaluated at the N original
/// parameter values. With k >= N/2 - 1 the whole stored spectrum, including
/// the unpaired Nyquist term, is used so the samples are reproduced exactly.
pub fn reconstruct_contour(spec: &ComplexSpectrum, k: usize) -> Vec<Point> {
    let n = spec.len();
    let k = k as i64;
    let full = k >= spec.max_index();
    let terms: Vec<(i64, Complex64)> = spec.iter().filter(|&(h, _)| full || h.abs() <= k).collect();
    (0..n)
        .map(|t| {
            let z: Complex64 = terms
                .iter()
                .map(|&(h, c)| {
                    let phase = TAU * (h * t as i64).rem_euclid(n as i64) as f64 / n as f64;
                    c * Complex64::from_polar(1.0, phase)
                })
                .sum();
            Point::new(z.re, z.im)
        })
        .collect()
}

/// Index of the vertex farthest from the vertex centroid; ties go to the
/// vertex whose cyclic sequence of squared distances is lexicographically
/// largest, then to the lowest index. Exact on integer pixel coordinates, so
/// the choice follows the shape under quarter turns.
pub fn canonical_start(points: &[Point]) -> usize {
    let n = points.len();
    if n < 2 {
        return 0;
    }
    let xy: Vec<(i128, i128)> = points
        .iter()
        .map(|p| (p.x.round() as i128, p.y.round() as i128))
        .collect();
    let (sx, sy) = xy.iter().fold((0i128, 0i128), |(a, b), &(x, y)| (a + x, b + y));
    let m = n as i128;
    let d: Vec<i128> = xy
        .iter()
        .map(|&(x, y)| (m * x - sx).pow(2) + (m * y - sy).pow(2))
        .collect();
    let top = *d.iter().max().expect("non-empty");
    let mut best: Option<usize> = None;
    for i in (0..n).filter(|&i| d[i] == top) {
        best = match best {
            None => Some(i),
            Some(b) => {
                let later = (1..n).map(|j| d[(i + j) % n].cmp(&d[(b + j) % n])).find(|o| o.is_ne());
                if later == Some(std::cmp::Ordering::Greater) {
                    Some(i)
                } else {
                    Some(b)
                }
            }
        };
    }
    best.unwrap_or(0)
}

/// FD10: the traced contour is rolled to [`canonical_start`], resampled at
/// 256 arclength-equidistant points and transformed; harmonics ±1..=±5.
pub fn fd_descriptor(contour: &Contour) -> Result<DescriptorVector> {
    let pts = contour.points();
    let start = canonical_start(pts);
    let rolled: Vec<Point> = pts[start..].iter().chain(&pts[..start]).copied().collect();
    let resampled = contour_resample(&rolled, FD_RESAMPLE_POINTS)?;
    let values = fourier_descriptor(&fourier_spectrum(&resampled), FD_HARMONICS)?;
    DescriptorVector::new(DescriptorKind::Fd10, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle(n: usize, r: f64, cx: f64, cy: f64) -> Vec<Point> {
        (0..n)
            .map(|t| {
                let a = TAU * t as f64 / n as f64;
                Point::new(cx + r * a.cos(), cy + r * a.sin())
            })
            .collect()
    }

    fn ellipse(n: usize, a: f64, b: f64) -> Vec<Point> {
        (0..n)
            .map(|t| {
                let s = TAU * t as f64 / n as f64;
                Point::new(a * s.cos(), b * s.sin())
            })
            .collect()
    }

    #[test]
    fn resample_square_quarters() {
        let sq = [
            Point::new(0.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(2.0, 2.0),
            Point::new(0.0, 2.0),
        ];
        let r = contour_resample(&sq, 4).unwrap();
        assert_eq!(r, sq.to_vec());
        let r8 = contour_resample(&sq, 8).unwrap();
        assert_eq!(r8[1], Point::new(1.0, 0.0));
        assert_eq!(r8[7], Point::new(0.0, 1.0));
    }

    #[test]
    fn resample_equilateral_identity() {
        let poly = circle(12, 5.0, 1.0, -2.0);
        let r = contour_resample(&poly, 12).unwrap();
        for (a, b) in poly.iter().zip(&r) {
            assert!(a.dist(*b) < 1e-9);
        }
    }

    #[test]
    fn circle_spectrum_is_pure_first_harmonic() {
        let spec = fourier_spectrum(&circle(64, 3.0, 0.0, 0.0));
        for (n, c) in spec.iter() {
            if n == 1 {
                assert!((c - Complex64::new(3.0, 0.0)).norm() < 1e-9);
            } else {
                assert!(c.norm() < 1e-9, "C_{n} = {c}");
            }
        }
    }

    #[test]
    fn translation_moves_only_dc() {
        let a = fourier_spectrum(&circle(32, 2.0, 0.0, 0.0));
        let b = fourier_spectrum(&circle(32, 2.0, 5.0, -1.5));
        for ((n, ca), (_, cb)) in a.iter().zip(b.iter()) {
            let expect = if n == 0 { ca + Complex64::new(5.0, -1.5) } else { ca };
            assert!((cb - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn ellipse_coefficients() {
        let spec = fourier_spectrum(&ellipse(256, 2.0, 1.0));
        assert!((spec.coefficient(1) - Complex64::new(1.5, 0.0)).norm() < 1e-6);
        assert!((spec.coefficient(-1) - Complex64::new(0.5, 0.0)).norm() < 1e-6);
        let fd = fourier_descriptor(&spec, 5).unwrap();
        assert!((fd[4] - 1.0 / 3.0).abs() < 1e-3);
        assert_eq!(fd[5], 1.0);
    }

    #[test]
    fn circle_descriptor() {
        let fd = fourier_descriptor(&fourier_spectrum(&circle(256, 7.0, 3.0, 3.0)), 5).unwrap();
        for (i, v) in fd.iter().enumerate() {
            let expect = if i == 5 { 1.0 } else { 0.0 };
            assert!((v - expect).abs() < 1e-9);
        }
    }

    #[test]
    fn degenerate_first_harmonic() {
        // clockwise circle: all energy in C_{-1}
        let mut pts = circle(32, 2.0, 0.0, 0.0);
        pts.iter_mut().for_each(|p| p.y = -p.y);
        assert!(matches!(
            fourier_descriptor(&fourier_spectrum(&pts), 5),
            Err(Error::DegenerateFirstHarmonic)
        ));
    }

    #[test]
    fn start_shift_is_exactly_invariant() {
        let mut pts = ellipse(256, 3.0, 1.0);
        pts.iter_mut()
            .enumerate()
            .for_each(|(i, p)| p.x += 0.1 * ((i * 13 % 7) as f64));
        let a = fourier_descriptor(&fourier_spectrum(&pts), 5).unwrap();
        pts.rotate_left(37);
        let b = fourier_descriptor(&fourier_spectrum(&pts), 5).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn full_reconstruction_reproduces_points() {
        let mut pts = ellipse(64, 3.0, 1.0);
        pts.iter_mut()
            .enumerate()
            .for_each(|(i, p)| p.y += 0.2 * ((i * 5 % 3) as f64));
        let spec = fourier_spectrum(&pts);
        let back = reconstruct_contour(&spec, 31);
        let rms = (pts.iter().zip(&back).map(|(a, b)| a.dist(*b).powi(2)).sum::<f64>() / 64.0).sqrt();
        assert!(rms < 1e-6);

        let c = circle(64, 2.0, 1.0, 1.0);
        let back = reconstruct_contour(&fourier_spectrum(&c), 1);
        assert!(c.iter().zip(&back).all(|(a, b)| a.dist(*b) < 1e-6));
    }
}
