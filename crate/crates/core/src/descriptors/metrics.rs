use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::mask::{BinaryMask, Contour, Point};

/// Classical morphometrics used as external cluster proxies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeMetrics {
    /// Foreground pixel count.
    pub area: f64,
    /// Boundary length in pixels.
    pub perimeter: f64,
    /// 4π·area/perimeter², clamped to 1.
    pub circularity: f64,
    /// min Feret / max Feret.
    pub aspect_ratio: f64,
    pub min_feret: f64,
    pub max_feret: f64,
}

/// The four corners of every boundary pixel, i.e. the outline of the pixel
/// squares rather than of their centres.
pub fn pixel_corners(points: &[Point]) -> Vec<Point> {
    points
        .iter()
        .flat_map(|p| {
            [(-0.5, -0.5), (0.5, -0.5), (0.5, 0.5), (-0.5, 0.5)].map(|(dx, dy)| Point::new(p.x + dx, p.y + dy))
        })
        .collect()
}

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Andrew's monotone chain; counterclockwise in (x, y), no collinear points.
fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<Point> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Point>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

/// (min, max) Feret diameters of a point set.
///
/// The maximum is the hull diameter; the minimum is the smallest hull width
/// measured perpendicular to a hull edge.
pub fn feret_diameters(points: &[Point]) -> (f64, f64) {
    let hull = convex_hull(points);
    let h = hull.len();
    let mut max_d = 0.0f64;
    for i in 0..h {
        for j in i + 1..h {
            max_d = max_d.max(hull[i].dist(hull[j]));
        }
    }
    if h < 3 {
        return (0.0, max_d);
    }
    let mut min_w = f64::INFINITY;
    for i in 0..h {
        let (a, b) = (hull[i], hull[(i + 1) % h]);
        let len = a.dist(b);
        let width = hull.iter().map(|&p| cross(a, b, p).abs() / len).fold(0.0, f64::max);
        min_w = min_w.min(width);
    }
    (min_w, max_d)
}

/// Boundary length with per-step weights for axial and diagonal chain moves
/// and a corner correction (Vossepoel & Smeulders); unbiased on digital
/// circles and straight edges where the raw 8-chain length overshoots.
fn chain_perimeter(points: &[Point]) -> f64 {
    let n = points.len();
    let (mut even, mut odd, mut corners) = (0usize, 0usize, 0usize);
    let mut prev: Option<(i64, i64)> = None;
    for i in 0..=n {
        let (a, b) = (points[i % n], points[(i + 1) % n]);
        let step = ((b.x - a.x).round() as i64, (b.y - a.y).round() as i64);
        if i < n {
            if step.0 != 0 && step.1 != 0 {
                odd += 1;
            } else {
                even += 1;
            }
        }
        if let Some(p) = prev {
            if p != step {
                corners += 1;
            }
        }
        prev = Some(step);
    }
    0.980 * even as f64 + 1.406 * odd as f64 - 0.091 * corners as f64
}

pub fn shape_metrics(mask: &BinaryMask, contour: &Contour) -> ShapeMetrics {
    let area = mask.area() as f64;
    let perimeter = chain_perimeter(contour.points());
    let circularity = (4.0 * PI * area / (perimeter * perimeter)).min(1.0);
    let (min_feret, max_feret) = feret_diameters(&pixel_corners(contour.points()));
    ShapeMetrics {
        area,
        perimeter,
        circularity,
        aspect_ratio: min_feret / max_feret,
        min_feret,
        max_feret,
    }
}
