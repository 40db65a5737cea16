use std::f64::consts::PI;

use rustfft::num_complex::Complex64;

use super::{DescriptorKind, DescriptorVector};
use crate::error::{Error, Result};
use crate::mask::{centroid_of, BinaryMask};

pub const ZM_MAX_ORDER: usize = 5;

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Coefficients of R_n^{|m|}(r) as (power, weight) pairs.
fn radial_terms(n: usize, m: usize) -> Vec<(i32, f64)> {
    (0..=(n - m) / 2)
        .map(|s| {
            let sign = if s % 2 == 0 { 1.0 } else { -1.0 };
            let w = sign * factorial(n - s) / (factorial(s) * factorial((n + m) / 2 - s) * factorial((n - m) / 2 - s));
            ((n - 2 * s) as i32, w)
        })
        .collect()
}

fn check_index(n: usize, m: i64) -> Result<usize> {
    let am = m.unsigned_abs() as usize;
    if am > n || !(n - am).is_multiple_of(2) {
        return Err(Error::InvalidZernikeIndex { n, m });
    }
    Ok(am)
}

/// Zernike radial polynomial R_n^{|m|}(r).
pub fn zernike_radial(n: usize, m: i64, r: f64) -> Result<f64> {
    let am = check_index(n, m)?;
    Ok(radial_terms(n, am).iter().map(|&(p, w)| w * r.powi(p)).sum())
}

/// Valid (n, m) with m >= 0 and n <= n_max, ordered by (n, m).
pub fn zernike_indices(n_max: usize) -> Vec<(usize, usize)> {
    (0..=n_max)
        .flat_map(|n| (n % 2..=n).step_by(2).map(move |m| (n, m)))
        .collect()
}

/// |A_n^m| over [`zernike_indices`]`(n_max)`.
///
/// Foreground pixels are centred on the mask centroid and scaled by the
/// largest centroid-to-pixel distance, so every pixel lands in the unit disk
/// and carries area (1/ρ_max)².
pub fn zernike_moments(mask: &BinaryMask, n_max: usize) -> Vec<f64> {
    let c = centroid_of(mask);
    let rho = mask
        .foreground()
        .map(|(x, y)| (x as f64 - c.x).hypot(y as f64 - c.y))
        .fold(0.0, f64::max);
    let indices = zernike_indices(n_max);
    let terms: Vec<Vec<(i32, f64)>> = indices.iter().map(|&(n, m)| radial_terms(n, m)).collect();
    let mut sums = vec![Complex64::new(0.0, 0.0); indices.len()];
    if rho == 0.0 {
        // single pixel: only the constant moment survives
        sums[0] = Complex64::new(1.0, 0.0);
    } else {
        let mut rpow = vec![0.0; n_max + 1];
        let mut phase = vec![Complex64::new(1.0, 0.0); n_max + 1];
        for (x, y) in mask.foreground() {
            let u = (x as f64 - c.x) / rho;
            let v = (y as f64 - c.y) / rho;
            let r = u.hypot(v);
            rpow[0] = 1.0;
            for p in 1..=n_max {
                rpow[p] = rpow[p - 1] * r;
            }
            // e^{-imθ}
            let unit = if r > 0.0 {
                Complex64::new(u / r, -v / r)
            } else {
                Complex64::new(1.0, 0.0)
            };
            for m in 1..=n_max {
                phase[m] = phase[m - 1] * unit;
            }
            for (k, &(_, m)) in indices.iter().enumerate() {
                let radial: f64 = terms[k].iter().map(|&(p, w)| w * rpow[p as usize]).sum();
                sums[k] += phase[m] * radial;
            }
        }
    }
    let area = if rho == 0.0 { PI } else { 1.0 / (rho * rho) };
    indices
        .iter()
        .zip(&sums)
        .map(|(&(n, _), s)| (n as f64 + 1.0) / PI * area * s.norm())
        .collect()
}

/// ZM12: moment magnitudes up to order 5.
pub fn zm_descriptor(mask: &BinaryMask) -> Result<DescriptorVector> {
    DescriptorVector::new(DescriptorKind::Zm12, zernike_moments(mask, ZM_MAX_ORDER))
}

/// Discrete ⟨V_a, V_b⟩ = Σ V_a V̄_b ΔA over a `grid`×`grid` pixel raster of
/// [-1, 1]², restricted to pixel centres inside the unit disk.
pub fn basis_inner_product(grid: usize, a: (usize, i64), b: (usize, i64)) -> Result<Complex64> {
    let ma = check_index(a.0, a.1)?;
    let mb = check_index(b.0, b.1)?;
    let (ta, tb) = (radial_terms(a.0, ma), radial_terms(b.0, mb));
    let h = 2.0 / grid as f64;
    let mut sum = Complex64::new(0.0, 0.0);
    for j in 0..grid {
        let y = -1.0 + h * (j as f64 + 0.5);
        for i in 0..grid {
            let x = -1.0 + h * (i as f64 + 0.5);
            let r = x.hypot(y);
            if r > 1.0 {
                continue;
            }
            let theta = y.atan2(x);
            let ra: f64 = ta.iter().map(|&(p, w)| w * r.powi(p)).sum();
            let rb: f64 = tb.iter().map(|&(p, w)| w * r.powi(p)).sum();
            sum += Complex64::from_polar(ra * rb, (a.1 - b.1) as f64 * theta);
        }
    }
    Ok(sum * h * h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radial_examples() {
        assert_eq!(zernike_radial(0, 0, 0.37).unwrap(), 1.0);
        assert!((zernike_radial(2, 0, 0.5).unwrap() + 0.5).abs() < 1e-15);
        assert!((zernike_radial(4, 2, 0.3).unwrap() - (4.0 * 0.3f64.powi(4) - 3.0 * 0.09)).abs() < 1e-12);
    }

    #[test]
    fn radial_is_one_at_rim() {
        for n in 0..=8usize {
            for m in (n % 2..=n).step_by(2) {
                let v = zernike_radial(n, m as i64, 1.0).unwrap();
                assert!((v - 1.0).abs() < 1e-12, "R_{n}^{m}(1) = {v}");
                let neg = zernike_radial(n, -(m as i64), 1.0).unwrap();
                assert_eq!(v, neg);
            }
        }
    }

    #[test]
    fn invalid_indices() {
        assert!(zernike_radial(3, 2, 0.5).is_err());
        assert!(zernike_radial(2, 4, 0.5).is_err());
    }

    #[test]
    fn twelve_indices_to_order_five() {
        assert_eq!(
            zernike_indices(5),
            vec![
                (0, 0),
                (1, 1),
                (2, 0),
                (2, 2),
                (3, 1),
                (3, 3),
                (4, 0),
                (4, 2),
                (4, 4),
                (5, 1),
                (5, 3),
                (5, 5)
            ]
        );
    }

    #[test]
    fn disk_moments() {
        let size = 160;
        let c = (size as f64 - 1.0) / 2.0;
        let m = BinaryMask::from_fn(size, size, |x, y| (x as f64 - c).hypot(y as f64 - c) <= 70.0).unwrap();
        let zm = zernike_moments(&m, 5);
        assert!((zm[0] - 1.0).abs() < 0.02, "{}", zm[0]);
        assert!(zm[1..].iter().all(|&v| v < 0.05), "{zm:?}");
    }

    #[test]
    fn quarter_turn_invariance() {
        let m = BinaryMask::from_fn(60, 50, |x, y| {
            let (u, v) = (x as f64 - 25.0, y as f64 - 22.0);
            u * u / 400.0 + v * v / 100.0 <= 1.0 || (u - 15.0).hypot(v + 8.0) < 6.0
        })
        .unwrap();
        let a = zernike_moments(&m, 5);
        let b = zernike_moments(&m.rotate90(), 5);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-9);
        }
    }
}
