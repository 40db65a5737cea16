//! Plain SVG figures with fixed layout and number formatting.

use std::fmt::Write as _;

use super::RunOutput;
use crate::clustering::{pca_fit, pca_transform, DataMatrix};
use crate::error::{Error, Result};
use crate::mask::Point;

/// Scatter plots show at most this many particles.
pub const SCATTER_LIMIT: usize = 5000;
const MONTAGE_PER_CLUSTER: usize = 25;
const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

fn color(label: usize) -> &'static str {
    PALETTE[label % PALETTE.len()]
}

fn header(w: f64, h: f64) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.0} {h:.0}\">\n\
         <rect width=\"{w:.0}\" height=\"{h:.0}\" fill=\"white\"/>\n"
    )
}

/// Evenly strided indices, all of them when `n <= limit`.
fn stride_sample(n: usize, limit: usize) -> Vec<usize> {
    if n <= limit {
        (0..n).collect()
    } else {
        (0..limit).map(|i| i * n / limit).collect()
    }
}

fn scale(v: f64, lo: f64, hi: f64, out_lo: f64, out_hi: f64) -> f64 {
    if hi > lo {
        out_lo + (v - lo) / (hi - lo) * (out_hi - out_lo)
    } else {
        0.5 * (out_lo + out_hi)
    }
}

/// First two principal coordinates of `space` (a zero second axis for 1-D data).
fn plane(space: &DataMatrix) -> Result<Vec<(f64, f64)>> {
    let comps = 2.min(space.n_features()).min(space.n_samples().saturating_sub(1));
    if comps == 0 {
        return Ok(vec![(0.0, 0.0); space.n_samples()]);
    }
    let proj = match pca_fit(space, comps) {
        Ok(m) => pca_transform(&m, space)?,
        Err(Error::RankDeficient { .. }) => return Ok(vec![(0.0, 0.0); space.n_samples()]),
        Err(e) => return Err(e),
    };
    Ok(proj.rows().map(|r| (r[0], r.get(1).copied().unwrap_or(0.0))).collect())
}

pub(crate) fn scatter_svg(space: &DataMatrix, labels: &[usize]) -> Result<String> {
    let pts = plane(space)?;
    let idx = stride_sample(pts.len(), SCATTER_LIMIT);
    let (w, h, m) = (640.0, 640.0, 40.0);
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &i in &idx {
        x0 = x0.min(pts[i].0);
        x1 = x1.max(pts[i].0);
        y0 = y0.min(pts[i].1);
        y1 = y1.max(pts[i].1);
    }
    let mut s = header(w, h);
    let _ = writeln!(
        s,
        "<text x=\"{m:.0}\" y=\"24\" font-size=\"14\">PC1 vs PC2 by cluster</text>"
    );
    s.push_str("<g id=\"points\">\n");
    for &i in &idx {
        let cx = scale(pts[i].0, x0, x1, m, w - m);
        let cy = scale(pts[i].1, y0, y1, h - m, m);
        let _ = writeln!(
            s,
            "<circle cx=\"{cx:.2}\" cy=\"{cy:.2}\" r=\"2\" fill=\"{}\"/>",
            color(labels[i])
        );
    }
    s.push_str("</g>\n</svg>\n");
    Ok(s)
}

/// Linear-interpolated quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

pub(crate) fn boxplot_svg(metrics: [(&str, Vec<f64>); 2], labels: &[usize], k: usize) -> String {
    let (panel_w, h, m) = (80.0 * k as f64 + 80.0, 360.0, 40.0);
    let w = 2.0 * panel_w;
    let mut s = header(w, h);
    for (p, (name, values)) in metrics.iter().enumerate() {
        let left = p as f64 * panel_w;
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min).min(0.0);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max).max(1.0);
        let y = |v: f64| scale(v, lo, hi, h - m, m);
        let _ = writeln!(s, "<text x=\"{:.2}\" y=\"24\" font-size=\"14\">{name}</text>", left + m);
        for c in 0..k {
            let mut v: Vec<f64> = values
                .iter()
                .zip(labels)
                .filter(|(_, &l)| l == c)
                .map(|(&v, _)| v)
                .collect();
            v.sort_by(f64::total_cmp);
            let [q0, q1, q2, q3, q4] = [0.0, 0.25, 0.5, 0.75, 1.0].map(|q| quantile(&v, q));
            let cx = left + m + 40.0 + 80.0 * c as f64;
            let _ = writeln!(s, "<g class=\"box\" data-metric=\"{name}\" data-cluster=\"{c}\">");
            let _ = writeln!(
                s,
                "<line x1=\"{cx:.2}\" y1=\"{:.2}\" x2=\"{cx:.2}\" y2=\"{:.2}\" stroke=\"black\"/>",
                y(q0),
                y(q4)
            );
            let _ = writeln!(
                s,
                "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"40\" height=\"{:.2}\" fill=\"{}\" stroke=\"black\"/>",
                cx - 20.0,
                y(q3),
                y(q1) - y(q3),
                color(c)
            );
            let _ = writeln!(
                s,
                "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"black\" stroke-width=\"2\"/>",
                cx - 20.0,
                y(q2),
                cx + 20.0,
                y(q2)
            );
            let _ = writeln!(
                s,
                "<text x=\"{cx:.2}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"middle\">{c}</text>",
                h - 12.0
            );
            s.push_str("</g>\n");
        }
    }
    s.push_str("</svg>\n");
    s
}

/// Up to 25 members per cluster nearest the cluster mean in `space`.
pub(crate) fn representatives(space: &DataMatrix, labels: &[usize], k: usize) -> Vec<Vec<usize>> {
    (0..k)
        .map(|c| {
            let members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
            if members.is_empty() {
                return members;
            }
            let mut mean = vec![0.0; space.n_features()];
            for &i in &members {
                mean.iter_mut().zip(space.row(i)).for_each(|(m, v)| *m += v);
            }
            mean.iter_mut().for_each(|m| *m /= members.len() as f64);
            let mut scored: Vec<(f64, usize)> = members
                .iter()
                .map(|&i| (space.row(i).iter().zip(&mean).map(|(a, b)| (a - b) * (a - b)).sum(), i))
                .collect();
            scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            scored.into_iter().take(MONTAGE_PER_CLUSTER).map(|(_, i)| i).collect()
        })
        .collect()
}

pub(crate) fn montage_svg(contours: &[Vec<Point>], groups: &[Vec<usize>]) -> String {
    let (cell, cols) = (48.0, 5usize);
    let block = cell * cols as f64;
    let gap = 24.0;
    let w = groups.len() as f64 * (block + gap) + gap;
    let h = block + 2.0 * gap;
    let mut s = header(w, h);
    for (c, members) in groups.iter().enumerate() {
        let bx = gap + c as f64 * (block + gap);
        let _ = writeln!(s, "<g class=\"cluster\" data-cluster=\"{c}\">");
        let _ = writeln!(s, "<text x=\"{bx:.2}\" y=\"16\" font-size=\"12\">cluster {c}</text>");
        for (slot, &i) in members.iter().enumerate() {
            let pts = &contours[i];
            if pts.is_empty() {
                continue;
            }
            let ox = bx + (slot % cols) as f64 * cell;
            let oy = gap + (slot / cols) as f64 * cell;
            let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
            for p in pts {
                x0 = x0.min(p.x);
                x1 = x1.max(p.x);
                y0 = y0.min(p.y);
                y1 = y1.max(p.y);
            }
            let span = (x1 - x0).max(y1 - y0).max(1.0);
            let f = (cell - 6.0) / span;
            let (mx, my) = (0.5 * (x0 + x1), 0.5 * (y0 + y1));
            let mut d = String::new();
            for (j, p) in pts.iter().enumerate() {
                let _ = write!(
                    d,
                    "{}{:.2} {:.2} ",
                    if j == 0 { "M" } else { "L" },
                    ox + 0.5 * cell + (p.x - mx) * f,
                    oy + 0.5 * cell + (p.y - my) * f
                );
            }
            d.push('Z');
            let _ = writeln!(
                s,
                "<path d=\"{d}\" fill=\"{}\" fill-opacity=\"0.4\" stroke=\"black\" stroke-width=\"0.5\"/>",
                color(c)
            );
        }
        s.push_str("</g>\n");
    }
    s.push_str("</svg>\n");
    s
}

/// `scatter.svg`, `boxplots.svg` and `montage.svg` for a run with at least
/// two clusters.
pub fn emit_figures(run: &RunOutput) -> Result<Vec<(String, String)>> {
    let k = run.report.k;
    if k < 2 {
        return Err(Error::InvalidArgument(format!(
            "figures need at least 2 clusters, got {k}"
        )));
    }
    let labels = run.report.labels();
    let circ = run.report.particles.iter().map(|p| p.circularity).collect();
    let ar = run.report.particles.iter().map(|p| p.aspect_ratio).collect();
    let groups = representatives(&run.space, &labels, k);
    Ok(vec![
        ("scatter.svg".into(), scatter_svg(&run.space, &labels)?),
        (
            "boxplots.svg".into(),
            boxplot_svg([("circularity", circ), ("aspect_ratio", ar)], &labels, k),
        ),
        ("montage.svg".into(), montage_svg(&run.contours, &groups)),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles_interpolate() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert_eq!(quantile(&v, 1.0), 4.0);
        assert!((quantile(&v, 0.5) - 2.5).abs() < 1e-12);
    }

    #[test]
    fn stride_sample_caps() {
        assert_eq!(stride_sample(3, 5), vec![0, 1, 2]);
        let s = stride_sample(12_000, SCATTER_LIMIT);
        assert_eq!(s.len(), SCATTER_LIMIT);
        assert!(s.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn two_cluster_boxplot_has_four_groups() {
        let svg = boxplot_svg(
            [
                ("circularity", vec![0.9, 0.8, 0.5]),
                ("aspect_ratio", vec![1.0, 0.9, 0.3]),
            ],
            &[0, 0, 1],
            2,
        );
        assert_eq!(svg.matches("<g class=\"box\"").count(), 4);
    }

    #[test]
    fn representatives_are_nearest_first() {
        let x = DataMatrix::from_column(&[0.0, 1.0, 2.0, 10.0, 30.0]).unwrap();
        let g = representatives(&x, &[0, 0, 0, 1, 1], 2);
        assert_eq!(g[0], vec![1, 0, 2]);
        assert_eq!(g[1], vec![3, 4]);
    }
}
