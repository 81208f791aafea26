//! DD plots: per-observation `(D, D_M)` pairs, written as CSV or as a
//! standalone SVG scatter with the `D = D_M` reference line.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::distances::{matnorm_distances, mvn_distances, DistancePair};
use crate::distributions::MatrixDataset;
use crate::error::{Error, Result};
use crate::kstest::NormalityTest;
use crate::math;

#[derive(Debug, Clone, PartialEq)]
pub struct DdPlotData {
    pub points: Vec<DistancePair>,
    /// Optional class label per point, used for colouring.
    pub labels: Option<Vec<u32>>,
    pub rows: usize,
    pub cols: usize,
    pub title: String,
}

impl DdPlotData {
    pub fn new(points: Vec<DistancePair>, rows: usize, cols: usize, title: impl Into<String>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptySample);
        }
        if points
            .iter()
            .any(|p| !(p.d_mvn.is_finite() && p.d_mat.is_finite() && p.d_mvn >= 0.0 && p.d_mat >= 0.0))
        {
            return Err(Error::DomainError("distances must be finite and non-negative"));
        }
        Ok(Self { points, labels: None, rows, cols, title: title.into() })
    }

    pub fn from_test(test: &NormalityTest, rows: usize, cols: usize, title: impl Into<String>) -> Result<Self> {
        Self::new(test.pairs(), rows, cols, title)
    }

    pub fn with_labels(mut self, labels: Vec<u32>) -> Result<Self> {
        if labels.len() != self.points.len() {
            return Err(Error::ShapeMismatch {
                expected: (self.points.len(), 1),
                found: (labels.len(), 1),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Smallest and largest coordinate over both axes.
    pub fn coordinate_range(&self) -> (f64, f64) {
        self.points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p.d_mvn).min(p.d_mat), hi.max(p.d_mvn).max(p.d_mat))
        })
    }

    /// Sample correlation of `D` and `D_M`.
    pub fn correlation(&self) -> f64 {
        let n = self.points.len() as f64;
        let mx = self.points.iter().map(|p| p.d_mvn).sum::<f64>() / n;
        let my = self.points.iter().map(|p| p.d_mat).sum::<f64>() / n;
        let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
        for p in &self.points {
            let (dx, dy) = (p.d_mvn - mx, p.d_mat - my);
            sxy += dx * dy;
            sxx += dx * dx;
            syy += dy * dy;
        }
        sxy / math::sqrt(sxx * syy)
    }
}

/// Pairs `mvn_distances[i]` with `matnorm_distances[i]` in observation order.
pub fn dd_points(data: &MatrixDataset, flip_flop_tol: f64, title: &str) -> Result<DdPlotData> {
    let d = mvn_distances(data)?;
    let dm = matnorm_distances(data, flip_flop_tol)?;
    let points = d
        .into_iter()
        .zip(dm)
        .map(|(d_mvn, d_mat)| DistancePair { d_mvn, d_mat })
        .collect();
    DdPlotData::new(points, data.rows(), data.cols(), title)
}

/// CSV with header `index,d_mvn,d_mat` (plus `,label` when labelled). Values
/// use 17 significant digits and parse back exactly.
pub fn render_csv(d: &DdPlotData) -> String {
    let mut out = String::from("index,d_mvn,d_mat");
    if d.labels.is_some() {
        out.push_str(",label");
    }
    out.push('\n');
    for (i, p) in d.points.iter().enumerate() {
        let _ = write!(out, "{},{:.16e},{:.16e}", i, p.d_mvn, p.d_mat);
        if let Some(labels) = &d.labels {
            let _ = write!(out, ",{}", labels[i]);
        }
        out.push('\n');
    }
    out
}

const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 60.0;
const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22",
    "#17becf",
];

fn nice_step(raw: f64) -> f64 {
    let mag = math::powi(10.0, math::floor(math::log10(raw)) as i32);
    let norm = raw / mag;
    let k = if norm <= 1.0 {
        1.0
    } else if norm <= 2.0 {
        2.0
    } else if norm <= 5.0 {
        5.0
    } else {
        10.0
    };
    k * mag
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Square plotting region and the shared data domain of both axes.
struct Frame {
    left: f64,
    top: f64,
    side: f64,
    lo: f64,
    hi: f64,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        self.left + (v - self.lo) / (self.hi - self.lo) * self.side
    }

    fn y(&self, v: f64) -> f64 {
        self.top + self.side - (v - self.lo) / (self.hi - self.lo) * self.side
    }
}

/// Standalone SVG 1.1 scatter of `(D, D_M)` with equal axis scales and a red
/// reference segment from `(m, m)` to `(M, M)`, where `m` and `M` are the
/// smallest and largest plotted coordinates.
pub fn render_svg(d: &DdPlotData, width: u32, height: u32) -> Result<String> {
    if width < 100 || height < 100 {
        return Err(Error::DomainError("width and height must be at least 100 px"));
    }
    if d.is_empty() {
        return Err(Error::EmptySample);
    }
    let (w, h) = (width as f64, height as f64);
    let side = (w - MARGIN_LEFT - MARGIN_RIGHT).min(h - MARGIN_TOP - MARGIN_BOTTOM).max(10.0);
    let (m_lo, m_hi) = d.coordinate_range();
    let span = if m_hi > m_lo { m_hi - m_lo } else { 1.0 };
    let frame = Frame {
        left: MARGIN_LEFT,
        top: MARGIN_TOP,
        side,
        lo: m_lo - 0.05 * span,
        hi: m_lo + 1.05 * span,
    };

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8" standalone="no"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="24" text-anchor="middle" font-family="sans-serif" font-size="14">{} (N = {}, {}×{})</text>"#,
        frame.left + side / 2.0,
        escape(&d.title),
        d.len(),
        d.rows,
        d.cols
    );
    let _ = writeln!(
        s,
        r#"<rect class="plot-area" x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="none" stroke="black"/>"#,
        frame.left, frame.top, side, side
    );

    // ticks, shared by both axes
    let step = nice_step((frame.hi - frame.lo) / 5.0);
    let decimals = if step >= 1.0 { 0 } else { (-math::floor(math::log10(step))) as usize };
    let mut t = math::ceil(frame.lo / step) * step;
    let _ = writeln!(s, r#"<g class="ticks" font-family="sans-serif" font-size="11" stroke="black">"#);
    while t <= frame.hi + 1e-9 * step {
        let (x, y) = (frame.x(t), frame.y(t));
        let base = frame.top + side;
        let _ = writeln!(s, r#"<line x1="{x:.3}" y1="{base:.3}" x2="{x:.3}" y2="{:.3}"/>"#, base + 5.0);
        let _ = writeln!(
            s,
            r#"<text x="{x:.3}" y="{:.3}" text-anchor="middle" stroke="none">{t:.decimals$}</text>"#,
            base + 18.0
        );
        let _ = writeln!(s, r#"<line x1="{:.3}" y1="{y:.3}" x2="{:.3}" y2="{y:.3}"/>"#, frame.left - 5.0, frame.left);
        let _ = writeln!(
            s,
            r#"<text x="{:.3}" y="{:.3}" text-anchor="end" stroke="none">{t:.decimals$}</text>"#,
            frame.left - 8.0,
            y + 4.0
        );
        t += step;
    }
    let _ = writeln!(s, "</g>");

    let _ = writeln!(
        s,
        r#"<text class="x-title" x="{:.2}" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="13">multivariate MSD</text>"#,
        frame.left + side / 2.0,
        frame.top + side + 45.0
    );
    let (yx, yy) = (22.0, frame.top + side / 2.0);
    let _ = writeln!(
        s,
        r#"<text class="y-title" x="{yx:.2}" y="{yy:.2}" text-anchor="middle" font-family="sans-serif" font-size="13" transform="rotate(-90 {yx:.2} {yy:.2})">matrix variate MSD</text>"#
    );

    let _ = writeln!(s, r#"<g class="points" fill-opacity="0.6">"#);
    for (i, p) in d.points.iter().enumerate() {
        let colour = match &d.labels {
            Some(l) => PALETTE[l[i] as usize % PALETTE.len()],
            None => PALETTE[0],
        };
        let _ = writeln!(
            s,
            r#"<circle class="point" cx="{:.3}" cy="{:.3}" r="2.5" fill="{colour}"/>"#,
            frame.x(p.d_mvn),
            frame.y(p.d_mat)
        );
    }
    let _ = writeln!(s, "</g>");

    let _ = writeln!(
        s,
        r#"<line class="reference" x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="red" stroke-width="1.5"/>"#,
        frame.x(m_lo),
        frame.y(m_lo),
        frame.x(m_hi),
        frame.y(m_hi)
    );
    let _ = writeln!(s, "</svg>");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimation::DEFAULT_TOL;
    use crate::rng::Seed;
    use crate::simulation::{gen_matnorm_dataset, gen_nonkron_dataset};

    fn small_plot() -> DdPlotData {
        let pts = [(1.0, 1.2), (2.5, 2.1), (0.3, 0.2), (4.0, 4.4)]
            .iter()
            .map(|&(d_mvn, d_mat)| DistancePair { d_mvn, d_mat })
            .collect();
        DdPlotData::new(pts, 2, 2, "demo <a&b>").unwrap()
    }

    fn parse_csv(text: &str) -> Vec<(f64, f64)> {
        text.lines()
            .skip(1)
            .map(|l| {
                let f: Vec<&str> = l.split(',').collect();
                (f[1].parse().unwrap(), f[2].parse().unwrap())
            })
            .collect()
    }

    #[test]
    fn csv_single_point() {
        let d = DdPlotData::new(alloc::vec![DistancePair { d_mvn: 0.0, d_mat: 0.0 }], 1, 1, "x").unwrap();
        let csv = render_csv(&d);
        assert_eq!(csv.lines().count(), 2);
        assert_eq!(csv.lines().next(), Some("index,d_mvn,d_mat"));
    }

    #[test]
    fn csv_roundtrip_exact() {
        let (data, _) = gen_matnorm_dataset(50, 2, 2, Seed(1)).unwrap();
        let d = dd_points(&data, DEFAULT_TOL, "sim").unwrap();
        let back = parse_csv(&render_csv(&d));
        for (p, q) in d.points.iter().zip(&back) {
            assert_eq!((p.d_mvn, p.d_mat), *q);
        }
        let labelled = d.clone().with_labels(alloc::vec![3; 50]).unwrap();
        let csv = render_csv(&labelled);
        assert!(csv.starts_with("index,d_mvn,d_mat,label\n"));
        assert!(csv.lines().nth(1).unwrap().ends_with(",3"));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(DdPlotData::new(Vec::new(), 1, 1, "").is_err());
        let bad = alloc::vec![DistancePair { d_mvn: -1.0, d_mat: 0.0 }];
        assert!(DdPlotData::new(bad, 1, 1, "").is_err());
        assert!(render_svg(&small_plot(), 99, 400).is_err());
        assert!(small_plot().with_labels(alloc::vec![0]).is_err());
    }

    #[test]
    fn svg_well_formed_with_all_markers() {
        let d = small_plot();
        let svg = render_svg(&d, 480, 520).unwrap();
        let doc = roxmltree::Document::parse(&svg).unwrap();
        let circles = doc.descendants().filter(|n| n.has_tag_name("circle")).count();
        assert_eq!(circles, d.len());
        let text: String = doc.descendants().filter_map(|n| n.text()).collect();
        assert!(text.contains("multivariate MSD"));
        assert!(text.contains("matrix variate MSD"));
        assert!(text.contains("demo <a&b>"));
        assert_eq!(svg, render_svg(&d, 480, 520).unwrap());
    }

    #[test]
    fn reference_line_spans_data_range() {
        let d = small_plot();
        let svg = render_svg(&d, 600, 400).unwrap();
        let doc = roxmltree::Document::parse(&svg).unwrap();
        let attr = |n: roxmltree::Node, k: &str| -> f64 { n.attribute(k).unwrap().parse().unwrap() };
        let area = doc.descendants().find(|n| n.attribute("class") == Some("plot-area")).unwrap();
        let (ax, ay, aw, ah) = (attr(area, "x"), attr(area, "y"), attr(area, "width"), attr(area, "height"));
        assert!((aw - ah).abs() < 1e-9, "axes must share a scale");
        let line = doc.descendants().find(|n| n.attribute("class") == Some("reference")).unwrap();

        // independent transform: data domain is the range padded by 5% each side
        let (lo, hi) = (0.2, 4.4);
        let (d0, d1) = (lo - 0.05 * (hi - lo), hi + 0.05 * (hi - lo));
        let sx = |v: f64| ax + (v - d0) / (d1 - d0) * aw;
        let sy = |v: f64| ay + ah - (v - d0) / (d1 - d0) * ah;
        assert!((attr(line, "x1") - sx(lo)).abs() <= 0.5);
        assert!((attr(line, "y1") - sy(lo)).abs() <= 0.5);
        assert!((attr(line, "x2") - sx(hi)).abs() <= 0.5);
        assert!((attr(line, "y2") - sy(hi)).abs() <= 0.5);
    }

    #[test]
    fn kronecker_points_hug_the_diagonal() {
        let (data, _) = gen_matnorm_dataset(100, 2, 2, Seed(3)).unwrap();
        let d = dd_points(&data, DEFAULT_TOL, "kron").unwrap();
        assert_eq!(d.len(), 100);
        assert!(d.correlation() >= 0.95, "corr {}", d.correlation());
    }

    #[test]
    fn column_vectors_lie_on_scaled_line() {
        let (data, _) = gen_nonkron_dataset(40, 3, 1, Seed(4)).unwrap();
        let d = dd_points(&data, DEFAULT_TOL, "c=1").unwrap();
        let n = 40.0;
        for p in &d.points {
            assert!((p.d_mat - p.d_mvn * n / (n - 1.0)).abs() <= 1e-8 * (1.0 + p.d_mat));
        }
    }

    #[test]
    fn nonkronecker_points_scatter_more() {
        let seed = Seed(12);
        let (kron_data, _) = gen_matnorm_dataset(1000, 4, 4, seed).unwrap();
        let (flat_data, _) = gen_nonkron_dataset(1000, 4, 4, seed).unwrap();
        let a = dd_points(&kron_data, DEFAULT_TOL, "kron").unwrap().correlation();
        let b = dd_points(&flat_data, DEFAULT_TOL, "flat").unwrap().correlation();
        assert!(b < a, "{b} vs {a}");
    }
}
