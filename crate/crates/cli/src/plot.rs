//! PNG rendering. Text needs a TrueType font from the system; without one
//! the plots are drawn without captions, labels or tick marks.

use std::path::Path;
use std::sync::OnceLock;

use chialvo_core::Regime;
use plotters::coord::Shift;
use plotters::prelude::*;

const FONT_CANDIDATES: &[&str] = &[
    "/usr/share/fonts/truetype/dejavu/DejaVuSans.ttf",
    "/usr/share/fonts/dejavu/DejaVuSans.ttf",
    "/usr/share/fonts/TTF/DejaVuSans.ttf",
    "/usr/share/fonts/truetype/liberation/LiberationSans-Regular.ttf",
    "/Library/Fonts/Arial.ttf",
    "C:\\Windows\\Fonts\\arial.ttf",
];

fn fonts() -> bool {
    static LOADED: OnceLock<bool> = OnceLock::new();
    *LOADED.get_or_init(|| {
        FONT_CANDIDATES.iter().any(|p| {
            std::fs::read(p).is_ok_and(|bytes| {
                let bytes: &'static [u8] = Box::leak(bytes.into_boxed_slice());
                plotters::style::register_font("sans-serif", FontStyle::Normal, bytes).is_ok()
            })
        })
    })
}

const SIZE: (u32, u32) = (800, 600);

pub fn regime_color(r: Regime) -> RGBColor {
    match r {
        Regime::Solitary => RED,
        Regime::Intermediate => GREEN,
        Regime::Coherent => BLUE,
        Regime::OutOfRange => BLACK,
        Regime::Undefined => RGBColor(150, 150, 150),
    }
}

pub struct Labels<'a> {
    pub title: &'a str,
    pub x: &'a str,
    pub y: &'a str,
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// About four significant digits without trailing zeros.
fn tick(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let decimals = (3 - v.abs().log10().floor() as i32).clamp(0, 10) as usize;
    let s = format!("{v:.decimals$}");
    let s = if s.contains('.') { s.trim_end_matches('0').trim_end_matches('.') } else { &s };
    if s == "-0" { "0".into() } else { s.into() }
}

fn padded(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.5 * lo.abs().max(1e-3) };
    (lo - pad, hi + pad)
}

type Chart<'a, 'b> = ChartContext<'a, BitMapBackend<'b>, Cartesian2d<plotters::coord::types::RangedCoordf64, plotters::coord::types::RangedCoordf64>>;

fn chart<'a, 'b>(area: &'a DrawingArea<BitMapBackend<'b>, Shift>, labels: &Labels, x: (f64, f64), y: (f64, f64)) -> Result<Chart<'a, 'b>, String> {
    let text = fonts();
    let mut builder = ChartBuilder::on(area);
    builder.margin(15);
    if text {
        builder
            .caption(labels.title, ("sans-serif", 22))
            .x_label_area_size(45)
            .y_label_area_size(70);
    }
    let mut c = builder.build_cartesian_2d(x.0..x.1, y.0..y.1).map_err(err)?;
    if text {
        c.configure_mesh()
            .disable_mesh()
            .label_style(("sans-serif", 14))
            .axis_desc_style(("sans-serif", 16))
            .x_desc(labels.x)
            .y_desc(labels.y)
            .x_labels(6)
            .y_labels(6)
            .x_label_formatter(&|v| tick(*v))
            .y_label_formatter(&|v| tick(*v))
            .draw()
            .map_err(err)?;
    }
    Ok(c)
}

/// Points with individual colors.
pub fn scatter(path: &Path, labels: &Labels, points: &[(f64, f64, RGBColor)], radius: u32) -> Result<(), String> {
    let root = BitMapBackend::new(path, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(err)?;
    let x = padded(points.iter().map(|p| p.0));
    let y = padded(points.iter().map(|p| p.1));
    let mut c = chart(&root, labels, x, y)?;
    c.draw_series(
        points
            .iter()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .map(|&(a, b, col)| Circle::new((a, b), radius, col.filled())),
    )
    .map_err(err)?;
    root.present().map_err(err)
}

/// Polylines, one per series.
pub fn lines(path: &Path, labels: &Labels, series: &[(Vec<(f64, f64)>, RGBColor)]) -> Result<(), String> {
    let root = BitMapBackend::new(path, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(err)?;
    let x = padded(series.iter().flat_map(|s| s.0.iter().map(|p| p.0)));
    let y = padded(series.iter().flat_map(|s| s.0.iter().map(|p| p.1)));
    let mut c = chart(&root, labels, x, y)?;
    for (pts, col) in series {
        c.draw_series(LineSeries::new(pts.iter().copied(), col)).map_err(err)?;
    }
    root.present().map_err(err)
}

/// Piecewise-linear approximation of the viridis colormap.
fn colormap(t: f64) -> RGBColor {
    const STOPS: [(u8, u8, u8); 5] = [(68, 1, 84), (59, 82, 139), (33, 145, 140), (94, 201, 98), (253, 231, 37)];
    let t = t.clamp(0.0, 1.0) * (STOPS.len() - 1) as f64;
    let i = (t.floor() as usize).min(STOPS.len() - 2);
    let f = t - i as f64;
    let mix = |a: u8, b: u8| (a as f64 + (b as f64 - a as f64) * f).round() as u8;
    let (a, b) = (STOPS[i], STOPS[i + 1]);
    RGBColor(mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

fn cell_edges(centers: &[f64]) -> Vec<f64> {
    let n = centers.len();
    if n == 1 {
        return vec![centers[0] - 0.5, centers[0] + 0.5];
    }
    let mut edges = Vec::with_capacity(n + 1);
    edges.push(centers[0] - 0.5 * (centers[1] - centers[0]));
    for w in centers.windows(2) {
        edges.push(0.5 * (w[0] + w[1]));
    }
    edges.push(centers[n - 1] + 0.5 * (centers[n - 1] - centers[n - 2]));
    edges
}

/// Row-major `rows x cols` values drawn with `cols` along x and `rows`
/// along y, plus a color bar. Missing cells are grey.
pub fn heatmap(path: &Path, labels: &Labels, x_centers: &[f64], y_centers: &[f64], values: &[Option<f64>]) -> Result<(), String> {
    let (cols, rows) = (x_centers.len(), y_centers.len());
    debug_assert_eq!(values.len(), rows * cols);
    let root = BitMapBackend::new(path, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(err)?;
    let (main, bar) = root.split_horizontally(SIZE.0 - 110);

    let finite = || values.iter().flatten().copied().filter(|v| v.is_finite());
    let lo = finite().fold(f64::INFINITY, f64::min);
    let hi = finite().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if lo.is_finite() { (lo, if hi > lo { hi } else { lo + 1.0 }) } else { (0.0, 1.0) };

    let xe = cell_edges(x_centers);
    let ye = cell_edges(y_centers);
    let mut c = chart(&main, labels, (xe[0], xe[cols]), (ye[0].min(ye[rows]), ye[0].max(ye[rows])))?;
    c.draw_series((0..rows).flat_map(|i| {
        let (xe, ye) = (&xe, &ye);
        (0..cols).map(move |j| {
            let color = match values[i * cols + j] {
                Some(v) if v.is_finite() => colormap((v - lo) / (hi - lo)),
                Some(_) => WHITE,
                None => RGBColor(190, 190, 190),
            };
            Rectangle::new([(xe[j], ye[i]), (xe[j + 1], ye[i + 1])], color.filled())
        })
    }))
    .map_err(err)?;

    let bar = bar.margin(60, 60, 5, 10);
    let mut b = ChartBuilder::on(&bar);
    if fonts() {
        b.set_label_area_size(LabelAreaPosition::Right, 60);
    }
    let mut bc = b.build_cartesian_2d(0.0..1.0, lo..hi).map_err(err)?;
    if fonts() {
        bc.configure_mesh()
            .disable_mesh()
            .disable_x_axis()
            .label_style(("sans-serif", 14))
            .y_labels(5)
            .y_label_formatter(&|v| tick(*v))
            .draw()
            .map_err(err)?;
    }
    let steps = 100;
    bc.draw_series((0..steps).map(|k| {
        let a = lo + (hi - lo) * k as f64 / steps as f64;
        let b = lo + (hi - lo) * (k + 1) as f64 / steps as f64;
        Rectangle::new([(0.0, a), (1.0, b)], colormap(k as f64 / (steps - 1) as f64).filled())
    }))
    .map_err(err)?;
    root.present().map_err(err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn colormap_endpoints() {
        assert_eq!(colormap(0.0), RGBColor(68, 1, 84));
        assert_eq!(colormap(1.0), RGBColor(253, 231, 37));
        assert_eq!(colormap(-3.0), colormap(0.0));
    }

    #[test]
    fn tick_labels() {
        assert_eq!(tick(80.0), "80");
        assert_eq!(tick(0.001), "0.001");
        assert_eq!(tick(-0.00025), "-0.00025");
        assert_eq!(tick(0.66666), "0.6667");
        assert_eq!(tick(19600.0), "19600");
    }

    #[test]
    fn edges_bracket_centers() {
        assert_eq!(cell_edges(&[0.0, 1.0, 2.0]), vec![-0.5, 0.5, 1.5, 2.5]);
        assert_eq!(cell_edges(&[3.0]), vec![2.5, 3.5]);
    }

    #[test]
    fn renders_png() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("h.png");
        heatmap(
            &p,
            &Labels { title: "t", x: "x", y: "y" },
            &[0.0, 1.0],
            &[0.0, 1.0, 2.0],
            &[Some(0.0), Some(1.0), None, Some(2.0), Some(f64::INFINITY), Some(0.5)],
        )
        .unwrap();
        let bytes = std::fs::read(&p).unwrap();
        assert_eq!(&bytes[1..4], b"PNG");
    }
}
