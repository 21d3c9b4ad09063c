//! SVG plots with a TSV copy of the plotted data next to each file.

use std::path::{Path, PathBuf};

use plotters::coord::Shift;
use plotters::prelude::*;

use crate::tsv::{num, write_table};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlotKind {
    Line,
    LogLog,
    Scatter,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlotSeries {
    pub label: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl PlotSeries {
    pub fn new(label: impl Into<String>, x: Vec<f64>, y: Vec<f64>) -> Self {
        PlotSeries {
            label: label.into(),
            x,
            y,
        }
    }

    pub fn from_points(label: impl Into<String>, points: impl IntoIterator<Item = (f64, f64)>) -> Self {
        let (x, y) = points.into_iter().unzip();
        PlotSeries::new(label, x, y)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlotLabels {
    pub title: String,
    pub x: String,
    pub y: String,
}

impl PlotLabels {
    pub fn new(title: &str, x: &str, y: &str) -> Self {
        PlotLabels {
            title: title.into(),
            x: x.into(),
            y: y.into(),
        }
    }
}

fn check(series: &[PlotSeries], kind: PlotKind) -> Result<()> {
    if series.is_empty() {
        return Err(Error::Plot("no series to plot".into()));
    }
    for s in series {
        if s.x.is_empty() {
            return Err(Error::Plot(format!("series '{}' is empty", s.label)));
        }
        if s.x.len() != s.y.len() {
            return Err(Error::Plot(format!(
                "series '{}' has {} x values but {} y values",
                s.label,
                s.x.len(),
                s.y.len()
            )));
        }
        for (k, (&x, &y)) in s.x.iter().zip(&s.y).enumerate() {
            if !x.is_finite() || !y.is_finite() {
                return Err(Error::Plot(format!("series '{}' has a non-finite value at index {k}", s.label)));
            }
            if kind == PlotKind::LogLog && (x <= 0.0 || y <= 0.0) {
                return Err(Error::Plot(format!(
                    "series '{}' has a nonpositive value at index {k}, which a log-log plot cannot show",
                    s.label
                )));
            }
        }
    }
    Ok(())
}

fn span(values: impl Iterator<Item = f64>, log: bool) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if log {
        return if lo == hi { (lo / 2.0, hi * 2.0) } else { (lo, hi) };
    }
    let pad = if hi > lo { 0.05 * (hi - lo) } else { lo.abs().max(1.0) * 0.1 };
    (lo - pad, hi + pad)
}

fn draw_series<'a, X, Y>(
    chart: &mut ChartContext<'a, SVGBackend<'a>, Cartesian2d<X, Y>>,
    series: &[PlotSeries],
    kind: PlotKind,
) -> Result<()>
where
    X: Ranged<ValueType = f64>,
    Y: Ranged<ValueType = f64>,
{
    let plot_err = |e: DrawingAreaErrorKind<std::io::Error>| Error::Plot(e.to_string());
    for (k, s) in series.iter().enumerate() {
        let color = Palette99::pick(k).to_rgba();
        let points = s.x.iter().copied().zip(s.y.iter().copied());
        let drawn = match kind {
            PlotKind::Scatter => chart
                .draw_series(points.map(|p| Circle::new(p, 3, color.filled())))
                .map_err(plot_err)?,
            _ => chart.draw_series(LineSeries::new(points, color.stroke_width(2))).map_err(plot_err)?,
        };
        drawn
            .label(s.label.as_str())
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color.stroke_width(2)));
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(plot_err)
}

fn render(root: &DrawingArea<SVGBackend<'_>, Shift>, series: &[PlotSeries], kind: PlotKind, labels: &PlotLabels) -> Result<()> {
    let plot_err = |e: DrawingAreaErrorKind<std::io::Error>| Error::Plot(e.to_string());
    root.fill(&WHITE).map_err(plot_err)?;
    let log = kind == PlotKind::LogLog;
    let (x0, x1) = span(series.iter().flat_map(|s| s.x.iter().copied()), log);
    let (y0, y1) = span(series.iter().flat_map(|s| s.y.iter().copied()), log);
    let mut builder = ChartBuilder::on(root);
    builder
        .caption(labels.title.as_str(), ("sans-serif", 22))
        .margin(15)
        .x_label_area_size(45)
        .y_label_area_size(70);
    if log {
        let mut chart = builder
            .build_cartesian_2d((x0..x1).log_scale(), (y0..y1).log_scale())
            .map_err(plot_err)?;
        chart
            .configure_mesh()
            .x_desc(labels.x.as_str())
            .y_desc(labels.y.as_str())
            .draw()
            .map_err(plot_err)?;
        draw_series(&mut chart, series, kind)
    } else {
        let mut chart = builder.build_cartesian_2d(x0..x1, y0..y1).map_err(plot_err)?;
        chart
            .configure_mesh()
            .x_desc(labels.x.as_str())
            .y_desc(labels.y.as_str())
            .draw()
            .map_err(plot_err)?;
        draw_series(&mut chart, series, kind)
    }
}

/// Writes an SVG plot to `path` and the plotted values to `path` with a
/// `.tsv` extension (columns: series, x, y). Returns the TSV path.
pub fn emit_plot(series: &[PlotSeries], kind: PlotKind, labels: &PlotLabels, path: &Path) -> Result<PathBuf> {
    check(series, kind)?;
    {
        let root = SVGBackend::new(path, (800, 560)).into_drawing_area();
        render(&root, series, kind, labels)?;
        root.present().map_err(|e| Error::Plot(e.to_string()))?;
    }
    let rows: Vec<Vec<String>> = series
        .iter()
        .flat_map(|s| s.x.iter().zip(&s.y).map(|(&x, &y)| vec![s.label.clone(), num(x), num(y)]))
        .collect();
    let data = path.with_extension("tsv");
    let (xl, yl) = (labels.x.replace('\t', " "), labels.y.replace('\t', " "));
    write_table(&data, &["series", &xl, &yl], &rows)?;
    Ok(data)
}
