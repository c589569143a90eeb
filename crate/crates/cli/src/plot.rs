//! SVG plots of CSV columns.
//!
//! Log axes are drawn in `log10` coordinates. When both axes are logarithmic the
//! least-squares slope is drawn and printed in the caption.

use std::path::Path;

use airy_core::fit::linear_fit;
use plotters::prelude::*;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    /// Column names; the first and second columns when absent.
    pub x: Option<String>,
    pub y: Option<String>,
    pub log_x: bool,
    pub log_y: bool,
    pub title: String,
}

impl PlotSpec {
    pub fn log_log(title: &str) -> Self {
        Self { x: None, y: None, log_x: true, log_y: true, title: title.to_string() }
    }

    pub fn columns(mut self, x: &str, y: &str) -> Self {
        self.x = Some(x.to_string());
        self.y = Some(y.to_string());
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub x_label: String,
    pub y_label: String,
    pub points: Vec<(f64, f64)>,
}

fn column(headers: &[String], wanted: Option<&str>, default: usize, path: &str) -> Result<usize, CliError> {
    match wanted {
        Some(name) => headers.iter().position(|h| h == name).ok_or_else(|| CliError::Csv {
            path: path.to_string(),
            msg: format!("no column named {name}"),
        }),
        None if default < headers.len() => Ok(default),
        None => Err(CliError::Csv { path: path.to_string(), msg: format!("need at least {} columns", default + 1) }),
    }
}

pub fn read_series(text: &str, spec: &PlotSpec, path: &str) -> Result<Series, CliError> {
    let bad = |msg: String| CliError::Csv { path: path.to_string(), msg };
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let headers: Vec<String> =
        rdr.headers().map_err(|e| bad(e.to_string()))?.iter().map(|h| h.trim().to_string()).collect();
    if headers.is_empty() || headers.iter().all(|h| h.is_empty()) {
        return Err(bad("empty file".into()));
    }
    let xi = column(&headers, spec.x.as_deref(), 0, path)?;
    let yi = column(&headers, spec.y.as_deref(), 1, path)?;
    let mut points = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let get = |i: usize| -> Result<f64, CliError> {
            let s = rec.get(i).ok_or_else(|| bad(format!("row {} is short", row + 2)))?;
            let v: f64 = s.trim().parse().map_err(|_| bad(format!("row {}: not a number: {s}", row + 2)))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(bad(format!("row {}: non-finite value {s}", row + 2)))
            }
        };
        points.push((get(xi)?, get(yi)?));
    }
    if points.is_empty() {
        return Err(bad("no data rows".into()));
    }
    Ok(Series { x_label: headers[xi].clone(), y_label: headers[yi].clone(), points })
}

fn padded_range(v: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let lo = v.clone().fold(f64::INFINITY, f64::min);
    let hi = v.fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { lo.abs().max(1.0) };
    (lo - 0.05 * span, hi + 0.05 * span)
}

/// Renders the series; returns the SVG text and the fitted log-log slope if any.
pub fn render(series: &Series, spec: &PlotSpec) -> Result<(String, Option<f64>), CliError> {
    let fail = |e: String| CliError::Failed(format!("plot {}: {e}", spec.title));
    let tx = |v: f64| if spec.log_x { v.log10() } else { v };
    let ty = |v: f64| if spec.log_y { v.log10() } else { v };
    if series.points.iter().any(|&(x, y)| (spec.log_x && x <= 0.0) || (spec.log_y && y <= 0.0)) {
        return Err(CliError::Csv { path: spec.title.clone(), msg: "log axis needs positive values".into() });
    }
    let pts: Vec<(f64, f64)> = series.points.iter().map(|&(x, y)| (tx(x), ty(y))).collect();
    let fit = if spec.log_x && spec.log_y && pts.len() >= 2 {
        let (xs, ys): (Vec<f64>, Vec<f64>) = pts.iter().copied().unzip();
        linear_fit(&xs, &ys).ok()
    } else {
        None
    };
    let caption = match fit {
        Some(f) => format!("{} (slope {:.4})", spec.title, f.slope),
        None => spec.title.clone(),
    };
    let axis = |name: &str, log: bool| if log { format!("log10 {name}") } else { name.to_string() };
    let xr = padded_range(pts.iter().map(|p| p.0));
    let yr = padded_range(pts.iter().map(|p| p.1));

    let mut svg = String::new();
    {
        let root = SVGBackend::with_string(&mut svg, (720, 480)).into_drawing_area();
        root.fill(&WHITE).map_err(|e| fail(e.to_string()))?;
        let mut chart = ChartBuilder::on(&root)
            .caption(caption, ("sans-serif", 20))
            .margin(12)
            .x_label_area_size(44)
            .y_label_area_size(64)
            .build_cartesian_2d(xr.0..xr.1, yr.0..yr.1)
            .map_err(|e| fail(e.to_string()))?;
        chart
            .configure_mesh()
            .x_desc(axis(&series.x_label, spec.log_x))
            .y_desc(axis(&series.y_label, spec.log_y))
            .draw()
            .map_err(|e| fail(e.to_string()))?;
        chart.draw_series(LineSeries::new(pts.iter().copied(), &BLUE)).map_err(|e| fail(e.to_string()))?;
        chart
            .draw_series(pts.iter().map(|&p| Circle::new(p, 3, BLUE.filled())))
            .map_err(|e| fail(e.to_string()))?;
        if let Some(f) = fit {
            let line = [xr.0, xr.1].map(|x| (x, f.intercept + f.slope * x));
            chart.draw_series(LineSeries::new(line, &RED)).map_err(|e| fail(e.to_string()))?;
        }
        root.present().map_err(|e| fail(e.to_string()))?;
    }
    Ok((svg, fit.map(|f| f.slope)))
}

pub fn plot_file(path: &Path, spec: &PlotSpec) -> Result<(String, Option<f64>), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let series = read_series(&text, spec, &path.display().to_string())?;
    render(&series, spec)
}
