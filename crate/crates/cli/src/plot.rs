//! Static SVG figures. Axes use cm and min; data files stay SI.

use std::path::Path;

use anyhow::{anyhow, Result};
use plotters::prelude::*;

const SIZE: (u32, u32) = (900, 600);

fn err<E: std::fmt::Display>(e: E) -> anyhow::Error {
    anyhow!("plotting failed: {e}")
}

fn span(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
            (a.min(v), b.max(v))
        });
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    let pad = 0.05 * (hi - lo).max(1e-6);
    (lo - pad, hi + pad)
}

/// θ against depth, one curve per output time.
pub fn profiles(path: &Path, xs: &[f64], ts: &[f64], theta: &[Vec<f64>]) -> Result<()> {
    let root = SVGBackend::new(path, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(err)?;
    let (lo, hi) = span(theta.iter().flatten().copied());
    let x_max = xs.last().copied().unwrap_or(1.0) * 100.0;
    let mut chart = ChartBuilder::on(&root)
        .caption("Water content profiles", ("sans-serif", 22))
        .margin(15)
        .x_label_area_size(45)
        .y_label_area_size(70)
        .build_cartesian_2d(0.0..x_max, lo..hi)
        .map_err(err)?;
    chart
        .configure_mesh()
        .x_desc("depth x (cm)")
        .y_desc("theta (m3/m3)")
        .draw()
        .map_err(err)?;
    for (j, &t) in ts.iter().enumerate() {
        let colour = Palette99::pick(j).to_rgba();
        let pts: Vec<(f64, f64)> = xs
            .iter()
            .zip(theta)
            .filter(|(_, row)| row[j].is_finite())
            .map(|(&x, row)| (x * 100.0, row[j]))
            .collect();
        chart
            .draw_series(LineSeries::new(pts, colour.stroke_width(2)))
            .map_err(err)?
            .label(format!("t = {:.0} min", t / 60.0))
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], colour));
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(err)?;
    root.present().map_err(err)?;
    Ok(())
}

/// θ over the depth–time plane as coloured cells.
pub fn heatmap(path: &Path, xs: &[f64], ts: &[f64], theta: &[Vec<f64>]) -> Result<()> {
    let root = SVGBackend::new(path, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(err)?;
    let (lo, hi) = span(theta.iter().flatten().copied());
    let edges = |v: &[f64]| -> Vec<f64> {
        if v.len() == 1 {
            return vec![v[0] - 0.5, v[0] + 0.5];
        }
        let mut e = vec![v[0] - 0.5 * (v[1] - v[0])];
        e.extend(v.windows(2).map(|p| 0.5 * (p[0] + p[1])));
        e.push(v[v.len() - 1] + 0.5 * (v[v.len() - 1] - v[v.len() - 2]));
        e
    };
    let xe: Vec<f64> = edges(xs).into_iter().map(|x| x * 100.0).collect();
    let te: Vec<f64> = edges(ts).into_iter().map(|t| t / 60.0).collect();
    let mut chart = ChartBuilder::on(&root)
        .caption("Water content theta(x, t)", ("sans-serif", 22))
        .margin(15)
        .x_label_area_size(45)
        .y_label_area_size(60)
        .build_cartesian_2d(xe[0]..xe[xe.len() - 1], te[0]..te[te.len() - 1])
        .map_err(err)?;
    chart
        .configure_mesh()
        .disable_mesh()
        .x_desc("depth x (cm)")
        .y_desc("time t (min)")
        .draw()
        .map_err(err)?;
    let cells = (0..xs.len()).flat_map(|i| (0..ts.len()).map(move |j| (i, j)));
    chart
        .draw_series(cells.map(|(i, j)| {
            let v = theta[i][j];
            let colour = if v.is_finite() {
                // Dry is yellow, wet is blue.
                let s = ((v - lo) / (hi - lo)).clamp(0.0, 1.0);
                HSLColor(0.17 + 0.5 * s, 0.8, 0.5).filled()
            } else {
                BLACK.filled()
            };
            Rectangle::new([(xe[i], te[j]), (xe[i + 1], te[j + 1])], colour)
        }))
        .map_err(err)?;
    root.present().map_err(err)?;
    Ok(())
}

/// Series truncation error against the number of modes, log–log.
pub fn convergence(path: &Path, rows: &[(usize, f64)], t_s: f64) -> Result<()> {
    let root = SVGBackend::new(path, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(err)?;
    // Exact zeros cannot sit on a log axis.
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .map(|&(n, e)| (n.max(1) as f64, e.max(1e-17)))
        .collect();
    let n_max = pts.iter().map(|p| p.0).fold(10.0, f64::max) * 2.0;
    let e_lo = pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min) / 10.0;
    let e_hi = pts
        .iter()
        .map(|p| p.1)
        .fold(0.0, f64::max)
        .max(e_lo * 100.0)
        * 10.0;
    let mut chart = ChartBuilder::on(&root)
        .caption(
            format!("Series truncation error at t = {:.0} min", t_s / 60.0),
            ("sans-serif", 22),
        )
        .margin(15)
        .x_label_area_size(45)
        .y_label_area_size(80)
        .build_cartesian_2d((1.0..n_max).log_scale(), (e_lo..e_hi).log_scale())
        .map_err(err)?;
    chart
        .configure_mesh()
        .x_desc("number of modes N")
        .y_desc("max |theta_N - theta|")
        .y_label_formatter(&|v| format!("{v:.0e}"))
        .draw()
        .map_err(err)?;
    chart
        .draw_series(LineSeries::new(pts.clone(), BLUE.stroke_width(2)))
        .map_err(err)?;
    chart
        .draw_series(pts.iter().map(|&p| Circle::new(p, 4, BLUE.filled())))
        .map_err(err)?;
    root.present().map_err(err)?;
    Ok(())
}
