//! Deterministic artifact emission. CSV rows are serialized through serde so
//! the header row names the type's fields exactly; floats print in shortest
//! round-trip form, so identical runs produce byte-identical files. Plots are
//! hand-rolled SVG line charts — diffable text, no plotting dependency.

use std::fs;
use std::path::Path;

use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum OutputError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), OutputError> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Pretty JSON with sorted keys (the default map is ordered), newline-
/// terminated so the file diffs cleanly.
pub fn write_summary(path: &Path, summary: &serde_json::Value) -> Result<(), OutputError> {
    let mut text = serde_json::to_string_pretty(summary)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub struct PlotSpec<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    /// Draw a dot at every sample (for sparse series like sweep rows).
    pub marks: bool,
}

const W: f64 = 640.0;
const H: f64 = 420.0;
const ML: f64 = 72.0;
const MR: f64 = 24.0;
const MT: f64 = 42.0;
const MB: f64 = 52.0;

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if (1e-3..1e4).contains(&a) {
        let t = format!("{v:.3}");
        let t = t.trim_end_matches('0').trim_end_matches('.');
        t.to_string()
    } else {
        format!("{v:.2e}")
    }
}

fn padded_range(vals: &[f64]) -> (f64, f64) {
    let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(lo.is_finite() && hi.is_finite()) {
        return (0.0, 1.0);
    }
    if lo == hi {
        let pad = lo.abs().max(1.0) * 0.05;
        (lo - pad, hi + pad)
    } else {
        let pad = 0.04 * (hi - lo);
        (lo - pad, hi + pad)
    }
}

/// One polyline over the sample points, with axes, four ticks per axis, and
/// the labels from `spec`. Non-finite samples are skipped.
pub fn svg_line_plot(
    path: &Path,
    spec: &PlotSpec<'_>,
    xs: &[f64],
    ys: &[f64],
) -> Result<(), OutputError> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .map(|(&x, &y)| (x, y))
        .collect();
    let (x0, x1) = padded_range(&pts.iter().map(|p| p.0).collect::<Vec<_>>());
    let (y0, y1) = padded_range(&pts.iter().map(|p| p.1).collect::<Vec<_>>());
    let sx = |x: f64| ML + (x - x0) / (x1 - x0) * (W - ML - MR);
    let sy = |y: f64| H - MB - (y - y0) / (y1 - y0) * (H - MT - MB);

    let mut s = String::new();
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" \
         viewBox=\"0 0 {W} {H}\" font-family=\"monospace\" font-size=\"12\">\n"
    ));
    s.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    s.push_str(&format!(
        "<text x=\"{:.1}\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
        0.5 * W,
        spec.title
    ));
    s.push_str(&format!(
        "<rect x=\"{ML}\" y=\"{MT}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"none\" \
         stroke=\"black\"/>\n",
        W - ML - MR,
        H - MT - MB
    ));
    for k in 0..=4 {
        let fx = x0 + (x1 - x0) * k as f64 / 4.0;
        let fy = y0 + (y1 - y0) * k as f64 / 4.0;
        let px = sx(fx);
        let py = sy(fy);
        s.push_str(&format!(
            "<line x1=\"{px:.1}\" y1=\"{:.1}\" x2=\"{px:.1}\" y2=\"{:.1}\" stroke=\"black\"/>\n",
            H - MB,
            H - MB + 5.0
        ));
        s.push_str(&format!(
            "<text x=\"{px:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n",
            H - MB + 18.0,
            tick_label(fx)
        ));
        s.push_str(&format!(
            "<line x1=\"{:.1}\" y1=\"{py:.1}\" x2=\"{ML}\" y2=\"{py:.1}\" stroke=\"black\"/>\n",
            ML - 5.0
        ));
        s.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>\n",
            ML - 8.0,
            py + 4.0,
            tick_label(fy)
        ));
    }
    s.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n",
        ML + 0.5 * (W - ML - MR),
        H - 12.0,
        spec.x_label
    ));
    s.push_str(&format!(
        "<text x=\"16\" y=\"{:.1}\" text-anchor=\"middle\" \
         transform=\"rotate(-90 16 {:.1})\">{}</text>\n",
        MT + 0.5 * (H - MT - MB),
        MT + 0.5 * (H - MT - MB),
        spec.y_label
    ));
    if !pts.is_empty() {
        let coords: Vec<String> =
            pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        s.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"#1a6ccc\" stroke-width=\"1.5\"/>\n",
            coords.join(" ")
        ));
        if spec.marks {
            for &(x, y) in &pts {
                s.push_str(&format!(
                    "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"#1a6ccc\"/>\n",
                    sx(x),
                    sy(y)
                ));
            }
        }
    }
    s.push_str("</svg>\n");
    fs::write(path, s)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Row {
        idx: usize,
        value: f64,
        ok: bool,
    }

    #[test]
    fn csv_has_field_header_and_is_reproducible() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rows.csv");
        let rows = vec![Row { idx: 0, value: 0.1, ok: true }, Row { idx: 1, value: -2.5, ok: false }];
        write_csv(&path, &rows).unwrap();
        let first = fs::read(&path).unwrap();
        assert!(String::from_utf8_lossy(&first).starts_with("idx,value,ok\n"));
        write_csv(&path, &rows).unwrap();
        assert_eq!(first, fs::read(&path).unwrap());
    }

    #[test]
    fn svg_is_well_formed_and_reproducible() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("plot.svg");
        let xs: Vec<f64> = (0..20).map(|i| i as f64 * 0.1).collect();
        let ys: Vec<f64> = xs.iter().map(|x| (x * 3.0).sin()).collect();
        let spec = PlotSpec { title: "wave", x_label: "x", y_label: "sin", marks: false };
        svg_line_plot(&path, &spec, &xs, &ys).unwrap();
        let first = fs::read_to_string(&path).unwrap();
        assert!(first.starts_with("<svg "));
        assert!(first.trim_end().ends_with("</svg>"));
        assert!(first.contains("polyline"));
        svg_line_plot(&path, &spec, &xs, &ys).unwrap();
        assert_eq!(first, fs::read_to_string(&path).unwrap());
    }

    #[test]
    fn degenerate_and_nan_series_still_plot() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("flat.svg");
        let spec = PlotSpec { title: "flat", x_label: "x", y_label: "y", marks: true };
        svg_line_plot(&path, &spec, &[1.0, 2.0, 3.0], &[5.0, f64::NAN, 5.0]).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.contains("circle"));
    }
}
