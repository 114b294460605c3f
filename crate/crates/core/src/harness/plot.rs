//! Minimal static SVG line charts. Output is a pure function of the data so
//! figures are byte-stable across runs; raw series are embedded as comments.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::channel::{beam_pattern, open_angle_grid};
use crate::error::{Error, Result};

use super::csv::format_sig;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 150.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 55.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct LineChart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    /// Draw point markers in addition to lines.
    pub markers: bool,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        let pad = lo.abs().max(1.0) * 0.5;
        return (lo - pad, hi + pad);
    }
    (lo, hi)
}

/// Five evenly spaced tick values across `[lo, hi]`.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    (0..5).map(|i| lo + (hi - lo) * i as f64 / 4.0).collect()
}

fn tick_label(v: f64) -> String {
    let r = (v * 1000.0).round() / 1000.0;
    format_sig(if r == 0.0 { 0.0 } else { r })
}

impl LineChart {
    pub fn to_svg(&self) -> String {
        let (x_lo, x_hi) = bounds(self.series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
        let (y_lo, mut y_hi) = bounds(self.series.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
        y_hi += (y_hi - y_lo) * 0.05;
        let plot_w = WIDTH - MARGIN_L - MARGIN_R;
        let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
        let sx = |x: f64| MARGIN_L + (x - x_lo) / (x_hi - x_lo) * plot_w;
        let sy = |y: f64| MARGIN_T + plot_h - (y - y_lo) / (y_hi - y_lo) * plot_h;

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        for series in &self.series {
            let _ = write!(s, "<!-- data series=\"{}\" x,y:", escape(&series.name).replace("--", "- -"));
            for (x, y) in &series.points {
                let _ = write!(s, " {},{}", format_sig(*x), format_sig(*y));
            }
            s.push_str(" -->\n");
        }
        let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
            MARGIN_L + plot_w / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            s,
            r#"<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
        );
        for t in ticks(x_lo, x_hi) {
            let x = sx(t);
            let _ = writeln!(
                s,
                r##"<line x1="{x:.2}" y1="{MARGIN_T}" x2="{x:.2}" y2="{:.2}" stroke="#dddddd"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
                MARGIN_T + plot_h,
                MARGIN_T + plot_h + 18.0,
                tick_label(t)
            );
        }
        for t in ticks(y_lo, y_hi) {
            let y = sy(t);
            let _ = writeln!(
                s,
                r##"<line x1="{MARGIN_L}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
                MARGIN_L + plot_w,
                MARGIN_L - 6.0,
                y + 4.0,
                tick_label(t)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            MARGIN_L + plot_w / 2.0,
            HEIGHT - 12.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
            MARGIN_T + plot_h / 2.0,
            MARGIN_T + plot_h / 2.0,
            escape(&self.y_label)
        );

        for (i, series) in self.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let pts: Vec<String> = series
                .points
                .iter()
                .filter(|p| p.0.is_finite() && p.1.is_finite())
                .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                .collect();
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                pts.join(" ")
            );
            if self.markers {
                for p in &pts {
                    let (x, y) = p.split_once(',').expect("x,y pair");
                    let _ = writeln!(s, r#"<circle cx="{x}" cy="{y}" r="3" fill="{color}"/>"#);
                }
            }
            let ly = MARGIN_T + 12.0 + 18.0 * i as f64;
            let lx = WIDTH - MARGIN_R + 12.0;
            let _ = writeln!(
                s,
                r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
                lx + 20.0,
                lx + 26.0,
                ly + 4.0,
                escape(&series.name)
            );
        }
        s.push_str("</svg>\n");
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_svg()).map_err(|e| Error::io(path, e))
    }
}

/// Array gain of a beam focused at `focus` for the carrier, evaluated at
/// several frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamPatternSpec {
    pub n_ant: usize,
    pub carrier_hz: f64,
    /// Element spacing in carrier wavelengths.
    pub spacing: f64,
    pub focus_rad: f64,
    pub frequencies_hz: Vec<f64>,
    pub grid_points: usize,
}

impl Default for BeamPatternSpec {
    /// 64 elements, focus pi/6, band edges and center of 4 GHz around 60 GHz.
    fn default() -> Self {
        BeamPatternSpec {
            n_ant: 64,
            carrier_hz: 60e9,
            spacing: 0.5,
            focus_rad: PI / 6.0,
            frequencies_hz: vec![58e9, 60e9, 62e9],
            grid_points: 1001,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BeamPatternData {
    pub grid: Vec<f64>,
    /// `(frequency, gains over grid)` in request order.
    pub curves: Vec<(f64, Vec<f64>)>,
}

impl BeamPatternData {
    /// Grid angle with the largest gain for curve `i`, first on ties.
    pub fn peak_angle(&self, i: usize) -> f64 {
        let gains = &self.curves[i].1;
        let mut best = 0;
        for (j, g) in gains.iter().enumerate() {
            if *g > gains[best] {
                best = j;
            }
        }
        self.grid[best]
    }
}

pub fn compute_beam_pattern(spec: &BeamPatternSpec) -> Result<BeamPatternData> {
    if spec.n_ant == 0 || spec.grid_points == 0 || spec.frequencies_hz.is_empty() {
        return Err(Error::Config(
            "beam pattern needs antennas, grid points and at least one frequency".into(),
        ));
    }
    if spec.frequencies_hz.iter().any(|f| !(*f > 0.0)) || !(spec.carrier_hz > 0.0) {
        return Err(Error::Config("frequencies must be positive".into()));
    }
    let grid = open_angle_grid(spec.grid_points);
    let curves = spec
        .frequencies_hz
        .iter()
        .map(|&f| {
            let g = beam_pattern(spec.focus_rad, spec.carrier_hz, f, spec.n_ant, &grid, spec.spacing, spec.carrier_hz);
            (f, g)
        })
        .collect();
    Ok(BeamPatternData { grid, curves })
}

/// Writes the SVG figure to `svg_path` and the raw grid next to it with a
/// `.csv` extension. Returns the computed curves.
pub fn emit_beam_pattern_figure(spec: &BeamPatternSpec, svg_path: &Path) -> Result<BeamPatternData> {
    let data = compute_beam_pattern(spec)?;
    let chart = LineChart {
        title: format!(
            "Beam pattern, N = {}, focus {} rad",
            spec.n_ant,
            format_sig((spec.focus_rad * 1e6).round() / 1e6)
        ),
        x_label: "angle (rad)".into(),
        y_label: "normalized array gain".into(),
        series: data
            .curves
            .iter()
            .map(|(f, g)| Series {
                name: format!("{} GHz", format_sig(f / 1e9)),
                points: data.grid.iter().copied().zip(g.iter().copied()).collect(),
            })
            .collect(),
        markers: false,
    };
    chart.write(svg_path)?;

    let mut csv = String::from("frequency_hz,angle_rad,gain\n");
    for (f, g) in &data.curves {
        for (a, v) in data.grid.iter().zip(g) {
            let _ = writeln!(csv, "{},{},{}", format_sig(*f), format_sig(*a), format_sig(*v));
        }
    }
    let csv_path: PathBuf = svg_path.with_extension("csv");
    fs::write(&csv_path, csv).map_err(|e| Error::io(&csv_path, e))?;
    Ok(data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svg_is_deterministic_and_embeds_data() {
        let chart = LineChart {
            title: "t <1>".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            series: vec![
                Series {
                    name: "a".into(),
                    points: vec![(0.0, 1.0), (1.0, 2.5)],
                },
                Series {
                    name: "b".into(),
                    points: vec![(0.0, 0.5)],
                },
            ],
            markers: true,
        };
        let s = chart.to_svg();
        assert_eq!(s, chart.to_svg());
        assert!(s.starts_with("<svg"));
        assert!(s.trim_end().ends_with("</svg>"));
        assert!(s.contains("<!-- data series=\"a\" x,y: 0,1 1,2.5 -->"));
        assert!(s.contains("t &lt;1&gt;"));
        assert_eq!(s.matches("<polyline").count(), 2);
    }

    #[test]
    fn flat_series_does_not_divide_by_zero() {
        let chart = LineChart {
            title: String::new(),
            x_label: String::new(),
            y_label: String::new(),
            series: vec![Series {
                name: "c".into(),
                points: vec![(1.0, 3.0), (1.0, 3.0)],
            }],
            markers: false,
        };
        assert!(!chart.to_svg().contains("NaN"));
    }

    #[test]
    fn single_carrier_curve_peaks_at_focus() {
        let spec = BeamPatternSpec {
            frequencies_hz: vec![60e9],
            ..BeamPatternSpec::default()
        };
        let data = compute_beam_pattern(&spec).unwrap();
        assert_eq!(data.curves.len(), 1);
        assert!((data.peak_angle(0) - PI / 6.0).abs() < 1e-12);
        let peak = data.curves[0].1.iter().copied().fold(0.0, f64::max);
        assert!((peak - 1.0).abs() < 1e-12);
    }

    #[test]
    fn default_curves_peak_at_distinct_angles() {
        let data = compute_beam_pattern(&BeamPatternSpec::default()).unwrap();
        let peaks: Vec<f64> = (0..3).map(|i| data.peak_angle(i)).collect();
        assert!(peaks[0] > peaks[1] && peaks[1] > peaks[2], "{peaks:?}");
    }

    #[test]
    fn figure_and_companion_csv_are_written() {
        let dir = tempfile::tempdir().unwrap();
        let svg = dir.path().join("beam_pattern.svg");
        emit_beam_pattern_figure(&BeamPatternSpec::default(), &svg).unwrap();
        let csv = fs::read_to_string(dir.path().join("beam_pattern.csv")).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "frequency_hz,angle_rad,gain");
        assert_eq!(lines.len(), 1 + 3 * 1001);
        for f in ["58000000000", "60000000000", "62000000000"] {
            assert_eq!(lines.iter().filter(|l| l.starts_with(&format!("{f},"))).count(), 1001);
        }
        assert!(fs::read_to_string(svg).unwrap().contains("58 GHz"));
    }

    #[test]
    fn invalid_spec_is_a_config_error() {
        let spec = BeamPatternSpec {
            frequencies_hz: vec![],
            ..BeamPatternSpec::default()
        };
        assert!(matches!(compute_beam_pattern(&spec), Err(Error::Config(_))));
    }
}
