use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

use super::{ResultRow, Scheme, SweepAxis};

pub const CSV_HEADER: &str = "scheme,axis,axis_value,trial,se_bps_hz,ee_bps_hz_w,evals,wall_time_s";

/// Shortest `%.12g`-style rendering: 12 significant digits, trailing zeros
/// dropped, exponent form outside `1e-5 ..= 1e12`.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let prec = (11 - exp) as usize;
        trim_fraction(&format!("{x:.prec$}")).to_string()
    } else {
        format!("{}e{exp}", trim_fraction(mantissa))
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn sort_rows(rows: &mut [ResultRow]) {
    rows.sort_by(|a, b| {
        a.scheme
            .label()
            .cmp(b.scheme.label())
            .then(a.axis_value.total_cmp(&b.axis_value))
            .then(a.trial.cmp(&b.trial))
    });
}

/// CSV text with rows sorted by `(scheme, axis_value, trial)`.
pub fn render_csv(rows: &[ResultRow]) -> String {
    let mut sorted = rows.to_vec();
    sort_rows(&mut sorted);
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in &sorted {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.scheme.label(),
            r.axis.label(),
            format_sig(r.axis_value),
            r.trial,
            format_sig(r.se),
            format_sig(r.ee),
            r.solver_evaluations,
            format_sig(r.wall_time_s),
        ));
    }
    out
}

pub fn emit_csv(rows: &[ResultRow], path: &Path) -> Result<()> {
    fs::write(path, render_csv(rows)).map_err(|e| Error::io(path, e))
}

pub fn parse_csv(text: &str) -> Result<Vec<ResultRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        other => {
            return Err(Error::InvalidInput(format!("unexpected CSV header {other:?}")));
        }
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, line)| {
            let bad = |what: &str| Error::InvalidInput(format!("CSV line {}: bad {what}", i + 2));
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 8 {
                return Err(bad("field count"));
            }
            let num = |s: &str, what: &str| s.parse::<f64>().map_err(|_| bad(what));
            Ok(ResultRow {
                scheme: f[0].parse::<Scheme>().map_err(|_| bad("scheme"))?,
                axis: f[1].parse::<SweepAxis>().map_err(|_| bad("axis"))?,
                axis_value: num(f[2], "axis_value")?,
                trial: f[3].parse().map_err(|_| bad("trial"))?,
                se: num(f[4], "se")?,
                ee: num(f[5], "ee")?,
                solver_evaluations: f[6].parse().map_err(|_| bad("evals"))?,
                wall_time_s: num(f[7], "wall_time_s")?,
            })
        })
        .collect()
}

pub fn read_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sig_formatting_examples() {
        assert_eq!(format_sig(0.0), "0");
        assert_eq!(format_sig(1.0), "1");
        assert_eq!(format_sig(-2.5), "-2.5");
        assert_eq!(format_sig(1e9), "1000000000");
        assert_eq!(format_sig(5e8), "500000000");
        assert_eq!(format_sig(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_sig(123456.7890123456), "123456.789012");
        assert_eq!(format_sig(1e-7), "1e-7");
        assert_eq!(format_sig(6.02214076e23), "6.02214076e23");
        assert_eq!(format_sig(0.99999999999999), "1");
    }

    fn row(scheme: Scheme, v: f64, trial: usize) -> ResultRow {
        ResultRow {
            scheme,
            axis: SweepAxis::Snr,
            axis_value: v,
            trial,
            se: 1.0 / (trial + 3) as f64,
            ee: 2.0,
            solver_evaluations: 7,
            wall_time_s: 0.0,
        }
    }

    #[test]
    fn header_only_for_empty_rows() {
        assert_eq!(render_csv(&[]), format!("{CSV_HEADER}\n"));
        assert!(parse_csv(&render_csv(&[])).unwrap().is_empty());
    }

    #[test]
    fn rows_are_sorted_by_scheme_axis_trial() {
        let rows = vec![
            row(Scheme::SwTs, 10.0, 1),
            row(Scheme::Dbf, 10.0, 0),
            row(Scheme::SwTs, -5.0, 0),
            row(Scheme::SwTs, 10.0, 0),
        ];
        let parsed = parse_csv(&render_csv(&rows)).unwrap();
        let keys: Vec<_> = parsed.iter().map(|r| (r.scheme, r.axis_value, r.trial)).collect();
        assert_eq!(
            keys,
            vec![(Scheme::Dbf, 10.0, 0), (Scheme::SwTs, -5.0, 0), (Scheme::SwTs, 10.0, 0), (Scheme::SwTs, 10.0, 1)]
        );
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(parse_csv("a,b\n").is_err());
        assert!(parse_csv(&format!("{CSV_HEADER}\nsw-ts,snr,1,0,1,1,1\n")).is_err());
        assert!(parse_csv(&format!("{CSV_HEADER}\nnope,snr,1,0,1,1,1,0\n")).is_err());
    }

    proptest! {
        #[test]
        fn sig_round_trip_is_stable(x in prop::num::f64::NORMAL) {
            let once = format_sig(x);
            let back: f64 = once.parse().unwrap();
            prop_assert_eq!(format_sig(back), once.clone());
            let rel = ((back - x) / x).abs();
            prop_assert!(rel <= 5e-12, "{} -> {} ({})", x, once, rel);
        }
    }
}
