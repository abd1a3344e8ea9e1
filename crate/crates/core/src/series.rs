//! Fisher-product trajectories `t -> I_x I_p`, threshold crossings, power-law
//! tail fits, and the fixed CSV layout used to exchange them.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fisher::Estimator;
use crate::grid::Grid;

/// CSV header; fields are fixed.
pub const CSV_HEADER: &str = "t,ix,ip,product,analytic_product,rel_err";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSummary {
    pub x_min: f64,
    pub dx: f64,
    pub n: usize,
}

impl From<&Grid> for GridSummary {
    fn from(g: &Grid) -> Self {
        GridSummary {
            x_min: g.x_min(),
            dx: g.dx(),
            n: g.n(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesMeta {
    pub state: String,
    pub k: Option<usize>,
    pub delta: Option<f64>,
    pub estimator: Estimator,
    pub grid: GridSummary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesEntry {
    pub t: f64,
    #[serde(rename = "ix")]
    pub i_x: f64,
    #[serde(rename = "ip")]
    pub i_p: f64,
    pub product: f64,
    pub analytic_product: Option<f64>,
    pub rel_err: Option<f64>,
}

impl SeriesEntry {
    pub fn new(t: f64, i_x: f64, i_p: f64, analytic_product: Option<f64>) -> Self {
        let product = i_x * i_p;
        SeriesEntry {
            t,
            i_x,
            i_p,
            product,
            analytic_product,
            rel_err: analytic_product.map(|a| (product - a).abs() / a),
        }
    }
}

/// Power law `product ~ amplitude * t^exponent` fitted in log-log space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub amplitude: f64,
    pub exponent: f64,
    pub window: (f64, f64),
    /// RMS residual of the log-log line.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSeries {
    pub meta: SeriesMeta,
    pub entries: Vec<SeriesEntry>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub fit: Option<DecayFit>,
}

impl CurveSeries {
    /// Fills `analytic_product` / `rel_err` from a reference function of t.
    pub fn attach_analytic<F>(&mut self, mut reference: F)
    where
        F: FnMut(f64) -> Option<f64>,
    {
        for e in &mut self.entries {
            *e = SeriesEntry::new(e.t, e.i_x, e.i_p, reference(e.t));
        }
    }

    /// Largest recorded relative error, if any entry carries one.
    pub fn max_rel_err(&self) -> Option<f64> {
        self.entries
            .iter()
            .filter_map(|e| e.rel_err)
            .fold(None, |acc, v| Some(acc.map_or(v, |a: f64| a.max(v))))
    }

    pub fn t_max(&self) -> f64 {
        self.entries.last().map_or(0.0, |e| e.t)
    }

    pub fn to_csv(&self) -> String {
        entries_to_csv(&self.entries)
    }
}

/// Float formatting used in CSV output: 17 significant digits.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn entries_to_csv(entries: &[SeriesEntry]) -> String {
    let mut out = String::with_capacity(64 * (entries.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    let opt = |v: Option<f64>| v.map(format_f64).unwrap_or_default();
    for e in entries {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            format_f64(e.t),
            format_f64(e.i_x),
            format_f64(e.i_p),
            format_f64(e.product),
            opt(e.analytic_product),
            opt(e.rel_err)
        );
    }
    out
}

pub fn parse_csv(text: &str) -> Result<Vec<SeriesEntry>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == CSV_HEADER => {}
        other => {
            return Err(Error::InvalidArgument(format!(
                "unexpected CSV header {other:?}"
            )))
        }
    }
    let field = |s: &str, line: usize| -> Result<f64> {
        s.parse::<f64>()
            .map_err(|_| Error::InvalidArgument(format!("line {line}: bad number '{s}'")))
    };
    let mut entries = Vec::new();
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 6 {
            return Err(Error::InvalidArgument(format!(
                "line {line_no}: expected 6 columns, found {}",
                cols.len()
            )));
        }
        let optional = |s: &str| -> Result<Option<f64>> {
            if s.is_empty() {
                Ok(None)
            } else {
                field(s, line_no).map(Some)
            }
        };
        entries.push(SeriesEntry {
            t: field(cols[0], line_no)?,
            i_x: field(cols[1], line_no)?,
            i_p: field(cols[2], line_no)?,
            product: field(cols[3], line_no)?,
            analytic_product: optional(cols[4])?,
            rel_err: optional(cols[5])?,
        });
    }
    Ok(entries)
}

/// `steps` evenly spaced points on `[0, t_max]`, endpoints included.
pub fn linear_times(t_max: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => vec![],
        1 => vec![0.0],
        _ => (0..steps)
            .map(|i| t_max * i as f64 / (steps - 1) as f64)
            .collect(),
    }
}

/// `t = 0` followed by `steps` log-spaced points on `[t_min, t_max]`.
pub fn log_times(t_min: f64, t_max: f64, steps: usize) -> Vec<f64> {
    let mut out = vec![0.0];
    if steps == 1 {
        out.push(t_max);
        return out;
    }
    let (a, b) = (t_min.ln(), t_max.ln());
    out.extend((0..steps).map(|i| {
        if i + 1 == steps {
            t_max
        } else {
            (a + (b - a) * i as f64 / (steps - 1) as f64).exp()
        }
    }));
    out
}

/// First time at which the product falls below `threshold`.
///
/// The crossing is bracketed between consecutive samples; with `refine`,
/// which re-evaluates the product at an arbitrary time, the bracket is
/// bisected down to `1e-6 * t_max`, otherwise it is interpolated linearly.
pub fn crossing_time(
    series: &CurveSeries,
    threshold: f64,
    refine: Option<&mut dyn FnMut(f64) -> Result<f64>>,
) -> Result<Option<f64>> {
    let entries = &series.entries;
    let first = entries
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty series".into()))?;
    if first.product < threshold {
        return Ok(Some(first.t));
    }
    let Some(i) = entries.iter().position(|e| e.product < threshold) else {
        return Ok(None);
    };
    let (a, b) = (&entries[i - 1], &entries[i]);
    let (mut lo, mut hi) = (a.t, b.t);
    match refine {
        Some(product_at) => {
            let tol = 1e-6 * series.t_max().abs().max(f64::MIN_POSITIVE);
            while hi - lo > tol {
                let mid = 0.5 * (lo + hi);
                if product_at(mid)? < threshold {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            Ok(Some(0.5 * (lo + hi)))
        }
        None => {
            let frac = (a.product - threshold) / (a.product - b.product);
            Ok(Some(lo + frac * (hi - lo)))
        }
    }
}

/// Least-squares line through `(ln t, ln product)` for samples with
/// `t_lo <= t <= t_hi`.
pub fn fit_decay(series: &CurveSeries, window: (f64, f64)) -> Result<DecayFit> {
    let (t_lo, t_hi) = window;
    let pts: Vec<&SeriesEntry> = series
        .entries
        .iter()
        .filter(|e| e.t > 0.0 && e.t >= t_lo && e.t <= t_hi)
        .collect();
    if pts.len() < 5 {
        return Err(Error::InsufficientSamples {
            needed: 5,
            found: pts.len(),
        });
    }
    if let Some(e) = pts.iter().find(|e| !(e.product > 0.0)) {
        return Err(Error::NonPositiveProduct {
            t: e.t,
            value: e.product,
        });
    }
    let xs: Vec<f64> = pts.iter().map(|e| e.t.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|e| e.product.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(DecayFit {
        amplitude: intercept.exp(),
        exponent: slope,
        window,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series_from(points: &[(f64, f64)]) -> CurveSeries {
        CurveSeries {
            meta: SeriesMeta {
                state: "test".into(),
                k: None,
                delta: None,
                estimator: Estimator::DensityForm,
                grid: GridSummary {
                    x_min: -1.0,
                    dx: 0.1,
                    n: 20,
                },
            },
            entries: points
                .iter()
                .map(|&(t, p)| SeriesEntry::new(t, p, 1.0, None))
                .collect(),
            fit: None,
        }
    }

    #[test]
    fn time_grids() {
        assert_eq!(linear_times(3.0, 4), vec![0.0, 1.0, 2.0, 3.0]);
        let lt = log_times(1.0, 100.0, 3);
        assert_eq!(lt[0], 0.0);
        assert!((lt[1] - 1.0).abs() < 1e-12 && (lt[2] - 10.0).abs() < 1e-12);
        assert_eq!(lt[3], 100.0);
    }

    #[test]
    fn fit_recovers_gaussian_tail() {
        let ts = log_times(10.0, 100.0, 30);
        let pts: Vec<(f64, f64)> = ts.iter().map(|&t| (t, 4.0 / (1.0 + t * t))).collect();
        let fit = fit_decay(&series_from(&pts), (10.0, 100.0)).unwrap();
        assert!((fit.exponent + 2.0).abs() < 5e-3, "{}", fit.exponent);
        assert!((fit.amplitude - 4.0).abs() < 0.08, "{}", fit.amplitude);
    }

    #[test]
    fn fit_of_constant_is_flat() {
        let pts: Vec<(f64, f64)> = (1..=8).map(|i| (i as f64, 3.0)).collect();
        let fit = fit_decay(&series_from(&pts), (1.0, 8.0)).unwrap();
        assert!(fit.exponent.abs() < 1e-12);
        assert!((fit.amplitude - 3.0).abs() < 1e-12);
        assert!(fit.residual < 1e-12);
    }

    #[test]
    fn fit_errors() {
        let pts = [(1.0, 1.0), (2.0, 0.5), (3.0, 0.3)];
        assert!(matches!(
            fit_decay(&series_from(&pts), (1.0, 3.0)),
            Err(Error::InsufficientSamples { found: 3, .. })
        ));
        let pts: Vec<(f64, f64)> = (1..=6).map(|i| (i as f64, if i == 4 { 0.0 } else { 1.0 })).collect();
        assert!(matches!(
            fit_decay(&series_from(&pts), (1.0, 6.0)),
            Err(Error::NonPositiveProduct { .. })
        ));
    }

    #[test]
    fn crossing_with_and_without_refinement() {
        let f = |t: f64| 36.0 / (1.0 + t * t);
        let pts: Vec<(f64, f64)> = linear_times(10.0, 41).into_iter().map(|t| (t, f(t))).collect();
        let s = series_from(&pts);
        let mut eval = |t: f64| Ok(f(t));
        let refined = crossing_time(&s, 4.0, Some(&mut eval)).unwrap().unwrap();
        assert!((refined - 8f64.sqrt()).abs() < 1e-5);
        let interp = crossing_time(&s, 4.0, None).unwrap().unwrap();
        assert!((interp - 8f64.sqrt()).abs() < 0.05);

        let flat = series_from(&[(0.0, 5.0), (1.0, 5.0)]);
        assert_eq!(crossing_time(&flat, 4.0, None).unwrap(), None);
        let below = series_from(&[(0.0, 3.0), (1.0, 2.0)]);
        assert_eq!(crossing_time(&below, 4.0, None).unwrap(), Some(0.0));
        assert!(crossing_time(&series_from(&[]), 4.0, None).is_err());
    }

    #[test]
    fn csv_layout() {
        let mut s = series_from(&[(0.0, 4.0), (1.0, 2.0)]);
        s.attach_analytic(|t| if t == 0.0 { Some(4.0) } else { None });
        let csv = s.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        assert_eq!(
            lines.next(),
            Some("0.0000000000000000e0,4.0000000000000000e0,1.0000000000000000e0,4.0000000000000000e0,4.0000000000000000e0,0.0000000000000000e0")
        );
        assert!(lines.next().unwrap().ends_with(",,"));
        assert!(csv.ends_with('\n') && !csv.contains('\r'));
        assert_eq!(parse_csv(&csv).unwrap(), s.entries);
        assert!(parse_csv("t,x\n").is_err());
    }
}
