use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use fisherlab::series::CurveSeries;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }

    /// Format implied by a file extension, if recognized.
    pub fn from_path(path: &Path) -> Option<Format> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "csv" => Some(Format::Csv),
            "json" => Some(Format::Json),
            _ => None,
        }
    }
}

impl FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Format> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(CliError::Usage(format!("unknown format `{other}`"))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.extension())
    }
}

pub fn render(series: &CurveSeries, format: Format) -> Result<String> {
    Ok(match format {
        Format::Csv => series.to_csv(),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(series)
                .map_err(|e| CliError::Usage(format!("cannot encode series: {e}")))?;
            s.push('\n');
            s
        }
    })
}

/// Writes to `out`, or to stdout when no path is given.
pub fn emit(body: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, body).map_err(|e| CliError::io(path, e)),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(body.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::io("<stdout>", e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use fisherlab::fisher::Estimator;
    use fisherlab::series::{parse_csv, GridSummary, SeriesEntry, SeriesMeta};

    fn series() -> CurveSeries {
        CurveSeries {
            meta: SeriesMeta {
                state: "gaussian(1)".into(),
                k: Some(0),
                delta: Some(1.0),
                estimator: Estimator::DensityForm,
                grid: GridSummary {
                    x_min: -5.0,
                    dx: 0.1,
                    n: 100,
                },
            },
            entries: vec![
                SeriesEntry::new(0.0, 2.0, 2.0, Some(4.0)),
                SeriesEntry::new(1.0, 1.0, 2.0, None),
            ],
            fit: None,
        }
    }

    #[test]
    fn csv_and_json_share_field_names() {
        let s = series();
        let csv = render(&s, Format::Csv).unwrap();
        assert!(csv.starts_with("t,ix,ip,product,analytic_product,rel_err\n"));
        assert_eq!(parse_csv(&csv).unwrap(), s.entries);
        let json: serde_json::Value = serde_json::from_str(&render(&s, Format::Json).unwrap()).unwrap();
        assert!(json.get("fit").is_none());
        let e = &json["entries"][0];
        for key in ["t", "ix", "ip", "product", "analytic_product", "rel_err"] {
            assert!(e.get(key).is_some(), "{key}");
        }
        assert_eq!(json["meta"]["estimator"], "density_form");
        let back: CurveSeries = serde_json::from_value(json).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn formats() {
        assert_eq!("JSON".parse::<Format>().unwrap(), Format::Json);
        assert!("xml".parse::<Format>().is_err());
        assert_eq!(Format::from_path(Path::new("a/b.json")), Some(Format::Json));
        assert_eq!(Format::from_path(Path::new("b.txt")), None);
    }
}
