//! Canonical JSON and CSV output.
//!
//! Floats are written with 17 significant digits in scientific notation and
//! non-finite values become `null`, so a document parsed and printed again is
//! byte-identical.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::asymptotics::{density_at, normal_critical, zeta_at, AsymptoticConfig};
use crate::engine::{u_quantile, QuantileSpec};
use crate::{Error, Kernel, Result, Sample};

/// Pretty printer with fixed-width float formatting.
pub struct CanonicalFormatter<'a>(PrettyFormatter<'a>);

impl Default for CanonicalFormatter<'_> {
    fn default() -> Self {
        CanonicalFormatter(PrettyFormatter::with_indent(b"  "))
    }
}

impl Formatter for CanonicalFormatter<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_array(writer)
    }

    fn end_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object(writer)
    }

    fn end_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object_value(writer)
    }
}

/// Serializes `value` as canonical pretty JSON followed by a newline.
pub fn to_canonical_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, CanonicalFormatter::default());
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Io(e.to_string()))?;
    out.push(b'\n');
    Ok(String::from_utf8(out).expect("serde_json emits UTF-8"))
}

/// One value per line, same float format as the JSON output.
pub fn values_csv(values: &[f64]) -> String {
    let mut out = String::with_capacity(values.len() * 24);
    for v in values {
        out.push_str(&format!("{v:.16e}\n"));
    }
    out
}

/// Output of `uquantile estimate`. Field order is the canonical order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub point: f64,
    #[serde(rename = "N")]
    pub total_count: u64,
    pub rank: u64,
    pub tie_count: u64,
    pub zeta_hat: Option<f64>,
    pub density_hat: Option<f64>,
    pub std_error: Option<f64>,
    pub ci_lower: Option<f64>,
    pub ci_upper: Option<f64>,
    pub confidence_level: f64,
    pub bandwidth: Option<f64>,
    pub n: usize,
    pub dim: usize,
    pub degree: usize,
    pub kernel: String,
    pub p: f64,
    pub warnings: Vec<String>,
}

/// Builds the estimate report. The second element carries the hypothesis
/// violation (nonpositive `zeta_hat` or density) when the interval was
/// withheld; the report is still complete otherwise.
pub fn estimate_report(
    sample: &Sample,
    kernel: &dyn Kernel,
    spec: QuantileSpec,
    level: f64,
    cfg: &AsymptoticConfig,
) -> Result<(EstimateReport, Option<Error>)> {
    let z = normal_critical(level)?;
    let est = u_quantile(sample, kernel, spec, cfg.backend, &cfg.engine)?;
    let mut report = EstimateReport {
        point: est.value,
        total_count: est.total_count,
        rank: est.selected_rank,
        tie_count: est.tie_count,
        zeta_hat: None,
        density_hat: None,
        std_error: None,
        ci_lower: None,
        ci_upper: None,
        confidence_level: level,
        bandwidth: None,
        n: sample.len(),
        dim: sample.dim(),
        degree: kernel.degree(),
        kernel: kernel.name(),
        p: spec.p(),
        warnings: Vec::new(),
    };
    if est.tie_count > 1 {
        report
            .warnings
            .push(format!("{} kernel values tie at the estimate", est.tie_count));
    }

    let mut violation = None;
    match zeta_at(sample, kernel, est, cfg) {
        Ok(zeta) => {
            report.zeta_hat = Some(zeta.value);
            if zeta.subsampled {
                report
                    .warnings
                    .push("zeta_hat uses subsampled (m-1)-subsets".to_string());
            }
            if !zeta.is_positive() {
                report.warnings.push("zeta_hat is not positive".to_string());
                violation = Some(Error::Hypothesis {
                    hypothesis: "ζ > 0",
                    value: zeta.value,
                });
            }
        }
        Err(e @ Error::TooFewPoints { .. }) => {
            report.warnings.push(format!("zeta_hat unavailable: {e}"));
            violation = Some(e);
        }
        Err(e) => return Err(e),
    }
    match density_at(sample, kernel, est, cfg.bandwidth, cfg) {
        Ok(density) => {
            report.density_hat = Some(density.value);
            report.bandwidth = Some(density.bandwidth);
            if density.subsampled {
                report
                    .warnings
                    .push("density_hat uses a subsample of kernel values".to_string());
            }
            if !(density.value > 0.0) {
                report.warnings.push("density_hat is not positive".to_string());
                violation.get_or_insert(Error::Hypothesis {
                    hypothesis: "F'(H̃_p) > 0",
                    value: density.value,
                });
            }
        }
        Err(Error::Degenerate(msg)) => {
            report.warnings.push(format!("density_hat unavailable: {msg}"));
            violation.get_or_insert(Error::Hypothesis {
                hypothesis: "F'(H̃_p) > 0",
                value: f64::NAN,
            });
        }
        Err(e) => return Err(e),
    }

    if violation.is_none() {
        if let (Some(zeta), Some(f)) = (report.zeta_hat, report.density_hat) {
            let se = report.degree as f64 * zeta.sqrt() / (f * (report.n as f64).sqrt());
            report.std_error = Some(se);
            report.ci_lower = Some(report.point - z * se);
            report.ci_upper = Some(report.point + z * se);
        }
    }
    Ok((report, violation))
}
