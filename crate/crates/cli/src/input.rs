//! Reading charts, deformations, loops and complex numbers from flags.
//!
//! Every JSON-valued flag takes either inline JSON or a path to a file.

use std::fs;

use cameral_core::cameral::{
    CameralChart, ChartSpec, Deformation, DeformationSpec, SolveOptions,
};
use num_complex::Complex64 as C;
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::error::CliError;

/// Inline JSON (first non-blank character `{` or `[`) or a file path.
pub fn read_json<T: DeserializeOwned>(arg: &str, what: &str) -> Result<T, CliError> {
    let trimmed = arg.trim_start();
    let (text, source) = if trimmed.starts_with('{') || trimmed.starts_with('[') {
        (arg.to_string(), format!("{what} (inline)"))
    } else {
        let text = fs::read_to_string(arg)
            .map_err(|e| CliError::validation(format!("{what}: cannot read `{arg}`: {e}")))?;
        (text, format!("{what} ({arg})"))
    };
    serde_json::from_str(&text).map_err(|e| CliError::json(&source, &e))
}

/// Chart source shared by the chart-based subcommands.
#[derive(clap::Args, Debug, Clone)]
pub struct ChartArgs {
    /// Chart JSON `{"group": .., "beta": [[[re, im], ..], ..]}`, inline or a path.
    #[arg(long, conflicts_with_all = ["group", "beta"])]
    pub chart: Option<String>,
    /// Group name (A1, A2, B2, G2); used together with --beta.
    #[arg(long, requires = "beta")]
    pub group: Option<String>,
    /// Coefficient arrays of beta, low to high degree, inline or a path.
    #[arg(long, requires = "group")]
    pub beta: Option<String>,
}

impl ChartArgs {
    pub fn spec(&self) -> Result<ChartSpec, CliError> {
        match (&self.chart, &self.group, &self.beta) {
            (Some(c), _, _) => read_json(c, "chart"),
            (None, Some(g), Some(b)) => Ok(ChartSpec {
                group: g.clone(),
                beta: read_json(b, "beta")?,
            }),
            _ => Err(CliError::validation("a chart is required: pass --chart or --group with --beta")),
        }
    }

    pub fn load(&self, seed: Option<u64>) -> Result<CameralChart, CliError> {
        let chart = CameralChart::from_spec(&self.spec()?)?;
        Ok(match seed {
            Some(seed) => chart.with_options(SolveOptions {
                seed,
                ..SolveOptions::default()
            }),
            None => chart,
        })
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum DeformationInput {
    Spec(DeformationSpec),
    Bare(Vec<Vec<[f64; 2]>>),
}

/// `{"gamma": [...]}` or the bare coefficient arrays.
pub fn read_deformation(arg: &str, what: &str, rank: usize) -> Result<Deformation, CliError> {
    let spec = match read_json::<DeformationInput>(arg, what)? {
        DeformationInput::Spec(s) => s,
        DeformationInput::Bare(gamma) => DeformationSpec { gamma },
    };
    if spec.gamma.len() != rank {
        return Err(CliError::validation(format!(
            "{what}: expected {rank} components, got {}",
            spec.gamma.len()
        )));
    }
    Ok(Deformation::from_spec(&spec))
}

/// Complex number as `a`, `bi`, `a+bi`, `a-bi` (also `j`) or `[a, b]`.
pub fn parse_complex(s: &str) -> Result<C, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if t.starts_with('[') {
        let [re, im]: [f64; 2] = serde_json::from_str(&t).map_err(|e| format!("`{s}`: {e}"))?;
        return Ok(C::new(re, im));
    }
    let bad = || format!("`{s}` is not a complex number (expected forms: 1.5, -2i, 1.0+0.5i, [1.0, 0.5])");
    if t.is_empty() {
        return Err(bad());
    }
    let imag = |body: &str| -> Result<f64, String> {
        match body {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            b => b.parse::<f64>().map_err(|_| bad()),
        }
    };
    let Some(body) = t.strip_suffix('i').or_else(|| t.strip_suffix('j')) else {
        return t.parse::<f64>().map(|re| C::new(re, 0.0)).map_err(|_| bad());
    };
    // Split at the last sign that is neither leading nor part of an exponent.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    match split {
        Some(k) => {
            let re = body[..k].parse::<f64>().map_err(|_| bad())?;
            Ok(C::new(re, imag(&body[k..])?))
        }
        None => Ok(C::new(0.0, imag(body)?)),
    }
}

/// Loop vertices as `[[re, im], ...]`, inline or a path.
pub fn read_loop(arg: &str) -> Result<Vec<C>, CliError> {
    let pts: Vec<[f64; 2]> = read_json(arg, "loop")?;
    if pts.is_empty() {
        return Err(CliError::validation("loop: at least one vertex is required"));
    }
    Ok(pts.into_iter().map(|[re, im]| C::new(re, im)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_forms() {
        let cases = [
            ("1.0+0.5i", C::new(1.0, 0.5)),
            ("-2i", C::new(0.0, -2.0)),
            ("3", C::new(3.0, 0.0)),
            ("i", C::new(0.0, 1.0)),
            ("-1-i", C::new(-1.0, -1.0)),
            ("1e-3+2e+1j", C::new(1e-3, 20.0)),
            ("[4, -1]", C::new(4.0, -1.0)),
            (" 2 - 0.25i ", C::new(2.0, -0.25)),
        ];
        for (s, want) in cases {
            assert_eq!(parse_complex(s).unwrap(), want, "{s}");
        }
    }

    #[test]
    fn rejects_garbage() {
        for s in ["", "abc", "1+2", "1+xi", "[1]"] {
            assert!(parse_complex(s).is_err(), "{s}");
        }
    }

    #[test]
    fn malformed_chart_reports_position() {
        let e = read_json::<ChartSpec>("{\"group\": \"A1\",\n \"beta\": [[[0, 0], [1 0]]]}", "chart").unwrap_err();
        assert_eq!(e.line, Some(2));
        assert!(e.column.is_some());
        assert!(e.message.contains("line 2"));
    }
}
