//! JSON and CSV emission. Floats carry 17 significant digits, the `%.17g`
//! form, so every printed value parses back to the same `f64`.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::Formatter;
use serde_json::Value;

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// `%.17g`: fixed notation for exponents in `[-4, 17)`, else scientific,
/// trailing zeros removed.
pub fn fmt_f64(v: f64) -> String {
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{v:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..17).contains(&exp) {
        let fixed = format!("{:.*}", (16 - exp) as usize, v);
        trim_zeros(&fixed).to_string()
    } else {
        format!("{}e{}", trim_zeros(mantissa), exp)
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

struct Digits17;

impl Formatter for Digits17 {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(fmt_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// One-line JSON with the float formatter above.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Digits17);
    value.serialize(&mut ser).expect("in-memory serialization");
    String::from_utf8(buf).expect("serde_json writes UTF-8")
}

fn flatten(prefix: &str, v: &Value, rows: &mut Vec<(String, String)>) {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match v {
        Value::Object(map) => map.iter().for_each(|(k, x)| flatten(&key(k), x, rows)),
        Value::Array(items) => items
            .iter()
            .enumerate()
            .for_each(|(i, x)| flatten(&key(&i.to_string()), x, rows)),
        Value::Null => rows.push((prefix.to_string(), String::new())),
        Value::Bool(b) => rows.push((prefix.to_string(), b.to_string())),
        Value::String(s) => rows.push((prefix.to_string(), s.clone())),
        Value::Number(n) => {
            let text = match (n.as_i64(), n.as_u64(), n.as_f64()) {
                (Some(i), _, _) => i.to_string(),
                (_, Some(u), _) => u.to_string(),
                (_, _, Some(f)) => fmt_f64(f),
                _ => n.to_string(),
            };
            rows.push((prefix.to_string(), text));
        }
    }
}

/// `key,value` rows, one per scalar leaf, keys as dotted paths.
pub fn to_csv<T: Serialize>(value: &T) -> Result<String, CliError> {
    // Reparse through the 17-digit text so leaves keep that precision.
    let v: Value = serde_json::from_str(&to_json(value)).expect("own output parses");
    let mut rows = Vec::new();
    flatten("", &v, &mut rows);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["key", "value"]).map_err(csv_err)?;
    for (k, x) in rows {
        w.write_record([k, x]).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::validation(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv writes UTF-8"))
}

pub fn csv_err(e: csv::Error) -> CliError {
    CliError::validation(format!("csv: {e}"))
}

pub fn render<T: Serialize>(value: &T, format: Format) -> Result<String, CliError> {
    match format {
        Format::Json => Ok(to_json(value) + "\n"),
        Format::Csv => to_csv(value),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digit_form() {
        assert_eq!(fmt_f64(0.25), "0.25");
        assert_eq!(fmt_f64(85.0), "85");
        assert_eq!(fmt_f64(0.1), "0.10000000000000001");
        assert_eq!(fmt_f64(-1.5e-300), "-1.5000000000000001e-300");
        assert_eq!(fmt_f64(-0.5e-300), "-5.0000000000000001e-301");
        assert_eq!(fmt_f64(1e20), "1e20");
        assert_eq!(fmt_f64(2.0f64.sqrt()), "1.4142135623730951");
    }

    #[test]
    fn printed_floats_round_trip() {
        for v in [std::f64::consts::PI, 1.0 / 3.0, 6.02214076e23, -7.25e-9, 123456.789] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn csv_flattens_nested_values() {
        let v = serde_json::json!({"a": [1, 2.5], "b": {"c": true}});
        let text = to_csv(&v).unwrap();
        assert_eq!(text, "key,value\na.0,1\na.1,2.5\nb.c,true\n");
    }
}
