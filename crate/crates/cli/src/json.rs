//! Deterministic JSON output and tolerant input parsing.
//!
//! Every float is written as 17 significant digits in scientific notation so
//! repeated runs are byte-identical and values round-trip exactly.

use serde_json::Value;
use spherelight::IlluminationParams;

pub enum J {
    Int(i64),
    Num(f64),
    Bool(bool),
    Arr(Vec<J>),
    Obj(Vec<(&'static str, J)>),
}

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn render(j: &J) -> String {
    let mut out = String::new();
    write_value(j, 0, &mut out);
    out.push('\n');
    out
}

fn is_scalar(j: &J) -> bool {
    matches!(j, J::Int(_) | J::Num(_) | J::Bool(_))
}

fn push_indent(levels: usize, out: &mut String) {
    for _ in 0..levels {
        out.push_str("  ");
    }
}

fn write_value(j: &J, indent: usize, out: &mut String) {
    match j {
        J::Int(v) => out.push_str(&v.to_string()),
        J::Num(v) => out.push_str(&fmt_f64(*v)),
        J::Bool(v) => out.push_str(if *v { "true" } else { "false" }),
        J::Arr(items) => {
            if items.iter().all(is_scalar) {
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_value(item, indent, out);
                }
                out.push(']');
            } else {
                out.push_str("[\n");
                for (i, item) in items.iter().enumerate() {
                    push_indent(indent + 1, out);
                    write_value(item, indent + 1, out);
                    if i + 1 < items.len() {
                        out.push(',');
                    }
                    out.push('\n');
                }
                push_indent(indent, out);
                out.push(']');
            }
        }
        J::Obj(fields) => {
            out.push_str("{\n");
            for (i, (key, value)) in fields.iter().enumerate() {
                push_indent(indent + 1, out);
                out.push('"');
                out.push_str(key);
                out.push_str("\": ");
                write_value(value, indent + 1, out);
                if i + 1 < fields.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            push_indent(indent, out);
            out.push('}');
        }
    }
}

pub fn num_array(values: &[f64]) -> J {
    J::Arr(values.iter().map(|&v| J::Num(v)).collect())
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value, String> {
    v.get(key).ok_or_else(|| format!("missing field \"{key}\""))
}

fn as_usize(v: &Value, key: &str) -> Result<usize, String> {
    field(v, key)?
        .as_u64()
        .map(|n| n as usize)
        .ok_or_else(|| format!("field \"{key}\" must be a non-negative integer"))
}

fn as_f64_slice(v: &Value, key: &str, len: usize) -> Result<Vec<f64>, String> {
    let arr = field(v, key)?
        .as_array()
        .ok_or_else(|| format!("field \"{key}\" must be an array"))?;
    if arr.len() != len {
        return Err(format!(
            "field \"{key}\" must have {len} entries, found {}",
            arr.len()
        ));
    }
    arr.iter()
        .map(|x| {
            x.as_f64()
                .ok_or_else(|| format!("field \"{key}\" holds a non-numeric entry"))
        })
        .collect()
}

/// Parses an illumination parameter file. Fields beyond the required five
/// (bookkeeping like "fraction"/"weighted") are ignored.
pub fn parse_params(bytes: &[u8]) -> Result<IlluminationParams, String> {
    let v: Value = serde_json::from_slice(bytes).map_err(|e| e.to_string())?;
    let n = as_usize(&v, "n")?;
    let rows = field(&v, "distribution")?
        .as_array()
        .ok_or_else(|| "field \"distribution\" must be an array".to_string())?;
    if rows.len() != 3 {
        return Err(format!(
            "field \"distribution\" must have 3 channels, found {}",
            rows.len()
        ));
    }
    let mut distribution: [Vec<f64>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    for (ch, row) in rows.iter().enumerate() {
        let weights = row
            .as_array()
            .ok_or_else(|| format!("distribution channel {ch} must be an array"))?;
        if weights.len() != n {
            return Err(format!(
                "distribution channel {ch} must have {n} entries, found {}",
                weights.len()
            ));
        }
        distribution[ch] = weights
            .iter()
            .map(|x| {
                x.as_f64()
                    .ok_or_else(|| format!("distribution channel {ch} holds a non-numeric entry"))
            })
            .collect::<Result<_, _>>()?;
    }
    let intensity = as_f64_slice(&v, "intensity", 3)?;
    let ambient = as_f64_slice(&v, "ambient", 3)?;
    let params = IlluminationParams {
        n,
        distribution,
        intensity: [intensity[0], intensity[1], intensity[2]],
        ambient: [ambient[0], ambient[1], ambient[2]],
    };
    params.validate().map_err(|e| e.to_string())?;
    Ok(params)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_carry_seventeen_significant_digits_and_round_trip() {
        let mut state = 0x1234_5678_9abc_def0u64;
        for _ in 0..2000 {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            let v = (state as f64 / u64::MAX as f64 - 0.5) * 1e6;
            let s = fmt_f64(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
        }
        assert_eq!(fmt_f64(0.5), "5.0000000000000000e-1");
        assert_eq!(fmt_f64(-3.0), "-3.0000000000000000e0");
    }

    #[test]
    fn scalar_arrays_stay_on_one_line() {
        let doc = J::Obj(vec![
            ("n", J::Int(2)),
            ("rows", J::Arr(vec![num_array(&[1.0, 2.0]), num_array(&[0.0, 0.5])])),
            ("flag", J::Bool(true)),
        ]);
        let text = render(&doc);
        assert_eq!(
            text,
            "{\n  \"n\": 2,\n  \"rows\": [\n    [1.0000000000000000e0, 2.0000000000000000e0],\n    [0.0000000000000000e0, 5.0000000000000000e-1]\n  ],\n  \"flag\": true\n}\n"
        );
        serde_json::from_str::<Value>(&text).unwrap();
    }

    #[test]
    fn params_round_trip_through_the_writer_and_parser() {
        let doc = J::Obj(vec![
            ("n", J::Int(2)),
            ("fraction", J::Num(0.05)),
            ("weighted", J::Bool(false)),
            (
                "distribution",
                J::Arr(vec![
                    num_array(&[0.25, 0.75]),
                    num_array(&[0.5, 0.5]),
                    num_array(&[1.0, 0.0]),
                ]),
            ),
            ("intensity", num_array(&[3.0, 2.0, 1.0])),
            ("ambient", num_array(&[0.1, 0.1, 0.2])),
        ]);
        let params = parse_params(render(&doc).as_bytes()).unwrap();
        assert_eq!(params.n, 2);
        assert_eq!(params.distribution[0], vec![0.25, 0.75]);
        assert_eq!(params.intensity, [3.0, 2.0, 1.0]);
        assert_eq!(params.ambient, [0.1, 0.1, 0.2]);
    }

    #[test]
    fn parser_reports_structural_problems() {
        assert!(parse_params(b"not json").is_err());
        assert!(parse_params(b"{\"n\": 2}").unwrap_err().contains("distribution"));
        let short = b"{\"n\": 2, \"distribution\": [[1.0, 0.0], [1.0, 0.0]], \"intensity\": [1,1,1], \"ambient\": [0,0,0]}";
        assert!(parse_params(short).unwrap_err().contains("3 channels"));
        let unnormalized = b"{\"n\": 2, \"distribution\": [[0.9, 0.0], [1.0, 0.0], [1.0, 0.0]], \"intensity\": [1,1,1], \"ambient\": [0,0,0]}";
        assert!(parse_params(unnormalized).is_err());
    }
}
