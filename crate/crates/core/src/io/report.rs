//! Scoring reports as JSON.
//!
//! ```text
//! {
//!   "csr": {"0.5": 0.9712, "0.6": 0.9655, ...},
//!   "mji": 0.7011,
//!   "recognition_rate": null,
//!   "videos": 50,
//!   "aggregation": "micro",
//!   "over_unity": [],
//!   "version": "0.1.0"
//! }
//! ```
//!
//! Scores carry exactly four decimals and keys always appear in this order,
//! so equal reports serialize to identical bytes.

use std::fmt::Write as _;

use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::metrics::{format_threshold, Aggregation, CsrReport};

pub const REPORT_KEYS: [&str; 7] = [
    "csr",
    "mji",
    "recognition_rate",
    "videos",
    "aggregation",
    "over_unity",
    "version",
];

fn score(x: Option<f64>) -> String {
    match x {
        Some(v) => format!("{v:.4}"),
        None => "null".to_owned(),
    }
}

pub fn write_report_json(report: &CsrReport) -> String {
    let mut out = String::from("{\n  \"csr\": {");
    for (i, (t, c)) in report.thresholds.iter().zip(&report.csr).enumerate() {
        let sep = if i == 0 { "" } else { ", " };
        write!(out, "{sep}\"{}\": {c:.4}", format_threshold(*t)).expect("writing to a String");
    }
    let over: Vec<String> = report.over_unity.iter().map(|t| format_threshold(*t)).collect();
    write!(
        out,
        "}},\n  \"mji\": {},\n  \"recognition_rate\": {},\n  \"videos\": {},\n  \"aggregation\": \"{}\",\n  \"over_unity\": [{}],\n  \"version\": \"{}\"\n}}\n",
        score(report.mji),
        score(report.recognition_rate),
        report.video_count,
        report.aggregation,
        over.join(", "),
        env!("CARGO_PKG_VERSION"),
    )
    .expect("writing to a String");
    out
}

/// A parsed report plus the tool version that wrote it.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedReport {
    pub report: CsrReport,
    pub version: String,
}

/// Position of the first `"key"` in `text`.
fn locate(text: &str, key: &str) -> (usize, usize) {
    let needle = format!("\"{key}\"");
    let Some(offset) = text.find(&needle) else {
        return (1, 1);
    };
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let line_start = before.rfind('\n').map_or(0, |i| i + 1);
    (line, before[line_start..].chars().count() + 1)
}

fn optional_score(obj: &Map<String, Value>, key: &str) -> std::result::Result<Option<f64>, String> {
    match &obj[key] {
        Value::Null => Ok(None),
        v => match v.as_f64() {
            Some(x) if x >= 0.0 => Ok(Some(x)),
            _ => Err(format!("expected a non-negative number or null, found {v}")),
        },
    }
}

fn threshold_key(key: &str) -> Option<f64> {
    key.parse::<f64>().ok().filter(|t| *t > 0.0 && *t <= 1.0)
}

pub fn parse_report_json(text: &str) -> Result<ParsedReport> {
    let field_error = |key: &str, msg: String| {
        let (line, column) = locate(text, key);
        Error::parse(line, column, format!("report field `{key}`: {msg}"))
    };
    // serde_json reports column 0 when the error sits on a line break
    let value: Value = serde_json::from_str(text)
        .map_err(|e| Error::parse(e.line().max(1), e.column().max(1), format!("invalid JSON: {e}")))?;
    let Value::Object(obj) = value else {
        return Err(Error::parse(1, 1, "report must be a JSON object"));
    };
    let keys: Vec<&str> = obj.keys().map(String::as_str).collect();
    if keys != REPORT_KEYS {
        return Err(Error::parse(
            1,
            1,
            format!("report keys must be {REPORT_KEYS:?} in that order, found {keys:?}"),
        ));
    }

    let Value::Object(csr_obj) = &obj["csr"] else {
        return Err(field_error("csr", "expected an object".to_owned()));
    };
    let mut thresholds = Vec::with_capacity(csr_obj.len());
    let mut csr = Vec::with_capacity(csr_obj.len());
    for (k, v) in csr_obj {
        thresholds.push(
            threshold_key(k).ok_or_else(|| field_error(k, "not a threshold in (0, 1]".to_owned()))?,
        );
        csr.push(
            v.as_f64()
                .filter(|c| *c >= 0.0)
                .ok_or_else(|| field_error(k, "expected a non-negative number".to_owned()))?,
        );
    }

    let video_count = obj["videos"]
        .as_u64()
        .ok_or_else(|| field_error("videos", "expected a non-negative integer".to_owned()))?
        as usize;
    let aggregation = obj["aggregation"]
        .as_str()
        .ok_or_else(|| field_error("aggregation", "expected a string".to_owned()))?
        .parse::<Aggregation>()
        .map_err(|e| field_error("aggregation", e.to_string()))?;
    let Value::Array(over) = &obj["over_unity"] else {
        return Err(field_error("over_unity", "expected an array".to_owned()));
    };
    let over_unity = over
        .iter()
        .map(|v| {
            v.as_f64()
                .filter(|t| *t > 0.0 && *t <= 1.0)
                .ok_or_else(|| field_error("over_unity", format!("`{v}` is not a threshold in (0, 1]")))
        })
        .collect::<Result<Vec<_>>>()?;
    let version = obj["version"]
        .as_str()
        .ok_or_else(|| field_error("version", "expected a string".to_owned()))?
        .to_owned();

    Ok(ParsedReport {
        report: CsrReport {
            thresholds,
            csr,
            mji: optional_score(&obj, "mji").map_err(|m| field_error("mji", m))?,
            recognition_rate: optional_score(&obj, "recognition_rate")
                .map_err(|m| field_error("recognition_rate", m))?,
            video_count,
            aggregation,
            over_unity,
        },
        version,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report() -> CsrReport {
        CsrReport {
            thresholds: vec![0.5, 0.6, 0.7, 0.8, 0.9],
            csr: vec![1.0; 5],
            mji: None,
            recognition_rate: None,
            video_count: 3,
            aggregation: Aggregation::Micro,
            over_unity: vec![],
        }
    }

    #[test]
    fn perfect_report_text() {
        let text = write_report_json(&report());
        assert!(text.starts_with(
            "{\n  \"csr\": {\"0.5\": 1.0000, \"0.6\": 1.0000, \"0.7\": 1.0000, \"0.8\": 1.0000, \"0.9\": 1.0000},\n  \"mji\": null,\n"
        ));
        assert!(text.contains("\"aggregation\": \"micro\""));
        assert!(text.contains(&format!("\"version\": \"{}\"", env!("CARGO_PKG_VERSION"))));
        let back = parse_report_json(&text).unwrap();
        assert_eq!(back.report, report());
    }

    #[test]
    fn rounded_values_round_trip() {
        let r = CsrReport {
            csr: vec![0.9712, 0.0, 1.3333, 0.5, 0.25],
            mji: Some(0.683),
            recognition_rate: Some(0.1),
            aggregation: Aggregation::Macro,
            over_unity: vec![0.6],
            ..report()
        };
        let text = write_report_json(&r);
        assert!(text.contains("\"mji\": 0.6830"));
        assert_eq!(parse_report_json(&text).unwrap().report, r);
        assert_eq!(write_report_json(&parse_report_json(&text).unwrap().report), text);
    }

    #[test]
    fn rejects_malformed() {
        let text = write_report_json(&report());
        let err = parse_report_json(&text.replacen("1.0000,", "1.0000,,", 1)).unwrap_err();
        match err {
            Error::Parse { position, .. } => assert_eq!(position.line, 2),
            e => panic!("{e}"),
        }
        assert!(parse_report_json(&text.replace("micro", "median")).is_err());
        assert!(parse_report_json(&text.replace("\"0.5\"", "\"1.5\"")).is_err());
        assert!(parse_report_json(&text.replace("\"videos\": 3", "\"videos\": -3")).is_err());
        assert!(parse_report_json("[]").is_err());
        match parse_report_json(&text.replace("\"videos\": 3", "\"videos\": \"3\"")).unwrap_err() {
            Error::Parse { position, message } => {
                assert_eq!((position.line, position.column), (5, 3));
                assert!(message.contains("videos"));
            }
            e => panic!("{e}"),
        }
        let reordered = text.replace("\"mji\": null,\n  \"recognition_rate\": null", "\"recognition_rate\": null,\n  \"mji\": null");
        assert!(parse_report_json(&reordered).is_err());
    }
}
