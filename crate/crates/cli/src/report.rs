//! Report JSON: emitted by hand so that every real goes through
//! [`numfmt::real`], read back through `serde_json`.

use std::fmt::Write as _;

use sdot::numfmt;
use sdot::solver::SolveReport;
use sdot::{Error, Result, WeightVector};

fn number(x: f64) -> String {
    if x.is_finite() {
        numfmt::real(x)
    } else {
        "null".into()
    }
}

fn array(xs: &[f64]) -> String {
    let items: Vec<String> = xs.iter().map(|&x| number(x)).collect();
    format!("[{}]", items.join(", "))
}

pub fn to_json(report: &SolveReport) -> String {
    let mut s = String::from("{\n");
    let _ = writeln!(s, "  \"psi\": {},", array(&report.psi));
    let _ = writeln!(s, "  \"masses\": {},", array(&report.masses));
    let _ = writeln!(s, "  \"nu\": {},", array(&report.nu));
    let _ = writeln!(s, "  \"w2\": {},", number(report.w2));
    let _ = writeln!(s, "  \"iterations\": {},", report.iterations);
    let _ = writeln!(s, "  \"grad_norm\": {},", number(report.grad_norm));
    let _ = writeln!(s, "  \"converged\": {},", report.converged);
    if report.trace.is_empty() {
        s.push_str("  \"trace\": []\n");
    } else {
        s.push_str("  \"trace\": [\n");
        for (k, row) in report.trace.iter().enumerate() {
            let _ = write!(
                s,
                "    {{\"iter\": {}, \"grad_norm\": {}, \"tau\": {}, \"k_value\": {}}}",
                row.iter,
                number(row.grad_norm),
                number(row.tau),
                number(row.k_value)
            );
            s.push_str(if k + 1 < report.trace.len() { ",\n" } else { "\n" });
        }
        s.push_str("  ]\n");
    }
    s.push_str("}\n");
    s
}

/// Reads the `psi` array of a report, or a bare JSON array of numbers.
pub fn parse_psi(text: &str, origin: &str) -> Result<WeightVector> {
    let parse_err = |msg: String| Error::Parse {
        path: origin.to_string(),
        line: 0,
        msg,
    };
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Parse {
        path: origin.to_string(),
        line: e.line(),
        msg: e.to_string(),
    })?;
    let arr = match &value {
        serde_json::Value::Array(a) => a,
        serde_json::Value::Object(o) => match o.get("psi") {
            Some(serde_json::Value::Array(a)) => a,
            _ => return Err(parse_err("missing \"psi\" array".into())),
        },
        _ => return Err(parse_err("expected a report object or an array".into())),
    };
    arr.iter()
        .enumerate()
        .map(|(k, v)| {
            v.as_f64()
                .filter(|x| x.is_finite())
                .ok_or_else(|| parse_err(format!("psi[{k}] is not a finite number")))
        })
        .collect::<Result<Vec<f64>>>()
        .map(WeightVector)
}
