//! Reports: stable-ordered JSON and a plain table.

use serde::Serialize;

/// Rounds to ten significant digits.
pub fn sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.9e}").parse().unwrap_or(x)
}

pub fn sig_vec(v: &[f64]) -> Vec<f64> {
    v.iter().map(|&x| sig(x)).collect()
}

/// `+∞`/`−∞` print as strings in JSON.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let v = self.0;
        if v.is_finite() {
            s.serialize_f64(sig(v))
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub command: &'static str,
    pub status: &'static str,
    pub value: Num,
    pub lower_bound: Num,
    pub gap: Num,
    pub hyp: usize,
    pub nodes: usize,
    pub root_lower_bound: Num,
    pub point: Option<Vec<f64>>,
    pub time_s: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RelaxReport {
    pub command: &'static str,
    pub variant: &'static str,
    pub status: &'static str,
    pub lower_bound: Num,
    pub objective: Num,
    pub x: Vec<f64>,
    pub clip: Num,
    pub time_s: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BlockReport {
    pub factor: String,
    pub q: Vec<Vec<f64>>,
    pub r: Vec<f64>,
    pub w: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub higher: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Verification {
    pub max_coefficient_error: Num,
    pub all_dominant: bool,
    pub min_eigenvalue: Num,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecomposeReport {
    pub command: &'static str,
    pub kind: &'static str,
    pub n: usize,
    pub degree: u32,
    pub alpha: Num,
    pub blocks: Vec<BlockReport>,
    pub verification: Verification,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub command: &'static str,
    pub status: &'static str,
    pub value: Num,
    pub lower_bound: Num,
    pub oracle: Num,
    pub oracle_grid: usize,
    pub relative_error: Num,
    pub pass: bool,
}

pub fn to_json<T: Serialize>(r: &T) -> String {
    let mut s = serde_json::to_string_pretty(r).expect("reports serialize");
    s.push('\n');
    s
}

/// Two-column table of `(label, value)` rows.
pub fn table(rows: &[(&str, String)]) -> String {
    let width = rows.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0);
    let mut s = String::new();
    for (k, v) in rows {
        s.push_str(&format!("{k:<width$}  {v}\n"));
    }
    s
}

pub fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{:.6}", sig(x))
    } else {
        format!("{x}")
    }
}

pub fn fmt_point(x: &Option<Vec<f64>>) -> String {
    match x {
        Some(v) => format!(
            "[{}]",
            v.iter().map(|xi| format!("{:.6}", sig(*xi))).collect::<Vec<_>>().join(", ")
        ),
        None => "none".into(),
    }
}
