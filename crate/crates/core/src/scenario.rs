//! Line-oriented `key = value` scenario files.
//!
//! ```text
//! kind = tracking
//! A = 0,1; 1,1
//! B = 1,1; 0,1
//! Q = 200,0; 0,400
//! R = 0.5,0; 0,0.25
//! t0 = 0
//! tf = inf
//! x0 = 5, 2
//! reference = sin:0,1:0.031415926535897934
//! ```
//!
//! Matrices are row-major with rows separated by `;` and entries by `,`.
//! `reference` is `zero`, `const:<v>`, `ramp:<v>` or `sin:<v>:<omega>`
//! with `<v>` a comma-separated vector; `A_profile`, `B_profile` and
//! `C_profile` are `const` or `recip_shift:<scale>:<shift>`. Text after
//! `#` is a comment.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::{Horizon, ProblemData, ProblemKind, Profile, ReferenceSignal, TimeMatrix};

const KEYS: [&str; 14] = [
    "kind", "A", "B", "C", "Q", "R", "F", "t0", "tf", "x0", "reference", "A_profile", "B_profile",
    "C_profile",
];

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn parse_real(s: &str, line: usize) -> Result<f64> {
    let s = s.trim();
    match s {
        "inf" | "+inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        _ => s.parse::<f64>().map_err(|_| parse_err(line, format!("not a number: {s:?}"))),
    }
}

fn parse_vector(s: &str, line: usize) -> Result<DVector<f64>> {
    let vals = s.split(',').map(|v| parse_real(v, line)).collect::<Result<Vec<_>>>()?;
    Ok(DVector::from_vec(vals))
}

fn parse_matrix(s: &str, line: usize) -> Result<DMatrix<f64>> {
    let rows = s
        .split(';')
        .map(|r| r.split(',').map(|v| parse_real(v, line)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let cols = rows[0].len();
    if rows.iter().any(|r| r.len() != cols) {
        return Err(parse_err(line, "ragged matrix rows"));
    }
    let flat: Vec<f64> = rows.concat();
    Ok(DMatrix::from_row_slice(rows.len(), cols, &flat))
}

fn parse_profile(s: &str, line: usize) -> Result<Profile> {
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    match parts.as_slice() {
        ["const"] => Ok(Profile::Const),
        ["recip_shift", scale, shift] => Ok(Profile::ReciprocalShift {
            scale: parse_real(scale, line)?,
            shift: parse_real(shift, line)?,
        }),
        _ => Err(parse_err(line, format!("unknown profile {s:?}"))),
    }
}

fn parse_reference(s: &str, line: usize) -> Result<Option<ReferenceSignal>> {
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    Ok(match parts.as_slice() {
        ["zero"] => None,
        ["const", v] => Some(ReferenceSignal::Constant(parse_vector(v, line)?)),
        ["ramp", v] => Some(ReferenceSignal::Ramp { slope: parse_vector(v, line)? }),
        ["sin", v, omega] => Some(ReferenceSignal::Sinusoid {
            amplitude: parse_vector(v, line)?,
            omega: parse_real(omega, line)?,
        }),
        _ => return Err(parse_err(line, format!("unknown reference {s:?}"))),
    })
}

/// Parses a scenario into an unvalidated problem.
pub fn parse_scenario(text: &str) -> Result<ProblemData> {
    let mut entries: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| parse_err(line, "expected `key = value`"))?;
        let (key, value) = (key.trim(), value.trim());
        let key = KEYS
            .iter()
            .find(|k| **k == key)
            .ok_or_else(|| parse_err(line, format!("unknown key {key:?}")))?;
        if value.is_empty() {
            return Err(parse_err(line, format!("empty value for {key}")));
        }
        if entries.insert(key, (line, value)).is_some() {
            return Err(parse_err(line, format!("duplicate key {key}")));
        }
    }
    let last_line = text.lines().count().max(1);
    let required = |key: &str| entries.get(key).copied().ok_or_else(|| parse_err(last_line, format!("missing key {key}")));

    let matrix = |key: &str| -> Result<Option<DMatrix<f64>>> {
        entries.get(key).map(|&(line, v)| parse_matrix(v, line)).transpose()
    };
    let profile = |key: &str| -> Result<Profile> {
        entries.get(key).map_or(Ok(Profile::Const), |&(line, v)| parse_profile(v, line))
    };
    let time_matrix = |key: &str, prof: &str| -> Result<Option<TimeMatrix>> {
        match matrix(key)? {
            Some(m) => Ok(Some(TimeMatrix::scaled(m, profile(prof)?))),
            None => Ok(None),
        }
    };

    let kind = match entries.get("kind") {
        None => ProblemKind::Regulation,
        Some(&(line, v)) => match v {
            "regulation" => ProblemKind::Regulation,
            "tracking" => ProblemKind::Tracking,
            _ => return Err(parse_err(line, format!("unknown kind {v:?}"))),
        },
    };
    let (a_line, _) = required("A")?;
    let (b_line, _) = required("B")?;
    required("Q")?;
    required("R")?;
    let a = time_matrix("A", "A_profile")?.ok_or_else(|| parse_err(a_line, "missing A"))?;
    let b = time_matrix("B", "B_profile")?.ok_or_else(|| parse_err(b_line, "missing B"))?;
    let c = time_matrix("C", "C_profile")?;
    if c.is_none() && entries.contains_key("C_profile") {
        return Err(parse_err(entries["C_profile"].0, "C_profile without C"));
    }
    let q = matrix("Q")?.unwrap_or_default();
    let r = matrix("R")?.unwrap_or_default();
    let f = matrix("F")?;
    let t0 = entries.get("t0").map_or(Ok(0.0), |&(line, v)| parse_real(v, line))?;
    let (tf_line, tf_text) = required("tf")?;
    let tf = parse_real(tf_text, tf_line)?;
    let horizon = if tf == f64::INFINITY {
        Horizon::Infinite { t0 }
    } else {
        Horizon::Finite { t0, tf }
    };
    let (x0_line, x0_text) = required("x0")?;
    let x0 = parse_vector(x0_text, x0_line)?;
    let reference = match entries.get("reference") {
        Some(&(line, v)) => parse_reference(v, line)?,
        None => None,
    };
    Ok(ProblemData { kind, a, b, c, q, r, f, horizon, x0, reference })
}

fn fmt_real(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v:?}")
    }
}

fn fmt_vector(v: &DVector<f64>) -> String {
    v.iter().map(|x| fmt_real(*x)).collect::<Vec<_>>().join(",")
}

fn fmt_matrix(m: &DMatrix<f64>) -> String {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| fmt_real(m[(i, j)])).collect::<Vec<_>>().join(","))
        .collect::<Vec<_>>()
        .join("; ")
}

fn fmt_profile(p: Profile) -> String {
    match p {
        Profile::Const => "const".into(),
        Profile::ReciprocalShift { scale, shift } => format!("recip_shift:{}:{}", fmt_real(scale), fmt_real(shift)),
    }
}

/// Writes a problem in scenario syntax; [`parse_scenario`] reads it back
/// unchanged.
pub fn format_scenario(data: &ProblemData) -> String {
    let mut out = String::new();
    let mut line = |k: &str, v: String| {
        out.push_str(k);
        out.push_str(" = ");
        out.push_str(&v);
        out.push('\n');
    };
    line(
        "kind",
        match data.kind {
            ProblemKind::Regulation => "regulation",
            ProblemKind::Tracking => "tracking",
        }
        .into(),
    );
    for (key, prof, tm) in [("A", "A_profile", Some(&data.a)), ("B", "B_profile", Some(&data.b)), ("C", "C_profile", data.c.as_ref())] {
        if let Some(tm) = tm {
            line(key, fmt_matrix(tm.base()));
            if !tm.is_time_invariant() {
                line(prof, fmt_profile(tm.profile()));
            }
        }
    }
    line("Q", fmt_matrix(&data.q));
    line("R", fmt_matrix(&data.r));
    if let Some(f) = &data.f {
        line("F", fmt_matrix(f));
    }
    line("t0", fmt_real(data.horizon.t0()));
    line("tf", fmt_real(data.horizon.tf().unwrap_or(f64::INFINITY)));
    line("x0", fmt_vector(&data.x0));
    line(
        "reference",
        match &data.reference {
            None => "zero".into(),
            Some(ReferenceSignal::Zero { .. }) => "zero".into(),
            Some(ReferenceSignal::Constant(v)) => format!("const:{}", fmt_vector(v)),
            Some(ReferenceSignal::Ramp { slope }) => format!("ramp:{}", fmt_vector(slope)),
            Some(ReferenceSignal::Sinusoid { amplitude, omega }) => {
                format!("sin:{}:{}", fmt_vector(amplitude), fmt_real(*omega))
            }
        },
    );
    out
}
