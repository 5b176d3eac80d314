//! Plain-text run report.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Default, Clone)]
pub struct Report {
    text: String,
}

impl Report {
    pub fn new(title: &str) -> Self {
        let mut r = Report::default();
        r.line(title);
        r.line(&"=".repeat(title.chars().count()));
        r
    }

    pub fn section(&mut self, name: &str) {
        self.text.push('\n');
        self.line(&format!("[{name}]"));
    }

    pub fn line(&mut self, s: &str) {
        self.text.push_str(s);
        self.text.push('\n');
    }

    pub fn kv(&mut self, key: &str, value: impl std::fmt::Display) {
        let _ = writeln!(self.text, "{key:<28} {value}");
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }
}

pub fn matrix(m: &DMatrix<f64>) -> String {
    let rows: Vec<String> = m
        .row_iter()
        .map(|r| r.iter().map(|v| format!("{v:.6}")).collect::<Vec<_>>().join(", "))
        .collect();
    format!("[{}]", rows.join("; "))
}

pub fn vector(v: &DVector<f64>) -> String {
    format!("[{}]", v.iter().map(|x| format!("{x:.6}")).collect::<Vec<_>>().join(", "))
}

pub fn sci(v: f64) -> String {
    format!("{v:.3e}")
}

pub fn verdict(ok: bool) -> &'static str {
    if ok {
        "yes"
    } else {
        "no"
    }
}
