//! JSON reports with 17-significant-digit floats.

use std::io::{self, Write};
use std::time::Duration;

use serde::Serialize;
use serde_json::ser::{Formatter, Serializer};
use serde_json::Value;

use crate::config::{ExperimentConfig, SCHEMA_VERSION};

/// Writes every float as `d.dddddddddddddddde±x`, 17 significant digits.
#[derive(Debug, Clone, Default)]
pub struct ExactFloats {
    pretty: serde_json::ser::PrettyFormatter<'static>,
}

impl Formatter for ExactFloats {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        write!(w, "{:.16e}", value as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.pretty.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.pretty.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.end_object_value(w)
    }
}

/// Pretty JSON with exact floats.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = Serializer::with_formatter(&mut out, ExactFloats::default());
    value.serialize(&mut ser).expect("serializing to memory cannot fail");
    out.push(b'\n');
    String::from_utf8(out).expect("serde_json emits UTF-8")
}

#[derive(Debug, Clone, Serialize)]
pub struct Tool {
    pub name: &'static str,
    pub version: &'static str,
}

pub const TOOL: Tool = Tool { name: "absum", version: env!("CARGO_PKG_VERSION") };

#[derive(Debug, Clone, Serialize)]
pub struct Timing {
    pub elapsed_seconds: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub suites: Vec<(String, f64)>,
}

/// One run: config echo, verdict, evidence and timing (always last).
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: &'static str,
    pub tool: Tool,
    pub command: &'static str,
    pub config: ExperimentConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<String>,
    pub result: Value,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub csv_files: Vec<String>,
    pub timing: Timing,
}

impl Report {
    pub fn new(config: ExperimentConfig, verdict: Option<String>, result: Value) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tool: TOOL,
            command: config.command.as_str(),
            config,
            verdict,
            result,
            csv_files: Vec::new(),
            timing: Timing { elapsed_seconds: 0.0, suites: Vec::new() },
        }
    }

    pub fn set_elapsed(&mut self, d: Duration) {
        self.timing.elapsed_seconds = d.as_secs_f64();
    }

    pub fn to_json(&self) -> String {
        to_json(self)
    }
}

/// Report text with the timing block removed, for byte comparisons.
pub fn without_timing(json: &str) -> String {
    match json.find("\n  \"timing\"") {
        Some(i) => json[..i].to_string(),
        None => json.to_string(),
    }
}

/// Evidence as a JSON value; floats keep full precision.
pub fn evidence<T: Serialize>(value: &T) -> Value {
    serde_json::to_value(value).expect("evidence is plain data")
}
