//! Machine-readable output: a small ordered JSON builder and CSV writing,
//! both with floats at 17 significant digits so every value round-trips and
//! identical configurations produce byte-identical bytes. Files are written
//! to a temporary sibling and renamed into place, so failures leave no
//! partial output behind.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

/// 17 significant digits: one leading digit plus 16 after the point.
pub fn format_float(value: f64) -> String {
    if value.is_finite() {
        format!("{value:.16e}")
    } else {
        // Reports never produce non-finite numbers; keep the JSON valid if
        // one ever slips through.
        "null".to_string()
    }
}

/// Ordered JSON value. Object keys keep insertion order, so serialization
/// is deterministic.
#[derive(Clone, Debug)]
pub enum Json {
    Null,
    Bool(bool),
    UInt(u64),
    Float(f64),
    Str(String),
    Array(Vec<Json>),
    Object(Vec<(&'static str, Json)>),
}

impl Json {
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.write(&mut out, 0);
        out
    }

    fn write(&self, out: &mut String, indent: usize) {
        match self {
            Json::Null => out.push_str("null"),
            Json::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            Json::UInt(u) => {
                let _ = write!(out, "{u}");
            }
            Json::Float(x) => out.push_str(&format_float(*x)),
            Json::Str(s) => {
                out.push('"');
                for c in s.chars() {
                    match c {
                        '"' => out.push_str("\\\""),
                        '\\' => out.push_str("\\\\"),
                        '\n' => out.push_str("\\n"),
                        '\r' => out.push_str("\\r"),
                        '\t' => out.push_str("\\t"),
                        c if (c as u32) < 0x20 => {
                            let _ = write!(out, "\\u{:04x}", c as u32);
                        }
                        c => out.push(c),
                    }
                }
                out.push('"');
            }
            Json::Array(items) => {
                if items.is_empty() {
                    out.push_str("[]");
                    return;
                }
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    newline_indent(out, indent + 1);
                    item.write(out, indent + 1);
                }
                newline_indent(out, indent);
                out.push(']');
            }
            Json::Object(fields) => {
                if fields.is_empty() {
                    out.push_str("{}");
                    return;
                }
                out.push('{');
                for (i, (key, value)) in fields.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    newline_indent(out, indent + 1);
                    let _ = write!(out, "\"{key}\": ");
                    value.write(out, indent + 1);
                }
                newline_indent(out, indent);
                out.push('}');
            }
        }
    }
}

fn newline_indent(out: &mut String, indent: usize) {
    out.push('\n');
    for _ in 0..indent {
        out.push_str("  ");
    }
}

pub fn obj(fields: Vec<(&'static str, Json)>) -> Json {
    Json::Object(fields)
}

/// CSV with a fixed header; floats use the same 17-significant-digit form.
pub struct Csv {
    buffer: String,
    columns: usize,
}

impl Csv {
    pub fn new(header: &str) -> Self {
        let columns = header.split(',').count();
        let mut buffer = String::new();
        buffer.push_str(header);
        buffer.push('\n');
        Csv { buffer, columns }
    }

    pub fn row(&mut self, cells: &[CsvCell]) {
        assert_eq!(cells.len(), self.columns, "row width must match the header");
        for (i, cell) in cells.iter().enumerate() {
            if i > 0 {
                self.buffer.push(',');
            }
            match cell {
                CsvCell::Float(x) => self.buffer.push_str(&format_float(*x)),
                CsvCell::UInt(u) => {
                    let _ = write!(self.buffer, "{u}");
                }
                CsvCell::Str(s) => self.buffer.push_str(s),
            }
        }
        self.buffer.push('\n');
    }

    pub fn into_string(self) -> String {
        self.buffer
    }
}

pub enum CsvCell<'a> {
    Float(f64),
    UInt(u64),
    Str(&'a str),
}

/// Writes via a temporary sibling plus rename; no partial files on error.
pub fn write_atomic(path: &Path, contents: &str) -> io::Result<()> {
    let directory = path.parent().filter(|p| !p.as_os_str().is_empty());
    let file_name = path
        .file_name()
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "output path has no file name"))?;
    let mut temp = file_name.to_os_string();
    temp.push(".tmp");
    let temp_path = match directory {
        Some(dir) => dir.join(&temp),
        None => Path::new(&temp).to_path_buf(),
    };
    fs::write(&temp_path, contents)?;
    match fs::rename(&temp_path, path) {
        Ok(()) => Ok(()),
        Err(e) => {
            let _ = fs::remove_file(&temp_path);
            Err(e)
        }
    }
}
