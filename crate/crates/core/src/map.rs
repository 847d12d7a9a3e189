//! The response map: an H×W grid of similarity values.
//!
//! Two on-disk encodings are supported:
//! - JSON grid: `{"height": H, "width": W, "data": [row-major numbers]}`
//! - CSV grid: H lines of W comma-separated numbers, no header

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A validated similarity grid. Values are stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseMap {
    height: usize,
    width: usize,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct GridFile {
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl ResponseMap {
    /// Builds a map, rejecting wrong lengths, non-finite entries and grids
    /// with fewer than two rows or columns.
    pub fn new(height: usize, width: usize, values: Vec<f64>) -> Result<Self> {
        if height < 2 || width < 2 {
            return Err(Error::InvalidMap(format!(
                "grid must be at least 2x2, got {height}x{width}"
            )));
        }
        let expected = height
            .checked_mul(width)
            .ok_or_else(|| Error::InvalidMap("grid dimensions overflow".into()))?;
        if values.len() != expected {
            return Err(Error::InvalidMap(format!(
                "expected {expected} values for a {height}x{width} grid, got {}",
                values.len()
            )));
        }
        if let Some(idx) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidMap(format!(
                "non-finite value {} at row {}, col {}",
                values[idx],
                idx / width,
                idx % width
            )));
        }
        Ok(Self {
            height,
            width,
            values,
        })
    }

    /// Builds a map from a closure evaluated at every `(row, col)`.
    pub fn from_fn(
        height: usize,
        width: usize,
        f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut f = f;
        let mut values = Vec::with_capacity(height.saturating_mul(width));
        for row in 0..height {
            for col in 0..width {
                values.push(f(row, col));
            }
        }
        Self::new(height, width, values)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }

    /// Applies `f` to every entry, re-validating the result.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(
            self.height,
            self.width,
            self.values.iter().map(|&v| f(v)).collect(),
        )
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let grid: GridFile = serde_json::from_str(text)
            .map_err(|e| Error::InvalidMap(format!("malformed JSON grid: {e}")))?;
        Self::new(grid.height, grid.width, grid.data)
    }

    pub fn from_json_slice(bytes: &[u8]) -> Result<Self> {
        let grid: GridFile = serde_json::from_slice(bytes)
            .map_err(|e| Error::InvalidMap(format!("malformed JSON grid: {e}")))?;
        Self::new(grid.height, grid.width, grid.data)
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut width = None;
        let mut values = Vec::new();
        let mut height = 0;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut count = 0;
            for field in line.split(',') {
                let field = field.trim();
                let v: f64 = field.parse().map_err(|_| {
                    Error::InvalidMap(format!(
                        "line {}: cannot parse `{field}` as a number",
                        lineno + 1
                    ))
                })?;
                values.push(v);
                count += 1;
            }
            match width {
                None => width = Some(count),
                Some(w) if w != count => {
                    return Err(Error::InvalidMap(format!(
                        "line {}: expected {w} columns, got {count}",
                        lineno + 1
                    )))
                }
                Some(_) => {}
            }
            height += 1;
        }
        Self::new(height, width.unwrap_or(0), values)
    }

    /// Loads a map, choosing CSV for `.csv` files and JSON otherwise.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let is_csv = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
        let parsed = if is_csv {
            Self::from_csv_str(&text)
        } else {
            Self::from_json_str(&text)
        };
        parsed.map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&GridFile {
            height: self.height,
            width: self.width,
            data: self.values.clone(),
        })
        .expect("finite f64 grid always serializes")
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        for row in self.values.chunks(self.width) {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json_string()).map_err(|e| Error::io(path, e))
    }
}
