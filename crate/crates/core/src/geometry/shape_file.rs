//! Plain-text shape files.
//!
//! ```text
//! # unit circle with a three-lobed bump
//! radius=1
//! cos_x_1=1
//! sin_y_1=1
//! cos_x_4=0.15
//! ```
//!
//! Keys are `radius`, `cos_x_k`, `sin_x_k`, `cos_y_k` and `sin_y_k`.
//! Missing coefficients are zero; `#` starts a comment.

use super::{BoundaryMap, TrigCoeffs};
use crate::error::{Error, Result};
use std::path::Path;

const MAX_DEGREE: usize = 256;

fn bad(key: &str, msg: impl Into<String>) -> Error {
    Error::ShapeFile { key: key.to_string(), msg: msg.into() }
}

/// Parses shape-file text into a certified boundary map.
pub fn parse_shape(text: &str) -> Result<BoundaryMap> {
    let mut radius = None;
    let mut c = TrigCoeffs::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(bad(line, format!("line {} is not key=value", lineno + 1)));
        };
        let key = key.trim();
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| bad(key, format!("cannot parse '{}' as a number", value.trim())))?;
        if !value.is_finite() {
            return Err(bad(key, "value must be finite"));
        }
        if key == "radius" {
            if radius.replace(value).is_some() {
                return Err(bad(key, "duplicate key"));
            }
            continue;
        }
        let (slot, deg) = coefficient_slot(&mut c, key).ok_or_else(|| bad(key, "unknown key"))?;
        if deg > MAX_DEGREE {
            return Err(bad(key, format!("degree above {MAX_DEGREE}")));
        }
        if slot.len() <= deg {
            slot.resize(deg + 1, 0.0);
        } else if slot[deg] != 0.0 {
            return Err(bad(key, "duplicate key"));
        }
        slot[deg] = value;
    }
    let radius = radius.ok_or_else(|| bad("radius", "missing"))?;
    if !(radius > 0.0) {
        return Err(bad("radius", "must be positive"));
    }
    BoundaryMap::new(radius, c).map_err(|e| bad("shape", e.to_string()))
}

fn coefficient_slot<'a>(c: &'a mut TrigCoeffs, key: &str) -> Option<(&'a mut Vec<f64>, usize)> {
    let (prefix, deg) = key.rsplit_once('_')?;
    if deg.is_empty() || !deg.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let deg: usize = deg.parse().ok()?;
    let slot = match prefix {
        "cos_x" => &mut c.cx,
        "sin_x" => &mut c.sx,
        "cos_y" => &mut c.cy,
        "sin_y" => &mut c.sy,
        _ => return None,
    };
    Some((slot, deg))
}

/// Reads and parses a shape file.
pub fn load_shape(path: &Path) -> Result<BoundaryMap> {
    let text = std::fs::read_to_string(path).map_err(|e| bad("path", format!("{}: {e}", path.display())))?;
    parse_shape(&text)
}
