//! Plain-text serialisation: CSV, JSON, PGM, and atomic file writes.

use std::f64::consts::PI;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

use crate::CliError;
use quasiweb::HusimiField;

/// `%.15g`-style formatting: 15 significant digits, trailing zeros trimmed.
pub fn num(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.14e}");
    let (mantissa, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if (-5..15).contains(&exp) {
        let fixed = format!("{:.*}", (14 - exp) as usize, x);
        trim_zeros(&fixed)
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

/// JSON with keys in sorted order and a trailing newline.
pub fn json<T: Serialize>(value: &T) -> Result<String, CliError> {
    // round-tripping through `Value` sorts object keys
    let v = serde_json::to_value(value).map_err(|e| CliError::Io(e.to_string()))?;
    let mut s = serde_json::to_string_pretty(&v).map_err(|e| CliError::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// CSV with a leading `# config: {...}` comment line, then the header row.
pub fn csv(config: &Value, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut s = format!("# config: {config}\n");
    s.push_str(&header.join(","));
    s.push('\n');
    for row in rows {
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

/// Bilinear sample of a polar field at Cartesian `(x, p)`; zero beyond `r_max`.
fn sample(field: &HusimiField, x: f64, p: f64) -> f64 {
    let r_values = field.grid.r_values();
    let r = x.hypot(p);
    if r > field.grid.r_max() || r < r_values[0] {
        return 0.0;
    }
    let n_phi = field.grid.n_phi();
    let i = r_values.partition_point(|&v| v <= r).clamp(1, r_values.len() - 1) - 1;
    let tr = ((r - r_values[i]) / (r_values[i + 1] - r_values[i])).clamp(0.0, 1.0);
    let u = p.atan2(x).rem_euclid(2.0 * PI) / (2.0 * PI) * n_phi as f64;
    let j = (u.floor() as usize).min(n_phi - 1);
    let tp = u - j as f64;
    let k = (j + 1) % n_phi;
    let lo = field.at(i, j) * (1.0 - tp) + field.at(i, k) * tp;
    let hi = field.at(i + 1, j) * (1.0 - tp) + field.at(i + 1, k) * tp;
    lo * (1.0 - tr) + hi * tr
}

/// Plain (P2) greymap of `side × side` pixels over `[−r_max, r_max]²`, `P`
/// increasing upwards, values min–max scaled to `0..=65535`.
pub fn pgm(field: &HusimiField, config: &Value, side: usize) -> String {
    let extent = field.grid.r_max();
    let step = 2.0 * extent / side as f64;
    let mut pixels = Vec::with_capacity(side * side);
    for row in 0..side {
        let p = extent - (row as f64 + 0.5) * step;
        for col in 0..side {
            let x = -extent + (col as f64 + 0.5) * step;
            pixels.push(sample(field, x, p));
        }
    }
    let lo = pixels.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = pixels.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let scale = if hi > lo { 65535.0 / (hi - lo) } else { 0.0 };
    let mut s = format!("P2\n# config: {config}\n# range: {} {}\n{side} {side}\n65535\n", num(lo), num(hi));
    for row in pixels.chunks(side) {
        for line in row.chunks(10) {
            let cells: Vec<String> = line.iter().map(|v| (((v - lo) * scale).round() as u32).to_string()).collect();
            s.push_str(&cells.join(" "));
            s.push('\n');
        }
    }
    s
}

/// Writes to a temporary file beside `path`, then renames it into place.
pub fn write_atomic(path: &str, contents: &str) -> Result<(), CliError> {
    let target = Path::new(path);
    let name = target.file_name().ok_or_else(|| CliError::Io(format!("not a file path: {path}")))?;
    let tmp = target.with_file_name(format!(".{}.tmp-{}", name.to_string_lossy(), std::process::id()));
    let io = |e: std::io::Error| CliError::Io(format!("{path}: {e}"));
    let mut f = fs::File::create(&tmp).map_err(io)?;
    f.write_all(contents.as_bytes()).map_err(io)?;
    f.sync_all().map_err(io)?;
    drop(f);
    fs::rename(&tmp, target).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        io(e)
    })
}

/// Everything a command produces.
pub struct Emission {
    /// Primary payload in the requested format.
    pub main: String,
    /// Summary written as `<out>.report.json` when the payload is not JSON.
    pub companion: Option<String>,
    /// Set when the run completed but a check failed (exit code 1).
    pub failure: Option<String>,
}

/// Writes the payload (stdout when `out` is `None`), any companion report,
/// and the `<out>.run.json` sidecar holding wall-clock data. The sidecar is
/// the only file that differs between identical runs.
pub fn deliver(out: Option<&str>, emission: &Emission, started: SystemTime) -> Result<(), CliError> {
    let Some(path) = out else {
        std::io::stdout().write_all(emission.main.as_bytes()).map_err(|e| CliError::Io(e.to_string()))?;
        return Ok(());
    };
    write_atomic(path, &emission.main)?;
    if let Some(report) = &emission.companion {
        write_atomic(&format!("{path}.report.json"), report)?;
    }
    let unix = started.duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0);
    let elapsed = started.elapsed().map(|d| d.as_secs_f64()).unwrap_or(0.0);
    let sidecar = serde_json::json!({
        "started_unix": unix,
        "elapsed_seconds": elapsed,
        "version": env!("CARGO_PKG_VERSION"),
    });
    write_atomic(&format!("{path}.run.json"), &json(&sidecar)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use quasiweb::husimi::{husimi_field, FockState, PhaseRule};
    use quasiweb::{Params, PolarGrid};

    #[test]
    fn significant_digits() {
        assert_eq!(num(0.0), "0");
        assert_eq!(num(1.0), "1");
        assert_eq!(num(0.1), "0.1");
        assert_eq!(num(-2.5e-7), "-2.5e-7");
        assert_eq!(num(1.0 / 3.0), "0.333333333333333");
        assert_eq!(num(123_456_789.123_456_79), "123456789.123457");
        assert_eq!(num(6.02214076e23), "6.02214076e23");
        assert_eq!(num(f64::NAN), "nan");
        for x in [0.7651976865579666, 5.3176, 1e-300, -42.0] {
            let back: f64 = num(x).parse().unwrap();
            assert!(((back - x) / x).abs() < 1e-14);
        }
    }

    #[test]
    fn json_keys_sorted() {
        let v = serde_json::json!({"b": 1, "a": {"d": 2, "c": 3}});
        let s = json(&v).unwrap();
        assert!(s.find("\"a\"").unwrap() < s.find("\"b\"").unwrap());
        assert!(s.find("\"c\"").unwrap() < s.find("\"d\"").unwrap());
        assert!(s.ends_with("}\n"));
    }

    #[test]
    fn csv_layout() {
        let s = csv(&serde_json::json!({"mu": 4}), &["a", "b"], vec![vec!["1".into(), "2".into()]]);
        assert_eq!(s, "# config: {\"mu\":4}\na,b\n1,2\n");
    }

    #[test]
    fn vacuum_raster() {
        let p = Params::new(4, 0.0, 0.12, 10).unwrap();
        let grid = PolarGrid::new(2.0, 41, 16).unwrap();
        let f = husimi_field(&p, &FockState::number(0, 1), &grid, PhaseRule::None);
        let img = pgm(&f, &Value::Null, 8);
        let mut lines = img.lines();
        assert_eq!(lines.next(), Some("P2"));
        let values: Vec<u32> =
            img.lines().skip(5).flat_map(|l| l.split_whitespace().map(|t| t.parse::<u32>().unwrap())).collect();
        assert_eq!(values.len(), 64);
        assert_eq!(*values.iter().max().unwrap(), 65535);
        assert_eq!(*values.iter().min().unwrap(), 0);
        // the four centre pixels are brightest and equal
        for idx in [27, 28, 35, 36] {
            assert_eq!(values[idx], 65535);
        }
        assert!(img.lines().all(|l| l.len() <= 70 || l.starts_with('#')));
    }

    #[test]
    fn bilinear_exact_on_nodes() {
        let p = Params::new(4, 0.0, 0.12, 10).unwrap();
        let grid = PolarGrid::new(2.0, 21, 16).unwrap();
        let f = husimi_field(&p, &FockState::number(2, 3), &grid, PhaseRule::None);
        let (r, phi) = (grid.r_values()[7], grid.phi_values()[3]);
        let v = sample(&f, r * phi.cos(), r * phi.sin());
        assert!((v - f.at(7, 3)).abs() < 1e-12 * f.at(7, 3));
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = std::env::temp_dir().join(format!("quasiweb-out-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("x.txt");
        let p = path.to_str().unwrap();
        write_atomic(p, "one").unwrap();
        write_atomic(p, "two").unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "two");
        assert_eq!(fs::read_dir(&dir).unwrap().count(), 1);
        fs::remove_dir_all(&dir).unwrap();
    }
}
