use std::io::Write;
use std::path::Path;

/// Nine significant digits: fixed notation for moderate magnitudes,
/// scientific otherwise. `-0` prints as `0`.
pub fn sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.8e}");
    let exp: i32 = sci[sci.find('e').expect("exponent") + 1..].parse().expect("integer exponent");
    if (-5..15).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        sci
    }
}

pub fn csv_field(x: Option<f64>) -> String {
    x.map(sig9).unwrap_or_default()
}

/// Comma-separated CSV with LF line endings.
pub fn csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        s.push_str(&r.join(","));
        s.push('\n');
    }
    s
}

/// Writes through a temporary file in the target directory and renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
