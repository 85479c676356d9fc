//! RFC-4180 CSV emission and the field interchange format.

use std::fs;
use std::io::Write;
use std::path::Path;

use semilab_core::{ScalarField, TorusGrid};

/// Shortest decimal that round-trips to the same f64.
pub fn fmt_f64(x: f64) -> String {
    let mut s = x.to_string();
    if !s.contains('.') && !s.contains('e') && !s.contains("NaN") && !s.contains("inf") {
        s.push_str(".0");
    }
    s
}

/// Write an RFC-4180 CSV (CRLF line endings, mandatory header row).
pub fn write_csv(
    path: &Path,
    header: &[&str],
    rows: &[Vec<String>],
) -> std::io::Result<()> {
    let mut out = Vec::new();
    out.extend_from_slice(header.join(",").as_bytes());
    out.extend_from_slice(b"\r\n");
    for row in rows {
        out.extend_from_slice(row.join(",").as_bytes());
        out.extend_from_slice(b"\r\n");
    }
    fs::write(path, out)
}

/// Write a sampled field as `ix,iy,value` rows, preceded by `#` comment
/// lines carrying the grid metadata. 1-D fields use `iy = 0`.
pub fn write_field_csv(path: &Path, u: &ScalarField) -> std::io::Result<()> {
    let g = u.grid;
    let mut f = fs::File::create(path)?;
    let mut out = Vec::new();
    out.extend_from_slice(format!("# dim={}\r\n", g.dim()).as_bytes());
    out.extend_from_slice(format!("# n_per_axis={}\r\n", g.n_per_axis()).as_bytes());
    out.extend_from_slice(b"ix,iy,value\r\n");
    for idx in 0..g.len() {
        let (ix, iy) = g.coords(idx);
        out.extend_from_slice(format!("{ix},{iy},{}\r\n", fmt_f64(u.values[idx])).as_bytes());
    }
    f.write_all(&out)
}

/// Read a field written by [`write_field_csv`].
pub fn read_field_csv(path: &Path) -> Result<ScalarField, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut dim = None;
    let mut n_per_axis = None;
    let mut rows = Vec::new();
    for line in text.lines() {
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let rest = rest.trim();
            if let Some(v) = rest.strip_prefix("dim=") {
                dim = Some(v.parse::<usize>().map_err(|e| format!("bad dim: {e}"))?);
            } else if let Some(v) = rest.strip_prefix("n_per_axis=") {
                n_per_axis =
                    Some(v.parse::<usize>().map_err(|e| format!("bad n_per_axis: {e}"))?);
            }
            continue;
        }
        if line == "ix,iy,value" {
            continue;
        }
        let mut parts = line.split(',');
        let ix: usize = parts
            .next()
            .ok_or("missing ix")?
            .parse()
            .map_err(|e| format!("bad ix: {e}"))?;
        let iy: usize = parts
            .next()
            .ok_or("missing iy")?
            .parse()
            .map_err(|e| format!("bad iy: {e}"))?;
        let value: f64 = parts
            .next()
            .ok_or("missing value")?
            .parse()
            .map_err(|e| format!("bad value: {e}"))?;
        rows.push((ix, iy, value));
    }
    let dim = dim.ok_or("missing '# dim=' header")?;
    let n = n_per_axis.ok_or("missing '# n_per_axis=' header")?;
    let grid = TorusGrid::new(dim, n).map_err(|e| e.to_string())?;
    let mut values = vec![f64::NAN; grid.len()];
    for (ix, iy, v) in rows {
        if ix >= n || (dim == 2 && iy >= n) {
            return Err(format!("index ({ix},{iy}) out of range for n={n}"));
        }
        values[grid.index(ix, iy)] = v;
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err("field CSV does not cover the full grid".into());
    }
    ScalarField::new(grid, values, "field").map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_exactly() {
        for x in [0.1, 1.0 / 3.0, 2.5e-17, -4.0, 0.39478417604357434] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(fmt_f64(-4.0), "-4.0");
    }

    #[test]
    fn field_csv_round_trips() {
        let g = TorusGrid::new(2, 16).unwrap();
        let u = ScalarField::from_fn(g, "u", |p| (p[0] - 0.3) * (p[1] + 0.1));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u.csv");
        write_field_csv(&path, &u).unwrap();
        let back = read_field_csv(&path).unwrap();
        assert_eq!(back.values, u.values);
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("# dim=2\r\n# n_per_axis=16\r\nix,iy,value\r\n"));
    }

    #[test]
    fn csv_has_crlf_and_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        write_csv(&path, &["a", "b"], &[vec!["1".into(), fmt_f64(0.5)]]).unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "a,b\r\n1,0.5\r\n");
    }
}
