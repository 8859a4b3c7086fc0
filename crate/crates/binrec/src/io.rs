//! File formats.
//!
//! * 1D signals: CSV, one value per line.
//! * 2D binary images: PGM (`P2` or `P5`), 0 ↔ 0 and maxval ↔ 1.
//! * 2D real grids: plain text, one row per line, space separated.
//! * Spectra and measurement sets: CSV rows `k1[,k2],re,im` after a
//!   `# geometry h N` header, frequencies in symmetric indexing.
//!
//! Lines starting with `#` are comments everywhere except where the header
//! is required.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use binrec_core::fourier::{FrequencyMask, MeasurementSet};
use binrec_core::{BinarySignal, Complex64, GridGeometry, RealSignal};

use crate::error::{input, Error, Result};

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { path: path.to_path_buf(), line, msg: msg.into() }
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_f64(path: &Path, line: usize, s: &str) -> Result<f64> {
    let v: f64 = s.trim().parse().map_err(|_| parse_err(path, line, format!("not a number: {s:?}")))?;
    if !v.is_finite() {
        return Err(parse_err(path, line, format!("value is not finite: {s:?}")));
    }
    Ok(v)
}

fn fmt_f64(v: f64) -> String {
    // Shortest representation that round-trips.
    format!("{v:?}")
}

pub fn parse_signal_csv(text: &str, path: &Path) -> Result<RealSignal> {
    let values = data_lines(text).map(|(n, l)| parse_f64(path, n, l)).collect::<Result<Vec<f64>>>()?;
    let g = GridGeometry::line(values.len())?;
    Ok(RealSignal::new(g, values)?)
}

pub fn format_signal_csv(values: &[f64]) -> String {
    let mut out = String::with_capacity(values.len() * 4);
    for &v in values {
        out.push_str(&fmt_f64(v));
        out.push('\n');
    }
    out
}

pub fn parse_real_grid(text: &str, path: &Path) -> Result<RealSignal> {
    let mut values = Vec::new();
    let mut width = None;
    let mut rows = 0;
    for (n, l) in data_lines(text) {
        let row = l.split_whitespace().map(|s| parse_f64(path, n, s)).collect::<Result<Vec<f64>>>()?;
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(parse_err(path, n, format!("row has {} values, expected {w}", row.len())));
            }
            _ => {}
        }
        values.extend(row);
        rows += 1;
    }
    if width != Some(rows) {
        return Err(parse_err(path, 0, format!("grid is {rows}×{}, expected a square", width.unwrap_or(0))));
    }
    Ok(RealSignal::new(GridGeometry::square(rows)?, values)?)
}

pub fn format_real_grid(u: &RealSignal) -> String {
    let n = u.geometry().n();
    let mut out = String::new();
    for row in u.values().chunks(n) {
        let cells: Vec<String> = row.iter().map(|&v| fmt_f64(v)).collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    out
}

/// A decoded greymap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pgm {
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    pub pixels: Vec<u16>,
}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Header<'a> {
    fn skip_space(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn token(&mut self) -> Option<&'a [u8]> {
        self.skip_space();
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        (self.pos > start).then(|| &self.bytes[start..self.pos])
    }

    fn number(&mut self, what: &str) -> std::result::Result<usize, String> {
        let tok = self.token().ok_or_else(|| format!("missing {what}"))?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| format!("bad {what}: {:?}", String::from_utf8_lossy(tok)))
    }
}

pub fn parse_pgm(bytes: &[u8]) -> std::result::Result<Pgm, String> {
    let mut h = Header { bytes, pos: 0 };
    let binary = match h.token() {
        Some(b"P2") => false,
        Some(b"P5") => true,
        _ => return Err("not a PGM file (expected P2 or P5)".into()),
    };
    let width = h.number("width")?;
    let height = h.number("height")?;
    let maxval = h.number("maxval")?;
    if maxval == 0 || maxval > 65535 {
        return Err(format!("maxval {maxval} out of range"));
    }
    let maxval = maxval as u16;
    let count = width.checked_mul(height).ok_or("image too large")?;
    let mut pixels = Vec::with_capacity(count);
    if binary {
        // Exactly one whitespace byte separates the header from the raster.
        let start = h.pos + 1;
        let wide = maxval > 255;
        let need = count * if wide { 2 } else { 1 };
        let raster = bytes.get(start..start + need).ok_or("raster is truncated")?;
        if wide {
            pixels.extend(raster.chunks_exact(2).map(|b| u16::from_be_bytes([b[0], b[1]])));
        } else {
            pixels.extend(raster.iter().map(|&b| b as u16));
        }
    } else {
        for _ in 0..count {
            pixels.push(h.number("pixel")? as u16);
        }
    }
    if let Some(&p) = pixels.iter().find(|&&p| p > maxval) {
        return Err(format!("pixel value {p} exceeds maxval {maxval}"));
    }
    Ok(Pgm { width, height, maxval, pixels })
}

/// Binary `P5` file with maxval 255.
pub fn encode_pgm(u: &BinarySignal) -> Result<Vec<u8>> {
    let g = u.geometry();
    if g.h() != 2 {
        return Err(input("PGM output needs a 2D signal"));
    }
    let n = g.n();
    let mut out = format!("P5\n{n} {n}\n255\n").into_bytes();
    out.extend(u.bits().map(|b| if b { 255u8 } else { 0 }));
    Ok(out)
}

fn square_geometry(pgm: &Pgm) -> Result<GridGeometry> {
    if pgm.width != pgm.height {
        return Err(input(format!("image is {}×{}, only square images are supported", pgm.width, pgm.height)));
    }
    Ok(GridGeometry::square(pgm.width)?)
}

pub fn pgm_to_binary(pgm: &Pgm) -> Result<BinarySignal> {
    let g = square_geometry(pgm)?;
    let mut bits = Vec::with_capacity(pgm.pixels.len());
    for (i, &p) in pgm.pixels.iter().enumerate() {
        match p {
            0 => bits.push(false),
            p if p == pgm.maxval => bits.push(true),
            p => return Err(input(format!("pixel {i} has value {p}; a binary image holds only 0 and {}", pgm.maxval))),
        }
    }
    Ok(BinarySignal::from_bits(g, &bits)?)
}

pub fn pgm_to_real(pgm: &Pgm) -> Result<RealSignal> {
    let g = square_geometry(pgm)?;
    let scale = pgm.maxval as f64;
    Ok(RealSignal::new(g, pgm.pixels.iter().map(|&p| p as f64 / scale).collect())?)
}

fn extension(path: &Path) -> String {
    path.extension().and_then(|e| e.to_str()).unwrap_or("").to_ascii_lowercase()
}

fn read_pgm(path: &Path) -> Result<Pgm> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_pgm(&bytes).map_err(|msg| parse_err(path, 0, msg))
}

/// Reads a real signal: `.pgm` as a scaled greymap, `.txt` as a 2D grid,
/// anything else as 1D CSV.
pub fn load_real(path: &Path) -> Result<RealSignal> {
    match extension(path).as_str() {
        "pgm" => pgm_to_real(&read_pgm(path)?),
        "txt" => parse_real_grid(&read_text(path)?, path),
        _ => parse_signal_csv(&read_text(path)?, path),
    }
}

/// Reads a binary signal in any of the real formats; every value must be 0 or 1.
pub fn load_binary(path: &Path) -> Result<BinarySignal> {
    if extension(path) == "pgm" {
        return pgm_to_binary(&read_pgm(path)?);
    }
    let u = load_real(path)?;
    Ok(BinarySignal::new(u.geometry(), u.into_values())?)
}

/// Writes `.pgm` for 2D input, a grid for `.txt`, CSV otherwise.
pub fn save_binary(path: &Path, u: &BinarySignal) -> Result<()> {
    match (extension(path).as_str(), u.geometry().h()) {
        ("pgm", _) => fs::write(path, encode_pgm(u)?).map_err(|e| Error::io(path, e)),
        _ => save_real(path, &u.to_real()),
    }
}

pub fn save_real(path: &Path, u: &RealSignal) -> Result<()> {
    match (extension(path).as_str(), u.geometry().h()) {
        ("pgm", _) => Err(input("PGM output is for binary images; use .txt for real grids")),
        ("csv", 2) => Err(input("2D signals are written as .txt grids or .pgm images")),
        (_, 1) => write_text(path, &format_signal_csv(u.values())),
        _ => write_text(path, &format_real_grid(u)),
    }
}

fn parse_header(path: &Path, line: usize, l: &str) -> Result<GridGeometry> {
    let fields: Vec<&str> = l.trim_start_matches('#').split_whitespace().collect();
    match fields.as_slice() {
        ["geometry", h, n] => {
            let h = h.parse().map_err(|_| parse_err(path, line, "bad h in header"))?;
            let n = n.parse().map_err(|_| parse_err(path, line, "bad N in header"))?;
            Ok(GridGeometry::new(h, n)?)
        }
        _ => Err(parse_err(path, line, "expected header `# geometry h N`")),
    }
}

/// Reads measurements. The mask is the conjugate closure of the listed
/// frequencies; a frequency listed without its conjugate gets the conjugate
/// value, and listed pairs must agree.
pub fn parse_measurements(text: &str, path: &Path) -> Result<MeasurementSet> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty());
    let (hl, header) = lines.next().ok_or_else(|| parse_err(path, 1, "empty file"))?;
    let g = parse_header(path, hl, header)?;
    let h = g.h();
    let mut entries: Vec<(usize, Complex64)> = Vec::new();
    for (n, l) in lines.filter(|(_, l)| !l.starts_with('#')) {
        let f: Vec<&str> = l.split(',').map(str::trim).collect();
        if f.len() != h + 2 {
            return Err(parse_err(path, n, format!("expected {} fields, found {}", h + 2, f.len())));
        }
        let mut k = [0i64; 2];
        for (slot, s) in k.iter_mut().zip(&f[..h]) {
            *slot = s.parse().map_err(|_| parse_err(path, n, format!("bad frequency {s:?}")))?;
        }
        let idx = g.freq_index(&k[..h]).map_err(|e| parse_err(path, n, e.to_string()))?;
        let z = Complex64::new(parse_f64(path, n, f[h])?, parse_f64(path, n, f[h + 1])?);
        entries.push((idx, z));
    }
    let mut full: Vec<Option<Complex64>> = vec![None; g.len()];
    for &(idx, z) in &entries {
        if full[idx].replace(z).is_some() {
            return Err(parse_err(path, 0, format!("frequency {:?} listed twice", g.index_freq(idx))));
        }
    }
    let ks: Vec<[i64; 2]> = entries.iter().map(|&(i, _)| g.index_freq(i)).collect();
    let mask = FrequencyMask::explicit(g, &ks)?;
    let values = mask
        .indices()
        .iter()
        .map(|&i| full[i].unwrap_or_else(|| full[g.conj_index(i)].expect("closure of listed entries").conj()))
        .collect();
    Ok(MeasurementSet::new(mask, values)?)
}

pub fn format_measurements(b: &MeasurementSet) -> String {
    let g = b.geometry();
    let mut out = format!("# geometry {} {}\n", g.h(), g.n());
    let mut rows: Vec<([i64; 2], Complex64)> = b.mask().indices().iter().zip(b.values()).map(|(&i, &z)| (g.index_freq(i), z)).collect();
    rows.sort_by_key(|(k, _)| *k);
    for (k, z) in rows {
        match g.h() {
            1 => writeln!(out, "{},{},{}", k[0], fmt_f64(z.re), fmt_f64(z.im)),
            _ => writeln!(out, "{},{},{},{}", k[0], k[1], fmt_f64(z.re), fmt_f64(z.im)),
        }
        .expect("writing to a String");
    }
    out
}

pub fn load_measurements(path: &Path) -> Result<MeasurementSet> {
    parse_measurements(&read_text(path)?, path)
}

pub fn save_measurements(path: &Path, b: &MeasurementSet) -> Result<()> {
    write_text(path, &format_measurements(b))
}

/// 1-based grid positions, one per line: `x` in 1D, `row,col` in 2D.
pub fn load_support(path: &Path, g: GridGeometry) -> Result<Vec<usize>> {
    let text = read_text(path)?;
    let n = g.n();
    let mut out = Vec::new();
    for (line, l) in data_lines(&text) {
        let f: Vec<usize> = l
            .split(',')
            .map(|s| s.trim().parse().map_err(|_| parse_err(path, line, format!("bad position {s:?}"))))
            .collect::<Result<_>>()?;
        let idx = match (g.h(), f.as_slice()) {
            (1, [x]) if (1..=n).contains(x) => x - 1,
            (2, [r, c]) if (1..=n).contains(r) && (1..=n).contains(c) => (r - 1) * n + (c - 1),
            _ => return Err(parse_err(path, line, "position outside the grid")),
        };
        out.push(idx);
    }
    Ok(out)
}

pub fn write_json(path: Option<&PathBuf>, value: &impl serde::Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("reports serialize");
    match path {
        Some(p) => write_text(p, &(text + "\n")),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

pub fn write_output(path: Option<&PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => write_text(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> &'static Path {
        Path::new("test")
    }

    #[test]
    fn pgm_ascii_and_binary_agree() {
        let ascii = b"P2\n# comment\n2 2\n255\n0 255\n255 0\n";
        let a = parse_pgm(ascii).unwrap();
        let mut raw = b"P5 2 2 255\n".to_vec();
        raw.extend([0u8, 255, 255, 0]);
        assert_eq!(parse_pgm(&raw).unwrap(), a);
        let u = pgm_to_binary(&a).unwrap();
        assert_eq!(u.bits().collect::<Vec<_>>(), [false, true, true, false]);
        assert_eq!(parse_pgm(&encode_pgm(&u).unwrap()).unwrap(), a);
    }

    #[test]
    fn pgm_errors() {
        assert!(parse_pgm(b"P6 1 1 255\n\0").is_err());
        assert!(parse_pgm(b"P5 2 2 255\n\0\0").is_err());
        assert!(parse_pgm(b"P2 1 1 10\n11").is_err());
        let grey = parse_pgm(b"P2 2 2 255 0 7 0 0").unwrap();
        assert!(pgm_to_binary(&grey).is_err());
        assert!((pgm_to_real(&grey).unwrap().values()[1] - 7.0 / 255.0).abs() < 1e-15);
        assert!(pgm_to_binary(&parse_pgm(b"P2 2 4 1 0 0 0 0 0 0 0 0").unwrap()).is_err());
    }

    #[test]
    fn sixteen_bit_raster() {
        let mut raw = b"P5 2 2 1000\n".to_vec();
        for v in [0u16, 1000, 500, 1000] {
            raw.extend(v.to_be_bytes());
        }
        assert_eq!(parse_pgm(&raw).unwrap().pixels, [0, 1000, 500, 1000]);
    }

    #[test]
    fn csv_round_trip() {
        let u = parse_signal_csv("# header\n1\n0\n0.25\n\n1e-3\n", p()).unwrap();
        assert_eq!(u.values(), &[1.0, 0.0, 0.25, 1e-3]);
        assert_eq!(parse_signal_csv(&format_signal_csv(u.values()), p()).unwrap(), u);
        assert!(matches!(parse_signal_csv("1\nx\n", p()), Err(Error::Parse { line: 2, .. })));
        assert!(parse_signal_csv("1\n0\n1\n", p()).is_err());
    }

    #[test]
    fn grid_round_trip() {
        let u = parse_real_grid("0 1\n0.5 -2\n", p()).unwrap();
        assert_eq!(parse_real_grid(&format_real_grid(&u), p()).unwrap(), u);
        assert!(parse_real_grid("0 1\n0.5\n", p()).is_err());
        assert!(parse_real_grid("0 1\n", p()).is_err());
    }

    #[test]
    fn measurements_fill_conjugates() {
        let b = parse_measurements("# geometry 1 8\n0,4,0\n1,1,2\n", p()).unwrap();
        assert_eq!(b.mask().len(), 3);
        assert_eq!(b.get(&[-1]), Some(Complex64::new(1.0, -2.0)));
        let again = parse_measurements(&format_measurements(&b), p()).unwrap();
        assert_eq!(again, b);
        assert!(parse_measurements("# geometry 1 8\n1,1,2\n-1,1,2\n", p()).is_err());
        assert!(parse_measurements("1,1,2\n", p()).is_err());
        assert!(parse_measurements("# geometry 2 4\n1,1,2\n", p()).is_err());
    }

    #[test]
    fn measurements_2d() {
        let text = "# geometry 2 4\n0,0,3,0\n1,-1,0.5,0.25\n";
        let b = parse_measurements(text, p()).unwrap();
        assert_eq!(b.get(&[-1, 1]), Some(Complex64::new(0.5, -0.25)));
        assert_eq!(parse_measurements(&format_measurements(&b), p()).unwrap(), b);
    }
}
