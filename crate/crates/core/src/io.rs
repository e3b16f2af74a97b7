//! Text and image file formats.
//!
//! * Headerless CSV for float images and signals.
//! * Binary (P5) and ASCII (P2) PGM, 8 or 16 bits per sample.
//! * A line-oriented band container used by every pyramid type: one header
//!   line `# <kind> key=value ...` followed by one `label,v0,v1,...` line per
//!   band.

use crate::error::{Error, Result};
use crate::signal::Image;
use std::fmt::Write as _;
use std::path::Path;

/// Formats a float with 17 significant digits, enough for an exact round trip.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
    }
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn parse_row(line: &str) -> Result<Vec<f64>> {
    line.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad number `{t}`")))
        })
        .collect()
}

pub fn image_to_csv(img: &Image) -> String {
    let mut out = String::with_capacity(img.rows() * img.cols() * 24);
    for i in 0..img.rows() {
        let line: Vec<String> = img.row(i).iter().map(|v| fmt_f64(*v)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn image_from_csv(text: &str) -> Result<Image> {
    let rows: Vec<Vec<f64>> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(parse_row)
        .collect::<Result<_>>()?;
    let cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != cols) {
        return Err(Error::Parse("ragged CSV rows".into()));
    }
    let n = rows.len();
    Image::new(n, cols, rows.into_iter().flatten().collect())
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<Image> {
    image_from_csv(&read_text(path.as_ref())?)
}

pub fn write_csv(img: &Image, path: impl AsRef<Path>) -> Result<()> {
    write_bytes(path.as_ref(), image_to_csv(img).as_bytes())
}

/// Writes columns with a header row; used for plot data.
pub fn write_columns(path: impl AsRef<Path>, names: &[&str], cols: &[&[f64]]) -> Result<()> {
    let len = cols.iter().map(|c| c.len()).max().unwrap_or(0);
    let mut out = names.join(",");
    out.push('\n');
    for i in 0..len {
        let row: Vec<String> = cols
            .iter()
            .map(|c| c.get(i).map(|v| fmt_f64(*v)).unwrap_or_default())
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    write_bytes(path.as_ref(), out.as_bytes())
}

struct Tokens<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn skip_space(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                b if b.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn next_uint(&mut self) -> Result<u32> {
        self.skip_space();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Parse("malformed PGM header".into()))
    }
}

/// Decodes a P2 or P5 graymap. Sample values are kept as raw integers.
pub fn decode_pgm(bytes: &[u8]) -> Result<Image> {
    if bytes.len() < 2 || bytes[0] != b'P' || !matches!(bytes[1], b'2' | b'5') {
        return Err(Error::Parse("not a P2/P5 PGM file".into()));
    }
    let binary = bytes[1] == b'5';
    let mut tok = Tokens { bytes, pos: 2 };
    let cols = tok.next_uint()? as usize;
    let rows = tok.next_uint()? as usize;
    let maxval = tok.next_uint()?;
    if maxval == 0 || maxval > 65535 {
        return Err(Error::Parse(format!("PGM maxval {maxval} out of range")));
    }
    let n = rows * cols;
    let mut data = Vec::with_capacity(n);
    if binary {
        // exactly one whitespace byte separates the header from the raster
        let start = tok.pos + 1;
        let width = if maxval < 256 { 1 } else { 2 };
        let raster = bytes
            .get(start..start + n * width)
            .ok_or_else(|| Error::Parse("truncated PGM raster".into()))?;
        if width == 1 {
            data.extend(raster.iter().map(|&b| b as f64));
        } else {
            data.extend(raster.chunks_exact(2).map(|c| u16::from_be_bytes([c[0], c[1]]) as f64));
        }
    } else {
        for _ in 0..n {
            data.push(tok.next_uint()? as f64);
        }
    }
    if data.iter().any(|&v| v > maxval as f64) {
        return Err(Error::Parse("PGM sample exceeds maxval".into()));
    }
    Image::new(rows, cols, data)
}

/// Encodes an image as binary PGM after rounding and clamping to `[0, maxval]`.
pub fn encode_pgm(img: &Image, maxval: u16, ascii: bool) -> Vec<u8> {
    let maxval = maxval.max(1);
    let q = |v: f64| v.round().clamp(0.0, maxval as f64) as u16;
    let mut out = format!(
        "{}\n{} {}\n{}\n",
        if ascii { "P2" } else { "P5" },
        img.cols(),
        img.rows(),
        maxval
    )
    .into_bytes();
    if ascii {
        let mut text = String::new();
        for i in 0..img.rows() {
            let line: Vec<String> = img.row(i).iter().map(|&v| q(v).to_string()).collect();
            let _ = writeln!(text, "{}", line.join(" "));
        }
        out.extend_from_slice(text.as_bytes());
    } else if maxval < 256 {
        out.extend(img.data().iter().map(|&v| q(v) as u8));
    } else {
        for &v in img.data() {
            out.extend_from_slice(&q(v).to_be_bytes());
        }
    }
    out
}

pub fn read_pgm(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_pgm(&bytes)
}

/// Writes raw values; picks 16-bit samples when any value exceeds 255.
pub fn write_pgm(img: &Image, path: impl AsRef<Path>) -> Result<()> {
    let (_, hi) = img.min_max();
    let maxval = if hi.round() > 255.0 { 65535 } else { 255 };
    write_bytes(path.as_ref(), &encode_pgm(img, maxval, false))
}

/// Affinely rescales to `[0, 255]` and writes an 8-bit PGM.
pub fn write_pgm_scaled(img: &Image, path: impl AsRef<Path>) -> Result<()> {
    let (lo, hi) = img.min_max();
    let span = hi - lo;
    let scaled = if span > 0.0 {
        img.map(|v| (v - lo) / span * 255.0)
    } else {
        img.map(|_| 0.0)
    };
    write_bytes(path.as_ref(), &encode_pgm(&scaled, 255, false))
}

/// Reads a `.pgm` or `.csv` image, chosen by extension.
pub fn read_image(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    match extension(path).as_str() {
        "pgm" => read_pgm(path),
        _ => read_csv(path),
    }
}

/// Writes a `.pgm` (raw values) or `.csv` image, chosen by extension.
pub fn write_image(img: &Image, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    match extension(path).as_str() {
        "pgm" => write_pgm(img, path),
        _ => write_csv(img, path),
    }
}

fn extension(path: &Path) -> String {
    path.extension()
        .and_then(|e| e.to_str())
        .unwrap_or("")
        .to_ascii_lowercase()
}

/// Header fields plus labelled bands; the on-disk form of every pyramid.
#[derive(Debug, Clone, PartialEq)]
pub struct BandFile {
    pub kind: String,
    pub fields: Vec<(String, String)>,
    pub bands: Vec<(String, Vec<f64>)>,
}

impl BandFile {
    pub fn new(kind: &str) -> Self {
        BandFile {
            kind: kind.to_string(),
            fields: Vec::new(),
            bands: Vec::new(),
        }
    }

    pub fn field(mut self, key: &str, value: impl ToString) -> Self {
        self.fields.push((key.to_string(), value.to_string()));
        self
    }

    pub fn push(&mut self, label: impl Into<String>, values: &[f64]) {
        self.bands.push((label.into(), values.to_vec()));
    }

    pub fn get_field(&self, key: &str) -> Option<&str> {
        self.fields
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn usize_field(&self, key: &str) -> Result<usize> {
        self.get_field(key)
            .ok_or_else(|| Error::Parse(format!("missing header field `{key}`")))?
            .parse()
            .map_err(|_| Error::Parse(format!("bad header field `{key}`")))
    }

    /// Removes and returns the band called `label`.
    pub fn take(&mut self, label: &str) -> Result<Vec<f64>> {
        let idx = self
            .bands
            .iter()
            .position(|(l, _)| l == label)
            .ok_or_else(|| Error::Structure(format!("missing band `{label}`")))?;
        Ok(self.bands.remove(idx).1)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        read_text(path.as_ref())?.parse()
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        write_bytes(path.as_ref(), self.to_string().as_bytes())
    }
}

impl std::fmt::Display for BandFile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "# {}", self.kind)?;
        for (k, v) in &self.fields {
            write!(f, " {k}={v}")?;
        }
        writeln!(f)?;
        for (label, values) in &self.bands {
            f.write_str(label)?;
            for v in values {
                write!(f, ",{}", fmt_f64(*v))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl std::str::FromStr for BandFile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut lines = s.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines
            .next()
            .and_then(|h| h.strip_prefix('#'))
            .ok_or_else(|| Error::Parse("missing pyramid header".into()))?;
        let mut parts = header.split_whitespace();
        let kind = parts
            .next()
            .ok_or_else(|| Error::Parse("empty pyramid header".into()))?;
        let mut file = BandFile::new(kind);
        for p in parts {
            let (k, v) = p
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad header field `{p}`")))?;
            file.fields.push((k.to_string(), v.to_string()));
        }
        for line in lines {
            let (label, rest) = line.split_once(',').unwrap_or((line, ""));
            let values = if rest.is_empty() {
                Vec::new()
            } else {
                parse_row(rest)?
            };
            file.bands.push((label.trim().to_string(), values));
        }
        Ok(file)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn pgm_binary_and_ascii_round_trip() {
        let img = Image::from_fn(3, 5, |i, j| (i * 40 + j * 7) as f64);
        for ascii in [false, true] {
            let back = decode_pgm(&encode_pgm(&img, 255, ascii)).unwrap();
            assert_eq!(back, img);
        }
        let wide = Image::from_fn(2, 2, |i, j| (i * 30000 + j * 1000) as f64);
        assert_eq!(decode_pgm(&encode_pgm(&wide, 65535, false)).unwrap(), wide);
    }

    #[test]
    fn pgm_header_comments() {
        let bytes = b"P2\n# comment\n2 1\n# another\n15\n3 15\n";
        let img = decode_pgm(bytes).unwrap();
        assert_eq!(img.data(), &[3.0, 15.0]);
        assert!(decode_pgm(b"P6\n1 1\n255\n\0\0\0").is_err());
        assert!(decode_pgm(b"P5\n4 4\n255\n\0").is_err());
    }

    #[test]
    fn band_file_parses_header_fields() {
        let mut f = BandFile::new("pyr1d").field("J", 2).field("N", 4);
        f.push("d1", &[1.0, -2.0]);
        f.push("a", &[0.5]);
        let back: BandFile = f.to_string().parse().unwrap();
        assert_eq!(back, f);
        assert_eq!(back.usize_field("N").unwrap(), 4);
        assert!(back.usize_field("H").is_err());
    }

    proptest! {
        #[test]
        fn csv_round_trip_is_lossless(v in prop::collection::vec(-1e6f64..1e6, 12)) {
            let img = Image::new(3, 4, v).unwrap();
            prop_assert_eq!(image_from_csv(&image_to_csv(&img)).unwrap(), img);
        }
    }
}
