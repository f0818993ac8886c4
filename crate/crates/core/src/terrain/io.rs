//! Grid file formats.
//!
//! Three on-disk formats are understood:
//!
//! * ESRI ASCII grid: `ncols`/`nrows`/`xllcorner` (or `xllcenter`)/
//!   `yllcorner` (or `yllcenter`)/`cellsize`/optional `NODATA_value` header
//!   followed by whitespace-separated elevations, first data row
//!   northernmost. Carries the full georeference; floats are written with
//!   shortest round-trip formatting so save/load is identity.
//! * Raw binary grid: 24-byte header (magic `LDEM1\0`, two reserved zero
//!   bytes, u32 rows, u32 cols, f64 cell size, all little-endian) followed
//!   by row-major f32 samples, row 0 southernmost. Carries no origin and no
//!   sentinel; holes travel as f32 NaN and the origin loads as (0, 0).
//! * PGM (P2/P5, maxval up to 65535, 16-bit samples big-endian): accepted
//!   for albedo only, samples normalized to [0, 1] by maxval. The top image
//!   row registers to the northernmost grid row.
//!
//! Readers sniff the content, writers pick the format from the file
//! extension (`.asc` means ASCII, anything else binary).

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::terrain::dem::DemGrid;
use crate::terrain::raster::Raster;

const BINARY_MAGIC: &[u8; 6] = b"LDEM1\0";
const BINARY_HEADER_LEN: usize = 24;
/// Refuse to allocate absurd grids from corrupt headers.
const MAX_SAMPLES: usize = 1 << 31;
/// Sentinel written for NaN cells when the grid does not remember one.
const DEFAULT_NODATA: f64 = -9999.0;

/// Loads an elevation grid, sniffing the format from the content.
pub fn load_dem(path: &Path) -> Result<DemGrid> {
    let bytes = read_file(path)?;
    if bytes.starts_with(BINARY_MAGIC) {
        let (rows, cols, cell_size, values) = parse_binary(&bytes, path)?;
        DemGrid::new(rows, cols, cell_size, 0.0, 0.0, values, None)
            .map_err(|e| Error::structure(path, e.to_string()))
    } else if bytes.starts_with(b"P2") || bytes.starts_with(b"P5") {
        Err(Error::structure(
            path,
            "PGM carries no elevation georeference; elevation grids must be \
             ASCII grid or binary grid files",
        ))
    } else {
        parse_esri_ascii(&bytes, path)
    }
}

/// Saves an elevation grid; `.asc` extension selects the ASCII format,
/// everything else the binary format.
pub fn save_dem(dem: &DemGrid, path: &Path) -> Result<()> {
    if has_ascii_extension(path) {
        save_dem_ascii(dem, path)
    } else {
        save_dem_binary(dem, path)
    }
}

/// Writes the ASCII grid form, preserving the full georeference.
pub fn save_dem_ascii(dem: &DemGrid, path: &Path) -> Result<()> {
    let r = dem.raster();
    let mut out = String::new();
    out.push_str(&format!("ncols {}\n", r.cols()));
    out.push_str(&format!("nrows {}\n", r.rows()));
    // The center variant round-trips origins exactly; corner arithmetic
    // would reintroduce rounding.
    out.push_str(&format!("xllcenter {}\n", r.origin_x()));
    out.push_str(&format!("yllcenter {}\n", r.origin_y()));
    out.push_str(&format!("cellsize {}\n", r.cell_size()));
    let has_holes = r.values().iter().any(|v| v.is_nan());
    let sentinel = dem.nodata().unwrap_or(DEFAULT_NODATA);
    if dem.nodata().is_some() || has_holes {
        out.push_str(&format!("NODATA_value {}\n", sentinel));
    }
    for i in (0..r.rows()).rev() {
        let mut first = true;
        for j in 0..r.cols() {
            if !first {
                out.push(' ');
            }
            first = false;
            let v = r.get(i, j);
            if v.is_nan() {
                out.push_str(&format!("{}", sentinel));
            } else {
                out.push_str(&format!("{}", v));
            }
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Writes the binary grid form (no origin, f32 samples).
pub fn save_dem_binary(dem: &DemGrid, path: &Path) -> Result<()> {
    write_binary_grid(
        dem.rows(),
        dem.cols(),
        dem.cell_size(),
        dem.raster().values(),
        path,
    )
}

/// Loads a raster from the binary grid format.
pub fn load_raster(path: &Path) -> Result<Raster> {
    let bytes = read_file(path)?;
    if !bytes.starts_with(BINARY_MAGIC) {
        return Err(Error::structure(path, "not a binary grid file (bad magic)"));
    }
    let (rows, cols, cell_size, values) = parse_binary(&bytes, path)?;
    Raster::from_values(rows, cols, cell_size, 0.0, 0.0, values)
        .map_err(|e| Error::structure(path, e.to_string()))
}

/// Saves a raster in the binary grid format.
pub fn save_raster(raster: &Raster, path: &Path) -> Result<()> {
    write_binary_grid(
        raster.rows(),
        raster.cols(),
        raster.cell_size(),
        raster.values(),
        path,
    )
}

/// Loads an albedo raster registered to `dem`.
///
/// Accepts PGM (normalized by maxval), the binary grid format, or the ASCII
/// grid format. Dimensions must match the elevation grid; the returned
/// raster adopts the grid's georeference. Finite values must lie in [0, 1].
pub fn load_albedo(path: &Path, dem: &DemGrid) -> Result<Raster> {
    let bytes = read_file(path)?;
    let (rows, cols, values) = if bytes.starts_with(b"P2") || bytes.starts_with(b"P5") {
        let (w, h, top_down) = parse_pgm(&bytes, path)?;
        (h, w, flip_rows(&top_down, h, w))
    } else if bytes.starts_with(BINARY_MAGIC) {
        let (rows, cols, _, values) = parse_binary(&bytes, path)?;
        (rows, cols, values)
    } else {
        let grid = parse_esri_ascii(&bytes, path)?;
        (
            grid.rows(),
            grid.cols(),
            grid.raster().values().to_vec(),
        )
    };
    if rows != dem.rows() || cols != dem.cols() {
        return Err(Error::config(format!(
            "albedo raster {} is {rows}x{cols}, elevation grid is {}x{}",
            path.display(),
            dem.rows(),
            dem.cols()
        )));
    }
    if let Some(bad) = values
        .iter()
        .find(|v| !v.is_nan() && !(0.0..=1.0).contains(*v))
    {
        return Err(Error::config(format!(
            "albedo raster {} holds {bad}, outside [0, 1]",
            path.display()
        )));
    }
    Raster::from_values(
        rows,
        cols,
        dem.cell_size(),
        dem.origin_x(),
        dem.origin_y(),
        values,
    )
}

fn has_ascii_extension(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| e.eq_ignore_ascii_case("asc"))
        .unwrap_or(false)
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

/// Reverses row order (file rows are north-first, grid rows south-first).
fn flip_rows(values: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    for i in (0..rows).rev() {
        out.extend_from_slice(&values[i * cols..(i + 1) * cols]);
    }
    out
}

// ---------------------------------------------------------------------------
// ESRI ASCII grid
// ---------------------------------------------------------------------------

/// Lower-left reference can name the cell corner or the cell center.
#[derive(Clone, Copy)]
enum LowerLeft {
    Corner(f64),
    Center(f64),
}

impl LowerLeft {
    fn to_center(self, cell_size: f64) -> f64 {
        match self {
            LowerLeft::Corner(v) => v + 0.5 * cell_size,
            LowerLeft::Center(v) => v,
        }
    }
}

fn parse_esri_ascii(bytes: &[u8], path: &Path) -> Result<DemGrid> {
    let text = std::str::from_utf8(bytes)
        .map_err(|_| Error::structure(path, "not valid UTF-8 text"))?;

    let mut ncols: Option<usize> = None;
    let mut nrows: Option<usize> = None;
    let mut xll: Option<LowerLeft> = None;
    let mut yll: Option<LowerLeft> = None;
    let mut cellsize: Option<f64> = None;
    let mut nodata: Option<f64> = None;
    let mut values: Vec<f64> = Vec::new();
    let mut in_data = false;
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        let starts_alpha = trimmed
            .chars()
            .next()
            .map(|c| c.is_ascii_alphabetic())
            .unwrap_or(false);
        if !in_data && starts_alpha {
            let mut it = trimmed.split_whitespace();
            let key = it.next().unwrap().to_ascii_lowercase();
            let value = it.next().ok_or_else(|| {
                Error::parse(path, line, format!("header field `{key}` has no value"))
            })?;
            if it.next().is_some() {
                return Err(Error::parse(
                    path,
                    line,
                    format!("header field `{key}` has trailing tokens"),
                ));
            }
            match key.as_str() {
                "ncols" => ncols = Some(parse_count(value, path, line, "ncols")?),
                "nrows" => nrows = Some(parse_count(value, path, line, "nrows")?),
                "xllcorner" => xll = Some(LowerLeft::Corner(parse_float(value, path, line)?)),
                "xllcenter" => xll = Some(LowerLeft::Center(parse_float(value, path, line)?)),
                "yllcorner" => yll = Some(LowerLeft::Corner(parse_float(value, path, line)?)),
                "yllcenter" => yll = Some(LowerLeft::Center(parse_float(value, path, line)?)),
                "cellsize" => cellsize = Some(parse_float(value, path, line)?),
                "nodata_value" => nodata = Some(parse_float(value, path, line)?),
                other => {
                    return Err(Error::parse(
                        path,
                        line,
                        format!("unknown header field `{other}`"),
                    ))
                }
            }
        } else {
            in_data = true;
            for tok in trimmed.split_whitespace() {
                values.push(parse_float(tok, path, line)?);
            }
        }
    }

    let header_err = |name: &str| {
        Error::parse(
            path,
            last_line,
            format!("missing header field `{name}`"),
        )
    };
    let ncols = ncols.ok_or_else(|| header_err("ncols"))?;
    let nrows = nrows.ok_or_else(|| header_err("nrows"))?;
    let xll = xll.ok_or_else(|| header_err("xllcorner"))?;
    let yll = yll.ok_or_else(|| header_err("yllcorner"))?;
    let cellsize = cellsize.ok_or_else(|| header_err("cellsize"))?;

    if !cellsize.is_finite() || cellsize <= 0.0 {
        return Err(Error::structure(
            path,
            format!("cellsize must be positive and finite, got {cellsize}"),
        ));
    }
    if nrows
        .checked_mul(ncols)
        .map(|n| n > MAX_SAMPLES)
        .unwrap_or(true)
    {
        return Err(Error::structure(
            path,
            format!("grid of {nrows}x{ncols} cells is implausibly large"),
        ));
    }
    if values.len() != nrows * ncols {
        return Err(Error::structure(
            path,
            format!(
                "header promises {} values ({nrows} rows x {ncols} cols), body holds {}",
                nrows * ncols,
                values.len()
            ),
        ));
    }

    let grid_values = flip_rows(&values, nrows, ncols);
    DemGrid::new(
        nrows,
        ncols,
        cellsize,
        xll.to_center(cellsize),
        yll.to_center(cellsize),
        grid_values,
        nodata,
    )
    .map_err(|e| Error::structure(path, e.to_string()))
}

fn parse_count(tok: &str, path: &Path, line: usize, name: &str) -> Result<usize> {
    tok.parse::<usize>().map_err(|_| {
        Error::parse(
            path,
            line,
            format!("`{name}` must be a positive integer, got `{tok}`"),
        )
    })
}

fn parse_float(tok: &str, path: &Path, line: usize) -> Result<f64> {
    let v = tok
        .parse::<f64>()
        .map_err(|_| Error::parse(path, line, format!("not a number: `{tok}`")))?;
    if !v.is_finite() {
        return Err(Error::parse(
            path,
            line,
            format!("value must be finite, got `{tok}`"),
        ));
    }
    Ok(v)
}

// ---------------------------------------------------------------------------
// Binary grid
// ---------------------------------------------------------------------------

fn parse_binary(bytes: &[u8], path: &Path) -> Result<(usize, usize, f64, Vec<f64>)> {
    if bytes.len() < BINARY_HEADER_LEN {
        return Err(Error::structure(
            path,
            format!(
                "binary grid header needs {BINARY_HEADER_LEN} bytes, file has {}",
                bytes.len()
            ),
        ));
    }
    // Bytes 6..8 are reserved padding, ignored on read.
    let rows = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let cols = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
    let cell_size = f64::from_le_bytes(bytes[16..24].try_into().unwrap());
    if rows == 0 || cols == 0 {
        return Err(Error::structure(
            path,
            format!("binary grid has degenerate shape {rows}x{cols}"),
        ));
    }
    if rows
        .checked_mul(cols)
        .map(|n| n > MAX_SAMPLES)
        .unwrap_or(true)
    {
        return Err(Error::structure(
            path,
            format!("grid of {rows}x{cols} cells is implausibly large"),
        ));
    }
    if !cell_size.is_finite() || cell_size <= 0.0 {
        return Err(Error::structure(
            path,
            format!("binary grid cell size must be positive and finite, got {cell_size}"),
        ));
    }
    let expected = BINARY_HEADER_LEN + rows * cols * 4;
    if bytes.len() != expected {
        return Err(Error::structure(
            path,
            format!(
                "binary grid of {rows}x{cols} samples needs {expected} bytes, file has {}",
                bytes.len()
            ),
        ));
    }
    let values = bytes[BINARY_HEADER_LEN..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
        .collect();
    Ok((rows, cols, cell_size, values))
}

fn write_binary_grid(
    rows: usize,
    cols: usize,
    cell_size: f64,
    values: &[f64],
    path: &Path,
) -> Result<()> {
    if rows > u32::MAX as usize || cols > u32::MAX as usize {
        return Err(Error::domain(format!(
            "binary grid shape {rows}x{cols} exceeds the u32 header fields"
        )));
    }
    let mut out = Vec::with_capacity(BINARY_HEADER_LEN + values.len() * 4);
    out.extend_from_slice(BINARY_MAGIC);
    out.extend_from_slice(&[0u8, 0u8]);
    out.extend_from_slice(&(rows as u32).to_le_bytes());
    out.extend_from_slice(&(cols as u32).to_le_bytes());
    out.extend_from_slice(&cell_size.to_le_bytes());
    for v in values {
        out.extend_from_slice(&(*v as f32).to_le_bytes());
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

// ---------------------------------------------------------------------------
// PGM
// ---------------------------------------------------------------------------

/// Parses P2/P5 PGM; returns (width, height, samples in [0, 1], top row
/// first).
fn parse_pgm(bytes: &[u8], path: &Path) -> Result<(usize, usize, Vec<f64>)> {
    let mut scan = PgmScanner { bytes, pos: 0, line: 1 };
    let (magic, magic_line) = scan
        .token()
        .ok_or_else(|| Error::parse(path, 1, "empty PGM file"))?;
    let binary = match magic.as_str() {
        "P5" => true,
        "P2" => false,
        other => {
            return Err(Error::parse(
                path,
                magic_line,
                format!("not a PGM file (magic `{other}`)"),
            ))
        }
    };
    let width = pgm_count(&mut scan, path, "width")?;
    let height = pgm_count(&mut scan, path, "height")?;
    let (maxval, maxval_line) = pgm_usize(&mut scan, path, "maxval")?;
    if maxval == 0 || maxval > 65535 {
        return Err(Error::parse(
            path,
            maxval_line,
            format!("maxval must be in 1..=65535, got {maxval}"),
        ));
    }
    if width
        .checked_mul(height)
        .map(|n| n > MAX_SAMPLES)
        .unwrap_or(true)
    {
        return Err(Error::structure(
            path,
            format!("PGM of {width}x{height} pixels is implausibly large"),
        ));
    }
    let n = width * height;
    let scale = maxval as f64;
    let mut samples = Vec::with_capacity(n);
    if binary {
        // Exactly one whitespace byte separates maxval from the raw data.
        let data = &bytes[scan.pos + 1..];
        let bytes_per = if maxval > 255 { 2 } else { 1 };
        if data.len() != n * bytes_per {
            return Err(Error::structure(
                path,
                format!(
                    "PGM of {width}x{height} pixels needs {} data bytes, found {}",
                    n * bytes_per,
                    data.len()
                ),
            ));
        }
        if bytes_per == 1 {
            samples.extend(data.iter().map(|b| *b as f64 / scale));
        } else {
            samples.extend(
                data.chunks_exact(2)
                    .map(|c| u16::from_be_bytes([c[0], c[1]]) as f64 / scale),
            );
        }
    } else {
        for k in 0..n {
            let (tok, line) = scan.token().ok_or_else(|| {
                Error::structure(path, format!("PGM body ended after {k} of {n} samples"))
            })?;
            let v = tok.parse::<u32>().map_err(|_| {
                Error::parse(path, line, format!("not a PGM sample: `{tok}`"))
            })?;
            if v as usize > maxval {
                return Err(Error::parse(
                    path,
                    line,
                    format!("sample {v} exceeds maxval {maxval}"),
                ));
            }
            samples.push(v as f64 / scale);
        }
        if scan.token().is_some() {
            return Err(Error::structure(path, "PGM body holds trailing samples"));
        }
    }
    Ok((width, height, samples))
}

fn pgm_count(scan: &mut PgmScanner, path: &Path, what: &str) -> Result<usize> {
    let (v, line) = pgm_usize(scan, path, what)?;
    if v == 0 {
        return Err(Error::parse(path, line, format!("PGM {what} must be positive")));
    }
    Ok(v)
}

fn pgm_usize(scan: &mut PgmScanner, path: &Path, what: &str) -> Result<(usize, usize)> {
    let (tok, line) = scan
        .token()
        .ok_or_else(|| Error::structure(path, format!("PGM header ends before {what}")))?;
    let v = tok.parse::<usize>().map_err(|_| {
        Error::parse(path, line, format!("PGM {what} must be an integer, got `{tok}`"))
    })?;
    Ok((v, line))
}

/// Whitespace/comment-aware token scanner over the PGM header.
struct PgmScanner<'a> {
    bytes: &'a [u8],
    pos: usize,
    line: usize,
}

impl PgmScanner<'_> {
    /// Next token and the line it starts on. Leaves `pos` at the byte just
    /// past the token so binary payloads can resume after one whitespace.
    fn token(&mut self) -> Option<(String, usize)> {
        loop {
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
                if self.bytes[self.pos] == b'\n' {
                    self.line += 1;
                }
                self.pos += 1;
            }
            if self.pos < self.bytes.len() && self.bytes[self.pos] == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
                continue;
            }
            break;
        }
        if self.pos >= self.bytes.len() {
            return None;
        }
        let start = self.pos;
        let line = self.line;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        Some((
            String::from_utf8_lossy(&self.bytes[start..self.pos]).into_owned(),
            line,
        ))
    }
}
