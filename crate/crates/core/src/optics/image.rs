use num_complex::Complex64;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::{Error, Result};

const MAGIC: &[u8; 8] = b"GCAVFLD1";
const HEADER_LEN: usize = 64;

/// Complex midplane field on a square pixel grid.
///
/// Pixel `(row, col)` sits at physical position
/// `((col − center.0)·pitch, (row − center.1)·pitch)` µm; in waist units the
/// same point is `((col − center.0)/w0_px, (row − center.1)/w0_px)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexFieldImage {
    size: usize,
    data: Vec<Complex64>,
    /// µm per pixel.
    pub pixel_pitch: f64,
    /// Cavity center (x_c, y_c) in pixel coordinates.
    pub center: (f64, f64),
    /// Cavity waist in pixels.
    pub w0_px: f64,
}

impl ComplexFieldImage {
    pub fn zeros(size: usize, pixel_pitch: f64, center: (f64, f64), w0_px: f64) -> Result<Self> {
        Self::from_data(size, vec![Complex64::new(0.0, 0.0); size * size], pixel_pitch, center, w0_px)
    }

    pub fn from_data(
        size: usize,
        data: Vec<Complex64>,
        pixel_pitch: f64,
        center: (f64, f64),
        w0_px: f64,
    ) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidParameter("image size must be positive".into()));
        }
        if data.len() != size * size {
            return Err(Error::DimensionMismatch { expected: size * size, found: data.len() });
        }
        if !(pixel_pitch > 0.0) || !(w0_px > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "pixel pitch ({pixel_pitch}) and w0_px ({w0_px}) must be positive"
            )));
        }
        Ok(Self { size, data, pixel_pitch, center, w0_px })
    }

    /// Grid centered in the frame with pitch chosen so that the waist spans
    /// `w0_px` pixels.
    pub fn centered(size: usize, w0_um: f64, w0_px: f64) -> Result<Self> {
        let c = (size as f64 - 1.0) / 2.0;
        Self::zeros(size, w0_um / w0_px, (c, c), w0_px)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.size + col]
    }

    pub fn set(&mut self, row: usize, col: usize, v: Complex64) {
        self.data[row * self.size + col] = v;
    }

    /// Physical x coordinate (µm) of column `col`.
    pub fn x_um(&self, col: usize) -> f64 {
        (col as f64 - self.center.0) * self.pixel_pitch
    }

    /// Physical y coordinate (µm) of row `row`.
    pub fn y_um(&self, row: usize) -> f64 {
        (row as f64 - self.center.1) * self.pixel_pitch
    }

    /// Half-width of the imaged region (µm), measured from the cavity center
    /// to the nearest frame edge.
    pub fn half_extent_um(&self) -> f64 {
        let last = self.size as f64 - 1.0;
        let m = self.center.0.min(self.center.1).min(last - self.center.0).min(last - self.center.1);
        m * self.pixel_pitch
    }

    pub fn power(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn with_data(&self, data: Vec<Complex64>) -> Self {
        assert_eq!(data.len(), self.data.len());
        Self { data, ..self.clone() }
    }

    /// ‖self − other‖ / ‖other‖.
    pub fn relative_l2(&self, other: &Self) -> f64 {
        let num: f64 = self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm_sqr()).sum();
        (num / other.power()).sqrt()
    }

    pub fn scale(&mut self, k: f64) {
        for z in &mut self.data {
            *z *= k;
        }
    }

    /// Writes real and imaginary parts as two headerless CSV grids.
    pub fn write_csv_pair(&self, re_path: &Path, im_path: &Path) -> Result<()> {
        for (path, part) in [(re_path, 0), (im_path, 1)] {
            let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
            for row in self.data.chunks(self.size) {
                w.write_record(row.iter().map(|z| {
                    let v = if part == 0 { z.re } else { z.im };
                    format!("{v:e}")
                }))?;
            }
            w.flush()?;
        }
        Ok(())
    }

    pub fn read_csv_pair(
        re_path: &Path,
        im_path: &Path,
        pixel_pitch: f64,
        center: (f64, f64),
        w0_px: f64,
    ) -> Result<Self> {
        let re = read_grid(re_path)?;
        let im = read_grid(im_path)?;
        let size = (re.len() as f64).sqrt().round() as usize;
        if re.len() != im.len() {
            return Err(Error::DimensionMismatch { expected: re.len(), found: im.len() });
        }
        let data = re.into_iter().zip(im).map(|(a, b)| Complex64::new(a, b)).collect();
        Self::from_data(size, data, pixel_pitch, center, w0_px)
    }

    /// Binary layout: 64-byte header (magic, grid size as u64, pitch, w0_px,
    /// x_c, y_c as f64, zero padding) then interleaved re/im f64 values, all
    /// little-endian.
    pub fn write_binary(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        let mut header = [0u8; HEADER_LEN];
        header[..8].copy_from_slice(MAGIC);
        header[8..16].copy_from_slice(&(self.size as u64).to_le_bytes());
        for (k, v) in [self.pixel_pitch, self.w0_px, self.center.0, self.center.1].iter().enumerate() {
            header[16 + 8 * k..24 + 8 * k].copy_from_slice(&v.to_le_bytes());
        }
        w.write_all(&header)?;
        for z in &self.data {
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_binary(path: &Path) -> Result<Self> {
        let mut r = BufReader::new(File::open(path)?);
        let mut header = [0u8; HEADER_LEN];
        r.read_exact(&mut header)?;
        if &header[..8] != MAGIC {
            return Err(Error::Format(format!("{}: not a field image", path.display())));
        }
        let f = |k: usize| f64::from_le_bytes(header[16 + 8 * k..24 + 8 * k].try_into().unwrap());
        let size = u64::from_le_bytes(header[8..16].try_into().unwrap()) as usize;
        if size == 0 || size > 1 << 15 {
            return Err(Error::Format(format!("{}: implausible grid size {size}", path.display())));
        }
        let mut buf = vec![0u8; size * size * 16];
        r.read_exact(&mut buf)?;
        let data = buf
            .chunks_exact(16)
            .map(|c| {
                Complex64::new(
                    f64::from_le_bytes(c[..8].try_into().unwrap()),
                    f64::from_le_bytes(c[8..].try_into().unwrap()),
                )
            })
            .collect();
        Self::from_data(size, data, f(0), (f(2), f(3)), f(1))
    }
}

fn read_grid(path: &Path) -> Result<Vec<f64>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_path(path)?;
    let mut out = Vec::new();
    let mut width = None;
    for rec in rdr.records() {
        let rec = rec?;
        if *width.get_or_insert(rec.len()) != rec.len() {
            return Err(Error::Format(format!("{}: ragged grid", path.display())));
        }
        for field in rec.iter() {
            out.push(
                field
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?,
            );
        }
    }
    match width {
        Some(w) if w * w == out.len() => Ok(out),
        _ => Err(Error::Format(format!("{}: grid is not square", path.display()))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ComplexFieldImage {
        let data = (0..16).map(|k| Complex64::new(k as f64 * 0.1, -(k as f64).sqrt())).collect();
        ComplexFieldImage::from_data(4, data, 3.5, (1.5, 1.25), 9.0).unwrap()
    }

    #[test]
    fn binary_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.bin");
        let img = sample();
        img.write_binary(&p).unwrap();
        assert_eq!(std::fs::metadata(&p).unwrap().len(), 64 + 16 * 16);
        assert_eq!(ComplexFieldImage::read_binary(&p).unwrap(), img);
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let (a, b) = (dir.path().join("re.csv"), dir.path().join("im.csv"));
        let img = sample();
        img.write_csv_pair(&a, &b).unwrap();
        let back = ComplexFieldImage::read_csv_pair(&a, &b, 3.5, (1.5, 1.25), 9.0).unwrap();
        assert_eq!(back, img);
    }

    #[test]
    fn rejects_bad_metadata() {
        assert!(ComplexFieldImage::zeros(4, 0.0, (0.0, 0.0), 1.0).is_err());
        assert!(ComplexFieldImage::zeros(4, 1.0, (0.0, 0.0), -1.0).is_err());
        assert!(ComplexFieldImage::from_data(3, vec![Complex64::new(0.0, 0.0); 8], 1.0, (0.0, 0.0), 1.0).is_err());
    }

    #[test]
    fn bad_magic_is_a_format_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.bin");
        std::fs::write(&p, [0u8; 80]).unwrap();
        assert!(matches!(ComplexFieldImage::read_binary(&p), Err(Error::Format(_))));
    }

    #[test]
    fn coordinates_follow_center_and_pitch() {
        let img = sample();
        assert_eq!(img.x_um(3), 1.5 * 3.5);
        assert_eq!(img.y_um(0), -1.25 * 3.5);
    }
}
