//! Run artifacts: the time-series CSV, per-field snapshot CSVs, PGM heatmap
//! frames, and the sink abstraction the engine writes through.
//!
//! Numeric text uses the shortest decimal form that parses back to the same
//! 64-bit float (`1`, not `1.0000000000000000`), so a write-then-parse round
//! trip is bit-exact and byte-identical runs stay byte-identical on disk.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use crate::error::ModelError;
use crate::field::ScalarField;
use crate::grid::Grid;

/// Header of `series.csv`.
pub const SERIES_HEADER: &str = "day,phi,mass_P_mid,mass_E,mass_W,mean_i,mass_omega";

/// One row of the per-day time series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeSeriesRow {
    /// Day index `n`.
    pub day: usize,
    /// Transport energy `φⁿ`.
    pub phi: f64,
    /// `∫P` at midday.
    pub mass_p_mid: f64,
    /// `∫E` at end of day.
    pub mass_e: f64,
    /// `∫W` at end of day.
    pub mass_w: f64,
    /// Area-mean efficiency at end of day.
    pub mean_i: f64,
    /// `∫ωⁿ`.
    pub mass_omega: f64,
}

impl TimeSeriesRow {
    /// The row as a `series.csv` line (no trailing newline).
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.day, self.phi, self.mass_p_mid, self.mass_e, self.mass_w, self.mean_i,
            self.mass_omega
        )
    }
}

/// Where the engine sends rows and snapshots. All methods default to no-ops
/// so consumers implement only what they collect.
pub trait OutputSink {
    /// One finished day's time-series row.
    fn series_row(&mut self, row: &TimeSeriesRow) -> io::Result<()> {
        let _ = row;
        Ok(())
    }

    /// One named field snapshot (`name` is e.g. `"P_mid"`, `"E"`).
    fn snapshot(
        &mut self,
        day: usize,
        name: &str,
        grid: &Grid,
        field: &ScalarField,
    ) -> io::Result<()> {
        let _ = (day, name, grid, field);
        Ok(())
    }

    /// Called once after the last day; flush buffers here.
    fn finish(&mut self) -> io::Result<()> {
        Ok(())
    }
}

/// Discards everything.
pub struct NullSink;

impl OutputSink for NullSink {}

/// Collects everything in memory; used by tests and embedders.
#[derive(Debug, Default)]
pub struct MemorySink {
    /// Every time-series row, in day order.
    pub rows: Vec<TimeSeriesRow>,
    /// Every snapshot as `(day, name, field)`, in emission order.
    pub snapshots: Vec<(usize, String, ScalarField)>,
}

impl MemorySink {
    /// The first snapshot matching `day` and `name`, if any.
    pub fn snapshot(&self, day: usize, name: &str) -> Option<&ScalarField> {
        self.snapshots
            .iter()
            .find(|(d, n, _)| *d == day && n == name)
            .map(|(_, _, f)| f)
    }
}

impl OutputSink for MemorySink {
    fn series_row(&mut self, row: &TimeSeriesRow) -> io::Result<()> {
        self.rows.push(*row);
        Ok(())
    }

    fn snapshot(
        &mut self,
        day: usize,
        name: &str,
        _grid: &Grid,
        field: &ScalarField,
    ) -> io::Result<()> {
        self.snapshots.push((day, name.to_string(), field.clone()));
        Ok(())
    }
}

/// Render a field as CSV: header `i,j,x,y,value`, one row per interior cell
/// in grid order, masked cells omitted.
pub fn write_field_csv(grid: &Grid, field: &ScalarField) -> Result<String, ModelError> {
    field.check_grid(grid)?;
    let mut out = String::with_capacity(32 * (grid.cell_count() + 1));
    out.push_str("i,j,x,y,value\n");
    for (k, c) in grid.cells().iter().enumerate() {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            c.i,
            c.j,
            c.x,
            c.y,
            field.get(k)
        ));
    }
    Ok(out)
}

/// Render a field as a binary PGM frame (`P5`, maxval 255), `nx × nx`.
///
/// Rows run top to bottom in image convention, i.e. `j = nx-1` first, so the
/// frame is oriented like a plot with y pointing up. Masked cells render 0;
/// interior values scale linearly from `[min, max]` onto `[1, 255]`, and a
/// constant field renders uniformly at 255.
pub fn write_heatmap_pgm(grid: &Grid, field: &ScalarField) -> Result<Vec<u8>, ModelError> {
    field.check_grid(grid)?;
    let nx = grid.nx();
    let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
    for &v in field.values() {
        min = min.min(v);
        max = max.max(v);
    }
    let span = max - min;

    let mut out = format!("P5\n{nx} {nx}\n255\n").into_bytes();
    out.reserve(nx as usize * nx as usize);
    for row in 0..nx {
        let j = nx - 1 - row;
        for i in 0..nx {
            let byte = match grid.cell_at(i, j) {
                None => 0u8,
                Some(k) if span == 0.0 => {
                    let _ = k;
                    255
                }
                Some(k) => 1 + ((field.get(k) - min) / span * 254.0).round() as u8,
            };
            out.push(byte);
        }
    }
    Ok(out)
}

/// Writes run artifacts under an output directory:
/// `series.csv`, `fields/<name>_<day:05>.csv`, and (when enabled)
/// `frames/<name>_<day:05>.pgm`.
pub struct DirectorySink {
    root: PathBuf,
    series: BufWriter<File>,
    heatmaps: bool,
}

impl DirectorySink {
    /// Create the directory tree and start `series.csv` with its header.
    pub fn new(root: impl Into<PathBuf>, heatmaps: bool) -> io::Result<Self> {
        let root = root.into();
        fs::create_dir_all(root.join("fields"))?;
        if heatmaps {
            fs::create_dir_all(root.join("frames"))?;
        }
        let mut series = BufWriter::new(File::create(root.join("series.csv"))?);
        writeln!(series, "{SERIES_HEADER}")?;
        Ok(Self {
            root,
            series,
            heatmaps,
        })
    }
}

impl OutputSink for DirectorySink {
    fn series_row(&mut self, row: &TimeSeriesRow) -> io::Result<()> {
        writeln!(self.series, "{}", row.csv_line())
    }

    fn snapshot(
        &mut self,
        day: usize,
        name: &str,
        grid: &Grid,
        field: &ScalarField,
    ) -> io::Result<()> {
        let render = |e: ModelError| io::Error::new(io::ErrorKind::InvalidInput, e.to_string());
        let csv = write_field_csv(grid, field).map_err(render)?;
        fs::write(self.root.join(format!("fields/{name}_{day:05}.csv")), csv)?;
        if self.heatmaps {
            let pgm = write_heatmap_pgm(grid, field).map_err(render)?;
            fs::write(self.root.join(format!("frames/{name}_{day:05}.pgm")), pgm)?;
        }
        Ok(())
    }

    fn finish(&mut self) -> io::Result<()> {
        self.series.flush()
    }
}
