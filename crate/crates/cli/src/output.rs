//! File formats: trajectory records, delimited tables and graymaps.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use vorproc::process::apply_event;
use vorproc::{Point, ProcessParams, Space, StepEvent, Trajectory};

pub const TRAJECTORY_FORMAT: u32 = 1;

/// Binary graymap, 8 bits per pixel, row-major from the top row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pgm {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl Pgm {
    pub fn blank(width: usize, height: usize) -> Self {
        Pgm { width, height, pixels: vec![255; width * height] }
    }

    pub fn set(&mut self, x: usize, y: usize, v: u8) {
        self.pixels[y * self.width + x] = v;
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        write!(w, "P5\n{} {}\n255\n", self.width, self.height)?;
        w.write_all(&self.pixels)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path).with_context(|| format!("cannot create {}", path.display()))?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn parse(bytes: &[u8]) -> Result<Self> {
        let mut fields = Vec::new();
        let mut pos = 0;
        while fields.len() < 4 {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            let start = pos;
            while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if start == pos {
                bail!("truncated graymap header");
            }
            fields.push(std::str::from_utf8(&bytes[start..pos])?.to_string());
        }
        if fields[0] != "P5" || fields[3] != "255" {
            bail!("not an 8-bit binary graymap");
        }
        let (width, height): (usize, usize) = (fields[1].parse()?, fields[2].parse()?);
        let pixels = bytes[pos + 1..].to_vec();
        if pixels.len() != width * height {
            bail!("graymap has {} pixels, header says {}", pixels.len(), width * height);
        }
        Ok(Pgm { width, height, pixels })
    }
}

fn bin_of(x: f64, len: f64, bins: usize) -> usize {
    ((x / len * bins as f64) as usize).min(bins - 1)
}

/// One row per state after each recorded step (the initial state when no
/// step was recorded); occupied position bins are black.
pub fn spacetime_raster(space: &Space, initial: &[Point], events: &[StepEvent], bins: usize) -> Result<Pgm> {
    if space.dim() != 1 {
        bail!("space-time rasters need a one-dimensional space, got {}", space.kind().name());
    }
    if bins == 0 {
        bail!("bins must be positive");
    }
    let l = space.size();
    let mut img = Pgm::blank(bins, events.len().max(1));
    let mut points = initial.to_vec();
    let mut paint = |row: usize, pts: &[Point]| {
        for p in pts {
            img.set(bin_of(p.x, l, bins), row, 0);
        }
    };
    if events.is_empty() {
        paint(0, &points);
    }
    for (row, ev) in events.iter().enumerate() {
        apply_event(&mut points, ev);
        paint(row, &points);
    }
    Ok(img)
}

/// Final configuration as black pixels; `y` grows upwards. One-dimensional
/// spaces give a single row.
pub fn snapshot_raster(space: &Space, points: &[Point], size: usize) -> Result<Pgm> {
    if size == 0 {
        bail!("raster size must be positive");
    }
    let l = space.size();
    let mut img = Pgm::blank(size, if space.dim() == 1 { 1 } else { size });
    for p in points {
        let x = bin_of(p.x, l, size);
        let y = if space.dim() == 1 { 0 } else { size - 1 - bin_of(p.y, l, size) };
        img.set(x, y, 0);
    }
    Ok(img)
}

#[derive(Serialize, Deserialize)]
struct Header {
    record: String,
    format: u32,
    params: ProcessParams,
    initial: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct EventRecord {
    record: String,
    step: usize,
    j: usize,
    removed: Vec<f64>,
    inserted: Option<Vec<f64>>,
}

fn coords(dim: usize, p: Point) -> Vec<f64> {
    if dim == 1 {
        vec![p.x]
    } else {
        vec![p.x, p.y]
    }
}

fn point(c: &[f64]) -> Result<Point> {
    match c {
        [x] => Ok(Point::on_line(*x)),
        [x, y] => Ok(Point::new(*x, *y)),
        _ => bail!("coordinate list of length {}", c.len()),
    }
}

/// Header line with the parameters and initial configuration, then one
/// line per step.
pub fn write_trajectory(path: &Path, traj: &Trajectory) -> Result<()> {
    let dim = traj.params.space.dim();
    let mut w = BufWriter::new(File::create(path).with_context(|| format!("cannot create {}", path.display()))?);
    let header = Header {
        record: "header".into(),
        format: TRAJECTORY_FORMAT,
        params: traj.params.clone(),
        initial: traj.initial.iter().map(|&p| coords(dim, p)).collect(),
    };
    serde_json::to_writer(&mut w, &header)?;
    writeln!(w)?;
    for ev in &traj.events {
        let rec = EventRecord {
            record: "event".into(),
            step: ev.step,
            j: ev.chosen,
            removed: coords(dim, ev.removed),
            inserted: ev.inserted.map(|p| coords(dim, p)),
        };
        serde_json::to_writer(&mut w, &rec)?;
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a trajectory file. Snapshots are not stored and come back empty.
pub fn read_trajectory(path: &Path) -> Result<Trajectory> {
    let f = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let mut lines = BufReader::new(f).lines();
    let first = lines.next().ok_or_else(|| anyhow!("{}: empty trajectory file", path.display()))??;
    let header: Header = serde_json::from_str(&first).with_context(|| format!("{}: bad header", path.display()))?;
    if header.record != "header" || header.format != TRAJECTORY_FORMAT {
        bail!("{}: unsupported trajectory header", path.display());
    }
    let initial = header.initial.iter().map(|c| point(c)).collect::<Result<Vec<_>>>()?;
    let mut events = Vec::new();
    for (k, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: EventRecord =
            serde_json::from_str(&line).with_context(|| format!("{}: line {}", path.display(), k + 2))?;
        events.push(StepEvent {
            step: rec.step,
            chosen: rec.j,
            removed: point(&rec.removed)?,
            inserted: rec.inserted.as_deref().map(point).transpose()?,
        });
    }
    Ok(Trajectory { params: header.params, initial, events, snapshots: Vec::new() })
}

/// Comma-separated table with a one-line header.
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells);
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path).with_context(|| format!("cannot create {}", path.display()))?);
        writeln!(w, "{}", self.header.join(","))?;
        for r in &self.rows {
            writeln!(w, "{}", r.join(","))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Formats an optional value, leaving the cell empty when absent.
pub fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}
