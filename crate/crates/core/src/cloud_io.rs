//! ASCII PLY and XYZ point-cloud files.
//!
//! Coordinates are written with Rust's shortest round-trip float formatting,
//! so reading a file back yields bit-identical `f64` values.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{PointCloud, Vec3};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CloudFormat {
    Ply,
    Xyz,
}

impl CloudFormat {
    /// Picks the format from a file extension (`.ply` or `.xyz`).
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "ply" => Some(CloudFormat::Ply),
            "xyz" | "txt" => Some(CloudFormat::Xyz),
            _ => None,
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            CloudFormat::Ply => "ply",
            CloudFormat::Xyz => "xyz",
        }
    }
}

pub fn write_cloud(pc: &PointCloud, path: &Path, format: CloudFormat) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let res = match format {
        CloudFormat::Ply => write_ply_to(pc, &mut w),
        CloudFormat::Xyz => write_xyz_to(pc, &mut w),
    };
    res.and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

pub fn read_cloud(path: &Path) -> Result<PointCloud> {
    match CloudFormat::from_path(path) {
        Some(CloudFormat::Ply) => read_ply(path),
        Some(CloudFormat::Xyz) => read_xyz(path),
        None => Err(Error::parse(path, "unknown point cloud extension (expected .ply or .xyz)")),
    }
}

pub fn write_ply_to<W: Write>(pc: &PointCloud, w: &mut W) -> std::io::Result<()> {
    writeln!(w, "ply")?;
    writeln!(w, "format ascii 1.0")?;
    writeln!(w, "comment units mm")?;
    writeln!(w, "element vertex {}", pc.len())?;
    writeln!(w, "property double x")?;
    writeln!(w, "property double y")?;
    writeln!(w, "property double z")?;
    writeln!(w, "end_header")?;
    for p in &pc.points {
        writeln!(w, "{} {} {}", p.x, p.y, p.z)?;
    }
    Ok(())
}

pub fn write_xyz_to<W: Write>(pc: &PointCloud, w: &mut W) -> std::io::Result<()> {
    for p in &pc.points {
        writeln!(w, "{} {} {}", p.x, p.y, p.z)?;
    }
    Ok(())
}

pub fn read_ply(path: &Path) -> Result<PointCloud> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let next_line = |lines: &mut std::io::Lines<BufReader<File>>| -> Result<Option<String>> {
        lines.next().transpose().map_err(|e| Error::io(path, e))
    };

    if next_line(&mut lines)?.as_deref().map(str::trim) != Some("ply") {
        return Err(Error::parse(path, "missing 'ply' magic"));
    }
    let mut vertex_count: Option<usize> = None;
    let mut in_vertex = false;
    let mut props: Vec<String> = Vec::new();
    loop {
        let line = next_line(&mut lines)?.ok_or_else(|| Error::parse(path, "unterminated header"))?;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens.as_slice() {
            ["format", fmt, ..] if *fmt != "ascii" => {
                return Err(Error::parse(path, format!("unsupported PLY format '{fmt}'")));
            }
            ["element", "vertex", n] => {
                vertex_count = Some(n.parse().map_err(|_| Error::parse(path, "bad vertex count"))?);
                in_vertex = true;
            }
            ["element", ..] => in_vertex = false,
            ["property", _, name] if in_vertex => props.push((*name).to_string()),
            ["end_header"] => break,
            _ => {}
        }
    }
    let n = vertex_count.ok_or_else(|| Error::parse(path, "no vertex element"))?;
    let col = |name: &str| {
        props
            .iter()
            .position(|p| p == name)
            .ok_or_else(|| Error::parse(path, format!("missing vertex property '{name}'")))
    };
    let (ix, iy, iz) = (col("x")?, col("y")?, col("z")?);

    let mut points = Vec::with_capacity(n);
    for i in 0..n {
        let line = next_line(&mut lines)?
            .ok_or_else(|| Error::parse(path, format!("expected {n} vertices, found {i}")))?;
        let values = parse_floats(&line).map_err(|m| Error::parse(path, m))?;
        if values.len() < props.len() {
            return Err(Error::parse(path, format!("vertex {i} has too few values")));
        }
        points.push(Vec3::new(values[ix], values[iy], values[iz]));
    }
    Ok(PointCloud::new(points))
}

pub fn read_xyz(path: &Path) -> Result<PointCloud> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut points = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let values = parse_floats(trimmed).map_err(|m| Error::parse(path, m))?;
        if values.len() != 3 {
            return Err(Error::parse(
                path,
                format!("line {}: expected 3 columns, got {}", lineno + 1, values.len()),
            ));
        }
        points.push(Vec3::new(values[0], values[1], values[2]));
    }
    Ok(PointCloud::new(points))
}

fn parse_floats(line: &str) -> std::result::Result<Vec<f64>, String> {
    line.split_whitespace()
        .map(|tok| tok.parse::<f64>().map_err(|_| format!("bad number '{tok}'")))
        .collect()
}
