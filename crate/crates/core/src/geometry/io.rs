//! Point-cloud and box file formats.
//!
//! Binary clouds (`.bin`), little-endian:
//!
//! ```text
//! u32  point count N
//! u8   flags (bit 0: intensity present)
//! N × { f32 x, f32 y, f32 z [, f32 intensity] }
//! ```
//!
//! ASCII PLY with `x y z` and an optional `intensity` vertex property is
//! accepted and written for interchange. Boxes are a JSON array of
//! `{center:[x,y,z], size:[w,l,h], yaw, class_id}`.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use super::{OrientedBox, Point3, PointCloud};
use crate::{Error, Result};

const FLAG_INTENSITY: u8 = 1;

pub fn write_binary<W: Write>(cloud: &PointCloud, mut w: W) -> Result<()> {
    let n = u32::try_from(cloud.len()).map_err(|_| Error::invalid("cloud too large"))?;
    w.write_u32::<LittleEndian>(n)?;
    let intensity = cloud.intensity();
    w.write_u8(if intensity.is_some() { FLAG_INTENSITY } else { 0 })?;
    for (i, p) in cloud.points().iter().enumerate() {
        w.write_f32::<LittleEndian>(p.x as f32)?;
        w.write_f32::<LittleEndian>(p.y as f32)?;
        w.write_f32::<LittleEndian>(p.z as f32)?;
        if let Some(v) = intensity {
            w.write_f32::<LittleEndian>(v[i])?;
        }
    }
    Ok(())
}

pub fn read_binary<R: Read>(mut r: R) -> Result<PointCloud> {
    let n = r.read_u32::<LittleEndian>()? as usize;
    let flags = r.read_u8()?;
    if flags & !FLAG_INTENSITY != 0 {
        return Err(Error::malformed(4, format!("unknown flags {flags:#x}")));
    }
    let has_intensity = flags & FLAG_INTENSITY != 0;
    let mut points = Vec::with_capacity(n.min(1 << 24));
    let mut intensity = Vec::new();
    for _ in 0..n {
        let x = r.read_f32::<LittleEndian>()? as f64;
        let y = r.read_f32::<LittleEndian>()? as f64;
        let z = r.read_f32::<LittleEndian>()? as f64;
        points.push(Point3::new(x, y, z));
        if has_intensity {
            intensity.push(r.read_f32::<LittleEndian>()?);
        }
    }
    let cloud = PointCloud::new(points)?;
    if has_intensity {
        cloud.with_intensity(intensity)
    } else {
        Ok(cloud)
    }
}

pub fn write_ply<W: Write>(cloud: &PointCloud, mut w: W) -> Result<()> {
    let intensity = cloud.intensity();
    writeln!(w, "ply\nformat ascii 1.0\nelement vertex {}", cloud.len())?;
    writeln!(w, "property float x\nproperty float y\nproperty float z")?;
    if intensity.is_some() {
        writeln!(w, "property float intensity")?;
    }
    writeln!(w, "end_header")?;
    for (i, p) in cloud.points().iter().enumerate() {
        match intensity {
            Some(v) => writeln!(w, "{} {} {} {}", p.x, p.y, p.z, v[i])?,
            None => writeln!(w, "{} {} {}", p.x, p.y, p.z)?,
        }
    }
    Ok(())
}

pub fn read_ply<R: Read>(r: R) -> Result<PointCloud> {
    let mut lines = BufReader::new(r).lines();
    let mut next = || -> Result<String> {
        lines
            .next()
            .ok_or_else(|| Error::invalid("unexpected end of PLY file"))?
            .map_err(Error::from)
    };
    if next()?.trim() != "ply" {
        return Err(Error::invalid("missing PLY magic"));
    }
    let mut count = None;
    let mut props = Vec::new();
    loop {
        let line = next()?;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens.as_slice() {
            ["format", fmt, ..] if *fmt != "ascii" => {
                return Err(Error::invalid("only ASCII PLY is supported"))
            }
            ["element", "vertex", n] => {
                count = Some(n.parse::<usize>().map_err(|e| Error::invalid(e.to_string()))?)
            }
            ["element", ..] if count.is_some() => {}
            ["property", _, name] if count.is_some() => props.push(name.to_string()),
            ["end_header"] => break,
            _ => {}
        }
    }
    let count = count.ok_or_else(|| Error::invalid("PLY has no vertex element"))?;
    let col = |name: &str| props.iter().position(|p| p == name);
    let (xi, yi, zi) = match (col("x"), col("y"), col("z")) {
        (Some(x), Some(y), Some(z)) => (x, y, z),
        _ => return Err(Error::invalid("PLY vertex lacks x/y/z")),
    };
    let ii = col("intensity");
    let mut points = Vec::with_capacity(count);
    let mut intensity = Vec::new();
    for _ in 0..count {
        let line = next()?;
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|e| Error::invalid(e.to_string())))
            .collect::<Result<_>>()?;
        if vals.len() < props.len() {
            return Err(Error::invalid("short PLY vertex row"));
        }
        points.push(Point3::new(vals[xi], vals[yi], vals[zi]));
        if let Some(i) = ii {
            intensity.push(vals[i] as f32);
        }
    }
    let cloud = PointCloud::new(points)?;
    if ii.is_some() {
        cloud.with_intensity(intensity)
    } else {
        Ok(cloud)
    }
}

/// Loads a cloud, choosing the format from the extension (`.ply` or binary).
pub fn load_cloud(path: &Path) -> Result<PointCloud> {
    let file = fs::File::open(path)?;
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("ply")) {
        read_ply(file)
    } else {
        read_binary(BufReader::new(file))
    }
}

pub fn save_cloud(cloud: &PointCloud, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("ply")) {
        write_ply(cloud, &mut buf)?;
    } else {
        write_binary(cloud, &mut buf)?;
    }
    write_atomic(path, &buf)
}

pub fn load_boxes(path: &Path) -> Result<Vec<OrientedBox>> {
    super::boxes_from_json(&fs::read_to_string(path)?)
}

pub fn save_boxes(boxes: &[OrientedBox], path: &Path) -> Result<()> {
    write_atomic(path, serde_json::to_string_pretty(boxes)?.as_bytes())
}

/// Writes through a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> PointCloud {
        PointCloud::new(vec![
            Point3::new(0.5, -1.25, 2.0),
            Point3::new(10.0, 20.0, -3.5),
            Point3::new(0.0, 0.0, 0.0),
        ])
        .unwrap()
    }

    #[test]
    fn binary_round_trip_with_intensity() {
        let cloud = sample().with_intensity(vec![0.1, 0.5, 1.0]).unwrap();
        let mut buf = Vec::new();
        write_binary(&cloud, &mut buf).unwrap();
        assert_eq!(buf.len(), 5 + 3 * 16);
        let back = read_binary(buf.as_slice()).unwrap();
        assert_eq!(back.points(), cloud.points());
        assert_eq!(back.intensity(), cloud.intensity());
    }

    #[test]
    fn truncated_binary_is_an_error() {
        let mut buf = Vec::new();
        write_binary(&sample(), &mut buf).unwrap();
        assert!(read_binary(&buf[..buf.len() - 2]).is_err());
    }

    #[test]
    fn ply_round_trip() {
        let mut buf = Vec::new();
        write_ply(&sample(), &mut buf).unwrap();
        let back = read_ply(buf.as_slice()).unwrap();
        assert_eq!(back.points(), sample().points());
        assert!(back.intensity().is_none());
    }

    #[test]
    fn ply_extra_properties_are_skipped() {
        let text = "ply\nformat ascii 1.0\nelement vertex 1\nproperty float y\nproperty float x\n\
                    property uchar red\nproperty float z\nproperty float intensity\nend_header\n\
                    2 1 255 3 0.25\n";
        let cloud = read_ply(text.as_bytes()).unwrap();
        assert_eq!(cloud.points()[0], Point3::new(1.0, 2.0, 3.0));
        assert_eq!(cloud.intensity().unwrap(), &[0.25]);
    }
}
