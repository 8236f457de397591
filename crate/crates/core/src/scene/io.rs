//! Scene CSV: one header row, one scene per row.
//!
//! Columns: time, ball_x, ball_y, ball_vx, ball_vy, attacker_x, attacker_y,
//! attacker_body_angle, keeper_x, keeper_y, kick_power, target_x, target_y,
//! label, def1_x, def1_y, ..., def10_x, def10_y. Absent defenders leave both
//! cells empty. Numbers use shortest round-trip decimal text.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::{KickScene, Outcome, MAX_DEFENDERS};
use crate::error::{Error, Result};
use crate::geometry::{FieldConfig, Vec2};

const FIXED_COLUMNS: [&str; 14] = [
    "time",
    "ball_x",
    "ball_y",
    "ball_vx",
    "ball_vy",
    "attacker_x",
    "attacker_y",
    "attacker_body_angle",
    "keeper_x",
    "keeper_y",
    "kick_power",
    "target_x",
    "target_y",
    "label",
];

pub const SCENE_COLUMNS: usize = FIXED_COLUMNS.len() + 2 * MAX_DEFENDERS;

fn header() -> Vec<String> {
    let mut h: Vec<String> = FIXED_COLUMNS.iter().map(|s| s.to_string()).collect();
    for i in 1..=MAX_DEFENDERS {
        h.push(format!("def{i}_x"));
        h.push(format!("def{i}_y"));
    }
    h
}

pub fn write_scenes<W: Write>(scenes: &[KickScene], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(header())?;
    for s in scenes {
        if s.defenders.len() > MAX_DEFENDERS {
            return Err(Error::data(format!("scene has more than {MAX_DEFENDERS} defenders")));
        }
        let mut row: Vec<String> = vec![
            s.time.to_string(),
            s.ball.x.to_string(),
            s.ball.y.to_string(),
            s.ball_velocity.x.to_string(),
            s.ball_velocity.y.to_string(),
            s.attacker.x.to_string(),
            s.attacker.y.to_string(),
            s.attacker_body_angle.to_string(),
            s.keeper.x.to_string(),
            s.keeper.y.to_string(),
            s.kick_power.to_string(),
            s.target.x.to_string(),
            s.target.y.to_string(),
            s.label.to_string(),
        ];
        for i in 0..MAX_DEFENDERS {
            match s.defenders.get(i) {
                Some(d) => {
                    row.push(d.x.to_string());
                    row.push(d.y.to_string());
                }
                None => {
                    row.push(String::new());
                    row.push(String::new());
                }
            }
        }
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io("<scene writer>", e))?;
    Ok(())
}

pub fn save_scenes(scenes: &[KickScene], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_scenes(scenes, std::io::BufWriter::new(file))
}

struct RowParser<'a> {
    source: &'a str,
    line: u64,
    record: &'a csv::StringRecord,
    columns: &'a [String],
}

impl RowParser<'_> {
    fn error(&self, col: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            path: self.source.to_string(),
            line: self.line,
            column: self.columns[col].clone(),
            message: message.into(),
        }
    }

    fn raw(&self, col: usize) -> &str {
        self.record.get(col).unwrap_or("").trim()
    }

    fn f64(&self, col: usize) -> Result<f64> {
        let raw = self.raw(col);
        match raw.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            Ok(_) => Err(self.error(col, format!("non-finite number `{raw}`"))),
            Err(_) => Err(self.error(col, format!("expected a number, got `{raw}`"))),
        }
    }

    fn vec2(&self, col: usize) -> Result<Vec2> {
        Ok(Vec2::new(self.f64(col)?, self.f64(col + 1)?))
    }

    fn scene(&self, field: &FieldConfig) -> Result<KickScene> {
        let time = self
            .raw(0)
            .parse::<u32>()
            .map_err(|_| self.error(0, format!("expected a non-negative integer, got `{}`", self.raw(0))))?;
        let label: Outcome = self.raw(13).parse().map_err(|m: String| self.error(13, m))?;
        let mut defenders = Vec::new();
        let mut seen_gap = false;
        for i in 0..MAX_DEFENDERS {
            let col = FIXED_COLUMNS.len() + 2 * i;
            match (self.raw(col).is_empty(), self.raw(col + 1).is_empty()) {
                (true, true) => seen_gap = true,
                (false, false) if !seen_gap => defenders.push(self.vec2(col)?),
                (false, false) => return Err(self.error(col, "defender after an empty defender slot")),
                _ => return Err(self.error(col, "defender needs both coordinates or neither")),
            }
        }
        let scene = KickScene {
            time,
            ball: self.vec2(1)?,
            ball_velocity: self.vec2(3)?,
            attacker: self.vec2(5)?,
            attacker_body_angle: self.f64(7)?,
            keeper: self.vec2(8)?,
            kick_power: self.f64(10)?,
            target: self.vec2(11)?,
            label,
            defenders,
        };
        let check = |col: usize, p: Vec2| {
            if field.contains(p) {
                Ok(())
            } else {
                Err(self.error(col, format!("position ({}, {}) outside the field", p.x, p.y)))
            }
        };
        check(1, scene.ball)?;
        check(5, scene.attacker)?;
        check(8, scene.keeper)?;
        for (i, d) in scene.defenders.iter().enumerate() {
            check(FIXED_COLUMNS.len() + 2 * i, *d)?;
        }
        Ok(scene)
    }
}

/// Parse scenes from CSV text; `source` names the input in diagnostics.
pub fn read_scenes<R: Read>(reader: R, source: &str, field: &FieldConfig) -> Result<Vec<KickScene>> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let expected = header();
    let found: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    if found != expected {
        let (col, message) = match found.iter().zip(&expected).position(|(a, b)| a != b) {
            Some(i) => (expected[i].clone(), format!("expected header `{}`, found `{}`", expected[i], found[i])),
            None => ("<header>".to_string(), format!("expected {} columns, found {}", expected.len(), found.len())),
        };
        return Err(Error::Parse { path: source.to_string(), line: 1, column: col, message });
    }
    let mut scenes = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != SCENE_COLUMNS {
            return Err(Error::Parse {
                path: source.to_string(),
                line,
                column: "<row>".to_string(),
                message: format!("expected {SCENE_COLUMNS} fields, found {}", record.len()),
            });
        }
        let parser = RowParser { source, line, record: &record, columns: &expected };
        scenes.push(parser.scene(field)?);
    }
    Ok(scenes)
}

pub fn load_scenes(path: impl AsRef<Path>, field: &FieldConfig) -> Result<Vec<KickScene>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_scenes(std::io::BufReader::new(file), &path.display().to_string(), field)
}
