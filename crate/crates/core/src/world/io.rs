//! Trajectory CSV (`t,object_id,x,y`) and flat `key=value` scenario files.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use super::grid::{Location, SensorGrid};
use super::mobility::{Item, LocationSequence, ScenarioConfig};
use crate::error::{format, Error, Result};

pub const TRAJECTORY_HEADER: [&str; 4] = ["t", "object_id", "x", "y"];

fn csv_err(e: csv::Error) -> Error {
    Error::Format(e.to_string())
}

/// Writes one row per object per interval, ordered by `(t, object_id)`.
pub fn write_trajectories<W: Write>(
    out: W,
    seqs: &[LocationSequence],
    grid: &SensorGrid,
) -> Result<()> {
    let mut rows = Vec::new();
    for s in seqs {
        for item in &s.items {
            let loc = grid.location(item.symbol)?;
            rows.push((item.t, s.object_id, loc.x, loc.y));
        }
    }
    rows.sort_unstable();
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRAJECTORY_HEADER).map_err(csv_err)?;
    for (t, id, x, y) in rows {
        w.serialize((t, id, x, y)).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trajectories<R: Read>(input: R, grid: &SensorGrid) -> Result<Vec<LocationSequence>> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers().map_err(csv_err)?.clone();
    if headers.iter().map(str::trim).ne(TRAJECTORY_HEADER) {
        return format(format!("expected header t,object_id,x,y, got {:?}", headers));
    }
    let mut per_object: BTreeMap<u32, Vec<Item>> = BTreeMap::new();
    for row in r.deserialize::<(u32, u32, u32, u32)>() {
        let (t, id, x, y) = row.map_err(csv_err)?;
        let symbol = grid.symbol(Location::new(x, y))?;
        per_object.entry(id).or_default().push(Item::new(t, symbol));
    }
    per_object
        .into_iter()
        .map(|(id, mut items)| {
            items.sort();
            LocationSequence::new(id, items)
        })
        .collect()
}

/// Parses `key=value` lines; `#` starts a comment.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return format(format!("line {}: expected key=value", lineno + 1));
        };
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

fn parse_field<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Format(format!("bad value for {key}: {value:?}")))
}

impl ScenarioConfig {
    /// Applies recognised keys from a `key=value` file on top of `self`.
    /// Unknown keys are returned so callers can route them elsewhere.
    pub fn apply_key_values(
        &mut self,
        kv: &BTreeMap<String, String>,
    ) -> Result<Vec<String>> {
        let mut unknown = Vec::new();
        for (k, v) in kv {
            match k.as_str() {
                "group_size" | "n" => self.group_size = parse_field(k, v)?,
                "gdr" => self.gdr = parse_field(k, v)?,
                "batch_period" | "D" => self.batch_period = parse_field(k, v)?,
                "error_bound" | "eps" => self.error_bound = parse_field(k, v)?,
                "tracking_interval" => self.tracking_interval = parse_field(k, v)?,
                "speed" => self.speed = parse_field(k, v)?,
                "seed" => self.seed = parse_field(k, v)?,
                "movement_range" => self.movement_range = Some(parse_field(k, v)?),
                _ => unknown.push(k.clone()),
            }
        }
        self.validate()?;
        Ok(unknown)
    }

    pub fn from_key_values(text: &str) -> Result<Self> {
        let mut config = ScenarioConfig::default();
        config.apply_key_values(&parse_key_values(text)?)?;
        Ok(config)
    }

    pub fn to_key_values(&self) -> String {
        let mut s = format!(
            "group_size={}\ngdr={}\nbatch_period={}\nerror_bound={}\ntracking_interval={}\nspeed={}\nseed={}\n",
            self.group_size,
            self.gdr,
            self.batch_period,
            self.error_bound,
            self.tracking_interval,
            self.speed,
            self.seed
        );
        if let Some(r) = self.movement_range {
            s.push_str(&format!("movement_range={r}\n"));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::simulate_group;

    #[test]
    fn csv_roundtrip() {
        let grid = SensorGrid::default();
        let config = ScenarioConfig {
            group_size: 3,
            gdr: 1.0,
            batch_period: 20,
            seed: 4,
            ..Default::default()
        };
        let seqs = simulate_group(&config, &grid).unwrap();
        let mut buf = Vec::new();
        write_trajectories(&mut buf, &seqs, &grid).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,object_id,x,y\n"));
        assert_eq!(text.lines().count(), 1 + 3 * 20);
        assert_eq!(read_trajectories(&buf[..], &grid).unwrap(), seqs);
    }

    #[test]
    fn off_grid_rows_are_rejected() {
        let grid = SensorGrid::default();
        let text = "t,object_id,x,y\n0,1,16,0\n";
        assert!(read_trajectories(text.as_bytes(), &grid).is_err());
    }

    #[test]
    fn key_value_config() {
        let text = "# scenario\nn = 8\ngdr=0.25\nD=200\neps=1\nseed=9\n";
        let c = ScenarioConfig::from_key_values(text).unwrap();
        assert_eq!((c.group_size, c.gdr, c.batch_period, c.error_bound, c.seed), (8, 0.25, 200, 1, 9));
        assert_eq!(ScenarioConfig::from_key_values(&c.to_key_values()).unwrap(), c);
        assert!(ScenarioConfig::from_key_values("n=0").is_err());
        assert!(ScenarioConfig::from_key_values("n").is_err());
    }
}
