use crate::error::{domain, Result};
use crate::symbol::Symbol;

/// A node position on the sensor grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Location {
    pub x: u32,
    pub y: u32,
}

impl Location {
    pub const fn new(x: u32, y: u32) -> Self {
        Location { x, y }
    }
}

/// Two-layer tracking network: a `width × height` mesh of sensor nodes tiled
/// into `cluster_grid × cluster_grid` equal square clusters.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SensorGrid {
    width: u32,
    height: u32,
    cluster_grid: u32,
}

impl Default for SensorGrid {
    fn default() -> Self {
        SensorGrid {
            width: 16,
            height: 16,
            cluster_grid: 4,
        }
    }
}

impl SensorGrid {
    pub fn new(width: u32, height: u32, cluster_grid: u32) -> Result<Self> {
        if width == 0 || height == 0 {
            return domain("grid must have at least one node");
        }
        if cluster_grid == 0 || width % cluster_grid != 0 || height % cluster_grid != 0 {
            return domain(format!(
                "{cluster_grid} clusters per side do not tile a {width}x{height} grid"
            ));
        }
        Ok(SensorGrid {
            width,
            height,
            cluster_grid,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn cluster_grid(&self) -> u32 {
        self.cluster_grid
    }

    pub fn node_count(&self) -> u32 {
        self.width * self.height
    }

    pub fn cluster_count(&self) -> u32 {
        self.cluster_grid * self.cluster_grid
    }

    pub fn contains(&self, loc: Location) -> bool {
        loc.x < self.width && loc.y < self.height
    }

    pub fn check(&self, loc: Location) -> Result<Location> {
        if self.contains(loc) {
            Ok(loc)
        } else {
            domain(format!(
                "location ({}, {}) is off the {}x{} grid",
                loc.x, loc.y, self.width, self.height
            ))
        }
    }

    pub fn symbol(&self, loc: Location) -> Result<Symbol> {
        let loc = self.check(loc)?;
        Ok(loc.y * self.width + loc.x)
    }

    pub fn location(&self, symbol: Symbol) -> Result<Location> {
        if symbol >= self.node_count() {
            return domain(format!("symbol {symbol} is not a node of the grid"));
        }
        Ok(Location::new(symbol % self.width, symbol / self.width))
    }

    /// Cluster tile holding `loc`, numbered row-major.
    pub fn cluster_of(&self, loc: Location) -> Result<u32> {
        let loc = self.check(loc)?;
        let tile_w = self.width / self.cluster_grid;
        let tile_h = self.height / self.cluster_grid;
        Ok((loc.y / tile_h) * self.cluster_grid + loc.x / tile_w)
    }

    pub fn cluster_of_symbol(&self, symbol: Symbol) -> Result<u32> {
        self.cluster_of(self.location(symbol)?)
    }

    /// Hop count between two grid nodes.
    pub fn hop_distance(&self, a: Location, b: Location) -> Result<u32> {
        self.check(a)?;
        self.check(b)?;
        Ok(a.x.abs_diff(b.x) + a.y.abs_diff(b.y))
    }

    pub fn symbol_distance(&self, a: Symbol, b: Symbol) -> Result<u32> {
        self.hop_distance(self.location(a)?, self.location(b)?)
    }

    /// All on-grid nodes within `radius` hops of `center`, row-major.
    pub fn ball(&self, center: Location, radius: u32) -> Vec<Location> {
        let r = radius as i64;
        let (cx, cy) = (center.x as i64, center.y as i64);
        let mut out = Vec::new();
        for y in (cy - r).max(0)..=(cy + r).min(self.height as i64 - 1) {
            let rem = r - (y - cy).abs();
            for x in (cx - rem).max(0)..=(cx + rem).min(self.width as i64 - 1) {
                out.push(Location::new(x as u32, y as u32));
            }
        }
        out
    }
}

/// Manhattan hop distance on an unbounded grid. Use
/// [`SensorGrid::hop_distance`] when the operands must be validated.
pub fn hop_distance(a: Location, b: Location) -> u32 {
    a.x.abs_diff(b.x) + a.y.abs_diff(b.y)
}
