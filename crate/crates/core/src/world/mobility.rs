//! Reference Point Group Mobility workload: one leader moving back and forth
//! along a straight grid path, followers scattered around it every interval.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::grid::{Location, SensorGrid};
use crate::error::{domain, Result};
use crate::symbol::{ObjectId, Symbol};

/// One tracked observation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Item {
    /// Tracking-interval index.
    pub t: u32,
    pub symbol: Symbol,
}

impl Item {
    pub const fn new(t: u32, symbol: Symbol) -> Self {
        Item { t, symbol }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocationSequence {
    pub object_id: ObjectId,
    pub items: Vec<Item>,
}

impl LocationSequence {
    pub fn new(object_id: ObjectId, items: Vec<Item>) -> Result<Self> {
        let seq = LocationSequence { object_id, items };
        seq.validate()?;
        Ok(seq)
    }

    /// Builds a sequence with consecutive timestamps starting at `start`.
    pub fn from_symbols(object_id: ObjectId, start: u32, symbols: &[Symbol]) -> Self {
        let items = symbols
            .iter()
            .enumerate()
            .map(|(i, &s)| Item::new(start + i as u32, s))
            .collect();
        LocationSequence { object_id, items }
    }

    pub fn validate(&self) -> Result<()> {
        if self.items.windows(2).any(|w| w[0].t >= w[1].t) {
            return domain(format!(
                "timestamps of object {} are not strictly increasing",
                self.object_id
            ));
        }
        Ok(())
    }

    pub fn symbols(&self) -> Vec<Symbol> {
        self.items.iter().map(|i| i.symbol).collect()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Items with `from <= t < to`, timestamps kept.
    pub fn window(&self, from: u32, to: u32) -> LocationSequence {
        LocationSequence {
            object_id: self.object_id,
            items: self
                .items
                .iter()
                .copied()
                .filter(|i| i.t >= from && i.t < to)
                .collect(),
        }
    }
}

/// Workload parameters for one group.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub group_size: usize,
    /// Group dispersion radius in hops. Fractional values displace followers
    /// to `ceil(gdr)` hops with probability `gdr - floor(gdr)`.
    pub gdr: f64,
    /// Tracking intervals per batch (D).
    pub batch_period: u32,
    /// Error bound in hops (ε).
    pub error_bound: u32,
    pub tracking_interval: f64,
    /// Nodes per time unit.
    pub speed: f64,
    pub seed: u64,
    /// Euclidean distance between the leader's start and furthest point.
    /// `None` means half the grid diagonal.
    pub movement_range: Option<f64>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            group_size: 4,
            gdr: 0.0,
            batch_period: 100,
            error_bound: 0,
            tracking_interval: 0.5,
            speed: 1.0,
            seed: 0,
            movement_range: None,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.group_size == 0 {
            return domain("group size must be at least 1");
        }
        if !(self.gdr >= 0.0 && self.gdr.is_finite()) {
            return domain(format!("gdr must be a finite non-negative hop count, got {}", self.gdr));
        }
        if self.batch_period == 0 {
            return domain("batch period must be at least 1 interval");
        }
        if !(self.tracking_interval > 0.0 && self.tracking_interval.is_finite()) {
            return domain("tracking interval must be positive");
        }
        if !(self.speed >= 0.0 && self.speed.is_finite()) {
            return domain("speed must be non-negative");
        }
        if let Some(r) = self.movement_range {
            if !(r >= 0.0 && r.is_finite()) {
                return domain("movement range must be non-negative");
            }
        }
        Ok(())
    }
}

fn leader_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn member_rng(seed: u64, member: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(member + 1);
    rng
}

/// 4-connected rasterisation of the segment `from → to`; each step moves one
/// hop and stays as close as possible to the straight line.
pub fn grid_line(from: Location, to: Location) -> Vec<Location> {
    let (x0, y0) = (from.x as i64, from.y as i64);
    let (x1, y1) = (to.x as i64, to.y as i64);
    let (dx, dy) = (x1 - x0, y1 - y0);
    let (sx, sy) = (dx.signum(), dy.signum());
    let mut path = vec![from];
    let (mut x, mut y) = (x0, y0);
    // perpendicular offset from the ideal line, scaled by its length
    let offset = |px: i64, py: i64| ((px - x0) * dy - (py - y0) * dx).abs();
    while (x, y) != (x1, y1) {
        let step_x = x != x1 && (y == y1 || offset(x + sx, y) <= offset(x, y + sy));
        if step_x {
            x += sx;
        } else {
            y += sy;
        }
        path.push(Location::new(x as u32, y as u32));
    }
    path
}

fn pick_far_point(grid: &SensorGrid, start: Location, range: f64, rng: &mut impl Rng) -> Location {
    let dist = |l: Location| {
        let dx = l.x as f64 - start.x as f64;
        let dy = l.y as f64 - start.y as f64;
        (dx * dx + dy * dy).sqrt()
    };
    let nodes: Vec<Location> = (0..grid.height())
        .flat_map(|y| (0..grid.width()).map(move |x| Location::new(x, y)))
        .collect();
    let mut candidates: Vec<Location> = nodes
        .iter()
        .copied()
        .filter(|&l| (dist(l) - range).abs() <= 0.5)
        .collect();
    if candidates.is_empty() {
        let best = nodes
            .iter()
            .map(|&l| (dist(l) - range).abs())
            .fold(f64::INFINITY, f64::min);
        candidates = nodes
            .into_iter()
            .filter(|&l| (dist(l) - range).abs() <= best + 1e-9)
            .collect();
    }
    candidates[rng.gen_range(0..candidates.len())]
}

/// Hops travelled after `interval` tracking intervals.
fn hops_after(config: &ScenarioConfig, interval: u32) -> u64 {
    (config.speed * config.tracking_interval * interval as f64 + 1e-9).floor() as u64
}

fn ping_pong(path: &[Location], hops: u64) -> Location {
    let len = (path.len() - 1) as u64;
    if len == 0 {
        return path[0];
    }
    let k = hops % (2 * len);
    if k <= len {
        path[k as usize]
    } else {
        path[(2 * len - k) as usize]
    }
}

/// The leader's path for `config`: start node, furthest point and the grid
/// line between them.
pub fn leader_path(config: &ScenarioConfig, grid: &SensorGrid) -> Vec<Location> {
    let mut rng = leader_rng(config.seed);
    let start = Location::new(rng.gen_range(0..grid.width()), rng.gen_range(0..grid.height()));
    let range = config.movement_range.unwrap_or_else(|| {
        let w = (grid.width() - 1) as f64;
        let h = (grid.height() - 1) as f64;
        (w * w + h * h).sqrt() / 2.0
    });
    let end = pick_far_point(grid, start, range, &mut rng);
    grid_line(start, end)
}

/// Radius a follower is scattered within for one interval.
fn draw_radius(gdr: f64, u: f64) -> u32 {
    let lo = gdr.floor();
    let frac = gdr - lo;
    if frac > 0.0 && u < frac {
        lo as u32 + 1
    } else {
        lo as u32
    }
}

/// Simulates `config.batch_period` intervals of one group. Object 0 is the
/// leader; objects `1..n` are followers redrawn uniformly within the
/// dispersion radius every interval.
pub fn simulate_group(config: &ScenarioConfig, grid: &SensorGrid) -> Result<Vec<LocationSequence>> {
    simulate_group_from(config, grid, 0)
}

/// Like [`simulate_group`] but starting at interval `offset` of the same
/// motion. `simulate_group_from(c, g, k)` equals the tail of a longer run
/// for the leader, so a history window and a batch window can be drawn from
/// one trajectory.
pub fn simulate_group_from(
    config: &ScenarioConfig,
    grid: &SensorGrid,
    offset: u32,
) -> Result<Vec<LocationSequence>> {
    config.validate()?;
    let path = leader_path(config, grid);
    let leader: Vec<Location> = (0..config.batch_period)
        .map(|i| ping_pong(&path, hops_after(config, offset + i)))
        .collect();

    let mut out = Vec::with_capacity(config.group_size);
    out.push(LocationSequence::from_symbols(
        0,
        0,
        &leader.iter().map(|&l| grid.symbol(l)).collect::<Result<Vec<_>>>()?,
    ));
    for member in 1..config.group_size {
        let mut rng = member_rng(config.seed, member as u64);
        // keep draws aligned with absolute interval indices
        for _ in 0..offset {
            let _: (f64, f64) = (rng.gen(), rng.gen());
        }
        let mut symbols = Vec::with_capacity(leader.len());
        for &center in &leader {
            let (u_radius, u_pick): (f64, f64) = (rng.gen(), rng.gen());
            let ball = grid.ball(center, draw_radius(config.gdr, u_radius));
            let idx = ((u_pick * ball.len() as f64) as usize).min(ball.len() - 1);
            symbols.push(grid.symbol(ball[idx])?);
        }
        out.push(LocationSequence::from_symbols(member as ObjectId, 0, &symbols));
    }
    Ok(out)
}

/// An independent random walker: one hop to a uniformly chosen neighbour
/// every time the hop counter advances.
pub fn simulate_random_walk(
    config: &ScenarioConfig,
    grid: &SensorGrid,
    object_id: ObjectId,
) -> Result<LocationSequence> {
    config.validate()?;
    let mut rng = member_rng(config.seed ^ 0x5eed_0f_a11, object_id as u64);
    let mut pos = Location::new(rng.gen_range(0..grid.width()), rng.gen_range(0..grid.height()));
    let mut hops = 0;
    let mut symbols = Vec::with_capacity(config.batch_period as usize);
    for i in 0..config.batch_period {
        let target = hops_after(config, i);
        while hops < target {
            let neighbours: Vec<Location> = grid
                .ball(pos, 1)
                .into_iter()
                .filter(|&l| l != pos)
                .collect();
            pos = neighbours[rng.gen_range(0..neighbours.len())];
            hops += 1;
        }
        symbols.push(grid.symbol(pos)?);
    }
    Ok(LocationSequence::from_symbols(object_id, 0, &symbols))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::grid::hop_distance;

    fn config(n: usize, gdr: f64, d: u32, seed: u64) -> ScenarioConfig {
        ScenarioConfig {
            group_size: n,
            gdr,
            batch_period: d,
            seed,
            ..ScenarioConfig::default()
        }
    }

    #[test]
    fn zero_dispersion_colocates_the_group() {
        let grid = SensorGrid::default();
        let seqs = simulate_group(&config(4, 0.0, 60, 3), &grid).unwrap();
        assert_eq!(seqs.len(), 4);
        for s in &seqs[1..] {
            assert_eq!(s.items, seqs[0].items);
        }
    }

    #[test]
    fn leader_moves_at_most_every_second_interval() {
        let grid = SensorGrid::default();
        for seed in 0..20 {
            let seqs = simulate_group(&config(1, 0.0, 120, seed), &grid).unwrap();
            let sym = seqs[0].symbols();
            for i in 1..sym.len() {
                if sym[i] != sym[i - 1] {
                    assert!(i < 2 || sym[i - 1] == sym[i - 2], "seed {seed} at {i}");
                    let a = grid.location(sym[i]).unwrap();
                    let b = grid.location(sym[i - 1]).unwrap();
                    assert_eq!(hop_distance(a, b), 1);
                }
            }
        }
    }

    #[test]
    fn followers_stay_within_dispersion_radius() {
        let grid = SensorGrid::default();
        for &gdr in &[0.1, 0.5, 1.0, 2.0, 2.5] {
            let seqs = simulate_group(&config(6, gdr, 80, 11), &grid).unwrap();
            let bound = (gdr as f64).ceil() as u32;
            for s in &seqs[1..] {
                for (f, l) in s.items.iter().zip(&seqs[0].items) {
                    let d = grid.symbol_distance(f.symbol, l.symbol).unwrap();
                    assert!(d <= bound);
                }
            }
        }
        // a follower at GDR=1 next to a leader at (5,5)
        let ball = grid.ball(Location::new(5, 5), draw_radius(1.0, 0.3));
        assert!(ball.iter().all(|&l| hop_distance(l, Location::new(5, 5)) <= 1));
    }

    #[test]
    fn same_seed_same_trajectories() {
        let grid = SensorGrid::default();
        let c = config(5, 0.75, 50, 42);
        assert_eq!(simulate_group(&c, &grid).unwrap(), simulate_group(&c, &grid).unwrap());
        let other = simulate_group(&config(5, 0.75, 50, 43), &grid).unwrap();
        assert_ne!(simulate_group(&c, &grid).unwrap(), other);
    }

    #[test]
    fn offset_windows_continue_the_same_motion() {
        let grid = SensorGrid::default();
        let long = simulate_group(&config(3, 0.5, 90, 5), &grid).unwrap();
        let tail = simulate_group_from(&config(3, 0.5, 40, 5), &grid, 50).unwrap();
        for (l, t) in long.iter().zip(&tail) {
            assert_eq!(l.symbols()[50..], t.symbols()[..]);
        }
    }

    #[test]
    fn grid_line_is_four_connected() {
        let path = grid_line(Location::new(2, 9), Location::new(12, 3));
        assert_eq!(path.len(), 17);
        for w in path.windows(2) {
            assert_eq!(hop_distance(w[0], w[1]), 1);
        }
        assert_eq!(*path.last().unwrap(), Location::new(12, 3));
    }

    #[test]
    fn random_walk_moves_one_hop_at_a_time() {
        let grid = SensorGrid::default();
        let walk = simulate_random_walk(&config(1, 0.0, 100, 9), &grid, 7).unwrap();
        assert_eq!(walk.len(), 100);
        for w in walk.items.windows(2) {
            assert!(grid.symbol_distance(w[0].symbol, w[1].symbol).unwrap() <= 1);
        }
    }

    #[test]
    fn invalid_configs_are_rejected() {
        assert!(config(0, 0.0, 10, 0).validate().is_err());
        assert!(config(1, -1.0, 10, 0).validate().is_err());
        assert!(config(1, 0.0, 0, 0).validate().is_err());
    }
}
