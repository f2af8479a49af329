use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};

use grouptrack::bench::{emit_report, run_experiment, ExperimentSpec};
use grouptrack::cipher::{decrypt_packet, encrypt_packet, KeySchedule, Mode};
use grouptrack::codec::{build_group_models, compress_batch, unpack_batch, CodecConfig, GroupModel, PacketConfig};
use grouptrack::codec::HuffmanTable;
use grouptrack::mining::{mine_groups, MiningParams, PatternTree, PstParams};
use grouptrack::world::io::{parse_key_values, read_trajectories, write_trajectories};
use grouptrack::world::{simulate_group_from, simulate_random_walk, LocationSequence, ScenarioConfig, SensorGrid};

const BATCH_MAGIC: &[u8; 4] = b"GTB1";

/// Group movement mining and batch compression of tracking updates.
#[derive(Parser, Debug)]
#[command(name = "grouptrack", version, args_override_self = true)]
struct Cli {
    /// key=value file; its entries override command-line flags of the same name.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate one group (plus optional random walkers) and write trajectories.csv.
    Simulate(SimulateArgs),
    /// Mine groups from trajectories and write groups.csv plus one model per group.
    Mine(MineArgs),
    /// Compress trajectories into batch.bin with mined group models.
    Compress(CompressArgs),
    /// Restore trajectories.csv from batch.bin.
    Decompress(DecompressArgs),
    /// Encrypt a file with Blowfish.
    Encrypt(CipherArgs),
    /// Decrypt a file produced by `encrypt`.
    Decrypt(CipherArgs),
    /// Run the parameter sweeps and write metrics.csv, details.csv and plots.
    Bench(BenchArgs),
}

#[derive(Args, Debug, Clone)]
struct GridArgs {
    #[arg(long, default_value_t = 16)]
    width: u32,
    #[arg(long, default_value_t = 16)]
    height: u32,
    /// Clusters per side.
    #[arg(long, default_value_t = 4)]
    cluster_grid: u32,
}

impl GridArgs {
    fn grid(&self) -> Result<SensorGrid> {
        Ok(SensorGrid::new(self.width, self.height, self.cluster_grid)?)
    }
}

#[derive(Args, Debug, Clone)]
struct ScenarioArgs {
    /// Group size.
    #[arg(long = "n", default_value_t = 4)]
    group_size: usize,
    /// Group dispersion radius in hops.
    #[arg(long, default_value_t = 0.0)]
    gdr: f64,
    /// Batch period in tracking intervals.
    #[arg(long = "D", default_value_t = 100)]
    batch_period: u32,
    /// Error bound in hops.
    #[arg(long, default_value_t = 0)]
    eps: u32,
    #[arg(long, default_value_t = 0.5)]
    tracking_interval: f64,
    #[arg(long, default_value_t = 1.0)]
    speed: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Distance between the leader's endpoints; half the grid diagonal if unset.
    #[arg(long)]
    movement_range: Option<f64>,
}

impl ScenarioArgs {
    fn config(&self) -> ScenarioConfig {
        ScenarioConfig {
            group_size: self.group_size,
            gdr: self.gdr,
            batch_period: self.batch_period,
            error_bound: self.eps,
            tracking_interval: self.tracking_interval,
            speed: self.speed,
            seed: self.seed,
            movement_range: self.movement_range,
        }
    }
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[command(flatten)]
    grid: GridArgs,
    /// Independent random walkers added after the group.
    #[arg(long, default_value_t = 0)]
    walkers: u32,
    /// First tracking interval of the simulated window.
    #[arg(long, default_value_t = 0)]
    offset: u32,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Clone)]
struct MiningArgs {
    #[arg(long, default_value_t = 3)]
    regions: u32,
    /// Minimum similarity score for an edge.
    #[arg(long, default_value_t = 2.0)]
    threshold: f64,
    #[arg(long, default_value_t = 4)]
    levels: usize,
    #[arg(long, default_value_t = 8)]
    min_region_items: usize,
    #[arg(long, default_value_t = 0.02)]
    min_probability: f64,
    #[arg(long, default_value_t = 5)]
    max_depth: usize,
    #[arg(long, default_value_t = 0.001)]
    smoothing: f64,
}

impl MiningArgs {
    fn params(&self) -> MiningParams<f64> {
        MiningParams {
            pst: self.pst(),
            similarity_threshold: self.threshold,
            ensemble_levels: self.levels,
            regions: self.regions,
            min_region_items: self.min_region_items,
        }
    }

    fn pst(&self) -> PstParams<f64> {
        PstParams {
            min_probability: self.min_probability,
            max_depth: self.max_depth,
            smoothing: self.smoothing,
        }
    }
}

#[derive(Args, Debug)]
struct MineArgs {
    /// trajectories.csv
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    mining: MiningArgs,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Clone)]
struct PacketArgs {
    #[arg(long, default_value_t = 8)]
    timestamp_bits: u32,
    #[arg(long, default_value_t = 8)]
    location_bits: u32,
    #[arg(long, default_value_t = 8)]
    id_bits: u32,
    #[arg(long, default_value_t = 8)]
    length_bits: u32,
}

impl PacketArgs {
    fn config(&self) -> PacketConfig {
        PacketConfig {
            header_bytes: 4,
            timestamp_bits: self.timestamp_bits,
            location_bits: self.location_bits,
            id_bits: self.id_bits,
            length_bits: self.length_bits,
        }
    }
}

#[derive(Args, Debug)]
struct CompressArgs {
    /// trajectories.csv
    #[arg(long)]
    input: PathBuf,
    /// Directory written by `mine`.
    #[arg(long)]
    models: PathBuf,
    /// Error bound in hops.
    #[arg(long, default_value_t = 0)]
    eps: u32,
    /// Timestamp of the first interval of the batch.
    #[arg(long, default_value_t = 0)]
    start: u32,
    /// Cardinality cap of the multiple-symbol rule.
    #[arg(long, default_value_t = 5)]
    max_combination: usize,
    /// Skip the replace phase.
    #[arg(long)]
    no_replace: bool,
    #[command(flatten)]
    packet: PacketArgs,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct DecompressArgs {
    /// batch.bin
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    models: PathBuf,
    #[command(flatten)]
    packet: PacketArgs,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum ModeArg {
    Ecb,
    Cbc,
}

#[derive(Args, Debug)]
struct CipherArgs {
    #[arg(long)]
    input: PathBuf,
    /// Key as hex, 4 to 56 bytes.
    #[arg(long, env = "GROUPTRACK_KEY", hide_env_values = true)]
    key: String,
    #[arg(long, value_enum, default_value_t = ModeArg::Ecb)]
    mode: ModeArg,
    /// CBC initialisation vector as 16 hex digits.
    #[arg(long, default_value = "0000000000000000")]
    iv: String,
    #[arg(long)]
    out: PathBuf,
}

impl CipherArgs {
    fn schedule(&self) -> Result<(KeySchedule, Mode)> {
        let key = hex::decode(self.key.trim()).context("key is not valid hex")?;
        let ks = KeySchedule::new(&key)?;
        let mode = match self.mode {
            ModeArg::Ecb => Mode::Ecb,
            ModeArg::Cbc => Mode::Cbc {
                iv: u64::from_str_radix(self.iv.trim(), 16).context("iv must be 16 hex digits")?,
            },
        };
        Ok((ks, mode))
    }
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',', action = ArgAction::Set, default_values_t = [0.1, 0.25, 0.5, 0.75, 1.0])]
    gdrs: Vec<f64>,
    #[arg(long, value_delimiter = ',', action = ArgAction::Set, default_values_t = [1, 2, 4, 8, 16])]
    sizes: Vec<usize>,
    #[arg(long, value_delimiter = ',', action = ArgAction::Set, default_values_t = [50, 100, 200])]
    periods: Vec<u32>,
    #[arg(long, value_delimiter = ',', action = ArgAction::Set, default_values_t = [0, 1, 2])]
    epsilons: Vec<u32>,
    #[arg(long, value_delimiter = ',', action = ArgAction::Set, default_values_t = [1, 2, 4, 8, 16])]
    identical_sizes: Vec<usize>,
    #[arg(long, default_value_t = 0.1)]
    base_gdr: f64,
    #[arg(long, default_value_t = 8)]
    base_size: usize,
    #[arg(long, default_value_t = 100)]
    base_period: u32,
    #[arg(long, default_value_t = 1.0)]
    epsilon_gdr: f64,
    #[arg(long, default_value_t = 5)]
    reps: u32,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Intervals the group model is learned on before each batch.
    #[arg(long, default_value_t = 200)]
    history: u32,
    /// Mine the groups instead of using the simulated group.
    #[arg(long)]
    mine: bool,
    #[command(flatten)]
    mining: MiningArgs,
    #[command(flatten)]
    packet: PacketArgs,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long)]
    out: PathBuf,
}

/// Appends `--key=value` for every entry of the `--config` file so that
/// the file wins over earlier flags.
fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let mut path = None;
    let mut iter = args.iter();
    while let Some(a) = iter.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            path = iter.next().map(PathBuf::from);
        } else if let Some(p) = s.strip_prefix("--config=") {
            path = Some(PathBuf::from(p));
        }
    }
    let Some(path) = path else {
        return Ok(args);
    };
    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let mut out = args;
    for (k, v) in parse_key_values(&text)? {
        let flag = match k.as_str() {
            "group_size" => "n".to_string(),
            "batch_period" => "D".to_string(),
            "error_bound" => "eps".to_string(),
            other => other.replace('_', "-"),
        };
        match v.as_str() {
            "true" => out.push(format!("--{flag}").into()),
            "false" => {}
            _ => out.push(format!("--{flag}={v}").into()),
        }
    }
    Ok(out)
}

fn read_input(path: &Path, grid: &SensorGrid) -> Result<Vec<LocationSequence>> {
    let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(read_trajectories(file, grid)?)
}

fn write_output(dir: &Path, seqs: &[LocationSequence], grid: &SensorGrid) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join("trajectories.csv");
    write_trajectories(fs::File::create(&path)?, seqs, grid)?;
    Ok(path)
}

fn simulate(a: &SimulateArgs) -> Result<()> {
    let grid = a.grid.grid()?;
    let config = a.scenario.config();
    let mut seqs = simulate_group_from(&config, &grid, a.offset)?;
    for w in 0..a.walkers {
        seqs.push(simulate_random_walk(&config, &grid, config.group_size as u32 + w)?);
    }
    let path = write_output(&a.out, &seqs, &grid)?;
    fs::write(a.out.join("scenario.cfg"), config.to_key_values())?;
    println!("wrote {} objects x {} intervals to {}", seqs.len(), config.batch_period, path.display());
    Ok(())
}

fn model_path(dir: &Path, gid: u32) -> PathBuf {
    dir.join(format!("model_{gid}.pst"))
}

fn write_models(dir: &Path, models: &[GroupModel<f64>]) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut groups = String::from("object_id,group_id\n");
    for m in models {
        for obj in &m.members {
            groups.push_str(&format!("{obj},{}\n", m.id));
        }
        fs::write(model_path(dir, m.id), m.predictor.to_text())?;
    }
    fs::write(dir.join("groups.csv"), groups)?;
    Ok(())
}

fn read_models(dir: &Path) -> Result<Vec<GroupModel<f64>>> {
    let text = fs::read_to_string(dir.join("groups.csv")).context("reading groups.csv")?;
    let mut members: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let Some((o, g)) = line.split_once(',') else {
            bail!("groups.csv line {}: expected object_id,group_id", i + 1);
        };
        members.entry(g.trim().parse()?).or_default().push(o.trim().parse()?);
    }
    members
        .into_iter()
        .map(|(gid, objs)| {
            let text = fs::read_to_string(model_path(dir, gid)).with_context(|| format!("reading model {gid}"))?;
            Ok(GroupModel::new(gid, objs, PatternTree::from_text(&text)?))
        })
        .collect()
}

fn mine(a: &MineArgs) -> Result<()> {
    let grid = a.grid.grid()?;
    let seqs = read_input(&a.input, &grid)?;
    let params = a.mining.params();
    let outcome = mine_groups(&seqs, &grid, &params)?;
    let models = build_group_models(&outcome.groups, &seqs, grid.node_count(), params.pst)?;
    write_models(&a.out, &models)?;
    for m in &models {
        println!("group {}: {:?}", m.id, m.members);
    }
    Ok(())
}

fn compress(a: &CompressArgs) -> Result<()> {
    let grid = a.grid.grid()?;
    let seqs = read_input(&a.input, &grid)?;
    let models = read_models(&a.models)?;
    let config = CodecConfig {
        packet: a.packet.config(),
        epsilon: a.eps,
        max_combination: a.max_combination,
        replace: !a.no_replace,
    };
    let batch = compress_batch(&seqs, &models, &grid, a.start, &config)?;
    let mut bytes = BATCH_MAGIC.to_vec();
    bytes.extend_from_slice(&batch.start.to_be_bytes());
    bytes.extend_from_slice(&(batch.packets.len() as u32).to_be_bytes());
    for p in &batch.packets {
        for part in [p.packed.bytes.clone(), p.packed.table.to_bytes()] {
            bytes.extend_from_slice(&(part.len() as u32).to_be_bytes());
            bytes.extend_from_slice(&part);
        }
    }
    fs::create_dir_all(&a.out)?;
    let path = a.out.join("batch.bin");
    fs::write(&path, bytes)?;
    println!(
        "{} packets, {} bytes ({} with code tables), hit rate {:.3}; wrote {}",
        batch.packets.len(),
        batch.bytes(),
        batch.bytes_with_tables(),
        batch.hit_rate(),
        path.display()
    );
    Ok(())
}

fn take<'a>(bytes: &mut &'a [u8], n: usize) -> Result<&'a [u8]> {
    if bytes.len() < n {
        bail!("truncated batch file");
    }
    let (head, tail) = bytes.split_at(n);
    *bytes = tail;
    Ok(head)
}

fn take_u32(bytes: &mut &[u8]) -> Result<u32> {
    Ok(u32::from_be_bytes(take(bytes, 4)?.try_into().unwrap()))
}

fn decompress(a: &DecompressArgs) -> Result<()> {
    let grid = a.grid.grid()?;
    let models = read_models(&a.models)?;
    let data = fs::read(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let mut rest = data.as_slice();
    if take(&mut rest, 4)? != BATCH_MAGIC {
        bail!("not a batch file");
    }
    let start = take_u32(&mut rest)?;
    let count = take_u32(&mut rest)?;
    let mut per_object: BTreeMap<u32, LocationSequence> = BTreeMap::new();
    for _ in 0..count {
        let n = take_u32(&mut rest)? as usize;
        let packet = take(&mut rest, n)?;
        let n = take_u32(&mut rest)? as usize;
        let table = HuffmanTable::from_bytes(take(&mut rest, n)?)?;
        for s in unpack_batch(packet, &table, &models, &grid, start, &a.packet.config())? {
            per_object
                .entry(s.object_id)
                .or_insert_with(|| LocationSequence {
                    object_id: s.object_id,
                    items: Vec::new(),
                })
                .items
                .extend(s.items);
        }
    }
    if !rest.is_empty() {
        bail!("trailing bytes after the last packet");
    }
    let seqs: Vec<LocationSequence> = per_object
        .into_values()
        .map(|mut s| {
            s.items.sort();
            s
        })
        .collect();
    let path = write_output(&a.out, &seqs, &grid)?;
    println!("restored {} objects to {}", seqs.len(), path.display());
    Ok(())
}

fn cipher_output(a: &CipherArgs, suffix: Option<&str>) -> Result<PathBuf> {
    let name = a
        .input
        .file_name()
        .context("input has no file name")?
        .to_string_lossy()
        .into_owned();
    let name = match suffix {
        Some(s) => format!("{name}{s}"),
        None => name.strip_suffix(".enc").map_or_else(|| format!("{name}.dec"), str::to_string),
    };
    fs::create_dir_all(&a.out)?;
    Ok(a.out.join(name))
}

fn encrypt(a: &CipherArgs) -> Result<()> {
    let (ks, mode) = a.schedule()?;
    let plain = fs::read(&a.input)?;
    let path = cipher_output(a, Some(".enc"))?;
    fs::write(&path, encrypt_packet(&ks, &plain, mode)?)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn decrypt(a: &CipherArgs) -> Result<()> {
    let (ks, mode) = a.schedule()?;
    let data = fs::read(&a.input)?;
    let path = cipher_output(a, None)?;
    fs::write(&path, decrypt_packet(&ks, &data, mode)?)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn bench(a: &BenchArgs) -> Result<()> {
    let spec = ExperimentSpec {
        gdrs: a.gdrs.clone(),
        sizes: a.sizes.clone(),
        periods: a.periods.clone(),
        epsilons: a.epsilons.clone(),
        identical_sizes: a.identical_sizes.clone(),
        base_gdr: a.base_gdr,
        base_size: a.base_size,
        base_period: a.base_period,
        epsilon_gdr: a.epsilon_gdr,
        repetitions: a.reps,
        seed_base: a.seed,
        history: a.history,
        mine: a.mine,
        grid: a.grid.grid()?,
        codec: CodecConfig {
            packet: a.packet.config(),
            ..CodecConfig::default()
        },
        mining: a.mining.params(),
        ..ExperimentSpec::default()
    };
    let rows = run_experiment(&spec)?;
    for p in emit_report(&rows, &a.out)? {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Mine(a) => mine(a),
        Command::Compress(a) => compress(a),
        Command::Decompress(a) => decompress(a),
        Command::Encrypt(a) => encrypt(a),
        Command::Decrypt(a) => decrypt(a),
        Command::Bench(a) => bench(a),
    }
}

fn main() -> Result<()> {
    let args = expand_config(std::env::args_os().collect())?;
    run(Cli::parse_from(args))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_entries_override_flags() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.cfg");
        fs::write(&cfg, "n = 7\ngdr = 0.5\nbatch_period = 40\nwalkers = 2\n").unwrap();
        let args: Vec<OsString> = ["grouptrack", "simulate", "--n", "3", "--out", "x", "--config"]
            .iter()
            .map(OsString::from)
            .chain([cfg.clone().into_os_string()])
            .collect();
        let cli = Cli::parse_from(expand_config(args).unwrap());
        let Command::Simulate(a) = cli.command else { panic!() };
        assert_eq!(a.scenario.group_size, 7);
        assert_eq!(a.scenario.gdr, 0.5);
        assert_eq!(a.scenario.batch_period, 40);
        assert_eq!(a.walkers, 2);
    }

    #[test]
    fn list_flags_are_replaced_by_the_config() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("b.cfg");
        fs::write(&cfg, "gdrs = 0.2,0.4\nmine = true\n").unwrap();
        let args: Vec<OsString> = ["grouptrack", "bench", "--gdrs", "0.9", "--out", "x"]
            .iter()
            .map(OsString::from)
            .chain([OsString::from(format!("--config={}", cfg.display()))])
            .collect();
        let cli = Cli::parse_from(expand_config(args).unwrap());
        let Command::Bench(a) = cli.command else { panic!() };
        assert_eq!(a.gdrs, vec![0.2, 0.4]);
        assert!(a.mine);
    }
}
