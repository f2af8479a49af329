//! Experiment harness: parameter sweeps over simulated groups comparing the
//! batch codec with online updates.

mod report;

use rayon::prelude::*;

use crate::codec::{
    build_group_models, compress_batch, compression_ratio, online_volume, raw_volume, CodecConfig, GroupModel,
};
use crate::error::{domain, Result};
use crate::mining::{learn_group_model, mine_groups, MiningParams};
use crate::world::{simulate_group, simulate_group_from, LocationSequence, ScenarioConfig, SensorGrid};

pub use report::{emit_report, line_plot_svg, write_details_csv, write_metrics_csv, Series, METRICS_HEADER};

/// One fully specified sweep point.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub scenario: String,
    pub gdr: f64,
    pub n: usize,
    pub period: u32,
    pub epsilon: u32,
}

/// Sweeps to run and how.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    /// Dispersion radii crossed with `sizes` at `base_period`.
    pub gdrs: Vec<f64>,
    pub sizes: Vec<usize>,
    /// Batch periods at `base_gdr` and `base_size`.
    pub periods: Vec<u32>,
    /// Error bounds at `epsilon_gdr` and `base_size`.
    pub epsilons: Vec<u32>,
    /// Group sizes for groups that move identically (zero dispersion).
    pub identical_sizes: Vec<usize>,
    pub base_gdr: f64,
    pub base_size: usize,
    pub base_period: u32,
    pub epsilon_gdr: f64,
    pub repetitions: u32,
    pub seed_base: u64,
    /// Intervals of history the group model is learned on before each batch.
    pub history: u32,
    /// Mine the groups from the history instead of using the simulated group.
    pub mine: bool,
    pub grid: SensorGrid,
    pub scenario: ScenarioConfig,
    pub codec: CodecConfig,
    pub mining: MiningParams<f64>,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            gdrs: vec![0.1, 0.25, 0.5, 0.75, 1.0],
            sizes: vec![1, 2, 4, 8, 16],
            periods: vec![50, 100, 200],
            epsilons: vec![0, 1, 2],
            identical_sizes: vec![1, 2, 4, 8, 16],
            base_gdr: 0.1,
            base_size: 8,
            base_period: 100,
            epsilon_gdr: 1.0,
            repetitions: 5,
            seed_base: 1,
            history: 200,
            mine: false,
            grid: SensorGrid::default(),
            scenario: ScenarioConfig::default(),
            codec: CodecConfig::default(),
            mining: MiningParams::default(),
        }
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return domain("at least one repetition is needed");
        }
        if self.history == 0 {
            return domain("the model needs a history window");
        }
        for p in self.points() {
            self.config_for(&p, 0).validate()?;
        }
        self.codec.packet.validate()
    }

    /// Sweep points in report order.
    pub fn points(&self) -> Vec<SweepPoint> {
        let point = |scenario: &str, gdr, n, period, epsilon| SweepPoint {
            scenario: scenario.to_string(),
            gdr,
            n,
            period,
            epsilon,
        };
        let mut out = Vec::new();
        for &gdr in &self.gdrs {
            for &n in &self.sizes {
                out.push(point("gdr", gdr, n, self.base_period, 0));
            }
        }
        for &n in &self.identical_sizes {
            out.push(point("identical", 0.0, n, self.base_period, 0));
        }
        for &d in &self.periods {
            out.push(point("period", self.base_gdr, self.base_size, d, 0));
        }
        for &e in &self.epsilons {
            out.push(point("epsilon", self.epsilon_gdr, self.base_size, self.base_period, e));
        }
        out
    }

    pub fn config_for(&self, point: &SweepPoint, repetition: u32) -> ScenarioConfig {
        ScenarioConfig {
            group_size: point.n,
            gdr: point.gdr,
            batch_period: point.period,
            error_bound: point.epsilon,
            seed: self.seed_base + repetition as u64,
            ..self.scenario.clone()
        }
    }
}

/// Measurements of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunMetrics {
    pub raw_bytes: f64,
    pub batch_bytes: f64,
    pub batch_table_bytes: f64,
    pub online_bytes: f64,
    pub online_pred_bytes: f64,
    /// Uncompressed location bits over stream bits with replacement.
    pub replace_ratio: f64,
    /// The same without replacement.
    pub huffman_ratio: f64,
    pub hit_rate: f64,
}

/// Seed-averaged metrics of one sweep point.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricRow {
    pub point: SweepPoint,
    pub repetitions: u32,
    pub raw_bytes: f64,
    pub batch_bytes: f64,
    pub batch_bytes_sd: f64,
    pub batch_table_bytes: f64,
    pub online_bytes: f64,
    pub online_pred_bytes: f64,
    /// `raw_bytes / batch_bytes`, averaged over repetitions.
    pub ratio: f64,
    pub ratio_sd: f64,
    pub replace_ratio: f64,
    pub huffman_ratio: f64,
    pub hit_rate: f64,
}

impl MetricRow {
    pub fn bytes_per_object(&self) -> f64 {
        self.batch_bytes / self.point.n as f64
    }

    pub fn online_pred_ratio(&self) -> f64 {
        self.raw_bytes / self.online_pred_bytes
    }
}

fn models_for(
    spec: &ExperimentSpec,
    config: &ScenarioConfig,
    history: &[LocationSequence],
) -> Result<Vec<GroupModel<f64>>> {
    let alphabet = spec.grid.node_count();
    if spec.mine {
        let outcome = mine_groups(history, &spec.grid, &spec.mining)?;
        return build_group_models(&outcome.groups, history, alphabet, spec.mining.pst);
    }
    let refs: Vec<&LocationSequence> = history.iter().collect();
    let tree = learn_group_model(&refs, alphabet, spec.mining.pst)?;
    Ok(vec![GroupModel::new(0, (0..config.group_size as u32).collect(), tree)])
}

/// Simulates, compresses and measures one repetition of a sweep point.
pub fn run_point(spec: &ExperimentSpec, point: &SweepPoint, repetition: u32) -> Result<RunMetrics> {
    let config = spec.config_for(point, repetition);
    let history = simulate_group(
        &ScenarioConfig {
            batch_period: spec.history,
            ..config.clone()
        },
        &spec.grid,
    )?;
    let batch = simulate_group_from(&config, &spec.grid, spec.history)?;
    let models = models_for(spec, &config, &history)?;
    let codec = CodecConfig {
        epsilon: point.epsilon,
        ..spec.codec
    };
    let out = compress_batch(&batch, &models, &spec.grid, 0, &codec)?;

    let packet = &codec.packet;
    let mut online_pred = 0;
    for m in &models {
        let member_seqs: Vec<LocationSequence> = batch
            .iter()
            .filter(|s| m.members.binary_search(&s.object_id).is_ok())
            .cloned()
            .collect();
        online_pred += online_volume(&member_seqs, Some(&m.predictor), packet);
    }
    let raw = raw_volume(&batch, packet) as f64;
    let items: usize = batch.iter().map(LocationSequence::len).sum();
    let raw_bits = (items * packet.location_bits as usize) as f64;
    Ok(RunMetrics {
        raw_bytes: raw,
        batch_bytes: out.bytes() as f64,
        batch_table_bytes: out.bytes_with_tables() as f64,
        online_bytes: online_volume::<crate::mining::PatternTree<f64>>(&batch, None, packet) as f64,
        online_pred_bytes: online_pred as f64,
        replace_ratio: compression_ratio(raw_bits, out.stream_bits() as f64)?,
        huffman_ratio: compression_ratio(raw_bits, out.plain_stream_bits() as f64)?,
        hit_rate: out.hit_rate(),
    })
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

fn aggregate(point: SweepPoint, runs: &[RunMetrics]) -> Result<MetricRow> {
    let col = |f: fn(&RunMetrics) -> f64| mean_sd(&runs.iter().map(f).collect::<Vec<_>>());
    let ratios = runs
        .iter()
        .map(|r| compression_ratio(r.raw_bytes, r.batch_bytes))
        .collect::<Result<Vec<_>>>()?;
    let (ratio, ratio_sd) = mean_sd(&ratios);
    let (batch_bytes, batch_bytes_sd) = col(|r| r.batch_bytes);
    Ok(MetricRow {
        point,
        repetitions: runs.len() as u32,
        raw_bytes: col(|r| r.raw_bytes).0,
        batch_bytes,
        batch_bytes_sd,
        batch_table_bytes: col(|r| r.batch_table_bytes).0,
        online_bytes: col(|r| r.online_bytes).0,
        online_pred_bytes: col(|r| r.online_pred_bytes).0,
        ratio,
        ratio_sd,
        replace_ratio: col(|r| r.replace_ratio).0,
        huffman_ratio: col(|r| r.huffman_ratio).0,
        hit_rate: col(|r| r.hit_rate).0,
    })
}

/// Runs every sweep point and repetition (in parallel) and averages the
/// repetitions. Rows follow the order of [`ExperimentSpec::points`].
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<MetricRow>> {
    spec.validate()?;
    let points = spec.points();
    let jobs: Vec<(usize, u32)> = (0..points.len())
        .flat_map(|p| (0..spec.repetitions).map(move |r| (p, r)))
        .collect();
    let runs = jobs
        .par_iter()
        .map(|&(p, r)| run_point(spec, &points[p], r))
        .collect::<Result<Vec<_>>>()?;
    points
        .into_iter()
        .zip(runs.chunks(spec.repetitions as usize))
        .map(|(p, rs)| aggregate(p, rs))
        .collect()
}
