use grouptrack::codec::{
    compress_batch, decompress_batch, unpack_batch, CodecConfig, GroupModel, PacketConfig,
};
use grouptrack::mining::{learn_group_model, PstParams};
use grouptrack::world::{simulate_group, simulate_group_from, simulate_random_walk, LocationSequence, ScenarioConfig, SensorGrid};
use grouptrack::{Error, PatternTree};

fn scenario(n: usize, gdr: f64, d: u32, seed: u64) -> ScenarioConfig {
    ScenarioConfig {
        group_size: n,
        gdr,
        batch_period: d,
        seed,
        ..ScenarioConfig::default()
    }
}

fn trained_model(cfg: &ScenarioConfig, grid: &SensorGrid) -> GroupModel<f64> {
    let history = simulate_group(&ScenarioConfig { batch_period: 200, ..cfg.clone() }, grid).unwrap();
    let refs: Vec<&LocationSequence> = history.iter().collect();
    let tree = learn_group_model(&refs, grid.node_count(), PstParams::default()).unwrap();
    GroupModel::new(0, (0..cfg.group_size as u32).collect(), tree)
}

fn max_deviation(a: &[LocationSequence], b: &[LocationSequence], grid: &SensorGrid) -> u32 {
    assert_eq!(a.len(), b.len());
    let mut worst = 0;
    for (x, y) in a.iter().zip(b) {
        assert_eq!(x.object_id, y.object_id);
        assert_eq!(x.len(), y.len());
        for (i, j) in x.items.iter().zip(&y.items) {
            assert_eq!(i.t, j.t);
            worst = worst.max(grid.symbol_distance(i.symbol, j.symbol).unwrap());
        }
    }
    worst
}

#[test]
fn exact_roundtrip_on_a_tight_group() {
    let grid = SensorGrid::default();
    let cfg = scenario(6, 0.0, 100, 11);
    let model = trained_model(&cfg, &grid);
    let batch = simulate_group_from(&cfg, &grid, 200).unwrap();
    let out = compress_batch(&batch, &[model.clone()], &grid, 0, &CodecConfig::default()).unwrap();
    assert!(out.hits() > 0);
    assert!(out.stream_bits() <= out.plain_stream_bits());
    let back = decompress_batch(&out, &[model], &grid, &PacketConfig::default()).unwrap();
    assert_eq!(back, batch);
}

#[test]
fn bounded_roundtrip_with_dispersion() {
    let grid = SensorGrid::default();
    for eps in [1, 2] {
        let cfg = scenario(5, 1.0, 80, 4);
        let model = trained_model(&cfg, &grid);
        let batch = simulate_group_from(&cfg, &grid, 200).unwrap();
        let config = CodecConfig {
            epsilon: eps,
            ..CodecConfig::default()
        };
        let out = compress_batch(&batch, &[model.clone()], &grid, 0, &config).unwrap();
        let back = decompress_batch(&out, &[model], &grid, &config.packet).unwrap();
        assert!(max_deviation(&batch, &back, &grid) <= eps);
    }
}

#[test]
fn singletons_and_long_segments() {
    let grid = SensorGrid::default();
    let cfg = scenario(1, 0.0, 250, 2);
    let walker = simulate_random_walk(&cfg, &grid, 0).unwrap();
    let tree = PatternTree::learn(&walker.symbols(), grid.node_count(), PstParams::default()).unwrap();
    let model = GroupModel::new(0, vec![0], tree);
    let out = compress_batch(&[walker.clone()], &[model.clone()], &grid, 0, &CodecConfig::default()).unwrap();
    let back = decompress_batch(&out, &[model], &grid, &PacketConfig::default()).unwrap();
    assert_eq!(back, vec![walker]);
}

#[test]
fn wide_dispersed_group_splits_segments() {
    let grid = SensorGrid::default();
    let cfg = scenario(16, 2.0, 200, 5);
    let model = trained_model(&cfg, &grid);
    let batch = simulate_group_from(&cfg, &grid, 200).unwrap();
    let out = compress_batch(&batch, &[model.clone()], &grid, 0, &CodecConfig::default()).unwrap();
    let back = decompress_batch(&out, &[model], &grid, &PacketConfig::default()).unwrap();
    assert_eq!(back, batch);
}

#[test]
fn digest_mismatch_is_detected() {
    let grid = SensorGrid::default();
    let cfg = scenario(3, 0.0, 50, 8);
    let model = trained_model(&cfg, &grid);
    let batch = simulate_group_from(&cfg, &grid, 200).unwrap();
    let out = compress_batch(&batch, &[model.clone()], &grid, 0, &CodecConfig::default()).unwrap();
    let other = trained_model(&scenario(3, 0.0, 50, 9), &grid);
    let p = &out.packets[0].packed;
    let err = unpack_batch(&p.bytes, &p.table, &[other], &grid, 0, &PacketConfig::default()).unwrap_err();
    assert!(matches!(err, Error::DigestMismatch { .. }));
}

#[test]
fn empty_payload_gives_empty_sequences() {
    let grid = SensorGrid::default();
    let model = trained_model(&scenario(2, 0.0, 10, 1), &grid);
    let empty = vec![LocationSequence::from_symbols(0, 0, &[]), LocationSequence::from_symbols(1, 0, &[])];
    let out = compress_batch(&empty, &[model.clone()], &grid, 0, &CodecConfig::default()).unwrap();
    assert!(out.packets.is_empty());
    assert!(decompress_batch(&out, &[model], &grid, &PacketConfig::default()).unwrap().is_empty());
}

#[test]
fn objects_without_a_group_are_rejected() {
    let grid = SensorGrid::default();
    let cfg = scenario(3, 0.0, 20, 1);
    let model = trained_model(&scenario(2, 0.0, 20, 1), &grid);
    let batch = simulate_group(&cfg, &grid).unwrap();
    assert!(matches!(
        compress_batch(&batch, &[model], &grid, 0, &CodecConfig::default()),
        Err(Error::InconsistentObjects(_))
    ));
}
