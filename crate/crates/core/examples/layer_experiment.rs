//! Compares coverage of the example controller with and without layer 1.

use subsume::example::example_model;
use subsume::runtime::EventKind;
use subsume::sim::{load_world, run_sim, SensorConfig, SimConfig, ROOMS_JSON};

fn main() {
    let world = load_world(ROOMS_JSON).expect("fixture world");
    println!("seed  layer0  layers0+1  suppressed");
    for seed in 0..5 {
        let mut cells = Vec::new();
        let mut suppressed = 0;
        for layers in [vec![0], vec![0, 1]] {
            let mut cfg = SimConfig::default();
            cfg.runtime = cfg.runtime.with_seed(seed).with_layers(layers);
            let sensors = SensorConfig {
                seed,
                ..SensorConfig::default()
            };
            let r = run_sim(&world, example_model(), sensors, &cfg).expect("simulation");
            assert_eq!(r.collisions, 0);
            cells.push(r.coverage_cells);
            suppressed = r
                .trace
                .iter()
                .filter(|e| e.kind == EventKind::SuppressedDrop)
                .count();
        }
        println!("{seed:>4}  {:>6}  {:>9}  {suppressed:>10}", cells[0], cells[1]);
    }
}
