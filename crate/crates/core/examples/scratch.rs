use fairway_core::baseline::{astar, rasterize, shortcut_smooth, GridPadding, Motion};
use fairway_core::contingency::{simulate_contingency, ContingencyOptions};
use fairway_core::planner::{fuel_cost, plan, PlanConfig};
use fairway_core::scenarios::{generate, ScenarioParams};

fn main() {
    let env = generate("four-gyre", &ScenarioParams::default()).unwrap();
    let (start, goal) = env.route.unwrap();
    let vehicle = env.vehicle;
    for k in [1usize, 16] {
        let t0 = std::time::Instant::now();
        let config = PlanConfig { k, n_paths: 500, ..Default::default() };
        let r = plan(&env, &vehicle, start, goal, &config).unwrap();
        println!("k={k:2} fuel={:.2} len={:.2} f/d={:.3} safety={:.2} states={} sig={} infeas={:?} [{:?}]",
            r.metrics.fuel, r.metrics.length, r.metrics.fuel_per_distance, r.metrics.safety,
            r.metrics.states, r.chosen_channel.signature, r.diagnostics.infeasible_channels, t0.elapsed());
        if k == 16 {
            let mesh = fairway_core::build_navmesh(&env).unwrap();
            let mut offsets = std::collections::BTreeMap::new();
            for rep in r.padding_reports.values() {
                for (&e, &o) in &rep.per_edge {
                    let slot: &mut f64 = offsets.entry(e).or_insert(0.0);
                    *slot = slot.max(o);
                }
            }
            let grid = rasterize(&env, 2.0, &GridPadding::AdaptiveBand { mesh: &mesh, offsets: &offsets });
            match astar(&grid, start, goal, Motion::Dubins) {
                Ok(Some(a)) => {
                    let fo = fuel_cost(&a.path, &env.field, &vehicle, 1.0, 2.0).unwrap();
                    let lo = fairway_core::geom::polyline_length(&a.path);
                    let s = shortcut_smooth(&a.path, &grid, 1729, 300);
                    let fs = fuel_cost(&s, &env.field, &vehicle, 1.0, 2.0).unwrap();
                    let ls = fairway_core::geom::polyline_length(&s);
                    println!("gridA*-O fuel={fo:.2} len={lo:.2} f/d={:.3} explored={}", fo/lo, a.explored);
                    println!("gridA*-S fuel={fs:.2} len={ls:.2} f/d={:.3}", fs/ls);
                }
                other => println!("astar: {other:?}"),
            }
            let mut total = 0;
            for seed in 0..10u64 {
                total += simulate_contingency(&r.chosen_path.waypoints, &env, &vehicle, &ContingencyOptions::default(), seed).collisions;
            }
            println!("four-gyre contingency over 10 seeds: {total}");
            println!("waypoints: {:?}", r.chosen_path.waypoints.iter().map(|p| (p.x.round(), p.y.round())).collect::<Vec<_>>());
        }
    }
    let strait = generate("strait", &ScenarioParams::default()).unwrap();
    let (ss, sg) = strait.route.unwrap();
    let config = PlanConfig { n_paths: 500, ..Default::default() };
    let rs = plan(&strait, &strait.vehicle, ss, sg, &config).unwrap();
    println!("strait fuel={:.2} f/d={:.3} safety={:.2} infeasible={:?} sig={}",
        rs.metrics.fuel, rs.metrics.fuel_per_distance, rs.metrics.safety,
        rs.diagnostics.infeasible_channels, rs.chosen_channel.signature);
    let mut tot = 0;
    for seed in 0..10u64 {
        tot += simulate_contingency(&rs.chosen_path.waypoints, &strait, &strait.vehicle, &ContingencyOptions::default(), seed).collisions;
    }
    println!("strait contingency over 10 seeds: {tot}");
}
