//! Device-like simulation: doping step, two contacts, insulated elsewhere.
//!
//! ```text
//! cargo run --release --example device_simulation -- [n] [steps_per_unit_time] [out_dir]
//! ```
//!
//! Defaults to the desk-scale preset `n = 50`, `dt = 1/500`, and writes VTK
//! snapshots at `t = 0.01, 0.4, 0.7, 1` plus `series.csv` to `out/device`.

use ddhdg::harness::{simulate, Command, DtRule, RunConfig};

fn main() -> ddhdg::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mut cfg = RunConfig::defaults(Command::Simulate);
    if let Some(n) = args.first().and_then(|a| a.parse().ok()) {
        cfg.n = n;
    }
    if let Some(m) = args.get(1).and_then(|a| a.parse::<f64>().ok()) {
        cfg.dt = DtRule::Fixed(1.0 / m);
    }
    cfg.out = args
        .get(2)
        .map(Into::into)
        .unwrap_or_else(|| "out/device".into());

    let start = std::time::Instant::now();
    let out = simulate(&cfg)?;
    let (lo, hi) = out
        .series
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), r| {
            (a.min(r.min_u), b.max(r.max_u))
        });
    let iters = out
        .series
        .iter()
        .map(|r| r.gummel_iterations)
        .max()
        .unwrap_or(0);
    println!("density range over the run: [{lo:.4}, {hi:.4}]");
    println!("most Gummel iterations in a step: {iters}");
    for p in &out.snapshots {
        println!("wrote {}", p.display());
    }
    println!("elapsed {:.1?}", start.elapsed());
    Ok(())
}
