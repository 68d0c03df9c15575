//! One Example 1 run with per-step Gummel statistics.
//!
//! ```text
//! cargo run --release --example manufactured_run -- [n] [k] [steps]
//! ```

use ddhdg::harness::{run_example1, DtRule, Example1Run};

fn main() -> ddhdg::Result<()> {
    let args: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let n = args.first().copied().unwrap_or(8);
    let k = args.get(1).copied().unwrap_or(0);
    let mut run = Example1Run::new(n, k);
    if let Some(&m) = args.get(2) {
        run.dt = DtRule::Fixed(1.0 / m as f64);
    }
    let out = run_example1(&run)?;
    for s in &out.steps {
        let last = s.increments.last().copied().unwrap_or(0.0);
        println!(
            "t = {:.4} {:?}: {} Gummel iterations, last increment {last:.2e}",
            s.t, s.scheme, s.gummel_iterations
        );
    }
    let r = out.report;
    println!(
        "h = {:.4e}: |u| {:.4e}  |phi| {:.4e}  |q| {:.4e}  |p| {:.4e}",
        r.h, r.err_u, r.err_phi, r.err_q, r.err_p
    );
    Ok(())
}
