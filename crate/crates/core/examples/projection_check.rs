//! Observed orders of the L² and HDG projections of the Example 1 fields.
//!
//! ```text
//! cargo run --release --example projection_check -- [k]
//! ```

use ddhdg::harness::{project_check, Command, RunConfig};

fn main() -> ddhdg::Result<()> {
    let mut cfg = RunConfig::defaults(Command::ProjectCheck);
    cfg.k = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(0);
    let table = project_check(&cfg)?;

    print!("{:>5} {:>10}", "level", "h");
    for n in &table.names {
        print!(" {n:>10} {:>5}", "");
    }
    println!();
    for (i, level) in table.levels.iter().enumerate() {
        print!("{level:>5} {:>10.4e}", table.h[i]);
        for (e, r) in table.errors[i].iter().zip(&table.rates[i]) {
            print!(
                " {e:>10.3e} {:>5}",
                r.map(|v| format!("{v:.2}")).unwrap_or_default()
            );
        }
        println!();
    }
    println!("expected orders {:?}", table.expected);
    println!("max HDG projection residual {:.2e}", table.max_residual);
    Ok(())
}
