//! Manufactured-solution convergence study.
//!
//! ```text
//! cargo run --release --example convergence_study -- [k] [first_level] [last_level]
//! ```
//!
//! Prints errors and observed orders of `u`, `φ`, `q`, `p` at `T = 1` with
//! `dt = h` for `k = 0` and `dt = h^{3/2}` otherwise.

use ddhdg::harness::{convergence, Command, RunConfig};

fn main() -> ddhdg::Result<()> {
    let args: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let k = args.first().copied().unwrap_or(0);
    let first = args.get(1).copied().unwrap_or(1);
    let last = args.get(2).copied().unwrap_or(4);

    let mut cfg = RunConfig::defaults(Command::Convergence);
    cfg.k = k;
    cfg.levels = (first..=last).collect();
    let start = std::time::Instant::now();
    let table = convergence(&cfg)?;

    println!("k = {k}");
    println!(
        "{:>5} {:>10} {:>11} {:>5} {:>11} {:>5} {:>11} {:>5} {:>11} {:>5}",
        "level", "h", "u", "", "phi", "", "q", "", "p", ""
    );
    for (r, rate) in table.rows.iter().zip(&table.rates) {
        let f = |x: Option<f64>| x.map(|v| format!("{v:.2}")).unwrap_or_default();
        println!(
            "{:>5} {:>10.4e} {:>11.4e} {:>5} {:>11.4e} {:>5} {:>11.4e} {:>5} {:>11.4e} {:>5}",
            r.level,
            r.h,
            r.err_u,
            f(rate[0]),
            r.err_phi,
            f(rate[1]),
            r.err_q,
            f(rate[2]),
            r.err_p,
            f(rate[3])
        );
    }
    println!("elapsed {:.1?}", start.elapsed());
    Ok(())
}
