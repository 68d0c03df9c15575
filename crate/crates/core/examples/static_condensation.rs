//! Builds the local transport system of one element, condenses it onto the
//! face traces and recovers the interior unknowns from a trace vector.
//!
//! ```text
//! cargo run --release --example static_condensation -- [k]
//! ```

use ddhdg::mesh::build_structured_unit_square;
use ddhdg::operators::{
    condense, local_transport_blocks, recover_interior, DriftData, ElementContext, Spaces,
};

fn main() -> ddhdg::Result<()> {
    let k = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(1);
    let mesh = build_structured_unit_square(2)?;
    let spaces = Spaces::new(k)?;
    let load: Vec<f64> = (0..spaces.n_scalar())
        .map(|i| 1.0 / (i + 1) as f64)
        .collect();
    let local = local_transport_blocks(
        &spaces,
        ElementContext::of(&mesh, 0),
        &DriftData::zero(&spaces),
        2.0,
        &load,
    )?;
    println!(
        "k = {k}: {} interior and {} trace unknowns",
        local.n_interior, local.n_trace
    );

    let block = condense(&local)?;
    println!(
        "Schur complement {}x{}:",
        block.schur.nrows(),
        block.schur.ncols()
    );
    for i in 0..block.schur.nrows() {
        let row: Vec<String> = (0..block.schur.ncols())
            .map(|j| format!("{:9.4}", block.schur[(i, j)]))
            .collect();
        println!("  {}", row.join(" "));
    }

    // Any trace vector determines the interior through the first block row.
    let trace: Vec<f64> = (0..block.n_trace()).map(|i| (i as f64).cos()).collect();
    let interior = recover_interior(&block, &trace)?;
    let full: Vec<f64> = interior.iter().chain(&trace).copied().collect();
    let defect = (0..local.n_interior)
        .map(|i| {
            let ax: f64 = (0..local.size())
                .map(|j| local.matrix[(i, j)] * full[j])
                .sum();
            (ax - local.load[i]).abs()
        })
        .fold(0.0, f64::max);
    println!("interior equation defect after recovery: {defect:.2e}");
    Ok(())
}
