//! Scratch probe: shape histogram of dense ops in one chi=512 run.

use hexglass::model::{generate_instance, CouplingMap};
use hexglass::mps::{mps_expectation, run_qaoa_mps};
use hexglass::optimize::fixed_transfer_angles;
use std::time::Instant;

fn main() {
    let map = CouplingMap::builtin("falcon-27").unwrap();
    let inst = generate_instance(&map, 0).unwrap();
    let angles = fixed_transfer_angles(5).unwrap();
    let cutoff: f64 = std::env::var("PROBE_CUTOFF")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(0.0);
    let t = Instant::now();
    let mps = run_qaoa_mps(&inst, &angles, 512, cutoff).unwrap();
    let run = t.elapsed();
    let t2 = Instant::now();
    let e = mps_expectation(&mps, &inst);
    println!(
        "run: {:?}  expect: {:?}  E={:.9}  tw={:.3e}",
        run,
        t2.elapsed(),
        e,
        mps.truncation_weight()
    );
    hexglass::linalg::shape_stats::dump();
}
