use std::time::Instant;

fn main() {
    let map = hexglass::model::CouplingMap::builtin("falcon-27").unwrap();
    let inst = hexglass::model::generate_instance(&map, 0).unwrap();
    let angles = hexglass::optimize::fixed_transfer_angles(5).unwrap();
    for chi in [16usize, 32, 64, 128, 512] {
        let t = Instant::now();
        let mps = hexglass::mps::run_qaoa_mps(&inst, &angles, chi, 0.0).unwrap();
        let e = hexglass::mps::mps_expectation(&mps, &inst);
        println!(
            "chi {:4}  E {:+.6}  tw {:.3e}  maxbond {:3}  {:?}",
            chi, e, mps.truncation_weight(), mps.max_bond_dim(), t.elapsed()
        );
    }
    let t = Instant::now();
    let table = hexglass::statevector::build_cost_table(&inst).unwrap();
    let state = hexglass::statevector::run_qaoa_with_table(&table, &angles).unwrap();
    let e = hexglass::statevector::expectation(&state, &table);
    println!("statevector 27q p=5: E {:+.6}  {:?}", e, t.elapsed());
}
