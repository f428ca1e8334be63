//! Cross-backend checks: the tensor-network simulator against the dense
//! statevector simulator on the 16-qubit built-in map, at depths and bond
//! dimensions where the compressed state is exact up to the engine's
//! bounded window tail policy (whose discarded weight is capped at 1e-12
//! per window factorization and is zero when spectra stop above its value
//! floor, as depth-1 spectra do).

use hexglass::model::{generate_instance, CouplingMap};
use hexglass::mps::{bond_dimension_error_scan, mps_expectation, run_qaoa_mps};
use hexglass::optimize::fixed_transfer_angles;
use hexglass::statevector::{build_cost_table, expectation, run_qaoa_with_table};

fn sv_energy(inst: &hexglass::model::Instance, angles: &hexglass::Angles) -> f64 {
    let table = build_cost_table(inst).unwrap();
    let state = run_qaoa_with_table(&table, angles).unwrap();
    expectation(&state, &table)
}

#[test]
fn depth_one_is_exact_at_chi_64() {
    let map = CouplingMap::builtin("guadalupe-16").unwrap();
    let angles = fixed_transfer_angles(1).unwrap();
    for seed in [0, 1, 2] {
        let inst = generate_instance(&map, seed).unwrap();
        let mps = run_qaoa_mps(&inst, &angles, 64, 0.0).unwrap();
        // Only float-noise singular values (squares ~1e-31) may be shed.
        assert!(mps.truncation_weight() < 1e-24, "seed {seed}");
        assert!(mps.max_bond_dim() <= 64);
        let e = mps_expectation(&mps, &inst);
        assert!(
            (e - sv_energy(&inst, &angles)).abs() <= 1e-10,
            "seed {seed}"
        );
    }
}

#[test]
fn deep_circuits_match_statevector_at_chi_512() {
    // 16 sites cap the reachable bond dimension at 2^8 = 256 < 512, so the
    // rank cap never truncates; only the bounded window tail policy sheds
    // weight, and the backends must agree far inside the 1e-6 target.
    let map = CouplingMap::builtin("guadalupe-16").unwrap();
    for seed in [0, 1] {
        let inst = generate_instance(&map, seed).unwrap();
        for p in [3, 5] {
            let angles = fixed_transfer_angles(p).unwrap();
            let mps = run_qaoa_mps(&inst, &angles, 512, 0.0).unwrap();
            assert!(mps.truncation_weight() < 1e-9);
            assert!((mps.norm_sqr() - 1.0).abs() <= 1e-8);
            let e = mps_expectation(&mps, &inst);
            let reference = sv_energy(&inst, &angles);
            assert!(
                (e - reference).abs() <= 1e-7,
                "seed {seed} p {p}: {e} vs {reference}"
            );
        }
    }
}

#[test]
fn bond_scan_zeroes_at_reference_and_saturates_at_depth_one() {
    let map = CouplingMap::builtin("guadalupe-16").unwrap();
    let inst = generate_instance(&map, 3).unwrap();
    let angles = fixed_transfer_angles(1).unwrap();
    let scan = bond_dimension_error_scan(&inst, &angles, &[16, 64, 128, 512], 512, 0.0).unwrap();
    assert_eq!(scan.points.len(), 4);
    assert_eq!(scan.reference_chi, 512);
    // A scanned cap equal to the reference is ΔE = 0 by construction, and
    // depth-one states on this map need bond dimension ≤ 64, so 64 and up
    // reproduce the reference exactly.
    for point in &scan.points {
        if point.chi >= 64 {
            assert!(point.delta_e <= 1e-12, "chi {}", point.chi);
            assert!(point.truncation_weight < 1e-24);
        }
    }
    assert_eq!(scan.points.last().unwrap().delta_e, 0.0);
}
