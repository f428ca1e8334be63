//! Angle search and canonicalization.
//!
//! Provides the p = 1 landscape grid search, the iterative per-round
//! parameter-fixing grid search, basin hopping with a Nelder–Mead local
//! descent and angle extrapolation, and canonicalization of angle vectors
//! under the symmetries that hold for ±1-coefficient instances:
//!
//! * every cost value is an integer with the same parity as the term count,
//!   so shifting any `γ_i` by π multiplies the state by the global phase
//!   `(−1)^parity` — `γ` is π-periodic up to phase;
//! * `RX(2(β+2π)) = RX(2β)`, so `β` is 2π-periodic;
//! * negating every angle conjugates the state, leaving all measurement
//!   probabilities (hence the expectation) unchanged.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;
use rayon::prelude::*;

use crate::model::Instance;
use crate::statevector::{build_cost_table, expectation, run_qaoa_with_table, sample};
use crate::{Angles, Error, Result};

/// Fixed transfer angles for rounds 1..=5: trained once on a 16-qubit
/// heavy-hex instance and reused verbatim on other instances and sizes
/// (parameter concentration). `None` for p = 0 or p > 5.
pub fn fixed_transfer_angles(p: usize) -> Option<Angles> {
    let (beta, gamma): (&[f64], &[f64]) = match p {
        1 => (&[0.38919], &[6.04302]),
        2 => (&[0.48912, 0.27367], &[6.09758, 5.95396]),
        3 => (
            &[0.50502, 0.35713, 0.19264],
            &[6.14054, 6.01729, 5.94123],
        ),
        4 => (
            &[0.54321, 0.41806, 0.28615, 0.16041],
            &[6.16242, 6.05959, 5.98417, 5.9299],
        ),
        5 => (
            &[0.53822, 0.44776, 0.32923, 0.23056, 0.12587],
            &[6.16555, 6.08373, 6.01445, 5.9616, 5.93736],
        ),
        _ => return None,
    };
    Some(Angles::new(beta.to_vec(), gamma.to_vec()).expect("embedded table is valid"))
}

/// Reduce angles to the canonical domain `γ_i ∈ [0, π)`, `β_i ∈ [0, 2π)`,
/// then pick the time-reversal representative: of the pair
/// `(β⃗, γ⃗)` / reduce(`−β⃗, −γ⃗`), keep the one whose first β entry that is
/// neither 0 nor π lies in `(0, π)`; if every β is a flip fixed point the
/// lexicographically smaller `(β⃗, γ⃗)` wins.
///
/// `parity` is the instance's cost parity (term count mod 2). It selects the
/// sign of the global phase picked up by the γ-period-π reduction and
/// documents the precondition: the reduction is only valid for instances
/// whose coefficients are all ±1, which is where a uniform cost parity
/// exists. The returned angles give the same expectation and measurement
/// distribution for any such instance.
pub fn canonicalize_angles(angles: &Angles, parity: u8) -> Angles {
    debug_assert!(parity <= 1, "parity is a mod-2 value");
    let reduce = |beta: &[f64], gamma: &[f64]| -> (Vec<f64>, Vec<f64>) {
        (
            beta.iter().map(|b| b.rem_euclid(2.0 * PI)).collect(),
            gamma.iter().map(|g| g.rem_euclid(PI)).collect(),
        )
    };
    let (beta_a, gamma_a) = reduce(&angles.beta, &angles.gamma);
    let neg_b: Vec<f64> = angles.beta.iter().map(|b| -b).collect();
    let neg_g: Vec<f64> = angles.gamma.iter().map(|g| -g).collect();
    let (beta_b, gamma_b) = reduce(&neg_b, &neg_g);

    let take_a = match beta_a.iter().find(|&&b| b != 0.0 && b != PI) {
        Some(&b) => b < PI,
        None => (&beta_a, &gamma_a) <= (&beta_b, &gamma_b),
    };
    let (beta, gamma) = if take_a {
        (beta_a, gamma_a)
    } else {
        (beta_b, gamma_b)
    };
    Angles::new(beta, gamma).expect("reduction keeps angles finite")
}

/// Rectangular angle grid for `p = 1` searches. Points are placed at
/// `lo + k·(hi−lo)/count` for `k = 0..count`, i.e. half-open `[lo, hi)`
/// including `lo`, so grids anchored at zero always contain the identity
/// point `(0, 0)`.
#[derive(Debug, Clone, Copy)]
pub struct GridSpec {
    pub beta_lo: f64,
    pub beta_hi: f64,
    pub beta_count: usize,
    pub gamma_lo: f64,
    pub gamma_hi: f64,
    pub gamma_count: usize,
}

impl GridSpec {
    pub fn new(
        beta: (f64, f64, usize),
        gamma: (f64, f64, usize),
    ) -> Result<Self> {
        let spec = GridSpec {
            beta_lo: beta.0,
            beta_hi: beta.1,
            beta_count: beta.2,
            gamma_lo: gamma.0,
            gamma_hi: gamma.1,
            gamma_count: gamma.2,
        };
        if spec.beta_count == 0 || spec.gamma_count == 0 {
            return Err(Error::InvalidAngles("empty grid".into()));
        }
        for v in [spec.beta_lo, spec.beta_hi, spec.gamma_lo, spec.gamma_hi] {
            if !v.is_finite() {
                return Err(Error::InvalidAngles("non-finite grid bound".into()));
            }
        }
        if spec.beta_hi < spec.beta_lo || spec.gamma_hi < spec.gamma_lo {
            return Err(Error::InvalidAngles("grid upper bound below lower".into()));
        }
        Ok(spec)
    }

    /// The square grid used by the appendix-style searches: β over
    /// `[0, π/2)`, γ over `[0, π)`, `count` points per axis.
    pub fn square(count: usize) -> Result<Self> {
        GridSpec::new((0.0, PI / 2.0, count), (0.0, PI, count))
    }

    pub fn beta_points(&self) -> Vec<f64> {
        axis_points(self.beta_lo, self.beta_hi, self.beta_count)
    }

    pub fn gamma_points(&self) -> Vec<f64> {
        axis_points(self.gamma_lo, self.gamma_hi, self.gamma_count)
    }
}

fn axis_points(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|k| lo + (hi - lo) * k as f64 / count as f64)
        .collect()
}

/// How grid points are scored.
#[derive(Debug, Clone, Copy)]
pub enum Evaluator {
    /// Exact expectation from the dense state.
    Exact,
    /// Mean cost of `shots` samples; each grid point uses an independent
    /// stream derived from `seed` and its grid index, so results are
    /// deterministic under any parallel schedule.
    Sampled { shots: usize, seed: u64 },
}

/// A fully evaluated p = 1 energy landscape.
#[derive(Debug, Clone)]
pub struct Landscape {
    pub beta_axis: Vec<f64>,
    pub gamma_axis: Vec<f64>,
    /// Row-major: `mean_energy[i * gamma_axis.len() + j]` is the energy at
    /// `(beta_axis[i], gamma_axis[j])`.
    pub mean_energy: Vec<f64>,
    /// `(β, γ, energy)` of the matrix minimum (first occurrence wins).
    pub best_point: (f64, f64, f64),
}

/// Evaluate the p = 1 mean-energy landscape over a grid.
pub fn grid_search(inst: &Instance, grid: &GridSpec, evaluator: Evaluator) -> Result<Landscape> {
    let table = build_cost_table(inst)?;
    let betas = grid.beta_points();
    let gammas = grid.gamma_points();
    let gcount = gammas.len();
    let mean_energy: Vec<f64> = (0..betas.len() * gcount)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / gcount, idx % gcount);
            let angles = Angles::new(vec![betas[i]], vec![gammas[j]])?;
            let state = run_qaoa_with_table(&table, &angles)?;
            let energy = match evaluator {
                Evaluator::Exact => expectation(&state, &table),
                Evaluator::Sampled { shots, seed } => {
                    let mut rng =
                        Xoshiro256StarStar::seed_from_u64(seed ^ (idx as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
                    let hits = sample(&state, &mut rng, shots);
                    hits.iter()
                        .map(|&z| table.values[z as usize] as f64)
                        .sum::<f64>()
                        / shots.max(1) as f64
                }
            };
            Ok(energy)
        })
        .collect::<Result<_>>()?;

    let mut best = (0usize, f64::INFINITY);
    for (idx, &e) in mean_energy.iter().enumerate() {
        if e < best.1 {
            best = (idx, e);
        }
    }
    let (bi, bj) = (best.0 / gcount, best.0 % gcount);
    Ok(Landscape {
        best_point: (betas[bi], gammas[bj], best.1),
        beta_axis: betas,
        gamma_axis: gammas,
        mean_energy,
    })
}

/// Iterative per-round grid search: at round k the first k−1 angle pairs are
/// frozen at the previous round's best and a 2-D grid over `(β_k, γ_k)` is
/// scanned — β over `[0, π/2)` (the new mixer angle is the final one at
/// search time, where that half-range is symmetry-protected) and γ over
/// `[0, π)`, both including 0 so each round can reproduce the previous
/// round's state exactly and the best energy never increases with p.
///
/// Returns the best angles and exact expectation per round, for
/// `p = 1..=p_max`.
pub fn parameter_fixing_search(
    inst: &Instance,
    p_max: usize,
    grid_counts: (usize, usize),
) -> Result<Vec<(Angles, f64)>> {
    if p_max == 0 {
        return Err(Error::InvalidAngles("p_max must be at least 1".into()));
    }
    let table = build_cost_table(inst)?;
    let betas = axis_points(0.0, PI / 2.0, grid_counts.0);
    let gammas = axis_points(0.0, PI, grid_counts.1);
    if betas.is_empty() || gammas.is_empty() {
        return Err(Error::InvalidAngles("empty grid".into()));
    }
    let gcount = gammas.len();
    let mut frozen_beta: Vec<f64> = Vec::new();
    let mut frozen_gamma: Vec<f64> = Vec::new();
    let mut out = Vec::with_capacity(p_max);
    for _round in 1..=p_max {
        let energies: Vec<f64> = (0..betas.len() * gcount)
            .into_par_iter()
            .map(|idx| {
                let (i, j) = (idx / gcount, idx % gcount);
                let mut beta = frozen_beta.clone();
                let mut gamma = frozen_gamma.clone();
                beta.push(betas[i]);
                gamma.push(gammas[j]);
                let angles = Angles::new(beta, gamma)?;
                let state = run_qaoa_with_table(&table, &angles)?;
                Ok(expectation(&state, &table))
            })
            .collect::<Result<_>>()?;
        let mut best = (0usize, f64::INFINITY);
        for (idx, &e) in energies.iter().enumerate() {
            if e < best.1 {
                best = (idx, e);
            }
        }
        let (bi, bj) = (best.0 / gcount, best.0 % gcount);
        frozen_beta.push(betas[bi]);
        frozen_gamma.push(gammas[bj]);
        let angles = Angles::new(frozen_beta.clone(), frozen_gamma.clone())?;
        out.push((angles, best.1));
    }
    Ok(out)
}

/// Extend a p-round angle set to p+1 rounds by duplicating the last pair —
/// the warm-start initializer for the next training round.
pub fn extrapolate_angles(angles: &Angles) -> Angles {
    let mut beta = angles.beta.clone();
    let mut gamma = angles.gamma.clone();
    beta.push(beta.last().copied().unwrap_or(0.0));
    gamma.push(gamma.last().copied().unwrap_or(0.0));
    Angles::new(beta, gamma).expect("extension preserves validity")
}

/// Extend a p-round angle set to p+1 rounds with a `(0, 0)` tail: the new
/// round applies the identity, so the initializer's expectation equals the
/// p-round expectation exactly.
pub fn extrapolate_angles_zero(angles: &Angles) -> Angles {
    let mut beta = angles.beta.clone();
    let mut gamma = angles.gamma.clone();
    beta.push(0.0);
    gamma.push(0.0);
    Angles::new(beta, gamma).expect("extension preserves validity")
}

/// Nelder–Mead simplex descent: reflection 1, expansion 2, contraction 0.5,
/// shrink 0.5. Stops when the simplex's worst-to-best objective spread drops
/// below `rel_tol · (|f_best| + rel_tol)` or the evaluation budget is spent.
/// Returns the best vertex found.
fn nelder_mead(
    f: &mut dyn FnMut(&[f64]) -> f64,
    x0: &[f64],
    step: f64,
    rel_tol: f64,
    max_evals: usize,
) -> (Vec<f64>, f64) {
    let dim = x0.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| -> f64 {
        *evals += 1;
        f(x)
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let fx0 = eval(x0, &mut evals);
    simplex.push((x0.to_vec(), fx0));
    for d in 0..dim {
        let mut x = x0.to_vec();
        x[d] += step;
        let fx = eval(&x, &mut evals);
        simplex.push((x, fx));
    }

    while evals < max_evals {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("finite objective"));
        let best = simplex[0].1;
        let worst = simplex[dim].1;
        if (worst - best).abs() <= rel_tol * (best.abs() + rel_tol) {
            break;
        }
        // Centroid of all but the worst vertex.
        let mut centroid = vec![0.0; dim];
        for (x, _) in &simplex[..dim] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / dim as f64;
            }
        }
        let second_worst = simplex[dim - 1].1;
        let reflect: Vec<f64> = centroid
            .iter()
            .zip(&simplex[dim].0)
            .map(|(c, w)| c + (c - w))
            .collect();
        let f_reflect = eval(&reflect, &mut evals);
        if f_reflect < simplex[0].1 {
            // Try to expand past the reflection point.
            let expand: Vec<f64> = centroid
                .iter()
                .zip(&simplex[dim].0)
                .map(|(c, w)| c + 2.0 * (c - w))
                .collect();
            let f_expand = eval(&expand, &mut evals);
            simplex[dim] = if f_expand < f_reflect {
                (expand, f_expand)
            } else {
                (reflect, f_reflect)
            };
        } else if f_reflect < second_worst {
            simplex[dim] = (reflect, f_reflect);
        } else {
            // Contract toward the better of worst/reflected.
            let (anchor, f_anchor) = if f_reflect < simplex[dim].1 {
                (&reflect, f_reflect)
            } else {
                (&simplex[dim].0, simplex[dim].1)
            };
            let contract: Vec<f64> = centroid
                .iter()
                .zip(anchor)
                .map(|(c, a)| c + 0.5 * (a - c))
                .collect();
            let f_contract = eval(&contract, &mut evals);
            if f_contract < f_anchor {
                simplex[dim] = (contract, f_contract);
            } else {
                // Shrink everything toward the best vertex.
                let best_x = simplex[0].0.clone();
                for (x, fx) in simplex.iter_mut().skip(1) {
                    for (v, b) in x.iter_mut().zip(&best_x) {
                        *v = b + 0.5 * (*v - b);
                    }
                    *fx = eval(x, &mut evals);
                    if evals >= max_evals {
                        break;
                    }
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("finite objective"));
    simplex.swap_remove(0).into()
}

fn split_params(x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let p = x.len() / 2;
    (x[..p].to_vec(), x[p..].to_vec())
}

/// Basin hopping: repeated cycles of per-coordinate uniform perturbation in
/// `[−0.3, 0.3]` around the incumbent, Nelder–Mead local descent (relative
/// tolerance 1e−8, at most 500 evaluations per hop), and accept-if-better.
///
/// `init = None` starts from the embedded transfer table when `p ≤ 5` and
/// from all-zero angles otherwise. The incumbent is seeded with the
/// initializer itself, so the result is never worse than the initializer.
/// The returned angles are canonicalized; the search itself runs
/// unconstrained. Deterministic for a fixed `seed`.
pub fn basin_hopping(
    inst: &Instance,
    p: usize,
    iterations: usize,
    init: Option<&Angles>,
    seed: u64,
) -> Result<(Angles, f64)> {
    if iterations == 0 {
        return Err(Error::InvalidAngles(
            "basin hopping needs at least one iteration".into(),
        ));
    }
    let start = match init {
        Some(a) => {
            if a.p() != p {
                return Err(Error::InvalidAngles(format!(
                    "initializer has p = {}, expected {p}",
                    a.p()
                )));
            }
            a.clone()
        }
        None => fixed_transfer_angles(p)
            .unwrap_or_else(|| Angles::new(vec![0.0; p], vec![0.0; p]).expect("zeros are valid")),
    };
    let table = build_cost_table(inst)?;
    // Evaluation failures inside the objective cannot happen once the table
    // exists (capacity was checked building it), so the closure is total.
    let mut objective = |x: &[f64]| -> f64 {
        let (beta, gamma) = split_params(x);
        let angles = Angles::new(beta, gamma).expect("finite search point");
        let state = run_qaoa_with_table(&table, &angles).expect("capacity already checked");
        expectation(&state, &table)
    };

    let mut x0: Vec<f64> = start.beta.iter().chain(start.gamma.iter()).copied().collect();
    let mut best_f = objective(&x0);
    let (x_desc, f_desc) = nelder_mead(&mut objective, &x0, 0.1, 1e-8, 500);
    if f_desc < best_f {
        x0 = x_desc;
        best_f = f_desc;
    }
    let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
    for _ in 0..iterations {
        let perturbed: Vec<f64> = x0.iter().map(|v| v + rng.gen_range(-0.3..0.3)).collect();
        let (x_new, f_new) = nelder_mead(&mut objective, &perturbed, 0.1, 1e-8, 500);
        if f_new < best_f {
            x0 = x_new;
            best_f = f_new;
        }
    }
    let (beta, gamma) = split_params(&x0);
    let found = Angles::new(beta, gamma)?;
    Ok((canonicalize_angles(&found, inst.cost_parity()), best_f))
}

/// Train a ladder of angle sets for `p = 1..=p_max` by basin hopping, warm
/// starting each round from the previous optimum via both extrapolation
/// rules (duplicate-last and zero tail) and keeping the better result.
pub fn basin_hopping_ladder(
    inst: &Instance,
    p_max: usize,
    iterations: usize,
    seed: u64,
) -> Result<Vec<(Angles, f64)>> {
    let mut out: Vec<(Angles, f64)> = Vec::with_capacity(p_max);
    for p in 1..=p_max {
        let result = if let Some((prev, _)) = out.last() {
            let warm = basin_hopping(
                inst,
                p,
                iterations,
                Some(&extrapolate_angles(prev)),
                seed.wrapping_add(p as u64),
            )?;
            let cold = basin_hopping(
                inst,
                p,
                iterations,
                Some(&extrapolate_angles_zero(prev)),
                seed.wrapping_add(p as u64) ^ 0x5bd1_e995,
            )?;
            if cold.1 < warm.1 {
                cold
            } else {
                warm
            }
        } else {
            basin_hopping(inst, p, iterations, None, seed.wrapping_add(1))?
        };
        out.push(result);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{generate_instance, CouplingMap};
    use crate::statevector::run_qaoa;

    fn sub10() -> CouplingMap {
        CouplingMap::new(
            "sub-10",
            10,
            vec![
                (0, 1),
                (1, 2),
                (1, 4),
                (2, 3),
                (3, 5),
                (4, 7),
                (5, 8),
                (6, 7),
                (8, 9),
            ],
        )
        .unwrap()
    }

    fn exact_energy(inst: &Instance, angles: &Angles) -> f64 {
        let table = build_cost_table(inst).unwrap();
        let state = run_qaoa(inst, angles).unwrap();
        expectation(&state, &table)
    }

    #[test]
    fn transfer_table_shapes() {
        for p in 1..=5 {
            let a = fixed_transfer_angles(p).unwrap();
            assert_eq!(a.p(), p);
        }
        assert!(fixed_transfer_angles(0).is_none());
        assert!(fixed_transfer_angles(6).is_none());
    }

    #[test]
    fn canonicalize_reduces_table_gamma() {
        let a = fixed_transfer_angles(1).unwrap();
        let c = canonicalize_angles(&a, 0);
        assert!((c.gamma[0] - 2.90143).abs() < 1e-5, "{}", c.gamma[0]);
        assert!((c.beta[0] - 0.38919).abs() < 1e-12);
        // Idempotent.
        let cc = canonicalize_angles(&c, 0);
        assert_eq!(c.beta, cc.beta);
        assert_eq!(c.gamma, cc.gamma);
        // Already-canonical angles pass through.
        let plain = Angles::new(vec![0.5], vec![0.5]).unwrap();
        let p = canonicalize_angles(&plain, 1);
        assert_eq!(p.beta, vec![0.5]);
        assert_eq!(p.gamma, vec![0.5]);
    }

    #[test]
    fn canonicalize_preserves_expectation_and_symmetries_hold() {
        let inst = generate_instance(&sub10(), 5).unwrap();
        let parity = inst.cost_parity();
        let mut rng = Xoshiro256StarStar::seed_from_u64(77);
        for _ in 0..10 {
            let p = 2;
            let beta: Vec<f64> = (0..p).map(|_| rng.gen_range(-6.0..6.0)).collect();
            let gamma: Vec<f64> = (0..p).map(|_| rng.gen_range(-6.0..6.0)).collect();
            let a = Angles::new(beta.clone(), gamma.clone()).unwrap();
            let e0 = exact_energy(&inst, &a);

            let c = canonicalize_angles(&a, parity);
            for (i, g) in c.gamma.iter().enumerate() {
                assert!((0.0..PI).contains(g), "gamma[{i}] = {g}");
            }
            for (i, b) in c.beta.iter().enumerate() {
                assert!((0.0..2.0 * PI).contains(b), "beta[{i}] = {b}");
            }
            assert!((exact_energy(&inst, &c) - e0).abs() < 1e-10);

            // The underlying symmetries, one at a time.
            let mut g_pi = gamma.clone();
            g_pi[0] += PI;
            let shifted = Angles::new(beta.clone(), g_pi).unwrap();
            assert!((exact_energy(&inst, &shifted) - e0).abs() < 1e-10);

            let mut b_2pi = beta.clone();
            b_2pi[1] += 2.0 * PI;
            let shifted = Angles::new(b_2pi, gamma.clone()).unwrap();
            assert!((exact_energy(&inst, &shifted) - e0).abs() < 1e-10);

            let flipped = Angles::new(
                beta.iter().map(|b| -b).collect(),
                gamma.iter().map(|g| -g).collect(),
            )
            .unwrap();
            assert!((exact_energy(&inst, &flipped) - e0).abs() < 1e-10);
        }
    }

    #[test]
    fn single_point_grid_at_identity_is_zero_energy() {
        let inst = generate_instance(&sub10(), 1).unwrap();
        let grid = GridSpec::new((0.0, 1.0, 1), (0.0, 1.0, 1)).unwrap();
        let scape = grid_search(&inst, &grid, Evaluator::Exact).unwrap();
        assert_eq!(scape.mean_energy.len(), 1);
        assert!(scape.best_point.2.abs() < 1e-12, "uniform state has mean 0");
    }

    #[test]
    fn grid_best_point_is_matrix_minimum_and_runs_are_deterministic() {
        let inst = generate_instance(&sub10(), 2).unwrap();
        let grid = GridSpec::square(9).unwrap();
        let a = grid_search(&inst, &grid, Evaluator::Exact).unwrap();
        let b = grid_search(&inst, &grid, Evaluator::Exact).unwrap();
        assert_eq!(a.mean_energy, b.mean_energy);
        assert_eq!(a.best_point, b.best_point);
        let min = a.mean_energy.iter().cloned().fold(f64::INFINITY, f64::min);
        assert_eq!(a.best_point.2, min);
        assert!(GridSpec::new((0.0, 1.0, 0), (0.0, 1.0, 5)).is_err());
    }

    #[test]
    fn sampled_evaluator_tracks_exact_landscape() {
        let inst = generate_instance(&sub10(), 3).unwrap();
        let grid = GridSpec::square(3).unwrap();
        let exact = grid_search(&inst, &grid, Evaluator::Exact).unwrap();
        let sampled = grid_search(
            &inst,
            &grid,
            Evaluator::Sampled {
                shots: 20000,
                seed: 9,
            },
        )
        .unwrap();
        for (e, s) in exact.mean_energy.iter().zip(&sampled.mean_energy) {
            // 10-qubit costs are bounded by ~19, so 20k shots give ~0.15 SE.
            assert!((e - s).abs() < 1.0, "exact {e} vs sampled {s}");
        }
    }

    #[test]
    fn nelder_mead_minimizes_quadratic_bowl() {
        let mut f = |x: &[f64]| (x[0] - 1.0).powi(2) + (x[1] + 2.0).powi(2);
        let (x, fx) = nelder_mead(&mut f, &[0.0, 0.0], 0.1, 1e-8, 500);
        assert!((x[0] - 1.0).abs() < 1e-3, "{x:?}");
        assert!((x[1] + 2.0).abs() < 1e-3, "{x:?}");
        assert!(fx < 1e-6);
    }

    #[test]
    fn basin_hopping_never_worse_than_initializer() {
        let inst = generate_instance(&sub10(), 4).unwrap();
        let init = Angles::new(vec![0.3], vec![0.7]).unwrap();
        let e_init = exact_energy(&inst, &init);
        let (_, e_best) = basin_hopping(&inst, 1, 2, Some(&init), 123).unwrap();
        assert!(e_best <= e_init + 1e-12);
        // Determinism.
        let (a1, e1) = basin_hopping(&inst, 1, 3, None, 7).unwrap();
        let (a2, e2) = basin_hopping(&inst, 1, 3, None, 7).unwrap();
        assert_eq!(a1.beta, a2.beta);
        assert_eq!(a1.gamma, a2.gamma);
        assert_eq!(e1, e2);
    }

    #[test]
    fn parameter_fixing_is_monotone_and_extends_by_one_round() {
        let inst = generate_instance(&sub10(), 6).unwrap();
        let rounds = parameter_fixing_search(&inst, 3, (7, 7)).unwrap();
        assert_eq!(rounds.len(), 3);
        for (k, (angles, _)) in rounds.iter().enumerate() {
            assert_eq!(angles.p(), k + 1);
        }
        for w in rounds.windows(2) {
            assert!(
                w[1].1 <= w[0].1 + 1e-12,
                "energy increased: {} -> {}",
                w[0].1,
                w[1].1
            );
        }
        // Round 1 equals a plain grid search over the same axes.
        let grid = GridSpec::new((0.0, PI / 2.0, 7), (0.0, PI, 7)).unwrap();
        let scape = grid_search(&inst, &grid, Evaluator::Exact).unwrap();
        assert_eq!(rounds[0].1, scape.best_point.2);
    }

    #[test]
    fn extrapolation_preserves_energy_with_zero_tail() {
        let inst = generate_instance(&sub10(), 8).unwrap();
        let a = fixed_transfer_angles(2).unwrap();
        let e2 = exact_energy(&inst, &a);
        let zero_tail = extrapolate_angles_zero(&a);
        assert_eq!(zero_tail.p(), 3);
        assert!((exact_energy(&inst, &zero_tail) - e2).abs() < 1e-12);
        let warm = extrapolate_angles(&a);
        assert_eq!(warm.p(), 3);
        assert_eq!(warm.beta[2], a.beta[1]);
        assert_eq!(warm.gamma[2], a.gamma[1]);
    }
}
