//! Exact and heuristic classical solutions of generated instances:
//! Gray-code brute-force extrema, cubic→quadratic order reduction with one
//! auxiliary binary per cubic term, LP-format model export with a
//! round-trip parser, and a restart local search for sizes past the
//! enumeration cap.

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

use crate::model::{gray_scan, Instance};
use crate::{Error, Result};

/// Largest `n` accepted for full enumeration (≈ 2.7e8 Gray steps).
pub const BRUTE_FORCE_CAP: usize = 28;

/// Extremal energies of an instance, with one witness minimizer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnergyBounds {
    pub min: i64,
    pub max: i64,
    /// Spin assignment attaining `min`: entry v is the bit of node v
    /// (`0 ⇔ z_v = +1`), so it works past the 64-node packed-word limit.
    pub argmin: Vec<u8>,
    /// True when produced by exhaustive enumeration.
    pub exact: bool,
}

impl EnergyBounds {
    /// The argmin as ±1 spins.
    pub fn argmin_spins(&self) -> Vec<i8> {
        self.argmin.iter().map(|&b| 1 - 2 * b as i8).collect()
    }

    /// The argmin packed into a basis-state index (nodes ≤ 64 only).
    pub fn argmin_bits(&self) -> Option<u64> {
        if self.argmin.len() > 64 {
            return None;
        }
        Some(
            self.argmin
                .iter()
                .enumerate()
                .fold(0u64, |acc, (v, &b)| acc | (b as u64) << v),
        )
    }
}

fn unpack_bits(bits: u64, n: usize) -> Vec<u8> {
    (0..n).map(|v| (bits >> v & 1) as u8).collect()
}

/// Exact minimum and maximum cost by Gray-code enumeration of all `2^n`
/// spin configurations.
pub fn brute_force_extrema(inst: &Instance) -> Result<EnergyBounds> {
    let n = inst.n();
    if n > BRUTE_FORCE_CAP {
        return Err(Error::Capacity(format!(
            "brute force capped at {BRUTE_FORCE_CAP} qubits, instance has {n}"
        )));
    }
    let mut min = i64::MAX;
    let mut max = i64::MIN;
    let mut argmin = 0u64;
    gray_scan(inst, |bits, cost| {
        if cost < min {
            min = cost;
            argmin = bits;
        }
        if cost > max {
            max = cost;
        }
    });
    Ok(EnergyBounds {
        min,
        max,
        argmin: unpack_bits(argmin, n),
        exact: true,
    })
}

/// Approximation ratio `(max − e) / (max − min)`: 1 at the ground-state
/// energy, 0 at the maximum.
pub fn approximation_ratio(bounds: &EnergyBounds, energy: f64) -> f64 {
    let span = (bounds.max - bounds.min) as f64;
    debug_assert!(span > 0.0, "±1 instances never have a flat spectrum");
    (bounds.max as f64 - energy) / span
}

/// A quadratic binary model over variables `x_0..x_{n_original-1}`
/// (transcribed spins, `x = (1 − z)/2`) followed by
/// `y_0..y_{n_aux-1}` (one auxiliary per cubic term, `y = x_{n1}·x_{n2}`
/// at penalty-feasible optima).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadraticModel {
    pub n_original: usize,
    pub n_aux: usize,
    /// Penalty scale applied to each product-enforcement gadget.
    pub penalty: i64,
    pub constant: i64,
    /// Length `n_original + n_aux`.
    pub linear: Vec<i64>,
    /// Merged upper-triangle terms `(i, j, coeff)` with `i < j`, sorted.
    pub quadratic: Vec<(usize, usize, i64)>,
}

impl QuadraticModel {
    pub fn n_vars(&self) -> usize {
        self.n_original + self.n_aux
    }

    /// Objective value at an assignment given as bits (bit k = value of
    /// variable k).
    pub fn evaluate(&self, bits: u64) -> i64 {
        let x = |k: usize| -> i64 { (bits >> k & 1) as i64 };
        let mut acc = self.constant;
        for (k, &c) in self.linear.iter().enumerate() {
            acc += c * x(k);
        }
        for &(i, j, c) in &self.quadratic {
            acc += c * x(i) * x(j);
        }
        acc
    }

    /// Exact minimum over all assignments (variables ≤ the enumeration cap).
    pub fn brute_force_min(&self) -> Result<(i64, u64)> {
        let v = self.n_vars();
        if v > BRUTE_FORCE_CAP {
            return Err(Error::Capacity(format!(
                "reduced-model enumeration capped at {BRUTE_FORCE_CAP} variables, model has {v}"
            )));
        }
        let mut best = (i64::MAX, 0u64);
        for bits in 0..(1u64 << v) {
            let val = self.evaluate(bits);
            if val < best.0 {
                best = (val, bits);
            }
        }
        Ok(best)
    }
}

/// Rewrite a (possibly cubic) instance as a quadratic binary model.
///
/// Spins become binaries via `z = 1 − 2x`. Each cubic term's neighbor pair
/// `(n1, n2)` is replaced by an auxiliary `y` with the standard
/// product-enforcement gadget `P·(x_{n1}x_{n2} − 2x_{n1}y − 2x_{n2}y + 3y)`,
/// which is 0 when `y = x_{n1}x_{n2}` and ≥ P otherwise. `penalty = None`
/// selects `P = 1 + Σ|coefficients|`, strictly larger than any objective
/// swing, so minimizing the model attains the original minimum.
pub fn reduce_order(inst: &Instance, penalty: Option<i64>) -> QuadraticModel {
    let n = inst.n();
    let n_aux = inst.structure.w.len();
    let n_terms = inst.n_terms() as i64; // every |coefficient| is 1
    let p = penalty.unwrap_or(1 + n_terms);
    let mut constant = 0i64;
    let mut linear = vec![0i64; n + n_aux];
    let mut quad = std::collections::BTreeMap::<(usize, usize), i64>::new();
    fn add_quad(
        quad: &mut std::collections::BTreeMap<(usize, usize), i64>,
        i: usize,
        j: usize,
        c: i64,
    ) {
        debug_assert_ne!(i, j);
        *quad.entry((i.min(j), i.max(j))).or_insert(0) += c;
    }

    // d·z_v = d − 2d·x_v
    for (v, &d) in inst.linear.iter().enumerate() {
        let d = d as i64;
        constant += d;
        linear[v] -= 2 * d;
    }
    // d·z_i z_j = d(1 − 2x_i − 2x_j + 4x_i x_j)
    for (e, &(i, j)) in inst.map.edges.iter().enumerate() {
        let d = inst.quadratic[e] as i64;
        constant += d;
        linear[i] -= 2 * d;
        linear[j] -= 2 * d;
        add_quad(&mut quad, i, j, 4 * d);
    }
    // d·z_l z_{n1} z_{n2} with y = x_{n1} x_{n2}:
    //   z_{n1} z_{n2} = 1 − 2x_{n1} − 2x_{n2} + 4y,
    // multiplied by z_l = 1 − 2x_l, stays quadratic in (x, y).
    for (k, &l) in inst.structure.w.iter().enumerate() {
        let (n1, n2) = inst.structure.pairs[k];
        let d = inst.cubic[k] as i64;
        let y = n + k;
        constant += d;
        linear[n1] -= 2 * d;
        linear[n2] -= 2 * d;
        linear[l] -= 2 * d;
        linear[y] += 4 * d;
        add_quad(&mut quad, l, n1, 4 * d);
        add_quad(&mut quad, l, n2, 4 * d);
        add_quad(&mut quad, l, y, -8 * d);
        // Product-enforcement gadget, scaled by the penalty.
        add_quad(&mut quad, n1, n2, p);
        add_quad(&mut quad, n1, y, -2 * p);
        add_quad(&mut quad, n2, y, -2 * p);
        linear[y] += 3 * p;
    }

    QuadraticModel {
        n_original: n,
        n_aux,
        penalty: p,
        constant,
        linear,
        quadratic: quad
            .into_iter()
            .map(|((i, j), c)| (i, j, c))
            .filter(|&(_, _, c)| c != 0)
            .collect(),
    }
}

fn var_name(model: &QuadraticModel, k: usize) -> String {
    if k < model.n_original {
        format!("x{k}")
    } else {
        format!("y{}", k - model.n_original)
    }
}

fn sign_of(c: i64) -> char {
    if c < 0 {
        '-'
    } else {
        '+'
    }
}

/// Serialize a model in CPLEX-style LP format.
///
/// Layout: comment header carrying `n_original`, `n_aux`, and `penalty`;
/// a `Minimize` objective with the constant, linear terms, and the
/// quadratic terms inside a `[ … ] / 2` block (coefficients doubled, per
/// LP convention); an empty `Subject To`; a `Binaries` list; `End`.
pub fn quadratic_model_to_lp(model: &QuadraticModel) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "\\ hexglass quadratic model, lp schema v1");
    let _ = writeln!(s, "\\ n_original {}", model.n_original);
    let _ = writeln!(s, "\\ n_aux {}", model.n_aux);
    let _ = writeln!(s, "\\ penalty {}", model.penalty);
    let _ = writeln!(s, "Minimize");
    let mut obj = format!(" obj: {}", model.constant);
    for (k, &c) in model.linear.iter().enumerate() {
        if c != 0 {
            let _ = write!(obj, " {} {} {}", sign_of(c), c.abs(), var_name(model, k));
        }
    }
    if !model.quadratic.is_empty() {
        let _ = write!(obj, " + [");
        for &(i, j, c) in &model.quadratic {
            let _ = write!(
                obj,
                " {} {} {} * {}",
                sign_of(c),
                2 * c.abs(),
                var_name(model, i),
                var_name(model, j)
            );
        }
        let _ = write!(obj, " ] / 2");
    }
    let _ = writeln!(s, "{obj}");
    let _ = writeln!(s, "Subject To");
    let _ = writeln!(s, "Binaries");
    if model.n_vars() > 0 {
        let names: Vec<String> = (0..model.n_vars()).map(|k| var_name(model, k)).collect();
        let _ = writeln!(s, " {}", names.join(" "));
    }
    let _ = writeln!(s, "End");
    s
}

/// Write the LP serialization of `model` to `path`.
pub fn export_quadratic_model(model: &QuadraticModel, path: &Path) -> Result<()> {
    std::fs::write(path, quadratic_model_to_lp(model))?;
    Ok(())
}

/// Parse text produced by [`quadratic_model_to_lp`] back into a model.
/// Inverse of the exporter on its own output; not a general LP reader.
pub fn parse_quadratic_model_lp(text: &str) -> Result<QuadraticModel> {
    let mut n_original = None;
    let mut n_aux = None;
    let mut penalty = None;
    let mut objective_line = None;
    for line in text.lines() {
        let line = line.trim();
        if let Some(rest) = line.strip_prefix('\\') {
            let mut it = rest.split_whitespace();
            match it.next() {
                Some("n_original") => n_original = it.next().and_then(|v| v.parse().ok()),
                Some("n_aux") => n_aux = it.next().and_then(|v| v.parse().ok()),
                Some("penalty") => penalty = it.next().and_then(|v| v.parse().ok()),
                _ => {}
            }
        } else if let Some(rest) = line.strip_prefix("obj:") {
            objective_line = Some(rest.to_string());
        }
    }
    let n_original: usize =
        n_original.ok_or_else(|| Error::Parse("missing n_original header".into()))?;
    let n_aux: usize = n_aux.ok_or_else(|| Error::Parse("missing n_aux header".into()))?;
    let penalty: i64 = penalty.ok_or_else(|| Error::Parse("missing penalty header".into()))?;
    let obj = objective_line.ok_or_else(|| Error::Parse("missing objective".into()))?;

    let var_index = |name: &str| -> Result<usize> {
        if name.len() < 2 {
            return Err(Error::Parse(format!("bad variable name {name}")));
        }
        let (prefix, digits) = name.split_at(1);
        let idx: usize = digits
            .parse()
            .map_err(|_| Error::Parse(format!("bad variable name {name}")))?;
        match prefix {
            "x" if idx < n_original => Ok(idx),
            "y" if idx < n_aux => Ok(n_original + idx),
            _ => Err(Error::Parse(format!("variable {name} out of range"))),
        }
    };

    let mut constant = 0i64;
    let mut linear = vec![0i64; n_original + n_aux];
    let mut quadratic = Vec::new();
    let tokens: Vec<&str> = obj.split_whitespace().collect();
    let mut i = 0;
    let mut in_bracket = false;
    while i < tokens.len() {
        match tokens[i] {
            "[" => {
                in_bracket = true;
                i += 1;
            }
            "]" => {
                // Consume the "/ 2" that closes the bracket block.
                if tokens.get(i + 1) != Some(&"/") || tokens.get(i + 2) != Some(&"2") {
                    return Err(Error::Parse("malformed quadratic block close".into()));
                }
                in_bracket = false;
                i += 3;
            }
            sign @ ("+" | "-") => {
                if tokens.get(i + 1) == Some(&"[") {
                    // "+ [" opens the quadratic block.
                    in_bracket = true;
                    i += 2;
                    continue;
                }
                let sgn: i64 = if sign == "-" { -1 } else { 1 };
                let mag: i64 = tokens
                    .get(i + 1)
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| Error::Parse("expected coefficient".into()))?;
                match tokens.get(i + 2) {
                    Some(&"+") | Some(&"-") | None => {
                        // Signed bare constant contribution.
                        constant += sgn * mag;
                        i += 2;
                    }
                    Some(name) if !in_bracket => {
                        linear[var_index(name)?] += sgn * mag;
                        i += 3;
                    }
                    Some(name) => {
                        if tokens.get(i + 3) != Some(&"*") {
                            return Err(Error::Parse("expected product in bracket".into()));
                        }
                        let other = tokens
                            .get(i + 4)
                            .ok_or_else(|| Error::Parse("missing second factor".into()))?;
                        let a = var_index(name)?;
                        let b = var_index(other)?;
                        quadratic.push((a.min(b), a.max(b), sgn * mag / 2));
                        i += 5;
                    }
                }
            }
            tok => {
                // The leading constant is emitted unsigned.
                let c: i64 = tok
                    .parse()
                    .map_err(|_| Error::Parse(format!("unexpected token {tok}")))?;
                constant += c;
                i += 1;
            }
        }
    }
    quadratic.sort_unstable();
    Ok(QuadraticModel {
        n_original,
        n_aux,
        penalty,
        constant,
        linear,
        quadratic,
    })
}

/// One term's membership as seen from a single node: the coefficient and
/// the other participating nodes.
struct NodeTerm {
    coeff: i64,
    others: [usize; 2],
    arity: usize,
}

fn build_node_terms(inst: &Instance) -> Vec<Vec<NodeTerm>> {
    let n = inst.n();
    let mut per_node: Vec<Vec<NodeTerm>> = (0..n).map(|_| Vec::new()).collect();
    for (v, &d) in inst.linear.iter().enumerate() {
        per_node[v].push(NodeTerm {
            coeff: d as i64,
            others: [0, 0],
            arity: 0,
        });
    }
    for (e, &(i, j)) in inst.map.edges.iter().enumerate() {
        let d = inst.quadratic[e] as i64;
        per_node[i].push(NodeTerm {
            coeff: d,
            others: [j, 0],
            arity: 1,
        });
        per_node[j].push(NodeTerm {
            coeff: d,
            others: [i, 0],
            arity: 1,
        });
    }
    for (k, &l) in inst.structure.w.iter().enumerate() {
        let (n1, n2) = inst.structure.pairs[k];
        let d = inst.cubic[k] as i64;
        for &(node, a, b) in &[(l, n1, n2), (n1, l, n2), (n2, l, n1)] {
            per_node[node].push(NodeTerm {
                coeff: d,
                others: [a, b],
                arity: 2,
            });
        }
    }
    per_node
}

/// Change in cost from flipping node `v` in spin state `z`.
fn flip_delta(per_node: &[Vec<NodeTerm>], z: &[i8], v: usize) -> i64 {
    // Flipping z_v negates every term containing v: Δ = −2 · Σ contributions.
    let mut local = 0i64;
    for t in &per_node[v] {
        let mut prod = t.coeff * z[v] as i64;
        for &u in &t.others[..t.arity] {
            prod *= z[u] as i64;
        }
        local += prod;
    }
    -2 * local
}

/// Best-of-restarts steepest-descent single-spin-flip search; minimizes
/// directly and maximizes via ascent. Works at any map size (spin
/// assignments are explicit vectors), is deterministic for a fixed seed,
/// and is never reported as exact.
pub fn local_search_bound(inst: &Instance, restarts: usize, seed: u64) -> Result<EnergyBounds> {
    if restarts == 0 {
        return Err(Error::InvalidInstance(
            "local search needs at least one restart".into(),
        ));
    }
    let n = inst.n();
    let per_node = build_node_terms(inst);
    let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
    let mut best_min = i64::MAX;
    let mut best_max = i64::MIN;
    let mut argmin = vec![0u8; n];
    for _ in 0..restarts {
        for maximize in [false, true] {
            let mut z: Vec<i8> = (0..n)
                .map(|_| if rng.gen::<bool>() { 1 } else { -1 })
                .collect();
            let mut cost = inst.evaluate_cost_spins(&z);
            loop {
                // Steepest move; ties take the lowest node index.
                let mut best_delta = 0i64;
                let mut best_v = None;
                for v in 0..n {
                    let delta = flip_delta(&per_node, &z, v);
                    let improving = if maximize {
                        delta > best_delta
                    } else {
                        delta < best_delta
                    };
                    if improving {
                        best_delta = delta;
                        best_v = Some(v);
                    }
                }
                match best_v {
                    Some(v) => {
                        z[v] = -z[v];
                        cost += best_delta;
                    }
                    None => break,
                }
            }
            debug_assert_eq!(cost, inst.evaluate_cost_spins(&z));
            if !maximize && cost < best_min {
                best_min = cost;
                argmin = z.iter().map(|&s| if s == 1 { 0 } else { 1 }).collect();
            }
            if maximize && cost > best_max {
                best_max = cost;
            }
        }
    }
    Ok(EnergyBounds {
        min: best_min,
        max: best_max,
        argmin,
        exact: false,
    })
}
