//! Coupling maps, heavy-hex structure, and random ±1 spin-glass instances.
//!
//! A *coupling map* is an undirected graph on nodes `0..n`. A valid
//! heavy-hex(-subgraph) map is bipartite with maximum degree 3; the side
//! containing the degree-3 nodes is `V3`, the other side `V2` (max degree 2).
//! The *W set* is the set of degree-2 nodes of `V2`; each `l ∈ W` carries one
//! cubic interaction `z_l z_n1 z_n2` with its two neighbors `n1 < n2`.

use std::collections::BTreeMap;
use std::collections::VecDeque;

use rand::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// An undirected coupling graph with named provenance.
///
/// Edges are stored as `(i, j)` with `i < j`, sorted lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CouplingMap {
    pub name: String,
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
}

impl CouplingMap {
    /// Build a map from raw edges: normalizes order, sorts, and validates.
    pub fn new(name: impl Into<String>, n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        let name = name.into();
        if n == 0 {
            return Err(Error::InvalidMap("empty node set".into()));
        }
        let mut norm: Vec<(usize, usize)> = Vec::with_capacity(edges.len());
        for (a, b) in edges {
            if a == b {
                return Err(Error::InvalidMap(format!("self-loop at node {a}")));
            }
            if a >= n || b >= n {
                return Err(Error::InvalidMap(format!(
                    "edge ({a},{b}) out of range for n = {n}"
                )));
            }
            norm.push((a.min(b), a.max(b)));
        }
        norm.sort_unstable();
        if norm.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidMap("duplicate edge".into()));
        }
        Ok(Self { name, n, edges: norm })
    }

    /// Load a built-in map by name, or parse a JSON file path.
    pub fn load(source: &str) -> Result<Self> {
        if let Some(map) = Self::builtin(source) {
            return Ok(map);
        }
        let path = std::path::Path::new(source);
        if path.exists() {
            let text = std::fs::read_to_string(path)?;
            return Self::from_json_str(&text);
        }
        Err(Error::InvalidMap(format!(
            "unknown map '{source}': not a built-in ({}) and not a file",
            Self::builtin_names().join(", ")
        )))
    }

    /// Names of the embedded coupling maps.
    pub fn builtin_names() -> Vec<&'static str> {
        vec!["guadalupe-16", "falcon-27", "eagle-127"]
    }

    /// Embedded coupling maps of the three studied processor families.
    pub fn builtin(name: &str) -> Option<Self> {
        let map = match name {
            "guadalupe-16" => Self::new(
                name,
                16,
                vec![
                    (0, 1),
                    (1, 2),
                    (1, 4),
                    (2, 3),
                    (3, 5),
                    (4, 7),
                    (5, 8),
                    (6, 7),
                    (7, 10),
                    (8, 9),
                    (8, 11),
                    (10, 12),
                    (11, 14),
                    (12, 13),
                    (12, 15),
                    (13, 14),
                ],
            ),
            "falcon-27" => Self::new(
                name,
                27,
                vec![
                    (0, 1),
                    (1, 2),
                    (1, 4),
                    (2, 3),
                    (3, 5),
                    (4, 7),
                    (5, 8),
                    (6, 7),
                    (7, 10),
                    (8, 9),
                    (8, 11),
                    (10, 12),
                    (11, 14),
                    (12, 13),
                    (12, 15),
                    (13, 14),
                    (14, 16),
                    (15, 18),
                    (16, 19),
                    (17, 18),
                    (18, 21),
                    (19, 20),
                    (19, 22),
                    (21, 23),
                    (22, 25),
                    (23, 24),
                    (24, 25),
                    (25, 26),
                ],
            ),
            "eagle-127" => {
                // Seven horizontal rows of path-connected qubits joined by
                // vertical connector qubits.
                let rows: [(usize, usize); 7] = [
                    (0, 13),
                    (18, 32),
                    (37, 51),
                    (56, 70),
                    (75, 89),
                    (94, 108),
                    (113, 126),
                ];
                let connectors: [(usize, usize, usize); 24] = [
                    (14, 0, 18),
                    (15, 4, 22),
                    (16, 8, 26),
                    (17, 12, 30),
                    (33, 20, 39),
                    (34, 24, 43),
                    (35, 28, 47),
                    (36, 32, 51),
                    (52, 37, 56),
                    (53, 41, 60),
                    (54, 45, 64),
                    (55, 49, 68),
                    (71, 58, 77),
                    (72, 62, 81),
                    (73, 66, 85),
                    (74, 70, 89),
                    (90, 75, 94),
                    (91, 79, 98),
                    (92, 83, 102),
                    (93, 87, 106),
                    (109, 96, 114),
                    (110, 100, 118),
                    (111, 104, 122),
                    (112, 108, 126),
                ];
                let mut edges = Vec::new();
                for &(lo, hi) in &rows {
                    for q in lo..hi {
                        edges.push((q, q + 1));
                    }
                }
                for &(c, up, down) in &connectors {
                    edges.push((up, c));
                    edges.push((c, down));
                }
                Self::new(name, 127, edges)
            }
            _ => return None,
        };
        Some(map.expect("built-in maps are valid"))
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("map serialize")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let raw: CouplingMap = serde_json::from_str(s)?;
        Self::new(raw.name, raw.n, raw.edges)
    }

    /// Per-node degree vector.
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0usize; self.n];
        for &(a, b) in &self.edges {
            deg[a] += 1;
            deg[b] += 1;
        }
        deg
    }

    /// Per-node sorted adjacency lists.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }
}

/// Which bipartition side a node belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    V2,
    V3,
}

/// The derived heavy-hex structure of a coupling map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Structure {
    /// Bipartition side per node.
    pub side: Vec<Side>,
    /// Sorted nodes of the max-degree-2 side.
    pub v2: Vec<usize>,
    /// Sorted nodes of the side containing all degree-3 nodes.
    pub v3: Vec<usize>,
    /// Sorted degree-2 nodes of `v2`; each carries one cubic term.
    pub w: Vec<usize>,
    /// For each `l` in `w` (same order): its neighbor pair `(n1, n2)`, `n1 < n2`.
    pub pairs: Vec<(usize, usize)>,
    /// Per-node degree.
    pub degrees: Vec<usize>,
}

impl Structure {
    /// Neighbor pair of a W node, if it is one.
    pub fn pair_of(&self, l: usize) -> Option<(usize, usize)> {
        self.w.binary_search(&l).ok().map(|i| self.pairs[i])
    }
}

/// Derive the V2/V3 bipartition and the W set of a heavy-hex map.
///
/// Rules (documented for reproducibility):
/// * the graph must be bipartite with maximum degree 3;
/// * in every connected component the color class containing a degree-3 node
///   becomes part of `V3` (a component with degree-3 nodes in both classes is
///   rejected);
/// * components without any degree-3 node (paths, cycles, isolated nodes):
///   the class containing the component's lowest-numbered node becomes `V2`;
/// * `W` = degree-2 nodes of `V2`.
pub fn derive_structure(map: &CouplingMap) -> Result<Structure> {
    let degrees = map.degrees();
    if let Some(v) = degrees.iter().position(|&d| d > 3) {
        return Err(Error::NotHeavyHex(format!(
            "node {v} has degree {} > 3",
            degrees[v]
        )));
    }
    let adj = map.adjacency();

    // BFS 2-coloring per component.
    let mut color: Vec<Option<bool>> = vec![None; map.n];
    let mut side = vec![Side::V2; map.n];
    for start in 0..map.n {
        if color[start].is_some() {
            continue;
        }
        // Collect the component with 2-coloring.
        color[start] = Some(false);
        let mut queue = VecDeque::from([start]);
        let mut component = vec![start];
        while let Some(u) = queue.pop_front() {
            let cu = color[u].unwrap();
            for &v in &adj[u] {
                match color[v] {
                    None => {
                        color[v] = Some(!cu);
                        component.push(v);
                        queue.push_back(v);
                    }
                    Some(cv) => {
                        if cv == cu {
                            return Err(Error::NotHeavyHex(format!(
                                "odd cycle through edge ({u},{v}); graph is not bipartite"
                            )));
                        }
                    }
                }
            }
        }
        // Decide which color class is V3 in this component.
        let deg3_false = component
            .iter()
            .any(|&v| degrees[v] == 3 && color[v] == Some(false));
        let deg3_true = component
            .iter()
            .any(|&v| degrees[v] == 3 && color[v] == Some(true));
        let v3_color = match (deg3_false, deg3_true) {
            (true, true) => {
                return Err(Error::NotHeavyHex(format!(
                    "component containing node {start} has degree-3 nodes on both \
                     bipartition sides"
                )))
            }
            (true, false) => false,
            (false, true) => true,
            // No degree-3 node: the class of the lowest-numbered node is V2.
            (false, false) => !color[start].unwrap(),
        };
        for &v in &component {
            side[v] = if color[v] == Some(v3_color) {
                Side::V3
            } else {
                Side::V2
            };
        }
    }

    let v2: Vec<usize> = (0..map.n).filter(|&v| side[v] == Side::V2).collect();
    let v3: Vec<usize> = (0..map.n).filter(|&v| side[v] == Side::V3).collect();
    let mut w = Vec::new();
    let mut pairs = Vec::new();
    for &v in &v2 {
        if degrees[v] == 2 {
            w.push(v);
            pairs.push((adj[v][0], adj[v][1]));
        }
    }
    Ok(Structure {
        side,
        v2,
        v3,
        w,
        pairs,
        degrees,
    })
}

/// One interaction term of a cost function: `coeff · Π_{v ∈ sites} z_v`.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    /// Interaction sites, sorted ascending (1, 2, or 3 of them).
    pub sites: Vec<usize>,
    pub coeff: f64,
}

/// A random ±1 higher-order Ising instance on a heavy-hex coupling map.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub map: CouplingMap,
    pub structure: Structure,
    pub seed: u64,
    /// Linear coefficient per node (dense, length `n`).
    pub linear: Vec<i8>,
    /// Quadratic coefficient per edge, parallel to `map.edges`.
    pub quadratic: Vec<i8>,
    /// Cubic coefficient per W node, parallel to `structure.w`.
    pub cubic: Vec<i8>,
}

/// Generate a seeded instance: every coefficient is an independent uniform ±1.
///
/// The draw stream is pinned for reproducibility: xoshiro256** seeded from
/// `seed` via SplitMix64 (`seed_from_u64`); one `next_u64` per coefficient,
/// sign `+1` iff the low bit is 0; draw order is linear terms by node
/// ascending, then quadratic terms by edge in lexicographic order, then cubic
/// terms by W node ascending.
pub fn generate_instance(map: &CouplingMap, seed: u64) -> Result<Instance> {
    let structure = derive_structure(map)?;
    let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
    let draw = |rng: &mut Xoshiro256StarStar| -> i8 {
        if rng.next_u64() & 1 == 0 {
            1
        } else {
            -1
        }
    };
    let linear: Vec<i8> = (0..map.n).map(|_| draw(&mut rng)).collect();
    let quadratic: Vec<i8> = map.edges.iter().map(|_| draw(&mut rng)).collect();
    let cubic: Vec<i8> = structure.w.iter().map(|_| draw(&mut rng)).collect();
    Ok(Instance {
        map: map.clone(),
        structure,
        seed,
        linear,
        quadratic,
        cubic,
    })
}

impl Instance {
    pub fn n(&self) -> usize {
        self.map.n
    }

    /// Total number of interaction terms `|V| + |E| + |W|`.
    pub fn n_terms(&self) -> usize {
        self.linear.len() + self.quadratic.len() + self.cubic.len()
    }

    /// Parity (0 or 1) shared by every value of the cost function.
    ///
    /// All coefficients are ±1, so `C(z) ≡ n_terms (mod 2)` for every `z`:
    /// the whole spectrum sits on integers of a single parity.
    pub fn cost_parity(&self) -> u8 {
        (self.n_terms() % 2) as u8
    }

    /// Exact cost of the basis state `bits` (bit k = 0 ⇔ `z_k = +1`).
    /// Limited to `n ≤ 64` by the representation; see
    /// [`Instance::evaluate_cost_spins`] for larger maps.
    pub fn evaluate_cost(&self, bits: u64) -> i64 {
        let z: Vec<i8> = (0..self.n())
            .map(|v| if bits >> v & 1 == 0 { 1 } else { -1 })
            .collect();
        self.evaluate_cost_spins(&z)
    }

    /// Exact cost of an explicit spin assignment (`z[v] ∈ {+1, −1}`),
    /// usable at any size.
    pub fn evaluate_cost_spins(&self, z: &[i8]) -> i64 {
        debug_assert_eq!(z.len(), self.n());
        let mut c = 0i64;
        for (v, &d) in self.linear.iter().enumerate() {
            c += d as i64 * z[v] as i64;
        }
        for (e, &(i, j)) in self.map.edges.iter().enumerate() {
            c += self.quadratic[e] as i64 * (z[i] * z[j]) as i64;
        }
        for (k, &l) in self.structure.w.iter().enumerate() {
            let (n1, n2) = self.structure.pairs[k];
            c += self.cubic[k] as i64 * (z[l] * z[n1] * z[n2]) as i64;
        }
        c
    }

    /// All interaction terms with sites sorted ascending.
    pub fn terms(&self) -> Vec<Term> {
        let mut terms = Vec::with_capacity(self.n_terms());
        for (v, &d) in self.linear.iter().enumerate() {
            terms.push(Term {
                sites: vec![v],
                coeff: d as f64,
            });
        }
        for (e, &(i, j)) in self.map.edges.iter().enumerate() {
            terms.push(Term {
                sites: vec![i, j],
                coeff: self.quadratic[e] as f64,
            });
        }
        for (k, &l) in self.structure.w.iter().enumerate() {
            let (n1, n2) = self.structure.pairs[k];
            let mut sites = vec![l, n1, n2];
            sites.sort_unstable();
            terms.push(Term {
                sites,
                coeff: self.cubic[k] as f64,
            });
        }
        terms
    }

    /// Stable identifier used in file names and CSV rows.
    pub fn id(&self) -> String {
        format!("{}-s{}", self.map.name, self.seed)
    }

    /// Serialize as `{map, seed, linear, quadratic, cubic}` with string keys
    /// in ascending numeric order; the graph is fully reconstructable from
    /// the JSON alone (nodes from `linear`, edges from `quadratic`).
    pub fn to_json_string(&self) -> String {
        let mut linear = serde_json::Map::new();
        for (v, &d) in self.linear.iter().enumerate() {
            linear.insert(v.to_string(), serde_json::json!(d));
        }
        let mut quadratic = serde_json::Map::new();
        for (e, &(i, j)) in self.map.edges.iter().enumerate() {
            quadratic.insert(format!("{i}-{j}"), serde_json::json!(self.quadratic[e]));
        }
        let mut cubic = serde_json::Map::new();
        for (k, &l) in self.structure.w.iter().enumerate() {
            let (n1, n2) = self.structure.pairs[k];
            cubic.insert(format!("{l}-{n1}-{n2}"), serde_json::json!(self.cubic[k]));
        }
        let mut obj = serde_json::Map::new();
        obj.insert("map".into(), serde_json::json!(self.map.name));
        obj.insert("seed".into(), serde_json::json!(self.seed));
        obj.insert("linear".into(), serde_json::Value::Object(linear));
        obj.insert("quadratic".into(), serde_json::Value::Object(quadratic));
        obj.insert("cubic".into(), serde_json::Value::Object(cubic));
        serde_json::to_string_pretty(&serde_json::Value::Object(obj)).expect("instance serialize")
    }

    /// Parse and validate an instance JSON produced by [`Instance::to_json_string`].
    ///
    /// The coupling graph is reconstructed from the coefficient keys and the
    /// cubic terms are checked against the derived W structure.
    pub fn from_json_str(s: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Raw {
            map: String,
            seed: u64,
            linear: BTreeMap<String, i8>,
            quadratic: BTreeMap<String, i8>,
            cubic: BTreeMap<String, i8>,
        }
        let raw: Raw = serde_json::from_str(s)?;
        let bad =
            |msg: String| -> Error { Error::InvalidInstance(msg) };

        let parse_usize = |t: &str| -> Result<usize> {
            t.parse::<usize>()
                .map_err(|_| bad(format!("bad numeric key component '{t}'")))
        };

        let mut linear_map = BTreeMap::new();
        for (k, v) in &raw.linear {
            check_sign(*v)?;
            linear_map.insert(parse_usize(k)?, *v);
        }
        let n = linear_map.len();
        if n == 0 {
            return Err(bad("no linear coefficients".into()));
        }
        if linear_map.keys().copied().ne(0..n) {
            return Err(bad("linear keys must cover 0..n contiguously".into()));
        }
        let linear: Vec<i8> = (0..n).map(|v| linear_map[&v]).collect();

        let mut edges = Vec::new();
        let mut quad_coeffs = BTreeMap::new();
        for (k, v) in &raw.quadratic {
            check_sign(*v)?;
            let parts: Vec<&str> = k.split('-').collect();
            if parts.len() != 2 {
                return Err(bad(format!("quadratic key '{k}' is not 'i-j'")));
            }
            let (i, j) = (parse_usize(parts[0])?, parse_usize(parts[1])?);
            if i >= j {
                return Err(bad(format!("quadratic key '{k}' must have i < j")));
            }
            edges.push((i, j));
            quad_coeffs.insert((i, j), *v);
        }
        let map = CouplingMap::new(raw.map.clone(), n, edges)?;
        let structure = derive_structure(&map)?;
        let quadratic: Vec<i8> = map.edges.iter().map(|e| quad_coeffs[e]).collect();

        let mut cubic_coeffs = BTreeMap::new();
        for (k, v) in &raw.cubic {
            check_sign(*v)?;
            let parts: Vec<&str> = k.split('-').collect();
            if parts.len() != 3 {
                return Err(bad(format!("cubic key '{k}' is not 'l-n1-n2'")));
            }
            let l = parse_usize(parts[0])?;
            let n1 = parse_usize(parts[1])?;
            let n2 = parse_usize(parts[2])?;
            match structure.pair_of(l) {
                Some(pair) if pair == (n1, n2) => {}
                Some(pair) => {
                    return Err(bad(format!(
                        "cubic key '{k}' disagrees with derived neighbor pair \
                         ({},{}) of node {l}",
                        pair.0, pair.1
                    )))
                }
                None => return Err(bad(format!("cubic key '{k}': node {l} is not a W node"))),
            }
            cubic_coeffs.insert(l, *v);
        }
        if cubic_coeffs.len() != structure.w.len() {
            return Err(bad(format!(
                "instance has {} cubic terms but the derived W set has {}",
                cubic_coeffs.len(),
                structure.w.len()
            )));
        }
        let cubic: Vec<i8> = structure.w.iter().map(|l| cubic_coeffs[l]).collect();

        Ok(Instance {
            map,
            structure,
            seed: raw.seed,
            linear,
            quadratic,
            cubic,
        })
    }
}

fn check_sign(v: i8) -> Result<()> {
    if v == 1 || v == -1 {
        Ok(())
    } else {
        Err(Error::InvalidInstance(format!(
            "coefficient {v} is not ±1"
        )))
    }
}

/// Visit every basis state once in Gray-code order, with its exact cost.
///
/// Calls `f(bits, cost)` for all `2^n` states, updating the cost
/// incrementally (one spin flip per step). Used by the cost-table builder
/// and the brute-force solver. Capacity-checked by callers.
pub(crate) fn gray_scan(inst: &Instance, mut f: impl FnMut(u64, i64)) {
    let n = inst.n();
    // Per-node list of (coefficient, other interaction sites).
    let mut node_terms: Vec<Vec<(i64, [Option<usize>; 2])>> = vec![Vec::new(); n];
    for (v, &d) in inst.linear.iter().enumerate() {
        node_terms[v].push((d as i64, [None, None]));
    }
    for (e, &(i, j)) in inst.map.edges.iter().enumerate() {
        let d = inst.quadratic[e] as i64;
        node_terms[i].push((d, [Some(j), None]));
        node_terms[j].push((d, [Some(i), None]));
    }
    for (k, &l) in inst.structure.w.iter().enumerate() {
        let (n1, n2) = inst.structure.pairs[k];
        let d = inst.cubic[k] as i64;
        node_terms[l].push((d, [Some(n1), Some(n2)]));
        node_terms[n1].push((d, [Some(l), Some(n2)]));
        node_terms[n2].push((d, [Some(l), Some(n1)]));
    }

    let mut spins = vec![1i64; n];
    // All-+1 state: cost = sum of all coefficients.
    let mut cost: i64 = inst.linear.iter().map(|&d| d as i64).sum::<i64>()
        + inst.quadratic.iter().map(|&d| d as i64).sum::<i64>()
        + inst.cubic.iter().map(|&d| d as i64).sum::<i64>();
    let mut bits: u64 = 0;
    f(bits, cost);

    let total: u64 = 1u64 << n;
    for i in 1..total {
        let k = i.trailing_zeros() as usize;
        spins[k] = -spins[k];
        bits ^= 1u64 << k;
        // Δcost = 2 · z_k_new · Σ_{terms ∋ k} coeff · Π_{other sites} z.
        let mut acc = 0i64;
        for &(d, others) in &node_terms[k] {
            let mut prod = d;
            if let Some(a) = others[0] {
                prod *= spins[a];
            }
            if let Some(b) = others[1] {
                prod *= spins[b];
            }
            acc += prod;
        }
        cost += 2 * spins[k] * acc;
        f(bits, cost);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_structure_counts() {
        // (name, linear, quadratic, cubic) per the three lattice families.
        for (name, nl, nq, nc) in [
            ("guadalupe-16", 16, 16, 6),
            ("falcon-27", 27, 28, 11),
            ("eagle-127", 127, 144, 71),
        ] {
            let map = CouplingMap::builtin(name).unwrap();
            assert_eq!(map.n, nl, "{name} node count");
            assert_eq!(map.edges.len(), nq, "{name} edge count");
            let s = derive_structure(&map).unwrap();
            assert_eq!(s.w.len(), nc, "{name} W-set size");
        }
    }

    #[test]
    fn guadalupe_w_set_and_pairs() {
        let map = CouplingMap::builtin("guadalupe-16").unwrap();
        let s = derive_structure(&map).unwrap();
        assert_eq!(s.w, vec![2, 4, 5, 10, 11, 13]);
        assert_eq!(s.pair_of(4), Some((1, 7)));
    }

    #[test]
    fn gray_scan_matches_direct_evaluation() {
        let map = CouplingMap::builtin("guadalupe-16").unwrap();
        let inst = generate_instance(&map, 7).unwrap();
        // Restrict to a small subgraph for the exhaustive check.
        let sub = CouplingMap::new(
            "sub",
            8,
            map.edges
                .iter()
                .copied()
                .filter(|&(a, b)| a < 8 && b < 8)
                .collect(),
        )
        .unwrap();
        let inst_small = generate_instance(&sub, inst.seed).unwrap();
        let mut seen = vec![false; 1 << 8];
        gray_scan(&inst_small, |bits, cost| {
            assert_eq!(cost, inst_small.evaluate_cost(bits));
            assert!(!seen[bits as usize]);
            seen[bits as usize] = true;
        });
        assert!(seen.iter().all(|&s| s));
    }
}
