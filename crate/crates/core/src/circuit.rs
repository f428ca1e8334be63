//! QAOA circuit construction for heavy-hex cost functions.
//!
//! The phase separator of each round is compiled into three CNOT "open"
//! layers and three "close" layers, one per edge-color class, giving CNOT
//! depth exactly 6 per round on any map with a degree-3 node:
//!
//! * every edge `(v2, v3)` contributes one CNOT pair oriented `v3 → v2`
//!   (control on the degree-3 side, target on the degree-≤2 side);
//! * at a W node `l` the two incident edges' CNOT pairs *cross* (open-lo,
//!   open-hi, close-lo, close-hi, ordered by edge color), so the running
//!   parity on `l` passes through `z_l z_a`, then `z_l z_a z_b`, then
//!   `z_l z_b`: one RZ after each of the first three CNOTs realizes both
//!   quadratic terms and the cubic term with no extra two-qubit gates;
//! * an edge with color `c` opens in layer `c+1` and closes in layer `c+4`;
//!   for any two distinct colors the crossing pattern above holds, so the
//!   layer template is valid for every proper 3-edge-coloring.

use std::fmt::Write as _;

use crate::model::{derive_structure, CouplingMap, Instance, Side};
use crate::{Angles, Error, Result};

/// A circuit gate. Angles are radians.
#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    H(usize),
    Rz { q: usize, theta: f64 },
    Rx { q: usize, theta: f64 },
    Cnot { control: usize, target: usize },
}

/// A flat gate-list circuit over `n` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    pub n: usize,
    pub gates: Vec<Gate>,
}

/// Gate statistics; `cnot_depth` is computed by greedy as-soon-as-possible
/// layering of the CNOT gates alone (single-qubit gates are free).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DepthStats {
    pub cnot_count: usize,
    pub cnot_depth: usize,
    pub total_gates: usize,
}

/// Compute gate statistics for a circuit.
pub fn circuit_depth_stats(circuit: &Circuit) -> DepthStats {
    let mut cnot_count = 0usize;
    let mut layer = vec![0usize; circuit.n];
    let mut depth = 0usize;
    for gate in &circuit.gates {
        if let Gate::Cnot { control, target } = *gate {
            cnot_count += 1;
            let l = layer[control].max(layer[target]) + 1;
            layer[control] = l;
            layer[target] = l;
            depth = depth.max(l);
        }
    }
    DepthStats {
        cnot_count,
        cnot_depth: depth,
        total_gates: circuit.gates.len(),
    }
}

/// A proper 3-edge-coloring: `colors[e] ∈ {0,1,2}` parallel to `map.edges`.
pub type EdgeColoring = Vec<u8>;

/// Properly 3-edge-color a bipartite max-degree-3 map.
///
/// Deterministic: edges are processed in BFS discovery order from the
/// lowest-numbered node of each component, taking the smallest color free at
/// both endpoints, with an alternating-path (Kempe chain) recoloring
/// fallback when no color is free at both.
pub fn three_edge_coloring(map: &CouplingMap) -> Result<EdgeColoring> {
    let _ = derive_structure(map)?; // validates bipartite, max degree 3
    let adj = map.adjacency();
    let edge_index = |a: usize, b: usize| -> usize {
        let key = (a.min(b), a.max(b));
        map.edges.binary_search(&key).expect("edge exists")
    };

    const NONE: u8 = u8::MAX;
    let mut color: Vec<u8> = vec![NONE; map.edges.len()];
    // used[v][c]: edge index at v colored c (or usize::MAX).
    let mut used = vec![[usize::MAX; 3]; map.n];

    // BFS edge order.
    let mut order = Vec::with_capacity(map.edges.len());
    let mut visited = vec![false; map.n];
    for start in 0..map.n {
        if visited[start] {
            continue;
        }
        visited[start] = true;
        let mut queue = std::collections::VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                let e = edge_index(u, v);
                if color[e] == NONE && !order.contains(&e) {
                    order.push(e);
                }
                if !visited[v] {
                    visited[v] = true;
                    queue.push_back(v);
                }
            }
        }
    }

    for &e in &order {
        let (u, v) = map.edges[e];
        let free = |used_at: &[usize; 3]| -> [bool; 3] {
            [
                used_at[0] == usize::MAX,
                used_at[1] == usize::MAX,
                used_at[2] == usize::MAX,
            ]
        };
        let fu = free(&used[u]);
        let fv = free(&used[v]);
        let common = (0..3).find(|&c| fu[c] && fv[c]);
        let c = match common {
            Some(c) => c,
            None => {
                // Kempe chain: α free at u, β free at v. The α/β-colored
                // subgraph has max degree 2, so the maximal α,β,α,…
                // alternating path from v is well defined; swapping its
                // colors frees α at v. On a bipartite graph that path cannot
                // end at u (it would have to arrive on a β edge, putting u
                // and v on the same side), so α stays free at u too.
                let alpha = (0..3).find(|&c| fu[c]).ok_or_else(|| {
                    Error::NotHeavyHex(format!("node {u} has more than 3 incident edges"))
                })?;
                let beta = (0..3).find(|&c| fv[c]).ok_or_else(|| {
                    Error::NotHeavyHex(format!("node {v} has more than 3 incident edges"))
                })?;
                let mut path = Vec::new();
                let (mut node, mut want) = (v, alpha);
                while used[node][want] != usize::MAX {
                    let e2 = used[node][want];
                    path.push(e2);
                    let (a, b) = map.edges[e2];
                    node = if a == node { b } else { a };
                    want = if want == alpha { beta } else { alpha };
                }
                debug_assert_ne!(node, u, "Kempe chain reached the far endpoint");
                for &e2 in &path {
                    let (a, b) = map.edges[e2];
                    let old = color[e2] as usize;
                    used[a][old] = usize::MAX;
                    used[b][old] = usize::MAX;
                }
                for &e2 in &path {
                    let (a, b) = map.edges[e2];
                    let old = color[e2] as usize;
                    let new = if old == alpha { beta } else { alpha };
                    color[e2] = new as u8;
                    used[a][new] = e2;
                    used[b][new] = e2;
                }
                alpha
            }
        };
        color[e] = c as u8;
        used[u][c] = e;
        used[v][c] = e;
    }

    // Validate properness (cheap, guards the Kempe logic).
    let mut seen = vec![[false; 3]; map.n];
    for (e, &(a, b)) in map.edges.iter().enumerate() {
        let c = color[e] as usize;
        if c > 2 || seen[a][c] || seen[b][c] {
            return Err(Error::Simulation(format!(
                "internal: improper edge coloring at edge {e} ({a},{b})"
            )));
        }
        seen[a][c] = true;
        seen[b][c] = true;
    }
    Ok(color)
}

/// Build the full QAOA circuit for an instance and angle schedule.
///
/// Layout per round: linear RZ(2γd) sweep, then CNOT "open" layers by color
/// 0,1,2 (each CNOT immediately followed by the RZ it enables), then CNOT
/// "close" layers by color 0,1,2, then the RX(2β) mixer sweep. A single H
/// layer prepares `|+^n⟩` at the start.
pub fn build_qaoa_circuit(inst: &Instance, angles: &Angles) -> Result<Circuit> {
    if angles.p() == 0 {
        return Err(Error::InvalidAngles(
            "p = 0 has no circuit; use the statevector p = 0 path".into(),
        ));
    }
    let map = &inst.map;
    let s = &inst.structure;
    let colors = three_edge_coloring(map)?;

    // Per-edge metadata: orientation and the RZ schedule slots.
    // For each W node: lo = lower-colored incident edge, hi = higher.
    let mut w_info = vec![None; map.n]; // node -> (lo_edge, hi_edge, cubic_idx)
    for (k, &l) in s.w.iter().enumerate() {
        let (n1, n2) = s.pairs[k];
        let find = |a: usize, b: usize| -> usize {
            let key = (a.min(b), a.max(b));
            map.edges.binary_search(&key).expect("edge exists")
        };
        let e1 = find(l, n1);
        let e2 = find(l, n2);
        let (lo, hi) = if colors[e1] < colors[e2] {
            (e1, e2)
        } else {
            (e2, e1)
        };
        w_info[l] = Some((lo, hi, k));
    }
    let target_of = |e: usize| -> usize {
        let (a, b) = map.edges[e];
        if s.side[a] == Side::V2 {
            a
        } else {
            b
        }
    };
    let control_of = |e: usize| -> usize {
        let (a, b) = map.edges[e];
        if s.side[a] == Side::V2 {
            b
        } else {
            a
        }
    };

    let mut gates = Vec::new();
    for q in 0..map.n {
        gates.push(Gate::H(q));
    }
    for r in 0..angles.p() {
        let gamma = angles.gamma[r];
        let beta = angles.beta[r];
        // Linear terms.
        for (v, &d) in inst.linear.iter().enumerate() {
            gates.push(Gate::Rz {
                q: v,
                theta: 2.0 * gamma * d as f64,
            });
        }
        // Open layers: colors 0,1,2.
        for c in 0..3u8 {
            for (e, &col) in colors.iter().enumerate() {
                if col != c {
                    continue;
                }
                let t = target_of(e);
                gates.push(Gate::Cnot {
                    control: control_of(e),
                    target: t,
                });
                match w_info[t] {
                    Some((lo, _hi, _k)) if e == lo => {
                        // Parity on t is now z_t·z_(lo partner): quadratic RZ
                        // of the lower-colored edge.
                        gates.push(Gate::Rz {
                            q: t,
                            theta: 2.0 * gamma * inst.quadratic[lo] as f64,
                        });
                    }
                    Some((_lo, hi, k)) if e == hi => {
                        // Parity on t is now the full triple: cubic RZ.
                        gates.push(Gate::Rz {
                            q: t,
                            theta: 2.0 * gamma * inst.cubic[k] as f64,
                        });
                    }
                    _ => {
                        // Degree-1 target: plain quadratic conjugation.
                        gates.push(Gate::Rz {
                            q: t,
                            theta: 2.0 * gamma * inst.quadratic[e] as f64,
                        });
                    }
                }
            }
        }
        // Close layers: colors 0,1,2.
        for c in 0..3u8 {
            for (e, &col) in colors.iter().enumerate() {
                if col != c {
                    continue;
                }
                let t = target_of(e);
                gates.push(Gate::Cnot {
                    control: control_of(e),
                    target: t,
                });
                if let Some((lo, hi, _k)) = w_info[t] {
                    if e == lo {
                        // Parity on t is now z_t·z_(hi partner): quadratic RZ
                        // of the higher-colored edge.
                        gates.push(Gate::Rz {
                            q: t,
                            theta: 2.0 * gamma * inst.quadratic[hi] as f64,
                        });
                    }
                }
            }
        }
        // Mixer.
        for q in 0..map.n {
            gates.push(Gate::Rx {
                q,
                theta: 2.0 * beta,
            });
        }
    }
    Ok(Circuit { n: map.n, gates })
}

/// Serialize a circuit in an OPENQASM-2-compatible subset
/// (`h`, `cx`, `rz`, `rx`, full-register `measure`). Angles are printed with
/// 17 significant digits so reparsing is exact.
pub fn export_circuit_text(circuit: &Circuit) -> String {
    let mut out = String::new();
    out.push_str("OPENQASM 2.0;\n");
    out.push_str("include \"qelib1.inc\";\n");
    let _ = writeln!(out, "qreg q[{}];", circuit.n);
    let _ = writeln!(out, "creg c[{}];", circuit.n);
    for gate in &circuit.gates {
        match *gate {
            Gate::H(q) => {
                let _ = writeln!(out, "h q[{q}];");
            }
            Gate::Rz { q, theta } => {
                let _ = writeln!(out, "rz({theta:.16e}) q[{q}];");
            }
            Gate::Rx { q, theta } => {
                let _ = writeln!(out, "rx({theta:.16e}) q[{q}];");
            }
            Gate::Cnot { control, target } => {
                let _ = writeln!(out, "cx q[{control}],q[{target}];");
            }
        }
    }
    out.push_str("measure q -> c;\n");
    out
}

/// Write [`export_circuit_text`] to a file.
pub fn export_circuit_file(circuit: &Circuit, path: &std::path::Path) -> Result<()> {
    std::fs::write(path, export_circuit_text(circuit))?;
    Ok(())
}

/// Parse the subset emitted by [`export_circuit_text`] back into a circuit.
pub fn parse_circuit_text(text: &str) -> Result<Circuit> {
    let mut n: Option<usize> = None;
    let mut gates = Vec::new();
    let perr = |line: &str, why: &str| Error::Parse(format!("{why}: '{line}'"));
    for raw in text.lines() {
        let line = raw.trim();
        if line.is_empty()
            || line.starts_with("//")
            || line.starts_with("OPENQASM")
            || line.starts_with("include")
            || line.starts_with("creg")
            || line.starts_with("measure")
        {
            continue;
        }
        let line = line
            .strip_suffix(';')
            .ok_or_else(|| perr(line, "missing semicolon"))?;
        if let Some(rest) = line.strip_prefix("qreg q[") {
            let count = rest
                .strip_suffix(']')
                .ok_or_else(|| perr(line, "bad qreg"))?;
            n = Some(
                count
                    .parse::<usize>()
                    .map_err(|_| perr(line, "bad qreg size"))?,
            );
            continue;
        }
        let parse_q = |tok: &str| -> Result<usize> {
            tok.trim()
                .strip_prefix("q[")
                .and_then(|t| t.strip_suffix(']'))
                .and_then(|t| t.parse::<usize>().ok())
                .ok_or_else(|| perr(tok, "bad qubit reference"))
        };
        if let Some(rest) = line.strip_prefix("h ") {
            gates.push(Gate::H(parse_q(rest)?));
        } else if let Some(rest) = line.strip_prefix("cx ") {
            let mut parts = rest.split(',');
            let c = parse_q(parts.next().ok_or_else(|| perr(line, "cx needs 2 qubits"))?)?;
            let t = parse_q(parts.next().ok_or_else(|| perr(line, "cx needs 2 qubits"))?)?;
            gates.push(Gate::Cnot {
                control: c,
                target: t,
            });
        } else if line.starts_with("rz(") || line.starts_with("rx(") {
            let is_rz = line.starts_with("rz(");
            let rest = &line[3..];
            let close = rest
                .find(')')
                .ok_or_else(|| perr(line, "missing closing paren"))?;
            let theta: f64 = rest[..close]
                .parse()
                .map_err(|_| perr(line, "bad angle"))?;
            let q = parse_q(&rest[close + 1..])?;
            gates.push(if is_rz {
                Gate::Rz { q, theta }
            } else {
                Gate::Rx { q, theta }
            });
        } else {
            return Err(perr(line, "unsupported statement"));
        }
    }
    let n = n.ok_or_else(|| Error::Parse("no qreg declaration".into()))?;
    for g in &gates {
        let ok = match *g {
            Gate::H(q) => q < n,
            Gate::Rz { q, .. } | Gate::Rx { q, .. } => q < n,
            Gate::Cnot { control, target } => control < n && target < n && control != target,
        };
        if !ok {
            return Err(Error::Parse("gate touches qubit outside qreg".into()));
        }
    }
    Ok(Circuit { n, gates })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::generate_instance;

    #[test]
    fn coloring_proper_on_builtins() {
        for name in CouplingMap::builtin_names() {
            let map = CouplingMap::builtin(name).unwrap();
            let colors = three_edge_coloring(&map).unwrap();
            let mut seen = vec![[false; 3]; map.n];
            for (e, &(a, b)) in map.edges.iter().enumerate() {
                let c = colors[e] as usize;
                assert!(!seen[a][c] && !seen[b][c], "{name} edge {e}");
                seen[a][c] = true;
                seen[b][c] = true;
            }
        }
    }

    #[test]
    fn depth_six_per_round_on_builtins() {
        for name in CouplingMap::builtin_names() {
            let map = CouplingMap::builtin(name).unwrap();
            let inst = generate_instance(&map, 11).unwrap();
            for p in [1usize, 3] {
                let angles = Angles::new(vec![0.1; p], vec![0.2; p]).unwrap();
                let circ = build_qaoa_circuit(&inst, &angles).unwrap();
                let stats = circuit_depth_stats(&circ);
                assert_eq!(stats.cnot_count, 2 * map.edges.len() * p, "{name} p={p}");
                assert_eq!(stats.cnot_depth, 6 * p, "{name} p={p}");
            }
        }
    }

    #[test]
    fn qasm_round_trip() {
        let map = CouplingMap::builtin("guadalupe-16").unwrap();
        let inst = generate_instance(&map, 1).unwrap();
        let angles = Angles::new(vec![0.123456789012345], vec![5.98765432109876]).unwrap();
        let circ = build_qaoa_circuit(&inst, &angles).unwrap();
        let text = export_circuit_text(&circ);
        let back = parse_circuit_text(&text).unwrap();
        assert_eq!(back, circ);
    }
}
