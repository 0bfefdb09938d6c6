//! Clean, definite and indefinite reachability, and the layered
//! decomposition of the substate space used for decoupling in iteration.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::Serialize;

use crate::candidates::ControlCandidateSets;
use crate::dynamics::FeedbackLaw;
use crate::error::{Error, Result};
use crate::graph::{self, Adjacency};
use crate::network::BooleanControlNetwork;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ReachKind {
    /// Edge when some input moves `a` to `b` with certainty.
    Definite,
    /// Edge when some input may move `a` to `b`.
    Indefinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum VertexMode {
    Substates,
    OutputSets,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    /// Enabling inputs.
    pub inputs: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReachabilityGraph {
    pub kind: ReachKind,
    pub mode: VertexMode,
    pub vertices: usize,
    /// Sorted by `(from, to)`.
    pub edges: Vec<Edge>,
}

impl ReachabilityGraph {
    pub fn edge(&self, from: usize, to: usize) -> Option<&Edge> {
        self.edges.binary_search_by(|e| (e.from, e.to).cmp(&(from, to))).ok().map(|i| &self.edges[i])
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.edge(from, to).is_some()
    }

    pub fn adjacency(&self) -> Adjacency {
        let mut adj = vec![Vec::new(); self.vertices + 1];
        for e in &self.edges {
            adj[e.from].push(e.to);
        }
        adj
    }

    pub fn label(&self, v: usize) -> String {
        match self.mode {
            VertexMode::Substates => format!("X_{v}"),
            VertexMode::OutputSets => format!("O_S{v}"),
        }
    }

    pub fn to_dot(&self) -> String {
        let kind = match self.kind {
            ReachKind::Definite => "definite",
            ReachKind::Indefinite => "indefinite",
        };
        let mut out = format!("digraph {kind} {{\n  label=\"{kind} reachability\";\n  reachability=\"{kind}\";\n");
        for v in 1..=self.vertices {
            let _ = writeln!(out, "  \"{}\";", self.label(v));
        }
        for e in &self.edges {
            let inputs: Vec<String> = e.inputs.iter().map(usize::to_string).collect();
            let _ = writeln!(
                out,
                "  \"{}\" -> \"{}\" [label=\"{}\"];",
                self.label(e.from),
                self.label(e.to),
                inputs.join(",")
            );
        }
        out.push_str("}\n");
        out
    }
}

/// Inputs under which substate `b` moves to substate `a` with certainty.
pub fn clean_reach(net: &BooleanControlNetwork, b: usize, a: usize) -> Result<BTreeSet<usize>> {
    check(net, a)?;
    let mut out = BTreeSet::new();
    for i in 1..=net.input_count() {
        let succ = net.subsystem_successors(b, i)?;
        if succ.len() == 1 && succ.contains(&a) {
            out.insert(i);
        }
    }
    Ok(out)
}

/// Inputs under which every successor of substate `b` has output `output`.
pub fn clean_reach_output(net: &BooleanControlNetwork, b: usize, output: usize) -> Result<BTreeSet<usize>> {
    if output == 0 || output > net.output_count() {
        return Err(Error::IndexOutOfRange { what: "output", index: output, bound: net.output_count() });
    }
    let mut out = BTreeSet::new();
    for i in 1..=net.input_count() {
        if net.subsystem_successors(b, i)?.iter().all(|&k| net.output_of_substate(k) == output) {
            out.insert(i);
        }
    }
    Ok(out)
}

fn check(net: &BooleanControlNetwork, k: usize) -> Result<()> {
    if k == 0 || k > net.substate_count() {
        return Err(Error::IndexOutOfRange { what: "substate", index: k, bound: net.substate_count() });
    }
    Ok(())
}

pub fn build_reachability_graph(net: &BooleanControlNetwork, kind: ReachKind, mode: VertexMode) -> ReachabilityGraph {
    let table = net.successor_table();
    let mut edges: BTreeMap<(usize, usize), BTreeSet<usize>> = BTreeMap::new();
    let vertices = match mode {
        VertexMode::Substates => {
            for (a, row) in table.iter().enumerate() {
                for (i, succ) in row.iter().enumerate() {
                    let targets: Vec<usize> = match kind {
                        ReachKind::Definite if succ.len() == 1 => succ.iter().copied().collect(),
                        ReachKind::Definite => Vec::new(),
                        ReachKind::Indefinite => succ.iter().copied().collect(),
                    };
                    for b in targets {
                        edges.entry((a + 1, b)).or_default().insert(i + 1);
                    }
                }
            }
            net.substate_count()
        }
        VertexMode::OutputSets => {
            let groups = net.substate_output_sets();
            for (si, members) in groups.sets.iter().enumerate() {
                if members.is_empty() {
                    continue;
                }
                for sj in 1..=groups.len() {
                    let enters = |succ: &BTreeSet<usize>| {
                        let mut outs = succ.iter().map(|&k| net.output_of_substate(k));
                        match kind {
                            ReachKind::Definite => outs.all(|o| o == sj),
                            ReachKind::Indefinite => outs.any(|o| o == sj),
                        }
                    };
                    let mut labels = BTreeSet::new();
                    let mut every = true;
                    for &k in members {
                        let ok: Vec<usize> =
                            (1..=net.input_count()).filter(|&i| enters(&table[k - 1][i - 1])).collect();
                        every &= !ok.is_empty();
                        labels.extend(ok);
                    }
                    if every {
                        edges.insert((si + 1, sj), labels);
                    }
                }
            }
            groups.len()
        }
    };
    let edges =
        edges.into_iter().map(|((from, to), inputs)| Edge { from, to, inputs: inputs.into_iter().collect() }).collect();
    ReachabilityGraph { kind, mode, vertices, edges }
}

/// Shortest nonempty path `from → … → to`; `from == to` needs a cycle.
pub fn reach_query(g: &ReachabilityGraph, from: usize, to: usize) -> Result<Option<Vec<usize>>> {
    for v in [from, to] {
        if v == 0 || v > g.vertices {
            return Err(Error::IndexOutOfRange { what: "vertex", index: v, bound: g.vertices });
        }
    }
    Ok(graph::shortest_path(&g.adjacency(), from, to))
}

/// Layers `S_1, S_2, …` of the substate space.
///
/// `S_1` holds the substates lying on cycles of the definite graph, i.e.
/// those that can be kept on a disturbance-independent closed walk. `S_l`
/// holds the remaining substates with an input sending every successor
/// into `S_1 ∪ … ∪ S_{l-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DecompositionLayers {
    pub layers: Vec<Vec<usize>>,
    pub remainder: Vec<usize>,
    /// Substate → inputs keeping it on its way to (or inside) `S_1`.
    pub witness: BTreeMap<usize, Vec<usize>>,
}

impl DecompositionLayers {
    /// 1-based layer of substate `k`.
    pub fn layer_of(&self, k: usize) -> Option<usize> {
        self.layers.iter().position(|l| l.contains(&k)).map(|p| p + 1)
    }

    pub fn is_complete(&self) -> bool {
        self.remainder.is_empty()
    }

    fn up_to(&self, layer: usize) -> BTreeSet<usize> {
        self.layers[..layer].iter().flatten().copied().collect()
    }
}

pub fn invariant_set_decomposition(net: &BooleanControlNetwork) -> DecompositionLayers {
    let table = net.successor_table();
    let count = net.substate_count();
    let mut definite: Adjacency = vec![Vec::new(); count + 1];
    for (a, row) in table.iter().enumerate() {
        for succ in row {
            if succ.len() == 1 {
                definite[a + 1].extend(succ.iter().copied());
            }
        }
    }
    let cyc = graph::on_cycle(&definite);
    let first: Vec<usize> = (1..=count).filter(|&k| cyc[k]).collect();

    let mut witness = BTreeMap::new();
    let mut placed: BTreeSet<usize> = first.iter().copied().collect();
    for &k in &first {
        let ok = (1..=net.input_count())
            .filter(|&i| {
                let s = &table[k - 1][i - 1];
                s.len() == 1 && s.is_subset(&placed)
            })
            .collect();
        witness.insert(k, ok);
    }
    let mut layers = Vec::new();
    if !first.is_empty() {
        layers.push(first);
    }
    loop {
        let mut next = Vec::new();
        for k in (1..=count).filter(|k| !placed.contains(k)) {
            let ok: Vec<usize> = (1..=net.input_count()).filter(|&i| table[k - 1][i - 1].is_subset(&placed)).collect();
            if !ok.is_empty() {
                next.push(k);
                witness.insert(k, ok);
            }
        }
        if next.is_empty() {
            break;
        }
        placed.extend(next.iter().copied());
        layers.push(next);
    }
    let remainder = (1..=count).filter(|k| !placed.contains(k)).collect();
    DecompositionLayers { layers, remainder, witness }
}

fn require_complete(layers: &DecompositionLayers) -> Result<()> {
    if layers.is_complete() {
        Ok(())
    } else {
        Err(Error::Unclassifiable(layers.remainder.clone()))
    }
}

/// Candidate inputs per substate for decoupling in iteration.
///
/// In `S_1` an input qualifies when its sub-block has rank one (a single
/// successor); in later layers when every successor lies in an earlier
/// layer. Each full state picks independently, so
/// `N_tc = Π |C_k|^{2^{n-s}}`.
pub fn decomposition_controllers(
    net: &BooleanControlNetwork,
    layers: &DecompositionLayers,
) -> Result<ControlCandidateSets> {
    require_complete(layers)?;
    let table = net.successor_table();
    let sets = (1..=net.substate_count())
        .map(|k| {
            let layer = layers.layer_of(k).expect("decomposition is complete");
            let earlier = layers.up_to(layer - 1);
            (1..=net.input_count())
                .filter(|&i| {
                    let s = &table[k - 1][i - 1];
                    if layer == 1 {
                        s.len() == 1
                    } else {
                        s.is_subset(&earlier)
                    }
                })
                .collect()
        })
        .collect();
    Ok(ControlCandidateSets::per_substate(net, sets, false))
}

/// As [`decomposition_controllers`], but inputs in `S_1` must also keep the
/// successor inside `S_1`. Every controller drawn from these sets reaches
/// `S_1` within the layer count and never leaves it.
///
/// All completions of a substate share one input: two inputs with
/// different singleton successors would let the unobserved completion
/// split the next output.
pub fn invariant_controllers(
    net: &BooleanControlNetwork,
    layers: &DecompositionLayers,
) -> Result<ControlCandidateSets> {
    require_complete(layers)?;
    let sets = (1..=net.substate_count()).map(|k| layers.witness[&k].clone()).collect();
    Ok(ControlCandidateSets::per_substate(net, sets, true))
}

/// Edges `(a, b)` between layers: every member of `S_a` has an input whose
/// successors lie in `S_1 ∪ … ∪ S_b` and meet `S_b`. Only `b < a` and the
/// `S_1` self-loop are reported.
pub fn layer_digraph(net: &BooleanControlNetwork, layers: &DecompositionLayers) -> Vec<(usize, usize)> {
    let table = net.successor_table();
    let mut edges = Vec::new();
    for a in 1..=layers.layers.len() {
        for b in 1..=a {
            if b == a && a != 1 {
                continue;
            }
            let within = layers.up_to(b);
            let target: BTreeSet<usize> = layers.layers[b - 1].iter().copied().collect();
            let all = layers.layers[a - 1]
                .iter()
                .all(|&k| table[k - 1].iter().any(|s| s.is_subset(&within) && !s.is_disjoint(&target)));
            if all {
                edges.push((a, b));
            }
        }
    }
    edges
}

pub fn layers_to_dot(layers: &DecompositionLayers, edges: &[(usize, usize)]) -> String {
    let mut out = String::from("digraph layers {\n  label=\"invariant-set layers\";\n");
    for (i, l) in layers.layers.iter().enumerate() {
        let members: Vec<String> = l.iter().map(|k| format!("X_{k}")).collect();
        let _ = writeln!(out, "  \"S_{}\" [members=\"{}\"];", i + 1, members.join(","));
    }
    for &(a, b) in edges {
        let _ = writeln!(out, "  \"S_{a}\" -> \"S_{b}\";");
    }
    out.push_str("}\n");
    out
}

/// Full states the closed loop can reach in one step from `states`, over
/// every disturbance and fault value. When `L` only gives the substate, all
/// completions of the successor are included.
pub fn closed_loop_post(net: &BooleanControlNetwork, law: &FeedbackLaw, states: &BTreeSet<usize>) -> BTreeSet<usize> {
    let mut out = BTreeSet::new();
    for &x in states {
        let u = law.input_at(net, x);
        for tail in 1..=net.tail_count() {
            out.extend(net.states_of_row(net.next(u, x, tail)));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::apply_state_feedback;
    use crate::fixtures;
    use crate::network::{Dims, SignalOrder};
    use crate::stp::LogicalMatrix;
    use proptest::prelude::*;

    fn set(v: &[usize]) -> BTreeSet<usize> {
        v.iter().copied().collect()
    }

    #[test]
    fn two_output_clean_reach() {
        let net = fixtures::two_output_reach();
        for k in 1..=4 {
            assert_eq!(clean_reach_output(&net, k, 1).unwrap(), set(&[1]), "X_{k}");
            assert!(clean_reach_output(&net, k, 2).unwrap().is_empty(), "X_{k}");
        }
        assert!(clean_reach_output(&net, 1, 3).is_err());
        assert!(clean_reach(&net, 5, 1).is_err());
    }

    #[test]
    fn two_output_graphs() {
        let net = fixtures::two_output_reach();
        let g = build_reachability_graph(&net, ReachKind::Definite, VertexMode::OutputSets);
        assert!(g.has_edge(2, 1));
        assert!(g.has_edge(1, 1));
        assert!(!g.has_edge(2, 2));
        assert!(!g.has_edge(1, 2));
        assert!(reach_query(&g, 2, 1).unwrap().is_some());
        assert_eq!(reach_query(&g, 1, 2).unwrap(), None);
        assert_eq!(reach_query(&g, 1, 1).unwrap(), Some(vec![1, 1]));
        assert_eq!(reach_query(&g, 2, 2).unwrap(), None);

        let ind = build_reachability_graph(&net, ReachKind::Indefinite, VertexMode::OutputSets);
        for (a, b) in [(1, 2), (2, 1)] {
            assert!(reach_query(&ind, a, b).unwrap().is_some());
        }
        let dot = g.to_dot();
        assert!(dot.contains("\"O_S2\" -> \"O_S1\""));
        assert!(dot.contains("\"O_S1\" -> \"O_S1\""));
        assert!(!dot.contains("\"O_S1\" -> \"O_S2\""));
    }

    #[test]
    fn identity_dynamics_has_only_self_loops() {
        let net = BooleanControlNetwork::control(2, 0, LogicalMatrix::identity(4), None).unwrap();
        let g = build_reachability_graph(&net, ReachKind::Definite, VertexMode::Substates);
        assert_eq!(g.edges.len(), 4);
        assert!(g.edges.iter().all(|e| e.from == e.to));
        assert!(g.to_dot().contains("\"X_3\" -> \"X_3\""));
    }

    #[test]
    fn deterministic_clean_reach_is_block_membership() {
        let cols = [3, 4, 3, 4, 1, 1, 2, 2];
        let net = BooleanControlNetwork::control(2, 1, LogicalMatrix::delta(4, &cols), None).unwrap();
        for b in 1..=4 {
            for a in 1..=4 {
                let want = cols[b - 1] == a || cols[b + 3] == a;
                assert_eq!(!clean_reach(&net, b, a).unwrap().is_empty(), want);
            }
        }
    }

    #[test]
    fn two_layer_decomposition() {
        let net = fixtures::two_layer();
        let d = invariant_set_decomposition(&net);
        assert_eq!(d.layers, vec![vec![3, 4], vec![1, 2]]);
        assert!(d.remainder.is_empty());
        let c = decomposition_controllers(&net, &d).unwrap();
        assert_eq!(c.sets, vec![vec![2], vec![1], vec![2], vec![1]]);
        assert_eq!(c.sample().unwrap(), LogicalMatrix::delta(2, &[2, 1, 2, 1]));
        assert_eq!(layer_digraph(&net, &d), vec![(1, 1), (2, 1)]);
        let dot = layers_to_dot(&d, &layer_digraph(&net, &d));
        assert!(dot.contains("\"S_2\" -> \"S_1\""));
        assert!(dot.contains("\"S_1\" -> \"S_1\""));
    }

    #[test]
    fn three_layer_decomposition() {
        let net = fixtures::three_layer();
        let d = invariant_set_decomposition(&net);
        assert_eq!(d.layers, vec![vec![3], vec![1, 2], vec![4]]);
        let c = decomposition_controllers(&net, &d).unwrap();
        assert_eq!(c.sets, vec![vec![1], vec![2], vec![2], vec![1]]);
        assert_eq!(c.sample().unwrap(), LogicalMatrix::delta(2, &[1, 2, 2, 1]));
        let edges = layer_digraph(&net, &d);
        assert!(edges.contains(&(3, 2)) && edges.contains(&(2, 1)) && edges.contains(&(1, 1)));
    }

    #[test]
    fn partial_two_layer_decomposition() {
        let net = fixtures::partial_two_layer();
        let d = invariant_set_decomposition(&net);
        assert_eq!(d.layers, vec![vec![2, 3, 4], vec![1]]);
        let c = decomposition_controllers(&net, &d).unwrap();
        assert_eq!(c.sets, vec![vec![2, 4], vec![2, 4], vec![1, 2], vec![1, 2, 3, 4]]);
        assert_eq!(c.controller_count().to_string(), "1024");
        let strict = invariant_controllers(&net, &d).unwrap();
        assert_eq!(strict.sets, vec![vec![2, 4], vec![2, 4], vec![1], vec![1, 2, 3, 4]]);
        assert_eq!(strict.sample().unwrap(), LogicalMatrix::delta(4, &[2, 2, 2, 2, 1, 1, 1, 1]));
        assert_eq!(strict.controller_count().to_string(), "16");
        for s in &strict.sets {
            assert!(s.iter().all(|i| c.sets.iter().any(|cs| cs.contains(i))));
        }
    }

    #[test]
    fn unclassifiable_remainder() {
        // Substate 1 always splits between 1 and 2, substate 2 between 2 and 1.
        let l = LogicalMatrix::delta(2, &[1, 2, 2, 1]);
        let net =
            BooleanControlNetwork::new(Dims::new(1, 0).with_disturbance(1), SignalOrder::default(), l, None).unwrap();
        let d = invariant_set_decomposition(&net);
        assert!(d.layers.is_empty());
        assert_eq!(d.remainder, vec![1, 2]);
        assert_eq!(decomposition_controllers(&net, &d), Err(Error::Unclassifiable(vec![1, 2])));
    }

    /// Union of all sets `W` in which every member lies on a cycle of certain
    /// transitions inside `W`; brute force over subsets.
    fn largest_recurrent_set(net: &BooleanControlNetwork) -> BTreeSet<usize> {
        let table = net.successor_table();
        let count = net.substate_count();
        let mut best = BTreeSet::new();
        for mask in 0u32..(1 << count) {
            let w: BTreeSet<usize> = (1..=count).filter(|k| mask & (1 << (k - 1)) != 0).collect();
            let mut adj: Adjacency = vec![Vec::new(); count + 1];
            for &k in &w {
                for s in &table[k - 1] {
                    if s.len() == 1 && s.is_subset(&w) {
                        adj[k].extend(s.iter().copied());
                    }
                }
            }
            let cyc = graph::on_cycle(&adj);
            if w.iter().all(|&k| cyc[k]) {
                best.extend(w);
            }
        }
        best
    }

    fn random_net(n: usize, m: usize, d: usize, seed: u64) -> BooleanControlNetwork {
        fixtures::random_network(Dims::new(n, m).with_disturbance(d), seed)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn first_layer_is_the_largest_recurrent_set(n in 1usize..=3, m in 0usize..=2, d in 0usize..=2, seed in any::<u64>()) {
            let net = random_net(n, m, d, seed);
            let layers = invariant_set_decomposition(&net);
            let first: BTreeSet<usize> = layers.layers.first().map(|l| l.iter().copied().collect()).unwrap_or_default();
            prop_assert_eq!(first, largest_recurrent_set(&net));
        }

        #[test]
        fn layers_are_sound(n in 1usize..=3, m in 0usize..=2, d in 0usize..=2, seed in any::<u64>()) {
            let net = random_net(n, m, d, seed);
            let layers = invariant_set_decomposition(&net);
            let Ok(sets) = invariant_controllers(&net, &layers) else { return Ok(()); };
            let first: BTreeSet<usize> = layers.layers[0].iter().copied().collect();
            for m in sets.iter().take(64) {
                let law = FeedbackLaw::state(m);
                for x0 in 1..=net.state_count() {
                    let mut reach = set(&[x0]);
                    for _ in 0..layers.layers.len() - 1 {
                        reach = closed_loop_post(&net, &law, &reach);
                    }
                    for _ in 0..4 {
                        prop_assert!(reach.is_subset(&first), "x0 = {x0}: {reach:?}");
                        reach = closed_loop_post(&net, &law, &reach);
                    }
                }
            }
        }

        #[test]
        fn graph_consistency(n in 1usize..=3, m in 0usize..=2, d in 0usize..=2, seed in any::<u64>()) {
            let net = random_net(n, m, d, seed);
            let def = build_reachability_graph(&net, ReachKind::Definite, VertexMode::Substates);
            let ind = build_reachability_graph(&net, ReachKind::Indefinite, VertexMode::Substates);
            for e in &def.edges {
                prop_assert!(ind.has_edge(e.from, e.to));
                for &i in &e.inputs {
                    prop_assert_eq!(net.subsystem_successors(e.from, i).unwrap(), set(&[e.to]));
                }
            }
            for e in &ind.edges {
                for &i in &e.inputs {
                    prop_assert!(net.subsystem_successors(e.from, i).unwrap().contains(&e.to));
                }
            }
            for b in 1..=net.substate_count() {
                for a in 1..=net.substate_count() {
                    prop_assert_eq!(!clean_reach(&net, b, a).unwrap().is_empty(), def.has_edge(b, a));
                }
            }
            let defo = build_reachability_graph(&net, ReachKind::Definite, VertexMode::OutputSets);
            let indo = build_reachability_graph(&net, ReachKind::Indefinite, VertexMode::OutputSets);
            for e in &defo.edges {
                prop_assert!(indo.has_edge(e.from, e.to));
            }
        }

        #[test]
        fn every_layer_has_a_path_to_the_first(n in 1usize..=3, m in 0usize..=2, d in 0usize..=2, seed in any::<u64>()) {
            let net = random_net(n, m, d, seed);
            let layers = invariant_set_decomposition(&net);
            if !layers.is_complete() || layers.layers.is_empty() {
                return Ok(());
            }
            let edges = layer_digraph(&net, &layers);
            let k = layers.layers.len();
            for a in 2..=k {
                prop_assert!(edges.contains(&(a, a - 1)));
            }
            prop_assert!(edges.contains(&(1, 1)));
        }
    }

    #[test]
    fn closed_loop_post_matches_the_closed_loop_matrix() {
        let net = fixtures::two_layer();
        let law = FeedbackLaw::state(LogicalMatrix::delta(2, &[2, 1, 2, 1]));
        let lt = apply_state_feedback(&net, &law).unwrap();
        assert_eq!(lt, LogicalMatrix::delta(4, &[3, 4, 3, 4, 4, 4, 3, 3]));
        assert_eq!(closed_loop_post(&net, &law, &set(&[1, 2])), set(&[3, 4]));
        assert_eq!(closed_loop_post(&net, &law, &set(&[3, 4])), set(&[3, 4]));
    }
}
