//! Directed-graph helpers over vertices `1..=n`.

use std::collections::VecDeque;

/// Adjacency lists, `adj[v]` for `v` in `1..=n`; index 0 unused.
pub type Adjacency = Vec<Vec<usize>>;

/// Strongly connected component id per vertex (Tarjan, iterative).
pub fn scc(adj: &Adjacency) -> Vec<usize> {
    let n = adj.len() - 1;
    let mut index = vec![usize::MAX; n + 1];
    let mut low = vec![0; n + 1];
    let mut on_stack = vec![false; n + 1];
    let mut comp = vec![usize::MAX; n + 1];
    let mut stack = Vec::new();
    let mut next_index = 0;
    let mut next_comp = 0;
    for root in 1..=n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut work = vec![(root, 0usize)];
        while let Some(&mut (v, ref mut i)) = work.last_mut() {
            if *i == 0 {
                index[v] = next_index;
                low[v] = next_index;
                next_index += 1;
                stack.push(v);
                on_stack[v] = true;
            }
            if *i < adj[v].len() {
                let w = adj[v][*i];
                *i += 1;
                if index[w] == usize::MAX {
                    work.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            work.pop();
            if let Some(&(parent, _)) = work.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                loop {
                    let w = stack.pop().expect("stack holds the component");
                    on_stack[w] = false;
                    comp[w] = next_comp;
                    if w == v {
                        break;
                    }
                }
                next_comp += 1;
            }
        }
    }
    comp
}

/// Whether each vertex lies on a directed cycle.
pub fn on_cycle(adj: &Adjacency) -> Vec<bool> {
    let comp = scc(adj);
    let n = adj.len() - 1;
    let mut size = vec![0usize; n + 1];
    for v in 1..=n {
        size[comp[v]] += 1;
    }
    let mut out = vec![false; n + 1];
    for v in 1..=n {
        out[v] = size[comp[v]] > 1 || adj[v].contains(&v);
    }
    out
}

/// Shortest nonempty path `from → … → to`, exploring neighbours in
/// ascending order. `from == to` asks for a cycle through `from`.
pub fn shortest_path(adj: &Adjacency, from: usize, to: usize) -> Option<Vec<usize>> {
    let n = adj.len() - 1;
    let mut parent = vec![0usize; n + 1];
    let mut seen = vec![false; n + 1];
    let mut queue = VecDeque::new();
    let sorted = |v: usize| {
        let mut s = adj[v].clone();
        s.sort_unstable();
        s.dedup();
        s
    };
    for w in sorted(from) {
        if !seen[w] {
            seen[w] = true;
            parent[w] = from;
            queue.push_back(w);
        }
    }
    while let Some(v) = queue.pop_front() {
        if v == to {
            let mut path = vec![to];
            let mut cur = to;
            loop {
                cur = parent[cur];
                path.push(cur);
                if cur == from {
                    break;
                }
            }
            path.reverse();
            return Some(path);
        }
        for w in sorted(v) {
            if !seen[w] {
                seen[w] = true;
                parent[w] = v;
                queue.push_back(w);
            }
        }
    }
    None
}

/// Vertices reachable from `starts` (including them).
pub fn reachable(adj: &Adjacency, starts: impl IntoIterator<Item = usize>) -> Vec<bool> {
    let mut seen = vec![false; adj.len()];
    let mut stack: Vec<usize> = starts.into_iter().collect();
    for &s in &stack {
        seen[s] = true;
    }
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen
}
