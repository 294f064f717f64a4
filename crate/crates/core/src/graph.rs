//! Compressed adjacency lists and strongly connected components.

/// Directed graph in compressed sparse row form.
#[derive(Debug, Clone, Default)]
pub struct Csr {
    offsets: Vec<usize>,
    targets: Vec<u32>,
}

impl Csr {
    /// Builds from an edge list; edges are grouped by source, keeping input order.
    pub fn from_edges(num_nodes: usize, edges: &[(u32, u32)]) -> Self {
        let mut degree = vec![0usize; num_nodes + 1];
        for &(s, _) in edges {
            degree[s as usize + 1] += 1;
        }
        for i in 0..num_nodes {
            degree[i + 1] += degree[i];
        }
        let mut fill = degree.clone();
        let mut targets = vec![0u32; edges.len()];
        for &(s, t) in edges {
            targets[fill[s as usize]] = t;
            fill[s as usize] += 1;
        }
        Csr {
            offsets: degree,
            targets,
        }
    }

    /// Builds from prebuilt offset and target arrays.
    pub fn from_parts(offsets: Vec<usize>, targets: Vec<u32>) -> Self {
        debug_assert_eq!(*offsets.last().unwrap_or(&0), targets.len());
        Csr { offsets, targets }
    }

    pub fn from_adjacency(adj: &[Vec<usize>]) -> Self {
        let mut offsets = Vec::with_capacity(adj.len() + 1);
        let mut targets = Vec::new();
        offsets.push(0);
        for succ in adj {
            targets.extend(succ.iter().map(|&t| t as u32));
            offsets.push(targets.len());
        }
        Csr { offsets, targets }
    }

    pub fn num_nodes(&self) -> usize {
        self.offsets.len().saturating_sub(1)
    }

    pub fn num_edges(&self) -> usize {
        self.targets.len()
    }

    pub fn successors(&self, v: usize) -> &[u32] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    /// Index range of `v`'s outgoing edges in [`Csr::targets`].
    pub fn edge_range(&self, v: usize) -> std::ops::Range<usize> {
        self.offsets[v]..self.offsets[v + 1]
    }

    pub fn targets(&self) -> &[u32] {
        &self.targets
    }

    pub fn reversed(&self) -> Csr {
        let n = self.num_nodes();
        let mut edges = Vec::with_capacity(self.num_edges());
        for v in 0..n {
            for &w in self.successors(v) {
                edges.push((w, v as u32));
            }
        }
        Csr::from_edges(n, &edges)
    }

    /// Nodes reachable from `roots`, as a membership vector.
    pub fn reachable_from(&self, roots: impl IntoIterator<Item = usize>) -> Vec<bool> {
        let mut seen = vec![false; self.num_nodes()];
        let mut stack: Vec<usize> = Vec::new();
        for r in roots {
            if !seen[r] {
                seen[r] = true;
                stack.push(r);
            }
        }
        while let Some(v) = stack.pop() {
            for &w in self.successors(v) {
                let w = w as usize;
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen
    }
}

/// SCC decomposition; `components` is in topological order of the
/// condensation (an SCC appears before every SCC reachable from it).
#[derive(Debug, Clone)]
pub struct Sccs {
    pub component_of: Vec<u32>,
    pub components: Vec<Vec<u32>>,
}

/// Tarjan's algorithm with an explicit call stack.
pub fn tarjan(g: &Csr) -> Sccs {
    const UNVISITED: u32 = u32::MAX;
    let n = g.num_nodes();
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0u32; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<u32> = Vec::new();
    // (node, next edge position)
    let mut call: Vec<(u32, usize)> = Vec::new();
    let mut next_index = 0u32;
    let mut finished: Vec<Vec<u32>> = Vec::new();

    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root as u32);
        on_stack[root] = true;
        call.push((root as u32, g.offsets[root]));

        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            let v = v as usize;
            let end = g.offsets[v + 1];
            if *pos < end {
                let w = g.targets[*pos] as usize;
                *pos += 1;
                if index[w] == UNVISITED {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w as u32);
                    on_stack[w] = true;
                    call.push((w as u32, g.offsets[w]));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                let p = parent as usize;
                low[p] = low[p].min(low[v]);
            }
            if low[v] == index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack underflow");
                    on_stack[w as usize] = false;
                    comp.push(w);
                    if w as usize == v {
                        break;
                    }
                }
                comp.sort_unstable();
                finished.push(comp);
            }
        }
    }

    // Tarjan completes sink components first.
    finished.reverse();
    let mut component_of = vec![0u32; n];
    for (c, comp) in finished.iter().enumerate() {
        for &v in comp {
            component_of[v as usize] = c as u32;
        }
    }
    Sccs {
        component_of,
        components: finished,
    }
}
