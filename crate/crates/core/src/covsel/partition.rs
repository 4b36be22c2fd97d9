//! Greedy graph partitioning of the variables into column blocks.

use std::collections::VecDeque;

/// Disjoint blocks covering `0..n`, each sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockPlan {
    pub blocks: Vec<Vec<usize>>,
    pub target: usize,
}

impl BlockPlan {
    /// Block index of every variable.
    pub fn labels(&self, n: usize) -> Vec<usize> {
        let mut label = vec![0; n];
        for (b, block) in self.blocks.iter().enumerate() {
            for &v in block {
                label[v] = b;
            }
        }
        label
    }

    /// Number of edges joining different blocks.
    pub fn cut_edges(&self, n: usize, edges: &[(usize, usize)]) -> usize {
        let label = self.labels(n);
        edges.iter().filter(|&&(i, j)| i != j && label[i] != label[j]).count()
    }
}

pub(crate) fn adjacency(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    for &(i, j) in edges {
        if i != j {
            adj[i].push(j);
            adj[j].push(i);
        }
    }
    for a in adj.iter_mut() {
        a.sort_unstable();
        a.dedup();
    }
    adj
}

/// Connected components, each in breadth-first order from its lowest vertex,
/// over the vertices marked `inside`.
fn components(adj: &[Vec<usize>], vertices: &[usize], inside: &[bool]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; adj.len()];
    let mut out = Vec::new();
    for &s in vertices {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut comp = vec![s];
        let mut head = 0;
        while head < comp.len() {
            let v = comp[head];
            head += 1;
            for &u in &adj[v] {
                if inside[u] && !seen[u] {
                    seen[u] = true;
                    comp.push(u);
                }
            }
        }
        out.push(comp);
    }
    out
}

/// Splits `0..n` into blocks of at most `2 * target` variables with few
/// edges between blocks.
///
/// Connected components no larger than `target` are packed first-fit; larger
/// ones are cut into breadth-first aggregates of `target` vertices grown from
/// the lowest unassigned vertex. A refinement pass then moves a vertex to
/// the neighboring block holding most of its edges when that strictly
/// reduces the cut and the receiving block stays within `2 * target`.
pub fn partition_columns(n: usize, edges: &[(usize, usize)], target: usize) -> BlockPlan {
    let target = target.max(1);
    let adj = adjacency(n, edges);
    let all: Vec<usize> = (0..n).collect();
    let inside = vec![true; n];
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut open: Vec<usize> = Vec::new();
    for comp in components(&adj, &all, &inside) {
        if comp.len() <= target {
            match open.iter().find(|&&b| blocks[b].len() + comp.len() <= target) {
                Some(&b) => blocks[b].extend(comp),
                None => {
                    open.push(blocks.len());
                    blocks.push(comp);
                }
            }
        } else {
            blocks.extend(grow_aggregates(&adj, comp, target));
        }
    }

    let mut label = vec![0; n];
    for (b, block) in blocks.iter().enumerate() {
        for &v in block {
            label[v] = b;
        }
    }
    let mut size: Vec<usize> = blocks.iter().map(Vec::len).collect();
    let mut count = vec![0usize; blocks.len()];
    for v in 0..n {
        let own = label[v];
        for &u in &adj[v] {
            count[label[u]] += 1;
        }
        let mut best: Option<usize> = None;
        for &u in &adj[v] {
            let b = label[u];
            if b != own && best.is_none_or(|c| count[b] > count[c] || (count[b] == count[c] && b < c)) {
                best = Some(b);
            }
        }
        if let Some(b) = best {
            if count[b] > count[own] && size[b] < 2 * target && size[own] > 1 {
                size[own] -= 1;
                size[b] += 1;
                label[v] = b;
            }
        }
        for &u in &adj[v] {
            count[label[u]] = 0;
        }
    }
    let mut out = vec![Vec::new(); blocks.len()];
    for v in 0..n {
        out[label[v]].push(v);
    }
    out.retain(|b| !b.is_empty());
    BlockPlan { blocks: out, target }
}

fn grow_aggregates(adj: &[Vec<usize>], comp: Vec<usize>, target: usize) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut in_comp = vec![false; n];
    for &v in &comp {
        in_comp[v] = true;
    }
    let mut order = comp;
    order.sort_unstable();
    let mut assigned = vec![false; n];
    let mut out = Vec::new();
    let mut next = 0;
    loop {
        while next < order.len() && assigned[order[next]] {
            next += 1;
        }
        if next == order.len() {
            break;
        }
        let mut block = Vec::with_capacity(target);
        let mut queue = VecDeque::new();
        let mut cursor = next;
        while block.len() < target {
            if queue.is_empty() {
                while cursor < order.len() && assigned[order[cursor]] {
                    cursor += 1;
                }
                if cursor == order.len() {
                    break;
                }
                assigned[order[cursor]] = true;
                queue.push_back(order[cursor]);
            }
            let v = queue.pop_front().expect("nonempty");
            block.push(v);
            for &u in &adj[v] {
                if in_comp[u] && !assigned[u] && block.len() + queue.len() < target {
                    assigned[u] = true;
                    queue.push_back(u);
                }
            }
        }
        // vertices queued but not placed are released
        for v in queue {
            assigned[v] = false;
        }
        out.push(block);
    }
    out
}

/// Breadth-first order of `vertices` over the induced subgraph, one
/// component after another (each started from its lowest vertex).
pub(crate) fn bfs_order(adj: &[Vec<usize>], vertices: &[usize]) -> Vec<usize> {
    let mut inside = vec![false; adj.len()];
    for &v in vertices {
        inside[v] = true;
    }
    let mut sorted = vertices.to_vec();
    sorted.sort_unstable();
    components(adj, &sorted, &inside).concat()
}
