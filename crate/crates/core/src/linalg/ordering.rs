//! Fill-reducing ordering by recursive graph bisection on BFS level sets.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

const LEAF_SIZE: usize = 32;

/// Nested-dissection permutation of a graph given by adjacency lists.
///
/// Returns `perm` with `perm[new] = old`.
pub fn nested_dissection(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut out = Vec::with_capacity(n);
    let mut ctx = Ctx { adj, tag: vec![0; n], next_tag: 1, level: vec![usize::MAX; n] };
    let all: Vec<usize> = (0..n).collect();
    ctx.dissect(all, &mut out);
    debug_assert_eq!(out.len(), n);
    out
}

struct Ctx<'a> {
    adj: &'a [Vec<usize>],
    tag: Vec<usize>,
    next_tag: usize,
    level: Vec<usize>,
}

impl Ctx<'_> {
    fn fresh(&mut self, nodes: &[usize]) -> usize {
        let t = self.next_tag;
        self.next_tag += 1;
        for &v in nodes {
            self.tag[v] = t;
        }
        t
    }

    /// BFS restricted to nodes carrying `tag`; returns visit order and sets levels.
    fn bfs(&mut self, start: usize, tag: usize) -> Vec<usize> {
        let mut order = vec![start];
        let mut queue = VecDeque::from([start]);
        let visit = self.next_tag;
        self.next_tag += 1;
        // Visited nodes are temporarily retagged and restored afterwards.
        self.tag[start] = visit;
        self.level[start] = 0;
        while let Some(u) = queue.pop_front() {
            for &w in &self.adj[u] {
                if self.tag[w] == tag {
                    self.tag[w] = visit;
                    self.level[w] = self.level[u] + 1;
                    order.push(w);
                    queue.push_back(w);
                }
            }
        }
        for &v in &order {
            self.tag[v] = tag;
        }
        order
    }

    fn dissect(&mut self, nodes: Vec<usize>, out: &mut Vec<usize>) {
        if nodes.len() <= LEAF_SIZE {
            out.extend(nodes);
            return;
        }
        let tag = self.fresh(&nodes);
        // Pseudo-peripheral start: restart from the last node reached a few times.
        let mut order = self.bfs(nodes[0], tag);
        for _ in 0..3 {
            let far = *order.last().unwrap();
            let depth = self.level[far];
            let next = self.bfs(far, tag);
            let reached = self.level[*next.last().unwrap()];
            order = next;
            if reached <= depth {
                break;
            }
        }
        if order.len() < nodes.len() {
            // Disconnected: split off the reached component.
            let reached_tag = self.fresh(&order);
            let rest: Vec<usize> = nodes.iter().copied().filter(|&v| self.tag[v] != reached_tag).collect();
            self.dissect(order, out);
            self.dissect(rest, out);
            return;
        }
        let depth = self.level[*order.last().unwrap()];
        if depth < 2 {
            out.extend(nodes);
            return;
        }
        // Middle level by node count.
        let mut counts = vec![0usize; depth + 1];
        for &v in &order {
            counts[self.level[v]] += 1;
        }
        let half = order.len() / 2;
        let mut acc = 0;
        let mut mid = 1;
        for (l, &c) in counts.iter().enumerate() {
            acc += c;
            if acc >= half {
                mid = l.clamp(1, depth - 1);
                break;
            }
        }
        let mut a = Vec::new();
        let mut b = Vec::new();
        let mut sep = Vec::new();
        for &v in &order {
            let l = self.level[v];
            if l < mid {
                a.push(v);
            } else if l > mid {
                b.push(v);
            } else if self.adj[v].iter().any(|&w| self.tag[w] == tag && self.level[w] == mid + 1) {
                sep.push(v);
            } else {
                a.push(v);
            }
        }
        self.dissect(a, out);
        self.dissect(b, out);
        out.extend(sep);
    }
}
