//! The intersection graph, its connected components, and the exploration
//! process run on a realized incidence.

use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, RigError};
use crate::genbip::BipartiteIncidence;
use crate::model::AttributeProfile;
use crate::rng::stream;

pub const DEFAULT_WORK_BUDGET: u128 = 1_000_000_000;

/// Graph on the node set with `u ~ v` iff `|W(u) ∩ W(v)| >= s`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntersectionGraph {
    n: usize,
    s: usize,
    adjacency: Vec<Vec<u32>>,
}

impl IntersectionGraph {
    /// Builds from explicit adjacency lists; lists are symmetrized and deduplicated.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in edges {
            for x in [u, v] {
                if x >= n {
                    return Err(RigError::Index { index: x, len: n });
                }
            }
            if u != v {
                adjacency[u].push(v as u32);
                adjacency[v].push(u as u32);
            }
        }
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
        }
        Ok(Self { n, s: 1, adjacency })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.adjacency[v]
    }

    pub fn adjacency(&self) -> &[Vec<u32>] {
        &self.adjacency
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].binary_search(&(v as u32)).is_ok()
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(u, list)| {
            list.iter()
                .map(|&v| v as usize)
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }
}

/// Number of pair operations needed to build the graph: `sum_w |holders(w)|^2`.
pub fn intersection_work(inc: &BipartiteIncidence) -> u128 {
    inc.all_attr_nodes()
        .iter()
        .map(|l| (l.len() as u128) * (l.len() as u128))
        .sum()
}

pub fn build_intersection(inc: &BipartiteIncidence, s: usize) -> Result<IntersectionGraph> {
    build_intersection_with_budget(inc, s, DEFAULT_WORK_BUDGET)
}

/// Builds the adjacency node by node: the neighbors of `u` are gathered from the
/// attribute cliques `u` belongs to. For `s = 1` duplicates are merged away; for
/// `s >= 2` the multiplicity of each neighbor is its overlap count.
pub fn build_intersection_with_budget(
    inc: &BipartiteIncidence,
    s: usize,
    budget: u128,
) -> Result<IntersectionGraph> {
    if s < 1 {
        return Err(RigError::Size(
            "overlap threshold s must be at least 1".into(),
        ));
    }
    let needed = intersection_work(inc);
    if needed > budget {
        return Err(RigError::WorkBudget { needed, budget });
    }
    let adjacency: Vec<Vec<u32>> = (0..inc.n())
        .into_par_iter()
        .map(|u| {
            let mut cand: Vec<u32> = inc
                .node_attrs(u)
                .iter()
                .flat_map(|&w| inc.attr_nodes(w as usize).iter().copied())
                .filter(|&v| v as usize != u)
                .collect();
            cand.sort_unstable();
            if s == 1 {
                cand.dedup();
                return cand;
            }
            let mut out = Vec::new();
            let mut i = 0;
            while i < cand.len() {
                let mut j = i + 1;
                while j < cand.len() && cand[j] == cand[i] {
                    j += 1;
                }
                if j - i >= s {
                    out.push(cand[i]);
                }
                i = j;
            }
            out
        })
        .collect();
    Ok(IntersectionGraph {
        n: inc.n(),
        s,
        adjacency,
    })
}

/// Disjoint-set forest with union by size and path halving.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] as usize != x {
            let p = self.parent[x] as usize;
            self.parent[x] = self.parent[p];
            x = self.parent[x] as usize;
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra as u32;
        self.size[ra] += self.size[rb];
        true
    }

    pub fn component_size(&mut self, x: usize) -> usize {
        let r = self.find(x);
        self.size[r] as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentSummary {
    /// Component sizes, largest first.
    pub sizes: Vec<usize>,
    pub largest_fraction: f64,
    pub second_size: usize,
}

impl ComponentSummary {
    pub fn from_sizes(mut sizes: Vec<usize>) -> Self {
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        let n: usize = sizes.iter().sum();
        let largest = sizes.first().copied().unwrap_or(0);
        Self {
            largest_fraction: if n == 0 {
                0.0
            } else {
                largest as f64 / n as f64
            },
            second_size: sizes.get(1).copied().unwrap_or(0),
            sizes,
        }
    }

    pub fn largest(&self) -> usize {
        self.sizes.first().copied().unwrap_or(0)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("summary serializes")
    }
}

fn union_find_of(g: &IntersectionGraph) -> UnionFind {
    let mut uf = UnionFind::new(g.n);
    for (u, v) in g.edges() {
        uf.union(u, v);
    }
    uf
}

pub fn components(g: &IntersectionGraph) -> ComponentSummary {
    let mut uf = union_find_of(g);
    let mut sizes = Vec::new();
    for v in 0..g.n {
        if uf.find(v) == v {
            sizes.push(uf.component_size(v));
        }
    }
    ComponentSummary::from_sizes(sizes)
}

/// `|C(v)|` for every node `v`.
pub fn component_size_per_node(g: &IntersectionGraph) -> Vec<usize> {
    let mut uf = union_find_of(g);
    (0..g.n).map(|v| uf.component_size(v)).collect()
}

/// Time series recorded by an exploration (faithful or surrogate).
///
/// Indexing: `y[t] = Y_t` for `t = 0..=T`; `z[t-1] = Z_t` for `t = 1..=T`;
/// `r[t]`, `phi[t]` and `wcum[t]` describe the state after visiting the `t`-th
/// node, for `t = 0..T`. `r` is empty for faithful explorations.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplorationTrace {
    pub start: usize,
    pub n: usize,
    pub y: Vec<usize>,
    pub z: Vec<usize>,
    pub r: Vec<f64>,
    /// Success probability of each `Z_{t+1}` draw (surrogate only).
    pub draw_prob: Vec<f64>,
    pub phi: Vec<f64>,
    pub wcum: Vec<usize>,
    /// Attributes in discovery order, grouped by step through `wcum`.
    pub discovered: Vec<u32>,
    pub stop_time: usize,
}

impl ExplorationTrace {
    pub(crate) fn empty(start: usize, n: usize) -> Self {
        Self {
            start,
            n,
            y: vec![1],
            z: Vec::new(),
            r: Vec::new(),
            draw_prob: Vec::new(),
            phi: Vec::new(),
            wcum: Vec::new(),
            discovered: Vec::new(),
            stop_time: 0,
        }
    }

    /// CSV with header `t,Y,Z,r,phi,wcum`; row `t` (1-based step) holds `Y_t`,
    /// `Z_t` and the rate, `phi` and `|W_[t-1]|` that produced `Z_t`. Floats use
    /// 17 significant digits; `r` is blank when not recorded.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,Y,Z,r,phi,wcum\n");
        for t in 1..=self.stop_time {
            let r = self
                .r
                .get(t - 1)
                .map(|x| format!("{x:.16e}"))
                .unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{:.16e},{}",
                t,
                self.y[t],
                self.z[t - 1],
                r,
                self.phi[t - 1],
                self.wcum[t - 1]
            );
        }
        out
    }

    /// Checks the exact integer identities and basic ranges. Returns a
    /// description of the first violation.
    pub fn check_identities(&self) -> std::result::Result<(), String> {
        let t_max = self.stop_time;
        if self.y.first() != Some(&1) {
            return Err("Y_0 != 1".into());
        }
        if self.y.len() != t_max + 1 || self.z.len() != t_max || self.phi.len() != t_max {
            return Err("trace lengths inconsistent with stop time".into());
        }
        if !self.r.is_empty() && self.r.len() != t_max {
            return Err("rate sequence length mismatch".into());
        }
        if !self.draw_prob.is_empty() && self.draw_prob.len() != t_max {
            return Err("draw probability length mismatch".into());
        }
        for t in 1..=t_max {
            if self.y[t] + 1 != self.y[t - 1] + self.z[t - 1] {
                return Err(format!("Y_{t} != Y_{} + Z_{t} - 1", t - 1));
            }
        }
        for (t, &yt) in self.y.iter().enumerate() {
            if t + yt > self.n {
                return Err(format!("N_{t} = n - t - Y_t < 0"));
            }
            if t > 0 && t < t_max && yt == 0 {
                return Err(format!("Y_{t} = 0 before the stopping time"));
            }
        }
        if t_max == 0 || self.y[t_max] != 0 {
            return Err("process did not stop at Y = 0".into());
        }
        let mut prev = 1.0;
        for &p in &self.phi {
            if !(p > 0.0 && p <= prev) {
                return Err(format!("phi not in (0, previous]: {p}"));
            }
            prev = p;
        }
        if self.wcum.windows(2).any(|w| w[0] > w[1]) {
            return Err("|W_[t]| decreased".into());
        }
        if self.wcum.last().copied().unwrap_or(0) != self.discovered.len() {
            return Err("|W_[T-1]| differs from the discovered list".into());
        }
        Ok(())
    }

    /// Recomputes `phi[t]` as the plain product of `q_w` over attributes
    /// discovered by step `t`; returns the largest relative deviation.
    pub fn phi_recompute_error(&self, profile: &AttributeProfile) -> f64 {
        let mut worst: f64 = 0.0;
        for (t, &stored) in self.phi.iter().enumerate() {
            let direct: f64 = self.discovered[..self.wcum[t]]
                .iter()
                .map(|&w| profile.q(w as usize))
                .product();
            worst = worst.max((direct - stored).abs() / direct);
        }
        worst
    }

    /// Largest relative gap between `prod_{tau <= t} (1 - draw_prob_tau)` and
    /// `phi_t`; zero only when the draws used the conditional rate.
    pub fn draw_product_error(&self) -> f64 {
        let mut acc = 1.0;
        let mut worst: f64 = 0.0;
        for (d, phi) in self.draw_prob.iter().zip(&self.phi) {
            acc *= 1.0 - d;
            worst = worst.max((acc - phi).abs() / phi);
        }
        worst
    }

    /// Largest `|sum_{tau < t} r_tau - (1 - phi_{t-1})|` over the trace.
    pub fn telescoping_error(&self) -> f64 {
        let mut acc = 0.0;
        let mut worst: f64 = 0.0;
        for (r, phi) in self.r.iter().zip(&self.phi) {
            acc += r;
            worst = worst.max((acc - (1.0 - phi)).abs());
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Neutral,
    Alive,
    Dead,
}

/// Explores the realized component of `v0`: each visited node reveals its
/// attributes and every neutral holder of a newly discovered attribute becomes
/// alive. The next node is drawn uniformly from the alive set using the stream
/// `(seed, "explore", v0)`. The stopping time equals `|C(v0)|` in the `s = 1`
/// graph.
pub fn explore_faithful(
    inc: &BipartiteIncidence,
    profile: &AttributeProfile,
    v0: usize,
    seed: u64,
) -> Result<ExplorationTrace> {
    let n = inc.n();
    if v0 >= n {
        return Err(RigError::Index { index: v0, len: n });
    }
    if profile.m() != inc.m() {
        return Err(RigError::Input(format!(
            "profile has {} attributes, incidence has {}",
            profile.m(),
            inc.m()
        )));
    }
    let mut rng = stream(seed, "explore", &[v0 as u64]);
    let mut status = vec![Status::Neutral; n];
    let mut found = vec![false; inc.m()];
    let mut alive: Vec<u32> = Vec::new();
    let mut trace = ExplorationTrace::empty(v0, n);
    let mut phi = 1.0;
    let mut y = 1usize;
    let mut current = v0;
    status[v0] = Status::Alive;

    loop {
        status[current] = Status::Dead;
        let mut z = 0;
        for &w in inc.node_attrs(current) {
            let w = w as usize;
            if found[w] {
                continue;
            }
            found[w] = true;
            phi *= profile.q(w);
            trace.discovered.push(w as u32);
            for &u in inc.attr_nodes(w) {
                let u = u as usize;
                if status[u] == Status::Neutral {
                    status[u] = Status::Alive;
                    alive.push(u as u32);
                    z += 1;
                }
            }
        }
        trace.phi.push(phi);
        trace.wcum.push(trace.discovered.len());
        y = y + z - 1;
        debug_assert_eq!(y, alive.len());
        trace.z.push(z);
        trace.y.push(y);
        if y == 0 {
            break;
        }
        let pick = rng.random_range(0..alive.len());
        current = alive.swap_remove(pick) as usize;
    }
    trace.stop_time = trace.z.len();
    Ok(trace)
}
