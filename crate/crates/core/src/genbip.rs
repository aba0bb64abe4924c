//! Sampling of the bipartite node–attribute incidence `A[v][w] ~ Bernoulli(p_w)`.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, RigError};
use crate::model::{validate_profile, AttributeProfile, RigConfig};
use crate::rng::stream;

/// The realized relation between nodes and attributes, stored in both directions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteIncidence {
    n: usize,
    m: usize,
    node_attrs: Vec<Vec<u32>>,
    attr_nodes: Vec<Vec<u32>>,
}

impl BipartiteIncidence {
    /// Builds from per-node attribute lists; lists are sorted and checked for
    /// range and duplicates.
    pub fn from_node_attrs(n: usize, m: usize, mut node_attrs: Vec<Vec<u32>>) -> Result<Self> {
        if node_attrs.len() != n {
            return Err(RigError::Input(format!(
                "expected {n} node lists, got {}",
                node_attrs.len()
            )));
        }
        for (v, list) in node_attrs.iter_mut().enumerate() {
            list.sort_unstable();
            check_list(list, m, "node", v)?;
        }
        let attr_nodes = transpose(&node_attrs, m);
        Ok(Self {
            n,
            m,
            node_attrs,
            attr_nodes,
        })
    }

    /// Builds from per-attribute node lists.
    pub fn from_attr_nodes(n: usize, m: usize, mut attr_nodes: Vec<Vec<u32>>) -> Result<Self> {
        if attr_nodes.len() != m {
            return Err(RigError::Input(format!(
                "expected {m} attribute lists, got {}",
                attr_nodes.len()
            )));
        }
        for (w, list) in attr_nodes.iter_mut().enumerate() {
            list.sort_unstable();
            check_list(list, n, "attribute", w)?;
        }
        let node_attrs = transpose(&attr_nodes, n);
        Ok(Self {
            n,
            m,
            node_attrs,
            attr_nodes,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// `W(v)`, sorted.
    pub fn node_attrs(&self, v: usize) -> &[u32] {
        &self.node_attrs[v]
    }

    /// Nodes holding attribute `w`, sorted.
    pub fn attr_nodes(&self, w: usize) -> &[u32] {
        &self.attr_nodes[w]
    }

    pub fn all_node_attrs(&self) -> &[Vec<u32>] {
        &self.node_attrs
    }

    pub fn all_attr_nodes(&self) -> &[Vec<u32>] {
        &self.attr_nodes
    }

    pub fn entries(&self) -> usize {
        self.node_attrs.iter().map(Vec::len).sum()
    }

    /// Checks that the two list views are exact transposes.
    pub fn is_consistent(&self) -> bool {
        transpose(&self.node_attrs, self.m) == self.attr_nodes
            && transpose(&self.attr_nodes, self.n) == self.node_attrs
    }

    /// Per-node union of two incidences on the same node and attribute sets.
    pub fn union(&self, other: &BipartiteIncidence) -> Result<BipartiteIncidence> {
        if self.n != other.n || self.m != other.m {
            return Err(RigError::Input(
                "union of incidences with different shapes".into(),
            ));
        }
        let node_attrs = self
            .node_attrs
            .iter()
            .zip(&other.node_attrs)
            .map(|(a, b)| sorted_union(a, b))
            .collect();
        BipartiteIncidence::from_node_attrs(self.n, self.m, node_attrs)
    }

    /// Relabels nodes: node `v` becomes `perm[v]`.
    pub fn permute_nodes(&self, perm: &[usize]) -> Result<BipartiteIncidence> {
        if perm.len() != self.n {
            return Err(RigError::Input("permutation length mismatch".into()));
        }
        let mut node_attrs = vec![Vec::new(); self.n];
        for (v, &to) in perm.iter().enumerate() {
            if to >= self.n {
                return Err(RigError::Index {
                    index: to,
                    len: self.n,
                });
            }
            node_attrs[to] = self.node_attrs[v].clone();
        }
        BipartiteIncidence::from_node_attrs(self.n, self.m, node_attrs)
    }

    /// Writes the `RIG-INC v1` text format.
    pub fn write_text<W: Write>(&self, seed: u64, mut out: W) -> std::io::Result<()> {
        writeln!(out, "RIG-INC v1 {} {} {}", self.n, self.m, seed)?;
        let mut line = String::new();
        for (v, attrs) in self.node_attrs.iter().enumerate() {
            line.clear();
            let _ = write!(line, "{} {}", v, attrs.len());
            for w in attrs {
                let _ = write!(line, " {w}");
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    pub fn to_text(&self, seed: u64) -> String {
        let mut buf = Vec::new();
        self.write_text(seed, &mut buf)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("format is ASCII")
    }

    /// Parses the `RIG-INC v1` text format; returns the incidence and its seed.
    pub fn read_text<R: BufRead>(input: R) -> Result<(BipartiteIncidence, u64)> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| RigError::Parse("missing header".into()))?
            .map_err(|e| RigError::Parse(e.to_string()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 5 || fields[0] != "RIG-INC" || fields[1] != "v1" {
            return Err(RigError::Parse(format!("bad header {header:?}")));
        }
        let n: usize = parse_num(fields[2])?;
        let m: usize = parse_num(fields[3])?;
        let seed: u64 = parse_num(fields[4])?;
        let mut node_attrs = Vec::with_capacity(n);
        for (expect_v, line) in lines.enumerate() {
            let line = line.map_err(|e| RigError::Parse(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let v: usize = parse_num(it.next().unwrap_or_default())?;
            if v != expect_v {
                return Err(RigError::Parse(format!(
                    "expected node {expect_v}, found {v}"
                )));
            }
            let count: usize = parse_num(
                it.next()
                    .ok_or_else(|| RigError::Parse(format!("node {v}: missing count")))?,
            )?;
            let attrs = it.map(parse_num::<u32>).collect::<Result<Vec<_>>>()?;
            if attrs.len() != count {
                return Err(RigError::Parse(format!(
                    "node {v}: count {count} but {} indices",
                    attrs.len()
                )));
            }
            if attrs.windows(2).any(|p| p[0] >= p[1]) {
                return Err(RigError::Parse(format!(
                    "node {v}: indices not strictly increasing"
                )));
            }
            node_attrs.push(attrs);
        }
        if node_attrs.len() != n {
            return Err(RigError::Parse(format!(
                "header says {n} nodes, found {}",
                node_attrs.len()
            )));
        }
        let inc = BipartiteIncidence::from_node_attrs(n, m, node_attrs)?;
        Ok((inc, seed))
    }
}

fn parse_num<T: std::str::FromStr>(s: &str) -> Result<T> {
    s.parse()
        .map_err(|_| RigError::Parse(format!("not a valid number: {s:?}")))
}

fn check_list(list: &[u32], bound: usize, what: &str, owner: usize) -> Result<()> {
    if let Some(&last) = list.last() {
        if last as usize >= bound {
            return Err(RigError::Index {
                index: last as usize,
                len: bound,
            });
        }
    }
    if list.windows(2).any(|p| p[0] == p[1]) {
        return Err(RigError::Input(format!("{what} {owner}: duplicate index")));
    }
    Ok(())
}

fn transpose(lists: &[Vec<u32>], width: usize) -> Vec<Vec<u32>> {
    let mut counts = vec![0usize; width];
    for list in lists {
        for &x in list {
            counts[x as usize] += 1;
        }
    }
    let mut out: Vec<Vec<u32>> = counts.into_iter().map(Vec::with_capacity).collect();
    // Rows are visited in increasing order, so every output list comes out sorted.
    for (row, list) in lists.iter().enumerate() {
        for &x in list {
            out[x as usize].push(row as u32);
        }
    }
    out
}

fn sorted_union(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Draws one attribute column: `K ~ Bin(n, p)` holders chosen as a uniform
/// `K`-subset of the nodes.
pub fn sample_column<R: Rng + ?Sized>(rng: &mut R, n: usize, p: f64) -> Vec<u32> {
    let k = Binomial::new(n as u64, p)
        .expect("p validated in (0, 1)")
        .sample(rng) as usize;
    let mut nodes: Vec<u32> = rand::seq::index::sample(rng, n, k)
        .into_iter()
        .map(|v| v as u32)
        .collect();
    nodes.sort_unstable();
    nodes
}

/// Samples the incidence. Column `w` uses its own stream `(seed, "col", w)`, so
/// the result does not depend on evaluation order or thread count.
pub fn sample_incidence(config: &RigConfig) -> Result<BipartiteIncidence> {
    validate_profile(&config.profile, config.n)?;
    sample_incidence_raw(config.n, config.profile.probs(), config.seed)
}

/// Column sampler without profile validation: entries may be exactly 0 (an
/// attribute nobody holds), which arises for layers such as `p_w^gamma` that
/// underflow. Entries must lie in `[0, 1)`.
pub fn sample_incidence_raw(n: usize, probs: &[f64], seed: u64) -> Result<BipartiteIncidence> {
    if n > u32::MAX as usize || probs.len() > u32::MAX as usize {
        return Err(RigError::Size("n and m must fit in 32 bits".into()));
    }
    if let Some((index, &value)) = probs
        .iter()
        .enumerate()
        .find(|(_, &p)| !(0.0..1.0).contains(&p))
    {
        return Err(RigError::ProfileRange { index, value });
    }
    let attr_nodes: Vec<Vec<u32>> = probs
        .par_iter()
        .enumerate()
        .map(|(w, &p)| {
            if p == 0.0 {
                return Vec::new();
            }
            let mut rng = stream(seed, "col", &[w as u64]);
            sample_column(&mut rng, n, p)
        })
        .collect();
    let node_attrs = transpose(&attr_nodes, n);
    Ok(BipartiteIncidence {
        n,
        m: probs.len(),
        node_attrs,
        attr_nodes,
    })
}

/// Samples `W(v)` for a single node by independent Bernoulli trials.
pub fn sample_attribute_set<R: Rng + ?Sized>(rng: &mut R, profile: &AttributeProfile) -> Vec<u32> {
    profile
        .probs()
        .iter()
        .enumerate()
        .filter(|&(_, &p)| rng.random::<f64>() < p)
        .map(|(w, _)| w as u32)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IncidenceStats {
    pub attr_counts: Vec<usize>,
    pub mean_node_degree: f64,
    pub max_node_degree: usize,
    pub empty_fraction: f64,
}

pub fn incidence_stats(inc: &BipartiteIncidence) -> IncidenceStats {
    let attr_counts: Vec<usize> = inc.attr_nodes.iter().map(Vec::len).collect();
    let degrees = inc.node_attrs.iter().map(Vec::len);
    let total: usize = attr_counts.iter().sum();
    let max_node_degree = degrees.clone().max().unwrap_or(0);
    let empty = degrees.filter(|&d| d == 0).count();
    let n = inc.n.max(1) as f64;
    IncidenceStats {
        attr_counts,
        mean_node_degree: total as f64 / n,
        max_node_degree,
        empty_fraction: if inc.n == 0 { 1.0 } else { empty as f64 / n },
    }
}
