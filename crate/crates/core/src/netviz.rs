//! Provider networks: each profile rendered as a pruned directed graph over
//! the states that carry most of its visit volume, plus a per-profile visit
//! volume table.

use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::clustering::{ClusterTree, ProfileModel};
use crate::model::{MrpParams, StateSpace, LC_LABEL, RC_LABEL};
use crate::{Error, Result};

/// Probability bands that select the drawing style of an edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeTiers {
    /// Edges with `P < low` are drawn dashed and thin.
    pub low: f64,
    /// Edges with `P > high` are drawn bold; the band in between is solid.
    pub high: f64,
}

impl Default for EdgeTiers {
    fn default() -> Self {
        Self { low: 0.33, high: 0.66 }
    }
}

impl EdgeTiers {
    pub fn classify(&self, p: f64) -> EdgeTier {
        if p < self.low {
            EdgeTier::Weak
        } else if p > self.high {
            EdgeTier::Strong
        } else {
            EdgeTier::Medium
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeTier {
    Weak,
    Medium,
    Strong,
}

impl EdgeTier {
    pub fn style(self) -> &'static str {
        match self {
            EdgeTier::Weak => "dashed",
            EdgeTier::Medium => "solid",
            EdgeTier::Strong => "bold",
        }
    }

    pub fn penwidth(self) -> u8 {
        match self {
            EdgeTier::Weak => 1,
            EdgeTier::Medium => 2,
            EdgeTier::Strong => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NetworkConfig {
    /// Fraction of visit volume the retained states must cover.
    pub coverage: f64,
    /// Edges below this probability are dropped.
    pub edge_min: f64,
    pub tiers: EdgeTiers,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            coverage: 0.90,
            edge_min: 0.05,
            tiers: EdgeTiers::default(),
        }
    }
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<()> {
        let unit = |x: f64| x.is_finite() && (0.0..=1.0).contains(&x);
        if !unit(self.coverage) || self.coverage == 0.0 {
            return Err(Error::Config(format!("coverage must be in (0, 1], got {}", self.coverage)));
        }
        if !unit(self.edge_min) {
            return Err(Error::Config(format!("edge_min must be in [0, 1], got {}", self.edge_min)));
        }
        if !unit(self.tiers.low) || !unit(self.tiers.high) || self.tiers.low > self.tiers.high {
            return Err(Error::Config("edge tiers must satisfy 0 <= low <= high <= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkEdge {
    pub src: String,
    pub dst: String,
    pub probability: f64,
    /// Mean interarrival in months; only set for real-to-real edges.
    pub mean_interarrival: Option<f64>,
    pub tier: EdgeTier,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkGraph {
    /// Node labels sorted lexicographically, `LC` and `RC` included.
    pub nodes: Vec<String>,
    /// Edges sorted by `(src, dst)`.
    pub edges: Vec<NetworkEdge>,
    /// Share of the profile's visit volume carried by the retained states.
    pub coverage: f64,
}

/// Smallest set of states, taken in descending volume order, whose volume
/// reaches `threshold` of the total. Ties are broken by state index.
/// Returns the retained indices (in volume order) and their coverage.
pub fn retain_by_volume(volumes: &[u64], threshold: f64) -> (Vec<usize>, f64) {
    let total: u64 = volumes.iter().sum();
    if total == 0 {
        return (Vec::new(), 1.0);
    }
    let mut order: Vec<usize> = (0..volumes.len()).collect();
    order.sort_by(|&a, &b| volumes[b].cmp(&volumes[a]).then(a.cmp(&b)));
    let target = threshold * total as f64;
    let mut kept = Vec::new();
    let mut acc = 0u64;
    for j in order {
        if volumes[j] == 0 || (acc as f64) >= target * (1.0 - 1e-12) {
            break;
        }
        acc += volumes[j];
        kept.push(j);
    }
    (kept, acc as f64 / total as f64)
}

/// Builds the network from explicit parameters and per-state volumes.
pub fn build_network_from(
    params: &MrpParams,
    volumes: &[u64],
    space: &StateSpace,
    cfg: &NetworkConfig,
) -> NetworkGraph {
    let s = space.len();
    assert_eq!(params.n_states(), s, "parameters do not match state space");
    assert_eq!(volumes.len(), s, "one volume per state");
    let (kept, coverage) = retain_by_volume(volumes, cfg.coverage);

    let mut sources: Vec<usize> = kept.clone();
    sources.push(s);
    let mut dests: Vec<usize> = kept.clone();
    dests.push(s);

    let mut edges = Vec::new();
    for &i in &sources {
        for &j in &dests {
            if i == s && j == s {
                continue;
            }
            let p = params.p(i, j);
            if p <= 0.0 || p < cfg.edge_min {
                continue;
            }
            let mean = (i < s && j < s).then(|| params.mean_interarrival(i, j));
            edges.push(NetworkEdge {
                src: space.source_label(i).to_string(),
                dst: space.dest_label(j).to_string(),
                probability: p,
                mean_interarrival: mean,
                tier: cfg.tiers.classify(p),
            });
        }
    }
    edges.sort_by(|a, b| a.src.cmp(&b.src).then_with(|| a.dst.cmp(&b.dst)));

    let mut nodes: Vec<String> = kept.iter().map(|&j| space.label(j).to_string()).collect();
    nodes.push(LC_LABEL.to_string());
    nodes.push(RC_LABEL.to_string());
    nodes.sort();

    NetworkGraph { nodes, edges, coverage }
}

/// Builds the network of a fitted profile; volume is the number of visits
/// to each state among the profile's members.
pub fn build_network(profile: &ProfileModel, space: &StateSpace, cfg: &NetworkConfig) -> NetworkGraph {
    let volumes: Vec<u64> = (0..space.len()).map(|j| profile.stats.visits(j)).collect();
    build_network_from(&profile.params, &volumes, space, cfg)
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Renders the graph as DOT text. Output depends only on the graph and
/// `name`, so it is byte-stable.
pub fn emit_dot(graph: &NetworkGraph, name: &str, tiers: &EdgeTiers) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "// {name}: states covering {:.4} of visit volume", graph.coverage);
    let _ = writeln!(out, "// edge label: transition probability (mean interarrival, months)");
    let _ = writeln!(
        out,
        "// edge style: P < {:.2} dashed penwidth=1; {:.2} <= P <= {:.2} solid penwidth=2; P > {:.2} bold penwidth=3",
        tiers.low, tiers.low, tiers.high, tiers.high
    );
    let _ = writeln!(out, "digraph {} {{", quote(name));
    out.push_str("  rankdir=LR;\n");
    out.push_str("  node [shape=circle];\n");
    for node in &graph.nodes {
        if node == LC_LABEL || node == RC_LABEL {
            let _ = writeln!(out, "  {} [shape=box];", quote(node));
        } else {
            let _ = writeln!(out, "  {};", quote(node));
        }
    }
    for e in &graph.edges {
        let label = match e.mean_interarrival {
            Some(m) => format!("{:.2} ({:.1})", e.probability, m),
            None => format!("{:.2}", e.probability),
        };
        let _ = writeln!(
            out,
            "  {} -> {} [label={}, style={}, penwidth={}];",
            quote(&e.src),
            quote(&e.dst),
            quote(&label),
            e.tier.style(),
            e.tier.penwidth()
        );
    }
    out.push_str("}\n");
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeRow {
    /// 1-based profile number in reporting order.
    pub profile: usize,
    pub label: String,
    pub visits: u64,
    /// Share of the profile's visits.
    pub share: f64,
    /// Expected number of visits per member.
    pub mean_per_member: f64,
}

/// Volume rows of one profile from its per-state visit counts.
pub fn volume_rows(profile: usize, visits: &[u64], members: usize, space: &StateSpace) -> Vec<VolumeRow> {
    let total: u64 = visits.iter().sum();
    visits
        .iter()
        .enumerate()
        .map(|(j, &v)| VolumeRow {
            profile,
            label: space.label(j).to_string(),
            visits: v,
            share: if total == 0 { 0.0 } else { v as f64 / total as f64 },
            mean_per_member: if members == 0 { 0.0 } else { v as f64 / members as f64 },
        })
        .collect()
}

/// Visits per (profile, state), profiles in reporting order.
pub fn volume_table(tree: &ClusterTree, space: &StateSpace) -> Vec<VolumeRow> {
    let mut rows = Vec::new();
    for (rank, &k) in tree.report_order().iter().enumerate() {
        let model = &tree.leaves[k].model;
        let visits: Vec<u64> = (0..space.len()).map(|j| model.stats.visits(j)).collect();
        rows.extend(volume_rows(rank + 1, &visits, model.size(), space));
    }
    rows
}

pub fn write_volume_table<W: Write>(rows: &[VolumeRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["profile", "label", "visits", "share", "mean_per_member"])?;
    for r in rows {
        w.write_record([
            r.profile.to_string(),
            r.label.clone(),
            r.visits.to_string(),
            format!("{:.6}", r.share),
            format!("{:.4}", r.mean_per_member),
        ])?;
    }
    w.flush()?;
    Ok(())
}
