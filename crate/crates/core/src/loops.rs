//! Feedback-loop enumeration and polarity classification.

use std::fmt;

use crate::graph::{Sign, SignedDigraph};
use crate::model::VariableId;
use crate::validate::tarjan;

/// Graphs smaller than this get an exact probe for cycles longer than the
/// enumeration bound; larger graphs get a conservative flag.
const PROBE_NODE_LIMIT: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Polarity {
    Balancing,
    Reinforcing,
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarity::Balancing => "balancing",
            Polarity::Reinforcing => "reinforcing",
        })
    }
}

/// An elementary cycle, rotated to start at its smallest node name.
/// `edge_signs[i]` is the sign of `nodes[i] -> nodes[(i + 1) % len]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cycle {
    pub nodes: Vec<VariableId>,
    pub edge_signs: Vec<Sign>,
}

impl Cycle {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// True if `witness` occurs as a subsequence of the cycle read from some
    /// starting node, wrapping around once.
    pub fn contains_in_order(&self, witness: &[VariableId]) -> bool {
        let n = self.nodes.len();
        let Some(first) = witness.first() else {
            return true;
        };
        (0..n).filter(|&i| &self.nodes[i] == first).any(|start| {
            let mut want = 1;
            for step in 1..n {
                if want == witness.len() {
                    break;
                }
                if self.nodes[(start + step) % n] == witness[want] {
                    want += 1;
                }
            }
            want == witness.len()
        })
    }
}

impl fmt::Display for Cycle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, s) in self.nodes.iter().zip(&self.edge_signs) {
            write!(f, "{n} -{s}-> ")?;
        }
        match self.nodes.first() {
            Some(n) => write!(f, "{n}"),
            None => Ok(()),
        }
    }
}

pub fn classify(cycle: &Cycle) -> Polarity {
    let negatives = cycle.edge_signs.iter().filter(|s| **s == Sign::Negative).count();
    if negatives % 2 == 1 {
        Polarity::Balancing
    } else {
        Polarity::Reinforcing
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoopReport {
    pub cycles: Vec<(Cycle, Polarity)>,
    /// Some cycle longer than the bound was skipped (or may have been).
    pub truncated: bool,
}

impl LoopReport {
    pub fn count(&self, polarity: Polarity) -> usize {
        self.cycles.iter().filter(|(_, p)| *p == polarity).count()
    }
}

/// Every elementary cycle with at most `max_len` nodes, each once, sorted by
/// node-name sequence.
pub fn enumerate_cycles(g: &SignedDigraph, max_len: usize) -> LoopReport {
    let max_len = max_len.max(1);
    let (names, signed) = g.indexed();
    let adj: Vec<Vec<usize>> = signed.iter().map(|e| e.iter().map(|(w, _)| *w).collect()).collect();
    let largest_scc = largest_cyclic_component(&adj);

    let mut raw = Vec::new();
    if max_len >= largest_scc {
        johnson(&adj, &mut raw);
    } else {
        bounded(&adj, max_len, &mut raw);
    }

    let truncated = if max_len >= largest_scc {
        false
    } else if names.len() < PROBE_NODE_LIMIT {
        has_longer_cycle(&adj, max_len)
    } else {
        true
    };

    let sign_of = |a: usize, b: usize| {
        signed[a]
            .iter()
            .find(|(w, _)| *w == b)
            .map(|(_, s)| *s)
            .expect("cycle edges exist")
    };
    // indices follow sorted names, so each raw cycle already starts at its smallest node
    let mut cycles: Vec<(Cycle, Polarity)> = raw
        .into_iter()
        .map(|c| {
            let n = c.len();
            let cycle = Cycle {
                nodes: c.iter().map(|&i| names[i].clone()).collect(),
                edge_signs: (0..n).map(|i| sign_of(c[i], c[(i + 1) % n])).collect(),
            };
            let p = classify(&cycle);
            (cycle, p)
        })
        .collect();
    cycles.sort_by(|a, b| a.0.nodes.cmp(&b.0.nodes));
    LoopReport { cycles, truncated }
}

fn largest_cyclic_component(adj: &[Vec<usize>]) -> usize {
    tarjan(adj)
        .iter()
        .map(|c| {
            if c.len() == 1 && !adj[c[0]].contains(&c[0]) {
                0
            } else {
                c.len()
            }
        })
        .max()
        .unwrap_or(0)
}

/// Membership mask of the strongly connected component containing `s`
/// within the subgraph induced by nodes `>= s`.
fn component_from(adj: &[Vec<usize>], s: usize) -> Vec<bool> {
    let sub: Vec<Vec<usize>> = adj
        .iter()
        .enumerate()
        .map(|(v, out)| {
            if v < s {
                Vec::new()
            } else {
                out.iter().copied().filter(|&w| w >= s).collect()
            }
        })
        .collect();
    let mut mask = vec![false; adj.len()];
    if let Some(comp) = tarjan(&sub).into_iter().find(|c| c.contains(&s)) {
        for v in comp {
            mask[v] = true;
        }
    }
    mask
}

/// Johnson's elementary-circuit algorithm.
fn johnson(adj: &[Vec<usize>], out: &mut Vec<Vec<usize>>) {
    struct Search<'a> {
        adj: &'a [Vec<usize>],
        comp: Vec<bool>,
        start: usize,
        blocked: Vec<bool>,
        blocked_by: Vec<Vec<usize>>,
        stack: Vec<usize>,
        out: &'a mut Vec<Vec<usize>>,
    }
    impl Search<'_> {
        fn unblock(&mut self, u: usize) {
            self.blocked[u] = false;
            while let Some(w) = self.blocked_by[u].pop() {
                if self.blocked[w] {
                    self.unblock(w);
                }
            }
        }
        fn circuit(&mut self, v: usize) -> bool {
            let mut found = false;
            self.stack.push(v);
            self.blocked[v] = true;
            for i in 0..self.adj[v].len() {
                let w = self.adj[v][i];
                if !self.comp[w] {
                    continue;
                }
                if w == self.start {
                    self.out.push(self.stack.clone());
                    found = true;
                } else if !self.blocked[w] && self.circuit(w) {
                    found = true;
                }
            }
            if found {
                self.unblock(v);
            } else {
                for i in 0..self.adj[v].len() {
                    let w = self.adj[v][i];
                    if self.comp[w] && !self.blocked_by[w].contains(&v) {
                        self.blocked_by[w].push(v);
                    }
                }
            }
            self.stack.pop();
            found
        }
    }
    let n = adj.len();
    for s in 0..n {
        let comp = component_from(adj, s);
        let mut search = Search {
            adj,
            comp,
            start: s,
            blocked: vec![false; n],
            blocked_by: vec![Vec::new(); n],
            stack: Vec::new(),
            out: &mut *out,
        };
        search.circuit(s);
    }
}

/// Depth-first enumeration of cycles with at most `max_len` nodes.
fn bounded(adj: &[Vec<usize>], max_len: usize, out: &mut Vec<Vec<usize>>) {
    fn dfs(adj: &[Vec<usize>], comp: &[bool], max_len: usize, path: &mut Vec<usize>, on: &mut [bool], out: &mut Vec<Vec<usize>>) {
        let v = *path.last().expect("non-empty path");
        for &w in &adj[v] {
            if !comp[w] {
                continue;
            }
            if w == path[0] {
                out.push(path.clone());
            } else if !on[w] && path.len() < max_len {
                on[w] = true;
                path.push(w);
                dfs(adj, comp, max_len, path, on, out);
                path.pop();
                on[w] = false;
            }
        }
    }
    let n = adj.len();
    for s in 0..n {
        let comp = component_from(adj, s);
        let mut on = vec![false; n];
        on[s] = true;
        dfs(adj, &comp, max_len, &mut vec![s], &mut on, out);
    }
}

/// True if any elementary cycle has more than `max_len` nodes.
fn has_longer_cycle(adj: &[Vec<usize>], max_len: usize) -> bool {
    fn dfs(adj: &[Vec<usize>], comp: &[bool], max_len: usize, path: &mut Vec<usize>, on: &mut [bool]) -> bool {
        let v = *path.last().expect("non-empty path");
        for &w in &adj[v] {
            if !comp[w] {
                continue;
            }
            if w == path[0] {
                if path.len() > max_len {
                    return true;
                }
            } else if !on[w] {
                on[w] = true;
                path.push(w);
                let hit = dfs(adj, comp, max_len, path, on);
                path.pop();
                on[w] = false;
                if hit {
                    return true;
                }
            }
        }
        false
    }
    let n = adj.len();
    (0..n).any(|s| {
        let comp = component_from(adj, s);
        let mut on = vec![false; n];
        on[s] = true;
        dfs(adj, &comp, max_len, &mut vec![s], &mut on)
    })
}

/// A feedback loop that should be present, identified by nodes that must
/// appear in order along it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NamedLoop {
    pub label: String,
    pub expected_polarity: Polarity,
    pub witness_nodes: Vec<VariableId>,
}

impl NamedLoop {
    pub fn new(label: &str, expected_polarity: Polarity, witness: &[&str]) -> Self {
        NamedLoop {
            label: label.to_string(),
            expected_polarity,
            witness_nodes: witness
                .iter()
                .map(|w| VariableId::new(*w).expect("valid identifier"))
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MatchStatus {
    /// Index into the report's cycle list of the first matching cycle.
    Found(usize),
    /// Witness present only on cycles of the other polarity.
    PolarityMismatch(usize),
    Missing,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoopMatch {
    pub label: String,
    pub expected: Polarity,
    pub status: MatchStatus,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct MatchReport {
    pub entries: Vec<LoopMatch>,
}

impl MatchReport {
    pub fn all_found(&self) -> bool {
        self.entries.iter().all(|e| matches!(e.status, MatchStatus::Found(_)))
    }

    pub fn get(&self, label: &str) -> Option<&LoopMatch> {
        self.entries.iter().find(|e| e.label == label)
    }
}

pub fn match_named_loops(report: &LoopReport, expected: &[NamedLoop]) -> MatchReport {
    let entries = expected
        .iter()
        .map(|named| {
            let mut mismatch = None;
            let mut found = None;
            for (i, (cycle, polarity)) in report.cycles.iter().enumerate() {
                if !cycle.contains_in_order(&named.witness_nodes) {
                    continue;
                }
                if *polarity == named.expected_polarity {
                    found = Some(i);
                    break;
                }
                mismatch.get_or_insert(i);
            }
            let status = match (found, mismatch) {
                (Some(i), _) => MatchStatus::Found(i),
                (None, Some(i)) => MatchStatus::PolarityMismatch(i),
                (None, None) => MatchStatus::Missing,
            };
            LoopMatch {
                label: named.label.clone(),
                expected: named.expected_polarity,
                status,
            }
        })
        .collect();
    MatchReport { entries }
}
