use std::collections::HashSet;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::derive::{derive_datum, signature, zero_coefficients, DerivationStep, Signature};
use crate::datum::LinearDatum;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssociationNode {
    pub id: usize,
    pub depth: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<DerivationStep>,
    pub signature: Signature,
    pub n: usize,
    #[serde(rename = "N")]
    pub multiplicity: Vec<usize>,
    /// Coefficients that vanish identically, `(j, k)` 1-based.
    pub zero_coefficients: Vec<[usize; 2]>,
    #[serde(skip)]
    pub datum: Option<LinearDatum>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssociationTree {
    pub depth: usize,
    pub dedup: bool,
    pub nodes: Vec<AssociationNode>,
    /// Nodes at each depth, root first.
    pub per_level: Vec<usize>,
    /// Children dropped because their signature was already present.
    pub merged: usize,
    /// Some node at the depth limit could still be derived from.
    pub depth_exceeded: bool,
}

fn node(id: usize, depth: usize, parent: Option<usize>, step: Option<DerivationStep>, d: LinearDatum) -> AssociationNode {
    AssociationNode {
        id,
        depth,
        parent,
        step,
        signature: signature(&d),
        n: d.n,
        multiplicity: d.multiplicity.clone(),
        zero_coefficients: zero_coefficients(&d),
        datum: Some(d),
    }
}

/// Breadth-first expansion over every canonical `(pivot, slot)` step.
pub fn enumerate_associated(root: &LinearDatum, depth: usize, dedup: bool) -> Result<AssociationTree> {
    root.check_shape()?;
    let mut nodes = vec![node(0, 0, None, None, root.clone())];
    let mut seen: HashSet<Signature> = HashSet::new();
    seen.insert(nodes[0].signature.clone());
    let mut per_level = vec![1];
    let mut merged = 0;
    let mut frontier = vec![0usize];
    for level in 1..=depth {
        let children: Vec<Vec<(usize, DerivationStep, LinearDatum)>> = frontier
            .par_iter()
            .map(|&id| {
                let d = nodes[id].datum.as_ref().expect("kept");
                if d.n == 1 {
                    return Ok(Vec::new());
                }
                DerivationStep::all(d)
                    .into_iter()
                    .map(|s| derive_datum(d, &s).map(|c| (id, s, c)))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let mut next = Vec::new();
        for (parent, step, d) in children.into_iter().flatten() {
            let id = nodes.len();
            let nd = node(id, level, Some(parent), Some(step), d);
            if dedup && !seen.insert(nd.signature.clone()) {
                merged += 1;
                continue;
            }
            nodes.push(nd);
            next.push(id);
        }
        per_level.push(next.len());
        frontier = next;
        if frontier.is_empty() {
            break;
        }
    }
    let depth_exceeded = frontier
        .iter()
        .any(|&id| nodes[id].depth == depth && nodes[id].n > 1);
    Ok(AssociationTree { depth, dedup, nodes, per_level, merged, depth_exceeded })
}

impl AssociationTree {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph association {\n  node [shape=box];\n");
        for n in &self.nodes {
            let flag = if n.zero_coefficients.is_empty() { "" } else { ", style=dashed" };
            let _ = writeln!(
                s,
                "  n{} [label=\"n={} N={:?}\\n{}\"{}];",
                n.id,
                n.n,
                n.multiplicity,
                &n.signature.digest[..12],
                flag
            );
        }
        for n in &self.nodes {
            if let (Some(p), Some(step)) = (n.parent, &n.step) {
                let _ = writeln!(s, "  n{p} -> n{} [label=\"{}/{}\"];", n.id, step.pivot_index(), step.slot());
            }
        }
        s.push_str("}\n");
        s
    }
}
