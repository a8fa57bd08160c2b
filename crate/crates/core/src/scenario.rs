//! Bounded unfolding of a grammar into complete execution scenarios,
//! scenario counting without materialization, and enumeration of the legal
//! task orders of a scenario tree under the sequential/parallel semantics.

use std::collections::{BTreeMap, HashMap, HashSet};

use thiserror::Error;

use crate::artifact::{Artifact, ArtifactNode, NodePath};
use crate::builder::{expand_node, new_artifact, Combination};
use crate::model::{GMWf, Mode, Sort};

/// How many extra occurrences of any label are allowed on a root path
/// beyond the first. Bound 0 admits exactly the iteration-free (nominal)
/// scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IterationBound {
    pub max_repeats: usize,
}

impl IterationBound {
    pub fn new(max_repeats: usize) -> Self {
        IterationBound { max_repeats }
    }

    fn limit(&self) -> usize {
        self.max_repeats + 1
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScenarioError {
    #[error("artifact is incomplete: pruned leaf at {0}")]
    IncompleteArtifact(NodePath),
    #[error(transparent)]
    Model(#[from] crate::model::ModelError),
    #[error(transparent)]
    Build(#[from] crate::builder::BuildError),
}

/// All complete derivation trees rooted at each axiom in which no label
/// occurs more than `1 + bound.max_repeats` times on any root path. Trees
/// contain no pruned leaves; every leaf ends on an epsilon production.
/// Deduplicated, deterministic order (production choices in declaration
/// order, leftmost leaf first).
pub fn unfold(gmwf: &GMWf, bound: IterationBound) -> Result<Vec<Artifact>, ScenarioError> {
    let mut out: Vec<Artifact> = Vec::new();
    for axiom in gmwf.axioms() {
        if gmwf.productions_for(axiom)?.is_empty() {
            continue;
        }
        grow_complete(gmwf, bound, new_artifact(axiom.clone()), vec![NodePath::root()], &mut out)?;
    }
    Ok(out)
}

fn grow_complete(
    gmwf: &GMWf,
    bound: IterationBound,
    artifact: Artifact,
    mut pending: Vec<NodePath>,
    out: &mut Vec<Artifact>,
) -> Result<(), ScenarioError> {
    let path = match pending.pop() {
        Some(path) => path,
        None => {
            if !out.iter().any(|seen| seen.same_shape(&artifact)) {
                out.push(artifact);
            }
            return Ok(());
        }
    };

    let node = artifact.node(&path).expect("pending paths are valid");
    let label = node.label().clone();
    let occurrences = 1 + artifact
        .ancestors(&path)
        .expect("pending paths are valid")
        .iter()
        .filter(|l| ***l == label)
        .count();
    if occurrences > bound.limit() {
        // Dead branch: this candidate cannot become a scenario.
        return Ok(());
    }

    for production in gmwf.productions_for(&label)? {
        if production.is_epsilon() {
            grow_complete(gmwf, bound, artifact.clone(), pending.clone(), out)?;
        } else {
            let combination =
                Combination::new(production.rhs().to_vec(), production.mode());
            let combination = match combination {
                Ok(c) => c,
                // Right-hand sides with repeated sorts are not expressible
                // as a designer combination but are still legal trees.
                Err(_) => {
                    let mut expanded = artifact.clone();
                    let node = expanded.node_mut(&path).expect("checked");
                    *node = ArtifactNode::internal(
                        label.clone(),
                        production.mode(),
                        production.rhs().iter().cloned().map(ArtifactNode::leaf).collect(),
                    );
                    let mut next = pending.clone();
                    for index in (0..production.rhs().len()).rev() {
                        next.push(path.child(index));
                    }
                    grow_complete(gmwf, bound, expanded, next, out)?;
                    continue;
                }
            };
            let expanded = expand_node(&artifact, &path, &combination)?;
            let mut next = pending.clone();
            for index in (0..production.rhs().len()).rev() {
                next.push(path.child(index));
            }
            grow_complete(gmwf, bound, expanded, next, out)?;
        }
    }
    Ok(())
}

/// `|unfold(gmwf, bound)|` computed by memoized counting instead of
/// materializing the trees. Structurally duplicate productions are counted
/// once, mirroring the deduplication performed by [`unfold`].
pub fn count_scenarios(gmwf: &GMWf, bound: IterationBound) -> Result<u128, ScenarioError> {
    type Memo = HashMap<(String, BTreeMap<String, usize>), u128>;

    fn count(
        gmwf: &GMWf,
        bound: IterationBound,
        sort: &Sort,
        path_counts: &BTreeMap<String, usize>,
        memo: &mut Memo,
    ) -> Result<u128, ScenarioError> {
        let occurrences = 1 + path_counts.get(sort.name()).copied().unwrap_or(0);
        if occurrences > bound.limit() {
            return Ok(0);
        }
        let mut counts = path_counts.clone();
        *counts.entry(sort.name().to_string()).or_insert(0) += 1;
        let key = (sort.name().to_string(), counts.clone());
        if let Some(&cached) = memo.get(&key) {
            return Ok(cached);
        }

        let productions = gmwf.productions_for(sort)?;
        let mut total: u128 = 0;
        for (i, production) in productions.iter().enumerate() {
            if productions[..i].iter().any(|p| p.same_rule(production)) {
                continue;
            }
            let mut product: u128 = 1;
            for child in production.rhs() {
                product = product
                    .checked_mul(count(gmwf, bound, child, &counts, memo)?)
                    .expect("scenario count overflow");
                if product == 0 {
                    break;
                }
            }
            total = total.checked_add(product).expect("scenario count overflow");
        }
        memo.insert(key, total);
        Ok(total)
    }

    let mut memo = Memo::new();
    let mut total: u128 = 0;
    for axiom in gmwf.axioms() {
        total += count(gmwf, bound, axiom, &BTreeMap::new(), &mut memo)?;
    }
    Ok(total)
}

fn check_complete(artifact: &Artifact) -> Result<(), ScenarioError> {
    for (path, node) in artifact.preorder() {
        if node.is_pruned() {
            return Err(ScenarioError::IncompleteArtifact(path));
        }
    }
    Ok(())
}

/// Up to `limit` distinct orders of the artifact's task labels such that
/// every node precedes its subtree, the subtrees of sequential siblings
/// follow one another completely, and parallel subtrees interleave freely.
/// Restructuring labels are omitted from the returned sequences. Generation
/// order is deterministic with the leftmost interleaving first.
pub fn linearizations(
    artifact: &Artifact,
    limit: usize,
) -> Result<Vec<Vec<String>>, ScenarioError> {
    check_complete(artifact)?;
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for sequence in node_orders(artifact.root()) {
        let tasks: Vec<String> = sequence
            .into_iter()
            .filter(|sort| sort.is_task())
            .map(|sort| sort.name().to_string())
            .collect();
        if seen.insert(tasks.clone()) {
            out.push(tasks);
            if out.len() == limit {
                break;
            }
        }
    }
    Ok(out)
}

/// Exact number of distinct task orders of the artifact.
pub fn count_linearizations(artifact: &Artifact) -> Result<u128, ScenarioError> {
    check_complete(artifact)?;
    let mut seen = HashSet::new();
    for sequence in node_orders(artifact.root()) {
        let tasks: Vec<&str> = sequence
            .into_iter()
            .filter(|sort| sort.is_task())
            .map(Sort::name)
            .collect();
        seen.insert(tasks);
    }
    Ok(seen.len() as u128)
}

/// All orders of the node instances of a subtree (including restructuring
/// nodes), root first.
fn node_orders(node: &ArtifactNode) -> Vec<Vec<&Sort>> {
    if node.is_leaf() {
        return vec![vec![node.label()]];
    }
    let per_child: Vec<Vec<Vec<&Sort>>> = node.children().iter().map(node_orders).collect();
    let mut tails: Vec<Vec<&Sort>> = Vec::new();
    for combo in cartesian(&per_child) {
        match node.child_mode() {
            Mode::Sequential => {
                tails.push(combo.into_iter().flatten().cloned().collect());
            }
            Mode::Parallel => {
                let sequences: Vec<&[&Sort]> = combo.iter().map(|c| c.as_slice()).collect();
                interleave(&sequences, &mut Vec::new(), &mut tails);
            }
        }
    }
    tails
        .into_iter()
        .map(|tail| std::iter::once(node.label()).chain(tail).collect())
        .collect()
}

/// Cartesian product of per-child alternatives; the first child's choice
/// varies slowest.
fn cartesian<'a, 'b>(per_child: &'b [Vec<Vec<&'a Sort>>]) -> Vec<Vec<&'b Vec<&'a Sort>>> {
    let mut combos: Vec<Vec<&Vec<&Sort>>> = vec![Vec::new()];
    for alternatives in per_child {
        let mut next = Vec::new();
        for combo in &combos {
            for alternative in alternatives {
                let mut extended = combo.clone();
                extended.push(alternative);
                next.push(extended);
            }
        }
        combos = next;
    }
    combos
}

/// Every merge of the given sequences that preserves each sequence's own
/// order; at each step the leftmost non-empty sequence is tried first.
fn interleave<'a, 'b>(
    remaining: &[&'b [&'a Sort]],
    prefix: &mut Vec<&'a Sort>,
    out: &mut Vec<Vec<&'a Sort>>,
) {
    if remaining.iter().all(|sequence| sequence.is_empty()) {
        out.push(prefix.clone());
        return;
    }
    for index in 0..remaining.len() {
        if let Some((head, tail)) = remaining[index].split_first() {
            let mut next: Vec<&[&Sort]> = remaining.to_vec();
            next[index] = tail;
            prefix.push(head);
            interleave(&next, prefix, out);
            prefix.pop();
        }
    }
}

/// Independent check that a task sequence is a legal order for the
/// artifact. Builds no sequences itself: it plays the sequence against the
/// tree, consuming one ready node per step. Restructuring nodes are not part
/// of the sequence and are consumed eagerly whenever they become ready;
/// matching among equally-labelled ready nodes backtracks.
pub fn is_legal_linearization(artifact: &Artifact, sequence: &[String]) -> bool {
    let nodes = artifact.preorder();
    let index_of = |path: &NodePath| nodes.iter().position(|(p, _)| p == path).expect("known path");
    let mut consumed = vec![false; nodes.len()];

    fn subtree_consumed(
        nodes: &[(NodePath, &ArtifactNode)],
        consumed: &[bool],
        root: usize,
    ) -> bool {
        let (root_path, _) = &nodes[root];
        nodes
            .iter()
            .enumerate()
            .filter(|(_, (path, _))| root_path.is_prefix_of(path))
            .all(|(i, _)| consumed[i])
    }

    fn ready(
        nodes: &[(NodePath, &ArtifactNode)],
        consumed: &[bool],
        index_of: &dyn Fn(&NodePath) -> usize,
        i: usize,
    ) -> bool {
        if consumed[i] {
            return false;
        }
        let (path, _) = &nodes[i];
        let parent_path = match path.parent() {
            None => return true,
            Some(parent) => parent,
        };
        let parent_index = index_of(&parent_path);
        if !consumed[parent_index] {
            return false;
        }
        let (_, parent) = &nodes[parent_index];
        if parent.child_mode() == Mode::Sequential {
            let position = *path.0.last().expect("non-root");
            for earlier in 0..position {
                let sibling = parent_path.child(earlier);
                if !subtree_consumed(nodes, consumed, index_of(&sibling)) {
                    return false;
                }
            }
        }
        true
    }

    fn saturate(
        nodes: &[(NodePath, &ArtifactNode)],
        consumed: &mut [bool],
        index_of: &dyn Fn(&NodePath) -> usize,
    ) {
        loop {
            let firing: Vec<usize> = (0..nodes.len())
                .filter(|&i| !nodes[i].1.label().is_task() && ready(nodes, consumed, index_of, i))
                .collect();
            if firing.is_empty() {
                return;
            }
            for i in firing {
                consumed[i] = true;
            }
        }
    }

    fn step(
        nodes: &[(NodePath, &ArtifactNode)],
        consumed: &mut Vec<bool>,
        index_of: &dyn Fn(&NodePath) -> usize,
        sequence: &[String],
        at: usize,
    ) -> bool {
        saturate(nodes, consumed, index_of);
        if at == sequence.len() {
            return consumed.iter().all(|&done| done);
        }
        let label = &sequence[at];
        for i in 0..nodes.len() {
            let node = nodes[i].1;
            if node.label().is_task()
                && node.label().name() == label
                && ready(nodes, consumed, index_of, i)
            {
                let mut branch = consumed.clone();
                branch[i] = true;
                if step(nodes, &mut branch, index_of, sequence, at + 1) {
                    return true;
                }
            }
        }
        false
    }

    step(&nodes, &mut consumed, &index_of, sequence, 0)
}
