//! Artifacts: annotated ordered trees modelling one execution scenario.
//!
//! Each node is a task instance labelled by a sort; a node together with its
//! children models a scheduling step (the parent executes before the
//! children, which run in sequence or in parallel according to the child
//! mode). Nodes carry the execution machinery used by the simulator: a
//! write-once `status` payload, an `Open -> Executed -> Closed` state and a
//! `pruned` marker for leaves cut at the second occurrence of a label along
//! their root path.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::{Mode, ModelError, Sort};

/// Execution state of a node. The only legal transitions are
/// `Open -> Executed -> Closed`; ordering reflects progress.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ExecState {
    Open,
    Executed,
    Closed,
}

impl Default for ExecState {
    fn default() -> Self {
        ExecState::Open
    }
}

impl fmt::Display for ExecState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExecState::Open => f.write_str("Open"),
            ExecState::Executed => f.write_str("Executed"),
            ExecState::Closed => f.write_str("Closed"),
        }
    }
}

/// Address of a node: the child indices walked from the root. The root is
/// the empty path.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodePath(pub Vec<usize>);

impl NodePath {
    pub fn root() -> Self {
        NodePath(Vec::new())
    }

    pub fn child(&self, index: usize) -> Self {
        let mut steps = self.0.clone();
        steps.push(index);
        NodePath(steps)
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn parent(&self) -> Option<NodePath> {
        if self.0.is_empty() {
            None
        } else {
            Some(NodePath(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    /// True when `self` addresses a strict or non-strict ancestor of `other`.
    pub fn is_prefix_of(&self, other: &NodePath) -> bool {
        other.0.len() >= self.0.len() && other.0[..self.0.len()] == self.0[..]
    }
}

impl fmt::Display for NodePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("/");
        }
        for step in &self.0 {
            write!(f, "/{step}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArtifactNode {
    pub(crate) label: Sort,
    pub(crate) children: Vec<ArtifactNode>,
    pub(crate) child_mode: Mode,
    pub(crate) status: Option<String>,
    pub(crate) state: ExecState,
    pub(crate) pruned: bool,
}

impl ArtifactNode {
    /// A fresh open leaf with no status.
    pub fn leaf(label: Sort) -> Self {
        ArtifactNode {
            label,
            children: Vec::new(),
            child_mode: Mode::Sequential,
            status: None,
            state: ExecState::Open,
            pruned: false,
        }
    }

    /// An internal node over already-built children.
    pub fn internal(label: Sort, mode: Mode, children: Vec<ArtifactNode>) -> Self {
        let child_mode = if children.len() <= 1 { Mode::Sequential } else { mode };
        ArtifactNode {
            label,
            children,
            child_mode,
            status: None,
            state: ExecState::Open,
            pruned: false,
        }
    }

    pub fn label(&self) -> &Sort {
        &self.label
    }

    pub fn children(&self) -> &[ArtifactNode] {
        &self.children
    }

    pub fn child_mode(&self) -> Mode {
        self.child_mode
    }

    pub fn status(&self) -> Option<&str> {
        self.status.as_deref()
    }

    pub fn state(&self) -> ExecState {
        self.state
    }

    pub fn is_pruned(&self) -> bool {
        self.pruned
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    /// Writes the status payload; a status may be written exactly once.
    pub fn write_status(&mut self, value: impl Into<String>) -> Result<(), ModelError> {
        if self.status.is_some() {
            return Err(ModelError::StatusAlreadySet);
        }
        self.status = Some(value.into());
        Ok(())
    }

    pub fn mark_executed(&mut self) -> Result<(), ModelError> {
        self.transition(ExecState::Executed)
    }

    pub fn mark_closed(&mut self) -> Result<(), ModelError> {
        self.transition(ExecState::Closed)
    }

    fn transition(&mut self, to: ExecState) -> Result<(), ModelError> {
        let legal = matches!(
            (self.state, to),
            (ExecState::Open, ExecState::Executed) | (ExecState::Executed, ExecState::Closed)
        );
        if !legal {
            return Err(ModelError::IllegalTransition {
                from: self.state.to_string(),
                to: to.to_string(),
            });
        }
        self.state = to;
        Ok(())
    }

    fn count_nodes(&self) -> usize {
        1 + self.children.iter().map(ArtifactNode::count_nodes).sum::<usize>()
    }

    /// Shape comparison: labels, child order, child modes of internal nodes
    /// and pruned flags — execution state and status are ignored.
    fn same_shape(&self, other: &ArtifactNode) -> bool {
        self.label == other.label
            && self.pruned == other.pruned
            && self.children.len() == other.children.len()
            && (self.children.len() <= 1 || self.child_mode == other.child_mode)
            && self.children.iter().zip(&other.children).all(|(a, b)| a.same_shape(b))
    }
}

/// An annotated scenario tree.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    root: ArtifactNode,
}

impl Artifact {
    pub fn new(root: ArtifactNode) -> Self {
        Artifact { root }
    }

    pub fn root(&self) -> &ArtifactNode {
        &self.root
    }

    pub fn node(&self, path: &NodePath) -> Option<&ArtifactNode> {
        let mut current = &self.root;
        for &step in &path.0 {
            current = current.children.get(step)?;
        }
        Some(current)
    }

    pub(crate) fn node_mut(&mut self, path: &NodePath) -> Option<&mut ArtifactNode> {
        let mut current = &mut self.root;
        for &step in &path.0 {
            current = current.children.get_mut(step)?;
        }
        Some(current)
    }

    /// Preorder traversal as `(path, node)` pairs; the same order every call.
    pub fn preorder(&self) -> Vec<(NodePath, &ArtifactNode)> {
        let mut out = Vec::new();
        let mut stack = vec![(NodePath::root(), &self.root)];
        while let Some((path, node)) = stack.pop() {
            for (i, child) in node.children.iter().enumerate().rev() {
                stack.push((path.child(i), child));
            }
            out.push((path, node));
        }
        out
    }

    pub fn node_count(&self) -> usize {
        self.root.count_nodes()
    }

    /// Isomorphism used for deduplication: labels, child order, decomposition
    /// modes and pruned flags match node for node. Parallel children are not
    /// reordered.
    pub fn same_shape(&self, other: &Artifact) -> bool {
        self.root.same_shape(&other.root)
    }

    /// Labels strictly above the addressed node, from root downwards.
    pub fn ancestors(&self, path: &NodePath) -> Option<Vec<&Sort>> {
        self.node(path)?;
        let mut labels = Vec::new();
        let mut current = &self.root;
        for &step in &path.0 {
            labels.push(&current.label);
            current = current.children.get(step)?;
        }
        Some(labels)
    }

    /// Structural sanity of a tree obtained outside the constructors (for
    /// example from deserialized data): pruned nodes must be leaves and must
    /// repeat a label of some strict ancestor, and a closed node must be
    /// executed-and-complete all the way down.
    pub fn check_invariants(&self) -> Result<(), InvariantViolation> {
        for (path, node) in self.preorder() {
            if node.pruned {
                if !node.children.is_empty() {
                    return Err(InvariantViolation { path, reason: "pruned node has children".into() });
                }
                let above = self.ancestors(&path).unwrap_or_default();
                if !above.iter().any(|label| **label == node.label) {
                    return Err(InvariantViolation {
                        path,
                        reason: "pruned node is not a second occurrence of its label".into(),
                    });
                }
            }
            if node.state == ExecState::Closed
                && node.children.iter().any(|c| c.state != ExecState::Closed)
            {
                return Err(InvariantViolation {
                    path,
                    reason: "closed node has a non-closed child".into(),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invariant violated at {path}: {reason}")]
pub struct InvariantViolation {
    pub path: NodePath,
    pub reason: String,
}

// Serde representation kept flat and default-friendly so artifact files are
// comfortable to write by hand: every field except the label can be omitted.
#[derive(Serialize, Deserialize)]
struct NodeRepr {
    label: String,
    #[serde(default, skip_serializing_if = "is_default_kind")]
    kind: crate::model::SortKind,
    #[serde(default, skip_serializing_if = "is_default_mode")]
    mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    status: Option<String>,
    #[serde(default, skip_serializing_if = "is_default_state")]
    state: ExecState,
    #[serde(default, skip_serializing_if = "is_false")]
    pruned: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    children: Vec<NodeRepr>,
}

fn is_default_kind(k: &crate::model::SortKind) -> bool {
    *k == crate::model::SortKind::Task
}
fn is_default_mode(m: &Mode) -> bool {
    *m == Mode::Sequential
}
fn is_default_state(s: &ExecState) -> bool {
    *s == ExecState::Open
}
fn is_false(b: &bool) -> bool {
    !*b
}

impl From<&ArtifactNode> for NodeRepr {
    fn from(node: &ArtifactNode) -> Self {
        NodeRepr {
            label: node.label.name().to_string(),
            kind: node.label.kind(),
            mode: node.child_mode,
            status: node.status.clone(),
            state: node.state,
            pruned: node.pruned,
            children: node.children.iter().map(NodeRepr::from).collect(),
        }
    }
}

impl TryFrom<NodeRepr> for ArtifactNode {
    type Error = ModelError;

    fn try_from(repr: NodeRepr) -> Result<Self, ModelError> {
        let label = Sort::new(repr.label, repr.kind)?;
        let children: Vec<ArtifactNode> = repr
            .children
            .into_iter()
            .map(ArtifactNode::try_from)
            .collect::<Result<_, _>>()?;
        let child_mode = if children.len() <= 1 { Mode::Sequential } else { repr.mode };
        Ok(ArtifactNode {
            label,
            children,
            child_mode,
            status: repr.status,
            state: repr.state,
            pruned: repr.pruned,
        })
    }
}

impl Serialize for Artifact {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            root: NodeRepr,
        }
        Repr { root: NodeRepr::from(&self.root) }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Artifact {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            root: NodeRepr,
        }
        let repr = Repr::deserialize(deserializer)?;
        let root = ArtifactNode::try_from(repr.root).map_err(serde::de::Error::custom)?;
        Ok(Artifact { root })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn state_machine_accepts_only_forward_transitions() {
        let mut node = ArtifactNode::leaf(Sort::task("X"));
        assert!(node.mark_closed().is_err()); // Open -> Closed
        node.mark_executed().unwrap();
        assert!(node.mark_executed().is_err()); // Executed -> Executed
        node.mark_closed().unwrap();
        assert!(node.mark_executed().is_err()); // Closed -> Executed
        assert!(node.mark_closed().is_err()); // Closed -> Closed
    }

    #[test]
    fn status_is_write_once() {
        let mut node = ArtifactNode::leaf(Sort::task("X"));
        node.write_status("first").unwrap();
        assert_eq!(node.status(), Some("first"));
        assert_eq!(node.write_status("second"), Err(ModelError::StatusAlreadySet));
    }

    #[test]
    fn preorder_paths_are_stable() {
        let tree = Artifact::new(ArtifactNode::internal(
            Sort::task("A"),
            Mode::Sequential,
            vec![
                ArtifactNode::internal(
                    Sort::task("B"),
                    Mode::Parallel,
                    vec![ArtifactNode::leaf(Sort::task("C")), ArtifactNode::leaf(Sort::task("D"))],
                ),
                ArtifactNode::leaf(Sort::task("E")),
            ],
        ));
        let labels: Vec<String> =
            tree.preorder().iter().map(|(_, n)| n.label().name().to_string()).collect();
        assert_eq!(labels, ["A", "B", "C", "D", "E"]);
        let paths: Vec<String> = tree.preorder().iter().map(|(p, _)| p.to_string()).collect();
        assert_eq!(paths, ["/", "/0", "/0/0", "/0/1", "/1"]);
    }

    #[test]
    fn shape_comparison_ignores_state_and_status() {
        let mut a = Artifact::new(ArtifactNode::leaf(Sort::task("X")));
        let b = a.clone();
        let root = a.node_mut(&NodePath::root()).unwrap();
        root.mark_executed().unwrap();
        root.write_status("done").unwrap();
        assert!(a.same_shape(&b));
        assert_ne!(a, b);
    }

    #[test]
    fn invariant_check_rejects_bad_trees() {
        // Pruned node with children.
        let json = r#"{"root":{"label":"X","pruned":true,"children":[{"label":"Y"}]}}"#;
        let artifact: Artifact = serde_json::from_str(json).unwrap();
        assert!(artifact.check_invariants().is_err());

        // Pruned node that repeats no ancestor label.
        let json = r#"{"root":{"label":"X","children":[{"label":"Y","pruned":true}]}}"#;
        let artifact: Artifact = serde_json::from_str(json).unwrap();
        assert!(artifact.check_invariants().is_err());

        // Closed parent with open child.
        let json = r#"{"root":{"label":"X","state":"Closed","children":[{"label":"X2"}]}}"#;
        let artifact: Artifact = serde_json::from_str(json).unwrap();
        assert!(artifact.check_invariants().is_err());

        // A well-formed pruned second occurrence passes.
        let json = r#"{"root":{"label":"X","children":[{"label":"X","pruned":true}]}}"#;
        let artifact: Artifact = serde_json::from_str(json).unwrap();
        assert!(artifact.check_invariants().is_ok());
    }

    #[test]
    fn artifact_serde_roundtrip_is_lossless() {
        let mut inner = ArtifactNode::internal(
            Sort::task("A"),
            Mode::Parallel,
            vec![
                ArtifactNode::leaf(Sort::restructuring("S")),
                ArtifactNode::leaf(Sort::task("B")),
            ],
        );
        inner.mark_executed().unwrap();
        inner.write_status("text payload").unwrap();
        let artifact = Artifact::new(inner);
        let json = serde_json::to_string(&artifact).unwrap();
        let back: Artifact = serde_json::from_str(&json).unwrap();
        assert_eq!(back, artifact);
    }
}
