//! Actor perception: an actor's view is the set of sorts it may read.
//! Artifacts and grammars are projected onto a view by contracting every
//! node outside it, promoting its children in place.
//!
//! Contraction semantics: preserved nodes keep their ancestor ordering.
//! When a contracted node's group of promoted children carries a different
//! scheduling mode than the decomposition it lands in, the group is kept
//! together under a synthetic restructuring node (labelled `~1`, `~2`, ... in
//! creation order) so that ordering information is never silently lost.
//! Synthetic labels are deterministic per projection call, which makes
//! projection idempotent; the `~` prefix is reserved and cannot be declared
//! in specification files.

use indexmap::IndexSet;
use thiserror::Error;

use crate::artifact::{Artifact, ArtifactNode};
use crate::builder::enumerate_representatives;
use crate::derivation::derive_gmwf;
use crate::model::{GMAWfP, GMWf, Mode, Sort};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ViewError {
    #[error("unknown actor {0}")]
    UnknownActor(String),
    #[error("the artifact root is outside the view and more than one visible subtree remains")]
    InvisibleRootForest,
    #[error(transparent)]
    Build(#[from] crate::builder::BuildError),
    #[error(transparent)]
    Derive(#[from] crate::derivation::DeriveError),
}

/// The given actor's view: the sorts it is accredited in reading.
pub fn view_of<'a>(model: &'a GMAWfP, actor: &str) -> Result<&'a IndexSet<Sort>, ViewError> {
    model
        .accreditation_for(actor)
        .map(Accreditation::read_set)
        .ok_or_else(|| ViewError::UnknownActor(actor.to_string()))
}

// Small helper so view_of can stay a plain function pointer chain.
use crate::model::Accreditation;
trait ReadSet {
    fn read_set(&self) -> &IndexSet<Sort>;
}
impl ReadSet for Accreditation {
    fn read_set(&self) -> &IndexSet<Sort> {
        self.read()
    }
}

/// Projects an artifact onto a view. Returns `None` when no node of the
/// artifact is visible (the empty-artifact marker); fails with
/// [`ViewError::InvisibleRootForest`] when the root is invisible and two or
/// more visible subtrees remain side by side.
pub fn project_artifact(
    artifact: &Artifact,
    view: &IndexSet<Sort>,
) -> Result<Option<Artifact>, ViewError> {
    let mut counter = 0usize;
    let (group, _) = project_node(artifact.root(), view, &mut counter);
    match group.len() {
        0 => Ok(None),
        1 => Ok(Some(Artifact::new(group.into_iter().next().expect("length checked")))),
        _ => Err(ViewError::InvisibleRootForest),
    }
}

/// Returns the visible trees produced by this subtree together with the
/// scheduling mode that governs them as a group.
fn project_node(
    node: &ArtifactNode,
    view: &IndexSet<Sort>,
    counter: &mut usize,
) -> (Vec<ArtifactNode>, Mode) {
    let mut assembled: Vec<ArtifactNode> = Vec::new();
    for child in node.children() {
        let visible = view.contains(child.label());
        let (group, group_mode) = project_node(child, view, counter);
        if visible {
            assembled.extend(group);
        } else if group.len() >= 2 && group_mode != node.child_mode() {
            assembled.push(wrap_group(child, group, group_mode, counter));
        } else {
            assembled.extend(group);
        }
    }

    if view.contains(node.label()) {
        let mut projected = node.clone();
        projected.children = assembled;
        if projected.children.len() <= 1 {
            projected.child_mode = Mode::Sequential;
        }
        (vec![projected], node.child_mode())
    } else {
        (assembled, node.child_mode())
    }
}

/// A synthetic restructuring node standing in for a contracted node whose
/// children's mode differs from the surrounding decomposition. It inherits
/// the contracted node's execution state but never its status payload.
fn wrap_group(
    contracted: &ArtifactNode,
    group: Vec<ArtifactNode>,
    mode: Mode,
    counter: &mut usize,
) -> ArtifactNode {
    *counter += 1;
    let mut wrapper =
        ArtifactNode::internal(Sort::restructuring(format!("~{counter}")), mode, group);
    wrapper.state = contracted.state();
    wrapper
}

/// The grammar of the projected scenarios: every representative artifact of
/// `gmwf` is projected onto the view and the grammar is re-derived from the
/// non-empty projections.
pub fn project_gmwf(gmwf: &GMWf, view: &IndexSet<Sort>) -> Result<GMWf, ViewError> {
    let mut projected = Vec::new();
    for artifact in enumerate_representatives(gmwf)? {
        if let Some(tree) = project_artifact(&artifact, view)? {
            projected.push(tree);
        }
    }
    Ok(derive_gmwf(&projected, &[])?)
}
