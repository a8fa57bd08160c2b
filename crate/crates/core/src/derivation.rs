//! Grammar extraction: every hierarchical decomposition found in a set of
//! representative artifacts becomes a production, roots become axioms,
//! unpruned leaves get epsilon productions — and the converse membership
//! check of an artifact against a grammar.

use indexmap::IndexSet;
use thiserror::Error;

use crate::artifact::{Artifact, NodePath};
use crate::builder::is_second_occurrence;
use crate::model::{GMWf, Mode, ModelError, Production, Sort};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DeriveError {
    #[error("no artifacts to derive from")]
    EmptyInput,
    #[error("label {0} is used both as a task and as a restructuring symbol")]
    InconsistentKind(String),
    #[error("axioms {0:?} are not a superset of the artifact roots")]
    AxiomsNotSuperset(Vec<String>),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Derives a GMWf from representative artifacts.
///
/// Sorts are all labels plus the extra `restructuring` sorts; axioms are the
/// root labels; each internal decomposition yields one production and each
/// unpruned leaf one epsilon production. Pruned leaves contribute nothing —
/// their label's decompositions are recorded at the first occurrence.
/// Productions are deduplicated structurally and ordered by first encounter
/// over (artifact order, preorder), with ids `P1`, `P2`, ...
pub fn derive_gmwf(
    artifacts: &[Artifact],
    restructuring: &[Sort],
) -> Result<GMWf, DeriveError> {
    if artifacts.is_empty() {
        return Err(DeriveError::EmptyInput);
    }

    let mut sorts: IndexSet<Sort> = IndexSet::new();
    let register = |sort: &Sort, sorts: &mut IndexSet<Sort>| -> Result<(), DeriveError> {
        if sorts.iter().any(|s| s.name() == sort.name() && s.kind() != sort.kind()) {
            return Err(DeriveError::InconsistentKind(sort.name().to_string()));
        }
        sorts.insert(sort.clone());
        Ok(())
    };

    let mut axioms: IndexSet<Sort> = IndexSet::new();
    let mut rules: Vec<(Sort, Vec<Sort>, Mode)> = Vec::new();
    for artifact in artifacts {
        register(artifact.root().label(), &mut sorts)?;
        axioms.insert(artifact.root().label().clone());
        for (_, node) in artifact.preorder() {
            register(node.label(), &mut sorts)?;
            let rule = if node.is_pruned() {
                continue;
            } else if node.is_leaf() {
                (node.label().clone(), Vec::new(), Mode::Sequential)
            } else {
                let rhs: Vec<Sort> = node.children().iter().map(|c| c.label().clone()).collect();
                for sort in &rhs {
                    register(sort, &mut sorts)?;
                }
                (node.label().clone(), rhs, node.child_mode())
            };
            if !rules.contains(&rule) {
                rules.push(rule);
            }
        }
    }
    for sort in restructuring {
        register(sort, &mut sorts)?;
    }

    let productions: Vec<Production> = rules
        .into_iter()
        .enumerate()
        .map(|(i, (lhs, rhs, mode))| Production::new(format!("P{}", i + 1), lhs, rhs, mode))
        .collect();
    Ok(GMWf::new(sorts, productions, axioms)?)
}

/// Rebuilds a grammar with an explicit axiom set, which must contain every
/// inferred axiom and stay inside the sort set.
pub fn override_axioms(gmwf: &GMWf, axioms: Vec<Sort>) -> Result<GMWf, DeriveError> {
    let missing: Vec<String> = gmwf
        .axioms()
        .iter()
        .filter(|a| !axioms.contains(a))
        .map(|a| a.name().to_string())
        .collect();
    if !missing.is_empty() {
        return Err(DeriveError::AxiomsNotSuperset(missing));
    }
    Ok(GMWf::new(gmwf.sorts().iter().cloned(), gmwf.productions().to_vec(), axioms)?)
}

/// Why an artifact fails to be a derivation tree of a grammar.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub path: NodePath,
    pub reason: String,
}

/// Result of checking an artifact against a grammar: either conforming, or
/// the first violating node in preorder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Conformance {
    pub violation: Option<Violation>,
}

impl Conformance {
    pub fn is_conforming(&self) -> bool {
        self.violation.is_none()
    }
}

/// True when the artifact is a derivation tree of the grammar: the root is
/// an axiom, every internal decomposition matches a production, every
/// unpruned leaf has an epsilon production, and every pruned leaf is a
/// second occurrence of its label along its path.
pub fn conforms(artifact: &Artifact, gmwf: &GMWf) -> Conformance {
    let fail = |path: NodePath, reason: String| Conformance {
        violation: Some(Violation { path, reason }),
    };

    if !gmwf.axioms().contains(artifact.root().label()) {
        return fail(
            NodePath::root(),
            format!("root label {} is not an axiom", artifact.root().label()),
        );
    }
    for (path, node) in artifact.preorder() {
        let label = node.label();
        if node.is_pruned() {
            if !is_second_occurrence(artifact, &path).unwrap_or(false) {
                return fail(
                    path,
                    format!("pruned leaf {label} is not a second occurrence on its path"),
                );
            }
            continue;
        }
        let known = gmwf.sorts().contains(label);
        if node.is_leaf() {
            let has_epsilon = known
                && gmwf
                    .productions_for(label)
                    .map(|ps| ps.iter().any(|p| p.is_epsilon()))
                    .unwrap_or(false);
            if !has_epsilon {
                return fail(path, format!("leaf {label} has no epsilon production"));
            }
        } else {
            let rhs: Vec<&Sort> = node.children().iter().map(|c| c.label()).collect();
            let matched = known
                && gmwf
                    .productions_for(label)
                    .map(|ps| {
                        ps.iter().any(|p| {
                            p.rhs().iter().collect::<Vec<_>>() == rhs
                                && (p.rhs().len() <= 1 || p.mode() == node.child_mode())
                        })
                    })
                    .unwrap_or(false);
            if !matched {
                return fail(
                    path,
                    format!("no production matches the decomposition of {label}"),
                );
            }
        }
    }
    Conformance { violation: None }
}
