//! Artifact construction: growing scenario trees combination by combination,
//! the pruning rule for repeated labels, exhaustive enumeration of the
//! representative artifacts of a grammar, and normalization of mixed
//! sequential/parallel schedules into two-form productions over fresh
//! restructuring symbols.

use indexmap::IndexSet;
use thiserror::Error;

use crate::artifact::{Artifact, ArtifactNode, NodePath};
use crate::model::{GMWf, Mode, Production, Sort};

/// A group of tasks that can immediately follow a task, executed either in
/// sequence or in parallel.
#[derive(Debug, Clone, PartialEq)]
pub struct Combination {
    tasks: Vec<Sort>,
    mode: Mode,
}

impl Combination {
    pub fn new(tasks: Vec<Sort>, mode: Mode) -> Result<Self, BuildError> {
        if tasks.is_empty() {
            return Err(BuildError::EmptyCombination);
        }
        let mut seen = IndexSet::new();
        for task in &tasks {
            if !seen.insert(task.clone()) {
                return Err(BuildError::RepeatedSortInCombination(task.name().to_string()));
            }
        }
        Ok(Combination { tasks, mode })
    }

    pub fn tasks(&self) -> &[Sort] {
        &self.tasks
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }
}

/// A nested sequential/parallel scheduling expression over sorts, used as
/// input to [`normalize_decomposition`].
#[derive(Debug, Clone, PartialEq)]
pub enum Schedule {
    Sort(Sort),
    Seq(Vec<Schedule>),
    Par(Vec<Schedule>),
}

impl Schedule {
    fn leaves(&self, out: &mut Vec<Sort>) {
        match self {
            Schedule::Sort(s) => out.push(s.clone()),
            Schedule::Seq(items) | Schedule::Par(items) => {
                for item in items {
                    item.leaves(out);
                }
            }
        }
    }

    /// Collapses singleton groups so that structurally equivalent schedules
    /// compare equal: `Seq[x]` and `Par[x]` both mean `x`.
    pub fn canonical(&self) -> Schedule {
        match self {
            Schedule::Sort(s) => Schedule::Sort(s.clone()),
            Schedule::Seq(items) if items.len() == 1 => items[0].canonical(),
            Schedule::Par(items) if items.len() == 1 => items[0].canonical(),
            Schedule::Seq(items) => Schedule::Seq(items.iter().map(Schedule::canonical).collect()),
            Schedule::Par(items) => Schedule::Par(items.iter().map(Schedule::canonical).collect()),
        }
    }

    fn is_empty_group(&self) -> bool {
        match self {
            Schedule::Sort(_) => false,
            Schedule::Seq(items) | Schedule::Par(items) => {
                items.is_empty() || items.iter().any(Schedule::is_empty_group)
            }
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BuildError {
    #[error("combination must contain at least one task")]
    EmptyCombination,
    #[error("sort {0} appears twice in one combination")]
    RepeatedSortInCombination(String),
    #[error("no node at path {0}")]
    InvalidPath(NodePath),
    #[error("node at {0} is not a leaf")]
    NotALeaf(NodePath),
    #[error("node at {0} is pruned and may not be expanded")]
    PrunedNode(NodePath),
    #[error("node at {0} is not a second occurrence of its label")]
    NotASecondOccurrence(NodePath),
    #[error("sort {0} has no production; it can neither be expanded nor end a branch")]
    UnproductiveSort(String),
    #[error("schedule is empty")]
    EmptySchedule,
    #[error("fresh restructuring name {0} collides with an existing sort")]
    FreshNameCollision(String),
    #[error(transparent)]
    Model(#[from] crate::model::ModelError),
}

/// A single-node artifact: the root task, open, unpruned, no status.
pub fn new_artifact(root: Sort) -> Artifact {
    Artifact::new(ArtifactNode::leaf(root))
}

/// Expands the leaf at `path` with the tasks of `combination` as children.
/// The input artifact is left untouched; the expanded tree is returned.
pub fn expand_node(
    artifact: &Artifact,
    path: &NodePath,
    combination: &Combination,
) -> Result<Artifact, BuildError> {
    let node = artifact.node(path).ok_or_else(|| BuildError::InvalidPath(path.clone()))?;
    if node.is_pruned() {
        return Err(BuildError::PrunedNode(path.clone()));
    }
    if !node.is_leaf() {
        return Err(BuildError::NotALeaf(path.clone()));
    }
    let mut expanded = artifact.clone();
    let node = expanded.node_mut(path).expect("path checked above");
    node.children = combination.tasks().iter().cloned().map(ArtifactNode::leaf).collect();
    node.child_mode = if node.children.len() <= 1 { Mode::Sequential } else { combination.mode() };
    Ok(expanded)
}

/// True when the node's label already occurs strictly above it on the path
/// from the root.
pub fn is_second_occurrence(artifact: &Artifact, path: &NodePath) -> Result<bool, BuildError> {
    let node = artifact.node(path).ok_or_else(|| BuildError::InvalidPath(path.clone()))?;
    let ancestors = artifact.ancestors(path).ok_or_else(|| BuildError::InvalidPath(path.clone()))?;
    Ok(ancestors.iter().any(|label| *label == node.label()))
}

/// Marks the leaf at `path` as pruned; it may never be expanded afterwards.
/// Pruning an already-pruned node is a no-op.
pub fn prune(artifact: &Artifact, path: &NodePath) -> Result<Artifact, BuildError> {
    let node = artifact.node(path).ok_or_else(|| BuildError::InvalidPath(path.clone()))?;
    if node.is_pruned() {
        return Ok(artifact.clone());
    }
    if !is_second_occurrence(artifact, path)? {
        return Err(BuildError::NotASecondOccurrence(path.clone()));
    }
    if !node.is_leaf() {
        return Err(BuildError::NotALeaf(path.clone()));
    }
    let mut pruned = artifact.clone();
    pruned.node_mut(path).expect("path checked above").pruned = true;
    Ok(pruned)
}

/// Enumerates, for every axiom, all maximal unfoldings of the grammar where
/// every leaf is either expanded by each applicable production in turn or —
/// when its label repeats an ancestor label — left as a pruned leaf. The
/// result is deduplicated up to shape isomorphism; production choices are
/// explored in declaration order, so the output order is deterministic.
pub fn enumerate_representatives(gmwf: &GMWf) -> Result<Vec<Artifact>, BuildError> {
    let mut out: Vec<Artifact> = Vec::new();
    for axiom in gmwf.axioms() {
        let artifact = new_artifact(axiom.clone());
        grow(gmwf, artifact, vec![NodePath::root()], &mut out)?;
    }
    Ok(out)
}

fn grow(
    gmwf: &GMWf,
    artifact: Artifact,
    mut pending: Vec<NodePath>,
    out: &mut Vec<Artifact>,
) -> Result<(), BuildError> {
    let path = match pending.pop() {
        Some(path) => path,
        None => {
            if !out.iter().any(|seen| seen.same_shape(&artifact)) {
                out.push(artifact);
            }
            return Ok(());
        }
    };

    if is_second_occurrence(&artifact, &path)? {
        // Pruning is systematic at the second occurrence: no choice point.
        let node_pruned = {
            let mut next = artifact.clone();
            next.node_mut(&path).expect("pending paths are valid").pruned = true;
            next
        };
        return grow(gmwf, node_pruned, pending, out);
    }

    let label = artifact.node(&path).expect("pending paths are valid").label().clone();
    let productions = gmwf.productions_for(&label)?;
    if productions.is_empty() {
        return Err(BuildError::UnproductiveSort(label.name().to_string()));
    }
    for production in productions {
        if production.is_epsilon() {
            grow(gmwf, artifact.clone(), pending.clone(), out)?;
        } else {
            let combination =
                Combination { tasks: production.rhs().to_vec(), mode: production.mode() };
            let expanded = expand_node(&artifact, &path, &combination)?;
            let mut next_pending = pending.clone();
            for index in (0..production.rhs().len()).rev() {
                next_pending.push(path.child(index));
            }
            grow(gmwf, expanded, next_pending, out)?;
        }
    }
    Ok(())
}

/// Rewrites a nested schedule for `parent` into two-form productions,
/// introducing a fresh restructuring sort (`fresh_prefix` + counter) for
/// every nesting level beyond the first. Fresh names that collide with the
/// parent or any scheduled sort are rejected.
pub fn normalize_decomposition(
    parent: &Sort,
    schedule: &Schedule,
    fresh_prefix: &str,
) -> Result<Vec<Production>, BuildError> {
    if schedule.is_empty_group() {
        return Err(BuildError::EmptySchedule);
    }
    let schedule = schedule.canonical();

    let mut taken: IndexSet<String> = IndexSet::new();
    taken.insert(parent.name().to_string());
    let mut leaves = Vec::new();
    schedule.leaves(&mut leaves);
    for leaf in &leaves {
        taken.insert(leaf.name().to_string());
    }

    let mut counter = 0usize;
    let mut fresh = |taken: &IndexSet<String>| -> Result<Sort, BuildError> {
        counter += 1;
        let name = format!("{fresh_prefix}{counter}");
        if taken.contains(&name) {
            return Err(BuildError::FreshNameCollision(name));
        }
        Ok(Sort::restructuring(name))
    };

    // Worklist of groups still to lower; a group's production is emitted
    // before the productions of the groups nested inside it.
    let top = match &schedule {
        Schedule::Sort(sort) => (parent.clone(), vec![Schedule::Sort(sort.clone())], Mode::Sequential),
        Schedule::Seq(items) => (parent.clone(), items.clone(), Mode::Sequential),
        Schedule::Par(items) => (parent.clone(), items.clone(), Mode::Parallel),
    };
    let mut queue = std::collections::VecDeque::from([top]);
    let mut productions = Vec::new();
    while let Some((lhs, items, mode)) = queue.pop_front() {
        let mut rhs = Vec::new();
        for item in items {
            match item {
                Schedule::Sort(sort) => rhs.push(sort),
                Schedule::Seq(inner) => {
                    let symbol = fresh(&taken)?;
                    rhs.push(symbol.clone());
                    queue.push_back((symbol, inner, Mode::Sequential));
                }
                Schedule::Par(inner) => {
                    let symbol = fresh(&taken)?;
                    rhs.push(symbol.clone());
                    queue.push_back((symbol, inner, Mode::Parallel));
                }
            }
        }
        let id = format!("N{}", productions.len() + 1);
        productions.push(Production::new(id, lhs, rhs, mode));
    }
    Ok(productions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures_test::{peer_review_gmwf, representative_shapes};
    use crate::model::SortKind;
    use proptest::prelude::*;

    fn seq(items: Vec<Schedule>) -> Schedule {
        Schedule::Seq(items)
    }
    fn par(items: Vec<Schedule>) -> Schedule {
        Schedule::Par(items)
    }
    fn leaf(name: &str) -> Schedule {
        Schedule::Sort(Sort::task(name))
    }

    #[test]
    fn new_artifact_is_a_single_open_node() {
        let artifact = new_artifact(Sort::task("A"));
        let root = artifact.root();
        assert_eq!(root.label().name(), "A");
        assert!(root.is_leaf());
        assert!(!root.is_pruned());
        assert_eq!(root.status(), None);
        assert_eq!(root.state(), crate::artifact::ExecState::Open);
    }

    #[test]
    fn expanding_the_root_gives_the_rejection_scenario_shape() {
        let artifact = new_artifact(Sort::task("A"));
        let combination =
            Combination::new(vec![Sort::task("B"), Sort::task("D")], Mode::Sequential).unwrap();
        let expanded = expand_node(&artifact, &NodePath::root(), &combination).unwrap();
        assert_eq!(expanded.node_count(), 3);
        assert!(expanded.same_shape(&representative_shapes()[0]));
        // Persistence: the input artifact is unchanged.
        assert_eq!(artifact, new_artifact(Sort::task("A")));
    }

    #[test]
    fn nested_expansion_builds_the_nominal_scenario_top() {
        let a = new_artifact(Sort::task("A"));
        let a = expand_node(
            &a,
            &NodePath::root(),
            &Combination::new(vec![Sort::task("C"), Sort::task("D")], Mode::Sequential).unwrap(),
        )
        .unwrap();
        let a = expand_node(
            &a,
            &NodePath(vec![0]),
            &Combination::new(vec![Sort::restructuring("S1"), Sort::task("F")], Mode::Sequential)
                .unwrap(),
        )
        .unwrap();
        let a = expand_node(
            &a,
            &NodePath(vec![0, 0]),
            &Combination::new(vec![Sort::task("E1"), Sort::task("E2")], Mode::Parallel).unwrap(),
        )
        .unwrap();
        let s1 = a.node(&NodePath(vec![0, 0])).unwrap();
        assert_eq!(s1.child_mode(), Mode::Parallel);
        assert_eq!(s1.children().len(), 2);
        assert_eq!(a.node(&NodePath(vec![0, 0, 0])).unwrap().label().name(), "E1");
    }

    #[test]
    fn expanding_a_non_leaf_fails() {
        let artifact = new_artifact(Sort::task("A"));
        let combination = Combination::new(vec![Sort::task("B")], Mode::Sequential).unwrap();
        let expanded = expand_node(&artifact, &NodePath::root(), &combination).unwrap();
        let err = expand_node(&expanded, &NodePath::root(), &combination).unwrap_err();
        assert!(matches!(err, BuildError::NotALeaf(_)));
    }

    #[test]
    fn second_occurrence_detection() {
        // X -> X chain: the inner node repeats the root label.
        let artifact = new_artifact(Sort::task("X"));
        let combination = Combination::new(vec![Sort::task("X")], Mode::Sequential).unwrap();
        let chained = expand_node(&artifact, &NodePath::root(), &combination).unwrap();
        assert!(is_second_occurrence(&chained, &NodePath(vec![0])).unwrap());
        assert!(!is_second_occurrence(&chained, &NodePath::root()).unwrap());

        // In the nominal scenario, G1 under E1 is a first occurrence.
        let shapes = representative_shapes();
        let art2 = &shapes[1];
        let g1_path = NodePath(vec![0, 0, 0, 0]);
        assert_eq!(art2.node(&g1_path).unwrap().label().name(), "G1");
        assert!(!is_second_occurrence(art2, &g1_path).unwrap());
    }

    #[test]
    fn prune_marks_second_occurrences_and_rejects_others() {
        let artifact = new_artifact(Sort::task("X"));
        let combination = Combination::new(vec![Sort::task("X")], Mode::Sequential).unwrap();
        let chained = expand_node(&artifact, &NodePath::root(), &combination).unwrap();

        let err = prune(&chained, &NodePath::root()).unwrap_err();
        assert!(matches!(err, BuildError::NotASecondOccurrence(_)));

        let pruned = prune(&chained, &NodePath(vec![0])).unwrap();
        assert!(pruned.node(&NodePath(vec![0])).unwrap().is_pruned());

        // Idempotent: pruning again succeeds without change.
        let again = prune(&pruned, &NodePath(vec![0])).unwrap();
        assert_eq!(again, pruned);

        // The pruned leaf may never be expanded.
        let err = expand_node(&pruned, &NodePath(vec![0]), &combination).unwrap_err();
        assert!(matches!(err, BuildError::PrunedNode(_)));
    }

    #[test]
    fn peer_review_has_exactly_five_representatives() {
        let gmwf = peer_review_gmwf();
        let artifacts = enumerate_representatives(&gmwf).unwrap();
        assert_eq!(artifacts.len(), 5);
        let expected = representative_shapes();
        // Same set up to isomorphism, and pairwise non-isomorphic.
        for artifact in &artifacts {
            assert!(expected.iter().any(|e| e.same_shape(artifact)));
        }
        for i in 0..artifacts.len() {
            for j in i + 1..artifacts.len() {
                assert!(!artifacts[i].same_shape(&artifacts[j]));
            }
        }
    }

    #[test]
    fn single_epsilon_grammar_has_one_representative() {
        let x = Sort::task("X");
        let gmwf = GMWf::new(
            [x.clone()],
            vec![Production::new("P1", x.clone(), vec![], Mode::Sequential)],
            [x],
        )
        .unwrap();
        let artifacts = enumerate_representatives(&gmwf).unwrap();
        assert_eq!(artifacts.len(), 1);
        assert!(artifacts[0].root().is_leaf());
        assert!(!artifacts[0].root().is_pruned());
    }

    #[test]
    fn self_recursive_grammar_yields_leaf_and_pruned_chain() {
        let x = Sort::task("X");
        let gmwf = GMWf::new(
            [x.clone()],
            vec![
                Production::new("P1", x.clone(), vec![x.clone()], Mode::Sequential),
                Production::new("P2", x.clone(), vec![], Mode::Sequential),
            ],
            [x],
        )
        .unwrap();
        let artifacts = enumerate_representatives(&gmwf).unwrap();
        assert_eq!(artifacts.len(), 2);
        // Declaration order: the recursive production is explored first.
        assert_eq!(artifacts[0].node_count(), 2);
        assert!(artifacts[0].node(&NodePath(vec![0])).unwrap().is_pruned());
        assert!(artifacts[1].root().is_leaf());
    }

    #[test]
    fn sort_without_productions_is_reported() {
        let x = Sort::task("X");
        let y = Sort::task("Y");
        let gmwf = GMWf::new(
            [x.clone(), y.clone()],
            vec![Production::new("P1", x.clone(), vec![y], Mode::Sequential)],
            [x],
        )
        .unwrap();
        let err = enumerate_representatives(&gmwf).unwrap_err();
        assert_eq!(err, BuildError::UnproductiveSort("Y".into()));
    }

    #[test]
    fn normalization_examples() {
        // (E1 || E2) ; F under C.
        let productions = normalize_decomposition(
            &Sort::task("C"),
            &seq(vec![par(vec![leaf("E1"), leaf("E2")]), leaf("F")]),
            "S",
        )
        .unwrap();
        let rendered: Vec<String> = productions.iter().map(|p| p.to_string()).collect();
        assert_eq!(rendered, ["N1: C -> S1 ; F", "N2: S1 -> E1 || E2"]);
        assert_eq!(productions[1].lhs().kind(), SortKind::Restructuring);

        // A ; B needs no fresh symbol.
        let productions =
            normalize_decomposition(&Sort::task("X"), &seq(vec![leaf("A"), leaf("B")]), "S")
                .unwrap();
        let rendered: Vec<String> = productions.iter().map(|p| p.to_string()).collect();
        assert_eq!(rendered, ["N1: X -> A ; B"]);

        // (A || (B ; C)) ; D.
        let productions = normalize_decomposition(
            &Sort::task("X"),
            &seq(vec![par(vec![leaf("A"), seq(vec![leaf("B"), leaf("C")])]), leaf("D")]),
            "S",
        )
        .unwrap();
        let rendered: Vec<String> = productions.iter().map(|p| p.to_string()).collect();
        assert_eq!(rendered, ["N1: X -> S1 ; D", "N2: S1 -> A || S2", "N3: S2 -> B ; C"]);
    }

    #[test]
    fn normalization_rejects_empty_schedules_and_name_collisions() {
        let err =
            normalize_decomposition(&Sort::task("X"), &Schedule::Seq(vec![]), "S").unwrap_err();
        assert_eq!(err, BuildError::EmptySchedule);

        let err = normalize_decomposition(
            &Sort::task("X"),
            &seq(vec![par(vec![leaf("S1"), leaf("B")]), leaf("D")]),
            "S",
        )
        .unwrap_err();
        assert_eq!(err, BuildError::FreshNameCollision("S1".into()));
    }

    /// Test-side flattening: substitute each fresh restructuring sort by its
    /// group until only the scheduled sorts remain.
    fn flatten(parent: &Sort, productions: &[Production]) -> Schedule {
        let top = productions.iter().find(|p| p.lhs() == parent).expect("parent production");
        fn expand(sort: &Sort, productions: &[Production]) -> Schedule {
            match productions.iter().find(|p| p.lhs() == sort) {
                None => Schedule::Sort(sort.clone()),
                Some(p) => group(p, productions),
            }
        }
        fn group(p: &Production, productions: &[Production]) -> Schedule {
            let items: Vec<Schedule> =
                p.rhs().iter().map(|s| expand(s, productions)).collect();
            match p.mode() {
                Mode::Sequential => Schedule::Seq(items),
                Mode::Parallel => Schedule::Par(items),
            }
        }
        group(top, productions)
    }

    fn arbitrary_schedule(depth: u32) -> impl Strategy<Value = Schedule> {
        let names = prop::sample::select(vec!["A", "B", "C", "D", "E", "G"]);
        let leaf_strategy = names.prop_map(|n| Schedule::Sort(Sort::task(n)));
        leaf_strategy.prop_recursive(depth, 24, 4, |inner| {
            prop_oneof![
                prop::collection::vec(inner.clone(), 2..4).prop_map(Schedule::Seq),
                prop::collection::vec(inner, 2..4).prop_map(Schedule::Par),
            ]
        })
    }

    proptest! {
        /// Flattening the generated productions recovers the input schedule,
        /// and no production requires mixed annotations (guaranteed by the
        /// Production type itself — here we check the round trip).
        #[test]
        fn normalization_roundtrip(schedule in arbitrary_schedule(4)) {
            let parent = Sort::task("Root");
            prop_assume!(!schedule.is_empty_group());
            let productions = match normalize_decomposition(&parent, &schedule, "S") {
                Ok(p) => p,
                // Generated leaves never collide with the S-prefix, so
                // normalization cannot fail here.
                Err(e) => return Err(TestCaseError::fail(format!("{e}"))),
            };
            let flattened = flatten(&parent, &productions).canonical();
            prop_assert_eq!(flattened, schedule.canonical());
        }

        /// Every path of every representative artifact carries at most two
        /// occurrences of any label, the second being a pruned leaf.
        #[test]
        fn representative_depth_bound(seed in 0u64..200) {
            let gmwf = crate::fixtures_test::small_random_gmwf(seed);
            let artifacts = enumerate_representatives(&gmwf).unwrap();
            for artifact in &artifacts {
                for (path, node) in artifact.preorder() {
                    let above = artifact.ancestors(&path).unwrap();
                    let repeats = above.iter().filter(|l| **l == node.label()).count();
                    prop_assert!(repeats <= 1);
                    if repeats == 1 {
                        prop_assert!(node.is_pruned());
                        prop_assert!(node.is_leaf());
                    }
                }
            }
        }
    }
}
