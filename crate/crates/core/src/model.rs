//! Core domain types: sorts, productions, grammatical workflow models (GMWf),
//! actor accreditations and the full process model (GMAWfP).
//!
//! All types are immutable after construction; constructors enforce the
//! structural invariants and reject ill-formed inputs with [`ModelError`].
//! Values obtained through deserialization bypass the constructors, which is
//! why [`crate::validation`] re-checks every constructor invariant.

use std::fmt;

use indexmap::IndexSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Whether a grammatical symbol stands for a concrete process task or for a
/// flow-restructuring symbol introduced to keep every decomposition purely
/// sequential or purely parallel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SortKind {
    Task,
    Restructuring,
}

impl Default for SortKind {
    fn default() -> Self {
        SortKind::Task
    }
}

/// A grammatical symbol. Equality and ordering include the kind, so a task
/// `A` and a restructuring symbol `A` are distinct values (and rejected as a
/// duplicate name by [`GMWf::new`]).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Sort {
    name: String,
    kind: SortKind,
}

impl Sort {
    pub fn new(name: impl Into<String>, kind: SortKind) -> Result<Self, ModelError> {
        let name = name.into();
        if name.is_empty() {
            return Err(ModelError::EmptySortName);
        }
        Ok(Sort { name, kind })
    }

    /// Shorthand for a task sort; panics on an empty name.
    pub fn task(name: impl Into<String>) -> Self {
        Sort::new(name, SortKind::Task).expect("task sort name must be non-empty")
    }

    /// Shorthand for a restructuring sort; panics on an empty name.
    pub fn restructuring(name: impl Into<String>) -> Self {
        Sort::new(name, SortKind::Restructuring).expect("restructuring sort name must be non-empty")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> SortKind {
        self.kind
    }

    pub fn is_task(&self) -> bool {
        self.kind == SortKind::Task
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// Scheduling annotation of a decomposition: children run strictly left to
/// right (`Sequential`, the paper-style `;`) or may interleave (`Parallel`,
/// `||`). A production carries exactly one mode for its whole right-hand
/// side; mixed annotations are unrepresentable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    Sequential,
    Parallel,
}

impl Default for Mode {
    fn default() -> Self {
        Mode::Sequential
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Sequential => f.write_str("sequential"),
            Mode::Parallel => f.write_str("parallel"),
        }
    }
}

/// A precedence rule `lhs -> rhs` with a single scheduling mode.
///
/// An empty right-hand side encodes an epsilon production ("the task is not
/// decomposable"). Right-hand sides of length zero or one carry the
/// canonical mode `Sequential` — the two rule forms coincide there, and
/// canonicalizing keeps structural equality of derived productions
/// well-defined.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Production {
    id: String,
    lhs: Sort,
    rhs: Vec<Sort>,
    mode: Mode,
}

impl Production {
    pub fn new(id: impl Into<String>, lhs: Sort, rhs: Vec<Sort>, mode: Mode) -> Self {
        let mode = if rhs.len() <= 1 { Mode::Sequential } else { mode };
        Production { id: id.into(), lhs, rhs, mode }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn lhs(&self) -> &Sort {
        &self.lhs
    }

    pub fn rhs(&self) -> &[Sort] {
        &self.rhs
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn is_epsilon(&self) -> bool {
        self.rhs.is_empty()
    }

    /// Structural identity (left-hand side, right-hand side, mode) — the id
    /// does not participate. Used for deduplication.
    pub fn same_rule(&self, other: &Production) -> bool {
        self.lhs == other.lhs && self.rhs == other.rhs && self.mode == other.mode
    }
}

impl fmt::Display for Production {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} ->", self.id, self.lhs)?;
        if self.rhs.is_empty() {
            return write!(f, " .");
        }
        let sep = match self.mode {
            Mode::Sequential => " ;",
            Mode::Parallel => " ||",
        };
        for (i, sort) in self.rhs.iter().enumerate() {
            if i == 0 {
                write!(f, " {sort}")?;
            } else {
                write!(f, "{sep} {sort}")?;
            }
        }
        Ok(())
    }
}

/// A grammatical model of workflow: a finite sort set, an ordered list of
/// two-form productions and a non-empty axiom set (the tasks that may start
/// an execution scenario).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GMWf {
    sorts: IndexSet<Sort>,
    productions: Vec<Production>,
    axioms: IndexSet<Sort>,
}

impl GMWf {
    /// Builds a GMWf, rejecting duplicate sort names, references to sorts
    /// outside the declared set, duplicate production ids and empty axiom
    /// sets.
    pub fn new(
        sorts: impl IntoIterator<Item = Sort>,
        productions: Vec<Production>,
        axioms: impl IntoIterator<Item = Sort>,
    ) -> Result<Self, ModelError> {
        let mut sort_set = IndexSet::new();
        for sort in sorts {
            if sort_set.iter().any(|s: &Sort| s.name() == sort.name()) {
                return Err(ModelError::DuplicateSortName(sort.name().to_string()));
            }
            sort_set.insert(sort);
        }

        let mut axiom_set = IndexSet::new();
        for axiom in axioms {
            if !sort_set.contains(&axiom) {
                return Err(ModelError::UnknownSort(axiom.name().to_string()));
            }
            axiom_set.insert(axiom);
        }
        if axiom_set.is_empty() {
            return Err(ModelError::EmptyAxioms);
        }

        let mut ids = IndexSet::new();
        for production in &productions {
            if !ids.insert(production.id().to_string()) {
                return Err(ModelError::DuplicateProductionId(production.id().to_string()));
            }
            if !sort_set.contains(production.lhs()) {
                return Err(ModelError::UnknownSort(production.lhs().name().to_string()));
            }
            for sort in production.rhs() {
                if !sort_set.contains(sort) {
                    return Err(ModelError::UnknownSort(sort.name().to_string()));
                }
            }
        }

        Ok(GMWf { sorts: sort_set, productions, axioms: axiom_set })
    }

    pub fn sorts(&self) -> &IndexSet<Sort> {
        &self.sorts
    }

    pub fn axioms(&self) -> &IndexSet<Sort> {
        &self.axioms
    }

    pub fn productions(&self) -> &[Production] {
        &self.productions
    }

    pub fn sort_named(&self, name: &str) -> Option<&Sort> {
        self.sorts.iter().find(|s| s.name() == name)
    }

    pub fn production(&self, id: &str) -> Option<&Production> {
        self.productions.iter().find(|p| p.id() == id)
    }

    /// All productions with the given left-hand sort, in declaration order.
    pub fn productions_for(&self, sort: &Sort) -> Result<Vec<&Production>, ModelError> {
        if !self.sorts.contains(sort) {
            return Err(ModelError::UnknownSort(sort.name().to_string()));
        }
        Ok(self.productions.iter().filter(|p| p.lhs() == sort).collect())
    }
}

/// Per-actor rights over the sorts of a GMWf: `read` (the actor's view),
/// `write` (may execute the task) and `execute` (may request execution from
/// a writer). Writing implies reading.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Accreditation {
    actor: String,
    read: IndexSet<Sort>,
    write: IndexSet<Sort>,
    execute: IndexSet<Sort>,
}

impl Accreditation {
    pub fn new(
        actor: impl Into<String>,
        read: impl IntoIterator<Item = Sort>,
        write: impl IntoIterator<Item = Sort>,
        execute: impl IntoIterator<Item = Sort>,
        gmwf: &GMWf,
    ) -> Result<Self, ModelError> {
        let actor = actor.into();
        let read: IndexSet<Sort> = read.into_iter().collect();
        let write: IndexSet<Sort> = write.into_iter().collect();
        let execute: IndexSet<Sort> = execute.into_iter().collect();
        for sort in read.iter().chain(&write).chain(&execute) {
            if !gmwf.sorts().contains(sort) {
                return Err(ModelError::UnknownSort(sort.name().to_string()));
            }
        }
        if let Some(sort) = write.iter().find(|s| !read.contains(*s)) {
            return Err(ModelError::WriteOutsideRead {
                actor,
                sort: sort.name().to_string(),
            });
        }
        Ok(Accreditation { actor, read, write, execute })
    }

    pub fn actor(&self) -> &str {
        &self.actor
    }

    pub fn read(&self) -> &IndexSet<Sort> {
        &self.read
    }

    pub fn write(&self) -> &IndexSet<Sort> {
        &self.write
    }

    pub fn execute(&self) -> &IndexSet<Sort> {
        &self.execute
    }

    pub fn is_empty(&self) -> bool {
        self.read.is_empty() && self.write.is_empty() && self.execute.is_empty()
    }
}

/// The full process model: a GMWf plus the ordered actor list and one
/// accreditation per actor. The constructor enforces the actor/accreditation
/// bijection and that every task sort has at least one writer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GMAWfP {
    gmwf: GMWf,
    actors: Vec<String>,
    accreditations: Vec<Accreditation>,
}

impl GMAWfP {
    pub fn new(
        gmwf: GMWf,
        actors: Vec<String>,
        accreditations: Vec<Accreditation>,
    ) -> Result<Self, ModelError> {
        if actors.len() != accreditations.len() {
            return Err(ModelError::ActorAccreditationMismatch);
        }
        for (actor, accreditation) in actors.iter().zip(&accreditations) {
            if actor != accreditation.actor() {
                return Err(ModelError::ActorAccreditationMismatch);
            }
        }
        let mut seen = IndexSet::new();
        for actor in &actors {
            if !seen.insert(actor.clone()) {
                return Err(ModelError::DuplicateActor(actor.clone()));
            }
        }
        for sort in gmwf.sorts() {
            if sort.is_task() && !accreditations.iter().any(|a| a.write().contains(sort)) {
                return Err(ModelError::TaskWithoutWriter(sort.name().to_string()));
            }
        }
        Ok(GMAWfP { gmwf, actors, accreditations })
    }

    pub fn gmwf(&self) -> &GMWf {
        &self.gmwf
    }

    pub fn actors(&self) -> &[String] {
        &self.actors
    }

    pub fn accreditations(&self) -> &[Accreditation] {
        &self.accreditations
    }

    pub fn accreditation_for(&self, actor: &str) -> Option<&Accreditation> {
        self.accreditations.iter().find(|a| a.actor() == actor)
    }

    /// Actors accredited in writing on the given sort, in declaration order.
    pub fn writers_of(&self, sort: &Sort) -> Vec<&str> {
        self.accreditations
            .iter()
            .filter(|a| a.write().contains(sort))
            .map(|a| a.actor())
            .collect()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("sort name must be non-empty")]
    EmptySortName,
    #[error("unknown sort {0}")]
    UnknownSort(String),
    #[error("duplicate sort name {0}")]
    DuplicateSortName(String),
    #[error("duplicate production id {0}")]
    DuplicateProductionId(String),
    #[error("axiom set must be non-empty")]
    EmptyAxioms,
    #[error("actor {actor} is accredited in writing on {sort} but not in reading")]
    WriteOutsideRead { actor: String, sort: String },
    #[error("actors and accreditations are not in bijection")]
    ActorAccreditationMismatch,
    #[error("duplicate actor {0}")]
    DuplicateActor(String),
    #[error("task {0} has no writer")]
    TaskWithoutWriter(String),
    #[error("status already written for this node")]
    StatusAlreadySet,
    #[error("illegal execution state transition from {from} to {to}")]
    IllegalTransition { from: String, to: String },
}
