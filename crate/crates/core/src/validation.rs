//! Whole-model well-formedness checks: grammar structure, reachability and
//! productivity, accreditation coherence and task/actor cross-checks. All
//! findings are collected into a deterministic [`ValidationReport`] rather
//! than returned as errors, so that models obtained through deserialization
//! (which bypasses the constructors) can still be diagnosed.

use std::fmt;

use indexmap::IndexSet;
use serde::{Deserialize, Serialize};

use crate::model::{GMAWfP, GMWf, Sort, SortKind};

/// Stable machine-readable diagnostic codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiagCode {
    UnknownSort,
    DuplicateSortName,
    DuplicateProductionId,
    EmptyAxioms,
    UnreachableSort,
    NoProductions,
    DuplicateProduction,
    UselessRestructuring,
    RestructuringAxiom,
    NoTerminatingUnfolding,
    NoWriter,
    MultipleWriters,
    XTargetWithoutWriter,
    WriteOutsideRead,
    ActorMismatch,
    EmptyAccreditation,
    RestructuringNotShared,
    SelfExecutionRequest,
}

impl fmt::Display for DiagCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let text = match self {
            DiagCode::UnknownSort => "unknown-sort",
            DiagCode::DuplicateSortName => "duplicate-sort-name",
            DiagCode::DuplicateProductionId => "duplicate-production-id",
            DiagCode::EmptyAxioms => "empty-axioms",
            DiagCode::UnreachableSort => "unreachable-sort",
            DiagCode::NoProductions => "no-productions",
            DiagCode::DuplicateProduction => "duplicate-production",
            DiagCode::UselessRestructuring => "useless-restructuring",
            DiagCode::RestructuringAxiom => "restructuring-axiom",
            DiagCode::NoTerminatingUnfolding => "no-terminating-unfolding",
            DiagCode::NoWriter => "no-writer",
            DiagCode::MultipleWriters => "multiple-writers",
            DiagCode::XTargetWithoutWriter => "x-target-without-writer",
            DiagCode::WriteOutsideRead => "write-outside-read",
            DiagCode::ActorMismatch => "actor-mismatch",
            DiagCode::EmptyAccreditation => "empty-accreditation",
            DiagCode::RestructuringNotShared => "restructuring-not-shared",
            DiagCode::SelfExecutionRequest => "self-execution-request",
        };
        f.write_str(text)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub code: DiagCode,
    pub message: String,
    pub location: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}: {}", self.code, self.location, self.message)
    }
}

/// Errors and warnings collected by a validation pass. A model is accepted
/// exactly when `errors` is empty; assembly order is deterministic, so equal
/// models produce byte-identical reports.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub errors: Vec<Diagnostic>,
    pub warnings: Vec<Diagnostic>,
}

impl ValidationReport {
    pub fn is_accepted(&self) -> bool {
        self.errors.is_empty()
    }

    pub fn has_error(&self, code: DiagCode) -> bool {
        self.errors.iter().any(|d| d.code == code)
    }

    pub fn has_warning(&self, code: DiagCode) -> bool {
        self.warnings.iter().any(|d| d.code == code)
    }

    fn error(&mut self, code: DiagCode, location: impl Into<String>, message: impl Into<String>) {
        self.errors.push(Diagnostic { code, message: message.into(), location: location.into() });
    }

    fn warn(&mut self, code: DiagCode, location: impl Into<String>, message: impl Into<String>) {
        self.warnings.push(Diagnostic { code, message: message.into(), location: location.into() });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for diagnostic in &self.errors {
            writeln!(f, "error {diagnostic}")?;
        }
        for diagnostic in &self.warnings {
            writeln!(f, "warning {diagnostic}")?;
        }
        write!(f, "{} error(s), {} warning(s)", self.errors.len(), self.warnings.len())
    }
}

fn reachable_sorts(gmwf: &GMWf) -> IndexSet<Sort> {
    let mut seen: IndexSet<Sort> = gmwf.axioms().iter().cloned().collect();
    loop {
        let mut grew = false;
        for production in gmwf.productions() {
            if seen.contains(production.lhs()) {
                for sort in production.rhs() {
                    grew |= seen.insert(sort.clone());
                }
            }
        }
        if !grew {
            return seen;
        }
    }
}

/// Least fixpoint of productivity: a sort is productive when one of its
/// productions has an all-productive right-hand side (epsilon productions
/// are trivially productive).
fn productive_sorts(gmwf: &GMWf) -> IndexSet<Sort> {
    let mut productive: IndexSet<Sort> = IndexSet::new();
    loop {
        let mut grew = false;
        for production in gmwf.productions() {
            if !productive.contains(production.lhs())
                && production.rhs().iter().all(|s| productive.contains(s))
            {
                productive.insert(production.lhs().clone());
                grew = true;
            }
        }
        if !grew {
            return productive;
        }
    }
}

/// Structural checks on a grammar. Constructor-level conditions (duplicate
/// names, unknown sorts, empty axioms) are re-checked so that deserialized
/// values get the same scrutiny.
pub fn validate_gmwf(gmwf: &GMWf) -> ValidationReport {
    let mut report = ValidationReport::default();

    let mut names: IndexSet<&str> = IndexSet::new();
    for sort in gmwf.sorts() {
        if !names.insert(sort.name()) {
            report.error(
                DiagCode::DuplicateSortName,
                sort.name(),
                format!("sort name {} is declared more than once", sort.name()),
            );
        }
    }
    if gmwf.axioms().is_empty() {
        report.error(DiagCode::EmptyAxioms, "axioms", "the axiom set is empty");
    }
    for axiom in gmwf.axioms() {
        if !gmwf.sorts().contains(axiom) {
            report.error(
                DiagCode::UnknownSort,
                axiom.name(),
                format!("axiom {} is not a declared sort", axiom.name()),
            );
        }
        if axiom.kind() == SortKind::Restructuring {
            report.warn(
                DiagCode::RestructuringAxiom,
                axiom.name(),
                format!("axiom {} is a restructuring symbol", axiom.name()),
            );
        }
    }

    let mut ids: IndexSet<&str> = IndexSet::new();
    for production in gmwf.productions() {
        if !ids.insert(production.id()) {
            report.error(
                DiagCode::DuplicateProductionId,
                production.id(),
                format!("production id {} is used more than once", production.id()),
            );
        }
        for sort in std::iter::once(production.lhs()).chain(production.rhs()) {
            if !gmwf.sorts().contains(sort) {
                report.error(
                    DiagCode::UnknownSort,
                    production.id(),
                    format!("production {} references undeclared sort {}", production.id(), sort),
                );
            }
        }
    }
    for (i, production) in gmwf.productions().iter().enumerate() {
        if gmwf.productions()[..i].iter().any(|p| p.same_rule(production)) {
            report.error(
                DiagCode::DuplicateProduction,
                production.id(),
                format!("production {production} duplicates an earlier production"),
            );
        }
    }

    let reachable = reachable_sorts(gmwf);
    let productive = productive_sorts(gmwf);
    for sort in gmwf.sorts() {
        if !reachable.contains(sort) {
            report.error(
                DiagCode::UnreachableSort,
                sort.name(),
                format!("sort {sort} is not reachable from any axiom"),
            );
        }
        let own: Vec<_> =
            gmwf.productions().iter().filter(|p| p.lhs() == sort).collect();
        if own.is_empty() {
            report.error(
                DiagCode::NoProductions,
                sort.name(),
                format!("sort {sort} has no production"),
            );
        } else {
            if sort.kind() == SortKind::Restructuring
                && own.iter().all(|p| p.is_epsilon())
                && !gmwf.productions().iter().any(|p| p.rhs().contains(sort))
            {
                report.error(
                    DiagCode::UselessRestructuring,
                    sort.name(),
                    format!("restructuring sort {sort} only derives epsilon and occurs in no right-hand side"),
                );
            }
            if !productive.contains(sort) {
                report.warn(
                    DiagCode::NoTerminatingUnfolding,
                    sort.name(),
                    format!("sort {sort} has no terminating unfolding"),
                );
            }
        }
    }

    report
}

/// Full-model checks: everything from [`validate_gmwf`] plus writer coverage
/// and accreditation coherence. With `strict`, a task with more than one
/// writer is an error.
pub fn validate_gmawfp(model: &GMAWfP, strict: bool) -> ValidationReport {
    let gmwf = model.gmwf();
    let mut report = validate_gmwf(gmwf);

    if model.actors().len() != model.accreditations().len()
        || model
            .actors()
            .iter()
            .zip(model.accreditations())
            .any(|(actor, accreditation)| actor != accreditation.actor())
    {
        report.error(
            DiagCode::ActorMismatch,
            "actors",
            "actors and accreditations are not in bijection",
        );
    }

    for accreditation in model.accreditations() {
        let actor = accreditation.actor();
        for sort in accreditation
            .read()
            .iter()
            .chain(accreditation.write())
            .chain(accreditation.execute())
        {
            if !gmwf.sorts().contains(sort) {
                report.error(
                    DiagCode::UnknownSort,
                    actor,
                    format!("accreditation of {actor} references unknown sort {sort}"),
                );
            }
        }
        for sort in accreditation.write() {
            if !accreditation.read().contains(sort) {
                report.error(
                    DiagCode::WriteOutsideRead,
                    actor,
                    format!("{actor} writes {sort} without reading it"),
                );
            }
        }
    }

    for sort in gmwf.sorts() {
        if !sort.is_task() {
            continue;
        }
        let writers = model.writers_of(sort);
        if writers.is_empty() {
            report.error(
                DiagCode::NoWriter,
                sort.name(),
                format!("task {sort} has no writer"),
            );
        } else if strict && writers.len() > 1 {
            report.error(
                DiagCode::MultipleWriters,
                sort.name(),
                format!("task {sort} has several writers: {}", writers.join(", ")),
            );
        }
    }

    for accreditation in model.accreditations() {
        let actor = accreditation.actor();
        for sort in accreditation.execute() {
            if gmwf.sorts().contains(sort) && model.writers_of(sort).is_empty() {
                report.error(
                    DiagCode::XTargetWithoutWriter,
                    actor,
                    format!("{actor} may request execution of {sort}, which has no writer"),
                );
            }
            if accreditation.write().contains(sort) {
                report.warn(
                    DiagCode::SelfExecutionRequest,
                    actor,
                    format!("{actor} may request execution of {sort} from themselves"),
                );
            }
        }
        if accreditation.is_empty() {
            report.warn(
                DiagCode::EmptyAccreditation,
                actor,
                format!("actor {actor} has an empty accreditation"),
            );
        }
    }

    for sort in gmwf.sorts() {
        if sort.kind() != SortKind::Restructuring {
            continue;
        }
        let blind: Vec<&str> = model
            .accreditations()
            .iter()
            .filter(|a| !a.read().contains(sort))
            .map(|a| a.actor())
            .collect();
        if !blind.is_empty() {
            report.warn(
                DiagCode::RestructuringNotShared,
                sort.name(),
                format!(
                    "restructuring sort {sort} is not readable by every actor (missing: {})",
                    blind.join(", ")
                ),
            );
        }
    }

    report
}
