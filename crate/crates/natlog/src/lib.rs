//! Natlog: an embeddable logic programming engine over nested-tuple terms.
//!
//! Programs are Horn clauses in a word-based surface syntax; resolution is
//! depth-first with clause order preserved, answers arrive as a lazy
//! stream. Ground datasets load into a separately indexed fact database
//! reachable through `~` goals, with the candidate retrieval step pluggable
//! — including a trained neural classifier behind the same interface.
//!
//! ```
//! use natlog::Natlog;
//!
//! let n = Natlog::from_text("
//!     cat is feline.
//!     feline is mammal.
//!     mammal is animal.
//!     tc A Rel C : A Rel B, tc1 B Rel C.
//!     tc1 B _Rel B.
//!     tc1 B Rel C : tc B Rel C.
//! ").unwrap();
//! let first = n.solve("tc Who is animal ?").unwrap().next().unwrap().unwrap();
//! assert_eq!(first.to_string(), "('tc', 'cat', 'is', 'animal')");
//! ```

pub mod db;
pub mod engine;
pub mod neural;
pub mod programs;
pub mod syntax;
pub mod term;
pub mod unify;

pub use db::{ConstIndexer, DbError, DbFormat, FactDb, FactId, Indexer, PathIndexer};
pub use engine::{
    standard_registry, Answer, EngineError, HostError, HostRegistry, Program, Solver, Val,
};
pub use neural::{Mlp, NeuralIndexer, TrainConfig, TrainError, Vocab};
pub use syntax::{parse_program, parse_query, Clause, Goal, GoalTag, Query, SyntaxError};
pub use term::{ClassicTerm, Constant, Path, Skeleton, Term};

use std::fmt;
use std::path::Path as FsPath;
use std::sync::Arc;

/// Any failure surfaced by the high-level interface.
#[derive(Debug)]
pub enum NatlogError {
    Syntax(SyntaxError),
    Db(DbError),
    Engine(EngineError),
    Train(TrainError),
    Model(neural::ModelFileError),
    Io(std::io::Error),
}

impl fmt::Display for NatlogError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NatlogError::Syntax(e) => write!(f, "{e}"),
            NatlogError::Db(e) => write!(f, "{e}"),
            NatlogError::Engine(e) => write!(f, "{e}"),
            NatlogError::Train(e) => write!(f, "{e}"),
            NatlogError::Model(e) => write!(f, "{e}"),
            NatlogError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for NatlogError {}

impl From<SyntaxError> for NatlogError {
    fn from(e: SyntaxError) -> NatlogError {
        NatlogError::Syntax(e)
    }
}

impl From<DbError> for NatlogError {
    fn from(e: DbError) -> NatlogError {
        NatlogError::Db(e)
    }
}

impl From<EngineError> for NatlogError {
    fn from(e: EngineError) -> NatlogError {
        NatlogError::Engine(e)
    }
}

impl From<TrainError> for NatlogError {
    fn from(e: TrainError) -> NatlogError {
        NatlogError::Train(e)
    }
}

impl From<neural::ModelFileError> for NatlogError {
    fn from(e: neural::ModelFileError) -> NatlogError {
        NatlogError::Model(e)
    }
}

impl From<std::io::Error> for NatlogError {
    fn from(e: std::io::Error) -> NatlogError {
        NatlogError::Io(e)
    }
}

/// A loaded program plus the pieces a derivation needs: optional fact
/// database, candidate indexer, host registry and the occurs-check switch.
/// Everything is shared immutably, so one `Natlog` can serve any number of
/// concurrent answer streams.
#[derive(Clone)]
pub struct Natlog {
    program: Arc<Program>,
    db: Option<Arc<FactDb>>,
    indexer: Arc<dyn Indexer>,
    registry: Arc<HostRegistry>,
    occurs_check: bool,
}

impl Natlog {
    pub fn from_text(src: &str) -> Result<Natlog, NatlogError> {
        Ok(Natlog {
            program: Arc::new(Program::parse(src)?),
            db: None,
            indexer: Arc::new(ConstIndexer::default()),
            registry: Arc::new(standard_registry()),
            occurs_check: false,
        })
    }

    pub fn from_file(path: &FsPath) -> Result<Natlog, NatlogError> {
        let src = std::fs::read_to_string(path)?;
        Natlog::from_text(&src)
    }

    pub fn with_db(mut self, db: FactDb) -> Natlog {
        self.db = Some(Arc::new(db));
        self
    }

    pub fn with_shared_db(mut self, db: Arc<FactDb>) -> Natlog {
        self.db = Some(db);
        self
    }

    pub fn with_indexer(mut self, indexer: impl Indexer + 'static) -> Natlog {
        self.indexer = Arc::new(indexer);
        self
    }

    pub fn with_registry(mut self, registry: HostRegistry) -> Natlog {
        self.registry = Arc::new(registry);
        self
    }

    pub fn with_occurs_check(mut self, on: bool) -> Natlog {
        self.occurs_check = on;
        self
    }

    pub fn program(&self) -> &Program {
        &self.program
    }

    pub fn db(&self) -> Option<&Arc<FactDb>> {
        self.db.as_ref()
    }

    /// Appends clauses to the program (used by the interactive top level).
    pub fn add_clauses(&mut self, src: &str) -> Result<usize, NatlogError> {
        let clauses = parse_program(src)?;
        let n = clauses.len();
        let program = Arc::make_mut(&mut self.program);
        for c in clauses {
            program.add_clause(c);
        }
        Ok(n)
    }

    /// Parses a query and opens its lazy answer stream.
    pub fn solve(&self, query: &str) -> Result<Solver, NatlogError> {
        Ok(self.solve_query(&parse_query(query)?))
    }

    pub fn solve_query(&self, query: &Query) -> Solver {
        Solver::new(
            self.program.clone(),
            query,
            self.db.clone(),
            self.indexer.clone(),
            self.registry.clone(),
            self.occurs_check,
        )
    }
}
