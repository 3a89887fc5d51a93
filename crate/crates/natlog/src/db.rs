//! Ground-fact database with content-driven indexing.
//!
//! Facts are ground tuples identified by their append position. The base
//! index maps each constant to the set of facts it occurs in; a query's
//! candidates are the intersection of those sets over its constants, taken
//! smallest set first. Optional refinements key candidates on the exact
//! path of each constant and prefilter them by shape. All indexes may
//! return false positives; the ground unification step filters them out.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::io;
use std::ops::ControlFlow;
use std::path::Path as FsPath;

use crate::syntax::{parse_program, SyntaxError};
use crate::term::{Constant, Path, Skeleton, Term};
use crate::unify::{ground_unify, resolve, Env, Trail};

pub type FactId = usize;

/// Path-index keys are capped at this depth; deeper constants fall back to
/// the plain constant index.
pub const MAX_PATH_DEPTH: usize = 16;

/// Maps a query term to candidate fact ids, ascending. Implementations may
/// return false positives: final answers stay sound because every candidate
/// is validated by ground unification. They must not drop a unifiable fact.
pub trait Indexer: Send + Sync {
    fn ground_match_of(&self, db: &FactDb, query: &Term) -> Vec<FactId>;
}

/// Constant-set intersection indexing.
#[derive(Clone, Copy, Debug, Default)]
pub struct ConstIndexer {
    pub skeleton_prefilter: bool,
}

impl Indexer for ConstIndexer {
    fn ground_match_of(&self, db: &FactDb, query: &Term) -> Vec<FactId> {
        let ids = db.ground_match_of(query);
        if self.skeleton_prefilter {
            db.skeleton_prefilter(query, ids)
        } else {
            ids
        }
    }
}

/// Path-to-constant indexing; a refinement of the constant intersection.
#[derive(Clone, Copy, Debug, Default)]
pub struct PathIndexer {
    pub skeleton_prefilter: bool,
}

impl Indexer for PathIndexer {
    fn ground_match_of(&self, db: &FactDb, query: &Term) -> Vec<FactId> {
        let ids = db.ground_match_of_paths(query);
        if self.skeleton_prefilter {
            db.skeleton_prefilter(query, ids)
        } else {
            ids
        }
    }
}

/// Source format for fact files.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DbFormat {
    Nat,
    Csv,
    Tsv,
    Json,
}

impl DbFormat {
    pub fn from_extension(path: &FsPath) -> Option<DbFormat> {
        match path.extension()?.to_str()? {
            "nat" => Some(DbFormat::Nat),
            "csv" => Some(DbFormat::Csv),
            "tsv" => Some(DbFormat::Tsv),
            "json" => Some(DbFormat::Json),
            _ => None,
        }
    }
}

#[derive(Debug)]
pub enum DbError {
    /// The term contains a variable (or, for `.nat` sources, a rule body).
    NonGroundFact(Term),
    Format { message: String, row: usize },
    Syntax(SyntaxError),
    Io(io::Error),
}

impl fmt::Display for DbError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DbError::NonGroundFact(t) => write!(f, "not a ground fact: {t}"),
            DbError::Format { message, row } => write!(f, "row {row}: {message}"),
            DbError::Syntax(e) => write!(f, "{e}"),
            DbError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for DbError {}

impl From<SyntaxError> for DbError {
    fn from(e: SyntaxError) -> DbError {
        DbError::Syntax(e)
    }
}

impl From<io::Error> for DbError {
    fn from(e: io::Error) -> DbError {
        DbError::Io(e)
    }
}

/// Append-only store of ground facts plus their content indexes.
/// Build-then-freeze: mutate while loading, then share read-only.
#[derive(Debug, Default)]
pub struct FactDb {
    facts: Vec<Term>,
    const_index: HashMap<Constant, Vec<FactId>>,
    path_index: Option<HashMap<Path, Vec<FactId>>>,
    skeletons: Option<Vec<Skeleton>>,
}

impl FactDb {
    pub fn new() -> FactDb {
        FactDb::default()
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    pub fn fact(&self, id: FactId) -> &Term {
        &self.facts[id]
    }

    pub fn facts(&self) -> impl Iterator<Item = &Term> {
        self.facts.iter()
    }

    /// The distinct constants occurring in the database, in constant order.
    pub fn constants(&self) -> Vec<Constant> {
        let mut cs: Vec<Constant> = self.const_index.keys().cloned().collect();
        cs.sort();
        cs
    }

    /// Fact ids whose facts contain `c`, ascending; empty if unknown.
    pub fn facts_containing(&self, c: &Constant) -> &[FactId] {
        self.const_index.get(c).map_or(&[], Vec::as_slice)
    }

    /// Appends a ground fact, indexing every constant occurrence in it.
    pub fn add_fact(&mut self, fact: Term) -> Result<FactId, DbError> {
        if !fact.is_ground() {
            return Err(DbError::NonGroundFact(fact));
        }
        let id = self.facts.len();
        for c in fact.constants() {
            push_id(self.const_index.entry(c).or_default(), id);
        }
        if let Some(index) = self.path_index.as_mut() {
            index_paths(index, &fact, id);
        }
        if let Some(skels) = self.skeletons.as_mut() {
            skels.push(fact.skeleton());
        }
        self.facts.push(fact);
        Ok(id)
    }

    /// Builds the path index over the existing facts (no-op if present).
    pub fn build_path_index(&mut self) {
        if self.path_index.is_some() {
            return;
        }
        let mut index: HashMap<Path, Vec<FactId>> = HashMap::new();
        for (id, fact) in self.facts.iter().enumerate() {
            index_paths(&mut index, fact, id);
        }
        self.path_index = Some(index);
    }

    /// Stores per-fact skeletons for shape prefiltering (no-op if present).
    pub fn build_skeletons(&mut self) {
        if self.skeletons.is_some() {
            return;
        }
        self.skeletons = Some(self.facts.iter().map(Term::skeleton).collect());
    }

    pub fn has_path_index(&self) -> bool {
        self.path_index.is_some()
    }

    pub fn has_skeletons(&self) -> bool {
        self.skeletons.is_some()
    }

    /// Candidate ids by constant-set intersection, ascending. A query with
    /// no constants matches everything; a query constant absent from the
    /// database proves there is no match.
    pub fn ground_match_of(&self, query: &Term) -> Vec<FactId> {
        let constants = query.constants();
        if constants.is_empty() {
            return (0..self.facts.len()).collect();
        }
        let mut sets: Vec<&[FactId]> = Vec::with_capacity(constants.len());
        for c in &constants {
            match self.const_index.get(c) {
                Some(ids) => sets.push(ids),
                None => return Vec::new(),
            }
        }
        // start from the rarest constant
        sets.sort_by_key(|ids| ids.len());
        let mut acc = sets[0].to_vec();
        for ids in &sets[1..] {
            if acc.is_empty() {
                break;
            }
            acc = intersect_sorted(&acc, ids);
        }
        acc
    }

    /// Candidate ids keyed on the exact path of each query constant; always
    /// a subset of [`FactDb::ground_match_of`]. Paths deeper than
    /// [`MAX_PATH_DEPTH`] fall back to the constant entry. Without a built
    /// path index this degrades to the constant intersection.
    pub fn ground_match_of_paths(&self, query: &Term) -> Vec<FactId> {
        let Some(path_index) = self.path_index.as_ref() else {
            return self.ground_match_of(query);
        };
        let paths = query.constant_paths();
        if paths.is_empty() {
            return (0..self.facts.len()).collect();
        }
        let mut sets: Vec<&[FactId]> = Vec::with_capacity(paths.len());
        for p in &paths {
            let ids = if p.steps.len() <= MAX_PATH_DEPTH {
                path_index.get(p).map(Vec::as_slice)
            } else {
                self.const_index.get(&p.constant).map(Vec::as_slice)
            };
            match ids {
                Some(ids) => sets.push(ids),
                None => return Vec::new(),
            }
        }
        sets.sort_by_key(|ids| ids.len());
        let mut acc = sets[0].to_vec();
        for ids in &sets[1..] {
            if acc.is_empty() {
                break;
            }
            acc = intersect_sorted(&acc, ids);
        }
        acc
    }

    /// Keeps the candidates whose shape is compatible with the query's;
    /// never removes a unifiable fact. Identity when skeletons are absent.
    pub fn skeleton_prefilter(&self, query: &Term, candidates: Vec<FactId>) -> Vec<FactId> {
        let Some(skeletons) = self.skeletons.as_ref() else {
            return candidates;
        };
        let query_skel = query.skeleton();
        candidates
            .into_iter()
            .filter(|&id| query_skel.matches_ground(&skeletons[id]))
            .collect()
    }

    /// Loads facts from a file, selecting the format by extension unless
    /// one is given. Returns the number of facts added.
    pub fn load_path(&mut self, path: &FsPath, format: Option<DbFormat>) -> Result<usize, DbError> {
        let format = match format {
            Some(f) => f,
            None => DbFormat::from_extension(path).ok_or_else(|| DbError::Format {
                message: format!("cannot infer format of {}", path.display()),
                row: 0,
            })?,
        };
        let text = fs::read_to_string(path)?;
        self.load_str(&text, format)
    }

    pub fn load_str(&mut self, text: &str, format: DbFormat) -> Result<usize, DbError> {
        match format {
            DbFormat::Nat => self.add_nat(text),
            DbFormat::Csv => self.add_csv(text),
            DbFormat::Tsv => self.add_tsv(text),
            DbFormat::Json => self.add_json(text),
        }
    }

    /// Fact sentences in surface syntax; rules are rejected.
    pub fn add_nat(&mut self, text: &str) -> Result<usize, DbError> {
        let clauses = parse_program(text)?;
        let mut count = 0;
        for clause in clauses {
            if !clause.body.is_empty() {
                return Err(DbError::NonGroundFact(clause.head));
            }
            self.add_fact(clause.head)?;
            count += 1;
        }
        Ok(count)
    }

    /// RFC-4180 CSV; every cell becomes a symbolic text constant.
    pub fn add_csv(&mut self, text: &str) -> Result<usize, DbError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(text.as_bytes());
        let mut count = 0;
        for (row, record) in reader.records().enumerate() {
            let record = record.map_err(|e| DbError::Format { message: e.to_string(), row: row + 1 })?;
            let cells: Vec<Term> = record.iter().map(Term::sym).collect();
            if cells.is_empty() {
                continue;
            }
            self.add_fact(Term::tup(cells))?;
            count += 1;
        }
        Ok(count)
    }

    /// Tab-separated rows without quoting; cells may contain spaces.
    pub fn add_tsv(&mut self, text: &str) -> Result<usize, DbError> {
        let mut count = 0;
        for line in text.lines() {
            if line.is_empty() {
                continue;
            }
            let cells: Vec<Term> = line.split('\t').map(Term::sym).collect();
            self.add_fact(Term::tup(cells))?;
            count += 1;
        }
        Ok(count)
    }

    /// A JSON document maps to one deep ground fact: arrays become tuples,
    /// objects become tuples of `(key value)` pairs in document order, and
    /// scalars become text constants.
    pub fn add_json(&mut self, text: &str) -> Result<usize, DbError> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| DbError::Format {
                message: e.to_string(),
                row: e.line(),
            })?;
        self.add_fact(json_to_term(&value))?;
        Ok(1)
    }
}

fn json_to_term(value: &serde_json::Value) -> Term {
    use serde_json::Value;
    match value {
        Value::Null => Term::sym("null"),
        Value::Bool(b) => Term::sym(if *b { "true" } else { "false" }),
        Value::Number(n) => Term::sym(n.to_string()),
        Value::String(s) => Term::sym(s),
        Value::Array(items) => Term::tup(items.iter().map(json_to_term).collect()),
        Value::Object(map) => Term::tup(
            map.iter()
                .map(|(k, v)| Term::tup(vec![Term::sym(k), json_to_term(v)]))
                .collect(),
        ),
    }
}

fn index_paths(index: &mut HashMap<Path, Vec<FactId>>, fact: &Term, id: FactId) {
    for p in fact.constant_paths() {
        if p.steps.len() <= MAX_PATH_DEPTH {
            push_id(index.entry(p).or_default(), id);
        }
    }
}

// Ids arrive in append order; dedupe repeats within one fact.
fn push_id(ids: &mut Vec<FactId>, id: FactId) {
    if ids.last() != Some(&id) {
        ids.push(id);
    }
}

fn intersect_sorted(a: &[FactId], b: &[FactId]) -> Vec<FactId> {
    let mut out = Vec::with_capacity(a.len().min(b.len()));
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Streams the facts matching `query` under the current bindings: resolves
/// the query, asks the indexer for candidates in ascending id order,
/// validates each by ground unification and invokes `on_match` with the
/// bindings in place, undoing them between candidates and on return.
/// Returns the number of matches visited.
pub fn match_facts(
    db: &FactDb,
    indexer: &dyn Indexer,
    query: &Term,
    env: &mut Env,
    trail: &mut Trail,
    mut on_match: impl FnMut(&Env) -> ControlFlow<()>,
) -> usize {
    let resolved = resolve(query, env);
    let mark = trail.mark();
    let mut count = 0;
    for id in indexer.ground_match_of(db, &resolved) {
        if ground_unify(&resolved, db.fact(id), env, trail) {
            count += 1;
            let flow = on_match(env);
            trail.undo_to(mark, env);
            if flow.is_break() {
                break;
            }
        }
    }
    count
}
