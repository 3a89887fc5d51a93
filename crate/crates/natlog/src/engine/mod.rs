//! The resolution engine: iterative depth-first unfolding of a goal stack
//! against program clauses, with prefix-goal dispatch to host calls, ground
//! database matching and mid-derivation answer yields.
//!
//! Answers come out of a pull-based stream; no work happens beyond the last
//! answer pulled. All choice state lives in explicit frames, never in host
//! call recursion, so derivation depth is bounded by memory only.

mod host;

pub use host::{
    standard_registry, to_val, HostError, HostRegistry, HostResult, HostStream, Val,
};

use std::collections::HashMap;
use std::fmt;
use std::mem;
use std::ops::Index;
use std::sync::Arc;

use crate::db::{FactDb, FactId, Indexer};
use crate::syntax::{parse_program, Clause, Goal, GoalTag, Query, SyntaxError};
use crate::term::{write_term, Constant, Term, VarStyle};
use crate::unify::{deref, ground_unify_buffered, relocate, resolve, unify_buffered, Env, Trail};

/// An ordered collection of clauses; source order determines answer order.
#[derive(Clone, Debug, Default)]
pub struct Program {
    clauses: Vec<Clause>,
    // constant in head first position, used to skip clauses that cannot
    // match; never changes which clauses match or their order
    head_keys: Vec<Option<Constant>>,
}

impl Program {
    pub fn new(clauses: Vec<Clause>) -> Program {
        let head_keys = clauses.iter().map(|c| first_item_constant(&c.head)).collect();
        Program { clauses, head_keys }
    }

    pub fn parse(src: &str) -> Result<Program, SyntaxError> {
        Ok(Program::new(parse_program(src)?))
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn add_clause(&mut self, clause: Clause) {
        self.head_keys.push(first_item_constant(&clause.head));
        self.clauses.push(clause);
    }
}

/// The constant in a goal tuple's first position, if it has one.
fn first_item_constant(term: &Term) -> Option<Constant> {
    match term {
        Term::Tup(items) => items.first()?.as_constant(),
        _ => None,
    }
}

/// One emitted answer: the fully dereferenced query tuple (for end-of-
/// derivation answers) or yielded tuple (for `^` answers). Residual
/// unbound variables are renumbered 0, 1, ... in order of appearance and
/// render as `_0`, `_1`, ...
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Answer {
    term: Term,
}

impl Answer {
    pub fn term(&self) -> &Term {
        &self.term
    }

    /// Positional access into the answer tuple.
    pub fn get(&self, i: usize) -> Option<&Term> {
        match &self.term {
            Term::Tup(items) => items.get(i),
            _ => None,
        }
    }
}

impl Index<usize> for Answer {
    type Output = Term;

    fn index(&self, i: usize) -> &Term {
        self.get(i).expect("answer component out of range")
    }
}

impl From<Answer> for Term {
    fn from(a: Answer) -> Term {
        a.term
    }
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(f, &self.term, VarStyle::Underscore)
    }
}

/// Errors that terminate an answer stream, carrying the offending goal.
#[derive(Clone, Debug)]
pub enum EngineError {
    UnknownHostName { kind: &'static str, name: String, goal: Term },
    /// Function/generator arguments must be ground at call time.
    NonGroundArgument { goal: Term },
    /// Host goal whose name position is not a symbol.
    InvalidHostGoal { goal: Term },
    /// `~` goal without a loaded fact database.
    NoDatabase { goal: Term },
    Host { message: String, goal: Term },
}

impl fmt::Display for EngineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EngineError::UnknownHostName { kind, name, goal } => {
                write!(f, "unknown host {kind} '{name}' in goal {goal}")
            }
            EngineError::NonGroundArgument { goal } => {
                write!(f, "non-ground argument in host call {goal}")
            }
            EngineError::InvalidHostGoal { goal } => {
                write!(f, "host goal name is not a symbol: {goal}")
            }
            EngineError::NoDatabase { goal } => {
                write!(f, "no fact database loaded for goal {goal}")
            }
            EngineError::Host { message, goal } => write!(f, "host call {goal} failed: {message}"),
        }
    }
}

impl std::error::Error for EngineError {}

// Persistent goal stack shared across choice points.
type Stack = Option<Arc<StackNode>>;

#[derive(Debug)]
struct StackNode {
    goal: Goal,
    next: Stack,
}

// Unlink iteratively: a derivation can build stacks far deeper than the
// host call stack tolerates on recursive drop.
impl Drop for StackNode {
    fn drop(&mut self) {
        let mut next = self.next.take();
        while let Some(node) = next {
            match Arc::try_unwrap(node) {
                Ok(mut n) => next = n.next.take(),
                Err(_) => break,
            }
        }
    }
}

fn push(stack: Stack, goal: Goal) -> Stack {
    Some(Arc::new(StackNode { goal, next: stack }))
}

/// A resumable alternative source, with the marks to undo to between tries.
enum ChoiceFrame {
    /// Remaining program clauses for a plain goal. `goal_key` is the
    /// constant in the goal's first position under the bindings at frame
    /// creation (those outlive the frame), used to skip unmatchable heads.
    Clauses {
        goal: Term,
        goal_key: Option<Constant>,
        rest: Stack,
        next: usize,
        env_mark: usize,
        trail_mark: usize,
    },
    /// Remaining fact candidates for a `~` goal.
    Facts { query: Term, rest: Stack, ids: Vec<FactId>, next: usize, env_mark: usize, trail_mark: usize },
    /// Remaining yields of a host generator.
    Yields { slot: Term, rest: Stack, stream: HostStream, env_mark: usize, trail_mark: usize },
}

enum Mode {
    /// Execute the first goal of this stack.
    Run(Stack),
    /// Retry the newest choice frame.
    Backtrack,
    Done,
}

/// A single derivation over a shared program: pull answers via `Iterator`.
/// A stream error ends the stream. Dropping the solver abandons the
/// derivation; create a new one from the same parts to re-run it.
pub struct Solver {
    program: Arc<Program>,
    db: Option<Arc<FactDb>>,
    indexer: Arc<dyn Indexer>,
    registry: Arc<HostRegistry>,
    occurs_check: bool,
    env: Env,
    trail: Trail,
    choices: Vec<ChoiceFrame>,
    mode: Mode,
    query: Term,
    steps: u64,
    scratch: Vec<(Term, Term)>,
}

impl Solver {
    pub fn new(
        program: Arc<Program>,
        query: &Query,
        db: Option<Arc<FactDb>>,
        indexer: Arc<dyn Indexer>,
        registry: Arc<HostRegistry>,
        occurs_check: bool,
    ) -> Solver {
        let mut stack: Stack = None;
        for goal in query.goals.iter().rev() {
            stack = push(stack, goal.clone());
        }
        let query_term = if query.goals.len() == 1 {
            query.goals[0].term.clone()
        } else {
            Term::tup(query.goals.iter().map(|g| g.term.clone()).collect())
        };
        Solver {
            program,
            db,
            indexer,
            registry,
            occurs_check,
            env: Env::with_vars(query.nvars),
            trail: Trail::new(),
            choices: Vec::new(),
            mode: Mode::Run(stack),
            query: query_term,
            steps: 0,
            scratch: Vec::new(),
        }
    }

    /// Goal reductions performed so far; grows in proportion to the number
    /// of answers pulled on lazy streams.
    pub fn steps(&self) -> u64 {
        self.steps
    }

    fn materialize(&self, t: &Term) -> Answer {
        let resolved = resolve(t, &self.env);
        let mut numbering = HashMap::new();
        Answer { term: renumber_vars(&resolved, &mut numbering) }
    }

    fn fail(&mut self, e: EngineError) -> Option<Result<Answer, EngineError>> {
        self.mode = Mode::Done;
        Some(Err(e))
    }

    fn next_answer(&mut self) -> Option<Result<Answer, EngineError>> {
        loop {
            match mem::replace(&mut self.mode, Mode::Done) {
                Mode::Done => return None,
                Mode::Run(stack) => {
                    let Some(node) = stack else {
                        // empty goal stack: success
                        let answer = self.materialize(&self.query);
                        self.mode = Mode::Backtrack;
                        return Some(Ok(answer));
                    };
                    self.steps += 1;
                    let goal = node.goal.clone();
                    let rest = node.next.clone();
                    drop(node);
                    match goal.tag {
                        GoalTag::Plain => {
                            let goal_key = match &goal.term {
                                Term::Tup(items) => items
                                    .first()
                                    .map(|item| deref(item, &self.env).as_constant())
                                    .unwrap_or(None),
                                _ => None,
                            };
                            self.choices.push(ChoiceFrame::Clauses {
                                goal: goal.term,
                                goal_key,
                                rest,
                                next: 0,
                                env_mark: self.env.len(),
                                trail_mark: self.trail.mark(),
                            });
                            self.mode = Mode::Backtrack;
                        }
                        GoalTag::Db => {
                            let Some(db) = self.db.clone() else {
                                return self.fail(EngineError::NoDatabase { goal: goal.term });
                            };
                            let query = resolve(&goal.term, &self.env);
                            let ids = self.indexer.ground_match_of(&db, &query);
                            self.choices.push(ChoiceFrame::Facts {
                                query,
                                rest,
                                ids,
                                next: 0,
                                env_mark: self.env.len(),
                                trail_mark: self.trail.mark(),
                            });
                            self.mode = Mode::Backtrack;
                        }
                        GoalTag::Yield => {
                            let answer = self.materialize(&goal.term);
                            self.mode = Mode::Run(rest);
                            return Some(Ok(answer));
                        }
                        GoalTag::Action => {
                            let (name, args) = match self.action_goal_parts(&goal.term) {
                                Ok(parts) => parts,
                                Err(e) => return self.fail(e),
                            };
                            let Some(action) = self.registry.action(&name) else {
                                return self.fail(EngineError::UnknownHostName {
                                    kind: "action",
                                    name: name.to_string(),
                                    goal: goal.term,
                                });
                            };
                            if let Err(e) = action(&args) {
                                return self.fail(EngineError::Host {
                                    message: e.to_string(),
                                    goal: goal.term,
                                });
                            }
                            self.mode = Mode::Run(rest);
                        }
                        GoalTag::Fun => {
                            let (name, args, slot) = match self.call_goal_parts(&goal.term) {
                                Ok(parts) => parts,
                                Err(e) => return self.fail(e),
                            };
                            let Some(function) = self.registry.function(&name) else {
                                return self.fail(EngineError::UnknownHostName {
                                    kind: "function",
                                    name: name.to_string(),
                                    goal: goal.term,
                                });
                            };
                            let value = match function(&args) {
                                Ok(v) => v,
                                Err(e) => {
                                    return self.fail(EngineError::Host {
                                        message: e.to_string(),
                                        goal: goal.term,
                                    });
                                }
                            };
                            let result = value.to_term();
                            if unify_buffered(
                                &mut self.scratch,
                                &slot,
                                &result,
                                &mut self.env,
                                &mut self.trail,
                                self.occurs_check,
                            ) {
                                self.mode = Mode::Run(rest);
                            } else {
                                self.mode = Mode::Backtrack;
                            }
                        }
                        GoalTag::Gen => {
                            let (name, args, slot) = match self.call_goal_parts(&goal.term) {
                                Ok(parts) => parts,
                                Err(e) => return self.fail(e),
                            };
                            let Some(generator) = self.registry.generator(&name) else {
                                return self.fail(EngineError::UnknownHostName {
                                    kind: "generator",
                                    name: name.to_string(),
                                    goal: goal.term,
                                });
                            };
                            let stream = match generator(&args) {
                                Ok(s) => s,
                                Err(e) => {
                                    return self.fail(EngineError::Host {
                                        message: e.to_string(),
                                        goal: goal.term,
                                    });
                                }
                            };
                            self.choices.push(ChoiceFrame::Yields {
                                slot,
                                rest,
                                stream,
                                env_mark: self.env.len(),
                                trail_mark: self.trail.mark(),
                            });
                            self.mode = Mode::Backtrack;
                        }
                    }
                }
                Mode::Backtrack => {
                    let Some(frame) = self.choices.last_mut() else {
                        self.mode = Mode::Done;
                        return None;
                    };
                    match frame {
                        ChoiceFrame::Clauses { goal, goal_key, rest, next, env_mark, trail_mark } => {
                            self.trail.undo_to(*trail_mark, &mut self.env);
                            self.env.truncate(*env_mark);
                            let clauses = self.program.clauses();
                            let mut matched = None;
                            while *next < clauses.len() {
                                let clause = &clauses[*next];
                                let head_key = &self.program.head_keys[*next];
                                *next += 1;
                                if let (Some(gk), Some(hk)) = (goal_key.as_ref(), head_key.as_ref())
                                {
                                    if gk != hk {
                                        continue;
                                    }
                                }
                                let offset = self.env.len();
                                self.env.grow(clause.nvars);
                                let head = relocate(&clause.head, offset);
                                if unify_buffered(
                                    &mut self.scratch,
                                    goal,
                                    &head,
                                    &mut self.env,
                                    &mut self.trail,
                                    self.occurs_check,
                                ) {
                                    let mut stack = rest.clone();
                                    for body_goal in clause.body.iter().rev() {
                                        stack = push(
                                            stack,
                                            Goal {
                                                tag: body_goal.tag,
                                                term: relocate(&body_goal.term, offset),
                                            },
                                        );
                                    }
                                    matched = Some(stack);
                                    break;
                                }
                                self.env.truncate(offset);
                            }
                            match matched {
                                Some(stack) => {
                                    if *next >= clauses.len() {
                                        self.choices.pop();
                                    }
                                    self.mode = Mode::Run(stack);
                                }
                                None => {
                                    self.choices.pop();
                                    self.mode = Mode::Backtrack;
                                }
                            }
                        }
                        ChoiceFrame::Facts { query, rest, ids, next, env_mark, trail_mark } => {
                            self.trail.undo_to(*trail_mark, &mut self.env);
                            self.env.truncate(*env_mark);
                            let db = self.db.as_ref().expect("frame implies db");
                            let mut matched = false;
                            while *next < ids.len() {
                                let fact = db.fact(ids[*next]);
                                *next += 1;
                                if ground_unify_buffered(
                                    &mut self.scratch,
                                    query,
                                    fact,
                                    &mut self.env,
                                    &mut self.trail,
                                ) {
                                    matched = true;
                                    break;
                                }
                            }
                            if matched {
                                let stack = rest.clone();
                                if *next >= ids.len() {
                                    self.choices.pop();
                                }
                                self.mode = Mode::Run(stack);
                            } else {
                                self.choices.pop();
                                self.mode = Mode::Backtrack;
                            }
                        }
                        ChoiceFrame::Yields { slot, rest, stream, env_mark, trail_mark } => {
                            self.trail.undo_to(*trail_mark, &mut self.env);
                            self.env.truncate(*env_mark);
                            let mut matched = false;
                            for value in stream.by_ref() {
                                let result = value.to_term();
                                if unify_buffered(
                                    &mut self.scratch,
                                    slot,
                                    &result,
                                    &mut self.env,
                                    &mut self.trail,
                                    self.occurs_check,
                                ) {
                                    matched = true;
                                    break;
                                }
                            }
                            if matched {
                                self.mode = Mode::Run(rest.clone());
                            } else {
                                self.choices.pop();
                                self.mode = Mode::Backtrack;
                            }
                        }
                    }
                }
            }
        }
    }

    /// Name and argument values of an action goal; arguments are
    /// dereferenced, residual variables appearing as `_N` symbols.
    fn action_goal_parts(&self, term: &Term) -> Result<(Arc<str>, Vec<Val>), EngineError> {
        let items = self.host_goal_items(term, 1)?;
        let name = self.host_name(&items[0], term)?;
        let args_tuple = resolve(&Term::tup(items[1..].to_vec()), &self.env);
        let mut numbering = HashMap::new();
        let named = vars_to_symbols(&renumber_vars(&args_tuple, &mut numbering));
        let Some(Val::Tup(args)) = to_val(&named) else {
            return Err(EngineError::NonGroundArgument { goal: term.clone() });
        };
        Ok((name, args))
    }

    /// Name, ground argument values and result slot of a `` ` ``/```` `` ````
    /// goal.
    fn call_goal_parts(&self, term: &Term) -> Result<(Arc<str>, Vec<Val>, Term), EngineError> {
        let items = self.host_goal_items(term, 2)?;
        let name = self.host_name(&items[0], term)?;
        let mut args = Vec::with_capacity(items.len() - 2);
        for item in &items[1..items.len() - 1] {
            let resolved = resolve(item, &self.env);
            match to_val(&resolved) {
                Some(v) => args.push(v),
                None => return Err(EngineError::NonGroundArgument { goal: term.clone() }),
            }
        }
        let slot = items[items.len() - 1].clone();
        Ok((name, args, slot))
    }

    fn host_goal_items<'a>(&self, term: &'a Term, min: usize) -> Result<&'a [Term], EngineError> {
        match term {
            Term::Tup(items) if items.len() >= min => Ok(items),
            _ => Err(EngineError::InvalidHostGoal { goal: term.clone() }),
        }
    }

    fn host_name(&self, item: &Term, goal: &Term) -> Result<Arc<str>, EngineError> {
        match deref(item, &self.env) {
            Term::Sym(name) => Ok(name.clone()),
            _ => Err(EngineError::InvalidHostGoal { goal: goal.clone() }),
        }
    }
}

impl Iterator for Solver {
    type Item = Result<Answer, EngineError>;

    fn next(&mut self) -> Option<Self::Item> {
        self.next_answer()
    }
}

fn renumber_vars(t: &Term, numbering: &mut HashMap<usize, usize>) -> Term {
    match t {
        Term::Var(i) => {
            let fresh = numbering.len();
            Term::Var(*numbering.entry(*i).or_insert(fresh))
        }
        Term::Tup(items) if !items.is_empty() => {
            Term::tup(items.iter().map(|item| renumber_vars(item, numbering)).collect())
        }
        other => other.clone(),
    }
}

fn vars_to_symbols(t: &Term) -> Term {
    match t {
        Term::Var(i) => Term::sym(format!("_{i}")),
        Term::Tup(items) if !items.is_empty() => {
            Term::tup(items.iter().map(vars_to_symbols).collect())
        }
        other => other.clone(),
    }
}
