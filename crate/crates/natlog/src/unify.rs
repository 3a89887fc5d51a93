//! Structure-sharing unification over a growable binding environment with a
//! trail for backtracking, plus the specialization for matching against
//! ground facts and the variable relocation used to freshen clauses.

use crate::term::Term;

/// Binding store. A slot is `None` (unbound) or `Some(term)`; bound slots
/// only revert to unbound through the trail.
#[derive(Debug, Default)]
pub struct Env {
    slots: Vec<Option<Term>>,
}

impl Env {
    pub fn new() -> Env {
        Env::default()
    }

    pub fn with_vars(n: usize) -> Env {
        Env { slots: vec![None; n] }
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    /// Appends `n` unbound slots, returning the index of the first.
    pub fn grow(&mut self, n: usize) -> usize {
        let offset = self.slots.len();
        self.slots.resize(offset + n, None);
        offset
    }

    /// Drops slots above `len`. Callers must first undo any bindings made
    /// while those slots were live.
    pub fn truncate(&mut self, len: usize) {
        self.slots.truncate(len);
    }

    pub fn lookup(&self, var: usize) -> Option<&Term> {
        self.slots[var].as_ref()
    }

    fn bind(&mut self, var: usize, value: Term, trail: &mut Trail) {
        debug_assert!(self.slots[var].is_none(), "rebinding a bound slot");
        self.slots[var] = Some(value);
        trail.log.push(var);
    }

    #[cfg(test)]
    pub(crate) fn snapshot(&self) -> Vec<Option<Term>> {
        self.slots.clone()
    }
}

/// Bind-order log; undoing to a mark restores the exact earlier Env state.
#[derive(Debug, Default)]
pub struct Trail {
    log: Vec<usize>,
}

impl Trail {
    pub fn new() -> Trail {
        Trail::default()
    }

    pub fn mark(&self) -> usize {
        self.log.len()
    }

    /// Resets every slot bound after `mark` and truncates the log.
    pub fn undo_to(&mut self, mark: usize, env: &mut Env) {
        while self.log.len() > mark {
            let var = self.log.pop().expect("trail entry");
            env.slots[var] = None;
        }
    }
}

/// Follows variable-to-binding chains until an unbound variable or a
/// non-variable term; does not descend into tuples.
pub fn deref<'a>(t: &'a Term, env: &'a Env) -> &'a Term {
    let mut here = t;
    while let Term::Var(i) = here {
        match env.lookup(*i) {
            Some(bound) => here = bound,
            None => break,
        }
    }
    here
}

/// Full recursive dereference into a standalone term; unbound variables
/// keep their indices.
pub fn resolve(t: &Term, env: &Env) -> Term {
    let t = deref(t, env);
    match t {
        Term::Tup(items) if !items.is_empty() => {
            Term::tup(items.iter().map(|item| resolve(item, env)).collect())
        }
        other => other.clone(),
    }
}

/// Unifies two terms, extending `env` with a most general unifier on
/// success. On failure the environment and trail are restored to their
/// entry state. With `occurs_check`, a variable never binds to a term
/// containing it.
pub fn unify(t1: &Term, t2: &Term, env: &mut Env, trail: &mut Trail, occurs_check: bool) -> bool {
    unify_buffered(&mut Vec::new(), t1, t2, env, trail, occurs_check)
}

// Engine-internal variant reusing one work stack across calls.
pub(crate) fn unify_buffered(
    pending: &mut Vec<(Term, Term)>,
    t1: &Term,
    t2: &Term,
    env: &mut Env,
    trail: &mut Trail,
    occurs_check: bool,
) -> bool {
    let mark = trail.mark();
    pending.clear();
    pending.push((t1.clone(), t2.clone()));
    while let Some((a, b)) = pending.pop() {
        let a = deref(&a, env).clone();
        let b = deref(&b, env).clone();
        // Also keeps self-referent bindings (possible with the occurs
        // check off) from re-expanding forever.
        if a == b {
            continue;
        }
        let ok = match (&a, &b) {
            // The variable met first in argument order takes the binding.
            (Term::Var(i), other) => bind_var(*i, other, env, trail, occurs_check),
            (other, Term::Var(j)) => bind_var(*j, other, env, trail, occurs_check),
            (Term::Tup(xs), Term::Tup(ys)) => {
                if xs.len() == ys.len() {
                    pending.extend(xs.iter().cloned().zip(ys.iter().cloned()));
                    true
                } else {
                    false
                }
            }
            _ => false,
        };
        if !ok {
            trail.undo_to(mark, env);
            return false;
        }
    }
    true
}

fn bind_var(var: usize, value: &Term, env: &mut Env, trail: &mut Trail, occurs_check: bool) -> bool {
    if occurs_check && occurs_in(var, value, env) {
        return false;
    }
    env.bind(var, value.clone(), trail);
    true
}

fn occurs_in(var: usize, t: &Term, env: &Env) -> bool {
    let mut pending = vec![t.clone()];
    while let Some(t) = pending.pop() {
        match deref(&t, env) {
            Term::Var(i) => {
                if *i == var {
                    return true;
                }
            }
            Term::Tup(items) => pending.extend(items.iter().cloned()),
            _ => {}
        }
    }
    false
}

/// Unification specialized to a ground right-hand side: only query-side
/// variables ever bind, and no occurs-check is needed. Outcome and bindings
/// match `unify(query, fact, .., occurs_check=false)` exactly.
pub fn ground_unify(query: &Term, fact: &Term, env: &mut Env, trail: &mut Trail) -> bool {
    ground_unify_buffered(&mut Vec::new(), query, fact, env, trail)
}

pub(crate) fn ground_unify_buffered(
    pending: &mut Vec<(Term, Term)>,
    query: &Term,
    fact: &Term,
    env: &mut Env,
    trail: &mut Trail,
) -> bool {
    debug_assert!(fact.is_ground(), "ground_unify right-hand side must be ground");
    let mark = trail.mark();
    pending.clear();
    pending.push((query.clone(), fact.clone()));
    while let Some((q, f)) = pending.pop() {
        let q = deref(&q, env).clone();
        let ok = match (&q, &f) {
            (Term::Var(i), _) => {
                env.bind(*i, f.clone(), trail);
                true
            }
            (Term::Tup(xs), Term::Tup(ys)) => {
                if xs.len() == ys.len() {
                    pending.extend(xs.iter().cloned().zip(ys.iter().cloned()));
                    true
                } else {
                    false
                }
            }
            _ => q == f,
        };
        if !ok {
            trail.undo_to(mark, env);
            return false;
        }
    }
    true
}

/// Shifts every variable index by `offset`, leaving constants (and whole
/// ground subtrees) shared with the input.
pub fn relocate(t: &Term, offset: usize) -> Term {
    if offset == 0 {
        return t.clone();
    }
    shift(t, offset).unwrap_or_else(|| t.clone())
}

// None means "no variable inside, reuse the original".
fn shift(t: &Term, offset: usize) -> Option<Term> {
    match t {
        Term::Var(i) => Some(Term::Var(i + offset)),
        Term::Tup(items) => {
            let mut changed: Option<Vec<Term>> = None;
            for (k, item) in items.iter().enumerate() {
                match shift(item, offset) {
                    Some(new_item) => {
                        changed
                            .get_or_insert_with(|| items[..k].to_vec())
                            .push(new_item);
                    }
                    None => {
                        if let Some(v) = changed.as_mut() {
                            v.push(item.clone());
                        }
                    }
                }
            }
            changed.map(Term::tup)
        }
        _ => None,
    }
}
