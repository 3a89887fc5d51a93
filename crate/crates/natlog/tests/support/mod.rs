//! Test-only oracles, all independent of the implementation paths they
//! check: a substitution-map unifier, a recursive resolution interpreter,
//! clause unfolding over classic terms, a brute-force queens counter, and
//! seeded random generators for terms and clauses.

// Each test target compiles its own copy and uses a subset.
#![allow(dead_code)]

use std::collections::HashMap;

use natlog::term::{ClassicTerm, Term};
use rand::rngs::StdRng;
use rand::Rng;

// ---------------------------------------------------------------------
// naive substitution unifier over tuple terms

pub type Subst = HashMap<usize, Term>;

pub enum NaiveOutcome {
    Ok(Subst),
    Clash,
    OccursFail,
}

fn walk(t: &Term, s: &Subst) -> Term {
    let mut here = t.clone();
    while let Term::Var(i) = here {
        match s.get(&i) {
            Some(bound) => here = bound.clone(),
            None => break,
        }
    }
    here
}

/// Full recursive application; diverges on cyclic substitutions, which the
/// occurs check rules out.
pub fn apply(t: &Term, s: &Subst) -> Term {
    match walk(t, s) {
        Term::Tup(items) if !items.is_empty() => {
            Term::tup(items.iter().map(|x| apply(x, s)).collect())
        }
        other => other,
    }
}

fn occurs(var: usize, t: &Term, s: &Subst) -> bool {
    match walk(t, s) {
        Term::Var(i) => i == var,
        Term::Tup(items) => items.iter().any(|x| occurs(var, x, s)),
        _ => false,
    }
}

pub fn naive_unify(a: &Term, b: &Term, s: &mut Subst) -> Option<NaiveOutcome> {
    match (walk(a, s), walk(b, s)) {
        (Term::Var(i), Term::Var(j)) if i == j => None,
        (Term::Var(i), t) | (t, Term::Var(i)) => {
            if occurs(i, &t, s) {
                return Some(NaiveOutcome::OccursFail);
            }
            s.insert(i, t);
            None
        }
        (Term::Tup(xs), Term::Tup(ys)) => {
            if xs.len() != ys.len() {
                return Some(NaiveOutcome::Clash);
            }
            for (x, y) in xs.iter().zip(ys.iter()) {
                if let Some(fail) = naive_unify(x, y, s) {
                    return Some(fail);
                }
            }
            None
        }
        (x, y) => {
            if x == y {
                None
            } else {
                Some(NaiveOutcome::Clash)
            }
        }
    }
}

/// Most general unifier with occurs check, or the reason there is none.
pub fn naive_mgu(a: &Term, b: &Term) -> NaiveOutcome {
    let mut s = Subst::new();
    match naive_unify(a, b, &mut s) {
        None => NaiveOutcome::Ok(s),
        Some(fail) => fail,
    }
}

// ---------------------------------------------------------------------
// recursive resolution oracle (substitution maps, fresh-variable renaming)

/// Clauses as (head, body) with variables numbered from 0 per clause.
pub type OracleClause = (Term, Vec<Term>);

fn max_var(t: &Term) -> Option<usize> {
    match t {
        Term::Var(i) => Some(*i),
        Term::Tup(items) => items.iter().filter_map(max_var).max(),
        _ => None,
    }
}

/// Number of variable slots a clause needs.
fn clause_width<'a>(terms: impl IntoIterator<Item = &'a Term>) -> usize {
    terms.into_iter().filter_map(max_var).max().map_or(0, |m| m + 1)
}

fn shift_vars(t: &Term, offset: usize) -> Term {
    match t {
        Term::Var(i) => Term::Var(i + offset),
        Term::Tup(items) if !items.is_empty() => {
            Term::tup(items.iter().map(|x| shift_vars(x, offset)).collect())
        }
        other => other.clone(),
    }
}

/// Depth-first left-to-right resolution, clauses in source order; collects
/// the resolved query term per success. Panics if the depth cap is hit, so
/// a passing test never silently truncates the search.
pub fn oracle_solve(
    clauses: &[OracleClause],
    goals: &[Term],
    query: &Term,
    max_depth: usize,
) -> Vec<Term> {
    struct Search<'a> {
        clauses: &'a [OracleClause],
        answers: Vec<Term>,
        fresh: usize,
        max_depth: usize,
    }

    impl Search<'_> {
        fn run(&mut self, goals: &[Term], s: &Subst, query: &Term, depth: usize) {
            assert!(depth < self.max_depth, "oracle depth cap hit");
            let Some((goal, rest)) = goals.split_first() else {
                self.answers.push(apply(query, s));
                return;
            };
            for (head, body) in self.clauses {
                let offset = self.fresh;
                let width = clause_width([head].into_iter().chain(body.iter()));
                let head = shift_vars(head, offset);
                let mut s2 = s.clone();
                if naive_unify(goal, &head, &mut s2).is_none() {
                    self.fresh += width;
                    let mut next: Vec<Term> =
                        body.iter().map(|b| shift_vars(b, offset)).collect();
                    next.extend(rest.iter().cloned());
                    self.run(&next, &s2, query, depth + 1);
                    self.fresh = offset;
                }
            }
        }
    }

    let mut search = Search {
        clauses,
        answers: Vec::new(),
        fresh: clause_width(goals.iter().chain([query])),
        max_depth,
    };
    search.run(goals, &Subst::new(), query, 0);
    search.answers
}

/// Parses a plain program (no prefixes) into oracle clauses.
pub fn oracle_clauses(src: &str) -> Vec<OracleClause> {
    natlog::parse_program(src)
        .unwrap()
        .into_iter()
        .map(|c| {
            (
                c.head,
                c.body
                    .into_iter()
                    .map(|g| {
                        assert!(matches!(g.tag, natlog::GoalTag::Plain), "oracle handles plain goals");
                        g.term
                    })
                    .collect(),
            )
        })
        .collect()
}

// ---------------------------------------------------------------------
// clause unfolding, classic and lifted

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassicClause {
    pub head: ClassicTerm,
    pub body: Vec<ClassicTerm>,
}

fn classic_max_var(t: &ClassicTerm) -> Option<usize> {
    match t {
        ClassicTerm::Var(i) => Some(*i),
        ClassicTerm::Atom(_) => None,
        ClassicTerm::Compound(_, args) => args.iter().filter_map(classic_max_var).max(),
    }
}

fn classic_shift(t: &ClassicTerm, offset: usize) -> ClassicTerm {
    match t {
        ClassicTerm::Var(i) => ClassicTerm::Var(i + offset),
        ClassicTerm::Atom(_) => t.clone(),
        ClassicTerm::Compound(f, args) => ClassicTerm::Compound(
            f.clone(),
            args.iter().map(|a| classic_shift(a, offset)).collect(),
        ),
    }
}

type ClassicSubst = HashMap<usize, ClassicTerm>;

fn classic_walk(t: &ClassicTerm, s: &ClassicSubst) -> ClassicTerm {
    let mut here = t.clone();
    while let ClassicTerm::Var(i) = here {
        match s.get(&i) {
            Some(bound) => here = bound.clone(),
            None => break,
        }
    }
    here
}

fn classic_apply(t: &ClassicTerm, s: &ClassicSubst) -> ClassicTerm {
    match classic_walk(t, s) {
        ClassicTerm::Compound(f, args) => {
            ClassicTerm::Compound(f, args.iter().map(|a| classic_apply(a, s)).collect())
        }
        other => other,
    }
}

fn classic_occurs(var: usize, t: &ClassicTerm, s: &ClassicSubst) -> bool {
    match classic_walk(t, s) {
        ClassicTerm::Var(i) => i == var,
        ClassicTerm::Atom(_) => false,
        ClassicTerm::Compound(_, args) => args.iter().any(|a| classic_occurs(var, a, s)),
    }
}

fn classic_unify(a: &ClassicTerm, b: &ClassicTerm, s: &mut ClassicSubst) -> bool {
    match (classic_walk(a, s), classic_walk(b, s)) {
        (ClassicTerm::Var(i), ClassicTerm::Var(j)) if i == j => true,
        (ClassicTerm::Var(i), t) | (t, ClassicTerm::Var(i)) => {
            if classic_occurs(i, &t, s) {
                return false;
            }
            s.insert(i, t);
            true
        }
        (ClassicTerm::Atom(x), ClassicTerm::Atom(y)) => x == y,
        (ClassicTerm::Compound(f, xs), ClassicTerm::Compound(g, ys)) => {
            f == g
                && xs.len() == ys.len()
                && xs.iter().zip(ys.iter()).all(|(x, y)| classic_unify(x, y, s))
        }
        _ => false,
    }
}

/// Single-step unfolding over classic clauses: resolve the first body goal
/// of `c1` against the (renamed-apart) head of `c2`.
pub fn classic_unfold(c1: &ClassicClause, c2: &ClassicClause) -> Option<ClassicClause> {
    let (first, rest) = c1.body.split_first()?;
    let offset = 1 + [&c1.head]
        .into_iter()
        .chain(c1.body.iter())
        .filter_map(classic_max_var)
        .max()
        .unwrap_or(0);
    let head2 = classic_shift(&c2.head, offset);
    let mut s = ClassicSubst::new();
    if !classic_unify(first, &head2, &mut s) {
        return None;
    }
    let mut body: Vec<ClassicTerm> =
        c2.body.iter().map(|b| classic_apply(&classic_shift(b, offset), &s)).collect();
    body.extend(rest.iter().map(|b| classic_apply(b, &s)));
    Some(ClassicClause { head: classic_apply(&c1.head, &s), body })
}

/// The same unfolding over lifted tuple clauses, using the engine's
/// unifier and binding environment.
pub fn lifted_unfold(c1: &(Term, Vec<Term>), c2: &(Term, Vec<Term>)) -> Option<(Term, Vec<Term>)> {
    use natlog::unify::{relocate, resolve, unify, Env, Trail};

    let (first, rest) = c1.1.split_first()?;
    let width1 = clause_width([&c1.0].into_iter().chain(c1.1.iter()));
    let width2 = clause_width([&c2.0].into_iter().chain(c2.1.iter()));
    let mut env = Env::with_vars(width1 + width2);
    let mut trail = Trail::new();
    let head2 = relocate(&c2.0, width1);
    if !unify(first, &head2, &mut env, &mut trail, true) {
        return None;
    }
    let mut body: Vec<Term> =
        c2.1.iter().map(|b| resolve(&relocate(b, width1), &env)).collect();
    body.extend(rest.iter().map(|b| resolve(b, &env)));
    Some((resolve(&c1.0, &env), body))
}

/// Renumbers variables by first occurrence so structurally equal clauses
/// compare equal regardless of which route produced them.
pub fn canon_clause(head: &Term, body: &[Term], map: &mut HashMap<usize, usize>) -> (Term, Vec<Term>) {
    fn go(t: &Term, map: &mut HashMap<usize, usize>) -> Term {
        match t {
            Term::Var(i) => {
                let fresh = map.len();
                Term::Var(*map.entry(*i).or_insert(fresh))
            }
            Term::Tup(items) if !items.is_empty() => {
                Term::tup(items.iter().map(|x| go(x, map)).collect())
            }
            other => other.clone(),
        }
    }
    (go(head, map), body.iter().map(|b| go(b, map)).collect())
}

pub fn lift_clause(c: &ClassicClause) -> (Term, Vec<Term>) {
    (c.head.lift(), c.body.iter().map(ClassicTerm::lift).collect())
}

/// Renumbers one term's variables by first occurrence.
pub fn canon_term(t: &Term) -> Term {
    let mut map = HashMap::new();
    canon_clause(t, &[], &mut map).0
}

// ---------------------------------------------------------------------
// brute-force N-Queens

/// Counts all placements of one queen per column, one per row, no shared
/// diagonals, by enumerating permutations.
pub fn brute_force_queens(n: usize) -> usize {
    fn extend(cols: &mut Vec<usize>, used: &mut Vec<bool>, n: usize, count: &mut usize) {
        if cols.len() == n {
            *count += 1;
            return;
        }
        let r = cols.len();
        for c in 0..n {
            if used[c] {
                continue;
            }
            let safe = cols
                .iter()
                .enumerate()
                .all(|(r0, &c0)| (r - r0) != c.abs_diff(c0));
            if safe {
                cols.push(c);
                used[c] = true;
                extend(cols, used, n, count);
                cols.pop();
                used[c] = false;
            }
        }
    }
    let mut count = 0;
    extend(&mut Vec::new(), &mut vec![false; n], n, &mut count);
    count
}

// ---------------------------------------------------------------------
// random generators

const SYMS: [&str; 6] = ["f", "g", "a", "b", "c", "d"];

/// Random term with variables drawn from `0..nvars`.
pub fn random_term(rng: &mut StdRng, depth: usize, nvars: usize) -> Term {
    let pick = rng.gen_range(0..10);
    if depth == 0 || pick < 4 {
        match rng.gen_range(0..6) {
            0 if nvars > 0 => Term::Var(rng.gen_range(0..nvars)),
            1 => Term::Int(rng.gen_range(-3..4)),
            2 => Term::unit(),
            _ => Term::sym(SYMS[rng.gen_range(0..SYMS.len())]),
        }
    } else {
        let arity = rng.gen_range(1..=4);
        Term::tup((0..arity).map(|_| random_term(rng, depth - 1, nvars)).collect())
    }
}

pub fn random_ground_term(rng: &mut StdRng, depth: usize) -> Term {
    random_term(rng, depth, 0)
}

/// Random classic term over a small alphabet.
pub fn random_classic(rng: &mut StdRng, depth: usize, nvars: usize) -> ClassicTerm {
    let pick = rng.gen_range(0..10);
    if depth == 0 || pick < 4 {
        if nvars > 0 && rng.gen_bool(0.4) {
            ClassicTerm::Var(rng.gen_range(0..nvars))
        } else {
            ClassicTerm::atom(SYMS[rng.gen_range(0..SYMS.len())])
        }
    } else {
        let arity = rng.gen_range(1..=3);
        ClassicTerm::compound(
            SYMS[rng.gen_range(0..2)],
            (0..arity).map(|_| random_classic(rng, depth - 1, nvars)).collect(),
        )
    }
}

pub fn random_classic_clause(rng: &mut StdRng) -> ClassicClause {
    let nvars = rng.gen_range(1..4);
    let body_len = rng.gen_range(1..=2);
    ClassicClause {
        head: random_classic(rng, 2, nvars),
        body: (0..body_len).map(|_| random_classic(rng, 2, nvars)).collect(),
    }
}
