//! Immutable nested-tuple terms.
//!
//! A term is a variable (integer index into a binding environment), an
//! atomic constant (symbol, integer, real, string or the empty tuple) or a
//! tuple of terms. Tuples may carry arbitrary terms in any position,
//! including the first, so compound "functors" are just ordinary elements.
//!
//! The module also provides the lifting morphism between classic
//! functor/arguments terms and the tuple representation, and the term
//! inspection functions (constant sets, constant paths, shape skeletons)
//! that the fact-database indexers are built on.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

/// A nested-tuple term. Immutable; clones are cheap (shared payloads).
#[derive(Clone, Debug)]
pub enum Term {
    /// Variable, as an index into a binding environment.
    Var(usize),
    /// Symbolic constant.
    Sym(Arc<str>),
    /// Integer constant.
    Int(i64),
    /// Real constant.
    Real(f64),
    /// String constant (distinct from symbols).
    Str(Arc<str>),
    /// Tuple of terms; `Tup` of length zero is the constant `()`.
    Tup(Arc<[Term]>),
}

impl Term {
    pub fn sym(name: impl AsRef<str>) -> Term {
        Term::Sym(Arc::from(name.as_ref()))
    }

    pub fn str(text: impl AsRef<str>) -> Term {
        Term::Str(Arc::from(text.as_ref()))
    }

    pub fn tup(items: Vec<Term>) -> Term {
        Term::Tup(items.into())
    }

    /// The empty tuple `()`.
    pub fn unit() -> Term {
        Term::Tup(Arc::from(Vec::new()))
    }

    /// Builds a `()`-terminated iterated 2-tuple list: `(a (b (c ())))`.
    pub fn list(items: impl IntoIterator<Item = Term>) -> Term {
        let items: Vec<Term> = items.into_iter().collect();
        let mut out = Term::unit();
        for item in items.into_iter().rev() {
            out = Term::tup(vec![item, out]);
        }
        out
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    /// True when the term contains no variables.
    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Tup(items) => items.iter().all(Term::is_ground),
            _ => true,
        }
    }

    /// The constant carried by an atomic term, if any. Nonempty tuples and
    /// variables carry none; the empty tuple is itself a constant.
    pub fn as_constant(&self) -> Option<Constant> {
        match self {
            Term::Var(_) => None,
            Term::Sym(s) => Some(Constant::Sym(s.clone())),
            Term::Int(n) => Some(Constant::Int(*n)),
            Term::Real(x) => Some(Constant::Real(*x)),
            Term::Str(s) => Some(Constant::Str(s.clone())),
            Term::Tup(items) => items.is_empty().then_some(Constant::Unit),
        }
    }

    /// The set of constants occurring anywhere in the term.
    pub fn constants(&self) -> BTreeSet<Constant> {
        let mut out = BTreeSet::new();
        self.collect_constants(&mut out);
        out
    }

    fn collect_constants(&self, out: &mut BTreeSet<Constant>) {
        if let Some(c) = self.as_constant() {
            out.insert(c);
        } else if let Term::Tup(items) = self {
            for item in items.iter() {
                item.collect_constants(out);
            }
        }
    }

    /// One path per constant occurrence; a bare constant at the root gets
    /// the empty index sequence.
    pub fn constant_paths(&self) -> BTreeSet<Path> {
        let mut out = BTreeSet::new();
        let mut steps = Vec::new();
        self.collect_paths(&mut steps, &mut out);
        out
    }

    fn collect_paths(&self, steps: &mut Vec<u32>, out: &mut BTreeSet<Path>) {
        if let Some(c) = self.as_constant() {
            out.insert(Path { steps: steps.clone(), constant: c });
        } else if let Term::Tup(items) = self {
            for (i, item) in items.iter().enumerate() {
                steps.push(i as u32);
                item.collect_paths(steps, out);
                steps.pop();
            }
        }
    }

    /// Navigates a path's index sequence from this term.
    pub fn at_path(&self, steps: &[u32]) -> Option<&Term> {
        let mut here = self;
        for &i in steps {
            match here {
                Term::Tup(items) => here = items.get(i as usize)?,
                _ => return None,
            }
        }
        Some(here)
    }

    /// The term's shape: constants become filled nodes, variables become
    /// wildcards, tuples keep their arity.
    pub fn skeleton(&self) -> Skeleton {
        match self {
            Term::Var(_) => Skeleton::Wild,
            Term::Tup(items) if !items.is_empty() => {
                Skeleton::Tup(items.iter().map(Term::skeleton).collect())
            }
            _ => Skeleton::Leaf,
        }
    }

    /// Lowers a tuple term back to a classic functor/arguments term.
    /// Fails on terms outside the image of [`ClassicTerm::lift`].
    pub fn lower(&self) -> Result<ClassicTerm, LowerError> {
        match self {
            Term::Var(i) => Ok(ClassicTerm::Var(*i)),
            Term::Sym(s) => Ok(ClassicTerm::Atom(s.clone())),
            Term::Int(_) | Term::Real(_) | Term::Str(_) => Err(LowerError::NonAtomLeaf),
            Term::Tup(items) => match items.split_first() {
                None => Err(LowerError::EmptyTuple),
                Some((Term::Sym(f), args)) => {
                    if args.is_empty() {
                        return Err(LowerError::MissingArguments);
                    }
                    let args = args.iter().map(Term::lower).collect::<Result<_, _>>()?;
                    Ok(ClassicTerm::Compound(f.clone(), args))
                }
                Some(_) => Err(LowerError::NonSymbolHead),
            },
        }
    }
}

// Structural equality; reals compare by bit pattern so it is total.
impl PartialEq for Term {
    fn eq(&self, other: &Term) -> bool {
        match (self, other) {
            (Term::Var(a), Term::Var(b)) => a == b,
            (Term::Sym(a), Term::Sym(b)) => a == b,
            (Term::Int(a), Term::Int(b)) => a == b,
            (Term::Real(a), Term::Real(b)) => a.to_bits() == b.to_bits(),
            (Term::Str(a), Term::Str(b)) => a == b,
            (Term::Tup(a), Term::Tup(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for Term {}

/// Renders in nested-tuple style: symbols and strings quoted, numbers bare,
/// variables as bare indices, one-element tuples with a trailing comma.
impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(f, self, VarStyle::Index)
    }
}

pub(crate) enum VarStyle {
    /// `Var 0` prints as `0` (parsed-goal style).
    Index,
    /// `Var 0` prints as `_0` (answer style).
    Underscore,
}

pub(crate) fn write_term(f: &mut fmt::Formatter<'_>, t: &Term, style: VarStyle) -> fmt::Result {
    match t {
        Term::Var(i) => match style {
            VarStyle::Index => write!(f, "{i}"),
            VarStyle::Underscore => write!(f, "_{i}"),
        },
        Term::Sym(s) => write!(f, "'{s}'"),
        Term::Int(n) => write!(f, "{n}"),
        Term::Real(x) => write!(f, "{x:?}"),
        Term::Str(s) => write!(f, "'{s}'"),
        Term::Tup(items) => {
            write!(f, "(")?;
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write_term(f, item, match style {
                    VarStyle::Index => VarStyle::Index,
                    VarStyle::Underscore => VarStyle::Underscore,
                })?;
            }
            if items.len() == 1 {
                write!(f, ",")?;
            }
            write!(f, ")")
        }
    }
}

/// Atomic constant payload: hashable and totally ordered, so it can key
/// index maps. Kind and payload both participate in equality (`'1'` and the
/// integer `1` are distinct constants).
#[derive(Clone, Debug)]
pub enum Constant {
    Sym(Arc<str>),
    Int(i64),
    Real(f64),
    Str(Arc<str>),
    /// The empty tuple `()`.
    Unit,
}

impl Constant {
    pub fn sym(name: impl AsRef<str>) -> Constant {
        Constant::Sym(Arc::from(name.as_ref()))
    }

    fn kind_rank(&self) -> u8 {
        match self {
            Constant::Sym(_) => 0,
            Constant::Int(_) => 1,
            Constant::Real(_) => 2,
            Constant::Str(_) => 3,
            Constant::Unit => 4,
        }
    }

    pub fn to_term(&self) -> Term {
        match self {
            Constant::Sym(s) => Term::Sym(s.clone()),
            Constant::Int(n) => Term::Int(*n),
            Constant::Real(x) => Term::Real(*x),
            Constant::Str(s) => Term::Str(s.clone()),
            Constant::Unit => Term::unit(),
        }
    }
}

impl PartialEq for Constant {
    fn eq(&self, other: &Constant) -> bool {
        match (self, other) {
            (Constant::Sym(a), Constant::Sym(b)) => a == b,
            (Constant::Int(a), Constant::Int(b)) => a == b,
            (Constant::Real(a), Constant::Real(b)) => a.to_bits() == b.to_bits(),
            (Constant::Str(a), Constant::Str(b)) => a == b,
            (Constant::Unit, Constant::Unit) => true,
            _ => false,
        }
    }
}

impl Eq for Constant {}

impl Hash for Constant {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.kind_rank().hash(state);
        match self {
            Constant::Sym(s) | Constant::Str(s) => s.hash(state),
            Constant::Int(n) => n.hash(state),
            Constant::Real(x) => x.to_bits().hash(state),
            Constant::Unit => {}
        }
    }
}

impl Ord for Constant {
    fn cmp(&self, other: &Constant) -> Ordering {
        self.kind_rank().cmp(&other.kind_rank()).then_with(|| match (self, other) {
            (Constant::Sym(a), Constant::Sym(b)) => a.cmp(b),
            (Constant::Int(a), Constant::Int(b)) => a.cmp(b),
            (Constant::Real(a), Constant::Real(b)) => a.total_cmp(b),
            (Constant::Str(a), Constant::Str(b)) => a.cmp(b),
            (Constant::Unit, Constant::Unit) => Ordering::Equal,
            _ => unreachable!("kind ranks equal"),
        })
    }
}

impl PartialOrd for Constant {
    fn partial_cmp(&self, other: &Constant) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Constant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constant::Sym(s) | Constant::Str(s) => write!(f, "'{s}'"),
            Constant::Int(n) => write!(f, "{n}"),
            Constant::Real(x) => write!(f, "{x:?}"),
            Constant::Unit => write!(f, "()"),
        }
    }
}

/// Location of one constant occurrence: the child-index sequence from the
/// term root, paired with the constant found there.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Path {
    pub steps: Vec<u32>,
    pub constant: Constant,
}

/// A term's shape with constants as filled nodes and variables as wildcards.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Skeleton {
    /// A constant leaf, rendered `o`.
    Leaf,
    /// A variable, rendered `*`; matches any complete ground subtree.
    Wild,
    Tup(Vec<Skeleton>),
}

impl Skeleton {
    /// True when this (query) skeleton is compatible with the shape of a
    /// ground fact: each wildcard absorbs exactly one complete subtree.
    /// A `false` result proves the underlying terms cannot unify.
    pub fn matches_ground(&self, fact: &Skeleton) -> bool {
        match (self, fact) {
            (Skeleton::Wild, _) => true,
            (Skeleton::Leaf, Skeleton::Leaf) => true,
            (Skeleton::Tup(qs), Skeleton::Tup(fs)) => {
                qs.len() == fs.len() && qs.iter().zip(fs.iter()).all(|(q, f)| q.matches_ground(f))
            }
            _ => false,
        }
    }
}

impl fmt::Display for Skeleton {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Skeleton::Leaf => write!(f, "o"),
            Skeleton::Wild => write!(f, "*"),
            Skeleton::Tup(items) => {
                write!(f, "(")?;
                for item in items {
                    write!(f, "{item}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Classic functor/arguments term, the input domain of the lifting morphism.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ClassicTerm {
    Atom(Arc<str>),
    /// Variables are integer-identified, matching the tuple side.
    Var(usize),
    /// Functor applied to one or more arguments.
    Compound(Arc<str>, Vec<ClassicTerm>),
}

impl ClassicTerm {
    pub fn atom(name: impl AsRef<str>) -> ClassicTerm {
        ClassicTerm::Atom(Arc::from(name.as_ref()))
    }

    /// Panics if `args` is empty: zero-arity applications are atoms.
    pub fn compound(functor: impl AsRef<str>, args: Vec<ClassicTerm>) -> ClassicTerm {
        assert!(!args.is_empty(), "compound terms need at least one argument");
        ClassicTerm::Compound(Arc::from(functor.as_ref()), args)
    }

    /// Lifts into the tuple representation: `f(x1,..,xn)` becomes the tuple
    /// `(f x1' .. xn')`, constants and variables map to themselves. The
    /// mapping is injective; [`Term::lower`] is its left inverse.
    pub fn lift(&self) -> Term {
        match self {
            ClassicTerm::Atom(s) => Term::Sym(s.clone()),
            ClassicTerm::Var(i) => Term::Var(*i),
            ClassicTerm::Compound(f, args) => {
                let mut items = Vec::with_capacity(args.len() + 1);
                items.push(Term::Sym(f.clone()));
                items.extend(args.iter().map(ClassicTerm::lift));
                Term::tup(items)
            }
        }
    }
}

impl fmt::Display for ClassicTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassicTerm::Atom(s) => write!(f, "{s}"),
            ClassicTerm::Var(i) => write!(f, "V{i}"),
            ClassicTerm::Compound(name, args) => {
                write!(f, "{name}(")?;
                for (i, arg) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{arg}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Why a term has no classic preimage.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LowerError {
    EmptyTuple,
    NonSymbolHead,
    /// A one-element tuple would be a zero-arity compound.
    MissingArguments,
    /// Numeric and string leaves have no classic counterpart.
    NonAtomLeaf,
}

impl fmt::Display for LowerError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LowerError::EmptyTuple => write!(f, "empty tuple has no classic preimage"),
            LowerError::NonSymbolHead => write!(f, "tuple head is not a symbol"),
            LowerError::MissingArguments => write!(f, "one-element tuple has no classic preimage"),
            LowerError::NonAtomLeaf => write!(f, "numeric or string leaf has no classic preimage"),
        }
    }
}

impl std::error::Error for LowerError {}
