//! Host function registry: the closed set of actions, functions and
//! generators reachable from `#`, `` ` `` and ```` `` ```` goals.
//!
//! Host code works on [`Val`], a variable-free mirror of ground terms, so
//! registered functions never see binding environments.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::term::Term;

/// A ground host value. `to_val`/`to_term` form a bijection with the
/// ground term fragment.
#[derive(Clone, Debug, PartialEq)]
pub enum Val {
    Sym(Arc<str>),
    Str(Arc<str>),
    Int(i64),
    Real(f64),
    Tup(Vec<Val>),
}

impl Val {
    pub fn sym(s: impl AsRef<str>) -> Val {
        Val::Sym(Arc::from(s.as_ref()))
    }

    pub fn bool_sym(b: bool) -> Val {
        Val::sym(if b { "true" } else { "false" })
    }

    pub fn to_term(&self) -> Term {
        match self {
            Val::Sym(s) => Term::Sym(s.clone()),
            Val::Str(s) => Term::Str(s.clone()),
            Val::Int(n) => Term::Int(*n),
            Val::Real(x) => Term::Real(*x),
            Val::Tup(items) => Term::tup(items.iter().map(Val::to_term).collect()),
        }
    }

    /// Text used by `print`: bare scalars, tuple style for tuples.
    fn print_text(&self) -> String {
        match self {
            Val::Sym(s) | Val::Str(s) => s.to_string(),
            other => other.to_term().to_string(),
        }
    }
}

/// Converts a fully dereferenced term; `None` if a variable remains.
pub fn to_val(t: &Term) -> Option<Val> {
    match t {
        Term::Var(_) => None,
        Term::Sym(s) => Some(Val::Sym(s.clone())),
        Term::Str(s) => Some(Val::Str(s.clone())),
        Term::Int(n) => Some(Val::Int(*n)),
        Term::Real(x) => Some(Val::Real(*x)),
        Term::Tup(items) => Some(Val::Tup(items.iter().map(to_val).collect::<Option<_>>()?)),
    }
}

/// Failure reported by host code; surfaces as a stream error on the goal.
#[derive(Clone, Debug)]
pub struct HostError(pub String);

impl HostError {
    pub fn new(message: impl Into<String>) -> HostError {
        HostError(message.into())
    }
}

impl fmt::Display for HostError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for HostError {}

pub type HostResult<T> = Result<T, HostError>;
/// Yields of a host generator, pulled lazily by the engine.
pub type HostStream = Box<dyn Iterator<Item = Val> + Send>;

type ActionFn = dyn Fn(&[Val]) -> HostResult<()> + Send + Sync;
type FunFn = dyn Fn(&[Val]) -> HostResult<Val> + Send + Sync;
type GenFn = dyn Fn(&[Val]) -> HostResult<HostStream> + Send + Sync;

/// Name-keyed tables of host callables. Closed world: only registered
/// names are reachable from programs.
#[derive(Clone, Default)]
pub struct HostRegistry {
    actions: HashMap<Arc<str>, Arc<ActionFn>>,
    functions: HashMap<Arc<str>, Arc<FunFn>>,
    generators: HashMap<Arc<str>, Arc<GenFn>>,
}

impl HostRegistry {
    pub fn new() -> HostRegistry {
        HostRegistry::default()
    }

    pub fn register_action(
        &mut self,
        name: &str,
        f: impl Fn(&[Val]) -> HostResult<()> + Send + Sync + 'static,
    ) {
        self.actions.insert(Arc::from(name), Arc::new(f));
    }

    pub fn register_function(
        &mut self,
        name: &str,
        f: impl Fn(&[Val]) -> HostResult<Val> + Send + Sync + 'static,
    ) {
        self.functions.insert(Arc::from(name), Arc::new(f));
    }

    pub fn register_generator(
        &mut self,
        name: &str,
        f: impl Fn(&[Val]) -> HostResult<HostStream> + Send + Sync + 'static,
    ) {
        self.generators.insert(Arc::from(name), Arc::new(f));
    }

    pub fn action(&self, name: &str) -> Option<Arc<ActionFn>> {
        self.actions.get(name).cloned()
    }

    pub fn function(&self, name: &str) -> Option<Arc<FunFn>> {
        self.functions.get(name).cloned()
    }

    pub fn generator(&self, name: &str) -> Option<Arc<GenFn>> {
        self.generators.get(name).cloned()
    }
}

impl fmt::Debug for HostRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HostRegistry")
            .field("actions", &self.actions.keys().collect::<Vec<_>>())
            .field("functions", &self.functions.keys().collect::<Vec<_>>())
            .field("generators", &self.generators.keys().collect::<Vec<_>>())
            .finish()
    }
}

fn want_args(name: &str, args: &[Val], n: usize) -> HostResult<()> {
    if args.len() == n {
        Ok(())
    } else {
        Err(HostError::new(format!("{name} expects {n} arguments, got {}", args.len())))
    }
}

fn as_real(v: &Val) -> HostResult<f64> {
    match v {
        Val::Int(n) => Ok(*n as f64),
        Val::Real(x) => Ok(*x),
        other => Err(HostError::new(format!("expected a number, got {:?}", other))),
    }
}

fn arith2(
    name: &'static str,
    int_op: impl Fn(i64, i64) -> HostResult<i64> + Send + Sync + 'static,
    real_op: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
) -> impl Fn(&[Val]) -> HostResult<Val> + Send + Sync + 'static {
    move |args| {
        want_args(name, args, 2)?;
        match (&args[0], &args[1]) {
            (Val::Int(a), Val::Int(b)) => int_op(*a, *b).map(Val::Int),
            (a, b) => Ok(Val::Real(real_op(as_real(a)?, as_real(b)?))),
        }
    }
}

fn compare2(
    name: &'static str,
    ord_ok: impl Fn(std::cmp::Ordering) -> bool + Send + Sync + 'static,
) -> impl Fn(&[Val]) -> HostResult<Val> + Send + Sync + 'static {
    move |args| {
        want_args(name, args, 2)?;
        let ord = match (&args[0], &args[1]) {
            (Val::Int(a), Val::Int(b)) => a.cmp(b),
            (a @ (Val::Int(_) | Val::Real(_)), b @ (Val::Int(_) | Val::Real(_))) => {
                as_real(a)?.total_cmp(&as_real(b)?)
            }
            (Val::Sym(a), Val::Sym(b)) | (Val::Str(a), Val::Str(b)) => a.cmp(b),
            (a, b) => {
                return Err(HostError::new(format!("cannot order {a:?} and {b:?}")));
            }
        };
        Ok(Val::bool_sym(ord_ok(ord)))
    }
}

/// The built-in registry: `print`; arithmetic `add sub mul div mod abs`;
/// comparisons `eq lt gt` answering `true`/`false`; generators
/// `range lo hi` (integers `lo..hi-1`) and `iter x` (tuple elements, or
/// the characters of a text constant).
pub fn standard_registry() -> HostRegistry {
    let mut reg = HostRegistry::new();

    reg.register_action("print", |args| {
        let line: Vec<String> = args.iter().map(Val::print_text).collect();
        println!("{}", line.join(" "));
        Ok(())
    });

    reg.register_function("add", arith2("add", |a, b| ok_int(a.checked_add(b)), |a, b| a + b));
    reg.register_function("sub", arith2("sub", |a, b| ok_int(a.checked_sub(b)), |a, b| a - b));
    reg.register_function("mul", arith2("mul", |a, b| ok_int(a.checked_mul(b)), |a, b| a * b));
    reg.register_function("div", arith2("div", |a, b| ok_int(a.checked_div(b)), |a, b| a / b));
    reg.register_function("mod", arith2("mod", |a, b| ok_int(a.checked_rem(b)), |a, b| a % b));
    reg.register_function("abs", |args| {
        want_args("abs", args, 1)?;
        match &args[0] {
            Val::Int(n) => ok_int(n.checked_abs()).map(Val::Int),
            Val::Real(x) => Ok(Val::Real(x.abs())),
            other => Err(HostError::new(format!("expected a number, got {other:?}"))),
        }
    });

    reg.register_function("eq", |args| {
        want_args("eq", args, 2)?;
        let equal = match (&args[0], &args[1]) {
            (a @ (Val::Int(_) | Val::Real(_)), b @ (Val::Int(_) | Val::Real(_))) => {
                as_real(a)? == as_real(b)?
            }
            (a, b) => a == b,
        };
        Ok(Val::bool_sym(equal))
    });
    reg.register_function("lt", compare2("lt", std::cmp::Ordering::is_lt));
    reg.register_function("gt", compare2("gt", std::cmp::Ordering::is_gt));

    reg.register_generator("range", |args| {
        want_args("range", args, 2)?;
        match (&args[0], &args[1]) {
            (Val::Int(lo), Val::Int(hi)) => {
                let (lo, hi) = (*lo, *hi);
                Ok(Box::new((lo..hi).map(Val::Int)) as HostStream)
            }
            _ => Err(HostError::new("range expects two integers")),
        }
    });

    reg.register_generator("iter", |args| {
        want_args("iter", args, 1)?;
        match &args[0] {
            Val::Tup(items) => Ok(Box::new(items.clone().into_iter()) as HostStream),
            Val::Sym(s) | Val::Str(s) => {
                let chars: Vec<Val> = s.chars().map(|c| Val::sym(c.to_string())).collect();
                Ok(Box::new(chars.into_iter()) as HostStream)
            }
            other => Err(HostError::new(format!("iter cannot enumerate {other:?}"))),
        }
    });

    reg
}

fn ok_int(n: Option<i64>) -> HostResult<i64> {
    n.ok_or_else(|| HostError::new("integer overflow or division by zero"))
}
