//! Bundled example programs and datasets, used by the benchmark runner and
//! handy as library fixtures.

/// Transitive closure of an `is` relation over a small animal taxonomy.
pub const TC: &str = include_str!("../programs/tc.nat");

/// All permutations of a `()`-terminated list.
pub const PERM: &str = include_str!("../programs/perm.nat");

/// Infinite answer stream produced by a `^` yield inside a loop.
pub const WORM: &str = include_str!("../programs/worm.nat");

/// N-Queens, all solutions, via registry arithmetic.
pub const QUEENS: &str = include_str!("../programs/queens.nat");

/// Rules querying the chemical elements dataset through `~` goals.
pub const ELEMENTS: &str = include_str!("../programs/elements.nat");

/// Tab-separated properties of elements 1..86: atomic number, symbol,
/// neutrons, protons, electrons, period, group, phase, type, isotope count,
/// shells.
pub const ELEMENTS_TSV: &str = include_str!("../programs/elements.tsv");
