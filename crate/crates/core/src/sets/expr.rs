//! Expressions built from shifted copies of a set `E` and their complements
//! under union and intersection.
//!
//! `Atom { shift: h, complemented: false }` denotes `E − h = {n : n + h ∈ E}`;
//! the complemented atom denotes its complement. Text form:
//! `E`, `~E`, `E@h`, `(e1 | e2)`, `(e1 & e2)`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use super::stream::{self, IntervalIter};
use super::{IntervalSource, LazySet, Window, WindowSet};
use crate::error::SetError;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ShiftExpr {
    Atom { shift: i64, complemented: bool },
    Union(Box<ShiftExpr>, Box<ShiftExpr>),
    Intersect(Box<ShiftExpr>, Box<ShiftExpr>),
}

impl ShiftExpr {
    pub fn atom(shift: i64) -> Self {
        Self::Atom { shift, complemented: false }
    }

    pub fn not_atom(shift: i64) -> Self {
        Self::Atom { shift, complemented: true }
    }

    pub fn union(a: Self, b: Self) -> Self {
        Self::Union(Box::new(a), Box::new(b))
    }

    pub fn intersect(a: Self, b: Self) -> Self {
        Self::Intersect(Box::new(a), Box::new(b))
    }

    /// Left-nested union of the given expressions; `None` for an empty input.
    pub fn union_all(items: impl IntoIterator<Item = Self>) -> Option<Self> {
        items.into_iter().reduce(Self::union)
    }

    pub fn intersect_all(items: impl IntoIterator<Item = Self>) -> Option<Self> {
        items.into_iter().reduce(Self::intersect)
    }

    /// `⋃_{h ∈ shifts} (E − h)`.
    pub fn union_of_shifts(shifts: impl IntoIterator<Item = i64>) -> Option<Self> {
        Self::union_all(shifts.into_iter().map(Self::atom))
    }

    /// The complement, pushed down to the atoms.
    pub fn negate(&self) -> Self {
        match self {
            Self::Atom { shift, complemented } => Self::Atom { shift: *shift, complemented: !complemented },
            Self::Union(a, b) => Self::intersect(a.negate(), b.negate()),
            Self::Intersect(a, b) => Self::union(a.negate(), b.negate()),
        }
    }

    pub fn max_abs_shift(&self) -> u64 {
        match self {
            Self::Atom { shift, .. } => shift.unsigned_abs(),
            Self::Union(a, b) | Self::Intersect(a, b) => a.max_abs_shift().max(b.max_abs_shift()),
        }
    }

    /// Distinct shifts, ascending.
    pub fn shifts(&self) -> Vec<i64> {
        let mut out = BTreeSet::new();
        self.collect_shifts(&mut out);
        out.into_iter().collect()
    }

    fn collect_shifts(&self, out: &mut BTreeSet<i64>) {
        match self {
            Self::Atom { shift, .. } => {
                out.insert(*shift);
            }
            Self::Union(a, b) | Self::Intersect(a, b) => {
                a.collect_shifts(out);
                b.collect_shifts(out);
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Self::Atom { .. } => 0,
            Self::Union(a, b) | Self::Intersect(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    /// Truth value given membership of `n + h` in `E` for each shift `h`.
    pub fn eval_bool(&self, member: &impl Fn(i64) -> bool) -> bool {
        match self {
            Self::Atom { shift, complemented } => member(*shift) != *complemented,
            Self::Union(a, b) => a.eval_bool(member) || b.eval_bool(member),
            Self::Intersect(a, b) => a.eval_bool(member) && b.eval_bool(member),
        }
    }
}

impl fmt::Display for ShiftExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Atom { shift, complemented } => {
                if *complemented {
                    write!(f, "~")?;
                }
                if *shift == 0 {
                    write!(f, "E")
                } else {
                    write!(f, "E@{shift}")
                }
            }
            Self::Union(a, b) => write!(f, "({a} | {b})"),
            Self::Intersect(a, b) => write!(f, "({a} & {b})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("at column {column}: {message}")]
pub struct ExprParseError {
    /// 1-based character column.
    pub column: usize,
    pub message: String,
}

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    text: &'a str,
}

impl Parser<'_> {
    fn err(&self, message: impl Into<String>) -> ExprParseError {
        ExprParseError { column: self.pos + 1, message: message.into() }
    }

    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<ShiftExpr, ExprParseError> {
        match self.peek() {
            Some('~') => {
                self.pos += 1;
                Ok(self.expr()?.negate())
            }
            Some('E') => {
                self.pos += 1;
                let mut shift = 0;
                if self.peek() == Some('@') {
                    self.pos += 1;
                    shift = self.integer()?;
                }
                Ok(ShiftExpr::atom(shift))
            }
            Some('(') => {
                self.pos += 1;
                let mut acc = self.expr()?;
                let mut op: Option<char> = None;
                loop {
                    match self.peek() {
                        Some(')') => {
                            self.pos += 1;
                            return Ok(acc);
                        }
                        Some(c @ ('|' | '&')) => {
                            if op.is_some_and(|o| o != c) {
                                return Err(self.err("mixed '|' and '&' need parentheses"));
                            }
                            op = Some(c);
                            self.pos += 1;
                            let rhs = self.expr()?;
                            acc = if c == '|' { ShiftExpr::union(acc, rhs) } else { ShiftExpr::intersect(acc, rhs) };
                        }
                        Some(c) => return Err(self.err(format!("expected '|', '&' or ')', found '{c}'"))),
                        None => return Err(self.err("unclosed '('")),
                    }
                }
            }
            Some(c) => Err(self.err(format!("expected 'E', '~' or '(', found '{c}'"))),
            None => Err(self.err("unexpected end of expression")),
        }
    }

    fn integer(&mut self) -> Result<i64, ExprParseError> {
        self.skip_ws();
        let start = self.pos;
        if matches!(self.chars.get(self.pos), Some('-' | '+')) {
            self.pos += 1;
        }
        while self.chars.get(self.pos).is_some_and(char::is_ascii_digit) {
            self.pos += 1;
        }
        let digits: String = self.chars[start..self.pos].iter().collect();
        digits.parse().map_err(|_| {
            self.pos = start;
            self.err(format!("expected an integer shift in {:?}", self.text))
        })
    }
}

impl FromStr for ShiftExpr {
    type Err = ExprParseError;

    fn from_str(s: &str) -> Result<Self, ExprParseError> {
        let mut parser = Parser { chars: s.chars().collect(), pos: 0, text: s };
        let expr = parser.expr()?;
        if let Some(c) = parser.peek() {
            return Err(parser.err(format!("trailing input starting at '{c}'")));
        }
        Ok(expr)
    }
}

/// Evaluation plan. A leaf `[p, q]` stands for `⋃_{h=p}^{q} (E − h)`,
/// complemented when `negated`; runs of consecutive shifts under one union
/// collapse into a single leaf evaluated by dilation in one pass.
#[derive(Clone, Debug, PartialEq)]
enum Plan {
    Leaf { p: i64, q: i64, negated: bool },
    Union(Vec<Plan>),
    Intersect(Vec<Plan>),
}

fn flatten<'e>(expr: &'e ShiftExpr, union: bool, out: &mut Vec<&'e ShiftExpr>) {
    match expr {
        ShiftExpr::Union(a, b) if union => {
            flatten(a, union, out);
            flatten(b, union, out);
        }
        ShiftExpr::Intersect(a, b) if !union => {
            flatten(a, union, out);
            flatten(b, union, out);
        }
        other => out.push(other),
    }
}

fn runs(shifts: BTreeSet<i64>) -> Vec<(i64, i64)> {
    let mut out: Vec<(i64, i64)> = Vec::new();
    for h in shifts {
        match out.last_mut() {
            Some(last) if last.1 + 1 == h => last.1 = h,
            _ => out.push((h, h)),
        }
    }
    out
}

fn compile(expr: &ShiftExpr) -> Plan {
    match expr {
        ShiftExpr::Atom { shift, complemented } => Plan::Leaf { p: *shift, q: *shift, negated: *complemented },
        ShiftExpr::Union(..) | ShiftExpr::Intersect(..) => {
            let is_union = matches!(expr, ShiftExpr::Union(..));
            let mut parts = Vec::new();
            flatten(expr, is_union, &mut parts);
            // Union: merge positive atoms. Intersection: merge complemented
            // atoms, since ∩ (E − h)^c = (⋃ (E − h))^c.
            let mut mergeable = BTreeSet::new();
            let mut children = Vec::new();
            for part in parts {
                match part {
                    ShiftExpr::Atom { shift, complemented } if *complemented != is_union => {
                        mergeable.insert(*shift);
                    }
                    other => children.push(compile(other)),
                }
            }
            let negated = !is_union;
            children.extend(runs(mergeable).into_iter().map(|(p, q)| Plan::Leaf { p, q, negated }));
            if children.len() == 1 {
                children.pop().unwrap()
            } else if is_union {
                Plan::Union(children)
            } else {
                Plan::Intersect(children)
            }
        }
    }
}

fn stream_plan<'a>(plan: &Plan, src: &'a dyn IntervalSource, w: Window) -> Result<IntervalIter<'a>, SetError> {
    Ok(match plan {
        Plan::Leaf { p, q, negated } => {
            let need = w.offset(*p, *q)?;
            let base = src.stream(need)?;
            let dilated = stream::clip(stream::dilate(base, *p, *q), w);
            if *negated {
                stream::complement(dilated, w)
            } else {
                dilated
            }
        }
        Plan::Union(children) | Plan::Intersect(children) => {
            let parts = children.iter().map(|c| stream_plan(c, src, w)).collect::<Result<Vec<_>, _>>()?;
            let op = if matches!(plan, Plan::Union(_)) { stream::union } else { stream::intersect };
            stream::fold_balanced(parts, op).expect("compiled plans have at least one child")
        }
    })
}

/// Streams `expr` evaluated over `src` on the window `w`.
pub fn stream_expr<'a>(expr: &ShiftExpr, src: &'a dyn IntervalSource, w: Window) -> Result<IntervalIter<'a>, SetError> {
    stream_plan(&compile(expr), src, w)
}

pub fn evaluate(expr: &ShiftExpr, src: &dyn IntervalSource, w: Window) -> Result<WindowSet, SetError> {
    Ok(WindowSet::from_stream(w, stream_expr(expr, src, w)?))
}

pub fn count(expr: &ShiftExpr, src: &dyn IntervalSource, w: Window) -> Result<u64, SetError> {
    Ok(stream::total_len(stream_expr(expr, src, w)?))
}

/// `[w.lo − s, w.hi + s)` with `s` the largest absolute shift of `expr`.
pub fn padded_window(expr: &ShiftExpr, w: Window) -> Result<Window, SetError> {
    let s = expr.max_abs_shift();
    w.pad(s, s)
}

/// `E ∩ w` materialized.
pub fn restrict(set: &LazySet, w: Window) -> Result<WindowSet, SetError> {
    Ok(WindowSet::from_stream(w, set.stream(w)?))
}

/// Restricts `set` once to the padded window, then evaluates the tree on `w`.
pub fn eval_expr(expr: &ShiftExpr, set: &LazySet, w: Window) -> Result<WindowSet, SetError> {
    let base = restrict(set, padded_window(expr, w)?)?;
    evaluate(expr, &base, w)
}

/// Exact `|expr(E) ∩ w|`. Exact-arithmetic sets are streamed without
/// materialization; rotation sets are restricted once to the padded window.
pub fn count_on(expr: &ShiftExpr, set: &LazySet, w: Window) -> Result<u64, SetError> {
    if set.is_exact() {
        count(expr, set, w)
    } else {
        let base = restrict(set, padded_window(expr, w)?)?;
        count(expr, &base, w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(lo: i64, hi: i64) -> Window {
        Window::new(lo, hi).unwrap()
    }

    #[test]
    fn parse_and_print() {
        let e: ShiftExpr = "((E@3 | ~E@-2) & E@5)".parse().unwrap();
        assert_eq!(e.to_string(), "((E@3 | ~E@-2) & E@5)");
        assert_eq!(e.shifts(), vec![-2, 3, 5]);
        assert_eq!(e.max_abs_shift(), 5);
        let n: ShiftExpr = "~(E | E@1)".parse().unwrap();
        assert_eq!(n, ShiftExpr::intersect(ShiftExpr::not_atom(0), ShiftExpr::not_atom(1)));
        let chain: ShiftExpr = "(E | E@1 | E@2)".parse().unwrap();
        assert_eq!(chain.shifts(), vec![0, 1, 2]);
    }

    #[test]
    fn parse_errors_carry_columns() {
        let err = "(E | E@1 & E@2)".parse::<ShiftExpr>().unwrap_err();
        assert_eq!(err.column, 10);
        let err = "(E | X)".parse::<ShiftExpr>().unwrap_err();
        assert_eq!(err.column, 6);
        assert!("(E | E@)".parse::<ShiftExpr>().is_err());
        assert!("E E".parse::<ShiftExpr>().is_err());
        assert!("(E | E".parse::<ShiftExpr>().is_err());
    }

    #[test]
    fn identity_and_excluded_middle() {
        let set = LazySet::HindmanBlocks;
        let win = w(0, 300);
        assert_eq!(eval_expr(&ShiftExpr::atom(0), &set, win).unwrap(), restrict(&set, win).unwrap());
        let all = ShiftExpr::union(ShiftExpr::atom(0), ShiftExpr::not_atom(0));
        assert_eq!(eval_expr(&all, &set, win).unwrap(), WindowSet::full(win));
    }

    #[test]
    fn compiled_runs() {
        let e = ShiftExpr::union_of_shifts([1, 2, 3, 7, 8]).unwrap();
        assert_eq!(
            compile(&e),
            Plan::Union(vec![Plan::Leaf { p: 1, q: 3, negated: false }, Plan::Leaf { p: 7, q: 8, negated: false }])
        );
        let i = ShiftExpr::intersect_all([ShiftExpr::not_atom(0), ShiftExpr::not_atom(1), ShiftExpr::atom(4)]).unwrap();
        assert_eq!(
            compile(&i),
            Plan::Intersect(vec![Plan::Leaf { p: 4, q: 4, negated: false }, Plan::Leaf { p: 0, q: 1, negated: true }])
        );
    }

    #[test]
    fn membership_agrees_with_bool_eval() {
        let set = LazySet::HindmanBlocks;
        let e: ShiftExpr = "((E@3 | ~E@-2) & (E@5 | (~E & E@1)))".parse().unwrap();
        let win = w(-20, 200);
        let got = eval_expr(&e, &set, win).unwrap();
        for n in win.lo..win.hi {
            let expect = e.eval_bool(&|h| set.contains(n + h).unwrap());
            assert_eq!(got.contains(n), expect, "n={n}");
        }
    }
}
