//! Parsers for the set, sequence, Følner-family and number arguments.
//!
//! Set and sequence specs are a kind word followed by `key=value` tokens,
//! the same text the library prints for them (e.g. `rot alpha=golden u=0 v=1/2`).

use std::collections::BTreeMap;
use std::fmt;

use ergolab::constructions::{ab_set, hindman_set, rotation_return_set};
use ergolab::real::{parse_ratio, Real};
use ergolab::sequences::IntSequence;
use ergolab::sets::{parse_interval_list, FolnerFamily, LazySet, Window};

/// A malformed argument, located by 1-based column within the argument text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecError {
    pub arg: String,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} at column {}: {}", self.arg, self.column, self.message)
    }
}

impl std::error::Error for SpecError {}

fn fail(arg: &str, offset: usize, message: impl Into<String>) -> SpecError {
    SpecError { arg: arg.to_string(), column: offset + 1, message: message.into() }
}

/// A kind word and its `key=value` parameters, each with its byte offset.
struct Parts<'a> {
    text: &'a str,
    kind: &'a str,
    rest_at: usize,
    rest: &'a str,
    params: BTreeMap<&'a str, (&'a str, usize)>,
}

impl<'a> Parts<'a> {
    /// Splits off the kind word. Parameters are parsed only when `keyed`.
    fn split(text: &'a str, keyed: bool) -> Result<Self, SpecError> {
        let lead = text.len() - text.trim_start().len();
        let body = text.trim();
        if body.is_empty() {
            return Err(fail(text, 0, "empty spec"));
        }
        let kind_end = body.find(char::is_whitespace).unwrap_or(body.len());
        let kind = &body[..kind_end];
        let rest = body[kind_end..].trim_start();
        let rest_at = lead + body.len() - rest.len();
        let mut params = BTreeMap::new();
        if keyed {
            let mut at = rest_at;
            for token in rest.split(' ') {
                if !token.is_empty() {
                    let Some((k, v)) = token.split_once('=') else {
                        return Err(fail(text, at, format!("expected key=value, found {token:?}")));
                    };
                    if params.insert(k, (v, at + k.len() + 1)).is_some() {
                        return Err(fail(text, at, format!("duplicate key {k:?}")));
                    }
                }
                at += token.len() + 1;
            }
        }
        Ok(Self { text, kind, rest_at, rest, params })
    }

    fn real(&mut self, key: &str, default: Option<&str>) -> Result<Real, SpecError> {
        match self.params.remove(key) {
            Some((v, at)) => Real::parse(v).ok_or_else(|| fail(self.text, at, format!("{key}: not a number: {v:?}"))),
            None => match default {
                Some(d) => Ok(Real::parse(d).expect("default literal")),
                None => Err(fail(self.text, self.rest_at, format!("missing parameter {key}="))),
            },
        }
    }

    fn ratio(&mut self, key: &str) -> Result<num_rational::Ratio<i64>, SpecError> {
        let (v, at) = self.params.remove(key).ok_or_else(|| fail(self.text, self.rest_at, format!("missing parameter {key}=")))?;
        parse_ratio(v).ok_or_else(|| fail(self.text, at, format!("{key}: not an exact rational: {v:?}")))
    }

    fn count(&mut self, key: &str) -> Result<Option<u64>, SpecError> {
        match self.params.remove(key) {
            Some((v, at)) => parse_count(v).map(Some).map_err(|e| fail(self.text, at + e.column - 1, e.message)),
            None => Ok(None),
        }
    }

    fn int_list(&mut self, key: &str) -> Result<Vec<i64>, SpecError> {
        let (v, at) = self.params.remove(key).ok_or_else(|| fail(self.text, self.rest_at, format!("missing parameter {key}=")))?;
        int_list_at(self.text, v, at)
    }

    /// Rejects parameters that no constructor consumed.
    fn finish(self) -> Result<(), SpecError> {
        match self.params.iter().next() {
            Some((k, (_, at))) => Err(fail(self.text, at - k.len() - 1, format!("unknown parameter {k:?} for {}", self.kind))),
            None => Ok(()),
        }
    }

    fn no_rest(&self) -> Result<(), SpecError> {
        if self.rest.is_empty() {
            Ok(())
        } else {
            Err(fail(self.text, self.rest_at, format!("{} takes no parameters", self.kind)))
        }
    }
}

fn int_list_at(text: &str, list: &str, at: usize) -> Result<Vec<i64>, SpecError> {
    let mut out = Vec::new();
    let mut pos = at;
    for item in list.split(',') {
        out.push(item.trim().parse().map_err(|_| fail(text, pos, format!("not an integer: {item:?}")))?);
        pos += item.len() + 1;
    }
    Ok(out)
}

fn lib_err(text: &str, at: usize, e: impl fmt::Display) -> SpecError {
    fail(text, at, e.to_string())
}

/// Set specs:
/// `hindman`, `evens`, `all`, `empty`, `periodic m=4 r=0,1`, `ab a=1/3 b=2/3`,
/// `rot alpha=golden u=0 v=1/2 x0=0` (`u` and `x0` default to 0),
/// `intervals [0,5)[9,12)`.
pub fn parse_set(text: &str) -> Result<LazySet, SpecError> {
    let keyed = !text.trim_start().starts_with("intervals");
    let mut p = Parts::split(text, keyed)?;
    let set = match p.kind {
        "hindman" => {
            p.no_rest()?;
            hindman_set()
        }
        "evens" => {
            p.no_rest()?;
            LazySet::evens()
        }
        "all" => {
            p.no_rest()?;
            LazySet::integers()
        }
        "empty" => {
            p.no_rest()?;
            LazySet::empty()
        }
        "periodic" => {
            let m = p.count("m")?.ok_or_else(|| fail(text, p.rest_at, "missing parameter m="))?;
            let residues = p.int_list("r")?;
            if let Some(r) = residues.iter().find(|r| **r < 0) {
                return Err(fail(text, p.rest_at, format!("negative residue {r}")));
            }
            LazySet::periodic(m, residues.into_iter().map(|r| r as u64)).map_err(|e| lib_err(text, p.rest_at, e))?
        }
        "ab" => {
            let (a, b) = (p.ratio("a")?, p.ratio("b")?);
            ab_set(a, b).map_err(|e| lib_err(text, p.rest_at, e))?
        }
        "rot" => {
            let alpha = p.real("alpha", None)?;
            let u = p.real("u", Some("0"))?;
            let v = p.real("v", None)?;
            let x0 = p.real("x0", Some("0"))?;
            rotation_return_set(alpha, x0, u, v).map_err(|e| lib_err(text, p.rest_at, e))?
        }
        "intervals" => {
            let ivs = parse_interval_list(p.rest).map_err(|e| lib_err(text, p.rest_at, e))?;
            LazySet::explicit(ivs)
        }
        other => return Err(fail(text, text.len() - text.trim_start().len(), format!("unknown set kind {other:?}"))),
    };
    p.finish()?;
    Ok(set)
}

/// Sequence specs: `id`, `log`, `poly2log`, `pow b= c=`, `powsum b= c= d= a=`,
/// `powlog b= c= d=`, `powlogsum b= c= d= a=`, `prime c= [n=]`, `list 1,4,9`.
///
/// `need` is the largest index the command will evaluate; it sizes the prime
/// sieve when `n=` is absent.
pub fn parse_seq(text: &str, need: u64) -> Result<IntSequence, SpecError> {
    let keyed = !text.trim_start().starts_with("list");
    let mut p = Parts::split(text, keyed)?;
    let at = p.rest_at;
    let lib = |e: ergolab::SeqError| lib_err(text, at, e);
    let seq = match p.kind {
        "id" => {
            p.no_rest()?;
            IntSequence::identity()
        }
        "log" => {
            p.no_rest()?;
            IntSequence::floor_log()
        }
        "poly2log" => {
            p.no_rest()?;
            IntSequence::poly_plus_log()
        }
        "pow" => {
            let (b, c) = (p.real("b", Some("1"))?, p.real("c", None)?);
            IntSequence::floor_power(b, c).map_err(lib)?
        }
        "powsum" => {
            let (b, c, d, a) = (p.real("b", Some("1"))?, p.real("c", None)?, p.real("d", None)?, p.real("a", None)?);
            IntSequence::floor_power_sum(b, c, d, a).map_err(lib)?
        }
        "powlog" => {
            let (b, c, d) = (p.real("b", Some("1"))?, p.real("c", None)?, p.real("d", None)?);
            IntSequence::floor_power_log(b, c, d).map_err(lib)?
        }
        "powlogsum" => {
            let (b, c, d, a) = (p.real("b", Some("1"))?, p.real("c", None)?, p.real("d", None)?, p.real("a", None)?);
            IntSequence::floor_power_log_sum(b, c, d, a).map_err(lib)?
        }
        "prime" => {
            let c = p.real("c", None)?;
            let n = p.count("n")?.unwrap_or(need).max(1);
            IntSequence::prime_power(c, n as usize).map_err(lib)?
        }
        "list" => IntSequence::explicit(int_list_at(text, p.rest, p.rest_at)?).map_err(lib)?,
        other => return Err(fail(text, text.len() - text.trim_start().len(), format!("unknown sequence kind {other:?}"))),
    };
    p.finish()?;
    Ok(seq)
}

/// Følner specs: `initial`, `dyadic`, `shifted base= step= scale=`, `list [0,4)[0,16)`.
pub fn parse_folner(text: &str) -> Result<FolnerFamily, SpecError> {
    let keyed = !text.trim_start().starts_with("list");
    let mut p = Parts::split(text, keyed)?;
    let fam = match p.kind {
        "initial" => {
            p.no_rest()?;
            FolnerFamily::InitialSegments
        }
        "dyadic" => {
            p.no_rest()?;
            FolnerFamily::DyadicEven
        }
        "shifted" => {
            let int = |p: &mut Parts, key: &str| -> Result<i64, SpecError> {
                let (v, at) = p.params.remove(key).ok_or_else(|| fail(text, p.rest_at, format!("missing parameter {key}=")))?;
                v.parse().map_err(|_| fail(text, at, format!("{key}: not an integer: {v:?}")))
            };
            let base = int(&mut p, "base")?;
            let step = int(&mut p, "step")?;
            let scale = p.count("scale")?.ok_or_else(|| fail(text, p.rest_at, "missing parameter scale="))?;
            if scale == 0 {
                return Err(fail(text, p.rest_at, "scale must be positive"));
            }
            FolnerFamily::Shifted { base, step, scale }
        }
        "list" => {
            let ivs = parse_interval_list(p.rest).map_err(|e| lib_err(text, p.rest_at, e))?;
            let windows = ivs.iter().map(|iv| Window::new(iv.lo, iv.hi)).collect::<Result<Vec<_>, _>>();
            FolnerFamily::Explicit(windows.map_err(|e| lib_err(text, p.rest_at, e))?)
        }
        other => return Err(fail(text, 0, format!("unknown Følner family {other:?}"))),
    };
    p.finish()?;
    Ok(fam)
}

/// A positive count written as `65536`, `1e6`, `2^16` or `1_000_000`.
pub fn parse_count(text: &str) -> Result<u64, SpecError> {
    let t = text.trim().replace('_', "");
    let value = if let Some((m, e)) = t.split_once(['e', 'E']) {
        let m: u64 = m.parse().map_err(|_| fail(text, 0, format!("bad mantissa in {text:?}")))?;
        let e: u32 = e.parse().map_err(|_| fail(text, m.to_string().len() + 1, format!("bad exponent in {text:?}")))?;
        10u64.checked_pow(e).and_then(|p| p.checked_mul(m))
    } else if let Some((b, e)) = t.split_once('^') {
        let b: u64 = b.parse().map_err(|_| fail(text, 0, format!("bad base in {text:?}")))?;
        let e: u32 = e.parse().map_err(|_| fail(text, b.to_string().len() + 1, format!("bad exponent in {text:?}")))?;
        b.checked_pow(e)
    } else {
        Some(t.parse().map_err(|_| fail(text, 0, format!("not a count: {text:?}")))?)
    };
    match value {
        Some(0) => Err(fail(text, 0, "must be positive")),
        Some(v) => Ok(v),
        None => Err(fail(text, 0, "overflows 64 bits")),
    }
}

/// Comma-separated counts. Zero is allowed only when `allow_zero` is set.
pub fn parse_counts(text: &str, allow_zero: bool) -> Result<Vec<u64>, SpecError> {
    let mut out = Vec::new();
    let mut at = 0;
    for item in text.split(',') {
        let v = if allow_zero && item.trim() == "0" {
            0
        } else {
            parse_count(item).map_err(|e| fail(text, at + e.column - 1, e.message))?
        };
        out.push(v);
        at += item.len() + 1;
    }
    Ok(out)
}

/// `default` or a comma-separated list of reals.
pub fn parse_grid(text: &str) -> Result<Vec<Real>, SpecError> {
    if text.trim() == "default" {
        return Ok(ergolab::weyl::default_grid());
    }
    let mut out = Vec::new();
    let mut at = 0;
    for item in text.split(',') {
        out.push(Real::parse(item).ok_or_else(|| fail(text, at, format!("not a number: {item:?}")))?);
        at += item.len() + 1;
    }
    Ok(out)
}

/// `lo,hi` for the half-open window `[lo, hi)`.
pub fn parse_window(text: &str) -> Result<Window, SpecError> {
    let (lo, hi) = text.split_once(',').ok_or_else(|| fail(text, 0, "expected lo,hi"))?;
    let lo: i64 = lo.trim().parse().map_err(|_| fail(text, 0, format!("bad lower end {lo:?}")))?;
    let hi: i64 = match parse_count(hi) {
        Ok(v) => i64::try_from(v).map_err(|_| fail(text, lo.to_string().len() + 1, "upper end too large"))?,
        Err(_) => hi.trim().parse().map_err(|_| fail(text, lo.to_string().len() + 1, format!("bad upper end {hi:?}")))?,
    };
    Window::new(lo, hi).map_err(|e| lib_err(text, 0, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sets_round_trip_through_display() {
        for text in ["hindman", "periodic m=4 r=0,3", "ab a=1/3 b=2/3", "rot alpha=golden u=0 v=1/2 x0=0", "intervals [0,5)[9,12)"] {
            let set = parse_set(text).unwrap();
            assert_eq!(parse_set(&set.to_string()).unwrap(), set, "{text}");
        }
        assert_eq!(parse_set("evens").unwrap(), LazySet::evens());
    }

    #[test]
    fn sequences_round_trip_through_display() {
        for text in ["id", "log", "poly2log", "pow b=1 c=1.4142135623730951", "powlog b=2 c=1.5 d=3", "list 1,4,9"] {
            let seq = parse_seq(text, 10).unwrap();
            assert_eq!(parse_seq(&seq.to_string(), 10).unwrap().to_string(), seq.to_string(), "{text}");
        }
        let p = parse_seq("prime c=0.5", 1000).unwrap();
        assert_eq!(p.max_index(), Some(1000));
    }

    #[test]
    fn errors_carry_columns() {
        let e = parse_seq("pow b=1 c=x", 1).unwrap_err();
        assert_eq!(e.column, 11);
        let e = parse_set("rot alpha=golden v=1/2 w=3").unwrap_err();
        assert_eq!(e.column, 24);
        let e = parse_set("  nope").unwrap_err();
        assert_eq!(e.column, 3);
        assert!(parse_set("hindman extra").is_err());
        assert!(parse_folner("dyadic x").is_err());
    }

    #[test]
    fn counts() {
        assert_eq!(parse_count("1e6").unwrap(), 1_000_000);
        assert_eq!(parse_count("2^16").unwrap(), 65536);
        assert_eq!(parse_count("1_024").unwrap(), 1024);
        assert!(parse_count("0").is_err());
        assert!(parse_count("1e30").is_err());
        assert_eq!(parse_counts("1,10,100", false).unwrap(), vec![1, 10, 100]);
        assert_eq!(parse_counts("0,5", true).unwrap(), vec![0, 5]);
        assert_eq!(parse_counts("1,x", false).unwrap_err().column, 3);
        assert_eq!(parse_window("0,1e6").unwrap(), Window::new(0, 1_000_000).unwrap());
    }

    #[test]
    fn folner_families() {
        assert_eq!(parse_folner("dyadic").unwrap(), FolnerFamily::DyadicEven);
        assert_eq!(
            parse_folner("shifted base=-5 step=10 scale=3").unwrap(),
            FolnerFamily::Shifted { base: -5, step: 10, scale: 3 }
        );
        assert!(matches!(parse_folner("list [0,4)[0,16)").unwrap(), FolnerFamily::Explicit(v) if v.len() == 2));
    }
}
