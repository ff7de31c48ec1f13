//! Scenario files: sectioned `key = value` text with typed literals.
//!
//! ```text
//! [scenario]
//! id = weyl-demo
//! kind = weyl
//! seed = 7
//!
//! [functionals]
//! f = bump(center=0.5, halfwidth=0.3, amplitude=1.0)
//! F = gaussian(v=0.2, c=0.0, w=1.0) * bump(center=0, halfwidth=0.5) + const(h=0.1)
//! ```

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::embedding::CutoffChain;
use crate::error::{Error, Result};
use crate::functionals::{Functional, Lagrangean, Potential, PotentialTerm};
use crate::schrep::RepConfig;
use crate::timeaxis::{make_bump_component, SmoothFunction, TimeGrid};

use super::Suite;

/// A value together with where it was written.
#[derive(Clone, Debug, PartialEq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
    /// 1-based column of the first value character.
    pub column: usize,
}

impl Entry {
    fn error(&self, offset: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            line: self.line,
            column: self.column + offset,
            message: format!("key `{}`: {}", self.key, message.into()),
        }
    }

    fn parse<T: FromStr>(&self, what: &str) -> Result<T> {
        self.value
            .parse()
            .map_err(|_| self.error(0, format!("expected {what}, found `{}`", self.value)))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Section {
    pub name: String,
    pub line: usize,
    pub entries: Vec<Entry>,
}

impl Section {
    pub fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.key == key)
    }

    fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        for e in &self.entries {
            let known = allowed.contains(&e.key.as_str())
                || (allowed.contains(&"level*") && e.key.starts_with("level"));
            if !known {
                return Err(Error::Parse {
                    line: e.line,
                    column: 1,
                    message: format!("unknown key `{}` in section [{}]", e.key, self.name),
                });
            }
        }
        Ok(())
    }
}

/// Reads the sectioned text. Comments start with `#` or `;`.
pub fn parse_sections(text: &str) -> Result<Vec<Section>> {
    let mut sections: Vec<Section> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let indent = raw.len() - raw.trim_start().len();
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with(';') {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| Error::Parse {
                line,
                column: indent + trimmed.len(),
                message: "section header must end with `]`".into(),
            })?;
            let name = name.trim();
            if name.is_empty() || sections.iter().any(|s| s.name == name) {
                return Err(Error::Parse {
                    line,
                    column: indent + 1,
                    message: format!("empty or repeated section `[{name}]`"),
                });
            }
            sections.push(Section {
                name: name.to_string(),
                line,
                entries: Vec::new(),
            });
            continue;
        }
        let eq = raw.find('=').ok_or_else(|| Error::Parse {
            line,
            column: indent + 1,
            message: format!("expected `key = value`, found `{trimmed}`"),
        })?;
        let key = raw[..eq].trim();
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
            return Err(Error::Parse {
                line,
                column: indent + 1,
                message: format!("invalid key `{key}`"),
            });
        }
        let after = &raw[eq + 1..];
        let value = after.trim();
        let column = eq + 2 + (after.len() - after.trim_start().len());
        let section = sections.last_mut().ok_or_else(|| Error::Parse {
            line,
            column: indent + 1,
            message: format!("key `{key}` appears before any section"),
        })?;
        if section.get(key).is_some() {
            return Err(Error::Parse {
                line,
                column: indent + 1,
                message: format!("key `{key}` repeated in section [{}]", section.name),
            });
        }
        section.entries.push(Entry {
            key: key.to_string(),
            value: value.to_string(),
            line,
            column,
        });
    }
    Ok(sections)
}

// ---------------------------------------------------------------------------
// Literal grammar:
//   expr  := term ('+' term)*
//   term  := call ('*' call)?
//   call  := name '(' [arg (',' arg)*] ')'  |  name
//   arg   := name '=' (number | '[' number (',' number)* ']')

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64),
    Sym(char),
}

fn tokenize(entry: &Entry) -> Result<Vec<(Tok, usize)>> {
    let src = entry.value.as_str();
    let mut out = Vec::new();
    let chars: Vec<(usize, char)> = src.char_indices().collect();
    let mut k = 0;
    while k < chars.len() {
        let (pos, c) = chars[k];
        if c.is_whitespace() {
            k += 1;
        } else if "()[],=*+".contains(c) {
            out.push((Tok::Sym(c), pos));
            k += 1;
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = k;
            while k < chars.len() && (chars[k].1.is_ascii_alphanumeric() || chars[k].1 == '_') {
                k += 1;
            }
            let word: String = chars[start..k].iter().map(|x| x.1).collect();
            out.push((Tok::Ident(word), pos));
        } else if c.is_ascii_digit() || c == '-' || c == '.' {
            let start = k;
            k += 1;
            while k < chars.len() {
                let d = chars[k].1;
                let exp_sign = (d == '-' || d == '+') && matches!(chars[k - 1].1, 'e' | 'E');
                if d.is_ascii_digit() || d == '.' || d == 'e' || d == 'E' || exp_sign {
                    k += 1;
                } else {
                    break;
                }
            }
            let text: String = chars[start..k].iter().map(|x| x.1).collect();
            let v: f64 = text
                .parse()
                .map_err(|_| entry.error(pos, format!("bad number `{text}`")))?;
            out.push((Tok::Num(v), pos));
        } else {
            return Err(entry.error(pos, format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

/// A parsed call `name(key=value, …)`.
#[derive(Clone, Debug, PartialEq)]
struct Call {
    name: String,
    args: BTreeMap<String, (Vec<f64>, usize)>,
    pos: usize,
}

struct Parser<'a> {
    entry: &'a Entry,
    toks: Vec<(Tok, usize)>,
    k: usize,
}

impl<'a> Parser<'a> {
    fn new(entry: &'a Entry) -> Result<Self> {
        Ok(Parser {
            entry,
            toks: tokenize(entry)?,
            k: 0,
        })
    }

    fn pos(&self) -> usize {
        self.toks
            .get(self.k)
            .map_or(self.entry.value.len(), |t| t.1)
    }

    fn err(&self, message: impl Into<String>) -> Error {
        self.entry.error(self.pos(), message)
    }

    fn peek_sym(&self, c: char) -> bool {
        matches!(self.toks.get(self.k), Some((Tok::Sym(s), _)) if *s == c)
    }

    fn expect_sym(&mut self, c: char) -> Result<()> {
        if self.peek_sym(c) {
            self.k += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected `{c}`")))
        }
    }

    fn done(&self) -> bool {
        self.k >= self.toks.len()
    }

    fn number(&mut self) -> Result<f64> {
        match self.toks.get(self.k) {
            Some((Tok::Num(v), _)) => {
                self.k += 1;
                Ok(*v)
            }
            _ => Err(self.err("expected a number")),
        }
    }

    fn call(&mut self) -> Result<Call> {
        let pos = self.pos();
        let name = match self.toks.get(self.k) {
            Some((Tok::Ident(n), _)) => n.clone(),
            _ => return Err(self.err("expected a name")),
        };
        self.k += 1;
        let mut args = BTreeMap::new();
        if !self.peek_sym('(') {
            return Ok(Call { name, args, pos });
        }
        self.k += 1;
        while !self.peek_sym(')') {
            let apos = self.pos();
            let key = match self.toks.get(self.k) {
                Some((Tok::Ident(n), _)) => n.clone(),
                _ => return Err(self.err("expected an argument name")),
            };
            self.k += 1;
            self.expect_sym('=')?;
            let value = if self.peek_sym('[') {
                self.k += 1;
                let mut v = vec![self.number()?];
                while self.peek_sym(',') {
                    self.k += 1;
                    v.push(self.number()?);
                }
                self.expect_sym(']')?;
                v
            } else {
                vec![self.number()?]
            };
            if args.insert(key.clone(), (value, apos)).is_some() {
                return Err(self.entry.error(apos, format!("argument `{key}` repeated")));
            }
            if self.peek_sym(',') {
                self.k += 1;
            } else if !self.peek_sym(')') {
                return Err(self.err("expected `,` or `)`"));
            }
        }
        self.k += 1;
        Ok(Call { name, args, pos })
    }
}

impl Call {
    fn check_args(&self, entry: &Entry, allowed: &[&str]) -> Result<()> {
        for (key, (_, pos)) in &self.args {
            if !allowed.contains(&key.as_str()) {
                return Err(entry.error(*pos, format!("`{}` takes no argument `{key}`", self.name)));
            }
        }
        Ok(())
    }

    fn scalar(&self, entry: &Entry, key: &str, default: Option<f64>) -> Result<f64> {
        match (self.args.get(key), default) {
            (Some((v, pos)), _) => {
                if v.len() != 1 {
                    return Err(entry.error(*pos, format!("`{key}` must be a single number")));
                }
                Ok(v[0])
            }
            (None, Some(d)) => Ok(d),
            (None, None) => Err(entry.error(self.pos, format!("`{}` needs `{key}`", self.name))),
        }
    }

    fn vector(&self, entry: &Entry, key: &str, dim: usize, default: Option<f64>) -> Result<Vec<f64>> {
        match (self.args.get(key), default) {
            (Some((v, _)), _) if v.len() == dim => Ok(v.clone()),
            (Some((v, _)), _) if v.len() == 1 => Ok(vec![v[0]; dim]),
            (Some((_, pos)), _) => Err(entry.error(*pos, format!("`{key}` needs {dim} components"))),
            (None, Some(d)) => Ok(vec![d; dim]),
            (None, None) => Err(entry.error(self.pos, format!("`{}` needs `{key}`", self.name))),
        }
    }

    fn index(&self, entry: &Entry, key: &str) -> Result<usize> {
        let v = self.scalar(entry, key, Some(0.0))?;
        if v < 0.0 || v.fract() != 0.0 {
            return Err(entry.error(self.pos, format!("`{key}` must be a non-negative integer")));
        }
        Ok(v as usize)
    }
}

fn unknown(kind: &str, name: &str) -> Error {
    Error::Unknown {
        kind: kind.into(),
        name: name.into(),
    }
}

fn bump_from(call: &Call, entry: &Entry, grid: &TimeGrid, dim: usize) -> Result<SmoothFunction> {
    call.check_args(entry, &["center", "halfwidth", "amplitude", "component"])?;
    let component = call.index(entry, "component")?;
    if component >= dim {
        return Err(entry.error(call.pos, format!("component {component} out of range for d = {dim}")));
    }
    make_bump_component(
        grid,
        call.scalar(entry, "center", None)?,
        call.scalar(entry, "halfwidth", None)?,
        call.scalar(entry, "amplitude", Some(1.0))?,
        component,
        dim,
    )
    .map_err(|e| entry.error(call.pos, e.to_string()))
}

fn potential_from(call: &Call, entry: &Entry, dim: usize) -> Result<Potential> {
    let built = match call.name.as_str() {
        "gaussian" | "sech2" => {
            call.check_args(entry, &["v", "c", "w"])?;
            let v = call.scalar(entry, "v", None)?;
            let c = call.vector(entry, "c", dim, Some(0.0))?;
            let w = call.scalar(entry, "w", Some(1.0))?;
            if call.name == "gaussian" {
                Potential::gaussian(v, c, w)
            } else {
                Potential::sech_squared(v, c, w)
            }
        }
        "cosine" => {
            call.check_args(entry, &["v", "k", "phase"])?;
            Potential::cosine(
                call.scalar(entry, "v", None)?,
                call.vector(entry, "k", dim, None)?,
                call.scalar(entry, "phase", Some(0.0))?,
            )
        }
        other => return Err(unknown("potential", other)),
    };
    built.map_err(|e| entry.error(call.pos, e.to_string()))
}

/// A functional literal: sums of `bump(…)`, `potential(…) * bump(…)` and
/// `const(h=…)`.
pub fn parse_functional(entry: &Entry, grid: &TimeGrid, dim: usize) -> Result<Functional> {
    let mut p = Parser::new(entry)?;
    if p.done() {
        return Err(entry.error(0, "empty functional"));
    }
    let mut f = Functional::zero(*grid, dim);
    loop {
        let head = p.call()?;
        let piece = match head.name.as_str() {
            "bump" => Functional::linear(bump_from(&head, entry, grid, dim)?),
            "const" => {
                head.check_args(entry, &["h"])?;
                Functional::constant(*grid, dim, head.scalar(entry, "h", None)?)
            }
            "zero" => Functional::zero(*grid, dim),
            _ => {
                let v = potential_from(&head, entry, dim)?;
                p.expect_sym('*')?;
                let w = p.call()?;
                if w.name != "bump" {
                    return Err(entry.error(w.pos, "a potential must be weighted by `bump(…)`"));
                }
                let weight = bump_from(&w, entry, grid, 1)?;
                Functional::zero(*grid, dim).with_potential(PotentialTerm::new(weight, v)?)?
            }
        };
        f = f.try_add(&piece)?;
        if p.done() {
            return Ok(f);
        }
        p.expect_sym('+')?;
    }
}

/// A loop literal: a functional made of bumps only.
pub fn parse_loop(entry: &Entry, grid: &TimeGrid, dim: usize) -> Result<SmoothFunction> {
    let f = parse_functional(entry, grid, dim)?;
    if !f.is_linear() || f.constant_part() != 0.0 {
        return Err(entry.error(0, "expected a loop (a sum of `bump(…)` terms)"));
    }
    Ok(f.linear_part().clone())
}

/// Catalog states.
#[derive(Clone, Debug, PartialEq)]
pub enum StateSpec {
    Ground,
    Hermite(usize),
    Coherent { x: Vec<f64>, p: Vec<f64> },
}

pub fn parse_state(entry: &Entry, dim: usize) -> Result<StateSpec> {
    let mut p = Parser::new(entry)?;
    let call = p.call()?;
    if !p.done() {
        return Err(p.err("unexpected text after the state"));
    }
    match call.name.as_str() {
        "ground" => {
            call.check_args(entry, &[])?;
            Ok(StateSpec::Ground)
        }
        "hermite" => {
            call.check_args(entry, &["n"])?;
            Ok(StateSpec::Hermite(call.index(entry, "n")?))
        }
        "coherent" => {
            call.check_args(entry, &["x", "p"])?;
            Ok(StateSpec::Coherent {
                x: call.vector(entry, "x", dim, Some(0.0))?,
                p: call.vector(entry, "p", dim, Some(0.0))?,
            })
        }
        other => Err(unknown("state", other)),
    }
}

fn parse_level(entry: &Entry) -> Result<((f64, f64), (f64, f64))> {
    let mut p = Parser::new(entry)?;
    let call = p.call()?;
    if call.name != "window" || !p.done() {
        return Err(entry.error(call.pos, "expected `window(inner_lo=…, inner_hi=…, outer_lo=…, outer_hi=…)`"));
    }
    call.check_args(entry, &["inner_lo", "inner_hi", "outer_lo", "outer_hi"])?;
    Ok((
        (call.scalar(entry, "inner_lo", None)?, call.scalar(entry, "inner_hi", None)?),
        (call.scalar(entry, "outer_lo", None)?, call.scalar(entry, "outer_hi", None)?),
    ))
}

/// Everything a scenario file can set.
#[derive(Clone, Debug)]
pub struct ScenarioConfig {
    pub id: String,
    pub kind: Suite,
    pub seed: Option<u64>,
    pub tolerance_scale: Option<f64>,
    /// Run the seeded battery in addition to the literal checks.
    pub battery: bool,
    pub grid: TimeGrid,
    pub rep: RepConfig,
    pub functionals: BTreeMap<String, Entry>,
    pub state: Option<StateSpec>,
    pub chain: Option<CutoffChain>,
}

impl ScenarioConfig {
    pub fn functional(&self, name: &str) -> Result<Option<Functional>> {
        self.functionals
            .get(name)
            .map(|e| parse_functional(e, &self.grid, self.rep.dim))
            .transpose()
    }

    pub fn loop_named(&self, name: &str) -> Result<Option<SmoothFunction>> {
        self.functionals
            .get(name)
            .map(|e| parse_loop(e, &self.grid, self.rep.dim))
            .transpose()
    }

    pub fn has_literals(&self) -> bool {
        !self.functionals.is_empty() || self.state.is_some()
    }
}

fn section<'a>(sections: &'a [Section], name: &str) -> Option<&'a Section> {
    sections.iter().find(|s| s.name == name)
}

pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let sections = parse_sections(text)?;
    for s in &sections {
        if !["scenario", "grid", "rep", "functionals", "state", "chain"].contains(&s.name.as_str()) {
            return Err(Error::Parse {
                line: s.line,
                column: 1,
                message: format!("unknown section [{}]", s.name),
            });
        }
    }
    let scenario = section(&sections, "scenario").ok_or_else(|| Error::Parse {
        line: 1,
        column: 1,
        message: "missing [scenario] section".into(),
    })?;
    scenario.check_keys(&["id", "kind", "seed", "tolerance_scale", "battery"])?;
    let kind_entry = scenario.get("kind").ok_or_else(|| Error::Parse {
        line: scenario.line,
        column: 1,
        message: "[scenario] needs `kind`".into(),
    })?;
    let kind: Suite = kind_entry
        .value
        .parse()
        .map_err(|_| unknown("scenario kind", &kind_entry.value))?;
    let id = scenario
        .get("id")
        .map_or_else(|| kind.name().to_string(), |e| e.value.clone());
    if id.is_empty() || id.contains(char::is_whitespace) {
        return Err(scenario.get("id").expect("non-empty default").error(0, "id must be a single word"));
    }
    let seed = scenario.get("seed").map(|e| e.parse("an unsigned integer")).transpose()?;
    let tolerance_scale = scenario
        .get("tolerance_scale")
        .map(|e| e.parse::<f64>("a number"))
        .transpose()?;
    if let Some(s) = tolerance_scale {
        if !(s > 0.0 && s.is_finite()) {
            let e = scenario.get("tolerance_scale").expect("present");
            return Err(e.error(0, "must be positive"));
        }
    }

    let mut grid = TimeGrid::default();
    if let Some(g) = section(&sections, "grid") {
        g.check_keys(&["t_min", "t_max", "points"])?;
        let t_min = g.get("t_min").map_or(Ok(grid.t_min()), |e| e.parse("a number"))?;
        let t_max = g.get("t_max").map_or(Ok(grid.t_max()), |e| e.parse("a number"))?;
        let points = g.get("points").map_or(Ok(grid.len()), |e| e.parse("an integer"))?;
        grid = TimeGrid::new(t_min, t_max, points).map_err(|err| Error::Parse {
            line: g.line,
            column: 1,
            message: format!("[grid]: {err}"),
        })?;
    }

    let mut rep = RepConfig::default();
    if let Some(r) = section(&sections, "rep") {
        r.check_keys(&["box", "x_min", "x_max", "n_x", "k_track", "dim"])?;
        if let Some(e) = r.get("box") {
            let half: f64 = e.parse("a number")?;
            if !(half > 0.0) {
                return Err(e.error(0, "box must be positive"));
            }
            rep.x_min = -half;
            rep.x_max = half;
        }
        if let Some(e) = r.get("x_min") {
            rep.x_min = e.parse("a number")?;
        }
        if let Some(e) = r.get("x_max") {
            rep.x_max = e.parse("a number")?;
        }
        if let Some(e) = r.get("n_x") {
            rep.n_x = e.parse("an integer")?;
        }
        if let Some(e) = r.get("k_track") {
            rep.k_track = e.parse("an integer")?;
        }
        if let Some(e) = r.get("dim") {
            rep.dim = e.parse("an integer")?;
            if !(1..=2).contains(&rep.dim) {
                return Err(e.error(0, "dim must be 1 or 2"));
            }
        }
    }

    let mut functionals = BTreeMap::new();
    if let Some(f) = section(&sections, "functionals") {
        for e in &f.entries {
            // Parse now so errors surface before any computation.
            parse_functional(e, &grid, rep.dim)?;
            functionals.insert(e.key.clone(), e.clone());
        }
    }

    let state = match section(&sections, "state") {
        Some(s) => {
            s.check_keys(&["state"])?;
            s.get("state").map(|e| parse_state(e, rep.dim)).transpose()?
        }
        None => None,
    };

    let chain = match section(&sections, "chain") {
        Some(c) => {
            c.check_keys(&["interaction", "level*"])?;
            let lagrangean = match c.get("interaction") {
                Some(e) => {
                    let mut p = Parser::new(e)?;
                    let call = p.call()?;
                    if !p.done() {
                        return Err(p.err("unexpected text after the potential"));
                    }
                    Lagrangean::interacting(potential_from(&call, e, rep.dim)?)
                }
                None => Lagrangean::free(),
            };
            let mut levels: Vec<(usize, &Entry)> = Vec::new();
            for e in c.entries.iter().filter(|e| e.key.starts_with("level")) {
                let n: usize = e.key["level".len()..].parse().map_err(|_| Error::Parse {
                    line: e.line,
                    column: 1,
                    message: format!("chain levels are named level1, level2, …; found `{}`", e.key),
                })?;
                levels.push((n, e));
            }
            levels.sort_by_key(|l| l.0);
            let built = if levels.is_empty() {
                CutoffChain::standard(grid, rep.dim, lagrangean)
            } else {
                let intervals = levels
                    .iter()
                    .map(|(_, e)| parse_level(e))
                    .collect::<Result<Vec<_>>>()?;
                CutoffChain::new(grid, rep.dim, lagrangean, &intervals)
            };
            Some(built.map_err(|err| Error::Parse {
                line: c.line,
                column: 1,
                message: format!("[chain]: {err}"),
            })?)
        }
        None => None,
    };

    let battery = match scenario.get("battery") {
        Some(e) => e.parse("`true` or `false`")?,
        None => functionals.is_empty() && state.is_none(),
    };

    Ok(ScenarioConfig {
        id,
        kind,
        seed,
        tolerance_scale,
        battery,
        grid,
        rep,
        functionals,
        state,
        chain,
    })
}
