//! The line-oriented problem file format.
//!
//! ```text
//! # pre-cosymplectic Darboux model
//! chart (t, q, p, z1, z2)
//! kind = precosymplectic
//! eta = dt
//! omega = dq^dp
//! P = { z1: 0, z2: 0 }
//! reeb = dt + 3*dz1
//! grid = lattice(-1..1 : 3)
//! ```
//!
//! A statement may continue over several lines while a bracket is open.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use coiso::aps::ProjectorField;
use coiso::expr::{parse_rational, Chart, Rational};
use coiso::exterior::{parse_form, parse_vector_field, Form, VectorField};
use coiso::structures::{GeometrySpec, Kind, SampleGrid, Structure};

/// A diagnostic for malformed or inconsistent input; always exit code 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputError {
    pub line: Option<usize>,
    pub message: String,
}

impl InputError {
    pub fn at(line: usize, message: impl Into<String>) -> InputError {
        InputError { line: Some(line), message: message.into() }
    }

    pub fn general(message: impl Into<String>) -> InputError {
        InputError { line: None, message: message.into() }
    }
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for InputError {}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Statement {
    line: usize,
    key: String,
    value: String,
}

fn bracket_depth(s: &str) -> i64 {
    s.chars()
        .map(|c| match c {
            '(' | '{' => 1,
            ')' | '}' => -1,
            _ => 0,
        })
        .sum()
}

fn statements(text: &str) -> Result<Vec<Statement>, InputError> {
    let mut out: Vec<Statement> = Vec::new();
    let mut open: Option<(Statement, i64)> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if let Some((mut st, depth)) = open.take() {
            st.value.push(' ');
            st.value.push_str(body);
            let depth = depth + bracket_depth(body);
            if depth < 0 {
                return Err(InputError::at(line, "unbalanced closing bracket"));
            }
            if depth == 0 {
                out.push(st);
            } else {
                open = Some((st, depth));
            }
            continue;
        }
        let (key, value) = if let Some(rest) = body.strip_prefix("chart").filter(|r| r.starts_with([' ', '\t', '('])) {
            ("chart".to_string(), rest.trim().to_string())
        } else if let Some((k, v)) = body.split_once('=') {
            (k.trim().to_string(), v.trim().to_string())
        } else {
            return Err(InputError::at(line, format!("expected `name = value` or `chart (...)`, found `{body}`")));
        };
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(InputError::at(line, format!("`{key}` is not a valid name")));
        }
        let depth = bracket_depth(&value);
        let st = Statement { line, key, value };
        match depth {
            d if d < 0 => return Err(InputError::at(line, "unbalanced closing bracket")),
            0 => out.push(st),
            d => open = Some((st, d)),
        }
    }
    if let Some((st, _)) = open {
        return Err(InputError::at(st.line, format!("`{}` has an unclosed bracket", st.key)));
    }
    Ok(out)
}

/// Splits at commas outside brackets.
fn split_top(s: &str) -> Vec<String> {
    let mut parts = Vec::new();
    let mut depth = 0i64;
    let mut cur = String::new();
    for c in s.chars() {
        match c {
            '(' | '{' => depth += 1,
            ')' | '}' => depth -= 1,
            _ => {}
        }
        if c == ',' && depth == 0 {
            parts.push(cur.trim().to_string());
            cur.clear();
        } else {
            cur.push(c);
        }
    }
    if !cur.trim().is_empty() || !parts.is_empty() {
        parts.push(cur.trim().to_string());
    }
    parts
}

/// The contents of `open ... close`, which must enclose the whole string.
fn enclosed(s: &str, open: char, close: char) -> Option<&str> {
    let inner = s.trim().strip_prefix(open)?.strip_suffix(close)?;
    // reject `(a)(b)`
    let mut depth = 0i64;
    for c in inner.chars() {
        match c {
            '(' | '{' => depth += 1,
            ')' | '}' => depth -= 1,
            _ => {}
        }
        if depth < 0 {
            return None;
        }
    }
    Some(inner)
}

fn call<'a>(s: &'a str, name: &str) -> Option<&'a str> {
    enclosed(s.trim().strip_prefix(name)?.trim_start(), '(', ')')
}

/// Declared kind, remembering whether the nondegenerate name was used.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum KindTag {
    Symplectic,
    Cosymplectic,
    Contact,
    Cocontact,
    KSymplectic(usize),
    KCosymplectic(usize),
    KContact(usize),
    Multisymplectic,
}

fn parse_kind(value: &str, line: usize) -> Result<(KindTag, bool), InputError> {
    let v: String = value.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_ascii_lowercase();
    let (head, arg) = match v.split_once('(') {
        Some((h, rest)) => {
            let n = rest
                .strip_suffix(')')
                .and_then(|a| a.parse::<usize>().ok())
                .filter(|&n| n >= 1)
                .ok_or_else(|| InputError::at(line, format!("bad kind parameter in `{value}`")))?;
            (h.to_string(), Some(n))
        }
        None => (v.clone(), None),
    };
    let (pre, base) = match head.strip_prefix('k') {
        Some(rest) if !rest.is_empty() => (rest, true),
        _ => (head.as_str(), false),
    };
    let (stem, degenerate) = match pre.strip_prefix("pre") {
        Some(s) => (s, true),
        None => (pre, false),
    };
    let need_k = |tag: fn(usize) -> KindTag| match arg {
        Some(k) => Ok(tag(k)),
        None => Err(InputError::at(line, format!("`{value}` needs a parameter, e.g. `{head}(2)`"))),
    };
    let no_k = |tag: KindTag| match arg {
        None => Ok(tag),
        Some(_) if tag == KindTag::Multisymplectic => Ok(tag),
        Some(_) => Err(InputError::at(line, format!("`{head}` takes no parameter"))),
    };
    let tag = match (base, stem) {
        (false, "symplectic") => no_k(KindTag::Symplectic)?,
        (false, "cosymplectic") => no_k(KindTag::Cosymplectic)?,
        (false, "contact") => no_k(KindTag::Contact)?,
        (false, "cocontact") => no_k(KindTag::Cocontact)?,
        (false, "multisymplectic") => no_k(KindTag::Multisymplectic)?,
        (true, "symplectic") => need_k(KindTag::KSymplectic)?,
        (true, "cosymplectic") => need_k(KindTag::KCosymplectic)?,
        (true, "contact") => need_k(KindTag::KContact)?,
        _ => return Err(InputError::at(line, format!("unknown kind `{value}`"))),
    };
    Ok((tag, !degenerate))
}

fn reeb_labels(kind: &Kind) -> Vec<(String, String)> {
    let pair = |key: &str, label: &str| (key.to_string(), label.to_string());
    match kind {
        Kind::PreCosymplectic | Kind::PreContact => vec![pair("reeb", "R")],
        Kind::PreCocontact => vec![pair("reeb_xi", "R_xi"), pair("reeb_eta", "R_eta")],
        Kind::KPreCosymplectic(k) | Kind::KPreContact(k) => {
            (1..=*k).map(|i| (format!("reeb{i}"), format!("R{i}"))).collect()
        }
        _ => vec![],
    }
}

/// A parsed problem file.
#[derive(Debug, Clone)]
pub struct ProblemFile {
    pub spec: GeometrySpec,
    /// True when the kind was written with its nondegenerate name.
    pub nondegenerate: bool,
    pub projector: Option<ProjectorField>,
    /// User Reeb fields as `(label, field)` in the order of the kind's labels.
    pub reeb: Vec<(String, VectorField)>,
    pub frame: Option<Vec<VectorField>>,
    pub grid: SampleGrid,
    pub ell: Option<usize>,
    /// Half-width of the off-section `μ` lattice.
    pub offbox: Rational,
    /// Fiber coordinates, explicit or every coordinate named `mu...`.
    pub fiber: Vec<usize>,
}

impl ProblemFile {
    pub fn chart(&self) -> &Arc<Chart> {
        self.spec.chart()
    }
}

const DEFAULT_GRID: &str = "lattice(-1..1 : 3)";

fn range(s: &str, line: usize) -> Result<(Rational, Rational, usize), InputError> {
    let bad = || InputError::at(line, format!("expected `lo..hi : steps`, found `{}`", s.trim()));
    let (r, steps) = s.rsplit_once(':').ok_or_else(bad)?;
    let (lo, hi) = r.split_once("..").ok_or_else(bad)?;
    let lo = parse_rational(lo).ok_or_else(bad)?;
    let hi = parse_rational(hi).ok_or_else(bad)?;
    let steps: usize = steps.trim().parse().map_err(|_| bad())?;
    if steps == 0 {
        return Err(InputError::at(line, "a lattice axis needs at least one step"));
    }
    if steps > 1 && lo > hi {
        return Err(InputError::at(line, "lattice range has lo > hi"));
    }
    Ok((lo, hi, steps))
}

fn parse_grid(value: &str, chart: &Arc<Chart>, line: usize) -> Result<SampleGrid, InputError> {
    let n = chart.dim();
    let grid_err = |e: coiso::structures::StructureError| InputError::at(line, e.to_string());
    if let Some(inner) = call(value, "lattice") {
        let items = split_top(inner);
        let named = items.iter().any(|it| {
            it.split_once(':')
                .is_some_and(|(h, _)| !h.contains("..") && chart.index_of(h.trim()).is_some())
        });
        let axes = if named {
            let mut axes: Vec<Option<(Rational, Rational, usize)>> = vec![None; n];
            for it in &items {
                let (name, rest) = it
                    .split_once(':')
                    .ok_or_else(|| InputError::at(line, format!("expected `name: lo..hi : steps`, found `{it}`")))?;
                let i = chart
                    .index_of(name.trim())
                    .ok_or_else(|| InputError::at(line, format!("unknown coordinate `{}` in grid", name.trim())))?;
                if axes[i].is_some() {
                    return Err(InputError::at(line, format!("axis `{}` given twice", name.trim())));
                }
                axes[i] = Some(range(rest, line)?);
            }
            let zero = Rational::from_integer(0.into());
            axes.into_iter().map(|a| a.unwrap_or((zero.clone(), zero.clone(), 1))).collect()
        } else {
            if items.len() != 1 {
                return Err(InputError::at(line, "an unnamed lattice takes a single `lo..hi : steps` for every axis"));
            }
            vec![range(&items[0], line)?; n]
        };
        return SampleGrid::lattice(chart, axes).map_err(grid_err);
    }
    if let Some(inner) = call(value, "random") {
        let mut seed = None;
        let mut count = None;
        let mut bound = Rational::from_integer(1.into());
        for it in split_top(inner) {
            let (k, v) = it
                .split_once('=')
                .ok_or_else(|| InputError::at(line, format!("expected `key=value` in random grid, found `{it}`")))?;
            let v = v.trim();
            match k.trim() {
                "seed" => seed = Some(v.parse::<u64>().map_err(|_| InputError::at(line, format!("bad seed `{v}`")))?),
                "count" => count = Some(v.parse::<usize>().map_err(|_| InputError::at(line, format!("bad count `{v}`")))?),
                "box" => bound = parse_rational(v).ok_or_else(|| InputError::at(line, format!("bad box `{v}`")))?,
                other => return Err(InputError::at(line, format!("unknown random-grid key `{other}`"))),
            }
        }
        let seed = seed.ok_or_else(|| InputError::at(line, "random grid needs `seed=`"))?;
        let count = count.ok_or_else(|| InputError::at(line, "random grid needs `count=`"))?;
        return SampleGrid::random(chart, seed, count, bound).map_err(grid_err);
    }
    if let Some(inner) = call(value, "points") {
        let mut pts = Vec::new();
        for it in split_top(inner) {
            let tuple = enclosed(&it, '(', ')')
                .ok_or_else(|| InputError::at(line, format!("expected a point `(..)`, found `{it}`")))?;
            let coords = split_top(tuple)
                .iter()
                .map(|c| parse_rational(c).ok_or_else(|| InputError::at(line, format!("bad coordinate `{c}`"))))
                .collect::<Result<Vec<_>, _>>()?;
            if coords.len() != n {
                return Err(InputError::at(line, format!("point `{it}` has {} coordinates, chart has {n}", coords.len())));
            }
            pts.push(coords);
        }
        return SampleGrid::explicit(chart, pts).map_err(grid_err);
    }
    Err(InputError::at(line, format!("unknown grid `{value}`; use lattice(..), random(..) or points(..)")))
}

fn parse_form_at(text: &str, chart: &Arc<Chart>, line: usize) -> Result<Form, InputError> {
    parse_form(text, chart).map_err(|e| InputError::at(line, format!("in `{text}`: {e}")))
}

fn parse_field_at(text: &str, chart: &Arc<Chart>, line: usize) -> Result<VectorField, InputError> {
    parse_vector_field(text, chart).map_err(|e| InputError::at(line, format!("in `{text}`: {e}")))
}

fn parse_projector(value: &str, chart: &Arc<Chart>, line: usize) -> Result<ProjectorField, InputError> {
    let inner = enclosed(value, '{', '}').ok_or_else(|| InputError::at(line, "P must be `{ z: correction, ... }`"))?;
    let mut corrections = Vec::new();
    for it in split_top(inner) {
        let (name, expr) = it
            .split_once(':')
            .ok_or_else(|| InputError::at(line, format!("expected `coordinate: correction`, found `{it}`")))?;
        let a = chart
            .index_of(name.trim())
            .ok_or_else(|| InputError::at(line, format!("unknown coordinate `{}` in P", name.trim())))?;
        let mut c = parse_form_at(expr.trim(), chart, line)?;
        if c.degree() == 0 {
            if !c.is_zero() {
                return Err(InputError::at(line, format!("correction for `{}` must be a 1-form", name.trim())));
            }
            c = Form::zero(chart, 1);
        }
        corrections.push((a, c));
    }
    if corrections.is_empty() {
        return Err(InputError::at(line, "P lists no vertical directions"));
    }
    ProjectorField::from_corrections(chart, &corrections).map_err(|e| InputError::at(line, e.to_string()))
}

fn parse_coordinate_list(value: &str, chart: &Arc<Chart>, line: usize) -> Result<Vec<usize>, InputError> {
    let inner = enclosed(value, '(', ')').ok_or_else(|| InputError::at(line, "expected `(name, ...)`"))?;
    split_top(inner)
        .iter()
        .map(|s| chart.index_of(s).ok_or_else(|| InputError::at(line, format!("unknown coordinate `{s}`"))))
        .collect()
}

/// Parses a problem file.
pub fn parse_problem(text: &str) -> Result<ProblemFile, InputError> {
    let stmts = statements(text)?;
    let mut chart_stmt: Option<&Statement> = None;
    let mut by_key: BTreeMap<&str, &Statement> = BTreeMap::new();
    for st in &stmts {
        if st.key == "chart" {
            if chart_stmt.is_some() {
                return Err(InputError::at(
                    st.line,
                    "only one chart per file; multi-chart atlases are not supported",
                ));
            }
            chart_stmt = Some(st);
        } else if by_key.insert(&st.key, st).is_some() {
            return Err(InputError::at(st.line, format!("`{}` is given twice", st.key)));
        }
    }
    let chart_stmt = chart_stmt.ok_or_else(|| InputError::general("missing `chart (...)` declaration"))?;
    let names = enclosed(&chart_stmt.value, '(', ')')
        .ok_or_else(|| InputError::at(chart_stmt.line, "chart must be `chart (x1, x2, ...)`"))?;
    let names = split_top(names);
    let chart = Chart::new(&names).map_err(|e| InputError::at(chart_stmt.line, e.to_string()))?;

    let kind_stmt = by_key.remove("kind").ok_or_else(|| InputError::general("missing `kind = ...`"))?;
    let (tag, nondegenerate) = parse_kind(&kind_stmt.value, kind_stmt.line)?;

    let mut take_form = |name: &str| -> Result<Form, InputError> {
        let st = by_key
            .remove(name)
            .ok_or_else(|| InputError::at(kind_stmt.line, format!("kind `{}` needs a form `{name}`", kind_stmt.value)))?;
        parse_form_at(&st.value, &chart, st.line)
    };
    let indexed = |take: &mut dyn FnMut(&str) -> Result<Form, InputError>, stem: &str, k: usize| {
        (1..=k).map(|i| take(&format!("{stem}{i}"))).collect::<Result<Vec<_>, _>>()
    };
    let structure = match tag {
        KindTag::Symplectic => Structure::PreSymplectic { omega: take_form("omega")? },
        KindTag::Cosymplectic => Structure::PreCosymplectic {
            eta: take_form("eta")?,
            omega: take_form("omega")?,
        },
        KindTag::Contact => Structure::PreContact { eta: take_form("eta")? },
        KindTag::Cocontact => Structure::PreCocontact {
            xi: take_form("xi")?,
            eta: take_form("eta")?,
        },
        KindTag::KSymplectic(k) => Structure::KPreSymplectic { omegas: indexed(&mut take_form, "omega", k)? },
        KindTag::KCosymplectic(k) => Structure::KPreCosymplectic {
            etas: indexed(&mut take_form, "eta", k)?,
            omegas: indexed(&mut take_form, "omega", k)?,
        },
        KindTag::KContact(k) => Structure::KPreContact { etas: indexed(&mut take_form, "eta", k)? },
        KindTag::Multisymplectic => Structure::PreMultisymplectic { omega: take_form("omega")? },
    };
    let spec = GeometrySpec::new(&chart, structure).map_err(|e| InputError::at(kind_stmt.line, e.to_string()))?;

    let projector = match by_key.remove("P") {
        Some(st) => Some(parse_projector(&st.value, &chart, st.line)?),
        None => None,
    };

    let mut reeb = Vec::new();
    let labels = reeb_labels(&spec.kind());
    for (key, label) in &labels {
        if let Some(st) = by_key.remove(key.as_str()) {
            reeb.push((label.clone(), parse_field_at(&st.value, &chart, st.line)?));
        }
    }
    if !reeb.is_empty() && reeb.len() != labels.len() {
        let keys: Vec<&str> = labels.iter().map(|(k, _)| k.as_str()).collect();
        return Err(InputError::general(format!("give all of {} or none", keys.join(", "))));
    }

    let frame = match by_key.remove("frame") {
        Some(st) => {
            let inner = enclosed(&st.value, '{', '}').ok_or_else(|| InputError::at(st.line, "frame must be `{ X1, X2, ... }`"))?;
            Some(
                split_top(inner)
                    .iter()
                    .map(|s| parse_field_at(s, &chart, st.line))
                    .collect::<Result<Vec<_>, _>>()?,
            )
        }
        None => None,
    };

    let grid = match by_key.remove("grid") {
        Some(st) => parse_grid(&st.value, &chart, st.line)?,
        None => parse_grid(DEFAULT_GRID, &chart, kind_stmt.line)?,
    };

    let ell = match by_key.remove("ell") {
        Some(st) => Some(
            st.value
                .parse::<usize>()
                .ok()
                .filter(|&l| l >= 1)
                .ok_or_else(|| InputError::at(st.line, format!("ell must be a positive integer, found `{}`", st.value)))?,
        ),
        None => None,
    };

    let offbox = match by_key.remove("offbox") {
        Some(st) => parse_rational(&st.value)
            .filter(|b| *b > Rational::from_integer(0.into()))
            .ok_or_else(|| InputError::at(st.line, format!("offbox must be a positive rational, found `{}`", st.value)))?,
        None => Rational::from_integer(1.into()),
    };

    let fiber = match by_key.remove("fiber") {
        Some(st) => parse_coordinate_list(&st.value, &chart, st.line)?,
        None => (0..chart.dim()).filter(|&i| chart.name(i).starts_with("mu")).collect(),
    };

    if let Some((key, st)) = by_key.into_iter().next() {
        let hint = if labels.is_empty() && key.starts_with("reeb") {
            format!("kind `{}` has no Reeb fields", kind_stmt.value)
        } else {
            format!("unexpected `{key}` for kind `{}`", kind_stmt.value)
        };
        return Err(InputError::at(st.line, hint));
    }

    Ok(ProblemFile {
        spec,
        nondegenerate,
        projector,
        reeb,
        frame,
        grid,
        ell,
        offbox,
        fiber,
    })
}
