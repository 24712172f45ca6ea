//! Line-oriented scenario files.
//!
//! ```text
//! name = sasakian-flat
//! dim = 3
//! [gamma]  a1 = "-2*x2"   a2 = "0"
//! [g]      r1 = "1","0"   r2 = "0","1"
//! [phi]    r1 = "0","1"   r2 = "-1","0"
//! [sample] box = [-1,1] x [-1,1] x [-1,1]   points = 200   seed = 42   tol = 1e-8
//! [tasks]  run = validate, classify, q4
//! ```
//!
//! Several `key = value` pairs may share a line; `#` starts a comment.
//! Matrix entries can also be given one at a time (`g12 = "x1"`, or
//! `g3_10` past nine rows); in `[g]` an omitted entry mirrors its transpose.

use std::collections::BTreeMap;
use std::fmt;

use acml_core::acms::AlmostContactStructure;
use acml_core::connections::Curve;
use acml_core::exprcore::Expr;
use acml_core::sampling::{SampleSpec, DEFAULT_TOLERANCE};
use acml_core::Point;
use thiserror::Error;

pub const DEFAULT_POINTS: usize = 100;
pub const DEFAULT_SEED: u64 = 0;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}: {message}")]
pub struct ScenarioError {
    pub line: usize,
    pub message: String,
}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, ScenarioError> {
    Err(ScenarioError { line, message: message.into() })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Task {
    Validate,
    Classify,
    Q4,
    Theorem5,
    Theorem7,
    Theorem8,
    TheoremN1,
    Transport,
    Lift,
    LiftTheorems,
}

impl Task {
    pub const ALL: [Task; 10] = [
        Task::Validate,
        Task::Classify,
        Task::Q4,
        Task::Theorem5,
        Task::Theorem7,
        Task::Theorem8,
        Task::TheoremN1,
        Task::Transport,
        Task::Lift,
        Task::LiftTheorems,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Task::Validate => "validate",
            Task::Classify => "classify",
            Task::Q4 => "q4",
            Task::Theorem5 => "theorem5",
            Task::Theorem7 => "theorem7",
            Task::Theorem8 => "theorem8",
            Task::TheoremN1 => "theoremN1",
            Task::Transport => "transport",
            Task::Lift => "lift",
            Task::LiftTheorems => "lift-theorems",
        }
    }

    pub fn parse(s: &str) -> Option<Task> {
        Task::ALL.iter().copied().find(|t| t.name() == s)
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CurveSpec {
    /// Counter-clockwise square in the plane of coordinates `plane` (1-based).
    Square {
        corner: Point,
        plane: (usize, usize),
        side: f64,
    },
    Polyline(Vec<Point>),
    /// One expression in `x1` (the curve parameter) per coordinate.
    Parametric {
        comps: Vec<String>,
        t0: f64,
        t1: f64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransportSpec {
    pub curve: CurveSpec,
    pub v0: Vec<f64>,
    pub steps: usize,
}

impl TransportSpec {
    pub fn build_curve(&self) -> Result<Curve, acml_core::Error> {
        Ok(match &self.curve {
            CurveSpec::Square { corner, plane, side } => {
                acml_core::connections::square_loop(corner, (plane.0 - 1, plane.1 - 1), *side)
            }
            CurveSpec::Polyline(p) => Curve::Polyline(p.clone()),
            CurveSpec::Parametric { comps, t0, t1 } => Curve::Parametric {
                comps: comps.iter().map(|c| Expr::parse(c, 1)).collect::<Result<_, _>>()?,
                t0: *t0,
                t1: *t1,
            },
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub dim: usize,
    pub gamma: Vec<String>,
    pub g: Vec<Vec<String>>,
    pub phi: Vec<Vec<String>>,
    pub sample: SampleSpec,
    pub tasks: Vec<Task>,
    pub transport: Option<TransportSpec>,
    pub fd_check: bool,
}

impl Scenario {
    pub fn structure(&self) -> acml_core::Result<AlmostContactStructure> {
        fn flat(rows: &[Vec<String>]) -> Vec<&str> {
            rows.iter().flatten().map(String::as_str).collect()
        }
        let gamma: Vec<&str> = self.gamma.iter().map(String::as_str).collect();
        AlmostContactStructure::from_exprs(self.dim, &gamma, &flat(&self.g), &flat(&self.phi))
    }
}

struct Entry {
    value: String,
    line: usize,
}

#[derive(Default)]
struct Section {
    line: usize,
    entries: BTreeMap<String, Entry>,
}

fn strip_comment(line: &str) -> &str {
    let mut quoted = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => quoted = !quoted,
            '#' if !quoted => return &line[..i],
            _ => {}
        }
    }
    line
}

/// Split `k1 = v1   k2 = v2` into pairs. A key is an identifier preceded by
/// whitespace (or the start) and followed by `=`, outside quotes.
fn split_pairs(text: &str, line: usize) -> Result<Vec<(String, String)>, ScenarioError> {
    let bytes = text.as_bytes();
    let mut keys: Vec<(usize, usize, usize)> = Vec::new(); // (key start, key end, value start)
    let mut quoted = false;
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c == b'"' {
            quoted = !quoted;
            i += 1;
            continue;
        }
        let at_word =
            !quoted && (c.is_ascii_alphabetic() || c == b'_') && (i == 0 || bytes[i - 1].is_ascii_whitespace());
        if at_word {
            let mut j = i;
            while j < bytes.len() && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_' || bytes[j] == b'-') {
                j += 1;
            }
            let mut k = j;
            while k < bytes.len() && bytes[k].is_ascii_whitespace() {
                k += 1;
            }
            if k < bytes.len() && bytes[k] == b'=' {
                keys.push((i, j, k + 1));
                i = k + 1;
                continue;
            }
            i = j;
            continue;
        }
        i += 1;
    }
    if quoted {
        return err(line, "unterminated string");
    }
    if keys.is_empty() {
        return if text.trim().is_empty() {
            Ok(Vec::new())
        } else {
            err(line, format!("expected `key = value`, found `{}`", text.trim()))
        };
    }
    if !text[..keys[0].0].trim().is_empty() {
        return err(line, format!("unexpected text `{}`", text[..keys[0].0].trim()));
    }
    let mut out = Vec::with_capacity(keys.len());
    for (n, &(ks, ke, vs)) in keys.iter().enumerate() {
        let end = keys.get(n + 1).map_or(text.len(), |k| k.0);
        let value = text[vs..end].trim();
        if value.is_empty() {
            return err(line, format!("missing value for `{}`", &text[ks..ke]));
        }
        out.push((text[ks..ke].to_string(), value.to_string()));
    }
    Ok(out)
}

fn unquote(s: &str, line: usize, what: &str) -> Result<String, ScenarioError> {
    let t = s.trim();
    if t.len() >= 2 && t.starts_with('"') && t.ends_with('"') && !t[1..t.len() - 1].contains('"') {
        Ok(t[1..t.len() - 1].to_string())
    } else {
        err(line, format!("{what}: expected a quoted expression, found `{t}`"))
    }
}

fn split_commas(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut quoted = false;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '"' => quoted = !quoted,
            ',' if !quoted => {
                out.push(s[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(s[start..].trim());
    out
}

fn number<T: std::str::FromStr>(e: &Entry, what: &str) -> Result<T, ScenarioError> {
    e.value.trim().parse().or_else(|_| err(e.line, format!("{what}: invalid number `{}`", e.value.trim())))
}

fn numbers(s: &str, line: usize, what: &str) -> Result<Vec<f64>, ScenarioError> {
    split_commas(s)
        .into_iter()
        .map(|t| t.parse::<f64>().or_else(|_| err(line, format!("{what}: invalid number `{t}`"))))
        .collect()
}

fn check_expr(src: &str, dim: usize, line: usize, what: &str) -> Result<(), ScenarioError> {
    Expr::parse(src, dim).map(|_| ()).or_else(|e| err(line, format!("{what}: {e}")))
}

fn parse_box(e: &Entry) -> Result<Vec<(f64, f64)>, ScenarioError> {
    e.value
        .split(" x ")
        .map(|part| {
            let t = part.trim();
            let inner = t
                .strip_prefix('[')
                .and_then(|t| t.strip_suffix(']'))
                .map_or_else(|| err(e.line, format!("box: expected `[lo,hi]`, found `{t}`")), Ok)?;
            match numbers(inner, e.line, "box")?.as_slice() {
                [lo, hi] => Ok((*lo, *hi)),
                _ => err(e.line, format!("box: expected two bounds in `{t}`")),
            }
        })
        .collect()
}

fn parse_path(e: &Entry, dim: usize) -> Result<Vec<Point>, ScenarioError> {
    let mut out = Vec::new();
    let mut rest = e.value.trim();
    while !rest.is_empty() {
        let open = rest.strip_prefix('(').map_or_else(|| err(e.line, "path: expected `(`"), Ok)?;
        let close = open.find(')').map_or_else(|| err(e.line, "path: missing `)`"), Ok)?;
        let p = numbers(&open[..close], e.line, "path")?;
        if p.len() != dim {
            return err(e.line, format!("dimension mismatch: path point has {} coordinates, expected {dim}", p.len()));
        }
        out.push(p);
        rest = open[close + 1..].trim_start();
    }
    if out.len() < 2 {
        return err(e.line, "path needs at least two points");
    }
    Ok(out)
}

struct Sections(BTreeMap<String, Section>);

impl Sections {
    fn get(&self, sec: &str, key: &str) -> Option<&Entry> {
        self.0.get(sec).and_then(|s| s.entries.get(key))
    }

    fn require(&self, sec: &str, key: &str) -> Result<&Entry, ScenarioError> {
        let line = self.0.get(sec).map_or(0, |s| s.line);
        self.get(sec, key).map_or_else(
            || {
                if sec.is_empty() {
                    err(line, format!("missing `{key}`"))
                } else {
                    err(line, format!("[{sec}] is missing `{key}`"))
                }
            },
            Ok,
        )
    }

    fn allow(&self, sec: &str, allowed: &dyn Fn(&str) -> bool) -> Result<(), ScenarioError> {
        if let Some(s) = self.0.get(sec) {
            for (k, e) in &s.entries {
                if !allowed(k) {
                    let where_ = if sec.is_empty() { String::new() } else { format!(" in [{sec}]") };
                    return err(e.line, format!("unknown key `{k}`{where_}"));
                }
            }
        }
        Ok(())
    }
}

fn indexed(k: &str, prefix: char, m: usize) -> bool {
    k.strip_prefix(prefix).and_then(|d| d.parse::<usize>().ok()).is_some_and(|i| (1..=m).contains(&i))
}

/// `g12`, `phi3_10` style entry keys, 1-based; `None` if `k` is not one.
fn entry_key(k: &str, sec: &str) -> Option<(usize, usize)> {
    let rest = k.strip_prefix(sec)?;
    if let Some((i, j)) = rest.split_once('_') {
        return Some((i.parse().ok()?, j.parse().ok()?));
    }
    let b = rest.as_bytes();
    if b.len() == 2 && b.iter().all(u8::is_ascii_digit) {
        return Some(((b[0] - b'0') as usize, (b[1] - b'0') as usize));
    }
    None
}

/// Rows `rA = "..", ..` and/or single entries `gAB = ".."`. In `[g]` a
/// missing entry is mirrored from its transpose.
fn matrix(secs: &Sections, sec: &str, m: usize, dim: usize) -> Result<Vec<Vec<String>>, ScenarioError> {
    let mut cells: Vec<Vec<Option<(String, usize)>>> = vec![vec![None; m]; m];
    let section_line = secs.0.get(sec).map_or(1, |s| s.line);
    let entries = secs.0.get(sec).map(|s| &s.entries);
    for (k, e) in entries.into_iter().flatten() {
        if let Some(r) = k.strip_prefix('r').and_then(|d| d.parse::<usize>().ok()) {
            if r == 0 || r > m {
                return err(e.line, format!("dimension mismatch: {sec} has row {k} but dim = {dim} allows {m} rows"));
            }
            let row = split_commas(&e.value);
            if row.len() != m {
                return err(
                    e.line,
                    format!(
                        "dimension mismatch: {sec} row r{r} has {} entries, expected {m} for dim = {dim}",
                        row.len()
                    ),
                );
            }
            for (c, cell) in row.iter().enumerate() {
                let what = format!("{sec}{r}{}", c + 1);
                if cells[r - 1][c].is_some() {
                    return err(e.line, format!("{what} given twice"));
                }
                let src = unquote(cell, e.line, &what)?;
                check_expr(&src, dim, e.line, &what)?;
                cells[r - 1][c] = Some((src, e.line));
            }
        } else if let Some((i, j)) = entry_key(k, sec) {
            if i == 0 || j == 0 || i > m || j > m {
                return err(e.line, format!("dimension mismatch: {k} is outside the {m}x{m} matrix for dim = {dim}"));
            }
            if cells[i - 1][j - 1].is_some() {
                return err(e.line, format!("{k} given twice"));
            }
            let src = unquote(&e.value, e.line, k)?;
            check_expr(&src, dim, e.line, k)?;
            cells[i - 1][j - 1] = Some((src, e.line));
        } else if !(sec == "g" && k == "symmetric") {
            return err(e.line, format!("unknown key `{k}` in [{sec}]"));
        }
    }
    if sec == "g" {
        for a in 0..m {
            for b in 0..m {
                if cells[a][b].is_none() {
                    cells[a][b] = cells[b][a].clone();
                }
            }
        }
    }
    let mut out = Vec::with_capacity(m);
    for (a, row) in cells.into_iter().enumerate() {
        let mut r = Vec::with_capacity(m);
        for (b, c) in row.into_iter().enumerate() {
            match c {
                Some((src, _)) => r.push(src),
                None => return err(section_line, format!("[{sec}] is missing entry {sec}{}{}", a + 1, b + 1)),
            }
        }
        out.push(r);
    }
    Ok(out)
}

fn line_of(secs: &Sections, sec: &str, a: usize, b: usize) -> usize {
    let s = match secs.0.get(sec) {
        Some(s) => s,
        None => return 1,
    };
    s.entries
        .iter()
        .find(|(k, _)| entry_key(k, sec) == Some((a + 1, b + 1)) || k.as_str() == format!("r{}", a + 1))
        .map_or(s.line, |(_, e)| e.line)
}

fn flag(e: &Entry) -> Result<bool, ScenarioError> {
    match e.value.trim() {
        "true" | "yes" | "on" => Ok(true),
        "false" | "no" | "off" => Ok(false),
        other => err(e.line, format!("expected true or false, found `{other}`")),
    }
}

const SECTIONS: [&str; 7] = ["gamma", "g", "phi", "sample", "tasks", "transport", "options"];

pub fn load_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let mut secs: BTreeMap<String, Section> = BTreeMap::new();
    secs.insert(String::new(), Section { line: 1, entries: BTreeMap::new() });
    let mut current = String::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let mut body = strip_comment(raw).trim();
        if body.is_empty() {
            continue;
        }
        if let Some(rest) = body.strip_prefix('[') {
            let close = rest.find(']').map_or_else(|| err(line, "unterminated section header"), Ok)?;
            let name = rest[..close].trim();
            if !SECTIONS.contains(&name) {
                return err(line, format!("unknown section [{name}]"));
            }
            if secs.contains_key(name) {
                return err(line, format!("duplicate section [{name}]"));
            }
            current = name.to_string();
            secs.insert(current.clone(), Section { line, entries: BTreeMap::new() });
            body = rest[close + 1..].trim();
        }
        for (k, v) in split_pairs(body, line)? {
            let sec = secs.get_mut(&current).expect("section exists");
            if sec.entries.contains_key(&k) {
                return err(line, format!("duplicate key `{k}`"));
            }
            sec.entries.insert(k, Entry { value: v, line });
        }
    }
    let secs = Sections(secs);

    secs.allow("", &|k| matches!(k, "name" | "dim" | "fd_check"))?;
    let name =
        secs.get("", "name").map_or_else(|| "unnamed".to_string(), |e| e.value.trim().trim_matches('"').to_string());
    let dim_e = secs.require("", "dim")?;
    let dim: usize = number(dim_e, "dim")?;
    if dim < 3 || dim % 2 == 0 {
        return err(dim_e.line, format!("dim must be odd and at least 3, got {dim}"));
    }
    let m = dim - 1;

    secs.allow("gamma", &|k| indexed(k, 'a', m))?;
    let mut gamma = Vec::with_capacity(m);
    for a in 1..=m {
        let e = secs.require("gamma", &format!("a{a}"))?;
        let what = format!("gamma a{a}");
        let src = unquote(&e.value, e.line, &what)?;
        check_expr(&src, dim, e.line, &what)?;
        gamma.push(src);
    }

    let g = matrix(&secs, "g", m, dim)?;
    let phi = matrix(&secs, "phi", m, dim)?;
    let flagged = secs.get("g", "symmetric").map(flag).transpose()?.unwrap_or(false);
    if !flagged {
        let squash = |s: &str| s.split_whitespace().collect::<String>();
        for a in 0..m {
            for b in a + 1..m {
                if squash(&g[a][b]) != squash(&g[b][a]) {
                    let line = line_of(&secs, "g", b, a);
                    return err(
                        line,
                        format!("g is not symmetric as written (g{}{} vs g{}{}); add `symmetric = true` to [g] to assert it", a + 1, b + 1, b + 1, a + 1),
                    );
                }
            }
        }
    }

    secs.allow("sample", &|k| matches!(k, "box" | "points" | "seed" | "tol"))?;
    let bounds = match secs.get("sample", "box") {
        Some(e) => {
            let b = parse_box(e)?;
            if b.len() != dim {
                return err(e.line, format!("dimension mismatch: box has {} intervals, expected {dim}", b.len()));
            }
            b
        }
        None => vec![(-1.0, 1.0); dim],
    };
    let points =
        secs.get("sample", "points").map(|e| number::<usize>(e, "points")).transpose()?.unwrap_or(DEFAULT_POINTS);
    let seed = secs.get("sample", "seed").map(|e| number::<u64>(e, "seed")).transpose()?.unwrap_or(DEFAULT_SEED);
    let tol = secs.get("sample", "tol").map(|e| number::<f64>(e, "tol")).transpose()?.unwrap_or(DEFAULT_TOLERANCE);
    let sample_line = secs.0.get("sample").map_or(1, |s| s.line);
    let sample = SampleSpec::new(bounds, points, seed)
        .map(|s| s.with_tolerance(tol))
        .and_then(|s| s.check().map(|_| s))
        .or_else(|e| err(sample_line, e.to_string()))?;

    secs.allow("tasks", &|k| k == "run")?;
    let run = secs.require("tasks", "run")?;
    let mut tasks = Vec::new();
    for t in split_commas(&run.value) {
        match Task::parse(t) {
            Some(task) => tasks.push(task),
            None => return err(run.line, format!("unknown task `{t}`")),
        }
    }

    secs.allow("transport", &|k| {
        matches!(k, "curve" | "corner" | "plane" | "side" | "path" | "t0" | "t1" | "v0" | "steps")
            || indexed(k, 'c', dim)
    })?;
    let transport = if secs.0.contains_key("transport") { Some(transport_spec(&secs, dim)?) } else { None };
    if tasks.contains(&Task::Transport) && transport.is_none() {
        return err(run.line, "task `transport` needs a [transport] section");
    }

    secs.allow("options", &|k| k == "fd_check")?;
    let fd_check = match (secs.get("", "fd_check"), secs.get("options", "fd_check")) {
        (Some(e), _) | (None, Some(e)) => flag(e)?,
        (None, None) => false,
    };

    Ok(Scenario { name, dim, gamma, g, phi, sample, tasks, transport, fd_check })
}

fn transport_spec(secs: &Sections, dim: usize) -> Result<TransportSpec, ScenarioError> {
    let m = dim - 1;
    let kind = secs.require("transport", "curve")?;
    let curve = match kind.value.trim() {
        "square" => {
            let corner_e = secs.require("transport", "corner")?;
            let corner = numbers(&corner_e.value, corner_e.line, "corner")?;
            if corner.len() != dim {
                return err(
                    corner_e.line,
                    format!("dimension mismatch: corner has {} coordinates, expected {dim}", corner.len()),
                );
            }
            let plane_e = secs.require("transport", "plane")?;
            let plane: Vec<usize> = split_commas(&plane_e.value)
                .into_iter()
                .map(|t| t.parse::<usize>().or_else(|_| err(plane_e.line, format!("plane: invalid index `{t}`"))))
                .collect::<Result<_, _>>()?;
            if plane.len() != 2 || plane[0] == plane[1] || plane.iter().any(|&i| i == 0 || i > m) {
                return err(plane_e.line, format!("plane must name two distinct coordinates among 1..{m}"));
            }
            let side: f64 = number(secs.require("transport", "side")?, "side")?;
            CurveSpec::Square { corner, plane: (plane[0], plane[1]), side }
        }
        "polyline" => CurveSpec::Polyline(parse_path(secs.require("transport", "path")?, dim)?),
        "parametric" => {
            let mut comps = Vec::with_capacity(dim);
            for i in 1..=dim {
                let e = secs.require("transport", &format!("c{i}"))?;
                let what = format!("transport c{i}");
                let src = unquote(&e.value, e.line, &what)?;
                check_expr(&src, 1, e.line, &what)?;
                comps.push(src);
            }
            let t0 = number(secs.require("transport", "t0")?, "t0")?;
            let t1 = number(secs.require("transport", "t1")?, "t1")?;
            CurveSpec::Parametric { comps, t0, t1 }
        }
        other => return err(kind.line, format!("unknown curve kind `{other}` (square, polyline, parametric)")),
    };
    let v0_e = secs.require("transport", "v0")?;
    let v0 = numbers(&v0_e.value, v0_e.line, "v0")?;
    if v0.len() != m {
        return err(v0_e.line, format!("dimension mismatch: v0 has {} components, expected {m}", v0.len()));
    }
    let steps = secs
        .get("transport", "steps")
        .map(|e| number::<usize>(e, "steps"))
        .transpose()?
        .unwrap_or(acml_core::connections::DEFAULT_STEPS);
    Ok(TransportSpec { curve, v0, steps })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairs_split_on_keys_outside_quotes() {
        let p = split_pairs(r#"a1 = "x = 1"   a2 = "0""#, 1).unwrap();
        assert_eq!(p, vec![("a1".into(), "\"x = 1\"".into()), ("a2".into(), "\"0\"".into())]);
        let p = split_pairs("run = validate, q4, lift-theorems", 1).unwrap();
        assert_eq!(p[0].1, "validate, q4, lift-theorems");
        assert!(split_pairs("garbage", 3).is_err());
    }

    #[test]
    fn entry_keys() {
        assert_eq!(entry_key("g12", "g"), Some((1, 2)));
        assert_eq!(entry_key("phi3_10", "phi"), Some((3, 10)));
        assert_eq!(entry_key("g123", "g"), None);
        assert_eq!(entry_key("symmetric", "g"), None);
    }

    #[test]
    fn box_parsing() {
        let e = Entry { value: "[-1,1] x [0, 2.5]".into(), line: 1 };
        assert_eq!(parse_box(&e).unwrap(), vec![(-1.0, 1.0), (0.0, 2.5)]);
    }

    #[test]
    fn comments_respect_quotes() {
        assert_eq!(strip_comment(r#"a1 = "x1" # note"#), r#"a1 = "x1" "#);
        assert_eq!(strip_comment(r##"a1 = "#""##), r##"a1 = "#""##);
    }
}
