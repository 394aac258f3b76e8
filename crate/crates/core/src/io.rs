//! Line-oriented text formats, DOT export and the report line grammar.
//!
//! Every format ignores blank lines and `#` comments. Parse errors carry
//! the 1-based line number.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::diagram::{BratteliDiagram, DiagramQuotient, Strictness, Subdiagram};
use crate::error::{Error, Result};
use crate::relations::{FiniteEqRel, Permutation};

fn parse_err(line: usize, reason: impl Into<String>) -> Error {
    Error::Parse { line, reason: reason.into() }
}

/// Non-empty, comment-stripped lines as `(line number, tokens)`.
fn tokens(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let body = raw.split('#').next().unwrap_or("");
        let toks: Vec<&str> = body.split_whitespace().collect();
        (!toks.is_empty()).then_some((i + 1, toks))
    })
}

fn level_of(line: usize, tok: &str) -> Result<usize> {
    tok.parse().map_err(|_| parse_err(line, format!("`{tok}` is not a level")))
}

fn arity(line: usize, toks: &[&str], n: usize) -> Result<()> {
    if toks.len() != n {
        return Err(parse_err(line, format!("`{}` takes {} fields, found {}", toks[0], n - 1, toks.len() - 1)));
    }
    Ok(())
}

/// `V <level> <id>` and `E <level> <id> <source-id> <range-id>` lines,
/// levels nondecreasing, a single vertex at level 0 declared first.
pub fn parse_diagram(text: &str) -> Result<BratteliDiagram> {
    let mut d = BratteliDiagram::new();
    let mut last = 0usize;
    for (line, toks) in tokens(text) {
        let wrap = |e: Error| parse_err(line, e.to_string());
        match toks[0] {
            "V" => {
                arity(line, &toks, 3)?;
                let level = level_of(line, toks[1])?;
                if d.level_count() == 0 && level != 0 {
                    return Err(parse_err(line, "the first vertex must be the level-0 root"));
                }
                if level == 0 && d.level_count() > 0 {
                    return Err(parse_err(line, "level 0 holds a single root vertex"));
                }
                if level < last {
                    return Err(parse_err(line, format!("level {level} after level {last}")));
                }
                d.add_vertex(level, toks[2]).map_err(wrap)?;
                last = level;
            }
            "E" => {
                arity(line, &toks, 5)?;
                let level = level_of(line, toks[1])?;
                if level == 0 {
                    return Err(parse_err(line, "edges start at level 1"));
                }
                if level < last {
                    return Err(parse_err(line, format!("level {level} after level {last}")));
                }
                d.add_edge(level, toks[2], toks[3], toks[4]).map_err(wrap)?;
                last = level;
            }
            other => return Err(parse_err(line, format!("unknown record `{other}`"))),
        }
    }
    if d.level_count() == 0 {
        return Err(parse_err(0, "no root vertex"));
    }
    Ok(d)
}

pub fn emit_diagram(d: &BratteliDiagram) -> String {
    let mut out = String::new();
    for n in 0..=d.depth() {
        for v in d.vertices(n) {
            let _ = writeln!(out, "V {n} {v}");
        }
        if n > 0 {
            for e in d.edges(n) {
                let _ = writeln!(out, "E {n} {} {} {}", e.id, d.vertex_id(n - 1, e.source), d.vertex_id(n, e.range));
            }
        }
    }
    out
}

/// `S <level> <edge-id>` lines against `host`.
pub fn parse_subdiagram(text: &str, host: &BratteliDiagram) -> Result<Subdiagram> {
    let mut sub = Subdiagram::empty(host.depth());
    for (line, toks) in tokens(text) {
        if toks[0] != "S" {
            return Err(parse_err(line, format!("unknown record `{}`", toks[0])));
        }
        arity(line, &toks, 3)?;
        let level = level_of(line, toks[1])?;
        if level == 0 || level > host.depth() {
            return Err(parse_err(line, format!("level {level} outside 1..={}", host.depth())));
        }
        let e = host
            .edge_index(level, toks[2])
            .ok_or_else(|| parse_err(line, format!("unknown edge `{}` at level {level}", toks[2])))?;
        sub.insert(level, e);
    }
    Ok(sub)
}

pub fn emit_subdiagram(sub: &Subdiagram, host: &BratteliDiagram) -> String {
    let mut out = String::new();
    for n in 1..=sub.depth() {
        for &e in sub.edges(n) {
            let _ = writeln!(out, "S {n} {}", host.edge(n, e).id);
        }
    }
    out
}

/// `STRICT full|source` header plus `QV`/`QE <level> <src-id> <dst-id>` lines.
pub fn parse_quotient(text: &str, source: &BratteliDiagram, target: &BratteliDiagram) -> Result<DiagramQuotient> {
    if source.depth() != target.depth() {
        return Err(Error::DepthMismatch { left: source.depth(), right: target.depth() });
    }
    let depth = source.depth();
    let mut strict = None;
    let mut vm: Vec<Vec<Option<usize>>> = (0..=depth).map(|n| vec![None; source.vertex_count(n)]).collect();
    let mut em: Vec<Vec<Option<usize>>> = (1..=depth).map(|n| vec![None; source.edges(n).len()]).collect();
    for (line, toks) in tokens(text) {
        match toks[0] {
            "STRICT" => {
                arity(line, &toks, 2)?;
                if strict.is_some() {
                    return Err(parse_err(line, "repeated STRICT header"));
                }
                strict = Some(match toks[1] {
                    "full" => Strictness::Full,
                    "source" => Strictness::SourceFiber,
                    other => return Err(parse_err(line, format!("strictness `{other}` is not full|source"))),
                });
            }
            kind @ ("QV" | "QE") => {
                arity(line, &toks, 4)?;
                let level = level_of(line, toks[1])?;
                if level > depth || (kind == "QE" && level == 0) {
                    return Err(parse_err(line, format!("level {level} out of range")));
                }
                let (src, dst) = if kind == "QV" {
                    (source.vertex_index(level, toks[2]), target.vertex_index(level, toks[3]))
                } else {
                    (source.edge_index(level, toks[2]), target.edge_index(level, toks[3]))
                };
                let src = src.ok_or_else(|| parse_err(line, format!("unknown source id `{}`", toks[2])))?;
                let dst = dst.ok_or_else(|| parse_err(line, format!("unknown target id `{}`", toks[3])))?;
                let slot = if kind == "QV" { &mut vm[level][src] } else { &mut em[level - 1][src] };
                if slot.replace(dst).is_some_and(|old| old != dst) {
                    return Err(parse_err(line, format!("`{}` mapped twice", toks[2])));
                }
            }
            other => return Err(parse_err(line, format!("unknown record `{other}`"))),
        }
    }
    let strict = strict.ok_or_else(|| parse_err(0, "missing STRICT header"))?;
    let total = |m: Vec<Vec<Option<usize>>>, what: &str| -> Result<Vec<Vec<usize>>> {
        m.into_iter()
            .enumerate()
            .map(|(n, row)| {
                row.into_iter()
                    .collect::<Option<Vec<_>>>()
                    .ok_or_else(|| parse_err(0, format!("{what} undefined somewhere on level {n}")))
            })
            .collect()
    };
    DiagramQuotient::new(source.clone(), target.clone(), total(vm, "QV")?, total(em, "QE")?, strict)
}

pub fn emit_quotient(q: &DiagramQuotient) -> String {
    let mut out = String::new();
    let strict = match q.strictness {
        Strictness::Full => "full",
        Strictness::SourceFiber => "source",
    };
    let _ = writeln!(out, "STRICT {strict}");
    for n in 0..=q.depth() {
        for v in 0..q.source.vertex_count(n) {
            let _ = writeln!(out, "QV {n} {} {}", q.source.vertex_id(n, v), q.target.vertex_id(n, q.map_vertex(n, v)));
        }
        if n > 0 {
            for (e, edge) in q.source.edges(n).iter().enumerate() {
                let _ = writeln!(out, "QE {n} {} {}", edge.id, q.target.edge(n, q.map_edge(n, e)).id);
            }
        }
    }
    out
}

/// Contents of a relation file: points, the top-level classes, any
/// permutation generators, and any `CHAIN <k>` sections.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RelationFile {
    pub names: Vec<String>,
    pub classes: Vec<Vec<usize>>,
    pub generators: Vec<Permutation>,
    pub chain: Vec<Vec<Vec<usize>>>,
}

impl RelationFile {
    fn build(&self, classes: &[Vec<usize>]) -> FiniteEqRel {
        let mut labels: Vec<usize> = (0..self.names.len()).collect();
        for c in classes {
            for &x in c {
                labels[x] = c[0];
            }
        }
        FiniteEqRel::from_labels(self.names.clone(), &labels)
    }

    /// The top-level relation; unlisted points are singletons.
    pub fn relation(&self) -> FiniteEqRel {
        self.build(&self.classes)
    }

    pub fn chain_relations(&self) -> Vec<FiniteEqRel> {
        self.chain.iter().map(|c| self.build(c)).collect()
    }
}

fn parse_cycles(line: usize, body: &str, index: &HashMap<String, usize>) -> Result<Vec<Vec<usize>>> {
    let mut cycles = Vec::new();
    let mut rest = body.trim();
    while !rest.is_empty() {
        let open = rest
            .strip_prefix('(')
            .ok_or_else(|| parse_err(line, format!("expected `(` in `{body}`")))?;
        let close = open.find(')').ok_or_else(|| parse_err(line, "unclosed cycle"))?;
        let cycle = open[..close]
            .split_whitespace()
            .map(|p| index.get(p).copied().ok_or_else(|| parse_err(line, format!("unknown point `{p}`"))))
            .collect::<Result<Vec<_>>>()?;
        if !cycle.is_empty() {
            cycles.push(cycle);
        }
        rest = open[close + 1..].trim_start();
    }
    Ok(cycles)
}

/// `P <id>` point lines, `C <id> …` class lines, `G <cycles>` generator
/// lines and `CHAIN <k>` headers whose following `C` lines describe `R_k`.
pub fn parse_relation_file(text: &str) -> Result<RelationFile> {
    let mut f = RelationFile::default();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut pending_gens: Vec<(usize, String)> = Vec::new();
    let mut seen_in_section: Vec<bool> = Vec::new();
    for (line, toks) in tokens(text) {
        match toks[0] {
            "P" => {
                arity(line, &toks, 2)?;
                if !f.classes.is_empty() || !f.chain.is_empty() {
                    return Err(parse_err(line, "points must precede classes"));
                }
                if index.insert(toks[1].to_string(), f.names.len()).is_some() {
                    return Err(parse_err(line, format!("duplicate point `{}`", toks[1])));
                }
                f.names.push(toks[1].to_string());
            }
            "C" => {
                if toks.len() < 2 {
                    return Err(parse_err(line, "empty class"));
                }
                if seen_in_section.len() != f.names.len() {
                    seen_in_section = vec![false; f.names.len()];
                }
                let class = toks[1..]
                    .iter()
                    .map(|p| index.get(*p).copied().ok_or_else(|| parse_err(line, format!("unknown point `{p}`"))))
                    .collect::<Result<Vec<_>>>()?;
                for &x in &class {
                    if std::mem::replace(&mut seen_in_section[x], true) {
                        return Err(parse_err(line, format!("point `{}` in two classes", f.names[x])));
                    }
                }
                match f.chain.last_mut() {
                    Some(section) => section.push(class),
                    None => f.classes.push(class),
                }
            }
            "G" => {
                let body = toks[1..].join(" ");
                pending_gens.push((line, body));
            }
            "CHAIN" => {
                arity(line, &toks, 2)?;
                let k = level_of(line, toks[1])?;
                if k != f.chain.len() {
                    return Err(parse_err(line, format!("expected CHAIN {}, found CHAIN {k}", f.chain.len())));
                }
                f.chain.push(Vec::new());
                seen_in_section = vec![false; f.names.len()];
            }
            other => return Err(parse_err(line, format!("unknown record `{other}`"))),
        }
    }
    for (line, body) in pending_gens {
        let cycles = parse_cycles(line, &body, &index)?;
        let p = Permutation::from_cycles(f.names.len(), &cycles).map_err(|e| parse_err(line, e.to_string()))?;
        f.generators.push(p);
    }
    Ok(f)
}

fn emit_points(out: &mut String, names: &[String]) {
    for n in names {
        let _ = writeln!(out, "P {n}");
    }
}

fn emit_classes(out: &mut String, r: &FiniteEqRel) {
    for c in r.classes().iter().filter(|c| c.len() > 1) {
        let ids: Vec<&str> = c.iter().map(|&x| r.name(x)).collect();
        let _ = writeln!(out, "C {}", ids.join(" "));
    }
}

pub fn emit_relation(r: &FiniteEqRel) -> String {
    let mut out = String::new();
    emit_points(&mut out, r.names());
    emit_classes(&mut out, r);
    out
}

pub fn emit_chain(chain: &[FiniteEqRel]) -> String {
    let mut out = String::new();
    if let Some(first) = chain.first() {
        emit_points(&mut out, first.names());
    }
    for (k, r) in chain.iter().enumerate() {
        let _ = writeln!(out, "CHAIN {k}");
        emit_classes(&mut out, r);
    }
    out
}

pub fn emit_permutations(names: &[String], gens: &[Permutation]) -> String {
    let mut out = String::new();
    emit_points(&mut out, names);
    for g in gens {
        let _ = writeln!(out, "G {}", g.cycle_notation(names));
    }
    out
}

fn dot_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// One node per vertex ranked by level, one edge per diagram edge; edges of
/// `highlight` are drawn bold.
pub fn emit_dot(d: &BratteliDiagram, highlight: Option<&Subdiagram>) -> String {
    let mut out = String::from("digraph bratteli {\n  rankdir=TB;\n  node [shape=circle];\n");
    for n in 0..=d.depth() {
        let _ = writeln!(out, "  subgraph level{n} {{\n    rank=same;");
        for (v, id) in d.vertices(n).iter().enumerate() {
            let _ = writeln!(out, "    n{n}_{v} [label={}];", dot_quote(id));
        }
        out.push_str("  }\n");
    }
    for n in 1..=d.depth() {
        for (i, e) in d.edges(n).iter().enumerate() {
            let style = if highlight.is_some_and(|h| h.contains(n, i)) { ", style=bold, color=red" } else { "" };
            let _ = writeln!(
                out,
                "  n{}_{} -> n{n}_{} [label={}{style}];",
                n - 1,
                e.source,
                e.range,
                dot_quote(&e.id)
            );
        }
    }
    out.push_str("}\n");
    out
}

/// One line of a command report.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReportLine {
    /// `STAGE <name> PASS|FAIL <detail>`.
    Stage { name: String, pass: bool, detail: String },
    /// `MARGIN <n> <N>` or `MARGIN none`.
    Margin(Option<(usize, usize)>),
}

impl std::fmt::Display for ReportLine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ReportLine::Stage { name, pass, detail } => {
                let verdict = if *pass { "PASS" } else { "FAIL" };
                if detail.is_empty() {
                    write!(f, "STAGE {name} {verdict}")
                } else {
                    write!(f, "STAGE {name} {verdict} {detail}")
                }
            }
            ReportLine::Margin(Some((n, big_n))) => write!(f, "MARGIN {n} {big_n}"),
            ReportLine::Margin(None) => write!(f, "MARGIN none"),
        }
    }
}

pub fn parse_report_line(line: &str) -> Result<ReportLine> {
    let mut parts = line.splitn(4, ' ');
    match parts.next() {
        Some("STAGE") => {
            let name = parts.next().filter(|s| !s.is_empty()).ok_or_else(|| parse_err(1, "STAGE without a name"))?;
            let pass = match parts.next() {
                Some("PASS") => true,
                Some("FAIL") => false,
                other => return Err(parse_err(1, format!("verdict {other:?} is not PASS|FAIL"))),
            };
            Ok(ReportLine::Stage { name: name.to_string(), pass, detail: parts.next().unwrap_or("").to_string() })
        }
        Some("MARGIN") => {
            let rest: Vec<&str> = parts.collect();
            match rest.as_slice() {
                ["none"] => Ok(ReportLine::Margin(None)),
                [n, big_n] => {
                    let n = n.parse().map_err(|_| parse_err(1, "MARGIN n is not a number"))?;
                    let big_n = big_n.parse().map_err(|_| parse_err(1, "MARGIN N is not a number"))?;
                    Ok(ReportLine::Margin(Some((n, big_n))))
                }
                _ => Err(parse_err(1, "MARGIN takes `<n> <N>` or `none`")),
            }
        }
        _ => Err(parse_err(1, format!("not a report line: `{line}`"))),
    }
}

/// Parses a whole report, numbering errors by line.
pub fn parse_report(text: &str) -> Result<Vec<ReportLine>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            parse_report_line(l).map_err(|e| match e {
                Error::Parse { reason, .. } => parse_err(i + 1, reason),
                other => other,
            })
        })
        .collect()
}
