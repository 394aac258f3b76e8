//! Reading diagrams, relation files and fixture specs.
//!
//! A diagram argument is either a file path or a fixture spec:
//! `@odo2/N`, `@tree2/N`, `@loop1/N`, `@complete/W/M/N`, `@simple/N`
//! (seeded) or `@instance/P/N` (seeded absorption instance; its host).

use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use bratteli_core::absorption::{capacity_request, Template};
use bratteli_core::fixtures::{complete, loop1, odo2, tree2};
use bratteli_core::gen::Gen;
use bratteli_core::io::{parse_diagram, parse_relation_file, RelationFile};
use bratteli_core::{ensure_capacity, transverse_diagrams, BratteliDiagram, FiniteEqRel};
use num_rational::BigRational;

use crate::AbsorbArgs;

pub fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Exact `p/q` or integer; decimals are rejected.
pub fn parse_ratio(s: &str) -> Result<BigRational> {
    let r: BigRational = s.trim().parse().map_err(|_| anyhow!("`{s}` is not a p/q rational"))?;
    Ok(r)
}

fn numbers(spec: &str, parts: &[&str], n: usize) -> Result<Vec<usize>> {
    if parts.len() != n {
        bail!("fixture `{spec}` takes {n} numeric fields");
    }
    parts.iter().map(|p| p.parse().map_err(|_| anyhow!("`{p}` in `{spec}` is not a number"))).collect()
}

pub fn load_diagram(spec: &str, seed: u64) -> Result<BratteliDiagram> {
    let Some(fixture) = spec.strip_prefix('@') else {
        let text = read(Path::new(spec))?;
        return parse_diagram(&text).with_context(|| format!("parsing {spec}"));
    };
    let mut parts = fixture.split('/');
    let name = parts.next().unwrap_or("");
    let rest: Vec<&str> = parts.collect();
    Ok(match name {
        "odo2" => odo2(numbers(spec, &rest, 1)?[0]),
        "tree2" => tree2(numbers(spec, &rest, 1)?[0]),
        "loop1" => loop1(numbers(spec, &rest, 1)?[0]),
        "complete" => {
            let v = numbers(spec, &rest, 3)?;
            complete(v[0], v[1], v[2])
        }
        "simple" => Gen::new(seed).simple_host(numbers(spec, &rest, 1)?[0], 3, 2),
        "instance" => {
            let v = numbers(spec, &rest, 2)?;
            Gen::new(seed).absorption_instance(v[0], v[1])?.host
        }
        other => bail!("unknown fixture `{other}`"),
    })
}

pub fn load_relations(path: &Path) -> Result<RelationFile> {
    parse_relation_file(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

/// The top-level relation of a file.
pub fn load_relation(path: &Path) -> Result<FiniteEqRel> {
    Ok(load_relations(path)?.relation())
}

/// The `CHAIN` sections of a file.
pub fn load_chain(path: &Path) -> Result<Vec<FiniteEqRel>> {
    let chain = load_relations(path)?.chain_relations();
    if chain.is_empty() {
        bail!("{} has no CHAIN sections", path.display());
    }
    Ok(chain)
}

fn instance_spec(host: &str) -> Option<&str> {
    host.strip_prefix("@instance/")
}

pub fn check_template_source(a: &AbsorbArgs) -> Result<()> {
    match (instance_spec(&a.host), &a.chain, &a.s) {
        (Some(_), None, None) | (None, Some(_), Some(_)) => Ok(()),
        (Some(_), _, _) => bail!("@instance hosts carry their own template; drop --chain/--s"),
        (None, _, _) => bail!("--chain and --s are both required unless the host is @instance/P/N"),
    }
}

/// Host (recoded when `--ensure`) and template for the absorption commands.
pub fn load_absorption(a: &AbsorbArgs, seed: u64) -> Result<(BratteliDiagram, Template)> {
    let (host, template) = match instance_spec(&a.host) {
        Some(_) => {
            let v = numbers(&a.host, &a.host[1..].split('/').skip(1).collect::<Vec<_>>(), 2)?;
            let inst = Gen::new(seed).absorption_instance(v[0], v[1])?;
            (inst.host, inst.template)
        }
        None => {
            let chain = load_chain(a.chain.as_deref().expect("checked"))?;
            let s = load_relation(a.s.as_deref().expect("checked"))?;
            let td = transverse_diagrams(&chain, &s)?;
            (load_diagram(&a.host, seed)?, Template::new(td.q)?)
        }
    };
    let depth = a.depth.unwrap_or(host.depth());
    let host = if a.ensure {
        ensure_capacity(&host, &capacity_request(&template, depth)?)?.0
    } else if depth < host.depth() {
        bratteli_core::truncate(&host, depth)?.0
    } else if depth > host.depth() {
        bail!("--depth {depth} exceeds the host depth {}", host.depth());
    } else {
        host
    };
    Ok((host, template))
}
