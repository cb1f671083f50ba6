//! CSV serialization for solver outputs. Floats are written with 17
//! significant digits so that write -> parse round-trips bit for bit.

use std::sync::Arc;

use crate::error::SolverError;
use crate::geodesics::GeodesicPath;
use crate::iteration::{IterationTrace, SweepEntry};
use crate::planar::domain::GridPotential2D;
use crate::radial::{RadialGrid, RadialPotential};

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// CSV with header `r,value`, one row per grid node.
pub fn potential_to_csv(phi: &RadialPotential) -> String {
    let mut out = String::from("r,value\n");
    for (r, v) in phi.grid().nodes().iter().zip(phi.values()) {
        out.push_str(&fmt(*r));
        out.push(',');
        out.push_str(&fmt(*v));
        out.push('\n');
    }
    out
}

/// Parse a `r,value` CSV back into a potential over a dimension-n ball whose
/// radius is the last node.
pub fn potential_from_csv(csv: &str, n: usize) -> Result<RadialPotential, SolverError> {
    let mut lines = csv.lines();
    match lines.next() {
        Some(h) if h.trim() == "r,value" => {}
        other => {
            return Err(SolverError::invalid_input(format!(
                "expected header 'r,value', got {other:?}"
            )))
        }
    }
    let mut nodes = Vec::new();
    let mut values = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (r, v) = parse_pair(line, idx + 2)?;
        nodes.push(r);
        values.push(v);
    }
    let grid = RadialGrid::from_nodes(n, nodes)?;
    RadialPotential::new(Arc::new(grid), values)
}

fn parse_pair(line: &str, line_no: usize) -> Result<(f64, f64), SolverError> {
    let mut parts = line.split(',');
    let bad = |what: &str| {
        SolverError::invalid_input(format!("line {line_no}: {what} in {line:?}"))
    };
    let a = parts
        .next()
        .ok_or_else(|| bad("missing first field"))?
        .trim()
        .parse::<f64>()
        .map_err(|_| bad("unparsable first field"))?;
    let b = parts
        .next()
        .ok_or_else(|| bad("missing second field"))?
        .trim()
        .parse::<f64>()
        .map_err(|_| bad("unparsable second field"))?;
    if parts.next().is_some() {
        return Err(bad("too many fields"));
    }
    Ok((a, b))
}

/// Parse a `x,y,value` CSV against the domain that produced it; positions
/// must match the domain's interior nodes in order.
pub fn field_from_csv(
    csv: &str,
    domain: &Arc<crate::planar::PlanarDomain>,
) -> Result<GridPotential2D, SolverError> {
    let mut lines = csv.lines();
    match lines.next() {
        Some(h) if h.trim() == "x,y,value" => {}
        other => {
            return Err(SolverError::invalid_input(format!(
                "expected header 'x,y,value', got {other:?}"
            )))
        }
    }
    let mut values = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let mut next = || -> Result<f64, SolverError> {
            parts
                .next()
                .ok_or_else(|| SolverError::invalid_input(format!("line {}: missing field", idx + 2)))?
                .trim()
                .parse::<f64>()
                .map_err(|_| SolverError::invalid_input(format!("line {}: unparsable field", idx + 2)))
        };
        let (x, y, v) = (next()?, next()?, next()?);
        let k = values.len();
        if k >= domain.interior_count() {
            return Err(SolverError::GridMismatch {
                context: "field CSV has more rows than the domain has interior nodes".to_string(),
            });
        }
        let (px, py) = domain.position(k);
        let tol = 1.0e-9 * domain.h();
        if (x - px).abs() > tol || (y - py).abs() > tol {
            return Err(SolverError::GridMismatch {
                context: format!("row {} at ({x}, {y}) does not sit on the domain node ({px}, {py})", idx + 2),
            });
        }
        values.push(v);
    }
    GridPotential2D::new(domain.clone(), values)
}

/// CSV with header `index,E,F,supDiff,residual`, one row per trace step.
pub fn trace_to_csv(trace: &IterationTrace) -> String {
    let mut out = String::from("index,E,F,supDiff,residual\n");
    for step in &trace.steps {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            step.index,
            fmt(step.e),
            fmt(step.f),
            fmt(step.sup_diff),
            fmt(step.residual)
        ));
    }
    out
}

/// CSV with header `t,s,u`: every sample profile of the path in long form.
pub fn path_to_csv(path: &GeodesicPath) -> String {
    let mut out = String::from("t,s,u\n");
    for (t, profile) in path.ts.iter().zip(&path.samples) {
        for (s, u) in profile.s_nodes().iter().zip(profile.values()) {
            out.push_str(&fmt(*t));
            out.push(',');
            out.push_str(&fmt(*s));
            out.push(',');
            out.push_str(&fmt(*u));
            out.push('\n');
        }
    }
    out
}

/// CSV with header `x,y,value`, one row per interior node.
pub fn field_to_csv(phi: &GridPotential2D) -> String {
    let mut out = String::from("x,y,value\n");
    for (k, v) in phi.values().iter().enumerate() {
        let (x, y) = phi.domain().position(k);
        out.push_str(&fmt(x));
        out.push(',');
        out.push_str(&fmt(y));
        out.push(',');
        out.push_str(&fmt(*v));
        out.push('\n');
    }
    out
}

/// Parse a trace CSV back into its step records; the run-level convergence
/// flags live in the summary JSON, not the CSV.
pub fn trace_steps_from_csv(csv: &str) -> Result<Vec<crate::iteration::TraceStep>, SolverError> {
    let mut lines = csv.lines();
    match lines.next() {
        Some(h) if h.trim() == "index,E,F,supDiff,residual" => {}
        other => {
            return Err(SolverError::invalid_input(format!(
                "expected header 'index,E,F,supDiff,residual', got {other:?}"
            )))
        }
    }
    let mut steps = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(SolverError::invalid_input(format!(
                "line {}: expected 5 fields, got {}",
                idx + 2,
                fields.len()
            )));
        }
        let bad = |what: &str| SolverError::invalid_input(format!("line {}: {what}", idx + 2));
        steps.push(crate::iteration::TraceStep {
            index: fields[0].trim().parse().map_err(|_| bad("unparsable index"))?,
            e: fields[1].trim().parse().map_err(|_| bad("unparsable E"))?,
            f: fields[2].trim().parse().map_err(|_| bad("unparsable F"))?,
            sup_diff: fields[3].trim().parse().map_err(|_| bad("unparsable supDiff"))?,
            residual: fields[4].trim().parse().map_err(|_| bad("unparsable residual"))?,
        });
    }
    Ok(steps)
}

/// Parse a path CSV back into a geodesic path; sample profiles are grouped by
/// runs of equal t, and the endpoint profiles are the first and last samples.
pub fn path_from_csv(csv: &str, n: usize) -> Result<GeodesicPath, SolverError> {
    let mut lines = csv.lines();
    match lines.next() {
        Some(h) if h.trim() == "t,s,u" => {}
        other => {
            return Err(SolverError::invalid_input(format!(
                "expected header 't,s,u', got {other:?}"
            )))
        }
    }
    let mut ts: Vec<f64> = Vec::new();
    let mut groups: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(SolverError::invalid_input(format!(
                "line {}: expected 3 fields, got {}",
                idx + 2,
                fields.len()
            )));
        }
        let bad = |what: &str| SolverError::invalid_input(format!("line {}: {what}", idx + 2));
        let t: f64 = fields[0].trim().parse().map_err(|_| bad("unparsable t"))?;
        let s: f64 = fields[1].trim().parse().map_err(|_| bad("unparsable s"))?;
        let u: f64 = fields[2].trim().parse().map_err(|_| bad("unparsable u"))?;
        if ts.last() != Some(&t) {
            ts.push(t);
            groups.push((Vec::new(), Vec::new()));
        }
        let group = groups.last_mut().unwrap();
        group.0.push(s);
        group.1.push(u);
    }
    if groups.is_empty() {
        return Err(SolverError::invalid_input("path CSV has no rows"));
    }
    let mut samples = Vec::with_capacity(groups.len());
    for (s, u) in groups {
        let profile = crate::geodesics::SLogProfile::new(n, s[0], *s.last().unwrap(), u)?;
        samples.push(profile);
    }
    Ok(GeodesicPath {
        u0: samples.first().unwrap().clone(),
        u1: samples.last().unwrap().clone(),
        ts,
        samples,
    })
}

/// CSV with header `t,converged,E,F`, one row per sweep entry.
pub fn sweep_to_csv(entries: &[SweepEntry]) -> String {
    let mut out = String::from("t,converged,E,F\n");
    for e in entries {
        out.push_str(&format!("{},{},{},{}\n", fmt(e.t), e.converged, fmt(e.e), fmt(e.f)));
    }
    out
}

/// Parse a sweep CSV back into its entries.
pub fn sweep_from_csv(csv: &str) -> Result<Vec<SweepEntry>, SolverError> {
    let mut lines = csv.lines();
    match lines.next() {
        Some(h) if h.trim() == "t,converged,E,F" => {}
        other => {
            return Err(SolverError::invalid_input(format!(
                "expected header 't,converged,E,F', got {other:?}"
            )))
        }
    }
    let mut entries = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(SolverError::invalid_input(format!(
                "line {}: expected 4 fields, got {}",
                idx + 2,
                fields.len()
            )));
        }
        let bad = |what: &str| SolverError::invalid_input(format!("line {}: {what}", idx + 2));
        entries.push(SweepEntry {
            t: fields[0].trim().parse().map_err(|_| bad("unparsable t"))?,
            converged: match fields[1].trim() {
                "true" => true,
                "false" => false,
                _ => return Err(bad("unparsable converged flag")),
            },
            e: fields[2].trim().parse().map_err(|_| bad("unparsable E"))?,
            f: fields[3].trim().parse().map_err(|_| bad("unparsable F"))?,
        });
    }
    Ok(entries)
}
