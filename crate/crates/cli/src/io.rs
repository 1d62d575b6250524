//! Text formats for grid functions, kernels, graphs, trajectories and
//! study tables.
//!
//! Floats are written with Rust's shortest round-trip formatting, so reading a
//! file back reproduces the values bit for bit.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context};
use plap_core::analysis::RateStudyResult;
use plap_core::{DiscreteKernel, GraphSample, GridFunction, Mesh, Trajectory};
use serde::Serialize;

fn mesh_header(mesh: &Mesh) -> String {
    if mesh.is_uniform() {
        format!("# n={} layout=uniform", mesh.n())
    } else {
        let b: Vec<String> = mesh.boundaries().iter().map(|x| format!("{x:?}")).collect();
        format!(
            "# n={} layout=explicit boundaries={}",
            mesh.n(),
            b.join(";")
        )
    }
}

struct Header {
    n: usize,
    boundaries: Option<Vec<f64>>,
}

fn parse_header(line: &str) -> anyhow::Result<Header> {
    let body = line
        .strip_prefix('#')
        .ok_or_else(|| anyhow!("missing `# n=.. layout=..` header"))?;
    let mut n = None;
    let mut layout = None;
    let mut boundaries = None;
    for field in body.split_whitespace() {
        let (k, v) = field
            .split_once('=')
            .ok_or_else(|| anyhow!("malformed header field `{field}`"))?;
        match k {
            "n" => n = Some(v.parse::<usize>().context("header n")?),
            "layout" => layout = Some(v.to_string()),
            "boundaries" => {
                boundaries = Some(
                    v.split(';')
                        .map(|x| x.parse::<f64>())
                        .collect::<Result<Vec<_>, _>>()
                        .context("header boundaries")?,
                )
            }
            _ => bail!("unknown header field `{k}`"),
        }
    }
    let n = n.ok_or_else(|| anyhow!("header lacks n"))?;
    match layout.as_deref() {
        Some("uniform") => Ok(Header {
            n,
            boundaries: None,
        }),
        Some("explicit") => Ok(Header { n, boundaries }),
        other => bail!("unsupported layout {other:?}"),
    }
}

fn header_mesh(h: &Header) -> anyhow::Result<Arc<Mesh>> {
    Ok(Arc::new(match &h.boundaries {
        Some(b) => Mesh::from_boundaries(b.clone())?,
        None => Mesh::uniform(h.n)?,
    }))
}

fn parse_row(line: &str, line_no: usize) -> anyhow::Result<Vec<f64>> {
    line.split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .with_context(|| format!("line {line_no}: malformed number"))
}

/// One `left,right,value` row per cell.
pub fn grid_function_csv(g: &GridFunction) -> String {
    let mesh = g.mesh();
    let mut out = mesh_header(mesh);
    out.push('\n');
    for (i, v) in g.values().iter().enumerate() {
        let (a, b) = mesh.cell(i);
        let _ = writeln!(out, "{a:?},{b:?},{v:?}");
    }
    out
}

pub fn parse_grid_function(text: &str) -> anyhow::Result<GridFunction> {
    let mut lines = text.lines();
    let header = parse_header(lines.next().unwrap_or(""))?;
    let mut boundaries = vec![0.0];
    let mut values = Vec::with_capacity(header.n);
    for (k, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let row = parse_row(line, k + 2)?;
        let [a, b, v] = row[..] else {
            bail!("line {}: expected left,right,value", k + 2);
        };
        if a != *boundaries.last().expect("nonempty") {
            bail!(
                "line {}: cell does not start where the previous one ended",
                k + 2
            );
        }
        boundaries.push(b);
        values.push(v);
    }
    if values.len() != header.n {
        bail!(
            "header announces {} cells, found {}",
            header.n,
            values.len()
        );
    }
    let mesh = header_mesh(&header)?;
    if mesh.boundaries() != boundaries.as_slice() {
        let read = Mesh::from_boundaries(boundaries)?;
        if !mesh.refines(&read) || !read.refines(&mesh) {
            bail!("cell boundaries disagree with the header layout");
        }
    }
    Ok(GridFunction::new(mesh, values)?)
}

/// One matrix row per line.
pub fn kernel_csv(kd: &DiscreteKernel) -> String {
    let mut out = mesh_header(kd.mesh());
    out.push('\n');
    for i in 0..kd.n() {
        let row: Vec<String> = kd.row(i).iter().map(|x| format!("{x:?}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn parse_kernel(text: &str) -> anyhow::Result<DiscreteKernel> {
    let mut lines = text.lines();
    let header = parse_header(lines.next().unwrap_or(""))?;
    let mut entries = Vec::with_capacity(header.n * header.n);
    let mut rows = 0;
    for (k, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let row = parse_row(line, k + 2)?;
        if row.len() != header.n {
            bail!(
                "line {}: expected {} entries, found {}",
                k + 2,
                header.n,
                row.len()
            );
        }
        entries.extend(row);
        rows += 1;
    }
    if rows != header.n {
        bail!("header announces {} rows, found {rows}", header.n);
    }
    Ok(DiscreteKernel::from_entries(
        header_mesh(&header)?,
        entries,
    )?)
}

pub fn read_kernel(path: &Path) -> anyhow::Result<DiscreteKernel> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_kernel(&text).with_context(|| format!("parsing kernel {}", path.display()))
}

/// Header `n rho seed`, then one 1-based `i j` line per edge with `i < j`.
pub fn edge_list(g: &GraphSample) -> String {
    let mut out = format!("{} {:?} {}\n", g.n(), g.rho(), g.seed());
    for (i, j) in g.edges() {
        let _ = writeln!(out, "{} {}", i + 1, j + 1);
    }
    out
}

pub fn parse_edge_list(text: &str) -> anyhow::Result<GraphSample> {
    let mut lines = text.lines();
    let head: Vec<&str> = lines.next().unwrap_or("").split_whitespace().collect();
    let [n, rho, seed] = head[..] else {
        bail!("expected header `n rho seed`");
    };
    let n: usize = n.parse().context("header n")?;
    let rho: f64 = rho.parse().context("header rho")?;
    let seed: u64 = seed.parse().context("header seed")?;
    let mut edges = Vec::new();
    for (k, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let pair: Vec<usize> = line
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<_, _>>()
            .with_context(|| format!("line {}", k + 2))?;
        let [i, j] = pair[..] else {
            bail!("line {}: expected `i j`", k + 2);
        };
        if i == 0 || j == 0 {
            bail!("line {}: indices are 1-based", k + 2);
        }
        edges.push((i - 1, j - 1));
    }
    Ok(GraphSample::from_edges(n, rho, seed, &edges)?)
}

#[derive(Debug, Serialize)]
pub struct GraphStatsJson {
    pub n: usize,
    pub rho: f64,
    pub seed: u64,
    pub edge_count: usize,
    pub mean_degree: f64,
    pub max_degree: usize,
    /// Mean degree divided by `rho n`.
    pub normalized_mean_degree: f64,
    pub linf1_norm: f64,
    /// Mean row mass of the truncated weights, the expectation of the
    /// normalized mean degree.
    pub expected_normalized_degree: f64,
    pub truncation_gap: f64,
}

/// Header `t,u_1,..,u_n`, one stored state per line.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let n = traj.mesh().n();
    let mut out = String::from("t");
    for i in 1..=n {
        let _ = write!(out, ",u_{i}");
    }
    out.push('\n');
    for (t, state) in traj.times().iter().zip(traj.states()) {
        let _ = write!(out, "{t:?}");
        for v in state {
            let _ = write!(out, ",{v:?}");
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Serialize)]
struct StepJson {
    tau: f64,
    iterations: usize,
    residual: f64,
}

#[derive(Debug, Serialize)]
struct TrajectoryJson<'a> {
    scheme: &'a str,
    p: f64,
    n: usize,
    horizon: f64,
    step_count: usize,
    stored_states: usize,
    mass_initial: f64,
    mass_final: f64,
    max_increment: f64,
    steps: Vec<StepJson>,
}

pub fn trajectory_json(traj: &Trajectory, p: f64) -> String {
    let doc = TrajectoryJson {
        scheme: traj.scheme().name(),
        p,
        n: traj.mesh().n(),
        horizon: traj.horizon(),
        step_count: traj.steps().len(),
        stored_states: traj.states().len(),
        mass_initial: traj.state(0).mass(),
        mass_final: traj.final_state().mass(),
        max_increment: traj.max_increment(),
        steps: traj
            .steps()
            .iter()
            .map(|s| StepJson {
                tau: s.tau,
                iterations: s.iterations,
                residual: s.residual,
            })
            .collect(),
    };
    to_json(&doc)
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

/// `parameter,n,error,max_error` per study point.
pub fn study_csv(r: &RateStudyResult) -> String {
    let mut out = format!("{},n,error,max_error\n", r.kind.parameter_name());
    for k in 0..r.errors.len() {
        let _ = writeln!(
            out,
            "{:?},{},{:?},{:?}",
            r.parameters[k], r.sizes[k], r.errors[k], r.max_errors[k]
        );
    }
    out
}

/// Whitespace-separated columns for gnuplot.
pub fn study_dat(r: &RateStudyResult) -> String {
    let mut out = format!("# {} error max_error\n", r.kind.parameter_name());
    for k in 0..r.errors.len() {
        let _ = writeln!(
            out,
            "{:?} {:?} {:?}",
            r.parameters[k], r.errors[k], r.max_errors[k]
        );
    }
    out
}

#[derive(Debug, Serialize)]
pub struct Window {
    pub slope_min: Option<f64>,
    pub slope_max: Option<f64>,
    pub require_decreasing: bool,
}

#[derive(Debug, Serialize)]
pub struct StudySummary {
    pub kind: &'static str,
    pub parameter: &'static str,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub max_residual: Option<f64>,
    pub decreasing: bool,
    pub time_stability: Option<f64>,
    pub reference: f64,
    pub window: Window,
    pub verdict: &'static str,
}

impl StudySummary {
    pub fn new(r: &RateStudyResult, window: Window) -> Self {
        let decreasing = r.strictly_decreasing();
        let slope = r.fit.map(|f| f.slope);
        let in_window = |s: Option<f64>| match s {
            Some(s) => {
                window.slope_min.is_none_or(|lo| s >= lo)
                    && window.slope_max.is_none_or(|hi| s <= hi)
            }
            None => window.slope_min.is_none() && window.slope_max.is_none(),
        };
        let checked =
            window.slope_min.is_some() || window.slope_max.is_some() || window.require_decreasing;
        let pass = in_window(slope) && (!window.require_decreasing || decreasing);
        Self {
            kind: r.kind.name(),
            parameter: r.kind.parameter_name(),
            slope,
            intercept: r.fit.map(|f| f.intercept),
            max_residual: r.fit.map(|f| f.max_residual),
            decreasing,
            time_stability: r.time_stability,
            reference: r.reference,
            window,
            verdict: match (checked, pass) {
                (false, _) => "unchecked",
                (true, true) => "pass",
                (true, false) => "fail",
            },
        }
    }

    pub fn failed(&self) -> bool {
        self.verdict == "fail"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use plap_core::graph::{sample, truncate};
    use plap_core::mesh::project_kernel;
    use plap_core::KernelSpec;

    #[test]
    fn grid_function_round_trips() {
        let mesh = Arc::new(Mesh::uniform(5).unwrap());
        let g = GridFunction::new(mesh, vec![0.1, -2.5, 1e-300, 3.0, 1.0 / 3.0]).unwrap();
        let text = grid_function_csv(&g);
        assert!(text.starts_with("# n=5 layout=uniform\n0.0,0.2,0.1\n"));
        assert_eq!(parse_grid_function(&text).unwrap(), g);

        let mesh = Arc::new(Mesh::from_boundaries(vec![0.0, 0.3, 1.0]).unwrap());
        let g = GridFunction::new(mesh, vec![1.0, 2.0]).unwrap();
        assert_eq!(parse_grid_function(&grid_function_csv(&g)).unwrap(), g);
    }

    #[test]
    fn malformed_grid_functions_are_rejected() {
        assert!(parse_grid_function("0,1,2\n").is_err());
        assert!(parse_grid_function("# n=2 layout=uniform\n0,0.5,1\n").is_err());
        assert!(parse_grid_function("# n=2 layout=uniform\n0,0.5,1\n0.6,1,1\n").is_err());
    }

    #[test]
    fn kernel_round_trips() {
        let mesh = Arc::new(Mesh::uniform(6).unwrap());
        let kd = project_kernel(&KernelSpec::power_law(0.5).unwrap(), &mesh).unwrap();
        assert_eq!(parse_kernel(&kernel_csv(&kd)).unwrap(), kd);
        let bad = "# n=2 layout=uniform\n0,1\n2,0\n";
        assert!(parse_kernel(bad).is_err());
    }

    #[test]
    fn edge_list_round_trips() {
        let mesh = Arc::new(Mesh::uniform(40).unwrap());
        let kd = project_kernel(&KernelSpec::power_law(0.5).unwrap(), &mesh).unwrap();
        let g = sample(&truncate(&kd, 0.3).unwrap(), 11);
        let text = edge_list(&g);
        assert!(text.starts_with("40 0.3 11\n"));
        assert_eq!(parse_edge_list(&text).unwrap(), g);
        assert!(parse_edge_list("3 0.5 1\n0 2\n").is_err());
    }
}
