//! Command dispatch.

use std::path::PathBuf;

use clap::Parser;
use wirecalc_core::continuous::{coordinate_names, euler, steady_states, ContinuousSystem, NewtonConfig, RealSystem, SolveMode, SteadyStates};
use wirecalc_core::dense::eigenvalues;
use wirecalc_core::discrete::{run_stream, steady_state_matrix, InitializedDiscreteSystem};
use wirecalc_core::setmat::steady_state_sets;
use wirecalc_core::expr::{self, Expr};
use wirecalc_core::instrument;
use wirecalc_core::linear::{classify_stability, linearize_at, stst_linearization, LinearSystem, DEFAULT_STABILITY_TOL};
use wirecalc_core::plan::Plan;
use wirecalc_core::tfs::{Point, TypedFiniteSet};

use crate::ast::Workspace;
use crate::load::{self, find_state, state_labels, Env, Kind, Res};
use crate::render::{self, num, Format};
use crate::syntax::{self, print_item, print_workspace};

pub const COMMANDS: &[&str] = &[
    "check",
    "print",
    "run",
    "compose",
    "stst",
    "stst-sets",
    "stst-measure",
    "stream",
    "euler",
    "roots",
    "linearize",
    "stability",
    "check-compositional",
];

#[derive(Parser, Debug, Clone)]
#[command(name = "wirecalc", about = "Compose open dynamical systems along wiring diagrams")]
pub struct Opts {
    /// One of: check, print, run, compose, stst, stst-sets, stst-measure, stream,
    /// euler, roots, linearize, stability, check-compositional
    pub command: String,
    /// System, matrix or composite to act on; defaults to the last one declared
    pub target: Option<String>,
    #[arg(long)]
    pub file: Option<PathBuf>,
    #[arg(long, default_value = "tensor-then-wire")]
    pub plan: Plan,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    /// Initial state (stream, euler)
    #[arg(long)]
    pub init: Option<String>,
    /// Input stream, whitespace separated; multi-port inputs as `T,F`
    #[arg(long, allow_hyphen_values = true)]
    pub inputs: Option<String>,
    /// Input point, comma separated
    #[arg(long, allow_hyphen_values = true)]
    pub at: Option<String>,
    /// State point for linearize, comma separated
    #[arg(long, allow_hyphen_values = true)]
    pub state: Option<String>,
    /// Number of random workspaces for check-compositional
    #[arg(long, default_value_t = 20)]
    pub count: usize,
    /// stst, stst-sets: build the composite system and search its states
    /// instead of composing the parts' matrices
    #[arg(long)]
    pub enumerate: bool,
}

/// What a command produced. `code` is 0 on success and 1 on diagnostics.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome { stdout, stderr: String::new(), code: 0 }
    }

    fn fail(stderr: String) -> Self {
        Outcome { stdout: String::new(), stderr, code: 1 }
    }
}

/// Parse and elaborate workspace text, formatting diagnostics with `origin`.
pub fn load_text(text: &str, origin: &str) -> Result<(Workspace, Env), String> {
    let fmt = |ds: Vec<syntax::Diagnostic>| ds.iter().map(|d| format!("{origin}:{d}\n")).collect::<String>();
    let ws = syntax::parse_workspace(text).map_err(fmt)?;
    let env = load::load(&ws).map_err(fmt)?;
    Ok((ws, env))
}

/// Run one command line. `source` is the workspace text if one was given.
pub fn execute(opts: &Opts, source: Option<(&str, &str)>) -> Outcome {
    if !COMMANDS.contains(&opts.command.as_str()) {
        return Outcome::fail(format!("error: unknown command `{}` (expected one of {})\n", opts.command, COMMANDS.join(", ")));
    }
    if opts.command == "check-compositional" && source.is_none() {
        return crate::check::random_workspaces(opts.seed, opts.count, opts.format);
    }
    let Some((text, origin)) = source else {
        return Outcome::fail(format!("error: `{}` needs a workspace (--file)\n", opts.command));
    };
    let (ws, env) = match load_text(text, origin) {
        Ok(x) => x,
        Err(e) => return Outcome::fail(e),
    };
    match opts.command.as_str() {
        "check" => Outcome::ok(format!(
            "ok: {} boxes, {} wirings, {} systems\n",
            env.boxes.len(),
            env.wirings.len(),
            env.values.len()
        )),
        "print" => Outcome::ok(print_workspace(&ws)),
        "run" => run_stored(&env, opts.format),
        "check-compositional" => crate::check::check_env(&env, opts.format),
        _ => match dispatch(&env, opts) {
            Ok(s) => Outcome::ok(s),
            Err(e) => Outcome::fail(format!("error: {e}\n")),
        },
    }
}

/// Run a command written as one line of words, e.g. `stst both --plan serial`.
pub fn execute_line(line: &str, source: Option<(&str, &str)>) -> Outcome {
    let words = match syntax::shell_words(line) {
        Ok(w) => w,
        Err(e) => return Outcome::fail(format!("error: {e}\n")),
    };
    let argv = std::iter::once("wirecalc".to_string()).chain(words);
    match Opts::try_parse_from(argv) {
        Ok(opts) => execute(&opts, source),
        Err(e) => Outcome::fail(format!("error: {}\n", e.to_string().lines().next().unwrap_or("").trim_start_matches("error: "))),
    }
}

/// Execute the `run` lines stored in the workspace, in order.
fn run_stored(env: &Env, format: Format) -> Outcome {
    let mut out = Outcome::default();
    for r in &env.runs {
        let mut argv = vec!["wirecalc".to_string(), r.command.clone()];
        argv.extend(r.args.iter().cloned());
        if !r.args.iter().any(|a| a == "--format") {
            argv.push("--format".into());
            argv.push(if format == Format::Text { "text" } else { "machine" }.into());
        }
        let opts = match Opts::try_parse_from(&argv) {
            Ok(o) => o,
            Err(e) => {
                out.stderr.push_str(&format!("{}: {}\n", r.pos, e.to_string().lines().next().unwrap_or("")));
                out.code = 1;
                continue;
            }
        };
        if opts.command == "run" {
            out.stderr.push_str(&format!("{}: `run` cannot be nested\n", r.pos));
            out.code = 1;
            continue;
        }
        if format == Format::Text {
            let shown: Vec<String> = argv[1..].iter().map(|a| syntax::quote(a)).collect();
            out.stdout.push_str(&format!("> {}\n", shown.join(" ")));
        }
        let res = if opts.command == "check-compositional" {
            crate::check::check_env(env, opts.format)
        } else {
            match dispatch(env, &opts) {
                Ok(s) => Outcome::ok(s),
                Err(e) => Outcome::fail(format!("{}: error: {e}\n", r.pos)),
            }
        };
        out.stdout.push_str(&res.stdout);
        out.stderr.push_str(&res.stderr);
        out.code = out.code.max(res.code);
    }
    out
}

fn target(env: &Env, opts: &Opts) -> Res<String> {
    match &opts.target {
        Some(t) => env.value(t).map(|_| t.clone()),
        None => env.order.last().cloned().ok_or_else(|| "the workspace declares no systems".to_string()),
    }
}

fn dispatch(env: &Env, opts: &Opts) -> Res<String> {
    let name = target(env, opts)?;
    let f = opts.format;
    match opts.command.as_str() {
        "compose" => compose(env, &name, opts.plan, f),
        "stst" if opts.enumerate => counted(f, || {
            let m = steady_state_matrix(&env.discrete(&name, opts.plan)?).map_err(|e| e.to_string())?;
            Ok(render::matrix(f, &format!("Stst({name})"), &m))
        }),
        "stst-sets" if opts.enumerate => counted(f, || {
            let m = steady_state_sets(&env.discrete(&name, opts.plan)?).map_err(|e| e.to_string())?;
            Ok(render::matrix(f, &format!("Stst({name}) as state sets"), &m))
        }),
        _ if opts.enumerate => Err("--enumerate applies to stst and stst-sets only".into()),
        "stst" => counted(f, || Ok(render::matrix(f, &format!("Stst({name})"), &env.stst(&name, opts.plan)?))),
        "stst-sets" => counted(f, || Ok(render::matrix(f, &format!("Stst({name}) as state sets"), &env.stst_sets(&name, opts.plan)?))),
        "stst-measure" => {
            counted(f, || Ok(render::matrix(f, &format!("Stst({name}) weighted"), &env.stst_measure(&name, opts.plan)?)))
        }
        "stream" => stream(env, &name, opts),
        "euler" => euler_cmd(env, &name, opts),
        "roots" => roots(env, &name, opts),
        "linearize" => linearize(env, &name, opts),
        "stability" => stability(env, &name, opts),
        other => Err(format!("`{other}` cannot be used here")),
    }
}

/// Text output reports how many composite states were enumerated.
fn counted(format: Format, f: impl FnOnce() -> Res<String>) -> Res<String> {
    let (r, n) = instrument::counting(f);
    let mut s = r?;
    if format == Format::Text {
        s.push_str(&format!("composite states enumerated: {n}\n"));
    }
    Ok(s)
}

fn compose(env: &Env, name: &str, plan: Plan, format: Format) -> Res<String> {
    let b = &env.value_box[name];
    let mut out = String::new();
    let item = match env.kind(name)? {
        Kind::Discrete => {
            let d = env.discrete(name, plan)?;
            if format == Format::Text {
                out.push_str(&format!("# {name}: {} states\n", d.n_states()));
            }
            crate::ast::Item::Discrete(load::discrete_decl(name, b, &d)?)
        }
        Kind::Weighted => {
            let w = env.weighted(name, plan)?;
            if format == Format::Text {
                out.push_str(&format!("# {name}: {} states\n", w.system.n_states()));
            }
            let base = format!("{name}_base");
            out.push_str(&print_item(&crate::ast::Item::Discrete(load::discrete_decl(&base, b, &w.system)?)));
            crate::ast::Item::Weighted(load::weighted_decl(name, &base, &w))
        }
        Kind::Continuous => crate::ast::Item::Continuous(load::continuous_decl(name, b, &env.continuous(name, plan)?)),
        Kind::Linear => crate::ast::Item::Linear(load::linear_decl(name, b, &env.linear(name, plan)?)),
        Kind::Nat => crate::ast::Item::Matrix(load::nat_decl(name, b, &env.nat(name, plan)?)),
        Kind::Real => crate::ast::Item::Matrix(load::real_decl(name, b, &env.real(name, plan)?)),
    };
    out.push_str(&print_item(&item));
    Ok(out)
}

fn finite_point(set: &TypedFiniteSet, text: &str) -> Res<Point> {
    let t = text.trim_start_matches('(').trim_end_matches(')');
    let syms: Vec<&str> = if t.is_empty() { vec![] } else { t.split(',').map(str::trim).collect() };
    set.point_from_symbols(&syms).map_err(|e| format!("input `{text}`: {e}"))
}

fn reals(text: &str, what: &str) -> Res<Vec<f64>> {
    if text.trim().is_empty() {
        return Ok(vec![]);
    }
    text.split(',').map(|s| s.trim().parse::<f64>().map_err(|_| format!("{what}: `{s}` is not a number"))).collect()
}

fn real_point(set: &TypedFiniteSet, at: Option<&str>) -> Res<Point> {
    let v = match at {
        Some(t) => reals(t, "--at")?,
        None if set.dims() == 0 => vec![],
        None => return Err(format!("--at needs {} comma separated input coordinates", set.dims())),
    };
    if v.len() != set.dims() {
        return Err(format!("--at needs {} coordinates ({}), got {}", set.dims(), coordinate_names(set).join(","), v.len()));
    }
    Ok(Point::Euclid(v))
}

fn stream(env: &Env, name: &str, opts: &Opts) -> Res<String> {
    let d = env.discrete(name, opts.plan)?;
    let labels = state_labels(&d);
    let init = match &opts.init {
        Some(s) => find_state(&d, s)?,
        None => 0,
    };
    let sys = InitializedDiscreteSystem { system: d.clone(), initial: init };
    let words: Vec<String> = opts.inputs.as_deref().unwrap_or("").split_whitespace().map(String::from).collect();
    let inputs = words.iter().map(|w| finite_point(&d.interface().inputs, w)).collect::<Res<Vec<_>>>()?;
    let (states, outs) = run_stream(&sys, &inputs).map_err(|e| e.to_string())?;
    let outs: Vec<String> = outs.iter().map(|&b| d.interface().outputs.label(b)).collect();
    let sts: Vec<String> = states.iter().map(|&s| labels[s].clone()).collect();
    if opts.format == Format::Machine {
        return Ok(format!("states {}\noutputs {}\n", sts.join(" "), outs.join(" ")));
    }
    let mut grid = vec![vec!["step".to_string(), "input".into(), "state".into(), "output".into()]];
    for i in 0..states.len() {
        let inp = if i == 0 { "-".to_string() } else { words[i - 1].clone() };
        grid.push(vec![i.to_string(), inp, sts[i].clone(), outs[i].clone()]);
    }
    Ok(table(&grid))
}

fn table(grid: &[Vec<String>]) -> String {
    let w: Vec<usize> = (0..grid[0].len()).map(|j| grid.iter().map(|r| r[j].chars().count()).max().unwrap_or(0)).collect();
    let mut s = String::new();
    for r in grid {
        let cells: Vec<String> = r.iter().enumerate().map(|(j, c)| format!("{c:w$}", w = w[j])).collect();
        s.push_str(cells.join("  ").trim_end());
        s.push('\n');
    }
    s
}

fn euler_cmd(env: &Env, name: &str, opts: &Opts) -> Res<String> {
    let f = env.continuous(name, opts.plan)?;
    let eps = opts.eps.ok_or("euler needs --eps")?;
    let e = euler(&f, eps).map_err(|e| e.to_string())?;
    let mut s = String::new();
    if opts.format == Format::Text {
        s.push_str(&format!("# Euler step of {name} with eps = {}\n", num(eps)));
    }
    for (v, step) in f.state_vars().iter().zip(euler_step(&f, eps)) {
        s.push_str(&format!("next {v} = {step}\n"));
    }
    for (o, r) in coordinate_names(&f.interface().outputs).iter().zip(f.readout()) {
        s.push_str(&format!("out {o} = {r}\n"));
    }
    if let Some(init) = &opts.init {
        let mut x = reals(init, "--init")?;
        if x.len() != f.state_dim() {
            return Err(format!("--init needs {} state coordinates", f.state_dim()));
        }
        s.push_str(&format!("step 0: state {} output {}\n", render::vector(&x), render::vector(&e.readout(&x).map_err(|e| e.to_string())?)));
        for (i, w) in opts.inputs.as_deref().unwrap_or("").split_whitespace().enumerate() {
            let a = reals(w, "--inputs")?;
            x = e.update(&a, &x).map_err(|e| e.to_string())?;
            let y = e.readout(&x).map_err(|e| e.to_string())?;
            s.push_str(&format!("step {}: state {} output {}\n", i + 1, render::vector(&x), render::vector(&y)));
        }
    }
    Ok(s)
}

fn solve_mode(f: &ContinuousSystem, jobs: usize) -> SolveMode {
    if f.is_affine() {
        SolveMode::ExactAffine
    } else {
        SolveMode::Newton(NewtonConfig { jobs: jobs.max(1), ..NewtonConfig::default() })
    }
}

fn roots(env: &Env, name: &str, opts: &Opts) -> Res<String> {
    let f = env.continuous(name, opts.plan)?;
    let a = real_point(&f.interface().inputs, opts.at.as_deref())?;
    let outs = coordinate_names(&f.interface().outputs);
    let machine = opts.format == Format::Machine;
    let mut s = String::new();
    match steady_states(&f, &a, &solve_mode(&f, opts.jobs)).map_err(|e| e.to_string())? {
        SteadyStates::Affine(None) => s.push_str(if machine { "affine none\n" } else { "no steady states\n" }),
        SteadyStates::Affine(Some(sol)) => {
            if machine {
                s.push_str(&format!("affine {}\nparticular {}\n", sol.basis.len(), render::vector(&sol.particular)));
                for b in &sol.basis {
                    s.push_str(&format!("basis {}\n", render::vector(b)));
                }
            } else {
                if sol.basis.is_empty() {
                    s.push_str("exactly one steady state (dynamics are affine)\n");
                } else {
                    s.push_str(&format!("steady states form a {}-parameter family in {}\n", sol.basis.len(), sol.params.join(", ")));
                }
                for (j, v) in f.state_vars().iter().enumerate() {
                    let mut e = expr::num(sol.particular[j]);
                    for (b, t) in sol.basis.iter().zip(&sol.params) {
                        e = e + expr::num(b[j]) * expr::var(t);
                    }
                    s.push_str(&format!("{v} = {}\n", e.simplify()));
                }
                for (o, r) in outs.iter().zip(&sol.readout) {
                    s.push_str(&format!("out {o} = {r}\n"));
                }
            }
        }
        SteadyStates::Newton(rep) => {
            if !machine {
                s.push_str(&format!(
                    "{} steady states found by multi-start Newton (heuristic, may be incomplete; {} starts failed)\n",
                    rep.roots.len(),
                    rep.failures.len()
                ));
            }
            for r in &rep.roots {
                if machine {
                    s.push_str(&format!("root {} out {}\n", render::vector(&r.state), render::vector(&r.readout)));
                } else {
                    let st: Vec<String> = f.state_vars().iter().zip(&r.state).map(|(v, x)| format!("{v} = {}", num(*x))).collect();
                    let ou: Vec<String> = outs.iter().zip(&r.readout).map(|(v, x)| format!("{v} = {}", num(*x))).collect();
                    s.push_str(&format!("{}  ->  {}  (residual {:e})\n", st.join(", "), ou.join(", "), r.residual));
                }
            }
        }
    }
    Ok(s)
}

fn linear_text(l: &LinearSystem) -> String {
    format!(
        "{}{}{}",
        render::real_rows("in", &l.m_in),
        render::real_rows("mid", &l.m_mid),
        render::real_rows("out", &l.m_out)
    )
}

fn linearize(env: &Env, name: &str, opts: &Opts) -> Res<String> {
    let f = env.continuous(name, opts.plan)?;
    let a = real_point(&f.interface().inputs, opts.at.as_deref())?;
    if let Some(st) = &opts.state {
        let s0 = reals(st, "--state")?;
        let l = linearize_at(&f, &a, &s0).map_err(|e| e.to_string())?;
        return Ok(linear_text(&l));
    }
    let found = stst_linearization(&f, &[a], &solve_mode(&f, opts.jobs)).map_err(|e| e.to_string())?;
    if found.is_empty() {
        return Ok("no steady states\n".into());
    }
    let mut s = String::new();
    for ls in found {
        s.push_str(&format!("state {} output {}\n", render::vector(&ls.state), render::vector(&ls.output)));
        s.push_str(&linear_text(&ls.system));
    }
    Ok(s)
}

fn verdict(l: &LinearSystem, machine: bool) -> Res<String> {
    let v = classify_stability(l, DEFAULT_STABILITY_TOL).map_err(|e| e.to_string())?;
    if machine {
        return Ok(v.to_string());
    }
    let eig = eigenvalues(&l.m_mid).map_err(|e| e.to_string())?;
    let eig: Vec<String> = eig
        .iter()
        .map(|(re, im)| if *im == 0.0 { num(*re) } else { format!("{}{}{}i", num(*re), if *im < 0.0 { "-" } else { "+" }, num(im.abs())) })
        .collect();
    Ok(format!("{v} (eigenvalues {})", eig.join(", ")))
}

fn stability(env: &Env, name: &str, opts: &Opts) -> Res<String> {
    let machine = opts.format == Format::Machine;
    match env.kind(name)? {
        Kind::Linear => Ok(format!("{}\n", verdict(&env.linear(name, opts.plan)?, machine)?)),
        Kind::Continuous => {
            let f = env.continuous(name, opts.plan)?;
            let a = real_point(&f.interface().inputs, opts.at.as_deref())?;
            let found = stst_linearization(&f, &[a], &solve_mode(&f, opts.jobs)).map_err(|e| e.to_string())?;
            if found.is_empty() {
                return Ok("no steady states\n".into());
            }
            let mut s = String::new();
            for ls in found {
                s.push_str(&format!("state {}: {}\n", render::vector(&ls.state), verdict(&ls.system, machine)?));
            }
            Ok(s)
        }
        k => Err(format!("`{name}` is {}, but stability needs a linear or continuous system", k.describe())),
    }
}

/// Symbolic update `x + eps * f(a, x)` for each state variable.
pub fn euler_step(f: &ContinuousSystem, eps: f64) -> Vec<Expr> {
    f.state_vars().iter().zip(f.dynamics()).map(|(v, d)| (expr::var(v) + expr::num(eps) * d.clone()).simplify()).collect()
}
