//! Command-line front end: experiment subcommands, CSV emission and `run_meta.txt`.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::caputo::{kernel_row, rho_bar, rho_star};
use crate::diagnostics::{energy_series, EnergyForm};
use crate::error::{Error, Result};
use crate::experiments::{caputo_convergence, manufactured_sweep, tfch_convergence};
use crate::mesh::{validate_ratio_bound, TemporalMesh};
use crate::report::{self, num, sci3, Table};
use crate::solver::{solve, Initial, SolverConfig};
use crate::verify::run_property_suite;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "tfch",
    version,
    about = "L2 Caputo discretization and compact TFCH solver experiments"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

/// Flags shared by every subcommand. Unset flags fall back to `--config`, then to
/// the subcommand's defaults.
#[derive(Debug, Args, Default, Clone)]
pub struct Common {
    /// Fractional orders, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    pub alpha: Option<Vec<f64>>,
    /// Temporal step counts, comma separated.
    #[arg(long = "N", global = true, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    /// Spatial intervals.
    #[arg(long = "M", global = true)]
    pub m: Option<usize>,
    /// Final time.
    #[arg(long = "T", global = true)]
    pub t: Option<f64>,
    #[arg(long, global = true)]
    pub kappa: Option<f64>,
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub mesh: Option<MeshArg>,
    /// Node file for `--mesh file`: one time per line starting at 0, or a `mesh` CSV.
    #[arg(long = "mesh-file", global = true)]
    pub mesh_file: Option<PathBuf>,
    /// Fixed-point stopping tolerance (max norm of the update).
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long = "max-iter", global = true)]
    pub max_iter: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Plain-text `key = value` file; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MeshArg {
    GradedCubic,
    Uniform,
    File,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitialArg {
    Bump,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormArg {
    NegH,
    Pointwise,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Largest admissible step ratio per order, the q3 curves and (rho_bar, alpha_bar).
    RhoStar,
    /// Mesh table and the kernel rows at one level.
    Mesh {
        /// Level of the kernel rows (defaults to N).
        #[arg(long)]
        level: Option<usize>,
    },
    /// Error and order of the discrete fractional ODE solved with the L2 formula.
    CaputoConvergence,
    /// Temporal errors of the TFCH solver against a fine reference run.
    TfchConvergence {
        /// Steps of the reference run.
        #[arg(long = "N0")]
        n0: Option<usize>,
    },
    /// One run per order with energy, mass and step-validator series.
    TfchRun {
        #[arg(long, value_enum)]
        initial: Option<InitialArg>,
        /// Quadratic form used for the history part of the modified energy.
        #[arg(long = "energy-form", value_enum)]
        energy_form: Option<FormArg>,
        /// Also write every state.
        #[arg(long = "dump-states")]
        dump_states: bool,
    },
    /// Comparison with the exact solution of the forced problem, per N.
    Manufactured,
    /// Seeded property suite; exits 1 if any check fails.
    Verify,
}

fn usage(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("config line {}: expected key = value", i + 1)))?;
        map.insert(k.trim().replace('-', "_"), v.trim().to_string());
    }
    Ok(map)
}

fn parse_value<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| usage(format!("config key {key}: cannot parse {v:?}")))
}

fn parse_list<T: std::str::FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',').map(|s| parse_value(key, s.trim())).collect()
}

const KNOWN_KEYS: &[&str] = &[
    "alpha",
    "N",
    "M",
    "T",
    "kappa",
    "epsilon",
    "mesh",
    "mesh_file",
    "tol",
    "max_iter",
    "out",
    "seed",
];

/// Fills unset flags from a config file.
pub fn merge_config(common: &mut Common, text: &str) -> Result<()> {
    let map = parse_config(text)?;
    for key in map.keys() {
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(usage(format!("unknown config key {key}")));
        }
    }
    let get = |k: &str| map.get(k).map(String::as_str);
    if common.alpha.is_none() {
        common.alpha = get("alpha").map(|v| parse_list("alpha", v)).transpose()?;
    }
    if common.n.is_none() {
        common.n = get("N").map(|v| parse_list("N", v)).transpose()?;
    }
    macro_rules! scalar {
        ($field:ident, $key:literal) => {
            if common.$field.is_none() {
                common.$field = get($key).map(|v| parse_value($key, v)).transpose()?;
            }
        };
    }
    scalar!(m, "M");
    scalar!(t, "T");
    scalar!(kappa, "kappa");
    scalar!(epsilon, "epsilon");
    scalar!(tol, "tol");
    scalar!(max_iter, "max_iter");
    scalar!(seed, "seed");
    if common.out.is_none() {
        common.out = get("out").map(PathBuf::from);
    }
    if common.mesh_file.is_none() {
        common.mesh_file = get("mesh_file").map(PathBuf::from);
    }
    if common.mesh.is_none() {
        common.mesh = get("mesh")
            .map(|v| {
                MeshArg::from_str(v, true)
                    .map_err(|_| usage(format!("config key mesh: unknown kind {v:?}")))
            })
            .transpose()?;
    }
    Ok(())
}

/// Fully resolved settings of one invocation.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub alphas: Vec<f64>,
    pub ns: Vec<usize>,
    pub m: usize,
    pub horizon: f64,
    pub kappa: f64,
    pub epsilon: f64,
    pub mesh: MeshArg,
    pub mesh_file: Option<PathBuf>,
    pub tol: f64,
    pub max_iter: usize,
    pub out: PathBuf,
    pub seed: u64,
}

struct Defaults {
    alphas: Vec<f64>,
    ns: Vec<usize>,
    m: usize,
}

fn defaults(cmd: &Command) -> Defaults {
    let (alphas, ns, m) = match cmd {
        Command::RhoStar => ((1..=20).map(|i| i as f64 / 20.0).collect(), vec![200], 60),
        Command::Mesh { .. } => (vec![0.5], vec![200], 60),
        Command::CaputoConvergence => (
            vec![0.3, 0.5, 0.7, 0.9],
            vec![250, 500, 1000, 2000, 4000],
            60,
        ),
        Command::TfchConvergence { .. } => (vec![0.3, 0.5, 0.7, 0.9], vec![15, 18, 21, 24], 60),
        Command::TfchRun { .. } => (vec![0.2, 0.4, 0.6, 0.8], vec![200], 60),
        Command::Manufactured => (vec![0.1, 0.3, 0.6, 0.9], vec![100, 125, 150, 175, 200], 60),
        Command::Verify => (vec![], vec![], 60),
    };
    Defaults { alphas, ns, m }
}

pub fn resolve(common: &Common, cmd: &Command) -> Result<Resolved> {
    let d = defaults(cmd);
    let r = Resolved {
        alphas: common.alpha.clone().unwrap_or(d.alphas),
        ns: common.n.clone().unwrap_or(d.ns),
        m: common.m.unwrap_or(d.m),
        horizon: common.t.unwrap_or(1.0),
        kappa: common.kappa.unwrap_or(0.01),
        epsilon: common.epsilon.unwrap_or(0.1),
        mesh: common.mesh.unwrap_or(MeshArg::GradedCubic),
        mesh_file: common.mesh_file.clone(),
        tol: common.tol.unwrap_or(1e-10),
        max_iter: common.max_iter.unwrap_or(500),
        out: common.out.clone().unwrap_or_else(|| PathBuf::from("out")),
        seed: common.seed.unwrap_or(0),
    };
    let upper_closed = matches!(cmd, Command::RhoStar);
    for &a in &r.alphas {
        let ok = a > 0.0 && (a < 1.0 || (upper_closed && a == 1.0));
        if !ok {
            return Err(usage(format!("alpha {a} out of range")));
        }
    }
    if r.ns.contains(&0) {
        return Err(usage("N must be positive"));
    }
    if r.m < 4 {
        return Err(usage("M must be at least 4"));
    }
    if !(r.horizon > 0.0 && r.horizon.is_finite()) {
        return Err(usage("T must be positive"));
    }
    if !(r.kappa > 0.0 && r.epsilon > 0.0) {
        return Err(usage("kappa and epsilon must be positive"));
    }
    if !(r.tol > 0.0) || r.max_iter == 0 {
        return Err(usage("tol and max-iter must be positive"));
    }
    if r.mesh == MeshArg::File && r.mesh_file.is_none() {
        return Err(usage("--mesh file needs --mesh-file"));
    }
    Ok(r)
}

/// Nodes `t_0 = 0 < t_1 < ...` from a plain list or a `mesh` CSV (`t_k` column).
pub fn read_mesh_file(path: &Path) -> Result<TemporalMesh> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .peekable();
    let column = match lines.peek() {
        Some(h) if h.starts_with('k') => {
            let i = h
                .split(',')
                .position(|c| c.trim() == "t_k")
                .ok_or_else(|| usage("mesh CSV has no t_k column"))?;
            lines.next();
            Some(i)
        }
        _ => None,
    };
    let nodes = lines
        .map(|l| {
            let cell = match column {
                Some(i) => l.split(',').nth(i).unwrap_or(""),
                None => l,
            };
            parse_value::<f64>("mesh node", cell.trim())
        })
        .collect::<Result<Vec<f64>>>()?;
    if nodes.len() < 2 || nodes[0] != 0.0 {
        return Err(usage(
            "mesh file needs t_0 = 0 followed by at least one node",
        ));
    }
    let steps: Vec<f64> = nodes.windows(2).map(|w| w[1] - w[0]).collect();
    TemporalMesh::custom(&steps)
}

impl Resolved {
    pub fn build_mesh(&self, n: usize) -> Result<TemporalMesh> {
        match self.mesh {
            MeshArg::GradedCubic => TemporalMesh::graded_cubic(n, self.horizon),
            MeshArg::Uniform => TemporalMesh::uniform(n, self.horizon),
            MeshArg::File => read_mesh_file(self.mesh_file.as_deref().expect("checked in resolve")),
        }
    }

    fn single_n(&self) -> Result<usize> {
        match self.ns.as_slice() {
            [n] => Ok(*n),
            _ => Err(usage("this subcommand takes a single N")),
        }
    }

    fn template(&self, alpha: f64, mesh: TemporalMesh) -> SolverConfig {
        SolverConfig {
            kappa: self.kappa,
            epsilon: self.epsilon,
            iteration_tol: self.tol,
            max_iterations: self.max_iter,
            ..SolverConfig::new(alpha, self.m, mesh)
        }
    }
}

fn list<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

fn mesh_name(m: MeshArg) -> &'static str {
    match m {
        MeshArg::GradedCubic => "graded-cubic",
        MeshArg::Uniform => "uniform",
        MeshArg::File => "file",
    }
}

fn write_meta(r: &Resolved, subcommand: &str, extra: &[(&str, String)]) -> Result<()> {
    let mut s = String::new();
    let _ = writeln!(s, "subcommand = {subcommand}");
    let _ = writeln!(s, "version = {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(s, "alpha = {}", list(&r.alphas));
    let _ = writeln!(s, "N = {}", list(&r.ns));
    let _ = writeln!(s, "M = {}", r.m);
    let _ = writeln!(s, "T = {}", r.horizon);
    let _ = writeln!(s, "kappa = {}", r.kappa);
    let _ = writeln!(s, "epsilon = {}", r.epsilon);
    let _ = writeln!(s, "mesh = {}", mesh_name(r.mesh));
    if let Some(p) = &r.mesh_file {
        let _ = writeln!(s, "mesh_file = {}", p.display());
    }
    let _ = writeln!(s, "tol = {}", r.tol);
    let _ = writeln!(s, "max_iter = {}", r.max_iter);
    let _ = writeln!(s, "seed = {}", r.seed);
    for (k, v) in extra {
        let _ = writeln!(s, "{k} = {v}");
    }
    write_text(&r.out.join("run_meta.txt"), &s)
}

fn write_text(path: &Path, s: &str) -> Result<()> {
    fs::write(path, s).map_err(|e| Error::Numeric(format!("{}: {e}", path.display())))
}

fn write(table: &Table, dir: &Path, name: &str) -> Result<()> {
    table.write(&dir.join(name))
}

fn tag(alpha: f64) -> String {
    format!("alpha{alpha}")
}

fn cmd_rho_star(r: &Resolved) -> Result<i32> {
    write(&report::rho_star_table(&r.alphas)?, &r.out, "rho_star.csv")?;
    let rhos: Vec<f64> = (0..=180).map(|i| 1.0 + i as f64 * 0.05).collect();
    write(&report::q3_table(&rhos, &r.alphas), &r.out, "q3_curves.csv")?;
    let (rb, ab) = rho_bar()?;
    let mut t = Table::new(&["rho_bar", "alpha_bar"]);
    t.push(vec![num(rb), num(ab)]);
    write(&t, &r.out, "rho_bar.csv")?;
    for &a in &r.alphas {
        println!("alpha = {a:<6} rho* = {:.7}", rho_star(a)?);
    }
    println!("rho_bar = {rb:.7} at alpha = {ab:.5}");
    write_meta(r, "rho-star", &[])?;
    Ok(EXIT_OK)
}

fn cmd_mesh(r: &Resolved, level: Option<usize>) -> Result<i32> {
    let mesh = r.build_mesh(r.single_n()?)?;
    let level = level.unwrap_or(mesh.len());
    if level == 0 || level > mesh.len() {
        return Err(usage(format!("level must lie in 1..={}", mesh.len())));
    }
    write(&report::mesh_table(&mesh), &r.out, "mesh.csv")?;
    for &a in &r.alphas {
        let row = kernel_row(level, &mesh, a)?;
        write(
            &report::kernel_table(&row),
            &r.out,
            &format!("kernels_{}.csv", tag(a)),
        )?;
        let v = validate_ratio_bound(&mesh, a)?;
        println!(
            "alpha = {a}: max ratio {:.6}, rho* = {:.6}, ratio bound {}",
            mesh.ratios().iter().cloned().fold(0.0, f64::max),
            v.rho_star,
            if v.passed() { "holds" } else { "violated" }
        );
    }
    write_meta(r, "mesh", &[("level", level.to_string())])?;
    Ok(EXIT_OK)
}

fn cmd_caputo_convergence(r: &Resolved) -> Result<i32> {
    let cells = caputo_convergence(&r.alphas, &r.ns)?;
    write(
        &report::order_table(&cells),
        &r.out,
        "caputo_convergence.csv",
    )?;
    print!("{}", report::render_order_table(&cells));
    write_meta(
        r,
        "caputo-convergence",
        &[(
            "problem",
            "w = t^(3+alpha) on graded cubic mesh, T = 1".into(),
        )],
    )?;
    Ok(EXIT_OK)
}

fn cmd_tfch_convergence(r: &Resolved, n0: Option<usize>) -> Result<i32> {
    let n0 = n0.unwrap_or(200);
    let template = r.template(r.alphas[0], TemporalMesh::graded_cubic(1, r.horizon)?);
    let cells = tfch_convergence(&template, &r.alphas, &r.ns, n0)?;
    write(&report::order_table(&cells), &r.out, "tfch_convergence.csv")?;
    print!("{}", report::render_order_table(&cells));
    write_meta(r, "tfch-convergence", &[("N0", n0.to_string())])?;
    Ok(EXIT_OK)
}

fn cmd_tfch_run(r: &Resolved, initial: InitialArg, form: FormArg, dump: bool) -> Result<i32> {
    let mesh = r.build_mesh(r.single_n()?)?;
    let form = match form {
        FormArg::NegH => EnergyForm::NegHForm,
        FormArg::Pointwise => EnergyForm::Pointwise,
    };
    println!(
        "{:>6}  {:>10}  {:>10}  {:>10}  {:>8}  {:>11}",
        "alpha", "E^N", "max dE", "mass drift", "max iter", "unmet s/e/l"
    );
    for &a in &r.alphas {
        let mut cfg = r.template(a, mesh.clone());
        if initial == InitialArg::Zero {
            cfg.initial = Initial::Zero;
        }
        let run = solve(&cfg)?;
        let series = energy_series(&cfg, &run, form)?;
        write(
            &report::energy_table(&series),
            &r.out,
            &format!("energy_{}.csv", tag(a)),
        )?;
        write(
            &report::mass_table(&series),
            &r.out,
            &format!("mass_{}.csv", tag(a)),
        )?;
        let mut v = Table::new(&[
            "n",
            "t_n",
            "iterations",
            "last_update",
            "solvability_ok",
            "energy_ok",
            "lipschitz_ok",
            "lipschitz_constant",
        ]);
        for (i, f) in run.validator_flags.iter().enumerate() {
            v.push(vec![
                (i + 1).to_string(),
                num(mesh.t(i + 1)),
                run.iterations[i].to_string(),
                num(run.residuals[i]),
                f.solvability.to_string(),
                f.energy.to_string(),
                f.lipschitz.to_string(),
                num(f.lipschitz_constant),
            ]);
        }
        write(&v, &r.out, &format!("validators_{}.csv", tag(a)))?;
        if dump {
            let mut s = Table::new(&["n", "t_n", "i", "x", "u"]);
            for (n, u) in run.states.iter().enumerate() {
                for (i, &val) in u.values().iter().enumerate() {
                    s.push(vec![
                        n.to_string(),
                        num(mesh.t(n)),
                        i.to_string(),
                        num(u.x(i)),
                        num(val),
                    ]);
                }
            }
            write(&s, &r.out, &format!("states_{}.csv", tag(a)))?;
        }
        let count = |pick: fn(&crate::solver::StepFlags) -> bool| {
            run.validator_flags.iter().filter(|f| !pick(f)).count()
        };
        let unmet = format!(
            "{}/{}/{}",
            count(|f| f.solvability),
            count(|f| f.energy),
            count(|f| f.lipschitz)
        );
        println!(
            "{a:>6}  {:>10}  {:>10}  {:>10}  {:>8}  {:>11}",
            sci3(*series.free_energy.last().expect("nonempty")),
            sci3(series.max_modified_increase()),
            sci3(series.max_mass_drift()),
            run.iterations.iter().max().copied().unwrap_or(0),
            unmet,
        );
        if !run.ratio_bound_ok {
            println!(
                "        warning: step ratios exceed rho*({a}); energy estimates do not apply"
            );
        }
    }
    let extra = [
        ("initial", format!("{initial:?}").to_lowercase()),
        ("energy_form", format!("{form:?}")),
        ("dump_states", dump.to_string()),
    ];
    write_meta(r, "tfch-run", &extra)?;
    Ok(EXIT_OK)
}

fn cmd_manufactured(r: &Resolved) -> Result<i32> {
    println!(
        "{:>6}  {}",
        "N",
        r.alphas
            .iter()
            .map(|a| format!("{:>10}", format!("a={a}")))
            .collect::<String>()
    );
    for &n in &r.ns {
        let mesh = r.build_mesh(n)?;
        let template = SolverConfig {
            kappa: r.kappa,
            epsilon: r.epsilon,
            iteration_tol: r.tol,
            max_iterations: r.max_iter,
            ..SolverConfig::manufactured(r.alphas[0], r.m, mesh)
        };
        let results = manufactured_sweep(&template, &r.alphas)?;
        write(
            &report::manufactured_profile_table(&results),
            &r.out,
            &format!("manufactured_N{n}.csv"),
        )?;
        write(
            &report::manufactured_summary_table(&results),
            &r.out,
            &format!("manufactured_summary_N{n}.csv"),
        )?;
        println!(
            "{n:>6}  {}",
            results
                .iter()
                .map(|x| format!("{:>10}", sci3(x.max_error)))
                .collect::<String>()
        );
    }
    write_meta(r, "manufactured", &[])?;
    Ok(EXIT_OK)
}

fn cmd_verify(r: &Resolved) -> Result<i32> {
    let outcomes = run_property_suite(r.seed)?;
    let mut t = Table::new(&["check", "status", "detail"]);
    let mut failed = 0;
    for c in &outcomes {
        let status = match (c.passed, c.warning) {
            (false, _) => "FAIL",
            (true, true) => "WARN",
            (true, false) => "PASS",
        };
        failed += usize::from(!c.passed);
        println!("{status} {}: {}", c.name, c.detail);
        t.push(vec![
            c.name.to_string(),
            status.to_string(),
            c.detail.clone(),
        ]);
    }
    write(&t, &r.out, "verify.csv")?;
    write_meta(r, "verify", &[])?;
    println!("{} checks, {failed} failed", outcomes.len());
    Ok(if failed == 0 { EXIT_OK } else { EXIT_FAILURE })
}

fn execute(cli: Cli) -> Result<i32> {
    let mut common = cli.common;
    if let Some(path) = &common.config {
        let text =
            fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        merge_config(&mut common, &text)?;
    }
    let r = resolve(&common, &cli.command)?;
    fs::create_dir_all(&r.out).map_err(|e| usage(format!("{}: {e}", r.out.display())))?;
    match cli.command {
        Command::RhoStar => cmd_rho_star(&r),
        Command::Mesh { level } => cmd_mesh(&r, level),
        Command::CaputoConvergence => cmd_caputo_convergence(&r),
        Command::TfchConvergence { n0 } => cmd_tfch_convergence(&r, n0),
        Command::TfchRun {
            initial,
            energy_form,
            dump_states,
        } => cmd_tfch_run(
            &r,
            initial.unwrap_or(InitialArg::Bump),
            energy_form.unwrap_or(FormArg::NegH),
            dump_states,
        ),
        Command::Manufactured => cmd_manufactured(&r),
        Command::Verify => cmd_verify(&r),
    }
}

/// Parses `args` (program name first), runs the subcommand and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::InvalidArgument(_) => EXIT_USAGE,
                _ => EXIT_FAILURE,
            }
        }
    }
}
